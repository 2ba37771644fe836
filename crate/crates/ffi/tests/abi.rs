use dstrsort_ffi::*;
use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

unsafe fn strings(c: *const DsCorpus) -> Vec<Vec<u8>> {
    (0..ds_corpus_len(c))
        .map(|i| {
            let (mut p, mut n) = (ptr::null(), 0);
            assert_eq!(ds_corpus_get(c, i, &mut p, &mut n), DsStatus::Ok);
            std::slice::from_raw_parts(p, n).to_vec()
        })
        .collect()
}

#[test]
fn push_sort_and_read_back() {
    unsafe {
        let c = ds_corpus_new();
        for s in ["pear", "apple", "", "fig", "apple"] {
            assert_eq!(ds_corpus_push(c, s.as_ptr(), s.len()), DsStatus::Ok);
        }
        let mut opt = ds_sort_options_default();
        opt.pes = 2;
        opt.algo = DsAlgo::RquickPlus;
        let mut r = ptr::null_mut();
        assert_eq!(ds_sort(c, &opt, &mut r), DsStatus::Ok);
        assert!(ds_result_correct(r));
        let got: Vec<Vec<u8>> = (0..ds_result_len(r))
            .map(|i| {
                let (mut p, mut n) = (ptr::null(), 0);
                assert_eq!(ds_result_string(r, i, &mut p, &mut n), DsStatus::Ok);
                std::slice::from_raw_parts(p, n).to_vec()
            })
            .collect();
        let mut want = strings(c);
        want.sort();
        assert_eq!(got, want);
        let (mut pp, mut n) = (ptr::null(), 0);
        assert_eq!(ds_result_permutation(r, &mut pp, &mut n), DsStatus::InvalidArgument);
        ds_result_free(r);
        ds_corpus_free(c);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let c = ds_corpus_new();
        assert_eq!(ds_corpus_push(c, b"a\0b".as_ptr(), 3), DsStatus::InvalidArgument);
        assert!(!CStr::from_ptr(ds_last_error()).to_bytes().is_empty());
        assert_eq!(ds_corpus_push(ptr::null_mut(), b"a".as_ptr(), 1), DsStatus::NullPointer);
        let (mut p, mut n) = (ptr::null(), 0);
        assert_eq!(ds_corpus_get(c, 0, &mut p, &mut n), DsStatus::OutOfRange);
        let mut opt = ds_sort_options_default();
        opt.pes = 0;
        let mut r = ptr::null_mut();
        assert_eq!(ds_sort(c, &opt, &mut r), DsStatus::InvalidArgument);
        assert!(r.is_null());
        let missing = CString::new("/nonexistent/dir/corpus.bin").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(ds_corpus_read(missing.as_ptr(), &mut out), DsStatus::Io);
        ds_corpus_free(c);
    }
}

#[test]
fn file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("c.bin").to_str().unwrap()).unwrap();
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(ds_corpus_generate(500, 20, 0.3, 4, 9, &mut c), DsStatus::Ok);
        assert_eq!(ds_corpus_write(c, path.as_ptr()), DsStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(ds_corpus_read(path.as_ptr(), &mut back), DsStatus::Ok);
        assert_eq!(strings(c), strings(back));
        ds_corpus_free(c);
        ds_corpus_free(back);
    }
}

#[test]
fn c_program_links_against_header() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(crate_dir.join("include/dstrsort.h")).unwrap();
    for f in ["ds_sort(", "ds_result_permutation(", "DS_STATUS_BAD_SCHEDULE", "typedef struct DsCorpus DsCorpus"] {
        assert!(header.contains(f), "header lacks {f}");
    }
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libdstrsort_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link test: no cc or no static library at {}", lib.display());
        return;
    }
    let exe = tempfile::tempdir().unwrap().keep().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
