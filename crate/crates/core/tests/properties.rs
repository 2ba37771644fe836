use dstrsort::bloom::{dsbf_round, DsbfConfig};
use dstrsort::corpus::{
    dist_prefixes_by_input, duplicate_heavy, generate_dn, oracle_sort, random_strings, split_even, DnSpec,
};
use dstrsort::msort::{default_schedule, ms_sort, Assignment, MsConfig};
use dstrsort::partition::SamplingMode;
use dstrsort::pdms::{approximate_dist_prefixes, pdms_sort, PdmsConfig};
use dstrsort::rquick::rquick_sort;
use dstrsort::simnet::Machine;
use dstrsort::strcore::{local_sort_tagged, SortedRun, StringArena};
use proptest::prelude::*;
use std::collections::HashSet;

fn arena(strings: &[Vec<u8>]) -> StringArena {
    StringArena::from_strings(strings).unwrap()
}

fn strings() -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(1u8..5, 0..24), 0..400)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ms_sort_matches_oracle(
        input in strings(),
        p in prop::sample::select(vec![1usize, 2, 3, 4, 6, 8, 12, 16]),
        k in 1usize..4,
        char_mode in any::<bool>(),
        bounded in any::<bool>(),
        compress in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let a = arena(&input);
        let cfg = MsConfig::new(p, k)
            .with_sampling(if char_mode { SamplingMode::Character } else { SamplingMode::String })
            .with_assignment(if bounded { Assignment::Bounded } else { Assignment::Grid })
            .with_compression(compress);
        let mut m = Machine::new(p, seed).unwrap();
        let out = ms_sort(&mut m, split_even(&a, p), &cfg).unwrap();
        for run in &out.runs {
            run.validate().unwrap();
        }
        let got = SortedRun::concat(out.runs);
        let want = oracle_sort(&a);
        prop_assert_eq!(got.arena(), want.run.arena());
    }

    #[test]
    fn truncating_to_distinguishing_prefixes_keeps_ranking(input in strings()) {
        let a = arena(&input);
        let d = dist_prefixes_by_input(&a);
        let truncated = arena(&input.iter().zip(&d).map(|(s, &l)| s[..l as usize].to_vec()).collect::<Vec<_>>());
        let tags: Vec<u64> = (0..a.len() as u64).collect();
        prop_assert_eq!(local_sort_tagged(&truncated, &tags).perm, oracle_sort(&a).perm);
    }

    #[test]
    fn generator_invariants(n in 0usize..300, len in 6usize..40, dn in 0.0f64..=1.0, sigma in 2u16..8, seed in any::<u64>()) {
        let a = generate_dn(&DnSpec { n, len, dn_ratio: dn, sigma, seed }).unwrap();
        prop_assert_eq!(a.len(), n);
        prop_assert_eq!(a.iter().collect::<HashSet<_>>().len(), n);
        prop_assert!(a.iter().all(|s| s.len() == len && s.iter().all(|&c| (1..=sigma as u8).contains(&c))));
    }

    #[test]
    fn pdms_threshold_does_not_change_prefixes(input in strings(), threshold in 0u64..2000, seed in any::<u64>()) {
        let a = arena(&input);
        let p = 4;
        let lengths = |t: Option<u64>| {
            let mut cfg = PdmsConfig::new(MsConfig::new(p, 2), seed);
            cfg.switch_threshold = t;
            let mut m = Machine::new(p, seed).unwrap();
            approximate_dist_prefixes(&mut m, &split_even(&a, p), &cfg).unwrap().lengths
        };
        prop_assert_eq!(lengths(Some(threshold)), lengths(Some(0)));
    }

    #[test]
    fn pdms_permutation_matches_oracle(input in strings(), seed in any::<u64>()) {
        let a = arena(&input);
        let mut m = Machine::new(6, seed).unwrap();
        let out = pdms_sort(&mut m, split_even(&a, 6), &PdmsConfig::new(MsConfig::new(6, 2), seed)).unwrap();
        let perm: Vec<usize> = out.permutation().iter().map(|&x| x as usize).collect();
        prop_assert_eq!(perm, oracle_sort(&a).perm);
        let d = dist_prefixes_by_input(&a);
        let got: Vec<u32> = out.approximation.lengths.concat();
        prop_assert!(got.iter().zip(&d).all(|(g, w)| g >= w));
    }

    #[test]
    fn bloom_answers_ignore_grid_shape(
        items in prop::collection::vec(prop::collection::vec(0u64..400, 0..50), 12),
        seed in any::<u64>(),
    ) {
        let mut answers = Vec::new();
        for dims in [vec![12], vec![3, 4], vec![4, 3], vec![2, 2, 3], vec![3, 2, 2]] {
            let cfg = DsbfConfig { m: 400, dims, seed };
            let mut m = Machine::new(12, seed).unwrap();
            answers.push(dsbf_round(&mut m, &cfg, items.clone()).unwrap().flags);
        }
        prop_assert!(answers.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn sequential_and_parallel_runs_are_identical() {
    let a = duplicate_heavy(6000, 300, 20, 4);
    for (p, k) in [(6, 2), (16, 2)] {
        let run = |seq: bool| {
            let mut m = Machine::new(p, 3).unwrap();
            if seq {
                m = m.sequential();
            }
            let cfg = PdmsConfig::new(MsConfig::new(p, k).with_assignment(Assignment::Bounded), 3);
            let out = pdms_sort(&mut m, split_even(&a, p), &cfg).unwrap();
            (out.permutation(), m.into_ledger().to_json())
        };
        assert_eq!(run(true), run(false));
    }
}

#[test]
fn ledger_conservation_per_phase() {
    let a = random_strings(8000, 0, 30, 6, 8);
    let mut m = Machine::new(16, 8).unwrap();
    pdms_sort(&mut m, split_even(&a, 16), &PdmsConfig::new(MsConfig::new(16, 2), 8)).unwrap();
    rquick_sort(&mut m, split_even(&a, 16), true).unwrap();
    for (name, ph) in m.ledger().phases() {
        let t = ph.totals();
        assert_eq!(t.bytes_sent, t.bytes_received, "{name}");
        assert_eq!(t.msgs_sent, t.msgs_received, "{name}");
    }
}

#[test]
fn rquick_variants_agree_including_ties() {
    let a = duplicate_heavy(5000, 60, 10, 2);
    for p in [3, 8, 13] {
        let plain = SortedRun::concat(rquick_sort(&mut Machine::new(p, 1).unwrap(), split_even(&a, p), false).unwrap());
        let plus = SortedRun::concat(rquick_sort(&mut Machine::new(p, 1).unwrap(), split_even(&a, p), true).unwrap());
        assert_eq!(plain.tags(), plus.tags());
        assert_eq!(plain.arena(), plus.arena());
    }
}

#[test]
fn grid_all_to_all_shapes_deliver_the_same() {
    let p = 16;
    let payloads: Vec<Vec<Vec<u8>>> =
        (0..p).map(|s| (0..p).map(|d| if (s + d) % 3 == 0 { vec![] } else { vec![s as u8, d as u8] }).collect()).collect();
    let mut delivered = Vec::new();
    for dims in [vec![16], vec![4, 4], vec![2, 8], vec![2, 2, 2, 2]] {
        let mut m = Machine::new(p, 1).unwrap();
        let out = m.in_phase("a2a", |m| m.grid_alltoall(&dims, payloads.clone())).unwrap();
        assert_eq!(m.ledger().phase("a2a").unwrap().supersteps, dims.len() as u64);
        for c in &m.ledger().phase("a2a").unwrap().pes {
            assert!(c.msgs_sent <= dims.iter().map(|d| d - 1).sum::<usize>() as u64);
        }
        delivered.push(out);
    }
    assert!(delivered.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn prefix_overshoot_stays_small_on_dn_data() {
    for (dn, seed) in [(0.25, 1), (0.5, 2), (0.75, 3)] {
        let a = generate_dn(&DnSpec { n: 8000, len: 200, dn_ratio: dn, sigma: 4, seed }).unwrap();
        let mut m = Machine::new(16, seed).unwrap();
        let ap = approximate_dist_prefixes(&mut m, &split_even(&a, 16), &PdmsConfig::new(MsConfig::new(16, 2), seed))
            .unwrap();
        let d = dist_prefixes_by_input(&a);
        let got: Vec<u32> = ap.lengths.concat();
        let mean = got.iter().zip(&d).map(|(&g, &w)| g as f64 / w.max(1) as f64).sum::<f64>() / d.len() as f64;
        assert!(mean <= 4.0, "D/N {dn}: mean overshoot {mean:.2}");
    }
}

#[test]
fn exchange_stays_inside_groups() {
    // Every level-t exchange only talks inside the group of PEs sharing the
    // first t split digits.
    let a = random_strings(6400, 1, 16, 4, 5);
    let p = 64;
    let cfg = MsConfig::new(p, 3);
    let mut m = Machine::new(p, 5).unwrap();
    ms_sort(&mut m, split_even(&a, p), &cfg).unwrap();
    assert_eq!(cfg.schedule, default_schedule(64, 3));
    let ph = m.ledger().phase("exchange/L2").unwrap();
    assert!(ph.pes.iter().all(|c| c.msgs_sent == cfg.schedule[1] as u64));
}
