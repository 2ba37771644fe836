use crate::error::{Error, Result};
use crate::strcore::StringArena;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const CORPUS_MAGIC: &[u8; 4] = b"DSS1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    /// `DSS1`, `u64` LE count, then per string a `u32` LE length and the bytes.
    Binary,
    /// One string per line; a final newline is optional.
    Text,
}

pub fn write_corpus(arena: &StringArena, path: impl AsRef<Path>, format: CorpusFormat) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    match format {
        CorpusFormat::Binary => {
            w.write_all(CORPUS_MAGIC)?;
            w.write_all(&(arena.len() as u64).to_le_bytes())?;
            for s in arena.iter() {
                w.write_all(&(s.len() as u32).to_le_bytes())?;
                w.write_all(s)?;
            }
        }
        CorpusFormat::Text => {
            for (i, s) in arena.iter().enumerate() {
                if s.contains(&b'\n') {
                    return Err(Error::Corpus(format!("string {i} contains a newline")));
                }
                w.write_all(s)?;
                w.write_all(b"\n")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<StringArena> {
    let bytes = fs::read(path)?;
    match format {
        CorpusFormat::Binary => parse_binary(&bytes),
        CorpusFormat::Text => parse_text(&bytes),
    }
}

/// Binary if the file starts with the magic, text otherwise.
pub fn read_corpus_auto(path: impl AsRef<Path>) -> Result<(StringArena, CorpusFormat)> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(CORPUS_MAGIC) {
        Ok((parse_binary(&bytes)?, CorpusFormat::Binary))
    } else {
        Ok((parse_text(&bytes)?, CorpusFormat::Text))
    }
}

fn parse_binary(bytes: &[u8]) -> Result<StringArena> {
    if bytes.len() < 12 || &bytes[..4] != CORPUS_MAGIC {
        return Err(Error::Corpus("missing DSS1 header".into()));
    }
    let count = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let mut pos = 12usize;
    // Every string needs at least its 4-byte length field.
    if count > ((bytes.len() - pos) / 4) as u64 {
        return Err(Error::Corpus(format!("count {count} inconsistent with file size")));
    }
    let mut arena = StringArena::with_capacity(count as usize, bytes.len());
    for i in 0..count as usize {
        let len_bytes = bytes
            .get(pos..pos + 4)
            .ok_or_else(|| Error::Corpus(format!("truncated length of string {i}")))?;
        let len = u32::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
        pos += 4;
        let body = bytes
            .get(pos..pos + len)
            .ok_or_else(|| Error::Corpus(format!("truncated body of string {i}")))?;
        pos += len;
        arena.push(body)?;
    }
    if pos != bytes.len() {
        return Err(Error::Corpus(format!("{} trailing bytes", bytes.len() - pos)));
    }
    Ok(arena)
}

fn parse_text(bytes: &[u8]) -> Result<StringArena> {
    let mut arena = StringArena::new();
    if bytes.is_empty() {
        return Ok(arena);
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    for line in body.split(|&b| b == b'\n') {
        arena.push(line)?;
    }
    Ok(arena)
}
