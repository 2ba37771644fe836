use crate::error::{Error, Result};

/// Contiguous character storage for a set of strings.
///
/// Every string is stored followed by a single `0` sentinel. The sentinel is
/// never part of a string body and is excluded from all length accounting.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct StringArena {
    chars: Vec<u8>,
    offsets: Vec<usize>,
}

impl StringArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(strings: usize, chars: usize) -> Self {
        Self {
            chars: Vec::with_capacity(chars + strings),
            offsets: Vec::with_capacity(strings),
        }
    }

    pub fn from_strings<I, S>(strings: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut arena = Self::new();
        for s in strings {
            arena.push(s.as_ref())?;
        }
        Ok(arena)
    }

    /// Appends a string, rejecting embedded zero bytes and bodies longer than
    /// `u32::MAX`.
    pub fn push(&mut self, s: &[u8]) -> Result<()> {
        if let Some(offset) = s.iter().position(|&b| b == 0) {
            return Err(Error::ZeroByte {
                index: self.len(),
                offset,
            });
        }
        if s.len() > u32::MAX as usize {
            return Err(Error::StringTooLong(s.len()));
        }
        self.push_unchecked(s);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, s: &[u8]) {
        debug_assert!(!s.contains(&0));
        self.offsets.push(self.chars.len());
        self.chars.extend_from_slice(s);
        self.chars.push(0);
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u8] {
        let start = self.offsets[i];
        let end = match self.offsets.get(i + 1) {
            Some(&next) => next - 1,
            None => self.chars.len() - 1,
        };
        &self.chars[start..end]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Total characters `N`, sentinels excluded.
    pub fn total_chars(&self) -> u64 {
        (self.chars.len() - self.offsets.len()) as u64
    }

    /// Length of the longest string (0 for an empty arena).
    pub fn max_len(&self) -> usize {
        self.iter().map(<[u8]>::len).max().unwrap_or(0)
    }

    pub fn min_len(&self) -> usize {
        self.iter().map(<[u8]>::len).min().unwrap_or(0)
    }

    /// Largest character value present, i.e. the effective alphabet size.
    pub fn max_char(&self) -> u8 {
        self.chars.iter().copied().max().unwrap_or(0)
    }

    /// Raw storage including sentinels.
    pub fn raw_chars(&self) -> &[u8] {
        &self.chars
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Copy of the strings at `indices`, in that order.
    pub fn select(&self, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut out = Self::new();
        for i in indices {
            out.push_unchecked(self.get(i));
        }
        out
    }

    /// Concatenates arenas in order.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a StringArena>) -> Self {
        let mut out = Self::new();
        for part in parts {
            out.chars.reserve(part.chars.len());
            let base = out.chars.len();
            out.offsets.extend(part.offsets.iter().map(|o| o + base));
            out.chars.extend_from_slice(&part.chars);
        }
        out
    }

    pub fn to_vecs(&self) -> Vec<Vec<u8>> {
        self.iter().map(<[u8]>::to_vec).collect()
    }
}
