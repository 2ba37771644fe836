use crate::error::{Error, Result};

/// A k-dimensional PE grid with mixed-radix coordinates, most significant first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(dims: &[usize], p: usize) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != p {
            return Err(Error::DimsMismatch { dims: dims.to_vec(), p });
        }
        let mut strides = vec![1; dims.len()];
        for t in (0..dims.len().saturating_sub(1)).rev() {
            strides[t] = strides[t + 1] * dims[t + 1];
        }
        Ok(Grid { dims: dims.to_vec(), strides })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rounds(&self) -> usize {
        self.dims.len()
    }

    pub fn digit(&self, pe: usize, t: usize) -> usize {
        pe / self.strides[t] % self.dims[t]
    }

    /// Next hop in round `t` for data at `pe` addressed to `dst`: digit `t`
    /// is corrected, all others stay.
    pub fn hop(&self, pe: usize, dst: usize, t: usize) -> usize {
        let cur = self.digit(pe, t);
        let want = self.digit(dst, t);
        pe - cur * self.strides[t] + want * self.strides[t]
    }
}

/// Near-equal factorisation of `p` into `k` factors, largest first.
pub fn balanced_dims(p: usize, k: usize) -> Vec<usize> {
    let mut dims = Vec::with_capacity(k);
    let mut rest = p;
    for left in (1..=k).rev() {
        if left == 1 {
            dims.push(rest);
            break;
        }
        let target = (rest as f64).powf(1.0 / left as f64).round().max(1.0) as usize;
        let f = closest_divisor(rest, target);
        dims.push(f);
        rest /= f;
    }
    dims.sort_unstable_by(|a, b| b.cmp(a));
    dims
}

fn closest_divisor(n: usize, target: usize) -> usize {
    (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .min_by_key(|&d| (d.abs_diff(target), d))
        .unwrap_or(1)
}
