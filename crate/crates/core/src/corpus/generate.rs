use crate::error::{Error, Result};
use crate::strcore::StringArena;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

const FILLER: u8 = 1;

/// Parameters of a synthetic input with a controlled `D / N` ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct DnSpec {
    pub n: usize,
    /// Length of every string.
    pub len: usize,
    pub dn_ratio: f64,
    /// Alphabet size; characters are drawn from `1..=sigma`.
    pub sigma: u16,
    pub seed: u64,
}

impl DnSpec {
    /// Shortest block length admitting `n` distinct blocks.
    fn block_len(&self) -> usize {
        let sigma = self.sigma as u128;
        let mut u = 1;
        let mut cap = sigma;
        while cap < self.n as u128 {
            cap *= sigma;
            u += 1;
        }
        u
    }

    /// Position right after the unique block, i.e. the target `d(s)`.
    fn prefix_len(&self) -> usize {
        let target = (self.dn_ratio * self.len as f64 - 1e-9).ceil().max(0.0) as usize;
        target.max(self.block_len())
    }
}

/// Generates `n` distinct strings of length `len` whose distinguishing
/// prefixes end right after a unique block placed at `ceil(dn_ratio * len)`.
///
/// Each string is `1^a · block · 1^b` where `block` is a distinct random
/// number written with `u = ceil(log_sigma n)` digits. Neighbours in sorted
/// order share the leading filler and part of the block, so every `d(s)`
/// lies in `[a + 1, a + u]` and the realised `D/N` sits within `u / len` of
/// the target. The random blocks do not depend on `dn_ratio`.
pub fn generate_dn(spec: &DnSpec) -> Result<StringArena> {
    if !(0.0..=1.0).contains(&spec.dn_ratio) {
        return Err(Error::InfeasibleSpec(format!("dn_ratio {} outside [0, 1]", spec.dn_ratio)));
    }
    if !(2..=255).contains(&spec.sigma) {
        return Err(Error::InfeasibleSpec(format!("sigma {} outside 2..=255", spec.sigma)));
    }
    if spec.n == 0 {
        return Ok(StringArena::new());
    }
    if spec.len == 0 {
        return Err(Error::InfeasibleSpec("len must be at least 1".into()));
    }
    let u = spec.block_len();
    if u > spec.len {
        return Err(Error::InfeasibleSpec(format!(
            "{} distinct strings need {u} characters over sigma={}, but len={}",
            spec.n, spec.sigma, spec.len
        )));
    }
    let prefix = spec.prefix_len();
    let lead = prefix - u;
    let space = (spec.sigma as u128).pow(u as u32);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seen = HashSet::with_capacity(spec.n);
    let mut arena = StringArena::with_capacity(spec.n, spec.n * spec.len);
    let mut buf = vec![FILLER; spec.len];
    while arena.len() < spec.n {
        let v: u128 = rng.gen_range(0..space);
        if !seen.insert(v) {
            continue;
        }
        let mut x = v;
        for i in (0..u).rev() {
            buf[lead + i] = (x % spec.sigma as u128) as u8 + 1;
            x /= spec.sigma as u128;
        }
        arena.push_unchecked(&buf);
    }
    Ok(arena)
}

/// Uniformly random strings with lengths in `min_len..=max_len`.
pub fn random_strings(n: usize, min_len: usize, max_len: usize, sigma: u8, seed: u64) -> StringArena {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arena = StringArena::new();
    let mut buf = Vec::new();
    for _ in 0..n {
        let len = rng.gen_range(min_len..=max_len);
        buf.clear();
        buf.extend((0..len).map(|_| rng.gen_range(1..=sigma)));
        arena.push_unchecked(&buf);
    }
    arena
}

/// `n` strings drawn with repetition from only `distinct` templates.
pub fn duplicate_heavy(n: usize, distinct: usize, max_len: usize, seed: u64) -> StringArena {
    let templates = random_strings(distinct.max(1), 1, max_len.max(1), 4, seed ^ 0xd0d0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arena = StringArena::new();
    for _ in 0..n {
        arena.push_unchecked(templates.get(rng.gen_range(0..templates.len())));
    }
    arena
}

/// Random strings that all have length `len`.
pub fn all_equal_length(n: usize, len: usize, sigma: u8, seed: u64) -> StringArena {
    random_strings(n, len, len, sigma, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::dn_ratio;

    fn spec(n: usize, len: usize, dn: f64, sigma: u16) -> DnSpec {
        DnSpec { n, len, dn_ratio: dn, sigma, seed: 1 }
    }

    #[test]
    fn minimal_case() {
        let a = generate_dn(&spec(2, 4, 0.25, 2)).unwrap();
        let mut v = a.to_vecs();
        v.sort();
        assert_eq!(v, vec![vec![1, 1, 1, 1], vec![2, 1, 1, 1]]);
        assert!((dn_ratio(&a) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn half_ratio_at_scale() {
        let a = generate_dn(&DnSpec { n: 100_000, len: 500, dn_ratio: 0.5, sigma: 4, seed: 9 }).unwrap();
        let r = dn_ratio(&a);
        assert!((0.45..=0.55).contains(&r), "D/N = {r}");
    }

    #[test]
    fn zero_ratio_pushes_divergence_forward() {
        let a = generate_dn(&spec(10_000, 500, 0.0, 4)).unwrap();
        assert!(dn_ratio(&a) <= 0.05);
    }

    #[test]
    fn strings_distinct_and_well_formed() {
        let a = generate_dn(&spec(5_000, 30, 0.3, 5)).unwrap();
        let set: HashSet<&[u8]> = a.iter().collect();
        assert_eq!(set.len(), 5_000);
        assert!(a.iter().all(|s| s.len() == 30 && s.iter().all(|&c| (1..=5).contains(&c))));
    }

    #[test]
    fn deterministic_in_seed() {
        let s = spec(1000, 20, 0.5, 3);
        assert_eq!(generate_dn(&s).unwrap(), generate_dn(&s).unwrap());
        let other = DnSpec { seed: 2, ..s.clone() };
        assert_ne!(generate_dn(&s).unwrap(), generate_dn(&other).unwrap());
    }

    #[test]
    fn infeasible_specs_rejected() {
        assert!(matches!(generate_dn(&spec(100, 3, 0.5, 2)), Err(Error::InfeasibleSpec(_))));
        assert!(generate_dn(&spec(10, 10, 1.5, 4)).is_err());
        assert!(generate_dn(&spec(10, 10, 0.5, 1)).is_err());
        assert!(generate_dn(&spec(0, 10, 0.5, 4)).unwrap().is_empty());
    }

    #[test]
    fn ratio_monotone_in_target() {
        let mut last = -1.0;
        for dn in [0.0, 0.1, 0.25, 0.4, 0.5, 0.75, 0.9, 1.0] {
            let r = dn_ratio(&generate_dn(&spec(3000, 40, dn, 3)).unwrap());
            assert!(r >= last, "D/N dropped from {last} to {r} at target {dn}");
            last = r;
        }
    }
}
