//! Counter-based randomness.
//!
//! Every random number in the crate is a pure function of a key and a
//! counter: `(seed, stream tags, lattice site, slot)`. There is no sequential
//! state, so the innovation at a given site is the same no matter which block
//! is simulated, in which order, or on how many threads.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, word: u64) -> u64 {
    mix64(h ^ mix64(word.wrapping_add(GOLDEN)))
}

/// Seed for replication `rep` of an experiment seeded with `seed`.
#[inline]
pub fn derive_seed(seed: u64, rep: u64) -> u64 {
    absorb(absorb(0x5EED_0F_11F1E1D5, seed), rep)
}

/// Map 64 random bits to a double in the open interval (0, 1).
#[inline]
pub fn to_open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// A keyed stream of random words addressed by lattice site and slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteStream {
    key: u64,
}

impl SiteStream {
    pub fn new(seed: u64) -> Self {
        SiteStream { key: absorb(0xF1E1_D5AB_C0DE_0001, seed) }
    }

    /// An independent stream labelled by `tag`.
    pub fn substream(self, tag: u64) -> Self {
        SiteStream { key: absorb(self.key ^ 0xA5A5_A5A5_5A5A_5A5A, tag) }
    }

    #[inline]
    pub fn word(self, site: &[i64], slot: u64) -> u64 {
        let mut h = self.key;
        for &c in site {
            h = absorb(h, c as u64);
        }
        absorb(h ^ (site.len() as u64).rotate_left(32), slot)
    }

    #[inline]
    pub fn uniform(self, site: &[i64], slot: u64) -> f64 {
        to_open_unit(self.word(site, slot))
    }

    /// Word addressed by a plain counter instead of a site.
    #[inline]
    pub fn word_at(self, counter: u64) -> u64 {
        absorb(self.key ^ 0x0C0F_FEE0_0000_0000, counter)
    }

    #[inline]
    pub fn uniform_at(self, counter: u64) -> f64 {
        to_open_unit(self.word_at(counter))
    }

    /// Standard normal addressed by a plain counter (uses counters `2k`, `2k+1`).
    #[inline]
    pub fn normal_at(self, k: u64) -> f64 {
        box_muller(self.uniform_at(2 * k), self.uniform_at(2 * k + 1))
    }
}

/// One standard normal from two independent open-unit uniforms.
#[inline]
pub fn box_muller(u1: f64, u2: f64) -> f64 {
    use crate::math::{cos, ln, sqrt};
    sqrt(-2.0 * ln(u1)) * cos(core::f64::consts::TAU * u2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_words_depend_on_every_coordinate() {
        let s = SiteStream::new(7);
        let a = s.word(&[1, 2], 0);
        assert_ne!(a, s.word(&[2, 1], 0));
        assert_ne!(a, s.word(&[1, 2], 1));
        assert_ne!(a, s.word(&[1, 2, 0], 0));
        assert_ne!(a, SiteStream::new(8).word(&[1, 2], 0));
        assert_eq!(a, SiteStream::new(7).word(&[1, 2], 0));
    }

    #[test]
    fn uniforms_are_open_and_roughly_uniform() {
        let s = SiteStream::new(3);
        let n = 100_000;
        let mut mean = 0.0;
        for k in 0..n {
            let u = s.uniform_at(k);
            assert!(u > 0.0 && u < 1.0);
            mean += u;
        }
        mean /= n as f64;
        // sd of the mean is 1/sqrt(12 n) ~ 9e-4
        assert!((mean - 0.5).abs() < 5e-3, "{mean}");
    }

    #[test]
    fn normals_have_unit_variance() {
        let s = SiteStream::new(11).substream(4);
        let n = 200_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for k in 0..n {
            let z = s.normal_at(k);
            m1 += z;
            m2 += z * z;
        }
        m1 /= n as f64;
        m2 /= n as f64;
        assert!(m1.abs() < 0.012, "{m1}");
        assert!((m2 - 1.0).abs() < 0.02, "{m2}");
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
