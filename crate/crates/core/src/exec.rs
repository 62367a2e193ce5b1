//! Replication scheduling.
//!
//! Monte Carlo loops describe their work as "fill slot `i` of an output
//! buffer"; an [`Executor`] decides how the slots are scheduled. Slots are
//! written by index and every reduction happens afterwards in index order, so
//! any executor produces bit-identical results.

use alloc::vec;
use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Call `f(i, chunk)` for every `i < out.len() / width`, where `chunk` is
    /// `out[i * width..(i + 1) * width]`.
    fn fill(&self, width: usize, out: &mut [f64], f: &(dyn Fn(usize, &mut [f64]) + Sync));
}

/// Runs every slot on the calling thread, in order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn fill(&self, width: usize, out: &mut [f64], f: &(dyn Fn(usize, &mut [f64]) + Sync)) {
        assert!(width > 0);
        for (i, chunk) in out.chunks_mut(width).enumerate() {
            f(i, chunk);
        }
    }
}

/// `n` scalar replications.
pub fn replicate<F>(exec: &dyn Executor, n: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync,
{
    let mut out = vec![0.0; n];
    exec.fill(1, &mut out, &|i, slot| slot[0] = f(i));
    out
}

/// `n` replications producing `width` values each, row-major.
pub fn replicate_rows<F>(exec: &dyn Executor, n: usize, width: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let mut out = vec![0.0; n * width];
    exec.fill(width, &mut out, &f);
    out
}
