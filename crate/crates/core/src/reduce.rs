//! Order-fixed floating point reduction.
//!
//! Every integral in the crate is reduced through [`pairwise_sum`] over values
//! laid out in node order, so serial and parallel evaluation agree bitwise.

use rayon::prelude::*;

const BLOCK: usize = 16;

/// Pairwise (cascade) summation with a fixed split point at `len / 2`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Evaluates `f` on `0..len` (in parallel when the pool allows) and reduces
/// the results with [`pairwise_sum`] in index order.
pub fn par_map_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let values: Vec<f64> = (0..len).into_par_iter().map(f).collect();
    pairwise_sum(&values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn parallel_and_serial_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let serial: Vec<f64> = (0..10_001).map(f).collect();
        let a = pairwise_sum(&serial);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let b = pool.install(|| par_map_sum(10_001, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
