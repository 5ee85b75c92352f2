//! Small deterministic numeric helpers shared by the modules.

/// Leaf size below which sums run sequentially.
pub const PAIRWISE_BLOCK: usize = 64;

/// Sums `values` by recursive halving with sequential leaves.
///
/// The order of operations depends only on the length, so results are
/// reproducible regardless of how callers split work.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = split_point(values.len());
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise reduction of `K` simultaneous accumulators over `0..n`.
///
/// `leaf` receives an index range of at most [`PAIRWISE_BLOCK`] elements
/// and returns the sequential partial sums for that range.
pub fn pairwise_reduce<const K: usize>(
    n: usize,
    leaf: &mut impl FnMut(std::ops::Range<usize>) -> [f64; K],
) -> [f64; K] {
    fn go<const K: usize>(
        lo: usize,
        hi: usize,
        leaf: &mut impl FnMut(std::ops::Range<usize>) -> [f64; K],
    ) -> [f64; K] {
        if hi - lo <= PAIRWISE_BLOCK {
            return leaf(lo..hi);
        }
        let mid = lo + split_point(hi - lo);
        let a = go(lo, mid, leaf);
        let b = go(mid, hi, leaf);
        let mut out = [0.0; K];
        for k in 0..K {
            out[k] = a[k] + b[k];
        }
        out
    }
    go(0, n, leaf)
}

// Split on a multiple of the block size so leaves stay full.
fn split_point(len: usize) -> usize {
    let blocks = len.div_ceil(PAIRWISE_BLOCK);
    (blocks / 2).max(1) * PAIRWISE_BLOCK
}

/// Trapezoidal average of a `2π`-periodic function over one period.
///
/// Converges geometrically for analytic integrands.
pub fn periodic_mean(points: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 2.0 * std::f64::consts::PI / points as f64;
    let values: Vec<f64> = (0..points).map(|i| f(i as f64 * h)).collect();
    pairwise_sum(&values) / points as f64
}

/// Maximizes a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_max(mut lo: f64, mut hi: f64, rel_tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (hi - lo).abs() <= rel_tol * (lo.abs() + hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// `x − sin x`, accurate for small `x`.
pub fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // x^3/3! - x^5/5! + ... ; the x^15 term is below 1e-19 relative.
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        for m in 2..=7 {
            let m = m as f64;
            term *= -x2 / ((2.0 * m) * (2.0 * m + 1.0));
            sum += term;
        }
        sum
    } else {
        x - x.sin()
    }
}

/// `1 − cos x` without cancellation.
pub fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }

    #[test]
    fn reduce_matches_sum() {
        let v: Vec<f64> = (0..777).map(|i| (i as f64).sqrt()).collect();
        let [s, c] = pairwise_reduce(v.len(), &mut |r| {
            [v[r.clone()].iter().sum(), r.len() as f64]
        });
        assert_eq!(s, pairwise_sum(&v));
        assert_eq!(c, 777.0);
    }

    #[test]
    fn x_minus_sin_series_is_continuous() {
        for &x in &[1e-3, 0.05, 0.0999999, 0.1, 0.3] {
            let direct = x - f64::sin(x);
            let series = x_minus_sin(x);
            let rel = (series - direct).abs() / series;
            // direct form loses digits at small x, so compare loosely there
            let tol = if x < 1e-2 { 1e-3 } else { 1e-12 };
            assert!(rel < tol, "x={x} series={series} direct={direct}");
        }
        assert!((x_minus_sin(1e-4) - (1e-12 / 6.0 - 1e-20 / 120.0)).abs() < 1e-28);
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(0.0, 3.0, 1e-12, |x| -(x - 1.234).powi(2) + 5.0);
        assert!((x - 1.234).abs() < 1e-7);
        assert!((fx - 5.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_mean_of_cosine_power() {
        // mean of cos^2 over a period is 1/2
        let m = periodic_mean(64, |k| k.cos().powi(2));
        assert!((m - 0.5).abs() < 1e-15);
    }
}
