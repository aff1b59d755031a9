//! Shared test oracles.

/// Largest per-coordinate relative error between an analytic gradient and a
/// central finite difference of `f` at `x`. The denominator is floored at
/// `1e-3` so near-zero coordinates are judged on absolute error.
pub fn max_rel_fd_error(x: &[f64], analytic: &[f64], step: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let up = f(&probe);
        probe[i] = x[i] - step;
        let down = f(&probe);
        probe[i] = x[i];
        let numeric = (up - down) / (2.0 * step);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-3);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}
