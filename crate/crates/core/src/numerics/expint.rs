use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_MAX_TERMS: usize = 200;
const CF_MAX_ITER: usize = 10_000;

/// Scaled exponential integral `e^x * E1(x)` for `x > 0`.
///
/// `E1(x) = ∫_x^∞ e^{-t}/t dt`. The scaled form stays finite for large `x`,
/// where `E1` itself underflows, and is the quantity that appears in the
/// Rayleigh ergodic capacity: `E[ln(1 + snr |h|²)] = e^{1/snr} E1(1/snr)`.
///
/// Below `x = 1` the convergent power series is used; from `x = 1` upward a
/// continued fraction evaluated with the modified Lentz method.
pub fn exp_e1(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("exp_e1 requires finite x > 0, got {x}")));
    }
    Ok(if x < 1.0 {
        x.exp() * e1_series(x)
    } else {
        scaled_e1_continued_fraction(x)
    })
}

/// E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
pub(crate) fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0; // (-x)^k / k!
    for k in 1..=SERIES_MAX_TERMS {
        term *= -x / k as f64;
        let contrib = term / k as f64;
        sum += contrib;
        if contrib.abs() < f64::EPSILON * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// e^x E1(x) = 1/(x+1- 1²/(x+3- 2²/(x+5- ...)))
pub(crate) fn scaled_e1_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=CF_MAX_ITER {
        let a = -((i * i) as f64);
        b += 2.0;
        d = a * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫_x^∞ e^{x-t}/t dt, rewritten with t = x - ln w as ∫_0^1 dw / (x - ln w)
    /// and integrated by adaptive Simpson.
    fn quadrature_oracle(x: f64) -> f64 {
        let f = |w: f64| if w <= 0.0 { 0.0 } else { 1.0 / (x - w.ln()) };
        adaptive_simpson(&f, 0.0, 1.0, 1e-15, 60)
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        recurse(f, a, b, fa, fm, fb, whole, tol, depth)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }

    #[test]
    fn oracle_values() {
        // frozen from the quadrature oracle
        assert!((quadrature_oracle(10.0) - 0.091_563_333_939_788_1).abs() < 1e-12);
        assert!((quadrature_oracle(1.0) - 0.596_347_362_323_194_1).abs() < 1e-12);
    }

    #[test]
    fn matches_quadrature() {
        assert!((exp_e1(10.0).unwrap() - 0.09156333394).abs() < 1e-9);
        assert!((exp_e1(1.0).unwrap() - 0.59634736).abs() < 1e-7);
        for &x in &[0.05, 0.1, 0.5, 0.9, 1.0, 1.5, 3.0, 10.0, 50.0, 300.0] {
            let q = quadrature_oracle(x);
            let v = exp_e1(x).unwrap();
            assert!((v - q).abs() < 1e-12, "x={x}: {v} vs {q}");
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let series = 1f64.exp() * e1_series(1.0);
        let cf = scaled_e1_continued_fraction(1.0);
        assert!((series - cf).abs() < 1e-12, "{series} vs {cf}");
        for &x in &[0.8f64, 0.95, 1.2, 2.0] {
            let s = x.exp() * e1_series(x);
            let c = scaled_e1_continued_fraction(x);
            assert!((s - c).abs() < 1e-12, "x={x}: {s} vs {c}");
        }
    }

    #[test]
    fn handbook_sandwich() {
        let mut x = 1e-6;
        while x <= 1e6 {
            let v = exp_e1(x).unwrap();
            let lo = 0.5 * (2.0 / x).ln_1p();
            let hi = (1.0 / x).ln_1p();
            assert!(lo < v && v < hi, "x={x}: {lo} < {v} < {hi}");
            x *= 1.7;
        }
    }

    #[test]
    fn large_argument_limit() {
        let x = 1e6;
        let v = exp_e1(x).unwrap();
        assert!((v * x - 1.0).abs() < 1e-5);
    }

    #[test]
    fn small_argument() {
        // E1(x) ≈ -γ - ln x + x for tiny x
        let x = 1e-6f64;
        let expect = x.exp() * (-EULER_GAMMA - x.ln() + x - x * x / 4.0);
        assert!((exp_e1(x).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(exp_e1(0.0).is_err());
        assert!(exp_e1(-1.0).is_err());
        assert!(exp_e1(f64::NAN).is_err());
        assert!(exp_e1(f64::INFINITY).is_err());
    }
}
