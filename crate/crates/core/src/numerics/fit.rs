use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MAX_POWERS: usize = 4;

/// Least-squares fit `y ≈ Σ_k coefficients[k] · x^powers[k]` with no constant
/// term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    pub coefficients: Vec<f64>,
    pub powers: Vec<f64>,
    pub residual_rms: f64,
}

impl PolyFit {
    pub fn evaluate(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.powers)
            .map(|(c, p)| c * x.powf(*p))
            .sum()
    }

    /// Coefficient attached to `power`, if that power was fitted.
    pub fn coefficient_of(&self, power: f64) -> Option<f64> {
        self.powers
            .iter()
            .position(|&p| p == power)
            .map(|i| self.coefficients[i])
    }
}

/// Fits `ys` against the given real powers of `xs` through the origin.
///
/// The abscissae are rescaled to unit geometric mean and the design columns
/// to unit norm before the normal equations are solved by Cholesky; the
/// coefficients are mapped back to the original scale.
pub fn fit_poly_through_origin(xs: &[f64], ys: &[f64], powers: &[f64]) -> Result<PolyFit> {
    let n = xs.len();
    let k = powers.len();
    if k == 0 || k > MAX_POWERS {
        return Err(Error::InvalidArgument(format!(
            "between 1 and {MAX_POWERS} powers required, got {k}"
        )));
    }
    if ys.len() != n || n < k + 1 {
        return Err(Error::InvalidArgument(format!(
            "need len(xs) = len(ys) >= len(powers) + 1 (xs={n}, ys={}, powers={k})",
            ys.len()
        )));
    }
    if xs.iter().any(|&x| !(x > 0.0 && x.is_finite())) || ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidArgument("xs must be positive and all values finite".into()));
    }
    if powers.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("powers must be finite".into()));
    }
    if powers.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Singular(format!("duplicate powers in {powers:?}")));
    }
    if powers.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(format!("powers must be increasing: {powers:?}")));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("xs must be distinct".into()));
    }

    let scale = (xs.iter().map(|x| x.ln()).sum::<f64>() / n as f64).exp();
    let mut design: Vec<Vec<f64>> = powers
        .iter()
        .map(|&p| xs.iter().map(|&x| (x / scale).powf(p)).collect())
        .collect();
    let norms: Vec<f64> = design
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    for (col, &nrm) in design.iter_mut().zip(&norms) {
        col.iter_mut().for_each(|v| *v /= nrm);
    }

    let mut gram = [[0.0; MAX_POWERS]; MAX_POWERS];
    let mut rhs = [0.0; MAX_POWERS];
    for i in 0..k {
        for j in 0..=i {
            let g: f64 = design[i].iter().zip(&design[j]).map(|(a, b)| a * b).sum();
            gram[i][j] = g;
            gram[j][i] = g;
        }
        rhs[i] = design[i].iter().zip(ys).map(|(a, y)| a * y).sum();
    }
    let scaled = cholesky_solve(&gram, &rhs, k)?;

    let coefficients: Vec<f64> = (0..k)
        .map(|i| scaled[i] / norms[i] / scale.powf(powers[i]))
        .collect();
    let fit = PolyFit {
        coefficients,
        powers: powers.to_vec(),
        residual_rms: 0.0,
    };
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - fit.evaluate(x);
            r * r
        })
        .sum();
    Ok(PolyFit {
        residual_rms: (ss / n as f64).sqrt(),
        ..fit
    })
}

fn cholesky_solve(
    a: &[[f64; MAX_POWERS]; MAX_POWERS],
    b: &[f64; MAX_POWERS],
    k: usize,
) -> Result<[f64; MAX_POWERS]> {
    // columns are unit norm, so the diagonal of `a` is 1
    let mut l = [[0.0; MAX_POWERS]; MAX_POWERS];
    for i in 0..k {
        for j in 0..=i {
            let s: f64 = (0..j).map(|p| l[i][p] * l[j][p]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 1e-14 {
                    return Err(Error::Singular(format!(
                        "design matrix is numerically rank deficient (pivot {d:.3e})"
                    )));
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = [0.0; MAX_POWERS];
    for i in 0..k {
        let s: f64 = (0..i).map(|p| l[i][p] * y[p]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = [0.0; MAX_POWERS];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|p| l[p][i] * x[p]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Ok(x)
}

/// Ordinary least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("loglog_slope needs >= 2 paired points".into()));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("loglog_slope needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Singular("all abscissae equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
