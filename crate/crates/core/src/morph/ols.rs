//! Ordinary least squares with an intercept, solved by Householder QR.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

use super::agreement::{long_rows, AgreementRecord};

pub const INTERCEPT: &str = "intercept";

/// Fitted coefficients and their inference statistics.
///
/// When the residuals vanish (an exact fit) standard errors are zero and
/// `t`/`p` are reported as `None` with `degenerate_fit` set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionResult {
    /// Intercept first, then predictors in the order given.
    pub predictors: Vec<String>,
    pub coefficients: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    pub t_stats: BTreeMap<String, Option<f64>>,
    pub p_values: BTreeMap<String, Option<f64>>,
    pub n: usize,
    pub df: usize,
    pub residual_std_error: f64,
    pub r_squared: f64,
    pub degenerate_fit: bool,
    /// Mean response per agreement level; empty for generic fits.
    pub group_means: BTreeMap<u8, f64>,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients.get(name).copied()
    }
}

/// Fits `y = b0 + Σ b_j x_j`. `columns[j]` holds predictor `names[j]`.
pub fn ols_fit(names: &[&str], columns: &[Vec<f64>], y: &[f64]) -> Result<RegressionResult> {
    let n = y.len();
    let k = columns.len() + 1;
    if names.len() != columns.len() {
        return Err(Error::InvalidInput("one name per predictor column".into()));
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidInput("predictor columns differ in length from y".into()));
    }
    if n <= k {
        return Err(Error::InvalidInput(format!(
            "{n} observations cannot support {k} coefficients"
        )));
    }
    if y.iter().chain(columns.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in regression data".into()));
    }
    let mut labels = vec![INTERCEPT.to_string()];
    labels.extend(names.iter().map(|s| s.to_string()));

    // column-major design matrix, reduced in place to R
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(k);
    a.push(vec![1.0; n]);
    a.extend(columns.iter().cloned());
    let mut qty = y.to_vec();
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();

    for j in 0..k {
        let alpha = norm(&a[j][j..]);
        if alpha <= 1e-10 * col_norms[j].max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient(labels[j].clone()));
        }
        let alpha = if a[j][j] > 0.0 { -alpha } else { alpha };
        let mut v = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for col in a.iter_mut().skip(j) {
            reflect(&v, vnorm2, &mut col[j..]);
        }
        reflect(&v, vnorm2, &mut qty[j..]);
    }

    // back substitution R b = (Q^T y)[..k]
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for j in i + 1..k {
            s -= a[j][i] * beta[j];
        }
        beta[i] = s / a[i][i];
    }

    let rss: f64 = (0..n)
        .map(|i| {
            let fit: f64 = beta[0] + (1..k).map(|j| beta[j] * columns[j - 1][i]).sum::<f64>();
            (y[i] - fit).powi(2)
        })
        .sum();
    let df = n - k;
    let sigma = (rss / df as f64).sqrt();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let degenerate = sigma <= 64.0 * f64::EPSILON * scale;

    // diag((R^T R)^-1) from the rows of R^-1
    let rinv = upper_inverse(&a, k);
    let t_dist = StudentsT::new(0.0, 1.0, df as f64)
        .map_err(|e| Error::Invariant(format!("t distribution: {e}")))?;
    let mut result = RegressionResult {
        predictors: labels.clone(),
        coefficients: BTreeMap::new(),
        std_errors: BTreeMap::new(),
        t_stats: BTreeMap::new(),
        p_values: BTreeMap::new(),
        n,
        df,
        residual_std_error: if degenerate { 0.0 } else { sigma },
        r_squared,
        degenerate_fit: degenerate,
        group_means: BTreeMap::new(),
    };
    for (j, label) in labels.iter().enumerate() {
        let var_factor: f64 = rinv[j].iter().map(|x| x * x).sum();
        let se = if degenerate { 0.0 } else { sigma * var_factor.sqrt() };
        let (t, p) = if se > 0.0 {
            let t = beta[j] / se;
            (Some(t), Some((2.0 * t_dist.sf(t.abs())).min(1.0)))
        } else {
            (None, None)
        };
        result.coefficients.insert(label.clone(), beta[j]);
        result.std_errors.insert(label.clone(), se);
        result.t_stats.insert(label.clone(), t);
        result.p_values.insert(label.clone(), p);
    }
    Ok(result)
}

fn norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

/// Applies `I - 2 v v^T / (v^T v)` to `x`.
fn reflect(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * dot / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

/// Inverse of the upper-triangular `k×k` block of column-major `a`, as rows.
fn upper_inverse(a: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let r = |i: usize, j: usize| a[j][i];
    let mut inv = vec![vec![0.0; k]; k];
    for col in 0..k {
        for i in (0..=col).rev() {
            let e = if i == col { 1.0 } else { 0.0 };
            let mut s = e;
            for m in i + 1..=col {
                s -= r(i, m) * inv[m][col];
            }
            inv[i][col] = s / r(i, i);
        }
    }
    inv
}

/// Regresses piece log-probabilities on agreement (0–2) and a model
/// indicator (`Init` = 0, `Fin` = 1), pooling both models in long format.
pub fn ols(records: &[AgreementRecord]) -> Result<RegressionResult> {
    let rows = long_rows(records);
    let y: Vec<f64> = rows.iter().map(|r| r.score).collect();
    let agreement: Vec<f64> = rows.iter().map(|r| r.agreement as f64).collect();
    let model: Vec<f64> = rows.iter().map(|r| r.model.indicator()).collect();
    let mut result = ols_fit(&["agreement", "model_fin"], &[agreement, model], &y)?;
    let mut sums: BTreeMap<u8, (f64, usize)> = BTreeMap::new();
    for r in &rows {
        let e = sums.entry(r.agreement).or_insert((0.0, 0));
        e.0 += r.score;
        e.1 += 1;
    }
    result.group_means = sums
        .into_iter()
        .map(|(lvl, (s, c))| (lvl, s / c as f64))
        .collect();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_degenerate() {
        let x: Vec<f64> = (0..9).map(|i| (i % 3) as f64).collect();
        let z: Vec<f64> = (0..9).map(|i| (i / 3 % 2) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = ols_fit(&["agreement", "model_fin"], &[x, z], &y).unwrap();
        assert!((r.coefficients["agreement"] - 2.0).abs() < 1e-12);
        assert!((r.coefficients[INTERCEPT] - 1.0).abs() < 1e-12);
        assert!(r.coefficients["model_fin"].abs() < 1e-12);
        assert!(r.degenerate_fit);
        assert_eq!(r.t_stats["agreement"], None);
        assert_eq!(r.std_errors["agreement"], 0.0);
    }

    #[test]
    fn collinear_predictor_named() {
        let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let dup: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let y: Vec<f64> = (0..6).map(|i| (i * i) as f64).collect();
        match ols_fit(&["x", "x3"], &[x.clone(), dup], &y) {
            Err(Error::RankDeficient(name)) => assert_eq!(name, "x3"),
            other => panic!("unexpected {other:?}"),
        }
        let constant = vec![0.0; 6];
        match ols_fit(&["x", "model_fin"], &[x, constant], &y) {
            Err(Error::RankDeficient(name)) => assert_eq!(name, "model_fin"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_few_rows() {
        assert!(ols_fit(&["x"], &[vec![1.0, 2.0]], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn t_is_beta_over_se() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| 0.5 * v + [0.3, -0.2, 0.1][i % 3]).collect();
        let r = ols_fit(&["x"], &[x], &y).unwrap();
        for name in &r.predictors {
            assert_eq!(r.t_stats[name].unwrap(), r.coefficients[name] / r.std_errors[name]);
            let p = r.p_values[name].unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }
}
