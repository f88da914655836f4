//! Studentized range distribution and Tukey's HSD (Tukey-Kramer for
//! unequal group sizes).

use serde::{Deserialize, Serialize};

use super::special::{integrate, ln_gamma, normal_cdf, normal_pdf};
use super::{anova_one_way, mean};
use crate::error::{Error, Result};

const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-10;

/// P(range of k iid standard normals ≤ w).
fn range_cdf(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let km1 = (k - 1) as i32;
    let f = |z: f64| normal_pdf(z) * (normal_cdf(z) - normal_cdf(z - w)).powi(km1);
    let v = k as f64 * integrate(&f, -8.5, 8.5 + w, INNER_TOL);
    v.clamp(0.0, 1.0)
}

/// CDF of the studentized range statistic with `k` means and `df` error
/// degrees of freedom.
pub fn ptukey(q: f64, k: usize, df: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    // Density of s = sqrt(chi2_df / df).
    let half = df / 2.0;
    let ln_norm = half * df.ln() - ln_gamma(half) - (half - 1.0) * std::f64::consts::LN_2;
    let density = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            (ln_norm + (df - 1.0) * s.ln() - df * s * s / 2.0).exp()
        }
    };
    let spread = 9.0 / (2.0 * df).sqrt();
    let lo = (1.0 - spread).max(0.0);
    let hi = 1.0 + spread.max(1.0) * if df < 8.0 { 2.0 } else { 1.0 };
    let f = |s: f64| density(s) * range_cdf(q * s, k);
    integrate(&f, lo, hi, OUTER_TOL).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TukeyPair {
    pub i: usize,
    pub j: usize,
    /// mean_i − mean_j
    pub mean_diff: f64,
    pub q: f64,
    pub p: f64,
    pub significant: bool,
}

/// All pairwise comparisons using the pooled within-group variance.
pub fn tukey_hsd(groups: &[Vec<f64>], alpha: f64) -> Result<Vec<TukeyPair>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} not in (0, 1)")));
    }
    let anova = anova_one_way(groups)?;
    let k = groups.len();
    let df = anova.df_within as f64;
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let se = (anova.ms_within / 2.0 * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
            let diff = means[i] - means[j];
            let q = diff.abs() / se;
            let p = (1.0 - ptukey(q, k, df)).clamp(0.0, 1.0);
            out.push(TukeyPair {
                i,
                j,
                mean_diff: diff,
                q,
                p,
                significant: p < alpha,
            });
        }
    }
    Ok(out)
}
