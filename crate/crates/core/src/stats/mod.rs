//! Classical and exact tests used for reporting: one-sample t-test,
//! one-way ANOVA, Tukey HSD and the exact binomial test.

mod binomial;
pub mod special;
mod tukey;

use serde::{Deserialize, Serialize};

pub use binomial::{binomial_interval, binomial_test};
pub use tukey::{ptukey, tukey_hsd, TukeyPair};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Greater,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub mean: f64,
    pub n: usize,
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub(crate) fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One-sample Student's t-test of `values` against `mu0`.
pub fn t_test_one_sample(values: &[f64], mu0: f64, tail: Tail) -> Result<TTest> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Insufficient(format!("t-test needs at least 2 values, got {n}")));
    }
    let var = variance(values);
    if var <= 0.0 {
        return Err(Error::Degenerate("t-test on zero-variance sample".into()));
    }
    let m = mean(values);
    let t = (m - mu0) / (var / n as f64).sqrt();
    let df = (n - 1) as f64;
    let upper = special::student_t_sf(t, df);
    let p = match tail {
        Tail::Greater => upper,
        Tail::TwoSided => (2.0 * upper.min(1.0 - upper)).min(1.0),
    };
    Ok(TTest { t, df, p, mean: m, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    /// Pooled within-group mean square.
    pub ms_within: f64,
}

fn check_groups(groups: &[Vec<f64>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::Insufficient(format!("need at least 2 groups, got {}", groups.len())));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::Insufficient(format!("group {i} has {} values, need 2", g.len())));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("group {i} contains non-finite values")));
        }
    }
    Ok(())
}

/// One-way ANOVA with the usual between/within decomposition.
pub fn anova_one_way(groups: &[Vec<f64>]) -> Result<Anova> {
    check_groups(groups)?;
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = mean(g);
        ss_between += g.len() as f64 * (m - grand) * (m - grand);
        ss_within += g.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    let df_between = k - 1;
    let df_within = n - k;
    let ms_within = ss_within / df_within as f64;
    if ms_within <= 0.0 {
        return Err(Error::Degenerate("ANOVA with zero within-group variance".into()));
    }
    let f = (ss_between / df_between as f64) / ms_within;
    let p = special::f_sf(f, df_between as f64, df_within as f64);
    Ok(Anova {
        f,
        df_between,
        df_within,
        p,
        ms_within,
    })
}
