use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{anova_one_way, mean, tukey_hsd, Anova, TukeyPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub values: Vec<f64>,
    pub mean: f64,
}

/// One-way ANOVA with Tukey HSD across named groups of session values,
/// typically the top-2 median SNR of each array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub alpha: f64,
    pub groups: Vec<GroupSummary>,
    pub anova: Anova,
    pub rejects: bool,
    pub tukey: Vec<TukeyPair>,
}

pub fn compare_groups(groups: Vec<(String, Vec<f64>)>, alpha: f64) -> Result<GroupComparison> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} outside (0, 1)")));
    }
    let values: Vec<Vec<f64>> = groups.iter().map(|(_, v)| v.clone()).collect();
    let anova = anova_one_way(&values)?;
    let tukey = tukey_hsd(&values, alpha)?;
    Ok(GroupComparison {
        alpha,
        rejects: anova.p < alpha,
        groups: groups
            .into_iter()
            .map(|(name, values)| GroupSummary {
                mean: mean(&values),
                name,
                values,
            })
            .collect(),
        anova,
        tukey,
    })
}
