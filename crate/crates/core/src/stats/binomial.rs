use crate::error::{Error, Result};

/// ln of the binomial term C(n, i) p^i (1 − p)^(n − i).
fn ln_term(n: u64, i: u64, ln_p: f64, ln_q: f64) -> f64 {
    let m = i.min(n - i);
    let mut ln_c = 0.0;
    for j in 1..=m {
        ln_c += ((n - m + j) as f64 / j as f64).ln();
    }
    ln_c + i as f64 * ln_p + (n - i) as f64 * ln_q
}

/// Sums terms starting at `start` and moving by `step` (±1) while the terms
/// shrink geometrically; the starting term is carried in log space.
fn tail_from(n: u64, start: u64, upward: bool, p: f64) -> f64 {
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let odds = p / (1.0 - p);
    let mut sum = 1.0;
    let mut rel = 1.0;
    let mut i = start;
    loop {
        if upward {
            if i == n {
                break;
            }
            rel *= (n - i) as f64 / (i + 1) as f64 * odds;
            i += 1;
        } else {
            if i == 0 {
                break;
            }
            rel *= i as f64 / ((n - i + 1) as f64 * odds);
            i -= 1;
        }
        sum += rel;
        if rel < sum * 1e-18 {
            break;
        }
    }
    (ln_term(n, start, ln_p, ln_q) + sum.ln()).exp()
}

/// Exact one-sided upper-tail binomial test: P(X ≥ k) for X ~ Bin(n, p0).
pub fn binomial_test(k: u64, n: u64, p0: f64) -> Result<f64> {
    if k > n {
        return Err(Error::invalid(format!("successes {k} exceed trials {n}")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::invalid(format!("chance level {p0} not in (0, 1)")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if k == n {
        if let Ok(e) = i32::try_from(n) {
            return Ok(p0.powi(e));
        }
    }
    // Sum whichever side of the mode is the short, decreasing tail.
    if k as f64 > n as f64 * p0 {
        Ok(tail_from(n, k, true, p0).min(1.0))
    } else {
        let lower = tail_from(n, k - 1, false, p0);
        Ok((1.0 - lower).clamp(0.0, 1.0))
    }
}

/// Central `level` interval of Bin(n, p0) in counts: the α/2 and 1 − α/2
/// quantiles.
pub fn binomial_interval(n: u64, p0: f64, level: f64) -> Result<(u64, u64)> {
    if !(p0 > 0.0 && p0 < 1.0) || !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("binomial interval needs p0 and level in (0, 1)"));
    }
    let alpha = 1.0 - level;
    let ln_p = p0.ln();
    let ln_q = (-p0).ln_1p();
    let mut cdf = 0.0;
    let mut lo = None;
    for i in 0..=n {
        cdf += ln_term(n, i, ln_p, ln_q).exp();
        if lo.is_none() && cdf >= alpha / 2.0 {
            lo = Some(i);
        }
        if cdf >= 1.0 - alpha / 2.0 {
            return Ok((lo.unwrap_or(i), i));
        }
    }
    Ok((lo.unwrap_or(n), n))
}
