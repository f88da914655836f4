use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sepkit::dsp::FilterChain;
use sepkit::features::mi_discrete_continuous;
use sepkit::model::Label;
use sepkit::stats::special::{digamma, f_sf, inc_beta, ln_gamma, student_t_sf};
use sepkit::stats::{binomial_test, ptukey};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Seed of the estimator checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Check {
    name: String,
    value: f64,
    expected: String,
    pass: bool,
}

fn db(mag: f64) -> f64 {
    20.0 * mag.max(1e-15).log10()
}

fn close(name: &str, value: f64, want: f64, tol: f64) -> Check {
    Check {
        name: name.into(),
        value,
        expected: format!("{want:.10} ± {tol:e}"),
        pass: (value - want).abs() <= tol * want.abs().max(1.0),
    }
}

fn filter_checks(out: &mut Vec<Check>) -> Result<()> {
    let chain = FilterChain::sep_default();
    for f in [50.0, 100.0, 150.0] {
        // Forward-backward squares the single-pass response.
        let v = 2.0 * db(chain.magnitude(f, 4800.0)?);
        out.push(Check {
            name: format!("sep chain {f} Hz"),
            value: v,
            expected: "<= -40 dB".into(),
            pass: v <= -40.0,
        });
    }
    for f in [30.0, 80.0] {
        let v = 2.0 * db(chain.magnitude(f, 4800.0)?);
        out.push(Check {
            name: format!("sep chain {f} Hz"),
            value: v,
            expected: "within ±1 dB".into(),
            pass: v.abs() <= 1.0,
        });
    }
    let b = FilterChain::behaviour_default();
    for f in [10.0, 100.0] {
        let v = 2.0 * db(b.magnitude(f, 1024.0)?);
        out.push(Check {
            name: format!("behaviour chain {f} Hz"),
            value: v,
            expected: "within ±1 dB".into(),
            pass: v.abs() <= 1.0,
        });
    }
    Ok(())
}

fn special_checks(out: &mut Vec<Check>) {
    out.push(close("ln_gamma(0.5)", ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), 1e-12));
    out.push(close("digamma(1)", digamma(1.0), -0.577_215_664_901_532_9, 1e-12));
    out.push(close("inc_beta(2, 3, 0.4)", inc_beta(2.0, 3.0, 0.4), 0.5248, 1e-12));
    out.push(close("t sf(2, df 10)", student_t_sf(2.0, 10.0), 0.036_694_017_385_370_16, 1e-9));
    // F(2, 2) survival is 1 / (1 + f).
    out.push(close("F sf(3; 2, 2)", f_sf(3.0, 2.0, 2.0), 0.25, 1e-12));
    out.push(close("tukey p(3.58; 3, 20)", 1.0 - ptukey(3.58, 3, 20.0), 0.05, 0.005));
}

fn estimator_checks(out: &mut Vec<Check>, seed: u64) -> Result<()> {
    out.push(close("binomial p(36/54)", binomial_test(36, 54, 0.5)?, 0.009_917_163_364_034_143, 1e-12));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<Label> = (0..500).map(|i| if i % 2 == 0 { Label::Left } else { Label::Right }).collect();
    let noise: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
    let mi = mi_discrete_continuous(&noise, &labels, 3, seed)?;
    out.push(Check {
        name: "MI null (n=500)".into(),
        value: mi,
        expected: "|MI| < 0.05".into(),
        pass: mi.abs() < 0.05,
    });
    let coded: Vec<f64> = labels
        .iter()
        .map(|&l| if l == Label::Left { 0.0 } else { 1.0 } + 1e-6 * rng.random::<f64>())
        .collect();
    let mi = mi_discrete_continuous(&coded, &labels, 3, seed)?;
    out.push(close("MI class-coded", mi, std::f64::consts::LN_2, 0.1));
    Ok(())
}

pub fn run(args: Args) -> Result<()> {
    let mut checks = Vec::new();
    filter_checks(&mut checks)?;
    special_checks(&mut checks);
    estimator_checks(&mut checks, args.seed)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        println!(
            "{}  {:<width$}  {:>16.10}  {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.expected
        );
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}
