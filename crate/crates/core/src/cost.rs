//! Demand-estimation error cost paid by the utility when meter reports are lost.
//!
//! A consumer whose report never arrives is provisioned at its mean demand
//! `mu`. Over-provisioning is charged at the unit-commitment price and
//! shortfall at the economic-dispatch price, weighted by the demand density on
//! `[0, e_max]`.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub mu: f64,
    pub sigma: f64,
    pub e_max: f64,
    pub p_uc: f64,
    pub p_ed: f64,
    /// Renormalize the Gaussian over `[0, e_max]`; otherwise the untruncated
    /// density is integrated over the same range.
    pub truncate: bool,
}

impl CostModel {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            mu: cfg.mu,
            sigma: cfg.sigma,
            e_max: cfg.e_max,
            p_uc: cfg.p_uc,
            p_ed: cfg.p_ed,
            truncate: cfg.truncate_demand,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| {
            Err(Error::Validation {
                key: key.into(),
                message: message.into(),
            })
        };
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma", "need sigma > 0");
        }
        if !(self.mu > 0.0 && self.mu < self.e_max && self.e_max.is_finite()) {
            return bad("mu", "need 0 < mu < e_max");
        }
        if !(self.p_uc >= 0.0 && self.p_ed >= 0.0) {
            return bad("p_uc", "prices must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub per_consumer_cost: f64,
    pub expected_loss: f64,
    pub n_consumers: usize,
    pub p_outage: f64,
}

/// Cost of one lost report in closed form.
///
/// With `z = (a - mu) / sigma`, both partial expectations reduce to
/// `sigma (phi(0) - phi(z_end))`, divided by the captured mass when the
/// density is truncated.
pub fn consumer_cost(model: &CostModel) -> f64 {
    let std = Normal::standard();
    let lo = -model.mu / model.sigma;
    let hi = (model.e_max - model.mu) / model.sigma;
    let peak = std.pdf(0.0);
    let mass = if model.truncate {
        std.cdf(hi) - std.cdf(lo)
    } else {
        1.0
    };
    let below = model.sigma * (peak - std.pdf(lo));
    let above = model.sigma * (peak - std.pdf(hi));
    (model.p_uc * below + model.p_ed * above) / mass
}

/// Adaptive Simpson integration to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
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
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Same quantity as [`consumer_cost`] by direct numerical integration of the
/// density; shares no code with the closed form.
pub fn consumer_cost_quadrature(model: &CostModel) -> f64 {
    let (mu, sigma) = (model.mu, model.sigma);
    let density = move |a: f64| {
        let z = (a - mu) / sigma;
        (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let tol = 1e-13;
    // split at mu and a few sigmas either side so the sharp peak is resolved
    let mut knots = vec![0.0, mu, model.e_max];
    for s in [-4.0, -1.0, 1.0, 4.0] {
        let x = mu + s * sigma;
        if x > 0.0 && x < model.e_max {
            knots.push(x);
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let integrate = |g: &dyn Fn(f64) -> f64| -> f64 {
        knots.windows(2).map(|w| adaptive_simpson(g, w[0], w[1], tol)).sum()
    };
    let mass = if model.truncate {
        integrate(&density)
    } else {
        1.0
    };
    let below = integrate(&|a| if a < mu { (mu - a) * density(a) } else { 0.0 });
    let above = integrate(&|a| if a > mu { (a - mu) * density(a) } else { 0.0 });
    (model.p_uc * below + model.p_ed * above) / mass
}

/// Expected loss over `n_consumers` identical consumers, each lost with
/// probability `p_outage`.
pub fn expected_loss(model: &CostModel, n_consumers: usize, p_outage: f64) -> Result<CostReport> {
    model.validate()?;
    if !(0.0..=1.0).contains(&p_outage) {
        return Err(Error::Validation {
            key: "p_outage".into(),
            message: format!("{p_outage} is not a probability"),
        });
    }
    let per_consumer_cost = consumer_cost(model);
    Ok(CostReport {
        per_consumer_cost,
        expected_loss: n_consumers as f64 * per_consumer_cost * p_outage,
        n_consumers,
        p_outage,
    })
}
