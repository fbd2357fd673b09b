//! Achievable and secrecy rates, in bits per channel use.

use num_complex::Complex64;

use crate::channel::ChannelDraw;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::matrix::{logdet_hpd, ComplexMatrix};
use crate::precoding::{design_link, interference_covariance, jammer_precoder, LinkDesign};

/// Rates of one coherence block, indexed by gateway.
///
/// The consumer's precoder is designed for the gateway it talks to, so the
/// eavesdropper's first-hop rate is gateway-specific as well.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSample {
    /// consumer -> gateway i
    pub r_ab: Vec<f64>,
    /// gateway i -> aggregator
    pub r_bg: Vec<f64>,
    /// eavesdropper on the first hop when the consumer targets gateway i
    pub r_ae: Vec<f64>,
    /// eavesdropper on the second hop when gateway i forwards
    pub r_be: Vec<f64>,
}

impl BlockSample {
    pub fn gateways(&self) -> usize {
        self.r_ab.len()
    }

    /// Legitimate bottleneck rate through gateway `i`.
    pub fn bottleneck(&self, i: usize) -> f64 {
        self.r_ab[i].min(self.r_bg[i])
    }

    /// Secrecy rates of both hops through gateway `i`.
    pub fn secrecy(&self, i: usize) -> (f64, f64) {
        (
            secrecy_rate_block(self.r_ab[i], self.r_ae[i]),
            secrecy_rate_block(self.r_bg[i], self.r_be[i]),
        )
    }
}

/// Rate of a whitened link with equal per-stream power:
/// `sum_j log2(1 + p_data s_j^2)`.
pub fn legit_rate(design: &LinkDesign, p_data: f64) -> f64 {
    design
        .singular_values
        .iter()
        .map(|s| (p_data * s * s).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// Eavesdropper rate with artificial noise treated as Gaussian interference:
/// `log2 det(I + p_data (H P)(H P)* C^{-1})`, `C = p_an (H Q)(H Q)* + kappa_e I`.
pub fn eve_rate(
    h_ve: &ComplexMatrix,
    data_precoder: &ComplexMatrix,
    an_precoder: &ComplexMatrix,
    p_data: f64,
    p_an: f64,
    kappa_e: f64,
) -> Result<f64> {
    eve_rate_with_interference(h_ve, data_precoder, an_precoder, p_data, p_an, kappa_e, None)
}

/// [`eve_rate`] with an additional interference covariance added to `C`.
pub fn eve_rate_with_interference(
    h_ve: &ComplexMatrix,
    data_precoder: &ComplexMatrix,
    an_precoder: &ComplexMatrix,
    p_data: f64,
    p_an: f64,
    kappa_e: f64,
    extra: Option<&ComplexMatrix>,
) -> Result<f64> {
    if kappa_e.is_nan() || kappa_e <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: kappa_e,
        });
    }
    let n = h_ve.nrows();
    let mut cov = ComplexMatrix::identity(n, n) * Complex64::new(kappa_e, 0.0);
    if p_an > 0.0 && an_precoder.ncols() > 0 {
        let g = h_ve * an_precoder;
        cov += &g * g.adjoint() * Complex64::new(p_an, 0.0);
    }
    if let Some(extra) = extra {
        cov += extra;
    }
    if p_data <= 0.0 {
        return Ok(0.0);
    }
    let s = h_ve * data_precoder;
    let total = &cov + &s * s.adjoint() * Complex64::new(p_data, 0.0);
    // log det(C + S) - log det(C) avoids forming C^{-1}
    Ok((logdet_hpd(&total)? - logdet_hpd(&cov)?).max(0.0))
}

/// `[r_legit - r_eve]^+`
pub fn secrecy_rate_block(r_legit: f64, r_eve: f64) -> f64 {
    (r_legit - r_eve).max(0.0)
}

/// Packet secrecy rate: the smallest per-block secrecy rate over both hops.
pub fn end_to_end_secrecy(hop1: &[f64], hop2: &[f64]) -> Result<f64> {
    if hop1.is_empty() || hop1.len() != hop2.len() {
        return Err(Error::DimensionMismatch(format!(
            "hop rate lists have lengths {} and {}",
            hop1.len(),
            hop2.len()
        )));
    }
    Ok(hop1.iter().chain(hop2).copied().fold(f64::INFINITY, f64::min))
}

/// Per-stream data and artificial-noise powers for a transmitter.
pub fn power_split(total: f64, theta: f64, antennas: usize, streams: usize) -> (f64, f64) {
    let p_data = theta * total / streams as f64;
    let p_an = (1.0 - theta) * total / (antennas - streams) as f64;
    (p_data, p_an)
}

/// Designs every link of a block and evaluates all rates.
pub fn block_sample(cfg: &ScenarioConfig, draw: &ChannelDraw) -> Result<BlockSample> {
    let jam_streams = cfg.n_j - cfg.n_e;
    let q_j = jammer_precoder(&draw.h_je, cfg.n_j, cfg.n_e)?;

    // Whatever jamming leaks to the eavesdropper is kept in her covariance; the
    // null-space precoder drives it to rounding level.
    let leak = &draw.h_je * &q_j;
    let jam_at_eve = &leak * leak.adjoint() * Complex64::new(cfg.p_j / jam_streams as f64, 0.0);

    let (pa_data, pa_an) = power_split(cfg.p_a, cfg.theta, cfg.n_a, cfg.s_ab);
    let (pb_data, pb_an) = power_split(cfg.p_b, cfg.theta, cfg.n_b, cfg.s_bg);

    let w_g = interference_covariance(&draw.h_jg, &q_j, cfg.p_j, jam_streams, cfg.kappa_g, cfg.n_g)?;

    let m = draw.gateways();
    let mut sample = BlockSample {
        r_ab: Vec::with_capacity(m),
        r_bg: Vec::with_capacity(m),
        r_ae: Vec::with_capacity(m),
        r_be: Vec::with_capacity(m),
    };
    for i in 0..m {
        let w_b = interference_covariance(&draw.h_jb[i], &q_j, cfg.p_j, jam_streams, cfg.kappa_b, cfg.n_b)?;
        let first = design_link(&draw.h_ab[i], &w_b, cfg.s_ab)?;
        sample.r_ab.push(legit_rate(&first, pa_data));
        sample.r_ae.push(eve_rate_with_interference(
            &draw.h_ae,
            &first.data_precoder,
            &first.an_precoder,
            pa_data,
            pa_an,
            cfg.kappa_e,
            Some(&jam_at_eve),
        )?);

        let second = design_link(&draw.h_bg[i], &w_g, cfg.s_bg)?;
        sample.r_bg.push(legit_rate(&second, pb_data));
        sample.r_be.push(eve_rate_with_interference(
            &draw.h_be[i],
            &second.data_precoder,
            &second.an_precoder,
            pb_data,
            pb_an,
            cfg.kappa_e,
            Some(&jam_at_eve),
        )?);
    }
    Ok(sample)
}
