//! Monte Carlo estimation of packet outage and secrecy outage with redundant
//! gateways.
//!
//! Every trial simulates one packet of `k_blocks` blocks. Block `b` of trial
//! `t` draws its channels from `substream(seed, t, b)`, so estimates depend
//! only on the configuration and not on how trials are scheduled.

use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::channel::{draw_block_channels, substream};
use crate::config::{GatewayPolicy, ScenarioConfig};
use crate::error::Result;
use crate::rates::{block_sample, BlockSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Gateway selection on instantaneous legitimate rates.
    Selection,
    /// Per-link failure probabilities combined with the product formulas.
    Analytic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Selection => "selection",
            Mode::Analytic => "analytic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub mode: Mode,
    pub p_outage: f64,
    /// Probability that a block's end-to-end secrecy rate misses `R / k`.
    pub p_sec_block: f64,
    /// Expected fraction of a packet the eavesdropper can decode.
    pub unsecured_fraction: f64,
    pub trials: usize,
    pub stderr_outage: f64,
    /// Binomial standard error of `p_sec_block` over all simulated blocks.
    pub stderr_sec: f64,
}

fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Gateway with the largest bottleneck rate `min(r_ab, r_bg)`; the lowest
/// index wins ties.
pub fn select_gateway(sample: &BlockSample) -> usize {
    let mut best = 0;
    for i in 1..sample.gateways() {
        if sample.bottleneck(i) > sample.bottleneck(best) {
            best = i;
        }
    }
    best
}

/// Whether both hops through gateway `i` carry at least `threshold` bits.
pub fn block_success(sample: &BlockSample, i: usize, threshold: f64) -> bool {
    sample.bottleneck(i) >= threshold
}

/// Gateway kept for a whole packet: the one whose worst-block bottleneck is
/// largest.
pub fn select_packet_gateway(blocks: &[BlockSample]) -> usize {
    let worst = |i: usize| blocks.iter().map(|b| b.bottleneck(i)).fold(f64::INFINITY, f64::min);
    let m = blocks.first().map_or(1, BlockSample::gateways);
    let mut best = 0;
    for i in 1..m {
        if worst(i) > worst(best) {
            best = i;
        }
    }
    best
}

/// Fraction of a `k`-block packet left unsecured when each block independently
/// suffers secrecy outage with probability `p_block`: the mean number of
/// compromised blocks divided by `k`.
pub fn unsecured_fraction_combiner(p_block: f64, k: usize) -> f64 {
    assert!(k >= 1, "a packet has at least one block");
    let p = p_block.clamp(0.0, 1.0);
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let kf = k as f64;
    (1..=k as u64)
        .map(|exposed| {
            let ln_pmf = ln_binomial(k as u64, exposed)
                + exposed as f64 * ln_p
                + (k as u64 - exposed) as f64 * ln_q;
            exposed as f64 / kf * ln_pmf.exp()
        })
        .sum()
}

/// Simulates the rates of every block of one packet.
pub fn simulate_trial(cfg: &ScenarioConfig, trial: u64) -> Result<Vec<BlockSample>> {
    (0..cfg.k_blocks as u64)
        .map(|block| {
            let draw = draw_block_channels(cfg, &mut substream(cfg.seed, trial, block));
            block_sample(cfg, &draw)
        })
        .collect()
}

/// Event counts accumulated over trials. Only integers are summed, so the
/// total is independent of reduction order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    pub trials: usize,
    pub blocks: usize,
    /// packets with at least one failed block at the chosen gateway
    pub packet_outages: usize,
    /// blocks whose end-to-end secrecy rate is below threshold
    pub secrecy_outage_blocks: usize,
    /// `[block][gateway]` counts of first-hop rate below threshold
    pub fail_ab: Vec<Vec<usize>>,
    /// `[block][gateway]` counts of second-hop rate below threshold
    pub fail_bg: Vec<Vec<usize>>,
}

impl Tally {
    pub fn empty(k: usize, m: usize) -> Self {
        Self {
            trials: 0,
            blocks: 0,
            packet_outages: 0,
            secrecy_outage_blocks: 0,
            fail_ab: vec![vec![0; m]; k],
            fail_bg: vec![vec![0; m]; k],
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.blocks += other.blocks;
        self.packet_outages += other.packet_outages;
        self.secrecy_outage_blocks += other.secrecy_outage_blocks;
        for (a, b) in self.fail_ab.iter_mut().zip(&other.fail_ab) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.fail_bg.iter_mut().zip(&other.fail_bg) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self
    }

    /// Adds the events of one simulated packet.
    pub fn record(&mut self, blocks: &[BlockSample], threshold: f64, policy: GatewayPolicy) {
        let packet_gateway = match policy {
            GatewayPolicy::PerPacket => Some(select_packet_gateway(blocks)),
            GatewayPolicy::PerBlock => None,
        };
        let mut outage = false;
        for (l, sample) in blocks.iter().enumerate() {
            let chosen = packet_gateway.unwrap_or_else(|| select_gateway(sample));
            if !block_success(sample, chosen, threshold) {
                outage = true;
            }
            let (sec1, sec2) = sample.secrecy(chosen);
            if sec1.min(sec2) < threshold {
                self.secrecy_outage_blocks += 1;
            }
            for i in 0..sample.gateways() {
                self.fail_ab[l][i] += usize::from(sample.r_ab[i] < threshold);
                self.fail_bg[l][i] += usize::from(sample.r_bg[i] < threshold);
            }
        }
        self.trials += 1;
        self.blocks += blocks.len();
        self.packet_outages += usize::from(outage);
    }

    fn secrecy(&self) -> (f64, f64) {
        let p = self.secrecy_outage_blocks as f64 / self.blocks as f64;
        (p, binomial_stderr(p, self.blocks))
    }

    pub fn estimate(&self, mode: Mode) -> OutageEstimate {
        let k = self.fail_ab.len();
        let (p_sec_block, stderr_sec) = self.secrecy();
        let p_outage = match mode {
            Mode::Selection => self.packet_outages as f64 / self.trials as f64,
            Mode::Analytic => {
                let hop1 = combine_link_failures(&self.fail_ab, self.trials);
                let hop2 = combine_link_failures(&self.fail_bg, self.trials);
                combine_hops(hop1, hop2)
            }
        };
        OutageEstimate {
            mode,
            p_outage,
            p_sec_block,
            unsecured_fraction: unsecured_fraction_combiner(p_sec_block, k),
            trials: self.trials,
            stderr_outage: binomial_stderr(p_outage, self.trials),
            stderr_sec,
        }
    }
}

/// Hop outage when a block survives if at least one gateway decodes it:
/// `1 - prod_l (1 - prod_i Pr{fail_{l,i}})`.
pub fn combine_link_failures(fail_counts: &[Vec<usize>], trials: usize) -> f64 {
    let survive: f64 = fail_counts
        .iter()
        .map(|per_gateway| {
            let all_fail: f64 = per_gateway.iter().map(|&c| c as f64 / trials as f64).product();
            1.0 - all_fail
        })
        .product();
    1.0 - survive
}

/// Two-hop outage `1 - (1 - p_hop1)(1 - p_hop2)`.
pub fn combine_hops(p_hop1: f64, p_hop2: f64) -> f64 {
    1.0 - (1.0 - p_hop1) * (1.0 - p_hop2)
}

/// Runs all trials of a scenario in parallel and tallies the events.
pub fn run_trials(cfg: &ScenarioConfig) -> Result<Tally> {
    cfg.validate()?;
    let threshold = cfg.block_threshold();
    let (k, m) = (cfg.k_blocks, cfg.m_gateways);
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let blocks = simulate_trial(cfg, trial)?;
            let mut tally = Tally::empty(k, m);
            tally.record(&blocks, threshold, cfg.gateway_policy);
            Ok(tally)
        })
        .try_reduce(|| Tally::empty(k, m), |a, b| Ok(a.merge(b)))
}

pub fn estimate_selection_mode(cfg: &ScenarioConfig) -> Result<OutageEstimate> {
    Ok(run_trials(cfg)?.estimate(Mode::Selection))
}

pub fn estimate_analytic_mode(cfg: &ScenarioConfig) -> Result<OutageEstimate> {
    Ok(run_trials(cfg)?.estimate(Mode::Analytic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::default_scenario;

    fn sample(r_ab: &[f64], r_bg: &[f64]) -> BlockSample {
        BlockSample {
            r_ab: r_ab.to_vec(),
            r_bg: r_bg.to_vec(),
            r_ae: vec![0.0; r_ab.len()],
            r_be: vec![0.0; r_ab.len()],
        }
    }

    #[test]
    fn selection_examples() {
        assert_eq!(select_gateway(&sample(&[3.0, 5.0], &[4.0, 2.0])), 0);
        assert_eq!(select_gateway(&sample(&[7.0], &[1.0])), 0);
        assert_eq!(select_gateway(&sample(&[2.0, 2.0], &[2.0, 2.0])), 0);
        assert_eq!(select_gateway(&sample(&[1.0, 2.0, 6.0], &[9.0, 9.0, 3.0])), 2);
    }

    #[test]
    fn packet_gateway_uses_worst_block() {
        let blocks = [sample(&[5.0, 3.0], &[5.0, 3.0]), sample(&[1.0, 3.0], &[5.0, 3.0])];
        assert_eq!(select_packet_gateway(&blocks), 1);
    }

    #[test]
    fn success_examples() {
        let s = sample(&[5.0], &[4.0]);
        assert!(block_success(&s, 0, 4.0));
        assert!(!block_success(&s, 0, 4.5));
        assert!(block_success(&sample(&[0.0], &[0.0]), 0, 0.0));
    }

    /// Expected exposed fraction by enumerating all 2^k outage patterns.
    fn enumerate_fraction(p: f64, k: usize) -> f64 {
        (0u32..1 << k)
            .map(|mask| {
                let exposed = mask.count_ones() as i32;
                let prob = p.powi(exposed) * (1.0 - p).powi(k as i32 - exposed);
                exposed as f64 / k as f64 * prob
            })
            .sum()
    }

    #[test]
    fn combiner_examples() {
        for p in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!((unsecured_fraction_combiner(p, 1) - p).abs() < 1e-15);
        }
        assert!((enumerate_fraction(0.5, 3) - 0.5).abs() < 1e-15);
        assert!((unsecured_fraction_combiner(0.5, 3) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn combiner_collapses_to_block_probability() {
        for k in 1..=12 {
            for tenth in 1..=9 {
                let p = tenth as f64 / 10.0;
                let oracle = enumerate_fraction(p, k);
                assert!((oracle - p).abs() < 1e-12);
                assert!((unsecured_fraction_combiner(p, k) - oracle).abs() < 1e-12, "p {p} k {k}");
            }
        }
    }

    #[test]
    fn product_combiners() {
        assert!((combine_hops(0.1, 0.2) - 0.28).abs() < 1e-15);
        let p = 0.3;
        let counts = vec![vec![30]];
        let hop = combine_link_failures(&counts, 100);
        assert!((combine_hops(hop, hop) - (1.0 - (1.0f64 - p).powi(2))).abs() < 1e-15);
        // two gateways each failing half the time, two blocks
        let counts = vec![vec![50, 50], vec![50, 50]];
        assert!((combine_link_failures(&counts, 100) - (1.0 - 0.75f64 * 0.75)).abs() < 1e-15);
    }

    #[test]
    fn tally_merge_is_order_independent() {
        let blocks = [sample(&[3.0, 1.0], &[3.0, 4.0]), sample(&[0.5, 1.0], &[3.0, 0.1])];
        let mut a = Tally::empty(2, 2);
        a.record(&blocks, 2.0, GatewayPolicy::PerBlock);
        let mut b = Tally::empty(2, 2);
        b.record(&blocks[..].iter().rev().cloned().collect::<Vec<_>>(), 1.0, GatewayPolicy::PerBlock);
        let ab = a.clone().merge(b.clone());
        let ba = b.merge(a);
        assert_eq!(ab, ba);
        assert_eq!(ab.trials, 2);
        assert_eq!(ab.blocks, 4);
    }

    #[test]
    fn record_counts_events() {
        let blocks = [sample(&[3.0, 1.0], &[3.0, 4.0]), sample(&[0.5, 1.0], &[3.0, 0.1])];
        let mut t = Tally::empty(2, 2);
        t.record(&blocks, 2.0, GatewayPolicy::PerBlock);
        // block 2 fails at both gateways
        assert_eq!(t.packet_outages, 1);
        assert_eq!(t.fail_ab, vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(t.fail_bg, vec![vec![0, 0], vec![0, 1]]);
        // eavesdropper rates are zero, so secrecy equals the legit rates
        assert_eq!(t.secrecy_outage_blocks, 1);
    }

    #[test]
    fn zero_target_never_fails() {
        let mut cfg = default_scenario();
        cfg.rate_target = 0.0;
        cfg.trials = 200;
        let est = estimate_selection_mode(&cfg).unwrap();
        assert_eq!(est.p_outage, 0.0);
        assert_eq!(est.p_sec_block, 0.0);
        assert_eq!(est.stderr_outage, 0.0);
    }

    #[test]
    fn huge_target_always_fails() {
        let mut cfg = default_scenario();
        cfg.rate_target = 1000.0;
        cfg.trials = 200;
        let est = estimate_selection_mode(&cfg).unwrap();
        assert_eq!(est.p_outage, 1.0);
        assert_eq!(est.unsecured_fraction, 1.0);
        let est = estimate_analytic_mode(&cfg).unwrap();
        assert_eq!(est.p_outage, 1.0);
    }

    #[test]
    fn estimates_are_deterministic() {
        let mut cfg = default_scenario();
        cfg.trials = 300;
        cfg.m_gateways = 2;
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.gateway_policy = GatewayPolicy::PerPacket;
        let c = run_trials(&cfg).unwrap();
        // per-link failure counts do not depend on the policy
        assert_eq!(a.fail_ab, c.fail_ab);
        assert!(c.packet_outages >= a.packet_outages);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = default_scenario();
        cfg.n_j = 3;
        assert!(run_trials(&cfg).is_err());
    }
}
