//! Scenario parameters and the flat `key = value` scenario file format.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the forwarding gateway is chosen among the `m` candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GatewayPolicy {
    /// Pick the best bottleneck gateway independently in every block.
    #[default]
    PerBlock,
    /// Pick one gateway for the whole packet: the one whose worst block
    /// bottleneck rate is largest.
    PerPacket,
}

impl FromStr for GatewayPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "per_block" => Ok(Self::PerBlock),
            "per_packet" => Ok(Self::PerPacket),
            other => Err(format!("expected per_block or per_packet, got `{other}`")),
        }
    }
}

impl fmt::Display for GatewayPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PerBlock => "per_block",
            Self::PerPacket => "per_packet",
        })
    }
}

/// All system parameters of one simulated scenario.
///
/// Powers and noise levels are spectral densities in W/Hz, energies in kWh,
/// prices in $/kWh, rates in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    pub n_g: usize,
    pub n_j: usize,
    /// Streams on the consumer -> gateway hop.
    pub s_ab: usize,
    /// Streams on the gateway -> aggregator hop.
    pub s_bg: usize,
    pub p_a: f64,
    pub p_b: f64,
    pub p_j: f64,
    /// Fraction of transmit power spent on data; the rest carries artificial noise.
    pub theta: f64,
    pub kappa_b: f64,
    pub kappa_g: f64,
    pub kappa_e: f64,
    /// Packet secrecy rate target; every block must carry `rate_target / k_blocks`.
    pub rate_target: f64,
    pub k_blocks: usize,
    pub m_gateways: usize,
    pub n_consumers: usize,
    pub mu: f64,
    pub sigma: f64,
    pub e_max: f64,
    pub p_uc: f64,
    pub p_ed: f64,
    pub seed: u64,
    pub trials: usize,
    pub gateway_policy: GatewayPolicy,
    /// Renormalize the demand density over `[0, e_max]`.
    pub truncate_demand: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        default_scenario()
    }
}

/// Reference scenario: 4-antenna consumers, 3-antenna gateways, 2-antenna
/// aggregator, 3-antenna eavesdropper, 4-antenna jammer, 200 consumers with
/// N(3, 1.5) kWh demand capped at 10 kWh.
///
/// Powers are unit, noise sits 10 dB below them, half the power goes to data,
/// and a packet spans four blocks. Prices of 37.5 $/kWh put the cost of 200
/// lost reports near $9000.
pub fn default_scenario() -> ScenarioConfig {
    ScenarioConfig {
        n_a: 4,
        n_b: 3,
        n_e: 3,
        n_g: 2,
        n_j: 4,
        s_ab: 3,
        s_bg: 2,
        p_a: 1.0,
        p_b: 1.0,
        p_j: 1.0,
        theta: 0.5,
        kappa_b: 0.1,
        kappa_g: 0.1,
        kappa_e: 0.1,
        rate_target: 10.0,
        k_blocks: 4,
        m_gateways: 1,
        n_consumers: 200,
        mu: 3.0,
        sigma: 1.5,
        e_max: 10.0,
        p_uc: 37.5,
        p_ed: 37.5,
        seed: 42,
        trials: 10_000,
        gateway_policy: GatewayPolicy::PerBlock,
        truncate_demand: true,
    }
}

/// Every recognised key of the scenario file, in declaration order.
pub const FIELD_NAMES: &[&str] = &[
    "n_a",
    "n_b",
    "n_e",
    "n_g",
    "n_j",
    "s_ab",
    "s_bg",
    "p_a",
    "p_b",
    "p_j",
    "theta",
    "kappa_b",
    "kappa_g",
    "kappa_e",
    "rate_target",
    "k_blocks",
    "m_gateways",
    "n_consumers",
    "mu",
    "sigma",
    "e_max",
    "p_uc",
    "p_ed",
    "seed",
    "trials",
    "gateway_policy",
    "truncate_demand",
];

fn invalid(key: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| invalid(key, format!("cannot parse `{raw}`: {e}")))
}

impl ScenarioConfig {
    /// Sets one field from its textual value. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let raw = raw.trim();
        match key {
            "n_a" => self.n_a = parse_value(key, raw)?,
            "n_b" => self.n_b = parse_value(key, raw)?,
            "n_e" => self.n_e = parse_value(key, raw)?,
            "n_g" => self.n_g = parse_value(key, raw)?,
            "n_j" => self.n_j = parse_value(key, raw)?,
            "s_ab" => self.s_ab = parse_value(key, raw)?,
            "s_bg" => self.s_bg = parse_value(key, raw)?,
            "p_a" => self.p_a = parse_value(key, raw)?,
            "p_b" => self.p_b = parse_value(key, raw)?,
            "p_j" => self.p_j = parse_value(key, raw)?,
            "theta" => self.theta = parse_value(key, raw)?,
            "kappa_b" => self.kappa_b = parse_value(key, raw)?,
            "kappa_g" => self.kappa_g = parse_value(key, raw)?,
            "kappa_e" => self.kappa_e = parse_value(key, raw)?,
            "rate_target" => self.rate_target = parse_value(key, raw)?,
            "k_blocks" => self.k_blocks = parse_value(key, raw)?,
            "m_gateways" => self.m_gateways = parse_value(key, raw)?,
            "n_consumers" => self.n_consumers = parse_value(key, raw)?,
            "mu" => self.mu = parse_value(key, raw)?,
            "sigma" => self.sigma = parse_value(key, raw)?,
            "e_max" => self.e_max = parse_value(key, raw)?,
            "p_uc" => self.p_uc = parse_value(key, raw)?,
            "p_ed" => self.p_ed = parse_value(key, raw)?,
            "seed" => self.seed = parse_value(key, raw)?,
            "trials" => self.trials = parse_value(key, raw)?,
            "gateway_policy" => self.gateway_policy = parse_value(key, raw)?,
            "truncate_demand" => self.truncate_demand = parse_value(key, raw)?,
            other => return Err(invalid(other, "unknown key")),
        }
        Ok(())
    }

    /// Checks every parameter invariant, naming the first offending key.
    pub fn validate(&self) -> Result<()> {
        if self.s_ab == 0 || self.s_ab > self.n_a.min(self.n_b) {
            return Err(invalid("s_ab", "need 1 <= s_ab <= min(n_a, n_b)"));
        }
        if self.s_bg == 0 || self.s_bg > self.n_b.min(self.n_g) {
            return Err(invalid("s_bg", "need 1 <= s_bg <= min(n_b, n_g)"));
        }
        if self.n_a <= self.s_ab {
            return Err(invalid("n_a", "need n_a > s_ab to leave room for artificial noise"));
        }
        if self.n_b <= self.s_bg {
            return Err(invalid("n_b", "need n_b > s_bg to leave room for artificial noise"));
        }
        if self.n_e == 0 {
            return Err(invalid("n_e", "need at least one eavesdropper antenna"));
        }
        if self.n_j <= self.n_e {
            return Err(invalid("n_j", "need n_j > n_e for the jammer to null the eavesdropper"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(invalid("theta", "need 0 <= theta <= 1"));
        }
        let nonneg = [
            ("p_a", self.p_a),
            ("p_b", self.p_b),
            ("p_j", self.p_j),
            ("p_uc", self.p_uc),
            ("p_ed", self.p_ed),
            ("rate_target", self.rate_target),
        ];
        for (key, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(invalid(key, "must be finite and >= 0"));
            }
        }
        // a zero noise floor makes the whitening covariance singular
        for (key, value) in [("kappa_b", self.kappa_b), ("kappa_g", self.kappa_g), ("kappa_e", self.kappa_e)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(key, "noise level must be finite and > 0"));
            }
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(invalid("sigma", "need sigma > 0"));
        }
        if !(self.e_max.is_finite() && self.mu > 0.0 && self.mu < self.e_max) {
            return Err(invalid("mu", "need 0 < mu < e_max"));
        }
        if self.k_blocks == 0 {
            return Err(invalid("k_blocks", "need k_blocks >= 1"));
        }
        if self.m_gateways == 0 {
            return Err(invalid("m_gateways", "need m_gateways >= 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "need trials >= 1"));
        }
        Ok(())
    }

    /// Per-block rate threshold `rate_target / k_blocks`.
    pub fn block_threshold(&self) -> f64 {
        self.rate_target / self.k_blocks as f64
    }

    /// Renders the configuration in the scenario file format.
    pub fn to_file_string(&self) -> String {
        FIELD_NAMES
            .iter()
            .map(|&key| format!("{key} = {}\n", self.get(key).expect("known key")))
            .collect()
    }

    /// Textual value of a field, `None` for unknown keys.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "n_a" => self.n_a.to_string(),
            "n_b" => self.n_b.to_string(),
            "n_e" => self.n_e.to_string(),
            "n_g" => self.n_g.to_string(),
            "n_j" => self.n_j.to_string(),
            "s_ab" => self.s_ab.to_string(),
            "s_bg" => self.s_bg.to_string(),
            "p_a" => self.p_a.to_string(),
            "p_b" => self.p_b.to_string(),
            "p_j" => self.p_j.to_string(),
            "theta" => self.theta.to_string(),
            "kappa_b" => self.kappa_b.to_string(),
            "kappa_g" => self.kappa_g.to_string(),
            "kappa_e" => self.kappa_e.to_string(),
            "rate_target" => self.rate_target.to_string(),
            "k_blocks" => self.k_blocks.to_string(),
            "m_gateways" => self.m_gateways.to_string(),
            "n_consumers" => self.n_consumers.to_string(),
            "mu" => self.mu.to_string(),
            "sigma" => self.sigma.to_string(),
            "e_max" => self.e_max.to_string(),
            "p_uc" => self.p_uc.to_string(),
            "p_ed" => self.p_ed.to_string(),
            "seed" => self.seed.to_string(),
            "trials" => self.trials.to_string(),
            "gateway_policy" => self.gateway_policy.to_string(),
            "truncate_demand" => self.truncate_demand.to_string(),
            _ => return None,
        })
    }
}

/// Splits a `key = value` document into pairs. Blank lines and `#` comments
/// are skipped; everything else must contain exactly one `=`.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.splitn(2, '=');
        let key = parts.next().unwrap_or("").trim();
        let value = parts.next().map(str::trim);
        match value {
            Some(value) if !key.is_empty() && !value.is_empty() && !value.contains('=') => {
                pairs.push((line_no, key.to_string(), value.to_string()));
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `key = value`, got `{content}`"),
                })
            }
        }
    }
    Ok(pairs)
}

/// Overlays a scenario document on [`default_scenario`] and validates it.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = default_scenario();
    for (_, key, value) in parse_key_values(text)? {
        cfg.set(&key, &value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matches_reference_antennas() {
        let cfg = default_scenario();
        assert_eq!((cfg.n_a, cfg.n_b, cfg.n_e, cfg.n_g, cfg.n_j), (4, 3, 3, 2, 4));
        assert_eq!((cfg.s_ab, cfg.s_bg), (3, 2));
        assert_eq!(cfg.n_consumers, 200);
        assert_eq!((cfg.mu, cfg.sigma, cfg.e_max), (3.0, 1.5, 10.0));
        cfg.validate().unwrap();
    }

    #[test]
    fn empty_file_gives_default() {
        assert_eq!(parse_config_str("").unwrap(), default_scenario());
        assert_eq!(parse_config_str("# only a comment\n\n").unwrap(), default_scenario());
    }

    #[test]
    fn overlay_single_key() {
        let cfg = parse_config_str("theta = 0.5\n").unwrap();
        assert_eq!(cfg.theta, 0.5);
        let cfg = parse_config_str("theta = 0.25   # less data power\n").unwrap();
        assert_eq!(cfg.theta, 0.25);
    }

    #[test]
    fn jammer_must_outnumber_eavesdropper() {
        let err = parse_config_str("n_j = 3").unwrap_err();
        match err {
            Error::Validation { key, message } => {
                assert_eq!(key, "n_j");
                assert!(message.contains("n_j > n_e"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config_str("n_x = 3").unwrap_err();
        assert!(matches!(err, Error::Validation { ref key, .. } if key == "n_x"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_config_str("theta = 0.5\njust words\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(parse_config_str("theta ="), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn bad_value_is_named() {
        let err = parse_config_str("n_a = four").unwrap_err();
        assert!(matches!(err, Error::Validation { ref key, .. } if key == "n_a"));
    }

    #[test]
    fn invariant_violations() {
        for (text, key) in [
            ("s_ab = 4", "s_ab"),
            ("n_a = 3", "n_a"),
            ("theta = 1.5", "theta"),
            ("sigma = 0", "sigma"),
            ("mu = 12", "mu"),
            ("k_blocks = 0", "k_blocks"),
            ("m_gateways = 0", "m_gateways"),
            ("p_uc = -1", "p_uc"),
            ("kappa_e = 0", "kappa_e"),
        ] {
            match parse_config_str(text) {
                Err(Error::Validation { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn file_format_round_trips() {
        let mut cfg = default_scenario();
        cfg.m_gateways = 3;
        cfg.theta = 0.7;
        cfg.gateway_policy = GatewayPolicy::PerPacket;
        cfg.truncate_demand = false;
        assert_eq!(parse_config_str(&cfg.to_file_string()).unwrap(), cfg);
    }

    #[test]
    fn parse_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.conf");
        std::fs::write(&path, "m_gateways = 4\nrate_target = 6\n").unwrap();
        let cfg = parse_config(&path).unwrap();
        assert_eq!(cfg.m_gateways, 4);
        assert_eq!(cfg.rate_target, 6.0);
        assert!(matches!(parse_config(dir.path().join("missing")), Err(Error::Io(_))));
    }
}
