//! Per-block Rayleigh channel realizations and counter-based random streams.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::ScenarioConfig;
use crate::matrix::ComplexMatrix;

pub type RandomStream = ChaCha8Rng;

/// Deterministic random stream for one `(seed, trial, block)` coordinate.
///
/// The coordinate is written directly into the ChaCha key, so distinct
/// coordinates never share a stream and results do not depend on the order
/// in which trials are executed.
pub fn substream(seed: u64, trial: u64, block: u64) -> RandomStream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16..24].copy_from_slice(&block.to_le_bytes());
    key[24..].copy_from_slice(b"gridsec\0");
    ChaCha8Rng::from_seed(key)
}

/// One circularly-symmetric complex Gaussian sample with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    // filled row by row so the draw order is independent of storage layout
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// All channel matrices of one coherence block. Matrices map transmitter
/// antennas (columns) to receiver antennas (rows). Vectors are indexed by
/// gateway.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    /// consumer -> gateway i, `n_b x n_a`
    pub h_ab: Vec<ComplexMatrix>,
    /// consumer -> eavesdropper, `n_e x n_a`
    pub h_ae: ComplexMatrix,
    /// jammer -> gateway i, `n_b x n_j`
    pub h_jb: Vec<ComplexMatrix>,
    /// jammer -> eavesdropper, `n_e x n_j`
    pub h_je: ComplexMatrix,
    /// gateway i -> aggregator, `n_g x n_b`
    pub h_bg: Vec<ComplexMatrix>,
    /// gateway i -> eavesdropper, `n_e x n_b`
    pub h_be: Vec<ComplexMatrix>,
    /// jammer -> aggregator, `n_g x n_j`
    pub h_jg: ComplexMatrix,
}

impl ChannelDraw {
    pub fn gateways(&self) -> usize {
        self.h_ab.len()
    }

    pub fn all_matrices(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.h_ab
            .iter()
            .chain(self.h_jb.iter())
            .chain(self.h_bg.iter())
            .chain(self.h_be.iter())
            .chain([&self.h_ae, &self.h_je, &self.h_jg])
    }
}

/// Draws every link of one block with i.i.d. CN(0, 1) entries.
pub fn draw_block_channels<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> ChannelDraw {
    let m = cfg.m_gateways;
    let h_ae = gaussian_matrix(rng, cfg.n_e, cfg.n_a);
    let h_je = gaussian_matrix(rng, cfg.n_e, cfg.n_j);
    let h_jg = gaussian_matrix(rng, cfg.n_g, cfg.n_j);
    let mut h_ab = Vec::with_capacity(m);
    let mut h_jb = Vec::with_capacity(m);
    let mut h_bg = Vec::with_capacity(m);
    let mut h_be = Vec::with_capacity(m);
    for _ in 0..m {
        h_ab.push(gaussian_matrix(rng, cfg.n_b, cfg.n_a));
        h_jb.push(gaussian_matrix(rng, cfg.n_b, cfg.n_j));
        h_bg.push(gaussian_matrix(rng, cfg.n_g, cfg.n_b));
        h_be.push(gaussian_matrix(rng, cfg.n_e, cfg.n_b));
    }
    ChannelDraw {
        h_ab,
        h_ae,
        h_jb,
        h_je,
        h_bg,
        h_be,
        h_jg,
    }
}
