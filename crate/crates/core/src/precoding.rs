//! Transmit precoders and receive filters for the protected links.
//!
//! The jammer hides its noise from the eavesdropper by transmitting inside the
//! null space of its channel to her. Each legitimate receiver whitens the
//! jammer-plus-noise covariance, and the transmitter beamforms along the
//! dominant singular directions of the whitened channel while sending
//! artificial noise in directions the receive filter rejects.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{inv_sqrt_hpd, null_space_basis, svd_ordered, ComplexMatrix};

/// Precoders and filters for one transmitter -> receiver link.
#[derive(Debug, Clone)]
pub struct LinkDesign {
    /// `W^{-1/2}`, `rx x rx`.
    pub whitener: ComplexMatrix,
    /// Data precoder `P`, `tx x streams`, orthonormal columns.
    pub data_precoder: ComplexMatrix,
    /// Receive filter `F`, `rx x streams`; the receiver applies `F*`.
    pub receive_filter: ComplexMatrix,
    /// Artificial-noise precoder `Q`, `tx x (tx - streams)`, orthonormal columns.
    pub an_precoder: ComplexMatrix,
    /// Leading singular values of the whitened channel, descending.
    pub singular_values: Vec<f64>,
}

impl LinkDesign {
    pub fn streams(&self) -> usize {
        self.data_precoder.ncols()
    }

    pub fn an_streams(&self) -> usize {
        self.an_precoder.ncols()
    }
}

/// Jammer precoder whose columns span the null space of `h_je`, so the jamming
/// signal vanishes at the eavesdropper. Returns `n_j x (n_j - n_e)`.
pub fn jammer_precoder(h_je: &ComplexMatrix, n_j: usize, n_e: usize) -> Result<ComplexMatrix> {
    if h_je.shape() != (n_e, n_j) {
        return Err(Error::DimensionMismatch(format!(
            "jammer->eavesdropper channel is {}x{}, expected {n_e}x{n_j}",
            h_je.nrows(),
            h_je.ncols()
        )));
    }
    if n_j <= n_e {
        return Err(Error::NullSpaceEmpty {
            requested: 0,
            nullity: n_j.saturating_sub(n_e),
        });
    }
    null_space_basis(h_je, n_j - n_e)
}

/// Interference-plus-noise covariance at a receiver facing the jammer:
/// `(p_j / n_an) (H_j Q_j)(H_j Q_j)* + kappa I`.
pub fn interference_covariance(
    h_j_rx: &ComplexMatrix,
    q_j: &ComplexMatrix,
    p_j: f64,
    n_an: usize,
    kappa: f64,
    n_rx: usize,
) -> Result<ComplexMatrix> {
    if h_j_rx.nrows() != n_rx || h_j_rx.ncols() != q_j.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "jammer channel {}x{} with precoder {}x{} at a {n_rx}-antenna receiver",
            h_j_rx.nrows(),
            h_j_rx.ncols(),
            q_j.nrows(),
            q_j.ncols()
        )));
    }
    let mut w = ComplexMatrix::identity(n_rx, n_rx) * Complex64::new(kappa, 0.0);
    if p_j > 0.0 && n_an > 0 {
        let g = h_j_rx * q_j;
        w += &g * g.adjoint() * Complex64::new(p_j / n_an as f64, 0.0);
    }
    Ok(w)
}

/// Designs the whitened-SVD transceiver pair and the artificial-noise precoder
/// for channel `h` (`rx x tx`) under interference covariance `w` (`rx x rx`).
pub fn design_link(h: &ComplexMatrix, w: &ComplexMatrix, streams: usize) -> Result<LinkDesign> {
    let (rx, tx) = h.shape();
    if w.shape() != (rx, rx) {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}, channel has {rx} receive antennas",
            w.nrows(),
            w.ncols()
        )));
    }
    if streams == 0 || streams > rx.min(tx) {
        return Err(Error::DimensionMismatch(format!(
            "{streams} streams over a {rx}x{tx} channel"
        )));
    }
    if tx <= streams {
        return Err(Error::NullSpaceEmpty {
            requested: 0,
            nullity: 0,
        });
    }
    let whitener = inv_sqrt_hpd(w)?;
    let whitened = &whitener * h;
    let svd = svd_ordered(&whitened)?;

    let data_precoder = svd.v.columns(0, streams).into_owned();
    let u_s = svd.u.columns(0, streams);
    // F* = U_s* W^{-1/2}, so F = W^{-1/2}* U_s
    let receive_filter = whitener.adjoint() * u_s;
    let filtered_channel = receive_filter.adjoint() * h;
    let an_precoder = null_space_basis(&filtered_channel, tx - streams)?;

    Ok(LinkDesign {
        whitener,
        data_precoder,
        receive_filter,
        an_precoder,
        singular_values: svd.singular_values[..streams].to_vec(),
    })
}
