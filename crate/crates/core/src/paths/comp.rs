//! Zero-forcing joint transmission for a CoMP cluster.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest accepted condition number of `H H^*`.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Channel state of one CoMP cluster at the control unit.
#[derive(Debug, Clone, PartialEq)]
pub struct CompCluster {
    /// `M x N` amplitude gains from the `N` cluster BSs to the `M` served AVs,
    /// including antenna gains and path loss.
    pub channel: DMatrix<Complex64>,
    pub p_max_dbm: f64,
}

impl CompCluster {
    pub fn new(channel: DMatrix<Complex64>, p_max_dbm: f64) -> Result<Self> {
        let (m, n) = channel.shape();
        if m == 0 || m > n {
            return Err(Error::DimensionMismatch(format!("{m} AVs served by {n} BSs")));
        }
        if channel.iter().any(|h| !(h.re.is_finite() && h.im.is_finite())) {
            return Err(Error::DimensionMismatch("non-finite channel entry".into()));
        }
        Ok(Self { channel, p_max_dbm })
    }

    pub fn n_bs(&self) -> usize {
        self.channel.ncols()
    }

    pub fn m_avs(&self) -> usize {
        self.channel.nrows()
    }
}

/// Right pseudo-inverse `W = H^* (H H^*)^{-1}` as an `N x M` matrix, so that
/// `H W = I_M`.
///
/// Computed from a thin QR factorization `H^* = Q R`, which gives
/// `W = Q (R^*)^{-1}` without forming the Gram matrix.
pub fn zf_precoder(cluster: &CompCluster) -> Result<DMatrix<Complex64>> {
    let h = &cluster.channel;
    let m = h.nrows();
    if m == 1 {
        let norm2: f64 = h.iter().map(|x| x.norm_sqr()).sum();
        if !(norm2 > 0.0) {
            return Err(Error::SingularChannel { condition: f64::INFINITY });
        }
        return Ok(h.adjoint().map(|x| x / norm2));
    }
    let qr = h.adjoint().qr();
    let r = qr.r();
    let sv = r.singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let condition = (smax / smin).powi(2);
    if !(condition <= MAX_GRAM_CONDITION) {
        return Err(Error::SingularChannel { condition });
    }
    let identity = DMatrix::<Complex64>::identity(m, m);
    let r_inv_adj =
        r.adjoint().solve_lower_triangular(&identity).ok_or(Error::SingularChannel { condition: f64::INFINITY })?;
    Ok(qr.q() * r_inv_adj)
}

/// Equal per-AV symbol power under the per-BS constraint `p_max`:
/// `p_max / max_j [W W^*]_{jj}`.
pub fn comp_symbol_power(w: &DMatrix<Complex64>, p_max_linear: f64) -> f64 {
    let worst = w.row_iter().map(|row| row.iter().map(|x| x.norm_sqr()).sum::<f64>()).fold(0.0, f64::max);
    p_max_linear / worst
}
