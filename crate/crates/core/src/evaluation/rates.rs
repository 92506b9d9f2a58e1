use num_complex::Complex64;

use crate::effective::EffectiveChannel;
use crate::error::{Error, Result};
use crate::evaluation::alignment::AlignmentReport;
use crate::linalg::ComplexMatrix;
use nalgebra::SVD;

/// Per-receiver, per-desired-stream rates in bits per block of
/// `total_slots` channel uses.
///
/// Each receiver whitens its observation with the Cholesky factor of the
/// noise covariance, projects away the whitened interference span, and
/// zero-forces the desired streams; stream `i` gets
/// `log2(1 + 1 / [(A^H A)^-1]_ii)` with `A` the projected desired block.
/// Every receiver in `report` must be decodable.
pub fn zf_rates(eff: &EffectiveChannel, report: &AlignmentReport) -> Result<Vec<Vec<f64>>> {
    if report.receivers.len() != eff.receivers().len() {
        return Err(Error::DimensionMismatch { expected: eff.receivers().len(), found: report.receivers.len() });
    }
    eff.receivers()
        .iter()
        .zip(&report.receivers)
        .enumerate()
        .map(|(n, (rx, status))| {
            if !status.decodable() {
                return Err(Error::AlignmentNotVerified { receiver: n });
            }
            let chol = rx
                .noise_covariance
                .clone()
                .cholesky()
                .ok_or(Error::IllConditioned { smallest: 0.0, largest: 0.0 })?;
            let white = chol.l().solve_lower_triangular(&rx.gain).expect("Cholesky factor is invertible");

            let slots = eff.total_slots();
            let interference = white.select_columns(&eff.interference_columns(n));
            let mut projector = ComplexMatrix::identity(slots, slots);
            if status.interference_rank > 0 {
                let svd = SVD::new(interference, true, false);
                let u = svd.u.expect("SVD computed with u");
                let basis = u.columns(0, status.interference_rank);
                projector -= basis * basis.adjoint();
            }
            let a = projector * white.select_columns(&eff.desired_columns(n));
            let gram = a.ad_mul(&a);
            let inv = gram.try_inverse().ok_or(Error::AlignmentNotVerified { receiver: n })?;
            Ok((0..inv.nrows())
                .map(|i| {
                    let noise: Complex64 = inv[(i, i)];
                    (1.0 + 1.0 / noise.re).log2()
                })
                .collect())
        })
        .collect()
}

pub fn sum_rate(rates: &[Vec<f64>]) -> f64 {
    rates.iter().flatten().sum()
}
