//! Two-slot relay-aided alignment for the `K`-user interference channel
//! with `J` relays of `L` antennas.
//!
//! Slot 0: `X_k = d_k`, relays listen. Slot 1: relay `j` sends
//! `U_j Y_{R_j}(0)` and, with joint beamforming, `X_k = d_k` again. One
//! shared system `H u = b` over all relays makes every interferer collinear
//! with a reference interferer at each receiver, leaving one interference
//! dimension out of two.
//!
//! Rows run over `(k, l)` with `l` outside `{k, i_k}`, where the reference
//! interferer `i_k` is user 1 for receiver 0 and user 0 otherwise. Unknowns
//! run over `(j, m, n)` with `u[j L^2 + m L + n] = U_j[m][n]`.

use num_complex::Complex64;

use crate::channel::{ChannelKind, ChannelRealization, DEGENERACY_FLOOR};
use crate::effective::{EffectiveChannel, LinearRelayPlan, StreamLabel};
use crate::error::{Error, Result};
use crate::linalg::{least_norm_solve, null_space_basis, ComplexMatrix, ComplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IcPrecoding {
    /// Least-norm particular solution of `H u = b`.
    #[default]
    LeastNorm,
    /// Particular solution plus a unit null-space vector of `H`; needs `J L^2 > K (K - 2)`.
    NullSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IcOptions {
    /// Transmitters resend `d_k` in slot 1.
    pub joint_beamforming: bool,
    pub precoding: IcPrecoding,
}

impl Default for IcOptions {
    fn default() -> Self {
        Self { joint_beamforming: true, precoding: IcPrecoding::LeastNorm }
    }
}

/// `ceil(K (K - 2) / L^2)`.
pub fn required_relays_ic(users: usize, antennas: usize) -> usize {
    (users * (users - 2)).div_ceil(antennas * antennas)
}

/// Reference interferer for receiver `k`.
pub fn reference_interferer(k: usize) -> usize {
    if k == 0 { 1 } else { 0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcPrecoderSet {
    /// One `L x L` matrix per relay, shared by all receivers.
    pub matrices: Vec<ComplexMatrix>,
    /// `||H u - b|| / (1 + ||b||)`.
    pub residual: f64,
    pub resamples_used: u32,
}

impl IcPrecoderSet {
    pub fn is_zero(&self) -> bool {
        self.matrices.iter().all(|m| m.iter().all(|z| z.norm() == 0.0))
    }
}

fn ic_users(real: &ChannelRealization) -> Result<usize> {
    match real.topology().kind() {
        ChannelKind::Interference { users } => Ok(users),
        ChannelKind::X { .. } => Err(Error::TopologyMismatch { expected: "an interference channel" }),
    }
}

fn checked(h: Complex64) -> Result<Complex64> {
    if h.norm() <= DEGENERACY_FLOOR {
        Err(Error::DegenerateDenominator { magnitude: h.norm() })
    } else {
        Ok(h)
    }
}

pub fn assemble_ic_system(real: &ChannelRealization, opts: &IcOptions) -> Result<(ComplexMatrix, ComplexVector)> {
    let k_users = ic_users(real)?;
    let topo = real.topology();
    let (j_count, l) = (topo.relays(), topo.antennas());
    let rows = k_users * (k_users - 2);
    let mut h = ComplexMatrix::zeros(rows, j_count * l * l);
    let mut b = ComplexVector::zeros(rows);

    let mut row = 0;
    for k in 0..k_users {
        let i = reference_interferer(k);
        let h_ki = checked(real.direct(k, i, 0))?;
        for ll in (0..k_users).filter(|&ll| ll != k && ll != i) {
            let h_kl = checked(real.direct(k, ll, 0))?;
            for j in 0..j_count {
                let down = real.relay_to_rx(k, j, 1);
                let up_i = real.tx_to_relay(j, i, 0);
                let up_l = real.tx_to_relay(j, ll, 0);
                for m in 0..l {
                    for n in 0..l {
                        h[(row, (j * l + m) * l + n)] = down[m] * (up_i[n] / h_ki - up_l[n] / h_kl);
                    }
                }
            }
            if opts.joint_beamforming {
                b[row] = real.direct(k, ll, 1) / h_kl - real.direct(k, i, 1) / h_ki;
            }
            row += 1;
        }
    }
    Ok((h, b))
}

pub fn solve_ic_precoders(real: &ChannelRealization, opts: &IcOptions) -> Result<IcPrecoderSet> {
    let k_users = ic_users(real)?;
    let topo = real.topology();
    let (j_count, l) = (topo.relays(), topo.antennas());
    let required = required_relays_ic(k_users, l);
    if j_count < required {
        return Err(Error::InfeasibleRelayCount { required, available: j_count });
    }
    let (h, b) = assemble_ic_system(real, opts)?;
    let mut u = least_norm_solve(&h, &b)?;
    if opts.precoding == IcPrecoding::NullSpace {
        let basis = null_space_basis(&h);
        let v = basis.into_iter().next().ok_or(Error::EmptyNullSpace)?;
        u += v;
    }
    let residual = (&h * &u - &b).norm() / (1.0 + b.norm());
    let matrices = (0..j_count)
        .map(|j| ComplexMatrix::from_fn(l, l, |m, n| u[(j * l + m) * l + n]))
        .collect();
    Ok(IcPrecoderSet { matrices, residual, resamples_used: 0 })
}

pub fn ic_streams(users: usize) -> Vec<StreamLabel> {
    (0..users).map(|k| StreamLabel { receiver: k, transmitter: k }).collect()
}

pub fn effective_channel_ic(
    real: &ChannelRealization,
    pre: &IcPrecoderSet,
    power: f64,
    opts: &IcOptions,
) -> Result<EffectiveChannel> {
    let k_users = ic_users(real)?;
    let listen = vec![(0..k_users).map(Some).collect()];
    let relay_direct = vec![(0..k_users)
        .map(|k| if opts.joint_beamforming { vec![k] } else { Vec::new() })
        .collect()];
    let relay_maps = pre.matrices.iter().map(|u| vec![vec![u.clone()]]).collect();
    let plan = LinearRelayPlan { real, streams: ic_streams(k_users), listen, relay_direct, relay_maps };
    Ok(plan.build(power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_realization, NetworkTopology};
    use crate::linalg::rank_eps;

    fn ic(k: usize, j: usize, l: usize) -> NetworkTopology {
        NetworkTopology::interference(k, j, l).unwrap()
    }

    #[test]
    fn required_relay_counts() {
        assert_eq!(required_relays_ic(3, 1), 3);
        assert_eq!(required_relays_ic(4, 3), 1);
        assert_eq!(required_relays_ic(3, 2), 1);
        assert_eq!(required_relays_ic(4, 1), 8);
    }

    #[test]
    fn reference_rule() {
        assert_eq!(reference_interferer(0), 1);
        assert_eq!(reference_interferer(1), 0);
        assert_eq!(reference_interferer(4), 0);
    }

    #[test]
    fn constant_channel_zero_right_side() {
        let real = generate_realization(ic(4, 8, 1), 3, false);
        let (_, b) = assemble_ic_system(&real, &IcOptions::default()).unwrap();
        assert!(b.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn system_shapes_and_rank() {
        for seed in 0..100 {
            let real = generate_realization(ic(3, 3, 1), seed, true);
            let (h, _) = assemble_ic_system(&real, &IcOptions::default()).unwrap();
            assert_eq!(h.shape(), (3, 3));
            assert_eq!(rank_eps(&h, 1e-8).rank, 3, "seed {seed}");
        }
        let real = generate_realization(ic(3, 1, 2), 9, true);
        let (h, _) = assemble_ic_system(&real, &IcOptions::default()).unwrap();
        assert_eq!(h.shape(), (3, 4));
        assert_eq!(rank_eps(&h, 1e-8).rank, 3);
    }

    #[test]
    fn row_matches_hand_evaluation() {
        let real = generate_realization(ic(3, 3, 1), 12, true);
        let (h, b) = assemble_ic_system(&real, &IcOptions::default()).unwrap();
        // Receiver 0 has reference 1 and single remaining interferer 2.
        let (k, i, l) = (0, 1, 2);
        for j in 0..3 {
            let expected = real.relay_to_rx(k, j, 1)[0]
                * (real.tx_to_relay(j, i, 0)[0] / real.direct(k, i, 0)
                    - real.tx_to_relay(j, l, 0)[0] / real.direct(k, l, 0));
            assert!((h[(0, j)] - expected).norm() < 1e-14);
        }
        let expected_b = real.direct(k, l, 1) / real.direct(k, l, 0) - real.direct(k, i, 1) / real.direct(k, i, 0);
        assert!((b[0] - expected_b).norm() < 1e-14);
    }

    #[test]
    fn degenerate_gain_reported() {
        let real = generate_realization(ic(3, 3, 1), 1, true).with_direct(0, 2, 0, Complex64::default());
        assert!(matches!(
            assemble_ic_system(&real, &IcOptions::default()),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn square_solve_is_exact() {
        let real = generate_realization(ic(3, 3, 1), 5, true);
        let pre = solve_ic_precoders(&real, &IcOptions::default()).unwrap();
        assert!(pre.residual <= 1e-10, "{}", pre.residual);
    }

    #[test]
    fn constant_square_gives_zero_precoders() {
        let real = generate_realization(ic(3, 3, 1), 5, false);
        let pre = solve_ic_precoders(&real, &IcOptions::default()).unwrap();
        assert!(pre.is_zero());
    }

    #[test]
    fn wide_system_residual() {
        let real = generate_realization(ic(4, 1, 3), 6, true);
        let pre = solve_ic_precoders(&real, &IcOptions::default()).unwrap();
        assert!(pre.residual <= 1e-8);
    }

    #[test]
    fn infeasible_and_empty_null_space() {
        let real = generate_realization(ic(3, 1, 1), 1, true);
        assert_eq!(
            solve_ic_precoders(&real, &IcOptions::default()),
            Err(Error::InfeasibleRelayCount { required: 3, available: 1 })
        );
        let square = generate_realization(ic(3, 3, 1), 1, true);
        let opts = IcOptions { precoding: IcPrecoding::NullSpace, ..Default::default() };
        assert_eq!(solve_ic_precoders(&square, &opts), Err(Error::EmptyNullSpace));
    }

    #[test]
    fn silent_relays_give_raw_channel() {
        let real = generate_realization(ic(3, 1, 2), 2, true);
        let pre = IcPrecoderSet { matrices: vec![ComplexMatrix::zeros(2, 2)], residual: 0.0, resamples_used: 0 };
        let eff = effective_channel_ic(&real, &pre, 1.0, &IcOptions::default()).unwrap();
        for k in 0..3 {
            let rx = eff.receiver(k);
            assert_eq!(rx.noise_covariance, ComplexMatrix::identity(2, 2));
            for i in 0..3 {
                assert_eq!(rx.gain[(0, i)], real.direct(k, i, 0));
                assert_eq!(rx.gain[(1, i)], real.direct(k, i, 1));
            }
        }
    }

    #[test]
    fn covariance_matches_closed_form() {
        let real = generate_realization(ic(3, 1, 2), 8, true);
        let pre = solve_ic_precoders(&real, &IcOptions::default()).unwrap();
        let eff = effective_channel_ic(&real, &pre, 1.0, &IcOptions::default()).unwrap();
        for k in 0..3 {
            let h = ComplexVector::from_column_slice(real.relay_to_rx(k, 0, 1));
            let expected = 1.0 + (pre.matrices[0].transpose() * h).norm_squared();
            let c = &eff.receiver(k).noise_covariance;
            assert!((c[(1, 1)].re - expected).abs() < 1e-12 * expected);
            assert_eq!(c[(0, 1)], Complex64::default());
            assert_eq!(c[(0, 0)], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn interference_collapses_to_one_dimension() {
        for (topo, seed) in [(ic(3, 1, 2), 10), (ic(3, 3, 1), 11)] {
            let real = generate_realization(topo, seed, true);
            let pre = solve_ic_precoders(&real, &IcOptions::default()).unwrap();
            let eff = effective_channel_ic(&real, &pre, 1.0, &IcOptions::default()).unwrap();
            for k in 0..3 {
                let interf = eff.interference_columns(k);
                assert_eq!(rank_eps(&eff.columns(k, &interf), 1e-6).rank, 1);
                assert_eq!(rank_eps(&eff.receiver(k).gain, 1e-6).rank, 2);
            }
        }
    }
}
