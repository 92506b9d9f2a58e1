//! Partial interference alignment for the `K`-user X channel with a single
//! relay of `K - 1` antennas.
//!
//! In listen slot `t` every transmitter `k` sends `d_{tk}`. The relay then
//! forms, for each receiver `i != t`, the combination `u_i(t)^T Y_R(t)`
//! whose coefficients on `d_{tk}` (`k != t`) equal receiver `i`'s own gains
//! `h_{ik}(t)`. In relay slot `t'` each combination is beamformed along
//! `v_{ti}(t')`, orthogonal to every receiver outside `{t, i}`, and scaled by
//! `alpha_{ti}(t')` so that `d_{tt}` lines up with the rest of block `t` at
//! receiver `i`. Transmitters resend `d_{kk}` in relay slots.
//!
//! All tables are keyed by `(slot, receiver)` with `slot != receiver`.

use num_complex::Complex64;

use crate::channel::{ChannelKind, ChannelRealization};
use crate::effective::{EffectiveChannel, LinearRelayPlan};
use crate::error::{Error, Result};
use crate::linalg::{
    canonical_phase, dot_t, least_norm_solve, null_space_basis, ComplexMatrix, ComplexVector,
};
use crate::x_alignment::x_streams;

/// Alignment denominators at or below this magnitude trigger a resample.
pub const DENOMINATOR_FLOOR: f64 = 1e-10;

/// Values indexed by ordered pairs `(slot, receiver)` of distinct users.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMap<T> {
    users: usize,
    entries: Vec<Option<T>>,
}

impl<T> PairMap<T> {
    fn build(users: usize, mut f: impl FnMut(usize, usize) -> Result<T>) -> Result<Self> {
        let mut entries = Vec::with_capacity(users * users);
        for slot in 0..users {
            for rx in 0..users {
                entries.push(if slot == rx { None } else { Some(f(slot, rx)?) });
            }
        }
        Ok(Self { users, entries })
    }

    /// Panics when `slot == receiver`.
    pub fn get(&self, slot: usize, receiver: usize) -> &T {
        self.entries[slot * self.users + receiver]
            .as_ref()
            .expect("pair tables have no diagonal")
    }

    pub fn len(&self) -> usize {
        self.users * (self.users - 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(idx, e)| e.as_ref().map(|v| ((idx / self.users, idx % self.users), v)))
    }
}

/// `u_i(t)`, keyed `(t, i)`.
pub type Transforms = PairMap<ComplexVector>;
/// `v_{ti}(t')` for each relay slot, keyed `(t, i)`.
pub type Beamformers = PairMap<Vec<ComplexVector>>;
/// `alpha_{ti}(t')` for each relay slot, keyed `(t, i)`.
pub type AlignmentScalars = PairMap<Vec<Complex64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct PartialIaPrecoderSet {
    pub transforms: Transforms,
    pub beamformers: Beamformers,
    pub alphas: AlignmentScalars,
    pub resamples_used: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialIaOptions {
    /// Transmitters resend `d_{kk}` in relay slots.
    pub joint_beamforming: bool,
}

impl Default for PartialIaOptions {
    fn default() -> Self {
        Self { joint_beamforming: true }
    }
}

fn users(real: &ChannelRealization) -> Result<usize> {
    let topo = real.topology();
    match topo.kind() {
        ChannelKind::X { transmitters, receivers }
            if transmitters == receivers
                && transmitters >= 3
                && topo.relays() == 1
                && topo.antennas() == transmitters - 1 =>
        {
            Ok(transmitters)
        }
        _ => Err(Error::TopologyMismatch {
            expected: "a K-user X channel (K >= 3) with one relay of K-1 antennas",
        }),
    }
}

/// Solves `u_i(t)^T h_{Rk}(t) = h_{ik}(t)` for all `k != t`.
pub fn solve_partial_transforms(real: &ChannelRealization) -> Result<Transforms> {
    let k_users = users(real)?;
    let dim = k_users - 1;
    // System matrix per slot: row a is h_{R k_a}(t)^T over the k != t.
    let systems: Vec<ComplexMatrix> = (0..k_users)
        .map(|t| {
            let others: Vec<usize> = (0..k_users).filter(|&k| k != t).collect();
            ComplexMatrix::from_fn(dim, dim, |a, p| real.tx_to_relay(0, others[a], t)[p])
        })
        .collect();
    PairMap::build(k_users, |t, i| {
        let rhs = ComplexVector::from_iterator(
            dim,
            (0..k_users).filter(|&k| k != t).map(|k| real.direct(i, k, t)),
        );
        least_norm_solve(&systems[t], &rhs)
    })
}

/// Unit-norm `v_{ti}(t')` orthogonal (bilinearly) to `h_{lR}(t')` for all
/// `l` outside `{t, i}`, with its largest entry rotated real positive.
pub fn solve_beamformers(real: &ChannelRealization) -> Result<Beamformers> {
    let k_users = users(real)?;
    let dim = k_users - 1;
    let listen = real.topology().listen_slots();
    let relay_slots = real.topology().relay_slots();
    PairMap::build(k_users, |t, i| {
        (0..relay_slots)
            .map(|r| {
                let tp = listen + r;
                let others: Vec<usize> = (0..k_users).filter(|&l| l != t && l != i).collect();
                let stacked = ComplexMatrix::from_fn(others.len(), dim, |a, p| {
                    real.relay_to_rx(others[a], 0, tp)[p]
                });
                let basis = null_space_basis(&stacked);
                if basis.len() != 1 {
                    return Err(Error::IllConditioned { smallest: 0.0, largest: 0.0 });
                }
                Ok(canonical_phase(basis.into_iter().next().unwrap()))
            })
            .collect()
    })
}

/// `alpha_{gm}(t') = h_{mg}(t') / ((h_{mg}(g) - u_m(g)^T h_{Rg}(g)) h_{mR}(t')^T v_{gm}(t'))`.
pub fn solve_alignment_scalars(
    real: &ChannelRealization,
    transforms: &Transforms,
    beamformers: &Beamformers,
    opts: &PartialIaOptions,
) -> Result<AlignmentScalars> {
    let k_users = users(real)?;
    let listen = real.topology().listen_slots();
    PairMap::build(k_users, |g, m| {
        let mu = dot_t(transforms.get(g, m).as_slice(), real.tx_to_relay(0, g, g));
        let gap = real.direct(m, g, g) - mu;
        beamformers
            .get(g, m)
            .iter()
            .enumerate()
            .map(|(r, v)| {
                let tp = listen + r;
                if !opts.joint_beamforming {
                    return Ok(Complex64::default());
                }
                let through = dot_t(real.relay_to_rx(m, 0, tp), v.as_slice());
                let denom = gap * through;
                if denom.norm() <= DENOMINATOR_FLOOR {
                    return Err(Error::DegenerateDenominator { magnitude: denom.norm() });
                }
                Ok(real.direct(m, g, tp) / denom)
            })
            .collect()
    })
}

pub fn solve_partial_precoders(
    real: &ChannelRealization,
    opts: &PartialIaOptions,
) -> Result<PartialIaPrecoderSet> {
    let transforms = solve_partial_transforms(real)?;
    let beamformers = solve_beamformers(real)?;
    let alphas = solve_alignment_scalars(real, &transforms, &beamformers, opts)?;
    Ok(PartialIaPrecoderSet { transforms, beamformers, alphas, resamples_used: 0 })
}

impl PartialIaPrecoderSet {
    /// The relay's per-slot linear map `W_t(t') = sum_i alpha_{ti} v_{ti} u_i(t)^T`.
    pub fn relay_map(&self, slot: usize, relay_slot_index: usize) -> ComplexMatrix {
        let k_users = self.transforms.users;
        let dim = k_users - 1;
        let mut w = ComplexMatrix::zeros(dim, dim);
        for i in (0..k_users).filter(|&i| i != slot) {
            let alpha = self.alphas.get(slot, i)[relay_slot_index];
            let v = &self.beamformers.get(slot, i)[relay_slot_index];
            let u = self.transforms.get(slot, i);
            w += (v * u.transpose()) * alpha;
        }
        w
    }
}

pub fn effective_channel_partial(
    real: &ChannelRealization,
    pre: &PartialIaPrecoderSet,
    power: f64,
    opts: &PartialIaOptions,
) -> Result<EffectiveChannel> {
    let k_users = users(real)?;
    let relay_slots = real.topology().relay_slots();
    let listen = (0..k_users).map(|s| (0..k_users).map(|m| Some(s * k_users + m)).collect()).collect();
    let relay_direct = (0..relay_slots)
        .map(|_| {
            (0..k_users)
                .map(|k| if opts.joint_beamforming { vec![k * k_users + k] } else { Vec::new() })
                .collect()
        })
        .collect();
    let relay_maps = vec![(0..k_users)
        .map(|s| (0..relay_slots).map(|r| pre.relay_map(s, r)).collect())
        .collect()];
    let plan = LinearRelayPlan {
        real,
        streams: x_streams(k_users, k_users),
        listen,
        relay_direct,
        relay_maps,
    };
    Ok(plan.build(power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_realization, NetworkTopology};
    use crate::linalg::rank_eps;

    fn k_user(k: usize) -> NetworkTopology {
        NetworkTopology::x_channel(k, k, 1, k - 1).unwrap()
    }

    #[test]
    fn transforms_satisfy_three_user_equations() {
        let real = generate_realization(k_user(3), 31, true);
        let u = solve_partial_transforms(&real).unwrap();
        // u_2(1) in one-based terms: slot 0, receiver 1.
        let u21 = u.get(0, 1);
        for k in [1usize, 2] {
            let lhs = dot_t(u21.as_slice(), real.tx_to_relay(0, k, 0));
            assert!((lhs - real.direct(1, k, 0)).norm() <= 1e-10);
        }
    }

    #[test]
    fn identity_relay_channel_reads_gains_directly() {
        let topo = k_user(3);
        let base = generate_realization(topo, 2, true);
        // h_{Rk}(t) = e_a where a is k's position among users != t.
        let real = ChannelRealization::from_fn(
            topo,
            true,
            |n, m, t| base.direct(n, m, t),
            |_, m, t, a| {
                let pos = (0..3).filter(|&k| k != t).position(|k| k == m);
                if pos == Some(a) { Complex64::new(1.0, 0.0) } else { Complex64::default() }
            },
            |n, j, t, a| base.relay_to_rx(n, j, t)[a],
        );
        let u = solve_partial_transforms(&real).unwrap();
        for ((t, i), v) in u.iter() {
            let expected: Vec<Complex64> = (0..3).filter(|&k| k != t).map(|k| real.direct(i, k, t)).collect();
            for (a, e) in expected.iter().enumerate() {
                assert!((v[a] - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn four_user_transform_count_and_residuals() {
        let real = generate_realization(k_user(4), 8, true);
        let u = solve_partial_transforms(&real).unwrap();
        assert_eq!(u.len(), 12);
        assert_eq!(u.iter().count(), 12);
        for ((t, i), v) in u.iter() {
            for k in (0..4).filter(|&k| k != t) {
                let lhs = dot_t(v.as_slice(), real.tx_to_relay(0, k, t));
                assert!((lhs - real.direct(i, k, t)).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn three_user_beamformers() {
        let real = generate_realization(k_user(3), 13, true);
        let v = solve_beamformers(&real).unwrap();
        for r in 0..2 {
            let tp = 3 + r;
            // v_{12} is orthogonal to receiver 3's relay channel.
            let v12 = &v.get(0, 1)[r];
            assert!(dot_t(real.relay_to_rx(2, 0, tp), v12.as_slice()).norm() <= 1e-12);
            assert!((v12.norm() - 1.0).abs() < 1e-12);
            // v_{31} and v_{13} coincide.
            assert!((&v.get(2, 0)[r] - &v.get(0, 2)[r]).norm() < 1e-14);
        }
    }

    #[test]
    fn four_user_beamformer_orthogonality() {
        let real = generate_realization(k_user(4), 21, true);
        let v = solve_beamformers(&real).unwrap();
        for ((t, i), per_slot) in v.iter() {
            for (r, vec) in per_slot.iter().enumerate() {
                for l in (0..4).filter(|&l| l != t && l != i) {
                    assert!(dot_t(real.relay_to_rx(l, 0, 4 + r), vec.as_slice()).norm() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn alpha_matches_closed_forms() {
        let real = generate_realization(k_user(3), 77, true);
        let u = solve_partial_transforms(&real).unwrap();
        let v = solve_beamformers(&real).unwrap();
        let a = solve_alignment_scalars(&real, &u, &v, &PartialIaOptions::default()).unwrap();
        for r in 0..2 {
            let tp = 3 + r;
            // alpha_{21}(t) = h_{12}(t) / ((h_{12}(2) - mu_1^{R2}(2)) h_{1R}^{perp 3}(t))
            let mu = dot_t(u.get(1, 0).as_slice(), real.tx_to_relay(0, 1, 1));
            let perp = dot_t(real.relay_to_rx(0, 0, tp), v.get(1, 0)[r].as_slice());
            let expected = real.direct(0, 1, tp) / ((real.direct(0, 1, 1) - mu) * perp);
            assert!((a.get(1, 0)[r] - expected).norm() < 1e-12 * expected.norm().max(1.0));
            // alpha_{31}(t) with v_2^perp
            let mu = dot_t(u.get(2, 0).as_slice(), real.tx_to_relay(0, 2, 2));
            let perp = dot_t(real.relay_to_rx(0, 0, tp), v.get(2, 0)[r].as_slice());
            let expected = real.direct(0, 2, tp) / ((real.direct(0, 2, 2) - mu) * perp);
            assert!((a.get(2, 0)[r] - expected).norm() < 1e-12 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn three_user_effective_channel_ranks() {
        let real = generate_realization(k_user(3), 55, true);
        let opts = PartialIaOptions::default();
        let pre = solve_partial_precoders(&real, &opts).unwrap();
        let eff = effective_channel_partial(&real, &pre, 1.0, &opts).unwrap();
        for m in 0..3 {
            assert_eq!(eff.receiver(m).gain[(m, m * 3 + m)], real.direct(m, m, m));
            for g in (0..3).filter(|&g| g != m) {
                let block: Vec<usize> = (0..3).map(|k| g * 3 + k).collect();
                assert_eq!(rank_eps(&eff.columns(m, &block), 1e-6).rank, 1, "rx {m} block {g}");
            }
            let interf = eff.interference_columns(m);
            assert_eq!(rank_eps(&eff.columns(m, &interf), 1e-6).rank, 2);
            let desired = eff.desired_columns(m);
            assert_eq!(rank_eps(&eff.columns(m, &desired), 1e-6).rank, 3);
            assert_eq!(rank_eps(&eff.receiver(m).gain, 1e-6).rank, 5);
        }
    }

    #[test]
    fn rejects_wrong_topology() {
        let real = generate_realization(NetworkTopology::x_channel(3, 3, 1, 1).unwrap(), 1, true);
        assert!(matches!(solve_partial_transforms(&real), Err(Error::TopologyMismatch { .. })));
    }
}
