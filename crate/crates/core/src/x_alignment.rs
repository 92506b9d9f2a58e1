//! Relay-aided alignment for the `M x N` X channel with `J` relays of `L`
//! antennas.
//!
//! Slots `0..N` carry `X_m(s) = d_{sm}` while the relays listen. In each
//! relay slot `t'` relay `i` sends `sum_s U_{is}(t') Y_{R_i}(s)` and, with
//! joint beamforming, transmitter 0 resends `sum_n d_{n0}`. For every pair
//! (source slot `g`, relay slot `t'`) the matrices `U_{ig}(t')` solve one
//! linear system that makes the streams `d_{gk}` collinear at every
//! receiver `n != g`, so interference occupies `N - 1` dimensions.
//!
//! Multi-indices follow a leftmost-outermost nesting: system rows run over
//! `(n, k)` with `n != g`, `k != 0`, and unknowns over `(i, p, q)` with
//! `u[i L^2 + p L + q] = U_i[p][q]`.

use crate::channel::{ChannelKind, ChannelRealization};
use crate::effective::{EffectiveChannel, LinearRelayPlan, StreamLabel};
use crate::error::{Error, Result};
use crate::linalg::{least_norm_solve, ComplexMatrix, ComplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XOptions {
    /// Transmitter 0 resends its streams in relay slots.
    pub joint_beamforming: bool,
}

impl Default for XOptions {
    fn default() -> Self {
        Self { joint_beamforming: true }
    }
}

/// `ceil((M-1)(N-1) / L^2)`.
pub fn required_relays_x(transmitters: usize, receivers: usize, antennas: usize) -> usize {
    ((transmitters - 1) * (receivers - 1)).div_ceil(antennas * antennas)
}

#[derive(Debug, Clone, PartialEq)]
pub struct XPrecoderSet {
    /// `[relay][source slot][relay slot index]`, each `L x L`.
    maps: Vec<Vec<Vec<ComplexMatrix>>>,
    /// Largest `||H u - b|| / (1 + ||b||)` over all systems.
    pub max_residual: f64,
    pub resamples_used: u32,
}

impl XPrecoderSet {
    /// `U_{relay, source_slot}` used in absolute slot `relay_slot`.
    pub fn matrix(&self, relay: usize, source_slot: usize, relay_slot: usize) -> &ComplexMatrix {
        let listen = self.maps[0].len();
        &self.maps[relay][source_slot][relay_slot - listen]
    }

    pub fn is_zero(&self) -> bool {
        self.maps.iter().flatten().flatten().all(|m| m.iter().all(|z| z.norm() == 0.0))
    }

    pub(crate) fn maps(&self) -> &Vec<Vec<Vec<ComplexMatrix>>> {
        &self.maps
    }
}

fn x_dims(real: &ChannelRealization) -> Result<(usize, usize)> {
    match real.topology().kind() {
        ChannelKind::X { transmitters, receivers } => Ok((transmitters, receivers)),
        ChannelKind::Interference { .. } => Err(Error::TopologyMismatch { expected: "an X channel" }),
    }
}

/// Alignment system `H(g, t') u = b(g, t')` for source slot `source_slot`
/// and absolute relay slot `relay_slot`.
pub fn assemble_x_system(
    real: &ChannelRealization,
    source_slot: usize,
    relay_slot: usize,
    opts: &XOptions,
) -> Result<(ComplexMatrix, ComplexVector)> {
    let (n_tx, n_rx) = x_dims(real)?;
    let topo = real.topology();
    if source_slot >= n_rx || relay_slot < n_rx || relay_slot >= topo.total_slots() {
        return Err(Error::InvalidTopology(format!(
            "slot pair ({source_slot}, {relay_slot}) outside the X schedule"
        )));
    }
    let (g, tp) = (source_slot, relay_slot);
    let j_count = topo.relays();
    let l = topo.antennas();
    let rows = (n_tx - 1) * (n_rx - 1);
    let cols = j_count * l * l;
    let mut h = ComplexMatrix::zeros(rows, cols);
    let mut b = ComplexVector::zeros(rows);

    let mut row = 0;
    for n in (0..n_rx).filter(|&n| n != g) {
        let h_n0_g = real.direct(n, 0, g);
        for k in 1..n_tx {
            let h_nk_g = real.direct(n, k, g);
            for i in 0..j_count {
                let down = real.relay_to_rx(n, i, tp);
                let up_k = real.tx_to_relay(i, k, g);
                let up_0 = real.tx_to_relay(i, 0, g);
                for p in 0..l {
                    for q in 0..l {
                        h[(row, (i * l + p) * l + q)] = down[p] * (h_n0_g * up_k[q] - h_nk_g * up_0[q]);
                    }
                }
            }
            if opts.joint_beamforming {
                b[row] = h_nk_g * real.direct(n, 0, tp);
            }
            row += 1;
        }
    }
    Ok((h, b))
}

/// Least-norm relay precoders for every (source slot, relay slot) pair.
pub fn solve_x_precoders(real: &ChannelRealization, opts: &XOptions) -> Result<XPrecoderSet> {
    let (n_tx, n_rx) = x_dims(real)?;
    let topo = real.topology();
    let l = topo.antennas();
    let required = required_relays_x(n_tx, n_rx, l);
    if topo.relays() < required {
        return Err(Error::InfeasibleRelayCount { required, available: topo.relays() });
    }

    let mut maps = vec![vec![Vec::with_capacity(topo.relay_slots()); n_rx]; topo.relays()];
    let mut max_residual = 0.0f64;
    for g in 0..n_rx {
        for tp in n_rx..topo.total_slots() {
            let (h, b) = assemble_x_system(real, g, tp, opts)?;
            let u = least_norm_solve(&h, &b)?;
            max_residual = max_residual.max((&h * &u - &b).norm() / (1.0 + b.norm()));
            for (i, relay) in maps.iter_mut().enumerate() {
                let block = u.rows(i * l * l, l * l);
                relay[g].push(ComplexMatrix::from_fn(l, l, |p, q| block[p * l + q]));
            }
        }
    }
    Ok(XPrecoderSet { maps, max_residual, resamples_used: 0 })
}

/// Stream labels in column order: `d_{gm}` with `g` outermost.
pub fn x_streams(transmitters: usize, receivers: usize) -> Vec<StreamLabel> {
    (0..receivers)
        .flat_map(|g| (0..transmitters).map(move |m| StreamLabel { receiver: g, transmitter: m }))
        .collect()
}

pub fn effective_channel_x(
    real: &ChannelRealization,
    pre: &XPrecoderSet,
    power: f64,
    opts: &XOptions,
) -> Result<EffectiveChannel> {
    let (n_tx, n_rx) = x_dims(real)?;
    let topo = real.topology();
    let listen = (0..n_rx).map(|s| (0..n_tx).map(|m| Some(s * n_tx + m)).collect()).collect();
    let relay_direct = (0..topo.relay_slots())
        .map(|_| {
            let mut sent = vec![Vec::new(); n_tx];
            if opts.joint_beamforming {
                sent[0] = (0..n_rx).map(|n| n * n_tx).collect();
            }
            sent
        })
        .collect();
    let plan = LinearRelayPlan {
        real,
        streams: x_streams(n_tx, n_rx),
        listen,
        relay_direct,
        relay_maps: pre.maps().clone(),
    };
    Ok(plan.build(power))
}
