//! Network topologies and seeded, time-indexed channel realizations.
//!
//! Slots are indexed from zero. For an `M x N` X channel the first `N` slots
//! are listen slots (relays silent) and the remaining `M - 1` are relay slots.
//! The interference channel uses one listen slot and one relay slot.
//!
//! Every coefficient is drawn i.i.d. circularly-symmetric complex Gaussian
//! with unit variance, from a ChaCha stream keyed by the realization seed.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are treated as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// Resamples allowed per trial before it is skipped.
pub const MAX_RESAMPLES: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// Every transmitter has a message for every receiver.
    X { transmitters: usize, receivers: usize },
    /// `users` transmitter-receiver pairs, one message each.
    Interference { users: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkTopology {
    kind: ChannelKind,
    relays: usize,
    antennas: usize,
}

impl NetworkTopology {
    pub fn x_channel(transmitters: usize, receivers: usize, relays: usize, antennas: usize) -> Result<Self> {
        if transmitters < 2 || receivers < 2 {
            return Err(Error::InvalidTopology(format!(
                "X channel needs M >= 2 and N >= 2, got M={transmitters}, N={receivers}"
            )));
        }
        Self::with_relays(ChannelKind::X { transmitters, receivers }, relays, antennas)
    }

    pub fn interference(users: usize, relays: usize, antennas: usize) -> Result<Self> {
        if users < 3 {
            return Err(Error::InvalidTopology(format!(
                "interference channel needs K >= 3, got K={users}"
            )));
        }
        Self::with_relays(ChannelKind::Interference { users }, relays, antennas)
    }

    fn with_relays(kind: ChannelKind, relays: usize, antennas: usize) -> Result<Self> {
        if relays == 0 || antennas == 0 {
            return Err(Error::InvalidTopology(format!(
                "need at least one relay with at least one antenna, got J={relays}, L={antennas}"
            )));
        }
        Ok(Self { kind, relays, antennas })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn relays(&self) -> usize {
        self.relays
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn transmitters(&self) -> usize {
        match self.kind {
            ChannelKind::X { transmitters, .. } => transmitters,
            ChannelKind::Interference { users } => users,
        }
    }

    pub fn receivers(&self) -> usize {
        match self.kind {
            ChannelKind::X { receivers, .. } => receivers,
            ChannelKind::Interference { users } => users,
        }
    }

    pub fn listen_slots(&self) -> usize {
        match self.kind {
            ChannelKind::X { receivers, .. } => receivers,
            ChannelKind::Interference { .. } => 1,
        }
    }

    pub fn relay_slots(&self) -> usize {
        match self.kind {
            ChannelKind::X { transmitters, .. } => transmitters - 1,
            ChannelKind::Interference { .. } => 1,
        }
    }

    pub fn total_slots(&self) -> usize {
        self.listen_slots() + self.relay_slots()
    }

    pub fn is_x_channel(&self) -> bool {
        matches!(self.kind, ChannelKind::X { .. })
    }
}

/// All channel coefficients for one Monte Carlo draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    topology: NetworkTopology,
    seed: u64,
    time_varying: bool,
    // [n][m][t]
    direct: Vec<Complex64>,
    // [j][m][t][l]
    tx_to_relay: Vec<Complex64>,
    // [n][j][t][l]
    relay_to_rx: Vec<Complex64>,
}

impl ChannelRealization {
    /// Draws a realization from the stream keyed by `seed`.
    ///
    /// With `time_varying == false` only slot 0 is drawn and then replicated.
    pub fn generate(topology: NetworkTopology, seed: u64, time_varying: bool) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut draw = move || {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        };

        let (n_rx, n_tx, n_relays, l) = dims(&topology);
        let slots = topology.total_slots();
        let drawn_slots = if time_varying { slots } else { 1 };

        // Slot-major draw order so a constant channel consumes the same
        // prefix of the stream as slot 0 of a time-varying one.
        let mut direct = vec![Complex64::default(); n_rx * n_tx * slots];
        let mut tx_to_relay = vec![Complex64::default(); n_relays * n_tx * slots * l];
        let mut relay_to_rx = vec![Complex64::default(); n_rx * n_relays * slots * l];
        for t in 0..drawn_slots {
            for n in 0..n_rx {
                for m in 0..n_tx {
                    direct[(n * n_tx + m) * slots + t] = draw();
                }
            }
            for j in 0..n_relays {
                for m in 0..n_tx {
                    for a in 0..l {
                        tx_to_relay[((j * n_tx + m) * slots + t) * l + a] = draw();
                    }
                }
            }
            for n in 0..n_rx {
                for j in 0..n_relays {
                    for a in 0..l {
                        relay_to_rx[((n * n_relays + j) * slots + t) * l + a] = draw();
                    }
                }
            }
        }
        let mut real = Self { topology, seed, time_varying, direct, tx_to_relay, relay_to_rx };
        if !time_varying {
            real.replicate_slot_zero();
        }
        real
    }

    /// Builds a realization from closures over `(n, m, t)`, `(j, m, t, l)` and
    /// `(n, j, t, l)`. Used to set up hand-written channels.
    pub fn from_fn(
        topology: NetworkTopology,
        time_varying: bool,
        mut direct: impl FnMut(usize, usize, usize) -> Complex64,
        mut tx_to_relay: impl FnMut(usize, usize, usize, usize) -> Complex64,
        mut relay_to_rx: impl FnMut(usize, usize, usize, usize) -> Complex64,
    ) -> Self {
        let (n_rx, n_tx, n_relays, l) = dims(&topology);
        let slots = topology.total_slots();
        let mut d = Vec::with_capacity(n_rx * n_tx * slots);
        for n in 0..n_rx {
            for m in 0..n_tx {
                for t in 0..slots {
                    d.push(direct(n, m, t));
                }
            }
        }
        let mut up = Vec::with_capacity(n_relays * n_tx * slots * l);
        for j in 0..n_relays {
            for m in 0..n_tx {
                for t in 0..slots {
                    for a in 0..l {
                        up.push(tx_to_relay(j, m, t, a));
                    }
                }
            }
        }
        let mut down = Vec::with_capacity(n_rx * n_relays * slots * l);
        for n in 0..n_rx {
            for j in 0..n_relays {
                for t in 0..slots {
                    for a in 0..l {
                        down.push(relay_to_rx(n, j, t, a));
                    }
                }
            }
        }
        Self { topology, seed: 0, time_varying, direct: d, tx_to_relay: up, relay_to_rx: down }
    }

    fn replicate_slot_zero(&mut self) {
        let slots = self.topology.total_slots();
        let l = self.topology.antennas;
        for chunk in self.direct.chunks_mut(slots) {
            let first = chunk[0];
            chunk.fill(first);
        }
        for buf in [&mut self.tx_to_relay, &mut self.relay_to_rx] {
            for chunk in buf.chunks_mut(slots * l) {
                let (first, rest) = chunk.split_at_mut(l);
                for slot in rest.chunks_mut(l) {
                    slot.copy_from_slice(first);
                }
            }
        }
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn time_varying(&self) -> bool {
        self.time_varying
    }

    /// Gain `h_{nm}(t)` from transmitter `m` to receiver `n`.
    #[inline]
    pub fn direct(&self, n: usize, m: usize, t: usize) -> Complex64 {
        let slots = self.topology.total_slots();
        let n_tx = self.topology.transmitters();
        self.direct[(n * n_tx + m) * slots + t]
    }

    /// Vector `h_{R_j m}(t)` from transmitter `m` to relay `j`.
    #[inline]
    pub fn tx_to_relay(&self, j: usize, m: usize, t: usize) -> &[Complex64] {
        let slots = self.topology.total_slots();
        let n_tx = self.topology.transmitters();
        let l = self.topology.antennas;
        let start = ((j * n_tx + m) * slots + t) * l;
        &self.tx_to_relay[start..start + l]
    }

    /// Vector `h_{n R_j}(t)` from relay `j` to receiver `n`.
    #[inline]
    pub fn relay_to_rx(&self, n: usize, j: usize, t: usize) -> &[Complex64] {
        let slots = self.topology.total_slots();
        let l = self.topology.antennas;
        let start = ((n * self.topology.relays + j) * slots + t) * l;
        &self.relay_to_rx[start..start + l]
    }

    /// Copy of `self` with one direct gain replaced.
    pub fn with_direct(mut self, n: usize, m: usize, t: usize, value: Complex64) -> Self {
        let slots = self.topology.total_slots();
        let n_tx = self.topology.transmitters();
        self.direct[(n * n_tx + m) * slots + t] = value;
        self
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &Complex64> {
        self.direct.iter().chain(&self.tx_to_relay).chain(&self.relay_to_rx)
    }

    pub fn direct_coefficients(&self) -> &[Complex64] {
        &self.direct
    }
}

fn dims(t: &NetworkTopology) -> (usize, usize, usize, usize) {
    (t.receivers(), t.transmitters(), t.relays, t.antennas)
}

/// Convenience wrapper over [`ChannelRealization::generate`].
pub fn generate_realization(topology: NetworkTopology, seed: u64, time_varying: bool) -> ChannelRealization {
    ChannelRealization::generate(topology, seed, time_varying)
}

/// Returns false when any coefficient magnitude is below `threshold`.
///
/// Only raw coincidences are caught here; rank checks on assembled systems
/// belong to the schemes.
pub fn condition_guard(real: &ChannelRealization, threshold: f64) -> bool {
    real.coefficients().all(|c| c.is_finite() && c.norm() >= threshold)
}

/// Seed for resample `attempt` of trial `trial` under `base`.
///
/// SplitMix64 finalizer over the mixed inputs; trials are independent of
/// the order they run in.
pub fn derive_seed(base: u64, trial: u64, attempt: u32) -> u64 {
    let mut z = base
        .wrapping_add(trial.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(u64::from(attempt).wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(m: usize, n: usize, j: usize, l: usize) -> NetworkTopology {
        NetworkTopology::x_channel(m, n, j, l).unwrap()
    }

    #[test]
    fn topology_slot_counts() {
        let t = x(3, 4, 1, 2);
        assert_eq!(t.listen_slots(), 4);
        assert_eq!(t.relay_slots(), 2);
        assert_eq!(t.total_slots(), 3 + 4 - 1);
        let ic = NetworkTopology::interference(5, 2, 3).unwrap();
        assert_eq!(ic.total_slots(), 2);
        assert_eq!(ic.transmitters(), 5);
    }

    #[test]
    fn topology_rejects_invalid() {
        assert!(NetworkTopology::x_channel(1, 3, 1, 1).is_err());
        assert!(NetworkTopology::x_channel(2, 1, 1, 1).is_err());
        assert!(NetworkTopology::interference(2, 1, 1).is_err());
        assert!(NetworkTopology::interference(3, 0, 1).is_err());
        assert!(NetworkTopology::interference(3, 1, 0).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_realization(x(3, 3, 1, 2), 7, true);
        let b = generate_realization(x(3, 3, 1, 2), 7, true);
        assert_eq!(a, b);
        let c = generate_realization(x(3, 3, 1, 2), 8, true);
        assert_ne!(a, c);
    }

    #[test]
    fn constant_channel_replicates_slot_zero() {
        let topo = x(2, 2, 1, 1);
        let r = generate_realization(topo, 7, false);
        for n in 0..2 {
            for m in 0..2 {
                for t in 1..topo.total_slots() {
                    assert_eq!(r.direct(n, m, t), r.direct(n, m, 0));
                    assert_eq!(r.tx_to_relay(0, m, t), r.tx_to_relay(0, m, 0));
                    assert_eq!(r.relay_to_rx(n, 0, t), r.relay_to_rx(n, 0, 0));
                }
            }
        }
        // Slot 0 matches the time-varying draw with the same seed for the direct block.
        let tv = generate_realization(topo, 7, true);
        assert_eq!(r.direct(0, 0, 0), tv.direct(0, 0, 0));
    }

    #[test]
    fn time_varying_slots_differ() {
        let topo = x(3, 3, 2, 2);
        let r = generate_realization(topo, 3, true);
        for n in 0..3 {
            for m in 0..3 {
                for t in 1..topo.total_slots() {
                    assert_ne!(r.direct(n, m, t), r.direct(n, m, t - 1));
                }
            }
        }
    }

    #[test]
    fn unit_power_interference_topology() {
        // Pooled sample mean of |h|^2 over the direct entries of many draws.
        let topo = NetworkTopology::interference(3, 3, 1).unwrap();
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut seed = 11u64;
        while count < 20_000 {
            let r = generate_realization(topo, seed, true);
            for c in r.direct_coefficients() {
                sum += c.norm_sqr();
                count += 1;
            }
            seed += 1;
        }
        let mean = sum / count as f64;
        assert!((0.9..=1.1).contains(&mean), "mean power {mean}");
    }

    #[test]
    fn guard_flags_zero_gain() {
        let r = generate_realization(x(3, 3, 1, 2), 1, true).with_direct(0, 0, 0, Complex64::default());
        assert!(!condition_guard(&r, DEGENERACY_FLOOR));
    }

    #[test]
    fn guard_accepts_generic_draws() {
        for seed in 0..100 {
            let r = generate_realization(x(3, 3, 1, 2), seed, true);
            assert!(condition_guard(&r, DEGENERACY_FLOOR), "seed {seed}");
        }
    }

    #[test]
    fn guard_checks_magnitude_only() {
        let topo = x(3, 3, 1, 2);
        let one = Complex64::new(1.0, 0.0);
        let r = ChannelRealization::from_fn(topo, true, |_, _, _| one, |_, _, _, _| one, |_, _, _, _| one);
        assert!(condition_guard(&r, DEGENERACY_FLOOR));
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for trial in 0..200 {
            for attempt in 0..=MAX_RESAMPLES {
                assert!(seen.insert(derive_seed(42, trial, attempt)));
            }
        }
    }
}
