//! Effective channels: what each receiver sees after stacking every slot.
//!
//! All three schemes in this crate are linear at the relays. A relay `j`
//! maps its slot-`s` observation through an `L x L` matrix `W_{j,s}(r)` and
//! sums the results in relay slot `r`; transmitters may also resend a sum
//! of their streams in relay slots. [`LinearRelayPlan`] captures that shape
//! once so the stacked gain matrix and forwarded-noise covariance are built
//! by a single routine.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::{dot_t, ComplexMatrix};

/// Stream `d_{receiver, transmitter}`: sent by `transmitter`, intended for `receiver`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct StreamLabel {
    pub receiver: usize,
    pub transmitter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverChannel {
    /// `total_slots x streams`.
    pub gain: ComplexMatrix,
    /// Hermitian positive definite, `total_slots x total_slots`.
    pub noise_covariance: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    streams: Vec<StreamLabel>,
    receivers: Vec<ReceiverChannel>,
    total_slots: usize,
}

impl EffectiveChannel {
    pub fn new(streams: Vec<StreamLabel>, receivers: Vec<ReceiverChannel>) -> Result<Self> {
        let total_slots = receivers.first().map_or(0, |r| r.gain.nrows());
        for r in &receivers {
            if r.gain.nrows() != total_slots {
                return Err(Error::DimensionMismatch { expected: total_slots, found: r.gain.nrows() });
            }
            if r.gain.ncols() != streams.len() {
                return Err(Error::DimensionMismatch { expected: streams.len(), found: r.gain.ncols() });
            }
            let c = &r.noise_covariance;
            if c.nrows() != total_slots || c.ncols() != total_slots {
                return Err(Error::DimensionMismatch { expected: total_slots, found: c.nrows() });
            }
        }
        Ok(Self { streams, receivers, total_slots })
    }

    pub fn streams(&self) -> &[StreamLabel] {
        &self.streams
    }

    pub fn receivers(&self) -> &[ReceiverChannel] {
        &self.receivers
    }

    pub fn receiver(&self, n: usize) -> &ReceiverChannel {
        &self.receivers[n]
    }

    pub fn total_slots(&self) -> usize {
        self.total_slots
    }

    pub fn desired_columns(&self, n: usize) -> Vec<usize> {
        (0..self.streams.len()).filter(|&c| self.streams[c].receiver == n).collect()
    }

    pub fn interference_columns(&self, n: usize) -> Vec<usize> {
        (0..self.streams.len()).filter(|&c| self.streams[c].receiver != n).collect()
    }

    /// Columns of `G_n` at `cols`, in order.
    pub fn columns(&self, n: usize, cols: &[usize]) -> ComplexMatrix {
        self.receivers[n].gain.select_columns(cols)
    }
}

/// One linear relaying scheme over a realization.
pub(crate) struct LinearRelayPlan<'a> {
    pub real: &'a ChannelRealization,
    pub streams: Vec<StreamLabel>,
    /// `listen[s][m]`: stream index sent by transmitter `m` in listen slot `s`.
    pub listen: Vec<Vec<Option<usize>>>,
    /// `relay_direct[r][m]`: stream indices transmitter `m` superposes in relay slot `r`.
    pub relay_direct: Vec<Vec<Vec<usize>>>,
    /// `relay_maps[j][s][r]`: matrix relay `j` applies to listen slot `s` for relay slot `r`.
    pub relay_maps: Vec<Vec<Vec<ComplexMatrix>>>,
}

impl LinearRelayPlan<'_> {
    pub fn build(&self, power: f64) -> EffectiveChannel {
        let topo = self.real.topology();
        let listen_slots = topo.listen_slots();
        let relay_slots = topo.relay_slots();
        let total = listen_slots + relay_slots;
        let n_streams = self.streams.len();
        let amp = Complex64::new(power.sqrt(), 0.0);

        let receivers = (0..topo.receivers())
            .map(|n| {
                let mut gain = ComplexMatrix::zeros(total, n_streams);
                let mut cov = ComplexMatrix::identity(total, total);

                for (s, senders) in self.listen.iter().enumerate() {
                    for (m, stream) in senders.iter().enumerate() {
                        if let Some(c) = *stream {
                            gain[(s, c)] += self.real.direct(n, m, s);
                        }
                    }
                }

                // forwarded[r][j][s]: row vector h_{nR_j}(t)^T W_{j,s}(r)
                let mut forwarded = Vec::with_capacity(relay_slots);
                for r in 0..relay_slots {
                    let t = listen_slots + r;
                    let row = t;
                    for (m, sent) in self.relay_direct[r].iter().enumerate() {
                        for &c in sent {
                            gain[(row, c)] += self.real.direct(n, m, t);
                        }
                    }
                    let mut per_relay = Vec::with_capacity(self.relay_maps.len());
                    for (j, maps) in self.relay_maps.iter().enumerate() {
                        let h_down = self.real.relay_to_rx(n, j, t);
                        let mut per_slot = Vec::with_capacity(listen_slots);
                        for (s, by_relay_slot) in maps.iter().enumerate() {
                            let w = &by_relay_slot[r];
                            let a: Vec<Complex64> = (0..w.ncols())
                                .map(|q| (0..w.nrows()).map(|p| h_down[p] * w[(p, q)]).sum())
                                .collect();
                            for (m, stream) in self.listen[s].iter().enumerate() {
                                if let Some(c) = *stream {
                                    gain[(row, c)] += dot_t(&a, self.real.tx_to_relay(j, m, s));
                                }
                            }
                            per_slot.push(a);
                        }
                        per_relay.push(per_slot);
                    }
                    forwarded.push(per_relay);
                }

                for r1 in 0..relay_slots {
                    for r2 in 0..relay_slots {
                        let mut acc = Complex64::default();
                        for (f1, f2) in forwarded[r1].iter().zip(&forwarded[r2]) {
                            for (a1, a2) in f1.iter().zip(f2) {
                                acc += a1.iter().zip(a2).map(|(x, y)| x * y.conj()).sum::<Complex64>();
                            }
                        }
                        cov[(listen_slots + r1, listen_slots + r2)] += acc;
                    }
                }

                gain *= amp;
                ReceiverChannel { gain, noise_covariance: cov }
            })
            .collect();

        EffectiveChannel { streams: self.streams.clone(), receivers, total_slots: total }
    }
}
