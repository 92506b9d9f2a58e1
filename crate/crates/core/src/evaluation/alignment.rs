use serde::Serialize;

use crate::effective::EffectiveChannel;
use crate::linalg::rank_eps;

/// Looser than the solver threshold to absorb accumulated rounding.
pub const VERIFY_REL_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverAlignment {
    pub receiver: usize,
    pub interference_rank: usize,
    pub desired_rank: usize,
    pub total_rank: usize,
    pub desired_streams: usize,
    /// Smallest retained over largest discarded singular value of the
    /// interference columns; `None` when nothing was discarded.
    pub interference_margin: Option<f64>,
    pub total_margin: Option<f64>,
    pub pass: bool,
}

impl ReceiverAlignment {
    /// Desired streams are independent and disjoint from the interference span.
    pub fn decodable(&self) -> bool {
        self.desired_rank == self.desired_streams && self.desired_rank + self.interference_rank == self.total_rank
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub expected_interference_dim: usize,
    pub total_slots: usize,
    pub threshold: f64,
    pub receivers: Vec<ReceiverAlignment>,
}

impl AlignmentReport {
    pub fn pass(&self) -> bool {
        !self.receivers.is_empty() && self.receivers.iter().all(|r| r.pass)
    }
}

pub fn verify_alignment(eff: &EffectiveChannel, expected_interference_dim: usize) -> AlignmentReport {
    verify_alignment_with(eff, expected_interference_dim, VERIFY_REL_THRESHOLD)
}

pub fn verify_alignment_with(eff: &EffectiveChannel, expected_interference_dim: usize, rel_threshold: f64) -> AlignmentReport {
    let total_slots = eff.total_slots();
    let receivers = (0..eff.receivers().len())
        .map(|n| {
            let desired = eff.desired_columns(n);
            let interference = eff.interference_columns(n);
            let d = rank_eps(&eff.columns(n, &desired), rel_threshold);
            let i = rank_eps(&eff.columns(n, &interference), rel_threshold);
            let t = rank_eps(&eff.receiver(n).gain, rel_threshold);
            let pass = i.rank == expected_interference_dim
                && t.rank == total_slots
                && d.rank + i.rank == t.rank;
            ReceiverAlignment {
                receiver: n,
                interference_rank: i.rank,
                desired_rank: d.rank,
                total_rank: t.rank,
                desired_streams: desired.len(),
                interference_margin: i.margin(),
                total_margin: t.margin(),
                pass,
            }
        })
        .collect();
    AlignmentReport { expected_interference_dim, total_slots, threshold: rel_threshold, receivers }
}
