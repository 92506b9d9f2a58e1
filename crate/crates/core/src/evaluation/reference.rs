use num_rational::Ratio;

/// Closed-form DoF values the schemes are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofReference {
    /// `MN / (M + N - 1)` for the `M x N` X channel.
    XChannel { transmitters: u64, receivers: u64 },
    /// `K / 2` for the `K`-user interference channel.
    Interference { users: u64 },
    /// `K / H_K` for the `K`-user X channel whose `K`-antenna relay only has delayed CSI.
    DelayedCsiX { users: u64 },
}

/// `1 + 1/2 + ... + 1/k`.
pub fn harmonic_number(k: u64) -> Ratio<u64> {
    (1..=k).fold(Ratio::from_integer(0), |acc, i| acc + Ratio::new(1, i))
}

pub fn dof_reference(kind: DofReference) -> Ratio<u64> {
    match kind {
        DofReference::XChannel { transmitters: m, receivers: n } => Ratio::new(m * n, m + n - 1),
        DofReference::Interference { users } => Ratio::new(users, 2),
        DofReference::DelayedCsiX { users } => Ratio::from_integer(users) / harmonic_number(users),
    }
}
