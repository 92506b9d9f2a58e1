use crate::channel::{condition_guard, derive_seed, ChannelRealization, NetworkTopology, DEGENERACY_FLOOR, MAX_RESAMPLES};
use crate::effective::EffectiveChannel;
use crate::error::{Error, Result};
use crate::ic_alignment::{effective_channel_ic, solve_ic_precoders, IcOptions, IcPrecoderSet, IcPrecoding};
use crate::partial_ia::{effective_channel_partial, solve_partial_precoders, PartialIaOptions, PartialIaPrecoderSet};
use crate::x_alignment::{effective_channel_x, solve_x_precoders, XOptions, XPrecoderSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    XTheorem1,
    PartialIa,
    IcTheorem3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeOptions {
    pub time_varying: bool,
    pub joint_beamforming: bool,
    pub ic_precoding: IcPrecoding,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self { time_varying: true, joint_beamforming: true, ic_precoding: IcPrecoding::LeastNorm }
    }
}

impl SchemeOptions {
    fn x(&self) -> XOptions {
        XOptions { joint_beamforming: self.joint_beamforming }
    }

    fn partial(&self) -> PartialIaOptions {
        PartialIaOptions { joint_beamforming: self.joint_beamforming }
    }

    fn ic(&self) -> IcOptions {
        IcOptions { joint_beamforming: self.joint_beamforming, precoding: self.ic_precoding }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Precoders {
    X(XPrecoderSet),
    Partial(PartialIaPrecoderSet),
    Ic(IcPrecoderSet),
}

/// Interference dimension each scheme leaves at every receiver.
pub fn expected_interference_dim(topology: &NetworkTopology, scheme: Scheme) -> usize {
    match scheme {
        Scheme::XTheorem1 | Scheme::PartialIa => topology.receivers() - 1,
        Scheme::IcTheorem3 => 1,
    }
}

/// A solved trial: the realization that passed, its precoders, and how many
/// redraws it took.
#[derive(Debug, Clone)]
pub struct Trial {
    pub scheme: Scheme,
    pub options: SchemeOptions,
    pub realization: ChannelRealization,
    pub precoders: Precoders,
    pub resamples: u32,
}

impl Trial {
    pub fn effective_channel(&self, power: f64) -> Result<EffectiveChannel> {
        let real = &self.realization;
        match &self.precoders {
            Precoders::X(p) => effective_channel_x(real, p, power, &self.options.x()),
            Precoders::Partial(p) => effective_channel_partial(real, p, power, &self.options.partial()),
            Precoders::Ic(p) => effective_channel_ic(real, p, power, &self.options.ic()),
        }
    }
}

fn solve(real: &ChannelRealization, scheme: Scheme, opts: &SchemeOptions) -> Result<Precoders> {
    Ok(match scheme {
        Scheme::XTheorem1 => Precoders::X(solve_x_precoders(real, &opts.x())?),
        Scheme::PartialIa => Precoders::Partial(solve_partial_precoders(real, &opts.partial())?),
        Scheme::IcTheorem3 => Precoders::Ic(solve_ic_precoders(real, &opts.ic())?),
    })
}

/// Draws, guards and solves trial `trial` under `base_seed`, redrawing up
/// to [`MAX_RESAMPLES`] times on degenerate or ill-conditioned channels.
pub fn run_trial(
    topology: NetworkTopology,
    scheme: Scheme,
    opts: &SchemeOptions,
    base_seed: u64,
    trial: u64,
) -> Result<Trial> {
    let mut last = Error::IllConditioned { smallest: 0.0, largest: 0.0 };
    for attempt in 0..=MAX_RESAMPLES {
        let seed = derive_seed(base_seed, trial, attempt);
        let real = ChannelRealization::generate(topology, seed, opts.time_varying);
        if !condition_guard(&real, DEGENERACY_FLOOR) {
            last = Error::DegenerateDenominator { magnitude: 0.0 };
            continue;
        }
        match solve(&real, scheme, opts) {
            Ok(mut precoders) => {
                match &mut precoders {
                    Precoders::X(p) => p.resamples_used = attempt,
                    Precoders::Partial(p) => p.resamples_used = attempt,
                    Precoders::Ic(p) => p.resamples_used = attempt,
                }
                return Ok(Trial { scheme, options: *opts, realization: real, precoders, resamples: attempt });
            }
            Err(e) if e.is_resample_trigger() => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}
