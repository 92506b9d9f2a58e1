use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_ia::effective::ReceiverChannel;
use relay_ia::ic_alignment::IcPrecoderSet;
use relay_ia::linalg::rank_eps;
use relay_ia::prelude::*;

fn solved_x(m: usize, n: usize, j: usize, l: usize, seed: u64, power: f64) -> EffectiveChannel {
    let real = generate_realization(NetworkTopology::x_channel(m, n, j, l).unwrap(), seed, true);
    let opts = XOptions::default();
    let pre = solve_x_precoders(&real, &opts).unwrap();
    effective_channel_x(&real, &pre, power, &opts).unwrap()
}

#[test]
fn x_effective_channel_reaches_target_dimensions() {
    let eff = solved_x(3, 3, 1, 2, 7, 1.0);
    let report = verify_alignment(&eff, 2);
    assert!(report.pass());
    for rx in &report.receivers {
        assert_eq!((rx.interference_rank, rx.desired_rank, rx.total_rank), (2, 3, 5));
    }
}

#[test]
fn silent_transmitter_kills_the_square_x_solution() {
    let topo = NetworkTopology::x_channel(3, 3, 1, 2).unwrap();
    let opts = XOptions { joint_beamforming: false };
    for seed in 0..20 {
        let real = generate_realization(topo, seed, true);
        let pre = solve_x_precoders(&real, &opts).unwrap();
        assert!(pre.is_zero());
        let eff = effective_channel_x(&real, &pre, 1.0, &opts).unwrap();
        assert!(!verify_alignment(&eff, 2).pass());
    }
}

#[test]
fn constant_channel_collapses_desired_space_in_square_x() {
    let topo = NetworkTopology::x_channel(3, 3, 1, 2).unwrap();
    let opts = XOptions::default();
    for seed in 0..20 {
        let real = generate_realization(topo, seed, false);
        let pre = solve_x_precoders(&real, &opts).unwrap();
        let eff = effective_channel_x(&real, &pre, 1.0, &opts).unwrap();
        let report = verify_alignment(&eff, 2);
        assert!(report.receivers.iter().all(|r| r.desired_rank <= 2), "seed {seed}");
        assert!(!report.pass());
    }
}

#[test]
fn ic_square_case_needs_time_variation_and_joint_beamforming() {
    let topo = NetworkTopology::interference(3, 3, 1).unwrap();
    let cases = [
        (false, IcOptions::default()),
        (true, IcOptions { joint_beamforming: false, ..IcOptions::default() }),
    ];
    for (time_varying, opts) in cases {
        for seed in 0..20 {
            let real = generate_realization(topo, seed, time_varying);
            let pre = solve_ic_precoders(&real, &opts).unwrap();
            assert!(pre.is_zero());
            let eff = effective_channel_ic(&real, &pre, 1.0, &opts).unwrap();
            assert!(!verify_alignment(&eff, 1).pass());
        }
    }
}

#[test]
fn ic_null_space_mode_aligns_constant_channels() {
    let opts = IcOptions { precoding: IcPrecoding::NullSpace, ..IcOptions::default() };
    for (k, l) in [(3, 2), (4, 3)] {
        let topo = NetworkTopology::interference(k, 1, l).unwrap();
        for seed in 0..50 {
            let real = generate_realization(topo, seed, false);
            let pre = solve_ic_precoders(&real, &opts).unwrap();
            let eff = effective_channel_ic(&real, &pre, 1.0, &opts).unwrap();
            assert!(verify_alignment(&eff, 1).pass(), "K={k} seed {seed}");
        }
    }
}

#[test]
fn random_relay_matrices_do_not_align() {
    let topo = NetworkTopology::interference(3, 3, 1).unwrap();
    let opts = IcOptions::default();
    let mut failures = 0;
    for seed in 0..200 {
        let real = generate_realization(topo, seed, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrices = (0..3)
            .map(|_| DMatrix::from_fn(1, 1, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
            .collect();
        let pre = IcPrecoderSet { matrices, residual: f64::NAN, resamples_used: 0 };
        let eff = effective_channel_ic(&real, &pre, 1.0, &opts).unwrap();
        let report = verify_alignment(&eff, 1);
        if !report.pass() {
            failures += 1;
            assert!(report.receivers.iter().all(|r| r.interference_rank == 2));
        }
    }
    assert!(failures >= 198, "{failures}");
}

#[test]
fn verification_ignores_column_phase_and_scale() {
    let eff = solved_x(3, 3, 1, 2, 11, 1.0);
    let base = verify_alignment(&eff, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let receivers = eff
        .receivers()
        .iter()
        .map(|rx| {
            let mut gain = rx.gain.clone();
            for mut col in gain.column_iter_mut() {
                let phase = Complex64::from_polar(rng.random_range(0.1..10.0), rng.random_range(0.0..std::f64::consts::TAU));
                col *= phase;
            }
            ReceiverChannel { gain, noise_covariance: rx.noise_covariance.clone() }
        })
        .collect();
    let scaled = EffectiveChannel::new(eff.streams().to_vec(), receivers).unwrap();
    let again = verify_alignment(&scaled, 2);
    for (a, b) in base.receivers.iter().zip(&again.receivers) {
        assert_eq!((a.interference_rank, a.desired_rank, a.total_rank), (b.interference_rank, b.desired_rank, b.total_rank));
    }
}

#[test]
fn zf_rates_are_invariant_under_a_shared_unitary() {
    let eff = solved_x(3, 3, 1, 2, 4, 1e4);
    let report = verify_alignment(&eff, 2);
    let rates = zf_rates(&eff, &report).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let slots = eff.total_slots();
    let q = DMatrix::from_fn(slots, slots, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .qr()
        .q();
    let receivers = eff
        .receivers()
        .iter()
        .map(|rx| ReceiverChannel {
            gain: &q * &rx.gain,
            noise_covariance: &q * &rx.noise_covariance * q.adjoint(),
        })
        .collect();
    let rotated = EffectiveChannel::new(eff.streams().to_vec(), receivers).unwrap();
    let rotated_rates = zf_rates(&rotated, &verify_alignment(&rotated, 2)).unwrap();
    for (a, b) in rates.iter().flatten().zip(rotated_rates.iter().flatten()) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn zf_sum_rate_grows_by_the_stream_count_per_log2_power() {
    let mut gap = 0.0;
    let seeds = 40;
    for seed in 0..seeds {
        let low = solved_x(3, 3, 1, 2, seed, 1e4);
        let high = solved_x(3, 3, 1, 2, seed, 1e6);
        let r_low = sum_rate(&zf_rates(&low, &verify_alignment(&low, 2)).unwrap());
        let r_high = sum_rate(&zf_rates(&high, &verify_alignment(&high, 2)).unwrap());
        gap += r_high - r_low;
    }
    let mean = gap / seeds as f64;
    let expected = 9.0 * 100f64.log2();
    assert!((mean - expected).abs() <= 0.1 * expected, "{mean} vs {expected}");
}

#[test]
fn doubling_power_raises_every_stream_rate() {
    for seed in 0..10 {
        let a = solved_x(3, 3, 1, 2, seed, 100.0);
        let b = solved_x(3, 3, 1, 2, seed, 200.0);
        let ra = zf_rates(&a, &verify_alignment(&a, 2)).unwrap();
        let rb = zf_rates(&b, &verify_alignment(&b, 2)).unwrap();
        for (x, y) in ra.iter().flatten().zip(rb.iter().flatten()) {
            assert!(y > x);
        }
    }
}

#[test]
fn undecodable_receiver_is_rejected() {
    let topo = NetworkTopology::interference(3, 3, 1).unwrap();
    let opts = IcOptions { joint_beamforming: false, ..IcOptions::default() };
    let real = generate_realization(topo, 0, true);
    let pre = solve_ic_precoders(&real, &opts).unwrap();
    let eff = effective_channel_ic(&real, &pre, 1.0, &opts).unwrap();
    assert!(matches!(zf_rates(&eff, &verify_alignment(&eff, 1)), Err(Error::AlignmentNotVerified { .. })));
}

#[test]
fn partial_ia_and_x_scheme_share_rank_profile() {
    for k in [3usize, 4] {
        let topo = NetworkTopology::x_channel(k, k, 1, k - 1).unwrap();
        for seed in 0..30 {
            let real = generate_realization(topo, seed, true);
            let opts = PartialIaOptions::default();
            let pre = solve_partial_precoders(&real, &opts).unwrap();
            let eff = effective_channel_partial(&real, &pre, 1.0, &opts).unwrap();
            let report = verify_alignment(&eff, k - 1);
            assert!(report.pass(), "K={k} seed {seed}");
            let g = &eff.receiver(0).gain;
            assert_eq!(rank_eps(g, 1e-6).rank, 2 * k - 1);
        }
    }
}
