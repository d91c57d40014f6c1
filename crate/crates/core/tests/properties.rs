use nalgebra::DMatrix;
use proptest::prelude::*;

use asn_reservoir::device::{asn_response, noise_sigma, DeviceParams};
use asn_reservoir::readout::{pinv, train_readout};
use asn_reservoir::reservoir::{generate_topology, run, Backend, ReservoirParams, RunMode, TopologySpec};
use asn_reservoir::seed::rng_from;

fn device() -> impl Strategy<Value = DeviceParams> {
    (0.1f64..2.0, 0.5f64..20.0, 0.0f64..0.2).prop_map(|(v_dd, slope_beta, noise_amp_alpha)| DeviceParams {
        v_dd,
        slope_beta,
        noise_amp_alpha,
    })
}

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
    })
}

fn rel(diff: DMatrix<f64>, scale: &DMatrix<f64>) -> f64 {
    let s = scale.norm();
    if s == 0.0 {
        diff.norm()
    } else {
        diff.norm() / s
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_response_is_odd(d in device(), v in -2.0f64..2.0) {
        prop_assert_eq!(d.mean_response(-v), -d.mean_response(v));
    }

    #[test]
    fn sigma_bounded_by_alpha(d in device(), v in -2.0f64..2.0) {
        let s = noise_sigma(v, &d);
        prop_assert!(s <= d.noise_amp_alpha);
        if v != 0.0 && d.noise_amp_alpha > 0.0 && (d.slope_beta * v).abs() > 1e-6 {
            prop_assert!(s < d.noise_amp_alpha);
        }
    }

    #[test]
    fn device_samples_reproduce(d in device(), seed in any::<u64>(), vs in prop::collection::vec(-1.0f64..1.0, 1..50)) {
        let draw = || {
            let mut rng = rng_from(seed);
            vs.iter().map(|&v| asn_response(v, &d, &mut rng)).collect::<Vec<_>>()
        };
        let (a, b) = (draw(), draw());
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn delays_monotone_in_strength(seed in any::<u64>(), n in 2usize..40, conn in 0.05f64..1.0) {
        let spec = TopologySpec { n, connectivity: conn, ..Default::default() };
        let topo = generate_topology(&spec, seed).unwrap();
        let edges: Vec<(f64, u32)> = (0..n).flat_map(|i| topo.incoming(i).iter().map(|e| (e.weight.abs(), e.delay))).collect();
        for a in &edges {
            for b in &edges {
                if a.0 < b.0 {
                    prop_assert!(a.1 >= b.1, "{a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn ideal_states_bounded_by_gain(
        seed in any::<u64>(),
        gain in 0.1f64..3.0,
        radius in 0.1f64..5.0,
        inputs in prop::collection::vec(-5.0f64..5.0, 60),
    ) {
        let spec = TopologySpec { n: 15, spectral_radius: radius, ..Default::default() };
        let topo = generate_topology(&spec, seed).unwrap();
        let rp = ReservoirParams { activation_gain: gain, washout: 0, ..Default::default() };
        let u = DMatrix::from_row_slice(1, inputs.len(), &inputs);
        let h = run(&topo, &rp, &u, RunMode::NoFeedback, seed).unwrap();
        prop_assert!(h.states.iter().all(|x| x.abs() <= gain));
    }

    #[test]
    fn runs_are_bit_reproducible(seed in any::<u64>(), asn in any::<bool>()) {
        let topo = generate_topology(&TopologySpec { n: 12, ..Default::default() }, seed).unwrap();
        let rp = ReservoirParams {
            washout: 5,
            backend: if asn { Backend::asn_matched(DeviceParams::default()) } else { Backend::Ideal },
            ..Default::default()
        };
        let u = DMatrix::from_fn(1, 40, |_, t| (t as f64 * 0.3).sin());
        let a = run(&topo, &rp, &u, RunMode::NoFeedback, seed).unwrap();
        let b = run(&topo, &rp, &u, RunMode::NoFeedback, seed).unwrap();
        prop_assert!(a.states.iter().zip(b.states.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn penrose_conditions(m in matrix(12, 30)) {
        let p = pinv(&m, None).unwrap();
        let (mp, pm) = (&m * &p, &p * &m);
        prop_assert!(rel(&mp * &m - &m, &m) <= 1e-8);
        prop_assert!(rel(&pm * &p - &p, &p) <= 1e-8);
        prop_assert!(rel(mp.transpose() - &mp, &mp) <= 1e-8);
        prop_assert!(rel(pm.transpose() - &pm, &pm) <= 1e-8);
    }

    #[test]
    fn least_squares_beats_alternatives(seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = rng_from(seed);
        let (n, t, p) = (8, 40, 2);
        let x = DMatrix::from_fn(n, t, |_, _| rng.random_range(-1.0..1.0));
        let y = DMatrix::from_fn(p, t, |_, _| rng.random_range(-1.0..1.0));
        let w = train_readout(&x, &y, 0.0).unwrap();
        let best = (&y - w.matrix() * &x).norm();
        for _ in 0..100 {
            let alt = w.matrix() + DMatrix::from_fn(p, n, |_, _| rng.random_range(-0.1..0.1));
            prop_assert!(best <= (&y - alt * &x).norm() + 1e-9);
        }
    }
}
