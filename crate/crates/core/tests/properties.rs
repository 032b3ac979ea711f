use num_complex::Complex64;
use proptest::prelude::*;

use teleclone_core::cloning::{econ_clone, econ_fidelity_analytic, phase_state, PhaseVector};
use teleclone_core::qudit::{
    fidelity, tensor_product, von_neumann_entropy, PartialTrace, QuditDim, Register, StateVector, TAU_CROSS, TAU_NORM,
};
use teleclone_core::telecloning::{
    channel_entanglement, channel_entropy, fidelity_analytic, run_protocol, ChannelAmplitudes,
};

fn state(d: usize, n: usize) -> impl Strategy<Value = StateVector> {
    let len = d.pow(n as u32);
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(move |v| {
            let reg = Register::uniform(QuditDim::new(d).unwrap(), n);
            let amps = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            StateVector::new(reg, amps).unwrap().normalized().unwrap()
        })
}

fn sized_state(n: usize) -> impl Strategy<Value = StateVector> {
    (2usize..=5).prop_flat_map(move |d| state(d, n))
}

fn phases(d: usize) -> impl Strategy<Value = PhaseVector> {
    prop::collection::vec(0.0f64..std::f64::consts::TAU, d).prop_map(|t| PhaseVector::new(t).unwrap())
}

fn channel(d: usize) -> impl Strategy<Value = ChannelAmplitudes> {
    prop::collection::vec(0.0f64..1.0, d)
        .prop_filter("non-zero", |v| v.iter().any(|&x| x > 1e-3))
        .prop_map(|v| ChannelAmplitudes::normalize(v).unwrap())
}

fn protocol_case() -> impl Strategy<Value = (PhaseVector, ChannelAmplitudes)> {
    (2usize..=5).prop_flat_map(|d| (phases(d), channel(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_product_stays_normalized(a in sized_state(1), b in sized_state(2)) {
        let ab = tensor_product(&a, &b).unwrap();
        prop_assert!((ab.norm_sqr() - 1.0).abs() <= TAU_NORM);
    }

    #[test]
    fn both_sides_of_a_pure_state_have_equal_entropy(s in sized_state(2)) {
        let sa = von_neumann_entropy(&s.partial_trace(&[0]).unwrap()).unwrap();
        let sb = von_neumann_entropy(&s.partial_trace(&[1]).unwrap()).unwrap();
        prop_assert!((sa - sb).abs() <= TAU_CROSS);
        let max = (s.register().dims()[0] as f64).log2();
        prop_assert!((0.0..=max + TAU_NORM).contains(&sa));
    }

    #[test]
    fn staged_partial_trace_is_consistent(s in sized_state(3)) {
        let direct = s.partial_trace(&[2]).unwrap();
        let staged = s.partial_trace(&[1, 2]).unwrap().partial_trace(&[1]).unwrap();
        prop_assert!(direct.distance(&staged).unwrap() <= TAU_NORM);
        prop_assert!((direct.trace() - 1.0).norm() <= TAU_NORM);
        prop_assert!(direct.is_valid(TAU_NORM));
    }

    #[test]
    fn fidelity_ignores_global_phase(s in sized_state(2), phi in 0.0f64..std::f64::consts::TAU) {
        let rho = s.partial_trace(&[0]).unwrap();
        let d = s.register().dims()[0];
        let psi = StateVector::basis(Register::new(vec![d]).unwrap(), 0).unwrap();
        let rotated = psi.scale(Complex64::from_polar(1.0, phi));
        let f = fidelity(&psi, &rho).unwrap();
        prop_assert!((f - fidelity(&rotated, &rho).unwrap()).abs() <= TAU_NORM);
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn cloner_is_an_isometry_with_symmetric_clones(input in sized_state(1)) {
        let out = econ_clone(&input).unwrap();
        prop_assert!((out.state.norm_sqr() - 1.0).abs() <= TAU_NORM);
        let r1 = out.state.partial_trace(&[0]).unwrap();
        let r2 = out.state.partial_trace(&[1]).unwrap();
        prop_assert!(r1.distance(&r2).unwrap() <= TAU_NORM);
    }

    #[test]
    fn cloner_is_phase_covariant(theta in (2usize..=9).prop_flat_map(phases)) {
        let d = theta.dim();
        let f = econ_clone(&phase_state(d, &theta).unwrap()).unwrap().fidelity_each;
        prop_assert!((f - econ_fidelity_analytic(d)).abs() <= TAU_CROSS);
    }

    #[test]
    fn simulated_fidelity_matches_closed_form((theta, x) in protocol_case()) {
        let run = run_protocol(&theta, &x).unwrap();
        let d2 = (x.dim().get() * x.dim().get()) as f64;
        prop_assert!((run.mean_fidelity - fidelity_analytic(&x)).abs() <= TAU_CROSS);
        prop_assert!((run.total_probability() - 1.0).abs() <= TAU_NORM);
        for r in &run.records {
            prop_assert!((r.probability - 1.0 / d2).abs() <= TAU_CROSS);
            prop_assert!((r.fidelity_b - r.fidelity_c).abs() <= TAU_CROSS);
            prop_assert!((r.fidelity_b - run.mean_fidelity).abs() <= TAU_CROSS);
            prop_assert!(r.corrected_state.is_normalized(TAU_NORM));
        }
    }

    #[test]
    fn channel_entropy_matches_diagonalized_reduction(x in (2usize..=7).prop_flat_map(channel)) {
        prop_assert!((channel_entropy(&x) - channel_entanglement(&x)).abs() <= TAU_CROSS);
    }
}
