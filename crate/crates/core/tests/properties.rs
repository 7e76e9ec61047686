use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use proptest::prelude::*;

use nhdyn::algebra::{
    build_su11_boson_rep, build_su2_rep, commutator_residuals, commutator_residuals_on_block, AlgebraKind,
};
use nhdyn::cli::parse_config;
use nhdyn::decomposition::{
    build_group_element, canonical_exponential, gauss_decompose, invert_group_element, CanonicalParams,
};
use nhdyn::flow::{flow_rhs, stationary_state, FlowState};
use nhdyn::linalg::{expm, identity, max_norm, CMat};
use nhdyn::model::{h_matrix_from, Coeffs, Interpolation, Table};
use nhdyn::oracle::state_error;
use nhdyn::solution::StateVector;
use nhdyn::transform::transformed_coeffs;

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

fn spin() -> impl Strategy<Value = f64> {
    (1usize..=8).prop_map(|k| k as f64 / 2.0)
}

fn kind() -> impl Strategy<Value = AlgebraKind> {
    prop_oneof![Just(AlgebraKind::Su2), Just(AlgebraKind::Su11)]
}

fn params() -> impl Strategy<Value = CanonicalParams> {
    (-1.0..1.0_f64, 0.0..0.4_f64, -PI..PI).prop_map(|(e, r, a)| CanonicalParams::new(e, Complex64::from_polar(r, a)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spin_matrices_close_the_algebra(j in spin()) {
        let r = build_su2_rep(j).unwrap();
        prop_assert!(commutator_residuals(&r).max() < 1e-12);
    }

    #[test]
    fn boson_matrices_close_on_trusted_block(n in 20usize..80) {
        let r = build_su11_boson_rep(n).unwrap();
        prop_assert!(commutator_residuals_on_block(&r, r.trusted_dim()).max() < 1e-12);
    }

    #[test]
    fn hermitian_limit_gives_hermitian_matrix(j in spin(), w in -2.0..2.0_f64, a in complex(1.0), n in 20usize..40) {
        let v = Coeffs { omega: Complex64::new(w, 0.0), alpha: a, beta: a.conj() };
        for rep in [build_su2_rep(j).unwrap(), build_su11_boson_rep(n).unwrap()] {
            let h = h_matrix_from(&v, &rep);
            prop_assert!(max_norm(&(&h - h.adjoint())) < 1e-14);
        }
    }

    #[test]
    fn gauss_product_reproduces_exponential(p in params(), j in spin()) {
        let rep = build_su2_rep(j).unwrap();
        let g = gauss_decompose(&p, AlgebraKind::Su2).unwrap();
        let prod = build_group_element(&g, &rep).unwrap();
        let direct = canonical_exponential(&p, &rep);
        prop_assert!(max_norm(&(prod - &direct)) / max_norm(&direct) < 1e-10);
    }

    #[test]
    fn group_element_times_inverse_is_identity(p in params(), j in spin(), k in kind()) {
        let rep = match k {
            AlgebraKind::Su2 => build_su2_rep(j).unwrap(),
            AlgebraKind::Su11 => build_su11_boson_rep(12).unwrap(),
        };
        let g = gauss_decompose(&p, k).unwrap();
        let v = build_group_element(&g, &rep).unwrap();
        let vi = invert_group_element(&g, &rep).unwrap();
        // Entries of the product cancel from terms as large as |vi||v|.
        let magnitude = vi.map(|z| z.norm()) * v.map(|z| z.norm());
        let e = &vi * &v - identity(rep.dim());
        for (z, m) in e.iter().zip(magnitude.iter()) {
            prop_assert!(z.norm() <= 1e-12 * m.max(1.0), "{} vs {}", z.norm(), m);
        }
    }

    #[test]
    fn zero_parameters_decompose_to_identity(k in kind()) {
        let g = gauss_decompose(&CanonicalParams::new(0.0, Complex64::new(0.0, 0.0)), k).unwrap();
        prop_assert_eq!(g.theta_plus, Complex64::new(0.0, 0.0));
        prop_assert_eq!(g.theta_minus, Complex64::new(0.0, 0.0));
        prop_assert!((g.theta_zero - 1.0).norm() < 1e-15);
    }

    #[test]
    fn exponential_inverts(a in prop::collection::vec(complex(2.0), 16)) {
        let m = CMat::from_vec(4, 4, a);
        let e = expm(&m) * expm(&(-&m));
        prop_assert!(max_norm(&(e - identity(4))) < 1e-11);
    }

    #[test]
    fn state_error_is_symmetric_and_scale_free(a in prop::collection::vec(complex(1.0), 6), b in prop::collection::vec(complex(1.0), 6), s in 0.1..10.0_f64) {
        let u = StateVector::new(0.0, a.into());
        let v = StateVector::new(0.0, b.into());
        prop_assume!(u.norm() > 1e-3 && v.norm() > 1e-3);
        let e1 = state_error(&u, &v).unwrap();
        let e2 = state_error(&v, &u).unwrap();
        prop_assert!((e1 - e2).abs() < 1e-14);
        prop_assert_eq!(state_error(&u, &u).unwrap(), 0.0);
        let su = StateVector::new(0.0, &u.amplitudes * Complex64::new(s, 0.0));
        let sv = StateVector::new(0.0, &v.amplitudes * Complex64::new(s, 0.0));
        prop_assert!((state_error(&su, &sv).unwrap() - e1).abs() < 1e-12);
    }

    #[test]
    fn stationary_point_is_fixed_and_constraint_free(w in 0.5..2.0_f64, a in 0.01..0.2_f64, b in 0.01..0.2_f64, k in kind()) {
        let v = Coeffs { omega: Complex64::new(w, 0.0), alpha: Complex64::new(a, 0.0), beta: Complex64::new(b, 0.0) };
        let s = stationary_state(0.0, &v, k).unwrap();
        let d = flow_rhs(&s, &v.polar(), k).unwrap();
        prop_assert!(d.dphi.abs() < 1e-12 && d.dvarphi.abs() < 1e-12 && d.dtheta_zero.abs() < 1e-12, "{:?}", d);
        let tc = transformed_coeffs(&s, &d, &v, k).unwrap();
        prop_assert!(tc.q.norm() < 1e-12 && tc.y.norm() < 1e-12 && tc.w.im.abs() < 1e-12, "{:?}", tc);
    }

    #[test]
    fn flow_rhs_is_symmetric_under_phi_reflection(phi in 0.05..1.0_f64, varphi in -3.0..3.0_f64, w in complex(1.0), a in complex(0.5), b in complex(0.5)) {
        let v = Coeffs { omega: w, alpha: a, beta: b };
        let s = FlowState { t: 0.0, phi, varphi, theta_zero: 1.0 };
        let r = FlowState { phi: -phi, varphi: varphi + std::f64::consts::PI, ..s };
        let p = v.polar();
        prop_assume!(p.mod_omega > 1e-3 && p.mod_alpha > 1e-3 && p.mod_beta > 1e-3);
        let ds = flow_rhs(&s, &p, AlgebraKind::Su2).unwrap();
        let dr = flow_rhs(&r, &p, AlgebraKind::Su2).unwrap();
        prop_assert!((ds.dphi + dr.dphi).abs() < 1e-10);
        prop_assert!((ds.dvarphi - dr.dvarphi).abs() < 1e-10);
    }

    #[test]
    fn table_interpolation_hits_nodes(vals in prop::collection::vec((-5.0..5.0_f64, -5.0..5.0_f64), 4..12), cubic in any::<bool>()) {
        let samples: Vec<(f64, f64, f64)> = vals.iter().enumerate().map(|(i, &(r, m))| (i as f64 * 0.5, r, m)).collect();
        let interp = if cubic { Interpolation::Cubic } else { Interpolation::Linear };
        let tab = Table::new(samples.clone(), interp).unwrap();
        for (t, r, m) in samples {
            let z = tab.eval(t).unwrap();
            prop_assert!((z.re - r).abs() < 1e-12 && (z.im - m).abs() < 1e-12);
        }
    }

    #[test]
    fn config_round_trips_through_json(j in spin(), w in -2.0..2.0_f64, seed in any::<u64>(), samples in 2usize..50) {
        let text = format!(
            r#"{{"algebra": "su2", "representation": {{"j": {j}}},
                "coefficients": {{"omega": {{"type": "constant", "re": {w}}},
                                 "alpha": {{"type": "sinusoid", "amp_re": 0.1, "frequency": 2.0}},
                                 "beta": {{"type": "constant", "re": 0.05, "im": 0.01}}}},
                "time": {{"samples": {samples}}}, "seed": {seed}, "sign_convention": -1}}"#
        );
        let cfg = parse_config(&text, Path::new("."), "inline").unwrap();
        let again = serde_json::to_string(&cfg.file).unwrap();
        let cfg2 = parse_config(&again, Path::new("."), "inline").unwrap();
        prop_assert_eq!(cfg.file, cfg2.file);
    }
}
