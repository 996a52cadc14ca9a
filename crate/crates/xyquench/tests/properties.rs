//! Property tests for the invariants of each stage.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use proptest::prelude::*;

use xyquench::analysis::{detect_revival, linear_fit, locate_critical_field, RevivalConfig};
use xyquench::correlators::pair_observables;
use xyquench::density::{build_state, spectrum, TwoSpinState};
use xyquench::lattice::{dispersion, make_params, momentum_grid, ModelParams};
use xyquench::linalg::Mat4;
use xyquench::measures::{
    cl1, combine2, lqc_components, measure_set, qfi_closed, qfi_generic,
    qfi_with_local_observables, rec_closed, rec_oracle, skew_info_oracle, standard_local_basis,
    LogBase, Measure,
};
use xyquench::oracle::{ode_oracle_observables, recommended_steps};
use xyquench::sweep::{evolve_series, field_map, UniformAxis};

fn params() -> impl Strategy<Value = ModelParams> {
    (
        2usize..=20,
        -1.2..1.2f64,
        0.5..1.2f64,
        0.5..1.2f64,
        -1.5..1.5f64,
        -1.5..1.5f64,
        prop_oneof![Just(0.0), 0.01..3.0f64],
    )
        .prop_map(|(half, gamma, j0, j1, h0, h1, temp)| {
            make_params(2 * half, gamma, j0, j1, h0, h1, temp).unwrap()
        })
}

/// Random valid X state; `zero` = 1 drops ρ14, 2 drops ρ23.
fn x_state() -> impl Strategy<Value = TwoSpinState> {
    (
        prop::array::uniform4(0.01..1.0f64),
        0.0..0.95f64,
        0.0..0.95f64,
        0.0..std::f64::consts::TAU,
        0.0..std::f64::consts::TAU,
        0usize..4,
    )
        .prop_map(|(d, u14, u23, a14, a23, zero)| {
            let s: f64 = d.iter().sum();
            let d = d.map(|x| x / s);
            let mut r14 = Complex64::from_polar(u14 * (d[0] * d[3]).sqrt(), a14);
            let mut r23 = Complex64::from_polar(u23 * (d[1] * d[2]).sqrt(), a23);
            if zero == 1 {
                r14 = Complex64::new(0.0, 0.0);
            }
            if zero == 2 {
                r23 = Complex64::new(0.0, 0.0);
            }
            let tr = d[0] + d[1] + d[2] + d[3];
            TwoSpinState::from_entries(d[0], d[1], d[2], d[3] + (1.0 - tr), r14, r23).unwrap()
        })
}

fn to_na(m: &Mat4) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

fn max_diff(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn entropy2(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Physical states only: some parameter points give non-positive two-spin states.
fn physical(
    p: &ModelParams,
    t: f64,
) -> Option<(xyquench::correlators::PairObservables, TwoSpinState)> {
    let o = pair_observables(p, t).ok()?;
    build_state(&o).ok().map(|s| (o, s))
}

proptest! {
    #[test]
    fn gamma_dominates_both_components(h in -3.0..3.0f64, j in -2.0..2.0f64, g in -1.5..1.5f64, phi in 0.0..std::f64::consts::TAU) {
        let gam = dispersion(h, j, g, phi);
        prop_assert!(gam >= (g * j * phi.sin()).abs());
        prop_assert!(gam >= (j * phi.cos() + h).abs());
    }

    #[test]
    fn gap_closes_at_critical_field(j in 0.1..3.0f64, g in -1.5..1.5f64) {
        prop_assert_eq!(dispersion(j, j, g, std::f64::consts::PI), 0.0);
    }

    #[test]
    fn grid_is_bitwise_reproducible(p in params()) {
        let a = momentum_grid(&p);
        let b = momentum_grid(&p);
        prop_assert_eq!(a.len(), p.n / 2);
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.phi.to_bits(), y.phi.to_bits());
            prop_assert_eq!(x.gamma0.to_bits(), y.gamma0.to_bits());
            prop_assert_eq!(x.gamma1.to_bits(), y.gamma1.to_bits());
        }
    }

    #[test]
    fn gamma_sign_swaps_xx_and_yy(p in params(), t in 0.0..20.0f64) {
        let a = pair_observables(&p, t).unwrap();
        let q = ModelParams { gamma: -p.gamma, ..p };
        let b = pair_observables(&q, t).unwrap();
        prop_assert_eq!(a.sxsx, b.sysy);
        prop_assert_eq!(a.sysy, b.sxsx);
        prop_assert_eq!(a.sz, b.sz);
        prop_assert!((a.szsz - b.szsz).abs() <= 1e-15);
    }

    #[test]
    fn zero_quench_is_stationary(p in params(), ts in prop::collection::vec(0.0..500.0f64, 1..6)) {
        let q = ModelParams { j1: p.j0, h1: p.h0, ..p };
        let a = pair_observables(&q, 0.0).unwrap();
        for t in ts {
            let b = pair_observables(&q, t).unwrap();
            for (x, y) in [(a.sz, b.sz), (a.sxsx, b.sxsx), (a.sysy, b.sysy), (a.szsz, b.szsz)] {
                prop_assert!((x - y).abs() <= 1e-14, "t={} {} vs {}", t, x, y);
            }
        }
    }

    #[test]
    fn spin_correlators_bounded(p in params(), t in 0.0..50.0f64) {
        let o = pair_observables(&p, t).unwrap();
        for c in [o.sxsx, o.sysy, o.szsz] {
            prop_assert!(c.abs() <= 0.25 + 1e-12, "{:?}", o);
        }
    }

    #[test]
    fn diagonal_blocks_give_diagonal_roots(s in x_state()) {
        let r = s.sqrt_elems;
        if s.rho14.norm() == 0.0 {
            prop_assert_eq!(r.alpha, s.rho11.sqrt());
            prop_assert_eq!(r.delta, s.rho44.sqrt());
            prop_assert_eq!(r.lambda, Complex64::new(0.0, 0.0));
        }
        if s.rho23.norm() == 0.0 {
            prop_assert_eq!(r.beta, s.rho22.sqrt());
            prop_assert_eq!(r.gamma, s.rho33.sqrt());
            prop_assert_eq!(r.nu, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn spectrum_sums_to_trace(s in x_state()) {
        let sum: f64 = spectrum(&s).iter().sum();
        prop_assert!((sum - s.trace()).abs() <= 1e-12);
        prop_assert!((s.trace() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn eigenvectors_are_unit_and_diagonalize(s in x_state()) {
        let v = s.eigenvectors();
        let rho = to_na(&s.to_matrix());
        let p = spectrum(&s);
        for (k, vec) in v.iter().enumerate() {
            let x = Vector4::from_fn(|i, _| vec[i]);
            prop_assert!((x.norm() - 1.0).abs() <= 1e-12);
            let resid = (&rho * &x - x * Complex64::new(p[k], 0.0)).norm();
            prop_assert!(resid <= 1e-12, "p{} residual {}", k + 1, resid);
        }
    }

    #[test]
    fn sqrt_matches_dense_eigensolver(s in x_state()) {
        let rho = to_na(&s.to_matrix());
        let eig = rho.symmetric_eigen();
        let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)));
        let oracle = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
        let ours = to_na(&s.sqrt_elems.to_matrix());
        prop_assert!(max_diff(&ours, &oracle) <= 1e-10);
        prop_assert!(max_diff(&(&ours * &ours), &rho) <= 1e-10);
    }

    #[test]
    fn pure_x_states_are_fixed_points(theta in 0.0..std::f64::consts::FRAC_PI_2, phase in 0.0..std::f64::consts::TAU, outer in any::<bool>()) {
        let (c, s) = (theta.cos(), theta.sin());
        let off = Complex64::from_polar(c * s, phase);
        let zero = Complex64::new(0.0, 0.0);
        let st = if outer {
            TwoSpinState::from_entries(c * c, 0.0, 0.0, s * s, off, zero)
        } else {
            TwoSpinState::from_entries(0.0, c * c, s * s, 0.0, zero, off)
        }
        .unwrap();
        let diff = max_diff(&to_na(&st.sqrt_elems.to_matrix()), &to_na(&st.to_matrix()));
        prop_assert!(diff <= 1e-10, "{}", diff);
    }

    #[test]
    fn diagonal_states_are_incoherent(d in prop::array::uniform4(0.0..1.0f64)) {
        let s: f64 = d.iter().sum();
        prop_assume!(s > 1e-3);
        let d = d.map(|x| x / s);
        let tr = d[0] + d[1] + d[2] + d[3];
        let zero = Complex64::new(0.0, 0.0);
        let st = TwoSpinState::from_entries(d[0], d[1], d[2], d[3] + (1.0 - tr), zero, zero).unwrap();
        prop_assert_eq!(cl1(&st), 0.0);
        prop_assert_eq!(rec_oracle(&st), 0.0);
    }

    #[test]
    fn uncorrelated_xy_gives_zero_rec(sz in -0.2..0.2f64, zz in -0.05..0.05f64) {
        let o = xyquench::correlators::PairObservables::from_correlators(sz, 0.0, 0.0, zz);
        prop_assert_eq!(rec_closed(&o).unwrap(), 0.0);
        prop_assert_eq!(cl1(&build_state(&o).unwrap()), 0.0);
    }

    #[test]
    fn rec_bounded_by_diagonal_entropy(p in params(), t in 0.0..20.0f64) {
        if let Some((o, s)) = physical(&p, t) {
            let rec = rec_closed(&o).unwrap();
            let hd = entropy2(&s.diagonal());
            prop_assert!(rec >= -1e-12 && rec <= hd + 1e-12 && hd <= 2.0 + 1e-12, "rec {} S_diag {}", rec, hd);
        }
    }

    #[test]
    fn cl1_is_four_xx_when_xx_dominates(p in params(), t in 0.0..20.0f64) {
        if let Some((o, s)) = physical(&p, t) {
            let big = o.sxsx.abs().max(o.sysy.abs());
            prop_assert!((cl1(&s) - 4.0 * big).abs() <= 1e-15);
        }
    }

    #[test]
    fn gamma_sign_exchanges_lqc_x_and_y(p in params(), t in 0.0..20.0f64) {
        let q = ModelParams { gamma: -p.gamma, ..p };
        if let (Some((oa, _)), Some((ob, _))) = (physical(&p, t), physical(&q, t)) {
            let a = measure_set(&oa, LogBase::Two).unwrap();
            let b = measure_set(&ob, LogBase::Two).unwrap();
            prop_assert!((a.lqc_x - b.lqc_y).abs() <= 1e-12);
            prop_assert!((a.lqc_y - b.lqc_x).abs() <= 1e-12);
            for m in [Measure::LqcZ, Measure::Cl1, Measure::Rec, Measure::Qfi] {
                prop_assert!((a.get(m) - b.get(m)).abs() <= 1e-12, "{}", m);
            }
        }
    }

    #[test]
    fn closed_forms_match_definitions(p in params(), t in 0.0..20.0f64) {
        if let Some((o, s)) = physical(&p, t) {
            prop_assert!((rec_closed(&o).unwrap() - rec_oracle(&s)).abs() <= 1e-10);
            let l = lqc_components(&s);
            for a in 0..3 {
                prop_assert!((l[a] - skew_info_oracle(&s, a)).abs() <= 1e-10);
            }
            prop_assert!((qfi_closed(&o).unwrap() - qfi_generic(&s)).abs() <= 1e-8);
        }
    }

    #[test]
    fn qfi_independent_of_local_basis(s in x_state(), seed in prop::array::uniform16(-1.0..1.0f64)) {
        let m = nalgebra::Matrix4::from_row_slice(&seed);
        prop_assume!(m.determinant().abs() > 1e-3);
        let q = m.qr().q();
        let basis = standard_local_basis();
        let rotated: Vec<_> = (0..4)
            .map(|mu| combine2(&[q[(mu, 0)], q[(mu, 1)], q[(mu, 2)], q[(mu, 3)]], &basis))
            .collect();
        let a = qfi_generic(&s);
        let b = qfi_with_local_observables(&s, &rotated);
        prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn revival_detector_is_translation_covariant(at in 330usize..780, height in 0.01..10.0f64, shift in 1usize..100) {
        let n = 801;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * 0.05).collect();
        let bump = |k: usize| (0..n).map(|i| if i == k { height } else { 0.0 }).collect::<Vec<f64>>();
        let cfg = RevivalConfig::default();
        let a = detect_revival(&t, &bump(at), &cfg).unwrap().unwrap();
        let shifted: Vec<f64> = t.iter().map(|x| x + shift as f64 * 0.05).collect();
        let b = detect_revival(&shifted, &bump(at), &cfg).unwrap().unwrap();
        prop_assert!((b - a - shift as f64 * 0.05).abs() <= 1e-9);
    }

    #[test]
    fn fit_of_collinear_points_is_exact(slope in -3.0..3.0f64, icpt in -50.0..50.0f64, ns in prop::collection::btree_set(10u32..1000, 2..8)) {
        let pts: Vec<(f64, f64)> = ns.iter().map(|&n| (n as f64, slope * n as f64 + icpt)).collect();
        let f = linear_fit(&pts).unwrap();
        prop_assert!((f.slope - slope).abs() <= 1e-12);
        if slope.abs() > 1e-3 {
            prop_assert!((f.r_squared - 1.0).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_dynamics_match_mode_integration(p in params(), t in 0.0..4.0f64) {
        let p = p.with_size(p.n.min(16)).unwrap();
        let a = pair_observables(&p, t).unwrap();
        let b = ode_oracle_observables(&p, t, recommended_steps(&p, t)).unwrap();
        for (x, y) in [(a.sz, b.sz), (a.sxsx, b.sxsx), (a.sysy, b.sysy), (a.szsz, b.szsz)] {
            prop_assert!((x - y).abs() <= 1e-8, "{} vs {}", x, y);
        }
    }

    #[test]
    fn argmax_survives_monotone_rescaling(h0 in 0.3..1.7f64, k in 0.5..5.0f64) {
        let p = make_params(40, 1.0, 1.0, 1.0, h0, 1.0, 0.0).unwrap();
        let t = UniformAxis::new(2.0, 8.0, 25).unwrap();
        let h = UniformAxis::new(0.5, 1.5, 21).unwrap();
        let map = field_map(&p, &t, &h, &[Measure::LqcX], LogBase::Two).unwrap();
        let mut warped = map.clone();
        for c in &mut warped.cells {
            c.lqc_x = (k * c.lqc_x).exp() + c.lqc_x.powi(3) - 7.0;
        }
        let a = locate_critical_field(&map, Measure::LqcX).unwrap();
        let b = locate_critical_field(&warped, Measure::LqcX).unwrap();
        prop_assert_eq!(a.index, b.index);
    }

    #[test]
    fn cells_do_not_depend_on_neighbours(p in params(), picks in prop::collection::vec(0usize..41, 1..5)) {
        let axis = UniformAxis::new(0.0, 10.0, 41).unwrap();
        if let Ok(r) = evolve_series(&p, &axis, &Measure::ALL, LogBase::Two) {
            for i in picks {
                let o = pair_observables(&p, axis.value(i)).unwrap();
                prop_assert_eq!(measure_set(&o, LogBase::Two).unwrap(), r.cells[i]);
            }
        }
    }
}

#[test]
fn thread_count_does_not_change_values() {
    let p = make_params(200, 0.8, 1.0, 1.0, 0.7, 1.0, 0.3).unwrap();
    let t = UniformAxis::new(0.0, 30.0, 301).unwrap();
    let h = UniformAxis::new(0.6, 1.4, 5).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| field_map(&p, &t, &h, &Measure::ALL, LogBase::Two).unwrap())
    };
    let a = run(1);
    let b = run(7);
    assert_eq!(a.grid_hash, b.grid_hash);
    for (x, y) in a.cells.iter().zip(&b.cells) {
        for m in Measure::ALL {
            assert_eq!(x.get(m).to_bits(), y.get(m).to_bits());
        }
    }
}

#[test]
fn thermal_damping_of_equilibrium_xx() {
    let cold = pair_observables(
        &make_params(400, 1.0, 1.0, 1.0, 0.7, 0.7, 0.0).unwrap(),
        0.0,
    )
    .unwrap();
    let hot = pair_observables(
        &make_params(400, 1.0, 1.0, 1.0, 0.7, 0.7, 5.0).unwrap(),
        0.0,
    )
    .unwrap();
    assert!(hot.sxsx.abs() < cold.sxsx.abs());
}
