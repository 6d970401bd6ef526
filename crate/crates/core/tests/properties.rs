//! Property tests for the structural invariants of the simulator.

use proptest::prelude::*;

use spincorr::analysis::{break_time, TimeSeries};
use spincorr::classical::{map_step, tangent_step, ClassicalParams, PhasePoint, TangentVector};
use spincorr::quantum::{dist_jz, dist_lz, expect_components, product_state, QuantumNumbers};
use spincorr::wigner::little_d;
use spincorr::Spin;

fn unit_angles() -> impl Strategy<Value = [f64; 4]> {
    [
        0.0f64..std::f64::consts::PI,
        0.0f64..std::f64::consts::TAU,
        0.0f64..std::f64::consts::PI,
        0.0f64..std::f64::consts::TAU,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    /// d(theta) stays orthogonal for arbitrary angles and spins.
    #[test]
    fn d_matrix_rows_are_orthonormal(dj in 1u32..40, theta in -7.0f64..7.0) {
        let d = little_d(Spin::from_doubled(dj), theta).unwrap();
        let n = d.dim();
        for r in 0..n {
            let norm: f64 = (0..n).map(|c| d.get(r, c).powi(2)).sum();
            prop_assert!((norm - 1.0).abs() < 1e-11, "row {r} norm {norm}");
        }
    }

    /// The map preserves both unit norms for any parameters and point.
    #[test]
    fn map_step_preserves_norms(
        angles in unit_angles(),
        a in -7.0f64..7.0,
        gamma in -6.0f64..6.0,
        r in 1.0f64..30.0,
    ) {
        let p = PhasePoint::from_angles(angles);
        let out = map_step(&p, &ClassicalParams::new(a, gamma, r));
        let (ns, nl) = out.norms();
        prop_assert!((ns - 1.0).abs() < 1e-13);
        prop_assert!((nl - 1.0).abs() < 1e-13);
    }

    /// The tangent map is exactly linear in the displacement.
    #[test]
    fn tangent_step_is_linear(
        angles in unit_angles(),
        v in prop::array::uniform6(-1.0f64..1.0),
        scale in -3.0f64..3.0,
    ) {
        let p = PhasePoint::from_angles(angles);
        let params = ClassicalParams::new(5.0, 2.835, 1.1);
        let mut scaled = TangentVector(v);
        scaled.scale(scale);
        let a = tangent_step(&p, &scaled, &params);
        let mut b = tangent_step(&p, &TangentVector(v), &params);
        b.scale(scale);
        for k in 0..6 {
            prop_assert!((a.0[k] - b.0[k]).abs() < 1e-12);
        }
    }

    /// Marginals of random product states are normalized and consistent
    /// with the component expectation values.
    #[test]
    fn marginals_are_normalized_and_consistent(
        s_angles in (0.0f64..std::f64::consts::PI, 0.0f64..std::f64::consts::TAU),
        l_angles in (0.0f64..std::f64::consts::PI, 0.0f64..std::f64::consts::TAU),
    ) {
        let qn = QuantumNumbers::new(Spin::new(2.5).unwrap(), Spin::new(4.0).unwrap());
        let sv = spincorr::quantum::coherent_state(qn.s, s_angles.0, s_angles.1).unwrap();
        let lv = spincorr::quantum::coherent_state(qn.l, l_angles.0, l_angles.1).unwrap();
        let psi = product_state(&qn, &sv, &lv).unwrap();
        let lz = dist_lz(&psi);
        let jz = dist_jz(&psi);
        prop_assert!((lz.total() - 1.0).abs() < 1e-12);
        prop_assert!((jz.total() - 1.0).abs() < 1e-12);
        let e = expect_components(&psi);
        prop_assert!((lz.mean() - e.l[2]).abs() < 1e-10);
        prop_assert!((jz.mean() - e.j[2]).abs() < 1e-10);
    }

    /// Lowering the tolerance never delays the break.
    #[test]
    fn break_time_is_monotone_in_tolerance(
        mut ys in prop::collection::vec(0.0f64..10.0, 3..40),
        p1 in 0.0f64..10.0,
        p2 in 0.0f64..10.0,
    ) {
        // make the series monotone non-decreasing
        for i in 1..ys.len() {
            ys[i] = ys[i].max(ys[i - 1]);
        }
        let series = TimeSeries::from_values(ys).unwrap();
        let (lo, hi) = (p1.min(p2), p1.max(p2));
        match (break_time(&series, lo), break_time(&series, hi)) {
            (None, Some(_)) => prop_assert!(false, "lower tolerance must break no later"),
            (Some(a), Some(b)) => prop_assert!(a <= b),
            _ => {}
        }
    }
}
