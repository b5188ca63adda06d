use proptest::prelude::*;

use klab::census::max_general_position;
use klab::dynamics::{hausdorff_lines, hausdorff_points};
use klab::eigen::eigen3;
use klab::group::{classify, cyclic_limit_set, ElementKind, GroupElement};
use klab::linalg::{c, Complex3, Matrix3, C64};
use klab::proj::{incidence_residual, line_through, meet, ProjLine, ProjPoint};
use klab::pseudo::{psp_new, Kernel};
use klab::{gallery, spec_io};

fn cplx() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

fn vec3() -> impl Strategy<Value = Complex3> {
    [cplx(), cplx(), cplx()]
        .prop_map(Complex3)
        .prop_filter("nonzero", |v| v.norm() > 1e-3)
}

fn matrix() -> impl Strategy<Value = Matrix3> {
    [
        [cplx(), cplx(), cplx()],
        [cplx(), cplx(), cplx()],
        [cplx(), cplx(), cplx()],
    ]
    .prop_map(Matrix3)
}

/// Well-conditioned invertible matrices: identity plus a small perturbation.
fn near_identity() -> impl Strategy<Value = GroupElement> {
    matrix().prop_map(|m| GroupElement::new(Matrix3::identity() + m.scale_re(0.3)).unwrap())
}

fn loxodromic() -> impl Strategy<Value = GroupElement> {
    (0.2..0.8f64, 1.3..3.0f64, 0.0..6.0f64, 0.0..6.0f64).prop_map(|(a, b, s, t)| {
        let d = Matrix3::diag([
            c(a * s.cos(), a * s.sin()),
            c(b * t.cos(), b * t.sin()),
            c(1.0, 0.0),
        ]);
        GroupElement::new(d).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn line_through_contains_both_points(p in vec3(), q in vec3()) {
        let (p, q) = (ProjPoint::new(p).unwrap(), ProjPoint::new(q).unwrap());
        prop_assume!(p.distance(&q) > 1e-3);
        let l = line_through(&p, &q).unwrap();
        prop_assert!(incidence_residual(&p, &l) < 1e-12);
        prop_assert!(incidence_residual(&q, &l) < 1e-12);
    }

    #[test]
    fn meet_lies_on_both_lines(a in vec3(), b in vec3()) {
        let (a, b) = (ProjLine::from_dual(a).unwrap(), ProjLine::from_dual(b).unwrap());
        prop_assume!(a.distance(&b) > 1e-3);
        let p = meet(&a, &b).unwrap();
        prop_assert!(incidence_residual(&p, &a) < 1e-12);
        prop_assert!(incidence_residual(&p, &b) < 1e-12);
    }

    #[test]
    fn action_preserves_incidence(g in near_identity(), p in vec3(), l in vec3()) {
        let p = ProjPoint::new(p).unwrap();
        let l = ProjLine::from_dual(l).unwrap();
        let before = incidence_residual(&p, &l);
        let after = incidence_residual(&g.act(&p), &g.act_line(&l));
        // exact zero maps to exact zero; away from zero only the size class matters
        prop_assert_eq!(before < 1e-12, after < 1e-12);
    }

    #[test]
    fn eigen_pairs_have_small_residual(m in matrix()) {
        let e = eigen3(&m);
        prop_assume!(!e.ill_conditioned);
        for (lambda, v) in e.pairs() {
            let r = m.mul_vec(&v) - v.scale_c(lambda);
            prop_assert!(r.norm() < 1e-8 * m.frobenius().max(1e-300) * v.norm());
        }
    }

    #[test]
    fn classify_is_conjugation_invariant(g in loxodromic(), h in near_identity()) {
        let a = classify(&g);
        let b = classify(&g.conjugate_by(&h));
        prop_assert_eq!(a.kind, b.kind);
        prop_assert_eq!(a.kind, ElementKind::Loxodromic);
        for i in 0..3 {
            prop_assert!((a.moduli[i] - b.moduli[i]).abs() < 1e-8 * a.moduli[2]);
        }
    }

    #[test]
    fn cyclic_limit_set_is_equivariant(g in loxodromic(), h in near_identity()) {
        let base = cyclic_limit_set(&g).unwrap();
        let conj = cyclic_limit_set(&g.conjugate_by(&h)).unwrap();
        let moved: Vec<ProjLine> = base.line_list().iter().map(|l| h.act_line(l)).collect();
        let moved_pts: Vec<ProjPoint> = base.point_list().iter().map(|p| h.act(p)).collect();
        prop_assert!(hausdorff_lines(&moved, &conj.line_list()) < 1e-6);
        prop_assert!(hausdorff_points(&moved_pts, &conj.point_list()) < 1e-6);
    }

    #[test]
    fn general_position_is_projectively_invariant(
        duals in prop::collection::vec(prop::collection::vec(-2i32..=2, 3), 3..9),
        h in near_identity(),
    ) {
        let mut lines: Vec<ProjLine> = Vec::new();
        for d in duals {
            let v = Complex3([c(d[0] as f64, 0.0), c(d[1] as f64, 0.0), c(d[2] as f64, 0.0)]);
            if let Ok(l) = ProjLine::from_dual(v) {
                if lines.iter().all(|m| m.distance(&l) > 1e-6) {
                    lines.push(l);
                }
            }
        }
        let moved: Vec<ProjLine> = lines.iter().map(|l| h.act_line(l)).collect();
        prop_assert_eq!(max_general_position(&lines).0, max_general_position(&moved).0);
    }

    #[test]
    fn rank_one_kernel_is_the_annihilated_line(u in vec3(), w in vec3()) {
        let mut m = Matrix3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = u.0[i] * w.0[j];
            }
        }
        let p = psp_new(m).unwrap();
        prop_assert_eq!(p.rank(), 1);
        match p.kernel() {
            Kernel::KLine(l) => {
                let expected = ProjLine::from_dual(w).unwrap();
                prop_assert!(l.distance(&expected) < 1e-10);
            }
            other => prop_assert!(false, "kernel {:?}", other),
        }
    }

    #[test]
    fn matrix_json_round_trips(m in matrix()) {
        let v = spec_io::matrix_to_value(&m);
        let back = spec_io::parse_matrix(&v.to_string()).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn gallery_specs_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for e in gallery::gallery().unwrap() {
        let path = dir.path().join(format!("{}.json", e.id));
        spec_io::write_group(&e.spec, &path).unwrap();
        let back = spec_io::read_group(&path).unwrap();
        assert_eq!(back.generators.len(), e.spec.generators.len());
        for (a, b) in back.generators.iter().zip(&e.spec.generators) {
            assert_eq!(a.lift(), b.lift());
        }
    }
}
