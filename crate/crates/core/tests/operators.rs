mod common;

use common::*;
use pnse_ldg::dgops::{dg_gradient_norm, dg_norm, jump_and_average, BoundaryDatum, NormVariant};
use pnse_ldg::femspace::FieldKind;
use rand::Rng;

#[test]
fn lifting_is_adjoint_to_the_face_pairing() {
    for level in [0, 2] {
        let (s, op) = space(level);
        let mut r = rng(level as u64);
        for _ in 0..20 {
            let w = random_field(&s, FieldKind::Vector, &mut r);
            let x = random_field(&s, FieldKind::Tensor, &mut r);
            let d = lifting_adjoint_defect(&s, &op, &w, &x);
            assert!(d <= 1e-11, "level {level}: {d:e}");
        }
    }
}

#[test]
fn divergence_of_projection_matches_weak_divergence() {
    let (s, op) = space(2);
    let mut r = rng(7);
    for _ in 0..10 {
        let c: [f64; 5] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let mut z = s.pressure.zeros();
        z.coeffs.iter_mut().for_each(|v| *v = r.gen_range(-1.0..1.0));
        let d = divergence_identity_defect(&s, &op, bubble_field(c), &z);
        assert!(d <= 1e-10, "{d:e}");
    }
}

#[test]
fn linear_fields_have_exact_dg_gradient() {
    let (s, op) = space(1);
    let a = [[0.3, -1.2], [2.0, 0.7]];
    let lin = move |x: [f64; 2]| [a[0][0] * x[0] + a[0][1] * x[1] + 0.1, a[1][0] * x[0] + a[1][1] * x[1] - 0.4];
    let w = s.l2_project(FieldKind::Vector, 1, |_, x| lin(x).to_vec());
    let datum = BoundaryDatum::from_fn(&s, lin);
    let g = op.dg_gradient(&s, &w, Some(&datum)).unwrap();
    for e in 0..s.num_elements() {
        let v = s.evaluate(&g, e, [0.2, 0.3]).unwrap();
        for (k, want) in [a[0][0], a[0][1], a[1][0], a[1][1]].iter().enumerate() {
            assert!((v[k] - want).abs() < 1e-11);
        }
    }
    // (x1, -x2) is divergence free
    let df = |x: [f64; 2]| [x[0], -x[1]];
    let w = s.l2_project(FieldKind::Vector, 1, |_, x| df(x).to_vec());
    let datum = BoundaryDatum::from_fn(&s, df);
    let d = op.dg_divergence(&s, &w, Some(&datum)).unwrap();
    assert!(d.coeffs.iter().all(|c| c.abs() < 1e-11));
}

#[test]
fn rotation_has_zero_symmetric_dg_gradient() {
    for level in [0, 1, 3] {
        let (s, op) = space(level);
        assert!(rotation_sym_gradient(&s, &op) <= 1e-11);
    }
}

#[test]
fn boundary_jump_vanishes_for_matching_datum() {
    let (s, _) = space(1);
    let f = |x: [f64; 2]| [x[0] + 2.0 * x[1], -x[0]];
    let w = s.l2_project(FieldKind::Vector, 1, |_, x| f(x).to_vec());
    let datum = BoundaryDatum::from_fn(&s, f);
    for face in 0..s.faces.len() {
        let d = jump_and_average(&s, &w, face, Some(&datum)).unwrap();
        for j in &d.jump {
            assert!(pnse_ldg::tensor::norm(j) < 1e-12);
        }
    }
}

#[test]
fn dg_gradient_norm_is_equivalent_to_broken_norm() {
    let (s, op) = space(2);
    let mut r = rng(3);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..50 {
        let w = random_field(&s, FieldKind::Vector, &mut r);
        let a = dg_norm(&s, &op, &w, None, 2.5, NormVariant::Full).unwrap();
        let b = dg_gradient_norm(&s, &op, &w, None, 2.5).unwrap();
        lo = lo.min(b / a);
        hi = hi.max(b / a);
    }
    println!("norm equivalence ratios in [{lo:.4}, {hi:.4}]");
    assert!(lo > 0.1 && hi < 10.0);
}

#[test]
fn korn_constant_is_stable_under_refinement() {
    for p in EXPERIMENT_P {
        let c2 = korn_constant(2, p, 100, 11);
        let c3 = korn_constant(3, p, 100, 12);
        println!("p = {p}: Korn constants {c2:.4} (level 2), {c3:.4} (level 3)");
        assert!(c2.is_finite() && c3.is_finite());
        assert!((c3 - c2).abs() / c2 <= 0.2);
    }
}

#[test]
fn embedding_constant_is_stable_under_refinement() {
    // smooth random fields vanishing on the boundary keep the ratio away from its sup
    let p = 2.5;
    let mut consts = Vec::new();
    for level in [2, 3] {
        let (s, op) = space(level);
        let mut r = rng(5);
        let mut c: f64 = 0.0;
        for _ in 0..20 {
            let k: [f64; 4] = std::array::from_fn(|_| r.gen_range(0.5..2.0));
            let w = s.l2_project(FieldKind::Vector, 1, |_, x| {
                let b = (1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1]);
                vec![b * (k[0] * x[0]).sin() * (k[1] * x[1]).cos(), b * ((k[2] * x[0] * x[1]).cos() - k[3] * x[1])]
            });
            let lq = pnse_ldg::dgops::broken_lp_norm(&s, &w, 2.0);
            let n = dg_norm(&s, &op, &w, None, p, NormVariant::Full).unwrap();
            c = c.max(lq / n);
        }
        consts.push(c);
    }
    println!("embedding constants {consts:?}");
    assert!((consts[1] - consts[0]).abs() / consts[0] <= 0.2);
}
