use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use su11::algebra::{
    cartan_decompose, classify, commutator, conjugate, expm, inner_dagger, AlgebraElement as E, GroupElement,
};
use su11::controllability::{is_controllable, negativity_set_nonempty, scalar_invariants, table_row};
use su11::elliptic::Weierstrass;
use su11::propagate::{propagate_with, Scheme};
use su11::synthesis::{constants_of_motion, costate_init, synthesize, transported_costate, Costate};

fn elem() -> impl Strategy<Value = E> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| E::new(x, y, z))
}

fn small_int_elem() -> impl Strategy<Value = E> {
    (-2i32..=2, -2i32..=2, -2i32..=2).prop_map(|(x, y, z)| E::new(x as f64, y as f64, z as f64))
}

fn det3(a: E, b: E, c: E) -> f64 {
    a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn double_commutator_identities(m in elem(), n in elem()) {
        let mn = commutator(m, n);
        let lhs = commutator(mn, m);
        let rhs = inner_dagger(m, n) * m - inner_dagger(m, m) * n;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + m.norm() * m.norm() * n.norm()));
        let lhs = commutator(mn, n);
        let rhs = inner_dagger(n, n) * m - inner_dagger(m, n) * n;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + n.norm() * n.norm() * m.norm()));
    }

    #[test]
    fn quadratic_identity(m in elem(), n in elem()) {
        let c = commutator(m, n);
        let lhs = inner_dagger(c, c);
        let rhs = inner_dagger(m, n).powi(2) - inner_dagger(m, m) * inner_dagger(n, n);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + (m.norm() * n.norm()).powi(2)));
    }

    #[test]
    fn negative_combination_spans(a in elem(), b in elem(), u in -5.0..5.0f64) {
        let d = a + u * b;
        let dep = su11::controllability::linearly_dependent(a, b);
        if inner_dagger(d, d) < -1e-9 && !dep {
            let det = det3(a, b, commutator(a, b));
            prop_assert!(det.abs() > 1e-12 * (a.norm() * b.norm()).powi(2));
        }
    }

    #[test]
    fn exponentials_are_group_elements(m in elem()) {
        let x = expm(m);
        prop_assert!(x.is_valid(1e-9 * (1.0 + x.m[0][0].norm_sqr())));
        if x.m[0][0].norm() < 1e3 {
            let c = cartan_decompose(&x).unwrap();
            let d = su11::algebra::frobenius_distance(&c.reconstruct(), &x);
            prop_assert!(d <= 1e-9 * (1.0 + x.m[0][0].norm()), "{d:e}");
        }
    }

    #[test]
    fn classification_is_conjugation_invariant(m in elem(), p in (-1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64)) {
        let q = inner_dagger(m, m);
        prop_assume!(q.abs() > 1e-6);
        let pp = expm(E::new(p.0, p.1, p.2));
        prop_assert_eq!(classify(conjugate(&pp, m)), classify(m));
    }
}

fn cross_check(a: E, b: E) -> Result<(), TestCaseError> {
    let v = is_controllable(a, b);
    if v.reason == su11::controllability::TableRow::Dependent {
        return Ok(());
    }
    let (al, be, ga) = scalar_invariants(a, b);
    let (row, _) = table_row(al, be, ga);
    let (neg, witness) = negativity_set_nonempty(al, be, ga);
    prop_assert_eq!(row.controllable(), neg, "row {:?} for ({}, {}, {})", row, al, be, ga);
    prop_assert_eq!(v.controllable, neg);
    if let Some(u) = witness {
        let d = a + u * b;
        prop_assert!(inner_dagger(d, d) < 0.0);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn table_agrees_with_quadratic(a in elem(), b in elem()) {
        cross_check(a, b)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    /// Integer coefficients land on the table's equality boundaries.
    #[test]
    fn table_agrees_on_boundaries(a in small_int_elem(), b in small_int_elem()) {
        cross_check(a, b)?;
    }
}

#[test]
fn wp_differential_equation_on_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut done = 0;
    while done < 20 {
        let g2: f64 = rng.gen_range(-10.0..10.0);
        let g3: f64 = rng.gen_range(-10.0..10.0);
        let disc = g2.powi(3) - 27.0 * g3 * g3;
        if disc.abs() < 1e-2 * (g2.abs().powi(3) + 27.0 * g3 * g3) {
            continue;
        }
        let w = Weierstrass::new(g2, g3).unwrap();
        let (l1, l2) = (2.0 * w.lattice.omega1, 2.0 * w.lattice.omega2);
        for i in 0..10 {
            for j in 0..10 {
                let z = ((i as f64 + 0.5) / 10.0) * l1 + ((j as f64 + 0.5) / 10.0) * l2;
                let (p, dp) = w.eval(z).unwrap();
                let r = dp * dp - (4.0 * p * p * p - g2 * p - g3);
                let scale = 1.0 + dp.norm_sqr().max(p.norm().powi(3));
                assert!(r.norm() <= 1e-9 * scale, "g2={g2} g3={g3} z={z} r={:e}", r.norm());
            }
        }
        done += 1;
    }
}

#[test]
fn conservation_along_propagated_extremals() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let systems = [
        (E::new(1.0, 0.0, 2.0), E::kx()),
        (E::kz(), E::ky() - E::kx()),
        (E::new(0.3, -0.5, 1.2), E::new(0.7, 0.2, -0.4)),
    ];
    let mut done = 0;
    let mut tries = 0;
    while done < 9 {
        tries += 1;
        assert!(tries < 500);
        let (a, b) = systems[done % 3];
        let s = Costate::normal(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (al, be, ga) = scalar_invariants(a, b);
        let st = costate_init(&s, a, b);
        let Ok(law) = synthesize(&st, al, be, ga) else { continue };
        if !law.poles_in(0.0, 10.0).is_empty() {
            continue;
        }
        let Ok(tr) = propagate_with(a, b, &law, 10.0, 1e-3, Scheme::Magnus4) else { continue };
        let k0 = constants_of_motion(&st, al, be, ga);
        let size = tr.states.iter().map(|x| x.m[0][0].norm()).fold(1.0, f64::max);
        if size > 50.0 {
            continue;
        }
        let scale = 1.0 + k0.c1.abs() + k0.c2.abs();
        for (i, x) in tr.states.iter().enumerate().step_by(500) {
            let k = constants_of_motion(&transported_costate(&s, a, b, x), al, be, ga);
            let d = (k.c1 - k0.c1).abs().max((k.c2 - k0.c2).abs());
            assert!(d <= 1e-8 * scale, "drift {d:e} at t={}", tr.times[i]);
        }
        assert!(tr.invariant_drift() <= 1e-8, "group drift {:e}", tr.invariant_drift());
        done += 1;
    }
}

#[test]
fn identity_revisited_by_elliptic_drift() {
    let x = expm(4.0 * std::f64::consts::PI * E::kz());
    assert!(su11::algebra::frobenius_distance(&x, &GroupElement::identity()) < 1e-12);
    let half = expm(2.0 * std::f64::consts::PI * E::kz());
    assert!((half.m[0][0] + C64::new(1.0, 0.0)).norm() < 1e-12);
}
