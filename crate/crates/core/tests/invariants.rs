mod oracles;

use harmonica::catalog::{
    catenoid_injectivity_margin, flujo_valid, make_family, omega_member, rotational_valid, torus_period_b, FamilySpec,
};
use harmonica::quadrature::QuadConfig;
use harmonica::report::{identity_points, identity_suite};
use harmonica::weierstrass::normalized_margin;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn cplx(r: f64) -> impl Strategy<Value = C> {
    (-r..r, -r..r).prop_map(|(x, y)| C::new(x, y))
}

fn suite_passes(spec: &FamilySpec, seed: u64) -> Result<(), TestCaseError> {
    let fam = make_family(spec, &QuadConfig::default()).map_err(|e| TestCaseError::fail(format!("{spec:?}: {e}")))?;
    let pts = identity_points(spec, &fam.data().domain, 200, seed);
    let r = identity_suite(&fam, &pts, seed);
    let bad: Vec<_> = r.checks.iter().filter(|c| !c.pass).map(|c| (c.name.clone(), c.worst)).collect();
    prop_assert!(r.pass, "{spec:?}: {bad:?}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn catenoid_identities(a in cplx(3.0), b in cplx(3.0), r1 in -2.0..2.0f64, r2 in -2.0..2.0f64, seed in any::<u64>()) {
        prop_assume!(omega_member(a, b));
        suite_passes(&FamilySpec::catenoid(a, b, r1, r2), seed)?;
    }

    #[test]
    fn flujo_identities(b in 3.01..8.0f64, c in -4.0..1.99f64, seed in any::<u64>()) {
        prop_assume!(flujo_valid(b, c));
        suite_passes(&FamilySpec::Flujo { b, c }, seed)?;
    }

    #[test]
    fn horn_identities(r1 in -3.0..3.0f64, r2 in -3.0..3.0f64, seed in any::<u64>()) {
        suite_passes(&FamilySpec::Horn { r1, r2 }, seed)?;
    }

    #[test]
    fn valid_rotational_data_has_positive_margin(b in cplx(4.0), seed in any::<u64>()) {
        prop_assume!(rotational_valid(b));
        let spec = FamilySpec::rotational(b);
        let fam = make_family(&spec, &QuadConfig::default()).unwrap();
        for p in identity_points(&spec, &fam.data().domain, 300, seed) {
            let m = normalized_margin(&fam.data().phi(&p));
            prop_assert!(m > 0.0, "b={b}, z={}: margin {m}", p.z);
        }
    }

    #[test]
    fn injectivity_determinant_positive_on_omega(a in cplx(3.0), b in cplx(3.0)) {
        prop_assume!(omega_member(a, b));
        for k in 0..=400 {
            let m = 10f64.powf(-2.0 + 4.0 * k as f64 / 400.0);
            prop_assert!(catenoid_injectivity_margin(a, b, m) > 0.0, "m={m}");
        }
    }

    #[test]
    fn torus_period_matches_elliptic_integrals(a in 0.03..0.97f64) {
        let t = torus_period_b(a, &QuadConfig::default()).unwrap();
        prop_assert!((t.b - oracles::torus_b(a)).abs() < 1e-9, "a={a}: {} vs {}", t.b, oracles::torus_b(a));
        prop_assert!((t.ratio_b - t.b).abs() < 1e-8);
    }
}

#[test]
fn torus_oracle_known_value() {
    // K(1/2) and E(1/2) from tables: 1.685750354812596, 1.467462209339427
    let (k, e) = oracles::elliptic_ke(0.5);
    assert!((k - 1.685750354812596).abs() < 1e-14);
    assert!((e - 1.467462209339427).abs() < 1e-14);
    assert!((oracles::torus_b(0.5) + 0.5179607878473461).abs() < 1e-13);
}

#[test]
fn margin_vanishes_on_invalid_rotational_data() {
    // b = -1: (x^2 + b)^2 has a real root, so the margin has a zero on |z| = 1
    let spec = FamilySpec::rotational(C::new(-1.0, 0.0));
    let fam = harmonica::catalog::make_family_unchecked(&spec, &QuadConfig::default()).unwrap();
    let w = oracles::min_wedge(fam.data(), oracles::Scan::LogPolar { rho: (-3.0, 3.0), n: 60 }, &[], 1e-3);
    assert!(w < 1e-12, "{w}");
}
