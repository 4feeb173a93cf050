mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use qcoinflip::catalog::{Alpha2, StateFamily, StateLabel};
use qcoinflip::discrimination::usd_pure_pair;
use qcoinflip::quantum::{helstrom_success, normalize_real, trace_distance, Matrix};

#[test]
fn catalog_is_valid() {
    common::catalog_invariants().unwrap();
}

#[test]
fn born_rule_fuzz() {
    common::born_fuzz(1000, 3).unwrap();
}

#[test]
fn diagonal_povms_never_beat_helstrom() {
    let tried = common::helstrom_grid(40).unwrap();
    assert!(tried >= 1000);
}

// Brute force over real projective measurements at 1 degree resolution.
#[test]
fn helstrom_matches_projective_brute_force() {
    for f in common::families().into_iter().filter(|f| f.dim() == 2) {
        let r0 = f.committed_density(0).unwrap();
        let r1 = f.committed_density(1).unwrap();
        let helstrom = helstrom_success(&r0, &r1).unwrap();
        let mut best: f64 = 0.0;
        for deg in 0..180 {
            let t = deg as f64 * PI / 180.0;
            let v = normalize_real(&[t.cos(), t.sin()]).unwrap();
            let p = common::guess_success(&Matrix::outer(v.amplitudes()), &r0, &r1);
            assert!(p <= helstrom + 1e-12, "{}: {deg} degrees beats Helstrom", f.name());
            best = best.max(p);
        }
        assert!(
            (best - helstrom).abs() < 1e-3,
            "{}: best {best} vs {helstrom}",
            f.name()
        );
    }
}

#[test]
fn bb84_commitments_are_indistinguishable() {
    let f = StateFamily::Bb84;
    let d = trace_distance(&f.committed_density(0).unwrap(), &f.committed_density(1).unwrap()).unwrap();
    assert!(d < 1e-12);
}

#[test]
fn loss_tolerant_usd_rate_is_one_minus_overlap() {
    for t in common::ALPHA2_GRID {
        let f = StateFamily::LossTolerant(Alpha2::new(t).unwrap());
        for x in 0..2 {
            let s0 = f.state(StateLabel::new(0, x)).unwrap();
            let s1 = f.state(StateLabel::new(1, x)).unwrap();
            let povm = usd_pure_pair(&s0, &s1).unwrap();
            let p = povm.probabilities_pure(&s0).unwrap();
            let overlap = s0.inner(&s1).unwrap().norm();
            assert!((p[0] - (1.0 - overlap)).abs() < 1e-12);
            assert!((overlap - (2.0 * t - 1.0)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn loss_tolerant_family_is_valid_everywhere(t in 0.5001f64..0.9999) {
        let f = StateFamily::LossTolerant(Alpha2::new(t).unwrap());
        for a in 0..2u8 {
            prop_assert!(common::povm_is_valid(&f.basis(a).unwrap().to_povm()));
            prop_assert!(common::density_is_valid(&f.committed_density(a).unwrap()));
        }
        let h = helstrom_success(&f.committed_density(0).unwrap(), &f.committed_density(1).unwrap()).unwrap();
        prop_assert!((h - t).abs() < 1e-12);
    }
}
