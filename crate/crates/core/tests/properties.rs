use heisenring::basis::{enumerate_sector, Sector, SpinConfiguration};
use heisenring::bethe::{bethe_residual, elliptic_pair, single_magnon, sutherland_curve};
use heisenring::eigensolve::{labeled_spectrum, SolverConfig};
use heisenring::operators::{build_sparse, OperatorKind};
use heisenring::tldiagrams::{exact_two_h, DiagramSpace};
use heisenring::Geometry;
use proptest::prelude::*;

fn ring_sector() -> impl Strategy<Value = (usize, usize)> {
    (3usize..=10).prop_flat_map(|n| (Just(n), 0..=n))
}

fn random_vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn translation_has_order_n(n in 2usize..=20, bits in any::<u32>()) {
        let mask = (1u32 << n) - 1;
        let c = SpinConfiguration::new(bits & mask, n).unwrap();
        prop_assert_eq!(c.translate_by(n), c);
        prop_assert_eq!(c.translate().magnons(), c.magnons());
    }

    #[test]
    fn two_h_commutes_with_translation((n, k) in ring_sector(), seed in any::<u64>()) {
        let basis = enumerate_sector(Sector::ring(n, k).unwrap()).unwrap();
        let h = build_sparse::<f64>(&basis, OperatorKind::TwoH, usize::MAX).unwrap();
        let t = build_sparse::<f64>(&basis, OperatorKind::Translation, usize::MAX).unwrap();
        let s2 = build_sparse::<f64>(&basis, OperatorKind::TotalSpin, usize::MAX).unwrap();
        prop_assert!(h.is_symmetric());
        let x: Vec<f64> = (0..basis.dim()).map(|i| ((seed.wrapping_mul(i as u64 + 7) >> 11) as f64).sin()).collect();
        for (a, b) in [(&h, &t), (&h, &s2), (&s2, &t)] {
            let ab = a.matvec(&b.matvec(&x).unwrap()).unwrap();
            let ba = b.matvec(&a.matvec(&x).unwrap()).unwrap();
            for (p, q) in ab.iter().zip(&ba) {
                prop_assert!((p - q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_h_is_positive_semidefinite(n in 3usize..=8, x in random_vector(70)) {
        let k = n / 2;
        let basis = enumerate_sector(Sector::ring(n, k).unwrap()).unwrap();
        let h = build_sparse::<f64>(&basis, OperatorKind::TwoH, usize::MAX).unwrap();
        let x = &x[..basis.dim()];
        let hx = h.matvec(x).unwrap();
        let q: f64 = hx.iter().zip(x).map(|(a, b)| a * b).sum();
        prop_assert!(q >= -1e-12);
    }

    #[test]
    fn every_level_has_admissible_spin((n, k) in ring_sector()) {
        let basis = enumerate_sector(Sector::ring(n, k).unwrap()).unwrap();
        let report = labeled_spectrum::<f64>(&basis, &SolverConfig::default()).unwrap();
        let min_twice = (n as i64 - 2 * k as i64).unsigned_abs() as u32;
        prop_assert_eq!(report.total_multiplicity(), basis.dim());
        for level in &report.levels {
            let s = level.total_spin.expect("labeled");
            prop_assert!(s.0 >= min_twice && s.0 as usize <= n && (s.0 - min_twice).is_multiple_of(2));
            prop_assert!(level.energy_2h >= -1e-9);
            prop_assert!(level.momenta.iter().all(|&j| j < n));
        }
    }

    #[test]
    fn diagram_generators_match_spin_operator(n in 2usize..=7, geometry in prop_oneof![Just(Geometry::Chain), Just(Geometry::Ring)]) {
        prop_assume!(geometry == Geometry::Chain || n >= 3);
        for k in 0..=n / 2 {
            let space = DiagramSpace::new(n, k, geometry).unwrap();
            let a = space.a_operator().unwrap();
            let l = space.intertwiner().unwrap();
            let h = exact_two_h(&space).unwrap();
            prop_assert!(l.matrix.mul(&a).add(&h.mul(&l.matrix)).is_zero(), "N={} k={} {}", n, k, geometry);
        }
    }

    #[test]
    fn elliptic_integrals_are_monotone(a in 0.0f64..0.98, b in 0.0f64..0.98) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let p = elliptic_pair(lo).unwrap();
        let q = elliptic_pair(hi).unwrap();
        prop_assert!(p.k < q.k);
        prop_assert!(p.e > q.e);
        prop_assert!(q.e <= q.k);
    }

    #[test]
    fn curve_stays_in_physical_range(a in 1.001f64..1e4) {
        let p = sutherland_curve(a).unwrap();
        prop_assert!(p.d > 0.0 && p.d < 0.5 + 1e-9);
        prop_assert!(p.eps > 0.0);
    }

    #[test]
    fn single_magnon_solves_equations(n in 2usize..=40, j in 0usize..40) {
        let j = j % n;
        let s = single_magnon::<f64>(n, j).unwrap();
        for r in bethe_residual(&s).unwrap() {
            prop_assert!(r.norm() < 1e-10);
        }
        let want = 2.0 * (1.0 - (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos());
        prop_assert!((s.energy().unwrap() - want).abs() < 1e-9);
    }
}
