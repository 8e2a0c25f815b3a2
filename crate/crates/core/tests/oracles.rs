//! Cross-checks against independent constructions.

use heisenring::basis::{binomial, enumerate_sector, Sector};
use heisenring::eigensolve::{labeled_spectrum, SolverConfig, TwiceSpin};
use heisenring::operators::{build_sparse, OperatorKind};
use heisenring::tldiagrams::{spectrum_via_diagrams, DiagramSpace};
use heisenring::Geometry;
use nalgebra::{DMatrix, SymmetricEigen};

/// `2H` on the full 2^N space built from Pauli matrices:
/// `2h = 1 - SWAP` with `SWAP = (1 + XX + YY + ZZ) / 2`.
/// Bit `i` set means site `i` is down; `Y⊗Y` is real.
fn pauli_two_h(n: usize, geometry: Geometry) -> DMatrix<f64> {
    let dim = 1usize << n;
    let edges: Vec<(usize, usize)> = match geometry {
        Geometry::Chain => (0..n - 1).map(|i| (i, i + 1)).collect(),
        Geometry::Ring => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    };
    let mut m = DMatrix::zeros(dim, dim);
    for &(u, v) in &edges {
        for s in 0..dim {
            let zu = if s >> u & 1 == 1 { -1.0 } else { 1.0 };
            let zv = if s >> v & 1 == 1 { -1.0 } else { 1.0 };
            let flipped = s ^ (1 << u) ^ (1 << v);
            // X⊗X flips both with coefficient 1; Y⊗Y flips both with -zu·zv
            let xx_yy = 1.0 - zu * zv;
            m[(s, s)] += 1.0 - 0.5 * (1.0 + zu * zv);
            m[(flipped, s)] -= 0.5 * xx_yy;
        }
    }
    m
}

#[test]
fn sector_blocks_match_pauli_construction() {
    for n in 2..=6 {
        for geometry in [Geometry::Chain, Geometry::Ring] {
            if geometry == Geometry::Ring && n < 3 {
                continue;
            }
            let full = pauli_two_h(n, geometry);
            for k in 0..=n {
                let basis = enumerate_sector(Sector::new(n, k, geometry).unwrap()).unwrap();
                let op = build_sparse::<i64>(&basis, OperatorKind::TwoH, usize::MAX).unwrap();
                for (i, a) in basis.states().iter().enumerate() {
                    for (j, b) in basis.states().iter().enumerate() {
                        let want = full[(a.bits() as usize, b.bits() as usize)];
                        assert_eq!(op.get(i, j) as f64, want, "N={n} k={k} {geometry} ({i},{j})");
                    }
                }
            }
        }
    }
}

#[test]
fn full_space_spectrum_is_union_of_sectors() {
    for n in [4usize, 5, 6] {
        let mut full: Vec<f64> = SymmetricEigen::new(pauli_two_h(n, Geometry::Ring)).eigenvalues.iter().copied().collect();
        full.sort_by(f64::total_cmp);
        let mut union = Vec::new();
        for k in 0..=n {
            let basis = enumerate_sector(Sector::ring(n, k).unwrap()).unwrap();
            union.extend(labeled_spectrum::<f64>(&basis, &SolverConfig::default()).unwrap().eigenvalues);
        }
        union.sort_by(f64::total_cmp);
        assert_eq!(full.len(), union.len());
        for (a, b) in full.iter().zip(&union) {
            assert!((a - b).abs() < 1e-9, "N={n}: {a} vs {b}");
        }
    }
}

/// A level of spin s appears in every sector with k ≥ N/2 − s at the same energy.
#[test]
fn spin_levels_are_independent_of_magnetization() {
    let config = SolverConfig::<f64>::default();
    for geometry in [Geometry::Chain, Geometry::Ring] {
        for n in 3..=8 {
            let reports: Vec<_> = (0..=n / 2)
                .map(|k| labeled_spectrum(&enumerate_sector(Sector::new(n, k, geometry).unwrap()).unwrap(), &config).unwrap())
                .collect();
            for k in 0..n / 2 {
                let s = TwiceSpin::for_deviates(n, k);
                let here: Vec<f64> = reports[k].with_spin(s).map(|l| l.energy_2h).collect();
                for deeper in &reports[k + 1..] {
                    let there: Vec<f64> = deeper.with_spin(s).map(|l| l.energy_2h).collect();
                    assert_eq!(here.len(), there.len(), "N={n} {geometry} s={s}");
                    for (a, b) in here.iter().zip(&there) {
                        assert!((a - b).abs() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn spin_multiplicities_follow_branching_rule() {
    let config = SolverConfig::<f64>::default();
    for n in 2..=10usize {
        for k in 0..=n / 2 {
            let report =
                labeled_spectrum(&enumerate_sector(Sector::chain(n, k).unwrap()).unwrap(), &config).unwrap();
            assert!(report.levels.iter().all(|l| l.total_spin.is_some()));
            for d in 0..=k {
                let s = TwiceSpin::for_deviates(n, d);
                let count: usize = report.with_spin(s).map(|l| l.multiplicity).sum();
                let want = binomial(n, d) - if d > 0 { binomial(n, d - 1) } else { 0 };
                assert_eq!(count as u64, want, "N={n} k={k} s={s}");
            }
        }
    }
}

/// On an open chain the diagram route is lossless, so it must reproduce the
/// whole highest-weight spectrum.
#[test]
fn chain_diagram_spectrum_matches_exact_diagonalization() {
    let config = SolverConfig::<f64>::default();
    for n in 2..=8usize {
        for k in 0..=n / 2 {
            let diagrams = spectrum_via_diagrams(n, k, Geometry::Chain).unwrap();
            assert!(diagrams.removed.is_empty(), "N={n} k={k}");
            let report =
                labeled_spectrum(&enumerate_sector(Sector::chain(n, k).unwrap()).unwrap(), &config).unwrap();
            let s = TwiceSpin::for_deviates(n, k);
            let mut want = Vec::new();
            for l in report.with_spin(s) {
                want.extend(std::iter::repeat_n(l.energy_2h, l.multiplicity));
            }
            let got = diagrams.energies();
            assert_eq!(got.len(), want.len(), "N={n} k={k}");
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-8, "N={n} k={k}: {a} vs {b}");
            }
            assert_eq!(DiagramSpace::new(n, k, Geometry::Chain).unwrap().dim(), want.len());
        }
    }
}
