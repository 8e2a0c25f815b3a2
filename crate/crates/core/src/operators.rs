//! `2H`, translation and total spin on a sector basis.
//!
//! Everything acts through transpositions of sites, so the sector is never
//! left: `2h_{uv} = 1 - SWAP_{uv}` and
//! `S²_tot = s_max(s_max + 1) + Σ_{i<j} (SWAP_{ij} - 1)` with `s_max = N/2`.
//! Matrix-free application and materialized [`SparseOperator`]s agree
//! entry for entry.

use rayon::prelude::*;

use crate::basis::{Geometry, SectorBasis};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default dimension at or below which operators are materialized.
pub const DEFAULT_DENSE_THRESHOLD: usize = 4096;

/// Interaction edges of a ring or chain, as 0-based site pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSet {
    n_sites: usize,
    edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(n_sites: usize, geometry: Geometry) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = (0..n_sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if geometry == Geometry::Ring {
            if n_sites < 3 {
                return Err(Error::RingTooSmall(n_sites));
            }
            edges.push((n_sites - 1, 0));
        }
        Ok(Self { n_sites, edges })
    }

    pub fn for_basis(basis: &SectorBasis) -> Result<Self> {
        Self::new(basis.n_sites(), basis.geometry())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn check_len(basis: &SectorBasis, len: usize) -> Result<()> {
    if basis.dim() != len {
        Err(Error::DimensionMismatch { expected: basis.dim(), found: len })
    } else {
        Ok(())
    }
}

/// `(2H) x` via the swap realization.
pub fn apply_two_h<T: Scalar>(basis: &SectorBasis, edges: &EdgeSet, x: &[T]) -> Result<Vec<T>> {
    check_len(basis, x.len())?;
    if edges.n_sites() != basis.n_sites() {
        return Err(Error::DimensionMismatch { expected: basis.n_sites(), found: edges.n_sites() });
    }
    Ok((0..basis.dim())
        .into_par_iter()
        .map(|row| {
            let c = basis.state(row);
            let mut acc = T::zero();
            for &(u, v) in edges.edges() {
                if c.is_down(u) != c.is_down(v) {
                    let col = basis.index_of_bits(c.swapped(u, v).bits());
                    acc = acc + x[row].clone() - x[col].clone();
                }
            }
            acc
        })
        .collect())
}

/// `T x` where `T|c⟩ = |translate(c)⟩`.
pub fn apply_translation_op<T: Scalar>(basis: &SectorBasis, x: &[T]) -> Result<Vec<T>> {
    if basis.geometry() != Geometry::Ring {
        return Err(Error::RequiresRing);
    }
    check_len(basis, x.len())?;
    let mut y = vec![T::zero(); x.len()];
    for (i, c) in basis.states().iter().enumerate() {
        y[basis.index_of_bits(c.translate().bits())] = x[i].clone();
    }
    Ok(y)
}

/// `S²_tot x`, never leaving the magnon sector.
pub fn apply_total_spin<T: Scalar>(basis: &SectorBasis, x: &[T]) -> Result<Vec<T>> {
    check_len(basis, x.len())?;
    let n = basis.n_sites();
    let diag = max_casimir::<T>(n);
    Ok((0..basis.dim())
        .into_par_iter()
        .map(|row| {
            let c = basis.state(row);
            let mut acc = diag.clone() * x[row].clone();
            for i in 0..n {
                for j in i + 1..n {
                    if c.is_down(i) != c.is_down(j) {
                        let col = basis.index_of_bits(c.swapped(i, j).bits());
                        acc = acc + x[col].clone() - x[row].clone();
                    }
                }
            }
            acc
        })
        .collect())
}

/// `s_max (s_max + 1)` for `s_max = N/2`, i.e. `N(N+2)/4`.
fn max_casimir<T: Scalar>(n: usize) -> T {
    let four_c = (n * (n + 2)) as i64;
    if four_c % 4 == 0 {
        T::from_i64(four_c / 4).expect("integer casimir")
    } else {
        T::from_i64(four_c).expect("integer") / T::from_i64(4).expect("integer")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    TwoH,
    Translation,
    TotalSpin,
}

/// Row-compressed operator on a sector basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator<T> {
    dim: usize,
    rows: Vec<Vec<(usize, T)>>,
    symmetric: bool,
}

impl<T: Scalar> SparseOperator<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn rows(&self) -> &[Vec<(usize, T)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(T::zero)
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok(self
            .rows
            .par_iter()
            .map(|row| row.iter().fold(T::zero(), |acc, (c, v)| acc + v.clone() * x[*c].clone()))
            .collect())
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.dim]; self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                out[i][*j] = v.clone();
            }
        }
        out
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<T>
    where
        T: nalgebra::Scalar,
    {
        let mut m = nalgebra::DMatrix::<T>::from_element(self.dim, self.dim, T::zero());
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                m[(i, *j)] = v.clone();
            }
        }
        m
    }
}

/// Materializes one of the sector operators.
pub fn build_sparse<T: Scalar>(
    basis: &SectorBasis,
    which: OperatorKind,
    dense_threshold: usize,
) -> Result<SparseOperator<T>> {
    let dim = basis.dim();
    if dim > dense_threshold {
        return Err(Error::OverThreshold { dim, threshold: dense_threshold });
    }
    let n = basis.n_sites();
    let one = T::one();
    let rows: Vec<Vec<(usize, i64)>> = match which {
        OperatorKind::TwoH => {
            let edges = EdgeSet::for_basis(basis)?;
            (0..dim)
                .into_par_iter()
                .map(|row| {
                    let c = basis.state(row);
                    let mut diag = 0i64;
                    let mut entries = Vec::new();
                    for &(u, v) in edges.edges() {
                        if c.is_down(u) != c.is_down(v) {
                            diag += 1;
                            let col = basis.index_of_bits(c.swapped(u, v).bits());
                            entries.push((col, -1i64));
                        }
                    }
                    if diag != 0 {
                        entries.push((row, diag));
                    }
                    merge_entries(entries)
                })
                .collect()
        }
        OperatorKind::Translation => {
            if basis.geometry() != Geometry::Ring {
                return Err(Error::RequiresRing);
            }
            let mut rows = vec![Vec::new(); dim];
            for (col, c) in basis.states().iter().enumerate() {
                rows[basis.index_of_bits(c.translate().bits())].push((col, one.clone()));
            }
            return Ok(SparseOperator { dim, rows, symmetric: false });
        }
        OperatorKind::TotalSpin => {
            // 4 S² has integer entries; divide at the end
            let four_diag = (n * (n + 2)) as i64;
            let rows4: Vec<Vec<(usize, i64)>> = (0..dim)
                .into_par_iter()
                .map(|row| {
                    let c = basis.state(row);
                    let mut diag = four_diag;
                    let mut entries = Vec::new();
                    for i in 0..n {
                        for j in i + 1..n {
                            if c.is_down(i) != c.is_down(j) {
                                diag -= 4;
                                entries.push((basis.index_of_bits(c.swapped(i, j).bits()), 4i64));
                            }
                        }
                    }
                    entries.push((row, diag));
                    merge_entries(entries)
                })
                .collect();
            let four = T::from_i64(4).expect("integer");
            let rows = rows4
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|(c, v)| {
                            let t = T::from_i64(v).expect("integer");
                            (c, if v % 4 == 0 { T::from_i64(v / 4).expect("integer") } else { t / four.clone() })
                        })
                        .collect()
                })
                .collect();
            return Ok(SparseOperator { dim, rows, symmetric: true });
        }
    };
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|(c, v)| (c, T::from_i64(v).expect("integer"))).collect())
        .collect();
    Ok(SparseOperator { dim, rows, symmetric: true })
}

fn merge_entries(mut entries: Vec<(usize, i64)>) -> Vec<(usize, i64)> {
    entries.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(usize, i64)> = Vec::with_capacity(entries.len());
    for (c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|e| e.1 != 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_sector, Sector, SpinConfiguration};
    use nalgebra::DMatrix;

    fn ring(n: usize, k: usize) -> SectorBasis {
        enumerate_sector(Sector::ring(n, k).unwrap()).unwrap()
    }

    fn spectrum(m: &SparseOperator<f64>) -> Vec<f64> {
        let mut ev: Vec<f64> = m.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    #[test]
    fn edge_sets() {
        assert_eq!(EdgeSet::new(5, Geometry::Ring).unwrap().len(), 5);
        assert_eq!(EdgeSet::new(5, Geometry::Chain).unwrap().len(), 4);
        assert_eq!(EdgeSet::new(2, Geometry::Ring).unwrap_err(), Error::RingTooSmall(2));
        for e in EdgeSet::new(7, Geometry::Ring).unwrap().edges() {
            assert_ne!(e.0, e.1);
            assert!(e.0 < 7 && e.1 < 7);
        }
    }

    #[test]
    fn all_up_is_annihilated() {
        for n in 3..9 {
            let b = ring(n, 0);
            let y = apply_two_h(&b, &EdgeSet::for_basis(&b).unwrap(), &[1i64]).unwrap();
            assert_eq!(y, vec![0]);
        }
    }

    #[test]
    fn small_ring_spectra() {
        let h = build_sparse::<f64>(&ring(4, 1), OperatorKind::TwoH, 4096).unwrap();
        let ev = spectrum(&h);
        for (a, b) in ev.iter().zip([0.0, 2.0, 2.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let h = build_sparse::<f64>(&ring(4, 2), OperatorKind::TwoH, 4096).unwrap();
        let ev = spectrum(&h);
        for (a, b) in ev.iter().zip([0.0, 2.0, 2.0, 2.0, 4.0, 6.0]) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn dimension_mismatch() {
        let b = ring(4, 1);
        let e = EdgeSet::for_basis(&b).unwrap();
        assert!(matches!(apply_two_h(&b, &e, &[1.0; 3]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(apply_translation_op(&b, &[1.0; 5]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(apply_total_spin(&b, &[1.0; 2]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn translation_examples() {
        let b = ring(4, 1);
        let site1 = b.index_of(SpinConfiguration::from_down_sites(4, &[0]).unwrap()).unwrap();
        let site2 = b.index_of(SpinConfiguration::from_down_sites(4, &[1]).unwrap()).unwrap();
        let mut x = vec![0i64; 4];
        x[site1] = 1;
        let y = apply_translation_op(&b, &x).unwrap();
        assert_eq!(y[site2], 1);
        assert_eq!(y.iter().sum::<i64>(), 1);

        let b = ring(4, 2);
        let u = vec![1i64; b.dim()];
        assert_eq!(apply_translation_op(&b, &u).unwrap(), u);

        let c13 = b.index_of(SpinConfiguration::from_down_sites(4, &[0, 2]).unwrap()).unwrap();
        let c24 = b.index_of(SpinConfiguration::from_down_sites(4, &[1, 3]).unwrap()).unwrap();
        let mut x = vec![0i64; b.dim()];
        x[c13] = 1;
        x[c24] = -1;
        let y = apply_translation_op(&b, &x).unwrap();
        assert_eq!(y, x.iter().map(|v| -v).collect::<Vec<_>>());
    }

    #[test]
    fn total_spin_examples() {
        let b = ring(4, 0);
        assert_eq!(apply_total_spin(&b, &[1.0]).unwrap(), vec![6.0]);
        let b = ring(4, 1);
        assert_eq!(apply_total_spin(&b, &[1.0; 4]).unwrap(), vec![6.0; 4]);
        // L φ̂(-1) = Σ_k (-1)^k T^k (Ψ1 - Ψ2) = 2 Σ_k (-1)^k Ψ_{k+1}
        let x: Vec<f64> = b
            .states()
            .iter()
            .map(|c| {
                let site = c.down_sites().next().unwrap();
                if site % 2 == 0 { 2.0 } else { -2.0 }
            })
            .collect();
        let y = apply_total_spin(&b, &x).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_ring_casimir_is_fractional() {
        let b = ring(3, 0);
        assert_eq!(apply_total_spin(&b, &[1.0]).unwrap(), vec![3.75]);
        let s2 = build_sparse::<f64>(&ring(3, 1), OperatorKind::TotalSpin, 4096).unwrap();
        let mut ev = spectrum(&s2);
        ev.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - 0.75).abs() < 1e-12 && (ev[1] - 3.75).abs() < 1e-12);
    }

    #[test]
    fn materialized_matches_matrix_free() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (n, k) in [(6, 2), (7, 3), (8, 4)] {
            let b = ring(n, k);
            let e = EdgeSet::for_basis(&b).unwrap();
            let h = build_sparse::<f64>(&b, OperatorKind::TwoH, 4096).unwrap();
            let t = build_sparse::<f64>(&b, OperatorKind::Translation, 4096).unwrap();
            let s = build_sparse::<f64>(&b, OperatorKind::TotalSpin, 4096).unwrap();
            for _ in 0..100 {
                let x: Vec<f64> = (0..b.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let pairs = [
                    (h.matvec(&x).unwrap(), apply_two_h(&b, &e, &x).unwrap()),
                    (t.matvec(&x).unwrap(), apply_translation_op(&b, &x).unwrap()),
                    (s.matvec(&x).unwrap(), apply_total_spin(&b, &x).unwrap()),
                ];
                for (a, m) in pairs {
                    let err = a.iter().zip(&m).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                    assert!(err < 1e-12);
                }
            }
        }
    }

    #[test]
    fn build_examples() {
        let h = build_sparse::<i64>(&ring(4, 1), OperatorKind::TwoH, 4096).unwrap();
        assert_eq!(h.dim(), 4);
        assert_eq!(h.matvec(&[1; 4]).unwrap(), vec![0; 4]);

        let t = build_sparse::<i64>(&ring(6, 3), OperatorKind::Translation, 4096).unwrap();
        for row in t.rows() {
            assert_eq!(row.len(), 1);
            assert_eq!(row[0].1, 1);
        }

        let h = build_sparse::<i64>(&ring(6, 2), OperatorKind::TwoH, 4096).unwrap();
        assert_eq!(h.dim(), 15);
        for i in 0..15 {
            for j in 0..15 {
                assert_eq!(h.get(i, j), h.get(j, i));
            }
        }
        assert!(h.rows().iter().flatten().all(|(_, v)| *v != 0));
    }

    #[test]
    fn over_threshold() {
        let b = ring(12, 6);
        assert_eq!(
            build_sparse::<f64>(&b, OperatorKind::TwoH, 100).unwrap_err(),
            Error::OverThreshold { dim: 924, threshold: 100 }
        );
    }

    #[test]
    fn commutators_vanish() {
        for n in 4..=8 {
            for k in 0..=n / 2 {
                let b = ring(n, k);
                let h = build_sparse::<f64>(&b, OperatorKind::TwoH, 4096).unwrap().to_nalgebra();
                let t = build_sparse::<f64>(&b, OperatorKind::Translation, 4096).unwrap().to_nalgebra();
                let s = build_sparse::<f64>(&b, OperatorKind::TotalSpin, 4096).unwrap().to_nalgebra();
                assert!((&h * &t - &t * &h).norm() < 1e-12);
                assert!((&h * &s - &s * &h).norm() < 1e-12);
                let mut tn = DMatrix::<f64>::identity(b.dim(), b.dim());
                for _ in 0..n {
                    tn = &t * tn;
                }
                assert!((tn - DMatrix::identity(b.dim(), b.dim())).norm() == 0.0);
            }
        }
    }
}
