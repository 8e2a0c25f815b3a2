//! Sector spectra: dense diagonalization, Lanczos for the low end, and
//! labeling of eigenspaces by total spin and lattice momentum.
//!
//! Labels are assigned per degenerate cluster. Inside a cluster `S²_tot` is
//! diagonalized first (accidental degeneracies mix spins), then the
//! translation operator is diagonalized inside each fixed-spin block, giving
//! momentum indices `j` with `T ψ = e^{2πij/N} ψ`.

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{orbit_decompose, Geometry, Sector, SectorBasis, TranslationOrbit};
use crate::error::{Error, Result};
use crate::operators::{self, build_sparse, EdgeSet, OperatorKind, SparseOperator, DEFAULT_DENSE_THRESHOLD};
use crate::scalar::Real;

/// Total spin stored as `2s`, so half-integers are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwiceSpin(pub u32);

impl TwiceSpin {
    pub fn from_spin(s: f64) -> Self {
        Self((2.0 * s).round() as u32)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// `s(s+1)`.
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }

    /// Spin of the highest-weight states with `deviates` spin deviates on `n` sites.
    pub fn for_deviates(n_sites: usize, deviates: usize) -> Self {
        Self((n_sites - 2 * deviates) as u32)
    }

    /// Number of spin deviates `N/2 - s`.
    pub fn deviates(self, n_sites: usize) -> usize {
        (n_sites - self.0 as usize) / 2
    }
}

impl fmt::Display for TwiceSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
    /// Dense diagonalization inside each translation-momentum block.
    #[serde(rename = "momentum-blocks")]
    MomentumBlocks,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledLevel<T> {
    pub energy_2h: T,
    pub total_spin: Option<TwiceSpin>,
    /// Sorted, distinct momentum indices in `0..N`.
    pub momenta: Vec<usize>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct SpectrumReport<T: Real> {
    pub sector: Sector,
    pub method: Method,
    pub tolerance: T,
    pub levels: Vec<LabeledLevel<T>>,
    /// Raw eigenvalues, ascending.
    pub eigenvalues: Vec<T>,
    /// Matching eigenvectors as columns, when kept.
    pub eigenvectors: Option<DMatrix<T>>,
    pub residuals: Vec<T>,
}

impl<T: Real> SpectrumReport<T> {
    pub fn total_multiplicity(&self) -> usize {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    /// Levels carrying the given total spin.
    pub fn with_spin(&self, s: TwiceSpin) -> impl Iterator<Item = &LabeledLevel<T>> {
        self.levels.iter().filter(move |l| l.total_spin == Some(s))
    }

    /// Lowest labeled energy with total spin `s`.
    pub fn min_with_spin(&self, s: TwiceSpin) -> Option<T> {
        self.with_spin(s).map(|l| l.energy_2h).reduce(|a, b| if b < a { b } else { a })
    }

    /// Lowest energy among levels whose momentum set meets `js`.
    pub fn min_with_momentum(&self, js: &[usize]) -> Option<T> {
        self.levels
            .iter()
            .filter(|l| l.momenta.iter().any(|j| js.contains(j)))
            .map(|l| l.energy_2h)
            .reduce(|a, b| if b < a { b } else { a })
    }
}

/// Solver knobs. Defaults follow the documented tolerances.
#[derive(Clone, Debug)]
pub struct SolverConfig<T> {
    pub dense_threshold: usize,
    /// Relative clustering tolerance on `2H` eigenvalues.
    pub degeneracy_tol: T,
    /// Allowed distance of an `S²` eigenvalue from the nearest `s(s+1)`.
    pub label_tol: T,
    pub dense_residual_tol: T,
    pub lanczos_residual_tol: T,
    pub lanczos_max_iter: usize,
    pub seed: u64,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        let eps = T::default_epsilon();
        let floor = |x: f64| {
            let x = T::lit(x);
            let e = eps * T::lit(1e4);
            if e > x { e } else { x }
        };
        Self {
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            degeneracy_tol: floor(1e-9),
            label_tol: floor(1e-6),
            dense_residual_tol: floor(1e-10),
            lanczos_residual_tol: floor(1e-8),
            lanczos_max_iter: 600,
            seed: 0x5eed,
        }
    }
}

fn sparse_columns<T: Real>(
    cols: &DMatrix<T>,
    f: impl Fn(&[T]) -> Result<Vec<T>> + Sync,
) -> Result<DMatrix<T>> {
    let images: Vec<Vec<T>> = (0..cols.ncols())
        .into_par_iter()
        .map(|j| f(cols.column(j).as_slice()))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(cols.nrows(), cols.ncols(), |i, j| images[j][i]))
}

fn column_residuals<T: Real>(basis: &SectorBasis, vecs: &DMatrix<T>, vals: &[T]) -> Result<Vec<T>> {
    let edges = EdgeSet::for_basis(basis)?;
    let hv = sparse_columns(vecs, |x| operators::apply_two_h(basis, &edges, x))?;
    Ok((0..vals.len())
        .map(|j| (hv.column(j) - vecs.column(j) * vals[j]).norm())
        .collect())
}

/// Groups ascending values into runs whose neighbours differ by at most
/// `tol · max(1, |E|)`.
pub fn cluster_sorted<T: Real>(values: &[T], tol: T) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let scale = values[i].abs().max(T::one());
            values[i] - values[i - 1] > tol * scale
        };
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Every eigenpair of `2H` on the sector.
pub fn full_spectrum<T: Real>(basis: &SectorBasis, config: &SolverConfig<T>) -> Result<SpectrumReport<T>> {
    let h = build_sparse::<T>(basis, OperatorKind::TwoH, config.dense_threshold)?.to_nalgebra();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues"));
    let values: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(basis.dim(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);

    let residuals = column_residuals(basis, &vectors, &values)?;
    for (e, r) in values.iter().zip(&residuals) {
        if *r > config.dense_residual_tol {
            return Err(Error::ResidualTooLarge {
                energy: e.to_f64_lossy(),
                residual: r.to_f64_lossy(),
                tolerance: config.dense_residual_tol.to_f64_lossy(),
            });
        }
    }
    let levels = unlabeled_levels(&values, config.degeneracy_tol);
    Ok(SpectrumReport {
        sector: basis.sector(),
        method: Method::Dense,
        tolerance: config.degeneracy_tol,
        levels,
        eigenvalues: values,
        eigenvectors: Some(vectors),
        residuals,
    })
}

fn unlabeled_levels<T: Real>(values: &[T], tol: T) -> Vec<LabeledLevel<T>> {
    cluster_sorted(values, tol)
        .into_iter()
        .map(|r| LabeledLevel {
            energy_2h: mean(&values[r.clone()]),
            total_spin: None,
            momenta: Vec::new(),
            multiplicity: r.len(),
        })
        .collect()
}

fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize(xs.len()).expect("length")
}

/// Result of a Lanczos run on an arbitrary symmetric operator.
#[derive(Clone, Debug)]
pub struct LanczosResult<T: Real> {
    pub values: Vec<T>,
    pub vectors: DMatrix<T>,
    pub residuals: Vec<T>,
    pub iterations: usize,
}

/// Lanczos with full reorthogonalization for the `count` lowest distinct
/// eigenvalues reachable from a seeded random start vector.
///
/// Fewer than `count` values are returned only when the Krylov space is
/// exhausted first.
pub fn lanczos<T: Real>(
    dim: usize,
    apply: impl Fn(&[T]) -> Result<Vec<T>>,
    count: usize,
    tol: T,
    max_iter: usize,
    seed: u64,
) -> Result<LanczosResult<T>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = DVector::<T>::from_fn(dim, |_, _| T::lit(rng.random_range(-1.0..1.0)));
    q /= q.norm();

    let max_iter = max_iter.min(dim).max(1);
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(max_iter);
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut exhausted = false;
    let mut scale = T::one();

    loop {
        let w = DVector::from_vec(apply(q.as_slice())?);
        let a = q.dot(&w);
        let mut w = w - &q * a;
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            w -= prev * b;
        }
        basis.push(q.clone());
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = v.dot(&w);
                w -= v * c;
            }
        }
        let b = w.norm();
        scale = scale.max(a.abs()).max(b);
        let m = basis.len();
        if b <= T::lit(1e-12) * scale {
            exhausted = true;
        }

        let done_iterating = exhausted || m >= max_iter;
        if done_iterating || m.is_multiple_of(8) || m == count {
            let (vals, coeffs) = tridiagonal_eigen(&alpha, &beta);
            let take = count.min(vals.len());
            let estimates: Vec<T> = (0..take).map(|i| (b * coeffs[(m - 1, i)]).abs()).collect();
            let converged = estimates.iter().all(|e| *e <= tol * T::lit(0.1));
            if converged && (take == count || exhausted) || done_iterating {
                let vecs = DMatrix::from_fn(dim, take, |r, c| {
                    (0..m).fold(T::zero(), |acc, l| acc + basis[l][r] * coeffs[(l, c)])
                });
                let mut residuals = Vec::with_capacity(take);
                for c in 0..take {
                    let x = vecs.column(c).into_owned();
                    let ax = DVector::from_vec(apply(x.as_slice())?);
                    residuals.push((ax - x * vals[c]).norm());
                }
                let worst = residuals.iter().fold(T::zero(), |a, &b| a.max(b));
                if worst > tol {
                    return Err(Error::NoConvergence { iterations: m, residual: worst.to_f64_lossy() });
                }
                return Ok(LanczosResult { values: vals[..take].to_vec(), vectors: vecs, residuals, iterations: m });
            }
        }
        beta.push(b);
        q = w / b;
    }
}

/// Eigen-decomposition of the symmetric tridiagonal matrix, ascending.
fn tridiagonal_eigen<T: Real>(alpha: &[T], beta: &[T]) -> (Vec<T>, DMatrix<T>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            T::zero()
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite"));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// The `count` lowest eigenvalues of `2H` on the sector.
pub fn lowest_band<T: Real>(
    basis: &SectorBasis,
    count: usize,
    config: &SolverConfig<T>,
) -> Result<SpectrumReport<T>> {
    let edges = EdgeSet::for_basis(basis)?;
    let res = lanczos(
        basis.dim(),
        |x| operators::apply_two_h(basis, &edges, x),
        count,
        config.lanczos_residual_tol,
        config.lanczos_max_iter,
        config.seed,
    )?;
    let levels = res
        .values
        .iter()
        .map(|&e| LabeledLevel { energy_2h: e, total_spin: None, momenta: Vec::new(), multiplicity: 1 })
        .collect();
    Ok(SpectrumReport {
        sector: basis.sector(),
        method: Method::Lanczos,
        tolerance: config.lanczos_residual_tol,
        levels,
        eigenvalues: res.values,
        eigenvectors: Some(res.vectors),
        residuals: res.residuals,
    })
}

/// Lowest `2H` eigenvalue among highest-weight states of the sector, i.e.
/// states of total spin `s = N/2 - k`.
///
/// Runs Lanczos on `2H + c (S² - s(s+1))` with `c = N`; every other spin is
/// pushed above the whole `2H` spectrum, which is bounded by `2N`.
pub fn lowest_highest_weight<T: Real>(basis: &SectorBasis, config: &SolverConfig<T>) -> Result<(T, T)> {
    let n = basis.n_sites();
    let edges = EdgeSet::for_basis(basis)?;
    let s = TwiceSpin::for_deviates(n, basis.sector().n_magnons);
    let target = T::lit(s.casimir());
    let c = T::from_usize(n).expect("size");
    let res = lanczos(
        basis.dim(),
        |x| {
            let h = operators::apply_two_h(basis, &edges, x)?;
            let s2 = operators::apply_total_spin(basis, x)?;
            Ok(h.iter().zip(&s2).zip(x).map(|((&h, &s2), &x)| h + c * (s2 - target * x)).collect())
        },
        1,
        config.lanczos_residual_tol * c,
        config.lanczos_max_iter,
        config.seed,
    )?;
    let v = res.vectors.column(0).into_owned();
    let s2 = DVector::from_vec(operators::apply_total_spin(basis, v.as_slice())?);
    let q = v.dot(&s2);
    if (q - target).abs() > config.label_tol {
        return Err(Error::AmbiguousSpin { energy: res.values[0].to_f64_lossy(), rayleigh: q.to_f64_lossy() });
    }
    Ok((res.values[0], res.residuals[0]))
}

/// Splits clusters by total spin and attaches momentum labels.
pub fn label_levels<T: Real>(
    basis: &SectorBasis,
    report: &SpectrumReport<T>,
    config: &SolverConfig<T>,
) -> Result<SpectrumReport<T>> {
    let vectors = report.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    let n = basis.n_sites();
    let ring = basis.geometry() == Geometry::Ring;
    let two_pi = T::two_pi();
    let n_t = T::from_usize(n).expect("size");

    let clusters = cluster_sorted(&report.eigenvalues, config.degeneracy_tol);
    let labeled: Vec<Vec<LabeledLevel<T>>> = clusters
        .into_par_iter()
        .map(|range| -> Result<Vec<LabeledLevel<T>>> {
            let energy = mean(&report.eigenvalues[range.clone()]);
            let v = vectors.columns(range.start, range.len()).into_owned();
            let sv = sparse_columns(&v, |x| operators::apply_total_spin(basis, x))?;
            let m = v.transpose() * &sv;
            let m = (&m + m.transpose()) * T::lit(0.5);
            let eig = SymmetricEigen::new(m);
            let rotated = &v * &eig.eigenvectors;
            let s_rot = &sv * &eig.eigenvectors;

            let mut groups: Vec<(TwiceSpin, Vec<usize>)> = Vec::new();
            for (c, &q) in eig.eigenvalues.iter().enumerate() {
                let s = spin_from_casimir(q, n, config.label_tol)
                    .ok_or(Error::AmbiguousSpin { energy: energy.to_f64_lossy(), rayleigh: q.to_f64_lossy() })?;
                let resid = (s_rot.column(c) - rotated.column(c) * T::lit(s.casimir())).norm();
                if resid > config.lanczos_residual_tol.max(config.label_tol) {
                    return Err(Error::AmbiguousSpin { energy: energy.to_f64_lossy(), rayleigh: q.to_f64_lossy() });
                }
                match groups.iter_mut().find(|(g, _)| *g == s) {
                    Some((_, cols)) => cols.push(c),
                    None => groups.push((s, vec![c])),
                }
            }

            let mut out = Vec::with_capacity(groups.len());
            for (s, cols) in groups {
                let w = DMatrix::from_fn(v.nrows(), cols.len(), |r, c| rotated[(r, cols[c])]);
                let momenta = if ring {
                    let tw = sparse_columns(&w, |x| operators::apply_translation_op(basis, x))?;
                    let t = w.transpose() * tw;
                    let mut js = Vec::new();
                    for z in t.complex_eigenvalues().iter() {
                        let angle = z.im.atan2(z.re);
                        let jf = angle * n_t / two_pi;
                        let jr = jf.round();
                        if (jf - jr).abs() > T::lit(1e-6) || ((z.re * z.re + z.im * z.im).sqrt() - T::one()).abs() > T::lit(1e-6) {
                            return Err(Error::AmbiguousMomentum {
                                energy: energy.to_f64_lossy(),
                                angle: angle.to_f64_lossy(),
                            });
                        }
                        let j = jr.to_f64_lossy() as i64;
                        js.push(j.rem_euclid(n as i64) as usize);
                    }
                    js.sort_unstable();
                    js.dedup();
                    js
                } else {
                    Vec::new()
                };
                out.push(LabeledLevel { energy_2h: energy, total_spin: Some(s), momenta, multiplicity: cols.len() });
            }
            out.sort_by_key(|a| a.total_spin);
            Ok(out)
        })
        .collect::<Result<_>>()?;

    Ok(SpectrumReport { levels: labeled.into_iter().flatten().collect(), ..report.clone() })
}

/// Nearest admissible `2s` for an `S²` eigenvalue, if within tolerance.
fn spin_from_casimir<T: Real>(q: T, n_sites: usize, tol: T) -> Option<TwiceSpin> {
    let qf = q.to_f64_lossy();
    let two_s = ((1.0 + 4.0 * qf.max(0.0)).sqrt() - 1.0).round() as i64;
    let parity = n_sites as i64 % 2;
    let candidates = [two_s - 1, two_s, two_s + 1];
    candidates
        .iter()
        .filter(|&&c| c >= 0 && c % 2 == parity && c as usize <= n_sites)
        .map(|&c| TwiceSpin(c as u32))
        .find(|s| (q - T::lit(s.casimir())).abs() < tol)
}

/// Eigen-data of one momentum block: `(energy, spin, multiplicity)` per
/// spin-resolved cluster, plus raw eigenvalues and residuals.
struct BlockLevels<T> {
    levels: Vec<(T, TwiceSpin, usize)>,
    eigenvalues: Vec<T>,
    residuals: Vec<T>,
}

/// Normalized Bloch sum `Σ_l ω^{-l} T^l |r⟩` over an orbit, as sparse entries.
fn bloch_vector<T: Real>(basis: &SectorBasis, orbit: &TranslationOrbit, j: usize) -> Vec<(usize, Complex<T>)> {
    let n = T::from_usize(basis.n_sites()).expect("size");
    let norm = T::from_usize(orbit.period).expect("size").sqrt().recip();
    orbit
        .members()
        .enumerate()
        .map(|(l, c)| {
            let angle = -T::two_pi() * T::from_usize(j * l).expect("size") / n;
            let idx = basis.index_of(c).expect("orbit member in sector");
            (idx, Complex::new(angle.cos() * norm, angle.sin() * norm))
        })
        .collect()
}

/// Hermitian matrix of a real symmetric sparse operator between Bloch vectors.
fn block_matrix<T: Real>(op: &SparseOperator<T>, vectors: &[Vec<(usize, Complex<T>)>]) -> DMatrix<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut owner: Vec<Option<(usize, Complex<T>)>> = vec![None; op.dim()];
    for (a, v) in vectors.iter().enumerate() {
        for &(i, c) in v {
            owner[i] = Some((a, c.conj()));
        }
    }
    let b = vectors.len();
    let columns: Vec<Vec<Complex<T>>> = vectors
        .par_iter()
        .map(|v| {
            let mut col = vec![zero; b];
            for &(i, c) in v {
                // symmetric: row i lists column i
                for &(j, x) in &op.rows()[i] {
                    if let Some((a, w)) = owner[j] {
                        col[a] += w * c * Complex::new(x, T::zero());
                    }
                }
            }
            col
        })
        .collect();
    let m = DMatrix::from_fn(b, b, |r, c| columns[c][r]);
    (&m + m.adjoint()) * Complex::new(T::lit(0.5), T::zero())
}

fn block_levels<T: Real>(
    basis: &SectorBasis,
    two_h: &SparseOperator<T>,
    total_spin: &SparseOperator<T>,
    orbits: &[TranslationOrbit],
    j: usize,
    config: &SolverConfig<T>,
) -> Result<BlockLevels<T>> {
    let n = basis.n_sites();
    let vectors: Vec<Vec<(usize, Complex<T>)>> = orbits
        .iter()
        .filter(|o| (j * o.period).is_multiple_of(n))
        .map(|o| bloch_vector(basis, o, j))
        .collect();
    if vectors.is_empty() {
        return Ok(BlockLevels { levels: Vec::new(), eigenvalues: Vec::new(), residuals: Vec::new() });
    }
    let h = block_matrix(two_h, &vectors);
    let s2 = block_matrix(total_spin, &vectors);
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues"));
    let values: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(vectors.len(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    let hv = &h * &vecs;
    let residuals: Vec<T> = (0..values.len())
        .map(|c| (hv.column(c) - vecs.column(c) * Complex::new(values[c], T::zero())).norm())
        .collect();

    let mut levels = Vec::new();
    for range in cluster_sorted(&values, config.degeneracy_tol) {
        let energy = mean(&values[range.clone()]);
        let y = vecs.columns(range.start, range.len()).into_owned();
        let m = y.adjoint() * &s2 * &y;
        let m = (&m + m.adjoint()) * Complex::new(T::lit(0.5), T::zero());
        let mut counts: Vec<(TwiceSpin, usize)> = Vec::new();
        for &q in SymmetricEigen::new(m).eigenvalues.iter() {
            let s = spin_from_casimir(q, n, config.label_tol)
                .ok_or(Error::AmbiguousSpin { energy: energy.to_f64_lossy(), rayleigh: q.to_f64_lossy() })?;
            match counts.iter_mut().find(|(t, _)| *t == s) {
                Some((_, c)) => *c += 1,
                None => counts.push((s, 1)),
            }
        }
        levels.extend(counts.into_iter().map(|(s, c)| (energy, s, c)));
    }
    Ok(BlockLevels { levels, eigenvalues: values, residuals })
}

/// Labeled spectrum of a ring sector from dense diagonalization of `2H` and
/// `S²` inside each momentum block (Bloch sums over translation orbits).
/// Momentum labels come from the block; no eigenvectors are kept.
pub fn momentum_block_spectrum<T: Real>(basis: &SectorBasis, config: &SolverConfig<T>) -> Result<SpectrumReport<T>> {
    let orbits = orbit_decompose(basis)?;
    let n = basis.n_sites();
    let largest = (0..n)
        .map(|j| orbits.iter().filter(|o| (j * o.period) % n == 0).count())
        .max()
        .unwrap_or(0);
    if largest > config.dense_threshold {
        return Err(Error::OverThreshold { dim: largest, threshold: config.dense_threshold });
    }
    let two_h = build_sparse::<T>(basis, OperatorKind::TwoH, usize::MAX)?;
    let total_spin = build_sparse::<T>(basis, OperatorKind::TotalSpin, usize::MAX)?;
    let blocks: Vec<BlockLevels<T>> = (0..n)
        .into_par_iter()
        .map(|j| block_levels(basis, &two_h, &total_spin, &orbits, j, config))
        .collect::<Result<_>>()?;

    let mut pairs: Vec<(T, T)> = Vec::with_capacity(basis.dim());
    let mut entries: Vec<(T, TwiceSpin, usize, usize)> = Vec::new();
    for (j, b) in blocks.into_iter().enumerate() {
        pairs.extend(b.eigenvalues.into_iter().zip(b.residuals));
        entries.extend(b.levels.into_iter().map(|(e, s, m)| (e, s, m, j)));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
    for &(e, r) in &pairs {
        if r > config.dense_residual_tol {
            return Err(Error::ResidualTooLarge {
                energy: e.to_f64_lossy(),
                residual: r.to_f64_lossy(),
                tolerance: config.dense_residual_tol.to_f64_lossy(),
            });
        }
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
    let energies: Vec<T> = entries.iter().map(|e| e.0).collect();
    let mut levels = Vec::new();
    for range in cluster_sorted(&energies, config.degeneracy_tol) {
        let group = &entries[range.clone()];
        let energy = mean(&energies[range]);
        let mut spins: Vec<TwiceSpin> = group.iter().map(|g| g.1).collect();
        spins.sort();
        spins.dedup();
        for s in spins {
            let mut momenta: Vec<usize> = group.iter().filter(|g| g.1 == s).map(|g| g.3).collect();
            momenta.sort_unstable();
            momenta.dedup();
            let multiplicity = group.iter().filter(|g| g.1 == s).map(|g| g.2).sum();
            levels.push(LabeledLevel { energy_2h: energy, total_spin: Some(s), momenta, multiplicity });
        }
    }
    let (eigenvalues, residuals) = pairs.into_iter().unzip();
    Ok(SpectrumReport {
        sector: basis.sector(),
        method: Method::MomentumBlocks,
        tolerance: config.degeneracy_tol,
        levels,
        eigenvalues,
        eigenvectors: None,
        residuals,
    })
}

/// Full spectrum of a sector with spin and momentum labels: momentum blocks
/// on rings, one dense diagonalization on chains.
pub fn labeled_spectrum<T: Real>(basis: &SectorBasis, config: &SolverConfig<T>) -> Result<SpectrumReport<T>> {
    if basis.geometry() == Geometry::Ring {
        return momentum_block_spectrum(basis, config);
    }
    let raw = full_spectrum(basis, config)?;
    label_levels(basis, &raw, config)
}
