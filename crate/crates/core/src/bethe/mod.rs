//! Bethe-ansatz roots for the ring, found by Newton's method and continued in N.
//!
//! Rapidities `u_j` solve, in logarithmic form,
//!
//! ```text
//! N p(u_j) = 2π n_j + Σ_{l≠j} θ(u_j − u_l),
//! p(u) = −i log((u + i/2)/(u − i/2)),   θ(x) = −i log((x + i)/(x − i)),
//! ```
//!
//! with principal logarithms and integer mode numbers `n_j`. The state has
//! `2H = Σ_j 1/(u_j² + 1/4)` and momentum `(2π/N) Σ n_j`. A single magnon
//! with mode `j` sits at `u = cot(πj/N)/2`.
//!
//! At low density the lowest band (all `n_j = 1`) is close to
//! `u_j = cot(π/N)/2 + i √(2N)/(2π) x_j` with `x_j` the zeros of the Hermite
//! polynomial `H_k`, which is used as the Newton starting point.

mod continuation;
mod elliptic;

pub use continuation::{continue_in_n, ContinuationOutcome, ContinuationRun, ContinuationSchedule};
pub use elliptic::{
    dhar_shastry_eps, elliptic_pair, elliptic_series, sutherland_curve, sutherland_sweep, CurvePoint, EllipticPair,
};

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Closer roots than this count as a collision.
pub const MIN_ROOT_SEPARATION: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct BetheState<T: Real> {
    /// Ring length; real-valued during continuation.
    pub n_param: T,
    pub k: usize,
    pub roots: Vec<Complex<T>>,
    pub mode_numbers: Vec<i64>,
    pub residual_norm: T,
    pub converged: bool,
}

impl<T: Real> BetheState<T> {
    /// An unrefined state; the residual is evaluated on construction when possible.
    pub fn new(n_param: T, roots: Vec<Complex<T>>, mode_numbers: Vec<i64>) -> Result<Self> {
        if roots.len() != mode_numbers.len() {
            return Err(Error::DimensionMismatch { expected: roots.len(), found: mode_numbers.len() });
        }
        let mut s = Self { n_param, k: roots.len(), roots, mode_numbers, residual_norm: T::zero(), converged: false };
        s.residual_norm = norm(&bethe_residual(&s)?);
        Ok(s)
    }

    /// Total momentum as an index `j` with `P = 2πj/N`.
    pub fn momentum_index(&self) -> i64 {
        self.mode_numbers.iter().sum()
    }

    /// Largest imbalance between the root multiset and its complex conjugate.
    pub fn conjugation_defect(&self) -> T {
        self.roots
            .iter()
            .map(|r| {
                let c = r.conj();
                self.roots.iter().map(|s| abs(*s - c)).fold(T::max_value().expect("bounded"), |a, b| a.min(b))
            })
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn energy(&self) -> Result<T> {
        energy_from_roots(self)
    }
}

fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
}

pub(crate) fn abs<T: Real>(z: Complex<T>) -> T {
    ComplexField::modulus(z)
}

fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// `−i log((x + ic)/(x − ic))` with the principal logarithm.
///
/// The quotient is formed as `(x + ic)² / (x² + c²)` so that for real `x`
/// its imaginary part carries the exact sign of `x`; `x = 0` lands on the
/// upper side of the cut.
fn phase<T: Real>(x: Complex<T>, c: T) -> Complex<T> {
    let ic = Complex::new(T::zero(), c);
    let num = (x + ic) * (x + ic);
    let den = x * x + Complex::new(c * c, T::zero());
    -i_unit::<T>() * ComplexField::ln(num / den)
}

fn check_separation<T: Real>(roots: &[Complex<T>]) -> Result<()> {
    let guard = T::lit(MIN_ROOT_SEPARATION);
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if abs(roots[i] - roots[j]) < guard {
                return Err(Error::RootCollision(i, j));
            }
        }
    }
    Ok(())
}

/// Logarithmic-form residuals `N p(u_j) − 2π n_j − Σ θ(u_j − u_l)`.
pub fn bethe_residual<T: Real>(state: &BetheState<T>) -> Result<Vec<Complex<T>>> {
    check_separation(&state.roots)?;
    let half = T::lit(0.5);
    let n = Complex::new(state.n_param, T::zero());
    let two_pi = T::two_pi();
    Ok(state
        .roots
        .iter()
        .enumerate()
        .map(|(j, &u)| {
            let mut r = n * phase(u, half) - Complex::new(two_pi * T::from_i64(state.mode_numbers[j]).expect("mode"), T::zero());
            for (l, &v) in state.roots.iter().enumerate() {
                if l != j {
                    r -= phase(u - v, T::one());
                }
            }
            r
        })
        .collect())
}

fn jacobian<T: Real>(state: &BetheState<T>) -> DMatrix<Complex<T>> {
    let k = state.k;
    let one = Complex::new(T::one(), T::zero());
    let quarter = Complex::new(T::lit(0.25), T::zero());
    let two = Complex::new(T::lit(2.0), T::zero());
    let n = Complex::new(state.n_param, T::zero());
    let u = &state.roots;
    DMatrix::from_fn(k, k, |j, l| {
        if j == l {
            let mut d = -n / (u[j] * u[j] + quarter);
            for (m, &v) in u.iter().enumerate() {
                if m != j {
                    let x = u[j] - v;
                    d += two / (x * x + one);
                }
            }
            d
        } else {
            let x = u[j] - u[l];
            -two / (x * x + one)
        }
    })
}

/// Newton iteration knobs.
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions<T> {
    pub max_iter: usize,
    pub tol: T,
    /// Backtrack along the Newton direction until the residual decreases.
    pub damped: bool,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        let floor = T::default_epsilon() * T::lit(1e4);
        let tol = T::lit(1e-10);
        Self { max_iter: 50, tol: if floor > tol { floor } else { tol }, damped: false }
    }
}

/// Refines the roots at fixed `N` and mode numbers.
pub fn newton_refine<T: Real>(state: &BetheState<T>, options: &NewtonOptions<T>) -> Result<BetheState<T>> {
    let mut cur = state.clone();
    let mut r = bethe_residual(&cur)?;
    let mut rn = norm(&r);
    if cur.k == 0 || rn <= options.tol {
        cur.residual_norm = rn;
        cur.converged = true;
        return Ok(cur);
    }
    for _ in 0..options.max_iter {
        let step = jacobian(&cur).lu().solve(&DVector::from_vec(r.clone())).ok_or(Error::SingularJacobian)?;
        if step.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        let mut scale = T::one();
        let mut accepted = None;
        for _ in 0..if options.damped { 12 } else { 1 } {
            let mut trial = cur.clone();
            for (u, s) in trial.roots.iter_mut().zip(step.iter()) {
                *u -= *s * scale;
            }
            match bethe_residual(&trial) {
                Ok(tr) => {
                    let tn = norm(&tr);
                    if tn.is_finite() && (!options.damped || tn < rn) {
                        accepted = Some((trial, tr, tn));
                        break;
                    }
                }
                Err(Error::RootCollision(..)) if options.damped => {}
                Err(e) => return Err(e),
            }
            scale *= T::lit(0.5);
        }
        let Some((next, nr, nn)) = accepted else {
            break;
        };
        cur = next;
        r = nr;
        rn = nn;
        if rn <= options.tol {
            cur.residual_norm = rn;
            cur.converged = true;
            return Ok(cur);
        }
    }
    Err(Error::Divergence { iterations: options.max_iter, residual: rn.to_f64_lossy() })
}

/// Zeros of the physicists' Hermite polynomial `H_k`, ascending
/// (eigenvalues of its Jacobi matrix).
pub fn hermite_zeros<T: Real>(k: usize) -> Vec<T> {
    if k == 0 {
        return Vec::new();
    }
    let jac = DMatrix::from_fn(k, k, |i, j| {
        if i + 1 == j || j + 1 == i {
            (T::from_usize(i.max(j)).expect("size") * T::lit(0.5)).sqrt()
        } else {
            T::zero()
        }
    });
    let mut z: Vec<T> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    z.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    z
}

/// Hermite-point starting guess for the lowest band (all mode numbers 1).
/// `scale` multiplies the low-density spread `√(2N)/(2π)`; 1 is the default.
pub fn hermite_init<T: Real>(k: usize, n_sites: T, scale: T) -> Result<BetheState<T>> {
    if !(n_sites > T::from_usize(2 * k).expect("size")) {
        return Err(Error::InvalidParameter(format!("Hermite start needs N > 2k (k = {k})")));
    }
    let center = (T::pi() / n_sites).tan().recip() * T::lit(0.5);
    let spread = scale * (T::lit(2.0) * n_sites).sqrt() / T::two_pi();
    let roots = hermite_zeros::<T>(k).into_iter().map(|x| Complex::new(center, spread * x)).collect();
    BetheState::new(n_sites, roots, vec![1; k])
}

/// One magnon with momentum `2πj/N`. For `j = 0` the rapidity is infinite:
/// the state is the lowered ferromagnetic state, returned with no roots.
pub fn single_magnon<T: Real>(n_sites: usize, j: usize) -> Result<BetheState<T>> {
    if n_sites < 2 || j >= n_sites {
        return Err(Error::InvalidParameter(format!("momentum index {j} out of range for N = {n_sites}")));
    }
    let n = T::from_usize(n_sites).expect("size");
    if j == 0 {
        let mut s = BetheState::new(n, Vec::new(), Vec::new())?;
        s.converged = true;
        return Ok(s);
    }
    let angle = T::pi() * T::from_usize(j).expect("size") / n;
    let u = if 2 * j == n_sites { T::zero() } else { angle.cos() / angle.sin() * T::lit(0.5) };
    // principal branch: p ∈ (−π, π]
    let mode = if 2 * j > n_sites { j as i64 - n_sites as i64 } else { j as i64 };
    let mut s = BetheState::new(n, vec![Complex::new(u, T::zero())], vec![mode])?;
    s.converged = s.residual_norm <= T::lit(1e-9);
    Ok(s)
}

/// `2H = Σ 1/(u_j² + 1/4)`; only meaningful at integer `N`.
pub fn energy_from_roots<T: Real>(state: &BetheState<T>) -> Result<T> {
    let n = state.n_param;
    if (n - n.round()).abs() > T::default_epsilon() * T::lit(64.0) * n.abs().max(T::one()) {
        return Err(Error::NonIntegerLength(n.to_f64_lossy()));
    }
    let quarter = Complex::new(T::lit(0.25), T::zero());
    let e: Complex<T> = state.roots.iter().map(|&u| (u * u + quarter).inv()).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    Ok(e.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hermite_zeros_small() {
        assert!(hermite_zeros::<f64>(1)[0].abs() < 1e-15);
        let z = hermite_zeros::<f64>(2);
        assert!((z[0] + 0.5f64.sqrt()).abs() < 1e-14 && (z[1] - 0.5f64.sqrt()).abs() < 1e-14);
        let z = hermite_zeros::<f64>(3);
        assert!((z[2] - 1.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn single_magnon_residual_and_energy() {
        for n in 2..=16usize {
            for j in 0..n {
                let s = single_magnon::<f64>(n, j).unwrap();
                assert!(s.converged, "N={n} j={j}");
                let want = 2.0 * (1.0 - (2.0 * PI * j as f64 / n as f64).cos());
                assert!((energy_from_roots(&s).unwrap() - want).abs() < 1e-10);
            }
        }
        let s = single_magnon::<f64>(6, 1).unwrap();
        assert!((energy_from_roots(&s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_state() {
        let s = BetheState::<f64>::new(8.0, vec![], vec![]).unwrap();
        assert!(bethe_residual(&s).unwrap().is_empty());
        assert!(newton_refine(&s, &NewtonOptions::default()).unwrap().converged);
        assert_eq!(energy_from_roots(&s).unwrap(), 0.0);
    }

    #[test]
    fn non_integer_length() {
        let mut s = hermite_init::<f64>(2, 60.0, 1.0).unwrap();
        s.n_param = 59.5;
        assert!(matches!(energy_from_roots(&s), Err(Error::NonIntegerLength(_))));
    }

    #[test]
    fn collision_is_reported() {
        let s = BetheState::<f64> {
            n_param: 10.0,
            k: 2,
            roots: vec![Complex::new(1.0, 0.0); 2],
            mode_numbers: vec![1, 1],
            residual_norm: 0.0,
            converged: false,
        };
        assert!(matches!(bethe_residual(&s), Err(Error::RootCollision(0, 1))));
    }

    #[test]
    fn hermite_start_converges() {
        for k in 1..=3 {
            let s = hermite_init::<f64>(k, 60.0, 1.0).unwrap();
            let r = newton_refine(&s, &NewtonOptions { max_iter: 20, ..Default::default() }).unwrap();
            assert!(r.converged && r.residual_norm < 1e-10, "k={k}");
            assert!(r.conjugation_defect() < 1e-8);
            let again = newton_refine(&r, &NewtonOptions { max_iter: 1, ..Default::default() }).unwrap();
            assert_eq!(again.roots, r.roots);
        }
    }
}
