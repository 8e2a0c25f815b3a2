//! Complete elliptic integrals and the large-N energy-density curves.
//!
//! `K(k)` and `E(k)` take the modulus `k` (the power series run in `k²`).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EllipticPair<T> {
    pub modulus: T,
    pub k: T,
    pub e: T,
}

/// `K` and `E` by the arithmetic-geometric mean, for `0 ≤ modulus < 1`.
pub fn elliptic_pair<T: Real>(modulus: T) -> Result<EllipticPair<T>> {
    if !(modulus >= T::zero() && modulus < T::one()) {
        return Err(Error::InvalidParameter(format!("elliptic modulus must lie in [0, 1), got {modulus:?}")));
    }
    let eps = T::default_epsilon();
    let (mut a, mut b) = (T::one(), (T::one() - modulus * modulus).sqrt());
    let mut c = modulus;
    let mut pow = T::lit(0.5);
    let mut sum = pow * c * c;
    for _ in 0..64 {
        if c.abs() <= eps * a {
            break;
        }
        let next_a = (a + b) * T::lit(0.5);
        c = (a - b) * T::lit(0.5);
        b = (a * b).sqrt();
        a = next_a;
        pow *= T::lit(2.0);
        sum += pow * c * c;
    }
    let k = T::frac_pi_2() / a;
    Ok(EllipticPair { modulus, k, e: k * (T::one() - sum) })
}

/// Partial sums of the power series of `K` and `E` through `modulus^(2·terms)`.
pub fn elliptic_series<T: Real>(modulus: T, terms: usize) -> EllipticPair<T> {
    let m = modulus * modulus;
    let (mut k_sum, mut e_sum) = (T::one(), T::one());
    let mut coeff = T::one();
    let mut power = T::one();
    for n in 1..=terms {
        let ratio = T::from_usize(2 * n - 1).expect("size") / T::from_usize(2 * n).expect("size");
        coeff *= ratio;
        power *= m;
        let c2 = coeff * coeff * power;
        k_sum += c2;
        e_sum -= c2 / T::from_usize(2 * n - 1).expect("size");
    }
    EllipticPair { modulus, k: T::frac_pi_2() * k_sum, e: T::frac_pi_2() * e_sum }
}

/// Spin-deviate density `d` and energy density `ε` at parameter `a > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint<T> {
    pub a: T,
    pub d: T,
    pub eps: T,
}

/// `d = 1/2 + a (E/K − 1) / 2`, `ε = 4K (2E − (1 − 1/a²) K)` at modulus `1/a`.
pub fn sutherland_curve<T: Real>(a: T) -> Result<CurvePoint<T>> {
    if !(a > T::one()) {
        return Err(Error::InvalidParameter(format!("curve parameter must exceed 1, got {a:?}")));
    }
    let m = T::one() / a;
    let EllipticPair { k, e, .. } = elliptic_pair(m)?;
    let half = T::lit(0.5);
    let d = half + a * (e / k - T::one()) * half;
    let eps = T::lit(4.0) * k * (T::lit(2.0) * e - (T::one() - m * m) * k);
    Ok(CurvePoint { a, d, eps })
}

/// Curve points at `count` log-spaced parameters between `a_min` and `a_max`.
pub fn sutherland_sweep<T: Real>(a_min: T, a_max: T, count: usize) -> Result<Vec<CurvePoint<T>>> {
    if count < 2 || !(a_max > a_min) {
        return Err(Error::InvalidParameter("sweep needs a_max > a_min and at least two points".into()));
    }
    let (lo, hi) = (a_min.ln(), a_max.ln());
    let steps = T::from_usize(count - 1).expect("size");
    (0..count)
        .map(|i| sutherland_curve((lo + (hi - lo) * T::from_usize(i).expect("size") / steps).exp()))
        .collect()
}

/// `ε = 4π² d (1 − d)`.
pub fn dhar_shastry_eps<T: Real>(d: T) -> T {
    T::lit(4.0) * T::pi() * T::pi() * d * (T::one() - d)
}
