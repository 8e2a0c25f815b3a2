//! Minimum-energy tables, FOEL and Sutherland checks, and degeneracy scans.
//!
//! Every comparison is made on `2H` values; [`EnergyTable`] stores the `H`
//! values (half of `2H`) because that is how the tables are reported.

use serde::Serialize;

use crate::basis::{enumerate_sector, Geometry, Sector};
use crate::eigensolve::{labeled_spectrum, lowest_highest_weight, SolverConfig, SpectrumReport, TwiceSpin};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Absolute tolerance on `2H` values for FOEL comparisons and coincidences.
pub const FOEL_TOLERANCE: f64 = 1e-9;
/// Absolute tolerance on `2H` values for the Sutherland comparison.
pub const SUTHERLAND_TOLERANCE: f64 = 1e-8;

/// `E0(N, k)` in the `H` convention for `k = 0..=⌊N/2⌋` spin deviates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyTable<T> {
    pub n_sites: usize,
    pub geometry: Geometry,
    pub e0_h: Vec<T>,
}

impl<T: Real> EnergyTable<T> {
    /// The entry for `k` spin deviates back in the `2H` convention.
    pub fn two_h(&self, k: usize) -> T {
        self.e0_h[k] * T::lit(2.0)
    }

    pub fn max_deviates(&self) -> usize {
        self.e0_h.len() - 1
    }

    fn from_two_h(n_sites: usize, geometry: Geometry, two_h: Vec<T>) -> Self {
        let half = T::lit(0.5);
        let e0_h = two_h
            .into_iter()
            .enumerate()
            .map(|(k, e)| if k == 0 || e < T::zero() { T::zero() } else { e * half })
            .collect();
        Self { n_sites, geometry, e0_h }
    }
}

/// Builds the table from a spin-labeled spectrum of the `⌊N/2⌋`-magnon sector,
/// which holds a representative of every multiplet.
pub fn e0_table_from_report<T: Real>(report: &SpectrumReport<T>) -> Result<EnergyTable<T>> {
    let sector = report.sector;
    let n = sector.n_sites;
    if sector.n_magnons != n / 2 {
        return Err(Error::InvalidParameter(format!(
            "E0 tables need the {}-magnon sector, got {}",
            n / 2,
            sector.n_magnons
        )));
    }
    let two_h = (0..=n / 2)
        .map(|k| {
            report
                .min_with_spin(TwiceSpin::for_deviates(n, k))
                .ok_or_else(|| Error::InvalidParameter(format!("no labeled level with {k} spin deviates")))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(EnergyTable::from_two_h(n, sector.geometry, two_h))
}

/// `E0(N, k)` for every `k`. Sectors within the dense threshold are fully
/// diagonalized and labeled; larger ones use one spin-penalized Lanczos run
/// per `k` in the `k`-magnon sector.
pub fn e0_table<T: Real>(n_sites: usize, geometry: Geometry, config: &SolverConfig<T>) -> Result<EnergyTable<T>> {
    let sector = Sector::new(n_sites, n_sites / 2, geometry)?;
    if sector.dimension() as usize <= config.dense_threshold {
        let report = labeled_spectrum(&enumerate_sector(sector)?, config)?;
        return e0_table_from_report(&report);
    }
    let mut two_h = vec![T::zero()];
    for k in 1..=n_sites / 2 {
        let basis = enumerate_sector(Sector::new(n_sites, k, geometry)?)?;
        two_h.push(lowest_highest_weight(&basis, config)?.0);
    }
    Ok(EnergyTable::from_two_h(n_sites, geometry, two_h))
}

/// Decimal expansion cut (not rounded) after `places` digits.
pub fn truncate_decimals(value: f64, places: usize) -> String {
    let text = format!("{:.*}", places + 6, value);
    let cut = text.find('.').map_or(text.len(), |dot| dot + 1 + places);
    text[..cut].to_string()
}

/// Pairs `(k, ℓ)`, `k < ℓ`, where ordering by spin deviates fails or ties.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FoelFinding {
    /// `E0(ℓ) < E0(k) − tol`.
    pub violations: Vec<(usize, usize)>,
    /// `|E0(ℓ) − E0(k)| ≤ tol`.
    pub equalities: Vec<(usize, usize)>,
    pub tolerance: f64,
}

impl FoelFinding {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn foel_check<T: Real>(table: &EnergyTable<T>) -> FoelFinding {
    foel_check_with_tolerance(table, FOEL_TOLERANCE)
}

pub fn foel_check_with_tolerance<T: Real>(table: &EnergyTable<T>, tolerance: f64) -> FoelFinding {
    let tol = T::lit(tolerance);
    let mut finding = FoelFinding { tolerance, ..Default::default() };
    let top = table.max_deviates();
    for k in 0..=top {
        for l in k + 1..=top {
            let (ek, el) = (table.two_h(k), table.two_h(l));
            if el < ek - tol {
                finding.violations.push((k, l));
            } else if (el - ek).abs() <= tol {
                finding.equalities.push((k, l));
            }
        }
    }
    finding
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SutherlandRow<T> {
    pub deviates: usize,
    /// Lowest `2H` with total spin `N/2 − k`.
    pub spin_min_2h: T,
    /// Lowest `2H` with momentum index `k` or `N − k`.
    pub momentum_min_2h: T,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SutherlandReport<T> {
    pub n_sites: usize,
    pub rows: Vec<SutherlandRow<T>>,
}

impl<T> SutherlandReport<T> {
    pub fn all_equal(&self) -> bool {
        self.rows.iter().all(|r| r.equal)
    }
}

/// Compares, for every `k`, the lowest level of spin `N/2 − k` with the
/// lowest level of momentum `±2πk/N`, both read off one labeled report of the
/// `⌊N/2⌋`-magnon ring sector.
pub fn sutherland_from_report<T: Real>(report: &SpectrumReport<T>) -> Result<SutherlandReport<T>> {
    let sector = report.sector;
    if sector.geometry != Geometry::Ring {
        return Err(Error::RequiresRing);
    }
    let n = sector.n_sites;
    let tol = T::lit(SUTHERLAND_TOLERANCE);
    let missing = |what: String| Error::InvalidParameter(format!("no labeled level with {what}"));
    let rows = (0..=n / 2)
        .map(|k| {
            let spin_min_2h =
                report.min_with_spin(TwiceSpin::for_deviates(n, k)).ok_or_else(|| missing(format!("{k} deviates")))?;
            let momentum_min_2h =
                report.min_with_momentum(&[k % n, (n - k) % n]).ok_or_else(|| missing(format!("momentum {k}")))?;
            let equal = (spin_min_2h - momentum_min_2h).abs() <= tol;
            Ok(SutherlandRow { deviates: k, spin_min_2h, momentum_min_2h, equal })
        })
        .collect::<Result<_>>()?;
    Ok(SutherlandReport { n_sites: n, rows })
}

pub fn sutherland_check<T: Real>(n_sites: usize, config: &SolverConfig<T>) -> Result<SutherlandReport<T>> {
    let basis = enumerate_sector(Sector::ring(n_sites, n_sites / 2)?)?;
    sutherland_from_report(&labeled_spectrum(&basis, config)?)
}

/// Two levels of different total spin at the same energy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coincidence<T> {
    pub energy_2h: T,
    pub spins: (TwiceSpin, TwiceSpin),
}

/// Cross-spin coincidences (`|ΔE| < 1e−9` on `2H`) among the labeled levels
/// of one or more reports for the same N. Each spin pair is listed once per
/// energy, lower spin first.
pub fn degeneracy_scan<T: Real>(reports: &[SpectrumReport<T>]) -> Vec<Coincidence<T>> {
    let tol = T::lit(FOEL_TOLERANCE);
    let mut levels: Vec<(T, TwiceSpin)> = reports
        .iter()
        .flat_map(|r| r.levels.iter())
        .filter_map(|l| l.total_spin.map(|s| (l.energy_2h, s)))
        .collect();
    levels.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite energies").then(a.1.cmp(&b.1)));

    let mut out: Vec<Coincidence<T>> = Vec::new();
    for (i, &(e, s)) in levels.iter().enumerate() {
        for &(f, t) in &levels[i + 1..] {
            if f - e >= tol {
                break;
            }
            if s == t {
                continue;
            }
            let spins = (s.min(t), s.max(t));
            let seen = out.iter().any(|c| c.spins == spins && (c.energy_2h - e).abs() < tol);
            if !seen {
                out.push(Coincidence { energy_2h: e, spins });
            }
        }
    }
    out
}
