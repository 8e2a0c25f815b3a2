//! Ising configurations and fixed-magnetization sectors.
//!
//! A configuration packs N spins into a `u32`; bit `j` set means site `j`
//! (0-based) carries a down spin. A k-magnon sector holds every configuration
//! with exactly k bits set, enumerated in increasing bit-pattern order so the
//! position of a configuration is found by binary search.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of sites (one machine word).
pub const MAX_SITES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Ring,
    Chain,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Ring => f.write_str("ring"),
            Geometry::Chain => f.write_str("chain"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration {
    bits: u32,
    n_sites: u8,
}

impl SpinConfiguration {
    pub fn new(bits: u32, n_sites: usize) -> Result<Self> {
        check_capacity(n_sites)?;
        if n_sites < 32 && bits >> n_sites != 0 {
            return Err(Error::InvalidParameter(format!(
                "bit pattern {bits:#b} has bits above site {n_sites}"
            )));
        }
        Ok(Self { bits, n_sites: n_sites as u8 })
    }

    /// The all-up configuration.
    pub fn all_up(n_sites: usize) -> Result<Self> {
        Self::new(0, n_sites)
    }

    /// Configuration with down spins at the given 0-based sites.
    pub fn from_down_sites(n_sites: usize, sites: &[usize]) -> Result<Self> {
        check_capacity(n_sites)?;
        let mut bits = 0u32;
        for &s in sites {
            if s >= n_sites {
                return Err(Error::InvalidParameter(format!("site {s} out of range")));
            }
            bits |= 1 << s;
        }
        Self::new(bits, n_sites)
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn n_sites(self) -> usize {
        self.n_sites as usize
    }

    #[inline]
    pub fn is_down(self, site: usize) -> bool {
        self.bits >> site & 1 == 1
    }

    #[inline]
    pub fn magnons(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn down_sites(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.n_sites()).filter(move |&s| bits >> s & 1 == 1)
    }

    /// Exchanges the spins on two sites.
    #[inline]
    pub fn swapped(self, i: usize, j: usize) -> Self {
        if self.is_down(i) == self.is_down(j) {
            self
        } else {
            Self { bits: self.bits ^ (1 << i | 1 << j), n_sites: self.n_sites }
        }
    }

    /// Rotation by one site: the spin on site `j` moves to site `j + 1 mod N`.
    #[inline]
    pub fn translate(self) -> Self {
        let n = self.n_sites();
        let mask = mask(n);
        let bits = ((self.bits << 1) | (self.bits >> (n - 1))) & mask;
        Self { bits, n_sites: self.n_sites }
    }

    pub fn translate_by(self, steps: usize) -> Self {
        (0..steps % self.n_sites()).fold(self, |c, _| c.translate())
    }
}

impl fmt::Debug for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in 0..self.n_sites() {
            f.write_str(if self.is_down(s) { "↓" } else { "↑" })?;
        }
        Ok(())
    }
}

#[inline]
fn mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

fn check_capacity(n_sites: usize) -> Result<()> {
    if n_sites > MAX_SITES {
        Err(Error::CapacityExceeded { n_sites, max: MAX_SITES })
    } else if n_sites < 2 {
        Err(Error::InvalidParameter(format!("need at least 2 sites, got {n_sites}")))
    } else {
        Ok(())
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Fixed magnetization sector: `n_magnons` down spins on `n_sites` sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sector {
    pub n_sites: usize,
    pub n_magnons: usize,
    pub geometry: Geometry,
}

impl Sector {
    pub fn new(n_sites: usize, n_magnons: usize, geometry: Geometry) -> Result<Self> {
        check_capacity(n_sites)?;
        if n_magnons > n_sites {
            return Err(Error::InvalidSector { n_sites, n_magnons });
        }
        if geometry == Geometry::Ring && n_sites < 3 {
            return Err(Error::RingTooSmall(n_sites));
        }
        Ok(Self { n_sites, n_magnons, geometry })
    }

    pub fn ring(n_sites: usize, n_magnons: usize) -> Result<Self> {
        Self::new(n_sites, n_magnons, Geometry::Ring)
    }

    pub fn chain(n_sites: usize, n_magnons: usize) -> Result<Self> {
        Self::new(n_sites, n_magnons, Geometry::Chain)
    }

    pub fn dimension(&self) -> u64 {
        binomial(self.n_sites, self.n_magnons)
    }

    /// Twice the magnetization, `2m = N - 2k`.
    pub fn twice_magnetization(&self) -> i64 {
        self.n_sites as i64 - 2 * self.n_magnons as i64
    }
}

/// Ordered enumeration of a sector.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    sector: Sector,
    states: Vec<SpinConfiguration>,
}

impl SectorBasis {
    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn n_sites(&self) -> usize {
        self.sector.n_sites
    }

    pub fn geometry(&self) -> Geometry {
        self.sector.geometry
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[SpinConfiguration] {
        &self.states
    }

    pub fn state(&self, i: usize) -> SpinConfiguration {
        self.states[i]
    }

    /// Position of a configuration, or `None` if it lies outside the sector.
    #[inline]
    pub fn index_of(&self, config: SpinConfiguration) -> Option<usize> {
        self.states.binary_search(&config).ok()
    }

    #[inline]
    pub(crate) fn index_of_bits(&self, bits: u32) -> usize {
        self.states
            .binary_search_by_key(&bits, |c| c.bits())
            .expect("configuration outside sector")
    }
}

/// Lists every configuration with exactly k down spins, in increasing order.
pub fn enumerate_sector(sector: Sector) -> Result<SectorBasis> {
    let Sector { n_sites: n, n_magnons: k, .. } = sector;
    check_capacity(n)?;
    if k > n {
        return Err(Error::InvalidSector { n_sites: n, n_magnons: k });
    }
    let dim = binomial(n, k) as usize;
    let mut states = Vec::with_capacity(dim);
    if k == 0 {
        states.push(SpinConfiguration { bits: 0, n_sites: n as u8 });
    } else {
        // Gosper's hack over u64 so that k = n = 32 does not overflow.
        let limit = 1u64 << n;
        let mut v: u64 = (1u64 << k) - 1;
        while v < limit {
            states.push(SpinConfiguration { bits: v as u32, n_sites: n as u8 });
            let t = v | (v - 1);
            let tz = v.trailing_zeros();
            v = (t + 1) | (((!t & (t + 1)) - 1) >> (tz + 1));
        }
    }
    debug_assert_eq!(states.len(), dim);
    Ok(SectorBasis { sector, states })
}

/// Cyclic translation orbit with its minimal representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranslationOrbit {
    pub representative: SpinConfiguration,
    pub period: usize,
}

impl TranslationOrbit {
    pub fn members(&self) -> impl Iterator<Item = SpinConfiguration> {
        let rep = self.representative;
        (0..self.period).scan(rep, |c, _| {
            let out = *c;
            *c = c.translate();
            Some(out)
        })
    }
}

/// Splits a ring sector into translation orbits, ordered by representative.
pub fn orbit_decompose(basis: &SectorBasis) -> Result<Vec<TranslationOrbit>> {
    if basis.geometry() != Geometry::Ring {
        return Err(Error::RequiresRing);
    }
    let mut seen = vec![false; basis.dim()];
    let mut orbits = Vec::new();
    for (i, &start) in basis.states().iter().enumerate() {
        if seen[i] {
            continue;
        }
        let mut period = 0;
        let mut c = start;
        loop {
            seen[basis.index_of_bits(c.bits())] = true;
            period += 1;
            c = c.translate();
            if c == start {
                break;
            }
        }
        // states are visited in increasing order, so `start` is the orbit minimum
        orbits.push(TranslationOrbit { representative: start, period });
    }
    Ok(orbits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, sites_one_based: &[usize]) -> SpinConfiguration {
        let s: Vec<usize> = sites_one_based.iter().map(|s| s - 1).collect();
        SpinConfiguration::from_down_sites(n, &s).unwrap()
    }

    #[test]
    fn sector_sizes() {
        let b = enumerate_sector(Sector::ring(4, 0).unwrap()).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.state(0), SpinConfiguration::all_up(4).unwrap());
        assert_eq!(enumerate_sector(Sector::ring(4, 2).unwrap()).unwrap().dim(), 6);
        assert_eq!(enumerate_sector(Sector::ring(6, 3).unwrap()).unwrap().dim(), 20);
        assert_eq!(enumerate_sector(Sector::chain(32, 32).unwrap()).unwrap().dim(), 1);
        assert_eq!(enumerate_sector(Sector::chain(20, 1).unwrap()).unwrap().dim(), 20);
    }

    #[test]
    fn capacity_and_validity() {
        assert_eq!(
            Sector::ring(33, 1).unwrap_err(),
            Error::CapacityExceeded { n_sites: 33, max: 32 }
        );
        assert!(matches!(Sector::ring(4, 5), Err(Error::InvalidSector { .. })));
        assert_eq!(Sector::ring(2, 1).unwrap_err(), Error::RingTooSmall(2));
        assert!(Sector::chain(2, 1).is_ok());
        assert!(SpinConfiguration::new(0b10000, 4).is_err());
    }

    #[test]
    fn translation_examples() {
        let up = SpinConfiguration::all_up(4).unwrap();
        assert_eq!(up.translate(), up);
        assert_eq!(cfg(4, &[1]).translate(), cfg(4, &[2]));
        assert_eq!(cfg(4, &[4]).translate(), cfg(4, &[1]));
        let c13 = cfg(4, &[1, 3]);
        assert_eq!(c13.translate(), cfg(4, &[2, 4]));
        assert_eq!(c13.translate().translate(), c13);
    }

    #[test]
    fn orbit_examples() {
        let periods = |n, k| {
            let b = enumerate_sector(Sector::ring(n, k).unwrap()).unwrap();
            let mut p: Vec<usize> = orbit_decompose(&b).unwrap().iter().map(|o| o.period).collect();
            p.sort_unstable();
            p
        };
        assert_eq!(periods(4, 2), vec![2, 4]);
        assert_eq!(periods(4, 1), vec![4]);
        assert_eq!(periods(6, 3), vec![2, 6, 6, 6]);
    }

    #[test]
    fn orbit_requires_ring() {
        let b = enumerate_sector(Sector::chain(4, 2).unwrap()).unwrap();
        assert_eq!(orbit_decompose(&b).unwrap_err(), Error::RequiresRing);
    }

    #[test]
    fn orbit_representative_is_minimum() {
        let b = enumerate_sector(Sector::ring(8, 3).unwrap()).unwrap();
        for orbit in orbit_decompose(&b).unwrap() {
            assert!(orbit.members().all(|m| m >= orbit.representative));
            assert_eq!(orbit.representative.translate_by(orbit.period), orbit.representative);
            for p in 1..orbit.period {
                assert_ne!(orbit.representative.translate_by(p), orbit.representative);
            }
        }
    }
}
