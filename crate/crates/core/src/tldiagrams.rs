//! Temperley–Lieb arc diagrams.
//!
//! A diagram on N sites is a set of k non-crossing arcs plus N − 2k unpaired
//! sites carrying up spins. It stands for the highest-weight vector
//! `⊗ ψ_{a,b} ⊗ ↑…↑` with `ψ_{a,b} = ↓_a↑_b − ↑_a↓_b`. Arcs are stored with
//! `a < b`; building a diagram from an oppositely oriented arc multiplies the
//! coefficient by −1, so a [`DiagramVector`] over canonical diagrams is the
//! same thing as a combination of oriented ones.
//!
//! The generator on an edge `{u, v}` is `U = ψ_{u,v} ψ̃†_{u,v} = −2h`. Its
//! action on a diagram is evaluated by contracting the covector against the
//! (at most two) arcs touching `u` and `v`; the re-wired arc then carries
//! whatever sign the contraction produced. Loops evaluate to −2 and a cap on
//! two up spins vanishes.
//!
//! `A = Σ U` over the edges of the geometry and the map `L` to Ising
//! coordinates satisfy `L A = −2H L`. On a chain `L` is injective; on a ring
//! the diagram space is larger than the highest-weight space and the
//! eigenvalues of `A` living entirely in `ker L` are discarded.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use nalgebra::{Complex, DMatrix};
use num_traits::{ToPrimitive, Zero};

use crate::basis::{binomial, enumerate_sector, Geometry, Sector, SectorBasis, SpinConfiguration};
use crate::error::{Error, Result};
use crate::linalg::{rational, ExactMatrix};
use crate::operators::{build_sparse, OperatorKind};
use crate::{Rational, RationalMatrix};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcDiagram {
    n_sites: u8,
    geometry: Geometry,
    /// Canonical arcs `(a, b)` with `a < b`, sorted.
    arcs: Vec<(u8, u8)>,
}

impl ArcDiagram {
    /// Builds a diagram from oriented arcs `(a, b)` (0-based), returning the
    /// canonical diagram and the sign picked up by re-orienting.
    pub fn from_oriented(n_sites: usize, geometry: Geometry, arcs: &[(usize, usize)]) -> Result<(Self, i64)> {
        let mut sign = 1;
        let mut canon: Vec<(u8, u8)> = Vec::with_capacity(arcs.len());
        for &(a, b) in arcs {
            if a > b {
                sign = -sign;
            }
            canon.push((a.min(b) as u8, a.max(b) as u8));
        }
        canon.sort_unstable();
        let d = Self { n_sites: n_sites as u8, geometry, arcs: canon };
        d.validate()?;
        Ok((d, sign))
    }

    fn from_canonical_unchecked(n_sites: usize, geometry: Geometry, mut arcs: Vec<(u8, u8)>) -> Self {
        arcs.sort_unstable();
        Self { n_sites: n_sites as u8, geometry, arcs }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites as usize
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().map(|&(a, b)| (a as usize, b as usize))
    }

    pub fn unpaired(&self) -> Vec<usize> {
        (0..self.n_sites()).filter(|&s| self.partner(s).is_none()).collect()
    }

    pub fn partner(&self, site: usize) -> Option<usize> {
        self.arcs().find_map(|(a, b)| {
            if a == site {
                Some(b)
            } else if b == site {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Checks the drawing rules: sites used once, arcs non-crossing, and no
    /// arc separating unpaired sites from each other (on a chain: no arc
    /// spans an unpaired site).
    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        let bad = |why: &str| Err(Error::InvalidParameter(format!("diagram {self}: {why}")));
        let mut used = vec![false; n];
        for (a, b) in self.arcs() {
            if a >= b || b >= n {
                return bad("arc endpoints out of order or range");
            }
            if used[a] || used[b] {
                return bad("site used twice");
            }
            used[a] = true;
            used[b] = true;
        }
        for (i, (a, b)) in self.arcs().enumerate() {
            for (c, d) in self.arcs().skip(i + 1) {
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    return bad("arcs cross");
                }
            }
        }
        let unpaired = self.unpaired();
        for (a, b) in self.arcs() {
            let inside = unpaired.iter().any(|&u| a < u && u < b);
            let outside = unpaired.iter().any(|&u| u < a || u > b);
            let ok = match self.geometry {
                Geometry::Chain => !inside,
                Geometry::Ring => !(inside && outside),
            };
            if !ok {
                return bad("arc spans an unpaired site");
            }
        }
        Ok(())
    }

    /// Rotation by one site, with the orientation sign.
    pub fn translate(&self) -> (Self, i64) {
        let n = self.n_sites();
        let mut sign = 1;
        let arcs = self
            .arcs()
            .map(|(a, b)| {
                let (a, b) = ((a + 1) % n, (b + 1) % n);
                if a > b {
                    sign = -sign;
                    (b as u8, a as u8)
                } else {
                    (a as u8, b as u8)
                }
            })
            .collect();
        (Self::from_canonical_unchecked(n, self.geometry, arcs), sign)
    }

    /// Expansion into Ising configurations: `(configuration, ±1)` pairs.
    pub fn expand(&self) -> Vec<(SpinConfiguration, i64)> {
        let arcs: Vec<(usize, usize)> = self.arcs().collect();
        let mut out = Vec::with_capacity(1 << arcs.len());
        for choice in 0u32..(1 << arcs.len()) {
            let mut bits = 0u32;
            let mut sign = 1;
            for (i, &(a, b)) in arcs.iter().enumerate() {
                if choice >> i & 1 == 0 {
                    bits |= 1 << a;
                } else {
                    bits |= 1 << b;
                    sign = -sign;
                }
            }
            out.push((SpinConfiguration::new(bits, self.n_sites()).expect("sites in range"), sign));
        }
        out
    }
}

impl fmt::Display for ArcDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ψ")?;
        for (a, b) in self.arcs() {
            write!(f, "({},{})", a + 1, b + 1)?;
        }
        for u in self.unpaired() {
            write!(f, "↑{}", u + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for ArcDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Exact linear combination of canonical diagrams.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagramVector {
    terms: BTreeMap<ArcDiagram, Rational>,
}

impl DiagramVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(d: ArcDiagram, coeff: Rational) -> Self {
        let mut v = Self::new();
        v.add_term(d, coeff);
        v
    }

    pub fn add_term(&mut self, d: ArcDiagram, coeff: Rational) {
        let entry = self.terms.entry(d).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn coefficient(&self, d: &ArcDiagram) -> Rational {
        self.terms.get(d).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ArcDiagram, &Rational)> {
        self.terms.iter()
    }
}

/// Non-crossing diagrams with `k` arcs on `[lo, hi)`; `perfect` forbids unpaired sites.
fn interval_diagrams(lo: usize, hi: usize, k: usize, perfect: bool) -> Vec<Vec<(u8, u8)>> {
    if lo == hi {
        return if k == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let len = hi - lo;
    if 2 * k > len || (perfect && len != 2 * k) {
        return Vec::new();
    }
    let mut out = Vec::new();
    if !perfect {
        out.extend(interval_diagrams(lo + 1, hi, k, false));
    }
    if k == 0 {
        return out;
    }
    let mut j = lo + 1;
    while j < hi {
        let inner_k = (j - lo - 1) / 2;
        if inner_k < k {
            for inner in interval_diagrams(lo + 1, j, inner_k, true) {
                for rest in interval_diagrams(j + 1, hi, k - 1 - inner_k, perfect) {
                    let mut arcs = Vec::with_capacity(k);
                    arcs.push((lo as u8, j as u8));
                    arcs.extend(inner.iter().copied());
                    arcs.extend(rest);
                    out.push(arcs);
                }
            }
        }
        j += 2;
    }
    out
}

/// Every valid diagram with `k` arcs, in canonical order. On a ring these are
/// all rotations of the chain diagrams, including arcs through the edge {N, 1}.
pub fn enumerate_diagrams(n_sites: usize, k: usize, geometry: Geometry) -> Result<Vec<ArcDiagram>> {
    if 2 * k > n_sites {
        return Err(Error::InvalidSector { n_sites, n_magnons: k });
    }
    Sector::new(n_sites, k, geometry)?;
    let chain: Vec<ArcDiagram> = interval_diagrams(0, n_sites, k, false)
        .into_iter()
        .map(|arcs| ArcDiagram::from_canonical_unchecked(n_sites, geometry, arcs))
        .collect();
    let set: BTreeSet<ArcDiagram> = match geometry {
        Geometry::Chain => chain.into_iter().collect(),
        Geometry::Ring => chain
            .into_iter()
            .flat_map(|d| {
                (0..n_sites).scan(d, |cur, _| {
                    let out = cur.clone();
                    *cur = cur.translate().0;
                    Some(out)
                })
            })
            .collect(),
    };
    Ok(set.into_iter().collect())
}

type LocalTerm = (i64, Vec<(usize, bool)>);

fn singlet(a: usize, b: usize) -> Vec<LocalTerm> {
    vec![(1, vec![(a, true), (b, false)]), (-1, vec![(a, false), (b, true)])]
}

fn up(a: usize) -> Vec<LocalTerm> {
    vec![(1, vec![(a, false)])]
}

fn tensor(x: &[LocalTerm], y: &[LocalTerm]) -> Vec<LocalTerm> {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for (cx, sx) in x {
        for (cy, sy) in y {
            let mut s = sx.clone();
            s.extend(sy.iter().copied());
            out.push((cx * cy, s));
        }
    }
    out
}

/// `ψ̃†_{u,v} = ⟨↑_u ↓_v| − ⟨↓_u ↑_v|` applied to a local product state;
/// returns the coefficients of the remaining sites' assignments.
fn contract(u: usize, v: usize, state: &[LocalTerm]) -> BTreeMap<Vec<(usize, bool)>, i64> {
    let mut out: BTreeMap<Vec<(usize, bool)>, i64> = BTreeMap::new();
    for (c, assignment) in state {
        let down = |site| assignment.iter().find(|(s, _)| *s == site).map(|&(_, d)| d).expect("site present");
        let w = match (down(u), down(v)) {
            (false, true) => 1,
            (true, false) => -1,
            _ => 0,
        };
        if w == 0 {
            continue;
        }
        let mut rest: Vec<(usize, bool)> = assignment.iter().copied().filter(|(s, _)| *s != u && *s != v).collect();
        rest.sort_unstable();
        *out.entry(rest).or_insert(0) += w * c;
    }
    out.retain(|_, c| *c != 0);
    out
}

fn is_edge(n: usize, geometry: Geometry, u: usize, v: usize) -> bool {
    let (lo, hi) = (u.min(v), u.max(v));
    (hi == lo + 1 && hi < n) || (geometry == Geometry::Ring && lo == 0 && hi == n - 1 && n >= 3)
}

/// `U_{u,v}` applied to a diagram, as `(coefficient, diagram)` with an
/// integer coefficient, or `None` when the result vanishes.
fn generator_action(u: usize, v: usize, d: &ArcDiagram) -> Option<(i64, ArcDiagram)> {
    let pu = d.partner(u);
    let pv = d.partner(v);
    // ψ_{u,v} in canonical orientation
    let uv_sign = if u < v { 1 } else { -1 };
    let canon = |x: usize, y: usize| (x.min(y) as u8, x.max(y) as u8);
    let arc_factor = |x: usize| {
        let (a, b) = canon(x, d.partner(x).expect("paired"));
        singlet(a as usize, b as usize)
    };
    let keep: Vec<(u8, u8)> = d
        .arcs
        .iter()
        .copied()
        .filter(|&(a, b)| ![u, v].contains(&(a as usize)) && ![u, v].contains(&(b as usize)))
        .collect();
    match (pu, pv) {
        (None, None) => None,
        (Some(p), _) if p == v => {
            let rest = contract(u, v, &arc_factor(u));
            let c = rest.get(&Vec::new()).copied().unwrap_or(0);
            // ψ_{u,v} · c replaces the arc; express in canonical orientation
            Some((c * uv_sign, d.clone()))
        }
        (Some(a), Some(b)) => {
            let local = tensor(&arc_factor(u), &arc_factor(v));
            let rest = contract(u, v, &local);
            let (x, y) = (a.min(b), a.max(b));
            let c = rest.get(&vec![(x, true), (y, false)]).copied().unwrap_or(0);
            debug_assert_eq!(rest.get(&vec![(x, false), (y, true)]).copied().unwrap_or(0), -c);
            let mut arcs = keep;
            arcs.push(canon(u, v));
            arcs.push(canon(a, b));
            let out = ArcDiagram::from_canonical_unchecked(d.n_sites(), d.geometry, arcs);
            (c != 0).then_some((c * uv_sign, out))
        }
        (Some(a), None) | (None, Some(a)) => {
            let (paired, free) = if pu.is_some() { (u, v) } else { (v, u) };
            let local = tensor(&arc_factor(paired), &up(free));
            let rest = contract(u, v, &local);
            let c = rest.get(&vec![(a, false)]).copied().unwrap_or(0);
            debug_assert_eq!(rest.get(&vec![(a, true)]).copied().unwrap_or(0), 0);
            let mut arcs = keep;
            arcs.push(canon(u, v));
            let out = ArcDiagram::from_canonical_unchecked(d.n_sites(), d.geometry, arcs);
            (c != 0).then_some((c * uv_sign, out))
        }
    }
}

/// The generator `U_{u,v}` (0-based edge) acting on a diagram.
pub fn apply_generator(edge: (usize, usize), d: &ArcDiagram) -> Result<DiagramVector> {
    let (u, v) = edge;
    if !is_edge(d.n_sites(), d.geometry(), u, v) {
        return Err(Error::InvalidParameter(format!("{{{}, {}}} is not an edge of the {}", u + 1, v + 1, d.geometry())));
    }
    Ok(match generator_action(u, v, d) {
        Some((c, out)) => DiagramVector::single(out, rational(c)),
        None => DiagramVector::new(),
    })
}

/// An enumerated diagram space with its operators.
#[derive(Clone, Debug)]
pub struct DiagramSpace {
    n_sites: usize,
    n_arcs: usize,
    geometry: Geometry,
    diagrams: Vec<ArcDiagram>,
    index: HashMap<ArcDiagram, usize>,
}

impl DiagramSpace {
    pub fn new(n_sites: usize, n_arcs: usize, geometry: Geometry) -> Result<Self> {
        let diagrams = enumerate_diagrams(n_sites, n_arcs, geometry)?;
        let index = diagrams.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
        Ok(Self { n_sites, n_arcs, geometry, diagrams, index })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_arcs(&self) -> usize {
        self.n_arcs
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn dim(&self) -> usize {
        self.diagrams.len()
    }

    pub fn diagrams(&self) -> &[ArcDiagram] {
        &self.diagrams
    }

    pub fn index_of(&self, d: &ArcDiagram) -> Option<usize> {
        self.index.get(d).copied()
    }

    /// Edges of the geometry, `{i, i+1}` in order and `{N, 1}` last on a ring.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut e: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.geometry == Geometry::Ring {
            e.push((n - 1, 0));
        }
        e
    }

    fn generator_i64(&self, edge: (usize, usize)) -> Result<Vec<Vec<i64>>> {
        let dim = self.dim();
        let mut m = vec![vec![0i64; dim]; dim];
        for (col, d) in self.diagrams.iter().enumerate() {
            if let Some((c, out)) = generator_action(edge.0, edge.1, d) {
                let row = self.index_of(&out).ok_or_else(|| Error::DiagramNotInBasis(out.to_string()))?;
                m[row][col] += c;
            }
        }
        Ok(m)
    }

    /// Matrix of one generator in the diagram basis (columns are inputs).
    pub fn generator_matrix(&self, edge: (usize, usize)) -> Result<RationalMatrix> {
        if !is_edge(self.n_sites, self.geometry, edge.0, edge.1) {
            return Err(Error::InvalidParameter(format!("{edge:?} is not an edge")));
        }
        let m = self.generator_i64(edge)?;
        Ok(ExactMatrix::from_i64(self.dim(), self.dim(), |i, j| m[i][j]))
    }

    /// `A = Σ_edges U_e`.
    pub fn a_operator(&self) -> Result<RationalMatrix> {
        let dim = self.dim();
        let mut acc = vec![vec![0i64; dim]; dim];
        for e in self.edges() {
            let g = self.generator_i64(e)?;
            for i in 0..dim {
                for j in 0..dim {
                    acc[i][j] += g[i][j];
                }
            }
        }
        Ok(ExactMatrix::from_i64(dim, dim, |i, j| acc[i][j]))
    }

    /// Rotation on a ring diagram space, as a signed permutation.
    pub fn translation_matrix(&self) -> Result<RationalMatrix> {
        if self.geometry != Geometry::Ring {
            return Err(Error::RequiresRing);
        }
        let mut m = RationalMatrix::zeros(self.dim(), self.dim());
        for (col, d) in self.diagrams.iter().enumerate() {
            let (out, sign) = d.translate();
            let row = self.index_of(&out).ok_or_else(|| Error::DiagramNotInBasis(out.to_string()))?;
            m[(row, col)] = rational(sign);
        }
        Ok(m)
    }

    pub fn spin_basis(&self) -> Result<SectorBasis> {
        enumerate_sector(Sector::new(self.n_sites, self.n_arcs, self.geometry)?)
    }

    /// The map `L` from diagrams to Ising coordinates of the k-magnon sector.
    pub fn intertwiner(&self) -> Result<IntertwinerMatrix> {
        let basis = self.spin_basis()?;
        let mut m = RationalMatrix::zeros(basis.dim(), self.dim());
        for (col, d) in self.diagrams.iter().enumerate() {
            for (cfg, sign) in d.expand() {
                let row = basis.index_of(cfg).expect("k down spins");
                m[(row, col)] += rational(sign);
            }
        }
        let rank = m.rank();
        Ok(IntertwinerMatrix { highest_weight_dim: highest_weight_dim(self.n_sites, self.n_arcs), rank, matrix: m })
    }
}

/// `binomial(N, k) - binomial(N, k-1)`.
pub fn highest_weight_dim(n_sites: usize, k: usize) -> usize {
    let lower = if k == 0 { 0 } else { binomial(n_sites, k - 1) };
    (binomial(n_sites, k) - lower) as usize
}

/// `L : V → ` k-magnon Ising coordinates, with its exact rank.
#[derive(Clone, Debug)]
pub struct IntertwinerMatrix {
    pub matrix: RationalMatrix,
    pub rank: usize,
    pub highest_weight_dim: usize,
}

impl IntertwinerMatrix {
    pub fn kernel_dim(&self) -> usize {
        self.matrix.ncols() - self.rank
    }

    /// Image equals the whole highest-weight space.
    pub fn is_onto_highest_weight(&self) -> bool {
        self.rank == self.highest_weight_dim
    }

    pub fn is_injective(&self) -> bool {
        self.kernel_dim() == 0
    }
}

/// Enumerates the diagram space and returns its `A` matrix.
pub fn build_a_operator(n_sites: usize, k: usize, geometry: Geometry) -> Result<(DiagramSpace, RationalMatrix)> {
    let space = DiagramSpace::new(n_sites, k, geometry)?;
    let a = space.a_operator()?;
    Ok((space, a))
}

pub fn build_intertwiner(n_sites: usize, k: usize, geometry: Geometry) -> Result<IntertwinerMatrix> {
    DiagramSpace::new(n_sites, k, geometry)?.intertwiner()
}

/// Exact `2H` on the k-magnon sector of the space's geometry.
pub fn exact_two_h(space: &DiagramSpace) -> Result<RationalMatrix> {
    let basis = space.spin_basis()?;
    let h = build_sparse::<i64>(&basis, OperatorKind::TwoH, usize::MAX)?;
    let mut m = RationalMatrix::zeros(basis.dim(), basis.dim());
    for (i, row) in h.rows().iter().enumerate() {
        for (j, v) in row {
            m[(i, *j)] = rational(*v);
        }
    }
    Ok(m)
}

/// Outcome of the Temperley–Lieb identity checks on one diagram space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationCheck {
    pub idempotent: bool,
    pub braid: bool,
    pub distant_commute: bool,
    pub intertwining: bool,
    pub dimension_identity: bool,
}

impl RelationCheck {
    pub fn all(&self) -> bool {
        self.idempotent && self.braid && self.distant_commute && self.intertwining && self.dimension_identity
    }
}

/// Checks `U² = −2U`, `U_i U_{i±1} U_i = U_i`, distant commutation, `L A = −2H L`
/// and, on chains, `|V| = binomial(N,k) − binomial(N,k−1)`; on rings the last
/// item checks that `L` maps onto the highest-weight space instead.
pub fn verify_relations(space: &DiagramSpace) -> Result<RelationCheck> {
    let edges = space.edges();
    let gens: Vec<RationalMatrix> = edges.iter().map(|&e| space.generator_matrix(e)).collect::<Result<_>>()?;
    let n_edges = gens.len();
    let ring = space.geometry == Geometry::Ring;
    // generators are adjacent when their edges share a site
    let adjacent = |i: usize, j: usize| {
        let (a, b) = (edges[i], edges[j]);
        i != j && (a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1)
    };
    let minus_two = rational(-2);

    let idempotent = gens.iter().all(|u| u.mul(u) == u.scale(&minus_two));
    let mut braid = true;
    let mut distant_commute = true;
    for i in 0..n_edges {
        for j in 0..n_edges {
            if i == j {
                continue;
            }
            if adjacent(i, j) {
                // on a 3-site ring every pair is adjacent from both sides; skip the degenerate case
                if !(ring && space.n_sites == 3) {
                    braid &= gens[i].mul(&gens[j]).mul(&gens[i]) == gens[i];
                }
            } else {
                distant_commute &= gens[i].mul(&gens[j]) == gens[j].mul(&gens[i]);
            }
        }
    }

    let a = space.a_operator()?;
    let l = space.intertwiner()?;
    let h = exact_two_h(space)?;
    let intertwining = l.matrix.mul(&a) == h.mul(&l.matrix).scale(&-rational(1));
    let dimension_identity = match space.geometry {
        Geometry::Chain => space.dim() == highest_weight_dim(space.n_sites, space.n_arcs) && l.is_injective(),
        Geometry::Ring => l.is_onto_highest_weight(),
    };
    Ok(RelationCheck { idempotent, braid, distant_commute, intertwining, dimension_identity })
}

/// One eigenvalue of `2H` recovered from the diagram route.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagramLevel {
    pub energy_2h: f64,
    pub a_eigenvalue: f64,
    /// Dimension of the image of the `A` eigenspace under `L`.
    pub multiplicity: usize,
    /// Decided by exact rational null-space and rank computations.
    pub exact: bool,
}

/// An `A` eigenvalue whose (generalized) eigenspace meets `ker L`.
#[derive(Clone, Debug, PartialEq)]
pub struct RemovedEigenvalue {
    pub a_eigenvalue: Complex<f64>,
    pub kernel_multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct DiagramSpectrum {
    pub n_sites: usize,
    pub n_arcs: usize,
    pub geometry: Geometry,
    pub diagram_dim: usize,
    pub kernel_dim: usize,
    pub levels: Vec<DiagramLevel>,
    pub removed: Vec<RemovedEigenvalue>,
    /// Some eigenvalue has geometric multiplicity below its algebraic one.
    pub defective: bool,
}

impl DiagramSpectrum {
    /// `2H` eigenvalues repeated by multiplicity, ascending.
    pub fn energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .levels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.energy_2h, l.multiplicity))
            .collect();
        e.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        e
    }

    /// Removed `A` eigenvalues that are real, ascending, without repetition.
    pub fn removed_real(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .removed
            .iter()
            .filter(|r| r.a_eigenvalue.im.abs() < 1e-9)
            .map(|r| r.a_eigenvalue.re)
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        v
    }
}

const CLUSTER_TOL: f64 = 1e-6;

fn cluster_complex(mut vals: Vec<Complex<f64>>) -> Vec<(Complex<f64>, usize)> {
    vals.sort_by(|a, b| a.re.partial_cmp(&b.re).expect("finite").then(a.im.partial_cmp(&b.im).expect("finite")));
    let mut groups: Vec<Vec<Complex<f64>>> = Vec::new();
    for v in vals {
        match groups.iter_mut().find(|g| (g[0] - v).norm() < CLUSTER_TOL * (1.0 + v.norm())) {
            Some(g) => g.push(v),
            None => groups.push(vec![v]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            (g.iter().sum::<Complex<f64>>() / n as f64, n)
        })
        .collect()
}

fn numeric_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    sv.iter().filter(|&&s| s > tol * top.max(1.0)).count()
}

/// Right null space of `m` of the requested dimension (smallest singular vectors).
fn numeric_null_space(m: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let n = m.ncols();
    // eigenvectors of mᵀm for the smallest eigenvalues
    let g = m.transpose() * m;
    let eig = g.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite"));
    DMatrix::from_fn(n, dim, |r, c| eig.eigenvectors[(r, order[c])])
}

/// `2H` spectrum on the highest-weight space via the diagram algebra.
pub fn spectrum_via_diagrams(n_sites: usize, k: usize, geometry: Geometry) -> Result<DiagramSpectrum> {
    let (space, a) = build_a_operator(n_sites, k, geometry)?;
    let l = space.intertwiner()?;
    let dim = space.dim();
    let a_f = a.to_f64();
    let l_f = l.matrix.to_f64();
    let eigenvalues: Vec<Complex<f64>> = if dim == 0 {
        Vec::new()
    } else {
        a_f.clone().complex_eigenvalues().iter().copied().collect()
    };

    let mut levels = Vec::new();
    let mut removed = Vec::new();
    let mut defective = false;
    for (lambda, alg) in cluster_complex(eigenvalues) {
        if lambda.im.abs() > 1e-8 {
            removed.push(RemovedEigenvalue { a_eigenvalue: lambda, kernel_multiplicity: alg });
            continue;
        }
        let lam = lambda.re;
        let rounded = lam.round();
        let (image, geometric, exact) = if (lam - rounded).abs() < 1e-7 {
            let shifted = a.sub(&RationalMatrix::identity(dim).scale(&rational(rounded as i64)));
            let gen_space = shifted.pow(alg).null_space();
            let geometric = shifted.null_space().ncols();
            let image = if gen_space.ncols() == 0 { 0 } else { l.matrix.mul(&gen_space).rank() };
            (image, geometric, true)
        } else {
            let shifted = &a_f - DMatrix::identity(dim, dim) * lam;
            let mut power = DMatrix::identity(dim, dim);
            for _ in 0..alg {
                power = &shifted * power;
            }
            let gen_space = numeric_null_space(&power, alg);
            let image = numeric_rank(&(&l_f * gen_space), 1e-8);
            let geometric = dim - numeric_rank(&shifted, 1e-9);
            (image, geometric, false)
        };
        defective |= geometric < alg;
        let lam = if exact { rounded } else { lam };
        if image > 0 {
            levels.push(DiagramLevel { energy_2h: -lam, a_eigenvalue: lam, multiplicity: image, exact });
        }
        if image < alg {
            removed.push(RemovedEigenvalue { a_eigenvalue: Complex::new(lam, 0.0), kernel_multiplicity: alg - image });
        }
    }
    levels.sort_by(|a, b| a.energy_2h.partial_cmp(&b.energy_2h).expect("finite"));
    removed.sort_by(|a, b| a.a_eigenvalue.re.partial_cmp(&b.a_eigenvalue.re).expect("finite"));
    Ok(DiagramSpectrum {
        n_sites,
        n_arcs: k,
        geometry,
        diagram_dim: dim,
        kernel_dim: l.kernel_dim(),
        levels,
        removed,
        defective,
    })
}

pub fn ring_spectrum_via_diagrams(n_sites: usize, k: usize) -> Result<DiagramSpectrum> {
    spectrum_via_diagrams(n_sites, k, Geometry::Ring)
}

/// Eigenvalues of `A` resolved by rotation eigenvalue `e^{2πij/N}` on a ring
/// diagram space: `(j, λ)` pairs.
pub fn momentum_resolved_a_spectrum(space: &DiagramSpace) -> Result<Vec<(usize, Complex<f64>)>> {
    let t = space.translation_matrix()?.to_f64();
    let a = space.a_operator()?.to_f64();
    let n = space.n_sites();
    let dim = space.dim();
    let tc = t.map(|x| Complex::new(x, 0.0));
    let ac = a.map(|x| Complex::new(x, 0.0));
    let mut out = Vec::new();
    for j in 0..n {
        // projector onto T = e^{2πij/N}
        let mut p = DMatrix::<Complex<f64>>::zeros(dim, dim);
        let mut tp = DMatrix::<Complex<f64>>::identity(dim, dim);
        for l in 0..n {
            let phase = Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * l) as f64 / n as f64);
            p += &tp * phase;
            tp = &tc * tp;
        }
        p /= Complex::new(n as f64, 0.0);
        let svd = p.clone().svd(true, false);
        let u = svd.u.expect("left vectors");
        let cols: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 0.5).collect();
        if cols.is_empty() {
            continue;
        }
        let q = DMatrix::from_fn(dim, cols.len(), |r, c| u[(r, cols[c])]);
        let b = q.adjoint() * &ac * &q;
        let eig = nalgebra::Schur::new(b).eigenvalues().expect("complex Schur form is triangular");
        out.extend(eig.iter().map(|&z| (j, z)));
    }
    Ok(out)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
