//! Free resolutions, the Yoneda complex and Ext.
//!
//! Each module `M_i = A / (A g_1 + ... + A g_r)` comes with a free resolution
//! `L_{*i}`. An `n`-cochain of type `(i, j)` is a family of maps
//! `phi_m : L_{m+n, j} -> L_{m, i}`; Yoneda composition and the differential
//! follow the right action convention of [`crate::matrix`].
//!
//! Dimensions of Ext are computed on the smaller complex `Hom(L_{*j}, M_i)`,
//! truncated by degree and certified by recomputing one degree higher.
//! Representatives found there are lifted back to Yoneda cocycles.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, AlgebraElement, Word};
use crate::error::{Error, Result};
use crate::linalg::{Echelon, Insert, KeyedSystem, SparseVec};
use crate::matrix::AlgMatrix;
use crate::scalar::Scalar;

/// A free resolution `... -> L_1 -> L_0 -> M -> 0` of a cyclic module.
#[derive(Clone, Debug)]
pub struct FreeResolution {
    name: String,
    ideal: Vec<u16>,
    ranks: Vec<usize>,
    differentials: Vec<AlgMatrix>,
}

impl FreeResolution {
    /// `differentials[m]` is the `ranks[m+1] x ranks[m]` matrix of `L_{m+1} -> L_m`.
    pub fn new(name: impl Into<String>, ideal: Vec<u16>, ranks: Vec<usize>, differentials: Vec<AlgMatrix>) -> Self {
        FreeResolution { name: name.into(), ideal, ranks, differentials }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ideal(&self) -> &[u16] {
        &self.ideal
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn differentials(&self) -> &[AlgMatrix] {
        &self.differentials
    }

    pub fn length(&self) -> usize {
        self.ranks.len() - 1
    }
}

/// The resolutions of a family of modules over one algebra.
#[derive(Clone, Debug)]
pub struct ResolutionSet {
    algebra: Algebra,
    resolutions: Vec<FreeResolution>,
    m_max: usize,
}

impl ResolutionSet {
    /// Validates shapes, `d d = 0`, and that `d_0` maps onto the defining ideal.
    pub fn new(algebra: Algebra, resolutions: Vec<FreeResolution>) -> Result<Self> {
        if resolutions.is_empty() {
            return Err(Error::Invalid("no modules given".into()));
        }
        for (i, r) in resolutions.iter().enumerate() {
            let bad = |reason: String| Error::InvalidResolution { module: i + 1, reason };
            if r.ranks.first() != Some(&1) {
                return Err(bad("L_0 must have rank 1 for a cyclic module".into()));
            }
            if r.differentials.len() + 1 != r.ranks.len() {
                return Err(bad(format!("{} ranks need {} differentials", r.ranks.len(), r.ranks.len() - 1)));
            }
            for (m, d) in r.differentials.iter().enumerate() {
                if d.shape() != (r.ranks[m + 1], r.ranks[m]) {
                    return Err(bad(format!("d_{m} has shape {:?}, expected {:?}", d.shape(), (r.ranks[m + 1], r.ranks[m]))));
                }
            }
            algebra.check_ideal(&r.ideal)?;
        }
        let m_max = resolutions.iter().map(|r| r.length()).max().unwrap_or(0);
        let set = ResolutionSet { algebra, resolutions, m_max };
        set.check_complex()?;
        set.check_augmentation()?;
        Ok(set)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn len(&self) -> usize {
        self.resolutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resolutions.is_empty()
    }

    pub fn resolution(&self, i: usize) -> &FreeResolution {
        &self.resolutions[i]
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn rank(&self, i: usize, m: usize) -> usize {
        self.resolutions[i].ranks.get(m).copied().unwrap_or(0)
    }

    /// The matrix of `L_{m+1, i} -> L_{m, i}`, zero past the end of the resolution.
    pub fn differential(&self, i: usize, m: usize) -> AlgMatrix {
        match self.resolutions[i].differentials.get(m) {
            Some(d) => d.clone(),
            None => AlgMatrix::zero(self.rank(i, m + 1), self.rank(i, m)),
        }
    }

    /// Products `d_{m+1} d_m`, which must all vanish.
    pub fn compositions(&self, i: usize) -> Result<Vec<AlgMatrix>> {
        let r = &self.resolutions[i];
        (0..r.differentials.len().saturating_sub(1))
            .map(|m| r.differentials[m + 1].mul(&self.algebra, &r.differentials[m]))
            .collect()
    }

    pub fn check_complex(&self) -> Result<()> {
        for i in 0..self.len() {
            for (m, p) in self.compositions(i)?.iter().enumerate() {
                if !p.is_zero() {
                    return Err(Error::InvalidResolution { module: i + 1, reason: format!("d_{} d_{m} is not zero", m + 1) });
                }
            }
        }
        Ok(())
    }

    fn check_augmentation(&self) -> Result<()> {
        for (i, r) in self.resolutions.iter().enumerate() {
            let Some(d0) = r.differentials.first() else { continue };
            for (_, _, e) in d0.entries() {
                if !self.algebra.quotient_normal_form(e, &r.ideal)?.is_zero() {
                    return Err(Error::InvalidResolution {
                        module: i + 1,
                        reason: format!("d_0 entry `{}` is not in the ideal", self.algebra.format(e)),
                    });
                }
            }
            for &g in &r.ideal {
                // each ideal generator must be hit by d_0
                let gen = AlgebraElement::monomial(vec![g], Scalar::one());
                let column: Vec<AlgebraElement> = (0..d0.rows()).map(|s| d0.get(s, 0).clone()).collect();
                if !column.iter().any(|c| *c == gen) && !self.ideal_generated_by(&column, &gen)? {
                    return Err(Error::InvalidResolution {
                        module: i + 1,
                        reason: format!("d_0 does not reach `{}`", self.algebra.generators()[g as usize]),
                    });
                }
            }
        }
        Ok(())
    }

    // Scalar combinations only; enough for presentations listing the generators in d_0.
    fn ideal_generated_by(&self, column: &[AlgebraElement], target: &AlgebraElement) -> Result<bool> {
        let mut sys: KeyedSystem<Word> = KeyedSystem::new();
        for c in column {
            sys.add_column(c.terms().map(|(w, v)| (w.clone(), v.clone())));
        }
        Ok(sys.solve(target.terms().map(|(w, v)| (w.clone(), v.clone()))).is_some())
    }
}

/// An `n`-cochain of type `(target, source)`: maps `L_{m+n, source} -> L_{m, target}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cochain {
    degree: usize,
    target: usize,
    source: usize,
    components: Vec<AlgMatrix>,
}

pub(crate) type Coord = (u32, u32, u32, Word);

impl Cochain {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn source(&self) -> usize {
        self.source
    }

    /// `(target, source)`, the same convention as monomial types.
    pub fn ty(&self) -> (usize, usize) {
        (self.target, self.source)
    }

    pub fn components(&self) -> &[AlgMatrix] {
        &self.components
    }

    pub fn component(&self, m: usize) -> Option<&AlgMatrix> {
        self.components.get(m)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    fn same_shape(&self, other: &Cochain) -> Result<()> {
        if (self.degree, self.target, self.source) != (other.degree, other.target, other.source) {
            return Err(Error::DimensionMismatch(format!(
                "cochains of degree {} type {:?} and degree {} type {:?}",
                self.degree,
                self.ty(),
                other.degree,
                other.ty()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.same_shape(other)?;
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Cochain { components, ..self.clone() })
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Cochain {
        self.scale(&-Scalar::one())
    }

    pub fn scale(&self, c: &Scalar) -> Cochain {
        Cochain { components: self.components.iter().map(|m| m.scale(c)).collect(), ..self.clone() }
    }

    pub fn max_degree(&self, alg: &Algebra) -> Option<u32> {
        self.components.iter().filter_map(|m| m.max_degree(alg)).max()
    }

    pub(crate) fn coords(&self) -> Vec<(Coord, Scalar)> {
        let mut out = Vec::new();
        for (m, comp) in self.components.iter().enumerate() {
            for (r, c, e) in comp.entries() {
                for (w, v) in e.terms() {
                    out.push(((m as u32, r as u32, c as u32, w.clone()), v.clone()));
                }
            }
        }
        out
    }
}

/// Options shared by the truncated solvers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Initial degree bound for truncated linear algebra.
    pub degree_bound: u32,
    /// Increment applied when a truncated solve fails.
    pub retry_step: u32,
    /// Largest bound tried before giving up.
    pub max_bound: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { degree_bound: 4, retry_step: 2, max_bound: 12 }
    }
}

/// Result of projecting a cocycle onto a basis modulo coboundaries.
#[derive(Clone, Debug)]
pub struct Projection {
    /// `y = Σ coefficients[l] basis[l] + d(witness)`.
    pub coefficients: Vec<Scalar>,
    pub witness: Cochain,
    pub bound: u32,
}

/// A basis of `Ext^1` and `Ext^2` by Yoneda cocycles, keyed by type `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtBasis {
    p: usize,
    ext1: BTreeMap<(usize, usize), Vec<Cochain>>,
    ext2: BTreeMap<(usize, usize), Vec<Cochain>>,
}

impl ExtBasis {
    pub fn new(p: usize, ext1: BTreeMap<(usize, usize), Vec<Cochain>>, ext2: BTreeMap<(usize, usize), Vec<Cochain>>) -> Result<Self> {
        for (n, table) in [(1, &ext1), (2, &ext2)] {
            for (&(i, j), cs) in table.iter() {
                if i >= p || j >= p {
                    return Err(Error::Invalid(format!("basis type ({}, {}) out of range", i + 1, j + 1)));
                }
                if cs.iter().any(|c| c.degree != n || c.ty() != (i, j)) {
                    return Err(Error::Invalid(format!("Ext^{n} basis of type ({}, {}) has a cochain of the wrong shape", i + 1, j + 1)));
                }
            }
        }
        Ok(ExtBasis { p, ext1, ext2 })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn ext1(&self, i: usize, j: usize) -> &[Cochain] {
        self.ext1.get(&(i, j)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn ext2(&self, i: usize, j: usize) -> &[Cochain] {
        self.ext2.get(&(i, j)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn dims(&self, n: usize) -> Vec<Vec<usize>> {
        (0..self.p)
            .map(|i| (0..self.p).map(|j| if n == 1 { self.ext1(i, j).len() } else { self.ext2(i, j).len() }).collect())
            .collect()
    }

    pub fn generator_table(&self) -> crate::matric::GeneratorTable {
        crate::matric::GeneratorTable::new(self.dims(1), self.dims(2)).expect("square tables")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct SolverKey {
    degree: usize,
    target: usize,
    source: usize,
    bound: u32,
    basis: Vec<Cochain>,
}

/// Preimages under `d` within a degree truncation, optionally modulo a basis of cocycles.
struct CoboundarySolver {
    unknowns: Vec<Coord>,
    n_unknowns: usize,
    system: KeyedSystem<Coord>,
}

/// Resolutions together with the Yoneda operations and solvers built on them.
pub struct Yoneda {
    res: ResolutionSet,
    options: SolverOptions,
    solvers: Mutex<HashMap<SolverKey, Arc<CoboundarySolver>>>,
}

impl Yoneda {
    pub fn new(res: ResolutionSet, options: SolverOptions) -> Self {
        Yoneda { res, options, solvers: Mutex::new(HashMap::new()) }
    }

    pub fn resolutions(&self) -> &ResolutionSet {
        &self.res
    }

    pub fn algebra(&self) -> &Algebra {
        &self.res.algebra
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn p(&self) -> usize {
        self.res.len()
    }

    fn component_count(&self, n: usize) -> usize {
        (self.res.m_max + 1).saturating_sub(n)
    }

    fn component_shape(&self, n: usize, target: usize, source: usize, m: usize) -> (usize, usize) {
        (self.res.rank(source, m + n), self.res.rank(target, m))
    }

    pub fn zero(&self, n: usize, target: usize, source: usize) -> Cochain {
        let components = (0..self.component_count(n))
            .map(|m| {
                let (r, c) = self.component_shape(n, target, source, m);
                AlgMatrix::zero(r, c)
            })
            .collect();
        Cochain { degree: n, target, source, components }
    }

    /// Builds a cochain from its components, checking their shapes. Missing trailing components are zero.
    pub fn cochain(&self, n: usize, target: usize, source: usize, components: Vec<AlgMatrix>) -> Result<Cochain> {
        let count = self.component_count(n);
        if components.len() > count {
            return Err(Error::DimensionMismatch(format!("{} components given, at most {count} exist", components.len())));
        }
        let mut out = self.zero(n, target, source);
        for (m, c) in components.into_iter().enumerate() {
            let expect = self.component_shape(n, target, source, m);
            if c.shape() != expect {
                return Err(Error::DimensionMismatch(format!("component {m} has shape {:?}, expected {:?}", c.shape(), expect)));
            }
            out.components[m] = c;
        }
        Ok(out)
    }

    /// The 0-cochain given by identity maps.
    pub fn identity(&self, i: usize) -> Cochain {
        let components = (0..self.component_count(0)).map(|m| AlgMatrix::identity(self.res.rank(i, m))).collect();
        Cochain { degree: 0, target: i, source: i, components }
    }

    /// The resolution differential viewed as a 1-cochain of type `(i, i)`.
    pub fn resolution_cochain(&self, i: usize) -> Cochain {
        let components = (0..self.component_count(1)).map(|m| self.res.differential(i, m)).collect();
        Cochain { degree: 1, target: i, source: i, components }
    }

    /// `d(phi)_m = d^src_{n+m} phi_m + (-1)^{n+1} phi_{m+1} d^tgt_m`.
    pub fn differential(&self, phi: &Cochain) -> Result<Cochain> {
        let alg = self.algebra();
        let n = phi.degree;
        let mut out = self.zero(n + 1, phi.target, phi.source);
        let sign = if n % 2 == 1 { Scalar::one() } else { -Scalar::one() };
        for m in 0..out.components.len() {
            let mut acc = self.res.differential(phi.source, n + m).mul(alg, &phi.components[m])?;
            if let Some(next) = phi.components.get(m + 1) {
                if !next.is_zero() {
                    let t = next.mul(alg, &self.res.differential(phi.target, m))?;
                    acc = acc.add(&t.scale(&sign))?;
                }
            }
            out.components[m] = acc;
        }
        Ok(out)
    }

    pub fn is_cocycle(&self, phi: &Cochain) -> Result<bool> {
        Ok(self.differential(phi)?.is_zero())
    }

    /// Yoneda product: `inner` after `outer` in the sense of the right action,
    /// `(outer . inner)_m = inner_{m+a} outer_m` with `a = deg outer`.
    pub fn compose(&self, outer: &Cochain, inner: &Cochain) -> Result<Cochain> {
        if outer.source != inner.target {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose type {:?} with type {:?}",
                outer.ty(),
                inner.ty()
            )));
        }
        let alg = self.algebra();
        let a = outer.degree;
        let mut out = self.zero(a + inner.degree, outer.target, inner.source);
        for m in 0..out.components.len() {
            let (Some(i), Some(o)) = (inner.components.get(m + a), outer.components.get(m)) else { continue };
            out.components[m] = i.mul(alg, o)?;
        }
        Ok(out)
    }

    pub(crate) fn cochain_from_coords(&self, n: usize, target: usize, source: usize, coords: impl IntoIterator<Item = (Coord, Scalar)>) -> Cochain {
        let mut out = self.zero(n, target, source);
        for ((m, r, c, w), v) in coords {
            let comp = &mut out.components[m as usize];
            let cur = comp.get(r as usize, c as usize).add(&AlgebraElement::monomial(w, v));
            comp.set(r as usize, c as usize, cur);
        }
        out
    }

    pub(crate) fn unknowns(&self, n: usize, target: usize, source: usize, bound: u32, from_component: usize) -> Vec<Coord> {
        let words = self.algebra().normal_words(bound);
        let mut out = Vec::new();
        for w in &words {
            for m in from_component..self.component_count(n) {
                let (rows, cols) = self.component_shape(n, target, source, m);
                for r in 0..rows {
                    for c in 0..cols {
                        out.push((m as u32, r as u32, c as u32, w.clone()));
                    }
                }
            }
        }
        out
    }

    fn build_solver(&self, n: usize, target: usize, source: usize, bound: u32, basis: &[Cochain], from_component: usize) -> Result<CoboundarySolver> {
        let unknowns = self.unknowns(n - 1, target, source, bound, from_component);
        let mut system: KeyedSystem<Coord> = KeyedSystem::new();
        for u in &unknowns {
            let unit = self.cochain_from_coords(n - 1, target, source, [(u.clone(), Scalar::one())]);
            system.add_column(self.differential(&unit)?.coords());
        }
        for b in basis {
            if let (_, Insert::Dependent(_)) = system.add_column(b.coords()) {
                return Err(Error::Invariant(format!(
                    "Ext^{n} basis of type ({}, {}) is dependent modulo coboundaries",
                    target + 1,
                    source + 1
                )));
            }
        }
        Ok(CoboundarySolver { n_unknowns: unknowns.len(), unknowns, system })
    }

    fn solver(&self, n: usize, target: usize, source: usize, bound: u32, basis: &[Cochain]) -> Result<Arc<CoboundarySolver>> {
        let key = SolverKey { degree: n, target, source, bound, basis: basis.to_vec() };
        if let Some(s) = self.solvers.lock().expect("solver cache").get(&key) {
            return Ok(s.clone());
        }
        let s = Arc::new(self.build_solver(n, target, source, bound, basis, 0)?);
        self.solvers.lock().expect("solver cache").insert(key, s.clone());
        Ok(s)
    }

    pub(crate) fn bounds_for(&self, start: Option<u32>) -> Vec<u32> {
        let first = self.options.degree_bound.max(start.unwrap_or(0));
        let last = self.options.max_bound.max(first);
        let step = self.options.retry_step.max(1);
        let mut out = Vec::new();
        let mut b = first;
        while b <= last {
            out.push(b);
            b += step;
        }
        if out.last() != Some(&last) {
            out.push(last);
        }
        out
    }

    /// Writes the cocycle `y` as `Σ c_l basis[l] + d(w)`, growing the degree bound on failure.
    pub fn project(&self, y: &Cochain, basis: &[Cochain]) -> Result<Projection> {
        if y.degree == 0 {
            return Err(Error::Invalid("cannot project a 0-cochain".into()));
        }
        if !self.is_cocycle(y)? {
            return Err(Error::NotACocycle(format!("degree {} cochain of type ({}, {})", y.degree, y.target + 1, y.source + 1)));
        }
        if y.is_zero() {
            return Ok(Projection { coefficients: vec![Scalar::zero(); basis.len()], witness: self.zero(y.degree - 1, y.target, y.source), bound: 0 });
        }
        let bounds = self.bounds_for(y.max_degree(self.algebra()));
        let coords = y.coords();
        for &bound in &bounds {
            let solver = self.solver(y.degree, y.target, y.source, bound, basis)?;
            if let Some(combo) = solver.system.solve(coords.iter().cloned()) {
                let coefficients = (0..basis.len()).map(|l| combo.get(solver.n_unknowns + l)).collect();
                let witness = self.cochain_from_coords(
                    y.degree - 1,
                    y.target,
                    y.source,
                    combo.iter().filter(|(t, _)| *t < solver.n_unknowns).map(|(t, v)| (solver.unknowns[t].clone(), v.clone())),
                );
                return Ok(Projection { coefficients, witness, bound });
            }
        }
        Err(Error::ProjectionFailed { bound: *bounds.last().expect("at least one bound") })
    }

    /// A cochain `a` with `d(a) = y`.
    pub fn solve_coboundary(&self, y: &Cochain, basis: &[Cochain]) -> Result<Cochain> {
        match self.project(y, basis) {
            Ok(p) if p.coefficients.iter().all(|c| c.is_zero()) => Ok(p.witness),
            Ok(p) => Err(Error::NotACoboundary { bound: p.bound }),
            Err(Error::ProjectionFailed { bound }) => Err(Error::NotACoboundary { bound }),
            Err(e) => Err(e),
        }
    }

    // ---- Ext through Hom(L_{*j}, M_i) ----

    fn module_words(&self, i: usize, bound: u32) -> Vec<Word> {
        let ideal = self.res.resolution(i).ideal();
        self.algebra().normal_words(bound).into_iter().filter(|w| !w.iter().any(|g| ideal.contains(g))).collect()
    }

    /// `(d* u)_s = Σ_k D_{n,j}[s, k] u_k` in `M_i`.
    fn hom_differential(&self, i: usize, j: usize, n: usize, u: &[(usize, Word, Scalar)]) -> Result<Vec<((usize, Word), Scalar)>> {
        let alg = self.algebra();
        let d = self.res.differential(j, n);
        let ideal = self.res.resolution(i).ideal();
        let mut out: BTreeMap<(usize, Word), Scalar> = BTreeMap::new();
        for s in 0..d.rows() {
            let mut acc = AlgebraElement::zero();
            for (k, w, v) in u {
                let entry = d.get(s, *k);
                if entry.is_zero() {
                    continue;
                }
                acc = acc.add(&alg.mul(entry, &AlgebraElement::monomial(w.clone(), v.clone()))?);
            }
            for (w, v) in alg.quotient_normal_form(&acc, ideal)?.terms() {
                *out.entry((s, w.clone())).or_insert_with(Scalar::zero) += v;
            }
        }
        Ok(out.into_iter().filter(|(_, v)| !v.is_zero()).collect())
    }

    fn slack(&self, j: usize) -> u32 {
        let alg = self.algebra();
        let s = self.res.resolution(j).differentials().iter().filter_map(|d| d.max_degree(alg)).max().unwrap_or(0);
        2 * s.max(1)
    }

    /// Cocycles and coboundaries of `Hom^n(L_{*j}, M_i)` in degrees up to `bound`.
    /// Coordinates are listed from the highest degree down.
    fn hom_cohomology(&self, i: usize, j: usize, n: usize, bound: u32) -> Result<HomCohomology> {
        let alg = self.algebra();
        let mut words = self.module_words(i, bound);
        words.sort_by(|a, b| alg.word_degree(b).cmp(&alg.word_degree(a)).then_with(|| a.cmp(b)));
        let rank = self.res.rank(j, n);
        let coords: Vec<(usize, Word)> = words.iter().flat_map(|w| (0..rank).map(move |k| (k, w.clone()))).collect();
        let index: HashMap<(usize, Word), usize> = coords.iter().enumerate().map(|(t, c)| (c.clone(), t)).collect();

        let mut zsys: KeyedSystem<(usize, Word)> = KeyedSystem::new();
        let mut cocycles = Vec::new();
        for (k, w) in &coords {
            let image = self.hom_differential(i, j, n, &[(*k, w.clone(), Scalar::one())])?;
            if let (_, Insert::Dependent(rel)) = zsys.add_column(image) {
                cocycles.push(rel);
            }
        }

        let mut boundaries = Vec::new();
        if n > 0 {
            let prev_rank = self.res.rank(j, n - 1);
            let prev_words = self.module_words(i, bound + self.slack(j));
            let mut images = Vec::new();
            let mut highs = Vec::new();
            for w in &prev_words {
                for k in 0..prev_rank {
                    let image = self.hom_differential(i, j, n - 1, &[(k, w.clone(), Scalar::one())])?;
                    let (hi, lo): (Vec<_>, Vec<_>) = image.into_iter().partition(|(c, _)| !index.contains_key(c));
                    highs.push(hi);
                    images.push(SparseVec::from_pairs(lo.into_iter().map(|(c, v)| (index[&c], v))));
                }
            }
            // combinations whose high degree part cancels
            let mut high: KeyedSystem<(usize, Word)> = KeyedSystem::new();
            let mut e = Echelon::new();
            for hi in highs {
                if let (_, Insert::Dependent(rel)) = high.add_column(hi) {
                    let mut v = SparseVec::new();
                    for (s, c) in rel.iter() {
                        v = v.add_scaled(c, &images[s]);
                    }
                    if !v.is_zero() && matches!(e.insert(&v, boundaries.len()), Insert::Independent { .. }) {
                        boundaries.push(v);
                    }
                }
            }
        }
        Ok(HomCohomology { coords, cocycles, boundaries })
    }

    /// `dim Ext^n(M_j, M_i)` within degree `bound`, without certification.
    pub fn ext_dimension_at(&self, i: usize, j: usize, n: usize, bound: u32) -> Result<usize> {
        let h = self.hom_cohomology(i, j, n, bound)?;
        Ok(h.cocycles.len() - h.boundaries.len())
    }

    /// `dim Ext^n(M_j, M_i)`, certified by agreement at two consecutive bounds.
    pub fn ext_dimension(&self, i: usize, j: usize, n: usize) -> Result<usize> {
        Ok(self.certified_bound(i, j, n)?.1)
    }

    fn certified_bound(&self, i: usize, j: usize, n: usize) -> Result<(u32, usize)> {
        let mut last = None;
        for bound in self.bounds_for(None) {
            let a = self.ext_dimension_at(i, j, n, bound)?;
            let b = self.ext_dimension_at(i, j, n, bound + 1)?;
            if a == b {
                return Ok((bound, a));
            }
            last = Some(bound + 1);
        }
        Err(Error::NotStabilized { i: i + 1, j: j + 1, n, bound: last.unwrap_or(self.options.max_bound) })
    }

    /// The table `dims[i][j] = dim Ext^n(M_j, M_i)`.
    pub fn ext_table(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        (0..self.p()).map(|i| (0..self.p()).map(|j| self.ext_dimension(i, j, n)).collect()).collect()
    }

    /// Representatives of `Ext^n(M_j, M_i)` as elements of `Hom(L_{n,j}, M_i)`,
    /// preferring the lowest degrees.
    pub fn hom_representatives(&self, i: usize, j: usize, n: usize) -> Result<Vec<Vec<AlgebraElement>>> {
        let (bound, dim) = self.certified_bound(i, j, n)?;
        let h = self.hom_cohomology(i, j, n, bound)?;
        let alg = self.algebra();
        let mut e = Echelon::new();
        for (t, b) in h.boundaries.iter().enumerate() {
            e.insert(b, t);
        }
        let degree_of = |v: &SparseVec| v.iter().map(|(t, _)| alg.word_degree(&h.coords[t].1)).max().unwrap_or(0);
        let mut zs = h.cocycles.clone();
        zs.sort_by_key(|v| (degree_of(v), v.leading().map(|(t, _)| std::cmp::Reverse(t))));
        let mut reps = Vec::new();
        for z in zs {
            let rem = e.reduce(&z).remainder;
            if rem.is_zero() {
                continue;
            }
            e.insert(&z, h.boundaries.len() + reps.len());
            let lead = rem.leading().map(|(_, c)| c.clone()).unwrap_or_else(Scalar::one);
            let rem = rem.scaled(&lead.recip());
            let mut u = vec![AlgebraElement::zero(); self.res.rank(j, n)];
            for (t, v) in rem.iter() {
                let (k, w) = &h.coords[t];
                u[*k] = u[*k].add(&AlgebraElement::monomial(w.clone(), v.clone()));
            }
            reps.push(u);
        }
        if reps.len() != dim {
            return Err(Error::Invariant(format!("found {} representatives for an Ext of dimension {dim}", reps.len())));
        }
        Ok(reps)
    }

    /// Lifts `u in Hom(L_{n,j}, M_i)` to a Yoneda cocycle with `phi_0 = u`.
    pub fn lift_to_cocycle(&self, i: usize, j: usize, n: usize, u: &[AlgebraElement]) -> Result<Cochain> {
        if self.res.rank(i, 0) != 1 {
            return Err(Error::Invalid("target resolution must start with a rank one module".into()));
        }
        let mut phi = self.zero(n, i, j);
        if phi.components.is_empty() {
            return Ok(phi);
        }
        let col = u.iter().map(|e| vec![e.clone()]).collect::<Vec<_>>();
        phi.components[0] = AlgMatrix::from_rows(col, 1)?;
        let rhs = self.differential(&phi)?.neg();
        if rhs.is_zero() {
            return Ok(phi);
        }
        let start = rhs.max_degree(self.algebra()).map(|d| d + 1);
        for bound in self.bounds_for(start) {
            let solver = self.build_solver(n + 1, i, j, bound, &[], 1)?;
            if let Some(combo) = solver.system.solve(rhs.coords()) {
                let rest = self.cochain_from_coords(n, i, j, combo.iter().map(|(t, v)| (solver.unknowns[t].clone(), v.clone())));
                let lifted = phi.add(&rest)?;
                if !self.is_cocycle(&lifted)? {
                    return Err(Error::Invariant("lifted representative is not a cocycle".into()));
                }
                return Ok(lifted);
            }
        }
        Err(Error::NotACoboundary { bound: self.options.max_bound })
    }

    pub fn ext_representatives(&self, i: usize, j: usize, n: usize) -> Result<Vec<Cochain>> {
        self.hom_representatives(i, j, n)?.iter().map(|u| self.lift_to_cocycle(i, j, n, u)).collect()
    }

    /// Computes bases of `Ext^1` and `Ext^2` for every pair.
    pub fn compute_ext_basis(&self) -> Result<ExtBasis> {
        let p = self.p();
        let mut ext1 = BTreeMap::new();
        let mut ext2 = BTreeMap::new();
        for i in 0..p {
            for j in 0..p {
                let r1 = self.ext_representatives(i, j, 1)?;
                if !r1.is_empty() {
                    ext1.insert((i, j), r1);
                }
                let r2 = self.ext_representatives(i, j, 2)?;
                if !r2.is_empty() {
                    ext2.insert((i, j), r2);
                }
            }
        }
        ExtBasis::new(p, ext1, ext2)
    }

    /// Checks that supplied cocycles form a basis matching the computed dimensions.
    pub fn validate_ext_basis(&self, basis: &ExtBasis) -> Result<()> {
        for n in [1, 2] {
            let dims = self.ext_table(n)?;
            for i in 0..self.p() {
                for j in 0..self.p() {
                    let cs = if n == 1 { basis.ext1(i, j) } else { basis.ext2(i, j) };
                    if cs.len() != dims[i][j] {
                        return Err(Error::Invalid(format!(
                            "Ext^{n}(M{}, M{}) has dimension {} but {} representatives were given",
                            j + 1,
                            i + 1,
                            dims[i][j],
                            cs.len()
                        )));
                    }
                    for c in cs {
                        if !self.is_cocycle(c)? {
                            return Err(Error::NotACocycle(format!("Ext^{n} representative of type ({}, {})", i + 1, j + 1)));
                        }
                    }
                    if !cs.is_empty() {
                        self.solver(n, i, j, self.options.degree_bound, cs)?;
                    }
                }
            }
        }
        Ok(())
    }
}

struct HomCohomology {
    coords: Vec<(usize, Word)>,
    cocycles: Vec<SparseVec>,
    boundaries: Vec<SparseVec>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_line() -> Yoneda {
        let alg = Algebra::preset("poly1").unwrap();
        let x = alg.generator_index("x").unwrap();
        let d0 = AlgMatrix::parse(&alg, &[vec!["x".into()]], 1).unwrap();
        let res = ResolutionSet::new(alg, vec![FreeResolution::new("M", vec![x], vec![1, 1], vec![d0])]).unwrap();
        Yoneda::new(res, SolverOptions::default())
    }

    #[test]
    fn point_on_a_line() {
        let y = point_line();
        assert_eq!(y.ext_dimension(0, 0, 1).unwrap(), 1);
        assert_eq!(y.ext_dimension(0, 0, 2).unwrap(), 0);
        let reps = y.ext_representatives(0, 0, 1).unwrap();
        assert_eq!(reps.len(), 1);
        assert!(y.is_cocycle(&reps[0]).unwrap());
        let sq = y.compose(&reps[0], &reps[0]).unwrap();
        assert!(sq.is_zero());
    }

    #[test]
    fn d_squared_vanishes_on_units() {
        let y = point_line();
        let alg = y.algebra().clone();
        let phi = y.cochain(0, 0, 0, vec![AlgMatrix::parse(&alg, &[vec!["x^2".into()]], 1).unwrap()]).unwrap();
        let d1 = y.differential(&phi).unwrap();
        assert!(y.differential(&d1).unwrap().is_zero());
        let w = y.solve_coboundary(&d1, &[]).unwrap();
        assert_eq!(y.differential(&w).unwrap(), d1);
    }
}
