//! Matric Massey products and the order by order hull computation.
//!
//! A defining system assigns a 1-cochain `alpha(X)` to every basis monomial
//! `X` of the current truncated hull `H_n = T^1 / (f) + I^n`, with
//! `alpha(e_i)` the resolution differentials and `alpha(x_ij(l))` the chosen
//! Ext^1 representatives. For a monomial `X` the product sum is
//!
//! ```text
//! P(X)_m = Σ_{X = X' X''} alpha(X'')_{m+1} alpha(X')_m
//! ```
//!
//! over factorizations into basis monomials. The family is flat over an
//! algebra with structure constants `c` when `Σ_X c(X, Z) P(X) = 0` for every
//! basis monomial `Z`.
//!
//! Advancing from order `n` to `n + 1` expands the product sums in the
//! algebra `R_n = T^1 / (I f + f I + I^{n+1})`, in which each current relation
//! `f_l` is kept as a formal symbol. The degree `n` coefficients are the
//! obstruction cocycles `y(X)`; their Ext^2 coordinates are the Massey
//! products and extend the relations. Monomials that survive in `H_{n+1}`
//! receive correction cochains solving `d alpha(Z) = -Y(Z)`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matric::{
    monomials_of_degree, GeneratorTable, IdealGenerators, MatricMonomial, MatricPoly, MonomialOrder, MonomialQuotient,
};
use crate::scalar::Scalar;
use crate::yoneda::{Cochain, ExtBasis, Yoneda};

/// Options of the hull iteration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HullOptions {
    /// Highest order of Massey products computed (the degree of the relations).
    pub max_order: usize,
    /// The stabilization check keeps monomials up to this many degrees above the relations.
    pub verify_offset: usize,
    /// Stop as soon as the stabilization certificate succeeds.
    pub stop_when_stabilized: bool,
}

impl Default for HullOptions {
    fn default() -> Self {
        HullOptions { max_order: 5, verify_offset: 2, stop_when_stabilized: true }
    }
}

/// Cochains `alpha(X)` on the basis monomials of the current truncated hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefiningSystem {
    cochains: BTreeMap<MatricMonomial, Cochain>,
}

impl DefiningSystem {
    pub fn get(&self, m: &MatricMonomial) -> Option<&Cochain> {
        self.cochains.get(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MatricMonomial, &Cochain)> + '_ {
        self.cochains.iter()
    }

    pub fn len(&self) -> usize {
        self.cochains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cochains.is_empty()
    }

    pub fn insert(&mut self, m: MatricMonomial, c: Cochain) {
        self.cochains.insert(m, c);
    }
}

/// What happened while advancing from one order to the next.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderLog {
    /// Degree of the monomials whose products were computed.
    pub order: usize,
    /// Ext^2 coordinates of `y(X)` for every degree `order` monomial `X` of `R_n`.
    pub products: BTreeMap<MatricMonomial, Vec<Scalar>>,
    /// Every `y(X)` was checked to be a cocycle.
    pub cocycles_checked: usize,
    /// The formal relation symbols projected to unit vectors.
    pub series_consistent: bool,
    /// Monomials of degree `order` kept in the next truncated hull.
    pub basis: Vec<MatricMonomial>,
    /// Kept monomials whose correction cochain is nonzero.
    pub nonzero_corrections: Vec<MatricMonomial>,
}

/// The state after computing relations up to degree `order - 1`.
#[derive(Clone, Debug)]
pub struct HullState {
    order: usize,
    series: Vec<MatricPoly>,
    quotient: MonomialQuotient,
    system: DefiningSystem,
    log: Vec<OrderLog>,
}

impl HullState {
    /// `n`, where the state describes `H_n = T^1 / (f^{n-1}) + I^n`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Highest degree of Massey products already absorbed into the relations.
    pub fn relation_degree(&self) -> usize {
        self.order - 1
    }

    /// Relations `f_ij(l)`, one per Ext^2 basis element in enumeration order.
    pub fn series(&self) -> &[MatricPoly] {
        &self.series
    }

    pub fn quotient(&self) -> &MonomialQuotient {
        &self.quotient
    }

    pub fn system(&self) -> &DefiningSystem {
        &self.system
    }

    pub fn log(&self) -> &[OrderLog] {
        &self.log
    }

    /// Replaces the relations, for experiments with perturbed data.
    pub fn with_series(&self, series: Vec<MatricPoly>) -> HullState {
        HullState { series, ..self.clone() }
    }
}

/// A single entry of the stabilization identity: `coefficient ⊗ monomial`
/// at position `(row, col)` of component `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateTerm {
    pub component: usize,
    pub row: usize,
    pub col: usize,
    pub monomial: String,
    pub coefficient: String,
}

/// Outcome of the stabilization check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilization {
    pub stabilized: bool,
    /// Monomials of degree below this cutoff were kept in the check.
    pub cutoff: usize,
    /// The product sums `Σ_X P(X) ⊗ X` before reduction.
    pub terms: Vec<CertificateTerm>,
    /// Human readable form of the identity, e.g. `1 ⊗ (x13*x34 - x12*x24 + ...)`.
    pub identity: Vec<String>,
    /// First failing monomial and component when not stabilized.
    pub failure: Option<(String, usize)>,
}

/// The result of [`MasseyEngine::compute_hull`].
#[derive(Clone, Debug)]
pub struct HullResult {
    pub state: HullState,
    pub stabilization: Stabilization,
}

/// Value of an immediately defined Massey product.
#[derive(Clone, Debug, PartialEq)]
pub enum ImmediateMassey {
    /// Coordinates over the Ext^2 basis of the monomial's type.
    Defined(Vec<Scalar>),
    /// The defining system could not be extended past this monomial.
    Undefined { at: MatricMonomial, obstruction: Vec<Scalar> },
}

/// Runs the hull algorithm for one family.
pub struct MasseyEngine<'a> {
    yoneda: &'a Yoneda,
    ext: &'a ExtBasis,
    table: GeneratorTable,
    order: MonomialOrder,
    options: HullOptions,
}

type Products = HashMap<MatricMonomial, Cochain>;

impl<'a> MasseyEngine<'a> {
    pub fn new(yoneda: &'a Yoneda, ext: &'a ExtBasis, order: MonomialOrder, options: HullOptions) -> Result<Self> {
        if ext.p() != yoneda.p() {
            return Err(Error::DimensionMismatch("Ext basis and resolutions describe different families".into()));
        }
        if yoneda.resolutions().m_max() < 1 {
            return Err(Error::Invalid("resolutions must have length at least 1".into()));
        }
        Ok(MasseyEngine { yoneda, ext, table: ext.generator_table(), order, options })
    }

    pub fn table(&self) -> &GeneratorTable {
        &self.table
    }

    pub fn options(&self) -> &HullOptions {
        &self.options
    }

    pub fn monomial_order(&self) -> &MonomialOrder {
        &self.order
    }

    fn ext2_basis(&self, ty: (usize, usize)) -> &[Cochain] {
        self.ext.ext2(ty.0, ty.1)
    }

    /// `H_2 = T^1_2` with `alpha(e_i) = d` and `alpha(x)` the Ext^1 representatives.
    pub fn init_order2(&self) -> Result<HullState> {
        let quotient = MonomialQuotient::truncated_free(&self.table, 2)?;
        let mut system = DefiningSystem { cochains: BTreeMap::new() };
        for i in 0..self.table.p() {
            system.insert(MatricMonomial::idempotent(i), self.yoneda.resolution_cochain(i));
        }
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        for (id, a) in self.table.arrows().iter().enumerate() {
            let k = seen.entry((a.left, a.right)).or_insert(0);
            let c = self.ext.ext1(a.left, a.right)[*k].clone();
            *k += 1;
            system.insert(MatricMonomial::arrow(&self.table, id), c);
        }
        let series = self.table.obstructions().iter().map(|o| MatricPoly::zero(o.left, o.right)).collect();
        Ok(HullState { order: 2, series, quotient, system, log: Vec::new() })
    }

    /// `P(X)` for every product `X = X' X''` of system monomials with degree at most `max_degree`.
    fn products(&self, system: &DefiningSystem, max_degree: usize) -> Result<Products> {
        let mut out: Products = HashMap::new();
        let entries: Vec<(&MatricMonomial, &Cochain)> =
            system.iter().filter(|(m, c)| m.is_idempotent() || !c.is_zero()).collect();
        for (x1, a1) in &entries {
            for (x2, a2) in &entries {
                if x1.degree() + x2.degree() > max_degree {
                    continue;
                }
                let Some(x) = x1.concat(x2) else { continue };
                let c = self.yoneda.compose(a1, a2)?;
                match out.get_mut(&x) {
                    Some(acc) => *acc = acc.add(&c)?,
                    None => {
                        out.insert(x, c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Expands `Σ_X P(X) X` in `quotient`: coordinates over its basis and its formal symbols.
    fn expand_products(&self, quotient: &MonomialQuotient, products: &Products) -> Result<(Vec<Option<Cochain>>, Vec<Option<Cochain>>)> {
        let mut basis_part: Vec<Option<Cochain>> = vec![None; quotient.basis().len()];
        let mut tag_part: Vec<Option<Cochain>> = vec![None; quotient.n_tags()];
        let mut keys: Vec<&MatricMonomial> = products.keys().collect();
        keys.sort();
        for x in keys {
            let p = &products[x];
            let (b, t) = quotient.expand(x);
            for (slots, coords) in [(&mut basis_part, b), (&mut tag_part, t)] {
                for (k, c) in coords.iter() {
                    let term = p.scale(c);
                    slots[k] = Some(match slots[k].take() {
                        Some(acc) => acc.add(&term)?,
                        None => term,
                    });
                }
            }
        }
        Ok((basis_part, tag_part))
    }

    fn obstruction_quotient(&self, state: &HullState) -> Result<MonomialQuotient> {
        MonomialQuotient::build_general(
            &self.table,
            IdealGenerators { two_sided: &[], bracketed: &state.series, tagged: &state.series },
            state.order + 1,
            &self.order,
        )
    }

    /// The obstruction cocycles `y(X)` for the degree `n` monomials of `R_n`.
    pub fn obstruction_cocycles(&self, state: &HullState) -> Result<BTreeMap<MatricMonomial, Cochain>> {
        let n = state.order;
        let r = self.obstruction_quotient(state)?;
        let products = self.products(&state.system, n)?;
        let (basis_part, _) = self.expand_products(&r, &products)?;
        let mut out = BTreeMap::new();
        for (k, m) in r.basis().iter().enumerate() {
            if m.degree() != n {
                continue;
            }
            let y = basis_part[k].clone().unwrap_or_else(|| self.yoneda.zero(2, m.left(), m.right()));
            out.insert(m.clone(), y);
        }
        Ok(out)
    }

    /// `y(X)` for one monomial of `R_n`.
    pub fn obstruction_cocycle(&self, x: &MatricMonomial, state: &HullState) -> Result<Cochain> {
        self.obstruction_cocycles(state)?
            .remove(x)
            .ok_or_else(|| Error::Invalid(format!("{} is not a degree {} basis monomial of R_n", x.format(&self.table), state.order)))
    }

    /// Ext^2 coordinates of every `y(X)` at the state's order.
    pub fn massey_products_of_order(&self, state: &HullState) -> Result<BTreeMap<MatricMonomial, Vec<Scalar>>> {
        let ys = self.obstruction_cocycles(state)?;
        let mut out = BTreeMap::new();
        for (x, y) in ys {
            let p = self.project(&y, x.ty()).map_err(|e| e.at_order(state.order, Some(x.format(&self.table))))?;
            out.insert(x, p);
        }
        Ok(out)
    }

    fn project(&self, y: &Cochain, ty: (usize, usize)) -> Result<Vec<Scalar>> {
        let basis = self.ext2_basis(ty);
        if y.is_zero() {
            return Ok(vec![Scalar::zero(); basis.len()]);
        }
        Ok(self.yoneda.project(y, basis)?.coefficients)
    }

    /// Flatness of `system` over `quotient`: the first `(Z, m)` where it fails.
    fn flatness_failure(&self, quotient: &MonomialQuotient, products: &Products) -> Result<Option<(MatricMonomial, usize)>> {
        let (basis_part, _) = self.expand_products(quotient, products)?;
        for (k, z) in quotient.basis().iter().enumerate() {
            if let Some(c) = &basis_part[k] {
                if let Some(m) = c.components().iter().position(|comp| !comp.is_zero()) {
                    return Ok(Some((z.clone(), m)));
                }
            }
        }
        Ok(None)
    }

    /// One step of the iteration: Massey products of degree `n`, new relations,
    /// basis selection and correction cochains.
    pub fn advance_order(&self, state: &HullState) -> Result<HullState> {
        let n = state.order;
        let tag = |e: Error, m: Option<&MatricMonomial>| e.at_order(n, m.map(|m| m.format(&self.table)));

        let r = self.obstruction_quotient(state).map_err(|e| tag(e, None))?;
        let products = self.products(&state.system, n).map_err(|e| tag(e, None))?;
        let (basis_part, tag_part) = self.expand_products(&r, &products).map_err(|e| tag(e, None))?;

        let mut series = state.series.clone();
        let mut log = OrderLog {
            order: n,
            products: BTreeMap::new(),
            cocycles_checked: 0,
            series_consistent: true,
            basis: Vec::new(),
            nonzero_corrections: Vec::new(),
        };
        let obstruction_ids: Vec<Vec<usize>> = {
            let p = self.table.p();
            let mut ids = vec![Vec::new(); p * p];
            for (id, o) in self.table.obstructions().iter().enumerate() {
                ids[o.left * p + o.right].push(id);
            }
            ids
        };
        let ids_of = |ty: (usize, usize)| &obstruction_ids[ty.0 * self.table.p() + ty.1];

        for (k, x) in r.basis().iter().enumerate() {
            if x.degree() != n {
                continue;
            }
            let y = basis_part[k].clone().unwrap_or_else(|| self.yoneda.zero(2, x.left(), x.right()));
            if !self.yoneda.is_cocycle(&y)? {
                return Err(tag(Error::NotACocycle("obstruction cocycle".into()), Some(x)));
            }
            log.cocycles_checked += 1;
            let coeffs = self.project(&y, x.ty()).map_err(|e| tag(e, Some(x)))?;
            for (l, c) in ids_of(x.ty()).iter().zip(&coeffs) {
                if !c.is_zero() {
                    series[*l].add_term(x.clone(), c.clone())?;
                }
            }
            log.products.insert(x.clone(), coeffs);
        }

        // each formal relation symbol must carry exactly its own obstruction class
        for (l, y) in tag_part.iter().enumerate() {
            let Some(y) = y else { continue };
            let o = self.table.obstructions()[l];
            let coeffs = self.project(y, (o.left, o.right)).map_err(|e| tag(e, None))?;
            let own = ids_of((o.left, o.right)).iter().position(|&id| id == l);
            let unit = coeffs.iter().enumerate().all(|(k, c)| if Some(k) == own { c.is_one() } else { c.is_zero() });
            if !unit {
                log.series_consistent = false;
            }
        }

        let next = MonomialQuotient::build(&self.table, &series, n + 1, &self.order).map_err(|e| tag(e, None))?;
        let old: Vec<&MatricMonomial> = state.quotient.basis().iter().collect();
        let kept_old: Vec<&MatricMonomial> = next.basis().iter().filter(|m| m.degree() < n).collect();
        if old != kept_old {
            return Err(tag(Error::Invariant("lower degree basis changed while advancing".into()), None));
        }
        let new_basis = next.basis_of_degree(n);

        let (targets, _) = self.expand_products(&next, &products).map_err(|e| tag(e, None))?;
        let mut system = state.system.clone();
        for z in &new_basis {
            let k = next.basis_index(z).expect("basis monomial");
            let alpha = match &targets[k] {
                None => self.yoneda.zero(1, z.left(), z.right()),
                Some(y) if y.is_zero() => self.yoneda.zero(1, z.left(), z.right()),
                Some(y) => {
                    let w = self.yoneda.solve_coboundary(y, self.ext2_basis(z.ty())).map_err(|e| tag(e, Some(z)))?;
                    let alpha = w.neg();
                    if !self.yoneda.differential(&alpha)?.add(y)?.is_zero() {
                        return Err(tag(Error::Invariant("correction cochain does not solve its equation".into()), Some(z)));
                    }
                    log.nonzero_corrections.push(z.clone());
                    alpha
                }
            };
            system.insert(z.clone(), alpha);
        }
        log.basis = new_basis;

        let check = self.products(&system, n).map_err(|e| tag(e, None))?;
        if let Some((z, m)) = self.flatness_failure(&next, &check)? {
            return Err(tag(Error::FlatnessViolated { monomial: z.format(&self.table), component: m }, Some(&z)));
        }

        let mut all_logs = state.log.clone();
        all_logs.push(log);
        Ok(HullState { order: n + 1, series, quotient: next, system, log: all_logs })
    }

    /// Checks whether the current relations already define the hull: over
    /// `T = T^1 / (f) + I^cutoff`, with `alpha = 0` on new monomials, the family must stay flat.
    pub fn check_stabilized(&self, state: &HullState) -> Result<Stabilization> {
        let cutoff = state.relation_degree() + self.options.verify_offset + 1;
        let t = MonomialQuotient::build(&self.table, &state.series, cutoff, &self.order)?;
        let products = self.products(&state.system, cutoff - 1)?;
        let failure = self.flatness_failure(&t, &products)?;

        let alg = self.yoneda.algebra();
        let mut keys: Vec<&MatricMonomial> = products.keys().collect();
        keys.sort();
        let mut terms = Vec::new();
        for x in keys {
            for (m, comp) in products[x].components().iter().enumerate() {
                for (r, c, e) in comp.entries() {
                    if !e.is_zero() {
                        terms.push(CertificateTerm {
                            component: m,
                            row: r,
                            col: c,
                            monomial: x.format(&self.table),
                            coefficient: alg.format(e),
                        });
                    }
                }
            }
        }
        let identity = render_identity(&terms, failure.is_none());
        Ok(Stabilization {
            stabilized: failure.is_none(),
            cutoff,
            terms,
            identity,
            failure: failure.map(|(z, m)| (z.format(&self.table), m)),
        })
    }

    /// Iterates [`advance_order`](Self::advance_order) until stabilization or `max_order`.
    pub fn compute_hull(&self) -> Result<HullResult> {
        self.compute_hull_with(|_| Ok(()))
    }

    /// Like [`compute_hull`](Self::compute_hull), calling `inspect` on every state reached.
    pub fn compute_hull_with(&self, mut inspect: impl FnMut(&HullState) -> Result<()>) -> Result<HullResult> {
        let mut state = self.init_order2()?;
        loop {
            inspect(&state)?;
            let stab = self.check_stabilized(&state).map_err(|e| e.at_order(state.order, None))?;
            let done_by_cert = stab.stabilized && self.options.stop_when_stabilized;
            if done_by_cert || state.relation_degree() >= self.options.max_order {
                return Ok(HullResult { state, stabilization: stab });
            }
            state = self.advance_order(&state)?;
        }
    }

    /// The flatness defect of a state's defining system over its own truncated hull.
    pub fn verify_state(&self, state: &HullState) -> Result<Option<(MatricMonomial, usize)>> {
        let products = self.products(&state.system, state.order - 1)?;
        self.flatness_failure(&state.quotient, &products)
    }

    /// The immediately defined Massey product `<alpha; X>` for cocycles on the arrows dividing `X`.
    ///
    /// Proper subwords are visited by increasing degree; each receives a cochain
    /// solving its flatness equation, or the product is undefined there.
    pub fn immediate_massey(&self, x: &MatricMonomial, cochains: &BTreeMap<usize, Cochain>) -> Result<ImmediateMassey> {
        if x.degree() < 2 {
            return Err(Error::Invalid("Massey products need a monomial of degree at least 2".into()));
        }
        let arrows = x.arrows();
        let mut alpha: HashMap<(usize, usize), Cochain> = HashMap::new();
        for (k, id) in arrows.iter().enumerate() {
            let c = cochains
                .get(id)
                .ok_or_else(|| Error::Invalid(format!("no cochain given for {}", self.table.arrow_name(*id))))?;
            if c.degree() != 1 || c.ty() != (self.table.arrow(*id).left, self.table.arrow(*id).right) {
                return Err(Error::DimensionMismatch(format!("cochain for {} has the wrong type", self.table.arrow_name(*id))));
            }
            if !self.yoneda.is_cocycle(c)? {
                return Err(Error::NotACocycle(self.table.arrow_name(*id)));
            }
            alpha.insert((k, k + 1), c.clone());
        }
        let word = |a: usize, b: usize| MatricMonomial::from_arrows(&self.table, &arrows[a..b]).expect("subword composes");
        let len = arrows.len();
        for deg in 2..=len {
            for a in 0..=len - deg {
                let b = a + deg;
                let z = word(a, b);
                let mut sum = self.yoneda.zero(2, z.left(), z.right());
                for cut in a + 1..b {
                    sum = sum.add(&self.yoneda.compose(&alpha[&(a, cut)], &alpha[&(cut, b)])?)?;
                }
                let basis = self.ext2_basis(z.ty());
                let proj = if sum.is_zero() { None } else { Some(self.yoneda.project(&sum, basis)?) };
                let coeffs = proj.as_ref().map(|p| p.coefficients.clone()).unwrap_or_else(|| vec![Scalar::zero(); basis.len()]);
                if deg == len {
                    return Ok(ImmediateMassey::Defined(coeffs));
                }
                if coeffs.iter().any(|c| !c.is_zero()) {
                    return Ok(ImmediateMassey::Undefined { at: z, obstruction: coeffs });
                }
                let corr = proj.map(|p| p.witness.neg()).unwrap_or_else(|| self.yoneda.zero(1, z.left(), z.right()));
                alpha.insert((a, b), corr);
            }
        }
        unreachable!("the full word is reached in the loop")
    }

    /// Monomials of degree 2 with their cup products, for reporting.
    pub fn cup_products(&self) -> Result<BTreeMap<MatricMonomial, Vec<Scalar>>> {
        let state = self.init_order2()?;
        let mut out = BTreeMap::new();
        let map: BTreeMap<usize, Cochain> = (0..self.table.arrows().len())
            .map(|id| (id, state.system.get(&MatricMonomial::arrow(&self.table, id)).expect("arrow").clone()))
            .collect();
        for x in monomials_of_degree(&self.table, 2) {
            if let ImmediateMassey::Defined(v) = self.immediate_massey(&x, &map)? {
                out.insert(x, v);
            }
        }
        Ok(out)
    }
}

fn render_identity(terms: &[CertificateTerm], reduced: bool) -> Vec<String> {
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&CertificateTerm>> = BTreeMap::new();
    for t in terms {
        groups.entry((t.component, t.row, t.col)).or_default().push(t);
    }
    let mut out = Vec::new();
    for ((m, r, c), ts) in groups {
        let scalars: Option<Vec<Scalar>> = ts.iter().map(|t| crate::scalar::parse(&t.coefficient)).collect();
        let body = match scalars {
            Some(vals) => {
                let mut s = String::new();
                for (k, (t, v)) in ts.iter().zip(&vals).enumerate() {
                    let neg = crate::scalar::is_negative(v);
                    let abs = if neg { -v.clone() } else { v.clone() };
                    if k == 0 {
                        if neg {
                            s.push('-');
                        }
                    } else {
                        s.push_str(if neg { " - " } else { " + " });
                    }
                    if !abs.is_one() {
                        s.push_str(&crate::scalar::format(&abs));
                        s.push('*');
                    }
                    s.push_str(&t.monomial);
                }
                format!("1 ⊗ ({s})")
            }
            None => ts.iter().map(|t| format!("({}) ⊗ {}", t.coefficient, t.monomial)).collect::<Vec<_>>().join(" + "),
        };
        let verdict = if reduced { "= 0 in T" } else { "!= 0 in T" };
        out.push(format!("component {m} entry ({r},{c}): {body} {verdict}"));
    }
    out
}

/// Searches generator rescalings `x -> λ_x x` with `λ = ±1` under which each
/// relation of `b` is a nonzero multiple of the corresponding relation of `a`.
pub fn find_sign_rescaling(table: &GeneratorTable, a: &[MatricPoly], b: &[MatricPoly]) -> Option<Vec<Scalar>> {
    let n = table.arrows().len();
    if a.len() != b.len() || n > 20 {
        return None;
    }
    for mask in 0u32..(1u32 << n) {
        let lambda: Vec<Scalar> = (0..n).map(|k| if mask >> k & 1 == 1 { -Scalar::one() } else { Scalar::one() }).collect();
        let ok = a.iter().zip(b).all(|(fa, fb)| proportional(&rescale(fa, &lambda), fb));
        if ok {
            return Some(lambda);
        }
    }
    None
}

/// Applies `x -> λ_x x` to every monomial.
pub fn rescale(f: &MatricPoly, lambda: &[Scalar]) -> MatricPoly {
    let mut out = MatricPoly::zero(f.left(), f.right());
    for (m, c) in f.terms() {
        let factor = m.arrows().iter().fold(Scalar::one(), |acc, &id| acc * &lambda[id]);
        out.add_term(m.clone(), c * factor).expect("same type");
    }
    out
}

/// Whether `g = μ f` for some nonzero scalar `μ`.
pub fn proportional(f: &MatricPoly, g: &MatricPoly) -> bool {
    if f.is_zero() || g.is_zero() {
        return f.is_zero() && g.is_zero();
    }
    let (m0, c0) = f.terms().next().expect("nonzero");
    let mu = g.coefficient(m0) / c0;
    if mu.is_zero() {
        return false;
    }
    let scaled: Vec<(MatricMonomial, Scalar)> = f.terms().map(|(m, c)| (m.clone(), c * &mu)).collect();
    let gs: Vec<(MatricMonomial, Scalar)> = g.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    scaled == gs
}
