//! Formal matrix rings.
//!
//! For a family of `p` modules with `d_ij = dim Ext^1(M_j, M_i)` the formal
//! matrix ring `T^1` is the path algebra of the quiver with `d_ij` arrows
//! `x_ij(l)` from vertex `i` to vertex `j`. A monomial is a composable string
//! of arrows, so `x_ij x_jk` has type `(i, k)`. Vertices are 0-based in code and
//! 1-based in every rendered name (`x12`, `y14`, `f14`).
//!
//! This module also holds the finite dimensional pointed algebras used as
//! bases of deformations, and truncated quotients `T^1 / (f) + I^n`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseVec};
use crate::scalar::{self, Scalar};

/// One generator `x_ij(l)` of `T^1` (or one obstruction symbol `y_ij(l)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arrow {
    pub left: usize,
    pub right: usize,
    pub index: usize,
}

/// Dimensions of `Ext^1` and `Ext^2` for every ordered pair.
///
/// `ext1[i][j]` is the number of generators of type `(i, j)` and `ext2[i][j]`
/// the number of relations of that type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorTable {
    ext1: Vec<Vec<usize>>,
    ext2: Vec<Vec<usize>>,
    #[serde(skip)]
    arrows: Vec<Arrow>,
    #[serde(skip)]
    obstructions: Vec<Arrow>,
}

fn enumerate(dims: &[Vec<usize>]) -> Vec<Arrow> {
    let mut out = Vec::new();
    for (i, row) in dims.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            for index in 0..d {
                out.push(Arrow { left: i, right: j, index });
            }
        }
    }
    out
}

impl GeneratorTable {
    pub fn new(ext1: Vec<Vec<usize>>, ext2: Vec<Vec<usize>>) -> Result<Self> {
        let p = ext1.len();
        if p == 0 {
            return Err(Error::Invalid("a family needs at least one module".into()));
        }
        if ext2.len() != p || ext1.iter().chain(&ext2).any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("Ext tables must be square of the same size".into()));
        }
        let arrows = enumerate(&ext1);
        let obstructions = enumerate(&ext2);
        Ok(GeneratorTable { ext1, ext2, arrows, obstructions })
    }

    pub fn p(&self) -> usize {
        self.ext1.len()
    }

    pub fn ext1(&self) -> &[Vec<usize>] {
        &self.ext1
    }

    pub fn ext2(&self) -> &[Vec<usize>] {
        &self.ext2
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow(&self, id: usize) -> Arrow {
        self.arrows[id]
    }

    pub fn arrow_id(&self, i: usize, j: usize, l: usize) -> Option<usize> {
        self.arrows.iter().position(|a| *a == Arrow { left: i, right: j, index: l })
    }

    pub fn obstructions(&self) -> &[Arrow] {
        &self.obstructions
    }

    pub fn obstruction_id(&self, i: usize, j: usize, l: usize) -> Option<usize> {
        self.obstructions.iter().position(|a| *a == Arrow { left: i, right: j, index: l })
    }

    fn label(&self, prefix: &str, a: Arrow, multiple: bool) -> String {
        let pair = if self.p() < 10 {
            format!("{}{}", a.left + 1, a.right + 1)
        } else {
            format!("{}_{}", a.left + 1, a.right + 1)
        };
        if multiple {
            format!("{prefix}{pair}_{}", a.index + 1)
        } else {
            format!("{prefix}{pair}")
        }
    }

    /// `x12`, or `x12_2` when there are several generators of that type.
    pub fn arrow_name(&self, id: usize) -> String {
        let a = self.arrows[id];
        self.label("x", a, self.ext1[a.left][a.right] > 1)
    }

    pub fn obstruction_name(&self, id: usize) -> String {
        let a = self.obstructions[id];
        self.label("y", a, self.ext2[a.left][a.right] > 1)
    }

    pub fn relation_name(&self, id: usize) -> String {
        let a = self.obstructions[id];
        self.label("f", a, self.ext2[a.left][a.right] > 1)
    }

    pub fn arrow_by_name(&self, name: &str) -> Option<usize> {
        (0..self.arrows.len()).find(|&id| self.arrow_name(id) == name)
    }
}

/// A composable string of arrows, or an idempotent `e_i` when empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatricMonomial {
    left: usize,
    right: usize,
    arrows: Vec<usize>,
}

impl Ord for MatricMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.arrows
            .len()
            .cmp(&other.arrows.len())
            .then_with(|| self.arrows.cmp(&other.arrows))
            .then_with(|| self.left.cmp(&other.left))
            .then_with(|| self.right.cmp(&other.right))
    }
}

impl PartialOrd for MatricMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MatricMonomial {
    pub fn idempotent(i: usize) -> Self {
        MatricMonomial { left: i, right: i, arrows: Vec::new() }
    }

    pub fn arrow(table: &GeneratorTable, id: usize) -> Self {
        let a = table.arrow(id);
        MatricMonomial { left: a.left, right: a.right, arrows: vec![id] }
    }

    /// Builds a monomial from arrow ids, checking that consecutive arrows compose.
    pub fn from_arrows(table: &GeneratorTable, ids: &[usize]) -> Option<Self> {
        let first = table.arrows().get(*ids.first()?)?;
        let mut right = first.right;
        for &id in &ids[1..] {
            let a = table.arrows().get(id)?;
            if a.left != right {
                return None;
            }
            right = a.right;
        }
        Some(MatricMonomial { left: first.left, right, arrows: ids.to_vec() })
    }

    /// Parses `x12*x24` (or `e2`) against the table's generator names.
    pub fn parse(table: &GeneratorTable, s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(v) = s.strip_prefix('e').and_then(|r| r.parse::<usize>().ok()) {
            if v >= 1 && v <= table.p() {
                return Ok(Self::idempotent(v - 1));
            }
        }
        let ids = s
            .split('*')
            .map(|f| table.arrow_by_name(f.trim()).ok_or_else(|| Error::UnknownGenerator(f.trim().to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::from_arrows(table, &ids)
            .ok_or_else(|| Error::Parse { input: s.to_string(), reason: "arrows do not compose".into() })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn ty(&self) -> (usize, usize) {
        (self.left, self.right)
    }

    pub fn arrows(&self) -> &[usize] {
        &self.arrows
    }

    pub fn degree(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_idempotent(&self) -> bool {
        self.arrows.is_empty()
    }

    /// The product `self * other`, or `None` when the types do not compose.
    pub fn concat(&self, other: &MatricMonomial) -> Option<MatricMonomial> {
        if self.right != other.left {
            return None;
        }
        let mut arrows = self.arrows.clone();
        arrows.extend_from_slice(&other.arrows);
        Some(MatricMonomial { left: self.left, right: other.right, arrows })
    }

    /// All ways of writing `self = a * b`, idempotent factors included.
    pub fn factorizations(&self, table: &GeneratorTable) -> Vec<(MatricMonomial, MatricMonomial)> {
        if self.is_idempotent() {
            return vec![(self.clone(), self.clone())];
        }
        let vertices = self.vertices(table);
        (0..=self.arrows.len())
            .map(|k| {
                let mid = vertices[k];
                let a = MatricMonomial { left: self.left, right: mid, arrows: self.arrows[..k].to_vec() };
                let b = MatricMonomial { left: mid, right: self.right, arrows: self.arrows[k..].to_vec() };
                (a, b)
            })
            .collect()
    }

    /// Vertices passed by the path, both ends included.
    pub fn vertices(&self, table: &GeneratorTable) -> Vec<usize> {
        let mut v = vec![self.left];
        v.extend(self.arrows.iter().map(|&id| table.arrow(id).right));
        v
    }

    /// Whether `self = u * other * v` for some monomials `u`, `v`.
    pub fn is_divisible_by(&self, table: &GeneratorTable, other: &MatricMonomial) -> bool {
        if other.is_idempotent() {
            return self.vertices(table).contains(&other.left);
        }
        let n = other.arrows.len();
        n <= self.arrows.len() && self.arrows.windows(n).any(|w| w == other.arrows.as_slice())
    }

    pub fn format(&self, table: &GeneratorTable) -> String {
        if self.is_idempotent() {
            return format!("e{}", self.left + 1);
        }
        self.arrows.iter().map(|&id| table.arrow_name(id)).collect::<Vec<_>>().join("*")
    }
}

/// Monomials of degree `n`, lexicographic in arrow ids. Degree 0 gives the idempotents.
pub fn monomials_of_degree(table: &GeneratorTable, n: usize) -> Vec<MatricMonomial> {
    if n == 0 {
        return (0..table.p()).map(MatricMonomial::idempotent).collect();
    }
    let mut out: Vec<MatricMonomial> = (0..table.arrows().len()).map(|id| MatricMonomial::arrow(table, id)).collect();
    for _ in 1..n {
        let mut next = Vec::new();
        for m in &out {
            for (id, a) in table.arrows().iter().enumerate() {
                if a.left == m.right {
                    let mut arrows = m.arrows.clone();
                    arrows.push(id);
                    next.push(MatricMonomial { left: m.left, right: a.right, arrows });
                }
            }
        }
        out = next;
    }
    out
}

/// All monomials of degree below `cutoff`, sorted.
pub fn monomials_below(table: &GeneratorTable, cutoff: usize) -> Vec<MatricMonomial> {
    (0..cutoff).flat_map(|n| monomials_of_degree(table, n)).collect()
}

/// A linear combination of monomials of one type `(left, right)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatricPoly {
    left: usize,
    right: usize,
    terms: BTreeMap<MatricMonomial, Scalar>,
}

impl MatricPoly {
    pub fn zero(left: usize, right: usize) -> Self {
        MatricPoly { left, right, terms: BTreeMap::new() }
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn add_term(&mut self, m: MatricMonomial, c: Scalar) -> Result<()> {
        if m.ty() != (self.left, self.right) {
            return Err(Error::InvalidRelation(format!(
                "monomial of type {:?} in a polynomial of type {:?}",
                m.ty(),
                (self.left, self.right)
            )));
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Scalar::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MatricMonomial, &Scalar)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &MatricMonomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest degree of a term.
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.degree()).min()
    }

    pub fn truncated(&self, max_degree: usize) -> MatricPoly {
        MatricPoly {
            left: self.left,
            right: self.right,
            terms: self.terms.iter().filter(|(m, _)| m.degree() <= max_degree).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Renders `x13*x34 - x12*x24`: positive terms first, then by decreasing monomial.
    pub fn format(&self, table: &GeneratorTable) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut terms: Vec<(&MatricMonomial, &Scalar)> = self.terms.iter().collect();
        terms.sort_by(|(m1, c1), (m2, c2)| c1.is_negative().cmp(&c2.is_negative()).then_with(|| m2.cmp(m1)));
        let mut out = String::new();
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !abs.is_one() {
                out.push_str(&scalar::format(&abs));
                out.push('*');
            }
            out.push_str(&m.format(table));
        }
        out
    }
}

/// A total order on arrows used to choose leading monomials.
///
/// Within one degree the largest word in this order is eliminated first, so a
/// relation `x13 x34 - x12 x24` under the natural order rewrites `x13 x34`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MonomialOrder {
    rank: Option<Vec<usize>>,
}

impl MonomialOrder {
    pub fn natural() -> Self {
        Self::default()
    }

    /// Arrows listed from smallest to largest.
    pub fn from_sequence(table: &GeneratorTable, smallest_first: &[usize]) -> Result<Self> {
        let n = table.arrows().len();
        let mut rank = vec![usize::MAX; n];
        for (r, &id) in smallest_first.iter().enumerate() {
            if id >= n || rank[id] != usize::MAX {
                return Err(Error::Invalid("arrow order must list every arrow once".into()));
            }
            rank[id] = r;
        }
        if smallest_first.len() != n {
            return Err(Error::Invalid("arrow order must list every arrow once".into()));
        }
        Ok(MonomialOrder { rank: Some(rank) })
    }

    pub fn from_names(table: &GeneratorTable, names: &[&str]) -> Result<Self> {
        let ids = names
            .iter()
            .map(|n| table.arrow_by_name(n).ok_or_else(|| Error::UnknownGenerator(n.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::from_sequence(table, &ids)
    }

    fn key(&self, m: &MatricMonomial) -> Vec<usize> {
        match &self.rank {
            None => m.arrows.clone(),
            Some(rank) => m.arrows.iter().map(|&id| rank[id]).collect(),
        }
    }
}

/// Generators of an ideal of `T^1` fed to the elimination.
#[derive(Clone, Debug, Default)]
pub(crate) struct IdealGenerators<'a> {
    /// Contribute every `U f V`.
    pub two_sided: &'a [MatricPoly],
    /// Contribute `U f V` with `U` or `V` of positive degree.
    pub bracketed: &'a [MatricPoly],
    /// Contribute the single row `f_t - F_t` with a formal symbol `F_t`.
    pub tagged: &'a [MatricPoly],
}

/// The truncated quotient `T^1 / (f) + I^cutoff` with a monomial basis.
///
/// Columns are ordered by increasing degree and, within a degree, by
/// decreasing monomial order, so elimination removes the leading monomial of
/// lowest degree. Formal symbols, if any, come after all monomials.
#[derive(Clone, Debug)]
pub struct MonomialQuotient {
    table: GeneratorTable,
    cutoff: usize,
    col_index: HashMap<MatricMonomial, usize>,
    n_monomials: usize,
    n_tags: usize,
    echelon: Echelon,
    basis: Vec<MatricMonomial>,
    basis_of_col: HashMap<usize, usize>,
}

impl MonomialQuotient {
    /// Builds `T^1 / (relations) + I^cutoff`. Relations must have order at least 2.
    pub fn build(table: &GeneratorTable, relations: &[MatricPoly], cutoff: usize, order: &MonomialOrder) -> Result<Self> {
        for f in relations {
            if f.order().is_some_and(|o| o < 2) {
                return Err(Error::InvalidRelation(format!("`{}` has order below 2", f.format(table))));
            }
        }
        Self::build_general(table, IdealGenerators { two_sided: relations, ..Default::default() }, cutoff, order)
    }

    /// The truncated free ring `T^1_n = T^1 / I^n`.
    pub fn truncated_free(table: &GeneratorTable, cutoff: usize) -> Result<Self> {
        Self::build(table, &[], cutoff, &MonomialOrder::natural())
    }

    pub(crate) fn build_general(
        table: &GeneratorTable,
        gens: IdealGenerators<'_>,
        cutoff: usize,
        order: &MonomialOrder,
    ) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::Invalid("cutoff must be positive".into()));
        }
        let mut columns = monomials_below(table, cutoff);
        columns.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| order.key(b).cmp(&order.key(a))).then_with(|| a.cmp(b)));
        let col_index: HashMap<MatricMonomial, usize> = columns.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let n_monomials = columns.len();
        let n_tags = gens.tagged.len();

        let mut by_right: HashMap<usize, Vec<&MatricMonomial>> = HashMap::new();
        let mut by_left: HashMap<usize, Vec<&MatricMonomial>> = HashMap::new();
        for m in &columns {
            by_right.entry(m.right).or_default().push(m);
            by_left.entry(m.left).or_default().push(m);
        }

        let row_of = |u: &MatricMonomial, f: &MatricPoly, v: &MatricMonomial| -> SparseVec {
            SparseVec::from_pairs(f.terms().filter_map(|(m, c)| {
                let w = u.concat(m)?.concat(v)?;
                col_index.get(&w).map(|&i| (i, c.clone()))
            }))
        };

        let mut echelon = Echelon::new();
        let mut tag = 0usize;
        let mut push = |e: &mut Echelon, row: SparseVec| {
            if !row.is_zero() {
                e.insert(&row, tag);
                tag += 1;
            }
        };
        let empty = Vec::new();
        for (f, bracket) in gens.two_sided.iter().map(|f| (f, false)).chain(gens.bracketed.iter().map(|f| (f, true))) {
            let Some(o) = f.order() else { continue };
            if o >= cutoff {
                continue;
            }
            let room = cutoff - 1 - o;
            for u in by_right.get(&f.left).unwrap_or(&empty) {
                if u.degree() > room {
                    continue;
                }
                for v in by_left.get(&f.right).unwrap_or(&empty) {
                    if u.degree() + v.degree() > room || (bracket && u.degree() + v.degree() == 0) {
                        continue;
                    }
                    push(&mut echelon, row_of(u, f, v));
                }
            }
        }
        for (t, f) in gens.tagged.iter().enumerate() {
            let e0 = MatricMonomial::idempotent(f.left);
            let e1 = MatricMonomial::idempotent(f.right);
            let row = row_of(&e0, f, &e1).add_scaled(&-Scalar::one(), &SparseVec::unit(n_monomials + t));
            push(&mut echelon, row);
        }

        for i in 0..table.p() {
            if echelon.is_pivot(col_index[&MatricMonomial::idempotent(i)]) {
                return Err(Error::InconsistentRelations(format!("e{} lies in the ideal", i + 1)));
            }
        }

        let mut basis: Vec<MatricMonomial> = columns.iter().enumerate().filter(|(i, _)| !echelon.is_pivot(*i)).map(|(_, m)| m.clone()).collect();
        basis.sort();
        let basis_of_col = basis.iter().enumerate().map(|(b, m)| (col_index[m], b)).collect();
        Ok(MonomialQuotient { table: table.clone(), cutoff, col_index, n_monomials, n_tags, echelon, basis, basis_of_col })
    }

    pub fn table(&self) -> &GeneratorTable {
        &self.table
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn basis(&self) -> &[MatricMonomial] {
        &self.basis
    }

    pub fn basis_of_degree(&self, n: usize) -> Vec<MatricMonomial> {
        self.basis.iter().filter(|m| m.degree() == n).cloned().collect()
    }

    pub fn basis_index(&self, m: &MatricMonomial) -> Option<usize> {
        self.col_index.get(m).and_then(|c| self.basis_of_col.get(c)).copied()
    }

    /// Expansion of a monomial: coordinates over the basis and over the formal symbols.
    pub fn expand(&self, m: &MatricMonomial) -> (SparseVec, SparseVec) {
        let Some(&col) = self.col_index.get(m) else {
            return (SparseVec::new(), SparseVec::new());
        };
        let rem = self.echelon.reduce(&SparseVec::unit(col)).remainder;
        let mut basis_part = Vec::new();
        let mut tag_part = Vec::new();
        for (c, v) in rem.iter() {
            if c >= self.n_monomials {
                tag_part.push((c - self.n_monomials, v.clone()));
            } else {
                basis_part.push((self.basis_of_col[&c], v.clone()));
            }
        }
        (SparseVec::from_pairs(basis_part), SparseVec::from_pairs(tag_part))
    }

    /// `beta(m)`: the coordinates of `m` over the basis.
    pub fn beta(&self, m: &MatricMonomial) -> SparseVec {
        self.expand(m).0
    }

    pub fn n_tags(&self) -> usize {
        self.n_tags
    }

    pub fn reduce_poly(&self, f: &MatricPoly) -> SparseVec {
        let mut acc = SparseVec::new();
        for (m, c) in f.terms() {
            acc = acc.add_scaled(c, &self.beta(m));
        }
        acc
    }

    /// Monomials lying in the basis have every prefix and suffix in the basis.
    pub fn is_order_ideal(&self) -> bool {
        self.basis.iter().all(|m| m.factorizations(&self.table).iter().all(|(a, b)| self.basis_index(a).is_some() && self.basis_index(b).is_some()))
    }

    pub fn to_algebra(&self) -> FiniteDimPointedAlgebra {
        let elements: Vec<BasisElement> = self
            .basis
            .iter()
            .map(|m| BasisElement { label: m.format(&self.table), left: m.left, right: m.right, degree: m.degree() })
            .collect();
        let mut products = HashMap::new();
        for (a, ma) in self.basis.iter().enumerate() {
            for (b, mb) in self.basis.iter().enumerate() {
                if let Some(w) = ma.concat(mb) {
                    let v = self.beta(&w);
                    if !v.is_zero() {
                        products.insert((a, b), v);
                    }
                }
            }
        }
        FiniteDimPointedAlgebra { p: self.table.p(), elements, products }
    }
}

/// A basis element of a finite dimensional pointed algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElement {
    pub label: String,
    pub left: usize,
    pub right: usize,
    pub degree: usize,
}

/// A finite dimensional `k^p`-algebra with basis `e_1, ..., e_p` followed by a basis of the radical.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDimPointedAlgebra {
    p: usize,
    elements: Vec<BasisElement>,
    products: HashMap<(usize, usize), SparseVec>,
}

impl fmt::Display for FiniteDimPointedAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.elements.iter().map(|e| e.label.as_str()).collect();
        write!(f, "<{}>", labels.join(", "))
    }
}

impl FiniteDimPointedAlgebra {
    /// Builds an algebra from radical elements and their products; idempotent
    /// products are filled in from the types.
    pub fn new(p: usize, radical: Vec<BasisElement>, radical_products: HashMap<(usize, usize), SparseVec>) -> Result<Self> {
        let mut elements: Vec<BasisElement> =
            (0..p).map(|i| BasisElement { label: format!("e{}", i + 1), left: i, right: i, degree: 0 }).collect();
        for e in &radical {
            if e.left >= p || e.right >= p || e.degree == 0 {
                return Err(Error::Invalid(format!("bad radical element `{}`", e.label)));
            }
        }
        elements.extend(radical);
        let n = elements.len();
        let mut products = HashMap::new();
        for ((a, b), v) in radical_products {
            if a >= n || b >= n || a < p || b < p || v.iter().any(|(c, _)| c >= n) {
                return Err(Error::Invalid("product table refers to unknown elements".into()));
            }
            if !v.is_zero() {
                products.insert((a, b), v);
            }
        }
        for a in 0..n {
            let (l, r) = (elements[a].left, elements[a].right);
            products.insert((l, a), SparseVec::unit(a));
            products.insert((a, r), SparseVec::unit(a));
        }
        let alg = FiniteDimPointedAlgebra { p, elements, products };
        alg.check_axioms()?;
        Ok(alg)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &BasisElement {
        &self.elements[i]
    }

    pub fn find(&self, label: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.label == label)
    }

    pub fn product(&self, a: usize, b: usize) -> SparseVec {
        self.products.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn mul(&self, u: &SparseVec, v: &SparseVec) -> SparseVec {
        let mut acc = SparseVec::new();
        for (a, x) in u.iter() {
            for (b, y) in v.iter() {
                if let Some(p) = self.products.get(&(a, b)) {
                    acc = acc.add_scaled(&(x * y), p);
                }
            }
        }
        acc
    }

    /// Triples `(b1, b2, c)` with `b1 * b2 = c * z + ...`.
    pub fn structure_constants(&self, z: usize) -> Vec<(usize, usize, Scalar)> {
        let mut out: Vec<(usize, usize, Scalar)> =
            self.products.iter().filter_map(|(&(a, b), v)| { let c = v.get(z); (!c.is_zero()).then_some((a, b, c)) }).collect();
        out.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        out
    }

    pub fn radical(&self) -> Vec<usize> {
        (self.p..self.dim()).collect()
    }

    /// Associativity, unit laws, type compatibility and nilpotence of the radical.
    pub fn check_axioms(&self) -> Result<()> {
        let n = self.dim();
        for a in 0..n {
            for b in 0..n {
                let ab = self.product(a, b);
                let (ea, eb) = (&self.elements[a], &self.elements[b]);
                if ea.right != eb.left && !ab.is_zero() {
                    return Err(Error::Invalid(format!("{} * {} should vanish", ea.label, eb.label)));
                }
                for (c, _) in ab.iter() {
                    let ec = &self.elements[c];
                    if (ec.left, ec.right) != (ea.left, eb.right) {
                        return Err(Error::Invalid(format!("{} * {} has the wrong type", ea.label, eb.label)));
                    }
                }
                for c in 0..n {
                    let left = self.mul(&ab, &SparseVec::unit(c));
                    let right = self.mul(&SparseVec::unit(a), &self.product(b, c));
                    if left != right {
                        return Err(Error::Invalid(format!(
                            "associativity fails on {}, {}, {}",
                            ea.label, eb.label, self.elements[c].label
                        )));
                    }
                }
            }
        }
        for i in 0..self.p {
            for j in 0..self.p {
                let expect = if i == j { SparseVec::unit(i) } else { SparseVec::new() };
                if self.product(i, j) != expect {
                    return Err(Error::Invalid("idempotents are not orthogonal".into()));
                }
            }
        }
        let rad: Vec<SparseVec> = self.radical().into_iter().map(SparseVec::unit).collect();
        let mut power = rad.clone();
        for _ in 0..=n {
            if power.is_empty() {
                return Ok(());
            }
            power = self.product_span(&rad, &power);
        }
        Err(Error::Invalid("radical is not nilpotent".into()))
    }

    /// A basis of the span of all products `u v`.
    pub fn product_span(&self, us: &[SparseVec], vs: &[SparseVec]) -> Vec<SparseVec> {
        let mut e = Echelon::new();
        let mut out = Vec::new();
        for u in us {
            for v in vs {
                let w = self.mul(u, v);
                if !w.is_zero() && matches!(e.insert(&w, out.len()), crate::linalg::Insert::Independent { .. }) {
                    out.push(w);
                }
            }
        }
        out
    }

    /// The quotient by a two-sided ideal contained in the radical.
    pub fn quotient(&self, ideal: &[SparseVec]) -> Result<(FiniteDimPointedAlgebra, AlgebraMap)> {
        let n = self.dim();
        let flip = |c: usize| n - 1 - c;
        let mut e = Echelon::new();
        for (t, v) in ideal.iter().enumerate() {
            e.insert(&v.map_indices(flip), t);
        }
        for i in 0..self.p {
            if e.is_pivot(flip(i)) {
                return Err(Error::Invalid("ideal must lie in the radical".into()));
            }
        }
        let kept: Vec<usize> = (0..n).filter(|&c| !e.is_pivot(flip(c))).collect();
        let new_of_old: HashMap<usize, usize> = kept.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let project = |v: &SparseVec| -> SparseVec {
            let rem = e.reduce(&v.map_indices(flip)).remainder;
            rem.map_indices(|c| new_of_old[&flip(c)])
        };
        let elements: Vec<BasisElement> = kept.iter().map(|&c| self.elements[c].clone()).collect();
        let mut products = HashMap::new();
        for (a, &ca) in kept.iter().enumerate() {
            for (b, &cb) in kept.iter().enumerate() {
                let v = project(&self.product(ca, cb));
                if !v.is_zero() {
                    products.insert((a, b), v);
                }
            }
        }
        let target = FiniteDimPointedAlgebra { p: self.p, elements, products };
        let images = (0..n).map(|c| project(&SparseVec::unit(c))).collect();
        Ok((target.clone(), AlgebraMap { source: self.clone(), target, images }))
    }

    /// Elements of `I^q` as a spanning basis.
    pub fn radical_power(&self, q: usize) -> Vec<SparseVec> {
        let rad: Vec<SparseVec> = self.radical().into_iter().map(SparseVec::unit).collect();
        if q == 0 {
            return (0..self.dim()).map(SparseVec::unit).collect();
        }
        let mut power = rad.clone();
        for _ in 1..q {
            power = self.product_span(&rad, &power);
        }
        power
    }
}

/// A pointed algebra homomorphism given on basis elements.
#[derive(Clone, Debug)]
pub struct AlgebraMap {
    pub source: FiniteDimPointedAlgebra,
    pub target: FiniteDimPointedAlgebra,
    /// Image of each source basis element in target coordinates.
    pub images: Vec<SparseVec>,
}

impl AlgebraMap {
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut acc = SparseVec::new();
        for (b, c) in v.iter() {
            acc = acc.add_scaled(c, &self.images[b]);
        }
        acc
    }

    pub fn kernel(&self) -> Vec<SparseVec> {
        crate::linalg::kernel(&self.images)
    }

    pub fn is_surjective(&self) -> bool {
        crate::linalg::rank(&self.images) == self.target.dim()
    }

    pub fn is_homomorphism(&self) -> bool {
        let n = self.source.dim();
        (0..n).all(|a| {
            (0..n).all(|b| self.apply(&self.source.product(a, b)) == self.target.mul(&self.images[a], &self.images[b]))
        })
    }

    /// A surjection is small when its kernel `K` satisfies `I K = K I = 0`.
    pub fn is_small(&self) -> bool {
        let k = self.kernel();
        let rad: Vec<SparseVec> = self.source.radical().into_iter().map(SparseVec::unit).collect();
        self.is_surjective() && self.source.product_span(&rad, &k).is_empty() && self.source.product_span(&k, &rad).is_empty()
    }

    pub fn compose(&self, next: &AlgebraMap) -> AlgebraMap {
        AlgebraMap {
            source: self.source.clone(),
            target: next.target.clone(),
            images: self.images.iter().map(|v| next.apply(v)).collect(),
        }
    }
}

fn span_sum(a: &[SparseVec], b: &[SparseVec]) -> Vec<SparseVec> {
    let mut e = Echelon::new();
    let mut out = Vec::new();
    for v in a.iter().chain(b) {
        if matches!(e.insert(v, out.len()), crate::linalg::Insert::Independent { .. }) {
            out.push(v.clone());
        }
    }
    out
}

/// Factors a surjection `R -> S` into a chain of small surjections.
///
/// With `K = ker u` and `J_q = I^q K`, the chain runs through the ideals
/// `J_q + J_{q-1} I^r`, each of which contains the previous one with a quotient
/// killed by `I` on both sides. The last step lands on `S` itself.
pub fn factor_small_surjections(u: &AlgebraMap) -> Result<Vec<AlgebraMap>> {
    if !u.is_surjective() {
        return Err(Error::Invalid("map is not surjective".into()));
    }
    if !u.is_homomorphism() {
        return Err(Error::Invalid("map is not an algebra homomorphism".into()));
    }
    let r = &u.source;
    let k = u.kernel();
    if k.is_empty() {
        return Ok(Vec::new());
    }
    let rad: Vec<SparseVec> = r.radical().into_iter().map(SparseVec::unit).collect();
    let mut j = vec![k.clone()];
    while !j.last().expect("nonempty").is_empty() {
        let next = r.product_span(&rad, j.last().expect("nonempty"));
        j.push(next);
    }
    let big_q = j.len() - 1;
    let mut chain: Vec<Vec<SparseVec>> = vec![Vec::new()];
    for q in (1..=big_q).rev() {
        let mut right_powers = vec![j[q - 1].clone()];
        while !right_powers.last().expect("nonempty").is_empty() {
            let next = r.product_span(right_powers.last().expect("nonempty"), &rad);
            right_powers.push(next);
        }
        for rp in right_powers.iter().rev() {
            let ideal = span_sum(&j[q], rp);
            if ideal.len() > chain.last().expect("nonempty").len() {
                chain.push(ideal);
            }
        }
    }
    if chain.last().map(|c| c.len()) != Some(k.len()) {
        return Err(Error::Invariant("small surjection chain does not reach the kernel".into()));
    }
    let quotients: Vec<(FiniteDimPointedAlgebra, AlgebraMap)> = chain.iter().map(|ideal| r.quotient(ideal)).collect::<Result<_>>()?;
    let mut steps = Vec::new();
    for a in 0..quotients.len() - 1 {
        let (src, src_map) = &quotients[a];
        let last = a + 2 == quotients.len();
        // each basis element of R/L_a is the image of a basis element of R
        let lift: Vec<usize> = (0..src.dim())
            .map(|b| {
                src_map.images.iter().position(|v| *v == SparseVec::unit(b)).ok_or_else(|| Error::Invariant("quotient basis is not a subset".into()))
            })
            .collect::<Result<_>>()?;
        let (target, images) = if last {
            (u.target.clone(), lift.iter().map(|&c| u.images[c].clone()).collect())
        } else {
            let (tq, tmap) = &quotients[a + 1];
            (tq.clone(), lift.iter().map(|&c| tmap.images[c].clone()).collect())
        };
        let step = AlgebraMap { source: src.clone(), target, images };
        if !step.is_small() {
            return Err(Error::Invariant(format!("step {a} of the factorization is not small")));
        }
        steps.push(step);
    }
    Ok(steps)
}
