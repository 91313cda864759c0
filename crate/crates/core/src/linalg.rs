//! Sparse exact linear algebra.
//!
//! Everything the solvers need reduces to one primitive: incremental Gaussian
//! elimination over the rationals that remembers how each stored row was built
//! from the inserted vectors. Ranks, kernels, preimages and quotient bases are
//! all read off an [`Echelon`].

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::scalar::Scalar;

/// A sparse vector with sorted indices and no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Scalar)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(i: usize) -> Self {
        SparseVec { entries: vec![(i, Scalar::one())] }
    }

    pub fn from_map(map: BTreeMap<usize, Scalar>) -> Self {
        SparseVec { entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect() }
    }

    /// Builds a vector from unsorted pairs, summing repeated indices.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Scalar)>) -> Self {
        let mut map: BTreeMap<usize, Scalar> = BTreeMap::new();
        for (i, v) in pairs {
            *map.entry(i).or_insert_with(Scalar::zero) += v;
        }
        Self::from_map(map)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> + '_ {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn get(&self, i: usize) -> Scalar {
        match self.entries.binary_search_by_key(&i, |(k, _)| *k) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Scalar::zero(),
        }
    }

    pub fn leading(&self) -> Option<(usize, &Scalar)> {
        self.entries.first().map(|(i, v)| (*i, v))
    }

    pub fn scaled(&self, c: &Scalar) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec { entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect() }
    }

    pub fn add_scaled(&self, c: &Scalar, other: &SparseVec) -> SparseVec {
        let mut map: BTreeMap<usize, Scalar> = self.entries.iter().cloned().collect();
        for (i, v) in other.iter() {
            *map.entry(i).or_insert_with(Scalar::zero) += c * v;
        }
        SparseVec::from_map(map)
    }

    pub fn to_map(&self) -> BTreeMap<usize, Scalar> {
        self.entries.iter().cloned().collect()
    }

    /// Relabels indices through `f`, summing collisions.
    pub fn map_indices(&self, mut f: impl FnMut(usize) -> usize) -> SparseVec {
        SparseVec::from_pairs(self.entries.iter().map(|(i, v)| (f(*i), v.clone())))
    }
}

/// Outcome of inserting a vector into an [`Echelon`].
#[derive(Clone, Debug, PartialEq)]
pub enum Insert {
    /// The vector was independent; it now owns this pivot column.
    Independent { pivot: usize },
    /// The vector was dependent. The relation `r` satisfies `Σ r[t] v_t = 0`
    /// over the inserted vectors `v_t` and has coefficient 1 at the new tag.
    Dependent(SparseVec),
}

/// Result of reducing a vector against the stored rows.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// What is left after elimination.
    pub remainder: SparseVec,
    /// Coefficients with `v = remainder + Σ combo[t] v_t`.
    pub combo: SparseVec,
}

/// Row echelon form with the lowest index as pivot.
///
/// Each inserted vector carries a caller chosen tag. Rows remember their
/// expression in terms of tags, so a solved system directly yields preimages.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivot_of: BTreeMap<usize, usize>,
    rows: Vec<SparseVec>,
    combos: Vec<SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivot_of.keys().copied()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_of.contains_key(&col)
    }

    pub fn reduce(&self, v: &SparseVec) -> Reduction {
        let mut work: BTreeMap<usize, Scalar> = v.to_map();
        let mut combo: BTreeMap<usize, Scalar> = BTreeMap::new();
        let mut cursor = 0usize;
        loop {
            let next = work
                .range(cursor..)
                .find(|(c, _)| self.pivot_of.contains_key(c))
                .map(|(c, x)| (*c, x.clone()));
            let Some((col, coef)) = next else { break };
            let r = self.pivot_of[&col];
            for (c, x) in self.rows[r].iter() {
                let e = work.entry(c).or_insert_with(Scalar::zero);
                *e -= &coef * x;
                if e.is_zero() {
                    work.remove(&c);
                }
            }
            for (t, x) in self.combos[r].iter() {
                *combo.entry(t).or_insert_with(Scalar::zero) += &coef * x;
            }
            cursor = col + 1;
        }
        Reduction { remainder: SparseVec::from_map(work), combo: SparseVec::from_map(combo) }
    }

    pub fn insert(&mut self, v: &SparseVec, tag: usize) -> Insert {
        let Reduction { remainder, combo } = self.reduce(v);
        let expr = SparseVec::unit(tag).add_scaled(&-Scalar::one(), &combo);
        match remainder.leading() {
            None => Insert::Dependent(expr),
            Some((pivot, lead)) => {
                let inv = lead.recip();
                self.pivot_of.insert(pivot, self.rows.len());
                self.rows.push(remainder.scaled(&inv));
                self.combos.push(expr.scaled(&inv));
                Insert::Independent { pivot }
            }
        }
    }

    /// Coefficients expressing `v` through the inserted vectors, if `v` lies in their span.
    pub fn solve(&self, v: &SparseVec) -> Option<SparseVec> {
        let red = self.reduce(v);
        red.remainder.is_zero().then_some(red.combo)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).remainder.is_zero()
    }
}

/// Rank of a list of vectors.
pub fn rank(vectors: &[SparseVec]) -> usize {
    let mut e = Echelon::new();
    for (t, v) in vectors.iter().enumerate() {
        e.insert(v, t);
    }
    e.rank()
}

/// Kernel of the map sending unit vector `t` to `images[t]`, as relations over the tags.
pub fn kernel(images: &[SparseVec]) -> Vec<SparseVec> {
    let mut e = Echelon::new();
    let mut out = Vec::new();
    for (t, v) in images.iter().enumerate() {
        if let Insert::Dependent(rel) = e.insert(v, t) {
            out.push(rel);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn v(pairs: &[(usize, i64)]) -> SparseVec {
        SparseVec::from_pairs(pairs.iter().map(|(i, x)| (*i, int(*x))))
    }

    #[test]
    fn rank_and_kernel() {
        let a = v(&[(0, 1), (1, 2)]);
        let b = v(&[(1, 1), (2, 1)]);
        let c = v(&[(0, 1), (1, 4), (2, 2)]);
        assert_eq!(rank(&[a.clone(), b.clone(), c.clone()]), 2);
        let ker = kernel(&[a.clone(), b.clone(), c.clone()]);
        assert_eq!(ker.len(), 1);
        let rel = &ker[0];
        let sum = a.scaled(&rel.get(0)).add_scaled(&rel.get(1), &b).add_scaled(&rel.get(2), &c);
        assert!(sum.is_zero());
        assert_eq!(rel.get(2), int(1));
    }

    #[test]
    fn solve_gives_preimage() {
        let mut e = Echelon::new();
        e.insert(&v(&[(0, 2), (3, 1)]), 10);
        e.insert(&v(&[(3, 1), (5, -1)]), 11);
        let target = v(&[(0, 4), (3, 5), (5, -3)]);
        let combo = e.solve(&target).unwrap();
        assert_eq!(combo.get(10), int(2));
        assert_eq!(combo.get(11), int(3));
        assert!(e.solve(&v(&[(5, 1)])).is_none());
    }
}

/// A linear system whose output coordinates are arbitrary hashable keys.
///
/// Columns are added one at a time as images of unit inputs. Output keys are
/// indexed in order of first appearance, which keeps results deterministic.
#[derive(Clone, Debug)]
pub struct KeyedSystem<K: std::hash::Hash + Eq + Clone> {
    index: std::collections::HashMap<K, usize>,
    echelon: Echelon,
    columns: usize,
}

impl<K: std::hash::Hash + Eq + Clone> Default for KeyedSystem<K> {
    fn default() -> Self {
        KeyedSystem { index: Default::default(), echelon: Echelon::new(), columns: 0 }
    }
}

impl<K: std::hash::Hash + Eq + Clone> KeyedSystem<K> {
    pub fn new() -> Self {
        Self::default()
    }

    fn vectorize(&mut self, image: impl IntoIterator<Item = (K, Scalar)>) -> SparseVec {
        let pairs: Vec<(usize, Scalar)> = image
            .into_iter()
            .map(|(k, v)| {
                let next = self.index.len();
                (*self.index.entry(k).or_insert(next), v)
            })
            .collect();
        SparseVec::from_pairs(pairs)
    }

    /// Adds the next column; returns its position among the columns and the insertion outcome.
    pub fn add_column(&mut self, image: impl IntoIterator<Item = (K, Scalar)>) -> (usize, Insert) {
        let v = self.vectorize(image);
        let tag = self.columns;
        self.columns += 1;
        (tag, self.echelon.insert(&v, tag))
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    /// Coefficients `c` over the columns with `Σ c_t col_t = target`, if any.
    pub fn solve(&self, target: impl IntoIterator<Item = (K, Scalar)>) -> Option<SparseVec> {
        let mut pairs = Vec::new();
        for (k, v) in target {
            if v.is_zero() {
                continue;
            }
            match self.index.get(&k) {
                Some(&i) => pairs.push((i, v)),
                None => return None,
            }
        }
        self.echelon.solve(&SparseVec::from_pairs(pairs))
    }
}
