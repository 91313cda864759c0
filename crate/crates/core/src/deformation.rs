//! Deformations as lifted complexes.
//!
//! A deformation of the family over a finite dimensional pointed algebra `R`
//! is recorded as a lifting of the resolutions: one 1-cochain `alpha(b)` per
//! basis element `b` of `R`, with `alpha(e_i)` the original differentials.
//! The lifted differential `Σ_b alpha(b) ⊗ b` squares to zero exactly when
//! every structure constant weighted factorization sum vanishes, which is
//! what [`verify_lifted_complex`] checks.
//!
//! This module deliberately shares no code path with the hull iteration
//! beyond cochain composition, so it can be used to cross-check it.

use std::collections::HashMap;

use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::KeyedSystem;
use crate::massey::{HullState, MasseyEngine};
use crate::matric::{BasisElement, FiniteDimPointedAlgebra, MatricPoly, MonomialQuotient};
use crate::scalar::Scalar;
use crate::yoneda::{Cochain, Coord, Yoneda};

/// A lifting of the resolutions to a base algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedComplex {
    algebra: FiniteDimPointedAlgebra,
    cochains: Vec<Cochain>,
}

/// Outcome of [`verify_lifted_complex`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub ok: bool,
    /// Label of the first basis element and component where `d^2 != 0`.
    pub failure: Option<(String, usize)>,
}

/// Outcome of [`equivalence_check`].
#[derive(Clone, Debug, PartialEq)]
pub enum Equivalence {
    /// An intertwiner `1 + Σ_b gamma(b) ⊗ b` over the radical basis.
    Equivalent { intertwiner: Vec<(String, Cochain)> },
    /// No intertwiner with entries of degree at most the bound exists.
    InequivalentAtBound(u32),
}

impl LiftedComplex {
    pub fn new(yoneda: &Yoneda, algebra: FiniteDimPointedAlgebra, cochains: Vec<Cochain>) -> Result<Self> {
        if algebra.p() != yoneda.p() {
            return Err(Error::DimensionMismatch(format!("algebra has {} vertices, family has {}", algebra.p(), yoneda.p())));
        }
        if cochains.len() != algebra.dim() {
            return Err(Error::DimensionMismatch(format!("{} cochains for {} basis elements", cochains.len(), algebra.dim())));
        }
        for (b, c) in algebra.elements().iter().zip(&cochains) {
            if c.degree() != 1 || c.ty() != (b.left, b.right) {
                return Err(Error::DimensionMismatch(format!("cochain for `{}` has the wrong type", b.label)));
            }
        }
        for i in 0..algebra.p() {
            if cochains[i] != yoneda.resolution_cochain(i) {
                return Err(Error::Invalid(format!("alpha(e{}) must be the resolution differential", i + 1)));
            }
        }
        Ok(LiftedComplex { algebra, cochains })
    }

    /// The trivial lifting: zero on the radical.
    pub fn trivial(yoneda: &Yoneda, algebra: FiniteDimPointedAlgebra) -> Result<Self> {
        let cochains = algebra
            .elements()
            .iter()
            .enumerate()
            .map(|(k, b)| if k < algebra.p() { yoneda.resolution_cochain(k) } else { yoneda.zero(1, b.left, b.right) })
            .collect();
        Self::new(yoneda, algebra, cochains)
    }

    /// The defining system of a hull state, read as a lifting over `H_n`.
    pub fn from_hull_state(yoneda: &Yoneda, state: &HullState) -> Result<Self> {
        let q = state.quotient();
        let algebra = q.to_algebra();
        let cochains = q
            .basis()
            .iter()
            .map(|m| {
                state
                    .system()
                    .get(m)
                    .cloned()
                    .ok_or_else(|| Error::Invariant(format!("no cochain for basis monomial {}", m.format(q.table()))))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(yoneda, algebra, cochains)
    }

    pub fn algebra(&self) -> &FiniteDimPointedAlgebra {
        &self.algebra
    }

    pub fn cochains(&self) -> &[Cochain] {
        &self.cochains
    }

    pub fn cochain(&self, label: &str) -> Option<&Cochain> {
        self.algebra.find(label).map(|k| &self.cochains[k])
    }

    /// Restricts to a quotient algebra whose basis labels are a subset of ours.
    pub fn restrict_to(&self, yoneda: &Yoneda, smaller: FiniteDimPointedAlgebra) -> Result<Self> {
        let cochains = smaller
            .elements()
            .iter()
            .map(|b| self.cochain(&b.label).cloned().ok_or_else(|| Error::Invalid(format!("`{}` is not a basis element", b.label))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(yoneda, smaller, cochains)
    }

    /// Replaces one cochain, for building perturbed examples.
    pub fn with_cochain(&self, label: &str, c: Cochain) -> Result<Self> {
        let k = self.algebra.find(label).ok_or_else(|| Error::Invalid(format!("`{label}` is not a basis element")))?;
        let mut out = self.clone();
        out.cochains[k] = c;
        Ok(out)
    }
}

/// Checks `d^R d^R = 0` for the lifted differential.
pub fn verify_lifted_complex(yoneda: &Yoneda, c: &LiftedComplex) -> Result<Verification> {
    for z in 0..c.algebra.dim() {
        let b = c.algebra.element(z);
        let mut sum = yoneda.zero(2, b.left, b.right);
        for (b1, b2, k) in c.algebra.structure_constants(z) {
            sum = sum.add(&yoneda.compose(&c.cochains[b1], &c.cochains[b2])?.scale(&k))?;
        }
        if let Some(m) = sum.components().iter().position(|comp| !comp.is_zero()) {
            return Ok(Verification { ok: false, failure: Some((b.label.clone(), m)) });
        }
    }
    Ok(Verification { ok: true, failure: None })
}

/// The test algebra `k^p ⊕ k ε` with `ε = e_a ε e_b` and `ε^2 = 0`.
pub fn test_algebra(p: usize, a: usize, b: usize) -> Result<FiniteDimPointedAlgebra> {
    let eps = BasisElement { label: format!("eps{}{}", a + 1, b + 1), left: a, right: b, degree: 1 };
    FiniteDimPointedAlgebra::new(p, vec![eps], HashMap::new())
}

/// The first order deformation over the test algebra defined by a 1-cocycle.
pub fn test_algebra_deformation(yoneda: &Yoneda, cocycle: &Cochain) -> Result<LiftedComplex> {
    if cocycle.degree() != 1 {
        return Err(Error::Invalid("a first order deformation needs a 1-cocycle".into()));
    }
    if !yoneda.is_cocycle(cocycle)? {
        return Err(Error::NotACocycle("test algebra deformation".into()));
    }
    let (a, b) = cocycle.ty();
    let algebra = test_algebra(yoneda.p(), a, b)?;
    let mut cochains: Vec<Cochain> = (0..yoneda.p()).map(|i| yoneda.resolution_cochain(i)).collect();
    cochains.push(cocycle.clone());
    LiftedComplex::new(yoneda, algebra, cochains)
}

fn keyed(z: usize, c: &Cochain) -> Vec<((usize, Coord), Scalar)> {
    c.coords().into_iter().map(|(k, v)| ((z, k), v)).collect()
}

/// Searches an intertwiner `Γ = 1 + Σ_b gamma(b) ⊗ b` with `d_2 Γ = Γ d_1`.
///
/// The equation at a basis element `Z` reads
/// `Σ c(b1 b2, Z) [alpha_2(b1) ∘ gamma(b2) - gamma(b1) ∘ alpha_1(b2)] = 0`
/// with `gamma(e_i)` the identity. Entries of `gamma` are bounded in degree,
/// so a negative answer only holds up to that bound.
pub fn equivalence_check(yoneda: &Yoneda, c1: &LiftedComplex, c2: &LiftedComplex) -> Result<Equivalence> {
    if c1.algebra != c2.algebra {
        return Err(Error::DimensionMismatch("liftings over different algebras".into()));
    }
    let alg = &c1.algebra;
    let p = alg.p();
    let radical = alg.radical();
    let zero0 = |b: usize| yoneda.zero(0, alg.element(b).left, alg.element(b).right);

    // Σ over Z of the equation with gamma given by `gamma_of`
    let equation = |gamma_of: &dyn Fn(usize) -> Option<Cochain>| -> Result<Vec<((usize, Coord), Scalar)>> {
        let mut out = Vec::new();
        for z in 0..alg.dim() {
            let ez = alg.element(z);
            let mut sum = yoneda.zero(1, ez.left, ez.right);
            for (b1, b2, k) in alg.structure_constants(z) {
                if let Some(g2) = gamma_of(b2) {
                    sum = sum.add(&yoneda.compose(&c2.cochains[b1], &g2)?.scale(&k))?;
                }
                if let Some(g1) = gamma_of(b1) {
                    sum = sum.sub(&yoneda.compose(&g1, &c1.cochains[b2])?.scale(&k))?;
                }
            }
            out.extend(keyed(z, &sum));
        }
        Ok(out)
    };

    let constant = equation(&|b| (b < p).then(|| yoneda.identity(b)))?;
    if constant.is_empty() {
        let intertwiner = radical.iter().map(|&b| (alg.element(b).label.clone(), zero0(b))).collect();
        return Ok(Equivalence::Equivalent { intertwiner });
    }
    let target: Vec<((usize, Coord), Scalar)> = constant.into_iter().map(|(k, v)| (k, -v)).collect();

    let mut last = 0;
    for bound in yoneda.bounds_for(None) {
        last = bound;
        let mut unknowns: Vec<(usize, Coord)> = Vec::new();
        let mut system: KeyedSystem<(usize, Coord)> = KeyedSystem::new();
        for &b in &radical {
            let eb = alg.element(b);
            for u in yoneda.unknowns(0, eb.left, eb.right, bound, 0) {
                let unit = yoneda.cochain_from_coords(0, eb.left, eb.right, [(u.clone(), Scalar::one())]);
                let image = equation(&|x| (x == b).then(|| unit.clone()))?;
                system.add_column(image);
                unknowns.push((b, u));
            }
        }
        if let Some(sol) = system.solve(target.iter().cloned()) {
            let mut gammas: HashMap<usize, Vec<(Coord, Scalar)>> = HashMap::new();
            for (t, v) in sol.iter() {
                let (b, u) = &unknowns[t];
                gammas.entry(*b).or_default().push((u.clone(), v.clone()));
            }
            let intertwiner = radical
                .iter()
                .map(|&b| {
                    let eb = alg.element(b);
                    let g = yoneda.cochain_from_coords(0, eb.left, eb.right, gammas.remove(&b).unwrap_or_default());
                    (eb.label.clone(), g)
                })
                .collect();
            return Ok(Equivalence::Equivalent { intertwiner });
        }
    }
    Ok(Equivalence::InequivalentAtBound(last))
}

/// Checks the versal family of a hull state over its truncated hull and,
/// when the bases are compatible, over the next lower truncation.
pub fn cross_validate(engine: &MasseyEngine<'_>, yoneda: &Yoneda, state: &HullState) -> Result<(Verification, Option<Verification>)> {
    let lifted = LiftedComplex::from_hull_state(yoneda, state)?;
    let full = verify_lifted_complex(yoneda, &lifted)?;
    if state.order() <= 2 {
        return Ok((full, None));
    }
    let lower_series: Vec<MatricPoly> = state.series().iter().map(|f| f.truncated(state.order() - 2)).collect();
    let lower = MonomialQuotient::build(engine.table(), &lower_series, state.order() - 1, engine.monomial_order())?;
    let lower_alg = lower.to_algebra();
    if lower_alg.elements().iter().any(|b| lifted.algebra().find(&b.label).is_none()) {
        return Ok((full, None));
    }
    let restricted = lifted.restrict_to(yoneda, lower_alg)?;
    Ok((full, Some(verify_lifted_complex(yoneda, &restricted)?)))
}
