//! Problem specifications and the shipped presets.
//!
//! A problem names an algebra, a family of cyclic modules `A / A(g_1, ..., g_r)`
//! with free resolutions, and optionally a fixed choice of Ext representatives.
//! Module indices in files are 1-based; everything inside the library is 0-based.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, PresentationSpec};
use crate::error::{Error, Result};
use crate::massey::HullOptions;
use crate::matric::{GeneratorTable, MonomialOrder};
use crate::matrix::AlgMatrix;
use crate::yoneda::{Cochain, ExtBasis, FreeResolution, ResolutionSet, SolverOptions, Yoneda};

pub const PROBLEM_SCHEMA: &str = "ncdef.problem/1";

/// The algebra, either by preset name or as an explicit presentation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSource {
    Preset { preset: String },
    Explicit(PresentationSpec),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionSpec {
    /// Ranks of `L_0, L_1, ...`.
    pub ranks: Vec<usize>,
    /// `differentials[m]` maps `L_{m+1} -> L_m`, given as `rank(m+1)` rows of `rank(m)` entries.
    pub differentials: Vec<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub name: String,
    /// Generators of the left ideal, by name.
    pub ideal: Vec<String>,
    pub resolution: ResolutionSpec,
}

/// A Yoneda cochain in file form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CochainSpec {
    pub degree: usize,
    /// 1-based index of the module the cochain maps into.
    pub target: usize,
    /// 1-based index of the module whose resolution is the source.
    pub source: usize,
    /// One matrix per homological index, as rows of algebra elements.
    pub components: Vec<Vec<Vec<String>>>,
}

/// Fixed Ext representatives, listed in the enumeration order of the generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentativesSpec {
    pub ext1: Vec<CochainSpec>,
    pub ext2: Vec<CochainSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProblemOptions {
    pub solver: SolverOptions,
    pub hull: HullOptions,
    /// Arrow names from smallest to largest for the elimination order; natural order if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arrow_order: Option<Vec<String>>,
    /// Use the supplied representatives (when present) instead of computing them.
    pub use_supplied_representatives: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub schema: String,
    pub name: String,
    pub algebra: AlgebraSource,
    pub modules: Vec<ModuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representatives: Option<RepresentativesSpec>,
    #[serde(default)]
    pub options: ProblemOptions,
}

/// Names of the shipped problem presets.
pub const PRESETS: &[&str] = &["weyl2-simple4", "poly1-point"];

fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

fn koszul_module(name: &str, a: &str, b: &str) -> ModuleSpec {
    let neg_a = format!("-{a}");
    ModuleSpec {
        name: name.into(),
        ideal: vec![a.into(), b.into()],
        resolution: ResolutionSpec {
            ranks: vec![1, 2, 1],
            differentials: vec![strings(&[&[a], &[b]]), strings(&[&[b, &neg_a]])],
        },
    }
}

fn cochain_spec(degree: usize, target: usize, source: usize, components: &[&[&[&str]]]) -> CochainSpec {
    CochainSpec { degree, target, source, components: components.iter().map(|c| strings(c)).collect() }
}

impl ProblemSpec {
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "weyl2-simple4" => {
                let modules = vec![
                    koszul_module("M1", "Dx", "Dy"),
                    koszul_module("M2", "Dx", "y"),
                    koszul_module("M3", "x", "Dy"),
                    koszul_module("M4", "x", "y"),
                ];
                let first: &[&[&[&str]]] = &[&[&["0"], &["1"]], &[&["1", "0"]]];
                let second: &[&[&[&str]]] = &[&[&["1"], &["0"]], &[&["0", "-1"]]];
                let ext1 = [(1, 2), (1, 3), (2, 1), (2, 4), (3, 1), (3, 4), (4, 2), (4, 3)]
                    .iter()
                    .map(|&(i, j)| {
                        let comps = if matches!((i, j), (1, 2) | (2, 1) | (3, 4) | (4, 3)) { first } else { second };
                        cochain_spec(1, i, j, comps)
                    })
                    .collect();
                let ext2 = [(1, 4), (2, 3), (3, 2), (4, 1)].iter().map(|&(i, j)| cochain_spec(2, i, j, &[&[&["1"]]])).collect();
                let arrow_order = ["x12", "x13", "x21", "x24", "x34", "x31", "x43", "x42"];
                Ok(ProblemSpec {
                    schema: PROBLEM_SCHEMA.into(),
                    name: name.into(),
                    algebra: AlgebraSource::Preset { preset: "weyl2".into() },
                    modules,
                    representatives: Some(RepresentativesSpec { ext1, ext2 }),
                    options: ProblemOptions {
                        arrow_order: Some(arrow_order.iter().map(|s| s.to_string()).collect()),
                        use_supplied_representatives: true,
                        ..Default::default()
                    },
                })
            }
            "poly1-point" => Ok(ProblemSpec {
                schema: PROBLEM_SCHEMA.into(),
                name: name.into(),
                algebra: AlgebraSource::Preset { preset: "poly1".into() },
                modules: vec![ModuleSpec {
                    name: "M1".into(),
                    ideal: vec!["x".into()],
                    resolution: ResolutionSpec { ranks: vec![1, 1], differentials: vec![strings(&[&["x"]])] },
                }],
                representatives: None,
                options: ProblemOptions {
                    hull: HullOptions { max_order: 6, ..Default::default() },
                    ..Default::default()
                },
            }),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProblemSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse { input: "problem file".into(), reason: e.to_string() })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    /// Cheap structural checks; the heavy ones happen in [`Problem::build`].
    pub fn validate(&self) -> Result<()> {
        if self.schema != PROBLEM_SCHEMA {
            return Err(Error::SchemaMismatch { left: self.schema.clone(), right: PROBLEM_SCHEMA.into() });
        }
        if self.modules.is_empty() {
            return Err(Error::Invalid("a problem needs at least one module".into()));
        }
        let s = &self.options.solver;
        if s.degree_bound == 0 || s.retry_step == 0 || s.max_bound < s.degree_bound {
            return Err(Error::Invalid("solver bounds must be positive with max_bound >= degree_bound".into()));
        }
        let h = &self.options.hull;
        if h.max_order < 2 || h.verify_offset == 0 {
            return Err(Error::Invalid("max_order must be at least 2 and verify_offset positive".into()));
        }
        if self.options.use_supplied_representatives && self.representatives.is_none() {
            return Err(Error::Invalid("use_supplied_representatives is set but no representatives are given".into()));
        }
        Ok(())
    }
}

/// A validated problem with its resolutions built.
pub struct Problem {
    pub spec: ProblemSpec,
    pub yoneda: Yoneda,
}

impl Problem {
    pub fn build(spec: ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let algebra = match &spec.algebra {
            AlgebraSource::Preset { preset } => Algebra::preset(preset)?,
            AlgebraSource::Explicit(p) => Algebra::new(p.clone())?,
        };
        let mut resolutions = Vec::new();
        for m in &spec.modules {
            let ideal = m
                .ideal
                .iter()
                .map(|g| algebra.generator_index(g))
                .collect::<Result<Vec<_>>>()?;
            let r = &m.resolution;
            if r.differentials.len() + 1 != r.ranks.len() {
                return Err(Error::DimensionMismatch(format!("module {}: {} ranks for {} differentials", m.name, r.ranks.len(), r.differentials.len())));
            }
            let diffs = r
                .differentials
                .iter()
                .enumerate()
                .map(|(k, rows)| AlgMatrix::parse(&algebra, rows, r.ranks[k]))
                .collect::<Result<Vec<_>>>()?;
            resolutions.push(FreeResolution::new(m.name.clone(), ideal, r.ranks.clone(), diffs));
        }
        let res = ResolutionSet::new(algebra, resolutions)?;
        let yoneda = Yoneda::new(res, spec.options.solver.clone());
        Ok(Problem { spec, yoneda })
    }

    pub fn p(&self) -> usize {
        self.yoneda.p()
    }

    pub fn cochain_from_spec(&self, c: &CochainSpec) -> Result<Cochain> {
        let p = self.p();
        if c.target == 0 || c.source == 0 || c.target > p || c.source > p {
            return Err(Error::Invalid(format!("cochain type ({}, {}) out of range", c.target, c.source)));
        }
        let (i, j) = (c.target - 1, c.source - 1);
        let res = self.yoneda.resolutions();
        let comps = c
            .components
            .iter()
            .enumerate()
            .map(|(m, rows)| AlgMatrix::parse(self.yoneda.algebra(), rows, res.rank(i, m)))
            .collect::<Result<Vec<_>>>()?;
        self.yoneda.cochain(c.degree, i, j, comps)
    }

    pub fn cochain_to_spec(&self, c: &Cochain) -> CochainSpec {
        let alg = self.yoneda.algebra();
        CochainSpec {
            degree: c.degree(),
            target: c.target() + 1,
            source: c.source() + 1,
            components: c.components().iter().map(|m| m.to_strings(alg)).collect(),
        }
    }

    /// The supplied representatives as an Ext basis, validated against the computed dimensions.
    pub fn supplied_basis(&self) -> Result<Option<ExtBasis>> {
        let Some(reps) = &self.spec.representatives else { return Ok(None) };
        let mut tables: [BTreeMap<(usize, usize), Vec<Cochain>>; 2] = Default::default();
        for (n, list) in [(1, &reps.ext1), (2, &reps.ext2)] {
            for c in list {
                if c.degree != n {
                    return Err(Error::Invalid(format!("Ext^{n} representative of degree {}", c.degree)));
                }
                let cochain = self.cochain_from_spec(c)?;
                tables[n - 1].entry(cochain.ty()).or_default().push(cochain);
            }
        }
        let [ext1, ext2] = tables;
        let basis = ExtBasis::new(self.p(), ext1, ext2)?;
        self.yoneda.validate_ext_basis(&basis).map_err(|e| match e {
            Error::NotACocycle(what) => Error::Invalid(format!("supplied {what} is not a cocycle")),
            e => e,
        })?;
        Ok(Some(basis))
    }

    /// The Ext basis used for the hull: supplied when requested, computed otherwise.
    pub fn ext_basis(&self) -> Result<ExtBasis> {
        if self.spec.options.use_supplied_representatives {
            if let Some(b) = self.supplied_basis()? {
                return Ok(b);
            }
        }
        self.yoneda.compute_ext_basis()
    }

    pub fn monomial_order(&self, table: &GeneratorTable) -> Result<MonomialOrder> {
        match &self.spec.options.arrow_order {
            None => Ok(MonomialOrder::natural()),
            Some(names) => {
                let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                MonomialOrder::from_names(table, &names)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let spec = ProblemSpec::preset(name).unwrap();
            assert_eq!(ProblemSpec::from_json(&spec.to_json()).unwrap(), spec);
        }
    }

    #[test]
    fn malformed_problem_is_rejected() {
        assert!(matches!(ProblemSpec::from_json("{\"schema\": 3"), Err(Error::Parse { .. })));
        let mut spec = ProblemSpec::preset("poly1-point").unwrap();
        spec.modules.clear();
        assert!(ProblemSpec::from_json(&spec.to_json()).is_err());
    }
}
