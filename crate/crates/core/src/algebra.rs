//! Finitely presented algebras with a rewriting system.
//!
//! An algebra is given by generators and rules `b a -> rhs`, each rule
//! rewriting one adjacent pair of letters. Normal words are the words that
//! contain no rewritable pair. For the Weyl algebras this is the usual PBW
//! basis with letters in nondecreasing generator order.
//!
//! Cyclic modules `A/(A g_1 + ... + A g_r)` are handled by a second rewriting
//! system in which the ideal generators are pushed to the right end of every
//! word; words that still contain an ideal generator lie in the left ideal.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

pub type Word = Vec<u16>;

pub const DEFAULT_STEP_BUDGET: usize = 1_000_000;

/// Serializable description of a presentation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationSpec {
    pub generators: Vec<String>,
    /// Degree of each generator. Empty means every generator has weight 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<u32>,
    pub rules: Vec<RuleSpec>,
}

/// A rule such as `{"lhs": "Dx*x", "rhs": "x*Dx + 1"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub lhs: String,
    pub rhs: String,
}

impl PresentationSpec {
    /// Known presentations: `weyl2`, `weyl1`, `poly1`.
    pub fn preset(name: &str) -> Result<Self> {
        let gens = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let rule = |l: &str, r: &str| RuleSpec { lhs: l.into(), rhs: r.into() };
        match name {
            "weyl2" => Ok(PresentationSpec {
                generators: gens(&["x", "y", "Dx", "Dy"]),
                weights: vec![],
                rules: vec![
                    rule("y*x", "x*y"),
                    rule("Dx*x", "x*Dx + 1"),
                    rule("Dx*y", "y*Dx"),
                    rule("Dy*x", "x*Dy"),
                    rule("Dy*y", "y*Dy + 1"),
                    rule("Dy*Dx", "Dx*Dy"),
                ],
            }),
            "weyl1" => Ok(PresentationSpec {
                generators: gens(&["x", "Dx"]),
                weights: vec![],
                rules: vec![rule("Dx*x", "x*Dx + 1")],
            }),
            "poly1" => Ok(PresentationSpec { generators: gens(&["x"]), weights: vec![], rules: vec![] }),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
struct RuleSet {
    table: HashMap<(u16, u16), Vec<(Word, Scalar)>>,
}

impl RuleSet {
    fn lookup(&self, a: u16, b: u16) -> Option<&Vec<(Word, Scalar)>> {
        self.table.get(&(a, b))
    }

    fn first_redex(&self, w: &[u16]) -> Option<(usize, &Vec<(Word, Scalar)>)> {
        (0..w.len().saturating_sub(1)).find_map(|i| self.lookup(w[i], w[i + 1]).map(|r| (i, r)))
    }
}

struct Inner {
    spec: PresentationSpec,
    names: Vec<String>,
    weights: Vec<u32>,
    rules: RuleSet,
    step_budget: usize,
    quotients: Mutex<HashMap<Vec<u16>, Arc<RuleSet>>>,
}

/// A presented algebra. Cheap to clone.
#[derive(Clone)]
pub struct Algebra {
    inner: Arc<Inner>,
}

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Algebra").field("generators", &self.inner.names).finish()
    }
}

/// A noncommutative polynomial: a finite sum of words with rational coefficients.
///
/// Elements produced by [`Algebra`] methods are in normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    terms: BTreeMap<Word, Scalar>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::monomial(Vec::new(), c)
    }

    pub fn monomial(w: Word, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        AlgebraElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &[u16]) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant term, if the element is a scalar.
    pub fn as_scalar(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> AlgebraElement {
        self.scale(&-Scalar::one())
    }

    pub fn scale(&self, c: &Scalar) -> AlgebraElement {
        if c.is_zero() {
            return AlgebraElement::zero();
        }
        AlgebraElement { terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect() }
    }
}

impl Algebra {
    pub fn new(spec: PresentationSpec) -> Result<Self> {
        Self::with_step_budget(spec, DEFAULT_STEP_BUDGET)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::new(PresentationSpec::preset(name)?)
    }

    pub fn with_step_budget(spec: PresentationSpec, step_budget: usize) -> Result<Self> {
        if spec.generators.is_empty() {
            return Err(Error::InvalidPresentation("no generators".into()));
        }
        if spec.generators.len() > u16::MAX as usize {
            return Err(Error::InvalidPresentation("too many generators".into()));
        }
        let mut seen = BTreeSet::new();
        for g in &spec.generators {
            let valid = !g.is_empty()
                && g.chars().next().is_some_and(|c| c.is_alphabetic())
                && g.chars().all(|c| c.is_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::InvalidPresentation(format!("bad generator name `{g}`")));
            }
            if !seen.insert(g.clone()) {
                return Err(Error::InvalidPresentation(format!("duplicate generator `{g}`")));
            }
        }
        let weights = if spec.weights.is_empty() {
            vec![1; spec.generators.len()]
        } else if spec.weights.len() == spec.generators.len() {
            spec.weights.clone()
        } else {
            return Err(Error::InvalidPresentation("one weight per generator expected".into()));
        };
        // Truncated bases are enumerated by degree, which needs positive weights.
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::InvalidPresentation("generator weights must be positive".into()));
        }
        let names = spec.generators.clone();
        let mut table = HashMap::new();
        for r in &spec.rules {
            let lhs = parse_terms(&names, &r.lhs)?;
            let [(word, c)] = lhs.as_slice() else {
                return Err(Error::InvalidPresentation(format!("rule lhs `{}` must be one word", r.lhs)));
            };
            if word.len() != 2 || !c.is_one() {
                return Err(Error::InvalidPresentation(format!(
                    "rule lhs `{}` must be a product of two generators",
                    r.lhs
                )));
            }
            let rhs = parse_terms(&names, &r.rhs)?;
            let lhs_deg = weights[word[0] as usize] + weights[word[1] as usize];
            for (w, _) in &rhs {
                let d: u32 = w.iter().map(|&g| weights[g as usize]).sum();
                if d > lhs_deg {
                    return Err(Error::InvalidPresentation(format!(
                        "rule `{} -> {}` raises the degree",
                        r.lhs, r.rhs
                    )));
                }
            }
            if table.insert((word[0], word[1]), rhs).is_some() {
                return Err(Error::InvalidPresentation(format!("two rules for `{}`", r.lhs)));
            }
        }
        Ok(Algebra {
            inner: Arc::new(Inner {
                spec,
                names,
                weights,
                rules: RuleSet { table },
                step_budget,
                quotients: Mutex::new(HashMap::new()),
            }),
        })
    }

    pub fn spec(&self) -> &PresentationSpec {
        &self.inner.spec
    }

    pub fn generators(&self) -> &[String] {
        &self.inner.names
    }

    pub fn generator_index(&self, name: &str) -> Result<u16> {
        self.inner
            .names
            .iter()
            .position(|n| n == name)
            .map(|i| i as u16)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn generator(&self, name: &str) -> Result<AlgebraElement> {
        Ok(AlgebraElement::monomial(vec![self.generator_index(name)?], Scalar::one()))
    }

    pub fn word_degree(&self, w: &[u16]) -> u32 {
        w.iter().map(|&g| self.inner.weights[g as usize]).sum()
    }

    /// Highest degree of a term, `None` for zero.
    pub fn degree(&self, a: &AlgebraElement) -> Option<u32> {
        a.terms.keys().map(|w| self.word_degree(w)).max()
    }

    pub fn is_normal_word(&self, w: &[u16]) -> bool {
        self.inner.rules.first_redex(w).is_none()
    }

    fn reduce_with(&self, rules: &RuleSet, terms: impl IntoIterator<Item = (Word, Scalar)>) -> Result<AlgebraElement> {
        let mut pending: BTreeMap<Reverse<(usize, Word)>, Scalar> = BTreeMap::new();
        for (w, c) in terms {
            *pending.entry(Reverse((w.len(), w))).or_insert_with(Scalar::zero) += c;
        }
        let mut done = AlgebraElement::zero();
        let mut steps = 0usize;
        while let Some((Reverse((_, w)), c)) = pending.pop_first() {
            if c.is_zero() {
                continue;
            }
            match rules.first_redex(&w) {
                None => done.add_term(w, c),
                Some((i, rhs)) => {
                    steps += 1;
                    if steps > self.inner.step_budget {
                        return Err(Error::StepBudgetExceeded(self.inner.step_budget));
                    }
                    for (r, k) in rhs {
                        let mut nw = Vec::with_capacity(w.len() + r.len());
                        nw.extend_from_slice(&w[..i]);
                        nw.extend_from_slice(r);
                        nw.extend_from_slice(&w[i + 2..]);
                        *pending.entry(Reverse((nw.len(), nw))).or_insert_with(Scalar::zero) += &c * k;
                    }
                }
            }
        }
        Ok(done)
    }

    /// Normal form of an arbitrary (not necessarily reduced) element.
    pub fn normal_form(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.reduce_with(&self.inner.rules, a.terms.iter().map(|(w, c)| (w.clone(), c.clone())))
    }

    pub fn normal_form_of_word(&self, w: &[u16]) -> Result<AlgebraElement> {
        self.reduce_with(&self.inner.rules, [(w.to_vec(), Scalar::one())])
    }

    pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        if a.is_zero() || b.is_zero() {
            return Ok(AlgebraElement::zero());
        }
        let mut raw = Vec::with_capacity(a.len() * b.len());
        for (u, c) in &a.terms {
            for (v, d) in &b.terms {
                let mut w = u.clone();
                w.extend_from_slice(v);
                raw.push((w, c * d));
            }
        }
        self.reduce_with(&self.inner.rules, raw)
    }

    /// Parses strings such as `x*Dx + 1`, `-Dx`, `2*x^2*Dy` or `1/2`, returning the normal form.
    pub fn parse(&self, s: &str) -> Result<AlgebraElement> {
        let terms = parse_terms(&self.inner.names, s)?;
        self.reduce_with(&self.inner.rules, terms)
    }

    /// All normal words of degree at most `max_degree`, ordered by degree then lexicographically.
    pub fn normal_words(&self, max_degree: u32) -> Vec<Word> {
        let n = self.inner.names.len() as u16;
        let mut out: Vec<Word> = vec![Vec::new()];
        let mut frontier: Vec<Word> = vec![Vec::new()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for w in &frontier {
                let d = self.word_degree(w);
                for g in 0..n {
                    if d + self.inner.weights[g as usize] > max_degree {
                        continue;
                    }
                    if let Some(&last) = w.last() {
                        if self.inner.rules.lookup(last, g).is_some() {
                            continue;
                        }
                    }
                    let mut nw = w.clone();
                    nw.push(g);
                    next.push(nw);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out.sort_by(|a, b| self.word_degree(a).cmp(&self.word_degree(b)).then_with(|| a.cmp(b)));
        out
    }

    /// Coefficient vector of `a` over [`Algebra::normal_words`]`(bound)`.
    pub fn expand_to_basis(&self, a: &AlgebraElement, bound: u32) -> Result<Vec<Scalar>> {
        let a = self.normal_form(a)?;
        let words = self.normal_words(bound);
        let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let mut out = vec![Scalar::zero(); words.len()];
        for (w, c) in a.terms() {
            let d = self.word_degree(w);
            let i = index.get(w).ok_or(Error::DegreeOverflow { degree: d, bound })?;
            out[*i] = c.clone();
        }
        Ok(out)
    }

    pub fn element_from_basis(&self, coeffs: &[Scalar], bound: u32) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (w, c) in self.normal_words(bound).into_iter().zip(coeffs) {
            out.add_term(w, c.clone());
        }
        out
    }

    fn quotient_rules(&self, ideal: &[u16]) -> Result<Arc<RuleSet>> {
        let mut key = ideal.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(rs) = self.inner.quotients.lock().expect("quotient cache").get(&key) {
            return Ok(rs.clone());
        }
        let rs = Arc::new(self.build_quotient_rules(&key)?);
        self.inner.quotients.lock().expect("quotient cache").insert(key, rs.clone());
        Ok(rs)
    }

    fn build_quotient_rules(&self, ideal: &[u16]) -> Result<RuleSet> {
        let names = || ideal.iter().map(|&g| self.inner.names[g as usize].clone()).collect::<Vec<_>>().join(", ");
        let in_g = |g: u16| ideal.contains(&g);
        let n = self.inner.names.len() as u16;
        let mut table: HashMap<(u16, u16), Vec<(Word, Scalar)>> = HashMap::new();
        for (&(a, b), rhs) in &self.inner.rules.table {
            if !in_g(a) && !in_g(b) {
                table.insert((a, b), rhs.clone());
            }
        }
        for g in 0..n {
            for h in 0..n {
                if g == h || !in_g(g) {
                    continue;
                }
                let fwd = self.inner.rules.lookup(g, h);
                let back = self.inner.rules.lookup(h, g);
                if in_g(h) {
                    // Ideal letters may only commute among themselves.
                    if let Some(rhs) = fwd {
                        if rhs.len() != 1 || rhs[0].0 != vec![h, g] {
                            return Err(Error::UnsupportedIdeal(names()));
                        }
                        table.insert((g, h), rhs.clone());
                    }
                    continue;
                }
                if let Some(rhs) = fwd {
                    if !rhs.iter().any(|(w, c)| *w == vec![h, g] && !c.is_zero()) {
                        return Err(Error::UnsupportedIdeal(names()));
                    }
                    table.insert((g, h), rhs.clone());
                } else if let Some(rhs) = back {
                    // h g -> c g h + r  becomes  g h -> (h g - r) / c
                    let c = rhs.iter().find(|(w, _)| *w == vec![g, h]).map(|(_, c)| c.clone());
                    let Some(c) = c.filter(|c| !c.is_zero()) else {
                        return Err(Error::UnsupportedIdeal(names()));
                    };
                    let inv = c.recip();
                    let mut new_rhs = vec![(vec![h, g], inv.clone())];
                    for (w, k) in rhs {
                        if *w != vec![g, h] {
                            new_rhs.push((w.clone(), -(k * &inv)));
                        }
                    }
                    table.insert((g, h), new_rhs);
                } else {
                    return Err(Error::UnsupportedIdeal(names()));
                }
            }
        }
        let rs = RuleSet { table };
        if !self.overlaps_of(&rs)?.iter().all(|o| o.left == o.right) {
            return Err(Error::UnsupportedIdeal(names()));
        }
        Ok(rs)
    }

    /// Normal form of `a` in the cyclic module `A / (A g_1 + ... + A g_r)`.
    ///
    /// The result is a combination of normal words free of ideal generators.
    pub fn quotient_normal_form(&self, a: &AlgebraElement, ideal: &[u16]) -> Result<AlgebraElement> {
        if ideal.is_empty() {
            return self.normal_form(a);
        }
        let rs = self.quotient_rules(ideal)?;
        let pushed = self.reduce_with(&rs, a.terms.iter().map(|(w, c)| (w.clone(), c.clone())))?;
        let kept = pushed.terms.into_iter().filter(|(w, _)| !w.iter().any(|g| ideal.contains(g)));
        self.reduce_with(&self.inner.rules, kept)
    }

    /// Checks that the ideal is supported, without reducing anything.
    pub fn check_ideal(&self, ideal: &[u16]) -> Result<()> {
        self.quotient_rules(ideal).map(|_| ())
    }

    fn overlaps_of(&self, rules: &RuleSet) -> Result<Vec<OverlapWitness>> {
        let mut pairs: Vec<(u16, u16)> = rules.table.keys().copied().collect();
        pairs.sort_unstable();
        let mut out = Vec::new();
        for &(a, b) in &pairs {
            for &(b2, c) in &pairs {
                if b2 != b {
                    continue;
                }
                let word = vec![a, b, c];
                let first = rules.table[&(a, b)].iter().map(|(w, k)| {
                    let mut nw = w.clone();
                    nw.push(c);
                    (nw, k.clone())
                });
                let left = self.reduce_with(rules, first.collect::<Vec<_>>())?;
                let second = rules.table[&(b, c)].iter().map(|(w, k)| {
                    let mut nw = vec![a];
                    nw.extend_from_slice(w);
                    (nw, k.clone())
                });
                let right = self.reduce_with(rules, second.collect::<Vec<_>>())?;
                out.push(OverlapWitness { word, left, right });
            }
        }
        Ok(out)
    }

    /// Resolves every overlap `a b c` of two rules both ways.
    pub fn overlap_witnesses(&self) -> Result<Vec<OverlapWitness>> {
        self.overlaps_of(&self.inner.rules)
    }

    pub fn is_confluent(&self) -> Result<bool> {
        Ok(self.overlap_witnesses()?.iter().all(|o| o.left == o.right))
    }

    pub fn format_word(&self, w: &[u16]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < w.len() {
            let mut j = i;
            while j < w.len() && w[j] == w[i] {
                j += 1;
            }
            let name = &self.inner.names[w[i] as usize];
            if j - i == 1 {
                parts.push(name.clone());
            } else {
                parts.push(format!("{name}^{}", j - i));
            }
            i = j;
        }
        parts.join("*")
    }

    /// Renders an element as `x^2*Dx^2 + x*Dx`, highest degree first.
    pub fn format(&self, a: &AlgebraElement) -> String {
        if a.is_zero() {
            return "0".into();
        }
        let mut terms: Vec<(&Word, &Scalar)> = a.terms.iter().collect();
        terms.sort_by(|(u, _), (v, _)| self.word_degree(v).cmp(&self.word_degree(u)).then_with(|| u.cmp(v)));
        let mut out = String::new();
        for (k, (w, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if w.is_empty() {
                out.push_str(&scalar::format(&abs));
            } else if abs.is_one() {
                out.push_str(&self.format_word(w));
            } else {
                out.push_str(&format!("{}*{}", scalar::format(&abs), self.format_word(w)));
            }
        }
        out
    }
}

/// Both resolutions of an overlap word.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapWitness {
    pub word: Word,
    pub left: AlgebraElement,
    pub right: AlgebraElement,
}

fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse { input: input.to_string(), reason: reason.into() }
}

/// Splits an expression into raw (unreduced) terms.
fn parse_terms(names: &[String], input: &str) -> Result<Vec<(Word, Scalar)>> {
    let mut chunks: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut last_sig: Option<char> = None;
    for ch in input.chars() {
        let is_sep = (ch == '+' || ch == '-') && last_sig.is_some_and(|p| !matches!(p, '*' | '^' | '/' | '+' | '-'));
        if is_sep {
            chunks.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
        if !ch.is_whitespace() {
            last_sig = Some(ch);
        }
    }
    chunks.push(cur);

    let mut out = Vec::new();
    for chunk in chunks {
        let mut body = chunk.trim();
        let mut coef = Scalar::one();
        loop {
            if let Some(rest) = body.strip_prefix('-') {
                coef = -coef;
                body = rest.trim_start();
            } else if let Some(rest) = body.strip_prefix('+') {
                body = rest.trim_start();
            } else {
                break;
            }
        }
        if body.is_empty() {
            return Err(parse_err(input, "empty term"));
        }
        let mut word = Word::new();
        for factor in body.split(|c: char| c == '*' || c.is_whitespace()).filter(|f| !f.is_empty()) {
            if factor.starts_with(|c: char| c.is_ascii_digit()) {
                let v = scalar::parse(factor).ok_or_else(|| parse_err(input, format!("bad number `{factor}`")))?;
                coef *= v;
                continue;
            }
            let (name, power) = match factor.split_once('^') {
                Some((n, p)) => {
                    let p: usize = p.parse().map_err(|_| parse_err(input, format!("bad exponent in `{factor}`")))?;
                    (n, p)
                }
                None => (factor, 1),
            };
            let g = names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
            word.extend(std::iter::repeat_n(g as u16, power));
        }
        out.push((word, coef));
    }
    Ok(out)
}
