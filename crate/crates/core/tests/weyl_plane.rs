use std::collections::BTreeMap;

use ncdef::massey::{rescale, find_sign_rescaling, HullOptions, ImmediateMassey, MasseyEngine};
use ncdef::matric::{monomials_of_degree, MatricMonomial, MatricPoly, MonomialOrder};
use ncdef::problem::{Problem, ProblemSpec};
use ncdef::report::{diff_reports, run};
use ncdef::scalar::{int, Scalar};
use ncdef::yoneda::ExtBasis;

fn weyl() -> Problem {
    Problem::build(ProblemSpec::preset("weyl2-simple4").unwrap()).unwrap()
}

fn supplied(problem: &Problem) -> ExtBasis {
    problem.supplied_basis().unwrap().unwrap()
}

fn engine<'a>(problem: &'a Problem, basis: &'a ExtBasis, options: HullOptions) -> MasseyEngine<'a> {
    let order = problem.monomial_order(&basis.generator_table()).unwrap();
    MasseyEngine::new(&problem.yoneda, basis, order, options).unwrap()
}

fn m(e: &MasseyEngine<'_>, s: &str) -> MatricMonomial {
    MatricMonomial::parse(e.table(), s).unwrap()
}

// Values from the numpy factorization oracle (products_oracle.py).
const ORACLE_PRODUCTS: [(&str, i64); 16] = [
    ("x12*x21", 0),
    ("x12*x24", -1),
    ("x13*x31", 0),
    ("x13*x34", 1),
    ("x21*x12", 0),
    ("x21*x13", -1),
    ("x24*x42", 0),
    ("x24*x43", 1),
    ("x31*x12", 1),
    ("x31*x13", 0),
    ("x34*x42", -1),
    ("x34*x43", 0),
    ("x42*x21", 1),
    ("x42*x24", 0),
    ("x43*x31", -1),
    ("x43*x34", 0),
];

#[test]
fn ext_tables_are_symmetric_under_swapping_dx_and_x() {
    let p = weyl();
    for n in [1, 2] {
        let t = p.yoneda.ext_table(n).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(t[i][j], t[3 - i][3 - j]);
                assert_eq!(t[i][j], t[j][i]);
            }
        }
    }
}

#[test]
fn computed_representatives_equal_the_supplied_ones() {
    let p = weyl();
    let computed = p.yoneda.compute_ext_basis().unwrap();
    assert_eq!(computed, supplied(&p));
}

#[test]
fn init_order2_has_idempotents_and_arrows() {
    let p = weyl();
    let b = supplied(&p);
    let st = engine(&p, &b, HullOptions::default()).init_order2().unwrap();
    assert_eq!(st.system().len(), 4 + 8);
    assert!(st.series().iter().all(MatricPoly::is_zero));
}

#[test]
fn obstruction_cocycles_at_order_two() {
    let p = weyl();
    let b = supplied(&p);
    let e = engine(&p, &b, HullOptions::default());
    let st = e.init_order2().unwrap();
    let y = e.obstruction_cocycle(&m(&e, "x12*x24"), &st).unwrap();
    assert_eq!(y.components().len(), 1);
    assert_eq!(y.components()[0].get(0, 0).as_scalar(), Some(int(-1)));
    assert!(e.obstruction_cocycle(&m(&e, "x12*x21"), &st).unwrap().is_zero());
}

#[test]
fn order_two_products_match_the_oracle() {
    let p = weyl();
    let b = supplied(&p);
    let e = engine(&p, &b, HullOptions::default());
    let products = e.massey_products_of_order(&e.init_order2().unwrap()).unwrap();
    let table = e.table();
    let got: BTreeMap<String, Vec<Scalar>> = products.into_iter().map(|(x, v)| (x.format(table), v)).collect();
    for (name, c) in ORACLE_PRODUCTS {
        let v = &got[name];
        if v.is_empty() {
            assert_eq!(c, 0, "{name}");
        } else {
            assert_eq!(v, &vec![int(c)], "{name}");
        }
    }
}

#[test]
fn advancing_to_order_three_gives_the_binomials_and_zero_corrections() {
    let p = weyl();
    let b = supplied(&p);
    let e = engine(&p, &b, HullOptions::default());
    let st = e.advance_order(&e.init_order2().unwrap()).unwrap();
    let rels: Vec<String> = st.series().iter().map(|f| f.format(e.table())).collect();
    assert_eq!(rels, ["x13*x34 - x12*x24", "x24*x43 - x21*x13", "x31*x12 - x34*x42", "x42*x21 - x43*x31"]);
    let log = &st.log()[0];
    assert!(log.nonzero_corrections.is_empty());
    let eliminated: Vec<MatricMonomial> = ["x13*x34", "x24*x43", "x31*x12", "x42*x21"].iter().map(|s| m(&e, s)).collect();
    let expected: Vec<MatricMonomial> = monomials_of_degree(e.table(), 2).into_iter().filter(|x| !eliminated.contains(x)).collect();
    assert_eq!(log.basis, expected);
    assert_eq!(st.quotient().basis().len(), 4 + 8 + 12);
    assert!(e.verify_state(&st).unwrap().is_none());
}

#[test]
fn order_three_products_vanish() {
    let p = weyl();
    let b = supplied(&p);
    let e = engine(&p, &b, HullOptions { max_order: 4, stop_when_stabilized: false, ..Default::default() });
    let hull = e.compute_hull().unwrap();
    assert_eq!(hull.state.relation_degree(), 4);
    for log in &hull.state.log()[1..] {
        assert!(log.products.values().flatten().all(|c| *c == int(0)), "order {}", log.order);
    }
    let truncated: Vec<MatricPoly> = hull.state.series().iter().map(|f| f.truncated(2)).collect();
    assert_eq!(truncated, hull.state.series());
}

#[test]
fn natural_order_eliminates_other_monomials_but_same_relations() {
    let p = weyl();
    let b = supplied(&p);
    let e = MasseyEngine::new(&p.yoneda, &b, MonomialOrder::natural(), HullOptions::default()).unwrap();
    let st = e.advance_order(&e.init_order2().unwrap()).unwrap();
    let basis = &st.log()[0].basis;
    assert!(basis.contains(&m(&e, "x31*x12")));
    assert!(!basis.contains(&m(&e, "x34*x42")));
    assert_eq!(e.check_stabilized(&st).unwrap().stabilized, true);
}

#[test]
fn compute_hull_stabilizes_at_relation_degree_two() {
    let p = weyl();
    let b = supplied(&p);
    let e = engine(&p, &b, HullOptions { max_order: 5, ..Default::default() });
    let hull = e.compute_hull().unwrap();
    assert!(hull.stabilization.stabilized);
    assert_eq!(hull.state.relation_degree(), 2);
    assert_eq!(hull.stabilization.cutoff, 5);
}

#[test]
fn corrupted_relation_is_not_certified() {
    let p = weyl();
    let b = supplied(&p);
    let e = engine(&p, &b, HullOptions::default());
    let st = e.compute_hull().unwrap().state;
    let mut series = st.series().to_vec();
    let mut f = MatricPoly::zero(0, 3);
    f.add_term(m(&e, "x13*x34"), int(1)).unwrap();
    f.add_term(m(&e, "x12*x24"), int(1)).unwrap();
    series[0] = f;
    let stab = e.check_stabilized(&st.with_series(series)).unwrap();
    assert!(!stab.stabilized);
    assert!(stab.failure.is_some());
}

#[test]
fn immediate_products_of_degree_two_are_cup_products() {
    let p = weyl();
    let b = supplied(&p);
    let e = engine(&p, &b, HullOptions::default());
    let cups = e.cup_products().unwrap();
    assert_eq!(cups[&m(&e, "x12*x24")], vec![int(-1)]);
    assert_eq!(cups[&m(&e, "x43*x31")], vec![int(-1)]);
}

#[test]
fn degree_three_immediate_product_is_undefined() {
    // regression value pinned from the first run
    let p = weyl();
    let b = supplied(&p);
    let e = engine(&p, &b, HullOptions::default());
    let st = e.init_order2().unwrap();
    let x = m(&e, "x12*x24*x43");
    let cochains = x.arrows().iter().map(|&id| (id, st.system().get(&MatricMonomial::arrow(e.table(), id)).unwrap().clone())).collect();
    let got = e.immediate_massey(&x, &cochains).unwrap();
    assert_eq!(got, ImmediateMassey::Undefined { at: m(&e, "x12*x24"), obstruction: vec![int(-1)] });
}

#[test]
fn sign_rescaling_search_recovers_flipped_generators() {
    let p = weyl();
    let b = supplied(&p);
    let e = engine(&p, &b, HullOptions::default());
    let series = e.compute_hull().unwrap().state.series().to_vec();
    let mut lambda = vec![int(1); 8];
    lambda[0] = int(-1);
    lambda[5] = int(-1);
    let flipped: Vec<MatricPoly> = series.iter().map(|f| rescale(f, &lambda)).collect();
    assert_ne!(flipped, series);
    let found = find_sign_rescaling(e.table(), &series, &flipped).unwrap();
    let back: Vec<MatricPoly> = series.iter().map(|f| rescale(f, &found)).collect();
    for (f, g) in back.iter().zip(&flipped) {
        assert!(ncdef::massey::proportional(f, g));
    }
}

#[test]
fn rigid_family_has_trivial_hull() {
    let mut spec = ProblemSpec::preset("poly1-point").unwrap();
    spec.name = "line-rigid".into();
    spec.algebra = ncdef::problem::AlgebraSource::Preset { preset: "weyl1".into() };
    spec.modules[0].ideal = vec!["Dx".into()];
    spec.modules[0].resolution.differentials = vec![vec![vec!["Dx".into()]]];
    let p = Problem::build(spec).unwrap();
    assert_eq!(p.yoneda.ext_dimension(0, 0, 1).unwrap(), 0);
    let out = run(&p).unwrap();
    assert!(out.report.hull.generators.is_empty());
    assert!(out.report.hull.relations.is_empty());
    assert_eq!(out.report.versal_family.len(), 1);
}

#[test]
fn reports_differ_only_in_max_order() {
    let mut a = ProblemSpec::preset("weyl2-simple4").unwrap();
    a.options.hull.max_order = 4;
    let mut b = a.clone();
    b.options.hull.max_order = 2;
    let ra = run(&Problem::build(a).unwrap()).unwrap().report.to_value();
    let rb = run(&Problem::build(b).unwrap()).unwrap().report.to_value();
    let diff = diff_reports(&ra, &rb).unwrap();
    let paths: Vec<&str> = diff.iter().map(|d| d.path.as_str()).collect();
    assert_eq!(paths, ["problem.options.hull.max_order"]);
    assert!(diff_reports(&ra, &ra).unwrap().is_empty());
}

#[test]
fn corrupted_sign_diff_localizes_to_relations() {
    let p = weyl();
    let good = run(&p).unwrap().report;
    let mut bad = good.clone();
    let c = &mut bad.hull.relations[0].terms[0].coefficient;
    *c = if c.starts_with('-') { c[1..].to_string() } else { format!("-{c}") };
    let diff = diff_reports(&good.to_value(), &bad.to_value()).unwrap();
    assert_eq!(diff.len(), 1);
    assert!(diff[0].path.starts_with("hull.relations[0]"));
}

#[test]
fn flipped_obstruction_representative_changes_relations_not_tables() {
    let mut spec = ProblemSpec::preset("weyl2-simple4").unwrap();
    let good = run(&Problem::build(spec.clone()).unwrap()).unwrap().report.to_value();
    spec.representatives.as_mut().unwrap().ext2[0].components[0][0][0] = "-1".into();
    let bad = run(&Problem::build(spec).unwrap()).unwrap().report;
    assert_eq!(bad.hull.relations[0].polynomial, "x12*x24 - x13*x34");
    let diff = diff_reports(&good, &bad.to_value()).unwrap();
    assert!(diff.iter().any(|d| d.path.starts_with("hull.relations[0]")));
    assert!(diff.iter().all(|d| !d.path.starts_with("ext.ext") && !d.path.starts_with("hull.relations[1]")));
}

#[test]
fn schema_mismatch_is_reported() {
    let p = weyl();
    let a = run(&p).unwrap().report.to_value();
    let mut b = a.clone();
    b["schema"] = "ncdef.report/0".into();
    assert!(matches!(diff_reports(&a, &b), Err(ncdef::error::Error::SchemaMismatch { .. })));
}
