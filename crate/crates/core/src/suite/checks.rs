use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::church::{generator, ChurchContext, ChurchError, SubstitutionBijection};
use crate::clone::{
    appvar, cay, cay_tabulated, check_clone_laws, check_morphism, check_mutations, delta_endo_iso, parse_tree,
    trees_below_height, CloneError, FiniteClone, FreeMorphism, LawOptions, LawReport, Monoid, MonoidAction,
    RankedAlphabet, Tree, TreeEnumerator,
};
use crate::finsem::{all_relations, interp_closed, Fin, FinRelation, RelationChecker, SemDomain, SemError, SemValue};
use crate::profinite::{
    definability_search, definers, family_of_tree, fixed_point_check, lift, naturality_check, parametric_to_tree,
    parametricity_check, restrict, CloneRoster, Definability, NaturalFamily, NaturalityOptions, ParametricFamily,
    ProfiniteError, ProfiniteTermApprox, Recipe,
};
use crate::signatures::{
    action_roundtrip, adjunction_counts, check_unit_laws, free_iteration, setsig_coherence, setsig_unit_iso,
    MonoidObject, ObjectMutation, PointedPair, Signature, SignatureError,
};
use crate::stlc::{alpha_eq, SimpleType, StlcError, Term};

use super::config::{Resolved, SuiteConfig};
use super::CheckRecord;

/// An error inside a check, split by whether a guard stopped it.
struct Stop {
    guard: bool,
    msg: String,
}

impl From<CloneError> for Stop {
    fn from(e: CloneError) -> Stop {
        Stop { guard: matches!(e, CloneError::GuardExceeded { .. }), msg: e.to_string() }
    }
}

impl From<SemError> for Stop {
    fn from(e: SemError) -> Stop {
        Stop { guard: matches!(e, SemError::GuardExceeded { .. }), msg: e.to_string() }
    }
}

impl From<StlcError> for Stop {
    fn from(e: StlcError) -> Stop {
        Stop { guard: false, msg: e.to_string() }
    }
}

impl From<ChurchError> for Stop {
    fn from(e: ChurchError) -> Stop {
        match e {
            ChurchError::Sem(s) => s.into(),
            ChurchError::Clone(c) => c.into(),
            other => Stop { guard: false, msg: other.to_string() },
        }
    }
}

impl From<ProfiniteError> for Stop {
    fn from(e: ProfiniteError) -> Stop {
        match e {
            ProfiniteError::GuardExceeded(m) => Stop { guard: true, msg: m },
            ProfiniteError::Sem(s) => s.into(),
            ProfiniteError::Clone(c) => c.into(),
            ProfiniteError::Church(c) => c.into(),
            other => Stop { guard: false, msg: other.to_string() },
        }
    }
}

impl From<SignatureError> for Stop {
    fn from(e: SignatureError) -> Stop {
        match e {
            SignatureError::Clone(c) => c.into(),
            SignatureError::GuardExceeded { .. } => Stop { guard: true, msg: e.to_string() },
            other => Stop { guard: false, msg: other.to_string() },
        }
    }
}

fn run(rec: CheckRecord, body: impl FnOnce(CheckRecord) -> Result<CheckRecord, Stop>) -> CheckRecord {
    let fallback = rec.clone();
    match body(rec) {
        Ok(r) => r,
        Err(Stop { guard: true, msg }) => fallback.inconclusive(msg),
        Err(Stop { guard: false, msg }) => fallback.fail(msg),
    }
}

/// The first failing item of a parallel sweep, in input order.
fn first_failure<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<Option<String>, Stop> + Sync + Send) -> Result<Option<String>, Stop> {
    items
        .par_iter()
        .map(&f)
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .unwrap_or(Ok(None))
}

pub(super) fn run_named(name: &str, c: &SuiteConfig, r: &Resolved, roster: &CloneRoster) -> Vec<CheckRecord> {
    match name {
        "clone-laws" => clone_laws(c, r),
        "church-roundtrip" => church(c, r),
        "fundamental-lemma" => fundamental_lemma(c, r),
        "naturality" => naturality(c, r, roster),
        "iso-roundtrip" => iso(c, r, roster),
        "fixed-point" => fixed_point(c, r),
        "parametricity" => parametricity(c, r),
        "signatures" => signatures(c, r),
        _ => Vec::new(),
    }
}

fn law_record(suite: &str, name: String, anchor: &str, rep: &LawReport) -> CheckRecord {
    let mut rec = CheckRecord::new(suite, name, anchor, rep.subject.clone())
        .tested(rep.checks.iter().map(|c| c.tested).sum());
    if !rep.exhaustive {
        rec = rec.sampled();
    }
    match &rep.counterexample {
        Some(cx) if !rep.passed => rec.fail(format!(
            "{} at arities {:?} on [{}]: {} differs from {}",
            cx.law,
            cx.arities,
            cx.inputs.join(", "),
            cx.lhs,
            cx.rhs
        )),
        _ if !rep.passed => rec.fail("a law check failed without a recorded counterexample"),
        _ => rec,
    }
}

fn law_options(c: &SuiteConfig, arity: usize) -> LawOptions {
    LawOptions {
        arity_bound: arity,
        tree_size: c.clone_laws.tree_size,
        samples: c.clone_laws.samples,
        seed: c.seed,
        exhaustive_limit: c.clone_laws.exhaustive_limit,
    }
}

fn xor_image() -> FiniteClone {
    let e2 = FiniteClone::endo(2);
    let p = FreeMorphism::from_indices(&RankedAlphabet::new(vec![0, 2]), &e2, &[1, 6]).expect("letters in range");
    FiniteClone::image(&p)
}

fn clone_laws(c: &SuiteConfig, r: &Resolved) -> Vec<CheckRecord> {
    const S: &str = "clone-laws";
    const AXIOMS: &str = "clone axioms: left unit, right unit, associativity";
    let cl = &c.clone_laws;
    let mut out = Vec::new();
    for alpha in &r.clone_laws {
        let rep = check_clone_laws(&FiniteClone::free(alpha), &law_options(c, cl.free_arity));
        out.push(law_record(S, format!("free clone {}", alpha), AXIOMS, &rep));
    }
    for &q in &cl.endo_sizes {
        let rep = check_clone_laws(&FiniteClone::endo(q), &law_options(c, cl.endo_arity));
        out.push(law_record(S, format!("Endo({})", q), AXIOMS, &rep));
    }
    let flip = FiniteClone::action(&MonoidAction::flip()).expect("flip is an action");
    let derived = [
        ("action clone of the Z/2 flip".to_string(), flip.clone()),
        ("delta Endo(2)".to_string(), FiniteClone::delta(&FiniteClone::endo(2))),
        ("product Endo(2) x flip".to_string(), FiniteClone::product(vec![FiniteClone::endo(2), flip.clone()])),
        ("image of [0,2] -> Endo(2), a2 = xor".to_string(), xor_image()),
    ];
    for (name, clone) in &derived {
        let rep = check_clone_laws(clone, &law_options(c, cl.derived_arity));
        out.push(law_record(S, name.clone(), AXIOMS, &rep));
    }
    let opts = law_options(c, cl.derived_arity);
    let (fwd, inv) = delta_endo_iso(2);
    let morphisms = [
        ("cay^1 of the flip action clone".to_string(), cay_tabulated(&flip, 1)),
        ("delta Endo(2) -> Endo(2)^2".to_string(), Ok(fwd)),
        ("Endo(2)^2 -> delta Endo(2)".to_string(), Ok(inv)),
    ];
    for (name, phi) in morphisms {
        let rec = CheckRecord::new(S, format!("morphism {}", name), "clone morphism laws", name.clone());
        out.push(match phi {
            Ok(phi) => law_record(S, format!("morphism {}", name), "clone morphism laws", &check_morphism(&phi, &opts)),
            Err(e) => rec.fail(e.to_string()),
        });
    }
    for (m, rep) in check_mutations(&opts) {
        let rec = CheckRecord::new(S, format!("detects {}", m.name()), "law checker rejects corrupted clones", rep.subject.clone())
            .tested(rep.checks.iter().map(|c| c.tested).sum());
        out.push(match &rep.counterexample {
            Some(cx) if !rep.passed => rec.note(format!("{} fails at arities {:?}", cx.law, cx.arities)),
            _ => rec.fail(format!("{} passed every law", rep.subject)),
        });
        if c.inject_mutations {
            out.push(law_record(S, format!("mutant {}", m.name()), AXIOMS, &rep));
        }
    }
    out
}

fn church(c: &SuiteConfig, r: &Resolved) -> Vec<CheckRecord> {
    const S: &str = "church-roundtrip";
    let cc = &c.church;
    let mut out = Vec::new();
    for alpha in &r.church {
        for &n in &cc.vars {
            let rec = CheckRecord::new(
                S,
                format!("decode . encode {} n={}", alpha, n),
                "Church encoding is a bijection",
                format!("trees of size <= {}", cc.roundtrip_size),
            );
            out.push(run(rec, |rec| {
                let trees = TreeEnumerator::new(alpha, n).up_to(cc.roundtrip_size);
                let ctx = ChurchContext::new(alpha, n);
                let w = first_failure(&trees, |t| {
                    let back = ctx.decode(&ctx.encode(t)?)?;
                    Ok((&back != t).then(|| format!("{} decodes to {}", t, back)))
                })?;
                Ok(rec.tested(trees.len() as u64).expect_none(w))
            }));
        }
        for m in 1..=2usize {
            for &n in &cc.vars {
                let rec = CheckRecord::new(
                    S,
                    format!("encode is a substitution homomorphism {} m={} n={}", alpha, m, n),
                    "encode(t[u]) = encode(t)[encode(u)]",
                    format!("t over {} variables and u over {}, sizes <= {}", m, n, cc.subst_size),
                );
                out.push(run(rec, |rec| {
                    let heads = TreeEnumerator::new(alpha, m).up_to(cc.subst_size);
                    let args = TreeEnumerator::new(alpha, n).up_to(cc.subst_size);
                    let (cm, cn) = (ChurchContext::new(alpha, m), ChurchContext::new(alpha, n));
                    let enc_args = args.iter().map(|u| cn.encode(u)).collect::<Result<Vec<_>, _>>()?;
                    let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
                    for _ in 0..m {
                        tuples = tuples
                            .into_iter()
                            .flat_map(|t| (0..args.len()).map(move |k| [t.clone(), vec![k]].concat()))
                            .collect();
                    }
                    let cases: Vec<(&Tree, &Vec<usize>)> = heads.iter().flat_map(|t| tuples.iter().map(move |u| (t, u))).collect();
                    let w = first_failure(&cases, |(t, us)| {
                        let sub: Vec<Tree> = us.iter().map(|&k| args[k].clone()).collect();
                        let lhs = cn.encode(&t.subst(&sub))?;
                        let actual: Vec<Term> = us.iter().map(|&k| enc_args[k].clone()).collect();
                        let rhs = ChurchContext::kleisli_subst(alpha, &cm.encode(t)?, &actual, n)?;
                        Ok((!alpha_eq(&lhs, &rhs)).then(|| format!("{} with {:?}: {} against {}", t, sub, lhs, rhs)))
                    })?;
                    Ok(rec.tested(cases.len() as u64).expect_none(w))
                }));
            }
        }
    }
    let alpha = &r.coherence;
    for n in 1..=2usize {
        let rec = CheckRecord::new(
            S,
            format!("substitution bijection coherence {} Q={} n={}", alpha, cc.coherence_q, n),
            "p(t) equals the semantic fold of encode(t) at the tuple of p",
            format!("all morphisms into Endo({}), trees of size <= {}", cc.coherence_q, cc.coherence_size),
        );
        out.push(run(rec, |rec| {
            let b = SubstitutionBijection::new(alpha, cc.coherence_q, c.guard);
            let ps = b.morphisms()?;
            let trees = TreeEnumerator::new(alpha, n).up_to(cc.coherence_size);
            let cases: Vec<(&FreeMorphism, &Tree)> = ps.iter().flat_map(|p| trees.iter().map(move |t| (p, t))).collect();
            let w = first_failure(&cases, |(p, t)| {
                let (x, y) = (b.church_table(n, t, p)?, b.clone_table(n, t, p)?);
                Ok((x != y).then(|| format!("{} under {:?}: {:?} against {:?}", t, p.indices(), x, y)))
            })?;
            Ok(rec.tested(cases.len() as u64).note(format!("{} morphisms", ps.len())).expect_none(w))
        }));
    }
    out
}

fn fundamental_lemma(c: &SuiteConfig, r: &Resolved) -> Vec<CheckRecord> {
    const S: &str = "fundamental-lemma";
    const ANCHOR: &str = "closed terms have related denotations at every relation";
    let sc = &c.semantics;
    let mut classes: Vec<(String, Vec<FinRelation>, bool)> = Vec::new();
    let mut small = Vec::new();
    for &a in &sc.small_sizes {
        for &b in &sc.small_sizes {
            small.extend(all_relations(Fin(a), Fin(b)).unwrap_or_default());
        }
    }
    classes.push((format!("all relations between sizes {:?}", sc.small_sizes), small, true));
    let (ma, mb) = sc.mixed;
    let mut mixed = all_relations(Fin(ma), Fin(mb)).unwrap_or_default();
    let exhaustive = mixed.len() <= sc.mixed_samples;
    if !exhaustive {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        mixed.shuffle(&mut rng);
        mixed.truncate(sc.mixed_samples);
    }
    classes.push((format!("relations {}x{}", ma, mb), mixed, exhaustive));

    let mut out = Vec::new();
    for alpha in &r.semantics {
        let ctx = ChurchContext::new(alpha, 1);
        let trees = TreeEnumerator::new(alpha, 1).up_to(sc.tree_size);
        let mut corpus: Vec<(String, Term)> = Vec::new();
        for t in &trees {
            if let Ok(m) = ctx.encode(t) {
                corpus.push((format!("encode {}", t), m));
            }
        }
        let tree_terms = corpus.len();
        for (i, _) in alpha.letters() {
            if let Ok(g) = generator(alpha, i) {
                corpus.push((format!("g{}", i), g));
            }
        }
        for (label, rels, exhaustive) in &classes {
            let rec = CheckRecord::new(
                S,
                format!("{} {}", alpha, label),
                ANCHOR,
                format!(
                    "{} tree encodings and {} generators, {} relations",
                    tree_terms,
                    corpus.len() - tree_terms,
                    rels.len()
                ),
            );
            let rec = if *exhaustive { rec } else { rec.sampled() };
            out.push(run(rec, |rec| lemma_sweep(rec, &corpus, rels, c.guard)));
        }
    }
    out
}

/// Checks every term against every relation; pairs stopped by a guard are
/// counted and reported, and the sweep passes when nothing is violated and
/// at least one pair was decided.
fn lemma_sweep(rec: CheckRecord, terms: &[(String, Term)], rels: &[FinRelation], guard: u64) -> Result<CheckRecord, Stop> {
    let mut sizes: Vec<usize> = rels.iter().flat_map(|r| [r.left.0, r.right.0]).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let typed: Vec<(String, SimpleType, Vec<Option<Denotation>>)> = terms
        .iter()
        .map(|(l, m)| {
            let ty = crate::stlc::typecheck(&crate::stlc::TypingContext::new(), m)?;
            let vals = (0..=sizes.last().copied().unwrap_or(0))
                .map(|q| if sizes.contains(&q) { Denotation::new(m, &ty, q, guard) } else { None })
                .collect();
            Ok((l.clone(), ty, vals))
        })
        .collect::<Result<_, StlcError>>()?;
    let results: Vec<(u64, u64, Option<String>)> = rels
        .par_iter()
        .map(|rel| {
            let mut ck = RelationChecker::new(rel.clone(), guard);
            let (mut decided, mut stopped) = (0u64, 0u64);
            for (l, ty, vals) in &typed {
                let (Some(v), Some(w)) = (&vals[rel.left.0], &vals[rel.right.0]) else {
                    stopped += 1;
                    continue;
                };
                match related(&mut ck, ty, v, w) {
                    Ok(true) => decided += 1,
                    Ok(false) => return (decided, stopped, Some(format!("{} at {}", l, rel))),
                    Err(SemError::GuardExceeded { .. }) => stopped += 1,
                    Err(e) => return (decided, stopped, Some(format!("{} at {}: {}", l, rel, e))),
                }
            }
            (decided, stopped, None)
        })
        .collect();
    let decided: u64 = results.iter().map(|r| r.0).sum();
    let stopped: u64 = results.iter().map(|r| r.1).sum();
    let witness = results.into_iter().find_map(|r| r.2);
    let mut rec = rec.tested(decided).expect_none(witness);
    if stopped > 0 {
        rec = rec.note(format!("{} term-relation pairs beyond the guard", stopped));
        if decided == 0 {
            rec = rec.inconclusive("every pair was beyond the guard");
        }
    }
    Ok(rec)
}

/// Denotations with at most this many argument tuples are tabulated once
/// before the sweep, so each relation costs table lookups only.
const TABULATE_LIMIT: u64 = 1 << 18;

/// A closed term's denotation over one base set. When it is a table at an
/// arrow type, the canonical indices of its results are kept alongside.
struct Denotation {
    value: SemValue,
    results: Option<Vec<u128>>,
}

impl Denotation {
    fn new(m: &Term, ty: &SimpleType, q: usize, guard: u64) -> Option<Denotation> {
        let value = interp_closed(m, Fin(q), guard).ok()?;
        let dom = SemDomain::new(ty, Fin(q), TABULATE_LIMIT);
        let value = value.tabulate(&dom).unwrap_or(value);
        let results = match (value.as_func(), dom.arrow_parts()) {
            (Some(f), Some((d, c))) if f.is_table() && c.cardinality().is_some() => d
                .cardinality()
                .and_then(|n| (0..n).map(|i| c.index_of(f.table_value(i)?).ok()).collect()),
            _ => None,
        };
        Some(Denotation { value, results })
    }
}

fn related(ck: &mut RelationChecker, ty: &SimpleType, v: &Denotation, w: &Denotation) -> Result<bool, SemError> {
    if let (SimpleType::Arrow(d, c), Some(vr), Some(wr)) = (ty, &v.results, &w.results) {
        if let (Some(dt), Some(ct)) = (ck.related_pairs(d), ck.related_pairs(c)) {
            return Ok(dt.pairs().iter().all(|&(x, y)| ct.contains(vr[x as usize], wr[y as usize])));
        }
    }
    ck.member(ty, &v.value, &w.value)
}

/// `a(x₁)` on every member except `Endo(3)`, where it is `x₁`.
pub(crate) fn mixed_family(roster: &CloneRoster) -> Result<NaturalFamily, ProfiniteError> {
    let alpha = RankedAlphabet::new(vec![1]);
    let ax = Tree::node(1, vec![Tree::Var(1)]);
    NaturalFamily::from_fn(&alpha, 1, roster, |i, p| {
        if roster.member(i).recipe == Recipe::Endo(3) {
            p.eval(1, &Tree::Var(1))
        } else {
            p.eval(1, &ax)
        }
    })
}

fn naturality(c: &SuiteConfig, r: &Resolved, roster: &CloneRoster) -> Vec<CheckRecord> {
    const S: &str = "naturality";
    let nc = &c.naturality;
    let alpha = &r.naturality;
    let opts = NaturalityOptions { seed: c.seed, ..NaturalityOptions::default() };
    let trees = TreeEnumerator::new(alpha, 1).up_to(nc.tree_size);
    let mut out = Vec::new();
    let rec = CheckRecord::new(
        S,
        format!("tree families are natural {}", alpha),
        "families defined by a tree are natural",
        format!("trees of size <= {}", nc.tree_size),
    );
    out.push(run(rec, |rec| {
        let w = first_failure(&trees, |t| {
            let rep = naturality_check(&family_of_tree(alpha, 1, t, roster)?, &opts)?;
            Ok(rep.checks.iter().find_map(|s| s.failure.as_ref().map(|f| format!("{}: {}: {}", t, s.morphism, f))))
        })?;
        Ok(rec.tested(trees.len() as u64).expect_none(w))
    }));
    let rec = CheckRecord::new(
        S,
        format!("bidefinability {}", alpha),
        "one tree defines the family on the whole roster",
        format!("trees of size <= {}, search bound {}", nc.tree_size, nc.search_bound),
    );
    out.push(run(rec, |rec| {
        let w = first_failure(&trees, |t| {
            let u = family_of_tree(alpha, 1, t, roster)?;
            Ok(match definability_search(&u, nc.search_bound)? {
                Definability::Defined(s) => {
                    if !family_of_tree(alpha, 1, &s, roster)?.same_tables(&u)? {
                        Some(format!("{} recovered {} with a different family", t, s))
                    } else if t.size() <= nc.unique_size && &s != t {
                        Some(format!("{} recovered as {}", t, s))
                    } else {
                        None
                    }
                }
                Definability::Inconclusive(b) => Some(format!("{}: nothing found up to size {}", t, b)),
            })
        })?;
        Ok(rec.tested(trees.len() as u64).expect_none(w))
    }));
    let small: Vec<Tree> = trees.iter().filter(|t| t.size() <= nc.unique_size).cloned().collect();
    let rec = CheckRecord::new(
        S,
        format!("unique definers {}", alpha),
        "the defining tree is unique among small trees",
        format!("trees of size <= {}", nc.unique_size),
    );
    out.push(run(rec, |rec| {
        let w = first_failure(&small, |t| {
            let ds = definers(&family_of_tree(alpha, 1, t, roster)?, nc.unique_size)?;
            Ok((ds != vec![t.clone()]).then(|| format!("{} is defined by {:?}", t, ds)))
        })?;
        Ok(rec.tested(small.len() as u64).expect_none(w))
    }));
    let rec = CheckRecord::new(
        S,
        "rejects a mixed family",
        "a family defined by different trees on Endo(2) and Endo(3) is not natural",
        "a(x1) except x1 on Endo(3)",
    );
    out.push(run(rec, |rec| {
        if roster.find_endo(2).is_none() || roster.find_endo(3).is_none() {
            return Ok(rec.inconclusive("the roster lacks Endo(2) or Endo(3)"));
        }
        let rep = naturality_check(&mixed_family(roster)?, &opts)?;
        let tested = rep.checks.iter().map(|s| s.tested).sum();
        Ok(match rep.checks.iter().find(|s| s.failure.is_some()) {
            Some(s) => rec.tested(tested).note(format!("{}: {}", s.morphism, s.failure.clone().unwrap_or_default())),
            None => rec.tested(tested).fail("every square commutes"),
        })
    }));
    out
}

fn iso(c: &SuiteConfig, r: &Resolved, roster: &CloneRoster) -> Vec<CheckRecord> {
    const S: &str = "iso-roundtrip";
    let ic = &c.iso;
    let alpha = &r.iso;
    let trees = TreeEnumerator::new(alpha, 1).up_to(ic.tree_size);
    let mut out = Vec::new();
    let rec = CheckRecord::new(
        S,
        format!("restrict is the encoding {}", alpha),
        "restriction to Endo(Q) is the denotation of the encoding",
        format!("trees of size <= {}", ic.tree_size),
    );
    out.push(run(rec, |rec| {
        let w = first_failure(&trees, |t| {
            let th = restrict(&family_of_tree(alpha, 1, t, roster)?, c.guard)?;
            Ok((!th.matches_tree(t)?).then(|| t.to_string()))
        })?;
        Ok(rec.tested(trees.len() as u64).expect_none(w))
    }));
    let rec = CheckRecord::new(
        S,
        format!("lift . restrict = id {}", alpha),
        "natural families are determined by their Endo components",
        format!("trees of size <= {}", ic.tree_size),
    );
    out.push(run(rec, |rec| {
        let w = first_failure(&trees, |t| {
            let u = family_of_tree(alpha, 1, t, roster)?;
            let th = restrict(&u, c.guard)?.with_witness_rule(ic.tree_size)?;
            Ok((!lift(&th, roster)?.same_tables(&u)?).then(|| t.to_string()))
        })?;
        Ok(rec.tested(trees.len() as u64).expect_none(w))
    }));
    let rec = CheckRecord::new(
        S,
        format!("restrict . lift = id {}", alpha),
        "lifting a term family keeps its Endo components",
        format!("encodings of trees of size <= {}", ic.tree_size),
    );
    out.push(run(rec, |rec| {
        let sizes = roster.endo_sizes();
        let ctx = ChurchContext::new(alpha, 1);
        let w = first_failure(&trees, |t| {
            let th = ProfiniteTermApprox::from_term(alpha, 1, &ctx.encode(t)?, &sizes, c.guard)?;
            Ok((!restrict(&lift(&th, roster)?, c.guard)?.same_components(&th)?).then(|| t.to_string()))
        })?;
        Ok(rec.tested(trees.len() as u64).expect_none(w))
    }));
    let rec = CheckRecord::new(
        S,
        format!("restrict preserves substitution {}", alpha),
        "restriction is a clone morphism",
        format!("pairs of trees of size <= {}", ic.tree_size),
    );
    out.push(run(rec, |rec| {
        let pairs: Vec<(&Tree, &Tree)> = trees.iter().flat_map(|t| trees.iter().map(move |s| (t, s))).collect();
        let w = first_failure(&pairs, |(t, s)| {
            let (u, v) = (family_of_tree(alpha, 1, t, roster)?, family_of_tree(alpha, 1, s, roster)?);
            let lhs = restrict(&u.substitute(std::slice::from_ref(&v))?, c.guard)?;
            let rhs = restrict(&u, c.guard)?.kleisli(&[restrict(&v, c.guard)?])?;
            Ok((!lhs.same_components(&rhs)?).then(|| format!("{} after {}", t, s)))
        })?;
        Ok(rec.tested(pairs.len() as u64).expect_none(w))
    }));
    for (i, m) in roster.members().iter().enumerate() {
        let rec = CheckRecord::new(
            S,
            format!("appvar . cay = id on {}", m.name),
            "appvar is a retraction of the Cayley map",
            format!("every element at arities <= {}", ic.retraction_arity),
        );
        out.push(run(rec, |rec| {
            let mut tested = 0u64;
            for n in 0..=ic.retraction_arity {
                let phi = cay(&m.clone, n);
                let elems = m.clone.carrier(n)?.elems().to_vec();
                let w = first_failure(&elems, |e| {
                    let back = appvar(&m.clone, n, &phi.apply(n, e)?)?;
                    Ok((!m.clone.equal(n, &back, e)?).then(|| format!("member {} arity {}: {} became {}", i, n, e, back)))
                })?;
                tested += elems.len() as u64;
                if let Some(w) = w {
                    return Ok(rec.tested(tested).fail(w));
                }
            }
            Ok(rec.tested(tested))
        }));
    }
    out
}

fn fixed_point(c: &SuiteConfig, r: &Resolved) -> Vec<CheckRecord> {
    const S: &str = "fixed-point";
    const ANCHOR: &str = "rho_Q equals rho at Q* applied to the generators";
    let fc = &c.fixed_point;
    let alpha = &r.fixed_point;
    let trees = TreeEnumerator::new(alpha, 0).up_to(fc.tree_size);
    let mut out = Vec::new();
    let rec = CheckRecord::new(
        S,
        format!("tree families {} Q={}", alpha, fc.q),
        ANCHOR,
        format!("closed trees of size <= {}", fc.tree_size),
    );
    out.push(run(rec, |rec| {
        let mut qs = 0;
        for t in &trees {
            let rho = ParametricFamily::from_tree(alpha, 0, t, vec![fc.q])?;
            let rep = fixed_point_check(&rho, alpha, fc.q, c.guard)?;
            qs = rep.q_star;
            if !rep.passed {
                return Ok(rec.fail(format!("{}: {}", t, rep.witness.unwrap_or_default())));
            }
        }
        Ok(rec.tested(trees.len() as u64).note(format!("Q* has {} elements", qs)))
    }));
    let rec = CheckRecord::new(
        S,
        format!("rejects a non-parametric family {} Q={}", alpha, fc.q),
        ANCHOR,
        "the first tree at Q and the second elsewhere",
    );
    out.push(run(rec, |rec| {
        if trees.len() < 2 {
            return Ok(rec.inconclusive("fewer than two closed trees"));
        }
        let ctx = ChurchContext::new(alpha, 0);
        let (at_q, other) = (ctx.encode(&trees[1])?, ctx.encode(&trees[0])?);
        let q = fc.q;
        let rho = ParametricFamily::custom(ctx.church_type(), "switch", vec![q], move |s, g| {
            interp_closed(if s.0 == q { &at_q } else { &other }, s, g)
        });
        let rep = fixed_point_check(&rho, alpha, q, c.guard)?;
        Ok(match (rep.passed, rep.witness) {
            (false, Some(w)) => rec.tested(1).note(w),
            (false, None) => rec.tested(1).fail("rejected without a witness"),
            (true, _) => rec.tested(1).fail("the family satisfies the equation"),
        })
    }));
    out
}

fn parametricity(c: &SuiteConfig, r: &Resolved) -> Vec<CheckRecord> {
    const S: &str = "parametricity";
    let pc = &c.parametricity;
    let alpha = &r.parametricity;
    let trees = TreeEnumerator::new(alpha, 1).up_to(pc.tree_size);
    let mut out = Vec::new();
    let rec = CheckRecord::new(
        S,
        format!("tree families are parametric {} sizes {:?}", alpha, pc.sizes),
        "term families are closed under all relations",
        format!("trees of size <= {}", pc.tree_size),
    );
    out.push(run(rec, |rec| {
        let mut rels = 0;
        for t in &trees {
            let rep = parametricity_check(&ParametricFamily::from_tree(alpha, 1, t, pc.sizes.clone())?, c.guard)?;
            rels += rep.pairs.iter().map(|p| p.relations).sum::<u64>();
            if let Some(p) = rep.pairs.iter().find(|p| p.failure.is_some()) {
                return Ok(rec.fail(format!("{} at {}", t, p.failure.clone().unwrap_or_default())));
            }
        }
        Ok(rec.tested(rels))
    }));
    let rec = CheckRecord::new(
        S,
        format!("parametric families are definable {}", alpha),
        "the least tree with the same denotations is found",
        format!("trees of size <= {}, search bound {}", pc.tree_size, pc.search_bound),
    );
    out.push(run(rec, |rec| {
        let w = first_failure(&trees, |t| {
            let rho = ParametricFamily::from_tree(alpha, 1, t, pc.sizes.clone())?;
            Ok(match parametric_to_tree(&rho, alpha, 1, pc.search_bound, c.guard)? {
                Definability::Defined(s) if &s == t => None,
                Definability::Defined(s) => {
                    let earlier = TreeEnumerator::new(alpha, 1).up_to(t.size()).iter().position(|x| x == &s)
                        < TreeEnumerator::new(alpha, 1).up_to(t.size()).iter().position(|x| x == t);
                    let same = ParametricFamily::from_tree(alpha, 1, &s, pc.sizes.clone())?;
                    let agree = pc.sizes.iter().try_fold(true, |ok, &q| -> Result<bool, Stop> {
                        let dom = crate::finsem::interp_type(&rho.ty, Fin(q), c.guard);
                        Ok(ok && crate::finsem::sem_equal_in(&dom, &rho.at(q, c.guard)?, &same.at(q, c.guard)?)?)
                    })?;
                    (!(earlier && agree)).then(|| format!("{} recovered as {}", t, s))
                }
                Definability::Inconclusive(b) => Some(format!("{}: nothing found up to size {}", t, b)),
            })
        })?;
        Ok(rec.tested(trees.len() as u64).expect_none(w))
    }));
    let rec = CheckRecord::new(
        S,
        "rejects a mismatched family",
        "a family defined by different trees at different sizes is not parametric",
        "a(x1) at 2, a(a(x1)) at 3 over [1]",
    );
    out.push(run(rec, |rec| {
        let a1 = RankedAlphabet::new(vec![1]);
        let ctx = ChurchContext::new(&a1, 1);
        let one = ctx.encode(&parse_tree("(a1 x1)")?)?;
        let two = ctx.encode(&parse_tree("(a1 (a1 x1))")?)?;
        let rho = ParametricFamily::custom(ctx.church_type(), "mixed", vec![2, 3], move |q, g| {
            interp_closed(if q.0 == 3 { &two } else { &one }, q, g)
        });
        let rep = parametricity_check(&rho, c.guard)?;
        let tested = rep.pairs.iter().map(|p| p.relations).sum();
        Ok(match rep.pairs.iter().find(|p| p.failure.is_some()) {
            Some(p) => rec.tested(tested).note(format!("{}x{}: {}", p.left, p.right, p.failure.clone().unwrap_or_default())),
            None => rec.tested(tested).fail("every relation is respected"),
        })
    }));
    out
}

fn action_corpus() -> Vec<(String, MonoidAction)> {
    let absorbing = Monoid::new(2, 0, vec![vec![0, 1], vec![1, 1]]).expect("monoid");
    let rot3 = (0..3).map(|k| (0..3).map(|q| (q + k) % 3).collect()).collect();
    vec![
        ("trivial on 0 states".into(), MonoidAction::trivial(0)),
        ("trivial on 2 states".into(), MonoidAction::trivial(2)),
        ("Z/2 flip".into(), MonoidAction::flip()),
        ("Z/3 rotation".into(), MonoidAction::new(Monoid::cyclic(3), 3, rot3).expect("action")),
        ("absorbing monoid".into(), MonoidAction::new(absorbing, 2, vec![vec![0, 1], vec![0, 0]]).expect("action")),
        (
            "Z/2 on 3 states".into(),
            MonoidAction::new(Monoid::cyclic(2), 3, vec![vec![0, 1, 2], vec![1, 0, 2]]).expect("action"),
        ),
    ]
}

fn pairs(bound: usize) -> Vec<PointedPair> {
    (0..=bound).flat_map(|q| (0..=bound).map(move |a| PointedPair::new(q, a))).collect()
}

fn signatures(c: &SuiteConfig, r: &Resolved) -> Vec<CheckRecord> {
    const S: &str = "signatures";
    let sc = &c.signatures;
    let mut out = Vec::new();
    for alpha in &r.signatures {
        let rec = CheckRecord::new(
            S,
            format!("free iteration {} n=1", alpha),
            "the iteration stages are the trees of bounded height",
            format!("depth <= {}, stage guard {}", sc.iteration_depth, sc.iteration_guard),
        );
        out.push(run(rec, |rec| iteration_check(rec, alpha, sc.iteration_depth, sc.iteration_guard, sc.oracle_limit)));
        let rec = CheckRecord::new(
            S,
            format!("composition units {}", alpha),
            "y1 is a unit for composition and y0 absorbs",
            format!("arities <= {}", sc.arity_bound),
        );
        out.push(run(rec, |rec| {
            check_unit_laws(&Signature::from_alphabet(alpha), sc.arity_bound)?;
            Ok(rec.tested(1))
        }));
    }
    let rec = CheckRecord::new(S, "setsig preserves the unit", "setsig(0, 1) = y1", format!("arities <= {}", sc.arity_bound));
    out.push(run(rec, |rec| {
        setsig_unit_iso(sc.arity_bound)?;
        Ok(rec.tested(1))
    }));
    let ps = pairs(sc.pair_bound);
    let rec = CheckRecord::new(
        S,
        "setsig is monoidal",
        "setsig(P) o setsig(R) = setsig(P semidirect R)",
        format!("pairs with entries <= {}, arities <= {}", sc.pair_bound, sc.arity_bound),
    );
    out.push(run(rec, |rec| {
        let cases: Vec<(PointedPair, PointedPair)> = ps.iter().flat_map(|&p| ps.iter().map(move |&r| (p, r))).collect();
        let w = first_failure(&cases, |&(p, r)| match setsig_coherence(p, r, sc.arity_bound) {
            Ok(()) => Ok(None),
            Err(SignatureError::Law(m)) => Ok(Some(format!("{} and {}: {}", p, r, m))),
            Err(e) => Err(e.into()),
        })?;
        Ok(rec.tested(cases.len() as u64).expect_none(w))
    }));
    let targets = [
        Signature::representable(0),
        Signature::representable(1),
        Signature::Coproduct(vec![0, 1]),
        Signature::Coproduct(vec![0, 0, 1]),
        Signature::representable(2),
    ];
    let rec = CheckRecord::new(
        S,
        "setsig is left adjoint to sigset",
        "natural maps setsig(P) -> X match pair maps P -> (X0, X1)",
        format!("pairs with entries <= {}, five targets", sc.pair_bound),
    );
    out.push(run(rec, |rec| {
        let mut tested = 0u64;
        for p in &ps {
            for x in &targets {
                let k = adjunction_counts(*p, x, 2, 1 << 24)?;
                tested += 1;
                if k.sig_homs != k.set2_homs {
                    return Ok(rec.fail(format!("{} and {}: {} natural maps, {} pair maps", p, x, k.sig_homs, k.set2_homs)));
                }
            }
        }
        Ok(rec.tested(tested))
    }));
    let opts = LawOptions { arity_bound: 2, seed: c.seed, ..LawOptions::default() };
    for (name, ma) in action_corpus() {
        let rec = CheckRecord::new(
            S,
            format!("action round trip {}", name),
            "monoid actions are monoids in pointed pairs",
            format!("{:?}", ma.table()),
        );
        out.push(run(rec, |rec| {
            let rep = action_roundtrip(&ma, &opts)?;
            let law = rep.laws.iter().find_map(|(l, w)| w.as_ref().map(|w| format!("{}: {}", l, w)));
            let w = law
                .or_else(|| (!rep.f_is_identity).then(|| "the state part is not the identity".to_string()))
                .or_else(|| (!rep.action_recovered).then(|| "the action is not recovered".to_string()))
                .or_else(|| (!rep.monoid_recovered).then(|| "the monoid is not recovered".to_string()))
                .or_else(|| (!rep.clone_laws.passed).then(|| format!("clone laws: {:?}", rep.clone_laws.counterexample)));
            Ok(rec.tested(1).expect_none(w))
        }));
        let obj = MonoidObject::from_action(&ma);
        for m in ObjectMutation::ALL {
            if ma.monoid().size() < 2 && matches!(m, ObjectMutation::ActionEntry | ObjectMutation::Multiplication) {
                continue;
            }
            if ma.states() == 0 {
                continue;
            }
            let bad = obj.mutate(m);
            let broken = bad.check_laws().into_iter().find_map(|(l, w)| w.map(|w| format!("{}: {}", l, w)));
            let rec = CheckRecord::new(
                S,
                format!("detects {} on {}", m.name(), name),
                "corrupted monoid objects break a law",
                format!("{:?}", ma.table()),
            )
            .tested(1);
            out.push(match &broken {
                Some(w) => rec.note(w.clone()),
                None => rec.fail("every law still holds"),
            });
            if c.inject_mutations {
                let rec = CheckRecord::new(S, format!("mutant {} on {}", m.name(), name), "monoid object laws", format!("{:?}", ma.table())).tested(1);
                out.push(rec.expect_none(broken));
            }
        }
    }
    out
}

fn iteration_check(rec: CheckRecord, alpha: &RankedAlphabet, depth: usize, guard: u64, oracle_limit: usize) -> Result<CheckRecord, Stop> {
    let mut reached = 0;
    let mut it = free_iteration(alpha, 0, 1, guard)?;
    let mut stop = None;
    for d in 1..=depth {
        match free_iteration(alpha, d, 1, guard) {
            Ok(x) => {
                it = x;
                reached = d;
            }
            Err(e @ SignatureError::GuardExceeded { .. }) => {
                stop = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let sizes: Vec<usize> = (0..=reached).map(|k| it.stage(k).len()).collect();
    let mut compared = 0;
    for (k, &size) in sizes.iter().enumerate() {
        if size > oracle_limit {
            break;
        }
        let got = it.trees_at(k);
        let want = trees_below_height(alpha, 1, k);
        let got_set: HashSet<&Tree> = got.iter().collect();
        let same = got_set.len() == got.len() && got.len() == want.len() && want.iter().all(|t| got_set.contains(t));
        if !same {
            return Ok(rec.fail(format!("stage {} has {} trees, height below {} gives {}", k, got.len(), k, want.len())));
        }
        compared = k;
    }
    let mut note = format!("stage sizes {:?}; compared through depth {}", sizes, compared);
    if let Some(s) = stop {
        note.push_str(&format!("; depth {} stopped: {}", reached + 1, s));
    }
    Ok(rec.tested(sizes.iter().map(|&s| s as u64).sum()).note(note))
}
