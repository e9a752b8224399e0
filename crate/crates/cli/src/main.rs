//! `clonekit`: batch checks, Church encoding and profinite-family tools.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use clonekit::church::ChurchContext;
use clonekit::clone::{parse_tree, RankedAlphabet, Tree};
use clonekit::finsem::{interp_type, serialize_value, Fin};
use clonekit::profinite::{
    definability_search, family_of_tree, fixed_point_check, lift, naturality_check, parametric_to_tree,
    parametricity_check, restrict, CloneRoster, Definability, NaturalFamily, NaturalityOptions, ParametricFamily,
    ProfiniteTermApprox,
};
use clonekit::stlc::{parse_term, Term};
use clonekit::suite::{parse_alphabet, roster_named, run_suite, CheckRecord, Report, SuiteConfig, Verdict};

#[derive(Parser)]
#[command(name = "clonekit", version, about = "Clones, Church encodings and profinite trees, checked at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Seed for every sampled check.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Enumeration guard for semantic domains.
    #[arg(long, global = true)]
    guard: Option<u64>,
    /// Size bound for tree searches.
    #[arg(long, global = true)]
    bound: Option<usize>,
    /// Clone roster: `small` or `default`.
    #[arg(long, global = true)]
    roster: Option<String>,
    /// Writes the machine-readable report here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs check suites from a config file, or the defaults.
    Check {
        #[arg(value_enum)]
        which: Which,
        config: Option<PathBuf>,
    },
    /// Encodes trees as Church terms and decodes them back.
    #[command(subcommand)]
    Church(ChurchCmd),
    /// Families of operations over the clone roster.
    #[command(subcommand)]
    Profinite(ProfiniteCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    All,
    CloneLaws,
    Church,
    Semantics,
    Profinite,
    Signatures,
}

impl Which {
    fn suites(self) -> &'static [&'static str] {
        match self {
            Which::All => &clonekit::suite::SUITE_NAMES,
            Which::CloneLaws => &["clone-laws"],
            Which::Church => &["church-roundtrip"],
            Which::Semantics => &["fundamental-lemma"],
            Which::Profinite => &["naturality", "iso-roundtrip", "fixed-point", "parametricity"],
            Which::Signatures => &["signatures"],
        }
    }
}

#[derive(Args, Clone)]
struct AlphabetArgs {
    /// A ranked alphabet: a file, or inline arities such as `[0,1]`.
    #[arg(long)]
    alphabet: String,
    /// Number of variables.
    #[arg(long, default_value_t = 1)]
    vars: usize,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[command(flatten)]
    alpha: AlphabetArgs,
    /// A tree such as `(a2 (a1 x1))`.
    #[arg(long, conflicts_with = "term", required_unless_present = "term")]
    tree: Option<String>,
    /// A closed term of the Church type.
    #[arg(long)]
    term: Option<String>,
}

#[derive(Subcommand)]
enum ChurchCmd {
    /// Prints the Church encoding of a tree.
    Encode {
        #[command(flatten)]
        alpha: AlphabetArgs,
        #[arg(long)]
        tree: String,
    },
    /// Reads a tree back from a term of the Church type.
    Decode {
        #[command(flatten)]
        alpha: AlphabetArgs,
        #[arg(long)]
        term: String,
    },
}

#[derive(Subcommand)]
enum ProfiniteCmd {
    /// Tabulates the natural family of a tree on the roster.
    FamilyOfTree(FamilyArgs),
    /// Checks naturality of a family.
    CheckNatural(FamilyArgs),
    /// Searches for the least tree defining a family.
    SearchDef(FamilyArgs),
    /// Restricts a family to its profinite term components.
    Restrict(FamilyArgs),
    /// Lifts the components back to a natural family and compares.
    Lift(FamilyArgs),
    /// Checks the relational parametricity of a family.
    CheckParametric(FamilyArgs),
    /// Checks the fixed-point equation at one base set.
    CheckFixedPoint {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 2)]
        q: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            print!("{}", report.to_text());
            if let Some(path) = &cli.global.out {
                if let Err(e) = std::fs::write(path, report.to_json()) {
                    eprintln!("error: cannot write {}: {}", path.display(), e);
                    return ExitCode::from(2);
                }
            }
            if report.verdict == Verdict::Pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn base_config(g: &Global, path: Option<&Path>) -> Result<SuiteConfig> {
    let mut c = match path {
        Some(p) => SuiteConfig::load(p)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(x) = g.guard {
        c.guard = x;
    }
    if let Some(r) = &g.roster {
        c.roster = r.clone();
    }
    if let Some(b) = g.bound {
        c.naturality.search_bound = b;
        c.parametricity.search_bound = b;
    }
    Ok(c)
}

fn execute(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    match &cli.command {
        Command::Check { which, config } => {
            let c = base_config(g, config.as_deref())?.with_suites(which.suites());
            Ok(run_suite(&c)?)
        }
        Command::Church(cmd) => {
            let c = base_config(g, None)?.with_suites(&["church"]);
            let roster = CloneRoster::new();
            let rec = match cmd {
                ChurchCmd::Encode { alpha, tree } => church_encode(alpha, tree)?,
                ChurchCmd::Decode { alpha, term } => church_decode(alpha, term)?,
            };
            Ok(Report::assemble(&c, &roster, vec![rec], Vec::new()))
        }
        Command::Profinite(cmd) => {
            let c = base_config(g, None)?.with_suites(&["profinite"]);
            let roster = roster_named(&c.roster).ok_or_else(|| anyhow!("unknown roster `{}`", c.roster))?;
            let bound = g.bound.unwrap_or(c.naturality.search_bound);
            let rec = profinite(cmd, &roster, c.guard, c.seed, bound)?;
            Ok(Report::assemble(&c, &roster, vec![rec], Vec::new()))
        }
    }
}

fn read_alphabet(arg: &str) -> Result<RankedAlphabet> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    } else {
        arg.to_string()
    };
    parse_alphabet(&text).map_err(|e| anyhow!("alphabet `{}`: {}", arg, e))
}

fn church_encode(a: &AlphabetArgs, tree: &str) -> Result<CheckRecord> {
    let alpha = read_alphabet(&a.alphabet)?;
    let t = parse_tree(tree)?;
    let ctx = ChurchContext::new(&alpha, a.vars);
    let m = ctx.encode(&t)?;
    let back = ctx.decode(&m)?;
    let rec = CheckRecord::new("church", "encode", "decode inverts encode", format!("{} over {}", t, alpha))
        .tested(1)
        .note(format!("{} : {}", m, ctx.church_type()));
    Ok(if back == t { rec } else { rec.fail(format!("decodes to {}", back)) })
}

fn church_decode(a: &AlphabetArgs, term: &str) -> Result<CheckRecord> {
    let alpha = read_alphabet(&a.alphabet)?;
    let m = parse_term(term)?;
    let ctx = ChurchContext::new(&alpha, a.vars);
    let t = ctx.decode(&m)?;
    let rec = CheckRecord::new("church", "decode", "decode inverts encode", format!("{} over {}", m, alpha))
        .tested(1)
        .note(t.to_string());
    let again = ctx.decode(&ctx.encode(&t)?)?;
    Ok(if again == t { rec } else { rec.fail(format!("re-encoding decodes to {}", again)) })
}

/// A family given by a tree or by a closed term.
struct Input {
    alpha: RankedAlphabet,
    n: usize,
    tree: Option<Tree>,
    term: Term,
    label: String,
}

impl Input {
    fn read(f: &FamilyArgs) -> Result<Input> {
        let alpha = read_alphabet(&f.alpha.alphabet)?;
        let n = f.alpha.vars;
        let ctx = ChurchContext::new(&alpha, n);
        match (&f.tree, &f.term) {
            (Some(src), _) => {
                let t = parse_tree(src)?;
                t.validate(&alpha, n)?;
                Ok(Input { term: ctx.encode(&t)?, label: t.to_string(), tree: Some(t), alpha, n })
            }
            (None, Some(src)) => {
                let m = parse_term(src)?;
                Ok(Input { label: m.to_string(), term: m, tree: None, alpha, n })
            }
            (None, None) => bail!("give --tree or --term"),
        }
    }

    fn approx(&self, roster: &CloneRoster, guard: u64) -> Result<ProfiniteTermApprox> {
        Ok(ProfiniteTermApprox::from_term(&self.alpha, self.n, &self.term, &roster.endo_sizes(), guard)?)
    }

    fn family(&self, roster: &CloneRoster, guard: u64) -> Result<NaturalFamily> {
        Ok(match &self.tree {
            Some(t) => family_of_tree(&self.alpha, self.n, t, roster)?,
            None => lift(&self.approx(roster, guard)?, roster)?,
        })
    }

    fn parametric(&self, sizes: Vec<usize>) -> Result<ParametricFamily> {
        let mut rho = ParametricFamily::from_term(&self.term, sizes)?;
        rho.label = self.label.clone();
        Ok(rho)
    }
}

const SUITE: &str = "profinite";

fn profinite(cmd: &ProfiniteCmd, roster: &CloneRoster, guard: u64, seed: u64, bound: usize) -> Result<CheckRecord> {
    let args = match cmd {
        ProfiniteCmd::FamilyOfTree(a)
        | ProfiniteCmd::CheckNatural(a)
        | ProfiniteCmd::SearchDef(a)
        | ProfiniteCmd::Restrict(a)
        | ProfiniteCmd::Lift(a)
        | ProfiniteCmd::CheckParametric(a) => a,
        ProfiniteCmd::CheckFixedPoint { family, .. } => family,
    };
    let inp = Input::read(args)?;
    let inputs = format!("{} over {} with {} variables", inp.label, inp.alpha, inp.n);
    Ok(match cmd {
        ProfiniteCmd::FamilyOfTree(_) => {
            let t = inp.tree.as_ref().ok_or_else(|| anyhow!("family-of-tree needs --tree"))?;
            let u = family_of_tree(&inp.alpha, inp.n, t, roster)?;
            let sizes: Vec<String> = roster
                .members()
                .iter()
                .zip(&u.tables)
                .map(|(m, tab)| format!("{}: {} morphisms", m.name, tab.len()))
                .collect();
            CheckRecord::new(SUITE, "family-of-tree", "a tree defines a family on every clone", inputs)
                .tested(u.tables.iter().map(|t| t.len() as u64).sum())
                .note(sizes.join("; "))
        }
        ProfiniteCmd::CheckNatural(_) => {
            let u = inp.family(roster, guard)?;
            let rep = naturality_check(&u, &NaturalityOptions { seed, ..NaturalityOptions::default() })?;
            let rec = CheckRecord::new(SUITE, "check-natural", "families commute with clone morphisms", inputs)
                .tested(rep.checks.iter().map(|c| c.tested).sum());
            let rec = if rep.checks.iter().all(|c| c.exhaustive) { rec } else { rec.sampled() };
            rec.expect_none(rep.checks.iter().find_map(|c| {
                c.failure.as_ref().map(|f| format!("{} from {} to {}: {}", c.morphism, c.source, c.target, f))
            }))
        }
        ProfiniteCmd::SearchDef(_) => {
            let u = inp.family(roster, guard)?;
            let rec = CheckRecord::new(SUITE, "search-def", "natural families are definable by trees", inputs);
            match definability_search(&u, bound)? {
                Definability::Defined(t) => rec.tested(1).note(format!("defined by {}", t)),
                Definability::Inconclusive(b) => rec.inconclusive(format!("no tree of size <= {}", b)),
            }
        }
        ProfiniteCmd::Restrict(_) => {
            let u = inp.family(roster, guard)?;
            let theta = restrict(&u, guard)?;
            let mut notes = Vec::new();
            for (q, v) in &theta.components {
                let dom = interp_type(&ChurchContext::new(&inp.alpha, inp.n).church_type(), Fin(*q), guard);
                let s = serialize_value(&dom, v);
                notes.push(match s.index {
                    Some(i) => format!("Q = {}: index {}", q, i),
                    None => format!("Q = {}: {} points observed", q, s.intensional.map_or(0, |g| g.len())),
                });
            }
            let rec = CheckRecord::new(SUITE, "restrict", "restriction recovers the encoding", inputs)
                .tested(theta.components.len() as u64)
                .note(notes.join("; "));
            if theta.same_components(&inp.approx(roster, guard)?)? {
                rec
            } else {
                rec.fail("components differ from the denotation of the term")
            }
        }
        ProfiniteCmd::Lift(_) => {
            let u = inp.family(roster, guard)?;
            let back = lift(&restrict(&u, guard)?.with_witness_rule(bound)?, roster)?;
            let rec = CheckRecord::new(SUITE, "lift", "lift inverts restrict", inputs)
                .tested(u.tables.iter().map(|t| t.len() as u64).sum());
            if back.same_tables(&u)? {
                rec
            } else {
                rec.fail("lift(restrict(u)) differs from u")
            }
        }
        ProfiniteCmd::CheckParametric(_) => {
            let sizes: Vec<usize> = vec![1, 2, 3];
            let rho = inp.parametric(sizes)?;
            let rep = parametricity_check(&rho, guard)?;
            let rec = CheckRecord::new(SUITE, "check-parametric", "parametric families respect relations", inputs)
                .tested(rep.pairs.iter().map(|p| p.relations).sum());
            let rec = rec.expect_none(
                rep.pairs.iter().find_map(|p| p.failure.as_ref().map(|f| format!("{} x {}: {}", p.left, p.right, f))),
            );
            if rec.verdict != Verdict::Pass {
                return Ok(rec);
            }
            match parametric_to_tree(&rho, &inp.alpha, inp.n, bound, guard)? {
                Definability::Defined(t) => rec.note(format!("defined by {}", t)),
                Definability::Inconclusive(b) => rec.note(format!("no defining tree of size <= {}", b)),
            }
        }
        ProfiniteCmd::CheckFixedPoint { q, .. } => {
            let rho = inp.parametric(vec![*q])?;
            let rep = fixed_point_check(&rho, &inp.alpha, *q, guard)?;
            let rec = CheckRecord::new(SUITE, "check-fixed-point", "parametric families satisfy the fixed-point equation", inputs)
                .tested(1)
                .note(format!("Q = {}, Q* = {}", rep.q, rep.q_star));
            match rep.witness {
                Some(w) => rec.fail(w),
                None if rep.passed => rec,
                None => rec.fail("sides differ"),
            }
        }
    })
}
