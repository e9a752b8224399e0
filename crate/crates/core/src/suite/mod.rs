//! The batch checker: named suites run from a TOML config, assembled into a
//! report whose machine-readable form depends only on the config and seed.

mod checks;
mod config;

pub use config::{
    parse_alphabet, AlphabetSpec, ChurchConfig, CloneLawsConfig, ConfigError, FixedPointConfig, IsoConfig,
    NaturalityConfig, ParametricityConfig, Resolved, SemanticsConfig, SignaturesConfig, SuiteConfig, SUITE_NAMES,
};

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::profinite::CloneRoster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Fail => "fail",
        }
    }
}

/// One check with its inputs, and a counterexample when it fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    /// The property being checked.
    pub anchor: String,
    pub inputs: String,
    pub verdict: Verdict,
    pub tested: u64,
    pub exhaustive: bool,
    pub witness: Option<String>,
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(suite: &str, name: impl Into<String>, anchor: &str, inputs: impl Into<String>) -> CheckRecord {
        CheckRecord {
            suite: suite.into(),
            name: name.into(),
            anchor: anchor.into(),
            inputs: inputs.into(),
            verdict: Verdict::Pass,
            tested: 0,
            exhaustive: true,
            witness: None,
            note: None,
        }
    }

    pub fn tested(mut self, n: u64) -> Self {
        self.tested = n;
        self
    }

    pub fn sampled(mut self) -> Self {
        self.exhaustive = false;
        self
    }

    pub fn fail(mut self, witness: impl Into<String>) -> Self {
        self.verdict = Verdict::Fail;
        self.witness = Some(witness.into());
        self
    }

    pub fn inconclusive(mut self, why: impl Into<String>) -> Self {
        self.verdict = self.verdict.max(Verdict::Inconclusive);
        self.note = Some(why.into());
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Fails with the first witness, if any.
    pub fn expect_none(self, witness: Option<String>) -> Self {
        match witness {
            Some(w) => self.fail(w),
            None => self,
        }
    }
}

/// The outcome of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub verdict: Verdict,
    pub seed: u64,
    pub guard: u64,
    pub suites: Vec<String>,
    pub roster: Vec<String>,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub records: Vec<CheckRecord>,
    pub config: SuiteConfig,
    /// Wall-clock time per suite; left out of the machine-readable form.
    #[serde(skip)]
    pub timings: Vec<(String, Duration)>,
}

impl Report {
    /// Collects records into a report; the config is echoed for its seed,
    /// guard and roster.
    pub fn assemble(config: &SuiteConfig, roster: &CloneRoster, mut records: Vec<CheckRecord>, timings: Vec<(String, Duration)>) -> Report {
        records.sort_by(|a, b| (&a.suite, &a.name).cmp(&(&b.suite, &b.name)));
        let count = |v| records.iter().filter(|r| r.verdict == v).count();
        let verdict = records.iter().map(|r| r.verdict).max().unwrap_or(Verdict::Pass);
        Report {
            verdict,
            seed: config.seed,
            guard: config.guard,
            suites: config.suites.clone(),
            roster: roster.describe(),
            passed: count(Verdict::Pass),
            failed: count(Verdict::Fail),
            inconclusive: count(Verdict::Inconclusive),
            records: records.clone(),
            config: config.clone(),
            timings,
        }
    }

    /// Pretty JSON, stable for a fixed config and seed.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn records_of(&self, suite: &str) -> impl Iterator<Item = &CheckRecord> {
        let suite = suite.to_string();
        self.records.iter().filter(move |r| r.suite == suite)
    }

    /// A human-readable summary, including timings.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict: {}", self.verdict.as_str());
        let _ = writeln!(s, "seed: {}  guard: {}", self.seed, self.guard);
        let _ = writeln!(s, "roster: {}", self.roster.join(", "));
        for suite in &self.suites {
            let t = self.timings.iter().find(|(n, _)| n == suite).map(|(_, d)| d.as_secs_f64()).unwrap_or(0.0);
            let _ = writeln!(s, "\n[{}] ({:.2}s)", suite, t);
            for r in self.records_of(suite) {
                let scope = if r.exhaustive { "exhaustive" } else { "sampled" };
                let _ = writeln!(s, "  {:<12} {} ({} tested, {})", r.verdict.as_str(), r.name, r.tested, scope);
                if let Some(w) = &r.witness {
                    let _ = writeln!(s, "    witness: {}", w);
                }
                if let Some(n) = &r.note {
                    let _ = writeln!(s, "    note: {}", n);
                }
            }
        }
        let _ = writeln!(s, "\n{} passed, {} failed, {} inconclusive", self.passed, self.failed, self.inconclusive);
        s
    }
}

pub fn roster_named(name: &str) -> Option<CloneRoster> {
    match name {
        "small" => Some(CloneRoster::small()),
        "default" => Some(CloneRoster::default_roster()),
        _ => None,
    }
}

/// Runs the configured suites in canonical order.
pub fn run_suite(config: &SuiteConfig) -> Result<Report, ConfigError> {
    config.validate()?;
    let resolved = config.resolve()?;
    let roster = roster_named(&config.roster).expect("validated roster name");
    let mut records = Vec::new();
    let mut timings = Vec::new();
    for name in SUITE_NAMES {
        if !config.suites.iter().any(|s| s == name) {
            continue;
        }
        let start = Instant::now();
        records.extend(checks::run_named(name, config, &resolved, &roster));
        timings.push((name.to_string(), start.elapsed()));
    }
    Ok(Report::assemble(config, &roster, records, timings))
}

pub fn run_config(path: &Path) -> Result<Report, ConfigError> {
    run_suite(&SuiteConfig::load(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SuiteConfig {
        let mut c = SuiteConfig::default();
        c.clone_laws.alphabets.truncate(1);
        c.clone_laws.tree_size = 3;
        c.clone_laws.free_arity = 2;
        c.church.roundtrip_size = 4;
        c.church.subst_size = 3;
        c.church.coherence_size = 3;
        c.semantics.tree_size = 3;
        c.naturality.tree_size = 3;
        c.naturality.unique_size = 3;
        c.iso.tree_size = 3;
        c.iso.retraction_arity = 1;
        c.fixed_point.tree_size = 2;
        c.parametricity.tree_size = 3;
        c.signatures.iteration_depth = 4;
        c
    }

    #[test]
    fn quick_run_passes_and_is_stable() {
        let c = quick();
        let a = run_suite(&c).unwrap();
        assert_eq!(a.verdict, Verdict::Pass, "{}", a.to_text());
        let b = run_suite(&c).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let mut sorted = a.records.clone();
        sorted.sort_by(|x, y| (&x.suite, &x.name).cmp(&(&y.suite, &y.name)));
        assert_eq!(sorted, a.records);
    }

    #[test]
    fn injected_mutations_fail_with_counterexamples() {
        let c = SuiteConfig { inject_mutations: true, ..quick() }.with_suites(&["clone-laws", "signatures"]);
        let r = run_suite(&c).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let failed: Vec<&CheckRecord> = r.records.iter().filter(|x| x.verdict == Verdict::Fail).collect();
        assert!(failed.len() >= 4);
        assert!(failed.iter().all(|x| x.witness.is_some() && x.name.contains("mutant")));
    }

    #[test]
    fn verdict_is_the_worst_record() {
        let c = SuiteConfig::default();
        let recs = vec![
            CheckRecord::new("b", "x", "", ""),
            CheckRecord::new("a", "y", "", "").inconclusive("guard"),
        ];
        let r = Report::assemble(&c, &CloneRoster::small(), recs, Vec::new());
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.records[0].suite, "a");
        assert!(!r.to_json().contains("timings"));
    }
}
