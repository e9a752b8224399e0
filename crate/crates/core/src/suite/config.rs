use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clone::RankedAlphabet;
use crate::DEFAULT_GUARD;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("config error at {location}: {message}")]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl ConfigError {
    fn at(location: impl Into<String>, message: impl Into<String>) -> ConfigError {
        ConfigError { location: location.into(), message: message.into() }
    }
}

/// An alphabet given inline as a list of arities, or as the path of a file
/// holding such a list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphabetSpec {
    Inline(Vec<usize>),
    File(PathBuf),
}

impl AlphabetSpec {
    fn resolve(&self, base: &Path, location: &str) -> Result<RankedAlphabet, ConfigError> {
        match self {
            AlphabetSpec::Inline(v) => Ok(RankedAlphabet::new(v.clone())),
            AlphabetSpec::File(p) => {
                let path = base.join(p);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| ConfigError::at(location, format!("cannot read alphabet file {}: {}", path.display(), e)))?;
                parse_alphabet(&text).map_err(|m| ConfigError::at(location, format!("{}: {}", path.display(), m)))
            }
        }
    }
}

/// Parses `[0, 1]`, `0,1` or `0 1`.
pub fn parse_alphabet(text: &str) -> Result<RankedAlphabet, String> {
    let body = text.trim().trim_start_matches('[').trim_end_matches(']');
    let arities = body
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|e| format!("bad arity {:?}: {}", s, e)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RankedAlphabet::new(arities))
}

fn corpus() -> Vec<AlphabetSpec> {
    vec![AlphabetSpec::Inline(vec![0, 1]), AlphabetSpec::Inline(vec![1, 1]), AlphabetSpec::Inline(vec![0, 2])]
}

fn inline(v: &[usize]) -> AlphabetSpec {
    AlphabetSpec::Inline(v.to_vec())
}

pub const SUITE_NAMES: [&str; 8] = [
    "clone-laws",
    "church-roundtrip",
    "fundamental-lemma",
    "naturality",
    "iso-roundtrip",
    "fixed-point",
    "parametricity",
    "signatures",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloneLawsConfig {
    pub alphabets: Vec<AlphabetSpec>,
    pub tree_size: usize,
    pub free_arity: usize,
    pub endo_sizes: Vec<usize>,
    pub endo_arity: usize,
    pub derived_arity: usize,
    pub samples: usize,
    pub exhaustive_limit: u64,
}

impl Default for CloneLawsConfig {
    fn default() -> Self {
        CloneLawsConfig {
            alphabets: corpus(),
            tree_size: 5,
            free_arity: 3,
            endo_sizes: vec![1, 2],
            endo_arity: 2,
            derived_arity: 2,
            samples: 2000,
            exhaustive_limit: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChurchConfig {
    pub alphabets: Vec<AlphabetSpec>,
    pub vars: Vec<usize>,
    pub roundtrip_size: usize,
    pub subst_size: usize,
    pub coherence_alphabet: AlphabetSpec,
    pub coherence_q: usize,
    pub coherence_size: usize,
}

impl Default for ChurchConfig {
    fn default() -> Self {
        ChurchConfig {
            alphabets: corpus(),
            vars: vec![0, 1, 2, 3],
            roundtrip_size: 8,
            subst_size: 4,
            coherence_alphabet: inline(&[1, 1]),
            coherence_q: 2,
            coherence_size: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticsConfig {
    pub alphabets: Vec<AlphabetSpec>,
    pub tree_size: usize,
    /// All relations between sets of these sizes.
    pub small_sizes: Vec<usize>,
    /// The mixed pair, with a seeded sample when it has more relations.
    pub mixed: (usize, usize),
    pub mixed_samples: usize,
}

impl Default for SemanticsConfig {
    fn default() -> Self {
        SemanticsConfig { alphabets: corpus(), tree_size: 5, small_sizes: vec![1, 2], mixed: (2, 3), mixed_samples: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NaturalityConfig {
    pub alphabet: AlphabetSpec,
    pub tree_size: usize,
    /// Trees up to this size must be recovered exactly.
    pub unique_size: usize,
    pub search_bound: usize,
}

impl Default for NaturalityConfig {
    fn default() -> Self {
        NaturalityConfig { alphabet: inline(&[1]), tree_size: 5, unique_size: 4, search_bound: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsoConfig {
    pub alphabet: AlphabetSpec,
    pub tree_size: usize,
    pub retraction_arity: usize,
}

impl Default for IsoConfig {
    fn default() -> Self {
        IsoConfig { alphabet: inline(&[0, 1]), tree_size: 4, retraction_arity: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointConfig {
    pub alphabet: AlphabetSpec,
    pub q: usize,
    pub tree_size: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig { alphabet: inline(&[0, 1]), q: 2, tree_size: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParametricityConfig {
    pub alphabet: AlphabetSpec,
    pub sizes: Vec<usize>,
    pub tree_size: usize,
    pub search_bound: usize,
}

impl Default for ParametricityConfig {
    fn default() -> Self {
        ParametricityConfig { alphabet: inline(&[0, 1]), sizes: vec![1, 2, 3], tree_size: 5, search_bound: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignaturesConfig {
    pub alphabets: Vec<AlphabetSpec>,
    pub iteration_depth: usize,
    /// Largest stage `free_iteration` may build.
    pub iteration_guard: u64,
    /// Largest stage also rebuilt by the independent height enumeration.
    pub oracle_limit: usize,
    pub arity_bound: usize,
    pub pair_bound: usize,
}

impl Default for SignaturesConfig {
    fn default() -> Self {
        SignaturesConfig {
            alphabets: corpus(),
            iteration_depth: 6,
            iteration_guard: 4_000_000,
            oracle_limit: 4_000_000,
            arity_bound: 3,
            pair_bound: 2,
        }
    }
}

/// Everything a run of the checker depends on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub guard: u64,
    pub suites: Vec<String>,
    /// Adds the corrupted structures as ordinary subjects, so the run fails.
    pub inject_mutations: bool,
    pub roster: String,
    pub clone_laws: CloneLawsConfig,
    pub church: ChurchConfig,
    pub semantics: SemanticsConfig,
    pub naturality: NaturalityConfig,
    pub iso: IsoConfig,
    pub fixed_point: FixedPointConfig,
    pub parametricity: ParametricityConfig,
    pub signatures: SignaturesConfig,
    /// Directory that relative alphabet paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            guard: DEFAULT_GUARD,
            suites: SUITE_NAMES.iter().map(|s| s.to_string()).collect(),
            inject_mutations: false,
            roster: "small".into(),
            clone_laws: CloneLawsConfig::default(),
            church: ChurchConfig::default(),
            semantics: SemanticsConfig::default(),
            naturality: NaturalityConfig::default(),
            iso: IsoConfig::default(),
            fixed_point: FixedPointConfig::default(),
            parametricity: ParametricityConfig::default(),
            signatures: SignaturesConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

/// Alphabets resolved from a config, keyed by their location in it.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub clone_laws: Vec<RankedAlphabet>,
    pub church: Vec<RankedAlphabet>,
    pub coherence: RankedAlphabet,
    pub semantics: Vec<RankedAlphabet>,
    pub naturality: RankedAlphabet,
    pub iso: RankedAlphabet,
    pub fixed_point: RankedAlphabet,
    pub parametricity: RankedAlphabet,
    pub signatures: Vec<RankedAlphabet>,
}

impl SuiteConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<SuiteConfig, ConfigError> {
        let mut c: SuiteConfig = toml::from_str(text).map_err(|e| {
            let loc = e.span().map(|s| line_col(text, s.start)).unwrap_or_else(|| "document".into());
            ConfigError::at(loc, e.message().to_string())
        })?;
        c.base_dir = base_dir.to_path_buf();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<SuiteConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::at(path.display().to_string(), format!("cannot read config: {}", e)))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        SuiteConfig::from_toml(&text, &base)
    }

    /// Only the named suites, in canonical order.
    pub fn with_suites(mut self, names: &[&str]) -> SuiteConfig {
        self.suites = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (i, s) in self.suites.iter().enumerate() {
            if !SUITE_NAMES.contains(&s.as_str()) {
                return Err(ConfigError::at(format!("suites[{}]", i), format!("unknown suite {:?}", s)));
            }
        }
        if !matches!(self.roster.as_str(), "small" | "default") {
            return Err(ConfigError::at("roster", format!("unknown roster {:?}, expected \"small\" or \"default\"", self.roster)));
        }
        self.resolve().map(|_| ())
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let b = &self.base_dir;
        let many = |v: &[AlphabetSpec], at: &str| {
            v.iter().enumerate().map(|(i, a)| a.resolve(b, &format!("{}[{}]", at, i))).collect::<Result<Vec<_>, _>>()
        };
        Ok(Resolved {
            clone_laws: many(&self.clone_laws.alphabets, "clone_laws.alphabets")?,
            church: many(&self.church.alphabets, "church.alphabets")?,
            coherence: self.church.coherence_alphabet.resolve(b, "church.coherence_alphabet")?,
            semantics: many(&self.semantics.alphabets, "semantics.alphabets")?,
            naturality: self.naturality.alphabet.resolve(b, "naturality.alphabet")?,
            iso: self.iso.alphabet.resolve(b, "iso.alphabet")?,
            fixed_point: self.fixed_point.alphabet.resolve(b, "fixed_point.alphabet")?,
            parametricity: self.parametricity.alphabet.resolve(b, "parametricity.alphabet")?,
            signatures: many(&self.signatures.alphabets, "signatures.alphabets")?,
        })
    }
}

fn line_col(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map(|s| s.chars().count()).unwrap_or(0) + 1;
    format!("line {}, column {}", line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c = SuiteConfig::from_toml("", Path::new(".")).unwrap();
        assert_eq!(c, SuiteConfig::default());
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let c = SuiteConfig::from_toml("seed = 7\n[church]\nroundtrip_size = 3\n", Path::new(".")).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.church.roundtrip_size, 3);
        assert_eq!(c.church.subst_size, 4);
    }

    #[test]
    fn missing_alphabet_file_is_located() {
        let e = SuiteConfig::from_toml("[church]\nalphabets = [[0, 1], \"no-such-file.txt\"]\n", Path::new("/nonexistent")).unwrap_err();
        assert_eq!(e.location, "church.alphabets[1]");
    }

    #[test]
    fn unknown_keys_report_a_line() {
        let e = SuiteConfig::from_toml("seed = 1\nsede = 2\n", Path::new(".")).unwrap_err();
        assert!(e.location.starts_with("line 2"), "{}", e);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        let e = SuiteConfig::from_toml("suites = [\"naturality\", \"nope\"]\n", Path::new(".")).unwrap_err();
        assert_eq!(e.location, "suites[1]");
    }

    #[test]
    fn alphabet_files_parse() {
        assert_eq!(parse_alphabet("[0, 2]\n").unwrap(), RankedAlphabet::new(vec![0, 2]));
        assert_eq!(parse_alphabet("1 1").unwrap(), RankedAlphabet::new(vec![1, 1]));
        assert!(parse_alphabet("[a]").is_err());
    }
}
