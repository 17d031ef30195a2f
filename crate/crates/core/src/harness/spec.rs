//! Experiment specification: one JSON document per sweep.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graphs::FamilyTag;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub graph: GraphSpec,
    #[serde(default)]
    pub process: Process,
    #[serde(default)]
    pub tie_rule: TieRuleKind,
    #[serde(default)]
    pub balls: Balls,
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Family plus whatever parameters it needs; `n` comes from `n_values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub family: String,
    /// Degree for random-regular, clique-cycle and tree-regular.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    /// Lattice dimension for grids (`n = side^dim`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Fixed edge probability for Erdős–Rényi graphs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Erdős–Rényi edge probability as a multiple of `ln n / n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_scale: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Process {
    #[default]
    LocalSearch,
    OneChoice,
    DChoice(usize),
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::LocalSearch => f.write_str("local-search"),
            Process::OneChoice => f.write_str("one-choice"),
            Process::DChoice(d) => write!(f, "d-choice({d})"),
        }
    }
}

impl FromStr for Process {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "local-search" => Ok(Process::LocalSearch),
            "one-choice" => Ok(Process::OneChoice),
            _ => s
                .strip_prefix("d-choice(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|d| d.parse().ok())
                .filter(|&d| d >= 1)
                .map(Process::DChoice)
                .ok_or_else(|| {
                    format!("unknown process `{s}` (expected local-search, one-choice or d-choice(<d>))")
                }),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieRuleKind {
    #[default]
    Uniform,
    FixedPermutation,
    TowardRoot,
}

impl TieRuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TieRuleKind::Uniform => "uniform",
            TieRuleKind::FixedPermutation => "fixed-permutation",
            TieRuleKind::TowardRoot => "toward-root",
        }
    }
}

impl fmt::Display for TieRuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TieRuleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" => Ok(TieRuleKind::Uniform),
            "fixed-permutation" => Ok(TieRuleKind::FixedPermutation),
            "toward-root" => Ok(TieRuleKind::TowardRoot),
            _ => Err(format!(
                "unknown tie rule `{s}` (expected uniform, fixed-permutation or toward-root)"
            )),
        }
    }
}

/// Number of balls per cell: either `"n"` or a fixed count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Balls {
    #[default]
    N,
    Count(u64),
}

impl Balls {
    pub fn resolve(self, n: usize) -> u64 {
        match self {
            Balls::N => n as u64,
            Balls::Count(m) => m,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    Smoothness,
    Lipschitz,
    Removal,
    Majorization,
    Certificates,
    Tail,
    Probes,
    BirthEvent,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Smoothness,
        Check::Lipschitz,
        Check::Removal,
        Check::Majorization,
        Check::Certificates,
        Check::Tail,
        Check::Probes,
        Check::BirthEvent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Check::Smoothness => "smoothness",
            Check::Lipschitz => "lipschitz",
            Check::Removal => "removal",
            Check::Majorization => "majorization",
            Check::Certificates => "certificates",
            Check::Tail => "tail",
            Check::Probes => "probes",
            Check::BirthEvent => "birth-event",
        }
    }

    /// Statistical checks only raise flags; they never fail a suite.
    pub fn is_soft(self) -> bool {
        matches!(self, Check::Tail | Check::BirthEvent)
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Check::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

macro_rules! string_serde {
    ($($t:ty),*) => {$(
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
            }
        }
    )*};
}

string_serde!(Process, TieRuleKind);

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

string_serde!(Check);

impl Serialize for Balls {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Balls::N => s.serialize_str("n"),
            Balls::Count(m) => s.serialize_u64(*m),
        }
    }
}

impl<'de> Deserialize<'de> for Balls {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(m) => Ok(Balls::Count(m)),
            Raw::Text(t) if t == "n" => Ok(Balls::N),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "balls must be a count or \"n\", got \"{t}\""
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub count: usize,
    #[serde(default)]
    pub base: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { count: 1, base: 0 }
    }
}

/// Sample sizes for the coupling and certificate suites, per cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    pub lipschitz_trials: usize,
    /// Removed-ball indices to try; every index when at least the ball count.
    pub removal_trials: usize,
    pub upper_bound_samples: usize,
    pub max_radius: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            lipschitz_trials: 20,
            removal_trials: 20,
            upper_bound_samples: 100,
            max_radius: 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format `{s}` (expected csv, json or svg)")),
        }
    }
}

string_serde!(Format);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// File stem; files are `<stem>.csv` and so on.
    pub name: String,
    pub formats: Vec<Format>,
    /// Record wall-clock time per cell. Off by default so that output files
    /// only depend on the spec.
    pub timing: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            name: "sweep".into(),
            formats: vec![Format::Csv],
            timing: false,
        }
    }
}

/// Graph family and its fully resolved parameters for one `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphParams {
    Cycle { n: usize },
    Grid { side: usize, dim: usize },
    Hypercube { dim: usize },
    RandomRegular { n: usize, d: usize },
    ErdosRenyi { n: usize, p: f64 },
    TreeRegular { d: usize, depth: usize },
    CliqueCycle { n: usize, d: usize },
}

impl GraphParams {
    /// Whether the graph depends on the cell seed.
    pub fn is_random(&self) -> bool {
        matches!(self, GraphParams::RandomRegular { .. } | GraphParams::ErdosRenyi { .. })
    }
}

/// Vertex count of the regular tree graph of degree `d` and depth `k`.
pub fn tree_size(d: usize, k: usize) -> Option<usize> {
    let mut total: usize = 1;
    let mut level: usize = d;
    for _ in 0..k {
        total = total.checked_add(level)?;
        level = level.checked_mul(d - 1)?;
    }
    Some(total)
}

fn integer_root(n: usize, dim: usize) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / dim as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&s| s.checked_pow(dim as u32) == Some(n))
}

impl GraphSpec {
    pub fn family_tag(&self) -> Result<FamilyTag> {
        match FamilyTag::parse(&self.family) {
            Some(FamilyTag::Custom) | None => Err(Error::validation(
                "graph.family",
                format!(
                    "unknown family `{}` (expected cycle, grid, hypercube, random-regular, erdos-renyi, tree-regular or clique-cycle)",
                    self.family
                ),
            )),
            Some(tag) => Ok(tag),
        }
    }

    fn degree(&self, min: usize) -> Result<usize> {
        let d = self
            .degree
            .ok_or_else(|| Error::validation("graph.degree", format!("required for {}", self.family)))?;
        if d < min {
            return Err(Error::validation("graph.degree", format!("must be >= {min}, got {d}")));
        }
        Ok(d)
    }

    fn forbid(&self, used: &[&str]) -> Result<()> {
        let set = [
            ("degree", self.degree.is_some()),
            ("dim", self.dim.is_some()),
            ("p", self.p.is_some()),
            ("p_scale", self.p_scale.is_some()),
        ];
        for (name, present) in set {
            if present && !used.contains(&name) {
                return Err(Error::validation(
                    format!("graph.{name}"),
                    format!("not a parameter of {}", self.family),
                ));
            }
        }
        Ok(())
    }

    /// Checks the family's constructor preconditions for `n` and resolves
    /// the parameters.
    pub fn resolve(&self, n: usize) -> Result<GraphParams> {
        let field = "n_values";
        let bad = |msg: String| Err(Error::validation(field, msg));
        match self.family_tag()? {
            FamilyTag::Cycle => {
                self.forbid(&[])?;
                if n < 3 {
                    return bad(format!("cycle needs n >= 3, got {n}"));
                }
                Ok(GraphParams::Cycle { n })
            }
            FamilyTag::Grid => {
                self.forbid(&["dim"])?;
                let dim = self.dim.unwrap_or(2);
                if dim == 0 {
                    return Err(Error::validation("graph.dim", "must be >= 1"));
                }
                let Some(side) = integer_root(n, dim) else {
                    return bad(format!("n={n} is not a perfect power side^{dim}"));
                };
                if side < 3 {
                    return bad(format!("grid side must be >= 3, got side={side} for n={n}"));
                }
                Ok(GraphParams::Grid { side, dim })
            }
            FamilyTag::Hypercube => {
                self.forbid(&[])?;
                if !n.is_power_of_two() || !(2..=1 << 30).contains(&n) {
                    return bad(format!("hypercube needs n = 2^dim with 1 <= dim <= 30, got {n}"));
                }
                Ok(GraphParams::Hypercube { dim: n.trailing_zeros() as usize })
            }
            FamilyTag::RandomRegular => {
                self.forbid(&["degree"])?;
                let d = self.degree(3)?;
                if d >= n {
                    return bad(format!("random-regular needs d < n, got d={d}, n={n}"));
                }
                if !(n * d).is_multiple_of(2) {
                    return bad(format!("n*d must be even, got n={n}, d={d}"));
                }
                Ok(GraphParams::RandomRegular { n, d })
            }
            FamilyTag::ErdosRenyi => {
                self.forbid(&["p", "p_scale"])?;
                if n < 2 {
                    return bad(format!("erdos-renyi needs n >= 2, got {n}"));
                }
                let p = match (self.p, self.p_scale) {
                    (Some(p), None) => p,
                    (None, Some(c)) => c * (n as f64).ln() / n as f64,
                    _ => {
                        return Err(Error::validation("graph.p", "give exactly one of p and p_scale"))
                    }
                };
                if !(p > 0.0 && p < 1.0) {
                    return bad(format!("edge probability {p} for n={n} outside (0, 1)"));
                }
                Ok(GraphParams::ErdosRenyi { n, p })
            }
            FamilyTag::TreeRegular => {
                self.forbid(&["degree"])?;
                let d = self.degree(3)?;
                let Some(depth) = (1..64)
                    .map_while(|k| tree_size(d, k).map(|s| (k, s)))
                    .take_while(|&(_, s)| s <= n)
                    .find(|&(_, s)| s == n)
                    .map(|(k, _)| k)
                else {
                    return bad(format!("n={n} is not the size of a degree-{d} regular tree graph"));
                };
                let leaves = d * (d - 1).pow(depth as u32 - 1);
                if (d - 1) % 2 == 1 && leaves % 2 == 1 {
                    return bad(format!("odd leaf count {leaves} with odd d-1"));
                }
                Ok(GraphParams::TreeRegular { d, depth })
            }
            FamilyTag::CliqueCycle => {
                self.forbid(&["degree"])?;
                let d = self.degree(3)?;
                if !n.is_multiple_of(d - 1) {
                    return bad(format!("d-1={} does not divide n={n}", d - 1));
                }
                if n / (d - 1) < 3 {
                    return bad(format!("need at least 3 cliques, got {}", n / (d - 1)));
                }
                Ok(GraphParams::CliqueCycle { n, d })
            }
            FamilyTag::Custom => unreachable!("rejected by family_tag"),
        }
    }
}

impl ExperimentSpec {
    /// Every constructor precondition and cross-field rule, checked before
    /// anything runs.
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::validation("n_values", "must list at least one n"));
        }
        for &n in &self.n_values {
            self.graph.resolve(n)?;
        }
        if self.seeds.count == 0 {
            return Err(Error::validation("seeds.count", "must be >= 1"));
        }
        if self.seeds.base.checked_add(self.cell_count() as u64).is_none() {
            return Err(Error::validation("seeds.base", "base + cell index overflows u64"));
        }
        if let Process::DChoice(0) = self.process {
            return Err(Error::validation("process", "d-choice needs d >= 1"));
        }
        if self.process != Process::LocalSearch && self.tie_rule != TieRuleKind::Uniform {
            return Err(Error::validation("tie_rule", format!("{} has no tie rule", self.process)));
        }
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return Err(Error::validation("output.name", "must be a plain file stem"));
        }
        let mut seen = self.checks.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation("checks", "duplicate entry"));
        }
        if self.checks.contains(&Check::BirthEvent) && self.graph.family_tag()? != FamilyTag::Grid {
            return Err(Error::validation("checks", "birth-event only applies to grid graphs"));
        }
        if self.verify.max_radius == 0 {
            return Err(Error::validation("verify.max_radius", "must be >= 1"));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.n_values.len() * self.seeds.count
    }

    /// `(n index, seed index)` of a cell.
    pub fn cell_position(&self, cell: usize) -> (usize, usize) {
        (cell / self.seeds.count, cell % self.seeds.count)
    }

    pub fn cell_seed(&self, cell: usize) -> u64 {
        self.seeds.base + cell as u64
    }

    /// Parses and validates a spec from JSON text.
    pub fn from_json(text: &str) -> Result<ExperimentSpec> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Reads, parses and validates a spec file.
pub fn load_spec(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentSpec::from_json(&text)
}
