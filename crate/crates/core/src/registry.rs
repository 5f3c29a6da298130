//! Registry of regular primitive conjugacy classes.
//!
//! The on-disk format is line oriented; `docs/registry-format.md` has the grammar.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grading::normalize_g0;
use crate::lie::LieType;

/// Environment variable naming an alternate registry file.
pub const REGISTRY_ENV: &str = "DSFROB_REGISTRY";
pub const DEFAULT_MAX_RANK: usize = 8;
const BUILTIN: &str = include_str!("../data/registry.txt");
const JSON_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}, field {field:?}: {msg}")]
    Field {
        line: usize,
        field: String,
        msg: String,
    },
    #[error("duplicate class {0}")]
    Duplicate(String),
    #[error("no class {label:?} for {algebra}{rank}")]
    NotFound {
        algebra: LieType,
        rank: usize,
        label: String,
    },
    #[error("cannot read registry {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid JSON registry: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugacyClassRecord {
    #[serde(rename = "type")]
    pub algebra: LieType,
    pub rank: usize,
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    /// N_w
    pub order: i64,
    /// s_w = (s_0, ..., s_r)
    pub s: Vec<i64>,
    /// I(w), ascending
    pub exponents: Vec<i64>,
    /// Pr_w, ascending
    pub weights: Vec<i64>,
    pub g0: String,
}

impl ConjugacyClassRecord {
    pub fn key(&self) -> String {
        format!("{}{} {}", self.algebra, self.rank, self.label)
    }

    pub fn is_coxeter(&self) -> bool {
        self.s.iter().all(|&x| x == 1)
    }

    pub fn matches(&self, label: &str) -> bool {
        let want = squash(label);
        squash(&self.label) == want || self.aliases.iter().any(|a| squash(a) == want)
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace() && *c != '_').collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyRule {
    CoxeterA,
    CoxeterB,
    CoxeterC,
    CoxeterD,
    /// D_{2m}(a_{m−1})
    DEvenA,
}

impl FamilyRule {
    pub fn name(self) -> &'static str {
        match self {
            FamilyRule::CoxeterA => "coxeter-a",
            FamilyRule::CoxeterB => "coxeter-b",
            FamilyRule::CoxeterC => "coxeter-c",
            FamilyRule::CoxeterD => "coxeter-d",
            FamilyRule::DEvenA => "d-even-a",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            FamilyRule::CoxeterA,
            FamilyRule::CoxeterB,
            FamilyRule::CoxeterC,
            FamilyRule::CoxeterD,
            FamilyRule::DEvenA,
        ]
        .into_iter()
        .find(|r| r.name() == s)
    }

    /// The member of rank n, if the family has one.
    pub fn instantiate(self, n: usize) -> Option<ConjugacyClassRecord> {
        let ni = n as i64;
        let odd = |k: i64| (0..k).map(|i| 2 * i + 1).collect::<Vec<_>>();
        let coxeter = |algebra, order, exps: Vec<i64>| ConjugacyClassRecord {
            algebra,
            rank: n,
            label: format!("{algebra}{n}"),
            aliases: vec![],
            order,
            s: vec![1; n + 1],
            exponents: exps.clone(),
            weights: exps,
            g0: if n == 1 { "u1".into() } else { format!("u1^{n}") },
        };
        match self {
            FamilyRule::CoxeterA if n >= 1 => Some(coxeter(LieType::A, ni + 1, (1..=ni).collect())),
            FamilyRule::CoxeterB if n >= 2 => Some(coxeter(LieType::B, 2 * ni, odd(ni))),
            FamilyRule::CoxeterC if n >= 3 => Some(coxeter(LieType::C, 2 * ni, odd(ni))),
            FamilyRule::CoxeterD if n >= 4 => {
                let mut e = odd(ni - 1);
                e.push(ni - 1);
                e.sort();
                Some(coxeter(LieType::D, 2 * ni - 2, e))
            }
            FamilyRule::DEvenA if n >= 4 && n.is_multiple_of(2) => {
                let m = ni / 2;
                let mut s = vec![1];
                for _ in 0..m - 1 {
                    s.extend([1, 0]);
                }
                s.extend([1, 1]);
                let exponents: Vec<i64> = (0..m).flat_map(|k| [2 * k + 1, 2 * k + 1]).collect();
                let mut weights = Vec::new();
                for g in 1..m {
                    let o = 2 * g - 1;
                    weights.extend([o, o, o, o + 1]);
                }
                weights.extend([2 * m - 1, 2 * m - 1]);
                let su2 = if m == 2 {
                    "su2".to_string()
                } else {
                    format!("su2^{}", m - 1)
                };
                Some(ConjugacyClassRecord {
                    algebra: LieType::D,
                    rank: n,
                    label: format!("D{n}(a{})", m - 1),
                    aliases: vec![format!("D{n}(b{})", m - 1)],
                    order: 2 * m,
                    s,
                    exponents,
                    weights,
                    g0: format!("u1^{} + {su2}", m + 1),
                })
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyTemplate {
    pub rule: FamilyRule,
    pub min_rank: usize,
    pub max_rank: usize,
}

impl FamilyTemplate {
    pub fn expand(&self, bound: usize) -> Vec<ConjugacyClassRecord> {
        (self.min_rank..=self.max_rank.min(bound))
            .filter_map(|n| self.rule.instantiate(n))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Class(ConjugacyClassRecord),
    Family(FamilyTemplate),
}

#[derive(Clone, Debug, Default)]
pub struct Registry {
    entries: Vec<Entry>,
    records: Vec<ConjugacyClassRecord>,
}

const CLASS_KEYS: [&str; 9] = [
    "type", "rank", "label", "aliases", "order", "s", "exponents", "weights", "g0",
];
const FAMILY_KEYS: [&str; 2] = ["rule", "ranks"];

struct Stanza {
    kind: &'static str,
    line: usize,
    fields: Vec<(String, String, usize)>,
}

fn split_stanzas(text: &str) -> Result<Vec<Stanza>, RegistryError> {
    let mut out: Vec<Stanza> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t.starts_with('[') {
            let kind = match t {
                "[class]" => "class",
                "[family]" => "family",
                _ => {
                    return Err(RegistryError::Parse {
                        line,
                        msg: format!("unknown stanza header {t}"),
                    })
                }
            };
            out.push(Stanza {
                kind,
                line,
                fields: vec![],
            });
            continue;
        }
        let Some((k, v)) = t.split_once('=') else {
            return Err(RegistryError::Parse {
                line,
                msg: format!("expected key = value, got {t:?}"),
            });
        };
        let Some(st) = out.last_mut() else {
            return Err(RegistryError::Parse {
                line,
                msg: "field before the first stanza header".into(),
            });
        };
        let key = k.trim().to_string();
        let allowed: &[&str] = if st.kind == "class" { &CLASS_KEYS } else { &FAMILY_KEYS };
        if !allowed.contains(&key.as_str()) {
            return Err(RegistryError::Field {
                line,
                field: key,
                msg: format!("not a {} field", st.kind),
            });
        }
        if st.fields.iter().any(|(f, _, _)| *f == key) {
            return Err(RegistryError::Field {
                line,
                field: key,
                msg: "repeated field".into(),
            });
        }
        let value = v.split_whitespace().collect::<Vec<_>>().join(" ");
        st.fields.push((key, value, line));
    }
    Ok(out)
}

fn field<'a>(st: &'a Stanza, key: &str) -> Result<(&'a str, usize), RegistryError> {
    st.fields
        .iter()
        .find(|(k, _, _)| k == key)
        .map(|(_, v, l)| (v.as_str(), *l))
        .ok_or_else(|| RegistryError::Field {
            line: st.line,
            field: key.into(),
            msg: "missing".into(),
        })
}

fn bad(line: usize, key: &str, msg: impl Into<String>) -> RegistryError {
    RegistryError::Field {
        line,
        field: key.into(),
        msg: msg.into(),
    }
}

fn int_list(st: &Stanza, key: &str) -> Result<Vec<i64>, RegistryError> {
    let (v, line) = field(st, key)?;
    v.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| bad(line, key, format!("{t:?} is not an integer"))))
        .collect()
}

fn parse_class(st: &Stanza) -> Result<ConjugacyClassRecord, RegistryError> {
    let (t, line) = field(st, "type")?;
    let algebra: LieType = t.parse().map_err(|_| bad(line, "type", format!("unknown type {t:?}")))?;
    let (r, line) = field(st, "rank")?;
    let rank: usize = r.parse().map_err(|_| bad(line, "rank", format!("{r:?} is not a rank")))?;
    let (label, line) = field(st, "label")?;
    if label.is_empty() {
        return Err(bad(line, "label", "empty"));
    }
    let aliases = field(st, "aliases")
        .map(|(v, _)| v.split_whitespace().map(String::from).collect())
        .unwrap_or_default();
    let (o, line) = field(st, "order")?;
    let order: i64 = o.parse().map_err(|_| bad(line, "order", format!("{o:?} is not an integer")))?;
    let s = int_list(st, "s")?;
    let exponents = int_list(st, "exponents")?;
    let weights = int_list(st, "weights")?;
    let (g0, _) = field(st, "g0")?;
    let s_line = field(st, "s")?.1;
    if s.len() != rank + 1 {
        return Err(bad(s_line, "s", format!("expected {} entries, got {}", rank + 1, s.len())));
    }
    let e_line = field(st, "exponents")?.1;
    if exponents.len() != rank {
        return Err(bad(e_line, "exponents", format!("expected {rank} entries, got {}", exponents.len())));
    }
    Ok(ConjugacyClassRecord {
        algebra,
        rank,
        label: label.into(),
        aliases,
        order,
        s,
        exponents,
        weights,
        g0: normalize_g0(g0),
    })
}

fn parse_family(st: &Stanza) -> Result<FamilyTemplate, RegistryError> {
    let (r, line) = field(st, "rule")?;
    let rule = FamilyRule::parse(r).ok_or_else(|| bad(line, "rule", format!("unknown rule {r:?}")))?;
    let (ranks, line) = field(st, "ranks")?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| bad(line, "ranks", format!("bad rank range {ranks:?}")))
    };
    let (min_rank, max_rank) = match ranks.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let n = parse(ranks)?;
            (n, n)
        }
    };
    if min_rank > max_rank {
        return Err(bad(line, "ranks", "empty range"));
    }
    Ok(FamilyTemplate {
        rule,
        min_rank,
        max_rank,
    })
}

#[derive(Serialize, Deserialize)]
struct JsonRegistry {
    version: u32,
    classes: Vec<ConjugacyClassRecord>,
}

impl Registry {
    /// Default registry compiled into the binary.
    pub fn builtin() -> Self {
        Registry::load(BUILTIN).expect("built-in registry parses")
    }

    pub fn builtin_source() -> &'static str {
        BUILTIN
    }

    /// Parse either the stanza format or the JSON export.
    pub fn load(text: &str) -> Result<Self, RegistryError> {
        Registry::load_bounded(text, DEFAULT_MAX_RANK)
    }

    pub fn load_bounded(text: &str, max_rank: usize) -> Result<Self, RegistryError> {
        if text.trim_start().starts_with('{') {
            let j: JsonRegistry = serde_json::from_str(text)?;
            return Registry::from_entries(j.classes.into_iter().map(Entry::Class).collect(), max_rank);
        }
        let mut entries = Vec::new();
        for st in split_stanzas(text)? {
            entries.push(match st.kind {
                "class" => Entry::Class(parse_class(&st)?),
                _ => Entry::Family(parse_family(&st)?),
            });
        }
        Registry::from_entries(entries, max_rank)
    }

    pub fn from_entries(entries: Vec<Entry>, max_rank: usize) -> Result<Self, RegistryError> {
        let mut records = Vec::new();
        for e in &entries {
            match e {
                Entry::Class(r) => records.push(r.clone()),
                Entry::Family(f) => records.extend(f.expand(max_rank)),
            }
        }
        let mut seen = HashSet::new();
        for r in &records {
            for name in std::iter::once(&r.label).chain(&r.aliases) {
                if !seen.insert((r.algebra, r.rank, squash(name))) {
                    return Err(RegistryError::Duplicate(format!("{}{} {name}", r.algebra, r.rank)));
                }
            }
        }
        Ok(Registry { entries, records })
    }

    pub fn from_path(path: &Path) -> Result<Self, RegistryError> {
        let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Registry::load(&text)
    }

    /// Explicit path, then `DSFROB_REGISTRY`, then the built-in table.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, RegistryError> {
        if let Some(p) = explicit {
            return Registry::from_path(p);
        }
        match std::env::var_os(REGISTRY_ENV) {
            Some(p) if !p.is_empty() => Registry::from_path(Path::new(&p)),
            _ => Ok(Registry::builtin()),
        }
    }

    pub fn records(&self) -> &[ConjugacyClassRecord] {
        &self.records
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn query(
        &self,
        algebra: LieType,
        rank: usize,
        label: &str,
    ) -> Result<&ConjugacyClassRecord, RegistryError> {
        self.records
            .iter()
            .find(|r| r.algebra == algebra && r.rank == rank && r.matches(label))
            .ok_or_else(|| RegistryError::NotFound {
                algebra,
                rank,
                label: label.into(),
            })
    }

    /// Look a class up by label alone, e.g. "D4(a1)" or "E7(a4)".
    pub fn find(&self, label: &str) -> Option<&ConjugacyClassRecord> {
        self.records.iter().find(|r| r.matches(label))
    }

    /// Canonical stanza text. Families stay folded.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            match e {
                Entry::Family(f) => {
                    let ranks = if f.min_rank == f.max_rank {
                        f.min_rank.to_string()
                    } else {
                        format!("{}..{}", f.min_rank, f.max_rank)
                    };
                    let _ = write!(out, "[family]\nrule = {}\nranks = {ranks}\n", f.rule.name());
                }
                Entry::Class(r) => out.push_str(&stanza_text(r)),
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let j = JsonRegistry {
            version: JSON_VERSION,
            classes: self.records.clone(),
        };
        serde_json::to_string_pretty(&j).expect("records serialize")
    }
}

fn join(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn stanza_text(r: &ConjugacyClassRecord) -> String {
    let mut out = format!("[class]\ntype = {}\nrank = {}\nlabel = {}\n", r.algebra, r.rank, r.label);
    if !r.aliases.is_empty() {
        let _ = writeln!(out, "aliases = {}", r.aliases.join(" "));
    }
    let _ = write!(
        out,
        "order = {}\ns = {}\nexponents = {}\nweights = {}\ng0 = {}\n",
        r.order,
        join(&r.s),
        join(&r.exponents),
        join(&r.weights),
        normalize_g0(&r.g0)
    );
    out
}

/// Text-level canonical form: comments and blank lines dropped, fields in
/// canonical order, whitespace collapsed, one blank line between stanzas.
pub fn normalize(text: &str) -> String {
    let mut stanzas: Vec<(String, BTreeMap<usize, String>)> = Vec::new();
    for raw in text.lines() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t.starts_with('[') {
            stanzas.push((t.to_string(), BTreeMap::new()));
            continue;
        }
        let Some((k, v)) = t.split_once('=') else { continue };
        let Some((head, fields)) = stanzas.last_mut() else { continue };
        let keys: &[&str] = if head == "[class]" { &CLASS_KEYS } else { &FAMILY_KEYS };
        let key = k.trim();
        let Some(pos) = keys.iter().position(|x| *x == key) else { continue };
        let mut value = v.split_whitespace().collect::<Vec<_>>().join(" ");
        if key == "g0" {
            value = normalize_g0(&value);
        }
        if key == "aliases" && value.is_empty() {
            continue;
        }
        fields.insert(pos, format!("{key} = {value}"));
    }
    let blocks: Vec<String> = stanzas
        .into_iter()
        .map(|(h, f)| {
            let mut s = h;
            s.push('\n');
            for line in f.values() {
                s.push_str(line);
                s.push('\n');
            }
            s
        })
        .collect();
    blocks.join("\n")
}

/// Parse a registry source into its expanded class list.
pub fn load_registry(text: &str) -> Result<Vec<ConjugacyClassRecord>, RegistryError> {
    Ok(Registry::load(text)?.records)
}
