//! Token usage ledger and cost estimation.
//!
//! Money is exact: amounts are integer picodollars (1e-12 USD), which is
//! the natural unit of `tokens * micro-dollars-per-million`. Rounding to
//! cents happens only when formatting.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("model `{0}` has no pricing entry")]
    UnpricedModel(String),
    #[error("invalid amount `{0}`")]
    InvalidAmount(String),
    #[error("invalid pricing table: {0}")]
    InvalidPricing(String),
    #[error("ledger {path} line {line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Characteristics,
    Codegen,
    Repair,
    Mutation,
    Embedding,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Characteristics,
        Stage::Codegen,
        Stage::Repair,
        Stage::Mutation,
        Stage::Embedding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Characteristics => "characteristics",
            Stage::Codegen => "codegen",
            Stage::Repair => "repair",
            Stage::Mutation => "mutation",
            Stage::Embedding => "embedding",
        }
    }

    /// Stages billed to test-case generation (everything except embedding).
    pub fn is_generation(self) -> bool {
        !matches!(self, Stage::Embedding)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Token counts reported for one provider call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
    /// Counts were estimated locally because the provider omitted them.
    #[serde(default)]
    pub approximate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageEntry {
    pub call_id: u64,
    pub stage: Stage,
    pub model_id: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub approximate: bool,
}

/// Append-only usage log, optionally mirrored to a JSONL file.
#[derive(Debug)]
pub struct Ledger {
    inner: Mutex<Inner>,
}

#[derive(Debug)]
struct Inner {
    entries: Vec<UsageEntry>,
    sink: Option<(PathBuf, File)>,
}

impl Ledger {
    pub fn in_memory() -> Self {
        Self {
            inner: Mutex::new(Inner {
                entries: Vec::new(),
                sink: None,
            }),
        }
    }

    /// Open (or create) a JSONL ledger, loading prior entries so call ids
    /// continue monotonically.
    pub fn open(path: &Path) -> Result<Self, LedgerError> {
        let io = |source| LedgerError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut entries = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: UsageEntry = serde_json::from_str(&line).map_err(|e| LedgerError::Corrupt {
                    path: path.to_path_buf(),
                    line: n + 1,
                    reason: e.to_string(),
                })?;
                entries.push(entry);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok(Self {
            inner: Mutex::new(Inner {
                entries,
                sink: Some((path.to_path_buf(), file)),
            }),
        })
    }

    /// Append one entry and return its call id.
    pub fn record(&self, stage: Stage, model_id: &str, usage: Usage) -> Result<u64, LedgerError> {
        let mut inner = self.inner.lock().expect("ledger lock poisoned");
        let call_id = inner.entries.last().map_or(1, |e| e.call_id + 1);
        let entry = UsageEntry {
            call_id,
            stage,
            model_id: model_id.to_string(),
            input_tokens: usage.input_tokens,
            output_tokens: usage.output_tokens,
            approximate: usage.approximate,
        };
        if let Some((path, file)) = inner.sink.as_mut() {
            let mut line = serde_json::to_string(&entry).expect("entry serializes");
            line.push('\n');
            let io = |source| LedgerError::Io {
                path: path.clone(),
                source,
            };
            file.write_all(line.as_bytes()).map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        inner.entries.push(entry);
        Ok(call_id)
    }

    pub fn entries(&self) -> Vec<UsageEntry> {
        self.inner.lock().expect("ledger lock poisoned").entries.clone()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("ledger lock poisoned").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn totals(&self, filter: &CostFilter) -> TokenTotals {
        TokenTotals::of(&self.entries(), filter)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CostFilter {
    pub stage: Option<Stage>,
    pub model_id: Option<String>,
}

impl CostFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn stage(stage: Stage) -> Self {
        Self {
            stage: Some(stage),
            model_id: None,
        }
    }

    pub fn accepts(&self, entry: &UsageEntry) -> bool {
        self.stage.is_none_or(|s| s == entry.stage) && self.model_id.as_deref().is_none_or(|m| m == entry.model_id)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenTotals {
    pub calls: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl TokenTotals {
    pub fn of(entries: &[UsageEntry], filter: &CostFilter) -> Self {
        entries.iter().filter(|e| filter.accepts(e)).fold(Self::default(), |acc, e| Self {
            calls: acc.calls + 1,
            input_tokens: acc.input_tokens + e.input_tokens,
            output_tokens: acc.output_tokens + e.output_tokens,
        })
    }
}

/// An exact USD amount in picodollars.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i128);

const PICO_PER_DOLLAR: i128 = 1_000_000_000_000;
const PICO_PER_CENT: i128 = 10_000_000_000;

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn from_picodollars(p: i128) -> Self {
        Self(p)
    }

    pub fn picodollars(self) -> i128 {
        self.0
    }

    /// Nearest whole cents, halves rounded away from zero.
    pub fn cents(self) -> i128 {
        let half = PICO_PER_CENT / 2;
        if self.0 >= 0 {
            (self.0 + half) / PICO_PER_CENT
        } else {
            (self.0 - half) / PICO_PER_CENT
        }
    }

    pub fn as_dollars_f64(self) -> f64 {
        self.0 as f64 / PICO_PER_DOLLAR as f64
    }
}

impl std::ops::Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cents = self.cents();
        let sign = if cents < 0 { "-" } else { "" };
        write!(f, "{sign}${}.{:02}", cents.abs() / 100, cents.abs() % 100)
    }
}

impl FromStr for Money {
    type Err = LedgerError;

    /// Parse a plain decimal dollar amount such as `30`, `2.5` or `0.10`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LedgerError::InvalidAmount(s.to_string());
        let t = s.trim().trim_start_matches('$');
        let (neg, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (whole, frac) = t.split_once('.').unwrap_or((t, ""));
        if whole.is_empty() && frac.is_empty()
            || frac.len() > 12
            || !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let whole: i128 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let frac_value: i128 = if frac.is_empty() {
            0
        } else {
            frac.parse::<i128>().map_err(|_| bad())? * 10i128.pow(12 - frac.len() as u32)
        };
        let p = whole.checked_mul(PICO_PER_DOLLAR).and_then(|w| w.checked_add(frac_value)).ok_or_else(bad)?;
        Ok(Money(if neg { -p } else { p }))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        // Full precision, trailing zeros trimmed.
        let p = self.0.abs();
        let mut text = format!("{}.{:012}", p / PICO_PER_DOLLAR, p % PICO_PER_DOLLAR);
        while text.ends_with('0') {
            text.pop();
        }
        if text.ends_with('.') {
            text.pop();
        }
        if self.0 < 0 {
            text.insert(0, '-');
        }
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub input_per_million: Money,
    pub output_per_million: Money,
}

/// Versioned per-model rates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PricingTable {
    pub version: u32,
    pub effective_date: String,
    pub models: BTreeMap<String, Rate>,
}

impl PricingTable {
    /// The rates bundled with the crate.
    pub fn builtin() -> Self {
        Self::from_toml(include_str!("../data/pricing.toml")).expect("bundled pricing table is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, LedgerError> {
        let table: PricingTable = toml::from_str(text).map_err(|e| LedgerError::InvalidPricing(e.to_string()))?;
        for (model, rate) in &table.models {
            if rate.input_per_million <= Money::ZERO || rate.output_per_million <= Money::ZERO {
                return Err(LedgerError::InvalidPricing(format!("rates for `{model}` must be positive")));
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, LedgerError> {
        let text = std::fs::read_to_string(path).map_err(|source| LedgerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn rate(&self, model_id: &str) -> Option<&Rate> {
        self.models.get(model_id)
    }
}

/// `sum(input * in_rate + output * out_rate) / 1e6` over matching entries.
pub fn estimate_cost(entries: &[UsageEntry], pricing: &PricingTable, filter: &CostFilter) -> Result<Money, LedgerError> {
    let mut total = Money::ZERO;
    for e in entries.iter().filter(|e| filter.accepts(e)) {
        let rate = pricing
            .rate(&e.model_id)
            .ok_or_else(|| LedgerError::UnpricedModel(e.model_id.clone()))?;
        total = total
            + Money(
                (e.input_tokens as i128 * rate.input_per_million.0 + e.output_tokens as i128 * rate.output_per_million.0)
                    / 1_000_000,
            );
    }
    Ok(total)
}
