//! Cross-cell comparison of run results and discrepancy classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::toolchain::{CellKey, CompileResult, RunResult, RunStatus};

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("case `{case_id}` has {cells} populated cell(s); at least 2 are needed")]
    InsufficientCells { case_id: String, cells: usize },
    #[error("invalid pattern `{pattern}`: {message}")]
    BadPattern { pattern: String, message: String },
    #[error("{path}: {message}")]
    Io { path: std::path::PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResultsMatrix {
    pub case_id: String,
    pub cells: BTreeMap<CellKey, RunResult>,
    #[serde(default)]
    pub compile_failures: Vec<CompileResult>,
}

impl ResultsMatrix {
    pub fn new(case_id: impl Into<String>) -> Self {
        Self {
            case_id: case_id.into(),
            ..Self::default()
        }
    }

    pub fn insert(&mut self, result: RunResult) {
        self.cells.insert(result.cell.clone(), result);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    OutputMismatch,
    CrashOnSome,
    RuntimeErrorOnSome,
    TimeoutDivergence,
    UnsupportedFeature,
}

impl Kind {
    pub const ALL: [Kind; 5] = [
        Kind::OutputMismatch,
        Kind::CrashOnSome,
        Kind::RuntimeErrorOnSome,
        Kind::TimeoutDivergence,
        Kind::UnsupportedFeature,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::OutputMismatch => "output_mismatch",
            Kind::CrashOnSome => "crash_on_some",
            Kind::RuntimeErrorOnSome => "runtime_error_on_some",
            Kind::TimeoutDivergence => "timeout_divergence",
            Kind::UnsupportedFeature => "unsupported_feature",
        }
    }

    pub fn issue_class(self) -> IssueClass {
        match self {
            Kind::OutputMismatch => IssueClass::InconsistentAcrossArch,
            _ => IssueClass::ImplIssueOnArch,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    CrossCompiler,
    CrossDevice,
    CrossOptLevel,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::CrossCompiler, Axis::CrossDevice, Axis::CrossOptLevel];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::CrossCompiler => "cross_compiler",
            Axis::CrossDevice => "cross_device",
            Axis::CrossOptLevel => "cross_opt_level",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueClass {
    ImplIssueOnArch,
    InconsistentAcrossArch,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WitnessSide {
    pub cell: CellKey,
    pub status: RunStatus,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub case_id: String,
    pub kind: Kind,
    pub axis: Axis,
    /// Ordered so that `witness.0.cell < witness.1.cell`.
    pub witness: (WitnessSide, WitnessSide),
    pub issue_class: IssueClass,
}

#[derive(Debug, Clone)]
pub struct ClassifyPolicy {
    /// Significant digits kept for floating-point tokens; 0 compares exactly.
    pub float_precision: usize,
    unsupported: Vec<Regex>,
    /// Device id → architecture group. Unlisted devices are their own group.
    pub device_arch: BTreeMap<String, String>,
}

impl Default for ClassifyPolicy {
    fn default() -> Self {
        Self {
            float_precision: 6,
            unsupported: Vec::new(),
            device_arch: BTreeMap::new(),
        }
    }
}

fn compile_patterns(patterns: &[String]) -> Result<Vec<Regex>, DiffError> {
    patterns
        .iter()
        .map(|p| {
            Regex::new(p).map_err(|e| DiffError::BadPattern {
                pattern: p.clone(),
                message: e.to_string(),
            })
        })
        .collect()
}

impl ClassifyPolicy {
    pub fn new(float_precision: usize, unsupported_patterns: &[String], device_arch: BTreeMap<String, String>) -> Result<Self, DiffError> {
        Ok(Self {
            float_precision,
            unsupported: compile_patterns(unsupported_patterns)?,
            device_arch,
        })
    }

    pub fn arch<'a>(&'a self, device_id: &'a str) -> &'a str {
        self.device_arch.get(device_id).map_or(device_id, String::as_str)
    }

    pub fn is_unsupported(&self, stderr: &str) -> bool {
        self.unsupported.iter().any(|r| r.is_match(stderr))
    }
}

fn float_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(^|[^\w.])([-+]?(?:\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+))").unwrap()
    })
}

/// Canonical form for comparison: LF line endings, no trailing whitespace,
/// no trailing blank lines, and floats rounded to `precision` significant
/// digits (`0` leaves them untouched). Integers are never rewritten.
pub fn normalize_output(raw: &str, precision: usize) -> String {
    let unified = raw.replace("\r\n", "\n").replace('\r', "\n");
    let mut lines: Vec<&str> = unified.lines().map(str::trim_end).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    let joined = lines.join("\n");
    if precision == 0 {
        return joined;
    }
    float_re()
        .replace_all(&joined, |c: &regex::Captures<'_>| {
            let token = &c[2];
            match token.parse::<f64>() {
                Ok(v) if v.is_finite() => format!("{}{:.*e}", &c[1], precision - 1, v),
                _ => c[0].to_string(),
            }
        })
        .into_owned()
}

/// Which comparison axis relates two cells, if any.
///
/// * opt levels differ, everything else equal: cross_opt_level
/// * same compiler and opt level, devices differ: cross_device
/// * different compilers, same opt level, same architecture group: cross_compiler
/// * same compiler, device and opt level, targets differ: cross_compiler
pub fn axis_of(a: &CellKey, b: &CellKey, policy: &ClassifyPolicy) -> Option<Axis> {
    if a.opt_level != b.opt_level {
        let rest_equal = a.compiler_id == b.compiler_id && a.target_id == b.target_id && a.device_id == b.device_id;
        return rest_equal.then_some(Axis::CrossOptLevel);
    }
    if a.compiler_id == b.compiler_id {
        if a.device_id != b.device_id {
            Some(Axis::CrossDevice)
        } else if a.target_id != b.target_id {
            Some(Axis::CrossCompiler)
        } else {
            None
        }
    } else if policy.arch(&a.device_id) == policy.arch(&b.device_id) {
        Some(Axis::CrossCompiler)
    } else {
        None
    }
}

fn is_runtime_error(s: RunStatus) -> bool {
    matches!(s, RunStatus::NonzeroExit | RunStatus::LaunchError)
}

/// Every discrepancy kind exhibited by a pair of run results.
pub fn pair_kinds(a: &RunResult, b: &RunResult, policy: &ClassifyPolicy) -> Vec<Kind> {
    let mut kinds = Vec::new();
    if a.status == RunStatus::Ok
        && b.status == RunStatus::Ok
        && normalize_output(&a.stdout, policy.float_precision) != normalize_output(&b.stdout, policy.float_precision)
    {
        kinds.push(Kind::OutputMismatch);
    }
    let one = |f: &dyn Fn(&RunResult) -> bool| f(a) != f(b);
    if one(&|r| r.status == RunStatus::CrashSignal) {
        kinds.push(Kind::CrashOnSome);
    }
    if one(&|r| is_runtime_error(r.status)) {
        kinds.push(Kind::RuntimeErrorOnSome);
    }
    if one(&|r| r.status == RunStatus::Timeout) {
        kinds.push(Kind::TimeoutDivergence);
    }
    if one(&|r| policy.is_unsupported(&r.stderr)) {
        kinds.push(Kind::UnsupportedFeature);
    }
    kinds
}

fn side(r: &RunResult, policy: &ClassifyPolicy) -> WitnessSide {
    WitnessSide {
        cell: r.cell.clone(),
        status: r.status,
        output: normalize_output(&r.stdout, policy.float_precision),
    }
}

/// One discrepancy per `(kind, axis)`, witnessed by the smallest cell pair.
pub fn classify(matrix: &ResultsMatrix, policy: &ClassifyPolicy) -> Result<Vec<Discrepancy>, DiffError> {
    if matrix.cells.len() < 2 {
        return Err(DiffError::InsufficientCells {
            case_id: matrix.case_id.clone(),
            cells: matrix.cells.len(),
        });
    }
    let cells: Vec<&RunResult> = matrix.cells.values().collect();
    let mut found: BTreeMap<(Kind, Axis), (usize, usize)> = BTreeMap::new();
    // Cells are in key order, so the first pair found for a (kind, axis)
    // is the lexicographically smallest.
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let Some(axis) = axis_of(&cells[i].cell, &cells[j].cell, policy) else {
                continue;
            };
            for kind in pair_kinds(cells[i], cells[j], policy) {
                found.entry((kind, axis)).or_insert((i, j));
            }
        }
    }
    Ok(found
        .into_iter()
        .map(|((kind, axis), (i, j))| Discrepancy {
            case_id: matrix.case_id.clone(),
            kind,
            axis,
            witness: (side(cells[i], policy), side(cells[j], policy)),
            issue_class: kind.issue_class(),
        })
        .collect())
}

/// True if any suppression pattern matches the case source.
pub fn suppressed(source: &str, patterns: &[Regex]) -> bool {
    patterns.iter().any(|r| r.is_match(source))
}

pub fn compile_suppressions(patterns: &[String]) -> Result<Vec<Regex>, DiffError> {
    compile_patterns(patterns)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignFindings {
    /// Distinct flagged cases per axis.
    pub by_axis: BTreeMap<Axis, usize>,
    /// Distinct flagged cases per kind.
    pub by_kind: BTreeMap<Kind, usize>,
    /// Distinct flagged cases per axis, then kind.
    pub by_axis_kind: BTreeMap<Axis, BTreeMap<Kind, usize>>,
    /// Cases flagged across compilers or optimization levels.
    pub compiler_flagged: usize,
    /// Cases flagged across devices.
    pub device_flagged: usize,
    /// Size of the union of all flagged cases.
    pub total_flagged: usize,
    pub flagged_cases: Vec<String>,
    pub discrepancies: usize,
}

pub fn summarize(discrepancies: &[Discrepancy]) -> CampaignFindings {
    let mut axis_sets: BTreeMap<Axis, BTreeSet<&str>> = Axis::ALL.iter().map(|a| (*a, BTreeSet::new())).collect();
    let mut kind_sets: BTreeMap<Kind, BTreeSet<&str>> = Kind::ALL.iter().map(|k| (*k, BTreeSet::new())).collect();
    let mut axis_kind: BTreeMap<Axis, BTreeMap<Kind, BTreeSet<&str>>> = Axis::ALL
        .iter()
        .map(|a| (*a, Kind::ALL.iter().map(|k| (*k, BTreeSet::new())).collect()))
        .collect();
    for d in discrepancies {
        let id = d.case_id.as_str();
        axis_sets.get_mut(&d.axis).expect("all axes present").insert(id);
        kind_sets.get_mut(&d.kind).expect("all kinds present").insert(id);
        axis_kind
            .get_mut(&d.axis)
            .and_then(|m| m.get_mut(&d.kind))
            .expect("all pairs present")
            .insert(id);
    }
    let compiler: BTreeSet<&str> = axis_sets[&Axis::CrossCompiler]
        .union(&axis_sets[&Axis::CrossOptLevel])
        .copied()
        .collect();
    let all: BTreeSet<&str> = axis_sets.values().flatten().copied().collect();
    CampaignFindings {
        by_axis: axis_sets.iter().map(|(a, s)| (*a, s.len())).collect(),
        by_kind: kind_sets.iter().map(|(k, s)| (*k, s.len())).collect(),
        by_axis_kind: axis_kind
            .iter()
            .map(|(a, m)| (*a, m.iter().map(|(k, s)| (*k, s.len())).collect()))
            .collect(),
        compiler_flagged: compiler.len(),
        device_flagged: axis_sets[&Axis::CrossDevice].len(),
        total_flagged: all.len(),
        flagged_cases: all.into_iter().map(String::from).collect(),
        discrepancies: discrepancies.len(),
    }
}

/// One JSON object per line, in the given order.
pub fn write_findings_jsonl(path: &Path, discrepancies: &[Discrepancy]) -> Result<(), DiffError> {
    let io = |e: std::io::Error| DiffError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut out = Vec::new();
    for d in discrepancies {
        serde_json::to_writer(&mut out, d).expect("discrepancy serializes");
        out.push(b'\n');
    }
    let mut file = std::fs::File::create(path).map_err(io)?;
    file.write_all(&out).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolchain::OptLevel;

    fn cell(compiler: &str, target: &str, opt: OptLevel, device: &str) -> CellKey {
        CellKey {
            compiler_id: compiler.into(),
            target_id: target.into(),
            opt_level: opt,
            device_id: device.into(),
        }
    }

    fn result(key: CellKey, status: RunStatus, stdout: &str) -> RunResult {
        RunResult {
            case_id: "c".into(),
            cell: key,
            status,
            exit_code: None,
            signal: None,
            stdout: stdout.into(),
            stderr: String::new(),
            duration_ms: 0,
        }
    }

    fn matrix(results: Vec<RunResult>) -> ResultsMatrix {
        let mut m = ResultsMatrix::new("c");
        for r in results {
            m.insert(r);
        }
        m
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize_output("5\n", 6), normalize_output("5\r\n", 6));
        assert_eq!(normalize_output("x=0.3333333339", 6), normalize_output("x=0.3333333341", 6));
        assert_ne!(normalize_output("x=0.3333333339", 0), normalize_output("x=0.3333333341", 0));
        assert_eq!(normalize_output("Output value from device kernel: 1", 6), "Output value from device kernel: 1");
        assert_eq!(normalize_output("a  \nb\t\n\n\n", 6), "a\nb");
        assert_eq!(normalize_output("v1.2.3 id_1.5", 6), "v1.2.3 id_1.5");
        assert_eq!(normalize_output("-2.50 1e3", 3), "-2.50e0 1.00e3");
    }

    #[test]
    fn identical_cells_have_no_findings() {
        let m = matrix(vec![
            result(cell("a", "t", OptLevel::O0, "d1"), RunStatus::Ok, "5\n"),
            result(cell("a", "t", OptLevel::O1, "d1"), RunStatus::Ok, "5"),
            result(cell("b", "t", OptLevel::O0, "d1"), RunStatus::Ok, "5\r\n"),
        ]);
        assert!(classify(&m, &ClassifyPolicy::default()).unwrap().is_empty());
    }

    #[test]
    fn cross_compiler_mismatch_on_same_architecture() {
        let arch = [("A100".to_string(), "nvidia".to_string()), ("A40".to_string(), "nvidia".to_string())].into();
        let policy = ClassifyPolicy::new(6, &[], arch).unwrap();
        let m = matrix(vec![
            result(cell("icpx", "nvptx", OptLevel::O2, "A100"), RunStatus::Ok, "Output value from device kernel: 5"),
            result(cell("clang++", "nvptx", OptLevel::O2, "A40"), RunStatus::Ok, "Output value from device kernel: 7"),
        ]);
        let found = classify(&m, &policy).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!((found[0].kind, found[0].axis), (Kind::OutputMismatch, Axis::CrossCompiler));
        assert_eq!(found[0].issue_class, IssueClass::InconsistentAcrossArch);
        assert_eq!(found[0].witness.0.cell.compiler_id, "clang++");
        // Different architecture groups are not compared across compilers.
        assert!(classify(&m, &ClassifyPolicy::default()).unwrap().is_empty());
    }

    #[test]
    fn crash_and_timeout_kinds() {
        let m = matrix(vec![
            result(cell("a", "t", OptLevel::O0, "d1"), RunStatus::Ok, "1"),
            result(cell("a", "t", OptLevel::O0, "d2"), RunStatus::CrashSignal, ""),
            result(cell("a", "t", OptLevel::O1, "d1"), RunStatus::Timeout, ""),
        ]);
        let found = classify(&m, &ClassifyPolicy::default()).unwrap();
        let kinds: Vec<_> = found.iter().map(|d| (d.kind, d.axis)).collect();
        assert_eq!(
            kinds,
            vec![(Kind::CrashOnSome, Axis::CrossDevice), (Kind::TimeoutDivergence, Axis::CrossOptLevel)]
        );
        assert!(found.iter().all(|d| d.issue_class == IssueClass::ImplIssueOnArch));
    }

    #[test]
    fn unsupported_feature_pattern() {
        let policy = ClassifyPolicy::new(6, &["(?i)unsupported".to_string()], BTreeMap::new()).unwrap();
        let mut bad = result(cell("a", "t", OptLevel::O0, "d2"), RunStatus::NonzeroExit, "");
        bad.stderr = "Feature Unsupported on this device".into();
        let m = matrix(vec![result(cell("a", "t", OptLevel::O0, "d1"), RunStatus::Ok, ""), bad]);
        let kinds: Vec<_> = classify(&m, &policy).unwrap().iter().map(|d| d.kind).collect();
        assert_eq!(kinds, vec![Kind::RuntimeErrorOnSome, Kind::UnsupportedFeature]);
        assert!(ClassifyPolicy::new(6, &["(".to_string()], BTreeMap::new()).is_err());
    }

    #[test]
    fn too_few_cells() {
        let m = matrix(vec![result(cell("a", "t", OptLevel::O0, "d1"), RunStatus::Ok, "")]);
        assert!(matches!(classify(&m, &ClassifyPolicy::default()), Err(DiffError::InsufficientCells { cells: 1, .. })));
    }

    #[test]
    fn axis_table() {
        let p = ClassifyPolicy::default();
        let base = cell("a", "t", OptLevel::O0, "d");
        assert_eq!(axis_of(&base, &cell("a", "t", OptLevel::O3, "d"), &p), Some(Axis::CrossOptLevel));
        assert_eq!(axis_of(&base, &cell("a", "t", OptLevel::O3, "e"), &p), None);
        assert_eq!(axis_of(&base, &cell("a", "u", OptLevel::O0, "e"), &p), Some(Axis::CrossDevice));
        assert_eq!(axis_of(&base, &cell("a", "u", OptLevel::O0, "d"), &p), Some(Axis::CrossCompiler));
        assert_eq!(axis_of(&base, &cell("b", "u", OptLevel::O0, "d"), &p), Some(Axis::CrossCompiler));
        assert_eq!(axis_of(&base, &cell("b", "t", OptLevel::O0, "e"), &p), None);
        assert_eq!(axis_of(&base, &base, &p), None);
    }

    fn finding(case: &str, axis: Axis, kind: Kind) -> Discrepancy {
        let side = WitnessSide {
            cell: cell("a", "t", OptLevel::O0, "d"),
            status: RunStatus::Ok,
            output: String::new(),
        };
        Discrepancy {
            case_id: case.into(),
            kind,
            axis,
            witness: (side.clone(), side),
            issue_class: kind.issue_class(),
        }
    }

    #[test]
    fn summary_of_nothing_is_zero() {
        let s = summarize(&[]);
        assert_eq!(s.total_flagged, 0);
        assert!(s.by_axis.values().all(|n| *n == 0));
        assert_eq!(s.by_kind.len(), 5);
    }

    #[test]
    fn disjoint_axes_add_up() {
        let mut all = Vec::new();
        for i in 0..12 {
            all.push(finding(&format!("cc{i}"), Axis::CrossCompiler, Kind::OutputMismatch));
        }
        for i in 0..75 {
            all.push(finding(&format!("cd{i}"), Axis::CrossDevice, Kind::OutputMismatch));
        }
        let s = summarize(&all);
        assert_eq!((s.compiler_flagged, s.device_flagged, s.total_flagged), (12, 75, 87));
    }

    #[test]
    fn overlapping_flags_count_once() {
        let s = summarize(&[
            finding("x", Axis::CrossCompiler, Kind::OutputMismatch),
            finding("x", Axis::CrossDevice, Kind::CrashOnSome),
            finding("x", Axis::CrossOptLevel, Kind::OutputMismatch),
        ]);
        assert_eq!((s.compiler_flagged, s.device_flagged, s.total_flagged), (1, 1, 1));
        assert_eq!(s.by_kind[&Kind::OutputMismatch], 1);
        assert_eq!(s.discrepancies, 3);
    }

    #[test]
    fn jsonl_has_one_line_per_finding() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("findings.jsonl");
        let all = vec![finding("x", Axis::CrossCompiler, Kind::OutputMismatch), finding("y", Axis::CrossDevice, Kind::CrashOnSome)];
        write_findings_jsonl(&path, &all).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back: Discrepancy = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(back, all[0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_result() -> impl Strategy<Value = RunResult> {
            (0usize..2, 0usize..2, 0usize..4, 0usize..2, 0usize..5, 0usize..3).prop_map(|(c, t, o, d, s, out)| {
                let status = [RunStatus::Ok, RunStatus::NonzeroExit, RunStatus::CrashSignal, RunStatus::Timeout, RunStatus::LaunchError][s];
                result(cell(["a", "b"][c], ["t", "u"][t], OptLevel::ALL[o], ["d1", "d2"][d]), status, ["1", "2", "1.0000001"][out])
            })
        }

        proptest! {
            #[test]
            fn insertion_order_is_irrelevant(rs in prop::collection::vec(arb_result(), 2..16), rotate in 0usize..16) {
                let mut seen = BTreeSet::new();
                let mut rs: Vec<_> = rs.into_iter().filter(|r| seen.insert(r.cell.clone())).collect();
                let forward = matrix(rs.clone());
                let n = rs.len();
                rs.rotate_left(rotate % n);
                rs.reverse();
                let backward = matrix(rs);
                prop_assume!(forward.cells.len() >= 2);
                let p = ClassifyPolicy::default();
                prop_assert_eq!(classify(&forward, &p).unwrap(), classify(&backward, &p).unwrap());
            }

            #[test]
            fn witnesses_are_related_by_their_axis(rs in prop::collection::vec(arb_result(), 2..16)) {
                let m = matrix(rs);
                prop_assume!(m.cells.len() >= 2);
                let p = ClassifyPolicy::default();
                for d in classify(&m, &p).unwrap() {
                    prop_assert_eq!(axis_of(&d.witness.0.cell, &d.witness.1.cell, &p), Some(d.axis));
                    prop_assert!(d.witness.0.cell < d.witness.1.cell);
                }
            }
        }
    }
}
