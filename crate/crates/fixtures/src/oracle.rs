//! Brute-force reference classifier and a random results-matrix generator.
//!
//! The oracle walks every unordered cell pair, decides the axis from a
//! table of coordinate equalities, and keeps the smallest witness per
//! `(kind, axis)`. Unsupported-feature patterns are plain substrings and
//! output normalization is token based; both are only valid for the
//! matrices produced by [`random_matrix`].

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ragfuzz_core::diff::{Axis, ClassifyPolicy, Discrepancy, IssueClass, Kind, ResultsMatrix, WitnessSide};
use ragfuzz_core::toolchain::{CellKey, OptLevel, RunResult, RunStatus};

/// Policy inputs in a form the oracle can interpret without regexes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OraclePolicy {
    pub float_precision: usize,
    /// Literal substrings; none contain regex metacharacters.
    pub unsupported: Vec<String>,
    pub device_arch: BTreeMap<String, String>,
}

impl OraclePolicy {
    pub fn to_policy(&self) -> ClassifyPolicy {
        ClassifyPolicy::new(self.float_precision, &self.unsupported, self.device_arch.clone())
            .expect("literal patterns compile")
    }

    fn arch<'a>(&'a self, device: &'a str) -> &'a str {
        self.device_arch.get(device).map(String::as_str).unwrap_or(device)
    }
}

/// Output canonicalization for the generator's grammar: space separated
/// tokens, optional trailing spaces and CR, optional trailing blank lines.
pub fn reference_normalize(raw: &str, precision: usize) -> String {
    let text = raw.replace("\r\n", "\n");
    let mut lines: Vec<String> = text
        .split('\n')
        .map(|line| {
            line.trim_end()
                .split(' ')
                .map(|tok| {
                    let floaty = tok.contains('.') || tok.contains('e') || tok.contains('E');
                    match tok.parse::<f64>() {
                        Ok(v) if precision > 0 && floaty && v.is_finite() => format!("{:.*e}", precision - 1, v),
                        _ => tok.to_string(),
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

/// Axis by table lookup on (same compiler, same target, same opt, same
/// device, same arch group).
fn oracle_axis(a: &CellKey, b: &CellKey, p: &OraclePolicy) -> Option<Axis> {
    let key = (
        a.compiler_id == b.compiler_id,
        a.target_id == b.target_id,
        a.opt_level == b.opt_level,
        a.device_id == b.device_id,
        p.arch(&a.device_id) == p.arch(&b.device_id),
    );
    match key {
        (true, true, false, true, _) => Some(Axis::CrossOptLevel),
        (_, _, false, _, _) => None,
        (true, _, true, false, _) => Some(Axis::CrossDevice),
        (true, false, true, true, _) => Some(Axis::CrossCompiler),
        (true, true, true, true, _) => None,
        (false, _, true, _, true) => Some(Axis::CrossCompiler),
        (false, _, true, _, false) => None,
    }
}

fn oracle_kinds(a: &RunResult, b: &RunResult, p: &OraclePolicy) -> Vec<Kind> {
    use RunStatus::*;
    let mut kinds = Vec::new();
    if a.status == Ok && b.status == Ok {
        let (x, y) = (
            reference_normalize(&a.stdout, p.float_precision),
            reference_normalize(&b.stdout, p.float_precision),
        );
        if x != y {
            kinds.push(Kind::OutputMismatch);
        }
    }
    let crash = |r: &RunResult| r.status == CrashSignal;
    let runtime = |r: &RunResult| r.status == NonzeroExit || r.status == LaunchError;
    let timeout = |r: &RunResult| r.status == Timeout;
    let unsupported = |r: &RunResult| p.unsupported.iter().any(|s| r.stderr.contains(s.as_str()));
    if crash(a) ^ crash(b) {
        kinds.push(Kind::CrashOnSome);
    }
    if runtime(a) ^ runtime(b) {
        kinds.push(Kind::RuntimeErrorOnSome);
    }
    if timeout(a) ^ timeout(b) {
        kinds.push(Kind::TimeoutDivergence);
    }
    if unsupported(a) ^ unsupported(b) {
        kinds.push(Kind::UnsupportedFeature);
    }
    kinds
}

fn issue_class(kind: Kind) -> IssueClass {
    if kind == Kind::OutputMismatch {
        IssueClass::InconsistentAcrossArch
    } else {
        IssueClass::ImplIssueOnArch
    }
}

/// All discrepancies of `matrix`, sorted by `(kind, axis)`. Returns `None`
/// when there are fewer than two cells.
pub fn brute_force_classify(matrix: &ResultsMatrix, policy: &OraclePolicy) -> Option<Vec<Discrepancy>> {
    let cells: Vec<&RunResult> = matrix.cells.values().collect();
    if cells.len() < 2 {
        return None;
    }
    let mut best: BTreeMap<(Kind, Axis), (&RunResult, &RunResult)> = BTreeMap::new();
    for a in &cells {
        for b in &cells {
            if a.cell >= b.cell {
                continue;
            }
            let Some(axis) = oracle_axis(&a.cell, &b.cell, policy) else {
                continue;
            };
            for kind in oracle_kinds(a, b, policy) {
                let slot = best.entry((kind, axis)).or_insert((a, b));
                if (&a.cell, &b.cell) < (&slot.0.cell, &slot.1.cell) {
                    *slot = (a, b);
                }
            }
        }
    }
    let side = |r: &RunResult| WitnessSide {
        cell: r.cell.clone(),
        status: r.status,
        output: reference_normalize(&r.stdout, policy.float_precision),
    };
    let mut out: Vec<Discrepancy> = best
        .into_iter()
        .map(|((kind, axis), (a, b))| Discrepancy {
            case_id: matrix.case_id.clone(),
            kind,
            axis,
            witness: (side(a), side(b)),
            issue_class: issue_class(kind),
        })
        .collect();
    out.sort_by_key(|d| (d.kind, d.axis));
    Some(out)
}

const OUTPUTS: &[&str] = &[
    "result 5",
    "result 7",
    "result 5.0000001",
    "result 5.0000002",
    "result 5.1",
    "sum 0.5 1e-3",
    "sum 0.50000001 0.001",
    "sum -2.25 1E3",
    "line one\nline two",
    "",
];

const UNSUPPORTED: &[&str] = &["feature not supported", "aspect fp64 unavailable"];

/// A random matrix over at most 2 compilers, 3 targets, 4 opt levels and 2
/// devices, with the policy it should be classified under.
pub fn random_matrix(seed: u64) -> (ResultsMatrix, OraclePolicy) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, all: &[&str]| -> Vec<String> {
        let n = rng.gen_range(1..=all.len());
        let mut v: Vec<String> = all.choose_multiple(rng, n).map(|s| s.to_string()).collect();
        v.sort();
        v
    };
    let compilers = pick(&mut rng, &["dpcpp", "acpp"]);
    let devices = pick(&mut rng, &["cpu0", "gpu0"]);
    let opt_count = rng.gen_range(1..=4);
    let mut opts: Vec<OptLevel> = OptLevel::ALL.choose_multiple(&mut rng, opt_count).copied().collect();
    opts.sort();
    let shared_targets = rng.gen_bool(0.3);

    let mut device_arch = BTreeMap::new();
    match rng.gen_range(0..3) {
        0 => {}
        1 => {
            for d in &devices {
                device_arch.insert(d.clone(), "shared".to_string());
            }
        }
        _ => {
            for d in &devices {
                device_arch.insert(d.clone(), format!("arch-{d}"));
            }
        }
    }
    let policy = OraclePolicy {
        float_precision: *[0usize, 3, 6].choose(&mut rng).unwrap(),
        unsupported: UNSUPPORTED.iter().map(|s| s.to_string()).collect(),
        device_arch,
    };

    let mut matrix = ResultsMatrix::new(format!("case-{seed}"));
    let keep = rng.gen_range(0.5..=1.0);
    for compiler in &compilers {
        let targets: Vec<String> = pick(&mut rng, &["spir64", "nvptx64", "amdgcn"])
            .into_iter()
            .map(|t| if shared_targets { t } else { format!("{compiler}-{t}") })
            .collect();
        for target in &targets {
            for &opt in &opts {
                for device in &devices {
                    if !rng.gen_bool(keep) {
                        continue;
                    }
                    let status = match rng.gen_range(0..20) {
                        0..=11 => RunStatus::Ok,
                        12 | 13 => RunStatus::CrashSignal,
                        14 | 15 => RunStatus::NonzeroExit,
                        16 | 17 => RunStatus::Timeout,
                        _ => RunStatus::LaunchError,
                    };
                    let mut stdout = OUTPUTS.choose(&mut rng).unwrap().to_string();
                    match rng.gen_range(0..4) {
                        0 => stdout.push('\n'),
                        1 => stdout.push_str("  \r\n\n"),
                        _ => {}
                    }
                    let stderr = if rng.gen_bool(0.15) {
                        format!("error: {}", UNSUPPORTED.choose(&mut rng).unwrap())
                    } else {
                        String::new()
                    };
                    matrix.insert(RunResult {
                        case_id: matrix.case_id.clone(),
                        cell: CellKey {
                            compiler_id: compiler.clone(),
                            target_id: target.clone(),
                            opt_level: opt,
                            device_id: device.clone(),
                        },
                        status,
                        exit_code: (status == RunStatus::Ok).then_some(0),
                        signal: (status == RunStatus::CrashSignal).then_some(11),
                        stdout,
                        stderr,
                        duration_ms: 1,
                    });
                }
            }
        }
    }
    (matrix, policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_normalize_rounds_only_floats() {
        assert_eq!(reference_normalize("result 5.0000001  \r\n\n", 6), "result 5.00000e0");
        assert_eq!(reference_normalize("result 5", 6), "result 5");
        assert_eq!(reference_normalize("sum 1E3", 3), "sum 1.00e3");
        assert_eq!(reference_normalize("sum 0.5", 0), "sum 0.5");
    }

    #[test]
    fn matrices_stay_within_bounds() {
        for seed in 0..200 {
            let (m, _) = random_matrix(seed);
            assert!(m.cells.len() <= 2 * 3 * 4 * 2);
        }
    }

    #[test]
    fn single_cell_yields_nothing() {
        let (mut m, p) = random_matrix(1);
        let first = m.cells.keys().next().cloned().unwrap();
        m.cells.retain(|k, _| *k == first);
        assert!(brute_force_classify(&m, &p).is_none());
    }
}
