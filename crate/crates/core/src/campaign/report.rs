use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::store::{read_json_if_exists, write_atomic, write_json};
use super::{Campaign, CampaignError, CaseOrigin, ClassifyRecord, Layout};
use crate::diff::{summarize, Axis, CampaignFindings, IssueClass, Kind};
use crate::ledger::{estimate_cost, CostFilter, Money, Stage, TokenTotals};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassCounts {
    pub pass_name: String,
    /// Candidate definitions extracted.
    pub functions: usize,
    /// Characteristics records produced.
    pub characteristics: usize,
    /// Cases with a draft source, seeds and mutants alike.
    pub generated: usize,
    /// Generated cases that compile at the gate, possibly after repair.
    pub compiled: usize,
    /// Generated cases still failing after the repair budget or a fault.
    pub failed: usize,
    /// Attempts that never produced a draft.
    pub abandoned: usize,
    /// Compiled cases that needed at least one repair.
    pub repaired: usize,
    /// Generated cases that are mutation children.
    pub mutants: usize,
}

impl PassCounts {
    fn add(&mut self, other: &PassCounts) {
        self.functions += other.functions;
        self.characteristics += other.characteristics;
        self.generated += other.generated;
        self.compiled += other.compiled;
        self.failed += other.failed;
        self.abandoned += other.abandoned;
        self.repaired += other.repaired;
        self.mutants += other.mutants;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedCase {
    pub case_id: String,
    pub pass_name: String,
    pub kind: Kind,
    pub axis: Axis,
    pub issue_class: IssueClass,
    pub witness: (String, String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixStats {
    pub cases_tested: usize,
    pub cases_classified: usize,
    pub compile_jobs: usize,
    pub compile_by_status: BTreeMap<String, usize>,
    pub run_cells: usize,
    pub run_by_status: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCost {
    pub stage: String,
    pub calls: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub approximate_calls: u64,
    /// Absent when a model in this stage has no price.
    pub cost: Option<Money>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostSummary {
    pub pricing_version: u32,
    pub pricing_effective_date: String,
    pub stages: Vec<StageCost>,
    pub total: StageCost,
    pub unpriced_models: Vec<String>,
}

/// Everything in the report is derived from persisted artifacts and is
/// reproducible; wall-clock timing lives in `timing.json` instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub format_version: u32,
    pub campaign: String,
    pub seed: u64,
    pub mutations_per_case: usize,
    pub max_repair_attempts: usize,
    pub passes: Vec<PassCounts>,
    pub totals: PassCounts,
    pub findings: CampaignFindings,
    pub flagged: Vec<FlaggedCase>,
    pub suppressed_cases: usize,
    pub matrix: MatrixStats,
    pub cost: CostSummary,
    /// Characteristics or cases that ended on a provider, prompt or tool
    /// fault.
    pub faults: usize,
}

fn status_name<T: Serialize>(status: &T) -> String {
    serde_json::to_value(status)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn stage_cost(name: &str, entries: &[crate::ledger::UsageEntry], filter: &CostFilter, campaign: &Campaign) -> StageCost {
    let totals = TokenTotals::of(entries, filter);
    StageCost {
        stage: name.to_string(),
        calls: totals.calls,
        input_tokens: totals.input_tokens,
        output_tokens: totals.output_tokens,
        approximate_calls: entries.iter().filter(|e| filter.accepts(e) && e.approximate).count() as u64,
        cost: estimate_cost(entries, &campaign.pricing, filter).ok(),
    }
}

pub fn build_report(campaign: &Campaign) -> Result<CampaignReport, CampaignError> {
    let cfg = &campaign.config;
    let mut passes = Vec::new();
    let mut faults = 0;
    let mut pass_of_case = BTreeMap::new();
    let mut matrix = MatrixStats::default();
    for pass in &cfg.passes {
        let functions = campaign.functions(&pass.pass_name)?;
        let failures = campaign.function_failures(&pass.pass_name)?;
        faults += failures;
        let mut counts = PassCounts {
            pass_name: pass.pass_name.clone(),
            functions: functions.len(),
            ..PassCounts::default()
        };
        for f in &functions {
            if campaign.characteristics_of(&pass.pass_name, &f.function_id)?.is_some() {
                counts.characteristics += 1;
            }
        }
        for rec in campaign.cases(&pass.pass_name)? {
            pass_of_case.insert(rec.case.case_id.clone(), pass.pass_name.clone());
            if rec.fault.is_some() {
                faults += 1;
            }
            if !rec.generated {
                counts.abandoned += 1;
                continue;
            }
            counts.generated += 1;
            if rec.origin == CaseOrigin::Mutation {
                counts.mutants += 1;
            }
            if !rec.compiles() {
                counts.failed += 1;
                continue;
            }
            counts.compiled += 1;
            if rec.repair_attempts > 0 {
                counts.repaired += 1;
            }
            let compiles = campaign.compile_results(&rec)?;
            let runs = campaign.run_results(&rec)?;
            if !compiles.is_empty() {
                matrix.cases_tested += 1;
            }
            matrix.compile_jobs += compiles.len();
            for c in &compiles {
                *matrix.compile_by_status.entry(status_name(&c.status)).or_default() += 1;
            }
            matrix.run_cells += runs.len();
            for r in &runs {
                *matrix.run_by_status.entry(status_name(&r.status)).or_default() += 1;
            }
        }
        debug_assert_eq!(counts.generated, counts.compiled + counts.failed);
        passes.push(counts);
    }
    let mut totals = PassCounts {
        pass_name: "total".into(),
        ..PassCounts::default()
    };
    for p in &passes {
        totals.add(p);
    }

    let discrepancies = campaign.findings()?;
    let classify: ClassifyRecord = read_json_if_exists(&campaign.layout.classify())?.unwrap_or_default();
    matrix.cases_classified = classify.cases_classified;
    let mut flagged: Vec<FlaggedCase> = discrepancies
        .iter()
        .map(|d| FlaggedCase {
            case_id: d.case_id.clone(),
            pass_name: pass_of_case.get(&d.case_id).cloned().unwrap_or_default(),
            kind: d.kind,
            axis: d.axis,
            issue_class: d.issue_class,
            witness: (d.witness.0.cell.to_string(), d.witness.1.cell.to_string()),
        })
        .collect();
    flagged.sort_by(|a, b| (&a.pass_name, &a.case_id, a.kind, a.axis).cmp(&(&b.pass_name, &b.case_id, b.kind, b.axis)));

    let entries = campaign.ledger.entries();
    let stages = Stage::ALL
        .iter()
        .map(|s| stage_cost(s.as_str(), &entries, &CostFilter::stage(*s), campaign))
        .collect();
    let mut unpriced: Vec<String> = entries
        .iter()
        .filter(|e| campaign.pricing.rate(&e.model_id).is_none())
        .map(|e| e.model_id.clone())
        .collect();
    unpriced.sort();
    unpriced.dedup();
    let cost = CostSummary {
        pricing_version: campaign.pricing.version,
        pricing_effective_date: campaign.pricing.effective_date.clone(),
        stages,
        total: stage_cost("total", &entries, &CostFilter::all(), campaign),
        unpriced_models: unpriced,
    };

    Ok(CampaignReport {
        format_version: REPORT_FORMAT_VERSION,
        campaign: cfg.name.clone(),
        seed: cfg.seed,
        mutations_per_case: cfg.mutations_per_case,
        max_repair_attempts: cfg.max_repair_attempts,
        passes,
        totals,
        findings: summarize(&discrepancies),
        flagged,
        suppressed_cases: classify.suppressed.len(),
        matrix,
        cost,
        faults,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// `report.json`: the full report as one JSON document.
    Json,
    /// `report.md`: summary tables for reading.
    Markdown,
}

pub fn emit_report(report: &CampaignReport, layout: &Layout, format: ReportFormat) -> Result<(), CampaignError> {
    match format {
        ReportFormat::Json => write_json(&layout.report_json(), report),
        ReportFormat::Markdown => write_atomic(&layout.report_markdown(), render_markdown(report).as_bytes()),
    }
}

fn money(m: &Option<Money>) -> String {
    m.map_or_else(|| "unpriced".to_string(), |m| m.to_string())
}

pub fn render_markdown(r: &CampaignReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Campaign report: {}\n", r.campaign);
    let _ = writeln!(
        s,
        "Seed {}, {} mutation(s) per compiling seed case, at most {} repair attempt(s).\n",
        r.seed, r.mutations_per_case, r.max_repair_attempts
    );

    s.push_str("## Test cases\n\n");
    s.push_str("| Pass | Functions | Characteristics | Generated | Compiled | Failed | Abandoned | Repaired | Mutants |\n");
    s.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    for p in r.passes.iter().chain(std::iter::once(&r.totals)) {
        let name = if std::ptr::eq(p, &r.totals) {
            "**total**".to_string()
        } else {
            p.pass_name.clone()
        };
        let _ = writeln!(
            s,
            "| {name} | {} | {} | {} | {} | {} | {} | {} | {} |",
            p.functions, p.characteristics, p.generated, p.compiled, p.failed, p.abandoned, p.repaired, p.mutants
        );
    }

    let f = &r.findings;
    s.push_str("\n## Findings\n\n");
    let _ = writeln!(
        s,
        "Flagged test cases: {} ({} across compilers or optimization levels, {} across devices; a case flagged on both counts once). Discrepancies: {}. Suppressed cases: {}.\n",
        f.total_flagged, f.compiler_flagged, f.device_flagged, f.discrepancies, r.suppressed_cases
    );
    s.push_str("| Axis | Cases |");
    for k in Kind::ALL {
        let _ = write!(s, " {} |", k.as_str());
    }
    s.push_str("\n|---|---:|");
    for _ in Kind::ALL {
        s.push_str("---:|");
    }
    s.push('\n');
    for a in Axis::ALL {
        let _ = write!(s, "| {} | {} |", a.as_str(), f.by_axis.get(&a).copied().unwrap_or(0));
        for k in Kind::ALL {
            let n = f.by_axis_kind.get(&a).and_then(|m| m.get(&k)).copied().unwrap_or(0);
            let _ = write!(s, " {n} |");
        }
        s.push('\n');
    }
    if !r.flagged.is_empty() {
        s.push_str("\n| Pass | Case | Kind | Axis | Issue class | Witness |\n|---|---|---|---|---|---|\n");
        for c in &r.flagged {
            let class = match c.issue_class {
                IssueClass::ImplIssueOnArch => "implementation issue on an architecture",
                IssueClass::InconsistentAcrossArch => "inconsistent across architectures",
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | `{}` vs `{}` |",
                c.pass_name, c.case_id, c.kind, c.axis, class, c.witness.0, c.witness.1
            );
        }
    }

    let m = &r.matrix;
    s.push_str("\n## Compile and run\n\n");
    let _ = writeln!(
        s,
        "Cases tested: {}, classified: {}. Compile jobs: {}. Run cells: {}.\n",
        m.cases_tested, m.cases_classified, m.compile_jobs, m.run_cells
    );
    s.push_str("| Compile status | Jobs |\n|---|---:|\n");
    for st in ["ok", "error", "timeout"] {
        let _ = writeln!(s, "| {st} | {} |", m.compile_by_status.get(st).copied().unwrap_or(0));
    }
    s.push_str("\n| Run status | Cells |\n|---|---:|\n");
    for st in ["ok", "nonzero_exit", "crash_signal", "timeout", "launch_error"] {
        let _ = writeln!(s, "| {st} | {} |", m.run_by_status.get(st).copied().unwrap_or(0));
    }

    let c = &r.cost;
    let _ = writeln!(
        s,
        "\n## Cost\n\nPricing table version {} (effective {}).\n",
        c.pricing_version, c.pricing_effective_date
    );
    s.push_str("| Stage | Calls | Input tokens | Output tokens | Calls with estimated usage | Cost |\n|---|---:|---:|---:|---:|---:|\n");
    for st in c.stages.iter().chain(std::iter::once(&c.total)) {
        let name = if std::ptr::eq(st, &c.total) {
            "**total**".to_string()
        } else {
            st.stage.clone()
        };
        let _ = writeln!(
            s,
            "| {name} | {} | {} | {} | {} | {} |",
            st.calls,
            st.input_tokens,
            st.output_tokens,
            st.approximate_calls,
            money(&st.cost)
        );
    }
    if !c.unpriced_models.is_empty() {
        let _ = writeln!(s, "\nUnpriced models: {}.", c.unpriced_models.join(", "));
    }
    let _ = writeln!(s, "\nInternal faults: {}.", r.faults);
    s
}
