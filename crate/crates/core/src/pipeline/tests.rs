use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use super::*;
use crate::extract::DefinitionKind;
use crate::provider::{ScriptRule, ScriptedModel};

const GOOD: &str = "```cpp\n#include <sycl/sycl.hpp>\nint main() { return 0; }\n```";

fn function() -> PassFunction {
    PassFunction {
        pass_name: "DeviceGlobals".into(),
        qualified_name: "f".into(),
        kind: DefinitionKind::Function,
        body: "int f() { return 1; }".into(),
        line_span: (1, 1),
        byte_span: (0, 21),
        line_count: 1,
    }
}

fn rule(template: TemplateId, response: &str) -> ScriptRule {
    ScriptRule {
        template,
        pass_name: None,
        contains: None,
        response: response.into(),
        usage: None,
    }
}

struct ScriptedGate {
    outcomes: Vec<bool>,
    calls: Mutex<usize>,
}

impl ScriptedGate {
    fn new(outcomes: &[bool]) -> Self {
        Self {
            outcomes: outcomes.to_vec(),
            calls: Mutex::new(0),
        }
    }
}

impl Gate for ScriptedGate {
    fn compile(&self, _case: &TestCase, _attempt: usize) -> Result<GateResult, PipelineError> {
        let mut calls = self.calls.lock().unwrap();
        let ok = *self.outcomes.get(*calls).or(self.outcomes.last()).unwrap();
        *calls += 1;
        Ok(GateResult {
            ok,
            stderr: if ok { String::new() } else { format!("error: scripted failure {calls}") },
        })
    }
}

fn draft(source: &str) -> TestCase {
    TestCase {
        case_id: "c0".into(),
        pass_name: "DeviceGlobals".into(),
        source: source.into(),
        lineage: Lineage {
            characteristics_id: "ch".into(),
            function_id: "fn".into(),
            features: sample_features(&FeatureCatalog::default(), 1).unwrap(),
            parent: None,
            transcript: Vec::new(),
        },
        status: CaseStatus::Draft,
        abandon_reason: None,
    }
}

#[test]
fn characteristics_pass_through() {
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![rule(TemplateId::Characteristics, "REQ-A")]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    let (ch, x) = generate_characteristics(&function(), &ctx).unwrap();
    assert_eq!(ch.text, "REQ-A");
    assert_eq!(ch.function_name, "f");
    assert!(x.prompt.ends_with("int f() { return 1; }"));
}

#[test]
fn blank_characteristics_are_rejected() {
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![rule(TemplateId::Characteristics, "   ")]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    assert!(matches!(generate_characteristics(&function(), &ctx), Err(PipelineError::EmptyResponse)));
}

#[test]
fn testcase_source_is_the_fenced_block() {
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![rule(TemplateId::Codegen, GOOD)]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    let ch = Characteristics {
        id: "ch".into(),
        pass_name: "DeviceGlobals".into(),
        function_id: "fn".into(),
        function_name: "f".into(),
        text: "Use device_global.".into(),
    };
    let fs = sample_features(&FeatureCatalog::default(), 3).unwrap();
    let (case, x) = generate_testcase("id", &ch, &fs, &ctx).unwrap();
    assert_eq!(case.source, "#include <sycl/sycl.hpp>\nint main() { return 0; }\n");
    assert_eq!(case.status, CaseStatus::Draft);
    assert!(x.prompt.contains("Use device_global.\n\nAdditional requirements"));
    assert!(x.prompt.contains(&fs.memory_access));

    let again = generate_testcase("id", &ch, &fs, &ctx).unwrap().0;
    assert_eq!(case, again);
}

#[test]
fn repair_fast_path() {
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    let out = repair_loop(draft("int main() {}"), &ScriptedGate::new(&[true]), &ctx, 5);
    assert!(out.succeeded);
    assert_eq!(out.attempts, 0);
    assert_eq!(out.final_case.status, CaseStatus::Compiles);
}

#[test]
fn repair_gives_up_after_five_attempts() {
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![rule(TemplateId::Repair, GOOD)]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    let gate = ScriptedGate::new(&[false]);
    let out = repair_loop(draft("int main() {}"), &gate, &ctx, DEFAULT_MAX_REPAIR_ATTEMPTS);
    assert!(!out.succeeded);
    assert!(!out.fault);
    assert_eq!(out.attempts, 5);
    assert_eq!(out.final_case.status, CaseStatus::Abandoned);
    assert_eq!(out.final_case.lineage.transcript.len(), 5);
    assert_eq!(*gate.calls.lock().unwrap(), 6);
}

#[test]
fn repair_succeeds_on_third_compile() {
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![rule(TemplateId::Repair, GOOD)]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    let out = repair_loop(draft("int main() {}"), &ScriptedGate::new(&[false, false, true]), &ctx, 5);
    assert!(out.succeeded);
    assert_eq!(out.attempts, 2);
    let t = &out.final_case.lineage.transcript;
    assert_eq!(t.len(), 2);
    assert_eq!(t[0].error, "error: scripted failure 1");
    assert_eq!(t[1].error, "error: scripted failure 2");
    assert!(t.iter().all(|s| s.fix.contains("int main() { return 0; }")));
    assert_eq!(out.exchanges.len(), 2);
}

#[test]
fn unbalanced_source_never_reaches_the_compiler() {
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![rule(TemplateId::Repair, GOOD)]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    let gate = ScriptedGate::new(&[true]);
    let out = repair_loop(draft("int main() {"), &gate, &ctx, 5);
    assert!(out.succeeded);
    assert_eq!(out.attempts, 1);
    assert!(out.final_case.lineage.transcript[0].error.contains("unbalanced braces"));
    assert_eq!(*gate.calls.lock().unwrap(), 1);
}

#[test]
fn provider_failure_abandons() {
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    let out = repair_loop(draft("int main() {}"), &ScriptedGate::new(&[false]), &ctx, 5);
    assert!(!out.succeeded);
    assert!(out.fault);
    assert_eq!(out.attempts, 1);
    assert!(out.final_case.abandon_reason.unwrap().contains("no scripted response"));
}

#[test]
fn empty_stderr_gets_placeholder() {
    struct Silent;
    impl Gate for Silent {
        fn compile(&self, _: &TestCase, attempt: usize) -> Result<GateResult, PipelineError> {
            Ok(GateResult { ok: attempt > 0, stderr: String::new() })
        }
    }
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![rule(TemplateId::Repair, GOOD)]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    let out = repair_loop(draft("int main() {}"), &Silent, &ctx, 5);
    assert!(out.exchanges[0].prompt.contains(EMPTY_STDERR));
}

#[test]
fn mutation_cardinality_and_lineage() {
    let prompts = PromptSet::builtin();
    let llm = ScriptedModel::new(vec![rule(TemplateId::Mutation, GOOD)]);
    let ctx = GenContext { prompts: &prompts, llm: &llm, retriever: None };
    let mut parent = draft("int main() {}");
    parent.status = CaseStatus::Compiles;
    let catalog = FeatureCatalog::default();
    assert!(mutate(&parent, 0, &catalog, 7, &ctx).unwrap().is_empty());
    let kids = mutate(&parent, 3, &catalog, 7, &ctx).unwrap();
    assert_eq!(kids.len(), 3);
    let seeds: BTreeSet<_> = kids.iter().map(|(k, _)| k.lineage.features.seed).collect();
    assert_eq!(seeds.len(), 3);
    let ids: BTreeSet<_> = kids.iter().map(|(k, _)| k.case_id.clone()).collect();
    assert_eq!(ids.len(), 3);
    assert!(kids.iter().all(|(k, _)| k.lineage.parent.as_deref() == Some("c0") && k.status == CaseStatus::Draft));
    assert!(kids[0].1.prompt.contains("> CODE:\n```\nint main() {}\n```"));
}

#[test]
fn mutation_selections_follow_the_sampling_distribution() {
    // 1,000 draws over 4 entries: sd ≈ 13.7; 250 ± 50 is over 3.5 sigma.
    let catalog = FeatureCatalog::default();
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    for i in 0..1000 {
        let s = sample_features(&catalog, mutation_seed(11, "parent", i)).unwrap();
        *counts.entry(s.data_structure).or_default() += 1;
    }
    assert_eq!(counts.len(), 4);
    assert!(counts.values().all(|n| (200..=300).contains(n)), "{counts:?}");
}
