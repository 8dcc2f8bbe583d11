//! Test assets and reference oracles for ragfuzz.
//!
//! Layout of `assets/`:
//!
//! * `exemplars/`: a pass function, a characteristics answer and a
//!   generated test case, stored verbatim.
//! * `golden/bindings/`: extra binding values used by the prompt goldens.
//! * `golden/prompts/<template>.txt`: rendered prompts, produced by
//!   `oracles/render_prompts.py`.
//! * `extract/`: a synthetic pass file and its expected definitions
//!   (`oracles/extract_fixture.py`).
//! * `chunking/`: a document and its expected chunk boundaries
//!   (`oracles/chunk_reference.py`).
//! * `scenarios/<id>/`: scripted campaigns, see [`scenario`].
//!
//! Files are named after what they contain; nothing is numbered.

use std::path::PathBuf;

use ragfuzz_core::prompt::TemplateId;

pub mod oracle;
pub mod scenario;
pub mod synthetic;

pub use oracle::{brute_force_classify, random_matrix, reference_normalize, OraclePolicy};
pub use scenario::{load_scenario, Scenario, ScenarioError};
pub use synthetic::{synthetic_source, synthetic_sources, ExpectedDefinition, SyntheticSource};

pub fn assets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets")
}

/// Pass name used with the exemplars.
pub const EXEMPLAR_PASS: &str = "DeviceGlobals";

pub const PASS_FUNCTION: &str = include_str!("../assets/exemplars/pass_function_collect_device_global_properties.cpp");
pub const CHARACTERISTICS: &str = include_str!("../assets/exemplars/characteristics_device_globals.md");
pub const GENERATED_CODE: &str = include_str!("../assets/exemplars/generated_device_globals.cpp");
pub const COMPILE_ERROR: &str = include_str!("../assets/golden/bindings/compile_error.txt");
pub const MUTATION_REQUIREMENTS: &str = include_str!("../assets/golden/bindings/mutation_requirements.txt");

pub const EXTRACT_SOURCE: &str = include_str!("../assets/extract/SyntheticLowering.cpp");
pub const EXTRACT_EXPECTED: &str = include_str!("../assets/extract/expected.json");
pub const CHUNK_DOCUMENT: &str = include_str!("../assets/chunking/document.md");
pub const CHUNK_EXPECTED: &str = include_str!("../assets/chunking/expected.json");

/// Rendered prompt for `template` with the golden bindings.
pub fn golden_prompt(template: TemplateId) -> &'static str {
    match template {
        TemplateId::Characteristics => include_str!("../assets/golden/prompts/characteristics.txt"),
        TemplateId::Codegen => include_str!("../assets/golden/prompts/codegen.txt"),
        TemplateId::Repair => include_str!("../assets/golden/prompts/repair.txt"),
        TemplateId::Mutation => include_str!("../assets/golden/prompts/mutation.txt"),
    }
}

