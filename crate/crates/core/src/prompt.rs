//! Query templates and placeholder substitution.
//!
//! Templates are plain text files with `{Name}` placeholders. The built-in
//! set is compiled in from `prompts/`; a campaign may point at a directory
//! of replacements with the same file names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PASS_NAME: &str = "Optimization Pass Name";
/// Second spelling of the pass-name slot, bound from [`PASS_NAME`].
pub const PASS_NAME_ALIAS: &str = "Name of optimization pass";
pub const FUNCTION_CODE: &str = "Code of function in optimization pass";
pub const REQS: &str = "REQS";
pub const CODES: &str = "CODES";
pub const GENERATED_CODE: &str = "Generated code";
pub const COMPILATION_ERROR: &str = "Compilation Error";

const KNOWN: [&str; 7] = [PASS_NAME, PASS_NAME_ALIAS, FUNCTION_CODE, REQS, CODES, GENERATED_CODE, COMPILATION_ERROR];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("missing binding for `{0}`")]
    MissingBinding(String),
    #[error("binding `{0}` is empty")]
    EmptyBinding(String),
    #[error("binding `{name}` contains the placeholder marker `{marker}`")]
    MarkerInBinding { name: String, marker: String },
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("template `{template}`: {reason}")]
    InvalidTemplate { template: String, reason: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Characteristics,
    Codegen,
    Repair,
    Mutation,
}

impl TemplateId {
    pub const ALL: [TemplateId; 4] = [
        TemplateId::Characteristics,
        TemplateId::Codegen,
        TemplateId::Repair,
        TemplateId::Mutation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::Characteristics => "characteristics",
            TemplateId::Codegen => "codegen",
            TemplateId::Repair => "repair",
            TemplateId::Mutation => "mutation",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.txt", self.as_str())
    }

    /// Binding names a caller must supply (aliases excluded).
    pub fn required_bindings(self) -> &'static [&'static str] {
        match self {
            TemplateId::Characteristics => &[PASS_NAME, FUNCTION_CODE],
            TemplateId::Codegen => &[PASS_NAME, REQS],
            TemplateId::Repair => &[GENERATED_CODE, COMPILATION_ERROR],
            TemplateId::Mutation => &[CODES, REQS],
        }
    }

    fn builtin_body(self) -> &'static str {
        match self {
            TemplateId::Characteristics => include_str!("../prompts/characteristics.txt"),
            TemplateId::Codegen => include_str!("../prompts/codegen.txt"),
            TemplateId::Repair => include_str!("../prompts/repair.txt"),
            TemplateId::Mutation => include_str!("../prompts/mutation.txt"),
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TemplateId {
    type Err = PromptError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| PromptError::UnknownTemplate(s.to_string()))
    }
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([A-Za-z][A-Za-z ]*)\}").unwrap())
}

fn marker(name: &str) -> String {
    format!("{{{name}}}")
}

/// The slot a placeholder in the body is filled from.
fn binding_for(placeholder: &str) -> &str {
    if placeholder == PASS_NAME_ALIAS {
        PASS_NAME
    } else {
        placeholder
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub template_id: TemplateId,
    pub body: String,
    pub required_placeholders: BTreeSet<String>,
}

impl PromptTemplate {
    pub fn new(template_id: TemplateId, body: impl Into<String>) -> Result<Self, PromptError> {
        let body = body.into();
        let invalid = |reason: String| PromptError::InvalidTemplate {
            template: template_id.to_string(),
            reason,
        };
        let mut found = BTreeSet::new();
        for cap in placeholder_re().captures_iter(&body) {
            let name = &cap[1];
            if !KNOWN.contains(&name) {
                return Err(invalid(format!("unknown placeholder `{{{name}}}`")));
            }
            found.insert(binding_for(name).to_string());
        }
        for required in template_id.required_bindings() {
            if !found.contains(*required) {
                return Err(invalid(format!("missing placeholder for `{required}`")));
            }
        }
        let extra: Vec<_> = found
            .iter()
            .filter(|f| !template_id.required_bindings().contains(&f.as_str()))
            .collect();
        if let Some(name) = extra.first() {
            return Err(invalid(format!("placeholder `{name}` does not belong to this template")));
        }
        Ok(Self {
            template_id,
            body,
            required_placeholders: found,
        })
    }

    /// Replace every placeholder with its bound value in one left-to-right
    /// pass; substituted text is never rescanned.
    pub fn render(&self, bindings: &BTreeMap<String, String>) -> Result<RenderedPrompt, PromptError> {
        for name in &self.required_placeholders {
            let value = bindings.get(name).ok_or_else(|| PromptError::MissingBinding(name.clone()))?;
            if value.trim().is_empty() {
                return Err(PromptError::EmptyBinding(name.clone()));
            }
            if let Some(m) = KNOWN.iter().map(|k| marker(k)).find(|m| value.contains(m.as_str())) {
                return Err(PromptError::MarkerInBinding {
                    name: name.clone(),
                    marker: m,
                });
            }
        }
        let text = placeholder_re()
            .replace_all(&self.body, |cap: &regex::Captures<'_>| bindings[binding_for(&cap[1])].clone())
            .into_owned();
        let used = self
            .required_placeholders
            .iter()
            .map(|k| (k.clone(), bindings[k].clone()))
            .collect();
        Ok(RenderedPrompt {
            template_id: self.template_id,
            text,
            bindings: used,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub template_id: TemplateId,
    pub text: String,
    pub bindings: BTreeMap<String, String>,
}

/// One template per [`TemplateId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    templates: BTreeMap<TemplateId, PromptTemplate>,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PromptSet {
    pub fn builtin() -> Self {
        let templates = TemplateId::ALL
            .into_iter()
            .map(|id| (id, PromptTemplate::new(id, id.builtin_body()).expect("bundled template is valid")))
            .collect();
        Self { templates }
    }

    /// Built-in templates overridden by any `<id>.txt` present in `dir`.
    pub fn load(dir: &Path) -> Result<Self, PromptError> {
        if !dir.is_dir() {
            return Err(PromptError::Io {
                path: dir.to_path_buf(),
                message: "prompt directory not found".into(),
            });
        }
        let mut set = Self::builtin();
        for id in TemplateId::ALL {
            let path = dir.join(id.file_name());
            if path.is_file() {
                let body = std::fs::read_to_string(&path).map_err(|e| PromptError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                set.templates.insert(id, PromptTemplate::new(id, body)?);
            }
        }
        Ok(set)
    }

    pub fn template(&self, id: TemplateId) -> &PromptTemplate {
        &self.templates[&id]
    }

    pub fn render(&self, id: TemplateId, bindings: &BTreeMap<String, String>) -> Result<RenderedPrompt, PromptError> {
        self.template(id).render(bindings)
    }

    /// Render by template name, e.g. from a scenario file.
    pub fn render_named(&self, id: &str, bindings: &BTreeMap<String, String>) -> Result<RenderedPrompt, PromptError> {
        self.render(id.parse()?, bindings)
    }

    pub fn characteristics_prompt(&self, pass_name: &str, function_code: &str) -> Result<RenderedPrompt, PromptError> {
        self.render(TemplateId::Characteristics, &bind(&[(PASS_NAME, pass_name), (FUNCTION_CODE, function_code)]))
    }

    pub fn codegen_prompt(&self, pass_name: &str, reqs: &str) -> Result<RenderedPrompt, PromptError> {
        self.render(TemplateId::Codegen, &bind(&[(PASS_NAME, pass_name), (REQS, reqs)]))
    }

    pub fn repair_prompt(&self, code: &str, error: &str) -> Result<RenderedPrompt, PromptError> {
        self.render(TemplateId::Repair, &bind(&[(GENERATED_CODE, code), (COMPILATION_ERROR, error)]))
    }

    pub fn mutation_prompt(&self, code: &str, reqs: &str) -> Result<RenderedPrompt, PromptError> {
        self.render(TemplateId::Mutation, &bind(&[(CODES, code), (REQS, reqs)]))
    }
}

pub fn bind(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// True if `text` still contains any placeholder marker.
pub fn has_placeholder_marker(text: &str) -> bool {
    KNOWN.iter().any(|k| text.contains(&marker(k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_templates_have_no_trailing_newline() {
        for id in TemplateId::ALL {
            assert!(!id.builtin_body().ends_with('\n'), "{id}");
        }
    }

    #[test]
    fn characteristics_substitutes_pass_name() {
        let p = PromptSet::builtin().characteristics_prompt("P", "int f(){}").unwrap();
        assert!(p.text.contains("trigger the optimization pass P in LLVM"));
        assert!(p.text.ends_with("\nint f(){}"));
        assert!(p.text.contains("WITHOUT EXPLICITLY CALLING THE FUNCTION ITSELF"));
    }

    #[test]
    fn codegen_fills_alias_and_reqs() {
        let p = PromptSet::builtin().codegen_prompt("DeviceGlobals", "R1\nR2").unwrap();
        assert!(p.text.contains("sycl optimization DeviceGlobals\n"));
        assert!(p.text.contains("```\nR1\nR2\n```"));
        assert!(p.text.contains("ALL GENERATED CODE MUST BE COMPLETE AND MUST COMPILE CORRECTLY."));
        assert!(p.text.contains("#include <sycl/sycl.hpp>"));
        assert!(!has_placeholder_marker(&p.text));
    }

    #[test]
    fn repair_keeps_code_before_error() {
        let p = PromptSet::builtin().repair_prompt("CODE_X", "ERR_Y").unwrap();
        let (c, e) = (p.text.find("CODE_X").unwrap(), p.text.find("ERR_Y").unwrap());
        assert!(c < e);
        assert!(p.text.contains("Make sure to use namespce sycl::ext::oneapi::experimental for device global."));
    }

    #[test]
    fn mutation_fills_both_fences() {
        let p = PromptSet::builtin().mutation_prompt("int main(){}", "use USM").unwrap();
        assert!(p.text.contains("> CODE:\n```\nint main(){}\n```\n> Requirements:\n```\nuse USM\n```"));
    }

    #[test]
    fn missing_and_empty_bindings() {
        let set = PromptSet::builtin();
        let err = set.render(TemplateId::Codegen, &bind(&[(PASS_NAME, "P")])).unwrap_err();
        assert_eq!(err, PromptError::MissingBinding("REQS".into()));
        let err = set.codegen_prompt("P", "  ").unwrap_err();
        assert_eq!(err, PromptError::EmptyBinding("REQS".into()));
        assert!(matches!(set.render_named("nope", &BTreeMap::new()), Err(PromptError::UnknownTemplate(_))));
    }

    #[test]
    fn values_are_not_rescanned() {
        let set = PromptSet::builtin();
        let err = set.repair_prompt("x {REQS} y", "e").unwrap_err();
        assert!(matches!(err, PromptError::MarkerInBinding { .. }));
        // Braces that are not markers pass through untouched.
        let p = set.repair_prompt("int main() { return {0}; }", "{Error}").unwrap();
        assert!(p.text.contains("int main() { return {0}; }"));
        assert!(p.text.contains("{Error}"));
    }

    #[test]
    fn templates_reject_unknown_or_missing_placeholders() {
        assert!(PromptTemplate::new(TemplateId::Repair, "{Generated code} {Compilation Error} {Bogus}").is_err());
        assert!(PromptTemplate::new(TemplateId::Repair, "{Generated code} only").is_err());
        assert!(PromptTemplate::new(TemplateId::Repair, "{Generated code} {Compilation Error} {REQS}").is_err());
    }

    #[test]
    fn directory_overrides_single_template() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("repair.txt"), "fix {Generated code} given {Compilation Error}").unwrap();
        let set = PromptSet::load(dir.path()).unwrap();
        assert_eq!(set.repair_prompt("a", "b").unwrap().text, "fix a given b");
        assert_eq!(set.template(TemplateId::Codegen), PromptSet::builtin().template(TemplateId::Codegen));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rendering_is_pure_and_marker_free(code in "[ -~\n]{1,200}", err in "[ -~\n]{1,200}") {
                prop_assume!(!code.trim().is_empty() && !err.trim().is_empty());
                prop_assume!(!has_placeholder_marker(&code) && !has_placeholder_marker(&err));
                let set = PromptSet::builtin();
                let a = set.repair_prompt(&code, &err).unwrap();
                let b = set.repair_prompt(&code, &err).unwrap();
                prop_assert_eq!(&a, &b);
                prop_assert!(!has_placeholder_marker(&a.text));
            }
        }
    }
}
