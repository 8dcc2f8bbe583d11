//! Extraction of function, class and namespace definitions from
//! compiler-pass sources.
//!
//! This is a heuristic scanner, not a C++ parser: it masks comments and
//! literals, walks brace groups at file and namespace scope, and classifies
//! the text preceding each `{` with signature patterns. Bodies are always
//! verbatim slices of the input, so preprocessor conditionals and nested
//! lambdas travel inside the definition that contains them.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scan;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("source for pass `{0}` is empty")]
    EmptySource(String),
    #[error("invalid source glob `{pattern}`: {message}")]
    BadGlob { pattern: String, message: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageHint {
    Cxx,
    Other,
}

impl LanguageHint {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("cpp" | "cc" | "cxx" | "c" | "h" | "hpp" | "hh" | "hxx" | "inc") => Self::Cxx,
            _ => Self::Other,
        }
    }
}

/// One compiler-pass source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassSource {
    pub pass_name: String,
    pub file_path: PathBuf,
    pub content: String,
    pub language_hint: LanguageHint,
}

impl PassSource {
    pub fn new(pass_name: impl Into<String>, file_path: impl Into<PathBuf>, content: impl Into<String>) -> Self {
        let file_path = file_path.into();
        Self {
            pass_name: pass_name.into(),
            language_hint: LanguageHint::from_path(&file_path),
            file_path,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefinitionKind {
    Function,
    Method,
    Class,
    Namespace,
}

/// An extracted definition, signature through closing brace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassFunction {
    pub pass_name: String,
    pub qualified_name: String,
    pub kind: DefinitionKind,
    pub body: String,
    /// 1-based inclusive line range.
    pub line_span: (usize, usize),
    /// Byte range of `body` within the source content (end exclusive).
    pub byte_span: (usize, usize),
    pub line_count: usize,
}

/// Extract every file-scope and namespace-nested definition from `source`,
/// ordered by position.
pub fn extract_functions(source: &PassSource) -> Result<Vec<PassFunction>, ExtractError> {
    if source.content.trim().is_empty() {
        return Err(ExtractError::EmptySource(source.pass_name.clone()));
    }
    let masked = scan::mask_str(&source.content);
    let ctx = Ctx {
        source,
        masked: &masked,
        line_starts: line_starts(&source.content),
    };
    let mut out = Vec::new();
    ctx.scan_scope(0, masked.len(), &[], &mut out);
    out.sort_by_key(|f| f.byte_span.0);
    Ok(out)
}

/// Keep definitions with at least `min_lines` lines whose qualified name
/// matches one of `name_patterns` (all names pass when the list is empty).
pub fn filter_candidates(
    functions: &[PassFunction],
    min_lines: usize,
    name_patterns: &[glob::Pattern],
) -> Vec<PassFunction> {
    functions
        .iter()
        .filter(|f| f.line_count >= min_lines)
        .filter(|f| name_patterns.is_empty() || name_patterns.iter().any(|p| p.matches(&f.qualified_name)))
        .cloned()
        .collect()
}

/// Compile glob patterns for [`filter_candidates`].
pub fn compile_patterns(patterns: &[String]) -> Result<Vec<glob::Pattern>, ExtractError> {
    patterns
        .iter()
        .map(|p| {
            glob::Pattern::new(p).map_err(|e| ExtractError::BadGlob {
                pattern: p.clone(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Read every file matched by `globs` (relative to `base_dir`) as a source
/// of `pass_name`. Files are returned in sorted path order.
pub fn load_pass_sources(pass_name: &str, globs: &[String], base_dir: &Path) -> Result<Vec<PassSource>, ExtractError> {
    let mut paths = Vec::new();
    for pattern in globs {
        let full = if Path::new(pattern).is_absolute() {
            pattern.clone()
        } else {
            base_dir.join(pattern).to_string_lossy().into_owned()
        };
        let entries = glob::glob(&full).map_err(|e| ExtractError::BadGlob {
            pattern: pattern.clone(),
            message: e.to_string(),
        })?;
        for entry in entries {
            let path = entry.map_err(|e| ExtractError::Io {
                path: e.path().to_path_buf(),
                source: std::io::Error::new(e.error().kind(), e.error().to_string()),
            })?;
            if path.is_file() {
                paths.push(path);
            }
        }
    }
    paths.sort();
    paths.dedup();
    paths
        .into_iter()
        .map(|path| {
            let content = std::fs::read_to_string(&path).map_err(|source| ExtractError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(PassSource::new(pass_name, path, content))
        })
        .collect()
}

fn line_starts(text: &str) -> Vec<usize> {
    std::iter::once(0)
        .chain(text.match_indices('\n').map(|(i, _)| i + 1))
        .collect()
}

enum Header {
    Namespace { name: Option<String>, anchor: usize },
    Linkage,
    Class { name: String, anchor: usize },
    Function { name: String, anchor: usize },
    Other,
}

struct Ctx<'a> {
    source: &'a PassSource,
    masked: &'a str,
    line_starts: Vec<usize>,
}

impl Ctx<'_> {
    fn line_of(&self, offset: usize) -> usize {
        match self.line_starts.binary_search(&offset) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }

    fn scan_scope(&self, from: usize, to: usize, prefix: &[String], out: &mut Vec<PassFunction>) {
        let m = self.masked.as_bytes();
        let mut header_start = from;
        let mut i = from;
        while i < to {
            match m[i] {
                b';' => {
                    header_start = i + 1;
                    i += 1;
                }
                b'(' | b'[' => match scan::matching_close(m, i) {
                    Some(close) if close < to => i = close + 1,
                    _ => return,
                },
                b'{' => {
                    let Some(close) = scan::matching_close(m, i).filter(|&c| c < to) else {
                        // Unbalanced from here on; nothing further is reliable.
                        return;
                    };
                    let header = &self.masked[header_start..i];
                    if is_ctor_member_init(header) {
                        i = close + 1;
                        continue;
                    }
                    match classify_header(header, &self.source.content[header_start..i]) {
                        Header::Namespace { name, anchor } => {
                            let qualified = match &name {
                                Some(n) => join(prefix, n),
                                None => "(anonymous namespace)".to_string(),
                            };
                            self.record(header_start, header_start + anchor, close + 1, qualified, DefinitionKind::Namespace, out);
                            let mut inner = prefix.to_vec();
                            if let Some(n) = name {
                                inner.push(n);
                            }
                            self.scan_scope(i + 1, close, &inner, out);
                        }
                        Header::Linkage => self.scan_scope(i + 1, close, prefix, out),
                        Header::Class { name, anchor } => {
                            let mut end = close + 1;
                            let rest = &m[end..to];
                            if let Some(p) = rest.iter().position(|b| !b.is_ascii_whitespace()) {
                                if rest[p] == b';' {
                                    end += p + 1;
                                }
                            }
                            self.record(header_start, header_start + anchor, end, join(prefix, &name), DefinitionKind::Class, out);
                        }
                        Header::Function { name, anchor } => {
                            let kind = if name.contains("::") {
                                DefinitionKind::Method
                            } else {
                                DefinitionKind::Function
                            };
                            self.record(header_start, header_start + anchor, close + 1, join(prefix, &name), kind, out);
                        }
                        Header::Other => {}
                    }
                    header_start = close + 1;
                    i = close + 1;
                }
                b'}' => return,
                _ => i += 1,
            }
        }
    }

    /// Push a definition whose signature contains `anchor` and ends at `end`.
    fn record(
        &self,
        header_start: usize,
        anchor: usize,
        end: usize,
        qualified_name: String,
        kind: DefinitionKind,
        out: &mut Vec<PassFunction>,
    ) {
        let start = self.signature_start(header_start, anchor);
        let (first, last) = (self.line_of(start), self.line_of(end - 1));
        out.push(PassFunction {
            pass_name: self.source.pass_name.clone(),
            qualified_name,
            kind,
            body: self.source.content[start..end].to_string(),
            line_span: (first, last),
            byte_span: (start, end),
            line_count: last - first + 1,
        });
    }

    /// Start of the signature: the anchor's line, extended upward over
    /// adjacent lines that look like return types or template heads.
    fn signature_start(&self, header_start: usize, anchor: usize) -> usize {
        let m = self.masked.as_bytes();
        let mut line = self.line_of(anchor);
        while line > 1 {
            let prev_start = self.line_starts[line - 2];
            let prev_end = self.line_starts[line - 1] - 1;
            if prev_start < header_start {
                break;
            }
            let text = &m[prev_start..prev_end];
            let blank = text.iter().all(|b| b.is_ascii_whitespace());
            if blank || text.iter().any(|b| matches!(b, b'(' | b')' | b';' | b'}')) {
                break;
            }
            line -= 1;
        }
        let from = self.line_starts[line - 1].max(header_start);
        from + m[from..anchor].iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(anchor - from)
    }
}

fn join(prefix: &[String], name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{}::{}", prefix.join("::"), name)
    }
}

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static regex"))
}

const KEYWORDS: &[&str] = &[
    "if", "for", "while", "switch", "return", "catch", "sizeof", "do", "else", "case", "new", "delete", "throw",
    "static_assert", "decltype", "alignas", "alignof", "__attribute__", "__declspec", "noexcept", "requires",
];

/// Offset of the constructor-initializer `:` in a header, if any: a lone
/// colon at paren depth 0 that follows a parameter list.
fn ctor_colon(header: &str) -> Option<usize> {
    let b = header.as_bytes();
    let mut depth = 0i32;
    let mut seen_params = false;
    for (i, &c) in b.iter().enumerate() {
        match c {
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => {
                depth -= 1;
                if depth == 0 && c == b')' {
                    seen_params = true;
                }
            }
            b':' if depth == 0 && seen_params => {
                let prev = i.checked_sub(1).map(|j| b[j]);
                let next = b.get(i + 1).copied();
                if prev != Some(b':') && next != Some(b':') {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// `Foo() : member{init}`: the brace belongs to an initializer list.
fn is_ctor_member_init(header: &str) -> bool {
    if ctor_colon(header).is_none() {
        return false;
    }
    header
        .trim_end()
        .bytes()
        .last()
        .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'>')
}

/// Strip leading `template <...>` heads, returning the offset past them.
fn skip_template_heads(header: &str) -> usize {
    static TEMPLATE: OnceLock<Regex> = OnceLock::new();
    let template = re(&TEMPLATE, r"^\s*template\s*<");
    let b = header.as_bytes();
    let mut pos = 0;
    while let Some(m) = template.find(&header[pos..]) {
        let mut depth = 0i32;
        let mut end = None;
        for (k, &c) in b[pos + m.end() - 1..].iter().enumerate() {
            match c {
                b'<' => depth += 1,
                b'>' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(pos + m.end() - 1 + k + 1);
                        break;
                    }
                }
                _ => {}
            }
        }
        match end {
            Some(e) => pos = e,
            None => break,
        }
    }
    pos
}

fn classify_header(masked: &str, original: &str) -> Header {
    static NAMESPACE: OnceLock<Regex> = OnceLock::new();
    static CLASS: OnceLock<Regex> = OnceLock::new();
    static EXTERN: OnceLock<Regex> = OnceLock::new();
    static NAME: OnceLock<Regex> = OnceLock::new();
    static TRAILING: OnceLock<Regex> = OnceLock::new();

    if masked.trim().is_empty() {
        return Header::Other;
    }
    let namespace = re(&NAMESPACE, r"^\s*(?:inline\s+)?(namespace)\b\s*([A-Za-z_][\w:\s]*)?\s*$");
    if let Some(c) = namespace.captures(masked) {
        let name = c
            .get(2)
            .map(|n| n.as_str().split_whitespace().collect::<String>())
            .filter(|n| !n.is_empty());
        return Header::Namespace { name, anchor: c.get(1).unwrap().start() };
    }
    // The language literal is blanked in the mask, so read it from the
    // original right after `extern`; anything else must be masked away.
    let linkage = re(&EXTERN, r"^\s*extern\b");
    if let Some(m) = linkage.find(masked) {
        let tail = &original[m.end()..];
        let at = m.end() + (tail.len() - tail.trim_start().len());
        let literal = ["\"C\"", "\"C++\""].into_iter().find(|l| original[at..].starts_with(l));
        if literal.is_some_and(|l| masked[at + l.len()..].trim().is_empty()) {
            return Header::Linkage;
        }
    }

    let body_from = skip_template_heads(masked);
    let rest = &masked[body_from..];

    let class = re(&CLASS, r"^\s*(class|struct|union)\b");
    if let Some(c) = class.captures(rest) {
        let decl = &rest[c.get(1).unwrap().end()..];
        if decl.contains('=') {
            return Header::Other;
        }
        let decl = match decl.find(|ch| ch == ':').filter(|&i| !decl[i..].starts_with("::")) {
            Some(i) => &decl[..i],
            None => decl,
        };
        let decl = strip_angle_groups(decl);
        let name = decl
            .split_whitespace()
            .rev()
            .find(|w| *w != "final" && w.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_'));
        return match name {
            Some(n) => Header::Class {
                name: n.to_string(),
                anchor: body_from + c.get(1).unwrap().start(),
            },
            None => Header::Other,
        };
    }
    if rest.trim_start().starts_with("enum") || rest.trim_start().starts_with("typedef") {
        return Header::Other;
    }

    // Function: find the parameter list, the first top-level paren group
    // preceded by a plausible (qualified) name.
    let signature = match ctor_colon(rest) {
        Some(i) => &rest[..i],
        None => rest,
    };
    let name_re = re(
        &NAME,
        r"(~?[A-Za-z_]\w*(?:\s*<[^<>;{}]*>)?(?:\s*::\s*~?[A-Za-z_]\w*(?:\s*<[^<>;{}]*>)?)*|operator\s*[^\s\w(]+|operator\s*\(\s*\)|operator\s+[A-Za-z_][\w:\s\*&]*)\s*$",
    );
    let trailing_re = re(
        &TRAILING,
        r"^(?:\s*(?:const|volatile|noexcept\s*(?:\(\))?|override|final|&&|&|try|mutable|constexpr|[A-Z][A-Z0-9_]+(?:\s*\(\))?|->.*|requires.*))*\s*$",
    );
    let sb = signature.as_bytes();
    let mut i = 0;
    while i < sb.len() {
        if sb[i] != b'(' {
            i += 1;
            continue;
        }
        let Some(close) = scan::matching_close(sb, i) else {
            return Header::Other;
        };
        let before = &signature[..i];
        if let Some(c) = name_re.captures(before) {
            let raw = c.get(1).unwrap();
            let name: String = raw.as_str().split_whitespace().collect();
            let base = name.rsplit("::").next().unwrap_or(&name);
            let lead = &before[..raw.start()];
            let is_operator_call = name == "operator" || name.ends_with("::operator");
            if !KEYWORDS.contains(&base) && !is_operator_call && !lead.contains('=') && !lead.trim_end().ends_with('.') {
                let trailing = collapse_paren_groups(&signature[close + 1..]);
                if trailing_re.is_match(&trailing) {
                    return Header::Function {
                        name,
                        anchor: body_from + raw.start(),
                    };
                }
            }
        }
        i = close + 1;
    }
    Header::Other
}

fn strip_angle_groups(text: &str) -> String {
    let mut depth = 0i32;
    text.chars()
        .filter(|&c| {
            match c {
                '<' => depth += 1,
                '>' => depth -= 1,
                _ => return depth <= 0,
            }
            false
        })
        .collect()
}

fn collapse_paren_groups(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut depth = 0i32;
    for c in text.chars() {
        match c {
            '(' => {
                if depth == 0 {
                    out.push('(');
                }
                depth += 1;
            }
            ')' => {
                depth -= 1;
                if depth == 0 {
                    out.push(')');
                }
            }
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(content: &str) -> PassSource {
        PassSource::new("P", "p.cpp", content)
    }

    fn names(content: &str) -> Vec<(String, DefinitionKind)> {
        extract_functions(&src(content))
            .unwrap()
            .into_iter()
            .map(|f| (f.qualified_name, f.kind))
            .collect()
    }

    #[test]
    fn empty_source_is_an_error() {
        assert!(matches!(extract_functions(&src("")), Err(ExtractError::EmptySource(_))));
        assert!(matches!(extract_functions(&src("  \n\t")), Err(ExtractError::EmptySource(_))));
    }

    #[test]
    fn two_one_line_functions() {
        let fs = extract_functions(&src("int f(){return 0;}\nint g(){return 1;}\n")).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(fs[0].qualified_name, "f");
        assert_eq!(fs[0].body, "int f(){return 0;}");
        assert_eq!(fs[1].qualified_name, "g");
        assert_eq!(fs[1].line_span, (2, 2));
        assert_eq!(fs[1].line_count, 1);
    }

    #[test]
    fn no_definitions_is_empty() {
        assert!(extract_functions(&src("int x = 3;\nextern int y;\n")).unwrap().is_empty());
    }

    #[test]
    fn namespaces_classes_and_methods() {
        let got = names(
            "namespace llvm {\nclass Foo : public Bar<Foo> {\n  int x{0};\n  void m() {}\n};\n\
             PreservedAnalyses Foo::run(Module &M,\n    ModuleAnalysisManager &) {\n  return {};\n}\n}\n",
        );
        assert_eq!(
            got,
            vec![
                ("llvm".to_string(), DefinitionKind::Namespace),
                ("llvm::Foo".to_string(), DefinitionKind::Class),
                ("llvm::Foo::run".to_string(), DefinitionKind::Method),
            ]
        );
    }

    #[test]
    fn anonymous_namespace_adds_no_prefix() {
        let got = names("namespace {\nstatic bool\nisX(int a) { return a > 0; }\n} // namespace\n");
        assert_eq!(got[0], ("(anonymous namespace)".to_string(), DefinitionKind::Namespace));
        assert_eq!(got[1], ("isX".to_string(), DefinitionKind::Function));
        let f = &extract_functions(&src("namespace {\nstatic bool\nisX(int a) { return a > 0; }\n}\n")).unwrap()[1];
        assert!(f.body.starts_with("static bool\nisX"));
    }

    #[test]
    fn templates_are_functions_and_include_their_head() {
        let content = "// doc\ntemplate <typename T, int N = 3>\nT twice(T v) { return v + v; }\n";
        let fs = extract_functions(&src(content)).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].kind, DefinitionKind::Function);
        assert!(fs[0].body.starts_with("template <typename T"));
        assert_eq!(fs[0].line_span, (2, 3));
    }

    #[test]
    fn constructor_initializer_braces_are_not_bodies() {
        let got = names("Foo::Foo(int a) : x{a}, y(2), z{a, 1} {\n  init();\n}\n");
        assert_eq!(got, vec![("Foo::Foo".to_string(), DefinitionKind::Method)]);
    }

    #[test]
    fn skips_initializers_enums_and_lambdas() {
        let got = names(
            "static const int T[] = {1, 2};\nenum E { A, B };\nauto l = [](int v) { return v; };\n\
             struct S s = {1};\nvoid real() const noexcept(true) { }\n",
        );
        assert_eq!(got, vec![("real".to_string(), DefinitionKind::Function)]);
    }

    #[test]
    fn preprocessor_and_comments_pass_through_verbatim() {
        let content = "void f() {\n#if FOO\n  int a = '{';\n#endif\n  /* } */\n}\n";
        let fs = extract_functions(&src(content)).unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].body, content.trim_end());
    }

    #[test]
    fn unbalanced_region_is_skipped() {
        let got = names("int ok() { return 1; }\nint broken() {\n  if (x) {\n");
        assert_eq!(got, vec![("ok".to_string(), DefinitionKind::Function)]);
    }

    #[test]
    fn macro_line_is_not_part_of_signature() {
        let fs = extract_functions(&src("INITIALIZE_PASS(A, \"a\", \"b\", false, false)\nbool run(Module &M) {\n  return true;\n}\n")).unwrap();
        assert_eq!(fs.len(), 1);
        assert!(fs[0].body.starts_with("bool run("));
    }

    #[test]
    fn extern_c_blocks_are_transparent() {
        let got = names("extern \"C\" {\nint c_api(void) { return 0; }\n}\n");
        assert_eq!(got, vec![("c_api".to_string(), DefinitionKind::Function)]);
    }

    #[test]
    fn extern_c_after_a_comment_is_still_linkage() {
        let got = names("namespace a {
}  // namespace a

extern \"C++\" {
int c_api(void) { return 0; }
}
");
        assert_eq!(
            got,
            vec![
                ("a".to_string(), DefinitionKind::Namespace),
                ("c_api".to_string(), DefinitionKind::Function)
            ]
        );
    }

    #[test]
    fn filter_by_lines_and_patterns() {
        let fs = extract_functions(&src("int f() {\n return 0;\n}\nint collectA() { return 1; }\n")).unwrap();
        assert_eq!(filter_candidates(&fs, 1, &[]), fs);
        let kept = filter_candidates(&fs, 2, &[]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].qualified_name, "f");
        let pats = compile_patterns(&["collect*".to_string()]).unwrap();
        let kept = filter_candidates(&fs, 1, &pats);
        assert_eq!(kept[0].qualified_name, "collectA");
    }
}
