//! Seeded generator of C++ pass sources that records the definitions it
//! writes, so extraction can be checked against ground truth.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ragfuzz_core::extract::{DefinitionKind, PassSource};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedDefinition {
    pub qualified_name: String,
    pub kind: DefinitionKind,
    /// 1-based inclusive.
    pub line_span: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct SyntheticSource {
    pub source: PassSource,
    /// In source order.
    pub expected: Vec<ExpectedDefinition>,
}

struct Writer {
    rng: ChaCha8Rng,
    lines: Vec<String>,
    expected: Vec<ExpectedDefinition>,
    counter: usize,
}

const STATEMENTS: &[&str] = &[
    "Count += 1;",
    "errs() << \"open { brace\";",
    "// stray } in a comment",
    "/* { block comment } */ Count -= 1;",
    "char C = '{';",
    "auto L = [&](int A) { return A + Count; };",
    "if (Count > 2) { Count = 0; }",
    "const char *Raw = R\"x(raw { text)x\";",
    "for (int I = 0; I < 4; ++I) {\n    Count += I;\n  }",
];

impl Writer {
    fn line(&mut self) -> usize {
        self.lines.len() + 1
    }

    fn push(&mut self, text: impl Into<String>) {
        let text = text.into();
        self.lines.extend(text.split('\n').map(String::from));
    }

    fn name(&mut self, stem: &str) -> String {
        self.counter += 1;
        format!("{stem}{:02}", self.counter)
    }

    fn body(&mut self, indent: &str) {
        let n = self.rng.gen_range(0..6);
        for _ in 0..n {
            let s = STATEMENTS.choose(&mut self.rng).unwrap();
            let s = s.replace("\n  ", &format!("\n{indent}  "));
            self.push(format!("{indent}  {s}"));
        }
    }

    fn record(&mut self, prefix: &[String], name: &str, kind: DefinitionKind, start: usize) {
        let qualified = if prefix.is_empty() {
            name.to_string()
        } else {
            format!("{}::{name}", prefix.join("::"))
        };
        let end = self.lines.len();
        self.expected.push(ExpectedDefinition {
            qualified_name: qualified,
            kind,
            line_span: (start, end),
        });
    }

    fn function(&mut self, prefix: &[String], indent: &str) {
        let name = self.name("lowerValue");
        let start = self.line();
        match self.rng.gen_range(0..4) {
            0 => self.push(format!("{indent}void {name}(Function &F) {{")),
            1 => {
                self.push(format!("{indent}static inline bool"));
                self.push(format!("{indent}{name}(Module &M,"));
                self.push(format!("{indent}    unsigned Depth) {{"));
            }
            2 => {
                self.push(format!("{indent}template <typename T, int N = 2>"));
                self.push(format!("{indent}T {name}(const std::array<T, N> &Values) {{"));
            }
            _ => self.push(format!("{indent}auto {name}(int X) -> int {{")),
        }
        self.body(indent);
        self.push(format!("{indent}}}"));
        self.record(prefix, &name, DefinitionKind::Function, start);
    }

    fn class(&mut self, prefix: &[String], indent: &str) -> String {
        let name = self.name("Visitor");
        let start = self.line();
        self.push(format!("{indent}class {name} : public PassInfoMixin<{name}> {{"));
        self.push(format!("{indent}public:"));
        self.push(format!("{indent}  explicit {name}(int X) : Member{{X}} {{}}"));
        self.push(format!("{indent}  void visit(Instruction &I) {{ Member += 1; }}"));
        self.push(format!("{indent}  int run(Module &M);"));
        self.push(format!("{indent}private:"));
        self.push(format!("{indent}  int Member;"));
        self.push(format!("{indent}}};"));
        self.record(prefix, &name, DefinitionKind::Class, start);
        name
    }

    fn methods(&mut self, prefix: &[String], indent: &str, class: &str) {
        let start = self.line();
        self.push(format!("{indent}int {class}::run(Module &M) {{"));
        self.body(indent);
        self.push(format!("{indent}  return Member;"));
        self.push(format!("{indent}}}"));
        self.record(prefix, &format!("{class}::run"), DefinitionKind::Method, start);
        if self.rng.gen_bool(0.5) {
            self.push("");
            let start = self.line();
            self.push(format!("{indent}{class}::{class}(const {class} &Other)"));
            self.push(format!("{indent}    : Member{{Other.Member}} {{"));
            self.body(indent);
            self.push(format!("{indent}}}"));
            self.record(prefix, &format!("{class}::{class}"), DefinitionKind::Method, start);
        }
    }

    fn noise(&mut self, indent: &str) {
        let n = self.counter;
        match self.rng.gen_range(0..4) {
            0 => self.push(format!("{indent}int helperDecl{n}(int);")),
            1 => self.push(format!("{indent}static const char *Names{n}[] = {{\"a\", \"b\"}};")),
            2 => self.push(format!("{indent}// {{ unmatched brace in a comment")),
            _ => self.push(format!("{indent}#define WRAP{n}(X) {{ X }}")),
        }
    }

    fn items(&mut self, prefix: &[String], indent: &str, depth: usize) {
        let count = self.rng.gen_range(1..5);
        for _ in 0..count {
            if self.rng.gen_bool(0.3) {
                self.noise(indent);
            }
            match self.rng.gen_range(0..10) {
                0..=3 => self.function(prefix, indent),
                4 | 5 => {
                    let class = self.class(prefix, indent);
                    self.push("");
                    self.methods(prefix, indent, &class);
                }
                6 | 7 if depth < 2 => self.namespace(prefix, indent, depth),
                8 if depth == 0 => {
                    self.push(format!("{indent}extern \"C\" {{"));
                    self.function(prefix, indent);
                    self.push(format!("{indent}}}"));
                }
                _ => self.function(prefix, indent),
            }
            self.push("");
        }
    }

    fn namespace(&mut self, prefix: &[String], indent: &str, depth: usize) {
        let start = self.line();
        let anonymous = self.rng.gen_bool(0.2);
        let name = if anonymous { None } else { Some(self.name("impl")) };
        match &name {
            Some(n) => self.push(format!("{indent}namespace {n} {{")),
            None => self.push(format!("{indent}namespace {{")),
        }
        let slot = self.expected.len();
        let mut inner = prefix.to_vec();
        if let Some(n) = &name {
            inner.push(n.clone());
        }
        self.items(&inner, indent, depth + 1);
        self.push(format!("{indent}}} // namespace"));
        let qualified = match &name {
            Some(n) if prefix.is_empty() => n.clone(),
            Some(n) => format!("{}::{n}", prefix.join("::")),
            None => "(anonymous namespace)".to_string(),
        };
        let end = self.lines.len();
        self.expected.insert(
            slot,
            ExpectedDefinition {
                qualified_name: qualified,
                kind: DefinitionKind::Namespace,
                line_span: (start, end),
            },
        );
    }
}

/// Source number `index` of the family generated from `seed`.
pub fn synthetic_source(seed: u64, index: usize) -> SyntheticSource {
    let mut w = Writer {
        rng: ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
        lines: Vec::new(),
        expected: Vec::new(),
        counter: 0,
    };
    w.push("#include \"llvm/IR/Module.h\"");
    w.push("");
    w.push("using namespace llvm;");
    w.push("");
    w.items(&[], "", 0);
    let mut content = w.lines.join("\n");
    content.push('\n');
    let pass_name = format!("Synthetic{index:02}");
    SyntheticSource {
        source: PassSource::new(pass_name.clone(), format!("{pass_name}.cpp"), content),
        expected: w.expected,
    }
}

/// The `count` sources used by the extraction round-trip checks.
pub fn synthetic_sources(seed: u64, count: usize) -> Vec<SyntheticSource> {
    (0..count).map(|i| synthetic_source(seed, i)).collect()
}
