#!/usr/bin/env python3
"""Builds a synthetic pass file with 27 function definitions and records
where each one starts and ends while emitting it.

Outputs assets/extract/SyntheticLowering.cpp and assets/extract/expected.json.
The expected spans come from the emitter's own bookkeeping, not from parsing.
The filter section applies fnmatch to the names for min_lines=5 and the
patterns collect* and lower*.

    python3 crates/fixtures/oracles/extract_fixture.py
"""
import json
import random
from fnmatch import fnmatchcase
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "assets/extract"
rng = random.Random(27)

lines = []
defs = []


def emit(text):
    lines.extend(text.split("\n"))


def body(n):
    """n statement lines, some with braces hidden in strings and comments."""
    out = []
    for k in range(n):
        r = rng.randrange(4)
        if r == 0:
            out.append(f'  errs() << "brace {{ in string {k}";')
        elif r == 1:
            out.append(f"  // closing }} inside a comment {k}")
        elif r == 2:
            out.append(f"  Count += {k};")
        else:
            out.append(f"  if (Count > {k}) {{ Count -= 1; }}")
    return out


def define(qualified, kind, signature, n_body, indent=""):
    start = len(lines) + 1
    sig = signature.split("\n")
    emit("\n".join(indent + s for s in sig[:-1] + [sig[-1] + " {"]))
    emit("\n".join(indent + b for b in body(n_body)))
    emit(indent + "}")
    end = len(lines)
    defs.append({"qualified_name": qualified, "kind": kind, "start_line": start, "end_line": end,
                 "line_count": end - start + 1})


PREFIXES = ["collect", "lower", "rewrite", "visit", "emit"]
names = []
for i in range(27):
    names.append(f"{PREFIXES[i % len(PREFIXES)]}Step{i:02d}")

emit("// Synthetic lowering pass used by the extraction tests.")
emit("#include <vector>")
emit("")
emit("using namespace llvm;")
emit("")
emit("static int Count = 0;")
emit("")

i = 0
# Free functions, some with multi-line signatures and return types above.
for _ in range(9):
    name = names[i]
    n = rng.randrange(0, 6)
    if rng.random() < 0.4:
        define(name, "function", f"static bool\n{name}(Module &M,\n    int Depth)", n)
    else:
        define(name, "function", f"void {name}(Function &F)", n)
    emit("")
    i += 1

# A namespace with nested functions.
ns_start = len(lines) + 1
emit("namespace detail {")
emit("")
ns_index = len(defs)
defs.append(None)
for _ in range(6):
    name = names[i]
    define(f"detail::{name}", "function", f"int {name}(const Value *V)", rng.randrange(0, 6))
    emit("")
    i += 1
emit("} // namespace detail")
ns_end = len(lines)
defs[ns_index] = {"qualified_name": "detail", "kind": "namespace", "start_line": ns_start, "end_line": ns_end,
                  "line_count": ns_end - ns_start + 1}
emit("")

# A class declaration followed by out-of-line member definitions.
cls_start = len(lines) + 1
emit("class StepRunner {")
emit("public:")
emit("  void run();")
emit("};")
defs.append({"qualified_name": "StepRunner", "kind": "class", "start_line": cls_start, "end_line": cls_start + 3,
             "line_count": 4})
emit("")
for _ in range(6):
    name = names[i]
    define(f"StepRunner::{name}", "method", f"void StepRunner::{name}(Instruction &I)", rng.randrange(0, 6))
    emit("")
    i += 1

# Templates.
for _ in range(6):
    name = names[i]
    define(name, "function", f"template <typename T>\nT {name}(T Value)", rng.randrange(0, 6))
    emit("")
    i += 1

assert i == 27
source = "\n".join(lines).rstrip("\n") + "\n"

defs.sort(key=lambda d: d["start_line"])
callables = [d for d in defs if d["kind"] in ("function", "method")]
assert len(callables) == 27
patterns = ["collect*", "lower*"]
filtered = [d["qualified_name"] for d in defs
            if d["line_count"] >= 5 and any(fnmatchcase(d["qualified_name"], p) for p in patterns)]

OUT.mkdir(parents=True, exist_ok=True)
(OUT / "SyntheticLowering.cpp").write_text(source)
expected = {
    "pass_name": "SyntheticLowering",
    "definitions": defs,
    "filter": {"min_lines": 5, "patterns": patterns, "kinds": ["function", "method"], "selected": [
        n for n in filtered if next(d for d in defs if d["qualified_name"] == n)["kind"] in ("function", "method")
    ]},
}
(OUT / "expected.json").write_text(json.dumps(expected, indent=2) + "\n")
print(len(defs), "definitions;", len(expected["filter"]["selected"]), "selected")
