#!/usr/bin/env python3
"""Reference renderer for the prompt goldens.

Plain sequential str.replace over the template files, independent of the
Rust renderer. Run from the repository root:

    python3 crates/fixtures/oracles/render_prompts.py
"""
from pathlib import Path

ROOT = Path(__file__).resolve().parents[3]
PROMPTS = ROOT / "crates/core/prompts"
ASSETS = ROOT / "crates/fixtures/assets"


def read(rel):
    return (ASSETS / rel).read_text()


function = read("exemplars/pass_function_collect_device_global_properties.cpp")
characteristics = read("exemplars/characteristics_device_globals.md")
generated = read("exemplars/generated_device_globals.cpp")
error = read("golden/bindings/compile_error.txt")
requirements = read("golden/bindings/mutation_requirements.txt")

CASES = {
    "characteristics": {
        "{Optimization Pass Name}": "DeviceGlobals",
        "{Code of function in optimization pass}": function,
    },
    "codegen": {
        "{Name of optimization pass}": "DeviceGlobals",
        "{REQS}": characteristics,
    },
    "repair": {
        "{Generated code}": generated,
        "{Compilation Error}": error,
    },
    "mutation": {
        "{CODES}": generated,
        "{REQS}": requirements,
    },
}

for name, bindings in CASES.items():
    text = (PROMPTS / f"{name}.txt").read_text()
    for marker, value in bindings.items():
        assert marker in text, (name, marker)
        text = text.replace(marker, value)
    (ASSETS / "golden/prompts" / f"{name}.txt").write_text(text)
    print(name, len(text))
