#!/usr/bin/env python3
"""Writes the pass source for the partition scenario: 19 functions whose
seed compiles and 117 whose seed never does. With 7 mutants per compiling
seed that gives 136 + 19 * 7 = 269 generated cases, 19 * 8 = 152 compiled
and 117 failed.

    python3 crates/fixtures/oracles/partition_pass.py
"""
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "assets/scenarios/partition/pass/Partition.cpp"
KEEP, DROP, MUTANTS = 19, 117, 7
assert KEEP + DROP + KEEP * MUTANTS == 269 and KEEP * (1 + MUTANTS) == 152

lines = ["// Partition pass stand-in: one trivial function per scripted outcome.", ""]
for i in range(KEEP):
    lines += [f"int keepCase{i:03d}(int Value) {{", f"  Value += {i};", "  return Value;", "}", ""]
for i in range(DROP):
    lines += [f"int dropCase{i:03d}(int Value) {{", f"  Value -= {i};", "  return Value;", "}", ""]
OUT.parent.mkdir(parents=True, exist_ok=True)
OUT.write_text("\n".join(lines))
print(KEEP + DROP, "functions")
