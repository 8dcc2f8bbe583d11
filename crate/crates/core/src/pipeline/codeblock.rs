use super::PipelineError;

/// Header block required by the code-generation query, prepended when a
/// response omits it.
pub const HEADER_PREAMBLE: &str = "#include <sycl/sycl.hpp>
#include <array>
#include <iostream>
#include <string>
#if FPGA_HARDWARE || FPGA_EMULATOR || FPGA_SIMULATOR
#include <sycl/ext/intel/fpga_extensions.hpp>
#endif
using namespace sycl;
";

/// The last fenced block of `response`. An unterminated final fence runs to
/// the end of the text. Without fences, falls back to the longest run of
/// code-looking lines (at least three, mentioning `#include` or `int main`).
pub fn extract_code_block(response: &str) -> Result<String, PipelineError> {
    if response.trim().is_empty() {
        return Err(PipelineError::EmptyResponse);
    }
    let lines: Vec<&str> = response.lines().collect();
    let mut last: Option<(usize, usize)> = None;
    let mut open: Option<usize> = None;
    for (i, line) in lines.iter().enumerate() {
        if line.trim_start().starts_with("```") {
            match open.take() {
                None => open = Some(i + 1),
                Some(start) => last = Some((start, i)),
            }
        }
    }
    if let Some(start) = open {
        last = Some((start, lines.len()));
    }
    if let Some((start, end)) = last {
        let body = lines[start..end].join("\n");
        if !body.trim().is_empty() {
            return Ok(body + "\n");
        }
    }
    heuristic_region(&lines).ok_or(PipelineError::NoCodeBlock)
}

fn looks_like_code(line: &str) -> bool {
    let t = line.trim();
    t.is_empty()
        || t.starts_with('#')
        || t.starts_with("//")
        || t.ends_with(';')
        || t.ends_with('{')
        || t.ends_with('}')
        || t.ends_with(',')
        || t.ends_with(')')
        || t.starts_with('}')
}

fn heuristic_region(lines: &[&str]) -> Option<String> {
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < lines.len() {
        if !looks_like_code(lines[i]) || lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let start = i;
        while i < lines.len() && looks_like_code(lines[i]) {
            i += 1;
        }
        let mut end = i;
        while end > start && lines[end - 1].trim().is_empty() {
            end -= 1;
        }
        let region = &lines[start..end];
        let non_blank = region.iter().filter(|l| !l.trim().is_empty()).count();
        let anchored = region.iter().any(|l| l.contains("#include") || l.contains("int main"));
        if non_blank >= 3 && anchored && best.is_none_or(|(s, e)| end - start >= e - s) {
            best = Some((start, end));
        }
    }
    best.map(|(s, e)| lines[s..e].join("\n") + "\n")
}

/// Prepend [`HEADER_PREAMBLE`] unless the SYCL header is already included.
pub fn ensure_preamble(source: &str) -> String {
    if source.contains("#include <sycl/sycl.hpp>") {
        source.to_string()
    } else {
        format!("{HEADER_PREAMBLE}\n{source}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_fence_is_identity() {
        assert_eq!(extract_code_block("```cpp\nint main() {}\n```").unwrap(), "int main() {}\n");
    }

    #[test]
    fn last_of_two_fences_wins() {
        let r = "First:\n```\nint a;\n```\nThen:\n```cpp\nint b;\n```\nDone.";
        assert_eq!(extract_code_block(r).unwrap(), "int b;\n");
    }

    #[test]
    fn unterminated_fence_runs_to_end() {
        assert_eq!(extract_code_block("text\n```cpp\nint x;\nint y;").unwrap(), "int x;\nint y;\n");
    }

    #[test]
    fn fenceless_fallback_finds_program() {
        let r = "Here is the program you asked for.\n#include <iostream>\nint main() {\n  return 0;\n}\nHope this helps.";
        assert_eq!(extract_code_block(r).unwrap(), "#include <iostream>\nint main() {\n  return 0;\n}\n");
    }

    #[test]
    fn prose_only_is_an_error() {
        assert!(matches!(extract_code_block("I cannot do that."), Err(PipelineError::NoCodeBlock)));
        assert!(matches!(extract_code_block("  \n"), Err(PipelineError::EmptyResponse)));
        // Code-looking but unanchored and too short.
        assert!(matches!(extract_code_block("x = 1;\ny = 2;"), Err(PipelineError::NoCodeBlock)));
    }

    #[test]
    fn preamble_added_once() {
        let s = ensure_preamble("int main() { return 0; }\n");
        assert!(s.starts_with("#include <sycl/sycl.hpp>\n"));
        assert_eq!(ensure_preamble(&s), s);
    }
}
