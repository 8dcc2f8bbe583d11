//! Lexical masking for C/C++ source.
//!
//! Structural scans (brace matching, signature detection) run over a masked
//! copy of the source in which comments, string/char literals and
//! preprocessor lines are blanked to spaces. Newlines are kept and every
//! byte offset in the mask maps 1:1 onto the original text.

/// Return a copy of `source` with comments, literals and preprocessor
/// directives replaced by spaces. The result is always ASCII.
pub fn mask(source: &str) -> Vec<u8> {
    let src = source.as_bytes();
    // Non-ASCII bytes never carry structure; blanking them keeps the mask valid ASCII.
    let mut out: Vec<u8> = src
        .iter()
        .map(|&b| if b.is_ascii() { b } else { b' ' })
        .collect();
    let n = src.len();
    let mut i = 0;
    let mut line_start = true;

    let blank = |out: &mut Vec<u8>, from: usize, to: usize| {
        for b in &mut out[from..to] {
            if *b != b'\n' {
                *b = b' ';
            }
        }
    };

    while i < n {
        let c = src[i];
        if line_start && c == b'#' {
            // Directive runs to the first newline not escaped by a backslash.
            let start = i;
            while i < n {
                if src[i] == b'\n' && (i == 0 || src[i - 1] != b'\\') {
                    break;
                }
                i += 1;
            }
            blank(&mut out, start, i);
            continue;
        }
        if c == b'\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c == b' ' || c == b'\t' || c == b'\r' {
            i += 1;
            continue;
        }
        line_start = false;

        if c == b'/' && i + 1 < n && src[i + 1] == b'/' {
            let start = i;
            while i < n && src[i] != b'\n' {
                i += 1;
            }
            blank(&mut out, start, i);
            continue;
        }
        if c == b'/' && i + 1 < n && src[i + 1] == b'*' {
            let start = i;
            i += 2;
            while i < n && !(src[i] == b'*' && i + 1 < n && src[i + 1] == b'/') {
                i += 1;
            }
            i = (i + 2).min(n);
            blank(&mut out, start, i);
            continue;
        }
        if c == b'"' {
            let start = i;
            if let Some(end) = raw_string_end(src, i) {
                i = end;
            } else {
                i = quoted_end(src, i, b'"');
            }
            blank(&mut out, start, i);
            continue;
        }
        if c == b'\'' {
            if is_digit_separator(src, i) {
                i += 1;
                continue;
            }
            let start = i;
            i = quoted_end(src, i, b'\'');
            blank(&mut out, start, i);
            continue;
        }
        i += 1;
    }
    out
}

/// End (exclusive) of a quoted literal starting at `open`. Unterminated
/// literals stop at the end of the line.
fn quoted_end(src: &[u8], open: usize, quote: u8) -> usize {
    let mut i = open + 1;
    while i < src.len() {
        match src[i] {
            b'\\' => i += 2,
            b'\n' => return i,
            b if b == quote => return i + 1,
            _ => i += 1,
        }
    }
    src.len()
}

/// If the `"` at `quote` opens a raw string literal (`R"delim(...)delim"`),
/// return the exclusive end offset.
fn raw_string_end(src: &[u8], quote: usize) -> Option<usize> {
    if quote == 0 || src[quote - 1] != b'R' {
        return None;
    }
    // The R must start the token or follow an encoding prefix (u8, u, U, L).
    let mut p = quote - 1;
    while p > 0 && (src[p - 1].is_ascii_alphanumeric() || src[p - 1] == b'_') {
        p -= 1;
    }
    let prefix = &src[p..quote - 1];
    if !matches!(prefix, b"" | b"u8" | b"u" | b"U" | b"L") {
        return None;
    }
    let open_paren = src[quote + 1..].iter().position(|&b| b == b'(')? + quote + 1;
    let delim = &src[quote + 1..open_paren];
    if delim.len() > 16 || delim.iter().any(|b| b.is_ascii_whitespace() || *b == b'\\') {
        return None;
    }
    let mut terminator = Vec::with_capacity(delim.len() + 2);
    terminator.push(b')');
    terminator.extend_from_slice(delim);
    terminator.push(b'"');
    let body = &src[open_paren + 1..];
    let found = body
        .windows(terminator.len())
        .position(|w| w == terminator.as_slice())?;
    Some(open_paren + 1 + found + terminator.len())
}

/// C++14 digit separators (`1'000'000`, `0xFF'FF`).
fn is_digit_separator(src: &[u8], i: usize) -> bool {
    if i == 0 || i + 1 >= src.len() || !src[i + 1].is_ascii_alphanumeric() {
        return false;
    }
    let mut p = i;
    while p > 0 && (src[p - 1].is_ascii_alphanumeric() || src[p - 1] == b'\'' || src[p - 1] == b'.') {
        p -= 1;
    }
    p < i && src[p].is_ascii_digit()
}

/// Offset of the bracket closing the one at `open`, scanning a masked buffer.
pub fn matching_close(masked: &[u8], open: usize) -> Option<usize> {
    let (open_ch, close_ch) = match masked.get(open)? {
        b'{' => (b'{', b'}'),
        b'(' => (b'(', b')'),
        b'[' => (b'[', b']'),
        _ => return None,
    };
    let mut depth = 0usize;
    for (offset, &b) in masked[open..].iter().enumerate() {
        if b == open_ch {
            depth += 1;
        } else if b == close_ch {
            depth -= 1;
            if depth == 0 {
                return Some(open + offset);
            }
        }
    }
    None
}

/// True when every `{` in the code (outside comments and literals) has a
/// matching `}` and no `}` appears unopened.
pub fn braces_balanced(source: &str) -> bool {
    let mut depth: i64 = 0;
    for b in mask(source) {
        match b {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}


/// Masked source as a `String`. The mask is ASCII, so this never fails.
pub fn mask_str(source: &str) -> String {
    String::from_utf8(mask(source)).expect("mask output is ASCII")
}
