use crate::STAR;

/// Maps arbitrary text into the linkage alphabet: lowercase, German umlaut
/// and eszett transliteration, whitespace runs collapsed to a single space,
/// anything else replaced by `*`, and the result trimmed.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars().flat_map(|c| c.to_lowercase()) {
        if c.is_whitespace() {
            pending_space = true;
            continue;
        }
        if pending_space {
            if !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
        }
        match c {
            'a'..='z' | '-' | '.' => out.push(c),
            'ä' => out.push_str("ae"),
            'ö' => out.push_str("oe"),
            'ü' => out.push_str("ue"),
            'ß' => out.push_str("ss"),
            _ => out.push(STAR),
        }
    }
    out
}
