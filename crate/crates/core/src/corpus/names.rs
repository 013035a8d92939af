//! Name and title normalization.
//!
//! Matching of surnames, initials and titles has to be deterministic and
//! independent of locale, so every piece of text goes through the same
//! fold: Unicode decomposition with combining marks removed, lowercasing,
//! and collapsing of whitespace, hyphens and underscores into one space.
//! Any other punctuation is dropped.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Fold `text` into its canonical comparison form.
///
/// ```
/// use citeclust::corpus::normalize_text;
/// assert_eq!(normalize_text("  Müller-Lüdenscheidt "), "muller ludenscheidt");
/// assert_eq!(normalize_text("O'Brien"), "obrien");
/// ```
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_sep = false;
    for c in text.nfd().filter(|c| !is_combining_mark(*c)) {
        if c.is_whitespace() || c == '-' || c == '_' {
            pending_sep = !out.is_empty();
            continue;
        }
        if !c.is_alphanumeric() {
            continue;
        }
        if pending_sep {
            out.push(' ');
            pending_sep = false;
        }
        out.extend(c.to_lowercase());
    }
    out
}

/// Normalize an initial given as free text ("J", "j.", "Ž") to one lowercase
/// character. Returns `None` for empty input and `Err(())` when more than one
/// letter remains after folding.
pub(crate) fn normalize_initial(text: &str) -> Result<Option<char>, ()> {
    let folded = normalize_text(text);
    let mut chars = folded.chars();
    match (chars.next(), chars.next()) {
        (None, _) => Ok(None),
        (Some(c), None) => Ok(Some(c)),
        _ => Err(()),
    }
}
