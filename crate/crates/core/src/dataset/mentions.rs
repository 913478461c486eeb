// SPDX-License-Identifier: Apache-2.0

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Lowercased `@handle` tokens in order of appearance, duplicates kept.
///
/// A handle is `@` followed by a maximal run of `[A-Za-z0-9_]`. The `@` must
/// not directly follow a word character, so `x@y.com` yields nothing.
pub fn extract_mentions(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut prev: Option<char> = None;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c == '@' && !prev.is_some_and(|p| p.is_alphanumeric() || p == '_') {
            let start = i + 1;
            let mut end = start;
            while let Some(&(j, d)) = chars.peek() {
                if !is_handle_char(d) {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
            if end > start {
                out.push(text[start..end].to_ascii_lowercase());
                prev = text[..end].chars().next_back();
                continue;
            }
        }
        prev = Some(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn case_folding_and_multiplicity() {
        assert_eq!(extract_mentions("hi @Bob see @carol and @bob"), ["bob", "carol", "bob"]);
    }

    #[test]
    fn embedded_at_is_not_a_mention() {
        assert!(extract_mentions("email me at x@y.com").is_empty());
    }

    #[test]
    fn punctuation_terminates() {
        assert_eq!(extract_mentions("@a_1!"), ["a_1"]);
        assert_eq!(extract_mentions("(@x),@y"), ["x", "y"]);
        assert!(extract_mentions("@ @!").is_empty());
        assert!(extract_mentions("").is_empty());
    }

    #[test]
    fn adjacent_mentions() {
        // the second @ follows a handle character, so it does not start a token
        assert_eq!(extract_mentions("@a@b"), ["a"]);
    }

    proptest! {
        #[test]
        fn idempotent_on_rendered_output(text in "[ a-zA-Z0-9_@.!é]{0,60}") {
            let first = extract_mentions(&text);
            let rendered = first.iter().map(|h| format!("@{h}")).collect::<Vec<_>>().join(" ");
            prop_assert_eq!(extract_mentions(&rendered), first);
        }
    }
}
