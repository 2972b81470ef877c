//! Sentence segmentation and inline tag handling for raw tour scripts.

use super::CompileError;

const TERMINALS: [char; 3] = ['.', '!', '?'];

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits `body` into sentences at runs of `.`, `!` or `?`. Tags stay in
/// place and whitespace is collapsed. There are no abbreviation or quote
/// guards: every terminal character ends a sentence.
pub fn segment(body: &str) -> Result<Vec<String>, CompileError> {
    if body.trim().is_empty() {
        return Err(CompileError::EmptyScript);
    }
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = body.chars().peekable();
    while let Some(ch) = chars.next() {
        current.push(ch);
        if TERMINALS.contains(&ch) {
            while let Some(&next) = chars.peek() {
                if TERMINALS.contains(&next) {
                    current.push(next);
                    chars.next();
                } else {
                    break;
                }
            }
            let s = normalize_ws(&current);
            if !s.is_empty() {
                out.push(s);
            }
            current.clear();
        }
    }
    let rest = normalize_ws(&current);
    if !rest.is_empty() {
        out.push(rest);
    }
    Ok(out)
}

/// Exhibit ids tagged as `[id]` in order of appearance.
pub fn tags_in(sentence: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut rest = sentence;
    while let Some(open) = rest.find('[') {
        let after = &rest[open + 1..];
        match after.find(']') {
            Some(close) => {
                let tag = after[..close].trim();
                if !tag.is_empty() {
                    tags.push(tag.to_string());
                }
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    tags
}

/// The sentence as it would be spoken: tags removed, whitespace collapsed,
/// no space left before punctuation.
pub fn speakable(sentence: &str) -> String {
    let mut stripped = String::with_capacity(sentence.len());
    let mut depth = 0usize;
    for ch in sentence.chars() {
        match ch {
            '[' => depth += 1,
            ']' if depth > 0 => depth -= 1,
            _ if depth == 0 => stripped.push(ch),
            _ => {}
        }
    }
    let mut out = normalize_ws(&stripped);
    for p in [" .", " ,", " !", " ?", " ;", " :"] {
        out = out.replace(p, &p[1..]);
    }
    out
}

/// Number of spoken words (tokens containing a letter or digit).
pub fn word_count(text: &str) -> usize {
    text.split_whitespace()
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sentences_keep_tags() {
        assert_eq!(
            segment("This is [duncan]. It opened early.").unwrap(),
            vec!["This is [duncan].", "It opened early."]
        );
    }

    #[test]
    fn single_exclamation() {
        assert_eq!(segment("Look!").unwrap(), vec!["Look!"]);
    }

    #[test]
    fn punctuation_runs_stay_together() {
        assert_eq!(segment("Really?!  Yes.\n\nNo").unwrap(), vec!["Really?!", "Yes.", "No"]);
    }

    #[test]
    fn empty_body_is_an_error() {
        assert!(matches!(segment("  \n "), Err(CompileError::EmptyScript)));
    }

    #[test]
    fn tag_extraction_and_speech() {
        let s = "The hall [duncan] faces the lawn [hw_comp].";
        assert_eq!(tags_in(s), vec!["duncan", "hw_comp"]);
        assert_eq!(speakable(s), "The hall faces the lawn.");
        assert_eq!(word_count(&speakable(s)), 5);
    }
}
