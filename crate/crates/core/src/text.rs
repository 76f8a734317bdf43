//! Tokenization shared by the sentiment scorer and the keyword extractor.

use std::collections::HashSet;

/// Lowercased word tokens. Letters, digits and inner apostrophes are kept
/// (`don't` stays one token); everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        let ch = if ch == '\u{2019}' { '\'' } else { ch };
        if ch.is_alphanumeric() || ch == '\'' {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            push_token(&mut tokens, &mut current);
        }
    }
    if !current.is_empty() {
        push_token(&mut tokens, &mut current);
    }
    tokens
}

fn push_token(tokens: &mut Vec<String>, current: &mut String) {
    let trimmed = current.trim_matches('\'');
    if !trimmed.is_empty() {
        tokens.push(trimmed.to_string());
    }
    current.clear();
}

/// Tokens that flip the polarity of the sentiment words following them.
pub fn is_negator(token: &str) -> bool {
    matches!(
        token,
        "not"
            | "no"
            | "never"
            | "none"
            | "nobody"
            | "nothing"
            | "neither"
            | "nor"
            | "nowhere"
            | "cannot"
            | "without"
            | "hardly"
            | "barely"
            | "isn't"
            | "wasn't"
            | "aren't"
            | "weren't"
            | "don't"
            | "doesn't"
            | "didn't"
            | "won't"
            | "wouldn't"
            | "can't"
            | "couldn't"
            | "shouldn't"
            | "hasn't"
            | "haven't"
            | "hadn't"
    )
}

/// Pure numbers (`2019`, `3`) and ordinals (`15th`, `2nd`).
pub fn is_numeric_or_ordinal(token: &str) -> bool {
    let digits = token.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits == 0 {
        return false;
    }
    matches!(&token[digits..], "" | "st" | "nd" | "rd" | "th" | "s")
}

/// Whitespace-separated words, lowercased; `#` starts a comment.
pub fn parse_word_list(content: &str) -> HashSet<String> {
    content
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(str::to_lowercase)
        .collect()
}

pub fn bundled_stopwords() -> HashSet<String> {
    parse_word_list(include_str!("../data/stopwords.txt"))
}
