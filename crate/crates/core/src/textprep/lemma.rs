//! Rule-plus-exception lemmatizer for English plurals and common verb inflections.
//!
//! One rewrite step is applied repeatedly until the word stops changing, so
//! `lemmatize(lemmatize(w)) == lemmatize(w)` for every input. A step whose
//! result would be a stopword (or a single character) is not taken.

use std::collections::{HashMap, HashSet};
use std::sync::LazyLock;

/// Irregular forms. Words mapped to themselves are protected from the suffix rules.
const EXCEPTIONS: &[(&str, &str)] = &[
    ("ran", "run"),
    ("went", "go"),
    ("gone", "go"),
    ("goes", "go"),
    ("ate", "eat"),
    ("eaten", "eat"),
    ("saw", "see"),
    ("seen", "see"),
    ("made", "make"),
    ("making", "make"),
    ("took", "take"),
    ("taken", "take"),
    ("taking", "take"),
    ("got", "get"),
    ("gotten", "get"),
    ("said", "say"),
    ("thought", "think"),
    ("felt", "feel"),
    ("knew", "know"),
    ("known", "know"),
    ("came", "come"),
    ("coming", "come"),
    ("gave", "give"),
    ("given", "give"),
    ("giving", "give"),
    ("told", "tell"),
    ("found", "find"),
    ("wrote", "write"),
    ("written", "write"),
    ("writing", "write"),
    ("bought", "buy"),
    ("brought", "bring"),
    ("began", "begin"),
    ("begun", "begin"),
    ("became", "become"),
    ("having", "have"),
    ("loving", "love"),
    ("living", "live"),
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("feet", "foot"),
    ("teeth", "tooth"),
    ("mice", "mouse"),
    ("geese", "goose"),
    ("lives", "life"),
    ("wives", "wife"),
    ("knives", "knife"),
    ("leaves", "leaf"),
    ("halves", "half"),
    ("selves", "self"),
    ("always", "always"),
    ("perhaps", "perhaps"),
    ("series", "series"),
    ("species", "species"),
    ("news", "news"),
    ("lens", "lens"),
    ("ethics", "ethics"),
    ("physics", "physics"),
    ("mathematics", "mathematics"),
    ("politics", "politics"),
    ("economics", "economics"),
    ("clothes", "clothes"),
    ("whereas", "whereas"),
    ("christmas", "christmas"),
    ("canvas", "canvas"),
    ("atlas", "atlas"),
    ("alias", "alias"),
    ("bias", "bias"),
    ("chaos", "chaos"),
    ("kudos", "kudos"),
    ("thing", "thing"),
    ("nothing", "nothing"),
    ("something", "something"),
    ("anything", "anything"),
    ("everything", "everything"),
    ("morning", "morning"),
    ("evening", "evening"),
    ("during", "during"),
    ("wedding", "wedding"),
    ("feeling", "feeling"),
    ("meeting", "meeting"),
    ("building", "building"),
    ("need", "need"),
    ("indeed", "indeed"),
    ("speed", "speed"),
    ("hundred", "hundred"),
    ("sacred", "sacred"),
    ("naked", "naked"),
    ("wicked", "wicked"),
];

static EXCEPTION_MAP: LazyLock<HashMap<&'static str, &'static str>> =
    LazyLock::new(|| EXCEPTIONS.iter().copied().collect());

fn has_vowel(s: &str) -> bool {
    s.chars()
        .any(|c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'))
}

fn undouble(stem: &str) -> String {
    let mut chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 2 {
        let (a, b) = (chars[n - 2], chars[n - 1]);
        if a == b && a.is_ascii_alphabetic() && !"aeiouylsz".contains(a) {
            chars.pop();
        }
    }
    chars.into_iter().collect()
}

/// One rewrite step, or `None` when no rule applies.
fn step(word: &str) -> Option<String> {
    if let Some(&target) = EXCEPTION_MAP.get(word) {
        return (target != word).then(|| target.to_string());
    }
    let len = word.chars().count();
    if len < 4 || !word.is_ascii() {
        return None;
    }
    if len > 4 {
        if let Some(stem) = word.strip_suffix("ies") {
            return Some(format!("{stem}y"));
        }
        if let Some(stem) = word.strip_suffix("ied") {
            return Some(format!("{stem}y"));
        }
    }
    if let Some(stem) = word.strip_suffix("sses") {
        return Some(format!("{stem}ss"));
    }
    for suffix in ["xes", "ches", "shes", "zzes"] {
        if word.ends_with(suffix) {
            return Some(word[..word.len() - 2].to_string());
        }
    }
    if word.ends_with('s') && !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
        return Some(word[..word.len() - 1].to_string());
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if stem.len() >= 3 && has_vowel(stem) {
            return Some(undouble(stem));
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if !word.ends_with("eed") && stem.len() >= 3 && has_vowel(stem) {
            return Some(undouble(stem));
        }
    }
    None
}

/// Reduces `word` to its lemma. Steps landing on a word in `stopwords` are refused.
pub fn lemmatize(word: &str, stopwords: Option<&HashSet<&'static str>>) -> String {
    let mut current = word.to_string();
    // Every suffix rule shortens the word and exception targets are fixed points,
    // so the loop is bounded by the word length plus one exception hop.
    for _ in 0..=word.len() + 1 {
        let Some(next) = step(&current) else { break };
        if next.chars().count() < 2 || stopwords.is_some_and(|s| s.contains(next.as_str())) {
            break;
        }
        current = next;
    }
    current
}
