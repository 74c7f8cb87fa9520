//! Snowball English (Porter2) stemming.

use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Stem one lowercase token. Tokens containing digits are returned as-is.
pub fn stem(token: &str) -> String {
    if token.bytes().any(|b| b.is_ascii_digit()) {
        return token.to_string();
    }
    stemmer().stem(token).into_owned()
}
