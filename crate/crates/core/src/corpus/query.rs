//! Boolean search expressions over raw document text.
//!
//! Grammar:
//!
//! ```text
//! expr    := term ("OR" term)*
//! term    := factor ("AND" factor)*
//! factor  := literal | "(" expr ")"
//! literal := word | word* | "quoted phrase"
//! ```
//!
//! Operators are case-sensitive uppercase words. Literals match
//! case-insensitively at word boundaries; a trailing `*` turns a literal into
//! a prefix match (`implement*` matches "implementation").

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A parsed boolean query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SearchQuery {
    root: QueryExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryExpr {
    Literal(Literal),
    And(Vec<QueryExpr>),
    Or(Vec<QueryExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    /// Lowercased text, words separated by single spaces.
    pub text: String,
    pub prefix: bool,
}

impl Literal {
    pub fn new(text: &str, prefix: bool) -> Self {
        let text = text
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ");
        Literal { text, prefix }
    }

    /// Word-boundary match against already case-folded text.
    pub fn matches(&self, folded: &str) -> bool {
        if self.text.is_empty() {
            return false;
        }
        let bytes = folded.as_bytes();
        let mut from = 0;
        while let Some(pos) = folded[from..].find(&self.text) {
            let start = from + pos;
            let end = start + self.text.len();
            let left_ok = start == 0 || !is_word_char(prev_char(folded, start));
            let right_ok =
                self.prefix || end == bytes.len() || !is_word_char(next_char(folded, end));
            if left_ok && right_ok {
                return true;
            }
            from = start + self.text[..].chars().next().map_or(1, char::len_utf8);
        }
        false
    }
}

/// Lowercase and collapse whitespace runs so phrase literals match across line breaks.
pub fn fold(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn prev_char(s: &str, idx: usize) -> char {
    s[..idx].chars().next_back().unwrap_or(' ')
}

fn next_char(s: &str, idx: usize) -> char {
    s[idx..].chars().next().unwrap_or(' ')
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.text.contains(' ') {
            write!(f, "\"{}\"", self.text)?;
        } else {
            f.write_str(&self.text)?;
        }
        if self.prefix {
            f.write_str("*")?;
        }
        Ok(())
    }
}

impl QueryExpr {
    pub fn eval(&self, folded: &str) -> bool {
        match self {
            QueryExpr::Literal(l) => l.matches(folded),
            QueryExpr::And(xs) => xs.iter().all(|x| x.eval(folded)),
            QueryExpr::Or(xs) => xs.iter().any(|x| x.eval(folded)),
        }
    }

    fn collect_literals<'a>(&'a self, out: &mut BTreeSet<&'a Literal>) {
        match self {
            QueryExpr::Literal(l) => {
                out.insert(l);
            }
            QueryExpr::And(xs) | QueryExpr::Or(xs) => {
                for x in xs {
                    x.collect_literals(out);
                }
            }
        }
    }

    fn fmt_nested(&self, f: &mut fmt::Formatter<'_>, top: bool) -> fmt::Result {
        let (items, op) = match self {
            QueryExpr::Literal(l) => return write!(f, "{l}"),
            QueryExpr::And(xs) => (xs, " AND "),
            QueryExpr::Or(xs) => (xs, " OR "),
        };
        if !top {
            f.write_str("(")?;
        }
        for (i, x) in items.iter().enumerate() {
            if i > 0 {
                f.write_str(op)?;
            }
            x.fmt_nested(f, false)?;
        }
        if !top {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl SearchQuery {
    pub fn parse(input: &str) -> Result<Self> {
        let tokens = lex(input)?;
        let mut parser = Parser { tokens, pos: 0 };
        let root = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::Query(format!(
                "unexpected token {:?} after complete expression",
                parser.tokens[parser.pos]
            )));
        }
        Ok(SearchQuery { root })
    }

    pub fn from_expr(root: QueryExpr) -> Result<Self> {
        let q = SearchQuery { root };
        if q.literals().is_empty() {
            return Err(Error::Query("query has no literals".into()));
        }
        Ok(q)
    }

    pub fn root(&self) -> &QueryExpr {
        &self.root
    }

    /// Evaluate against raw text; case folding happens here.
    pub fn matches(&self, text: &str) -> bool {
        self.root.eval(&fold(text))
    }

    /// Distinct literals in the expression, in sorted order.
    pub fn literals(&self) -> Vec<&Literal> {
        let mut set = BTreeSet::new();
        self.root.collect_literals(&mut set);
        set.into_iter().collect()
    }

    /// Number of distinct literals found in `text`.
    pub fn literal_hits(&self, text: &str) -> usize {
        let folded = fold(text);
        self.literals()
            .into_iter()
            .filter(|l| l.matches(&folded))
            .count()
    }
}

impl fmt::Display for SearchQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt_nested(f, true)
    }
}

impl FromStr for SearchQuery {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SearchQuery::parse(s)
    }
}

impl TryFrom<String> for SearchQuery {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        SearchQuery::parse(&s)
    }
}

impl From<SearchQuery> for String {
    fn from(q: SearchQuery) -> String {
        q.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    And,
    Or,
    Open,
    Close,
    Lit(Literal),
}

fn lex(input: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push(Token::Open);
            }
            ')' => {
                chars.next();
                out.push(Token::Close);
            }
            '"' => {
                chars.next();
                let start = i + 1;
                let mut end = None;
                for (j, c) in chars.by_ref() {
                    if c == '"' {
                        end = Some(j);
                        break;
                    }
                }
                let end = end.ok_or_else(|| Error::Query("unterminated quote".into()))?;
                let mut prefix = false;
                if let Some(&(_, '*')) = chars.peek() {
                    chars.next();
                    prefix = true;
                }
                let lit = Literal::new(&input[start..end], prefix);
                if lit.text.is_empty() {
                    return Err(Error::Query("empty quoted literal".into()));
                }
                out.push(Token::Lit(lit));
            }
            _ => {
                let start = i;
                let mut end = input.len();
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                        end = j;
                        break;
                    }
                    chars.next();
                }
                let word = &input[start..end];
                match word {
                    "AND" => out.push(Token::And),
                    "OR" => out.push(Token::Or),
                    _ => {
                        let (body, prefix) = match word.strip_suffix('*') {
                            Some(b) => (b, true),
                            None => (word, false),
                        };
                        if body.is_empty() {
                            return Err(Error::Query("bare '*' is not a literal".into()));
                        }
                        out.push(Token::Lit(Literal::new(body, prefix)));
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Query("empty query".into()));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<QueryExpr> {
        let mut items = vec![self.term()?];
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            items.push(self.term()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            QueryExpr::Or(items)
        })
    }

    fn term(&mut self) -> Result<QueryExpr> {
        let mut items = vec![self.factor()?];
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            items.push(self.factor()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            QueryExpr::And(items)
        })
    }

    fn factor(&mut self) -> Result<QueryExpr> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Lit(l)) => {
                self.pos += 1;
                Ok(QueryExpr::Literal(l))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(Error::Query("missing closing parenthesis".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(t) => Err(Error::Query(format!("unexpected token {t:?}"))),
            None => Err(Error::Query("unexpected end of query".into())),
        }
    }
}
