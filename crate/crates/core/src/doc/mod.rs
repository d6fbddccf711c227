//! The text document format: sections of `key [arg] = value` entries.
//!
//! ```text
//! document := line*
//! line     := ws* (comment | header | entry)? ws* '\n'
//! comment  := '#' any*
//! header   := '[' kind ws+ name ']'
//! kind     := 'quantale' | 'space' | 'ring' | 'presheaf' | 'morphism'
//! entry    := key (ws+ arg)? ws* '=' ws* value
//! key      := [a-z] [a-z0-9_-]*
//! arg      := token
//! name     := token
//! token    := any run of characters other than whitespace, '=', '#', '[', ']'
//! ```
//!
//! A `#` starts a comment anywhere on a line. Names are unique across the
//! whole document and each `key arg` pair appears at most once per section.

mod workspace;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::abgroups::{FgAbGroup, IntMatrix};

pub use workspace::{
    load_workspace, validate_document, LoadError, ObjectReport, QuantaleOrigin, Workspace, WorkspaceObject,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObjectKind {
    Quantale,
    Space,
    Ring,
    Presheaf,
    Morphism,
}

impl ObjectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectKind::Quantale => "quantale",
            ObjectKind::Space => "space",
            ObjectKind::Ring => "ring",
            ObjectKind::Presheaf => "presheaf",
            ObjectKind::Morphism => "morphism",
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "quantale" => ObjectKind::Quantale,
            "space" => ObjectKind::Space,
            "ring" => ObjectKind::Ring,
            "presheaf" => ObjectKind::Presheaf,
            "morphism" => ObjectKind::Morphism,
            _ => return Err(()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub arg: Option<String>,
    pub value: String,
    pub line: usize,
    /// Column of the first character of the value (1-based).
    pub column: usize,
}

impl Entry {
    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column, message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub kind: ObjectKind,
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    /// The entry `key` without an argument.
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key && e.arg.is_none())
    }

    /// Entries `key <arg>` in document order.
    pub fn rows<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key && e.arg.is_some())
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, 1, message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub sections: Vec<Section>,
}

fn is_token_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '=' | '#' | '[' | ']')
}

fn is_key(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
}

/// Character column (1-based) of byte offset `at` in `line`.
fn column(line: &str, at: usize) -> usize {
    line[..at].chars().count() + 1
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let mut doc = Document::default();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim_start();
        let start = body.len() - trimmed.len();
        let trimmed = trimmed.trim_end();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| ParseError::new(ln, column(raw, start + trimmed.len()), "expected ']'"))?;
            let mut parts = inner.split_whitespace();
            let (Some(kind), Some(name), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(ParseError::new(ln, column(raw, start) + 1, "expected '[kind name]'"));
            };
            let kind: ObjectKind = kind
                .parse()
                .map_err(|_| ParseError::new(ln, column(raw, start) + 1, format!("unknown object kind '{kind}'")))?;
            if !name.chars().all(is_token_char) {
                return Err(ParseError::new(ln, column(raw, start) + 1, format!("invalid name '{name}'")));
            }
            if let Some(prev) = doc.sections.iter().find(|s| s.name == name) {
                return Err(ParseError::new(
                    ln,
                    column(raw, start) + 1,
                    format!("name '{name}' already defined on line {}", prev.line),
                ));
            }
            doc.sections.push(Section { kind, name: name.to_string(), line: ln, entries: vec![] });
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(ParseError::new(ln, column(raw, start), "expected 'key = value' or a section header"));
        };
        let lhs = &body[start..eq];
        let mut words = lhs.split_whitespace();
        let key = words.next().unwrap_or("");
        let arg = words.next();
        if words.next().is_some() {
            return Err(ParseError::new(ln, column(raw, start), "expected at most one argument before '='"));
        }
        if !is_key(key) {
            return Err(ParseError::new(ln, column(raw, start), format!("invalid key '{key}'")));
        }
        if let Some(a) = arg {
            if !a.chars().all(is_token_char) {
                return Err(ParseError::new(ln, column(raw, start), format!("invalid argument '{a}'")));
            }
        }
        let after = &body[eq + 1..];
        let value = after.trim();
        let vstart = eq + 1 + (after.len() - after.trim_start().len());
        if value.contains('=') {
            let at = vstart + value.find('=').unwrap_or(0);
            return Err(ParseError::new(ln, column(raw, at), "unexpected '=' in value"));
        }
        let Some(section) = doc.sections.last_mut() else {
            return Err(ParseError::new(ln, column(raw, start), "entry before the first section header"));
        };
        let arg = arg.map(str::to_string);
        if section.entries.iter().any(|e| e.key == key && e.arg == arg) {
            let what = match &arg {
                Some(a) => format!("{key} {a}"),
                None => key.to_string(),
            };
            return Err(ParseError::new(ln, column(raw, start), format!("duplicate entry '{what}'")));
        }
        section.entries.push(Entry {
            key: key.to_string(),
            arg,
            value: value.to_string(),
            line: ln,
            column: column(raw, vstart),
        });
    }
    Ok(doc)
}

/// Parses `0`, `Z`, `Z^2`, `Z/4`, `Z/2^3` (also written `(Z/2)^3`) and sums
/// of those joined by `+`.
pub fn parse_group(s: &str) -> Result<FgAbGroup, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty group".into());
    }
    if s == "0" {
        return Ok(FgAbGroup::trivial());
    }
    let mut factors = Vec::new();
    for term in s.split('+') {
        let term: String = term.chars().filter(|c| !c.is_whitespace()).collect();
        let unwrapped = match term.strip_prefix('(').and_then(|t| t.split_once(')')) {
            Some((inner, power)) if power.is_empty() || power.starts_with('^') => format!("{inner}{power}"),
            _ => term.clone(),
        };
        let rest = unwrapped.strip_prefix('Z').ok_or_else(|| format!("expected 'Z' in '{term}'"))?;
        let (order, power) = match rest.split_once('^') {
            Some((o, p)) => (o, p.parse::<usize>().map_err(|_| format!("bad exponent in '{term}'"))?),
            None => (rest, 1),
        };
        let order: u64 = match order.strip_prefix('/') {
            Some(n) => n.parse().map_err(|_| format!("bad order in '{term}'"))?,
            None if order.is_empty() => 0,
            None => return Err(format!("unexpected '{order}' in '{term}'")),
        };
        if order == 1 {
            continue;
        }
        if power > crate::lattice::MAX_ELEMENTS || factors.len() + power > crate::lattice::MAX_ELEMENTS {
            return Err(format!("more than {} generators", crate::lattice::MAX_ELEMENTS));
        }
        factors.extend(std::iter::repeat_n(order, power));
    }
    FgAbGroup::new(factors).map_err(|e| e.to_string())
}

/// Rows separated by `;`, entries by whitespace. `rows` fixes the shape of
/// matrices with no columns or no rows.
pub fn parse_matrix(s: &str, rows: usize, cols: usize) -> Result<IntMatrix, String> {
    let s = s.trim();
    let lines: Vec<&str> = if s.is_empty() { vec![] } else { s.split(';').collect() };
    if rows == 0 || cols == 0 {
        if lines.iter().any(|l| !l.trim().is_empty()) {
            return Err(format!("expected a {rows}x{cols} matrix"));
        }
        return Ok(IntMatrix::zeros(rows, cols));
    }
    if lines.len() != rows {
        return Err(format!("expected {rows} rows, found {}", lines.len()));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.iter().enumerate() {
        let vals: Vec<i64> = line
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| format!("bad integer '{t}' in row {}", i + 1)))
            .collect::<Result<_, _>>()?;
        if vals.len() != cols {
            return Err(format!("row {} has {} entries, expected {cols}", i + 1, vals.len()));
        }
        data.extend(vals);
    }
    Ok(IntMatrix::from_i64(rows, cols, &data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_entries() {
        let doc = parse_document(
            "# chain\n[quantale c3]\nelements = 0 1 2  # labels\norder = 0<1 1<2\nmul 0 = 0 0 0\n\n[space x]\nfrom = discrete 2\n",
        )
        .unwrap();
        assert_eq!(doc.sections.len(), 2);
        let q = &doc.sections[0];
        assert_eq!(q.kind, ObjectKind::Quantale);
        assert_eq!(q.get("elements").unwrap().value, "0 1 2");
        let row = q.rows("mul").next().unwrap();
        assert_eq!(row.arg.as_deref(), Some("0"));
        assert_eq!((row.line, row.column), (5, 9));
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_document("[quantale a]\nelements 0 1\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        let e = parse_document("x = 1\n").unwrap_err();
        assert!(e.message.contains("before the first section"));
        let e = parse_document("[quantale a]\n[ring a]\n").unwrap_err();
        assert!(e.message.contains("already defined"));
        let e = parse_document("[thing a]\n").unwrap_err();
        assert!(e.message.contains("unknown object kind"));
        let e = parse_document("[ring r]\nfrom = zmod 4\nfrom = zmod 6\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_document("[ring r]\n  from = a = b\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 12));
    }

    #[test]
    fn groups() {
        assert_eq!(parse_group("0").unwrap(), FgAbGroup::trivial());
        assert_eq!(parse_group("Z^2 + Z/2").unwrap(), FgAbGroup::new(vec![0, 0, 2]).unwrap());
        assert_eq!(parse_group("Z/3^2").unwrap(), FgAbGroup::new(vec![3, 3]).unwrap());
        assert_eq!(parse_group("(Z/3)^2 + Z").unwrap(), FgAbGroup::new(vec![3, 3, 0]).unwrap());
        assert_eq!(parse_group("Z/1 + Z").unwrap(), FgAbGroup::free(1));
        assert!(parse_group("Q").is_err());
        assert!(parse_group("Z^x").is_err());
        assert!(parse_group("Z^100000000000").is_err());
    }

    #[test]
    fn matrices() {
        let m = parse_matrix("1 0; 0 1", 2, 2).unwrap();
        assert_eq!(m, IntMatrix::identity(2));
        assert_eq!(parse_matrix("", 0, 3).unwrap().shape(), (0, 3));
        assert!(parse_matrix("1 2", 2, 1).is_err());
    }
}
