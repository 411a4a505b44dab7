//! Plain-text method files.
//!
//! ```text
//! # comment
//! name = BDF3o22
//! c = 1/3 2/3 1
//! [start]
//! A = 2 0 0; -10/3 15/8 0; 5/3 -73/24 11/6
//! K = 1/3 25/72 1/3
//! [standard]
//! A = ...
//! B = ...
//! K = ...
//! [end]
//! A = ...
//! B = ...
//! K = ...
//! Atilde = ...
//! ```
//!
//! Numbers are decimals or `p/q` fractions; matrix rows are separated by `;`.
//! `K` may also be written as a full matrix, which must then be diagonal.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::catalog::{Nodes, PeerMethodSuite, StageMatrixSet, StageRole};
use crate::error::{Error, Result};
use crate::linalg::RMatrix;

/// Parsed file contents; sections may be missing.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodFile {
    pub name: String,
    pub nodes: Nodes,
    pub start: Option<StageMatrixSet>,
    pub standard: Option<StageMatrixSet>,
    pub end: Option<StageMatrixSet>,
}

impl MethodFile {
    pub fn into_suite(self) -> Result<PeerMethodSuite> {
        let missing = |role: &str| Error::InvariantViolation(format!("section [{role}] present"));
        let start = self.start.ok_or_else(|| missing("start"))?;
        let standard = self.standard.ok_or_else(|| missing("standard"))?;
        let end = self.end.ok_or_else(|| missing("end"))?;
        PeerMethodSuite::new(self.name, self.nodes, start, standard, end)
    }
}

struct Entry {
    line: usize,
    column: usize,
    text: String,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_number(tok: &str, line: usize, column: usize) -> Result<f64> {
    let bad = || parse_error(line, column, format!("invalid number `{tok}`"));
    let value = match tok.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.parse().map_err(|_| bad())?;
            let q: f64 = q.parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(parse_error(line, column, "zero denominator"));
            }
            p / q
        }
        None => tok.parse().map_err(|_| bad())?,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Splits `text` into rows of numbers, tracking columns for diagnostics.
fn parse_rows(entry: &Entry) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut offset = 0;
    for chunk in entry.text.split(';') {
        let mut row = Vec::new();
        let mut pos = 0;
        for tok in chunk.split_whitespace() {
            let rel = chunk[pos..].find(tok).expect("token from chunk") + pos;
            pos = rel + tok.len();
            let column = entry.column + offset + chunk[..rel].chars().count();
            row.push(parse_number(tok, entry.line, column)?);
        }
        offset += chunk.chars().count() + 1;
        if row.is_empty() {
            return Err(parse_error(
                entry.line,
                entry.column + offset - 1,
                "empty row",
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_vector(entry: &Entry) -> Result<Vec<f64>> {
    let rows = parse_rows(entry)?;
    if rows.len() != 1 {
        return Err(parse_error(
            entry.line,
            entry.column,
            "expected a single row",
        ));
    }
    Ok(rows.into_iter().next().expect("one row"))
}

fn parse_matrix(entry: &Entry) -> Result<RMatrix> {
    let rows = parse_rows(entry)?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(parse_error(
            entry.line,
            entry.column,
            "rows of unequal length",
        ));
    }
    RMatrix::from_rows(&rows)
}

fn parse_k(entry: &Entry) -> Result<Vec<f64>> {
    if !entry.text.contains(';') {
        return parse_vector(entry);
    }
    let m = parse_matrix(entry)?;
    if !m.is_square() {
        return Err(parse_error(
            entry.line,
            entry.column,
            "K matrix must be square",
        ));
    }
    if !m.is_diagonal(0.0) {
        return Err(Error::InvariantViolation("K diagonal".into()));
    }
    Ok(m.diagonal())
}

fn build_set(
    role: StageRole,
    entries: &HashMap<String, Entry>,
    header: usize,
) -> Result<StageMatrixSet> {
    let get = |key: &'static str| {
        entries
            .get(key)
            .ok_or_else(|| parse_error(header, 1, format!("[{role}] lacks `{key}`")))
    };
    let a = parse_matrix(get("A")?)?;
    let k = parse_k(get("K")?)?;
    let b = match (role, entries.get("B")) {
        (StageRole::Start, Some(e)) => {
            return Err(parse_error(e.line, 1, "[start] takes no `B`"));
        }
        (StageRole::Start, None) => None,
        _ => Some(parse_matrix(get("B")?)?),
    };
    let a_tilde = match (role, entries.get("Atilde")) {
        (StageRole::End, Some(e)) => Some(parse_matrix(e)?),
        (_, Some(e)) => return Err(parse_error(e.line, 1, "`Atilde` only allowed in [end]")),
        (_, None) => None,
    };
    for key in entries.keys() {
        if !matches!(key.as_str(), "A" | "B" | "K" | "Atilde") {
            let e = &entries[key];
            return Err(parse_error(e.line, 1, format!("unknown key `{key}`")));
        }
    }
    StageMatrixSet::new(role, a, b, k, a_tilde)
}

pub fn parse_method_file(text: &str) -> Result<MethodFile> {
    let mut header: HashMap<String, Entry> = HashMap::new();
    let mut sections: Vec<(StageRole, usize, HashMap<String, Entry>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.chars().count() - content.trim_start().chars().count();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line, lead + 1, "unterminated section header"))?;
            let role = match name.trim() {
                "start" => StageRole::Start,
                "standard" => StageRole::Standard,
                "end" => StageRole::End,
                other => {
                    return Err(parse_error(
                        line,
                        lead + 2,
                        format!("unknown section `{other}`"),
                    ))
                }
            };
            if sections.iter().any(|(r, _, _)| *r == role) {
                return Err(parse_error(
                    line,
                    lead + 1,
                    format!("duplicate section [{role}]"),
                ));
            }
            sections.push((role, line, HashMap::new()));
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(line, lead + 1, "expected `key = value`"))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(parse_error(line, lead + 1, "missing key"));
        }
        let value_start = key_column(content, value);
        let entry = Entry {
            line,
            column: value_start,
            text: value.to_string(),
        };
        let target = match sections.last_mut() {
            Some((_, _, map)) => map,
            None => &mut header,
        };
        if target.contains_key(&key) {
            return Err(parse_error(
                line,
                lead + 1,
                format!("duplicate key `{key}`"),
            ));
        }
        target.insert(key, entry);
    }

    let name = header
        .get("name")
        .map(|e| e.text.trim().to_string())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| parse_error(1, 1, "missing `name`"))?;
    let c_entry = header
        .get("c")
        .ok_or_else(|| parse_error(1, 1, "missing `c`"))?;
    let nodes = Nodes::new(parse_vector(c_entry)?)?;
    for key in header.keys() {
        if key != "name" && key != "c" {
            let e = &header[key];
            return Err(parse_error(e.line, 1, format!("unknown key `{key}`")));
        }
    }
    let mut file = MethodFile {
        name,
        nodes,
        start: None,
        standard: None,
        end: None,
    };
    for (role, line, entries) in sections {
        let set = build_set(role, &entries, line)?;
        if set.stages() != file.nodes.len() {
            return Err(parse_error(
                line,
                1,
                format!(
                    "[{role}] has {} stages but c has {} nodes",
                    set.stages(),
                    file.nodes.len()
                ),
            ));
        }
        match role {
            StageRole::Start => file.start = Some(set),
            StageRole::Standard => file.standard = Some(set),
            StageRole::End => file.end = Some(set),
        }
    }
    Ok(file)
}

/// 1-based column where `value` begins inside `line`.
fn key_column(line: &str, value: &str) -> usize {
    let byte = line.len() - value.len();
    line[..byte].chars().count() + 1
}

pub fn load_method_file(path: &Path) -> Result<MethodFile> {
    parse_method_file(&std::fs::read_to_string(path)?)
}

/// Loads a complete suite; all three sections are required.
pub fn load_suite(path: &Path) -> Result<PeerMethodSuite> {
    load_method_file(path)?.into_suite()
}

fn fmt_row(out: &mut String, values: &[f64]) {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    out.push_str(&parts.join(" "));
}

fn fmt_matrix(out: &mut String, key: &str, m: &RMatrix) {
    let _ = write!(out, "{key} = ");
    for i in 0..m.rows() {
        if i > 0 {
            out.push_str("; ");
        }
        fmt_row(out, m.row(i));
    }
    out.push('\n');
}

/// Serializes sets in a form [`parse_method_file`] reads back bit-for-bit.
pub fn write_method_file(name: &str, nodes: &Nodes, sets: &[&StageMatrixSet]) -> String {
    let mut out = format!("name = {name}\nc = ");
    fmt_row(&mut out, nodes.values());
    out.push('\n');
    for set in sets {
        let _ = writeln!(out, "[{}]", set.role());
        fmt_matrix(&mut out, "A", set.a());
        if let Ok(b) = set.b() {
            fmt_matrix(&mut out, "B", b);
        }
        out.push_str("K = ");
        fmt_row(&mut out, set.k());
        out.push('\n');
        if let Some(at) = set.a_tilde() {
            fmt_matrix(&mut out, "Atilde", at);
        }
    }
    out
}

pub fn suite_to_string(suite: &PeerMethodSuite) -> String {
    write_method_file(
        &suite.name,
        &suite.nodes,
        &[&suite.start, &suite.standard, &suite.end],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::method::{builtin_suite, BuiltinMethod};

    const BDF3O22: &str = "\
# rescaled BDF3 with (2,2) end step
name = BDF3o22
c = 1/3 2/3 1
[start]
A = 2 0 0; -10/3 15/8 0; 5/3 -73/24 11/6
K = 1/3 25/72 1/3
[standard]
A = 11/6 0 0; -3 11/6 0; 3/2 -3 11/6
B = 1/3 -3/2 3; 0 1/3 -3/2; 0 0 1/3
K = 1/3 0 0; 0 1/3 0; 0 0 1/3
[end]
A = 21/8 0 0; -14/3 23/12 0; 49/24 -23/12 1
B = 1/2 -73/24 31/6; -1/3 41/12 -35/6; 1/6 -37/24 5/2
K = 7/36 23/36 0
";

    #[test]
    fn fractions_reproduce_builtin() {
        let parsed = parse_method_file(BDF3O22).unwrap().into_suite().unwrap();
        let builtin = builtin_suite(BuiltinMethod::Bdf3o22);
        for (x, y) in [
            (&parsed.start, &builtin.start),
            (&parsed.standard, &builtin.standard),
            (&parsed.end, &builtin.end),
        ] {
            assert!(x.a().sub(y.a()).max_abs() <= 1e-15);
            assert!(x.k().iter().zip(y.k()).all(|(p, q)| (p - q).abs() <= 1e-15));
        }
        assert!(
            parsed
                .end
                .b()
                .unwrap()
                .sub(builtin.end.b().unwrap())
                .max_abs()
                <= 1e-15
        );
    }

    #[test]
    fn writer_round_trips_exactly() {
        for m in BuiltinMethod::ALL {
            let suite = builtin_suite(m);
            let back = parse_method_file(&suite_to_string(&suite))
                .unwrap()
                .into_suite()
                .unwrap();
            assert_eq!(back, suite);
        }
    }

    #[test]
    fn non_diagonal_k_rejected() {
        let text = BDF3O22.replace("K = 1/3 0 0; 0 1/3 0", "K = 1/3 0.1 0; 0 1/3 0");
        match parse_method_file(&text) {
            Err(Error::InvariantViolation(msg)) => assert_eq!(msg, "K diagonal"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_stage_method_accepted() {
        let text = "name = two\nc = 0 1\n[standard]\nA = 1 0; -1 1\nB = 0 0; 0 1\nK = 1/2 1/2\n";
        let f = parse_method_file(text).unwrap();
        assert_eq!(f.standard.unwrap().stages(), 2);
        assert!(f.start.is_none());
    }

    #[test]
    fn errors_carry_positions() {
        let text = "name = x\nc = 0 1/2 zz\n";
        match parse_method_file(text) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 11)),
            other => panic!("{other:?}"),
        }
        let text = "name = x\nc = 0 1\n[middle]\n";
        assert!(matches!(
            parse_method_file(text),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
