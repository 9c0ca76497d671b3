//! Loading system, point-set and function files.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use sidorenko::{FieldSpec, LinearSystem, PointSet, Space, SpectralFunction};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("{0}")]
    Core(#[from] sidorenko::Error),
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A parsed system file, kept alongside the literal rows for echoing.
#[derive(Clone, Debug, Serialize)]
pub struct SystemFile {
    pub path: String,
    pub q: u64,
    pub modulus: Vec<u32>,
    pub rows: Vec<Vec<i64>>,
    #[serde(skip)]
    pub system: LinearSystem,
}

/// Parses `p` or `p^e`.
fn parse_order(tok: &str) -> Option<(u32, u32)> {
    match tok.split_once('^') {
        Some((p, e)) => Some((p.trim().parse().ok()?, e.trim().parse().ok()?)),
        None => {
            let q: u64 = tok.parse().ok()?;
            let f = FieldSpec::of_order(q).ok()?;
            Some((f.characteristic(), f.degree()))
        }
    }
}

pub fn parse_system(path: &Path) -> CliResult<SystemFile> {
    let text = read(path)?;
    parse_system_text(&path.display().to_string(), &text)
}

pub fn parse_system_text(path: &str, text: &str) -> CliResult<SystemFile> {
    let syntax = |line: usize, msg: String| CliError::Syntax {
        path: path.to_string(),
        line,
        msg,
    };
    let mut order: Option<(u32, u32, usize)> = None;
    let mut modulus: Option<(Vec<u32>, usize)> = None;
    let mut in_rows = false;
    let mut rows: Vec<(Vec<i64>, usize)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap_or("");
        if in_rows {
            let row = line
                .split_whitespace()
                .map(|t| t.replace('\u{2212}', "-").parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| syntax(line_no, format!("bad row {line:?}")))?;
            if let Some((first, _)) = rows.first() {
                if first.len() != row.len() {
                    return Err(syntax(
                        line_no,
                        format!("row has {} entries, expected {}", row.len(), first.len()),
                    ));
                }
            }
            rows.push((row, line_no));
            continue;
        }
        match head {
            "q" => {
                let tok: String = toks.collect::<Vec<_>>().join("");
                let (p, e) = parse_order(&tok).ok_or_else(|| syntax(line_no, format!("bad field order {tok:?}")))?;
                order = Some((p, e, line_no));
            }
            "modulus" => {
                let coeffs = toks
                    .map(|t| t.parse::<u32>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| syntax(line_no, "bad modulus coefficient".into()))?;
                modulus = Some((coeffs, line_no));
            }
            "rows" => {
                if toks.next().is_some() {
                    return Err(syntax(line_no, "unexpected text after 'rows'".into()));
                }
                in_rows = true;
            }
            other => return Err(syntax(line_no, format!("unexpected {other:?}"))),
        }
    }

    let (p, e, q_line) = order.ok_or_else(|| syntax(1, "missing 'q' line".into()))?;
    if !in_rows {
        return Err(syntax(text.lines().count().max(1), "missing 'rows' section".into()));
    }
    let field = match modulus {
        Some((m, line)) => FieldSpec::with_modulus(p, e, m).map_err(|err| syntax(line, err.to_string()))?,
        None => FieldSpec::new(p, e).map_err(|err| syntax(q_line, err.to_string()))?,
    };
    let field = Arc::new(field);
    let mut elems = Vec::with_capacity(rows.len());
    for (row, line) in &rows {
        let r = row
            .iter()
            .map(|&v| field.from_signed(v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|err| syntax(*line, err.to_string()))?;
        elems.push(r);
    }
    let system = LinearSystem::new(field.clone(), elems)?;
    Ok(SystemFile {
        path: path.to_string(),
        q: field.order() as u64,
        modulus: field.modulus().to_vec(),
        rows: rows.into_iter().map(|(r, _)| r).collect(),
        system,
    })
}

pub fn load_set(path: &Path, sys: &LinearSystem, n: usize) -> CliResult<PointSet> {
    let text = read(path)?;
    let space = Space::new(sys.field().clone(), n)?;
    PointSet::parse(space, &text).map_err(|err| match err {
        sidorenko::Error::Parse(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
        other => other.into(),
    })
}

pub fn load_function(path: &Path, sys: &LinearSystem) -> CliResult<SpectralFunction<f64>> {
    let text = read(path)?;
    let file: sidorenko::fourier::FunctionFile =
        serde_json::from_str(&text).map_err(|err| CliError::Usage(format!("{}: {err}", path.display())))?;
    Ok(SpectralFunction::from_file(file, Some(sys.field().clone()))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
# two generators
q 5
rows
1 0 -1 2 -2
0 1 2 -1 -2   # second
";

    #[test]
    fn parses_example() {
        let f = parse_system_text("ex", EXAMPLE).unwrap();
        assert_eq!(f.q, 5);
        assert_eq!((f.system.m(), f.system.k()), (2, 5));
        assert_eq!(f.rows[1], vec![0, 1, 2, -1, -2]);
    }

    #[test]
    fn prime_power_orders() {
        for head in ["q 4", "q 2^2"] {
            let f = parse_system_text("x", &format!("{head}\nrows\n1 1 1\n")).unwrap();
            assert_eq!(f.q, 4);
            assert_eq!(f.modulus, vec![1, 1, 1]);
        }
        let f = parse_system_text("x", "q 3^2\nmodulus 1 0 1\nrows\n1 2 -1\n").unwrap();
        assert_eq!(f.modulus, vec![1, 0, 1]);
    }

    #[test]
    fn errors_carry_lines() {
        let err = parse_system_text("x", "q 5\nrows\n1 2 3\n1 2\n").unwrap_err();
        assert!(matches!(err, CliError::Syntax { line: 4, .. }), "{err}");
        let err = parse_system_text("x", "q 6\nrows\n1 2\n").unwrap_err();
        assert!(matches!(err, CliError::Syntax { line: 1, .. }), "{err}");
        let err = parse_system_text("x", "q 5\nrows\n1 x\n").unwrap_err();
        assert!(matches!(err, CliError::Syntax { line: 3, .. }), "{err}");
        let err = parse_system_text("x", "q 9\nmodulus 1 0 0\nrows\n1 2\n").unwrap_err();
        assert!(matches!(err, CliError::Syntax { line: 2, .. }), "{err}");
        let err = parse_system_text("x", "rows\n1 2\n").unwrap_err();
        assert!(matches!(err, CliError::Syntax { .. }), "{err}");
        let err = parse_system_text("x", "q 5\nrows\n0 0 0\n").unwrap_err();
        assert!(matches!(err, CliError::Core(sidorenko::Error::EmptySystem)), "{err}");
    }
}
