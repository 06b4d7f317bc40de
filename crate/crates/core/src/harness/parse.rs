//! Curve files: `label | a1 a2 a3 a4 a6 | (x,y);(x,y)` per line, `#`
//! comments, rationals written `p/q`.

use std::collections::HashSet;
use std::path::Path;

use rug::Rational;

use crate::error::{Error, Result};
use crate::weierstrass::{CurvePoint, WeierstrassModel};

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRecord {
    pub label: String,
    pub model: WeierstrassModel,
    pub points: Vec<CurvePoint>,
    /// 1-based line of the record in its file.
    pub line: usize,
}

pub fn parse_curve_file(path: &Path) -> Result<Vec<CurveRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_curve_str(&text)
}

pub fn parse_curve_str(text: &str) -> Result<Vec<CurveRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let record = parse_line(content, line)?;
        if !seen.insert(record.label.clone()) {
            return Err(parse_err(line, format!("duplicate label {}", record.label)));
        }
        out.push(record);
    }
    Ok(out)
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn rational(s: &str, line: usize) -> Result<Rational> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| parse_err(line, format!("not a rational number: {:?}", s.trim())))
}

fn parse_line(content: &str, line: usize) -> Result<CurveRecord> {
    let fields: Vec<&str> = content.split('|').map(str::trim).collect();
    if !(2..=3).contains(&fields.len()) {
        return Err(parse_err(line, "expected `label | a1 a2 a3 a4 a6 | points`"));
    }
    let label = fields[0];
    if label.is_empty() || label.contains(char::is_whitespace) {
        return Err(parse_err(line, "label must be a nonempty word"));
    }
    let coeffs = fields[1]
        .split_whitespace()
        .map(|t| rational(t, line))
        .collect::<Result<Vec<_>>>()?;
    let a: [Rational; 5] = coeffs
        .try_into()
        .map_err(|v: Vec<Rational>| parse_err(line, format!("expected 5 a-invariants, found {}", v.len())))?;
    let model = WeierstrassModel::new(a).map_err(|e| parse_err(line, e.to_string()))?;

    let mut points = Vec::new();
    if let Some(pts) = fields.get(2) {
        for p in pts.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let inner = p
                .strip_prefix('(')
                .and_then(|p| p.strip_suffix(')'))
                .ok_or_else(|| parse_err(line, format!("point {p:?} is not of the form (x,y)")))?;
            let (x, y) = inner
                .split_once(',')
                .ok_or_else(|| parse_err(line, format!("point {p:?} is not of the form (x,y)")))?;
            let pt = CurvePoint::Affine {
                x: rational(x, line)?,
                y: rational(y, line)?,
            };
            if !model.contains(&pt) {
                return Err(Error::OffCurvePoint {
                    label: label.to_string(),
                    point: pt.to_string(),
                });
            }
            points.push(pt);
        }
    }
    Ok(CurveRecord {
        label: label.to_string(),
        model,
        points,
        line,
    })
}
