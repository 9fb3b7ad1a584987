//! The experiment spec file.
//!
//! ```text
//! abelperc-spec 1
//! # comments and blank lines are ignored
//! id        triangular-locality
//! kind      locality              # or: monotonicity
//! limit     3; 1,1,-1             # locality: the limit group
//! group     [Z^2; (1,0), (0,1)]   # explicit member (repeatable)
//! family    [Z; 1, {n}, {n+1}] for n in 3,5,8,12,20
//! base      2;                    # monotonicity: the base group
//! lambda    (0,10)                # monotonicity: generators of Lambda, one row per line
//! lambda    (0,5)
//! lambda    0                     # the trivial subgroup
//! window    128
//! trials    10000
//! tol       0.001
//! threshold 0.5
//! seed      42
//! drift     on
//! k-max     6                     # radius cap for the marked-group distance column
//! csv       out/table.csv
//! json      out/table.json
//! plot      out/table.dat
//! ```
//!
//! Family templates substitute `{expr}` where `expr` is an integer affine
//! expression in `n` such as `n`, `n+1`, `2n-1` or `3*n`. `lambda` entries
//! are integer vectors in generator coordinates, mapped into the base group.

use std::path::PathBuf;

use serde::Serialize;

use super::pc::PcSettings;
use crate::error::{Error, Result};
use crate::marked_group::parse_group;

pub const SPEC_HEADER: &str = "abelperc-spec 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExperimentKind {
    Locality,
    Monotonicity,
}

/// One sequence member: a label (the family parameter or the list index) and its literal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Member {
    pub label: String,
    pub n: Option<i64>,
    pub literal: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub id: String,
    pub kind: ExperimentKind,
    pub members: Vec<Member>,
    pub limit: Option<String>,
    pub base: Option<String>,
    pub lambdas: Vec<Vec<Vec<i64>>>,
    pub settings: PcSettings,
    pub k_max: u32,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            id: "experiment".into(),
            kind: ExperimentKind::Locality,
            members: Vec::new(),
            limit: None,
            base: None,
            lambdas: Vec::new(),
            settings: PcSettings::default(),
            k_max: 6,
            csv: None,
            json: None,
            plot: None,
        }
    }
}

/// Evaluates `a*n + b` style expressions.
fn eval_affine(expr: &str, n: i64, line: usize) -> Result<i64> {
    let e: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if e.is_empty() {
        return Err(Error::parse(line, "empty placeholder {}"));
    }
    let mut total = 0i64;
    let mut term = String::new();
    let mut sign = 1i64;
    let bad = || Error::parse(line, format!("cannot evaluate {{{expr}}}"));
    let flush = |term: &str, sign: i64| -> Result<i64> {
        let v = if let Some(coef) = term.strip_suffix('n') {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = if coef.is_empty() { 1 } else { coef.parse::<i64>().map_err(|_| bad())? };
            c.checked_mul(n).ok_or_else(bad)?
        } else {
            term.parse::<i64>().map_err(|_| bad())?
        };
        Ok(sign * v)
    };
    for (i, c) in e.chars().enumerate() {
        if (c == '+' || c == '-') && i > 0 {
            total += flush(&term, sign)?;
            term.clear();
            sign = if c == '-' { -1 } else { 1 };
        } else if c == '-' {
            sign = -1;
        } else {
            term.push(c);
        }
    }
    total += flush(&term, sign)?;
    Ok(total)
}

/// Substitutes every `{expr}` in a family template.
pub fn expand_template(template: &str, n: i64, line: usize) -> Result<String> {
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..].find('}').ok_or_else(|| Error::parse(line, "unclosed '{' in family template"))? + open;
        out.push_str(&eval_affine(&rest[open + 1..close], n, line)?.to_string());
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn parse_values(s: &str, line: usize) -> Result<Vec<i64>> {
    let mut v = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (i64, i64) = (
                a.trim().parse().map_err(|_| Error::parse(line, format!("bad range {part:?}")))?,
                b.trim().parse().map_err(|_| Error::parse(line, format!("bad range {part:?}")))?,
            );
            v.extend(a..=b);
        } else {
            v.push(part.parse().map_err(|_| Error::parse(line, format!("bad family value {part:?}")))?);
        }
    }
    if v.is_empty() {
        return Err(Error::parse(line, "family needs at least one value"));
    }
    Ok(v)
}

/// `(1,2), (0,5)` or `0` into integer vectors.
fn parse_vectors(s: &str, line: usize) -> Result<Vec<Vec<i64>>> {
    let s = s.trim();
    if s == "0" || s == "{0}" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut rest = s;
    while let Some(open) = rest.find('(') {
        let close = rest[open..].find(')').ok_or_else(|| Error::parse(line, "unclosed '(' in lambda"))? + open;
        let body = &rest[open + 1..close];
        let v: std::result::Result<Vec<i64>, _> = body.split(',').map(|x| x.trim().parse::<i64>()).collect();
        out.push(v.map_err(|_| Error::parse(line, format!("bad vector ({body})")))?);
        rest = &rest[close + 1..];
    }
    if out.is_empty() {
        return Err(Error::parse(line, format!("expected vectors like (0,5), got {s:?}")));
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(v: &str, key: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::parse(line, format!("bad value {v:?} for {key}")))
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim())).filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, h)) if h == SPEC_HEADER => {}
            Some((i, h)) => return Err(Error::parse(i, format!("expected header {SPEC_HEADER:?}, got {h:?}"))),
            None => return Err(Error::parse(1, "empty spec file")),
        }
        let mut index = 0usize;
        for (i, l) in lines {
            let (key, value) = match l.split_once(char::is_whitespace) {
                Some((k, v)) => (k, v.trim()),
                None => (l, ""),
            };
            match key {
                "id" => spec.id = value.to_string(),
                "kind" => {
                    spec.kind = match value {
                        "locality" => ExperimentKind::Locality,
                        "monotonicity" => ExperimentKind::Monotonicity,
                        _ => return Err(Error::parse(i, format!("unknown kind {value:?}"))),
                    }
                }
                "limit" => {
                    parse_group(value).map_err(|e| Error::parse(i, e.to_string()))?;
                    spec.limit = Some(value.to_string());
                }
                "base" => {
                    parse_group(value).map_err(|e| Error::parse(i, e.to_string()))?;
                    spec.base = Some(value.to_string());
                }
                "group" => {
                    parse_group(value).map_err(|e| Error::parse(i, e.to_string()))?;
                    spec.members.push(Member { label: index.to_string(), n: None, literal: value.to_string() });
                    index += 1;
                }
                "family" => {
                    let (template, values) =
                        value.split_once(" for n in ").ok_or_else(|| Error::parse(i, "family needs '<template> for n in <values>'"))?;
                    for n in parse_values(values, i)? {
                        let literal = expand_template(template.trim(), n, i)?;
                        parse_group(&literal).map_err(|e| Error::parse(i, format!("n = {n}: {e}")))?;
                        spec.members.push(Member { label: n.to_string(), n: Some(n), literal });
                        index += 1;
                    }
                }
                "lambda" => spec.lambdas.push(parse_vectors(value, i)?),
                "window" => spec.settings.window = parse_num(value, key, i)?,
                "trials" => spec.settings.trials = parse_num(value, key, i)?,
                "tol" => spec.settings.tol = parse_num(value, key, i)?,
                "threshold" => spec.settings.threshold = parse_num(value, key, i)?,
                "seed" => spec.settings.seed = parse_num(value, key, i)?,
                "drift" => {
                    spec.settings.drift = match value {
                        "on" | "true" | "yes" => true,
                        "off" | "false" | "no" => false,
                        _ => return Err(Error::parse(i, format!("drift takes on/off, got {value:?}"))),
                    }
                }
                "k-max" => spec.k_max = parse_num(value, key, i)?,
                "csv" => spec.csv = Some(PathBuf::from(value)),
                "json" => spec.json = Some(PathBuf::from(value)),
                "plot" => spec.plot = Some(PathBuf::from(value)),
                _ => return Err(Error::parse(i, format!("unknown key {key:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let s = &self.settings;
        if s.window < 1 || s.trials == 0 || !(s.tol > 0.0) || !(s.threshold > 0.0 && s.threshold < 1.0) {
            return Err(Error::pre(format!("invalid estimator settings: {s:?}")));
        }
        match self.kind {
            ExperimentKind::Locality if self.members.is_empty() => Err(Error::pre("locality spec needs group or family lines")),
            ExperimentKind::Monotonicity if self.base.is_none() => Err(Error::pre("monotonicity spec needs a base line")),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_placeholders() {
        assert_eq!(expand_template("[Z; 1, {n}, {n+1}]", 5, 1).unwrap(), "[Z; 1, 5, 6]");
        assert_eq!(expand_template("{2n-1},{3*n},{-n+4},{7}", 3, 1).unwrap(), "5,9,1,7");
        assert!(expand_template("{n", 3, 1).is_err());
        assert!(expand_template("{m}", 3, 1).is_err());
    }

    #[test]
    fn parses_a_locality_spec() {
        let text = "abelperc-spec 1\n# c\nid t\nlimit 3; 1,1,-1\nfamily [Z; 1, {n}, {n+1}] for n in 3,5..6\nwindow 16\ntrials 50\ndrift off\n";
        let s = ExperimentSpec::parse(text).unwrap();
        assert_eq!(s.members.len(), 3);
        assert_eq!(s.members[2].literal, "[Z; 1, 6, 7]");
        assert_eq!(s.members[1].n, Some(5));
        assert_eq!(s.settings.window, 16);
        assert!(!s.settings.drift);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "abelperc-spec 1\nid t\n\nwindow twelve\n";
        match ExperimentSpec::parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        match ExperimentSpec::parse("abelperc-spec 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        let bad_group = "abelperc-spec 1\ngroup [Z^2; (1,0), (0,1)]\ngroup [Q; 1]\n";
        match ExperimentSpec::parse(bad_group) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn monotonicity_lambdas() {
        let text = "abelperc-spec 1\nkind monotonicity\nbase 2;\nlambda 0\nlambda (0,10)\nlambda (0,5), (5,0)\n";
        let s = ExperimentSpec::parse(text).unwrap();
        assert_eq!(s.lambdas, vec![vec![], vec![vec![0, 10]], vec![vec![0, 5], vec![5, 0]]]);
    }
}
