//! Instance and report documents in TOML.
//!
//! ```toml
//! [plots]
//! count = 3
//! edges = [[1, 2]]
//!
//! [[friends]]
//! pair = [0, 1]
//! weights = ["1/2", "1/2"]   # weight of 1 for 0, weight of 0 for 1
//!
//! [values]
//! rows = [
//!     ["1", "9/10", "0"],
//!     ["1", "0", "2/5"],
//!     ["1", "1/10", "0"],
//! ]
//! ```
//!
//! Numbers that are not integers are quoted `"p/q"` strings, so documents
//! round-trip exactly.

use std::fmt::Write as _;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::mechanisms::{validate_reports, Reports};
use crate::model::{FriendPair, FriendshipGraph, Instance, PlotGraph};
use crate::rational::Rational;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    plots: Spanned<PlotsSection>,
    #[serde(default)]
    friends: Vec<Spanned<FriendEntry>>,
    values: Spanned<ValuesSection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlotsSection {
    count: Spanned<usize>,
    #[serde(default)]
    edges: Vec<Spanned<[usize; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FriendEntry {
    pair: Spanned<[usize; 2]>,
    weights: [Spanned<String>; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValuesSection {
    rows: Vec<Spanned<Vec<Spanned<String>>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportsDocument {
    reports: Vec<Spanned<i64>>,
}

/// 1-based line of byte `offset` in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn at(text: &str, span: Range<usize>, message: impl Into<String>) -> Error {
    Error::Parse {
        line: line_of(text, span.start),
        message: message.into(),
    }
}

fn syntax(text: &str, e: toml::de::Error) -> Error {
    Error::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    }
}

fn number(text: &str, s: &Spanned<String>) -> Result<Rational> {
    s.get_ref()
        .trim()
        .parse::<Rational>()
        .map_err(|_| at(text, s.span(), format!("`{}` is not a rational number", s.get_ref())))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: Document = toml::from_str(text).map_err(|e| syntax(text, e))?;
    let plots = doc.plots.get_ref();
    let n = *plots.count.get_ref();

    let mut edges = Vec::with_capacity(plots.edges.len());
    for e in &plots.edges {
        let [v, w] = *e.get_ref();
        if v >= n || w >= n {
            return Err(at(
                text,
                e.span(),
                format!("edge [{v}, {w}] names a plot outside 0..{n}"),
            ));
        }
        if v == w {
            return Err(at(text, e.span(), format!("edge [{v}, {w}] is a loop")));
        }
        if edges.contains(&(v.min(w), v.max(w))) {
            return Err(at(text, e.span(), format!("edge [{v}, {w}] appears twice")));
        }
        edges.push((v.min(w), v.max(w)));
    }
    let graph = PlotGraph::new(n, edges).map_err(|e| at(text, doc.plots.span(), e.to_string()))?;

    let rows = &doc.values.get_ref().rows;
    if rows.len() != n {
        return Err(at(
            text,
            doc.values.span(),
            format!(
                "{} value rows for {n} plots; agents and plots must be equally many",
                rows.len()
            ),
        ));
    }
    let mut values = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.get_ref().len() != n {
            return Err(at(
                text,
                row.span(),
                format!("row of agent {i} has {} entries, expected {n}", row.get_ref().len()),
            ));
        }
        let mut parsed = Vec::with_capacity(n);
        for (v, cell) in row.get_ref().iter().enumerate() {
            let x = number(text, cell)?;
            if x.is_negative() || x > Rational::one() {
                return Err(at(
                    text,
                    cell.span(),
                    format!("value {x} of agent {i} for plot {v} is outside [0, 1]"),
                ));
            }
            parsed.push(x);
        }
        values.push(parsed);
    }

    let mut partner: Vec<Option<usize>> = vec![None; n];
    let mut pairs = Vec::with_capacity(doc.friends.len());
    for entry in &doc.friends {
        let f = entry.get_ref();
        let [a, b] = *f.pair.get_ref();
        if a >= n || b >= n {
            return Err(at(
                text,
                f.pair.span(),
                format!("pair [{a}, {b}] names an agent outside 0..{n}"),
            ));
        }
        if a == b {
            return Err(at(text, f.pair.span(), format!("agent {a} cannot befriend herself")));
        }
        for (x, y) in [(a, b), (b, a)] {
            if let Some(other) = partner[x] {
                return Err(at(
                    text,
                    f.pair.span(),
                    format!("agent {x} already has friend {other}; at most one friend per agent (pair [{a}, {b}])"),
                ));
            }
            partner[x] = Some(y);
        }
        let w_ab = number(text, &f.weights[0])?;
        let w_ba = number(text, &f.weights[1])?;
        for w in [&f.weights[0], &f.weights[1]] {
            if number(text, w)?.is_negative() {
                return Err(at(text, w.span(), "friendship weights must be non-negative"));
            }
        }
        pairs.push(FriendPair::new(a, b, w_ab, w_ba));
    }
    let friends = FriendshipGraph::new(n, pairs).map_err(|e| at(text, 0..0, e.to_string()))?;
    Instance::new(graph, friends, values).map_err(|e| at(text, 0..0, e.to_string()))
}

pub fn render_instance(inst: &Instance) -> String {
    let n = inst.agent_count();
    let mut out = String::new();
    out.push_str("[plots]\n");
    let _ = writeln!(out, "count = {n}");
    let edges: Vec<String> = inst
        .plot_graph()
        .edges()
        .iter()
        .map(|(v, w)| format!("[{v}, {w}]"))
        .collect();
    let _ = writeln!(out, "edges = [{}]", edges.join(", "));
    for p in inst.friendships().pairs() {
        out.push_str("\n[[friends]]\n");
        let _ = writeln!(out, "pair = [{}, {}]", p.a, p.b);
        let _ = writeln!(out, "weights = [\"{}\", \"{}\"]", p.weight_ab, p.weight_ba);
    }
    out.push_str("\n[values]\nrows = [\n");
    for row in inst.values() {
        let cells: Vec<String> = row.iter().map(|x| format!("\"{x}\"")).collect();
        let _ = writeln!(out, "    [{}],", cells.join(", "));
    }
    out.push_str("]\n");
    out
}

/// Reads `reports = [..]`, one entry per agent, `-1` for nobody.
pub fn parse_reports(text: &str, inst: &Instance) -> Result<Reports> {
    let doc: ReportsDocument = toml::from_str(text).map_err(|e| syntax(text, e))?;
    let n = inst.agent_count();
    let mut reports = Vec::with_capacity(doc.reports.len());
    for (i, r) in doc.reports.iter().enumerate() {
        reports.push(match *r.get_ref() {
            -1 => None,
            j if j >= 0 && (j as usize) < n && j as usize != i => Some(j as usize),
            j => return Err(at(text, r.span(), format!("agent {i} cannot report {j}"))),
        });
    }
    validate_reports(inst, &reports).map_err(|e| at(text, 0..0, e.to_string()))?;
    Ok(reports)
}

pub fn render_reports(reports: &[Option<usize>]) -> String {
    let items: Vec<String> = reports
        .iter()
        .map(|r| r.map_or("-1".to_string(), |j| j.to_string()))
        .collect();
    format!("reports = [{}]\n", items.join(", "))
}
