//! Welfare maximization as a binary program in CPLEX LP format, and a
//! parser for the subset this module writes.
//!
//! Variables: `a_i_v` puts agent `i` on plot `v`; `y_i_v_j_w` (friends
//! `i < j`, adjacent plots `v`, `w`) is one exactly when `i` sits on `v` and
//! `j` on `w`, enforced by `y <= a_i_v`, `y <= a_j_w` and
//! `y >= a_i_v + a_j_w - 1`. Objective coefficients are multiplied by the
//! least common denominator so that they are integers; the scale is stated
//! in the header comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::optimize::next_permutation;
use crate::rational::Rational;

/// The factor the objective is multiplied by: the least common multiple of
/// all value and weight denominators.
pub fn mip_scale(inst: &Instance) -> Rational {
    let mut l = BigInt::from(1);
    for row in inst.values() {
        for x in row {
            l = l.lcm(x.denom());
        }
    }
    for p in inst.friendships().pairs() {
        l = l.lcm(p.total_weight().denom());
    }
    Rational::from_big(l, BigInt::from(1))
}

struct Terms(Vec<(Rational, String)>);

impl Terms {
    /// ` + 3 a_0_1 - 2 a_1_1 ...`, wrapped every eight terms.
    fn render(&self, out: &mut String) {
        for (k, (c, var)) in self.0.iter().enumerate() {
            if k > 0 && k % 8 == 0 {
                out.push_str("\n   ");
            }
            let sign = if c.is_negative() { '-' } else { '+' };
            let abs = if c.is_negative() { -c.clone() } else { c.clone() };
            if k == 0 && sign == '+' {
                let _ = write!(out, " {abs} {var}");
            } else {
                let _ = write!(out, " {sign} {abs} {var}");
            }
        }
    }
}

fn a(i: usize, v: usize) -> String {
    format!("a_{i}_{v}")
}

fn y(i: usize, v: usize, j: usize, w: usize) -> String {
    format!("y_{i}_{v}_{j}_{w}")
}

pub fn export_mip(inst: &Instance) -> String {
    let n = inst.agent_count();
    let scale = mip_scale(inst);
    let one = Rational::one;
    let mut objective = Vec::new();
    for i in 0..n {
        for v in 0..n {
            let c = inst.value(i, v) * &scale;
            if !c.is_zero() {
                objective.push((c, a(i, v)));
            }
        }
    }
    let mut links = Vec::new();
    for p in inst.friendships().pairs() {
        let c = p.total_weight() * &scale;
        if c.is_zero() {
            continue;
        }
        for &(v, w) in inst.plot_graph().edges() {
            for (x, z) in [(v, w), (w, v)] {
                objective.push((c.clone(), y(p.a, x, p.b, z)));
                links.push((p.a, x, p.b, z));
            }
        }
    }
    if objective.is_empty() {
        objective.push((Rational::zero(), a(0, 0)));
    }

    let mut out = String::new();
    let _ = writeln!(out, "\\ Social welfare maximization, {n} agents and {n} plots.");
    let _ = writeln!(
        out,
        "\\ Objective scale: {scale}; divide the optimum by it to get the welfare."
    );
    out.push_str("Maximize\n obj:");
    Terms(objective).render(&mut out);
    out.push_str("\nSubject To\n");
    for i in 0..n {
        let _ = write!(out, " agent_{i}:");
        Terms((0..n).map(|v| (one(), a(i, v))).collect()).render(&mut out);
        out.push_str(" <= 1\n");
    }
    for v in 0..n {
        let _ = write!(out, " plot_{v}:");
        Terms((0..n).map(|i| (one(), a(i, v))).collect()).render(&mut out);
        out.push_str(" <= 1\n");
    }
    for &(i, v, j, w) in &links {
        let name = y(i, v, j, w);
        let _ = writeln!(out, " {name}_first: {name} - 1 {} <= 0", a(i, v));
        let _ = writeln!(out, " {name}_second: {name} - 1 {} <= 0", a(j, w));
        let _ = writeln!(out, " {name}_both: {name} - 1 {} - 1 {} >= -1", a(i, v), a(j, w));
    }
    out.push_str("Binary\n");
    for i in 0..n {
        for v in 0..n {
            let _ = writeln!(out, " {}", a(i, v));
        }
    }
    for &(i, v, j, w) in &links {
        let _ = writeln!(out, " {}", y(i, v, j, w));
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpConstraint {
    pub name: String,
    pub terms: Vec<(Rational, String)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpModel {
    pub maximize: bool,
    pub objective: Vec<(Rational, String)>,
    pub constraints: Vec<LpConstraint>,
    pub binaries: BTreeSet<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Objective,
    Constraints,
    Binary,
    End,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn is_variable(token: &str) -> bool {
    token
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && token.chars().all(|c| c.is_ascii_alphanumeric() || "_.".contains(c))
}

/// Parses `[name:] [+|-] [coef] var ... [<=|>=|= rhs]` token streams.
struct Row {
    line: usize,
    tokens: Vec<String>,
}

/// Row name, terms, and the relation with its right-hand side.
type LinearRow = (Option<String>, Vec<(Rational, String)>, Option<(Relation, Rational)>);

fn parse_linear(row: &Row, with_relation: bool) -> Result<LinearRow> {
    let mut tokens = row.tokens.iter().map(String::as_str).peekable();
    let mut name = None;
    if let Some(first) = tokens.peek() {
        if let Some(label) = first.strip_suffix(':') {
            name = Some(label.to_string());
            tokens.next();
        }
    }
    let mut terms = Vec::new();
    let mut sign = Rational::one();
    let mut coef: Option<Rational> = None;
    let mut relation = None;
    while let Some(tok) = tokens.next() {
        match tok {
            "+" => {}
            "-" => sign = -sign,
            "<=" | "=<" | ">=" | "=>" | "=" if with_relation => {
                let rel = match tok {
                    "<=" | "=<" => Relation::Le,
                    ">=" | "=>" => Relation::Ge,
                    _ => Relation::Eq,
                };
                let rhs_tok = tokens
                    .next()
                    .ok_or_else(|| parse_error(row.line, "missing right-hand side"))?;
                let rhs: Rational = rhs_tok
                    .parse()
                    .map_err(|_| parse_error(row.line, format!("bad right-hand side `{rhs_tok}`")))?;
                if let Some(extra) = tokens.next() {
                    return Err(parse_error(
                        row.line,
                        format!("unexpected `{extra}` after the right-hand side"),
                    ));
                }
                relation = Some((rel, rhs));
            }
            t if is_variable(t) => {
                let c = coef.take().unwrap_or_else(Rational::one);
                terms.push((&sign * &c, t.to_string()));
                sign = Rational::one();
            }
            t => {
                if coef.is_some() {
                    return Err(parse_error(row.line, format!("two coefficients in a row at `{t}`")));
                }
                coef = Some(
                    t.parse()
                        .map_err(|_| parse_error(row.line, format!("unexpected token `{t}`")))?,
                );
            }
        }
    }
    if coef.is_some() {
        return Err(parse_error(row.line, "coefficient without a variable"));
    }
    if with_relation && relation.is_none() {
        return Err(parse_error(row.line, "constraint without a relation"));
    }
    Ok((name, terms, relation))
}

/// Parses the LP subset written by [`export_mip`]: comments, one objective,
/// named linear constraints, a binary section and `End`.
pub fn parse_lp(text: &str) -> Result<LpModel> {
    let mut section = Section::Start;
    let mut maximize = true;
    let mut objective: Option<Row> = None;
    let mut rows: Vec<Row> = Vec::new();
    let mut binaries = BTreeSet::new();
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let content = raw.split('\\').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let keyword = content.to_ascii_lowercase();
        let next = match keyword.as_str() {
            "maximize" | "maximise" | "maximum" | "max" => Some((Section::Objective, true)),
            "minimize" | "minimise" | "minimum" | "min" => Some((Section::Objective, false)),
            "subject to" | "such that" | "st" | "s.t." => Some((Section::Constraints, maximize)),
            "binary" | "binaries" | "bin" => Some((Section::Binary, maximize)),
            "end" => Some((Section::End, maximize)),
            _ => None,
        };
        if let Some((s, m)) = next {
            let ok = match s {
                Section::Objective => section == Section::Start,
                Section::Constraints => section == Section::Objective,
                Section::Binary => section == Section::Constraints,
                Section::End => section != Section::Start && section != Section::End,
                Section::Start => false,
            };
            if !ok {
                return Err(parse_error(line, format!("section `{content}` out of place")));
            }
            section = s;
            maximize = m;
            continue;
        }
        let tokens: Vec<String> = content.split_whitespace().map(str::to_string).collect();
        let starts_row = tokens[0].ends_with(':');
        match section {
            Section::Start => return Err(parse_error(line, "expected an objective section")),
            Section::End => return Err(parse_error(line, "text after `End`")),
            Section::Objective => match &mut objective {
                Some(row) if !starts_row => row.tokens.extend(tokens),
                Some(_) => return Err(parse_error(line, "more than one objective")),
                None => objective = Some(Row { line, tokens }),
            },
            Section::Constraints => match rows.last_mut() {
                Some(row) if !starts_row => row.tokens.extend(tokens),
                _ if starts_row => rows.push(Row { line, tokens }),
                _ => return Err(parse_error(line, "constraints must be named")),
            },
            Section::Binary => {
                for t in tokens {
                    if !is_variable(&t) {
                        return Err(parse_error(line, format!("`{t}` is not a variable name")));
                    }
                    binaries.insert(t);
                }
            }
        }
    }
    if section != Section::End {
        return Err(parse_error(last_line, "missing `End`"));
    }
    let objective = objective.ok_or_else(|| parse_error(1, "no objective"))?;
    let (_, objective_terms, _) = parse_linear(&objective, false)?;
    let mut names = BTreeSet::new();
    let mut constraints = Vec::with_capacity(rows.len());
    for row in &rows {
        let (name, terms, relation) = parse_linear(row, true)?;
        let name = name.expect("rows start with a label");
        if !names.insert(name.clone()) {
            return Err(parse_error(row.line, format!("constraint `{name}` defined twice")));
        }
        let (relation, rhs) = relation.expect("checked");
        constraints.push(LpConstraint {
            name,
            terms,
            relation,
            rhs,
        });
    }
    let model = LpModel {
        maximize,
        objective: objective_terms,
        constraints,
        binaries,
    };
    for var in model.variables() {
        if !model.binaries.contains(&var) {
            return Err(parse_error(
                objective.line,
                format!("variable `{var}` is not declared binary"),
            ));
        }
    }
    Ok(model)
}

impl LpModel {
    pub fn variables(&self) -> BTreeSet<String> {
        self.objective
            .iter()
            .chain(self.constraints.iter().flat_map(|c| c.terms.iter()))
            .map(|(_, v)| v.clone())
            .collect()
    }

    fn sum(terms: &[(Rational, String)], x: &BTreeMap<String, bool>) -> Rational {
        terms
            .iter()
            .filter(|(_, v)| x.get(v).copied().unwrap_or(false))
            .map(|(c, _)| c.clone())
            .sum()
    }

    pub fn objective_value(&self, x: &BTreeMap<String, bool>) -> Rational {
        LpModel::sum(&self.objective, x)
    }

    /// Names of the constraints `x` violates (unset variables are zero).
    pub fn violated(&self, x: &BTreeMap<String, bool>) -> Vec<&str> {
        self.constraints
            .iter()
            .filter(|c| {
                let lhs = LpModel::sum(&c.terms, x);
                !match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// The assignment encoding `plots` (agent `i` on `plots[i]`) under the
/// naming scheme of [`export_mip`].
pub fn encode_allocation(model: &LpModel, plots: &[usize]) -> BTreeMap<String, bool> {
    let mut x = BTreeMap::new();
    for var in &model.binaries {
        let parts: Vec<usize> = var.split('_').skip(1).filter_map(|p| p.parse().ok()).collect();
        let on = |i: usize, v: usize| plots.get(i) == Some(&v);
        let value = match (var.as_bytes()[0], parts.as_slice()) {
            (b'a', &[i, v]) => on(i, v),
            (b'y', &[i, v, j, w]) => on(i, v) && on(j, w),
            _ => false,
        };
        x.insert(var.clone(), value);
    }
    x
}

/// Best objective value over all complete allocations of `n` agents,
/// checking each encoding against every constraint. The result is in the
/// model's scaled units.
pub fn optimum_over_allocations(model: &LpModel, n: usize) -> Result<Rational> {
    let mut plots: Vec<usize> = (0..n).collect();
    let mut best: Option<Rational> = None;
    loop {
        let x = encode_allocation(model, &plots);
        if let Some(name) = model.violated(&x).first() {
            return Err(Error::InvalidAllocation(format!(
                "allocation {plots:?} violates constraint `{name}`"
            )));
        }
        let value = model.objective_value(&x);
        let better = match &best {
            None => true,
            Some(b) if model.maximize => value > *b,
            Some(b) => value < *b,
        };
        if better {
            best = Some(value);
        }
        if !next_permutation(&mut plots) {
            break;
        }
    }
    Ok(best.expect("at least one allocation"))
}
