//! Textual program output.
//!
//! `lp-style` is CPLEX LP: the quadratic objective in `[ ... ] / 2` form,
//! max/min groups expanded into big-M constraints over binaries
//! `b_<group>_<k>`. Only degree-2 programs can be written this way.
//!
//! The native format has one declaration per line and keeps product terms of
//! any degree and the groups symbolic:
//!
//! ```text
//! vars 4 0
//! term v_1 (v_1 - v_0) (v_1 - 0.3333333333333333*v_1 - 0.3333333333333333*v_2 - 0.3333333333333333*v_3)
//! con single v_0 = v_1
//! con player v_1 >= v_0
//! group v_1 = max { 0; 0.3333333333333333*v_1 + 0.3333333333333333*v_2 + 0.3333333333333333*v_3 }
//! ```
//!
//! Affine expressions are sums of `c`, `x` or `c*x` separated by ` + ` or
//! ` - `; numbers use the shortest representation that reads back to the
//! same float, so emitting, parsing and emitting again is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, ParseError, Result};
use crate::mathprog::program::{
    Affine, Constraint, ConstraintKind, GroupOp, MathProgram, MaxMinGroup, ProductTerm, Relation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProgramFormat {
    LpStyle,
    Native,
}

pub fn emit_program(prog: &MathProgram, format: ProgramFormat) -> Result<String> {
    match format {
        ProgramFormat::LpStyle => emit_lp(prog),
        ProgramFormat::Native => Ok(emit_native(prog)),
    }
}

fn var_name(prog: &MathProgram, v: usize) -> String {
    prog.var_name(v).to_string()
}

fn fmt_num(x: f64) -> String {
    format!("{}", if x == 0.0 { 0.0 } else { x })
}

fn write_affine(out: &mut String, prog: &MathProgram, e: &Affine) {
    let mut first = true;
    if e.constant != 0.0 || e.coeffs.is_empty() {
        out.push_str(&fmt_num(e.constant));
        first = false;
    }
    for &(v, c) in &e.coeffs {
        let name = var_name(prog, v);
        let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
        if first {
            if sign == "-" {
                out.push('-');
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag == 1.0 {
            out.push_str(&name);
        } else {
            let _ = write!(out, "{}*{name}", fmt_num(mag));
        }
        first = false;
    }
}

fn affine_string(prog: &MathProgram, e: &Affine) -> String {
    let mut s = String::new();
    write_affine(&mut s, prog, e);
    s
}

pub fn emit_native(prog: &MathProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vars {} {}", prog.num_states, prog.num_aux);
    for t in &prog.terms {
        let _ = write!(out, "term v_{}", t.state);
        for f in &t.factors {
            let _ = write!(out, " ({})", affine_string(prog, f));
        }
        out.push('\n');
    }
    for c in &prog.constraints {
        let _ = writeln!(
            out,
            "con {} {} {} {}",
            c.kind.keyword(),
            affine_string(prog, &c.lhs),
            c.rel.symbol(),
            affine_string(prog, &c.rhs)
        );
    }
    for g in &prog.groups {
        let ops: Vec<String> = g.operands.iter().map(|e| affine_string(prog, e)).collect();
        let _ = writeln!(out, "group {} = {} {{ {} }}", var_name(prog, g.target), g.op.keyword(), ops.join("; "));
    }
    out
}

/// Parses the native format written by [`emit_native`].
pub fn parse_native(text: &str) -> Result<MathProgram> {
    let mut prog: Option<MathProgram> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse(ParseError::new(line_no, 1, msg));
        let (keyword, rest) = line.split_once(' ').unwrap_or((line, ""));
        if keyword == "vars" {
            let nums: Vec<usize> = rest
                .split_whitespace()
                .map(|w| w.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| err("expected two counts".into()))?;
            if nums.len() != 2 {
                return Err(err("expected two counts".into()));
            }
            let mut p = MathProgram::new(nums[0]);
            p.num_aux = nums[1];
            prog = Some(p);
            continue;
        }
        let p = prog.as_mut().ok_or_else(|| err("`vars` must come first".into()))?;
        let parse_aff = |s: &str| parse_affine(s, p.num_states, p.num_vars()).map_err(&err);
        match keyword {
            "term" => {
                let (head, factors) = rest.split_once(' ').ok_or_else(|| err("term without factors".into()))?;
                let state = parse_var(head, p.num_states, p.num_vars())
                    .filter(|&v| v < p.num_states)
                    .ok_or_else(|| err(format!("bad state variable `{head}`")))?;
                let mut fs = Vec::new();
                let mut rem = factors.trim();
                while !rem.is_empty() {
                    let inner = rem.strip_prefix('(').ok_or_else(|| err("expected `(`".into()))?;
                    let close = inner.find(')').ok_or_else(|| err("missing `)`".into()))?;
                    fs.push(parse_aff(&inner[..close])?);
                    rem = inner[close + 1..].trim_start();
                }
                p.terms.push(ProductTerm { state, factors: fs });
            }
            "con" => {
                let (kind, body) = rest.split_once(' ').ok_or_else(|| err("incomplete constraint".into()))?;
                let kind = match kind {
                    "pin" => ConstraintKind::Pin,
                    "single" => ConstraintKind::Single,
                    "player" => ConstraintKind::Player,
                    other => return Err(err(format!("unknown constraint kind `{other}`"))),
                };
                let (rel, pos, len) = [(" <= ", Relation::Le), (" >= ", Relation::Ge), (" = ", Relation::Eq)]
                    .iter()
                    .find_map(|(sym, rel)| body.find(sym).map(|pos| (*rel, pos, sym.len())))
                    .ok_or_else(|| err("missing relation".into()))?;
                let lhs = parse_aff(&body[..pos])?;
                let rhs = parse_aff(&body[pos + len..])?;
                p.constraints.push(Constraint { kind, lhs, rel, rhs });
            }
            "group" => {
                let (target, body) = rest.split_once(" = ").ok_or_else(|| err("expected `=`".into()))?;
                let target = parse_var(target.trim(), p.num_states, p.num_vars())
                    .ok_or_else(|| err(format!("bad variable `{target}`")))?;
                let (op, body) = body.split_once(' ').ok_or_else(|| err("expected operator".into()))?;
                let op = match op {
                    "max" => GroupOp::Max,
                    "min" => GroupOp::Min,
                    other => return Err(err(format!("unknown group operator `{other}`"))),
                };
                let inner = body
                    .trim()
                    .strip_prefix('{')
                    .and_then(|b| b.strip_suffix('}'))
                    .ok_or_else(|| err("expected `{ ... }`".into()))?;
                let operands = inner.split(';').map(|e| parse_aff(e.trim())).collect::<Result<Vec<_>>>()?;
                p.groups.push(MaxMinGroup { target, op, operands, big_m: 1.0 });
            }
            other => return Err(err(format!("unknown declaration `{other}`"))),
        }
    }
    prog.ok_or_else(|| Error::Parse(ParseError::new(1, 1, "missing `vars`")))
}

fn parse_var(s: &str, num_states: usize, num_vars: usize) -> Option<usize> {
    let v = if let Some(i) = s.strip_prefix("v_") {
        i.parse::<usize>().ok()?
    } else {
        num_states + s.strip_prefix("w_")?.parse::<usize>().ok()?
    };
    (v < num_vars).then_some(v)
}

fn parse_affine(s: &str, num_states: usize, num_vars: usize) -> std::result::Result<Affine, String> {
    let mut tokens = s.split_whitespace();
    let mut sign = 1.0;
    let mut constant = 0.0;
    let mut coeffs: Vec<(usize, f64)> = Vec::new();
    let mut expect_term = true;
    for tok in tokens.by_ref() {
        if !expect_term {
            sign = match tok {
                "+" => 1.0,
                "-" => -1.0,
                _ => return Err(format!("expected `+` or `-`, found `{tok}`")),
            };
            expect_term = true;
            continue;
        }
        let (neg, body) = match tok.strip_prefix('-') {
            Some(b) if b.starts_with(['v', 'w']) => (-1.0, b),
            _ => (1.0, tok),
        };
        if let Some((c, v)) = body.split_once('*') {
            let c: f64 = c.parse().map_err(|_| format!("bad coefficient `{c}`"))?;
            let v = parse_var(v, num_states, num_vars).ok_or_else(|| format!("bad variable `{v}`"))?;
            coeffs.push((v, sign * neg * c));
        } else if let Some(v) = parse_var(body, num_states, num_vars) {
            coeffs.push((v, sign * neg));
        } else {
            let c: f64 = tok.parse().map_err(|_| format!("bad term `{tok}`"))?;
            constant += sign * c;
        }
        expect_term = false;
    }
    if expect_term {
        return Err("incomplete expression".into());
    }
    Ok(Affine::from_terms(constant, coeffs))
}

/// Quadratic form of a product of two affine expressions: constant, linear
/// and (ordered pair) quadratic coefficients.
type Quadratic = (f64, BTreeMap<usize, f64>, BTreeMap<(usize, usize), f64>);

fn expand_product(a: &Affine, b: &Affine, acc: &mut Quadratic) {
    acc.0 += a.constant * b.constant;
    for &(v, c) in &a.coeffs {
        *acc.1.entry(v).or_insert(0.0) += c * b.constant;
    }
    for &(v, c) in &b.coeffs {
        *acc.1.entry(v).or_insert(0.0) += c * a.constant;
    }
    for &(u, cu) in &a.coeffs {
        for &(v, cv) in &b.coeffs {
            let key = if u <= v { (u, v) } else { (v, u) };
            *acc.2.entry(key).or_insert(0.0) += cu * cv;
        }
    }
}

fn lp_linear(out: &mut String, prog: &MathProgram, coeffs: impl IntoIterator<Item = (usize, f64)>) -> bool {
    let mut any = false;
    for (v, c) in coeffs {
        if c == 0.0 {
            continue;
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        let _ = write!(out, " {sign} {} {}", fmt_num(c.abs()), var_name(prog, v));
        any = true;
    }
    any
}

/// `lhs - rhs` as linear part and right-hand constant.
fn lp_row(prog: &MathProgram, name: &str, e: &Affine, rel: &str, out: &mut String) {
    let _ = write!(out, " {name}:");
    if !lp_linear(out, prog, e.coeffs.iter().copied()) {
        let _ = write!(out, " 0 {}", var_name(prog, 0));
    }
    let _ = writeln!(out, " {rel} {}", fmt_num(-e.constant));
}

pub fn emit_lp(prog: &MathProgram) -> Result<String> {
    if let Some(t) = prog.terms.iter().find(|t| t.degree() > 2) {
        return Err(Error::DegreeTooHigh { state: t.state, degree: t.degree() });
    }
    let mut q: Quadratic = (0.0, BTreeMap::new(), BTreeMap::new());
    for t in &prog.terms {
        match t.factors.as_slice() {
            [a, b] => expand_product(a, b, &mut q),
            [a] => {
                q.0 += a.constant;
                for &(v, c) in &a.coeffs {
                    *q.1.entry(v).or_insert(0.0) += c;
                }
            }
            _ => {}
        }
    }
    let mut out = String::new();
    out.push_str("\\ value program\nMinimize\n obj:");
    let linear = lp_linear(&mut out, prog, q.1.iter().map(|(&v, &c)| (v, c)));
    let quad: Vec<_> = q.2.iter().filter(|(_, &c)| c != 0.0).collect();
    if !quad.is_empty() {
        out.push_str(" + [");
        for (i, (&(u, v), &c)) in quad.iter().enumerate() {
            let c2 = 2.0 * c;
            let sign = if c2 < 0.0 {
                "-"
            } else if i == 0 {
                ""
            } else {
                "+"
            };
            let sep = if i == 0 && sign.is_empty() { "" } else { " " };
            let term = if u == v {
                format!("{} ^2", var_name(prog, u))
            } else {
                format!("{} * {}", var_name(prog, u), var_name(prog, v))
            };
            let _ = write!(out, "{sep}{sign} {} {term}", fmt_num(c2.abs()));
        }
        out.push_str(" ] / 2");
    } else if !linear {
        let _ = write!(out, " 0 {}", var_name(prog, 0));
    }
    if q.0 != 0.0 {
        let _ = write!(out, " + {}", fmt_num(q.0));
    }
    out.push_str("\nSubject To\n");
    for (i, c) in prog.constraints.iter().enumerate() {
        let e = c.lhs.minus(&c.rhs);
        let rel = match c.rel {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        lp_row(prog, &format!("c{i}"), &e, rel, &mut out);
    }
    for (gi, g) in prog.groups.iter().enumerate() {
        let _ = write!(out, " g{gi}_sel:");
        for k in 0..g.operands.len() {
            let _ = write!(out, " + b_{gi}_{k}");
        }
        out.push_str(" = 1\n");
        let target = Affine::var(g.target);
        for (k, operand) in g.operands.iter().enumerate() {
            let d = target.minus(operand);
            // max: target >= operand and target <= operand + M (1 - b)
            // min: target <= operand and target >= operand - M (1 - b)
            let (bound, link) = match g.op {
                GroupOp::Max => (">=", "<="),
                GroupOp::Min => ("<=", ">="),
            };
            lp_row(prog, &format!("g{gi}_bound{k}"), &d, bound, &mut out);
            let m = g.big_m;
            let _ = write!(out, " g{gi}_link{k}:");
            lp_linear(&mut out, prog, d.coeffs.iter().copied());
            let (coef, rhs) = match g.op {
                GroupOp::Max => (m, m - d.constant),
                GroupOp::Min => (-m, -m - d.constant),
            };
            let sign = if coef < 0.0 { "-" } else { "+" };
            let _ = writeln!(out, " {sign} {} b_{gi}_{k} {link} {}", fmt_num(coef.abs()), fmt_num(rhs));
        }
    }
    out.push_str("Bounds\n");
    for v in 0..prog.num_vars() {
        let _ = writeln!(out, " 0 <= {} <= 1", var_name(prog, v));
    }
    if prog.num_binaries() > 0 {
        out.push_str("Binaries\n");
        for (gi, g) in prog.groups.iter().enumerate() {
            for k in 0..g.operands.len() {
                let _ = writeln!(out, " b_{gi}_{k}");
            }
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::fig1;
    use crate::generators::{gen_random, RandomGameParams};
    use crate::mathprog::encode::encode_hop;

    #[test]
    fn fig1_lp_has_one_quadratic_term_and_four_binaries() {
        let prog = encode_hop(&fig1()).unwrap();
        let lp = emit_lp(&prog).unwrap();
        assert!(lp.starts_with("\\ value program\nMinimize\n obj:"));
        let binaries = lp.split("Binaries\n").nth(1).unwrap();
        assert_eq!(binaries.lines().filter(|l| l.trim().starts_with("b_")).count(), 4);
        assert!(lp.contains("] / 2"));
        assert!(lp.contains("0 <= v_3 <= 1"));
    }

    #[test]
    fn lp_rejects_high_degree() {
        let mut b = crate::game::GameBuilder::new(4);
        for s in 0..4 {
            b.owner(s, crate::game::Player::Maximizer);
        }
        b.target(1);
        for name in ["x", "y", "z"] {
            b.action_frac(0, name, &[(1, 1, 2), (2, 1, 2)]);
        }
        b.action_frac(2, "s", &[(3, 1, 1)]).action_frac(3, "s", &[(3, 1, 1)]);
        let prog = encode_hop(&b.build().unwrap()).unwrap();
        assert!(matches!(emit_lp(&prog), Err(Error::DegreeTooHigh { state: 0, degree: 4 })));
        assert!(emit_program(&prog, ProgramFormat::Native).is_ok());
    }

    #[test]
    fn native_round_trip_is_byte_identical() {
        let mut progs = vec![encode_hop(&fig1()).unwrap()];
        for seed in 0..20 {
            if let Ok(p) = encode_hop(&gen_random(seed, &RandomGameParams::default())) {
                progs.push(p);
            }
        }
        for prog in progs {
            let text = emit_native(&prog);
            let parsed = parse_native(&text).unwrap();
            assert_eq!(parsed, prog);
            assert_eq!(emit_native(&parsed), text);
        }
    }

    #[test]
    fn parses_signs_and_constants() {
        let e = parse_affine("-0.5 + v_1 - 2*v_0 - w_0", 2, 3).unwrap();
        assert_eq!(e, Affine::from_terms(-0.5, [(1, 1.0), (0, -2.0), (2, -1.0)]));
        let e = parse_affine("-v_1", 2, 2).unwrap();
        assert_eq!(e, Affine::from_terms(0.0, [(1, -1.0)]));
        assert!(parse_affine("v_1 +", 2, 2).is_err());
        assert!(parse_affine("v_9", 2, 2).is_err());
    }
}
