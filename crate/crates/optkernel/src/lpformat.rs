//! Plain-text dump in the CPLEX LP dialect, for inspection with other solvers.

use std::fmt::Write as _;
use std::io;

use crate::model::{LinearModel, Sense, VarKind};

fn clean(name: &str, fallback: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect();
    match s.chars().next() {
        None => fallback.to_string(),
        Some(c) if c.is_ascii_digit() || c == '.' => format!("_{s}"),
        _ => s,
    }
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn push_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut any = false;
    for (a, name) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {name}", num(a.abs()));
        any = true;
    }
    if !any {
        out.push_str(" 0");
    }
}

pub fn to_lp_string(model: &LinearModel) -> String {
    let names: Vec<String> = model
        .vars()
        .iter()
        .enumerate()
        .map(|(j, v)| clean(&v.name, &format!("x{j}")))
        .collect();
    let mut out = String::from("Maximize\n obj:");
    push_terms(
        &mut out,
        model.vars().iter().zip(&names).map(|(v, n)| (v.obj, n.clone())),
    );
    out.push_str("\nSubject To\n");
    for (i, row) in model.rows().iter().enumerate() {
        let _ = write!(out, " {}:", clean(&row.name, &format!("r{i}")));
        push_terms(&mut out, row.coeffs.iter().map(|&(v, a)| (a, names[v.0].clone())));
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (v, n) in model.vars().iter().zip(&names) {
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            continue;
        }
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {n} free");
        } else {
            let _ = writeln!(out, " {} <= {n} <= {}", num(v.lower), num(v.upper));
        }
    }
    let bins: Vec<&String> = model
        .vars()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for n in bins {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}

pub fn write_lp(model: &LinearModel, w: &mut impl io::Write) -> io::Result<()> {
    w.write_all(to_lp_string(model).as_bytes())
}
