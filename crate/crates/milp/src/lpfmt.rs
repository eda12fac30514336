//! Writer for the plain-text LP interchange format (debugging aid: dumped
//! models load into any off-the-shelf solver for cross-checks).

use std::fmt::Write as _;

use crate::model::{Model, RowSense, VarKind};

fn sanitize(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() || s.chars().next().unwrap().is_ascii_digit() {
        s.insert(0, 'v');
    }
    s
}

fn push_term(out: &mut String, first: &mut bool, coef: f64, name: &str) {
    if coef == 0.0 {
        return;
    }
    if *first {
        if coef < 0.0 {
            out.push_str("- ");
        }
    } else if coef < 0.0 {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    let a = coef.abs();
    if (a - 1.0).abs() < 1e-15 {
        out.push_str(name);
    } else {
        let _ = write!(out, "{a} {name}");
    }
    *first = false;
}

/// Render the model in LP format (maximization).
pub fn write_lp(model: &Model) -> String {
    let names: Vec<String> = model.vars().map(|(_, v)| sanitize(&v.name)).collect();
    let mut out = String::new();
    out.push_str("Maximize\n obj:");
    let mut first = true;
    let mut body = String::new();
    for (i, (_, v)) in model.vars().enumerate() {
        push_term(&mut body, &mut first, v.obj, &names[i]);
    }
    if first {
        body.push('0');
    }
    out.push(' ');
    out.push_str(&body);
    out.push_str("\nSubject To\n");
    for (_, row) in model.rows() {
        let mut line = String::new();
        let mut first = true;
        for &(v, c) in &row.coefs {
            push_term(&mut line, &mut first, c, &names[v.index()]);
        }
        if first {
            line.push('0');
        }
        let sense = match row.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        let _ = writeln!(out, " {}: {} {} {}", sanitize(&row.name), line, sense, row.rhs);
    }
    out.push_str("Bounds\n");
    for (i, (_, v)) in model.vars().enumerate() {
        let lo_inf = !v.lo.is_finite();
        let hi_inf = !v.hi.is_finite();
        match (lo_inf, hi_inf) {
            (true, true) => {
                let _ = writeln!(out, " {} free", names[i]);
            }
            (true, false) => {
                let _ = writeln!(out, " -inf <= {} <= {}", names[i], v.hi);
            }
            (false, true) => {
                let _ = writeln!(out, " {} >= {}", names[i], v.lo);
            }
            (false, false) => {
                let _ = writeln!(out, " {} <= {} <= {}", v.lo, names[i], v.hi);
            }
        }
    }
    let bins: Vec<&str> = model
        .vars()
        .enumerate()
        .filter(|(_, (_, v))| v.kind == VarKind::Integer && v.lo >= 0.0 && v.hi <= 1.0)
        .map(|(i, _)| names[i].as_str())
        .collect();
    let gens: Vec<&str> = model
        .vars()
        .enumerate()
        .filter(|(_, (_, v))| v.kind == VarKind::Integer && !(v.lo >= 0.0 && v.hi <= 1.0))
        .map(|(i, _)| names[i].as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for n in bins {
            let _ = writeln!(out, " {n}");
        }
    }
    if !gens.is_empty() {
        out.push_str("Generals\n");
        for n in gens {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}

// ==================================================================
// tests
// ==================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, RowSense};

    #[test]
    fn renders_sections_and_senses() {
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, 3.0, 3.0);
        let d = m.add_bin("pick me", 1.0);
        let k = m.add_int("k", 0.0, 7.0, 0.5);
        m.add_row("cap", RowSense::Le, 4.0, &[(x, 1.0), (d, 2.0)]);
        m.add_row("floor", RowSense::Ge, 1.0, &[(k, 1.0), (x, -0.5)]);
        let text = write_lp(&m);
        assert!(text.starts_with("Maximize"));
        assert!(text.contains("Subject To"));
        assert!(text.contains("cap: x + 2 pick_me <= 4"));
        assert!(text.contains("floor: k - 0.5 x >= 1"));
        assert!(text.contains("Binaries"));
        assert!(text.contains("Generals"));
        assert!(text.ends_with("End\n"));
    }
}
