//! Writer for the CPLEX-style LP text format.

use std::collections::HashSet;
use std::fmt::Write;

use super::{ConstraintSense, MilpModel, VarKind};

const TERMS_PER_LINE: usize = 8;

/// `%.17g`: 17 significant digits, trailing zeros dropped.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.16e}", v);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mant), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Replaces characters outside `[A-Za-z0-9_]` and prefixes names that would
/// start with a digit.
pub fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, 'n');
    }
    out
}

fn unique_names<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = HashSet::new();
    names
        .map(|n| {
            let base = sanitize(n);
            let mut cand = base.clone();
            let mut k = 1;
            while !seen.insert(cand.clone()) {
                cand = format!("{base}_{k}");
                k += 1;
            }
            cand
        })
        .collect()
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names[0]);
        return;
    }
    for (n, (v, a)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n  ");
        }
        let sign = if *a < 0.0 { '-' } else { '+' };
        if n == 0 && sign == '+' {
            let _ = write!(out, " {} {}", fmt_g17(a.abs()), names[*v]);
        } else {
            let _ = write!(out, " {sign} {} {}", fmt_g17(a.abs()), names[*v]);
        }
    }
}

/// Renders a model deterministically: variables and rows in insertion order.
pub fn export_lp_text(m: &MilpModel) -> String {
    let names = unique_names(m.variables().iter().map(|v| v.name.as_str()));
    let rows = unique_names(m.constraints().iter().map(|c| c.name.as_str()));
    let mut out = String::new();
    let _ = writeln!(out, "\\ model {}", sanitize(&m.name));
    out.push_str("Minimize\n obj:");
    let obj: Vec<(usize, f64)> = m
        .objective()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| (i, *c))
        .collect();
    if m.variables().is_empty() {
        out.push_str(" 0");
    } else {
        write_terms(&mut out, &obj, &names);
    }
    if m.objective_constant != 0.0 {
        let sign = if m.objective_constant < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", fmt_g17(m.objective_constant.abs()));
    }
    out.push_str("\nSubject To\n");
    for (c, name) in m.constraints().iter().zip(&rows) {
        let _ = write!(out, " {name}:");
        let terms: Vec<(usize, f64)> = c.coeffs.iter().map(|(v, a)| (v.0, *a)).collect();
        write_terms(&mut out, &terms, &names);
        let op = match c.sense {
            ConstraintSense::Le => "<=",
            ConstraintSense::Ge => ">=",
            ConstraintSense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", fmt_g17(c.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in m.variables().iter().zip(&names) {
        let (lo, hi) = (v.lower, v.upper);
        if v.kind == VarKind::Binary && lo == 0.0 && hi == 1.0 {
            continue;
        }
        if lo == hi {
            let _ = writeln!(out, " {name} = {}", fmt_g17(lo));
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else if hi == f64::INFINITY {
            if lo != 0.0 {
                let _ = writeln!(out, " {name} >= {}", fmt_g17(lo));
            }
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", fmt_g17(lo), fmt_g17(hi));
        }
    }
    let bins: Vec<&String> = m
        .variables()
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(1.5), "1.5");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(-100.0), "-100");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(1.25e-7), "1.2499999999999999e-07");
        assert_eq!(fmt_g17(123456789.0), "123456789");
        for v in [
            std::f64::consts::PI,
            1.0 / 3.0,
            2.0f64.sqrt() * 1e9,
            -7.3e-12,
        ] {
            assert_eq!(fmt_g17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn sanitizes_names() {
        assert_eq!(sanitize("a-b c"), "a_b_c");
        assert_eq!(sanitize("3x"), "n3x");
        assert_eq!(sanitize("ok_1"), "ok_1");
        assert_eq!(
            unique_names(["a-b", "a_b", "a.b"].into_iter()),
            vec!["a_b", "a_b_1", "a_b_2"]
        );
    }
}
