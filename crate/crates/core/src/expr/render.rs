use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::{Expr, ExprGraph, LogBase, TemplateKind};

/// Six significant digits: fixed notation for moderate magnitudes, scientific otherwise.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0.00000".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    // Rounding can bump the magnitude (e.g. 999999.5 -> 1.00000e6).
    let rounded_exp = {
        let s = format!("{:.5e}", v);
        s.rsplit('e').next().and_then(|e| e.parse::<i32>().ok()).unwrap_or(exp)
    };
    if (-5..6).contains(&rounded_exp) {
        let decimals = (5 - rounded_exp).max(0) as usize;
        format!("{:.*}", decimals, v)
    } else {
        format!("{:.5e}", v)
    }
}

fn format_exponent(p: f64) -> String {
    if p.fract() == 0.0 && p.abs() < 1e15 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

fn needs_parens(e: &Expr) -> bool {
    match e {
        Expr::Add(_) => true,
        Expr::Mul(items) => items.len() != 1 || needs_parens(&items[0]),
        _ => false,
    }
}

pub(crate) fn render_expr(e: &Expr) -> String {
    match e {
        Expr::Var(name) => name.clone(),
        Expr::Const => "1".to_string(),
        Expr::Mul(items) => {
            if items.is_empty() {
                return "1".to_string();
            }
            items
                .iter()
                .map(|item| {
                    let s = render_expr(item);
                    if matches!(item, Expr::Add(_)) {
                        format!("({s})")
                    } else {
                        s
                    }
                })
                .collect::<Vec<_>>()
                .join("*")
        }
        Expr::Pow(inner, p) => {
            let base = render_expr(inner);
            let base = if needs_parens(inner) { format!("({base})") } else { base };
            if *p == 1.0 {
                base
            } else {
                format!("{base}^{}", format_exponent(*p))
            }
        }
        Expr::Log(inner, base) => {
            let arg = render_expr(inner);
            match base {
                LogBase::Ten => format!("log10({arg})"),
                LogBase::Natural => format!("ln({arg})"),
            }
        }
        Expr::Add(items) => {
            let mut s = String::new();
            for (i, (c, item)) in items.iter().enumerate() {
                let body = render_expr(item);
                let is_const = matches!(item, Expr::Const);
                let (neg, mag) = if *c < 0.0 { (true, -*c) } else { (false, *c) };
                let piece = if is_const {
                    format_coef_plain(mag)
                } else if mag == 1.0 {
                    body
                } else {
                    format!("{}*{body}", format_coef_plain(mag))
                };
                match (i, neg) {
                    (0, false) => s.push_str(&piece),
                    (0, true) => {
                        s.push('-');
                        s.push_str(&piece);
                    }
                    (_, false) => {
                        s.push_str(" + ");
                        s.push_str(&piece);
                    }
                    (_, true) => {
                        s.push_str(" - ");
                        s.push_str(&piece);
                    }
                }
            }
            s
        }
    }
}

// Inner (unit-scale) coefficients print compactly; root coefficients use `format_sig6`.
fn format_coef_plain(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format_sig6(v)
    }
}

pub(crate) fn render_term(coef: f64, term: &Expr) -> String {
    match term {
        Expr::Const => format_sig6(coef),
        _ => format!("{}*{}", format_sig6(coef), render_expr(term)),
    }
}

/// Recursively sorts commutative operands by their rendering.
fn canonical_expr(e: &Expr) -> Expr {
    match e {
        Expr::Var(_) | Expr::Const => e.clone(),
        Expr::Pow(inner, p) => Expr::Pow(Box::new(canonical_expr(inner)), *p),
        Expr::Log(inner, b) => Expr::Log(Box::new(canonical_expr(inner)), *b),
        Expr::Mul(items) => {
            let mut v: Vec<Expr> = items.iter().map(canonical_expr).collect();
            v.sort_by_cached_key(render_expr);
            Expr::Mul(v)
        }
        Expr::Add(items) => {
            let mut v: Vec<(f64, Expr)> =
                items.iter().map(|(c, e)| (*c, canonical_expr(e))).collect();
            v.sort_by(|a, b| {
                // Constants last inside inner sums.
                matches!(a.1, Expr::Const)
                    .cmp(&matches!(b.1, Expr::Const))
                    .then_with(|| render_expr(&a.1).cmp(&render_expr(&b.1)))
                    .then_with(|| b.0.total_cmp(&a.0))
            });
            Expr::Add(v)
        }
    }
}

fn exponents(e: &Expr, out: &mut Vec<f64>) {
    match e {
        Expr::Var(_) | Expr::Const => {}
        Expr::Pow(inner, p) => {
            out.push(*p);
            exponents(inner, out);
        }
        Expr::Log(inner, _) => exponents(inner, out),
        Expr::Mul(items) => items.iter().for_each(|i| exponents(i, out)),
        Expr::Add(items) => items.iter().for_each(|(_, i)| exponents(i, out)),
    }
}

fn kind_rank(e: &Expr) -> u8 {
    match TemplateKind::classify(e) {
        TemplateKind::PolynomialTerm => 0,
        TemplateKind::RationalTerm => 1,
        TemplateKind::LogarithmicTerm => 2,
        TemplateKind::ConstantTerm => 3,
    }
}

fn term_order(a: &(f64, Expr), b: &(f64, Expr)) -> Ordering {
    let vars = |e: &Expr| {
        let mut s = BTreeSet::new();
        e.variables(&mut s);
        s.into_iter().collect::<Vec<_>>()
    };
    let exps = |e: &Expr| {
        let mut v = Vec::new();
        exponents(e, &mut v);
        v
    };
    kind_rank(&a.1)
        .cmp(&kind_rank(&b.1))
        .then_with(|| vars(&a.1).cmp(&vars(&b.1)))
        .then_with(|| {
            let (ea, eb) = (exps(&a.1), exps(&b.1));
            ea.iter()
                .zip(&eb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| ea.len().cmp(&eb.len()))
        })
        .then_with(|| render_expr(&a.1).cmp(&render_expr(&b.1)))
        .then_with(|| a.0.total_cmp(&b.0))
}

pub(crate) fn canonical_terms(terms: &[(f64, Expr)]) -> Vec<(f64, Expr)> {
    let mut v: Vec<(f64, Expr)> = terms.iter().map(|(c, e)| (*c, canonical_expr(e))).collect();
    v.sort_by(term_order);
    v
}

impl ExprGraph {
    /// Canonical infix form, terms joined by `" + "`.
    pub fn render(&self) -> String {
        canonical_terms(&self.terms())
            .iter()
            .map(|(c, e)| render_term(*c, e))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}
