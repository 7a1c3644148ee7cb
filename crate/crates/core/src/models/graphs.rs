//! Discovered laws and polynomial baselines as equation graphs.

use super::ModelId;
use crate::expr::{Expr, ExprGraph, LogBase};

fn p(name: &str, exp: f64) -> Expr {
    Expr::pow(Expr::var(name), exp)
}

fn prod(factors: Vec<Expr>) -> Expr {
    Expr::Mul(factors)
}

fn log10(name: &str) -> Expr {
    Expr::log(Expr::var(name), LogBase::Ten)
}

fn ln(name: &str) -> Expr {
    Expr::log(Expr::var(name), LogBase::Natural)
}

/// Graph form of a discovered law or polynomial baseline; `None` for the
/// empirical and third-party models.
pub fn law_graph(id: ModelId) -> Option<ExprGraph> {
    let terms: Vec<(f64, Expr)> = match id {
        ModelId::AnDiscovered3 => vec![
            (0.0878, prod(vec![p("E", 1.0), p("n", 1.0)])),
            (72.3, prod(vec![log10("d")])),
            (-648.7, Expr::ratio(vec![], prod(vec![p("E", 1.0), log10("E")]))),
        ],
        ModelId::AnDiscovered4 => vec![
            (0.093, prod(vec![p("E", 1.0), p("n", 1.0)])),
            (55.02, prod(vec![log10("d")])),
            (-591.0, prod(vec![p("E", -1.0), p("d", -2.0)])),
            (-5448.0, prod(vec![p("E", -2.0)])),
        ],
        ModelId::AnDiscovered5 => vec![
            (0.0116, prod(vec![p("n", 2.0), p("d", 1.0)])),
            (
                -102.4,
                Expr::ratio(
                    vec![p("n", 1.0)],
                    Expr::Add(vec![(1.0, prod(vec![p("E", 1.0), ln("E")])), (1.0, prod(vec![p("d", 2.0)]))]),
                ),
            ),
            (9.216, prod(vec![p("d", 1.0)])),
            (19.13, prod(vec![ln("n")])),
            (-677.3, prod(vec![p("E", -1.0)])),
        ],
        ModelId::AnPolyBaseline => vec![
            (1.022, prod(vec![p("n", 1.0)])),
            (10.4, prod(vec![p("d", 1.0)])),
            (30.839, Expr::Const),
            (-933.633, prod(vec![p("E", -1.0)])),
        ],
        ModelId::RiDiscovered3 => vec![
            (45.6, prod(vec![log10("E")])),
            (
                -819.5,
                Expr::ratio(
                    vec![],
                    prod(vec![p("d", 1.0), Expr::Add(vec![(1.0, prod(vec![p("E", 1.0)])), (-1.0, Expr::Const)])]),
                ),
            ),
            (0.07, prod(vec![p("n", 1.0), p("d", 2.0)])),
        ],
        ModelId::RiDiscovered4 => vec![
            (
                -117.2,
                Expr::ratio(
                    vec![p("n", 1.0)],
                    Expr::Add(vec![(1.0, prod(vec![p("n", 2.0), p("d", 1.0)])), (-1.0, prod(vec![p("d", 1.0)]))]),
                ),
            ),
            (
                -133.5,
                Expr::ratio(
                    vec![p("n", 1.0)],
                    Expr::Add(vec![(1.0, prod(vec![p("E", 1.0)])), (1.0, prod(vec![p("n", 1.0), p("d", 2.0)]))]),
                ),
            ),
            (98.68, Expr::Const),
            (-629.7, prod(vec![p("E", -1.0)])),
        ],
        ModelId::RiDiscovered5 => vec![
            (-45.87, prod(vec![p("E", 1.0), p("n", -3.0), p("d", -1.0)])),
            (4.499, prod(vec![p("d", 1.0)])),
            (72.88, Expr::Const),
            (-522.2, prod(vec![p("E", -1.0)])),
            (-543.4, prod(vec![p("E", -1.0), p("d", -1.0)])),
        ],
        ModelId::RiPolyBaseline => vec![
            (6.51, prod(vec![p("d", 1.0)])),
            (10.287, prod(vec![log10("n")])),
            (55.22, Expr::Const),
            (-671.7, prod(vec![p("E", -1.0)])),
        ],
        _ => return None,
    };
    Some(ExprGraph::from_terms(&terms))
}
