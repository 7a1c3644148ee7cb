use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Expr, LogBase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    PolynomialTerm,
    RationalTerm,
    LogarithmicTerm,
    ConstantTerm,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 4] = [
        TemplateKind::PolynomialTerm,
        TemplateKind::RationalTerm,
        TemplateKind::LogarithmicTerm,
        TemplateKind::ConstantTerm,
    ];

    /// Best-effort classification of an existing term.
    pub fn classify(term: &Expr) -> TemplateKind {
        fn has_log(e: &Expr) -> bool {
            match e {
                Expr::Log(..) => true,
                Expr::Var(_) | Expr::Const => false,
                Expr::Pow(i, _) => has_log(i),
                Expr::Mul(items) => items.iter().any(has_log),
                Expr::Add(items) => items.iter().any(|(_, i)| has_log(i)),
            }
        }
        match term {
            Expr::Const => TemplateKind::ConstantTerm,
            Expr::Mul(items) => {
                let reciprocal = items
                    .iter()
                    .any(|i| matches!(i, Expr::Pow(inner, p) if *p < 0.0 && !matches!(**inner, Expr::Var(_))));
                if reciprocal {
                    TemplateKind::RationalTerm
                } else if items.iter().any(has_log) {
                    TemplateKind::LogarithmicTerm
                } else {
                    TemplateKind::PolynomialTerm
                }
            }
            Expr::Log(..) => TemplateKind::LogarithmicTerm,
            _ => TemplateKind::PolynomialTerm,
        }
    }
}

/// Discrete exponent set, sorted, never containing 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct ExponentAlphabet(Vec<i32>);

impl TryFrom<Vec<i32>> for ExponentAlphabet {
    type Error = &'static str;

    fn try_from(v: Vec<i32>) -> Result<Self, Self::Error> {
        ExponentAlphabet::new(v).ok_or("exponent alphabet must be non-empty and exclude 0")
    }
}

impl From<ExponentAlphabet> for Vec<i32> {
    fn from(a: ExponentAlphabet) -> Vec<i32> {
        a.0
    }
}

impl ExponentAlphabet {
    /// All non-zero integers in `[lo, hi]`. Returns `None` if that set is empty.
    pub fn from_range(lo: i32, hi: i32) -> Option<ExponentAlphabet> {
        let v: Vec<i32> = (lo..=hi).filter(|&p| p != 0).collect();
        (!v.is_empty()).then_some(ExponentAlphabet(v))
    }

    /// Sorts and dedups `values`. Returns `None` if empty or if 0 is present.
    pub fn new(mut values: Vec<i32>) -> Option<ExponentAlphabet> {
        values.sort_unstable();
        values.dedup();
        (!values.is_empty() && !values.contains(&0)).then_some(ExponentAlphabet(values))
    }

    pub fn values(&self) -> &[i32] {
        &self.0
    }

    pub fn contains(&self, p: f64) -> bool {
        p.fract() == 0.0 && self.0.contains(&(p as i32))
    }

    /// Positive members; falls back to absolute values if there are none.
    pub fn positive(&self) -> Vec<i32> {
        let pos: Vec<i32> = self.0.iter().copied().filter(|&p| p > 0).collect();
        if pos.is_empty() {
            let mut abs: Vec<i32> = self.0.iter().map(|p| p.abs()).collect();
            abs.sort_unstable();
            abs.dedup();
            abs
        } else {
            pos
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        *self.0.choose(rng).expect("non-empty alphabet") as f64
    }

    pub fn sample_positive<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        *self.positive().choose(rng).expect("non-empty alphabet") as f64
    }
}

impl Default for ExponentAlphabet {
    fn default() -> Self {
        ExponentAlphabet::from_range(-3, 3).expect("non-empty")
    }
}

/// Draws single-term subgraphs from the template family.
#[derive(Debug, Clone)]
pub struct TemplateSampler {
    pub variables: Vec<String>,
    pub alphabet: ExponentAlphabet,
    pub allow_log: bool,
    /// Most distinct variables in one power product.
    pub max_factors: usize,
}

impl TemplateSampler {
    pub fn new(variables: Vec<String>, alphabet: ExponentAlphabet) -> TemplateSampler {
        assert!(!variables.is_empty(), "template sampling needs at least one variable");
        TemplateSampler {
            variables,
            alphabet,
            allow_log: true,
            max_factors: 3,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, kind: TemplateKind, rng: &mut R) -> Expr {
        match kind {
            TemplateKind::PolynomialTerm => self.polynomial(rng),
            TemplateKind::RationalTerm => self.rational(rng),
            TemplateKind::LogarithmicTerm if self.allow_log => self.logarithmic(rng),
            TemplateKind::LogarithmicTerm => self.polynomial(rng),
            TemplateKind::ConstantTerm => Expr::Const,
        }
    }

    fn pick_vars<R: Rng + ?Sized>(&self, rng: &mut R, lo: usize, hi: usize) -> Vec<String> {
        let hi = hi.min(self.variables.len()).min(self.max_factors.max(1));
        let lo = lo.min(hi);
        let k = rng.gen_range(lo..=hi);
        let mut picked: Vec<String> = self.variables.choose_multiple(rng, k).cloned().collect();
        // Keep dataset column order so equal structures build equal graphs.
        picked.sort_by_key(|v| self.variables.iter().position(|x| x == v));
        picked
    }

    fn product<R: Rng + ?Sized>(&self, rng: &mut R, vars: &[String], positive: bool) -> Vec<Expr> {
        vars.iter()
            .map(|v| {
                let p = if positive {
                    self.alphabet.sample_positive(rng)
                } else {
                    self.alphabet.sample(rng)
                };
                Expr::pow(Expr::Var(v.clone()), p)
            })
            .collect()
    }

    /// `Π xᵢ^{pᵢ}` over 1..=3 distinct variables.
    fn polynomial<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        let vars = self.pick_vars(rng, 1, 3);
        Expr::Mul(self.product(rng, &vars, false))
    }

    fn log_base<R: Rng + ?Sized>(rng: &mut R) -> LogBase {
        if rng.gen_bool(0.5) {
            LogBase::Ten
        } else {
            LogBase::Natural
        }
    }

    /// `log_b(Π xᵢ^{pᵢ})` wrapped in a unit product so the term keeps a coefficient slot.
    fn logarithmic<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        let vars = self.pick_vars(rng, 1, 2);
        let arg = Expr::Mul(self.product(rng, &vars, true));
        Expr::Mul(vec![Expr::log(arg, Self::log_base(rng))])
    }

    fn denominator_summand<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        let vars = self.pick_vars(rng, 1, 2);
        let mut factors = self.product(rng, &vars, true);
        if self.allow_log && rng.gen_bool(0.25) {
            let v = self.variables.choose(rng).expect("non-empty").clone();
            factors.push(Expr::log(Expr::Var(v), Self::log_base(rng)));
        }
        Expr::Mul(factors)
    }

    /// `N(x) / ([F(x)·] (s₁ ± s₂ ± 1))`, encoded as `Mul(N, Pow(D, -1))`.
    fn rational<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        let num_vars = self.pick_vars(rng, 0, 2);
        let numerator = self.product(rng, &num_vars, true);

        let sign = |rng: &mut R| if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut summands = vec![(1.0, self.denominator_summand(rng))];
        if rng.gen_bool(0.5) {
            let s = sign(rng);
            summands.push((s, self.denominator_summand(rng)));
        }
        if rng.gen_bool(0.3) {
            let s = sign(rng);
            summands.push((s, Expr::Const));
        }
        let sum = Expr::Add(summands);
        let denominator = if rng.gen_bool(0.3) {
            let v = self.pick_vars(rng, 1, 1);
            let mut f = self.product(rng, &v, true);
            f.push(sum);
            Expr::Mul(f)
        } else {
            sum
        };
        Expr::ratio(numerator, denominator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ExprGraph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sampler() -> TemplateSampler {
        TemplateSampler::new(
            vec!["E".into(), "n".into(), "d".into()],
            ExponentAlphabet::default(),
        )
    }

    #[test]
    fn default_alphabet() {
        assert_eq!(ExponentAlphabet::default().values(), &[-3, -2, -1, 1, 2, 3]);
        assert!(ExponentAlphabet::from_range(0, 0).is_none());
    }

    #[test]
    fn polynomial_shape() {
        let s = sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let Expr::Mul(items) = s.sample(TemplateKind::PolynomialTerm, &mut rng) else {
                panic!("polynomial must be a product");
            };
            assert!((1..=3).contains(&items.len()));
            for it in items {
                let Expr::Pow(inner, p) = it else { panic!("expected pow") };
                assert!(matches!(*inner, Expr::Var(_)));
                assert!(s.alphabet.contains(p));
            }
        }
    }

    #[test]
    fn logarithmic_has_exactly_one_log() {
        let s = sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let t = s.sample(TemplateKind::LogarithmicTerm, &mut rng);
            let g = ExprGraph::from_terms(&[(1.0, t)]);
            let logs: Vec<_> = g
                .nodes()
                .iter()
                .enumerate()
                .filter(|(_, n)| n.kind == crate::expr::OperatorKind::Log)
                .collect();
            assert_eq!(logs.len(), 1);
            let parent_edge = g
                .nodes()
                .iter()
                .flat_map(|n| n.children.iter())
                .find(|e| e.child == logs[0].0)
                .unwrap();
            assert!(LogBase::from_value(parent_edge.feature).is_some());
        }
    }

    #[test]
    fn rational_denominators_have_one_or_two_products() {
        let s = sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let t = s.sample(TemplateKind::RationalTerm, &mut rng);
            assert_eq!(TemplateKind::classify(&t), TemplateKind::RationalTerm);
            let Expr::Mul(items) = &t else { panic!() };
            let Some(Expr::Pow(den, p)) = items.last() else { panic!() };
            assert_eq!(*p, -1.0);
            let sum = match &**den {
                Expr::Add(s) => s,
                Expr::Mul(f) => match f.last() {
                    Some(Expr::Add(s)) => s,
                    _ => panic!("factored denominator must end in a sum"),
                },
                _ => panic!("unexpected denominator"),
            };
            let products = sum.iter().filter(|(_, e)| matches!(e, Expr::Mul(_))).count();
            assert!((1..=2).contains(&products), "{products}");
            assert!(sum.iter().all(|(c, _)| c.abs() == 1.0));
            assert!(ExprGraph::from_terms(&[(1.0, t.clone())]).validate(1).is_ok());
        }
    }

    #[test]
    fn every_kind_validates_under_add_root() {
        let s = sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in TemplateKind::ALL {
            for _ in 0..200 {
                let g = ExprGraph::from_terms(&[(1.0, s.sample(kind, &mut rng))]);
                assert_eq!(g.validate(1), Ok(()));
            }
        }
    }

    #[test]
    fn classify_round_trips_kinds() {
        let s = sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in TemplateKind::ALL {
            let t = s.sample(kind, &mut rng);
            assert_eq!(TemplateKind::classify(&t), kind);
        }
    }
}
