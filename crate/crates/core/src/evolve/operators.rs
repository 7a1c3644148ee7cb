//! Variation operators: term-swap crossover and the mutation registry.

use rand::distributions::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::config::{GPConfig, MutationRates};
use crate::expr::{Expr, ExprGraph, LogBase, TemplateKind, TemplateSampler};

pub type Terms = Vec<(f64, Expr)>;

/// Everything a variation operator may consult.
#[derive(Debug, Clone)]
pub struct VariationContext {
    pub sampler: TemplateSampler,
    pub config: GPConfig,
}

impl VariationContext {
    pub fn new(variables: Vec<String>, config: &GPConfig) -> VariationContext {
        let mut sampler = TemplateSampler::new(variables, config.exponent_alphabet.clone());
        sampler.allow_log = config.allow_log;
        VariationContext { sampler, config: config.clone() }
    }

    pub fn max_terms(&self) -> usize {
        self.config.max_terms
    }

    /// One fresh template term. Constants are not drawn if `terms` already has one.
    pub fn fresh_term<R: Rng + ?Sized>(&self, terms: &[(f64, Expr)], rng: &mut R) -> (f64, Expr) {
        let has_const = terms.iter().any(|(_, t)| matches!(t, Expr::Const));
        let dist = self.config.template_weights.distribution(!has_const);
        let kind = TemplateKind::ALL[dist.sample(rng)];
        (1.0, self.sampler.sample(kind, rng))
    }

    /// A random graph with 1..=max_terms template terms.
    pub fn random_graph<R: Rng + ?Sized>(&self, rng: &mut R) -> ExprGraph {
        let k = rng.gen_range(1..=self.max_terms());
        let mut terms: Terms = Vec::with_capacity(k);
        for _ in 0..k {
            let t = self.fresh_term(&terms, rng);
            terms.push(t);
        }
        ExprGraph::from_terms(&terms)
    }
}

/// Exchanges `swap` root terms one-for-one between the parents. Term counts
/// are preserved and the parents are left untouched.
pub fn crossover<R: Rng + ?Sized>(a: &ExprGraph, b: &ExprGraph, swap: usize, rng: &mut R) -> (ExprGraph, ExprGraph) {
    let mut ta = a.terms();
    let mut tb = b.terms();
    let k = swap.min(ta.len()).min(tb.len());
    let ia = rand::seq::index::sample(rng, ta.len(), k).into_vec();
    let ib = rand::seq::index::sample(rng, tb.len(), k).into_vec();
    for (i, j) in ia.into_iter().zip(ib) {
        std::mem::swap(&mut ta[i], &mut tb[j]);
    }
    (ExprGraph::from_terms(&ta), ExprGraph::from_terms(&tb))
}

/// A mutation kind. Implementations edit the term list in place and must
/// leave 1..=max_terms valid terms behind.
pub trait MutationOperator: Send + Sync {
    fn name(&self) -> &'static str;
    fn apply(&self, terms: &mut Terms, ctx: &VariationContext, rng: &mut dyn RngCore);
}

enum Site<'a> {
    Exponent(&'a mut f64, bool),
    Base(&'a mut LogBase),
}

/// Inner edge features that may be resampled: exponents on variables and log
/// bases. Exponents under a log or a reciprocal are flagged positive-only.
fn collect_sites<'a>(e: &'a mut Expr, positive: bool, out: &mut Vec<Site<'a>>) {
    match e {
        Expr::Var(_) | Expr::Const => {}
        Expr::Add(items) => items.iter_mut().for_each(|(_, i)| collect_sites(i, positive, out)),
        Expr::Mul(items) => items.iter_mut().for_each(|i| collect_sites(i, positive, out)),
        Expr::Pow(inner, p) => {
            if matches!(**inner, Expr::Var(_)) {
                out.push(Site::Exponent(p, positive));
            } else {
                let under_reciprocal = *p < 0.0;
                collect_sites(inner, positive || under_reciprocal, out);
            }
        }
        Expr::Log(inner, b) => {
            out.push(Site::Base(b));
            collect_sites(inner, true, out);
        }
    }
}

pub struct EdgeFeatureMutation;

impl MutationOperator for EdgeFeatureMutation {
    fn name(&self) -> &'static str {
        "edge-feature"
    }

    fn apply(&self, terms: &mut Terms, ctx: &VariationContext, rng: &mut dyn RngCore) {
        let mut sites = Vec::new();
        for (_, t) in terms.iter_mut() {
            collect_sites(t, false, &mut sites);
        }
        if sites.is_empty() {
            drop(sites);
            SubgraphReplace.apply(terms, ctx, rng);
            return;
        }
        let k = rng.gen_range(0..sites.len());
        match sites.swap_remove(k) {
            Site::Base(b) => *b = b.other(),
            Site::Exponent(p, positive) => {
                let pool: Vec<i32> = if positive {
                    ctx.sampler.alphabet.positive()
                } else {
                    ctx.sampler.alphabet.values().to_vec()
                };
                let others: Vec<i32> = pool.iter().copied().filter(|v| *v as f64 != *p).collect();
                let choice = others.choose(rng).or_else(|| pool.choose(rng));
                *p = *choice.expect("non-empty alphabet") as f64;
            }
        }
    }
}

pub struct SubgraphReplace;

impl MutationOperator for SubgraphReplace {
    fn name(&self) -> &'static str {
        "subgraph-replace"
    }

    fn apply(&self, terms: &mut Terms, ctx: &VariationContext, rng: &mut dyn RngCore) {
        let i = rng.gen_range(0..terms.len());
        terms.remove(i);
        let fresh = ctx.fresh_term(terms, rng);
        terms.insert(i, fresh);
    }
}

pub struct AddRemove;

impl AddRemove {
    /// Adds a term if `add` (or removes one otherwise), switching direction
    /// when the requested one is infeasible. With `max_terms == 1` neither is
    /// possible and the single term is replaced instead.
    pub fn apply_direction(terms: &mut Terms, add: bool, ctx: &VariationContext, rng: &mut dyn RngCore) {
        let can_add = terms.len() < ctx.max_terms();
        let can_remove = terms.len() > 1;
        match (add, can_add, can_remove) {
            (true, true, _) | (false, true, false) => {
                let t = ctx.fresh_term(terms, rng);
                let at = rng.gen_range(0..=terms.len());
                terms.insert(at, t);
            }
            (_, _, true) => {
                let i = rng.gen_range(0..terms.len());
                terms.remove(i);
            }
            (_, false, false) => SubgraphReplace.apply(terms, ctx, rng),
        }
    }
}

impl MutationOperator for AddRemove {
    fn name(&self) -> &'static str {
        "add-remove"
    }

    fn apply(&self, terms: &mut Terms, ctx: &VariationContext, rng: &mut dyn RngCore) {
        let add = rng.gen_bool(0.5);
        AddRemove::apply_direction(terms, add, ctx, rng);
    }
}

/// Mutation kinds by name, each with a selection weight.
pub struct MutationRegistry {
    entries: Vec<(f64, Box<dyn MutationOperator>)>,
}

impl MutationRegistry {
    pub fn empty() -> MutationRegistry {
        MutationRegistry { entries: Vec::new() }
    }

    pub fn builtin(rates: &MutationRates) -> MutationRegistry {
        let mut r = MutationRegistry::empty();
        r.register(rates.edge_feature, Box::new(EdgeFeatureMutation));
        r.register(rates.subgraph_replace, Box::new(SubgraphReplace));
        r.register(rates.add_remove, Box::new(AddRemove));
        r
    }

    /// Adds an operator, replacing any existing one with the same name.
    pub fn register(&mut self, weight: f64, op: Box<dyn MutationOperator>) {
        self.entries.retain(|(_, o)| o.name() != op.name());
        self.entries.push((weight, op));
    }

    pub fn get(&self, name: &str) -> Option<&dyn MutationOperator> {
        self.entries
            .iter()
            .find(|(_, o)| o.name() == name)
            .map(|(_, o)| o.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(_, o)| o.name()).collect()
    }

    pub fn pick(&self, rng: &mut dyn RngCore) -> &dyn MutationOperator {
        let dist = rand::distributions::WeightedIndex::new(self.entries.iter().map(|(w, _)| *w))
            .expect("at least one operator with positive weight");
        self.entries[dist.sample(rng)].1.as_ref()
    }

    /// Applies exactly one operator drawn by weight and returns the new graph.
    pub fn mutate(&self, g: &ExprGraph, ctx: &VariationContext, rng: &mut dyn RngCore) -> ExprGraph {
        let op = self.pick(rng);
        let mut terms = g.terms();
        op.apply(&mut terms, ctx, rng);
        ExprGraph::from_terms(&terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(max_terms: usize) -> VariationContext {
        let cfg = GPConfig { max_terms, ..GPConfig::default() };
        VariationContext::new(vec!["E".into(), "n".into(), "d".into()], &cfg)
    }

    fn t(name: &str, p: f64) -> (f64, Expr) {
        (1.0, Expr::power_product(&[(name, p)]))
    }

    #[test]
    fn crossover_swaps_one_term_each() {
        let a = ExprGraph::from_terms(&[t("E", 1.0), t("E", 2.0)]);
        let b = ExprGraph::from_terms(&[t("n", 1.0), t("n", 2.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let (c, d) = crossover(&a, &b, 1, &mut rng);
            assert_eq!((c.term_count(), d.term_count()), (2, 2));
            let from_b = c
                .terms()
                .iter()
                .filter(|(_, x)| {
                    let mut vars = std::collections::BTreeSet::new();
                    x.variables(&mut vars);
                    vars.contains("n")
                })
                .count();
            assert_eq!(from_b, 1);
            assert_eq!(c.variables().len() + d.variables().len(), 4);
        }
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let a = ExprGraph::from_terms(&[t("E", 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (c, d) = crossover(&a, &a, 1, &mut rng);
        assert_eq!((c, d), (a.clone(), a));
    }

    #[test]
    fn crossover_preserves_counts_3_and_5() {
        let c = ctx(5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = ExprGraph::from_terms(&(0..3).map(|_| c.fresh_term(&[], &mut rng)).collect::<Vec<_>>());
        let b = ExprGraph::from_terms(&(0..5).map(|_| c.fresh_term(&[], &mut rng)).collect::<Vec<_>>());
        let (x, y) = crossover(&a, &b, 1, &mut rng);
        assert_eq!((x.term_count(), y.term_count()), (3, 5));
    }

    #[test]
    fn edge_feature_changes_exponent_within_alphabet() {
        let c = ctx(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let mut terms = vec![t("E", 2.0)];
            EdgeFeatureMutation.apply(&mut terms, &c, &mut rng);
            let Expr::Mul(f) = &terms[0].1 else { panic!() };
            let Expr::Pow(v, p) = &f[0] else { panic!() };
            assert_eq!(**v, Expr::var("E"));
            assert!(c.sampler.alphabet.contains(*p) && *p != 2.0);
        }
    }

    #[test]
    fn edge_feature_flips_log_base() {
        let c = ctx(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut terms = vec![(1.0, Expr::Mul(vec![Expr::log(Expr::var("E"), LogBase::Ten)]))];
        EdgeFeatureMutation.apply(&mut terms, &c, &mut rng);
        assert_eq!(terms[0].1, Expr::Mul(vec![Expr::log(Expr::var("E"), LogBase::Natural)]));
    }

    #[test]
    fn replace_keeps_count() {
        let c = ctx(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut terms = vec![t("E", 1.0), t("n", 1.0), t("d", 1.0)];
        SubgraphReplace.apply(&mut terms, &c, &mut rng);
        assert_eq!(terms.len(), 3);
    }

    #[test]
    fn add_at_capacity_removes() {
        let c = ctx(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut terms = vec![t("E", 1.0), t("n", 1.0), t("d", 1.0)];
        AddRemove::apply_direction(&mut terms, true, &c, &mut rng);
        assert_eq!(terms.len(), 2);
        let mut single = vec![t("E", 1.0)];
        AddRemove::apply_direction(&mut single, false, &c, &mut rng);
        assert_eq!(single.len(), 2);
        let c1 = ctx(1);
        let mut only = vec![t("E", 1.0)];
        AddRemove::apply_direction(&mut only, true, &c1, &mut rng);
        assert_eq!(only.len(), 1);
    }

    #[test]
    fn registry_lookup_and_override() {
        let mut r = MutationRegistry::builtin(&MutationRates::default());
        assert_eq!(r.names(), vec!["edge-feature", "subgraph-replace", "add-remove"]);
        assert!(r.get("add-remove").is_some());
        r.register(1.0, Box::new(AddRemove));
        assert_eq!(r.names().len(), 3);
        assert!(r.get("nope").is_none());
    }

    #[test]
    fn random_operations_stay_valid() {
        let c = ctx(5);
        let reg = MutationRegistry::builtin(&MutationRates::default());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pool: Vec<ExprGraph> = (0..20).map(|_| c.random_graph(&mut rng)).collect();
        for step in 0..10_000 {
            let i = rng.gen_range(0..pool.len());
            if step % 2 == 0 {
                let j = rng.gen_range(0..pool.len());
                let (x, y) = crossover(&pool[i], &pool[j], 1, &mut rng);
                pool[i] = x;
                pool[j] = y;
            } else {
                pool[i] = reg.mutate(&pool[i], &c, &mut rng);
            }
            assert_eq!(pool[i].validate(5), Ok(()), "step {step}");
        }
    }
}
