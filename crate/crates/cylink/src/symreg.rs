//! Symbolic regression: expression trees over {+, -, *, /}, a genetic
//! programming loop with parsimony pressure, and the closed-form h21
//! predictor that the evolved expressions are compared against.
//!
//! Division is protected: dividing by zero yields 1 and flags the
//! evaluation, so every tree is total on every input. Fitness combines mean
//! absolute error, a size penalty, and a penalty on flagged evaluations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::algebra::NVARS;

#[derive(Debug, Error)]
pub enum SymregError {
    #[error("weight {index} is not positive")]
    NonPositiveWeight { index: usize },
    #[error("empty dataset")]
    EmptyData,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Expression tree over the five weights. `Div` is protected division.
#[derive(Clone, PartialEq, Serialize, Deserialize, Debug)]
pub enum Expression {
    Const(f64),
    Var(usize),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Div(Box<Expression>, Box<Expression>),
}

/// Value of one evaluation, with the protected-division flag.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize, Debug)]
pub struct EvalOutcome {
    pub value: f64,
    pub flagged: bool,
}

impl Expression {
    pub fn size(&self) -> usize {
        match self {
            Expression::Const(_) | Expression::Var(_) => 1,
            Expression::Add(a, b)
            | Expression::Sub(a, b)
            | Expression::Mul(a, b)
            | Expression::Div(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expression::Const(_) | Expression::Var(_) => 1,
            Expression::Add(a, b)
            | Expression::Sub(a, b)
            | Expression::Mul(a, b)
            | Expression::Div(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn eval_inner(&self, w: &[f64; NVARS], flagged: &mut bool) -> f64 {
        match self {
            Expression::Const(c) => *c,
            Expression::Var(i) => w[*i],
            Expression::Add(a, b) => a.eval_inner(w, flagged) + b.eval_inner(w, flagged),
            Expression::Sub(a, b) => a.eval_inner(w, flagged) - b.eval_inner(w, flagged),
            Expression::Mul(a, b) => a.eval_inner(w, flagged) * b.eval_inner(w, flagged),
            Expression::Div(a, b) => {
                let num = a.eval_inner(w, flagged);
                let den = b.eval_inner(w, flagged);
                if den == 0.0 {
                    *flagged = true;
                    1.0
                } else {
                    num / den
                }
            }
        }
    }

    /// Prefix notation, e.g. `(+ (* 14.91 w1) w0)`.
    pub fn to_prefix(&self) -> String {
        match self {
            Expression::Const(c) => fmt_const(*c),
            Expression::Var(i) => format!("w{i}"),
            Expression::Add(a, b) => format!("(+ {} {})", a.to_prefix(), b.to_prefix()),
            Expression::Sub(a, b) => format!("(- {} {})", a.to_prefix(), b.to_prefix()),
            Expression::Mul(a, b) => format!("(* {} {})", a.to_prefix(), b.to_prefix()),
            Expression::Div(a, b) => format!("(/ {} {})", a.to_prefix(), b.to_prefix()),
        }
    }

    /// Subtree at a preorder index; `idx` must be below `size()`.
    fn subtree(&self, idx: usize) -> &Expression {
        fn walk<'a>(e: &'a Expression, idx: &mut usize) -> Option<&'a Expression> {
            if *idx == 0 {
                return Some(e);
            }
            *idx -= 1;
            match e {
                Expression::Const(_) | Expression::Var(_) => None,
                Expression::Add(a, b)
                | Expression::Sub(a, b)
                | Expression::Mul(a, b)
                | Expression::Div(a, b) => walk(a, idx).or_else(|| walk(b, idx)),
            }
        }
        let mut i = idx;
        walk(self, &mut i).expect("preorder index in range")
    }

    /// Copy of the tree with the subtree at a preorder index replaced.
    fn with_replaced(&self, idx: usize, replacement: &Expression) -> Expression {
        fn walk(e: &Expression, idx: &mut usize, replacement: &Expression) -> Expression {
            if *idx == 0 {
                *idx = usize::MAX;
                return replacement.clone();
            }
            *idx -= 1;
            let pair = |a: &Expression, b: &Expression, idx: &mut usize| {
                let left = walk(a, idx, replacement);
                let right = if *idx == usize::MAX {
                    b.clone()
                } else {
                    walk(b, idx, replacement)
                };
                (Box::new(left), Box::new(right))
            };
            match e {
                Expression::Const(_) | Expression::Var(_) => e.clone(),
                Expression::Add(a, b) => {
                    let (l, r) = pair(a, b, idx);
                    Expression::Add(l, r)
                }
                Expression::Sub(a, b) => {
                    let (l, r) = pair(a, b, idx);
                    Expression::Sub(l, r)
                }
                Expression::Mul(a, b) => {
                    let (l, r) = pair(a, b, idx);
                    Expression::Mul(l, r)
                }
                Expression::Div(a, b) => {
                    let (l, r) = pair(a, b, idx);
                    Expression::Div(l, r)
                }
            }
        }
        let mut i = idx;
        walk(self, &mut i, replacement)
    }
}

fn fmt_const(c: f64) -> String {
    if c == c.trunc() && c.abs() < 1e7 {
        format!("{c}")
    } else {
        let magnitude = c.abs().log10().floor() as i32;
        let decimals = (3 - magnitude).clamp(0, 12) as usize;
        format!("{c:.decimals$}")
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Const(c) => write!(f, "{}", fmt_const(*c)),
            Expression::Var(i) => write!(f, "w{i}"),
            Expression::Add(a, b) => write!(f, "({a} + {b})"),
            Expression::Sub(a, b) => write!(f, "({a} - {b})"),
            Expression::Mul(a, b) => write!(f, "({a} * {b})"),
            Expression::Div(a, b) => write!(f, "({a} / {b})"),
        }
    }
}

/// Evaluate a tree on one weight vector. Total: protected division and a
/// non-finite result are mapped to fixed values and flagged.
pub fn eval_expression(e: &Expression, w: &[f64; NVARS]) -> EvalOutcome {
    let mut flagged = false;
    let value = e.eval_inner(w, &mut flagged);
    if value.is_finite() {
        EvalOutcome { value, flagged }
    } else {
        EvalOutcome {
            value: 0.0,
            flagged: true,
        }
    }
}

/// Closed-form h21 predictor from the five weights, sorted ascending before
/// substitution. The arithmetic mirrors [`formula_expression`] operation for
/// operation, so the two agree bit for bit.
pub fn closed_form_h21(weights: &[u32; NVARS]) -> Result<f64, SymregError> {
    if let Some(index) = weights.iter().position(|&w| w == 0) {
        return Err(SymregError::NonPositiveWeight { index });
    }
    let mut sorted = *weights;
    sorted.sort_unstable();
    let [w0, w1, w2, w3, w4] = sorted.map(f64::from);
    let t1 = (14.91 * w1) * (w0 * w4 + w3 * (w0 + w3));
    let t2 = ((10.02 * w2) * w3) * ((w0 + w4) + 0.77);
    Ok((t1 + t2) / (((w0 * w1) * w2) * w3))
}

/// The same predictor as an expression tree over ascending-sorted weights.
pub fn formula_expression() -> Expression {
    use Expression::{Add, Const, Div, Mul, Var};
    let v = |i: usize| Box::new(Var(i));
    let t1 = Mul(
        Box::new(Mul(Box::new(Const(14.91)), v(1))),
        Box::new(Add(
            Box::new(Mul(v(0), v(4))),
            Box::new(Mul(v(3), Box::new(Add(v(0), v(3))))),
        )),
    );
    let t2 = Mul(
        Box::new(Mul(Box::new(Mul(Box::new(Const(10.02)), v(2))), v(3))),
        Box::new(Add(Box::new(Add(v(0), v(4))), Box::new(Const(0.77)))),
    );
    Div(
        Box::new(Add(Box::new(t1), Box::new(t2))),
        Box::new(Mul(
            Box::new(Mul(Box::new(Mul(v(0), v(1))), v(2))),
            v(3),
        )),
    )
}

/// Settings for one evolution run.
#[derive(Clone, Copy, Serialize, Deserialize, Debug)]
pub struct GPConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub p_crossover: f64,
    pub p_subtree_mutation: f64,
    pub p_point_mutation: f64,
    pub p_const_jitter: f64,
    pub max_depth: usize,
    /// Fitness penalty per tree node. `None` scales to the target spread:
    /// 0.001 times the mean absolute deviation.
    pub parsimony: Option<f64>,
    /// How many ranked survivors to return.
    pub keep: usize,
    pub seed: u64,
}

impl Default for GPConfig {
    fn default() -> Self {
        GPConfig {
            population: 1000,
            generations: 40,
            tournament: 7,
            p_crossover: 0.7,
            p_subtree_mutation: 0.1,
            p_point_mutation: 0.1,
            p_const_jitter: 0.05,
            max_depth: 10,
            parsimony: None,
            keep: 16,
            seed: 0,
        }
    }
}

/// One survivor of the evolution, with its scores.
#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct RankedExpression {
    pub expression: Expression,
    pub fitness: f64,
    pub train_mae: f64,
    pub validation_mae: f64,
    pub flag_rate: f64,
    pub size: usize,
}

#[derive(Clone, Copy)]
struct Scores {
    fitness: f64,
    mae: f64,
    flag_rate: f64,
}

fn score(
    expr: &Expression,
    data: &[([f64; NVARS], f64)],
    parsimony: f64,
    flag_penalty: f64,
) -> Scores {
    let mut abs_sum = 0.0;
    let mut flags = 0usize;
    for (x, y) in data {
        let out = eval_expression(expr, x);
        abs_sum += (out.value - y).abs();
        if out.flagged {
            flags += 1;
        }
    }
    let mae = abs_sum / data.len() as f64;
    let flag_rate = flags as f64 / data.len() as f64;
    Scores {
        fitness: mae + parsimony * expr.size() as f64 + flag_rate * flag_penalty,
        mae,
        flag_rate,
    }
}

fn random_terminal(rng: &mut ChaCha8Rng) -> Expression {
    if rng.gen_bool(0.7) {
        Expression::Var(rng.gen_range(0..NVARS))
    } else {
        Expression::Const(rng.gen_range(-20.0..20.0))
    }
}

fn random_node(rng: &mut ChaCha8Rng, a: Expression, b: Expression) -> Expression {
    match rng.gen_range(0..4) {
        0 => Expression::Add(Box::new(a), Box::new(b)),
        1 => Expression::Sub(Box::new(a), Box::new(b)),
        2 => Expression::Mul(Box::new(a), Box::new(b)),
        _ => Expression::Div(Box::new(a), Box::new(b)),
    }
}

fn random_tree(rng: &mut ChaCha8Rng, depth: usize, full: bool) -> Expression {
    if depth <= 1 || (!full && rng.gen_bool(0.3)) {
        random_terminal(rng)
    } else {
        let a = random_tree(rng, depth - 1, full);
        let b = random_tree(rng, depth - 1, full);
        random_node(rng, a, b)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn point_mutate(rng: &mut ChaCha8Rng, e: &Expression) -> Expression {
    let idx = rng.gen_range(0..e.size());
    let replacement = match e.subtree(idx) {
        Expression::Const(_) => Expression::Const(rng.gen_range(-20.0..20.0)),
        Expression::Var(_) => Expression::Var(rng.gen_range(0..NVARS)),
        Expression::Add(a, b)
        | Expression::Sub(a, b)
        | Expression::Mul(a, b)
        | Expression::Div(a, b) => random_node(rng, (**a).clone(), (**b).clone()),
    };
    e.with_replaced(idx, &replacement)
}

fn const_jitter(rng: &mut ChaCha8Rng, e: &Expression) -> Expression {
    let consts: Vec<usize> = (0..e.size())
        .filter(|&i| matches!(e.subtree(i), Expression::Const(_)))
        .collect();
    if consts.is_empty() {
        return point_mutate(rng, e);
    }
    let idx = consts[rng.gen_range(0..consts.len())];
    if let Expression::Const(c) = e.subtree(idx) {
        let refined = if rng.gen_bool(0.25) {
            c.round()
        } else {
            c + 0.1 * c.abs().max(1.0) * gaussian(rng)
        };
        e.with_replaced(idx, &Expression::Const(refined))
    } else {
        unreachable!()
    }
}

/// Evolve expressions fitting `data`. Deterministic for a fixed seed: the
/// genetic operators draw from one stream while fitness evaluation, which
/// consumes no randomness, fans out over a thread pool. Ten percent of the
/// data is held out and scored but never drives selection.
pub fn evolve(
    data: &[([f64; NVARS], f64)],
    cfg: &GPConfig,
) -> Result<Vec<RankedExpression>, SymregError> {
    if data.is_empty() {
        return Err(SymregError::EmptyData);
    }
    if cfg.population < 2 || cfg.tournament == 0 || cfg.max_depth == 0 {
        return Err(SymregError::InvalidConfig(
            "population, tournament, and depth must be positive".into(),
        ));
    }
    for p in [
        cfg.p_crossover,
        cfg.p_subtree_mutation,
        cfg.p_point_mutation,
        cfg.p_const_jitter,
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(SymregError::InvalidConfig("probability outside [0,1]".into()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    {
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
    }
    let cut = ((data.len() as f64) * 0.9).ceil() as usize;
    let train: Vec<([f64; NVARS], f64)> = order[..cut].iter().map(|&i| data[i]).collect();
    let holdout: Vec<([f64; NVARS], f64)> = order[cut..].iter().map(|&i| data[i]).collect();

    let mean = train.iter().map(|(_, y)| y).sum::<f64>() / train.len() as f64;
    let mad = train.iter().map(|(_, y)| (y - mean).abs()).sum::<f64>() / train.len() as f64;
    let parsimony = cfg.parsimony.unwrap_or(0.001 * mad);
    let flag_penalty = 10.0 * (mad + 1.0);

    let mut population: Vec<Expression> = (0..cfg.population)
        .map(|i| {
            let depth = 2 + i % 5;
            random_tree(&mut rng, depth, i % 2 == 0)
        })
        .collect();
    let mut scores: Vec<Scores> = population
        .par_iter()
        .map(|e| score(e, &train, parsimony, flag_penalty))
        .collect();

    for _ in 0..cfg.generations {
        let best_fit = (0..population.len())
            .min_by(|&a, &b| scores[a].fitness.total_cmp(&scores[b].fitness))
            .unwrap();
        let best_mae = (0..population.len())
            .min_by(|&a, &b| scores[a].mae.total_cmp(&scores[b].mae))
            .unwrap();
        let mut next = vec![population[best_fit].clone()];
        if best_mae != best_fit {
            next.push(population[best_mae].clone());
        }

        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            let mut winner = rng.gen_range(0..population.len());
            for _ in 1..cfg.tournament {
                let rival = rng.gen_range(0..population.len());
                if scores[rival].fitness < scores[winner].fitness {
                    winner = rival;
                }
            }
            winner
        };

        while next.len() < cfg.population {
            let roll: f64 = rng.gen_range(0.0..1.0);
            let parent = population[tournament(&mut rng)].clone();
            let child = if roll < cfg.p_crossover {
                let donor = &population[tournament(&mut rng)];
                let at = rng.gen_range(0..parent.size());
                let from = donor.subtree(rng.gen_range(0..donor.size()));
                parent.with_replaced(at, from)
            } else if roll < cfg.p_crossover + cfg.p_subtree_mutation {
                let at = rng.gen_range(0..parent.size());
                let sub = random_tree(&mut rng, 3, false);
                parent.with_replaced(at, &sub)
            } else if roll < cfg.p_crossover + cfg.p_subtree_mutation + cfg.p_point_mutation {
                point_mutate(&mut rng, &parent)
            } else if roll
                < cfg.p_crossover
                    + cfg.p_subtree_mutation
                    + cfg.p_point_mutation
                    + cfg.p_const_jitter
            {
                const_jitter(&mut rng, &parent)
            } else {
                parent.clone()
            };
            next.push(if child.depth() <= cfg.max_depth {
                child
            } else {
                parent
            });
        }
        population = next;
        scores = population
            .par_iter()
            .map(|e| score(e, &train, parsimony, flag_penalty))
            .collect();
    }

    let mut ranked: Vec<usize> = (0..population.len()).collect();
    ranked.sort_by(|&a, &b| scores[a].fitness.total_cmp(&scores[b].fitness));
    Ok(ranked
        .into_iter()
        .take(cfg.keep)
        .map(|i| {
            let validation_mae = if holdout.is_empty() {
                scores[i].mae
            } else {
                score(&population[i], &holdout, 0.0, 0.0).mae
            };
            RankedExpression {
                expression: population[i].clone(),
                fitness: scores[i].fitness,
                train_mae: scores[i].mae,
                validation_mae,
                flag_rate: scores[i].flag_rate,
                size: population[i].size(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wvec(w: [f64; NVARS]) -> [f64; NVARS] {
        w
    }

    #[test]
    fn eval_basic_cases() {
        use Expression::{Add, Const, Div, Var};
        let sum = Add(Box::new(Var(0)), Box::new(Var(1)));
        let out = eval_expression(&sum, &wvec([2.0, 3.0, 0.0, 0.0, 0.0]));
        assert_eq!((out.value, out.flagged), (5.0, false));

        let ratio = Div(Box::new(Var(0)), Box::new(Var(1)));
        let guarded = eval_expression(&ratio, &wvec([1.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!((guarded.value, guarded.flagged), (1.0, true));

        let seven = Const(7.0);
        for w in [[0.0; 5], [9.0, -2.0, 4.4, 1.0, 3.0]] {
            assert_eq!(eval_expression(&seven, &w).value, 7.0);
        }

        let overflow = Expression::Mul(
            Box::new(Expression::Mul(Box::new(Var(0)), Box::new(Var(1)))),
            Box::new(Var(0)),
        );
        let capped = eval_expression(&overflow, &wvec([1e200, 1e200, 1.0, 1.0, 1.0]));
        assert_eq!((capped.value, capped.flagged), (0.0, true));
    }

    #[test]
    fn closed_form_spot_values() {
        let flat = closed_form_h21(&[1, 1, 1, 1, 1]).unwrap();
        assert!((flat - 72.4854).abs() < 1e-9, "got {flat}");
        let bumped = closed_form_h21(&[1, 1, 1, 1, 2]).unwrap();
        assert!((bumped - 97.4154).abs() < 1e-9, "got {bumped}");
        assert!(matches!(
            closed_form_h21(&[1, 0, 1, 1, 1]),
            Err(SymregError::NonPositiveWeight { index: 1 })
        ));
    }

    #[test]
    fn closed_form_rounds_to_reference_predictions() {
        let cases: [([u32; NVARS], i64); 6] = [
            ([1, 1, 8, 19, 28], 338),
            ([1, 1, 9, 21, 32], 377),
            ([1, 1, 11, 26, 39], 447),
            ([1, 1, 12, 28, 42], 476),
            ([1, 6, 34, 81, 122], 243),
            ([1, 6, 40, 93, 140], 272),
        ];
        for (w, expected) in cases {
            let value = closed_form_h21(&w).unwrap();
            assert_eq!(value.round() as i64, expected, "weights {w:?} gave {value}");
        }
    }

    #[test]
    fn tree_matches_closed_form_exactly() {
        let tree = formula_expression();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let mut w = [0u32; NVARS];
            for v in &mut w {
                *v = rng.gen_range(1..=140);
            }
            w.sort_unstable();
            let direct = closed_form_h21(&w).unwrap();
            let wf = w.map(f64::from);
            let via_tree = eval_expression(&tree, &wf);
            assert!(!via_tree.flagged);
            assert_eq!(direct.to_bits(), via_tree.value.to_bits(), "weights {w:?}");
        }
    }

    #[test]
    fn display_and_serialization_round_trip() {
        let tree = formula_expression();
        assert_eq!(tree.size(), 33);
        let json = serde_json::to_string(&tree).unwrap();
        let back: Expression = serde_json::from_str(&json).unwrap();
        assert_eq!(tree, back);
        let prefix = tree.to_prefix();
        assert!(prefix.starts_with("(/ (+ (* (* 14.91 w1)"));
        let infix = tree.to_string();
        assert!(infix.contains("10.02"));
        assert!(infix.contains("0.7700"));
    }

    fn sum_target_data(n: usize, seed: u64) -> Vec<([f64; NVARS], f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut x = [0.0; NVARS];
                for v in &mut x {
                    *v = rng.gen_range(1.0..9.0);
                }
                (x, x[0] + x[1])
            })
            .collect()
    }

    #[test]
    fn evolution_recovers_an_exact_sum() {
        let data = sum_target_data(64, 3);
        let cfg = GPConfig {
            population: 300,
            generations: 20,
            seed: 5,
            ..GPConfig::default()
        };
        let ranked = evolve(&data, &cfg).unwrap();
        let best = ranked
            .iter()
            .min_by(|a, b| a.validation_mae.total_cmp(&b.validation_mae))
            .unwrap();
        assert!(
            best.train_mae < 1e-6 && best.validation_mae < 1e-6,
            "best mae {} / {}",
            best.train_mae,
            best.validation_mae
        );
    }

    #[test]
    fn evolution_fits_a_constant_exactly() {
        let data: Vec<([f64; NVARS], f64)> = sum_target_data(40, 9)
            .into_iter()
            .map(|(x, _)| (x, 3.0))
            .collect();
        let cfg = GPConfig {
            population: 300,
            generations: 25,
            seed: 1,
            ..GPConfig::default()
        };
        let ranked = evolve(&data, &cfg).unwrap();
        assert!(
            ranked.iter().any(|r| r.train_mae == 0.0),
            "best mae {}",
            ranked[0].train_mae
        );
    }

    #[test]
    fn heavy_parsimony_prefers_smaller_winners() {
        let data = sum_target_data(48, 12);
        let base = GPConfig {
            population: 200,
            generations: 12,
            seed: 8,
            parsimony: Some(0.0),
            ..GPConfig::default()
        };
        let free = evolve(&data, &base).unwrap();
        let squeezed = evolve(
            &data,
            &GPConfig {
                parsimony: Some(5.0),
                ..base
            },
        )
        .unwrap();
        assert!(
            squeezed[0].size < free[0].size,
            "sizes {} vs {}",
            squeezed[0].size,
            free[0].size
        );
    }

    #[test]
    fn evolution_is_deterministic_and_elitist() {
        let data = sum_target_data(32, 21);
        let cfg = GPConfig {
            population: 120,
            generations: 10,
            seed: 33,
            ..GPConfig::default()
        };
        let a = evolve(&data, &cfg).unwrap();
        let b = evolve(&data, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );

        let initial_only = evolve(
            &data,
            &GPConfig {
                generations: 0,
                ..cfg
            },
        )
        .unwrap();
        let best_initial = initial_only
            .iter()
            .map(|r| r.train_mae)
            .fold(f64::INFINITY, f64::min);
        let best_final = a
            .iter()
            .map(|r| r.train_mae)
            .fold(f64::INFINITY, f64::min);
        assert!(best_final <= best_initial);
    }
}

