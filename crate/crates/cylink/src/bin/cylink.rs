//! Command-line access to the library: single-system inspection, batch
//! dataset builds, external-table joins, surrogate training, and plots.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cylink::algebra::{
    CoefficientField, FieldDescriptor, MonomialOrder, Polynomial, PolynomialJson, PrimeField,
    Rationals, NVARS,
};
use cylink::groebner::{buchberger, standard_monomials, Budget, GroebnerError, GroebnerStats, Ideal};
use cylink::invariants::{
    compute_link_invariants, sasakian_hodge, steenbrink_signature,
    weak_r_equivalence_campaign, CNInvariant, HodgePair, LinkInvariants, SignatureTriple,
    WORKING_PRIME,
};
use cylink::learn::{cross_validate, train, MLPModel, TrainConfig, DEFAULT_WIDTHS};
use cylink::links::{sample_smooth_with_protocol, CandidateHypersurface, SampleProtocol, WeightSystem};
use cylink::pipeline::{
    conjecture_check, emit_plots, ingest_cy_hodge, ingest_published, load_weight_systems,
    predict_remaining, read_records, run_batch, training_arrays, training_pairs, BatchConfig,
    CyHodgeTable, TargetColumn, HARD_SYSTEMS,
};
use cylink::symreg::{evolve, GPConfig};

#[derive(Parser)]
#[command(
    name = "cylink",
    version,
    about = "Calabi-Yau links from weight systems: invariants, datasets, and surrogates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for everything randomized.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Coefficient field: auto certifies a prime-field run by mass
    /// conservation and falls back to exact rationals.
    #[arg(long, global = true, value_enum, default_value_t = FieldArg::Auto)]
    field: FieldArg,
    /// Monomial order. Weighted degrevlex is the only one implemented.
    #[arg(long, global = true, default_value = "degrevlex")]
    order: String,
    /// Worker threads for batch work; 0 picks automatically.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Wall-clock budget per basis computation, in seconds.
    #[arg(long, global = true, default_value_t = 600)]
    budget: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Auto,
    Prime,
    Rational,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    CyHodge,
    Published,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    H21,
    GbLength,
    Nu,
}

impl From<TargetArg> for TargetColumn {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::H21 => TargetColumn::H21,
            TargetArg::GbLength => TargetColumn::GbLength,
            TargetArg::Nu => TargetColumn::Nu,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the monomial basis of degree d = sum of the weights.
    Basis {
        /// Five comma-separated weights, e.g. 22,29,49,50,75.
        #[arg(long)]
        weights: String,
    },
    /// Sample a smooth member and print it as JSON.
    Sample {
        #[arg(long)]
        weights: String,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduced Groebner basis of the Jacobian ideal of a sampled member.
    Groebner {
        #[arg(long)]
        weights: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sasakian Hodge numbers of a sampled member.
    Hodge {
        #[arg(long)]
        weights: String,
    },
    /// Signature counts and the mod-48 invariant of a sampled member.
    Cn {
        #[arg(long)]
        weights: String,
    },
    /// Compute invariants for every weight system in a CSV list, resumably.
    Batch {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also run the six systems known to exceed any desk-scale budget.
        #[arg(long)]
        include_hard: bool,
    },
    /// Sample many members per weight permutation and check that the
    /// invariants agree everywhere.
    CheckWeakR {
        #[arg(long)]
        weights: String,
        #[arg(long, default_value_t = 10)]
        perms: usize,
        #[arg(long, default_value_t = 50)]
        polys: usize,
        #[arg(long, default_value_t = 1)]
        coeff_min: i64,
        #[arg(long, default_value_t = 99)]
        coeff_max: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load an external table and report what it holds.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Check h21(link) <= h21(CY) over a join with an ingested CY table.
    Conjecture {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        cy: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate and train a network on computed records.
    Train {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        /// Write the trained checkpoint here.
        #[arg(long)]
        model_out: Option<PathBuf>,
        /// Write the cross-validation report here.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Evolve closed-form candidates for a target column.
    Symreg {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long, default_value_t = 1000)]
        population: usize,
        #[arg(long, default_value_t = 40)]
        generations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predict gb length and h21 for weight systems from trained checkpoints.
    Predict {
        #[arg(long)]
        gb_model: PathBuf,
        #[arg(long)]
        h21_model: PathBuf,
        /// Weight list; defaults to the six budget-excluded systems.
        #[arg(long)]
        weights_file: Option<PathBuf>,
        /// CY Hodge table for bound flags.
        #[arg(long)]
        cy: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit histogram and scatter CSVs with rendered SVGs.
    Plots {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        cy: Option<PathBuf>,
        /// CSV of predicted,actual pairs for the prediction scatter.
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn parse_weights(s: &str) -> anyhow::Result<[u32; NVARS]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != NVARS {
        bail!("expected 5 comma-separated weights, got {}", parts.len());
    }
    let mut w = [0u32; NVARS];
    for (slot, part) in w.iter_mut().zip(&parts) {
        *slot = part.parse().with_context(|| format!("bad weight {part:?}"))?;
    }
    Ok(w)
}

fn check_order(order: &str) -> anyhow::Result<()> {
    if order != "degrevlex" {
        bail!("unsupported order {order:?}; only degrevlex is implemented");
    }
    Ok(())
}

fn sample(weights: &str, seed: u64, budget: &Budget) -> anyhow::Result<CandidateHypersurface> {
    let ws = WeightSystem::new(parse_weights(weights)?)?;
    let protocol = SampleProtocol {
        budget: *budget,
        ..SampleProtocol::default()
    };
    Ok(sample_smooth_with_protocol(&ws, seed, &protocol)?)
}

fn emit_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{body}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct SingleSystemReport<T> {
    weights: [u32; NVARS],
    field: FieldDescriptor,
    #[serde(flatten)]
    value: T,
}

/// Invariants of one sampled member under the field policy: auto certifies
/// the working prime by mass conservation, the forced choices run one field
/// with the same certificate and the default budget.
fn forced_field_invariants(
    cand: &CandidateHypersurface,
    field: FieldArg,
) -> anyhow::Result<(HodgePair, SignatureTriple, CNInvariant, FieldDescriptor)> {
    let order = cand.ws.order();
    match field {
        FieldArg::Prime => {
            let fp = PrimeField::new(WORKING_PRIME)?;
            let f = cand.polynomial(fp, order);
            let hodge = sasakian_hodge(&f, &cand.ws)?;
            let sig = steenbrink_signature(&f, &cand.ws)?;
            Ok((hodge, sig, CNInvariant::from_signature(&sig), fp.descriptor()))
        }
        FieldArg::Rational => {
            let f = cand.polynomial(Rationals, order);
            let hodge = sasakian_hodge(&f, &cand.ws)?;
            let sig = steenbrink_signature(&f, &cand.ws)?;
            Ok((
                hodge,
                sig,
                CNInvariant::from_signature(&sig),
                FieldDescriptor::Rationals,
            ))
        }
        FieldArg::Auto => unreachable!("auto goes through compute_link_invariants"),
    }
}

fn link_invariants(
    cand: &CandidateHypersurface,
    field: FieldArg,
    budget: &Budget,
) -> anyhow::Result<(HodgePair, SignatureTriple, CNInvariant, FieldDescriptor)> {
    if field == FieldArg::Auto {
        let inv: LinkInvariants = compute_link_invariants(cand, budget)?;
        Ok((inv.hodge, inv.signature, inv.cn, inv.field))
    } else {
        forced_field_invariants(cand, field)
    }
}

#[derive(Serialize)]
struct GroebnerJson {
    weights: [u32; NVARS],
    field: FieldDescriptor,
    order: MonomialOrder,
    elements: Vec<PolynomialJson>,
    stats: GroebnerStats,
    standard_monomial_count: u64,
}

fn jacobian_basis<F: CoefficientField>(
    f: &Polynomial<F>,
    ws: &WeightSystem,
    budget: &Budget,
) -> anyhow::Result<GroebnerJson> {
    let partials: Vec<Polynomial<F>> = (0..NVARS)
        .map(|i| f.partial_derivative(i))
        .filter(|p| !p.is_zero())
        .collect();
    let ideal = Ideal::new(partials, ws.order())?;
    let gb = buchberger(&ideal, budget)?;
    let sm = standard_monomials(&gb, ws.weights())?;
    let elements = gb
        .elements()
        .iter()
        .map(|p| PolynomialJson::encode(p, ws.weights()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GroebnerJson {
        weights: ws.weights(),
        field: f.field().descriptor(),
        order: gb.order(),
        elements,
        stats: *gb.stats(),
        standard_monomial_count: sm.total_count(),
    })
}

fn groebner_command(
    weights: &str,
    cli_field: FieldArg,
    seed: u64,
    budget: &Budget,
    out: Option<&PathBuf>,
) -> anyhow::Result<i32> {
    let cand = sample(weights, seed, budget)?;
    let ws = cand.ws;
    let order = ws.order();
    let started = Instant::now();
    let result = match cli_field {
        FieldArg::Rational => jacobian_basis(&cand.polynomial(Rationals, order), &ws, budget),
        _ => {
            let fp = PrimeField::new(WORKING_PRIME)?;
            jacobian_basis(&cand.polynomial(fp, order), &ws, budget)
        }
    };
    let elapsed_ms = started.elapsed().as_millis();
    let [w1, w2, w3, w4, w5] = ws.weights();
    let weights_field = format!("\"{w1},{w2},{w3},{w4},{w5}\"");
    match result {
        Ok(report) => {
            let p = match report.field {
                FieldDescriptor::Gf { p } => p,
                FieldDescriptor::Rationals => 0,
            };
            emit_json(&report, out)?;
            eprintln!(
                "{weights_field},{p},degrevlex,{},{},{elapsed_ms},ok",
                report.elements.len(),
                report.standard_monomial_count
            );
            Ok(0)
        }
        Err(e) => {
            if e.downcast_ref::<GroebnerError>()
                .is_some_and(|g| matches!(g, GroebnerError::BudgetExceeded { .. }))
            {
                let p = match cli_field {
                    FieldArg::Rational => 0,
                    _ => WORKING_PRIME,
                };
                eprintln!("{weights_field},{p},degrevlex,,,{elapsed_ms},timeout");
                Ok(2)
            } else {
                Err(e)
            }
        }
    }
}

fn load_model(path: &PathBuf) -> anyhow::Result<MLPModel> {
    let body = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&body)?)
}

fn load_cy(path: &PathBuf) -> anyhow::Result<CyHodgeTable> {
    let table = ingest_cy_hodge(path)?;
    if let Some(w) = &table.warning {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(table)
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    check_order(&cli.order)?;
    let budget = Budget::with_wall_limit(cli.budget);
    match cli.command {
        Command::Basis { weights } => {
            let ws = WeightSystem::new(parse_weights(&weights)?)?;
            println!("degree {}", ws.degree());
            for m in ws.monomial_basis() {
                let e = m.0;
                println!("{},{},{},{},{}", e[0], e[1], e[2], e[3], e[4]);
            }
            Ok(0)
        }
        Command::Sample { weights, out } => {
            let cand = sample(&weights, cli.seed, &budget)?;
            emit_json(&cand, out.as_ref())?;
            Ok(0)
        }
        Command::Groebner { weights, out } => {
            groebner_command(&weights, cli.field, cli.seed, &budget, out.as_ref())
        }
        Command::Hodge { weights } => {
            let cand = sample(&weights, cli.seed, &budget)?;
            let (hodge, _, _, field) = link_invariants(&cand, cli.field, &budget)?;
            emit_json(
                &SingleSystemReport {
                    weights: cand.ws.weights(),
                    field,
                    value: hodge,
                },
                None,
            )?;
            Ok(0)
        }
        Command::Cn { weights } => {
            let cand = sample(&weights, cli.seed, &budget)?;
            let (_, signature, cn, field) = link_invariants(&cand, cli.field, &budget)?;
            #[derive(Serialize)]
            struct CnReport {
                signature: SignatureTriple,
                cn: CNInvariant,
            }
            emit_json(
                &SingleSystemReport {
                    weights: cand.ws.weights(),
                    field,
                    value: CnReport { signature, cn },
                },
                None,
            )?;
            Ok(0)
        }
        Command::Batch {
            input,
            out,
            include_hard,
        } => {
            let rows = load_weight_systems(&input)?;
            let weights: Vec<[u32; NVARS]> = rows.iter().map(|r| r.weights).collect();
            let cfg = BatchConfig {
                seed: cli.seed,
                workers: cli.workers,
                budget,
                include_hard,
            };
            let summary = run_batch(&weights, &out, &cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(summary.exit_code())
        }
        Command::CheckWeakR {
            weights,
            perms,
            polys,
            coeff_min,
            coeff_max,
            out,
        } => {
            let ws = WeightSystem::new(parse_weights(&weights)?)?;
            let report = weak_r_equivalence_campaign(
                &ws,
                perms,
                polys,
                coeff_min..=coeff_max,
                cli.seed,
                &budget,
            )?;
            let consistent = report.invariants_agree
                && report.gb_constant_within_permutation
                && report.failures == 0;
            emit_json(&report, out.as_ref())?;
            Ok(if consistent { 0 } else { 2 })
        }
        Command::Ingest { input, kind } => {
            match kind {
                KindArg::CyHodge => {
                    let table = ingest_cy_hodge(&input)?;
                    if let Some(w) = &table.warning {
                        eprintln!("warning: {w}");
                    }
                    println!("cy_hodge rows: {}", table.map.len());
                }
                KindArg::Published => {
                    let table = ingest_published(&input)?;
                    if let Some(w) = &table.warning {
                        eprintln!("warning: {w}");
                    }
                    println!("published rows: {}", table.map.len());
                }
            }
            Ok(0)
        }
        Command::Conjecture { records, cy, out } => {
            let records = read_records(&records)?;
            let table = load_cy(&cy)?;
            let report = conjecture_check(&records, &table);
            emit_json(&report, out.as_ref())?;
            Ok(if report.holds { 0 } else { 2 })
        }
        Command::Train {
            records,
            target,
            folds,
            epochs,
            model_out,
            report_out,
        } => {
            let records = read_records(&records)?;
            let data = training_pairs(&records, target.into());
            let cfg = TrainConfig {
                epochs,
                seed: cli.seed,
                ..TrainConfig::default()
            };
            let report = cross_validate(&data, &cfg, folds)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(path) = report_out {
                emit_json(&report, Some(&path))?;
            }
            if let Some(path) = model_out {
                let mut model = MLPModel::with_widths(&DEFAULT_WIDTHS, cfg.seed);
                train(&mut model, &data, &cfg)?;
                emit_json(&model, Some(&path))?;
            }
            Ok(0)
        }
        Command::Symreg {
            records,
            target,
            population,
            generations,
            out,
        } => {
            let records = read_records(&records)?;
            let data = training_arrays(&records, target.into());
            let cfg = GPConfig {
                population,
                generations,
                seed: cli.seed,
                ..GPConfig::default()
            };
            let ranked = evolve(&data, &cfg)?;
            for r in ranked.iter().take(5) {
                println!(
                    "mae {:.4} (validation {:.4}) size {:>3}  {}",
                    r.train_mae, r.validation_mae, r.size, r.expression
                );
            }
            if let Some(path) = out {
                emit_json(&ranked, Some(&path))?;
            }
            Ok(0)
        }
        Command::Predict {
            gb_model,
            h21_model,
            weights_file,
            cy,
            out,
        } => {
            let gb = load_model(&gb_model)?;
            let h21 = load_model(&h21_model)?;
            let weights: Vec<[u32; NVARS]> = match weights_file {
                Some(path) => load_weight_systems(&path)?
                    .iter()
                    .map(|r| r.weights)
                    .collect(),
                None => HARD_SYSTEMS.to_vec(),
            };
            let table = cy.map(|path| load_cy(&path)).transpose()?;
            let rows = predict_remaining(&gb, &h21, &weights, table.as_ref())?;
            let mut body = String::from(
                "w1,w2,w3,w4,w5,gb_length_nn,h21_nn,h21_formula,h21_formula_rounded,cy_h21,nn_within_bound,formula_within_bound\n",
            );
            for r in &rows {
                let [w1, w2, w3, w4, w5] = r.weights;
                let opt = |v: Option<u64>| v.map_or(String::new(), |x| x.to_string());
                let flag = |v: Option<bool>| v.map_or(String::new(), |x| x.to_string());
                body.push_str(&format!(
                    "{w1},{w2},{w3},{w4},{w5},{:.1},{:.1},{:.4},{},{},{},{}\n",
                    r.gb_length_nn,
                    r.h21_nn,
                    r.h21_formula,
                    r.h21_formula_rounded,
                    opt(r.cy_h21),
                    flag(r.nn_within_bound),
                    flag(r.formula_within_bound),
                ));
            }
            match out {
                Some(path) => fs::write(&path, body)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{body}"),
            }
            let violated = rows.iter().any(|r| {
                r.nn_within_bound == Some(false) || r.formula_within_bound == Some(false)
            });
            Ok(if violated { 2 } else { 0 })
        }
        Command::Plots {
            records,
            cy,
            pred,
            out,
        } => {
            let records = read_records(&records)?;
            let table = cy.map(|path| load_cy(&path)).transpose()?;
            let pairs = match pred {
                Some(path) => {
                    let body = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let mut pairs = Vec::new();
                    for line in body.lines().skip(1) {
                        let Some((p, t)) = line.split_once(',') else {
                            continue;
                        };
                        pairs.push((p.trim().parse()?, t.trim().parse()?));
                    }
                    Some(pairs)
                }
                None => None,
            };
            let written = emit_plots(&records, table.as_ref(), pairs.as_deref(), &out)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}
