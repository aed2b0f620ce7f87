use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use oneloop::coaction::{self, CoactionExpression};
use oneloop::integrator::{self, IntegralSpec, Method};
use oneloop::kinematics::{self, GramIndex, KinematicPoint};
use oneloop::motive::{self, Variant};
use oneloop::selftest::{self, SelftestOptions};
use oneloop::{CutQuotientGraph, EdgeSet};

#[derive(Parser)]
#[command(
    name = "oneloop",
    version,
    about = "One-loop n-gon integrals: kinematics, motives, coactions, numerics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
struct OutputFlags {
    /// JSON on stdout (the default)
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Human-readable text on stdout
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Genericity and Euclidean verdict with all Gram determinants up to size d+1
    Check {
        #[arg(long)]
        kinematics: PathBuf,
        #[arg(long)]
        d: usize,
    },
    /// Weight-graded decomposition of a cut quotient graph
    Motive {
        #[arg(long)]
        graph: CutQuotientGraph,
        #[arg(long, default_value = "reduced")]
        variant: Variant,
        #[arg(long)]
        kinematics: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
    },
    /// Motivic coaction of the n-gon or de Rham coproduct of a cut graph
    Coaction {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::Coaction)]
        mode: Mode,
        /// Cut edges for the coproduct, comma separated
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<usize>,
    },
    /// Numerical evaluation at Euclidean kinematics
    Integrate {
        /// Defaults to the uncut n-gon of the kinematics file
        #[arg(long)]
        graph: Option<CutQuotientGraph>,
        #[arg(long)]
        d: usize,
        /// Exponents of the surviving edges, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        nu: Vec<u32>,
        #[arg(long)]
        kinematics: PathBuf,
        #[arg(long, default_value = "quad")]
        method: Method,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs the oracle suites
    Selftest {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Break the residue sign convention on purpose
        #[arg(long)]
        mutate: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Coaction,
    Coproduct,
}

/// A command's result: the payload, its text rendering, and whether it
/// reports a domain failure.
struct Outcome {
    payload: Value,
    text: String,
    failed: bool,
}

impl Outcome {
    fn ok(payload: Value, text: String) -> Self {
        Outcome {
            payload,
            text,
            failed: false,
        }
    }
}

enum Failure {
    Usage(anyhow::Error),
    Domain(anyhow::Error),
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn domain(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Domain(e.into())
}

fn read_kinematics(path: &Path) -> Result<KinematicPoint, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    KinematicPoint::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(usage)
}

fn subset_label(idx: &[GramIndex]) -> String {
    let parts: Vec<String> = idx
        .iter()
        .map(|g| match g {
            GramIndex::Edge(e) => e.to_string(),
            GramIndex::Infinity => "inf".into(),
        })
        .collect();
    format!("{{{}}}", parts.join(","))
}

fn cmd_check(path: &Path, d: usize) -> Result<Outcome, Failure> {
    let k = read_kinematics(path)?;
    let report = kinematics::is_euclidean(&k, d).map_err(domain)?;
    let generic = &report.genericity;
    let mut grams = vec![];
    let mut text = format!(
        "generic: {}\neuclidean: {}\nrank(s) = {} (d = {d})\n",
        generic.is_generic, report.is_euclidean, generic.rank
    );
    for (edges, inf) in kinematics::gram_subsets(k.n(), d + 1) {
        let idx = if inf {
            GramIndex::with_infinity(edges)
        } else {
            GramIndex::edges(edges)
        };
        let det = k.gram_det(&idx).map_err(domain)?;
        text.push_str(&format!("G{} = {det}\n", subset_label(&idx)));
        grams.push(json!({ "subset": idx, "value": det.to_string() }));
    }
    for f in &generic.failures {
        text.push_str(&format!("vanishing: {}\n", subset_label(&f.subset)));
    }
    let payload = json!({
        "generic": generic.is_generic,
        "euclidean": report.is_euclidean,
        "d": d,
        "rank": generic.rank,
        "rank_ok": generic.rank_ok,
        "s_psd": report.s_psd,
        "masses_positive": report.masses_positive,
        "failures": generic.failures,
        "gram": grams,
    });
    Ok(Outcome {
        payload,
        text,
        failed: !generic.is_generic,
    })
}

fn cmd_motive(
    graph: CutQuotientGraph,
    variant: Variant,
    kin: Option<&Path>,
    d: Option<usize>,
) -> Result<Outcome, Failure> {
    let k = kin.map(read_kinematics).transpose()?;
    let m = match (&k, d) {
        (Some(k), Some(d)) => motive::weight_pieces_in_dim(&graph, variant, k, d),
        (k, _) => motive::weight_pieces(&graph, variant, k.as_ref()),
    }
    .map_err(domain)?;
    let (top, bottom_rank, top_rank) = motive::weight_bounds(&graph, variant);
    let basis = motive::de_rham_basis(&graph, variant, graph.uncut_edges().iter().next()).map_err(domain)?;
    let mut payload = serde_json::to_value(&m).map_err(domain)?;
    payload["ranks_by_weight"] = json!(m.ranks_by_weight());
    payload["weight_bounds"] = json!({ "top": top, "bottom_rank": bottom_rank, "top_rank": top_rank });
    payload["de_rham_basis"] = json!(basis);
    let mut text = format!("{graph} ({variant}), rank {}\n", m.rank);
    for p in &m.pieces {
        let ch = serde_json::to_string(&p.character).unwrap_or_default();
        text.push_str(&format!(
            "  weight {:>2}  gamma {}{}  Q({}) x{}  character {ch}\n",
            p.weight,
            p.gamma,
            if p.infty { "+inf" } else { "" },
            p.twist,
            p.mult
        ));
    }
    text.push_str(&format!(
        "top weight {top}, bottom rank {bottom_rank}, top rank {top_rank}\n"
    ));
    if let Some(d) = d {
        let t = motive::truncate(&m, d).map_err(domain)?;
        text.push_str(&format!("W_{d}: rank {}\n", t.rank));
        payload["truncated"] = serde_json::to_value(&t).map_err(domain)?;
    }
    Ok(Outcome::ok(payload, text))
}

fn expression(e: &CoactionExpression) -> Value {
    let mut v = serde_json::to_value(e).expect("serialisable");
    v["n_terms"] = json!(e.len());
    v["text"] = json!(e.render());
    v
}

fn cmd_coaction(n: usize, mode: Mode, gamma: &[usize]) -> Result<Outcome, Failure> {
    match mode {
        Mode::Coaction => {
            let e = coaction::coaction(n).map_err(domain)?;
            let payload = json!({ "n": n, "mode": "coaction", "expression": expression(&e) });
            Ok(Outcome::ok(payload, format!("{} terms\n{}\n", e.len(), e.render())))
        }
        Mode::Coproduct => {
            let g = EdgeSet::try_from_edges(gamma, n).map_err(usage)?;
            let raw = coaction::coproduct_raw(n, g).map_err(domain)?;
            let normalized = raw.normal_form();
            let text = format!(
                "raw: {} terms\n{}\nnormalized: {} terms\n{}\n",
                raw.len(),
                raw.render(),
                normalized.len(),
                normalized.render()
            );
            let payload = json!({
                "n": n,
                "mode": "coproduct",
                "gamma": g,
                "raw": expression(&raw),
                "expression": expression(&normalized),
            });
            Ok(Outcome::ok(payload, text))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_integrate(
    graph: Option<CutQuotientGraph>,
    d: usize,
    nu: Vec<u32>,
    path: &Path,
    method: Method,
    tol: f64,
    seed: u64,
) -> Result<Outcome, Failure> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(usage(anyhow!("--tol must be a positive number")));
    }
    let k = read_kinematics(path)?;
    let graph = match graph {
        Some(g) => g,
        None => CutQuotientGraph::n_gon(k.n()).map_err(usage)?,
    };
    let spec = IntegralSpec::new(graph, d, nu.clone(), k.clone())
        .with_method(method)
        .with_tol(tol)
        .with_seed(seed);
    let r = integrator::integrate(&spec).map_err(domain)?;
    if !r.converged {
        eprintln!(
            "warning: tolerance {tol} not reached (estimated error {:e})",
            r.error_estimate
        );
    }
    let kin_value: Value = serde_json::from_str(&k.to_json()).map_err(domain)?;
    let mut payload = serde_json::to_value(&r).map_err(domain)?;
    payload["spec_echo"] = json!({
        "graph": graph,
        "d": d,
        "nu": nu,
        "kinematics": kin_value,
        "method": method,
        "tol": tol,
        "seed": seed,
    });
    let text = format!(
        "I = {:.12e} +- {:.2e} ({}, {} evaluations{})\n",
        r.value,
        r.error_estimate,
        method,
        r.n_evaluations,
        if r.converged { "" } else { ", not converged" }
    );
    Ok(Outcome::ok(payload, text))
}

fn cmd_selftest(opts: SelftestOptions) -> Result<Outcome, Failure> {
    if opts.n_min > opts.n_max {
        return Err(usage(anyhow!("--n-min exceeds --n-max")));
    }
    let report = selftest::run(&opts);
    let mut text = String::new();
    for s in &report.suites {
        text.push_str(&format!(
            "{} {:<26} {:>7} checks {:>8} ms\n",
            if s.passed { "PASS" } else { "FAIL" },
            s.name,
            s.checks,
            s.millis
        ));
        for f in &s.failures {
            text.push_str(&format!("     {f}\n"));
        }
    }
    let payload = serde_json::to_value(&report).map_err(domain)?;
    Ok(Outcome {
        payload,
        text,
        failed: !report.passed,
    })
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::Check { kinematics, d } => cmd_check(&kinematics, d),
        Command::Motive {
            graph,
            variant,
            kinematics,
            d,
        } => cmd_motive(graph, variant, kinematics.as_deref(), d),
        Command::Coaction { n, mode, gamma } => cmd_coaction(n, mode, &gamma),
        Command::Integrate {
            graph,
            d,
            nu,
            kinematics,
            method,
            tol,
            seed,
        } => cmd_integrate(graph, d, nu, &kinematics, method, tol, seed),
        Command::Selftest {
            n_min,
            n_max,
            seed,
            mutate,
        } => cmd_selftest(SelftestOptions {
            n_min,
            n_max,
            seed,
            mutate_residue_sign: mutate,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text_mode = cli.output.text && !cli.output.json;
    match run(cli) {
        Ok(out) => {
            if text_mode {
                print!("{}", out.text);
            } else {
                println!("{}", serde_json::to_string_pretty(&out.payload).expect("serialisable"));
            }
            if out.failed {
                eprintln!("error: check failed");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            if !text_mode {
                println!("{}", json!({ "error": format!("{e:#}") }));
            }
            ExitCode::from(1)
        }
    }
}
