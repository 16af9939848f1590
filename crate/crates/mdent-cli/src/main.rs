//! `mdent`: decomposition entropies, their minimization over local product
//! bases, k-uniform state generation and verification, design-based
//! constructions, and ensemble statistics, from one binary.
//!
//! Every run echoes the resolved seed and configuration to stderr. Stdout is
//! reserved for results; with `--json` it carries machine-readable JSON.
//! Exit codes: 0 success, 1 domain failure, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde_json::json;

use mdent::amegen::{generate_kuniform, GenConfig};
use mdent::designs::{
    canonicalize, known_state, latin_square, mols_pair, oa_from_mols, state_from_oa,
    OrthogonalArray,
};
use mdent::ensemble::{
    export, report_to_csv, run_ensemble, EnsembleSpec, ExportFormat, Quantity, Source,
};
use mdent::entropy::{renyi_entropy, support, Order};
use mdent::io::{load_state, save_state, state_to_json};
use mdent::minent::{entropy_vs_q_sweep, minimize_entropy, MinEntropyConfig};
use mdent::random::DEFAULT_SEED;
use mdent::seesaw::{s_infinity_min, SeesawConfig};
use mdent::uniformity::check_k_uniform;
use mdent::{C64, Result, State};

#[derive(Parser)]
#[command(
    name = "mdent",
    version,
    about = "Minimal decomposition entropy toolkit for multipartite pure states"
)]
struct Cli {
    /// RNG seed; defaults to a fixed constant so bare runs reproduce.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for restart/ensemble fan-out (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rényi decomposition entropies of a state in its stored basis.
    Entropy {
        /// State JSON file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated orders; "inf" for the min-entropy.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,inf")]
        q: Vec<String>,
        /// Probabilities below this do not count toward the support.
        #[arg(long, default_value_t = 1e-12)]
        support_tol: f64,
    },
    /// Minimize S_q over local product bases by alternating Lp-PCA.
    Minimize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 10_000)]
        max_sweeps: usize,
    },
    /// Seesaw for S_inf^min, the closest product state, and the GME.
    Gme {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 10_000)]
        max_cycles: usize,
    },
    /// Generate a random k-uniform state by nuclear-norm ascent.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 5_000)]
        max_iters: usize,
        /// Convergence threshold on 1 - f.
        #[arg(long, default_value_t = 1e-10)]
        f_tol: f64,
        /// Uniformity deviation a successful state must pass.
        #[arg(long, default_value_t = 1e-6)]
        verify_tol: f64,
        /// Write the state (with generator metadata) here on success.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check k-uniformity of a state over all k-party bipartitions.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to floor(n/2), the AME check.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Build a state from a combinatorial design or a named reference.
    Construct {
        /// "ls" (AME(3,d) from a Latin square) or "ols"/"oa" (AME(4,d) from
        /// orthogonal Latin squares).
        #[arg(long, requires = "d", conflicts_with = "known")]
        design: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        /// Named reference state: ghz3, ame_4_3, o16, o16_ref.
        #[arg(long, required_unless_present = "design")]
        known: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize S_2, then canonicalize the optimized state to concentrate
    /// its support.
    Sparsify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Amplitudes below this are dropped by the canonical form.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Write the canonicalized optimized state here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample an ensemble and tabulate entropy statistics.
    Ensemble {
        /// "haar", "ame", or "files" (with --in).
        #[arg(long)]
        source: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        size: usize,
        /// Comma-separated: S2, S2min, Sinf, Sinfmin.
        #[arg(long, value_delimiter = ',', default_value = "S2")]
        quantities: Vec<String>,
        /// Restart budget for the optimizing quantities.
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// State files for --source files.
        #[arg(long = "in")]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// S_q and S_q^min over a grid of orders, with continuation.
    #[command(name = "sweep-q")]
    SweepQ {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated orders (finite, > 1).
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1.5,2,2.5,3,3.5,4,4.5,5,5.5,6,6.5,7,7.5,8,8.5,9,9.5,10,20,50"
        )]
        q_grid: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

fn complex_pairs(v: &DVector<C64>) -> serde_json::Value {
    json!(v.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>())
}

/// Row-major [[re, im], ...] nesting: party -> row -> entry.
fn units_json(units: &[DMatrix<C64>]) -> serde_json::Value {
    json!(units
        .iter()
        .map(|u| (0..u.nrows())
            .map(|r| (0..u.ncols()).map(|c| vec![u[(r, c)].re, u[(r, c)].im]).collect::<Vec<_>>())
            .collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn state_json_value(state: &State) -> Result<serde_json::Value> {
    Ok(serde_json::from_str(&state_to_json(state))?)
}

fn write_json(path: &PathBuf, value: &serde_json::Value) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    std::fs::write(path, body)?;
    Ok(())
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn sweep_csv(points: &[mdent::minent::SweepPoint]) -> String {
    let mut out = String::from("q,s_q,s_q_min\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.q, p.s_q, p.s_q_min));
    }
    out
}

/// Runs one subcommand; Ok(true) = clean exit, Ok(false) = domain failure
/// reported on stdout/stderr (exit 1 without an extra error line).
fn dispatch(cli: &Cli, seed: u64) -> Result<bool> {
    match &cli.cmd {
        Cmd::Entropy {
            input,
            q,
            support_tol,
        } => {
            eprintln!(
                "# config entropy in={} q={} support_tol={}",
                input.display(),
                q.join(","),
                support_tol
            );
            let loaded = load_state(input)?;
            let orders = q
                .iter()
                .map(|s| Order::parse(s))
                .collect::<Result<Vec<_>>>()?;
            let values = orders
                .iter()
                .map(|o| renyi_entropy(&loaded.state, *o))
                .collect::<Result<Vec<_>>>()?;
            let supp = support(&loaded.state, *support_tol)?;
            if cli.json {
                let rows: Vec<serde_json::Value> = orders
                    .iter()
                    .zip(&values)
                    .map(|(o, v)| json!({"q": o.to_string(), "entropy": v}))
                    .collect();
                print_json(&json!({
                    "n_parties": loaded.state.n_parties(),
                    "local_dim": loaded.state.local_dim(),
                    "pre_norm": loaded.pre_norm,
                    "support": supp,
                    "entropies": rows,
                }));
            } else {
                for (o, v) in orders.iter().zip(&values) {
                    println!("S_{} = {:.9}", o, v);
                }
                println!("support = {}", supp);
            }
            Ok(true)
        }
        Cmd::Minimize {
            input,
            q,
            restarts,
            max_sweeps,
        } => {
            eprintln!(
                "# config minimize in={} q={} restarts={} max_sweeps={}",
                input.display(),
                q,
                restarts,
                max_sweeps
            );
            let loaded = load_state(input)?;
            let mut cfg = MinEntropyConfig::new(*q);
            cfg.restarts = *restarts;
            cfg.max_sweeps = *max_sweeps;
            cfg.seed = seed;
            let res = minimize_entropy(&loaded.state, &cfg)?;
            if cli.json {
                print_json(&json!({
                    "entropy": res.entropy,
                    "units": units_json(&res.units),
                    "trace": res.trace,
                    "seed": seed,
                }));
            } else {
                println!("S_{}^min = {:.9}", q, res.entropy);
                println!(
                    "best restart {} of {}, {} sweeps",
                    res.best_restart,
                    restarts,
                    res.trace.len().saturating_sub(1)
                );
            }
            Ok(true)
        }
        Cmd::Gme {
            input,
            restarts,
            max_cycles,
        } => {
            eprintln!(
                "# config gme in={} restarts={} max_cycles={}",
                input.display(),
                restarts,
                max_cycles
            );
            let loaded = load_state(input)?;
            let mut cfg = SeesawConfig::default();
            cfg.restarts = *restarts;
            cfg.max_cycles = *max_cycles;
            cfg.seed = seed;
            let res = s_infinity_min(&loaded.state, &cfg)?;
            if cli.json {
                let factors: Vec<serde_json::Value> =
                    res.prod.factors.iter().map(complex_pairs).collect();
                print_json(&json!({
                    "lambda": res.lambda,
                    "s_inf_min": res.s_inf_min,
                    "gme": res.gme,
                    "factors": factors,
                }));
            } else {
                println!("lambda = {:.9}", res.lambda);
                println!("S_inf^min = {:.9}", res.s_inf_min);
                println!("GME = {:.9}", res.gme);
            }
            Ok(true)
        }
        Cmd::Generate {
            n,
            d,
            k,
            restarts,
            max_iters,
            f_tol,
            verify_tol,
            out,
        } => {
            eprintln!(
                "# config generate n={} d={} k={} restarts={} max_iters={} f_tol={} verify_tol={}",
                n, d, k, restarts, max_iters, f_tol, verify_tol
            );
            let mut cfg = GenConfig::new(*n, *d, *k);
            cfg.restarts = *restarts;
            cfg.max_iters = *max_iters;
            cfg.f_tol = *f_tol;
            cfg.verify_tol = *verify_tol;
            cfg.seed = seed;
            let res = generate_kuniform(&cfg)?;
            if cli.json {
                print_json(&json!({
                    "success": res.success,
                    "f_final": res.f_final,
                    "iterations": res.iters,
                    "restart": res.restart,
                    "max_deviation": res.report.max_deviation,
                    "seed": seed,
                }));
            } else {
                println!(
                    "success = {}, f = {:.12}, {} iterations (restart {})",
                    res.success, res.f_final, res.iters, res.restart
                );
            }
            if !res.success {
                eprintln!(
                    "generation did not converge: best f = {:.12} after {} restarts",
                    res.f_final, restarts
                );
                return Ok(false);
            }
            if let Some(path) = out {
                let mut value = state_json_value(&res.state)?;
                let meta = value.as_object_mut().expect("state JSON is an object");
                meta.insert("f_final".into(), json!(res.f_final));
                meta.insert("iterations".into(), json!(res.iters));
                meta.insert("seed".into(), json!(seed));
                write_json(path, &value)?;
            }
            Ok(true)
        }
        Cmd::Verify { input, k, tol } => {
            let loaded = load_state(input)?;
            let k = k.unwrap_or(loaded.state.n_parties() / 2);
            eprintln!("# config verify in={} k={} tol={}", input.display(), k, tol);
            let report = check_k_uniform(&loaded.state, k, *tol)?;
            if cli.json {
                print_json(&serde_json::to_value(&report)?);
            } else {
                println!(
                    "k = {}, uniform = {}, max deviation = {:.3e}",
                    report.k, report.is_uniform, report.max_deviation
                );
            }
            Ok(report.is_uniform)
        }
        Cmd::Construct {
            design,
            d,
            known,
            out,
        } => {
            let state = match (design, known) {
                (Some(kind), None) => {
                    let d = d.expect("clap enforces --d with --design");
                    eprintln!("# config construct design={} d={}", kind, d);
                    match kind.as_str() {
                        "ls" => {
                            let ls = latin_square(d);
                            let rows = (0..d)
                                .flat_map(|i| {
                                    let row = ls.cells[i].clone();
                                    (0..d).map(move |j| vec![i, j, row[j]])
                                })
                                .collect();
                            state_from_oa(&OrthogonalArray::new(rows, d, 2)?)?
                        }
                        "ols" | "oa" => {
                            let (l1, l2) = mols_pair(d)?;
                            state_from_oa(&oa_from_mols(&l1, &l2)?)?
                        }
                        other => {
                            return Err(mdent::MdentError::InvalidParameter(format!(
                                "unknown design '{}'; available: ls, ols, oa",
                                other
                            )))
                        }
                    }
                }
                (None, Some(name)) => {
                    eprintln!("# config construct known={}", name);
                    known_state(name)?
                }
                _ => unreachable!("clap enforces exactly one of --design/--known"),
            };
            match out {
                Some(path) => {
                    save_state(path, &state)?;
                    if cli.json {
                        print_json(&json!({
                            "n_parties": state.n_parties(),
                            "local_dim": state.local_dim(),
                            "support": support(&state, 1e-12)?,
                        }));
                    } else {
                        println!(
                            "wrote {} ({} parties, d = {})",
                            path.display(),
                            state.n_parties(),
                            state.local_dim()
                        );
                    }
                }
                None => println!("{}", state_to_json(&state)),
            }
            Ok(true)
        }
        Cmd::Sparsify {
            input,
            q,
            restarts,
            tol,
            out,
        } => {
            eprintln!(
                "# config sparsify in={} q={} restarts={} tol={}",
                input.display(),
                q,
                restarts,
                tol
            );
            let loaded = load_state(input)?;
            let mut cfg = MinEntropyConfig::new(*q);
            cfg.restarts = *restarts;
            cfg.seed = seed;
            let res = minimize_entropy(&loaded.state, &cfg)?;
            let sparse = canonicalize(&res.optimized_state, *tol);
            let before = support(&loaded.state, *tol)?;
            let after = support(&sparse, *tol)?;
            if let Some(path) = out {
                save_state(path, &sparse)?;
            }
            if cli.json {
                print_json(&json!({
                    "entropy": res.entropy,
                    "support_before": before,
                    "support_after": after,
                    "units": units_json(&res.units),
                    "state": state_json_value(&sparse)?,
                    "seed": seed,
                }));
            } else {
                println!("S_{}^min = {:.9}", q, res.entropy);
                println!("support {} -> {}", before, after);
            }
            Ok(true)
        }
        Cmd::Ensemble {
            source,
            n,
            d,
            size,
            quantities,
            restarts,
            inputs,
            out,
            format,
        } => {
            eprintln!(
                "# config ensemble source={} n={} d={} size={} quantities={} restarts={} format={}",
                source,
                n,
                d,
                size,
                quantities.join(","),
                restarts,
                format
            );
            let src = match source.as_str() {
                "haar" => Source::Haar,
                "ame" => Source::AmeGenerated,
                "files" => {
                    if inputs.is_empty() {
                        return Err(mdent::MdentError::InvalidParameter(
                            "--source files needs at least one --in".into(),
                        ));
                    }
                    Source::StateFiles(inputs.clone())
                }
                other => {
                    return Err(mdent::MdentError::InvalidParameter(format!(
                        "unknown source '{}'; available: haar, ame, files",
                        other
                    )))
                }
            };
            let fmt = ExportFormat::parse(format)?;
            let mut spec = EnsembleSpec::new(src, *n, *d, *size);
            spec.quantities = quantities
                .iter()
                .map(|s| Quantity::parse(s))
                .collect::<Result<Vec<_>>>()?;
            spec.min_config.restarts = *restarts;
            spec.seesaw_config.restarts = *restarts;
            spec.seed = seed;
            let report = run_ensemble(&spec)?;
            match out {
                Some(path) => {
                    export(&report, fmt, path)?;
                    if cli.json {
                        print_json(&json!({
                            "out": path.display().to_string(),
                            "size": report.size,
                            "failures": report.failures,
                            "stats": serde_json::to_value(&report.stats)?,
                        }));
                    } else {
                        for s in &report.stats {
                            println!(
                                "{}: mean {:.6} std {:.6} min {:.6} max {:.6}",
                                s.quantity, s.mean, s.std, s.min, s.max
                            );
                        }
                        println!("wrote {}", path.display());
                    }
                }
                None => match fmt {
                    ExportFormat::Csv => print!("{}", report_to_csv(&report)),
                    ExportFormat::Json => print_json(&serde_json::to_value(&report)?),
                },
            }
            Ok(true)
        }
        Cmd::SweepQ {
            input,
            q_grid,
            restarts,
            out,
            format,
        } => {
            eprintln!(
                "# config sweep-q in={} q_grid={} restarts={} format={}",
                input.display(),
                q_grid
                    .iter()
                    .map(|q| q.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                restarts,
                format
            );
            let loaded = load_state(input)?;
            let fmt = ExportFormat::parse(format)?;
            let mut cfg = MinEntropyConfig::new(2.0);
            cfg.restarts = *restarts;
            cfg.seed = seed;
            let points = entropy_vs_q_sweep(&loaded.state, q_grid, &cfg)?;
            let body = match fmt {
                ExportFormat::Csv => sweep_csv(&points),
                ExportFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&points)?;
                    s.push('\n');
                    s
                }
            };
            match out {
                Some(path) => {
                    std::fs::write(path, &body)?;
                    if cli.json {
                        print_json(&json!({
                            "out": path.display().to_string(),
                            "points": points.len(),
                        }));
                    } else {
                        println!("wrote {} ({} grid points)", path.display(), points.len());
                    }
                }
                None => print!("{}", body),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    eprintln!("# seed {}", seed);
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(1);
        }
    }
    match dispatch(&cli, seed) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}
