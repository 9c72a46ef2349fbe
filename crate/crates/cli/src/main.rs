//! `ssr-toolkit`: every toolkit operation behind one command.
//!
//! Results go to standard output as JSON (tagged `"schema": 1`) or CSV.
//! Exit codes: 0 success, 1 domain error (`{"error": code, "detail": ...}`),
//! 2 usage error.

mod files;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use ssr_core::asymptotics::{dilute_check, dilute_with_resource, dilution_bits, distill_rate, gaussian_fit, n_copy_spectrum, typical_set};
use ssr_core::formation::{
    formation_measure, projection_entanglement_bound, random_mode_pairs, FormationOptions, Measure,
};
use ssr_core::locc::{
    build_protocol_with, convertibility_report_with, distinguishing_gap, siv_monotone_check, ConversionTarget, ObservableClass,
};
use ssr_core::schmidt::{local_number_distribution, resource_pair, schmidt_block_decompose};
use ssr_core::selftest;
use ssr_core::teleport::{
    run_teleport, sample_success, scaling_table, success_probability, success_probability_exact, TeleportInstance,
};
use ssr_core::{Result, SsrError, Tolerances};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "ssr-toolkit", version, about = "Entanglement resources under a particle-number superselection rule")]
struct Cli {
    /// Override the normalization tolerance used when reading states.
    #[arg(long, global = true)]
    tol_norm: Option<f64>,
    /// Override the POVM completeness tolerance.
    #[arg(long, global = true)]
    tol_completeness: Option<f64>,
    /// Override the majorization and sector-weight tolerance.
    #[arg(long, global = true)]
    tol_majorization: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Eoe,
    Siv,
}

#[derive(Subcommand)]
enum Command {
    /// EoE, SiV and local-number distribution of a pure state.
    Measures {
        #[arg(long)]
        state: PathBuf,
    },
    /// Sector-wise majorization verdict with partial-sum slack per sector.
    ConvertCheck {
        #[arg(long)]
        source: PathBuf,
        /// A state file, or {"targets": [{"prob", "state"}]}.
        #[arg(long)]
        targets: PathBuf,
    },
    /// Build and verify an explicit conversion protocol.
    Protocol {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Write Alice's measurement here as a POVM file.
        #[arg(long)]
        povm_out: Option<PathBuf>,
    },
    /// Expected post-measurement number variance against V/4.
    PovmMonotone {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        povm: PathBuf,
    },
    /// Largest gap in expectation values under sampled local product observables.
    Hiding {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample arbitrary Hermitian observables instead of number-conserving ones.
        #[arg(long)]
        unrestricted: bool,
    },
    /// Ebits per copy from the typical part of N copies.
    ///
    /// With --csv, prints columns n,c_n,log2_count.
    Distill {
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        copies: usize,
        #[arg(long, default_value_t = 3.0)]
        delta: f64,
        #[arg(long)]
        csv: bool,
    },
    /// Whether shared ebits suffice to rebuild the typical part of N copies.
    Dilute {
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        copies: usize,
        #[arg(long, default_value_t = 3.0)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        pad_bits: usize,
        /// Use exactly this many ebits instead of the padded default.
        #[arg(long)]
        resource_bits: Option<usize>,
    },
    /// Exact moments of the N-copy number distribution and its distance to a Gaussian.
    Gaussian {
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        copies: usize,
    },
    /// Exact outcome enumeration of teleportation through sum_i |i>|M-i>.
    Teleport {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// JSON array of [re, im] amplitudes; random when absent.
        #[arg(long)]
        alpha: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also estimate the success rate from this many sampled runs.
        #[arg(long)]
        shots: Option<usize>,
    },
    /// Smallest resource M reaching each target success probability.
    ///
    /// Prints columns n,target,m.
    TeleportScaling {
        /// Comma-separated success targets in (0, 1).
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99")]
        targets: Vec<f64>,
        /// Range `a..b` (inclusive) or a single value.
        #[arg(long, default_value = "1..64")]
        n: String,
    },
    /// Formation measure of a mixed state with its certificate ensemble.
    Formation {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long, value_enum)]
        measure: MeasureArg,
        /// Ensemble size per sector; rank squared when absent.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        /// Write the certificate ensemble here instead of inline.
        #[arg(long)]
        ensemble_out: Option<PathBuf>,
    },
    /// Schmidt rank and EoE after projecting random product pairs onto each global sector.
    ///
    /// Prints columns sector,rank,eoe,bound.
    ProjectionBound {
        #[arg(long)]
        copies: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the acceptance criteria.
    Selftest {
        /// Run a single criterion by number.
        #[arg(long)]
        only: Option<u8>,
    },
}

enum Output {
    Json(Value),
    Csv(Vec<String>, Vec<Vec<String>>),
    Lines(Vec<String>, bool),
}

fn tolerances(cli: &Cli) -> Tolerances {
    let mut t = Tolerances::default();
    if let Some(x) = cli.tol_norm {
        t.norm = x;
    }
    if let Some(x) = cli.tol_completeness {
        t.completeness = x;
    }
    if let Some(x) = cli.tol_majorization {
        t.majorization = x;
    }
    t
}

fn with_schema(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("schema".into(), json!(SCHEMA));
    }
    v
}

fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || SsrError::Domain(format!("bad range '{s}'"));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

fn run(cli: &Cli) -> Result<Output> {
    let tol = tolerances(cli);
    let out = match &cli.command {
        Command::Measures { state } => {
            let s = files::state(state, &tol)?;
            let blocks = schmidt_block_decompose(&s);
            let r = resource_pair(&s);
            Output::Json(json!({
                "eoe": r.eoe,
                "siv": r.siv,
                "mean_local_number": r.mean_local_number,
                "local_number_distribution": local_number_distribution(&blocks),
            }))
        }
        Command::ConvertCheck { source, targets } => {
            let s = files::state(source, &tol)?;
            let t = files::targets(targets, &tol)?;
            let conv: Vec<ConversionTarget<f64>> =
                t.iter().map(|(p, st)| ConversionTarget { prob: *p, blocks: schmidt_block_decompose(st) }).collect();
            let rep = convertibility_report_with(&schmidt_block_decompose(&s), &conv, &tol);
            Output::Json(serde_json::to_value(rep).expect("report serializes"))
        }
        Command::Protocol { source, target, povm_out } => {
            let s = files::state(source, &tol)?;
            let t = files::state(target, &tol)?;
            let p = build_protocol_with(&s, &t, &tol)?;
            let branches = p.execute(&s, std::slice::from_ref(&t));
            if let Some(path) = povm_out {
                files::write(path, &p.povm.to_json())?;
            }
            Output::Json(json!({
                "elements": p.povm.len(),
                "completeness_residual": p.povm.completeness_residual(),
                "branches": branches.iter().map(|b| json!({"prob": b.prob, "fidelity": b.fidelity})).collect::<Vec<_>>(),
                "min_fidelity": branches.iter().filter(|b| b.prob > 0.0).map(|b| b.fidelity).fold(1.0f64, f64::min),
            }))
        }
        Command::PovmMonotone { state, povm } => {
            let s = files::state(state, &tol)?;
            let m = files::povm(povm, &tol)?;
            if m.space() != s.alice() {
                return Err(SsrError::Shape("POVM does not act on Alice's space".into()));
            }
            Output::Json(serde_json::to_value(siv_monotone_check(&s, &m)).expect("check serializes"))
        }
        Command::Hiding { a, b, trials, seed, unrestricted } => {
            let (s1, s2) = (files::state(a, &tol)?, files::state(b, &tol)?);
            if s1.alice() != s2.alice() || s1.bob() != s2.bob() {
                return Err(SsrError::Shape("states live on different spaces".into()));
            }
            let class = if *unrestricted { ObservableClass::Unrestricted } else { ObservableClass::SectorDiagonal };
            let d = distinguishing_gap(&s1, &s2, class, *trials, *seed);
            Output::Json(json!({"distance": d, "trials": trials, "unrestricted": unrestricted}))
        }
        Command::Distill { p0, copies, delta, csv } => {
            let spec = n_copy_spectrum(*p0, *copies)?;
            if *csv {
                let rows = spec.rows().into_iter().map(|(n, c, l)| vec![n.to_string(), c.to_string(), l.to_string()]).collect();
                return Ok(Output::Csv(vec!["n".into(), "c_n".into(), "log2_count".into()], rows));
            }
            let d = distill_rate(&spec, *delta)?;
            Output::Json(json!({
                "rate": d.ebits_per_copy,
                "ebits": d.ebits,
                "residual_siv": d.residual_siv,
                "residual_eoe": d.residual_eoe,
                "loss": d.truncation_loss,
                "convertible": d.convertible,
                "typical": {"lo": d.typical.lo, "hi": d.typical.hi, "mass": d.typical.mass},
            }))
        }
        Command::Dilute { p0, copies, delta, pad_bits, resource_bits } => {
            let spec = n_copy_spectrum(*p0, *copies)?;
            let bits = resource_bits.unwrap_or_else(|| dilution_bits(&typical_set(&spec, *delta)) + pad_bits);
            let ok = match resource_bits {
                Some(b) => dilute_with_resource(&spec, *delta, *b)?,
                None => dilute_check(&spec, *delta, *pad_bits)?,
            };
            Output::Json(json!({"convertible": ok, "resource_bits": bits}))
        }
        Command::Gaussian { p0, copies } => {
            let g = gaussian_fit(&n_copy_spectrum(*p0, *copies)?);
            Output::Json(json!({"mean": g.mean, "variance": g.variance, "max_abs_dev": g.max_abs_dev}))
        }
        Command::Teleport { n, m, alpha, seed, shots } => {
            let inst = match alpha {
                Some(path) => {
                    let a = files::alpha(path)?;
                    if a.len() != n + 1 {
                        return Err(SsrError::Shape(format!("expected {} amplitudes, got {}", n + 1, a.len())));
                    }
                    TeleportInstance::new(a, *m)?
                }
                None => TeleportInstance::random(*n, *m, *seed),
            };
            let out = run_teleport(&inst);
            let mut v = json!({
                "success_prob_exact": success_probability_exact(&out),
                "success_prob_formula": success_probability::<f64>(*n, *m),
                "outcomes": out.iter().map(|o| json!({"n": o.n, "k": o.k, "prob": o.prob, "fidelity": o.fidelity, "success": o.success})).collect::<Vec<_>>(),
            });
            if let Some(k) = shots {
                v["success_prob_sampled"] = json!(sample_success(&out, *k, *seed));
            }
            Output::Json(v)
        }
        Command::TeleportScaling { targets, n } => {
            let ns = parse_range(n)?;
            let mut rows = Vec::new();
            for &t in targets {
                for (n, m) in scaling_table(&ns, t)? {
                    rows.push(vec![n.to_string(), t.to_string(), m.to_string()]);
                }
            }
            Output::Csv(vec!["n".into(), "target".into(), "m".into()], rows)
        }
        Command::Formation { rho, measure, k, restarts, seed, max_iters, ensemble_out } => {
            let r = files::density(rho, &tol)?;
            let which = match measure {
                MeasureArg::Eoe => Measure::Eoe,
                MeasureArg::Siv => Measure::Siv,
            };
            let opts = FormationOptions { ensemble_size: *k, restarts: *restarts, seed: *seed, max_iters: *max_iters, ..Default::default() };
            let res = formation_measure(&r, which, &opts)?;
            let ens = files::ensemble_file(&res.best_ensemble);
            let ensemble = match ensemble_out {
                Some(path) => {
                    files::write(path, &serde_json::to_string_pretty(&ens).expect("ensemble serializes"))?;
                    json!(path.display().to_string())
                }
                None => serde_json::to_value(&ens).expect("ensemble serializes"),
            };
            let error = res.best_ensemble.reconstruct()?.trace_distance(&r);
            Output::Json(json!({
                "value": res.value,
                "converged": res.converged,
                "restarts": res.restarts,
                "sectors": serde_json::to_value(&res.sectors).expect("sectors serialize"),
                "reconstruction_error": error,
                "ensemble": ensemble,
            }))
        }
        Command::ProjectionBound { copies, seed } => {
            let pairs = random_mode_pairs::<f64>(*copies, *seed);
            let mut rows = Vec::new();
            for sector in 0..=2 * copies {
                let r = projection_entanglement_bound(&pairs, sector)?;
                rows.push(vec![sector.to_string(), r.schmidt_rank.to_string(), r.eoe.to_string(), r.bound.to_string()]);
            }
            Output::Csv(vec!["sector".into(), "rank".into(), "eoe".into(), "bound".into()], rows)
        }
        Command::Selftest { only } => {
            let reports = match only {
                Some(id) => vec![selftest::run_criterion(*id).ok_or_else(|| SsrError::Domain(format!("no criterion {id}")))?],
                None => selftest::run_all(),
            };
            let ok = reports.iter().all(|r| r.passed);
            let mut lines: Vec<String> = reports.iter().map(|r| r.to_string()).collect();
            lines.push(format!("{} of {} criteria passed", reports.iter().filter(|r| r.passed).count(), reports.len()));
            Output::Lines(lines, ok)
        }
    };
    Ok(out)
}

fn configure_threads() {
    let threads = std::env::var("SSR_TOOLKIT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if threads > 0 {
        // a second initialization only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn emit(out: Output) -> std::io::Result<ExitCode> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match out {
        Output::Json(v) => {
            writeln!(lock, "{}", serde_json::to_string_pretty(&with_schema(v)).expect("json value serializes"))?;
            Ok(ExitCode::SUCCESS)
        }
        Output::Csv(header, rows) => {
            let mut w = csv::Writer::from_writer(lock);
            w.write_record(&header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Output::Lines(lines, ok) => {
            for l in lines {
                writeln!(lock, "{l}")?;
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli) {
        Ok(out) => emit(out).unwrap_or(ExitCode::from(1)),
        Err(e) => {
            let v = json!({"schema": SCHEMA, "error": e.code(), "detail": e.to_string()});
            println!("{}", serde_json::to_string_pretty(&v).expect("json value serializes"));
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::parse_range;

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_range("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert!(parse_range("4..2").is_err());
        assert!(parse_range("a..b").is_err());
    }
}
