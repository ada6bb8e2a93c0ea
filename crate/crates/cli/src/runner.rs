//! Command dispatch: every experiment resolves to a deterministic function
//! of (config, seed); `threads` splits independent trials across workers and
//! merges them in index order, so it can never change the bytes written.

use crate::config::{
    parse_config, resolve, CommandDto, ExperimentConfig, OutputFormat, RhsDto,
};
use crate::output::{fmt_f64, fmt_opt, write_atomic, Csv};
use emproc_core::typicality::{deviation_trial, DeviationRecord};
use emproc_core::{
    converse_check, coordination_rate, shatter_check, CoordinationSim, Error as CoreError,
    Point, SignedDifference, WzSim,
};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug)]
pub enum RunFailure {
    /// Exit 2: the configuration or inputs cannot be used.
    Config(String),
    /// Exit 3: the problem has no feasible solution.
    Infeasible(String),
    /// Exit 4: a solver failed to converge or a numeric certificate failed.
    NonConvergence(String),
    /// Exit 1: anything else (IO, internal).
    Other(String),
}

impl RunFailure {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunFailure::Config(_) => 2,
            RunFailure::Infeasible(_) => 3,
            RunFailure::NonConvergence(_) => 4,
            RunFailure::Other(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunFailure::Config(m)
            | RunFailure::Infeasible(m)
            | RunFailure::NonConvergence(m)
            | RunFailure::Other(m) => m,
        }
    }
}

fn core_failure(e: CoreError) -> RunFailure {
    match e {
        CoreError::Infeasible(_) => RunFailure::Infeasible(e.to_string()),
        CoreError::NonConvergence { .. } | CoreError::Numerical(_) => {
            RunFailure::NonConvergence(e.to_string())
        }
        other => RunFailure::Config(other.to_string()),
    }
}

fn config_failure(e: anyhow::Error) -> RunFailure {
    RunFailure::Config(format!("{e:#}"))
}

/// Runs trial indices 0..count across workers; the merge is by index, so
/// the result is independent of scheduling.
fn parallel_indexed<T: Send>(
    count: usize,
    threads: usize,
    f: impl Fn(usize) -> Result<T, CoreError> + Sync,
) -> Result<Vec<T>, CoreError> {
    let workers = threads.max(1).min(count.max(1));
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let mut slots: Vec<Option<Result<T, CoreError>>> = Vec::with_capacity(count);
    slots.resize_with(count, || None);
    let slot_refs = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for w in 0..workers {
            let f = &f;
            let slot_refs = &slot_refs;
            scope.spawn(move || {
                let mut local: Vec<(usize, Result<T, CoreError>)> = Vec::new();
                let mut i = w;
                while i < count {
                    local.push((i, f(i)));
                    i += workers;
                }
                let mut guard = slot_refs.lock().expect("no poisoned worker");
                for (i, r) in local {
                    guard[i] = Some(r);
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every index filled"))
        .collect()
}

#[derive(Serialize)]
struct JointDto {
    nx: usize,
    ny: usize,
    cells: Vec<f64>,
}

impl JointDto {
    fn of(q: &emproc_core::JointPmf) -> Self {
        JointDto {
            nx: q.nx(),
            ny: q.ny(),
            cells: q.cells().to_vec(),
        }
    }
}

struct Rendered {
    csv: String,
    json: serde_json::Value,
    summary: String,
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable result")
}

#[derive(Debug)]
pub struct RunOutcome {
    pub summary_line: String,
    pub out_path: PathBuf,
}

/// Parses, executes, writes the artifact, and returns the one-line summary.
pub fn run(
    config_text: &str,
    seed_flag: Option<u64>,
    out_flag: Option<PathBuf>,
    format_flag: Option<OutputFormat>,
    threads_flag: Option<usize>,
) -> Result<RunOutcome, RunFailure> {
    let cfg = parse_config(config_text).map_err(config_failure)?;
    let resolved = resolve(&cfg, seed_flag, out_flag, format_flag, threads_flag)
        .map_err(config_failure)?;
    let rendered = execute(&cfg, resolved.seed, resolved.threads)?;
    let bytes = match resolved.format {
        OutputFormat::Csv => rendered.csv.into_bytes(),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rendered.json).expect("valid json value");
            s.push('\n');
            s.into_bytes()
        }
    };
    write_atomic(&resolved.out, &bytes).map_err(|e| RunFailure::Other(format!("{e:#}")))?;
    let summary_line = format!(
        "{} {} -> {}",
        cfg.command.name(),
        rendered.summary,
        resolved.out.display()
    );
    Ok(RunOutcome {
        summary_line,
        out_path: resolved.out,
    })
}

fn execute(cfg: &ExperimentConfig, seed: u64, threads: usize) -> Result<Rendered, RunFailure> {
    match &cfg.command {
        CommandDto::Seminorm { class, lhs, rhs } => {
            let class = class.to_core();
            let lhs = lhs.to_core().map_err(config_failure)?;
            let diff = match rhs {
                RhsDto::Measure(m) => {
                    SignedDifference::discrete(lhs, m.to_core().map_err(config_failure)?)
                }
                RhsDto::Model(m) => {
                    SignedDifference::against_model(lhs, m.to_core().map_err(config_failure)?)
                }
            }
            .map_err(core_failure)?;
            let v = emproc_core::seminorm(&class, &diff).map_err(core_failure)?;
            let mut csv = Csv::new("value,exact,sampling_bound");
            csv.row(&[
                fmt_f64(v.value),
                v.exact.to_string(),
                fmt_opt(v.sampling_bound),
            ]);
            #[derive(Serialize)]
            struct Out {
                value: f64,
                exact: bool,
                sampling_bound: Option<f64>,
            }
            Ok(Rendered {
                csv: csv.finish(),
                json: json(&Out {
                    value: v.value,
                    exact: v.exact,
                    sampling_bound: v.sampling_bound,
                }),
                summary: format!("value={}", fmt_f64(v.value)),
            })
        }
        CommandDto::Typical {
            class,
            model,
            tuple,
            epsilon,
        } => {
            let q = emproc_core::TypicalityQuery {
                tuple: tuple.to_points(),
                model: model.to_core().map_err(config_failure)?,
                class: class.to_core(),
                epsilon: *epsilon,
            };
            let r = emproc_core::is_typical(&q).map_err(core_failure)?;
            let mut csv = Csv::new("typical,deviation");
            csv.row(&[r.typical.to_string(), fmt_f64(r.deviation)]);
            #[derive(Serialize)]
            struct Out {
                typical: bool,
                deviation: f64,
            }
            Ok(Rendered {
                csv: csv.finish(),
                json: json(&Out {
                    typical: r.typical,
                    deviation: r.deviation,
                }),
                summary: format!("typical={} deviation={}", r.typical, fmt_f64(r.deviation)),
            })
        }
        CommandDto::Converge {
            class,
            model,
            n_grid,
            trials,
        } => {
            let records = convergence_records(class, model, n_grid, *trials, seed, threads)?;
            let rendered = render_records(&records);
            Ok(rendered)
        }
        CommandDto::Scaling {
            class,
            model,
            n_grid,
            trials,
        } => {
            if n_grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(RunFailure::Config(
                    "scaling needs a strictly increasing n grid".into(),
                ));
            }
            let records = convergence_records(class, model, n_grid, *trials, seed, threads)?;
            let mut csv = Csv::new("n,mean_deviation,mean_sqrt_n");
            #[derive(Serialize)]
            struct Row {
                n: usize,
                mean_deviation: f64,
                mean_sqrt_n: f64,
            }
            let mut rows = Vec::new();
            for &n in n_grid {
                let devs: Vec<f64> = records
                    .iter()
                    .filter(|r| r.n == n)
                    .map(|r| r.deviation)
                    .collect();
                let mean = devs.iter().sum::<f64>() / devs.len().max(1) as f64;
                let scaled = mean * (n as f64).sqrt();
                csv.row(&[n.to_string(), fmt_f64(mean), fmt_f64(scaled)]);
                rows.push(Row {
                    n,
                    mean_deviation: mean,
                    mean_sqrt_n: scaled,
                });
            }
            let summary = format!(
                "rows={} last_scaled={}",
                rows.len(),
                fmt_f64(rows.last().map(|r| r.mean_sqrt_n).unwrap_or(0.0))
            );
            Ok(Rendered {
                csv: csv.finish(),
                json: json(&rows),
                summary,
            })
        }
        CommandDto::Rate { problem } => {
            let sol = coordination_rate(&problem.to_core()).map_err(core_failure)?;
            if !sol.converged {
                return Err(RunFailure::NonConvergence(format!(
                    "gap {} above tolerance",
                    sol.gap
                )));
            }
            let mut csv = Csv::new("delta,rate,solver_gap,iterations,converged");
            csv.row(&[
                fmt_f64(problem.delta),
                fmt_f64(sol.rate_bits),
                fmt_f64(sol.gap),
                sol.iterations.to_string(),
                sol.converged.to_string(),
            ]);
            #[derive(Serialize)]
            struct Out {
                delta: f64,
                rate_bits: f64,
                gap: f64,
                iterations: usize,
                converged: bool,
                q: JointDto,
            }
            Ok(Rendered {
                csv: csv.finish(),
                json: json(&Out {
                    delta: problem.delta,
                    rate_bits: sol.rate_bits,
                    gap: sol.gap,
                    iterations: sol.iterations,
                    converged: sol.converged,
                    q: JointDto::of(&sol.q),
                }),
                summary: format!("rate={}", fmt_f64(sol.rate_bits)),
            })
        }
        CommandDto::RateCurve {
            problem,
            delta_grid,
        } => {
            if delta_grid.is_empty() || delta_grid.windows(2).any(|w| w[0] > w[1]) {
                return Err(RunFailure::Config(
                    "rate-curve needs a nonempty ascending delta grid".into(),
                ));
            }
            let base = problem.to_core();
            let mut rows = Vec::new();
            for &delta in delta_grid {
                let mut p = base.clone();
                p.delta = delta;
                let sol = coordination_rate(&p).map_err(core_failure)?;
                if !sol.converged {
                    return Err(RunFailure::NonConvergence(format!(
                        "gap {} above tolerance at delta {delta}",
                        sol.gap
                    )));
                }
                rows.push((delta, sol.rate_bits, sol.gap, sol.iterations));
            }
            // The curve must be nonincreasing up to solver tolerance.
            for w in rows.windows(2) {
                if w[1].1 > w[0].1 + 1e-3 {
                    return Err(RunFailure::NonConvergence(format!(
                        "rate increased along the grid: {} -> {}",
                        w[0].1, w[1].1
                    )));
                }
            }
            let mut csv = Csv::new("delta,rate,solver_gap,iterations");
            #[derive(Serialize)]
            struct Row {
                delta: f64,
                rate_bits: f64,
                gap: f64,
                iterations: usize,
            }
            let mut out = Vec::new();
            for (delta, rate, gap, iterations) in rows {
                csv.row(&[
                    fmt_f64(delta),
                    fmt_f64(rate),
                    fmt_f64(gap),
                    iterations.to_string(),
                ]);
                out.push(Row {
                    delta,
                    rate_bits: rate,
                    gap,
                    iterations,
                });
            }
            Ok(Rendered {
                csv: csv.finish(),
                summary: format!("points={}", out.len()),
                json: json(&out),
            })
        }
        CommandDto::SimulateCoord {
            problem,
            rate,
            rate_above_solution,
            n,
            trials,
        } => {
            let p = problem.to_core();
            let rate = match (rate, rate_above_solution) {
                (Some(r), None) => *r,
                (None, Some(off)) => {
                    coordination_rate(&p).map_err(core_failure)?.rate_bits + off
                }
                _ => {
                    return Err(RunFailure::Config(
                        "give exactly one of `rate` or `rate_above_solution`".into(),
                    ))
                }
            };
            let sim = CoordinationSim::new(&p, rate, *n, seed).map_err(core_failure)?;
            let outcomes =
                parallel_indexed(*trials, threads, |t| sim.run_trial(t)).map_err(core_failure)?;
            let report = sim.aggregate(&outcomes).map_err(core_failure)?;
            let check = converse_check(&report, rate, &p).map_err(core_failure)?;
            let mut csv = Csv::new("trial,deviation,decode_errors");
            for (t, d) in report.deviations.iter().enumerate() {
                csv.row(&[t.to_string(), fmt_f64(*d), "0".to_string()]);
            }
            #[derive(Serialize)]
            struct Out {
                rate_requested: f64,
                rate_actual: f64,
                n: usize,
                trials: usize,
                mean_deviation: f64,
                quantiles: (f64, f64, f64),
                deviations: Vec<f64>,
                qhat: JointDto,
                converse_i_hat: f64,
                converse_tolerance: f64,
                converse_ok: bool,
                marginal_tv: f64,
            }
            Ok(Rendered {
                csv: csv.finish(),
                summary: format!(
                    "mean_deviation={} rate={}",
                    fmt_f64(report.mean_deviation),
                    fmt_f64(report.rate_actual)
                ),
                json: json(&Out {
                    rate_requested: report.rate_requested,
                    rate_actual: report.rate_actual,
                    n: report.n,
                    trials: report.trials,
                    mean_deviation: report.mean_deviation,
                    quantiles: report.quantiles,
                    deviations: report.deviations.clone(),
                    qhat: JointDto::of(&report.qhat),
                    converse_i_hat: check.i_hat,
                    converse_tolerance: check.i_tolerance,
                    converse_ok: check.ok,
                    marginal_tv: check.marginal_tv,
                }),
            })
        }
        CommandDto::SimulateWz {
            problem,
            g,
            stage1,
            r_bin,
            n1,
            n2,
            trials,
            density_slack,
        } => {
            let p = problem.to_core().map_err(config_failure)?;
            let cfg_sim = emproc_core::WzSimConfig {
                r_bin: *r_bin,
                n1: *n1,
                n2: *n2,
                trials: *trials,
                seed,
                density_slack: density_slack.unwrap_or(0.1),
            };
            let sim = WzSim::new(&p, g, &stage1.to_core(), &cfg_sim).map_err(core_failure)?;
            let outcomes =
                parallel_indexed(*trials, threads, |t| sim.run_trial(t)).map_err(core_failure)?;
            let report = sim.aggregate(&outcomes).map_err(core_failure)?;
            let mut csv = Csv::new("trial,deviation,decode_errors,ambiguous_blocks");
            for t in 0..report.trials {
                csv.row(&[
                    t.to_string(),
                    fmt_f64(report.deviations[t]),
                    report.block_errors[t].to_string(),
                    report.ambiguous_blocks[t].to_string(),
                ]);
            }
            #[derive(Serialize)]
            struct Out {
                n1: usize,
                n2: usize,
                trials: usize,
                mean_deviation: f64,
                decode_error_rate: f64,
                deviations: Vec<f64>,
                block_errors: Vec<usize>,
                ambiguous_blocks: Vec<usize>,
                qhat: JointDto,
            }
            Ok(Rendered {
                csv: csv.finish(),
                summary: format!(
                    "error_rate={} mean_deviation={}",
                    fmt_f64(report.decode_error_rate),
                    fmt_f64(report.mean_deviation)
                ),
                json: json(&Out {
                    n1: report.n1,
                    n2: report.n2,
                    trials: report.trials,
                    mean_deviation: report.mean_deviation,
                    decode_error_rate: report.decode_error_rate,
                    deviations: report.deviations.clone(),
                    block_errors: report.block_errors.clone(),
                    ambiguous_blocks: report.ambiguous_blocks.clone(),
                    qhat: JointDto::of(&report.qhat),
                }),
            })
        }
        CommandDto::Shatter { class, points } => {
            let pts: Vec<Point> = points.iter().map(|c| Point::Vector(c.clone())).collect();
            let r = shatter_check(&class.to_core(), &pts).map_err(core_failure)?;
            let mut csv = Csv::new("points,achieved,shattered");
            csv.row(&[
                pts.len().to_string(),
                r.achieved.to_string(),
                r.shattered.to_string(),
            ]);
            #[derive(Serialize)]
            struct Out {
                class: String,
                points: Vec<Vec<f64>>,
                achieved: usize,
                shattered: bool,
            }
            Ok(Rendered {
                csv: csv.finish(),
                summary: format!("achieved={} shattered={}", r.achieved, r.shattered),
                json: json(&Out {
                    class: r.class_id.to_string(),
                    points: points.clone(),
                    achieved: r.achieved,
                    shattered: r.shattered,
                }),
            })
        }
        CommandDto::Quantize {
            mu,
            class,
            m,
            split,
        } => {
            let measure = mu.to_core().map_err(config_failure)?;
            let split_core = split.as_ref().map(|s| s.to_core());
            let r = emproc_core::design_quantizer(
                &measure,
                split_core.as_ref(),
                &class.to_core(),
                *m,
            )
            .map_err(core_failure)?;
            let mut csv = Csv::new("index,codepoint,achieved_delta");
            for (i, cp) in r.quantizer.codepoints.iter().enumerate() {
                let rendered = match cp {
                    Point::Symbol(s) => s.to_string(),
                    Point::Vector(v) => v
                        .iter()
                        .map(|x| fmt_f64(*x))
                        .collect::<Vec<_>>()
                        .join(";"),
                };
                csv.row(&[i.to_string(), rendered, fmt_f64(r.achieved_delta)]);
            }
            #[derive(Serialize)]
            #[serde(tag = "rule", rename_all = "snake_case")]
            enum RuleDto {
                Nearest,
                SymbolTable { table: Vec<usize> },
                ScalarCells { boundaries: Vec<f64> },
            }
            #[derive(Serialize)]
            struct Out {
                codepoints: MeasurePoints,
                rule: RuleDto,
                achieved_delta: f64,
            }
            #[derive(Serialize)]
            #[serde(untagged)]
            enum MeasurePoints {
                Symbols(Vec<usize>),
                Vectors(Vec<Vec<f64>>),
            }
            let codepoints = if r
                .quantizer
                .codepoints
                .first()
                .map(|p| p.symbol().is_some())
                .unwrap_or(false)
            {
                MeasurePoints::Symbols(
                    r.quantizer
                        .codepoints
                        .iter()
                        .map(|p| p.symbol().unwrap())
                        .collect(),
                )
            } else {
                MeasurePoints::Vectors(
                    r.quantizer
                        .codepoints
                        .iter()
                        .map(|p| p.coords().unwrap().to_vec())
                        .collect(),
                )
            };
            let rule = match &r.quantizer.rule {
                emproc_core::AssignRule::Nearest => RuleDto::Nearest,
                emproc_core::AssignRule::SymbolTable(t) => RuleDto::SymbolTable { table: t.clone() },
                emproc_core::AssignRule::ScalarCells(b) => RuleDto::ScalarCells {
                    boundaries: b.clone(),
                },
            };
            Ok(Rendered {
                csv: csv.finish(),
                summary: format!(
                    "codepoints={} delta={}",
                    r.quantizer.codepoints.len(),
                    fmt_f64(r.achieved_delta)
                ),
                json: json(&Out {
                    codepoints,
                    rule,
                    achieved_delta: r.achieved_delta,
                }),
            })
        }
    }
}

fn convergence_records(
    class: &crate::config::ClassDto,
    model: &crate::config::ModelDto,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<DeviationRecord>, RunFailure> {
    if n_grid.is_empty() || trials == 0 {
        return Err(RunFailure::Config("empty grid or zero trials".into()));
    }
    let class = class.to_core();
    let model = model
        .to_core()
        .map_err(|e| RunFailure::Config(format!("{e:#}")))?;
    let total = n_grid.len() * trials;
    let records = parallel_indexed(total, threads, |i| {
        let gi = i / trials;
        let trial = i % trials;
        deviation_trial(&model, &class, n_grid[gi], gi, trial, seed)
    })
    .map_err(core_failure)?;
    Ok(records)
}

fn render_records(records: &[DeviationRecord]) -> Rendered {
    let mut csv = Csv::new("class,model,n,trial,deviation");
    #[derive(Serialize)]
    struct Row<'a> {
        class: &'a str,
        model: &'a str,
        n: usize,
        trial: usize,
        deviation: f64,
    }
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        csv.row(&[
            r.class_id.to_string(),
            r.model_id.to_string(),
            r.n.to_string(),
            r.trial.to_string(),
            fmt_f64(r.deviation),
        ]);
        rows.push(Row {
            class: &r.class_id,
            model: &r.model_id,
            n: r.n,
            trial: r.trial,
            deviation: r.deviation,
        });
    }
    let mean = records.iter().map(|r| r.deviation).sum::<f64>() / records.len().max(1) as f64;
    Rendered {
        csv: csv.finish(),
        summary: format!("records={} mean_deviation={}", records.len(), fmt_f64(mean)),
        json: json(&rows),
    }
}

/// Convenience wrapper used by tests: run straight from a config string.
pub fn run_to_string(
    config_text: &str,
    seed: u64,
    format: OutputFormat,
    threads: usize,
) -> Result<Vec<u8>, RunFailure> {
    static COUNTER: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
    let unique = COUNTER.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!(
        "emproc-run-{}-{unique}",
        std::process::id()
    ));
    std::fs::create_dir_all(&dir).map_err(|e| RunFailure::Other(e.to_string()))?;
    let out = dir.join("out.dat");
    run(
        config_text,
        Some(seed),
        Some(out.clone()),
        Some(format),
        Some(threads),
    )?;
    let bytes = std::fs::read(&out).map_err(|e| RunFailure::Other(e.to_string()))?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(bytes)
}
