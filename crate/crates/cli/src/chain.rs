use std::time::Instant;

use clap::{Args, ValueEnum};
use qnetkit::chain::ChainError;
use qnetkit::des::{simulate_batch, DesConfig};
use qnetkit::disttrack::{chain_distribution, TrackConfig};
use qnetkit::formulas;
use qnetkit::markov::{BuildOptions, RepeaterMarkovChain, SwapTime};
use qnetkit::montecarlo::{run_batch, BatchSummary};
use rayon::prelude::*;

use crate::error::CliError;
use crate::grid::{GridArgs, GridCell};
use crate::table::{Cell, Table};
use crate::{write_output, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Closed forms (n = 1, or deterministic swaps).
    Analytic,
    /// Exact truncated distribution.
    Track,
    /// Absorbing Markov chain.
    Markov,
    /// Monte Carlo sampling.
    Mc,
    /// Discrete-event simulation.
    Des,
}

impl Engine {
    fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Track => "track",
            Engine::Markov => "markov",
            Engine::Mc => "mc",
            Engine::Des => "des",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SwapTimeArg {
    ZeroStep,
    OneStep,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(value_enum)]
    pub engine: Engine,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Fixed horizon of the track engine.
    #[arg(long)]
    pub trunc: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Duration of a swap round in the markov engine.
    #[arg(long, value_enum, default_value = "zero-step")]
    pub swap_time: SwapTimeArg,
    /// Merge mirror-symmetric Markov states.
    #[arg(long)]
    pub symmetric: bool,
    /// Classical communication delay of each swap (des engine).
    #[arg(long, default_value_t = 0)]
    pub delay: u64,
    /// Append a wall-clock column (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct EngineRow {
    mean_t: f64,
    stddev_t: Option<f64>,
    mean_w: Option<f64>,
    captured_mass: Option<f64>,
    stderr_t: Option<f64>,
    stderr_w: Option<f64>,
    n_samples: Option<u64>,
}

fn unsupported(engine: Engine, what: &str) -> CliError {
    ChainError::Unsupported(format!("engine `{}` does not support {what}", engine.name())).into()
}

fn analytic(cell: &GridCell) -> Result<EngineRow, CliError> {
    let p = &cell.params;
    if cell.protocol.has_distillation() {
        return Err(unsupported(Engine::Analytic, "distillation"));
    }
    let segments = p.segments();
    let mean_t = if p.n == 1 && p.tau.is_none() {
        formulas::single_repeater(p)?.mean_t1
    } else if p.p_s == 1.0 {
        match p.tau {
            Some(tau) => formulas::det_swap_mean_cutoff(segments, p.p_g, tau)?,
            None => formulas::det_swap_mean(segments, p.p_g)?,
        }
    } else {
        return Err(unsupported(
            Engine::Analytic,
            "probabilistic swaps beyond n = 1 or with a cut-off; use `track`",
        ));
    };
    let mean_w = if p.n == 1 && p.tau.is_none() {
        Some(p.w0 * p.w0 * formulas::single_repeater(p)?.gamma)
    } else if p.t_coh.is_infinite() {
        Some(p.w0.powf(segments as f64))
    } else {
        None
    };
    Ok(EngineRow {
        mean_t,
        mean_w,
        ..EngineRow::default()
    })
}

fn from_batch(b: &BatchSummary) -> EngineRow {
    EngineRow {
        mean_t: b.mean_t,
        stddev_t: b.stderr_t.map(|s| s * (b.n_samples as f64).sqrt()),
        mean_w: Some(b.mean_w),
        captured_mass: None,
        stderr_t: b.stderr_t,
        stderr_w: b.stderr_w,
        n_samples: Some(b.n_samples),
    }
}

fn evaluate(args: &ChainArgs, cell: &GridCell) -> Result<EngineRow, CliError> {
    let engine = args.engine;
    if args.delay > 0 && engine != Engine::Des {
        return Err(unsupported(engine, "a communication delay"));
    }
    if args.swap_time == SwapTimeArg::OneStep && engine != Engine::Markov {
        return Err(unsupported(engine, "one-step swaps"));
    }
    match engine {
        Engine::Analytic => analytic(cell),
        Engine::Track => {
            let config = TrackConfig {
                t_trunc: args.trunc,
                ..TrackConfig::default()
            };
            let s = chain_distribution(&cell.params, &cell.protocol, &config)?.summary();
            Ok(EngineRow {
                mean_t: s.mean,
                stddev_t: Some(s.stddev),
                mean_w: s.mean_w,
                captured_mass: Some(s.captured_mass),
                ..EngineRow::default()
            })
        }
        Engine::Markov => {
            if cell.protocol.has_distillation() {
                return Err(unsupported(engine, "distillation"));
            }
            let options = BuildOptions {
                swap_time: match args.swap_time {
                    SwapTimeArg::ZeroStep => SwapTime::ZeroStep,
                    SwapTimeArg::OneStep => SwapTime::OneStep,
                },
                merge_symmetric: args.symmetric,
                ..BuildOptions::default()
            };
            let stats = RepeaterMarkovChain::build(&cell.params, options)?.absorption_stats()?;
            Ok(EngineRow {
                mean_t: stats.mean,
                stddev_t: Some(stats.variance.max(0.0).sqrt()),
                ..EngineRow::default()
            })
        }
        Engine::Mc => Ok(from_batch(&run_batch(&cell.params, &cell.protocol, args.samples, args.seed)?)),
        Engine::Des => {
            let config = DesConfig {
                delay: args.delay,
                record_trace: false,
            };
            Ok(from_batch(&simulate_batch(
                &cell.params,
                &cell.protocol,
                &config,
                args.samples,
                args.seed,
            )?))
        }
    }
}

pub fn table(args: &ChainArgs) -> Result<Table, CliError> {
    let cells = args.grid.expand()?;
    let results = cells
        .par_iter()
        .map(|cell| {
            let start = Instant::now();
            evaluate(args, cell).map(|row| (row, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["engine"];
    header.extend(GridCell::HEADER);
    header.extend([
        "mean_t",
        "stddev_t",
        "mean_w",
        "captured_mass",
        "stderr_t",
        "stderr_w",
        "n_samples",
        "seed",
    ]);
    if args.timing {
        header.push("wall_ms");
    }
    let mut t = Table::new(header);
    let sampled = matches!(args.engine, Engine::Mc | Engine::Des);
    for (cell, (row, ms)) in cells.iter().zip(results) {
        let mut r = vec![args.engine.name().into()];
        r.extend(cell.cells());
        r.extend([
            row.mean_t.into(),
            row.stddev_t.into(),
            row.mean_w.into(),
            row.captured_mass.into(),
            row.stderr_t.into(),
            row.stderr_w.into(),
            row.n_samples.map_or(Cell::Empty, Cell::Int),
            if sampled { Cell::Int(args.seed) } else { Cell::Empty },
        ]);
        if args.timing {
            r.push(ms.into());
        }
        t.push(r);
    }
    Ok(t)
}

pub fn run(args: &ChainArgs) -> Result<(), CliError> {
    let t = table(args)?;
    write_output(args.output.out.as_deref(), &t.render(args.output.format))
}
