use std::path::PathBuf;

use clap::Args;
use qnetkit::des::{simulate_chain, simulate_samples, DesConfig};
use qnetkit::montecarlo::{substream, BatchSummary};
use rayon::prelude::*;

use crate::error::CliError;
use crate::grid::{GridArgs, GridCell};
use crate::table::{Cell, Table};
use crate::{write_file, write_output, OutputArgs};

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Classical communication delay of each swap, in attempts.
    #[arg(long, default_value_t = 0)]
    pub delay: u64,
    /// Write the event trace of run 0 of every cell here.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Write delivery-time histograms here.
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

struct CellRun {
    summary: BatchSummary,
    trace_hash: String,
    events: u64,
    trace: Vec<String>,
}

fn run_cell(args: &SimulateArgs, cell: &GridCell) -> Result<CellRun, CliError> {
    let config = DesConfig {
        delay: args.delay,
        record_trace: false,
    };
    let samples = simulate_samples(&cell.params, &cell.protocol, &config, args.samples, args.seed)?;
    let first = simulate_chain(
        &cell.params,
        &cell.protocol,
        &DesConfig {
            record_trace: args.trace_out.is_some(),
            ..config
        },
        substream(args.seed, 0),
    )?;
    Ok(CellRun {
        summary: BatchSummary::from_samples(&samples, args.seed),
        trace_hash: first.trace_hash,
        events: first.events,
        trace: first.trace.unwrap_or_default(),
    })
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let grid = args.grid.expand()?;
    let runs = grid
        .par_iter()
        .map(|cell| run_cell(args, cell))
        .collect::<Result<Vec<_>, _>>()?;

    let mut header: Vec<&'static str> = GridCell::HEADER.to_vec();
    header.extend([
        "delay",
        "n_samples",
        "seed",
        "mean_t",
        "stderr_t",
        "mean_w",
        "stderr_w",
        "events_0",
        "trace_hash_0",
    ]);
    let mut t = Table::new(header);
    let mut hist = Table::new(vec!["n", "p_g", "p_s", "t_coh", "cutoff", "t", "count"]);
    let mut traces = String::new();
    for (cell, r) in grid.iter().zip(&runs) {
        let s = &r.summary;
        let mut row = cell.cells();
        row.extend([
            args.delay.into(),
            s.n_samples.into(),
            args.seed.into(),
            s.mean_t.into(),
            s.stderr_t.into(),
            s.mean_w.into(),
            s.stderr_w.into(),
            r.events.into(),
            r.trace_hash.clone().into(),
        ]);
        t.push(row);
        let key: Vec<Cell> = cell.cells().into_iter().take(5).collect();
        for &(time, count) in &s.histogram {
            let mut h = key.clone();
            h.extend([time.into(), count.into()]);
            hist.push(h);
        }
        traces.push_str(&format!(
            "# n={} p_g={} p_s={} t_coh={} cutoff={} seed={} run=0 sha256={}\n",
            cell.params.n,
            cell.params.p_g,
            cell.params.p_s,
            cell.params.t_coh,
            cell.params.tau.map_or("none".to_string(), |v| v.to_string()),
            args.seed,
            r.trace_hash
        ));
        for line in &r.trace {
            traces.push_str(line);
            traces.push('\n');
        }
    }
    if let Some(path) = &args.trace_out {
        write_file(path, &traces)?;
    }
    if let Some(path) = &args.hist_out {
        write_file(path, &hist.to_csv())?;
    }
    write_output(args.output.out.as_deref(), &t.render(args.output.format))
}
