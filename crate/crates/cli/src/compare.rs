use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use qnetkit::chain::{ChainParams, Protocol};
use qnetkit::disttrack::{chain_distribution, chain_mean, moment_matched_geometric, TrackConfig};
use qnetkit::formulas;
use rayon::prelude::*;

use crate::error::CliError;
use crate::table::{Cell, Table};
use crate::{write_file, write_output, OutputArgs};

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long = "n", value_delimiter = ',', default_value = "1,2,3,4")]
    pub n: Vec<u32>,
    #[arg(long = "pg", value_delimiter = ',', default_value = "0.1,0.5,0.9")]
    pub p_g: Vec<f64>,
    #[arg(long = "ps", value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    pub p_s: Vec<f64>,
    /// Fixed horizon for the exact engine.
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Also write exact and moment-matched geometric PMFs here.
    #[arg(long)]
    pub pmf_out: Option<PathBuf>,
    /// Largest t written to the PMF file.
    #[arg(long, default_value_t = 1000)]
    pub pmf_tmax: usize,
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Exact mean and the four approximations of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub exact: f64,
    pub captured_mass: f64,
    pub mean_only: f64,
    pub three_over_two: f64,
    pub geometric_level: f64,
    /// Deterministic swaps: every swap is taken to succeed.
    pub det_swap: f64,
}

fn rel_err(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact
}

pub fn compare_cell(params: &ChainParams, config: &TrackConfig) -> Result<Comparison, CliError> {
    let exact = chain_mean(params, &Protocol::swap_only(params.n), config)?;
    Ok(Comparison {
        exact: exact.mean,
        captured_mass: exact.captured_mass,
        mean_only: formulas::mean_only(params)?,
        three_over_two: formulas::three_over_two(params)?,
        geometric_level: formulas::geometric_level_mean(params)?,
        det_swap: formulas::det_swap_mean(params.segments(), params.p_g)?,
    })
}

fn cells(args: &CompareArgs) -> Result<Vec<ChainParams>, CliError> {
    let mut out = Vec::new();
    for &n in &args.n {
        for &p_g in &args.p_g {
            for &p_s in &args.p_s {
                let p = ChainParams::new(n, p_g, p_s);
                p.validate()?;
                out.push(p);
            }
        }
    }
    Ok(out)
}

fn pmf_table(grid: &[ChainParams], config: &TrackConfig, t_max: usize) -> Result<Table, CliError> {
    let parts = grid
        .par_iter()
        .map(|p| {
            let exact = chain_distribution(p, &Protocol::swap_only(p.n), config)?;
            let geo = moment_matched_geometric(&exact)?;
            let rows: Vec<Vec<Cell>> = (1..=t_max.min(exact.t_trunc))
                .map(|t| {
                    vec![
                        u64::from(p.n).into(),
                        p.p_g.into(),
                        p.p_s.into(),
                        (t as u64).into(),
                        exact.pmf_at(t).into(),
                        geo.pmf_at(t).into(),
                    ]
                })
                .collect();
            Ok(rows)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(vec!["n", "p_g", "p_s", "t", "pmf_exact", "pmf_geometric"]);
    parts.into_iter().flatten().for_each(|r| t.push(r));
    Ok(t)
}

pub fn run(args: &CompareArgs) -> Result<(), CliError> {
    let grid = cells(args)?;
    let config = TrackConfig {
        t_trunc: args.trunc,
        ..TrackConfig::default()
    };
    let results = grid
        .par_iter()
        .map(|p| {
            let start = Instant::now();
            compare_cell(p, &config).map(|c| (c, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec![
        "n",
        "p_g",
        "p_s",
        "exact_mean",
        "captured_mass",
        "mean_only",
        "err_mean_only",
        "three_over_two",
        "err_three_over_two",
        "geometric_level",
        "err_geometric_level",
        "det_swap",
        "err_det_swap",
    ];
    if args.timing {
        header.push("wall_ms");
    }
    let mut t = Table::new(header);
    for (p, (c, ms)) in grid.iter().zip(results) {
        let mut row: Vec<Cell> = vec![
            u64::from(p.n).into(),
            p.p_g.into(),
            p.p_s.into(),
            c.exact.into(),
            c.captured_mass.into(),
        ];
        for a in [c.mean_only, c.three_over_two, c.geometric_level, c.det_swap] {
            row.push(a.into());
            row.push(rel_err(a, c.exact).into());
        }
        if args.timing {
            row.push(ms.into());
        }
        t.push(row);
    }
    if let Some(path) = &args.pmf_out {
        write_file(path, &pmf_table(&grid, &config, args.pmf_tmax)?.to_csv())?;
    }
    write_output(args.output.out.as_deref(), &t.render(args.output.format))
}
