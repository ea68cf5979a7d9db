use clap::Args;
use qnetkit::chain::{ChainParams, Protocol};

use crate::error::CliError;
use crate::table::Cell;

/// Storage cut-off of one grid axis value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cutoff(pub Option<u64>);

fn parse_cutoff(s: &str) -> Result<Cutoff, String> {
    match s.trim() {
        "none" | "inf" => Ok(Cutoff(None)),
        t => t
            .parse()
            .map(|v| Cutoff(Some(v)))
            .map_err(|_| format!("expected a non-negative integer or `none`, got `{t}`")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Nesting levels (2^n segments).
    #[arg(long = "n", value_delimiter = ',', default_value = "1")]
    pub n: Vec<u32>,
    /// Elementary link generation probabilities.
    #[arg(long = "pg", value_delimiter = ',', required = true)]
    pub p_g: Vec<f64>,
    /// Swap success probabilities.
    #[arg(long = "ps", value_delimiter = ',', default_value = "1")]
    pub p_s: Vec<f64>,
    /// Memory coherence times in attempts (`inf` for perfect memories).
    #[arg(long = "tcoh", value_delimiter = ',', default_value = "inf")]
    pub t_coh: Vec<f64>,
    /// Storage cut-offs in attempts (`none` for no cut-off).
    #[arg(long, value_delimiter = ',', default_value = "none", value_parser = parse_cutoff)]
    pub cutoff: Vec<Cutoff>,
    /// Werner parameter of fresh elementary links.
    #[arg(long, default_value_t = 1.0)]
    pub w0: f64,
    /// Distillation rounds per nesting level, e.g. `1,0` (a single value
    /// applies to every level).
    #[arg(long)]
    pub distill: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub params: ChainParams,
    pub protocol: Protocol,
    pub distill: String,
}

impl GridCell {
    /// Leading columns shared by every per-cell table.
    pub const HEADER: [&'static str; 7] = ["n", "p_g", "p_s", "t_coh", "cutoff", "w0", "distill"];

    pub fn cells(&self) -> Vec<Cell> {
        let p = &self.params;
        vec![
            u64::from(p.n).into(),
            p.p_g.into(),
            p.p_s.into(),
            p.t_coh.into(),
            p.tau.map_or(Cell::Empty, Cell::Int),
            p.w0.into(),
            self.distill.clone().into(),
        ]
    }
}

fn rounds_for(spec: Option<&str>, n: u32) -> Result<Vec<u32>, CliError> {
    let Some(spec) = spec else {
        return Ok(vec![0; n as usize]);
    };
    let values = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("--distill expects non-negative integers, got `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; n as usize]),
        len if len == n as usize => Ok(values),
        len => Err(CliError::Input(format!(
            "--distill lists {len} levels but the chain has n = {n}"
        ))),
    }
}

impl GridArgs {
    /// Cartesian product in flag order: n, p_g, p_s, t_coh, cutoff.
    pub fn expand(&self) -> Result<Vec<GridCell>, CliError> {
        let mut out = Vec::new();
        for &n in &self.n {
            let rounds = rounds_for(self.distill.as_deref(), n)?;
            let protocol = if rounds.iter().any(|&r| r > 0) {
                Protocol::with_distillation(n, &rounds)
            } else {
                Protocol::swap_only(n)
            };
            let distill = if self.distill.is_some() {
                rounds.iter().map(u32::to_string).collect::<Vec<_>>().join("-")
            } else {
                String::new()
            };
            for &p_g in &self.p_g {
                for &p_s in &self.p_s {
                    for &t_coh in &self.t_coh {
                        for &Cutoff(tau) in &self.cutoff {
                            let params = ChainParams::new(n, p_g, p_s)
                                .with_t_coh(t_coh)
                                .with_tau(tau)
                                .with_w0(self.w0);
                            params.validate()?;
                            protocol.check(&params)?;
                            out.push(GridCell {
                                params,
                                protocol: protocol.clone(),
                                distill: distill.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
