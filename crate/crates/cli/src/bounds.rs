use std::path::PathBuf;

use clap::{ArgGroup, Args, ValueEnum};
use qnetkit::capbounds::{
    bipartite_bounds, multipair_bounds, multipartite_bounds, BoundOptions, BoundReport, TreePacking, Unit,
};
use qnetkit::flows::Objective;
use qnetkit::netmodel::{parse_network, NetworkSpec};

use crate::error::CliError;
use crate::table::Table;
use crate::{write_output, Format, OutputArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    /// Optimized usage frequencies summing to one.
    ChannelUse,
    /// Every channel used once.
    NetworkUse,
    /// Usage frequencies taken from the network file.
    FixedQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Total,
    Worst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PackingArg {
    Kriesell,
    Lau,
    Petingi,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("task").required(true).args(["bipartite", "multipair", "multipartite"])))]
pub struct BoundsArgs {
    /// Network description (JSON).
    pub network: PathBuf,
    /// Two end users.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub bipartite: Option<Vec<String>>,
    /// Concurrent pairs, from `--pairs` or the network's `commodities`.
    #[arg(long)]
    pub multipair: bool,
    /// GHZ-type distribution among `--users` or the network's `users`.
    #[arg(long)]
    pub multipartite: bool,
    /// Pairs as `A:B`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub users: Vec<String>,
    #[arg(long, value_enum, default_value = "total")]
    pub objective: ObjectiveArg,
    #[arg(long, value_enum, default_value = "channel-use")]
    pub unit: UnitArg,
    #[arg(long, value_enum, default_value = "kriesell")]
    pub tree_packing: PackingArg,
    /// Factor applied to multi-pair upper bounds.
    #[arg(long, default_value_t = 1.0)]
    pub slack: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn load(path: &PathBuf) -> Result<NetworkSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let net = parse_network(&text)?;
    net.validate()?;
    Ok(net)
}

fn parse_pairs(specs: &[String]) -> Result<Vec<(String, String)>, CliError> {
    specs
        .iter()
        .map(|s| match s.split_once(':') {
            Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
            _ => Err(CliError::Usage(format!("pair `{s}` is not of the form A:B"))),
        })
        .collect()
}

pub fn compute(args: &BoundsArgs) -> Result<BoundReport, CliError> {
    if !(args.slack >= 1.0) || !args.slack.is_finite() {
        return Err(CliError::Usage(format!("--slack must be a finite factor of at least 1, got {}", args.slack)));
    }
    let net = load(&args.network)?;
    let unit = match args.unit {
        UnitArg::ChannelUse => Unit::PerChannelUse,
        UnitArg::NetworkUse => Unit::PerNetworkUse,
        UnitArg::FixedQ => Unit::FixedQ,
    };
    let options = BoundOptions {
        slack_factor: args.slack,
        tree_packing: match args.tree_packing {
            PackingArg::Kriesell => TreePacking::Kriesell,
            PackingArg::Lau => TreePacking::Lau,
            PackingArg::Petingi => TreePacking::Petingi,
        },
    };
    if let Some(ab) = &args.bipartite {
        return Ok(bipartite_bounds(&net, &ab[0], &ab[1], unit)?);
    }
    if args.multipair {
        let pairs = if args.pairs.is_empty() {
            net.commodities.clone()
        } else {
            parse_pairs(&args.pairs)?
        };
        if pairs.is_empty() {
            return Err(CliError::Usage(
                "--multipair needs --pairs or `commodities` in the network file".into(),
            ));
        }
        let objective = match args.objective {
            ObjectiveArg::Total => Objective::Total,
            ObjectiveArg::Worst => Objective::Worst,
        };
        return Ok(multipair_bounds(&net, &pairs, objective, unit, options)?);
    }
    let users = if args.users.is_empty() {
        net.users.clone().unwrap_or_default()
    } else {
        args.users.clone()
    };
    if users.is_empty() {
        return Err(CliError::Usage(
            "--multipartite needs --users or `users` in the network file".into(),
        ));
    }
    Ok(multipartite_bounds(&net, &users, unit, options)?)
}

pub fn run(args: &BoundsArgs) -> Result<(), CliError> {
    let report = compute(args)?;
    let text = match args.output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut t = Table::new(vec!["task", "unit", "lower", "upper", "upper_with_slack", "slack_note"]);
            let unit = serde_json::to_value(report.unit).expect("units serialize");
            t.push(vec![
                report.task.clone().into(),
                unit.as_str().unwrap_or_default().into(),
                report.lower.into(),
                report.upper.into(),
                report.upper_with_slack.into(),
                report.slack_note.clone().into(),
            ]);
            t.to_csv()
        }
    };
    write_output(args.output.out.as_deref(), &text)
}
