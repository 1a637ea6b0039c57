//! Command line front end. Exit codes: 0 success, 1 failed verification,
//! 2 usage or input error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::classic::{self, GameParams};
use crate::costshare;
use crate::experiments::{self, ExperimentConfig};
use crate::graph::{Graph, InoculationSet};
use crate::{Error, Result, DEFAULT_ENUMERATION_LIMIT, DEFAULT_SEARCH_LIMIT, EPS_EQ};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_EQUILIBRIUM: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "inoculation", version, about = "Inoculation games with and without cost sharing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Costs {
    /// Inoculation cost C.
    #[arg(long = "C")]
    c: f64,
    /// Loss L of an infected node.
    #[arg(long = "L")]
    l: f64,
}

impl Costs {
    fn params(&self) -> Result<GameParams> {
        GameParams::new(self.c, self.l)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a pure inoculation set against the classic equilibrium conditions.
    VerifyClassic {
        graph: PathBuf,
        /// Inoculated nodes, comma separated (e.g. "0,4,8,12"; "" for none).
        inoculated: String,
        #[command(flatten)]
        costs: Costs,
    },
    /// Verify a payment matrix by exact best responses of every node.
    VerifyCostshare {
        graph: PathBuf,
        payments: PathBuf,
        #[command(flatten)]
        costs: Costs,
        /// Tolerance on cost comparisons.
        #[arg(long, default_value_t = EPS_EQ)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_SEARCH_LIMIT)]
        search_limit: usize,
    },
    /// Exact best response of one node to a payment matrix.
    BestResponse {
        graph: PathBuf,
        payments: PathBuf,
        #[arg(long)]
        node: usize,
        #[command(flatten)]
        costs: Costs,
        #[arg(long, default_value_t = DEFAULT_SEARCH_LIMIT)]
        search_limit: usize,
    },
    /// List every pure classic equilibrium as CSV, cheapest first.
    Enumerate {
        graph: PathBuf,
        #[command(flatten)]
        costs: Costs,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
    },
    /// Brute-force social optimum.
    Optimum {
        graph: PathBuf,
        #[command(flatten)]
        costs: Costs,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
    },
    /// Classic best equilibrium vs the cost-sharing cycle scheme over cycle sizes.
    CycleExperiment {
        #[command(flatten)]
        costs: Costs,
        /// Cycle sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Recorded with JSON output; the study itself draws no random numbers.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2048)]
        verify_limit: usize,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn parse_members(n: usize, text: &str) -> Result<InoculationSet> {
    let trimmed = text.trim().trim_start_matches('{').trim_end_matches('}');
    let members = trimmed
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("bad node id {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    InoculationSet::from_members(n, members)
}

fn load_graph(path: &std::path::Path, err: &mut dyn Write) -> Result<Graph> {
    let g = experiments::read_graph(path)?;
    if !g.is_connected() {
        let _ = writeln!(err, "warning: {} is not connected", path.display());
    }
    Ok(g)
}

fn verdict(equilibrium: bool) -> i32 {
    if equilibrium {
        EXIT_OK
    } else {
        EXIT_NOT_EQUILIBRIUM
    }
}

fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::VerifyClassic {
            graph,
            inoculated,
            costs,
        } => {
            let params = costs.params()?;
            let g = load_graph(&graph, err)?;
            let set = parse_members(g.node_count(), &inoculated)?;
            let report = classic::check_classic_equilibrium(&params, &g, &set)?;
            writeln!(out, "{report}")?;
            writeln!(out, "social cost {}", classic::social_cost(&params, &g, &set)?)?;
            Ok(verdict(report.is_equilibrium()))
        }
        Command::VerifyCostshare {
            graph,
            payments,
            costs,
            eps,
            search_limit,
        } => {
            let params = costs.params()?;
            let g = load_graph(&graph, err)?;
            let a = experiments::read_payments(&payments)?;
            let report = costshare::check_costshare_equilibrium(&params, &g, &a, eps, search_limit)?;
            writeln!(out, "{report}")?;
            let conditions = costshare::check_theorem1_conditions(&params, &g, &a)?;
            if !conditions.is_equilibrium() {
                writeln!(out, "necessary conditions: {conditions}")?;
            }
            let set = costshare::induced_inoculation_set(&params, &a);
            writeln!(out, "inoculated {set}")?;
            writeln!(out, "social cost {}", classic::social_cost(&params, &g, &set)?)?;
            Ok(verdict(report.is_equilibrium()))
        }
        Command::BestResponse {
            graph,
            payments,
            node,
            costs,
            search_limit,
        } => {
            let params = costs.params()?;
            let g = load_graph(&graph, err)?;
            let a = experiments::read_payments(&payments)?;
            let br = costshare::best_response_share(&params, &g, &a, node, search_limit)?;
            writeln!(out, "node {node}")?;
            writeln!(out, "current cost {}", br.current_cost)?;
            writeln!(out, "best cost {}", br.cost)?;
            let row: Vec<String> = br.row.iter().map(|(j, x)| format!("{j}:{x}")).collect();
            writeln!(out, "best row [{}]", row.join(", "))?;
            Ok(EXIT_OK)
        }
        Command::Enumerate {
            graph,
            costs,
            limit,
        } => {
            let params = costs.params()?;
            let g = load_graph(&graph, err)?;
            let all = classic::enumerate_classic_equilibria(&params, &g, limit)?;
            let mut writer = csv::Writer::from_writer(out);
            writer.write_record(["inoculated", "size", "social_cost"])?;
            for (set, cost) in &all {
                writer.write_record([set.to_string(), set.len().to_string(), cost.to_string()])?;
            }
            writer.flush()?;
            Ok(EXIT_OK)
        }
        Command::Optimum {
            graph,
            costs,
            limit,
        } => {
            let params = costs.params()?;
            let g = load_graph(&graph, err)?;
            let (set, cost) = classic::social_optimum_bruteforce(&params, &g, limit)?;
            writeln!(out, "optimum {set}")?;
            writeln!(out, "social cost {cost}")?;
            Ok(EXIT_OK)
        }
        Command::CycleExperiment {
            costs,
            sizes,
            out: path,
            format,
            seed,
            verify_limit,
        } => {
            let params = costs.params()?;
            let config = ExperimentConfig {
                verify_limit,
                ..ExperimentConfig::default()
            };
            let study = experiments::run_scaling_experiment(&params, &sizes, &config)?;
            let mut sink: Box<dyn Write + '_> = match &path {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(&mut *out),
            };
            match format {
                Format::Csv => experiments::write_rows_csv(&study.rows, &mut sink)?,
                Format::Json => {
                    experiments::write_study_json(&study, seed, &mut sink)?;
                    writeln!(sink)?;
                }
            }
            sink.flush()?;
            drop(sink);
            if let Some(slope) = study.slope {
                writeln!(err, "log-log slope of ratio vs n: {slope:.4}")?;
            }
            Ok(EXIT_OK)
        }
    }
}
