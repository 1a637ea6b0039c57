//! Scaling study on cycles plus the file formats used by the CLI.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classic::{self, GameParams};
use crate::constructions;
use crate::costshare::{self, PaymentFile, PaymentMatrix};
use crate::graph::{Graph, GraphFile};
use crate::{par, Result, DEFAULT_ENUMERATION_LIMIT, DEFAULT_SEARCH_LIMIT, EPS_EQ};

/// One cycle size of the scaling study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub classic_best_cost: f64,
    pub costshare_cost: f64,
    pub social_optimum: f64,
    /// `classic_best_cost / costshare_cost`.
    pub ratio: f64,
    /// The cost-sharing scheme passed full best-response verification.
    pub verified: bool,
}

impl ExperimentRow {
    /// Social optimum over the cost-sharing equilibrium cost.
    pub fn price_of_stability(&self) -> f64 {
        self.social_optimum / self.costshare_cost
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "n",
    "C",
    "L",
    "classic_best_cost",
    "costshare_cost",
    "social_optimum",
    "ratio",
    "verified",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    /// Verify the scheme by best-response sweep up to this many nodes.
    pub verify_limit: usize,
    /// Exhaustive enumeration of classic equilibria and of the optimum up to
    /// this many nodes.
    pub enumeration_limit: usize,
    pub search_limit: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            verify_limit: 2048,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            search_limit: DEFAULT_SEARCH_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub rows: Vec<ExperimentRow>,
    /// Least-squares slope of `ln(ratio)` against `ln(n)`; needs two sizes.
    pub slope: Option<f64>,
}

/// Builds one row: scheme cost (verified when small enough), best pure
/// classic equilibrium, and the social optimum.
pub fn experiment_row(params: &GameParams, n: usize, config: &ExperimentConfig) -> Result<ExperimentRow> {
    let g = constructions::cycle_graph(n)?;
    let (payments, _) = constructions::theorem3_payment_scheme(params, n, 0.0)?;
    let induced = costshare::induced_inoculation_set(params, &payments);
    let costshare_cost = classic::social_cost(params, &g, &induced)?;
    let verified = n <= config.verify_limit
        && costshare::check_costshare_equilibrium(params, &g, &payments, EPS_EQ, config.search_limit)?
            .is_equilibrium();
    let (_, classic_best_cost) =
        constructions::best_classic_cycle_equilibrium(params, n, config.enumeration_limit)?;
    let social_optimum = if n <= config.enumeration_limit {
        classic::social_optimum_bruteforce(params, &g, config.enumeration_limit)?.1
    } else {
        constructions::cycle_social_optimum(params, n)?.1
    };
    Ok(ExperimentRow {
        n,
        c: params.inoculation_cost(),
        l: params.infection_loss(),
        classic_best_cost,
        costshare_cost,
        social_optimum,
        ratio: classic_best_cost / costshare_cost,
        verified,
    })
}

/// Rows for each size, computed in parallel and returned in input order.
pub fn run_scaling_experiment(
    params: &GameParams,
    sizes: &[usize],
    config: &ExperimentConfig,
) -> Result<ScalingStudy> {
    let rows = par::map_slice(sizes, |&n| experiment_row(params, n, config))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.ratio.ln()))
        .collect();
    Ok(ScalingStudy {
        slope: fit_slope(&points),
        rows,
    })
}

/// Ordinary least-squares slope; `None` with fewer than two distinct `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let count = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// 17 significant digits, enough to round-trip any `f64`.
fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_rows_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for r in rows {
        writer.write_record([
            r.n.to_string(),
            format_float(r.c),
            format_float(r.l),
            format_float(r.classic_best_cost),
            format_float(r.costshare_cost),
            format_float(r.social_optimum),
            format_float(r.ratio),
            r.verified.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_rows_csv<R: Read>(input: R) -> Result<Vec<ExperimentRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let rows = reader.deserialize().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(rows)
}

pub fn write_study_json<W: Write>(study: &ScalingStudy, seed: u64, out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Output<'a> {
        seed: u64,
        slope: Option<f64>,
        rows: &'a [ExperimentRow],
    }
    serde_json::to_writer_pretty(
        out,
        &Output {
            seed,
            slope: study.slope,
            rows: &study.rows,
        },
    )?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let file: GraphFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Graph::try_from(file)
}

pub fn write_graph(g: &Graph, path: &Path) -> Result<()> {
    let mut out = File::create(path)?;
    serde_json::to_writer(&mut out, &GraphFile::from(g))?;
    Ok(())
}

pub fn read_payments(path: &Path) -> Result<PaymentMatrix> {
    let file: PaymentFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    PaymentMatrix::try_from(file)
}

pub fn write_payments(a: &PaymentMatrix, path: &Path) -> Result<()> {
    let mut out = File::create(path)?;
    serde_json::to_writer(&mut out, &PaymentFile::from(a))?;
    Ok(())
}
