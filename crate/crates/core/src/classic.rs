//! The classic inoculation game: each node inoculates itself or not.
//!
//! A vulnerable node `u` pays `L·k_u/n`, the probability that the attacker
//! lands in its component times the loss; an inoculated node pays `C`. A pure
//! profile is an equilibrium when no component exceeds the threshold
//! `t = nC/L` and every inoculated node would rejoin a component of size at
//! least `t`. Ties count as equilibria.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{self, BitGraph, Graph, InoculationSet};
use crate::report::{EquilibriumReport, Violation, ViolationKind};
use crate::{par, Error, Result, EPS_THRESHOLD};

/// Inoculation cost `C` and infection loss `L`, in the same currency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    inoculation_cost: f64,
    infection_loss: f64,
}

impl GameParams {
    pub fn new(inoculation_cost: f64, infection_loss: f64) -> Result<Self> {
        for (name, value) in [("C", inoculation_cost), ("L", infection_loss)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(GameParams {
            inoculation_cost,
            infection_loss,
        })
    }

    /// `C`.
    pub fn inoculation_cost(&self) -> f64 {
        self.inoculation_cost
    }

    /// `L`.
    pub fn infection_loss(&self) -> f64 {
        self.infection_loss
    }

    /// Component size `nC/L` at which a node is indifferent to inoculating.
    pub fn threshold(&self, n: usize) -> f64 {
        n as f64 * self.inoculation_cost / self.infection_loss
    }

    /// Expected loss of a vulnerable node in a component of `size` nodes.
    pub fn loss(&self, n: usize, size: f64) -> f64 {
        self.infection_loss * size / n as f64
    }

    /// `C·|I| + (L/n)·Σ k²`, shared by every pure-profile cost path so that
    /// they agree bit for bit.
    pub(crate) fn pure_social_cost(&self, n: usize, inoculated: usize, sum_sq: usize) -> f64 {
        self.inoculation_cost * inoculated as f64
            + self.infection_loss / n as f64 * sum_sq as f64
    }
}

fn exceeds(size: f64, threshold: f64) -> bool {
    size > threshold + EPS_THRESHOLD
}

fn falls_short(size: f64, threshold: f64) -> bool {
    size < threshold - EPS_THRESHOLD
}

pub fn individual_cost_classic(
    params: &GameParams,
    g: &Graph,
    inoculated: &InoculationSet,
    i: usize,
) -> Result<f64> {
    inoculated.check_size(g)?;
    if i >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            node: i,
            n: g.node_count(),
        });
    }
    if inoculated.contains(i) {
        return Ok(params.inoculation_cost());
    }
    let comps = graph::vulnerable_components(g, inoculated);
    Ok(params.loss(g.node_count(), comps.k(i) as f64))
}

/// Sum of individual costs, `C·|I| + (L/n)·Σ_components k²`.
pub fn social_cost(params: &GameParams, g: &Graph, inoculated: &InoculationSet) -> Result<f64> {
    inoculated.check_size(g)?;
    let comps = graph::vulnerable_components(g, inoculated);
    Ok(params.pure_social_cost(g.node_count(), inoculated.len(), comps.sum_of_squares()))
}

/// Checks both pure equilibrium conditions and reports every node with a
/// profitable flip. The margin is the smallest cost increase any single flip
/// would cause.
pub fn check_classic_equilibrium(
    params: &GameParams,
    g: &Graph,
    inoculated: &InoculationSet,
) -> Result<EquilibriumReport> {
    inoculated.check_size(g)?;
    let n = g.node_count();
    let t = params.threshold(n);
    let c = params.inoculation_cost();
    let comps = graph::vulnerable_components(g, inoculated);
    let mut report = EquilibriumReport::default();
    let mut margin = f64::INFINITY;
    for u in 0..n {
        if inoculated.contains(u) {
            let size = comps.merged_size(g, u);
            let deviation = params.loss(n, size as f64);
            margin = margin.min(deviation - c);
            if falls_short(size as f64, t) {
                report.violations.push(Violation {
                    node: u,
                    kind: ViolationKind::RedundantInoculation,
                    detail: format!("de-inoculating creates a component of size {size} < t = {t}"),
                    current: c,
                    alternative: deviation,
                });
            }
        } else {
            let size = comps.k(u);
            let current = params.loss(n, size as f64);
            margin = margin.min(c - current);
            if exceeds(size as f64, t) {
                report.violations.push(Violation {
                    node: u,
                    kind: ViolationKind::OversizedComponent,
                    detail: format!("component of size {size} > t = {t}; inoculating pays"),
                    current,
                    alternative: c,
                });
            }
        }
    }
    report.margin = (n > 0).then_some(margin);
    Ok(report)
}

fn bit_graph_within(g: &Graph, limit: usize) -> Result<BitGraph> {
    let n = g.node_count();
    let cap = limit.min(63);
    if n > cap {
        return Err(Error::TooLarge {
            what: "graph for exhaustive enumeration",
            size: n,
            limit: cap,
        });
    }
    Ok(BitGraph::new(g).expect("n <= 63"))
}

fn is_classic_equilibrium_bits(params: &GameParams, bits: &BitGraph, inoculated: u64) -> bool {
    let t = params.threshold(bits.node_count());
    let vulnerable = bits.all() & !inoculated;
    let mut ok = true;
    bits.for_each_component(vulnerable, |comp| {
        ok &= !exceeds(f64::from(comp.count_ones()), t);
    });
    if !ok {
        return false;
    }
    let mut rest = inoculated;
    while rest != 0 {
        let j = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let size = bits.component(j, vulnerable | 1 << j).count_ones();
        if falls_short(f64::from(size), t) {
            return false;
        }
    }
    true
}

/// Every pure equilibrium with its social cost, cheapest first (ties by the
/// bitmask of the set). Exhaustive over `2^n` subsets.
pub fn enumerate_classic_equilibria(
    params: &GameParams,
    g: &Graph,
    limit: usize,
) -> Result<Vec<(InoculationSet, f64)>> {
    let bits = bit_graph_within(g, limit)?;
    let n = g.node_count();
    let mut found = par::filter_map_range(0..1u64 << n, |mask| {
        is_classic_equilibrium_bits(params, &bits, mask).then(|| {
            let sum_sq = bits.sum_of_squares(bits.all() & !mask) as usize;
            let cost = params.pure_social_cost(n, mask.count_ones() as usize, sum_sq);
            (mask, cost)
        })
    });
    found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(found
        .into_iter()
        .map(|(mask, cost)| (InoculationSet::from_bits(n, mask), cost))
        .collect())
}

/// The inoculation set of least social cost, by exhaustive search. Ties go to
/// the smallest bitmask.
pub fn social_optimum_bruteforce(
    params: &GameParams,
    g: &Graph,
    limit: usize,
) -> Result<(InoculationSet, f64)> {
    let bits = bit_graph_within(g, limit)?;
    let n = g.node_count();
    let (cost, mask) = par::min_by_range(0..1u64 << n, |mask| {
        let sum_sq = bits.sum_of_squares(bits.all() & !mask) as usize;
        params.pure_social_cost(n, mask.count_ones() as usize, sum_sq)
    })
    .expect("at least the empty set");
    Ok((InoculationSet::from_bits(n, mask), cost))
}

/// Independent per-node inoculation probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    probs: Vec<f64>,
}

impl MixedProfile {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidParameter(format!(
                "probability of node {i} is {p}, outside [0, 1]"
            )));
        }
        Ok(MixedProfile { probs })
    }

    /// The degenerate profile playing `inoculated` with certainty.
    pub fn pure(inoculated: &InoculationSet) -> Self {
        MixedProfile {
            probs: inoculated
                .as_mask()
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    fn check_size(&self, g: &Graph) -> Result<()> {
        if self.probs.len() != g.node_count() {
            return Err(Error::SizeMismatch {
                expected: g.node_count(),
                actual: self.probs.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    /// Sum over every outcome of the other nodes' draws.
    Exact { limit: usize },
    /// Sampled outcomes from a seeded ChaCha8 stream.
    MonteCarlo { samples: u64, seed: u64 },
}

impl Evaluation {
    pub fn exact() -> Self {
        Evaluation::Exact {
            limit: crate::DEFAULT_EXACT_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedCost {
    pub cost: f64,
    /// Zero in exact mode.
    pub std_error: f64,
    /// `S_i`: expected size of `i`'s component given that `i` does not
    /// inoculate.
    pub expected_sizes: Vec<f64>,
}

fn mixed_cost_from_sizes(params: &GameParams, m: &MixedProfile, sizes: &[f64]) -> f64 {
    let n = m.len();
    let inoculation: f64 = m.probs.iter().sum();
    let exposure: f64 = m
        .probs
        .iter()
        .zip(sizes)
        .map(|(a, s)| (1.0 - a) * s)
        .sum();
    params.inoculation_cost() * inoculation + params.infection_loss() / n as f64 * exposure
}

/// Exact `S_i` for every node by summing over all outcomes of the other
/// nodes. Only nodes with fractional probability branch, so degenerate
/// profiles cost a single outcome per node.
pub fn expected_component_sizes_exact(
    g: &Graph,
    m: &MixedProfile,
    limit: usize,
) -> Result<Vec<f64>> {
    m.check_size(g)?;
    let n = g.node_count();
    if n > limit.min(63) {
        return Err(Error::TooLarge {
            what: "graph for exact mixed evaluation",
            size: n,
            limit: limit.min(63),
        });
    }
    let bits = BitGraph::new(g).expect("n <= 63");
    let probs = &m.probs;
    Ok(par::map_range(0..n as u64, |i| {
        let i = i as usize;
        let mut fixed = 0u64;
        let mut fractional = Vec::new();
        for (j, &p) in probs.iter().enumerate() {
            if j == i || p == 0.0 {
                continue;
            }
            if p == 1.0 {
                fixed |= 1 << j;
            } else {
                fractional.push(j);
            }
        }
        let mut weighted = 0.0;
        let mut total = 0.0;
        for outcome in 0..1u64 << fractional.len() {
            let mut inoculated = fixed;
            let mut weight = 1.0;
            for (b, &j) in fractional.iter().enumerate() {
                if outcome >> b & 1 == 1 {
                    inoculated |= 1 << j;
                    weight *= probs[j];
                } else {
                    weight *= 1.0 - probs[j];
                }
            }
            let size = bits.component(i, bits.all() & !inoculated).count_ones();
            weighted += weight * f64::from(size);
            total += weight;
        }
        weighted / total
    }))
}

const MC_CHUNK: u64 = 1024;

#[derive(Debug, Clone)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
    size_sums: Vec<f64>,
}

impl Moments {
    fn merge(mut self, other: Moments) -> Moments {
        let count = self.count + other.count;
        if count == 0.0 {
            return self;
        }
        let delta = other.mean - self.mean;
        self.mean += delta * other.count / count;
        self.m2 += other.m2 + delta * delta * self.count * other.count / count;
        self.count = count;
        for (a, b) in self.size_sums.iter_mut().zip(other.size_sums) {
            *a += b;
        }
        self
    }
}

fn monte_carlo(
    params: &GameParams,
    g: &Graph,
    m: &MixedProfile,
    samples: u64,
    seed: u64,
) -> MixedCost {
    let n = g.node_count();
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts = par::map_range(0..chunks, |chunk| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let draws = MC_CHUNK.min(samples - chunk * MC_CHUNK);
        let mut acc = Moments {
            count: 0.0,
            mean: 0.0,
            m2: 0.0,
            size_sums: vec![0.0; n],
        };
        let mut blocked = vec![false; n];
        let mut sizes = vec![0.0; n];
        for _ in 0..draws {
            for (b, &p) in blocked.iter_mut().zip(&m.probs) {
                *b = rng.random::<f64>() < p;
            }
            let comps = graph::vulnerable_components_masked(g, &blocked);
            for (u, s) in sizes.iter_mut().enumerate() {
                // An inoculated node's hypothetical component is the merge of
                // its neighbors' components; the other draws are unaffected.
                *s = comps.merged_size(g, u) as f64;
            }
            let y = mixed_cost_from_sizes(params, m, &sizes);
            acc.count += 1.0;
            let delta = y - acc.mean;
            acc.mean += delta / acc.count;
            acc.m2 += delta * (y - acc.mean);
            for (a, s) in acc.size_sums.iter_mut().zip(&sizes) {
                *a += s;
            }
        }
        acc
    });
    let total = parts
        .into_iter()
        .reduce(Moments::merge)
        .expect("at least one chunk");
    let variance = if total.count > 1.0 {
        total.m2 / (total.count - 1.0)
    } else {
        0.0
    };
    MixedCost {
        cost: total.mean,
        std_error: (variance / total.count).sqrt(),
        expected_sizes: total.size_sums.iter().map(|s| s / total.count).collect(),
    }
}

/// Expected social cost `Σ_i {a_i·C + (1 − a_i)·(L/n)·S_i}` of a mixed profile.
///
/// The Monte Carlo estimator evaluates that same sum per sampled outcome,
/// reading every node's hypothetical component off one component structure, so
/// its expectation is exactly the target and its standard error is reported.
pub fn expected_social_cost_mixed(
    params: &GameParams,
    g: &Graph,
    m: &MixedProfile,
    evaluation: Evaluation,
) -> Result<MixedCost> {
    m.check_size(g)?;
    match evaluation {
        Evaluation::Exact { limit } => {
            let sizes = expected_component_sizes_exact(g, m, limit)?;
            Ok(MixedCost {
                cost: mixed_cost_from_sizes(params, m, &sizes),
                std_error: 0.0,
                expected_sizes: sizes,
            })
        }
        Evaluation::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidParameter(
                    "Monte Carlo needs at least 2 samples".into(),
                ));
            }
            Ok(monte_carlo(params, g, m, samples, seed))
        }
    }
}

/// Necessary conditions for a mixed equilibrium: `S_i ≥ nC/L` where `a_i = 1`,
/// `S_i ≤ nC/L` where `a_i = 0`, and `S_i = nC/L` for fractional `a_i`. Passing
/// does not certify an equilibrium.
pub fn check_mixed_necessary_conditions(
    params: &GameParams,
    g: &Graph,
    m: &MixedProfile,
    limit: usize,
) -> Result<EquilibriumReport> {
    let sizes = expected_component_sizes_exact(g, m, limit)?;
    let n = g.node_count();
    let t = params.threshold(n);
    let tol = EPS_THRESHOLD * t.max(1.0);
    let c = params.inoculation_cost();
    let mut report = EquilibriumReport::default();
    for (i, (&a, &s)) in m.probs.iter().zip(&sizes).enumerate() {
        let stay = params.loss(n, s);
        let current = a * c + (1.0 - a) * stay;
        let (bad, what) = if a == 1.0 {
            (s < t - tol, "inoculates but S_i < nC/L")
        } else if a == 0.0 {
            (s > t + tol, "stays vulnerable but S_i > nC/L")
        } else {
            ((s - t).abs() > tol, "mixes but S_i != nC/L")
        };
        if bad {
            report.violations.push(Violation {
                node: i,
                kind: ViolationKind::MixedCondition,
                detail: format!("{what} (S_i = {s}, nC/L = {t})"),
                current,
                alternative: c.min(stay),
            });
        }
    }
    Ok(report)
}
