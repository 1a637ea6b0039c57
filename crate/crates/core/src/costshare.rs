//! The cost-sharing game: nodes pay toward the inoculation of any node.
//!
//! Node `j` is inoculated when its column of the payment matrix sums to at
//! least `C` (less [`EPS_PAY`]). Node `i` pays its row sum plus `L·k_i/n`.
//!
//! # Best responses
//!
//! Fix every row but `i`'s and let `r_j = max(0, C − Σ_{i'≠i} a[i'][j])` be
//! the residual `i` would have to cover to get `j` inoculated. Whatever row `i`
//! picks, only the set `F` of nodes it completes matters for the outcome, and
//! the cheapest row completing exactly `F` pays `r_j` to each `j ∈ F` and
//! nothing else: a partial payment that does not complete an inoculation buys
//! nothing, and paying more than the residual changes nothing. So an exact best
//! response is a search over sets `F`. Only nodes of `i`'s component in the
//! graph where everything already fully funded by others is removed can
//! influence `k_i`, and a node whose residual exceeds the largest attainable
//! loss reduction `L·k_max/n` is never worth funding. What remains is small
//! in practice and searched exhaustively.

use serde::{Deserialize, Serialize};

use crate::classic::GameParams;
use crate::graph::{self, ComponentStructure, Graph, InoculationSet};
use crate::report::{EquilibriumReport, Violation, ViolationKind};
use crate::{par, Error, Result, EPS_PAY, EPS_THRESHOLD};

/// Nonnegative contributions `a[i][j]`, paid by `i` toward inoculating `j`.
///
/// Rows are stored sparsely; zero entries are not kept.
#[derive(Debug, Clone, PartialEq)]
pub struct PaymentMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

fn check_amount(i: usize, j: usize, amount: f64) -> Result<()> {
    if !(amount.is_finite() && amount >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "payment a[{i}][{j}] = {amount} must be finite and nonnegative"
        )));
    }
    Ok(())
}

impl PaymentMatrix {
    pub fn zeros(n: usize) -> Self {
        PaymentMatrix {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    /// Builds from `(payer, fundee, amount)` triples; a repeated pair is an error.
    pub fn from_triples(
        n: usize,
        triples: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut a = Self::zeros(n);
        for (i, j, amount) in triples {
            a.check_index(i)?;
            a.check_index(j)?;
            if a.get(i, j) != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "payment a[{i}][{j}] given twice"
                )));
            }
            a.set(i, j, amount)?;
        }
        Ok(a)
    }

    /// Every member of `inoculated` pays `C` for itself; the classic game
    /// embedded in the cost-sharing game.
    pub fn self_funded(params: &GameParams, inoculated: &InoculationSet) -> Self {
        let mut a = Self::zeros(inoculated.node_count());
        for u in inoculated.members() {
            a.rows[u].push((u, params.inoculation_cost()));
        }
        a
    }

    fn check_index(&self, node: usize) -> Result<()> {
        if node >= self.n {
            return Err(Error::NodeOutOfRange { node, n: self.n });
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |e| e.0)
            .map_or(0.0, |idx| row[idx].1)
    }

    pub fn set(&mut self, i: usize, j: usize, amount: f64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        check_amount(i, j, amount)?;
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |e| e.0) {
            Ok(idx) if amount == 0.0 => {
                row.remove(idx);
            }
            Ok(idx) => row[idx].1 = amount,
            Err(_) if amount == 0.0 => {}
            Err(idx) => row.insert(idx, (j, amount)),
        }
        Ok(())
    }

    /// Nonzero entries of row `i`, sorted by fundee.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Replaces row `i` wholesale.
    pub fn set_row(&mut self, i: usize, row: &[(usize, f64)]) -> Result<()> {
        self.check_index(i)?;
        self.rows[i].clear();
        for &(j, amount) in row {
            self.set(i, j, amount)?;
        }
        Ok(())
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|e| e.1).sum()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for row in &self.rows {
            for &(j, amount) in row {
                sums[j] += amount;
            }
        }
        sums
    }

    pub fn total(&self) -> f64 {
        (0..self.n).map(|i| self.row_sum(i)).sum()
    }

    /// All nonzero `(payer, fundee, amount)` entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, a)| (i, j, a)))
    }

    fn check_size(&self, g: &Graph) -> Result<()> {
        if self.n != g.node_count() {
            return Err(Error::SizeMismatch {
                expected: g.node_count(),
                actual: self.n,
            });
        }
        Ok(())
    }
}

/// On-disk payment layout: `{"n": 4, "payments": [[1, 0, 0.5], ...]}`.
/// Omitted entries are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentFile {
    pub n: usize,
    pub payments: Vec<(usize, usize, f64)>,
}

impl TryFrom<PaymentFile> for PaymentMatrix {
    type Error = Error;

    fn try_from(file: PaymentFile) -> Result<Self> {
        PaymentMatrix::from_triples(file.n, file.payments)
    }
}

impl From<&PaymentMatrix> for PaymentFile {
    fn from(a: &PaymentMatrix) -> Self {
        PaymentFile {
            n: a.n,
            payments: a.entries().collect(),
        }
    }
}

fn is_funded(sum: f64, c: f64) -> bool {
    sum >= c - EPS_PAY
}

/// Nodes whose column sums reach `C`.
pub fn induced_inoculation_set(params: &GameParams, a: &PaymentMatrix) -> InoculationSet {
    let c = params.inoculation_cost();
    InoculationSet::from_mask(a.column_sums().into_iter().map(|s| is_funded(s, c)).collect())
}

/// Column sums, induced set and components, computed once per matrix.
struct Outcome {
    column_sums: Vec<f64>,
    inoculated: InoculationSet,
    comps: ComponentStructure,
}

impl Outcome {
    fn new(params: &GameParams, g: &Graph, a: &PaymentMatrix) -> Result<Self> {
        a.check_size(g)?;
        let c = params.inoculation_cost();
        let column_sums = a.column_sums();
        let inoculated =
            InoculationSet::from_mask(column_sums.iter().map(|&s| is_funded(s, c)).collect());
        let comps = graph::vulnerable_components(g, &inoculated);
        Ok(Outcome {
            column_sums,
            inoculated,
            comps,
        })
    }

    fn cost(&self, params: &GameParams, a: &PaymentMatrix, i: usize) -> f64 {
        a.row_sum(i) + params.loss(a.node_count(), self.comps.k(i) as f64)
    }
}

/// `Σ_j a[i][j] + L·k_i/n` under the induced inoculation set.
pub fn individual_cost_share(
    params: &GameParams,
    g: &Graph,
    a: &PaymentMatrix,
    i: usize,
) -> Result<f64> {
    a.check_index(i)?;
    Ok(Outcome::new(params, g, a)?.cost(params, a, i))
}

/// Cost of `i` if it replaced its row by `row` while everyone else stays put.
pub fn deviation_cost(
    params: &GameParams,
    g: &Graph,
    a: &PaymentMatrix,
    i: usize,
    row: &[(usize, f64)],
) -> Result<f64> {
    a.check_size(g)?;
    a.check_index(i)?;
    for &(j, amount) in row {
        a.check_index(j)?;
        check_amount(i, j, amount)?;
    }
    let c = params.inoculation_cost();
    let mut sums = a.column_sums();
    for &(j, amount) in a.row(i) {
        sums[j] -= amount;
    }
    for &(j, amount) in row {
        sums[j] += amount;
    }
    let blocked: Vec<bool> = sums.iter().map(|&s| is_funded(s, c)).collect();
    let k = component_size_from(g, &blocked, i);
    let paid: f64 = row.iter().map(|e| e.1).sum();
    Ok(paid + params.loss(g.node_count(), k as f64))
}

fn component_size_from(g: &Graph, blocked: &[bool], start: usize) -> usize {
    if blocked[start] {
        return 0;
    }
    let mut seen = vec![false; g.node_count()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut size = 0;
    while let Some(u) = stack.pop() {
        size += 1;
        for &v in g.neighbors(u) {
            if !blocked[v] && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    size
}

/// Checks the four necessary equilibrium conditions and reports witnesses:
///
/// 1. no node pays more than `C` in total;
/// 2. every column sums to 0 or `C`;
/// 3. no component exceeds `nC/L`;
/// 4. locality: nobody pays for an inoculated node whose removal would not
///    enlarge the payer's own component (so inoculated nodes fund only
///    themselves).
pub fn check_theorem1_conditions(
    params: &GameParams,
    g: &Graph,
    a: &PaymentMatrix,
) -> Result<EquilibriumReport> {
    let outcome = Outcome::new(params, g, a)?;
    let n = g.node_count();
    let c = params.inoculation_cost();
    let t = params.threshold(n);
    let mut report = EquilibriumReport::default();
    let reduced_row = |i: usize, j: usize, amount: f64| -> Result<Vec<(usize, f64)>> {
        Ok(a.row(i)
            .iter()
            .map(|&(jj, aa)| if jj == j { (jj, amount) } else { (jj, aa) })
            .collect())
    };

    for i in 0..n {
        let current = outcome.cost(params, a, i);
        let spent = a.row_sum(i);
        if spent > c + EPS_PAY {
            report.violations.push(Violation {
                node: i,
                kind: ViolationKind::Overspending,
                detail: format!("pays {spent} in total, more than C = {c}"),
                current,
                alternative: c,
            });
        }
        let k = outcome.comps.k(i);
        if k as f64 > t + EPS_THRESHOLD {
            report.violations.push(Violation {
                node: i,
                kind: ViolationKind::ThresholdExceeded,
                detail: format!("component of size {k} > nC/L = {t}"),
                current,
                alternative: c,
            });
        }
    }

    for (j, &sum) in outcome.column_sums.iter().enumerate() {
        let zero = sum.abs() <= EPS_PAY;
        let exact = (sum - c).abs() <= EPS_PAY;
        if zero || exact {
            continue;
        }
        for i in 0..n {
            let paid = a.get(i, j);
            if paid <= 0.0 {
                continue;
            }
            let keep = if sum > c { (paid - (sum - c)).max(0.0) } else { 0.0 };
            let alternative = deviation_cost(params, g, a, i, &reduced_row(i, j, keep)?)?;
            report.violations.push(Violation {
                node: i,
                kind: ViolationKind::WastedPayment,
                detail: format!("pays {paid} toward node {j} whose column sums to {sum}"),
                current: outcome.cost(params, a, i),
                alternative,
            });
        }
    }

    for i in 0..n {
        let own = outcome.comps.component_of(i);
        for &(j, paid) in a.row(i) {
            if j == i || paid <= EPS_PAY || !outcome.inoculated.contains(j) {
                continue;
            }
            let shields = own.is_some_and(|comp| {
                g.neighbors(j)
                    .iter()
                    .any(|&v| outcome.comps.component_of(v) == Some(comp))
            });
            if !shields {
                let alternative = deviation_cost(params, g, a, i, &reduced_row(i, j, 0.0)?)?;
                report.violations.push(Violation {
                    node: i,
                    kind: ViolationKind::NonLocalPayment,
                    detail: format!(
                        "pays {paid} toward node {j}, whose removal would not enlarge its component"
                    ),
                    current: outcome.cost(params, a, i),
                    alternative,
                });
            }
        }
    }
    Ok(report)
}

/// An exact best response of one node, with the competing options' spread.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub node: usize,
    /// Cheapest replacement row, sparse and sorted by fundee.
    pub row: Vec<(usize, f64)>,
    pub cost: f64,
    pub current_cost: f64,
    /// Number of fundees searched over (excluding the node itself).
    pub candidates: usize,
    /// Lower bound on how much more any outcome-changing deviation costs than
    /// the current row. Deviations that leave the inoculated set unchanged only
    /// add or remove wasted payments and are not counted.
    pub margin: f64,
}

impl BestResponse {
    pub fn improvement(&self) -> f64 {
        self.current_cost - self.cost
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Choice {
    Subset(u64),
    SelfFund,
}

/// Exact best response of node `i` to the other rows of `a`.
///
/// Fails when more than `limit` candidate fundees survive pruning.
pub fn best_response_share(
    params: &GameParams,
    g: &Graph,
    a: &PaymentMatrix,
    i: usize,
    limit: usize,
) -> Result<BestResponse> {
    a.check_index(i)?;
    let outcome = Outcome::new(params, g, a)?;
    best_response_with(params, g, a, &outcome, i, limit)
}

fn best_response_with(
    params: &GameParams,
    g: &Graph,
    a: &PaymentMatrix,
    outcome: &Outcome,
    i: usize,
    limit: usize,
) -> Result<BestResponse> {
    let n = g.node_count();
    let c = params.inoculation_cost();
    let current_cost = outcome.cost(params, a, i);
    let own = a.row(i);
    let own_payment = |j: usize| {
        own.binary_search_by_key(&j, |e| e.0)
            .map_or(0.0, |idx| own[idx].1)
    };
    let residual = |j: usize| {
        let base = outcome.column_sums[j] - own_payment(j);
        if is_funded(base, c) {
            0.0
        } else {
            c - base
        }
    };
    // Nodes that are inoculated only thanks to i's current payments.
    let currently_funded = |j: usize| residual(j) > 0.0 && outcome.inoculated.contains(j);

    if residual(i) == 0.0 {
        return Ok(BestResponse {
            node: i,
            row: Vec::new(),
            cost: 0.0,
            current_cost,
            candidates: 0,
            margin: own.iter().map(|e| e.1).sum::<f64>() - current_cost,
        });
    }

    // Component of i once everything funded by others is removed.
    let mut local_of = vec![usize::MAX; n];
    let mut region = vec![i];
    local_of[i] = 0;
    let mut head = 0;
    while head < region.len() {
        let u = region[head];
        head += 1;
        for &v in g.neighbors(u) {
            if local_of[v] == usize::MAX && residual(v) > 0.0 {
                local_of[v] = region.len();
                region.push(v);
            }
        }
    }
    let k_max = region.len();
    let gain_cap = params.loss(n, k_max as f64);
    let mut candidates = Vec::new();
    let mut margin_bound = f64::INFINITY;
    for &j in &region[1..] {
        let r = residual(j);
        if r <= gain_cap {
            candidates.push(j);
        } else {
            // Funding j costs more than the whole loss at stake.
            margin_bound = margin_bound.min(r - current_cost);
        }
    }
    if candidates.len() > limit {
        return Err(Error::TooLarge {
            what: "best-response candidate set",
            size: candidates.len(),
            limit,
        });
    }
    let residuals: Vec<f64> = candidates.iter().map(|&j| residual(j)).collect();
    let mut candidate_bit = vec![None; n];
    for (b, &j) in candidates.iter().enumerate() {
        candidate_bit[j] = Some(b);
    }

    let local_adj: Vec<Vec<usize>> = region
        .iter()
        .map(|&u| {
            g.neighbors(u)
                .iter()
                .filter(|&&v| local_of[v] != usize::MAX)
                .map(|&v| local_of[v])
                .collect()
        })
        .collect();
    let local_blocker: Vec<Option<usize>> = region.iter().map(|&u| candidate_bit[u]).collect();
    let subset_cost = |mask: u64| -> f64 {
        let paid: f64 = (0..candidates.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| residuals[b])
            .sum();
        let blocked = |x: usize| local_blocker[x].is_some_and(|b| mask >> b & 1 == 1);
        let mut seen = vec![false; region.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut size = 0usize;
        while let Some(x) = stack.pop() {
            size += 1;
            for &y in &local_adj[x] {
                if !seen[y] && !blocked(y) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        paid + params.loss(n, size as f64)
    };
    let costs = par::map_range(0..1u64 << candidates.len(), subset_cost);
    let self_cost = residual(i);

    let current_choice = if currently_funded(i) {
        Some(Choice::SelfFund)
    } else {
        let mut mask = 0u64;
        let mut representable = true;
        for j in (0..n).filter(|&j| currently_funded(j)) {
            match candidate_bit[j] {
                Some(b) => mask |= 1 << b,
                None => representable = false,
            }
        }
        representable.then_some(Choice::Subset(mask))
    };

    let options = costs
        .iter()
        .enumerate()
        .map(|(mask, &cost)| (Choice::Subset(mask as u64), cost))
        .chain(std::iter::once((Choice::SelfFund, self_cost)));
    let mut best = (Choice::Subset(0), f64::INFINITY);
    let mut margin = margin_bound;
    for (choice, cost) in options {
        if cost < best.1 {
            best = (choice, cost);
        }
        if Some(choice) != current_choice {
            margin = margin.min(cost - current_cost);
        }
    }
    // Funding anything outside the region changes the outcome without
    // touching k_i.
    if let Some(r) = (0..n)
        .filter(|&j| j != i && local_of[j] == usize::MAX)
        .map(residual)
        .filter(|&r| r > 0.0)
        .min_by(f64::total_cmp)
    {
        margin = margin.min(best.1 + r - current_cost);
    }

    let row = match best.0 {
        Choice::SelfFund => vec![(i, self_cost)],
        Choice::Subset(mask) => {
            let mut row: Vec<(usize, f64)> = (0..candidates.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| (candidates[b], residuals[b]))
                .collect();
            row.sort_by_key(|e| e.0);
            row
        }
    };
    Ok(BestResponse {
        node: i,
        row,
        cost: best.1,
        current_cost,
        candidates: candidates.len(),
        margin,
    })
}

/// Full verification: every node's current cost is within `eps` of its exact
/// best response. The report margin is the smallest per-node
/// [`BestResponse::margin`].
pub fn check_costshare_equilibrium(
    params: &GameParams,
    g: &Graph,
    a: &PaymentMatrix,
    eps: f64,
    limit: usize,
) -> Result<EquilibriumReport> {
    let outcome = Outcome::new(params, g, a)?;
    let nodes: Vec<usize> = (0..g.node_count()).collect();
    let responses = par::map_slice(&nodes, |&i| best_response_with(params, g, a, &outcome, i, limit))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut report = EquilibriumReport::default();
    for br in &responses {
        if br.current_cost > br.cost + eps {
            report.violations.push(Violation {
                node: br.node,
                kind: ViolationKind::ImprovingDeviation,
                detail: format!("switching to row {:?} lowers its cost", br.row),
                current: br.current_cost,
                alternative: br.cost,
            });
        }
    }
    report.margin = responses.iter().map(|br| br.margin).min_by(f64::total_cmp);
    Ok(report)
}

/// What de-inoculating one inoculated node would merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeinoculationAnalysis {
    pub node: usize,
    /// `(component id, size t_j)` for each distinct adjacent component.
    pub adjacent: Vec<(usize, usize)>,
    /// `t = Σ t_j`.
    pub total: usize,
    /// `t + 1`.
    pub created_size: usize,
    /// `t̂_j = t − t_j`, aligned with `adjacent`.
    pub complements: Vec<usize>,
}

pub fn analyze_deinoculation(
    params: &GameParams,
    g: &Graph,
    a: &PaymentMatrix,
    u: usize,
) -> Result<DeinoculationAnalysis> {
    a.check_index(u)?;
    let outcome = Outcome::new(params, g, a)?;
    analysis_with(g, &outcome, u)
}

fn analysis_with(g: &Graph, outcome: &Outcome, u: usize) -> Result<DeinoculationAnalysis> {
    if !outcome.inoculated.contains(u) {
        return Err(Error::NotInoculated(u));
    }
    let sizes = outcome.comps.sizes();
    let adjacent: Vec<(usize, usize)> = outcome
        .comps
        .adjacent_components(g, u)
        .into_iter()
        .map(|c| (c, sizes[c]))
        .collect();
    let total = adjacent.iter().map(|e| e.1).sum();
    Ok(DeinoculationAnalysis {
        node: u,
        complements: adjacent.iter().map(|e| total - e.1).collect(),
        adjacent,
        total,
        created_size: total + 1,
    })
}

/// Diagnostic bounds that hold at cost-sharing equilibria: every
/// de-inoculation component has size at least `√(nC/L) − 1`, and every
/// adjacent component satisfies `nC/L ≤ t(t̂_j + 2) + 1`.
pub fn check_theorem2_bound(
    params: &GameParams,
    g: &Graph,
    a: &PaymentMatrix,
) -> Result<EquilibriumReport> {
    let outcome = Outcome::new(params, g, a)?;
    let ratio = params.threshold(g.node_count());
    let min_size = ratio.sqrt() - 1.0;
    let mut report = EquilibriumReport::default();
    for u in outcome.inoculated.members() {
        let analysis = analysis_with(g, &outcome, u)?;
        let created = analysis.created_size as f64;
        if created < min_size - EPS_THRESHOLD {
            report.violations.push(Violation {
                node: u,
                kind: ViolationKind::ShortDeinoculation,
                detail: format!("de-inoculation component {created} < √(nC/L) − 1 = {min_size}"),
                current: created,
                alternative: min_size,
            });
        }
        for (&(comp, size), &complement) in analysis.adjacent.iter().zip(&analysis.complements) {
            let bound = (analysis.total * (complement + 2) + 1) as f64;
            if ratio > bound + EPS_THRESHOLD {
                report.violations.push(Violation {
                    node: u,
                    kind: ViolationKind::ContributionBound,
                    detail: format!(
                        "adjacent component {comp} (size {size}): nC/L = {ratio} > t(t̂+2)+1 = {bound}"
                    ),
                    current: ratio,
                    alternative: bound,
                });
            }
        }
    }
    Ok(report)
}
