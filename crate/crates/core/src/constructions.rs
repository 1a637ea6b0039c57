//! Graph families and the explicit cycle equilibria.

use serde::Serialize;

use crate::classic::{self, GameParams};
use crate::costshare::PaymentMatrix;
use crate::graph::{Graph, InoculationSet};
use crate::{par, Error, Result};

pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "a cycle needs at least 3 nodes, got {n}"
        )));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn path_graph(n: usize) -> Result<Graph> {
    Graph::new(n, (1..n).map(|i| (i - 1, i)))
}

pub fn complete_graph(n: usize) -> Result<Graph> {
    Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

fn positions(n: usize, m: usize) -> Vec<usize> {
    (0..m).map(|r| r * n / m).collect()
}

/// `m` cycle nodes at positions `⌊r·n/m⌋`; the gaps between them differ by at
/// most one.
pub fn evenly_spaced_inoculation(n: usize, m: usize) -> Result<InoculationSet> {
    if m < 1 || m > n {
        return Err(Error::InvalidParameter(format!(
            "cannot place {m} inoculated nodes on a cycle of {n}"
        )));
    }
    InoculationSet::from_members(n, positions(n, m))
}

/// Layout of the explicit cost-sharing equilibrium on a cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleEquilibriumSpec {
    pub n: usize,
    /// Number of inoculated nodes.
    pub m: usize,
    /// Smallest gap between consecutive inoculated nodes; `n = m(s + 1)` when
    /// the spacing is exact.
    pub s: usize,
    pub epsilon: f64,
    /// Inoculated nodes in cycle order.
    pub inoculated: Vec<usize>,
    /// Gap following each inoculated node, aligned with `inoculated`.
    pub component_sizes: Vec<usize>,
    /// Inoculated node each vulnerable node pays toward; `None` for inoculated nodes.
    pub assignment: Vec<Option<usize>>,
    /// What each vulnerable node pays, `C·m/n`.
    pub share: f64,
}

/// Cost-sharing equilibrium on the `n`-cycle with `round((1 − ε)·√(nL/C))`
/// evenly spaced inoculated nodes.
///
/// Every vulnerable node pays `C·m/n` (which is `C/(s + 1)` under exact
/// spacing) toward its nearest inoculated node, ties going clockwise, i.e. to
/// the higher index. Each inoculated node pays the rest of its own `C`, so
/// every funded column sums to `C`.
pub fn theorem3_payment_scheme(
    params: &GameParams,
    n: usize,
    epsilon: f64,
) -> Result<(PaymentMatrix, CycleEquilibriumSpec)> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1), got {epsilon}"
        )));
    }
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "a cycle needs at least 3 nodes, got {n}"
        )));
    }
    let c = params.inoculation_cost();
    let ideal = (n as f64 * params.infection_loss() / c).sqrt();
    let m = ((1.0 - epsilon) * ideal).round() as usize;
    if m < 1 {
        return Err(Error::InvalidParameter(format!(
            "parameters give {m} inoculated nodes"
        )));
    }
    let inoculated = positions(n, m.min(n));
    let gaps: Vec<usize> = (0..inoculated.len())
        .map(|r| {
            let next = inoculated.get(r + 1).copied().unwrap_or(n + inoculated[0]);
            next - inoculated[r] - 1
        })
        .collect();
    let s = gaps.iter().copied().min().unwrap_or(0);
    if s < 1 {
        return Err(Error::InvalidParameter(format!(
            "{m} inoculated nodes leave an empty gap on a cycle of {n}"
        )));
    }

    let share = c * m as f64 / n as f64;
    let mut assignment = vec![None; n];
    let mut contributors = vec![0usize; n];
    for (r, (&p, &gap)) in inoculated.iter().zip(&gaps).enumerate() {
        let next = inoculated[(r + 1) % m];
        for d in 1..=gap {
            let target = if d < gap + 1 - d { p } else { next };
            assignment[(p + d) % n] = Some(target);
            contributors[target] += 1;
        }
    }
    let mut a = PaymentMatrix::zeros(n);
    for (v, target) in assignment.iter().enumerate() {
        if let Some(u) = target {
            a.set(v, *u, share)?;
        }
    }
    for &u in &inoculated {
        let remainder = c - contributors[u] as f64 * share;
        a.set(u, u, remainder.max(0.0))?;
    }
    let spec = CycleEquilibriumSpec {
        n,
        m,
        s,
        epsilon,
        inoculated,
        component_sizes: gaps,
        assignment,
        share,
    };
    Ok((a, spec))
}

/// Cheapest equilibrium of the structured family: `m` evenly spaced nodes for
/// every `m` in `0..=n` (`m = 0` being the empty set), checked with the
/// classic conditions. Evenly spaced placement minimizes `Σ k²` for a given
/// `m` and maximizes the smallest merge of two neighboring gaps, so on
/// cycles this agrees with exhaustive enumeration.
pub fn structured_classic_cycle_equilibrium(
    params: &GameParams,
    n: usize,
) -> Result<(InoculationSet, f64)> {
    let g = cycle_graph(n)?;
    let scored = par::map_range(0..n as u64 + 1, |m| -> Result<Option<f64>> {
        let set = spaced_or_empty(n, m as usize)?;
        let report = classic::check_classic_equilibrium(params, &g, &set)?;
        if report.is_equilibrium() {
            Ok(Some(classic::social_cost(params, &g, &set)?))
        } else {
            Ok(None)
        }
    });
    let mut best: Option<(usize, f64)> = None;
    for (m, cost) in scored.into_iter().enumerate() {
        if let Some(cost) = cost? {
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((m, cost));
            }
        }
    }
    let (m, cost) = best.ok_or(Error::NoEquilibrium(n))?;
    Ok((spaced_or_empty(n, m)?, cost))
}

fn spaced_or_empty(n: usize, m: usize) -> Result<InoculationSet> {
    if m == 0 {
        Ok(InoculationSet::empty(n))
    } else {
        evenly_spaced_inoculation(n, m)
    }
}

/// Best pure classic equilibrium on the `n`-cycle: exhaustive enumeration up
/// to `limit` nodes, the structured family beyond.
pub fn best_classic_cycle_equilibrium(
    params: &GameParams,
    n: usize,
    limit: usize,
) -> Result<(InoculationSet, f64)> {
    if n <= limit {
        let g = cycle_graph(n)?;
        classic::enumerate_classic_equilibria(params, &g, limit)?
            .into_iter()
            .next()
            .ok_or(Error::NoEquilibrium(n))
    } else {
        structured_classic_cycle_equilibrium(params, n)
    }
}

/// Social optimum on the `n`-cycle: the cheapest evenly spaced set over all
/// sizes. For a fixed number of inoculated nodes, equal gaps minimize `Σ k²`,
/// so this is exact.
pub fn cycle_social_optimum(params: &GameParams, n: usize) -> Result<(InoculationSet, f64)> {
    let g = cycle_graph(n)?;
    let costs = par::map_range(0..n as u64 + 1, |m| {
        spaced_or_empty(n, m as usize).and_then(|set| classic::social_cost(params, &g, &set))
    });
    let mut best: Option<(usize, f64)> = None;
    for (m, cost) in costs.into_iter().enumerate() {
        let cost = cost?;
        if best.is_none_or(|(_, b)| cost < b) {
            best = Some((m, cost));
        }
    }
    let (m, cost) = best.expect("m = 0 is always scored");
    Ok((spaced_or_empty(n, m)?, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costshare::{check_costshare_equilibrium, induced_inoculation_set};
    use crate::graph::vulnerable_components;

    fn params(c: f64, l: f64) -> GameParams {
        GameParams::new(c, l).unwrap()
    }

    #[test]
    fn cycles() {
        let g = cycle_graph(3).unwrap();
        assert_eq!(g.edges().len(), 3);
        let g = cycle_graph(16).unwrap();
        assert_eq!(g.edges().len(), 16);
        assert!((0..16).all(|u| g.degree(u) == 2));
        assert!(cycle_graph(2).is_err());
    }

    #[test]
    fn spacing() {
        let g = cycle_graph(16).unwrap();
        let four = evenly_spaced_inoculation(16, 4).unwrap();
        assert_eq!(four.members().collect::<Vec<_>>(), vec![0, 4, 8, 12]);
        assert_eq!(vulnerable_components(&g, &four).sizes(), &[3, 3, 3, 3]);
        let eight = evenly_spaced_inoculation(16, 8).unwrap();
        assert!(vulnerable_components(&g, &eight).sizes().iter().all(|&s| s == 1));
        let all = evenly_spaced_inoculation(16, 16).unwrap();
        assert!(vulnerable_components(&g, &all).sizes().is_empty());
        assert!(evenly_spaced_inoculation(16, 0).is_err());
        assert!(evenly_spaced_inoculation(16, 17).is_err());
    }

    #[test]
    fn spacing_is_near_equal() {
        for n in 3..60 {
            let g = cycle_graph(n).unwrap();
            for m in 1..=n {
                let set = evenly_spaced_inoculation(n, m).unwrap();
                assert_eq!(set.len(), m);
                let comps = vulnerable_components(&g, &set);
                let lo = comps.sizes().iter().min().copied().unwrap_or(0);
                let hi = comps.sizes().iter().max().copied().unwrap_or(0);
                assert!(hi - lo <= 1, "n={n} m={m} sizes={:?}", comps.sizes());
            }
        }
    }

    #[test]
    fn scheme_quarter_shares() {
        let p = params(1.0, 1.0);
        let (a, spec) = theorem3_payment_scheme(&p, 16, 0.0).unwrap();
        assert_eq!((spec.m, spec.s), (4, 3));
        assert_eq!(spec.share, 0.25);
        for &u in &spec.inoculated {
            assert_eq!(a.get(u, u), 0.25);
        }
        assert!(a.column_sums().iter().all(|&s| s == 0.0 || s == 1.0));
        assert_eq!(spec.assignment[2], Some(4));
        assert_eq!(spec.assignment[1], Some(0));
        assert_eq!(
            induced_inoculation_set(&p, &a),
            InoculationSet::from_members(16, [0, 4, 8, 12]).unwrap()
        );
    }

    #[test]
    fn scheme_half_shares() {
        let p = params(1.0, 4.0);
        let (a, spec) = theorem3_payment_scheme(&p, 16, 0.0).unwrap();
        assert_eq!((spec.m, spec.s, spec.share), (8, 1, 0.5));
        let report =
            check_costshare_equilibrium(&p, &cycle_graph(16).unwrap(), &a, 1e-9, 20).unwrap();
        assert!(report.is_equilibrium(), "{report}");
    }

    #[test]
    fn scheme_rejects_degenerate_parameters() {
        assert!(theorem3_payment_scheme(&params(1.0, 1.0), 16, 1.0).is_err());
        assert!(theorem3_payment_scheme(&params(100.0, 1.0), 16, 0.0).is_err());
        // m = 8 on 12 nodes leaves adjacent inoculated nodes.
        assert!(theorem3_payment_scheme(&params(1.0, 6.0), 12, 0.0).is_err());
    }

    #[test]
    fn classic_baselines() {
        let (set, cost) = best_classic_cycle_equilibrium(&params(1.0, 4.0), 16, 20).unwrap();
        assert_eq!(cost, 10.5);
        assert_eq!(set.len(), 6);
        let (set, cost) = best_classic_cycle_equilibrium(&params(1.0, 1.0), 16, 20).unwrap();
        assert_eq!(cost, 15.0625);
        assert_eq!(set.len(), 1);
        let (_, cost) = structured_classic_cycle_equilibrium(&params(1.0, 4.0), 16).unwrap();
        assert_eq!(cost, 10.5);
    }

    #[test]
    fn classic_baseline_grows_linearly_at_unit_costs() {
        for n in [30usize, 100, 257] {
            let (set, cost) = best_classic_cycle_equilibrium(&params(1.0, 1.0), n, 20).unwrap();
            assert_eq!(set.len(), 1);
            let expected = 1.0 + ((n - 1) * (n - 1)) as f64 / n as f64;
            assert!((cost - expected).abs() < 1e-9, "n={n}: {cost} vs {expected}");
        }
    }

    #[test]
    fn optimum_scan() {
        let (set, cost) = cycle_social_optimum(&params(1.0, 4.0), 16).unwrap();
        assert_eq!((set.len(), cost), (8, 10.0));
        let (set, cost) = cycle_social_optimum(&params(1.0, 1.0), 16).unwrap();
        assert_eq!((set.len(), cost), (4, 6.25));
    }
}
