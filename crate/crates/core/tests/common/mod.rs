//! Brute-force oracles and generators shared by the integration suites.
//!
//! Nothing here calls the component code of the library: infection spread,
//! deviations and best responses are recomputed from the raw edge list.

#![allow(dead_code)]

use inoculation::classic::GameParams;
use inoculation::costshare::{self, PaymentMatrix};
use inoculation::{Graph, InoculationSet};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn params(c: f64, l: f64) -> GameParams {
    GameParams::new(c, l).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// with probability `extra`.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra: f64) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for idx in 1..n {
        let parent = order[rng.random_range(0..idx)];
        edges.push((parent.min(order[idx]), parent.max(order[idx])));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !edges.contains(&(u, v)) && rng.random_bool(extra) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Random graph, possibly disconnected.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_set<R: Rng>(rng: &mut R, n: usize, p: f64) -> InoculationSet {
    InoculationSet::from_mask((0..n).map(|_| rng.random_bool(p)).collect())
}

/// Nodes infected when the attacker starts at `start`, spreading over edges
/// between non-blocked nodes.
pub fn infected_from(g: &Graph, blocked: &[bool], start: usize) -> Vec<bool> {
    let n = g.node_count();
    let mut infected = vec![false; n];
    if blocked[start] {
        return infected;
    }
    infected[start] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v) in g.edges() {
            for (a, b) in [(u, v), (v, u)] {
                if infected[a] && !infected[b] && !blocked[b] {
                    infected[b] = true;
                    changed = true;
                }
            }
        }
    }
    infected
}

/// Number of attacker starts that reach `i`.
pub fn exposure(g: &Graph, blocked: &[bool], i: usize) -> usize {
    (0..g.node_count())
        .filter(|&v| infected_from(g, blocked, v)[i])
        .count()
}

/// Classic cost by simulating every attacker choice.
pub fn simulated_classic_cost(p: &GameParams, g: &Graph, set: &InoculationSet, i: usize) -> f64 {
    if set.contains(i) {
        p.inoculation_cost()
    } else {
        p.infection_loss() * exposure(g, set.as_mask(), i) as f64 / g.node_count() as f64
    }
}

/// Pure equilibrium by trying every single flip.
pub fn flip_oracle(p: &GameParams, g: &Graph, set: &InoculationSet) -> bool {
    (0..g.node_count()).all(|i| {
        let now = simulated_classic_cost(p, g, set, i);
        let flipped = if set.contains(i) {
            set.without(i)
        } else {
            set.with(i)
        };
        simulated_classic_cost(p, g, &flipped, i) >= now - 1e-9
    })
}

/// Cost of node `i` under an explicit matrix, by simulation.
pub fn simulated_share_cost(p: &GameParams, g: &Graph, a: &PaymentMatrix, i: usize) -> f64 {
    let sums = a.column_sums();
    let blocked: Vec<bool> = sums
        .iter()
        .map(|&s| s >= p.inoculation_cost() - 1e-9)
        .collect();
    let paid: f64 = a.row(i).iter().map(|e| e.1).sum();
    let loss = if blocked[i] {
        0.0
    } else {
        p.infection_loss() * exposure(g, &blocked, i) as f64 / g.node_count() as f64
    };
    paid + loss
}

/// Best response of `i` by trying every set of fundees among all nodes, each
/// paid exactly its residual. Exponential in `n`; only for tiny graphs.
pub fn brute_best_response(p: &GameParams, g: &Graph, a: &PaymentMatrix, i: usize) -> f64 {
    let n = g.node_count();
    let c = p.inoculation_cost();
    let mut best = f64::INFINITY;
    for mask in 0u32..1 << n {
        let mut candidate = a.clone();
        let mut row = Vec::new();
        for j in 0..n {
            if mask >> j & 1 == 1 {
                let others: f64 = (0..n).filter(|&k| k != i).map(|k| a.get(k, j)).sum();
                let r = (c - others).max(0.0);
                if r > 0.0 {
                    row.push((j, r));
                }
            }
        }
        candidate.set_row(i, &row).unwrap();
        best = best.min(simulated_share_cost(p, g, &candidate, i));
    }
    best
}

/// Sparse random payments, roughly `density` of the entries nonzero.
pub fn random_payments<R: Rng>(rng: &mut R, n: usize, c: f64, density: f64) -> PaymentMatrix {
    let mut a = PaymentMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(density) {
                a.set(i, j, rng.random_range(0.0..c)).unwrap();
            }
        }
    }
    a
}

/// Round-robin best-response dynamics. Returns the matrix once a full round
/// changes nothing, or `None` after `rounds` rounds.
pub fn best_response_dynamics(
    p: &GameParams,
    g: &Graph,
    mut a: PaymentMatrix,
    rounds: usize,
) -> Option<PaymentMatrix> {
    for _ in 0..rounds {
        let mut changed = false;
        for i in 0..g.node_count() {
            let br = costshare::best_response_share(p, g, &a, i, 20).unwrap();
            if br.cost < br.current_cost - 1e-9 {
                a.set_row(i, &br.row).unwrap();
                changed = true;
            }
        }
        if !changed {
            return Some(a);
        }
    }
    None
}

/// `k_u` for every node by union-find over the raw edge list.
pub fn union_find_sizes(g: &Graph, blocked: &[bool]) -> Vec<usize> {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v) in g.edges() {
        if !blocked[u] && !blocked[v] {
            let (ru, rv) = (root(&mut parent, u), root(&mut parent, v));
            parent[ru] = rv;
        }
    }
    let mut count = vec![0usize; n];
    for u in (0..n).filter(|&u| !blocked[u]) {
        let r = root(&mut parent, u);
        count[r] += 1;
    }
    (0..n)
        .map(|u| {
            if blocked[u] {
                0
            } else {
                count[root(&mut parent, u)]
            }
        })
        .collect()
}

pub fn oracle_classic_cost(p: &GameParams, g: &Graph, set: &InoculationSet, i: usize) -> f64 {
    if set.contains(i) {
        p.inoculation_cost()
    } else {
        let k = union_find_sizes(g, set.as_mask())[i];
        p.infection_loss() * k as f64 / g.node_count() as f64
    }
}

pub fn oracle_social_cost(p: &GameParams, g: &Graph, set: &InoculationSet) -> f64 {
    (0..g.node_count())
        .map(|i| oracle_classic_cost(p, g, set, i))
        .sum()
}

/// Single-flip deviation test using union-find costs.
pub fn fast_flip_oracle(p: &GameParams, g: &Graph, set: &InoculationSet) -> bool {
    (0..g.node_count()).all(|i| {
        let now = oracle_classic_cost(p, g, set, i);
        let flipped = if set.contains(i) {
            set.without(i)
        } else {
            set.with(i)
        };
        oracle_classic_cost(p, g, &flipped, i) >= now - 1e-9
    })
}

/// Exact `S_i` by enumerating the other nodes' outcomes with `i` forced
/// vulnerable.
pub fn oracle_expected_sizes(g: &Graph, probs: &[f64]) -> Vec<f64> {
    let n = g.node_count();
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for outcome in 0u32..1 << n {
                if outcome >> i & 1 == 1 {
                    continue;
                }
                let blocked: Vec<bool> = (0..n).map(|j| outcome >> j & 1 == 1).collect();
                let w: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| if blocked[j] { probs[j] } else { 1.0 - probs[j] })
                    .product();
                if w > 0.0 {
                    acc += w * union_find_sizes(g, &blocked)[i] as f64;
                }
            }
            acc
        })
        .collect()
}
