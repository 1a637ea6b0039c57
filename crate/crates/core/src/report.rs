use std::fmt;

use serde::Serialize;

/// Which check a [`Violation`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A vulnerable node sits in a component larger than the threshold.
    OversizedComponent,
    /// An inoculated node would sit in a component smaller than the threshold
    /// after dropping its inoculation.
    RedundantInoculation,
    /// A node pays more than `C` in total.
    Overspending,
    /// A column sum is neither 0 nor `C`.
    WastedPayment,
    /// A component exceeds `nC/L` under a payment matrix.
    ThresholdExceeded,
    /// A node pays toward an inoculation that does not shield it.
    NonLocalPayment,
    /// Some replacement row strictly lowers a node's cost.
    ImprovingDeviation,
    /// A de-inoculation component below `√(nC/L) − 1`.
    ShortDeinoculation,
    /// `nC/L > t(t̂_j + 2) + 1` for some adjacent component.
    ContributionBound,
    /// A mixed-profile node whose expected component size is on the wrong
    /// side of the threshold for its probability.
    MixedCondition,
}

/// One failed check.
///
/// For deviation checks `current` is the node's cost and `alternative` the
/// cost after the described deviation. For the bound checks they are the
/// observed quantity and the bound it was compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub node: usize,
    pub kind: ViolationKind,
    pub detail: String,
    pub current: f64,
    pub alternative: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node {}: {:?}: {} (current {}, alternative {})",
            self.node, self.kind, self.detail, self.current, self.alternative
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EquilibriumReport {
    pub violations: Vec<Violation>,
    /// Smallest amount by which any node's deviation is worse than its current
    /// strategy, when the check computes it. Positive means strict.
    pub margin: Option<f64>,
}

impl EquilibriumReport {
    pub fn is_equilibrium(&self) -> bool {
        self.violations.is_empty()
    }

    /// Equilibrium with every deviation worse by more than `eps`.
    pub fn is_strict(&self, eps: f64) -> bool {
        self.is_equilibrium() && self.margin.is_some_and(|m| m > eps)
    }

    pub fn violators(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.violations.iter().map(|v| v.node).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

impl fmt::Display for EquilibriumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_equilibrium() {
            write!(f, "equilibrium")?;
            if let Some(m) = self.margin {
                write!(f, " (margin {m})")?;
            }
            return Ok(());
        }
        writeln!(f, "not an equilibrium: {} violation(s)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}
