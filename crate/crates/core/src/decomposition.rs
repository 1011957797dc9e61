//! Fuzzy partitions and the derived projection and restriction chains.
//!
//! A fuzzy partition assigns each state `x` a membership weight `a_i(x)` in
//! every class `i`, with `Σ_i a_i(x) = 1` and no empty class. The support of
//! class `i` is `Λ_i = {x : a_i(x) > 0}` — strict positivity, taken at face
//! value with no epsilon thresholding. An exact partition is the special
//! case of 0/1 memberships.
//!
//! Derived objects, for a chain `(Q, π)`:
//!
//! - class measure        `π̂(i)   = Σ_x a_i(x) π(x)`
//! - restriction measure  `π_i(x) = a_i(x) π(x) / π̂(i)` on `Λ_i`
//! - projection chain     `Q̂(i,j) = (1/π̂(i)) Σ_{x∈Λ_i} Σ_{y∈Λ_j, y≠x}
//!                          a_i(x) a_j(y) π(x) Q(x,y)` for `i ≠ j`
//! - restriction chain    `Q_i(x,y) = a_i(y) Q(x,y)` for `x ≠ y` in `Λ_i`
//!
//! with diagonals set so rows sum to zero. Both derived generators inherit
//! reversibility from `Q`. Restriction chains are stored on the compacted
//! index set `Λ_i` with an explicit map back to the original states.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::chain::ReversibleChain;
use crate::linalg::{self, Matrix};
use crate::{Error, Result};

/// Absolute tolerance for membership row sums.
pub const MEMBERSHIP_ROW_SUM_TOL: f64 = 1e-12;

/// A fuzzy partition: ordered class identifiers and a membership matrix with
/// one row per state and one column per class.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyPartition {
    class_ids: Vec<String>,
    membership: Matrix,
}

/// One failed fuzzy-partition condition, with its worst offender.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionViolation {
    /// A membership value outside `[0, 1]`.
    OutOfRange {
        state: usize,
        class: usize,
        value: f64,
        count: usize,
    },
    /// A state's memberships do not sum to 1.
    RowSumNotOne {
        state: usize,
        magnitude: f64,
        count: usize,
    },
    /// A class with no strictly positive membership.
    EmptyClass { class: usize },
}

impl core::fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PartitionViolation::OutOfRange { state, class, value, count } => write!(
                f,
                "membership must lie in [0,1]: a[{state},{class}] = {value} ({count} offending entries)"
            ),
            PartitionViolation::RowSumNotOne { state, magnitude, count } => write!(
                f,
                "memberships of each state must sum to 1: state {state} off by {magnitude} ({count} offending states)"
            ),
            PartitionViolation::EmptyClass { class } => {
                write!(f, "class {class} has no state with positive membership")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartitionReport {
    pub violations: Vec<PartitionViolation>,
}

impl PartitionReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl FuzzyPartition {
    /// Shape-checked constructor: class ids must be unique and nonempty, the
    /// membership matrix must have one column per class.
    pub fn new(class_ids: Vec<String>, membership: Matrix) -> Result<Self> {
        if class_ids.is_empty() {
            return Err(Error::Shape("partition needs at least one class".into()));
        }
        if membership.cols() != class_ids.len() {
            return Err(Error::Shape(format!(
                "membership has {} columns for {} classes",
                membership.cols(),
                class_ids.len()
            )));
        }
        if membership.rows() == 0 {
            return Err(Error::Shape(
                "membership needs at least one state row".into(),
            ));
        }
        for i in 0..class_ids.len() {
            for j in (i + 1)..class_ids.len() {
                if class_ids[i] == class_ids[j] {
                    return Err(Error::Invalid(format!(
                        "duplicate class id {:?} at positions {i} and {j}",
                        class_ids[i]
                    )));
                }
            }
        }
        Ok(FuzzyPartition {
            class_ids,
            membership,
        })
    }

    /// Exact partition from one class label per state. Every id in
    /// `class_ids` must be used by some state, and every label must be a
    /// known class id.
    pub fn from_labels(class_ids: Vec<String>, labels: &[String]) -> Result<Self> {
        let k = class_ids.len();
        let mut membership = Matrix::zeros(labels.len(), k);
        let mut used = vec![false; k];
        for (x, label) in labels.iter().enumerate() {
            let i = class_ids.iter().position(|id| id == label).ok_or_else(|| {
                Error::Invalid(format!("state {x} has unknown class label {label:?}"))
            })?;
            membership[(x, i)] = 1.0;
            used[i] = true;
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::Invalid(format!(
                "class {:?} is not used by any state",
                class_ids[i]
            )));
        }
        FuzzyPartition::new(class_ids, membership)
    }

    pub fn n_classes(&self) -> usize {
        self.class_ids.len()
    }

    pub fn n_states(&self) -> usize {
        self.membership.rows()
    }

    pub fn class_ids(&self) -> &[String] {
        &self.class_ids
    }

    pub fn membership(&self) -> &Matrix {
        &self.membership
    }

    /// Membership weight `a_i(x)`.
    #[inline]
    pub fn weight(&self, state: usize, class: usize) -> f64 {
        self.membership[(state, class)]
    }

    /// Support `Λ_i = {x : a_i(x) > 0}`, ascending.
    pub fn support(&self, class: usize) -> Vec<usize> {
        (0..self.n_states())
            .filter(|&x| self.weight(x, class) > 0.0)
            .collect()
    }

    /// Whether all memberships are exactly 0 or 1.
    pub fn is_exact(&self) -> bool {
        (0..self.n_states()).all(|x| {
            (0..self.n_classes()).all(|i| {
                let a = self.weight(x, i);
                a == 0.0 || a == 1.0
            })
        })
    }

    /// Check the two fuzzy-partition conditions (unit row sums, no empty
    /// class) plus the `[0,1]` range of each membership, against a state
    /// count. A mismatched state count is a structural error.
    pub fn validate(&self, n_states: usize) -> Result<PartitionReport> {
        self.validate_with(n_states, MEMBERSHIP_ROW_SUM_TOL)
    }

    /// [`FuzzyPartition::validate`] with an explicit row-sum tolerance.
    pub fn validate_with(&self, n_states: usize, row_sum_tol: f64) -> Result<PartitionReport> {
        if self.n_states() != n_states {
            return Err(Error::Shape(format!(
                "membership has {} rows for {n_states} states",
                self.n_states()
            )));
        }
        let mut report = PartitionReport::default();

        let mut worst_range: Option<(usize, usize, f64)> = None;
        let mut range_count = 0;
        for x in 0..self.n_states() {
            for i in 0..self.n_classes() {
                let a = self.weight(x, i);
                if !(0.0..=1.0).contains(&a) || !a.is_finite() {
                    range_count += 1;
                    let badness = if a.is_finite() {
                        (a - 0.5).abs()
                    } else {
                        f64::INFINITY
                    };
                    if worst_range.is_none_or(|(_, _, w)| badness > (w - 0.5).abs()) {
                        worst_range = Some((x, i, a));
                    }
                }
            }
        }
        if let Some((state, class, value)) = worst_range {
            report.violations.push(PartitionViolation::OutOfRange {
                state,
                class,
                value,
                count: range_count,
            });
        }

        let mut worst_row: Option<(usize, f64)> = None;
        let mut row_count = 0;
        for x in 0..self.n_states() {
            let gap = (self.membership.row(x).iter().sum::<f64>() - 1.0).abs();
            if gap > row_sum_tol {
                row_count += 1;
                if worst_row.is_none_or(|(_, w)| gap > w) {
                    worst_row = Some((x, gap));
                }
            }
        }
        if let Some((state, magnitude)) = worst_row {
            report.violations.push(PartitionViolation::RowSumNotOne {
                state,
                magnitude,
                count: row_count,
            });
        }

        for i in 0..self.n_classes() {
            if self.support(i).is_empty() {
                report
                    .violations
                    .push(PartitionViolation::EmptyClass { class: i });
            }
        }

        Ok(report)
    }
}

/// The measure `π_i` of one class, on its compacted support.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMeasure {
    pub class: usize,
    /// Indices into the original state space, ascending (`Λ_i`).
    pub support: Vec<usize>,
    /// `π_i` aligned with `support`; sums to 1.
    pub weights: Vec<f64>,
}

impl ClassMeasure {
    /// Position of original state `x` within the support, if present.
    pub fn position_of(&self, x: usize) -> Option<usize> {
        self.support.binary_search(&x).ok()
    }
}

/// A restriction chain on the compacted support of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionChain {
    pub class: usize,
    /// Map from compacted indices back to original state indices.
    pub support: Vec<usize>,
    /// The chain `(Q_i, π_i)`; state names are the original names.
    pub chain: ReversibleChain,
}

/// Class measure `π̂(i) = Σ_x a_i(x) π(x)`.
pub fn class_measure(chain: &ReversibleChain, partition: &FuzzyPartition) -> Result<Vec<f64>> {
    check_dims(chain, partition)?;
    let pi = chain.pi();
    Ok((0..partition.n_classes())
        .map(|i| {
            (0..chain.len())
                .map(|x| partition.weight(x, i) * pi[x])
                .sum()
        })
        .collect())
}

/// Restriction measure `π_i(x) = a_i(x) π(x) / π̂(i)` on `Λ_i`.
pub fn restriction_measure(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    class: usize,
) -> Result<ClassMeasure> {
    check_dims(chain, partition)?;
    check_class(partition, class)?;
    let pi = chain.pi();
    let support = partition.support(class);
    let hat: f64 = support
        .iter()
        .map(|&x| partition.weight(x, class) * pi[x])
        .sum();
    if !(hat > 0.0) {
        return Err(Error::Domain(format!(
            "class {class} has zero measure (empty class or nonpositive pi)"
        )));
    }
    let weights = support
        .iter()
        .map(|&x| partition.weight(x, class) * pi[x] / hat)
        .collect();
    Ok(ClassMeasure {
        class,
        support,
        weights,
    })
}

/// Projection chain `(Q̂, π̂)` on the classes.
///
/// The inner sum excludes `y = x`: a state shared between two classes
/// contributes no projection rate from its own diagonal.
pub fn projection_chain(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
) -> Result<ReversibleChain> {
    check_dims(chain, partition)?;
    let k = partition.n_classes();
    let n = chain.len();
    let pi = chain.pi();
    let q = chain.generator();
    let pi_hat = class_measure(chain, partition)?;

    let mut q_hat = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let mut flow = 0.0;
            for x in 0..n {
                let ai = partition.weight(x, i);
                if ai == 0.0 {
                    continue;
                }
                let weight_x = ai * pi[x];
                let row = q.row(x);
                for y in 0..n {
                    if y == x {
                        continue;
                    }
                    let aj = partition.weight(y, j);
                    if aj == 0.0 || row[y] == 0.0 {
                        continue;
                    }
                    flow += weight_x * aj * row[y];
                }
            }
            q_hat[(i, j)] = flow / pi_hat[i];
        }
    }
    for i in 0..k {
        let off: f64 = (0..k).filter(|&j| j != i).map(|j| q_hat[(i, j)]).sum();
        q_hat[(i, i)] = -off;
    }
    ReversibleChain::new(partition.class_ids().to_vec(), pi_hat, q_hat)
}

/// Restriction chain `(Q_i, π_i)` of one class on its compacted support.
pub fn restriction_chain(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    class: usize,
) -> Result<RestrictionChain> {
    let measure = restriction_measure(chain, partition, class)?;
    let support = measure.support.clone();
    let m = support.len();
    let q = chain.generator();
    let mut q_i = Matrix::zeros(m, m);
    for (a, &x) in support.iter().enumerate() {
        for (b, &y) in support.iter().enumerate() {
            if a == b {
                continue;
            }
            q_i[(a, b)] = partition.weight(y, class) * q[(x, y)];
        }
        let off: f64 = (0..m).filter(|&b| b != a).map(|b| q_i[(a, b)]).sum();
        q_i[(a, a)] = -off;
    }
    let names: Vec<String> = support
        .iter()
        .map(|&x| chain.states()[x].to_string())
        .collect();
    let restricted = ReversibleChain::new(names, measure.weights, q_i)?;
    Ok(RestrictionChain {
        class,
        support,
        chain: restricted,
    })
}

/// Projected function `f̂(i) = E_{π_i}[f|Λ_i]`. Preserves the mean:
/// `E_π̂[f̂] = E_π[f]`.
pub fn project_function(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    f: &[f64],
) -> Result<Vec<f64>> {
    check_dims(chain, partition)?;
    if f.len() != chain.len() {
        return Err(Error::Shape(format!(
            "function has {} values for {} states",
            f.len(),
            chain.len()
        )));
    }
    (0..partition.n_classes())
        .map(|i| {
            let measure = restriction_measure(chain, partition, i)?;
            Ok(measure
                .support
                .iter()
                .zip(&measure.weights)
                .map(|(&x, w)| w * f[x])
                .sum())
        })
        .collect()
}

/// The full derived system: `π̂`, per-class `π_i` on `Λ_i`, the projection
/// chain, and all restriction chains, with reducibility warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedSystem {
    pub pi_hat: Vec<f64>,
    pub class_measures: Vec<ClassMeasure>,
    pub projection: ReversibleChain,
    pub restrictions: Vec<RestrictionChain>,
    /// Reducible projection or restriction chains are permitted (their
    /// constants are then zero) but flagged here.
    pub warnings: Vec<String>,
}

/// Build every derived object at once.
pub fn decompose(chain: &ReversibleChain, partition: &FuzzyPartition) -> Result<DecomposedSystem> {
    let report = partition.validate(chain.len())?;
    if !report.is_clean() {
        return Err(Error::Invalid(format!(
            "partition is not valid: {}",
            report.violations[0]
        )));
    }
    let pi_hat = class_measure(chain, partition)?;
    let projection = projection_chain(chain, partition)?;
    let mut class_measures = Vec::with_capacity(partition.n_classes());
    let mut restrictions = Vec::with_capacity(partition.n_classes());
    let mut warnings = Vec::new();
    if partition.n_classes() == 1 {
        warnings.push("single-class partition: the projection chain is trivial".to_string());
    }
    if !linalg::support_irreducible(projection.generator()) {
        warnings.push("projection chain is reducible: its constants are zero".to_string());
    }
    for i in 0..partition.n_classes() {
        class_measures.push(restriction_measure(chain, partition, i)?);
        let restriction = restriction_chain(chain, partition, i)?;
        if !linalg::support_irreducible(restriction.chain.generator()) {
            warnings.push(format!(
                "restriction chain of class {:?} is reducible: its constants are zero",
                partition.class_ids()[i]
            ));
        }
        restrictions.push(restriction);
    }
    Ok(DecomposedSystem {
        pi_hat,
        class_measures,
        projection,
        restrictions,
        warnings,
    })
}

fn check_dims(chain: &ReversibleChain, partition: &FuzzyPartition) -> Result<()> {
    if partition.n_states() != chain.len() {
        return Err(Error::Shape(format!(
            "membership has {} rows for a chain with {} states",
            partition.n_states(),
            chain.len()
        )));
    }
    Ok(())
}

fn check_class(partition: &FuzzyPartition, class: usize) -> Result<()> {
    if class >= partition.n_classes() {
        return Err(Error::Shape(format!(
            "class index {class} out of range for {} classes",
            partition.n_classes()
        )));
    }
    Ok(())
}
