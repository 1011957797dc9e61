//! Couplings of class measures and their quality `χ`.
//!
//! A coupling of `(π_i, π_j)` is a probability distribution on
//! `Λ_i × Λ_j` whose row marginals reproduce `π_i` and column marginals
//! reproduce `π_j`. Couplings are required for every ordered class pair
//! `(i, j)` with `Q̂(i,j) > 0`; the quality of the family is
//!
//! ```text
//! χ = min over supported (x,y), x ≠ y, over covered pairs (i,j) of
//!     a_i(x) a_j(y) π(x) Q(x,y) / (π̂(i) Q̂(i,j) κ_ij(x,y))
//! ```
//!
//! `χ` is an extended nonnegative real: an empty candidate set (couplings
//! supported entirely on the diagonal) yields `+∞`, and any supported
//! off-diagonal pair with `Q(x,y) = 0` forces `χ = 0`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chain::ReversibleChain;
use crate::decomposition::{ClassMeasure, DecomposedSystem, FuzzyPartition};
use crate::{Error, Result};

/// Absolute tolerance for total coupling mass.
pub const MASS_TOL: f64 = 1e-12;
/// Absolute tolerance for each marginal entry.
pub const MARGINAL_TOL: f64 = 1e-10;
/// Denominators below this are treated as structural errors, not huge
/// ratios; they can only arise from malformed inputs.
pub const DENOMINATOR_GUARD: f64 = 1e-300;

/// A coupling `κ_ij` between the measures of classes `i` and `j`, stored as
/// sparse `(x, y, mass)` triples over original state indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub support: Vec<(usize, usize, f64)>,
}

impl Coupling {
    /// The coupling of `(π_j, π_i)` obtained by transposing the support.
    pub fn transposed(&self) -> Coupling {
        Coupling {
            i: self.j,
            j: self.i,
            support: self.support.iter().map(|&(x, y, m)| (y, x, m)).collect(),
        }
    }
}

/// One failed coupling condition, with its worst offender.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingViolation {
    /// Total mass differs from 1.
    MassNotNormalized { total: f64 },
    /// A support triple with nonpositive mass.
    NonpositiveMass {
        x: usize,
        y: usize,
        mass: f64,
        count: usize,
    },
    /// `Σ_y κ(x, y)` differs from `π_i(x)`.
    RowMarginal {
        x: usize,
        magnitude: f64,
        count: usize,
    },
    /// `Σ_x κ(x, y)` differs from `π_j(y)`.
    ColumnMarginal {
        y: usize,
        magnitude: f64,
        count: usize,
    },
}

impl core::fmt::Display for CouplingViolation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CouplingViolation::MassNotNormalized { total } => {
                write!(f, "coupling mass must be 1, got {total}")
            }
            CouplingViolation::NonpositiveMass { x, y, mass, count } => write!(
                f,
                "support masses must be positive: kappa({x},{y}) = {mass} ({count} offending triples)"
            ),
            CouplingViolation::RowMarginal { x, magnitude, count } => write!(
                f,
                "row marginal differs from pi_i at state {x} by {magnitude} ({count} offending states)"
            ),
            CouplingViolation::ColumnMarginal { y, magnitude, count } => write!(
                f,
                "column marginal differs from pi_j at state {y} by {magnitude} ({count} offending states)"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CouplingReport {
    pub violations: Vec<CouplingViolation>,
}

impl CouplingReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check mass normalization and both marginal conditions. Support indices
/// outside `Λ_i × Λ_j`, or duplicate `(x, y)` pairs, are structural errors.
pub fn validate_coupling(
    coupling: &Coupling,
    pi_i: &ClassMeasure,
    pi_j: &ClassMeasure,
) -> Result<CouplingReport> {
    validate_coupling_with(coupling, pi_i, pi_j, MASS_TOL, MARGINAL_TOL)
}

/// [`validate_coupling`] with explicit mass and marginal tolerances.
pub fn validate_coupling_with(
    coupling: &Coupling,
    pi_i: &ClassMeasure,
    pi_j: &ClassMeasure,
    mass_tol: f64,
    marginal_tol: f64,
) -> Result<CouplingReport> {
    let mut row_sums = alloc::vec![0.0f64; pi_i.support.len()];
    let mut col_sums = alloc::vec![0.0f64; pi_j.support.len()];
    let mut seen = alloc::collections::BTreeSet::new();

    let mut report = CouplingReport::default();
    let mut total = 0.0;
    let mut worst_mass: Option<(usize, usize, f64)> = None;
    let mut mass_count = 0;

    for &(x, y, mass) in &coupling.support {
        let a = pi_i.position_of(x).ok_or_else(|| {
            Error::Invalid(format!(
                "support state {x} is not in the support of class {}",
                coupling.i
            ))
        })?;
        let b = pi_j.position_of(y).ok_or_else(|| {
            Error::Invalid(format!(
                "support state {y} is not in the support of class {}",
                coupling.j
            ))
        })?;
        if !seen.insert((x, y)) {
            return Err(Error::Invalid(format!(
                "duplicate support pair ({x},{y}) in coupling"
            )));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            mass_count += 1;
            if worst_mass.is_none_or(|(_, _, w)| mass < w) {
                worst_mass = Some((x, y, mass));
            }
        }
        total += mass;
        row_sums[a] += mass;
        col_sums[b] += mass;
    }

    if let Some((x, y, mass)) = worst_mass {
        report.violations.push(CouplingViolation::NonpositiveMass {
            x,
            y,
            mass,
            count: mass_count,
        });
    }
    if (total - 1.0).abs() > mass_tol {
        report
            .violations
            .push(CouplingViolation::MassNotNormalized { total });
    }

    let mut worst_row: Option<(usize, f64)> = None;
    let mut row_count = 0;
    for (a, (&x, w)) in pi_i.support.iter().zip(&pi_i.weights).enumerate() {
        let gap = (row_sums[a] - w).abs();
        if gap > marginal_tol {
            row_count += 1;
            if worst_row.is_none_or(|(_, g)| gap > g) {
                worst_row = Some((x, gap));
            }
        }
    }
    if let Some((x, magnitude)) = worst_row {
        report.violations.push(CouplingViolation::RowMarginal {
            x,
            magnitude,
            count: row_count,
        });
    }

    let mut worst_col: Option<(usize, f64)> = None;
    let mut col_count = 0;
    for (b, (&y, w)) in pi_j.support.iter().zip(&pi_j.weights).enumerate() {
        let gap = (col_sums[b] - w).abs();
        if gap > marginal_tol {
            col_count += 1;
            if worst_col.is_none_or(|(_, g)| gap > g) {
                worst_col = Some((y, gap));
            }
        }
    }
    if let Some((y, magnitude)) = worst_col {
        report.violations.push(CouplingViolation::ColumnMarginal {
            y,
            magnitude,
            count: col_count,
        });
    }

    Ok(report)
}

/// The product coupling `κ(x,y) = π_i(x) π_j(y)`: always valid, usually far
/// from optimal.
pub fn product_coupling(pi_i: &ClassMeasure, pi_j: &ClassMeasure) -> Coupling {
    let mut support = Vec::with_capacity(pi_i.support.len() * pi_j.support.len());
    for (&x, wx) in pi_i.support.iter().zip(&pi_i.weights) {
        for (&y, wy) in pi_j.support.iter().zip(&pi_j.weights) {
            support.push((x, y, wx * wy));
        }
    }
    Coupling {
        i: pi_i.class,
        j: pi_j.class,
        support,
    }
}

/// A family of couplings, one per ordered class pair that requires one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CouplingSet {
    pub couplings: Vec<Coupling>,
}

impl CouplingSet {
    pub fn new(couplings: Vec<Coupling>) -> Self {
        CouplingSet { couplings }
    }

    pub fn find(&self, i: usize, j: usize) -> Option<&Coupling> {
        self.couplings.iter().find(|c| c.i == i && c.j == j)
    }

    /// Product couplings for every ordered pair `(i, j)` with `Q̂(i,j) > 0`.
    pub fn products_for(system: &DecomposedSystem) -> CouplingSet {
        let k = system.pi_hat.len();
        let q_hat = system.projection.generator();
        let mut couplings = Vec::new();
        for i in 0..k {
            for j in 0..k {
                if i != j && q_hat[(i, j)] > 0.0 {
                    couplings.push(product_coupling(
                        &system.class_measures[i],
                        &system.class_measures[j],
                    ));
                }
            }
        }
        CouplingSet { couplings }
    }

    /// Fill any missing ordered pair `(j, i)` whose mirror `(i, j)` is
    /// present by transposition.
    pub fn complete_by_transposition(&mut self) {
        let existing: Vec<(usize, usize)> = self.couplings.iter().map(|c| (c.i, c.j)).collect();
        let mut added = Vec::new();
        for c in &self.couplings {
            if !existing.contains(&(c.j, c.i))
                && !added.iter().any(|a: &Coupling| (a.i, a.j) == (c.j, c.i))
            {
                added.push(c.transposed());
            }
        }
        self.couplings.extend(added);
    }

    /// Validate every coupling needed by the system: each ordered pair with
    /// `Q̂(i,j) > 0` must be covered and satisfy the marginal conditions.
    pub fn validate_against(
        &self,
        system: &DecomposedSystem,
    ) -> Result<Vec<(usize, usize, CouplingReport)>> {
        let k = system.pi_hat.len();
        let q_hat = system.projection.generator();
        let mut reports = Vec::new();
        for i in 0..k {
            for j in 0..k {
                if i == j || !(q_hat[(i, j)] > 0.0) {
                    continue;
                }
                let coupling = self.find(i, j).ok_or_else(|| {
                    Error::Invalid(format!(
                        "missing coupling for class pair ({i},{j}) with positive projection rate"
                    ))
                })?;
                let report = validate_coupling(
                    coupling,
                    &system.class_measures[i],
                    &system.class_measures[j],
                )?;
                reports.push((i, j, report));
            }
        }
        Ok(reports)
    }
}

/// The quality `χ` together with its minimizing tuple and any warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiReport {
    /// May be `+∞` (no off-diagonal coupled mass).
    pub chi: f64,
    /// `(i, j, x, y)` achieving the minimum, if any candidate existed.
    pub minimizer: Option<(usize, usize, usize, usize)>,
    /// Number of off-diagonal candidates inspected.
    pub candidates: usize,
    pub warnings: Vec<String>,
}

/// Compute the coupling quality `χ` for a decomposed system.
///
/// Every ordered pair `(i,j)` with `Q̂(i,j) > 0` must be covered by
/// `couplings`, otherwise this is an error. Candidates are the supported
/// pairs with `x ≠ y`; diagonal mass imposes no constraint.
pub fn quality_chi(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    system: &DecomposedSystem,
    couplings: &CouplingSet,
) -> Result<ChiReport> {
    let k = partition.n_classes();
    let pi = chain.pi();
    let q = chain.generator();
    let q_hat = system.projection.generator();

    let mut chi = f64::INFINITY;
    let mut minimizer = None;
    let mut candidates = 0usize;
    let mut warnings = Vec::new();
    let mut off_edge_warned = false;

    for i in 0..k {
        for j in 0..k {
            if i == j || !(q_hat[(i, j)] > 0.0) {
                continue;
            }
            let coupling = couplings.find(i, j).ok_or_else(|| {
                Error::Invalid(format!(
                    "missing coupling for class pair ({i},{j}) with positive projection rate"
                ))
            })?;
            let scale = system.pi_hat[i] * q_hat[(i, j)];
            for &(x, y, mass) in &coupling.support {
                if mass <= 0.0 || x == y {
                    continue;
                }
                candidates += 1;
                let denominator = scale * mass;
                if denominator < DENOMINATOR_GUARD {
                    return Err(Error::Invalid(format!(
                        "underflowing denominator for pair ({i},{j}) at ({x},{y}): {denominator}"
                    )));
                }
                let numerator = partition.weight(x, i) * partition.weight(y, j) * pi[x] * q[(x, y)];
                let ratio = numerator / denominator;
                if ratio == 0.0 && !off_edge_warned {
                    warnings.push(format!(
                        "coupling for pair ({i},{j}) puts mass on ({x},{y}) with Q(x,y) = 0: chi = 0"
                    ));
                    off_edge_warned = true;
                }
                if ratio < chi {
                    chi = ratio;
                    minimizer = Some((i, j, x, y));
                }
            }
        }
    }

    if candidates == 0 {
        warnings.push("all coupled mass sits on the diagonal: chi = +inf (no constraint)".into());
    }

    Ok(ChiReport {
        chi,
        minimizer,
        candidates,
        warnings,
    })
}

/// Extended-real product used by the lower-bound terms: `0` absorbs `∞`
/// (a zero factor makes the bound term vacuous regardless of the other).
pub fn extended_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else if a.is_infinite() || b.is_infinite() {
        f64::INFINITY
    } else {
        a * b
    }
}
