//! Reversible chains and their basic functionals: Dirichlet forms, variance,
//! entropy, heat kernel, and total-variation mixing diagnostics.
//!
//! A generator `Q` has nonnegative off-diagonal rates and zero row sums;
//! reversibility under `π` means `π(x)Q(x,y) = π(y)Q(y,x)` for all states.
//! All computations are dense double precision.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::{self, Matrix};
use crate::math;
use crate::{Error, Result};

/// A real-valued function on the state space, aligned with the chain's
/// state ordering.
pub type StateFunction = Vec<f64>;

/// Absolute tolerance for `Σ_x π(x) = 1` and generator row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Relative tolerance for the detailed-balance check.
pub const DETAILED_BALANCE_REL_TOL: f64 = 1e-10;

/// Tolerances used by [`ReversibleChain::validate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainTolerances {
    /// Absolute, on `|Σ_x π(x) − 1|`.
    pub pi_sum: f64,
    /// Absolute, on each generator row sum.
    pub row_sum: f64,
    /// Relative, on the detailed-balance gap.
    pub detailed_balance: f64,
}

impl Default for ChainTolerances {
    fn default() -> Self {
        ChainTolerances {
            pi_sum: ROW_SUM_TOL,
            row_sum: ROW_SUM_TOL,
            detailed_balance: DETAILED_BALANCE_REL_TOL,
        }
    }
}

impl ChainTolerances {
    /// One override for every threshold.
    pub fn uniform(tol: f64) -> Self {
        ChainTolerances {
            pi_sum: tol,
            row_sum: tol,
            detailed_balance: tol,
        }
    }
}

/// Selects the convex comparison function `Ψ` of a Dirichlet form, and with
/// it which global-variation functional (variance or entropy) the
/// corresponding inequality controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiKind {
    /// `Ψ(u,v) = (u−v)²`, paired with variance.
    Poincare,
    /// `Ψ(u,v) = (u−v)(log u − log v)`, paired with entropy.
    Mlsi,
    /// `Ψ(u,v) = (√u − √v)²`, paired with entropy.
    Lsi,
}

impl PsiKind {
    pub const ALL: [PsiKind; 3] = [PsiKind::Poincare, PsiKind::Mlsi, PsiKind::Lsi];

    /// Evaluate `Ψ(u, v)`. For `Mlsi`/`Lsi` both arguments must be positive.
    #[inline]
    pub fn apply(self, u: f64, v: f64) -> f64 {
        match self {
            PsiKind::Poincare => (u - v) * (u - v),
            PsiKind::Mlsi => (u - v) * (math::ln(u) - math::ln(v)),
            PsiKind::Lsi => {
                let d = math::sqrt(u) - math::sqrt(v);
                d * d
            }
        }
    }

    /// Whether the Dirichlet form of this kind is only defined for `f > 0`.
    pub fn requires_positive(self) -> bool {
        !matches!(self, PsiKind::Poincare)
    }

    pub fn label(self) -> &'static str {
        match self {
            PsiKind::Poincare => "poincare",
            PsiKind::Mlsi => "mlsi",
            PsiKind::Lsi => "lsi",
        }
    }
}

/// A finite reversible Markov chain: state names, stationary weights `π`,
/// and generator `Q`.
///
/// Construction checks shape only (matching dimensions, unique state names);
/// the numeric invariants are checked by [`ReversibleChain::validate`], which
/// returns a report rather than failing, so diagnostic tooling can inspect
/// broken inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversibleChain {
    states: Vec<String>,
    pi: Vec<f64>,
    q: Matrix,
}

/// One failed chain invariant, reported with its worst offender.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainViolation {
    /// Some `π(x) ≤ 0` (or non-finite).
    PiNotPositive {
        state: usize,
        value: f64,
        count: usize,
    },
    /// `Σ_x π(x)` differs from 1 beyond [`ROW_SUM_TOL`].
    PiNotNormalized { sum: f64 },
    /// A generator row sums to something other than 0 beyond [`ROW_SUM_TOL`].
    RowSumNotZero {
        row: usize,
        magnitude: f64,
        count: usize,
    },
    /// A negative off-diagonal rate.
    NegativeOffDiagonal {
        row: usize,
        col: usize,
        value: f64,
        count: usize,
    },
    /// `|π(x)Q(x,y) − π(y)Q(y,x)|` exceeds the relative tolerance.
    DetailedBalance {
        row: usize,
        col: usize,
        magnitude: f64,
        count: usize,
    },
}

impl core::fmt::Display for ChainViolation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ChainViolation::PiNotPositive { state, value, count } => write!(
                f,
                "pi must be strictly positive: pi[{state}] = {value} ({count} offending entries)"
            ),
            ChainViolation::PiNotNormalized { sum } => {
                write!(f, "pi must sum to 1: sum = {sum}")
            }
            ChainViolation::RowSumNotZero { row, magnitude, count } => write!(
                f,
                "generator rows must sum to 0: row {row} off by {magnitude} ({count} offending rows)"
            ),
            ChainViolation::NegativeOffDiagonal { row, col, value, count } => write!(
                f,
                "off-diagonal rates must be nonnegative: Q[{row},{col}] = {value} ({count} offending entries)"
            ),
            ChainViolation::DetailedBalance { row, col, magnitude, count } => write!(
                f,
                "detailed balance violated at ({row},{col}) by {magnitude} ({count} offending pairs)"
            ),
        }
    }
}

/// Validation outcome: empty iff every invariant holds within tolerance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainReport {
    pub violations: Vec<ChainViolation>,
}

impl ChainReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl ReversibleChain {
    /// Shape-checked constructor; numeric invariants are not enforced here.
    pub fn new(states: Vec<String>, pi: Vec<f64>, q: Matrix) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::Shape("chain needs at least one state".into()));
        }
        if pi.len() != n {
            return Err(Error::Shape(format!(
                "pi has {} entries for {n} states",
                pi.len()
            )));
        }
        if q.rows() != n || q.cols() != n {
            return Err(Error::Shape(format!(
                "Q is {}x{} for {n} states",
                q.rows(),
                q.cols()
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if states[i] == states[j] {
                    return Err(Error::Invalid(format!(
                        "duplicate state name {:?} at positions {i} and {j}",
                        states[i]
                    )));
                }
            }
        }
        Ok(ReversibleChain { states, pi, q })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn generator(&self) -> &Matrix {
        &self.q
    }

    /// Check every chain invariant; an empty report means the chain is a
    /// valid reversible generator within the documented tolerances. Each
    /// failed invariant contributes one entry carrying its worst offender.
    pub fn validate(&self) -> ChainReport {
        self.validate_with(&ChainTolerances::default())
    }

    /// [`ReversibleChain::validate`] with explicit tolerances.
    pub fn validate_with(&self, tol: &ChainTolerances) -> ChainReport {
        let n = self.len();
        let mut report = ChainReport::default();

        let mut worst: Option<(usize, f64)> = None;
        let mut count = 0;
        for (x, &p) in self.pi.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                count += 1;
                if worst.is_none_or(|(_, w)| p < w) {
                    worst = Some((x, p));
                }
            }
        }
        if let Some((state, value)) = worst {
            report.violations.push(ChainViolation::PiNotPositive {
                state,
                value,
                count,
            });
        }

        let sum: f64 = self.pi.iter().sum();
        if (sum - 1.0).abs() > tol.pi_sum {
            report
                .violations
                .push(ChainViolation::PiNotNormalized { sum });
        }

        let mut worst_row: Option<(usize, f64)> = None;
        let mut row_count = 0;
        for x in 0..n {
            let s: f64 = self.q.row(x).iter().sum();
            if s.abs() > tol.row_sum {
                row_count += 1;
                if worst_row.is_none_or(|(_, w)| s.abs() > w) {
                    worst_row = Some((x, s.abs()));
                }
            }
        }
        if let Some((row, magnitude)) = worst_row {
            report.violations.push(ChainViolation::RowSumNotZero {
                row,
                magnitude,
                count: row_count,
            });
        }

        let mut worst_neg: Option<(usize, usize, f64)> = None;
        let mut neg_count = 0;
        for x in 0..n {
            for y in 0..n {
                if x != y && self.q[(x, y)] < 0.0 {
                    neg_count += 1;
                    if worst_neg.is_none_or(|(_, _, w)| self.q[(x, y)] < w) {
                        worst_neg = Some((x, y, self.q[(x, y)]));
                    }
                }
            }
        }
        if let Some((row, col, value)) = worst_neg {
            report.violations.push(ChainViolation::NegativeOffDiagonal {
                row,
                col,
                value,
                count: neg_count,
            });
        }

        let mut worst_db: Option<(usize, usize, f64)> = None;
        let mut db_count = 0;
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let forward = self.pi[x] * self.q[(x, y)];
                let backward = self.pi[y] * self.q[(y, x)];
                let gap = (forward - backward).abs();
                if gap > tol.detailed_balance * forward.abs().max(1.0) {
                    db_count += 1;
                    if worst_db.is_none_or(|(_, _, w)| gap > w) {
                        worst_db = Some((x, y, gap));
                    }
                }
            }
        }
        if let Some((row, col, magnitude)) = worst_db {
            report.violations.push(ChainViolation::DetailedBalance {
                row,
                col,
                magnitude,
                count: db_count,
            });
        }

        report
    }

    /// Simple random walk on an undirected graph given by a symmetric 0/1
    /// adjacency matrix with zero diagonal: `Q(x,y) = 1/d(x)` for `x ∼ y`,
    /// `Q(x,x) = −1`, `π(x) = d(x)/Σ_z d(z)`.
    pub fn random_walk(states: Vec<String>, adjacency: &Matrix) -> Result<Self> {
        let n = states.len();
        if adjacency.rows() != n || adjacency.cols() != n {
            return Err(Error::Shape(format!(
                "adjacency is {}x{} for {n} states",
                adjacency.rows(),
                adjacency.cols()
            )));
        }
        for x in 0..n {
            if adjacency[(x, x)] != 0.0 {
                return Err(Error::Invalid(format!("self-loop at vertex {x}")));
            }
            for y in 0..n {
                let a = adjacency[(x, y)];
                if a != 0.0 && a != 1.0 {
                    return Err(Error::Invalid(format!(
                        "adjacency entries must be 0 or 1, got {a} at ({x},{y})"
                    )));
                }
                if a != adjacency[(y, x)] {
                    return Err(Error::Invalid(format!(
                        "adjacency must be symmetric, differs at ({x},{y})"
                    )));
                }
            }
        }
        let degrees: Vec<f64> = (0..n)
            .map(|x| adjacency.row(x).iter().sum::<f64>())
            .collect();
        if let Some(x) = degrees.iter().position(|&d| d == 0.0) {
            return Err(Error::Invalid(format!(
                "isolated vertex {x}: stationary measure undefined"
            )));
        }
        let total: f64 = degrees.iter().sum();
        let pi: Vec<f64> = degrees.iter().map(|d| d / total).collect();
        let mut q = Matrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                if adjacency[(x, y)] == 1.0 {
                    q[(x, y)] = 1.0 / degrees[x];
                }
            }
            q[(x, x)] = -1.0;
        }
        ReversibleChain::new(states, pi, q)
    }

    /// Random walk constructor from an edge list over named vertices.
    pub fn random_walk_on_edges(states: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = states.len();
        let mut adjacency = Matrix::zeros(n, n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Invalid(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::Invalid(format!("self-loop at vertex {u}")));
            }
            adjacency[(u, v)] = 1.0;
            adjacency[(v, u)] = 1.0;
        }
        ReversibleChain::random_walk(states, &adjacency)
    }

    /// Expectation `E_π[f]`.
    pub fn mean(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        Ok(self.pi.iter().zip(f).map(|(p, v)| p * v).sum())
    }

    /// Dirichlet form `½ Σ_{x≠y} π(x)Q(x,y)Ψ(f(x), f(y))`.
    ///
    /// For `Poincare` this equals `⟨−Qf, f⟩_π`; for `Mlsi` it is
    /// `ℰ(f, log f)` and for `Lsi` it is `ℰ(√f, √f)`, all by reversibility.
    pub fn dirichlet_form(&self, f: &[f64], psi: PsiKind) -> Result<f64> {
        self.check_len(f)?;
        if psi.requires_positive() {
            check_positive(f, psi.label())?;
        }
        let n = self.len();
        let mut total = 0.0;
        for x in 0..n {
            let row = self.q.row(x);
            for y in 0..n {
                if y == x || row[y] == 0.0 {
                    continue;
                }
                total += self.pi[x] * row[y] * psi.apply(f[x], f[y]);
            }
        }
        Ok(0.5 * total)
    }

    /// Heat kernel `p_t = e^{tQ}`; rows sum to 1 within 1e-9. Entries that
    /// round slightly negative (not below −1e-12) are clamped to 0.
    pub fn heat_kernel(&self, t: f64) -> Result<Matrix> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("heat kernel needs t ≥ 0, got {t}")));
        }
        let mut p = linalg::expm(&self.q.scaled(t))?;
        clamp_tiny_negatives(&mut p);
        Ok(p)
    }

    /// Worst-case total variation distance to stationarity,
    /// `max_x ½ Σ_y |p(x,y) − π(y)|`.
    pub fn worst_tv(&self, p: &Matrix) -> f64 {
        let n = self.len();
        (0..n)
            .map(|x| {
                0.5 * p
                    .row(x)
                    .iter()
                    .zip(&self.pi)
                    .map(|(v, pi)| (v - pi).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Scan the grid `t ∈ {0, step, 2·step, …} ∩ [0, t_max]` and record the
    /// worst-case TV distance at each point. The reported bracket is the
    /// first grid point at or below `eps` — an upper bracket of the true
    /// mixing time, never an interpolated root.
    pub fn tv_mixing_scan(&self, eps: f64, t_max: f64, step: f64) -> Result<MixingScan> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
        }
        if !(step > 0.0) {
            return Err(Error::Domain(format!("step must be positive, got {step}")));
        }
        if !(t_max >= 0.0) {
            return Err(Error::Domain(format!(
                "t_max must be nonnegative, got {t_max}"
            )));
        }
        let n_steps = math::floor(t_max / step + 1e-9) as usize;
        let p_step = linalg::expm(&self.q.scaled(step))?;
        let mut p = Matrix::identity(self.len());
        let mut samples = Vec::with_capacity(n_steps + 1);
        let mut bracket = None;
        for k in 0..=n_steps {
            let t = k as f64 * step;
            let tv = self.worst_tv(&p);
            samples.push((t, tv));
            if bracket.is_none() && tv <= eps {
                bracket = Some(t);
            }
            if k < n_steps {
                p = p.matmul(&p_step);
            }
        }
        Ok(MixingScan {
            eps,
            samples,
            bracket,
        })
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Shape(format!(
                "function has {} values for {} states",
                f.len(),
                self.len()
            )));
        }
        Ok(())
    }
}

/// Result of a total-variation mixing scan.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingScan {
    pub eps: f64,
    /// `(t, worst-case TV)` at each grid point.
    pub samples: Vec<(f64, f64)>,
    /// First grid point with TV ≤ eps, if reached within the scan.
    pub bracket: Option<f64>,
}

/// Variance `Var_π(f) = E_π[f²] − (E_π[f])²`, computed in centered form.
pub fn variance(pi: &[f64], f: &[f64]) -> Result<f64> {
    check_same_len(pi, f)?;
    let mean: f64 = pi.iter().zip(f).map(|(p, v)| p * v).sum();
    Ok(pi
        .iter()
        .zip(f)
        .map(|(p, v)| {
            let d = v - mean;
            p * d * d
        })
        .sum())
}

/// Entropy `Ent_π(f) = E_π[f log f] − E_π[f] log E_π[f]`, for `f > 0`.
pub fn entropy(pi: &[f64], f: &[f64]) -> Result<f64> {
    check_same_len(pi, f)?;
    check_positive(f, "entropy")?;
    let mean: f64 = pi.iter().zip(f).map(|(p, v)| p * v).sum();
    let log_mean = math::ln(mean);
    let ent: f64 = pi
        .iter()
        .zip(f)
        .map(|(p, v)| p * v * (math::ln(*v) - log_mean))
        .sum();
    // Exact entropy is nonnegative; tiny negatives are rounding artifacts.
    Ok(ent.max(0.0))
}

pub(crate) fn check_same_len(pi: &[f64], f: &[f64]) -> Result<()> {
    if pi.len() != f.len() {
        return Err(Error::Shape(format!(
            "measure has {} entries, function has {}",
            pi.len(),
            f.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_positive(f: &[f64], what: &str) -> Result<()> {
    if let Some((i, &v)) = f.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::Domain(format!(
            "{what} requires f > 0 everywhere, got f[{i}] = {v}"
        )));
    }
    Ok(())
}

fn clamp_tiny_negatives(p: &mut Matrix) {
    for i in 0..p.rows() {
        for j in 0..p.cols() {
            let v = p[(i, j)];
            if (-1e-12..0.0).contains(&v) {
                p[(i, j)] = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn named(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    fn two_state_symmetric() -> ReversibleChain {
        let q = Matrix::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        ReversibleChain::new(named(2), vec![0.5, 0.5], q).unwrap()
    }

    #[test]
    fn validate_accepts_symmetric_two_state() {
        assert!(two_state_symmetric().validate().is_clean());
    }

    #[test]
    fn validate_flags_detailed_balance() {
        // pi(0)Q(0,1) = 1/2 but pi(1)Q(1,0) = 1: magnitude 1/2.
        let q = Matrix::from_rows(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).unwrap();
        let chain = ReversibleChain::new(named(2), vec![0.5, 0.5], q).unwrap();
        let report = chain.validate();
        assert_eq!(report.violations.len(), 1);
        match &report.violations[0] {
            ChainViolation::DetailedBalance {
                row,
                col,
                magnitude,
                count,
            } => {
                assert_eq!((*row, *col), (0, 1));
                assert!((magnitude - 0.5).abs() < 1e-15);
                assert_eq!(*count, 2); // both orientations of the pair
            }
            other => panic!("unexpected violation {other:?}"),
        }
    }

    #[test]
    fn validate_flags_row_sum() {
        let q = Matrix::from_rows(&[vec![-0.9, 1.0], vec![1.0, -1.0]]).unwrap();
        let chain = ReversibleChain::new(named(2), vec![0.5, 0.5], q).unwrap();
        let report = chain.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, ChainViolation::RowSumNotZero { row: 0, .. })));
    }

    #[test]
    fn validate_flags_nonpositive_pi_and_normalization() {
        let q = Matrix::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let chain = ReversibleChain::new(named(2), vec![0.0, 0.5], q).unwrap();
        let report = chain.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, ChainViolation::PiNotPositive { state: 0, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, ChainViolation::PiNotNormalized { .. })));
    }

    #[test]
    fn new_rejects_dimension_mismatch() {
        let q = Matrix::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert!(matches!(
            ReversibleChain::new(named(3), vec![0.5, 0.5], q),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn random_walk_single_edge() {
        let adj = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let chain = ReversibleChain::random_walk(named(2), &adj).unwrap();
        assert_eq!(chain.pi(), &[0.5, 0.5]);
        assert_eq!(chain.generator()[(0, 0)], -1.0);
        assert_eq!(chain.generator()[(0, 1)], 1.0);
        assert!(chain.validate().is_clean());
    }

    #[test]
    fn random_walk_triangle_is_uniform() {
        let chain =
            ReversibleChain::random_walk_on_edges(named(3), &[(0, 1), (1, 2), (2, 0)]).unwrap();
        for &p in chain.pi() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        for x in 0..3 {
            for y in 0..3 {
                if x != y {
                    assert!((chain.generator()[(x, y)] - 0.5).abs() < 1e-15);
                }
            }
        }
        assert!(chain.validate().is_clean());
    }

    #[test]
    fn random_walk_path_degrees() {
        // a - b - c: degrees (1, 2, 1), D = 4.
        let chain = ReversibleChain::random_walk_on_edges(
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        assert_eq!(chain.pi(), &[0.25, 0.5, 0.25]);
        assert_eq!(chain.generator()[(0, 1)], 1.0);
        assert_eq!(chain.generator()[(1, 0)], 0.5);
        assert_eq!(chain.generator()[(1, 2)], 0.5);
        assert!(chain.validate().is_clean());
    }

    #[test]
    fn random_walk_rejects_isolated_and_asymmetric() {
        let isolated = Matrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(ReversibleChain::random_walk(named(3), &isolated).is_err());
        let asym = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(ReversibleChain::random_walk(named(2), &asym).is_err());
    }

    #[test]
    fn dirichlet_constant_function_vanishes() {
        let chain = two_state_symmetric();
        for psi in PsiKind::ALL {
            assert_eq!(chain.dirichlet_form(&[2.5, 2.5], psi).unwrap(), 0.0);
        }
    }

    #[test]
    fn dirichlet_two_state_poincare() {
        let chain = two_state_symmetric();
        let value = chain
            .dirichlet_form(&[0.0, 1.0], PsiKind::Poincare)
            .unwrap();
        assert!((value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_two_state_mlsi() {
        let chain = two_state_symmetric();
        let e = core::f64::consts::E;
        let value = chain.dirichlet_form(&[1.0, e], PsiKind::Mlsi).unwrap();
        assert!((value - (e - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_rejects_nonpositive_f_for_entropy_kinds() {
        let chain = two_state_symmetric();
        assert!(chain.dirichlet_form(&[0.0, 1.0], PsiKind::Mlsi).is_err());
        assert!(chain.dirichlet_form(&[-1.0, 1.0], PsiKind::Lsi).is_err());
        assert!(chain
            .dirichlet_form(&[-1.0, 1.0], PsiKind::Poincare)
            .is_ok());
    }

    #[test]
    fn variance_known_values() {
        assert_eq!(variance(&[0.5, 0.5], &[3.0, 3.0]).unwrap(), 0.0);
        assert!((variance(&[0.5, 0.5], &[0.0, 1.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!((variance(&[0.25, 0.5, 0.25], &[0.0, 1.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn entropy_known_values() {
        assert!(entropy(&[0.5, 0.5], &[4.0, 4.0]).unwrap().abs() < 1e-15);
        let e = core::f64::consts::E;
        let expected = 0.5 * e - (1.0 + e) / 2.0 * math::ln((1.0 + e) / 2.0);
        assert!((entropy(&[0.5, 0.5], &[1.0, e]).unwrap() - expected).abs() < 1e-15);
        assert_eq!(entropy(&[1.0], &[5.0]).unwrap(), 0.0);
        assert!(entropy(&[0.5, 0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn heat_kernel_identity_at_zero() {
        let chain = two_state_symmetric();
        assert_eq!(chain.heat_kernel(0.0).unwrap(), Matrix::identity(2));
        assert!(chain.heat_kernel(-0.1).is_err());
    }

    #[test]
    fn heat_kernel_two_state_closed_form() {
        let chain = two_state_symmetric();
        let p = chain.heat_kernel(1.0).unwrap();
        let expected = (1.0 + math::exp(-2.0)) / 2.0;
        assert!((p[(0, 0)] - expected).abs() < 1e-14);
        // Large t: every row converges to pi.
        let p = chain.heat_kernel(40.0).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert!((p[(x, y)] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mixing_two_state_brackets_half_log_two() {
        // TV(t) = e^{-2t}/2; TV = 1/4 first holds at t = ln(2)/2 ≈ 0.347,
        // so the 0.1-grid brackets it at 0.4.
        let chain = two_state_symmetric();
        let scan = chain.tv_mixing_scan(0.25, 2.0, 0.1).unwrap();
        let bracket = scan.bracket.expect("threshold is reachable");
        assert!((bracket - 0.4).abs() < 1e-12);
        for &(t, tv) in &scan.samples {
            assert!((tv - 0.5 * math::exp(-2.0 * t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn mixing_trivial_threshold_brackets_at_zero() {
        let chain = two_state_symmetric();
        let scan = chain.tv_mixing_scan(0.999, 1.0, 0.5).unwrap();
        assert_eq!(scan.bracket, Some(0.0));
    }

    #[test]
    fn mixing_disconnected_never_reaches() {
        let q = Matrix::from_rows(&[
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![1.0, -1.0, 0.0, 0.0],
            vec![0.0, 0.0, -1.0, 1.0],
            vec![0.0, 0.0, 1.0, -1.0],
        ])
        .unwrap();
        let chain = ReversibleChain::new(named(4), vec![0.25; 4], q).unwrap();
        let scan = chain.tv_mixing_scan(0.1, 5.0, 0.5).unwrap();
        assert_eq!(scan.bracket, None);
    }

    #[test]
    fn mixing_rejects_bad_parameters() {
        let chain = two_state_symmetric();
        assert!(chain.tv_mixing_scan(0.0, 1.0, 0.1).is_err());
        assert!(chain.tv_mixing_scan(1.0, 1.0, 0.1).is_err());
        assert!(chain.tv_mixing_scan(0.5, 1.0, 0.0).is_err());
    }
}
