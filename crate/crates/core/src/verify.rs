//! Machine checks of the decomposition identities and the lower bounds.
//!
//! For a chain `(Q, π)`, a fuzzy partition, and couplings with quality `χ`,
//! the following hold (the first two exactly, the third as an inequality):
//!
//! ```text
//! Var_π f = Σ_i π̂(i) Var_{π_i} f + Var_π̂ f̂
//! Ent_π f = Σ_i π̂(i) Ent_{π_i} f + Ent_π̂ f̂
//! ℒ_π f   ≥ Σ_i π̂(i) ℒ_{π_i} f + χ ℒ_π̂ f̂
//! ```
//!
//! and consequently `c(Q) ≥ min{χ·c(Q̂), min_i c(Q_i)}` for each of the
//! three functional-inequality constants. This module evaluates all of them
//! on randomized trials with declared tolerances. The Poincaré verdict uses
//! exact spectral values on both sides and is the real theorem test; the
//! MLSI/LSI verdicts compare one-sided estimates against one-sided estimates
//! and are therefore advisory.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chain::{entropy, variance, ChainReport, PsiKind, ReversibleChain};
use crate::constants::{constant_estimate, MinimizeOptions};
use crate::coupling::{extended_mul, quality_chi, ChiReport, CouplingReport, CouplingSet};
use crate::decomposition::{decompose, DecomposedSystem, FuzzyPartition, PartitionReport};
use crate::sample;
use crate::{Error, Result};

/// Absolute tolerance on the variance/entropy decomposition residuals.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Absolute tolerance on mean preservation `E_π̂[f̂] = E_π[f]`.
pub const MEAN_PRESERVATION_TOL: f64 = 1e-12;
/// The Dirichlet inequality passes when the worst slack is above this.
pub const DIRICHLET_SLACK_TOL: f64 = -1e-9;
/// Absolute tolerance for the exact (Poincaré) bound verdict.
pub const POINCARE_BOUND_TOL: f64 = 1e-10;
/// Relative tolerance for the advisory (MLSI/LSI) bound verdicts.
pub const ESTIMATE_BOUND_REL_TOL: f64 = 1e-3;

/// Outcome of a randomized identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionCheck {
    pub trials: usize,
    /// Worst absolute residual of the identity across trials.
    pub max_residual: f64,
    /// Worst absolute mean-preservation gap across trials.
    pub max_mean_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Outcome of the randomized Dirichlet-form inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletCheck {
    pub psi: PsiKind,
    pub trials: usize,
    /// Worst (most negative) slack across trials.
    pub min_slack: f64,
    pub chi: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn residual_for(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    system: &DecomposedSystem,
    f: &[f64],
    entropic: bool,
) -> Result<(f64, f64)> {
    let f_hat = crate::decomposition::project_function(chain, partition, f)?;
    let mut class_total = 0.0;
    for (i, measure) in system.class_measures.iter().enumerate() {
        let f_i: Vec<f64> = measure.support.iter().map(|&x| f[x]).collect();
        let local = if entropic {
            entropy(&measure.weights, &f_i)?
        } else {
            variance(&measure.weights, &f_i)?
        };
        class_total += system.pi_hat[i] * local;
    }
    let (global, projected) = if entropic {
        (entropy(chain.pi(), f)?, entropy(&system.pi_hat, &f_hat)?)
    } else {
        (variance(chain.pi(), f)?, variance(&system.pi_hat, &f_hat)?)
    };
    let residual = (global - class_total - projected).abs();
    let mean_hat: f64 = system.pi_hat.iter().zip(&f_hat).map(|(p, v)| p * v).sum();
    let mean_gap = (mean_hat - chain.mean(f)?).abs();
    Ok((residual, mean_gap))
}

/// Check `Var_π f = Σ_i π̂(i) Var_{π_i} f + Var_π̂ f̂` over random `f` with
/// standard normal entries; mean preservation is asserted alongside.
pub fn check_variance_decomposition(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    trials: usize,
    seed: u64,
) -> Result<DecompositionCheck> {
    let system = decompose(chain, partition)?;
    let mut max_residual: f64 = 0.0;
    let mut max_mean_gap: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = sample::rng_for(seed, trial as u64);
        let f = sample::normal_function(chain.len(), &mut rng);
        let (residual, mean_gap) = residual_for(chain, partition, &system, &f, false)?;
        max_residual = max_residual.max(residual);
        max_mean_gap = max_mean_gap.max(mean_gap);
    }
    Ok(DecompositionCheck {
        trials,
        max_residual,
        max_mean_gap,
        tolerance: IDENTITY_TOL,
        pass: max_residual <= IDENTITY_TOL && max_mean_gap <= MEAN_PRESERVATION_TOL,
    })
}

/// Check `Ent_π f = Σ_i π̂(i) Ent_{π_i} f + Ent_π̂ f̂` over random positive
/// `f`, log-uniform in `[e^{-3}, e^{3}]`.
pub fn check_entropy_decomposition(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    trials: usize,
    seed: u64,
) -> Result<DecompositionCheck> {
    let system = decompose(chain, partition)?;
    let mut max_residual: f64 = 0.0;
    let mut max_mean_gap: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = sample::rng_for(seed, trial as u64);
        let f = sample::log_uniform_function(chain.len(), -3.0, 3.0, &mut rng);
        let (residual, mean_gap) = residual_for(chain, partition, &system, &f, true)?;
        max_residual = max_residual.max(residual);
        max_mean_gap = max_mean_gap.max(mean_gap);
    }
    Ok(DecompositionCheck {
        trials,
        max_residual,
        max_mean_gap,
        tolerance: IDENTITY_TOL,
        pass: max_residual <= IDENTITY_TOL && max_mean_gap <= MEAN_PRESERVATION_TOL,
    })
}

/// The slack `ℒ_π f − Σ_i π̂(i) ℒ_{π_i} f − χ ℒ_π̂ f̂` for one explicit `f`.
///
/// An infinite `χ` only occurs when all coupled mass is diagonal, which
/// forces `f̂` to agree across coupled classes and the projection term to
/// vanish; the `∞·0 = 0` convention then drops the term.
pub fn dirichlet_slack(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    system: &DecomposedSystem,
    chi: f64,
    psi: PsiKind,
    f: &[f64],
) -> Result<f64> {
    let total = chain.dirichlet_form(f, psi)?;
    let mut class_total = 0.0;
    for (i, restriction) in system.restrictions.iter().enumerate() {
        let f_i: Vec<f64> = restriction.support.iter().map(|&x| f[x]).collect();
        class_total += system.pi_hat[i] * restriction.chain.dirichlet_form(&f_i, psi)?;
    }
    let f_hat = crate::decomposition::project_function(chain, partition, f)?;
    let projected = system.projection.dirichlet_form(&f_hat, psi)?;
    let chi_term = if chi.is_infinite() {
        0.0
    } else {
        chi * projected
    };
    Ok(total - class_total - chi_term)
}

/// Check the Dirichlet-form inequality over random positive `f`
/// (`exp(3·Z)`, `Z` standard normal). Passes when the worst slack stays
/// above `−1e-9`.
pub fn check_dirichlet_inequality(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    couplings: &CouplingSet,
    psi: PsiKind,
    trials: usize,
    seed: u64,
) -> Result<DirichletCheck> {
    let system = decompose(chain, partition)?;
    let chi = quality_chi(chain, partition, &system, couplings)?.chi;
    let mut min_slack = f64::INFINITY;
    for trial in 0..trials {
        let mut rng = sample::rng_for(seed, trial as u64);
        let f = sample::log_normal_function(chain.len(), 3.0, &mut rng);
        let slack = dirichlet_slack(chain, partition, &system, chi, psi, &f)?;
        min_slack = min_slack.min(slack);
    }
    Ok(DirichletCheck {
        psi,
        trials,
        min_slack,
        chi,
        tolerance: DIRICHLET_SLACK_TOL,
        pass: min_slack >= DIRICHLET_SLACK_TOL,
    })
}

/// Verdict on `c(Q) ≥ min{χ·c(Q̂), min_i c(Q_i)}` for one constant.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundVerdict {
    pub psi: PsiKind,
    /// Constant of the original chain.
    pub lhs: f64,
    /// `min{χ·c(Q̂), min_i c(Q_i)}`.
    pub rhs: f64,
    pub chi: f64,
    /// Constant of the projection chain.
    pub projection_constant: f64,
    /// `χ · c(Q̂)` under the extended-real conventions.
    pub chi_term: f64,
    /// Constant of each restriction chain, by class id.
    pub per_class: Vec<(String, f64)>,
    /// `lhs − rhs` (0 when both sides are infinite).
    pub slack: f64,
    pub tolerance: f64,
    /// MLSI/LSI verdicts compare estimates against estimates.
    pub advisory: bool,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Evaluate the lower bound for one constant kind.
///
/// Poincaré uses exact spectral values on both sides and an absolute
/// tolerance of 1e-10: a failure there indicates an implementation bug.
/// MLSI/LSI use achieved-ratio estimates on both sides, so their verdicts
/// are advisory at 1e-3 relative tolerance.
pub fn check_theorem_bound(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    couplings: &CouplingSet,
    psi: PsiKind,
    opts: &MinimizeOptions,
) -> Result<BoundVerdict> {
    let system = decompose(chain, partition)?;
    for (i, j, report) in couplings.validate_against(&system)? {
        if !report.is_clean() {
            return Err(Error::Invalid(format!(
                "coupling ({i},{j}) is not a coupling of the class measures: {}",
                report.violations[0]
            )));
        }
    }
    let chi_report = quality_chi(chain, partition, &system, couplings)?;
    let chi = chi_report.chi;

    let mut notes = Vec::new();
    let advisory = psi.requires_positive();
    if advisory {
        notes
            .push("advisory: both sides are upper-bound estimates, not certified constants".into());
    }

    let lhs_constant = constant_estimate(chain, psi, opts)?;
    let projection = constant_estimate(&system.projection, psi, opts)?;
    let chi_term = extended_mul(chi, projection.value);

    let mut rhs = chi_term;
    let mut per_class = Vec::with_capacity(system.restrictions.len());
    for restriction in &system.restrictions {
        let constant = constant_estimate(&restriction.chain, psi, opts)?;
        notes.extend(constant.warnings.iter().map(|w| {
            format!(
                "restriction {:?}: {w}",
                partition.class_ids()[restriction.class]
            )
        }));
        rhs = rhs.min(constant.value);
        per_class.push((
            partition.class_ids()[restriction.class].clone(),
            constant.value,
        ));
    }
    notes.extend(
        projection
            .warnings
            .iter()
            .map(|w| format!("projection: {w}")),
    );
    notes.extend(chi_report.warnings.iter().cloned());

    let lhs = lhs_constant.value;
    let slack = if lhs.is_infinite() && rhs.is_infinite() {
        0.0
    } else {
        lhs - rhs
    };
    let (tolerance, pass) = if advisory {
        let tol = ESTIMATE_BOUND_REL_TOL;
        (tol, lhs >= rhs * (1.0 - tol) || slack >= 0.0)
    } else {
        (POINCARE_BOUND_TOL, slack >= -POINCARE_BOUND_TOL)
    };
    if chi == 0.0 {
        notes.push("chi = 0: the projection term is vacuous and the bound degenerates".into());
    }

    Ok(BoundVerdict {
        psi,
        lhs,
        rhs,
        chi,
        projection_constant: projection.value,
        chi_term,
        per_class,
        slack,
        tolerance,
        advisory,
        pass,
        notes,
    })
}

/// Configuration for [`full_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub minimize: MinimizeOptions,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 200,
            seed: 0,
            minimize: MinimizeOptions::default(),
        }
    }
}

/// Everything [`full_report`] checks, in one structure.
#[derive(Debug, Clone, PartialEq)]
pub struct FullReport {
    pub states: usize,
    pub classes: Vec<String>,
    pub chain_validation: ChainReport,
    pub partition_validation: PartitionReport,
    /// Per ordered class pair `(i, j)` with `Q̂(i,j) > 0`.
    pub coupling_validations: Vec<(String, String, CouplingReport)>,
    pub variance_identity: DecompositionCheck,
    pub entropy_identity: DecompositionCheck,
    pub dirichlet_checks: Vec<DirichletCheck>,
    pub chi: ChiReport,
    pub verdicts: Vec<BoundVerdict>,
    pub warnings: Vec<String>,
}

impl FullReport {
    /// The exact-arithmetic verdict; the theorem test proper.
    pub fn poincare_verdict(&self) -> &BoundVerdict {
        self.verdicts
            .iter()
            .find(|v| v.psi == PsiKind::Poincare)
            .expect("full_report always includes the Poincaré verdict")
    }
}

/// Validate the instance, run both identity checks, the inequality check
/// for all three kinds, compute `χ`, and evaluate all three bound verdicts.
///
/// Structural problems (wrong shapes, missing couplings) and validation
/// failures are errors: the report describes a valid instance or nothing.
pub fn full_report(
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
    couplings: &CouplingSet,
    config: &VerifyConfig,
) -> Result<FullReport> {
    let chain_validation = chain.validate();
    if !chain_validation.is_clean() {
        return Err(Error::Invalid(format!(
            "chain is not a valid reversible generator: {}",
            chain_validation.violations[0]
        )));
    }
    let partition_validation = partition.validate(chain.len())?;
    if !partition_validation.is_clean() {
        return Err(Error::Invalid(format!(
            "partition is not a valid fuzzy partition: {}",
            partition_validation.violations[0]
        )));
    }
    let system = decompose(chain, partition)?;
    let mut coupling_validations = Vec::new();
    for (i, j, report) in couplings.validate_against(&system)? {
        if !report.is_clean() {
            return Err(Error::Invalid(format!(
                "coupling ({i},{j}) fails validation: {}",
                report.violations[0]
            )));
        }
        coupling_validations.push((
            partition.class_ids()[i].clone(),
            partition.class_ids()[j].clone(),
            report,
        ));
    }

    let mut warnings = system.warnings.clone();
    let chi = quality_chi(chain, partition, &system, couplings)?;
    warnings.extend(chi.warnings.iter().cloned());
    if chi.chi == 0.0 {
        warnings.push("chi = 0: the lower bound is vacuous".into());
    }

    let variance_identity =
        check_variance_decomposition(chain, partition, config.trials, config.seed)?;
    let entropy_identity =
        check_entropy_decomposition(chain, partition, config.trials, config.seed)?;
    let mut dirichlet_checks = Vec::with_capacity(3);
    for psi in PsiKind::ALL {
        dirichlet_checks.push(check_dirichlet_inequality(
            chain,
            partition,
            couplings,
            psi,
            config.trials,
            config.seed,
        )?);
    }
    let mut verdicts = Vec::with_capacity(3);
    for psi in PsiKind::ALL {
        verdicts.push(check_theorem_bound(
            chain,
            partition,
            couplings,
            psi,
            &config.minimize,
        )?);
    }

    Ok(FullReport {
        states: chain.len(),
        classes: partition.class_ids().to_vec(),
        chain_validation,
        partition_validation,
        coupling_validations,
        variance_identity,
        entropy_identity,
        dirichlet_checks,
        chi,
        verdicts,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glued::{
        build_glued_graph, canonical_coupling, canonical_partition, pentagon_example,
    };
    use crate::linalg::Matrix;
    use alloc::string::ToString;
    use alloc::vec;

    fn quick_opts() -> MinimizeOptions {
        MinimizeOptions {
            restarts: 4,
            max_iter: 600,
            ..Default::default()
        }
    }

    fn pentagon_instance() -> (ReversibleChain, FuzzyPartition, CouplingSet) {
        let base = pentagon_example();
        let (glued, chain) = build_glued_graph(&base).unwrap();
        let partition = canonical_partition(&glued);
        let couplings = canonical_coupling(&glued, &chain);
        (chain, partition, couplings)
    }

    #[test]
    fn identities_hold_on_pentagon() {
        let (chain, partition, _) = pentagon_instance();
        let var = check_variance_decomposition(&chain, &partition, 50, 1).unwrap();
        assert!(var.pass, "residual {}", var.max_residual);
        let ent = check_entropy_decomposition(&chain, &partition, 50, 1).unwrap();
        assert!(ent.pass, "residual {}", ent.max_residual);
    }

    #[test]
    fn identities_trivial_for_single_class() {
        let chain = ReversibleChain::random_walk_on_edges(
            vec!["a".to_string(), "b".to_string()],
            &[(0, 1)],
        )
        .unwrap();
        let membership = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let partition = FuzzyPartition::new(vec!["all".to_string()], membership).unwrap();
        let var = check_variance_decomposition(&chain, &partition, 10, 0).unwrap();
        assert!(var.pass);
        assert!(var.max_residual < 1e-14);
    }

    #[test]
    fn dirichlet_inequality_holds_on_pentagon_for_all_kinds() {
        let (chain, partition, couplings) = pentagon_instance();
        for psi in PsiKind::ALL {
            let check =
                check_dirichlet_inequality(&chain, &partition, &couplings, psi, 100, 2).unwrap();
            assert!(check.pass, "{psi:?}: min slack {}", check.min_slack);
        }
    }

    #[test]
    fn dirichlet_slack_is_exactly_zero_for_constant_f() {
        let (chain, partition, couplings) = pentagon_instance();
        let system = decompose(&chain, &partition).unwrap();
        let chi = quality_chi(&chain, &partition, &system, &couplings)
            .unwrap()
            .chi;
        let f = vec![3.25; chain.len()];
        for psi in PsiKind::ALL {
            let slack = dirichlet_slack(&chain, &partition, &system, chi, psi, &f).unwrap();
            assert_eq!(slack, 0.0, "{psi:?}");
        }
    }

    #[test]
    fn poincare_bound_holds_on_pentagon() {
        let (chain, partition, couplings) = pentagon_instance();
        let verdict = check_theorem_bound(
            &chain,
            &partition,
            &couplings,
            PsiKind::Poincare,
            &quick_opts(),
        )
        .unwrap();
        assert!(verdict.pass, "slack {}", verdict.slack);
        assert!(!verdict.advisory);
        // rhs includes the closed-form projection term χ·λ(Q̂) = 1/2.
        assert!((verdict.chi_term - 0.5).abs() < 1e-12);
        assert!(verdict.lhs >= verdict.rhs - 1e-10);
    }

    #[test]
    fn single_class_bound_passes_with_zero_slack() {
        let chain = ReversibleChain::random_walk_on_edges(
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
            &[(0, 1), (1, 2), (2, 0)],
        )
        .unwrap();
        let membership = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let partition = FuzzyPartition::new(vec!["all".to_string()], membership).unwrap();
        let couplings = CouplingSet::default();
        let verdict = check_theorem_bound(
            &chain,
            &partition,
            &couplings,
            PsiKind::Poincare,
            &quick_opts(),
        )
        .unwrap();
        // χ = +inf (no coupled pair), λ(Q̂) = +inf (single state): the rhs
        // reduces to λ(Q_1) = λ(Q).
        assert!(verdict.chi.is_infinite());
        assert!(verdict.chi_term.is_infinite());
        assert!((verdict.lhs - verdict.rhs).abs() < 1e-12);
        assert!(verdict.pass);
        assert!(verdict.slack.abs() < 1e-12);
    }

    #[test]
    fn full_report_on_pentagon_has_all_sections() {
        let (chain, partition, couplings) = pentagon_instance();
        let config = VerifyConfig {
            trials: 40,
            seed: 3,
            minimize: quick_opts(),
        };
        let report = full_report(&chain, &partition, &couplings, &config).unwrap();
        assert_eq!(report.states, 8);
        assert_eq!(report.classes, vec!["1".to_string(), "2".to_string()]);
        assert_eq!(report.coupling_validations.len(), 2);
        assert!(report.variance_identity.pass);
        assert!(report.entropy_identity.pass);
        assert_eq!(report.dirichlet_checks.len(), 3);
        assert_eq!(report.verdicts.len(), 3);
        assert!(report.poincare_verdict().pass);
        assert!((report.chi.chi - 15.0 / 28.0).abs() < 1e-13);
    }

    #[test]
    fn full_report_flags_trivial_single_class_projection() {
        let chain = ReversibleChain::random_walk_on_edges(
            vec!["a".to_string(), "b".to_string()],
            &[(0, 1)],
        )
        .unwrap();
        let membership = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let partition = FuzzyPartition::new(vec!["all".to_string()], membership).unwrap();
        let config = VerifyConfig {
            trials: 10,
            seed: 0,
            minimize: quick_opts(),
        };
        let report = full_report(&chain, &partition, &CouplingSet::default(), &config).unwrap();
        assert!(report.warnings.iter().any(|w| w.contains("trivial")));
        assert!(report.poincare_verdict().pass);
    }

    #[test]
    fn full_report_rejects_invalid_chain() {
        let q = Matrix::from_rows(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).unwrap();
        let chain = ReversibleChain::new(vec!["a".to_string(), "b".to_string()], vec![0.5, 0.5], q)
            .unwrap();
        let membership = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let partition = FuzzyPartition::new(vec!["all".to_string()], membership).unwrap();
        let result = full_report(
            &chain,
            &partition,
            &CouplingSet::default(),
            &VerifyConfig::default(),
        );
        assert!(matches!(result, Err(Error::Invalid(_))));
    }

    #[test]
    fn full_report_warns_on_vacuous_chi() {
        // Product couplings on a sparse chain put mass on non-edges: chi = 0.
        let chain = ReversibleChain::random_walk_on_edges(
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        let membership =
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        let partition =
            FuzzyPartition::new(vec!["L".to_string(), "R".to_string()], membership).unwrap();
        let system = decompose(&chain, &partition).unwrap();
        let couplings = CouplingSet::products_for(&system);
        let config = VerifyConfig {
            trials: 20,
            seed: 5,
            minimize: quick_opts(),
        };
        let report = full_report(&chain, &partition, &couplings, &config).unwrap();
        assert_eq!(report.chi.chi, 0.0);
        assert!(report.warnings.iter().any(|w| w.contains("vacuous")));
        assert!(report.poincare_verdict().pass); // rhs = 0: trivially true
    }
}
