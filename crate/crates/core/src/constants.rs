//! Functional-inequality constants: the Poincaré constant exactly, the
//! modified log-Sobolev and log-Sobolev constants by ratio minimization.
//!
//! `λ(Q)` is the second-smallest eigenvalue of the symmetrized operator
//! `D^{1/2}(−Q)D^{−1/2}` with `D = diag(π)`, computed by cyclic Jacobi.
//! `α(Q)` and `ρ(Q)` have no tractable exact form, so they are *estimated*
//! by minimizing the ratio `ℒ_π f / Ent_π f` over positive `f`; every
//! achieved ratio is a certified upper bound of the true constant. The
//! independent [`brute_force_ratio_oracle`] minimizes the same ratio over an
//! explicit grid or random cloud in log-space and exists so tests can bound
//! the optimizer from a second route.
//!
//! Conventions for degenerate chains: a single-state chain has every
//! constant `+∞` (the defining inequalities are vacuous); a reducible chain
//! has every constant `0`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::chain::{entropy, variance, ChainViolation, PsiKind, ReversibleChain};
use crate::linalg::{self, Matrix};
use crate::math;
use crate::sample;
use crate::{Error, Result};

/// Below this second-smallest eigenvalue the chain is treated as reducible.
pub const REDUCIBLE_EIGENVALUE_CUTOFF: f64 = 1e-9;
/// Candidates whose variance/entropy denominator falls below this are
/// rejected as near-constant.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Exact spectral gap result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGap {
    /// `λ(Q)`; `+∞` for a single-state chain, `0` for a reducible one.
    pub lambda: f64,
    /// Whether the zero eigenvalue had multiplicity greater than one.
    pub reducible: bool,
}

/// Poincaré constant of a reversible chain via the symmetrized spectrum.
///
/// Errors if the chain is not reversible (the symmetrization would be
/// meaningless). Reducibility is detected spectrally: a second-smallest
/// eigenvalue below [`REDUCIBLE_EIGENVALUE_CUTOFF`] reports `λ = 0`.
pub fn poincare_constant(chain: &ReversibleChain) -> Result<SpectralGap> {
    let report = chain.validate();
    if let Some(v) = report
        .violations
        .iter()
        .find(|v| matches!(v, ChainViolation::DetailedBalance { .. }))
    {
        return Err(Error::Domain(format!(
            "chain is not reversible, spectral symmetrization invalid: {v}"
        )));
    }
    let n = chain.len();
    if n == 1 {
        return Ok(SpectralGap {
            lambda: f64::INFINITY,
            reducible: false,
        });
    }
    let pi = chain.pi();
    let q = chain.generator();
    let mut s = Matrix::zeros(n, n);
    for x in 0..n {
        s[(x, x)] = -q[(x, x)];
        for y in (x + 1)..n {
            // π(x)Q(x,y) = π(y)Q(y,x); averaging kills tolerance-level noise.
            let flow = 0.5 * (pi[x] * q[(x, y)] + pi[y] * q[(y, x)]);
            let value = -flow / math::sqrt(pi[x] * pi[y]);
            s[(x, y)] = value;
            s[(y, x)] = value;
        }
    }
    let eigs = linalg::symmetric_eigenvalues(&s)?;
    let second = eigs[1];
    if second < REDUCIBLE_EIGENVALUE_CUTOFF {
        Ok(SpectralGap {
            lambda: 0.0,
            reducible: true,
        })
    } else {
        Ok(SpectralGap {
            lambda: second,
            reducible: false,
        })
    }
}

/// The achieved ratio `ℒ_π f / R_π f` for an explicit `f`, where the
/// denominator is variance for `Poincare` and entropy otherwise. This is the
/// quantity both the optimizer and the oracle minimize.
pub fn ratio_of(chain: &ReversibleChain, psi: PsiKind, f: &[f64]) -> Result<f64> {
    let denominator = match psi {
        PsiKind::Poincare => variance(chain.pi(), f)?,
        PsiKind::Mlsi | PsiKind::Lsi => entropy(chain.pi(), f)?,
    };
    if denominator < DEGENERATE_DENOMINATOR {
        return Err(Error::NoCandidate(format!(
            "function is near-constant: denominator {denominator} below {DEGENERATE_DENOMINATOR}"
        )));
    }
    Ok(chain.dirichlet_form(f, psi)? / denominator)
}

/// Objective on the unconstrained parameterization `f = exp(g − E_π[g])`.
/// `None` marks a near-constant candidate.
fn objective(chain: &ReversibleChain, psi: PsiKind, g: &[f64]) -> Option<f64> {
    let f = positive_candidate(chain, g);
    ratio_of(chain, psi, &f).ok()
}

/// Map optimizer coordinates to the positive function they represent.
fn positive_candidate(chain: &ReversibleChain, g: &[f64]) -> Vec<f64> {
    let mean: f64 = chain.pi().iter().zip(g).map(|(p, v)| p * v).sum();
    g.iter().map(|v| math::exp(v - mean)).collect()
}

/// Options for [`ratio_minimize`]. Defaults: 32 restarts, 2000 iterations,
/// central finite differences with step 1e-6, convergence when the relative
/// ratio improvement over 20 iterations drops below 1e-10.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub fd_step: f64,
    pub stall_window: usize,
    pub stall_rel_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            restarts: 32,
            max_iter: 2000,
            seed: 0,
            fd_step: 1e-6,
            stall_window: 20,
            stall_rel_tol: 1e-10,
        }
    }
}

impl MinimizeOptions {
    pub fn with_seed(seed: u64) -> Self {
        MinimizeOptions {
            seed,
            ..Default::default()
        }
    }
}

/// Result of one restart of the descent.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub restart: usize,
    pub value: f64,
    pub minimizer: Vec<f64>,
    pub iterations: usize,
}

/// A multi-start estimate: the best achieved ratio and the function
/// achieving it, with enough metadata to reproduce the run.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioEstimate {
    pub psi: PsiKind,
    /// The achieved ratio: a certified upper bound of the true constant.
    pub value: f64,
    /// The minimizing positive function, in the chain's state order.
    pub minimizer: Vec<f64>,
    pub restarts: usize,
    pub best_restart: usize,
    /// Descent iterations used by the best restart.
    pub iterations: usize,
    pub seed: u64,
}

/// Backtracking gradient descent from `(g, value)` for at most `budget`
/// iterations; returns the improved point and the iterations consumed.
fn descend(
    chain: &ReversibleChain,
    psi: PsiKind,
    opts: &MinimizeOptions,
    mut g: Vec<f64>,
    mut value: f64,
    budget: usize,
) -> (Vec<f64>, f64, usize) {
    let n = chain.len();
    let h = opts.fd_step;
    let mut step_init = 1.0f64;
    let mut history: Vec<f64> = alloc::vec![value];
    let mut iterations = 0;
    let mut prev_grad: Option<Vec<f64>> = None;
    let mut direction: Vec<f64> = alloc::vec![0.0; n];

    for iter in 0..budget {
        iterations = iter + 1;
        // Central finite-difference gradient.
        let mut grad = alloc::vec![0.0; n];
        let mut grad_norm2 = 0.0;
        for k in 0..n {
            let saved = g[k];
            g[k] = saved + h;
            let plus = objective(chain, psi, &g);
            g[k] = saved - h;
            let minus = objective(chain, psi, &g);
            g[k] = saved;
            let d = match (plus, minus) {
                (Some(p), Some(m)) => (p - m) / (2.0 * h),
                (Some(p), None) => (p - value) / h,
                (None, Some(m)) => (value - m) / h,
                (None, None) => 0.0,
            };
            grad[k] = d;
            grad_norm2 += d * d;
        }
        if grad_norm2 < 1e-24 {
            break;
        }

        // Conjugate direction (Polak-Ribiere+), falling back to steepest
        // descent whenever conjugacy stops producing a descent direction.
        // Plain steepest descent crawls on the ill-conditioned valleys these
        // ratios have near their minima.
        let beta = match &prev_grad {
            Some(pg) => {
                let pg_norm2: f64 = pg.iter().map(|v| v * v).sum();
                let num: f64 = grad.iter().zip(pg).map(|(gv, pv)| gv * (gv - pv)).sum();
                (num / pg_norm2.max(1e-300)).max(0.0)
            }
            None => 0.0,
        };
        for k in 0..n {
            direction[k] = -grad[k] + beta * direction[k];
        }
        let mut slope: f64 = grad.iter().zip(&direction).map(|(gv, dv)| gv * dv).sum();
        if slope >= 0.0 {
            for k in 0..n {
                direction[k] = -grad[k];
            }
            slope = -grad_norm2;
        }
        prev_grad = Some(grad);

        // Backtracking line search along the direction (Armijo, c1 = 1e-4).
        let mut step = step_init;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = g
                .iter()
                .zip(&direction)
                .map(|(v, d)| v + step * d)
                .collect();
            if let Some(trial_value) = objective(chain, psi, &trial) {
                if trial_value <= value + 1e-4 * step * slope {
                    accepted = Some((trial, trial_value, step));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((next_g, next_value, used_step)) = accepted else {
            break;
        };
        g = next_g;
        value = next_value;
        step_init = (used_step * 2.0).clamp(1e-12, 1e3);
        history.push(value);

        if history.len() > opts.stall_window {
            let before = history[history.len() - 1 - opts.stall_window];
            if before - value <= opts.stall_rel_tol * value.abs().max(1e-300) {
                break;
            }
        }
    }
    (g, value, iterations)
}

/// Exact line search over the scale direction `g → t·g` on a geometric
/// ladder of `t`.
///
/// The infimum of the entropy-denominator ratios can be approached along
/// the constant-`f` limit (`t → 0`), where plain descent shrinks its steps
/// and crawls; scanning the ray reaches the admissibility edge directly.
/// Deterministic, so restarts stay reproducible.
fn scale_scan(
    chain: &ReversibleChain,
    psi: PsiKind,
    g: &[f64],
    value: f64,
) -> Option<(Vec<f64>, f64)> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    let try_scale = |t: f64, best: &mut Option<(Vec<f64>, f64)>| {
        let scaled: Vec<f64> = g.iter().map(|v| t * v).collect();
        if let Some(v) = objective(chain, psi, &scaled) {
            let current = best.as_ref().map_or(value, |(_, b)| *b);
            if v < current {
                *best = Some((scaled, v));
            }
        }
    };
    let mut down = 1.0f64;
    for _ in 0..160 {
        down *= 0.85;
        try_scale(down, &mut best);
    }
    let mut up = 1.0f64;
    for _ in 0..40 {
        up /= 0.85;
        try_scale(up, &mut best);
    }
    best
}

/// One restart of the finite-difference descent, deterministic in
/// `(opts.seed, restart)`. Returns `None` when every iterate was degenerate.
pub fn ratio_minimize_restart(
    chain: &ReversibleChain,
    psi: PsiKind,
    opts: &MinimizeOptions,
    restart: usize,
) -> Option<RestartOutcome> {
    let n = chain.len();
    let mut rng = sample::rng_for(opts.seed, restart as u64);
    let g0 = sample::normal_function(n, &mut rng);
    let value0 = objective(chain, psi, &g0)?;

    let (mut g, mut value, mut iterations) = descend(chain, psi, opts, g0, value0, opts.max_iter);
    // Alternate scale scans with short descents until neither improves.
    for _ in 0..4 {
        let Some((scanned_g, scanned_value)) = scale_scan(chain, psi, &g, value) else {
            break;
        };
        if scanned_value >= value - 1e-12 * value.abs() {
            break;
        }
        g = scanned_g;
        value = scanned_value;
        let (next_g, next_value, extra) =
            descend(chain, psi, opts, g.clone(), value, opts.max_iter.min(400));
        iterations += extra;
        if next_value < value {
            g = next_g;
            value = next_value;
        }
    }

    // Report the value recomputed from the returned function so that the
    // estimate is exactly `ratio_of(chain, psi, minimizer)`.
    let f = positive_candidate(chain, &g);
    let value = ratio_of(chain, psi, &f).ok()?;
    Some(RestartOutcome {
        restart,
        value,
        minimizer: f,
        iterations,
    })
}

/// Deterministic choice among restart outcomes: smallest value, ties broken
/// by restart index, independent of evaluation order.
pub fn best_outcome(outcomes: impl IntoIterator<Item = RestartOutcome>) -> Option<RestartOutcome> {
    outcomes
        .into_iter()
        .fold(None, |best, candidate| match best {
            None => Some(candidate),
            Some(b) => {
                if candidate.value < b.value
                    || (candidate.value == b.value && candidate.restart < b.restart)
                {
                    Some(candidate)
                } else {
                    Some(b)
                }
            }
        })
}

/// Estimate the MLSI or LSI constant (or, in sanity mode, the Poincaré
/// constant) by multi-start descent on `R(f) = ℒ_π f / R_π f` with
/// `f = exp(g − E_π[g])`. Deterministic given `opts.seed`.
///
/// Errors with `NoCandidate` when every restart degenerates, which happens
/// exactly when no non-constant candidate exists (single-state chains).
pub fn ratio_minimize(
    chain: &ReversibleChain,
    psi: PsiKind,
    opts: &MinimizeOptions,
) -> Result<RatioEstimate> {
    if opts.restarts == 0 {
        return Err(Error::Domain("ratio_minimize needs restarts >= 1".into()));
    }
    let best = best_outcome(
        (0..opts.restarts).filter_map(|r| ratio_minimize_restart(chain, psi, opts, r)),
    );
    match best {
        Some(outcome) => Ok(RatioEstimate {
            psi,
            value: outcome.value,
            minimizer: outcome.minimizer,
            restarts: opts.restarts,
            best_restart: outcome.restart,
            iterations: outcome.iterations,
            seed: opts.seed,
        }),
        None => Err(Error::NoCandidate(
            "all restarts degenerate: no non-constant candidate exists".into(),
        )),
    }
}

/// Search space for [`brute_force_ratio_oracle`]: `f(0)` is pinned to 1 (the
/// ratio is scale-invariant) and the remaining coordinates of `log f` range
/// over `[log_min, log_max]`, either on a full grid (chains of ≤ 4 states)
/// or as a random cloud, followed by shrinking-cloud refinement around the
/// incumbent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub log_min: f64,
    pub log_max: f64,
    /// Points per free dimension for full grids.
    pub grid_points: usize,
    /// Cloud size when the state count exceeds 4.
    pub samples: usize,
    pub refine_rounds: usize,
    pub refine_samples: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            log_min: -6.0,
            log_max: 6.0,
            grid_points: 1001,
            samples: 1_000_000,
            refine_rounds: 14,
            refine_samples: 20_000,
            seed: 0,
        }
    }
}

/// Oracle output: the minimum ratio found and the function achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    pub value: f64,
    pub minimizer: Vec<f64>,
    pub evaluations: usize,
}

/// Independent check on [`ratio_minimize`]: minimize the same ratio by
/// explicit search in log-space, with no gradients and no shared code path
/// beyond the ratio itself.
///
/// Refinement only runs for the Poincaré kind. Its minimizers are interior
/// (any shifted second eigenvector attains the minimum with variance of
/// order one), so shrinking clouds converge cleanly. The entropy-denominator
/// kinds can attain their infimum in the constant-`f` limit, where the
/// denominator sits at the admissibility cutoff and evaluation noise
/// dominates the ratio; a refinement loop there would harvest rounding noise
/// instead of approximating the infimum, so those kinds stop at the raw
/// grid or cloud minimum.
pub fn brute_force_ratio_oracle(
    chain: &ReversibleChain,
    psi: PsiKind,
    spec: &GridSpec,
) -> Result<OracleEstimate> {
    let n = chain.len();
    if n == 1 {
        return Err(Error::NoCandidate(
            "single-state chain has no non-constant candidate".into(),
        ));
    }
    if spec.grid_points < 2 || spec.log_max <= spec.log_min {
        return Err(Error::Domain(
            "grid spec needs grid_points >= 2 and log_max > log_min".into(),
        ));
    }
    let dims = n - 1;
    let range = spec.log_max - spec.log_min;
    let mut evaluations = 0usize;
    let mut best: Option<(f64, Vec<f64>)> = None;

    let consider = |g: &[f64], best: &mut Option<(f64, Vec<f64>)>, evals: &mut usize| {
        *evals += 1;
        if let Some(value) = objective(chain, psi, g) {
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                *best = Some((value, g.to_vec()));
            }
        }
    };

    let mut g = vec![0.0; n];
    if n <= 4 {
        // Full grid over the free coordinates.
        let spacing = range / (spec.grid_points - 1) as f64;
        let mut index = vec![0usize; dims];
        loop {
            for (k, &i) in index.iter().enumerate() {
                g[k + 1] = spec.log_min + i as f64 * spacing;
            }
            consider(&g, &mut best, &mut evaluations);
            // Odometer increment.
            let mut k = 0;
            loop {
                if k == dims {
                    break;
                }
                index[k] += 1;
                if index[k] < spec.grid_points {
                    break;
                }
                index[k] = 0;
                k += 1;
            }
            if k == dims {
                break;
            }
        }
    } else {
        let mut rng = sample::rng_for(spec.seed, 0);
        for _ in 0..spec.samples {
            for slot in g.iter_mut().skip(1) {
                *slot = rng.gen_range(spec.log_min..=spec.log_max);
            }
            consider(&g, &mut best, &mut evaluations);
        }
    }

    // Shrinking random cloud around the incumbent (Poincaré only; see above).
    if psi == PsiKind::Poincare {
        if let Some((_, center)) = best.clone() {
            let mut rng = sample::rng_for(spec.seed, 1);
            let mut width = range / 8.0;
            let mut center = center;
            for _ in 0..spec.refine_rounds {
                for _ in 0..spec.refine_samples {
                    for slot in 1..n {
                        g[slot] = center[slot] + rng.gen_range(-width..=width);
                    }
                    consider(&g, &mut best, &mut evaluations);
                }
                center = best
                    .as_ref()
                    .expect("refinement keeps the incumbent")
                    .1
                    .clone();
                width *= 0.4;
            }
        }
    }

    match best {
        Some((_, g_best)) => {
            let f = positive_candidate(chain, &g_best);
            let value = ratio_of(chain, psi, &f)?;
            Ok(OracleEstimate {
                value,
                minimizer: f,
                evaluations,
            })
        }
        None => Err(Error::NoCandidate(
            "every searched candidate was near-constant".into(),
        )),
    }
}

/// An extended-real constant of a chain: exact for Poincaré and for the
/// degenerate cases (single-state `+∞`, reducible `0`), an upper-bound
/// estimate for MLSI/LSI otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedConstant {
    pub psi: PsiKind,
    /// May be `0` (reducible) or `+∞` (single-state).
    pub value: f64,
    /// Present when the value came from the optimizer.
    pub estimate: Option<RatioEstimate>,
    /// Whether the value is exact rather than an upper-bound estimate.
    pub exact: bool,
    pub warnings: Vec<String>,
}

/// The constant of `chain` for the given kind, honoring the degenerate-case
/// conventions shared across the crate.
pub fn constant_estimate(
    chain: &ReversibleChain,
    psi: PsiKind,
    opts: &MinimizeOptions,
) -> Result<ExtendedConstant> {
    let gap = poincare_constant(chain)?;
    if chain.len() == 1 {
        return Ok(ExtendedConstant {
            psi,
            value: f64::INFINITY,
            estimate: None,
            exact: true,
            warnings: vec!["single-state chain: functional inequalities are vacuous".into()],
        });
    }
    if gap.reducible {
        return Ok(ExtendedConstant {
            psi,
            value: 0.0,
            estimate: None,
            exact: true,
            warnings: vec!["reducible chain: all functional-inequality constants are 0".into()],
        });
    }
    match psi {
        PsiKind::Poincare => Ok(ExtendedConstant {
            psi,
            value: gap.lambda,
            estimate: None,
            exact: true,
            warnings: Vec::new(),
        }),
        PsiKind::Mlsi | PsiKind::Lsi => {
            let estimate = ratio_minimize(chain, psi, opts)?;
            Ok(ExtendedConstant {
                psi,
                value: estimate.value,
                estimate: Some(estimate),
                exact: false,
                warnings: Vec::new(),
            })
        }
    }
}

/// The three constants of one chain: `λ` exact, `α` and `ρ` as achieved
/// ratios (upper bounds), with warnings for degenerate chains.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    /// `+∞` for single-state chains, `0` for reducible ones.
    pub lambda: f64,
    pub reducible: bool,
    pub alpha: Option<RatioEstimate>,
    pub rho: Option<RatioEstimate>,
    pub warnings: Vec<String>,
}

/// Compute `λ` exactly and estimate `α`, `ρ`; degenerate chains skip the
/// optimizer and report their conventional values through `warnings`.
pub fn constants_report(
    chain: &ReversibleChain,
    opts: &MinimizeOptions,
) -> Result<ConstantsReport> {
    let gap = poincare_constant(chain)?;
    if chain.len() == 1 || gap.reducible {
        let warning = if chain.len() == 1 {
            "single-state chain: functional inequalities are vacuous; constants are +inf"
        } else {
            "reducible chain: all functional-inequality constants are 0"
        };
        return Ok(ConstantsReport {
            lambda: gap.lambda,
            reducible: gap.reducible,
            alpha: None,
            rho: None,
            warnings: vec![warning.into()],
        });
    }
    let alpha = ratio_minimize(chain, PsiKind::Mlsi, opts)?;
    let rho = ratio_minimize(chain, PsiKind::Lsi, opts)?;
    Ok(ConstantsReport {
        lambda: gap.lambda,
        reducible: false,
        alpha: Some(alpha),
        rho: Some(rho),
        warnings: Vec::new(),
    })
}
