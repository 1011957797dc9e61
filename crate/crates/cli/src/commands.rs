//! One function per subcommand. Each returns the process exit code; `main`
//! maps errors to codes 1 (semantic) and 2 (input).

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use fuzzymc::chain::ChainTolerances;
use fuzzymc::constants::{
    best_outcome, constants_report, poincare_constant, ratio_minimize_restart, ConstantsReport,
    MinimizeOptions, RatioEstimate, RestartOutcome,
};
use fuzzymc::coupling::{quality_chi, validate_coupling_with, CouplingSet};
use fuzzymc::decomposition::decompose;
use fuzzymc::glued::{
    build_glued_graph, canonical_coupling, canonical_partition, closed_form_quantities,
};
use fuzzymc::verify::{
    check_dirichlet_inequality, check_entropy_decomposition, check_theorem_bound,
    check_variance_decomposition, full_report, FullReport, VerifyConfig,
};
use fuzzymc::{Error, PsiKind};

use crate::emit::to_json_string;
use crate::formats::{load_chain, load_couplings, load_graph, load_partition};
use crate::report;
use crate::{CliError, CliResult};

fn write_output(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub struct ValidateArgs {
    pub chain: PathBuf,
    pub partition: Option<PathBuf>,
    pub couplings: Option<PathBuf>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Run every validator applicable to the provided files; exit 0 iff all
/// report clean.
pub fn cmd_validate(args: &ValidateArgs) -> CliResult<i32> {
    let chain = load_chain(&args.chain)?;
    let chain_tol = args.tol.map(ChainTolerances::uniform).unwrap_or_default();
    let chain_report = chain.validate_with(&chain_tol);
    let mut all_clean = chain_report.is_clean();
    let mut doc = serde_json::Map::new();
    doc.insert(
        "chain".into(),
        report::violations_value(&chain_report.violations),
    );

    let mut partition_loaded = None;
    if let Some(path) = &args.partition {
        let partition = load_partition(path)?;
        let row_tol = args
            .tol
            .unwrap_or(fuzzymc::decomposition::MEMBERSHIP_ROW_SUM_TOL);
        let partition_report = partition.validate_with(chain.len(), row_tol)?;
        all_clean &= partition_report.is_clean();
        doc.insert(
            "partition".into(),
            report::violations_value(&partition_report.violations),
        );
        partition_loaded = Some(partition);
    }

    if let Some(path) = &args.couplings {
        let partition = partition_loaded
            .as_ref()
            .ok_or_else(|| CliError::Input("validating couplings requires --partition".into()))?;
        let couplings = load_couplings(path, &chain, partition)?;
        let system = decompose(&chain, partition)?;
        let mass_tol = args.tol.unwrap_or(fuzzymc::coupling::MASS_TOL);
        let marginal_tol = args.tol.unwrap_or(fuzzymc::coupling::MARGINAL_TOL);
        let mut entries = Vec::new();
        for coupling in &couplings.couplings {
            let coupling_report = validate_coupling_with(
                coupling,
                &system.class_measures[coupling.i],
                &system.class_measures[coupling.j],
                mass_tol,
                marginal_tol,
            )?;
            all_clean &= coupling_report.is_clean();
            entries.push(json!({
                "i": partition.class_ids()[coupling.i],
                "j": partition.class_ids()[coupling.j],
                "report": report::violations_value(&coupling_report.violations),
            }));
        }
        doc.insert("couplings".into(), Value::Array(entries));
    }

    doc.insert("ok".into(), Value::Bool(all_clean));
    write_output(args.out.as_deref(), &to_json_string(&Value::Object(doc)))?;
    Ok(if all_clean { 0 } else { 1 })
}

pub struct DecomposeArgs {
    pub chain: PathBuf,
    pub partition: PathBuf,
    pub out: Option<PathBuf>,
}

/// Emit `π̂`, the projection chain, and all restriction chains.
pub fn cmd_decompose(args: &DecomposeArgs) -> CliResult<i32> {
    let chain = load_chain(&args.chain)?;
    let partition = load_partition(&args.partition)?;
    let chain_report = chain.validate();
    if !chain_report.is_clean() {
        return Err(CliError::Semantic(format!(
            "chain fails validation: {}",
            chain_report.violations[0]
        )));
    }
    let system = decompose(&chain, &partition)?;
    let doc = report::decomposed_value(&system, &partition);
    write_output(args.out.as_deref(), &to_json_string(&doc))?;
    Ok(0)
}

pub struct ConstantsArgs {
    pub chain: PathBuf,
    pub seed: u64,
    pub restarts: usize,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

/// Exact `λ` plus `α`, `ρ` estimates with reproducibility metadata.
pub fn cmd_constants(args: &ConstantsArgs) -> CliResult<i32> {
    let chain = load_chain(&args.chain)?;
    let opts = MinimizeOptions {
        restarts: args.restarts,
        seed: args.seed,
        ..Default::default()
    };
    let constants = constants_with_threads(&chain, &opts, args.threads)?;
    let doc = report::constants_value(&constants);
    write_output(args.out.as_deref(), &to_json_string(&doc))?;
    Ok(0)
}

pub struct BoundArgs {
    pub chain: PathBuf,
    pub partition: PathBuf,
    pub couplings: Option<PathBuf>,
    pub product_couplings: bool,
    pub seed: u64,
    pub restarts: usize,
    pub trials: usize,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

/// Full verification report; exit 0 iff the exact Poincaré verdict passes.
pub fn cmd_bound(args: &BoundArgs) -> CliResult<i32> {
    let chain = load_chain(&args.chain)?;
    let partition = load_partition(&args.partition)?;
    let couplings = match (&args.couplings, args.product_couplings) {
        (Some(path), _) => load_couplings(path, &chain, &partition)?,
        (None, true) => {
            let system = decompose(&chain, &partition)?;
            CouplingSet::products_for(&system)
        }
        (None, false) => CouplingSet::default(),
    };
    let config = VerifyConfig {
        trials: args.trials,
        seed: args.seed,
        minimize: MinimizeOptions {
            restarts: args.restarts,
            seed: args.seed,
            ..Default::default()
        },
    };
    let full = full_report_with_threads(&chain, &partition, &couplings, &config, args.threads)?;
    let doc = report::full_report_value(&full);
    write_output(args.out.as_deref(), &to_json_string(&doc))?;
    Ok(if full.poincare_verdict().pass { 0 } else { 1 })
}

pub struct GluedArgs {
    pub graph: PathBuf,
    pub out: PathBuf,
}

/// Build the glued double graph with its canonical partition and coupling,
/// and write chain/partition/couplings/quantities files.
pub fn cmd_glued(args: &GluedArgs) -> CliResult<i32> {
    let base = load_graph(&args.graph)?;
    let (glued, chain) = build_glued_graph(&base)?;
    let partition = canonical_partition(&glued);
    let couplings = canonical_coupling(&glued, &chain);

    let system = decompose(&chain, &partition)?;
    let chi = quality_chi(&chain, &partition, &system, &couplings)?;
    let projection_gap = poincare_constant(&system.projection)?;
    let closed = closed_form_quantities(&base);
    let definition_q_hat_12 = system.projection.generator()[(0, 1)];
    let definition_bound = chi.chi * projection_gap.lambda;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out.display())))?;
    let write = |name: &str, value: &Value| -> CliResult<()> {
        let path = args.out.join(name);
        std::fs::write(&path, to_json_string(value))
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
    };
    write("chain.json", &report::chain_value(&chain))?;
    write("partition.json", &report::partition_value(&partition))?;
    write(
        "couplings.json",
        &report::couplings_value(&couplings, &chain, &partition),
    )?;
    write(
        "quantities.json",
        &report::quantities_value(
            &closed,
            definition_q_hat_12,
            chi.chi,
            definition_bound,
            &projection_gap,
        ),
    )?;
    Ok(0)
}

pub struct MixingArgs {
    pub chain: PathBuf,
    pub eps: f64,
    pub t_max: f64,
    pub step: f64,
    pub out: Option<PathBuf>,
}

/// Worst-case total-variation curve on a time grid, with the bracket of the
/// mixing time and a spectral diagnostic appended as comment lines.
pub fn cmd_mixing(args: &MixingArgs) -> CliResult<i32> {
    let chain = load_chain(&args.chain)?;
    let scan = chain.tv_mixing_scan(args.eps, args.t_max, args.step)?;
    let lambda = poincare_constant(&chain)?.lambda;
    let pi_min = chain.pi().iter().cloned().fold(f64::INFINITY, f64::min);
    let csv = report::mixing_csv(&scan, lambda, pi_min);
    write_output(args.out.as_deref(), &csv)?;
    Ok(0)
}

/// Multi-start minimization with restarts fanned out over a thread pool.
/// Results are bitwise identical to the sequential path: every restart is
/// seeded independently and the combiner is a deterministic minimum.
fn minimize_parallel(
    chain: &fuzzymc::ReversibleChain,
    psi: PsiKind,
    opts: &MinimizeOptions,
    threads: usize,
) -> Result<RatioEstimate, Error> {
    let outcomes: Vec<RestartOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads.max(1))
            .map(|offset| {
                let opts = *opts;
                scope.spawn(move || {
                    (offset..opts.restarts)
                        .step_by(threads.max(1))
                        .filter_map(|restart| ratio_minimize_restart(chain, psi, &opts, restart))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|handle| handle.join().expect("restart workers do not panic"))
            .collect()
    });
    match best_outcome(outcomes) {
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

fn constants_with_threads(
    chain: &fuzzymc::ReversibleChain,
    opts: &MinimizeOptions,
    threads: usize,
) -> Result<ConstantsReport, Error> {
    let gap = poincare_constant(chain)?;
    if threads <= 1 || chain.len() == 1 || gap.reducible {
        return constants_report(chain, opts);
    }
    let alpha = minimize_parallel(chain, PsiKind::Mlsi, opts, threads)?;
    let rho = minimize_parallel(chain, PsiKind::Lsi, opts, threads)?;
    Ok(ConstantsReport {
        lambda: gap.lambda,
        reducible: false,
        alpha: Some(alpha),
        rho: Some(rho),
        warnings: Vec::new(),
    })
}

/// Mirror of `verify::full_report` with the three bound verdicts and the
/// three Dirichlet checks evaluated concurrently. Every check is a pure
/// function of `(inputs, seed)`, so the result equals the sequential one.
fn full_report_with_threads(
    chain: &fuzzymc::ReversibleChain,
    partition: &fuzzymc::FuzzyPartition,
    couplings: &CouplingSet,
    config: &VerifyConfig,
    threads: usize,
) -> Result<FullReport, Error> {
    if threads <= 1 {
        return full_report(chain, partition, couplings, config);
    }
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

    let (variance_identity, entropy_identity, dirichlet_checks, verdicts) =
        std::thread::scope(|scope| {
            let variance = scope.spawn(|| {
                check_variance_decomposition(chain, partition, config.trials, config.seed)
            });
            let entropy = scope.spawn(|| {
                check_entropy_decomposition(chain, partition, config.trials, config.seed)
            });
            let dirichlet: Vec<_> = PsiKind::ALL
                .into_iter()
                .map(|psi| {
                    scope.spawn(move || {
                        check_dirichlet_inequality(
                            chain,
                            partition,
                            couplings,
                            psi,
                            config.trials,
                            config.seed,
                        )
                    })
                })
                .collect();
            let bounds: Vec<_> = PsiKind::ALL
                .into_iter()
                .map(|psi| {
                    scope.spawn(move || {
                        check_theorem_bound(chain, partition, couplings, psi, &config.minimize)
                    })
                })
                .collect();
            (
                variance.join().expect("verification workers do not panic"),
                entropy.join().expect("verification workers do not panic"),
                dirichlet
                    .into_iter()
                    .map(|h| h.join().expect("verification workers do not panic"))
                    .collect::<Vec<_>>(),
                bounds
                    .into_iter()
                    .map(|h| h.join().expect("verification workers do not panic"))
                    .collect::<Vec<_>>(),
            )
        });

    Ok(FullReport {
        states: chain.len(),
        classes: partition.class_ids().to_vec(),
        chain_validation,
        partition_validation,
        coupling_validations,
        variance_identity: variance_identity?,
        entropy_identity: entropy_identity?,
        dirichlet_checks: dirichlet_checks.into_iter().collect::<Result<_, _>>()?,
        chi,
        verdicts: verdicts.into_iter().collect::<Result<_, _>>()?,
        warnings,
    })
}
