//! Builders turning library results into JSON values for the emitter.

use serde_json::{json, Map, Value};

use fuzzymc::chain::MixingScan;
use fuzzymc::constants::{ConstantsReport, RatioEstimate, SpectralGap};
use fuzzymc::coupling::CouplingSet;
use fuzzymc::decomposition::{DecomposedSystem, FuzzyPartition};
use fuzzymc::glued::ClosedForm;
use fuzzymc::verify::{BoundVerdict, DecompositionCheck, DirichletCheck, FullReport};
use fuzzymc::ReversibleChain;

use crate::emit::{csv_number, matrix_value, num, num_array};

pub fn chain_value(chain: &ReversibleChain) -> Value {
    json!({
        "states": chain.states(),
        "pi": num_array(chain.pi()),
        "Q": matrix_value(chain.generator()),
    })
}

pub fn partition_value(partition: &FuzzyPartition) -> Value {
    json!({
        "classes": partition.class_ids(),
        "membership": matrix_value(partition.membership()),
    })
}

pub fn couplings_value(
    couplings: &CouplingSet,
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
) -> Value {
    let pairs: Vec<Value> = couplings
        .couplings
        .iter()
        .map(|c| {
            let support: Vec<Value> = c
                .support
                .iter()
                .map(|&(x, y, mass)| json!([chain.states()[x], chain.states()[y], num(mass)]))
                .collect();
            json!({
                "i": partition.class_ids()[c.i],
                "j": partition.class_ids()[c.j],
                "support": support,
            })
        })
        .collect();
    json!({ "pairs": pairs })
}

/// `{"clean": bool, "violations": [..]}` from any violation list.
pub fn violations_value<T: std::fmt::Display>(violations: &[T]) -> Value {
    json!({
        "clean": violations.is_empty(),
        "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    })
}

pub fn decomposed_value(system: &DecomposedSystem, partition: &FuzzyPartition) -> Value {
    let restrictions: Vec<Value> = system
        .restrictions
        .iter()
        .map(|r| {
            json!({
                "class": partition.class_ids()[r.class],
                "chain": chain_value(&r.chain),
            })
        })
        .collect();
    json!({
        "classes": partition.class_ids(),
        "pi_hat": num_array(&system.pi_hat),
        "projection": chain_value(&system.projection),
        "restrictions": restrictions,
        "warnings": system.warnings,
    })
}

fn estimate_value(estimate: &RatioEstimate) -> Value {
    json!({
        "value": num(estimate.value),
        "kind": estimate.psi.label(),
        "restarts": estimate.restarts,
        "best_restart": estimate.best_restart,
        "iterations": estimate.iterations,
        "seed": estimate.seed,
        "minimizer": num_array(&estimate.minimizer),
    })
}

pub fn constants_value(report: &ConstantsReport) -> Value {
    json!({
        "lambda": num(report.lambda),
        "reducible": report.reducible,
        "alpha_est": report.alpha.as_ref().map(estimate_value).unwrap_or(Value::Null),
        "rho_est": report.rho.as_ref().map(estimate_value).unwrap_or(Value::Null),
        "warnings": report.warnings,
    })
}

fn decomposition_check_value(check: &DecompositionCheck) -> Value {
    json!({
        "trials": check.trials,
        "max_residual": num(check.max_residual),
        "max_mean_gap": num(check.max_mean_gap),
        "tolerance": num(check.tolerance),
        "pass": check.pass,
    })
}

fn dirichlet_check_value(check: &DirichletCheck) -> Value {
    json!({
        "kind": check.psi.label(),
        "trials": check.trials,
        "min_slack": num(check.min_slack),
        "chi": num(check.chi),
        "tolerance": num(check.tolerance),
        "pass": check.pass,
    })
}

fn verdict_value(verdict: &BoundVerdict) -> Value {
    let per_class: Vec<Value> = verdict
        .per_class
        .iter()
        .map(|(class, constant)| json!({"class": class, "constant": num(*constant)}))
        .collect();
    json!({
        "kind": verdict.psi.label(),
        "lhs": num(verdict.lhs),
        "rhs": num(verdict.rhs),
        "chi": num(verdict.chi),
        "projection_constant": num(verdict.projection_constant),
        "chi_term": num(verdict.chi_term),
        "per_class": per_class,
        "slack": num(verdict.slack),
        "tolerance": num(verdict.tolerance),
        "advisory": verdict.advisory,
        "pass": verdict.pass,
        "notes": verdict.notes,
    })
}

pub fn full_report_value(report: &FullReport) -> Value {
    let couplings: Vec<Value> = report
        .coupling_validations
        .iter()
        .map(|(i, j, coupling_report)| {
            let mut value = Map::new();
            value.insert("i".into(), json!(i));
            value.insert("j".into(), json!(j));
            value.insert(
                "report".into(),
                violations_value(&coupling_report.violations),
            );
            Value::Object(value)
        })
        .collect();
    json!({
        "validation": {
            "states": report.states,
            "classes": report.classes,
            "chain": violations_value(&report.chain_validation.violations),
            "partition": violations_value(&report.partition_validation.violations),
            "couplings": couplings,
        },
        "identities": {
            "variance": decomposition_check_value(&report.variance_identity),
            "entropy": decomposition_check_value(&report.entropy_identity),
            "dirichlet": report
                .dirichlet_checks
                .iter()
                .map(dirichlet_check_value)
                .collect::<Vec<_>>(),
        },
        "chi": num(report.chi.chi),
        "verdicts": report.verdicts.iter().map(verdict_value).collect::<Vec<_>>(),
        "warnings": report.warnings,
    })
}

/// Closed-form vs definition-based quantities for the glued family.
pub fn quantities_value(
    closed: &ClosedForm,
    definition_q_hat_12: f64,
    definition_chi: f64,
    definition_bound: f64,
    projection_gap: &SpectralGap,
) -> Value {
    let triple = |closed_form: f64, definition: f64| {
        json!({
            "closed_form": num(closed_form),
            "definition": num(definition),
            "difference": num((closed_form - definition).abs()),
        })
    };
    json!({
        "q_hat_12": triple(closed.q_hat_12, definition_q_hat_12),
        "chi": triple(closed.chi, definition_chi),
        "projection_bound": triple(closed.projection_bound, definition_bound),
        "lambda_projection": num(projection_gap.lambda),
    })
}

/// CSV body plus trailing comment lines for the mixing scan.
pub fn mixing_csv(scan: &MixingScan, lambda: f64, pi_min: f64) -> String {
    let mut out = String::from("t,max_tv\n");
    for &(t, tv) in &scan.samples {
        out.push_str(&csv_number(t));
        out.push(',');
        out.push_str(&csv_number(tv));
        out.push('\n');
    }
    match scan.bracket {
        Some(t) => {
            out.push_str(&format!("# bracket: {}\n", csv_number(t)));
            out.push_str(&format!("# lambda: {}\n", csv_number(lambda)));
            let denom = -(scan.eps * pi_min).ln();
            let diagnostic = t * lambda / denom;
            out.push_str(&format!(
                "# diagnostic t_bracket*lambda/log(1/(eps*pi_min)): {}\n",
                csv_number(diagnostic)
            ));
        }
        None => {
            out.push_str("# bracket: not reached\n");
            out.push_str(&format!("# lambda: {}\n", csv_number(lambda)));
        }
    }
    out
}
