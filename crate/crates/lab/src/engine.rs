//! Moment oracle, truncation sweeps and their gates for one scenario.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use timereg::moments::{certificate_from_moment, l2_second_moment, reduce_terms, seminorm_term, RegularityQuery};
use timereg::sweep::{verdict, TruncationSweep, Verdict};
use timereg::{CertificateReport, SpectralOperator, SpectralVector};

use crate::scenario::{DataSpec, ExpectedVerdict, Scenario, ScenarioError, Space};

/// A validated scenario with its operator and data materialized.
#[derive(Debug, Clone)]
pub struct Problem {
    pub scenario: Scenario,
    pub operator: SpectralOperator,
    pub data: SpectralVector,
}

impl Problem {
    pub fn new(scenario: Scenario) -> Result<Self, ScenarioError> {
        scenario.validate().map_err(ScenarioError::Invalid)?;
        let operator = scenario.build_operator()?;
        let data = scenario.build_data()?;
        Ok(Self {
            scenario,
            operator,
            data,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentRow {
    pub alpha: f64,
    pub theta: f64,
    pub truncation: usize,
    pub frac_norm: f64,
    pub seminorm_moment: f64,
    pub l2_moment: f64,
    /// `√(seminorm + L²)/‖A^α x‖`; absent for zero data.
    pub ratio: Option<f64>,
    pub verdict: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepReport {
    pub alpha: f64,
    pub truncations: Vec<usize>,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    pub relative_change: f64,
    pub increment_slope: Option<f64>,
    pub value_slope: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GateRecord {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoefficientCheckReport {
    pub intervals: usize,
    pub modes: usize,
    pub max_abs_error: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleOutput {
    pub moments: Vec<MomentRow>,
    pub certificates: Vec<CertificateReport>,
    pub sweeps: Vec<SweepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient_check: Option<CoefficientCheckReport>,
    pub gates: Vec<GateRecord>,
}

/// Per-mode seminorm contributions, evaluated in parallel and returned in mode order.
pub fn seminorm_terms_par(
    a: &SpectralOperator,
    x: &SpectralVector,
    q: &RegularityQuery,
    tol: f64,
) -> timereg::Result<Vec<f64>> {
    a.eigenvalues()
        .par_iter()
        .zip(x.coefficients().par_iter())
        .map(|(&l, &c)| seminorm_term(l, c, q, tol))
        .collect()
}

/// Moments, certificates and sweeps for every α of the scenario. With
/// `with_sweeps == false` the sweep block is skipped.
pub fn evaluate(problem: &Problem, with_sweeps: bool) -> Result<OracleOutput, timereg::Error> {
    let s = &problem.scenario;
    let (a, x) = (&problem.operator, &problem.data);
    let mut out = OracleOutput::default();
    let l2 = l2_second_moment(a, x, s.horizon, 0.5)?;

    for &alpha in &s.query.alphas {
        let theta = s.query.space.theta(alpha);
        let l2_theta = if theta == 0.5 { l2 } else { l2_second_moment(a, x, s.horizon, theta)? };
        let frac = a.fractional_norm(x, alpha)?;
        let (seminorm, terms) = if alpha > 0.0 {
            let q = RegularityQuery::new(alpha, s.horizon, theta)?;
            let terms = seminorm_terms_par(a, x, &q, s.tolerance)?;
            let total = reduce_terms(&terms);
            if s.query.space == Space::Theorem {
                let cert = certificate_from_moment(a, x, &q, s.tolerance, total)?;
                out.gates.push(GateRecord {
                    name: format!("certificate alpha={alpha}"),
                    pass: cert.all_hold(),
                    detail: format!(
                        "seminorm {} lower {} upper {}",
                        cert.seminorm_bound_holds, cert.lower_bound_holds, cert.upper_bound_holds
                    ),
                });
                out.certificates.push(cert);
            }
            (total, Some(terms))
        } else {
            (0.0, None)
        };

        let mut verdict_label = None;
        if let (true, Some(spec), Some(terms)) = (with_sweeps, &s.sweep, &terms) {
            let sweep = TruncationSweep::from_terms(terms, &spec.truncations)?;
            let v = verdict(&sweep, spec.stability_tolerance);
            verdict_label = Some(v.label().to_string());
            for e in spec.expect.iter().filter(|e| e.alpha == alpha) {
                out.gates.push(expectation_gate(alpha, e.verdict, e.slope, e.slope_tolerance, &v));
            }
            out.sweeps.push(SweepReport {
                alpha,
                truncations: sweep.truncations.clone(),
                values: sweep.values.clone(),
                increments: sweep.increments(),
                relative_change: sweep.relative_change(),
                increment_slope: sweep.increment_slope(),
                value_slope: sweep.value_slope(),
                verdict: v,
            });
        }

        let total = seminorm + l2_theta;
        out.moments.push(MomentRow {
            alpha,
            theta,
            truncation: a.truncation(),
            frac_norm: frac,
            seminorm_moment: seminorm,
            l2_moment: l2_theta,
            ratio: (frac > 0.0).then(|| total.sqrt() / frac),
            verdict: verdict_label,
        });
    }

    if let (Some(check), DataSpec::Profile { profile, .. }, Some(domain)) = (&s.coefficient_check, &s.data, s.domain()) {
        let h = profile.sample(domain, check.intervals)?;
        let quad = timereg::dirichlet::sine_coefficients(&h, check.modes)?;
        let exact = profile.coefficients(domain, check.modes)?;
        let max_abs_error = quad
            .coefficients()
            .iter()
            .zip(exact.coefficients())
            .map(|(q, e)| (q - e).abs())
            .fold(0.0, f64::max);
        out.gates.push(GateRecord {
            name: "coefficient-check".into(),
            pass: max_abs_error <= check.tolerance,
            detail: format!("max |quadrature − closed form| = {max_abs_error:e} over {} modes", check.modes),
        });
        out.coefficient_check = Some(CoefficientCheckReport {
            intervals: check.intervals,
            modes: check.modes,
            max_abs_error,
            tolerance: check.tolerance,
        });
    }
    Ok(out)
}

fn expectation_gate(
    alpha: f64,
    expected: ExpectedVerdict,
    slope: Option<f64>,
    slope_tol: Option<f64>,
    got: &Verdict,
) -> GateRecord {
    let verdict_ok = got.label() == expected.label();
    let (slope_ok, slope_note) = match (slope, slope_tol, got) {
        (Some(want), Some(tol), Verdict::Diverging { slope }) => {
            let rel = (slope - want).abs() / want.abs();
            (rel <= tol, format!(", slope {slope:.4} vs {want} (relative error {rel:.3}, allowed {tol})"))
        }
        (Some(_), _, _) => (false, ", no slope to compare".into()),
        _ => (true, String::new()),
    };
    let measured = match got {
        Verdict::FiniteStable { relative_change } => format!("top-two change {relative_change:.4e}"),
        Verdict::Diverging { slope } => format!("increment slope {slope:.4}"),
        Verdict::SlowlyConvergent {
            relative_change,
            increment_slope,
        } => format!("top-two change {relative_change:.4e}, increment slope {increment_slope:.4}"),
    };
    GateRecord {
        name: format!("sweep alpha={alpha}"),
        pass: verdict_ok && slope_ok,
        detail: format!("expected {}, got {} ({measured}){slope_note}", expected.label(), got.label()),
    }
}
