//! Parallel path sampling and Monte Carlo gates against the moment oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use timereg::empirical::{
    discrete_l2, estimate, l2_grid_bias, lag_sums_with, oracle_gate, seminorm_from_lag_sums, seminorm_grid_bias,
};
use timereg::moments::{l2_second_moment, seminorm_second_moment, RegularityQuery};
use timereg::sampler::PathSampler;
use timereg::{KernelScheme, KernelWeights, PathEnsemble, SpectralOperator, SpectralVector, TimeGrid};

use crate::engine::{GateRecord, Problem};
use crate::fft::FftAutocorrelation;
use crate::scenario::MonteCarloSpec;

/// Samples `n_paths` paths split into `shards` contiguous ranges that are
/// generated independently and concatenated. The result does not depend on
/// `shards` or on the thread count.
pub fn sample_ensemble(
    a: &SpectralOperator,
    x: &SpectralVector,
    grid: TimeGrid,
    n_paths: usize,
    seed: u64,
    shards: usize,
) -> timereg::Result<PathEnsemble> {
    let sampler = PathSampler::new(a, x, grid, seed)?;
    let len = sampler.path_len();
    let shards = shards.clamp(1, n_paths.max(1));
    let per = n_paths.div_ceil(shards);
    let parts: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let range = (s * per).min(n_paths)..((s + 1) * per).min(n_paths);
            let mut values = vec![0.0; range.len() * len];
            values
                .par_chunks_mut(len)
                .zip(range)
                .for_each(|(chunk, p)| sampler.sample_into(p as u64, chunk));
            values
        })
        .collect();
    PathEnsemble::from_values(grid, seed, a.truncation(), n_paths, parts.concat())
}

/// Per-path discrete seminorms, computed in parallel and returned in path order.
pub fn seminorm_values(ensemble: &PathEnsemble, weights: &KernelWeights, a: &SpectralOperator, theta: f64) -> Vec<f64> {
    ensemble
        .values()
        .par_chunks(ensemble.path_len())
        .map_init(FftAutocorrelation::default, |fft, path| {
            seminorm_from_lag_sums(weights, &lag_sums_with(path, a, theta, &ensemble.grid, fft))
        })
        .collect()
}

pub fn l2_values(ensemble: &PathEnsemble, a: &SpectralOperator, theta: f64) -> Vec<f64> {
    ensemble
        .values()
        .par_chunks(ensemble.path_len())
        .map(|path| discrete_l2(path, &ensemble.grid, a, theta))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct McRow {
    pub quantity: String,
    pub alpha: f64,
    pub theta: f64,
    pub scheme: Option<KernelScheme>,
    pub n_paths: usize,
    pub steps: usize,
    pub mean: f64,
    pub std_error: f64,
    pub oracle: f64,
    pub bias: f64,
    pub k_sigma: f64,
    pub deviation: f64,
    pub allowance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct McReport {
    pub horizon: f64,
    pub steps: usize,
    pub seed: u64,
    pub n_paths: usize,
    pub modes: usize,
    pub rows: Vec<McRow>,
}

/// Samples the scenario's ensemble.
pub fn sample(problem: &Problem, spec: &MonteCarloSpec) -> timereg::Result<PathEnsemble> {
    let grid = TimeGrid::new(problem.scenario.horizon, spec.steps)?;
    sample_ensemble(
        &problem.operator,
        &problem.data,
        grid,
        spec.paths,
        spec.seed,
        rayon::current_num_threads(),
    )
}

/// Gates an ensemble: the L² moment in `D(A^{1/2})` and the seminorm moment for
/// each configured α, each against the oracle with a grid-doubling bias term.
pub fn verify(problem: &Problem, spec: &MonteCarloSpec, ensemble: &PathEnsemble) -> timereg::Result<(McReport, Vec<GateRecord>)> {
    let s = &problem.scenario;
    let (a, x) = (&problem.operator, &problem.data);
    if ensemble.modes != a.truncation() {
        return Err(timereg::Error::LengthMismatch {
            operator: a.truncation(),
            vector: ensemble.modes,
        });
    }
    let grid = ensemble.grid;
    let mut rows = Vec::new();

    let l2 = estimate(&l2_values(ensemble, a, 0.5), 0.0, 0.5, None);
    let oracle = l2_second_moment(a, x, s.horizon, 0.5)?;
    let bias = l2_grid_bias(a, x, grid, 0.5)?;
    rows.push(row("l2", &l2, oracle, bias, spec.k_sigma, grid)?);

    for &alpha in &spec.alphas {
        let theta = s.query.space.theta(alpha);
        let weights = KernelWeights::new(grid, alpha, spec.scheme)?;
        let est = estimate(&seminorm_values(ensemble, &weights, a, theta), alpha, theta, Some(spec.scheme));
        let q = RegularityQuery::new(alpha, s.horizon, theta)?;
        let oracle = seminorm_second_moment(a, x, &q, s.tolerance)?;
        let bias = seminorm_grid_bias(a, x, grid, alpha, theta, spec.scheme)?;
        rows.push(row("seminorm", &est, oracle, bias, spec.k_sigma, grid)?);
    }

    let gates = rows
        .iter()
        .map(|r| GateRecord {
            name: if r.quantity == "l2" {
                "mc l2".to_string()
            } else {
                format!("mc seminorm alpha={}", r.alpha)
            },
            pass: r.pass,
            detail: format!(
                "|{:.6} − {:.6}| = {:.3e} vs allowance {:.3e} ({}·SE {:.3e} + bias {:.3e})",
                r.mean, r.oracle, r.deviation, r.allowance, r.k_sigma, r.std_error, r.bias
            ),
        })
        .collect();
    Ok((
        McReport {
            horizon: grid.horizon(),
            steps: grid.steps(),
            seed: ensemble.seed,
            n_paths: ensemble.n_paths,
            modes: ensemble.modes,
            rows,
        },
        gates,
    ))
}

fn row(
    quantity: &str,
    est: &timereg::SeminormEstimate,
    oracle: f64,
    bias: f64,
    k_sigma: f64,
    grid: TimeGrid,
) -> timereg::Result<McRow> {
    let g = oracle_gate(est, oracle, k_sigma, bias)?;
    Ok(McRow {
        quantity: quantity.into(),
        alpha: est.alpha,
        theta: est.theta,
        scheme: est.kernel_scheme,
        n_paths: est.n_paths,
        steps: grid.steps(),
        mean: est.mean,
        std_error: est.std_error,
        oracle,
        bias,
        k_sigma,
        deviation: g.deviation,
        allowance: g.allowance,
        pass: g.pass,
    })
}
