//! Run reports and their CSV renderings.
//!
//! Field names in `report.json` and the CSV column sets are versioned by
//! [`FORMAT_VERSION`].

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use timereg::CertificateReport;

use crate::engine::{CoefficientCheckReport, GateRecord, MomentRow, SweepReport};
use crate::montecarlo::McReport;
use crate::scenario::Scenario;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Versions {
    pub format: u32,
    pub timereg: String,
    pub lab: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            format: FORMAT_VERSION,
            timereg: timereg::VERSION.into(),
            lab: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub versions: Versions,
    pub command: String,
    /// Normalized scenario: overrides applied, output directory dropped.
    pub scenario: Scenario,
    pub moments: Vec<MomentRow>,
    pub certificates: Vec<CertificateReport>,
    pub sweeps: Vec<SweepReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_check: Option<CoefficientCheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<McReport>,
    pub gates: Vec<GateRecord>,
    pub all_gates_pass: bool,
}

#[derive(Debug, Serialize)]
struct MomentCsv<'a> {
    alpha: f64,
    theta: f64,
    truncation: usize,
    frac_norm: f64,
    seminorm_moment: f64,
    l2_moment: f64,
    ratio: Option<f64>,
    verdict: &'a str,
}

#[derive(Debug, Serialize)]
struct SweepCsv<'a> {
    alpha: f64,
    truncation: usize,
    seminorm_moment: f64,
    increment: Option<f64>,
    verdict: &'a str,
}

#[derive(Debug, Serialize)]
struct PlotCsv {
    alpha: f64,
    truncation: usize,
    seminorm_moment: f64,
    log2_truncation: f64,
    log10_moment: f64,
    log10_increment: Option<f64>,
}

#[derive(Debug, Serialize)]
struct McCsv<'a> {
    quantity: &'a str,
    alpha: f64,
    theta: f64,
    scheme: &'a str,
    n_paths: usize,
    steps: usize,
    mean: f64,
    std_error: f64,
    oracle: f64,
    bias: f64,
    k_sigma: f64,
    deviation: f64,
    allowance: f64,
    pass: bool,
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: &[&str]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()
}

impl RunReport {
    /// Writes `report.json` and the CSV tables into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        json.push('\n');
        fs::write(dir.join("report.json"), json)?;
        self.write_tables(dir)
    }

    /// Writes only the CSV tables; `report.json` is left alone.
    pub fn write_tables(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        write_rows(
            &dir.join("moments.csv"),
            self.moments.iter().map(|m| MomentCsv {
                alpha: m.alpha,
                theta: m.theta,
                truncation: m.truncation,
                frac_norm: m.frac_norm,
                seminorm_moment: m.seminorm_moment,
                l2_moment: m.l2_moment,
                ratio: m.ratio,
                verdict: m.verdict.as_deref().unwrap_or(""),
            }),
            &["alpha", "theta", "truncation", "frac_norm", "seminorm_moment", "l2_moment", "ratio", "verdict"],
        )?;

        let sweep_rows = self.sweeps.iter().flat_map(|s| {
            s.truncations.iter().zip(&s.values).enumerate().map(move |(i, (&n, &v))| SweepCsv {
                alpha: s.alpha,
                truncation: n,
                seminorm_moment: v,
                increment: i.checked_sub(1).map(|j| s.increments[j]),
                verdict: s.verdict.label(),
            })
        });
        write_rows(
            &dir.join("sweep.csv"),
            sweep_rows,
            &["alpha", "truncation", "seminorm_moment", "increment", "verdict"],
        )?;

        let plot_rows = self.sweeps.iter().flat_map(|s| {
            s.truncations.iter().zip(&s.values).enumerate().map(move |(i, (&n, &v))| PlotCsv {
                alpha: s.alpha,
                truncation: n,
                seminorm_moment: v,
                log2_truncation: (n as f64).log2(),
                log10_moment: v.log10(),
                log10_increment: i
                    .checked_sub(1)
                    .map(|j| s.increments[j])
                    .filter(|d| *d > 0.0)
                    .map(f64::log10),
            })
        });
        write_rows(
            &dir.join("plot.csv"),
            plot_rows,
            &["alpha", "truncation", "seminorm_moment", "log2_truncation", "log10_moment", "log10_increment"],
        )?;

        let mc_rows = self.monte_carlo.iter().flat_map(|m| &m.rows).map(|r| McCsv {
            quantity: &r.quantity,
            alpha: r.alpha,
            theta: r.theta,
            scheme: match r.scheme {
                Some(timereg::KernelScheme::CellExact) => "cell-exact",
                Some(timereg::KernelScheme::DiagonalExcluded) => "diagonal-excluded",
                None => "",
            },
            n_paths: r.n_paths,
            steps: r.steps,
            mean: r.mean,
            std_error: r.std_error,
            oracle: r.oracle,
            bias: r.bias,
            k_sigma: r.k_sigma,
            deviation: r.deviation,
            allowance: r.allowance,
            pass: r.pass,
        });
        write_rows(
            &dir.join("mc.csv"),
            mc_rows,
            &[
                "quantity", "alpha", "theta", "scheme", "n_paths", "steps", "mean", "std_error", "oracle", "bias",
                "k_sigma", "deviation", "allowance", "pass",
            ],
        )
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}
