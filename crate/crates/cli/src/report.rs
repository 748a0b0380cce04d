//! Files written by the run commands. Field names here are the machine
//! interface and are listed in the README.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use fdp_equicorr::asymptotics::{AsymptoticLaw, Regime};
use fdp_equicorr::experiment::{Check, ExperimentConfig, ExperimentSummary, RateRow};
use fdp_equicorr::procedures::ThresholdProcedure;
use serde::Serialize;

use crate::args::FlagMap;

#[derive(Serialize)]
pub struct ConfigEcho<'a> {
    pub version: &'static str,
    pub command: &'static str,
    pub flags: &'a FlagMap,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<&'a ExperimentConfig>,
}

#[derive(Serialize)]
pub struct SummaryFile<'a> {
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a ExperimentConfig,
    #[serde(flatten)]
    pub summary: &'a ExperimentSummary,
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
pub struct RateStudyFile<'a> {
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a ExperimentConfig,
    pub rows: Vec<RateStudyEntry<'a>>,
    /// Checks of the largest m only.
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
pub struct RateStudyEntry<'a> {
    #[serde(flatten)]
    pub row: &'a RateRow,
    pub center: Option<f64>,
    pub mc_se_variance: Option<f64>,
    pub theory: Option<&'a AsymptoticLaw>,
    pub theory_note: Option<&'a str>,
}

/// BH constants computed directly, next to the generic values.
#[derive(Debug, Serialize)]
pub struct ClosedForm {
    pub sigma2_t: f64,
    pub c2_t: f64,
    pub variance: f64,
    pub rel_err_sigma2_t: f64,
    pub rel_err_c2_t: f64,
}

#[derive(Debug, Serialize)]
pub struct TheoryReport {
    pub version: &'static str,
    pub command: &'static str,
    pub flags: FlagMap,
    pub procedure: ThresholdProcedure,
    pub regime: Regime,
    pub t_star: f64,
    /// `q(t*)`.
    pub center: f64,
    pub c_t: f64,
    pub c2_t: f64,
    pub sigma2_t: f64,
    pub variance: f64,
    pub rate: String,
    /// `σ²(T) + θc(T)²` with the requested `θ` (0 under `--case-ii`).
    pub variance_case_i: f64,
    /// `c(T)²`.
    pub variance_case_ii: f64,
    pub closed_form: Option<ClosedForm>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}
