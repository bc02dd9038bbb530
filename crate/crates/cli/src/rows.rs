//! Flat sweep rows in the fixed CSV column orders.

use serde::{Deserialize, Serialize};

use ftqc_core::concat_cost::ConcatReport;
use ftqc_core::surface_cost::SurfaceReport;

use crate::error::CliError;

/// One `sweep surface` row. Result columns are empty when the row failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub r: f64,
    pub p_ratio: f64,
    pub k0: Option<u64>,
    #[serde(rename = "N_T")]
    pub n_t: Option<u64>,
    #[serde(rename = "N_S")]
    pub n_s: Option<u64>,
    #[serde(rename = "N_H")]
    pub n_h: Option<u64>,
    pub d: Option<u32>,
    #[serde(rename = "S_R")]
    pub s_r: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "Q")]
    pub q: Option<u64>,
    pub distill_level: Option<u32>,
    pub factory_logical_qubits: Option<u64>,
    pub physical_qubits: Option<u64>,
    pub wall_seconds: Option<f64>,
    pub error: Option<String>,
}

impl SurfaceRow {
    pub fn from_result(
        n: usize,
        m: u32,
        r: f64,
        p_ratio: f64,
        result: &Result<SurfaceReport, String>,
    ) -> Self {
        let mut row = SurfaceRow {
            n,
            m,
            r,
            p_ratio,
            k0: None,
            n_t: None,
            n_s: None,
            n_h: None,
            d: None,
            s_r: None,
            k: None,
            q: None,
            distill_level: None,
            factory_logical_qubits: None,
            physical_qubits: None,
            wall_seconds: None,
            error: None,
        };
        match result {
            Ok(rep) => {
                row.k0 = Some(rep.k0);
                row.n_t = Some(rep.counts.n_t);
                row.n_s = Some(rep.counts.n_s);
                row.n_h = Some(rep.counts.n_h);
                row.d = Some(rep.d);
                row.s_r = Some(rep.s_r);
                row.k = Some(rep.k);
                row.q = Some(rep.q);
                row.distill_level = Some(rep.distill_level);
                row.factory_logical_qubits = Some(rep.factory_logical_qubits);
                row.physical_qubits = Some(rep.physical_qubits);
                row.wall_seconds = Some(rep.wall_seconds);
            }
            Err(e) => row.error = Some(e.clone()),
        }
        row
    }
}

/// One `sweep concat` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcatRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub k0: Option<u64>,
    pub ec_needed: Option<bool>,
    pub level: Option<u32>,
    #[serde(rename = "S_R")]
    pub s_r: Option<u64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub physical_qubits: Option<u64>,
    pub wall_seconds: Option<f64>,
    pub error: Option<String>,
}

impl ConcatRow {
    pub fn from_result(n: usize, m: u32, result: &Result<ConcatReport, String>) -> Self {
        match result {
            Ok(rep) => ConcatRow {
                n,
                m,
                k0: Some(rep.k0),
                ec_needed: Some(rep.ec_needed),
                level: Some(rep.level),
                s_r: Some(rep.s_r),
                k: Some(rep.k),
                physical_qubits: Some(rep.physical_qubits),
                wall_seconds: Some(rep.wall_seconds),
                error: None,
            },
            Err(e) => ConcatRow {
                n,
                m,
                k0: None,
                ec_needed: None,
                level: None,
                s_r: None,
                k: None,
                physical_qubits: None,
                wall_seconds: None,
                error: Some(e.clone()),
            },
        }
    }
}

pub fn to_csv<R: Serialize>(rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv<R: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<R>, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(CliError::from))
        .collect()
}
