//! Equivalence reports: rows of competing norm evaluations, per-pair
//! summaries, CSV/JSON emission and the log-ratio histogram sidecar.

use std::fs;
use std::io::Write;
use std::path::Path;

use opharm_core::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// JSON has no infinity literal; `p = ∞` crosses the wire as "inf".
mod p_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportRow {
    pub field_id: usize,
    #[serde(with = "p_serde")]
    pub p: f64,
    pub method_a: String,
    pub method_b: String,
    pub norm_a: f64,
    pub norm_b: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PairSummary {
    #[serde(with = "p_serde")]
    pub p: f64,
    pub method_a: String,
    pub method_b: String,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub geomean: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct EquivalenceReport {
    pub rows: Vec<ReportRow>,
    pub summary: Vec<PairSummary>,
}

impl EquivalenceReport {
    pub fn push(
        &mut self,
        field_id: usize,
        p: f64,
        method_a: &str,
        method_b: &str,
        norm_a: f64,
        norm_b: f64,
    ) {
        self.rows.push(ReportRow {
            field_id,
            p,
            method_a: method_a.to_string(),
            method_b: method_b.to_string(),
            norm_a,
            norm_b,
            ratio: norm_a / norm_b,
        });
    }

    /// Rebuilds the per-(p, pair) summaries from the rows.
    pub fn summarize(&mut self) {
        let mut keys: Vec<(f64, String, String)> = Vec::new();
        for r in &self.rows {
            let key = (r.p, r.method_a.clone(), r.method_b.clone());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        self.summary = keys
            .into_iter()
            .map(|(p, a, b)| {
                let ratios: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.p == p && r.method_a == a && r.method_b == b)
                    .map(|r| r.ratio)
                    .filter(|r| r.is_finite() && *r > 0.0)
                    .collect();
                let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = ratios.iter().cloned().fold(0.0f64, f64::max);
                let geomean = if ratios.is_empty() {
                    f64::NAN
                } else {
                    (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
                };
                PairSummary {
                    p,
                    method_a: a,
                    method_b: b,
                    min_ratio: min,
                    max_ratio: max,
                    geomean,
                }
            })
            .collect();
    }

    /// Extremes of ln(ratio) over all finite rows.
    pub fn log_ratio_band(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in &self.rows {
            if r.ratio.is_finite() && r.ratio > 0.0 {
                lo = lo.min(r.ratio.ln());
                hi = hi.max(r.ratio.ln());
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Domain(format!("unknown report format `{other}`"))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

fn fmt_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

pub fn to_csv(rep: &EquivalenceReport) -> String {
    let mut out = String::from("field_id,p,method_a,method_b,norm_a,norm_b,ratio\n");
    for r in &rep.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.field_id,
            fmt_p(r.p),
            r.method_a,
            r.method_b,
            r.norm_a,
            r.norm_b,
            r.ratio
        ));
    }
    out
}

/// Histogram of ln(ratio) in 32 uniform bins, for external plotting.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HistogramSidecar {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

pub fn histogram(rep: &EquivalenceReport) -> HistogramSidecar {
    const BINS: usize = 32;
    let logs: Vec<f64> = rep
        .rows
        .iter()
        .filter(|r| r.ratio.is_finite() && r.ratio > 0.0)
        .map(|r| r.ratio.ln())
        .collect();
    if logs.is_empty() {
        return HistogramSidecar {
            bins: BINS,
            lo: 0.0,
            hi: 0.0,
            counts: vec![0; BINS],
        };
    }
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo).max(1e-300);
    let mut counts = vec![0u64; BINS];
    for l in logs {
        let idx = (((l - lo) / width) * BINS as f64) as usize;
        counts[idx.min(BINS - 1)] += 1;
    }
    HistogramSidecar {
        bins: BINS,
        lo,
        hi,
        counts,
    }
}

/// Writes the report plus its histogram sidecar into `dir`; returns the
/// main report path.
pub fn emit_report(
    rep: &EquivalenceReport,
    format: ReportFormat,
    dir: &Path,
    stem: &str,
) -> Result<std::path::PathBuf> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Domain(format!("cannot create {}: {e}", dir.display())))?;
    let main_path = dir.join(format!("{stem}.{}", format.extension()));
    let payload = match format {
        ReportFormat::Csv => to_csv(rep),
        ReportFormat::Json => serde_json::to_string_pretty(rep)
            .map_err(|e| Error::Domain(format!("serialize: {e}")))?,
    };
    let mut file = fs::File::create(&main_path)
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", main_path.display())))?;
    file.write_all(payload.as_bytes())
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", main_path.display())))?;

    let hist_path = dir.join(format!("{stem}.hist.json"));
    let hist = serde_json::to_string_pretty(&histogram(rep))
        .map_err(|e| Error::Domain(format!("serialize histogram: {e}")))?;
    fs::write(&hist_path, hist)
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", hist_path.display())))?;
    Ok(main_path)
}

pub fn parse_json_report(text: &str) -> Result<EquivalenceReport> {
    serde_json::from_str(text).map_err(|e| Error::Domain(format!("parse report: {e}")))
}
