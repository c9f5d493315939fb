//! Artifact emission: CSV and JSON views of tables, estimates and reports.
//!
//! Schemas are versioned through the `schema_version` field of the JSON
//! payloads; the CSV column set is fixed:
//! `bin,class,base_vertex,count,weight_num,weight_den,weight_float`.

use anyhow::{Context, Result};
use bridgewalk::enumerate::{AggClass, AggregateTable};
use bridgewalk::estimate::EstimateReport;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).with_context(|| format!("writing {path:?}"))?;
    Ok(())
}

fn class_name(class: AggClass) -> &'static str {
    match class {
        AggClass::Sigma => "sigma",
        AggClass::HalfSpace => "half_space",
        AggClass::Bridge => "bridge",
    }
}

/// Binned CSV view of an aggregate table.
pub fn aggregates_csv(table: &AggregateTable) -> String {
    let mut out = String::from("bin,class,base_vertex,count,weight_num,weight_den,weight_float\n");
    for b in 0..table.base_count() {
        let base = table.bases[b].base.to_string();
        for class in [AggClass::Sigma, AggClass::HalfSpace, AggClass::Bridge] {
            for m in 0..=table.m_max {
                let bucket = table.bin(b, class, m);
                let (num, den) = match bucket.weight.as_rat() {
                    Some(r) => (r.numer().to_string(), r.denom().to_string()),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(
                    out,
                    "{m},{},\"{base}\",{},{num},{den},{}",
                    class_name(class),
                    bucket.count,
                    bucket.weight.to_f64()
                );
            }
        }
    }
    out
}

/// CSV of the `w^(1/m)` sequences and certified bounds for plotting.
pub fn sequences_csv(estimate: &EstimateReport, bounds: &EstimateReport) -> String {
    let mut out = String::from("bin,sigma_root,bridge_root,lower_bound,upper_bound\n");
    let max_bin = estimate
        .sigma_sequence
        .iter()
        .map(|e| e.bin)
        .chain(bounds.lower_bounds.iter().map(|e| e.bin))
        .chain(bounds.upper_bounds.iter().map(|e| e.bin))
        .max()
        .unwrap_or(0);
    for m in 1..=max_bin {
        let field = |entries: &[bridgewalk::estimate::SequenceEntry]| {
            entries
                .iter()
                .find(|e| e.bin == m)
                .map(|e| e.value.to_string())
                .unwrap_or_default()
        };
        let _ = writeln!(
            out,
            "{m},{},{},{},{}",
            field(&estimate.sigma_sequence),
            field(&estimate.bridge_sequence),
            field(&bounds.lower_bounds),
            field(&bounds.upper_bounds),
        );
    }
    out
}

pub fn to_json_pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
