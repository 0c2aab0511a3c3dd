//! CSV rendering of experiment and sweep results.
//!
//! Headers are stable. Real values are printed with 6 significant digits;
//! counts are printed exactly. Normalized (divided by `n`) columns carry a
//! `_norm` suffix.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiment::{ExperimentOutcome, SweepOutcome};
use crate::metrics::improvement;

pub const REPORT_HEADER: &str = "policy,label,replicates,mean_cs_norm,se_cs_norm,mean_mnlcs,se_mnlcs,ct_norm,mnlct,bc_cs_norm,bc_mnlcs,impr_mean_cs_pct,impr_mean_mnlcs_pct";
pub const CS_DIST_HEADER: &str = "policy,rank,cover_steps";
pub const MNL_DIST_HEADER: &str = "policy,rank,max_node_load";
pub const PARTIAL_HEADER: &str = "policy,fraction,mean_steps_norm";
pub const VISIT_HIST_HEADER: &str = "policy,visits_bin,nodes";
pub const SWEEP_HEADER: &str = "d,h,mean_cs_norm,mean_mnlcs";

/// Formats `x` with 6 significant digits, without exponent notation or
/// trailing zeros.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("valid float");
    format!("{rounded}")
}

/// Rendered CSV files, keyed by file name.
pub fn experiment_csvs(outcome: &ExperimentOutcome) -> Vec<(&'static str, String)> {
    let mut report = format!("{REPORT_HEADER}\n");
    let baseline = &outcome.reports[0].report;
    for pr in &outcome.reports {
        let r = &pr.report;
        let impr = |b: f64, e: f64| improvement(b, e).map(sig6).unwrap_or_default();
        let _ = writeln!(
            report,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            pr.policy,
            pr.policy.label(),
            r.replicates,
            sig6(r.mean_cs_normalized),
            sig6(r.se_cs_normalized),
            sig6(r.mean_mnlcs),
            sig6(r.se_mnlcs),
            sig6(r.ct_normalized),
            r.mnlct,
            sig6(r.bc_cs_normalized),
            r.bc_mnlcs,
            impr(baseline.mean_cs_normalized, r.mean_cs_normalized),
            impr(baseline.mean_mnlcs, r.mean_mnlcs),
        );
    }

    let mut cs = format!("{CS_DIST_HEADER}\n");
    let mut mnl = format!("{MNL_DIST_HEADER}\n");
    let mut partial = format!("{PARTIAL_HEADER}\n");
    let mut hist = format!("{VISIT_HIST_HEADER}\n");
    for pr in &outcome.reports {
        let r = &pr.report;
        for (rank, v) in r.cs_distribution.iter().enumerate() {
            let _ = writeln!(cs, "{},{rank},{v}", pr.policy);
        }
        for (rank, v) in r.mnl_distribution.iter().enumerate() {
            let _ = writeln!(mnl, "{},{rank},{v}", pr.policy);
        }
        for (f, v) in outcome.fractions.iter().zip(&r.partial_cover_curve) {
            let _ = writeln!(partial, "{},{},{}", pr.policy, sig6(*f), sig6(*v));
        }
        for (bin, count) in r.visit_distribution.iter().enumerate() {
            let _ = writeln!(hist, "{},{bin},{count}", pr.policy);
        }
    }
    vec![
        ("report.csv", report),
        ("cs_dist.csv", cs),
        ("mnl_dist.csv", mnl),
        ("partial_cover.csv", partial),
        ("visit_hist.csv", hist),
    ]
}

pub fn sweep_csv(outcome: &SweepOutcome) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for row in &outcome.rows {
        let _ =
            writeln!(out, "{},{},{},{}", row.d, row.h, sig6(row.mean_cs_normalized), sig6(row.mean_mnlcs));
    }
    out
}

/// Writes all files into `dir`. If any write fails, files already written
/// by this call are removed again.
pub fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, body) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(written)
}
