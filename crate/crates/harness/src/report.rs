//! CSV and markdown output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, HarnessResult};
use crate::oracle::OracleRow;
use crate::study::{CoverageReport, PitStudy};

pub const COVERAGE_HEADER: &str = "setting,algorithm,acceptance_proportion,coverage,coverage_se,median_size,ratio";

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.6}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn coverage_csv(reports: &[CoverageReport]) -> String {
    let mut out = String::from(COVERAGE_HEADER);
    out.push('\n');
    for r in reports {
        for arm in &r.arms {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.setting,
                arm.arm.label(),
                opt(r.acceptance_proportion),
                num(arm.coverage),
                num(arm.coverage_se),
                num(arm.median_size),
                opt(r.ratio)
            );
        }
    }
    out
}

pub fn coverage_markdown(reports: &[CoverageReport]) -> String {
    let mut out = String::from(
        "| setting | algorithm | acceptance proportion | coverage | SE | median size | median ESS | failed | ratio |\n\
         |---|---|---|---|---|---|---|---|---|\n",
    );
    for r in reports {
        for arm in &r.arms {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.3} | {:.3} | {:.4} | {:.1} | {} | {} |",
                r.setting,
                arm.arm.label(),
                r.acceptance_proportion.map_or("-".into(), |p| p.to_string()),
                arm.coverage,
                arm.coverage_se,
                arm.median_size,
                arm.median_ess,
                arm.failed,
                r.ratio.map_or("-".into(), |v| format!("{v:.3}"))
            );
        }
    }
    for r in reports {
        for arm in r.arms.iter().filter(|a| a.error.is_some()) {
            let _ = writeln!(
                out,
                "\n{} / {}: {}",
                r.setting,
                arm.arm.label(),
                arm.error.as_deref().unwrap_or_default()
            );
        }
    }
    if !reports.is_empty() {
        let sampler: usize = reports.iter().map(|r| r.sampler_simulations).sum();
        let setup: usize = reports.iter().map(|r| r.setup_simulations).sum();
        let _ = writeln!(out, "\nModel simulations: {sampler} in samplers, {setup} in pilots and minibatch estimators.");
    }
    out
}

pub fn pit_csv(studies: &[PitStudy]) -> String {
    let mut out = String::from("setting,replicates,failed,ks,critical,pass\n");
    for s in studies {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.setting,
            s.report.replicates,
            s.failed,
            num(s.report.ks),
            num(s.report.critical),
            s.report.pass
        );
    }
    out
}

pub fn pit_markdown(studies: &[PitStudy]) -> String {
    let mut out = String::from("| setting | replicates | KS | critical (1%) | result |\n|---|---|---|---|---|\n");
    for s in studies {
        let _ = writeln!(
            out,
            "| {} | {} | {:.4} | {:.4} | {} |",
            s.setting,
            s.report.replicates,
            s.report.ks,
            s.report.critical,
            if s.report.pass { "pass" } else { "fail" }
        );
    }
    out
}

pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut out = String::from(
        "n,epsilon,analytic_mean,analytic_var,sampler_mean,sampler_var,ks,acceptance_rate,empirical_rate\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            num(r.epsilon),
            num(r.analytic_mean),
            num(r.analytic_var),
            num(r.sampler_mean),
            num(r.sampler_var),
            num(r.ks),
            num(r.acceptance_rate),
            num(r.empirical_rate)
        );
    }
    out
}

pub fn curve_csv(curve: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("n,epsilon,acceptance_rate\n");
    for &(n, eps, rate) in curve {
        let _ = writeln!(out, "{n},{},{rate:.6e}", num(eps));
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> HarnessResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| HarnessError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write `<stem>.csv` and `<stem>.md` under `dir`; returns both paths.
pub fn emit_report(reports: &[CoverageReport], dir: &Path, stem: &str) -> HarnessResult<(PathBuf, PathBuf)> {
    let csv = dir.join(format!("{stem}.csv"));
    let md = dir.join(format!("{stem}.md"));
    write_file(&csv, &coverage_csv(reports))?;
    write_file(&md, &coverage_markdown(reports))?;
    Ok((csv, md))
}
