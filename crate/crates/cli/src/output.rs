use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use nhaas_core::recipes::RegionFit;
use nhaas_core::scaling::rescale;
use nhaas_core::store::curves_to_csv;
use nhaas_core::{CollapseFit, EnsembleCurve, Quantity, CODE_VERSION};
use serde_json::{json, Value};

use crate::config::Resolved;
use crate::error::CliError;

pub const REPORT_SCHEMA: u32 = 1;

/// Output directory of one command.
pub struct Bundle {
    dir: PathBuf,
    files: Vec<String>,
}

impl Bundle {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Bundle { dir, files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn curves(&mut self, name: &str, curves: &[EnsembleCurve]) -> Result<(), CliError> {
        self.write(name, &curves_to_csv(curves))
    }

    /// Rescaled data of the three collapses of a region, one file each.
    pub fn rescaled_region(&mut self, prefix: &str, fit: &RegionFit) -> Result<(), CliError> {
        for q in Quantity::ALL {
            let f = fit.fit(q);
            self.write(&format!("{prefix}rescaled_{q}.csv"), &rescaled_csv(&fit.curves, f))?;
        }
        Ok(())
    }

    /// `config.txt` plus `report.json`; the report lists every file written.
    pub fn finish(mut self, command: &str, config: &Resolved, results: Value) -> Result<PathBuf, CliError> {
        self.write("config.txt", &format!("# nhaas {command}\n{}", config.to_text()))?;
        let report = json!({
            "schema_version": REPORT_SCHEMA,
            "command": command,
            "code_version": CODE_VERSION,
            "config": config.to_json(),
            "files": self.files,
            "results": results,
        });
        fs::write(self.dir.join("report.json"), serde_json::to_string_pretty(&report).expect("plain json"))?;
        Ok(self.dir)
    }
}

/// Power of `L` multiplying the quantity in a fit.
fn y_power(fit: &CollapseFit) -> f64 {
    let nu = fit.get("nu").unwrap_or(1.0);
    match fit.quantity {
        Quantity::Xi => -1.0,
        Quantity::Ipr => fit.get("s").unwrap_or(0.0) / nu,
        Quantity::Gap => fit.get("z").unwrap_or(0.0),
    }
}

pub fn rescaled_csv(curves: &[EnsembleCurve], fit: &CollapseFit) -> String {
    let nu = fit.get("nu").unwrap_or(1.0);
    let mut out = String::from("L,x_rescaled,y_rescaled\n");
    for c in curves {
        let r = rescale(c, fit.quantity, nu, y_power(fit));
        for (x, y) in r.x.iter().zip(&r.y) {
            let _ = writeln!(out, "{},{x:e},{y:e}", c.size);
        }
    }
    out
}

/// Hybrid variant: `x = ε L^{1/ν} (|δ| L^{1/ν_δ})^κ`, plus a `delta` column.
pub fn hybrid_csv(curves: &[(f64, EnsembleCurve)], fit: &CollapseFit) -> String {
    let nu = fit.get("nu").unwrap_or(1.0);
    let nu_delta = fit.get("nu_delta").unwrap_or(1.0);
    let kappa = fit.get("kappa").unwrap_or(0.0);
    let mut out = String::from("L,x_rescaled,y_rescaled,delta\n");
    for (delta, c) in curves {
        let l = c.size as f64;
        let f = (delta.abs() * l.powf(1.0 / nu_delta)).powf(kappa);
        let r = rescale(c, Quantity::Xi, nu, -1.0);
        for (x, y) in r.x.iter().zip(&r.y) {
            let _ = writeln!(out, "{},{:e},{y:e},{delta}", c.size, x * f);
        }
    }
    out
}

/// Exponents of a region with their bootstrap sigmas.
pub fn region_json(fit: &RegionFit) -> Value {
    let est = |name| serde_json::to_value(fit.estimate(name)).expect("plain json");
    json!({
        "exponents": {
            "nu": est("nu"),
            "s": est("s"),
            "s_over_nu": est("s_over_nu"),
            "z": est("z"),
        },
        "fits": {
            "xi": fit.xi,
            "ipr": fit.ipr,
            "gap": fit.gap,
        },
    })
}

/// Numeric CSV with a header row.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
