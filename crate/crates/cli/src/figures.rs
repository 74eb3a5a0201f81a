use std::fmt;
use std::path::PathBuf;

use nhaas_core::recipes::{
    aas, eps_critical, finite_wc, pure_aa, pure_stark, AasConfig, PureAaConfig, RegionFit, Scale, StarkConfig,
    WcScanConfig,
};
use nhaas_core::{critical_w, Boundary, EnsembleCurve};
use serde_json::json;

use crate::commands::{hybrid_config, print_region, quick_samples, scale, write_hybrid, write_region, Common, MIN_BOOT};
use crate::config::{List, Overrides, Resolved};
use crate::error::CliError;
use crate::output::{table_csv, Bundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    /// Pure AA exponents and W_c^(L) against g.
    Fig2,
    /// Pure Stark collapse, ε_c^(L), exponents against g.
    Fig3,
    /// Stark-direction collapse at W_c.
    Fig4,
    /// Collapse on the slice (W − W_c) L^{1/ν_δ} = 1.
    Fig5,
    /// Collapse on the slice (W − W_c) L^{1/ν_δ} = −1.
    Fig6,
    /// Hybrid collapse below W_c.
    Fig7,
    /// Collapse at W_c under periodic boundaries.
    Fig8,
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = *self as usize + 2;
        write!(f, "fig{n}")
    }
}

const PANEL_G: f64 = 0.5;
const EXPONENT_HEADER: [&str; 7] = ["g", "nu", "nu_sigma", "s", "s_sigma", "z", "z_sigma"];

fn exponent_row(g: f64, fit: &RegionFit) -> Vec<f64> {
    let mut row = vec![g];
    for name in ["nu", "s", "z"] {
        let e = fit.estimate(name);
        row.extend([e.value, e.sigma]);
    }
    row
}

fn take_gs(o: &mut Overrides, r: &mut Resolved, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let gs = o.take::<List<f64>>("gs")?.unwrap_or_else(|| List(default.to_vec()));
    r.push("gs", &gs);
    Ok(gs.0)
}

fn eps_table(bundle: &mut Bundle, curves: &[EnsembleCurve]) -> Result<(), CliError> {
    if let Ok(e) = eps_critical(curves) {
        let rows: Vec<Vec<f64>> = e
            .points
            .iter()
            .map(|p| vec![p.size as f64, 1.0 / p.size as f64, p.value])
            .collect();
        bundle.write("eps_critical.csv", &table_csv(&["L", "inv_L", "eps_c"], &rows))?;
    }
    Ok(())
}

pub fn reproduce(fig: Figure, mut o: Overrides) -> Result<PathBuf, CliError> {
    let mut r = Resolved::default();
    let scale = scale(&mut o, &mut r)?;
    let default_out = format!("nhaas-out/{fig}");
    let command = format!("reproduce {fig}");
    match fig {
        Figure::Fig2 => {
            let gs = take_gs(&mut o, &mut r, &[0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5])?;
            let mut aa = PureAaConfig::at(scale);
            let mut wc = WcScanConfig::at(scale);
            if let Some(n) = o.take("n_samples")? {
                aa.n_samples = n;
                wc.n_samples = n;
            }
            r.push("n_samples", aa.n_samples);
            let common = Common::take(&mut o, &default_out, &mut r)?;
            o.finish(&command)?;
            let runner = common.runner();
            let mut bundle = Bundle::create(&common.out)?;
            let (mut rows, mut wc_rows, mut per_g) = (Vec::new(), Vec::new(), Vec::new());
            for &g in &gs {
                let res = pure_aa(g, &aa, &runner)?;
                let scan = finite_wc(g, &wc, &runner)?;
                println!(
                    "g = {g}: nu = {:.4} ± {:.4}, s = {:.4} ± {:.4}, z = {:.4} ± {:.4}, W_c(L) = {:.4} (W_c = {:.4})",
                    res.nu.value,
                    res.nu.sigma,
                    res.s.value,
                    res.s.sigma,
                    res.z.value,
                    res.z.sigma,
                    scan.estimate.value,
                    critical_w(1.0, g)
                );
                bundle.curves(&format!("g{g}/xi_vs_delta.csv"), std::slice::from_ref(&res.xi_curve))?;
                bundle.curves(&format!("g{g}/critical_vs_L.csv"), &res.critical_curves)?;
                bundle.curves(&format!("g{g}/wc_scan_obc.csv"), std::slice::from_ref(&scan.obc))?;
                bundle.curves(&format!("g{g}/wc_scan_pbc.csv"), std::slice::from_ref(&scan.pbc))?;
                rows.push(vec![g, res.nu.value, res.nu.sigma, res.s.value, res.s.sigma, res.z.value, res.z.sigma]);
                wc_rows.push(vec![g, critical_w(1.0, g), scan.estimate.value]);
                per_g.push(json!({
                    "g": g,
                    "nu": res.nu,
                    "s": res.s,
                    "z": res.z,
                    "xi_window": res.window,
                    "wc_finite": scan.estimate,
                }));
            }
            bundle.write("exponents.csv", &table_csv(&EXPONENT_HEADER, &rows))?;
            bundle.write("wc_vs_g.csv", &table_csv(&["g", "wc_theory", "wc_finite"], &wc_rows))?;
            bundle.finish(&command, &r, json!({ "per_g": per_g }))
        }
        Figure::Fig3 => {
            let gs = take_gs(&mut o, &mut r, &[0.25, 0.5, 1.0])?;
            let common = Common::take(&mut o, &default_out, &mut r)?;
            o.finish(&command)?;
            let runner = common.runner();
            let cfg = StarkConfig::full();
            let mut bundle = Bundle::create(&common.out)?;
            let panel = pure_stark(PANEL_G, &cfg, &runner)?;
            print_region(&format!("g = {PANEL_G}"), &panel);
            let region = write_region(&mut bundle, "", &panel)?;
            eps_table(&mut bundle, &panel.curves)?;
            let mut rows = Vec::new();
            for &g in &gs {
                let fit = if g == PANEL_G { panel.clone() } else { pure_stark(g, &cfg, &runner)? };
                print_region(&format!("g = {g}"), &fit);
                rows.push(exponent_row(g, &fit));
            }
            bundle.write("exponents.csv", &table_csv(&EXPONENT_HEADER, &rows))?;
            bundle.finish(&command, &r, json!({ "panel_g": PANEL_G, "panel": region, "exponents": rows }))
        }
        Figure::Fig4 | Figure::Fig8 => {
            let gs = take_gs(&mut o, &mut r, &[0.5, 1.0, 1.5])?;
            let cfg = region_config(&mut o, &mut r, scale, None, fig == Figure::Fig8)?;
            let common = Common::take(&mut o, &default_out, &mut r)?;
            o.finish(&command)?;
            let runner = common.runner();
            let mut bundle = Bundle::create(&common.out)?;
            let mut rows = Vec::new();
            let mut per_g = Vec::new();
            for &g in &gs {
                let fit = aas(g, &cfg, &runner)?;
                print_region(&format!("g = {g}"), &fit);
                let prefix = format!("g{g}/");
                let mut v = write_region(&mut bundle, &prefix, &fit)?;
                v["g"] = json!(g);
                per_g.push(v);
                rows.push(exponent_row(g, &fit));
                if g == PANEL_G {
                    eps_table(&mut bundle, &fit.curves)?;
                }
            }
            bundle.write("exponents.csv", &table_csv(&EXPONENT_HEADER, &rows))?;
            bundle.finish(&command, &r, json!({ "per_g": per_g }))
        }
        Figure::Fig5 | Figure::Fig6 => {
            let c = if fig == Figure::Fig5 { 1.0 } else { -1.0 };
            let cfg = region_config(&mut o, &mut r, scale, Some(c), false)?;
            let common = Common::take(&mut o, &default_out, &mut r)?;
            o.finish(&command)?;
            let fit = aas(PANEL_G, &cfg, &common.runner())?;
            print_region(&format!("c = {c}"), &fit);
            let mut bundle = Bundle::create(&common.out)?;
            let mut v = write_region(&mut bundle, "", &fit)?;
            v["c"] = json!(c);
            bundle.finish(&command, &r, v)
        }
        Figure::Fig7 => {
            let cfg = hybrid_config(&mut o, &mut r, scale)?;
            let common = Common::take(&mut o, &default_out, &mut r)?;
            o.finish(&command)?;
            let stark = pure_stark(PANEL_G, &StarkConfig::full(), &common.runner())?;
            let mut bundle = Bundle::create(&common.out)?;
            let v = write_hybrid(&mut bundle, PANEL_G, stark.nu(), &cfg, &common)?;
            bundle.finish(&command, &r, v)
        }
    }
}

/// Region settings with only `n_samples` and `n_boot` exposed.
fn region_config(o: &mut Overrides, r: &mut Resolved, scale: Scale, slice: Option<f64>, periodic: bool) -> Result<AasConfig, CliError> {
    let mut cfg = AasConfig::at(scale);
    cfg.n_samples = quick_samples(scale, cfg.n_samples);
    cfg.slice = slice;
    if periodic {
        cfg.boundary = Boundary::Periodic;
    }
    if let Some(n) = o.take("n_samples")? {
        cfg.n_samples = n;
    }
    if let Some(n) = o.take("n_boot")? {
        cfg.n_boot = n;
    }
    if cfg.n_boot < MIN_BOOT {
        return Err(CliError::Usage(format!("`n_boot` must be at least {MIN_BOOT}")));
    }
    r.push("n_samples", cfg.n_samples);
    r.push("n_boot", cfg.n_boot);
    Ok(cfg)
}
