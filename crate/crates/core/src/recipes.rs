//! Figure-level pipelines: sweep, fit and report one scaling region at a
//! time. Each has a paper-scale configuration (`full`) and a reduced one
//! (`quick`) that keeps the grids and sizes but averages fewer phases.

use serde::{Deserialize, Serialize};

use crate::ensemble::{log_grid, run_sweep, run_sweep_with_workers, Axis, EnsembleCurve, Slice, SweepOutput, SweepSpec};
use crate::error::{Error, Result};
use crate::model::{critical_w, Boundary, ModelParams};
use crate::scaling::{
    bootstrap_ci, collapse_1d, extract_epsc_finite, extract_wc_finite, extrapolate_inverse_size, hybrid_collapse,
    kappa_theory, powerlaw_fit, stable_slope_range, CollapseFit, CollapseForm, CollapseOptions,
    CriticalPointEstimate, Quantity, Window,
};
use crate::store::Store;

/// ν_δ of the non-Hermitian quasiperiodic transition, used to place
/// two-variable slices and in the hybrid variable.
pub const NU_DELTA: f64 = 0.96;

/// Correlation exponent of the chain at `W = W_c`, pinned in the hybrid fit.
pub const NU_AAS: f64 = 0.33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Quick,
    Full,
}

/// Runs sweeps, optionally through a result cache and a fixed worker count.
#[derive(Debug, Clone, Copy, Default)]
pub struct Runner<'a> {
    pub store: Option<&'a Store>,
    pub workers: Option<usize>,
}

impl Runner<'_> {
    pub fn sweep(&self, spec: &SweepSpec) -> Result<SweepOutput> {
        if let Some(store) = self.store {
            if let Some(hit) = store.get(spec)? {
                if let Some(samples) = hit.samples {
                    return Ok(SweepOutput {
                        curves: hit.curves,
                        samples,
                        failures: Vec::new(),
                    });
                }
            }
        }
        let out = match self.workers {
            Some(w) => run_sweep_with_workers(spec, w)?,
            None => run_sweep(spec)?,
        };
        if let Some(store) = self.store {
            // an entry for another sample count keeps its slot
            match store.put(spec, &out, true) {
                Ok(_) | Err(Error::Collision { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

/// Value with a one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn new(value: f64, sigma: f64) -> Self {
        Estimate { value, sigma }
    }

    /// `|a − b| ≤ k·sqrt(σa² + σb²)`.
    pub fn consistent_with(&self, other: &Estimate, k: f64) -> bool {
        (self.value - other.value).abs() <= k * self.sigma.hypot(other.sigma)
    }
}

// ---------------------------------------------------------------- pure AA

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PureAaConfig {
    /// Size of the ξ(δ) scan.
    pub size: usize,
    /// Grid of `δ / W_c(g)`.
    pub rel_grid: (f64, f64, usize),
    /// Sizes for the IPR and gap at the critical point.
    pub sizes: Vec<usize>,
    pub n_samples: usize,
    pub tol: f64,
    pub master_seed: u64,
}

impl PureAaConfig {
    pub fn full() -> Self {
        PureAaConfig {
            size: 987,
            rel_grid: (3e-4, 0.5, 33),
            sizes: vec![89, 144, 233, 377, 610, 987],
            n_samples: 1000,
            tol: 0.1,
            master_seed: 2,
        }
    }

    pub fn quick() -> Self {
        PureAaConfig {
            n_samples: 100,
            ..Self::full()
        }
    }

    pub fn at(scale: Scale) -> Self {
        match scale {
            Scale::Full => Self::full(),
            Scale::Quick => Self::quick(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PureAaResult {
    pub g: f64,
    pub nu: Estimate,
    pub s: Estimate,
    pub z: Estimate,
    /// Fit range of the ξ power law in `δ`.
    pub window: (f64, f64),
    pub xi_curve: EnsembleCurve,
    /// One single-point curve per size at `W = W_c`.
    pub critical_curves: Vec<EnsembleCurve>,
}

/// ν_δ from `ξ ∝ δ^{-ν}` above `W_c`, then `s_δ`, `z_δ` from `I ∝ L^{-s/ν}`
/// and `ΔE ∝ L^{-z}` at `W_c`.
pub fn pure_aa(g: f64, cfg: &PureAaConfig, runner: &Runner) -> Result<PureAaResult> {
    let wc = critical_w(1.0, g);
    let (lo, hi, n) = cfg.rel_grid;
    let grid: Vec<f64> = log_grid(lo, hi, n).iter().map(|r| r * wc).collect();
    let mut spec = SweepSpec::new(ModelParams::new(cfg.size, g, 0.0, 0.0), Axis::W, grid, vec![cfg.size]);
    spec.n_samples = cfg.n_samples;
    spec.master_seed = cfg.master_seed;
    let xi_curve = runner.sweep(&spec)?.curves.remove(0);
    let window = stable_slope_range(&xi_curve.axis_values, &xi_curve.mean_xi, cfg.tol)
        .ok_or_else(|| Error::fit("no stable power-law window for xi"))?;
    let fx = powerlaw_fit(&xi_curve.axis_values, &xi_curve.mean_xi, window)?;
    let nu = Estimate::new(-fx.slope, fx.stderr);

    let mut spec = SweepSpec::new(ModelParams::new(cfg.sizes[0], g, 0.0, 0.0), Axis::WAbsolute, vec![wc], cfg.sizes.clone());
    spec.n_samples = cfg.n_samples;
    spec.master_seed = cfg.master_seed;
    let critical_curves = runner.sweep(&spec)?.curves;
    let ls: Vec<f64> = critical_curves.iter().map(|c| c.size as f64).collect();
    let all = (0.0, f64::INFINITY);
    let ipr: Vec<f64> = critical_curves.iter().map(|c| c.mean_ipr[0]).collect();
    let gap: Vec<f64> = critical_curves.iter().map(|c| c.mean_gap[0]).collect();
    let fi = powerlaw_fit(&ls, &ipr, all)?;
    let fg = powerlaw_fit(&ls, &gap, all)?;
    let s = Estimate::new(
        -fi.slope * nu.value,
        (fi.stderr * nu.value).hypot(fi.slope * nu.sigma),
    );
    Ok(PureAaResult {
        g,
        nu,
        s,
        z: Estimate::new(-fg.slope, fg.stderr),
        window,
        xi_curve,
        critical_curves,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WcScanConfig {
    pub size: usize,
    /// Scan `[lo·W_c, hi·W_c]`.
    pub rel_range: (f64, f64),
    pub points: usize,
    pub n_samples: usize,
    pub master_seed: u64,
}

impl WcScanConfig {
    pub fn full() -> Self {
        WcScanConfig {
            size: 987,
            rel_range: (0.85, 1.15),
            points: 41,
            n_samples: 1000,
            master_seed: 3,
        }
    }

    pub fn quick() -> Self {
        WcScanConfig {
            n_samples: 100,
            ..Self::full()
        }
    }

    pub fn at(scale: Scale) -> Self {
        match scale {
            Scale::Full => Self::full(),
            Scale::Quick => Self::quick(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WcScan {
    pub g: f64,
    pub estimate: CriticalPointEstimate,
    pub obc: EnsembleCurve,
    pub pbc: EnsembleCurve,
}

/// `W_c^{(L)}` from the IPR under both boundary conditions.
pub fn finite_wc(g: f64, cfg: &WcScanConfig, runner: &Runner) -> Result<WcScan> {
    let wc = critical_w(1.0, g);
    let grid = log_grid(cfg.rel_range.0 * wc, cfg.rel_range.1 * wc, cfg.points);
    let mut curves = Vec::with_capacity(2);
    for bc in [Boundary::Open, Boundary::Periodic] {
        let base = ModelParams::new(cfg.size, g, 0.0, 0.0).with_boundary(bc);
        let mut spec = SweepSpec::new(base, Axis::WAbsolute, grid.clone(), vec![cfg.size]);
        spec.n_samples = cfg.n_samples;
        spec.master_seed = cfg.master_seed;
        curves.push(runner.sweep(&spec)?.curves.remove(0));
    }
    let pbc = curves.pop().expect("two scans");
    let obc = curves.pop().expect("two scans");
    Ok(WcScan {
        g,
        estimate: extract_wc_finite(&obc, &pbc)?,
        obc,
        pbc,
    })
}

// ------------------------------------------------------- collapse regions

/// The three collapses of one region and the curves behind them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionFit {
    pub xi: CollapseFit,
    pub ipr: CollapseFit,
    pub gap: CollapseFit,
    pub curves: Vec<EnsembleCurve>,
}

impl RegionFit {
    pub fn nu(&self) -> f64 {
        self.xi.get("nu").unwrap_or(f64::NAN)
    }

    pub fn s(&self) -> f64 {
        self.ipr.get("s").unwrap_or(f64::NAN)
    }

    pub fn z(&self) -> f64 {
        self.gap.get("z").unwrap_or(f64::NAN)
    }

    /// Point value with the bootstrap half-width as sigma (zero without one).
    pub fn estimate(&self, name: &str) -> Estimate {
        let (fit, value) = match name {
            "nu" => (&self.xi, self.nu()),
            "s" => (&self.ipr, self.s()),
            "s_over_nu" => (&self.ipr, self.s() / self.nu()),
            _ => (&self.gap, self.z()),
        };
        Estimate::new(value, fit.ci.get(name).map_or(0.0, |i| i.sigma()))
    }

    pub fn fit(&self, q: Quantity) -> &CollapseFit {
        match q {
            Quantity::Xi => &self.xi,
            Quantity::Ipr => &self.ipr,
            Quantity::Gap => &self.gap,
        }
    }
}

/// ξ collapse for ν, then IPR and gap with ν pinned.
pub fn fit_region(curves: &[EnsembleCurve], form: CollapseForm, window: Window) -> Result<RegionFit> {
    let opts = CollapseOptions {
        window,
        ..CollapseOptions::default()
    };
    let xi = collapse_1d(curves, Quantity::Xi, form, &opts)?;
    let pinned = CollapseOptions {
        nu_pinned: xi.get("nu"),
        ..opts
    };
    Ok(RegionFit {
        ipr: collapse_1d(curves, Quantity::Ipr, form, &pinned)?,
        gap: collapse_1d(curves, Quantity::Gap, form, &pinned)?,
        xi,
        curves: curves.to_vec(),
    })
}

/// Attach 68% bootstrap intervals for `nu`, `s`, `s_over_nu` and `z`.
pub fn bootstrap_region(fit: &mut RegionFit, out: &SweepOutput, form: CollapseForm, window: Window, n_boot: usize, seed: u64) -> Result<()> {
    let ci = bootstrap_ci(
        &out.samples,
        |curves| {
            let r = fit_region(curves, form, window)?;
            Ok(vec![r.nu(), r.s(), r.s() / r.nu(), r.z()])
        },
        n_boot,
        seed,
    )?;
    fit.xi.ci.insert("nu".into(), ci[0]);
    fit.ipr.ci.insert("s".into(), ci[1]);
    fit.ipr.ci.insert("s_over_nu".into(), ci[2]);
    fit.gap.ci.insert("z".into(), ci[3]);
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsCritical {
    pub points: Vec<CriticalPointEstimate>,
    pub intercept: f64,
    pub stderr: f64,
}

/// `ε_c^{(L)}` per size and its `1/L → 0` limit.
pub fn eps_critical(curves: &[EnsembleCurve]) -> Result<EpsCritical> {
    let points = curves.iter().map(extract_epsc_finite).collect::<Result<Vec<_>>>()?;
    let (intercept, stderr) = extrapolate_inverse_size(&points)?;
    Ok(EpsCritical {
        points,
        intercept,
        stderr,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarkConfig {
    pub sizes: Vec<usize>,
    pub grid: (f64, f64, usize),
    pub window: Window,
}

impl StarkConfig {
    pub fn full() -> Self {
        StarkConfig {
            sizes: vec![600, 900, 1200],
            grid: (1e-4, 1e-1, 31),
            window: Window::RightOfPeak { hi: 1e-1 },
        }
    }
}

/// Pure Stark chain (`W = 0`): no phase average is needed.
pub fn pure_stark(g: f64, cfg: &StarkConfig, runner: &Runner) -> Result<RegionFit> {
    let (lo, hi, n) = cfg.grid;
    let mut spec = SweepSpec::new(ModelParams::new(cfg.sizes[0], g, 0.0, 0.0), Axis::Eps, log_grid(lo, hi, n), cfg.sizes.clone());
    spec.n_samples = 1;
    let out = runner.sweep(&spec)?;
    fit_region(&out.curves, CollapseForm::Stark, cfg.window)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AasConfig {
    pub sizes: Vec<usize>,
    pub grid: (f64, f64, usize),
    pub n_samples: usize,
    pub window: Window,
    pub boundary: Boundary,
    /// `c` of a two-variable slice `(W − W_c) L^{1/ν_δ} = c`; `None` sits at `W_c`.
    pub slice: Option<f64>,
    pub n_boot: usize,
    pub master_seed: u64,
}

impl AasConfig {
    pub fn full() -> Self {
        AasConfig {
            sizes: vec![377, 610, 987],
            grid: (1e-11, 1e-4, 29),
            n_samples: 1000,
            window: Window::Full,
            boundary: Boundary::Open,
            slice: None,
            n_boot: 200,
            master_seed: 4,
        }
    }

    pub fn quick() -> Self {
        AasConfig {
            n_samples: 200,
            n_boot: 100,
            ..Self::full()
        }
    }

    pub fn at(scale: Scale) -> Self {
        match scale {
            Scale::Full => Self::full(),
            Scale::Quick => Self::quick(),
        }
    }

    pub fn form(&self) -> CollapseForm {
        match self.slice {
            Some(c) => CollapseForm::Slice { c },
            None => CollapseForm::AasAtWc,
        }
    }

    pub fn spec(&self, g: f64) -> SweepSpec {
        let base = ModelParams::new(self.sizes[0], g, critical_w(1.0, g), 0.0).with_boundary(self.boundary);
        let (lo, hi, n) = self.grid;
        let mut spec = SweepSpec::new(base, Axis::Eps, log_grid(lo, hi, n), self.sizes.clone());
        spec.n_samples = self.n_samples;
        spec.master_seed = self.master_seed;
        spec.slice = self.slice.map(|c| Slice { c, nu_delta: NU_DELTA });
        spec
    }
}

/// Stark-direction collapse at (or on a slice through) `W_c(g)`, with
/// bootstrap intervals.
pub fn aas(g: f64, cfg: &AasConfig, runner: &Runner) -> Result<RegionFit> {
    let out = runner.sweep(&cfg.spec(g))?;
    let form = cfg.form();
    let mut fit = fit_region(&out.curves, form, cfg.window)?;
    bootstrap_region(&mut fit, &out, form, cfg.window, cfg.n_boot, cfg.master_seed)?;
    Ok(fit)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HybridConfig {
    pub size: usize,
    pub deltas: Vec<f64>,
    pub grid: (f64, f64, usize),
    pub n_samples: usize,
    pub window: Window,
    pub nu: f64,
    pub nu_delta: f64,
    pub master_seed: u64,
}

impl HybridConfig {
    pub fn full() -> Self {
        HybridConfig {
            size: 987,
            deltas: vec![-0.0125, -0.025, -0.05, -0.1],
            grid: (1e-9, 1e-3, 49),
            n_samples: 1000,
            window: Window::RightOfPeak { hi: 1e-3 },
            nu: NU_AAS,
            nu_delta: NU_DELTA,
            master_seed: 5,
        }
    }

    pub fn quick() -> Self {
        HybridConfig {
            n_samples: 200,
            ..Self::full()
        }
    }

    pub fn at(scale: Scale) -> Self {
        match scale {
            Scale::Full => Self::full(),
            Scale::Quick => Self::quick(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HybridResult {
    pub fit: CollapseFit,
    pub curves: Vec<(f64, EnsembleCurve)>,
    /// `ν_δ (1/ν_ε − 1/ν)` with the pure-Stark ν_ε.
    pub kappa_theory: f64,
}

/// ξ against ε at several `W = W_c + δ`, `δ < 0`, collapsed with κ free.
pub fn hybrid(g: f64, nu_eps: f64, cfg: &HybridConfig, runner: &Runner) -> Result<HybridResult> {
    let wc = critical_w(1.0, g);
    let (lo, hi, n) = cfg.grid;
    let mut curves = Vec::with_capacity(cfg.deltas.len());
    for &d in &cfg.deltas {
        let mut spec = SweepSpec::new(ModelParams::new(cfg.size, g, wc + d, 0.0), Axis::Eps, log_grid(lo, hi, n), vec![cfg.size]);
        spec.n_samples = cfg.n_samples;
        spec.master_seed = cfg.master_seed;
        curves.push((d, runner.sweep(&spec)?.curves.remove(0)));
    }
    let opts = CollapseOptions {
        window: cfg.window,
        ..CollapseOptions::default()
    };
    Ok(HybridResult {
        fit: hybrid_collapse(&curves, cfg.nu, cfg.nu_delta, &opts)?,
        curves,
        kappa_theory: kappa_theory(cfg.nu_delta, nu_eps, cfg.nu),
    })
}
