use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nhaas_core::recipes::{
    aas, eps_critical, hybrid, pure_stark, AasConfig, HybridConfig, RegionFit, Runner, Scale, StarkConfig,
};
use nhaas_core::store::ResultKey;
use nhaas_core::{critical_w, Axis, Boundary, EnsembleCurve, ModelParams, Store, SweepSpec};
use serde_json::{json, Value};

use crate::config::{Grid, List, Overrides, Resolved, WindowArg};
use crate::error::CliError;
use crate::output::{hybrid_csv, region_json, Bundle};

/// Phase samples per point under `quick`.
pub const QUICK_SAMPLES: usize = 100;

/// Smallest bootstrap accepted by the fits.
pub const MIN_BOOT: usize = 100;

const MODEL_KEYS: [&str; 8] = ["J", "g", "W", "eps", "L", "alpha", "phi", "bc"];

/// Keys shared by every command.
pub struct Common {
    pub workers: usize,
    pub out: PathBuf,
    store: Store,
}

impl Common {
    pub fn take(o: &mut Overrides, default_out: &str, r: &mut Resolved) -> Result<Self, CliError> {
        let workers = o
            .take("workers")?
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(CliError::Usage("`workers` must be at least 1".into()));
        }
        let out: PathBuf = o.take("out")?.unwrap_or_else(|| PathBuf::from(default_out));
        r.push("workers", workers);
        r.push("out", out.display());
        Ok(Common {
            workers,
            out,
            store: Store::from_env("nhaas-results"),
        })
    }

    pub fn runner(&self) -> Runner<'_> {
        Runner {
            store: Some(&self.store),
            workers: Some(self.workers),
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }
}

pub fn scale(o: &mut Overrides, r: &mut Resolved) -> Result<Scale, CliError> {
    let quick = o.take::<bool>("quick")?.unwrap_or(false);
    r.push("quick", quick);
    Ok(if quick { Scale::Quick } else { Scale::Full })
}

pub fn quick_samples(scale: Scale, full: usize) -> usize {
    match scale {
        Scale::Quick => QUICK_SAMPLES,
        Scale::Full => full,
    }
}

fn default_grid(axis: Axis, base: &ModelParams) -> Grid {
    match axis {
        Axis::Eps => Grid::new((1e-4, 1e-1, 24)),
        Axis::W => Grid::new((1e-3, 1.0, 24)),
        Axis::WAbsolute => {
            let wc = critical_w(base.hopping, base.g);
            Grid::new((0.85 * wc, 1.15 * wc, 24))
        }
    }
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn print_summary(curves: &[EnsembleCurve]) {
    println!("{:>6} {:>6} {:>8} {:>23} {:>23} {:>23}", "L", "points", "samples", "xi", "ipr", "gap");
    for c in curves {
        let span = |v: &[f64]| {
            let (lo, hi) = range(v);
            format!("{lo:.3e}..{hi:.3e}")
        };
        println!(
            "{:>6} {:>6} {:>8} {:>23} {:>23} {:>23}",
            c.size,
            c.len(),
            c.n_samples.iter().sum::<usize>(),
            span(&c.mean_xi),
            span(&c.mean_ipr),
            span(&c.mean_gap)
        );
    }
}

pub fn sweep(mut o: Overrides) -> Result<PathBuf, CliError> {
    let mut r = Resolved::default();
    let axis: Axis = o.take("axis")?.unwrap_or(Axis::Eps);
    r.push("axis", axis);

    let mut record = Vec::new();
    for key in MODEL_KEYS {
        if let Some(v) = o.take::<String>(key)? {
            record.push((key, v));
        }
    }
    if !record.iter().any(|(k, _)| *k == "L") {
        record.push(("L", "987".into()));
    }
    let base = ModelParams::from_record(record.iter().map(|(k, v)| (*k, v.as_str())))?;
    for (k, v) in base.to_record() {
        r.push(k, v);
    }

    let sizes = o.take::<List<usize>>("sizes")?.unwrap_or(List(vec![base.size]));
    r.push("sizes", &sizes);
    let grid = match (o.take::<List<f64>>("values")?, o.take::<Grid>("grid")?) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either `grid` or `values`, not both".into())),
        (Some(v), None) => {
            r.push("values", &v);
            v.0
        }
        (None, g) => {
            let g = g.unwrap_or_else(|| default_grid(axis, &base));
            r.push("grid", g);
            g.values()
        }
    };
    let clean = base.w == 0.0 && axis == Axis::Eps;
    let n_samples = o.take("n_samples")?.unwrap_or(if clean { 1 } else { 1000 });
    let seed = o.take("seed")?.unwrap_or(0u64);
    r.push("n_samples", n_samples);
    r.push("seed", seed);
    let common = Common::take(&mut o, "nhaas-out/sweep", &mut r)?;
    o.finish("sweep")?;

    let mut spec = SweepSpec::new(base, axis, grid, sizes.0);
    spec.n_samples = n_samples;
    spec.master_seed = seed;
    spec.validate()?;

    let out = common.runner().sweep(&spec)?;
    print_summary(&out.curves);
    let mut bundle = Bundle::create(&common.out)?;
    bundle.curves("curves.csv", &out.curves)?;
    let entry = common.store().entry_dir(&ResultKey::for_spec(&spec));
    let results = json!({
        "spec": spec,
        "store_entry": entry.display().to_string(),
        "failed_samples": out.failures.len(),
    });
    bundle.finish("sweep", &r, results)
}

/// Scaling form picked with `form`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormArg {
    Stark,
    AasAtWc,
    Slice,
    Hybrid,
}

impl FromStr for FormArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "stark" => Ok(FormArg::Stark),
            "aas-at-wc" => Ok(FormArg::AasAtWc),
            "slice" => Ok(FormArg::Slice),
            "hybrid" => Ok(FormArg::Hybrid),
            _ => Err("expected stark, aas-at-wc, slice or hybrid".into()),
        }
    }
}

impl fmt::Display for FormArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormArg::Stark => "stark",
            FormArg::AasAtWc => "aas-at-wc",
            FormArg::Slice => "slice",
            FormArg::Hybrid => "hybrid",
        })
    }
}

/// Stark collapse settings from `sizes`, `grid`, `window`.
pub fn stark_config(o: &mut Overrides, r: &mut Resolved) -> Result<StarkConfig, CliError> {
    let mut cfg = StarkConfig::full();
    if let Some(s) = o.take::<List<usize>>("sizes")? {
        cfg.sizes = s.0;
    }
    if let Some(g) = o.take::<Grid>("grid")? {
        cfg.grid = g.tuple();
    }
    if let Some(w) = o.take::<WindowArg>("window")? {
        cfg.window = w.0;
    }
    r.push("sizes", List(cfg.sizes.clone()));
    r.push("grid", Grid::new(cfg.grid));
    r.push("window", WindowArg(cfg.window));
    Ok(cfg)
}

/// Phase-averaged region settings; `slice` as given.
pub fn aas_config(o: &mut Overrides, r: &mut Resolved, scale: Scale, slice: Option<f64>) -> Result<AasConfig, CliError> {
    let mut cfg = AasConfig::at(scale);
    cfg.n_samples = quick_samples(scale, cfg.n_samples);
    cfg.slice = slice;
    if let Some(s) = o.take::<List<usize>>("sizes")? {
        cfg.sizes = s.0;
    }
    if let Some(g) = o.take::<Grid>("grid")? {
        cfg.grid = g.tuple();
    }
    if let Some(w) = o.take::<WindowArg>("window")? {
        cfg.window = w.0;
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
    if let Some(bc) = o.take::<Boundary>("bc")? {
        cfg.boundary = bc;
    }
    if let Some(s) = o.take("seed")? {
        cfg.master_seed = s;
    }
    r.push("sizes", List(cfg.sizes.clone()));
    r.push("grid", Grid::new(cfg.grid));
    r.push("window", WindowArg(cfg.window));
    r.push("n_samples", cfg.n_samples);
    r.push("n_boot", cfg.n_boot);
    r.push("bc", cfg.boundary);
    r.push("seed", cfg.master_seed);
    Ok(cfg)
}

pub fn eps_json(curves: &[EnsembleCurve]) -> Value {
    match eps_critical(curves) {
        Ok(e) => serde_json::to_value(e).expect("plain json"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Curves, rescaled data and `ε_c^{(L)}` of a region.
pub fn write_region(bundle: &mut Bundle, prefix: &str, fit: &RegionFit) -> Result<Value, CliError> {
    bundle.curves(&format!("{prefix}curves.csv"), &fit.curves)?;
    bundle.rescaled_region(prefix, fit)?;
    let mut v = region_json(fit);
    v["eps_critical"] = eps_json(&fit.curves);
    Ok(v)
}

pub fn print_region(label: &str, fit: &RegionFit) {
    let show = |n| {
        let e = fit.estimate(n);
        if e.sigma > 0.0 {
            format!("{n} = {:.4} ± {:.4}", e.value, e.sigma)
        } else {
            format!("{n} = {:.4}", e.value)
        }
    };
    println!("{label}: {}, {}, {}", show("nu"), show("s"), show("z"));
}

pub fn collapse(mut o: Overrides) -> Result<PathBuf, CliError> {
    let mut r = Resolved::default();
    let form: FormArg = o
        .take("form")?
        .ok_or_else(|| CliError::Usage("missing `form` (stark, aas-at-wc, slice or hybrid)".into()))?;
    r.push("form", form);
    let g: f64 = o.take("g")?.unwrap_or(0.5);
    r.push("g", g);
    let scale = scale(&mut o, &mut r)?;
    let default_out = format!("nhaas-out/collapse-{form}");

    match form {
        FormArg::Stark => {
            let cfg = stark_config(&mut o, &mut r)?;
            let common = Common::take(&mut o, &default_out, &mut r)?;
            o.finish("collapse --form stark")?;
            let fit = pure_stark(g, &cfg, &common.runner())?;
            print_region("stark", &fit);
            let mut bundle = Bundle::create(&common.out)?;
            let results = write_region(&mut bundle, "", &fit)?;
            bundle.finish("collapse", &r, results)
        }
        FormArg::AasAtWc | FormArg::Slice => {
            let slice = match form {
                FormArg::Slice => {
                    let c = o.take("c")?.unwrap_or(1.0);
                    r.push("c", c);
                    Some(c)
                }
                _ => None,
            };
            let cfg = aas_config(&mut o, &mut r, scale, slice)?;
            let common = Common::take(&mut o, &default_out, &mut r)?;
            o.finish(&format!("collapse --form {form}"))?;
            let fit = aas(g, &cfg, &common.runner())?;
            print_region(&form.to_string(), &fit);
            let mut bundle = Bundle::create(&common.out)?;
            let results = write_region(&mut bundle, "", &fit)?;
            bundle.finish("collapse", &r, results)
        }
        FormArg::Hybrid => {
            let cfg = hybrid_config(&mut o, &mut r, scale)?;
            let nu_eps: Option<f64> = o.take("nu_eps")?;
            let common = Common::take(&mut o, &default_out, &mut r)?;
            o.finish("collapse --form hybrid")?;
            let nu_eps = match nu_eps {
                Some(v) => v,
                None => pure_stark(g, &StarkConfig::full(), &common.runner())?.nu(),
            };
            r.push("nu_eps", nu_eps);
            let mut bundle = Bundle::create(&common.out)?;
            let results = write_hybrid(&mut bundle, g, nu_eps, &cfg, &common)?;
            bundle.finish("collapse", &r, results)
        }
    }
}

pub fn hybrid_config(o: &mut Overrides, r: &mut Resolved, scale: Scale) -> Result<HybridConfig, CliError> {
    let mut cfg = HybridConfig::at(scale);
    cfg.n_samples = quick_samples(scale, cfg.n_samples);
    if let Some(l) = o.take("L")? {
        cfg.size = l;
    }
    if let Some(d) = o.take::<List<f64>>("deltas")? {
        cfg.deltas = d.0;
    }
    if let Some(g) = o.take::<Grid>("grid")? {
        cfg.grid = g.tuple();
    }
    if let Some(w) = o.take::<WindowArg>("window")? {
        cfg.window = w.0;
    }
    if let Some(n) = o.take("n_samples")? {
        cfg.n_samples = n;
    }
    if let Some(s) = o.take("seed")? {
        cfg.master_seed = s;
    }
    r.push("L", cfg.size);
    r.push("deltas", List(cfg.deltas.clone()));
    r.push("grid", Grid::new(cfg.grid));
    r.push("window", WindowArg(cfg.window));
    r.push("n_samples", cfg.n_samples);
    r.push("seed", cfg.master_seed);
    r.push("nu", cfg.nu);
    r.push("nu_delta", cfg.nu_delta);
    Ok(cfg)
}

/// Hybrid collapse: per-δ curves, the κ = 0 view and the fitted collapse.
pub fn write_hybrid(bundle: &mut Bundle, g: f64, nu_eps: f64, cfg: &HybridConfig, common: &Common) -> Result<Value, CliError> {
    let res = hybrid(g, nu_eps, cfg, &common.runner())?;
    println!(
        "hybrid: kappa = {:.4} (quality {:.3}), nu_delta (1/nu_eps - 1/nu) = {:.4}",
        res.fit.get("kappa").unwrap_or(f64::NAN),
        res.fit.quality,
        res.kappa_theory
    );
    for (d, c) in &res.curves {
        bundle.curves(&format!("curves_delta{d}.csv"), std::slice::from_ref(c))?;
    }
    let mut flat = res.fit.clone();
    flat.exponents.insert("kappa".into(), 0.0);
    bundle.write("unscaled_xi.csv", &hybrid_csv(&res.curves, &flat))?;
    bundle.write("rescaled_xi.csv", &hybrid_csv(&res.curves, &res.fit))?;
    Ok(json!({
        "kappa": res.fit.get("kappa"),
        "kappa_from_exponents": res.kappa_theory,
        "nu_eps": nu_eps,
        "deltas": cfg.deltas,
        "fit": res.fit,
    }))
}
