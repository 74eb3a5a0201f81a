use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::simplex::{minimize, Minimum, SimplexOptions};
use super::{CollapseFit, CollapseForm, Quantity, Window};
use crate::ensemble::{EnsembleCurve, SweepSpec};
use crate::error::{Error, Result};

/// Relative error assigned to every point on top of its standard error,
/// so noiseless curves still have a finite weight.
pub const REL_ERR_FLOOR: f64 = 1e-3;

pub const NU_BOUNDS: (f64, f64) = (0.1, 2.0);
pub const S_BOUNDS: (f64, f64) = (0.0, 1.0);
pub const Z_BOUNDS: (f64, f64) = (0.5, 4.0);
pub const KAPPA_BOUNDS: (f64, f64) = (-3.0, 0.0);

/// One curve after rescaling: `x` ascending, `rel_err = σ_y / y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub size: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub rel_err: Vec<f64>,
}

/// `x = d·L^{1/ν}`, `y = Y·L^{power}`.
pub fn rescale(curve: &EnsembleCurve, q: Quantity, nu: f64, power: f64) -> Rescaled {
    let l = curve.size as f64;
    let fx = l.powf(1.0 / nu);
    let fy = l.powf(power);
    let mean = curve.mean(q);
    let sem = curve.sem(q);
    Rescaled {
        size: curve.size,
        x: curve.axis_values.iter().map(|d| d * fx).collect(),
        y: mean.iter().map(|y| y * fy).collect(),
        rel_err: mean.iter().zip(sem).map(|(y, s)| (s / y).abs()).collect(),
    }
}

/// Master-curve spread. Every point is compared with the log-log linear
/// interpolation of each other curve whose x-range contains it; squared
/// log deviations are weighted by the combined relative variance and
/// averaged. `+∞` when no curves overlap.
pub fn quality(curves: &[Rescaled]) -> f64 {
    let logs: Vec<(Vec<f64>, Vec<f64>)> = curves
        .iter()
        .map(|c| (c.x.iter().map(|v| v.ln()).collect(), c.y.iter().map(|v| v.ln()).collect()))
        .collect();
    let floor2 = REL_ERR_FLOOR * REL_ERR_FLOOR;
    let mut total = 0.0;
    let mut count = 0usize;
    for (a, ca) in curves.iter().enumerate() {
        for (b, cb) in curves.iter().enumerate() {
            if a == b || cb.x.len() < 2 {
                continue;
            }
            let (lxb, lyb) = &logs[b];
            let (first, last) = (lxb[0], lxb[lxb.len() - 1]);
            for (i, &lx) in logs[a].0.iter().enumerate() {
                if lx < first || lx > last {
                    continue;
                }
                let k = lxb.partition_point(|&v| v < lx).clamp(1, lxb.len() - 1);
                let t = (lx - lxb[k - 1]) / (lxb[k] - lxb[k - 1]);
                let y_int = lyb[k - 1] + t * (lyb[k] - lyb[k - 1]);
                let r_int = cb.rel_err[k - 1] + t * (cb.rel_err[k] - cb.rel_err[k - 1]);
                let var = ca.rel_err[i].powi(2) + r_int.powi(2) + 2.0 * floor2;
                total += (logs[a].1[i] - y_int).powi(2) / var;
                count += 1;
            }
        }
    }
    if count == 0 {
        f64::INFINITY
    } else {
        total / count as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CollapseOptions {
    pub window: Window,
    /// Hold ν fixed (e.g. at the ξ-collapse value) when fitting IPR or gap.
    pub nu_pinned: Option<f64>,
    pub init_nu: f64,
    pub init_s: f64,
    pub init_z: f64,
    pub init_kappa: f64,
    pub restarts: usize,
    pub seed: u64,
    pub simplex: SimplexOptions,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        CollapseOptions {
            window: Window::default(),
            nu_pinned: None,
            init_nu: 0.5,
            init_s: 0.1,
            init_z: 2.0,
            init_kappa: -1.0,
            restarts: 3,
            seed: 0x5eed,
            simplex: SimplexOptions::default(),
        }
    }
}

/// Simplex from `init` plus `restarts` uniformly random starts in the box.
fn search<F: Fn(&[f64]) -> f64>(
    f: F,
    init: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &CollapseOptions,
) -> Result<(Minimum, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<Minimum> = None;
    let mut evaluations = 0;
    let mut any_converged = false;
    for attempt in 0..=opts.restarts {
        let x0: Vec<f64> = if attempt == 0 {
            init.to_vec()
        } else {
            lo.iter().zip(hi).map(|(a, b)| rng.random_range(*a..=*b)).collect()
        };
        let m = minimize(&f, &x0, lo, hi, opts.simplex);
        evaluations += m.evaluations;
        any_converged |= m.converged;
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");
    if !best.value.is_finite() {
        return Err(Error::fit("rescaled curves have disjoint supports"));
    }
    if !any_converged {
        return Err(Error::fit("simplex did not converge from any start"));
    }
    Ok((best, evaluations))
}

fn distinct_sizes(curves: &[EnsembleCurve]) -> usize {
    let mut s: Vec<usize> = curves.iter().map(|c| c.size).collect();
    s.sort_unstable();
    s.dedup();
    s.len()
}

/// One-variable collapse of `q` over sizes: `ν` alone for ξ, `(ν, s)` for
/// the IPR and `(ν, z)` for the gap, with `ν` optionally pinned.
pub fn collapse_1d(
    curves: &[EnsembleCurve],
    q: Quantity,
    form: CollapseForm,
    opts: &CollapseOptions,
) -> Result<CollapseFit> {
    if distinct_sizes(curves) < 3 {
        return Err(Error::fit("collapse needs at least three sizes"));
    }
    let (used, window) = opts.window.apply(curves, q)?;
    if used.iter().any(|c| c.len() < 2) {
        return Err(Error::fit("window leaves fewer than two points on some curve"));
    }

    // parameter vector layout: [nu?] ++ [s | z]?
    let fit_nu = opts.nu_pinned.is_none();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    let mut init = Vec::new();
    if fit_nu {
        lo.push(NU_BOUNDS.0);
        hi.push(NU_BOUNDS.1);
        init.push(opts.init_nu);
    }
    let second = match q {
        Quantity::Xi => None,
        Quantity::Ipr => Some(("s", S_BOUNDS, opts.init_s)),
        Quantity::Gap => Some(("z", Z_BOUNDS, opts.init_z)),
    };
    if let Some((_, b, x0)) = second {
        lo.push(b.0);
        hi.push(b.1);
        init.push(x0);
    }
    let unpack = |x: &[f64]| -> (f64, f64) {
        let nu = opts.nu_pinned.unwrap_or_else(|| x[0]);
        let other = if second.is_some() { x[x.len() - 1] } else { 0.0 };
        (nu, other)
    };
    let power = |nu: f64, other: f64| match q {
        Quantity::Xi => -1.0,
        Quantity::Ipr => other / nu,
        Quantity::Gap => other,
    };
    let objective = |x: &[f64]| {
        let (nu, other) = unpack(x);
        let r: Vec<Rescaled> = used.iter().map(|c| rescale(c, q, nu, power(nu, other))).collect();
        quality(&r)
    };

    let (x, value, evaluations) = if lo.is_empty() {
        (vec![], objective(&[]), 1)
    } else {
        let (m, evals) = search(objective, &init, &lo, &hi, opts)?;
        (m.x, m.value, evals)
    };
    if !value.is_finite() {
        return Err(Error::fit("rescaled curves have disjoint supports"));
    }
    let (nu, other) = unpack(&x);
    let mut exponents = BTreeMap::new();
    exponents.insert("nu".to_string(), nu);
    if let Some((name, _, _)) = second {
        exponents.insert(name.to_string(), other);
    }
    Ok(CollapseFit {
        form,
        quantity: q,
        exponents,
        pinned: if fit_nu { vec![] } else { vec!["nu".into()] },
        quality: value,
        ci: BTreeMap::new(),
        window,
        evaluations,
    })
}

/// One-variable collapse along ε on a slice `(W − W_c) L^{1/ν_δ} = c`.
pub fn collapse_2d_slice(
    spec: &SweepSpec,
    curves: &[EnsembleCurve],
    q: Quantity,
    opts: &CollapseOptions,
) -> Result<CollapseFit> {
    let c = spec
        .slice
        .map(|s| s.c)
        .ok_or_else(|| Error::fit("sweep is not a two-variable slice"))?;
    collapse_1d(curves, q, CollapseForm::Slice { c }, opts)
}

/// `κ = ν_δ (1/ν_ε − 1/ν)`.
pub fn kappa_theory(nu_delta: f64, nu_eps: f64, nu: f64) -> f64 {
    nu_delta * (1.0 / nu_eps - 1.0 / nu)
}

/// Collapse of ξ/L against `ε L^{1/ν} (|δ| L^{1/ν_δ})^κ` over several
/// `δ = W − W_c < 0` at one size; fits κ.
pub fn hybrid_collapse(
    curves: &[(f64, EnsembleCurve)],
    nu: f64,
    nu_delta: f64,
    opts: &CollapseOptions,
) -> Result<CollapseFit> {
    if curves.len() < 3 {
        return Err(Error::fit(format!("hybrid collapse needs at least three δ values, got {}", curves.len())));
    }
    if curves.iter().any(|(d, _)| !(*d < 0.0)) {
        return Err(Error::fit("hybrid collapse requires δ < 0"));
    }
    let size = curves[0].1.size;
    if curves.iter().any(|(_, c)| c.size != size) {
        return Err(Error::fit("hybrid collapse requires a single size"));
    }
    let plain: Vec<EnsembleCurve> = curves.iter().map(|(_, c)| c.clone()).collect();
    let (used, window) = opts.window.apply(&plain, Quantity::Xi)?;
    if used.iter().any(|c| c.len() < 2) {
        return Err(Error::fit("window leaves fewer than two points on some curve"));
    }
    let l = size as f64;
    let objective = |x: &[f64]| {
        let kappa = x[0];
        let r: Vec<Rescaled> = used
            .iter()
            .zip(curves)
            .map(|(c, (delta, _))| {
                let mut r = rescale(c, Quantity::Xi, nu, -1.0);
                let f = (delta.abs() * l.powf(1.0 / nu_delta)).powf(kappa);
                r.x.iter_mut().for_each(|v| *v *= f);
                r
            })
            .collect();
        quality(&r)
    };
    let (m, evaluations) = search(objective, &[opts.init_kappa], &[KAPPA_BOUNDS.0], &[KAPPA_BOUNDS.1], opts)?;
    let mut exponents = BTreeMap::new();
    exponents.insert("kappa".to_string(), m.x[0]);
    exponents.insert("nu".to_string(), nu);
    exponents.insert("nu_delta".to_string(), nu_delta);
    Ok(CollapseFit {
        form: CollapseForm::Hybrid,
        quantity: Quantity::Xi,
        exponents,
        pinned: vec!["nu".into(), "nu_delta".into()],
        quality: m.value,
        ci: BTreeMap::new(),
        window,
        evaluations,
    })
}
