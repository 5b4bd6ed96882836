//! The m-Kelvin transform `v(y) = |x|^{n−2m} u(x)`, `x = y/|y|²`.
//!
//! On a radial power `c r^s` it maps to `c r^{2m−n−s}`, and the identity
//! `Δ^m v(y) = |x|^{n+2m} Δ^m u(x)` becomes an exact statement about two radial
//! powers in `|y|`. For bump-built solutions the exterior claim is checked at the
//! transformed centers `y_j = x_j/|x_j|²`.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constructor::{exponents, spec_inputs};
use crate::error::{Error, Result};
use crate::potential::{Evaluator, SolutionSpec, Theorem};
use crate::symcalc::RadialExpr;
use crate::verify::{center_values, certify_ratio_trend, fit_log, spec_digest, Certificate, VerifyConfig};

/// `y/|y|²`; an involution on `R^n \ {0}`.
pub fn kelvin_point(y: &[f64]) -> Result<Vec<f64>> {
    let r2: f64 = y.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::AtOrigin);
    }
    Ok(y.iter().map(|v| v / r2).collect())
}

/// `c r^s ↦ c r^{2m−n−s}`; only single pure radial powers are accepted.
pub fn kelvin_radial(expr: &RadialExpr, m: u32, n: usize) -> Result<RadialExpr> {
    if expr.dim() != n {
        return Err(Error::Dimension { expected: n, got: expr.dim() });
    }
    let (c, s) = expr.as_radial_power().ok_or(Error::NotRadialPower)?;
    Ok(RadialExpr::rpow(n, c, 2 * m as i32 - n as i32 - s))
}

/// Both sides of `Δ^m v(y) = |x|^{n+2m} Δ^m u(x)` as radial expressions in `|y|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KelvinIdentity {
    pub m: u32,
    pub n: usize,
    pub s: i32,
    /// `Δ^m v` as `(coefficient, exponent)`; `None` when it vanishes.
    pub lhs: Option<(String, i32)>,
    /// `|x|^{n+2m}Δ^m u(x)` rewritten in `|y| = 1/|x|`.
    pub rhs: Option<(String, i32)>,
    pub holds: bool,
}

fn power_of(e: &RadialExpr) -> Result<Option<(BigRational, i32)>> {
    if e.is_zero() {
        return Ok(None);
    }
    e.as_radial_power().map(Some).ok_or(Error::NotRadialPower)
}

/// Exact check of the Kelvin identity on a radial power.
pub fn kelvin_identity(expr: &RadialExpr, m: u32, n: usize) -> Result<KelvinIdentity> {
    let v = kelvin_radial(expr, m, n)?;
    let (_, s) = expr.as_radial_power().ok_or(Error::NotRadialPower)?;
    let lhs = power_of(&v.iterated_laplacian(m))?;
    // Δ^m u = c r^t  ⇒  |x|^{n+2m} c |x|^t = c |y|^{−(n+2m+t)}
    let rhs = power_of(&expr.iterated_laplacian(m))?.map(|(c, t)| (c, -(n as i32 + 2 * m as i32 + t)));
    let norm = |p: Option<(BigRational, i32)>| p.filter(|(c, _)| !c.is_zero());
    let (lhs, rhs) = (norm(lhs), norm(rhs));
    let holds = lhs == rhs;
    let show = |p: Option<(BigRational, i32)>| p.map(|(c, e)| (c.to_string(), e));
    Ok(KelvinIdentity {
        m,
        n,
        s,
        lhs: show(lhs),
        rhs: show(rhs),
        holds,
    })
}

/// Certificate wrapper around [`kelvin_identity`].
pub fn kelvin_identity_check(expr: &RadialExpr, m: u32, n: usize) -> Result<Certificate> {
    let id = kelvin_identity(expr, m, n)?;
    let cfg = VerifyConfig::default();
    let mut cert = Certificate::new("kelvin-identity", format!("radial-power m={m} n={n} s={}", id.s), &cfg);
    cert.push(
        "kelvin-identity",
        "Δ^m v(y) = |x|^{n+2m} Δ^m u(x) for v the m-Kelvin transform of u",
        id.holds,
        serde_json::to_value(&id)?,
        None,
    );
    Ok(cert)
}

/// The identity on `r^s` for every `s ∈ [s_lo, s_hi]`.
pub fn kelvin_sweep(m: u32, n: usize, s_lo: i32, s_hi: i32) -> Result<Vec<KelvinIdentity>> {
    (s_lo..=s_hi)
        .map(|s| kelvin_identity(&RadialExpr::rpow(n, BigRational::from_integer(1.into()), s), m, n))
        .collect()
}

/// `v(y) = |x|^{n−2m} u(x)` with `x = y/|y|²`.
pub fn kelvin_value(ev: &Evaluator<'_>, y: &[f64]) -> Result<f64> {
    let x = kelvin_point(y)?;
    let p = &ev.spec().params;
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(xn.powi(p.n as i32 - 2 * p.m as i32) * ev.u_eval(&x)?)
}

/// `v(y_j)/(φ(|y_j|)|y_j|^b)` increases without limit along `y_j = x_j/|x_j|²`.
///
/// Values are assembled in log space, `log v = (n−2m) log|x_j| + log u(x_j)`, since
/// `|y_j|` overflows for the deeper bumps.
pub fn exterior_growth_check(spec: &SolutionSpec, cfg: &VerifyConfig) -> Result<Certificate> {
    if spec.theorem != Theorem::T1_17 {
        return Err(Error::Spec(format!("exterior growth applies to exterior constructions, got {}", spec.theorem)));
    }
    cfg.validate()?;
    let (lambda, phi) = spec_inputs(spec)?;
    let (m, n) = (spec.params.m, spec.params.n);
    let sheet = exponents(spec.theorem, m, n, &lambda)?;
    let b = sheet.b.as_ref().map(|q| num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)).unwrap_or(f64::NAN);
    let mut cert = Certificate::new("exterior-growth", spec_digest(spec), cfg);
    let ev = Evaluator::new(spec, &cfg.quadrature)?;
    let values = center_values(&ev)?;
    let centers = spec.centers();
    let s = n as f64 - 2.0 * m as f64;
    // log|y_j| = −log|x_j|; φ(|y|) is the exterior variant, φ(s) = base(1/s)
    let rows: Vec<(f64, f64, f64)> = centers
        .iter()
        .zip(&values)
        .map(|(&x, &u)| {
            let log_y = -x.ln();
            let log_v = s * x.ln() + u.ln();
            let log_ratio = log_v - phi.log_eval(x, true) - b * log_y;
            (log_y, log_v, log_ratio)
        })
        .collect();
    let log_ratios: Vec<f64> = rows.iter().map(|r| r.2).collect();
    cert.push_info(
        "exponent-b",
        "b = 2m(n−2)/(n−λ(n−2m)) = 2m−2+(n−2m)·2a exactly",
        sheet.identities.iter().all(|i| i.holds()),
        json!({ "b": b, "identities": sheet.identities }),
        None,
    );
    cert.push_info(
        "exterior-table",
        "v(y_j) = |x_j|^{n−2m}u(x_j) at y_j = x_j/|x_j|²",
        true,
        json!(rows.iter().map(|r| json!({ "log_y": r.0, "log_v": r.1, "log_ratio": r.2 })).collect::<Vec<_>>()),
        None,
    );
    certify_ratio_trend(&mut cert, &log_ratios, cfg, "v ≠ O(φ(|y|)|y|^b) as |y| → ∞");
    let start = cfg.trend_start.min(rows.len());
    let fit: Vec<(f64, f64)> = rows[start..].iter().map(|r| (r.0, r.1)).collect();
    if let Ok((slope, se)) = fit_log(&fit) {
        // ψ ≥ φ(1/r)^p, so u(x_j) ≳ ψ^{2m/(n−λ(n−2m))}|x_j|^{−(b+n−2m)}; the φ^{1/2} slope
        // comes from the modulus preset at the sampled radii
        let phi_fit: Vec<(f64, f64)> = rows[start..].iter().zip(&centers[start..]).map(|(r, &x)| (r.0, 0.5 * phi.log_eval(x, true))).collect();
        let phi_half = fit_log(&phi_fit).map(|p| p.0).unwrap_or(0.0);
        let upper = b + phi_half + cfg.slope_tol;
        cert.push(
            "exterior-slope",
            "log v(y_j) against log|y_j|: at most b + slope(φ^{1/2}), above b − 1/2",
            slope <= upper && slope > b - 0.5 - cfg.slope_tol,
            json!({ "slope": slope, "stderr": se, "b": b, "phi_half_slope": phi_half }),
            Some(cfg.slope_tol),
        );
    }
    Ok(cert)
}
