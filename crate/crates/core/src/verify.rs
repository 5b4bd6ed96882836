//! Certificates: machine-readable verdicts on a [`SolutionSpec`].
//!
//! `−Δ^m u = f` holds by construction, so the inequality certificate checks
//! `0 ≤ f ≤ f_target(u)` pointwise (with a finite-difference spot check that the
//! evaluated `u` really is the potential of `f`). "→ ∞" and "→ 0" claims are
//! certified as monotone trends with a ×10 (resp. ÷10) span over the retained bumps,
//! starting at the third one; this is a finite-sequence surrogate for a limit and
//! every certificate says so.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bump::overlapping_pairs;
use crate::constructor::{self, balance_rows, exponents, log_lower_bound, spec_inputs, BuildOptions, PhiPreset};
use crate::error::{Error, Result};
use crate::potential::{Evaluator, Nonlinearity, QuadratureConfig, SolutionSpec, Theorem};
use crate::sampling;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The check could not be evaluated (e.g. quadrature failure); counts as a failure.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// What mathematical statement the check certifies.
    pub anchor: String,
    pub verdict: Verdict,
    /// Informational checks are reported but do not enter the overall verdict.
    pub mandatory: bool,
    pub evidence: Value,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub title: String,
    pub spec_digest: String,
    pub checks: Vec<Check>,
    /// Every mandatory check passed.
    pub overall: bool,
    pub tolerance_ledger: BTreeMap<String, f64>,
    pub seed: u64,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(title: &str, spec_digest: String, cfg: &VerifyConfig) -> Self {
        Certificate {
            title: title.to_string(),
            spec_digest,
            checks: Vec::new(),
            overall: true,
            tolerance_ledger: cfg.ledger(),
            seed: cfg.seed,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, anchor: &str, pass: bool, evidence: Value, tolerance: Option<f64>) {
        self.push_verdict(name, anchor, if pass { Verdict::Pass } else { Verdict::Fail }, true, evidence, tolerance);
    }

    pub fn push_info(&mut self, name: &str, anchor: &str, pass: bool, evidence: Value, tolerance: Option<f64>) {
        self.push_verdict(name, anchor, if pass { Verdict::Pass } else { Verdict::Fail }, false, evidence, tolerance);
    }

    pub fn push_verdict(&mut self, name: &str, anchor: &str, verdict: Verdict, mandatory: bool, evidence: Value, tolerance: Option<f64>) {
        if mandatory && verdict != Verdict::Pass {
            self.overall = false;
        }
        self.checks.push(Check {
            name: name.to_string(),
            anchor: anchor.to_string(),
            verdict,
            mandatory,
            evidence,
            tolerance,
        });
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> bool {
        self.check(name).is_some_and(|c| c.verdict == Verdict::Pass)
    }

    /// Names of mandatory checks that did not pass.
    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.mandatory && c.verdict != Verdict::Pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Fixed-width table for terminals.
    pub fn summary(&self) -> String {
        let mut s = format!("{} [{}] digest {}\n", self.title, if self.overall { "PASS" } else { "FAIL" }, &self.spec_digest[..16.min(self.spec_digest.len())]);
        for c in &self.checks {
            s.push_str(&format!(
                "  {:<28} {:<13} {}{}\n",
                c.name,
                c.verdict.to_string(),
                c.anchor,
                if c.mandatory { "" } else { " (info)" }
            ));
        }
        s
    }
}

/// Verification knobs; every tolerance is copied into each certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub quadrature: QuadratureConfig,
    pub samples_per_bump: usize,
    pub seed: u64,
    /// Spot points for the finite-difference residual.
    pub residual_points: usize,
    pub residual_tol: f64,
    pub residual_noise_floor: f64,
    /// Step as a fraction of the distance to the nearest singular feature.
    pub residual_step: f64,
    /// Allowed `log f − log f_target`.
    pub inequality_slack: f64,
    /// 0-based position where trends start (the third retained bump).
    pub trend_start: usize,
    pub min_span: f64,
    pub slope_tol: f64,
    pub equality_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            quadrature: QuadratureConfig::default(),
            samples_per_bump: 50,
            seed: 7,
            residual_points: 3,
            residual_tol: 5e-2,
            residual_noise_floor: 5e-3,
            residual_step: 0.125,
            inequality_slack: 1e-9,
            trend_start: 2,
            min_span: 10.0,
            slope_tol: 0.3,
            equality_tol: 1e-12,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        if self.samples_per_bump == 0 {
            return Err(Error::Config("samples_per_bump must be positive".into()));
        }
        if !(self.residual_step > 0.0 && self.residual_step <= 0.25) {
            return Err(Error::Config(format!("residual_step must lie in (0, 1/4], got {}", self.residual_step)));
        }
        if !(self.min_span > 1.0) {
            return Err(Error::Config(format!("min_span must exceed 1, got {}", self.min_span)));
        }
        Ok(())
    }

    pub fn ledger(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("quadrature_rel_tol".to_string(), self.quadrature.rel_tol),
            ("samples_per_bump".to_string(), self.samples_per_bump as f64),
            ("residual_tol".to_string(), self.residual_tol),
            ("residual_noise_floor".to_string(), self.residual_noise_floor),
            ("residual_step".to_string(), self.residual_step),
            ("inequality_slack".to_string(), self.inequality_slack),
            ("trend_start".to_string(), self.trend_start as f64),
            ("min_span".to_string(), self.min_span),
            ("slope_tol".to_string(), self.slope_tol),
            ("equality_tol".to_string(), self.equality_tol),
        ])
    }
}

/// SHA-256 of the spec's canonical JSON.
pub fn spec_digest(spec: &SolutionSpec) -> String {
    let bytes = serde_json::to_vec(spec).expect("specs serialize");
    hex::encode(Sha256::digest(bytes))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Least squares of `log value` on `log r`: `(slope, standard error)`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::Config(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(r, v)) = points.iter().find(|(r, v)| !(*r > 0.0 && *v > 0.0)) {
        return Err(Error::NonPositive(if r > 0.0 { v } else { r }));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(r, v)| (r.ln(), v.ln())).collect();
    fit_log(&logs)
}

/// As [`fit_exponent`] on `(log r, log value)` pairs.
pub fn fit_log(logs: &[(f64, f64)]) -> Result<(f64, f64)> {
    let k = logs.len() as f64;
    if logs.len() < 3 {
        return Err(Error::Config(format!("need at least 3 points, got {}", logs.len())));
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("all abscissae coincide".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - icept - slope * p.0).powi(2)).sum();
    let stderr = (sse / (k - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

/// The bound a construction beats, `log` of its value at `|x|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum BoundForm {
    /// `φ(|x|)|x|^{−a}`
    PowerOnly { a: f64 },
    /// `φ(|x|)|x|^{−(n−2)} log(5/|x|)`
    PowerLog,
    /// `φ(|x|)|x|^{−exponent}`
    PowerExp { exponent: f64 },
    /// `v(y) = O(φ(|y|)|y|^b)` in the exterior, i.e. `u(x) = O(φ(1/|x|)|x|^{−(b+n−2m)})`
    Exterior { b: f64 },
    /// `φ(|x|)` alone (`φ → ∞`)
    Modulus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetBound {
    pub form: BoundForm,
    pub phi: PhiPreset,
    /// Declared limit of `φ` at the singularity.
    pub to_zero: bool,
}

impl TargetBound {
    /// The bound a spec's construction is designed to beat.
    pub fn for_spec(spec: &SolutionSpec) -> Result<Self> {
        let (lambda, phi) = spec_inputs(spec)?;
        let (m, n) = (spec.params.m, spec.params.n);
        let sheet = exponents(spec.theorem, m, n, &lambda)?;
        let q = |v: Option<num_rational::BigRational>| -> f64 {
            use num_traits::ToPrimitive;
            v.and_then(|v| v.to_f64()).unwrap_or(f64::NAN)
        };
        let form = match spec.theorem {
            Theorem::T1_5 => BoundForm::PowerOnly { a: q(sheet.a) },
            Theorem::T1_8 => BoundForm::PowerLog,
            Theorem::T1_10 => BoundForm::PowerExp { exponent: q(sheet.a) },
            Theorem::T1_17 => BoundForm::Exterior { b: q(sheet.b) },
            Theorem::T1_6 | Theorem::T1_11 => BoundForm::Modulus,
        };
        Ok(TargetBound {
            form,
            phi,
            to_zero: spec.theorem.phi_to_zero(),
        })
    }

    pub fn log_value(&self, x_norm: f64, m: u32, n: usize) -> f64 {
        let lphi = self.phi.log_eval(x_norm, self.to_zero);
        let lx = x_norm.ln();
        let n = n as f64;
        match self.form {
            BoundForm::PowerOnly { a } => lphi - a * lx,
            BoundForm::PowerLog => lphi - (n - 2.0) * lx + (5f64.ln() - lx).ln(),
            BoundForm::PowerExp { exponent } => lphi - exponent * lx,
            BoundForm::Exterior { b } => lphi - (b + n - 2.0 * m as f64) * lx,
            BoundForm::Modulus => lphi,
        }
    }
}

/// `u` at every center, in the spec's order.
pub fn center_values(ev: &Evaluator<'_>) -> Result<Vec<f64>> {
    let n = ev.spec().params.n;
    (0..ev.spec().bumps.len()).map(|j| ev.u_local(j, &vec![0.0; n])).collect()
}

fn ratio_span(log_ratios: &[f64], start: usize) -> (bool, f64) {
    let tail = &log_ratios[start.min(log_ratios.len())..];
    let increasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1] > w[0]);
    let span = match (tail.first(), tail.last()) {
        (Some(a), Some(b)) if tail.len() >= 2 => (b - a).exp(),
        _ => f64::NAN,
    };
    (increasing, span)
}

/// Trend checks on a ratio table: strictly increasing from `trend_start` and a
/// final/initial span of at least `min_span`. Usable on any table of values.
pub fn certify_ratio_trend(cert: &mut Certificate, log_ratios: &[f64], cfg: &VerifyConfig, anchor: &str) {
    let (increasing, span) = ratio_span(log_ratios, cfg.trend_start);
    cert.push(
        "ratio-increasing",
        anchor,
        increasing,
        json!({ "log_ratios": log_ratios, "from_position": cfg.trend_start }),
        None,
    );
    cert.push(
        "ratio-span",
        &format!("{anchor}: growth ≥ ×{} over the retained bumps (finite surrogate for → ∞)", cfg.min_span),
        span >= cfg.min_span,
        json!({ "span": span }),
        Some(cfg.min_span),
    );
}

/// `0 ≤ −Δ^m u ≤ f_target(u)`: structural positivity of `f`, sampled comparison of
/// `f` against `f_target(u)` inside every bump, and finite-difference spot checks.
pub fn certify_inequality(spec: &SolutionSpec, cfg: &VerifyConfig) -> Result<Certificate> {
    cfg.validate()?;
    let mut cert = Certificate::new("inequality", spec_digest(spec), cfg);
    let ev = Evaluator::new(spec, &cfg.quadrature)?;
    let n = spec.params.n;

    let overlaps = overlapping_pairs(&spec.bumps);
    let structural = spec.bumps.iter().all(|b| b.epsilon > 0.0 && b.log_mass.is_finite()) && overlaps.is_empty();
    cert.push(
        "rhs-nonnegative",
        "0 ≤ −Δ^m u: f is a sum of nonnegative bumps with disjoint supports",
        structural,
        json!({ "overlapping_pairs": overlaps }),
        None,
    );

    let mut worst = (f64::INFINITY, 0usize, 0usize);
    let mut min_u = f64::INFINITY;
    let mut samples = 0usize;
    let mut failure: Option<String> = None;
    'outer: for (j, b) in spec.bumps.iter().enumerate() {
        for i in 0..cfg.samples_per_bump {
            let xi = if i == 0 { vec![0.0; n] } else { sampling::ball_point(n, cfg.seed + j as u64, i - 1) };
            let u = match ev.u_local(j, &xi) {
                Ok(u) => u,
                Err(e) => {
                    failure = Some(format!("bump {j}, sample {i}: {e}"));
                    break 'outer;
                }
            };
            let x_norm = match norm(&ev.local_point(j, &xi)) {
                v if v > 0.0 => v,
                _ => b.center_norm(),
            };
            let margin = spec.nonlinearity.log_target(x_norm, u) - ev.log_f_local(j, &xi);
            min_u = min_u.min(u);
            if margin < worst.0 {
                worst = (margin, j, i);
            }
            samples += 1;
        }
    }
    let anchor = match spec.nonlinearity {
        Nonlinearity::Power { .. } => "−Δ^m u ≤ u^λ inside every bump",
        Nonlinearity::WeightedPower { .. } => "−Δ^m u ≤ |x|^τ u^λ inside every bump",
        Nonlinearity::ExpPower { .. } => "−Δ^m u ≤ e^{u^λ} inside every bump (compared in log space)",
    };
    match failure {
        Some(msg) => {
            cert.push_verdict("solution-positive", "u > 0 at the samples", Verdict::Inconclusive, true, json!({ "error": msg }), None);
            cert.push_verdict("pointwise-inequality", anchor, Verdict::Inconclusive, true, json!({ "error": msg }), None);
        }
        None => {
            cert.push("solution-positive", "u > 0 at the samples", min_u > 0.0, json!({ "min_u": min_u, "samples": samples }), None);
            cert.push(
                "pointwise-inequality",
                anchor,
                worst.0 >= -cfg.inequality_slack,
                json!({
                    "samples": samples,
                    "min_log_margin": worst.0,
                    "worst_bump": worst.1,
                    "worst_sample": worst.2,
                    "seed": cfg.seed,
                }),
                Some(cfg.inequality_slack),
            );
        }
    }

    // spot checks beside bumps: y = x_j + 0.6|x_j|e_2, at distance ℓ from the nearest
    // singular feature (origin or a bump support)
    let k = spec.bumps.len();
    let mut picks: Vec<usize> = if k == 0 || cfg.residual_points == 0 {
        Vec::new()
    } else {
        (0..cfg.residual_points).map(|i| i * (k - 1) / cfg.residual_points.saturating_sub(1).max(1)).collect()
    };
    picks.dedup();
    let mut rows = Vec::new();
    let mut ok = true;
    let mut inconclusive = None;
    let m = spec.params.m as i32;
    let fact: f64 = (1..=2 * m).map(f64::from).product();
    for &j in &picks {
        let b = &spec.bumps[j];
        let mut y = b.center.clone();
        y[1 % n] += 0.6 * b.center_norm();
        let ell = spec
            .bumps
            .iter()
            .map(|o| norm(&y.iter().zip(&o.center).map(|(p, q)| p - q).collect::<Vec<_>>()) - o.radius())
            .fold(norm(&y), f64::min);
        let h = cfg.residual_step * ell;
        let scale = match ev.u_eval(&y) {
            Ok(u) => fact * u.abs() / ell.powi(2 * m),
            Err(e) => {
                inconclusive = Some(e.to_string());
                break;
            }
        };
        match ev.polyharmonic_residual_scaled(&y, h, scale, cfg.residual_noise_floor) {
            Ok(r) => {
                ok &= r.residual < cfg.residual_tol;
                rows.push(json!({ "position": j, "y_norm": norm(&y), "ell": ell, "h": h, "residual": r.residual, "spread": r.spread }));
            }
            Err(e) => {
                inconclusive = Some(format!("position {j}: {e}"));
                break;
            }
        }
    }
    let anchor = "−Δ^m u = f: finite-difference Δ^m of the evaluated u beside the bumps, relative to (2m)!|u|/ℓ^{2m}";
    match inconclusive {
        Some(msg) => cert.push_verdict("construction-residual", anchor, Verdict::Inconclusive, true, json!({ "error": msg, "rows": rows }), Some(cfg.residual_tol)),
        None => cert.push("construction-residual", anchor, ok, json!({ "rows": rows }), Some(cfg.residual_tol)),
    }
    Ok(cert)
}

/// `log` of the bump lower bound plus the background at every center.
fn log_expected(spec: &SolutionSpec) -> Vec<f64> {
    let (m, n) = (spec.params.m, spec.params.n);
    spec.bumps
        .iter()
        .map(|b| {
            let x = b.center_norm();
            let lb = log_lower_bound(m, n, spec.a_used, b.epsilon, x, b.log_radius);
            let bg = spec.c.ln() - (n as f64 - 2.0) * x.ln();
            lb.max(bg) + (-(lb - bg).abs()).exp().ln_1p()
        })
        .collect()
}

/// `u(x_j)/bound(x_j)` grows without limit (finite-sequence surrogate).
pub fn certify_violation(spec: &SolutionSpec, bound: &TargetBound, cfg: &VerifyConfig) -> Result<Certificate> {
    cfg.validate()?;
    let mut cert = Certificate::new("violation", spec_digest(spec), cfg);
    let ev = Evaluator::new(spec, &cfg.quadrature)?;
    let (m, n) = (spec.params.m, spec.params.n);
    let values = match center_values(&ev) {
        Ok(v) => v,
        Err(e) => {
            cert.push_verdict("ratio-increasing", "u/bound increases", Verdict::Inconclusive, true, json!({ "error": e.to_string() }), None);
            return Ok(cert);
        }
    };
    let centers = spec.centers();
    let log_ratios: Vec<f64> = values
        .iter()
        .zip(&centers)
        .map(|(u, &x)| u.ln() - bound.log_value(x, m, n))
        .collect();
    let table: Vec<Value> = centers
        .iter()
        .zip(&values)
        .zip(&log_ratios)
        .enumerate()
        .map(|(p, ((x, u), lr))| {
            json!({
                "position": p,
                "j": spec.meta.j_indices.get(p),
                "x_norm": x,
                "u": u,
                "background": ev.background(*x),
                "log_bound": bound.log_value(*x, m, n),
                "log_ratio": lr,
            })
        })
        .collect();
    let anchor = match bound.form {
        BoundForm::PowerOnly { .. } => "u ≠ O(φ(|x|)|x|^{−a})",
        BoundForm::PowerLog => "u ≠ O(φ(|x|)|x|^{2−n} log(5/|x|))",
        BoundForm::PowerExp { .. } => "u ≠ O(φ(|x|)|x|^{−(n−2)/(1−λ)})",
        BoundForm::Exterior { .. } => "u ≠ O(φ(1/|x|)|x|^{−(b+n−2m)})",
        BoundForm::Modulus => "u ≠ O(φ(|x|))",
    };
    cert.push_info("ratio-table", anchor, true, json!({ "bound": bound.form, "phi": bound.phi.to_string(), "rows": table }), None);
    certify_ratio_trend(&mut cert, &log_ratios, cfg, anchor);

    if bound.form == BoundForm::Modulus {
        let margins: Vec<f64> = values
            .iter()
            .zip(&centers)
            .map(|(u, &x)| u.ln() - 2.0 * bound.phi.log_eval(x, bound.to_zero))
            .collect();
        let ok = margins.iter().all(|&v| v >= 0.0);
        cert.push("exceeds-phi-squared", "u(x_j) ≥ φ(|x_j|)² at every retained bump", ok, json!({ "log_margins": margins }), None);
    }

    // slope of u at the centers against the lower bound plus background
    let start = cfg.trend_start.min(centers.len());
    let fit_pts: Vec<(f64, f64)> = centers[start..].iter().zip(&values[start..]).map(|(&x, &u)| (x.ln(), u.ln())).collect();
    let exp_pts: Vec<(f64, f64)> = centers[start..].iter().zip(&log_expected(spec)[start..]).map(|(&x, &l)| (x.ln(), l)).collect();
    match (fit_log(&fit_pts), fit_log(&exp_pts)) {
        (Ok((slope, se)), Ok((expected, _))) => cert.push(
            "center-slope",
            "log u(x_j) against log|x_j| follows the constructed lower bound",
            (slope - expected).abs() <= cfg.slope_tol,
            json!({ "slope": slope, "stderr": se, "expected": expected }),
            Some(cfg.slope_tol),
        ),
        (a, b) => cert.push_info(
            "center-slope",
            "too few bumps for a fit",
            true,
            json!({ "fit": a.err().map(|e| e.to_string()), "expected": b.err().map(|e| e.to_string()) }),
            None,
        ),
    }
    let share: Vec<f64> = values.iter().zip(&centers).map(|(u, &x)| 1.0 - ev.background(x) / u).collect();
    cert.push_info("bump-share", "fraction of u(x_j) not due to the C|x|^{2−n} background", true, json!({ "share": share }), None);
    Ok(cert)
}

/// `log` weight `w(|x|)` such that the a priori bound reads `u = o(1/w)`.
fn upper_weight(spec: &SolutionSpec) -> Result<Option<(String, Box<dyn Fn(f64) -> f64>)>> {
    let (lambda, _) = spec_inputs(spec)?;
    let (m, n) = (spec.params.m, spec.params.n);
    let sheet = exponents(spec.theorem, m, n, &lambda)?;
    let q = |v: &Option<num_rational::BigRational>| -> f64 {
        use num_traits::ToPrimitive;
        v.as_ref().and_then(|v| v.to_f64()).unwrap_or(f64::NAN)
    };
    let nf = n as f64;
    Ok(match spec.theorem {
        Theorem::T1_5 => {
            let a = q(&sheet.a);
            Some((format!("u(x)|x|^{a} → 0"), Box::new(move |x: f64| a * x.ln())))
        }
        Theorem::T1_8 => Some((
            "u(x)|x|^{n−2}/log(5/|x|) → 0".into(),
            Box::new(move |x: f64| (nf - 2.0) * x.ln() - (5f64.ln() - x.ln()).ln()),
        )),
        Theorem::T1_10 => {
            let e = q(&sheet.a);
            Some((format!("u(x)|x|^{e} → 0"), Box::new(move |x: f64| e * x.ln())))
        }
        Theorem::T1_17 => {
            let e = q(&sheet.b) + nf - 2.0 * m as f64;
            Some((format!("u(x)|x|^{e} → 0 (interior form of v = o(|y|^b))"), Box::new(move |x: f64| e * x.ln())))
        }
        Theorem::T1_6 | Theorem::T1_11 => None,
    })
}

/// The construction stays under the a priori bound: `u(x_j)·w(|x_j|)` decreases.
pub fn certify_upper_consistency(spec: &SolutionSpec, cfg: &VerifyConfig) -> Result<Certificate> {
    cfg.validate()?;
    let mut cert = Certificate::new("upper-consistency", spec_digest(spec), cfg);
    let Some((anchor, weight)) = upper_weight(spec)? else {
        cert.push_info(
            "not-applicable",
            "no a priori pointwise bound exists in this regime",
            true,
            json!({ "theorem": spec.theorem }),
            None,
        );
        return Ok(cert);
    };
    let ev = Evaluator::new(spec, &cfg.quadrature)?;
    let values = center_values(&ev)?;
    let logs: Vec<f64> = values.iter().zip(spec.centers()).map(|(u, x)| u.ln() + weight(x)).collect();
    let tail = &logs[cfg.trend_start.min(logs.len())..];
    let decreasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0]);
    let decay = if tail.len() >= 2 { (tail[tail.len() - 1] - tail[0]).exp() } else { f64::NAN };
    cert.push("weighted-decreasing", &anchor, decreasing, json!({ "log_weighted": logs, "from_position": cfg.trend_start }), None);
    cert.push(
        "weighted-decay",
        &format!("{anchor}: decay ≤ ×1/{} over the retained bumps (finite surrogate for → 0)", cfg.min_span),
        decay <= 1.0 / cfg.min_span,
        json!({ "decay": decay }),
        Some(1.0 / cfg.min_span),
    );
    Ok(cert)
}

/// Sequence-level conditions of a built spec: spacing, support separation,
/// summability, the radius balance of every bump and the construction's own
/// side conditions. Failures are recorded, never thrown.
pub fn check_admissibility(spec: &SolutionSpec) -> Certificate {
    let cfg = VerifyConfig::default();
    let mut cert = Certificate::new("admissibility", spec_digest(spec), &cfg);
    let (m, n) = (spec.params.m, spec.params.n);
    let (mf, nf) = (m as f64, n as f64);
    let centers = spec.centers();

    let spacing: Vec<f64> = centers.windows(2).map(|w| w[1] / w[0]).collect();
    cert.push(
        "center-spacing",
        "|x_{j+1}| ≤ |x_j|/4 and |x_1| ≤ 1/2",
        spacing.iter().all(|&q| q <= 0.25 * (1.0 + 1e-12)) && centers.first().is_none_or(|&x| x <= 0.5),
        json!({ "ratios": spacing }),
        None,
    );
    let sep: Vec<f64> = spec.bumps.iter().map(|b| b.log_radius - (b.center_norm() / 5.0).ln()).collect();
    cert.push(
        "support-separation",
        "r_j ≤ |x_j|/5",
        sep.iter().all(|&s| s <= 1e-12),
        json!({ "log_excess": sep }),
        Some(1e-12),
    );
    let ratio = spec.bumps.windows(2).map(|w| w[1].epsilon / w[0].epsilon).fold(0.0, f64::max);
    let eps_sum = spec.bumps.first().map(|b| b.epsilon / (1.0 - ratio)).unwrap_or(0.0);
    cert.push(
        "epsilon-summable",
        "Σε_j < ∞ via the geometric majorant ε_1/(1 − q), q = max ε_{j+1}/ε_j",
        ratio < 1.0,
        json!({ "q": ratio, "majorant": eps_sum }),
        None,
    );
    let mass_residual = spec
        .bumps
        .iter()
        // log M and n log r can both be ~1e21 and cancel; measure against the larger term
        .map(|b| {
            let size = b.log_mass.abs().max(n as f64 * b.log_radius.abs()).max(1.0);
            b.mass_identity_residual(m).abs() / size
        })
        .fold(0.0, f64::max);
    cert.push_info("mass-identity", "M_j r_j^n = ε_j|x_j|^{2−2m} (relative, in log space)", mass_residual < 1e-12, json!({ "max_residual": mass_residual }), Some(1e-12));

    let inputs = spec_inputs(spec);
    let (lambda, phi) = match inputs {
        Ok(v) => v,
        Err(e) => {
            cert.push("lambda-window", "λ in the admissible window", false, json!({ "error": e.to_string() }), None);
            return cert;
        }
    };
    match exponents(spec.theorem, m, n, &lambda) {
        Ok(sheet) => {
            cert.push("lambda-window", "λ in the admissible window", true, json!({ "lambda": lambda.to_string(), "window": sheet.window.to_string() }), None);
            let ids: Vec<Value> = sheet.identities.iter().map(|i| json!({ "name": i.name, "lhs": i.lhs.to_string(), "rhs": i.rhs.to_string() })).collect();
            cert.push("exponent-identities", "closed forms of the exponents agree exactly", sheet.identities.iter().all(|i| i.holds()), json!(ids), None);
        }
        Err(e) => cert.push("lambda-window", "λ in the admissible window", false, json!({ "lambda": lambda.to_string(), "error": e.to_string() }), None),
    }

    let rows = balance_rows(spec);
    let balance_anchor = if 2 * m as usize == n {
        match spec.nonlinearity {
            Nonlinearity::ExpPower { .. } => "log(ψ/|x|^{2n−2}) + nL ≤ (AψL/|x|^{n−2})^λ, L = log(|x_j|/r_j)",
            _ => "L ≥ (|x|/r)^{n/λ}|x|^a/(Aψ^{(λ−1)/λ}), L = log(|x_j|/r_j)",
        }
    } else {
        "r^{n−λ(n−2m)} ≥ 2^{|τ|}|x|^{(λ−1)(2m−2)−τ}/(A^λψ^{λ−1})"
    };
    let worst = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let ok = rows.iter().all(|r| r.margin >= 0.0 || r.relative_residual <= cfg.equality_tol);
    cert.push("radius-balance", balance_anchor, ok, json!({ "rows": rows, "min_log_margin": worst }), Some(cfg.equality_tol));
    if spec.theorem == Theorem::T1_5 {
        let max_res = rows.iter().map(|r| r.relative_residual).fold(0.0, f64::max);
        cert.push_info(
            "radius-balance-equality",
            "the radius balance holds with equality by construction",
            max_res < cfg.equality_tol,
            json!({ "max_relative_residual": max_res }),
            Some(cfg.equality_tol),
        );
    }

    let a = spec.a_used;
    let to_zero = spec.theorem.phi_to_zero();
    match spec.theorem {
        Theorem::T1_6 => {
            let margins: Vec<f64> = spec
                .bumps
                .iter()
                .map(|b| {
                    let x = b.center_norm();
                    a.ln() + b.epsilon.ln() - (2.0 * mf - 2.0) * x.ln() - (nf - 2.0 * mf) * b.log_radius - 2.0 * phi.log_eval(x, to_zero)
                })
                .collect();
            cert.push(
                "bump-beats-phi-squared",
                "Aψ(|x_j|)/(|x_j|^{2m−2}r_j^{n−2m}) ≥ 2φ(|x_j|)²",
                margins.iter().all(|&v| v >= 2f64.ln() - 1e-12),
                json!({ "log_ratios": margins }),
                Some(2.0),
            );
        }
        Theorem::T1_8 => {
            let l = lambda_f(spec);
            let aa = ((nf - 2.0) * (l - 1.0) - nf) / l;
            let margins: Vec<f64> = spec
                .bumps
                .iter()
                .map(|b| {
                    let x = b.center_norm();
                    let log_rho = (nf / (l * a)).ln() + aa * x.ln() - (l - 1.0) / l * b.epsilon.ln();
                    (x.ln() - b.log_radius) - l / nf * (-log_rho)
                })
                .collect();
            cert.push(
                "log-radius-floor",
                "log(|x_j|/r_j) ≥ (λ/n) log(1/ρ_j)",
                margins.iter().all(|&v| v >= -1e-9),
                json!({ "margins": margins }),
                None,
            );
        }
        Theorem::T1_10 => {
            let margins: Vec<f64> = spec.bumps.iter().map(|b| (b.center_norm().ln() - b.log_radius) - (2.0 * nf - 2.0) * -b.center_norm().ln()).collect();
            cert.push("log-radius-floor", "log(|x_j|/r_j) > log(1/|x_j|^{2n−2})", margins.iter().all(|&v| v > 0.0), json!({ "margins": margins }), None);
        }
        Theorem::T1_11 => {
            let first: Vec<f64> = spec.bumps.iter().map(|b| a * (b.epsilon.ln() - (nf - 2.0) * b.center_norm().ln()).exp() / (nf + 1.0)).collect();
            cert.push("bump-amplitude", "Aψ(|x_j|)/|x_j|^{n−2} > n + 1", first.iter().all(|&v| v > 1.0), json!({ "ratios": first }), None);
            let second: Vec<f64> = spec
                .bumps
                .iter()
                .map(|b| ((nf + 1.0) * (b.center_norm().ln() - b.log_radius)).ln() - 2.0 * phi.log_eval(b.center_norm(), to_zero))
                .collect();
            cert.push("log-radius-floor", "(n + 1) log(|x_j|/r_j) > φ(|x_j|)²", second.iter().all(|&v| v > 0.0), json!({ "log_ratios": second }), None);
        }
        Theorem::T1_5 | Theorem::T1_17 => {}
    }
    cert
}

fn lambda_f(spec: &SolutionSpec) -> f64 {
    spec.nonlinearity.lambda()
}

/// Build, certify the inequality, and halve `A_used` (at most `max_halvings` times)
/// until the pointwise inequality holds.
pub fn build_certified(
    theorem: Theorem,
    m: u32,
    n: usize,
    lambda: &num_rational::BigRational,
    phi: PhiPreset,
    opts: &BuildOptions,
    cfg: &VerifyConfig,
    max_halvings: u32,
) -> Result<(SolutionSpec, Certificate)> {
    let mut opts = opts.clone();
    let mut halvings = 0;
    loop {
        let mut spec = constructor::build(theorem, m, n, lambda, phi, &opts)?;
        spec.meta.halvings = halvings;
        let cert = certify_inequality(&spec, cfg)?;
        if cert.passed("pointwise-inequality") || halvings >= max_halvings {
            return Ok((spec, cert));
        }
        halvings += 1;
        opts.a_used = Some(spec.a_used / 2.0);
    }
}

/// Negative controls.
pub mod tamper {
    use super::*;

    /// Multiply the stored `M_j` by `factor` without touching anything else.
    pub fn scale_mass(spec: &SolutionSpec, position: usize, factor: f64) -> SolutionSpec {
        let mut s = spec.clone();
        s.bumps[position].log_mass += factor.ln();
        s
    }

    /// Move `r_j` to `|x_j|/4` (beyond the separation bound), with `M_j` recomputed.
    pub fn widen_radius(spec: &SolutionSpec, position: usize) -> SolutionSpec {
        let mut s = spec.clone();
        let b = &s.bumps[position];
        let wide = (b.center_norm() / 4.0).ln();
        s.bumps[position] = b.with_radius(wide, s.params.m);
        s
    }
}
