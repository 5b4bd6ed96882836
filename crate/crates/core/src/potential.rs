//! The potential `N(x) = ∫ −Ψ(x, y) f(y) dy` of a bump right-hand side and the
//! solution `u = N + C|x|^{2−n}`.
//!
//! Every bump integral is reduced to at most one dimension. For fixed `x`,
//! `y ↦ Ψ(x, y)` is polyharmonic of order `m` on any ball that avoids `x`, so
//! outside a bump Pizzetti's mean-value formula integrates it exactly from the
//! Taylor remainders of `Δ^kΦ` at the bump center. Inside a bump the Taylor part is
//! a polynomial in `y` (same treatment) and the singular part `Φ(x − y)` becomes a
//! radial integral split at `|ξ|`; its spherical means are again closed-form
//! Pizzetti sums, with the two radii swapped when the sphere encloses `x`.
//!
//! Points inside a bump can be addressed by local coordinates `ξ`, which keeps
//! bumps with radii far below `f64` range evaluable.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bump::{self, standard_profile, BumpProfile, BumpSpec};
use crate::dd::{self, Dd, KahanSum};
use crate::error::{Error, Result};
use crate::kernel::{fundamental_normalization, make_phi, sphere_area, CaseTag, KernelSet, ProblemParams, TaylorRemainder};
use crate::quad::Rule;
use crate::sampling;
use crate::symcalc::{norm, rat, PointCtx, RadialExpr};

/// Tolerances and node counts for every quadrature in this module.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Two refinements must agree to this relative tolerance.
    pub rel_tol: f64,
    /// Panels per radial sub-interval.
    pub polar_rings: usize,
    /// Gauss–Legendre nodes per panel.
    pub angular_nodes: usize,
    /// Split radial integrals at the singular radius.
    pub split_singular: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            polar_rings: 6,
            angular_nodes: 24,
            split_singular: true,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::Config(format!("rel_tol must lie in (0, 1e-2], got {}", self.rel_tol)));
        }
        if self.polar_rings < 4 || self.angular_nodes < 4 {
            return Err(Error::Config(format!(
                "node counts must be at least 4, got polar_rings={} angular_nodes={}",
                self.polar_rings, self.angular_nodes
            )));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        QuadratureConfig {
            polar_rings: 2 * self.polar_rings,
            angular_nodes: 2 * self.angular_nodes,
            ..self.clone()
        }
    }
}

/// The constructions this crate can instantiate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theorem {
    /// power growth beyond `|x|^{−a}`, case (iv)
    T1_5,
    /// arbitrarily large growth, case (iv)
    T1_6,
    /// beyond `|x|^{2−n} log(5/|x|)`, case (v)
    T1_8,
    /// beyond `|x|^{−(n−2)/(1−λ)}` for `e^{u^λ}`, case (v)
    T1_10,
    /// arbitrarily large growth for `e^{u^λ}`, case (v)
    T1_11,
    /// growth at infinity via the Kelvin transform, case (iv)
    T1_17,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::T1_5,
        Theorem::T1_6,
        Theorem::T1_8,
        Theorem::T1_10,
        Theorem::T1_11,
        Theorem::T1_17,
    ];

    /// Short dotted label, e.g. `1.5`.
    pub fn label(&self) -> &'static str {
        match self {
            Theorem::T1_5 => "1.5",
            Theorem::T1_6 => "1.6",
            Theorem::T1_8 => "1.8",
            Theorem::T1_10 => "1.10",
            Theorem::T1_11 => "1.11",
            Theorem::T1_17 => "1.17",
        }
    }

    pub fn case(&self) -> CaseTag {
        match self {
            Theorem::T1_5 | Theorem::T1_6 | Theorem::T1_17 => CaseTag::IV,
            _ => CaseTag::V,
        }
    }

    /// Whether the modulus `φ` must tend to zero (else to infinity).
    pub fn phi_to_zero(&self) -> bool {
        !matches!(self, Theorem::T1_6 | Theorem::T1_11)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.label().replace('.', "_"))
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches(['T', 't']).replace('_', ".");
        Theorem::ALL
            .into_iter()
            .find(|th| th.label() == t)
            .ok_or_else(|| Error::Config(format!("unknown theorem {s:?}; expected one of 1.5, 1.6, 1.8, 1.10, 1.11, 1.17")))
    }
}

/// The target nonlinearity `f(x, u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `u^λ`
    Power { lambda: f64 },
    /// `|x|^τ u^λ`
    WeightedPower { lambda: f64, tau: f64 },
    /// `e^{u^λ}`
    ExpPower { lambda: f64 },
}

impl Nonlinearity {
    pub fn lambda(&self) -> f64 {
        match *self {
            Nonlinearity::Power { lambda } | Nonlinearity::WeightedPower { lambda, .. } | Nonlinearity::ExpPower { lambda } => {
                lambda
            }
        }
    }

    /// `log f(x, u)`; `−∞` for `u ≤ 0` in the power families.
    pub fn log_target(&self, x_norm: f64, u: f64) -> f64 {
        match *self {
            Nonlinearity::Power { lambda } => {
                if u > 0.0 {
                    lambda * u.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Nonlinearity::WeightedPower { lambda, tau } => {
                if u > 0.0 {
                    tau * x_norm.ln() + lambda * u.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Nonlinearity::ExpPower { lambda } => u.max(0.0).powf(lambda),
        }
    }
}

/// Bookkeeping recorded by the constructor.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpecMeta {
    /// Modulus preset, e.g. `pow:1`.
    pub phi: Option<String>,
    /// `λ` as an exact rational string.
    pub lambda_exact: Option<String>,
    /// Sequence index `j` of every retained bump (`|x_j| = 2^{−2j−1}`).
    pub j_indices: Vec<u32>,
    /// Smallest `j` considered.
    pub j_offset: u32,
    /// `max ε_{j+1}/ε_j`: `Σε_j ≤ ε_1/(1 − ratio)` when below one.
    pub epsilon_ratio: Option<f64>,
    /// Lower-bound constant `A` the potential actually achieves.
    pub a_lower: Option<f64>,
    /// Times `A_used` was halved after a failed inequality check.
    pub halvings: u32,
    /// Leading `j` were dropped until the bump lower bound exceeds `|x_j|^{2−n}`.
    pub visibility_filter: bool,
    /// Modulus evaluated at the centers, `φ(|x_j|)` (`φ(1/|x_j|)` for exterior specs).
    pub phi_values: Vec<f64>,
    pub notes: Vec<String>,
}

/// `u(x) = N(x) + C|x|^{−(n−2)}` with `f = Σ_j M_j φ_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSpec {
    pub params: ProblemParams,
    pub bumps: Vec<BumpSpec>,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "A_used")]
    pub a_used: f64,
    pub theorem: Theorem,
    pub nonlinearity: Nonlinearity,
    #[serde(default)]
    pub meta: SpecMeta,
}

impl SolutionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::NonPositive(self.c));
        }
        if !(self.a_used > 0.0 && self.a_used.is_finite()) {
            return Err(Error::NonPositive(self.a_used));
        }
        for b in &self.bumps {
            if b.dim() != self.params.n {
                return Err(Error::Dimension {
                    expected: self.params.n,
                    got: b.dim(),
                });
            }
            if !(b.epsilon > 0.0) || b.log_radius.is_nan() || b.center_norm() == 0.0 {
                return Err(Error::Spec(format!("malformed bump at {:?}", b.center)));
            }
        }
        Ok(())
    }

    /// Positions (0-based) ordered by decreasing `|x_j|`.
    pub fn centers(&self) -> Vec<f64> {
        self.bumps.iter().map(BumpSpec::center_norm).collect()
    }
}

/// Pizzetti data for spherical means of a homogeneous radial kernel `F` of degree `s`
/// (possibly times `log(5/r)`): `mean_{|θ|=1} F(z − ρθ) = Σ_k c_k min^{2k} Δ^kF(max)`.
#[derive(Clone, Debug)]
struct SphereMeans {
    n: usize,
    /// `(c_k, [(coeff, exponent, has_log)])` for `k < m`
    levels: Vec<(f64, Vec<(f64, i32, bool)>)>,
}

impl SphereMeans {
    fn new(f: &RadialExpr, m: u32) -> Self {
        let n = f.dim();
        let mut levels = Vec::new();
        let mut g = f.clone();
        for k in 0..m as usize {
            let terms = g
                .radial_profile()
                .expect("radial kernel")
                .into_iter()
                .map(|(c, e, l)| (dd::to_f64(dd::from_rational(&c)), e, l == 1))
                .collect();
            levels.push((bump::pizzetti_coeff(n, k), terms));
            g = g.laplacian();
        }
        SphereMeans { n, levels }
    }

    /// Mean of `F(r(d e − ρθ)) / r^s` over `θ`, with `ell = log(5/r)`.
    fn mean(&self, d: f64, rho: f64, ell: f64) -> f64 {
        let (lo, hi) = if rho < d { (rho, d) } else { (d, rho) };
        let ln_hi = hi.ln();
        let mut acc = 0.0;
        for (k, (ck, terms)) in self.levels.iter().enumerate() {
            let lo2k = lo.powi(2 * k as i32);
            if lo2k == 0.0 && k > 0 {
                continue;
            }
            let mut t = 0.0;
            for &(c, e, log) in terms {
                let v = c * hi.powi(e);
                t += if log { v * (ell - ln_hi) } else { v };
            }
            acc += ck * lo2k * t;
        }
        acc
    }

    /// `∫_{|η|<1} φ(η) F(r(ξ − η)) dη / r^s` for `|ξ| = d`.
    fn ball_average(&self, d: f64, ell: f64, rule: &Rule, panels: usize, split: bool) -> f64 {
        let integrand = |rho: f64| bump::profile_radial(rho) * rho.powi(self.n as i32 - 1) * self.mean(d, rho, ell);
        let area = sphere_area(self.n);
        let v = if split && d > 0.0 && d < 1.0 {
            rule.integrate(0.0, d, panels, integrand) + rule.integrate(d, 1.0, panels, integrand)
        } else {
            rule.integrate(0.0, 1.0, 2 * panels, integrand)
        };
        area * v
    }

    fn ball_average_checked(&self, d: f64, ell: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let rule = Rule::new(cfg.angular_nodes);
        let coarse = self.ball_average(d, ell, &rule, cfg.polar_rings, cfg.split_singular);
        let fine = self.ball_average(d, ell, &rule, 2 * cfg.polar_rings, cfg.split_singular);
        if (fine - coarse).abs() > cfg.rel_tol * fine.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Quadrature(format!(
                "radial integral at |ξ|={d}: refinements {coarse:e} and {fine:e} disagree beyond {}",
                cfg.rel_tol
            )));
        }
        Ok(fine)
    }
}

struct Level {
    /// `w_k = |S^{n−1}| c_k μ_k`
    weight: f64,
    /// Taylor remainder of `Δ^kΦ` of order `2m − 3 − 2k`.
    rem: TaylorRemainder,
}

/// Derivative tables of every level at one evaluation point.
struct PointData {
    x: Vec<f64>,
    ctx: PointCtx,
    tables: Vec<Vec<Dd>>,
}

/// Evaluates `N` and `u` for one spec.
pub struct Evaluator<'a> {
    spec: &'a SolutionSpec,
    cfg: QuadratureConfig,
    pub kernels: KernelSet,
    pub profile: BumpProfile,
    levels: Vec<Level>,
    means: SphereMeans,
}

impl<'a> Evaluator<'a> {
    pub fn new(spec: &'a SolutionSpec, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        spec.validate()?;
        let kernels = make_phi(&spec.params);
        let m = spec.params.m;
        let n = spec.params.n;
        let profile = standard_profile(n);
        let mut levels = Vec::new();
        let mut f = kernels.phi.clone();
        for k in 0..m as usize {
            levels.push(Level {
                weight: profile.pizzetti_weight(k),
                rem: TaylorRemainder::new(&f, 2 * m as i32 - 3 - 2 * k as i32),
            });
            f = f.laplacian();
        }
        let means = SphereMeans::new(&kernels.phi, m);
        Ok(Evaluator {
            spec,
            cfg: cfg.clone(),
            kernels,
            profile,
            levels,
            means,
        })
    }

    pub fn spec(&self) -> &SolutionSpec {
        self.spec
    }

    fn point(&self, x: &[f64]) -> Result<PointData> {
        if x.len() != self.spec.params.n {
            return Err(Error::Dimension {
                expected: self.spec.params.n,
                got: x.len(),
            });
        }
        let ctx = PointCtx::new(x)?;
        let tables = self.levels.iter().map(|l| l.rem.table(&ctx)).collect();
        Ok(PointData {
            x: x.to_vec(),
            ctx,
            tables,
        })
    }

    fn mass(&self, b: &BumpSpec) -> f64 {
        b.log_source(self.spec.params.m).exp()
    }

    /// Contribution of a bump whose support does not contain `x`.
    fn outside(&self, p: &PointData, b: &BumpSpec) -> Result<f64> {
        let mut acc = KahanSum::default();
        for (k, lvl) in self.levels.iter().enumerate() {
            let scale = (2.0 * k as f64 * b.log_radius).exp();
            if scale == 0.0 {
                continue;
            }
            let rem = if lvl.rem.order() < 0 {
                lvl.rem.remainder(&p.x, &b.center)?
            } else {
                let w = lvl.rem.weights(&b.center);
                lvl.rem.remainder_with(&p.x, &p.ctx, &p.tables[k], &b.center, &w)?
            };
            acc.add(lvl.weight * scale * dd::to_f64(rem));
        }
        Ok(-self.mass(b) * acc.value())
    }

    /// Contribution of the bump that contains `x = x_j + r ξ`.
    fn inside(&self, p: &PointData, b: &BumpSpec, xi_norm: f64) -> Result<f64> {
        let n = self.spec.params.n as f64;
        let s = 2.0 * self.spec.params.m as f64 - n;
        let ell = 5f64.ln() - b.log_radius;
        let singular = self.means.ball_average_checked(xi_norm, ell, &self.cfg)?;
        let singular_scale = (b.log_source(self.spec.params.m) + s * b.log_radius).exp();
        let mut poly = KahanSum::default();
        for (k, lvl) in self.levels.iter().enumerate() {
            if lvl.rem.order() < 0 {
                continue;
            }
            let scale = (2.0 * k as f64 * b.log_radius).exp();
            if scale == 0.0 {
                continue;
            }
            let w = lvl.rem.weights(&b.center);
            poly.add(lvl.weight * scale * dd::to_f64(lvl.rem.polynomial_with(&p.ctx, &p.tables[k], &w)));
        }
        Ok(-singular_scale * singular + self.mass(b) * poly.value())
    }

    fn n_at(&self, p: &PointData, own: Option<(usize, f64)>) -> Result<f64> {
        let mut acc = KahanSum::default();
        for (j, b) in self.spec.bumps.iter().enumerate() {
            let v = match own {
                Some((k, d)) if k == j => self.inside(p, b, d)?,
                _ => self.outside(p, b)?,
            };
            acc.add(v);
        }
        Ok(acc.value())
    }

    /// Index and `|ξ|` of the bump containing `x`, if any.
    fn locate(&self, x: &[f64]) -> Option<(usize, f64)> {
        self.spec
            .bumps
            .iter()
            .enumerate()
            .find_map(|(j, b)| b.local(x).map(|xi| (j, norm(&xi))))
    }

    pub fn n_eval(&self, x: &[f64]) -> Result<f64> {
        let p = self.point(x)?;
        self.n_at(&p, self.locate(x))
    }

    pub fn u_eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.n_eval(x)? + self.background(norm(x)))
    }

    /// `C|x|^{2−n}`
    pub fn background(&self, r: f64) -> f64 {
        self.spec.c * r.powi(2 - self.spec.params.n as i32)
    }

    /// Global coordinates of `x_j + r_j ξ` (equal to `x_j` when `r_j` underflows).
    pub fn local_point(&self, j: usize, xi: &[f64]) -> Vec<f64> {
        let b = &self.spec.bumps[j];
        let r = b.radius();
        b.center.iter().zip(xi).map(|(c, v)| c + r * v).collect()
    }

    /// `N(x_j + r_j ξ)` for `|ξ| < 1`.
    pub fn n_local(&self, j: usize, xi: &[f64]) -> Result<f64> {
        let d = norm(xi);
        if d >= 1.0 {
            return Err(Error::Spec(format!("local coordinate |ξ|={d} outside the bump")));
        }
        let x = self.local_point(j, xi);
        let p = self.point(&x)?;
        self.n_at(&p, Some((j, d)))
    }

    pub fn u_local(&self, j: usize, xi: &[f64]) -> Result<f64> {
        let x = self.local_point(j, xi);
        Ok(self.n_local(j, xi)? + self.background(norm(&x)))
    }

    /// `log f(x_j + r_j ξ)` from the stored mass coefficient.
    pub fn log_f_local(&self, j: usize, xi: &[f64]) -> f64 {
        self.spec.bumps[j].log_f_local(xi)
    }

    /// Finite-difference residual `|Δ^m u + f| / (1 + f)` at `x`.
    ///
    /// `Δ^m` is the `m`-fold composition of the `(2n+1)`-point Laplacian, evaluated at
    /// steps `h`, `h/2`, `h/4` and Richardson-extrapolated twice. The two extrapolants
    /// must agree to within `max(residual, noise_floor)`, else the result is reported as
    /// noise-dominated.
    pub fn polyharmonic_residual(&self, x: &[f64], h: f64, noise_floor: f64) -> Result<ResidualReport> {
        self.polyharmonic_residual_scaled(x, h, 1.0, noise_floor)
    }

    /// As [`Evaluator::polyharmonic_residual`] with `1` in the denominator replaced by
    /// `scale`, for points where `u` lives at a scale far from unity (use
    /// `|u(x)|/ℓ^{2m}` with `ℓ` the distance to the nearest singular feature).
    pub fn polyharmonic_residual_scaled(&self, x: &[f64], h: f64, scale: f64, noise_floor: f64) -> Result<ResidualReport> {
        if let Some((j, _)) = self.locate(x) {
            let r = self.spec.bumps[j].radius();
            if h > r / 8.0 {
                return Err(Error::Config(format!("step {h} exceeds r_j/8 = {} inside bump {j}", r / 8.0)));
            }
        }
        let n = self.spec.params.n;
        let m = self.spec.params.m;
        let stencil = iterated_stencil(n, m);
        let apply = |step: f64| -> Result<f64> {
            let mut acc = KahanSum::default();
            for (off, &c) in &stencil {
                let y: Vec<f64> = x.iter().zip(off).map(|(a, &o)| a + step * o as f64).collect();
                acc.add(c as f64 * self.u_eval(&y)?);
            }
            Ok(acc.value() / step.powi(2 * m as i32))
        };
        let d0 = apply(h)?;
        let d1 = apply(h / 2.0)?;
        let d2 = apply(h / 4.0)?;
        let r1 = (4.0 * d1 - d0) / 3.0;
        let r2 = (4.0 * d2 - d1) / 3.0;
        let f = bump::f_eval(&self.spec.bumps, x)?;
        let residual = (r2 + f).abs() / (scale + f);
        let spread = (r1 - r2).abs() / (scale + f);
        let bound = residual.max(noise_floor);
        if spread > bound {
            return Err(Error::NoiseDominated { spread, bound });
        }
        Ok(ResidualReport {
            residual,
            spread,
            f,
            laplacian: r2,
            h,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: f64,
    /// Disagreement of the two Richardson extrapolants, scaled like `residual`.
    pub spread: f64,
    pub f: f64,
    /// Extrapolated `Δ^m u(x)`.
    pub laplacian: f64,
    pub h: f64,
}

/// Integer coefficients of the `m`-fold composed `(2n+1)`-point Laplacian, keyed by
/// lattice offset (divide by `h^{2m}`).
pub fn iterated_stencil(n: usize, m: u32) -> BTreeMap<Vec<i32>, i64> {
    let mut cur: BTreeMap<Vec<i32>, i64> = BTreeMap::new();
    cur.insert(vec![0; n], 1);
    for _ in 0..m {
        let mut next: BTreeMap<Vec<i32>, i64> = BTreeMap::new();
        for (off, &c) in &cur {
            *next.entry(off.clone()).or_insert(0) -= 2 * n as i64 * c;
            for i in 0..n {
                for sgn in [-1, 1] {
                    let mut o = off.clone();
                    o[i] += sgn;
                    *next.entry(o).or_insert(0) += c;
                }
            }
        }
        next.retain(|_, c| *c != 0);
        cur = next;
    }
    cur
}

/// A single bump of radius `r` at `center·e_1` with `ε = eps` and `C = A = 1`: the
/// smallest spec on which the residual oracle and the quadrature can be checked.
pub fn calibration_spec(m: u32, n: usize, center: f64, r: f64, eps: f64) -> Result<SolutionSpec> {
    let mut c = vec![0.0; n];
    c[0] = center;
    let spec = SolutionSpec {
        params: ProblemParams::normalized(m, n)?,
        bumps: vec![BumpSpec::new(c, r, eps, m)],
        c: 1.0,
        a_used: 1.0,
        theorem: Theorem::T1_5,
        nonlinearity: Nonlinearity::Power { lambda: 3.0 },
        meta: SpecMeta::default(),
    };
    spec.validate()?;
    Ok(spec)
}

/// `N(x)` (builds a throw-away evaluator).
pub fn n_eval(spec: &SolutionSpec, x: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    Evaluator::new(spec, cfg)?.n_eval(x)
}

/// `u(x) = N(x) + C|x|^{2−n}`.
pub fn u_eval(spec: &SolutionSpec, x: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    Evaluator::new(spec, cfg)?.u_eval(x)
}

/// Smallest `C ≥ 1` with `N + C|x|^{2−n} ≥ C|x|^{2−n}/2` at all sample points.
///
/// Samples: `budget` low-discrepancy points in every bump (plus its center), `budget`
/// points on log-uniform shells between consecutive bumps, and points along the
/// center axis just outside each support.
pub fn choose_c(spec: &SolutionSpec, budget: usize, cfg: &QuadratureConfig) -> Result<f64> {
    let ev = Evaluator::new(spec, cfg)?;
    let n = spec.params.n;
    let weight = |x_norm: f64| x_norm.powi(n as i32 - 2);
    let mut worst: f64 = 0.0;
    let mut consider = |v: f64, x_norm: f64| {
        worst = worst.max(-v * weight(x_norm));
    };
    for (j, b) in spec.bumps.iter().enumerate() {
        consider(ev.n_local(j, &vec![0.0; n])?, b.center_norm());
        for i in 0..budget {
            let xi = sampling::ball_point(n, 17 + j as u64, i);
            let x = ev.local_point(j, &xi);
            consider(ev.n_local(j, &xi)?, norm(&x));
        }
        // just outside the support, along the center axis
        let xn = b.center_norm();
        let r = b.radius();
        for t in [1.05, 1.5, 3.0] {
            for sgn in [-1.0, 1.0] {
                let s = 1.0 + sgn * t * r / xn;
                if s > 0.0 {
                    let x: Vec<f64> = b.center.iter().map(|c| c * s).collect();
                    if ev.locate(&x).is_none() {
                        consider(ev.n_eval(&x)?, norm(&x));
                    }
                }
            }
        }
    }
    let mut radii: Vec<f64> = spec.centers();
    radii.push(1.0);
    radii.sort_by(|a, b| a.total_cmp(b));
    for w in radii.windows(2) {
        let (lo, hi) = (w[0].ln(), w[1].ln());
        for i in 0..budget {
            let t = sampling::halton(3, i, 0);
            let rr = (lo + (hi - lo) * t).exp();
            let dir = sampling::sphere_point(n, 3, i, 1);
            let x: Vec<f64> = dir.iter().map(|v| v * rr).collect();
            if ev.locate(&x).is_none() {
                consider(ev.n_eval(&x)?, rr);
            }
        }
    }
    Ok((2.0 * worst).max(1.0))
}

/// `J = min_{|ξ|≤1} ∫ φ(η)|ξ − η|^{2m−n} dη` for `2m < n`; the profile mass `I` for
/// `2m = n`.
pub fn choose_a(profile: &BumpProfile, params: &ProblemParams) -> Result<f64> {
    let (m, n) = (params.m, params.n);
    if 2 * m as usize == n {
        return Ok(profile.mass);
    }
    if 2 * m as usize > n {
        return Err(Error::Inadmissible(format!("lower-bound constant needs 2m ≤ n, got m={m}, n={n}")));
    }
    let grid = riesz_profile(m, n, 32, &QuadratureConfig::default())?;
    Ok(grid.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min))
}

/// `(|ξ|, ∫ φ(η)|ξ − η|^{2m−n} dη)` on a uniform grid of `points + 1` radii in `[0, 1]`.
pub fn riesz_profile(m: u32, n: usize, points: usize, cfg: &QuadratureConfig) -> Result<Vec<(f64, f64)>> {
    let s = 2 * m as i32 - n as i32;
    let kernel = RadialExpr::rpow(n, rat(1, 1), s);
    let means = SphereMeans::new(&kernel, m);
    (0..=points)
        .map(|i| {
            let d = i as f64 / points as f64;
            Ok((d, means.ball_average_checked(d, 0.0, cfg)?))
        })
        .collect()
}

/// Lower-bound constant for `u` inside a bump: 90% of `A_Φ · choose_a`.
pub fn lower_bound_constant(profile: &BumpProfile, params: &ProblemParams) -> Result<f64> {
    Ok(0.9 * fundamental_normalization(params.m, params.n)? * choose_a(profile, params)?)
}

/// `∫_{|η|<1} Ψ(x, x_j + rη) φ(η) dη` by brute-force quadrature, independent of the
/// Pizzetti reductions used by [`Evaluator`].
///
/// Coordinates are `(ρ, t)` around the axis through `x_j` and `x`; the remaining
/// directions are averaged with the `2(n−1)` cross points of the orthogonal sphere,
/// which is exact for the cubic Taylor polynomial (`m ≤ 3`).
pub fn bump_integral_oracle(kernels: &KernelSet, b: &BumpSpec, x: &[f64], nodes: usize, panels: usize) -> Result<f64> {
    let n = b.dim();
    let r = b.radius();
    let rem = kernels.remainder();
    let ctx = PointCtx::new(x)?;
    let table = rem.table(&ctx);
    let diff: Vec<f64> = x.iter().zip(&b.center).map(|(a, c)| a - c).collect();
    let dist = norm(&diff);
    let mut e: Vec<f64> = if dist > 0.0 {
        diff.iter().map(|v| v / dist).collect()
    } else {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        v
    };
    let basis = orthonormal_complement(&mut e);
    let d = dist / r;
    let rule = Rule::new(nodes);
    let psi_at = |rho: f64, t: f64| -> Result<f64> {
        let (c, s) = (t.cos(), t.sin());
        let mut acc = 0.0;
        for w in &basis {
            for sgn in [-1.0, 1.0] {
                let y: Vec<f64> = (0..n)
                    .map(|i| b.center[i] + r * rho * (c * e[i] + sgn * s * w[i]))
                    .collect();
                let weights = rem.weights(&y);
                acc += dd::to_f64(rem.remainder_with(x, &ctx, &table, &y, &weights)?);
            }
        }
        Ok(acc / (2 * basis.len()) as f64)
    };
    let pieces: Vec<(f64, f64)> = if d > 0.0 && d < 1.0 {
        vec![(0.0, d), (d, 1.0)]
    } else {
        vec![(0.0, 1.0)]
    };
    let tnodes = rule.mapped(0.0, std::f64::consts::PI, 2 * panels);
    let mut total = KahanSum::default();
    for (a, bnd) in pieces {
        for (rho, wr) in rule.mapped(a, bnd, panels) {
            let radial = bump::profile_radial(rho) * rho.powi(n as i32 - 1);
            if radial == 0.0 {
                continue;
            }
            for &(t, wt) in &tnodes {
                let jac = t.sin().powi(n as i32 - 2);
                total.add(wr * wt * radial * jac * psi_at(rho, t)?);
            }
        }
    }
    Ok(sphere_area(n - 1) * total.value())
}

/// Orthonormal basis of `e^⊥` (normalizes `e` in place).
fn orthonormal_complement(e: &mut [f64]) -> Vec<Vec<f64>> {
    let n = e.len();
    let len = norm(e);
    e.iter_mut().for_each(|v| *v /= len);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for u in std::iter::once(&e.to_vec()).chain(basis.iter()) {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let l = norm(&v);
        if l > 1e-8 {
            v.iter_mut().for_each(|a| *a /= l);
            basis.push(v);
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

/// A square `k × k` grid on `[−R, R]²` restricted to the disk `|η| < R`, for the
/// logarithmic-potential norm probe.
#[derive(Clone, Debug)]
pub struct LogGrid {
    pub k: usize,
    pub radius: f64,
    /// Cell centers inside the disk.
    pub cells: Vec<[f64; 2]>,
}

impl LogGrid {
    pub fn new(k: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 2.0) || k < 2 {
            return Err(Error::Config(format!("need R ∈ (0, 2) and k ≥ 2, got R={radius}, k={k}")));
        }
        let h = 2.0 * radius / k as f64;
        let mut cells = Vec::new();
        for a in 0..k {
            for b in 0..k {
                let c = [-radius + (a as f64 + 0.5) * h, -radius + (b as f64 + 0.5) * h];
                if c[0].hypot(c[1]) < radius {
                    cells.push(c);
                }
            }
        }
        Ok(LogGrid { k, radius, cells })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / self.k as f64
    }

    /// `∫_{cell j} log(5/|ξ_i − η|) dη`, midpoint rule off the diagonal and the exact
    /// square average on it.
    fn kernel(&self, i: usize, j: usize) -> f64 {
        let h = self.spacing();
        if i == j {
            let a = h / 2.0;
            // ∫_0^a∫_0^a ln(x²+y²) = a²(ln(2a²) − 3 + π/2)
            let quarter = a * a * ((2.0 * a * a).ln() - 3.0 + std::f64::consts::FRAC_PI_2);
            return h * h * 5f64.ln() - 2.0 * quarter;
        }
        let (p, q) = (self.cells[i], self.cells[j]);
        h * h * (5.0 / (p[0] - q[0]).hypot(p[1] - q[1])).ln()
    }

    /// `g = ∫ log(5/|ξ − η|) f(η) dη` at every cell center.
    pub fn potential(&self, f: &[f64]) -> Vec<f64> {
        (0..self.cells.len())
            .map(|i| (0..self.cells.len()).map(|j| self.kernel(i, j) * f[j]).sum())
            .collect()
    }

    pub fn lp_norm(&self, g: &[f64], p: f64) -> f64 {
        let h2 = self.spacing().powi(2);
        (g.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h2).powf(1.0 / p)
    }

    /// `C = max_j ‖log(5/|· − η_j|)‖_{L^p}` over cells: by Minkowski's inequality
    /// `‖g‖_p ≤ C‖f‖_1` for every nonnegative grid function.
    pub fn calibrate(&self, p: f64) -> f64 {
        let h2 = self.spacing().powi(2);
        (0..self.cells.len())
            .map(|j| {
                let col: Vec<f64> = (0..self.cells.len()).map(|i| self.kernel(i, j) / h2).collect();
                self.lp_norm(&col, p)
            })
            .fold(0.0, f64::max)
    }
}

/// `(‖g‖_{L^p(B_R)}, ‖f‖_{L^1(B_R)})` for cell values `f` on `grid`.
pub fn log_norm_probe(grid: &LogGrid, f: &[f64], p: f64) -> Result<(f64, f64)> {
    if p <= 1.0 {
        return Err(Error::Config(format!("need p > 1, got {p}")));
    }
    if f.len() != grid.cells.len() {
        return Err(Error::Dimension {
            expected: grid.cells.len(),
            got: f.len(),
        });
    }
    let g = grid.potential(f);
    let h2 = grid.spacing().powi(2);
    let l1 = f.iter().map(|v| v.abs()).sum::<f64>() * h2;
    Ok((grid.lp_norm(&g, p), l1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_spec_gives_zero_potential() {
        let mut s = calibration_spec(3, 7, 0.5, 0.05, 1.0).unwrap();
        s.bumps.clear();
        let mut x = vec![0.0; 7];
        x[0] = 0.5;
        assert_eq!(n_eval(&s, &x, &QuadratureConfig::default()).unwrap(), 0.0);
        assert!((u_eval(&s, &x, &QuadratureConfig::default()).unwrap() - 32.0).abs() < 1e-12);
    }

    #[test]
    fn stencil_has_expected_support() {
        assert_eq!(iterated_stencil(7, 3).len(), 575);
        assert_eq!(iterated_stencil(2, 1).values().sum::<i64>(), 0);
    }

    #[test]
    fn theorem_labels_round_trip() {
        for t in Theorem::ALL {
            assert_eq!(t.label().parse::<Theorem>().unwrap(), t);
            assert_eq!(t.to_string().parse::<Theorem>().unwrap(), t);
        }
        assert!("1.7".parse::<Theorem>().is_err());
    }

    #[test]
    fn riesz_profile_at_center_matches_radial_reduction() {
        let (m, n) = (3, 7);
        let got = riesz_profile(m, n, 4, &QuadratureConfig::default()).unwrap()[0].1;
        let rule = Rule::new(32);
        let want = sphere_area(n) * rule.integrate(0.0, 1.0, 16, |r| bump::profile_radial(r) * r.powi(2 * m as i32 - 1));
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn minimum_is_attained_on_the_boundary() {
        let prof = standard_profile(7);
        let params = ProblemParams::new(3, 7).unwrap();
        let j = choose_a(&prof, &params).unwrap();
        let grid = riesz_profile(3, 7, 32, &QuadratureConfig::default()).unwrap();
        assert!(j <= grid[0].1);
        assert_eq!(j, grid.last().unwrap().1);
        let p6 = ProblemParams::new(3, 6).unwrap();
        assert_eq!(choose_a(&standard_profile(6), &p6).unwrap(), standard_profile(6).mass);
    }

    #[test]
    fn inside_and_outside_formulas_meet_at_the_boundary() {
        let s = calibration_spec(3, 7, 0.5, 0.05, 1.0).unwrap();
        let ev = Evaluator::new(&s, &QuadratureConfig::default()).unwrap();
        let mut a = vec![0.0; 7];
        a[0] = 0.5 + 0.05 * (1.0 - 1e-9);
        let mut b = a.clone();
        b[0] = 0.5 + 0.05 * (1.0 + 1e-9);
        let (va, vb) = (ev.n_eval(&a).unwrap(), ev.n_eval(&b).unwrap());
        assert!((va - vb).abs() < 1e-6 * va.abs(), "{va} vs {vb}");
    }

    #[test]
    fn far_field_matches_point_mass() {
        let s = calibration_spec(3, 7, 0.5, 0.01, 1.0).unwrap();
        let ev = Evaluator::new(&s, &QuadratureConfig::default()).unwrap();
        let mut x = vec![0.0; 7];
        x[0] = 0.5;
        x[1] = 0.2;
        let got = ev.n_eval(&x).unwrap();
        let b = &s.bumps[0];
        let approx = -ev.kernels.psi(&x, &b.center).unwrap() * b.mass() * b.radius().powi(7) * ev.profile.mass;
        assert!((got - approx).abs() < 1e-2 * approx.abs(), "{got} vs {approx}");
    }

    #[test]
    fn pizzetti_reduction_matches_brute_force_quadrature() {
        let s = calibration_spec(3, 7, 0.5, 0.05, 1.0).unwrap();
        let ev = Evaluator::new(&s, &QuadratureConfig::default()).unwrap();
        let b = &s.bumps[0];
        let scale = -b.mass() * b.radius().powi(7);
        for (xi0, xi1) in [(0.0, 0.0), (0.3, 0.1), (-0.7, 0.5), (1.4, 0.0), (0.2, 3.0)] {
            let mut x = b.center.clone();
            x[0] += 0.05 * xi0;
            x[1] += 0.05 * xi1;
            let got = ev.n_eval(&x).unwrap();
            let want = scale * bump_integral_oracle(&ev.kernels, b, &x, 20, 4).unwrap();
            assert!((got - want).abs() < 1e-6 * want.abs(), "ξ=({xi0},{xi1}): {got} vs {want}");
        }
    }

    #[test]
    fn pizzetti_reduction_matches_brute_force_in_the_log_case() {
        let s = calibration_spec(3, 6, 0.25, 0.02, 0.5).unwrap();
        let ev = Evaluator::new(&s, &QuadratureConfig::default()).unwrap();
        let b = &s.bumps[0];
        let scale = -b.mass() * b.radius().powi(6);
        for (xi0, xi1) in [(0.0, 0.0), (0.5, -0.2), (2.0, 1.0)] {
            let mut x = b.center.clone();
            x[0] += 0.02 * xi0;
            x[1] += 0.02 * xi1;
            let got = ev.n_eval(&x).unwrap();
            let want = scale * bump_integral_oracle(&ev.kernels, b, &x, 20, 4).unwrap();
            assert!((got - want).abs() < 1e-6 * want.abs(), "ξ=({xi0},{xi1}): {got} vs {want}");
        }
    }

    #[test]
    fn potential_is_linear_in_mass() {
        let s = calibration_spec(3, 7, 0.5, 0.05, 1.0).unwrap();
        let mut s2 = s.clone();
        s2.bumps[0] = BumpSpec::new(s.bumps[0].center.clone(), 0.05, 2.0, 3);
        let cfg = QuadratureConfig::default();
        for x0 in [0.3, 0.52, 0.9] {
            let mut x = vec![0.0; 7];
            x[0] = x0;
            x[2] = 0.01;
            let (a, b) = (n_eval(&s, &x, &cfg).unwrap(), n_eval(&s2, &x, &cfg).unwrap());
            assert!((b - 2.0 * a).abs() < 1e-12 * a.abs());
        }
    }

    #[test]
    fn log_probe_examples() {
        let grid = LogGrid::new(21, 1.0).unwrap();
        let zero = vec![0.0; grid.cells.len()];
        assert_eq!(log_norm_probe(&grid, &zero, 2.0).unwrap(), (0.0, 0.0));
        let c = grid.calibrate(2.0);
        let mut point = zero.clone();
        point[grid.cells.len() / 2] = 1.0;
        let (lhs, rhs) = log_norm_probe(&grid, &point, 2.0).unwrap();
        assert!(lhs <= c * rhs * (1.0 + 1e-12));
    }
}
