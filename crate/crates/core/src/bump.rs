//! The mollifier profile `φ(η) = exp(1 − 1/(1 − |η|²))` and bump right-hand sides
//! `f = Σ_j M_j φ((y − x_j)/r_j)`.
//!
//! Radii and mass coefficients are stored by their natural logarithms: the
//! exponential-nonlinearity constructions use radii like `|x_j|·e^{−10^{20}}`, which
//! no `f64` can hold, while `log r_j` is perfectly ordinary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::sphere_area;
use crate::quad::Rule;
use crate::symcalc::{norm, RadialExpr};

/// Number of profile moments `μ_k` tabulated.
pub const MOMENTS: usize = 12;

/// `log φ` as a function of `|η|²` (`−∞` outside the unit ball).
pub fn log_profile_sq(eta_sq: f64) -> f64 {
    if eta_sq >= 1.0 {
        f64::NEG_INFINITY
    } else {
        1.0 - 1.0 / (1.0 - eta_sq)
    }
}

pub fn profile_radial(rho: f64) -> f64 {
    log_profile_sq(rho * rho).exp()
}

/// Pizzetti coefficient `1/(2^k k! Π_{i<k}(n + 2i))`: the spherical mean of a
/// polyharmonic `F` over `S(z, s)` is `Σ_k c_k s^{2k} Δ^kF(z)`.
pub fn pizzetti_coeff(n: usize, k: usize) -> f64 {
    let mut d = 1.0;
    for i in 0..k {
        d *= 2.0 * (i as f64 + 1.0) * (n as f64 + 2.0 * i as f64);
    }
    1.0 / d
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BumpProfile {
    pub n: usize,
    /// `I = ∫ φ`
    pub mass: f64,
    /// Difference between two quadrature meshes.
    pub mass_err: f64,
    /// `μ_k = ∫_0^1 φ(ρ) ρ^{n−1+2k} dρ`
    pub moments: Vec<f64>,
}

pub fn standard_profile(n: usize) -> BumpProfile {
    assert!(n >= 2, "profile needs n ≥ 2");
    let rule = Rule::new(32);
    let moment = |k: usize, panels: usize| {
        rule.integrate(0.0, 1.0, panels, |rho| profile_radial(rho) * rho.powi((n - 1 + 2 * k) as i32))
    };
    let moments: Vec<f64> = (0..MOMENTS).map(|k| moment(k, 24)).collect();
    let coarse = moment(0, 12);
    let area = sphere_area(n);
    BumpProfile {
        n,
        mass: area * moments[0],
        mass_err: area * (moments[0] - coarse).abs(),
        moments,
    }
}

impl BumpProfile {
    pub fn evaluate(&self, eta: &[f64]) -> f64 {
        log_profile_sq(eta.iter().map(|v| v * v).sum()).exp()
    }

    /// `w_k = |S^{n−1}| c_k μ_k`, so that `∫ φ(η) P(x_j + rη) dη = Σ_k w_k r^{2k} Δ^kP(x_j)`
    /// for polyharmonic `P`.
    pub fn pizzetti_weight(&self, k: usize) -> f64 {
        sphere_area(self.n) * pizzetti_coeff(self.n, k) * self.moments[k]
    }
}

/// One bump `M φ((y − x)/r)` with `M = ε / (|x|^{2m−2} r^n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "BumpRecord", into = "BumpRecord")]
pub struct BumpSpec {
    pub center: Vec<f64>,
    pub epsilon: f64,
    pub log_radius: f64,
    pub log_mass: f64,
}

#[derive(Serialize, Deserialize)]
struct BumpRecord {
    center: Vec<f64>,
    radius: Option<f64>,
    epsilon: f64,
    mass: Option<f64>,
    log_radius: Option<f64>,
    log_mass: Option<f64>,
}

fn representable(v: f64) -> Option<f64> {
    (v.is_finite() && v > 0.0).then_some(v)
}

impl From<BumpSpec> for BumpRecord {
    fn from(b: BumpSpec) -> Self {
        BumpRecord {
            radius: representable(b.log_radius.exp()),
            mass: representable(b.log_mass.exp()),
            center: b.center,
            epsilon: b.epsilon,
            log_radius: Some(b.log_radius),
            log_mass: Some(b.log_mass),
        }
    }
}

impl From<BumpRecord> for BumpSpec {
    fn from(r: BumpRecord) -> Self {
        BumpSpec {
            log_radius: r.log_radius.or(r.radius.map(f64::ln)).unwrap_or(f64::NAN),
            log_mass: r.log_mass.or(r.mass.map(f64::ln)).unwrap_or(f64::NAN),
            center: r.center,
            epsilon: r.epsilon,
        }
    }
}

impl BumpSpec {
    pub fn new(center: Vec<f64>, radius: f64, epsilon: f64, m: u32) -> Self {
        Self::from_log_radius(center, radius.ln(), epsilon, m)
    }

    pub fn from_log_radius(center: Vec<f64>, log_radius: f64, epsilon: f64, m: u32) -> Self {
        let n = center.len();
        let log_x = norm(&center).ln();
        let log_mass = epsilon.ln() - (2.0 * m as f64 - 2.0) * log_x - n as f64 * log_radius;
        BumpSpec {
            center,
            epsilon,
            log_radius,
            log_mass,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `r_j` (zero when it underflows).
    pub fn radius(&self) -> f64 {
        self.log_radius.exp()
    }

    /// `M_j` (infinite when it overflows).
    pub fn mass(&self) -> f64 {
        self.log_mass.exp()
    }

    pub fn center_norm(&self) -> f64 {
        norm(&self.center)
    }

    /// `log ∫ M φ_j / I = log(ε |x|^{2−2m})`, computed from the stored mass coefficient.
    pub fn log_total(&self) -> f64 {
        self.log_mass + self.dim() as f64 * self.log_radius
    }

    /// `log(ε |x|^{2−2m})`, the amount the potential is built from.
    pub fn log_source(&self, m: u32) -> f64 {
        self.epsilon.ln() - (2.0 * m as f64 - 2.0) * self.center_norm().ln()
    }

    /// `log M − log(ε / (|x|^{2m−2} r^n))`; zero for a consistent bump.
    pub fn mass_identity_residual(&self, m: u32) -> f64 {
        self.log_total() - self.log_source(m)
    }

    /// Local coordinate `ξ = (y − x_j)/r_j` if `y` lies in the open support.
    pub fn local(&self, y: &[f64]) -> Option<Vec<f64>> {
        let d: Vec<f64> = y.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let dn = norm(&d);
        if dn == 0.0 {
            return Some(vec![0.0; y.len()]);
        }
        if dn.ln() >= self.log_radius {
            return None;
        }
        let r = self.radius();
        Some(d.iter().map(|v| v / r).collect())
    }

    /// `log f` at local coordinate `ξ`.
    pub fn log_f_local(&self, xi: &[f64]) -> f64 {
        self.log_mass + log_profile_sq(xi.iter().map(|v| v * v).sum())
    }

    /// Scale the radius, keeping `ε` and recomputing `M` consistently.
    pub fn with_radius(&self, log_radius: f64, m: u32) -> Self {
        Self::from_log_radius(self.center.clone(), log_radius, self.epsilon, m)
    }
}

/// `f(y)`; zero off the supports.
pub fn f_eval(bumps: &[BumpSpec], y: &[f64]) -> Result<f64> {
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::AtOrigin);
    }
    Ok(bumps
        .iter()
        .find_map(|b| b.local(y).map(|xi| b.log_f_local(&xi).exp()))
        .unwrap_or(0.0))
}

/// Pairs `(j, k)` whose closed supports intersect.
pub fn overlapping_pairs(bumps: &[BumpSpec]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..bumps.len() {
        for k in j + 1..bumps.len() {
            let d: Vec<f64> = bumps[j].center.iter().zip(&bumps[k].center).map(|(a, b)| a - b).collect();
            if norm(&d) <= bumps[j].radius() + bumps[k].radius() {
                out.push((j, k));
            }
        }
    }
    out
}

/// `Σ_j M_j ∫ |y|^{2m−2} φ_j(y) dy`, asserting the bound `2^{2m−2} I Σ ε_j`.
///
/// `|y|^{2m−2}` is a polynomial, so each bump integral is exact through the profile's
/// Pizzetti weights: `M r^n Σ_k w_k r^{2k} Δ^k|y|^{2m−2}(x_j)`.
pub fn moment_check(bumps: &[BumpSpec], profile: &BumpProfile, m: u32) -> Result<f64> {
    let n = profile.n;
    let poly = RadialExpr::rpow(n, num_rational::BigRational::from_integer(1.into()), 2 * m as i32 - 2);
    let mut lap = vec![poly.clone()];
    for _ in 1..m {
        let next = lap.last().expect("nonempty").laplacian();
        lap.push(next);
    }
    let mut total = 0.0;
    let mut eps_sum = 0.0;
    for b in bumps {
        let r = b.radius();
        let mut mean = 0.0;
        for (k, e) in lap.iter().enumerate() {
            mean += profile.pizzetti_weight(k) * r.powi(2 * k as i32) * e.eval(&b.center)?;
        }
        total += b.log_total().exp() * mean;
        eps_sum += b.epsilon;
    }
    let bound = 4f64.powi(m as i32 - 1) * profile.mass * eps_sum;
    if total > bound * (1.0 + 1e-12) {
        return Err(Error::Spec(format!(
            "moment {total:.6e} exceeds 2^(2m-2)·I·Σε = {bound:.6e}: mis-scaled bump"
        )));
    }
    Ok(total)
}
