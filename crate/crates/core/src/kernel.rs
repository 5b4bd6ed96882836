//! Fundamental solutions of `Δ^m`, the benchmark profiles `Γ` and `Γ_∞`, derivatives
//! `D^αΦ`, and the Taylor-remainder kernel
//!
//! `Ψ(x, y) = Φ(x − y) − Σ_{|α| ≤ 2m−3} (−y)^α/α! · D^αΦ(x)`.
//!
//! `Ψ` is evaluated in double-double: the `α = 0` term is folded into a
//! cancellation-free difference `Φ(x − y) − Φ(x)` and the rest is a dot product
//! against memoized exact derivatives.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::dd::{self, Dd};
use crate::error::{Error, Result};
use crate::sampling;
use crate::symcalc::{rat, CompiledExpr, MultiIndex, PointCtx, RadialExpr};

/// The five `(m, n)` regimes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    /// m even, or 2m > n
    #[serde(rename = "i")]
    I,
    /// m = 1, n ≥ 3
    #[serde(rename = "ii")]
    II,
    /// m = 1, n = 2
    #[serde(rename = "iii")]
    III,
    /// m ≥ 3 odd, 2m < n
    #[serde(rename = "iv")]
    IV,
    /// m ≥ 3 odd, 2m = n
    #[serde(rename = "v")]
    V,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseTag::I => "i",
            CaseTag::II => "ii",
            CaseTag::III => "iii",
            CaseTag::IV => "iv",
            CaseTag::V => "v",
        };
        write!(f, "({s})")
    }
}

pub fn classify_case(m: u32, n: usize) -> CaseTag {
    assert!(m >= 1 && n >= 2, "need m ≥ 1 and n ≥ 2");
    let two_m = 2 * m as usize;
    if m % 2 == 0 || two_m > n {
        CaseTag::I
    } else if m == 1 && n >= 3 {
        CaseTag::II
    } else if m == 1 {
        CaseTag::III
    } else if two_m < n {
        CaseTag::IV
    } else {
        CaseTag::V
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub m: u32,
    pub n: usize,
    pub case: CaseTag,
    /// Multiplier of the fundamental solution.
    pub a: f64,
}

impl ProblemParams {
    pub fn new(m: u32, n: usize) -> Result<Self> {
        if m < 1 || n < 2 {
            return Err(Error::Inadmissible(format!("need m ≥ 1 and n ≥ 2, got m={m}, n={n}")));
        }
        Ok(ProblemParams {
            m,
            n,
            case: classify_case(m, n),
            a: 1.0,
        })
    }

    pub fn with_a(mut self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::NonPositive(a));
        }
        self.a = a;
        Ok(self)
    }

    /// The `A` for which `Δ^m Φ = δ` (requires `n ≥ 3`).
    pub fn normalized(m: u32, n: usize) -> Result<Self> {
        let a = fundamental_normalization(m, n)?;
        Self::new(m, n)?.with_a(a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiBranch {
    /// `(−1)^m |x|^{2m−n}`, `2m < n`
    Power,
    /// `(−1)^{(n−1)/2} |x|^{2m−n}`, odd `n < 2m`
    OddPower,
    /// `(−1)^{n/2} |x|^{2m−n} log(5/|x|)`, even `n ≤ 2m`
    EvenLog,
}

impl fmt::Display for PhiBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhiBranch::Power => "(-1)^m r^(2m-n)",
            PhiBranch::OddPower => "(-1)^((n-1)/2) r^(2m-n)",
            PhiBranch::EvenLog => "(-1)^(n/2) r^(2m-n) log(5/r)",
        };
        f.write_str(s)
    }
}

pub fn phi_branch(m: u32, n: usize) -> PhiBranch {
    let two_m = 2 * m as usize;
    if two_m < n {
        PhiBranch::Power
    } else if n % 2 == 1 {
        PhiBranch::OddPower
    } else {
        PhiBranch::EvenLog
    }
}

/// Unnormalized fundamental solution with coefficient `c`.
pub fn phi_expr(m: u32, n: usize, c: BigRational) -> RadialExpr {
    let s = 2 * m as i32 - n as i32;
    let sign = |e: usize| if e % 2 == 0 { BigRational::one() } else { -BigRational::one() };
    match phi_branch(m, n) {
        PhiBranch::Power => RadialExpr::rpow(n, sign(m as usize) * c, s),
        PhiBranch::OddPower => RadialExpr::rpow(n, sign((n - 1) / 2) * c, s),
        PhiBranch::EvenLog => RadialExpr::rpow_log(n, sign(n / 2) * c, s),
    }
}

/// `|S^{n−1}| = 2π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ(n/2) for integer or half-integer argument
    let gamma_half = if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product::<f64>()
    } else {
        let mut g = PI.sqrt();
        let mut k = 0.5;
        while k < n as f64 / 2.0 - 0.25 {
            g *= k;
            k += 1.0;
        }
        g
    };
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half
}

/// `A` such that `Δ^m(A·φ_unnormalized) = δ` in `R^n`, `n ≥ 3`.
///
/// `Δ^{m−1}` of the unnormalized kernel is `c·|x|^{2−n}` (checked exactly), and
/// `Δ|x|^{2−n} = −(n−2)|S^{n−1}| δ`.
pub fn fundamental_normalization(m: u32, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Inadmissible("normalization implemented for n ≥ 3".into()));
    }
    let phi = phi_expr(m, n, BigRational::one());
    let reduced = if m == 1 { phi } else { phi.iterated_laplacian(m - 1) };
    let (c, s) = reduced
        .as_radial_power()
        .ok_or_else(|| Error::Inadmissible(format!("Δ^(m-1)Φ is not a pure power for m={m}, n={n}")))?;
    if s != 2 - n as i32 {
        return Err(Error::Inadmissible(format!("unexpected exponent {s}")));
    }
    let c = c.to_f64().unwrap_or(f64::NAN);
    let a = 1.0 / (-c * (n as f64 - 2.0) * sphere_area(n));
    if a > 0.0 {
        Ok(a)
    } else {
        Err(Error::Inadmissible(format!("normalization has wrong sign for m={m}, n={n}")))
    }
}

/// `Γ(r)`: `r^{−(n−2)}` for `n ≥ 3`, `log(5/r)` for `n = 2`.
pub fn gamma_fn(r: f64, n: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositive(r));
    }
    Ok(if n >= 3 { r.powi(2 - n as i32) } else { (5.0 / r).ln() })
}

/// `Γ_∞(r)`: `r^{2m−2}` for `n ≥ 3`, `r^{2m−2} log(5r)` for `n = 2`.
pub fn gamma_inf(r: f64, m: u32, n: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositive(r));
    }
    let p = r.powi(2 * m as i32 - 2);
    Ok(if n >= 3 { p } else { p * (5.0 * r).ln() })
}

/// `Γ` as an exact expression.
pub fn gamma_expr(n: usize) -> RadialExpr {
    if n >= 3 {
        RadialExpr::rpow(n, BigRational::one(), 2 - n as i32)
    } else {
        RadialExpr::rpow_log(n, BigRational::one(), 0)
    }
}

/// `Γ_∞ = P + log(5)·Q` with exact `P`, `Q` (the `n = 2` branch needs the irrational
/// constant `log 25 = 2 log 5`: `r^{2m−2} log(5r) = 2 log 5 · r^{2m−2} − r^{2m−2} log(5/r)`).
pub fn gamma_inf_parts(m: u32, n: usize) -> (RadialExpr, RadialExpr) {
    let p = 2 * m as i32 - 2;
    if n >= 3 {
        (RadialExpr::rpow(n, BigRational::one(), p), RadialExpr::zero(n))
    } else {
        (
            RadialExpr::rpow_log(n, -BigRational::one(), p),
            RadialExpr::rpow(n, rat(2, 1), p),
        )
    }
}

/// Φ plus a thread-safe memo of its derivatives.
#[derive(Debug)]
pub struct KernelSet {
    pub params: ProblemParams,
    pub phi: RadialExpr,
    pub branch: PhiBranch,
    cache: Mutex<HashMap<MultiIndex, Arc<RadialExpr>>>,
    rem: OnceLock<TaylorRemainder>,
}

pub fn make_phi(params: &ProblemParams) -> KernelSet {
    let a = BigRational::from_float(params.a).expect("finite A");
    let phi = phi_expr(params.m, params.n, a);
    KernelSet {
        params: params.clone(),
        branch: phi_branch(params.m, params.n),
        phi,
        cache: Mutex::new(HashMap::new()),
        rem: OnceLock::new(),
    }
}

impl KernelSet {
    pub fn phi_deriv(&self, alpha: &MultiIndex) -> Arc<RadialExpr> {
        assert_eq!(alpha.dim(), self.params.n, "multi-index dimension");
        if let Some(e) = self.cache.lock().expect("cache poisoned").get(alpha) {
            return e.clone();
        }
        let value = match alpha.exponents().iter().position(|&a| a > 0) {
            None => Arc::new(self.phi.clone()),
            Some(axis) => {
                let mut parent = alpha.exponents().to_vec();
                parent[axis] -= 1;
                Arc::new(self.phi_deriv(&MultiIndex::new(parent)).derive(axis))
            }
        };
        self.cache
            .lock()
            .expect("cache poisoned")
            .entry(alpha.clone())
            .or_insert(value)
            .clone()
    }

    /// Taylor cutoff `2m − 3` (negative means an empty sum).
    pub fn taylor_order(&self) -> i32 {
        2 * self.params.m as i32 - 3
    }

    pub fn remainder(&self) -> &TaylorRemainder {
        self.rem.get_or_init(|| {
            TaylorRemainder::with_derivs(&self.phi, self.taylor_order(), |a| (*self.phi_deriv(a)).clone())
        })
    }

    /// `Ψ(x, y)`
    pub fn psi(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(dd::to_f64(self.psi_dd(x, y)?))
    }

    pub fn psi_dd(&self, x: &[f64], y: &[f64]) -> Result<Dd> {
        self.remainder().remainder(x, y)
    }

    /// Empirical `max |Ψ(x,y)| / (|y|^{2m−2}|x|^{2−n})` over `|y| < |x|/2`, `|x| ∈ [1e−3, 1]`.
    pub fn psi_bound_probe(&self, samples: usize, seed: u64) -> Result<PsiBoundReport> {
        let n = self.params.n;
        let m = self.params.m as i32;
        let rem = self.remainder();
        let mut max_ratio: f64 = 0.0;
        let mut max_halved: f64 = 0.0;
        for i in 0..samples.max(1) {
            let rx = 10f64.powf(-3.0 * sampling::halton(seed, i, 0));
            let ry = 0.5 * rx * sampling::halton(seed, i, 1) * (1.0 - 1e-9);
            let dx = sampling::sphere_point(n, seed, i, 2);
            let dy = sampling::sphere_point(n, seed, i, 2 + n + (n % 2));
            for (scale, slot) in [(1.0, &mut max_ratio), (0.5, &mut max_halved)] {
                let x: Vec<f64> = dx.iter().map(|a| a * rx * scale).collect();
                let y: Vec<f64> = dy.iter().map(|a| a * ry * scale).collect();
                if ry == 0.0 {
                    continue;
                }
                let v = dd::to_f64(rem.remainder(&x, &y)?).abs();
                let denom = (ry * scale).powi(2 * m - 2) * (rx * scale).powi(2 - n as i32);
                *slot = slot.max(v / denom);
            }
        }
        Ok(PsiBoundReport {
            samples: samples.max(1),
            max_ratio,
            max_ratio_halved: max_halved,
            scale_drift: (max_halved / max_ratio - 1.0).abs(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiBoundReport {
    pub samples: usize,
    pub max_ratio: f64,
    /// Same samples with `x` and `y` both halved.
    pub max_ratio_halved: f64,
    pub scale_drift: f64,
}

/// Below this `|y|/|x|` the remainder is summed as a series instead of by subtraction.
const FAR_RATIO: f64 = 0.125;

/// Remainder of the degree-`order` Taylor polynomial of a radial function `F` at `x`,
/// evaluated with increment `−y`: `F(x − y) − Σ_{|α| ≤ order} (−y)^α/α! D^αF(x)`.
#[derive(Clone, Debug)]
pub struct TaylorRemainder {
    dim: usize,
    order: i32,
    profile: Vec<(Dd, i32, bool)>,
    alphas: Vec<MultiIndex>,
    derivs: Vec<CompiledExpr>,
}

impl TaylorRemainder {
    pub fn new(f: &RadialExpr, order: i32) -> Self {
        let mut memo: HashMap<MultiIndex, RadialExpr> = HashMap::new();
        memo.insert(MultiIndex::zero(f.dim()), f.clone());
        Self::with_derivs(f, order, |alpha| derive_memo(&mut memo, alpha))
    }

    fn with_derivs<G: FnMut(&MultiIndex) -> RadialExpr>(f: &RadialExpr, order: i32, mut deriv: G) -> Self {
        let profile = f
            .radial_profile()
            .expect("Taylor remainders are defined for radial functions only")
            .into_iter()
            .map(|(c, s, k)| (dd::from_rational(&c), s, k == 1))
            .collect();
        let alphas: Vec<MultiIndex> = if order >= 1 {
            MultiIndex::enumerate(f.dim(), order as u32).into_iter().skip(1).collect()
        } else {
            Vec::new()
        };
        let derivs = alphas.iter().map(|a| deriv(a).compile()).collect();
        TaylorRemainder {
            dim: f.dim(),
            order,
            profile,
            alphas,
            derivs,
        }
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    /// Multi-indices with `1 ≤ |α| ≤ order`, in table order.
    pub fn alphas(&self) -> &[MultiIndex] {
        &self.alphas
    }

    /// `D^αF(x)` for the table's multi-indices.
    pub fn table(&self, ctx: &PointCtx) -> Vec<Dd> {
        self.derivs.iter().map(|d| d.eval(ctx)).collect()
    }

    /// `(−y)^α/α!` for the table's multi-indices.
    pub fn weights(&self, y: &[f64]) -> Vec<Dd> {
        self.alphas.iter().map(|a| a.taylor_weight(y)).collect()
    }

    /// `F` at a point with the given context.
    pub fn value(&self, ctx: &PointCtx) -> Dd {
        let mut acc = Dd::from(0.0);
        for &(c, s, log) in &self.profile {
            let mut v = c * dd::powi(ctx.r(), s);
            if log {
                v *= ctx.log5r();
            }
            acc += v;
        }
        acc
    }

    /// `F` at radius `r` (double precision).
    pub fn value_at_radius(&self, r: f64) -> f64 {
        self.profile
            .iter()
            .map(|&(c, s, log)| {
                let v = dd::to_f64(c) * r.powi(s);
                if log {
                    v * (5.0 / r).ln()
                } else {
                    v
                }
            })
            .sum()
    }

    /// `F(x − y) − F(x)` without cancellation.
    pub fn value_diff(&self, x: &[f64], ctx: &PointCtx, y: &[f64]) -> Result<Dd> {
        let x2 = dd::dot(x, x);
        let q = dd::div(dd::dot(y, y) - dd::dot(x, y) * 2.0, x2);
        if q.hi().abs() > 0.5 {
            let mut w = Dd::from(0.0);
            for (&a, &b) in x.iter().zip(y) {
                let d = Dd::new_sub(a, b);
                w += d * d;
            }
            if w.hi() == 0.0 {
                return Err(Error::Coincident);
            }
            let rxy = w.sqrt();
            let log_xy = dd::ln(dd::div(Dd::from(5.0), rxy));
            let mut acc = Dd::from(0.0);
            for &(c, s, log) in &self.profile {
                let mut v = c * dd::powi(rxy, s);
                if log {
                    v *= log_xy;
                }
                acc += v;
            }
            return Ok(acc - self.value(ctx));
        }
        let l1p = dd::ln1p(q);
        let mut acc = Dd::from(0.0);
        for &(c, s, log) in &self.profile {
            let scale = c * dd::powi(ctx.r(), s);
            let p = dd::rel_pow_m1(q, s);
            let v = if log {
                p * ctx.log5r() - (Dd::from(1.0) + p) * l1p * 0.5
            } else {
                p
            };
            acc += scale * v;
        }
        Ok(acc)
    }

    /// Remainder from a precomputed derivative table and weight vector.
    pub fn remainder_with(&self, x: &[f64], ctx: &PointCtx, table: &[Dd], y: &[f64], weights: &[Dd]) -> Result<Dd> {
        if self.order >= 0 && dd::to_f64(dd::dot(y, y)) < FAR_RATIO * FAR_RATIO * dd::to_f64(dd::dot(x, x)) {
            return Ok(self.remainder_far(x, ctx, y));
        }
        let mut acc = self.value_diff(x, ctx, y)?;
        for (t, w) in table.iter().zip(weights) {
            acc -= *t * *w;
        }
        Ok(acc)
    }

    /// Taylor polynomial (including `α = 0`) from a table.
    pub fn polynomial_with(&self, ctx: &PointCtx, table: &[Dd], weights: &[Dd]) -> Dd {
        let mut acc = if self.order >= 0 { self.value(ctx) } else { Dd::from(0.0) };
        for (t, w) in table.iter().zip(weights) {
            acc += *t * *w;
        }
        acc
    }

    /// Tail of the Gegenbauer expansion for `|y| < |x|/8`, where subtracting the
    /// Taylor polynomial would cancel `~(order+1)·log10(|x|/|y|)` digits:
    /// `|x−y|^s = |x|^s Σ_k C_k^{(−s/2)}(t) ρ^k`, `ρ = |y|/|x|`, `t = x·y/(|x||y|)`,
    /// and the `log(5/r)` factor is the `∂_s` of the same series.
    fn remainder_far(&self, x: &[f64], ctx: &PointCtx, y: &[f64]) -> Dd {
        let rx = dd::to_f64(ctx.r());
        let ry = dd::to_f64(dd::norm(y));
        if ry == 0.0 {
            return Dd::from(0.0);
        }
        let rho = ry / rx;
        let t = (dd::to_f64(dd::dot(x, y)) / (rx * ry)).clamp(-1.0, 1.0);
        let first = (self.order + 1) as usize;
        // enough terms for ρ^k below 1e-34
        let last = first + (34.0 / -rho.log10()).ceil() as usize + 8;
        let log5x = dd::to_f64(ctx.log5r());
        let mut acc = 0.0;
        for &(c, s, log) in &self.profile {
            let nu = -(s as f64) / 2.0;
            // (C_k, ∂_ν C_k) by the three-term recurrence
            let (mut c0, mut d0) = (1.0, 0.0);
            let (mut c1, mut d1) = (2.0 * nu * t, 2.0 * t);
            let mut sum = 0.0;
            let mut pk = rho;
            for k in 1..=last {
                if k >= 2 {
                    let kf = k as f64;
                    let a = 2.0 * t * (kf + nu - 1.0);
                    let b = kf + 2.0 * nu - 2.0;
                    let c2 = (a * c1 - b * c0) / kf;
                    let d2 = (2.0 * t * c1 + a * d1 - 2.0 * c0 - b * d0) / kf;
                    (c0, d0, c1, d1) = (c1, d1, c2, d2);
                    pk *= rho;
                }
                if k >= first {
                    // ∂_s = −½ ∂_ν; log(5/|x−y|) = log(5/|x|) − ½ log(1+q)
                    let term = if log { log5x * c1 + 0.5 * d1 } else { c1 };
                    sum += term * pk;
                }
            }
            acc += dd::to_f64(c) * rx.powi(s) * sum;
        }
        Dd::from(acc)
    }

    pub fn remainder(&self, x: &[f64], y: &[f64]) -> Result<Dd> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len().min(y.len()),
            });
        }
        let ctx = PointCtx::new(x)?;
        if x == y {
            return Err(Error::Coincident);
        }
        if self.order < 0 {
            // no Taylor terms at all: F(x − y)
            let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let c2 = PointCtx::new(&diff)?;
            return Ok(self.value(&c2));
        }
        let table = self.table(&ctx);
        let weights = self.weights(y);
        self.remainder_with(x, &ctx, &table, y, &weights)
    }
}

fn derive_memo(memo: &mut HashMap<MultiIndex, RadialExpr>, alpha: &MultiIndex) -> RadialExpr {
    if let Some(e) = memo.get(alpha) {
        return e.clone();
    }
    let axis = alpha.exponents().iter().position(|&a| a > 0).expect("nonzero index");
    let mut parent = alpha.exponents().to_vec();
    parent[axis] -= 1;
    let e = derive_memo(memo, &MultiIndex::new(parent)).derive(axis);
    memo.insert(alpha.clone(), e.clone());
    e
}

/// One row of the kernel table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelRow {
    pub m: u32,
    pub n: usize,
    pub case: CaseTag,
    pub branch: PhiBranch,
    pub polyharmonic_exact: bool,
    pub gamma_inf_exact: bool,
}

pub fn kernel_table(mmax: u32, nmax: usize) -> Vec<KernelRow> {
    let mut rows = Vec::new();
    for m in 1..=mmax {
        for n in 2..=nmax {
            let p = ProblemParams::new(m, n).expect("valid grid");
            let ks = make_phi(&p);
            let (gp, gq) = gamma_inf_parts(m, n);
            rows.push(KernelRow {
                m,
                n,
                case: p.case,
                branch: ks.branch,
                polyharmonic_exact: ks.phi.iterated_laplacian(m).is_zero(),
                gamma_inf_exact: gp.iterated_laplacian(m).is_zero() && gq.iterated_laplacian(m).is_zero(),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_series_matches_subtraction() {
        for (m, n) in [(3u32, 7usize), (3, 6), (1, 3)] {
            let ks = make_phi(&ProblemParams::new(m, n).unwrap());
            let rem = ks.remainder();
            let x: Vec<f64> = (0..n).map(|i| 0.3 + 0.1 * i as f64).collect();
            for scale in [0.05, 0.1, 0.12] {
                let xn = dd::to_f64(dd::norm(&x));
                let y: Vec<f64> = (0..n).map(|i| scale * xn * if i % 2 == 0 { 0.6 } else { -0.4 } / (n as f64).sqrt()).collect();
                let ctx = PointCtx::new(&x).unwrap();
                let far = dd::to_f64(rem.remainder_far(&x, &ctx, &y));
                let mut sub = rem.value_diff(&x, &ctx, &y).unwrap();
                for (t, w) in rem.table(&ctx).iter().zip(rem.weights(&y)) {
                    sub -= *t * w;
                }
                let sub = dd::to_f64(sub);
                assert!((far - sub).abs() <= 1e-12 * sub.abs(), "m={m} n={n} scale={scale}: {far} vs {sub}");
            }
        }
    }

    #[test]
    fn case_examples() {
        assert_eq!(classify_case(3, 7), CaseTag::IV);
        assert_eq!(classify_case(3, 6), CaseTag::V);
        assert_eq!(classify_case(2, 5), CaseTag::I);
        assert_eq!(classify_case(1, 2), CaseTag::III);
        assert_eq!(classify_case(1, 9), CaseTag::II);
        assert_eq!(classify_case(5, 9), CaseTag::I);
    }

    #[test]
    fn phi_examples() {
        let k = make_phi(&ProblemParams::new(3, 7).unwrap());
        assert_eq!(k.phi, RadialExpr::rpow(7, -BigRational::one(), -1));
        assert!((k.phi.eval(&[0.5, 0., 0., 0., 0., 0., 0.]).unwrap() + 2.0).abs() < 1e-15);
        let k = make_phi(&ProblemParams::new(3, 6).unwrap());
        assert_eq!(k.phi, RadialExpr::rpow_log(6, -BigRational::one(), 0));
        let k = make_phi(&ProblemParams::new(1, 3).unwrap());
        assert_eq!(k.phi, RadialExpr::rpow(3, -BigRational::one(), -1));
    }

    #[test]
    fn gamma_examples() {
        assert!((gamma_fn(0.5, 4).unwrap() - 4.0).abs() < 1e-15);
        assert!(gamma_fn(5.0, 2).unwrap().abs() < 1e-15);
        assert!((gamma_fn(0.1, 7).unwrap() - 1e5).abs() < 1e-9);
        assert!(gamma_fn(0.0, 3).is_err());
        assert!((gamma_inf(2.0, 3, 7).unwrap() - 16.0).abs() < 1e-15);
        assert!(gamma_inf(0.2, 1, 2).unwrap().abs() < 1e-15);
        assert!((gamma_inf(1.0, 2, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!(gamma_inf(-1.0, 2, 3).is_err());
    }

    #[test]
    fn gamma_inf_parts_evaluate_to_gamma_inf() {
        let (p, q) = gamma_inf_parts(2, 2);
        let x = [0.3, 0.1];
        let r = (0.1f64).sqrt();
        let v = p.eval(&x).unwrap() + 5f64.ln() * q.eval(&x).unwrap();
        assert!((v - gamma_inf(r, 2, 2).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(7) - 16.0 * PI.powi(3) / 15.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_for_reference_dimensions() {
        let a = fundamental_normalization(3, 7).unwrap();
        assert!((a - 1.0 / (120.0 * sphere_area(7))).abs() < 1e-18);
        let a = fundamental_normalization(3, 6).unwrap();
        assert!((a - 1.0 / (64.0 * sphere_area(6))).abs() < 1e-18);
        let a = fundamental_normalization(1, 3).unwrap();
        assert!((a - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-16);
    }

    #[test]
    fn phi_deriv_first_axis() {
        let k = make_phi(&ProblemParams::new(3, 7).unwrap());
        let d = k.phi_deriv(&MultiIndex::unit(7, 0));
        let want = RadialExpr::term(7, BigRational::one(), &MultiIndex::unit(7, 0), -3, 0).unwrap();
        assert_eq!(*d, want);
        assert_eq!(*k.phi_deriv(&MultiIndex::zero(7)), k.phi);
    }

    #[test]
    fn second_derivatives_sum_to_laplacian() {
        let k = make_phi(&ProblemParams::new(2, 5).unwrap());
        let mut sum = RadialExpr::zero(5);
        for i in 0..5 {
            let mut e = vec![0; 5];
            e[i] = 2;
            sum = sum.add(&k.phi_deriv(&MultiIndex::new(e)));
        }
        assert_eq!(sum, k.phi.laplacian());
    }

    #[test]
    fn psi_vanishes_at_zero_increment() {
        let k = make_phi(&ProblemParams::new(3, 7).unwrap());
        let x = [0.3, -0.2, 0.1, 0.0, 0.5, 0.2, -0.1];
        assert_eq!(k.psi(&x, &[0.0; 7]).unwrap(), 0.0);
        assert!(matches!(k.psi(&[0.0; 7], &x), Err(Error::AtOrigin)));
        assert!(matches!(k.psi(&x, &x), Err(Error::Coincident)));
    }

    #[test]
    fn psi_collinear_matches_geometric_tail() {
        // Φ = −1/|x|; along the axis the Taylor tail of −1/(1−t) past t³ is −t⁴/(1−t)
        let k = make_phi(&ProblemParams::new(3, 7).unwrap());
        let mut x = [0.0; 7];
        x[0] = 1.0;
        for t in [0.1, 0.01, 1e-3, -0.3] {
            let mut y = [0.0; 7];
            y[0] = t;
            let got = k.psi(&x, &y).unwrap();
            let want = -t.powi(4) / (1.0 - t);
            assert!(((got - want) / want).abs() < 1e-13, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn m1_remainder_is_phi_of_difference() {
        let k = make_phi(&ProblemParams::new(1, 3).unwrap());
        let v = k.psi(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!((v + 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }
}
