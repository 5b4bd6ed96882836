//! Exact calculus on radial expressions.
//!
//! A [`RadialExpr`] is a finite sum of terms `c · x^γ · |x|^s · log(5/|x|)^k` with
//! rational `c`, integer `s` and `k ∈ {0, 1}`. The family is closed under partial
//! differentiation, so iterated Laplacians of fundamental solutions can be computed
//! and tested for vanishing exactly.
//!
//! Terms are kept in a normal form where the exponent of the last coordinate is at
//! most one: `x_n² = |x|² − Σ_{i<n} x_i²` is applied eagerly. With that rule two
//! expressions are equal as functions iff their term maps are equal, which turns
//! "is this zero?" into "is the map empty?".

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dd::{self, Dd};
use crate::error::{Error, Result};

/// Exponent vector of a monomial or a mixed partial derivative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, axis: usize) -> Self {
        let mut v = vec![0; n];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `|α|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α!`; exact for every order this crate uses (`|α| ≤ 20`).
    pub fn factorial(&self) -> u64 {
        self.0
            .iter()
            .map(|&a| (1..=a as u64).product::<u64>())
            .product()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// `(−y)^α / α!` in double-double precision.
    pub fn taylor_weight(&self, y: &[f64]) -> Dd {
        let mut acc = Dd::from(1.0);
        for (&a, &yi) in self.0.iter().zip(y) {
            for _ in 0..a {
                acc *= -yi;
            }
        }
        acc / (self.factorial() as f64)
    }

    /// All multi-indices of dimension `n` with `|α| ≤ k`, graded then lexicographic.
    pub fn enumerate(n: usize, k: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for total in 0..=k {
            let mut cur = vec![0u32; n];
            compositions(&mut cur, 0, total, &mut out);
        }
        out
    }
}

fn compositions(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if pos + 1 == n {
        cur[pos] = left;
        out.push(MultiIndex(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        compositions(cur, pos + 1, left - a, out);
    }
    cur[pos] = 0;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct TermKey {
    gamma: Vec<u32>,
    s: i32,
    log: u32,
}

/// Exact sum of `c · x^γ · |x|^s · log(5/|x|)^k` terms over `R^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadialExpr {
    dim: usize,
    terms: BTreeMap<TermKey, BigRational>,
}

/// Read-only view of one normalized term.
#[derive(Clone, Debug)]
pub struct Term<'a> {
    pub coeff: &'a BigRational,
    pub gamma: &'a [u32],
    pub rpow: i32,
    pub logflag: u32,
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl RadialExpr {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        RadialExpr {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        Self::rpow(dim, c, 0)
    }

    /// `c |x|^s`
    pub fn rpow(dim: usize, c: BigRational, s: i32) -> Self {
        let mut e = Self::zero(dim);
        e.push(vec![0; dim], s, 0, c);
        e
    }

    /// `c |x|^s log(5/|x|)`
    pub fn rpow_log(dim: usize, c: BigRational, s: i32) -> Self {
        let mut e = Self::zero(dim);
        e.push(vec![0; dim], s, 1, c);
        e
    }

    /// Generic constructor; rejects log powers above one.
    pub fn term(dim: usize, c: BigRational, gamma: &MultiIndex, s: i32, logflag: u32) -> Result<Self> {
        if logflag > 1 {
            return Err(Error::LogPower(logflag));
        }
        if gamma.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: gamma.dim(),
            });
        }
        let mut e = Self::zero(dim);
        e.push(gamma.0.clone(), s, logflag, c);
        Ok(e)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = Term<'_>> {
        self.terms.iter().map(|(k, c)| Term {
            coeff: c,
            gamma: &k.gamma,
            rpow: k.s,
            logflag: k.log,
        })
    }

    /// Insert with normal-form reduction of the last coordinate's exponent.
    fn push(&mut self, mut gamma: Vec<u32>, s: i32, log: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let last = self.dim - 1;
        if gamma[last] >= 2 {
            gamma[last] -= 2;
            for i in 0..last {
                let mut g = gamma.clone();
                g[i] += 2;
                self.push(g, s, log, -c.clone());
            }
            self.push(gamma, s + 2, log, c);
            return;
        }
        let key = TermKey { gamma, s, log };
        let slot = self.terms.entry(key.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &RadialExpr) -> RadialExpr {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.push(k.gamma.clone(), k.s, k.log, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> RadialExpr {
        let mut out = Self::zero(self.dim);
        for (k, v) in &self.terms {
            out.push(k.gamma.clone(), k.s, k.log, v * c);
        }
        out
    }

    pub fn neg(&self) -> RadialExpr {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &RadialExpr) -> RadialExpr {
        self.add(&other.neg())
    }

    /// Exact partial derivative along `axis` (0-based).
    pub fn derive(&self, axis: usize) -> RadialExpr {
        assert!(axis < self.dim, "axis {axis} out of range for dimension {}", self.dim);
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.terms {
            let g = &k.gamma;
            if g[axis] > 0 {
                let mut h = g.clone();
                h[axis] -= 1;
                out.push(h, k.s, k.log, c * BigInt::from(g[axis]));
            }
            let mut up = g.clone();
            up[axis] += 1;
            if k.s != 0 {
                out.push(up.clone(), k.s - 2, k.log, c * BigInt::from(k.s));
            }
            if k.log == 1 {
                out.push(up, k.s - 2, 0, -c.clone());
            }
        }
        out
    }

    /// Laplacian via the closed form for `x^γ |x|^s L^k`:
    /// `Δ(x^γ) |x|^s L^k + x^γ |x|^{s−2} [(s(s+n−2) + 2|γ|s) L^k − k(2s + n − 2 + 2|γ|)]`.
    pub fn laplacian(&self) -> RadialExpr {
        let n = self.dim as i64;
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.terms {
            let g = &k.gamma;
            for i in 0..self.dim {
                if g[i] >= 2 {
                    let mut h = g.clone();
                    h[i] -= 2;
                    let f = (g[i] as i64) * (g[i] as i64 - 1);
                    out.push(h, k.s, k.log, c * BigInt::from(f));
                }
            }
            let deg: i64 = g.iter().map(|&a| a as i64).sum();
            let s = k.s as i64;
            let main = s * (s + n - 2) + 2 * deg * s;
            out.push(g.clone(), k.s - 2, k.log, c * BigInt::from(main));
            if k.log == 1 {
                let cross = 2 * s + n - 2 + 2 * deg;
                out.push(g.clone(), k.s - 2, 0, -(c * BigInt::from(cross)));
            }
        }
        out
    }

    /// `Σ_i ∂_i ∂_i e` — the slow path, kept as a cross-check for [`Self::laplacian`].
    pub fn laplacian_generic(&self) -> RadialExpr {
        let mut out = Self::zero(self.dim);
        for i in 0..self.dim {
            out = out.add(&self.derive(i).derive(i));
        }
        out
    }

    pub fn iterated_laplacian(&self, m: u32) -> RadialExpr {
        assert!(m >= 1, "iterated Laplacian needs m ≥ 1");
        let mut e = self.clone();
        for _ in 0..m {
            e = e.laplacian();
        }
        e
    }

    /// `D^α e`
    pub fn derive_multi(&self, alpha: &MultiIndex) -> RadialExpr {
        let mut e = self.clone();
        for (axis, &a) in alpha.0.iter().enumerate() {
            for _ in 0..a {
                e = e.derive(axis);
            }
        }
        e
    }

    /// Floating evaluation. Rejects the origin.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_point(self.dim, x)?;
        let r = norm(x);
        let l = (5.0 / r).ln();
        let mut acc = 0.0;
        for (k, c) in &self.terms {
            let mut v = c.to_f64().unwrap_or(f64::NAN) * r.powi(k.s);
            for (&a, &xi) in k.gamma.iter().zip(x) {
                v *= xi.powi(a as i32);
            }
            if k.log == 1 {
                v *= l;
            }
            acc += v;
        }
        Ok(acc)
    }

    /// If every term is purely radial (`γ = 0`), the list `(c, s, k)`.
    pub fn radial_profile(&self) -> Option<Vec<(BigRational, i32, u32)>> {
        self.terms
            .iter()
            .map(|(k, c)| k.gamma.iter().all(|&a| a == 0).then(|| (c.clone(), k.s, k.log)))
            .collect()
    }

    /// If the expression is exactly `c |x|^s`, returns `(c, s)`.
    pub fn as_radial_power(&self) -> Option<(BigRational, i32)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next()?;
        (k.log == 0 && k.gamma.iter().all(|&a| a == 0)).then(|| (c.clone(), k.s))
    }

    pub fn compile(&self) -> CompiledExpr {
        CompiledExpr {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| CompiledTerm {
                    c: dd::from_rational(c),
                    gamma: k
                        .gamma
                        .iter()
                        .enumerate()
                        .filter(|(_, &a)| a > 0)
                        .map(|(i, &a)| (i, a))
                        .collect(),
                    s: k.s,
                    log: k.log == 1,
                })
                .collect(),
        }
    }
}

impl fmt::Display for RadialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (k, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else if idx > 0 { "+" } else { "" };
            if idx > 0 {
                write!(f, " ")?;
            }
            write!(f, "{sign}{}", c.abs())?;
            for (i, &a) in k.gamma.iter().enumerate() {
                if a > 0 {
                    write!(f, "·x{}^{a}", i + 1)?;
                }
            }
            if k.s != 0 {
                write!(f, "·|x|^{}", k.s)?;
            }
            if k.log == 1 {
                write!(f, "·log(5/|x|)")?;
            }
        }
        Ok(())
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_point(dim: usize, x: &[f64]) -> Result<()> {
    if x.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: x.len(),
        });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::AtOrigin);
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct CompiledTerm {
    c: Dd,
    gamma: Vec<(usize, u32)>,
    s: i32,
    log: bool,
}

/// Double-double evaluator for a fixed expression.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    terms: Vec<CompiledTerm>,
}

/// Quantities shared by every expression evaluated at the same point.
pub struct PointCtx {
    x: Vec<Dd>,
    r: Dd,
    log5r: Dd,
}

impl PointCtx {
    pub fn new(x: &[f64]) -> Result<Self> {
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::AtOrigin);
        }
        let xs: Vec<Dd> = x.iter().map(|&v| Dd::from(v)).collect();
        let r = dd::norm(x);
        let log5r = dd::ln(dd::div(Dd::from(5.0), r));
        Ok(PointCtx { x: xs, r, log5r })
    }

    pub fn r(&self) -> Dd {
        self.r
    }

    pub fn log5r(&self) -> Dd {
        self.log5r
    }
}

impl CompiledExpr {
    pub fn eval(&self, p: &PointCtx) -> Dd {
        let mut acc = Dd::from(0.0);
        for t in &self.terms {
            let mut v = t.c * dd::powi(p.r, t.s);
            for &(i, a) in &t.gamma {
                for _ in 0..a {
                    v *= p.x[i];
                }
            }
            if t.log {
                v *= p.log5r;
            }
            acc += v;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> BigRational {
        BigRational::one()
    }

    #[test]
    fn derive_of_r_squared_is_two_x1() {
        let e = RadialExpr::rpow(3, one(), 2);
        let d = e.derive(0);
        let want = RadialExpr::term(3, rat(2, 1), &MultiIndex::unit(3, 0), 0, 0).unwrap();
        assert_eq!(d, want);
    }

    #[test]
    fn derive_zero_is_zero() {
        assert!(RadialExpr::zero(4).derive(2).is_zero());
    }

    #[test]
    fn derive_log_n2() {
        let e = RadialExpr::rpow_log(2, one(), 0);
        let d = e.derive(0);
        let want = RadialExpr::term(2, -one(), &MultiIndex::unit(2, 0), -2, 0).unwrap();
        assert_eq!(d, want);
        // central difference at (0.3, 0.4)
        let h = 1e-6;
        let f = |x: f64| (5.0 / (x * x + 0.16_f64).sqrt()).ln();
        let fd = (f(0.3 + h) - f(0.3 - h)) / (2.0 * h);
        let got = d.eval(&[0.3, 0.4]).unwrap();
        assert!((fd - got).abs() < 1e-8, "{fd} vs {got}");
    }

    #[test]
    fn laplacian_examples() {
        let lap = RadialExpr::rpow(7, one(), -1).laplacian();
        assert_eq!(lap, RadialExpr::rpow(7, rat(-4, 1), -3));
        assert!(RadialExpr::constant(5, rat(3, 2)).laplacian().is_zero());
        let lg = RadialExpr::rpow_log(6, one(), 0).laplacian();
        assert_eq!(lg, RadialExpr::rpow(6, rat(-4, 1), -2));
    }

    #[test]
    fn iterated_examples() {
        assert!(RadialExpr::rpow(7, one(), -1).iterated_laplacian(3).is_zero());
        assert_eq!(
            RadialExpr::rpow(7, one(), 3).iterated_laplacian(3),
            RadialExpr::rpow(7, rat(-576, 1), -3)
        );
        assert!(RadialExpr::rpow_log(6, one(), 0).iterated_laplacian(3).is_zero());
    }

    #[test]
    fn eval_examples() {
        let x = [0.3, 0.4, 0.0];
        assert!((RadialExpr::rpow(3, one(), -1).eval(&x).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(RadialExpr::zero(3).eval(&x).unwrap(), 0.0);
        let lg = RadialExpr::rpow_log(2, one(), 0);
        assert!(lg.eval(&[3.0, 4.0]).unwrap().abs() < 1e-15);
        assert!(matches!(lg.eval(&[0.0, 0.0]), Err(Error::AtOrigin)));
    }

    #[test]
    fn normal_form_identifies_equal_functions() {
        // x_1² + x_2² − |x|² = 0 in R²
        let a = RadialExpr::term(2, one(), &MultiIndex::new(vec![2, 0]), 0, 0).unwrap();
        let b = RadialExpr::term(2, one(), &MultiIndex::new(vec![0, 2]), 0, 0).unwrap();
        let c = RadialExpr::rpow(2, one(), 2);
        assert!(a.add(&b).sub(&c).is_zero());
    }

    #[test]
    fn rejects_second_log_power() {
        assert!(matches!(
            RadialExpr::term(3, one(), &MultiIndex::zero(3), 0, 2),
            Err(Error::LogPower(2))
        ));
    }

    #[test]
    fn enumeration_counts() {
        for (n, k, want) in [(7usize, 3u32, 120usize), (2, 4, 15), (3, 0, 1), (6, 3, 84)] {
            let all = MultiIndex::enumerate(n, k);
            assert_eq!(all.len(), want);
            let mut dedup = all.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), want);
        }
    }

    #[test]
    fn compiled_matches_f64() {
        let e = RadialExpr::rpow_log(4, rat(3, 7), 2)
            .add(&RadialExpr::rpow(4, rat(-1, 3), -2))
            .derive(1)
            .derive(3);
        let x = [0.3, -0.2, 0.5, 0.7];
        let p = PointCtx::new(&x).unwrap();
        let a = e.eval(&x).unwrap();
        let b = e.compile().eval(&p).hi();
        assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
    }
}
