//! Double-double helpers on top of `twofloat`.
//!
//! Taylor remainders lose `(2m−3)·log10(|x|/|y|)` digits to cancellation, so the
//! remainder kernel is evaluated with ~32 significant digits. The routines here are
//! the pieces `twofloat` does not provide with full accuracy: division by a
//! double-double, `exp`/`ln`, `log1p` for small arguments, and `(1+q)^{s/2} − 1`
//! without cancellation. Use [`div`] instead of the `/` operator between two `Dd`s.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use twofloat::TwoFloat;

pub type Dd = TwoFloat;

pub fn from_rational(c: &BigRational) -> Dd {
    let hi = c.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() {
        return Dd::from(hi);
    }
    let lo = match BigRational::from_float(hi) {
        Some(h) => (c - h).to_f64().unwrap_or(0.0),
        None => 0.0,
    };
    Dd::new_add(hi, lo)
}

/// Exact `x·y` sums accumulated in double-double.
pub fn dot(a: &[f64], b: &[f64]) -> Dd {
    let mut acc = Dd::from(0.0);
    for (&x, &y) in a.iter().zip(b) {
        acc += Dd::new_mul(x, y);
    }
    acc
}

pub fn norm(x: &[f64]) -> Dd {
    dot(x, x).sqrt()
}

const LN2: (f64, f64) = (0.6931471805599453, 2.3190468138462996e-17);

/// `a / b` to double-double accuracy (two correction steps).
pub fn div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    Dd::new_add(q1, q2) + q3
}

pub fn recip(b: Dd) -> Dd {
    div(Dd::from(1.0), b)
}

pub fn powi(x: Dd, n: i32) -> Dd {
    let mut base = x;
    let mut e = n.unsigned_abs();
    let mut acc = Dd::from(1.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    if n < 0 {
        recip(acc)
    } else {
        acc
    }
}

pub fn exp(a: Dd) -> Dd {
    let k = (a.hi() / LN2.0).round();
    let r = a - Dd::new_add(LN2.0, LN2.1) * k;
    let s = r * (1.0 / 1024.0);
    // e^s − 1 by Taylor, then ten squarings of (1 + e)
    let mut term = s;
    let mut e = s;
    let mut j = 2.0;
    while term.hi().abs() > 1e-36 && j < 30.0 {
        term = term * s / j;
        e += term;
        j += 1.0;
    }
    for _ in 0..10 {
        e = e * 2.0 + e * e;
    }
    (e + 1.0) * 2f64.powi(k as i32)
}

/// Natural log: `y₀ = ln(hi)` refined by `log1p(x·e^{−y₀} − 1)`.
pub fn ln(x: Dd) -> Dd {
    let y0 = x.hi().ln();
    let t = x * exp(Dd::from(-y0)) - 1.0;
    ln1p(t) + y0
}

/// `log(1+q)` via `2·atanh(q/(2+q))`; accurate to double-double for `|q| ≤ 1/2`.
pub fn ln1p(q: Dd) -> Dd {
    if q.hi().abs() > 0.5 {
        return ln(Dd::from(1.0) + q);
    }
    let z = div(q, Dd::from(2.0) + q);
    let z2 = z * z;
    let mut term = z;
    let mut acc = z;
    let mut k = 1.0;
    loop {
        term *= z2;
        let add = term / (2.0 * k + 1.0);
        acc += add;
        if add.hi().abs() <= 1e-34 * acc.hi().abs() || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    acc * 2.0
}

/// `(1+q)^{s/2} − 1`, cancellation-free for `|q| ≤ 1/2`.
pub fn rel_pow_m1(q: Dd, s: i32) -> Dd {
    let one = Dd::from(1.0);
    if q.hi().abs() > 0.5 {
        let w = one + q;
        let mut v = powi(w, s.div_euclid(2));
        if s.rem_euclid(2) == 1 {
            v *= w.sqrt();
        }
        return v - one;
    }
    if s == 0 {
        return Dd::from(0.0);
    }
    if s < 0 {
        let p = rel_pow_m1(q, -s);
        return -div(p, one + p);
    }
    let k = s / 2;
    // (1+q)^k − 1 = Σ_{j≥1} C(k,j) q^j
    let mut even = Dd::from(0.0);
    let mut qj = one;
    let mut binom = 1.0;
    for j in 1..=k {
        binom = binom * ((k - j + 1) as f64) / (j as f64);
        qj *= q;
        even += qj * binom;
    }
    if s % 2 == 0 {
        return even;
    }
    let half = div(q, (one + q).sqrt() + one);
    even + half + even * half
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

pub fn to_f64(x: Dd) -> f64 {
    x.hi() + x.lo()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln1p_small_argument_keeps_digits() {
        let q = Dd::from(1e-20);
        let v = ln1p(q);
        // log(1+q) = q − q²/2 + …
        let want = Dd::from(1e-20) - Dd::from(5e-41);
        assert!(div(v - want, want).hi().abs() < 1e-30);
    }

    #[test]
    fn rel_pow_m1_matches_direct_for_moderate_q() {
        for s in -7..=7 {
            for &q in &[0.3, -0.4, 0.01, 0.6, -0.7, 3.0] {
                let a = to_f64(rel_pow_m1(Dd::from(q), s));
                let b = (1.0 + q as f64).powf(s as f64 / 2.0) - 1.0;
                assert!((a - b).abs() < 1e-14 * (1.0 + b.abs()), "s={s} q={q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rel_pow_m1_tiny_q_is_linear() {
        let q = Dd::from(1e-25);
        let v = rel_pow_m1(q, 3);
        let want = 1.5e-25;
        assert!((to_f64(v) - want).abs() < 1e-38);
    }

    #[test]
    fn division_and_transcendentals_are_double_double() {
        let third = div(Dd::from(1.0), Dd::from(3.0));
        assert!((third * 3.0 - 1.0).hi().abs() < 1e-31);
        let l2 = ln(Dd::from(2.0));
        assert_eq!(l2.hi(), LN2.0);
        assert!((l2.lo() - LN2.1).abs() < 1e-31);
        let e = exp(Dd::from(1.0));
        // e = 2.718281828459045 + 1.4456468917292502e-16
        assert_eq!(e.hi(), std::f64::consts::E);
        assert!((e.lo() - 1.4456468917292502e-16).abs() < 1e-30);
        assert!((powi(Dd::from(3.0), -2) * 9.0 - 1.0).hi().abs() < 1e-31);
    }

    #[test]
    fn compensated_sum() {
        let s: KahanSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
