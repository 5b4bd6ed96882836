//! Explicit singular solutions: sequences `(x_j, r_j, ε_j)` for each construction,
//! and the exact exponent bookkeeping behind them.
//!
//! Centers sit on the `+e_1` axis at `|x_j| = 2^{−2j−1}`. For each candidate `j` the
//! builder computes `ε_j = ψ(|x_j|)` and `r_j` from the construction's balance
//! condition, then keeps the first `J_max` consecutive indices that pass every
//! filter (support separation, the construction's own side conditions, and
//! optionally a visibility filter, see [`BuildOptions::visibility`]).
//!
//! All radii are handled as `log r_j`; some constructions need `r_j = |x_j| e^{−L}`
//! with `L` around `10^{21}`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::bump::{standard_profile, BumpSpec};
use crate::error::{Error, Result};
use crate::kernel::{classify_case, CaseTag, ProblemParams};
use crate::potential::{choose_c, lower_bound_constant, Nonlinearity, QuadratureConfig, SolutionSpec, SpecMeta, Theorem};

/// Largest sequence index searched.
pub const J_SEARCH: u32 = 40;

fn ri(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn to_f(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn ser_rat<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_opt_rat<S: Serializer>(q: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_none(),
    }
}

/// Parse `"3"`, `"1/2"` or `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse {s:?} as a rational number"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let q = BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()));
    Ok(if neg { -q } else { q })
}

/// An interval of admissible `λ`; `hi = None` means `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub lo: BigRational,
    pub lo_closed: bool,
    pub hi: Option<BigRational>,
    pub hi_closed: bool,
}

impl Window {
    pub fn contains(&self, l: &BigRational) -> bool {
        let above = if self.lo_closed { l >= &self.lo } else { l > &self.lo };
        let below = match &self.hi {
            None => true,
            Some(h) if self.hi_closed => l <= h,
            Some(h) => l < h,
        };
        above && below
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        match &self.hi {
            Some(h) => write!(f, "{open}{}, {}{}", self.lo, h, if self.hi_closed { ']' } else { ')' }),
            None => write!(f, "{open}{}, ∞)", self.lo),
        }
    }
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Two closed forms of the same exponent, compared exactly.
#[derive(Clone, Debug, Serialize)]
pub struct Identity {
    pub name: String,
    #[serde(serialize_with = "ser_rat")]
    pub lhs: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub rhs: BigRational,
}

impl Identity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Exponents of one construction, exact.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentSheet {
    pub theorem: Theorem,
    pub case: CaseTag,
    #[serde(serialize_with = "ser_rat")]
    pub lambda: BigRational,
    pub window: Window,
    /// Growth exponent of the bound being beaten (`|x|^{−a}`), or the auxiliary `a`
    /// of the construction where the bound carries none.
    #[serde(serialize_with = "ser_opt_rat")]
    pub a: Option<BigRational>,
    /// Secondary exponent: the `ψ` exponent `b` (interior power case) or the
    /// exterior growth exponent.
    #[serde(serialize_with = "ser_opt_rat")]
    pub b: Option<BigRational>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub p: Option<BigRational>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub tau: Option<BigRational>,
    pub identities: Vec<Identity>,
}

/// Admissible `λ` for a construction.
pub fn lambda_window(theorem: Theorem, m: u32, n: usize) -> Window {
    let (m, n) = (m as i64, n as i64);
    let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
    match theorem {
        Theorem::T1_5 => Window {
            lo: q(2 * m + n - 2, n - 2),
            lo_closed: false,
            hi: Some(q(n, n - 2 * m)),
            hi_closed: false,
        },
        Theorem::T1_6 => Window {
            lo: q(n, n - 2 * m),
            lo_closed: true,
            hi: None,
            hi_closed: false,
        },
        Theorem::T1_8 => Window {
            lo: q(2 * n - 2, n - 2),
            lo_closed: false,
            hi: None,
            hi_closed: false,
        },
        Theorem::T1_10 => Window {
            lo: ri(0),
            lo_closed: false,
            hi: Some(ri(1)),
            hi_closed: false,
        },
        Theorem::T1_11 => Window {
            lo: ri(1),
            lo_closed: true,
            hi: None,
            hi_closed: false,
        },
        Theorem::T1_17 => Window {
            lo: ri(0),
            lo_closed: false,
            hi: Some(q(n, n - 2 * m)),
            hi_closed: false,
        },
    }
}

/// Exponent sheet; rejects `(m, n)` in the wrong case and `λ` outside the window.
pub fn exponents(theorem: Theorem, m: u32, n: usize, lambda: &BigRational) -> Result<ExponentSheet> {
    if m < 1 || n < 2 {
        return Err(Error::Inadmissible(format!("need m ≥ 1 and n ≥ 2, got m={m}, n={n}")));
    }
    let case = classify_case(m, n);
    if case != theorem.case() {
        let want = match theorem.case() {
            CaseTag::IV => "m ≥ 3 odd and 2m < n",
            _ => "m ≥ 3 odd and 2m = n",
        };
        return Err(Error::Inadmissible(format!(
            "construction {theorem} needs case {} ({want}); (m, n) = ({m}, {n}) is case {case}",
            theorem.case()
        )));
    }
    let window = lambda_window(theorem, m, n);
    if !window.contains(lambda) {
        let rule = match theorem {
            Theorem::T1_5 => "(2m+n−2)/(n−2) < λ < n/(n−2m)",
            Theorem::T1_6 => "λ ≥ n/(n−2m)",
            Theorem::T1_8 => "λ > (2n−2)/(n−2)",
            Theorem::T1_10 => "0 < λ < 1",
            Theorem::T1_11 => "λ ≥ 1",
            Theorem::T1_17 => "0 < λ < n/(n−2m)",
        };
        return Err(Error::Inadmissible(format!(
            "λ = {lambda} violates {rule}, i.e. λ ∈ {window} for (m, n) = ({m}, {n})"
        )));
    }
    let (mi, ni) = (ri(m as i64), ri(n as i64));
    let l = lambda.clone();
    let one = BigRational::one();
    let two = ri(2);
    let denom = &ni - &l * (&ni - &two * &mi);
    let mut sheet = ExponentSheet {
        theorem,
        case,
        lambda: l.clone(),
        window,
        a: None,
        b: None,
        p: None,
        tau: None,
        identities: Vec::new(),
    };
    match theorem {
        Theorem::T1_5 => {
            let a = ri(4) * &mi * (&mi - &one) / &denom;
            let excess = &l * (&ni - &two) - (&two * &mi + &ni - &two);
            let a_alt = &ni - &two + &excess * (&ni - &two * &mi) / &denom;
            let b = &excess / &denom;
            sheet.identities.push(Identity {
                name: "growth exponent, two closed forms".into(),
                lhs: a.clone(),
                rhs: a_alt,
            });
            sheet.a = Some(a);
            sheet.b = Some(b);
            sheet.p = Some(&denom / (ri(4) * &mi));
        }
        Theorem::T1_8 => {
            sheet.a = Some(((&ni - &two) * (&l - &one) - &ni) / &l);
        }
        Theorem::T1_10 => {
            sheet.a = Some((&ni - &two) / (&one - &l));
        }
        Theorem::T1_17 => {
            let tau = &l * (&ni - &two * &mi) - &ni - &two * &mi;
            let a = (&l * (&mi - &one) + &one) / &denom;
            let b = &two * &mi * (&ni - &two) / &denom;
            sheet.identities.push(Identity {
                name: "1 + 2a against the weighted radius exponent".into(),
                lhs: &one + &two * &a,
                rhs: (&l * (&two * &mi - &two) - &two * &mi + &two - &tau) / &denom,
            });
            sheet.identities.push(Identity {
                name: "exterior exponent b, two closed forms".into(),
                lhs: b.clone(),
                rhs: &two * &mi - &two + (&ni - &two * &mi) * &two * &a,
            });
            sheet.a = Some(a);
            sheet.b = Some(b);
            sheet.p = Some(&denom / (&two * &ni));
            sheet.tau = Some(tau);
        }
        Theorem::T1_6 | Theorem::T1_11 => {}
    }
    Ok(sheet)
}

/// Exterior growth exponent `b = 2m(n−2)/(n−σ(n−2m))` and its second closed form
/// `2m − 2 + 2(n−2m)(1+σ(m−1))/(n−σ(n−2m))`.
pub fn exterior_exponent(m: u32, n: usize, sigma: &BigRational) -> (BigRational, BigRational) {
    let (mi, ni) = (ri(m as i64), ri(n as i64));
    let two = ri(2);
    let denom = &ni - sigma * (&ni - &two * &mi);
    let b1 = &two * &mi * (&ni - &two) / &denom;
    let b2 = &two * &mi - &two + &two * (&ni - &two * &mi) * (BigRational::one() + sigma * (&mi - BigRational::one())) / &denom;
    (b1, b2)
}

/// The modulus `φ` in the bound a construction beats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhiPreset {
    /// `r^α` (→0) or `r^{−α}` (→∞)
    Pow(f64),
    /// `1/log(e/r)` (→0) or `log(1/r)` (→∞)
    Log,
    /// `1/(1 + log log(e/r))` (→0) or `1 + log log(e/r)` (→∞)
    LogLog,
    /// `exp(−√log(1/r))` (→0) or `exp(√log(1/r))` (→∞)
    ExpLog,
}

impl PhiPreset {
    /// `log φ(r)` for `r ∈ (0, 1)`; `to_zero` selects the decaying variant.
    pub fn log_eval(&self, r: f64, to_zero: bool) -> f64 {
        let sign = if to_zero { 1.0 } else { -1.0 };
        match *self {
            PhiPreset::Pow(a) => sign * a * r.ln(),
            PhiPreset::Log => {
                if to_zero {
                    -(1.0 - r.ln()).ln()
                } else {
                    (-r.ln()).ln()
                }
            }
            PhiPreset::LogLog => -sign * (1.0 + (1.0 - r.ln()).ln()).ln(),
            PhiPreset::ExpLog => -sign * (-r.ln()).sqrt(),
        }
    }

    pub fn eval(&self, r: f64, to_zero: bool) -> f64 {
        self.log_eval(r, to_zero).exp()
    }
}

impl FromStr for PhiPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(a) = s.strip_prefix("pow:") {
            let a: f64 = a.parse().map_err(|_| Error::Config(format!("bad power in φ preset {s:?}")))?;
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("φ preset power must be positive, got {a}")));
            }
            return Ok(PhiPreset::Pow(a));
        }
        match s {
            "log" => Ok(PhiPreset::Log),
            "loglog" => Ok(PhiPreset::LogLog),
            "explog" => Ok(PhiPreset::ExpLog),
            _ => Err(Error::Config(format!("unknown φ preset {s:?}; expected pow:α, log, loglog or explog"))),
        }
    }
}

impl fmt::Display for PhiPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiPreset::Pow(a) => write!(f, "pow:{a}"),
            PhiPreset::Log => write!(f, "log"),
            PhiPreset::LogLog => write!(f, "loglog"),
            PhiPreset::ExpLog => write!(f, "explog"),
        }
    }
}

/// Default modulus per construction.
pub fn default_phi(theorem: Theorem) -> PhiPreset {
    if theorem.phi_to_zero() {
        PhiPreset::Pow(1.0)
    } else {
        PhiPreset::Log
    }
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Number of retained bumps, `3 ≤ J_max ≤ 12`.
    pub j_max: usize,
    /// `A` in the sequence formulas; defaults to the lower-bound constant of the
    /// potential (see [`lower_bound_constant`]).
    pub a_used: Option<f64>,
    /// Drop leading `j` until the bump lower bound for `u(x_j)` exceeds the
    /// `|x_j|^{2−n}` background. `None` enables it for constructions whose
    /// certified growth is a power beyond the background.
    pub visibility: Option<bool>,
    /// Sample budget for choosing `C`.
    pub c_budget: usize,
    pub quadrature: QuadratureConfig,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            j_max: 8,
            a_used: None,
            visibility: None,
            c_budget: 24,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// One candidate bump before filtering.
#[derive(Clone, Debug)]
struct Candidate {
    epsilon: f64,
    log_radius: f64,
    /// `log` of the lower bound for `u` inside the bump.
    log_lower: f64,
    /// First failed side condition.
    failure: Option<&'static str>,
}

fn center_norm(j: u32) -> f64 {
    2f64.powi(-(2 * j as i32) - 1)
}

/// `log` of the lower bound `Aε/(|x|^{2m−2} r^{n−2m})` (2m < n) or
/// `(Aε/|x|^{n−2}) log(|x|/r)` (2m = n).
pub fn log_lower_bound(m: u32, n: usize, a: f64, epsilon: f64, x_norm: f64, log_radius: f64) -> f64 {
    let base = a.ln() + epsilon.ln();
    if 2 * m as usize == n {
        base - (n as f64 - 2.0) * x_norm.ln() + (x_norm.ln() - log_radius).ln()
    } else {
        base - (2.0 * m as f64 - 2.0) * x_norm.ln() - (n as f64 - 2.0 * m as f64) * log_radius
    }
}

struct Setup<'a> {
    theorem: Theorem,
    m: u32,
    n: usize,
    lambda: f64,
    sheet: &'a ExponentSheet,
    phi: PhiPreset,
    a: f64,
}

impl Setup<'_> {
    fn log_phi(&self, x: f64) -> f64 {
        self.phi.log_eval(x, self.theorem.phi_to_zero())
    }

    fn candidate(&self, j: u32) -> Candidate {
        let x = center_norm(j);
        let lx = x.ln();
        let (m, n, l, a) = (self.m as f64, self.n as f64, self.lambda, self.a);
        let q = |v: &Option<BigRational>| v.as_ref().map(to_f).unwrap_or(f64::NAN);
        let (log_eps, log_r, mut failure): (f64, f64, Option<&'static str>) = match self.theorem {
            Theorem::T1_5 => {
                let d = n - l * (n - 2.0 * m);
                let (b, p) = (q(&self.sheet.b), q(&self.sheet.p));
                let log_psi = (p * self.log_phi(x)).max(d / (l - 1.0) * b / 2.0 * lx);
                let log_r = (-l * a.ln() + (l - 1.0) * (2.0 * m - 2.0) * lx - (l - 1.0) * log_psi) / d;
                (log_psi, log_r, None)
            }
            Theorem::T1_6 => {
                let log_psi = (m - 1.0) * lx;
                let f = if -l * a.ln() + (l - 1.0) * (m - 1.0) * lx < 0.0 {
                    None
                } else {
                    Some("A^{−λ}|x_j|^{(λ−1)(m−1)} < 1")
                };
                // largest r ≤ |x|/5 with Aψ/(|x|^{2m−2} r^{n−2m}) ≥ 2φ²
                let cap = (a.ln() + log_psi - (2.0 * m - 2.0) * lx - 2f64.ln() - 2.0 * self.log_phi(x)) / (n - 2.0 * m);
                (log_psi, cap.min(lx - 5f64.ln()), f)
            }
            Theorem::T1_8 => {
                let aa = q(&self.sheet.a);
                let log_psi = (0.5 * self.log_phi(x)).max(aa * l / (2.0 * (l - 1.0)) * lx);
                let log_rho = (n / (l * a)).ln() + aa * lx - (l - 1.0) / l * log_psi;
                if log_rho >= -1.0 {
                    (log_psi, f64::NAN, Some("ρ_j < 1/e"))
                } else {
                    let big_l = l / n * (-log_rho + (-log_rho).ln());
                    (log_psi, lx - big_l, None)
                }
            }
            Theorem::T1_10 => {
                let log_psi = ((1.0 - l) / 2.0 * self.log_phi(x)).max((n - 2.0) / 2.0 * lx);
                let log_big_l = (l * (a.ln() + log_psi - (n - 2.0) * lx) - (2.0 * n).ln()) / (1.0 - l);
                let big_l = log_big_l.exp();
                let f = if big_l > (2.0 * n - 2.0) * -lx { None } else { Some("log(1/|x_j|^{2n−2}) < log(|x_j|/r_j)") };
                (log_psi, lx - big_l, f)
            }
            Theorem::T1_11 => {
                let log_psi = (n - 2.0) / 2.0 * lx;
                let f = if a * (log_psi - (n - 2.0) * lx).exp() > n + 1.0 {
                    None
                } else {
                    Some("Aψ(|x_j|)/|x_j|^{n−2} > n + 1")
                };
                let phi2 = (2.0 * self.log_phi(x)).exp();
                let big_l = 2.0 * ((2.0 * n - 2.0) * -lx).max(phi2 / (n + 1.0));
                (log_psi, lx - big_l, f)
            }
            Theorem::T1_17 => {
                let d = n - l * (n - 2.0 * m);
                let (aa, p, tau) = (q(&self.sheet.a), q(&self.sheet.p), q(&self.sheet.tau));
                // φ is a modulus at infinity: evaluate at 1/|x|
                let log_psi = (p * self.log_phi(x)).max(aa * d / l * lx);
                let log_r = (tau.abs() * 2f64.ln() + (l * (2.0 * m - 2.0) - 2.0 * m + 2.0 - tau) * lx - l * a.ln() - l * log_psi) / d;
                (log_psi, log_r, None)
            }
        };
        if failure.is_none() && !(log_r <= lx - 5f64.ln() + 1e-12) {
            failure = Some("r_j ≤ |x_j|/5");
        }
        if failure.is_none() && !(log_eps < 0.0) {
            failure = Some("ψ(|x_j|) < 1");
        }
        let epsilon = log_eps.exp();
        Candidate {
            epsilon,
            log_radius: log_r,
            log_lower: log_lower_bound(self.m, self.n, a, epsilon, x, log_r),
            failure,
        }
    }
}

/// Whether the visibility filter is on by default.
pub fn visibility_default(theorem: Theorem) -> bool {
    matches!(theorem, Theorem::T1_5 | Theorem::T1_10 | Theorem::T1_17)
}

/// Build a spec for any construction.
pub fn build(theorem: Theorem, m: u32, n: usize, lambda: &BigRational, phi: PhiPreset, opts: &BuildOptions) -> Result<SolutionSpec> {
    let sheet = exponents(theorem, m, n, lambda)?;
    if !(3..=12).contains(&opts.j_max) {
        return Err(Error::Config(format!("J_max must lie in [3, 12], got {}", opts.j_max)));
    }
    if let PhiPreset::Pow(a) = phi {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::Config(format!("φ power must be positive, got {a}")));
        }
    }
    let params = ProblemParams::normalized(m, n)?;
    let profile = standard_profile(n);
    let a_lower = lower_bound_constant(&profile, &params)?;
    let a_used = opts.a_used.unwrap_or(a_lower);
    if !(a_used > 0.0 && a_used.is_finite()) {
        return Err(Error::NonPositive(a_used));
    }
    let visibility = opts.visibility.unwrap_or_else(|| visibility_default(theorem));
    let lambda_f = to_f(lambda);
    let setup = Setup {
        theorem,
        m,
        n,
        lambda: lambda_f,
        sheet: &sheet,
        phi,
        a: a_used,
    };
    let cands: Vec<Candidate> = (0..=J_SEARCH).map(|j| setup.candidate(j)).collect();
    let passes = |j: usize| {
        let c = &cands[j];
        c.failure.is_none() && (!visibility || c.log_lower >= -(n as f64 - 2.0) * center_norm(j as u32).ln())
    };
    let start = (0..cands.len().saturating_sub(opts.j_max - 1)).find(|&j0| (j0..j0 + opts.j_max).all(passes));
    let Some(j0) = start else {
        let last = cands.last().and_then(|c| c.failure).unwrap_or("visibility of the bump lower bound");
        return Err(Error::Infeasible(format!(
            "no {} consecutive indices j ≤ {J_SEARCH} satisfy all conditions at A = {a_used:e}; last failure: {last}",
            opts.j_max
        )));
    };
    let mut bumps = Vec::new();
    let mut j_indices = Vec::new();
    let mut phi_values = Vec::new();
    for j in j0..j0 + opts.j_max {
        let c = &cands[j];
        let x = center_norm(j as u32);
        let mut center = vec![0.0; n];
        center[0] = x;
        bumps.push(BumpSpec::from_log_radius(center, c.log_radius, c.epsilon, m));
        j_indices.push(j as u32);
        phi_values.push(setup.log_phi(x).exp());
    }
    let epsilon_ratio = bumps
        .windows(2)
        .map(|w| w[1].epsilon / w[0].epsilon)
        .fold(0.0, f64::max);
    let nonlinearity = match theorem {
        Theorem::T1_5 | Theorem::T1_6 | Theorem::T1_8 => Nonlinearity::Power { lambda: lambda_f },
        Theorem::T1_10 | Theorem::T1_11 => Nonlinearity::ExpPower { lambda: lambda_f },
        Theorem::T1_17 => Nonlinearity::WeightedPower {
            lambda: lambda_f,
            tau: sheet.tau.as_ref().map(to_f).unwrap_or(0.0),
        },
    };
    let mut notes = Vec::new();
    if epsilon_ratio >= 1.0 {
        notes.push("ε_j is not decreasing over the retained indices".to_string());
    }
    let mut spec = SolutionSpec {
        params,
        bumps,
        c: 1.0,
        a_used,
        theorem,
        nonlinearity,
        meta: SpecMeta {
            phi: Some(phi.to_string()),
            lambda_exact: Some(lambda.to_string()),
            j_indices,
            j_offset: j0 as u32,
            epsilon_ratio: Some(epsilon_ratio),
            a_lower: Some(a_lower),
            halvings: 0,
            visibility_filter: visibility,
            phi_values,
            notes,
        },
    };
    spec.c = choose_c(&spec, opts.c_budget, &opts.quadrature)?;
    Ok(spec)
}

pub fn build_thm15(m: u32, n: usize, lambda: &BigRational, phi: PhiPreset, opts: &BuildOptions) -> Result<SolutionSpec> {
    build(Theorem::T1_5, m, n, lambda, phi, opts)
}

pub fn build_thm16(m: u32, n: usize, lambda: &BigRational, phi: PhiPreset, opts: &BuildOptions) -> Result<SolutionSpec> {
    build(Theorem::T1_6, m, n, lambda, phi, opts)
}

pub fn build_thm18(m: u32, n: usize, lambda: &BigRational, phi: PhiPreset, opts: &BuildOptions) -> Result<SolutionSpec> {
    build(Theorem::T1_8, m, n, lambda, phi, opts)
}

pub fn build_thm110(m: u32, n: usize, lambda: &BigRational, phi: PhiPreset, opts: &BuildOptions) -> Result<SolutionSpec> {
    build(Theorem::T1_10, m, n, lambda, phi, opts)
}

pub fn build_thm111(m: u32, n: usize, lambda: &BigRational, phi: PhiPreset, opts: &BuildOptions) -> Result<SolutionSpec> {
    build(Theorem::T1_11, m, n, lambda, phi, opts)
}

pub fn build_thm117(m: u32, n: usize, lambda: &BigRational, phi: PhiPreset, opts: &BuildOptions) -> Result<SolutionSpec> {
    build(Theorem::T1_17, m, n, lambda, phi, opts)
}

/// `λ` and `φ` recorded in a spec.
pub fn spec_inputs(spec: &SolutionSpec) -> Result<(BigRational, PhiPreset)> {
    let lambda = match &spec.meta.lambda_exact {
        Some(s) => parse_rational(s)?,
        None => BigRational::from_float(spec.nonlinearity.lambda())
            .ok_or_else(|| Error::Spec("non-finite λ".into()))?,
    };
    let phi = match &spec.meta.phi {
        Some(s) => s.parse()?,
        None => default_phi(spec.theorem),
    };
    Ok((lambda, phi))
}

/// Per-bump balance margins: `log` of (available/required) for the construction's
/// admissibility condition; nonnegative means the condition holds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BalanceRow {
    pub position: usize,
    pub x_norm: f64,
    pub log_radius: f64,
    /// `log(lhs) − log(rhs)` of the radius balance (power cases) or the logarithmic
    /// balance (2m = n).
    pub margin: f64,
    /// `|log lhs − log rhs| / max(1, |log rhs|)`.
    pub relative_residual: f64,
}

/// Radius balance of every bump.
///
/// 2m < n: `r^{n−λ(n−2m)} ≥ 2^{|τ|}|x|^{(λ−1)(2m−2)−τ} / (A^λ ψ^{λ−1})`.
/// 2m = n, `u^λ`: `log(|x|/r) ≥ (|x|/r)^{n/λ}|x|^a / (Aψ^{(λ−1)/λ})`.
/// 2m = n, `e^{u^λ}`: `log(ψ/|x|^{2n−2}) + n log(|x|/r) ≤ (Aψ log(|x|/r)/|x|^{n−2})^λ`.
pub fn balance_rows(spec: &SolutionSpec) -> Vec<BalanceRow> {
    let m = spec.params.m as f64;
    let n = spec.params.n as f64;
    let a = spec.a_used;
    spec.bumps
        .iter()
        .enumerate()
        .map(|(pos, b)| {
            let x = b.center_norm();
            let lx = x.ln();
            let lpsi = b.epsilon.ln();
            let lr = b.log_radius;
            let (lhs, rhs) = match spec.nonlinearity {
                Nonlinearity::Power { lambda } | Nonlinearity::WeightedPower { lambda, .. } if 2.0 * m < n => {
                    let tau = match spec.nonlinearity {
                        Nonlinearity::WeightedPower { tau, .. } => tau,
                        _ => 0.0,
                    };
                    let lhs = (n - lambda * (n - 2.0 * m)) * lr;
                    let rhs = tau.abs() * 2f64.ln() + ((lambda - 1.0) * (2.0 * m - 2.0) - tau) * lx
                        - lambda * a.ln()
                        - (lambda - 1.0) * lpsi;
                    (lhs, rhs)
                }
                Nonlinearity::Power { lambda } | Nonlinearity::WeightedPower { lambda, .. } => {
                    let big_l = lx - lr;
                    let aa = ((n - 2.0) * (lambda - 1.0) - n) / lambda;
                    let rhs = n / lambda * big_l + aa * lx - a.ln() - (lambda - 1.0) / lambda * lpsi;
                    (big_l.ln(), rhs)
                }
                Nonlinearity::ExpPower { lambda } => {
                    let big_l = lx - lr;
                    let need = lpsi - (2.0 * n - 2.0) * lx + n * big_l;
                    let have_log = lambda * (a.ln() + lpsi + big_l.ln() - (n - 2.0) * lx);
                    // compare log(have) with log(need) when need > 0
                    let need_log = if need > 0.0 { need.ln() } else { f64::NEG_INFINITY };
                    (have_log, need_log)
                }
            };
            BalanceRow {
                position: pos,
                x_norm: x,
                log_radius: lr,
                margin: lhs - rhs,
                relative_residual: (lhs - rhs).abs() / rhs.abs().max(1.0),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_rationals_exactly() {
        assert_eq!(q("1/2"), q("0.5"));
        assert_eq!(q("3"), ri(3));
        assert_eq!(q("-0.25"), BigRational::new((-1).into(), 4.into()));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn reference_sheet_for_power_growth() {
        let s = exponents(Theorem::T1_5, 3, 7, &q("3")).unwrap();
        assert_eq!(s.window.to_string(), "(11/5, 7)");
        assert_eq!(s.a, Some(ri(6)));
        assert_eq!(s.b, Some(ri(1)));
        assert_eq!(s.p, Some(q("1/3")));
        assert!(s.identities.iter().all(Identity::holds));
    }

    #[test]
    fn window_boundaries_are_rejected() {
        assert!(exponents(Theorem::T1_5, 3, 7, &q("11/5")).is_err());
        assert!(exponents(Theorem::T1_5, 3, 7, &q("7")).is_err());
        assert!(exponents(Theorem::T1_6, 3, 7, &q("7")).is_ok());
        assert!(exponents(Theorem::T1_11, 3, 6, &q("1")).is_ok());
        assert!(exponents(Theorem::T1_8, 3, 6, &q("5/2")).is_err());
        let err = exponents(Theorem::T1_10, 3, 6, &q("1")).unwrap_err().to_string();
        assert!(err.contains("0 < λ < 1"), "{err}");
        assert!(exponents(Theorem::T1_5, 3, 6, &q("3")).is_err());
    }

    #[test]
    fn case_v_exponents() {
        let s = exponents(Theorem::T1_8, 3, 6, &q("3")).unwrap();
        assert_eq!(s.a, Some(q("2/3")));
        let s = exponents(Theorem::T1_10, 3, 6, &q("1/2")).unwrap();
        assert_eq!(s.a, Some(ri(8)));
    }

    #[test]
    fn exterior_exponents_agree() {
        let s = exponents(Theorem::T1_17, 3, 7, &q("2")).unwrap();
        assert_eq!(s.tau, Some(ri(-11)));
        assert_eq!(s.a, Some(ri(1)));
        assert_eq!(s.b, Some(ri(6)));
        assert!(s.identities.iter().all(Identity::holds));
        let (b1, b2) = exterior_exponent(3, 8, &ri(1));
        assert_eq!((b1.clone(), b2), (ri(6), ri(6)));
        let (b1, _) = exterior_exponent(3, 7, &ri(2));
        assert_eq!(Some(b1), s.b);
    }

    #[test]
    fn phi_presets() {
        let p: PhiPreset = "pow:1".parse().unwrap();
        assert!((p.eval(0.25, true) - 0.25).abs() < 1e-15);
        assert!((p.eval(0.25, false) - 4.0).abs() < 1e-14);
        let l: PhiPreset = "log".parse().unwrap();
        assert!((l.eval((-1f64).exp(), true) - 0.5).abs() < 1e-15);
        assert!(l.eval(1e-10, false) > 20.0);
        assert!("pow:-1".parse::<PhiPreset>().is_err());
        assert!("sqrt".parse::<PhiPreset>().is_err());
        for preset in [PhiPreset::Pow(0.5), PhiPreset::Log, PhiPreset::LogLog, PhiPreset::ExpLog] {
            let (a, b) = (preset.eval(1e-3, true), preset.eval(1e-9, true));
            assert!(a > b && a < 1.0, "{preset}");
            let (a, b) = (preset.eval(1e-3, false), preset.eval(1e-9, false));
            assert!(a < b, "{preset}");
        }
    }
}
