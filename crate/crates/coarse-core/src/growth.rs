//! Growth functions and their algebra.
//!
//! A growth function here is a nondecreasing map `x -> N` built from a
//! closed-form class (constant, polynomial, exponential) or a finite
//! sample table, optionally precomposed with an affine map `x -> Lx + C`
//! and multiplied pointwise with other growth functions. Evaluation is
//! exact: rational arithmetic with a final ceiling; exponentials at
//! fractional arguments take exact integer roots. Class-level decisions
//! (growth equivalence, subexponentiality) are exact for closed forms
//! and explicitly heuristic for tabulated data — a tabulated input never
//! yields a bare boolean.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Closed-form or tabulated growth class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrowthClass {
    /// `x -> max(c, 1)` for a positive rational `c`.
    Constant(Rational),
    /// `x -> ceil(coeff * x^degree)`, `degree >= 1`, `coeff > 0`.
    Polynomial { degree: u32, coeff: Rational },
    /// `x -> ceil(base^x)`, `base > 1`.
    Exponential { base: Rational },
    /// Nondecreasing samples `(x, y)`; evaluation is the step function
    /// through the samples, clamped at both ends.
    Tabulated(Vec<(u64, u64)>),
}

#[derive(Debug, Clone)]
enum Expr {
    Atom { class: GrowthClass, l: Rational, c: Rational },
    Product(Box<Expr>, Box<Expr>),
}

/// Growth class up to the equivalence `s ~ t` (mutual affine-scale
/// domination up to an additive constant): constants collapse, a
/// polynomial keeps only its degree, exponentials with any base `> 1`
/// collapse, and tabulated data stays undecidable-exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalizedClass {
    Constant,
    Polynomial { degree: u32 },
    Exponential,
    Tabulated,
}

/// Outcome of a class decision. Closed-form inputs give `Exact`;
/// anything involving tabulated data gives `Heuristic`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Exact(bool),
    Heuristic(bool),
}

impl Decision {
    pub fn value(self) -> bool {
        match self {
            Decision::Exact(b) | Decision::Heuristic(b) => b,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Decision::Exact(_))
    }
}

/// A nondecreasing function `R+ -> N` with class metadata.
#[derive(Debug, Clone)]
pub struct GrowthFunction {
    expr: Expr,
}

impl GrowthFunction {
    pub fn constant(c: u64) -> Self {
        Self::constant_rational(Rational::from_integer(c as i64))
    }

    pub fn constant_rational(c: Rational) -> Self {
        Self { expr: Expr::Atom { class: GrowthClass::Constant(c), l: Rational::one(), c: Rational::zero() } }
    }

    /// `ceil(coeff * x^degree)`; a degree-0 request normalizes to a constant.
    pub fn polynomial(degree: u32, coeff: Rational) -> Result<Self> {
        if coeff <= Rational::zero() {
            return Err(Error::domain("polynomial growth needs a positive coefficient"));
        }
        let class = if degree == 0 {
            GrowthClass::Constant(coeff)
        } else {
            GrowthClass::Polynomial { degree, coeff }
        };
        Ok(Self { expr: Expr::Atom { class, l: Rational::one(), c: Rational::zero() } })
    }

    pub fn exponential(base: Rational) -> Result<Self> {
        if base <= Rational::one() {
            return Err(Error::domain("exponential growth needs base > 1"));
        }
        Ok(Self {
            expr: Expr::Atom {
                class: GrowthClass::Exponential { base },
                l: Rational::one(),
                c: Rational::zero(),
            },
        })
    }

    /// Samples must be strictly increasing in `x` and nondecreasing in `y`.
    pub fn tabulated(samples: Vec<(u64, u64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("tabulated growth needs at least one sample"));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::domain("tabulated sample xs must strictly increase"));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::domain("tabulated growth must be nondecreasing"));
            }
        }
        Ok(Self {
            expr: Expr::Atom {
                class: GrowthClass::Tabulated(samples),
                l: Rational::one(),
                c: Rational::zero(),
            },
        })
    }

    /// `x -> self(L x + C)`. Preserves the normalized class: constants
    /// stay constants, degree-`d` polynomials stay degree `d`, and
    /// exponentials stay exponential (base `b^L`).
    pub fn compose_affine(&self, l: Rational, c: Rational) -> Result<Self> {
        if l <= Rational::zero() {
            return Err(Error::domain("affine composition needs L > 0"));
        }
        if c < Rational::zero() {
            return Err(Error::domain("affine composition needs C >= 0"));
        }
        Ok(Self { expr: compose_expr(&self.expr, l, c) })
    }

    /// Pointwise product, evaluated exactly; the class metadata is the
    /// closure of the factor classes.
    pub fn product(&self, other: &Self) -> Self {
        Self { expr: Expr::Product(Box::new(self.expr.clone()), Box::new(other.expr.clone())) }
    }

    /// Exact evaluation with a final ceiling, saturating at `u64::MAX`.
    pub fn eval(&self, x: u64) -> u64 {
        eval_expr(&self.expr, x)
    }

    pub fn normalized_class(&self) -> NormalizedClass {
        class_of(&self.expr)
    }

    /// `lim x-th root of s(x) = 1`? Exact for closed forms: true for
    /// constant and polynomial classes, false for exponential.
    pub fn is_subexponential(&self) -> Decision {
        match self.normalized_class() {
            NormalizedClass::Constant | NormalizedClass::Polynomial { .. } => Decision::Exact(true),
            NormalizedClass::Exponential => Decision::Exact(false),
            NormalizedClass::Tabulated => Decision::Heuristic(self.subexponential_heuristic()),
        }
    }

    fn subexponential_heuristic(&self) -> bool {
        // Trend of x-th roots over the sampled range: if they keep
        // decreasing toward 1, call it subexponential. Finite samples
        // cannot decide this; callers see the Heuristic marker.
        let xs: Vec<u64> = sample_points(&self.expr);
        let mut roots: Vec<f64> = Vec::new();
        for &x in &xs {
            if x == 0 {
                continue;
            }
            let y = self.eval(x).max(1) as f64;
            roots.push(libm::pow(y, 1.0 / x as f64));
        }
        if roots.len() < 2 {
            return true;
        }
        let last = roots[roots.len() - 1];
        let first = roots[0];
        last <= 1.05 || last < first * 0.98
    }

    /// One-line description in the `const:c | poly:d | exp:b | table:k`
    /// grammar used by configs and reports.
    pub fn describe(&self) -> String {
        describe_expr(&self.expr)
    }
}

impl core::fmt::Display for GrowthFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl core::str::FromStr for GrowthFunction {
    type Err = Error;

    /// Parse `const:c`, `poly:d`, `poly:d:coeff`, `exp:b` where numbers
    /// may be integers or `p/q` rationals.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("unrecognized growth function `{s}`"));
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        match kind {
            "const" => {
                let c = parse_rational(parts.next().ok_or_else(bad)?)?;
                if c <= Rational::zero() {
                    return Err(Error::domain("constant growth must be positive"));
                }
                Ok(Self::constant_rational(c))
            }
            "poly" => {
                let d: u32 =
                    parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                let coeff = match parts.next() {
                    Some(c) => parse_rational(c)?,
                    None => Rational::one(),
                };
                Self::polynomial(d, coeff)
            }
            "exp" => {
                let b = parse_rational(parts.next().ok_or_else(bad)?)?;
                Self::exponential(b)
            }
            _ => Err(bad()),
        }
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let err = || Error::domain(format!("cannot parse rational `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.parse().map_err(|_| err())?;
            let q: i64 = q.parse().map_err(|_| err())?;
            if q == 0 {
                return Err(err());
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: i64 = s.parse().map_err(|_| err())?;
            Ok(Rational::from_integer(p))
        }
    }
}

fn compose_expr(e: &Expr, l: Rational, c: Rational) -> Expr {
    match e {
        Expr::Atom { class, l: l0, c: c0 } => Expr::Atom {
            class: class.clone(),
            // (l0 x + c0) after x -> l x + c gives l0 l x + (l0 c + c0).
            l: *l0 * l,
            c: *l0 * c + *c0,
        },
        Expr::Product(a, b) => {
            Expr::Product(Box::new(compose_expr(a, l, c)), Box::new(compose_expr(b, l, c)))
        }
    }
}

fn eval_expr(e: &Expr, x: u64) -> u64 {
    match e {
        Expr::Atom { class, l, c } => {
            let arg = big_rational(*l) * BigRational::from_integer(BigInt::from(x))
                + big_rational(*c);
            eval_class(class, &arg)
        }
        Expr::Product(a, b) => eval_expr(a, x).saturating_mul(eval_expr(b, x)),
    }
}

fn big_rational(r: Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn ceil_to_u64(r: &BigRational) -> u64 {
    if r.is_negative() || r.is_zero() {
        return 0;
    }
    let c = r.ceil();
    c.to_integer().to_u64().unwrap_or(u64::MAX)
}

fn eval_class(class: &GrowthClass, arg: &BigRational) -> u64 {
    match class {
        GrowthClass::Constant(c) => ceil_to_u64(&big_rational(*c)).max(1),
        GrowthClass::Polynomial { degree, coeff } => {
            let arg = if arg.is_negative() { BigRational::zero() } else { arg.clone() };
            let v = big_rational(*coeff) * pow_rational(&arg, *degree as i64);
            ceil_to_u64(&v)
        }
        GrowthClass::Exponential { base } => exp_ceil(&big_rational(*base), arg),
        GrowthClass::Tabulated(samples) => {
            let x = arg.floor().to_integer().to_u64().unwrap_or(0);
            let mut y = samples[0].1;
            for &(sx, sy) in samples {
                if sx <= x {
                    y = sy;
                } else {
                    break;
                }
            }
            y
        }
    }
}

fn pow_rational(r: &BigRational, k: i64) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k.unsigned_abs() {
        acc *= r;
    }
    if k < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Exact `ceil(base^(p/q))` for rational `base > 1`: the smallest
/// integer `m >= 0` with `m^q >= base^p`, found by binary search over
/// `BigInt` powers. Saturates at `u64::MAX`.
fn exp_ceil(base: &BigRational, exponent: &BigRational) -> u64 {
    if exponent.is_negative() || exponent.is_zero() {
        // base > 1, so base^y <= 1 here and the ceiling is 1.
        return 1;
    }
    let p = exponent.numer().to_i64().unwrap_or(i64::MAX);
    let q = exponent.denom().to_u64().unwrap_or(1).max(1);
    // Quick saturation guard before computing huge powers.
    let approx_bits =
        (libm::log2(base.numer().to_f64().unwrap_or(f64::MAX) / base.denom().to_f64().unwrap_or(1.0)))
            * p as f64
            / q as f64;
    if approx_bits > 80.0 {
        return u64::MAX;
    }
    let target = pow_rational(base, p);
    // Smallest m with m^q >= target.
    let (mut lo, mut hi) = (0u64, 2u64);
    while rational_pow_lt(hi, q, &target) {
        lo = hi;
        match hi.checked_mul(2) {
            Some(v) => hi = v,
            None => return u64::MAX,
        }
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if rational_pow_lt(mid, q, &target) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `m^q < target`?
fn rational_pow_lt(m: u64, q: u64, target: &BigRational) -> bool {
    let mq = BigInt::from(m).pow(q as u32);
    BigRational::from_integer(mq) < *target
}

fn class_of(e: &Expr) -> NormalizedClass {
    match e {
        Expr::Atom { class, .. } => match class {
            GrowthClass::Constant(_) => NormalizedClass::Constant,
            GrowthClass::Polynomial { degree, .. } => NormalizedClass::Polynomial { degree: *degree },
            GrowthClass::Exponential { .. } => NormalizedClass::Exponential,
            GrowthClass::Tabulated(_) => NormalizedClass::Tabulated,
        },
        Expr::Product(a, b) => combine_classes(class_of(a), class_of(b)),
    }
}

/// Closure of classes under pointwise product. An exponential factor
/// absorbs polynomial and constant factors (`x^d b^x ~ b^x`); tabulated
/// data taints the product.
fn combine_classes(a: NormalizedClass, b: NormalizedClass) -> NormalizedClass {
    use NormalizedClass::*;
    match (a, b) {
        (Tabulated, _) | (_, Tabulated) => Tabulated,
        (Exponential, _) | (_, Exponential) => Exponential,
        (Polynomial { degree: p }, Polynomial { degree: q }) => Polynomial { degree: p + q },
        (Polynomial { degree }, Constant) | (Constant, Polynomial { degree }) => {
            Polynomial { degree }
        }
        (Constant, Constant) => Constant,
    }
}

fn describe_expr(e: &Expr) -> String {
    match e {
        Expr::Atom { class, l, c } => {
            let base = match class {
                GrowthClass::Constant(v) => format!("const:{v}"),
                GrowthClass::Polynomial { degree, coeff } => {
                    if coeff.is_one() {
                        format!("poly:{degree}")
                    } else {
                        format!("poly:{degree}:{coeff}")
                    }
                }
                GrowthClass::Exponential { base } => format!("exp:{base}"),
                GrowthClass::Tabulated(s) => format!("table:{}", s.len()),
            };
            if l.is_one() && c.is_zero() {
                base
            } else {
                format!("{base}@({l}x+{c})")
            }
        }
        Expr::Product(a, b) => format!("{}*{}", describe_expr(a), describe_expr(b)),
    }
}

fn sample_points(e: &Expr) -> Vec<u64> {
    match e {
        Expr::Atom { class: GrowthClass::Tabulated(s), .. } => s.iter().map(|&(x, _)| x).collect(),
        Expr::Atom { .. } => (1..=16).map(|k| k * 8).collect(),
        Expr::Product(a, b) => {
            let mut xs = sample_points(a);
            xs.extend(sample_points(b));
            xs.sort_unstable();
            xs.dedup();
            xs
        }
    }
}

/// Growth equivalence `s ~ t`: mutual domination `s(ax) >= t(x) - c`.
/// Class rules decide closed forms exactly; tabulated comparisons are
/// heuristic and labeled as such.
pub fn growth_equivalent(s: &GrowthFunction, t: &GrowthFunction) -> Decision {
    use NormalizedClass::*;
    match (s.normalized_class(), t.normalized_class()) {
        (Tabulated, _) | (_, Tabulated) => Decision::Heuristic(tabulated_equivalent(s, t)),
        (Constant, Constant) => Decision::Exact(true),
        (Polynomial { degree: p }, Polynomial { degree: q }) => Decision::Exact(p == q),
        (Exponential, Exponential) => Decision::Exact(true),
        _ => Decision::Exact(false),
    }
}

fn tabulated_equivalent(s: &GrowthFunction, t: &GrowthFunction) -> bool {
    // Check s(ax) >= t(x) - c and t(ax) >= s(x) - c for small integer
    // scales and a generous additive constant over the sampled range.
    let mut xs = sample_points(&s.expr);
    xs.extend(sample_points(&t.expr));
    xs.sort_unstable();
    xs.dedup();
    let dominated = |f: &GrowthFunction, g: &GrowthFunction| -> bool {
        (1u64..=8).any(|a| {
            let worst = xs
                .iter()
                .map(|&x| g.eval(x).saturating_sub(f.eval(a.saturating_mul(x))))
                .max()
                .unwrap_or(0);
            let scale = xs.iter().map(|&x| g.eval(x)).max().unwrap_or(1).max(1);
            worst.saturating_mul(4) <= scale
        })
    };
    dominated(s, t) && dominated(t, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn eval_exact() {
        let p = GrowthFunction::polynomial(2, Rational::one()).unwrap();
        assert_eq!(p.eval(5), 25);
        let e = GrowthFunction::exponential(Rational::from_integer(2)).unwrap();
        assert_eq!(e.eval(10), 1024);
        let half = GrowthFunction::exponential(Rational::new(3, 2)).unwrap();
        // ceil((3/2)^3) = ceil(3.375) = 4
        assert_eq!(half.eval(3), 4);
        let c = GrowthFunction::constant(7);
        assert_eq!(c.eval(123), 7);
    }

    #[test]
    fn exp_ceil_fractional_exponent() {
        // 2^(3/2) = 2.828..., ceiling 3: via compose_affine with L = 1/2.
        let e = GrowthFunction::exponential(Rational::from_integer(2)).unwrap();
        let half = e.compose_affine(Rational::new(1, 2), Rational::zero()).unwrap();
        assert_eq!(half.eval(3), 3);
        assert_eq!(half.eval(4), 4);
    }

    #[test]
    fn equivalence_rules() {
        let c2 = GrowthFunction::constant(2);
        let c7 = GrowthFunction::constant(7);
        assert_eq!(growth_equivalent(&c2, &c7), Decision::Exact(true));

        let x2 = GrowthFunction::polynomial(2, Rational::one()).unwrap();
        let x3 = GrowthFunction::polynomial(3, Rational::one()).unwrap();
        assert_eq!(growth_equivalent(&x2, &x3), Decision::Exact(false));
        assert_eq!(growth_equivalent(&x2, &x2), Decision::Exact(true));

        let e2 = GrowthFunction::exponential(Rational::from_integer(2)).unwrap();
        let e3 = GrowthFunction::exponential(Rational::from_integer(3)).unwrap();
        assert_eq!(growth_equivalent(&e2, &e3), Decision::Exact(true));
        assert_eq!(growth_equivalent(&x2, &e2), Decision::Exact(false));
        assert_eq!(growth_equivalent(&c2, &x2), Decision::Exact(false));
    }

    #[test]
    fn compose_affine_preserves_class() {
        let x2 = GrowthFunction::polynomial(2, Rational::one()).unwrap();
        let t = x2.compose_affine(Rational::from_integer(2), Rational::from_integer(3)).unwrap();
        // (2x+3)^2 at x = 5: 169.
        assert_eq!(t.eval(5), 169);
        assert_eq!(t.normalized_class(), NormalizedClass::Polynomial { degree: 2 });
        assert_eq!(growth_equivalent(&x2, &t), Decision::Exact(true));

        let e = GrowthFunction::exponential(Rational::from_integer(2)).unwrap();
        let te = e.compose_affine(Rational::from_integer(3), Rational::zero()).unwrap();
        assert_eq!(te.normalized_class(), NormalizedClass::Exponential);
        assert_eq!(te.eval(2), 64); // 2^(3*2)

        let c = GrowthFunction::constant(4);
        let tc = c.compose_affine(Rational::from_integer(9), Rational::from_integer(1)).unwrap();
        assert_eq!(tc.normalized_class(), NormalizedClass::Constant);
        assert_eq!(tc.eval(1000), 4);
    }

    #[test]
    fn products_collapse_classes() {
        let x2 = GrowthFunction::polynomial(2, Rational::one()).unwrap();
        let x3 = GrowthFunction::polynomial(3, Rational::one()).unwrap();
        let p = x2.product(&x3);
        assert_eq!(p.normalized_class(), NormalizedClass::Polynomial { degree: 5 });
        assert_eq!(p.eval(2), 4 * 8);

        let e = GrowthFunction::exponential(Rational::from_integer(2)).unwrap();
        let mixed = x2.product(&e);
        assert_eq!(mixed.normalized_class(), NormalizedClass::Exponential);
        assert_eq!(mixed.eval(3), 9 * 8);
        assert_eq!(mixed.is_subexponential(), Decision::Exact(false));

        let c = GrowthFunction::constant(2).product(&GrowthFunction::constant(2));
        assert_eq!(c.eval(1), 4);
        assert_eq!(c.normalized_class(), NormalizedClass::Constant);
    }

    #[test]
    fn subexponential_decisions() {
        assert_eq!(GrowthFunction::constant(5).is_subexponential(), Decision::Exact(true));
        let x4 = GrowthFunction::polynomial(4, Rational::one()).unwrap();
        assert_eq!(x4.is_subexponential(), Decision::Exact(true));
        let e = GrowthFunction::exponential(Rational::new(3, 2)).unwrap();
        assert_eq!(e.is_subexponential(), Decision::Exact(false));
        let tab = GrowthFunction::tabulated(vec![(1, 2), (2, 3), (10, 5)]).unwrap();
        assert!(!tab.is_subexponential().is_exact());
    }

    #[test]
    fn parse_and_display() {
        let g: GrowthFunction = "poly:2".parse().unwrap();
        assert_eq!(g.eval(3), 9);
        let g: GrowthFunction = "const:3".parse().unwrap();
        assert_eq!(g.eval(50), 3);
        let g: GrowthFunction = "exp:3/2".parse().unwrap();
        assert_eq!(g.eval(2), 3); // ceil(2.25)
        assert!("poly".parse::<GrowthFunction>().is_err());
        assert!("exp:1".parse::<GrowthFunction>().is_err());
        assert_eq!(GrowthFunction::constant(2).describe(), "const:2");
    }
}
