//! Multiprecision reals.
//!
//! A thin value type over [`astro_float::BigFloat`] that carries its working
//! precision, so arithmetic reads like ordinary operator code. Binary
//! operations run at the larger of the two operand precisions.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

const RM: RoundingMode = RoundingMode::ToEven;

/// Default significant decimal digits.
pub const DEFAULT_DIGITS: u32 = 50;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Binary precision for `digits` significant decimal digits plus guard bits.
pub fn bits_for_digits(digits: u32) -> usize {
    let raw = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 64;
    raw.div_ceil(64) * 64
}

#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    p: usize,
}

impl Real {
    fn wrap(v: BigFloat, p: usize) -> Real {
        Real { v, p }
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn zero(p: usize) -> Real {
        Real::wrap(BigFloat::from_i64(0, p), p)
    }

    pub fn one(p: usize) -> Real {
        Real::from_i64(1, p)
    }

    pub fn from_i64(n: i64, p: usize) -> Real {
        Real::wrap(BigFloat::from_i64(n, p), p)
    }

    pub fn from_u64(n: u64, p: usize) -> Real {
        Real::wrap(BigFloat::from_u64(n, p), p)
    }

    pub fn from_f64(x: f64, p: usize) -> Real {
        Real::wrap(BigFloat::from_f64(x, p), p)
    }

    pub fn from_bigint(n: &BigInt, p: usize) -> Real {
        if let Some(small) = n.to_i64() {
            return Real::from_i64(small, p);
        }
        Real::parse(&n.to_string(), p).expect("integer literal")
    }

    pub fn from_ratio(r: &BigRational, p: usize) -> Real {
        let num = Real::from_bigint(r.numer(), p);
        let den = Real::from_bigint(r.denom(), p);
        &num / &den
    }

    /// Parses a decimal literal such as `0.4812` or `-3e-5`.
    pub fn parse(s: &str, p: usize) -> Option<Real> {
        let v = with_consts(|cc| BigFloat::parse(s.trim(), Radix::Dec, p, RM, cc));
        if v.is_nan() {
            None
        } else {
            Some(Real::wrap(v, p))
        }
    }

    pub fn pi(p: usize) -> Real {
        Real::wrap(with_consts(|cc| cc.pi(p, RM)), p)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn abs(&self) -> Real {
        Real::wrap(self.v.abs(), self.p)
    }

    pub fn sqrt(&self) -> Real {
        Real::wrap(self.v.sqrt(self.p, RM), self.p)
    }

    pub fn ln(&self) -> Real {
        let p = self.p;
        Real::wrap(with_consts(|cc| self.v.ln(p, RM, cc)), p)
    }

    pub fn exp(&self) -> Real {
        let p = self.p;
        Real::wrap(with_consts(|cc| self.v.exp(p, RM, cc)), p)
    }

    pub fn sin(&self) -> Real {
        let p = self.p;
        Real::wrap(with_consts(|cc| self.v.sin(p, RM, cc)), p)
    }

    pub fn cos(&self) -> Real {
        let p = self.p;
        Real::wrap(with_consts(|cc| self.v.cos(p, RM, cc)), p)
    }

    pub fn recip(&self) -> Real {
        Real::wrap(self.v.reciprocal(self.p, RM), self.p)
    }

    pub fn powi(&self, n: i64) -> Real {
        let base = self.v.powi(n.unsigned_abs() as usize, self.p, RM);
        let out = Real::wrap(base, self.p);
        if n < 0 {
            out.recip()
        } else {
            out
        }
    }

    /// `self^e` for a positive base and rational exponent.
    pub fn pow_ratio(&self, e: &BigRational) -> Real {
        if e.is_integer() {
            if let Some(n) = e.to_integer().to_i64() {
                return self.powi(n);
            }
        }
        let scaled = &self.ln() * &Real::from_ratio(e, self.p);
        scaled.exp()
    }

    pub fn max_prec(&self, other: &Real) -> usize {
        self.p.max(other.p)
    }

    /// Nearest `f64`.
    pub fn to_f64(&self) -> f64 {
        if self.v.is_zero() {
            return 0.0;
        }
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let (words, _, sign, exp, _) = self.v.as_raw_parts().expect("finite value");
        let top = *words.last().unwrap_or(&0);
        let mantissa = top as f64 * 2f64.powi(-64);
        let out = mantissa * 2f64.powi(exp);
        match sign {
            Sign::Neg => -out,
            Sign::Pos => out,
        }
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.v.is_zero() {
            return "0".to_string();
        }
        if !self.is_finite() {
            return format!("{}", self.to_f64());
        }
        let neg = self.is_negative();
        let a = self.abs();
        let ten = Real::from_i64(10, a.p);
        let mut exp10 = a.to_f64().log10().floor() as i64;
        let mut scaled = &a * &ten.powi(digits as i64 - 1 - exp10);
        let ten_pow = ten.powi(digits as i64);
        if scaled.partial_cmp(&ten_pow) != Some(Ordering::Less) {
            exp10 += 1;
            scaled = &a * &ten.powi(digits as i64 - 1 - exp10);
        }
        let rounded = with_consts(|cc| {
            scaled
                .v
                .add(&BigFloat::from_f64(0.5, scaled.p), scaled.p, RM)
                .floor()
                .format(Radix::Dec, RoundingMode::ToZero, cc)
        })
        .unwrap_or_default();
        let int_digits = integer_digits(&rounded);
        let int_digits = if int_digits.len() > digits {
            exp10 += 1;
            int_digits[..digits].to_string()
        } else {
            int_digits
        };
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        if (-5..(digits as i64)).contains(&exp10) {
            if exp10 >= 0 {
                let split = (exp10 + 1) as usize;
                out.push_str(&int_digits[..split]);
                let frac = int_digits[split..].trim_end_matches('0');
                if !frac.is_empty() {
                    out.push('.');
                    out.push_str(frac);
                }
            } else {
                out.push_str("0.");
                for _ in 0..(-exp10 - 1) {
                    out.push('0');
                }
                out.push_str(int_digits.trim_end_matches('0'));
            }
        } else {
            out.push_str(&int_digits[..1]);
            let frac = int_digits[1..].trim_end_matches('0');
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
            out.push_str(&format!("e{exp10}"));
        }
        out
    }

    /// `|self - other| / |other|`.
    pub fn rel_diff(&self, other: &Real) -> Real {
        let d = (self - other).abs();
        if other.is_zero() {
            return d;
        }
        &d / &other.abs()
    }
}

/// Extracts the integer digit string from astro-float's decimal output
/// (forms like `1.2345e+4`).
fn integer_digits(formatted: &str) -> String {
    let s = formatted.trim_start_matches('-');
    let (mant, exp) = match s.split_once('e') {
        Some((m, e)) => (m, e.trim_start_matches('+').parse::<i64>().unwrap_or(0)),
        None => (s, 0),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    let mut digits: String = format!("{ip}{fp}");
    let point = ip.len() as i64 + exp;
    if point <= 0 {
        return "0".to_string();
    }
    let point = point as usize;
    while digits.len() < point {
        digits.push('0');
    }
    let out = digits[..point].trim_start_matches('0');
    if out.is_empty() {
        "0".to_string()
    } else {
        out.to_string()
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_decimal(25))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "{}", self.to_decimal(digits))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.v.cmp(&other.v) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:ident) => {
        impl<'a> $tr<&'a Real> for &'a Real {
            type Output = Real;
            fn $m(self, rhs: &'a Real) -> Real {
                let p = self.max_prec(rhs);
                Real::wrap(self.v.$op(&rhs.v, p, RM), p)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &'a Real) -> Real {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(self.v.clone().neg(), self.p)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

/// Complex numbers over [`Real`], used for Gauss sums.
#[derive(Clone, Debug)]
pub struct ComplexReal {
    pub re: Real,
    pub im: Real,
}

impl ComplexReal {
    pub fn new(re: Real, im: Real) -> Self {
        ComplexReal { re, im }
    }

    pub fn zero(p: usize) -> Self {
        ComplexReal::new(Real::zero(p), Real::zero(p))
    }

    /// `exp(2 pi i * r)` for a rational turn `r`.
    pub fn root_of_unity(r: &BigRational, p: usize) -> Self {
        let theta = &(&Real::pi(p) * &Real::from_i64(2, p)) * &Real::from_ratio(r, p);
        ComplexReal::new(theta.cos(), theta.sin())
    }

    pub fn add(&self, o: &ComplexReal) -> ComplexReal {
        ComplexReal::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn mul(&self, o: &ComplexReal) -> ComplexReal {
        ComplexReal::new(
            &(&self.re * &o.re) - &(&self.im * &o.im),
            &(&self.re * &o.im) + &(&self.im * &o.re),
        )
    }

    pub fn scale(&self, s: &Real) -> ComplexReal {
        ComplexReal::new(&self.re * s, &self.im * s)
    }

    pub fn abs(&self) -> Real {
        (&(&self.re * &self.re) + &(&self.im * &self.im)).sqrt()
    }
}

/// Exact rational to `f64`.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => Real::from_ratio(r, 128).to_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        let p = bits_for_digits(50);
        let pi = Real::pi(p);
        assert_eq!(
            pi.to_decimal(30),
            "3.14159265358979323846264338328"
        );
        assert!((pi.to_f64() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn elementary_functions() {
        let p = bits_for_digits(40);
        let two = Real::from_i64(2, p);
        assert!((two.ln().to_f64() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((two.sqrt().to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        let half = Real::from_ratio(&BigRational::new(1.into(), 2.into()), p);
        assert!((half.to_f64() - 0.5).abs() < 1e-18);
        let r = two.pow_ratio(&BigRational::new(3.into(), 2.into()));
        assert!((r.to_f64() - 2f64.powf(1.5)).abs() < 1e-14);
        assert_eq!(Real::from_i64(-7, p).powi(2).to_f64(), 49.0);
    }

    #[test]
    fn decimal_rendering() {
        let p = bits_for_digits(30);
        assert_eq!(Real::from_i64(1, p).to_decimal(10), "1");
        assert_eq!(Real::from_f64(0.125, p).to_decimal(10), "0.125");
        assert_eq!(Real::from_i64(-250, p).to_decimal(10), "-250");
        let third = &Real::one(p) / &Real::from_i64(3, p);
        assert_eq!(third.to_decimal(5), "0.33333");
        assert_eq!(Real::parse("1e-9", p).unwrap().to_decimal(3), "1e-9");
    }
}
