//! Polynomials, rational functions and truncated power series in one
//! variable `t` with exact rational coefficients.
//!
//! Canonical text form lists terms by increasing degree:
//! `1 - 1/5*t + 2*t^2`. A rational function with a nontrivial denominator
//! prints as `(num)/(den)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::qlinalg::{self, Q};
use crate::real::Real;

/// Polynomial with coefficients `c[0] + c[1] t + ...`, trailing zeros
/// trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    c: Vec<Q>,
}

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Poly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_ints(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| qlinalg::q(x)).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Poly {
        Poly::new(c.iter().cloned().map(Q::from_integer).collect())
    }

    pub fn zero() -> Poly {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Q::one())
    }

    pub fn constant(x: Q) -> Poly {
        Poly::new(vec![x])
    }

    /// `1 - c t^k`.
    pub fn one_minus(c: Q, k: usize) -> Poly {
        let mut v = vec![Q::zero(); k + 1];
        v[0] = Q::one();
        v[k] -= c;
        Poly::new(v)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.c.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn leading(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut r = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        Poly::new(r)
    }

    pub fn scale(&self, x: &Q) -> Poly {
        Poly::new(self.c.iter().map(|a| a * x).collect())
    }

    pub fn pow(&self, k: usize) -> Poly {
        (0..k).fold(Poly::one(), |acc, _| acc.mul(self))
    }

    /// `p(c t)`.
    pub fn scale_var(&self, c: &Q) -> Poly {
        let mut f = Q::one();
        let mut r = Vec::with_capacity(self.c.len());
        for a in &self.c {
            r.push(a * &f);
            f *= c;
        }
        Poly::new(r)
    }

    /// `p(t^k)`.
    pub fn substitute_power(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut r = vec![Q::zero(); (self.c.len() - 1) * k + 1];
        for (i, a) in self.c.iter().enumerate() {
            r[i * k] = a.clone();
        }
        Poly::new(r)
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree().expect("nonzero");
        let lead = d.leading();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut qv = vec![Q::zero(); r.len() - dd];
        for i in (0..qv.len()).rev() {
            let coef = &r[i + dd] / &lead;
            if !coef.is_zero() {
                for (j, b) in d.c.iter().enumerate() {
                    r[i + j] -= &coef * b;
                }
            }
            qv[i] = coef;
        }
        r.truncate(dd);
        (Poly::new(qv), Poly::new(r))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.leading();
        a.scale(&l.recip())
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.c.iter().rev().fold(Q::zero(), |acc, a| acc * x + a)
    }

    pub fn eval_real(&self, x: &Real) -> Real {
        let p = x.precision();
        self.c
            .iter()
            .rev()
            .fold(Real::zero(p), |acc, a| &(&acc * x) + &Real::from_ratio(a, p))
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * Q::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Exact multiplicity of the root `t = 1` and the cofactor.
    pub fn split_root_one(&self) -> (usize, Poly) {
        let lin = Poly::from_ints(&[1, -1]);
        let mut p = self.clone();
        let mut k = 0;
        while !p.is_zero() && p.eval(&Q::one()).is_zero() {
            p = p.div_rem(&lin).0;
            k += 1;
        }
        (k, p)
    }
}

fn fmt_coeff_term(out: &mut String, c: &Q, deg: usize, first: bool) {
    let neg = c.is_negative();
    let a = c.abs();
    if first {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    let var = match deg {
        0 => String::new(),
        1 => "t".to_string(),
        d => format!("t^{d}"),
    };
    if deg == 0 {
        out.push_str(&a.to_string());
    } else if a.is_one() {
        out.push_str(&var);
    } else {
        out.push_str(&format!("{a}*{var}"));
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut s = String::new();
        let mut first = true;
        for (i, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            fmt_coeff_term(&mut s, c, i, first);
            first = false;
        }
        write!(f, "{s}")
    }
}

/// Quotient of polynomials in `t`, in lowest terms with denominator
/// constant term `1` (or, if the denominator vanishes at `0`, monic
/// denominator). The residue size `q` records the meaning of `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunctionT {
    num: Poly,
    den: Poly,
    pub q: Option<u64>,
}

impl RationalFunctionT {
    pub fn new(num: Poly, den: Poly, q: Option<u64>) -> RationalFunctionT {
        assert!(!den.is_zero(), "zero denominator");
        let g = num.gcd(&den);
        let (mut n, mut d) = if g.is_zero() || g.degree() == Some(0) {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        if n.is_zero() {
            d = Poly::one();
        }
        let c0 = d.coeff(0);
        let norm = if c0.is_zero() { d.leading() } else { c0 };
        let inv = norm.recip();
        n = n.scale(&inv);
        d = d.scale(&inv);
        RationalFunctionT { num: n, den: d, q }
    }

    pub fn poly(p: Poly, q: Option<u64>) -> RationalFunctionT {
        RationalFunctionT::new(p, Poly::one(), q)
    }

    pub fn one(q: Option<u64>) -> RationalFunctionT {
        RationalFunctionT::poly(Poly::one(), q)
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn mul(&self, o: &RationalFunctionT) -> RationalFunctionT {
        RationalFunctionT::new(self.num.mul(&o.num), self.den.mul(&o.den), self.q.or(o.q))
    }

    pub fn inv(&self) -> RationalFunctionT {
        RationalFunctionT::new(self.den.clone(), self.num.clone(), self.q)
    }

    pub fn div(&self, o: &RationalFunctionT) -> RationalFunctionT {
        self.mul(&o.inv())
    }

    pub fn pow_i(&self, k: i64) -> RationalFunctionT {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let k = k.unsigned_abs() as usize;
        RationalFunctionT::new(base.num.pow(k), base.den.pow(k), self.q)
    }

    pub fn eval_real(&self, t: &Real) -> Real {
        &self.num.eval_real(t) / &self.den.eval_real(t)
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.num.eval(t) / self.den.eval(t)
    }

    /// Power series expansion to `n` terms; requires `den(0) != 0`.
    pub fn series(&self, n: usize) -> Series {
        Series::from_poly(&self.num, n).mul(&Series::from_poly(&self.den, n).inverse())
    }
}

impl fmt::Display for RationalFunctionT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Truncated power series `c[0] + ... + c[n-1] t^{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    c: Vec<Q>,
}

impl Series {
    pub fn from_coeffs(c: Vec<Q>) -> Series {
        Series { c }
    }

    pub fn from_poly(p: &Poly, n: usize) -> Series {
        Series {
            c: (0..n).map(|i| p.coeff(i)).collect(),
        }
    }

    pub fn one(n: usize) -> Series {
        Series::from_poly(&Poly::one(), n)
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.c.len().min(o.c.len());
        let mut r = vec![Q::zero(); n];
        for i in 0..n {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                r[i + j] += &self.c[i] * &o.c[j];
            }
        }
        Series { c: r }
    }

    pub fn inverse(&self) -> Series {
        let n = self.c.len();
        assert!(!self.c[0].is_zero(), "series with zero constant term");
        let inv0 = self.c[0].recip();
        let mut r = vec![Q::zero(); n];
        r[0] = inv0.clone();
        for k in 1..n {
            let s: Q = (1..=k).map(|j| &self.c[j] * &r[k - j]).sum();
            r[k] = -s * &inv0;
        }
        Series { c: r }
    }

    /// `self^e` for rational `e`, by the recurrence
    /// `n a_0 b_n = sum_{k=1}^n ((e+1)k - n) a_k b_{n-k}`; needs `a_0 = 1`
    /// unless `e` is an integer.
    pub fn pow(&self, e: &Q) -> Series {
        let n = self.c.len();
        if e.is_integer() && e.is_negative() {
            return self.inverse().pow(&-e);
        }
        let a0 = &self.c[0];
        assert!(a0.is_one() || e.is_integer(), "rational power needs constant term 1");
        if a0.is_zero() {
            let k: usize = e.to_integer().try_into().expect("small exponent");
            let mut acc = Series::one(n);
            for _ in 0..k {
                acc = acc.mul(self);
            }
            return acc;
        }
        let mut b = vec![Q::zero(); n];
        b[0] = if a0.is_one() {
            Q::one()
        } else {
            let k: u32 = e.to_integer().try_into().expect("small exponent");
            num_traits::pow::Pow::pow(a0.clone(), k)
        };
        let e1 = e + Q::one();
        for m in 1..n {
            let mut s = Q::zero();
            for k in 1..=m {
                let w = &e1 * Q::from_integer(BigInt::from(k)) - Q::from_integer(BigInt::from(m));
                s += w * &self.c[k] * &b[m - k];
            }
            b[m] = s / (Q::from_integer(BigInt::from(m)) * a0);
        }
        Series { c: b }
    }

    /// Exact rational reconstruction: the smallest `(m, n)` by `m + n`
    /// such that `P/Q` with `deg P <= m`, `deg Q <= n`, `Q(0) = 1`
    /// reproduces every coefficient, leaving at least one coefficient as a
    /// check.
    pub fn rational_reconstruct(&self, q: Option<u64>) -> Option<RationalFunctionT> {
        let big_n = self.c.len();
        for total in 0..big_n.saturating_sub(1) {
            for n in 0..=total {
                let m = total - n;
                if let Some(r) = self.pade(m, n, q) {
                    if r.series(big_n) == *self {
                        return Some(r);
                    }
                }
            }
        }
        None
    }

    fn pade(&self, m: usize, n: usize, q: Option<u64>) -> Option<RationalFunctionT> {
        let c = |i: isize| -> Q {
            if i < 0 {
                Q::zero()
            } else {
                self.c.get(i as usize).cloned().unwrap_or_else(Q::zero)
            }
        };
        // Unknowns q_1..q_n: sum_{j=0}^n q_j c_{k-j} = 0 for k = m+1..m+n.
        let rows: Vec<Vec<Q>> = (m + 1..=m + n)
            .map(|k| (1..=n).map(|j| c(k as isize - j as isize)).collect())
            .collect();
        let rhs: Vec<Q> = (m + 1..=m + n).map(|k| -c(k as isize)).collect();
        let qs = if n == 0 {
            Vec::new()
        } else {
            qlinalg::solve(&rows, &rhs)?.particular
        };
        let mut den = vec![Q::one()];
        den.extend(qs);
        let den = Poly::new(den);
        let num = Poly::new(
            (0..=m)
                .map(|k| (0..=n.min(k)).map(|j| den.coeff(j) * c((k - j) as isize)).sum())
                .collect(),
        );
        Some(RationalFunctionT::new(num, den, q))
    }
}

/// `psi_e(y)`: `1 - y` for `e = 1`, the cyclotomic polynomial `Phi_e`
/// otherwise. For a finite-order matrix, `det(1 - y phi)` is a product of
/// these.
pub fn psi(e: usize) -> Poly {
    if e == 1 {
        return Poly::from_ints(&[1, -1]);
    }
    // Phi_e = (t^e - 1) / prod_{d | e, d < e} Phi_d.
    let mut p = Poly::one_minus(Q::one(), e).scale(&-Q::one());
    for d in 1..e {
        if e.is_multiple_of(d) {
            let phi_d = if d == 1 { Poly::from_ints(&[-1, 1]) } else { psi(d) };
            p = p.div_rem(&phi_d).0;
        }
    }
    p
}

/// Multiplicities `m_e` with `p = prod psi_e^{m_e}`, for `e` dividing
/// `order`; `None` when `p` is not such a product.
pub fn psi_factorization(p: &Poly, order: usize) -> Option<Vec<(usize, usize)>> {
    let mut rest = p.clone();
    let mut out = Vec::new();
    for e in 1..=order {
        if !order.is_multiple_of(e) {
            continue;
        }
        let f = psi(e);
        let mut k = 0;
        loop {
            let (qq, r) = rest.div_rem(&f);
            if !r.is_zero() {
                break;
            }
            rest = qq;
            k += 1;
        }
        if k > 0 {
            out.push((e, k));
        }
    }
    rest.is_one().then_some(out)
}

/// `psi_e(y^k) = prod psi_d(y)` over `d | k e` with `d / gcd(d, k) = e`.
pub fn psi_power_split(e: usize, k: usize) -> Vec<usize> {
    (1..=k * e)
        .filter(|d| (k * e).is_multiple_of(*d) && d / d.gcd(&k) == e)
        .collect()
}

/// `q^k` as a rational.
pub fn q_pow(q: u64, k: i64) -> Q {
    let b = Q::from_integer(BigInt::from(q));
    if k >= 0 {
        num_traits::pow::Pow::pow(b, k as u32)
    } else {
        num_traits::pow::Pow::pow(b.recip(), (-k) as u32)
    }
}
