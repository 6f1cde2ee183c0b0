//! Local L-factors in the variable `t = N(x)^{-s}`.
//!
//! For a torus with characters `Y`, fiber `E` and `V = (Y^v)^{I_x}`,
//!
//! ```text
//! L_x(t) = det(1 - t φ | E) · det(1 - (t/q) φ | V) / det(1 - t φ | V)
//! ```
//!
//! Every such factor is a product of `psi_e(t / q^j)^{n}` where `psi_1(y) =
//! 1 - y` and `psi_e = Phi_e` for `e > 1`. [`CycloProduct`] keeps that
//! product with rational exponents so classes with Artin-induction
//! denominators can still be evaluated numerically.
//!
//! The symbolic form prints as `psi_1(t)^(1/2) * psi_2(t/5)^(-1)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::constructible::{component_group, upper_places, BadPlaceData, CTorusData, K0Class};
use crate::error::{validation, Error, Result};
use crate::lattices::{FinAbFrob, GLattice, IntMatrix};
use crate::poly::{psi, psi_factorization, psi_power_split, q_pow, Poly, RationalFunctionT};
use crate::qlinalg::Q;
use crate::real::Real;

/// `det(1 - t A)`.
pub fn det_one_minus(a: &IntMatrix) -> Poly {
    let cp = a.charpoly();
    let n = cp.len() - 1;
    Poly::from_bigints(&(0..=n).map(|j| cp[n - j].clone()).collect::<Vec<_>>())
}

/// `1 / det(1 - (t / q^shift) φ | A ⊗ Q)`; torsion contributes nothing.
pub fn q_factor(a: &FinAbFrob, q: u64, shift: u32) -> RationalFunctionT {
    let p = det_one_minus(&a.free_frobenius()).scale_var(&q_pow(q, -(shift as i64)));
    RationalFunctionT::new(Poly::one(), p, Some(q))
}

/// `prod psi_e(t / q^shift)^{n_{e, shift}}` with rational exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloProduct {
    pub q: u64,
    exps: BTreeMap<(u32, usize), Q>,
}

impl CycloProduct {
    pub fn one(q: u64) -> CycloProduct {
        CycloProduct {
            q,
            exps: BTreeMap::new(),
        }
    }

    /// Exponents keyed by `(shift, e)`.
    pub fn exponents(&self) -> &BTreeMap<(u32, usize), Q> {
        &self.exps
    }

    pub fn push(&mut self, e: usize, shift: u32, n: &Q) {
        let slot = self.exps.entry((shift, e)).or_insert_with(Q::zero);
        *slot += n;
        if slot.is_zero() {
            self.exps.remove(&(shift, e));
        }
    }

    /// Multiplies by `det(1 - (t^k / q^{k shift}) φ)^n` for a finite-order
    /// `φ` of order dividing `order`.
    pub fn push_det(&mut self, phi: &IntMatrix, order: usize, k: usize, shift: u32, n: &Q) -> Result<()> {
        if phi.rows() == 0 {
            return Ok(());
        }
        let p = det_one_minus(phi);
        let fac = psi_factorization(&p, order)
            .ok_or_else(|| validation(format!("Frobenius {phi:?} does not have order dividing {order}")))?;
        for (e, m) in fac {
            let mq = Q::from_integer(m.into()) * n;
            for d in psi_power_split(e, k) {
                self.push(d, shift, &mq);
            }
        }
        Ok(())
    }

    pub fn mul(&self, o: &CycloProduct) -> CycloProduct {
        let mut r = self.clone();
        for ((s, e), n) in &o.exps {
            r.push(*e, *s, n);
        }
        r
    }

    pub fn pow(&self, c: &Q) -> CycloProduct {
        let mut r = CycloProduct::one(self.q);
        for ((s, e), n) in &self.exps {
            r.push(*e, *s, &(n * c));
        }
        r
    }

    pub fn is_integral(&self) -> bool {
        self.exps.values().all(|n| n.is_integer())
    }

    /// The exact rational function, when every exponent is an integer
    /// after cancellation.
    pub fn to_rational(&self) -> Result<RationalFunctionT> {
        if !self.is_integral() {
            return Err(Error::NonPolynomialFactor(self.to_string()));
        }
        let mut num = Poly::one();
        let mut den = Poly::one();
        for ((s, e), n) in &self.exps {
            let f = psi(*e).scale_var(&q_pow(self.q, -(*s as i64)));
            let k = n.to_integer().to_i64().expect("small exponent");
            if k > 0 {
                num = num.mul(&f.pow(k as usize));
            } else {
                den = den.mul(&f.pow((-k) as usize));
            }
        }
        Ok(RationalFunctionT::new(num, den, Some(self.q)))
    }

    /// `log` of the value at `t`, each base assumed positive (true for
    /// `0 < t < 1`).
    pub fn ln_at(&self, t: &Real) -> Real {
        let p = t.precision();
        let mut acc = Real::zero(p);
        for ((s, e), n) in &self.exps {
            let y = t * &Real::from_ratio(&q_pow(self.q, -(*s as i64)), p);
            let v = psi(*e).eval_real(&y);
            acc = &acc + &(&v.ln() * &Real::from_ratio(n, p));
        }
        acc
    }

    pub fn eval_real(&self, t: &Real) -> Real {
        self.ln_at(t).exp()
    }

    /// Total degree bound `sum |n| deg psi_e`, used for tail estimates.
    pub fn degree_weight(&self) -> Q {
        self.exps
            .iter()
            .map(|((_, e), n)| n.abs() * Q::from_integer(psi(*e).degree().unwrap_or(0).into()))
            .sum()
    }
}

impl fmt::Display for CycloProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exps
            .iter()
            .map(|((s, e), n)| {
                let arg = match s {
                    0 => "t".to_string(),
                    1 => format!("t/{}", self.q),
                    k => format!("t/{}^{k}", self.q),
                };
                if n.is_one() {
                    format!("psi_{e}({arg})")
                } else {
                    format!("psi_{e}({arg})^({n})")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// Frobenius restricted to the fixed sublattice `K` (columns), solving
/// `K X = A K` over Z.
pub fn restrict_to(basis: &IntMatrix, a: &IntMatrix) -> Result<IntMatrix> {
    let image = a.mul(basis);
    let s = basis.smith();
    let cols: Vec<_> = (0..image.cols())
        .map(|j| {
            s.solve(&image.col(j))
                .ok_or_else(|| validation("Frobenius does not preserve the inertia invariants"))
        })
        .collect::<Result<_>>()?;
    Ok(IntMatrix::from_cols(&cols, basis.cols()))
}

/// `V = (Y^v)^{I}` with its Frobenius.
pub fn cocharacter_invariants(y: &GLattice, v: &BadPlaceData) -> Result<(IntMatrix, usize)> {
    let yd = y.z_dual();
    let k = yd.invariants(&v.inertia);
    let order = y.group().element_order(v.frobenius);
    Ok((restrict_to(&k, yd.action(v.frobenius))?, order))
}

/// Symbolic local factor of a torus at a place; listed places use their
/// own data, other places the supplied data and the component group.
pub fn torus_local_cyclo(t: &CTorusData, x: &BadPlaceData) -> Result<CycloProduct> {
    let (place, fiber) = match t.place(&x.label) {
        Some(tp) => (tp.place.clone(), tp.fiber.clone()),
        None => {
            if x.inertia
                .members()
                .iter()
                .any(|&h| !t.characters.action(h).is_identity())
            {
                return Err(validation(format!(
                    "place {} is unlisted but inertia acts nontrivially on the characters",
                    x.label
                )));
            }
            let cg = component_group(&t.characters, x)?;
            (x.clone(), cg.free_fiber())
        }
    };
    let mut c = CycloProduct::one(place.q);
    c.push_det(fiber.phi(), fiber.order(), 1, 0, &Q::one())?;
    let (phi_v, order) = cocharacter_invariants(&t.characters, &place)?;
    c.push_det(&phi_v, order, 1, 1, &Q::one())?;
    c.push_det(&phi_v, order, 1, 0, &-Q::one())?;
    Ok(c)
}

pub fn local_factor_torus(t: &CTorusData, x: &BadPlaceData) -> Result<RationalFunctionT> {
    torus_local_cyclo(t, x)?.to_rational()
}

/// Symbolic local factor of a K0 class: `zeta_{K_H}(s+1)^{-1}` factors
/// for field terms and `det(1 - t^k φ | A)` for point terms sitting over
/// `x` with residue size `q^k`.
pub fn k0_local_cyclo(k: &K0Class, x: &BadPlaceData) -> Result<CycloProduct> {
    let mut c = CycloProduct::one(x.q);
    for (h, a) in &k.field_terms {
        for w in upper_places(&k.group, h, x) {
            for d in 1..=w.f {
                if w.f.is_multiple_of(d) {
                    c.push(d, 1, a);
                }
            }
        }
    }
    for p in k.point_terms.iter().filter(|p| p.label == x.label) {
        let kk = residue_degree(x.q, p.q).ok_or_else(|| {
            validation(format!(
                "point at {} has residue size {} not a power of {}",
                p.label, p.q, x.q
            ))
        })?;
        let m = &p.module;
        c.push_det(&m.free_frobenius(), m.order(), kk, 0, &p.coeff)?;
    }
    Ok(c)
}

pub fn k0_local_factor(k: &K0Class, x: &BadPlaceData) -> Result<RationalFunctionT> {
    k0_local_cyclo(k, x)?.to_rational()
}

/// `f` with `q^f = qq`.
pub fn residue_degree(q: u64, qq: u64) -> Option<usize> {
    let mut x = 1u64;
    for f in 0..64 {
        if x == qq {
            return Some(f);
        }
        x = x.checked_mul(q)?;
    }
    None
}

/// Inverse Artin factor `det(1 - (t/q) φ | Y ⊗ Q)` of the characters at
/// an unramified place.
pub fn inverse_artin_factor(y: &GLattice, x: &BadPlaceData) -> RationalFunctionT {
    let p = det_one_minus(y.action(x.frobenius)).scale_var(&q_pow(x.q, -1));
    RationalFunctionT::poly(p, Some(x.q))
}
