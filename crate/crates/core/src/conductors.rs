//! Artin and base-change conductors, and the graded-line value of the
//! additive determinant on K0 classes.
//!
//! `a_v(V) = sum_{i >= 0} |G_i| / |G_0| · dim(V / V^{G_i})` over the lower
//! ramification filtration, and `c_v(T) = a_v(X_*(T) ⊗ Q) / 2`.

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith_data::{lookup, FieldRecord};
use crate::constructible::{BadPlaceData, Base, CTorusData, FieldLabel, K0Class};
use crate::error::{validation, Error, Result};
use crate::groups::{FiniteGroup, Subgroup};
use crate::lattices::GLattice;
use crate::qlinalg::Q;
use crate::real::Real;

/// `dim V / V^S`.
fn codim_invariants(v: &GLattice, s: &Subgroup) -> usize {
    v.rank() - v.invariants(s).cols()
}

/// Artin conductor exponent of `V ⊗ Q` at a place.
pub fn artin_conductor(v: &GLattice, place: &BadPlaceData) -> Result<Q> {
    if place.inertia.members().iter().all(|&h| v.action(h).is_identity()) {
        return Ok(Q::zero());
    }
    if place.filtration.is_empty() {
        if place.is_wild() {
            return Err(Error::FiltrationRequired(place.label.clone()));
        }
        return Ok(Q::from_integer(codim_invariants(v, &place.inertia).into()));
    }
    let g0 = place.filtration[0].order();
    Ok(place
        .filtration
        .iter()
        .map(|gi| Q::new(gi.order().into(), g0.into()) * Q::from_integer(codim_invariants(v, gi).into()))
        .sum())
}

/// Per-place base-change conductors and `sum c_v log q_v`.
#[derive(Clone, Debug)]
pub struct BaseChangeConductor {
    pub per_place: Vec<(String, Q)>,
    pub total: Real,
}

/// `c_v = a_v(Y^v) / 2` at each listed place.
pub fn base_change_conductor(y: &GLattice, places: &[BadPlaceData], p: usize) -> Result<BaseChangeConductor> {
    let yd = y.z_dual();
    let mut per_place = Vec::new();
    let mut total = Real::zero(p);
    for v in places {
        let c = artin_conductor(&yd, v)? / Q::from_integer(2.into());
        total = &total + &(&Real::from_ratio(&c, p) * &Real::from_u64(v.q, p).ln());
        per_place.push((v.label.clone(), c));
    }
    Ok(BaseChangeConductor { per_place, total })
}

pub fn torus_base_change_conductor(t: &CTorusData, p: usize) -> Result<BaseChangeConductor> {
    let places: Vec<BadPlaceData> = t.bad.iter().map(|tp| tp.place.clone()).collect();
    base_change_conductor(&t.characters, &places, p)
}

/// `r · sqrt(m)` with `r > 0` rational and `m` squarefree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurdTag {
    pub rational: Q,
    pub radicand: u64,
}

impl SurdTag {
    /// `sqrt(x)` for a positive rational `x`.
    pub fn sqrt_of(x: &Q) -> SurdTag {
        let n = (x.numer() * x.denom()).to_u64().expect("small radicand");
        let (s, m) = square_part(n);
        SurdTag {
            rational: Q::new(s.into(), x.denom().clone()),
            radicand: m,
        }
    }

    pub fn value(&self, p: usize) -> Real {
        &Real::from_ratio(&self.rational, p) * &Real::from_u64(self.radicand, p).sqrt()
    }
}

impl std::fmt::Display for SurdTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.rational.is_one(), self.radicand) {
            (_, 1) => write!(f, "{}", self.rational),
            (true, m) => write!(f, "sqrt({m})"),
            (false, m) => write!(f, "{}*sqrt({m})", self.rational),
        }
    }
}

/// `n = s^2 m` with `m` squarefree.
fn square_part(n: u64) -> (u64, u64) {
    let mut n = n;
    let (mut s, mut m) = (1u64, 1u64);
    let mut p = 2;
    while p * p <= n {
        let mut k = 0;
        while n % p == 0 {
            n /= p;
            k += 1;
        }
        s *= p.pow(k / 2);
        if k % 2 == 1 {
            m *= p;
        }
        p += 1;
    }
    (s, m * n)
}

/// A graded line shadow: grade and covolume.
#[derive(Clone, Debug)]
pub struct GradedLine {
    pub grade: Q,
    pub covolume: Real,
    pub exact: Option<SurdTag>,
    /// Set when the grade is not an integer.
    pub virtual_rank: bool,
}

/// Which field record a field term of a K0 class refers to.
pub fn field_record(
    group: &FiniteGroup,
    base: Base,
    labels: &[FieldLabel],
    h: &Subgroup,
) -> Result<FieldRecord> {
    if let Some(fl) = labels.iter().find(|fl| group.are_conjugate(&fl.subgroup, h)) {
        return lookup(&fl.label);
    }
    match base {
        Base::Rationals if h.order() == group.order() => lookup("Q"),
        Base::ProjectiveLine { q } => {
            let d = (group.order() / h.order()) as u32;
            let qd = q.checked_pow(d).ok_or_else(|| Error::Range("constant field too large".into()))?;
            lookup(&format!("P1/F{qd}"))
        }
        Base::Rationals => Err(validation(format!(
            "no field label for the subgroup {:?}",
            h.members()
        ))),
    }
}

/// Homomorphic image of a K0 class: field generators give
/// `([K_H : Q], sqrt|d|)` (function fields: `(d, q^{g-1})` for the
/// constant field of size `q`), point generators `(0, 1)`.
pub fn delta_add(k: &K0Class, base: Base, labels: &[FieldLabel], p: usize) -> Result<GradedLine> {
    let mut grade = Q::zero();
    let mut ln_cov = Real::zero(p);
    let mut exact = Some(Q::one());
    for (h, a) in &k.field_terms {
        let rec = field_record(&k.group, base, labels, h)?;
        let (deg, cov_sq) = match &rec {
            FieldRecord::Number(r) => (Q::from_integer(r.degree.into()), Q::from_integer(r.disc.unsigned_abs().into())),
            FieldRecord::Function(f) => {
                let d = Q::from_integer((k.group.order() / h.order()).into());
                let g1 = f.genus as i64 - 1;
                (d, crate::poly::q_pow(f.q, 2 * g1))
            }
        };
        grade += &deg * a;
        ln_cov = &ln_cov + &(&Real::from_ratio(&cov_sq, p).ln() * &Real::from_ratio(&(a / Q::from_integer(2.into())), p));
        exact = match (exact, a.is_integer()) {
            (Some(e), true) => {
                let n = a.to_integer().to_i32().expect("small coefficient");
                Some(e * num_traits::pow::Pow::pow(cov_sq, n))
            }
            _ => None,
        };
    }
    let exact = exact.map(|x| SurdTag::sqrt_of(&x));
    Ok(GradedLine {
        virtual_rank: !grade.is_integer(),
        grade,
        covolume: ln_cov.exp(),
        exact,
    })
}

/// Conductor of `Ind_H^G 1` summed as `sum_v a_v log q_v`, returned as the
/// integer `prod q_v^{a_v}` when every exponent is integral.
pub fn induced_conductor_norm(g: &std::sync::Arc<FiniteGroup>, h: &Subgroup, places: &[BadPlaceData]) -> Result<Q> {
    let v = GLattice::permutation(g, h);
    let mut n = Q::one();
    for p in places {
        let a = artin_conductor(&v, p)?;
        if !a.is_integer() || a.is_negative() {
            return Err(validation(format!("conductor exponent {a} at {} is not a natural number", p.label)));
        }
        let k = a.to_integer().to_u32().expect("small exponent");
        n *= Q::from_integer(num_traits::pow::Pow::pow(num_bigint::BigInt::from(p.q), k));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructible::K0Class;
    use std::sync::Arc;

    fn z2() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(2))
    }

    fn sign_module(g: &Arc<FiniteGroup>) -> GLattice {
        let id = g.identity();
        GLattice::from_sign(g.clone(), |x| if x == id { 1 } else { -1 }).unwrap()
    }

    fn place2(g: &FiniteGroup, wild_filtration: bool) -> BadPlaceData {
        BadPlaceData {
            label: "2".into(),
            q: 2,
            decomposition: g.whole(),
            inertia: g.whole(),
            frobenius: g.identity(),
            filtration: if wild_filtration {
                vec![g.whole(), g.whole(), g.trivial_subgroup()]
            } else {
                Vec::new()
            },
        }
    }

    #[test]
    fn sign_module_at_two() {
        let g = z2();
        let sign = sign_module(&g);
        assert_eq!(artin_conductor(&sign, &place2(&g, true)).unwrap(), Q::from_integer(2.into()));
        let e = artin_conductor(&sign, &place2(&g, false)).unwrap_err();
        assert!(matches!(e, Error::FiltrationRequired(_)));
        let triv = GLattice::trivial(g.clone(), 3);
        assert!(artin_conductor(&triv, &place2(&g, false)).unwrap().is_zero());
    }

    #[test]
    fn tame_sign_module() {
        let g = z2();
        let sign = sign_module(&g);
        let mut v = place2(&g, false);
        v.label = "3".into();
        v.q = 3;
        assert_eq!(artin_conductor(&sign, &v).unwrap(), Q::one());
        v.filtration = vec![g.whole(), g.trivial_subgroup()];
        assert_eq!(artin_conductor(&sign, &v).unwrap(), Q::one());
    }

    #[test]
    fn base_change_examples() {
        let g = z2();
        let v = place2(&g, true);
        let sign = sign_module(&g);
        let c = base_change_conductor(&sign, std::slice::from_ref(&v), 128).unwrap();
        assert_eq!(c.per_place[0].1, Q::one());
        let reg = GLattice::permutation(&g, &g.trivial_subgroup());
        let c = base_change_conductor(&reg, &[v], 128).unwrap();
        assert_eq!(c.per_place[0].1, Q::one());
        assert!((c.total.to_f64() - 2f64.ln()).abs() < 1e-15);
        let split = CTorusData::split_gm();
        assert!(torus_base_change_conductor(&split, 64).unwrap().per_place.is_empty());
    }

    #[test]
    fn delta_add_examples() {
        let g = z2();
        let q = K0Class::field(g.clone(), &g.whole(), Q::one());
        let d = delta_add(&q, Base::Rationals, &[], 128).unwrap();
        assert_eq!(d.grade, Q::one());
        assert!((d.covolume.to_f64() - 1.0).abs() < 1e-30);
        let labels = vec![FieldLabel {
            subgroup: g.trivial_subgroup(),
            label: "Q(i)".into(),
        }];
        let qi = K0Class::field(g.clone(), &g.trivial_subgroup(), Q::one());
        let d = delta_add(&qi, Base::Rationals, &labels, 128).unwrap();
        assert_eq!(d.grade, Q::from_integer(2.into()));
        assert!((d.covolume.to_f64() - 2.0).abs() < 1e-30);
        assert_eq!(d.exact.unwrap().to_string(), "2");
        let pt = K0Class::point(g.clone(), "2", 2, crate::lattices::FinAbFrob::z_trivial(), Q::one());
        let d = delta_add(&pt, Base::Rationals, &[], 128).unwrap();
        assert!(d.grade.is_zero() && (d.covolume.to_f64() - 1.0).abs() < 1e-30);
        let half = K0Class::field(g.clone(), &g.trivial_subgroup(), Q::new(1.into(), 2.into()));
        let d = delta_add(&half, Base::Rationals, &labels, 128).unwrap();
        assert!(!d.virtual_rank && d.exact.is_none());
        let third = K0Class::field(g.clone(), &g.whole(), Q::new(1.into(), 3.into()));
        assert!(delta_add(&third, Base::Rationals, &[], 64).unwrap().virtual_rank);
    }

    #[test]
    fn square_parts() {
        assert_eq!(square_part(8), (2, 2));
        assert_eq!(square_part(125), (5, 5));
        assert_eq!(square_part(1), (1, 1));
        assert_eq!(SurdTag::sqrt_of(&Q::new(3.into(), 4.into())).to_string(), "1/2*sqrt(3)");
    }
}
