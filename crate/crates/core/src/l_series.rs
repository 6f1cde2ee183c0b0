//! Euler products, function-field L-series and Dirichlet `L(1, χ)`.
//!
//! Number-field places come from a [`PlaceOracle`]: either an abelian
//! description (residue class mod `f` to Frobenius) or an explicit table.
//! Euler products are evaluated at `t = q^{-s}` in the region `s >= 3/2`,
//! multiplied in `(q, label)` order, and returned with a bound on the
//! omitted tail.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::constructible::{
    upper_places, BadPlaceData, Base, CTorusData, Cover, K0Class, TorusComplex,
};
use crate::error::{validation, Error, Result};
use crate::groups::FiniteGroup;
use crate::lattices::IntMatrix;
use crate::local_factors::{k0_local_cyclo, torus_local_cyclo, CycloProduct};
use crate::poly::{psi, q_pow, RationalFunctionT, Series};
use crate::qlinalg::Q;
use crate::real::{bits_for_digits, ComplexReal, Real};

/// Largest modulus accepted in abelian mode.
pub const MAX_MODULUS: u64 = 1000;

/// Source of place data for the base `Spec Z`.
#[derive(Clone, Debug)]
pub struct PlaceOracle {
    group: Arc<FiniteGroup>,
    mode: OracleMode,
}

#[derive(Clone, Debug)]
pub enum OracleMode {
    Abelian {
        modulus: u64,
        /// Frobenius of the primes in each unit residue class.
        frobenius: BTreeMap<u64, usize>,
        /// Full place data at primes dividing the modulus, and optionally
        /// elsewhere.
        overrides: Vec<BadPlaceData>,
    },
    Table {
        rows: Vec<BadPlaceData>,
        /// Rows with `q <= bound` are exhaustive.
        bound: u64,
        /// Largest number of places sharing one residue size, used by the
        /// tail bound.
        per_norm: usize,
    },
}

impl PlaceOracle {
    pub fn abelian(
        group: Arc<FiniteGroup>,
        modulus: u64,
        frobenius: BTreeMap<u64, usize>,
        overrides: Vec<BadPlaceData>,
    ) -> Result<PlaceOracle> {
        if modulus == 0 || modulus > MAX_MODULUS {
            return Err(Error::Range(format!(
                "abelian oracle modulus {modulus} outside 1..={MAX_MODULUS}"
            )));
        }
        if !group.is_abelian() {
            return Err(validation("abelian oracle over a nonabelian group; use table mode"));
        }
        let mut map = BTreeMap::new();
        for (&a, &g) in &frobenius {
            let r = a % modulus;
            if r.gcd(&modulus) != 1 {
                return Err(validation(format!("residue {a} is not a unit mod {modulus}")));
            }
            if g >= group.order() {
                return Err(validation(format!("residue {a}: element {g} out of range")));
            }
            if map.insert(r, g).is_some_and(|old| old != g) {
                return Err(validation(format!("residue {r} mod {modulus} assigned twice")));
            }
        }
        if let Some(&g1) = map.get(&(1 % modulus)) {
            if g1 != group.identity() {
                return Err(validation("residue 1 must map to the identity"));
            }
        }
        for (&a, &ga) in &map {
            for (&b, &gb) in &map {
                if let Some(&gab) = map.get(&(a * b % modulus)) {
                    if gab != group.mul(ga, gb) {
                        return Err(validation(format!(
                            "Frobenius map is not multiplicative at residues {a}, {b} mod {modulus}"
                        )));
                    }
                }
            }
        }
        let mut seen = BTreeSet::new();
        for o in &overrides {
            o.validate(&group)?;
            let p: u64 = o
                .label
                .parse()
                .map_err(|_| validation(format!("override label {:?} is not a prime", o.label)))?;
            if !is_prime(p) || o.q != p {
                return Err(validation(format!(
                    "override {}: label must be a prime equal to the residue size",
                    o.label
                )));
            }
            if !seen.insert(p) {
                return Err(validation(format!("override at {p} given twice")));
            }
            if modulus % p != 0 {
                let g = map.get(&(p % modulus)).copied();
                let ok = g.is_some_and(|g| o.inertia.contains(group.mul(group.inv(g), o.frobenius)));
                if !ok {
                    return Err(validation(format!(
                        "override at {p} disagrees with the residue map"
                    )));
                }
            }
        }
        Ok(PlaceOracle {
            group,
            mode: OracleMode::Abelian {
                modulus,
                frobenius: map,
                overrides,
            },
        })
    }

    pub fn table(group: Arc<FiniteGroup>, rows: Vec<BadPlaceData>, bound: u64, per_norm: usize) -> Result<PlaceOracle> {
        let mut seen = BTreeSet::new();
        for r in &rows {
            r.validate(&group)?;
            if !seen.insert(r.label.clone()) {
                return Err(validation(format!("oracle row {} given twice", r.label)));
            }
        }
        let mut count: BTreeMap<u64, usize> = BTreeMap::new();
        for r in &rows {
            *count.entry(r.q).or_default() += 1;
        }
        if count.values().any(|&c| c > per_norm.max(1)) {
            return Err(validation("more oracle rows share a residue size than declared"));
        }
        Ok(PlaceOracle {
            group,
            mode: OracleMode::Table {
                rows,
                bound,
                per_norm: per_norm.max(1),
            },
        })
    }

    /// The trivial-group oracle: every prime splits.
    pub fn split(group: Arc<FiniteGroup>) -> Result<PlaceOracle> {
        let id = group.identity();
        PlaceOracle::abelian(group, 1, BTreeMap::from([(0, id)]), Vec::new())
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn mode(&self) -> &OracleMode {
        &self.mode
    }

    pub fn per_norm(&self) -> usize {
        match &self.mode {
            OracleMode::Abelian { .. } => 1,
            OracleMode::Table { per_norm, .. } => *per_norm,
        }
    }

    /// Frobenius of the residue class of `a`, for `a` prime to the
    /// modulus.
    pub fn frobenius_of_residue(&self, a: u64) -> Option<usize> {
        match &self.mode {
            OracleMode::Abelian { modulus, frobenius, .. } => frobenius.get(&(a % modulus)).copied(),
            OracleMode::Table { .. } => None,
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        match &self.mode {
            OracleMode::Abelian { modulus, .. } => Some(*modulus),
            OracleMode::Table { .. } => None,
        }
    }

    /// Place data at the rational prime `p` (abelian mode) or the first
    /// row with residue size `p` (table mode).
    pub fn place_at(&self, p: u64) -> Result<BadPlaceData> {
        match &self.mode {
            OracleMode::Abelian {
                modulus,
                frobenius,
                overrides,
            } => {
                if let Some(o) = overrides.iter().find(|o| o.q == p) {
                    return Ok(o.clone());
                }
                if modulus % p == 0 {
                    return Err(Error::OracleIncomplete(format!("no data for the ramified place {p}")));
                }
                let r = p % modulus;
                let g = frobenius.get(&r).ok_or_else(|| {
                    Error::OracleIncomplete(format!("residue class {r} mod {modulus} is unassigned"))
                })?;
                Ok(BadPlaceData::unramified(&p.to_string(), p, &self.group, *g))
            }
            OracleMode::Table { rows, .. } => rows
                .iter()
                .find(|r| r.q == p)
                .cloned()
                .ok_or_else(|| Error::OracleIncomplete(format!("no row with residue size {p}"))),
        }
    }

    /// All places with `q <= b`, sorted by `(q, label)`.
    pub fn places_up_to(&self, b: u64) -> Result<Vec<BadPlaceData>> {
        let mut out = match &self.mode {
            OracleMode::Abelian { .. } => primes_up_to(b)
                .into_iter()
                .map(|p| self.place_at(p))
                .collect::<Result<Vec<_>>>()?,
            OracleMode::Table { rows, bound, .. } => {
                if b > *bound {
                    return Err(Error::OracleIncomplete(format!(
                        "table is exhaustive only up to {bound}, requested {b}"
                    )));
                }
                rows.iter().filter(|r| r.q <= b).cloned().collect()
            }
        };
        out.sort_by(|x, y| (x.q, &x.label).cmp(&(y.q, &y.label)));
        Ok(out)
    }

    /// Table oracle for the places of the fixed field of `h`, over the
    /// subgroup viewed as a group. Places above a lower place listed in
    /// `cover` take the cover's labels; other places are labelled by the
    /// lower label, suffixed by an index when there are several.
    pub fn upstairs(&self, cover: &Cover, bound: u64) -> Result<PlaceOracle> {
        let g = &cover.group;
        let h = &cover.subgroup;
        let (hg, emb) = cover.upper_group();
        let hg = Arc::new(hg);
        let local = |x: usize| emb.iter().position(|&e| e == x).expect("element of H");
        let localize = |s: &crate::groups::Subgroup| -> Result<crate::groups::Subgroup> {
            hg.subgroup(&s.members().iter().map(|&x| local(x)).collect::<Vec<_>>())
        };
        let mut rows = Vec::new();
        for v in self.places_up_to(bound)? {
            let named: Vec<(String, crate::constructible::UpperPlace)> =
                match cover.places.iter().find(|cp| cp.lower.label == v.label) {
                    Some(cp) => cover
                        .resolve(cp)?
                        .into_iter()
                        .map(|(s, u)| (s.label, u))
                        .collect(),
                    None => {
                        let ups = upper_places(g, h, &v);
                        let n = ups.len();
                        ups.into_iter()
                            .enumerate()
                            .map(|(k, u)| {
                                let l = if n == 1 {
                                    v.label.clone()
                                } else {
                                    format!("{}.{}", v.label, k + 1)
                                };
                                (l, u)
                            })
                            .collect()
                    }
                };
            for (label, u) in named {
                rows.push(BadPlaceData {
                    label,
                    q: v.q.checked_pow(u.f as u32).ok_or_else(|| Error::Range("residue size overflow".into()))?,
                    decomposition: localize(&u.decomposition)?,
                    inertia: localize(&u.inertia)?,
                    frobenius: local(u.frobenius),
                    filtration: Vec::new(),
                });
            }
        }
        let index = g.order() / h.order();
        PlaceOracle::table(hg, rows, bound, index)
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Primes `<= b` by the sieve of Eratosthenes.
pub fn primes_up_to(b: u64) -> Vec<u64> {
    let n = b as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

/// An object with an L-function.
#[derive(Clone, Copy, Debug)]
pub enum LObject<'a> {
    Torus(&'a CTorusData),
    Class(&'a K0Class),
    /// `L(T'') / L(T')` for a complex `T' -> T''`.
    Complex(&'a TorusComplex),
}

impl LObject<'_> {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        match self {
            LObject::Torus(t) => &t.group,
            LObject::Class(k) => &k.group,
            LObject::Complex(c) => &c.target.group,
        }
    }

    /// Labels and residue sizes of places with special data.
    fn listed(&self) -> Vec<(String, u64)> {
        match self {
            LObject::Torus(t) => t.bad.iter().map(|p| (p.place.label.clone(), p.place.q)).collect(),
            LObject::Class(k) => k.point_terms.iter().map(|p| (p.label.clone(), p.q)).collect(),
            LObject::Complex(c) => c.places().iter().map(|p| (p.label.clone(), p.q)).collect(),
        }
    }

    pub fn local_cyclo(&self, x: &BadPlaceData) -> Result<CycloProduct> {
        match self {
            LObject::Torus(t) => torus_local_cyclo(t, x),
            LObject::Class(k) => k0_local_cyclo(k, x),
            LObject::Complex(c) => {
                let b = torus_local_cyclo(&c.target, x)?;
                let a = torus_local_cyclo(&c.source, x)?;
                Ok(b.mul(&a.pow(&-Q::one())))
            }
        }
    }

    /// Bound on the number of eigenvalues in the good-place factor, all of
    /// absolute value 1, counted with multiplicity.
    pub fn tail_weight(&self) -> Q {
        match self {
            LObject::Torus(t) => Q::from_integer(t.characters.rank().into()),
            LObject::Class(k) => k
                .field_terms
                .iter()
                .map(|(h, a)| a.abs() * Q::from_integer((k.group.order() / h.order()).into()))
                .sum(),
            LObject::Complex(c) => {
                Q::from_integer((c.source.characters.rank() + c.target.characters.rank()).into())
            }
        }
    }
}

/// A truncated Euler product.
#[derive(Clone, Debug)]
pub struct EulerProduct {
    pub value: Real,
    /// Bound on `|L / L_B - 1|`.
    pub tail_bound: f64,
    pub places: usize,
}

/// `q^{-s}` to working precision.
pub fn t_at(q: u64, s: &Q, p: usize) -> Real {
    if s.is_integer() {
        let k = s.to_integer().to_i64().expect("small exponent");
        return Real::from_ratio(&q_pow(q, -k), p);
    }
    (-(&Real::from_ratio(s, p) * &Real::from_u64(q, p).ln())).exp()
}

/// `sum_{n > B} m n^{-σ} / (1 - B^{-σ})` bounded by the integral, then
/// exponentiated.
pub fn tail_bound(weight: f64, per_norm: usize, sigma: f64, b: u64) -> f64 {
    if weight == 0.0 {
        return 0.0;
    }
    let bf = b.max(1) as f64;
    let s = per_norm as f64 * bf.powf(1.0 - sigma) / ((sigma - 1.0) * (1.0 - bf.powf(-sigma)));
    (weight * s).exp_m1()
}

/// Euler product over the places with `q <= b` at `s`, to `digits`
/// significant digits.
pub fn euler_product(obj: LObject<'_>, oracle: &PlaceOracle, s: &Q, b: u64, digits: u32) -> Result<EulerProduct> {
    if *s < Q::new(3.into(), 2.into()) {
        return Err(Error::Range(format!("s = {s} is outside the region s >= 3/2")));
    }
    match obj {
        LObject::Torus(t) if t.base != Base::Rationals => {
            return Err(Error::Range("Euler products over a curve use ff_l_function".into()));
        }
        _ => {}
    }
    if **obj.group() != **oracle.group() {
        return Err(validation("oracle is over a different group"));
    }
    let p = bits_for_digits(digits) + 32;
    let places = oracle.places_up_to(b)?;
    let labels: BTreeSet<&str> = places.iter().map(|x| x.label.as_str()).collect();
    for (l, q) in obj.listed() {
        if q > b {
            return Err(Error::Range(format!("listed place {l} has q = {q} above the bound {b}")));
        }
        if !labels.contains(l.as_str()) {
            return Err(Error::OracleIncomplete(format!("listed place {l} is not supplied by the oracle")));
        }
    }
    let mut acc = Real::zero(p);
    for x in &places {
        let c = obj.local_cyclo(x)?;
        acc = &acc + &c.ln_at(&t_at(x.q, s, p));
    }
    let sigma = s.to_f64().unwrap_or(f64::INFINITY) + 1.0;
    let w = obj.tail_weight().to_f64().unwrap_or(f64::INFINITY);
    Ok(EulerProduct {
        value: acc.exp(),
        tail_bound: tail_bound(w, oracle.per_norm(), sigma, b),
        places: places.len(),
    })
}

/// Place counts of a curve over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FFCurveData {
    pub q: u64,
    /// `counts[d - 1]` places of degree `d`.
    pub counts: Vec<BigInt>,
}

impl FFCurveData {
    /// The projective line: monic irreducibles of each degree, plus the
    /// place at infinity in degree 1.
    pub fn projective_line(q: u64, max_degree: usize) -> FFCurveData {
        let qb = BigInt::from(q);
        let counts = (1..=max_degree)
            .map(|d| {
                let mut s = BigInt::zero();
                for e in 1..=d {
                    if d % e == 0 {
                        let mu = mobius(e);
                        if mu != 0 {
                            s += BigInt::from(mu) * num_traits::pow(qb.clone(), d / e);
                        }
                    }
                }
                let n = s / BigInt::from(d);
                if d == 1 {
                    n + 1
                } else {
                    n
                }
            })
            .collect();
        FFCurveData { q, counts }
    }

    pub fn count(&self, d: usize) -> Option<&BigInt> {
        self.counts.get(d.checked_sub(1)?)
    }
}

pub fn mobius(n: usize) -> i64 {
    let mut n = n;
    let mut r = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            r = -r;
        }
        p += 1;
    }
    if n > 1 {
        r = -r;
    }
    r
}

/// Series of an L-function over a curve in `T = q^{-s}`.
#[derive(Clone, Debug)]
pub struct FfSeries {
    /// Coefficients of `T^0 .. T^D`.
    pub series: Series,
    /// Exact fit that re-expands to every coefficient, when one exists
    /// with at least one coefficient to spare.
    pub rational: Option<RationalFunctionT>,
}

/// `prod_d F_d(T)^{N_d}` over places of degree `d <= cutoff`, where the
/// splitting group is the constant extension with Frobenius `generator`
/// at degree-one places. Places in `special` (and listed torus places)
/// use their own data and are removed from the counts.
pub fn ff_l_function(
    obj: LObject<'_>,
    curve: &FFCurveData,
    generator: usize,
    special: &[BadPlaceData],
    cutoff: usize,
) -> Result<FfSeries> {
    let g = obj.group();
    if generator >= g.order() {
        return Err(validation("Frobenius generator out of range"));
    }
    if g.generated_subgroup(&[generator]).order() != g.order() {
        return Err(validation("the constant-extension group must be generated by Frobenius"));
    }
    if let LObject::Torus(t) = obj {
        if t.base != (Base::ProjectiveLine { q: curve.q }) && t.base != Base::Rationals {
            return Err(validation("torus base does not match the curve"));
        }
    }
    if curve.counts.len() < cutoff {
        return Err(Error::OracleIncomplete(format!(
            "place counts known to degree {}, cutoff {cutoff}",
            curve.counts.len()
        )));
    }
    let mut places: Vec<BadPlaceData> = special.to_vec();
    if let LObject::Torus(t) = obj {
        for tp in &t.bad {
            if !places.iter().any(|p| p.label == tp.place.label) {
                places.push(tp.place.clone());
            }
        }
    }
    for (l, _) in obj.listed() {
        if !places.iter().any(|p| p.label == l) {
            return Err(Error::OracleIncomplete(format!("no place data for {l}")));
        }
    }
    let n = cutoff + 1;
    let mut per_degree: BTreeMap<usize, usize> = BTreeMap::new();
    let mut acc = Series::one(n);
    for x in &places {
        x.validate(g)?;
        let d = crate::local_factors::residue_degree(curve.q, x.q)
            .filter(|&d| d >= 1)
            .ok_or_else(|| validation(format!("place {}: q = {} is not a power of {}", x.label, x.q, curve.q)))?;
        *per_degree.entry(d).or_default() += 1;
        if d <= cutoff {
            acc = acc.mul(&cyclo_series(&obj.local_cyclo(x)?, d, n, &Q::one()));
        }
    }
    for d in 1..=cutoff {
        let special_here = per_degree.get(&d).copied().unwrap_or(0);
        let generic = curve.counts[d - 1].clone() - BigInt::from(special_here);
        if generic.is_negative() {
            return Err(validation(format!("more special places of degree {d} than places")));
        }
        if generic.is_zero() {
            continue;
        }
        let qd = curve
            .q
            .checked_pow(d as u32)
            .ok_or_else(|| Error::Range("residue size overflow".into()))?;
        let x = BadPlaceData::unramified(&format!("deg{d}"), qd, g, g.pow(generator, d));
        let c = obj.local_cyclo(&x)?;
        acc = acc.mul(&cyclo_series(&c, d, n, &Q::from_integer(generic)));
    }
    let rational = acc.rational_reconstruct(Some(curve.q));
    Ok(FfSeries { series: acc, rational })
}

/// `c(T^d)^m` as a series of length `n`.
fn cyclo_series(c: &CycloProduct, d: usize, n: usize, m: &Q) -> Series {
    let mut acc = Series::one(n);
    for ((shift, e), k) in c.exponents() {
        let p = psi(*e).scale_var(&q_pow(c.q, -(*shift as i64))).substitute_power(d);
        acc = acc.mul(&Series::from_poly(&p, n).pow(&(k * m)));
    }
    acc
}

/// Characters of a finite abelian group on `0..n`, as rational turns
/// `ψ(x) = exp(2πi · turn)`, the trivial character first.
pub fn abelian_dual(n: usize, identity: usize, mul: impl Fn(usize, usize) -> usize) -> Vec<Vec<Q>> {
    // Grow a generating set, recording coordinates of every element and
    // the relation of each new generator.
    let mut coords: BTreeMap<usize, Vec<i64>> = BTreeMap::from([(identity, Vec::new())]);
    let mut relations: Vec<Vec<i64>> = Vec::new();
    let mut gens: Vec<usize> = Vec::new();
    while coords.len() < n {
        let g = (0..n).find(|x| !coords.contains_key(x)).expect("uncovered element");
        let k = gens.len();
        let mut m = 1;
        let mut gm = g;
        while !coords.contains_key(&gm) {
            gm = mul(gm, g);
            m += 1;
        }
        let mut rel = coords[&gm].clone();
        rel.resize(k, 0);
        let mut rel: Vec<i64> = rel.into_iter().map(|x| -x).collect();
        rel.push(m);
        for r in relations.iter_mut() {
            r.push(0);
        }
        relations.push(rel);
        let old: Vec<(usize, Vec<i64>)> = coords.iter().map(|(a, b)| (*a, b.clone())).collect();
        let mut power = identity;
        for j in 0..m {
            for (x, c) in &old {
                let mut c = c.clone();
                c.resize(k, 0);
                c.push(j);
                coords.entry(mul(power, *x)).or_insert(c);
            }
            power = mul(power, g);
        }
        gens.push(g);
    }
    let k = gens.len();
    if k == 0 {
        return vec![vec![Q::zero(); n]];
    }
    let rel = IntMatrix::from_cols(
        &relations
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.resize(k, 0);
                r.into_iter().map(BigInt::from).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>(),
        k,
    );
    let s = rel.smith();
    let d: Vec<BigInt> = (0..k).map(|i| s.diag[i].clone()).collect();
    let y: Vec<Vec<BigInt>> = (0..n)
        .map(|x| {
            let mut c = coords[&x].clone();
            c.resize(k, 0);
            s.u.mul_vec(&c.into_iter().map(BigInt::from).collect::<Vec<_>>())
        })
        .collect();
    let mut out = Vec::new();
    let mut c = vec![BigInt::zero(); k];
    loop {
        let chi: Vec<Q> = (0..n)
            .map(|x| {
                let mut t: Q = (0..k)
                    .map(|i| Q::new(&c[i] * &y[x][i], d[i].clone()))
                    .sum();
                t = &t - Q::from_integer(t.floor().to_integer());
                t
            })
            .collect();
        out.push(chi);
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            c[i] += 1;
            if c[i] < d[i] {
                break;
            }
            c[i] = BigInt::zero();
            i += 1;
        }
    }
}

/// A Dirichlet character mod `f`: `turns[a]` is `None` when
/// `gcd(a, f) > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletCharacter {
    modulus: u64,
    turns: Vec<Option<Q>>,
}

impl DirichletCharacter {
    pub fn new(modulus: u64, turns: Vec<Option<Q>>) -> Result<DirichletCharacter> {
        if modulus == 0 || turns.len() as u64 != modulus {
            return Err(validation("character table length must equal the modulus"));
        }
        for a in 0..modulus {
            if turns[a as usize].is_some() != (a.gcd(&modulus) == 1) {
                return Err(validation(format!("character value at {a} mod {modulus} is misplaced")));
            }
        }
        let reduce = |x: Q| &x - Q::from_integer(x.floor().to_integer());
        let turns: Vec<Option<Q>> = turns.into_iter().map(|t| t.map(reduce)).collect();
        for a in 0..modulus {
            for b in 0..modulus {
                if let (Some(x), Some(y)) = (&turns[a as usize], &turns[b as usize]) {
                    let ab = turns[(a * b % modulus) as usize].clone().expect("unit");
                    if reduce(x + y) != ab {
                        return Err(validation("character is not multiplicative"));
                    }
                }
            }
        }
        Ok(DirichletCharacter { modulus, turns })
    }

    /// All characters mod `f`, the principal one first.
    pub fn all(f: u64) -> Vec<DirichletCharacter> {
        let units: Vec<u64> = (0..f).filter(|a| a.gcd(&f) == 1).collect();
        let pos: BTreeMap<u64, usize> = units.iter().enumerate().map(|(i, a)| (*a, i)).collect();
        let identity = pos[&(1 % f)];
        let dual = abelian_dual(units.len(), identity, |i, j| pos[&(units[i] * units[j] % f)]);
        dual.into_iter()
            .map(|chi| {
                let mut turns = vec![None; f as usize];
                for (i, a) in units.iter().enumerate() {
                    turns[*a as usize] = Some(chi[i].clone());
                }
                DirichletCharacter { modulus: f, turns }
            })
            .collect()
    }

    /// `ψ ∘ Frob` for a character of the oracle group, given as turns on
    /// elements.
    pub fn from_oracle(oracle: &PlaceOracle, psi_turns: &[Q]) -> Result<DirichletCharacter> {
        let f = oracle.modulus().ok_or_else(|| validation("table oracles carry no residue map"))?;
        let turns = (0..f)
            .map(|a| {
                if a.gcd(&f) != 1 {
                    return Ok(None);
                }
                oracle
                    .frobenius_of_residue(a)
                    .map(|g| Some(psi_turns[g].clone()))
                    .ok_or_else(|| Error::OracleIncomplete(format!("residue class {a} mod {f} is unassigned")))
            })
            .collect::<Result<Vec<_>>>()?;
        DirichletCharacter::new(f, turns)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn turn(&self, a: u64) -> Option<&Q> {
        self.turns[(a % self.modulus) as usize].as_ref()
    }

    pub fn is_principal(&self) -> bool {
        self.turns.iter().flatten().all(|t| t.is_zero())
    }

    /// `χ(-1) = 1`.
    pub fn is_even(&self) -> bool {
        self.turn(self.modulus - 1 + self.modulus).is_some_and(|t| t.is_zero())
    }

    /// Smallest `d | f` such that `χ` is trivial on units `≡ 1 mod d`.
    pub fn conductor(&self) -> u64 {
        let f = self.modulus;
        (1..=f)
            .filter(|d| f % d == 0)
            .find(|&d| {
                (0..f)
                    .filter(|a| a % d == 1 % d)
                    .all(|a| self.turn(a).is_none_or(|t| t.is_zero()))
            })
            .expect("f itself qualifies")
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }

    /// The primitive character inducing this one.
    pub fn primitive(&self) -> DirichletCharacter {
        let f = self.modulus;
        let d = self.conductor();
        let turns = (0..d)
            .map(|b| {
                if b.gcd(&d) != 1 {
                    return None;
                }
                (0..f / d.max(1))
                    .map(|k| b + k * d)
                    .find(|a| a.gcd(&f) == 1)
                    .and_then(|a| self.turn(a).cloned())
                    .or_else(|| Some(Q::zero()))
            })
            .collect();
        DirichletCharacter { modulus: d, turns }
    }

    /// Conjugate character.
    pub fn conj(&self) -> DirichletCharacter {
        DirichletCharacter {
            modulus: self.modulus,
            turns: self
                .turns
                .iter()
                .map(|t| t.as_ref().map(|x| if x.is_zero() { Q::zero() } else { Q::one() - x }))
                .collect(),
        }
    }
}

/// `L(1, χ)` for a primitive nontrivial character, by the Gauss-sum closed
/// forms, cross-checked against the digamma formula in double precision.
pub fn dirichlet_l_at_1(chi: &DirichletCharacter, digits: u32) -> Result<ComplexReal> {
    let f = chi.modulus;
    if chi.is_principal() {
        return Err(Error::Range("L(1, χ) needs a nontrivial character".into()));
    }
    if f > MAX_MODULUS {
        return Err(Error::Range(format!("modulus {f} above {MAX_MODULUS}")));
    }
    if !chi.is_primitive() {
        return Err(Error::NonPrimitive(format!(
            "character mod {f} has conductor {}",
            chi.conductor()
        )));
    }
    let p = bits_for_digits(digits) + 32;
    let fq = Q::from_integer(f.into());
    let mut tau = ComplexReal::zero(p);
    for a in 1..f {
        if let Some(t) = chi.turn(a) {
            tau = tau.add(&ComplexReal::root_of_unity(&(t + Q::new(a.into(), f.into())), p));
        }
    }
    let cbar = chi.conj();
    let pi = Real::pi(p);
    let value = if chi.is_even() {
        // L = -(τ/f) Σ χ̄(a) log|sin(π a / f)|.
        let mut s = ComplexReal::zero(p);
        for a in 1..f {
            if let Some(t) = cbar.turn(a) {
                let ls = (&pi * &Real::from_ratio(&Q::new(a.into(), f.into()), p)).sin().ln();
                s = s.add(&ComplexReal::root_of_unity(t, p).scale(&ls));
            }
        }
        tau.mul(&s).scale(&-(&Real::one(p) / &Real::from_u64(f, p)))
    } else {
        // L = (π i τ / f²) Σ χ̄(a) a.
        let mut s = ComplexReal::zero(p);
        for a in 1..f {
            if let Some(t) = cbar.turn(a) {
                s = s.add(&ComplexReal::root_of_unity(t, p).scale(&Real::from_u64(a, p)));
            }
        }
        let i_pi = ComplexReal::new(Real::zero(p), &pi / &Real::from_ratio(&(&fq * &fq), p));
        i_pi.mul(&tau).mul(&s)
    };
    let (re, im) = l1_digamma(chi);
    let err = ((value.re.to_f64() - re).powi(2) + (value.im.to_f64() - im).powi(2)).sqrt();
    if err > 1e-9 {
        return Err(Error::Consistency(format!(
            "L(1, χ) mod {f}: closed form and digamma formula differ by {err:e}"
        )));
    }
    Ok(value)
}

/// `L(1, χ) = -(1/f) Σ_a χ(a) ψ(a/f)` in double precision.
pub fn l1_digamma(chi: &DirichletCharacter) -> (f64, f64) {
    let f = chi.modulus;
    let (mut re, mut im) = (0.0, 0.0);
    for a in 1..=f {
        if let Some(t) = chi.turn(a) {
            let th = 2.0 * std::f64::consts::PI * crate::real::ratio_to_f64(t);
            let d = digamma(a as f64 / f as f64);
            re += th.cos() * d;
            im += th.sin() * d;
        }
    }
    (-re / f as f64, -im / f as f64)
}

/// Digamma for `x > 0`: recurrence up to 10, then the asymptotic series.
pub fn digamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    let series = x2
        * (1.0 / 12.0
            - x2 * (1.0 / 120.0 - x2 * (1.0 / 252.0 - x2 * (1.0 / 240.0 - x2 * (1.0 / 132.0)))));
    acc + x.ln() - 0.5 / x - series
}

/// `η(1) = Σ (-1)^{n+1} / n` by the Cohen, Rodriguez Villegas and Zagier
/// acceleration.
pub fn eta_one(digits: u32) -> Real {
    let p = bits_for_digits(digits) + 32;
    let n = (1.31 * digits as f64) as i64 + 10;
    let d = (&Real::from_i64(3, p) + &Real::from_i64(8, p).sqrt()).powi(n);
    let d = &(&d + &d.recip()) / &Real::from_i64(2, p);
    let mut b = Real::from_i64(-1, p);
    let mut c = -&d;
    let mut s = Real::zero(p);
    for k in 0..n {
        c = &b - &c;
        s = &s + &(&c / &Real::from_i64(k + 1, p));
        let num = Real::from_i64(2 * (k + n) * (k - n), p);
        let den = Real::from_i64((2 * k + 1) * (k + 1), p);
        b = &(&b * &num) / &den;
    }
    &s / &d
}

/// Residue of the Riemann zeta function at 1, as `η(1) / log 2`.
pub fn zeta_residue(digits: u32) -> Real {
    let p = bits_for_digits(digits) + 32;
    &eta_one(digits) / &Real::from_i64(2, p).ln()
}

/// Leading coefficient at `s = 0` of a rational function of `t = q^{-s}`:
/// `R(t) = (1 - t)^k S(t)` gives order `k` and value `(log q)^k S(1)`.
pub fn leading_at_zero(r: &RationalFunctionT, q: u64, p: usize) -> (i64, Real) {
    let (kn, sn) = r.num().split_root_one();
    let (kd, sd) = r.den().split_root_one();
    let k = kn as i64 - kd as i64;
    let s1 = sn.eval(&Q::one()) / sd.eval(&Q::one());
    let lq = Real::from_u64(q, p).ln();
    (k, &lq.powi(k) * &Real::from_ratio(&s1, p))
}

#[cfg(test)]
fn turns_to_f64(t: &[Q]) -> Vec<f64> {
    t.iter().map(crate::real::ratio_to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructible::K0Class;

    fn mod4_oracle() -> PlaceOracle {
        let g = Arc::new(FiniteGroup::cyclic(2));
        let two = BadPlaceData {
            label: "2".into(),
            q: 2,
            decomposition: g.whole(),
            inertia: g.whole(),
            frobenius: g.identity(),
            filtration: vec![g.whole(), g.whole(), g.trivial_subgroup()],
        };
        let s = (0..2).find(|&x| x != g.identity()).unwrap();
        PlaceOracle::abelian(g.clone(), 4, BTreeMap::from([(1, g.identity()), (3, s)]), vec![two]).unwrap()
    }

    #[test]
    fn sieve_and_mobius() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(primes_up_to(10_000).len(), 1229);
        assert_eq!((1..=10).map(mobius).collect::<Vec<_>>(), vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }

    #[test]
    fn projective_line_counts() {
        let c = FFCurveData::projective_line(2, 5);
        let v: Vec<i64> = c.counts.iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(v, vec![3, 1, 2, 3, 6]);
        assert_eq!(FFCurveData::projective_line(3, 1).counts[0], BigInt::from(4));
    }

    #[test]
    fn oracle_checks() {
        let o = mod4_oracle();
        assert_eq!(o.place_at(7).unwrap().frobenius, 1);
        assert!(o.place_at(2).unwrap().is_ramified());
        let g = o.group().clone();
        let bad = PlaceOracle::abelian(g.clone(), 4, BTreeMap::from([(1, 1)]), vec![]);
        assert!(bad.is_err());
        let partial = PlaceOracle::abelian(g.clone(), 4, BTreeMap::from([(1, 0)]), vec![]).unwrap();
        let e = partial.places_up_to(10).unwrap_err().to_string();
        assert!(e.contains("ramified place 2"), "{e}");
        let g3 = Arc::new(FiniteGroup::cyclic(2));
        let p5 = PlaceOracle::abelian(g3, 5, BTreeMap::from([(1, 0), (4, 0), (2, 1)]), vec![]).unwrap();
        let e = p5.place_at(3).unwrap_err().to_string();
        assert!(e.contains("residue class 3 mod 5"), "{e}");
    }

    #[test]
    fn empty_class_is_one() {
        let o = mod4_oracle();
        let k = K0Class::zero(o.group().clone());
        let r = euler_product(LObject::Class(&k), &o, &Q::from_integer(2.into()), 1000, 30).unwrap();
        assert_eq!(r.value.to_decimal(25), Real::one(128).to_decimal(25));
        assert_eq!(r.tail_bound, 0.0);
    }

    #[test]
    fn s_below_region_rejected() {
        let t = CTorusData::split_gm();
        let o = PlaceOracle::split(t.group.clone()).unwrap();
        let e = euler_product(LObject::Torus(&t), &o, &Q::new(7.into(), 5.into()), 100, 20);
        assert!(matches!(e, Err(Error::Range(_))));
    }

    #[test]
    fn split_gm_is_inverse_zeta_three() {
        let t = CTorusData::split_gm();
        let o = PlaceOracle::split(t.group.clone()).unwrap();
        let r = euler_product(LObject::Torus(&t), &o, &Q::from_integer(2.into()), 10_000, 30).unwrap();
        // Oracle: 1 / ζ(3) by direct partial summation with an
        // Euler-Maclaurin tail.
        let n = 20_000u64;
        let mut z: f64 = (1..=n).rev().map(|k| (k as f64).powi(-3)).sum();
        let nf = n as f64;
        z += 1.0 / (2.0 * nf * nf) - 1.0 / (2.0 * nf.powi(3)) + 1.0 / (4.0 * nf.powi(4));
        let v = r.value.to_f64();
        assert!((v - 1.0 / z).abs() / v <= r.tail_bound + 1e-13, "{v} vs {}", 1.0 / z);
        assert!(r.tail_bound < 1e-7);
    }

    #[test]
    fn dirichlet_examples() {
        let all4 = DirichletCharacter::all(4);
        assert_eq!(all4.len(), 2);
        let chi4 = &all4[1];
        assert!(!chi4.is_even() && chi4.is_primitive());
        let v = dirichlet_l_at_1(chi4, 40).unwrap();
        assert!((v.re.to_f64() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let chi3 = &DirichletCharacter::all(3)[1];
        let v = dirichlet_l_at_1(chi3, 40).unwrap();
        let expect = std::f64::consts::PI / (3.0 * 3f64.sqrt());
        assert!((v.re.to_f64() - expect).abs() < 1e-15);
        let quad5 = DirichletCharacter::all(5)
            .into_iter()
            .find(|c| c.is_even() && !c.is_principal())
            .unwrap();
        let v = dirichlet_l_at_1(&quad5, 50).unwrap();
        assert_eq!(
            v.re.to_decimal(45),
            Real::parse("0.430408940964004038889433232950605425424570682540289654757006", 256)
                .unwrap()
                .to_decimal(45)
        );
        assert!(v.im.to_f64().abs() < 1e-40);
    }

    #[test]
    fn non_primitive_rejected() {
        let chi = DirichletCharacter::all(8)
            .into_iter()
            .find(|c| !c.is_principal() && c.conductor() == 4)
            .unwrap();
        assert!(matches!(dirichlet_l_at_1(&chi, 20), Err(Error::NonPrimitive(_))));
        let p = chi.primitive();
        assert_eq!(p.modulus(), 4);
        assert!(dirichlet_l_at_1(&p, 20).is_ok());
    }

    #[test]
    fn characters_of_units_mod_1000() {
        let all = DirichletCharacter::all(1000);
        assert_eq!(all.len(), 400);
        let distinct: BTreeSet<_> = all.iter().map(|c| c.turns.clone()).collect();
        assert_eq!(distinct.len(), 400);
    }

    #[test]
    fn dual_of_klein_four() {
        let g = FiniteGroup::klein_four();
        let d = abelian_dual(g.order(), g.identity(), |a, b| g.mul(a, b));
        assert_eq!(d.len(), 4);
        for chi in &d {
            assert!(turns_to_f64(chi).iter().all(|&t| t == 0.0 || t == 0.5));
        }
    }

    #[test]
    fn zeta_residue_is_one() {
        let r = zeta_residue(50);
        assert!((r.to_f64() - 1.0).abs() < 1e-15);
        assert_eq!(r.to_decimal(45), Real::one(256).to_decimal(45));
    }

    #[test]
    fn digamma_values() {
        let gamma = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + gamma).abs() < 1e-13);
        assert!((digamma(0.5) + gamma + 2.0 * 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn ff_split_gm_reconstructs() {
        let t = CTorusData::split_gm();
        for q in [2u64, 3, 4] {
            let curve = FFCurveData::projective_line(q, 12);
            let r = ff_l_function(LObject::Torus(&t), &curve, 0, &[], 12).unwrap();
            let qi = Q::new(1.into(), q.into());
            let mut expect = vec![Q::zero(); 13];
            expect[0] = Q::one();
            expect[1] = -(Q::one() + &qi);
            expect[2] = qi.clone();
            assert_eq!(r.series.coeffs(), &expect[..]);
            let rat = r.rational.unwrap();
            assert!(rat.is_polynomial());
            assert_eq!(rat.series(13), r.series);
        }
    }
}
