//! Seeded random instances for property suites. Every generator takes the
//! RNG explicitly, so a seed fixes the whole run.

use std::sync::Arc;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constructible::{BadPlaceData, Base, SheafPlace, TfSheafData};
use crate::groups::{FiniteGroup, Subgroup};
use crate::lattices::{FinAbFrob, GLattice, IntMatrix};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named groups: `1`, `Z/n`, `S3`, `Z/2xZ/2`.
pub fn named_group(name: &str) -> Option<FiniteGroup> {
    match name {
        "1" => Some(FiniteGroup::trivial()),
        "S3" => Some(FiniteGroup::symmetric(3)),
        "Z/2xZ/2" => Some(FiniteGroup::klein_four()),
        _ => name
            .strip_prefix("Z/")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| (1..=24).contains(&n))
            .map(FiniteGroup::cyclic),
    }
}

/// One of `1, Z/2, Z/3, S3`.
pub fn small_group(r: &mut TestRng) -> Arc<FiniteGroup> {
    let name = ["1", "Z/2", "Z/3", "S3"].choose(r).expect("nonempty");
    Arc::new(named_group(name).expect("known group"))
}

/// Product of a few elementary matrices.
pub fn random_unimodular(r: &mut TestRng, n: usize) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    if n < 2 {
        return m;
    }
    for _ in 0..r.gen_range(0..=4) {
        let i = r.gen_range(0..n);
        let mut j = r.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = BigInt::from(*[-1i64, 1, 2, -2].choose(r).expect("nonempty"));
        let mut e = IntMatrix::identity(n);
        e.set(i, j, c);
        m = m.mul(&e);
    }
    m
}

/// A direct sum of permutation lattices `Z[G/H]` (`H` cyclic or `G`) and,
/// for groups with a sign character, copies of the sign lattice, in a
/// randomly changed basis. Rank at most `max_rank`, at least one.
pub fn random_lattice(r: &mut TestRng, g: &Arc<FiniteGroup>, max_rank: usize) -> GLattice {
    let mut pieces: Vec<GLattice> = Vec::new();
    for h in g.cyclic_subgroups().into_iter().chain([g.whole()]) {
        let l = GLattice::permutation(g, &h);
        if l.rank() <= max_rank {
            pieces.push(l);
        }
    }
    if let Some(sign) = sign_lattice(g) {
        pieces.push(sign);
    }
    let mut acc = GLattice::trivial(g.clone(), 0);
    let target = r.gen_range(1..=max_rank.max(1));
    while acc.rank() < target {
        let fits: Vec<&GLattice> = pieces.iter().filter(|p| acc.rank() + p.rank() <= max_rank).collect();
        let Some(p) = fits.choose(r) else { break };
        acc = acc.direct_sum(p);
    }
    change_basis(&acc, &random_unimodular(r, acc.rank()))
}

/// The lattice `Z` with `G` acting through a sign of even/odd
/// permutations or, for `Z/2`, the nontrivial character.
pub fn sign_lattice(g: &Arc<FiniteGroup>) -> Option<GLattice> {
    let signs: Vec<i64> = g
        .elements()
        .iter()
        .map(|p| {
            let odd = p.cycles().iter().map(|c| c.len() - 1).sum::<usize>() % 2 == 1;
            if odd {
                -1
            } else {
                1
            }
        })
        .collect();
    if signs.iter().all(|&s| s == 1) {
        return None;
    }
    GLattice::from_sign(g.clone(), move |x| signs[x]).ok()
}

/// `P A(g) P^{-1}` for every element.
pub fn change_basis(l: &GLattice, p: &IntMatrix) -> GLattice {
    let pinv = p.inverse_unimodular().expect("unimodular");
    let action = l.actions().iter().map(|a| p.mul(a).mul(&pinv)).collect();
    GLattice::new(l.group().clone(), l.rank(), action).expect("conjugate action")
}

/// Place data with random decomposition and inertia; wild places carry
/// the two-step filtration `I ⊃ 1`.
pub fn random_place(r: &mut TestRng, g: &FiniteGroup, label: &str, q: u64) -> BadPlaceData {
    let mut inertias = vec![g.trivial_subgroup()];
    inertias.extend(g.cyclic_subgroups().into_iter().filter(|h| !h.is_trivial()));
    loop {
        let inertia = inertias.choose(r).expect("nonempty").clone();
        let frob = r.gen_range(0..g.order());
        let mut gens = inertia.members().to_vec();
        gens.push(frob);
        let decomposition = g.generated_subgroup(&gens);
        let mut v = BadPlaceData {
            label: label.to_string(),
            q,
            decomposition,
            inertia: inertia.clone(),
            frobenius: frob,
            filtration: Vec::new(),
        };
        if v.is_ramified() && v.is_wild() {
            v.filtration = vec![inertia, g.trivial_subgroup()];
        }
        if v.validate(g).is_ok() {
            return v;
        }
    }
}

pub fn random_unramified_place(r: &mut TestRng, g: &FiniteGroup, label: &str, q: u64) -> BadPlaceData {
    BadPlaceData::unramified(label, q, g, r.gen_range(0..g.order()))
}

/// `M^H` as a basis and the action of `frob` on it.
pub fn invariant_fiber(m: &GLattice, h: &Subgroup, frob: usize) -> (IntMatrix, FinAbFrob) {
    let b = m.invariants(h);
    let image = m.action(frob).mul(&b);
    let cols: Vec<Vec<BigInt>> = (0..b.cols())
        .map(|j| b.solve_integer(&image.col(j)).expect("invariants are stable"))
        .collect();
    let phi = IntMatrix::from_cols(&cols, b.cols());
    let order = m.group().element_order(frob);
    (b, FinAbFrob::free(phi, order).expect("finite order"))
}

pub const SMALL_PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Random torsion-free sheaf over `Spec Z` with at most three listed
/// places. Fibers are zero, `M^{I_v}`, or `M^{I_v}` with the
/// specialization scaled by 2 (injective, not saturated).
pub fn random_sheaf(r: &mut TestRng, g: &Arc<FiniteGroup>, max_rank: usize) -> TfSheafData {
    let generic = random_lattice(r, g, max_rank);
    let mut primes = SMALL_PRIMES.to_vec();
    primes.shuffle(r);
    let count = r.gen_range(0..=3);
    let mut labels: Vec<u64> = primes[..count].to_vec();
    labels.sort_unstable();
    let bad = labels
        .into_iter()
        .map(|p| {
            let place = random_place(r, g, &p.to_string(), p);
            let (b, fiber) = invariant_fiber(&generic, &place.inertia, place.frobenius);
            let (fiber, specialization) = match r.gen_range(0..3) {
                0 => (FinAbFrob::zero(), IntMatrix::zeros(generic.rank(), 0)),
                1 => (fiber, b),
                _ => (fiber, b.scale(&BigInt::from(2))),
            };
            SheafPlace {
                place,
                fiber,
                specialization,
            }
        })
        .collect();
    let f = TfSheafData {
        group: g.clone(),
        base: Base::Rationals,
        generic,
        arch: Vec::new(),
        bad,
        fields: Vec::new(),
    };
    debug_assert!(f.validate().is_ok());
    f
}

/// Companion matrix of the monic integer polynomial with the given
/// lower coefficients `c_0, ..., c_{n-1}`.
fn companion(c: &[i64]) -> IntMatrix {
    let n = c.len();
    let mut m = IntMatrix::zeros(n, n);
    for i in 1..n {
        m.set(i, i - 1, BigInt::from(1));
    }
    for (i, &ci) in c.iter().enumerate() {
        m.set(i, n - 1, BigInt::from(-ci));
    }
    m
}

/// `(d, coefficients of Φ_d)` for the cyclotomic polynomials of degree at
/// most 4 with `d <= 12`.
const CYCLOTOMIC: [(usize, &[i64]); 9] = [
    (1, &[-1]),
    (2, &[1]),
    (3, &[1, 1]),
    (4, &[1, 0]),
    (6, &[1, -1]),
    (5, &[1, 1, 1, 1]),
    (8, &[1, 0, 0, 0]),
    (10, &[1, -1, 1, -1]),
    (12, &[1, 0, -1, 0]),
];

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A random invertible integer matrix of finite order: blocks of
/// cyclotomic companion matrices and permutation matrices, conjugated by a
/// unimodular matrix. Returns the matrix and its order.
pub fn random_finite_order_matrix(r: &mut TestRng, max_rank: usize, max_order: usize) -> (IntMatrix, usize) {
    loop {
        let n = r.gen_range(1..=max_rank);
        let mut m = IntMatrix::zeros(0, 0);
        let mut order = 1usize;
        while m.rows() < n {
            let room = n - m.rows();
            let (block, d) = if r.gen_bool(0.25) && room >= 2 {
                let k = r.gen_range(2..=room);
                let mut p = IntMatrix::zeros(k, k);
                for i in 0..k {
                    p.set((i + 1) % k, i, BigInt::from(1));
                }
                (p, k)
            } else {
                let fits: Vec<&(usize, &[i64])> = CYCLOTOMIC.iter().filter(|(_, c)| c.len() <= room).collect();
                let (d, c) = **fits.choose(r).expect("degree one fits");
                (companion(c), d)
            };
            m = m.block_diag(&block);
            order = order / gcd(order, d) * d;
        }
        if order <= max_order {
            let p = random_unimodular(r, n);
            let pinv = p.inverse_unimodular().expect("unimodular");
            return (p.mul(&m).mul(&pinv), order);
        }
    }
}

/// A random finite module with Frobenius: a free part with finite-order
/// action, optionally plus a torsion summand `Z/n` on which Frobenius
/// acts by a unit, and a shear mixing the free part into the torsion.
pub fn random_point_module(r: &mut TestRng, max_rank: usize, max_order: usize) -> FinAbFrob {
    let (phi, order) = random_finite_order_matrix(r, max_rank, max_order);
    if r.gen_bool(0.5) {
        return FinAbFrob::free(phi, order).expect("finite order");
    }
    let n = phi.rows();
    let t = *[2i64, 3, 4, 6].choose(r).expect("nonempty");
    let mut rel = IntMatrix::zeros(n + 1, 1);
    rel.set(n, 0, BigInt::from(t));
    let mut full = phi.block_diag(&IntMatrix::identity(1));
    let unit = if r.gen_bool(0.5) { 1 } else { t - 1 };
    full.set(n, n, BigInt::from(unit));
    for j in 0..n {
        full.set(n, j, BigInt::from(r.gen_range(0..t)));
    }
    // The torsion unit has order at most 2; the shear may raise the order
    // by a factor dividing t.
    for k in 1..=4 * t as usize {
        let total = order * k;
        if let Ok(a) = FinAbFrob::new(rel.clone(), full.clone(), total) {
            return a;
        }
    }
    FinAbFrob::free(phi, order).expect("finite order")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_reproduce() {
        let a = random_sheaf(&mut rng(7), &small_group(&mut rng(7)), 4);
        let b = random_sheaf(&mut rng(7), &small_group(&mut rng(7)), 4);
        assert_eq!(a, b);
    }

    #[test]
    fn generated_data_is_valid() {
        let mut r = rng(11);
        for _ in 0..40 {
            let g = small_group(&mut r);
            let f = random_sheaf(&mut r, &g, 4);
            f.validate().unwrap();
            assert!(f.generic.rank() <= 4 && f.bad.len() <= 3);
            let (m, k) = random_finite_order_matrix(&mut r, 4, 12);
            assert!(m.pow(k).is_identity() && k <= 12);
            let _ = random_point_module(&mut r, 4, 12);
        }
    }
}
