//! Dense linear algebra over Q.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Solution set of `A x = b`.
#[derive(Clone, Debug)]
pub struct Solution {
    pub particular: Vec<Q>,
    /// Basis of the null space of `A`.
    pub kernel: Vec<Vec<Q>>,
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `A x = b` exactly; `None` when inconsistent.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Solution> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut particular = vec![Q::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = aug[i][cols].clone();
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = -aug[i][f].clone();
            }
            v
        })
        .collect();
    Some(Solution { particular, kernel })
}

pub fn rank(a: &[Vec<Q>]) -> usize {
    let mut m = a.to_vec();
    rref(&mut m).len()
}

pub fn mat_vec(a: &[Vec<Q>], x: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(u, v)| u * v).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_solution() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let s = solve(&a, &[q(3), q(5)]).unwrap();
        assert_eq!(s.particular, vec![qr(4, 5), qr(7, 5)]);
        assert!(s.kernel.is_empty());
    }

    #[test]
    fn inconsistent_and_underdetermined() {
        let a = vec![vec![q(1), q(1)], vec![q(2), q(2)]];
        assert!(solve(&a, &[q(1), q(3)]).is_none());
        let s = solve(&a, &[q(1), q(2)]).unwrap();
        assert_eq!(s.kernel.len(), 1);
        assert_eq!(mat_vec(&a, &s.particular), vec![q(1), q(2)]);
        assert_eq!(rank(&a), 1);
    }
}
