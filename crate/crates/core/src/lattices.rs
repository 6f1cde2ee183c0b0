//! Exact integer linear algebra: matrices over Z, Smith normal form with
//! transforms, lattices with a finite group action, and finitely generated
//! abelian groups carrying a Frobenius automorphism.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{structural, Error, Result};
use crate::groups::{ClassFunction, FiniteGroup, Subgroup};
use crate::qlinalg::Q;

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{:?}", self.to_rows())
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn scalar(n: usize, c: i64) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::from(c);
        }
        m
    }

    /// Builds from rows; `cols` fixes the width when there are no rows.
    pub fn from_rows_with_cols(rows: &[Vec<i64>], cols: usize) -> Result<IntMatrix> {
        let data: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        IntMatrix::from_big_rows(data, cols)
    }

    /// Builds from non-empty rows of equal length.
    pub fn from_rows(rows: &[Vec<i64>]) -> IntMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        IntMatrix::from_rows_with_cols(rows, cols).expect("ragged rows")
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Result<IntMatrix> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(structural(format!("row {i} has {} entries, expected {cols}", r.len())));
            }
            data.extend(r);
        }
        Ok(IntMatrix { rows: n, cols, data })
    }

    pub fn diagonal(entries: &[BigInt]) -> IntMatrix {
        let n = entries.len();
        let mut m = IntMatrix::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    fn at(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    /// Rows as machine integers; fails when an entry overflows `i64`.
    pub fn to_i64_rows(&self) -> Result<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| {
                        x.to_i64()
                            .ok_or_else(|| Error::Range(format!("matrix entry {x} exceeds 64 bits")))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn from_cols(cols: &[Vec<BigInt>], rows: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn mul(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut m = IntMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        *m.at(i, j) += a * b;
                    }
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn add(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn pow(&self, k: usize) -> IntMatrix {
        assert!(self.is_square());
        let mut acc = IntMatrix::identity(self.rows);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == IntMatrix::identity(self.rows)
    }

    /// `[self | o]`.
    pub fn hstack(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, o.rows);
        let mut m = IntMatrix::zeros(self.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..o.cols {
                m.set(i, self.cols + j, o.get(i, j).clone());
            }
        }
        m
    }

    /// `[self ; o]`.
    pub fn vstack(&self, o: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, o.cols);
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        IntMatrix {
            rows: self.rows + o.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn block_diag(&self, o: &IntMatrix) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows + o.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..o.rows {
            for j in 0..o.cols {
                m.set(self.rows + i, self.cols + j, o.get(i, j).clone());
            }
        }
        m
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut m = IntMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).sum()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.to_rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(p) => {
                        a.swap(k, p);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square() && self.det().abs().is_one()
    }

    pub fn rank(&self) -> usize {
        self.smith().rank()
    }

    /// Smith normal form `U * self * V = D`.
    pub fn smith(&self) -> Smith {
        Smith::compute(self)
    }

    /// Integer solution of `self * x = b`, if one exists.
    pub fn solve_integer(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        self.smith().solve(b)
    }

    /// Rational entries, for use with [`crate::qlinalg`].
    pub fn to_q_rows(&self) -> Vec<Vec<Q>> {
        self.to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(Q::from_integer).collect())
            .collect()
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        if !self.is_unimodular() {
            return Err(structural("matrix is not invertible over Z"));
        }
        let s = self.smith();
        // U A V = D with D = diag(+-1) hence A^-1 = V D U.
        Ok(s.v.mul(&s.d_matrix()).mul(&s.u))
    }

    /// Characteristic polynomial `det(x I - A)`, constant term first.
    pub fn charpoly(&self) -> Vec<BigInt> {
        assert!(self.is_square());
        let n = self.rows;
        // Faddeev-LeVerrier over Q; all divisions are exact.
        let a = self.to_q_rows();
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m = vec![vec![Q::zero(); n]; n];
        for k in 1..=n {
            for (i, row) in m.iter_mut().enumerate() {
                row[i] += &coeffs[n - k + 1];
            }
            let am: Vec<Vec<Q>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).map(|l| &a[i][l] * &m[l][j]).sum())
                        .collect()
                })
                .collect();
            let tr: Q = (0..n).map(|i| am[i][i].clone()).sum();
            coeffs[n - k] = -tr / Q::from_integer(BigInt::from(k));
            m = am;
        }
        coeffs
            .into_iter()
            .map(|c| {
                assert!(c.is_integer());
                c.to_integer()
            })
            .collect()
    }

    /// Smallest `k >= 1` with `A^k = I`, searching up to `max`.
    pub fn multiplicative_order(&self, max: usize) -> Option<usize> {
        if !self.is_square() {
            return None;
        }
        let mut p = self.clone();
        for k in 1..=max {
            if p.is_identity() {
                return Some(k);
            }
            p = p.mul(self);
        }
        None
    }
}

/// Smith normal form data: `u * m * v = d` with `u`, `v` unimodular and
/// `d` diagonal with nonnegative divisibility-ordered entries.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    /// Diagonal entries, `min(rows, cols)` of them; trailing zeros past
    /// the rank.
    pub diag: Vec<BigInt>,
    rows: usize,
    cols: usize,
}

impl Smith {
    fn compute(m: &IntMatrix) -> Smith {
        let (rows, cols) = (m.rows, m.cols);
        let mut st = SmithState {
            a: m.clone(),
            u: IntMatrix::identity(rows),
            u_inv: IntMatrix::identity(rows),
            v: IntMatrix::identity(cols),
            v_inv: IntMatrix::identity(cols),
        };
        let n = rows.min(cols);
        for t in 0..n {
            if !st.place_pivot(t) {
                break;
            }
            loop {
                st.clear_cross(t);
                match st.find_non_divisible(t) {
                    Some(i) => st.add_row(t, i, &BigInt::one()),
                    None => break,
                }
            }
            if st.a.get(t, t).is_negative() {
                st.negate_row(t);
            }
        }
        let diag = (0..n).map(|i| st.a.get(i, i).clone()).collect();
        Smith {
            u: st.u,
            u_inv: st.u_inv,
            v: st.v,
            v_inv: st.v_inv,
            diag,
            rows,
            cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|d| !d.is_zero()).count()
    }

    pub fn d_matrix(&self) -> IntMatrix {
        let mut d = IntMatrix::zeros(self.rows, self.cols);
        for (i, x) in self.diag.iter().enumerate() {
            d.set(i, i, x.clone());
        }
        d
    }

    /// Nonzero invariant factors different from 1.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diag
            .iter()
            .filter(|d| !d.is_zero() && !d.is_one())
            .cloned()
            .collect()
    }

    /// Rank of the cokernel's free part.
    pub fn coker_free_rank(&self) -> usize {
        self.rows - self.rank()
    }

    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let ub = self.u.mul_vec(b);
        let mut y = vec![BigInt::zero(); self.cols];
        for (i, x) in ub.iter().enumerate() {
            let d = self.diag.get(i).cloned().unwrap_or_else(BigInt::zero);
            if d.is_zero() {
                if !x.is_zero() {
                    return None;
                }
            } else {
                let (qq, r) = x.div_rem(&d);
                if !r.is_zero() {
                    return None;
                }
                y[i] = qq;
            }
        }
        Some(self.v.mul_vec(&y))
    }

    /// Image-membership test for the column space over Z.
    pub fn in_image(&self, b: &[BigInt]) -> bool {
        self.solve(b).is_some()
    }

    /// Basis of the integer kernel as columns.
    pub fn kernel(&self) -> IntMatrix {
        let r = self.rank();
        let cols: Vec<Vec<BigInt>> = (r..self.cols).map(|j| self.v.col(j)).collect();
        IntMatrix::from_cols(&cols, self.cols)
    }
}

struct SmithState {
    a: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl SmithState {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for m in [&mut self.a, &mut self.u] {
            for c in 0..m.cols {
                m.data.swap(i * m.cols + c, j * m.cols + c);
            }
        }
        let ui = &mut self.u_inv;
        for r in 0..ui.rows {
            ui.data.swap(r * ui.cols + i, r * ui.cols + j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for m in [&mut self.a, &mut self.v] {
            for r in 0..m.rows {
                m.data.swap(r * m.cols + i, r * m.cols + j);
            }
        }
        let vi = &mut self.v_inv;
        for c in 0..vi.cols {
            vi.data.swap(i * vi.cols + c, j * vi.cols + c);
        }
    }

    /// `row_i += c * row_j`.
    fn add_row(&mut self, i: usize, j: usize, c: &BigInt) {
        for m in [&mut self.a, &mut self.u] {
            for k in 0..m.cols {
                let delta = c * m.get(j, k);
                *m.at(i, k) += delta;
            }
        }
        let ui = &mut self.u_inv;
        for r in 0..ui.rows {
            let delta = c * ui.get(r, i);
            *ui.at(r, j) -= delta;
        }
    }

    /// `col_i += c * col_j`.
    fn add_col(&mut self, i: usize, j: usize, c: &BigInt) {
        for m in [&mut self.a, &mut self.v] {
            for r in 0..m.rows {
                let delta = c * m.get(r, j);
                *m.at(r, i) += delta;
            }
        }
        let vi = &mut self.v_inv;
        for k in 0..vi.cols {
            let delta = c * vi.get(i, k);
            *vi.at(j, k) -= delta;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for m in [&mut self.a, &mut self.u] {
            for k in 0..m.cols {
                let x = -m.get(i, k).clone();
                m.set(i, k, x);
            }
        }
        let ui = &mut self.u_inv;
        for r in 0..ui.rows {
            let x = -ui.get(r, i).clone();
            ui.set(r, i, x);
        }
    }

    /// Moves the smallest nonzero entry of the trailing block to `(t, t)`.
    fn place_pivot(&mut self, t: usize) -> bool {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.a.rows {
            for j in t..self.a.cols {
                let x = self.a.get(i, j);
                if !x.is_zero()
                    && best.is_none_or(|(bi, bj)| x.abs() < self.a.get(bi, bj).abs())
                {
                    best = Some((i, j));
                }
            }
        }
        match best {
            Some((i, j)) => {
                self.swap_rows(t, i);
                self.swap_cols(t, j);
                true
            }
            None => false,
        }
    }

    /// Clears row `t` and column `t` outside the pivot.
    fn clear_cross(&mut self, t: usize) {
        loop {
            let mut dirty = false;
            for i in t + 1..self.a.rows {
                if self.a.get(i, t).is_zero() {
                    continue;
                }
                let qq = self.a.get(i, t).div_floor(self.a.get(t, t));
                self.add_row(i, t, &-qq);
                if !self.a.get(i, t).is_zero() {
                    self.swap_rows(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..self.a.cols {
                if self.a.get(t, j).is_zero() {
                    continue;
                }
                let qq = self.a.get(t, j).div_floor(self.a.get(t, t));
                self.add_col(j, t, &-qq);
                if !self.a.get(t, j).is_zero() {
                    self.swap_cols(t, j);
                    dirty = true;
                }
            }
            if !dirty {
                return;
            }
        }
    }

    fn find_non_divisible(&self, t: usize) -> Option<usize> {
        let p = self.a.get(t, t);
        for i in t + 1..self.a.rows {
            for j in t + 1..self.a.cols {
                if !self.a.get(i, j).is_multiple_of(p) {
                    return Some(i);
                }
            }
        }
        None
    }
}

/// A free lattice of finite rank with a linear action of a finite group.
#[derive(Clone, Debug)]
pub struct GLattice {
    group: Arc<FiniteGroup>,
    rank: usize,
    action: Vec<IntMatrix>,
}

impl PartialEq for GLattice {
    fn eq(&self, other: &Self) -> bool {
        *self.group == *other.group && self.rank == other.rank && self.action == other.action
    }
}

impl Eq for GLattice {}

impl GLattice {
    /// Validates determinants and the homomorphism property.
    pub fn new(group: Arc<FiniteGroup>, rank: usize, action: Vec<IntMatrix>) -> Result<GLattice> {
        if action.len() != group.order() {
            return Err(structural(format!(
                "{} action matrices for a group of order {}",
                action.len(),
                group.order()
            )));
        }
        for (g, m) in action.iter().enumerate() {
            if m.rows() != rank || m.cols() != rank {
                return Err(structural(format!("action matrix {g} is not {rank}x{rank}")));
            }
            if !m.is_unimodular() {
                return Err(structural(format!("action matrix {g} has determinant not +-1")));
            }
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                if action[a].mul(&action[b]) != action[group.mul(a, b)] {
                    return Err(structural(format!(
                        "action is not a homomorphism at elements {a} and {b}"
                    )));
                }
            }
        }
        Ok(GLattice { group, rank, action })
    }

    pub fn trivial(group: Arc<FiniteGroup>, rank: usize) -> GLattice {
        let action = vec![IntMatrix::identity(rank); group.order()];
        GLattice { group, rank, action }
    }

    /// Rank-one lattice on which `g` acts by `sign(g)`.
    pub fn from_sign(group: Arc<FiniteGroup>, sign: impl Fn(usize) -> i64) -> Result<GLattice> {
        let action = (0..group.order()).map(|g| IntMatrix::scalar(1, sign(g))).collect();
        GLattice::new(group, 1, action)
    }

    /// Lattice determined by the images of group generators; the images
    /// are extended multiplicatively along a breadth-first word search.
    pub fn from_generator_images(
        group: Arc<FiniteGroup>,
        rank: usize,
        gens: &[(usize, IntMatrix)],
    ) -> Result<GLattice> {
        let mut action: Vec<Option<IntMatrix>> = vec![None; group.order()];
        action[group.identity()] = Some(IntMatrix::identity(rank));
        let mut queue = vec![group.identity()];
        let mut k = 0;
        while k < queue.len() {
            let x = queue[k];
            k += 1;
            for (g, m) in gens {
                let y = group.mul(*g, x);
                if action[y].is_none() {
                    action[y] = Some(m.mul(action[x].as_ref().expect("visited")));
                    queue.push(y);
                }
            }
        }
        let action = action
            .into_iter()
            .map(|m| m.ok_or_else(|| structural("generators do not generate the group")))
            .collect::<Result<Vec<_>>>()?;
        GLattice::new(group, rank, action)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn action(&self, g: usize) -> &IntMatrix {
        &self.action[g]
    }

    pub fn actions(&self) -> &[IntMatrix] {
        &self.action
    }

    /// Contragredient lattice, `g -> rho(g^-1)^T`.
    pub fn z_dual(&self) -> GLattice {
        let action = (0..self.group.order())
            .map(|g| self.action[self.group.inv(g)].transpose())
            .collect();
        GLattice {
            group: self.group.clone(),
            rank: self.rank,
            action,
        }
    }

    pub fn character(&self) -> ClassFunction {
        ClassFunction {
            values: self
                .group
                .conjugacy_classes()
                .iter()
                .map(|c| Q::from_integer(self.action[c[0]].trace()))
                .collect(),
        }
    }

    pub fn direct_sum(&self, o: &GLattice) -> GLattice {
        assert!(*self.group == *o.group, "direct sum over different groups");
        GLattice {
            group: self.group.clone(),
            rank: self.rank + o.rank,
            action: self
                .action
                .iter()
                .zip(&o.action)
                .map(|(a, b)| a.block_diag(b))
                .collect(),
        }
    }

    /// Stacked `rho(h) - I` over the members of `h`, as a map out of Y.
    fn stacked_differences(&self, h: &Subgroup) -> IntMatrix {
        let id = IntMatrix::identity(self.rank);
        h.members()
            .iter()
            .fold(IntMatrix::zeros(0, self.rank), |acc, &x| {
                acc.vstack(&self.action[x].sub(&id))
            })
    }

    /// Basis (as columns) of the fixed sublattice `Y^H`.
    pub fn invariants(&self, h: &Subgroup) -> IntMatrix {
        self.stacked_differences(h).smith().kernel()
    }

    /// Coinvariants `Y_H`, carrying the Frobenius `rho(frob)` when given.
    pub fn coinvariants(&self, h: &Subgroup, frob: Option<usize>) -> Result<FinAbFrob> {
        let id = IntMatrix::identity(self.rank);
        let relations = h
            .members()
            .iter()
            .fold(IntMatrix::zeros(self.rank, 0), |acc, &x| {
                acc.hstack(&self.action[x].sub(&id))
            });
        let (phi, order) = match frob {
            Some(f) => (self.action[f].clone(), self.group.element_order(f)),
            None => (id, 1),
        };
        let a = FinAbFrob::new(relations, phi, order).map_err(|e| match e {
            Error::Structural(_) => Error::FrobeniusIncompatible,
            other => other,
        })?;
        Ok(a.reduced())
    }

    /// Restriction to a subgroup, as a lattice over the subgroup viewed as
    /// a group (element `i` of the subgroup group is `h.members()[i]`).
    pub fn restrict(&self, h: &Subgroup) -> GLattice {
        let (hg, emb) = self.group.subgroup_as_group(h);
        GLattice {
            group: Arc::new(hg),
            rank: self.rank,
            action: emb.iter().map(|&g| self.action[g].clone()).collect(),
        }
    }

    /// Induction `Ind_H^G W`, where `w` is a lattice over `H` viewed as a
    /// group through [`FiniteGroup::subgroup_as_group`].
    ///
    /// Basis vectors are `r_j (x) w_k` for the coset representatives
    /// `r_j` (minimal elements of the left cosets), ordered by `j` then `k`.
    pub fn induce(group: &Arc<FiniteGroup>, h: &Subgroup, w: &GLattice) -> Result<GLattice> {
        if w.group.order() != h.order()
            || h
                .members()
                .iter()
                .enumerate()
                .any(|(i, &g)| w.group.element(i) != group.element(g))
        {
            return Err(structural("module is not over the given subgroup"));
        }
        let cosets = group.left_cosets(h);
        let reps: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
        let m = reps.len();
        let r = w.rank;
        let local = |x: usize| h.members().binary_search(&x).ok();
        let mut action = Vec::with_capacity(group.order());
        for g in 0..group.order() {
            let mut mat = IntMatrix::zeros(m * r, m * r);
            for (j, &rj) in reps.iter().enumerate() {
                let grj = group.mul(g, rj);
                let i = cosets
                    .iter()
                    .position(|c| c.binary_search(&grj).is_ok())
                    .expect("cosets partition the group");
                let hh = group.mul(group.inv(reps[i]), grj);
                let block = &w.action[local(hh).expect("element of the subgroup")];
                for a in 0..r {
                    for b in 0..r {
                        mat.set(i * r + a, j * r + b, block.get(a, b).clone());
                    }
                }
            }
            action.push(mat);
        }
        Ok(GLattice {
            group: group.clone(),
            rank: m * r,
            action,
        })
    }

    /// Permutation lattice `Z[G/H]`.
    pub fn permutation(group: &Arc<FiniteGroup>, h: &Subgroup) -> GLattice {
        let (hg, _) = group.subgroup_as_group(h);
        let w = GLattice::trivial(Arc::new(hg), 1);
        GLattice::induce(group, h, &w).expect("trivial module over the subgroup")
    }
}

/// Finitely generated abelian group `Z^n / (M Z^k)`.
#[derive(Clone, Debug)]
pub struct FinAb {
    relations: IntMatrix,
    smith: OnceLock<Smith>,
}

impl PartialEq for FinAb {
    fn eq(&self, other: &Self) -> bool {
        self.relations == other.relations
    }
}

impl Eq for FinAb {}

impl FinAb {
    pub fn new(relations: IntMatrix) -> FinAb {
        FinAb {
            relations,
            smith: OnceLock::new(),
        }
    }

    pub fn free(n: usize) -> FinAb {
        FinAb::new(IntMatrix::zeros(n, 0))
    }

    /// `Z/d_1 + ... + Z/d_k` on `k` generators.
    pub fn cyclic_sum(orders: &[BigInt]) -> FinAb {
        FinAb::new(IntMatrix::diagonal(orders))
    }

    pub fn generators(&self) -> usize {
        self.relations.rows()
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn smith(&self) -> &Smith {
        self.smith.get_or_init(|| self.relations.smith())
    }

    pub fn free_rank(&self) -> usize {
        self.smith().coker_free_rank()
    }

    pub fn torsion_invariants(&self) -> Vec<BigInt> {
        self.smith().torsion()
    }

    pub fn torsion_order(&self) -> BigInt {
        self.torsion_invariants().iter().product()
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank() == 0 && self.torsion_invariants().is_empty()
    }

    /// Coordinates of the free quotient `A / tor`: the projection `P`
    /// (free rank x generators) and a section `L` (generators x free rank)
    /// with `P L = I`. These match the free block of
    /// [`FinAbFrob::reduced`].
    pub fn free_coordinates(&self) -> (IntMatrix, IntMatrix) {
        let s = self.smith();
        let n = self.generators();
        let free: Vec<usize> = (s.rank()..n).collect();
        let all: Vec<usize> = (0..n).collect();
        (s.u.select(&free, &all), s.u_inv.select(&all, &free))
    }

    /// Whether `x` is zero in the group.
    pub fn is_trivial_element(&self, x: &[BigInt]) -> bool {
        self.smith().in_image(x)
    }
}

/// A finitely generated abelian group with an automorphism `phi` of
/// declared finite order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinAbFrob {
    group: FinAb,
    phi: IntMatrix,
    order: usize,
}

impl FinAbFrob {
    /// Checks that `phi` preserves the relations and that `phi^order` is
    /// the identity on the group.
    pub fn new(relations: IntMatrix, phi: IntMatrix, order: usize) -> Result<FinAbFrob> {
        let n = relations.rows();
        if phi.rows() != n || phi.cols() != n {
            return Err(structural(format!("Frobenius must be {n}x{n}")));
        }
        if order == 0 {
            return Err(structural("Frobenius order must be positive"));
        }
        let g = FinAb::new(relations);
        let image = phi.mul(g.relations());
        for j in 0..image.cols() {
            if !g.is_trivial_element(&image.col(j)) {
                return Err(structural("Frobenius does not preserve the relations"));
            }
        }
        let diff = phi.pow(order).sub(&IntMatrix::identity(n));
        for j in 0..n {
            if !g.is_trivial_element(&diff.col(j)) {
                return Err(structural(format!("Frobenius^{order} is not the identity")));
            }
        }
        Ok(FinAbFrob { group: g, phi, order })
    }

    /// Free module `Z^n` with the given automorphism.
    pub fn free(phi: IntMatrix, order: usize) -> Result<FinAbFrob> {
        let n = phi.rows();
        FinAbFrob::new(IntMatrix::zeros(n, 0), phi, order)
    }

    pub fn zero() -> FinAbFrob {
        FinAbFrob {
            group: FinAb::free(0),
            phi: IntMatrix::zeros(0, 0),
            order: 1,
        }
    }

    /// `Z` with trivial Frobenius.
    pub fn z_trivial() -> FinAbFrob {
        FinAbFrob::free(IntMatrix::identity(1), 1).expect("Z with identity")
    }

    pub fn group(&self) -> &FinAb {
        &self.group
    }

    pub fn phi(&self) -> &IntMatrix {
        &self.phi
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn generators(&self) -> usize {
        self.group.generators()
    }

    pub fn free_rank(&self) -> usize {
        self.group.free_rank()
    }

    pub fn torsion_invariants(&self) -> Vec<BigInt> {
        self.group.torsion_invariants()
    }

    pub fn is_zero(&self) -> bool {
        self.group.is_zero()
    }

    pub fn is_free_presentation(&self) -> bool {
        self.group.relations().cols() == 0
    }

    /// Canonical Smith presentation: torsion generators `Z/d_i` first (in
    /// divisibility order, units dropped), then free generators, with the
    /// induced Frobenius. Torsion rows of the Frobenius are reduced into
    /// `[0, d_i)`.
    pub fn reduced(&self) -> FinAbFrob {
        let s = self.group.smith();
        let n = self.group.generators();
        let mut keep = Vec::new();
        let mut torsion = Vec::new();
        for i in 0..n {
            let d = s.diag.get(i).cloned().unwrap_or_else(BigInt::zero);
            if !d.is_one() {
                keep.push(i);
                if !d.is_zero() {
                    torsion.push(d);
                }
            }
        }
        let full = s.u.mul(&self.phi).mul(&s.u_inv);
        let mut phi = full.select(&keep, &keep);
        for (a, d) in torsion.iter().enumerate() {
            for b in 0..keep.len() {
                let x = phi.get(a, b).mod_floor(d);
                phi.set(a, b, x);
            }
        }
        let mut rel = IntMatrix::zeros(keep.len(), torsion.len());
        for (a, d) in torsion.iter().enumerate() {
            rel.set(a, a, d.clone());
        }
        FinAbFrob {
            group: FinAb::new(rel),
            phi,
            order: self.order,
        }
    }

    /// Frobenius on the free quotient `A / tor`, in the canonical basis of
    /// [`FinAbFrob::reduced`].
    pub fn free_frobenius(&self) -> IntMatrix {
        let r = self.reduced();
        let t = r.torsion_invariants().len();
        let idx: Vec<usize> = (t..r.generators()).collect();
        r.phi.select(&idx, &idx)
    }

    pub fn direct_sum(&self, o: &FinAbFrob) -> FinAbFrob {
        FinAbFrob {
            group: FinAb::new(self.group.relations().block_diag(o.group.relations())),
            phi: self.phi.block_diag(&o.phi),
            order: self.order.lcm(&o.order),
        }
    }

    /// The fixed subgroup `A^phi = S / R` with `S` the preimage of the
    /// relations under `phi - 1`. Returns a basis of `S` (columns) and the
    /// presentation of `A^phi` on that basis.
    pub fn fixed_part(&self) -> (IntMatrix, FinAb) {
        let n = self.generators();
        let rel = self.group.relations();
        let d = self.phi.sub(&IntMatrix::identity(n));
        let k = d.hstack(&rel.neg()).smith().kernel();
        let gens = k.select(&(0..n).collect::<Vec<_>>(), &(0..k.cols()).collect::<Vec<_>>());
        let basis = image_basis(&gens);
        let sb = basis.smith();
        let coords: Vec<Vec<BigInt>> = (0..rel.cols())
            .map(|j| sb.solve(&rel.col(j)).expect("relations lie in the preimage"))
            .collect();
        let pres = IntMatrix::from_cols(&coords, basis.cols());
        (basis, FinAb::new(pres))
    }

    /// The coinvariants `A_phi = Z^n / (R + (phi - 1) Z^n)`.
    pub fn coinvariant_part(&self) -> FinAb {
        let n = self.generators();
        let d = self.phi.sub(&IntMatrix::identity(n));
        FinAb::new(self.group.relations().hstack(&d))
    }

    /// Matrix of the map `A^phi / tor -> A_phi / tor` induced by inclusion
    /// followed by projection, in the free Smith coordinates of both sides.
    pub fn fixed_to_coinvariant_free(&self) -> IntMatrix {
        let (basis, fixed) = self.fixed_part();
        let co = self.coinvariant_part();
        let fs = fixed.smith();
        let cs = co.smith();
        let fr = fs.rank();
        let cr = cs.rank();
        let src: Vec<usize> = (fr..fixed.generators()).collect();
        let dst: Vec<usize> = (cr..co.generators()).collect();
        let mut cols = Vec::new();
        for &j in &src {
            let lift = basis.mul_vec(&fs.u_inv.col(j));
            let image = cs.u.mul_vec(&lift);
            cols.push(dst.iter().map(|&i| image[i].clone()).collect::<Vec<_>>());
        }
        IntMatrix::from_cols(&cols, dst.len())
    }
}

/// A basis (columns) of the column span of `m` over Z.
pub fn image_basis(m: &IntMatrix) -> IntMatrix {
    let s = m.smith();
    let r = s.rank();
    let mv = m.mul(&s.v);
    let idx: Vec<usize> = (0..r).collect();
    mv.select(&(0..m.rows()).collect::<Vec<_>>(), &idx)
}

/// Block-cycle matrix of rank `f * n`: `e_i -> e_{i+1}` for `i < f - 1`
/// and `e_{f-1} -> phi e_0`.
pub fn block_cycle(phi: &IntMatrix, f: usize) -> IntMatrix {
    let n = phi.rows();
    let mut m = IntMatrix::zeros(f * n, f * n);
    if f == 1 {
        return phi.clone();
    }
    for i in 0..f - 1 {
        for a in 0..n {
            m.set((i + 1) * n + a, i * n + a, BigInt::one());
        }
    }
    for a in 0..n {
        for b in 0..n {
            m.set(a, (f - 1) * n + b, phi.get(a, b).clone());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn smith_trivial_cases() {
        let z = IntMatrix::zeros(2, 3);
        let s = z.smith();
        assert_eq!(s.diag, big(&[0, 0]));
        assert!(s.u.is_identity() && s.v.is_identity());
        let s = IntMatrix::identity(3).smith();
        assert_eq!(s.diag, big(&[1, 1, 1]));
        let s = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]).smith();
        assert_eq!(s.diag, big(&[1, 6]));
    }

    #[test]
    fn smith_transforms_are_consistent() {
        let m = IntMatrix::from_rows(&[vec![4, -6, 2], vec![8, 3, 1], vec![0, 9, -3]]);
        let s = m.smith();
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d_matrix());
        assert!(s.u.mul(&s.u_inv).is_identity());
        assert!(s.v.mul(&s.v_inv).is_identity());
    }

    #[test]
    fn det_and_inverse() {
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(m.det(), BigInt::from(1));
        assert!(m.inverse_unimodular().unwrap().mul(&m).is_identity());
        let m = IntMatrix::from_rows(&[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 9]]);
        assert_eq!(m.det(), BigInt::from(-3));
    }

    #[test]
    fn charpoly_of_rotation() {
        let m = IntMatrix::from_rows(&[vec![0, -1], vec![1, 0]]);
        assert_eq!(m.charpoly(), big(&[1, 0, 1]));
        assert_eq!(m.multiplicative_order(12), Some(4));
    }

    fn z2() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(2))
    }

    fn sign_z2() -> GLattice {
        let g = z2();
        let id = g.identity();
        GLattice::from_sign(g, move |x| if x == id { 1 } else { -1 }).unwrap()
    }

    fn swap_z2() -> GLattice {
        let g = z2();
        GLattice::permutation(&g, &g.trivial_subgroup())
    }

    #[test]
    fn invariants_examples() {
        let g = z2();
        assert_eq!(sign_z2().invariants(&g.whole()).cols(), 0);
        assert_eq!(GLattice::trivial(g.clone(), 3).invariants(&g.whole()).cols(), 3);
        let inv = swap_z2().invariants(&g.whole());
        assert_eq!(inv.cols(), 1);
        assert_eq!(inv.get(0, 0).abs(), BigInt::one());
        assert_eq!(inv.get(0, 0), inv.get(1, 0));
    }

    #[test]
    fn coinvariants_examples() {
        let g = z2();
        let c = sign_z2().coinvariants(&g.whole(), None).unwrap();
        assert_eq!(c.torsion_invariants(), big(&[2]));
        assert_eq!(c.free_rank(), 0);
        let c = GLattice::trivial(g.clone(), 2).coinvariants(&g.whole(), None).unwrap();
        assert_eq!((c.free_rank(), c.torsion_invariants().len()), (2, 0));
        let c = swap_z2().coinvariants(&g.whole(), None).unwrap();
        assert_eq!((c.free_rank(), c.torsion_invariants().len()), (1, 0));
    }

    #[test]
    fn frobenius_incompatible_with_inertia() {
        // S3 permuting three letters: inertia <(0 1)>, Frobenius a 3-cycle
        // that does not normalize it.
        let g = Arc::new(FiniteGroup::symmetric(3));
        let y = GLattice::permutation(&g, &g.trivial_subgroup());
        let t = (0..6).find(|&x| g.element_order(x) == 2).unwrap();
        let r = (0..6).find(|&x| g.element_order(x) == 3).unwrap();
        let inertia = g.generated_subgroup(&[t]);
        // Coinvariants of the regular module under a non-normal subgroup
        // are still preserved by some elements; the 3-cycle is not one.
        let res = y.coinvariants(&inertia, Some(r));
        assert!(matches!(res, Err(Error::FrobeniusIncompatible)));
        assert!(y.coinvariants(&inertia, Some(t)).is_ok());
    }

    #[test]
    fn z_dual_involution_and_characters() {
        let g = Arc::new(FiniteGroup::symmetric(3));
        let y = GLattice::permutation(&g, &g.cyclic_subgroups()[1]);
        assert_eq!(y.z_dual(), y);
        let s = sign_z2();
        assert_eq!(s.z_dual(), s);
        assert_eq!(s.character(), ClassFunction::from_integers(&[1, -1]));
        assert_eq!(swap_z2().character(), ClassFunction::from_integers(&[2, 0]));
        assert_eq!(
            GLattice::trivial(z2(), 3).character(),
            ClassFunction::from_integers(&[3, 3])
        );
    }

    #[test]
    fn induction_examples() {
        let g = Arc::new(FiniteGroup::symmetric(3));
        for h in g.cyclic_subgroups() {
            let p = GLattice::permutation(&g, &h);
            assert_eq!(p.rank(), 6 / h.order());
            assert_eq!(p.character(), g.induced_trivial_character(&h).unwrap());
        }
        let y = sign_z2();
        let whole = y.group().whole();
        let ind = GLattice::induce(y.group(), &whole, &y.restrict(&whole)).unwrap();
        assert_eq!(ind, y);
    }

    #[test]
    fn fixed_and_coinvariant_parts() {
        // Z^2 with the swap: fixed Z(1,1), coinvariants Z, map has index 2.
        let a = FinAbFrob::free(IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]), 2).unwrap();
        let (_, fixed) = a.fixed_part();
        assert_eq!(fixed.free_rank(), 1);
        let iota = a.fixed_to_coinvariant_free();
        assert_eq!(iota.det().abs(), BigInt::from(2));
        // Z/6 with phi = -1: fixed Z/2, coinvariants Z/2.
        let a = FinAbFrob::new(IntMatrix::from_rows(&[vec![6]]), IntMatrix::from_rows(&[vec![-1]]), 2)
            .unwrap();
        assert_eq!(a.fixed_part().1.torsion_invariants(), big(&[2]));
        assert_eq!(a.coinvariant_part().torsion_invariants(), big(&[2]));
    }

    #[test]
    fn block_cycle_order() {
        let m = block_cycle(&IntMatrix::identity(1), 2);
        assert_eq!(m, IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]));
        let m = block_cycle(&IntMatrix::scalar(1, -1), 3);
        assert_eq!(m.multiplicative_order(12), Some(6));
    }
}
