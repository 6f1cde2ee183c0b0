//! Finite permutation groups, conjugacy data, rational class functions and
//! the Artin induction solver.
//!
//! Groups are stored as explicit element lists. Element `i` of a group is
//! addressed by its index; the multiplication table, inverses and
//! conjugacy classes are computed once at construction. Composition follows
//! the functional convention `(g * h)(x) = g(h(x))`.
//!
//! # Text format
//!
//! ```text
//! # comment
//! degree 3
//! ()
//! (0 1)
//! [1 2 0]
//! ```
//!
//! The first non-comment line is `degree n`; every following line is one
//! group element written either in cycle notation (`(0 1)(2 3)`, `()` for
//! the identity) or in image notation (`[1 2 0]`, the images of `0..n`).
//! The listed elements must form the whole group; their order fixes the
//! element indices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{structural, Error, Result};
use crate::qlinalg::{self, Q};

/// A permutation of `{0, .., degree - 1}` in image notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(degree: usize) -> Perm {
        Perm((0..degree).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(structural(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Perm> {
        let mut p: Vec<usize> = (0..degree).collect();
        let mut used = vec![false; degree];
        for c in cycles {
            for (k, &x) in c.iter().enumerate() {
                if x >= degree || used[x] {
                    return Err(structural(format!("bad cycle {c:?} on {degree} letters")));
                }
                used[x] = true;
                p[x] = c[(k + 1) % c.len()];
            }
        }
        Ok(Perm(p))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut r = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            r[x] = i;
        }
        Perm(r)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] == start {
                continue;
            }
            let mut c = vec![start];
            seen[start] = true;
            let mut x = self.0[start];
            while x != start {
                seen[x] = true;
                c.push(x);
                x = self.0[x];
            }
            out.push(c);
        }
        out
    }

    /// Parses `()`, `(0 1)(2 3)` or `[1 0 2]`.
    pub fn parse(degree: usize, s: &str) -> Result<Perm> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse(format!("unterminated image list {s:?}")))?;
            let images = parse_numbers(inner)?;
            if images.len() != degree {
                return Err(Error::Parse(format!(
                    "image list {s:?} has {} entries, expected {degree}",
                    images.len()
                )));
            }
            return Perm::from_images(images);
        }
        let mut cycles = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let r = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {s:?}")))?;
            let close = r
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unterminated cycle in {s:?}")))?;
            let c = parse_numbers(&r[..close])?;
            if !c.is_empty() {
                cycles.push(c);
            }
            rest = r[close + 1..].trim_start();
        }
        Perm::from_cycles(degree, &cycles)
    }
}

fn parse_numbers(s: &str) -> Result<Vec<usize>> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad point {t:?}")))
        })
        .collect()
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// A finite group given by an explicit list of permutations.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    degree: usize,
    elements: Vec<Perm>,
    identity: usize,
    table: Vec<usize>,
    inverse: Vec<usize>,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements == other.elements
    }
}

impl Eq for FiniteGroup {}

impl FiniteGroup {
    /// Builds a group from its full element list, checking the axioms.
    pub fn from_elements(degree: usize, elements: Vec<Perm>) -> Result<FiniteGroup> {
        if degree == 0 {
            return Err(structural("degree must be positive"));
        }
        if elements.is_empty() {
            return Err(structural("a group has at least one element"));
        }
        let mut index = BTreeMap::new();
        for (i, p) in elements.iter().enumerate() {
            if p.degree() != degree {
                return Err(structural(format!("element {i} acts on {} letters", p.degree())));
            }
            if index.insert(p.clone(), i).is_some() {
                return Err(structural(format!("element {p} listed twice")));
            }
        }
        let id = Perm::identity(degree);
        let identity = *index
            .get(&id)
            .ok_or_else(|| structural("identity axiom fails: identity missing"))?;
        let n = elements.len();
        let mut table = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let prod = elements[i].compose(&elements[j]);
                table[i * n + j] = *index.get(&prod).ok_or_else(|| {
                    structural(format!(
                        "closure axiom fails: {} * {} = {prod} is not listed",
                        elements[i], elements[j]
                    ))
                })?;
            }
        }
        let mut inverse = vec![0; n];
        for (i, p) in elements.iter().enumerate() {
            inverse[i] = *index
                .get(&p.inverse())
                .ok_or_else(|| structural(format!("inverse axiom fails for {p}")))?;
        }
        let mut g = FiniteGroup {
            degree,
            elements,
            identity,
            table,
            inverse,
            classes: Vec::new(),
            class_of: Vec::new(),
        };
        g.compute_classes();
        Ok(g)
    }

    /// Closure of the generators, enumerated breadth-first from the identity.
    pub fn generated_by(degree: usize, generators: &[Perm]) -> Result<FiniteGroup> {
        let id = Perm::identity(degree);
        let mut elements = vec![id.clone()];
        let mut seen: BTreeSet<Perm> = BTreeSet::from([id]);
        let mut k = 0;
        while k < elements.len() {
            for s in generators {
                if s.degree() != degree {
                    return Err(structural("generator of the wrong degree"));
                }
                let next = s.compose(&elements[k]);
                if seen.insert(next.clone()) {
                    elements.push(next);
                }
            }
            k += 1;
        }
        FiniteGroup::from_elements(degree, elements)
    }

    pub fn trivial() -> FiniteGroup {
        FiniteGroup::from_elements(1, vec![Perm::identity(1)]).expect("trivial group")
    }

    /// Cyclic group of order `n` acting regularly on `n` letters.
    pub fn cyclic(n: usize) -> FiniteGroup {
        if n == 1 {
            return FiniteGroup::trivial();
        }
        let gen = Perm((0..n).map(|i| (i + 1) % n).collect());
        FiniteGroup::generated_by(n, &[gen]).expect("cyclic group")
    }

    pub fn symmetric(n: usize) -> FiniteGroup {
        if n == 1 {
            return FiniteGroup::trivial();
        }
        let swap = Perm::from_cycles(n, &[vec![0, 1]]).expect("transposition");
        let cycle = Perm((0..n).map(|i| (i + 1) % n).collect());
        FiniteGroup::generated_by(n, &[swap, cycle]).expect("symmetric group")
    }

    /// Z/2 x Z/2 acting on 4 letters.
    pub fn klein_four() -> FiniteGroup {
        let a = Perm::from_cycles(4, &[vec![0, 1]]).expect("perm");
        let b = Perm::from_cycles(4, &[vec![2, 3]]).expect("perm");
        FiniteGroup::generated_by(4, &[a, b]).expect("klein four")
    }

    pub fn parse_text(text: &str) -> Result<FiniteGroup> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty group record".into()))?;
        let degree = header
            .strip_prefix("degree")
            .and_then(|d| d.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse(format!("expected 'degree n', got {header:?}")))?;
        let elements = lines
            .map(|l| Perm::parse(degree, l))
            .collect::<Result<Vec<_>>>()?;
        FiniteGroup::from_elements(degree, elements)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("degree {}\n", self.degree);
        for e in &self.elements {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    fn compute_classes(&mut self) {
        let n = self.order();
        let mut class_of = vec![usize::MAX; n];
        let mut classes = Vec::new();
        for g in 0..n {
            if class_of[g] != usize::MAX {
                continue;
            }
            let mut members: BTreeSet<usize> = BTreeSet::new();
            for x in 0..n {
                members.insert(self.conj(x, g));
            }
            let id = classes.len();
            for &m in &members {
                class_of[m] = id;
            }
            classes.push(members.into_iter().collect::<Vec<_>>());
        }
        self.classes = classes;
        self.class_of = class_of;
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Perm {
        &self.elements[i]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.elements.iter().position(|e| e == p)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// `x g x^-1`.
    pub fn conj(&self, x: usize, g: usize) -> usize {
        self.mul(self.mul(x, g), self.inv(x))
    }

    pub fn pow(&self, g: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, g))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn is_cyclic(&self) -> bool {
        (0..self.order()).any(|g| self.element_order(g) == self.order())
    }

    /// Conjugacy classes, ordered by their minimal element index.
    pub fn conjugacy_classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup {
            members: (0..self.order()).collect(),
        }
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup {
            members: vec![self.identity],
        }
    }

    /// Validates a member list as a subgroup.
    pub fn subgroup(&self, members: &[usize]) -> Result<Subgroup> {
        let set: BTreeSet<usize> = members.iter().copied().collect();
        if set.len() != members.len() {
            return Err(structural(format!("subgroup {members:?} repeats an element")));
        }
        if let Some(&bad) = set.iter().find(|&&m| m >= self.order()) {
            return Err(structural(format!("element index {bad} out of range")));
        }
        if !set.contains(&self.identity) {
            return Err(structural(format!("subgroup {members:?} misses the identity")));
        }
        for &a in &set {
            for &b in &set {
                if !set.contains(&self.mul(a, b)) {
                    return Err(structural(format!(
                        "subgroup {members:?} is not closed: {a} * {b} = {}",
                        self.mul(a, b)
                    )));
                }
            }
        }
        Ok(Subgroup {
            members: set.into_iter().collect(),
        })
    }

    pub fn generated_subgroup(&self, gens: &[usize]) -> Subgroup {
        let mut set: BTreeSet<usize> = BTreeSet::from([self.identity]);
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(g, x);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        Subgroup {
            members: set.into_iter().collect(),
        }
    }

    /// `g H g^-1`.
    pub fn conjugate_subgroup(&self, h: &Subgroup, g: usize) -> Subgroup {
        let mut m: Vec<usize> = h.members.iter().map(|&x| self.conj(g, x)).collect();
        m.sort_unstable();
        Subgroup { members: m }
    }

    pub fn intersect(&self, a: &Subgroup, b: &Subgroup) -> Subgroup {
        Subgroup {
            members: a
                .members
                .iter()
                .copied()
                .filter(|x| b.contains(*x))
                .collect(),
        }
    }

    pub fn is_normal_in(&self, n: &Subgroup, d: &Subgroup) -> bool {
        n.is_subset_of(d)
            && d.members
                .iter()
                .all(|&g| n.members.iter().all(|&x| n.contains(self.conj(g, x))))
    }

    pub fn are_conjugate(&self, a: &Subgroup, b: &Subgroup) -> bool {
        a.order() == b.order() && (0..self.order()).any(|g| &self.conjugate_subgroup(a, g) == b)
    }

    /// The lexicographically least conjugate of `h`.
    pub fn canonical_conjugate(&self, h: &Subgroup) -> Subgroup {
        (0..self.order())
            .map(|g| self.conjugate_subgroup(h, g))
            .min()
            .expect("nonempty group")
    }

    /// Left cosets `gH`, each sorted, listed by minimal representative.
    pub fn left_cosets(&self, h: &Subgroup) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for g in 0..self.order() {
            if seen[g] {
                continue;
            }
            let mut coset: Vec<usize> = h.members.iter().map(|&x| self.mul(g, x)).collect();
            coset.sort_unstable();
            for &c in &coset {
                seen[c] = true;
            }
            out.push(coset);
        }
        out
    }

    /// Double cosets `D g H`, listed by minimal representative.
    pub fn double_cosets(&self, d: &Subgroup, h: &Subgroup) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for g in 0..self.order() {
            if seen[g] {
                continue;
            }
            let mut set = BTreeSet::new();
            for &a in &d.members {
                for &b in &h.members {
                    set.insert(self.mul(self.mul(a, g), b));
                }
            }
            for &c in &set {
                seen[c] = true;
            }
            out.push(set.into_iter().collect());
        }
        out
    }

    /// The subgroup as a group in its own right, with the embedding of its
    /// element indices into `self`.
    pub fn subgroup_as_group(&self, h: &Subgroup) -> (FiniteGroup, Vec<usize>) {
        let elements = h.members.iter().map(|&i| self.elements[i].clone()).collect();
        let g = FiniteGroup::from_elements(self.degree, elements).expect("subgroup is a group");
        (g, h.members.clone())
    }

    /// One representative per conjugacy class of cyclic subgroups, sorted
    /// by order and then by member list. The trivial subgroup comes first.
    pub fn cyclic_subgroups(&self) -> Vec<Subgroup> {
        let mut all: BTreeSet<Subgroup> = BTreeSet::new();
        for g in 0..self.order() {
            all.insert(self.canonical_conjugate(&self.generated_subgroup(&[g])));
        }
        let mut out: Vec<Subgroup> = all.into_iter().collect();
        out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.members.cmp(&b.members)));
        out
    }

    /// Fixed-point count of each class on `G/H`, i.e. the character of
    /// the permutation representation `Ind_H^G 1`.
    pub fn induced_trivial_character(&self, h: &Subgroup) -> Result<ClassFunction> {
        self.subgroup(&h.members)?;
        let values = self
            .classes
            .iter()
            .map(|c| {
                let g = c[0];
                let hits = (0..self.order())
                    .filter(|&x| h.contains(self.mul(self.mul(self.inv(x), g), x)))
                    .count();
                Q::from_integer(BigInt::from(hits / h.order()))
            })
            .collect();
        Ok(ClassFunction { values })
    }

    pub fn trivial_character(&self) -> ClassFunction {
        ClassFunction {
            values: vec![Q::one(); self.num_classes()],
        }
    }

    /// Class function from per-element values; fails if not constant on
    /// conjugacy classes.
    pub fn class_function_from_elements(&self, vals: &[Q]) -> Result<ClassFunction> {
        if vals.len() != self.order() {
            return Err(structural("one value per element expected"));
        }
        let mut values = Vec::with_capacity(self.num_classes());
        for c in &self.classes {
            let v = &vals[c[0]];
            if c.iter().any(|&g| &vals[g] != v) {
                return Err(structural("values are not constant on conjugacy classes"));
            }
            values.push(v.clone());
        }
        Ok(ClassFunction { values })
    }

    /// Writes `chi` as a rational combination of induced trivial
    /// characters.
    ///
    /// Candidates are the conjugacy classes of cyclic subgroups, plus the
    /// whole group when it is not cyclic. The cyclic characters form a
    /// basis (Artin), so a solution over them always exists and is unique.
    /// When `G` itself is a candidate the system is underdetermined; the
    /// sparsest solution wins, ties go to the cyclic-only solution and then
    /// to supports with larger subgroups.
    pub fn artin_induction(&self, chi: &ClassFunction) -> Result<ArtinDecomposition> {
        if chi.values.len() != self.num_classes() {
            return Err(structural(format!(
                "class function has {} values, group has {} classes",
                chi.values.len(),
                self.num_classes()
            )));
        }
        if chi.values.iter().any(|v| !v.is_integer()) {
            return Err(Error::NotInSpan);
        }
        let mut candidates = self.cyclic_subgroups();
        let cyclic_count = candidates.len();
        if !self.is_cyclic() {
            candidates.push(self.whole());
        }
        let chars: Vec<ClassFunction> = candidates
            .iter()
            .map(|h| self.induced_trivial_character(h))
            .collect::<Result<_>>()?;
        let solve_on = |cols: &[usize]| -> Option<Vec<Q>> {
            let a: Vec<Vec<Q>> = (0..self.num_classes())
                .map(|c| cols.iter().map(|&j| chars[j].values[c].clone()).collect())
                .collect();
            let sol = qlinalg::solve(&a, &chi.values)?;
            sol.kernel.is_empty().then_some(sol.particular)
        };
        let cyclic_cols: Vec<usize> = (0..cyclic_count).collect();
        let base = solve_on(&cyclic_cols).ok_or(Error::NotInSpan)?;
        let mut coeffs: Vec<Q> = base.clone();
        coeffs.resize(candidates.len(), Q::zero());
        if candidates.len() > cyclic_count {
            let base_support = base.iter().filter(|c| !c.is_zero()).count();
            if let Some((cols, sol)) = self.sparser_solution(&candidates, base_support, &solve_on)
            {
                coeffs = vec![Q::zero(); candidates.len()];
                for (j, v) in cols.into_iter().zip(sol) {
                    coeffs[j] = v;
                }
            }
        }
        let terms = candidates.into_iter().zip(coeffs).collect();
        Ok(ArtinDecomposition { terms })
    }

    /// Searches supports strictly smaller than `limit` that use the last
    /// candidate (the whole group).
    fn sparser_solution(
        &self,
        candidates: &[Subgroup],
        limit: usize,
        solve_on: &dyn Fn(&[usize]) -> Option<Vec<Q>>,
    ) -> Option<(Vec<usize>, Vec<Q>)> {
        let n = candidates.len();
        let whole = n - 1;
        for size in 1..limit {
            let mut supports: Vec<Vec<usize>> = combinations(whole, size - 1)
                .into_iter()
                .map(|mut s| {
                    s.push(whole);
                    s
                })
                .collect();
            supports.sort_by(|a, b| {
                let key = |s: &Vec<usize>| {
                    let mut o: Vec<usize> = s.iter().map(|&j| candidates[j].order()).collect();
                    o.sort_unstable_by(|x, y| y.cmp(x));
                    o
                };
                key(b).cmp(&key(a)).then_with(|| a.cmp(b))
            });
            for s in supports {
                if let Some(sol) = solve_on(&s) {
                    if sol.iter().all(|c| !c.is_zero()) {
                        return Some((s, sol));
                    }
                }
            }
        }
        None
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// A subgroup, as a sorted list of element indices of its parent group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    members: Vec<usize>,
}

impl Subgroup {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }
}

/// A rational class function, one value per conjugacy class in canonical
/// class order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassFunction {
    pub values: Vec<Q>,
}

impl ClassFunction {
    pub fn from_integers(values: &[i64]) -> ClassFunction {
        ClassFunction {
            values: values.iter().map(|&v| qlinalg::q(v)).collect(),
        }
    }

    pub fn add(&self, other: &ClassFunction) -> ClassFunction {
        ClassFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &ClassFunction) -> ClassFunction {
        ClassFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> ClassFunction {
        ClassFunction {
            values: self.values.iter().map(|a| a * c).collect(),
        }
    }

    pub fn zero(len: usize) -> ClassFunction {
        ClassFunction {
            values: vec![Q::zero(); len],
        }
    }

    pub fn is_integral(&self) -> bool {
        self.values.iter().all(|v| v.is_integer())
    }

    /// Degree, the value at the identity class.
    pub fn degree(&self) -> &Q {
        &self.values[0]
    }
}

/// Output of [`FiniteGroup::artin_induction`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArtinDecomposition {
    /// All candidate subgroups with their coefficients, zeros included.
    pub terms: Vec<(Subgroup, Q)>,
}

impl ArtinDecomposition {
    pub fn nonzero(&self) -> impl Iterator<Item = &(Subgroup, Q)> {
        self.terms.iter().filter(|(_, c)| !c.is_zero())
    }

    pub fn coefficient(&self, h: &Subgroup) -> Q {
        self.terms
            .iter()
            .find(|(s, _)| s == h)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    /// Re-synthesizes `sum a_H Ind_H^G 1`.
    pub fn synthesize(&self, g: &FiniteGroup) -> Result<ClassFunction> {
        let mut acc = ClassFunction::zero(g.num_classes());
        for (h, c) in &self.terms {
            acc = acc.add(&g.induced_trivial_character(h)?.scale(c));
        }
        Ok(acc)
    }

    /// Least common denominator of the coefficients.
    pub fn common_denominator(&self) -> BigInt {
        self.terms
            .iter()
            .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::qr;

    fn s3_class_sizes(g: &FiniteGroup) -> Vec<usize> {
        g.conjugacy_classes().iter().map(|c| c.len()).collect()
    }

    /// Brute-force conjugation orbit sizes, independent of the cached classes.
    fn orbit_sizes_brute(g: &FiniteGroup) -> Vec<usize> {
        let mut done = BTreeSet::new();
        let mut sizes = Vec::new();
        for e in g.elements() {
            if done.contains(e) {
                continue;
            }
            let orbit: BTreeSet<Perm> = g
                .elements()
                .iter()
                .map(|x| x.compose(e).compose(&x.inverse()))
                .collect();
            sizes.push(orbit.len());
            done.extend(orbit);
        }
        sizes
    }

    #[test]
    fn trivial_group_one_class() {
        let g = FiniteGroup::trivial();
        assert_eq!(g.conjugacy_classes(), &[vec![0]]);
    }

    #[test]
    fn s3_classes_match_brute_force() {
        let g = FiniteGroup::symmetric(3);
        assert_eq!(g.order(), 6);
        let mut a = s3_class_sizes(&g);
        let mut b = orbit_sizes_brute(&g);
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
        assert_eq!(a, vec![1, 2, 3]);
        assert_eq!(g.conjugacy_classes()[0], vec![g.identity()]);
    }

    #[test]
    fn abelian_groups_have_singleton_classes() {
        let g = FiniteGroup::cyclic(4);
        assert_eq!(g.num_classes(), 4);
        assert!(g.conjugacy_classes().iter().all(|c| c.len() == 1));
    }

    #[test]
    fn malformed_tables_name_the_axiom() {
        let p = Perm::from_cycles(3, &[vec![0, 1, 2]]).unwrap();
        let err = FiniteGroup::from_elements(3, vec![Perm::identity(3), p]).unwrap_err();
        assert!(err.to_string().contains("closure"), "{err}");
        let q = Perm::from_cycles(2, &[vec![0, 1]]).unwrap();
        let err = FiniteGroup::from_elements(2, vec![q]).unwrap_err();
        assert!(err.to_string().contains("identity"), "{err}");
    }

    #[test]
    fn cyclic_subgroup_classes() {
        assert_eq!(FiniteGroup::cyclic(2).cyclic_subgroups().len(), 2);
        let s3 = FiniteGroup::symmetric(3);
        let orders: Vec<usize> = s3.cyclic_subgroups().iter().map(|h| h.order()).collect();
        assert_eq!(orders, vec![1, 2, 3]);
        let z6 = FiniteGroup::cyclic(6);
        let orders: Vec<usize> = z6.cyclic_subgroups().iter().map(|h| h.order()).collect();
        assert_eq!(orders, vec![1, 2, 3, 6]);
    }

    fn class_index(g: &FiniteGroup, order: usize, size: usize) -> usize {
        g.conjugacy_classes()
            .iter()
            .position(|c| c.len() == size && g.element_order(c[0]) == order)
            .unwrap()
    }

    #[test]
    fn induced_characters() {
        let z2 = FiniteGroup::cyclic(2);
        assert_eq!(
            z2.induced_trivial_character(&z2.whole()).unwrap(),
            ClassFunction::from_integers(&[1, 1])
        );
        assert_eq!(
            z2.induced_trivial_character(&z2.trivial_subgroup()).unwrap(),
            ClassFunction::from_integers(&[2, 0])
        );
        let s3 = FiniteGroup::symmetric(3);
        let c2 = &s3.cyclic_subgroups()[1];
        let chi = s3.induced_trivial_character(c2).unwrap();
        let e = class_index(&s3, 1, 1);
        let t = class_index(&s3, 2, 3);
        let r = class_index(&s3, 3, 2);
        assert_eq!(chi.values[e], qlinalg::q(3));
        assert_eq!(chi.values[t], qlinalg::q(1));
        assert_eq!(chi.values[r], qlinalg::q(0));
    }

    #[test]
    fn induction_is_transitive() {
        for g in [FiniteGroup::symmetric(3), FiniteGroup::cyclic(6)] {
            let subs = g.cyclic_subgroups();
            for h in subs.iter().chain(std::iter::once(&g.whole())) {
                let (hg, emb) = g.subgroup_as_group(h);
                for k in hg.cyclic_subgroups() {
                    let k_in_g = g
                        .subgroup(&k.members().iter().map(|&i| emb[i]).collect::<Vec<_>>())
                        .unwrap();
                    let direct = g.induced_trivial_character(&k_in_g).unwrap();
                    // Ind_H^G of the H-character Ind_K^H 1, by the Frobenius formula.
                    let inner = hg.induced_trivial_character(&k).unwrap();
                    let vals: Vec<Q> = g
                        .conjugacy_classes()
                        .iter()
                        .map(|c| {
                            let x0 = c[0];
                            let mut acc = Q::zero();
                            for x in 0..g.order() {
                                let y = g.mul(g.mul(g.inv(x), x0), x);
                                if let Some(pos) = emb.iter().position(|&e| e == y) {
                                    acc += &inner.values[hg.class_of(pos)];
                                }
                            }
                            acc / Q::from_integer(BigInt::from(h.order()))
                        })
                        .collect();
                    assert_eq!(direct.values, vals);
                }
            }
        }
    }

    #[test]
    fn artin_trivial_and_sign() {
        let z2 = FiniteGroup::cyclic(2);
        let d = z2.artin_induction(&z2.trivial_character()).unwrap();
        let nz: Vec<_> = d.nonzero().cloned().collect();
        assert_eq!(nz, vec![(z2.whole(), qlinalg::q(1))]);
        let sign = ClassFunction::from_integers(&[1, -1]);
        let d = z2.artin_induction(&sign).unwrap();
        assert_eq!(d.coefficient(&z2.trivial_subgroup()), qlinalg::q(1));
        assert_eq!(d.coefficient(&z2.whole()), qlinalg::q(-1));

        let s3 = FiniteGroup::symmetric(3);
        let d = s3.artin_induction(&s3.trivial_character()).unwrap();
        let nz: Vec<_> = d.nonzero().cloned().collect();
        assert_eq!(nz, vec![(s3.whole(), qlinalg::q(1))]);
    }

    #[test]
    fn artin_two_dimensional_s3() {
        let s3 = FiniteGroup::symmetric(3);
        let e = class_index(&s3, 1, 1);
        let t = class_index(&s3, 2, 3);
        let r = class_index(&s3, 3, 2);
        let mut vals = vec![qlinalg::q(0); 3];
        vals[e] = qlinalg::q(2);
        vals[t] = qlinalg::q(0);
        vals[r] = qlinalg::q(-1);
        let chi = ClassFunction { values: vals };
        let d = s3.artin_induction(&chi).unwrap();
        let subs = s3.cyclic_subgroups();
        assert_eq!(d.coefficient(&subs[0]), qr(1, 2));
        assert_eq!(d.coefficient(&subs[1]), qlinalg::q(0));
        assert_eq!(d.coefficient(&subs[2]), qr(-1, 2));
        assert_eq!(d.coefficient(&s3.whole()), qlinalg::q(0));
        assert_eq!(d.synthesize(&s3).unwrap(), chi);
    }

    #[test]
    fn non_integral_characters_are_rejected() {
        let z2 = FiniteGroup::cyclic(2);
        let chi = ClassFunction {
            values: vec![qr(1, 2), qlinalg::q(0)],
        };
        assert!(matches!(z2.artin_induction(&chi), Err(Error::NotInSpan)));
    }

    #[test]
    fn text_round_trip() {
        let g = FiniteGroup::symmetric(3);
        let text = g.to_text();
        let back = FiniteGroup::parse_text(&text).unwrap();
        assert_eq!(back, g);
        let alt = FiniteGroup::parse_text("# Z/2\ndegree 2\n[0 1]\n[1 0]\n").unwrap();
        assert_eq!(alt, FiniteGroup::cyclic(2));
    }
}
