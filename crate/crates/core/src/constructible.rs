//! Torsion-free Z-constructible sheaves, constructible tori, their duality,
//! pushforward along a finite cover, two-term complexes, and the K0
//! decomposition into field and point generators.
//!
//! Places are abstract: a label, a residue size, and decomposition,
//! inertia and Frobenius data inside the splitting group. Unlisted places
//! are good. Rational primes are conventionally labelled by their decimal
//! value (`"2"`, `"5"`), which is how oracles find the listed data.
//!
//! Fibers are free lattices with a Frobenius matrix. Comparison maps are
//! held internally on the ambient cocharacter lattice `Y^v` (a matrix
//! `E <- Y^v` killing the inertia relations); the public canonical form is
//! the induced matrix on the free part of the component group.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{structural, validation, Error, Result};
use crate::groups::{ArtinDecomposition, FiniteGroup, Subgroup};
use crate::lattices::{block_cycle, FinAb, FinAbFrob, GLattice, IntMatrix};
use crate::qlinalg::Q;

/// Local data at a listed closed place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadPlaceData {
    pub label: String,
    pub q: u64,
    pub decomposition: Subgroup,
    pub inertia: Subgroup,
    /// An element of the decomposition group lifting Frobenius.
    pub frobenius: usize,
    /// Lower-numbering chain `G_0 = I ⊇ G_1 ⊇ ... ⊇ 1`; empty when only
    /// the tame part is known.
    pub filtration: Vec<Subgroup>,
}

impl BadPlaceData {
    /// An unramified place with decomposition group generated by `frob`.
    pub fn unramified(label: &str, q: u64, g: &FiniteGroup, frob: usize) -> BadPlaceData {
        BadPlaceData {
            label: label.to_string(),
            q,
            decomposition: g.generated_subgroup(&[frob]),
            inertia: g.trivial_subgroup(),
            frobenius: frob,
            filtration: Vec::new(),
        }
    }

    pub fn validate(&self, g: &FiniteGroup) -> Result<()> {
        let ctx = |m: &str| validation(format!("place {}: {m}", self.label));
        if self.q < 2 || prime_power_base(self.q).is_none() {
            return Err(ctx(&format!("residue size {} is not a prime power", self.q)));
        }
        g.subgroup(self.decomposition.members())?;
        g.subgroup(self.inertia.members())?;
        if !g.is_normal_in(&self.inertia, &self.decomposition) {
            return Err(ctx("inertia is not normal in the decomposition group"));
        }
        if !self.decomposition.contains(self.frobenius) {
            return Err(ctx("Frobenius is not in the decomposition group"));
        }
        let mut gens = self.inertia.members().to_vec();
        gens.push(self.frobenius);
        if g.generated_subgroup(&gens) != self.decomposition {
            return Err(ctx("Frobenius and inertia do not generate the decomposition group"));
        }
        if !self.filtration.is_empty() {
            if self.filtration[0] != self.inertia {
                return Err(ctx("filtration must start at the inertia group"));
            }
            for w in self.filtration.windows(2) {
                if !w[1].is_subset_of(&w[0]) {
                    return Err(ctx("filtration is not descending"));
                }
            }
            for s in &self.filtration {
                g.subgroup(s.members())?;
            }
            if !self.filtration.last().expect("nonempty").is_trivial() {
                return Err(ctx("filtration must end at the trivial group"));
            }
        }
        Ok(())
    }

    /// Residue characteristic.
    pub fn residue_char(&self) -> u64 {
        prime_power_base(self.q).expect("validated residue size").0
    }

    pub fn is_ramified(&self) -> bool {
        !self.inertia.is_trivial()
    }

    /// Wild when the residue characteristic divides the inertia order.
    pub fn is_wild(&self) -> bool {
        (self.inertia.order() as u64).is_multiple_of(self.residue_char())
    }
}

/// `(p, k)` with `q = p^k`, when `q` is a prime power.
pub fn prime_power_base(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).expect("q >= 2");
    let mut x = q;
    let mut k = 0;
    while x.is_multiple_of(p) {
        x /= p;
        k += 1;
    }
    (x == 1).then_some((p, k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArchKind {
    Real,
    Complex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArchPlaceData {
    pub label: String,
    pub kind: ArchKind,
    /// Complex conjugation at the place; the identity when complex.
    pub conjugation: usize,
}

impl ArchPlaceData {
    pub fn validate(&self, g: &FiniteGroup) -> Result<()> {
        if self.conjugation >= g.order() {
            return Err(validation(format!("arch place {}: bad element", self.label)));
        }
        if g.mul(self.conjugation, self.conjugation) != g.identity() {
            return Err(validation(format!(
                "arch place {}: conjugation does not square to the identity",
                self.label
            )));
        }
        Ok(())
    }
}

/// A label for the fixed field of a subgroup, used to look up field
/// records.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldLabel {
    pub subgroup: Subgroup,
    pub label: String,
}

/// Which global base the data lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    /// The ring of integers of Q (splitting group = Galois group of a
    /// number field).
    Rationals,
    /// The projective line over `F_q`, with constant-field-extension
    /// splitting group.
    ProjectiveLine { q: u64 },
}

/// Free fiber with Frobenius: `phi` invertible of finite order.
fn check_free_fiber(label: &str, a: &FinAbFrob) -> Result<()> {
    if !a.is_free_presentation() {
        return Err(validation(format!("place {label}: fiber must be a free lattice")));
    }
    Ok(())
}

fn inverse_finite_order(a: &FinAbFrob) -> IntMatrix {
    a.phi().pow(a.order() - 1)
}

/// `E^v` with contragredient Frobenius.
pub fn dual_fiber(a: &FinAbFrob) -> FinAbFrob {
    FinAbFrob::free(inverse_finite_order(a).transpose(), a.order()).expect("dual of a free fiber")
}

/// Component group of the Néron model at `v`, modelled as the inertia
/// coinvariants of the cocharacter lattice, with its free coordinates.
#[derive(Clone, Debug)]
pub struct ComponentGroup {
    pub module: FinAbFrob,
    /// Projection `Y^v -> (Y^v)_I / tor`.
    pub projection: IntMatrix,
    /// Section of the projection.
    pub lift: IntMatrix,
    /// Set at wild places, where the model is not known to be exact.
    pub wild: bool,
}

impl ComponentGroup {
    /// Frobenius on the free part.
    pub fn free_frobenius(&self) -> IntMatrix {
        self.module.free_frobenius()
    }

    pub fn free_rank(&self) -> usize {
        self.projection.rows()
    }

    /// The free part as a fiber.
    pub fn free_fiber(&self) -> FinAbFrob {
        FinAbFrob::free(self.free_frobenius(), self.module.order()).expect("free part")
    }
}

pub fn component_group(y: &GLattice, v: &BadPlaceData) -> Result<ComponentGroup> {
    let yd = y.z_dual();
    let module = yd.coinvariants(&v.inertia, Some(v.frobenius))?;
    let id = IntMatrix::identity(y.rank());
    let relations = v
        .inertia
        .members()
        .iter()
        .fold(IntMatrix::zeros(y.rank(), 0), |acc, &x| {
            acc.hstack(&yd.action(x).sub(&id))
        });
    let (projection, lift) = FinAb::new(relations).free_coordinates();
    Ok(ComponentGroup {
        module,
        projection,
        lift,
        wild: v.is_ramified() && v.is_wild(),
    })
}

/// Sheaf data at a listed place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafPlace {
    pub place: BadPlaceData,
    pub fiber: FinAbFrob,
    /// `M_v -> M`, landing in `M^{I_v}`; columns indexed by the fiber.
    pub specialization: IntMatrix,
}

/// A torsion-free Z-constructible sheaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TfSheafData {
    pub group: Arc<FiniteGroup>,
    pub base: Base,
    pub generic: GLattice,
    pub arch: Vec<ArchPlaceData>,
    pub bad: Vec<SheafPlace>,
    pub fields: Vec<FieldLabel>,
}

impl TfSheafData {
    pub fn validate(&self) -> Result<()> {
        check_group(&self.group, self.generic.group())?;
        for a in &self.arch {
            a.validate(&self.group)?;
        }
        check_labels(self.bad.iter().map(|p| &p.place.label))?;
        let n = self.generic.rank();
        for sp in &self.bad {
            let v = &sp.place;
            v.validate(&self.group)?;
            check_free_fiber(&v.label, &sp.fiber)?;
            let m = sp.fiber.generators();
            let s = &sp.specialization;
            if s.rows() != n || s.cols() != m {
                return Err(validation(format!(
                    "place {}: specialization must be {n}x{m}, got {}x{}",
                    v.label,
                    s.rows(),
                    s.cols()
                )));
            }
            for &h in v.inertia.members() {
                if self.generic.action(h).mul(s) != *s {
                    return Err(validation(format!(
                        "place {}: specialization does not land in the inertia invariants",
                        v.label
                    )));
                }
            }
            if self.generic.action(v.frobenius).mul(s) != s.mul(sp.fiber.phi()) {
                return Err(validation(format!(
                    "place {}: specialization is not Frobenius-equivariant",
                    v.label
                )));
            }
        }
        Ok(())
    }

    /// Whether each specialization map is injective.
    pub fn injective_specializations(&self) -> Vec<(String, bool)> {
        self.bad
            .iter()
            .map(|sp| {
                (
                    sp.place.label.clone(),
                    sp.specialization.rank() == sp.fiber.generators(),
                )
            })
            .collect()
    }

    /// The constant sheaf `Z` over a trivial splitting group.
    pub fn constant_z() -> TfSheafData {
        let g = Arc::new(FiniteGroup::trivial());
        TfSheafData {
            group: g.clone(),
            base: Base::Rationals,
            generic: GLattice::trivial(g, 1),
            arch: Vec::new(),
            bad: Vec::new(),
            fields: Vec::new(),
        }
    }
}

/// Torus data at a listed place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusPlace {
    pub place: BadPlaceData,
    pub fiber: FinAbFrob,
    /// Free part of the component group to the fiber, in the canonical
    /// free coordinates of [`component_group`].
    pub comparison: IntMatrix,
}

/// A torsion-free constructible torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CTorusData {
    pub group: Arc<FiniteGroup>,
    pub base: Base,
    pub characters: GLattice,
    pub arch: Vec<ArchPlaceData>,
    pub bad: Vec<TorusPlace>,
    pub fields: Vec<FieldLabel>,
}

impl CTorusData {
    pub fn validate(&self) -> Result<()> {
        check_group(&self.group, self.characters.group())?;
        for a in &self.arch {
            a.validate(&self.group)?;
        }
        check_labels(self.bad.iter().map(|p| &p.place.label))?;
        for tp in &self.bad {
            let v = &tp.place;
            v.validate(&self.group)?;
            check_free_fiber(&v.label, &tp.fiber)?;
            let cg = component_group(&self.characters, v)?;
            let (m, f) = (tp.fiber.generators(), cg.free_rank());
            let c = &tp.comparison;
            if c.rows() != m || c.cols() != f {
                return Err(validation(format!(
                    "place {}: comparison must be {m}x{f}, got {}x{}",
                    v.label,
                    c.rows(),
                    c.cols()
                )));
            }
            if tp.fiber.phi().mul(c) != c.mul(&cg.free_frobenius()) {
                return Err(validation(format!(
                    "place {}: comparison is not Frobenius-equivariant",
                    v.label
                )));
            }
        }
        Ok(())
    }

    /// The split torus `G_m` over a trivial splitting group.
    pub fn split_gm() -> CTorusData {
        let g = Arc::new(FiniteGroup::trivial());
        CTorusData {
            group: g.clone(),
            base: Base::Rationals,
            characters: GLattice::trivial(g, 1),
            arch: Vec::new(),
            bad: Vec::new(),
            fields: Vec::new(),
        }
    }

    pub fn place(&self, label: &str) -> Option<&TorusPlace> {
        self.bad.iter().find(|p| p.place.label == label)
    }

    /// The comparison map on the whole cocharacter lattice.
    pub fn ambient_comparison(&self, tp: &TorusPlace) -> Result<IntMatrix> {
        let cg = component_group(&self.characters, &tp.place)?;
        Ok(tp.comparison.mul(&cg.projection))
    }

    /// Fiber and ambient comparison at a place, listed or not; unlisted
    /// places get the free component group with the identity comparison.
    pub fn fiber_at(&self, v: &BadPlaceData) -> Result<(FinAbFrob, IntMatrix)> {
        match self.place(&v.label) {
            Some(tp) => {
                if tp.place != *v {
                    return Err(validation(format!("place {} is listed with different data", v.label)));
                }
                Ok((tp.fiber.clone(), self.ambient_comparison(tp)?))
            }
            None => {
                let cg = component_group(&self.characters, v)?;
                Ok((cg.free_fiber(), cg.projection))
            }
        }
    }

    /// Direct sum; places listed on either side are listed in the sum.
    pub fn direct_sum(&self, o: &CTorusData) -> Result<CTorusData> {
        check_group(&self.group, &o.group)?;
        let characters = self.characters.direct_sum(&o.characters);
        let mut places: Vec<BadPlaceData> = self.bad.iter().map(|p| p.place.clone()).collect();
        for p in &o.bad {
            if !places.iter().any(|x| x.label == p.place.label) {
                places.push(p.place.clone());
            }
        }
        let mut bad = Vec::new();
        for v in places {
            let (e1, a1) = self.fiber_at(&v)?;
            let (e2, a2) = o.fiber_at(&v)?;
            let fiber = e1.direct_sum(&e2);
            let ambient = a1.block_diag(&a2);
            let cg = component_group(&characters, &v)?;
            bad.push(TorusPlace {
                place: v,
                fiber,
                comparison: ambient.mul(&cg.lift),
            });
        }
        let mut fields = self.fields.clone();
        for f in &o.fields {
            if !fields.iter().any(|x| x.subgroup == f.subgroup) {
                fields.push(f.clone());
            }
        }
        let t = CTorusData {
            group: self.group.clone(),
            base: self.base,
            characters,
            arch: self.arch.clone(),
            bad,
            fields,
        };
        t.validate()?;
        Ok(t)
    }

    /// Per listed place: good iff inertia acts trivially on the
    /// characters and the comparison is an isomorphism onto the fiber from
    /// a torsion-free component group.
    pub fn good_reduction_locus(&self) -> Result<Vec<(String, bool)>> {
        self.bad
            .iter()
            .map(|tp| {
                let v = &tp.place;
                let unramified_action = v
                    .inertia
                    .members()
                    .iter()
                    .all(|&h| self.characters.action(h).is_identity());
                let cg = component_group(&self.characters, v)?;
                let iso = tp.comparison.is_unimodular();
                let torsion_free = cg.module.torsion_invariants().is_empty();
                Ok((v.label.clone(), unramified_action && iso && torsion_free))
            })
            .collect()
    }
}

fn check_group(a: &FiniteGroup, b: &FiniteGroup) -> Result<()> {
    if a != b {
        return Err(validation("lattice is over a different group"));
    }
    Ok(())
}

fn check_labels<'a>(labels: impl Iterator<Item = &'a String>) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for l in labels {
        if !seen.insert(l.clone()) {
            return Err(validation(format!("place {l} listed twice")));
        }
    }
    Ok(())
}

/// The Cartier-dual constructible torus of a sheaf.
pub fn dualize_sheaf(f: &TfSheafData) -> Result<CTorusData> {
    f.validate()?;
    let mut bad = Vec::with_capacity(f.bad.len());
    for sp in &f.bad {
        let cg = component_group(&f.generic, &sp.place)?;
        bad.push(TorusPlace {
            place: sp.place.clone(),
            fiber: dual_fiber(&sp.fiber),
            comparison: sp.specialization.transpose().mul(&cg.lift),
        });
    }
    let t = CTorusData {
        group: f.group.clone(),
        base: f.base,
        characters: f.generic.clone(),
        arch: f.arch.clone(),
        bad,
        fields: f.fields.clone(),
    };
    t.validate()?;
    Ok(t)
}

/// The sheaf `T^D` of a torus.
pub fn dualize_torus(t: &CTorusData) -> Result<TfSheafData> {
    t.validate()?;
    let mut bad = Vec::with_capacity(t.bad.len());
    for tp in &t.bad {
        bad.push(SheafPlace {
            place: tp.place.clone(),
            fiber: dual_fiber(&tp.fiber),
            specialization: t.ambient_comparison(tp)?.transpose(),
        });
    }
    let f = TfSheafData {
        group: t.group.clone(),
        base: t.base,
        generic: t.characters.clone(),
        arch: t.arch.clone(),
        bad,
        fields: t.fields.clone(),
    };
    f.validate()?;
    Ok(f)
}

/// Outcome of comparing a sheaf with its bidual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BidualReport {
    /// Every component of `F^DD` equals the input; the isomorphism is the
    /// identity in canonical bases.
    Identity,
    /// The first component that differs.
    Mismatch(String),
}

pub fn check_bidual(f: &TfSheafData) -> Result<BidualReport> {
    let dd = dualize_torus(&dualize_sheaf(f)?)?;
    if dd.generic != f.generic {
        return Ok(BidualReport::Mismatch("generic lattice".into()));
    }
    if dd.bad.len() != f.bad.len() {
        return Ok(BidualReport::Mismatch("list of places".into()));
    }
    for (a, b) in f.bad.iter().zip(&dd.bad) {
        if a != b {
            return Ok(BidualReport::Mismatch(format!("place {}", a.place.label)));
        }
    }
    if dd != *f {
        return Ok(BidualReport::Mismatch("archimedean or field data".into()));
    }
    Ok(BidualReport::Identity)
}

/// An upper place of the fixed field `K_H` over a lower place `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperPlace {
    /// Double-coset representative `g` of `D_v g H`.
    pub rep: usize,
    pub e: usize,
    pub f: usize,
    /// `H ∩ g^-1 D_v g`, as a subgroup of `G`.
    pub decomposition: Subgroup,
    /// `H ∩ g^-1 I_v g`.
    pub inertia: Subgroup,
    /// `g^-1 d g` with `d ∈ D_v ∩ g H g^-1`, `d ≡ φ_v^f mod I_v`.
    pub frobenius: usize,
}

/// Places of `K_H` over `v`, one per double coset `D_v g H`, listed by
/// minimal representative (the identity when it lies in the double coset).
pub fn upper_places(g: &FiniteGroup, h: &Subgroup, v: &BadPlaceData) -> Vec<UpperPlace> {
    g.double_cosets(&v.decomposition, h)
        .into_iter()
        .map(|dc| {
            let rep = if dc.binary_search(&g.identity()).is_ok() {
                g.identity()
            } else {
                dc[0]
            };
            upper_place_at(g, h, v, rep)
        })
        .collect()
}

/// Upper place determined by a chosen representative.
pub fn upper_place_at(g: &FiniteGroup, h: &Subgroup, v: &BadPlaceData, rep: usize) -> UpperPlace {
    let ghg = g.conjugate_subgroup(h, rep);
    let d_cap = g.intersect(&v.decomposition, &ghg);
    let i_cap = g.intersect(&v.inertia, &ghg);
    let e = v.inertia.order() / i_cap.order();
    let mut gens = v.inertia.members().to_vec();
    gens.extend_from_slice(d_cap.members());
    let id = g.generated_subgroup(&gens);
    let f = v.decomposition.order() / id.order();
    let phif = g.pow(v.frobenius, f);
    let d = d_cap
        .members()
        .iter()
        .copied()
        .find(|&d| v.inertia.contains(g.mul(g.inv(phif), d)))
        .expect("Frobenius power meets the conjugate subgroup modulo inertia");
    let gi = g.inv(rep);
    UpperPlace {
        rep,
        e,
        f,
        decomposition: g.conjugate_subgroup(&d_cap, gi),
        inertia: g.conjugate_subgroup(&i_cap, gi),
        frobenius: g.conj(gi, d),
    }
}

/// A generator class: the torus `G_m` over the fixed field of a subgroup,
/// or a point class `(A, φ)` at a place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointTerm {
    pub label: String,
    /// Residue size of the point; a power of the residue size of the
    /// place it sits over.
    pub q: u64,
    pub module: FinAbFrob,
    pub coeff: Q,
}

/// A rational combination of generator classes in K0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K0Class {
    pub group: Arc<FiniteGroup>,
    /// Canonical-conjugate subgroup representatives with coefficients.
    pub field_terms: Vec<(Subgroup, Q)>,
    pub point_terms: Vec<PointTerm>,
}

impl K0Class {
    pub fn zero(group: Arc<FiniteGroup>) -> K0Class {
        K0Class {
            group,
            field_terms: Vec::new(),
            point_terms: Vec::new(),
        }
    }

    pub fn field(group: Arc<FiniteGroup>, h: &Subgroup, coeff: Q) -> K0Class {
        let mut k = K0Class::zero(group);
        k.add_field(h, coeff);
        k
    }

    pub fn point(group: Arc<FiniteGroup>, label: &str, q: u64, module: FinAbFrob, coeff: Q) -> K0Class {
        let mut k = K0Class::zero(group);
        k.add_point(label, q, module, coeff);
        k
    }

    pub fn add_field(&mut self, h: &Subgroup, coeff: Q) {
        let key = self.group.canonical_conjugate(h);
        match self.field_terms.iter_mut().find(|(s, _)| *s == key) {
            Some((_, c)) => *c += coeff,
            None => self.field_terms.push((key, coeff)),
        }
        self.normalize();
    }

    pub fn add_point(&mut self, label: &str, q: u64, module: FinAbFrob, coeff: Q) {
        let module = module.reduced();
        if module.is_zero() {
            return;
        }
        match self
            .point_terms
            .iter_mut()
            .find(|p| p.label == label && p.q == q && p.module == module)
        {
            Some(p) => p.coeff += coeff,
            None => self.point_terms.push(PointTerm {
                label: label.to_string(),
                q,
                module,
                coeff,
            }),
        }
        self.normalize();
    }

    fn normalize(&mut self) {
        self.field_terms.retain(|(_, c)| !c.is_zero());
        self.point_terms.retain(|p| !p.coeff.is_zero());
        self.field_terms
            .sort_by(|a, b| a.0.order().cmp(&b.0.order()).then_with(|| a.0.cmp(&b.0)));
        self.point_terms.sort_by(|a, b| {
            (a.q, &a.label)
                .cmp(&(b.q, &b.label))
                .then_with(|| format!("{:?}", a.module).cmp(&format!("{:?}", b.module)))
        });
    }

    pub fn add(&self, o: &K0Class) -> K0Class {
        assert!(*self.group == *o.group, "K0 classes over different groups");
        let mut k = self.clone();
        for (h, c) in &o.field_terms {
            k.add_field(h, c.clone());
        }
        for p in &o.point_terms {
            k.add_point(&p.label, p.q, p.module.clone(), p.coeff.clone());
        }
        k
    }

    pub fn scale(&self, c: &Q) -> K0Class {
        let mut k = self.clone();
        for t in &mut k.field_terms {
            t.1 = &t.1 * c;
        }
        for p in &mut k.point_terms {
            p.coeff = &p.coeff * c;
        }
        k.normalize();
        k
    }

    pub fn neg(&self) -> K0Class {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, o: &K0Class) -> K0Class {
        self.add(&o.neg())
    }

    pub fn is_zero(&self) -> bool {
        self.field_terms.is_empty() && self.point_terms.is_empty()
    }

    pub fn field_coefficient(&self, h: &Subgroup) -> Q {
        let key = self.group.canonical_conjugate(h);
        self.field_terms
            .iter()
            .find(|(s, _)| *s == key)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    /// Field terms with subgroups of `H` (as a group) moved into `G`
    /// through the embedding of `H`'s element indices.
    pub fn relabel_into(&self, group: &Arc<FiniteGroup>, embedding: &[usize]) -> Result<K0Class> {
        let mut k = K0Class::zero(group.clone());
        for (h, c) in &self.field_terms {
            let members: Vec<usize> = h.members().iter().map(|&i| embedding[i]).collect();
            k.add_field(&group.subgroup(&members)?, c.clone());
        }
        k.point_terms = self.point_terms.clone();
        Ok(k)
    }
}

/// Decomposes a torus into generator classes: the fibers give point classes,
/// the character lattice is written through Artin induction, and each
/// induced term contributes a field generator minus the points of the
/// fixed field above the listed places.
pub fn k0_decompose(t: &CTorusData) -> Result<K0Class> {
    t.validate()?;
    let g = &t.group;
    let mut k = K0Class::zero(g.clone());
    for tp in &t.bad {
        k.add_point(&tp.place.label, tp.place.q, tp.fiber.clone(), Q::one());
    }
    let artin: ArtinDecomposition = g.artin_induction(&t.characters.character())?;
    for (h, a) in artin.nonzero() {
        k.add_field(h, a.clone());
        for tp in &t.bad {
            for w in upper_places(g, h, &tp.place) {
                k.add_point(
                    &tp.place.label,
                    tp.place.q.pow(w.f as u32),
                    FinAbFrob::z_trivial(),
                    -a.clone(),
                );
            }
        }
    }
    Ok(k)
}

/// Data for a finite cover: the subgroup `H` fixing the upper field and,
/// for each lower place, the upper places above it.
#[derive(Clone, Debug)]
pub struct Cover {
    pub group: Arc<FiniteGroup>,
    pub subgroup: Subgroup,
    pub places: Vec<CoverPlace>,
    pub arch: Vec<ArchPlaceData>,
    pub fields: Vec<FieldLabel>,
}

#[derive(Clone, Debug)]
pub struct CoverPlace {
    pub lower: BadPlaceData,
    pub upper: Vec<UpperPlaceSpec>,
}

#[derive(Clone, Debug)]
pub struct UpperPlaceSpec {
    pub label: String,
    pub e: usize,
    pub f: usize,
    /// Double-coset representative; when absent the upper places are
    /// matched with the double cosets in canonical order.
    pub rep: Option<usize>,
}

impl Cover {
    /// The subgroup as a group, with element `i` equal to
    /// `subgroup.members()[i]`.
    pub fn upper_group(&self) -> (FiniteGroup, Vec<usize>) {
        self.group.subgroup_as_group(&self.subgroup)
    }

    /// Upper places with derived data, paired with their specs.
    pub fn resolve(&self, cp: &CoverPlace) -> Result<Vec<(UpperPlaceSpec, UpperPlace)>> {
        let g = &self.group;
        let h = &self.subgroup;
        let derived = upper_places(g, h, &cp.lower);
        if cp.upper.len() != derived.len() {
            return Err(validation(format!(
                "place {}: {} upper places listed, {} expected",
                cp.lower.label,
                cp.upper.len(),
                derived.len()
            )));
        }
        let total: usize = cp.upper.iter().map(|u| u.e * u.f).sum();
        let index = g.order() / h.order();
        if total != index {
            return Err(validation(format!(
                "place {}: sum of e*f is {total}, the index is {index}",
                cp.lower.label
            )));
        }
        let dcs = g.double_cosets(&cp.lower.decomposition, h);
        let mut used = vec![false; dcs.len()];
        let mut out = Vec::new();
        for (k, spec) in cp.upper.iter().enumerate() {
            let (slot, up) = match spec.rep {
                Some(r) => {
                    if r >= g.order() {
                        return Err(validation(format!("upper place {}: bad representative", spec.label)));
                    }
                    let slot = dcs
                        .iter()
                        .position(|dc| dc.binary_search(&r).is_ok())
                        .expect("double cosets cover the group");
                    (slot, upper_place_at(g, h, &cp.lower, r))
                }
                None => (k, derived[k].clone()),
            };
            if used[slot] {
                return Err(validation(format!(
                    "upper place {}: double coset already used",
                    spec.label
                )));
            }
            used[slot] = true;
            if (spec.e, spec.f) != (up.e, up.f) {
                return Err(validation(format!(
                    "upper place {}: listed (e, f) = ({}, {}), derived ({}, {})",
                    spec.label, spec.e, spec.f, up.e, up.f
                )));
            }
            out.push((spec.clone(), up));
        }
        Ok(out)
    }
}

/// `H`-local indices of a subgroup of `G` contained in `H`.
fn localize(embedding: &[usize], s: &Subgroup, hg: &FiniteGroup) -> Result<Subgroup> {
    let members: Vec<usize> = s
        .members()
        .iter()
        .map(|&x| {
            embedding
                .iter()
                .position(|&e| e == x)
                .ok_or_else(|| structural("subgroup is not inside the cover subgroup"))
        })
        .collect::<Result<_>>()?;
    hg.subgroup(&members)
}

/// Pushforward (Weil restriction) of a torus over the cover.
///
/// `upper` must be a torus over the cover subgroup viewed as a group
/// ([`Cover::upper_group`]); its listed places must appear in the cover
/// table with matching data.
pub fn pushforward(cover: &Cover, upper: &CTorusData) -> Result<CTorusData> {
    upper.validate()?;
    let g = &cover.group;
    let h = &cover.subgroup;
    let (hg, emb) = cover.upper_group();
    check_group(&hg, &upper.group)?;
    let y = &upper.characters;
    let n = y.rank();
    let characters = GLattice::induce(g, h, y)?;
    let yd = y.z_dual();
    let cosets = g.left_cosets(h);
    let reps: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
    let mut listed_upper = 0;
    let mut bad = Vec::new();
    for cp in &cover.places {
        cp.lower.validate(g)?;
        let resolved = cover.resolve(cp)?;
        let mut fiber = FinAbFrob::zero();
        let mut blocks: Vec<(usize, usize, IntMatrix, usize)> = Vec::new();
        let mut offset = 0;
        for (spec, up) in &resolved {
            let local = BadPlaceData {
                label: spec.label.clone(),
                q: cp.lower.q.pow(up.f as u32),
                decomposition: localize(&emb, &up.decomposition, &hg)?,
                inertia: localize(&emb, &up.inertia, &hg)?,
                frobenius: emb
                    .iter()
                    .position(|&e| e == up.frobenius)
                    .expect("upper Frobenius lies in H"),
                filtration: Vec::new(),
            };
            let (e_w, amb_w) = match upper.place(&spec.label) {
                Some(tp) => {
                    listed_upper += 1;
                    let d = &tp.place;
                    let frob_ok = local.inertia.contains(hg.mul(hg.inv(local.frobenius), d.frobenius));
                    if d.q != local.q
                        || d.decomposition != local.decomposition
                        || d.inertia != local.inertia
                        || !frob_ok
                    {
                        return Err(validation(format!(
                            "upper place {}: listed data disagrees with the cover",
                            spec.label
                        )));
                    }
                    (tp.fiber.clone(), upper.ambient_comparison(tp)?)
                }
                None => {
                    let cg = component_group(y, &local)?;
                    (cg.free_fiber(), cg.projection)
                }
            };
            fiber = fiber.direct_sum(&FinAbFrob::free(
                block_cycle(e_w.phi(), up.f),
                e_w.order() * up.f,
            )?);
            let m = e_w.generators();
            blocks.push((offset, up.rep, amb_w, m));
            offset += m * up.f;
        }
        // Ambient comparison of the lower place: the basis vector r_j ⊗ y
        // with r_j = φ^i ι g h lands in block i of the upper place of g,
        // as the image of h·y.
        let total_rank = offset;
        let mut amb = IntMatrix::zeros(total_rank, reps.len() * n);
        let v = &cp.lower;
        for (j, &rj) in reps.iter().enumerate() {
            let mut placed = false;
            'search: for ((_, up), (off, rep, amb_w, m)) in resolved.iter().zip(&blocks) {
                for i in 0..up.f {
                    let phi_i = g.pow(v.frobenius, i);
                    for &iota in v.inertia.members() {
                        let x = g.mul(g.mul(phi_i, iota), *rep);
                        let hh = g.mul(g.inv(x), rj);
                        if let Ok(local_h) = h.members().binary_search(&hh) {
                            let img = amb_w.mul(yd.action(local_h));
                            for a in 0..*m {
                                for b in 0..n {
                                    amb.set(off + i * m + a, j * n + b, img.get(a, b).clone());
                                }
                            }
                            placed = true;
                            break 'search;
                        }
                    }
                }
            }
            if !placed {
                return Err(Error::Consistency("coset outside every upper place".into()));
            }
        }
        let lower_dual = characters.z_dual();
        let id = IntMatrix::identity(characters.rank());
        for &iota in v.inertia.members() {
            if !amb.mul(&lower_dual.action(iota).sub(&id)).is_zero() {
                return Err(Error::Consistency(format!(
                    "pushforward comparison at {} does not kill inertia",
                    v.label
                )));
            }
        }
        if fiber.phi().mul(&amb) != amb.mul(lower_dual.action(v.frobenius)) {
            return Err(Error::Consistency(format!(
                "pushforward comparison at {} is not Frobenius-equivariant",
                v.label
            )));
        }
        let cg = component_group(&characters, v)?;
        bad.push(TorusPlace {
            place: v.clone(),
            fiber,
            comparison: amb.mul(&cg.lift),
        });
    }
    if listed_upper != upper.bad.len() {
        return Err(validation("an upper listed place is missing from the cover table"));
    }
    let mut fields = cover.fields.clone();
    for fl in &upper.fields {
        let members: Vec<usize> = fl.subgroup.members().iter().map(|&i| emb[i]).collect();
        let s = g.subgroup(&members)?;
        if !fields.iter().any(|x| g.are_conjugate(&x.subgroup, &s)) {
            fields.push(FieldLabel {
                subgroup: s,
                label: fl.label.clone(),
            });
        }
    }
    let t = CTorusData {
        group: g.clone(),
        base: upper.base,
        characters,
        arch: cover.arch.clone(),
        bad,
        fields,
    };
    t.validate()?;
    Ok(t)
}

/// A morphism `T' -> T''` given on characters (`Y'' -> Y'`) and on
/// fibers (`E' -> E''`) at the places listed on either side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusMorphism {
    pub characters: IntMatrix,
    pub fibers: BTreeMap<String, IntMatrix>,
}

/// Two-term complex `T' -> T''`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusComplex {
    pub source: CTorusData,
    pub target: CTorusData,
    pub morphism: TorusMorphism,
    places: Vec<BadPlaceData>,
}

fn not_constructible(msg: impl Into<String>) -> Error {
    Error::NotConstructible(msg.into())
}

pub fn make_complex(source: &CTorusData, target: &CTorusData, morphism: &TorusMorphism) -> Result<TorusComplex> {
    source.validate()?;
    target.validate()?;
    check_group(&source.group, &target.group)?;
    let a = &morphism.characters;
    let (n1, n2) = (source.characters.rank(), target.characters.rank());
    if a.rows() != n1 || a.cols() != n2 {
        return Err(not_constructible(format!("character map must be {n1}x{n2}")));
    }
    for g in 0..source.group.order() {
        if source.characters.action(g).mul(a) != a.mul(target.characters.action(g)) {
            return Err(not_constructible("character map is not Galois-equivariant"));
        }
    }
    if a.rank() != n2 {
        return Err(not_constructible(
            "generic map is not faithfully flat (character map not injective)",
        ));
    }
    let mut places: Vec<BadPlaceData> = source.bad.iter().map(|p| p.place.clone()).collect();
    for p in &target.bad {
        if !places.iter().any(|x| x.label == p.place.label) {
            places.push(p.place.clone());
        }
    }
    for label in morphism.fibers.keys() {
        if !places.iter().any(|p| &p.label == label) {
            return Err(not_constructible(format!("fiber map at unlisted place {label}")));
        }
    }
    let at = a.transpose();
    for v in &places {
        let (e1, c1) = source.fiber_at(v)?;
        let (e2, c2) = target.fiber_at(v)?;
        let b = morphism
            .fibers
            .get(&v.label)
            .ok_or_else(|| not_constructible(format!("missing fiber map at {}", v.label)))?;
        let (m1, m2) = (e1.generators(), e2.generators());
        if b.rows() != m2 || b.cols() != m1 {
            return Err(not_constructible(format!("fiber map at {} must be {m2}x{m1}", v.label)));
        }
        if b.rank() != m2 {
            return Err(not_constructible(format!(
                "fiber map at {} does not have finite cokernel",
                v.label
            )));
        }
        if b.mul(e1.phi()) != e2.phi().mul(b) {
            return Err(not_constructible(format!(
                "fiber map at {} is not Frobenius-equivariant",
                v.label
            )));
        }
        if b.mul(&c1) != c2.mul(&at) {
            return Err(not_constructible(format!(
                "fiber map at {} is incompatible with the component groups",
                v.label
            )));
        }
    }
    Ok(TorusComplex {
        source: source.clone(),
        target: target.clone(),
        morphism: morphism.clone(),
        places,
    })
}

impl TorusComplex {
    pub fn places(&self) -> &[BadPlaceData] {
        &self.places
    }

    /// Exact: the generic and all fiber maps are isomorphisms.
    pub fn is_exact(&self) -> bool {
        self.morphism.characters.is_unimodular()
            && self.morphism.fibers.values().all(|b| b.is_unimodular())
    }

    /// The dual complex of sheaves `F'' -> F'`: the character map read as
    /// a map of generic lattices and the transposed fiber maps.
    pub fn dual(&self) -> Result<SheafComplex> {
        Ok(SheafComplex {
            source: dualize_torus(&self.target)?,
            target: dualize_torus(&self.source)?,
            generic: self.morphism.characters.clone(),
            fibers: self
                .morphism
                .fibers
                .iter()
                .map(|(k, b)| (k.clone(), b.transpose()))
                .collect(),
        })
    }

    pub fn k0(&self) -> Result<K0Class> {
        Ok(k0_decompose(&self.target)?.sub(&k0_decompose(&self.source)?))
    }
}

/// Two-term complex of sheaves `F_0 -> F_1`, maps given as
/// `M_0 -> M_1` (`generic`, columns indexed by `M_0`) and fiberwise.
#[derive(Clone, Debug)]
pub struct SheafComplex {
    pub source: TfSheafData,
    pub target: TfSheafData,
    pub generic: IntMatrix,
    pub fibers: BTreeMap<String, IntMatrix>,
}

impl SheafComplex {
    pub fn is_exact(&self) -> bool {
        self.generic.is_unimodular() && self.fibers.values().all(|b| b.is_unimodular())
    }
}

/// `Z[G/H]` summed with multiplicities, for tests and generators.
pub fn permutation_sum(g: &Arc<FiniteGroup>, parts: &[(Subgroup, usize)]) -> GLattice {
    let mut acc = GLattice::trivial(g.clone(), 0);
    for (h, k) in parts {
        for _ in 0..*k {
            acc = acc.direct_sum(&GLattice::permutation(g, h));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn one_by_one(x: i64) -> IntMatrix {
        IntMatrix::from_big_rows(vec![vec![BigInt::from(x)]], 1).expect("1x1")
    }
    use crate::qlinalg::q;

    fn z2() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(2))
    }

    fn sigma(g: &FiniteGroup) -> usize {
        (0..g.order()).find(|&x| x != g.identity()).unwrap()
    }

    fn sign(g: &Arc<FiniteGroup>) -> GLattice {
        let id = g.identity();
        GLattice::from_sign(g.clone(), move |x| if x == id { 1 } else { -1 }).unwrap()
    }

    fn ramified_at_2(g: &FiniteGroup) -> BadPlaceData {
        BadPlaceData {
            label: "2".into(),
            q: 2,
            decomposition: g.whole(),
            inertia: g.whole(),
            frobenius: g.identity(),
            filtration: vec![g.whole(), g.whole(), g.trivial_subgroup()],
        }
    }

    /// Norm-one torus of Q(i)/Q with its ramified place listed.
    fn norm1_qi() -> CTorusData {
        let g = z2();
        let y = sign(&g);
        let v = ramified_at_2(&g);
        CTorusData {
            group: g.clone(),
            base: Base::Rationals,
            characters: y,
            arch: vec![],
            bad: vec![TorusPlace {
                place: v,
                fiber: FinAbFrob::zero(),
                comparison: IntMatrix::zeros(0, 0),
            }],
            fields: vec![],
        }
    }

    #[test]
    fn split_and_constant_are_dual() {
        let t = dualize_sheaf(&TfSheafData::constant_z()).unwrap();
        assert_eq!(t, CTorusData::split_gm());
        assert_eq!(dualize_torus(&t).unwrap(), TfSheafData::constant_z());
    }

    #[test]
    fn skyscraper_dual() {
        let g = Arc::new(FiniteGroup::trivial());
        let f = TfSheafData {
            group: g.clone(),
            base: Base::Rationals,
            generic: GLattice::trivial(g.clone(), 0),
            arch: vec![],
            bad: vec![SheafPlace {
                place: BadPlaceData::unramified("2", 2, &g, 0),
                fiber: FinAbFrob::z_trivial(),
                specialization: IntMatrix::zeros(0, 1),
            }],
            fields: vec![],
        };
        let t = dualize_sheaf(&f).unwrap();
        assert_eq!(t.characters.rank(), 0);
        assert_eq!(t.bad[0].fiber, FinAbFrob::z_trivial());
        assert_eq!(f.injective_specializations(), vec![("2".to_string(), false)]);
        assert_eq!(check_bidual(&f).unwrap(), BidualReport::Identity);
    }

    #[test]
    fn sign_lattice_sheaf_dual() {
        let g = z2();
        let f = TfSheafData {
            group: g.clone(),
            base: Base::Rationals,
            generic: sign(&g),
            arch: vec![],
            bad: vec![SheafPlace {
                place: ramified_at_2(&g),
                fiber: FinAbFrob::zero(),
                specialization: IntMatrix::zeros(1, 0),
            }],
            fields: vec![],
        };
        let t = dualize_sheaf(&f).unwrap();
        assert_eq!(t.characters, sign(&g));
        assert_eq!(t.bad[0].fiber.generators(), 0);
        assert_eq!(check_bidual(&f).unwrap(), BidualReport::Identity);
    }

    #[test]
    fn component_group_examples() {
        let g = z2();
        let y = GLattice::trivial(g.clone(), 1);
        let v = BadPlaceData::unramified("5", 5, &g, g.identity());
        let cg = component_group(&y, &v).unwrap();
        assert_eq!(cg.free_frobenius(), one_by_one(1));
        let cg = component_group(&sign(&g), &ramified_at_2(&g)).unwrap();
        assert_eq!(cg.module.torsion_invariants(), vec![BigInt::from(2)]);
        assert_eq!(cg.free_rank(), 0);
        assert!(cg.wild);
        let v = BadPlaceData::unramified("3", 3, &g, sigma(&g));
        let cg = component_group(&sign(&g), &v).unwrap();
        assert_eq!(cg.free_frobenius(), one_by_one(-1));
    }

    #[test]
    fn good_reduction_flags() {
        let t = norm1_qi();
        assert_eq!(t.good_reduction_locus().unwrap(), vec![("2".to_string(), false)]);
        let g = z2();
        let v = BadPlaceData::unramified("3", 3, &g, sigma(&g));
        let inert = |fiber_phi: i64| CTorusData {
            group: g.clone(),
            base: Base::Rationals,
            characters: sign(&g),
            arch: vec![],
            bad: vec![TorusPlace {
                place: v.clone(),
                fiber: FinAbFrob::free(one_by_one(fiber_phi), 2).unwrap(),
                comparison: one_by_one(1),
            }],
            fields: vec![],
        };
        assert!(inert(-1).good_reduction_locus().unwrap()[0].1);
        assert!(inert(1).validate().is_err());
    }

    #[test]
    fn k0_of_norm_one_torus() {
        let t = norm1_qi();
        let k = k0_decompose(&t).unwrap();
        let g = &t.group;
        assert_eq!(k.field_coefficient(&g.trivial_subgroup()), q(1));
        assert_eq!(k.field_coefficient(&g.whole()), q(-1));
        assert!(k.point_terms.is_empty());
    }

    #[test]
    fn k0_of_split_and_skyscraper() {
        let k = k0_decompose(&CTorusData::split_gm()).unwrap();
        assert_eq!(k.field_terms.len(), 1);
        assert!(k.point_terms.is_empty());
        let g = Arc::new(FiniteGroup::trivial());
        let sky = CTorusData {
            group: g.clone(),
            base: Base::Rationals,
            characters: GLattice::trivial(g.clone(), 0),
            arch: vec![],
            bad: vec![TorusPlace {
                place: BadPlaceData::unramified("3", 3, &g, 0),
                fiber: FinAbFrob::z_trivial(),
                comparison: IntMatrix::zeros(1, 0),
            }],
            fields: vec![],
        };
        let k = k0_decompose(&sky).unwrap();
        assert!(k.field_terms.is_empty());
        assert_eq!(k.point_terms.len(), 1);
        assert_eq!((k.point_terms[0].q, k.point_terms[0].coeff.clone()), (3, q(1)));
    }

    #[test]
    fn upper_places_of_quadratic_field() {
        let g = z2();
        let one = g.trivial_subgroup();
        let up = upper_places(&g, &one, &ramified_at_2(&g));
        assert_eq!(up.len(), 1);
        assert_eq!((up[0].e, up[0].f), (2, 1));
        let inert = BadPlaceData::unramified("3", 3, &g, sigma(&g));
        let up = upper_places(&g, &one, &inert);
        assert_eq!((up.len(), up[0].e, up[0].f), (1, 1, 2));
        let split = BadPlaceData::unramified("5", 5, &g, g.identity());
        let up = upper_places(&g, &one, &split);
        assert_eq!(up.len(), 2);
        assert!(up.iter().all(|w| (w.e, w.f) == (1, 1)));
    }

    fn qi_cover(lower: Vec<(BadPlaceData, Vec<(&str, usize, usize)>)>) -> Cover {
        let g = z2();
        Cover {
            group: g.clone(),
            subgroup: g.trivial_subgroup(),
            places: lower
                .into_iter()
                .map(|(v, ups)| CoverPlace {
                    lower: v,
                    upper: ups
                        .into_iter()
                        .map(|(l, e, f)| UpperPlaceSpec {
                            label: l.into(),
                            e,
                            f,
                            rep: None,
                        })
                        .collect(),
                })
                .collect(),
            arch: vec![],
            fields: vec![],
        }
    }

    #[test]
    fn pushforward_of_split_gm_over_qi() {
        let g = z2();
        let cover = qi_cover(vec![
            (ramified_at_2(&g), vec![("(1+i)", 2, 1)]),
            (BadPlaceData::unramified("3", 3, &g, sigma(&g)), vec![("3", 1, 2)]),
        ]);
        let (hg, _) = cover.upper_group();
        let hg = Arc::new(hg);
        let upper = CTorusData {
            group: hg.clone(),
            base: Base::Rationals,
            characters: GLattice::trivial(hg, 1),
            arch: vec![],
            bad: vec![],
            fields: vec![],
        };
        let lower = pushforward(&cover, &upper).unwrap();
        assert_eq!(lower.characters.character().values, vec![q(2), q(0)]);
        let inert = lower.place("3").unwrap();
        assert_eq!(*inert.fiber.phi(), IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]));
        assert!(inert.comparison.is_unimodular());
        assert!(lower.good_reduction_locus().unwrap()[1].1);
    }

    #[test]
    fn cover_index_mismatch_is_rejected() {
        let g = z2();
        let cover = qi_cover(vec![(ramified_at_2(&g), vec![("(1+i)", 1, 1)])]);
        let (hg, _) = cover.upper_group();
        let hg = Arc::new(hg);
        let upper = CTorusData {
            group: hg.clone(),
            base: Base::Rationals,
            characters: GLattice::trivial(hg, 1),
            arch: vec![],
            bad: vec![],
            fields: vec![],
        };
        assert!(matches!(pushforward(&cover, &upper), Err(Error::Validation(_))));
    }

    #[test]
    fn complex_conditions() {
        let t = CTorusData::split_gm();
        let ok = TorusMorphism {
            characters: one_by_one(2),
            fibers: BTreeMap::new(),
        };
        let c = make_complex(&t, &t, &ok).unwrap();
        assert!(!c.is_exact());
        assert!(!c.dual().unwrap().is_exact());
        assert!(c.k0().unwrap().is_zero());
        let bad = TorusMorphism {
            characters: one_by_one(0),
            fibers: BTreeMap::new(),
        };
        let err = make_complex(&t, &t, &bad).unwrap_err();
        assert!(err.to_string().contains("faithfully flat"), "{err}");
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power_base(8), Some((2, 3)));
        assert_eq!(prime_power_base(12), None);
        assert_eq!(prime_power_base(7), Some((7, 1)));
    }
}
