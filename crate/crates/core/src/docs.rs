//! Text formats: `ctdata-v1` for sheaves, tori and two-term complexes, and
//! `oracle-v1` for place oracles. Both are TOML; `to_text` writes the
//! canonical form, and parsing canonical text then writing it back is the
//! identity on bytes.
//!
//! Conventions shared by both formats:
//!
//! * `group = { degree = n, elements = [...] }` lists every element in
//!   cycle notation; everywhere else an element is its index in this list
//!   and a subgroup is the sorted list of its member indices;
//! * a matrix is `{ shape = [rows, cols], entries = [...] }`, row-major;
//! * a lattice is `{ rank = r, action = [...] }` with one `r x r` matrix
//!   (as nested rows) per group element;
//! * a fiber is `{ relations = M, phi = M, order = k }`;
//! * `base` is `"Z"` or `"P1/F<q>"`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::Deserialize;

use crate::arith_data::toml_string;
use crate::constructible::{
    make_complex, ArchKind, ArchPlaceData, BadPlaceData, Base, CTorusData, FieldLabel, SheafPlace, TfSheafData,
    TorusComplex, TorusMorphism, TorusPlace,
};
use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, Perm, Subgroup};
use crate::l_series::{OracleMode, PlaceOracle};
use crate::lattices::{FinAbFrob, GLattice, IntMatrix};

pub const CTDATA_SCHEMA: &str = "ctdata-v1";
pub const ORACLE_SCHEMA: &str = "oracle-v1";

fn schema_error(schema: &str, detail: impl Into<String>) -> Error {
    Error::Schema {
        schema: schema.into(),
        detail: detail.into(),
    }
}

/// A parsed `ctdata-v1` document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    Sheaf(TfSheafData),
    Torus(CTorusData),
    Complex(TorusComplex),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Sheaf(_) => "sheaf",
            Document::Torus(_) => "torus",
            Document::Complex(_) => "complex",
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        match self {
            Document::Sheaf(f) => &f.group,
            Document::Torus(t) => &t.group,
            Document::Complex(c) => &c.target.group,
        }
    }

    pub fn parse(text: &str) -> Result<Document> {
        let raw: RawDoc = toml::from_str(text).map_err(|e| schema_error(CTDATA_SCHEMA, e.to_string()))?;
        if raw.schema != CTDATA_SCHEMA {
            return Err(schema_error(CTDATA_SCHEMA, format!("unexpected schema {:?}", raw.schema)));
        }
        let g = Arc::new(raw.group.build()?);
        let top = || -> Result<RawBody> {
            Ok(RawBody {
                base: raw
                    .base
                    .clone()
                    .ok_or_else(|| schema_error(CTDATA_SCHEMA, "missing base"))?,
                lattice: raw
                    .lattice
                    .clone()
                    .ok_or_else(|| schema_error(CTDATA_SCHEMA, "missing lattice"))?,
                field: raw.field.clone(),
                arch: raw.arch.clone(),
                place: raw.place.clone(),
            })
        };
        let nested_absent = raw.source.is_none() && raw.target.is_none() && raw.morphism.is_none();
        match raw.kind.as_str() {
            "sheaf" if nested_absent => {
                let f = top()?.sheaf(&g)?;
                f.validate()?;
                Ok(Document::Sheaf(f))
            }
            "torus" if nested_absent => {
                let t = top()?.torus(&g)?;
                t.validate()?;
                Ok(Document::Torus(t))
            }
            "complex" => {
                if raw.base.is_some() || raw.lattice.is_some() || !raw.place.is_empty() || !raw.arch.is_empty() {
                    return Err(schema_error(CTDATA_SCHEMA, "a complex keeps its data under source and target"));
                }
                let (Some(s), Some(t), Some(m)) = (raw.source, raw.target, raw.morphism) else {
                    return Err(schema_error(CTDATA_SCHEMA, "a complex needs source, target and morphism"));
                };
                let s = s.torus(&g)?;
                let t = t.torus(&g)?;
                let morphism = TorusMorphism {
                    characters: m.characters.build()?,
                    fibers: m
                        .fiber
                        .into_iter()
                        .map(|f| Ok((f.label, f.map.build()?)))
                        .collect::<Result<BTreeMap<_, _>>>()?,
                };
                Ok(Document::Complex(make_complex(&s, &t, &morphism)?))
            }
            "sheaf" | "torus" => Err(schema_error(CTDATA_SCHEMA, "source, target and morphism belong to complexes")),
            k => Err(schema_error(CTDATA_SCHEMA, format!("unknown kind {k:?}"))),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "schema = \"{CTDATA_SCHEMA}\"");
        let _ = writeln!(s, "kind = \"{}\"", self.kind());
        let _ = writeln!(s, "group = {}", group_text(self.group()));
        match self {
            Document::Sheaf(f) => write_sheaf(&mut s, "", f),
            Document::Torus(t) => write_torus(&mut s, "", t),
            Document::Complex(c) => {
                s.push_str("\n[source]\n");
                write_torus(&mut s, "source.", &c.source);
                s.push_str("\n[target]\n");
                write_torus(&mut s, "target.", &c.target);
                s.push_str("\n[morphism]\n");
                let _ = writeln!(s, "characters = {}", matrix_text(&c.morphism.characters));
                for (label, m) in &c.morphism.fibers {
                    s.push_str("\n[[morphism.fiber]]\n");
                    let _ = writeln!(s, "label = {}", toml_string(label));
                    let _ = writeln!(s, "map = {}", matrix_text(m));
                }
            }
        }
        s
    }
}

/// Parses and writes back, failing unless the input was canonical.
pub fn check_canonical(text: &str) -> Result<Document> {
    let d = Document::parse(text)?;
    if d.to_text() != text {
        return Err(schema_error(CTDATA_SCHEMA, "document is valid but not in canonical form"));
    }
    Ok(d)
}

fn base_text(b: Base) -> String {
    match b {
        Base::Rationals => "Z".into(),
        Base::ProjectiveLine { q } => format!("P1/F{q}"),
    }
}

fn parse_base(s: &str) -> Result<Base> {
    if s == "Z" {
        return Ok(Base::Rationals);
    }
    s.strip_prefix("P1/F")
        .and_then(|q| q.parse::<u64>().ok())
        .map(|q| Base::ProjectiveLine { q })
        .ok_or_else(|| schema_error(CTDATA_SCHEMA, format!("base must be \"Z\" or \"P1/F<q>\", got {s:?}")))
}

fn list<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = xs.into_iter().map(|x| x.to_string()).collect();
    format!("[{}]", v.join(", "))
}

fn group_text(g: &FiniteGroup) -> String {
    let els: Vec<String> = g.elements().iter().map(|p| toml_string(&p.to_string())).collect();
    format!("{{ degree = {}, elements = [{}] }}", g.degree(), els.join(", "))
}

fn subgroup_text(h: &Subgroup) -> String {
    list(h.members())
}

fn matrix_text(m: &IntMatrix) -> String {
    let entries = m.to_rows().into_iter().flatten();
    format!("{{ shape = [{}, {}], entries = {} }}", m.rows(), m.cols(), list(entries))
}

fn rows_text(m: &IntMatrix) -> String {
    list(m.to_rows().into_iter().map(list))
}

fn lattice_text(l: &GLattice) -> String {
    format!(
        "{{ rank = {}, action = {} }}",
        l.rank(),
        list(l.actions().iter().map(rows_text))
    )
}

fn fiber_text(a: &FinAbFrob) -> String {
    format!(
        "{{ relations = {}, phi = {}, order = {} }}",
        matrix_text(a.group().relations()),
        matrix_text(a.phi()),
        a.order()
    )
}

fn write_place_header(s: &mut String, v: &BadPlaceData) {
    let _ = writeln!(s, "label = {}", toml_string(&v.label));
    let _ = writeln!(s, "q = {}", v.q);
    let _ = writeln!(s, "decomposition = {}", subgroup_text(&v.decomposition));
    let _ = writeln!(s, "inertia = {}", subgroup_text(&v.inertia));
    let _ = writeln!(s, "frobenius = {}", v.frobenius);
    let _ = writeln!(s, "filtration = {}", list(v.filtration.iter().map(subgroup_text)));
}

fn write_common(s: &mut String, prefix: &str, base: Base, lattice: &GLattice, fields: &[FieldLabel], arch: &[ArchPlaceData]) {
    let _ = writeln!(s, "base = \"{}\"", base_text(base));
    let _ = writeln!(s, "lattice = {}", lattice_text(lattice));
    for f in fields {
        let _ = writeln!(s, "\n[[{prefix}field]]");
        let _ = writeln!(s, "subgroup = {}", subgroup_text(&f.subgroup));
        let _ = writeln!(s, "label = {}", toml_string(&f.label));
    }
    for a in arch {
        let _ = writeln!(s, "\n[[{prefix}arch]]");
        let _ = writeln!(s, "label = {}", toml_string(&a.label));
        let kind = match a.kind {
            ArchKind::Real => "real",
            ArchKind::Complex => "complex",
        };
        let _ = writeln!(s, "kind = \"{kind}\"");
        let _ = writeln!(s, "conjugation = {}", a.conjugation);
    }
}

fn write_torus(s: &mut String, prefix: &str, t: &CTorusData) {
    write_common(s, prefix, t.base, &t.characters, &t.fields, &t.arch);
    for tp in &t.bad {
        let _ = writeln!(s, "\n[[{prefix}place]]");
        write_place_header(s, &tp.place);
        let _ = writeln!(s, "fiber = {}", fiber_text(&tp.fiber));
        let _ = writeln!(s, "comparison = {}", matrix_text(&tp.comparison));
    }
}

fn write_sheaf(s: &mut String, prefix: &str, f: &TfSheafData) {
    write_common(s, prefix, f.base, &f.generic, &f.fields, &f.arch);
    for sp in &f.bad {
        let _ = writeln!(s, "\n[[{prefix}place]]");
        write_place_header(s, &sp.place);
        let _ = writeln!(s, "fiber = {}", fiber_text(&sp.fiber));
        let _ = writeln!(s, "specialization = {}", matrix_text(&sp.specialization));
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    schema: String,
    kind: String,
    group: RawGroup,
    base: Option<String>,
    lattice: Option<RawLattice>,
    #[serde(default)]
    field: Vec<RawField>,
    #[serde(default)]
    arch: Vec<RawArch>,
    #[serde(default)]
    place: Vec<RawPlace>,
    source: Option<RawBody>,
    target: Option<RawBody>,
    morphism: Option<RawMorphism>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    degree: usize,
    elements: Vec<String>,
}

impl RawGroup {
    fn build(&self) -> Result<FiniteGroup> {
        let els = self
            .elements
            .iter()
            .map(|e| Perm::parse(self.degree, e))
            .collect::<Result<Vec<_>>>()?;
        FiniteGroup::from_elements(self.degree, els)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    shape: [usize; 2],
    entries: Vec<i64>,
}

impl RawMatrix {
    fn build(&self) -> Result<IntMatrix> {
        let [r, c] = self.shape;
        if self.entries.len() != r * c {
            return Err(schema_error(
                CTDATA_SCHEMA,
                format!("matrix of shape {r}x{c} has {} entries", self.entries.len()),
            ));
        }
        let rows: Vec<Vec<BigInt>> = (0..r)
            .map(|i| self.entries[i * c..(i + 1) * c].iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        IntMatrix::from_big_rows(rows, c)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    rank: usize,
    action: Vec<Vec<Vec<i64>>>,
}

impl RawLattice {
    fn build(&self, g: &Arc<FiniteGroup>) -> Result<GLattice> {
        if self.action.len() != g.order() {
            return Err(schema_error(
                CTDATA_SCHEMA,
                format!("lattice gives {} matrices for {} elements", self.action.len(), g.order()),
            ));
        }
        let mats = self
            .action
            .iter()
            .map(|m| {
                if m.len() != self.rank {
                    return Err(schema_error(CTDATA_SCHEMA, "action matrix has the wrong number of rows"));
                }
                IntMatrix::from_rows_with_cols(m, self.rank)
            })
            .collect::<Result<Vec<_>>>()?;
        GLattice::new(g.clone(), self.rank, mats)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    subgroup: Vec<usize>,
    label: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArch {
    label: String,
    kind: String,
    conjugation: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFiber {
    relations: RawMatrix,
    phi: RawMatrix,
    order: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlace {
    label: String,
    q: u64,
    decomposition: Vec<usize>,
    inertia: Vec<usize>,
    frobenius: usize,
    #[serde(default)]
    filtration: Vec<Vec<usize>>,
    fiber: Option<RawFiber>,
    comparison: Option<RawMatrix>,
    specialization: Option<RawMatrix>,
}

impl RawPlace {
    fn place(&self, g: &FiniteGroup) -> Result<BadPlaceData> {
        if self.frobenius >= g.order() {
            return Err(schema_error(CTDATA_SCHEMA, format!("place {}: frobenius index out of range", self.label)));
        }
        Ok(BadPlaceData {
            label: self.label.clone(),
            q: self.q,
            decomposition: g.subgroup(&self.decomposition)?,
            inertia: g.subgroup(&self.inertia)?,
            frobenius: self.frobenius,
            filtration: self
                .filtration
                .iter()
                .map(|h| g.subgroup(h))
                .collect::<Result<Vec<_>>>()?,
        })
    }

    fn fiber(&self) -> Result<FinAbFrob> {
        let f = self
            .fiber
            .as_ref()
            .ok_or_else(|| schema_error(CTDATA_SCHEMA, format!("place {}: missing fiber", self.label)))?;
        FinAbFrob::new(f.relations.build()?, f.phi.build()?, f.order)
    }

    fn bare(&self) -> Result<()> {
        if self.fiber.is_some() || self.comparison.is_some() || self.specialization.is_some() {
            return Err(schema_error(ORACLE_SCHEMA, format!("oracle row {} carries fiber data", self.label)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBody {
    base: String,
    lattice: RawLattice,
    #[serde(default)]
    field: Vec<RawField>,
    #[serde(default)]
    arch: Vec<RawArch>,
    #[serde(default)]
    place: Vec<RawPlace>,
}

impl RawBody {
    fn common(&self, g: &Arc<FiniteGroup>) -> Result<(Base, GLattice, Vec<FieldLabel>, Vec<ArchPlaceData>)> {
        let fields = self
            .field
            .iter()
            .map(|f| {
                Ok(FieldLabel {
                    subgroup: g.subgroup(&f.subgroup)?,
                    label: f.label.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let arch = self
            .arch
            .iter()
            .map(|a| {
                let kind = match a.kind.as_str() {
                    "real" => ArchKind::Real,
                    "complex" => ArchKind::Complex,
                    k => return Err(schema_error(CTDATA_SCHEMA, format!("unknown archimedean kind {k:?}"))),
                };
                if a.conjugation >= g.order() {
                    return Err(schema_error(CTDATA_SCHEMA, "conjugation index out of range"));
                }
                Ok(ArchPlaceData {
                    label: a.label.clone(),
                    kind,
                    conjugation: a.conjugation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((parse_base(&self.base)?, self.lattice.build(g)?, fields, arch))
    }

    fn torus(&self, g: &Arc<FiniteGroup>) -> Result<CTorusData> {
        let (base, characters, fields, arch) = self.common(g)?;
        let bad = self
            .place
            .iter()
            .map(|p| {
                if p.specialization.is_some() {
                    return Err(schema_error(CTDATA_SCHEMA, format!("torus place {} has a specialization", p.label)));
                }
                let comparison = p
                    .comparison
                    .as_ref()
                    .ok_or_else(|| schema_error(CTDATA_SCHEMA, format!("place {}: missing comparison", p.label)))?
                    .build()?;
                Ok(TorusPlace {
                    place: p.place(g)?,
                    fiber: p.fiber()?,
                    comparison,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let t = CTorusData {
            group: g.clone(),
            base,
            characters,
            arch,
            bad,
            fields,
        };
        Ok(t)
    }

    fn sheaf(&self, g: &Arc<FiniteGroup>) -> Result<TfSheafData> {
        let (base, generic, fields, arch) = self.common(g)?;
        let bad = self
            .place
            .iter()
            .map(|p| {
                if p.comparison.is_some() {
                    return Err(schema_error(CTDATA_SCHEMA, format!("sheaf place {} has a comparison", p.label)));
                }
                let specialization = p
                    .specialization
                    .as_ref()
                    .ok_or_else(|| schema_error(CTDATA_SCHEMA, format!("place {}: missing specialization", p.label)))?
                    .build()?;
                Ok(SheafPlace {
                    place: p.place(g)?,
                    fiber: p.fiber()?,
                    specialization,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TfSheafData {
            group: g.clone(),
            base,
            generic,
            arch,
            bad,
            fields,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMorphism {
    characters: RawMatrix,
    #[serde(default)]
    fiber: Vec<RawFiberMap>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFiberMap {
    label: String,
    map: RawMatrix,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    schema: String,
    mode: String,
    group: RawGroup,
    modulus: Option<u64>,
    frobenius: Option<Vec<[u64; 2]>>,
    bound: Option<u64>,
    per_norm: Option<usize>,
    #[serde(default, rename = "override")]
    overrides: Vec<RawPlace>,
    #[serde(default)]
    place: Vec<RawPlace>,
}

/// Parses an `oracle-v1` document. Abelian mode:
/// `modulus`, `frobenius = [[residue, element], ...]` and optional
/// `[[override]]` rows; table mode: `bound`, `per_norm` and `[[place]]`
/// rows.
pub fn parse_oracle(text: &str) -> Result<PlaceOracle> {
    let raw: RawOracle = toml::from_str(text).map_err(|e| schema_error(ORACLE_SCHEMA, e.to_string()))?;
    if raw.schema != ORACLE_SCHEMA {
        return Err(schema_error(ORACLE_SCHEMA, format!("unexpected schema {:?}", raw.schema)));
    }
    let g = Arc::new(raw.group.build()?);
    let rows = |v: &[RawPlace]| -> Result<Vec<BadPlaceData>> {
        v.iter()
            .map(|p| {
                p.bare()?;
                p.place(&g)
            })
            .collect()
    };
    match raw.mode.as_str() {
        "abelian" => {
            if raw.bound.is_some() || raw.per_norm.is_some() || !raw.place.is_empty() {
                return Err(schema_error(ORACLE_SCHEMA, "abelian mode takes modulus, frobenius and override rows"));
            }
            let modulus = raw
                .modulus
                .ok_or_else(|| schema_error(ORACLE_SCHEMA, "abelian mode needs a modulus"))?;
            let pairs = raw
                .frobenius
                .ok_or_else(|| schema_error(ORACLE_SCHEMA, "abelian mode needs a frobenius table"))?;
            let mut map = BTreeMap::new();
            for [a, x] in pairs {
                if x as usize >= g.order() {
                    return Err(schema_error(ORACLE_SCHEMA, format!("element index {x} out of range")));
                }
                if map.insert(a, x as usize).is_some() {
                    return Err(schema_error(ORACLE_SCHEMA, format!("residue {a} given twice")));
                }
            }
            let overrides = rows(&raw.overrides)?;
            PlaceOracle::abelian(g.clone(), modulus, map, overrides)
        }
        "table" => {
            if raw.modulus.is_some() || raw.frobenius.is_some() || !raw.overrides.is_empty() {
                return Err(schema_error(ORACLE_SCHEMA, "table mode takes bound, per_norm and place rows"));
            }
            let bound = raw
                .bound
                .ok_or_else(|| schema_error(ORACLE_SCHEMA, "table mode needs a bound"))?;
            let per_norm = raw.per_norm.unwrap_or(1);
            PlaceOracle::table(g.clone(), rows(&raw.place)?, bound, per_norm)
        }
        m => Err(schema_error(ORACLE_SCHEMA, format!("unknown mode {m:?}"))),
    }
}

/// Canonical `oracle-v1` text.
pub fn oracle_to_text(o: &PlaceOracle) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "schema = \"{ORACLE_SCHEMA}\"");
    match o.mode() {
        OracleMode::Abelian {
            modulus,
            frobenius,
            overrides,
        } => {
            s.push_str("mode = \"abelian\"\n");
            let _ = writeln!(s, "group = {}", group_text(o.group()));
            let _ = writeln!(s, "modulus = {modulus}");
            let pairs: Vec<String> = frobenius.iter().map(|(a, x)| format!("[{a}, {x}]")).collect();
            let _ = writeln!(s, "frobenius = [{}]", pairs.join(", "));
            for v in overrides {
                s.push_str("\n[[override]]\n");
                write_place_header(&mut s, v);
            }
        }
        OracleMode::Table { rows, bound, per_norm } => {
            s.push_str("mode = \"table\"\n");
            let _ = writeln!(s, "group = {}", group_text(o.group()));
            let _ = writeln!(s, "bound = {bound}");
            let _ = writeln!(s, "per_norm = {per_norm}");
            for v in rows {
                s.push_str("\n[[place]]\n");
                write_place_header(&mut s, v);
            }
        }
    }
    s
}
