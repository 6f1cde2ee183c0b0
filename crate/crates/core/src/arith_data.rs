//! Number-field invariants: bundled fixtures, an `nfrec-v1` cache and an
//! optional remote client, plus the Dedekind zeta residue.
//!
//! A record file is flat TOML in a fixed key order:
//!
//! ```text
//! schema = "nfrec-v1"
//! label = "Q(i)"
//! degree = 2
//! r1 = 0
//! r2 = 1
//! disc = -4
//! class_number = 1
//! regulator = "1"
//! roots_of_unity = 4
//! ramified = [[2, 2]]
//! abelian_modulus = 4
//! abelian_kernel = [1]
//! ```
//!
//! `ramified` pairs a prime with its exponent in `|disc|`. The optional
//! `abelian_modulus` and `abelian_kernel` describe an abelian field as the
//! fixed field of a subgroup of `(Z/f)^*`.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::real::Real;

pub const NFREC_SCHEMA: &str = "nfrec-v1";

/// Invariants of a number field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberFieldRecord {
    pub label: String,
    pub degree: u32,
    pub r1: u32,
    pub r2: u32,
    pub disc: i64,
    pub class_number: u64,
    /// Decimal string, 50 significant digits.
    pub regulator: String,
    pub roots_of_unity: u64,
    pub ramified: Vec<(u64, u32)>,
    pub abelian: Option<AbelianDescription>,
}

/// The field cut out by `kernel ⊂ (Z/modulus)^*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianDescription {
    pub modulus: u64,
    pub kernel: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    schema: String,
    label: String,
    degree: u32,
    r1: u32,
    r2: u32,
    disc: i64,
    class_number: u64,
    regulator: String,
    roots_of_unity: u64,
    #[serde(default)]
    ramified: Vec<(u64, u32)>,
    abelian_modulus: Option<u64>,
    abelian_kernel: Option<Vec<u64>>,
}

fn schema_error(detail: impl Into<String>) -> Error {
    Error::Schema {
        schema: NFREC_SCHEMA.into(),
        detail: detail.into(),
    }
}

impl NumberFieldRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| schema_error(format!("{}: {m}", self.label));
        if self.degree != self.r1 + 2 * self.r2 {
            return Err(bad("degree must equal r1 + 2 r2"));
        }
        if self.disc == 0 {
            return Err(bad("discriminant must be nonzero"));
        }
        if self.class_number == 0 {
            return Err(bad("class number must be positive"));
        }
        if self.roots_of_unity == 0 || self.roots_of_unity % 2 != 0 {
            return Err(bad("number of roots of unity must be even"));
        }
        let reg = Real::parse(&self.regulator, 64).ok_or_else(|| bad("regulator is not a decimal"))?;
        if reg.is_negative() || reg.is_zero() {
            return Err(bad("regulator must be positive"));
        }
        if self.r1 + self.r2 == 1 && self.regulator != "1" {
            return Err(bad("unit rank 0 requires regulator 1"));
        }
        if let Some(a) = &self.abelian {
            if a.modulus == 0 || a.kernel.is_empty() {
                return Err(bad("abelian description needs a modulus and a kernel"));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<NumberFieldRecord> {
        let raw: RawRecord = toml::from_str(text).map_err(|e| schema_error(e.to_string()))?;
        if raw.schema != NFREC_SCHEMA {
            return Err(schema_error(format!("unexpected schema {:?}", raw.schema)));
        }
        let abelian = match (raw.abelian_modulus, raw.abelian_kernel) {
            (Some(modulus), Some(kernel)) => Some(AbelianDescription { modulus, kernel }),
            (None, None) => None,
            _ => return Err(schema_error("abelian_modulus and abelian_kernel go together")),
        };
        let r = NumberFieldRecord {
            label: raw.label,
            degree: raw.degree,
            r1: raw.r1,
            r2: raw.r2,
            disc: raw.disc,
            class_number: raw.class_number,
            regulator: raw.regulator,
            roots_of_unity: raw.roots_of_unity,
            ramified: raw.ramified,
            abelian,
        };
        r.validate()?;
        Ok(r)
    }

    /// Canonical text; `parse` followed by `to_text` is the identity on
    /// canonical input.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("schema = \"{NFREC_SCHEMA}\"\n"));
        s.push_str(&format!("label = {}\n", toml_string(&self.label)));
        s.push_str(&format!("degree = {}\n", self.degree));
        s.push_str(&format!("r1 = {}\n", self.r1));
        s.push_str(&format!("r2 = {}\n", self.r2));
        s.push_str(&format!("disc = {}\n", self.disc));
        s.push_str(&format!("class_number = {}\n", self.class_number));
        s.push_str(&format!("regulator = {}\n", toml_string(&self.regulator)));
        s.push_str(&format!("roots_of_unity = {}\n", self.roots_of_unity));
        let ram: Vec<String> = self.ramified.iter().map(|(p, e)| format!("[{p}, {e}]")).collect();
        s.push_str(&format!("ramified = [{}]\n", ram.join(", ")));
        if let Some(a) = &self.abelian {
            s.push_str(&format!("abelian_modulus = {}\n", a.modulus));
            let k: Vec<String> = a.kernel.iter().map(|x| x.to_string()).collect();
            s.push_str(&format!("abelian_kernel = [{}]\n", k.join(", ")));
        }
        s
    }

    pub fn regulator_real(&self, p: usize) -> Real {
        Real::parse(&self.regulator, p).expect("validated regulator")
    }
}

/// TOML basic string with escapes.
pub fn toml_string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

const FIXTURES: [(&str, &str); 6] = [
    ("Q", include_str!("../fixtures/Q.nfrec")),
    ("Q(i)", include_str!("../fixtures/Qi.nfrec")),
    ("Q(sqrt-3)", include_str!("../fixtures/Qsqrt-3.nfrec")),
    ("Q(sqrt5)", include_str!("../fixtures/Qsqrt5.nfrec")),
    ("Q(sqrt2)", include_str!("../fixtures/Qsqrt2.nfrec")),
    ("Q(zeta5)", include_str!("../fixtures/Qzeta5.nfrec")),
];

pub fn fixture_labels() -> Vec<&'static str> {
    FIXTURES.iter().map(|(l, _)| *l).collect()
}

/// Canonical text of a bundled fixture.
pub fn fixture_text(label: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(l, _)| *l == label).map(|(_, t)| *t)
}

pub fn load_fixture(label: &str) -> Result<NumberFieldRecord> {
    let text = fixture_text(label).ok_or_else(|| Error::UnknownField {
        label: label.to_string(),
        available: fixture_labels().join(", "),
    })?;
    NumberFieldRecord::parse(text)
}

/// `ρ_K = 2^{r1} (2π)^{r2} h R / (w sqrt|d|)`.
pub fn residue_rho(r: &NumberFieldRecord, p: usize) -> Real {
    let two = Real::from_i64(2, p);
    let two_pi = &two * &Real::pi(p);
    let num = &(&(&two.powi(r.r1 as i64) * &two_pi.powi(r.r2 as i64)) * &Real::from_u64(r.class_number, p))
        * &r.regulator_real(p);
    let den = &Real::from_u64(r.roots_of_unity, p) * &Real::from_u64(r.disc.unsigned_abs(), p).sqrt();
    &num / &den
}

/// Invariants of the rational function field `F_q(t)` and its constant
/// extensions, labelled `P1/F{q}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionFieldRecord {
    pub q: u64,
    pub genus: u64,
    pub class_number: u64,
}

impl FunctionFieldRecord {
    pub fn label(&self) -> String {
        format!("P1/F{}", self.q)
    }

    pub fn parse_label(label: &str) -> Option<FunctionFieldRecord> {
        let q: u64 = label.strip_prefix("P1/F")?.parse().ok()?;
        crate::constructible::prime_power_base(q)?;
        Some(FunctionFieldRecord {
            q,
            genus: 0,
            class_number: 1,
        })
    }
}

/// Either kind of global field record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldRecord {
    Number(NumberFieldRecord),
    Function(FunctionFieldRecord),
}

/// Fixture or `P1/F{q}` record by label.
pub fn lookup(label: &str) -> Result<FieldRecord> {
    if let Some(f) = FunctionFieldRecord::parse_label(label) {
        return Ok(FieldRecord::Function(f));
    }
    load_fixture(label).map(FieldRecord::Number)
}

/// A directory of `nfrec-v1` files, one per label. Writers take an
/// exclusive lock on `.lock`, readers a shared one.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Cache> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Cache {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File name for a label: ASCII alphanumerics, `-` and `.` are kept,
    /// other bytes become `_xx`.
    pub fn file_name(label: &str) -> String {
        let mut s = String::new();
        for b in label.bytes() {
            if b.is_ascii_alphanumeric() || b == b'-' || b == b'.' {
                s.push(b as char);
            } else {
                s.push_str(&format!("_{b:02x}"));
            }
        }
        s.push_str(".nfrec");
        s
    }

    pub fn path(&self, label: &str) -> PathBuf {
        self.dir.join(Cache::file_name(label))
    }

    fn lock_file(&self) -> Result<File> {
        Ok(OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(self.dir.join(".lock"))?)
    }

    pub fn read(&self, label: &str) -> Result<Option<NumberFieldRecord>> {
        let lock = self.lock_file()?;
        lock.lock_shared()?;
        let path = self.path(label);
        let out = if path.exists() {
            let mut text = String::new();
            File::open(&path)?.read_to_string(&mut text)?;
            Some(NumberFieldRecord::parse(&text)?)
        } else {
            None
        };
        lock.unlock()?;
        Ok(out)
    }

    pub fn write(&self, r: &NumberFieldRecord) -> Result<PathBuf> {
        r.validate()?;
        let lock = self.lock_file()?;
        lock.lock()?;
        let path = self.path(&r.label);
        let tmp = path.with_extension("tmp");
        File::create(&tmp)?.write_all(r.to_text().as_bytes())?;
        fs::rename(&tmp, &path)?;
        lock.unlock()?;
        Ok(path)
    }
}

/// Remote endpoint and the response mapping version.
pub const REMOTE_ENDPOINT: &str = "https://www.lmfdb.org/api/nf_fields/";
pub const REMOTE_MAPPING: &str = "lmfdb-nf_fields-v1";

/// Database labels of the bundled fixtures.
pub fn remote_label(label: &str) -> &str {
    match label {
        "Q" => "1.1.1.1",
        "Q(i)" => "2.0.4.1",
        "Q(sqrt-3)" => "2.0.3.1",
        "Q(sqrt5)" => "2.2.5.1",
        "Q(sqrt2)" => "2.2.8.1",
        "Q(zeta5)" => "4.0.125.1",
        other => other,
    }
}

fn mapping_error(detail: impl Into<String>) -> Error {
    Error::Schema {
        schema: REMOTE_MAPPING.into(),
        detail: detail.into(),
    }
}

fn json_int(v: &serde_json::Value, key: &str) -> Result<i64> {
    let x = v.get(key).ok_or_else(|| mapping_error(format!("missing field {key}")))?;
    match x {
        serde_json::Value::Number(n) => n.as_i64(),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
    .ok_or_else(|| mapping_error(format!("field {key} is not an integer")))
}

/// Maps a database response (`{"data": [record]}`) into a record named
/// `label`.
pub fn map_remote_json(label: &str, body: &str) -> Result<NumberFieldRecord> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(|e| mapping_error(e.to_string()))?;
    let data = v
        .get("data")
        .and_then(|d| d.as_array())
        .ok_or_else(|| mapping_error("missing data array"))?;
    let d = match data.as_slice() {
        [d] => d,
        [] => return Err(mapping_error(format!("no record for {label}"))),
        _ => return Err(mapping_error("more than one record")),
    };
    let degree = json_int(d, "degree")? as u32;
    let r2 = json_int(d, "r2")? as u32;
    let disc_abs = json_int(d, "disc_abs")?;
    let sign = json_int(d, "disc_sign")?;
    let reg_value = d.get("regulator").ok_or_else(|| mapping_error("missing field regulator"))?;
    let regulator = match reg_value {
        serde_json::Value::Number(n) => {
            let x = n.as_f64().ok_or_else(|| mapping_error("regulator is not a number"))?;
            if degree < 2 * r2 {
                return Err(mapping_error("r2 exceeds half the degree"));
            }
            if degree - r2 == 1 {
                "1".to_string()
            } else {
                format!("{x}")
            }
        }
        serde_json::Value::String(s) => s.clone(),
        _ => return Err(mapping_error("regulator is not a number")),
    };
    let ramps: Vec<u64> = d
        .get("ramps")
        .and_then(|r| r.as_array())
        .map(|a| a.iter().filter_map(|x| x.as_u64()).collect())
        .unwrap_or_default();
    let ramified = ramps
        .into_iter()
        .map(|p| {
            let mut k = 0;
            let mut n = disc_abs as u64;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            (p, k)
        })
        .collect();
    let r = NumberFieldRecord {
        label: label.to_string(),
        degree,
        r1: degree - 2 * r2,
        r2,
        disc: sign * disc_abs,
        class_number: json_int(d, "class_number")? as u64,
        regulator,
        roots_of_unity: json_int(d, "torsion_order")? as u64,
        ramified,
        abelian: None,
    };
    r.validate()?;
    Ok(r)
}

/// Whether a fetch may use the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FetchMode {
    Offline,
    Online,
}

/// Cache first, then bundled fixtures, then (online, with the `network`
/// feature) the remote database; fetched records are written to the
/// cache.
pub fn fetch_remote(label: &str, cache: &Cache, mode: FetchMode) -> Result<NumberFieldRecord> {
    if let Some(r) = cache.read(label)? {
        return Ok(r);
    }
    if let Ok(r) = load_fixture(label) {
        return Ok(r);
    }
    if mode == FetchMode::Offline {
        return Err(Error::OfflineUncached(label.to_string()));
    }
    let body = http_get(&format!(
        "{REMOTE_ENDPOINT}?label={}&_format=json",
        remote_label(label)
    ))?;
    let r = map_remote_json(label, &body)?;
    cache.write(&r)?;
    Ok(r)
}

#[cfg(feature = "network")]
fn http_get(url: &str) -> Result<String> {
    let resp = reqwest::blocking::get(url).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    resp.text().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

#[cfg(not(feature = "network"))]
fn http_get(url: &str) -> Result<String> {
    let _ = url;
    Err(Error::OfflineUncached(
        "built without the network feature".to_string(),
    ))
}
