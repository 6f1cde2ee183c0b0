//! Batch front end. Each subcommand wraps one library operation and prints
//! a human report, or a JSON object with `--json`.
//!
//! Exit codes: 0 on success or a passing verdict, 1 on a failing or
//! tautological verdict, 2 on an input or usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ctorus::conductors::{artin_conductor, torus_base_change_conductor};
use ctorus::constructible::{
    check_bidual, dualize_sheaf, dualize_torus, k0_decompose, BadPlaceData, Base, BidualReport, CTorusData,
    FieldLabel, K0Class, TorusComplex,
};
use ctorus::docs::{parse_oracle, Document};
use ctorus::groups::FiniteGroup;
use ctorus::l_series::{euler_product, ff_l_function, FFCurveData, LObject, PlaceOracle};
use ctorus::qlinalg::Q;
use ctorus::real::bits_for_digits;
use ctorus::special_values::{chi, verify_special_value, AnalyticRoute, SvObject, Verdict};
use ctorus::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ctorus", version, about = "Constructible tori: duality, L-functions and special values at s = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// A ctdata-v1 document.
    #[arg(long)]
    input: PathBuf,
    /// Print a JSON object instead of the human report.
    #[arg(long)]
    json: bool,
    /// Working precision in significant decimal digits.
    #[arg(long, default_value_t = 30, value_parser = parse_precision)]
    precision: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Number field base Spec Z.
    Nf,
    /// Function field base P1 over F_q.
    Ff,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a document.
    Validate(Common),
    /// Cartier dual of a sheaf or torus, as a canonical document.
    Dualize {
        #[command(flatten)]
        common: Common,
        /// Write the dual here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare a sheaf (or torus) with its bidual.
    BidualCheck(Common),
    /// Local factor at one place, in t = N(x)^{-s}.
    Lfactor {
        #[command(flatten)]
        common: Common,
        /// `q=N`, `label=L`, optionally with `,frob=K` for an unlisted place.
        #[arg(long)]
        place: PlaceSpec,
        /// Oracle supplying unlisted places.
        #[arg(long)]
        oracle: Option<PathBuf>,
    },
    /// Truncated Euler product (nf) or series in T = q^{-s} (ff).
    Lseries {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        oracle: Option<PathBuf>,
        /// Evaluation point, a rational at least 3/2 (nf).
        #[arg(long, default_value = "2")]
        s: String,
        /// Norm bound (nf, default 10000) or degree cutoff (ff, default 12).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        truncate: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Frobenius generator of the constant extension (ff).
        #[arg(long)]
        generator: Option<usize>,
    },
    /// Artin and base-change conductors at the listed places.
    Conductor(Common),
    /// K0 decomposition into generator classes.
    Decompose(Common),
    /// Euler characteristic from the decomposition.
    Chi(Common),
    /// Vanishing order at s = 0 from the decomposition.
    Order(Common),
    /// Compare |L*(0)| from an analytic route with chi.
    VerifySv {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        oracle: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8, value_parser = parse_tolerance)]
        tolerance: f64,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        generator: Option<usize>,
    },
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Nf => "nf",
            Mode::Ff => "ff",
        }
    }
}

fn parse_precision(s: &str) -> std::result::Result<u32, String> {
    let d: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if d < 15 {
        return Err("precision must be at least 15 digits".into());
    }
    Ok(d)
}

fn parse_tolerance(s: &str) -> std::result::Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(t > 0.0 && t.is_finite()) {
        return Err("tolerance must be positive".into());
    }
    Ok(t)
}

/// Which place `lfactor` evaluates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlaceSpec {
    pub q: Option<u64>,
    pub label: Option<String>,
    pub frob: Option<usize>,
}

impl FromStr for PlaceSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<PlaceSpec, String> {
        let mut spec = PlaceSpec::default();
        for part in s.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            match k.trim() {
                "q" => spec.q = Some(v.trim().parse().map_err(|e| format!("q: {e}"))?),
                "label" => spec.label = Some(v.trim().to_string()),
                "frob" => spec.frob = Some(v.trim().parse().map_err(|e| format!("frob: {e}"))?),
                other => return Err(format!("unknown place key {other:?}")),
            }
        }
        if spec.q.is_none() && spec.label.is_none() {
            return Err("a place needs q=N or label=L".into());
        }
        Ok(spec)
    }
}

/// Failure of one invocation.
#[derive(Debug)]
enum CliError {
    Input(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input_error(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Result of a successful invocation.
struct Outcome {
    text: String,
    json: Value,
    code: i32,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Outcome {
        Outcome { text, json, code: EXIT_OK }
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let json = common(&cli.command).json;
    match dispatch(cli.command) {
        Ok(o) => {
            let written = if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&o.json).expect("serializable report"))
            } else if o.text.ends_with('\n') {
                write!(out, "{}", o.text)
            } else {
                writeln!(out, "{}", o.text)
            };
            if written.is_err() {
                return EXIT_INPUT;
            }
            o.code
        }
        Err(CliError::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn common(c: &Command) -> &Common {
    match c {
        Command::Validate(c)
        | Command::BidualCheck(c)
        | Command::Conductor(c)
        | Command::Decompose(c)
        | Command::Chi(c)
        | Command::Order(c) => c,
        Command::Dualize { common, .. }
        | Command::Lfactor { common, .. }
        | Command::Lseries { common, .. }
        | Command::VerifySv { common, .. } => common,
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load(c: &Common) -> CliResult<Document> {
    Ok(Document::parse(&read(&c.input)?)?)
}

fn load_oracle(path: Option<&PathBuf>) -> CliResult<Option<PlaceOracle>> {
    path.map(|p| Ok(parse_oracle(&read(p)?)?)).transpose()
}

/// A torus or a complex: the objects with an L-function.
enum Obj<'a> {
    Torus(&'a CTorusData),
    Complex(&'a TorusComplex),
}

impl<'a> Obj<'a> {
    fn of(d: &'a Document) -> CliResult<Obj<'a>> {
        match d {
            Document::Torus(t) => Ok(Obj::Torus(t)),
            Document::Complex(c) => Ok(Obj::Complex(c)),
            Document::Sheaf(_) => Err(input_error("expected a torus or complex document; dualize a sheaf first")),
        }
    }

    fn l(&self) -> LObject<'a> {
        match *self {
            Obj::Torus(t) => LObject::Torus(t),
            Obj::Complex(c) => LObject::Complex(c),
        }
    }

    fn sv(&self) -> SvObject<'a> {
        match *self {
            Obj::Torus(t) => SvObject::Torus(t),
            Obj::Complex(c) => SvObject::Complex(c),
        }
    }

    fn base(&self) -> Base {
        match self {
            Obj::Torus(t) => t.base,
            Obj::Complex(c) => c.target.base,
        }
    }

    fn places(&self) -> Vec<BadPlaceData> {
        match self {
            Obj::Torus(t) => t.bad.iter().map(|tp| tp.place.clone()).collect(),
            Obj::Complex(c) => c.places().to_vec(),
        }
    }

    fn labels(&self) -> Vec<FieldLabel> {
        match self {
            Obj::Torus(t) => t.fields.clone(),
            Obj::Complex(c) => c.target.fields.iter().chain(&c.source.fields).cloned().collect(),
        }
    }

    fn k0(&self) -> CliResult<K0Class> {
        Ok(match self {
            Obj::Torus(t) => k0_decompose(t)?,
            Obj::Complex(c) => c.k0()?,
        })
    }
}

fn base_text(b: Base) -> String {
    match b {
        Base::Rationals => "Z".into(),
        Base::ProjectiveLine { q } => format!("P1/F{q}"),
    }
}

fn working_bits(c: &Common) -> usize {
    bits_for_digits(c.precision) + 32
}

fn resolve_mode(requested: Option<Mode>, base: Base) -> CliResult<Mode> {
    let natural = match base {
        Base::Rationals => Mode::Nf,
        Base::ProjectiveLine { .. } => Mode::Ff,
    };
    match requested {
        Some(m) if m != natural => Err(input_error(format!(
            "mode {} does not match the base {}",
            m.name(),
            base_text(base)
        ))),
        _ => Ok(natural),
    }
}

/// The requested Frobenius, else the first element generating the group.
fn resolve_generator(g: &FiniteGroup, requested: Option<usize>) -> CliResult<usize> {
    if let Some(x) = requested {
        return Ok(x);
    }
    (0..g.order())
        .find(|&x| g.generated_subgroup(&[x]).order() == g.order())
        .ok_or_else(|| input_error("the group is not cyclic, so it is not a constant-extension group"))
}

fn resolve_place(
    spec: &PlaceSpec,
    listed: &[BadPlaceData],
    g: &FiniteGroup,
    oracle: Option<&PlaceOracle>,
) -> CliResult<BadPlaceData> {
    if let Some(l) = &spec.label {
        return listed
            .iter()
            .find(|p| &p.label == l)
            .cloned()
            .ok_or_else(|| input_error(format!("no listed place with label {l:?}")));
    }
    let q = spec.q.expect("place spec has q or label");
    if let Some(p) = listed.iter().find(|p| p.q == q) {
        if spec.frob.is_some() {
            return Err(input_error(format!("place q={q} is listed; its Frobenius comes from the document")));
        }
        return Ok(p.clone());
    }
    if let (Some(o), None) = (oracle, spec.frob) {
        return Ok(o.place_at(q)?);
    }
    let frob = spec.frob.unwrap_or_else(|| g.identity());
    if frob >= g.order() {
        return Err(input_error(format!("frob={frob} is not an element index")));
    }
    let place = BadPlaceData::unramified(&q.to_string(), q, g, frob);
    place.validate(g)?;
    Ok(place)
}

fn dispatch(cmd: Command) -> CliResult<Outcome> {
    match cmd {
        Command::Validate(c) => validate(&c),
        Command::Dualize { common, output } => dualize(&common, output.as_deref()),
        Command::BidualCheck(c) => bidual(&c),
        Command::Lfactor { common, place, oracle } => lfactor(&common, &place, oracle.as_ref()),
        Command::Lseries {
            common,
            oracle,
            s,
            truncate,
            mode,
            generator,
        } => lseries(&common, oracle.as_ref(), &s, truncate, mode, generator),
        Command::Conductor(c) => conductor(&c),
        Command::Decompose(c) => decompose(&c),
        Command::Chi(c) => chi_cmd(&c),
        Command::Order(c) => order(&c),
        Command::VerifySv {
            common,
            oracle,
            tolerance,
            mode,
            generator,
        } => verify(&common, oracle.as_ref(), tolerance, mode, generator),
    }
}

fn validate(c: &Common) -> CliResult<Outcome> {
    let d = load(c)?;
    let mut text = format!("valid {} over {}, group order {}\n", d.kind(), base_text(base_of(&d)), d.group().order());
    let mut notes = Vec::new();
    match &d {
        Document::Sheaf(f) => {
            f.validate()?;
            for (l, inj) in f.injective_specializations() {
                if !inj {
                    notes.push(format!("place {l}: specialization is not injective"));
                }
            }
        }
        Document::Torus(t) => {
            t.validate()?;
            for (l, good) in t.good_reduction_locus()? {
                notes.push(format!("place {l}: {}", if good { "good reduction" } else { "bad reduction" }));
            }
        }
        Document::Complex(x) => {
            notes.push(format!("exact on characters: {}", x.is_exact()));
        }
    }
    for n in &notes {
        text.push_str(n);
        text.push('\n');
    }
    Ok(Outcome::ok(
        text,
        json!({ "valid": true, "kind": d.kind(), "base": base_text(base_of(&d)), "notes": notes }),
    ))
}

fn base_of(d: &Document) -> Base {
    match d {
        Document::Sheaf(f) => f.base,
        Document::Torus(t) => t.base,
        Document::Complex(c) => c.target.base,
    }
}

fn dualize(c: &Common, output: Option<&Path>) -> CliResult<Outcome> {
    let dual = match load(c)? {
        Document::Sheaf(f) => Document::Torus(dualize_sheaf(&f)?),
        Document::Torus(t) => Document::Sheaf(dualize_torus(&t)?),
        Document::Complex(_) => return Err(input_error("dualize takes a sheaf or a torus document")),
    };
    let body = dual.to_text();
    if let Some(path) = output {
        std::fs::write(path, &body).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        return Ok(Outcome::ok(
            format!("wrote {} to {}", dual.kind(), path.display()),
            json!({ "kind": dual.kind(), "output": path.display().to_string() }),
        ));
    }
    Ok(Outcome::ok(body.clone(), json!({ "kind": dual.kind(), "document": body })))
}

fn bidual(c: &Common) -> CliResult<Outcome> {
    let report = match load(c)? {
        Document::Sheaf(f) => check_bidual(&f)?,
        Document::Torus(t) => {
            let dd = dualize_sheaf(&dualize_torus(&t)?)?;
            if dd == t {
                BidualReport::Identity
            } else {
                BidualReport::Mismatch("torus".into())
            }
        }
        Document::Complex(_) => return Err(input_error("bidual-check takes a sheaf or a torus document")),
    };
    Ok(match report {
        BidualReport::Identity => Outcome::ok("bidual: identity".into(), json!({ "bidual": "identity" })),
        BidualReport::Mismatch(what) => Outcome {
            text: format!("bidual: mismatch at {what}"),
            json: json!({ "bidual": "mismatch", "component": what }),
            code: EXIT_FAIL,
        },
    })
}

fn lfactor(c: &Common, spec: &PlaceSpec, oracle: Option<&PathBuf>) -> CliResult<Outcome> {
    let d = load(c)?;
    let obj = Obj::of(&d)?;
    let oracle = load_oracle(oracle)?;
    let x = resolve_place(spec, &obj.places(), d.group(), oracle.as_ref())?;
    let cyclo = obj.l().local_cyclo(&x)?;
    let factor = cyclo.to_rational()?;
    Ok(Outcome::ok(
        factor.to_string(),
        json!({
            "place": x.label,
            "q": x.q,
            "frobenius": x.frobenius,
            "factor": factor.to_string(),
            "cyclotomic": cyclo.to_string(),
        }),
    ))
}

fn lseries(
    c: &Common,
    oracle: Option<&PathBuf>,
    s: &str,
    truncate: Option<u64>,
    mode: Option<Mode>,
    generator: Option<usize>,
) -> CliResult<Outcome> {
    let d = load(c)?;
    let obj = Obj::of(&d)?;
    match resolve_mode(mode, obj.base())? {
        Mode::Nf => {
            let s: Q = s.parse().map_err(|_| input_error(format!("--s expects a rational, got {s:?}")))?;
            let b = truncate.unwrap_or(10_000);
            let oracle = match load_oracle(oracle)? {
                Some(o) => o,
                None if d.group().order() == 1 => PlaceOracle::split(d.group().clone())?,
                None => return Err(input_error("a nontrivial group needs --oracle")),
            };
            let e = euler_product(obj.l(), &oracle, &s, b, c.precision)?;
            let value = e.value.to_decimal(c.precision as usize);
            Ok(Outcome::ok(
                format!(
                    "s = {s}\nbound = {b}\nplaces = {}\nvalue = {value}\ntail_bound = {:e}",
                    e.places, e.tail_bound
                ),
                json!({
                    "s": s.to_string(),
                    "bound": b,
                    "places": e.places,
                    "value": value,
                    "tail_bound": e.tail_bound,
                }),
            ))
        }
        Mode::Ff => {
            let Base::ProjectiveLine { q } = obj.base() else {
                unreachable!("mode matches base")
            };
            let cutoff = truncate.unwrap_or(12) as usize;
            let g = resolve_generator(d.group(), generator)?;
            let curve = FFCurveData::projective_line(q, cutoff);
            let series = ff_l_function(obj.l(), &curve, g, &[], cutoff)?;
            let coeffs: Vec<String> = series.series.coeffs().iter().map(|x| x.to_string()).collect();
            let rational = series.rational.as_ref().map(|r| r.to_string());
            Ok(Outcome::ok(
                format!(
                    "q = {q}\ncutoff = {cutoff}\nseries = {}\nrational = {}",
                    coeffs.join(", "),
                    rational.as_deref().unwrap_or("none")
                ),
                json!({ "q": q, "cutoff": cutoff, "series": coeffs, "rational": rational }),
            ))
        }
    }
}

fn conductor(c: &Common) -> CliResult<Outcome> {
    let d = load(c)?;
    let p = working_bits(c);
    let mut rows = Vec::new();
    let mut text = String::new();
    match &d {
        Document::Sheaf(f) => {
            for sp in &f.bad {
                let a = artin_conductor(&f.generic, &sp.place)?;
                text.push_str(&format!("{}: a = {a}\n", sp.place.label));
                rows.push(json!({ "place": sp.place.label, "a": a.to_string() }));
            }
        }
        Document::Torus(t) => {
            let bc = torus_base_change_conductor(t, p)?;
            for (tp, (_, cv)) in t.bad.iter().zip(&bc.per_place) {
                let a = artin_conductor(&t.characters, &tp.place)?;
                text.push_str(&format!("{}: a = {a}, c = {cv}\n", tp.place.label));
                rows.push(json!({ "place": tp.place.label, "a": a.to_string(), "c": cv.to_string() }));
            }
            let total = bc.total.to_decimal(c.precision as usize);
            text.push_str(&format!("sum c_v log q_v = {total}\n"));
            return Ok(Outcome::ok(text, json!({ "places": rows, "base_change_total": total })));
        }
        Document::Complex(x) => {
            for v in x.places() {
                let a = artin_conductor(&x.target.characters, v)? - artin_conductor(&x.source.characters, v)?;
                text.push_str(&format!("{}: a = {a}\n", v.label));
                rows.push(json!({ "place": v.label, "a": a.to_string() }));
            }
        }
    }
    Ok(Outcome::ok(text, json!({ "places": rows })))
}

fn decompose(c: &Common) -> CliResult<Outcome> {
    let d = load(c)?;
    let obj = Obj::of(&d)?;
    let k = obj.k0()?;
    let labels = obj.labels();
    let mut text = String::new();
    let mut fields = Vec::new();
    for (h, a) in &k.field_terms {
        let label = labels.iter().find(|l| l.subgroup == *h).map(|l| l.label.clone());
        text.push_str(&format!(
            "{a} * G_m over the fixed field of {:?}{}\n",
            h.members(),
            label.as_ref().map(|l| format!(" ({l})")).unwrap_or_default()
        ));
        fields.push(json!({ "subgroup": h.members(), "label": label, "coeff": a.to_string() }));
    }
    let mut points = Vec::new();
    for pt in &k.point_terms {
        let tors: Vec<String> = pt.module.torsion_invariants().iter().map(|x| x.to_string()).collect();
        text.push_str(&format!(
            "{} * point at {} (q = {}): free rank {}, torsion [{}]\n",
            pt.coeff,
            pt.label,
            pt.q,
            pt.module.free_rank(),
            tors.join(", ")
        ));
        points.push(json!({
            "label": pt.label,
            "q": pt.q,
            "coeff": pt.coeff.to_string(),
            "free_rank": pt.module.free_rank(),
            "torsion": tors,
        }));
    }
    if k.is_zero() {
        text.push_str("0\n");
    }
    Ok(Outcome::ok(text, json!({ "fields": fields, "points": points })))
}

fn chi_cmd(c: &Common) -> CliResult<Outcome> {
    let d = load(c)?;
    let obj = Obj::of(&d)?;
    let k = obj.k0()?;
    let v = chi(&k, obj.base(), &obj.labels(), working_bits(c))?.to_decimal(c.precision as usize);
    Ok(Outcome::ok(format!("chi = {v}"), json!({ "chi": v })))
}

fn order(c: &Common) -> CliResult<Outcome> {
    let d = load(c)?;
    let obj = Obj::of(&d)?;
    let r = ctorus::special_values::vanishing_order(&obj.k0()?)?;
    Ok(Outcome::ok(format!("order = {r}"), json!({ "order": r })))
}

fn verify(
    c: &Common,
    oracle: Option<&PathBuf>,
    tolerance: f64,
    mode: Option<Mode>,
    generator: Option<usize>,
) -> CliResult<Outcome> {
    let d = load(c)?;
    let obj = Obj::of(&d)?;
    let oracle = load_oracle(oracle)?;
    let route = match (resolve_mode(mode, obj.base())?, &oracle) {
        (Mode::Nf, Some(o)) => AnalyticRoute::Abelian(o),
        (Mode::Nf, None) => AnalyticRoute::None,
        (Mode::Ff, _) => AnalyticRoute::FunctionField {
            generator: resolve_generator(d.group(), generator)?,
        },
    };
    let report = verify_special_value(obj.sv(), route, tolerance, c.precision)?;
    let code = if report.verdict == Verdict::Pass { EXIT_OK } else { EXIT_FAIL };
    Ok(Outcome {
        text: report.to_string(),
        json: report.to_json(),
        code,
    })
}
