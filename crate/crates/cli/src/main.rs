//! `hopf-forge`: JSON reports on stdout, a one-line summary on stderr.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check or a failed
//! computation, 2 on malformed input.

use std::any::Any;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use hopf_forge::abelian::{AbelianJson, FgAbelianGroup};
use hopf_forge::character::{burnside_character_table, real_type_report, DEFAULT_SEED};
use hopf_forge::dual::{
    embed_group_point, polar_decompose, probe_characters, DualElement, Expr, ExprJson, Verdict, DEFAULT_TRIALS,
    DEFAULT_WINDOW,
};
use hopf_forge::envelope::{
    abelian_powerseries_check, associativity_residual, builtin_lie, hopf_law_report, monomials_of_degree,
    multiplicativity_check, omega_torus_check, pbw_dimension, FdLieAlgebra, LieJson, NumLit, TruncatedUElement,
    UAlgebra,
};
use hopf_forge::group::FiniteGroup;
use hopf_forge::hopf::{enumerate_grouplike, Field};
use hopf_forge::oracle::{central_idempotent_oracle, compare_with_certificate};
use hopf_forge::profinite::{grouplike_thread_check, idempotent_pullback_check, GroupRef, Tower, TowerJson};
use hopf_forge::scalar::{Scalar, C64};
use hopf_forge::selftest::{run_criterion, run_selftest, Check, CheckStatus, Checks};
use hopf_forge::wedderburn::central_idempotents;
use hopf_forge::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "hopf-forge", version, about = "Structure checks for group Hopf algebras and enveloping algebras")]
struct Cli {
    /// Seed for every randomized step; falls back to HOPF_FORGE_SEED.
    #[arg(long, global = true, env = "HOPF_FORGE_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Include wall-clock timings (makes reports nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Central idempotent certificate of K[G].
    Decompose {
        /// `builtin:<name>` or a JSON file `{"order": n, "table": [[...]]}`.
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "C")]
        field: String,
        /// Cross-check against the independent class-sum oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// All grouplike elements of K[G].
    Grouplike {
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "C")]
        field: String,
    },
    /// Character table with Frobenius-Schur indicators and real types.
    Chartable {
        #[arg(long)]
        group: String,
    },
    /// Elements of R^Ghat for a finitely generated abelian Ghat.
    Abelian {
        /// `{"rank": r, "torsion": [...]}` inline or as a file.
        #[arg(long)]
        dual: String,
        #[command(subcommand)]
        op: AbelianOp,
    },
    /// Inverse systems of finite groups.
    Tower {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value = "R")]
        field: String,
        #[arg(value_enum)]
        op: TowerOp,
    },
    /// Degree-truncated enveloping algebra U(L).
    Envelope {
        /// `builtin:<name>`, a JSON file, or inline JSON.
        #[arg(long)]
        lie: String,
        #[arg(long)]
        cutoff: usize,
        #[arg(long, value_enum, default_value_t = ScalarKind::Rational)]
        scalar: ScalarKind,
        /// Second factor for `multiplicativity`.
        #[arg(long)]
        with: Option<String>,
        /// `[[[i, j, ...], coeff], ...]` in the symmetrized PBW basis, inline or as a file.
        #[arg(long)]
        element: Option<String>,
        /// Random samples for randomized checks.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(value_enum)]
        check: EnvelopeCheck,
    },
    /// The full acceptance suite.
    Selftest {
        /// Run one criterion (1 to 11) only.
        #[arg(long)]
        criterion: Option<u8>,
    },
}

#[derive(Subcommand)]
enum AbelianOp {
    GrouplikeCheck {
        #[arg(long)]
        element: String,
    },
    PrimitiveCheck {
        #[arg(long)]
        element: String,
    },
    Exp {
        #[arg(long)]
        element: String,
    },
    Polar {
        #[arg(long)]
        element: String,
    },
    SigmaCheck {
        #[arg(long)]
        element: String,
    },
    /// The character of a point of G given by angles in [0, 1) and torsion residues.
    Embed {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        angles: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        residues: Vec<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TowerOp {
    CheckThreads,
    Pullback,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarKind {
    Rational,
    Float,
    Complex,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvelopeCheck {
    HopfLaws,
    Primitives,
    Dims,
    Associativity,
    Exp,
    GrouplikeExp,
    Multiplicativity,
    Powerseries,
    Omega,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Decompose { .. } => "decompose",
            Command::Grouplike { .. } => "grouplike",
            Command::Chartable { .. } => "chartable",
            Command::Abelian { .. } => "abelian",
            Command::Tower { .. } => "tower",
            Command::Envelope { .. } => "envelope",
            Command::Selftest { .. } => "selftest",
        }
    }
}

enum Failure {
    Input(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

type Outcome = std::result::Result<(Checks, Value), Failure>;

#[derive(Serialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Status {
    Pass,
    Fail,
    Error,
    InputError,
}

#[derive(Serialize)]
struct RunReport {
    command: Vec<String>,
    inputs_digest: String,
    seed: u64,
    tolerance: f64,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    checks: Vec<Check>,
    result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Value>,
    version: &'static str,
}

struct Ctx {
    seed: u64,
    tol: f64,
    timings: bool,
    hasher: Sha256,
}

impl Ctx {
    /// Inline JSON is taken as is; anything else names a file. Either way the
    /// bytes go into the input digest.
    fn text(&mut self, arg: &str) -> Result<String, Failure> {
        let t = arg.trim_start();
        let body = if t.starts_with('{') || t.starts_with('[') || t.starts_with('"') {
            arg.to_string()
        } else {
            std::fs::read_to_string(arg).map_err(|e| Failure::Input(format!("cannot read {arg}: {e}")))?
        };
        self.absorb(&body);
        Ok(body)
    }

    fn absorb(&mut self, bytes: &str) {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes.as_bytes());
    }

    fn json<T: DeserializeOwned>(&mut self, arg: &str, what: &str) -> Result<T, Failure> {
        let body = self.text(arg)?;
        serde_json::from_str(&body).map_err(|e| Failure::Input(format!("bad {what} JSON: {e}")))
    }

    fn group(&mut self, arg: &str) -> Result<Arc<FiniteGroup>, Failure> {
        let r = if arg.starts_with("builtin:") {
            self.absorb(arg);
            GroupRef::Builtin(arg.to_string())
        } else {
            self.json::<GroupRef>(arg, "group")?
        };
        Ok(Arc::new(r.resolve()?))
    }

    fn tol_for<S: Scalar>(&self) -> f64 {
        if S::EXACT {
            0.0
        } else {
            self.tol
        }
    }
}

fn field(s: &str) -> Result<Field, Failure> {
    Ok(s.parse::<Field>()?)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn decompose(ctx: &mut Ctx, group: &str, field_s: &str, oracle: bool) -> Outcome {
    let g = ctx.group(group)?;
    let f = field(field_s)?;
    let t = burnside_character_table(&g, ctx.tol, ctx.seed)?;
    let cert = central_idempotents(&t, f, ctx.tol)?;
    let mut c = Checks::default();
    c.equal("sum of block dimensions equals |G|", cert.block_dims().iter().sum::<usize>(), g.order());
    c.below("idempotent residual", cert.residuals.max(), ctx.tol);
    if oracle {
        let o = central_idempotent_oracle(&g, f, ctx.seed)?;
        let cmp = compare_with_certificate(&cert, &o, ctx.tol);
        c.equal("oracle agrees on dimensions, centers and division rings", cmp.matched, true);
        c.below("oracle idempotent distance", cmp.idempotent_distance, ctx.tol);
    }
    Ok((c, to_value(&cert.to_json())))
}

fn grouplike(ctx: &mut Ctx, group: &str, field_s: &str) -> Outcome {
    let g = ctx.group(group)?;
    let f = field(field_s)?;
    let found = enumerate_grouplike(&g, f);
    let one = C64::new(1.0, 0.0);
    let elements: Vec<Option<usize>> = found
        .iter()
        .map(|a| {
            let nz: Vec<usize> = (0..g.order()).filter(|&x| a.coeff(x) != C64::new(0.0, 0.0)).collect();
            (nz.len() == 1 && a.coeff(nz[0]) == one).then(|| nz[0])
        })
        .collect();
    let mut c = Checks::default();
    c.equal("grouplike count equals |G|", found.len(), g.order());
    let mut sorted: Vec<usize> = elements.iter().flatten().copied().collect();
    sorted.sort_unstable();
    c.equal("grouplikes are exactly the group elements", sorted, (0..g.order()).collect::<Vec<_>>());
    Ok((c, json!({ "count": found.len(), "elements": elements })))
}

fn chartable(ctx: &mut Ctx, group: &str) -> Outcome {
    let g = ctx.group(group)?;
    let t = burnside_character_table(&g, ctx.tol, ctx.seed)?;
    let report = t.to_report()?;
    let real = real_type_report(&t)?;
    let mut c = Checks::default();
    let r = &report.residuals;
    c.below("row orthogonality", r.row_orthogonality, ctx.tol);
    c.below("column orthogonality", r.column_orthogonality, ctx.tol);
    c.equal("sum of squared degrees equals |G|", report.degrees.iter().map(|d| d * d).sum::<usize>(), g.order());
    c.equal("real block dimensions sum to |G|", real.total_real_dim(), g.order());
    Ok((c, to_value(&report)))
}

fn verdict_value(v: &Verdict) -> Value {
    to_value(v)
}

fn abelian(ctx: &mut Ctx, dual_s: &str, op: &AbelianOp) -> Outcome {
    let dual = Arc::new(FgAbelianGroup::from_json(&ctx.json::<AbelianJson>(dual_s, "dual")?)?);
    let trials = DEFAULT_TRIALS;
    let mut c = Checks::default();
    let element = |ctx: &mut Ctx, s: &str| -> Result<DualElement, Failure> {
        let j: ExprJson = ctx.json(s, "element")?;
        Ok(DualElement::from_json(&dual, &j)?)
    };
    let result = match op {
        AbelianOp::GrouplikeCheck { element: e } => {
            let a = element(ctx, e)?;
            let v = a.is_grouplike(trials, ctx.tol, ctx.seed);
            c.verdict("grouplike", &v, false);
            json!({ "element": a.to_json(), "verdict": verdict_value(&v) })
        }
        AbelianOp::PrimitiveCheck { element: e } => {
            let a = element(ctx, e)?;
            let v = a.is_primitive(trials, ctx.tol, ctx.seed);
            c.verdict("primitive", &v, false);
            json!({ "element": a.to_json(), "verdict": verdict_value(&v) })
        }
        AbelianOp::Exp { element: e } => {
            let a = element(ctx, e)?;
            let x = a.exp();
            if a.is_primitive(trials, ctx.tol, ctx.seed).is_yes() {
                c.verdict("exp of a primitive is grouplike", &x.is_grouplike(trials, ctx.tol, ctx.seed), false);
            }
            json!({ "element": a.to_json(), "exp": x.to_json() })
        }
        AbelianOp::Polar { element: e } => {
            let a = element(ctx, e)?;
            let Expr::Grouplike(g) = a.expr() else {
                return Err(Failure::Input("polar needs a grouplike leaf".into()));
            };
            let p = polar_decompose(g);
            let back = p.reconstruct();
            let probes = probe_characters(&dual, 100, DEFAULT_WINDOW, ctx.seed);
            let worst = probes.iter().fold(0.0f64, |w, chi| {
                let (x, y) = (g.evaluate(&dual, chi), back.evaluate(&dual, chi));
                w.max((x - y).norm() / x.norm().max(1.0))
            });
            c.below("reconstruction at probes", worst, ctx.tol);
            json!({ "lie_part": p.lie_part, "group_part": p.group_part })
        }
        AbelianOp::SigmaCheck { element: e } => {
            let a = element(ctx, e)?;
            let probes = probe_characters(&dual, 100, DEFAULT_WINDOW, ctx.seed);
            let r = a.sigma_fixed_residual(&probes)?;
            c.below("sigma-fixed at probes", r, ctx.tol);
            json!({ "element": a.to_json(), "probes": probes.len(), "residual": r })
        }
        AbelianOp::Embed { angles, residues } => {
            let a = embed_group_point(&dual, angles, residues)?;
            c.verdict("embedded point is grouplike", &a.is_grouplike(trials, ctx.tol, ctx.seed), true);
            json!({ "element": a.to_json() })
        }
    };
    Ok((c, result))
}

fn tower(ctx: &mut Ctx, file: &PathBuf, field_s: &str, op: TowerOp) -> Outcome {
    let json: TowerJson = ctx.json(&file.to_string_lossy(), "tower")?;
    let tower = Tower::from_json(&json)?;
    let f = field(field_s)?;
    let mut c = Checks::default();
    for k in 0..tower.len().saturating_sub(1) {
        let m = tower.induced(k, f)?;
        c.equal(format!("level {k}: induced map surjective"), m.is_surjective(), true);
        c.below(format!("level {k}: Hopf morphism on basis"), m.basis_hopf_residuals().max(), ctx.tol);
    }
    let result = match op {
        TowerOp::CheckThreads => {
            let mut verdicts = Vec::new();
            for (i, entries) in json.threads.iter().enumerate() {
                let thread = tower.thread_from_entries(entries, f)?;
                let v = grouplike_thread_check(&tower, &thread, ctx.tol)?;
                let ok = matches!(v, hopf_forge::profinite::ThreadVerdict::ValidGroupElement { .. });
                c.equal(format!("thread {i} is a group element of the limit"), ok, true);
                verdicts.push(to_value(&v));
            }
            json!({ "threads": verdicts })
        }
        TowerOp::Pullback => {
            let levels = idempotent_pullback_check(&tower, f, ctx.tol)?;
            for (k, l) in levels.iter().enumerate() {
                c.below(format!("pullback level {k}: residual"), l.residual, ctx.tol);
                let mut covered: Vec<usize> = l.decompositions.iter().flatten().copied().collect();
                let nonempty = l.decompositions.iter().all(|d| !d.is_empty());
                covered.sort_unstable();
                let disjoint = covered.windows(2).all(|w| w[0] < w[1]);
                let next = burnside_character_table(&tower.levels()[k + 1], ctx.tol, ctx.seed)?;
                let dims = central_idempotents(&next, f, ctx.tol)?.block_dims();
                c.equal(format!("pullback level {k}: disjoint nonempty block sets"), (nonempty, disjoint), (true, true));
                c.equal(
                    format!("pullback level {k}: covered dimension"),
                    covered.iter().map(|&j| dims[j]).sum::<usize>(),
                    tower.levels()[k].order(),
                );
            }
            to_value(&levels)
        }
    };
    Ok((c, result))
}

enum LieSource {
    Builtin(String),
    Json(LieJson),
}

impl LieSource {
    fn read(ctx: &mut Ctx, arg: &str) -> Result<Self, Failure> {
        if let Some(name) = arg.strip_prefix("builtin:") {
            ctx.absorb(arg);
            Ok(LieSource::Builtin(name.to_string()))
        } else {
            Ok(LieSource::Json(ctx.json(arg, "Lie algebra")?))
        }
    }

    fn build<S: Scalar>(&self) -> Result<Arc<FdLieAlgebra<S>>, Failure> {
        Ok(Arc::new(match self {
            LieSource::Builtin(name) => builtin_lie(name, Field::R)?,
            LieSource::Json(j) => FdLieAlgebra::from_json(j)?,
        }))
    }
}

fn scalar_value<S: Scalar + 'static>(s: &S) -> Value {
    if let Some(q) = (s as &dyn Any).downcast_ref::<BigRational>() {
        return json!(q.to_string());
    }
    let z = s.to_c64();
    if z.im == 0.0 {
        json!(z.re)
    } else {
        json!([z.re, z.im])
    }
}

fn element_value<S: Scalar + 'static>(a: &TruncatedUElement<S>) -> Value {
    Value::Array(a.terms().iter().map(|(m, c)| json!([m, scalar_value(c)])).collect())
}

fn parse_element<S: Scalar>(
    ctx: &mut Ctx,
    arg: &str,
    dim: usize,
    cutoff: usize,
) -> Result<TruncatedUElement<S>, Failure> {
    let raw: Vec<(Vec<usize>, NumLit)> = ctx.json(arg, "element")?;
    let mut terms = Vec::with_capacity(raw.len());
    for (mut m, c) in raw {
        if let Some(&i) = m.iter().find(|&&i| i >= dim) {
            return Err(Failure::Input(format!("generator index {i} out of range for dimension {dim}")));
        }
        if m.len() > cutoff {
            return Err(Failure::Input(format!("monomial of degree {} above cutoff {cutoff}", m.len())));
        }
        m.sort_unstable();
        terms.push((m, c.to_scalar::<S>()?));
    }
    Ok(TruncatedUElement::from_terms(cutoff, terms))
}

struct EnvelopeArgs<'a> {
    lie: &'a LieSource,
    with: Option<&'a LieSource>,
    cutoff: usize,
    element: Option<&'a str>,
    samples: usize,
    check: EnvelopeCheck,
}

fn envelope<S: Scalar + 'static>(ctx: &mut Ctx, a: EnvelopeArgs) -> Outcome {
    let lie = a.lie.build::<S>()?;
    let d = a.cutoff;
    let tol = ctx.tol_for::<S>();
    let alg = UAlgebra::new(&lie, d);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut c = Checks::default();
    let result = match a.check {
        EnvelopeCheck::HopfLaws => {
            let r = hopf_law_report(&alg)?;
            c.below("coassociativity", r.coassociativity, tol);
            c.below("counit", r.counit, tol);
            c.below("antipode", r.antipode, tol);
            c.below("comultiplication from generators", r.comultiplication_routes, tol);
            to_value(&r)
        }
        EnvelopeCheck::Primitives => {
            if d < 2 {
                return Err(Failure::Input("primitives need cutoff >= 2".into()));
            }
            let prims = alg.primitive_space(tol)?;
            c.equal("primitive space dimension equals dim L", prims.len(), lie.dim());
            c.equal("primitives lie in degree 1", prims.iter().all(|p| p.terms().keys().all(|m| m.len() == 1)), true);
            json!({ "basis": prims.iter().map(element_value).collect::<Vec<_>>() })
        }
        EnvelopeCheck::Dims => {
            let n = lie.dim();
            let rows: Vec<Value> = (0..=d)
                .map(|k| {
                    let count = monomials_of_degree(n, k).len();
                    let formula = pbw_dimension(n, k);
                    c.equal(format!("degree {k}: PBW monomials equal C(n+d-1, d)"), count, formula);
                    json!({ "degree": k, "monomials": count, "formula": formula })
                })
                .collect();
            json!({ "degrees": rows, "total": alg.basis().len() })
        }
        EnvelopeCheck::Associativity => {
            let r = associativity_residual(&lie, d, a.samples, ctx.seed)?;
            c.below(format!("associativity on {} random triples", a.samples), r, if S::EXACT { 0.0 } else { tol });
            json!({ "triples": a.samples, "residual": r })
        }
        EnvelopeCheck::Exp | EnvelopeCheck::GrouplikeExp => {
            let x = match a.element {
                Some(s) => parse_element::<S>(ctx, s, lie.dim(), d)?,
                None => alg.random_lie_element(&mut rng),
            };
            let e = alg.exp(&x)?;
            let primitive = x.terms().keys().all(|m| m.len() == 1);
            if matches!(a.check, EnvelopeCheck::GrouplikeExp) {
                c.equal("input is primitive", primitive, true);
            }
            // truncation is not an ideal quotient, so these identities are
            // only visible at cutoff D for degree-one inputs
            if primitive {
                let inv = alg.exp(&x.scale(&S::from_i64(-1)))?;
                c.below("exp(a) exp(-a) = 1", alg.multiply(&e, &inv)?.distance(&TruncatedUElement::one(d)), tol);
                c.below("exp(a) is grouplike", alg.grouplike_residual(&e)?, tol);
            }
            json!({ "element": element_value(&x), "exp": element_value(&e) })
        }
        EnvelopeCheck::Multiplicativity => {
            let other = a
                .with
                .ok_or_else(|| Failure::Input("multiplicativity needs --with <lie>".into()))?
                .build::<S>()?;
            let pairs = a.samples.min(5);
            let r = multiplicativity_check(&lie, &other, d, pairs, ctx.seed)?;
            for k in &r.degrees {
                c.equal(format!("degree {}: product dim equals tensor dim", k.degree), k.product_dim, k.tensor_dim);
            }
            c.below("alpha is multiplicative", r.alpha_residual, tol);
            to_value(&r)
        }
        EnvelopeCheck::Powerseries => {
            let r = abelian_powerseries_check(d)?;
            c.equal("dimension D + 1", r.dimension, d + 1);
            c.below("commutativity", r.commutator_residual, 0.0);
            c.below("truncated polynomial multiplication", r.polynomial_residual, 0.0);
            to_value(&r)
        }
        EnvelopeCheck::Omega => {
            let probes = 200;
            let r = omega_torus_check(d, probes, ctx.tol, ctx.seed)?;
            c.equal("probes", r.probes, probes);
            c.below("omega is an algebra morphism", r.morphism_residual, ctx.tol);
            c.equal("omega maps primitives to primitives", r.primitives_preserved, true);
            c.below("exp of omega matches the embedded torus point", r.exp_residual, ctx.tol);
            to_value(&r)
        }
    };
    Ok((c, result))
}

fn selftest(ctx: &mut Ctx, criterion: Option<u8>) -> Outcome {
    let mut c = Checks::default();
    let result = match criterion {
        Some(id) if (1..=11).contains(&id) => {
            let r = run_criterion(id, ctx.seed, ctx.timings);
            prefix_checks(&mut c, id, &r.checks);
            to_value(&r)
        }
        Some(id) => return Err(Failure::Input(format!("no criterion {id}; expected 1 to 11"))),
        None => {
            let r = run_selftest(ctx.seed, ctx.timings);
            for k in &r.criteria {
                prefix_checks(&mut c, k.id, &k.checks);
            }
            to_value(&r)
        }
    };
    Ok((c, result))
}

fn prefix_checks(c: &mut Checks, id: u8, checks: &[Check]) {
    c.0.extend(checks.iter().cloned().map(|mut k| {
        k.name = format!("criterion {id}: {}", k.name);
        k
    }));
}

fn dispatch(ctx: &mut Ctx, cmd: &Command) -> Outcome {
    match cmd {
        Command::Decompose { group, field, oracle } => decompose(ctx, group, field, *oracle),
        Command::Grouplike { group, field } => grouplike(ctx, group, field),
        Command::Chartable { group } => chartable(ctx, group),
        Command::Abelian { dual, op } => abelian(ctx, dual, op),
        Command::Tower { file, field, op } => tower(ctx, file, field, *op),
        Command::Envelope { lie, cutoff, scalar, with, element, samples, check } => {
            let lie = LieSource::read(ctx, lie)?;
            let with = with.as_deref().map(|w| LieSource::read(ctx, w)).transpose()?;
            let args = EnvelopeArgs {
                lie: &lie,
                with: with.as_ref(),
                cutoff: *cutoff,
                element: element.as_deref(),
                samples: *samples,
                check: *check,
            };
            match scalar {
                ScalarKind::Rational => envelope::<BigRational>(ctx, args),
                ScalarKind::Float => envelope::<f64>(ctx, args),
                ScalarKind::Complex => envelope::<C64>(ctx, args),
            }
        }
        Command::Selftest { criterion } => selftest(ctx, *criterion),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command: Vec<String> = std::env::args().skip(1).collect();
    let mut ctx = Ctx { seed: cli.seed.unwrap_or(DEFAULT_SEED), tol: cli.tolerance, timings: cli.timings, hasher: Sha256::new() };
    if !(ctx.tol.is_finite() && ctx.tol >= 0.0) {
        eprintln!("hopf-forge: tolerance must be a finite nonnegative number");
        return ExitCode::from(2);
    }
    let start = Instant::now();
    let outcome = dispatch(&mut ctx, &cli.command);
    let elapsed = start.elapsed();
    let digest: String = ctx.hasher.clone().finalize().iter().map(|b| format!("{b:02x}")).collect();
    let (status, error, checks, result) = match outcome {
        Ok((c, v)) => (if c.passed() { Status::Pass } else { Status::Fail }, None, c.0, v),
        Err(Failure::Input(m)) => (Status::InputError, Some(m), Vec::new(), Value::Null),
        Err(Failure::Compute(m)) => (Status::Error, Some(m), Vec::new(), Value::Null),
    };
    let report = RunReport {
        command: command.clone(),
        inputs_digest: digest,
        seed: ctx.seed,
        tolerance: ctx.tol,
        status,
        error: error.clone(),
        checks,
        result,
        timings: ctx.timings.then(|| json!({ "total_ms": elapsed.as_millis() })),
        version: VERSION,
    };
    match serde_json::to_string_pretty(&report) {
        Ok(s) => {
            // a closed pipe is the reader's choice, not a failure
            let _ = writeln!(std::io::stdout().lock(), "{s}");
        }
        Err(e) => {
            eprintln!("hopf-forge: cannot serialize report: {e}");
            return ExitCode::from(1);
        }
    }
    let name = cli.command.name();
    let failed: Vec<&str> =
        report.checks.iter().filter(|k| k.status == CheckStatus::Fail).map(|k| k.name.as_str()).collect();
    let probabilistic = report.checks.iter().filter(|k| k.status == CheckStatus::Probabilistic).count();
    match status {
        Status::Pass => {
            eprintln!("{name}: pass ({} checks, {probabilistic} probabilistic)", report.checks.len());
            ExitCode::SUCCESS
        }
        Status::Fail => {
            eprintln!("{name}: FAIL ({} of {} checks): {}", failed.len(), report.checks.len(), failed.join("; "));
            ExitCode::from(1)
        }
        Status::Error => {
            eprintln!("{name}: error: {}", error.unwrap_or_default());
            ExitCode::from(1)
        }
        Status::InputError => {
            eprintln!("{name}: input error: {}", error.unwrap_or_default());
            ExitCode::from(2)
        }
    }
}
