//! Command-line front end. Exit status 0 when every verdict holds, 1 when a
//! property fails, 2 on usage, parse or search errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::category::{Category, FiniteCategory};
use crate::concrete::Concrete;
use crate::error::{Error, Result};
use crate::generic::{
    back_and_forth, build_fraisse, embed_sequence, materialize_limit, verify_build, verify_zigzag, zigzag_is_isomorphism,
    zigzag_transformations, BuildConfig, ExtensionFamily, OnePointExtensions,
};
use crate::io::{parse_sequence, write_rp_sequence, write_sequence, Bundle};
use crate::morphism::Morphism;
use crate::normed::{self, amalgamate_norms, ck_nonextension_check, fmt_vec, minkowski, pushout_mediator, pushout_norms};
use crate::properties::{check_amalgamation, check_category_laws, check_jep, find_pushout, is_dominating, Domination, Report};
use crate::retracts::{lift_sequence, proper_amalgamate, random_rp_span, sets_counterexample, verify_proper, Retractive};
use crate::sequences::{check_a, check_e, check_u, is_fraisse_object, validate_sequence, SeqTransformation};
use crate::structure::{FinStructure, Kind};
use crate::trees::{build_standard_healthy, embed_initial, extend_arrow, is_healthy, is_t2_arrow, natural_decomposition};

#[derive(Parser, Debug)]
#[command(name = "fraisse", version, about = "Fraïssé sequences over finite structures")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Records,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bounded check of a categorical property.
    Check(CheckArgs),
    /// Build a prefix of a Fraïssé sequence.
    Build(BuildArgs),
    /// Union of a sequence file, with optional scans.
    Limit(LimitArgs),
    /// Back-and-forth between two sequences.
    Backforth(BackforthArgs),
    /// Arrow from one sequence into another.
    Embed(EmbedArgs),
    /// Retractive pairs.
    Rp(RpArgs),
    /// Bounded binary trees.
    Trees(TreesArgs),
    /// Polyhedral normed spaces.
    Normed(NormedArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Laws,
    Amalgamation,
    Jep,
    Pushout,
    Dominating,
    FraisseObject,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub category: String,
    #[arg(long, default_value_t = 3)]
    pub bound: usize,
    #[arg(long, value_enum)]
    pub property: Property,
    /// Bundle with maps `f`, `g` (pushout) or object `u` (fraisse-object).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub category: String,
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bound for the verification of the output.
    #[arg(long, default_value_t = 3)]
    pub bound: usize,
    /// Also check U, A and E on the prefix; failures set exit status 1.
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scan {
    Density,
    Extension,
    Homogeneity,
}

#[derive(Args, Debug)]
pub struct LimitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Number of stages used; all by default.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Scan over points of stages up to this one.
    #[arg(long)]
    pub stage: Option<usize>,
    #[arg(long, value_enum)]
    pub scan: Option<Scan>,
    /// Subset size for the extension and homogeneity scans.
    #[arg(long, default_value_t = 2)]
    pub bound: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BackforthArgs {
    /// Two sequence files; built from `--category` when absent.
    #[arg(long = "in")]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = "finlinord")]
    pub category: String,
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    /// Seed of the first sequence; the second uses `seed + 1`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    /// Source and target sequence files.
    #[arg(long = "in", num_args = 2)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RpAction {
    Amalgamate,
    Counterexample,
    Lift,
}

#[derive(Args, Debug)]
pub struct RpArgs {
    #[arg(value_enum)]
    pub action: RpAction,
    /// Bundle with retractive pairs `f`, `g` (amalgamate) or a sequence
    /// file (lift).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "finset-maps")]
    pub category: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Size of the test cocones confirming the pushout.
    #[arg(long, default_value_t = 3)]
    pub bound: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TreesAction {
    Healthy,
    Decompose,
    Embed,
    Extend,
    Standard,
}

#[derive(Args, Debug)]
pub struct TreesArgs {
    #[arg(value_enum)]
    pub action: TreesAction,
    /// A tree, or a bundle with objects `t` (and `s`, `u`, map `f`).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Height of the standard healthy tree.
    #[arg(long)]
    pub bound: Option<usize>,
    #[arg(long, default_value_t = 1 << 16)]
    pub cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormedAction {
    Norm,
    Amalgamate,
    Pushout,
    Cknonext,
}

#[derive(Args, Debug)]
pub struct NormedArgs {
    #[arg(value_enum)]
    pub action: NormedAction,
    /// Bundle with spaces and matrices.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub ok: bool,
    pub records: Vec<(String, String)>,
    pub transcript: Vec<String>,
    pub artifact: Option<String>,
}

impl Outcome {
    fn new(ok: bool) -> Self {
        Outcome {
            ok,
            ..Outcome::default()
        }
    }

    fn rec(&mut self, k: &str, v: impl ToString) {
        self.records.push((k.to_string(), v.to_string()));
    }

    fn absorb<O: std::fmt::Display, A: std::fmt::Display>(&mut self, r: &crate::properties::PropertyReport<O, A>) {
        self.ok &= r.holds();
        self.records.extend(r.records());
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Text => {
                for t in &self.transcript {
                    let _ = writeln!(out, "{t}");
                }
                for (k, v) in &self.records {
                    let _ = writeln!(out, "{k}: {v}");
                }
            }
            Format::Records => {
                for t in &self.transcript {
                    let _ = writeln!(out, "transcript={t}");
                }
                for (k, v) in &self.records {
                    let _ = writeln!(out, "{k}={v}");
                }
            }
        }
        out
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("cannot read {}: {e}", path.display()),
    })
}

/// A bundle, or a bare structure which becomes object `t`.
fn load_bundle(path: &Path) -> Result<Bundle> {
    let text = read(path)?;
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or("");
    if Kind::from_keyword(first).is_some() {
        let mut b = Bundle::default();
        b.objects.push(("t".into(), Arc::new(FinStructure::parse(&text)?)));
        Ok(b)
    } else {
        Bundle::parse(&text)
    }
}

fn need_input(p: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    p.clone().ok_or_else(|| Error::PreconditionFailed(format!("--in is required for {what}")))
}

fn finite_category(name: &str) -> Option<FiniteCategory> {
    match name {
        "no-cocone" => Some(FiniteCategory::no_cocone()),
        "two-points" => Some(FiniteCategory::two_points()),
        "single-point" => Some(FiniteCategory::single_point()),
        "two-fraisse-objects" => Some(FiniteCategory::two_fraisse_objects()),
        _ => None,
    }
}

fn unknown_category(name: &str) -> Error {
    Error::Unsupported(format!("unknown category `{name}`"))
}

fn generic_check<C: Category>(cat: &C, p: Property, bound: usize) -> Result<Outcome> {
    let rep: Report<C> = match p {
        Property::Laws => check_category_laws(cat, bound)?,
        Property::Amalgamation => check_amalgamation(cat, bound, 2 * bound)?,
        Property::Jep => check_jep(cat, bound, 2 * bound)?,
        _ => return Err(Error::Unsupported(format!("{p:?} is not available for {}", cat.name()))),
    };
    let mut o = Outcome::new(true);
    o.absorb(&rep);
    Ok(o)
}

fn run_check(a: &CheckArgs) -> Result<Outcome> {
    if let Some(cat) = Concrete::by_name(&a.category) {
        return match a.property {
            Property::Pushout => {
                let b = load_bundle(&need_input(&a.input, "pushout")?)?;
                let (f, g) = (b.map("f")?, b.map("g")?);
                let mut o = Outcome::new(true);
                o.rec("property", "pushout");
                o.rec("category", cat.name());
                o.rec("bound", a.bound);
                match find_pushout(&cat, f, g, a.bound)? {
                    Some((fp, gp)) => {
                        o.rec("verdict", "holds-up-to-bound");
                        o.rec("apex", fp.target());
                        o.rec("f'", &fp);
                        o.rec("g'", &gp);
                    }
                    None => {
                        o.ok = false;
                        o.rec("verdict", "fails");
                        o.rec("witness", format!("no pushout of {f} and {g}"));
                    }
                }
                Ok(o)
            }
            Property::Dominating => {
                let fam = OnePointExtensions.listing(&cat, a.bound + 1)?;
                let mut o = Outcome::new(true);
                o.absorb(&is_dominating(&cat, &fam, a.bound, Domination::Direct)?);
                let chains = is_dominating(&cat, &fam, a.bound, Domination::ViaChains)?;
                o.ok = chains.holds();
                for (k, v) in chains.records() {
                    o.rec(&format!("via-chains.{k}"), v);
                }
                Ok(o)
            }
            Property::FraisseObject => {
                let b = load_bundle(&need_input(&a.input, "fraisse-object")?)?;
                let u = b.object("u").or_else(|_| b.object("t"))?;
                let mut o = Outcome::new(true);
                o.absorb(&is_fraisse_object(&cat, u, a.bound)?);
                Ok(o)
            }
            p => generic_check(&cat, p, a.bound),
        };
    }
    if let Some(cat) = finite_category(&a.category) {
        if a.property == Property::FraisseObject {
            let mut o = Outcome::new(true);
            for u in cat.all_objects().to_vec() {
                let r = is_fraisse_object(&cat, &u, a.bound)?;
                o.rec(&format!("fraisse-object.{}", u), r.verdict);
            }
            return Ok(o);
        }
        return generic_check(&cat, a.property, a.bound);
    }
    if let Some(rk) = a.category.strip_prefix("rp-").and_then(Retractive::by_name) {
        return generic_check(&rk, a.property, a.bound);
    }
    Err(unknown_category(&a.category))
}

fn write_artifact(o: &mut Outcome, out: &Option<PathBuf>, text: String) -> Result<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Error::Parse {
                line: 0,
                msg: format!("cannot write {}: {e}", p.display()),
            })?;
            o.rec("artifact", p.display());
        }
        None => o.artifact = Some(text),
    }
    Ok(())
}

fn run_build(a: &BuildArgs) -> Result<Outcome> {
    let cat = Concrete::by_name(&a.category).ok_or_else(|| unknown_category(&a.category))?;
    let cfg = BuildConfig {
        steps: a.steps,
        seed: a.seed,
        ..BuildConfig::default()
    };
    let b = build_fraisse(&cat, &OnePointExtensions, &cfg)?;
    let mut o = Outcome::new(true);
    o.transcript = b.transcript.clone();
    verify_build(&cat, &b)?;
    o.rec("category", cat.name());
    o.rec("steps", a.steps);
    o.rec("seed", a.seed);
    o.rec("last-size", cat.size(b.seq.last()));
    o.rec("absorptions", b.absorptions.len());
    match validate_sequence(&cat, &b.seq) {
        Ok(()) => o.rec("functoriality", "holds"),
        Err(t) => {
            o.ok = false;
            o.rec("functoriality", format!("fails at {t:?}"));
        }
    }
    let checks = if a.verify {
        vec![check_u(&cat, &b.seq, a.bound), check_a(&cat, &b.seq, a.bound)?, check_e(&cat, &b.seq, a.bound)?]
    } else {
        Vec::new()
    };
    for r in checks {
        o.ok &= r.holds();
        o.rec(&r.property, r.verdict);
        if let Some(w) = &r.witness {
            o.rec(&format!("{}.witness", r.property), w);
        }
    }
    let text = write_sequence(&cat, &b.seq, &cfg.header(&cat.name()))?;
    write_artifact(&mut o, &a.out, text)?;
    Ok(o)
}

fn run_limit(a: &LimitArgs) -> Result<Outcome> {
    let text = read(&a.input)?;
    let (_, seq) = parse_sequence(&text)?;
    let depth = a.depth.unwrap_or(seq.len()).min(seq.len());
    let lim = materialize_limit(&seq, depth)?;
    let mut o = Outcome::new(true);
    o.rec("depth", depth);
    o.rec("size", lim.structure.size());
    if let Some(scan) = a.scan {
        let stage = a.stage.unwrap_or(depth / 4);
        let rep = match scan {
            Scan::Density => lim.check_density(stage)?,
            Scan::Extension => lim.check_extension_axiom(stage, a.bound)?,
            Scan::Homogeneity => lim.check_homogeneity(a.bound, stage)?,
        };
        o.rec("stage", stage);
        o.ok &= rep.holds;
        o.records.extend(rep.records());
    }
    let header = format!("# source={} depth={depth}", a.input.display());
    write_artifact(&mut o, &a.out, lim.to_text(&header))?;
    Ok(o)
}

fn run_backforth(a: &BackforthArgs) -> Result<Outcome> {
    let (cat, u, v) = match a.input.len() {
        0 => {
            let cat = Concrete::by_name(&a.category).ok_or_else(|| unknown_category(&a.category))?;
            let mk = |seed| {
                build_fraisse(
                    &cat,
                    &OnePointExtensions,
                    &BuildConfig {
                        steps: a.steps,
                        seed,
                        ..BuildConfig::default()
                    },
                )
                .map(|b| b.seq)
            };
            let (u, v) = (mk(a.seed)?, mk(a.seed + 1)?);
            (cat, u, v)
        }
        2 => {
            let (cat, u) = parse_sequence(&read(&a.input[0])?)?;
            let (cat2, v) = parse_sequence(&read(&a.input[1])?)?;
            if cat.name() != cat2.name() {
                return Err(Error::MismatchedEndpoints("sequences live in different categories".into()));
            }
            (cat, u, v)
        }
        _ => return Err(Error::PreconditionFailed("give two --in files or none".into())),
    };
    let (u, v) = (Arc::new(u), Arc::new(v));
    let f = cat
        .first_arrow(u.object(0), v.object(0))
        .ok_or_else(|| Error::AmalgamationSearchFailed("no arrow between the first objects".into()))?;
    let z = back_and_forth(&cat, &u, &v, &f, 0, 0, a.depth)?;
    let mut o = Outcome::new(true);
    o.transcript = z.transcript.clone();
    o.rec("k", format!("{:?}", z.ks));
    o.rec("l", format!("{:?}", z.ls));
    match verify_zigzag(&cat, &u, &v, &z)? {
        Ok(n) => o.rec("identities", format!("{n} checked, all hold")),
        Err(w) => {
            o.ok = false;
            o.rec("identities", format!("fails: {w}"));
        }
    }
    let (ff, gg) = zigzag_transformations(&cat, &u, &v, &z)?;
    let iso = zigzag_is_isomorphism(&cat, &ff, &gg)?;
    o.ok &= iso;
    o.rec("isomorphism", if iso { "holds" } else { "fails" });
    Ok(o)
}

fn run_embed(a: &EmbedArgs) -> Result<Outcome> {
    let (cat, x) = parse_sequence(&read(&a.input[0])?)?;
    let (cat2, u) = parse_sequence(&read(&a.input[1])?)?;
    if cat.name() != cat2.name() {
        return Err(Error::MismatchedEndpoints("sequences live in different categories".into()));
    }
    let (x, u) = (Arc::new(x), Arc::new(u));
    let t: SeqTransformation<Concrete> = embed_sequence(&cat, &x, &u, a.depth)?;
    let mut o = Outcome::new(true);
    for (n, (phi, c)) in t.index_map.iter().zip(&t.components).enumerate() {
        o.transcript.push(format!("f_{n}: x_{n} -> u_{phi} ({})", c.map_text()));
    }
    o.rec("index-map", format!("{:?}", t.index_map));
    o.rec("naturality", "holds");
    Ok(o)
}

fn run_rp(a: &RpArgs) -> Result<Outcome> {
    let mut o = Outcome::new(true);
    match a.action {
        RpAction::Counterexample => {
            let c = sets_counterexample()?;
            let name = |id: u32| crate::retracts::letter(id).to_string();
            o.transcript.push(format!("f = {}", c.f));
            o.transcript.push(format!("g = {}", c.g));
            o.transcript.push(format!("h = {}", c.h));
            o.transcript.push(format!("k = {}", c.k));
            o.rec("amalgamation", if c.report.commutes() { "holds" } else { "fails" });
            o.rec("proper", if c.report.holds() { "holds" } else { "fails" });
            for d in &c.report.diagrams {
                let v = match d.witness {
                    None => "commutes".to_string(),
                    Some((x, l, r)) => format!("fails at {}: {} vs {}", name(x), name(l), name(r)),
                };
                o.rec(d.name, v);
            }
            let v = &c.variant.diagrams[3];
            o.rec(
                "variant r(h)(c)=b",
                match v.witness {
                    None => "commutes".to_string(),
                    Some((x, l, r)) => format!("{} fails at {}: {} vs {}", v.name, name(x), name(l), name(r)),
                },
            );
            o.rec("proper_amalgamate", if c.proper_report.holds() { "proper" } else { "not-proper" });
            o.ok = c.report.holds();
        }
        RpAction::Amalgamate => {
            let (rk, f, g) = match &a.input {
                Some(p) => {
                    let b = load_bundle(p)?;
                    let name = b.category.clone().unwrap_or(a.category.clone());
                    let rk = Retractive::by_name(&name).ok_or_else(|| unknown_category(&name))?;
                    let (f, g) = (b.rp("f")?.clone(), b.rp("g")?.clone());
                    (rk, f, g)
                }
                None => {
                    let rk = Retractive::by_name(&a.category).ok_or_else(|| unknown_category(&a.category))?;
                    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
                    let (f, g) = random_rp_span(&rk, &mut rng)?;
                    (rk, f, g)
                }
            };
            let (h, k) = proper_amalgamate(&rk, &f, &g, a.bound)?;
            let rep = verify_proper(&f, &g, &h, &k)?;
            o.ok = rep.holds();
            o.records.extend(rep.records());
            let mut text = format!("# category={} seed={} bound={}\ncategory {}\n", rk.name(), a.seed, a.bound, rk.base().name());
            for (n, ob) in [("z", f.dom()), ("x", f.cod()), ("y", g.cod()), ("w", h.cod())] {
                let _ = writeln!(text, "object {n}");
                ob.write_text(&mut text);
            }
            for (n, p, s, t) in [("f", &f, "z", "x"), ("g", &g, "z", "y"), ("h", &h, "x", "w"), ("k", &k, "y", "w")] {
                let _ = writeln!(text, "rp {n} {s} {t}");
                text.push_str(&p.to_text());
            }
            write_artifact(&mut o, &a.out, text)?;
        }
        RpAction::Lift => {
            let (cat, seq) = parse_sequence(&read(&need_input(&a.input, "lift")?)?)?;
            let rk = Retractive::by_name(&cat.name()).ok_or_else(|| unknown_category(&cat.name()))?;
            let (lifted, backtracks) = lift_sequence(&rk, &seq)?;
            o.rec("length", lifted.len());
            o.rec("backtracks", backtracks);
            o.rec("coherence", "holds");
            let text = write_rp_sequence(&rk, &lifted, &format!("# category={} lifted", rk.name()))?;
            write_artifact(&mut o, &a.out, text)?;
        }
    }
    Ok(o)
}

fn tree_object(b: &Bundle, name: &str) -> Result<Arc<FinStructure>> {
    let t = b.object(name)?.clone();
    if t.kind() != Kind::Tree {
        return Err(Error::InvalidStructure(format!("object `{name}` is not a tree")));
    }
    Ok(t)
}

fn run_trees(a: &TreesArgs) -> Result<Outcome> {
    let mut o = Outcome::new(true);
    let standard = |h: usize| -> Result<Arc<FinStructure>> { Ok(Arc::new(FinStructure::tree(build_standard_healthy(h, a.cap)?))) };
    match a.action {
        TreesAction::Standard => {
            let h = a.bound.unwrap_or(3);
            let t = standard(h)?;
            o.rec("height", h);
            o.rec("nodes", t.size());
            o.rec("healthy", is_healthy(t.as_tree().expect("tree")));
            write_artifact(&mut o, &a.out, t.to_text())?;
        }
        TreesAction::Healthy => {
            let b = load_bundle(&need_input(&a.input, "healthy")?)?;
            let t = tree_object(&b, "t")?;
            let h = is_healthy(t.as_tree().expect("tree"));
            o.ok = h;
            o.rec("healthy", h);
        }
        TreesAction::Decompose => {
            let b = load_bundle(&need_input(&a.input, "decompose")?)?;
            let t = tree_object(&b, "t")?;
            let tr = t.as_tree().expect("tree");
            let order = match &b.maxorder {
                Some(ids) => ids
                    .iter()
                    .map(|&id| t.position(id).ok_or_else(|| Error::InvalidStructure(format!("unknown id {id}"))))
                    .collect::<Result<Vec<_>>>()?,
                None => tr.maximal(),
            };
            let chains = natural_decomposition(tr, &order)?;
            for (k, c) in chains.iter().enumerate() {
                let ids: Vec<String> = c.iter().map(|&x| t.ids()[x].to_string()).collect();
                o.rec(&format!("chain.{k}"), ids.join(" "));
            }
        }
        TreesAction::Embed => {
            let b = load_bundle(&need_input(&a.input, "embed")?)?;
            let t = tree_object(&b, "t")?;
            let v = match b.object("v") {
                Ok(v) => v.clone(),
                Err(_) => standard(a.bound.unwrap_or(t.as_tree().expect("tree").height() + 1))?,
            };
            let f = embed_initial(&t, &v)?;
            o.ok = is_t2_arrow(&f);
            o.rec("map", f.map_text());
            o.rec("t2-arrow", o.ok);
        }
        TreesAction::Extend => {
            let b = load_bundle(&need_input(&a.input, "extend")?)?;
            let (t, s) = (tree_object(&b, "t")?, tree_object(&b, "s")?);
            let incl_map = t
                .ids()
                .iter()
                .map(|&id| s.position(id).ok_or_else(|| Error::InvalidStructure(format!("id {id} of t is missing from s"))))
                .collect::<Result<Vec<_>>>()?;
            let incl = Morphism::new(t.clone(), s.clone(), incl_map)?;
            let f = b.map("f")?.clone();
            let g = extend_arrow(&incl, &f)?;
            o.ok = is_t2_arrow(&g) && g.after(&incl)? == f;
            o.rec("map", g.map_text());
            o.rec("t2-arrow", is_t2_arrow(&g));
            o.rec("agrees", g.after(&incl)? == f);
        }
    }
    Ok(o)
}

fn space(b: &Bundle, name: &str) -> Result<normed::PolyNormedSpace> {
    b.object(name)?
        .as_space()
        .cloned()
        .ok_or_else(|| Error::InvalidStructure(format!("object `{name}` is not a space")))
}

fn run_normed(a: &NormedArgs) -> Result<Outcome> {
    let mut o = Outcome::new(true);
    match a.action {
        NormedAction::Cknonext => {
            let r = ck_nonextension_check();
            for (i, c) in r.candidates.iter().enumerate() {
                let rows: Vec<String> = (0..c.matrix.rows()).map(|r| fmt_vec(c.matrix.row(r))).collect();
                o.transcript.push(format!(
                    "isometry {i}: rows {}, 1 -> {}, extends={}, |alpha + v(t)| = {}",
                    rows.join(" "),
                    fmt_vec(&c.image_of_one),
                    c.extends,
                    c.bound
                ));
            }
            o.rec("candidates", r.candidates.len());
            o.rec("extending", r.extending);
            o.rec("blocking-value", &r.blocking_value);
            o.ok = r.extending == 0;
        }
        NormedAction::Norm => {
            let b = load_bundle(&need_input(&a.input, "norm")?)?;
            for (name, ob) in &b.objects {
                let Some(s) = ob.as_space() else { continue };
                for (pn, p) in b.points.iter().filter(|(_, p)| p.len() == s.dim()) {
                    o.rec(&format!("norm.{name}.{pn}"), minkowski(s, p)?);
                }
            }
        }
        NormedAction::Amalgamate | NormedAction::Pushout => {
            let b = load_bundle(&need_input(&a.input, "amalgamate")?)?;
            let (z, x, y) = (space(&b, "z")?, space(&b, "x")?, space(&b, "y")?);
            let (f, g) = (b.matrix("f")?, b.matrix("g")?);
            let am = if a.action == NormedAction::Pushout {
                pushout_norms(&z, &x, &y, f, g, b.matrix("pf")?, b.matrix("pg")?)?
            } else {
                amalgamate_norms(&z, &x, &y, f, g)?
            };
            o.rec("dim", am.w.dim());
            o.rec("ball-vertices", am.w.vertices().len());
            for (n, m, from) in [("f'", &am.f_prime, &x), ("g'", &am.g_prime, &y)] {
                match normed::isometry_violation(m, from, &am.w)? {
                    None => o.rec(n, "isometric"),
                    Some(w) => {
                        o.ok = false;
                        o.rec(n, format!("not isometric: {w}"));
                    }
                }
            }
            let mut text = String::from("object w\n");
            FinStructure::space(am.w.clone()).write_text(&mut text);
            text.push_str("matrix f'\n");
            text.push_str(&am.f_prime.to_text());
            text.push_str("matrix g'\n");
            text.push_str(&am.g_prime.to_text());
            if a.action == NormedAction::Pushout {
                if let (Ok(u), Ok(p), Ok(q)) = (space(&b, "u"), b.matrix("p"), b.matrix("q")) {
                    let h = pushout_mediator(&am, f, &x, &y, &u, p, q)?;
                    o.rec("mediator", "unique, norm at most 1");
                    text.push_str("matrix h\n");
                    text.push_str(&h.to_text());
                }
            }
            write_artifact(&mut o, &a.out, text)?;
        }
    }
    Ok(o)
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Check(a) => run_check(a),
        Command::Build(a) => run_build(a),
        Command::Limit(a) => run_limit(a),
        Command::Backforth(a) => run_backforth(a),
        Command::Embed(a) => run_embed(a),
        Command::Rp(a) => run_rp(a),
        Command::Trees(a) => run_trees(a),
        Command::Normed(a) => run_normed(a),
    }
}

/// Run with the given arguments, printing to stdout and stderr; returns
/// the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let mut text = o.render(cli.format);
            if let Some(a) = &o.artifact {
                if cli.format == Format::Text {
                    text.push_str("--\n");
                }
                text.push_str(a);
            }
            // A closed pipe downstream is not an error of ours.
            let _ = std::io::Write::write_all(&mut std::io::stdout().lock(), text.as_bytes());
            if o.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
