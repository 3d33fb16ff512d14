//! Building Fraïssé sequences, embedding sequences into them, the
//! back-and-forth between two of them, and finite views of the limit.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::category::Category;
use crate::concrete::Concrete;
use crate::error::{Error, Result};
use crate::morphism::Morphism;
use crate::properties::{check_amalgamation, check_jep, find_joint_cocone, is_dominating, Domination};
use crate::sequences::{compose_seq_arrows, transformations_equivalent, InductiveSequence, SeqTransformation};
use crate::structure::{FinStructure, Payload};

/// A family of arrows, enumerable out of any object.
pub trait ExtensionFamily<C: Category> {
    fn name(&self) -> String;
    /// Number of family arrows out of `a` (saturating).
    fn count_from(&self, cat: &C, a: &C::Ob) -> u64;
    fn nth_from(&self, cat: &C, a: &C::Ob, j: u64) -> Option<C::Arr>;
    fn sample_from(&self, cat: &C, a: &C::Ob, rng: &mut ChaCha8Rng) -> Option<C::Arr>;
    /// Family arrows between canonical objects, domains of size at most
    /// `bound`.
    fn listing(&self, cat: &C, bound: usize) -> Result<Vec<C::Arr>>;
}

/// Inclusions adding one new element.
pub struct OnePointExtensions;

impl ExtensionFamily<Concrete> for OnePointExtensions {
    fn name(&self) -> String {
        "one-point-extensions".into()
    }

    fn count_from(&self, cat: &Concrete, a: &Arc<FinStructure>) -> u64 {
        cat.extension_count(a)
    }

    fn nth_from(&self, cat: &Concrete, a: &Arc<FinStructure>, j: u64) -> Option<Morphism> {
        cat.extension_nth(a, j)
    }

    fn sample_from(&self, cat: &Concrete, a: &Arc<FinStructure>, rng: &mut ChaCha8Rng) -> Option<Morphism> {
        cat.extension_random(a, rng)
    }

    fn listing(&self, cat: &Concrete, bound: usize) -> Result<Vec<Morphism>> {
        let mut out = Vec::new();
        for a in cat.objects(bound) {
            for j in 0..cat.extension_count(&a) {
                let e = cat.extension_nth(&a, j).expect("index in range");
                let canon = Arc::new(cat.canonical(e.target()));
                let iso = cat
                    .first_arrow(e.target(), &canon)
                    .ok_or_else(|| Error::PreconditionFailed("canonical form is not isomorphic".into()))?;
                let f = iso.after(&e)?;
                if !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildConfig {
    /// Number of stages to produce.
    pub steps: usize,
    pub seed: u64,
    /// Sweep every family arrow out of a stage when there are at most this
    /// many; otherwise sample.
    pub sweep_cap: u64,
    pub sweep_samples: usize,
    /// Bound for the precondition checks.
    pub working_bound: usize,
    pub check_preconditions: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            steps: 16,
            seed: 0,
            sweep_cap: 4096,
            sweep_samples: 2,
            working_bound: 2,
            check_preconditions: true,
        }
    }
}

impl BuildConfig {
    pub fn header(&self, category: &str) -> String {
        format!(
            "# category={} steps={} seed={} sweep_cap={} sweep_samples={} working_bound={}",
            category, self.steps, self.seed, self.sweep_cap, self.sweep_samples, self.working_bound
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskSource {
    CatchUp,
    Sweep,
}

/// One family arrow `f: u_stage → y` absorbed at `step`, with `g` such that
/// `g ∘ f = u_stage^step`.
pub struct Absorption<C: Category> {
    pub step: usize,
    pub stage: usize,
    pub source: TaskSource,
    pub grew: bool,
    pub f: C::Arr,
    pub g: C::Arr,
}

pub struct FraisseBuild<C: Category> {
    pub seq: InductiveSequence<C>,
    /// `a_β`, the objects whose embedding into `u_β` was enforced.
    pub enumeration: Vec<C::Ob>,
    pub absorptions: Vec<Absorption<C>>,
    pub transcript: Vec<String>,
}

/// The `n`-th canonical object in order of size.
pub fn nth_object<C: Category>(cat: &C, n: usize) -> Result<C::Ob> {
    let mut bound = 1;
    loop {
        let obs = cat.objects(bound);
        if obs.len() > n {
            return Ok(obs[n].clone());
        }
        bound += 1;
        if bound > 64 {
            return Err(Error::IndexOutOfRange(format!("fewer than {} objects", n + 1)));
        }
    }
}

/// Stage swept at step `β`: every stage is swept, stage `s` around step `2s`.
pub fn sweep_stage(beta: usize) -> usize {
    if beta <= 1 {
        0
    } else {
        beta.div_ceil(2)
    }
}

/// Cantor unpairing of `t` into `(stage, index)`.
pub fn catch_up_task(t: usize) -> (usize, u64) {
    let mut w = 0;
    while (w + 1) * (w + 2) / 2 <= t {
        w += 1;
    }
    let j = t - w * (w + 1) / 2;
    (w - j, j as u64)
}

fn rotation(seed: u64, stage: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (stage as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.random()
}

/// Build a prefix of a Fraïssé sequence.
///
/// `u_0 = a_0`. At step `β` the previous stage `v = u_{β-1}` is the colimit
/// of the prefix so far; `a_β` is joined in when it does not already embed,
/// then the scheduled family arrows are absorbed one by one, reusing
/// existing points whenever the arrow already factors.
pub fn build_fraisse<C, F>(cat: &C, family: &F, cfg: &BuildConfig) -> Result<FraisseBuild<C>>
where
    C: Category,
    F: ExtensionFamily<C>,
{
    if cfg.steps == 0 {
        return Err(Error::PreconditionFailed("at least one stage is needed".into()));
    }
    let wb = cfg.working_bound;
    if cfg.check_preconditions {
        let am = check_amalgamation(cat, wb, 2 * wb)?;
        let jep = check_jep(cat, wb, 2 * wb)?;
        let dom = is_dominating(cat, &family.listing(cat, wb + 1)?, wb, Domination::ViaChains)?;
        for (name, ok) in [("amalgamation", am.holds()), ("joint embedding", jep.holds()), ("domination", dom.holds())] {
            if !ok {
                return Err(Error::PreconditionFailed(format!("{name} fails up to bound {wb}")));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut transcript = vec![format!(
        "family={} steps={} seed={} (the colimit of a finite prefix is its last stage)",
        family.name(),
        cfg.steps,
        cfg.seed
    )];
    let a0 = nth_object(cat, 0)?;
    let mut objects = vec![a0.clone()];
    let mut gens: Vec<C::Arr> = Vec::new();
    let mut enumeration = vec![a0];
    let mut absorptions = Vec::new();
    let mut seq = InductiveSequence::from_generators(cat, objects.clone(), Vec::new())?;
    for beta in 1..cfg.steps {
        let prev = seq.last().clone();
        let mut v = prev.clone();
        let mut acc = cat.identity(&prev);
        let a = nth_object(cat, beta)?;
        if cat.first_arrow(&a, &v).is_some() {
            transcript.push(format!("step {beta}: a_{beta} already embeds"));
        } else {
            let (p, _) = cat
                .joint_embed(&v, &a)
                .or_else(|| find_joint_cocone(cat, &v, &a, cat.size(&v) + cat.size(&a)))
                .ok_or_else(|| Error::AmalgamationSearchFailed(format!("no joint cocone at step {beta}")))?;
            acc = cat.compose(&p, &acc)?;
            v = cat.cod(&p);
            transcript.push(format!("step {beta}: joined a_{beta}, size {}", cat.size(&v)));
        }
        enumeration.push(a);
        let mut tasks: Vec<(usize, C::Arr, TaskSource)> = Vec::new();
        let (cs, cj) = catch_up_task(beta - 1);
        let stage_ob = seq.object(cs).clone();
        let count = family.count_from(cat, &stage_ob);
        if cj < count {
            let idx = (cj.wrapping_add(rotation(cfg.seed, cs))) % count;
            if let Some(f) = family.nth_from(cat, &stage_ob, idx) {
                tasks.push((cs, f, TaskSource::CatchUp));
            }
        }
        let s = sweep_stage(beta);
        let sweep_ob = seq.object(s).clone();
        let count = family.count_from(cat, &sweep_ob);
        if count <= cfg.sweep_cap {
            let rot = rotation(cfg.seed, s);
            for j in 0..count {
                if let Some(f) = family.nth_from(cat, &sweep_ob, (j + rot % count.max(1)) % count) {
                    tasks.push((s, f, TaskSource::Sweep));
                }
            }
        } else {
            for _ in 0..cfg.sweep_samples {
                if let Some(f) = family.sample_from(cat, &sweep_ob, &mut rng) {
                    tasks.push((s, f, TaskSource::Sweep));
                }
            }
        }
        let step_start = absorptions.len();
        let (mut free, mut grown) = (0, 0);
        for (xi, f, src) in tasks {
            let t = cat.compose(&acc, seq.bond(xi, beta - 1)?)?;
            if let Some(g) = cat.first_factor_after(&f, &t) {
                free += 1;
                absorptions.push(Absorption {
                    step: beta,
                    stage: xi,
                    source: src,
                    grew: false,
                    f,
                    g,
                });
                continue;
            }
            let (h, g) = cat
                .amalgamate(&t, &f)
                .ok_or_else(|| Error::AmalgamationSearchFailed(format!("step {beta}, stage {xi}")))?;
            for ab in absorptions[step_start..].iter_mut() {
                ab.g = cat.compose(&h, &ab.g)?;
            }
            acc = cat.compose(&h, &acc)?;
            v = cat.cod(&h);
            grown += 1;
            absorptions.push(Absorption {
                step: beta,
                stage: xi,
                source: src,
                grew: true,
                f,
                g,
            });
        }
        transcript.push(format!(
            "step {beta}: catch-up stage {cs}, sweep stage {s}, absorbed {free} free and {grown} by amalgamation, size {}",
            cat.size(&v)
        ));
        objects.push(v);
        gens.push(acc);
        seq = InductiveSequence::from_generators(cat, objects.clone(), gens.clone())?;
    }
    Ok(FraisseBuild {
        seq,
        enumeration,
        absorptions,
        transcript,
    })
}

/// Invariants of a build: `u_0 = a_0`, every `a_β` embeds into `u_β`, and
/// every absorption satisfies `g ∘ f = u_ξ^β`.
pub fn verify_build<C: Category>(cat: &C, b: &FraisseBuild<C>) -> Result<()> {
    if b.seq.object(0) != &b.enumeration[0] {
        return Err(Error::PreconditionFailed("u_0 differs from a_0".into()));
    }
    for (beta, a) in b.enumeration.iter().enumerate() {
        if cat.first_arrow(a, b.seq.object(beta)).is_none() {
            return Err(Error::PreconditionFailed(format!("a_{beta} does not embed into u_{beta}")));
        }
    }
    for ab in &b.absorptions {
        if cat.compose(&ab.g, &ab.f)? != *b.seq.bond(ab.stage, ab.step)? {
            return Err(Error::PreconditionFailed(format!(
                "absorption of an arrow out of stage {} at step {} does not commute",
                ab.stage, ab.step
            )));
        }
    }
    Ok(())
}

/// Arrow from the first `depth` stages of `x` into `u`, built stage by
/// stage: `f_n ∘ x_{n-1}^n = u_{α_{n-1}}^{α_n} ∘ f_{n-1}`.
pub fn embed_sequence<C: Category>(
    cat: &C,
    x: &Arc<InductiveSequence<C>>,
    u: &Arc<InductiveSequence<C>>,
    depth: usize,
) -> Result<SeqTransformation<C>> {
    let depth = depth.min(x.len());
    let mut index_map = Vec::new();
    let mut comps: Vec<C::Arr> = Vec::new();
    for n in 0..depth {
        let start = index_map.last().copied().unwrap_or(0);
        let mut found = None;
        for alpha in start..u.len() {
            let cand = if n == 0 {
                cat.first_arrow(x.object(0), u.object(alpha))
            } else {
                let target = cat.compose(u.bond(start, alpha)?, &comps[n - 1])?;
                cat.first_factor_after(x.bond(n - 1, n)?, &target)
            };
            if let Some(f) = cand {
                found = Some((alpha, f));
                break;
            }
        }
        let (alpha, f) = found.ok_or(Error::ExtensionSearchFailed { stage: n })?;
        index_map.push(alpha);
        comps.push(f);
    }
    SeqTransformation::new(cat, x.clone(), u.clone(), index_map, comps)
}

/// Indices and arrows of a back-and-forth between two sequences:
/// `f_n: u_{k_n} → v_{ℓ_n}` and `g_n: v_{ℓ_n} → u_{k_{n+1}}`.
pub struct ZigZag<C: Category> {
    pub ks: Vec<usize>,
    pub ls: Vec<usize>,
    pub fs: Vec<C::Arr>,
    pub gs: Vec<C::Arr>,
    pub transcript: Vec<String>,
}

/// Starting from `f: u_k → v_ℓ`, alternately absorb into `u` and `v` for
/// `depth` rounds, keeping `k_0 ≤ ℓ_0 < k_1 ≤ ℓ_1 < …`.
pub fn back_and_forth<C: Category>(
    cat: &C,
    u: &InductiveSequence<C>,
    v: &InductiveSequence<C>,
    f: &C::Arr,
    k: usize,
    l: usize,
    depth: usize,
) -> Result<ZigZag<C>> {
    if cat.dom(f) != *u.object(k) || cat.cod(f) != *v.object(l) {
        return Err(Error::MismatchedEndpoints("starting arrow is not u_k → v_l".into()));
    }
    let mut transcript = Vec::new();
    let (mut f0, mut l0) = (f.clone(), l);
    if k > l {
        if k >= v.len() {
            return Err(Error::IndexOutOfRange("cannot move the start inside v".into()));
        }
        f0 = cat.compose(v.bond(l, k)?, f)?;
        l0 = k;
        transcript.push(format!("start moved to v_{l0}"));
    }
    let mut z: ZigZag<C> = ZigZag {
        ks: vec![k],
        ls: vec![l0],
        fs: vec![f0],
        gs: Vec::new(),
        transcript,
    };
    for n in 0..=depth {
        let (kn, ln) = (z.ks[n], z.ls[n]);
        let fnn = z.fs[n].clone();
        let mut found = None;
        for k2 in kn.max(ln) + 1..u.len() {
            if let Some(g) = cat.first_factor_after(&fnn, u.bond(kn, k2)?) {
                found = Some((k2, g));
                break;
            }
        }
        let (k2, g) = found.ok_or_else(|| Error::AmalgamationSearchFailed(format!("no g_{n} inside the prefix of u")))?;
        z.transcript.push(format!("g_{n}: v_{ln} -> u_{k2}"));
        z.ks.push(k2);
        z.gs.push(g.clone());
        if n == depth {
            break;
        }
        let mut found = None;
        for l2 in k2.max(ln + 1)..v.len() {
            if let Some(h) = cat.first_factor_after(&g, v.bond(ln, l2)?) {
                found = Some((l2, h));
                break;
            }
        }
        let (l2, h) = found.ok_or_else(|| Error::AmalgamationSearchFailed(format!("no f_{} inside the prefix of v", n + 1)))?;
        z.transcript.push(format!("f_{}: u_{k2} -> v_{l2}", n + 1));
        z.ls.push(l2);
        z.fs.push(h);
    }
    Ok(z)
}

/// The commuting identities of a zig-zag, for all `m < n ≤ depth`, the
/// consecutive triangles, and the compatibility with the starting arrow.
pub fn verify_zigzag<C: Category>(
    cat: &C,
    u: &InductiveSequence<C>,
    v: &InductiveSequence<C>,
    z: &ZigZag<C>,
) -> Result<std::result::Result<usize, String>> {
    let d = z.fs.len() - 1;
    let mut checked = 0;
    for n in 0..=d {
        checked += 1;
        if cat.compose(&z.gs[n], &z.fs[n])? != *u.bond(z.ks[n], z.ks[n + 1])? {
            return Ok(Err(format!("g_{n} after f_{n}")));
        }
        if n < d && cat.compose(&z.fs[n + 1], &z.gs[n])? != *v.bond(z.ls[n], z.ls[n + 1])? {
            return Ok(Err(format!("f_{} after g_{n}", n + 1)));
        }
        checked += 1;
        let lhs = cat.compose(v.bond(z.ls[0], z.ls[n])?, &z.fs[0])?;
        let rhs = cat.compose(&z.fs[n], u.bond(z.ks[0], z.ks[n])?)?;
        if lhs != rhs {
            return Ok(Err(format!("starting triangle at {n}")));
        }
        for m in 0..n {
            checked += 2;
            let a = cat.compose(&z.gs[n], &cat.compose(v.bond(z.ls[m], z.ls[n])?, &z.fs[m])?)?;
            if a != *u.bond(z.ks[m], z.ks[n + 1])? {
                return Ok(Err(format!("g_{n} identity with m={m}")));
            }
            let b = cat.compose(&z.fs[n], &cat.compose(u.bond(z.ks[m + 1], z.ks[n])?, &z.gs[m])?)?;
            if b != *v.bond(z.ls[m], z.ls[n])? {
                return Ok(Err(format!("f_{n} identity with m={m}")));
            }
        }
    }
    Ok(Ok(checked))
}

/// The two sequence arrows carried by a zig-zag.
pub fn zigzag_transformations<C: Category>(
    cat: &C,
    u: &Arc<InductiveSequence<C>>,
    v: &Arc<InductiveSequence<C>>,
    z: &ZigZag<C>,
) -> Result<(SeqTransformation<C>, SeqTransformation<C>)> {
    let d = z.fs.len() - 1;
    let mut fi = Vec::new();
    let mut fc = Vec::new();
    for alpha in 0..=z.ks[d] {
        let n = (0..=d).find(|&n| z.ks[n] >= alpha).expect("covered");
        fi.push(z.ls[n]);
        fc.push(cat.compose(&z.fs[n], u.bond(alpha, z.ks[n])?)?);
    }
    let mut gi = Vec::new();
    let mut gc = Vec::new();
    for beta in 0..=z.ls[d] {
        let n = (0..=d).find(|&n| z.ls[n] >= beta).expect("covered");
        gi.push(z.ks[n + 1]);
        gc.push(cat.compose(&z.gs[n], v.bond(beta, z.ls[n])?)?);
    }
    Ok((
        SeqTransformation::new(cat, u.clone(), v.clone(), fi, fc)?,
        SeqTransformation::new(cat, v.clone(), u.clone(), gi, gc)?,
    ))
}

/// `G ∘ F` and `F ∘ G` are equivalent to identities where defined.
pub fn zigzag_is_isomorphism<C: Category>(cat: &C, f: &SeqTransformation<C>, g: &SeqTransformation<C>) -> Result<bool> {
    let gf = compose_seq_arrows(cat, g, f)?;
    let fg = compose_seq_arrows(cat, f, g)?;
    let id_u = SeqTransformation::identity(cat, f.source.clone(), gf.len());
    let id_v = SeqTransformation::identity(cat, g.source.clone(), fg.len());
    Ok(!gf.is_empty() && !fg.is_empty() && transformations_equivalent(cat, &gf, &id_u)? && transformations_equivalent(cat, &fg, &id_v)?)
}

/// Union of a prefix along injective bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitStructure {
    pub structure: Arc<FinStructure>,
    /// Earliest stage containing each element.
    pub provenance: Vec<usize>,
    /// Position of each stage inside the union.
    pub stage_maps: Vec<Vec<usize>>,
}

pub fn materialize_limit<C>(seq: &InductiveSequence<C>, depth: usize) -> Result<LimitStructure>
where
    C: Category<Ob = Arc<FinStructure>, Arr = Morphism>,
{
    let d = depth.min(seq.len()).max(1);
    for xi in 0..d - 1 {
        if !seq.bond(xi, xi + 1)?.is_injective() {
            return Err(Error::NonInjectiveBond(xi, xi + 1));
        }
    }
    let last = d - 1;
    let structure = seq.object(last).clone();
    let mut provenance = vec![usize::MAX; structure.size()];
    let mut stage_maps = Vec::new();
    for xi in 0..d {
        let b = seq.bond(xi, last)?;
        for &p in b.map() {
            provenance[p] = provenance[p].min(xi);
        }
        stage_maps.push(b.map().to_vec());
    }
    Ok(LimitStructure {
        structure,
        provenance,
        stage_maps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    pub name: String,
    pub holds: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

impl ScanReport {
    fn new(name: &str) -> Self {
        ScanReport {
            name: name.into(),
            holds: true,
            checked: 0,
            witness: None,
        }
    }

    fn fail(mut self, w: String) -> Self {
        self.holds = false;
        self.witness = Some(w);
        self
    }

    pub fn records(&self) -> Vec<(String, String)> {
        let mut r = vec![
            ("scan".into(), self.name.clone()),
            ("verdict".into(), if self.holds { "holds".into() } else { "fails".into() }),
            ("checked".into(), self.checked.to_string()),
        ];
        if let Some(w) = &self.witness {
            r.push(("witness".into(), w.clone()));
        }
        r
    }
}

impl LimitStructure {
    pub fn early_points(&self, stage: usize) -> Vec<usize> {
        (0..self.provenance.len()).filter(|&p| self.provenance[p] <= stage).collect()
    }

    /// Between any two points from stages up to `stage` there is a point.
    pub fn check_density(&self, stage: usize) -> Result<ScanReport> {
        let ranks = self
            .structure
            .as_order()
            .ok_or_else(|| Error::Unsupported("density needs a linear order".into()))?;
        let mut early: Vec<usize> = self.early_points(stage);
        early.sort_by_key(|&p| ranks[p]);
        let mut rep = ScanReport::new("density");
        for w in early.windows(2) {
            rep.checked += 1;
            if ranks[w[1]] - ranks[w[0]] < 2 {
                let ids = self.structure.ids();
                return Ok(rep.fail(format!("nothing between {} and {}", ids[w[0]], ids[w[1]])));
            }
        }
        Ok(rep)
    }

    /// For disjoint `A`, `B` of points from stages up to `stage` with
    /// `|A| + |B| ≤ max`, some other point is adjacent to all of `A` and to
    /// none of `B`.
    pub fn check_extension_axiom(&self, stage: usize, max: usize) -> Result<ScanReport> {
        let g = self
            .structure
            .as_graph()
            .ok_or_else(|| Error::Unsupported("the extension axiom needs a graph".into()))?;
        let early = self.early_points(stage);
        let mut rep = ScanReport::new("extension-axiom");
        let mut sets: Vec<Vec<usize>> = vec![Vec::new()];
        for size in 1..=max {
            sets.extend(crate::normed::linalg::subsets(early.len(), size).into_iter().map(|s| s.iter().map(|&i| early[i]).collect()));
        }
        for s in &sets {
            for mask in 0..(1usize << s.len()) {
                rep.checked += 1;
                let ok = (0..g.len()).any(|z| {
                    !s.contains(&z) && s.iter().enumerate().all(|(k, &x)| g.adjacent(z, x) == (mask >> k & 1 == 1))
                });
                if !ok {
                    let ids = self.structure.ids();
                    let a: Vec<u32> = s.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &x)| ids[x]).collect();
                    let b: Vec<u32> = s.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 0).map(|(_, &x)| ids[x]).collect();
                    return Ok(rep.fail(format!("no witness for A={a:?} B={b:?}")));
                }
            }
        }
        Ok(rep)
    }

    /// Every partial isomorphism between sets of at most `k` points from
    /// stages up to `stage` extends, back and forth, by any further such
    /// point, with the new image anywhere in the union.
    pub fn check_homogeneity(&self, k: usize, stage: usize) -> Result<ScanReport> {
        let early = self.early_points(stage);
        let mut rep = ScanReport::new("homogeneity");
        let n = self.structure.size();
        for size in 1..=k {
            for dom in ordered_tuples(&early, size) {
                for img in ordered_tuples(&early, size) {
                    if !partial_iso(&self.structure, &dom, &img) {
                        continue;
                    }
                    for &x in &early {
                        rep.checked += 1;
                        if !dom.contains(&x) && !(0..n).any(|y| extends(&self.structure, &dom, &img, x, y)) {
                            return Ok(rep.fail(self.describe(&dom, &img, "forth", x)));
                        }
                        if !img.contains(&x) && !(0..n).any(|y| extends(&self.structure, &img, &dom, x, y)) {
                            return Ok(rep.fail(self.describe(&dom, &img, "back", x)));
                        }
                    }
                }
            }
        }
        Ok(rep)
    }

    fn describe(&self, dom: &[usize], img: &[usize], dir: &str, x: usize) -> String {
        let ids = self.structure.ids();
        let pairs: Vec<String> = dom.iter().zip(img).map(|(&a, &b)| format!("{}>{}", ids[a], ids[b])).collect();
        format!("partial map {{{}}} has no {dir} extension at {}", pairs.join(","), ids[x])
    }
}

fn ordered_tuples(points: &[usize], size: usize) -> Vec<Vec<usize>> {
    crate::category::injective_maps(size, points.len())
        .into_iter()
        .map(|m| m.into_iter().map(|i| points[i]).collect())
        .collect()
}

fn related(s: &FinStructure, x: usize, y: usize) -> (bool, bool) {
    match s.payload() {
        Payload::Graph(g) => (g.adjacent(x, y), false),
        Payload::LinOrder(r) => (r[x] < r[y], false),
        _ => (false, false),
    }
}

fn partial_iso(s: &FinStructure, dom: &[usize], img: &[usize]) -> bool {
    (0..dom.len()).all(|i| (0..dom.len()).all(|j| i == j || related(s, dom[i], dom[j]) == related(s, img[i], img[j])))
}

fn extends(s: &FinStructure, dom: &[usize], img: &[usize], x: usize, y: usize) -> bool {
    !img.contains(&y) && dom.iter().zip(img).all(|(&a, &b)| related(s, a, x) == related(s, b, y) && related(s, x, a) == related(s, y, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{check_a, check_e, check_u, validate_sequence};
    use crate::structure::Graph;

    fn quick(steps: usize, seed: u64) -> BuildConfig {
        BuildConfig {
            steps,
            seed,
            ..BuildConfig::default()
        }
    }

    #[test]
    fn catch_up_is_a_bijection_onto_pairs() {
        let tasks: Vec<(usize, u64)> = (0..10).map(catch_up_task).collect();
        assert_eq!(&tasks[..4], &[(0, 0), (1, 0), (0, 1), (2, 0)]);
        let mut s = tasks.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), 10);
        assert!((1..64).all(|b| sweep_stage(b) < b));
        assert_eq!(sweep_stage(63), 32);
    }

    #[test]
    fn small_order_build() {
        let cat = Concrete::finlinord();
        let b = build_fraisse(&cat, &OnePointExtensions, &quick(8, 1)).unwrap();
        assert_eq!(validate_sequence(&cat, &b.seq), Ok(()));
        verify_build(&cat, &b).unwrap();
        assert!(check_u(&cat, &b.seq, 3).holds());
        assert!(check_a(&cat, &b.seq, 3).unwrap().holds());
        assert!(check_e(&cat, &b.seq, 3).unwrap().holds());
        let lim = materialize_limit(&b.seq, 8).unwrap();
        assert!(lim.check_density(3).unwrap().holds);
        assert!(lim.check_homogeneity(2, 2).unwrap().holds);
    }

    #[test]
    fn builder_rejects_categories_without_cocones() {
        struct Nothing;
        impl ExtensionFamily<crate::category::FiniteCategory> for Nothing {
            fn name(&self) -> String {
                "none".into()
            }
            fn count_from(&self, _: &crate::category::FiniteCategory, _: &Arc<FinStructure>) -> u64 {
                0
            }
            fn nth_from(&self, _: &crate::category::FiniteCategory, _: &Arc<FinStructure>, _: u64) -> Option<Morphism> {
                None
            }
            fn sample_from(&self, _: &crate::category::FiniteCategory, _: &Arc<FinStructure>, _: &mut ChaCha8Rng) -> Option<Morphism> {
                None
            }
            fn listing(&self, _: &crate::category::FiniteCategory, _: usize) -> Result<Vec<Morphism>> {
                Ok(Vec::new())
            }
        }
        let cat = crate::category::FiniteCategory::no_cocone();
        let r = build_fraisse(&cat, &Nothing, &quick(3, 0));
        assert!(matches!(r, Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn path_limit_is_not_homogeneous() {
        let cat = Concrete::fingraph();
        let mut obs = Vec::new();
        for n in 1..=6 {
            let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
            obs.push(Arc::new(FinStructure::graph(Graph::from_edges(n, &edges).unwrap())));
        }
        let gens = obs
            .windows(2)
            .map(|w| Morphism::new(w[0].clone(), w[1].clone(), (0..w[0].size()).collect()).unwrap())
            .collect();
        let seq = InductiveSequence::from_generators(&cat, obs, gens).unwrap();
        let lim = materialize_limit(&seq, 6).unwrap();
        let rep = lim.check_homogeneity(2, 5).unwrap();
        assert!(!rep.holds);
        assert!(rep.witness.unwrap().contains("partial map"));
    }

    #[test]
    fn non_injective_bond_is_reported() {
        let cat = Concrete::finset_maps();
        let a = Arc::new(FinStructure::set(2));
        let b = Arc::new(FinStructure::set(1));
        let f = Morphism::new(a.clone(), b.clone(), vec![0, 0]).unwrap();
        let seq = InductiveSequence::from_generators(&cat, vec![a, b], vec![f]).unwrap();
        assert_eq!(materialize_limit(&seq, 2), Err(Error::NonInjectiveBond(0, 1)));
    }
}
