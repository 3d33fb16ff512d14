//! Retractive pairs: arrows `⟨e, r⟩` with `r ∘ e = id`, proper
//! amalgamation, and lifting sequences of left-invertible bonds.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::category::Category;
use crate::concrete::{ArrowClass, Concrete};
use crate::error::{Error, Result};
use crate::morphism::Morphism;
use crate::properties::find_pushout;
use crate::sequences::InductiveSequence;
use crate::structure::{FinStructure, Graph, Kind, Payload};

/// `e: X → Y` an embedding and `r: Y → X` with `r ∘ e = id_X`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RPArrow {
    e: Morphism,
    r: Morphism,
}

impl RPArrow {
    pub fn new(e: Morphism, r: Morphism) -> Result<Self> {
        if e.source() != r.target() || e.target() != r.source() {
            return Err(Error::MismatchedEndpoints("r must run backwards along e".into()));
        }
        if !e.is_injective() {
            return Err(Error::PreconditionFailed("e is not injective".into()));
        }
        if !r.after(&e)?.is_identity() {
            return Err(Error::PreconditionFailed("r ∘ e is not the identity".into()));
        }
        Ok(RPArrow { e, r })
    }

    pub fn identity(ob: &Arc<FinStructure>) -> Self {
        RPArrow {
            e: Morphism::identity(ob),
            r: Morphism::identity(ob),
        }
    }

    pub fn e(&self) -> &Morphism {
        &self.e
    }

    pub fn r(&self) -> &Morphism {
        &self.r
    }

    pub fn dom(&self) -> &Arc<FinStructure> {
        self.e.source()
    }

    pub fn cod(&self) -> &Arc<FinStructure> {
        self.e.target()
    }

    /// `e: …` and `r: …` lines.
    pub fn to_text(&self) -> String {
        format!("e: {}\nr: {}\n", self.e.map_text(), self.r.map_text())
    }

    pub fn parse(x: Arc<FinStructure>, y: Arc<FinStructure>, e_toks: &[&str], r_toks: &[&str]) -> Result<Self> {
        let e = Morphism::parse_map(x.clone(), y.clone(), e_toks)?;
        let r = Morphism::parse_map(y, x, r_toks)?;
        RPArrow::new(e, r)
    }
}

impl fmt::Display for RPArrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<e: {} | r: {}>", self.e.map_text(), self.r.map_text())
    }
}

/// `⟨e(g) ∘ e(f), r(f) ∘ r(g)⟩`.
pub fn rp_compose(g: &RPArrow, f: &RPArrow) -> Result<RPArrow> {
    RPArrow::new(g.e.after(&f.e)?, f.r.after(&g.r)?)
}

/// The category of retractive pairs over a category of sets or graphs with
/// all structure maps. `e`-parts are embeddings, `r`-parts any maps of the
/// base category.
pub struct Retractive {
    base: Concrete,
    emb: Concrete,
    name: String,
}

impl Retractive {
    pub fn new(base: Concrete) -> Result<Self> {
        if base.class() != ArrowClass::Homomorphisms {
            return Err(Error::Unsupported("retractions need a category of all structure maps".into()));
        }
        let emb = match base.kind() {
            Kind::Set => Concrete::finset(),
            Kind::Graph => Concrete::fingraph(),
            k => return Err(Error::Unsupported(format!("retractive pairs over {}", k.keyword()))),
        };
        let name = format!("rp-{}", base.name());
        Ok(Retractive { base, emb, name })
    }

    pub fn over_sets() -> Self {
        Retractive::new(Concrete::finset_maps()).expect("sets")
    }

    pub fn over_graphs() -> Self {
        Retractive::new(Concrete::fingraph_hom()).expect("graphs")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "finset-maps" | "finset" | "rp-finset-maps" => Some(Retractive::over_sets()),
            "fingraph-hom" | "fingraph" | "rp-fingraph-hom" => Some(Retractive::over_graphs()),
            _ => None,
        }
    }

    pub fn base(&self) -> &Concrete {
        &self.base
    }

    pub fn embeddings(&self) -> &Concrete {
        &self.emb
    }

    pub fn is_arrow(&self, f: &RPArrow) -> bool {
        self.emb.is_arrow(&f.e) && self.base.is_arrow(&f.r)
    }

    fn checked(&self, f: RPArrow) -> Result<RPArrow> {
        if self.is_arrow(&f) {
            Ok(f)
        } else {
            Err(Error::PreconditionFailed(format!("{f} is not an arrow of {}", self.name)))
        }
    }

    /// Every `r` with `r ∘ e = id`, in canonical order.
    pub fn retractions(&self, e: &Morphism) -> Result<Vec<Morphism>> {
        self.base.factor_after(e, &Morphism::identity(e.source()))
    }
}

impl Category for Retractive {
    type Ob = Arc<FinStructure>;
    type Arr = RPArrow;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn size(&self, ob: &Self::Ob) -> usize {
        ob.size()
    }

    fn dom(&self, f: &RPArrow) -> Self::Ob {
        f.dom().clone()
    }

    fn cod(&self, f: &RPArrow) -> Self::Ob {
        f.cod().clone()
    }

    fn identity(&self, ob: &Self::Ob) -> RPArrow {
        RPArrow::identity(ob)
    }

    fn compose(&self, g: &RPArrow, f: &RPArrow) -> Result<RPArrow> {
        rp_compose(g, f)
    }

    fn objects(&self, bound: usize) -> Vec<Self::Ob> {
        self.base.objects(bound)
    }

    fn hom(&self, a: &Self::Ob, b: &Self::Ob) -> Result<Vec<RPArrow>> {
        let mut out = Vec::new();
        for e in self.emb.hom(a, b)? {
            for r in self.retractions(&e)? {
                out.push(RPArrow { e: e.clone(), r });
            }
        }
        Ok(out)
    }
}

/// The unique `m` with `m ∘ h = p` and `m ∘ k = q`.
fn mediator(base: &Concrete, h: &Morphism, k: &Morphism, p: &Morphism, q: &Morphism, label: &str) -> Result<Morphism> {
    let mut found: Vec<Morphism> = Vec::new();
    for m in base.factor_after(h, p)? {
        if m.after(k)? == *q {
            found.push(m);
        }
    }
    match found.len() {
        1 => Ok(found.pop().expect("one")),
        0 => Err(Error::UniqueMediatorMissing(format!("no {label}"))),
        n => Err(Error::UniqueMediatorMissing(format!("{n} candidates for {label}"))),
    }
}

/// Proper amalgamation of `f: Z → X`, `g: Z → Y` through a pushout of the
/// embedding parts. `bound` caps the test cocones used to confirm the
/// pushout.
pub fn proper_amalgamate(rk: &Retractive, f: &RPArrow, g: &RPArrow, bound: usize) -> Result<(RPArrow, RPArrow)> {
    if f.dom() != g.dom() {
        return Err(Error::MismatchedEndpoints("span legs need a common domain".into()));
    }
    rk.checked(f.clone())?;
    rk.checked(g.clone())?;
    let base = rk.base();
    let (he, ke) = find_pushout(base, &f.e, &g.e, bound)?.ok_or(Error::NoPushout(bound))?;
    // j ∘ h = e(g) ∘ r(f), j ∘ k = id_Y
    let j = mediator(base, &he, &ke, &g.e.after(&f.r)?, &Morphism::identity(g.cod()), "j")?;
    // ℓ ∘ k = e(f) ∘ r(g), ℓ ∘ h = id_X
    let l = mediator(base, &ke, &he, &f.e.after(&g.r)?, &Morphism::identity(f.cod()), "l")?;
    if f.r.after(&l)? != g.r.after(&j)? {
        return Err(Error::CoconeMismatch("r(f) ∘ l differs from r(g) ∘ j".into()));
    }
    let h = rk.checked(RPArrow::new(he, l)?)?;
    let k = rk.checked(RPArrow::new(ke, j)?)?;
    Ok((h, k))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramCheck {
    pub name: &'static str,
    pub holds: bool,
    /// First element (by id) where the two sides differ, with both values.
    pub witness: Option<(u32, u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperReport {
    pub diagrams: Vec<DiagramCheck>,
}

impl ProperReport {
    pub fn holds(&self) -> bool {
        self.diagrams.iter().all(|d| d.holds)
    }

    pub fn commutes(&self) -> bool {
        self.diagrams[..2].iter().all(|d| d.holds)
    }

    pub fn records(&self) -> Vec<(String, String)> {
        let mut out = vec![("verdict".to_string(), if self.holds() { "proper" } else { "not-proper" }.to_string())];
        for d in &self.diagrams {
            let v = match d.witness {
                None => "commutes".to_string(),
                Some((x, l, r)) => format!("differs at {x}: {l} vs {r}"),
            };
            out.push((d.name.to_string(), v));
        }
        out
    }
}

fn compare(name: &'static str, lhs: &Morphism, rhs: &Morphism) -> DiagramCheck {
    let src = lhs.source();
    let tgt = lhs.target().ids();
    let witness = (0..src.size())
        .find(|&x| lhs.apply(x) != rhs.apply(x))
        .map(|x| (src.ids()[x], tgt[lhs.apply(x)], tgt[rhs.apply(x)]));
    DiagramCheck {
        name,
        holds: witness.is_none(),
        witness,
    }
}

/// The four diagrams of a proper amalgamation: both squares of the pair
/// composite and the two mixed identities.
pub fn verify_proper(f: &RPArrow, g: &RPArrow, h: &RPArrow, k: &RPArrow) -> Result<ProperReport> {
    if f.dom() != g.dom() || h.dom() != f.cod() || k.dom() != g.cod() || h.cod() != k.cod() {
        return Err(Error::MismatchedEndpoints("arrows do not form a square".into()));
    }
    Ok(ProperReport {
        diagrams: vec![
            compare("e(h)∘e(f) = e(k)∘e(g)", &h.e.after(&f.e)?, &k.e.after(&g.e)?),
            compare("r(f)∘r(h) = r(g)∘r(k)", &f.r.after(&h.r)?, &g.r.after(&k.r)?),
            compare("e(g)∘r(f) = r(k)∘e(h)", &g.e.after(&f.r)?, &k.r.after(&h.e)?),
            compare("e(f)∘r(g) = r(h)∘e(k)", &f.e.after(&g.r)?, &h.r.after(&k.e)?),
        ],
    })
}

pub struct Counterexample {
    pub f: RPArrow,
    pub g: RPArrow,
    pub h: RPArrow,
    pub k: RPArrow,
    pub report: ProperReport,
    /// Same square with `r(h)(c) = b`.
    pub variant: ProperReport,
    /// `proper_amalgamate` on the same span.
    pub proper: (RPArrow, RPArrow),
    pub proper_report: ProperReport,
}

/// Element names for the sets example: ids 0, 1, 2 are `a`, `b`, `c`.
pub fn letter(id: u32) -> char {
    (b'a' + id as u8) as char
}

/// An amalgamation of nonempty sets in `R(K)` that is not proper.
pub fn sets_counterexample() -> Result<Counterexample> {
    let set = |ids: Vec<u32>| Arc::new(FinStructure::new(ids, Payload::Set).expect("distinct ids"));
    let (a, b, c) = (0u32, 1u32, 2u32);
    let z = set(vec![a]);
    let x = set(vec![a, b]);
    let y = set(vec![a, c]);
    let w = set(vec![a, b, c]);
    let by_ids = |s: &Arc<FinStructure>, t: &Arc<FinStructure>, m: &[u32]| {
        let map = m.iter().map(|&i| t.position(i).expect("id present")).collect();
        Morphism::new(s.clone(), t.clone(), map)
    };
    let f = RPArrow::new(by_ids(&z, &x, &[a])?, by_ids(&x, &z, &[a, a])?)?;
    let g = RPArrow::new(by_ids(&z, &y, &[a])?, by_ids(&y, &z, &[a, a])?)?;
    let h = RPArrow::new(by_ids(&x, &w, &[a, b])?, by_ids(&w, &x, &[a, b, a])?)?;
    let k = RPArrow::new(by_ids(&y, &w, &[a, c])?, by_ids(&w, &y, &[a, c, c])?)?;
    let h2 = RPArrow::new(by_ids(&x, &w, &[a, b])?, by_ids(&w, &x, &[a, b, b])?)?;
    let report = verify_proper(&f, &g, &h, &k)?;
    let variant = verify_proper(&f, &g, &h2, &k)?;
    let rk = Retractive::over_sets();
    let proper = proper_amalgamate(&rk, &f, &g, 3)?;
    let proper_report = verify_proper(&f, &g, &proper.0, &proper.1)?;
    Ok(Counterexample {
        f,
        g,
        h,
        k,
        report,
        variant,
        proper,
        proper_report,
    })
}

/// Retractions for every bond of `x`, coherent in the sense
/// `r(ξ,η) ∘ r(η,ρ) = r(ξ,ρ)`. Pairs are filled in lexicographic order
/// `(0,1), (0,2), …, (1,2), …`, backtracking on conflicts. Returns the
/// lifted sequence and the number of backtracks.
pub fn lift_sequence(rk: &Retractive, x: &InductiveSequence<Concrete>) -> Result<(InductiveSequence<Retractive>, usize)> {
    let n = x.len();
    let mut pairs = Vec::new();
    for xi in 0..n {
        for eta in xi + 1..n {
            pairs.push((xi, eta));
        }
    }
    let mut cands = Vec::new();
    for &(xi, eta) in &pairs {
        let e = x.bond(xi, eta)?;
        if !rk.embeddings().is_arrow(e) {
            return Err(Error::PreconditionFailed(format!("bond ({xi}, {eta}) is not an embedding")));
        }
        let rs = rk.retractions(e)?;
        if rs.is_empty() {
            return Err(Error::PreconditionFailed(format!("bond ({xi}, {eta}) has no retraction")));
        }
        cands.push(rs);
    }
    let idx = |xi: usize, eta: usize| pairs.iter().position(|&p| p == (xi, eta)).expect("pair");
    let mut choice: Vec<Option<usize>> = vec![None; pairs.len()];
    let mut backtracks = 0;
    let mut last_conflict = (0, 0, 0);
    let mut pos = 0;
    let mut next = 0;
    while pos < pairs.len() {
        let (xi, eta) = pairs[pos];
        let mut placed = false;
        for c in next..cands[pos].len() {
            let r = &cands[pos][c];
            let mut ok = true;
            // every triple whose three pairs are now filled
            for p in 0..n {
                let tri = if p < xi {
                    Some((p, xi, eta))
                } else if p > xi && p < eta {
                    Some((xi, p, eta))
                } else if p > eta {
                    Some((xi, eta, p))
                } else {
                    None
                };
                let Some((s, t, u)) = tri else { continue };
                let get = |a: usize, b: usize| -> Option<&Morphism> {
                    if (a, b) == (xi, eta) {
                        Some(r)
                    } else {
                        choice[idx(a, b)].map(|c| &cands[idx(a, b)][c])
                    }
                };
                if let (Some(st), Some(tu), Some(su)) = (get(s, t), get(t, u), get(s, u)) {
                    if st.after(tu)? != *su {
                        ok = false;
                        last_conflict = (s, t, u);
                        break;
                    }
                }
            }
            if ok {
                choice[pos] = Some(c);
                placed = true;
                break;
            }
        }
        if placed {
            pos += 1;
            next = 0;
        } else {
            choice[pos] = None;
            if pos == 0 {
                let (s, t, u) = last_conflict;
                return Err(Error::NoCoherentRetractions(s, t, u));
            }
            backtracks += 1;
            pos -= 1;
            next = choice[pos].take().expect("filled") + 1;
        }
    }
    let mut table = Vec::new();
    for xi in 0..n {
        let mut row = vec![RPArrow::identity(x.object(xi))];
        for eta in xi + 1..n {
            let i = idx(xi, eta);
            let r = cands[i][choice[i].expect("filled")].clone();
            row.push(RPArrow::new(x.bond(xi, eta)?.clone(), r)?);
        }
        table.push(row);
    }
    Ok((InductiveSequence::from_table(x.objects().to_vec(), table)?, backtracks))
}

fn random_structure<R: Rng>(kind: Kind, rng: &mut R) -> Arc<FinStructure> {
    let n = rng.random_range(1..=3);
    match kind {
        Kind::Graph => {
            let mut g = Graph::empty(n);
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(0.5) {
                        g.set_edge(i, j, true);
                    }
                }
            }
            Arc::new(FinStructure::graph(g))
        }
        _ => Arc::new(FinStructure::set(n)),
    }
}

/// A random arrow of `R(K)` out of `z`: one or two new elements, each
/// retracted onto the image of some existing element. A new graph vertex
/// copies part of the neighbourhood of that element, so the retraction
/// stays a homomorphism.
pub fn random_rp_arrow<R: Rng>(rk: &Retractive, z: &Arc<FinStructure>, rng: &mut R) -> Result<RPArrow> {
    let mut cur = z.clone();
    let mut r: Vec<usize> = (0..z.size()).collect();
    for _ in 0..rng.random_range(1..=2) {
        let t = rng.random_range(0..cur.size());
        let mut ids = cur.ids().to_vec();
        ids.push(cur.fresh_id());
        let payload = match cur.payload() {
            Payload::Graph(g) => {
                let nbrs: Vec<usize> = (0..g.len()).filter(|&u| g.adjacent(t, u) && rng.random_bool(0.5)).collect();
                Payload::Graph(g.extended(&nbrs))
            }
            _ => Payload::Set,
        };
        cur = Arc::new(FinStructure::new(ids, payload)?);
        r.push(r[t]);
    }
    let e = Morphism::new(z.clone(), cur.clone(), (0..z.size()).collect())?;
    let r = Morphism::new(cur, z.clone(), r)?;
    rk.checked(RPArrow::new(e, r)?)
}

/// A random span `f: Z → X`, `g: Z → Y` of retractive pairs.
pub fn random_rp_span<R: Rng>(rk: &Retractive, rng: &mut R) -> Result<(RPArrow, RPArrow)> {
    let z = random_structure(rk.base().kind(), rng);
    Ok((random_rp_arrow(rk, &z, rng)?, random_rp_arrow(rk, &z, rng)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::properties::check_category_laws;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set_arrow(src: &[u32], tgt: &[u32], e: &[u32], r: &[u32]) -> RPArrow {
        let s = Arc::new(FinStructure::new(src.to_vec(), Payload::Set).unwrap());
        let t = Arc::new(FinStructure::new(tgt.to_vec(), Payload::Set).unwrap());
        let em = e.iter().map(|&i| t.position(i).unwrap()).collect();
        let rm = r.iter().map(|&i| s.position(i).unwrap()).collect();
        RPArrow::new(Morphism::new(s.clone(), t.clone(), em).unwrap(), Morphism::new(t, s, rm).unwrap()).unwrap()
    }

    #[test]
    fn composite_collapses_in_two_steps() {
        let f = set_arrow(&[0], &[0, 1], &[0], &[0, 0]);
        let g = set_arrow(&[0, 1], &[0, 1, 2], &[0, 1], &[0, 1, 1]);
        let gf = rp_compose(&g, &f).unwrap();
        assert_eq!(gf.r().map(), &[0, 0, 0]);
        assert_eq!(rp_compose(&RPArrow::identity(f.cod()), &f).unwrap(), f);
        assert!(rp_compose(&f, &g).is_err());
    }

    #[test]
    fn rejects_non_retractions() {
        let s = Arc::new(FinStructure::set(2));
        let swap = Morphism::new(s.clone(), s.clone(), vec![1, 0]).unwrap();
        let id = Morphism::identity(&s);
        assert!(RPArrow::new(id.clone(), swap.clone()).is_err());
        assert!(RPArrow::new(swap.clone(), swap).is_ok());
        let t = Arc::new(FinStructure::set(1));
        let c = Morphism::new(s.clone(), t.clone(), vec![0, 0]).unwrap();
        assert!(matches!(RPArrow::new(c.clone(), c), Err(Error::MismatchedEndpoints(_))));
    }

    #[test]
    fn laws_hold_for_pairs() {
        assert!(check_category_laws(&Retractive::over_sets(), 3).unwrap().holds());
        assert!(check_category_laws(&Retractive::over_graphs(), 2).unwrap().holds());
    }

    #[test]
    fn counterexample_values() {
        let c = sets_counterexample().unwrap();
        assert!(c.report.commutes());
        assert_eq!(c.report.diagrams[2].witness, Some((1, 0, 2)));
        assert!(c.report.diagrams[3].holds);
        assert!(!c.variant.diagrams[3].holds);
        assert!(c.proper_report.holds());
        let (h, k) = &c.proper;
        assert_eq!(h.cod().ids(), &[0, 1, 2]);
        // r(h): c ↦ a, r(k): b ↦ a
        assert_eq!(h.r().map(), &[0, 1, 0]);
        assert_eq!(k.r().map(), &[0, 0, 1]);
    }

    #[test]
    fn identity_span_is_proper() {
        let rk = Retractive::over_graphs();
        let z = Arc::new(FinStructure::graph(Graph::from_edges(2, &[(0, 1)]).unwrap()));
        let id = RPArrow::identity(&z);
        let (h, k) = proper_amalgamate(&rk, &id, &id, 2).unwrap();
        assert!(h.e().is_identity() && k.e().is_identity());
    }

    #[test]
    fn random_graph_spans_amalgamate_properly() {
        let rk = Retractive::over_graphs();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let (f, g) = random_rp_span(&rk, &mut rng).unwrap();
            let (h, k) = proper_amalgamate(&rk, &f, &g, 3).unwrap();
            assert!(verify_proper(&f, &g, &h, &k).unwrap().holds());
        }
    }

    #[test]
    fn lifting_needs_backtracking() {
        let cat = Concrete::fingraph();
        let g0 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let g1 = g0.extended(&[2]);
        let g2 = g1.extended(&[3]);
        let obs: Vec<_> = [g0, g1, g2].into_iter().map(|g| Arc::new(FinStructure::graph(g))).collect();
        let gens = obs
            .windows(2)
            .map(|w| Morphism::new(w[0].clone(), w[1].clone(), (0..w[0].size()).collect()).unwrap())
            .collect();
        let seq = InductiveSequence::from_generators(&cat, obs, gens).unwrap();
        let (lifted, backtracks) = lift_sequence(&Retractive::over_graphs(), &seq).unwrap();
        assert!(backtracks > 0);
        let r01 = lifted.bond(0, 1).unwrap().r().clone();
        let r12 = lifted.bond(1, 2).unwrap().r().clone();
        assert_eq!(r01.after(&r12).unwrap(), *lifted.bond(0, 2).unwrap().r());
        // the first retraction of the long bond sends 4 to 0, which no
        // choice of r(1,2) matches
        assert_eq!(lifted.bond(0, 2).unwrap().r().map(), &[0, 1, 2, 1, 2]);
    }

    #[test]
    fn short_lift_takes_first_retraction() {
        let cat = Concrete::finset();
        let a = Arc::new(FinStructure::set(1));
        let b = Arc::new(FinStructure::set(2));
        let seq = InductiveSequence::from_generators(&cat, vec![a.clone(), b.clone()], vec![Morphism::new(a, b, vec![0]).unwrap()]).unwrap();
        let (lifted, backtracks) = lift_sequence(&Retractive::over_sets(), &seq).unwrap();
        assert_eq!(backtracks, 0);
        assert_eq!(lifted.bond(0, 1).unwrap().r().map(), &[0, 0]);
    }
}
