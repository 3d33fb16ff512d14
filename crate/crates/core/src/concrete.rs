//! Built-in concrete categories: finite sets, graphs, linear orders and
//! binary trees, with embeddings or with all structure-preserving maps.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::category::Category;
use crate::error::{Error, Result};
use crate::morphism::Morphism;
use crate::structure::{FinStructure, Graph, Kind, Payload};
use crate::trees::{self, BinTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArrowClass {
    /// Injective maps that preserve and reflect the structure (for trees:
    /// closed initial-segment embeddings).
    Embeddings,
    /// Maps preserving the structure: all functions for sets, edge
    /// preserving maps for graphs, monotone maps for orders.
    Homomorphisms,
}

pub const DEFAULT_HOM_LIMIT: usize = 2_000_000;

pub struct Concrete {
    kind: Kind,
    class: ArrowClass,
    name: &'static str,
    limit: usize,
    cache: Mutex<Vec<Vec<Arc<FinStructure>>>>,
}

pub const CATEGORY_NAMES: &[&str] = &["finset", "finset-maps", "fingraph", "fingraph-hom", "finlinord", "t2"];

impl Concrete {
    pub fn new(kind: Kind, class: ArrowClass, name: &'static str) -> Result<Self> {
        let ok = match kind {
            Kind::Space => false,
            Kind::Tree => class == ArrowClass::Embeddings,
            _ => true,
        };
        if !ok {
            return Err(Error::Unsupported(format!("{kind:?} with {class:?}")));
        }
        Ok(Concrete {
            kind,
            class,
            name,
            limit: DEFAULT_HOM_LIMIT,
            cache: Mutex::new(Vec::new()),
        })
    }

    pub fn finset() -> Self {
        Concrete::new(Kind::Set, ArrowClass::Embeddings, "finset").expect("supported")
    }
    pub fn finset_maps() -> Self {
        Concrete::new(Kind::Set, ArrowClass::Homomorphisms, "finset-maps").expect("supported")
    }
    pub fn fingraph() -> Self {
        Concrete::new(Kind::Graph, ArrowClass::Embeddings, "fingraph").expect("supported")
    }
    pub fn fingraph_hom() -> Self {
        Concrete::new(Kind::Graph, ArrowClass::Homomorphisms, "fingraph-hom").expect("supported")
    }
    pub fn finlinord() -> Self {
        Concrete::new(Kind::LinOrder, ArrowClass::Embeddings, "finlinord").expect("supported")
    }
    pub fn t2() -> Self {
        Concrete::new(Kind::Tree, ArrowClass::Embeddings, "t2").expect("supported")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "finset" => Concrete::finset(),
            "finset-maps" => Concrete::finset_maps(),
            "fingraph" => Concrete::fingraph(),
            "fingraph-hom" => Concrete::fingraph_hom(),
            "finlinord" => Concrete::finlinord(),
            "t2" => Concrete::t2(),
            _ => return None,
        })
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn class(&self) -> ArrowClass {
        self.class
    }

    fn injective(&self) -> bool {
        self.class == ArrowClass::Embeddings
    }

    /// Whether `f` is an arrow of this category.
    pub fn is_arrow(&self, f: &Morphism) -> bool {
        let (a, b) = (f.source(), f.target());
        if a.kind() != self.kind || b.kind() != self.kind {
            return false;
        }
        if self.kind == Kind::Tree {
            return trees::is_t2_arrow(f);
        }
        if self.injective() && !f.is_injective() {
            return false;
        }
        let n = a.size();
        (0..n).all(|x| (0..x).all(|y| self.compatible(a, b, x, f.apply(x), y, f.apply(y))))
    }

    /// Pairwise condition for `x ↦ t`, `y ↦ s`.
    #[inline]
    fn compatible(&self, a: &FinStructure, b: &FinStructure, x: usize, t: usize, y: usize, s: usize) -> bool {
        match (a.payload(), b.payload()) {
            (Payload::Graph(ga), Payload::Graph(gb)) => {
                let e = ga.adjacent(x, y);
                match self.class {
                    ArrowClass::Embeddings => e == gb.adjacent(t, s),
                    ArrowClass::Homomorphisms => !e || gb.adjacent(t, s),
                }
            }
            (Payload::LinOrder(ra), Payload::LinOrder(rb)) => {
                let lt = ra[x] < ra[y];
                match self.class {
                    ArrowClass::Embeddings => lt == (rb[t] < rb[s]),
                    ArrowClass::Homomorphisms => {
                        if lt {
                            rb[t] <= rb[s]
                        } else {
                            rb[s] <= rb[t]
                        }
                    }
                }
            }
            _ => true,
        }
    }

    /// Backtracking over maps `a → b`; `allowed[x]` restricts the image of
    /// `x`. `visit` returns false to stop.
    fn search(
        &self,
        a: &Arc<FinStructure>,
        b: &Arc<FinStructure>,
        allowed: &[Option<Vec<usize>>],
        visit: &mut dyn FnMut(Vec<usize>) -> bool,
    ) -> Result<()> {
        if a.kind() != self.kind || b.kind() != self.kind {
            return Err(Error::MismatchedEndpoints(format!("objects are not in {}", self.name)));
        }
        let n = a.size();
        let m = b.size();
        if self.injective() && n > m {
            return Ok(());
        }
        let order: Vec<usize> = match a.as_tree() {
            Some(t) => t.top_down(),
            None => (0..n).collect(),
        };
        let mut st = SearchState {
            map: vec![usize::MAX; n],
            used: vec![false; m],
            stop: false,
        };
        self.rec(a, b, &order, 0, allowed, &mut st, visit);
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        &self,
        a: &Arc<FinStructure>,
        b: &Arc<FinStructure>,
        order: &[usize],
        k: usize,
        allowed: &[Option<Vec<usize>>],
        st: &mut SearchState,
        visit: &mut dyn FnMut(Vec<usize>) -> bool,
    ) {
        if st.stop {
            return;
        }
        if k == order.len() {
            if self.kind == Kind::Tree {
                let f = Morphism::new_unchecked(a.clone(), b.clone(), st.map.clone());
                if !trees::is_t2_arrow(&f) {
                    return;
                }
            }
            if !visit(st.map.clone()) {
                st.stop = true;
            }
            return;
        }
        let x = order[k];
        let cands: Vec<usize> = match (a.as_tree(), b.as_tree()) {
            (Some(ta), Some(tb)) => match ta.parent(x) {
                None => vec![tb.root()],
                Some(p) => tb.children(st.map[p]).to_vec(),
            },
            _ => (0..b.size()).collect(),
        };
        for t in cands {
            if let Some(Some(list)) = allowed.get(x) {
                if !list.contains(&t) {
                    continue;
                }
            }
            if (self.injective() || self.kind == Kind::Tree) && st.used[t] {
                continue;
            }
            if let (Some(ta), Some(tb)) = (a.as_tree(), b.as_tree()) {
                if ta.level(x) != tb.level(t) {
                    continue;
                }
            }
            let ok = order[..k]
                .iter()
                .all(|&y| self.compatible(a, b, x, t, y, st.map[y]));
            if !ok {
                continue;
            }
            st.map[x] = t;
            if self.kind == Kind::LinOrder && self.injective() && !order_has_room(a, b, &st.map) {
                st.map[x] = usize::MAX;
                continue;
            }
            st.used[t] = true;
            self.rec(a, b, order, k + 1, allowed, st, visit);
            st.used[t] = false;
            st.map[x] = usize::MAX;
            if st.stop {
                return;
            }
        }
    }

    fn collect(&self, a: &Arc<FinStructure>, b: &Arc<FinStructure>, allowed: &[Option<Vec<usize>>]) -> Result<Vec<Morphism>> {
        let mut maps = Vec::new();
        let mut over = false;
        let limit = self.limit;
        self.search(a, b, allowed, &mut |m| {
            if maps.len() >= limit {
                over = true;
                return false;
            }
            maps.push(m);
            true
        })?;
        if over {
            return Err(Error::SizeLimitExceeded { limit });
        }
        maps.sort();
        Ok(maps
            .into_iter()
            .map(|m| Morphism::new_unchecked(a.clone(), b.clone(), m))
            .collect())
    }

    fn first(&self, a: &Arc<FinStructure>, b: &Arc<FinStructure>, allowed: &[Option<Vec<usize>>]) -> Option<Morphism> {
        let mut found = None;
        self.search(a, b, allowed, &mut |m| {
            found = Some(m);
            false
        })
        .ok()?;
        found.map(|m| Morphism::new_unchecked(a.clone(), b.clone(), m))
    }

    fn after_constraints(p: &Morphism, q: &Morphism) -> Option<Vec<Option<Vec<usize>>>> {
        let mut allowed: Vec<Option<Vec<usize>>> = vec![None; p.target().size()];
        for i in 0..p.source().size() {
            let (x, t) = (p.apply(i), q.apply(i));
            match &allowed[x] {
                Some(v) if v[0] != t => return None,
                _ => allowed[x] = Some(vec![t]),
            }
        }
        Some(allowed)
    }

    fn before_constraints(p: &Morphism, q: &Morphism) -> Vec<Option<Vec<usize>>> {
        (0..q.source().size())
            .map(|i| {
                let want = q.apply(i);
                Some((0..p.source().size()).filter(|&j| p.apply(j) == want).collect())
            })
            .collect()
    }

    fn check_span(f: &Morphism, g: &Morphism) -> Result<()> {
        if f.source() != g.source() {
            return Err(Error::MismatchedEndpoints("span legs have different domains".into()));
        }
        Ok(())
    }

    /// Pushout-style gluing of `b` and `c` along `a`: the quotient of the
    /// disjoint union by `f(i) ~ g(i)`.
    fn glue(&self, f: &Morphism, g: &Morphism) -> Option<(Morphism, Morphism)> {
        let (b, c) = (f.target(), g.target());
        let (nb, nc) = (b.size(), c.size());
        let mut uf: Vec<usize> = (0..nb + nc).collect();
        fn find(uf: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while uf[r] != r {
                r = uf[r];
            }
            let mut y = x;
            while uf[y] != r {
                let next = uf[y];
                uf[y] = r;
                y = next;
            }
            r
        }
        for i in 0..f.source().size() {
            let (x, y) = (find(&mut uf, f.apply(i)), find(&mut uf, nb + g.apply(i)));
            if x != y {
                let (lo, hi) = (x.min(y), x.max(y));
                uf[hi] = lo;
            }
        }
        let mut class_of = vec![usize::MAX; nb + nc];
        let mut reps: Vec<usize> = Vec::new();
        for e in 0..nb + nc {
            let r = find(&mut uf, e);
            if class_of[r] == usize::MAX {
                class_of[r] = reps.len();
                reps.push(r);
            }
            class_of[e] = class_of[r];
        }
        let nd = reps.len();
        let mut fresh = b.fresh_id();
        let ids: Vec<u32> = reps
            .iter()
            .map(|&r| {
                if r < nb {
                    b.ids()[r]
                } else {
                    fresh += 1;
                    fresh - 1
                }
            })
            .collect();
        let fmap: Vec<usize> = (0..nb).map(|e| class_of[e]).collect();
        let gmap: Vec<usize> = (0..nc).map(|e| class_of[nb + e]).collect();
        let payload = match (b.payload(), c.payload()) {
            (Payload::Set, Payload::Set) => Payload::Set,
            (Payload::Graph(gb), Payload::Graph(gc)) => {
                let mut gd = Graph::empty(nd);
                for (x, y) in gb.edges() {
                    if fmap[x] == fmap[y] {
                        return None;
                    }
                    gd.set_edge(fmap[x], fmap[y], true);
                }
                for (x, y) in gc.edges() {
                    if gmap[x] == gmap[y] {
                        return None;
                    }
                    gd.set_edge(gmap[x], gmap[y], true);
                }
                Payload::Graph(gd)
            }
            (Payload::LinOrder(_), Payload::LinOrder(_)) => {
                if !f.is_injective() || !g.is_injective() {
                    return None;
                }
                let seq = merge_orders(f, g);
                let mut ranks = vec![0; nd];
                for (k, (side, e)) in seq.iter().enumerate() {
                    let cls = if *side == 0 { fmap[*e] } else { gmap[*e] };
                    ranks[cls] = k;
                }
                if seq.len() != nd {
                    return None;
                }
                Payload::LinOrder(ranks)
            }
            _ => return None,
        };
        let d = Arc::new(FinStructure::new(ids, payload).ok()?);
        let fp = Morphism::new_unchecked(b.clone(), d.clone(), fmap);
        let gp = Morphism::new_unchecked(c.clone(), d, gmap);
        if self.is_arrow(&fp) && self.is_arrow(&gp) {
            Some((fp, gp))
        } else {
            None
        }
    }

    /// Canonical objects of exactly `n` elements.
    pub fn objects_of_size(&self, n: usize) -> Vec<Arc<FinStructure>> {
        if n == 0 {
            return Vec::new();
        }
        let mut cache = self.cache.lock().expect("cache lock");
        while cache.len() < n {
            let k = cache.len() + 1;
            let next = match self.kind {
                Kind::Set => vec![Arc::new(FinStructure::set(k))],
                Kind::LinOrder => vec![Arc::new(FinStructure::chain(k))],
                Kind::Graph => {
                    if k == 1 {
                        vec![Arc::new(FinStructure::graph(Graph::empty(1)))]
                    } else {
                        grow_graphs(&cache[k - 2])
                    }
                }
                Kind::Tree => {
                    if k == 1 {
                        vec![Arc::new(FinStructure::tree(BinTree::from_parents(vec![None]).expect("root")))]
                    } else {
                        grow_trees(&cache[k - 2])
                    }
                }
                Kind::Space => Vec::new(),
            };
            cache.push(next);
        }
        cache[n - 1].clone()
    }

    /// Canonical form of a structure of this category's kind.
    pub fn canonical(&self, s: &FinStructure) -> FinStructure {
        match s.payload() {
            Payload::Set => FinStructure::set(s.size()),
            Payload::LinOrder(_) => FinStructure::chain(s.size()),
            Payload::Graph(g) => FinStructure::graph(canonical_graph(g)),
            Payload::Tree(t) => FinStructure::tree(canonical_tree(t)),
            Payload::Space(_) => s.clone(),
        }
    }

    /// Number of one-point extensions of `ob` (saturating).
    pub fn extension_count(&self, ob: &FinStructure) -> u64 {
        match self.kind {
            Kind::Set => 1,
            Kind::LinOrder => ob.size() as u64 + 1,
            Kind::Graph => {
                if ob.size() >= 63 {
                    u64::MAX
                } else {
                    1u64 << ob.size()
                }
            }
            Kind::Tree => ob.as_tree().map_or(0, |t| (0..t.len()).filter(|&i| t.children(i).len() < 2).count() as u64),
            Kind::Space => 0,
        }
    }

    /// The `j`-th one-point extension of `ob`, as an inclusion.
    pub fn extension_nth(&self, ob: &Arc<FinStructure>, j: u64) -> Option<Morphism> {
        if j >= self.extension_count(ob) {
            return None;
        }
        match self.kind {
            Kind::Set => Some(self.extend_set(ob)),
            Kind::LinOrder => Some(extend_order(ob, j as usize)),
            Kind::Graph => {
                let nbrs: Vec<usize> = (0..ob.size().min(63)).filter(|&i| j >> i & 1 == 1).collect();
                Some(extend_graph(ob, &nbrs))
            }
            Kind::Tree => {
                let t = ob.as_tree()?;
                let open: Vec<usize> = (0..t.len()).filter(|&i| t.children(i).len() < 2).collect();
                extend_tree(ob, open[j as usize])
            }
            Kind::Space => None,
        }
    }

    /// A uniformly random one-point extension of `ob`.
    pub fn extension_random<R: Rng>(&self, ob: &Arc<FinStructure>, rng: &mut R) -> Option<Morphism> {
        match self.kind {
            Kind::Graph => {
                let nbrs: Vec<usize> = (0..ob.size()).filter(|_| rng.random_bool(0.5)).collect();
                Some(extend_graph(ob, &nbrs))
            }
            _ => {
                let n = self.extension_count(ob);
                if n == 0 {
                    return None;
                }
                self.extension_nth(ob, rng.random_range(0..n))
            }
        }
    }

    fn extend_set(&self, ob: &Arc<FinStructure>) -> Morphism {
        let mut ids = ob.ids().to_vec();
        ids.push(ob.fresh_id());
        let d = Arc::new(FinStructure::new(ids, Payload::Set).expect("fresh id"));
        Morphism::new_unchecked(ob.clone(), d, (0..ob.size()).collect())
    }
}

struct SearchState {
    map: Vec<usize>,
    used: Vec<bool>,
    stop: bool,
}

fn extend_graph(ob: &Arc<FinStructure>, nbrs: &[usize]) -> Morphism {
    let g = ob.as_graph().expect("graph").extended(nbrs);
    let mut ids = ob.ids().to_vec();
    ids.push(ob.fresh_id());
    let d = Arc::new(FinStructure::new(ids, Payload::Graph(g)).expect("fresh id"));
    Morphism::new_unchecked(ob.clone(), d, (0..ob.size()).collect())
}

/// New point placed in gap `j` (below the `j`-th least element, or on top).
fn extend_order(ob: &Arc<FinStructure>, j: usize) -> Morphism {
    let ranks = ob.as_order().expect("order");
    let mut new: Vec<usize> = ranks.iter().map(|&r| if r >= j { r + 1 } else { r }).collect();
    new.push(j);
    let mut ids = ob.ids().to_vec();
    ids.push(ob.fresh_id());
    let d = Arc::new(FinStructure::new(ids, Payload::LinOrder(new)).expect("fresh id"));
    Morphism::new_unchecked(ob.clone(), d, (0..ob.size()).collect())
}

fn extend_tree(ob: &Arc<FinStructure>, at: usize) -> Option<Morphism> {
    let t = ob.as_tree()?;
    let mut parents = t.parents().to_vec();
    parents.push(Some(at));
    let nt = BinTree::from_parents(parents).ok()?;
    let mut ids = ob.ids().to_vec();
    ids.push(ob.fresh_id());
    let d = Arc::new(FinStructure::new(ids, Payload::Tree(nt)).ok()?);
    Some(Morphism::new_unchecked(ob.clone(), d, (0..ob.size()).collect()))
}

/// Interleave the orders of `b` and `c` over the common part: inside each
/// gap of the image of `a`, the points of `b` come first.
fn merge_orders(f: &Morphism, g: &Morphism) -> Vec<(usize, usize)> {
    let (b, c) = (f.target(), g.target());
    let sb = b.order_sequence().expect("order");
    let sc = c.order_sequence().expect("order");
    let a = f.source();
    let sa = a.order_sequence().expect("order");
    let rb = b.as_order().expect("order");
    let rc = c.as_order().expect("order");
    let mut out = Vec::new();
    let (mut ib, mut ic) = (0, 0);
    for &x in &sa {
        let (tb, tc) = (rb[f.apply(x)], rc[g.apply(x)]);
        while ib < tb {
            out.push((0, sb[ib]));
            ib += 1;
        }
        while ic < tc {
            out.push((1, sc[ic]));
            ic += 1;
        }
        out.push((0, sb[ib]));
        ib += 1;
        ic += 1;
    }
    out.extend(sb[ib..].iter().map(|&e| (0, e)));
    out.extend(sc[ic..].iter().map(|&e| (1, e)));
    out
}

fn permutations_respecting(classes: &[Vec<usize>]) -> Vec<Vec<usize>> {
    // all orderings of vertices that list class 0 first, then class 1, ...
    let mut out = vec![Vec::new()];
    for cls in classes {
        let mut next = Vec::new();
        for prefix in &out {
            for perm in crate::category::injective_maps(cls.len(), cls.len()) {
                let mut p = prefix.clone();
                p.extend(perm.iter().map(|&i| cls[i]));
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn graph_code(g: &Graph, order: &[usize]) -> Vec<bool> {
    let n = order.len();
    let mut code = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            code.push(g.adjacent(order[i], order[j]));
        }
    }
    code
}

/// Whether a partial order embedding leaves enough target points in every
/// gap for the unassigned points.
fn order_has_room(a: &FinStructure, b: &FinStructure, map: &[usize]) -> bool {
    let (Some(ra), Some(rb)) = (a.as_order(), b.as_order()) else {
        return true;
    };
    let mut pairs: Vec<(usize, usize)> = (0..map.len())
        .filter(|&x| map[x] != usize::MAX)
        .map(|x| (ra[x], rb[map[x]]))
        .collect();
    pairs.sort_unstable();
    let (mut pa, mut pb) = (-1i64, -1i64);
    for &(qa, qb) in pairs.iter().chain(std::iter::once(&(a.size(), b.size()))) {
        if qa as i64 - pa > qb as i64 - pb {
            return false;
        }
        pa = qa as i64;
        pb = qb as i64;
    }
    true
}

/// Relabelled graph with lexicographically least adjacency code among
/// orderings sorted by decreasing degree.
pub fn canonical_graph(g: &Graph) -> Graph {
    let n = g.len();
    let mut degs: BTreeSet<usize> = BTreeSet::new();
    for i in 0..n {
        degs.insert(g.degree(i));
    }
    let classes: Vec<Vec<usize>> = degs
        .iter()
        .rev()
        .map(|&d| (0..n).filter(|&i| g.degree(i) == d).collect())
        .collect();
    let best = permutations_respecting(&classes)
        .into_iter()
        .min_by(|x, y| graph_code(g, x).cmp(&graph_code(g, y)))
        .unwrap_or_default();
    let mut out = Graph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if g.adjacent(best[i], best[j]) {
                out.set_edge(i, j, true);
            }
        }
    }
    out
}

fn grow_graphs(prev: &[Arc<FinStructure>]) -> Vec<Arc<FinStructure>> {
    let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
    let mut out = Vec::new();
    for s in prev {
        let g = s.as_graph().expect("graph");
        let n = g.len();
        for mask in 0..(1u64 << n) {
            let nbrs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let c = canonical_graph(&g.extended(&nbrs));
            let code = graph_code(&c, &(0..n + 1).collect::<Vec<_>>());
            if seen.insert(code) {
                out.push(c);
            }
        }
    }
    out.sort_by_key(|g| (g.edges().len(), graph_code(g, &(0..g.len()).collect::<Vec<_>>())));
    out.into_iter().map(|g| Arc::new(FinStructure::graph(g))).collect()
}

/// Relabel breadth-first with children ordered by shape code.
pub fn canonical_tree(t: &BinTree) -> BinTree {
    let mut order = vec![t.root()];
    let mut parent_pos: Vec<Option<usize>> = vec![None];
    let mut k = 0;
    while k < order.len() {
        let x = order[k];
        let mut ch = t.children(x).to_vec();
        ch.sort_by_key(|&c| trees::shape_code(t, c));
        for c in ch {
            order.push(c);
            parent_pos.push(Some(k));
        }
        k += 1;
    }
    let nt = BinTree::from_parents(parent_pos).expect("relabelled tree");
    let levels = order.iter().map(|&x| t.level(x)).collect();
    nt.with_levels(levels).expect("levels carried over")
}

fn grow_trees(prev: &[Arc<FinStructure>]) -> Vec<Arc<FinStructure>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in prev {
        let t = s.as_tree().expect("tree");
        for x in 0..t.len() {
            if t.children(x).len() < 2 {
                let mut parents = t.parents().to_vec();
                parents.push(Some(x));
                let c = canonical_tree(&BinTree::from_parents(parents).expect("tree"));
                if seen.insert(trees::shape_code(&c, c.root())) {
                    out.push(c);
                }
            }
        }
    }
    out.sort_by_key(|c| trees::shape_code(c, c.root()));
    out.into_iter().map(|t| Arc::new(FinStructure::tree(t))).collect()
}

impl Category for Concrete {
    type Ob = Arc<FinStructure>;
    type Arr = Morphism;

    fn name(&self) -> String {
        self.name.to_string()
    }

    fn size(&self, ob: &Self::Ob) -> usize {
        ob.size()
    }

    fn dom(&self, f: &Morphism) -> Self::Ob {
        f.source().clone()
    }

    fn cod(&self, f: &Morphism) -> Self::Ob {
        f.target().clone()
    }

    fn identity(&self, ob: &Self::Ob) -> Morphism {
        Morphism::identity(ob)
    }

    fn compose(&self, g: &Morphism, f: &Morphism) -> Result<Morphism> {
        g.after(f)
    }

    fn objects(&self, bound: usize) -> Vec<Self::Ob> {
        (1..=bound).flat_map(|n| self.objects_of_size(n)).collect()
    }

    fn hom(&self, a: &Self::Ob, b: &Self::Ob) -> Result<Vec<Morphism>> {
        self.collect(a, b, &[])
    }

    fn first_arrow(&self, a: &Self::Ob, b: &Self::Ob) -> Option<Morphism> {
        self.first(a, b, &[])
    }

    fn factor_after(&self, p: &Morphism, q: &Morphism) -> Result<Vec<Morphism>> {
        if p.source() != q.source() {
            return Err(Error::MismatchedEndpoints("factor_after needs a common domain".into()));
        }
        match Concrete::after_constraints(p, q) {
            None => Ok(Vec::new()),
            Some(allowed) => self.collect(p.target(), q.target(), &allowed),
        }
    }

    fn first_factor_after(&self, p: &Morphism, q: &Morphism) -> Option<Morphism> {
        if p.source() != q.source() {
            return None;
        }
        let allowed = Concrete::after_constraints(p, q)?;
        self.first(p.target(), q.target(), &allowed)
    }

    fn factor_before(&self, p: &Morphism, q: &Morphism) -> Result<Vec<Morphism>> {
        if p.target() != q.target() {
            return Err(Error::MismatchedEndpoints("factor_before needs a common codomain".into()));
        }
        self.collect(q.source(), p.source(), &Concrete::before_constraints(p, q))
    }

    fn amalgamate(&self, f: &Morphism, g: &Morphism) -> Option<(Morphism, Morphism)> {
        Concrete::check_span(f, g).ok()?;
        if let Some(gp) = self.first_factor_after(g, f) {
            return Some((Morphism::identity(f.target()), gp));
        }
        self.glue(f, g)
    }

    fn pushout_candidate(&self, f: &Morphism, g: &Morphism) -> Option<(Morphism, Morphism)> {
        Concrete::check_span(f, g).ok()?;
        self.glue(f, g)
    }

    fn joint_embed(&self, a: &Self::Ob, b: &Self::Ob) -> Option<(Morphism, Morphism)> {
        let (na, nb) = (a.size(), b.size());
        let mut ids = a.ids().to_vec();
        let base = a.fresh_id();
        ids.extend((0..nb as u32).map(|k| base + k));
        let payload = match (a.payload(), b.payload()) {
            (Payload::Set, Payload::Set) => Payload::Set,
            (Payload::Graph(ga), Payload::Graph(gb)) => {
                let mut g = Graph::empty(na + nb);
                for (x, y) in ga.edges() {
                    g.set_edge(x, y, true);
                }
                for (x, y) in gb.edges() {
                    g.set_edge(na + x, na + y, true);
                }
                Payload::Graph(g)
            }
            (Payload::LinOrder(ra), Payload::LinOrder(rb)) => {
                Payload::LinOrder(ra.iter().copied().chain(rb.iter().map(|r| r + na)).collect())
            }
            _ => return None,
        };
        let c = Arc::new(FinStructure::new(ids, payload).ok()?);
        Some((
            Morphism::new_unchecked(a.clone(), c.clone(), (0..na).collect()),
            Morphism::new_unchecked(b.clone(), c, (na..na + nb).collect()),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, e: &[(usize, usize)]) -> Arc<FinStructure> {
        Arc::new(FinStructure::graph(Graph::from_edges(n, e).unwrap()))
    }

    #[test]
    fn object_counts() {
        let c = Concrete::fingraph();
        let counts: Vec<usize> = (1..=5).map(|n| c.objects_of_size(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34]);
        let t = Concrete::t2();
        // rooted unordered trees with at most two children per node
        let counts: Vec<usize> = (1..=6).map(|n| t.objects_of_size(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 6, 11]);
        assert_eq!(Concrete::finset().objects(3).len(), 3);
    }

    #[test]
    fn hom_counts() {
        let c = Concrete::fingraph();
        let p3 = g(3, &[(0, 1), (1, 2)]);
        let k2 = g(2, &[(0, 1)]);
        assert_eq!(c.hom(&k2, &p3).unwrap().len(), 4);
        let h = Concrete::fingraph_hom();
        // homomorphisms P3 → K2: the middle vertex decides the rest
        assert_eq!(h.hom(&p3, &k2).unwrap().len(), 2);
        let s = Concrete::finset_maps();
        let two = Arc::new(FinStructure::set(2));
        let three = Arc::new(FinStructure::set(3));
        assert_eq!(s.hom(&three, &two).unwrap().len(), 8);
        assert_eq!(Concrete::finset().hom(&two, &three).unwrap().len(), 6);
        let o = Concrete::finlinord();
        let c2 = Arc::new(FinStructure::chain(2));
        let c4 = Arc::new(FinStructure::chain(4));
        assert_eq!(o.hom(&c2, &c4).unwrap().len(), 6);
    }

    #[test]
    fn hom_limit_is_enforced() {
        let s = Concrete::finset_maps().with_limit(10);
        let a = Arc::new(FinStructure::set(3));
        assert!(matches!(s.hom(&a, &a), Err(Error::SizeLimitExceeded { limit: 10 })));
    }

    #[test]
    fn factor_after_fixes_values() {
        let c = Concrete::finlinord();
        let one = Arc::new(FinStructure::chain(1));
        let c3 = Arc::new(FinStructure::chain(3));
        let p = Morphism::new(one.clone(), c3.clone(), vec![1]).unwrap();
        let q = Morphism::new(one, c3, vec![1]).unwrap();
        let hs = c.factor_after(&p, &q).unwrap();
        assert_eq!(hs.len(), 1);
        assert!(hs[0].is_identity());
    }

    #[test]
    fn free_amalgam_of_graphs() {
        let c = Concrete::fingraph();
        let k1 = g(1, &[]);
        let k2 = g(2, &[(0, 1)]);
        let f = Morphism::new(k1.clone(), k2.clone(), vec![0]).unwrap();
        let (fp, gp) = c.glue(&f, &f).unwrap();
        assert_eq!(fp.target().size(), 3);
        assert_eq!(fp.after(&f).unwrap(), gp.after(&f).unwrap());
        assert!(c.is_arrow(&fp) && c.is_arrow(&gp));
        // the reuse step finds the trivial cocone
        let (rp, _) = c.amalgamate(&f, &f).unwrap();
        assert!(rp.is_identity());
    }

    #[test]
    fn order_amalgam_interleaves_gaps() {
        let c = Concrete::finlinord();
        let one = Arc::new(FinStructure::chain(1));
        let up = extend_order(&one, 1);
        let down = extend_order(&one, 0);
        let (fp, gp) = c.glue(&up, &down).unwrap();
        assert_eq!(fp.target().size(), 3);
        assert!(c.is_arrow(&fp) && c.is_arrow(&gp));
    }

    #[test]
    fn canonical_forms_identify_isomorphs() {
        let a = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let b = Graph::from_edges(3, &[(1, 2)]).unwrap();
        assert_eq!(canonical_graph(&a), canonical_graph(&b));
    }

    #[test]
    fn tree_arrows_send_root_to_root() {
        let c = Concrete::t2();
        let t1 = c.objects_of_size(1)[0].clone();
        let cherry = c.objects_of_size(3).into_iter().find(|t| t.as_tree().unwrap().children(0).len() == 2).unwrap();
        let hs = c.hom(&t1, &cherry).unwrap();
        // the root alone is a closed initial segment
        assert_eq!(hs.len(), 1);
    }
}
