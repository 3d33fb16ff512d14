//! The category abstraction, opposites, and small hand-built categories.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::morphism::{same_object, Morphism};
use crate::structure::FinStructure;

/// A category whose objects can be enumerated up to a size bound.
///
/// Hom-sets are returned in a deterministic canonical order.
pub trait Category: Sync {
    type Ob: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync;
    type Arr: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync;

    fn name(&self) -> String;
    fn size(&self, ob: &Self::Ob) -> usize;
    fn dom(&self, f: &Self::Arr) -> Self::Ob;
    fn cod(&self, f: &Self::Arr) -> Self::Ob;
    fn identity(&self, ob: &Self::Ob) -> Self::Arr;
    /// `g ∘ f`.
    fn compose(&self, g: &Self::Arr, f: &Self::Arr) -> Result<Self::Arr>;
    /// Canonical representatives of the objects of size at most `bound`,
    /// ordered by size.
    fn objects(&self, bound: usize) -> Vec<Self::Ob>;
    fn hom(&self, a: &Self::Ob, b: &Self::Ob) -> Result<Vec<Self::Arr>>;

    fn first_arrow(&self, a: &Self::Ob, b: &Self::Ob) -> Option<Self::Arr> {
        self.hom(a, b).ok()?.into_iter().next()
    }

    /// All `h: cod(p) → cod(q)` with `h ∘ p = q`.
    fn factor_after(&self, p: &Self::Arr, q: &Self::Arr) -> Result<Vec<Self::Arr>> {
        let mut out = Vec::new();
        for h in self.hom(&self.cod(p), &self.cod(q))? {
            if self.compose(&h, p)? == *q {
                out.push(h);
            }
        }
        Ok(out)
    }

    fn first_factor_after(&self, p: &Self::Arr, q: &Self::Arr) -> Option<Self::Arr> {
        self.factor_after(p, q).ok()?.into_iter().next()
    }

    /// All `x: dom(q) → dom(p)` with `p ∘ x = q`.
    fn factor_before(&self, p: &Self::Arr, q: &Self::Arr) -> Result<Vec<Self::Arr>> {
        let mut out = Vec::new();
        for x in self.hom(&self.dom(q), &self.dom(p))? {
            if self.compose(p, &x)? == *q {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// A constructive cocone `(f', g')` with `f' ∘ f = g' ∘ g`, if the
    /// category knows one.
    fn amalgamate(&self, _f: &Self::Arr, _g: &Self::Arr) -> Option<(Self::Arr, Self::Arr)> {
        None
    }

    /// A constructive pushout candidate; verified by the caller.
    fn pushout_candidate(&self, f: &Self::Arr, g: &Self::Arr) -> Option<(Self::Arr, Self::Arr)> {
        self.amalgamate(f, g)
    }

    /// A constructive pair of arrows `a → c ← b`.
    fn joint_embed(&self, _a: &Self::Ob, _b: &Self::Ob) -> Option<(Self::Arr, Self::Arr)> {
        None
    }

    fn is_iso(&self, f: &Self::Arr) -> bool {
        let (a, b) = (self.dom(f), self.cod(f));
        self.factor_after(f, &self.identity(&a))
            .map(|gs| gs.into_iter().any(|g| self.compose(f, &g).map(|h| h == self.identity(&b)).unwrap_or(false)))
            .unwrap_or(false)
    }

    fn isomorphic(&self, a: &Self::Ob, b: &Self::Ob) -> bool {
        self.size(a) == self.size(b)
            && self
                .hom(a, b)
                .map(|h| h.iter().any(|f| self.is_iso(f)))
                .unwrap_or(false)
    }
}

/// Arrow of the opposite category.
#[derive(Clone, Debug, PartialEq)]
pub struct Op<A>(pub A);

impl<A: fmt::Display> fmt::Display for Op<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op({})", self.0)
    }
}

pub struct Opposite<C>(pub C);

impl<C: Category> Category for Opposite<C> {
    type Ob = C::Ob;
    type Arr = Op<C::Arr>;

    fn name(&self) -> String {
        format!("op({})", self.0.name())
    }
    fn size(&self, ob: &Self::Ob) -> usize {
        self.0.size(ob)
    }
    fn dom(&self, f: &Self::Arr) -> Self::Ob {
        self.0.cod(&f.0)
    }
    fn cod(&self, f: &Self::Arr) -> Self::Ob {
        self.0.dom(&f.0)
    }
    fn identity(&self, ob: &Self::Ob) -> Self::Arr {
        Op(self.0.identity(ob))
    }
    fn compose(&self, g: &Self::Arr, f: &Self::Arr) -> Result<Self::Arr> {
        Ok(Op(self.0.compose(&f.0, &g.0)?))
    }
    fn objects(&self, bound: usize) -> Vec<Self::Ob> {
        self.0.objects(bound)
    }
    fn hom(&self, a: &Self::Ob, b: &Self::Ob) -> Result<Vec<Self::Arr>> {
        Ok(self.0.hom(b, a)?.into_iter().map(Op).collect())
    }
    fn factor_after(&self, p: &Self::Arr, q: &Self::Arr) -> Result<Vec<Self::Arr>> {
        Ok(self.0.factor_before(&p.0, &q.0)?.into_iter().map(Op).collect())
    }
    fn factor_before(&self, p: &Self::Arr, q: &Self::Arr) -> Result<Vec<Self::Arr>> {
        Ok(self.0.factor_after(&p.0, &q.0)?.into_iter().map(Op).collect())
    }
}

/// A finite category of structures and maps, given by explicit lists.
#[derive(Clone, Debug)]
pub struct FiniteCategory {
    name: String,
    objects: Vec<Arc<FinStructure>>,
    arrows: Vec<Morphism>,
}

impl FiniteCategory {
    /// Identities are added automatically; the arrow list must be closed
    /// under composition.
    pub fn new(name: &str, objects: Vec<FinStructure>, arrows: Vec<(usize, usize, Vec<usize>)>) -> Result<Self> {
        let objects: Vec<Arc<FinStructure>> = objects.into_iter().map(Arc::new).collect();
        let mut list: Vec<Morphism> = objects.iter().map(Morphism::identity).collect();
        for (s, t, map) in arrows {
            let (Some(a), Some(b)) = (objects.get(s), objects.get(t)) else {
                return Err(Error::IndexOutOfRange(format!("object index in arrow {s} -> {t}")));
            };
            let m = Morphism::new(a.clone(), b.clone(), map)?;
            if !list.contains(&m) {
                list.push(m);
            }
        }
        let cat = FiniteCategory {
            name: name.to_string(),
            objects,
            arrows: list,
        };
        for f in &cat.arrows {
            for g in &cat.arrows {
                if same_object(f.target(), g.source()) && !cat.arrows.contains(&g.after(f)?) {
                    return Err(Error::InvalidStructure(format!("not closed under composition: {g} after {f}")));
                }
            }
        }
        Ok(cat)
    }

    /// Full subcategory of sets with all injections between the given sets.
    pub fn injections(name: &str, objects: Vec<FinStructure>) -> Result<Self> {
        let mut arrows = Vec::new();
        for (s, a) in objects.iter().enumerate() {
            for (t, b) in objects.iter().enumerate() {
                for map in injective_maps(a.size(), b.size()) {
                    arrows.push((s, t, map));
                }
            }
        }
        FiniteCategory::new(name, objects, arrows)
    }

    pub fn all_objects(&self) -> &[Arc<FinStructure>] {
        &self.objects
    }

    pub fn all_arrows(&self) -> &[Morphism] {
        &self.arrows
    }

    /// Objects `a = {0}`, `b = {1,2}`, `c = {3,4,5}` with arrows `a → b`
    /// and `a → c` only: the span has no cocone.
    pub fn no_cocone() -> Self {
        let objs = vec![
            FinStructure::set(1),
            FinStructure::set(2).with_ids(vec![1, 2]).expect("ids"),
            FinStructure::set(3).with_ids(vec![3, 4, 5]).expect("ids"),
        ];
        FiniteCategory::new("no-cocone", objs, vec![(0, 1, vec![0]), (0, 2, vec![0])]).expect("valid")
    }

    /// Two one-object categories side by side.
    pub fn two_points() -> Self {
        let objs = vec![
            FinStructure::set(1),
            FinStructure::set(1).with_ids(vec![1]).expect("ids"),
        ];
        FiniteCategory::new("two-points", objs, vec![]).expect("valid")
    }

    pub fn single_point() -> Self {
        FiniteCategory::new("point", vec![FinStructure::set(1)], vec![]).expect("valid")
    }

    /// Injections among `{0}`, `{1,2}`, `{3,4}`.
    pub fn two_fraisse_objects() -> Self {
        let objs = vec![
            FinStructure::set(1),
            FinStructure::set(2).with_ids(vec![1, 2]).expect("ids"),
            FinStructure::set(2).with_ids(vec![3, 4]).expect("ids"),
        ];
        FiniteCategory::injections("two-fraisse", objs).expect("valid")
    }
}

pub(crate) fn injective_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut used = vec![false; m];
    fn rec(n: usize, m: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for t in 0..m {
            if !used[t] {
                used[t] = true;
                cur.push(t);
                rec(n, m, cur, used, out);
                cur.pop();
                used[t] = false;
            }
        }
    }
    rec(n, m, &mut cur, &mut used, &mut out);
    out
}

impl Category for FiniteCategory {
    type Ob = Arc<FinStructure>;
    type Arr = Morphism;

    fn name(&self) -> String {
        self.name.clone()
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
        let mut v: Vec<_> = self.objects.iter().filter(|o| o.size() <= bound).cloned().collect();
        v.sort_by_key(|o| o.size());
        v
    }
    fn hom(&self, a: &Self::Ob, b: &Self::Ob) -> Result<Vec<Morphism>> {
        let mut v: Vec<Morphism> = self
            .arrows
            .iter()
            .filter(|f| same_object(f.source(), a) && same_object(f.target(), b))
            .cloned()
            .collect();
        v.sort_by(|x, y| x.map().cmp(y.map()));
        Ok(v)
    }
}
