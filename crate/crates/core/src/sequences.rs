//! Inductive sequences on finite prefixes, transformations between them,
//! and the bounded conditions (U), (A), (E).

use std::sync::Arc;

use crate::category::Category;
use crate::error::{Error, Result};
use crate::properties::{Report, Witness};

/// A finite prefix `u_0 → u_1 → … → u_{n-1}` with the full bond table.
pub struct InductiveSequence<C: Category> {
    objects: Vec<C::Ob>,
    /// `bonds[ξ][η - ξ]` is the bond `u_ξ → u_η` for `ξ ≤ η`.
    bonds: Vec<Vec<C::Arr>>,
}

impl<C: Category> Clone for InductiveSequence<C> {
    fn clone(&self) -> Self {
        InductiveSequence {
            objects: self.objects.clone(),
            bonds: self.bonds.clone(),
        }
    }
}

impl<C: Category> PartialEq for InductiveSequence<C> {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects && self.bonds == other.bonds
    }
}

impl<C: Category> std::fmt::Debug for InductiveSequence<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InductiveSequence").field("objects", &self.objects).finish_non_exhaustive()
    }
}

impl<C: Category> Clone for SeqTransformation<C> {
    fn clone(&self) -> Self {
        SeqTransformation {
            source: self.source.clone(),
            target: self.target.clone(),
            index_map: self.index_map.clone(),
            components: self.components.clone(),
        }
    }
}

impl<C: Category> std::fmt::Debug for SeqTransformation<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SeqTransformation")
            .field("index_map", &self.index_map)
            .field("components", &self.components)
            .finish_non_exhaustive()
    }
}

impl<C: Category> InductiveSequence<C> {
    /// Build from consecutive bonds `u_ξ → u_{ξ+1}`; longer bonds are
    /// composites.
    pub fn from_generators(cat: &C, objects: Vec<C::Ob>, gens: Vec<C::Arr>) -> Result<Self> {
        if objects.is_empty() {
            return Err(Error::PreconditionFailed("a sequence needs at least one object".into()));
        }
        if gens.len() + 1 != objects.len() {
            return Err(Error::IndexOutOfRange(format!(
                "{} objects need {} generator bonds, got {}",
                objects.len(),
                objects.len() - 1,
                gens.len()
            )));
        }
        for (k, g) in gens.iter().enumerate() {
            if cat.dom(g) != objects[k] || cat.cod(g) != objects[k + 1] {
                return Err(Error::MismatchedEndpoints(format!("generator bond {k} -> {}", k + 1)));
            }
        }
        let n = objects.len();
        let mut bonds = Vec::with_capacity(n);
        for (xi, ob) in objects.iter().enumerate() {
            let mut row = vec![cat.identity(ob)];
            for eta in xi + 1..n {
                let prev = row.last().expect("nonempty");
                row.push(cat.compose(&gens[eta - 1], prev)?);
            }
            bonds.push(row);
        }
        Ok(InductiveSequence { objects, bonds })
    }

    /// Build from an explicit table (`table[ξ][η - ξ]`), without checking
    /// functoriality; see [`validate_sequence`].
    pub fn from_table(objects: Vec<C::Ob>, table: Vec<Vec<C::Arr>>) -> Result<Self> {
        let n = objects.len();
        if table.len() != n || table.iter().enumerate().any(|(k, r)| r.len() != n - k) {
            return Err(Error::IndexOutOfRange("bond table has the wrong shape".into()));
        }
        Ok(InductiveSequence { objects, bonds: table })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn object(&self, xi: usize) -> &C::Ob {
        &self.objects[xi]
    }

    pub fn objects(&self) -> &[C::Ob] {
        &self.objects
    }

    pub fn last(&self) -> &C::Ob {
        self.objects.last().expect("nonempty")
    }

    pub fn bond(&self, xi: usize, eta: usize) -> Result<&C::Arr> {
        if xi > eta || eta >= self.len() {
            return Err(Error::IndexOutOfRange(format!("bond ({xi}, {eta}) in a prefix of length {}", self.len())));
        }
        Ok(&self.bonds[xi][eta - xi])
    }

    /// Replace one entry of the table (for tests of the validator).
    pub fn set_bond(&mut self, xi: usize, eta: usize, f: C::Arr) -> Result<()> {
        if xi > eta || eta >= self.len() {
            return Err(Error::IndexOutOfRange(format!("bond ({xi}, {eta})")));
        }
        self.bonds[xi][eta - xi] = f;
        Ok(())
    }

    pub fn truncate(&self, len: usize) -> Self {
        let len = len.min(self.len()).max(1);
        InductiveSequence {
            objects: self.objects[..len].to_vec(),
            bonds: self.bonds[..len].iter().enumerate().map(|(k, r)| r[..len - k].to_vec()).collect(),
        }
    }

    /// Subsequence at the increasing indices `s`.
    pub fn restrict(&self, s: &[usize]) -> Result<Self> {
        if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) || *s.last().expect("nonempty") >= self.len() {
            return Err(Error::IndexOutOfRange("restriction needs increasing indices inside the prefix".into()));
        }
        let objects = s.iter().map(|&i| self.objects[i].clone()).collect();
        let bonds = (0..s.len())
            .map(|a| (a..s.len()).map(|b| self.bonds[s[a]][s[b] - s[a]].clone()).collect())
            .collect();
        Ok(InductiveSequence { objects, bonds })
    }
}

fn same_seq<C: Category>(a: &Arc<InductiveSequence<C>>, b: &Arc<InductiveSequence<C>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// First triple `ξ ≤ η ≤ ρ` violating `u_η^ρ ∘ u_ξ^η = u_ξ^ρ`, or a
/// diagonal entry that is not an identity (reported as `(ξ, ξ, ξ)`).
pub fn validate_sequence<C: Category>(cat: &C, seq: &InductiveSequence<C>) -> std::result::Result<(), (usize, usize, usize)> {
    let n = seq.len();
    for xi in 0..n {
        if seq.bonds[xi][0] != cat.identity(&seq.objects[xi]) {
            return Err((xi, xi, xi));
        }
        for eta in xi..n {
            let f = &seq.bonds[xi][eta - xi];
            if cat.dom(f) != seq.objects[xi] || cat.cod(f) != seq.objects[eta] {
                return Err((xi, eta, eta));
            }
        }
    }
    for xi in 0..n {
        for eta in xi..n {
            for rho in eta..n {
                let lhs = cat.compose(&seq.bonds[eta][rho - eta], &seq.bonds[xi][eta - xi]);
                if lhs.as_ref() != Ok(&seq.bonds[xi][rho - xi]) {
                    return Err((xi, eta, rho));
                }
            }
        }
    }
    Ok(())
}

/// A natural transformation from a prefix of `source` into `target`:
/// `components[α]: source_α → target_{index_map[α]}` for `α < components.len()`.
pub struct SeqTransformation<C: Category> {
    pub source: Arc<InductiveSequence<C>>,
    pub target: Arc<InductiveSequence<C>>,
    pub index_map: Vec<usize>,
    pub components: Vec<C::Arr>,
}

impl<C: Category> SeqTransformation<C> {
    pub fn new(
        cat: &C,
        source: Arc<InductiveSequence<C>>,
        target: Arc<InductiveSequence<C>>,
        index_map: Vec<usize>,
        components: Vec<C::Arr>,
    ) -> Result<Self> {
        let t = SeqTransformation {
            source,
            target,
            index_map,
            components,
        };
        t.check(cat)?;
        Ok(t)
    }

    pub fn identity(cat: &C, seq: Arc<InductiveSequence<C>>, len: usize) -> Self {
        let len = len.min(seq.len());
        SeqTransformation {
            index_map: (0..len).collect(),
            components: (0..len).map(|a| cat.identity(seq.object(a))).collect(),
            target: seq.clone(),
            source: seq,
        }
    }

    /// Length of the source prefix on which the transformation is defined.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Shape, endpoints, monotone index map and naturality squares.
    pub fn check(&self, cat: &C) -> Result<()> {
        let n = self.components.len();
        if self.index_map.len() != n || n > self.source.len() {
            return Err(Error::IndexOutOfRange("transformation has the wrong length".into()));
        }
        if self.index_map.iter().any(|&i| i >= self.target.len()) {
            return Err(Error::IndexOutOfRange("index map leaves the target prefix".into()));
        }
        if self.index_map.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::PreconditionFailed("index map is not monotone".into()));
        }
        for a in 0..n {
            let c = &self.components[a];
            if cat.dom(c) != *self.source.object(a) || cat.cod(c) != *self.target.object(self.index_map[a]) {
                return Err(Error::MismatchedEndpoints(format!("component {a}")));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let lhs = cat.compose(self.target.bond(self.index_map[a], self.index_map[b])?, &self.components[a])?;
                let rhs = cat.compose(&self.components[b], self.source.bond(a, b)?)?;
                if lhs != rhs {
                    return Err(Error::PreconditionFailed(format!("naturality square ({a}, {b}) does not commute")));
                }
            }
        }
        Ok(())
    }
}

/// Equivalence of transformations with common source and target: for all
/// `α ≤ β` in the common domain, `φ(α) ≤ ψ(β)` forces
/// `v^{ψ(β)}_{φ(α)} ∘ F(α) = G(β) ∘ u^β_α`, and symmetrically.
pub fn transformations_equivalent<C: Category>(cat: &C, f: &SeqTransformation<C>, g: &SeqTransformation<C>) -> Result<bool> {
    if !same_seq(&f.source, &g.source) || !same_seq(&f.target, &g.target) {
        return Err(Error::MismatchedEndpoints("transformations between different sequences".into()));
    }
    let n = f.len().min(g.len());
    let one_way = |x: &SeqTransformation<C>, y: &SeqTransformation<C>| -> Result<bool> {
        for a in 0..n {
            for b in a..n {
                if x.index_map[a] <= y.index_map[b] {
                    let lhs = cat.compose(x.target.bond(x.index_map[a], y.index_map[b])?, &x.components[a])?;
                    let rhs = cat.compose(&y.components[b], x.source.bond(a, b)?)?;
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    };
    Ok(one_way(f, g)? && one_way(g, f)?)
}

/// `G ∘ F`, defined on the part of `F`'s domain that `G` covers.
pub fn compose_seq_arrows<C: Category>(cat: &C, g: &SeqTransformation<C>, f: &SeqTransformation<C>) -> Result<SeqTransformation<C>> {
    if !same_seq(&f.target, &g.source) {
        return Err(Error::MismatchedEndpoints("target of F is not the source of G".into()));
    }
    let mut index_map = Vec::new();
    let mut components = Vec::new();
    for a in 0..f.len() {
        let mid = f.index_map[a];
        if mid >= g.len() {
            break;
        }
        index_map.push(g.index_map[mid]);
        components.push(cat.compose(&g.components[mid], &f.components[a])?);
    }
    Ok(SeqTransformation {
        source: f.source.clone(),
        target: g.target.clone(),
        index_map,
        components,
    })
}

/// Representative with pointwise least index map: each component is pulled
/// back to the earliest target stage it factors through.
pub fn canonical_representative<C: Category>(cat: &C, f: &SeqTransformation<C>) -> Result<SeqTransformation<C>> {
    let mut index_map = Vec::new();
    let mut components = Vec::new();
    for a in 0..f.len() {
        let top = f.index_map[a];
        let lo = index_map.last().copied().unwrap_or(0);
        let mut chosen = None;
        for i in lo..=top {
            let bond = f.target.bond(i, top)?;
            if let Some(c) = cat.factor_before(bond, &f.components[a])?.into_iter().next() {
                chosen = Some((i, c));
                break;
            }
        }
        let (i, c) = chosen.expect("the component itself factors at its own stage");
        index_map.push(i);
        components.push(c);
    }
    let cand = SeqTransformation {
        source: f.source.clone(),
        target: f.target.clone(),
        index_map,
        components,
    };
    if cand.check(cat).is_ok() && transformations_equivalent(cat, &cand, f)? {
        Ok(cand)
    } else {
        Ok(f.clone())
    }
}

fn sized_stages<C: Category>(cat: &C, seq: &InductiveSequence<C>, bound: usize) -> Vec<usize> {
    (0..seq.len()).filter(|&k| cat.size(seq.object(k)) <= bound).collect()
}

/// (U): every object of size at most `bound` maps into some stage.
pub fn check_u<C: Category>(cat: &C, seq: &InductiveSequence<C>, bound: usize) -> Report<C> {
    let mut rep = Report::<C>::new("U", cat.name(), bound);
    for x in cat.objects(bound) {
        rep.checked += 1;
        if cat.first_arrow(&x, seq.last()).is_none() {
            return rep.fail(Witness::Object(x));
        }
    }
    rep
}

/// Least `η ≥ ξ` and `g` with `g ∘ f = u_ξ^η`, for `f: u_ξ → y`.
pub fn absorb<C: Category>(cat: &C, seq: &InductiveSequence<C>, xi: usize, f: &C::Arr) -> Option<(usize, C::Arr)> {
    // absorption at η persists to every later stage, so test the last one first
    let last = seq.len() - 1;
    cat.first_factor_after(f, seq.bond(xi, last).ok()?)?;
    (xi..=last).find_map(|eta| cat.first_factor_after(f, seq.bond(xi, eta).ok()?).map(|g| (eta, g)))
}

/// (A): every `f: u_ξ → y` with `u_ξ` and `y` of size at most `bound` is
/// absorbed by a later bond.
pub fn check_a<C: Category>(cat: &C, seq: &InductiveSequence<C>, bound: usize) -> Result<Report<C>> {
    let mut rep = Report::<C>::new("A", cat.name(), bound);
    let obs = cat.objects(bound);
    let last = seq.len() - 1;
    for xi in sized_stages(cat, seq, bound) {
        let to_last = seq.bond(xi, last)?;
        for y in &obs {
            for f in cat.hom(seq.object(xi), y)? {
                rep.checked += 1;
                if cat.first_factor_after(&f, to_last).is_none() {
                    return Ok(rep.fail(Witness::StageArrow { stage: xi, arrow: f }));
                }
            }
        }
    }
    if rep.checked == 0 {
        rep = rep.note("no stage is within the bound");
    }
    Ok(rep)
}

/// (E): for `f: a → b` and `g: a → u_α` with `a`, `b`, `u_α` of size at
/// most `bound` there is `g': b → u_β` with `g' ∘ f = u_α^β ∘ g`.
pub fn check_e<C: Category>(cat: &C, seq: &InductiveSequence<C>, bound: usize) -> Result<Report<C>> {
    let mut rep = Report::<C>::new("E", cat.name(), bound);
    let obs = cat.objects(bound);
    let last = seq.len() - 1;
    for alpha in sized_stages(cat, seq, bound) {
        let to_last = seq.bond(alpha, last)?;
        for a in &obs {
            let gs = cat.hom(a, seq.object(alpha))?;
            if gs.is_empty() {
                continue;
            }
            for b in &obs {
                for f in cat.hom(a, b)? {
                    for g in &gs {
                        rep.checked += 1;
                        let target = cat.compose(to_last, g)?;
                        if cat.first_factor_after(&f, &target).is_none() {
                            return Ok(rep.fail(Witness::StageSpan {
                                stage: alpha,
                                f,
                                g: g.clone(),
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// `u` receives every object of size at most `bound`, and every
/// `f: u → x` with `|x| ≤ bound` has a left inverse.
pub fn is_fraisse_object<C: Category>(cat: &C, u: &C::Ob, bound: usize) -> Result<Report<C>> {
    let mut rep = Report::<C>::new("fraisse-object", cat.name(), bound);
    for x in cat.objects(bound) {
        rep.checked += 1;
        if cat.first_arrow(&x, u).is_none() {
            return Ok(rep.note("not cofinal").fail(Witness::Object(x)));
        }
        for f in cat.hom(u, &x)? {
            rep.checked += 1;
            if cat.first_factor_after(&f, &cat.identity(u)).is_none() {
                return Ok(rep.note("arrow without a left inverse").fail(Witness::Arrow(f)));
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::FiniteCategory;
    use crate::concrete::Concrete;
    use crate::morphism::Morphism;
    use crate::structure::FinStructure;

    fn chain_seq(cat: &Concrete, sizes: &[usize]) -> InductiveSequence<Concrete> {
        let obs: Vec<Arc<FinStructure>> = sizes.iter().map(|&n| Arc::new(FinStructure::chain(n))).collect();
        let gens = obs
            .windows(2)
            .map(|w| Morphism::new(w[0].clone(), w[1].clone(), (0..w[0].size()).collect()).unwrap())
            .collect();
        InductiveSequence::from_generators(cat, obs, gens).unwrap()
    }

    #[test]
    fn generated_tables_are_functorial() {
        let cat = Concrete::finlinord();
        let seq = chain_seq(&cat, &[1, 2, 3, 4]);
        assert_eq!(validate_sequence(&cat, &seq), Ok(()));
        assert_eq!(seq.bond(0, 3).unwrap().map(), &[0]);
        assert!(seq.bond(2, 1).is_err());
    }

    #[test]
    fn tampered_bond_is_located() {
        let cat = Concrete::finlinord();
        let mut seq = chain_seq(&cat, &[1, 2, 3]);
        let bad = Morphism::new(seq.object(0).clone(), seq.object(2).clone(), vec![2]).unwrap();
        seq.set_bond(0, 2, bad).unwrap();
        assert_eq!(validate_sequence(&cat, &seq), Err((0, 1, 2)));
    }

    #[test]
    fn identity_is_equivalent_to_a_shifted_identity() {
        let cat = Concrete::finlinord();
        let seq = Arc::new(chain_seq(&cat, &[1, 2, 3, 4]));
        let id = SeqTransformation::identity(&cat, seq.clone(), 3);
        let shifted = SeqTransformation::new(
            &cat,
            seq.clone(),
            seq.clone(),
            vec![1, 2, 3],
            (0..3).map(|a| seq.bond(a, a + 1).unwrap().clone()).collect(),
        )
        .unwrap();
        assert!(transformations_equivalent(&cat, &id, &shifted).unwrap());
        let canon = canonical_representative(&cat, &shifted).unwrap();
        assert_eq!(canon.index_map, vec![0, 1, 2]);
        let comp = compose_seq_arrows(&cat, &shifted, &id).unwrap();
        assert!(transformations_equivalent(&cat, &comp, &shifted).unwrap());
    }

    #[test]
    fn stationary_chain_of_two() {
        let cat = Concrete::finlinord();
        let seq = chain_seq(&cat, &[2, 2, 2]);
        assert!(check_u(&cat, &seq, 2).holds());
        assert!(!check_u(&cat, &seq, 3).holds());
        assert!(!check_a(&cat, &seq, 3).unwrap().holds());
    }

    #[test]
    fn restriction_indices() {
        let cat = Concrete::finlinord();
        let seq = chain_seq(&cat, &[1, 2, 3, 4]);
        let r = seq.restrict(&[0, 2, 3]).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.bond(0, 1).unwrap(), seq.bond(0, 2).unwrap());
        assert!(seq.restrict(&[2, 1]).is_err());
    }

    #[test]
    fn fraisse_objects_in_a_small_category() {
        let cat = FiniteCategory::two_fraisse_objects();
        let o = cat.all_objects().to_vec();
        assert!(is_fraisse_object(&cat, &o[1], 2).unwrap().holds());
        assert!(is_fraisse_object(&cat, &o[2], 2).unwrap().holds());
        assert!(!is_fraisse_object(&cat, &o[0], 2).unwrap().holds());
        assert!(cat.isomorphic(&o[1], &o[2]));
    }
}
