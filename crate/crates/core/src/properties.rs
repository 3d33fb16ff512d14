//! Bounded verifiers: category laws, amalgamation, joint embedding,
//! pushouts, dominating families and cofinal classes.

use std::fmt;

use crate::category::Category;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    HoldsUpToBound,
    Fails,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::HoldsUpToBound => "holds-up-to-bound",
            Verdict::Fails => "fails",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness<O, A> {
    Span { f: A, g: A },
    Pair { a: O, b: O },
    Object(O),
    Arrow(A),
    Triple { f: A, g: A, h: A },
    /// An arrow out of a stage of a sequence.
    StageArrow { stage: usize, arrow: A },
    /// An arrow `f: a → b` with a companion arrow `g: a → u_stage`.
    StageSpan { stage: usize, f: A, g: A },
}

impl<O: fmt::Display, A: fmt::Display> fmt::Display for Witness<O, A> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Span { f, g } => write!(out, "span f={f} g={g}"),
            Witness::Pair { a, b } => write!(out, "pair a={a} b={b}"),
            Witness::Object(x) => write!(out, "object {x}"),
            Witness::Arrow(f) => write!(out, "arrow {f}"),
            Witness::Triple { f, g, h } => write!(out, "triple f={f} g={g} h={h}"),
            Witness::StageArrow { stage, arrow } => write!(out, "stage {stage} arrow {arrow}"),
            Witness::StageSpan { stage, f, g } => write!(out, "stage {stage} f={f} g={g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport<O, A> {
    pub property: String,
    pub category: String,
    pub bound: usize,
    pub verdict: Verdict,
    pub witness: Option<Witness<O, A>>,
    /// Number of instances examined.
    pub checked: usize,
    pub notes: Vec<String>,
}

pub type Report<C> = PropertyReport<<C as Category>::Ob, <C as Category>::Arr>;

impl<O: fmt::Display, A: fmt::Display> PropertyReport<O, A> {
    pub fn new(property: &str, category: String, bound: usize) -> Self {
        PropertyReport {
            property: property.to_string(),
            category,
            bound,
            verdict: Verdict::HoldsUpToBound,
            witness: None,
            checked: 0,
            notes: Vec::new(),
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsUpToBound
    }

    pub fn fail(mut self, w: Witness<O, A>) -> Self {
        self.verdict = Verdict::Fails;
        self.witness = Some(w);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn records(&self) -> Vec<(String, String)> {
        let mut r = vec![
            ("property".to_string(), self.property.clone()),
            ("category".to_string(), self.category.clone()),
            ("bound".to_string(), self.bound.to_string()),
            ("verdict".to_string(), self.verdict.to_string()),
            ("checked".to_string(), self.checked.to_string()),
        ];
        if let Some(w) = &self.witness {
            r.push(("witness".to_string(), w.to_string()));
        }
        for n in &self.notes {
            r.push(("note".to_string(), n.clone()));
        }
        r
    }
}

/// Identity and associativity laws on all arrows among objects of size at
/// most `bound`.
pub fn check_category_laws<C: Category>(cat: &C, bound: usize) -> Result<Report<C>> {
    let mut rep = Report::<C>::new("category-laws", cat.name(), bound);
    let obs = cat.objects(bound);
    let mut homs = Vec::new();
    for (i, a) in obs.iter().enumerate() {
        for (j, b) in obs.iter().enumerate() {
            homs.push((i, j, cat.hom(a, b)?));
        }
    }
    let hom = |i: usize, j: usize| &homs[i * obs.len() + j].2;
    for &(i, j, ref fs) in &homs {
        for f in fs {
            rep.checked += 1;
            let left = cat.compose(&cat.identity(&obs[j]), f)?;
            let right = cat.compose(f, &cat.identity(&obs[i]))?;
            if left != *f || right != *f || cat.dom(f) != obs[i] || cat.cod(f) != obs[j] {
                return Ok(rep.fail(Witness::Arrow(f.clone())));
            }
            for k in 0..obs.len() {
                for g in hom(j, k) {
                    let gf = cat.compose(g, f)?;
                    for l in 0..obs.len() {
                        for h in hom(k, l) {
                            rep.checked += 1;
                            let lhs = cat.compose(h, &gf)?;
                            let rhs = cat.compose(&cat.compose(h, g)?, f)?;
                            if lhs != rhs {
                                return Ok(rep.fail(Witness::Triple {
                                    f: f.clone(),
                                    g: g.clone(),
                                    h: h.clone(),
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// A cocone `(f', g')` over the span `(f, g)` with apex of size at most
/// `cap`: the category's constructive cocone when it fits, otherwise the
/// first one found scanning apexes by size.
pub fn find_cocone<C: Category>(cat: &C, f: &C::Arr, g: &C::Arr, cap: usize) -> Option<(C::Arr, C::Arr)> {
    if let Some((fp, gp)) = cat.amalgamate(f, g) {
        let ok = cat.size(&cat.cod(&fp)) <= cap
            && matches!((cat.compose(&fp, f), cat.compose(&gp, g)), (Ok(x), Ok(y)) if x == y);
        if ok {
            return Some((fp, gp));
        }
    }
    let b = cat.cod(f);
    for d in cat.objects(cap) {
        let Ok(fs) = cat.hom(&b, &d) else { continue };
        for fp in fs {
            let Ok(ff) = cat.compose(&fp, f) else { continue };
            if let Some(gp) = cat.first_factor_after(g, &ff) {
                return Some((fp, gp));
            }
        }
    }
    None
}

/// Every span of objects of size at most `bound` has a cocone with apex of
/// size at most `cap`.
pub fn check_amalgamation<C: Category>(cat: &C, bound: usize, cap: usize) -> Result<Report<C>> {
    let mut rep = Report::<C>::new("amalgamation", cat.name(), bound).note(format!("cocone apex cap {cap}"));
    let obs = cat.objects(bound);
    for a in &obs {
        let mut outs = Vec::new();
        for b in &obs {
            outs.extend(cat.hom(a, b)?);
        }
        for f in &outs {
            for g in &outs {
                rep.checked += 1;
                if find_cocone(cat, f, g, cap).is_none() {
                    return Ok(rep.fail(Witness::Span {
                        f: f.clone(),
                        g: g.clone(),
                    }));
                }
            }
        }
    }
    Ok(rep)
}

pub fn find_joint_cocone<C: Category>(cat: &C, a: &C::Ob, b: &C::Ob, cap: usize) -> Option<(C::Arr, C::Arr)> {
    if let Some((p, q)) = cat.joint_embed(a, b) {
        if cat.size(&cat.cod(&p)) <= cap {
            return Some((p, q));
        }
    }
    for c in cat.objects(cap) {
        if let (Some(p), Some(q)) = (cat.first_arrow(a, &c), cat.first_arrow(b, &c)) {
            return Some((p, q));
        }
    }
    None
}

/// Every pair of objects of size at most `bound` maps into a common object
/// of size at most `cap`.
pub fn check_jep<C: Category>(cat: &C, bound: usize, cap: usize) -> Result<Report<C>> {
    let mut rep = Report::<C>::new("joint-embedding", cat.name(), bound).note(format!("target cap {cap}"));
    let obs = cat.objects(bound);
    for (i, a) in obs.iter().enumerate() {
        for b in &obs[i..] {
            rep.checked += 1;
            if find_joint_cocone(cat, a, b, cap).is_none() {
                return Ok(rep.fail(Witness::Pair {
                    a: a.clone(),
                    b: b.clone(),
                }));
            }
        }
    }
    Ok(rep)
}

/// Whether `(fp, gp)` over `(f, g)` has the pushout property against all
/// cocones whose apex has size at most `bound`.
pub fn is_pushout_up_to<C: Category>(cat: &C, f: &C::Arr, g: &C::Arr, fp: &C::Arr, gp: &C::Arr, bound: usize) -> Result<bool> {
    if cat.compose(fp, f)? != cat.compose(gp, g)? {
        return Ok(false);
    }
    let b = cat.cod(f);
    for u in cat.objects(bound) {
        for f2 in cat.hom(&b, &u)? {
            for g2 in cat.factor_after(g, &cat.compose(&f2, f)?)? {
                let mut count = 0;
                for h in cat.factor_after(fp, &f2)? {
                    if cat.compose(&h, gp)? == g2 {
                        count += 1;
                    }
                }
                if count != 1 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A pushout of `(f, g)`, verified against all test cocones with apex of
/// size at most `bound`. The category's constructive candidate is tried
/// first, then every cocone with apex of size at most `|cod f| + |cod g|`.
pub fn find_pushout<C: Category>(cat: &C, f: &C::Arr, g: &C::Arr, bound: usize) -> Result<Option<(C::Arr, C::Arr)>> {
    if let Some((fp, gp)) = cat.pushout_candidate(f, g) {
        if is_pushout_up_to(cat, f, g, &fp, &gp, bound)? {
            return Ok(Some((fp, gp)));
        }
    }
    let (b, c) = (cat.cod(f), cat.cod(g));
    let cap = cat.size(&b) + cat.size(&c);
    for d in cat.objects(cap) {
        for fp in cat.hom(&b, &d)? {
            for gp in cat.factor_after(g, &cat.compose(&fp, f)?)? {
                if is_pushout_up_to(cat, f, g, &fp, &gp, bound)? {
                    return Ok(Some((fp, gp)));
                }
            }
        }
    }
    Ok(None)
}

/// Every object of size at most `bound` maps into some member of `class`.
pub fn is_cofinal<C: Category>(cat: &C, class: &[C::Ob], bound: usize) -> Result<Report<C>> {
    let mut rep = Report::<C>::new("cofinal", cat.name(), bound);
    for x in cat.objects(bound) {
        rep.checked += 1;
        if !class.iter().any(|y| cat.first_arrow(&x, y).is_some()) {
            return Ok(rep.fail(Witness::Object(x)));
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domination {
    /// `g ∘ f` must itself be a member of the family.
    Direct,
    /// `g ∘ f` may be a composite of a chain of family members.
    ViaChains,
}

/// Domain of the family is cofinal, and every arrow `f: a → x` out of a
/// domain can be completed by some `g` to a family arrow (or a composite
/// of family arrows, under [`Domination::ViaChains`]).
pub fn is_dominating<C: Category>(cat: &C, family: &[C::Arr], bound: usize, mode: Domination) -> Result<Report<C>> {
    let mut rep = Report::<C>::new("dominating", cat.name(), bound);
    if mode == Domination::ViaChains {
        rep = rep.note("second clause checked up to composition of family arrows");
    }
    let mut doms: Vec<C::Ob> = Vec::new();
    for f in family {
        let d = cat.dom(f);
        if !doms.contains(&d) {
            doms.push(d);
        }
    }
    for x in cat.objects(bound) {
        rep.checked += 1;
        if !doms.iter().any(|d| cat.first_arrow(&x, d).is_some()) {
            return Ok(rep.note("domain of the family is not cofinal").fail(Witness::Object(x)));
        }
    }
    let obs = cat.objects(bound);
    for a in doms.iter().filter(|a| cat.size(a) <= bound) {
        let mut reach: Vec<C::Arr> = family.iter().filter(|f| cat.dom(f) == *a).cloned().collect();
        if mode == Domination::ViaChains {
            let mut k = 0;
            while k < reach.len() {
                let c = reach[k].clone();
                let end = cat.cod(&c);
                for h in family.iter().filter(|h| cat.dom(h) == end) {
                    let hc = cat.compose(h, &c)?;
                    if !reach.contains(&hc) {
                        reach.push(hc);
                    }
                }
                k += 1;
            }
        }
        for x in &obs {
            for f in cat.hom(a, x)? {
                rep.checked += 1;
                let ok = reach.iter().any(|c| cat.first_factor_after(&f, c).is_some());
                if !ok {
                    return Ok(rep
                        .note("an arrow out of the domain cannot be completed into the family")
                        .fail(Witness::Arrow(f)));
                }
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
    use std::sync::Arc;

    #[test]
    fn amalgamation_examples() {
        assert!(check_amalgamation(&Concrete::fingraph(), 3, 6).unwrap().holds());
        assert!(check_amalgamation(&Concrete::finlinord(), 4, 8).unwrap().holds());
        let bad = check_amalgamation(&FiniteCategory::no_cocone(), 3, 6).unwrap();
        assert_eq!(bad.verdict, Verdict::Fails);
        assert!(matches!(bad.witness, Some(Witness::Span { .. })));
    }

    #[test]
    fn jep_examples() {
        assert!(check_jep(&Concrete::finlinord(), 4, 8).unwrap().holds());
        assert!(check_jep(&FiniteCategory::single_point(), 1, 2).unwrap().holds());
        let bad = check_jep(&FiniteCategory::two_points(), 1, 2).unwrap();
        assert!(matches!(bad.witness, Some(Witness::Pair { .. })));
    }

    #[test]
    fn set_pushout() {
        let cat = Concrete::finset_maps();
        let z = Arc::new(FinStructure::set(1));
        let x = Arc::new(FinStructure::set(2));
        let y = Arc::new(FinStructure::set(2).with_ids(vec![0, 2]).unwrap());
        let f = Morphism::new(z.clone(), x, vec![0]).unwrap();
        let g = Morphism::new(z, y, vec![0]).unwrap();
        let (fp, gp) = find_pushout(&cat, &f, &g, 4).unwrap().unwrap();
        assert_eq!(fp.target().size(), 3);
        assert_eq!(fp.target().ids(), &[0, 1, 2]);
        assert!(is_pushout_up_to(&cat, &f, &g, &fp, &gp, 4).unwrap());
    }

    #[test]
    fn embeddings_lack_the_set_pushout() {
        let cat = Concrete::finset();
        let z = Arc::new(FinStructure::set(1));
        let x = Arc::new(FinStructure::set(2));
        let f = Morphism::new(z, x, vec![0]).unwrap();
        assert_eq!(find_pushout(&cat, &f, &f, 3).unwrap(), None);
    }

    #[test]
    fn one_point_family() {
        let cat = Concrete::fingraph();
        let mut family = Vec::new();
        for a in cat.objects(4) {
            for j in 0..cat.extension_count(&a) {
                let e = cat.extension_nth(&a, j).unwrap();
                // retarget at the canonical codomain
                let canon = Arc::new(cat.canonical(e.target()));
                let iso = cat.hom(e.target(), &canon).unwrap().into_iter().find(|h| cat.is_iso(h)).unwrap();
                family.push(iso.after(&e).unwrap());
            }
        }
        assert!(is_dominating(&cat, &family, 4, Domination::ViaChains).unwrap().holds());
        let direct = is_dominating(&cat, &family, 4, Domination::Direct).unwrap();
        assert_eq!(direct.verdict, Verdict::Fails);
        let narrow: Vec<Morphism> = family.iter().filter(|f| f.source().size() == 2 && f.source().as_graph().unwrap().edges().is_empty()).cloned().collect();
        let rep = is_dominating(&cat, &narrow, 4, Domination::ViaChains).unwrap();
        // K2 does not embed into the edgeless pair
        assert!(matches!(rep.witness, Some(Witness::Object(ref x)) if x.as_graph().unwrap().edges().len() == 1));
    }

    #[test]
    fn category_laws_small() {
        assert!(check_category_laws(&Concrete::finlinord(), 3).unwrap().holds());
        assert!(check_category_laws(&FiniteCategory::no_cocone(), 3).unwrap().holds());
    }
}
