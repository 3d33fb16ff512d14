//! Bounded binary trees, closed initial-segment embeddings, healthy trees.
//!
//! A finite tree stands for a skeleton of a possibly transfinite tree: each
//! node carries a level `ω·omega + fin`. A node on a limit level (`fin == 0`,
//! `omega > 0`) is the supremum of the chain of its predecessors, so a closed
//! initial segment containing its parent must contain it.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::morphism::Morphism;
use crate::structure::FinStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    pub omega: usize,
    pub fin: usize,
}

impl Level {
    pub fn finite(n: usize) -> Level {
        Level { omega: 0, fin: n }
    }

    pub fn is_limit(self) -> bool {
        self.fin == 0 && self.omega > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    level: Vec<Level>,
    root: usize,
    meet: Vec<usize>,
}

impl BinTree {
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<BinTree> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::InvalidStructure("a tree needs a root".into()));
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidStructure(format!("expected one root, found {}", roots.len())));
        }
        let root = roots[0];
        let mut children = vec![Vec::new(); n];
        for (c, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::InvalidStructure(format!("parent {p} out of range")));
                }
                children[p].push(c);
            }
        }
        if let Some(i) = (0..n).find(|&i| children[i].len() > 2) {
            return Err(Error::InvalidStructure(format!("node {i} has more than two children")));
        }
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut stack = vec![root];
        let mut seen = 1;
        while let Some(x) = stack.pop() {
            for &c in &children[x] {
                depth[c] = depth[x] + 1;
                seen += 1;
                stack.push(c);
            }
        }
        if seen != n {
            return Err(Error::InvalidStructure("parent links contain a cycle".into()));
        }
        let level = depth.iter().map(|&d| Level::finite(d)).collect();
        let mut t = BinTree {
            parent,
            children,
            depth,
            level,
            root,
            meet: Vec::new(),
        };
        t.meet = t.compute_meets();
        Ok(t)
    }

    /// Replace the default depth levels; levels must increase strictly
    /// along parent links.
    pub fn with_levels(mut self, level: Vec<Level>) -> Result<BinTree> {
        if level.len() != self.len() {
            return Err(Error::InvalidStructure("level list has the wrong length".into()));
        }
        for c in 0..self.len() {
            if let Some(p) = self.parent[c] {
                if level[p] >= level[c] {
                    return Err(Error::InvalidStructure(format!("level of node {c} does not exceed its parent's")));
                }
            }
        }
        self.level = level;
        Ok(self)
    }

    fn compute_meets(&self) -> Vec<usize> {
        let n = self.len();
        let mut meet = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (mut a, mut b) = (i, j);
                while self.depth[a] > self.depth[b] {
                    a = self.parent[a].unwrap_or(a);
                }
                while self.depth[b] > self.depth[a] {
                    b = self.parent[b].unwrap_or(b);
                }
                while a != b {
                    a = self.parent[a].unwrap_or(a);
                    b = self.parent[b].unwrap_or(b);
                }
                meet[i * n + j] = a;
            }
        }
        meet
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn depth(&self, i: usize) -> usize {
        self.depth[i]
    }

    pub fn level(&self, i: usize) -> Level {
        self.level[i]
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i * self.len() + j]
    }

    /// `i ≤ j` in the tree order.
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.meet(i, j) == i
    }

    pub fn maximal(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.children[i].is_empty()).collect()
    }

    pub fn top_level(&self) -> Level {
        self.level.iter().copied().max().unwrap_or(Level::finite(0))
    }

    /// Number of levels of a tree with default levels.
    pub fn height(&self) -> usize {
        self.depth.iter().max().map_or(0, |d| d + 1)
    }

    /// Nodes in an order listing every parent before its children.
    pub fn top_down(&self) -> Vec<usize> {
        let mut order = vec![self.root];
        let mut k = 0;
        while k < order.len() {
            let x = order[k];
            order.extend_from_slice(&self.children[x]);
            k += 1;
        }
        order
    }

    pub fn subtree(&self, x: usize) -> Vec<usize> {
        let mut out = vec![x];
        let mut k = 0;
        while k < out.len() {
            let y = out[k];
            out.extend_from_slice(&self.children[y]);
            k += 1;
        }
        out
    }
}

fn tree_of(s: &FinStructure) -> Result<&BinTree> {
    s.as_tree()
        .ok_or_else(|| Error::InvalidStructure(format!("{} is not a tree", s)))
}

/// Why a map between trees fails to be a closed initial-segment embedding.
pub fn t2_violation(f: &Morphism) -> Option<String> {
    let (Ok(t), Ok(s)) = (tree_of(f.source()), tree_of(f.target())) else {
        return Some("endpoints are not trees".into());
    };
    if !f.is_injective() {
        return Some("not injective".into());
    }
    for x in 0..t.len() {
        if t.level(x) != s.level(f.apply(x)) {
            return Some(format!("node {x} changes level"));
        }
        for y in 0..t.len() {
            if f.apply(t.meet(x, y)) != s.meet(f.apply(x), f.apply(y)) {
                return Some(format!("meet of {x} and {y} not preserved"));
            }
        }
    }
    let img = f.image();
    for z in 0..s.len() {
        if let Some(p) = s.parent(z) {
            if img[z] && !img[p] {
                return Some("image is not an initial segment".into());
            }
            if img[p] && !img[z] && s.level(z).is_limit() {
                return Some(format!("image misses the supremum at node {z}"));
            }
        }
    }
    None
}

pub fn is_t2_arrow(f: &Morphism) -> bool {
    t2_violation(f).is_none()
}

/// Every non-maximal node has two immediate successors and every maximal
/// node sits on the top level.
pub fn is_healthy(t: &BinTree) -> bool {
    let top = t.top_level();
    (0..t.len()).all(|i| match t.children(i).len() {
        0 => t.level(i) == top,
        2 => true,
        _ => false,
    })
}

/// Chains `T_k = [root, w_k] \ (T_0 ∪ … ∪ T_{k-1})`, each listed bottom-up.
pub fn natural_decomposition(t: &BinTree, max_order: &[usize]) -> Result<Vec<Vec<usize>>> {
    let mut expected = t.maximal();
    let mut given = max_order.to_vec();
    expected.sort_unstable();
    given.sort_unstable();
    if expected != given {
        return Err(Error::IncompleteEnumeration(format!(
            "maximal nodes are {:?}, order lists {:?}",
            expected, max_order
        )));
    }
    let mut used = vec![false; t.len()];
    let mut chains = Vec::new();
    for &w in max_order {
        let mut chain = Vec::new();
        let mut x = Some(w);
        while let Some(y) = x {
            if used[y] {
                break;
            }
            used[y] = true;
            chain.push(y);
            x = t.parent(y);
        }
        chain.reverse();
        chains.push(chain);
    }
    Ok(chains)
}

/// Embed `t` as a closed initial segment of the healthy tree `v`.
pub fn embed_initial(t: &Arc<FinStructure>, v: &Arc<FinStructure>) -> Result<Morphism> {
    let (tt, vt) = (tree_of(t)?, tree_of(v)?);
    if !is_healthy(vt) {
        return Err(Error::PreconditionFailed("target tree is not healthy".into()));
    }
    if tt.top_level() > vt.top_level() {
        return Err(Error::HeightExceeded(format!(
            "source reaches level {:?}, target only {:?}",
            tt.top_level(),
            vt.top_level()
        )));
    }
    if tt.level(tt.root()) != vt.level(vt.root()) {
        return Err(Error::HeightExceeded("root levels differ".into()));
    }
    let chains = natural_decomposition(tt, &tt.maximal())?;
    let mut map: Vec<Option<usize>> = vec![None; tt.len()];
    let mut used = vec![false; vt.len()];
    for chain in chains {
        let a = chain[0];
        let mut cur = match tt.parent(a) {
            None => vt.root(),
            Some(c) => {
                let fc = map[c].expect("parents are placed first");
                pick_child(vt, fc, tt.level(a), &used).ok_or_else(|| {
                    Error::HeightExceeded(format!("no free successor of node {fc} on the level of node {a}"))
                })?
            }
        };
        map[a] = Some(cur);
        used[cur] = true;
        for &x in &chain[1..] {
            cur = pick_child(vt, cur, tt.level(x), &used)
                .ok_or_else(|| Error::HeightExceeded(format!("chain through node {x} runs out of room")))?;
            map[x] = Some(cur);
            used[cur] = true;
        }
    }
    let f = Morphism::new(t.clone(), v.clone(), map.into_iter().map(|m| m.expect("all placed")).collect())?;
    match t2_violation(&f) {
        None => Ok(f),
        Some(why) => Err(Error::HeightExceeded(why)),
    }
}

fn pick_child(t: &BinTree, x: usize, level: Level, used: &[bool]) -> Option<usize> {
    t.children(x).iter().copied().find(|&c| !used[c] && t.level(c) == level)
}

/// Embed the subtree of `s` above `x` into the subtree of `u` above `y`,
/// sending `x` to `y`.
fn embed_above(s: &BinTree, x: usize, u: &BinTree, y: usize, map: &mut [Option<usize>]) -> bool {
    if s.level(x) != u.level(y) {
        return false;
    }
    map[x] = Some(y);
    let sc = s.children(x);
    let uc = u.children(y);
    if sc.len() > uc.len() {
        map[x] = None;
        return false;
    }
    let orders: Vec<Vec<usize>> = match uc.len() {
        0 => vec![vec![]],
        1 => vec![vec![uc[0]]],
        _ => vec![vec![uc[0], uc[1]], vec![uc[1], uc[0]]],
    };
    for ord in orders {
        let ok = sc.iter().zip(&ord).all(|(&c, &d)| embed_above(s, c, u, d, map));
        let complete = ok && limit_children_covered(u, y, &ord[..sc.len()]);
        if complete {
            return true;
        }
        for &c in sc {
            clear_above(s, c, map);
        }
    }
    map[x] = None;
    false
}

fn limit_children_covered(u: &BinTree, y: usize, taken: &[usize]) -> bool {
    u.children(y)
        .iter()
        .all(|c| !u.level(*c).is_limit() || taken.contains(c))
}

fn clear_above(s: &BinTree, x: usize, map: &mut [Option<usize>]) {
    for z in s.subtree(x) {
        map[z] = None;
    }
}

/// Extend `f: T → U` along the inclusion `incl: T → S` to an arrow
/// `S → U` agreeing with `f`.
pub fn extend_arrow(incl: &Morphism, f: &Morphism) -> Result<Morphism> {
    if incl.source() != f.source() {
        return Err(Error::MismatchedEndpoints("inclusion and arrow have different sources".into()));
    }
    for (name, g) in [("inclusion", incl), ("arrow", f)] {
        if let Some(why) = t2_violation(g) {
            return Err(Error::PreconditionFailed(format!("{name} is not a closed initial-segment arrow: {why}")));
        }
    }
    let s_ob = incl.target().clone();
    let u_ob = f.target().clone();
    let (s, u) = (tree_of(&s_ob)?, tree_of(&u_ob)?);
    let t_len = incl.source().size();
    let mut pre = vec![None; s.len()];
    for x in 0..t_len {
        pre[incl.apply(x)] = Some(x);
    }
    let mut map: Vec<Option<usize>> = vec![None; s.len()];
    let mut used = vec![false; u.len()];
    for (z, p) in pre.iter().enumerate() {
        if let Some(x) = p {
            map[z] = Some(f.apply(*x));
            used[f.apply(*x)] = true;
        }
    }
    for sn in 0..s.len() {
        let Some(p) = s.parent(sn) else { continue };
        if pre[sn].is_some() || pre[p].is_none() {
            continue;
        }
        let up = map[p].expect("parent lies in the image");
        let mut placed = false;
        for &yn in u.children(up) {
            if used[yn] {
                continue;
            }
            if embed_above(s, sn, u, yn, &mut map) {
                for z in s.subtree(sn) {
                    used[map[z].expect("placed")] = true;
                }
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InsufficientHeadroom(format!(
                "no free successor of node {} can carry the part of S above node {}",
                u_ob.ids()[up],
                s_ob.ids()[sn]
            )));
        }
    }
    let g = Morphism::new(s_ob, u_ob, map.into_iter().map(|m| m.expect("total")).collect())?;
    if let Some(why) = t2_violation(&g) {
        return Err(Error::InsufficientHeadroom(why));
    }
    debug_assert!(g.after(incl).map(|h| h == *f).unwrap_or(false));
    Ok(g)
}

/// Complete binary tree with `height` levels, nodes in breadth-first order.
pub fn build_standard_healthy(height: usize, cap: usize) -> Result<BinTree> {
    if height == 0 {
        return Err(Error::PreconditionFailed("height must be at least 1".into()));
    }
    let needed = if height >= usize::BITS as usize { usize::MAX } else { (1usize << height) - 1 };
    if needed > cap {
        return Err(Error::CapExceeded { cap, needed });
    }
    let parent = (0..needed).map(|i| if i == 0 { None } else { Some((i - 1) / 2) }).collect();
    BinTree::from_parents(parent)
}

/// A random tree with at most `max_height` levels and at most `max_nodes`
/// nodes; every node below the top level gets 0, 1 or 2 children.
pub fn random_tree<R: Rng>(max_height: usize, max_nodes: usize, rng: &mut R) -> BinTree {
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut depth = vec![0];
    let mut k = 0;
    while k < parent.len() {
        if depth[k] + 1 < max_height {
            let kids = rng.random_range(0..=2);
            for _ in 0..kids {
                if parent.len() < max_nodes.max(1) {
                    parent.push(Some(k));
                    depth.push(depth[k] + 1);
                }
            }
        }
        k += 1;
    }
    BinTree::from_parents(parent).expect("generated tree")
}

/// The nodes on the first `levels` levels, keeping ids, with its inclusion.
pub fn truncate(t: &Arc<FinStructure>, levels: usize) -> Result<Morphism> {
    let tr = tree_of(t)?;
    let keep: Vec<usize> = (0..tr.len()).filter(|&x| tr.depth(x) < levels.max(1)).collect();
    let mut pos = vec![usize::MAX; tr.len()];
    for (i, &x) in keep.iter().enumerate() {
        pos[x] = i;
    }
    let parents = keep.iter().map(|&x| tr.parent(x).map(|p| pos[p])).collect();
    let levels_kept = keep.iter().map(|&x| tr.level(x)).collect();
    let sub = BinTree::from_parents(parents)?.with_levels(levels_kept)?;
    let ids = keep.iter().map(|&x| t.ids()[x]).collect();
    let sub = Arc::new(FinStructure::tree(sub).with_ids(ids)?);
    Morphism::new(sub, t.clone(), keep)
}

/// AHU-style code of the rooted unordered tree above `x`.
pub fn shape_code(t: &BinTree, x: usize) -> String {
    let mut codes: Vec<String> = t.children(x).iter().map(|&c| shape_code(t, c)).collect();
    codes.sort();
    format!("({})", codes.concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(parents: &[Option<usize>]) -> Arc<FinStructure> {
        Arc::new(FinStructure::tree(BinTree::from_parents(parents.to_vec()).unwrap()))
    }

    #[test]
    fn rejects_bad_parent_lists() {
        assert!(BinTree::from_parents(vec![None, None]).is_err());
        assert!(BinTree::from_parents(vec![Some(1), Some(0)]).is_err());
        assert!(BinTree::from_parents(vec![None, Some(0), Some(0), Some(0)]).is_err());
    }

    #[test]
    fn meets_and_order() {
        let t = BinTree::from_parents(vec![None, Some(0), Some(0), Some(1), Some(1)]).unwrap();
        assert_eq!(t.meet(3, 4), 1);
        assert_eq!(t.meet(3, 2), 0);
        assert!(t.leq(0, 4));
        assert!(!t.leq(2, 4));
    }

    #[test]
    fn healthy_examples() {
        assert!(is_healthy(&build_standard_healthy(3, 100).unwrap()));
        assert!(is_healthy(&build_standard_healthy(1, 1).unwrap()));
        let unary = BinTree::from_parents(vec![None, Some(0)]).unwrap();
        assert!(!is_healthy(&unary));
        let lopsided = BinTree::from_parents(vec![None, Some(0), Some(0), Some(1), Some(1)]).unwrap();
        assert!(!is_healthy(&lopsided));
    }

    #[test]
    fn node_cap() {
        assert_eq!(build_standard_healthy(2, 3).unwrap().len(), 3);
        assert!(matches!(build_standard_healthy(4, 10), Err(Error::CapExceeded { cap: 10, needed: 15 })));
    }

    #[test]
    fn decomposition_of_cherry_with_stalk() {
        // root 0, 0→1, 1→2, 1→3
        let t = BinTree::from_parents(vec![None, Some(0), Some(1), Some(1)]).unwrap();
        assert_eq!(natural_decomposition(&t, &[3, 2]).unwrap(), vec![vec![0, 1, 3], vec![2]]);
        assert!(matches!(natural_decomposition(&t, &[3]), Err(Error::IncompleteEnumeration(_))));
    }

    #[test]
    fn limit_levels_force_closure() {
        let small = tree(&[None]);
        let base = BinTree::from_parents(vec![None, Some(0)]).unwrap();
        let with_limit = base
            .clone()
            .with_levels(vec![Level::finite(0), Level { omega: 1, fin: 0 }])
            .unwrap();
        let s = Arc::new(FinStructure::tree(with_limit));
        let f = Morphism::new(small.clone(), s, vec![0]).unwrap();
        assert!(t2_violation(&f).unwrap().contains("supremum"));
        let plain = Arc::new(FinStructure::tree(base));
        assert!(is_t2_arrow(&Morphism::new(small, plain, vec![0]).unwrap()));
    }

    #[test]
    fn embed_path_into_standard_tree() {
        let t = tree(&[None, Some(0), Some(1)]);
        let v = Arc::new(FinStructure::tree(build_standard_healthy(3, 7).unwrap()));
        let f = embed_initial(&t, &v).unwrap();
        assert!(is_t2_arrow(&f));
        let tall = tree(&[None, Some(0), Some(1), Some(2)]);
        assert!(matches!(embed_initial(&tall, &v), Err(Error::HeightExceeded(_))));
    }

    #[test]
    fn extend_along_inclusion() {
        let t = tree(&[None, Some(0)]);
        let s = tree(&[None, Some(0), Some(0), Some(2)]);
        let incl = Morphism::new(t.clone(), s.clone(), vec![0, 1]).unwrap();
        let u = Arc::new(FinStructure::tree(build_standard_healthy(3, 7).unwrap()));
        let f = embed_initial(&t, &u).unwrap();
        let g = extend_arrow(&incl, &f).unwrap();
        assert!(is_t2_arrow(&g));
        assert_eq!(g.after(&incl).unwrap(), f);
    }

    #[test]
    fn extension_without_headroom() {
        let t = tree(&[None]);
        let s = tree(&[None, Some(0)]);
        let incl = Morphism::new(t.clone(), s, vec![0]).unwrap();
        let f = Morphism::new(t.clone(), t, vec![0]).unwrap();
        assert!(matches!(extend_arrow(&incl, &f), Err(Error::InsufficientHeadroom(_))));
    }
}
