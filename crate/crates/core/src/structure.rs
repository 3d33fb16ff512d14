//! Finite structures and their text format.

use std::collections::HashMap;
use std::fmt;

use crate::error::{parse_err, Error, Result};
use crate::normed::PolyNormedSpace;
use crate::trees::{BinTree, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Set,
    Graph,
    LinOrder,
    Tree,
    Space,
}

impl Kind {
    pub fn keyword(self) -> &'static str {
        match self {
            Kind::Set => "set",
            Kind::Graph => "graph",
            Kind::LinOrder => "linorder",
            Kind::Tree => "tree",
            Kind::Space => "pnspace",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Kind> {
        Some(match s {
            "set" => Kind::Set,
            "graph" => Kind::Graph,
            "linorder" => Kind::LinOrder,
            "tree" | "bintree" => Kind::Tree,
            "pnspace" => Kind::Space,
            _ => return None,
        })
    }
}

/// Simple undirected loopless graph on positions `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidStructure(format!("edge ({i},{j}) out of range")));
            }
            if i == j {
                return Err(Error::InvalidStructure(format!("loop at {i}")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn set_edge(&mut self, i: usize, j: usize, on: bool) {
        self.adj[i * self.n + j] = on;
        self.adj[j * self.n + i] = on;
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adjacent(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.adjacent(i, j)).count()
    }

    /// Graph grown by one vertex adjacent to `nbrs`.
    pub fn extended(&self, nbrs: &[usize]) -> Graph {
        let n = self.n + 1;
        let mut g = Graph::empty(n);
        for (i, j) in self.edges() {
            g.set_edge(i, j, true);
        }
        for &j in nbrs {
            g.set_edge(self.n, j, true);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Payload {
    Set,
    Graph(Graph),
    /// `ranks[i]` is the position of element `i` in the order.
    LinOrder(Vec<usize>),
    Tree(BinTree),
    Space(PolyNormedSpace),
}

/// A finite structure: element ids (by position) plus the relational data.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinStructure {
    ids: Vec<u32>,
    payload: Payload,
}

fn default_ids(n: usize) -> Vec<u32> {
    (0..n as u32).collect()
}

impl FinStructure {
    pub fn new(ids: Vec<u32>, payload: Payload) -> Result<Self> {
        let n = ids.len();
        let mut seen = ids.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != n {
            return Err(Error::InvalidStructure("duplicate element ids".into()));
        }
        let ok = match &payload {
            Payload::Set => true,
            Payload::Graph(g) => g.len() == n,
            Payload::LinOrder(r) => {
                let mut s = r.clone();
                s.sort_unstable();
                r.len() == n && s.iter().enumerate().all(|(i, &x)| i == x)
            }
            Payload::Tree(t) => t.len() == n,
            Payload::Space(s) => s.dim() == n,
        };
        if !ok {
            return Err(Error::InvalidStructure("payload does not match universe".into()));
        }
        Ok(FinStructure { ids, payload })
    }

    pub fn set(n: usize) -> Self {
        FinStructure {
            ids: default_ids(n),
            payload: Payload::Set,
        }
    }

    pub fn graph(g: Graph) -> Self {
        FinStructure {
            ids: default_ids(g.len()),
            payload: Payload::Graph(g),
        }
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        FinStructure {
            ids: default_ids(n),
            payload: Payload::LinOrder((0..n).collect()),
        }
    }

    pub fn linorder(ranks: Vec<usize>) -> Result<Self> {
        FinStructure::new(default_ids(ranks.len()), Payload::LinOrder(ranks))
    }

    pub fn tree(t: BinTree) -> Self {
        FinStructure {
            ids: default_ids(t.len()),
            payload: Payload::Tree(t),
        }
    }

    pub fn space(s: PolyNormedSpace) -> Self {
        FinStructure {
            ids: default_ids(s.dim()),
            payload: Payload::Space(s),
        }
    }

    pub fn with_ids(self, ids: Vec<u32>) -> Result<Self> {
        FinStructure::new(ids, self.payload)
    }

    pub fn kind(&self) -> Kind {
        match self.payload {
            Payload::Set => Kind::Set,
            Payload::Graph(_) => Kind::Graph,
            Payload::LinOrder(_) => Kind::LinOrder,
            Payload::Tree(_) => Kind::Tree,
            Payload::Space(_) => Kind::Space,
        }
    }

    pub fn size(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn position(&self, id: u32) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub fn fresh_id(&self) -> u32 {
        self.ids.iter().max().map_or(0, |m| m + 1)
    }

    pub fn as_graph(&self) -> Option<&Graph> {
        match &self.payload {
            Payload::Graph(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_order(&self) -> Option<&[usize]> {
        match &self.payload {
            Payload::LinOrder(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&BinTree> {
        match &self.payload {
            Payload::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_space(&self) -> Option<&PolyNormedSpace> {
        match &self.payload {
            Payload::Space(s) => Some(s),
            _ => None,
        }
    }

    /// Positions listed from least to greatest (orders only).
    pub fn order_sequence(&self) -> Option<Vec<usize>> {
        let r = self.as_order()?;
        let mut seq = vec![0; r.len()];
        for (i, &k) in r.iter().enumerate() {
            seq[k] = i;
        }
        Some(seq)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out);
        out
    }

    pub fn write_text(&self, out: &mut String) {
        use std::fmt::Write;
        let n = self.size();
        let _ = writeln!(out, "{} {}", self.kind().keyword(), n);
        if self.kind() != Kind::Space && self.ids != default_ids(n) {
            let ids: Vec<String> = self.ids.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "ids {}", ids.join(" "));
        }
        let id = |i: usize| self.ids[i];
        match &self.payload {
            Payload::Set => {}
            Payload::Graph(g) => {
                for (i, j) in g.edges() {
                    let _ = writeln!(out, "edge {} {}", id(i), id(j));
                }
            }
            Payload::LinOrder(_) => {
                let seq = self.order_sequence().unwrap_or_default();
                for w in seq.windows(2) {
                    let _ = writeln!(out, "lt {} {}", id(w[0]), id(w[1]));
                }
            }
            Payload::Tree(t) => {
                for c in 0..n {
                    if let Some(p) = t.parent(c) {
                        let _ = writeln!(out, "parent {} {}", id(p), id(c));
                    }
                }
                for c in 0..n {
                    if t.level(c) != Level::finite(t.depth(c)) {
                        let l = t.level(c);
                        let _ = writeln!(out, "level {} {} {}", id(c), l.omega, l.fin);
                    }
                }
            }
            Payload::Space(s) => {
                for v in s.vertices() {
                    let parts: Vec<String> = v.iter().map(|q| q.to_string()).collect();
                    let _ = writeln!(out, "vertex {}", parts.join(" "));
                }
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = tokenize(text);
        let (s, next) = parse_structure_at(&lines, 0)?;
        if next < lines.len() {
            return parse_err(lines[next].0, format!("unexpected `{}`", lines[next].1[0]));
        }
        Ok(s)
    }
}

impl fmt::Display for FinStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.kind().keyword())?;
        for (k, id) in self.ids.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "]")?;
        match &self.payload {
            Payload::Graph(g) => {
                let e: Vec<String> = g
                    .edges()
                    .iter()
                    .map(|&(i, j)| format!("{}-{}", self.ids[i], self.ids[j]))
                    .collect();
                write!(f, "{{{}}}", e.join(","))
            }
            Payload::LinOrder(_) => {
                let seq = self.order_sequence().unwrap_or_default();
                let e: Vec<String> = seq.iter().map(|&i| self.ids[i].to_string()).collect();
                write!(f, "<{}>", e.join("<"))
            }
            _ => Ok(()),
        }
    }
}

/// Non-blank, non-comment lines with their 1-based line numbers.
pub type Lines<'a> = Vec<(usize, Vec<&'a str>)>;

pub fn tokenize(text: &str) -> Lines<'_> {
    text.lines()
        .enumerate()
        .filter_map(|(k, l)| {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some((k + 1, t.split_whitespace().collect()))
            }
        })
        .collect()
}

pub(crate) fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Parse {
            line,
            msg: format!("expected a non-negative integer, found `{s}`"),
        })
}

fn parse_u32(line: usize, s: &str) -> Result<u32> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected an element id, found `{s}`"),
    })
}

/// Parse one structure block starting at `start`; returns the index of the
/// first line not belonging to it.
pub fn parse_structure_at(lines: &Lines<'_>, start: usize) -> Result<(FinStructure, usize)> {
    let Some((ln, head)) = lines.get(start) else {
        return parse_err(0, "missing structure header");
    };
    let kind = match Kind::from_keyword(head[0]) {
        Some(k) => k,
        None => return parse_err(*ln, format!("unknown structure kind `{}`", head[0])),
    };
    if head.len() != 2 {
        return parse_err(*ln, "header must be `<kind> <size>`");
    }
    let n = parse_usize(*ln, head[1])?;
    let mut k = start + 1;
    let mut ids = default_ids(n);
    if kind != Kind::Space {
        if let Some((l, toks)) = lines.get(k) {
            if toks[0] == "ids" {
                if toks.len() != n + 1 {
                    return parse_err(*l, format!("expected {n} ids"));
                }
                ids = toks[1..].iter().map(|s| parse_u32(*l, s)).collect::<Result<_>>()?;
                k += 1;
            }
        }
    }
    let index: HashMap<u32, usize> = ids.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    if index.len() != n {
        return parse_err(*ln, "duplicate element ids");
    }
    let pos = |l: usize, s: &str| -> Result<usize> {
        let id = parse_u32(l, s)?;
        index.get(&id).copied().ok_or(Error::Parse {
            line: l,
            msg: format!("unknown element id {id}"),
        })
    };
    let keyword = match kind {
        Kind::Set => "",
        Kind::Graph => "edge",
        Kind::LinOrder => "lt",
        Kind::Tree => "parent",
        Kind::Space => "vertex",
    };
    let mut pairs = Vec::new();
    let mut levels = Vec::new();
    let mut vertices = Vec::new();
    while let Some((l, toks)) = lines.get(k) {
        let l = *l;
        if toks[0] == keyword && kind != Kind::Space {
            if toks.len() != 3 {
                return parse_err(l, format!("`{keyword}` takes two ids"));
            }
            pairs.push((pos(l, toks[1])?, pos(l, toks[2])?));
        } else if toks[0] == "level" && kind == Kind::Tree {
            if toks.len() != 4 {
                return parse_err(l, "`level` takes an id and two integers");
            }
            levels.push((
                l,
                pos(l, toks[1])?,
                Level {
                    omega: parse_usize(l, toks[2])?,
                    fin: parse_usize(l, toks[3])?,
                },
            ));
        } else if toks[0] == "vertex" && kind == Kind::Space {
            if toks.len() != n + 1 {
                return parse_err(l, format!("vertex needs {n} coordinates"));
            }
            let v = toks[1..]
                .iter()
                .map(|s| crate::normed::parse_rational(s).ok_or(()))
                .collect::<std::result::Result<Vec<_>, _>>()
                .or_else(|_| parse_err(l, "bad rational coordinate"))?;
            vertices.push(v);
        } else {
            break;
        }
        k += 1;
    }
    let payload = match kind {
        Kind::Set => Payload::Set,
        Kind::Graph => {
            let g = Graph::from_edges(n, &pairs).or_else(|e| parse_err(*ln, e.to_string()))?;
            Payload::Graph(g)
        }
        Kind::LinOrder => Payload::LinOrder(ranks_from_pairs(n, &pairs).ok_or(Error::Parse {
            line: *ln,
            msg: "`lt` lines do not determine a linear order".into(),
        })?),
        Kind::Tree => {
            let mut parent = vec![None; n];
            for &(p, c) in &pairs {
                if parent[c].is_some() {
                    return parse_err(*ln, "node with two parents");
                }
                parent[c] = Some(p);
            }
            let mut t = BinTree::from_parents(parent).or_else(|e| parse_err(*ln, e.to_string()))?;
            if !levels.is_empty() {
                let mut lv: Vec<Level> = (0..n).map(|i| Level::finite(t.depth(i))).collect();
                for &(_, i, l) in &levels {
                    lv[i] = l;
                }
                t = t.with_levels(lv).or_else(|e| parse_err(levels[0].0, e.to_string()))?;
            }
            Payload::Tree(t)
        }
        Kind::Space => Payload::Space(
            PolyNormedSpace::new(n, vertices).or_else(|e| parse_err(*ln, e.to_string()))?,
        ),
    };
    Ok((FinStructure::new(ids, payload).or_else(|e| parse_err(*ln, e.to_string()))?, k))
}

/// Ranks from `lt` pairs whose transitive closure is a strict linear order.
fn ranks_from_pairs(n: usize, pairs: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut less = vec![false; n * n];
    for &(a, b) in pairs {
        if a == b {
            return None;
        }
        less[a * n + b] = true;
    }
    for m in 0..n {
        for a in 0..n {
            if less[a * n + m] {
                for b in 0..n {
                    if less[m * n + b] {
                        less[a * n + b] = true;
                    }
                }
            }
        }
    }
    let mut ranks = vec![0; n];
    for a in 0..n {
        if less[a * n + a] {
            return None;
        }
        for b in a + 1..n {
            if less[a * n + b] == less[b * n + a] {
                return None;
            }
        }
        ranks[a] = (0..n).filter(|&b| less[b * n + a]).count();
    }
    Some(ranks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_text_round_trip() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let s = FinStructure::graph(g).with_ids(vec![4, 7, 9]).unwrap();
        let text = s.to_text();
        assert_eq!(text, "graph 3\nids 4 7 9\nedge 4 7\nedge 7 9\n");
        assert_eq!(FinStructure::parse(&text).unwrap(), s);
    }

    #[test]
    fn order_from_unsorted_pairs() {
        let s = FinStructure::parse("linorder 3\nlt 2 0\nlt 0 1\n").unwrap();
        assert_eq!(s.as_order().unwrap(), &[1, 2, 0]);
        assert_eq!(s.to_text(), "linorder 3\nlt 2 0\nlt 0 1\n");
    }

    #[test]
    fn rejects_cyclic_order() {
        assert!(FinStructure::parse("linorder 2\nlt 0 1\nlt 1 0\n").is_err());
        assert!(FinStructure::parse("linorder 3\nlt 0 1\n").is_err());
    }

    #[test]
    fn rejects_bad_header() {
        assert!(matches!(
            FinStructure::parse("hypergraph 2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(FinStructure::parse("graph 2\nedge 0 0\n").is_err());
        assert!(FinStructure::parse("graph 2\nedge 0 5\n").is_err());
    }

    #[test]
    fn tree_round_trip_with_levels() {
        let text = "tree 3\nparent 0 1\nparent 0 2\nlevel 2 1 0\n";
        let s = FinStructure::parse(text).unwrap();
        assert_eq!(s.to_text(), text);
        assert_eq!(s.as_tree().unwrap().level(2), Level { omega: 1, fin: 0 });
    }

    #[test]
    fn space_round_trip() {
        let text = "pnspace 2\nvertex 1 0\nvertex -1 0\nvertex 0 1/2\nvertex 0 -1/2\n";
        let s = FinStructure::parse(text).unwrap();
        assert_eq!(s.to_text(), text);
    }
}
