use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::structure::FinStructure;

/// A map between finite structures, stored as target positions indexed by
/// source position. Which maps count as arrows is decided by the category.
#[derive(Clone, Debug)]
pub struct Morphism {
    source: Arc<FinStructure>,
    target: Arc<FinStructure>,
    map: Vec<usize>,
}

pub(crate) fn same_object(a: &Arc<FinStructure>, b: &Arc<FinStructure>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Morphism {
    pub fn new(source: Arc<FinStructure>, target: Arc<FinStructure>, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.size() {
            return Err(Error::InvalidStructure(format!(
                "map has {} entries for a source of size {}",
                map.len(),
                source.size()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&t| t >= target.size()) {
            return Err(Error::InvalidStructure(format!("map value {bad} out of range")));
        }
        Ok(Morphism { source, target, map })
    }

    pub(crate) fn new_unchecked(source: Arc<FinStructure>, target: Arc<FinStructure>, map: Vec<usize>) -> Self {
        debug_assert_eq!(map.len(), source.size());
        Morphism { source, target, map }
    }

    pub fn identity(ob: &Arc<FinStructure>) -> Self {
        Morphism {
            source: ob.clone(),
            target: ob.clone(),
            map: (0..ob.size()).collect(),
        }
    }

    pub fn source(&self) -> &Arc<FinStructure> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FinStructure> {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &Morphism) -> Result<Morphism> {
        if !same_object(&f.target, &self.source) {
            return Err(Error::MismatchedEndpoints(format!(
                "cod {} differs from dom {}",
                f.target, self.source
            )));
        }
        Ok(Morphism {
            source: f.source.clone(),
            target: self.target.clone(),
            map: f.map.iter().map(|&i| self.map[i]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.size()];
        self.map.iter().all(|&t| !std::mem::replace(&mut seen[t], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.size()];
        for &t in &self.map {
            seen[t] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_identity(&self) -> bool {
        same_object(&self.source, &self.target) && self.map.iter().enumerate().all(|(i, &t)| i == t)
    }

    /// Positions of the target hit by the map.
    pub fn image(&self) -> Vec<bool> {
        let mut seen = vec![false; self.target.size()];
        for &t in &self.map {
            seen[t] = true;
        }
        seen
    }

    /// Target ids in source order.
    pub fn map_text(&self) -> String {
        let ids: Vec<String> = self.map.iter().map(|&t| self.target.ids()[t].to_string()).collect();
        ids.join(" ")
    }

    pub fn parse_map(source: Arc<FinStructure>, target: Arc<FinStructure>, toks: &[&str]) -> Result<Self> {
        if toks.len() != source.size() {
            return Err(Error::InvalidStructure(format!(
                "expected {} target ids, found {}",
                source.size(),
                toks.len()
            )));
        }
        let mut map = Vec::with_capacity(toks.len());
        for t in toks {
            let id: u32 = t
                .parse()
                .map_err(|_| Error::InvalidStructure(format!("bad element id `{t}`")))?;
            map.push(
                target
                    .position(id)
                    .ok_or_else(|| Error::InvalidStructure(format!("unknown target id {id}")))?,
            );
        }
        Morphism::new(source, target, map)
    }
}

impl PartialEq for Morphism {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map && same_object(&self.source, &other.source) && same_object(&self.target, &other.target)
    }
}

impl Eq for Morphism {}

impl Hash for Morphism {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.map.hash(state);
        self.target.size().hash(state);
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} (", self.source, self.target)?;
        for (i, &t) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}>{}", self.source.ids()[i], self.target.ids()[t])?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_and_endpoints() {
        let a = Arc::new(FinStructure::set(1));
        let b = Arc::new(FinStructure::set(2));
        let c = Arc::new(FinStructure::set(3));
        let f = Morphism::new(a.clone(), b.clone(), vec![1]).unwrap();
        let g = Morphism::new(b.clone(), c.clone(), vec![2, 0]).unwrap();
        assert_eq!(g.after(&f).unwrap().map(), &[0]);
        assert!(matches!(f.after(&g), Err(Error::MismatchedEndpoints(_))));
        assert!(Morphism::new(a, c, vec![3]).is_err());
    }

    #[test]
    fn map_text_uses_ids() {
        let a = Arc::new(FinStructure::set(2));
        let b = Arc::new(FinStructure::set(2).with_ids(vec![5, 8]).unwrap());
        let f = Morphism::new(a.clone(), b.clone(), vec![1, 0]).unwrap();
        assert_eq!(f.map_text(), "8 5");
        assert_eq!(Morphism::parse_map(a, b, &["8", "5"]).unwrap(), f);
    }
}
