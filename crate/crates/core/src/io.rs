//! Text files: bundles of named objects and arrows, sequence files and
//! limit files.
//!
//! A bundle is a list of blocks:
//!
//! ```text
//! # key=value header lines are comments
//! category finset-maps
//! object z
//! set 1
//! object x
//! set 2
//! map f z x 0
//! rp p z x
//! e: 0
//! r: 0 0
//! matrix m
//! linmap 2 1
//! row 1
//! row 0
//! point v 1/2 -1
//! maxorder 3 4
//! ```
//!
//! A sequence file is a bundle with a `seq <category> <length>` line,
//! objects named `0 … n-1` and `bond ξ ξ+1 <ids>` lines.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use crate::category::Category;
use crate::concrete::Concrete;
use crate::error::{parse_err, Error, Result};
use crate::generic::LimitStructure;
use crate::morphism::Morphism;
use crate::normed::linalg::{Matrix, Q};
use crate::normed::parse_rational;
use crate::retracts::{RPArrow, Retractive};
use crate::sequences::InductiveSequence;
use crate::structure::{parse_structure_at, tokenize, FinStructure, Lines};

#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub category: Option<String>,
    pub declared_len: Option<usize>,
    pub objects: Vec<(String, Arc<FinStructure>)>,
    /// `(name, source, target, map)`.
    pub maps: Vec<(String, String, String, Morphism)>,
    pub rps: Vec<(String, RPArrow)>,
    pub matrices: BTreeMap<String, Matrix>,
    pub points: BTreeMap<String, Vec<Q>>,
    pub maxorder: Option<Vec<u32>>,
    pub provenance: Option<Vec<usize>>,
}

impl Bundle {
    pub fn object(&self, name: &str) -> Result<&Arc<FinStructure>> {
        self.objects
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("no object named `{name}`"),
            })
    }

    pub fn map(&self, name: &str) -> Result<&Morphism> {
        self.maps
            .iter()
            .find(|m| m.0 == name)
            .map(|m| &m.3)
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("no map named `{name}`"),
            })
    }

    pub fn rp(&self, name: &str) -> Result<&RPArrow> {
        self.rps
            .iter()
            .find(|m| m.0 == name)
            .map(|m| &m.1)
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("no retractive pair named `{name}`"),
            })
    }

    pub fn matrix(&self, name: &str) -> Result<&Matrix> {
        self.matrices.get(name).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("no matrix named `{name}`"),
        })
    }

    pub fn point(&self, name: &str) -> Result<&Vec<Q>> {
        self.points.get(name).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("no point named `{name}`"),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = tokenize(text);
        let mut b = Bundle::default();
        let mut k = 0;
        while k < lines.len() {
            let (ln, toks) = (&lines[k].0, &lines[k].1);
            let ln = *ln;
            let need = |n: usize| -> Result<()> {
                if toks.len() < n {
                    parse_err(ln, format!("`{}` needs {} arguments", toks[0], n - 1))
                } else {
                    Ok(())
                }
            };
            match toks[0] {
                "category" => {
                    need(2)?;
                    b.category = Some(toks[1].to_string());
                    k += 1;
                }
                "seq" => {
                    need(3)?;
                    b.category = Some(toks[1].to_string());
                    b.declared_len = Some(toks[2].parse().map_err(|_| Error::Parse {
                        line: ln,
                        msg: "sequence length must be an integer".into(),
                    })?);
                    k += 1;
                }
                "object" => {
                    need(2)?;
                    let name = toks[1].to_string();
                    if b.objects.iter().any(|(n, _)| *n == name) {
                        return parse_err(ln, format!("duplicate object `{name}`"));
                    }
                    let (s, next) = parse_structure_at(&lines, k + 1)?;
                    b.objects.push((name, Arc::new(s)));
                    k = next;
                }
                "bond" | "map" => {
                    let named = toks[0] == "map";
                    let off = usize::from(named);
                    need(3 + off)?;
                    let (src, tgt) = (toks[1 + off], toks[2 + off]);
                    let name = if named { toks[1].to_string() } else { format!("{src}>{tgt}") };
                    let m = Morphism::parse_map(b.object(src)?.clone(), b.object(tgt)?.clone(), &toks[3 + off..])
                        .map_err(|e| at_line(ln, e))?;
                    b.maps.push((name, src.to_string(), tgt.to_string(), m));
                    k += 1;
                }
                "rp" => {
                    need(4)?;
                    let (x, y) = (b.object(toks[2])?.clone(), b.object(toks[3])?.clone());
                    let (e, r) = match (lines.get(k + 1), lines.get(k + 2)) {
                        (Some((_, e)), Some((_, r))) if e[0] == "e:" && r[0] == "r:" => (e, r),
                        _ => return parse_err(ln, "`rp` must be followed by `e:` and `r:` lines"),
                    };
                    let p = RPArrow::parse(x, y, &e[1..], &r[1..]).map_err(|e| at_line(ln, e))?;
                    b.rps.push((toks[1].to_string(), p));
                    k += 3;
                }
                "matrix" => {
                    need(2)?;
                    let (m, next) = parse_matrix_at(&lines, k + 1)?;
                    b.matrices.insert(toks[1].to_string(), m);
                    k = next;
                }
                "point" => {
                    need(2)?;
                    let v = toks[2..].iter().map(|s| rational(ln, s)).collect::<Result<Vec<_>>>()?;
                    b.points.insert(toks[1].to_string(), v);
                    k += 1;
                }
                "maxorder" => {
                    let ids = toks[1..]
                        .iter()
                        .map(|s| {
                            s.parse().map_err(|_| Error::Parse {
                                line: ln,
                                msg: format!("bad id `{s}`"),
                            })
                        })
                        .collect::<Result<Vec<u32>>>()?;
                    b.maxorder = Some(ids);
                    k += 1;
                }
                "provenance" => {
                    let st = toks[1..]
                        .iter()
                        .map(|s| {
                            s.parse().map_err(|_| Error::Parse {
                                line: ln,
                                msg: format!("bad stage `{s}`"),
                            })
                        })
                        .collect::<Result<Vec<usize>>>()?;
                    b.provenance = Some(st);
                    k += 1;
                }
                other => return parse_err(ln, format!("unknown keyword `{other}`")),
            }
        }
        Ok(b)
    }
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { line: 0, msg } => Error::Parse { line, msg },
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            msg: other.to_string(),
        },
    }
}

fn rational(line: usize, s: &str) -> Result<Q> {
    parse_rational(s).ok_or(Error::Parse {
        line,
        msg: format!("bad rational `{s}`"),
    })
}

/// `linmap r c` followed by `r` lines `row q…`.
pub fn parse_matrix_at(lines: &Lines<'_>, start: usize) -> Result<(Matrix, usize)> {
    let Some((ln, head)) = lines.get(start) else {
        return parse_err(0, "missing `linmap` header");
    };
    if head[0] != "linmap" || head.len() != 3 {
        return parse_err(*ln, "expected `linmap <rows> <cols>`");
    }
    let dims: Vec<usize> = head[1..]
        .iter()
        .map(|s| s.parse().map_err(|_| Error::Parse { line: *ln, msg: "bad dimension".into() }))
        .collect::<Result<_>>()?;
    let (r, c) = (dims[0], dims[1]);
    let mut rows = Vec::new();
    for i in 0..r {
        let Some((l, toks)) = lines.get(start + 1 + i) else {
            return parse_err(*ln, format!("expected {r} rows"));
        };
        if toks[0] != "row" || toks.len() != c + 1 {
            return parse_err(*l, format!("expected `row` with {c} entries"));
        }
        rows.push(toks[1..].iter().map(|s| rational(*l, s)).collect::<Result<Vec<_>>>()?);
    }
    let m = Matrix::from_rows(r, c, rows).expect("row lengths checked");
    Ok((m, start + 1 + r))
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let lines = tokenize(text);
    let (m, next) = parse_matrix_at(&lines, 0)?;
    if next < lines.len() {
        return parse_err(lines[next].0, "trailing input after matrix");
    }
    Ok(m)
}

/// Reads a sequence file over a concrete category.
pub fn parse_sequence(text: &str) -> Result<(Concrete, InductiveSequence<Concrete>)> {
    let b = Bundle::parse(text)?;
    let name = b.category.clone().ok_or(Error::Parse {
        line: 0,
        msg: "missing `seq <category> <length>` line".into(),
    })?;
    let cat = Concrete::by_name(&name).ok_or_else(|| Error::Parse {
        line: 0,
        msg: format!("unknown category `{name}`"),
    })?;
    let n = b.declared_len.unwrap_or(b.objects.len());
    if b.objects.len() != n {
        return parse_err(0, format!("declared {n} objects, found {}", b.objects.len()));
    }
    let mut objects = Vec::new();
    for xi in 0..n {
        objects.push(b.object(&xi.to_string())?.clone());
    }
    let mut gens = Vec::new();
    for xi in 0..n.saturating_sub(1) {
        let key = (xi.to_string(), (xi + 1).to_string());
        let m = b
            .maps
            .iter()
            .find(|m| m.1 == key.0 && m.2 == key.1)
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("missing `bond {xi} {}`", xi + 1),
            })?;
        gens.push(m.3.clone());
    }
    let seq = InductiveSequence::from_generators(&cat, objects, gens)?;
    Ok((cat, seq))
}

pub fn write_sequence<C>(cat: &C, seq: &InductiveSequence<C>, header: &str) -> Result<String>
where
    C: Category<Ob = Arc<FinStructure>, Arr = Morphism>,
{
    let mut out = String::new();
    if !header.is_empty() {
        let _ = writeln!(out, "{header}");
    }
    let _ = writeln!(out, "seq {} {}", cat.name(), seq.len());
    for (xi, ob) in seq.objects().iter().enumerate() {
        let _ = writeln!(out, "object {xi}");
        ob.write_text(&mut out);
    }
    for xi in 0..seq.len().saturating_sub(1) {
        let _ = writeln!(out, "bond {xi} {} {}", xi + 1, seq.bond(xi, xi + 1)?.map_text());
    }
    Ok(out)
}

pub fn write_rp_sequence(rk: &Retractive, seq: &InductiveSequence<Retractive>, header: &str) -> Result<String> {
    let mut out = String::new();
    if !header.is_empty() {
        let _ = writeln!(out, "{header}");
    }
    let _ = writeln!(out, "category {}", rk.name());
    for (xi, ob) in seq.objects().iter().enumerate() {
        let _ = writeln!(out, "object {xi}");
        ob.write_text(&mut out);
    }
    for xi in 0..seq.len() {
        for eta in xi + 1..seq.len() {
            let _ = writeln!(out, "rp r{xi}_{eta} {xi} {eta}");
            out.push_str(&seq.bond(xi, eta)?.to_text());
        }
    }
    Ok(out)
}

impl LimitStructure {
    /// The union followed by a `provenance` line (stage per element, in
    /// the order of the element list).
    pub fn to_text(&self, header: &str) -> String {
        let mut out = String::new();
        if !header.is_empty() {
            let _ = writeln!(out, "{header}");
        }
        let _ = writeln!(out, "object limit");
        self.structure.write_text(&mut out);
        let st: Vec<String> = self.provenance.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "provenance {}", st.join(" "));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generic::{build_fraisse, BuildConfig, OnePointExtensions};

    #[test]
    fn sequence_file_reads_back() {
        let cat = Concrete::fingraph();
        let cfg = BuildConfig {
            steps: 5,
            seed: 4,
            ..BuildConfig::default()
        };
        let b = build_fraisse(&cat, &OnePointExtensions, &cfg).unwrap();
        let text = write_sequence(&cat, &b.seq, &cfg.header("fingraph")).unwrap();
        let (cat2, seq2) = parse_sequence(&text).unwrap();
        assert_eq!(cat2.name(), "fingraph");
        assert_eq!(seq2, b.seq);
        assert_eq!(write_sequence(&cat2, &seq2, &cfg.header("fingraph")).unwrap(), text);
    }

    #[test]
    fn bundle_blocks() {
        let text = "category finset-maps\nobject z\nset 1\nobject x\nset 2\nids 0 5\nrp f z x\ne: 0\nr: 0 0\nmap g x z 0 0\nmatrix m\nlinmap 2 1\nrow 1/2\nrow -1\npoint v 1 2/3\nmaxorder 5 0\n";
        let b = Bundle::parse(text).unwrap();
        assert_eq!(b.rp("f").unwrap().r().map(), &[0, 0]);
        assert_eq!(b.map("g").unwrap().map(), &[0, 0]);
        assert_eq!(b.matrix("m").unwrap().rows(), 2);
        assert_eq!(b.point("v").unwrap().len(), 2);
        assert_eq!(b.maxorder, Some(vec![5, 0]));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = Bundle::parse("object a\nset 1\nmap f a b 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = Bundle::parse("object a\nset 2\nobject b\nset 1\nrp f b a\ne: 0\nr: 0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }));
        assert!(matches!(Bundle::parse("frob 1\n"), Err(Error::Parse { line: 1, .. })));
    }
}
