//! Finite-dimensional spaces with polyhedral norms, exact arithmetic.
//!
//! A space is `Q^d` whose unit ball is the convex hull of a finite symmetric
//! vertex list spanning `Q^d`. Linear maps are matrices acting on columns.

pub mod linalg;
pub mod lp;

use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
pub use linalg::{Matrix, Q};
use linalg::{dot, neg, rank, solve, subsets};
use lp::{minimize, LpOutcome};

pub fn parse_rational(s: &str) -> Option<Q> {
    let q = Q::from_str(s).ok()?;
    Some(q)
}

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyNormedSpace {
    dim: usize,
    vertices: Vec<Vec<Q>>,
}

impl PolyNormedSpace {
    /// The list must be closed under negation and span `Q^dim`.
    pub fn new(dim: usize, vertices: Vec<Vec<Q>>) -> Result<Self> {
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!("vertices must have {dim} coordinates")));
        }
        if vertices.iter().any(|v| !vertices.contains(&neg(v))) {
            return Err(Error::InvalidStructure("vertex list is not symmetric".into()));
        }
        if rank(&vertices, dim) != dim {
            return Err(Error::InvalidStructure("vertices do not span the space".into()));
        }
        Ok(PolyNormedSpace { dim, vertices })
    }

    /// Symmetrise a list of points (each point and its negative).
    pub fn from_generators(dim: usize, points: Vec<Vec<Q>>) -> Result<Self> {
        let mut vs: Vec<Vec<Q>> = Vec::new();
        for p in points {
            if p.iter().all(|x| x.is_zero()) {
                continue;
            }
            let m = neg(&p);
            if !vs.contains(&p) {
                vs.push(p);
                vs.push(m);
            }
        }
        PolyNormedSpace::new(dim, vs)
    }

    /// ℓ∞ on `Q^d`: vertices are all sign vectors.
    pub fn sup_norm(dim: usize) -> Self {
        let mut vs = Vec::new();
        for mask in 0..(1usize << dim) {
            vs.push((0..dim).map(|i| if mask >> i & 1 == 1 { -q(1) } else { q(1) }).collect());
        }
        PolyNormedSpace::new(dim, vs).expect("sign vectors span")
    }

    /// ℓ1 on `Q^d`.
    pub fn cross_polytope(dim: usize) -> Self {
        let mut vs = Vec::new();
        for i in 0..dim {
            for s in [q(1), -q(1)] {
                let mut v = vec![Q::zero(); dim];
                v[i] = s;
                vs.push(v);
            }
        }
        PolyNormedSpace::new(dim, vs).expect("unit vectors span")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<Q>] {
        &self.vertices
    }

    /// Drop vertex pairs lying in the hull of the rest.
    pub fn pruned(&self) -> Self {
        let mut keep = self.vertices.clone();
        let mut i = 0;
        while i < keep.len() {
            let v = keep[i].clone();
            let others: Vec<Vec<Q>> = keep.iter().filter(|w| **w != v && **w != neg(&v)).cloned().collect();
            let redundant = rank(&others, self.dim) == self.dim
                && matches!(gauge(&others, &v), Some(g) if g <= Q::one());
            if redundant {
                keep.retain(|w| *w != v && *w != neg(&v));
            } else {
                i += 1;
            }
        }
        PolyNormedSpace {
            dim: self.dim,
            vertices: keep,
        }
    }

    /// Facet functionals `a` with `B = {x : a · x ≤ 1 for all a}`.
    pub fn facets(&self) -> Vec<Vec<Q>> {
        let mut out: Vec<Vec<Q>> = Vec::new();
        if self.dim == 0 {
            return out;
        }
        let ones = vec![Q::one(); self.dim];
        for s in subsets(self.vertices.len(), self.dim) {
            let m: Vec<Vec<Q>> = s.iter().map(|&i| self.vertices[i].clone()).collect();
            let Some(a) = solve(&m, &ones) else { continue };
            if self.vertices.iter().all(|v| dot(&a, v) <= Q::one()) && !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }
}

/// Minkowski functional of `conv(points ∪ -points)` (points spanning).
fn gauge(points: &[Vec<Q>], x: &[Q]) -> Option<Q> {
    let dim = x.len();
    let mut cols: Vec<Vec<Q>> = Vec::new();
    for p in points {
        cols.push(p.clone());
        cols.push(neg(p));
    }
    let a: Vec<Vec<Q>> = (0..dim).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    let c = vec![Q::one(); cols.len()];
    match minimize(&c, &a, x) {
        LpOutcome::Optimal { value, .. } => Some(value),
        _ => None,
    }
}

/// `‖x‖ = min { Σ s_i : Σ s_i v_i = x, s ≥ 0 }` over the vertices `v_i`.
pub fn minkowski(space: &PolyNormedSpace, x: &[Q]) -> Result<Q> {
    if x.len() != space.dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} in a space of dimension {}",
            x.len(),
            space.dim
        )));
    }
    if space.dim == 0 {
        return Ok(Q::zero());
    }
    let a: Vec<Vec<Q>> = (0..space.dim)
        .map(|i| space.vertices.iter().map(|v| v[i].clone()).collect())
        .collect();
    let c = vec![Q::one(); space.vertices.len()];
    match minimize(&c, &a, x) {
        LpOutcome::Optimal { value, .. } => Ok(value),
        other => Err(Error::InvalidStructure(format!("norm program ended {other:?}"))),
    }
}

/// Operator norm is at most one.
pub fn is_contraction(f: &Matrix, from: &PolyNormedSpace, to: &PolyNormedSpace) -> Result<bool> {
    check_shape(f, from, to)?;
    for v in from.vertices() {
        if minkowski(to, &f.apply(v))? > Q::one() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_shape(f: &Matrix, from: &PolyNormedSpace, to: &PolyNormedSpace) -> Result<()> {
    if f.cols() != from.dim() || f.rows() != to.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix between dimensions {} and {}",
            f.rows(),
            f.cols(),
            from.dim(),
            to.dim()
        )));
    }
    Ok(())
}

/// Checks `‖f z‖ = ‖z‖` for all `z`: `f` maps the unit ball into the unit
/// ball, and every vertex of the preimage of the unit ball has norm ≤ 1.
pub fn isometry_violation(f: &Matrix, from: &PolyNormedSpace, to: &PolyNormedSpace) -> Result<Option<String>> {
    check_shape(f, from, to)?;
    if from.dim() == 0 {
        return Ok(None);
    }
    if f.rank() != from.dim() {
        return Ok(Some("map is not injective".into()));
    }
    for v in from.vertices() {
        let n = minkowski(to, &f.apply(v))?;
        if n > Q::one() {
            return Ok(Some(format!("vertex {} is stretched to norm {n}", fmt_vec(v))));
        }
    }
    let ft = f.transpose();
    let constraints: Vec<Vec<Q>> = to.facets().iter().map(|a| ft.apply(a)).collect();
    let ones = vec![Q::one(); from.dim()];
    for s in subsets(constraints.len(), from.dim()) {
        let m: Vec<Vec<Q>> = s.iter().map(|&i| constraints[i].clone()).collect();
        let Some(w) = solve(&m, &ones) else { continue };
        if constraints.iter().all(|a| dot(a, &w) <= Q::one()) {
            let n = minkowski(from, &w)?;
            if n > Q::one() {
                return Ok(Some(format!("vector {} of norm {n} is shrunk to norm 1", fmt_vec(&w))));
            }
        }
    }
    Ok(None)
}

pub fn fmt_vec(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Result of amalgamating two isometric embeddings `f: Z → X`, `g: Z → Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormAmalgam {
    pub w: PolyNormedSpace,
    /// `X → W`.
    pub f_prime: Matrix,
    /// `Y → W`.
    pub g_prime: Matrix,
    /// Basis (columns) of the complement of `f(Z)` used for `X`.
    pub x_complement: Vec<Vec<Q>>,
    pub y_complement: Vec<Vec<Q>>,
}

fn greedy_complement(f: &Matrix) -> Vec<Vec<Q>> {
    let n = f.rows();
    let mut cols: Vec<Vec<Q>> = (0..f.cols()).map(|j| f.column(j)).collect();
    let mut out = Vec::new();
    for k in 0..n {
        let mut e = vec![Q::zero(); n];
        e[k] = Q::one();
        cols.push(e.clone());
        if rank(&cols, n) == cols.len() {
            out.push(e);
        } else {
            cols.pop();
        }
    }
    out
}

/// Coordinates `x ↦ (z, c)` with `x = f z + K c`, as a matrix.
fn split_coordinates(f: &Matrix, complement: &[Vec<Q>]) -> Result<Matrix> {
    let n = f.rows();
    let mut cols: Vec<Vec<Q>> = (0..f.cols()).map(|j| f.column(j)).collect();
    cols.extend(complement.iter().cloned());
    Matrix::from_columns(n, &cols)
        .inverse()
        .ok_or_else(|| Error::DimensionMismatch("image and complement do not split the space".into()))
}

fn build_amalgam(
    z: &PolyNormedSpace,
    x: &PolyNormedSpace,
    y: &PolyNormedSpace,
    f: &Matrix,
    g: &Matrix,
    xc: Vec<Vec<Q>>,
    yc: Vec<Vec<Q>>,
) -> Result<NormAmalgam> {
    let (dz, dx1, dy1) = (z.dim(), xc.len(), yc.len());
    let dw = dz + dx1 + dy1;
    let sx = split_coordinates(f, &xc)?;
    let sy = split_coordinates(g, &yc)?;
    let mut fp = Matrix::zeros(dw, x.dim());
    let mut gp = Matrix::zeros(dw, y.dim());
    for j in 0..x.dim() {
        for i in 0..dz + dx1 {
            fp[(i, j)] = sx[(i, j)].clone();
        }
    }
    for j in 0..y.dim() {
        for i in 0..dz {
            gp[(i, j)] = sy[(i, j)].clone();
        }
        for i in 0..dy1 {
            gp[(dz + dx1 + i, j)] = sy[(dz + i, j)].clone();
        }
    }
    let mut pts: Vec<Vec<Q>> = x.vertices().iter().map(|v| fp.apply(v)).collect();
    pts.extend(y.vertices().iter().map(|v| gp.apply(v)));
    let w = PolyNormedSpace::from_generators(dw, pts)?.pruned();
    let out = NormAmalgam {
        w,
        f_prime: fp,
        g_prime: gp,
        x_complement: xc,
        y_complement: yc,
    };
    if out.f_prime.mul(f) != out.g_prime.mul(g) {
        return Err(Error::CoconeMismatch("amalgam square does not commute".into()));
    }
    for (name, m, s) in [("X", &out.f_prime, x), ("Y", &out.g_prime, y)] {
        if let Some(why) = isometry_violation(m, s, &out.w)? {
            return Err(Error::NotIsometric(format!("leg from {name}: {why}")));
        }
    }
    Ok(out)
}

fn require_isometry(name: &str, f: &Matrix, from: &PolyNormedSpace, to: &PolyNormedSpace) -> Result<()> {
    match isometry_violation(f, from, to)? {
        None => Ok(()),
        Some(why) => Err(Error::NotIsometric(format!("{name}: {why}"))),
    }
}

/// Amalgamate isometric embeddings `f: Z → X`, `g: Z → Y` in
/// `W = Z ⊕ X₁ ⊕ Y₁` with unit ball `conv(B_X ∪ B_Y)`.
pub fn amalgamate_norms(
    z: &PolyNormedSpace,
    x: &PolyNormedSpace,
    y: &PolyNormedSpace,
    f: &Matrix,
    g: &Matrix,
) -> Result<NormAmalgam> {
    require_isometry("f", f, z, x)?;
    require_isometry("g", g, z, y)?;
    build_amalgam(z, x, y, f, g, greedy_complement(f), greedy_complement(g))
}

/// Pushout of left-invertible isometric embeddings; the complements are the
/// kernels of the given left inverses.
pub fn pushout_norms(
    z: &PolyNormedSpace,
    x: &PolyNormedSpace,
    y: &PolyNormedSpace,
    f: &Matrix,
    g: &Matrix,
    pf: &Matrix,
    pg: &Matrix,
) -> Result<NormAmalgam> {
    require_isometry("f", f, z, x)?;
    require_isometry("g", g, z, y)?;
    for (name, e, p, big) in [("f", f, pf, x), ("g", g, pg, y)] {
        if p.mul(e) != Some(Matrix::identity(z.dim())) {
            return Err(Error::NotLeftInvertible(format!("{name}: given map is not a left inverse")));
        }
        if !is_contraction(p, big, z)? {
            return Err(Error::NotLeftInvertible(format!("{name}: left inverse has norm above 1")));
        }
    }
    build_amalgam(z, x, y, f, g, pf.nullspace(), pg.nullspace())
}

/// The unique `h: W → U` with `h ∘ f' = p` and `h ∘ g' = q`, checked to
/// have norm at most one.
pub fn pushout_mediator(
    am: &NormAmalgam,
    f: &Matrix,
    x: &PolyNormedSpace,
    y: &PolyNormedSpace,
    u: &PolyNormedSpace,
    p: &Matrix,
    q_map: &Matrix,
) -> Result<Matrix> {
    check_shape(p, x, u)?;
    check_shape(q_map, y, u)?;
    let pf = p.mul(f).ok_or_else(|| Error::DimensionMismatch("p after f".into()))?;
    let kx = Matrix::from_columns(x.dim(), &am.x_complement);
    let ky = Matrix::from_columns(y.dim(), &am.y_complement);
    let blocks = [
        pf,
        p.mul(&kx).unwrap_or_else(|| Matrix::zeros(u.dim(), 0)),
        q_map.mul(&ky).unwrap_or_else(|| Matrix::zeros(u.dim(), 0)),
    ];
    let h = Matrix::hstack(&[&blocks[0], &blocks[1], &blocks[2]])
        .ok_or_else(|| Error::DimensionMismatch("mediator blocks".into()))?;
    if h.mul(&am.f_prime).as_ref() != Some(p) || h.mul(&am.g_prime).as_ref() != Some(q_map) {
        return Err(Error::CoconeMismatch("p ∘ f differs from q ∘ g".into()));
    }
    let joint = Matrix::hstack(&[&am.f_prime, &am.g_prime]).expect("same height");
    if joint.rank() != am.w.dim() {
        return Err(Error::UniqueMediatorMissing("legs do not span W".into()));
    }
    if !is_contraction(&h, &am.w, u)? {
        return Err(Error::UniqueMediatorMissing("mediator has norm above 1".into()));
    }
    Ok(h)
}

/// One of the eight isometries of the sup-norm plane, as a signed
/// permutation matrix, with the data showing it does not extend `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkCandidate {
    pub matrix: Matrix,
    pub image_of_one: Vec<Q>,
    pub extends: bool,
    /// `v = S⁻¹(1_b)`.
    pub v: Vec<Q>,
    /// Coordinate where `|v|` attains 1, and the sign there.
    pub t: usize,
    pub alpha: Q,
    /// `|α + v(t)|`, a lower bound for `‖α·1 + v‖` that would have to equal
    /// `‖α·1_a + 1_b‖ = 1` if `S` extended `T`.
    pub bound: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkReport {
    pub candidates: Vec<CkCandidate>,
    pub extending: usize,
    pub blocking_value: Q,
}

/// On `C({a, b})` with the sup norm, `T: span{1} → C({a,b})`, `1 ↦ 1_a`, is
/// isometric but no isometry of the plane extends it.
pub fn ck_nonextension_check() -> CkReport {
    let one = vec![q(1), q(1)];
    let ind_a = vec![q(1), q(0)];
    let ind_b = vec![q(0), q(1)];
    let plane = PolyNormedSpace::sup_norm(2);
    let mut candidates = Vec::new();
    for swap in [false, true] {
        for s0 in [q(1), -q(1)] {
            for s1 in [q(1), -q(1)] {
                let mut m = Matrix::zeros(2, 2);
                let (c0, c1) = if swap { (1, 0) } else { (0, 1) };
                m[(0, c0)] = s0.clone();
                m[(1, c1)] = s1.clone();
                debug_assert!(isometry_violation(&m, &plane, &plane).ok().flatten().is_none());
                let image_of_one = m.apply(&one);
                let inv = m.inverse().expect("signed permutation");
                let v = inv.apply(&ind_b);
                let t = (0..2).find(|&i| v[i].abs() == q(1)).expect("unit vector");
                let alpha = v[t].clone();
                let bound = (&alpha + &v[t]).abs();
                candidates.push(CkCandidate {
                    extends: image_of_one == ind_a,
                    matrix: m,
                    image_of_one,
                    v,
                    t,
                    alpha,
                    bound,
                });
            }
        }
    }
    let extending = candidates.iter().filter(|c| c.extends).count();
    let blocking_value = candidates.iter().map(|c| c.bound.clone()).min().unwrap_or_else(Q::zero);
    CkReport {
        candidates,
        extending,
        blocking_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    fn line() -> PolyNormedSpace {
        PolyNormedSpace::new(1, vec![vec![q(1)], vec![-q(1)]]).unwrap()
    }

    #[test]
    fn sup_norm_values() {
        let s = PolyNormedSpace::sup_norm(2);
        assert_eq!(minkowski(&s, &[r(1, 2), -q(1)]).unwrap(), q(1));
        assert_eq!(minkowski(&s, &[q(0), q(0)]).unwrap(), q(0));
        let c = PolyNormedSpace::cross_polytope(2);
        assert_eq!(minkowski(&c, &[r(1, 2), -q(1)]).unwrap(), r(3, 2));
        assert!(minkowski(&c, &[q(1)]).is_err());
    }

    #[test]
    fn rejects_asymmetric_or_degenerate_balls() {
        assert!(PolyNormedSpace::new(1, vec![vec![q(1)], vec![-q(2)]]).is_err());
        assert!(PolyNormedSpace::new(2, vec![vec![q(1), q(0)], vec![-q(1), q(0)]]).is_err());
    }

    #[test]
    fn facets_of_square() {
        let f = PolyNormedSpace::sup_norm(2).facets();
        assert_eq!(f.len(), 4);
        assert!(f.contains(&vec![q(0), q(1)]));
    }

    #[test]
    fn line_amalgam_over_zero_is_the_cross_polytope() {
        let z = PolyNormedSpace::new(0, vec![]).unwrap();
        let f = Matrix::zeros(1, 0);
        let am = amalgamate_norms(&z, &line(), &line(), &f, &f).unwrap();
        let mut vs = am.w.vertices().to_vec();
        vs.sort();
        let mut expect = PolyNormedSpace::cross_polytope(2).vertices().to_vec();
        expect.sort();
        assert_eq!(vs, expect);
    }

    #[test]
    fn non_isometric_leg_is_rejected() {
        let z = line();
        let x = PolyNormedSpace::sup_norm(2);
        let f = Matrix::from_rows(2, 1, vec![vec![q(2)], vec![q(0)]]).unwrap();
        let g = Matrix::from_rows(2, 1, vec![vec![q(1)], vec![q(0)]]).unwrap();
        assert!(matches!(amalgamate_norms(&z, &x, &x, &f, &g), Err(Error::NotIsometric(_))));
    }

    #[test]
    fn diagonal_in_sup_plane_is_isometric() {
        let f = Matrix::from_rows(2, 1, vec![vec![q(1)], vec![q(1)]]).unwrap();
        assert_eq!(isometry_violation(&f, &line(), &PolyNormedSpace::sup_norm(2)).unwrap(), None);
        let c = PolyNormedSpace::cross_polytope(2);
        assert!(isometry_violation(&f, &line(), &c).unwrap().is_some());
    }

    #[test]
    fn sup_plane_nonextension() {
        let rep = ck_nonextension_check();
        assert_eq!(rep.candidates.len(), 8);
        assert_eq!(rep.extending, 0);
        assert_eq!(rep.blocking_value, q(2));
    }
}
