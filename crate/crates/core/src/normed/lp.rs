//! Two-phase primal simplex with Bland's rule over exact rationals.

use num_traits::{Signed, Zero};

use super::linalg::Q;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `m` rows of `width + 1` entries; the last is the right-hand side.
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.t[r][c].recip();
        for x in self.t[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let k = row[c].clone();
                for (d, s) in row.iter_mut().zip(&pivot_row) {
                    *d -= &k * s;
                }
            }
        }
        self.basis[r] = c;
    }

    fn reduced_cost(&self, cost: &[Q], j: usize) -> Q {
        let mut r = cost[j].clone();
        for (i, &b) in self.basis.iter().enumerate() {
            if !cost[b].is_zero() {
                r -= &cost[b] * &self.t[i][j];
            }
        }
        r
    }

    /// Minimise `cost · x` over columns `allowed`; false when unbounded.
    fn optimise(&mut self, cost: &[Q], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.width).find(|&j| allowed[j] && !self.basis.contains(&j) && self.reduced_cost(cost, j).is_negative());
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][c];
                if a.is_positive() {
                    let ratio = &self.t[i][self.width] / a;
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Minimise `c · x` subject to `a · x = b`, `x ≥ 0`.
pub fn minimize(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    let width = n + m;
    let mut t = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Q> = a[i].iter().map(|x| if flip { -x.clone() } else { x.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { Q::from_integer(1.into()) } else { Q::zero() }));
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        t.push(row);
    }
    let mut tab = Tableau {
        t,
        basis: (n..width).collect(),
        width,
    };
    let mut phase1 = vec![Q::zero(); width];
    for x in phase1.iter_mut().skip(n) {
        *x = Q::from_integer(1.into());
    }
    tab.optimise(&phase1, &vec![true; width]);
    let infeas: Q = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bv)| bv >= n)
        .fold(Q::zero(), |acc, (i, _)| acc + &tab.t[i][width]);
    if infeas.is_positive() {
        return LpOutcome::Infeasible;
    }
    // drive remaining artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n {
            match (0..n).find(|&j| !tab.t[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut cost = c.to_vec();
    cost.extend((0..m).map(|_| Q::zero()));
    let allowed: Vec<bool> = (0..width).map(|j| j < n).collect();
    if !tab.optimise(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.t[i][width].clone();
        }
    }
    let value = x.iter().zip(c).fold(Q::zero(), |acc, (xi, ci)| acc + xi * ci);
    LpOutcome::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn small_programs() {
        // min x + y, x + 2y = 3, x, y ≥ 0 → y = 3/2
        let out = minimize(&[q(1, 1), q(1, 1)], &[vec![q(1, 1), q(2, 1)]], &[q(3, 1)]);
        assert_eq!(
            out,
            LpOutcome::Optimal {
                value: q(3, 2),
                x: vec![q(0, 1), q(3, 2)]
            }
        );
        // x = -1 is infeasible with x ≥ 0
        assert_eq!(minimize(&[q(1, 1)], &[vec![q(1, 1)]], &[q(-1, 1)]), LpOutcome::Infeasible);
        // min -x, x - y = 0 is unbounded
        assert_eq!(
            minimize(&[q(-1, 1), q(0, 1)], &[vec![q(1, 1), q(-1, 1)]], &[q(0, 1)]),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn redundant_rows() {
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]];
        let out = minimize(&[q(1, 1), q(2, 1)], &a, &[q(1, 1), q(2, 1)]);
        assert!(matches!(out, LpOutcome::Optimal { value, .. } if value == q(1, 1)));
    }
}
