//! Finite optimal transport and adapted Wasserstein distances.

mod adapted;
pub mod dense_lp;
mod lifted;
mod vertices;

pub use adapted::{
    adapted_wasserstein, aw_rho_equivalence_check, kernel_cost_matrix, nested_wasserstein_bruteforce, AwResult,
    EquivalenceReport, NESTED_ORACLE_LIMIT,
};
pub use lifted::{lifted_adapted_wasserstein, lifted_barycentre_bound, LiftedAw, LiftedAwOptions};
pub use vertices::{martingale_vertices, VERTEX_ENUMERATION_LIMIT};

use crate::coupling::DiscreteCoupling;
use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

/// Optimal plan of a transportation problem, stored as a dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan<S> {
    pub rows: Vec<S>,
    pub cols: Vec<S>,
    pub flows: Vec<Vec<S>>,
}

impl<S: Scalar> TransportPlan<S> {
    /// Cells carrying positive mass.
    pub fn support(&self) -> Vec<(usize, usize, S)> {
        let mut out = Vec::new();
        for (i, row) in self.flows.iter().enumerate() {
            for (j, f) in row.iter().enumerate() {
                if f.is_positive() {
                    out.push((i, j, f.clone()));
                }
            }
        }
        out
    }

    pub fn cost(&self, cost: &[Vec<S>]) -> S {
        sum(self.support().into_iter().map(|(i, j, f)| f * cost[i][j].clone()))
    }

    /// The plan as a coupling between the labelled row and column atoms.
    pub fn to_coupling(&self, row_atoms: &[S], col_atoms: &[S]) -> Result<DiscreteCoupling<S>> {
        DiscreteCoupling::new(
            self.support()
                .into_iter()
                .map(|(i, j, f)| (row_atoms[i].clone(), col_atoms[j].clone(), f))
                .collect(),
        )
    }
}

const BLAND_AFTER_DEGENERATE: usize = 64;

/// Exact transportation simplex (network simplex on the bipartite graph).
///
/// Starts from the north-west corner tree, prices with Dantzig's rule and
/// switches to Bland's rule after a run of degenerate pivots.
pub fn solve_ot<S: Scalar>(cost: &[Vec<S>], rows: &[S], cols: &[S]) -> Result<(S, TransportPlan<S>)> {
    let (m, n) = (rows.len(), cols.len());
    if m == 0 || n == 0 {
        return Err(Error::Structural("empty marginal".into()));
    }
    if cost.len() != m || cost.iter().any(|r| r.len() != n) {
        return Err(Error::Structural(format!("cost matrix is not {m}x{n}")));
    }
    if rows.iter().chain(cols).any(|w| w.is_negative()) {
        return Err(Error::Structural("negative marginal weight".into()));
    }
    let (rs, cs) = (sum(rows.iter().cloned()), sum(cols.iter().cloned()));
    if rs != cs {
        return Err(Error::Structural(format!("marginal masses differ: {rs} vs {cs}")));
    }

    let mut flow = vec![vec![S::zero(); n]; m];
    let mut basic = vec![vec![false; n]; m];
    {
        let (mut r, mut c) = (rows.to_vec(), cols.to_vec());
        let (mut i, mut j) = (0, 0);
        loop {
            let q = r[i].min_of(&c[j]).max_of(&S::zero());
            flow[i][j] = q.clone();
            basic[i][j] = true;
            r[i] = r[i].clone() - q.clone();
            c[j] = c[j].clone() - q;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || r[i].is_zero() {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let cap = 200 * (m + n) * (m + n) + 10_000;
    let mut degenerate_run = 0usize;
    let mut bland = false;
    for _ in 0..cap {
        // adjacency of the basis tree: rows are nodes 0..m, columns m..m+n
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + n];
        for i in 0..m {
            for j in 0..n {
                if basic[i][j] {
                    adj[i].push(m + j);
                    adj[m + j].push(i);
                }
            }
        }
        let mut pot: Vec<Option<S>> = vec![None; m + n];
        pot[0] = Some(S::zero());
        let mut stack = vec![0usize];
        while let Some(a) = stack.pop() {
            for &b in &adj[a] {
                if pot[b].is_none() {
                    let (i, j) = if a < m { (a, b - m) } else { (b, a - m) };
                    let pa = pot[a].clone().unwrap();
                    pot[b] = Some(cost[i][j].clone() - pa);
                    stack.push(b);
                }
            }
        }
        if pot.iter().any(|p| p.is_none()) {
            return Err(Error::Internal("basis is not a spanning tree".into()));
        }
        let pot: Vec<S> = pot.into_iter().map(Option::unwrap).collect();

        let mut entering: Option<(usize, usize, S)> = None;
        'price: for i in 0..m {
            for j in 0..n {
                if basic[i][j] {
                    continue;
                }
                let d = cost[i][j].clone() - pot[i].clone() - pot[m + j].clone();
                if d.is_negative() {
                    if bland {
                        entering = Some((i, j, d));
                        break 'price;
                    }
                    if entering.as_ref().is_none_or(|e| d < e.2) {
                        entering = Some((i, j, d));
                    }
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            let value = sum((0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| flow[i][j].clone() * cost[i][j].clone()));
            return Ok((value, TransportPlan { rows: rows.to_vec(), cols: cols.to_vec(), flows: flow }));
        };

        // tree path from column node ej back to row node ei
        let mut parent: Vec<Option<usize>> = vec![None; m + n];
        let mut seen = vec![false; m + n];
        seen[ei] = true;
        let mut queue = std::collections::VecDeque::from([ei]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    parent[b] = Some(a);
                    queue.push_back(b);
                }
            }
        }
        let mut cycle: Vec<(usize, usize)> = vec![(ei, ej)];
        let mut node = m + ej;
        while node != ei {
            let p = parent[node].ok_or_else(|| Error::Internal("entering cell closes no cycle".into()))?;
            cycle.push(if node < m { (node, p - m) } else { (p, node - m) });
            node = p;
        }
        let mut leave: Option<(usize, usize)> = None;
        for &(i, j) in cycle.iter().skip(1).step_by(2) {
            let better = match leave {
                None => true,
                Some((li, lj)) => flow[i][j] < flow[li][lj] || (flow[i][j] == flow[li][lj] && (i, j) < (li, lj)),
            };
            if better {
                leave = Some((i, j));
            }
        }
        let (li, lj) = leave.expect("cycle has a backward cell");
        let theta = flow[li][lj].clone();
        for (k, &(i, j)) in cycle.iter().enumerate() {
            flow[i][j] = if k % 2 == 0 {
                flow[i][j].clone() + theta.clone()
            } else {
                flow[i][j].clone() - theta.clone()
            };
        }
        flow[li][lj] = S::zero();
        basic[li][lj] = false;
        basic[ei][ej] = true;
        if theta.is_zero() {
            degenerate_run += 1;
            if degenerate_run > BLAND_AFTER_DEGENERATE {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }
    Err(Error::Internal("transport simplex exceeded its pivot budget".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DiscreteMeasure;
    use crate::scalar::{Rational, Rho};

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn abs_cost(a: &[Rational], b: &[Rational]) -> Vec<Vec<Rational>> {
        a.iter().map(|x| b.iter().map(|y| (x.clone() - y.clone()).abs()).collect()).collect()
    }

    #[test]
    fn trivial_and_identity() {
        let (v, _) = solve_ot(&[vec![r(3, 2)]], &[r(1, 1)], &[r(1, 1)]).unwrap();
        assert_eq!(v, r(3, 2));
        let mu = DiscreteMeasure::from_pairs(vec![(r(-1, 1), r(1, 4)), (r(0, 1), r(1, 2)), (r(1, 1), r(1, 4))]).unwrap();
        let c = abs_cost(mu.atoms(), mu.atoms());
        let (v, plan) = solve_ot(&c, mu.weights(), mu.weights()).unwrap();
        assert_eq!(v, r(0, 1));
        assert!(plan.support().iter().all(|(i, j, _)| i == j));
    }

    #[test]
    fn example_a_w1() {
        let mu = DiscreteMeasure::from_pairs(vec![(r(-1, 1), r(1, 4)), (r(0, 1), r(1, 2)), (r(1, 1), r(1, 4))]).unwrap();
        let nu = DiscreteMeasure::from_pairs((0..4).map(|i| (r([-2, -1, 1, 2][i], 1), r(1, 4))).collect()).unwrap();
        let (v, plan) = solve_ot(&abs_cost(mu.atoms(), nu.atoms()), mu.weights(), nu.weights()).unwrap();
        assert_eq!(v, mu.wasserstein_pow(&nu, Rho::ONE).unwrap());
        assert!(plan.support().len() < 3 + 4);
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(matches!(
            solve_ot(&[vec![r(1, 1)]], &[r(1, 1)], &[r(1, 2)]),
            Err(Error::Structural(_))
        ));
    }
}
