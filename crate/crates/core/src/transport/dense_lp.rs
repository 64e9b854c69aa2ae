//! Dense two-phase simplex over exact scalars, for small cross-check problems.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimises `c·x` subject to `A x = b`, `x >= 0`, using Bland's rule throughout.
pub fn solve_lp<S: Scalar>(a: &[Vec<S>], b: &[S], c: &[S]) -> Result<(S, Vec<S>)> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::Structural("constraint matrix shape mismatch".into()));
    }
    // tableau [A | I | b] with rows sign-normalised so that b >= 0
    let width = n + m + 1;
    let mut t: Vec<Vec<S>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<S> = a[i].iter().map(|v| if flip { -v.clone() } else { v.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { S::one() } else { S::zero() }));
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let phase1: Vec<S> = (0..n + m).map(|j| if j < n { S::zero() } else { S::one() }).collect();
    run(&mut t, &mut basis, &phase1, n + m)?;
    let infeasibility = objective(&t, &basis, &phase1);
    if infeasibility.is_positive() {
        return Err(Error::Structural("linear program is infeasible".into()));
    }
    // drive zero-level artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= n {
            match (0..n).find(|&j| !t[i][j].is_zero()) {
                Some(j) => pivot(&mut t, &mut basis, i, j),
                None => {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut phase2: Vec<S> = c.to_vec();
    phase2.extend((0..m).map(|_| S::zero()));
    run(&mut t, &mut basis, &phase2, n)?;
    let mut x = vec![S::zero(); n];
    for (row, &j) in t.iter().zip(&basis) {
        if j < n {
            x[j] = row[width - 1].clone();
        }
    }
    Ok((objective(&t, &basis, &phase2), x))
}

fn objective<S: Scalar>(t: &[Vec<S>], basis: &[usize], cost: &[S]) -> S {
    let last = t.first().map_or(0, |r| r.len() - 1);
    t.iter()
        .zip(basis)
        .fold(S::zero(), |acc, (row, &j)| acc + cost[j].clone() * row[last].clone())
}

fn pivot<S: Scalar>(t: &mut [Vec<S>], basis: &mut [usize], r: usize, col: usize) {
    let p = t[r][col].clone();
    for v in t[r].iter_mut() {
        *v = v.clone() / p.clone();
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[col].is_zero() {
            continue;
        }
        let f = row[col].clone();
        for (v, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
    }
    basis[r] = col;
}

/// Primal simplex on columns `0..allowed`.
fn run<S: Scalar>(t: &mut [Vec<S>], basis: &mut [usize], cost: &[S], allowed: usize) -> Result<()> {
    let last = match t.first() {
        Some(r) => r.len() - 1,
        None => return Ok(()),
    };
    let cap = 50_000;
    for _ in 0..cap {
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let z = t.iter().zip(basis.iter()).fold(S::zero(), |acc, (row, &bj)| {
                acc + cost[bj].clone() * row[j].clone()
            });
            (cost[j].clone() - z).is_negative()
        });
        let Some(j) = entering else { return Ok(()) };
        let mut best: Option<(usize, S)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j].is_positive() {
                let ratio = row[last].clone() / row[j].clone();
                let take = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if take {
                    best = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = best else {
            return Err(Error::Internal("linear program is unbounded".into()));
        };
        pivot(t, basis, r, j);
    }
    Err(Error::Internal("dense simplex exceeded its pivot budget".into()))
}

/// Unique solution of `A x = b` when the columns of `A` are independent.
pub fn solve_unique<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let p = (rank..m).find(|&i| !aug[i][col].is_zero())?;
        aug.swap(rank, p);
        let pv = aug[rank][col].clone();
        for v in aug[rank].iter_mut() {
            *v = v.clone() / pv.clone();
        }
        let prow = aug[rank].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i != rank && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v = v.clone() - f.clone() * pv.clone();
                }
            }
        }
        rank += 1;
    }
    if aug[rank..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    Some((0..n).map(|k| aug[k][n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + y + s = 4, x + 3y + t = 6
        let a = vec![vec![r(1), r(1), r(1), r(0)], vec![r(1), r(3), r(0), r(1)]];
        let (v, x) = solve_lp(&a, &[r(4), r(6)], &[r(-1), r(-2), r(0), r(0)]).unwrap();
        assert_eq!(v, Rational::from_i64(-5));
        assert_eq!(x[0], r(3));
        assert_eq!(x[1], r(1));
    }

    #[test]
    fn infeasible_and_redundant() {
        let a = vec![vec![r(1), r(1)], vec![r(1), r(1)]];
        assert!(solve_lp(&a, &[r(1), r(2)], &[r(1), r(1)]).is_err());
        let (v, _) = solve_lp(&a, &[r(1), r(1)], &[r(2), r(1)]).unwrap();
        assert_eq!(v, r(1));
    }

    #[test]
    fn unique_solutions() {
        let a = vec![vec![r(1), r(1)], vec![r(1), r(-1)], vec![r(2), r(0)]];
        assert_eq!(solve_unique(&a, &[r(3), r(1), r(4)]), Some(vec![r(2), r(1)]));
        assert_eq!(solve_unique(&a, &[r(3), r(1), r(5)]), None);
        let dep = vec![vec![r(1), r(2)], vec![r(2), r(4)]];
        assert_eq!(solve_unique(&dep, &[r(1), r(2)]), None);
    }
}
