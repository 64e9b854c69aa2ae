//! Monotone matching of two step densities with equal mass.
//!
//! Level `ℓ` of `F_1 = ∫ f_1` is sent to level `ℓ` of `F_2 = ∫ f_2`, which realises
//! `F_2⁻¹ ∘ F_1` on the support of `f_1` as finitely many increasing affine maps.

use crate::error::{Error, Result};
use crate::piecewise::{merge_breakpoints, PiecewiseConstantFn};
use crate::scalar::Scalar;

/// `(u.0, u.1]` is sent affinely and increasingly onto `(v.0, v.1]`, carrying `mass`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchedPair<S> {
    pub u: (S, S),
    pub v: (S, S),
    pub mass: S,
}

impl<S: Scalar> MatchedPair<S> {
    /// Image of `t ∈ [u.0, u.1]`.
    pub fn forward(&self, t: &S) -> S {
        self.v.0.clone()
            + (t.clone() - self.u.0.clone()) * (self.v.1.clone() - self.v.0.clone())
                / (self.u.1.clone() - self.u.0.clone())
    }

    /// Preimage of `t ∈ [v.0, v.1]`.
    pub fn backward(&self, t: &S) -> S {
        self.u.0.clone()
            + (t.clone() - self.v.0.clone()) * (self.u.1.clone() - self.u.0.clone())
                / (self.v.1.clone() - self.v.0.clone())
    }
}

struct Run<S> {
    a: S,
    level_a: S,
    level_b: S,
    density: S,
}

fn runs<S: Scalar>(f: &PiecewiseConstantFn<S>) -> Vec<Run<S>> {
    let mut out = Vec::new();
    let mut level = S::zero();
    for (a, b, v) in f.pieces() {
        let next = level.clone() + v.clone() * (b.clone() - a.clone());
        if v.is_positive() {
            out.push(Run { a: a.clone(), level_a: level.clone(), level_b: next.clone(), density: v.clone() });
        }
        level = next;
    }
    out
}

/// Interval of positions whose cumulative level spans `(l0, l1]`, inside one run.
fn locate<S: Scalar>(rs: &[Run<S>], idx: &mut usize, l0: &S, l1: &S) -> Result<(S, S)> {
    while *idx < rs.len() && rs[*idx].level_b < *l1 {
        *idx += 1;
    }
    let r = rs.get(*idx).ok_or_else(|| Error::Internal("matching ran past the last run".into()))?;
    let end = r.a.clone() + (l1.clone() - r.level_a.clone()) / r.density.clone();
    let start = end.clone() - (l1.clone() - l0.clone()) / r.density.clone();
    Ok((start, end))
}

/// Matches `f1` onto `f2` (both nonnegative, equal total mass), splitting at `grid`.
pub fn monotone_matching<S: Scalar>(
    f1: &PiecewiseConstantFn<S>,
    f2: &PiecewiseConstantFn<S>,
    grid: &[S],
) -> Result<Vec<MatchedPair<S>>> {
    if f1.values().iter().chain(f2.values()).any(|v| v.is_negative()) {
        return Err(Error::Parameter("matching needs nonnegative densities".into()));
    }
    let (g1, g2) = (f1.refine(grid), f2.refine(grid));
    let (t1, t2) = (g1.integral(), g2.integral());
    if t1 != t2 {
        return Err(Error::Parameter(format!("matched densities carry different mass: {t1} vs {t2}")));
    }
    let (r1, r2) = (runs(&g1), runs(&g2));
    let mut l1: Vec<S> = r1.iter().flat_map(|r| [r.level_a.clone(), r.level_b.clone()]).collect();
    let mut l2: Vec<S> = r2.iter().flat_map(|r| [r.level_a.clone(), r.level_b.clone()]).collect();
    l1.dedup();
    l2.dedup();
    let levels = merge_breakpoints(&l1, &l2);
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    for w in levels.windows(2) {
        let u = locate(&r1, &mut i, &w[0], &w[1])?;
        let v = locate(&r2, &mut j, &w[0], &w[1])?;
        out.push(MatchedPair { u, v, mass: w[1].clone() - w[0].clone() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn example_b_levels() {
        let f1 = PiecewiseConstantFn::new(
            vec![r(0, 1), r(1, 3), r(1, 2), r(2, 3), r(1, 1)],
            vec![r(2, 1), r(0, 1), r(1, 1), r(0, 1)],
        )
        .unwrap();
        let f2 = PiecewiseConstantFn::new(
            vec![r(0, 1), r(1, 3), r(1, 2), r(2, 3), r(1, 1)],
            vec![r(0, 1), r(1, 1), r(0, 1), r(2, 1)],
        )
        .unwrap();
        let pairs = monotone_matching(&f1, &f2, &[]).unwrap();
        assert_eq!(
            pairs,
            vec![
                MatchedPair { u: (r(0, 1), r(1, 12)), v: (r(1, 3), r(1, 2)), mass: r(1, 6) },
                MatchedPair { u: (r(1, 12), r(1, 3)), v: (r(2, 3), r(11, 12)), mass: r(1, 2) },
                MatchedPair { u: (r(1, 2), r(2, 3)), v: (r(11, 12), r(1, 1)), mass: r(1, 6) },
            ]
        );
        assert_eq!(pairs[1].forward(&r(1, 6)), r(3, 4));
        assert_eq!(pairs[1].backward(&r(3, 4)), r(1, 6));
    }

    #[test]
    fn unequal_mass_is_rejected() {
        let f1 = PiecewiseConstantFn::constant(r(1, 1), r(0, 1), r(1, 1)).unwrap();
        let f2 = PiecewiseConstantFn::constant(r(2, 1), r(0, 1), r(1, 1)).unwrap();
        assert!(monotone_matching(&f1, &f2, &[]).is_err());
    }
}
