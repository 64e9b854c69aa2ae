//! Piecewise constant and piecewise affine functions on a bounded interval.
//!
//! Pieces are half-open `(b_{i-1}, b_i]`, evaluation is left-continuous, and the
//! value at the left end of the domain is stored separately for affine functions.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_breakpoints<S: Scalar>(b: &[S]) -> Result<()> {
    if b.len() < 2 {
        return Err(Error::Domain("need at least two breakpoints".into()));
    }
    if b.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("breakpoints must be strictly increasing".into()));
    }
    Ok(())
}

/// Sorted union of two breakpoint lists, deduplicated with scalar equality.
pub fn merge_breakpoints<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let mut out: Vec<S> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
            i += 1;
            a[i - 1].clone()
        } else {
            j += 1;
            b[j - 1].clone()
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}

/// Index of the piece `(b_{i-1}, b_i]` containing `u`; `u = b_0` maps to piece 0.
fn piece_index<S: Scalar>(b: &[S], u: &S) -> Result<usize> {
    if *u < b[0] || *u > b[b.len() - 1] {
        return Err(Error::Domain(format!(
            "{u} outside [{}, {}]",
            b[0],
            b[b.len() - 1]
        )));
    }
    let i = b.partition_point(|x| x < u);
    Ok(i.saturating_sub(1).min(b.len() - 2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstantFn<S> {
    breakpoints: Vec<S>,
    values: Vec<S>,
}

impl<S: Scalar> PiecewiseConstantFn<S> {
    pub fn new(breakpoints: Vec<S>, values: Vec<S>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::Domain("need one value per piece".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(c: S, a: S, b: S) -> Result<Self> {
        Self::new(vec![a, b], vec![c])
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn domain(&self) -> (S, S) {
        (self.breakpoints[0].clone(), self.breakpoints[self.breakpoints.len() - 1].clone())
    }

    /// `(a, b, value)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (&S, &S, &S)> {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (&w[0], &w[1], v))
    }

    pub fn eval(&self, u: &S) -> Result<S> {
        Ok(self.values[piece_index(&self.breakpoints, u)?].clone())
    }

    /// Same function on a finer partition containing `points` (those inside the domain).
    pub fn refine(&self, points: &[S]) -> Self {
        let (lo, hi) = self.domain();
        let mut extra: Vec<S> = points.iter().filter(|p| **p > lo && **p < hi).cloned().collect();
        extra.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let bp = merge_breakpoints(&self.breakpoints, &extra);
        let values = bp
            .windows(2)
            .map(|w| self.eval(&w[1]).expect("inside domain"))
            .collect();
        Self { breakpoints: bp, values }
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Self { breakpoints: self.breakpoints.clone(), values: self.values.iter().map(f).collect() }
    }

    /// Pointwise combination on the merged partition; domains must agree.
    pub fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        if self.domain() != other.domain() {
            return Err(Error::Domain("piecewise functions have different domains".into()));
        }
        let bp = merge_breakpoints(&self.breakpoints, &other.breakpoints);
        let values = bp
            .windows(2)
            .map(|w| Ok(f(&self.eval(&w[1])?, &other.eval(&w[1])?)))
            .collect::<Result<_>>()?;
        Ok(Self { breakpoints: bp, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn positive_part(&self) -> Self {
        self.map(|v| v.pos_part())
    }

    pub fn negative_part(&self) -> Self {
        self.map(|v| v.neg_part())
    }

    /// Merges adjacent pieces carrying equal values.
    pub fn simplify(&self) -> Self {
        let mut bp = vec![self.breakpoints[0].clone()];
        let mut vals: Vec<S> = Vec::new();
        for (_, b, v) in self.pieces() {
            if vals.last() == Some(v) {
                *bp.last_mut().unwrap() = b.clone();
            } else {
                vals.push(v.clone());
                bp.push(b.clone());
            }
        }
        Self { breakpoints: bp, values: vals }
    }

    /// `∫_lo^upper f`, with `lo` the left end of the domain.
    pub fn integral_to(&self, upper: &S) -> Result<S> {
        piece_index(&self.breakpoints, upper)?;
        let mut acc = S::zero();
        for (a, b, v) in self.pieces() {
            if a >= upper {
                break;
            }
            let end = b.min_of(upper);
            acc = acc + v.clone() * (end - a.clone());
        }
        Ok(acc)
    }

    pub fn integral(&self) -> S {
        self.integral_to(&self.domain().1).expect("right end is in the domain")
    }

    /// `∫_lo^upper f⁺`.
    pub fn integrate_positive_part(&self, upper: &S) -> Result<S> {
        self.positive_part().integral_to(upper)
    }

    /// Continuous antiderivative vanishing at the left end.
    pub fn antiderivative(&self) -> PiecewiseLinearFn<S> {
        let mut acc = S::zero();
        let mut vals = vec![acc.clone()];
        for (a, b, v) in self.pieces() {
            acc = acc + v.clone() * (b.clone() - a.clone());
            vals.push(acc.clone());
        }
        PiecewiseLinearFn::continuous(self.breakpoints.clone(), vals).expect("valid breakpoints")
    }
}

/// Affine on each piece, with possible jumps between pieces.
///
/// Piece `i` carries its right limit at `b_{i-1}` and its value at `b_i`;
/// `start` is the value at `b_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearFn<S> {
    breakpoints: Vec<S>,
    start: S,
    ends: Vec<(S, S)>,
}

impl<S: Scalar> PiecewiseLinearFn<S> {
    pub fn from_pieces(breakpoints: Vec<S>, start: S, ends: Vec<(S, S)>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        if ends.len() + 1 != breakpoints.len() {
            return Err(Error::Domain("need one affine piece per interval".into()));
        }
        Ok(Self { breakpoints, start, ends })
    }

    /// Continuous interpolant of `values` at `breakpoints`.
    pub fn continuous(breakpoints: Vec<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != breakpoints.len() {
            return Err(Error::Domain("need one value per breakpoint".into()));
        }
        let ends = values.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        Self::from_pieces(breakpoints, values[0].clone(), ends)
    }

    pub fn identity(a: S, b: S) -> Result<Self> {
        Self::continuous(vec![a.clone(), b.clone()], vec![a, b])
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    /// `(a, b, right limit at a, value at b)` per piece.
    pub fn pieces(&self) -> impl Iterator<Item = (&S, &S, &S, &S)> {
        self.breakpoints
            .windows(2)
            .zip(&self.ends)
            .map(|(w, (l, r))| (&w[0], &w[1], l, r))
    }

    pub fn domain(&self) -> (S, S) {
        (self.breakpoints[0].clone(), self.breakpoints[self.breakpoints.len() - 1].clone())
    }

    pub fn start_value(&self) -> &S {
        &self.start
    }

    pub fn end_value(&self) -> &S {
        &self.ends[self.ends.len() - 1].1
    }

    fn affine(&self, i: usize, t: &S) -> S {
        let (a, b) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
        let (l, r) = &self.ends[i];
        l.clone() + (r.clone() - l.clone()) * (t.clone() - a.clone()) / (b.clone() - a.clone())
    }

    pub fn eval(&self, t: &S) -> Result<S> {
        let i = piece_index(&self.breakpoints, t)?;
        if *t == self.breakpoints[0] {
            return Ok(self.start.clone());
        }
        Ok(self.affine(i, t))
    }

    /// Right limit at `t`, for `t` in `[b_0, b_k)`.
    pub fn eval_right(&self, t: &S) -> Result<S> {
        let (lo, hi) = self.domain();
        if *t < lo || *t >= hi {
            return Err(Error::Domain(format!("right limit at {t} outside [{lo}, {hi})")));
        }
        let i = self.breakpoints.partition_point(|x| x <= t) - 1;
        Ok(self.affine(i, t))
    }

    pub fn is_continuous(&self) -> bool {
        self.start == self.ends[0].0 && self.ends.windows(2).all(|w| w[0].1 == w[1].0)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.start <= self.ends[0].0
            && self.ends.iter().all(|(l, r)| l <= r)
            && self.ends.windows(2).all(|w| w[0].1 <= w[1].0)
    }

    /// `self(t) >= other(t)` for every `t`; both must be continuous on a common domain.
    pub fn dominates(&self, other: &Self) -> Result<bool> {
        if self.domain() != other.domain() || !self.is_continuous() || !other.is_continuous() {
            return Err(Error::Domain("dominance needs continuous functions on one domain".into()));
        }
        let bp = merge_breakpoints(&self.breakpoints, &other.breakpoints);
        for t in &bp {
            if self.eval(t)? < other.eval(t)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `F⁻¹(t) = inf{u : F(u) >= t}` on `[F(b_0), F(b_k)]`.
    pub fn generalized_left_inverse(&self) -> Result<Self> {
        if !self.is_continuous() {
            return Err(Error::Domain("inverse needs a continuous function".into()));
        }
        if !self.is_nondecreasing() {
            return Err(Error::Monotonicity("cannot invert a decreasing function".into()));
        }
        let mut bp = vec![self.start.clone()];
        let mut ends = Vec::new();
        for (a, b, l, r) in self.pieces() {
            if l < r {
                bp.push(r.clone());
                ends.push((a.clone(), b.clone()));
            }
        }
        if ends.is_empty() {
            return Err(Error::Domain("constant function has a one-point range".into()));
        }
        Self::from_pieces(bp, self.breakpoints[0].clone(), ends)
    }

    /// Shared driver of `compose` and `compose_pc`: splits every piece of `f` at
    /// the preimages of `g_bp` and hands each sub-piece to `emit`.
    fn split_by<T>(
        &self,
        g_bp: &[S],
        mut emit: impl FnMut(&S, &S, &S, &S) -> Result<T>,
    ) -> Result<(Vec<S>, Vec<T>)> {
        let (glo, ghi) = (&g_bp[0], &g_bp[g_bp.len() - 1]);
        let out_of_range = |v: &S| *v < *glo || *v > *ghi;
        if out_of_range(&self.start) {
            return Err(Error::Domain("range of inner function exceeds outer domain".into()));
        }
        let mut bp = vec![self.breakpoints[0].clone()];
        let mut out = Vec::new();
        for (a, b, l, r) in self.pieces() {
            if l > r {
                return Err(Error::Monotonicity("inner function must be nondecreasing on pieces".into()));
            }
            if out_of_range(l) || out_of_range(r) {
                return Err(Error::Domain("range of inner function exceeds outer domain".into()));
            }
            if l == r {
                out.push(emit(a, b, l, r)?);
                bp.push(b.clone());
                continue;
            }
            let slope_inv = (b.clone() - a.clone()) / (r.clone() - l.clone());
            let mut cur_u = a.clone();
            let mut cur_t = l.clone();
            for t in g_bp.iter().filter(|t| *t > l && *t < r) {
                let u = a.clone() + (t.clone() - l.clone()) * slope_inv.clone();
                out.push(emit(&cur_u, &u, &cur_t, t)?);
                bp.push(u.clone());
                cur_u = u;
                cur_t = t.clone();
            }
            out.push(emit(&cur_u, b, &cur_t, r)?);
            bp.push(b.clone());
        }
        Ok((bp, out))
    }

    /// `g ∘ f`; `f` must be nondecreasing on each piece.
    pub fn compose(g: &Self, f: &Self) -> Result<Self> {
        let (bp, ends) = f.split_by(&g.breakpoints, |_, _, s, t| {
            if s == t {
                let v = g.eval(s)?;
                Ok((v.clone(), v))
            } else {
                Ok((g.eval_right(s)?, g.eval(t)?))
            }
        })?;
        Self::from_pieces(bp, g.eval(&f.start)?, ends)
    }

    /// `g ∘ f` for a step function `g`; `f` must be nondecreasing on each piece.
    pub fn compose_pc(g: &PiecewiseConstantFn<S>, f: &Self) -> Result<PiecewiseConstantFn<S>> {
        let (bp, values) = f.split_by(g.breakpoints(), |_, _, _, t| g.eval(t))?;
        PiecewiseConstantFn::new(bp, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn example_a_diff() -> PiecewiseConstantFn<Rational> {
        let fmu = PiecewiseConstantFn::new(
            vec![r(0, 1), r(1, 4), r(3, 4), r(1, 1)],
            vec![r(-1, 1), r(0, 1), r(1, 1)],
        )
        .unwrap();
        let fnu = PiecewiseConstantFn::new(
            vec![r(0, 1), r(1, 4), r(1, 2), r(3, 4), r(1, 1)],
            vec![r(-2, 1), r(-1, 1), r(1, 1), r(2, 1)],
        )
        .unwrap();
        fmu.sub(&fnu).unwrap()
    }

    #[test]
    fn positive_part_integrals() {
        let d = example_a_diff();
        assert_eq!(d.integrate_positive_part(&r(1, 1)).unwrap(), r(1, 2));
        assert_eq!(d.integrate_positive_part(&r(1, 4)).unwrap(), r(1, 4));
        let zero = PiecewiseConstantFn::constant(r(0, 1), r(0, 1), r(1, 1)).unwrap();
        assert_eq!(zero.integrate_positive_part(&r(1, 1)).unwrap(), r(0, 1));
        assert!(d.integrate_positive_part(&r(3, 2)).is_err());
    }

    #[test]
    fn left_continuous_eval() {
        let d = example_a_diff();
        assert_eq!(d.eval(&r(1, 2)).unwrap(), r(1, 1));
        assert_eq!(d.eval(&r(0, 1)).unwrap(), r(1, 1));
        assert_eq!(d.eval(&r(51, 100)).unwrap(), r(-1, 1));
    }

    #[test]
    fn inverse_of_example_a_psi_minus() {
        let psi_minus = example_a_diff().negative_part().antiderivative();
        let inv = psi_minus.generalized_left_inverse().unwrap();
        assert_eq!(inv.domain(), (r(0, 1), r(1, 2)));
        for t in [r(1, 10), r(1, 4), r(1, 2)] {
            assert_eq!(inv.eval(&t).unwrap(), r(1, 2) + t.clone());
        }
        assert_eq!(inv.eval(&r(0, 1)).unwrap(), r(0, 1));
    }

    #[test]
    fn inverse_plateau_takes_left_value() {
        let f = PiecewiseLinearFn::continuous(
            vec![r(0, 1), r(1, 3), r(2, 3), r(1, 1)],
            vec![r(0, 1), r(1, 2), r(1, 2), r(1, 1)],
        )
        .unwrap();
        let inv = f.generalized_left_inverse().unwrap();
        assert_eq!(inv.eval(&r(1, 2)).unwrap(), r(1, 3));
        assert_eq!(inv.eval_right(&r(1, 2)).unwrap(), r(2, 3));
        let dec = PiecewiseLinearFn::continuous(vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]).unwrap();
        assert!(matches!(dec.generalized_left_inverse(), Err(Error::Monotonicity(_))));
    }

    #[test]
    fn example_a_phi_and_composition() {
        let d = example_a_diff();
        let psi_plus = d.positive_part().antiderivative();
        let psi_minus = d.negative_part().antiderivative();
        let phi = PiecewiseLinearFn::compose(&psi_minus.generalized_left_inverse().unwrap(), &psi_plus).unwrap();
        for u in [r(1, 8), r(1, 4), r(1, 2)] {
            assert_eq!(phi.eval(&u).unwrap(), u.clone() + r(1, 2));
        }
        let fnu = PiecewiseConstantFn::new(
            vec![r(0, 1), r(1, 4), r(1, 2), r(3, 4), r(1, 1)],
            vec![r(-2, 1), r(-1, 1), r(1, 1), r(2, 1)],
        )
        .unwrap();
        // restrict φ to (0, 1/2] where it is increasing
        let phi_half = PiecewiseLinearFn::continuous(vec![r(0, 1), r(1, 2)], vec![r(1, 2), r(1, 1)]).unwrap();
        let comp = PiecewiseLinearFn::compose_pc(&fnu, &phi_half).unwrap();
        assert_eq!(comp.eval(&r(1, 8)).unwrap(), r(1, 1));
        assert_eq!(comp.eval(&r(1, 4)).unwrap(), r(1, 1));
        assert_eq!(comp.eval(&r(3, 8)).unwrap(), r(2, 1));
        let id = PiecewiseLinearFn::identity(r(0, 1), r(1, 1)).unwrap();
        let same = PiecewiseLinearFn::compose(&id, &psi_plus).unwrap();
        for t in [r(0, 1), r(1, 3), r(3, 4), r(1, 1)] {
            assert_eq!(same.eval(&t).unwrap(), psi_plus.eval(&t).unwrap());
        }
        assert!(PiecewiseLinearFn::compose(&psi_minus.generalized_left_inverse().unwrap(), &id).is_err());
    }
}
