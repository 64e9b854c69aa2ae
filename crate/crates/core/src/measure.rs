//! Finitely supported probability measures on the line.

use crate::error::{Error, Result};
use crate::piecewise::{merge_breakpoints, PiecewiseConstantFn};
use crate::scalar::{sum, Rho, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<S> {
    atoms: Vec<S>,
    weights: Vec<S>,
}

/// Outcome of comparing two measures in the stochastic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StochasticOrder {
    Equal,
    /// left `<=_st` right
    Less,
    /// left `>=_st` right
    Greater,
    Incomparable,
}

impl<S: Scalar> DiscreteMeasure<S> {
    /// Validates sorted distinct atoms, positive weights and unit mass.
    pub fn new(atoms: Vec<S>, weights: Vec<S>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure("need as many weights as atoms, at least one".into()));
        }
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMeasure("atoms must be sorted and distinct".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidMeasure(format!("non-positive weight {w}")));
        }
        let total = sum(weights.iter().cloned());
        if total != S::one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms, weights })
    }

    /// Sorts, merges equal atoms and drops zero weights before validating.
    pub fn from_pairs(mut pairs: Vec<(S, S)>) -> Result<Self> {
        if let Some((_, w)) = pairs.iter().find(|(_, w)| w.is_negative()) {
            return Err(Error::InvalidMeasure(format!("negative weight {w}")));
        }
        pairs.retain(|(_, w)| !w.is_zero());
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable scalars"));
        let mut atoms: Vec<S> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<S> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            if atoms.last() == Some(&x) {
                let last = weights.last_mut().unwrap();
                *last = last.clone() + w;
            } else {
                atoms.push(x);
                weights.push(w);
            }
        }
        Self::new(atoms, weights)
    }

    pub fn dirac(x: S) -> Self {
        Self { atoms: vec![x], weights: vec![S::one()] }
    }

    /// Weighted mixture `Σ c_i η_i`; coefficients must sum to one.
    pub fn mixture(parts: &[(S, &DiscreteMeasure<S>)]) -> Result<Self> {
        let pairs = parts
            .iter()
            .flat_map(|(c, m)| m.iter().map(move |(x, w)| (x.clone(), c.clone() * w.clone())))
            .collect();
        Self::from_pairs(pairs)
    }

    pub fn atoms(&self) -> &[S] {
        &self.atoms
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &S)> {
        self.atoms.iter().zip(&self.weights)
    }

    pub fn weight_of(&self, x: &S) -> S {
        self.iter().find(|(a, _)| *a == x).map_or(S::zero(), |(_, w)| w.clone())
    }

    /// `0, w_1, w_1 + w_2, …, 1` (last entry pinned to one).
    pub fn cumulative(&self) -> Vec<S> {
        let mut out = vec![S::zero()];
        let mut acc = S::zero();
        for w in &self.weights[..self.weights.len() - 1] {
            acc = acc + w.clone();
            out.push(acc.clone());
        }
        out.push(S::one());
        out
    }

    /// `F(x) = η((-∞, x])`.
    pub fn cdf(&self, x: &S) -> S {
        sum(self.iter().filter(|(a, _)| *a <= x).map(|(_, w)| w.clone()))
    }

    /// `F(x-) = η((-∞, x))`.
    pub fn cdf_left(&self, x: &S) -> S {
        sum(self.iter().filter(|(a, _)| *a < x).map(|(_, w)| w.clone()))
    }

    /// Left-continuous quantile function on `(0, 1]`.
    pub fn quantile(&self) -> PiecewiseConstantFn<S> {
        PiecewiseConstantFn::new(self.cumulative(), self.atoms.clone()).expect("positive weights")
    }

    pub fn mean(&self) -> S {
        sum(self.iter().map(|(x, w)| x.clone() * w.clone()))
    }

    pub fn abs_moment(&self, rho: Rho) -> Result<S> {
        self.iter().try_fold(S::zero(), |acc, (x, w)| Ok(acc + x.abs_pow(rho)? * w.clone()))
    }

    /// `u_η(x) = ∫ |x - y| η(dy)`.
    pub fn potential(&self, x: &S) -> S {
        sum(self.iter().map(|(y, w)| (x.clone() - y.clone()).abs() * w.clone()))
    }

    /// `self <=_cx other`, decided on potentials at the union of atoms.
    pub fn convex_order(&self, other: &Self) -> bool {
        self.convex_order_violation(other).is_none()
    }

    /// First point where the convex order fails, `None` if it holds.
    pub fn convex_order_violation(&self, other: &Self) -> Option<String> {
        if self.mean() != other.mean() {
            return Some(format!("means differ: {} vs {}", self.mean(), other.mean()));
        }
        let pts = merge_breakpoints(&self.atoms, &other.atoms);
        pts.into_iter().find_map(|x| {
            let (a, b) = (self.potential(&x), other.potential(&x));
            (a > b).then(|| format!("potential at {x}: {a} > {b}"))
        })
    }

    pub fn stochastic_order(&self, other: &Self) -> StochasticOrder {
        let d = self.quantile().sub(&other.quantile()).expect("both on (0,1]");
        let less = d.values().iter().any(|v| v.is_negative());
        let greater = d.values().iter().any(|v| v.is_positive());
        match (less, greater) {
            (false, false) => StochasticOrder::Equal,
            (true, false) => StochasticOrder::Less,
            (false, true) => StochasticOrder::Greater,
            (true, true) => StochasticOrder::Incomparable,
        }
    }

    /// `W_ρ^ρ` through the quantile formula.
    pub fn wasserstein_pow(&self, other: &Self, rho: Rho) -> Result<S> {
        let d = self.quantile().sub(&other.quantile())?;
        let total = d
            .pieces()
            .try_fold(S::zero(), |acc, (a, b, v)| Ok(acc + v.abs_pow(rho)? * (b.clone() - a.clone())));
        total
    }

    pub fn wasserstein(&self, other: &Self, rho: Rho) -> Result<f64> {
        Ok(self.wasserstein_pow(other, rho)?.root(rho))
    }

    /// Image of Lebesgue on `(lo, hi]` under the quantile, as unnormalised pairs.
    pub fn restrict_levels(&self, lo: &S, hi: &S) -> Vec<(S, S)> {
        let cum = self.cumulative();
        let mut out = Vec::new();
        for (i, x) in self.atoms.iter().enumerate() {
            let a = cum[i].max_of(lo);
            let b = cum[i + 1].min_of(hi);
            if a < b {
                out.push((x.clone(), b - a));
            }
        }
        out
    }

    pub fn map_atoms(&self, f: impl Fn(&S) -> S) -> Result<Self> {
        Self::from_pairs(self.iter().map(|(x, w)| (f(x), w.clone())).collect())
    }

    pub fn min_atom(&self) -> &S {
        &self.atoms[0]
    }

    pub fn max_atom(&self) -> &S {
        &self.atoms[self.atoms.len() - 1]
    }
}
