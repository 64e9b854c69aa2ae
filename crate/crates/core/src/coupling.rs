//! Couplings on the plane, their disintegrations, and lifted couplings indexed by
//! the quantile level `u ∈ (0, 1]`.

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::piecewise::{merge_breakpoints, PiecewiseConstantFn};
use crate::scalar::{sum, Scalar};

/// Joint law given by weighted points `(x, y, w)`, sorted by `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCoupling<S> {
    points: Vec<(S, S, S)>,
}

/// Disintegration `x ↦ π_x` over the atoms of the first marginal.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<S> {
    entries: Vec<(S, DiscreteMeasure<S>)>,
}

impl<S: Scalar> Kernel<S> {
    pub fn new(mut entries: Vec<(S, DiscreteMeasure<S>)>) -> Result<Self> {
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Structural("kernel has a repeated base point".into()));
        }
        Ok(Self { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &DiscreteMeasure<S>)> {
        self.entries.iter().map(|(x, m)| (x, m))
    }

    pub fn get(&self, x: &S) -> Option<&DiscreteMeasure<S>> {
        self.entries.iter().find(|(a, _)| a == x).map(|(_, m)| m)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<S: Scalar> DiscreteCoupling<S> {
    /// Sorts, merges repeated `(x, y)` and drops zero weights; total mass must be one.
    pub fn new(mut points: Vec<(S, S, S)>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.2.is_negative()) {
            return Err(Error::InvalidMeasure(format!("negative weight {}", p.2)));
        }
        points.retain(|p| !p.2.is_zero());
        points.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("comparable")
                .then(a.1.partial_cmp(&b.1).expect("comparable"))
        });
        let mut merged: Vec<(S, S, S)> = Vec::with_capacity(points.len());
        for (x, y, w) in points {
            match merged.last_mut() {
                Some(last) if last.0 == x && last.1 == y => last.2 = last.2.clone() + w,
                _ => merged.push((x, y, w)),
            }
        }
        if merged.is_empty() {
            return Err(Error::InvalidMeasure("coupling has no mass".into()));
        }
        let total = sum(merged.iter().map(|p| p.2.clone()));
        if total != S::one() {
            return Err(Error::InvalidMeasure(format!("coupling mass is {total}, not 1")));
        }
        Ok(Self { points: merged })
    }

    pub fn points(&self) -> &[(S, S, S)] {
        &self.points
    }

    pub fn first_marginal(&self) -> DiscreteMeasure<S> {
        DiscreteMeasure::from_pairs(self.points.iter().map(|p| (p.0.clone(), p.2.clone())).collect())
            .expect("coupling has unit mass")
    }

    pub fn second_marginal(&self) -> DiscreteMeasure<S> {
        DiscreteMeasure::from_pairs(self.points.iter().map(|p| (p.1.clone(), p.2.clone())).collect())
            .expect("coupling has unit mass")
    }

    pub fn product(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>) -> Self {
        let pts = mu
            .iter()
            .flat_map(|(x, a)| nu.iter().map(move |(y, b)| (x.clone(), y.clone(), a.clone() * b.clone())))
            .collect();
        Self::new(pts).expect("product of probability measures")
    }

    /// Image of Lebesgue under `u ↦ (F_μ⁻¹(u), F_ν⁻¹(u))`.
    pub fn hoeffding_frechet(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>) -> Self {
        let (qm, qn) = (mu.quantile(), nu.quantile());
        let bp = merge_breakpoints(qm.breakpoints(), qn.breakpoints());
        let pts = bp
            .windows(2)
            .map(|w| {
                let x = qm.eval(&w[1]).expect("in (0,1]");
                let y = qn.eval(&w[1]).expect("in (0,1]");
                (x, y, w[1].clone() - w[0].clone())
            })
            .collect();
        Self::new(pts).expect("partition of (0,1]")
    }

    pub fn disintegrate(&self) -> Kernel<S> {
        let mut entries: Vec<(S, Vec<(S, S)>)> = Vec::new();
        for (x, y, w) in &self.points {
            match entries.last_mut() {
                Some((lx, v)) if lx == x => v.push((y.clone(), w.clone())),
                _ => entries.push((x.clone(), vec![(y.clone(), w.clone())])),
            }
        }
        let entries = entries
            .into_iter()
            .map(|(x, v)| {
                let mass = sum(v.iter().map(|p| p.1.clone()));
                let m = DiscreteMeasure::from_pairs(v.into_iter().map(|(y, w)| (y, w / mass.clone())).collect())
                    .expect("normalised kernel");
                (x, m)
            })
            .collect();
        Kernel { entries }
    }

    /// `μ(dx) k_x(dy)`; the kernel must be defined exactly on the atoms of `μ`.
    pub fn reassemble(mu: &DiscreteMeasure<S>, kernel: &Kernel<S>) -> Result<Self> {
        if kernel.len() != mu.len() || mu.atoms().iter().zip(kernel.iter()).any(|(a, (x, _))| a != x) {
            return Err(Error::Structural("kernel domain differs from the support of the marginal".into()));
        }
        let pts = mu
            .iter()
            .zip(kernel.iter())
            .flat_map(|((x, w), (_, k))| k.iter().map(move |(y, v)| (x.clone(), y.clone(), w.clone() * v.clone())))
            .collect();
        Self::new(pts)
    }

    pub fn is_martingale(&self) -> bool {
        self.disintegrate().iter().all(|(x, k)| k.mean() == *x)
    }

    pub fn is_monge(&self) -> bool {
        self.disintegrate().iter().all(|(_, k)| k.len() == 1)
    }

    /// `Σ_x μ({x}) |mean(π_x) - x|`.
    pub fn barycentre_deviation(&self) -> S {
        let mu = self.first_marginal();
        sum(mu
            .iter()
            .zip(self.disintegrate().iter())
            .map(|((x, w), (_, k))| w.clone() * (k.mean() - x.clone()).abs()))
    }

    /// `u ↦ mean(π_{F_μ⁻¹(u)})` on the quantile partition of the first marginal.
    pub fn barycentre_fn(&self) -> PiecewiseConstantFn<S> {
        let mu = self.first_marginal();
        let means = self.disintegrate().iter().map(|(_, k)| k.mean()).collect();
        PiecewiseConstantFn::new(mu.cumulative(), means).expect("quantile partition")
    }

    /// For every atom `a`: `Σ_{x >= a} μ({x}) (x - mean(π_x)) <= 0`.
    pub fn bda_atom_scan(&self) -> bool {
        let mu = self.first_marginal();
        let kernel = self.disintegrate();
        let terms: Vec<S> = mu
            .iter()
            .zip(kernel.iter())
            .map(|((x, w), (_, k))| w.clone() * (x.clone() - k.mean()))
            .collect();
        let mut acc = S::zero();
        for t in terms.into_iter().rev() {
            acc = acc + t;
            if acc.is_positive() {
                return false;
            }
        }
        true
    }

    /// `Δ₊ >= Δ₋` with `Δ±(u) = ∫_0^u (F_μ⁻¹ - G)^±`.
    pub fn bda_delta_form(&self) -> bool {
        let diff = self.first_marginal().quantile().sub(&self.barycentre_fn()).expect("same partition");
        let dp = diff.positive_part().antiderivative();
        let dm = diff.negative_part().antiderivative();
        dp.dominates(&dm).expect("continuous on [0,1]")
    }

    /// Barycentre dispersion assumption; both characterisations are evaluated.
    pub fn barycentre_dispersion(&self) -> bool {
        let a = self.bda_atom_scan();
        // the two forms coincide only when both marginals share their mean
        if self.first_marginal().mean() == self.second_marginal().mean() {
            let b = self.bda_delta_form();
            assert_eq!(a, b, "atom-scan and Δ-form disagree on the dispersion assumption");
        }
        a
    }

    /// Segments on the quantile partition of `μ` carrying `π_{F_μ⁻¹(u)}`.
    pub fn lift(&self) -> LiftedCoupling<S> {
        let mu = self.first_marginal();
        let cum = mu.cumulative();
        let segments = self
            .disintegrate()
            .iter()
            .enumerate()
            .map(|(i, (x, k))| Segment { a: cum[i].clone(), b: cum[i + 1].clone(), x: x.clone(), kernel: k.clone() })
            .collect();
        LiftedCoupling { segments }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment<S> {
    pub a: S,
    pub b: S,
    pub x: S,
    pub kernel: DiscreteMeasure<S>,
}

impl<S: Scalar> Segment<S> {
    pub fn len(&self) -> S {
        self.b.clone() - self.a.clone()
    }
}

/// Partition of `(0, 1]` into segments `(a, b]`, each with a base point and kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedCoupling<S> {
    segments: Vec<Segment<S>>,
}

impl<S: Scalar> LiftedCoupling<S> {
    pub fn new(segments: Vec<Segment<S>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Structural("lifted coupling needs a segment".into()));
        }
        if !segments[0].a.is_zero() || segments[segments.len() - 1].b != S::one() {
            return Err(Error::Structural("segments must cover (0,1]".into()));
        }
        for s in &segments {
            if s.a >= s.b {
                return Err(Error::Structural(format!("empty segment ({}, {}]", s.a, s.b)));
            }
        }
        for w in segments.windows(2) {
            if w[0].b != w[1].a {
                return Err(Error::Structural("segments must be contiguous".into()));
            }
            if w[0].x > w[1].x {
                return Err(Error::Structural("base points must be nondecreasing in u".into()));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment<S>] {
        &self.segments
    }

    /// `(a, b] ↦ (F_μ⁻¹, δ_{F_ν⁻¹})` on the merged quantile partition.
    pub fn lifted_hoeffding_frechet(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>) -> Self {
        let (qm, qn) = (mu.quantile(), nu.quantile());
        let bp = merge_breakpoints(qm.breakpoints(), qn.breakpoints());
        let segments = bp
            .windows(2)
            .map(|w| Segment {
                a: w[0].clone(),
                b: w[1].clone(),
                x: qm.eval(&w[1]).expect("in (0,1]"),
                kernel: DiscreteMeasure::dirac(qn.eval(&w[1]).expect("in (0,1]")),
            })
            .collect();
        Self { segments }
    }

    /// `∫ δ_{x(u)} ⊗ p_u du`.
    pub fn collapse(&self) -> DiscreteCoupling<S> {
        let pts = self
            .segments
            .iter()
            .flat_map(|s| {
                let len = s.len();
                s.kernel.iter().map(move |(y, w)| (s.x.clone(), y.clone(), len.clone() * w.clone()))
            })
            .collect();
        DiscreteCoupling::new(pts).expect("segments cover (0,1]")
    }

    pub fn first_marginal(&self) -> DiscreteMeasure<S> {
        DiscreteMeasure::from_pairs(self.segments.iter().map(|s| (s.x.clone(), s.len())).collect())
            .expect("segments cover (0,1]")
    }

    pub fn second_marginal(&self) -> DiscreteMeasure<S> {
        self.collapse().second_marginal()
    }

    pub fn is_martingale(&self) -> bool {
        self.segments.iter().all(|s| s.kernel.mean() == s.x)
    }

    /// Splits segments at the given interior points.
    pub fn refine(&self, points: &[S]) -> Self {
        let mut segments = Vec::new();
        for s in &self.segments {
            let mut cur = s.a.clone();
            let mut inner: Vec<&S> = points.iter().filter(|p| **p > s.a && **p < s.b).collect();
            inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
            inner.dedup_by(|a, b| a == b);
            for p in inner {
                segments.push(Segment { a: cur, b: p.clone(), x: s.x.clone(), kernel: s.kernel.clone() });
                cur = p.clone();
            }
            segments.push(Segment { a: cur, b: s.b.clone(), x: s.x.clone(), kernel: s.kernel.clone() });
        }
        Self { segments }
    }

    /// Merges neighbouring segments with identical base point and kernel.
    pub fn simplify(&self) -> Self {
        let mut segments: Vec<Segment<S>> = Vec::new();
        for s in &self.segments {
            match segments.last_mut() {
                Some(l) if l.x == s.x && l.kernel == s.kernel => l.b = s.b.clone(),
                _ => segments.push(s.clone()),
            }
        }
        Self { segments }
    }

    pub fn breakpoints(&self) -> Vec<S> {
        let mut out = vec![self.segments[0].a.clone()];
        out.extend(self.segments.iter().map(|s| s.b.clone()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn m(pairs: &[(i64, i64, i64)]) -> DiscreteMeasure<Rational> {
        DiscreteMeasure::from_pairs(pairs.iter().map(|&(x, n, d)| (r(x, 1), r(n, d))).collect()).unwrap()
    }

    fn c(pts: &[(i64, i64, i64, i64)]) -> DiscreteCoupling<Rational> {
        DiscreteCoupling::new(pts.iter().map(|&(x, y, n, d)| (r(x, 1), r(y, 1), r(n, d))).collect()).unwrap()
    }

    fn example_a() -> (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>) {
        (m(&[(-1, 1, 4), (0, 1, 2), (1, 1, 4)]), m(&[(-2, 1, 4), (-1, 1, 4), (1, 1, 4), (2, 1, 4)]))
    }

    #[test]
    fn hf_examples() {
        let (mu, nu) = example_a();
        let hf = DiscreteCoupling::hoeffding_frechet(&mu, &nu);
        assert_eq!(hf, c(&[(-1, -2, 1, 4), (0, -1, 1, 4), (0, 1, 1, 4), (1, 2, 1, 4)]));
        let mu_b = m(&[(-2, 1, 2), (2, 1, 2)]);
        let nu_b = m(&[(-4, 1, 3), (-1, 1, 6), (1, 1, 6), (4, 1, 3)]);
        let hf_b = DiscreteCoupling::hoeffding_frechet(&mu_b, &nu_b);
        assert_eq!(hf_b, c(&[(-2, -4, 1, 3), (-2, -1, 1, 6), (2, 1, 1, 6), (2, 4, 1, 3)]));
        assert_eq!(hf_b.disintegrate().get(&r(-2, 1)).unwrap(), &m(&[(-4, 2, 3), (-1, 1, 3)]));
        let diag = DiscreteCoupling::hoeffding_frechet(&mu, &mu);
        assert!(diag.points().iter().all(|p| p.0 == p.1));
        assert!(diag.is_martingale() && diag.is_monge());
    }

    #[test]
    fn kernels_round_trip() {
        let (mu, nu) = example_a();
        let hf = DiscreteCoupling::hoeffding_frechet(&mu, &nu);
        let k = hf.disintegrate();
        assert_eq!(k.get(&r(0, 1)).unwrap(), &m(&[(-1, 1, 2), (1, 1, 2)]));
        assert_eq!(DiscreteCoupling::reassemble(&mu, &k).unwrap(), hf);
        let prod = DiscreteCoupling::product(&mu, &nu);
        assert!(prod.disintegrate().iter().all(|(_, k)| *k == nu));
        assert!(DiscreteCoupling::reassemble(&nu, &k).is_err());
        assert!(!hf.is_martingale());
        assert!(!hf.is_monge());
    }

    #[test]
    fn dispersion_examples() {
        let (mu, nu) = example_a();
        assert!(DiscreteCoupling::hoeffding_frechet(&mu, &nu).barycentre_dispersion());
        let anti = c(&[(-1, 2, 1, 2), (1, -2, 1, 2)]);
        assert!(!anti.bda_atom_scan());
        assert!(!anti.barycentre_dispersion());
        let mart = c(&[(-1, -2, 3, 8), (-1, 2, 1, 8), (1, -2, 1, 8), (1, 2, 3, 8)]);
        assert!(mart.is_martingale());
        assert!(mart.barycentre_dispersion());
    }

    #[test]
    fn lift_and_collapse() {
        let (mu, nu) = example_a();
        let hf = DiscreteCoupling::hoeffding_frechet(&mu, &nu);
        let lifted = hf.lift();
        assert_eq!(lifted.segments().len(), 3);
        assert_eq!(lifted.segments()[1].kernel, m(&[(-1, 1, 2), (1, 1, 2)]));
        assert_eq!(lifted.collapse(), hf);
        let dirac = DiscreteCoupling::product(&DiscreteMeasure::dirac(r(0, 1)), &nu).lift();
        assert_eq!(dirac.segments().len(), 1);
        assert_eq!(dirac.segments()[0].kernel, nu);
        let lhf = LiftedCoupling::lifted_hoeffding_frechet(&mu, &nu);
        assert_eq!(lhf.segments().len(), 4);
        assert_eq!(lhf.collapse(), hf);
        assert_eq!(lhf.refine(&[r(1, 8)]).simplify(), lhf);
    }
}
