//! Inverse transform martingale couplings and the `Q`-family of martingale
//! couplings built from a measure on pairs of quantile levels.

use crate::coupling::{DiscreteCoupling, LiftedCoupling, Segment};
use crate::error::{Error, Result};
use crate::matching::{monotone_matching, MatchedPair};
use crate::measure::DiscreteMeasure;
use crate::piecewise::{merge_breakpoints, PiecewiseConstantFn, PiecewiseLinearFn};
use crate::scalar::{sum, Scalar};

/// `Ψ±(u) = ∫_0^u (F_μ⁻¹ - F_ν⁻¹)^±` and the level matching `φ` between the
/// excess set `U⁺` and the deficit set `U⁻`.
#[derive(Clone, Debug)]
pub struct PsiSystem<S> {
    pub mu: DiscreteMeasure<S>,
    pub nu: DiscreteMeasure<S>,
    pub f_mu: PiecewiseConstantFn<S>,
    pub f_nu: PiecewiseConstantFn<S>,
    /// `F_μ⁻¹ - F_ν⁻¹` on the merged quantile partition.
    pub diff: PiecewiseConstantFn<S>,
    pub psi_plus: PiecewiseLinearFn<S>,
    pub psi_minus: PiecewiseLinearFn<S>,
    /// `Ψ₊(1) = Ψ₋(1)`.
    pub total: S,
    /// `φ` restricted to `U⁺`, one increasing affine map per pair.
    pub pairs: Vec<MatchedPair<S>>,
    pub phi: PiecewiseLinearFn<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    Zero,
}

fn intervals_where<S: Scalar>(f: &PiecewiseConstantFn<S>, keep: impl Fn(&S) -> bool) -> Vec<(S, S)> {
    let mut out: Vec<(S, S)> = Vec::new();
    for (a, b, v) in f.pieces() {
        if !keep(v) {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.1 == *a => last.1 = b.clone(),
            _ => out.push((a.clone(), b.clone())),
        }
    }
    out
}

/// Assembles a map on `(0, 1]` from the matched pairs (both directions) and the
/// identity elsewhere.
fn map_from_pairs<S: Scalar>(pairs: &[MatchedPair<S>], zero: &[(S, S)]) -> Result<PiecewiseLinearFn<S>> {
    let mut pieces: Vec<(S, S, S, S)> = Vec::new();
    for p in pairs {
        pieces.push((p.u.0.clone(), p.u.1.clone(), p.v.0.clone(), p.v.1.clone()));
        pieces.push((p.v.0.clone(), p.v.1.clone(), p.u.0.clone(), p.u.1.clone()));
    }
    for (a, b) in zero {
        pieces.push((a.clone(), b.clone(), a.clone(), b.clone()));
    }
    pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
    let mut bp = vec![S::zero()];
    let mut ends = Vec::with_capacity(pieces.len());
    for (a, b, l, r) in pieces {
        if *bp.last().unwrap() != a {
            return Err(Error::Internal(format!("matched pieces leave a gap at {}", bp.last().unwrap())));
        }
        bp.push(b);
        ends.push((l, r));
    }
    let start = ends[0].0.clone();
    PiecewiseLinearFn::from_pieces(bp, start, ends)
}

impl<S: Scalar> PsiSystem<S> {
    pub fn sign_at(&self, u: &S) -> Result<Sign> {
        let d = self.diff.eval(u)?;
        Ok(if d.is_positive() {
            Sign::Plus
        } else if d.is_negative() {
            Sign::Minus
        } else {
            Sign::Zero
        })
    }

    pub fn u_plus(&self) -> Vec<(S, S)> {
        intervals_where(&self.diff, |v| v.is_positive())
    }

    pub fn u_minus(&self) -> Vec<(S, S)> {
        intervals_where(&self.diff, |v| v.is_negative())
    }

    pub fn u_zero(&self) -> Vec<(S, S)> {
        intervals_where(&self.diff, |v| v.is_zero())
    }

    /// Breakpoints of both quantile functions.
    pub fn grid(&self) -> Vec<S> {
        self.diff.breakpoints().to_vec()
    }

    /// The matching `Q^IT`, concentrated on the graph of `φ`.
    pub fn q_it(&self) -> QMeasure<S> {
        QMeasure {
            pieces: self
                .pairs
                .iter()
                .map(|p| QPiece { u: p.u.clone(), v: p.v.clone(), mass: p.mass.clone() / self.total.clone(), kind: QKind::Graph })
                .collect(),
        }
    }
}

pub fn build_psi<S: Scalar>(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>) -> Result<PsiSystem<S>> {
    if mu.mean() != nu.mean() {
        return Err(Error::Order(format!("means differ: {} vs {}", mu.mean(), nu.mean())));
    }
    let (f_mu, f_nu) = (mu.quantile(), nu.quantile());
    let diff = f_mu.sub(&f_nu)?;
    let (dp, dm) = (diff.positive_part(), diff.negative_part());
    let (psi_plus, psi_minus) = (dp.antiderivative(), dm.antiderivative());
    let total = psi_plus.end_value().clone();
    if total != *psi_minus.end_value() {
        return Err(Error::Internal("Ψ₊(1) differs from Ψ₋(1) despite equal means".into()));
    }
    let pairs = if total.is_zero() { Vec::new() } else { monotone_matching(&dp, &dm, diff.breakpoints())? };
    let phi = map_from_pairs(&pairs, &intervals_where(&diff, |v| v.is_zero()))?;
    Ok(PsiSystem { mu: mu.clone(), nu: nu.clone(), f_mu, f_nu, diff, psi_plus, psi_minus, total, pairs, phi })
}

fn two_point<S: Scalar>(x: &S, y: &S, partner: &S) -> Result<(S, S)> {
    let den = partner.clone() - y.clone();
    if den.is_zero() {
        return Err(Error::Internal(format!("vanishing denominator at x = {x}, y = {y}")));
    }
    let p = (x.clone() - y.clone()) / den;
    if p.is_negative() || p > S::one() {
        return Err(Error::Internal(format!("weight {p} outside [0,1] at x = {x}")));
    }
    Ok((p.clone(), S::one() - p))
}

/// `M̂^IT`: on matched pieces `p δ_{F_ν⁻¹(φ(u))} + (1 - p) δ_{F_ν⁻¹(u)}`.
pub fn itmc_kernel<S: Scalar>(sys: &PsiSystem<S>) -> Result<LiftedCoupling<S>> {
    let mut segments = Vec::new();
    let mut push = |a: &S, b: &S, partner_end: &S| -> Result<()> {
        let x = sys.f_mu.eval(b)?;
        let y = sys.f_nu.eval(b)?;
        let y2 = sys.f_nu.eval(partner_end)?;
        let (p, q) = two_point(&x, &y, &y2)?;
        let kernel = DiscreteMeasure::from_pairs(vec![(y2, p), (y, q)])?;
        segments.push(Segment { a: a.clone(), b: b.clone(), x, kernel });
        Ok(())
    };
    for pair in &sys.pairs {
        push(&pair.u.0, &pair.u.1, &pair.v.1)?;
        push(&pair.v.0, &pair.v.1, &pair.u.1)?;
    }
    for (a, b, d) in sys.diff.pieces() {
        if d.is_zero() {
            let y = sys.f_nu.eval(b)?;
            segments.push(Segment { a: a.clone(), b: b.clone(), x: y.clone(), kernel: DiscreteMeasure::dirac(y) });
        }
    }
    segments.sort_by(|s, t| s.a.partial_cmp(&t.a).expect("comparable"));
    LiftedCoupling::new(segments)
}

/// `M^IT` for `μ ≤_cx ν`.
pub fn inverse_transform_martingale<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
) -> Result<(DiscreteCoupling<S>, LiftedCoupling<S>)> {
    if let Some(why) = mu.convex_order_violation(nu) {
        return Err(Error::Order(format!("marginals are not in convex order ({why})")));
    }
    let lifted = itmc_kernel(&build_psi(mu, nu)?)?;
    Ok((lifted.collapse(), lifted.simplify()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QKind {
    /// Uniform along the increasing affine graph from `u` onto `v`.
    Graph,
    /// Uniform on the rectangle `u × v`.
    Product,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QPiece<S> {
    pub u: (S, S),
    pub v: (S, S),
    pub mass: S,
    pub kind: QKind,
}

/// Probability measure on pairs of levels `u < v`, as a finite sum of uniform
/// pieces on segments of increasing graphs or on rectangles.
#[derive(Clone, Debug, PartialEq)]
pub struct QMeasure<S> {
    pub pieces: Vec<QPiece<S>>,
}

fn density_on<S: Scalar>(pieces: &[((S, S), S)], grid: &[S]) -> PiecewiseConstantFn<S> {
    let mut pts: Vec<S> = grid.to_vec();
    for ((a, b), _) in pieces {
        pts.push(a.clone());
        pts.push(b.clone());
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let values = pts
        .windows(2)
        .map(|w| {
            sum(pieces
                .iter()
                .filter(|((a, b), _)| *a <= w[0] && w[1] <= *b)
                .map(|((a, b), m)| m.clone() / (b.clone() - a.clone())))
        })
        .collect();
    PiecewiseConstantFn::new(pts, values).expect("sorted grid")
}

impl<S: Scalar> QMeasure<S> {
    pub fn total_mass(&self) -> S {
        sum(self.pieces.iter().map(|p| p.mass.clone()))
    }

    /// Unit mass, marginals `dΨ₊/Ψ₊(1)` and `dΨ₋/Ψ₊(1)`, and `u < v` on the support.
    pub fn check(&self, sys: &PsiSystem<S>) -> Result<()> {
        if self.total_mass() != S::one() {
            return Err(Error::Parameter(format!("Q has mass {}", self.total_mass())));
        }
        if let Some(p) = self.pieces.iter().find(|p| p.v.0 < p.u.1) {
            return Err(Error::Parameter(format!("Q puts mass below the diagonal near u = {}", p.u.1)));
        }
        let first = density_on(&self.pieces.iter().map(|p| (p.u.clone(), p.mass.clone())).collect::<Vec<_>>(), &sys.grid());
        let second = density_on(&self.pieces.iter().map(|p| (p.v.clone(), p.mass.clone())).collect::<Vec<_>>(), &sys.grid());
        let t = sys.total.clone();
        let want1 = sys.diff.map(|d| d.pos_part() / t.clone());
        let want2 = sys.diff.map(|d| d.neg_part() / t.clone());
        let ok1 = first.sub(&want1)?.values().iter().all(|v| v.is_zero());
        let ok2 = second.sub(&want2)?.values().iter().all(|v| v.is_zero());
        if !(ok1 && ok2) {
            return Err(Error::Parameter("Q marginals differ from dΨ±/Ψ₊(1)".into()));
        }
        Ok(())
    }
}

/// How the mass inside a single jump of `F_μ` is coupled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpCoupling {
    Monotone,
    Product,
}

/// The sets `V⁺_x = (F_μ(x-), a_x]` and `V⁻_x = (b_x, F_μ(x)]` for one atom.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpSplit<S> {
    pub x: S,
    pub jump: (S, S),
    pub a: S,
    pub b: S,
    pub mass: S,
}

/// `a_x`, `b_x` for every atom of `μ`.
pub fn jump_splits<S: Scalar>(sys: &PsiSystem<S>) -> Vec<JumpSplit<S>> {
    let cum = sys.mu.cumulative();
    let mut out = Vec::new();
    for (i, x) in sys.mu.atoms().iter().enumerate() {
        let (lo, hi) = (cum[i].clone(), cum[i + 1].clone());
        let inside: Vec<(S, S, S)> = sys
            .diff
            .pieces()
            .filter(|(a, b, _)| **a >= lo && **b <= hi)
            .map(|(a, b, v)| (a.clone(), b.clone(), v.clone()))
            .collect();
        let pos = sum(inside.iter().map(|(a, b, v)| v.pos_part() * (b.clone() - a.clone())));
        let neg = sum(inside.iter().map(|(a, b, v)| v.neg_part() * (b.clone() - a.clone())));
        let m = pos.min_of(&neg);
        let (mut a_x, mut b_x) = (lo.clone(), hi.clone());
        if m.is_positive() {
            let mut acc = S::zero();
            for (a, b, v) in &inside {
                let d = v.pos_part();
                let next = acc.clone() + d.clone() * (b.clone() - a.clone());
                if d.is_positive() && next >= m {
                    a_x = a.clone() + (m.clone() - acc.clone()) / d;
                    break;
                }
                acc = next;
            }
            let mut acc = S::zero();
            for (a, b, v) in inside.iter().rev() {
                let d = v.neg_part();
                let next = acc.clone() + d.clone() * (b.clone() - a.clone());
                if d.is_positive() && next >= m {
                    b_x = b.clone() - (m.clone() - acc.clone()) / d;
                    break;
                }
                acc = next;
            }
        }
        out.push(JumpSplit { x: x.clone(), jump: (lo, hi), a: a_x, b: b_x, mass: m });
    }
    out
}

fn mask<S: Scalar>(f: &PiecewiseConstantFn<S>, keep: impl Fn(&S, &S) -> bool) -> PiecewiseConstantFn<S> {
    let values = f.pieces().map(|(a, b, v)| if keep(a, b) { v.clone() } else { S::zero() }).collect();
    PiecewiseConstantFn::new(f.breakpoints().to_vec(), values).expect("same partition")
}

/// `Q = Q̃ + Σ_x Q_x`, the level measure whose `M^Q` is a martingale rearrangement
/// of the Hoeffding-Fréchet coupling.
pub fn build_q_rearrangement<S: Scalar>(mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>) -> Result<QMeasure<S>> {
    build_q_rearrangement_with(mu, nu, JumpCoupling::Monotone)
}

pub fn build_q_rearrangement_with<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
    choice: JumpCoupling,
) -> Result<QMeasure<S>> {
    if mu == nu {
        return Err(Error::Degenerate("μ = ν leaves nothing to rearrange".into()));
    }
    if let Some(why) = mu.convex_order_violation(nu) {
        return Err(Error::Order(format!("marginals are not in convex order ({why})")));
    }
    let sys = build_psi(mu, nu)?;
    let splits = jump_splits(&sys);
    let mut grid = sys.grid();
    for s in &splits {
        grid.push(s.a.clone());
        grid.push(s.b.clone());
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let diff = sys.diff.refine(&grid);
    let (dp, dm) = (diff.positive_part(), diff.negative_part());
    let in_v_plus = |a: &S, b: &S| splits.iter().any(|s| s.jump.0 <= *a && *b <= s.a);
    let in_v_minus = |a: &S, b: &S| splits.iter().any(|s| s.b <= *a && *b <= s.jump.1);

    let mut pieces = Vec::new();
    let rest_plus = mask(&dp, |a, b| !in_v_plus(a, b));
    let rest_minus = mask(&dm, |a, b| !in_v_minus(a, b));
    if rest_plus.integral().is_positive() {
        for p in monotone_matching(&rest_plus, &rest_minus, &grid)? {
            pieces.push(QPiece { u: p.u, v: p.v, mass: p.mass / sys.total.clone(), kind: QKind::Graph });
        }
    }
    for s in splits.iter().filter(|s| s.mass.is_positive()) {
        let fp = mask(&dp, |a, b| s.jump.0 <= *a && *b <= s.a);
        let fm = mask(&dm, |a, b| s.b <= *a && *b <= s.jump.1);
        match choice {
            JumpCoupling::Monotone => {
                for p in monotone_matching(&fp, &fm, &grid)? {
                    pieces.push(QPiece { u: p.u, v: p.v, mass: p.mass / sys.total.clone(), kind: QKind::Graph });
                }
            }
            JumpCoupling::Product => {
                for (a, b, v) in fp.pieces().filter(|(_, _, v)| v.is_positive()) {
                    for (c, d, w) in fm.pieces().filter(|(_, _, w)| w.is_positive()) {
                        let mass = v.clone() * (b.clone() - a.clone()) * w.clone() * (d.clone() - c.clone())
                            / (s.mass.clone() * sys.total.clone());
                        pieces.push(QPiece { u: (a.clone(), b.clone()), v: (c.clone(), d.clone()), mass, kind: QKind::Product });
                    }
                }
            }
        }
    }
    let q = QMeasure { pieces };
    q.check(&sys)?;
    Ok(q)
}

/// Kernel `m̃^Q_u`: every partner level `v` of `u` under `Q` contributes the
/// two-point measure on `{F_ν⁻¹(u), F_ν⁻¹(v)}` with barycentre `F_μ⁻¹(u)`.
pub fn mq_kernel<S: Scalar>(q: &QMeasure<S>, sys: &PsiSystem<S>) -> Result<LiftedCoupling<S>> {
    let grid = sys.grid();
    let mut pts = grid.clone();
    for p in &q.pieces {
        pts.extend([p.u.0.clone(), p.u.1.clone(), p.v.0.clone(), p.v.1.clone()]);
        if p.kind == QKind::Graph {
            for g in &grid {
                if *g > p.v.0 && *g < p.v.1 {
                    pts.push(MatchedPair { u: p.u.clone(), v: p.v.clone(), mass: p.mass.clone() }.backward(g));
                }
                if *g > p.u.0 && *g < p.u.1 {
                    pts.push(MatchedPair { u: p.u.clone(), v: p.v.clone(), mass: p.mass.clone() }.forward(g));
                }
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let pts = merge_breakpoints(&pts, &[]);

    let mut segments = Vec::new();
    for w in pts.windows(2) {
        let (s, t) = (&w[0], &w[1]);
        let x = sys.f_mu.eval(t)?;
        let y = sys.f_nu.eval(t)?;
        let d = x.clone() - y.clone();
        if d.is_zero() {
            segments.push(Segment { a: s.clone(), b: t.clone(), x, kernel: DiscreteMeasure::dirac(y) });
            continue;
        }
        let density = d.abs() / sys.total.clone();
        let plus = d.is_positive();
        let mut weights: Vec<(S, S)> = Vec::new();
        let mut shares = S::zero();
        for p in &q.pieces {
            let (own, other) = if plus { (&p.u, &p.v) } else { (&p.v, &p.u) };
            if !(own.0 <= *s && *t <= own.1) {
                continue;
            }
            let share = p.mass.clone() / (own.1.clone() - own.0.clone()) / density.clone();
            shares = shares + share.clone();
            let partners: Vec<(S, S)> = match p.kind {
                QKind::Graph => {
                    let pair = MatchedPair { u: own.clone(), v: other.clone(), mass: p.mass.clone() };
                    vec![(sys.f_nu.eval(&pair.forward(t))?, S::one())]
                }
                QKind::Product => {
                    let len = other.1.clone() - other.0.clone();
                    sys.nu
                        .restrict_levels(&other.0, &other.1)
                        .into_iter()
                        .map(|(z, l)| (z, l / len.clone()))
                        .collect()
                }
            };
            for (z, frac) in partners {
                let (pz, py) = two_point(&x, &y, &z)?;
                weights.push((z, share.clone() * frac.clone() * pz));
                weights.push((y.clone(), share.clone() * frac * py));
            }
        }
        if shares != S::one() {
            return Err(Error::Parameter(format!("Q marginal mismatch on ({s}, {t}]: shares sum to {shares}")));
        }
        segments.push(Segment { a: s.clone(), b: t.clone(), x, kernel: DiscreteMeasure::from_pairs(weights)? });
    }
    Ok(LiftedCoupling::new(segments)?.simplify())
}

/// `∫ |y - F_ν⁻¹(u)| m_u(dy) = |F_μ⁻¹(u) - F_ν⁻¹(u)|` on every segment.
pub fn sign_identity_holds<S: Scalar>(lifted: &LiftedCoupling<S>, nu: &DiscreteMeasure<S>) -> Result<bool> {
    let f_nu = nu.quantile();
    let refined = lifted.refine(f_nu.breakpoints());
    for s in refined.segments() {
        let y = f_nu.eval(&s.b)?;
        let lhs = sum(s.kernel.iter().map(|(z, w)| (z.clone() - y.clone()).abs() * w.clone()));
        if lhs != (s.x.clone() - y).abs() {
            return Ok(false);
        }
    }
    Ok(true)
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

    fn example_b() -> (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>) {
        (m(&[(-2, 1, 2), (2, 1, 2)]), m(&[(-4, 1, 3), (-1, 1, 6), (1, 1, 6), (4, 1, 3)]))
    }

    #[test]
    fn psi_of_example_a() {
        let (mu, nu) = example_a();
        let sys = build_psi(&mu, &nu).unwrap();
        assert_eq!(sys.total, r(1, 2));
        for u in [r(1, 8), r(1, 4), r(1, 2)] {
            assert_eq!(sys.phi.eval(&u).unwrap(), u.clone() + r(1, 2));
        }
        for u in [r(5, 8), r(1, 1)] {
            assert_eq!(sys.phi.eval(&u).unwrap(), u.clone() - r(1, 2));
        }
        // φ agrees with Ψ₋⁻¹ ∘ Ψ₊ on U⁺
        let composed = PiecewiseLinearFn::compose(&sys.psi_minus.generalized_left_inverse().unwrap(), &sys.psi_plus).unwrap();
        for u in [r(1, 16), r(3, 16), r(5, 16), r(7, 16)] {
            assert_eq!(composed.eval(&u).unwrap(), sys.phi.eval(&u).unwrap());
        }
    }

    #[test]
    fn psi_of_example_b_and_identity() {
        let (mu, nu) = example_b();
        let sys = build_psi(&mu, &nu).unwrap();
        assert_eq!(sys.u_plus(), vec![(r(0, 1), r(1, 3)), (r(1, 2), r(2, 3))]);
        assert_eq!(sys.u_minus(), vec![(r(1, 3), r(1, 2)), (r(2, 3), r(1, 1))]);
        let same = build_psi(&mu, &mu).unwrap();
        assert!(same.total.is_zero());
        assert_eq!(same.u_zero(), vec![(r(0, 1), r(1, 1))]);
        assert_eq!(same.phi.eval(&r(1, 3)).unwrap(), r(1, 3));
        assert!(matches!(build_psi(&mu, &DiscreteMeasure::dirac(r(1, 1))), Err(Error::Order(_))));
    }

    #[test]
    fn itmc_of_example_a() {
        let (mu, nu) = example_a();
        let (mit, lifted) = inverse_transform_martingale(&mu, &nu).unwrap();
        assert_eq!(lifted.segments()[0].kernel, m(&[(1, 1, 3), (-2, 2, 3)]));
        assert_eq!(
            mit,
            c(&[
                (-1, -2, 1, 6),
                (-1, 1, 1, 12),
                (0, -2, 1, 12),
                (0, -1, 1, 6),
                (0, 1, 1, 6),
                (0, 2, 1, 12),
                (1, -1, 1, 12),
                (1, 2, 1, 6)
            ])
        );
        let (diag, _) = inverse_transform_martingale(&mu, &mu).unwrap();
        assert!(diag.points().iter().all(|p| p.0 == p.1));
        assert!(matches!(inverse_transform_martingale(&nu, &mu), Err(Error::Order(_))));
    }

    #[test]
    fn q_rearrangement_of_example_b() {
        let (mu, nu) = example_b();
        let sys = build_psi(&mu, &nu).unwrap();
        let splits = jump_splits(&sys);
        assert_eq!((splits[0].a.clone(), splits[0].b.clone()), (r(1, 12), r(1, 3)));
        assert_eq!((splits[1].a.clone(), splits[1].b.clone()), (r(2, 3), r(11, 12)));
        let q = build_q_rearrangement(&mu, &nu).unwrap();
        let mq = mq_kernel(&q, &sys).unwrap().collapse();
        let want = c(&[(-2, -4, 13, 48), (-2, -1, 1, 6), (-2, 4, 1, 16), (2, -4, 1, 16), (2, 1, 1, 6), (2, 4, 13, 48)]);
        assert_eq!(mq, want);
        let qp = build_q_rearrangement_with(&mu, &nu, JumpCoupling::Product).unwrap();
        assert_eq!(mq_kernel(&qp, &sys).unwrap().collapse(), want);
        assert!(matches!(build_q_rearrangement(&mu, &mu), Err(Error::Degenerate(_))));
    }

    #[test]
    fn q_it_reproduces_itmc_kernel() {
        let (mu, nu) = example_a();
        let sys = build_psi(&mu, &nu).unwrap();
        let q = sys.q_it();
        q.check(&sys).unwrap();
        let a = mq_kernel(&q, &sys).unwrap();
        let b = itmc_kernel(&sys).unwrap().simplify();
        assert_eq!(a, b);
        assert!(sign_identity_holds(&a, &nu).unwrap());
    }
}
