//! Martingale rearrangements of a coupling satisfying the barycentre dispersion
//! assumption: the direct quantile construction and the switching algorithm.

use crate::coupling::{DiscreteCoupling, LiftedCoupling, Segment};
use crate::error::{Error, Result};
use crate::matching::{monotone_matching, MatchedPair};
use crate::measure::{DiscreteMeasure, StochasticOrder};
use crate::piecewise::{PiecewiseConstantFn, PiecewiseLinearFn};
use crate::scalar::{sum, Scalar};

/// `G(u) = mean(π_{F_μ⁻¹(u)})`, `Δ±(u) = ∫_0^u (F_μ⁻¹ - G)^±` and the matching
/// `φ` between `U⁺ = {F_μ⁻¹ > G}` and `U⁻ = {F_μ⁻¹ < G}`.
#[derive(Clone, Debug)]
pub struct DeltaSystem<S> {
    pub pi: DiscreteCoupling<S>,
    pub f_mu: PiecewiseConstantFn<S>,
    pub g: PiecewiseConstantFn<S>,
    pub delta_plus: PiecewiseLinearFn<S>,
    pub delta_minus: PiecewiseLinearFn<S>,
    /// Pieces of `U⁺` matched to pieces of `U⁻`; `u` always lies before `v`.
    pub pairs: Vec<MatchedPair<S>>,
    pub phi: PiecewiseLinearFn<S>,
    /// `p` on matched pieces, zero on `U⁰`.
    pub p: PiecewiseConstantFn<S>,
}

pub fn build_delta<S: Scalar>(pi: &DiscreteCoupling<S>) -> Result<DeltaSystem<S>> {
    let (mu, nu) = (pi.first_marginal(), pi.second_marginal());
    if let Some(why) = mu.convex_order_violation(&nu) {
        return Err(Error::Order(format!("marginals are not in convex order ({why})")));
    }
    if !pi.barycentre_dispersion() {
        return Err(Error::Precondition("coupling violates the barycentre dispersion assumption".into()));
    }
    let f_mu = mu.quantile();
    let g = pi.barycentre_fn();
    let diff = f_mu.sub(&g)?;
    let (dp, dm) = (diff.positive_part(), diff.negative_part());
    let (delta_plus, delta_minus) = (dp.antiderivative(), dm.antiderivative());
    if delta_plus.end_value() != delta_minus.end_value() {
        return Err(Error::Internal("Δ₊(1) differs from Δ₋(1) despite equal means".into()));
    }
    let pairs = if delta_plus.end_value().is_zero() {
        Vec::new()
    } else {
        monotone_matching(&dp, &dm, f_mu.breakpoints())?
    };

    let mut bp = vec![S::zero()];
    let mut ends: Vec<(S, S)> = Vec::new();
    let mut pvals: Vec<S> = Vec::new();
    let mut pieces: Vec<(S, S, S, S, S)> = Vec::new();
    for pair in &pairs {
        let (fu, gu) = (f_mu.eval(&pair.u.1)?, g.eval(&pair.u.1)?);
        let (fv, gv) = (f_mu.eval(&pair.v.1)?, g.eval(&pair.v.1)?);
        if pair.u.1 > pair.v.0 || fu > fv {
            return Err(Error::Precondition(format!(
                "matched level {} precedes its partner {}, so the dispersion assumption fails",
                pair.v.1, pair.u.1
            )));
        }
        let p = (gv.clone() - fv.clone()) / (fu - gu + gv - fv);
        pieces.push((pair.u.0.clone(), pair.u.1.clone(), pair.v.0.clone(), pair.v.1.clone(), p.clone()));
        pieces.push((pair.v.0.clone(), pair.v.1.clone(), pair.u.0.clone(), pair.u.1.clone(), S::one() - p));
    }
    for (a, b, v) in diff.pieces() {
        if v.is_zero() {
            pieces.push((a.clone(), b.clone(), a.clone(), b.clone(), S::zero()));
        }
    }
    pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
    for (a, b, l, r, p) in pieces {
        if *bp.last().unwrap() != a {
            return Err(Error::Internal(format!("Δ-matching leaves a gap at {a}")));
        }
        bp.push(b);
        ends.push((l, r));
        pvals.push(p);
    }
    let start = ends[0].0.clone();
    let phi = PiecewiseLinearFn::from_pieces(bp.clone(), start, ends)?;
    let p = PiecewiseConstantFn::new(bp, pvals)?;
    Ok(DeltaSystem { pi: pi.clone(), f_mu, g, delta_plus, delta_minus, pairs, phi, p })
}

/// `∫_0^t F⁻¹`, zero at `t = 0`.
fn quantile_integral<S: Scalar>(q: &PiecewiseConstantFn<S>, t: &S) -> Result<S> {
    if !t.is_positive() {
        return Ok(S::zero());
    }
    q.integral_to(&t.min_of(&S::one()))
}

/// Root of a piecewise linear function given by its values on a sorted grid.
fn first_crossing<S: Scalar>(grid: &[S], values: &[S], target: &S, increasing: bool) -> Option<S> {
    let reached = |v: &S| if increasing { v >= target } else { v <= target };
    for k in 0..grid.len() {
        if reached(&values[k]) {
            if k == 0 || values[k] == *target {
                return Some(grid[k].clone());
            }
            let (q0, q1) = (&grid[k - 1], &grid[k]);
            let (j0, j1) = (&values[k - 1], &values[k]);
            return Some(q0.clone() + (target.clone() - j0.clone()) * (q1.clone() - q0.clone()) / (j1.clone() - j0.clone()));
        }
    }
    None
}

/// Splits `p μ + (1 - p) μ̃` into `p ν + (1 - p) ν̃` with `mean(ν) = y`,
/// `mean(ν̃) = ỹ`, `μ ≤_st ν` and `ν̃ ≤_st μ̃`, by gluing quantile pieces.
///
/// Requires `mean(μ) < y ≤ ỹ < mean(μ̃)`.
pub fn beta_surgery<S: Scalar>(
    y: &S,
    y_tilde: &S,
    mu: &DiscreteMeasure<S>,
    mu_tilde: &DiscreteMeasure<S>,
) -> Result<(DiscreteMeasure<S>, DiscreteMeasure<S>)> {
    let (x, x_tilde) = (mu.mean(), mu_tilde.mean());
    if !(x < *y && y <= y_tilde && *y_tilde < x_tilde) {
        return Err(Error::Precondition(format!(
            "surgery needs mean(μ) < y ≤ ỹ < mean(μ̃), got {x}, {y}, {y_tilde}, {x_tilde}"
        )));
    }
    let p = (x_tilde.clone() - y_tilde.clone()) / (y.clone() - x.clone() + x_tilde.clone() - y_tilde.clone());
    let one = S::one();
    let q_of = |c: &S| -> S { one.clone() - p.clone() - (one.clone() - p.clone()) * c.clone() };
    let (f, ft) = (mu.quantile(), mu_tilde.quantile());
    let half = S::from_ratio(1, 2);
    let upper = if p <= half { p.clone() } else { one.clone() - p.clone() };

    let mut grid: Vec<S> = vec![S::zero(), upper.clone()];
    grid.extend(mu.cumulative().iter().map(|c| p.clone() * c.clone()));
    grid.extend(mu_tilde.cumulative().iter().map(q_of));
    grid.retain(|q| !q.is_negative() && *q <= upper);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let lo_tilde = |q: &S| (one.clone() - q.clone() - p.clone()) / (one.clone() - p.clone());
    let q_star = if p <= half {
        // J(q) = ((1-p)/p) ∫_{c(q)}^1 F̃⁻¹ + ∫_{q/p}^1 F⁻¹, concave, J(0) = x
        let values = grid
            .iter()
            .map(|q| {
                let a = x_tilde.clone() - quantile_integral(&ft, &lo_tilde(q))?;
                let b = x.clone() - quantile_integral(&f, &(q.clone() / p.clone()))?;
                Ok((one.clone() - p.clone()) / p.clone() * a + b)
            })
            .collect::<Result<Vec<S>>>()?;
        first_crossing(&grid, &values, y, true)
    } else {
        // J̃(q) = (p/(1-p)) ∫_0^{q/p} F⁻¹ + ∫_0^{c(q)} F̃⁻¹, convex, J̃(0) = x̃
        let values = grid
            .iter()
            .map(|q| {
                let a = quantile_integral(&f, &(q.clone() / p.clone()))?;
                let b = quantile_integral(&ft, &lo_tilde(q))?;
                Ok(p.clone() / (one.clone() - p.clone()) * a + b)
            })
            .collect::<Result<Vec<S>>>()?;
        first_crossing(&grid, &values, y_tilde, false)
    }
    .ok_or_else(|| Error::Internal("surgery equation has no root on its interval".into()))?;

    let cut = q_star.clone() / p.clone();
    let cut_tilde = lo_tilde(&q_star);
    let ratio = (one.clone() - p.clone()) / p.clone();
    let mut nu: Vec<(S, S)> = mu_tilde
        .restrict_levels(&cut_tilde, &one)
        .into_iter()
        .map(|(z, w)| (z, w * ratio.clone()))
        .collect();
    nu.extend(mu.restrict_levels(&cut, &one));
    let mut nu_tilde: Vec<(S, S)> = mu
        .restrict_levels(&S::zero(), &cut)
        .into_iter()
        .map(|(z, w)| (z, w / ratio.clone()))
        .collect();
    nu_tilde.extend(mu_tilde.restrict_levels(&S::zero(), &cut_tilde));
    Ok((DiscreteMeasure::from_pairs(nu)?, DiscreteMeasure::from_pairs(nu_tilde)?))
}

/// The direct martingale rearrangement `M` of `π` and its lifted form.
pub fn rearrange<S: Scalar>(pi: &DiscreteCoupling<S>) -> Result<(DiscreteCoupling<S>, LiftedCoupling<S>)> {
    let (mu, nu) = (pi.first_marginal(), pi.second_marginal());
    if mu == nu {
        let diagonal = DiscreteCoupling::new(mu.iter().map(|(x, w)| (x.clone(), x.clone(), w.clone())).collect())?;
        return Ok((diagonal.clone(), diagonal.lift()));
    }
    let sys = build_delta(pi)?;
    let kernel = pi.disintegrate();
    let at = |u: &S| -> Result<(S, DiscreteMeasure<S>)> {
        let x = sys.f_mu.eval(u)?;
        let k = kernel.get(&x).cloned().ok_or_else(|| Error::Internal(format!("no kernel at {x}")))?;
        Ok((x, k))
    };

    let mut segments = Vec::new();
    for pair in &sys.pairs {
        let (xu, ku) = at(&pair.u.1)?;
        let (xv, kv) = at(&pair.v.1)?;
        let (m_u, m_v) = beta_surgery(&xu, &xv, &ku, &kv)?;
        segments.push(Segment { a: pair.u.0.clone(), b: pair.u.1.clone(), x: xu, kernel: m_u });
        segments.push(Segment { a: pair.v.0.clone(), b: pair.v.1.clone(), x: xv, kernel: m_v });
    }
    for (a, b, pv) in sys.p.pieces() {
        if pv.is_zero() {
            let (x, k) = at(b)?;
            segments.push(Segment { a: a.clone(), b: b.clone(), x, kernel: k });
        }
    }
    segments.sort_by(|s, t| s.a.partial_cmp(&t.a).expect("comparable"));
    let lifted = LiftedCoupling::new(segments)?.simplify();
    let m = lifted.collapse();
    if !m.is_martingale() || m.second_marginal() != nu {
        return Err(Error::Internal("direct rearrangement lost the martingale or marginal property".into()));
    }
    Ok((m, lifted))
}

/// Per atom `x`, `π_x` and `M_x` are stochastically ordered in the direction of
/// `x - mean(π_x)`, which makes the identity the optimal level matching.
pub fn identity_matching_certificate<S: Scalar>(pi: &DiscreteCoupling<S>, m: &DiscreteCoupling<S>) -> bool {
    let (kp, km) = (pi.disintegrate(), m.disintegrate());
    if kp.len() != km.len() {
        return false;
    }
    let ok = kp.iter().zip(km.iter()).all(|((x, a), (x2, b))| {
        if x != x2 {
            return false;
        }
        let gap = x.clone() - a.mean();
        let order = a.stochastic_order(b);
        if gap.is_positive() {
            matches!(order, StochasticOrder::Less | StochasticOrder::Equal)
        } else if gap.is_negative() {
            matches!(order, StochasticOrder::Greater | StochasticOrder::Equal)
        } else {
            order == StochasticOrder::Equal
        }
    });
    ok
}

/// Cap on switches; each one exhausts a cell or closes a deficit, so this is
/// far above what any accepted instance needs.
const SWITCH_LIMIT: usize = 100_000;

/// Repeatedly moves mass `λ` from `(x⁻, y⁻), (x⁺, y⁺)` to `(x⁻, y⁺), (x⁺, y⁻)`
/// until every kernel is centred at its atom.
pub fn wiesel_switch<S: Scalar>(pi: &DiscreteCoupling<S>) -> Result<DiscreteCoupling<S>> {
    let (mu, nu) = (pi.first_marginal(), pi.second_marginal());
    if let Some(why) = mu.convex_order_violation(&nu) {
        return Err(Error::Order(format!("marginals are not in convex order ({why})")));
    }
    if !pi.barycentre_dispersion() {
        return Err(Error::Precondition("coupling violates the barycentre dispersion assumption".into()));
    }
    let (xs, ys) = (mu.atoms().to_vec(), nu.atoms().to_vec());
    let mut w = vec![vec![S::zero(); ys.len()]; xs.len()];
    for (x, y, m) in pi.points() {
        let i = xs.iter().position(|a| a == x).expect("atom of μ");
        let j = ys.iter().position(|b| b == y).expect("atom of ν");
        w[i][j] = m.clone();
    }
    // signed gap μ(x)(mean(π_x) - x)
    let gap = |w: &[Vec<S>], i: usize| -> S {
        sum(w[i].iter().zip(&ys).map(|(m, y)| m.clone() * (y.clone() - xs[i].clone())))
    };
    for _ in 0..SWITCH_LIMIT {
        let Some(i_minus) = (0..xs.len()).find(|&i| gap(&w, i).is_negative()) else {
            return DiscreteCoupling::new(
                (0..xs.len())
                    .flat_map(|i| (0..ys.len()).map(move |j| (i, j)))
                    .map(|(i, j)| (xs[i].clone(), ys[j].clone(), w[i][j].clone()))
                    .collect(),
            );
        };
        let j_minus = (0..ys.len()).find(|&j| w[i_minus][j].is_positive()).expect("row has mass");
        // the nearest surplus above keeps every tail sum non-positive, since the
        // switched amount never exceeds the deficit at x⁻
        let Some(i_plus) = (i_minus + 1..xs.len()).find(|&i| gap(&w, i).is_positive()) else {
            return Err(Error::Internal(format!("no surplus above the deficit at {}", xs[i_minus])));
        };
        let j_plus = (0..ys.len()).rev().find(|&j| w[i_plus][j].is_positive()).expect("row has mass");
        let spread = ys[j_plus].clone() - ys[j_minus].clone();
        let lambda = w[i_minus][j_minus]
            .min_of(&w[i_plus][j_plus])
            .min_of(&(-gap(&w, i_minus) / spread.clone()))
            .min_of(&(gap(&w, i_plus) / spread));
        w[i_minus][j_minus] = w[i_minus][j_minus].clone() - lambda.clone();
        w[i_minus][j_plus] = w[i_minus][j_plus].clone() + lambda.clone();
        w[i_plus][j_plus] = w[i_plus][j_plus].clone() - lambda.clone();
        w[i_plus][j_minus] = w[i_plus][j_minus].clone() + lambda;
    }
    Err(Error::Internal(format!("switching did not finish within {SWITCH_LIMIT} steps")))
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

    fn hf_a() -> DiscreteCoupling<Rational> {
        let mu = m(&[(-1, 1, 4), (0, 1, 2), (1, 1, 4)]);
        let nu = m(&[(-2, 1, 4), (-1, 1, 4), (1, 1, 4), (2, 1, 4)]);
        DiscreteCoupling::hoeffding_frechet(&mu, &nu)
    }

    #[test]
    fn delta_system_of_example_a() {
        let sys = build_delta(&hf_a()).unwrap();
        assert_eq!(sys.g.values(), &[r(-2, 1), r(0, 1), r(2, 1)]);
        assert_eq!(sys.phi.eval(&r(1, 8)).unwrap(), r(7, 8));
        assert_eq!(sys.p.eval(&r(1, 8)).unwrap(), r(1, 2));
        assert_eq!(sys.p.eval(&r(7, 8)).unwrap(), r(1, 2));
    }

    #[test]
    fn surgery_on_two_diracs() {
        let (nu, nu_t) = beta_surgery(&r(-1, 1), &r(1, 1), &DiscreteMeasure::dirac(r(-2, 1)), &DiscreteMeasure::dirac(r(2, 1))).unwrap();
        assert_eq!(nu, m(&[(-2, 3, 4), (2, 1, 4)]));
        assert_eq!(nu_t, m(&[(-2, 1, 4), (2, 3, 4)]));
        assert!(beta_surgery(&r(-3, 1), &r(1, 1), &DiscreteMeasure::dirac(r(-2, 1)), &DiscreteMeasure::dirac(r(2, 1))).is_err());
    }

    #[test]
    fn surgery_with_p_above_half() {
        let (mu, mu_t) = (m(&[(-1, 1, 2), (1, 1, 2)]), m(&[(3, 1, 2), (5, 1, 2)]));
        let (y, yt) = (r(3, 1), r(7, 2));
        let (nu, nu_t) = beta_surgery(&y, &yt, &mu, &mu_t).unwrap();
        assert_eq!(nu.mean(), y);
        assert_eq!(nu_t.mean(), yt);
        let p = r(1, 2) / (r(3, 1) + r(1, 2));
        let lhs = DiscreteMeasure::mixture(&[(p.clone(), &nu), (r(1, 1) - p.clone(), &nu_t)]).unwrap();
        let rhs = DiscreteMeasure::mixture(&[(p.clone(), &mu), (r(1, 1) - p, &mu_t)]).unwrap();
        assert_eq!(lhs, rhs);
        assert!(matches!(mu.stochastic_order(&nu), StochasticOrder::Less));
    }

    #[test]
    fn direct_rearrangement_of_example_a() {
        let pi = hf_a();
        let (mr, lifted) = rearrange(&pi).unwrap();
        assert_eq!(mr, c(&[(-1, -2, 3, 16), (-1, 2, 1, 16), (0, -1, 1, 4), (0, 1, 1, 4), (1, -2, 1, 16), (1, 2, 3, 16)]));
        assert!(lifted.is_martingale());
        assert!(identity_matching_certificate(&pi, &mr));
        let mart = c(&[(0, -1, 1, 2), (0, 1, 1, 2)]);
        assert_eq!(rearrange(&mart).unwrap().0, mart);
    }

    #[test]
    fn switching_reaches_a_martingale() {
        let pi = hf_a();
        let out = wiesel_switch(&pi).unwrap();
        assert!(out.is_martingale());
        assert_eq!(out.second_marginal(), pi.second_marginal());
        assert!(identity_matching_certificate(&pi, &out));
    }

    #[test]
    fn dispersion_failure_is_a_precondition_error() {
        // kernel means pushed the wrong way round
        let pi = c(&[(-1, 1, 1, 2), (1, -1, 1, 2)]);
        assert!(matches!(build_delta(&pi), Err(Error::Precondition(_)) | Err(Error::Order(_))));
        let pi = c(&[(-1, 0, 1, 4), (-1, 2, 1, 4), (1, -2, 1, 4), (1, 0, 1, 4)]);
        assert!(matches!(rearrange(&pi), Err(Error::Precondition(_))));
        assert!(matches!(wiesel_switch(&pi), Err(Error::Precondition(_))));
    }
}
