//! Stability experiments for the inverse transform martingale coupling under
//! perturbation of the marginals, plus a closed-form density identity check.

use std::fmt::Write as _;

use crate::coupling::DiscreteCoupling;
use crate::error::{Error, Result};
use crate::itmc::{build_psi, itmc_kernel};
use crate::measure::DiscreteMeasure;
use crate::scalar::{Rho, Scalar};
use crate::transport::{adapted_wasserstein, lifted_adapted_wasserstein, LiftedAwOptions};

/// Pairs `(μ_n, ν_n)` for `n = 1..=N` together with their limit `(μ, ν)`.
#[derive(Clone, Debug)]
pub struct MarginalSequence<S> {
    pub name: String,
    pub terms: Vec<(usize, DiscreteMeasure<S>, DiscreteMeasure<S>)>,
    pub limit: (DiscreteMeasure<S>, DiscreteMeasure<S>),
}

fn uniform<S: Scalar>(atoms: Vec<S>) -> Result<DiscreteMeasure<S>> {
    let w = S::from_ratio(1, atoms.len() as i64);
    DiscreteMeasure::from_pairs(atoms.into_iter().map(|x| (x, w.clone())).collect())
}

/// `k` equal atoms at the cell midpoints of `(-r, r)`.
pub fn midpoint_grid<S: Scalar>(k: usize, r: S) -> Result<DiscreteMeasure<S>> {
    let k = k as i64;
    uniform((0..k).map(|i| r.clone() * S::from_ratio(2 * i + 1 - k, k)).collect())
}

fn example_a_target<S: Scalar>() -> Result<DiscreteMeasure<S>> {
    uniform([-2, -1, 1, 2].into_iter().map(S::from_i64).collect())
}

/// `μ_n = ½(δ_{-1-h_n} + δ_{1+h_n})` with `h_n = 1/(2n²)` against the fixed
/// `ν = ¼(δ₋₂ + δ₋₁ + δ₁ + δ₂)`; each jump of `F_{μ_n}` sits over a jump of `F_μ`.
pub fn jump_preset<S: Scalar>(n_max: usize) -> Result<MarginalSequence<S>> {
    let nu = example_a_target()?;
    let half = S::from_ratio(1, 2);
    let two_point = |a: S| DiscreteMeasure::from_pairs(vec![(-a.clone(), half.clone()), (a, half.clone())]);
    let terms = (1..=n_max)
        .map(|n| {
            let n = n as i64;
            Ok((n as usize, two_point(S::one() + S::from_ratio(1, 2 * n * n))?, nu.clone()))
        })
        .collect::<Result<_>>()?;
    Ok(MarginalSequence { name: "jump".into(), terms, limit: (two_point(S::one())?, nu) })
}

/// `μ_n = μ`, `ν_n = ν` on the first worked pair.
pub fn constant_preset<S: Scalar>(n_max: usize) -> Result<MarginalSequence<S>> {
    let q = S::from_ratio(1, 4);
    let mu = DiscreteMeasure::from_pairs(vec![(S::from_i64(-1), q.clone()), (S::zero(), q.clone() + q.clone()), (S::one(), q)])?;
    let nu = example_a_target()?;
    let terms = (1..=n_max).map(|n| (n, mu.clone(), nu.clone())).collect();
    Ok(MarginalSequence { name: "constant".into(), terms, limit: (mu, nu) })
}

/// Smallest grid accepted by [`counterexample_preset`].
pub const COUNTEREXAMPLE_MIN_K: usize = 8;

/// `μ_n` a `k`-atom grid of `U(-1/n, 1/n)`, `μ = δ₀`, `ν_n = ν` a `k`-atom grid of `U(-1, 1)`.
pub fn counterexample_preset<S: Scalar>(k: usize, n_max: usize) -> Result<MarginalSequence<S>> {
    if k < COUNTEREXAMPLE_MIN_K {
        return Err(Error::Scale(format!("counterexample needs k >= {COUNTEREXAMPLE_MIN_K}, got {k}")));
    }
    let nu = midpoint_grid(k, S::one())?;
    let terms = (1..=n_max)
        .map(|n| Ok((n, midpoint_grid(k, S::from_ratio(1, n as i64))?, nu.clone())))
        .collect::<Result<_>>()?;
    Ok(MarginalSequence { name: "counterexample".into(), terms, limit: (DiscreteMeasure::dirac(S::zero()), nu) })
}

/// Every atom of `μ` is asymptotically covered by a single jump of `F_{μ_N}`.
pub fn jump_inclusion_check<S: Scalar>(seq: &MarginalSequence<S>, tol: f64) -> bool {
    let Some((_, mu_n, _)) = seq.terms.last() else { return true };
    let mu = &seq.limit.0;
    let (cum, cum_n) = (mu.cumulative(), mu_n.cumulative());
    (0..mu.len()).all(|i| {
        let best = (0..mu_n.len())
            .map(|j| (cum_n[j + 1].min_of(&cum[i + 1]) - cum_n[j].max_of(&cum[i])).to_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        (mu.weights()[i].to_f64() - best).abs() <= tol
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRow {
    pub n: usize,
    /// Upper end of the lifted bracket.
    pub aw_lifted: f64,
    pub aw_lifted_lower: f64,
    pub aw: f64,
    pub w_mu: f64,
    pub w_nu: f64,
}

/// Distances between `M^IT_n` and the limiting `M^IT`, lifted and plain.
pub fn stability_run<S: Scalar>(
    seq: &MarginalSequence<S>,
    rho: Rho,
    opts: &LiftedAwOptions,
) -> Result<Vec<StabilityRow>> {
    let itmc = |mu: &DiscreteMeasure<S>, nu: &DiscreteMeasure<S>| -> Result<(DiscreteCoupling<S>, _)> {
        if let Some(why) = mu.convex_order_violation(nu) {
            return Err(Error::Order(format!("sequence term is not in convex order ({why})")));
        }
        let lifted = itmc_kernel(&build_psi(mu, nu)?)?.simplify();
        let m = lifted.collapse();
        if !m.is_martingale() || m.first_marginal() != *mu || m.second_marginal() != *nu {
            return Err(Error::Internal("inverse transform coupling failed its marginal or martingale check".into()));
        }
        Ok((m, lifted))
    };
    let (mu, nu) = &seq.limit;
    let (m_lim, l_lim) = itmc(mu, nu)?;
    seq.terms
        .iter()
        .map(|(n, mu_n, nu_n)| {
            let (m, l) = itmc(mu_n, nu_n)?;
            let lifted = lifted_adapted_wasserstein(&l, &l_lim, rho, opts)?;
            Ok(StabilityRow {
                n: *n,
                aw_lifted: lifted.upper.root(rho),
                aw_lifted_lower: lifted.lower.root(rho),
                aw: adapted_wasserstein(&m, &m_lim, rho)?.value(),
                w_mu: mu_n.wasserstein(mu, rho)?,
                w_nu: nu_n.wasserstein(nu, rho)?,
            })
        })
        .collect()
}

pub fn rows_to_csv(rows: &[StabilityRow]) -> String {
    let mut out = String::from("n,aw1_lifted,aw1,w1_mu,w1_nu\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.n, r.aw_lifted, r.aw, r.w_mu, r.w_nu);
    }
    out
}

/// `W_1` between a discrete measure and `U(lo, hi)`, by integrating the gap of
/// the two quantile functions piece by piece.
pub fn w1_to_uniform<S: Scalar>(m: &DiscreteMeasure<S>, lo: f64, hi: f64) -> f64 {
    let cum: Vec<f64> = m.cumulative().iter().map(Scalar::to_f64).collect();
    let mut total = 0.0;
    for (i, x) in m.atoms().iter().enumerate() {
        // |lo + (hi - lo) u - x| over (cum[i], cum[i+1]]
        let x = x.to_f64();
        let g = |u: f64| lo + (hi - lo) * u - x;
        let (a, b) = (cum[i], cum[i + 1]);
        let slope = hi - lo;
        let (ga, gb) = (g(a), g(b));
        total += if ga >= 0.0 || gb <= 0.0 {
            (ga + gb).abs() / 2.0 * (b - a)
        } else {
            (ga * ga + gb * gb) / (2.0 * slope)
        };
    }
    total
}

#[derive(Clone, Debug)]
pub struct CounterexampleReport {
    pub rows: Vec<StabilityRow>,
    /// `c` with `W_1(U(-1, 1), ν_grid) = c / k`.
    pub c: f64,
    pub k: usize,
    /// `1/4 - c/k`.
    pub floor: f64,
    /// Smallest `W_1(p δ_a + (1-p) δ_b, ν_grid)` over the scanned two-point measures.
    pub two_point_min: f64,
}

impl CounterexampleReport {
    pub fn holds(&self, tau: f64) -> bool {
        self.rows.iter().all(|r| r.aw >= self.floor - tau) && self.two_point_min >= self.floor - tau
    }
}

/// Runs the counterexample preset and scans two-point measures on `[-1, 1]`.
pub fn counterexample_run(k: usize, n_max: usize) -> Result<CounterexampleReport> {
    use crate::scalar::Approx;
    let seq = counterexample_preset::<Approx>(k, n_max)?;
    let opts = LiftedAwOptions { max_depth: 0, max_pieces: 0 };
    let rows = stability_run(&seq, Rho::ONE, &opts)?;
    let nu = &seq.limit.1;
    let c = w1_to_uniform(nu, -1.0, 1.0) * k as f64;
    let steps = 20;
    let mut two_point_min = f64::INFINITY;
    for ip in 0..=steps {
        let p = ip as f64 / steps as f64;
        for ia in 0..=steps {
            for ib in ia..=steps {
                let a = -1.0 + 2.0 * ia as f64 / steps as f64;
                let b = -1.0 + 2.0 * ib as f64 / steps as f64;
                let tp = DiscreteMeasure::from_pairs(vec![(Approx(a), Approx(p)), (Approx(b), Approx(1.0 - p))])?;
                two_point_min = two_point_min.min(tp.wasserstein(nu, Rho::ONE)?);
            }
        }
    }
    Ok(CounterexampleReport { rows, c, k, floor: 0.25 - c / k as f64, two_point_min })
}

fn density(y: f64) -> f64 {
    let e = std::f64::consts::E;
    let a = y.abs();
    if a >= 1.0 {
        (1.0 + e) / 6.0 * (-a).exp()
    } else {
        ((-a).exp() + 1.0) / 6.0
    }
}

fn q_weight(y: f64) -> f64 {
    let e = std::f64::consts::E;
    if y <= -1.0 {
        e / (1.0 + e)
    } else if y < 1.0 {
        1.0 / (1.0 + y.exp())
    } else {
        1.0 / (1.0 + e)
    }
}

/// `q(y-1) f(y-1) + (1 - q(y+1)) f(y+1) - f(y)`.
pub fn density_residual(y: f64) -> f64 {
    q_weight(y - 1.0) * density(y - 1.0) + (1.0 - q_weight(y + 1.0)) * density(y + 1.0) - density(y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub max_residual: f64,
    pub sup_two_q_minus_one: f64,
}

pub fn density_identity_check(grid: &[f64]) -> DensityReport {
    let max_residual = grid.iter().map(|&y| density_residual(y).abs()).fold(0.0, f64::max);
    let sup_two_q_minus_one = grid.iter().map(|&y| (2.0 * q_weight(y) - 1.0).abs()).fold(0.0, f64::max);
    DensityReport { max_residual, sup_two_q_minus_one }
}

/// `lo, lo + step, ...` up to `hi` inclusive, computed from integer offsets.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as i64;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Approx, Rational};

    #[test]
    fn constant_sequence_has_zero_distances() {
        let seq = constant_preset::<Rational>(3).unwrap();
        let rows = stability_run(&seq, Rho::ONE, &LiftedAwOptions::default()).unwrap();
        assert!(rows.iter().all(|r| r.aw == 0.0 && r.aw_lifted == 0.0 && r.w_mu == 0.0));
        assert!(jump_inclusion_check(&seq, 1e-12));
    }

    #[test]
    fn presets_and_inclusion() {
        let jump = jump_preset::<Approx>(8).unwrap();
        assert!(jump.terms.iter().all(|(_, m, n)| m.convex_order(n)));
        assert!(jump_inclusion_check(&jump, 1e-12));
        let ce = counterexample_preset::<Approx>(16, 4).unwrap();
        assert!(!jump_inclusion_check(&ce, 1e-3));
        assert!(matches!(counterexample_preset::<Approx>(4, 2), Err(Error::Scale(_))));
    }

    #[test]
    fn uniform_gap_of_midpoint_grid() {
        let g = midpoint_grid::<Approx>(10, Approx(1.0)).unwrap();
        assert!((w1_to_uniform(&g, -1.0, 1.0) - 0.05).abs() < 1e-12);
        let two = DiscreteMeasure::from_pairs(vec![(Approx(-0.5), Approx(0.5)), (Approx(0.5), Approx(0.5))]).unwrap();
        assert!((w1_to_uniform(&two, -1.0, 1.0) - 0.25).abs() < 1e-12);
        assert!((w1_to_uniform(&DiscreteMeasure::dirac(Approx(0.0)), -1.0, 1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn density_identity_points() {
        assert_eq!(density_residual(0.0), 0.0);
        assert!(density_residual(3.0).abs() <= 1e-14);
        let total: f64 = uniform_grid(-40.0, 40.0, 1e-3).iter().map(|&y| density(y) * 1e-3).sum();
        assert!((total - 1.0).abs() < 1e-5);
    }
}
