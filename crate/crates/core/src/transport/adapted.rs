use super::dense_lp::solve_lp;
use super::{solve_ot, TransportPlan};
use crate::coupling::DiscreteCoupling;
use crate::error::{Error, Result};
use crate::scalar::{Rho, Scalar};

/// Largest first-marginal support and kernel support accepted by the nested oracle.
pub const NESTED_ORACLE_LIMIT: usize = 5;

#[derive(Clone, Debug)]
pub struct AwResult<S> {
    /// `AW_ρ^ρ`.
    pub value_pow: S,
    pub rho: Rho,
    /// Optimal coupling `χ` of the first marginals.
    pub plan: TransportPlan<S>,
    pub row_atoms: Vec<S>,
    pub col_atoms: Vec<S>,
}

impl<S: Scalar> AwResult<S> {
    pub fn value(&self) -> f64 {
        self.value_pow.root(self.rho)
    }

    pub fn plan_coupling(&self) -> Result<DiscreteCoupling<S>> {
        self.plan.to_coupling(&self.row_atoms, &self.col_atoms)
    }
}

/// `|x - x'|^ρ + W_ρ^ρ(π_x, π'_{x'})` over pairs of first-marginal atoms.
pub fn kernel_cost_matrix<S: Scalar>(
    pi: &DiscreteCoupling<S>,
    pi2: &DiscreteCoupling<S>,
    rho: Rho,
) -> Result<Vec<Vec<S>>> {
    let (k1, k2) = (pi.disintegrate(), pi2.disintegrate());
    k1.iter()
        .map(|(x, p)| {
            k2.iter()
                .map(|(x2, p2)| Ok((x.clone() - x2.clone()).abs_pow(rho)? + p.wasserstein_pow(p2, rho)?))
                .collect()
        })
        .collect()
}

pub fn adapted_wasserstein<S: Scalar>(
    pi: &DiscreteCoupling<S>,
    pi2: &DiscreteCoupling<S>,
    rho: Rho,
) -> Result<AwResult<S>> {
    let cost = kernel_cost_matrix(pi, pi2, rho)?;
    let (mu, mu2) = (pi.first_marginal(), pi2.first_marginal());
    let (value_pow, plan) = solve_ot(&cost, mu.weights(), mu2.weights())?;
    Ok(AwResult { value_pow, rho, plan, row_atoms: mu.atoms().to_vec(), col_atoms: mu2.atoms().to_vec() })
}

fn check_oracle_scale<S: Scalar>(pi: &DiscreteCoupling<S>) -> Result<()> {
    let (mu, nu) = (pi.first_marginal(), pi.second_marginal());
    if mu.len() > NESTED_ORACLE_LIMIT || nu.len() > NESTED_ORACLE_LIMIT {
        return Err(Error::Scale(format!(
            "nested oracle handles at most {NESTED_ORACLE_LIMIT}x{NESTED_ORACLE_LIMIT} supports, got {}x{}",
            mu.len(),
            nu.len()
        )));
    }
    Ok(())
}

/// `AW_ρ^ρ` as the bicausal transport LP over `η(x, y, x', y')`, solved densely.
///
/// Independent of the kernel quantile formula: causality is imposed through the
/// linear constraints `η(x, y, x', ·) = π_x(y) η(x, ·, x', ·)` and the symmetric
/// ones for the second coupling.
pub fn nested_wasserstein_bruteforce<S: Scalar>(
    pi: &DiscreteCoupling<S>,
    pi2: &DiscreteCoupling<S>,
    rho: Rho,
) -> Result<S> {
    check_oracle_scale(pi)?;
    check_oracle_scale(pi2)?;
    let (p1, p2) = (pi.points(), pi2.points());
    let (k1, k2) = (pi.disintegrate(), pi2.disintegrate());
    let (xs1, xs2) = (pi.first_marginal(), pi2.first_marginal());
    let nvar = p1.len() * p2.len();
    let var = |a: usize, b: usize| a * p2.len() + b;

    let mut rows: Vec<Vec<S>> = Vec::new();
    let mut rhs: Vec<S> = Vec::new();
    for (a, pa) in p1.iter().enumerate() {
        let mut row = vec![S::zero(); nvar];
        for b in 0..p2.len() {
            row[var(a, b)] = S::one();
        }
        rows.push(row);
        rhs.push(pa.2.clone());
    }
    for (b, pb) in p2.iter().enumerate() {
        let mut row = vec![S::zero(); nvar];
        for a in 0..p1.len() {
            row[var(a, b)] = S::one();
        }
        rows.push(row);
        rhs.push(pb.2.clone());
    }
    // causality in the first coupling
    for (a, (x, y, _)) in p1.iter().enumerate() {
        let ky = k1.get(x).expect("kernel at atom").weight_of(y);
        for x2 in xs2.atoms() {
            let mut row = vec![S::zero(); nvar];
            for (b, pb) in p2.iter().enumerate() {
                if pb.0 != *x2 {
                    continue;
                }
                for (a2, pa2) in p1.iter().enumerate() {
                    if pa2.0 == *x {
                        let v = row[var(a2, b)].clone() - ky.clone();
                        row[var(a2, b)] = v;
                    }
                }
                let v = row[var(a, b)].clone() + S::one();
                row[var(a, b)] = v;
            }
            rows.push(row);
            rhs.push(S::zero());
        }
    }
    // causality in the second coupling
    for (b, (x2, y2, _)) in p2.iter().enumerate() {
        let ky = k2.get(x2).expect("kernel at atom").weight_of(y2);
        for x in xs1.atoms() {
            let mut row = vec![S::zero(); nvar];
            for (a, pa) in p1.iter().enumerate() {
                if pa.0 != *x {
                    continue;
                }
                for (b2, pb2) in p2.iter().enumerate() {
                    if pb2.0 == *x2 {
                        let v = row[var(a, b2)].clone() - ky.clone();
                        row[var(a, b2)] = v;
                    }
                }
                let v = row[var(a, b)].clone() + S::one();
                row[var(a, b)] = v;
            }
            rows.push(row);
            rhs.push(S::zero());
        }
    }
    let mut cost = Vec::with_capacity(nvar);
    for (x, y, _) in p1 {
        for (x2, y2, _) in p2 {
            cost.push((x.clone() - x2.clone()).abs_pow(rho)? + (y.clone() - y2.clone()).abs_pow(rho)?);
        }
    }
    let (value, _) = solve_lp(&rows, &rhs, &cost)?;
    Ok(value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub aw_rho: f64,
    pub aw_1: f64,
    pub w_rho_first: f64,
    pub w_rho_second: f64,
    /// `AW_ρ` small.
    pub lhs: bool,
    /// `AW_1` small and both marginal `W_ρ` small.
    pub rhs: bool,
}

impl EquivalenceReport {
    pub fn consistent(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Compares both sides of `AW_ρ → 0 ⟺ (AW_1 → 0 and W_ρ → 0 on marginals)` at the
/// last term of the sequence, with smallness threshold `eps`.
pub fn aw_rho_equivalence_check<S: Scalar>(
    sequence: &[DiscreteCoupling<S>],
    limit: &DiscreteCoupling<S>,
    rho: Rho,
    eps: f64,
) -> Result<EquivalenceReport> {
    let last = sequence.last().ok_or_else(|| Error::Parameter("empty sequence".into()))?;
    let aw_rho = adapted_wasserstein(last, limit, rho)?.value();
    let aw_1 = adapted_wasserstein(last, limit, Rho::ONE)?.value();
    let w_rho_first = last.first_marginal().wasserstein(&limit.first_marginal(), rho)?;
    let w_rho_second = last.second_marginal().wasserstein(&limit.second_marginal(), rho)?;
    Ok(EquivalenceReport {
        aw_rho,
        aw_1,
        w_rho_first,
        w_rho_second,
        lhs: aw_rho <= eps,
        rhs: aw_1 <= eps && w_rho_first <= eps && w_rho_second <= eps,
    })
}
