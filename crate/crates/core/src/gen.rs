//! Random instances with small integer atoms and small-denominator weights.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coupling::DiscreteCoupling;
use crate::error::Result;
use crate::itmc::inverse_transform_martingale;
use crate::measure::DiscreteMeasure;
use crate::scalar::Scalar;

fn normalised<S: Scalar>(raw: &[i64]) -> Vec<S> {
    let total: i64 = raw.iter().sum();
    raw.iter().map(|&w| S::from_ratio(w, total)).collect()
}

/// Up to `max_atoms` distinct integer atoms in `[-span, span]`.
pub fn random_measure<S: Scalar, R: Rng>(rng: &mut R, max_atoms: usize, span: i64) -> DiscreteMeasure<S> {
    let n = rng.gen_range(1..=max_atoms.min((2 * span + 1) as usize));
    let mut pool: Vec<i64> = (-span..=span).collect();
    pool.shuffle(rng);
    let mut atoms: Vec<i64> = pool.into_iter().take(n).collect();
    atoms.sort_unstable();
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    DiscreteMeasure::new(atoms.into_iter().map(S::from_i64).collect(), normalised(&raw)).expect("valid by construction")
}

/// `μ ≤_cx ν` with both supports of size at most `max_atoms`, obtained by
/// spreading some atoms of `μ` into two-point martingale kernels.
pub fn random_convex_pair<S: Scalar, R: Rng>(rng: &mut R, max_atoms: usize) -> (DiscreteMeasure<S>, DiscreteMeasure<S>) {
    loop {
        let mu: DiscreteMeasure<S> = random_measure(rng, max_atoms, 4);
        let mut pairs = Vec::new();
        for (x, w) in mu.iter() {
            if rng.gen_bool(0.7) {
                let (a, b) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
                let (sa, sb) = (S::from_i64(a), S::from_i64(b));
                pairs.push((x.clone() - sa, w.clone() * S::from_ratio(b, a + b)));
                pairs.push((x.clone() + sb, w.clone() * S::from_ratio(a, a + b)));
            } else {
                pairs.push((x.clone(), w.clone()));
            }
        }
        let nu = DiscreteMeasure::from_pairs(pairs).expect("mass preserved");
        if nu.len() <= max_atoms && mu != nu {
            return (mu, nu);
        }
    }
}

/// A coupling whose first and second marginals have at most `m` and `n` atoms.
pub fn random_coupling<S: Scalar, R: Rng>(rng: &mut R, m: usize, n: usize) -> DiscreteCoupling<S> {
    let xs: DiscreteMeasure<S> = random_measure(rng, m, 4);
    let ys: DiscreteMeasure<S> = random_measure(rng, n, 4);
    loop {
        let mut raw = Vec::new();
        for x in xs.atoms() {
            let row: Vec<i64> = ys.atoms().iter().map(|_| if rng.gen_bool(0.6) { rng.gen_range(1..=3) } else { 0 }).collect();
            if row.iter().all(|&w| w == 0) {
                raw.clear();
                break;
            }
            raw.extend(ys.atoms().iter().zip(row).map(|(y, w)| (x.clone(), y.clone(), w)));
        }
        if raw.is_empty() {
            continue;
        }
        let total: i64 = raw.iter().map(|p| p.2).sum();
        let pts = raw.into_iter().map(|(x, y, w)| (x, y, S::from_ratio(w, total))).collect();
        return DiscreteCoupling::new(pts).expect("valid by construction");
    }
}

/// `t π^HF + (1 - t) M^IT` for a random convex-order pair; the dispersion
/// assumption is linear in the coupling, so the mixture inherits it.
pub fn random_bda_coupling<S: Scalar, R: Rng>(rng: &mut R, max_atoms: usize) -> Result<DiscreteCoupling<S>> {
    let (mu, nu) = random_convex_pair::<S, _>(rng, max_atoms);
    let hf = DiscreteCoupling::hoeffding_frechet(&mu, &nu);
    let t = S::from_ratio(rng.gen_range(1..=4), 4);
    if t == S::one() {
        return Ok(hf);
    }
    let (mit, _) = inverse_transform_martingale(&mu, &nu)?;
    let pts = hf
        .points()
        .iter()
        .map(|(x, y, w)| (x.clone(), y.clone(), t.clone() * w.clone()))
        .chain(mit.points().iter().map(|(x, y, w)| (x.clone(), y.clone(), (S::one() - t.clone()) * w.clone())))
        .collect();
    DiscreteCoupling::new(pts)
}

/// `μ` and its image under the dilation `x ↦ m + s (x - m)` about its mean, `s >= 1`.
pub fn random_dilation_pair<S: Scalar, R: Rng>(rng: &mut R, max_atoms: usize) -> (DiscreteMeasure<S>, DiscreteMeasure<S>) {
    let mu: DiscreteMeasure<S> = random_measure(rng, max_atoms, 3);
    let s = S::from_ratio(rng.gen_range(2..=6), 2);
    let m = mu.mean();
    let nu = mu.map_atoms(|x| m.clone() + s.clone() * (x.clone() - m.clone())).expect("dilation is injective");
    (mu, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (mu, nu) = random_convex_pair::<Rational, _>(&mut rng, 6);
            assert!(mu.convex_order(&nu) && nu.len() <= 6);
            let pi = random_bda_coupling::<Rational, _>(&mut rng, 5).unwrap();
            assert!(pi.barycentre_dispersion());
            let c = random_coupling::<Rational, _>(&mut rng, 4, 4);
            assert!(c.first_marginal().len() <= 4 && c.second_marginal().len() <= 4);
            let (a, b) = random_dilation_pair::<Rational, _>(&mut rng, 3);
            assert!(a.convex_order(&b) && DiscreteCoupling::hoeffding_frechet(&a, &b).is_monge());
        }
    }
}
