use super::dense_lp::solve_unique;
use crate::coupling::DiscreteCoupling;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::scalar::Scalar;

/// Largest `|supp μ| · |supp ν|` accepted by [`martingale_vertices`].
pub const VERTEX_ENUMERATION_LIMIT: usize = 16;

/// Every vertex of the polytope of martingale couplings between `μ` and `ν`.
///
/// A vertex is identified by its support: a set of cells with linearly
/// independent constraint columns whose unique solution is strictly positive.
pub fn martingale_vertices<S: Scalar>(
    mu: &DiscreteMeasure<S>,
    nu: &DiscreteMeasure<S>,
) -> Result<Vec<DiscreteCoupling<S>>> {
    let (m, n) = (mu.len(), nu.len());
    let cells = m * n;
    if cells > VERTEX_ENUMERATION_LIMIT {
        return Err(Error::Scale(format!("vertex enumeration handles at most {VERTEX_ENUMERATION_LIMIT} cells, got {cells}")));
    }
    let nrows = 2 * m + n;
    let column = |cell: usize| -> Vec<S> {
        let (i, j) = (cell / n, cell % n);
        let mut col = vec![S::zero(); nrows];
        col[i] = S::one();
        col[m + j] = S::one();
        col[m + n + i] = nu.atoms()[j].clone() - mu.atoms()[i].clone();
        col
    };
    let columns: Vec<Vec<S>> = (0..cells).map(column).collect();
    let mut rhs: Vec<S> = mu.weights().to_vec();
    rhs.extend(nu.weights().iter().cloned());
    rhs.extend((0..m).map(|_| S::zero()));

    let mut out = Vec::new();
    for mask in 1u32..(1u32 << cells) {
        let chosen: Vec<usize> = (0..cells).filter(|c| mask & (1 << c) != 0).collect();
        if chosen.len() > nrows {
            continue;
        }
        let a: Vec<Vec<S>> = (0..nrows).map(|r| chosen.iter().map(|&c| columns[c][r].clone()).collect()).collect();
        let Some(z) = solve_unique(&a, &rhs) else { continue };
        if z.iter().all(|v| v.is_positive()) {
            let pts = chosen
                .iter()
                .zip(z)
                .map(|(&c, w)| (mu.atoms()[c / n].clone(), nu.atoms()[c % n].clone(), w))
                .collect();
            out.push(DiscreteCoupling::new(pts)?);
        }
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
    fn two_point_case_has_a_unique_vertex() {
        let mu = DiscreteMeasure::from_pairs(vec![(r(-1, 1), r(1, 2)), (r(1, 1), r(1, 2))]).unwrap();
        let nu = DiscreteMeasure::from_pairs(vec![(r(-2, 1), r(1, 2)), (r(2, 1), r(1, 2))]).unwrap();
        let v = martingale_vertices(&mu, &nu).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].disintegrate().get(&r(-1, 1)).unwrap().weight_of(&r(-2, 1)), r(3, 4));
    }

    #[test]
    fn not_in_convex_order_has_none() {
        let mu = DiscreteMeasure::from_pairs(vec![(r(-2, 1), r(1, 2)), (r(2, 1), r(1, 2))]).unwrap();
        let nu = DiscreteMeasure::from_pairs(vec![(r(-1, 1), r(1, 2)), (r(1, 1), r(1, 2))]).unwrap();
        assert!(martingale_vertices(&mu, &nu).unwrap().is_empty());
    }
}
