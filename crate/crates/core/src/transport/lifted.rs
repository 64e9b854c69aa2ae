use super::solve_ot;
use crate::coupling::LiftedCoupling;
use crate::error::{Error, Result};
use crate::piecewise::merge_breakpoints;
use crate::scalar::{sum, Rho, Scalar};

#[derive(Clone, Debug)]
pub struct LiftedAwOptions {
    /// Maximum number of uniform bisection rounds.
    pub max_depth: u32,
    /// Skip the segment relaxations once either side has more pieces than this.
    pub max_pieces: usize,
}

impl Default for LiftedAwOptions {
    fn default() -> Self {
        Self { max_depth: 3, max_pieces: 256 }
    }
}

/// Bracket on `ÂW_ρ^ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedAw<S> {
    pub lower: S,
    pub upper: S,
    /// Cost of the identity coupling of the levels.
    pub diagonal: S,
    pub depth: u32,
}

impl<S: Scalar> LiftedAw<S> {
    pub fn converged(&self) -> bool {
        self.lower == self.upper
    }
}

struct Piece<S> {
    a: S,
    b: S,
    seg: usize,
}

fn split<S: Scalar>(lifted: &LiftedCoupling<S>, depth: u32) -> Vec<Piece<S>> {
    let parts = 1i64 << depth;
    let mut out = Vec::new();
    for (k, s) in lifted.segments().iter().enumerate() {
        let step = s.len() / S::from_i64(parts);
        for i in 0..parts {
            let a = s.a.clone() + step.clone() * S::from_i64(i);
            let b = if i + 1 == parts { s.b.clone() } else { a.clone() + step.clone() };
            out.push(Piece { a, b, seg: k });
        }
    }
    out
}

fn from_f64<S: Scalar>(x: f64) -> Result<S> {
    S::from_f64(x).ok_or_else(|| Error::Parameter(format!("cannot represent {x}")))
}

/// `∫_I ∫_J |u - v|^ρ du dv`.
fn abs_pow_double_integral<S: Scalar>(a: &S, b: &S, c: &S, d: &S, rho: Rho) -> Result<S> {
    let r2 = Rho::new(rho.value() + 2.0)?;
    let norm = from_f64::<S>((rho.value() + 1.0) * (rho.value() + 2.0))?;
    let f = |t: S| -> Result<S> { Ok(t.abs_pow(r2)? / norm.clone()) };
    let v = f(b.clone() - d.clone())? - f(a.clone() - d.clone())? - f(b.clone() - c.clone())? + f(a.clone() - c.clone())?;
    Ok(-v)
}

/// `ÂW_ρ^ρ(π̂, π̂')` bracketed by segment relaxations.
///
/// The lower bound replaces `|u - u'|^ρ` by the gap between the two level
/// intervals; the upper bound is the better of the identity coupling and the
/// plan spreading mass uniformly over each pair of intervals. Both are refined
/// by bisecting every segment until they meet or the depth budget runs out.
pub fn lifted_adapted_wasserstein<S: Scalar>(
    p: &LiftedCoupling<S>,
    q: &LiftedCoupling<S>,
    rho: Rho,
    opts: &LiftedAwOptions,
) -> Result<LiftedAw<S>> {
    let (sp, sq) = (p.segments(), q.segments());
    let mut base: Vec<Vec<S>> = Vec::with_capacity(sp.len());
    for s in sp {
        let mut row = Vec::with_capacity(sq.len());
        for t in sq {
            row.push((s.x.clone() - t.x.clone()).abs_pow(rho)? + s.kernel.wasserstein_pow(&t.kernel, rho)?);
        }
        base.push(row);
    }

    let bp = merge_breakpoints(&p.breakpoints(), &q.breakpoints());
    let mut diagonal = S::zero();
    let (mut i, mut j) = (0, 0);
    for w in bp.windows(2) {
        while sp[i].b < w[1] {
            i += 1;
        }
        while sq[j].b < w[1] {
            j += 1;
        }
        diagonal = diagonal + base[i][j].clone() * (w[1].clone() - w[0].clone());
    }

    let mut best = LiftedAw { lower: S::zero(), upper: diagonal.clone(), diagonal: diagonal.clone(), depth: 0 };
    if best.converged() {
        return Ok(best);
    }
    for depth in 0..=opts.max_depth {
        let (pp, pq) = (split(p, depth), split(q, depth));
        if pp.len() > opts.max_pieces || pq.len() > opts.max_pieces {
            break;
        }
        let mut lo_cost = Vec::with_capacity(pp.len());
        let mut up_cost = Vec::with_capacity(pp.len());
        for s in &pp {
            let mut lo_row = Vec::with_capacity(pq.len());
            let mut up_row = Vec::with_capacity(pq.len());
            let ls = s.b.clone() - s.a.clone();
            for t in &pq {
                let lt = t.b.clone() - t.a.clone();
                let gap = (t.a.clone() - s.b.clone()).max_of(&(s.a.clone() - t.b.clone())).pos_part();
                let c = base[s.seg][t.seg].clone();
                lo_row.push(c.clone() + gap.abs_pow(rho)?);
                let spread = abs_pow_double_integral(&s.a, &s.b, &t.a, &t.b, rho)? / (ls.clone() * lt);
                up_row.push(c + spread);
            }
            lo_cost.push(lo_row);
            up_cost.push(up_row);
        }
        let wp: Vec<S> = pp.iter().map(|s| s.b.clone() - s.a.clone()).collect();
        let wq: Vec<S> = pq.iter().map(|s| s.b.clone() - s.a.clone()).collect();
        let (lower, _) = solve_ot(&lo_cost, &wp, &wq)?;
        let (upper, _) = solve_ot(&up_cost, &wp, &wq)?;
        best = LiftedAw {
            lower: lower.max_of(&best.lower),
            upper: upper.min_of(&best.upper),
            diagonal: diagonal.clone(),
            depth,
        };
        if best.converged() {
            break;
        }
    }
    Ok(best)
}

/// `∫ |mean(p_u) - x(u)| du`, the lower bound on `ÂW_1` to any lifted martingale coupling.
pub fn lifted_barycentre_bound<S: Scalar>(p: &LiftedCoupling<S>) -> S {
    sum(p.segments().iter().map(|s| s.len() * (s.kernel.mean() - s.x.clone()).abs()))
}
