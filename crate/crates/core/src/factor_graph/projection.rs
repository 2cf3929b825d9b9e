//! Euclidean projections onto the polytopes of the hard logic factors.
//!
//! Every factor polytope is a box `[0,1]^n` intersected with at most one
//! linear constraint on the (possibly flipped) coordinates, so each projection
//! reduces to clipping plus, when needed, a projection onto a scaled simplex.

use super::FactorKind;
use crate::error::{Error, Result};

/// Projects `v` onto `{u : u >= 0, sum(u) = target_sum}`.
pub fn project_simplex(v: &[f64], target_sum: f64) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot project an empty vector onto the simplex".into(),
        ));
    }
    if !(target_sum > 0.0 && target_sum <= v.len() as f64) {
        return Err(Error::InvalidArgument(format!(
            "simplex target sum {target_sum} outside (0, {}]",
            v.len()
        )));
    }
    let mut out = v.to_vec();
    let mut scratch = Vec::with_capacity(v.len());
    simplex_in_place(&mut out, target_sum, &mut scratch);
    Ok(out)
}

/// Exact simplex projection. Short vectors use Michelot's fixed-point
/// iteration on the active set; long ones sort. `scratch` is reused between
/// calls to avoid allocating in the solver loop.
pub(crate) fn simplex_in_place(v: &mut [f64], target_sum: f64, scratch: &mut Vec<f64>) {
    if v.len() == 1 {
        v[0] = target_sum;
        return;
    }
    let threshold = if v.len() <= 64 {
        michelot_threshold(v, target_sum)
    } else {
        sorted_threshold(v, target_sum, scratch)
    };
    for x in v.iter_mut() {
        *x = (*x - threshold).max(0.0);
    }
}

fn michelot_threshold(v: &[f64], target_sum: f64) -> f64 {
    let mut active: u64 = if v.len() == 64 { u64::MAX } else { (1u64 << v.len()) - 1 };
    loop {
        let mut sum = 0.0;
        let mut count = 0u32;
        let mut bits = active;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            sum += v[i];
            count += 1;
        }
        let tau = (sum - target_sum) / f64::from(count);
        let mut next = 0u64;
        let mut bits = active;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if v[i] > tau {
                next |= 1 << i;
            }
        }
        // the active set only shrinks and never empties: the largest entry
        // always stays above the running threshold
        if next == active || next == 0 {
            return tau;
        }
        active = next;
    }
}

fn sorted_threshold(v: &[f64], target_sum: f64, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend_from_slice(v);
    scratch.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (k, &x) in scratch.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - target_sum) / (k + 1) as f64;
        if x - candidate > 0.0 {
            threshold = candidate;
        } else {
            break;
        }
    }
    threshold
}

/// Projects `v` onto the polytope of a factor of the given kind whose
/// literals carry the given negations.
pub fn project_factor(kind: FactorKind, negations: &[bool], v: &[f64]) -> Result<Vec<f64>> {
    if negations.len() != v.len() {
        return Err(Error::Dimension(format!(
            "{} negation flags for {} coordinates",
            negations.len(),
            v.len()
        )));
    }
    if v.is_empty() {
        return Err(Error::InvalidArgument("empty factor projection".into()));
    }
    if kind == FactorKind::Imply && v.len() != 2 {
        return Err(Error::InvalidFactor(format!(
            "IMPLY takes exactly 2 literals, got {}",
            v.len()
        )));
    }
    let mut out = v.to_vec();
    let mut scratch = Vec::with_capacity(v.len());
    project_in_place(kind, negations, &mut out, &mut scratch);
    Ok(out)
}

pub(crate) fn project_in_place(
    kind: FactorKind,
    negations: &[bool],
    v: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    flip(negations, v);
    project_literals(kind, v, scratch);
    flip(negations, v);
}

#[inline]
fn flip(negations: &[bool], v: &mut [f64]) {
    for (x, &neg) in v.iter_mut().zip(negations) {
        if neg {
            *x = 1.0 - *x;
        }
    }
}

/// Projection in literal space (after negated coordinates are flipped).
fn project_literals(kind: FactorKind, v: &mut [f64], scratch: &mut Vec<f64>) {
    match kind {
        FactorKind::Xor => simplex_in_place(v, 1.0, scratch),
        FactorKind::AtMostOne => {
            // when the box projection breaks the sum, the sum constraint is
            // active and the answer is the simplex projection
            if clipped_sum(v) > 1.0 {
                simplex_in_place(v, 1.0, scratch);
            } else {
                clip(v);
            }
        }
        FactorKind::Or => {
            if clipped_sum(v) < 1.0 {
                simplex_in_place(v, 1.0, scratch);
            } else {
                clip(v);
            }
        }
        FactorKind::Imply => {
            let (a, b) = (v[0], v[1]);
            let (ca, cb) = (a.clamp(0.0, 1.0), b.clamp(0.0, 1.0));
            if ca <= cb {
                v[0] = ca;
                v[1] = cb;
            } else {
                let m = (0.5 * (a + b)).clamp(0.0, 1.0);
                v[0] = m;
                v[1] = m;
            }
        }
    }
}

fn clipped_sum(v: &[f64]) -> f64 {
    v.iter().map(|x| x.clamp(0.0, 1.0)).sum()
}

fn clip(v: &mut [f64]) {
    for x in v.iter_mut() {
        *x = x.clamp(0.0, 1.0);
    }
}

/// Largest value of `sum_i scores_i * x_i` over the factor's feasible binary
/// configurations, where `x` are variable values (not literals).
///
/// Each factor polytope has integral vertices, so this is also the maximum of
/// the linear function over the relaxed polytope.
pub(crate) fn max_linear(kind: FactorKind, negations: &[bool], scores: &[f64]) -> f64 {
    // x = 1 - l for negated literals: s*x = s - s*l
    let mut constant = 0.0;
    let lit = |i: usize| {
        if negations[i] {
            -scores[i]
        } else {
            scores[i]
        }
    };
    for (i, &neg) in negations.iter().enumerate() {
        if neg {
            constant += scores[i];
        }
    }
    let n = scores.len();
    let best = match kind {
        FactorKind::Xor => (0..n).map(lit).fold(f64::NEG_INFINITY, f64::max),
        FactorKind::AtMostOne => (0..n).map(lit).fold(0.0, f64::max),
        FactorKind::Or => {
            let positive: f64 = (0..n).map(lit).filter(|s| *s > 0.0).sum();
            if positive > 0.0 {
                positive
            } else {
                (0..n).map(lit).fold(f64::NEG_INFINITY, f64::max)
            }
        }
        FactorKind::Imply => {
            let (a, b) = (lit(0), lit(1));
            0.0f64.max(b).max(a + b)
        }
    };
    constant + best
}
