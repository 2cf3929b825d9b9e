//! Consensus ADMM over the local-consistency relaxation.
//!
//! Each factor keeps a local copy of the variables it touches. One iteration
//! projects every factor's dual-adjusted local scores onto its polytope,
//! averages the local copies into global posteriors and moves the scaled
//! duals by the disagreement between local copies and posteriors.

use super::projection::{max_linear, project_in_place};
use super::{FactorGraph, FactorKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmSettings {
    /// Augmented-Lagrangian penalty (fixed for the whole run).
    pub penalty: f64,
    pub max_iterations: usize,
    /// Threshold on both the primal and the dual residual.
    pub residual_tolerance: f64,
    /// Reserved for randomized tie-breaking; the solver breaks ties
    /// lexicographically and does not consume it.
    pub seed: u64,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings {
            penalty: 0.1,
            max_iterations: 1000,
            residual_tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl AdmmSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.penalty > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ADMM penalty must be positive, got {}",
                self.penalty
            )));
        }
        if !(self.residual_tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "residual tolerance must be positive, got {}",
                self.residual_tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Every posterior is within the residual tolerance of 0 or 1.
    Integral,
    /// Residuals converged at a fractional point.
    Fractional,
    /// The iteration budget ran out first.
    MaxIterations,
}

/// Outcome of the relaxed solve, before any rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSolution {
    pub posteriors: Vec<f64>,
    /// Dual value at the final multipliers; an upper bound on the relaxed
    /// (and therefore the integral) optimum.
    pub upper_bound: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
}

impl RelaxedSolution {
    pub fn is_integral(&self, tolerance: f64) -> bool {
        self.posteriors
            .iter()
            .all(|&p| p.min(1.0 - p).abs() <= tolerance)
    }

    pub fn status(&self, tolerance: f64) -> SolveStatus {
        if self.is_integral(tolerance) {
            SolveStatus::Integral
        } else if self.converged {
            SolveStatus::Fractional
        } else {
            SolveStatus::MaxIterations
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub posteriors: Vec<f64>,
    pub assignment: Vec<u8>,
    pub relaxed_objective: f64,
    pub rounded_objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Hard factors the rounded assignment violates. Zero whenever the
    /// status is `Integral` and the relaxation was solved.
    pub violated_factors: usize,
}

/// Per-variable rounding: 1 iff the posterior is strictly above 0.5.
pub fn round_threshold(posteriors: &[f64]) -> Vec<u8> {
    posteriors.iter().map(|&p| u8::from(p > 0.5)).collect()
}

/// Flat slot layout of a graph: one slot per (factor, literal).
struct Layout {
    offsets: Vec<usize>,
    kinds: Vec<FactorKind>,
    slot_var: Vec<usize>,
    slot_neg: Vec<bool>,
    degree: Vec<usize>,
}

impl Layout {
    fn new(g: &FactorGraph) -> Self {
        let n_slots: usize = g.factors().iter().map(|f| f.literals.len()).sum();
        let mut offsets = Vec::with_capacity(g.num_factors() + 1);
        let mut kinds = Vec::with_capacity(g.num_factors());
        let mut slot_var = Vec::with_capacity(n_slots);
        let mut slot_neg = Vec::with_capacity(n_slots);
        let mut degree = vec![0usize; g.num_variables()];
        offsets.push(0);
        for f in g.factors() {
            kinds.push(f.kind);
            for lit in &f.literals {
                slot_var.push(lit.variable);
                slot_neg.push(lit.negated);
                degree[lit.variable] += 1;
            }
            offsets.push(slot_var.len());
        }
        Layout {
            offsets,
            kinds,
            slot_var,
            slot_neg,
            degree,
        }
    }
}

/// Solver state that can seed a later solve on a graph with the same
/// structure (potentials may differ).
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    posteriors: Vec<f64>,
    /// Scaled multipliers, one per (factor, literal) slot.
    duals: Vec<f64>,
}

/// Runs ADMM and returns the relaxed solution without rounding.
pub fn solve_relaxed(g: &FactorGraph, s: &AdmmSettings) -> Result<RelaxedSolution> {
    solve_relaxed_from(g, s, None).map(|(r, _)| r)
}

/// Runs ADMM starting from `warm` when given, and returns the final state
/// alongside the solution.
pub fn solve_relaxed_from(
    g: &FactorGraph,
    s: &AdmmSettings,
    warm: Option<&WarmStart>,
) -> Result<(RelaxedSolution, WarmStart)> {
    s.validate()?;
    let n = g.num_variables();
    let layout = Layout::new(g);
    let n_slots = layout.slot_var.len();
    let theta = g.potentials();
    let eta = s.penalty;

    if let Some(w) = warm {
        if w.posteriors.len() != n || w.duals.len() != n_slots {
            return Err(Error::Dimension(format!(
                "warm start for {} variables / {} slots, graph has {n} / {n_slots}",
                w.posteriors.len(),
                w.duals.len()
            )));
        }
    }

    // free variables follow the sign of their potential, ties to 0
    let mut posteriors: Vec<f64> = match warm {
        Some(w) => w.posteriors.clone(),
        None => vec![0.5; n],
    };
    for i in 0..n {
        if layout.degree[i] == 0 {
            posteriors[i] = if theta[i] > 0.0 { 1.0 } else { 0.0 };
        }
    }

    // shifted[slot] = theta_i / (deg_i * eta) + scaled dual: the only
    // per-slot quantity the broadcast step needs
    let mut shifted: Vec<f64> = (0..n_slots)
        .map(|slot| {
            let v = layout.slot_var[slot];
            let dual = warm.map_or(0.0, |w| w.duals[slot]);
            theta[v] / (layout.degree[v] as f64 * eta) + dual
        })
        .collect();
    let base: Vec<f64> = (0..n_slots)
        .map(|slot| {
            let v = layout.slot_var[slot];
            theta[v] / (layout.degree[v] as f64 * eta)
        })
        .collect();

    let mut local = vec![0.0f64; n_slots];
    let mut accum = vec![0.0f64; n];
    let mut scratch: Vec<f64> = Vec::new();

    let norm = (n_slots.max(1)) as f64;
    let mut iterations = 0;
    let mut primal_residual = 0.0;
    let mut dual_residual = 0.0;
    let mut converged = n_slots == 0;

    while !converged && iterations < s.max_iterations {
        iterations += 1;

        // broadcast: per-factor projection of the dual-adjusted scores
        for (f, &kind) in layout.kinds.iter().enumerate() {
            let range = layout.offsets[f]..layout.offsets[f + 1];
            let buf = &mut local[range.clone()];
            for ((x, &v), &z) in buf
                .iter_mut()
                .zip(&layout.slot_var[range.clone()])
                .zip(&shifted[range.clone()])
            {
                *x = posteriors[v] + z;
            }
            project_in_place(kind, &layout.slot_neg[range], buf, &mut scratch);
        }

        // gather: average local copies
        accum.iter_mut().for_each(|a| *a = 0.0);
        for (&v, &q) in layout.slot_var.iter().zip(&local) {
            accum[v] += q;
        }
        let mut dual_sq = 0.0;
        for i in 0..n {
            let d = layout.degree[i];
            if d == 0 {
                continue;
            }
            let p = accum[i] / d as f64;
            let diff = p - posteriors[i];
            dual_sq += d as f64 * diff * diff;
            posteriors[i] = p;
        }

        // dual step on scaled multipliers
        let mut primal_sq = 0.0;
        for ((z, &v), &q) in shifted.iter_mut().zip(&layout.slot_var).zip(&local) {
            let diff = q - posteriors[v];
            primal_sq += diff * diff;
            *z -= diff;
        }

        primal_residual = (primal_sq / norm).sqrt();
        dual_residual = (dual_sq / norm).sqrt();
        converged = primal_residual < s.residual_tolerance && dual_residual < s.residual_tolerance;
    }

    // dual bound: free variables plus each factor's best linear score under
    // the final multipliers (multipliers of a variable sum to zero)
    let mut upper_bound: f64 = (0..n)
        .filter(|&i| layout.degree[i] == 0)
        .map(|i| theta[i].max(0.0))
        .sum();
    let mut scores = Vec::new();
    for (f, &kind) in layout.kinds.iter().enumerate() {
        let range = layout.offsets[f]..layout.offsets[f + 1];
        scores.clear();
        scores.extend(shifted[range.clone()].iter().map(|z| eta * z));
        upper_bound += max_linear(kind, &layout.slot_neg[range], &scores);
    }

    let duals = shifted.iter().zip(&base).map(|(z, b)| z - b).collect();
    let warm = WarmStart {
        posteriors: posteriors.clone(),
        duals,
    };
    Ok((
        RelaxedSolution {
            posteriors,
            upper_bound,
            iterations,
            primal_residual,
            dual_residual,
            converged,
        },
        warm,
    ))
}

/// Approximate MAP with per-variable threshold rounding.
///
/// Returns [`Error::Unsatisfiable`] when the solver fails to converge and the
/// rounded assignment still violates a hard factor.
pub fn solve_map(g: &FactorGraph, s: &AdmmSettings) -> Result<InferenceResult> {
    let relaxed = solve_relaxed(g, s)?;
    let assignment = round_threshold(&relaxed.posteriors);
    let violated_factors = g.count_violations(&assignment);
    if violated_factors > 0 && !relaxed.converged {
        return Err(Error::Unsatisfiable(format!(
            "no consistent solution after {} iterations (primal residual {:.3e}); \
             rounding violates {} hard factor(s)",
            relaxed.iterations, relaxed.primal_residual, violated_factors
        )));
    }
    let status = relaxed.status(s.residual_tolerance);
    Ok(InferenceResult {
        rounded_objective: g.objective(&assignment),
        relaxed_objective: relaxed.upper_bound,
        posteriors: relaxed.posteriors,
        assignment,
        status,
        iterations: relaxed.iterations,
        primal_residual: relaxed.primal_residual,
        dual_residual: relaxed.dual_residual,
        violated_factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_graph::{Factor, Literal};

    #[test]
    fn free_variable_follows_sign() {
        let g = FactorGraph::with_potentials(&[1.0, -1.0, 0.0]);
        let r = solve_map(&g, &AdmmSettings::default()).unwrap();
        assert_eq!(r.assignment, vec![1, 0, 0]);
        assert_eq!(r.rounded_objective, 1.0);
        assert_eq!(r.relaxed_objective, 1.0);
        assert_eq!(r.status, SolveStatus::Integral);
    }

    #[test]
    fn two_variable_xor() {
        let mut g = FactorGraph::with_potentials(&[2.0, 1.0]);
        g.add_factor(Factor::new(
            FactorKind::Xor,
            vec![Literal::positive(0), Literal::positive(1)],
        ))
        .unwrap();
        let r = solve_map(&g, &AdmmSettings::default()).unwrap();
        assert_eq!(r.assignment, vec![1, 0]);
        assert!((r.rounded_objective - 2.0).abs() < 1e-12);
        assert_eq!(r.status, SolveStatus::Integral);
        assert!(r.relaxed_objective >= 2.0 - 1e-6);
    }

    #[test]
    fn contradictory_factors_are_unsatisfiable() {
        let mut g = FactorGraph::with_potentials(&[0.3]);
        g.add_factor(Factor::new(FactorKind::Xor, vec![Literal::positive(0)])).unwrap();
        g.add_factor(Factor::new(FactorKind::Xor, vec![Literal::negative(0)])).unwrap();
        let err = solve_map(&g, &AdmmSettings::default()).unwrap_err();
        assert!(matches!(err, Error::Unsatisfiable(_)), "{err:?}");
    }

    #[test]
    fn settings_validation() {
        let g = FactorGraph::with_potentials(&[1.0]);
        let bad = AdmmSettings { penalty: 0.0, ..Default::default() };
        assert!(solve_map(&g, &bad).is_err());
        let bad = AdmmSettings { residual_tolerance: -1.0, ..Default::default() };
        assert!(solve_map(&g, &bad).is_err());
    }
}
