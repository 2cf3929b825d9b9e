use super::FactorGraph;
use crate::error::{Error, Result};

pub const MAX_EXHAUSTIVE_VARIABLES: usize = 24;

/// Exact MAP by enumerating every assignment.
///
/// Ties go to the lexicographically smallest assignment.
pub fn exhaustive_map(g: &FactorGraph) -> Result<(Vec<u8>, f64)> {
    let n = g.num_variables();
    if n > MAX_EXHAUSTIVE_VARIABLES {
        return Err(Error::Capacity(format!(
            "exhaustive MAP supports at most {MAX_EXHAUSTIVE_VARIABLES} variables, got {n}"
        )));
    }
    let potentials = g.potentials();
    let mut assignment = vec![0u8; n];
    let mut best: Option<(Vec<u8>, f64)> = None;
    // variable 0 is the most significant bit, so counting up walks the
    // assignments in lexicographic order and strict improvement keeps the
    // smallest maximizer
    for mask in 0u64..(1u64 << n) {
        for (i, x) in assignment.iter_mut().enumerate() {
            *x = ((mask >> (n - 1 - i)) & 1) as u8;
        }
        if !g.is_feasible(&assignment) {
            continue;
        }
        let value: f64 = potentials
            .iter()
            .zip(&assignment)
            .filter(|(_, &x)| x == 1)
            .map(|(p, _)| *p)
            .sum();
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((assignment.clone(), value));
        }
    }
    best.ok_or_else(|| Error::Unsatisfiable("no assignment satisfies every factor".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_graph::{Factor, FactorKind, Literal};

    #[test]
    fn single_negative_variable() {
        let g = FactorGraph::with_potentials(&[-1.0]);
        assert_eq!(exhaustive_map(&g).unwrap(), (vec![0], 0.0));
    }

    #[test]
    fn xor_unique_argmax() {
        let mut g = FactorGraph::with_potentials(&[0.0, 0.0, 5.0]);
        g.add_factor(Factor::new(
            FactorKind::Xor,
            (0..3).map(Literal::positive).collect(),
        ))
        .unwrap();
        assert_eq!(exhaustive_map(&g).unwrap(), (vec![0, 0, 1], 5.0));
    }

    #[test]
    fn imply() {
        let mut g = FactorGraph::with_potentials(&[3.0, -1.0]);
        g.add_factor(Factor::new(
            FactorKind::Imply,
            vec![Literal::positive(0), Literal::positive(1)],
        ))
        .unwrap();
        assert_eq!(exhaustive_map(&g).unwrap(), (vec![1, 1], 2.0));
    }

    #[test]
    fn ties_are_lexicographic() {
        let mut g = FactorGraph::with_potentials(&[1.0, 1.0]);
        g.add_factor(Factor::new(
            FactorKind::Xor,
            vec![Literal::positive(0), Literal::positive(1)],
        ))
        .unwrap();
        assert_eq!(exhaustive_map(&g).unwrap().0, vec![0, 1]);
    }

    #[test]
    fn errors() {
        let g = FactorGraph::with_potentials(&[0.0; 25]);
        assert!(matches!(exhaustive_map(&g), Err(Error::Capacity(_))));
        let mut g = FactorGraph::with_potentials(&[0.0]);
        g.add_factor(Factor::new(FactorKind::Xor, vec![Literal::positive(0)])).unwrap();
        g.add_factor(Factor::new(FactorKind::Xor, vec![Literal::negative(0)])).unwrap();
        assert!(matches!(exhaustive_map(&g), Err(Error::Unsatisfiable(_))));
    }
}
