//! Shared generators and property checks used by several test targets.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use typedcrf::constraints::{self, NodeStateConstraint, StateLiteral};
use typedcrf::crf_model::{
    joint_feature, potential, predict_detailed, unroll, Labeling, Matrix, TypeSchema,
    TypedGraphInstance, Weights,
};
use typedcrf::factor_graph::{
    exhaustive_map, project_factor, solve_map, solve_relaxed, AdmmSettings, Factor, FactorGraph,
    FactorKind, Literal, SolveStatus,
};
use typedcrf::snake_data::{contains_snake, corrupt, generate_snake, Color};
use typedcrf::Error;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// factor graphs

pub fn random_kind<R: Rng>(rng: &mut R) -> FactorKind {
    FactorKind::ALL[rng.gen_range(0..FactorKind::ALL.len())]
}

/// Up to 12 variables with potentials in [-2, 2] and up to 6 hard factors.
pub fn random_graph<R: Rng>(rng: &mut R) -> FactorGraph {
    let n = rng.gen_range(1..=12);
    let potentials: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    let mut g = FactorGraph::with_potentials(&potentials);
    let n_factors = rng.gen_range(0..=6);
    for _ in 0..n_factors {
        let kind = random_kind(rng);
        let size = if kind == FactorKind::Imply {
            2
        } else {
            rng.gen_range(1..=n.min(4))
        };
        if size > n {
            continue;
        }
        let mut vars: Vec<usize> = (0..n).collect();
        for i in 0..size {
            let j = rng.gen_range(i..n);
            vars.swap(i, j);
        }
        let literals = vars[..size]
            .iter()
            .map(|&v| Literal {
                variable: v,
                negated: rng.gen_bool(0.3),
            })
            .collect();
        g.add_factor(Factor::new(kind, literals)).unwrap();
    }
    g
}

/// Every 0/1 vector satisfying the factor; these are the vertices of its
/// (integral) polytope.
pub fn polytope_vertices(kind: FactorKind, negations: &[bool]) -> Vec<Vec<f64>> {
    let n = negations.len();
    (0u32..1 << n)
        .filter_map(|mask| {
            let bits: Vec<u8> = (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect();
            let truth = bits.iter().zip(negations).map(|(&b, &neg)| (b == 1) != neg);
            kind.is_satisfied_by(truth)
                .then(|| bits.iter().map(|&b| b as f64).collect())
        })
        .collect()
}

pub fn in_polytope(kind: FactorKind, negations: &[bool], u: &[f64], tol: f64) -> bool {
    if u.iter().any(|&x| x < -tol || x > 1.0 + tol) {
        return false;
    }
    let lit: Vec<f64> = u
        .iter()
        .zip(negations)
        .map(|(&x, &neg)| if neg { 1.0 - x } else { x })
        .collect();
    let sum: f64 = lit.iter().sum();
    match kind {
        FactorKind::Xor => (sum - 1.0).abs() <= tol,
        FactorKind::AtMostOne => sum <= 1.0 + tol,
        FactorKind::Or => sum >= 1.0 - tol,
        FactorKind::Imply => lit[0] <= lit[1] + tol,
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Minimum squared distance from `v` to the points of a 0.01 grid inside
/// the polytope. Exhaustive, so only for up to 3 coordinates.
pub fn grid_min_sq_dist(kind: FactorKind, negations: &[bool], v: &[f64]) -> f64 {
    let n = v.len();
    assert!(n <= 3);
    let steps = 101usize;
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; n];
    loop {
        let u: Vec<f64> = idx.iter().map(|&i| i as f64 / 100.0).collect();
        if in_polytope(kind, negations, &u, 1e-12) {
            best = best.min(sq_dist(&u, v));
        }
        let mut d = 0;
        loop {
            if d == n {
                return best;
            }
            idx[d] += 1;
            if idx[d] < steps {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Idempotence, feasibility, vertex-based optimality and, for up to 3
/// coordinates, the 0.01-grid oracle, on `cases` random inputs.
pub fn check_projection_oracle(cases: usize, seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    for case in 0..cases {
        let kind = random_kind(&mut rng);
        let n = if kind == FactorKind::Imply {
            2
        } else {
            rng.gen_range(1..=6)
        };
        let negations: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..=3.0)).collect();
        let p = project_factor(kind, &negations, &v).map_err(|e| e.to_string())?;
        if !in_polytope(kind, &negations, &p, 1e-9) {
            return Err(format!("case {case}: {kind} {negations:?} {v:?} -> infeasible {p:?}"));
        }
        let again = project_factor(kind, &negations, &p).map_err(|e| e.to_string())?;
        if sq_dist(&again, &p).sqrt() > 1e-9 {
            return Err(format!("case {case}: projection not idempotent at {p:?}"));
        }
        // optimality over a polytope: (v - p) . (x - p) <= 0 for every
        // vertex x is equivalent to it holding on the whole polytope
        for x in polytope_vertices(kind, &negations) {
            let inner: f64 = v
                .iter()
                .zip(&p)
                .zip(&x)
                .map(|((vi, pi), xi)| (vi - pi) * (xi - pi))
                .sum();
            if inner > 1e-9 {
                return Err(format!(
                    "case {case}: {kind} {negations:?} {v:?} -> {p:?} beaten towards {x:?}"
                ));
            }
        }
        if n <= 3 && case % 4 == 0 {
            let grid = grid_min_sq_dist(kind, &negations, &v);
            if sq_dist(&p, &v) > grid + 1e-12 {
                return Err(format!("case {case}: grid point closer than {p:?} to {v:?}"));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Default, Clone, Copy)]
pub struct AdmmAgreement {
    pub feasible: usize,
    pub integral: usize,
    pub infeasible: usize,
}

/// ADMM against exhaustive enumeration on `count` random graphs.
pub fn check_admm_vs_exhaustive(count: usize, seed: u64) -> Result<AdmmAgreement, String> {
    let mut rng = rng(seed);
    let s = AdmmSettings::default();
    let mut stats = AdmmAgreement::default();
    for case in 0..count {
        let g = random_graph(&mut rng);
        let exact = exhaustive_map(&g);
        let relaxed = solve_relaxed(&g, &s).map_err(|e| e.to_string())?;
        match exact {
            Err(Error::Unsatisfiable(_)) => {
                stats.infeasible += 1;
                // any returned assignment is violating, so it must say so
                match solve_map(&g, &s) {
                    Err(Error::Unsatisfiable(_)) => {}
                    Err(e) => return Err(format!("case {case}: {e}")),
                    Ok(r) => {
                        if r.violated_factors == 0
                            || r.violated_factors != g.count_violations(&r.assignment)
                        {
                            return Err(format!("case {case}: violation not reported"));
                        }
                    }
                }
            }
            Err(e) => return Err(e.to_string()),
            Ok((_, best)) => {
                stats.feasible += 1;
                if relaxed.upper_bound < best - 1e-6 {
                    return Err(format!(
                        "case {case}: bound {} below optimum {best}",
                        relaxed.upper_bound
                    ));
                }
                let r = solve_map(&g, &s).map_err(|e| format!("case {case}: {e}"))?;
                if r.status == SolveStatus::Integral {
                    stats.integral += 1;
                    if !g.is_feasible(&r.assignment) {
                        return Err(format!("case {case}: Integral assignment violates a factor"));
                    }
                    if (r.rounded_objective - best).abs() > 1e-6 {
                        return Err(format!(
                            "case {case}: Integral objective {} vs optimum {best}",
                            r.rounded_objective
                        ));
                    }
                }
            }
        }
    }
    Ok(stats)
}

// ---------------------------------------------------------------------------
// typed CRF instances

pub struct RandomInstance {
    pub graph: TypedGraphInstance,
    pub labeling: Labeling,
    pub weights: Weights,
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// A random 1- or 2-type instance with at most `max_nodes` nodes per type.
pub fn random_instance<R: Rng>(rng: &mut R, max_nodes: usize) -> RandomInstance {
    let k = rng.gen_range(1..=2);
    let labels: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
    let node_dims: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
    let edge_dims: Vec<usize> = (0..k * k).map(|_| rng.gen_range(0..=2)).collect();
    let schema = TypeSchema::new(labels.clone(), node_dims.clone(), edge_dims.clone()).unwrap();
    let counts: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=max_nodes)).collect();
    let node_features = (0..k)
        .map(|t| random_matrix(rng, counts[t], node_dims[t]))
        .collect();
    let mut edges = Vec::new();
    let mut edge_features = Vec::new();
    for t in 0..k {
        for u in 0..k {
            let d = edge_dims[t * k + u];
            let mut list = Vec::new();
            if d > 0 {
                for a in 0..counts[t] {
                    for b in 0..counts[u] {
                        if (t != u || a != b) && rng.gen_bool(0.4) {
                            list.push((a, b));
                        }
                    }
                }
            }
            edge_features.push(random_matrix(rng, list.len(), d));
            edges.push(list);
        }
    }
    let graph = TypedGraphInstance::new(schema.clone(), node_features, edges, edge_features).unwrap();
    let labeling = random_labeling(rng, &graph);
    let flat: Vec<f64> = (0..schema.weight_len())
        .map(|_| rng.gen_range(-2.0..=2.0))
        .collect();
    let weights = Weights::unflatten(&schema, &flat).unwrap();
    RandomInstance {
        graph,
        labeling,
        weights,
    }
}

pub fn random_labeling<R: Rng>(rng: &mut R, g: &TypedGraphInstance) -> Labeling {
    Labeling::new(
        (0..g.schema().num_types())
            .map(|t| {
                (0..g.num_nodes(t))
                    .map(|_| rng.gen_range(0..g.schema().labels(t)))
                    .collect()
            })
            .collect(),
    )
}

/// Every labeling of `g`, in lexicographic order.
pub fn all_labelings(g: &TypedGraphInstance) -> Vec<Labeling> {
    let k = g.schema().num_types();
    let slots: Vec<(usize, usize)> = (0..k)
        .flat_map(|t| (0..g.num_nodes(t)).map(move |v| (t, v)))
        .collect();
    let mut out = Vec::new();
    let mut y = g.zero_labeling();
    loop {
        out.push(y.clone());
        let mut i = slots.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            let (t, v) = slots[i];
            let next = y.get(t, v) + 1;
            if next < g.schema().labels(t) {
                y.labels_mut(t)[v] = next;
                break;
            }
            y.labels_mut(t)[v] = 0;
        }
    }
}

pub fn check_joint_feature_identity(count: usize, seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    for case in 0..count {
        let inst = random_instance(&mut rng, 5);
        let score = potential(&inst.graph, &inst.labeling, &inst.weights).map_err(|e| e.to_string())?;
        let phi = joint_feature(&inst.graph, &inst.labeling).map_err(|e| e.to_string())?;
        let dot: f64 = inst.weights.flatten().iter().zip(&phi).map(|(a, b)| a * b).sum();
        if (score - dot).abs() > 1e-9 * (1.0 + score.abs()) {
            return Err(format!("case {case}: potential {score} vs dot {dot}"));
        }
    }
    Ok(())
}

/// Switched-on binary potentials reproduce the CRF potential for every
/// labeling of small random instances, and those indicators satisfy every
/// structural factor.
pub fn check_unroll_energy(count: usize, seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let mut done = 0;
    while done < count {
        let inst = random_instance(&mut rng, 2);
        if inst.graph.total_nodes() > 3 {
            continue;
        }
        done += 1;
        let u = unroll(&inst.graph, &inst.weights, &[]).map_err(|e| e.to_string())?;
        for y in all_labelings(&inst.graph) {
            let x = u.blocks.indicator(&inst.graph, &y);
            let energy = u.graph.objective(&x);
            let score = potential(&inst.graph, &y, &inst.weights).map_err(|e| e.to_string())?;
            if (energy - score).abs() > 1e-9 {
                return Err(format!("labeling {y:?}: unrolled {energy} vs potential {score}"));
            }
            if !u.graph.is_feasible(&x) {
                return Err(format!("labeling {y:?}: indicator violates a structural factor"));
            }
        }
    }
    Ok(())
}

pub fn check_flatten_round_trip(count: usize, seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    for case in 0..count {
        let inst = random_instance(&mut rng, 3);
        let flat = inst.weights.flatten();
        if flat.len() != inst.graph.schema().weight_len() {
            return Err(format!("case {case}: flattened length {}", flat.len()));
        }
        let back = Weights::unflatten(inst.graph.schema(), &flat).map_err(|e| e.to_string())?;
        if back != inst.weights {
            return Err(format!("case {case}: round trip changed the weights"));
        }
    }
    Ok(())
}

pub fn random_constraint<R: Rng>(rng: &mut R, g: &TypedGraphInstance) -> NodeStateConstraint {
    let k = g.schema().num_types();
    let mut triples: Vec<(usize, usize, usize)> = (0..k)
        .flat_map(|t| {
            (0..g.num_nodes(t)).flat_map(move |v| (0..g.schema().labels(t)).map(move |s| (t, v, s)))
        })
        .collect();
    let kind = if triples.len() < 2 {
        FactorKind::Or
    } else {
        random_kind(rng)
    };
    let size = if kind == FactorKind::Imply {
        2
    } else {
        rng.gen_range(1..=3.min(triples.len()))
    };
    for i in 0..size {
        let j = rng.gen_range(i..triples.len());
        triples.swap(i, j);
    }
    let literals = triples[..size]
        .iter()
        .map(|&(t, v, s)| {
            let lit = StateLiteral::new(t, v, s);
            if rng.gen_bool(0.3) {
                lit.negated()
            } else {
                lit
            }
        })
        .collect();
    NodeStateConstraint::new(kind, literals).unwrap()
}

/// Constrained predictions satisfy their constraints, and `check` agrees
/// with factor evaluation on the unrolled graph.
pub fn check_constraint_satisfaction(count: usize, seed: u64) -> Result<usize, String> {
    let mut rng = rng(seed);
    let settings = AdmmSettings::default();
    let mut predicted = 0;
    for case in 0..count {
        let inst = random_instance(&mut rng, 3);
        let n_constraints = rng.gen_range(1..=3);
        let cs: Vec<NodeStateConstraint> = (0..n_constraints)
            .map(|_| random_constraint(&mut rng, &inst.graph))
            .collect();
        let u = unroll(&inst.graph, &inst.weights, &cs).map_err(|e| e.to_string())?;
        let compiled = constraints::compile(&cs, &u.blocks).map_err(|e| e.to_string())?;
        for y in all_labelings(&inst.graph).into_iter().take(64) {
            let x = u.blocks.indicator(&inst.graph, &y);
            let by_factors = compiled.iter().all(|f| f.is_satisfied(&x));
            if by_factors != constraints::check(&cs, &y) {
                return Err(format!("case {case}: check disagrees with compiled factors"));
            }
        }
        match predict_detailed(&inst.graph, &inst.weights, &settings, &cs) {
            Ok(p) => {
                predicted += 1;
                if !constraints::check(&cs, &p.labeling) {
                    return Err(format!("case {case}: prediction violates its constraints"));
                }
            }
            Err(Error::Unsatisfiable(_)) => {
                let any = all_labelings(&inst.graph)
                    .iter()
                    .any(|y| constraints::check(&cs, y));
                if any {
                    return Err(format!("case {case}: satisfiable constraints reported unsatisfiable"));
                }
            }
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    Ok(predicted)
}

// ---------------------------------------------------------------------------
// snake data

#[derive(Debug, Clone, Copy)]
pub struct GeneratorStats {
    pub background_fraction: f64,
    pub discard_rate: f64,
}

pub fn check_generator_consistency(count: usize, seed: u64) -> Result<GeneratorStats, String> {
    let (mut cells, mut background, mut discarded) = (0usize, 0usize, 0usize);
    for i in 0..count as u64 {
        let img = generate_snake(seed.wrapping_mul(1_000_003).wrapping_add(i));
        if !img.contains_snake() {
            return Err(format!("snake {i} fails the checker"));
        }
        cells += img.num_cells();
        background += img.colors().iter().filter(|&&c| c == Color::Bg).count();
        match corrupt(&img, seed ^ (i << 1)) {
            None => discarded += 1,
            Some(sample) => {
                if sample.image.contains_snake()
                    || contains_snake(sample.image.height(), sample.image.width(), sample.image.colors())
                {
                    return Err(format!("corruption of snake {i} still contains a snake"));
                }
                if sample.image.labels().iter().any(|&l| l != 0) {
                    return Err(format!("corruption of snake {i} keeps snake labels"));
                }
            }
        }
    }
    Ok(GeneratorStats {
        background_fraction: background as f64 / cells as f64,
        discard_rate: discarded as f64 / count as f64,
    })
}
