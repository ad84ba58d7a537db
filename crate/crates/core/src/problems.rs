//! Benchmark instance generators: random K-SAT, sink-free orientations and
//! delivery routes.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, ConstraintSet, Literal, Sidecar};
use crate::error::{Error, Result};
use crate::learn::Dataset;
use crate::mrf::ModelParams;
use crate::rng::{sequential, Domain};
use crate::sampler::{draw_valid_rows, SamplerConfig, SamplerKind, DEFAULT_RETRY_BATCHES};
use crate::scalar::Scalar;

/// Upper bound on Erdős–Rényi redraws while looking for a graph without
/// isolated vertices.
pub const MAX_GRAPH_DRAWS: usize = 1000;

pub const DEFAULT_EDGE_PROB: f64 = 0.55;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InstanceMetadata {
    Ksat {
        n: usize,
        clauses: usize,
        k: usize,
        seed: u64,
    },
    Sinkfree {
        vertices: usize,
        edge_prob: f64,
        seed: u64,
        /// Variable `e` orients `edges[e] = (i, j)`, `i < j`; `X_e = 1` means `i → j`.
        edges: Vec<(usize, usize)>,
    },
    Routes {
        cities: usize,
        seed: u64,
        /// Variable `v` selects the arc `arcs[v] = (from, to)`.
        arcs: Vec<(usize, usize)>,
        distances: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub constraints: ConstraintSet,
    pub metadata: InstanceMetadata,
}

impl ProblemInstance {
    pub fn family(&self) -> &'static str {
        match self.metadata {
            InstanceMetadata::Ksat { .. } => "ksat",
            InstanceMetadata::Sinkfree { .. } => "sinkfree",
            InstanceMetadata::Routes { .. } => "routes",
        }
    }

    /// Exactly-one groups plus the metadata, for writing next to the DIMACS file.
    pub fn sidecar(&self) -> Sidecar {
        let metadata = match serde_json::to_value(&self.metadata).expect("metadata serializes") {
            serde_json::Value::Object(map) => map,
            _ => unreachable!("tagged enum serializes to an object"),
        };
        Sidecar {
            exactly_one: self.constraints.exactly_one_groups().to_vec(),
            metadata,
        }
    }

    /// Routes start from `θ_ij = −distance(i, j)`; other families from zero.
    pub fn initial_theta<F: Scalar>(&self) -> ModelParams<F> {
        match &self.metadata {
            InstanceMetadata::Routes { arcs, distances, .. } => ModelParams::new(
                arcs.iter()
                    .map(|&(i, j)| F::of(-distances[i][j]))
                    .collect(),
            ),
            _ => ModelParams::zeros(self.constraints.n_vars()),
        }
    }
}

/// `L` clauses of exactly `K` distinct variables with fair-coin polarities.
pub fn gen_ksat(n: usize, l: usize, k: usize, seed: u64) -> Result<ProblemInstance> {
    if k > n {
        return Err(Error::InvalidConfig(format!("clause width {k} exceeds {n} variables")));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("clause width must be at least 1".into()));
    }
    let mut rng = sequential(seed, Domain::Generator);
    let clauses = (0..l)
        .map(|_| {
            let mut vars = sample(&mut rng, n, k).into_vec();
            vars.sort_unstable();
            Clause::new(
                vars.into_iter()
                    .map(|var| Literal {
                        var,
                        negated: rng.random(),
                    })
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProblemInstance {
        constraints: ConstraintSet::new(n, clauses, Vec::new())?,
        metadata: InstanceMetadata::Ksat {
            n,
            clauses: l,
            k,
            seed,
        },
    })
}

/// Clause for vertex `v` over its incident edges: `X_e` where `v` is the lower
/// endpoint, `¬X_e` where it is the higher one.
pub fn sinkfree_formula(num_vertices: usize, edges: &[(usize, usize)]) -> Result<ConstraintSet> {
    let clauses = (0..num_vertices)
        .map(|v| {
            Clause::new(
                edges
                    .iter()
                    .enumerate()
                    .filter(|(_, &(i, j))| i == v || j == v)
                    .map(|(e, &(i, _))| if i == v { Literal::pos(e) } else { Literal::neg(e) })
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ConstraintSet::new(edges.len(), clauses, Vec::new())
}

/// Sink-free orientations of an Erdős–Rényi graph, redrawn until every
/// vertex has an incident edge.
pub fn gen_sinkfree(num_vertices: usize, edge_prob: f64, seed: u64) -> Result<ProblemInstance> {
    if num_vertices < 2 {
        return Err(Error::InvalidConfig("need at least 2 vertices".into()));
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(Error::InvalidConfig(format!("edge probability {edge_prob} not in (0, 1]")));
    }
    let mut rng = sequential(seed, Domain::Generator);
    for _ in 0..MAX_GRAPH_DRAWS {
        let mut edges = Vec::new();
        let mut degree = vec![0usize; num_vertices];
        for i in 0..num_vertices {
            for j in i + 1..num_vertices {
                if rng.random::<f64>() < edge_prob {
                    edges.push((i, j));
                    degree[i] += 1;
                    degree[j] += 1;
                }
            }
        }
        if degree.iter().all(|&d| d > 0) {
            return Ok(ProblemInstance {
                constraints: sinkfree_formula(num_vertices, &edges)?,
                metadata: InstanceMetadata::Sinkfree {
                    vertices: num_vertices,
                    edge_prob,
                    seed,
                    edges,
                },
            });
        }
    }
    Err(Error::Generation(format!(
        "no graph without isolated vertices in {MAX_GRAPH_DRAWS} draws"
    )))
}

/// One variable per ordered city pair (no self-loops); each city has exactly
/// one successor and exactly one predecessor. Distances are a symmetric
/// matrix of uniform `[0, 1)` draws.
pub fn gen_routes(num_cities: usize, seed: u64) -> Result<ProblemInstance> {
    if num_cities < 2 {
        return Err(Error::InvalidConfig("need at least 2 cities".into()));
    }
    let mut rng = sequential(seed, Domain::Generator);
    let mut distances = vec![vec![0.0; num_cities]; num_cities];
    #[allow(clippy::needless_range_loop)]
    for i in 0..num_cities {
        for j in i + 1..num_cities {
            let d: f64 = rng.random();
            distances[i][j] = d;
            distances[j][i] = d;
        }
    }
    let arcs: Vec<(usize, usize)> = (0..num_cities)
        .flat_map(|i| (0..num_cities).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let var_of = |i: usize, j: usize| arcs.iter().position(|&a| a == (i, j)).expect("arc exists");
    let mut groups: Vec<Vec<usize>> = (0..num_cities)
        .map(|i| (0..num_cities).filter(|&j| j != i).map(|j| var_of(i, j)).collect())
        .collect();
    groups.extend(
        (0..num_cities).map(|j| (0..num_cities).filter(|&i| i != j).map(|i| var_of(i, j)).collect()),
    );
    Ok(ProblemInstance {
        constraints: ConstraintSet::new(arcs.len(), Vec::new(), groups)?,
        metadata: InstanceMetadata::Routes {
            cities: num_cities,
            seed,
            arcs,
            distances,
        },
    })
}

/// `count` valid assignments drawn from the preference model `θ*` with the
/// partial-rejection sampler.
pub fn gen_training_set<F: Scalar>(
    inst: &ProblemInstance,
    theta_star: &ModelParams<F>,
    count: usize,
    seed: u64,
) -> Result<Dataset> {
    theta_star.check_len(inst.constraints.n_vars())?;
    let cfg = SamplerConfig::new(count.max(1), seed);
    let rows = draw_valid_rows(
        SamplerKind::Nelson,
        &inst.constraints,
        theta_star,
        &cfg,
        count,
        DEFAULT_RETRY_BATCHES,
    )?;
    Dataset::new(rows, &inst.constraints)
}
