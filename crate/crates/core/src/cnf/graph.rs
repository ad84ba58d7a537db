use std::collections::BTreeSet;

use super::ConstraintSet;

/// Constraints are adjacent iff they share at least one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    adjacency: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Sorted neighbours of constraint `j`, excluding `j` itself.
    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.adjacency[j]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Each undirected edge once, as `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// `Γ(S)`: the set itself together with all direct neighbours, sorted.
    pub fn gamma(&self, set: &[usize]) -> Vec<usize> {
        let mut out: BTreeSet<usize> = set.iter().copied().collect();
        for &j in set {
            out.extend(self.adjacency[j].iter().copied());
        }
        out.into_iter().collect()
    }
}

pub fn build_dependency_graph(cs: &ConstraintSet) -> DependencyGraph {
    let m = cs.n_constraints();
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); cs.n_vars()];
    for j in 0..m {
        for v in cs.constraint_vars(j) {
            by_var[v].push(j);
        }
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for touching in &by_var {
        for (a, &i) in touching.iter().enumerate() {
            for &j in &touching[a + 1..] {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    DependencyGraph {
        adjacency: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
    }
}

pub fn gamma(g: &DependencyGraph, set: &[usize]) -> Vec<usize> {
    g.gamma(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::tests::two_clause;

    #[test]
    fn two_clause_single_edge() {
        let g = build_dependency_graph(&two_clause());
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(g.gamma(&[0]), vec![0, 1]);
        assert!(g.gamma(&[]).is_empty());
    }

    #[test]
    fn disjoint_clauses_have_no_edges() {
        let cs = ConstraintSet::from_dimacs_clauses(2, &[&[1], &[2]]).unwrap();
        let g = build_dependency_graph(&cs);
        assert_eq!(g.edges().count(), 0);
        assert_eq!(g.gamma(&[0]), vec![0]);
    }

    #[test]
    fn groups_and_clauses_share_one_graph() {
        let mut cs = ConstraintSet::from_dimacs_clauses(4, &[&[1, 2]]).unwrap();
        cs.add_exactly_one_groups(vec![vec![1, 2], vec![3]]).unwrap();
        let g = build_dependency_graph(&cs);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert!(g.has_edge(1, 0));
        assert!(g.neighbors(2).is_empty());
    }
}
