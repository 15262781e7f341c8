use rand::seq::SliceRandom;
use rand::Rng;

use crate::conformation::Conformation;
use crate::lattice::Lattice;

/// Random Hamiltonian path by depth-first search that prefers the unvisited
/// neighbor with the fewest onward moves, breaking ties at random. Gives up
/// on a start after a bounded number of backtracks and restarts elsewhere.
pub fn random_hamiltonian_path(lattice: &Lattice, rng: &mut impl Rng) -> Conformation {
    let n = lattice.site_count();
    let budget = 64 * n;
    loop {
        let start = rng.gen_range(0..n);
        let mut path = vec![start];
        let mut visited = vec![false; n];
        visited[start] = true;
        let mut steps = 0;
        if dfs(lattice, &mut path, &mut visited, rng, &mut steps, budget) {
            return Conformation::from_valid(path);
        }
    }
}

fn dfs(
    lattice: &Lattice,
    path: &mut Vec<usize>,
    visited: &mut [bool],
    rng: &mut impl Rng,
    steps: &mut usize,
    budget: usize,
) -> bool {
    if path.len() == visited.len() {
        return true;
    }
    *steps += 1;
    if *steps > budget {
        return false;
    }
    let last = *path.last().unwrap();
    let mut options: Vec<usize> = lattice
        .neighbors(last)
        .iter()
        .copied()
        .filter(|&m| !visited[m])
        .collect();
    options.shuffle(rng);
    let degree = |s: usize| lattice.neighbors(s).iter().filter(|&&m| !visited[m]).count();
    options.sort_by_key(|&s| degree(s));
    for m in options {
        visited[m] = true;
        path.push(m);
        if dfs(lattice, path, visited, rng, steps, budget) {
            return true;
        }
        path.pop();
        visited[m] = false;
    }
    false
}
