//! Point-group symmetries of a box lattice as site permutations.

use std::collections::HashSet;

use crate::lattice::Lattice;

/// Every axis permutation combined with every set of axis flips that maps
/// the box onto itself, stored as site permutations. Identity comes first;
/// operations that coincide as permutations (e.g. flipping a length-1 axis)
/// are kept once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryGroup {
    ops: Vec<Vec<u8>>,
}

const AXIS_PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

impl SymmetryGroup {
    pub fn of_lattice(lattice: &Lattice) -> Self {
        let dims = lattice.dims();
        let mut seen = HashSet::new();
        let mut ops = Vec::new();
        for perm in AXIS_PERMS {
            if (0..3).any(|k| dims[k] != dims[perm[k]]) {
                continue;
            }
            for flips in 0..8u8 {
                let op: Vec<u8> = (0..lattice.site_count())
                    .map(|s| {
                        let c = lattice.coords(s);
                        let mut d = [0; 3];
                        for k in 0..3 {
                            let v = c[perm[k]];
                            d[k] = if flips >> k & 1 == 1 { dims[k] - 1 - v } else { v };
                        }
                        lattice.site(d) as u8
                    })
                    .collect();
                if seen.insert(op.clone()) {
                    ops.push(op);
                }
            }
        }
        Self { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Vec<u8>] {
        &self.ops
    }

    pub fn apply(&self, op: usize, path: &[u8]) -> Vec<u8> {
        path.iter().map(|&s| self.ops[op][s as usize]).collect()
    }

    /// Lexicographically smallest image of `path` under the group.
    pub fn canonical_form(&self, path: &[u8]) -> Vec<u8> {
        (0..self.ops.len())
            .map(|k| self.apply(k, path))
            .min()
            .unwrap_or_default()
    }

    pub fn is_canonical(&self, path: &[u8]) -> bool {
        self.ops.iter().all(|op| {
            let image = path.iter().map(|&s| op[s as usize]);
            image.cmp(path.iter().copied()) != std::cmp::Ordering::Less
        })
    }

    /// Smallest site in the orbit of `site`.
    pub fn orbit_min(&self, site: usize) -> usize {
        self.ops.iter().map(|op| op[site] as usize).min().unwrap_or(site)
    }

    /// Indices of non-identity operations fixing `site`.
    pub fn stabilizer(&self, site: usize) -> Vec<usize> {
        (1..self.ops.len())
            .filter(|&k| self.ops[k][site] as usize == site)
            .collect()
    }

    /// True when composing any two operations yields a member.
    pub fn is_closed(&self) -> bool {
        let set: HashSet<&Vec<u8>> = self.ops.iter().collect();
        self.ops.iter().all(|a| {
            self.ops.iter().all(|b| {
                let c: Vec<u8> = b.iter().map(|&s| a[s as usize]).collect();
                set.contains(&c)
            })
        })
    }
}
