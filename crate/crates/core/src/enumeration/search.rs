//! Symmetry-broken generation of Hamiltonian paths: starting points,
//! breadth-first seeding and depth-first completion.

use serde::{Deserialize, Serialize};

use super::symmetry::SymmetryGroup;
use super::EnumerationError;
use crate::lattice::Lattice;

/// How symmetry-related paths are filtered out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Breaking {
    /// Hand-derived rules for square-based boxes (`Lx = Ly` even, `Lz` odd,
    /// `Lz != Lx`), e.g. 4x4x3: six starting points and direction rules.
    Rules,
    /// Emit a path iff it is the lexicographic minimum of its orbit.
    Canonical,
    /// `Rules` where supported, otherwise `Canonical`.
    #[default]
    Auto,
}

/// A starting site and which of the residual reflections still fix it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StartPoint {
    pub site: usize,
    /// Reflection across the `(x, x, z)` plane leaves the site unchanged.
    pub diagonal_unbroken: bool,
    /// Reflection across the middle `z` plane leaves the site unchanged.
    pub z_unbroken: bool,
}

pub fn rules_supported(dims: [usize; 3]) -> bool {
    let [x, y, z] = dims;
    x == y && x % 2 == 0 && z % 2 == 1 && z != x
}

/// Orbit representatives of the starting site under the point group, for
/// lattices covered by the direction rules. For 4x4x3 these are
/// (0,0,0), (1,0,0), (1,1,0), (0,0,1), (1,0,1), (1,1,1).
pub fn starting_points(lattice: &Lattice) -> Result<Vec<StartPoint>, EnumerationError> {
    let dims = lattice.dims();
    if !rules_supported(dims) {
        return Err(EnumerationError::UnsupportedDims(dims));
    }
    let half = dims[0] / 2;
    let mid = dims[2] / 2;
    let mut out = Vec::new();
    for z in 0..=mid {
        for x in 0..half {
            for y in 0..=x {
                let site = lattice.site([x, y, z]);
                let c = lattice.coords(site);
                let diag = lattice.site([c[1], c[0], c[2]]);
                let zref = lattice.site([c[0], c[1], dims[2] - 1 - c[2]]);
                out.push(StartPoint {
                    site,
                    diagonal_unbroken: diag == site,
                    // a length-1 axis makes the reflection the identity
                    z_unbroken: zref == site && dims[2] > 1,
                });
            }
        }
    }
    Ok(out)
}

/// A self-avoiding partial path plus the symmetry-breaking bookkeeping
/// needed to extend it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialPath {
    sites: Vec<u8>,
    visited: u128,
    /// Rules: bit 0 = diagonal reflection unresolved, bit 1 = z reflection
    /// unresolved. Canonical: bit k = group op k still maps the prefix to
    /// itself.
    pending: u64,
}

impl PartialPath {
    pub fn sites(&self) -> &[u8] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

const DIAG: u64 = 1;
const ZREF: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Rules,
    Canonical,
}

/// Generates each Hamiltonian path of a lattice once per symmetry class.
pub struct Enumerator {
    mode: Mode,
    n_sites: usize,
    neighbors: Vec<Vec<u8>>,
    group: SymmetryGroup,
    roots: Vec<PartialPath>,
    // z stride for the -z test in rule mode
    sz: usize,
    coords: Vec<[usize; 3]>,
}

impl Enumerator {
    pub fn new(lattice: &Lattice, breaking: Breaking) -> Result<Self, EnumerationError> {
        let dims = lattice.dims();
        let mode = match breaking {
            Breaking::Rules if !rules_supported(dims) => {
                return Err(EnumerationError::UnsupportedDims(dims))
            }
            Breaking::Rules => Mode::Rules,
            Breaking::Canonical => Mode::Canonical,
            Breaking::Auto if rules_supported(dims) => Mode::Rules,
            Breaking::Auto => Mode::Canonical,
        };
        let group = SymmetryGroup::of_lattice(lattice);
        assert!(group.len() <= 64);
        let n_sites = lattice.site_count();
        let root = |site: usize, pending: u64| PartialPath {
            sites: vec![site as u8],
            visited: 1u128 << site,
            pending,
        };
        let roots = match mode {
            Mode::Rules => starting_points(lattice)?
                .into_iter()
                .map(|p| {
                    let mut pending = 0;
                    if p.diagonal_unbroken {
                        pending |= DIAG;
                    }
                    if p.z_unbroken {
                        pending |= ZREF;
                    }
                    root(p.site, pending)
                })
                .collect(),
            Mode::Canonical => (0..n_sites)
                .filter(|&s| group.orbit_min(s) == s)
                .map(|s| {
                    let pending = group.stabilizer(s).iter().fold(0u64, |m, &k| m | 1 << k);
                    root(s, pending)
                })
                .collect(),
        };
        Ok(Self {
            mode,
            n_sites,
            neighbors: (0..n_sites)
                .map(|s| lattice.neighbors(s).iter().map(|&m| m as u8).collect())
                .collect(),
            group,
            roots,
            sz: dims[0] * dims[1],
            coords: (0..n_sites).map(|s| lattice.coords(s)).collect(),
        })
    }

    pub fn uses_rules(&self) -> bool {
        self.mode == Mode::Rules
    }

    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Length-1 partial paths at the starting sites.
    pub fn roots(&self) -> &[PartialPath] {
        &self.roots
    }

    /// Builds a partial path from raw sites, checking self-avoidance,
    /// connectivity and the symmetry-breaking constraints.
    pub fn partial(&self, sites: &[u8]) -> Option<PartialPath> {
        let first = *sites.first()?;
        let mut p = self.roots.iter().find(|r| r.sites[0] == first)?.clone();
        for &s in &sites[1..] {
            let last = *p.sites.last().unwrap();
            if (s as usize) >= self.n_sites
                || p.visited >> s & 1 == 1
                || !self.neighbors[last as usize].contains(&s)
            {
                return None;
            }
            p = self.step(&p, s)?;
        }
        Some(p)
    }

    /// Applies one step, or `None` if the symmetry constraints reject it.
    #[inline]
    fn admit(&self, pending: u64, prev: u8, next: u8) -> Option<u64> {
        if pending == 0 {
            return Some(0);
        }
        match self.mode {
            Mode::Rules => {
                let mut pending = pending;
                let (a, b) = (self.coords[prev as usize], self.coords[next as usize]);
                if pending & DIAG != 0 && (a[0] != b[0] || a[1] != b[1]) {
                    // first departure from the starting line: +x or -y only
                    let plus_x = next as usize == prev as usize + 1;
                    let minus_y = b[1] + 1 == a[1];
                    if !(plus_x || minus_y) {
                        return None;
                    }
                    pending &= !DIAG;
                }
                if pending & ZREF != 0 && a[2] != b[2] {
                    // first step off the middle plane must be -z
                    if next as usize + self.sz != prev as usize {
                        return None;
                    }
                    pending &= !ZREF;
                }
                Some(pending)
            }
            Mode::Canonical => {
                let mut pending = pending;
                let mut rest = pending;
                while rest != 0 {
                    let k = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    let image = self.group.ops()[k][next as usize];
                    if image < next {
                        return None;
                    }
                    if image > next {
                        pending &= !(1 << k);
                    }
                }
                Some(pending)
            }
        }
    }

    fn step(&self, p: &PartialPath, next: u8) -> Option<PartialPath> {
        let prev = *p.sites.last().unwrap();
        let pending = self.admit(p.pending, prev, next)?;
        let mut sites = Vec::with_capacity(p.sites.len() + 1);
        sites.extend_from_slice(&p.sites);
        sites.push(next);
        Some(PartialPath {
            sites,
            visited: p.visited | 1u128 << next,
            pending,
        })
    }

    /// All admissible extensions of `partials` by one site, in input order
    /// then neighbor order.
    pub fn extend_once(&self, partials: &[PartialPath]) -> Vec<PartialPath> {
        let mut out = Vec::new();
        for p in partials {
            let last = *p.sites.last().unwrap();
            for &m in &self.neighbors[last as usize] {
                if p.visited >> m & 1 == 0 {
                    if let Some(q) = self.step(p, m) {
                        out.push(q);
                    }
                }
            }
        }
        out
    }

    /// Breadth-first growth of `partials` to length `target` (paths that
    /// cannot be extended that far are dropped).
    pub fn grow(&self, partials: Vec<PartialPath>, target: usize) -> Vec<PartialPath> {
        let mut level = partials;
        while level.first().is_some_and(|p| p.len() < target) {
            level = self.extend_once(&level);
        }
        level
    }

    /// All admissible partial paths of length `seed_len`.
    pub fn seeds(&self, seed_len: usize) -> Result<Vec<PartialPath>, EnumerationError> {
        if seed_len == 0 || seed_len > self.n_sites {
            return Err(EnumerationError::SeedLength {
                seed_len,
                sites: self.n_sites,
            });
        }
        Ok(self.grow(self.roots.clone(), seed_len))
    }

    /// Shortest seed length giving at least `min_count` seeds (or `N`).
    pub fn auto_seeds(&self, min_count: usize) -> Vec<PartialPath> {
        let mut level = self.roots.clone();
        while level.len() < min_count && level.first().is_some_and(|p| p.len() < self.n_sites) {
            level = self.extend_once(&level);
        }
        level
    }

    /// Depth-first completion: calls `visit` once for every Hamiltonian
    /// path extending `seed`, in neighbor order.
    pub fn extend_all(&self, seed: &PartialPath, visit: &mut impl FnMut(&[u8])) {
        let mut path = Vec::with_capacity(self.n_sites);
        path.extend_from_slice(&seed.sites);
        self.dfs(&mut path, seed.visited, seed.pending, visit);
    }

    fn dfs(&self, path: &mut Vec<u8>, visited: u128, pending: u64, visit: &mut impl FnMut(&[u8])) {
        if path.len() == self.n_sites {
            visit(path);
            return;
        }
        let last = *path.last().unwrap();
        for &m in &self.neighbors[last as usize] {
            if visited >> m & 1 == 1 {
                continue;
            }
            let Some(next_pending) = self.admit(pending, last, m) else {
                continue;
            };
            path.push(m);
            self.dfs(path, visited | 1u128 << m, next_pending, visit);
            path.pop();
        }
    }
}
