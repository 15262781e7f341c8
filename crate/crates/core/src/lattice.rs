//! Box-lattice geometry: site indexing, nearest-neighbor adjacency and the
//! static "far site" lists used by the connectivity penalty.

use thiserror::Error;

/// Largest supported site count. Search code keeps visited sets in a `u128`
/// and the path archive stores one byte per site.
pub const MAX_SITES: usize = 128;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice dimension {axis} must be at least 1")]
    ZeroDimension { axis: usize },
    #[error("lattice has {sites} sites, more than the supported maximum of {MAX_SITES}")]
    TooLarge { sites: usize },
}

/// A rectangular Lx x Ly x Lz grid with unit spacing.
///
/// Sites are numbered row-major: `n = x + Lx*y + Lx*Ly*z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dims: [usize; 3],
    adjacency: Vec<Vec<usize>>,
    far: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Lattice {
    pub fn new(dims: [usize; 3]) -> Result<Self, LatticeError> {
        if let Some(axis) = dims.iter().position(|&d| d == 0) {
            return Err(LatticeError::ZeroDimension { axis });
        }
        let sites = dims.iter().product::<usize>();
        if sites > MAX_SITES {
            return Err(LatticeError::TooLarge { sites });
        }

        let mut adjacency = vec![Vec::with_capacity(6); sites];
        let mut edge_count = 0;
        for n in 0..sites {
            let c = Self::coords_in(dims, n);
            // -x, +x, -y, +y, -z, +z
            for axis in 0..3 {
                if c[axis] > 0 {
                    let mut d = c;
                    d[axis] -= 1;
                    adjacency[n].push(Self::index_in(dims, d));
                }
                if c[axis] + 1 < dims[axis] {
                    let mut d = c;
                    d[axis] += 1;
                    adjacency[n].push(Self::index_in(dims, d));
                    edge_count += 1;
                }
            }
            adjacency[n].sort_unstable();
        }

        let far = (0..sites)
            .map(|n| {
                (0..sites)
                    .filter(|&m| m != n && adjacency[n].binary_search(&m).is_err())
                    .collect()
            })
            .collect();

        Ok(Self {
            dims,
            adjacency,
            far,
            edge_count,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn site_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of unordered nearest-neighbor pairs.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Neighbors of `site`, in ascending index order.
    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.adjacency[site]
    }

    /// Sites at Euclidean distance greater than one from `site`.
    pub fn far_sites(&self, site: usize) -> &[usize] {
        &self.far[site]
    }

    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        a < self.site_count() && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn coords(&self, site: usize) -> [usize; 3] {
        Self::coords_in(self.dims, site)
    }

    pub fn site(&self, coords: [usize; 3]) -> usize {
        debug_assert!(coords.iter().zip(&self.dims).all(|(c, d)| c < d));
        Self::index_in(self.dims, coords)
    }

    /// All unordered nearest-neighbor pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| nb.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    fn coords_in(dims: [usize; 3], n: usize) -> [usize; 3] {
        [n % dims[0], (n / dims[0]) % dims[1], n / (dims[0] * dims[1])]
    }

    fn index_in(dims: [usize; 3], c: [usize; 3]) -> usize {
        c[0] + dims[0] * (c[1] + dims[1] * c[2])
    }
}
