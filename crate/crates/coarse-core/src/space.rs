//! Finite metric spaces with integer-valued distances.
//!
//! Every space in this crate is a finite list of points `0..n` plus a
//! total distance function returning a nonnegative integer. Graph and
//! word metrics are integer-valued, which keeps every strict inequality
//! (`d(A,B) > R`) exact. Four backends share one interface:
//!
//! - [`FiniteMetricSpace::from_matrix`]: an explicit `n x n` matrix;
//! - lattice points under the `l1` metric (exactly the word metric of
//!   free abelian groups with standard generators);
//! - word-length tables produced by ball enumeration in [`crate::groups`];
//! - products carrying the sum metric `d((x1,y1),(x2,y2)) = d(x1,x2) + d(y1,y2)`.
//!
//! Word-length backends may be *truncated*: distances larger than the
//! enumerated table are reported as `truncation` (table depth + 1).
//! `min(d, K)` is again a metric, and it agrees with the word metric on
//! all values `<= K`; spaces built over a ball of radius `N` with a
//! depth-`2N` table never reach the truncation point, so their metric is
//! exact everywhere. Subspaces that spill past the table (stabilizer
//! subspaces inside a `2N`-enumeration) are exact below the cutoff and
//! say so in their label.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::groups::{Elem, Group};

/// A finite metric space: points `0..n_points()` and an integer metric.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    backend: Backend,
    name: String,
}

#[derive(Debug, Clone)]
enum Backend {
    /// Explicit symmetric matrix, row-major, `data[i * n + j]`.
    Matrix { n: usize, data: Arc<Vec<u32>> },
    /// Integer lattice points under the `l1` metric.
    Lattice { coords: Arc<Vec<Vec<i64>>> },
    /// Group elements with distances `|g^-1 h|` looked up in a length
    /// table; values beyond the table report `truncation`.
    Words {
        group: Arc<Group>,
        points: Arc<Vec<Elem>>,
        lengths: Arc<alloc::collections::BTreeMap<Elem, u32>>,
        truncation: u32,
    },
    /// Product with the sum metric; point `i` encodes the pair
    /// `(i / right.n_points(), i % right.n_points())`.
    Product {
        left: Arc<FiniteMetricSpace>,
        right: Arc<FiniteMetricSpace>,
    },
}

impl FiniteMetricSpace {
    /// Explicit matrix space. Checks the cheap metric axioms (square
    /// shape, zero diagonal, symmetry, `d = 0` only on the diagonal);
    /// the triangle inequality is property-tested, not assumed.
    pub fn from_matrix(data: Vec<Vec<u32>>, name: impl Into<String>) -> Result<Self> {
        let n = data.len();
        if n == 0 {
            return Err(Error::structural("matrix space needs at least one point"));
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &data {
            if row.len() != n {
                return Err(Error::structural(format!(
                    "matrix is not square: {n} rows, a row of length {}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        for i in 0..n {
            if flat[i * n + i] != 0 {
                return Err(Error::structural(format!("d({i},{i}) = {} != 0", flat[i * n + i])));
            }
            for j in 0..i {
                if flat[i * n + j] != flat[j * n + i] {
                    return Err(Error::structural(format!("d({i},{j}) != d({j},{i})")));
                }
                if flat[i * n + j] == 0 {
                    return Err(Error::structural(format!("d({i},{j}) = 0 for distinct points")));
                }
            }
        }
        Ok(Self {
            backend: Backend::Matrix { n, data: Arc::new(flat) },
            name: name.into(),
        })
    }

    /// Like [`from_matrix`](Self::from_matrix) but also checks the
    /// triangle inequality exhaustively (`O(n^3)`).
    pub fn from_matrix_checked(data: Vec<Vec<u32>>, name: impl Into<String>) -> Result<Self> {
        let space = Self::from_matrix(data, name)?;
        let n = space.n_points();
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                for k in 0..n as u32 {
                    let (a, b, c) = (space.dist(i, j), space.dist(i, k), space.dist(k, j));
                    if a > b + c {
                        return Err(Error::structural(format!(
                            "triangle inequality fails: d({i},{j})={a} > d({i},{k})+d({k},{j})={}",
                            b + c
                        )));
                    }
                }
            }
        }
        Ok(space)
    }

    /// Lattice points under the `l1` metric. All rows must share one
    /// dimension and be pairwise distinct.
    pub fn from_lattice(coords: Vec<Vec<i64>>, name: impl Into<String>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::structural("lattice space needs at least one point"));
        }
        let dim = coords[0].len();
        for c in &coords {
            if c.len() != dim {
                return Err(Error::structural("lattice rows have mixed dimensions"));
            }
        }
        let mut sorted: Vec<&Vec<i64>> = coords.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::structural("lattice points must be distinct"));
        }
        Ok(Self {
            backend: Backend::Lattice { coords: Arc::new(coords) },
            name: name.into(),
        })
    }

    /// The path `0 - 1 - ... - (n-1)` with `d(i,j) = |i - j|`.
    pub fn path(n: usize) -> Self {
        let coords = (0..n as i64).map(|i| alloc::vec![i]).collect();
        Self::from_lattice(coords, format!("path:{n}")).expect("path is a valid lattice")
    }

    pub(crate) fn from_words(
        group: Arc<Group>,
        points: Arc<Vec<Elem>>,
        lengths: Arc<alloc::collections::BTreeMap<Elem, u32>>,
        truncation: u32,
        name: impl Into<String>,
    ) -> Self {
        Self {
            backend: Backend::Words { group, points, lengths, truncation },
            name: name.into(),
        }
    }

    /// Product space with the sum metric. If both factors are lattice
    /// spaces the product is again a lattice space (coordinates
    /// concatenate and the `l1` metric adds up).
    pub fn product(left: &Arc<FiniteMetricSpace>, right: &Arc<FiniteMetricSpace>) -> Self {
        let name = format!("product({},{})", left.name, right.name);
        if let (Backend::Lattice { coords: a }, Backend::Lattice { coords: b }) =
            (&left.backend, &right.backend)
        {
            let mut coords = Vec::with_capacity(a.len() * b.len());
            for ca in a.iter() {
                for cb in b.iter() {
                    let mut row = ca.clone();
                    row.extend_from_slice(cb);
                    coords.push(row);
                }
            }
            return Self { backend: Backend::Lattice { coords: Arc::new(coords) }, name };
        }
        Self {
            backend: Backend::Product { left: Arc::clone(left), right: Arc::clone(right) },
            name,
        }
    }

    pub fn n_points(&self) -> usize {
        match &self.backend {
            Backend::Matrix { n, .. } => *n,
            Backend::Lattice { coords } => coords.len(),
            Backend::Words { points, .. } => points.len(),
            Backend::Product { left, right } => left.n_points() * right.n_points(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Distance between points `i` and `j`.
    ///
    /// Panics if an index is out of range; use [`check_index`](Self::check_index)
    /// at API boundaries.
    pub fn dist(&self, i: u32, j: u32) -> u32 {
        match &self.backend {
            Backend::Matrix { n, data } => data[i as usize * n + j as usize],
            Backend::Lattice { coords } => {
                let (a, b) = (&coords[i as usize], &coords[j as usize]);
                a.iter().zip(b.iter()).map(|(x, y)| x.abs_diff(*y)).sum::<u64>() as u32
            }
            Backend::Words { group, points, lengths, truncation } => {
                if i == j {
                    return 0;
                }
                let g = group.multiply(&group.invert(&points[i as usize]), &points[j as usize]);
                lengths.get(&g).copied().unwrap_or(*truncation)
            }
            Backend::Product { left, right } => {
                let m = right.n_points() as u32;
                left.dist(i / m, j / m) + right.dist(i % m, j % m)
            }
        }
    }

    pub fn check_index(&self, i: u32) -> Result<()> {
        if (i as usize) < self.n_points() {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "point index {i} out of range for space `{}` with {} points",
                self.name,
                self.n_points()
            )))
        }
    }

    /// Max pairwise distance; `O(n^2)`.
    pub fn diameter(&self) -> u32 {
        let n = self.n_points() as u32;
        let mut best = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// Max pairwise distance within an index set.
    pub fn diameter_of(&self, members: &[u32]) -> u32 {
        let mut best = 0;
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// The intrinsic ball `{ y in members : d(center, y) <= r }`.
    pub fn ball_within(&self, center: u32, r: u32, members: &[u32]) -> Vec<u32> {
        members.iter().copied().filter(|&y| self.dist(center, y) <= r).collect()
    }

    /// Lattice coordinates, when this space carries them.
    pub fn lattice_coords(&self) -> Option<&[Vec<i64>]> {
        match &self.backend {
            Backend::Lattice { coords } => Some(coords.as_slice()),
            _ => None,
        }
    }

    /// Group elements behind a word-metric space, in point order.
    pub fn word_points(&self) -> Option<(&Group, &[Elem])> {
        match &self.backend {
            Backend::Words { group, points, .. } => Some((group, points.as_slice())),
            _ => None,
        }
    }

    /// Factors of a product-backed space.
    pub fn product_factors(&self) -> Option<(&Arc<FiniteMetricSpace>, &Arc<FiniteMetricSpace>)> {
        match &self.backend {
            Backend::Product { left, right } => Some((left, right)),
            _ => None,
        }
    }

    /// Human-readable label for a point.
    pub fn label(&self, i: u32) -> String {
        match &self.backend {
            Backend::Matrix { .. } => format!("{i}"),
            Backend::Lattice { coords } => {
                let c = &coords[i as usize];
                if c.len() == 1 {
                    format!("{}", c[0])
                } else {
                    let parts: Vec<String> = c.iter().map(|x| format!("{x}")).collect();
                    format!("({})", parts.join(","))
                }
            }
            Backend::Words { points, .. } => format!("{}", points[i as usize]),
            Backend::Product { left, right } => {
                let m = right.n_points() as u32;
                format!("({},{})", left.label(i / m), right.label(i % m))
            }
        }
    }

    /// Materialize the full distance matrix (for serialization).
    pub fn to_matrix(&self) -> Vec<Vec<u32>> {
        let n = self.n_points() as u32;
        (0..n).map(|i| (0..n).map(|j| self.dist(i, j)).collect()).collect()
    }
}

/// A nonempty set of point indices into one space, kept sorted and
/// deduplicated. Subsets do not own a space reference; the structures
/// that combine several subsets ([`crate::decomp::Decomposition`],
/// chains, covers) carry the `Arc` to their common space and validate
/// indices on construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset {
    members: Vec<u32>,
}

impl Subset {
    pub fn new(mut members: Vec<u32>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::structural("subset must be nonempty"));
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { members })
    }

    /// All points of a space.
    pub fn whole(space: &FiniteMetricSpace) -> Self {
        Self { members: (0..space.n_points() as u32).collect() }
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: u32) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn validate(&self, space: &FiniteMetricSpace) -> Result<()> {
        match self.members.last() {
            Some(&m) => space.check_index(m),
            None => Err(Error::structural("subset must be nonempty")),
        }
    }
}

/// Minimum distance between two nonempty index sets,
/// `d(A,B) = min { d(a,b) : a in A, b in B }`.
pub fn set_distance(space: &FiniteMetricSpace, a: &Subset, b: &Subset) -> Result<u32> {
    a.validate(space)?;
    b.validate(space)?;
    let mut best = u32::MAX;
    for &x in a.members() {
        for &y in b.members() {
            best = best.min(space.dist(x, y));
            if best == 0 {
                return Ok(0);
            }
        }
    }
    Ok(best)
}
