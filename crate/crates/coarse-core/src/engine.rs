//! Decomposition construction: deterministic greedy ball-carving, grid
//! decompositions of lattice balls, an exact brute-force oracle for
//! small spaces, and chain builders on top of them.
//!
//! Everything is deterministic: ties break toward the lowest point
//! index (ball order sorts group elements by word length then canonical
//! key, so this is lowest-canonical-key-first), pieces are created in a
//! fixed order, and first-fit coloring scans that order.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::{Decomposition, DecompositionChain};
use crate::error::{Error, Result};
use crate::family::{mesh, Family, Piece};
use crate::space::{set_distance, FiniteMetricSpace, Subset};

/// How to decompose one source set at one radius.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Carve intrinsic balls of radius `floor(D/2)` around the lowest
    /// uncovered index, then first-fit color the piece conflict graph
    /// (pieces conflict iff their set distance is `<= R`).
    GreedyCarve,
    /// Axis-aligned cells of side `floor(D/dim) + 1` on lattice
    /// coordinates, colored by the parity vector of the cell id
    /// (`2^dim` families). Requires lattice coordinates.
    Grid,
    /// Exhaustive minimum over family assignments; only for sources of
    /// at most `limit` points.
    Exact { limit: usize },
    /// Decompose a rectangle inside a product space factor-wise (each
    /// factor gets mesh budget `D/2`) and cross the subfamilies.
    Product(Box<Strategy>, Box<Strategy>),
}

impl Strategy {
    pub fn exact() -> Self {
        Strategy::Exact { limit: EXACT_DEFAULT_LIMIT }
    }
}

/// Default size bound for the exhaustive oracle.
pub const EXACT_DEFAULT_LIMIT: usize = 12;

/// Decompose `source` at radius `r` with piece-diameter target `d`.
/// The returned decomposition always passes verification.
pub fn decompose(
    space: &Arc<FiniteMetricSpace>,
    source: &Subset,
    r: u32,
    d: u32,
    strategy: &Strategy,
    tag_base: &str,
) -> Result<Decomposition> {
    source.validate(space)?;
    match strategy {
        Strategy::GreedyCarve => greedy_decompose(space, source, r, d, tag_base),
        Strategy::Grid => grid_decompose(space, source, r, d, tag_base),
        Strategy::Exact { limit } => {
            let (_, assignment) = exact_min_assignment(space, source, r, d, *limit)?;
            decomposition_from_assignment(space, source, r, &assignment, tag_base)
        }
        Strategy::Product(sl, sr) => product_decompose(space, source, r, d, sl, sr, tag_base),
    }
}

/// Greedy ball-carving + first-fit coloring.
pub fn greedy_decompose(
    space: &Arc<FiniteMetricSpace>,
    source: &Subset,
    r: u32,
    d: u32,
    tag_base: &str,
) -> Result<Decomposition> {
    let mut uncovered: Vec<u32> = source.members().to_vec();
    let mut pieces: Vec<Vec<u32>> = Vec::new();
    while !uncovered.is_empty() {
        let seed = uncovered[0];
        let claim = space.ball_within(seed, d / 2, &uncovered);
        let claim_set: BTreeSet<u32> = claim.iter().copied().collect();
        uncovered.retain(|p| !claim_set.contains(p));
        pieces.push(claim);
    }
    let subsets: Vec<Subset> =
        pieces.into_iter().map(Subset::new).collect::<Result<Vec<_>>>()?;

    // First-fit over the conflict graph, in piece creation order.
    let mut colors: Vec<usize> = Vec::with_capacity(subsets.len());
    let mut n_colors = 0usize;
    for (i, piece) in subsets.iter().enumerate() {
        let mut taken = vec![false; n_colors];
        for (j, other) in subsets.iter().enumerate().take(i) {
            if set_distance(space, piece, other)? <= r {
                taken[colors[j]] = true;
            }
        }
        let color = taken.iter().position(|t| !t).unwrap_or(n_colors);
        if color == n_colors {
            n_colors += 1;
        }
        colors.push(color);
    }

    let mut families: Vec<Vec<Piece>> = vec![Vec::new(); n_colors];
    for (i, (piece, &color)) in subsets.into_iter().zip(colors.iter()).enumerate() {
        families[color].push(Piece { set: piece, tag: format!("{tag_base}.p{i}") });
    }
    let subfamilies: Vec<Family> = families
        .into_iter()
        .enumerate()
        .map(|(c, pieces)| Family::new(pieces, format!("{tag_base}.f{c}")))
        .collect();
    Decomposition::verified(Arc::clone(space), source.clone(), r, subfamilies)
}

/// Axis-aligned grid cells colored by cell-id parity. The cell side is
/// `floor(D/dim) + 1`, so cell `l1` diameters stay `<= D` and
/// same-parity cells are `floor(D/dim) + 2 > R` apart whenever
/// `floor(D/dim) >= R - 1`.
pub fn grid_decompose(
    space: &Arc<FiniteMetricSpace>,
    source: &Subset,
    r: u32,
    d: u32,
    tag_base: &str,
) -> Result<Decomposition> {
    let coords = space.lattice_coords().ok_or_else(|| {
        Error::structural(format!(
            "grid strategy needs lattice coordinates; space `{}` has none",
            space.name()
        ))
    })?;
    let dim = coords[0].len().max(1);
    let side = (d as i64 / dim as i64) + 1;
    let mut cells: alloc::collections::BTreeMap<Vec<i64>, Vec<u32>> = Default::default();
    for &m in source.members() {
        let cell: Vec<i64> = coords[m as usize].iter().map(|&x| x.div_euclid(side)).collect();
        cells.entry(cell).or_default().push(m);
    }
    let mut families: alloc::collections::BTreeMap<u64, Vec<Piece>> = Default::default();
    for (i, (cell, members)) in cells.into_iter().enumerate() {
        let parity: u64 =
            cell.iter().enumerate().map(|(axis, c)| (c.rem_euclid(2) as u64) << axis).sum();
        families.entry(parity).or_default().push(Piece {
            set: Subset::new(members)?,
            tag: format!("{tag_base}.cell{i}"),
        });
    }
    let subfamilies: Vec<Family> = families
        .into_values()
        .enumerate()
        .map(|(c, pieces)| Family::new(pieces, format!("{tag_base}.f{c}")))
        .collect();
    Decomposition::verified(Arc::clone(space), source.clone(), r, subfamilies)
}

fn product_decompose(
    space: &Arc<FiniteMetricSpace>,
    source: &Subset,
    r: u32,
    d: u32,
    left_strategy: &Strategy,
    right_strategy: &Strategy,
    tag_base: &str,
) -> Result<Decomposition> {
    let (left, right) = space.product_factors().ok_or_else(|| {
        Error::structural(format!(
            "product strategy needs a product-backed space; `{}` is not one",
            space.name()
        ))
    })?;
    let m = right.n_points() as u32;
    let mut a: Vec<u32> = source.members().iter().map(|&p| p / m).collect();
    let mut b: Vec<u32> = source.members().iter().map(|&p| p % m).collect();
    a.sort_unstable();
    a.dedup();
    b.sort_unstable();
    b.dedup();
    if a.len() * b.len() != source.len() {
        return Err(Error::structural(
            "product strategy needs a rectangular source (a product of factor subsets)",
        ));
    }
    let left = left.clone();
    let right = right.clone();
    let da = decompose(&left, &Subset::new(a)?, r, d / 2, left_strategy, &format!("{tag_base}.L"))?;
    let db = decompose(&right, &Subset::new(b)?, r, d / 2, right_strategy, &format!("{tag_base}.R"))?;
    let mut subfamilies = Vec::with_capacity(da.subfamilies.len() * db.subfamilies.len());
    for (j, fa) in da.subfamilies.iter().enumerate() {
        for (k, fb) in db.subfamilies.iter().enumerate() {
            let mut pieces = Vec::new();
            for pa in &fa.pieces {
                for pb in &fb.pieces {
                    let members: Vec<u32> = pa
                        .members()
                        .iter()
                        .flat_map(|&x| pb.members().iter().map(move |&y| x * m + y))
                        .collect();
                    pieces.push(Piece {
                        set: Subset::new(members)?,
                        tag: format!("{}*{}", pa.tag, pb.tag),
                    });
                }
            }
            subfamilies.push(Family::new(pieces, format!("{tag_base}.f{j}x{k}")));
        }
    }
    Decomposition::verified(Arc::clone(space), source.clone(), r, subfamilies)
}

/// Exhaustive minimum width: the smallest `n` such that `source` splits
/// into `n` families of diameter-`<= d` pieces, each family
/// `r`-disjoint. Searches family assignments as restricted growth
/// strings with incremental diameter pruning; within one family, pieces
/// are the `r`-connected components of that family's points (merging
/// components only raises diameters, so this loses no generality).
pub fn exact_min_families(
    space: &Arc<FiniteMetricSpace>,
    source: &Subset,
    r: u32,
    d: u32,
    limit: usize,
) -> Result<u32> {
    exact_min_assignment(space, source, r, d, limit).map(|(n, _)| n)
}

/// Like [`exact_min_families`] but also returns one optimal assignment
/// (family index per source member, in source order).
pub fn exact_min_assignment(
    space: &Arc<FiniteMetricSpace>,
    source: &Subset,
    r: u32,
    d: u32,
    limit: usize,
) -> Result<(u32, Vec<u32>)> {
    source.validate(space)?;
    let pts = source.members();
    if pts.len() > limit {
        return Err(Error::resource(format!(
            "exact search limit is {limit} points, source has {}",
            pts.len()
        )));
    }
    let k = pts.len();
    let dist =
        |i: usize, j: usize| -> u32 { space.dist(pts[i], pts[j]) };
    for n in 1..=k as u32 {
        let mut assignment = vec![u32::MAX; k];
        if assign_rec(&mut assignment, 0, n, r, d, &dist, k) {
            let found = assignment.clone();
            return Ok((found.iter().copied().max().unwrap_or(0) + 1, found));
        }
    }
    unreachable!("assigning every point its own family always succeeds")
}

/// DFS over restricted growth strings: point `i` may use an existing
/// family or open the next fresh one. Feasibility: after placing `i`,
/// the `r`-connected component of `i` within its family must still have
/// diameter `<= d`.
fn assign_rec(
    assignment: &mut Vec<u32>,
    i: usize,
    n: u32,
    r: u32,
    d: u32,
    dist: &dyn Fn(usize, usize) -> u32,
    k: usize,
) -> bool {
    if i == k {
        return true;
    }
    let used = assignment[..i].iter().copied().filter(|&a| a != u32::MAX).max().map_or(0, |m| m + 1);
    let choices = (used + 1).min(n);
    for f in 0..choices {
        assignment[i] = f;
        if component_diameter_ok(assignment, i, r, d, dist) {
            if assign_rec(assignment, i + 1, n, r, d, dist, k) {
                return true;
            }
        }
        assignment[i] = u32::MAX;
    }
    false
}

/// Recompute the `r`-component of point `i` within family
/// `assignment[i]` restricted to points `0..=i`, and check its diameter.
fn component_diameter_ok(
    assignment: &[u32],
    i: usize,
    r: u32,
    d: u32,
    dist: &dyn Fn(usize, usize) -> u32,
) -> bool {
    let fam = assignment[i];
    let members: Vec<usize> =
        (0..=i).filter(|&j| assignment[j] == fam).collect();
    // Flood out from i through distance-<= r links.
    let mut in_comp = vec![false; members.len()];
    let me = members.len() - 1;
    in_comp[me] = true;
    let mut stack = vec![me];
    while let Some(top) = stack.pop() {
        for (idx, &j) in members.iter().enumerate() {
            if !in_comp[idx] && dist(members[top], j) <= r {
                in_comp[idx] = true;
                stack.push(idx);
            }
        }
    }
    let comp: Vec<usize> = members
        .iter()
        .enumerate()
        .filter(|(idx, _)| in_comp[*idx])
        .map(|(_, &j)| j)
        .collect();
    for (x, &p) in comp.iter().enumerate() {
        for &q in &comp[x + 1..] {
            if dist(p, q) > d {
                return false;
            }
        }
    }
    true
}

/// Turn a family assignment into a decomposition: pieces are the
/// `r`-connected components of each family.
fn decomposition_from_assignment(
    space: &Arc<FiniteMetricSpace>,
    source: &Subset,
    r: u32,
    assignment: &[u32],
    tag_base: &str,
) -> Result<Decomposition> {
    let pts = source.members();
    let n = assignment.iter().copied().max().unwrap_or(0) + 1;
    let mut subfamilies = Vec::with_capacity(n as usize);
    for f in 0..n {
        let members: Vec<u32> = pts
            .iter()
            .zip(assignment.iter())
            .filter(|(_, &a)| a == f)
            .map(|(&p, _)| p)
            .collect();
        let mut remaining: Vec<u32> = members;
        let mut pieces = Vec::new();
        while !remaining.is_empty() {
            let mut comp = vec![remaining[0]];
            remaining.remove(0);
            loop {
                let mut grew = false;
                remaining.retain(|&q| {
                    if comp.iter().any(|&p| space.dist(p, q) <= r) {
                        comp.push(q);
                        grew = true;
                        false
                    } else {
                        true
                    }
                });
                if !grew {
                    break;
                }
            }
            pieces.push(Piece {
                set: Subset::new(comp)?,
                tag: format!("{tag_base}.f{f}.p{}", pieces.len()),
            });
        }
        subfamilies.push(Family::new(pieces, format!("{tag_base}.f{f}")));
    }
    Decomposition::verified(Arc::clone(space), source.clone(), r, subfamilies)
}

/// Piece-diameter target per stage radius.
#[derive(Debug, Clone, Copy)]
pub enum MeshRule {
    Fixed(u32),
    /// `D = k * R`.
    TimesR(u32),
}

impl MeshRule {
    pub fn apply(&self, r: u32) -> u32 {
        match self {
            MeshRule::Fixed(d) => *d,
            MeshRule::TimesR(k) => k * r,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainParams {
    pub radii: Vec<u32>,
    pub strategy: Strategy,
    pub mesh_rule: MeshRule,
    /// Stop before a stage when the current mesh is already `<=` this.
    pub mesh_floor: Option<u32>,
}

impl ChainParams {
    pub fn new(radii: Vec<u32>, strategy: Strategy) -> Self {
        Self { radii, strategy, mesh_rule: MeshRule::TimesR(3), mesh_floor: None }
    }
}

/// Build a chain: stage 1 decomposes the source, stage `i+1` decomposes
/// every piece of stage `i` as a subspace with the ambient metric.
pub fn build_chain(
    space: &Arc<FiniteMetricSpace>,
    source: &Subset,
    params: &ChainParams,
) -> Result<DecompositionChain> {
    if params.radii.is_empty() {
        return Err(Error::structural("chain needs at least one radius"));
    }
    if params.radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::structural(format!("radii must be nondecreasing: {:?}", params.radii)));
    }
    let mut chain = DecompositionChain {
        space: Arc::clone(space),
        source: source.clone(),
        radii: Vec::new(),
        stages: Vec::new(),
        witnesses: Vec::new(),
        widths: Vec::new(),
        terminal_mesh: space.diameter_of(source.members()),
    };
    for (i, &r) in params.radii.iter().enumerate() {
        let current_mesh = match chain.stages.last() {
            Some(f) => mesh(space, f)?,
            None => chain.terminal_mesh,
        };
        if let Some(floor) = params.mesh_floor {
            if current_mesh <= floor {
                break;
            }
        }
        let d = params.mesh_rule.apply(r);
        let parents: Vec<Subset> = match chain.stages.last() {
            Some(f) => f.pieces.iter().map(|p| p.set.clone()).collect(),
            None => vec![source.clone()],
        };
        let mut witnesses = Vec::with_capacity(parents.len());
        let mut stage_pieces = Vec::new();
        let mut width = 0u32;
        for (pidx, pset) in parents.iter().enumerate() {
            let tag = format!("s{}.{}", i + 1, pidx);
            let decomposition = decompose(space, pset, r, d, &params.strategy, &tag)?;
            width = width.max(decomposition.width());
            for piece in decomposition.pieces() {
                stage_pieces.push(piece.clone());
            }
            witnesses.push(decomposition);
        }
        chain.radii.push(r);
        chain.widths.push(width);
        chain.stages.push(Family::new(stage_pieces, format!("stage{}", i + 1)));
        chain.witnesses.push(witnesses);
    }
    chain.terminal_mesh = match chain.stages.last() {
        Some(f) => mesh(space, f)?,
        None => chain.terminal_mesh,
    };
    Ok(chain)
}

/// Result of a width-constrained chain search.
#[derive(Debug, Clone)]
pub enum SfdcOutcome {
    Chain(DecompositionChain),
    /// No width-2 stage decomposition was found; this is a search
    /// failure, not a proof of impossibility.
    Failure { stage: usize, radius: u32, d_tried: u32, width_found: u32 },
}

#[derive(Debug, Clone)]
pub struct SfdcParams {
    pub radii: Vec<u32>,
    pub strategy: Strategy,
    pub mesh_rule: MeshRule,
    pub mesh_floor: Option<u32>,
    /// When set, retry each stage with growing `D` (up to the source
    /// diameter) until the width drops to 2.
    pub escalate_mesh: bool,
}

/// Chain with every stage width forced `<= 2`.
pub fn sfdc_chain(
    space: &Arc<FiniteMetricSpace>,
    source: &Subset,
    params: &SfdcParams,
) -> Result<SfdcOutcome> {
    if params.radii.is_empty() {
        return Err(Error::structural("chain needs at least one radius"));
    }
    let mut chain = DecompositionChain {
        space: Arc::clone(space),
        source: source.clone(),
        radii: Vec::new(),
        stages: Vec::new(),
        witnesses: Vec::new(),
        widths: Vec::new(),
        terminal_mesh: space.diameter_of(source.members()),
    };
    let diameter = space.diameter_of(source.members());
    for (i, &r) in params.radii.iter().enumerate() {
        let current_mesh = match chain.stages.last() {
            Some(f) => mesh(space, f)?,
            None => chain.terminal_mesh,
        };
        if let Some(floor) = params.mesh_floor {
            if current_mesh <= floor {
                break;
            }
        }
        let parents: Vec<Subset> = match chain.stages.last() {
            Some(f) => f.pieces.iter().map(|p| p.set.clone()).collect(),
            None => vec![source.clone()],
        };
        let mut d = params.mesh_rule.apply(r);
        let (witnesses, width, stage_pieces) = loop {
            let mut ws = Vec::with_capacity(parents.len());
            let mut width = 0u32;
            let mut pieces = Vec::new();
            for (pidx, pset) in parents.iter().enumerate() {
                let tag = format!("s{}.{}", i + 1, pidx);
                let decomposition = decompose(space, pset, r, d, &params.strategy, &tag)?;
                width = width.max(decomposition.width());
                for piece in decomposition.pieces() {
                    pieces.push(piece.clone());
                }
                ws.push(decomposition);
            }
            if width <= 2 {
                break (ws, width, pieces);
            }
            if params.escalate_mesh && d < diameter {
                d = (d + 1).max(d.saturating_mul(3) / 2).min(diameter);
                continue;
            }
            return Ok(SfdcOutcome::Failure { stage: i + 1, radius: r, d_tried: d, width_found: width });
        };
        chain.radii.push(r);
        chain.widths.push(width);
        chain.stages.push(Family::new(stage_pieces, format!("stage{}", i + 1)));
        chain.witnesses.push(witnesses);
    }
    chain.terminal_mesh = match chain.stages.last() {
        Some(f) => mesh(space, f)?,
        None => chain.terminal_mesh,
    };
    Ok(SfdcOutcome::Chain(chain))
}

/// One row of the finite-scale dimension-growth profile. `n_greedy` and
/// `n_exact` estimate `d_X(R)` restricted to this ball and mesh bound;
/// they are not claims about the asymptotic dimension growth function.
#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub space_desc: String,
    pub ball_radius: u32,
    pub r: u32,
    pub d: u32,
    pub n_greedy: u32,
    pub n_exact: Option<u32>,
    pub note: String,
}

#[derive(Debug, Clone, Default)]
pub struct ProfileTable {
    pub rows: Vec<ProfileRow>,
}

/// Profile one space over a radius list: greedy width at `D = rule(R)`,
/// plus the exact minimum when the space is small enough.
pub fn dimension_profile(
    space: &Arc<FiniteMetricSpace>,
    space_desc: &str,
    ball_radius: u32,
    rs: &[u32],
    mesh_rule: MeshRule,
    exact_limit: usize,
) -> Result<ProfileTable> {
    let source = Subset::whole(space);
    let mut table = ProfileTable::default();
    for &r in rs {
        let d = mesh_rule.apply(r);
        let greedy = greedy_decompose(space, &source, r, d, "profile")?;
        let (n_exact, note) = if source.len() <= exact_limit {
            match exact_min_families(space, &source, r, d, exact_limit) {
                Ok(n) => (Some(n), String::new()),
                Err(e) => (None, format!("{e}")),
            }
        } else {
            (None, format!("exact search skipped: {} points > limit {exact_limit}", source.len()))
        };
        table.rows.push(ProfileRow {
            space_desc: space_desc.into(),
            ball_radius,
            r,
            d,
            n_greedy: greedy.width(),
            n_exact,
            note,
        });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{verify_chain, ChainBound};
    use crate::groups;
    use crate::growth::GrowthFunction;

    fn z_ball(n: u32) -> Arc<FiniteMetricSpace> {
        let g = groups::free_abelian(1).unwrap();
        Arc::new(groups::ball(&g, n, 100_000).unwrap().space())
    }

    #[test]
    fn greedy_on_z_ball_alternates_two_families() {
        let space = z_ball(20);
        let d = greedy_decompose(&space, &Subset::whole(&space), 3, 7, "t").unwrap();
        assert_eq!(d.width(), 2);
    }

    #[test]
    fn greedy_single_family_when_d_covers_diameter() {
        let space = z_ball(5);
        let d = greedy_decompose(&space, &Subset::whole(&space), 2, 2 * space.diameter(), "t").unwrap();
        assert_eq!(d.width(), 1);
        assert_eq!(d.subfamilies[0].len(), 1);
    }

    #[test]
    fn greedy_singletons_on_path_need_three_colors() {
        let space = Arc::new(FiniteMetricSpace::path(10));
        let d = greedy_decompose(&space, &Subset::whole(&space), 2, 0, "t").unwrap();
        assert!(d.pieces().all(|p| p.members().len() == 1));
        assert_eq!(d.width(), 3);
    }

    #[test]
    fn exact_minimum_on_path_is_two() {
        let space = Arc::new(FiniteMetricSpace::path(10));
        let source = Subset::whole(&space);
        assert_eq!(exact_min_families(&space, &source, 2, 3, 12).unwrap(), 2);
    }

    #[test]
    fn exact_trivial_cases() {
        let space = FiniteMetricSpace::from_matrix(
            alloc::vec![alloc::vec![0, 5], alloc::vec![5, 0]],
            "two",
        )
        .unwrap();
        let space = Arc::new(space);
        let source = Subset::whole(&space);
        assert_eq!(exact_min_families(&space, &source, 1, 0, 12).unwrap(), 1);

        let path = Arc::new(FiniteMetricSpace::path(5));
        let src = Subset::whole(&path);
        let exact = exact_min_families(&path, &src, 10, 1, 12).unwrap();
        let greedy = greedy_decompose(&path, &src, 10, 1, "t").unwrap().width();
        assert!(exact <= greedy);
        // R = 10 exceeds the diameter, so distinct pieces are impossible
        // to separate: every family holds one piece of diameter <= 1,
        // and three families are needed for five points... verify via
        // the oracle itself rather than a hand claim.
        assert_eq!(exact, 3);
    }

    #[test]
    fn exact_resource_limit() {
        let space = Arc::new(FiniteMetricSpace::path(20));
        let source = Subset::whole(&space);
        assert!(matches!(
            exact_min_families(&space, &source, 1, 1, 12),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn build_chain_grid_on_z_ball() {
        let space = z_ball(100);
        let params = ChainParams {
            radii: alloc::vec![2],
            strategy: Strategy::Grid,
            mesh_rule: MeshRule::Fixed(5),
            mesh_floor: None,
        };
        let chain = build_chain(&space, &Subset::whole(&space), &params).unwrap();
        assert_eq!(chain.widths, alloc::vec![2]);
        assert_eq!(chain.terminal_mesh, 5);
        let report =
            verify_chain(&chain, &ChainBound::Growth(GrowthFunction::constant(2))).unwrap();
        assert!(report.pass, "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn build_chain_early_stop() {
        let space = z_ball(100);
        let params = ChainParams {
            radii: alloc::vec![2, 4],
            strategy: Strategy::Grid,
            mesh_rule: MeshRule::Fixed(5),
            mesh_floor: Some(5),
        };
        let chain = build_chain(&space, &Subset::whole(&space), &params).unwrap();
        assert_eq!(chain.stage_count(), 1);
    }

    #[test]
    fn build_chain_on_free_group_ball() {
        let g = groups::free(2).unwrap();
        let space = Arc::new(groups::ball(&g, 4, 100_000).unwrap().space());
        let params = ChainParams::new(alloc::vec![1, 2, 4], Strategy::GreedyCarve);
        let chain = build_chain(&space, &Subset::whole(&space), &params).unwrap();
        let bound = ChainBound::Widths(chain.widths.iter().map(|&w| w as u64).collect());
        let report = verify_chain(&chain, &bound).unwrap();
        assert!(report.pass, "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn sfdc_on_z_ball() {
        let space = z_ball(30);
        let params = SfdcParams {
            radii: alloc::vec![2],
            strategy: Strategy::Grid,
            mesh_rule: MeshRule::TimesR(3),
            mesh_floor: None,
            escalate_mesh: false,
        };
        match sfdc_chain(&space, &Subset::whole(&space), &params).unwrap() {
            SfdcOutcome::Chain(c) => {
                assert!(c.widths.iter().all(|&w| w <= 2));
            }
            SfdcOutcome::Failure { .. } => panic!("width-2 chain exists on an interval"),
        }
    }

    #[test]
    fn sfdc_reports_failure_without_escalation() {
        // Singleton pieces on a path at R = 2 need 3 families; with
        // D = 0 fixed, a width-2 search must report failure.
        let space = Arc::new(FiniteMetricSpace::path(10));
        let params = SfdcParams {
            radii: alloc::vec![2],
            strategy: Strategy::GreedyCarve,
            mesh_rule: MeshRule::Fixed(0),
            mesh_floor: None,
            escalate_mesh: false,
        };
        match sfdc_chain(&space, &Subset::whole(&space), &params).unwrap() {
            SfdcOutcome::Failure { width_found, .. } => assert!(width_found > 2),
            SfdcOutcome::Chain(_) => panic!("expected a width failure"),
        }
    }

    #[test]
    fn sfdc_empty_chain_on_single_point() {
        let space = Arc::new(FiniteMetricSpace::path(1));
        let params = SfdcParams {
            radii: alloc::vec![2],
            strategy: Strategy::GreedyCarve,
            mesh_rule: MeshRule::TimesR(3),
            mesh_floor: Some(0),
            escalate_mesh: false,
        };
        match sfdc_chain(&space, &Subset::whole(&space), &params).unwrap() {
            SfdcOutcome::Chain(c) => {
                assert_eq!(c.stage_count(), 0);
                assert_eq!(c.terminal_mesh, 0);
            }
            SfdcOutcome::Failure { .. } => panic!("one-point space is already bounded"),
        }
    }

    #[test]
    fn profile_z_is_two_for_small_radii() {
        let space = z_ball(100);
        let table =
            dimension_profile(&space, "z^1", 100, &[1, 2, 3, 4, 5], MeshRule::TimesR(3), 12)
                .unwrap();
        for row in &table.rows {
            assert_eq!(row.n_greedy, 2, "R = {}", row.r);
        }
    }

    #[test]
    fn oracle_never_exceeds_greedy_on_fragments() {
        let space = Arc::new(FiniteMetricSpace::path(10));
        let source = Subset::whole(&space);
        for r in [1u32, 2, 3] {
            for mult in [1u32, 2, 3] {
                let d = r * mult;
                let g = greedy_decompose(&space, &source, r, d, "t").unwrap().width();
                let e = exact_min_families(&space, &source, r, d, 12).unwrap();
                assert!(e <= g, "R={r} D={d}: exact {e} > greedy {g}");
            }
        }
    }

    #[test]
    fn grid_on_z2_ball_uses_four_families() {
        let g = groups::free_abelian(2).unwrap();
        let space = Arc::new(groups::ball(&g, 20, 100_000).unwrap().space());
        let d = grid_decompose(&space, &Subset::whole(&space), 2, 6, "t").unwrap();
        assert!(d.width() <= 4);
    }
}
