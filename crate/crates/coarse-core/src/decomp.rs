//! `(R,n)`-decompositions and decomposition chains, with verifiers.
//!
//! A [`Decomposition`] witnesses that a source set is covered by `n`
//! `R`-disjoint subfamilies. A [`DecompositionChain`] strings stages
//! together: stage `i+1` decomposes every piece of stage `i` (stage 0 is
//! the whole source), the radii are nondecreasing, and the terminal
//! family has a recorded mesh. Verification never trusts stored data:
//! every distance, cover, and width is recomputed from the space.
//!
//! Failed checks are report entries, not errors; errors are reserved for
//! structurally invalid input (indices out of range, ragged witnesses).

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::Result;
use crate::family::{mesh, min_inter_piece_distance, union_members, Family};
use crate::growth::GrowthFunction;
use crate::space::{FiniteMetricSpace, Subset};

/// A witness that `source` `(radius, n)`-decomposes: `n = subfamilies.len()`
/// families, each meant to be `radius`-disjoint, jointly covering `source`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub space: Arc<FiniteMetricSpace>,
    pub source: Subset,
    pub radius: u32,
    pub subfamilies: Vec<Family>,
}

impl Decomposition {
    pub fn width(&self) -> u32 {
        self.subfamilies.len() as u32
    }

    /// All pieces across subfamilies, in subfamily-then-piece order.
    pub fn pieces(&self) -> impl Iterator<Item = &crate::family::Piece> {
        self.subfamilies.iter().flat_map(|f| f.pieces.iter())
    }

    /// Construct and verify in one step; constructors in this crate call
    /// this so that every decomposition they return is checked.
    pub fn verified(
        space: Arc<FiniteMetricSpace>,
        source: Subset,
        radius: u32,
        subfamilies: Vec<Family>,
    ) -> Result<Self> {
        let d = Self { space, source, radius, subfamilies };
        let report = verify_decomposition(&d)?;
        if !report.pass {
            return Err(crate::error::Error::integrity(format!(
                "constructed decomposition failed verification: {}",
                report.summary()
            )));
        }
        Ok(d)
    }
}

/// Per-subfamily verification line.
#[derive(Debug, Clone)]
pub struct SubfamilyCheck {
    pub index: usize,
    pub pieces: usize,
    /// `None` when the subfamily has fewer than two pieces.
    pub min_inter_piece_distance: Option<u32>,
    pub r_disjoint: bool,
}

/// Result of [`verify_decomposition`].
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub radius: u32,
    pub width: u32,
    pub subfamilies: Vec<SubfamilyCheck>,
    /// Points of the source not covered by any piece.
    pub uncovered: Vec<u32>,
    pub pass: bool,
}

impl DecompositionReport {
    pub fn summary(&self) -> String {
        if self.pass {
            format!("pass (R={}, n={})", self.radius, self.width)
        } else {
            let bad: Vec<String> = self
                .subfamilies
                .iter()
                .filter(|c| !c.r_disjoint)
                .map(|c| {
                    format!(
                        "subfamily {} min distance {:?} not > {}",
                        c.index, c.min_inter_piece_distance, self.radius
                    )
                })
                .collect();
            let mut parts = bad;
            if !self.uncovered.is_empty() {
                parts.push(format!("{} uncovered points", self.uncovered.len()));
            }
            format!("fail: {}", parts.join("; "))
        }
    }
}

/// Recompute everything: each subfamily's minimum inter-piece distance
/// against the strict `> R` rule, and the cover of the source.
pub fn verify_decomposition(d: &Decomposition) -> Result<DecompositionReport> {
    d.source.validate(&d.space)?;
    let mut checks = Vec::with_capacity(d.subfamilies.len());
    for (index, fam) in d.subfamilies.iter().enumerate() {
        fam.validate(&d.space)?;
        let min_d = min_inter_piece_distance(&d.space, fam)?;
        let r_disjoint = min_d.map_or(true, |m| m > d.radius);
        checks.push(SubfamilyCheck {
            index,
            pieces: fam.len(),
            min_inter_piece_distance: min_d,
            r_disjoint,
        });
    }
    let mut covered = BTreeSet::new();
    for fam in &d.subfamilies {
        for p in &fam.pieces {
            covered.extend(p.members().iter().copied());
        }
    }
    let uncovered: Vec<u32> =
        d.source.members().iter().copied().filter(|m| !covered.contains(m)).collect();
    let pass = uncovered.is_empty() && checks.iter().all(|c| c.r_disjoint);
    Ok(DecompositionReport { radius: d.radius, width: d.width(), subfamilies: checks, uncovered, pass })
}

/// A chain of decompositions driven by nondecreasing radii.
///
/// `witnesses[0]` holds a single decomposition of `source` over the
/// pieces of `stages[0]`; for `i >= 1`, `witnesses[i][p]` decomposes
/// piece `p` of `stages[i-1]` over pieces of `stages[i]`. An empty chain
/// (no stages) represents a source whose single piece is already
/// considered bounded.
#[derive(Debug, Clone)]
pub struct DecompositionChain {
    pub space: Arc<FiniteMetricSpace>,
    pub source: Subset,
    pub radii: Vec<u32>,
    pub stages: Vec<Family>,
    pub witnesses: Vec<Vec<Decomposition>>,
    /// Per-stage width: the maximum subfamily count used by any witness
    /// at that stage.
    pub widths: Vec<u32>,
    pub terminal_mesh: u32,
}

impl DecompositionChain {
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// The family whose mesh is the terminal mesh: the last stage, or
    /// the single-piece family `{source}` for empty chains.
    pub fn terminal_family(&self) -> Family {
        match self.stages.last() {
            Some(f) => f.clone(),
            None => Family::new(
                alloc::vec![crate::family::Piece { set: self.source.clone(), tag: "source".into() }],
                "terminal",
            ),
        }
    }
}

/// Width bound for chain verification: a growth function evaluated at
/// each stage radius, or an explicit per-stage width list.
#[derive(Debug, Clone)]
pub enum ChainBound {
    Growth(GrowthFunction),
    Widths(Vec<u64>),
}

impl ChainBound {
    fn allowed(&self, stage: usize, radius: u32) -> Option<u64> {
        match self {
            ChainBound::Growth(g) => Some(g.eval(radius as u64)),
            ChainBound::Widths(w) => w.get(stage).copied(),
        }
    }
}

/// One labeled verification line of a chain report.
#[derive(Debug, Clone)]
pub struct ChainCheck {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub checks: Vec<ChainCheck>,
    pub terminal_mesh: u32,
    pub pass: bool,
}

impl ChainReport {
    fn push(&mut self, label: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.pass &= pass;
        self.checks.push(ChainCheck { label: label.into(), pass, detail: detail.into() });
    }

    pub fn failures(&self) -> impl Iterator<Item = &ChainCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Verify a chain: nondecreasing radii, witness shape, every step
/// witness re-verified with radius `>= R_i` and width `<= widths[i]`,
/// witness pieces drawn from the stage family, per-stage widths within
/// the bound, and the terminal mesh matching a recomputation.
pub fn verify_chain(chain: &DecompositionChain, bound: &ChainBound) -> Result<ChainReport> {
    let mut report = ChainReport { checks: Vec::new(), terminal_mesh: chain.terminal_mesh, pass: true };
    chain.source.validate(&chain.space)?;

    let k = chain.radii.len();
    let shape_ok =
        chain.stages.len() == k && chain.witnesses.len() == k && chain.widths.len() == k;
    report.push("shape", shape_ok, format!("{k} radii, {} stages", chain.stages.len()));
    if !shape_ok {
        return Ok(report);
    }

    let nondecreasing = chain.radii.windows(2).all(|w| w[0] <= w[1]);
    report.push("radii nondecreasing", nondecreasing, format!("{:?}", chain.radii));

    for i in 0..k {
        let stage_pieces: BTreeSet<(&str, &Subset)> =
            chain.stages[i].pieces.iter().map(|p| (p.tag.as_str(), &p.set)).collect();
        let parents: Vec<Subset> = if i == 0 {
            alloc::vec![chain.source.clone()]
        } else {
            chain.stages[i - 1].pieces.iter().map(|p| p.set.clone()).collect()
        };
        let w = &chain.witnesses[i];
        let count_ok = w.len() == parents.len();
        report.push(
            format!("stage {} witness count", i + 1),
            count_ok,
            format!("{} witnesses for {} parents", w.len(), parents.len()),
        );
        if !count_ok {
            continue;
        }
        let mut max_width = 0u32;
        for (p, wit) in w.iter().enumerate() {
            max_width = max_width.max(wit.width());
            let src_ok = wit.source == parents[p];
            let radius_ok = wit.radius >= chain.radii[i];
            let inner = verify_decomposition(wit)?;
            let member_ok = wit
                .pieces()
                .all(|piece| stage_pieces.contains(&(piece.tag.as_str(), &piece.set)));
            let ok = src_ok && radius_ok && inner.pass && member_ok;
            if !ok {
                report.push(
                    format!("stage {} witness {}", i + 1, p),
                    false,
                    format!(
                        "source match: {src_ok}, radius {} >= {}: {radius_ok}, verified: {}, pieces in stage: {member_ok}",
                        wit.radius,
                        chain.radii[i],
                        inner.pass
                    ),
                );
            }
        }
        let width_recorded_ok = max_width <= chain.widths[i];
        report.push(
            format!("stage {} recorded width", i + 1),
            width_recorded_ok,
            format!("max witness width {max_width}, recorded {}", chain.widths[i]),
        );
        match bound.allowed(i, chain.radii[i]) {
            Some(allowed) => {
                let ok = (chain.widths[i] as u64) <= allowed;
                report.push(
                    format!("stage {} width bound", i + 1),
                    ok,
                    format!("width {} vs s({}) = {}", chain.widths[i], chain.radii[i], allowed),
                );
            }
            None => {
                report.push(format!("stage {} width bound", i + 1), false, "no bound supplied");
            }
        }
    }

    // Terminal mesh: recompute on the last stage (or the source itself
    // for empty chains).
    let terminal = chain.terminal_family();
    let m = mesh(&chain.space, &terminal)?;
    report.terminal_mesh = m;
    report.push(
        "terminal mesh",
        m == chain.terminal_mesh,
        format!("recomputed {m}, recorded {}", chain.terminal_mesh),
    );

    // Stage families are consistent with the witnesses below them: every
    // stage piece covers only source points (sanity for concatenations).
    if let Some(last) = chain.stages.last() {
        let src: BTreeSet<u32> = chain.source.members().iter().copied().collect();
        let inside = union_members(last).iter().all(|m| src.contains(m));
        report.push("stages within source", inside, "");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::family_from_sets;
    use alloc::vec;

    fn path_space(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::path(n))
    }

    #[test]
    fn verify_decomposition_pass_and_failures() {
        let space = path_space(10);
        let whole = Subset::whole(&space);
        // R=2: {0..3},{8,9} in one family (gap 5 > 2), {4..7} in another.
        let d = Decomposition {
            space: Arc::clone(&space),
            source: whole.clone(),
            radius: 2,
            subfamilies: vec![
                family_from_sets(vec![vec![0, 1, 2, 3], vec![8, 9]], "a").unwrap(),
                family_from_sets(vec![vec![4, 5, 6, 7]], "b").unwrap(),
            ],
        };
        assert!(verify_decomposition(&d).unwrap().pass);

        // Missing cover: drop {8,9}.
        let missing = Decomposition {
            space: Arc::clone(&space),
            source: whole.clone(),
            radius: 2,
            subfamilies: vec![
                family_from_sets(vec![vec![0, 1, 2, 3]], "a").unwrap(),
                family_from_sets(vec![vec![4, 5, 6, 7]], "b").unwrap(),
            ],
        };
        let r = verify_decomposition(&missing).unwrap();
        assert!(!r.pass);
        assert_eq!(r.uncovered, vec![8, 9]);

        // Strictness: distance 2 is not > 2.
        let tight = Decomposition {
            space,
            source: whole,
            radius: 2,
            subfamilies: vec![
                family_from_sets(vec![vec![0, 1, 2, 3], vec![5, 6, 7]], "a").unwrap(),
                family_from_sets(vec![vec![4], vec![8, 9]], "b").unwrap(),
            ],
        };
        let r = verify_decomposition(&tight).unwrap();
        assert!(!r.pass);
        assert_eq!(r.subfamilies[0].min_inter_piece_distance, Some(2));
    }

    /// Hand-built one-stage chain on the path 0..20: pieces of four
    /// points colored alternately, width 2, terminal mesh 3.
    fn one_stage_chain(space: &Arc<FiniteMetricSpace>) -> DecompositionChain {
        let sets: Vec<Vec<u32>> = (0..6).map(|b| (4 * b..4 * b + 4).collect()).collect();
        let even: Vec<Vec<u32>> = sets.iter().step_by(2).cloned().collect();
        let odd: Vec<Vec<u32>> = sets.iter().skip(1).step_by(2).cloned().collect();
        let fam_even = family_from_sets(even, "1.even").unwrap();
        let fam_odd = family_from_sets(odd, "1.odd").unwrap();
        let mut stage_pieces = fam_even.pieces.clone();
        stage_pieces.extend(fam_odd.pieces.clone());
        let stage = Family::new(stage_pieces, "stage1");
        let wit = Decomposition {
            space: Arc::clone(space),
            source: Subset::whole(space),
            radius: 2,
            subfamilies: vec![fam_even, fam_odd],
        };
        DecompositionChain {
            space: Arc::clone(space),
            source: Subset::whole(space),
            radii: vec![2],
            stages: vec![stage],
            witnesses: vec![vec![wit]],
            widths: vec![2],
            terminal_mesh: 3,
        }
    }

    #[test]
    fn verify_chain_width_bounds() {
        let space = path_space(24);
        let chain = one_stage_chain(&space);
        let ok = verify_chain(&chain, &ChainBound::Growth(GrowthFunction::constant(2))).unwrap();
        assert!(ok.pass, "{:?}", ok.failures().collect::<Vec<_>>());
        assert_eq!(ok.terminal_mesh, 3);

        // Width 2 > s(2) = 1.
        let bad = verify_chain(&chain, &ChainBound::Growth(GrowthFunction::constant(1))).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn verify_chain_rejects_decreasing_radii() {
        let space = path_space(24);
        let mut chain = one_stage_chain(&space);
        let second = chain.clone();
        chain.radii = vec![3, 2];
        chain.stages.push(second.stages[0].clone());
        chain.witnesses.push(vec![]);
        chain.widths.push(2);
        let r = verify_chain(&chain, &ChainBound::Growth(GrowthFunction::constant(2))).unwrap();
        assert!(!r.pass);
        assert!(r.failures().any(|c| c.label == "radii nondecreasing"));
    }
}
