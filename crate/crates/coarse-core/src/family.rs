//! Families of subsets: mesh, `R`-disjointness, provenance tags.
//!
//! Pieces carry a provenance tag naming the construction that produced
//! them. Tags make equal point-sets from different parents distinct
//! pieces, which is how the "take a disjoint union if necessary" device
//! of the witness construction is realized concretely.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::space::{set_distance, FiniteMetricSpace, Subset};

/// One member of a family: a nonempty set of points plus a provenance tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Piece {
    pub set: Subset,
    pub tag: String,
}

impl Piece {
    pub fn new(members: Vec<u32>, tag: impl Into<String>) -> Result<Self> {
        Ok(Self { set: Subset::new(members)?, tag: tag.into() })
    }

    pub fn members(&self) -> &[u32] {
        self.set.members()
    }
}

/// A finite list of pieces over one space. Pieces may overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub pieces: Vec<Piece>,
    pub tag: String,
}

impl Family {
    pub fn new(pieces: Vec<Piece>, tag: impl Into<String>) -> Self {
        Self { pieces, tag: tag.into() }
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn validate(&self, space: &FiniteMetricSpace) -> Result<()> {
        for p in &self.pieces {
            p.set.validate(space)?;
        }
        Ok(())
    }
}

/// `mesh F = max over pieces of the piece diameter`.
///
/// The mesh of an empty family is a domain error rather than 0, so that
/// constructions which accidentally drop every piece fail loudly.
pub fn mesh(space: &FiniteMetricSpace, family: &Family) -> Result<u32> {
    if family.is_empty() {
        return Err(Error::domain("mesh of an empty family is undefined"));
    }
    family.validate(space)?;
    Ok(family
        .pieces
        .iter()
        .map(|p| space.diameter_of(p.members()))
        .max()
        .expect("nonempty"))
}

/// Minimum distance between distinct pieces, `None` for families with
/// fewer than two pieces.
pub fn min_inter_piece_distance(space: &FiniteMetricSpace, family: &Family) -> Result<Option<u32>> {
    family.validate(space)?;
    let mut best: Option<u32> = None;
    for (i, a) in family.pieces.iter().enumerate() {
        for b in &family.pieces[i + 1..] {
            let d = set_distance(space, &a.set, &b.set)?;
            best = Some(best.map_or(d, |x| x.min(d)));
        }
    }
    Ok(best)
}

/// True iff every pair of distinct pieces is at distance strictly
/// greater than `r`. Families with at most one piece qualify vacuously.
pub fn is_r_disjoint(space: &FiniteMetricSpace, family: &Family, r: u32) -> Result<bool> {
    Ok(match min_inter_piece_distance(space, family)? {
        Some(d) => d > r,
        None => true,
    })
}

/// Union of all piece members, sorted and deduplicated.
pub fn union_members(family: &Family) -> Vec<u32> {
    let mut all: Vec<u32> = family.pieces.iter().flat_map(|p| p.members().iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    all
}

/// Convenience constructor used throughout tests and builders: pieces
/// from raw index lists, tags `base.k`.
pub fn family_from_sets(sets: Vec<Vec<u32>>, base_tag: &str) -> Result<Family> {
    let pieces = sets
        .into_iter()
        .enumerate()
        .map(|(k, s)| Piece::new(s, format!("{base_tag}.{k}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Family::new(pieces, base_tag))
}
