//! Pulling decompositions back along quasi-isometric embeddings.
//!
//! For an `(L,C)`-embedding (strict bounds `L d - C < d(f.,f.) < L d + C`
//! on every pair, checked exhaustively at construction) and an
//! `R`-disjoint, mesh-`<= D` family on the target, the preimage family
//! is `(R-C)/L`-disjoint with mesh `<= (D+C)/L`. Both bounds are
//! certified as exact `i64` rationals and then *re-measured* on the
//! actual preimages; a measurement below the certificate means the
//! embedding contract was violated and raises an integrity error.
//!
//! Distances here are integers, so a strict rational bound `d > q`
//! pins the usable integer radius: `floor(q)` always works, and the
//! measured minimum distance may allow more. Decompositions and chains
//! store the measured radius; certificates keep the rational bound.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::decomp::{
    verify_chain, verify_decomposition, ChainBound, Decomposition, DecompositionChain,
};
use crate::error::{Error, Result};
use crate::family::{mesh, min_inter_piece_distance, Family, Piece};
use crate::growth::GrowthFunction;
use crate::space::{FiniteMetricSpace, Subset};
use crate::Rational;

/// A verified `(L,C)`-quasi-isometric embedding between finite spaces.
#[derive(Debug, Clone)]
pub struct QIEmbedding {
    pub source: Arc<FiniteMetricSpace>,
    pub target: Arc<FiniteMetricSpace>,
    /// Image point index per source point.
    pub map: Vec<u32>,
    pub l: Rational,
    pub c: Rational,
}

impl QIEmbedding {
    /// Checks `L d(x,y) - C < d(f(x),f(y)) < L d(x,y) + C` strictly on
    /// every pair of source points (exact rational comparisons).
    pub fn new(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        map: Vec<u32>,
        l: Rational,
        c: Rational,
    ) -> Result<Self> {
        if l <= Rational::zero() {
            return Err(Error::domain("quasi-isometric embedding needs L > 0"));
        }
        if c <= Rational::zero() {
            return Err(Error::domain(
                "quasi-isometric embedding needs C > 0 (the bounds are strict)",
            ));
        }
        if map.len() != source.n_points() {
            return Err(Error::structural(format!(
                "map has {} entries for {} source points",
                map.len(),
                source.n_points()
            )));
        }
        for &t in &map {
            target.check_index(t)?;
        }
        let n = source.n_points() as u32;
        for x in 0..n {
            for y in (x + 1)..n {
                let d = Rational::from_integer(source.dist(x, y) as i64);
                let df = Rational::from_integer(target.dist(map[x as usize], map[y as usize]) as i64);
                if !(l * d - c < df && df < l * d + c) {
                    return Err(Error::structural(format!(
                        "not an ({l},{c})-embedding: d({x},{y}) = {d} maps to {df}"
                    )));
                }
            }
        }
        Ok(Self { source, target, map, l, c })
    }

    /// Preimage of a target index set, as source indices.
    fn preimage(&self, members: &[u32]) -> Vec<u32> {
        let set: alloc::collections::BTreeSet<u32> = members.iter().copied().collect();
        (0..self.map.len() as u32).filter(|&x| set.contains(&self.map[x as usize])).collect()
    }

    /// `(R - C) / L`.
    pub fn disjointness_bound(&self, r: u32) -> Rational {
        (Rational::from_integer(r as i64) - self.c) / self.l
    }

    /// `(D + C) / L`.
    pub fn mesh_bound(&self, d: u32) -> Rational {
        (Rational::from_integer(d as i64) + self.c) / self.l
    }
}

/// A pulled-back family with its certified rational bounds and the
/// measured values that witnessed them.
#[derive(Debug, Clone)]
pub struct CertifiedFamily {
    pub family: Family,
    pub certified_disjointness: Rational,
    pub certified_mesh: Rational,
    pub actual_min_distance: Option<u32>,
    pub actual_mesh: u32,
}

/// Pull back an `R`-disjoint family of mesh `<= D`, dropping empty
/// preimages. The preconditions are verified on the target; the
/// certified bounds are verified on the source.
pub fn pullback_family(
    f: &QIEmbedding,
    family: &Family,
    r: u32,
    d: u32,
) -> Result<CertifiedFamily> {
    family.validate(&f.target)?;
    if !crate::family::is_r_disjoint(&f.target, family, r)? {
        return Err(Error::structural(format!("family `{}` is not {r}-disjoint", family.tag)));
    }
    let target_mesh = mesh(&f.target, family)?;
    if target_mesh > d {
        return Err(Error::structural(format!(
            "family `{}` has mesh {target_mesh} > {d}",
            family.tag
        )));
    }

    let mut pieces = Vec::new();
    for p in &family.pieces {
        let pre = f.preimage(p.members());
        if pre.is_empty() {
            continue;
        }
        pieces.push(Piece { set: Subset::new(pre)?, tag: format!("f^-1({})", p.tag) });
    }
    if pieces.is_empty() {
        return Err(Error::domain("every piece has empty preimage"));
    }
    let pulled = Family::new(pieces, format!("f^-1({})", family.tag));

    let certified_disjointness = f.disjointness_bound(r);
    let certified_mesh = f.mesh_bound(d);
    let actual_min_distance = min_inter_piece_distance(&f.source, &pulled)?;
    let actual_mesh = mesh(&f.source, &pulled)?;
    if let Some(min_d) = actual_min_distance {
        if Rational::from_integer(min_d as i64) <= certified_disjointness {
            return Err(Error::integrity(format!(
                "pullback disjointness certificate violated: measured {min_d}, certified > {certified_disjointness}; \
                 the embedding does not satisfy its (L,C) contract"
            )));
        }
    }
    if Rational::from_integer(actual_mesh as i64) >= certified_mesh {
        return Err(Error::integrity(format!(
            "pullback mesh certificate violated: measured {actual_mesh}, certified < {certified_mesh}"
        )));
    }
    Ok(CertifiedFamily {
        family: pulled,
        certified_disjointness,
        certified_mesh,
        actual_min_distance,
        actual_mesh,
    })
}

/// Largest integer radius guaranteed by the strict rational bound
/// `d > q` on integer distances: `floor(q)` (clamped at 0).
pub fn guaranteed_radius(q: Rational) -> u32 {
    if q <= Rational::zero() {
        0
    } else {
        q.floor().to_integer() as u32
    }
}

/// A pulled-back decomposition with its radius certificates.
#[derive(Debug, Clone)]
pub struct PulledDecomposition {
    pub decomposition: Decomposition,
    /// Largest integer radius strictly below `(R-C)/L` (the
    /// metric-agnostic formula bound).
    pub formula_radius: u32,
    /// Radius actually verified on the preimages (`>=` formula bound).
    pub verified_radius: u32,
}

/// Pull a decomposition back subfamily-wise. The stored radius is the
/// largest integer the measured distances support.
pub fn pullback_decomposition(f: &QIEmbedding, d: &Decomposition) -> Result<PulledDecomposition> {
    let report = verify_decomposition(d)?;
    if !report.pass {
        return Err(Error::structural(format!(
            "input decomposition fails verification: {}",
            report.summary()
        )));
    }
    let bound = f.disjointness_bound(d.radius);
    // Largest integer strictly below the bound; 0 when the bound is
    // nonpositive (preimages of disjoint pieces are still disjoint).
    let formula_radius = if bound <= Rational::zero() {
        0
    } else {
        let fl = bound.floor();
        let fl_int = fl.to_integer() as u32;
        if fl == bound {
            fl_int.saturating_sub(1)
        } else {
            fl_int
        }
    };

    let mut min_measured: Option<u32> = None;
    let mut subfamilies = Vec::new();
    for fam in &d.subfamilies {
        let fam_mesh = mesh(&f.target, fam)?;
        let pulled = pullback_family(f, fam, d.radius, fam_mesh)?;
        if let Some(m) = pulled.actual_min_distance {
            min_measured = Some(min_measured.map_or(m, |x| x.min(m)));
        }
        subfamilies.push(pulled.family);
    }
    let source_pre = f.preimage(d.source.members());
    if source_pre.is_empty() {
        return Err(Error::domain("the decomposition source has empty preimage"));
    }
    let verified_radius = match min_measured {
        Some(m) => (m - 1).max(formula_radius),
        None => formula_radius,
    };
    let decomposition = Decomposition::verified(
        Arc::clone(&f.source),
        Subset::new(source_pre)?,
        verified_radius,
        subfamilies,
    )?;
    Ok(PulledDecomposition { decomposition, formula_radius, verified_radius })
}

/// Pull back a whole chain and transform its growth bound:
/// `t(x) = s(Lx + C)`. The pulled chain is verified against `t` before
/// being returned.
pub fn pullback_chain(
    f: &QIEmbedding,
    chain: &DecompositionChain,
    s: &GrowthFunction,
) -> Result<(DecompositionChain, GrowthFunction)> {
    let input_report = verify_chain(chain, &ChainBound::Growth(s.clone()))?;
    if !input_report.pass {
        return Err(Error::structural("input chain fails verification against s"));
    }
    if !Arc::ptr_eq(&chain.space, &f.target) && chain.space.n_points() != f.target.n_points() {
        return Err(Error::structural("chain lives on a different space than the embedding target"));
    }

    let source_pre = f.preimage(chain.source.members());
    if source_pre.is_empty() {
        return Err(Error::domain("the chain source has empty preimage"));
    }
    let pulled_source = Subset::new(source_pre)?;

    let mut out = DecompositionChain {
        space: Arc::clone(&f.source),
        source: pulled_source.clone(),
        radii: Vec::new(),
        stages: Vec::new(),
        witnesses: Vec::new(),
        widths: Vec::new(),
        terminal_mesh: 0,
    };

    // Parents whose preimage is empty disappear together with their
    // witnesses; track survivors by piece identity. Witness pieces lie
    // inside their parent, so a dead parent's children are dead too.
    let mut prev_alive: alloc::collections::BTreeSet<(alloc::string::String, Subset)> =
        [(alloc::string::String::from("source"), chain.source.clone())].into_iter().collect();
    for (i, &r) in chain.radii.iter().enumerate() {
        let stage_radius = guaranteed_radius(f.disjointness_bound(r));
        let parents: Vec<(alloc::string::String, Subset)> = if i == 0 {
            alloc::vec![(alloc::string::String::from("source"), chain.source.clone())]
        } else {
            chain.stages[i - 1].pieces.iter().map(|p| (p.tag.clone(), p.set.clone())).collect()
        };
        let mut stage_pieces = Vec::new();
        let mut witnesses = Vec::new();
        let mut width = 0u32;
        let mut alive = alloc::collections::BTreeSet::new();
        for (parent, wit) in parents.iter().zip(chain.witnesses[i].iter()) {
            if !prev_alive.contains(parent) {
                continue;
            }
            let pulled = pullback_decomposition(f, wit)?;
            width = width.max(pulled.decomposition.width());
            for piece in pulled.decomposition.pieces() {
                stage_pieces.push(piece.clone());
            }
            for fam in &wit.subfamilies {
                for piece in &fam.pieces {
                    if !f.preimage(piece.members()).is_empty() {
                        alive.insert((piece.tag.clone(), piece.set.clone()));
                    }
                }
            }
            // Chain invariant wants witness radius >= stage radius; the
            // measured radius is >= the formula radius = stage radius.
            witnesses.push(Decomposition {
                space: pulled.decomposition.space,
                source: pulled.decomposition.source,
                radius: pulled.verified_radius.max(stage_radius),
                subfamilies: pulled.decomposition.subfamilies,
            });
        }
        out.radii.push(stage_radius);
        out.widths.push(width);
        out.stages.push(Family::new(stage_pieces, format!("pulled.{}", chain.stages[i].tag)));
        out.witnesses.push(witnesses);
        prev_alive = alive;
    }
    out.terminal_mesh = mesh(&f.source, &out.terminal_family())?;

    let t = s.compose_affine(f.l, f.c)?;
    let report = verify_chain(&out, &ChainBound::Growth(t.clone()))?;
    if !report.pass {
        return Err(Error::integrity(format!(
            "pulled-back chain fails verification against t(x) = s(Lx + C): {:?}",
            report.failures().map(|c| c.label.clone()).collect::<Vec<_>>()
        )));
    }
    Ok((out, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::family_from_sets;
    use alloc::vec;

    fn paths(n: usize, m: usize) -> (Arc<FiniteMetricSpace>, Arc<FiniteMetricSpace>) {
        (Arc::new(FiniteMetricSpace::path(n)), Arc::new(FiniteMetricSpace::path(m)))
    }

    #[test]
    fn embedding_contract_is_strict() {
        let (src, tgt) = paths(6, 16);
        let map: Vec<u32> = (0..6).map(|x| 3 * x).collect();
        assert!(QIEmbedding::new(
            Arc::clone(&src),
            Arc::clone(&tgt),
            map.clone(),
            Rational::from_integer(3),
            Rational::from_integer(1),
        )
        .is_ok());
        // L = 3, C = 0 would need 3d < 3d: rejected up front.
        assert!(QIEmbedding::new(src, tgt, map, Rational::from_integer(3), Rational::zero())
            .is_err());
    }

    #[test]
    fn pullback_family_scaling_example() {
        let (src, tgt) = paths(6, 16);
        let map: Vec<u32> = (0..6).map(|x| 3 * x).collect();
        let f = QIEmbedding::new(src, tgt, map, Rational::from_integer(3), Rational::from_integer(1))
            .unwrap();
        let v = family_from_sets(vec![vec![0, 1, 2], vec![9, 10, 11]], "v").unwrap();
        // d(V1, V2) = 7 > 6, mesh 2.
        let pulled = pullback_family(&f, &v, 6, 2).unwrap();
        assert_eq!(pulled.family.pieces.len(), 2);
        assert_eq!(pulled.family.pieces[0].members(), &[0]);
        assert_eq!(pulled.family.pieces[1].members(), &[3]);
        assert_eq!(pulled.certified_disjointness, Rational::new(5, 3));
        assert_eq!(pulled.actual_min_distance, Some(3));
        assert_eq!(pulled.certified_mesh, Rational::from_integer(1));
        assert_eq!(pulled.actual_mesh, 0);
    }

    #[test]
    fn pullback_identity_and_dropped_pieces() {
        let (src, _) = paths(10, 10);
        let f = QIEmbedding::new(
            Arc::clone(&src),
            Arc::clone(&src),
            (0..10).collect(),
            Rational::from_integer(1),
            Rational::from_integer(1),
        )
        .unwrap();
        let v = family_from_sets(vec![vec![0, 1], vec![6, 7]], "v").unwrap();
        let pulled = pullback_family(&f, &v, 3, 1).unwrap();
        assert_eq!(pulled.family.pieces.len(), 2);
        assert_eq!(pulled.certified_disjointness, Rational::from_integer(2)); // R - 1
        assert_eq!(pulled.certified_mesh, Rational::from_integer(2)); // D + 1

        // A piece entirely outside the image is dropped.
        let half: Vec<u32> = (0..5).collect();
        let g = QIEmbedding::new(
            Arc::new(FiniteMetricSpace::path(5)),
            src,
            half,
            Rational::from_integer(1),
            Rational::from_integer(1),
        )
        .unwrap();
        let v = family_from_sets(vec![vec![0, 1], vec![8, 9]], "v").unwrap();
        let pulled = pullback_family(&g, &v, 3, 1).unwrap();
        assert_eq!(pulled.family.pieces.len(), 1);
    }

    #[test]
    fn pullback_decomposition_radius_uses_measured_distances() {
        // f(x) = 2x from path 0..11 into path 0..21, (L,C) = (2,1).
        let (src, tgt) = paths(11, 22);
        let map: Vec<u32> = (0..11).map(|x| 2 * x).collect();
        let f = QIEmbedding::new(src, tgt, map, Rational::from_integer(2), Rational::from_integer(1))
            .unwrap();
        // Target decomposition at R = 9: two pieces 10 apart.
        let d = Decomposition {
            space: Arc::clone(&f.target),
            source: Subset::new((0..5).chain(14..19).collect()).unwrap(),
            radius: 9,
            subfamilies: vec![family_from_sets(vec![(0..5).collect(), (14..19).collect()], "a")
                .unwrap()],
        };
        let pulled = pullback_decomposition(&f, &d).unwrap();
        // Formula: largest integer < (9-1)/2 = 4 gives 3; measured
        // preimages {0,1,2} and {7,8,9} are 5 apart, so radius 4 holds.
        assert_eq!(pulled.formula_radius, 3);
        assert_eq!(pulled.verified_radius, 4);

        // Identity embedding: everything passes through.
        let (src, _) = paths(10, 10);
        let id = QIEmbedding::new(
            Arc::clone(&src),
            Arc::clone(&src),
            (0..10).collect(),
            Rational::from_integer(1),
            Rational::from_integer(1),
        )
        .unwrap();
        let d = Decomposition {
            space: Arc::clone(&src),
            source: Subset::whole(&src),
            radius: 2,
            subfamilies: vec![
                family_from_sets(vec![vec![0, 1, 2, 3], vec![8, 9]], "a").unwrap(),
                family_from_sets(vec![vec![4, 5, 6, 7]], "b").unwrap(),
            ],
        };
        let pulled = pullback_decomposition(&id, &d).unwrap();
        assert_eq!(pulled.decomposition.width(), 2);
        // Single-piece inputs stay single pieces.
        let single = Decomposition {
            space: Arc::clone(&src),
            source: Subset::whole(&src),
            radius: 5,
            subfamilies: vec![family_from_sets(vec![(0..10).collect()], "w").unwrap()],
        };
        let pulled = pullback_decomposition(&id, &single).unwrap();
        assert_eq!(pulled.decomposition.width(), 1);
        // (5-1)/1 = 4 exactly; the largest integer strictly below is 3,
        // and a single piece offers no measured distance to improve it.
        assert_eq!(pulled.formula_radius, 3);
        assert_eq!(pulled.verified_radius, 3);
    }
}
