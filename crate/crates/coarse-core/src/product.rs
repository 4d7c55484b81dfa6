//! Product chains: combining decomposition chains of two spaces into a
//! chain of their product under the sum metric.
//!
//! Stage `i` of the product uses every rectangle `U x V` of stage-`i`
//! pieces; a parent rectangle's witness crosses the subfamilies of the
//! factor witnesses, giving width `n_X * n_Y`, and each crossed
//! subfamily is `R`-disjoint in the sum metric because distinct
//! rectangles differ in some factor. A shorter chain is padded at the
//! end with trivial stages in which each piece decomposes into the
//! single family holding itself. All of this is re-verified on the
//! product space, not assumed.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::{verify_chain, ChainBound, Decomposition, DecompositionChain};
use crate::error::{Error, Result};
use crate::family::{mesh, Family, Piece};
use crate::growth::GrowthFunction;
use crate::space::{FiniteMetricSpace, Subset};

/// Padded view of one factor chain: stages and witnesses continue past
/// the real length by repeating the terminal family trivially.
struct Padded<'a> {
    chain: &'a DecompositionChain,
    terminal: Family,
}

impl<'a> Padded<'a> {
    fn new(chain: &'a DecompositionChain) -> Self {
        Self { chain, terminal: chain.terminal_family() }
    }

    fn stage(&self, i: usize) -> &Family {
        if i < self.chain.stages.len() {
            &self.chain.stages[i]
        } else {
            &self.terminal
        }
    }

    fn parents(&self, i: usize) -> Vec<Subset> {
        if i == 0 {
            vec![self.chain.source.clone()]
        } else {
            self.stage(i - 1).pieces.iter().map(|p| p.set.clone()).collect()
        }
    }

    /// Witness decomposing parent `p` of stage `i-1` over stage-`i`
    /// pieces; past the real length each piece decomposes into `{ itself }`.
    fn witness(&self, i: usize, p: usize, radius: u32) -> Decomposition {
        if i < self.chain.witnesses.len() {
            self.chain.witnesses[i][p].clone()
        } else {
            let piece = if i == 0 {
                Piece { set: self.chain.source.clone(), tag: String::from("source") }
            } else {
                self.stage(i - 1).pieces[p].clone()
            };
            Decomposition {
                space: Arc::clone(&self.chain.space),
                source: piece.set.clone(),
                radius,
                subfamilies: vec![Family::new(vec![piece], "trivial")],
            }
        }
    }
}

/// Rectangle of two index sets inside the product space.
fn rectangle(a: &[u32], b: &[u32], m: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * m + y);
        }
    }
    out
}

/// The product of two chains with growth bounds `s` and `t`: a chain on
/// `X x Y` (sum metric) with bound `s * t`, verified before returning.
/// Radii must agree on the shared prefix; the shorter chain is padded
/// with trivial stages at the longer chain's remaining radii.
pub fn product_chain(
    cx: &DecompositionChain,
    cy: &DecompositionChain,
    s: &GrowthFunction,
    t: &GrowthFunction,
) -> Result<(DecompositionChain, GrowthFunction)> {
    for (i, (a, b)) in cx.radii.iter().zip(cy.radii.iter()).enumerate() {
        if a != b {
            return Err(Error::structural(format!(
                "chain radii disagree at stage {}: {a} vs {b} (padding only extends lengths)",
                i + 1
            )));
        }
    }
    let radii: Vec<u32> =
        if cx.radii.len() >= cy.radii.len() { cx.radii.clone() } else { cy.radii.clone() };

    let space = Arc::new(FiniteMetricSpace::product(&cx.space, &cy.space));
    let m = cy.space.n_points() as u32;
    let px = Padded::new(cx);
    let py = Padded::new(cy);

    let source = Subset::new(rectangle(cx.source.members(), cy.source.members(), m))?;
    let mut out = DecompositionChain {
        space: Arc::clone(&space),
        source: source.clone(),
        radii: radii.clone(),
        stages: Vec::new(),
        witnesses: Vec::new(),
        widths: Vec::new(),
        terminal_mesh: 0,
    };

    for (i, &r) in radii.iter().enumerate() {
        let parents_x = px.parents(i);
        let parents_y = py.parents(i);
        let mut stage_pieces = Vec::new();
        let mut witnesses = Vec::new();
        let mut width = 0u32;
        for (xi, xset) in parents_x.iter().enumerate() {
            let wx = px.witness(i, xi, r);
            for (yi, yset) in parents_y.iter().enumerate() {
                let wy = py.witness(i, yi, r);
                let parent_set = if i == 0 {
                    source.clone()
                } else {
                    Subset::new(rectangle(xset.members(), yset.members(), m))?
                };
                let mut subfamilies =
                    Vec::with_capacity(wx.subfamilies.len() * wy.subfamilies.len());
                for (j, fa) in wx.subfamilies.iter().enumerate() {
                    for (k, fb) in wy.subfamilies.iter().enumerate() {
                        let mut pieces = Vec::with_capacity(fa.len() * fb.len());
                        for pa in &fa.pieces {
                            for pb in &fb.pieces {
                                pieces.push(Piece {
                                    set: Subset::new(rectangle(pa.members(), pb.members(), m))?,
                                    tag: format!("{}x{}", pa.tag, pb.tag),
                                });
                            }
                        }
                        subfamilies.push(Family::new(pieces, format!("s{}.f{j}x{k}", i + 1)));
                    }
                }
                let wit = Decomposition::verified(Arc::clone(&space), parent_set, r, subfamilies)?;
                width = width.max(wit.width());
                for piece in wit.pieces() {
                    stage_pieces.push(piece.clone());
                }
                witnesses.push(wit);
            }
        }
        out.widths.push(width);
        out.stages.push(Family::new(stage_pieces, format!("stage{}", i + 1)));
        out.witnesses.push(witnesses);
    }
    out.terminal_mesh = mesh(&space, &out.terminal_family())?;

    // Terminal mesh adds up across factors in the sum metric.
    let mesh_x = mesh(&cx.space, &px.terminal)?;
    let mesh_y = mesh(&cy.space, &py.terminal)?;
    if out.terminal_mesh > mesh_x + mesh_y {
        return Err(Error::integrity(format!(
            "product terminal mesh {} exceeds the sum of factor meshes {mesh_x} + {mesh_y}",
            out.terminal_mesh
        )));
    }

    let bound = s.product(t);
    let report = verify_chain(&out, &ChainBound::Growth(bound.clone()))?;
    if !report.pass {
        return Err(Error::integrity(format!(
            "product chain fails verification: {:?}",
            report.failures().map(|c| c.label.clone()).collect::<Vec<_>>()
        )));
    }
    Ok((out, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{build_chain, ChainParams, MeshRule, Strategy};
    use crate::groups;

    fn z_chain(n: u32, r: u32, d: u32) -> DecompositionChain {
        let g = groups::free_abelian(1).unwrap();
        let space = Arc::new(groups::ball(&g, n, 100_000).unwrap().space());
        let params = ChainParams {
            radii: vec![r],
            strategy: Strategy::Grid,
            mesh_rule: MeshRule::Fixed(d),
            mesh_floor: None,
        };
        build_chain(&space, &Subset::whole(&space), &params).unwrap()
    }

    #[test]
    fn product_of_width_two_chains_has_width_four() {
        let cx = z_chain(20, 3, 5);
        let cy = z_chain(20, 3, 5);
        assert_eq!(cx.widths, vec![2]);
        let s = GrowthFunction::constant(2);
        let (prod, bound) = product_chain(&cx, &cy, &s, &s).unwrap();
        assert_eq!(prod.widths, vec![4]);
        assert_eq!(bound.eval(3), 4);
        assert!(prod.terminal_mesh <= cx.terminal_mesh + cy.terminal_mesh);
    }

    #[test]
    fn product_with_single_point_is_isomorphic() {
        let cx = z_chain(15, 2, 5);
        let point = Arc::new(FiniteMetricSpace::path(1));
        let cy = DecompositionChain {
            space: Arc::clone(&point),
            source: Subset::whole(&point),
            radii: Vec::new(),
            stages: Vec::new(),
            witnesses: Vec::new(),
            widths: Vec::new(),
            terminal_mesh: 0,
        };
        let s = GrowthFunction::constant(2);
        let one = GrowthFunction::constant(1);
        let (prod, _) = product_chain(&cx, &cy, &s, &one).unwrap();
        assert_eq!(prod.widths, cx.widths);
        assert_eq!(prod.radii, cx.radii);
        assert_eq!(prod.terminal_mesh, cx.terminal_mesh);
        assert_eq!(prod.stages[0].pieces.len(), cx.stages[0].pieces.len());
    }

    #[test]
    fn padding_extends_the_shorter_chain() {
        let g = groups::free_abelian(1).unwrap();
        let space = Arc::new(groups::ball(&g, 30, 100_000).unwrap().space());
        let long = build_chain(
            &space,
            &Subset::whole(&space),
            &ChainParams {
                radii: vec![2, 2, 2],
                strategy: Strategy::Grid,
                mesh_rule: MeshRule::Fixed(11),
                mesh_floor: None,
            },
        )
        .unwrap();
        let short = z_chain(20, 2, 5);
        let s = GrowthFunction::constant(4);
        let (prod, _) = product_chain(&long, &short, &s, &s).unwrap();
        assert_eq!(prod.stage_count(), long.stage_count());
        // Stage widths multiply; the padded factor contributes width 1
        // past its real length.
        assert_eq!(prod.widths[0], long.widths[0] * short.widths[0]);
        for i in 1..long.stage_count() {
            assert_eq!(prod.widths[i], long.widths[i]);
        }
    }

    #[test]
    fn mismatched_radii_are_rejected() {
        let cx = z_chain(20, 2, 5);
        let cy = z_chain(20, 3, 5);
        let s = GrowthFunction::constant(2);
        assert!(matches!(product_chain(&cx, &cy, &s, &s), Err(Error::Structural(_))));
    }
}
