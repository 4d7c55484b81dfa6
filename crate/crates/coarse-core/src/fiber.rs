//! Fibering a decomposition chain over a group action.
//!
//! Given a group ball acting transitively by isometries on a target
//! space, the orbit map `pi(g) = g x0` is `L`-Lipschitz with
//! `L = max d(x0, s x0)` over generators. A chain on the target pulls
//! back through `pi` (disjointness radii divide by `L`; meshes do not
//! pull back), leaving terminal pieces `U` that project into sets of
//! diameter `<= D`. Each such piece translates by `g_U^-1` into the
//! `D`-stabilizer `stab_D(x0) = { g : d(g x0, x0) <= D }`; a width-2
//! chain on the stabilizer is then mirrored back into every `U` — the
//! mirrored piece for a stabilizer piece `P` is `(g_U P) cap U`, which
//! is the direction that actually covers `U` (left translation is an
//! isometry, so all distance claims transfer exactly, and shrinking by
//! the intersection only increases separations).
//!
//! At finite scale the stabilizer must be enumerated inside `B(e, 2N)`:
//! translates `g_U^-1 g` of ball elements land there, not in `B(e, N)`.
//! Its subspace metric is the word metric truncated at `2N + 1`, exact
//! on every value the chain checks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::{verify_chain, ChainBound, Decomposition, DecompositionChain};
use crate::engine::{sfdc_chain, MeshRule, SfdcOutcome, SfdcParams, Strategy};
use crate::error::{Error, Result};
use crate::family::{mesh, Family, Piece};
use crate::groups::{Elem, Group, GroupBall};
use crate::growth::GrowthFunction;
use crate::space::{FiniteMetricSpace, Subset};

/// How a source-group element moves a target-group element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    /// The group acting on itself by left multiplication.
    SelfLeft,
    /// A wreath product acting on its base through the head:
    /// `(f, h) . x = h x`.
    HeadProjection,
    /// The action on a one-point space: every stabilizer is the whole
    /// group, and fibering degenerates to the stabilizer chain.
    Trivial,
}

/// A transitive isometric action of an enumerated group ball on an
/// enumerated target ball.
#[derive(Debug, Clone)]
pub struct GroupAction {
    pub source: Arc<GroupBall>,
    pub target: Arc<GroupBall>,
    pub kind: ActionKind,
    pub target_space: Arc<FiniteMetricSpace>,
}

impl GroupAction {
    pub fn new(source: Arc<GroupBall>, target: Arc<GroupBall>, kind: ActionKind) -> Result<Self> {
        match kind {
            ActionKind::SelfLeft => {
                if source.group != target.group {
                    return Err(Error::structural(
                        "self action needs the same group on both sides",
                    ));
                }
            }
            ActionKind::HeadProjection => match source.group.as_ref() {
                Group::Wreath { base, .. } => {
                    if *base.as_ref() != *target.group.as_ref() {
                        return Err(Error::structural(format!(
                            "head projection target must be the wreath base `{}`, got `{}`",
                            base.name(),
                            target.group.name()
                        )));
                    }
                }
                other => {
                    return Err(Error::structural(format!(
                        "head projection needs a wreath product source, got `{}`",
                        other.name()
                    )));
                }
            },
            ActionKind::Trivial => {
                if target.len() != 1 {
                    return Err(Error::structural(
                        "trivial action needs a one-point target (a radius-0 ball)",
                    ));
                }
            }
        }
        let target_space = Arc::new(target.space());
        Ok(Self { source, target, kind, target_space })
    }

    /// Apply a source element to a target element.
    pub fn apply(&self, g: &Elem, x: &Elem) -> Elem {
        match self.kind {
            ActionKind::SelfLeft => self.source.group.multiply(g, x),
            ActionKind::HeadProjection => match g {
                Elem::Wreath { head, .. } => self.target.group.multiply(head, x),
                _ => panic!("head projection applied to a non-wreath element"),
            },
        }
    }

    /// Orbit map `pi(g) = g x0` with `x0` the target identity.
    pub fn pi(&self, g: &Elem) -> Elem {
        self.apply(g, &self.target.group.identity())
    }

    /// `L = max d(x0, s x0)` over the source generators.
    pub fn lipschitz_l(&self) -> Result<u32> {
        let mut l = 0;
        for s in self.source.group.generators() {
            let moved = self.pi(&s);
            let len = self.target.word_length(&moved).ok_or_else(|| {
                Error::structural("generator moves the basepoint outside the target table")
            })?;
            l = l.max(len);
        }
        Ok(l)
    }

    /// Target-space index of `pi(g)` for every source ball point, also
    /// checking transitivity on the enumerated target.
    pub fn orbit_indices(&self) -> Result<Vec<u32>> {
        let mut hit = vec![false; self.target.len()];
        let mut out = Vec::with_capacity(self.source.len());
        for g in self.source.elems.iter() {
            let x = self.pi(g);
            let idx = self.target.index_of(&x).ok_or_else(|| {
                Error::structural(format!(
                    "pi({g}) = {x} falls outside the enumerated target ball; enlarge the target \
                     radius to at least L * N"
                ))
            })?;
            hit[idx as usize] = true;
            out.push(idx);
        }
        if let Some(miss) = hit.iter().position(|h| !h) {
            return Err(Error::structural(format!(
                "action is not transitive on the enumerated target: point {} is unreached",
                self.target.space().label(miss as u32)
            )));
        }
        Ok(out)
    }

    /// Isometry spot check: `d(g x, g y) = d(x, y)` on sampled triples,
    /// whenever both sides are inside the length table.
    pub fn check_isometry_sampled(&self, stride: usize) -> Result<()> {
        let tgt = &self.target;
        let n = tgt.len();
        for g in self.source.elems.iter().step_by(stride.max(1)) {
            for i in (0..n).step_by(stride.max(1)) {
                for j in (0..n).step_by(stride.max(1)) {
                    let (x, y) = (&tgt.elems[i], &tgt.elems[j]);
                    let gx = self.apply(g, x);
                    let gy = self.apply(g, y);
                    let d1 = tgt.word_length(
                        &tgt.group.multiply(&tgt.group.invert(x), y),
                    );
                    let d2 = tgt.word_length(
                        &tgt.group.multiply(&tgt.group.invert(&gx), &gy),
                    );
                    if let (Some(a), Some(b)) = (d1, d2) {
                        if a != b {
                            return Err(Error::integrity(format!(
                                "action is not isometric: d({x},{y}) = {a} but d(g.,g.) = {b}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The stabilizer subspace `stab_D(x0)` enumerated inside
    /// `B(e, 2N)`, with the truncated word metric. Returns the space
    /// and its members in space order.
    pub fn stab_space(&self, d: u32) -> Result<(Arc<FiniteMetricSpace>, Vec<Elem>)> {
        let mut members: Vec<(u32, Elem)> = Vec::new();
        for (e, len) in self.source.sorted_table_elems() {
            let moved = self.pi(&e);
            let dist = self.target.word_length(&moved).ok_or_else(|| {
                Error::structural(format!(
                    "pi({e}) leaves the target table; enlarge the target ball"
                ))
            })?;
            if dist <= d {
                members.push((len, e));
            }
        }
        let elems: Vec<Elem> = members.into_iter().map(|(_, e)| e).collect();
        let space = self.source.subspace(
            elems.clone(),
            format!("stab_{d}(x0) in ball({},{})", self.source.group.name(), self.source.radius),
        )?;
        Ok((Arc::new(space), elems))
    }
}

/// Output of [`fiber_chain`].
#[derive(Debug, Clone)]
pub struct FiberOutcome {
    pub chain: DecompositionChain,
    /// `t(R) = s(LR)`.
    pub bound: GrowthFunction,
    pub lipschitz_l: u32,
    pub stab_bound_d: u32,
    pub stab_terminal_mesh: u32,
}

/// Fiber a target chain through the action: pull back stages via `pi`,
/// then refine every terminal piece through the supplied width-2
/// stabilizer chain (keyed by the target chain's terminal mesh).
pub fn fiber_chain(
    action: &GroupAction,
    cx: &DecompositionChain,
    s: &GrowthFunction,
    stab_chains: &BTreeMap<u32, (DecompositionChain, Vec<Elem>)>,
) -> Result<FiberOutcome> {
    let input = verify_chain(cx, &ChainBound::Growth(s.clone()))?;
    if !input.pass {
        return Err(Error::structural("target chain fails verification against s"));
    }
    let l = action.lipschitz_l()?;
    let orbit = action.orbit_indices()?;
    let ball_space = Arc::new(action.source.space());
    let source = Subset::whole(&ball_space);

    // Pull the chain back through pi. pi is L-Lipschitz, so a target
    // family that is rho-disjoint pulls back floor(rho / L)-disjoint
    // (strictly: integer distances d with L d > rho give d > rho / L).
    let mut pulled = DecompositionChain {
        space: Arc::clone(&ball_space),
        source: source.clone(),
        radii: Vec::new(),
        stages: Vec::new(),
        witnesses: Vec::new(),
        widths: Vec::new(),
        terminal_mesh: 0,
    };
    let preimage = |members: &[u32]| -> Vec<u32> {
        let set: BTreeSet<u32> = members.iter().copied().collect();
        (0..orbit.len() as u32).filter(|&i| set.contains(&orbit[i as usize])).collect()
    };
    let mut prev_alive: BTreeSet<(String, Subset)> =
        [(String::from("source"), cx.source.clone())].into_iter().collect();
    for (i, &rho) in cx.radii.iter().enumerate() {
        let stage_radius = if l == 0 { rho } else { rho / l };
        let parents: Vec<(String, Subset)> = if i == 0 {
            vec![(String::from("source"), cx.source.clone())]
        } else {
            cx.stages[i - 1].pieces.iter().map(|p| (p.tag.clone(), p.set.clone())).collect()
        };
        let mut stage_pieces = Vec::new();
        let mut witnesses = Vec::new();
        let mut width = 0u32;
        let mut alive = BTreeSet::new();
        for (parent, wit) in parents.iter().zip(cx.witnesses[i].iter()) {
            if !prev_alive.contains(parent) {
                continue;
            }
            let parent_pre = preimage(parent.1.members());
            if parent_pre.is_empty() {
                continue;
            }
            let mut subfamilies = Vec::new();
            for fam in &wit.subfamilies {
                let mut pieces = Vec::new();
                for p in &fam.pieces {
                    let pre = preimage(p.members());
                    if pre.is_empty() {
                        continue;
                    }
                    alive.insert((p.tag.clone(), p.set.clone()));
                    pieces.push(Piece {
                        set: Subset::new(pre)?,
                        tag: format!("pi^-1({})", p.tag),
                    });
                }
                if !pieces.is_empty() {
                    subfamilies.push(Family::new(pieces, format!("pi^-1({})", fam.tag)));
                }
            }
            let wit = Decomposition::verified(
                Arc::clone(&ball_space),
                Subset::new(parent_pre)?,
                stage_radius,
                subfamilies,
            )?;
            width = width.max(wit.width());
            for piece in wit.pieces() {
                stage_pieces.push(piece.clone());
            }
            witnesses.push(wit);
        }
        pulled.radii.push(stage_radius);
        pulled.widths.push(width);
        pulled.stages.push(Family::new(stage_pieces, format!("pi^-1(stage{})", i + 1)));
        pulled.witnesses.push(witnesses);
        prev_alive = alive;
    }

    // The terminal pieces project into target sets of diameter <= D.
    let d_bound = cx.terminal_mesh;
    let (stab_chain, stab_members) = stab_chains.get(&d_bound).ok_or_else(|| {
        Error::structural(format!(
            "no stabilizer chain supplied for D = {d_bound} (the target chain's terminal mesh)"
        ))
    })?;
    if stab_chain.widths.iter().any(|&w| w > 2) {
        return Err(Error::structural("stabilizer chain must have width <= 2"));
    }
    let stab_index: BTreeMap<&Elem, u32> =
        stab_members.iter().enumerate().map(|(i, e)| (e, i as u32)).collect();
    let stab_terminal_mesh = stab_chain.terminal_mesh;
    if let (Some(&first_stab), Some(&last_pulled)) =
        (stab_chain.radii.first(), pulled.radii.last())
    {
        if first_stab < last_pulled {
            return Err(Error::structural(format!(
                "stabilizer radii must continue the pulled radii: {first_stab} < {last_pulled}"
            )));
        }
    }

    // Terminal pieces of the pulled chain (the whole ball when the
    // pulled chain is empty).
    let terminal_pieces: Vec<Piece> = pulled.terminal_family().pieces;

    // For each terminal piece U: translate into the stabilizer, check
    // containment, and mirror every stabilizer stage back as
    // (g_U P) cap U, realized as { g in U : g_U^-1 g in P }.
    struct Mirrored {
        // For stage j: mirrored pieces per (piece of U, stab piece).
        stages: Vec<Family>,
        witnesses: Vec<Vec<Decomposition>>,
    }
    let group = &action.source.group;
    let mut per_u: Vec<Mirrored> = Vec::new();
    for u in &terminal_pieces {
        let g_u = &action.source.elems[u.members()[0] as usize];
        let g_u_inv = group.invert(g_u);
        // Translate and locate each element of U inside the stabilizer.
        let mut translated: Vec<u32> = Vec::with_capacity(u.members().len());
        for &gi in u.members() {
            let g = &action.source.elems[gi as usize];
            let t = group.multiply(&g_u_inv, g);
            let ti = stab_index.get(&t).copied().ok_or_else(|| {
                Error::integrity(format!(
                    "translate g_U^-1 g = {t} is not in stab_{d_bound}(x0): the terminal piece \
                     projects wider than D or the stabilizer space is stale"
                ))
            })?;
            translated.push(ti);
        }
        // Left translation is an isometry: spot-check translated
        // distances against the originals where the table is exact.
        let stab_space_ref = &stab_chain.space;
        for (a, &ga) in u.members().iter().enumerate().step_by(7) {
            for (b, &gb) in u.members().iter().enumerate().step_by(5) {
                let d_orig = ball_space.dist(ga, gb);
                let d_tr = stab_space_ref.dist(translated[a], translated[b]);
                if d_orig != d_tr && d_tr <= 2 * action.source.radius {
                    return Err(Error::integrity(format!(
                        "translation by g_U is not isometric: {d_orig} vs {d_tr}"
                    )));
                }
            }
        }
        let translated_set: BTreeMap<u32, u32> = translated
            .iter()
            .enumerate()
            .map(|(pos, &ti)| (ti, u.members()[pos]))
            .collect();
        // Mirror one stabilizer family piece into U.
        let mirror_piece = |p: &Piece, tag: &str| -> Option<Piece> {
            let members: Vec<u32> = p
                .members()
                .iter()
                .filter_map(|ti| translated_set.get(ti).copied())
                .collect();
            if members.is_empty() {
                None
            } else {
                Some(Piece { set: Subset::new(members).ok()?, tag: format!("{}|{tag}", p.tag) })
            }
        };
        let mut stages = Vec::new();
        let mut witnesses_per_stage = Vec::new();
        let mut prev_parents: Vec<(Piece, Piece)> = Vec::new(); // (stab piece, mirrored)
        for (j, &rj) in stab_chain.radii.iter().enumerate() {
            let parents: Vec<Piece> = if j == 0 {
                vec![Piece { set: Subset::new(stab_members.iter().enumerate().map(|(i, _)| i as u32).collect())?, tag: String::from("stab") }]
            } else {
                stab_chain.stages[j - 1].pieces.clone()
            };
            let mut stage_pieces = Vec::new();
            let mut stage_witnesses = Vec::new();
            for (p_idx, parent) in parents.iter().enumerate() {
                // Mirrored parent: U itself at stage 0, else the
                // mirrored piece from the previous stage (skip if gone).
                let mirrored_parent_set = if j == 0 {
                    Some(u.set.clone())
                } else {
                    prev_parents
                        .iter()
                        .find(|(sp, _)| sp.tag == parent.tag && sp.set == parent.set)
                        .map(|(_, m)| m.set.clone())
                };
                let Some(parent_set) = mirrored_parent_set else { continue };
                let wit = &stab_chain.witnesses[j][p_idx];
                let mut subfamilies = Vec::new();
                for fam in &wit.subfamilies {
                    let pieces: Vec<Piece> =
                        fam.pieces.iter().filter_map(|p| mirror_piece(p, &u.tag)).collect();
                    if !pieces.is_empty() {
                        subfamilies.push(Family::new(pieces, format!("{}|{}", fam.tag, u.tag)));
                    }
                }
                let mirrored_wit = Decomposition::verified(
                    Arc::clone(&ball_space),
                    parent_set,
                    rj,
                    subfamilies,
                )?;
                for piece in mirrored_wit.pieces() {
                    stage_pieces.push(piece.clone());
                }
                stage_witnesses.push(mirrored_wit);
            }
            prev_parents = if j < stab_chain.stages.len() {
                stab_chain.stages[j]
                    .pieces
                    .iter()
                    .filter_map(|sp| mirror_piece(sp, &u.tag).map(|m| (sp.clone(), m)))
                    .collect()
            } else {
                Vec::new()
            };
            stages.push(Family::new(stage_pieces, format!("stab-stage{}", j + 1)));
            witnesses_per_stage.push(stage_witnesses);
        }
        per_u.push(Mirrored { stages, witnesses: witnesses_per_stage });
    }

    // Concatenate: pulled stages, then merged mirrored stages.
    let mut chain = pulled;
    for (j, &rj) in stab_chain.radii.iter().enumerate() {
        let mut stage_pieces = Vec::new();
        let mut stage_witnesses = Vec::new();
        let mut width = 0u32;
        for m in &per_u {
            for piece in &m.stages[j].pieces {
                stage_pieces.push(piece.clone());
            }
            for w in &m.witnesses[j] {
                width = width.max(w.width());
                stage_witnesses.push(w.clone());
            }
        }
        if stage_pieces.is_empty() {
            break;
        }
        chain.radii.push(rj);
        chain.widths.push(width);
        chain.stages.push(Family::new(stage_pieces, format!("fiber-stage{}", j + 1)));
        chain.witnesses.push(stage_witnesses);
    }
    chain.terminal_mesh = mesh(&ball_space, &chain.terminal_family())?;

    let widths: Vec<u64> = chain.widths.iter().map(|&w| w as u64).collect();
    let report = verify_chain(&chain, &ChainBound::Widths(widths))?;
    if !report.pass {
        return Err(Error::integrity(format!(
            "fibered chain fails verification: {:?}",
            report.failures().map(|c| c.label.clone()).collect::<Vec<_>>()
        )));
    }

    let bound = s.compose_affine(crate::Rational::from_integer(l.max(1) as i64), crate::Rational::from_integer(0))?;
    Ok(FiberOutcome {
        chain,
        bound,
        lipschitz_l: l,
        stab_bound_d: d_bound,
        stab_terminal_mesh,
    })
}

/// Convenience driver: build the target chain at radii `L * r` for the
/// requested radii, build a width-2 stabilizer chain (escalating the
/// mesh until width 2 is reached), then fiber. Returns the outcome and
/// the target chain actually used.
pub fn fiber_pipeline(
    action: &GroupAction,
    target_radii: &[u32],
    stab_radii: &[u32],
    s: &GrowthFunction,
) -> Result<(FiberOutcome, DecompositionChain)> {
    let l = action.lipschitz_l()?.max(1);
    let scaled: Vec<u32> = target_radii.iter().map(|&r| r * l).collect();
    let target_space = Arc::clone(&action.target_space);
    let strategy = if target_space.lattice_coords().is_some() {
        Strategy::Grid
    } else {
        Strategy::GreedyCarve
    };
    let cx = crate::engine::build_chain(
        &target_space,
        &Subset::whole(&target_space),
        &crate::engine::ChainParams {
            radii: scaled,
            strategy,
            mesh_rule: MeshRule::TimesR(3),
            mesh_floor: None,
        },
    )?;
    let d = cx.terminal_mesh;
    let (stab_space, stab_members) = action.stab_space(d)?;
    let outcome = sfdc_chain(
        &stab_space,
        &Subset::whole(&stab_space),
        &SfdcParams {
            radii: stab_radii.to_vec(),
            strategy: Strategy::GreedyCarve,
            mesh_rule: MeshRule::TimesR(3),
            mesh_floor: Some(0),
            escalate_mesh: true,
        },
    )?;
    let stab_chain = match outcome {
        SfdcOutcome::Chain(c) => c,
        SfdcOutcome::Failure { stage, radius, d_tried, width_found } => {
            return Err(Error::resource(format!(
                "no width-2 stabilizer decomposition found at stage {stage} (R = {radius}, \
                 D = {d_tried}, width {width_found}); this is a search failure, not impossibility"
            )));
        }
    };
    let mut map = BTreeMap::new();
    map.insert(d, (stab_chain, stab_members));
    let out = fiber_chain(action, &cx, s, &map)?;
    Ok((out, cx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups;

    fn lamplighter_action(n: u32) -> GroupAction {
        let g = groups::wreath(groups::cyclic(2).unwrap(), groups::free_abelian(1).unwrap());
        let source = Arc::new(groups::ball(&g, n, 2_000_000).unwrap());
        let target =
            Arc::new(groups::ball(&groups::free_abelian(1).unwrap(), n, 100_000).unwrap());
        GroupAction::new(source, target, ActionKind::HeadProjection).unwrap()
    }

    #[test]
    fn head_projection_is_one_lipschitz_and_transitive() {
        let action = lamplighter_action(4);
        assert_eq!(action.lipschitz_l().unwrap(), 1);
        let orbit = action.orbit_indices().unwrap();
        assert_eq!(orbit.len(), action.source.len());
        action.check_isometry_sampled(5).unwrap();
    }

    #[test]
    fn fiber_pipeline_on_lamplighter_covers_the_ball() {
        let action = lamplighter_action(4);
        let s = GrowthFunction::constant(2);
        let (out, cx) = fiber_pipeline(&action, &[2], &[2], &s).unwrap();
        assert_eq!(out.lipschitz_l, 1);
        assert_eq!(out.stab_bound_d, cx.terminal_mesh);
        assert!(out.chain.terminal_mesh <= out.stab_terminal_mesh);
        // The chain's first stage covers the whole ball (verified inside
        // fiber_chain; double-check the piece union here).
        let covered: BTreeSet<u32> = out.chain.stages[0]
            .pieces
            .iter()
            .flat_map(|p| p.members().iter().copied())
            .collect();
        assert_eq!(covered.len(), action.source.len());
    }

    #[test]
    fn self_action_stabilizers_are_balls() {
        let g = groups::free(2).unwrap();
        let ball = Arc::new(groups::ball(&g, 2, 100_000).unwrap());
        let action =
            GroupAction::new(Arc::clone(&ball), Arc::clone(&ball), ActionKind::SelfLeft).unwrap();
        // pi is the identity, so stab_R(e) is exactly B(e, R) within the
        // table.
        let (_, members) = action.stab_space(1).unwrap();
        let expected: usize = ball.sphere_sizes.iter().take(2).sum::<u64>() as usize;
        assert_eq!(members.len(), expected);
        // L = max |s| = 1 for generator moves.
        assert_eq!(action.lipschitz_l().unwrap(), 1);
    }
}
