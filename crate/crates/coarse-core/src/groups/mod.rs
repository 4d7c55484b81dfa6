//! Finitely generated group models with canonical element forms, and
//! exact word-metric ball enumeration.
//!
//! A [`Group`] is a closed recipe: free abelian `Z^d`, free groups,
//! finite cyclic groups, the Grigorchuk group (as truncated tree
//! automorphisms), and direct/wreath products of these. Elements are
//! stored in canonical form — reduced words, sorted finitely-supported
//! lamp maps, packed tree portraits — so structural equality *is* group
//! equality on the enumerated range, and `Ord` on [`Elem`] provides the
//! deterministic "lowest canonical key" order used everywhere.
//!
//! [`ball`] runs breadth-first search over the symmetric generating set
//! out to depth `2N`, recording each element's word length at first
//! discovery. Distances inside the radius-`N` ball are then exact:
//! `g, h in B(e,N)` gives `g^-1 h in B(e,2N)`, inside the table. Tree
//! groups are re-enumerated at truncation depth `+2` and the sphere
//! sizes compared, so a too-shallow canonical form fails loudly instead
//! of silently collapsing elements.

pub mod tree;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::space::FiniteMetricSpace;
pub use tree::TreeAut;

/// A group element in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elem {
    /// `Z^d` vector.
    Vector(Vec<i64>),
    /// Residue mod `m`, `0 <= v < m`.
    Cyclic(u64),
    /// Reduced word over letters `1..=k` and their negatives.
    Word(Vec<i32>),
    /// Truncated binary-tree automorphism.
    Tree(TreeAut),
    /// Direct-product pair.
    Pair(alloc::boxed::Box<Elem>, alloc::boxed::Box<Elem>),
    /// Wreath element `(f, h)`: finitely supported lamps over base
    /// positions, plus the head. Identity lamp values are never stored.
    Wreath { lamps: BTreeMap<Elem, Elem>, head: alloc::boxed::Box<Elem> },
}

impl core::fmt::Display for Elem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Elem::Vector(v) => {
                if v.len() == 1 {
                    write!(f, "{}", v[0])
                } else {
                    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
                    write!(f, "({})", parts.join(","))
                }
            }
            Elem::Cyclic(v) => write!(f, "{v}"),
            Elem::Word(w) => {
                if w.is_empty() {
                    return write!(f, "e");
                }
                for &l in w {
                    let idx = (l.unsigned_abs() - 1) as u8;
                    if idx < 26 {
                        let ch = (b'a' + idx) as char;
                        if l > 0 {
                            write!(f, "{ch}")?;
                        } else {
                            write!(f, "{}", ch.to_ascii_uppercase())?;
                        }
                    } else {
                        write!(f, "<{l}>")?;
                    }
                }
                Ok(())
            }
            Elem::Tree(t) => {
                if t.is_identity() {
                    write!(f, "e")
                } else {
                    write!(f, "t:{}", t.hex())
                }
            }
            Elem::Pair(a, b) => write!(f, "({a},{b})"),
            Elem::Wreath { lamps, head } => {
                write!(f, "{{")?;
                for (i, (k, v)) in lamps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{k}:{v}")?;
                }
                write!(f, "|{head}}}")
            }
        }
    }
}

/// A finitely generated group model with a fixed symmetric generating set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Group {
    FreeAbelian { rank: usize },
    Free { rank: usize },
    Cyclic { modulus: u64 },
    Grigorchuk { depth: u8 },
    Product(Arc<Group>, Arc<Group>),
    /// `lamp wr base`: finitely supported maps `base -> lamp`, base
    /// acting by translation, semidirect with the base.
    Wreath { lamp: Arc<Group>, base: Arc<Group> },
}

/// Default truncation depth for tree groups inside a radius-`n` ball
/// enumeration.
pub fn default_tree_depth(n: u32) -> u8 {
    let four_n = (4 * n.max(1)) as u64;
    let ceil_log2 = 64 - (four_n - 1).leading_zeros() as u64;
    (ceil_log2 + 6).max(12) as u8
}

pub fn free_abelian(rank: usize) -> Result<Group> {
    if rank == 0 {
        return Err(Error::domain("free abelian group needs rank >= 1"));
    }
    Ok(Group::FreeAbelian { rank })
}

pub fn free(rank: usize) -> Result<Group> {
    if rank == 0 {
        return Err(Error::domain("free group needs rank >= 1"));
    }
    Ok(Group::Free { rank })
}

pub fn cyclic(modulus: u64) -> Result<Group> {
    if modulus < 2 {
        return Err(Error::domain("cyclic group needs modulus >= 2"));
    }
    Ok(Group::Cyclic { modulus })
}

/// Grigorchuk's group at the default truncation depth; the ball builder
/// deepens the truncation automatically when a larger radius needs it.
pub fn grigorchuk() -> Group {
    Group::Grigorchuk { depth: 12 }
}

pub fn direct_product(a: Group, b: Group) -> Group {
    Group::Product(Arc::new(a), Arc::new(b))
}

pub fn wreath(lamp: Group, base: Group) -> Group {
    Group::Wreath { lamp: Arc::new(lamp), base: Arc::new(base) }
}

impl Group {
    /// Canonical descriptor, matching the CLI grammar.
    pub fn name(&self) -> String {
        match self {
            Group::FreeAbelian { rank } => format!("z^{rank}"),
            Group::Free { rank } => format!("free:{rank}"),
            Group::Cyclic { modulus } => format!("cyclic:{modulus}"),
            Group::Grigorchuk { .. } => "grigorchuk".into(),
            Group::Product(a, b) => format!("product({},{})", a.name(), b.name()),
            Group::Wreath { lamp, base } => format!("wreath({},{})", lamp.name(), base.name()),
        }
    }

    pub fn identity(&self) -> Elem {
        match self {
            Group::FreeAbelian { rank } => Elem::Vector(vec![0; *rank]),
            Group::Free { .. } => Elem::Word(Vec::new()),
            Group::Cyclic { .. } => Elem::Cyclic(0),
            Group::Grigorchuk { depth } => Elem::Tree(TreeAut::identity(*depth)),
            Group::Product(a, b) => {
                Elem::Pair(alloc::boxed::Box::new(a.identity()), alloc::boxed::Box::new(b.identity()))
            }
            Group::Wreath { base, .. } => Elem::Wreath {
                lamps: BTreeMap::new(),
                head: alloc::boxed::Box::new(base.identity()),
            },
        }
    }

    pub fn multiply(&self, x: &Elem, y: &Elem) -> Elem {
        match (self, x, y) {
            (Group::FreeAbelian { .. }, Elem::Vector(a), Elem::Vector(b)) => {
                Elem::Vector(a.iter().zip(b.iter()).map(|(p, q)| p + q).collect())
            }
            (Group::Cyclic { modulus }, Elem::Cyclic(a), Elem::Cyclic(b)) => {
                Elem::Cyclic((a + b) % modulus)
            }
            (Group::Free { .. }, Elem::Word(a), Elem::Word(b)) => {
                let mut out = a.clone();
                for &l in b {
                    if out.last() == Some(&-l) {
                        out.pop();
                    } else {
                        out.push(l);
                    }
                }
                Elem::Word(out)
            }
            (Group::Grigorchuk { .. }, Elem::Tree(a), Elem::Tree(b)) => Elem::Tree(a.compose(b)),
            (Group::Product(ga, gb), Elem::Pair(a1, b1), Elem::Pair(a2, b2)) => Elem::Pair(
                alloc::boxed::Box::new(ga.multiply(a1, a2)),
                alloc::boxed::Box::new(gb.multiply(b1, b2)),
            ),
            (
                Group::Wreath { lamp, base },
                Elem::Wreath { lamps: f1, head: h1 },
                Elem::Wreath { lamps: f2, head: h2 },
            ) => {
                // (f1, h1)(f2, h2) = (f1 . (h1 f2), h1 h2) where
                // (h1 f2)(x) = f2(h1^-1 x), i.e. lamp keys translate by h1.
                let mut lamps = f1.clone();
                for (k, v) in f2 {
                    let nk = base.multiply(h1, k);
                    let merged = match lamps.remove(&nk) {
                        Some(old) => lamp.multiply(&old, v),
                        None => v.clone(),
                    };
                    if merged != lamp.identity() {
                        lamps.insert(nk, merged);
                    }
                }
                Elem::Wreath { lamps, head: alloc::boxed::Box::new(base.multiply(h1, h2)) }
            }
            _ => panic!("element kind does not match group `{}`", self.name()),
        }
    }

    pub fn invert(&self, x: &Elem) -> Elem {
        match (self, x) {
            (Group::FreeAbelian { .. }, Elem::Vector(a)) => {
                Elem::Vector(a.iter().map(|p| -p).collect())
            }
            (Group::Cyclic { modulus }, Elem::Cyclic(a)) => {
                Elem::Cyclic(if *a == 0 { 0 } else { modulus - a })
            }
            (Group::Free { .. }, Elem::Word(a)) => {
                Elem::Word(a.iter().rev().map(|l| -l).collect())
            }
            (Group::Grigorchuk { .. }, Elem::Tree(a)) => Elem::Tree(a.inverse()),
            (Group::Product(ga, gb), Elem::Pair(a, b)) => Elem::Pair(
                alloc::boxed::Box::new(ga.invert(a)),
                alloc::boxed::Box::new(gb.invert(b)),
            ),
            (Group::Wreath { lamp, base }, Elem::Wreath { lamps, head }) => {
                // (f, h)^-1 = (y -> f(h y)^-1, h^-1): keys translate by
                // h^-1, values invert.
                let hinv = base.invert(head);
                let mut out = BTreeMap::new();
                for (k, v) in lamps {
                    out.insert(base.multiply(&hinv, k), lamp.invert(v));
                }
                Elem::Wreath { lamps: out, head: alloc::boxed::Box::new(hinv) }
            }
            _ => panic!("element kind does not match group `{}`", self.name()),
        }
    }

    /// The fixed symmetric generating set, in deterministic order.
    pub fn generators(&self) -> Vec<Elem> {
        match self {
            Group::FreeAbelian { rank } => {
                let mut out = Vec::with_capacity(2 * rank);
                for i in 0..*rank {
                    for sign in [1i64, -1] {
                        let mut v = vec![0i64; *rank];
                        v[i] = sign;
                        out.push(Elem::Vector(v));
                    }
                }
                out
            }
            Group::Free { rank } => {
                let mut out = Vec::with_capacity(2 * rank);
                for i in 1..=*rank as i32 {
                    out.push(Elem::Word(vec![i]));
                    out.push(Elem::Word(vec![-i]));
                }
                out
            }
            Group::Cyclic { modulus } => {
                if *modulus == 2 {
                    vec![Elem::Cyclic(1)]
                } else {
                    vec![Elem::Cyclic(1), Elem::Cyclic(modulus - 1)]
                }
            }
            Group::Grigorchuk { depth } => ['a', 'b', 'c', 'd']
                .map(|k| Elem::Tree(TreeAut::grigorchuk_generator(k, *depth)))
                .to_vec(),
            Group::Product(a, b) => {
                let (ia, ib) = (a.identity(), b.identity());
                let mut out = Vec::new();
                for g in a.generators() {
                    out.push(Elem::Pair(alloc::boxed::Box::new(g), alloc::boxed::Box::new(ib.clone())));
                }
                for h in b.generators() {
                    out.push(Elem::Pair(alloc::boxed::Box::new(ia.clone()), alloc::boxed::Box::new(h)));
                }
                out
            }
            Group::Wreath { lamp, base } => {
                // Lamp-at-origin generators, then base walk generators.
                let eb = base.identity();
                let mut out = Vec::new();
                for s in lamp.generators() {
                    let mut lamps = BTreeMap::new();
                    lamps.insert(eb.clone(), s);
                    out.push(Elem::Wreath { lamps, head: alloc::boxed::Box::new(eb.clone()) });
                }
                for t in base.generators() {
                    out.push(Elem::Wreath {
                        lamps: BTreeMap::new(),
                        head: alloc::boxed::Box::new(t),
                    });
                }
                out
            }
        }
    }

    /// True iff some factor is a truncated tree group.
    pub fn contains_tree(&self) -> bool {
        match self {
            Group::Grigorchuk { .. } => true,
            Group::Product(a, b) => a.contains_tree() || b.contains_tree(),
            Group::Wreath { lamp, base } => lamp.contains_tree() || base.contains_tree(),
            _ => false,
        }
    }

    /// Maximum tree truncation depth appearing in the recipe.
    pub fn tree_depth(&self) -> Option<u8> {
        match self {
            Group::Grigorchuk { depth } => Some(*depth),
            Group::Product(a, b) => a.tree_depth().max(b.tree_depth()),
            Group::Wreath { lamp, base } => lamp.tree_depth().max(base.tree_depth()),
            _ => None,
        }
    }

    /// Same recipe with every tree truncation depth raised to at least
    /// `depth`.
    pub fn with_tree_depth(&self, depth: u8) -> Group {
        match self {
            Group::Grigorchuk { depth: d } => Group::Grigorchuk { depth: (*d).max(depth) },
            Group::Product(a, b) => Group::Product(
                Arc::new(a.with_tree_depth(depth)),
                Arc::new(b.with_tree_depth(depth)),
            ),
            Group::Wreath { lamp, base } => Group::Wreath {
                lamp: Arc::new(lamp.with_tree_depth(depth)),
                base: Arc::new(base.with_tree_depth(depth)),
            },
            other => other.clone(),
        }
    }

    /// Lattice coordinates of an element, when the whole recipe is made
    /// of free abelian factors (then word length = `l1` norm exactly).
    pub fn lattice_coords(&self, e: &Elem) -> Option<Vec<i64>> {
        match (self, e) {
            (Group::FreeAbelian { .. }, Elem::Vector(v)) => Some(v.clone()),
            (Group::Product(ga, gb), Elem::Pair(a, b)) => {
                let mut out = ga.lattice_coords(a)?;
                out.extend(gb.lattice_coords(b)?);
                Some(out)
            }
            _ => None,
        }
    }
}

/// An enumerated ball `B(e, N)` with a word-length table complete on
/// `B(e, 2N)`.
#[derive(Debug, Clone)]
pub struct GroupBall {
    pub group: Arc<Group>,
    pub radius: u32,
    pub table_radius: u32,
    /// Elements of `B(e, N)` sorted by (word length, canonical key).
    pub elems: Arc<Vec<Elem>>,
    /// Exact word lengths, complete on `B(e, 2N)`.
    pub lengths: Arc<BTreeMap<Elem, u32>>,
    /// `sphere_sizes[r] = |{ g : |g| = r }|` for `r <= 2N`.
    pub sphere_sizes: Vec<u64>,
    index: BTreeMap<Elem, u32>,
}

impl GroupBall {
    /// Number of points in `B(e, N)`.
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Index of an element of `B(e, N)` in ball order.
    pub fn index_of(&self, e: &Elem) -> Option<u32> {
        self.index.get(e).copied()
    }

    pub fn word_length(&self, e: &Elem) -> Option<u32> {
        self.lengths.get(e).copied()
    }

    /// `|B(e, r)|` for `r <= 2N`.
    pub fn ball_size(&self, r: u32) -> u64 {
        self.sphere_sizes.iter().take(r as usize + 1).sum()
    }

    /// The metric space on `B(e, N)`: exact word distances (the table
    /// reaches `2N` and `g^-1 h` stays inside it).
    pub fn space(&self) -> FiniteMetricSpace {
        let name = format!("ball({},{})", self.group.name(), self.radius);
        if let Some(coords) =
            self.elems.iter().map(|e| self.group.lattice_coords(e)).collect::<Option<Vec<_>>>()
        {
            return FiniteMetricSpace::from_lattice(coords, name).expect("ball points are distinct");
        }
        FiniteMetricSpace::from_words(
            Arc::clone(&self.group),
            Arc::clone(&self.elems),
            Arc::clone(&self.lengths),
            self.table_radius + 1,
            name,
        )
    }

    /// A subspace over arbitrary table elements. The metric is the word
    /// metric truncated at `2N + 1`: exact for all values `<= 2N`, and
    /// `min(d, 2N+1)` beyond (still a metric). Members must belong to
    /// the enumerated `B(e, 2N)`.
    pub fn subspace(&self, members: Vec<Elem>, name: impl Into<String>) -> Result<FiniteMetricSpace> {
        if members.is_empty() {
            return Err(Error::structural("subspace needs at least one element"));
        }
        for m in &members {
            if !self.lengths.contains_key(m) {
                return Err(Error::structural(format!(
                    "element {m} is outside the enumerated B(e,{})",
                    self.table_radius
                )));
            }
        }
        Ok(FiniteMetricSpace::from_words(
            Arc::clone(&self.group),
            Arc::new(members),
            Arc::clone(&self.lengths),
            self.table_radius + 1,
            name,
        ))
    }

    /// Table elements sorted by (word length, canonical key).
    pub fn sorted_table_elems(&self) -> Vec<(Elem, u32)> {
        let mut v: Vec<(Elem, u32)> = self.lengths.iter().map(|(e, l)| (e.clone(), *l)).collect();
        v.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
        v
    }

    /// Rebuild from cached parts, re-verifying the sphere-size table.
    pub fn from_parts(
        group: Arc<Group>,
        radius: u32,
        table_radius: u32,
        entries: Vec<(Elem, u32)>,
        claimed_spheres: Vec<u64>,
    ) -> Result<Self> {
        if table_radius < 2 * radius {
            return Err(Error::structural("table radius must be at least 2N"));
        }
        let mut lengths = BTreeMap::new();
        let mut spheres = vec![0u64; table_radius as usize + 1];
        for (e, l) in entries {
            if l > table_radius {
                return Err(Error::integrity("cached length exceeds table radius"));
            }
            spheres[l as usize] += 1;
            if lengths.insert(e, l).is_some() {
                return Err(Error::integrity("cached ball has duplicate elements"));
            }
        }
        if spheres != claimed_spheres {
            return Err(Error::integrity(format!(
                "cached sphere sizes {claimed_spheres:?} disagree with recount {spheres:?}"
            )));
        }
        if lengths.get(&group.identity()) != Some(&0) {
            return Err(Error::integrity("cached ball lacks the identity at length 0"));
        }
        let mut ball_elems: Vec<(u32, Elem)> = lengths
            .iter()
            .filter(|(_, l)| **l <= radius)
            .map(|(e, l)| (*l, e.clone()))
            .collect();
        ball_elems.sort();
        let elems: Vec<Elem> = ball_elems.into_iter().map(|(_, e)| e).collect();
        let index = elems.iter().enumerate().map(|(i, e)| (e.clone(), i as u32)).collect();
        Ok(Self {
            group,
            radius,
            table_radius,
            elems: Arc::new(elems),
            lengths: Arc::new(lengths),
            sphere_sizes: spheres,
            index,
        })
    }
}

/// Enumerate `B(e, N)` with a length table on `B(e, 2N)` by BFS over the
/// generating set. `budget` bounds the number of enumerated elements
/// (the table, not just the ball). For tree groups the enumeration is
/// repeated at truncation depth `+2` and the sphere sizes must agree.
pub fn ball(group: &Group, n: u32, budget: usize) -> Result<GroupBall> {
    let working = if group.contains_tree() {
        let needed = default_tree_depth(n);
        let g = group.with_tree_depth(needed);
        let spheres = bfs_spheres(&g, 2 * n, budget)?;
        let deeper = g.with_tree_depth(needed + 2);
        let spheres_deeper = bfs_spheres(&deeper, 2 * n, budget)?;
        if spheres != spheres_deeper {
            return Err(Error::integrity(format!(
                "tree truncation depth {needed} is too shallow: sphere sizes change at depth {}; \
                 use a deeper canonical form",
                needed + 2
            )));
        }
        g
    } else {
        group.clone()
    };
    let (lengths, sphere_sizes) = bfs(&working, 2 * n, budget)?;
    let mut ball_elems: Vec<(u32, Elem)> =
        lengths.iter().filter(|(_, l)| **l <= n).map(|(e, l)| (*l, e.clone())).collect();
    ball_elems.sort();
    let elems: Vec<Elem> = ball_elems.into_iter().map(|(_, e)| e).collect();
    let index = elems.iter().enumerate().map(|(i, e)| (e.clone(), i as u32)).collect();
    Ok(GroupBall {
        group: Arc::new(working),
        radius: n,
        table_radius: 2 * n,
        elems: Arc::new(elems),
        lengths: Arc::new(lengths),
        sphere_sizes,
        index,
    })
}

fn bfs(group: &Group, depth: u32, budget: usize) -> Result<(BTreeMap<Elem, u32>, Vec<u64>)> {
    let gens = group.generators();
    let mut lengths = BTreeMap::new();
    let mut spheres = vec![0u64; depth as usize + 1];
    let identity = group.identity();
    lengths.insert(identity.clone(), 0);
    spheres[0] = 1;
    let mut frontier = vec![identity];
    for level in 1..=depth {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &gens {
                let p = group.multiply(g, s);
                if !lengths.contains_key(&p) {
                    if lengths.len() >= budget {
                        return Err(Error::resource(format!(
                            "ball enumeration for `{}` exceeded the element budget of {budget} \
                             at depth {level} of {depth}",
                            group.name()
                        )));
                    }
                    lengths.insert(p.clone(), level);
                    spheres[level as usize] += 1;
                    next.push(p);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok((lengths, spheres))
}

fn bfs_spheres(group: &Group, depth: u32, budget: usize) -> Result<Vec<u64>> {
    bfs(group, depth, budget).map(|(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_ball_sizes_and_distances() {
        let g = free_abelian(1).unwrap();
        let b = ball(&g, 3, 10_000).unwrap();
        assert_eq!(b.len(), 7);
        let space = b.space();
        // dist(i, j) = |i - j| on the integer labels.
        for i in 0..7u32 {
            for j in 0..7u32 {
                let (Elem::Vector(a), Elem::Vector(c)) = (&b.elems[i as usize], &b.elems[j as usize])
                else {
                    unreachable!()
                };
                assert_eq!(space.dist(i, j) as i64, (a[0] - c[0]).abs());
            }
        }
    }

    #[test]
    fn free_two_ball_of_radius_two_has_17_points() {
        // Independent count: reduced words of length <= 2 over 4 letters.
        let mut count = 1; // empty word
        let letters: Vec<i32> = vec![1, -1, 2, -2];
        count += letters.len();
        for &a in &letters {
            for &b in &letters {
                if b != -a {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 17);

        let g = free(2).unwrap();
        let b = ball(&g, 2, 10_000).unwrap();
        assert_eq!(b.len(), 17);
        assert_eq!(b.ball_size(1), 5);
    }

    #[test]
    fn grigorchuk_relations_and_small_balls() {
        let g = grigorchuk();
        let gens = g.generators();
        for x in &gens {
            assert_eq!(g.multiply(x, x), g.identity());
            assert!(gens.contains(&g.invert(x)));
        }
        let (b, c, d) = (&gens[1], &gens[2], &gens[3]);
        assert_eq!(g.multiply(b, c), *d);

        let ball1 = ball(&g, 1, 100_000).unwrap();
        assert_eq!(ball1.len(), 5);
        let ball2 = ball(&g, 2, 100_000).unwrap();
        assert_eq!(ball2.len(), 11);
    }

    #[test]
    fn wreath_translation_moves_support() {
        // In Z2 wr Z, multiplying the walk "1" by a lamp at the origin
        // puts the lamp at position 1.
        let g = wreath(cyclic(2).unwrap(), free_abelian(1).unwrap());
        let walk = Elem::Wreath {
            lamps: BTreeMap::new(),
            head: alloc::boxed::Box::new(Elem::Vector(vec![1])),
        };
        let mut lamps = BTreeMap::new();
        lamps.insert(Elem::Vector(vec![0]), Elem::Cyclic(1));
        let lamp_origin =
            Elem::Wreath { lamps, head: alloc::boxed::Box::new(Elem::Vector(vec![0])) };
        let moved = g.multiply(&walk, &lamp_origin);
        match &moved {
            Elem::Wreath { lamps, head } => {
                assert_eq!(lamps.len(), 1);
                assert!(lamps.contains_key(&Elem::Vector(vec![1])));
                assert_eq!(**head, Elem::Vector(vec![1]));
            }
            _ => panic!("expected wreath element"),
        }
    }

    #[test]
    fn wreath_group_axioms_on_sampled_elements() {
        let g = wreath(free_abelian(1).unwrap(), free(2).unwrap());
        let b = ball(&g, 2, 100_000).unwrap();
        let sample: Vec<&Elem> = b.elems.iter().step_by(3).collect();
        for x in &sample {
            let inv = g.invert(x);
            assert_eq!(g.multiply(x, &inv), g.identity());
            assert_eq!(g.multiply(&inv, x), g.identity());
        }
        for x in sample.iter().take(6) {
            for y in sample.iter().take(6) {
                for z in sample.iter().take(6) {
                    let xy_z = g.multiply(&g.multiply(x, y), z);
                    let x_yz = g.multiply(x, &g.multiply(y, z));
                    assert_eq!(xy_z, x_yz);
                }
            }
        }
    }

    #[test]
    fn product_ball_matches_free_abelian_two() {
        let z2 = free_abelian(2).unwrap();
        let b1 = ball(&z2, 1, 10_000).unwrap();
        assert_eq!(b1.len(), 5);
        let prod = direct_product(free_abelian(1).unwrap(), free_abelian(1).unwrap());
        for n in 0..=3 {
            let a = ball(&z2, n, 10_000).unwrap();
            let b = ball(&prod, n, 10_000).unwrap();
            assert_eq!(a.len(), b.len(), "radius {n}");
        }
    }

    #[test]
    fn cyclic_arithmetic() {
        let g = cyclic(2).unwrap();
        assert_eq!(g.multiply(&Elem::Cyclic(1), &Elem::Cyclic(1)), Elem::Cyclic(0));
        assert_eq!(g.generators().len(), 1);
        let b = ball(&g, 1, 100).unwrap();
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn ball_monotonicity_and_budget() {
        let g = free(2).unwrap();
        let b2 = ball(&g, 2, 100_000).unwrap();
        let b3 = ball(&g, 3, 100_000).unwrap();
        for e in b2.elems.iter() {
            assert!(b3.index_of(e).is_some());
        }
        assert!(matches!(ball(&g, 5, 10), Err(Error::Resource(_))));
    }

    #[test]
    fn left_invariance_within_table() {
        let g = free(2).unwrap();
        let b = ball(&g, 2, 100_000).unwrap();
        let space = b.space();
        // d(xg, xh) = d(g, h) whenever all products stay in the table.
        for x in b.elems.iter().step_by(2) {
            for (i, gi) in b.elems.iter().enumerate().step_by(3) {
                for (j, hj) in b.elems.iter().enumerate().step_by(3) {
                    let xg = g.multiply(x, gi);
                    let xh = g.multiply(x, hj);
                    let d1 = space.dist(i as u32, j as u32);
                    let diff = g.multiply(&g.invert(&xg), &xh);
                    if let Some(d2) = b.word_length(&diff) {
                        assert_eq!(d1, d2);
                    }
                }
            }
        }
    }

    #[test]
    fn subspace_truncates_beyond_table() {
        let g = free_abelian(1).unwrap();
        let b = ball(&g, 2, 1000).unwrap();
        // Members at +-4 are distance 8 > 2N = 4 apart: reported as 2N+1.
        let sub = b
            .subspace(vec![Elem::Vector(vec![-4]), Elem::Vector(vec![4])], "sub")
            .unwrap();
        assert_eq!(sub.dist(0, 1), 5);
        assert!(b.subspace(vec![Elem::Vector(vec![9])], "out").is_err());
    }
}
