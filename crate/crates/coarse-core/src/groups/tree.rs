//! Automorphisms of the rooted binary tree, truncated at a fixed depth.
//!
//! An automorphism of the depth-`k` binary tree is exactly a swap bit at
//! each of the `2^k - 1` internal nodes (heap order: node `i` has
//! children `2i+1`, `2i+2`). With the section convention
//! `g = (g_0, g_1) sigma^e`, the action on strings is
//! `g(x w) = sigma^e(x) . g_x(w)`.
//!
//! The Grigorchuk generators arise from the wreath recursion
//! `a = sigma`, `b = (a, c)`, `c = (a, d)`, `d = (1, b)`, filled down to
//! the truncation depth. Composition and inversion are exact on the
//! truncated group (a finite quotient); faithfulness on a given ball is
//! established empirically by the depth-stabilization check in the ball
//! builder, not assumed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// A depth-`k` tree automorphism: packed swap bits in heap order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeAut {
    pub depth: u8,
    pub bits: Vec<u64>,
}

fn word_count(depth: u8) -> usize {
    let nodes = (1usize << depth) - 1;
    nodes.div_ceil(64)
}

impl TreeAut {
    pub fn identity(depth: u8) -> Self {
        Self { depth, bits: vec![0; word_count(depth)] }
    }

    #[inline]
    fn get(&self, node: usize) -> bool {
        (self.bits[node / 64] >> (node % 64)) & 1 == 1
    }

    #[inline]
    fn set(&mut self, node: usize) {
        self.bits[node / 64] |= 1 << (node % 64);
    }

    pub fn is_identity(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    /// One of the Grigorchuk generators `a`, `b`, `c`, `d`.
    pub fn grigorchuk_generator(kind: char, depth: u8) -> Self {
        let mut out = Self::identity(depth);
        fill(&mut out, kind, 0, 0);
        out
    }

    /// Composition acting on the left: `(self . other)(u) = self(other(u))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.depth, other.depth, "tree automorphisms of mixed depth");
        let mut out = Self::identity(self.depth);
        compose_rec(self, other, &mut out, 0, 0, 0);
        out
    }

    pub fn inverse(&self) -> Self {
        let mut out = Self::identity(self.depth);
        invert_rec(self, &mut out, 0, 0, 0);
        out
    }

    pub fn hex(&self) -> String {
        let mut s = String::new();
        for w in &self.bits {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }

    pub fn from_hex(depth: u8, hex: &str) -> Option<Self> {
        let words = word_count(depth);
        if hex.len() != words * 16 {
            return None;
        }
        let mut bits = Vec::with_capacity(words);
        for i in 0..words {
            bits.push(u64::from_str_radix(&hex[i * 16..(i + 1) * 16], 16).ok()?);
        }
        Some(Self { depth, bits })
    }

    /// Apply to a leaf index seen as a binary string (msb = first letter).
    #[cfg(test)]
    pub fn apply_leaf(&self, leaf: u32) -> u32 {
        let k = self.depth as u32;
        let mut node = 0usize;
        let mut out = 0u32;
        for level in 0..k {
            let x = (leaf >> (k - 1 - level)) & 1;
            let y = if self.get(node) { 1 - x } else { x };
            out = (out << 1) | y;
            node = 2 * node + 1 + x as usize;
        }
        out
    }
}

/// Wreath recursion fill: `a` swaps at the node, `b = (a,c)`, `c = (a,d)`,
/// `d = (1,b)`; below the truncation depth everything is the identity.
fn fill(out: &mut TreeAut, kind: char, node: usize, level: u8) {
    if level >= out.depth {
        return;
    }
    let (left, right) = (2 * node + 1, 2 * node + 2);
    match kind {
        'e' => {}
        'a' => out.set(node),
        'b' => {
            fill(out, 'a', left, level + 1);
            fill(out, 'c', right, level + 1);
        }
        'c' => {
            fill(out, 'a', left, level + 1);
            fill(out, 'd', right, level + 1);
        }
        'd' => {
            fill(out, 'b', right, level + 1);
        }
        _ => panic!("unknown generator `{kind}`"),
    }
}

/// `(g . h)` has root bit `e_g xor e_h` and sections
/// `(g . h)_x = g_{sigma^{e_h}(x)} . h_x`; `g_node` tracks the diverging
/// position inside `g` while `pos` tracks the output (= `h`) position.
fn compose_rec(g: &TreeAut, h: &TreeAut, out: &mut TreeAut, g_node: usize, pos: usize, level: u8) {
    if level >= out.depth {
        return;
    }
    let hb = h.get(pos);
    if g.get(g_node) ^ hb {
        out.set(pos);
    }
    for x in 0..2usize {
        let gx = x ^ (hb as usize);
        compose_rec(g, h, out, 2 * g_node + 1 + gx, 2 * pos + 1 + x, level + 1);
    }
}

/// `(g^-1)_y = (g_{sigma^{e_g}(y)})^-1` with the same root bit.
fn invert_rec(g: &TreeAut, out: &mut TreeAut, g_node: usize, pos: usize, level: u8) {
    if level >= out.depth {
        return;
    }
    let gb = g.get(g_node);
    if gb {
        out.set(pos);
    }
    for y in 0..2usize {
        let gy = y ^ (gb as usize);
        invert_rec(g, out, 2 * g_node + 1 + gy, 2 * pos + 1 + y, level + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gens(depth: u8) -> (TreeAut, TreeAut, TreeAut, TreeAut) {
        (
            TreeAut::grigorchuk_generator('a', depth),
            TreeAut::grigorchuk_generator('b', depth),
            TreeAut::grigorchuk_generator('c', depth),
            TreeAut::grigorchuk_generator('d', depth),
        )
    }

    #[test]
    fn generators_are_involutions() {
        let (a, b, c, d) = gens(8);
        for g in [&a, &b, &c, &d] {
            assert!(g.compose(g).is_identity());
            assert_eq!(g.inverse(), g.clone());
        }
    }

    #[test]
    fn klein_four_relations() {
        let (_, b, c, d) = gens(8);
        assert_eq!(b.compose(&c), d);
        assert_eq!(c.compose(&b), d);
        assert_eq!(b.compose(&d), c);
        assert_eq!(c.compose(&d), b);
        assert_eq!(d.compose(&c), b);
        assert_eq!(d.compose(&b), c);
    }

    #[test]
    fn composition_matches_leaf_action() {
        // (g.h)(leaf) == g(h(leaf)) for all leaves, on several products.
        let (a, b, c, d) = gens(6);
        let products = [
            a.compose(&b),
            b.compose(&a),
            a.compose(&b).compose(&a),
            d.compose(&a).compose(&c),
        ];
        let factors: [(&TreeAut, &TreeAut); 4] = [(&a, &b), (&b, &a), (&a.compose(&b), &a), (&d.compose(&a), &c)];
        for (p, (g, h)) in products.iter().zip(factors.iter()) {
            for leaf in 0..(1u32 << 6) {
                assert_eq!(p.apply_leaf(leaf), g.apply_leaf(h.apply_leaf(leaf)));
            }
        }
    }

    #[test]
    fn inverse_matches_leaf_action() {
        let (a, b, _, d) = gens(6);
        let g = a.compose(&b).compose(&d).compose(&a);
        let gi = g.inverse();
        assert!(g.compose(&gi).is_identity());
        assert!(gi.compose(&g).is_identity());
        for leaf in 0..(1u32 << 6) {
            assert_eq!(gi.apply_leaf(g.apply_leaf(leaf)), leaf);
        }
    }

    #[test]
    fn hex_round_trip() {
        let (_, b, _, _) = gens(9);
        let h = b.hex();
        assert_eq!(TreeAut::from_hex(9, &h), Some(b));
    }
}
