//! Finite posets, their down-set lattices and convex subsets.
//!
//! Elements are kept in input order; that order is the canonical one used
//! for bitset layouts and for every block-matrix layout downstream. Subsets
//! are `u64` bitmasks, which caps posets at 64 elements; the down-set
//! enumeration bound is far tighter in practice since `|O(P)|` can grow as
//! `2^|P|`.

use crate::error::{Error, Result};
use std::fmt;

pub const MAX_ELEMENTS: usize = 64;

/// Default cap on `|P|` for operations that enumerate down-sets.
pub const DEFAULT_ENUMERATION_BOUND: usize = 20;

/// Subset of poset elements as a bitmask over element indices.
pub type ElemMask = u64;

/// A down-closed subset (membership is validated on construction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DownSet(pub ElemMask);

/// A convex subset: closed under taking intermediate elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConvexSet(pub ElemMask);

/// How an ordered pair of convex sets sits inside the poset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexRelation {
    /// Some nested triple of down-sets realizes (xi, eta) as adjacent
    /// difference sets.
    Adjacent,
    /// No element of one is related to any element of the other; both
    /// orders are then adjacent and the union is convex.
    Incomparable,
    Neither,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Poset {
    labels: Vec<String>,
    /// leq[p] = bitmask of q with p <= q (reflexive-transitive closure).
    up: Vec<ElemMask>,
    /// down[p] = bitmask of q with q <= p.
    down: Vec<ElemMask>,
    /// The relation pairs as given, for canonical serialization.
    given_relations: Vec<(usize, usize)>,
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poset[{}]", self.labels.join(","))
    }
}

impl Poset {
    /// Build from labels and arbitrary relation pairs `(p, q)` meaning
    /// `p <= q`. The reflexive-transitive closure is computed here; cycles
    /// through distinct elements violate antisymmetry.
    pub fn new(labels: Vec<String>, relations: &[(usize, usize)]) -> Result<Poset> {
        let n = labels.len();
        if n > MAX_ELEMENTS {
            return Err(Error::BoundExceeded(format!(
                "{n} elements exceeds the {MAX_ELEMENTS}-element representation limit"
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut up: Vec<ElemMask> = (0..n).map(|p| 1 << p).collect();
        for &(p, q) in relations {
            if p >= n || q >= n {
                return Err(Error::invalid("relation index out of range".to_string()));
            }
            up[p] |= 1 << q;
        }
        // Warshall closure on the "up" masks.
        for mid in 0..n {
            for p in 0..n {
                if up[p] >> mid & 1 == 1 {
                    up[p] |= up[mid];
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                if p != q && up[p] >> q & 1 == 1 && up[q] >> p & 1 == 1 {
                    return Err(Error::NotAntisymmetric(labels[p].clone(), labels[q].clone()));
                }
            }
        }
        let mut down = vec![0u64; n];
        for p in 0..n {
            for q in 0..n {
                if up[q] >> p & 1 == 1 {
                    down[p] |= 1 << q;
                }
            }
        }
        Ok(Poset { labels, up, down, given_relations: relations.to_vec() })
    }

    pub fn from_labels(labels: &[&str], relations: &[(&str, &str)]) -> Result<Poset> {
        let owned: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let mut pairs = Vec::new();
        for (a, b) in relations {
            let find = |x: &str| {
                owned
                    .iter()
                    .position(|l| l == x)
                    .ok_or_else(|| Error::UnknownLabel(x.to_string()))
            };
            pairs.push((find(a)?, find(b)?));
        }
        Poset::new(owned, &pairs)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn given_relations(&self) -> &[(usize, usize)] {
        &self.given_relations
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn leq(&self, p: usize, q: usize) -> bool {
        self.up[p] >> q & 1 == 1
    }

    pub fn lt(&self, p: usize, q: usize) -> bool {
        p != q && self.leq(p, q)
    }

    pub fn full_mask(&self) -> ElemMask {
        if self.len() == 64 { !0 } else { (1u64 << self.len()) - 1 }
    }

    /// Principal down-set of p.
    pub fn down_mask(&self, p: usize) -> ElemMask {
        self.down[p]
    }

    /// Downward closure of an arbitrary subset.
    pub fn close_down(&self, mask: ElemMask) -> ElemMask {
        let mut out = 0;
        for p in self.iter_mask(mask) {
            out |= self.down[p];
        }
        out
    }

    pub fn iter_mask(&self, mask: ElemMask) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |p| mask >> p & 1 == 1)
    }

    pub fn is_down_set(&self, mask: ElemMask) -> bool {
        self.iter_mask(mask).all(|p| self.down[p] & !mask == 0)
    }

    pub fn down_set(&self, mask: ElemMask) -> Result<DownSet> {
        if self.is_down_set(mask) {
            Ok(DownSet(mask))
        } else {
            Err(Error::NotDownClosed(self.format_mask(mask)))
        }
    }

    pub fn is_convex(&self, mask: ElemMask) -> bool {
        for p in self.iter_mask(mask) {
            for r in self.iter_mask(mask) {
                if !self.leq(p, r) {
                    continue;
                }
                // every q with p <= q <= r must be inside
                let between = self.up[p] & self.down[r];
                if between & !mask != 0 {
                    return false;
                }
            }
        }
        true
    }

    pub fn convex_set(&self, mask: ElemMask) -> Result<ConvexSet> {
        if self.is_convex(mask) {
            Ok(ConvexSet(mask))
        } else {
            Err(Error::NotConvex(self.format_mask(mask)))
        }
    }

    /// Maximal elements of a subset.
    pub fn maximal_in(&self, mask: ElemMask) -> Vec<usize> {
        self.iter_mask(mask)
            .filter(|&p| self.up[p] & mask == 1 << p)
            .collect()
    }

    /// Minimal elements of a subset.
    pub fn minimal_in(&self, mask: ElemMask) -> Vec<usize> {
        self.iter_mask(mask)
            .filter(|&p| self.down[p] & mask == 1 << p)
            .collect()
    }

    /// Length of the longest chain strictly below p.
    pub fn depth(&self, p: usize) -> usize {
        let mut memo = vec![None; self.len()];
        self.depth_memo(p, &mut memo)
    }

    fn depth_memo(&self, p: usize, memo: &mut Vec<Option<usize>>) -> usize {
        if let Some(d) = memo[p] {
            return d;
        }
        let d = self
            .iter_mask(self.down[p] & !(1 << p))
            .map(|q| self.depth_memo(q, memo) + 1)
            .max()
            .unwrap_or(0);
        memo[p] = Some(d);
        d
    }

    /// A linear extension ordered by (depth, input index). Strictly smaller
    /// elements always appear earlier.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        let mut memo = vec![None; self.len()];
        let depths: Vec<usize> = (0..self.len()).map(|p| self.depth_memo(p, &mut memo)).collect();
        order.sort_by_key(|&p| (depths[p], p));
        order
    }

    /// All down-sets, sorted by (cardinality, lexicographic membership over
    /// the canonical element order, earlier-present first). Includes the
    /// empty set and all of P.
    pub fn down_sets(&self, bound: usize) -> Result<Vec<DownSet>> {
        if self.len() > bound {
            return Err(Error::BoundExceeded(format!(
                "poset has {} elements, enumeration bound is {bound}",
                self.len()
            )));
        }
        let mut out = Vec::new();
        let full = self.full_mask();
        let mut mask: ElemMask = 0;
        loop {
            if self.is_down_set(mask) {
                out.push(DownSet(mask));
            }
            if mask == full {
                break;
            }
            mask += 1;
        }
        out.sort_by(|a, b| self.mask_order(a.0, b.0));
        Ok(out)
    }

    /// All convex subsets (including the empty set), sorted like
    /// [`down_sets`](Self::down_sets).
    pub fn convex_sets(&self, bound: usize) -> Result<Vec<ConvexSet>> {
        if self.len() > bound {
            return Err(Error::BoundExceeded(format!(
                "poset has {} elements, enumeration bound is {bound}",
                self.len()
            )));
        }
        let mut out = Vec::new();
        let full = self.full_mask();
        let mut mask: ElemMask = 0;
        loop {
            if self.is_convex(mask) {
                out.push(ConvexSet(mask));
            }
            if mask == full {
                break;
            }
            mask += 1;
        }
        out.sort_by(|a, b| self.mask_order(a.0, b.0));
        Ok(out)
    }

    /// (cardinality, lexicographic membership) comparison of two masks.
    pub fn mask_order(&self, a: ElemMask, b: ElemMask) -> std::cmp::Ordering {
        let ca = a.count_ones();
        let cb = b.count_ones();
        ca.cmp(&cb).then_with(|| {
            for p in 0..self.len() {
                let x = a >> p & 1;
                let y = b >> p & 1;
                if x != y {
                    // the set containing the earlier element sorts first
                    return y.cmp(&x);
                }
            }
            std::cmp::Ordering::Equal
        })
    }

    /// Unique irredundant decomposition of a down-set as a union of
    /// principal down-sets: one per maximal element.
    pub fn join_irreducible_decomposition(&self, alpha: DownSet) -> Vec<DownSet> {
        let mut parts: Vec<DownSet> =
            self.maximal_in(alpha.0).into_iter().map(|p| DownSet(self.down[p])).collect();
        parts.sort_by(|a, b| self.mask_order(a.0, b.0));
        parts
    }

    /// For a join-irreducible down-set `↓q`, the unique immediate
    /// predecessor `↓q \ {q}` in the down-set lattice.
    pub fn immediate_predecessor(&self, beta: DownSet) -> Result<DownSet> {
        let maximal = self.maximal_in(beta.0);
        if maximal.len() != 1 {
            return Err(Error::NotJoinIrreducible(format!(
                "{} has {} maximal elements",
                self.format_mask(beta.0),
                maximal.len()
            )));
        }
        Ok(DownSet(beta.0 & !(1 << maximal[0])))
    }

    /// Classify an ordered pair of convex sets. `Adjacent` means some
    /// nested triple (alpha, beta, gamma) of down-sets has
    /// `beta \ alpha = xi` and `gamma \ beta = eta`.
    pub fn convex_relation(&self, xi: ElemMask, eta: ElemMask) -> Result<ConvexRelation> {
        self.convex_set(xi)?;
        self.convex_set(eta)?;
        if xi & eta != 0 {
            return Ok(ConvexRelation::Neither);
        }
        let mut related = false;
        let mut eta_below_xi = false;
        for p in self.iter_mask(eta) {
            for q in self.iter_mask(xi) {
                if self.lt(p, q) {
                    eta_below_xi = true;
                }
                if self.lt(p, q) || self.lt(q, p) {
                    related = true;
                }
            }
        }
        if !related {
            return Ok(ConvexRelation::Incomparable);
        }
        if !eta_below_xi && self.is_convex(xi | eta) {
            Ok(ConvexRelation::Adjacent)
        } else {
            Ok(ConvexRelation::Neither)
        }
    }

    /// Canonical witness triple for an adjacent pair: down-sets
    /// alpha ⊆ beta ⊆ gamma with beta\alpha = xi, gamma\beta = eta.
    pub fn adjacent_witness(&self, xi: ElemMask, eta: ElemMask) -> Option<(DownSet, DownSet, DownSet)> {
        let beta = self.close_down(xi | eta) & !eta;
        let alpha = beta & !xi;
        let gamma = beta | eta;
        if self.is_down_set(alpha)
            && self.is_down_set(beta)
            && self.is_down_set(gamma)
            && beta & !alpha == xi
            && gamma & !beta == eta
        {
            Some((DownSet(alpha), DownSet(beta), DownSet(gamma)))
        } else {
            None
        }
    }

    pub fn format_mask(&self, mask: ElemMask) -> String {
        let names: Vec<&str> =
            self.iter_mask(mask).map(|p| self.labels[p].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn parse_mask(&self, csv: &str) -> Result<ElemMask> {
        let trimmed = csv.trim();
        if trimmed.is_empty() {
            return Ok(0);
        }
        let mut mask = 0;
        for part in trimmed.split(',') {
            mask |= 1 << self.index_of(part.trim())?;
        }
        Ok(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> Poset {
        Poset::from_labels(&["p", "q", "r"], &[("p", "q"), ("q", "r")]).unwrap()
    }

    fn vee() -> Poset {
        // a < c, b < c
        Poset::from_labels(&["a", "b", "c"], &[("a", "c"), ("b", "c")]).unwrap()
    }

    #[test]
    fn closure_is_transitive() {
        let p = chain3();
        assert!(p.leq(0, 2));
        assert!(!p.leq(2, 0));
    }

    #[test]
    fn antisymmetry_violation_detected() {
        let err = Poset::from_labels(&["a", "b"], &[("a", "b"), ("b", "a")]).unwrap_err();
        assert!(matches!(err, Error::NotAntisymmetric(_, _)));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let err = Poset::from_labels(&["a", "a"], &[]).unwrap_err();
        assert!(matches!(err, Error::DuplicateLabel(_)));
    }

    #[test]
    fn down_sets_of_antichain() {
        let p = Poset::from_labels(&["p", "q"], &[]).unwrap();
        let ds: Vec<ElemMask> = p.down_sets(20).unwrap().iter().map(|d| d.0).collect();
        assert_eq!(ds, vec![0b00, 0b01, 0b10, 0b11]);
    }

    #[test]
    fn down_sets_of_vee_sorted() {
        let p = vee();
        let ds: Vec<ElemMask> = p.down_sets(20).unwrap().iter().map(|d| d.0).collect();
        // {}, {a}, {b}, {a,b}, {a,b,c}
        assert_eq!(ds, vec![0b000, 0b001, 0b010, 0b011, 0b111]);
    }

    #[test]
    fn down_sets_bound() {
        let labels: Vec<String> = (0..21).map(|i| format!("x{i}")).collect();
        let p = Poset::new(labels, &[]).unwrap();
        assert!(matches!(p.down_sets(20), Err(Error::BoundExceeded(_))));
    }

    #[test]
    fn join_irreducible_decomposition_examples() {
        let p = vee();
        // {a,b} decomposes as down(a) ∪ down(b)
        let parts = p.join_irreducible_decomposition(DownSet(0b011));
        assert_eq!(parts, vec![DownSet(0b001), DownSet(0b010)]);
        // the full set is principal: down(c)
        let parts = p.join_irreducible_decomposition(DownSet(0b111));
        assert_eq!(parts, vec![DownSet(0b111)]);
        assert!(p.join_irreducible_decomposition(DownSet(0)).is_empty());
    }

    #[test]
    fn immediate_predecessor_examples() {
        let p = chain3();
        assert_eq!(p.immediate_predecessor(DownSet(0b111)).unwrap(), DownSet(0b011));
        assert_eq!(p.immediate_predecessor(DownSet(0b001)).unwrap(), DownSet(0));
        // {a,b} in the vee has two maximal elements
        let v = vee();
        assert!(matches!(
            v.immediate_predecessor(DownSet(0b011)),
            Err(Error::NotJoinIrreducible(_))
        ));
        assert!(matches!(
            v.immediate_predecessor(DownSet(0)),
            Err(Error::NotJoinIrreducible(_))
        ));
    }

    #[test]
    fn convex_relation_examples() {
        let p = chain3();
        // 2-chain inside: ({p}, {q}) adjacent
        assert_eq!(p.convex_relation(0b001, 0b010).unwrap(), ConvexRelation::Adjacent);
        // ({r}, {p}): p < r prevents any nested realization
        assert_eq!(p.convex_relation(0b100, 0b001).unwrap(), ConvexRelation::Neither);
        // ({p}, {r}) is adjacent even though q sits between: union {p,r} not convex
        assert_eq!(p.convex_relation(0b001, 0b100).unwrap(), ConvexRelation::Neither);
        let v = vee();
        assert_eq!(v.convex_relation(0b001, 0b010).unwrap(), ConvexRelation::Incomparable);
        // non-convex input: {p, r} in the 3-chain
        assert!(matches!(p.convex_relation(0b101, 0b010), Err(Error::NotConvex(_))));
    }

    #[test]
    fn adjacency_matches_exhaustive_triples() {
        // oracle: enumerate all nested down-set triples and collect the
        // realized adjacent pairs
        for poset in [chain3(), vee(), Poset::from_labels(&["a", "b", "c"], &[("a", "b")]).unwrap()]
        {
            let downs = poset.down_sets(20).unwrap();
            let mut realized = std::collections::HashSet::new();
            for a in &downs {
                for b in &downs {
                    if a.0 & !b.0 != 0 {
                        continue;
                    }
                    for c in &downs {
                        if b.0 & !c.0 != 0 {
                            continue;
                        }
                        realized.insert((b.0 & !a.0, c.0 & !b.0));
                    }
                }
            }
            let full = poset.full_mask();
            for xi in 0..=full {
                for eta in 0..=full {
                    if !poset.is_convex(xi) || !poset.is_convex(eta) {
                        continue;
                    }
                    let rel = poset.convex_relation(xi, eta).unwrap();
                    let adjacent = realized.contains(&(xi, eta));
                    match rel {
                        ConvexRelation::Adjacent => assert!(adjacent),
                        ConvexRelation::Incomparable => {
                            assert!(adjacent && realized.contains(&(eta, xi)));
                            assert!(poset.is_convex(xi | eta));
                        }
                        ConvexRelation::Neither => assert!(!adjacent || xi & eta != 0),
                    }
                    if adjacent && xi & eta == 0 {
                        assert_ne!(rel, ConvexRelation::Neither, "missed adjacency");
                        let (a, b, c) = poset.adjacent_witness(xi, eta).unwrap();
                        assert_eq!(b.0 & !a.0, xi);
                        assert_eq!(c.0 & !b.0, eta);
                    }
                }
            }
        }
    }

    #[test]
    fn linear_extension_respects_order() {
        let p = chain3();
        assert_eq!(p.linear_extension(), vec![0, 1, 2]);
        let v = vee();
        assert_eq!(v.linear_extension(), vec![0, 1, 2]);
    }

    #[test]
    fn mask_parse_format_roundtrip() {
        let p = chain3();
        let m = p.parse_mask("p,r").unwrap();
        assert_eq!(m, 0b101);
        assert_eq!(p.format_mask(m), "{p,r}");
        assert_eq!(p.parse_mask("").unwrap(), 0);
        assert!(p.parse_mask("z").is_err());
    }
}
