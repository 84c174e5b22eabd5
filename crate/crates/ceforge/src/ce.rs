//! The homology system of a graded differential group over the down-set
//! lattice of its grading poset.
//!
//! For nested down-sets `a ⊆ b` the term `E(a, b)` is the homology of the
//! subquotient `F_b / F_a`; it depends only on the convex difference
//! `b \ a`, and terms are memoized by that mask. Nested triples carry the
//! three structure maps of a long exact triangle:
//!
//! * `i` induced by inclusion of subquotients,
//! * `j` induced by projection,
//! * `k` induced by applying the differential to a zero-extended
//!   representative (the connecting map).
//!
//! The verification routines check exactness, excision, the splitting along
//! incomparable convex sets, and the braid identities of nested quadruples;
//! together these are the axioms the system is expected to satisfy.

use crate::error::{Error, Result};
use crate::fgab::{
    enumerate_homs, exact_at, induced_hom, jointly_surjective, FgGroup, GroupHom, HomologyData,
};
use crate::graded::{FiltrationCompatibility, FilteredChainMap, GradedDifferentialGroup};
use crate::poset::{ConvexRelation, ElemMask, Poset};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

/// Soft cap on how many octahedron checks a braid verification may run.
pub const DEFAULT_QUADRUPLE_CAP: u64 = 200_000;

/// The structure maps of the exact triangle of a nested triple, keyed by
/// the two difference masks.
#[derive(Debug, Clone)]
pub struct TriangleMaps {
    /// lower difference `b \ a`
    pub xi: ElemMask,
    /// upper difference `c \ b`
    pub eta: ElemMask,
    /// `E(xi) -> E(xi ∪ eta)`
    pub i: GroupHom,
    /// `E(xi ∪ eta) -> E(eta)`
    pub j: GroupHom,
    /// `E(eta) -> E(xi)`
    pub k: GroupHom,
}

pub struct CESystem {
    pub group: GradedDifferentialGroup,
    terms: Mutex<HashMap<ElemMask, Arc<HomologyData>>>,
    triangles: Mutex<HashMap<(ElemMask, ElemMask), Arc<TriangleMaps>>>,
}

impl CESystem {
    pub fn new(group: GradedDifferentialGroup) -> CESystem {
        CESystem { group, terms: Mutex::new(HashMap::new()), triangles: Mutex::new(HashMap::new()) }
    }

    pub fn poset(&self) -> &Poset {
        &self.group.poset
    }

    fn require_nested_downsets(&self, a: ElemMask, b: ElemMask) -> Result<()> {
        self.poset().down_set(a)?;
        self.poset().down_set(b)?;
        if a & !b != 0 {
            return Err(Error::NotNested(format!(
                "{} is not contained in {}",
                self.poset().format_mask(a),
                self.poset().format_mask(b)
            )));
        }
        Ok(())
    }

    /// Homology of the subquotient carried by a convex set; memoized, so
    /// every nested pair with the same difference shares one term.
    pub fn e_term_convex(&self, xi: ElemMask) -> Result<Arc<HomologyData>> {
        self.poset().convex_set(xi)?;
        if let Some(h) = self.terms.lock().unwrap().get(&xi) {
            return Ok(h.clone());
        }
        let h = Arc::new(self.group.convex_homology(xi)?);
        Ok(self.terms.lock().unwrap().entry(xi).or_insert(h).clone())
    }

    /// The term of a nested pair of down-sets.
    pub fn e_term(&self, alpha: ElemMask, beta: ElemMask) -> Result<Arc<HomologyData>> {
        self.require_nested_downsets(alpha, beta)?;
        self.e_term_convex(beta & !alpha)
    }

    /// Presentation of the term of a convex set.
    pub fn e_group(&self, xi: ElemMask) -> Result<FgGroup> {
        Ok(self.e_term_convex(xi)?.group.clone())
    }

    /// Structure maps of a nested triple of down-sets `a ⊆ b ⊆ c`.
    pub fn triangle_maps(&self, a: ElemMask, b: ElemMask, c: ElemMask) -> Result<Arc<TriangleMaps>> {
        self.require_nested_downsets(a, b)?;
        self.require_nested_downsets(b, c)?;
        self.triangle_for_masks(b & !a, c & !b)
    }

    /// Structure maps computed directly from the difference masks of an
    /// adjacent pair (any realizing triple yields the same matrices).
    pub fn triangle_for_masks(&self, xi: ElemMask, eta: ElemMask) -> Result<Arc<TriangleMaps>> {
        if let Some(t) = self.triangles.lock().unwrap().get(&(xi, eta)) {
            return Ok(t.clone());
        }
        let union = xi | eta;
        let h_xi = self.e_term_convex(xi)?;
        let h_eta = self.e_term_convex(eta)?;
        let h_union = self.e_term_convex(union)?;
        let i = induced_hom(&self.group.transfer_matrix(xi, union), &h_xi, &h_union)?;
        let j = induced_hom(&self.group.transfer_matrix(union, eta), &h_union, &h_eta)?;
        let k = induced_hom(&self.group.differential_block(xi, eta), &h_eta, &h_xi)?;
        let t = Arc::new(TriangleMaps { xi, eta, i, j, k });
        Ok(self.triangles.lock().unwrap().entry((xi, eta)).or_insert(t).clone())
    }

    /// The map of a nested pair of nested pairs: include, then project.
    pub fn ell_map(
        &self,
        from: (ElemMask, ElemMask),
        to: (ElemMask, ElemMask),
    ) -> Result<GroupHom> {
        self.require_nested_downsets(from.0, from.1)?;
        self.require_nested_downsets(to.0, to.1)?;
        self.require_nested_downsets(from.0, to.0)?;
        self.require_nested_downsets(from.1, to.1)?;
        let xi = from.1 & !from.0;
        let xi2 = to.1 & !to.0;
        let h_from = self.e_term_convex(xi)?;
        let h_to = self.e_term_convex(xi2)?;
        induced_hom(&self.group.transfer_matrix(xi, xi2), &h_from, &h_to)
    }

    /// Exactness of the triangle of a nested triple.
    pub fn verify_exact_triangle(&self, a: ElemMask, b: ElemMask, c: ElemMask) -> Result<()> {
        let t = self.triangle_maps(a, b, c)?;
        let fails = check_exact_triple(&t.i, &t.j, &t.k)?;
        if fails.is_empty() {
            Ok(())
        } else {
            Err(Error::validation(
                "exact triangle",
                format!(
                    "triple ({}, {}, {}): {}",
                    self.poset().format_mask(a),
                    self.poset().format_mask(b),
                    self.poset().format_mask(c),
                    fails.join("; ")
                ),
            ))
        }
    }

    /// Two nested pairs with the same difference set share their term, and
    /// the maps from the meet pair into both are identities.
    pub fn verify_excision(
        &self,
        first: (ElemMask, ElemMask),
        second: (ElemMask, ElemMask),
    ) -> Result<()> {
        self.require_nested_downsets(first.0, first.1)?;
        self.require_nested_downsets(second.0, second.1)?;
        let xi1 = first.1 & !first.0;
        let xi2 = second.1 & !second.0;
        if xi1 != xi2 {
            return Err(Error::HypothesisViolated(format!(
                "excision requires equal difference sets, got {} and {}",
                self.poset().format_mask(xi1),
                self.poset().format_mask(xi2)
            )));
        }
        let meet = (first.0 & second.0, first.1 & second.1);
        for pair in [first, second] {
            let ell = self.ell_map(meet, pair)?;
            if !ell.is_identity() {
                return Err(Error::validation(
                    "excision",
                    format!(
                        "map from ({}, {}) to ({}, {}) is not the identity",
                        self.poset().format_mask(meet.0),
                        self.poset().format_mask(meet.1),
                        self.poset().format_mask(pair.0),
                        self.poset().format_mask(pair.1)
                    ),
                ))
            }
        }
        Ok(())
    }

    /// For incomparable convex sets the two orderings both give triangles;
    /// the connecting maps vanish, the restriction of each inclusion is the
    /// identity, and the union term splits as a direct sum.
    pub fn verify_incomparable(&self, xi: ElemMask, eta: ElemMask) -> Result<()> {
        if self.poset().convex_relation(xi, eta)? != ConvexRelation::Incomparable {
            return Err(Error::HypothesisViolated(format!(
                "{} and {} are not incomparable convex sets",
                self.poset().format_mask(xi),
                self.poset().format_mask(eta)
            )));
        }
        let t1 = self.triangle_for_masks(xi, eta)?;
        let t2 = self.triangle_for_masks(eta, xi)?;
        let mut fails = Vec::new();
        if !t1.k.is_zero() {
            fails.push("connecting map of the (xi, eta) triangle is nonzero".to_string());
        }
        if !t2.k.is_zero() {
            fails.push("connecting map of the (eta, xi) triangle is nonzero".to_string());
        }
        if !t2.j.compose(&t1.i)?.is_identity() {
            fails.push("projection after inclusion is not the identity on the first term".to_string());
        }
        if !t1.j.compose(&t2.i)?.is_identity() {
            fails.push("projection after inclusion is not the identity on the second term".to_string());
        }
        if !t1.j.compose(&t1.i)?.is_zero() {
            fails.push("projection after inclusion of the same term is nonzero".to_string());
        }
        if !t2.j.compose(&t2.i)?.is_zero() {
            fails.push("projection after inclusion of the same term is nonzero (reversed)".to_string());
        }
        let sum = self.e_group(xi)?.direct_sum(&self.e_group(eta)?)?;
        let union = self.e_group(xi | eta)?;
        if sum != union {
            fails.push(format!("union term {union} differs from the direct sum {sum}"));
        }
        if !jointly_surjective(&[&t1.i, &t2.i])? {
            fails.push("the two inclusions do not jointly span the union term".to_string());
        }
        if fails.is_empty() {
            Ok(())
        } else {
            Err(Error::validation(
                "incomparable pair",
                format!(
                    "({}, {}): {}",
                    self.poset().format_mask(xi),
                    self.poset().format_mask(eta),
                    fails.join("; ")
                ),
            ))
        }
    }

    /// The braid of a nested quadruple `a ⊆ b ⊆ c ⊆ d`: all four triangles
    /// are exact and the six compatibility cells commute.
    pub fn verify_octahedron(
        &self,
        a: ElemMask,
        b: ElemMask,
        c: ElemMask,
        d: ElemMask,
    ) -> Result<()> {
        let t1 = self.triangle_maps(a, b, c)?;
        let t2 = self.triangle_maps(a, b, d)?;
        let t3 = self.triangle_maps(a, c, d)?;
        let t4 = self.triangle_maps(b, c, d)?;
        let mut fails = check_braid_cells(&t1, &t2, &t3, &t4)?;
        for (name, t) in [("lower", &t1), ("outer", &t2), ("left", &t3), ("upper", &t4)] {
            let triangle_fails = check_exact_triple(&t.i, &t.j, &t.k)?;
            for f in triangle_fails {
                fails.push(format!("{name} triangle: {f}"));
            }
        }
        if fails.is_empty() {
            Ok(())
        } else {
            Err(Error::validation(
                "braid quadruple",
                format!(
                    "({}, {}, {}, {}): {}",
                    self.poset().format_mask(a),
                    self.poset().format_mask(b),
                    self.poset().format_mask(c),
                    self.poset().format_mask(d),
                    fails.join("; ")
                ),
            ))
        }
    }

    /// All convex subsets of the grading poset, nonempty, in
    /// (cardinality, earliest-element) order.
    pub fn convex_masks(&self) -> Vec<ElemMask> {
        self.poset()
            .convex_sets(crate::poset::MAX_ELEMENTS)
            .expect("element count is bounded by the representation limit")
            .into_iter()
            .map(|c| c.0)
            .filter(|m| *m != 0)
            .collect()
    }

    /// Enumerate the full axiom battery as independent work items: an
    /// exact-triangle check for every adjacent pair of convex sets, the
    /// splitting identities for every incomparable pair, and the braid
    /// cells for every realizable difference triple.  `max_convex` bounds
    /// the number of convex sets and `quad_cap` the number of quadruples.
    pub fn braid_items(&self, max_convex: usize, quad_cap: u64) -> Result<Vec<BraidItem>> {
        let masks = self.convex_masks();
        if masks.len() > max_convex {
            return Err(Error::BoundExceeded(format!(
                "{} convex sets exceed the verification bound {max_convex}",
                masks.len()
            )));
        }
        let mut adjacent: Vec<(ElemMask, ElemMask)> = Vec::new();
        for &xi in &masks {
            for &eta in &masks {
                if xi & eta != 0 {
                    continue;
                }
                match self.poset().convex_relation(xi, eta)? {
                    ConvexRelation::Neither => continue,
                    ConvexRelation::Adjacent | ConvexRelation::Incomparable => {
                        adjacent.push((xi, eta));
                    }
                }
            }
        }
        let mut items = Vec::new();
        for &(xi, eta) in &adjacent {
            items.push(BraidItem::Triangle { xi, eta });
        }
        for &(xi, eta) in &adjacent {
            // each unordered incomparable pair once
            if self.poset().mask_order(xi, eta) != std::cmp::Ordering::Less {
                continue;
            }
            if self.poset().convex_relation(xi, eta)? != ConvexRelation::Incomparable {
                continue;
            }
            items.push(BraidItem::Incomparable { xi, eta });
        }
        let mut quads: u64 = 0;
        for &(xi, eta) in &adjacent {
            let union = xi | eta;
            for &zeta in &masks {
                if zeta & union != 0 {
                    continue;
                }
                if self.poset().convex_relation(union, zeta)? == ConvexRelation::Neither {
                    continue;
                }
                quads += 1;
                if quads > quad_cap {
                    return Err(Error::BoundExceeded(format!(
                        "braid verification exceeds {quad_cap} quadruple checks"
                    )));
                }
                items.push(BraidItem::Octahedron { xi, eta, zeta });
            }
        }
        Ok(items)
    }

    /// Run one work item of the axiom battery; returns its report label
    /// and the list of failures (empty when the check passes).  Pure in
    /// the system, so items may run in any order or in parallel.
    pub fn run_braid_item(&self, item: &BraidItem) -> Result<(String, Vec<String>)> {
        match *item {
            BraidItem::Triangle { xi, eta } => {
                let t = self.triangle_for_masks(xi, eta)?;
                let fails = check_exact_triple(&t.i, &t.j, &t.k)?;
                Ok((
                    format!(
                        "triangle xi={} eta={}",
                        self.poset().format_mask(xi),
                        self.poset().format_mask(eta)
                    ),
                    fails,
                ))
            }
            BraidItem::Incomparable { xi, eta } => {
                let fails = match self.verify_incomparable(xi, eta) {
                    Ok(()) => Vec::new(),
                    Err(Error::Validation { detail, .. }) => vec![detail],
                    Err(e) => return Err(e),
                };
                Ok((
                    format!(
                        "incomparable xi={} eta={}",
                        self.poset().format_mask(xi),
                        self.poset().format_mask(eta)
                    ),
                    fails,
                ))
            }
            BraidItem::Octahedron { xi, eta, zeta } => {
                // realize (union, zeta) as gamma/delta differences, then
                // split gamma into xi and eta
                let union = xi | eta;
                let (alpha, gamma, delta) = self
                    .poset()
                    .adjacent_witness(union, zeta)
                    .expect("enumeration only emits adjacent unions");
                let beta = alpha.0 | xi;
                let fails = match self.verify_octahedron(alpha.0, beta, gamma.0, delta.0) {
                    Ok(()) => Vec::new(),
                    Err(Error::Validation { detail, .. }) => vec![detail],
                    Err(e) => return Err(e),
                };
                Ok((
                    format!(
                        "octahedron xi={} eta={} zeta={}",
                        self.poset().format_mask(xi),
                        self.poset().format_mask(eta),
                        self.poset().format_mask(zeta)
                    ),
                    fails,
                ))
            }
        }
    }

    /// Run the full axiom battery sequentially and assemble the report.
    pub fn verify_module_braid(&self, max_convex: usize, quad_cap: u64) -> Result<BraidReport> {
        let items = self.braid_items(max_convex, quad_cap)?;
        let mut report = BraidReport::default();
        for item in &items {
            let (label, fails) = self.run_braid_item(item)?;
            report.count(item);
            report.record(label, fails);
        }
        Ok(report)
    }
}

/// One independent check of the axiom battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BraidItem {
    /// Exactness of the triangle of an adjacent pair of convex sets.
    Triangle { xi: ElemMask, eta: ElemMask },
    /// Splitting identities of an incomparable pair.
    Incomparable { xi: ElemMask, eta: ElemMask },
    /// Braid cells of the quadruple realized by an adjacent pair and a
    /// third convex set adjacent to its union.
    Octahedron { xi: ElemMask, eta: ElemMask, zeta: ElemMask },
}

/// Exactness of a triangle given by explicit maps: image equals kernel at
/// all three corners. Returns descriptions of the failing corners.
pub fn check_exact_triple(i: &GroupHom, j: &GroupHom, k: &GroupHom) -> Result<Vec<String>> {
    let mut fails = Vec::new();
    if !exact_at(i, j)? {
        fails.push("image(i) != kernel(j)".to_string());
    }
    if !exact_at(j, k)? {
        fails.push("image(j) != kernel(k)".to_string());
    }
    if !exact_at(k, i)? {
        fails.push("image(k) != kernel(i)".to_string());
    }
    Ok(fails)
}

/// The six commuting cells tying together the four triangles of a nested
/// quadruple `a ⊆ b ⊆ c ⊆ d`, with `t1 = (a,b,c)`, `t2 = (a,b,d)`,
/// `t3 = (a,c,d)`, `t4 = (b,c,d)`. Returns descriptions of failing cells.
pub fn check_braid_cells(
    t1: &TriangleMaps,
    t2: &TriangleMaps,
    t3: &TriangleMaps,
    t4: &TriangleMaps,
) -> Result<Vec<String>> {
    let mut fails = Vec::new();
    if t3.i.compose(&t1.i)? != t2.i {
        fails.push("cell 1: inclusions do not compose".to_string());
    }
    if t4.i.compose(&t1.j)? != t2.j.compose(&t3.i)? {
        fails.push("cell 2: projection and inclusion do not commute".to_string());
    }
    if t2.k.compose(&t4.i)? != t1.k {
        fails.push("cell 3: connecting map is not compatible with inclusion".to_string());
    }
    if t4.j.compose(&t2.j)? != t3.j {
        fails.push("cell 4: projections do not compose".to_string());
    }
    if t3.k.compose(&t4.j)? != t1.i.compose(&t2.k)? {
        fails.push("cell 5: connecting maps do not braid".to_string());
    }
    if t1.j.compose(&t3.k)? != t4.k {
        fails.push("cell 6: connecting map is not compatible with projection".to_string());
    }
    Ok(fails)
}

/// Outcome lines and counts of a braid verification run.
#[derive(Debug, Default)]
pub struct BraidReport {
    pub triangles: usize,
    pub incomparable: usize,
    pub octahedra: usize,
    pub failures: usize,
    pub lines: Vec<String>,
}

impl BraidReport {
    /// Bump the per-kind counter for one work item.
    pub fn count(&mut self, item: &BraidItem) {
        match item {
            BraidItem::Triangle { .. } => self.triangles += 1,
            BraidItem::Incomparable { .. } => self.incomparable += 1,
            BraidItem::Octahedron { .. } => self.octahedra += 1,
        }
    }

    pub fn record(&mut self, label: String, fails: Vec<String>) {
        if fails.is_empty() {
            self.lines.push(format!("{label}: ok"));
        } else {
            self.failures += 1;
            self.lines.push(format!("{label}: FAIL {}", fails.join("; ")));
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// A family of isomorphisms between the terms of two systems, one per
/// nonempty convex set, compatible with all structure maps.
#[derive(Debug, Clone)]
pub struct CEIso {
    pub components: BTreeMap<ElemMask, GroupHom>,
}

impl CEIso {
    /// The identity family; well-defined only when the two systems have
    /// equal term presentations everywhere.
    pub fn identity(source: &CESystem, target: &CESystem) -> Result<CEIso> {
        let mut components = BTreeMap::new();
        for xi in source.convex_masks() {
            let s = source.e_group(xi)?;
            let t = target.e_group(xi)?;
            if s != t {
                return Err(Error::CEIsoInconsistent(format!(
                    "terms of {} differ: {s} vs {t}",
                    source.poset().format_mask(xi)
                )));
            }
            components.insert(
                xi,
                GroupHom::from_matrix(
                    s.clone(),
                    t,
                    crate::linalg::ExactMatrix::identity(s.coeffs, s.total_rank()),
                )?,
            );
        }
        Ok(CEIso { components })
    }

    /// The family induced on terms by a filtration-preserving chain map:
    /// the component at a convex set is the map induced by the
    /// corresponding diagonal block.
    pub fn from_chain_map(
        f: &FilteredChainMap,
        source: &CESystem,
        target: &CESystem,
    ) -> Result<CEIso> {
        if f.source.d != source.group.d || f.target.d != target.group.d {
            return Err(Error::invalid(
                "chain map endpoints do not match the given systems".to_string(),
            ));
        }
        f.validate_map(FiltrationCompatibility::Preserving)?;
        let mut components = BTreeMap::new();
        for xi in source.convex_masks() {
            let rows = f.target.indices_of(xi);
            let cols = f.source.indices_of(xi);
            let block = f.matrix.submatrix(&rows, &cols);
            let hom =
                induced_hom(&block, source.e_term_convex(xi)?.as_ref(), target.e_term_convex(xi)?.as_ref())?;
            components.insert(xi, hom);
        }
        Ok(CEIso { components })
    }

    pub fn component(&self, xi: ElemMask) -> Result<&GroupHom> {
        self.components
            .get(&xi)
            .ok_or_else(|| Error::invalid(format!("no component for convex mask {xi:#b}")))
    }

    /// Full verification: every component is an isomorphism with the
    /// correct endpoints, and the family commutes with the `i`, `j`, and
    /// connecting maps of every adjacent pair (the general nested-pair maps
    /// factor through these).
    pub fn verify(&self, source: &CESystem, target: &CESystem) -> Result<()> {
        if source.poset() != target.poset() {
            return Err(Error::invalid(
                "systems are graded by different posets".to_string(),
            ));
        }
        let masks = source.convex_masks();
        for &xi in &masks {
            let phi = self.component(xi)?;
            if phi.source != source.e_group(xi)? || phi.target != target.e_group(xi)? {
                return Err(Error::validation(
                    "system isomorphism",
                    format!(
                        "component at {} has wrong endpoints",
                        source.poset().format_mask(xi)
                    ),
                ));
            }
            if !phi.is_isomorphism() {
                return Err(Error::validation(
                    "system isomorphism",
                    format!(
                        "component at {} is not an isomorphism",
                        source.poset().format_mask(xi)
                    ),
                ));
            }
        }
        for &xi in &masks {
            for &eta in &masks {
                if xi & eta != 0
                    || source.poset().convex_relation(xi, eta)? == ConvexRelation::Neither
                {
                    continue;
                }
                let tc = source.triangle_for_masks(xi, eta)?;
                let ta = target.triangle_for_masks(xi, eta)?;
                let phi_xi = self.component(xi)?;
                let phi_eta = self.component(eta)?;
                let phi_union = self.component(xi | eta)?;
                let label = format!(
                    "({}, {})",
                    source.poset().format_mask(xi),
                    source.poset().format_mask(eta)
                );
                if ta.i.compose(phi_xi)? != phi_union.compose(&tc.i)? {
                    return Err(Error::validation(
                        "system isomorphism",
                        format!("inclusion naturality fails at {label}"),
                    ));
                }
                if ta.j.compose(phi_union)? != phi_eta.compose(&tc.j)? {
                    return Err(Error::validation(
                        "system isomorphism",
                        format!("projection naturality fails at {label}"),
                    ));
                }
                if ta.k.compose(phi_eta)? != phi_xi.compose(&tc.k)? {
                    return Err(Error::validation(
                        "system isomorphism",
                        format!("connecting-map naturality fails at {label}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Result of the exhaustive comparison of two systems.
#[derive(Debug)]
pub enum CompareOutcome {
    Isomorphic(Box<CEIso>),
    /// Witnessed by a nested pair of down-sets whose terms cannot be
    /// matched.
    NotIsomorphic { alpha: ElemMask, beta: ElemMask, reason: String },
    BudgetExceeded,
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut state = seed;
    for idx in (1..items.len()).rev() {
        let pick = (splitmix(&mut state) % (idx as u64 + 1)) as usize;
        items.swap(idx, pick);
    }
}

/// Decide whether two systems over the same poset are isomorphic, by
/// presentation comparison, the induced-identity shortcut, and finally a
/// backtracking search over all finite families of component isomorphisms.
/// The search charges one unit of `budget` per candidate homomorphism it
/// generates; exhausting the budget, or meeting an infinite candidate
/// family after the shortcut fails, yields `BudgetExceeded`. `seed`
/// permutes the candidate order and cannot change the outcome, only which
/// isomorphism is found first.
pub fn ce_isomorphic_bruteforce(
    source: &CESystem,
    target: &CESystem,
    budget: u64,
    seed: u64,
) -> Result<CompareOutcome> {
    if source.poset() != target.poset() {
        return Err(Error::invalid(
            "systems are graded by different posets".to_string(),
        ));
    }
    let poset = source.poset();
    let masks = source.convex_masks();
    // refutation by term presentations
    for &xi in &masks {
        let s = source.e_group(xi)?;
        let t = target.e_group(xi)?;
        if s != t {
            let beta = poset.close_down(xi);
            return Ok(CompareOutcome::NotIsomorphic {
                alpha: beta & !xi,
                beta,
                reason: format!(
                    "terms of {} differ: {s} vs {t}",
                    poset.format_mask(xi)
                ),
            });
        }
    }
    // identity shortcut
    if let Ok(identity) = CEIso::identity(source, target) {
        if identity.verify(source, target).is_ok() {
            return Ok(CompareOutcome::Isomorphic(Box::new(identity)));
        }
    }
    // backtracking over component choices, masks in size order
    let mut candidates: Vec<Vec<GroupHom>> = Vec::with_capacity(masks.len());
    let mut remaining = budget;
    for &xi in &masks {
        let s = source.e_group(xi)?;
        let t = target.e_group(xi)?;
        let Some(family) = enumerate_homs(&s, &t) else {
            return Ok(CompareOutcome::BudgetExceeded);
        };
        let mut isos = Vec::new();
        for hom in family {
            if remaining == 0 {
                return Ok(CompareOutcome::BudgetExceeded);
            }
            remaining -= 1;
            if hom.is_isomorphism() {
                isos.push(hom);
            }
        }
        if isos.is_empty() {
            // cannot happen after the presentation scan, but stay safe
            let beta = poset.close_down(xi);
            return Ok(CompareOutcome::NotIsomorphic {
                alpha: beta & !xi,
                beta,
                reason: format!("no isomorphism exists at {}", poset.format_mask(xi)),
            });
        }
        shuffle(&mut isos, seed ^ xi);
        candidates.push(isos);
    }
    // naturality checks become possible once all three masks of an
    // adjacent pair are assigned
    let index_of: HashMap<ElemMask, usize> =
        masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut checks_at: Vec<Vec<(ElemMask, ElemMask)>> = vec![Vec::new(); masks.len()];
    for &xi in &masks {
        for &eta in &masks {
            if xi & eta != 0 || poset.convex_relation(xi, eta)? == ConvexRelation::Neither {
                continue;
            }
            let level = *[index_of[&xi], index_of[&eta], index_of[&(xi | eta)]]
                .iter()
                .max()
                .unwrap();
            checks_at[level].push((xi, eta));
        }
    }
    if masks.is_empty() {
        return Ok(CompareOutcome::Isomorphic(Box::new(CEIso { components: BTreeMap::new() })));
    }
    // depth-first search: chosen[0..len-1] are accepted component indices,
    // the last entry is the candidate under test at the current level
    let mut chosen: Vec<usize> = vec![0];
    let mut deepest_fail = 0usize;
    while let Some(&slot) = chosen.last() {
        let level = chosen.len() - 1;
        if slot >= candidates[level].len() {
            deepest_fail = deepest_fail.max(level);
            chosen.pop();
            if let Some(prev) = chosen.last_mut() {
                *prev += 1;
            }
            continue;
        }
        if remaining == 0 {
            return Ok(CompareOutcome::BudgetExceeded);
        }
        remaining -= 1;
        let ok =
            naturality_holds(source, target, &index_of, &candidates, &chosen, &checks_at[level])?;
        if !ok {
            *chosen.last_mut().unwrap() += 1;
            continue;
        }
        if chosen.len() < masks.len() {
            chosen.push(0);
            continue;
        }
        // full assignment: the incremental checks cover every adjacent
        // pair, but run the complete verification as the final word
        let components: BTreeMap<ElemMask, GroupHom> = masks
            .iter()
            .zip(&chosen)
            .map(|(&m, &c)| (m, candidates[index_of[&m]][c].clone()))
            .collect();
        let iso = CEIso { components };
        if iso.verify(source, target).is_ok() {
            return Ok(CompareOutcome::Isomorphic(Box::new(iso)));
        }
        deepest_fail = deepest_fail.max(masks.len() - 1);
        *chosen.last_mut().unwrap() += 1;
    }
    let witness = masks[deepest_fail.min(masks.len() - 1)];
    let beta = poset.close_down(witness);
    Ok(CompareOutcome::NotIsomorphic {
        alpha: beta & !witness,
        beta,
        reason: "no family of component isomorphisms commutes with the structure maps".to_string(),
    })
}

fn naturality_holds(
    source: &CESystem,
    target: &CESystem,
    index_of: &HashMap<ElemMask, usize>,
    candidates: &[Vec<GroupHom>],
    chosen: &[usize],
    checks: &[(ElemMask, ElemMask)],
) -> Result<bool> {
    let get = |m: ElemMask| -> &GroupHom {
        let idx = index_of[&m];
        &candidates[idx][chosen[idx]]
    };
    for &(xi, eta) in checks {
        let tc = source.triangle_for_masks(xi, eta)?;
        let ta = target.triangle_for_masks(xi, eta)?;
        let phi_xi = get(xi);
        let phi_eta = get(eta);
        let phi_union = get(xi | eta);
        if ta.i.compose(phi_xi)? != phi_union.compose(&tc.i)?
            || ta.j.compose(phi_union)? != phi_eta.compose(&tc.j)?
            || ta.k.compose(phi_eta)? != phi_xi.compose(&tc.k)?
        {
            return Ok(false);
        }
    }
    Ok(true)
}
