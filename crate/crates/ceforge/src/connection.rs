//! Connection matrices for field-coefficient instances, with chain
//! equivalence witnesses, and the uniqueness certificate for Morse-Smale
//! gradings.
//!
//! Over a field, every filtered differential vector space deformation
//! retracts onto a strict form — one whose within-grade differential
//! blocks vanish — by repeatedly cancelling a nonzero within-grade entry
//! through the standard change of basis.  Each cancellation only touches
//! blocks between grades below and above the pivot grade, so the
//! filtration is respected throughout.  The retraction data (`f`, `g`, and
//! a chain homotopy `h`) is accumulated exactly and re-verified before it
//! is returned.

use crate::ce::{ce_isomorphic_bruteforce, CESystem, CompareOutcome};
use crate::error::{Error, Result};
use crate::graded::{
    verify_homotopy, FilteredChainMap, FiltrationCompatibility, GradedDifferentialGroup,
};
use crate::linalg::ExactMatrix;
use num::Zero;

/// A chain homotopy on a graded differential group, stored as a raw
/// matrix in the group's generator coordinates.
#[derive(Debug, Clone)]
pub struct ChainHomotopy {
    pub matrix: ExactMatrix,
}

impl ChainHomotopy {
    /// Check that this homotopy realizes `phi − psi = d h + h d` on
    /// `group`.
    pub fn verify(
        &self,
        group: &GradedDifferentialGroup,
        phi: &ExactMatrix,
        psi: &ExactMatrix,
    ) -> Result<bool> {
        verify_homotopy(group, phi, psi, &self.matrix)
    }
}

/// The result of reducing a filtered differential vector space `D` to a
/// strict form `A` (its connection matrix), together with the chain
/// equivalence witnessing that nothing was lost:
///
/// ```text
/// g · f = id_A        f · g − id_D = h · d_D + d_D · h
/// ```
///
/// Both `f: A → D` and `g: D → A` preserve the filtration, and so does
/// `h`, hence all terms of the two Cartan-Eilenberg systems agree.
#[derive(Debug, Clone)]
pub struct ReductionWitness {
    /// The strict reduced group; its differential is the connection matrix.
    pub a: GradedDifferentialGroup,
    /// Filtered quasi-isomorphism from the reduced group into the input.
    pub f: FilteredChainMap,
    /// Filtered retraction from the input onto the reduced group.
    pub g: FilteredChainMap,
    /// Homotopy on the input with `f·g − id = h·d + d·h`.
    pub h: ChainHomotopy,
}

/// Reduce a field-coefficient filtered differential vector space to a
/// connection matrix, with the default pivot preference (grades in the
/// linear extension, generators in input order).
pub fn reduce(group: &GradedDifferentialGroup) -> Result<ReductionWitness> {
    let priority: Vec<usize> = (0..group.total_rank()).collect();
    reduce_with_priority(group, &priority)
}

/// Reduce with an explicit pivot preference.
///
/// `priority` is a permutation of the generator indices; among the
/// nonzero within-grade entries of the grade currently being cleared, the
/// pivot chosen is the one whose (column generator, row generator) pair is
/// lexicographically smallest under `priority`.  For Morse-Smale
/// instances the resulting differential is independent of this choice;
/// in general only the witness identities are guaranteed.
pub fn reduce_with_priority(
    group: &GradedDifferentialGroup,
    priority: &[usize],
) -> Result<ReductionWitness> {
    let coeffs = group.coeffs;
    let n = group.total_rank();
    if !coeffs.is_field() {
        return Err(Error::NotAField(refusal_message(group)));
    }
    group.validate()?;
    if priority.len() != n {
        return Err(Error::PreconditionFailed(format!(
            "priority list has {} entries for {n} generators",
            priority.len()
        )));
    }
    {
        let mut seen = vec![false; n];
        for &p in priority {
            if p >= n || seen[p] {
                return Err(Error::PreconditionFailed(
                    "priority list is not a permutation of the generators".to_string(),
                ));
            }
            seen[p] = true;
        }
    }

    // Current state: surviving original generator indices (in input
    // order), the differential between them, and the accumulated
    // equivalence data in original coordinates.
    let mut cur: Vec<usize> = (0..n).collect();
    let mut d_cur = group.d.clone();
    let mut f_tot = ExactMatrix::identity(coeffs, n);
    let mut g_tot = ExactMatrix::identity(coeffs, n);
    let mut h_tot = ExactMatrix::zeros(coeffs, n, n);

    for p in group.poset.linear_extension() {
        loop {
            let m = cur.len();
            // Positions of grade-p survivors, and the preferred pivot.
            let in_grade: Vec<usize> = (0..m)
                .filter(|&i| group.grade_of(cur[i]) == p)
                .collect();
            let mut pivot: Option<(usize, usize, (usize, usize))> = None;
            for &c in &in_grade {
                for &r in &in_grade {
                    if r == c || d_cur.at(r, c).is_zero() {
                        continue;
                    }
                    let key = (priority[cur[c]], priority[cur[r]]);
                    if pivot.as_ref().map_or(true, |(_, _, best)| key < *best) {
                        pivot = Some((r, c, key));
                    }
                }
            }
            let Some((r, c, _)) = pivot else { break };
            let a = d_cur.at(r, c).clone();
            let ainv = coeffs
                .inverse(&a)
                .expect("nonzero field scalar is invertible");
            // One cancellation: f_step keeps the survivors and corrects
            // the cancelled column, g_step clears the pivot row, h_step
            // records the contraction.
            let survivors: Vec<usize> = (0..m).filter(|&i| i != r && i != c).collect();
            let mut f_full = ExactMatrix::identity(coeffs, m);
            for y in 0..m {
                let val = d_cur.at(r, y);
                if !val.is_zero() {
                    let cur_val = f_full.at(c, y).clone();
                    f_full.set(c, y, coeffs.sub(&cur_val, &coeffs.mul(&ainv, val)));
                }
            }
            let mut g_full = ExactMatrix::identity(coeffs, m);
            for x in 0..m {
                let val = d_cur.at(x, c);
                if !val.is_zero() {
                    let cur_val = g_full.at(x, r).clone();
                    g_full.set(x, r, coeffs.sub(&cur_val, &coeffs.mul(&ainv, val)));
                }
            }
            let mut h_step = ExactMatrix::zeros(coeffs, m, m);
            h_step.set(c, r, coeffs.neg(&ainv));

            let all: Vec<usize> = (0..m).collect();
            let f_step = f_full.submatrix(&all, &survivors);
            let g_step = g_full.submatrix(&survivors, &all);
            h_tot = h_tot.add(&f_tot.mul(&h_step).mul(&g_tot));
            d_cur = g_step.mul(&d_cur).mul(&f_step);
            f_tot = f_tot.mul(&f_step);
            g_tot = g_step.mul(&g_tot);
            cur = survivors.iter().map(|&i| cur[i]).collect();
        }
    }

    // Assemble the reduced group over the surviving generators.
    let mut new_ranks = vec![0usize; group.poset.len()];
    for &gen in &cur {
        new_ranks[group.grade_of(gen)] += 1;
    }
    let new_degrees = group.degrees.as_ref().map(|degs| {
        let mut out: Vec<Vec<i64>> = vec![Vec::new(); group.poset.len()];
        for &gen in &cur {
            let p = group.grade_of(gen);
            out[p].push(degs[p][gen - group.offset(p)]);
        }
        out
    });
    let a = GradedDifferentialGroup::from_full_matrix(
        group.poset.clone(),
        coeffs,
        new_ranks,
        new_degrees,
        d_cur,
    )?;
    if !a.is_strict() {
        return Err(Error::validation(
            "connection matrix",
            "reduction finished with a nonzero within-grade block".to_string(),
        ));
    }
    // Witness identities, re-verified exactly.
    let f = FilteredChainMap::new(a.clone(), group.clone(), f_tot.clone())?;
    f.validate_map(FiltrationCompatibility::Preserving)?;
    let g = FilteredChainMap::new(group.clone(), a.clone(), g_tot.clone())?;
    g.validate_map(FiltrationCompatibility::Preserving)?;
    let m_final = cur.len();
    if g_tot.mul(&f_tot) != ExactMatrix::identity(coeffs, m_final) {
        return Err(Error::validation(
            "connection matrix",
            "retraction followed by inclusion is not the identity".to_string(),
        ));
    }
    for x in 0..n {
        for y in 0..n {
            if !h_tot.at(x, y).is_zero() && !group.poset.leq(group.grade_of(x), group.grade_of(y))
            {
                return Err(Error::validation(
                    "connection matrix",
                    "homotopy does not preserve the filtration".to_string(),
                ));
            }
        }
    }
    let identity_d = ExactMatrix::identity(coeffs, n);
    if !verify_homotopy(group, &f_tot.mul(&g_tot), &identity_d, &h_tot)? {
        return Err(Error::validation(
            "connection matrix",
            "homotopy equation f·g − id = h·d + d·h fails".to_string(),
        ));
    }
    // Rank invariant: the reduced rank at each grade is the dimension of
    // the homology of that grade's block in the input.
    for p in 0..group.poset.len() {
        let hp = group.convex_homology(1 << p)?;
        if hp.group.total_rank() != a.ranks[p] {
            return Err(Error::validation(
                "connection matrix",
                format!(
                    "rank at {} is {}, expected the term dimension {}",
                    group.poset.labels()[p],
                    a.ranks[p],
                    hp.group.total_rank()
                ),
            ));
        }
    }
    Ok(ReductionWitness { a, f, g, h: ChainHomotopy { matrix: h_tot } })
}

/// The refusal text for integer coefficients: names the torsion invariant
/// factors of the principal down-set terms when any exist, since they are
/// the obstruction a field never sees.
fn refusal_message(group: &GradedDifferentialGroup) -> String {
    let mut torsion_notes = Vec::new();
    for q in 0..group.poset.len() {
        let mask = group.poset.down_mask(q);
        if let Ok(h) = group.convex_homology(mask) {
            if !h.group.torsion.is_empty() {
                let factors: Vec<String> =
                    h.group.torsion.iter().map(|t| t.to_string()).collect();
                torsion_notes.push(format!(
                    "term of {} has invariant factors [{}]",
                    group.poset.format_mask(mask),
                    factors.join(", ")
                ));
            }
        }
    }
    let mut msg = String::from(
        "connection-matrix reduction requires field coefficients; over the integers \
         a strict reduced form realizing all terms need not exist",
    );
    if !torsion_notes.is_empty() {
        msg.push_str(" (torsion obstructions here: ");
        msg.push_str(&torsion_notes.join("; "));
        msg.push(')');
    }
    msg
}

/// An integer grading of the poset elements, as used for Morse-Smale
/// complexes.  Construction does not enforce order-preservation — that is
/// what [`check_morse_smale`] reports on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseSmaleGrading {
    pub mu: Vec<i64>,
}

/// The outcome of a Morse-Smale check: a verdict plus the list of reasons
/// for a negative one.
#[derive(Debug, Clone)]
pub struct MorseSmaleCheck {
    pub ok: bool,
    pub reasons: Vec<String>,
}

/// Decide whether `c` is a Morse-Smale complex for the grading `mu`:
/// binary-field coefficients, exactly one generator per grade, that
/// generator in degree `mu(p)`, and `mu` strictly order-preserving.  The
/// implied incomparability (`mu(p) = mu(q)`, `p ≠ q` forces `p ∥ q`) is
/// re-verified as a consequence.  Never errors: violations come back as
/// reasons.
pub fn check_morse_smale(c: &GradedDifferentialGroup, mu: &MorseSmaleGrading) -> MorseSmaleCheck {
    let mut reasons = Vec::new();
    let poset = &c.poset;
    if c.coeffs != crate::linalg::Coefficients::BinaryField {
        reasons.push("coefficients are not the binary field".to_string());
    }
    if mu.mu.len() != poset.len() {
        reasons.push(format!(
            "grading has {} values for {} poset elements",
            mu.mu.len(),
            poset.len()
        ));
        return MorseSmaleCheck { ok: false, reasons };
    }
    for p in 0..poset.len() {
        if c.ranks[p] != 1 {
            reasons.push(format!(
                "grade {} has rank {}, expected exactly one generator",
                poset.labels()[p],
                c.ranks[p]
            ));
        }
    }
    match &c.degrees {
        None => reasons.push("no degree map is present".to_string()),
        Some(degs) => {
            for p in 0..poset.len() {
                for (i, deg) in degs[p].iter().enumerate() {
                    if *deg != mu.mu[p] {
                        reasons.push(format!(
                            "generator {} of grade {} sits in degree {}, expected {}",
                            i,
                            poset.labels()[p],
                            deg,
                            mu.mu[p]
                        ));
                    }
                }
            }
        }
    }
    for p in 0..poset.len() {
        for q in 0..poset.len() {
            if p != q && poset.leq(p, q) && mu.mu[p] >= mu.mu[q] {
                reasons.push(format!(
                    "{} < {} but the grading does not increase ({} vs {})",
                    poset.labels()[p],
                    poset.labels()[q],
                    mu.mu[p],
                    mu.mu[q]
                ));
            }
        }
    }
    // Consequence of strict order-preservation: equal grading values force
    // incomparability.
    for p in 0..poset.len() {
        for q in 0..poset.len() {
            if p != q && mu.mu[p] == mu.mu[q] && (poset.leq(p, q) || poset.leq(q, p)) {
                reasons.push(format!(
                    "{} and {} share grading value {} but are comparable",
                    poset.labels()[p],
                    poset.labels()[q],
                    mu.mu[p]
                ));
            }
        }
    }
    MorseSmaleCheck { ok: reasons.is_empty(), reasons }
}

/// Derive the Morse-Smale grading of a rank-one-per-grade complex from its
/// degree map.
pub fn derive_grading(c: &GradedDifferentialGroup) -> Result<MorseSmaleGrading> {
    let degs = c.degrees.as_ref().ok_or_else(|| {
        Error::HypothesisViolated("no degree map is present".to_string())
    })?;
    let mut mu = Vec::with_capacity(c.poset.len());
    for p in 0..c.poset.len() {
        if degs[p].len() != 1 {
            return Err(Error::HypothesisViolated(format!(
                "grade {} has {} generators, expected exactly one",
                c.poset.labels()[p],
                degs[p].len()
            )));
        }
        mu.push(degs[p][0]);
    }
    Ok(MorseSmaleGrading { mu })
}

/// Budget used for the brute-force cross-validation inside
/// [`certify_unique_differential`].
pub const CERTIFY_BUDGET: u64 = 1_000_000;

/// Certify that two Morse-Smale complexes over the same poset and grading
/// have equal differentials exactly when their Cartan-Eilenberg systems
/// are isomorphic.
///
/// The positive direction is rigidity: a filtered chain isomorphism may
/// only be nonzero at positions `(i, j)` with `grade(i) ≤ grade(j)` in the
/// poset and equal degrees, and under a strictly order-preserving grading
/// those two conditions force `i = j`; over the binary field the diagonal
/// is then the identity, so the only filtered chain isomorphism is the
/// identity and the differentials must already be equal.  The returned
/// boolean is therefore `d1 == d2`, and the result is cross-validated
/// against the exhaustive system comparison; any disagreement is reported
/// as a validation error rather than silently resolved.
pub fn certify_unique_differential(
    c1: &GradedDifferentialGroup,
    c2: &GradedDifferentialGroup,
) -> Result<bool> {
    if c1.poset != c2.poset {
        return Err(Error::GradingMismatch(
            "the two complexes are graded by different posets".to_string(),
        ));
    }
    let mu1 = derive_grading(c1)?;
    let mu2 = derive_grading(c2)?;
    if mu1 != mu2 {
        return Err(Error::GradingMismatch(format!(
            "gradings differ: {:?} vs {:?}",
            mu1.mu, mu2.mu
        )));
    }
    for (name, c, mu) in [("first", c1, &mu1), ("second", c2, &mu2)] {
        let check = check_morse_smale(c, mu);
        if !check.ok {
            return Err(Error::HypothesisViolated(format!(
                "{name} complex is not Morse-Smale: {}",
                check.reasons.join("; ")
            )));
        }
    }
    // Rigidity scan: no off-diagonal position admits a nonzero entry of a
    // filtered degree-zero map.
    let poset = &c1.poset;
    for i in 0..poset.len() {
        for j in 0..poset.len() {
            if i != j && poset.leq(i, j) && mu1.mu[i] == mu1.mu[j] {
                return Err(Error::validation(
                    "Morse-Smale rigidity",
                    format!(
                        "comparable grades {} and {} share a degree",
                        poset.labels()[i],
                        poset.labels()[j]
                    ),
                ));
            }
        }
    }
    let equal = c1.d == c2.d;
    // Cross-validate against the exhaustive comparison of the two systems.
    let s1 = CESystem::new(c1.clone());
    let s2 = CESystem::new(c2.clone());
    match ce_isomorphic_bruteforce(&s1, &s2, CERTIFY_BUDGET, 0)? {
        CompareOutcome::Isomorphic(_) => {
            if !equal {
                return Err(Error::validation(
                    "Morse-Smale uniqueness",
                    "systems are isomorphic although the differentials differ".to_string(),
                ));
            }
        }
        CompareOutcome::NotIsomorphic { .. } => {
            if equal {
                return Err(Error::validation(
                    "Morse-Smale uniqueness",
                    "systems are not isomorphic although the differentials are equal".to_string(),
                ));
            }
        }
        CompareOutcome::BudgetExceeded => return Err(Error::BudgetExceeded),
    }
    Ok(equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Coefficients;
    use crate::poset::Poset;

    fn z2() -> Coefficients {
        Coefficients::BinaryField
    }

    fn chain_poset() -> Poset {
        Poset::from_labels(&["p", "q"], &[("p", "q")]).unwrap()
    }

    #[test]
    fn strict_input_reduces_to_itself() {
        let c = GradedDifferentialGroup::new(
            chain_poset(),
            z2(),
            vec![1, 1],
            None,
            &[(0, 1, ExactMatrix::from_i64(z2(), &[&[1]]))],
        )
        .unwrap();
        let w = reduce(&c).unwrap();
        assert_eq!(w.a.d, c.d);
        assert_eq!(w.f.matrix, ExactMatrix::identity(z2(), 2));
        assert_eq!(w.g.matrix, ExactMatrix::identity(z2(), 2));
        assert!(w.h.matrix.is_zero());
    }

    #[test]
    fn internal_pair_cancels() {
        // G_p has two generators with d(e_{p,2}) = e_{p,1}; the top grade
        // generator also maps onto e_{p,1}.  Reduction empties grade p.
        let blocks = vec![
            (0, 0, ExactMatrix::from_i64(z2(), &[&[0, 1], &[0, 0]])),
            (0, 1, ExactMatrix::from_i64(z2(), &[&[1], &[0]])),
        ];
        let c =
            GradedDifferentialGroup::new(chain_poset(), z2(), vec![2, 1], None, &blocks).unwrap();
        let w = reduce(&c).unwrap();
        assert_eq!(w.a.ranks, vec![0, 1]);
        assert!(w.a.d.is_zero());
        // Witness identities, re-checked outside the constructor.
        assert_eq!(
            w.g.matrix.mul(&w.f.matrix),
            ExactMatrix::identity(z2(), 1)
        );
        let fg = w.f.matrix.mul(&w.g.matrix);
        let id = ExactMatrix::identity(z2(), 3);
        assert!(verify_homotopy(&c, &fg, &id, &w.h.matrix).unwrap());
    }

    #[test]
    fn acyclic_single_grade_reduces_to_zero() {
        let poset = Poset::from_labels(&["p"], &[]).unwrap();
        let c = GradedDifferentialGroup::new(
            poset,
            Coefficients::Rationals,
            vec![2],
            None,
            &[(0, 0, ExactMatrix::from_i64(Coefficients::Rationals, &[&[0, 1], &[0, 0]]))],
        )
        .unwrap();
        let w = reduce(&c).unwrap();
        assert_eq!(w.a.total_rank(), 0);
    }

    #[test]
    fn integer_coefficients_are_refused_with_obstruction() {
        let c = GradedDifferentialGroup::new(
            chain_poset(),
            Coefficients::IntegerRing,
            vec![1, 1],
            None,
            &[(0, 1, ExactMatrix::from_i64(Coefficients::IntegerRing, &[&[2]]))],
        )
        .unwrap();
        match reduce(&c) {
            Err(Error::NotAField(msg)) => {
                assert!(msg.contains("invariant factors"), "message: {msg}");
                assert!(msg.contains('2'), "message: {msg}");
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn reduction_is_idempotent() {
        let blocks = vec![
            (0, 0, ExactMatrix::from_i64(z2(), &[&[0, 1], &[0, 0]])),
            (0, 1, ExactMatrix::from_i64(z2(), &[&[1], &[0]])),
        ];
        let c =
            GradedDifferentialGroup::new(chain_poset(), z2(), vec![2, 1], None, &blocks).unwrap();
        let w = reduce(&c).unwrap();
        let w2 = reduce(&w.a).unwrap();
        assert_eq!(w2.a.d, w.a.d);
        assert_eq!(w2.a.ranks, w.a.ranks);
        assert_eq!(
            w2.f.matrix,
            ExactMatrix::identity(z2(), w.a.total_rank())
        );
    }

    #[test]
    fn permuted_pivots_give_valid_witnesses() {
        // A three-grade chain with a rank-two middle grade and an internal
        // cancellation pair; run all pivot priorities and verify each
        // witness independently.
        let poset = Poset::from_labels(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let blocks = vec![
            (1, 1, ExactMatrix::from_i64(z2(), &[&[0, 1], &[0, 0]])),
            (1, 2, ExactMatrix::from_i64(z2(), &[&[1], &[0]])),
            (0, 2, ExactMatrix::from_i64(z2(), &[&[1]])),
        ];
        let c =
            GradedDifferentialGroup::new(poset, z2(), vec![1, 2, 1], None, &blocks).unwrap();
        let n = c.total_rank();
        let priorities = [
            vec![0, 1, 2, 3],
            vec![3, 2, 1, 0],
            vec![1, 3, 0, 2],
            vec![2, 0, 3, 1],
        ];
        for pr in &priorities {
            assert_eq!(pr.len(), n);
            let w = reduce_with_priority(&c, pr).unwrap();
            assert!(w.a.is_strict());
            let fg = w.f.matrix.mul(&w.g.matrix);
            let id = ExactMatrix::identity(z2(), n);
            assert!(verify_homotopy(&c, &fg, &id, &w.h.matrix).unwrap());
        }
    }

    fn vee_ms(d_c_hits_b: bool) -> GradedDifferentialGroup {
        let poset = Poset::from_labels(&["a", "b", "c"], &[("a", "c"), ("b", "c")]).unwrap();
        let mut blocks = vec![(0, 2, ExactMatrix::from_i64(z2(), &[&[1]]))];
        if d_c_hits_b {
            blocks.push((1, 2, ExactMatrix::from_i64(z2(), &[&[1]])));
        }
        GradedDifferentialGroup::new(
            poset,
            z2(),
            vec![1, 1, 1],
            Some(vec![vec![0], vec![0], vec![1]]),
            &blocks,
        )
        .unwrap()
    }

    #[test]
    fn morse_smale_check_examples() {
        let c = vee_ms(true);
        let mu = MorseSmaleGrading { mu: vec![0, 0, 1] };
        assert!(check_morse_smale(&c, &mu).ok);

        // A rank-two grade fails.
        let poset = Poset::from_labels(&["a", "b"], &[("a", "b")]).unwrap();
        let wide = GradedDifferentialGroup::new(
            poset.clone(),
            z2(),
            vec![2, 1],
            Some(vec![vec![0, 0], vec![1]]),
            &[],
        )
        .unwrap();
        let check = check_morse_smale(&wide, &MorseSmaleGrading { mu: vec![0, 1] });
        assert!(!check.ok);
        assert!(check.reasons.iter().any(|r| r.contains("rank")));

        // Equal grading values on comparable elements fail.
        let flat = GradedDifferentialGroup::new(
            poset,
            z2(),
            vec![1, 1],
            Some(vec![vec![0], vec![0]]),
            &[],
        )
        .unwrap();
        let check = check_morse_smale(&flat, &MorseSmaleGrading { mu: vec![0, 0] });
        assert!(!check.ok);
    }

    #[test]
    fn certify_equal_and_distinct() {
        let c1 = vee_ms(true);
        let c2 = vee_ms(true);
        assert!(certify_unique_differential(&c1, &c2).unwrap());
        let c3 = vee_ms(false);
        assert!(!certify_unique_differential(&c1, &c3).unwrap());
    }

    #[test]
    fn certify_rejects_mismatched_gradings() {
        let poset = Poset::from_labels(&["a", "b"], &[("a", "b")]).unwrap();
        let mk = |mu: &[i64]| {
            GradedDifferentialGroup::new(
                poset.clone(),
                z2(),
                vec![1, 1],
                Some(vec![vec![mu[0]], vec![mu[1]]]),
                &[],
            )
            .unwrap()
        };
        let c1 = mk(&[0, 1]);
        let c2 = mk(&[0, 2]);
        assert!(matches!(
            certify_unique_differential(&c1, &c2),
            Err(Error::GradingMismatch(_))
        ));
    }
}
