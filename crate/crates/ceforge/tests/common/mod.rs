//! Randomized generators shared by the acceptance suite: posets, strict
//! and non-strict instances with exactly-zero-squaring differentials,
//! filtered unipotent conjugators, presentation-changing perturbations,
//! and Morse-Smale instances.

use ceforge::graded::GradedDifferentialGroup;
use ceforge::linalg::{int, Coefficients, ExactMatrix, Scalar};
use ceforge::poset::Poset;
use num::Zero;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random order on `n` elements, generated against a hidden topological
/// order so antisymmetry always holds.
pub fn random_poset(rng: &mut ChaCha8Rng, n: usize) -> Poset {
    let labels: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let mut relations = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.4) {
                relations.push((i, j));
            }
        }
    }
    let label_refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    let rel_refs: Vec<(&str, &str)> =
        relations.iter().map(|&(i, j)| (label_refs[i], label_refs[j])).collect();
    Poset::from_labels(&label_refs, &rel_refs).expect("indices follow a topological order")
}

fn random_unit(rng: &mut ChaCha8Rng, coeffs: Coefficients) -> Scalar {
    match coeffs {
        Coefficients::BinaryField => int(1),
        Coefficients::PrimeField(p) => int(rng.gen_range(1..p as i64)),
        Coefficients::IntegerRing | Coefficients::Rationals => {
            let v = *[-3i64, -2, -1, 1, 2, 3].choose(rng).unwrap();
            int(v)
        }
    }
}

fn random_entry(rng: &mut ChaCha8Rng, coeffs: Coefficients) -> Scalar {
    match coeffs {
        Coefficients::BinaryField => int(rng.gen_range(0..2)),
        Coefficients::PrimeField(p) => int(rng.gen_range(0..p as i64)),
        Coefficients::IntegerRing | Coefficients::Rationals => int(rng.gen_range(-3..=3)),
    }
}

/// A matching-model differential: some generator pairs `(x, y)` with
/// `grade(x) < grade(y)` (or equal grades when `allow_same_grade`) get
/// `d(y) = c·x`; every generator belongs to at most one pair, which makes
/// `d² = 0` automatic.  With `force_same_grade` the instance is guaranteed
/// non-strict.
pub fn random_matching_instance(
    rng: &mut ChaCha8Rng,
    poset: &Poset,
    max_rank: usize,
    coeffs: Coefficients,
    allow_same_grade: bool,
    force_same_grade: bool,
) -> GradedDifferentialGroup {
    let n = poset.len();
    loop {
        let mut ranks: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=max_rank)).collect();
        if force_same_grade && !ranks.iter().any(|&r| r >= 2) {
            ranks[rng.gen_range(0..n)] = 2.max(max_rank.min(2));
        }
        let total: usize = ranks.iter().sum();
        let mut offsets = vec![0usize; n];
        for p in 1..n {
            offsets[p] = offsets[p - 1] + ranks[p - 1];
        }
        let grade_of: Vec<usize> = (0..n)
            .flat_map(|p| std::iter::repeat(p).take(ranks[p]))
            .collect();
        let mut d = ExactMatrix::zeros(coeffs, total, total);
        let mut used = vec![false; total];
        if force_same_grade {
            let p = *(0..n)
                .filter(|&p| ranks[p] >= 2)
                .collect::<Vec<_>>()
                .choose(rng)
                .unwrap();
            let x = offsets[p];
            let y = offsets[p] + 1;
            d.set(x, y, random_unit(rng, coeffs));
            used[x] = true;
            used[y] = true;
        }
        let mut order: Vec<usize> = (0..total).collect();
        order.shuffle(rng);
        for idx in 0..order.len() {
            let y = order[idx];
            if used[y] || !rng.gen_bool(0.7) {
                continue;
            }
            let partners: Vec<usize> = (0..total)
                .filter(|&x| {
                    !used[x]
                        && x != y
                        && (poset.lt(grade_of[x], grade_of[y])
                            || (allow_same_grade && grade_of[x] == grade_of[y]))
                })
                .collect();
            if let Some(&x) = partners.choose(rng) {
                d.set(x, y, random_unit(rng, coeffs));
                used[x] = true;
                used[y] = true;
            }
        }
        match GradedDifferentialGroup::from_full_matrix(
            poset.clone(),
            coeffs,
            ranks,
            None,
            d,
        ) {
            Ok(g) => {
                if force_same_grade && g.is_strict() {
                    continue;
                }
                return g;
            }
            Err(_) => continue,
        }
    }
}

/// A strict random instance (no within-grade entries).
pub fn random_strict_instance(
    rng: &mut ChaCha8Rng,
    poset: &Poset,
    max_rank: usize,
    coeffs: Coefficients,
) -> GradedDifferentialGroup {
    random_matching_instance(rng, poset, max_rank, coeffs, false, false)
}

/// A random filtered automorphism matrix with identity within-grade
/// blocks and random entries strictly below the grade of their column.
pub fn random_filtered_unipotent(
    rng: &mut ChaCha8Rng,
    group: &GradedDifferentialGroup,
) -> ExactMatrix {
    let n = group.total_rank();
    let mut f = ExactMatrix::identity(group.coeffs, n);
    for i in 0..n {
        for j in 0..n {
            if group.poset.lt(group.grade_of(i), group.grade_of(j)) && rng.gen_bool(0.5) {
                f.set(i, j, random_entry(rng, group.coeffs));
            }
        }
    }
    f
}

/// Conjugate the differential by a filtered automorphism; the result is a
/// new instance over the same poset with an isomorphic term system.
pub fn conjugate(
    group: &GradedDifferentialGroup,
    f: &ExactMatrix,
) -> GradedDifferentialGroup {
    let f_inv = ceforge::linalg::inverse(f).expect("unipotent conjugator is invertible");
    let d_new = f.mul(&group.d).mul(&f_inv);
    GradedDifferentialGroup::from_full_matrix(
        group.poset.clone(),
        group.coeffs,
        group.ranks.clone(),
        group.degrees.clone(),
        d_new,
    )
    .expect("conjugation preserves the differential laws")
}

/// All convex-set term presentations of an instance, for cheap
/// distinguishability checks.
fn term_presentations(group: &GradedDifferentialGroup) -> Vec<ceforge::fgab::FgGroup> {
    let system = ceforge::ce::CESystem::new(group.clone());
    system
        .convex_masks()
        .into_iter()
        .map(|m| system.e_group(m).expect("masks are convex by construction"))
        .collect()
}

/// Change the differential of a matching-model instance (edit one pair
/// coefficient or toggle a pair) so that `d² = 0` still holds exactly and
/// some convex set's term presentation provably differs.  Returns `None`
/// if no admissible perturbation is found.
pub fn perturb_matching(
    rng: &mut ChaCha8Rng,
    group: &GradedDifferentialGroup,
) -> Option<GradedDifferentialGroup> {
    let original_terms = term_presentations(group);
    let n = group.total_rank();
    let coeffs = group.coeffs;
    for _ in 0..60 {
        let mut d = group.d.clone();
        // Candidate edits: change an existing entry, clear one, or add a
        // fresh pair between two untouched generators.
        let nonzero: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !d.at(i, j).is_zero())
            .collect();
        let choice = rng.gen_range(0..3);
        if choice == 0 && !nonzero.is_empty() && coeffs == Coefficients::IntegerRing {
            let &(i, j) = nonzero.choose(rng).unwrap();
            let old = d.at(i, j).clone();
            let mut new = random_unit(rng, coeffs);
            let two = int(2);
            if rng.gen_bool(0.5) {
                new = coeffs.mul(&old, &two);
            }
            if new == old {
                continue;
            }
            d.set(i, j, new);
        } else if choice == 1 && !nonzero.is_empty() {
            let &(i, j) = nonzero.choose(rng).unwrap();
            d.set(i, j, int(0));
        } else {
            let touched: Vec<bool> = (0..n)
                .map(|i| {
                    (0..n).any(|j| !d.at(i, j).is_zero() || !d.at(j, i).is_zero())
                })
                .collect();
            let free: Vec<usize> = (0..n).filter(|&i| !touched[i]).collect();
            let pairs: Vec<(usize, usize)> = free
                .iter()
                .flat_map(|&x| free.iter().map(move |&y| (x, y)))
                .filter(|&(x, y)| {
                    x != y && group.poset.lt(group.grade_of(x), group.grade_of(y))
                })
                .collect();
            let Some(&(x, y)) = pairs.choose(rng) else { continue };
            d.set(x, y, random_unit(rng, coeffs));
        }
        let Ok(candidate) = GradedDifferentialGroup::from_full_matrix(
            group.poset.clone(),
            coeffs,
            group.ranks.clone(),
            group.degrees.clone(),
            d,
        ) else {
            continue;
        };
        if term_presentations(&candidate) != original_terms {
            return Some(candidate);
        }
    }
    None
}

/// Longest-chain heights of the poset elements: the canonical strictly
/// order-preserving grading.
pub fn heights(poset: &Poset) -> Vec<i64> {
    let mut h = vec![0i64; poset.len()];
    for q in poset.linear_extension() {
        for p in 0..poset.len() {
            if poset.lt(p, q) {
                h[q] = h[q].max(h[p] + 1);
            }
        }
    }
    h
}

/// A random Morse-Smale instance: one binary-field generator per grade in
/// degree equal to the element's height, with a random degree-compatible
/// differential that squares to zero (found by rejection, with a matching
/// fallback).
pub fn random_ms_instance(rng: &mut ChaCha8Rng, poset: &Poset) -> GradedDifferentialGroup {
    let n = poset.len();
    let mu = heights(poset);
    let coeffs = Coefficients::BinaryField;
    let ranks = vec![1usize; n];
    let degrees: Vec<Vec<i64>> = mu.iter().map(|&m| vec![m]).collect();
    let allowed: Vec<(usize, usize)> = (0..n)
        .flat_map(|p| (0..n).map(move |q| (p, q)))
        .filter(|&(p, q)| poset.lt(p, q) && mu[q] == mu[p] + 1)
        .collect();
    for _ in 0..60 {
        let mut d = ExactMatrix::zeros(coeffs, n, n);
        for &(p, q) in &allowed {
            if rng.gen_bool(0.5) {
                d.set(p, q, int(1));
            }
        }
        if let Ok(g) = GradedDifferentialGroup::from_full_matrix(
            poset.clone(),
            coeffs,
            ranks.clone(),
            Some(degrees.clone()),
            d,
        ) {
            return g;
        }
    }
    // Matching fallback: at most one entry per row and per column.
    let mut d = ExactMatrix::zeros(coeffs, n, n);
    let mut used = vec![false; n];
    let mut shuffled = allowed.clone();
    shuffled.shuffle(rng);
    for (p, q) in shuffled {
        if !used[p] && !used[q] {
            d.set(p, q, int(1));
            used[p] = true;
            used[q] = true;
        }
    }
    GradedDifferentialGroup::from_full_matrix(poset.clone(), coeffs, ranks, Some(degrees), d)
        .expect("a matching differential squares to zero")
}
