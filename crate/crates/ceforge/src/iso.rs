//! Constructive filtered chain isomorphisms.
//!
//! Given two strict graded differential groups whose Cartan-Eilenberg
//! systems are isomorphic, this module builds an explicit filtered chain
//! isomorphism realizing that term-level data.  The construction walks a
//! linear extension of the poset: for each element `q` it extends the map
//! already built on the filtration subgroup of `↓q ∖ {q}` by one grade
//! ([`extend_step`]), then merges the result with the accumulated map
//! ([`merge_union`]).  The lower-level lemmas it rests on — lifting a
//! null-homologous map through a boundary, splitting a cycle subgroup off
//! a free group, and filling the off-diagonal corner of a lift — are
//! exposed as standalone operations with their own exact postconditions.

use crate::error::{Error, Result};
use crate::fgab::{homology, induced_hom, jointly_surjective, GroupHom, HomologyData};
use crate::graded::{FilteredChainMap, FiltrationCompatibility, GradedDifferentialGroup};
use crate::linalg::{
    inverse, kernel_basis, same_column_span, smith_normal_form, solve, ExactMatrix, Scalar,
};
use crate::poset::{DownSet, ElemMask};
use num::Zero;

/// Solve `d_a · l = h` column by column.
///
/// Requires `d_a · h = 0` (every column of `h` is a cycle) and that every
/// column of `h` has vanishing homology class; both are verified, and the
/// failing column is reported, since under these hypotheses a solution is
/// guaranteed and a failure signals a logic error in the caller.
pub fn lift_through_boundary(h: &ExactMatrix, d_a: &ExactMatrix) -> Result<ExactMatrix> {
    if d_a.rows != d_a.cols {
        return Err(Error::PreconditionFailed(
            "the differential matrix must be square".to_string(),
        ));
    }
    if h.rows != d_a.rows || h.coeffs != d_a.coeffs {
        return Err(Error::PreconditionFailed(format!(
            "map has {} rows but the differential acts on {} coordinates",
            h.rows, d_a.rows
        )));
    }
    if !d_a.mul(h).is_zero() {
        return Err(Error::PreconditionFailed(
            "the columns of the map are not cycles".to_string(),
        ));
    }
    let hom = homology(d_a)?;
    let mut l = ExactMatrix::zeros(h.coeffs, d_a.cols, h.cols);
    for j in 0..h.cols {
        let col = h.col(j);
        let class = hom.class_of(&col)?;
        if class.iter().any(|c| !c.is_zero()) {
            return Err(Error::PreconditionFailed(format!(
                "column {j} has nonzero homology class and is not a boundary"
            )));
        }
        let sol = solve(d_a, &col).ok_or_else(|| {
            Error::validation(
                "boundary lift",
                format!("column {j} is null-homologous but has no preimage"),
            )
        })?;
        for (i, s) in sol.iter().enumerate() {
            l.set(i, j, s.clone());
        }
    }
    Ok(l)
}

/// A basis of the domain of `lambda` adapted to the subgroup
/// `K = {z' : lambda z' ∈ im d_C}`.
///
/// The first `m_rank` columns of `basis` span the saturation `M` of `K`;
/// the remaining columns span a complement.  `omega[i] · basis_col_i` lies
/// in `K` for `i < m_rank` (the `omega[i]` are the invariant factors of
/// the inclusion of `K` into `M`; over a field they are all units and
/// `M = K`).  The homomorphism `sigma` (written in the standard basis of
/// the domain) satisfies
///
/// ```text
/// d_C · sigma · basis_col_i = −omega[i] · lambda · basis_col_i   (i < m_rank)
/// sigma · basis_col_i = 0                                        (i ≥ m_rank)
/// ```
///
/// so when `K` is saturated this is exactly `d_C σ = −λ` on `M` and
/// `σ = 0` on the complement.
#[derive(Debug, Clone)]
pub struct SplitCycles {
    /// Invertible change of basis on the domain of `lambda`.
    pub basis: ExactMatrix,
    /// Number of leading basis columns spanning the saturation of `K`.
    pub m_rank: usize,
    /// Scaling factors carrying each saturated basis vector into `K`.
    pub omega: Vec<Scalar>,
    /// The splitting homomorphism, in standard domain coordinates.
    pub sigma: ExactMatrix,
}

/// Split the domain of `lambda` along `K = {z' : lambda z' ∈ im d_C}`.
///
/// Requires `d_C · lambda = 0` (the columns of `lambda` are cycles).
/// Membership of each scaled basis vector in `K` and the defining
/// equations of `sigma` are re-verified before returning.
pub fn split_cycles(
    c_prime_rank: usize,
    lambda: &ExactMatrix,
    d_c: &ExactMatrix,
) -> Result<SplitCycles> {
    let coeffs = d_c.coeffs;
    if d_c.rows != d_c.cols {
        return Err(Error::PreconditionFailed(
            "the differential matrix must be square".to_string(),
        ));
    }
    if lambda.rows != d_c.rows || lambda.cols != c_prime_rank {
        return Err(Error::PreconditionFailed(format!(
            "connecting block is {}x{}, expected {}x{c_prime_rank}",
            lambda.rows, lambda.cols, d_c.rows
        )));
    }
    if !d_c.mul(lambda).is_zero() {
        return Err(Error::PreconditionFailed(
            "the columns of the connecting block are not cycles".to_string(),
        ));
    }
    let r = c_prime_rank;
    let n = d_c.rows;
    // Solutions (z', w) of lambda z' = d_C w; K is the projection to z'.
    let stacked = lambda.hstack(&d_c.neg());
    let kern = kernel_basis(&stacked);
    let all_cols: Vec<usize> = (0..kern.cols).collect();
    let k_generators = kern.submatrix(&(0..r).collect::<Vec<_>>(), &all_cols);
    let (basis, u, m_rank, omega) = if k_generators.cols == 0 {
        (
            ExactMatrix::identity(coeffs, r),
            ExactMatrix::identity(coeffs, r),
            0,
            Vec::new(),
        )
    } else {
        let snf = smith_normal_form(&k_generators);
        let basis = inverse(&snf.u).ok_or_else(|| {
            Error::validation("cycle splitting", "row transform is not invertible".to_string())
        })?;
        let diag = snf.diagonal();
        let m_rank = diag.iter().filter(|s| !s.is_zero()).count();
        let omega: Vec<Scalar> = diag.iter().take(m_rank).cloned().collect();
        (basis, snf.u, m_rank, omega)
    };
    // sigma on the adapted basis, then transported to standard coordinates.
    let mut sigma_cols = ExactMatrix::zeros(coeffs, n, r);
    for i in 0..m_rank {
        let b_i = basis.col(i);
        let scaled: Vec<Scalar> = lambda
            .mul_vec(&b_i)
            .into_iter()
            .map(|s| coeffs.neg(&coeffs.mul(&s, &omega[i])))
            .collect();
        let sol = solve(d_c, &scaled).ok_or_else(|| {
            Error::validation(
                "cycle splitting",
                format!("scaled basis vector {i} fails the defining membership"),
            )
        })?;
        for (row, s) in sol.iter().enumerate() {
            sigma_cols.set(row, i, s.clone());
        }
    }
    let sigma = sigma_cols.mul(&u);
    // Re-verify the defining property and the splitting identities.
    for i in 0..m_rank {
        let b_i = basis.col(i);
        let scaled: Vec<Scalar> = lambda
            .mul_vec(&b_i)
            .into_iter()
            .map(|s| coeffs.mul(&s, &omega[i]))
            .collect();
        if solve(d_c, &scaled).is_none() {
            return Err(Error::validation(
                "cycle splitting",
                format!("scaled basis vector {i} is not in the cycle subgroup"),
            ));
        }
        let lhs = d_c.mul_vec(&sigma.mul_vec(&b_i));
        if lhs
            .iter()
            .zip(scaled.iter())
            .any(|(a, b)| *a != coeffs.neg(b))
        {
            return Err(Error::validation(
                "cycle splitting",
                format!("the splitting map misses the scaled negative on basis vector {i}"),
            ));
        }
    }
    for i in m_rank..r {
        if sigma.mul_vec(&basis.col(i)).iter().any(|s| !s.is_zero()) {
            return Err(Error::validation(
                "cycle splitting",
                format!("the splitting map does not vanish on complement vector {i}"),
            ));
        }
    }
    Ok(SplitCycles { basis, m_rank, omega, sigma })
}

/// The data of the corner-filling lemma: a three-column ladder with free
/// top row `P' ⊕ P''`, middle row `Q' ⊕ Q''` (the direct-sum column of
/// each row is addressed through its left and right restrictions), and
/// bottom rows `D' → D → D''`, `B' → B → B''` with `0 → B' → B → B''`
/// exact.
///
/// The maps named `*_left` and `*_right` are the restrictions of the map
/// out of the direct sum to its summands, so no direct-sum presentation
/// is needed: `eta(x, y) = eta_left(x) + eta_right(y)`.
#[derive(Debug, Clone)]
pub struct GammaInput {
    /// `P' → Q'` (source free).
    pub f_prime: GroupHom,
    /// `P'' → Q''` (source free).
    pub f_dprime: GroupHom,
    /// `P' → D'`.
    pub eps_prime: GroupHom,
    /// `P' → D`, the restriction of the middle vertical to `P' ⊕ 0`.
    pub eps_left: GroupHom,
    /// `P'' → D`, the restriction to `0 ⊕ P''`.
    pub eps_right: GroupHom,
    /// `P'' → D''`.
    pub eps_dprime: GroupHom,
    /// `Q' → B'`; must be surjective.
    pub eta_prime: GroupHom,
    /// `Q' → B`, the restriction of the middle row map to `Q' ⊕ 0`.
    pub eta_left: GroupHom,
    /// `Q'' → B`, the restriction to `0 ⊕ Q''`.
    pub eta_right: GroupHom,
    /// `Q'' → B''`.
    pub eta_dprime: GroupHom,
    /// `D' → D`.
    pub i_d: GroupHom,
    /// `D → D''`.
    pub j_d: GroupHom,
    /// `B' → B`; must be injective with image `ker j_b`.
    pub i_b: GroupHom,
    /// `B → B''`.
    pub j_b: GroupHom,
    /// `D' → B'`.
    pub g_prime: GroupHom,
    /// `D → B`.
    pub g: GroupHom,
    /// `D'' → B''`.
    pub g_dprime: GroupHom,
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::PreconditionFailed(what.to_string()))
    }
}

fn sub_coords(coeffs: crate::linalg::Coefficients, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b.iter()).map(|(x, y)| coeffs.sub(x, y)).collect()
}

/// Fill the corner of a block-triangular lift.
///
/// Verifies the diagram hypotheses (surjectivity of `eta_prime`, exactness
/// of `0 → B' → B → B''`, freeness of the top row, and all commuting
/// squares), then produces `gamma: P'' → Q'` such that
/// `f = [[f', gamma], [0, f'']]` satisfies `g ∘ eps = eta ∘ f`.  Each
/// generator's obstruction is pulled back along the injection `i_b` and
/// lifted through the surjection `eta_prime`; if an obstruction class is
/// not in the image, the hypotheses were violated and the designated error
/// is returned.
pub fn construct_gamma(input: &GammaInput) -> Result<ExactMatrix> {
    let coeffs = input.g.matrix.coeffs;
    // Free top row.
    require(
        input.f_prime.source.torsion.is_empty(),
        "the left top group must be free",
    )?;
    require(
        input.f_dprime.source.torsion.is_empty(),
        "the right top group must be free",
    )?;
    require(
        input.f_prime.source == input.eps_prime.source
            && input.f_prime.source == input.eps_left.source,
        "the maps out of the left top group must share their source",
    )?;
    require(
        input.f_dprime.source == input.eps_right.source
            && input.f_dprime.source == input.eps_dprime.source,
        "the maps out of the right top group must share their source",
    )?;
    // Surjectivity of eta_prime onto B'.
    require(
        jointly_surjective(&[&input.eta_prime])?,
        "the left middle vertical must be surjective",
    )?;
    // 0 → B' → B → B'' exact: i_b injective and im i_b = ker j_b.
    let kernel = crate::fgab::kernel_lattice(&input.i_b);
    require(
        same_column_span(&kernel, &input.i_b.source.relation_matrix()),
        "the bottom-left map must be injective",
    )?;
    require(
        crate::fgab::exact_at(&input.i_b, &input.j_b)?,
        "the bottom row must be exact in the middle",
    )?;
    // Commuting squares of the given diagram.
    require(
        input.eta_prime.compose(&input.f_prime)? == input.g_prime.compose(&input.eps_prime)?,
        "the left face does not commute",
    )?;
    require(
        input.eta_dprime.compose(&input.f_dprime)? == input.g_dprime.compose(&input.eps_dprime)?,
        "the right face does not commute",
    )?;
    require(
        input.g.compose(&input.i_d)? == input.i_b.compose(&input.g_prime)?,
        "the bottom-left square does not commute",
    )?;
    require(
        input.g_dprime.compose(&input.j_d)? == input.j_b.compose(&input.g)?,
        "the bottom-right square does not commute",
    )?;
    require(
        input.eta_left == input.i_b.compose(&input.eta_prime)?,
        "the left middle restriction does not factor through the bottom-left map",
    )?;
    require(
        input.j_b.compose(&input.eta_left)?.is_zero(),
        "the left middle restriction must die in the bottom-right group",
    )?;
    require(
        input.j_b.compose(&input.eta_right)? == input.eta_dprime,
        "the right middle restriction does not project to the right vertical",
    )?;
    require(
        input.eps_left == input.i_d.compose(&input.eps_prime)?,
        "the left upper restriction does not factor through the bottom-left map",
    )?;
    require(
        input.j_d.compose(&input.eps_left)?.is_zero(),
        "the left upper restriction must die in the right group",
    )?;
    require(
        input.j_d.compose(&input.eps_right)? == input.eps_dprime,
        "the right upper restriction does not project to the right vertical",
    )?;

    let p2 = input.f_dprime.source.total_rank();
    let q1 = input.eta_prime.source.total_rank();
    let b_group = &input.g.target;
    let b1_group = &input.i_b.source;
    let i_b_aug = input.i_b.matrix.hstack(&b_group.relation_matrix());
    let eta_aug = input.eta_prime.matrix.hstack(&b1_group.relation_matrix());
    let mut gamma = ExactMatrix::zeros(coeffs, q1, p2);
    for t in 0..p2 {
        let mut unit = vec![Scalar::zero(); p2];
        unit[t] = crate::linalg::int(1);
        // Obstruction b_t = g(eps(0, y_t)) − eta(0, f''(y_t)).
        let lhs = input.g.apply(&input.eps_right.apply(&unit));
        let rhs = input.eta_right.apply(&input.f_dprime.apply(&unit));
        let b_t = b_group.canonical_coords(&sub_coords(coeffs, &lhs, &rhs));
        if input.j_b.apply(&b_t).iter().any(|s| !s.is_zero()) {
            return Err(Error::PreconditionFailed(format!(
                "obstruction of generator {t} survives to the bottom-right group"
            )));
        }
        let pulled = solve(&i_b_aug, &b_t).ok_or_else(|| {
            Error::PreconditionFailed(format!(
                "obstruction of generator {t} is not in the image of the bottom-left map"
            ))
        })?;
        let beta_t = b1_group.canonical_coords(&pulled[..b1_group.total_rank()]);
        let lifted = solve(&eta_aug, &beta_t).ok_or_else(|| {
            Error::PreconditionFailed(format!(
                "obstruction class of generator {t} is not in the image of the surjection"
            ))
        })?;
        let gamma_t = input.eta_prime.source.canonical_coords(&lifted[..q1]);
        for (i, s) in gamma_t.iter().enumerate() {
            gamma.set(i, t, s.clone());
        }
    }
    // Re-verify the corner condition.
    for t in 0..p2 {
        let mut unit = vec![Scalar::zero(); p2];
        unit[t] = crate::linalg::int(1);
        let lhs = input.g.apply(&input.eps_right.apply(&unit));
        let via_corner = input.eta_left.apply(&gamma.mul_vec(&unit));
        let via_diag = input.eta_right.apply(&input.f_dprime.apply(&unit));
        let rhs: Vec<Scalar> = via_corner
            .iter()
            .zip(via_diag.iter())
            .map(|(a, b)| coeffs.add(a, b))
            .collect();
        if b_group.canonical_coords(&lhs) != b_group.canonical_coords(&rhs) {
            return Err(Error::validation(
                "corner lift",
                format!("lift identity fails on generator {t}"),
            ));
        }
    }
    Ok(gamma)
}

/// State of the inductive construction: the region already built, the map
/// built on it, and the pending join-irreducible down-set to extend into.
#[derive(Debug)]
pub struct StepContext<'a> {
    pub source: &'a GradedDifferentialGroup,
    pub target: &'a GradedDifferentialGroup,
    /// Down-set on which `f_built` is defined.
    pub alpha: DownSet,
    /// Filtered chain isomorphism between the restrictions to `alpha`.
    pub f_built: &'a FilteredChainMap,
    /// Join-irreducible down-set `↓q` whose predecessor is contained in
    /// `alpha`.
    pub pending: DownSet,
}

/// Positions, within the compact coordinates of `mask`, of the generators
/// whose grade lies in `sub`.
fn positions_within(group: &GradedDifferentialGroup, mask: ElemMask, sub: ElemMask) -> Vec<usize> {
    group
        .indices_of(mask)
        .iter()
        .enumerate()
        .filter(|(_, &g)| sub >> group.grade_of(g) & 1 == 1)
        .map(|(pos, _)| pos)
        .collect()
}

/// Scatter the rows of `block` into a height-`rows` zero matrix at the
/// positions `row_pos` (all columns kept).
fn scatter_rows(
    coeffs: crate::linalg::Coefficients,
    rows: usize,
    row_pos: &[usize],
    block: &ExactMatrix,
) -> ExactMatrix {
    let mut m = ExactMatrix::zeros(coeffs, rows, block.cols);
    for (i, &r) in row_pos.iter().enumerate() {
        for j in 0..block.cols {
            m.set(r, j, block.at(i, j).clone());
        }
    }
    m
}

/// Transport a map of singleton terms to the chain level.  On a strict
/// group the differential vanishes on each singleton, so classes and
/// chains coincide up to the presentation recorded in the homology data;
/// the transported matrix is determined, not a choice.
fn chain_level_singleton_map(
    f_dd: &GroupHom,
    h_src: &HomologyData,
    h_tgt: &HomologyData,
) -> Result<ExactMatrix> {
    let n_src = h_src.cycles.rows;
    let n_tgt = h_tgt.cycles.rows;
    let coeffs = f_dd.matrix.coeffs;
    let mut m = ExactMatrix::zeros(coeffs, n_tgt, n_src);
    for j in 0..n_src {
        let mut unit = vec![Scalar::zero(); n_src];
        unit[j] = crate::linalg::int(1);
        let class = h_src.class_of(&unit)?;
        let image = h_tgt.representative(&f_dd.apply(&class));
        for (i, s) in image.iter().enumerate() {
            m.set(i, j, s.clone());
        }
    }
    Ok(m)
}

/// Extend a filtered chain isomorphism by one join-irreducible down-set.
///
/// `ctx.f_built` is the isomorphism already constructed on
/// `ctx.alpha ⊇ β†`, where `β = ctx.pending = ↓q` and `β† = β ∖ {q}`;
/// `f_dd` is the requested term map on the singleton `{q}` and `g` the
/// requested term map on `β`.  The homology ladder of the triple
/// `(∅, β†, β)` is checked against the map induced by the built
/// restriction; if any square fails, the input family is inconsistent and
/// [`Error::LadderNotCommuting`] names the square.  Otherwise the corner
/// block `γ` is found by solving, in one pass, the chain condition
/// `d_A γ = f' λ − λ' f''` together with the requirement that the induced
/// map on the term of `β` equals `g`; the result is the block-triangular
/// `[[f', γ], [0, f'']]`, re-verified to be a filtered chain isomorphism
/// with filtration equality inducing `g`.
pub fn extend_step(ctx: &StepContext, f_dd: &GroupHom, g: &GroupHom) -> Result<FilteredChainMap> {
    let source = ctx.source;
    let target = ctx.target;
    let poset = &source.poset;
    let coeffs = source.coeffs;
    if target.poset != *poset || target.coeffs != coeffs {
        return Err(Error::PreconditionFailed(
            "source and target must share their poset and coefficients".to_string(),
        ));
    }
    if !source.is_strict() || !target.is_strict() {
        return Err(Error::HypothesisViolated(
            "the construction requires strict differentials on both sides".to_string(),
        ));
    }
    let beta = ctx.pending;
    let bd = poset.immediate_predecessor(beta)?.0;
    let q_mask = beta.0 & !bd;
    if bd & !ctx.alpha.0 != 0 {
        return Err(Error::PreconditionFailed(
            "the predecessor of the pending down-set is not inside the built region".to_string(),
        ));
    }
    if !ctx.f_built.is_isomorphism() {
        return Err(Error::PreconditionFailed(
            "the built map is not an isomorphism".to_string(),
        ));
    }
    if !f_dd.is_isomorphism() {
        return Err(Error::PreconditionFailed(
            "the requested singleton term map is not an isomorphism".to_string(),
        ));
    }

    // Compact data on the predecessor and the new grade.
    let d1a = target.sub_differential(bd)?;
    let lam_c = source.differential_block(bd, q_mask);
    let lam_a = target.differential_block(bd, q_mask);
    let pos_bd_in_alpha_c = positions_within(source, ctx.alpha.0, bd);
    let pos_bd_in_alpha_a = positions_within(target, ctx.alpha.0, bd);
    let f1 = ctx
        .f_built
        .matrix
        .submatrix(&pos_bd_in_alpha_a, &pos_bd_in_alpha_c);

    let h1c = source.convex_homology(bd)?;
    let h1a = target.convex_homology(bd)?;
    let hbc = source.convex_homology(beta.0)?;
    let hba = target.convex_homology(beta.0)?;
    let hqc = source.convex_homology(q_mask)?;
    let hqa = target.convex_homology(q_mask)?;
    if g.source != hbc.group || g.target != hba.group {
        return Err(Error::PreconditionFailed(
            "the requested down-set term map has wrong endpoints".to_string(),
        ));
    }
    if f_dd.source != hqc.group || f_dd.target != hqa.group {
        return Err(Error::PreconditionFailed(
            "the requested singleton term map has wrong endpoints".to_string(),
        ));
    }

    // The homology ladder of the triple (∅, β†, β), checked against the
    // map the built restriction actually induces.
    let hprev = induced_hom(&f1, &h1c, &h1a)?;
    let i_c = induced_hom(&source.transfer_matrix(bd, beta.0), &h1c, &hbc)?;
    let i_a = induced_hom(&target.transfer_matrix(bd, beta.0), &h1a, &hba)?;
    let j_c = induced_hom(&source.transfer_matrix(beta.0, q_mask), &hbc, &hqc)?;
    let j_a = induced_hom(&target.transfer_matrix(beta.0, q_mask), &hba, &hqa)?;
    let k_c = induced_hom(&lam_c, &hqc, &h1c)?;
    let k_a = induced_hom(&lam_a, &hqa, &h1a)?;
    if g.compose(&i_c)? != i_a.compose(&hprev)? {
        return Err(Error::LadderNotCommuting(
            "inclusion square: the down-set map does not extend the predecessor map".to_string(),
        ));
    }
    if f_dd.compose(&j_c)? != j_a.compose(&g)? {
        return Err(Error::LadderNotCommuting(
            "projection square: the down-set map does not restrict to the singleton map"
                .to_string(),
        ));
    }
    if hprev.compose(&k_c)? != k_a.compose(&f_dd)? {
        return Err(Error::LadderNotCommuting(
            "connecting square: the singleton map does not intertwine the connecting maps"
                .to_string(),
        ));
    }

    // Chain-level diagonal block on the new grade.
    let fqq = chain_level_singleton_map(f_dd, &hqc, &hqa)?;
    if inverse(&fqq).is_none() {
        return Err(Error::PreconditionFailed(
            "the singleton term map is not invertible at the chain level".to_string(),
        ));
    }

    // Particular corner solving d_A γ = f' λ − λ' f''.
    let h_mat = f1.mul(&lam_c).sub(&lam_a.mul(&fqq));
    let gamma0 = lift_through_boundary(&h_mat, &d1a)?;
    let cycles_a = kernel_basis(&d1a);

    // Adjust γ within cycle-valued corrections so the induced map on the
    // term of β equals g: for every homology generator with representative
    // (z, z'), the image (f' z + γ z', f'' z') must differ from the
    // requested representative by a boundary.
    let idx_beta_c = source.indices_of(beta.0);
    let idx_beta_a = target.indices_of(beta.0);
    let nbc = idx_beta_c.len();
    let nba = idx_beta_a.len();
    let pos_bd_c = positions_within(source, beta.0, bd);
    let pos_q_c = positions_within(source, beta.0, q_mask);
    let pos_bd_a = positions_within(target, beta.0, bd);
    let pos_q_a = positions_within(target, beta.0, q_mask);
    let rqc = lam_c.cols;
    let kd = cycles_a.cols;
    let t_count = hbc.group.total_rank();
    let d_beta_a = target.sub_differential(beta.0)?;

    let gamma = if t_count == 0 || rqc == 0 || kd == 0 {
        gamma0
    } else {
        // Unknowns: the correction coefficients (kd · rqc entries,
        // column-major), then one boundary witness per homology generator
        // (nba entries each).
        let unknowns = kd * rqc + t_count * nba;
        let mut big = ExactMatrix::zeros(coeffs, t_count * nba, unknowns);
        let mut rhs = vec![Scalar::zero(); t_count * nba];
        // Predecessor cycles embedded into the coordinates of β.
        let ek = scatter_rows(coeffs, nba, &pos_bd_a, &cycles_a);
        for t in 0..t_count {
            let rep = hbc.representatives.col(t);
            let zb: Vec<Scalar> = pos_bd_c.iter().map(|&p| rep[p].clone()).collect();
            let zq: Vec<Scalar> = pos_q_c.iter().map(|&p| rep[p].clone()).collect();
            let base_bd: Vec<Scalar> = {
                let a = f1.mul_vec(&zb);
                let b = gamma0.mul_vec(&zq);
                a.iter().zip(b.iter()).map(|(x, y)| coeffs.add(x, y)).collect()
            };
            let base_q = fqq.mul_vec(&zq);
            let mut v0 = vec![Scalar::zero(); nba];
            for (i, &p) in pos_bd_a.iter().enumerate() {
                v0[p] = base_bd[i].clone();
            }
            for (i, &p) in pos_q_a.iter().enumerate() {
                v0[p] = base_q[i].clone();
            }
            let mut want_class = vec![Scalar::zero(); t_count];
            want_class[t] = crate::linalg::int(1);
            let want = hba.representative(&g.apply(&want_class));
            let row0 = t * nba;
            for i in 0..nba {
                rhs[row0 + i] = coeffs.sub(&want[i], &v0[i]);
            }
            // Correction block: column j of the correction contributes
            // zq[j] · (embedded cycle basis).
            for (j, zqj) in zq.iter().enumerate() {
                if zqj.is_zero() {
                    continue;
                }
                for r in 0..nba {
                    for k in 0..kd {
                        let add = coeffs.mul(zqj, ek.at(r, k));
                        if !add.is_zero() {
                            let col = j * kd + k;
                            let cur = big.at(row0 + r, col).clone();
                            big.set(row0 + r, col, coeffs.add(&cur, &add));
                        }
                    }
                }
            }
            // Boundary witness block: −d w_t on the coordinates of β.
            let wcol0 = kd * rqc + t * nba;
            for r in 0..nba {
                for c in 0..nba {
                    let val = d_beta_a.at(r, c);
                    if !val.is_zero() {
                        big.set(row0 + r, wcol0 + c, coeffs.neg(val));
                    }
                }
            }
        }
        let sol = solve(&big, &rhs).ok_or_else(|| {
            Error::CEIsoInconsistent(
                "the requested term map on the extended down-set has no chain-level realization"
                    .to_string(),
            )
        })?;
        let mut correction = ExactMatrix::zeros(coeffs, kd, rqc);
        for j in 0..rqc {
            for k in 0..kd {
                correction.set(k, j, sol[j * kd + k].clone());
            }
        }
        gamma0.add(&cycles_a.mul(&correction))
    };

    // Assemble the block-triangular extension in the compact coordinates
    // of β and re-verify everything it promises.
    let mut f_mat = ExactMatrix::zeros(coeffs, nba, nbc);
    for (i, &r) in pos_bd_a.iter().enumerate() {
        for (j, &c) in pos_bd_c.iter().enumerate() {
            f_mat.set(r, c, f1.at(i, j).clone());
        }
        for (j, &c) in pos_q_c.iter().enumerate() {
            f_mat.set(r, c, gamma.at(i, j).clone());
        }
    }
    for (i, &r) in pos_q_a.iter().enumerate() {
        for (j, &c) in pos_q_c.iter().enumerate() {
            f_mat.set(r, c, fqq.at(i, j).clone());
        }
    }
    let result = FilteredChainMap::new(source.restrict(beta.0)?, target.restrict(beta.0)?, f_mat)?;
    result.validate_map(FiltrationCompatibility::Equality)?;
    if !result.is_isomorphism() {
        return Err(Error::validation(
            "one-grade extension",
            "assembled block-triangular map is not invertible".to_string(),
        ));
    }
    let induced = induced_hom(&result.matrix, &hbc, &hba)?;
    if induced != *g {
        return Err(Error::validation(
            "one-grade extension",
            "assembled map does not induce the requested term map".to_string(),
        ));
    }
    Ok(result)
}

/// Merge two filtered chain maps defined on the restrictions to the
/// down-sets `a_mask` and `b_mask` into one on their union.
///
/// The maps must agree column-by-column on the generators of the
/// intersection ([`Error::AgreementFailure`] names the first offending
/// generator otherwise).  The chain condition is re-verified on the union
/// and filtration equality is checked on every down-set inside it.
pub fn merge_union(
    source: &GradedDifferentialGroup,
    target: &GradedDifferentialGroup,
    a_mask: DownSet,
    f_a: &FilteredChainMap,
    b_mask: DownSet,
    f_b: &FilteredChainMap,
) -> Result<FilteredChainMap> {
    let poset = &source.poset;
    poset.down_set(a_mask.0)?;
    poset.down_set(b_mask.0)?;
    let union = a_mask.0 | b_mask.0;
    let idx_u_c = source.indices_of(union);
    let idx_u_a = target.indices_of(union);
    let pos_in_union_c: std::collections::HashMap<usize, usize> =
        idx_u_c.iter().enumerate().map(|(p, &g)| (g, p)).collect();
    let pos_in_union_a: std::collections::HashMap<usize, usize> =
        idx_u_a.iter().enumerate().map(|(p, &g)| (g, p)).collect();

    // Column of `f` (defined on `mask`) for full generator `gen`,
    // scattered into union coordinates on the target side.
    let column_in_union = |f: &FilteredChainMap, mask: ElemMask, gen: usize| -> Vec<Scalar> {
        let idx_c = source.indices_of(mask);
        let idx_a = target.indices_of(mask);
        let j = idx_c.iter().position(|&g| g == gen).expect("generator in mask");
        let col = f.matrix.col(j);
        let mut out = vec![Scalar::zero(); idx_u_a.len()];
        for (i, &g) in idx_a.iter().enumerate() {
            if !col[i].is_zero() {
                out[pos_in_union_a[&g]] = col[i].clone();
            }
        }
        out
    };

    let overlap = a_mask.0 & b_mask.0;
    for &gen in &source.indices_of(overlap) {
        let ca = column_in_union(f_a, a_mask.0, gen);
        let cb = column_in_union(f_b, b_mask.0, gen);
        if ca != cb {
            return Err(Error::AgreementFailure(format!(
                "the two maps differ on generator {}",
                source.generator_name(gen)
            )));
        }
    }

    let coeffs = source.coeffs;
    let mut merged = ExactMatrix::zeros(coeffs, idx_u_a.len(), idx_u_c.len());
    for &gen in &idx_u_c {
        let grade = source.grade_of(gen);
        let col = if a_mask.0 >> grade & 1 == 1 {
            column_in_union(f_a, a_mask.0, gen)
        } else {
            column_in_union(f_b, b_mask.0, gen)
        };
        let j = pos_in_union_c[&gen];
        for (i, s) in col.iter().enumerate() {
            if !s.is_zero() {
                merged.set(i, j, s.clone());
            }
        }
    }
    let map = FilteredChainMap::new(source.restrict(union)?, target.restrict(union)?, merged)?;
    map.validate_map(FiltrationCompatibility::Equality)?;
    Ok(map)
}

/// The list of equalities verified on a constructed isomorphism.
#[derive(Debug, Clone, Default)]
pub struct IsoCertificate {
    pub lines: Vec<String>,
}

impl std::fmt::Display for IsoCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Build a filtered chain isomorphism realizing a verified family of term
/// isomorphisms between the systems of two strict graded differential
/// groups.
///
/// The poset is processed along its canonical linear extension; each
/// element extends the accumulated map by [`extend_step`] on its principal
/// down-set, and the result is merged in by [`merge_union`].  All free
/// choices are resolved deterministically (linear solves take the
/// canonical solution with vanishing free parameters), so identical inputs
/// produce identical matrices.  Returns the isomorphism together with a
/// certificate listing every equality verified on the final map.
pub fn build_filtered_iso(
    source: &GradedDifferentialGroup,
    target: &GradedDifferentialGroup,
    h: &crate::ce::CEIso,
) -> Result<(FilteredChainMap, IsoCertificate)> {
    let poset = &source.poset;
    if target.poset != *poset {
        return Err(Error::invalid(
            "the two groups are graded by different posets".to_string(),
        ));
    }
    if target.coeffs != source.coeffs {
        return Err(Error::invalid(
            "the two groups use different coefficient rings".to_string(),
        ));
    }
    if !source.is_strict() || !target.is_strict() {
        return Err(Error::HypothesisViolated(
            "the construction requires strict differentials on both sides".to_string(),
        ));
    }
    let system_c = crate::ce::CESystem::new(source.clone());
    let system_a = crate::ce::CESystem::new(target.clone());
    h.verify(&system_c, &system_a).map_err(|e| {
        Error::CEIsoInconsistent(format!("the given term family fails verification: {e}"))
    })?;

    let mut acc: Option<(DownSet, FilteredChainMap)> = None;
    let empty_map = FilteredChainMap::new(
        source.restrict(0)?,
        target.restrict(0)?,
        ExactMatrix::zeros(source.coeffs, 0, 0),
    )?;
    for q in poset.linear_extension() {
        let beta = DownSet(poset.down_mask(q));
        let q_mask: ElemMask = 1 << q;
        let (alpha, f_built) = match &acc {
            None => (DownSet(0), &empty_map),
            Some((mask, map)) => (*mask, map),
        };
        let ctx = StepContext { source, target, alpha, f_built, pending: beta };
        let g = h
            .component(beta.0)
            .map_err(|_| missing_component(poset, beta.0))?;
        let f_dd = h
            .component(q_mask)
            .map_err(|_| missing_component(poset, q_mask))?;
        let step = match extend_step(&ctx, f_dd, g) {
            Ok(step) => step,
            Err(Error::LadderNotCommuting(detail)) => {
                return Err(Error::CEIsoInconsistent(format!(
                    "the homology ladder at {} does not commute with the built map ({detail})",
                    poset.format_mask(beta.0)
                )))
            }
            Err(e) => return Err(e),
        };
        acc = Some(match acc {
            None => (beta, step),
            Some((mask, map)) => {
                let merged = merge_union(source, target, mask, &map, beta, &step)?;
                (DownSet(mask.0 | beta.0), merged)
            }
        });
    }
    let final_matrix = match acc {
        Some((_, map)) => map.matrix,
        None => ExactMatrix::zeros(source.coeffs, 0, 0),
    };
    let map = FilteredChainMap::new(source.clone(), target.clone(), final_matrix)?;

    let mut cert = IsoCertificate::default();
    cert.lines
        .push("chain condition d_target f = f d_source: verified".to_string());
    map.validate_map(FiltrationCompatibility::Equality)?;
    cert.lines
        .push("filtration equality f(F_a) = F_a for every down-set: verified".to_string());
    let inv = map.inverse()?;
    let conj = map.matrix.mul(&source.d).mul(&inv.matrix);
    if conj != target.d {
        return Err(Error::validation(
            "conjugacy",
            "constructed map does not conjugate the differentials".to_string(),
        ));
    }
    cert.lines
        .push("conjugacy f d_source f^{-1} = d_target: verified".to_string());
    let induced = crate::ce::CEIso::from_chain_map(&map, &system_c, &system_a)?;
    induced.verify(&system_c, &system_a)?;
    cert.lines.push(
        "induced term maps form an isomorphism of Cartan-Eilenberg systems: verified".to_string(),
    );
    let mut agree = 0usize;
    let mut total = 0usize;
    for (mask, hom) in &h.components {
        total += 1;
        if induced.component(*mask)? == hom {
            agree += 1;
        }
    }
    for q in 0..poset.len() {
        for mask in [poset.down_mask(q), 1 << q] {
            if induced.component(mask)? != h.component(mask)? {
                return Err(Error::validation(
                    "term reproduction",
                    format!(
                        "induced component at {} differs from the requested one",
                        poset.format_mask(mask)
                    ),
                ));
            }
        }
    }
    cert.lines.push(format!(
        "given components reproduced exactly on {agree} of {total} convex sets \
         (including all principal down-sets and singletons)"
    ));
    Ok((map, cert))
}

fn missing_component(poset: &crate::poset::Poset, mask: ElemMask) -> Error {
    Error::CEIsoInconsistent(format!(
        "no component supplied for the convex set {}",
        poset.format_mask(mask)
    ))
}
