//! Closed-form invertibility criteria.
//!
//! Spectrum pairing, invariant-subspace and double-commutator tests, Ad_K
//! eigenspace verification, the F_z diagonal and quantum-order formulas,
//! joint and individual z-rotation solvers, bipartite coupling-graph
//! criteria, and Cartan involution classification.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::flows::LocalUnitary;
use crate::linalg::{self, C64, OperatorMatrix, RoleTag};
use crate::pauli::{
    self, CouplingGraph, EdgeKind, HamiltonianSpec, PauliError, PauliLetter, PauliString,
    WeylIndex,
};
use crate::tol;

#[derive(Debug, Error)]
pub enum AlgebraicError {
    #[error("zero Hamiltonian")]
    ZeroHamiltonian,
    #[error("sign enumeration over {0} rows exceeds the supported 20")]
    TooManyRows(usize),
    #[error("k has components on multi-qubit Pauli strings")]
    NonLocalK,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("rotation angles admit no -1 eigenspace: {0}")]
    InconsistentAngles(String),
    #[error("coupling graph is disconnected")]
    DisconnectedGraph,
    #[error("coupling graph mixes interaction kinds; criteria apply per kind")]
    MixedEdgeKinds,
    #[error("dimension {0} is not even")]
    OddDimension(usize),
    #[error("rotation axis must be normalized")]
    InvalidAxis,
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

// ---------------------------------------------------------------------------
// Spectrum pairing

/// A Hamiltonian is invertible by *some* unitary conjugation iff its nonzero
/// eigenvalues pair as {+λ, -λ} with multiplicity; for local inversion this
/// is necessary only. Returns the verdict and the sorted spectrum.
pub fn spectrum_pairing_check(h: &OperatorMatrix) -> Result<(bool, Vec<f64>), AlgebraicError> {
    let norm = h.fro_norm();
    if norm < 1e-14 {
        return Err(AlgebraicError::ZeroHamiltonian);
    }
    let (vals, _) = linalg::eigh(&h.mat);
    let spectrum: Vec<f64> = vals.iter().cloned().collect();
    let tol_abs = tol::DEFAULT.spectrum_pair_rel * norm;
    let mut rem: Vec<f64> = spectrum.iter().cloned().filter(|v| v.abs() > tol_abs).collect();
    rem.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut paired = true;
    while let Some(smallest) = rem.first().cloned() {
        rem.remove(0);
        // match the most negative remaining value against its mirror
        match rem
            .iter()
            .position(|v| (v + smallest).abs() <= tol_abs)
        {
            Some(pos) => {
                rem.remove(pos);
            }
            None => {
                paired = false;
                break;
            }
        }
    }
    Ok((paired, spectrum))
}

/// Closed-form spectrum of α·xx + β·yy + γ·zz.
pub fn xyz_eigenvalues(alpha: f64, beta: f64, gamma: f64) -> [f64; 4] {
    [
        alpha + beta - gamma,
        -alpha + beta + gamma,
        alpha - beta + gamma,
        -alpha - beta - gamma,
    ]
}

// ---------------------------------------------------------------------------
// F_z diagonal and quantum orders

/// 2·(F_z)_ii for a 1-based index: Σ_k (-1)^{b_k} over the n binary digits
/// of i-1.
pub fn fz_diagonal_halves(n: usize, i: usize) -> Result<i64, AlgebraicError> {
    let dim = 1usize << n;
    if i < 1 || i > dim {
        return Err(PauliError::IndexOutOfRange(i, dim).into());
    }
    let bits = (i - 1) as u64;
    let ones = bits.count_ones() as i64;
    Ok(n as i64 - 2 * ones)
}

/// (F_z)_ii = ½ Σ_k (-1)^{b_k} with (i-1)₂ = Σ 2^k b_k.
pub fn fz_diagonal(n: usize, i: usize) -> Result<f64, AlgebraicError> {
    Ok(fz_diagonal_halves(n, i)? as f64 / 2.0)
}

/// Quantum order p of the Weyl element E_ij: the ad_{F_z} eigenvalue
/// p = (F_z)_ii - (F_z)_jj, always an integer.
pub fn weyl_order(idx: &WeylIndex) -> Result<i64, AlgebraicError> {
    if idx.i == idx.j {
        return Err(PauliError::DiagonalIndex(idx.i).into());
    }
    let hi = fz_diagonal_halves(idx.n, idx.i)?;
    let hj = fz_diagonal_halves(idx.n, idx.j)?;
    Ok((hi - hj) / 2)
}

/// Joint z-rotation angle π/|p| inverting an order-p element (None at p = 0).
pub fn weyl_joint_z_angle(p: i64) -> Option<f64> {
    if p == 0 {
        None
    } else {
        Some(PI / p.unsigned_abs() as f64)
    }
}

/// Largest inversion angle for order p: π/2^{v₂(|p|)} (p/2^{v₂} is odd).
pub fn reduced_joint_z_angle(p: i64) -> Option<f64> {
    if p == 0 {
        None
    } else {
        let r = 1i64 << p.unsigned_abs().trailing_zeros();
        Some(PI / r as f64)
    }
}

// ---------------------------------------------------------------------------
// Order-row expansion in the {1, z, +, -} basis

/// Per-qubit ladder letter after rewriting x, y in the ±-basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NuLetter {
    One,
    Z,
    Plus,
    Minus,
}

impl NuLetter {
    pub fn order(self) -> i8 {
        match self {
            NuLetter::Plus => 1,
            NuLetter::Minus => -1,
            _ => 0,
        }
    }
}

/// One product term of the ±-basis expansion with its per-qubit orders.
#[derive(Debug, Clone)]
pub struct OrderRow {
    pub pattern: Vec<NuLetter>,
    pub amplitude: C64,
    pub orders: Vec<i8>,
}

/// Expand a single Pauli string in the ±-basis: x = σ₊ + σ₋,
/// y = -i(σ₊ - σ₋); letters 1 and z keep order zero.
pub fn expand_term(term: &PauliString, half_spin: bool) -> Vec<OrderRow> {
    let mut scale = term.coefficient;
    if half_spin {
        scale *= 0.5f64.powi(term.weight() as i32);
    }
    let mut rows: Vec<(Vec<NuLetter>, C64)> = vec![(Vec::new(), C64::new(scale, 0.0))];
    for &l in &term.letters {
        let branches: Vec<(NuLetter, C64)> = match l {
            PauliLetter::I => vec![(NuLetter::One, C64::new(1.0, 0.0))],
            PauliLetter::Z => vec![(NuLetter::Z, C64::new(1.0, 0.0))],
            PauliLetter::X => vec![
                (NuLetter::Plus, C64::new(1.0, 0.0)),
                (NuLetter::Minus, C64::new(1.0, 0.0)),
            ],
            PauliLetter::Y => vec![
                (NuLetter::Plus, C64::new(0.0, -1.0)),
                (NuLetter::Minus, C64::new(0.0, 1.0)),
            ],
        };
        let mut next = Vec::with_capacity(rows.len() * branches.len());
        for (pattern, amp) in &rows {
            for (nl, factor) in &branches {
                let mut p = pattern.clone();
                p.push(*nl);
                next.push((p, amp * factor));
            }
        }
        rows = next;
    }
    rows.into_iter()
        .map(|(pattern, amplitude)| {
            let orders = pattern.iter().map(|l| l.order()).collect();
            OrderRow { pattern, amplitude, orders }
        })
        .collect()
}

/// ±-basis expansion of the whole Hamiltonian with cross-term cancellation:
/// rows sharing a ν-pattern merge, and rows with vanishing amplitude drop.
pub fn pauli_order_rows(h: &HamiltonianSpec) -> Vec<OrderRow> {
    let mut merged: BTreeMap<Vec<NuLetter>, C64> = BTreeMap::new();
    for term in &h.terms {
        for row in expand_term(term, h.half_spin_convention) {
            *merged.entry(row.pattern).or_insert(C64::new(0.0, 0.0)) += row.amplitude;
        }
    }
    let max_amp = merged.values().map(|a| a.norm()).fold(0.0f64, f64::max);
    merged
        .into_iter()
        .filter(|(_, a)| a.norm() > 1e-12 * max_amp.max(1e-300))
        .map(|(pattern, amplitude)| {
            let orders = pattern.iter().map(|l| l.order()).collect();
            OrderRow { pattern, amplitude, orders }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Joint and individual z-rotation solvers

/// Search a single angle φ with Ad_{exp(-iφF_z)}(H) = -H among φ = π/r,
/// r = 1..2n. A candidate must invert every total quantum order present and
/// is accepted only after the exact matrix verification.
pub fn joint_z_inversion(h: &HamiltonianSpec) -> Result<Option<f64>, AlgebraicError> {
    if h.is_zero() {
        return Err(AlgebraicError::ZeroHamiltonian);
    }
    let rows = pauli_order_rows(h);
    let mut totals: Vec<i64> = rows
        .iter()
        .map(|r| r.orders.iter().map(|&o| o as i64).sum())
        .collect();
    totals.sort_unstable();
    totals.dedup();

    let hm = pauli::build_matrix(h);
    let hnorm = hm.fro_norm();
    for r in 1..=(2 * h.n as i64) {
        let all_inverted = totals.iter().all(|&p| p % r == 0 && (p / r).rem_euclid(2) == 1);
        if !all_inverted {
            continue;
        }
        let phi = PI / r as f64;
        let k = LocalUnitary::z_rotations(&vec![phi; h.n]);
        let kd = k.full();
        let residual = (&kd * &hm.mat * kd.adjoint() + &hm.mat).norm() / hnorm;
        if residual < tol::DEFAULT.witness_rel {
            return Ok(Some(phi));
        }
    }
    Ok(None)
}

/// A verified solution of the z-rotation linear system P φ = π s (mod 2π).
#[derive(Debug, Clone)]
pub struct ZRotationSolution {
    pub angles: Vec<f64>,
    pub sign_choice: Vec<i8>,
    /// max_λ |Σ_ℓ p_{λ,ℓ} φ_ℓ - s_λ π mod 2π|
    pub residual: f64,
}

fn wrap_to_pi(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = x % two_pi;
    if r > PI {
        r -= two_pi;
    } else if r < -PI {
        r += two_pi;
    }
    r
}

/// Search individual per-qubit z-rotation angles inverting H. Order rows are
/// deduplicated (rows equal up to global sign impose the same constraint
/// mod 2π); sign vectors are enumerated over the principal branch
/// P φ = π s and every candidate is verified by the exact matrix condition.
pub fn individual_z_inversion(
    h: &HamiltonianSpec,
) -> Result<Option<ZRotationSolution>, AlgebraicError> {
    if h.is_zero() {
        return Err(AlgebraicError::ZeroHamiltonian);
    }
    let rows = pauli_order_rows(h);
    let n = h.n;

    // dedupe order rows up to global sign
    let mut unique: Vec<Vec<i8>> = Vec::new();
    for row in &rows {
        let mut key = row.orders.clone();
        if let Some(first) = key.iter().find(|&&o| o != 0) {
            if *first < 0 {
                key = key.iter().map(|o| -o).collect();
            }
        }
        if !unique.contains(&key) {
            unique.push(key);
        }
    }
    unique.sort();
    let m = unique.len();
    if m > 20 {
        return Err(AlgebraicError::TooManyRows(m));
    }

    let p = DMatrix::<f64>::from_fn(m, n, |r, c| unique[r][c] as f64);
    let svd = p.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let eps = tol::DEFAULT.svd_rank_rel * max_sv.max(1e-300);

    let hm = pauli::build_matrix(h);
    let hnorm = hm.fro_norm();

    // fix s₁ = +1: s and -s give φ and -φ = conjugate witnesses
    let combos = 1usize << m.saturating_sub(1);
    for bits in 0..combos {
        let mut signs = vec![1i8; m];
        for (idx, s) in signs.iter_mut().enumerate().skip(1) {
            if (bits >> (m - 1 - idx)) & 1 == 1 {
                *s = -1;
            }
        }
        let rhs = DVector::<f64>::from_iterator(m, signs.iter().map(|&s| PI * s as f64));
        let phi = match svd.solve(&rhs, eps) {
            Ok(sol) => sol,
            Err(_) => continue,
        };
        let angles: Vec<f64> = phi.iter().cloned().collect();
        let k = LocalUnitary::z_rotations(&angles);
        let kd = k.full();
        let matrix_residual = (&kd * &hm.mat * kd.adjoint() + &hm.mat).norm() / hnorm;
        if matrix_residual < tol::DEFAULT.witness_rel {
            let lin_residual = unique
                .iter()
                .zip(signs.iter())
                .map(|(row, &s)| {
                    let dot: f64 =
                        row.iter().zip(angles.iter()).map(|(&p, &a)| p as f64 * a).sum();
                    wrap_to_pi(dot - s as f64 * PI).abs()
                })
                .fold(0.0f64, f64::max);
            if lin_residual < tol::DEFAULT.z_solver_residual {
                return Ok(Some(ZRotationSolution { angles, sign_choice: signs, residual: lin_residual }));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Invariant subspace criterion

/// Necessary condition: the orthocomplement of the commutant
/// I_H = {a : [a, H] = 0} inside su(2^n) must intersect the local
/// subalgebra k nontrivially. Computed from the null space of ad_H over the
/// traceless Pauli basis and a rank test on its local coordinates.
pub fn invariant_subspace_check(h: &OperatorMatrix) -> Result<bool, AlgebraicError> {
    if h.fro_norm() < 1e-14 {
        return Err(AlgebraicError::ZeroHamiltonian);
    }
    let n = h.n_qubits();
    let total = 4usize.pow(n as u32);
    let coeffs = pauli::pauli_decompose(&h.mat);

    // ad_H over traceless Hermitian Pauli coordinates: [P_j, H] = i Σ_m γ_mj P_m
    let dim_basis = total - 1;
    let mut gamma = DMatrix::<f64>::zeros(dim_basis, dim_basis);
    for j in 1..total {
        let pj = pauli::index_pattern(j, n);
        for (k, &ck) in coeffs.iter().enumerate().skip(1) {
            if ck == 0.0 {
                continue;
            }
            let pk = pauli::index_pattern(k, n);
            if pauli::pauli_commute(&pj, &pk) {
                continue;
            }
            let (phase, prod) = pauli::pauli_mul(&pj, &pk);
            let m_idx = pauli::pattern_index(&prod);
            debug_assert!(m_idx > 0);
            let ph = pauli::phase_to_c64(phase);
            // [P_j, P_k] = 2·ph·P_m with ph = ±i
            gamma[(m_idx - 1, j - 1)] += 2.0 * ck * ph.im;
        }
    }

    let svd = gamma.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd computed with right vectors");
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = tol::DEFAULT.svd_rank_rel * max_sv.max(1e-300);
    let null_rows: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(i, _)| i)
        .collect();
    // rows of v_t beyond the singular-value count also span the null space
    let extra = (svd.singular_values.len()..v_t.nrows()).collect::<Vec<_>>();

    // local coordinates: the 3n weight-one Pauli indices
    let mut local_indices = Vec::with_capacity(3 * n);
    for l in 0..n {
        for letter in [PauliLetter::X, PauliLetter::Y, PauliLetter::Z] {
            let mut letters = vec![PauliLetter::I; n];
            letters[l] = letter;
            local_indices.push(pauli::pattern_index(&letters) - 1);
        }
    }

    let null_count = null_rows.len() + extra.len();
    if null_count == 0 {
        // trivial commutant: all of k is in the orthocomplement
        return Ok(true);
    }
    let mut n_loc = DMatrix::<f64>::zeros(null_count, 3 * n);
    for (r, &row) in null_rows.iter().chain(extra.iter()).enumerate() {
        for (c, &li) in local_indices.iter().enumerate() {
            n_loc[(r, c)] = v_t[(row, li)];
        }
    }
    let svd2 = n_loc.svd(false, false);
    let max2 = svd2.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cut2 = tol::DEFAULT.svd_rank_rel * max2.max(1e-300);
    let rank = svd2.singular_values.iter().filter(|&&s| s > cut2).count();
    Ok(rank < 3 * n)
}

// ---------------------------------------------------------------------------
// Double commutator criterion

fn assert_local_pauli_support(k: &OperatorMatrix) -> Result<(), AlgebraicError> {
    let coeffs = pauli::pauli_decompose(&k.mat);
    let n = k.n_qubits();
    let scale = coeffs.iter().map(|c| c.abs()).fold(0.0f64, f64::max);
    for (idx, &c) in coeffs.iter().enumerate() {
        if c.abs() > 1e-10 * scale.max(1e-300) {
            let weight = pauli::index_pattern(idx, n)
                .iter()
                .filter(|&&l| l != PauliLetter::I)
                .count();
            if weight > 1 {
                return Err(AlgebraicError::NonLocalK);
            }
        }
    }
    Ok(())
}

/// Sufficient condition: [k, [k, H]] = H for a local Hermitian k implies
/// exp(-iπk) inverts H.
pub fn double_commutator_check(
    h: &OperatorMatrix,
    k: &OperatorMatrix,
) -> Result<bool, AlgebraicError> {
    if h.dim() != k.dim() {
        return Err(AlgebraicError::DimensionMismatch(h.dim(), k.dim()));
    }
    assert_local_pauli_support(k)?;
    let hnorm = h.fro_norm();
    if hnorm < 1e-14 {
        return Err(AlgebraicError::ZeroHamiltonian);
    }
    let inner = &k.mat * &h.mat - &h.mat * &k.mat;
    let outer = &k.mat * &inner - &inner * &k.mat;
    let ok = (&outer - &h.mat).norm() < tol::DEFAULT.witness_rel * hnorm;
    if ok {
        // the derived inverter must check out as well
        let g = OperatorMatrix { mat: &k.mat * C64::new(0.0, -PI), role: RoleTag::SkewHermitian };
        let ku = linalg::expm_skew(&g)?;
        let residual = (&ku.mat * &h.mat * ku.mat.adjoint() + &h.mat).norm() / hnorm;
        debug_assert!(residual < 1e-8, "double-commutator witness failed: {}", residual);
    }
    Ok(ok)
}

/// Scan k = σ_ν^(ℓ)/2 over all qubits and axes; on success returns the
/// generator string and the π-pulse local unitary it induces.
pub fn find_single_pauli_double_commutator(
    h: &OperatorMatrix,
) -> Result<Option<(PauliString, LocalUnitary)>, AlgebraicError> {
    let n = h.n_qubits();
    let hnorm = h.fro_norm();
    if hnorm < 1e-14 {
        return Err(AlgebraicError::ZeroHamiltonian);
    }
    for l in 0..n {
        for (axis_idx, letter) in [PauliLetter::X, PauliLetter::Y, PauliLetter::Z]
            .into_iter()
            .enumerate()
        {
            let mut letters = vec![PauliLetter::I; n];
            letters[l] = letter;
            let term = PauliString::new(letters.clone(), 1.0);
            let mut km = DMatrix::<C64>::zeros(h.dim(), h.dim());
            term.accumulate_into(&mut km, 0.5);
            let inner = &km * &h.mat - &h.mat * &km;
            let outer = &km * &inner - &inner * &km;
            if (&outer - &h.mat).norm() < tol::DEFAULT.witness_rel * hnorm {
                let mut axis = [0.0f64; 3];
                axis[axis_idx] = 1.0;
                let mut params = vec![([0.0, 0.0, 1.0], 0.0); n];
                params[l] = (axis, PI);
                let witness = LocalUnitary::from_axis_angles(&params);
                return Ok(Some((PauliString::new(letters, 0.5), witness)));
            }
        }
    }
    Ok(None)
}

/// Normalized inversion residual ‖K H K† + H‖_F / ‖H‖_F; a witness is
/// accepted below 1e-9.
pub fn verify_inversion(h: &OperatorMatrix, k: &LocalUnitary) -> Result<f64, AlgebraicError> {
    let kd = k.full();
    if kd.nrows() != h.dim() {
        return Err(AlgebraicError::DimensionMismatch(kd.nrows(), h.dim()));
    }
    let hnorm = h.fro_norm();
    if hnorm < 1e-14 {
        return Err(AlgebraicError::ZeroHamiltonian);
    }
    Ok((&kd * &h.mat * kd.adjoint() + &h.mat).norm() / hnorm)
}

// ---------------------------------------------------------------------------
// Ad_K eigenspace verification

/// Per-qubit rotation parameters (axis, angle) for K = ⊗ exp(-i β/2 n·σ).
#[derive(Debug, Clone)]
pub struct RotationParams {
    pub axes: Vec<[f64; 3]>,
    pub angles: Vec<f64>,
}

impl RotationParams {
    pub fn new(axes: Vec<[f64; 3]>, angles: Vec<f64>) -> Result<Self, AlgebraicError> {
        if axes.len() != angles.len() {
            return Err(AlgebraicError::DimensionMismatch(axes.len(), angles.len()));
        }
        let mut normed = Vec::with_capacity(axes.len());
        for a in axes {
            let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(AlgebraicError::InvalidAxis);
            }
            normed.push([a[0] / norm, a[1] / norm, a[2] / norm]);
        }
        Ok(RotationParams { axes: normed, angles })
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }
}

/// The ∓1 eigenvectors v_± of n·σ; the n_z → -1 limit is handled explicitly.
fn axis_eigenvectors(axis: [f64; 3]) -> (nalgebra::Vector2<C64>, nalgebra::Vector2<C64>) {
    let (nx, ny, nz) = (axis[0], axis[1], axis[2]);
    if 1.0 + nz < 1e-12 {
        return (
            nalgebra::Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            nalgebra::Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        );
    }
    let denom = (2.0 * (1.0 + nz)).sqrt();
    let v_plus = nalgebra::Vector2::new(
        C64::new(-nx / denom, ny / denom),
        C64::new((1.0 + nz) / denom, 0.0),
    );
    let v_minus = nalgebra::Vector2::new(
        C64::new((1.0 + nz) / denom, 0.0),
        C64::new(nx / denom, ny / denom),
    );
    (v_plus, v_minus)
}

/// Project vec(H) onto the -1 eigenspace of Ad_K for K built from the
/// rotation parameters, returning ‖vec H - projection‖/‖H‖. Zero means H is
/// inverted by K(params). The eigenspace basis is the set of products of
/// per-qubit eigenvectors whose eigenvalue phases sum to π (mod 2π); an
/// empty selection means the angles admit no inversion subtype.
pub fn adk_eigenspace_expand(
    h: &OperatorMatrix,
    params: &RotationParams,
) -> Result<f64, AlgebraicError> {
    let n = params.n();
    if h.n_qubits() != n {
        return Err(AlgebraicError::DimensionMismatch(h.n_qubits(), n));
    }
    let hnorm = h.fro_norm();
    if hnorm < 1e-14 {
        return Err(AlgebraicError::ZeroHamiltonian);
    }
    let dim = h.dim();
    let eigvecs: Vec<_> = params.axes.iter().map(|&a| axis_eigenvectors(a)).collect();

    let vh = linalg::vec_of(h);
    let mut projection = DVector::<C64>::zeros(dim * dim);
    let mut selected = 0usize;

    // combos: per qubit (a, b) ∈ {+, -}²; eigenvalue phase of v̄_a ⊗ v_b under
    // K*⊗K is (β/2)(b - a) with ± read as ±1
    for combo in 0..(1usize << (2 * n)) {
        let mut phase = 0.0f64;
        for l in 0..n {
            let a_plus = (combo >> (2 * l)) & 1 == 0;
            let b_plus = (combo >> (2 * l + 1)) & 1 == 0;
            let a_sign = if a_plus { 1.0 } else { -1.0 };
            let b_sign = if b_plus { 1.0 } else { -1.0 };
            phase += params.angles[l] / 2.0 * (b_sign - a_sign);
        }
        let dist = {
            let r = (phase - PI).rem_euclid(2.0 * PI);
            r.min(2.0 * PI - r)
        };
        if dist > 1e-8 {
            continue;
        }
        selected += 1;
        // w = conj(u_a) ⊗ u_b = vec(u_b u_a†), orthonormal across combos
        let mut ua = DVector::<C64>::from_element(1, C64::new(1.0, 0.0));
        let mut ub = ua.clone();
        for (l, (vp, vm)) in eigvecs.iter().enumerate() {
            let a_plus = (combo >> (2 * l)) & 1 == 0;
            let b_plus = (combo >> (2 * l + 1)) & 1 == 0;
            let va = if a_plus { vp } else { vm };
            let vb = if b_plus { vp } else { vm };
            ua = ua.kronecker(&DVector::from_column_slice(va.as_slice()));
            ub = ub.kronecker(&DVector::from_column_slice(vb.as_slice()));
        }
        let mut w = DVector::<C64>::zeros(dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                w[j * dim + i] = ua[j].conj() * ub[i];
            }
        }
        let coeff = w.dotc(&vh);
        projection += w * coeff;
    }

    if selected == 0 {
        return Err(AlgebraicError::InconsistentAngles(format!(
            "angles {:?} reach no -1 eigenvalue product",
            params.angles
        )));
    }
    Ok((vh - projection).norm() / hnorm)
}

// ---------------------------------------------------------------------------
// Bipartite coupling-graph criteria

#[derive(Debug, Clone)]
pub enum BipartiteMechanism {
    /// π-pulses on one color class; the vector holds each vertex's color.
    Coloring(Vec<u8>),
    /// Joint z-rotation by π/2 on every qubit (double-quantum kind).
    JointHalfPi,
}

#[derive(Debug, Clone)]
pub enum BipartiteVerdict {
    Invertible { witness: LocalUnitary, mechanism: BipartiteMechanism, residual: f64 },
    NotInvertible { odd_cycle: Vec<usize> },
}

fn two_color(g: &CouplingGraph) -> Result<Vec<u8>, Vec<usize>> {
    let mut adj = vec![Vec::new(); g.n];
    for e in &g.edges {
        adj[e.k].push(e.l);
        adj[e.l].push(e.k);
    }
    let mut color = vec![u8::MAX; g.n];
    let mut parent = vec![usize::MAX; g.n];
    let mut queue = std::collections::VecDeque::new();
    color[0] = 0;
    queue.push_back(0usize);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if color[w] == u8::MAX {
                color[w] = 1 - color[v];
                parent[w] = v;
                queue.push_back(w);
            } else if color[w] == color[v] {
                // odd cycle: paths to the common ancestor plus edge (v, w)
                let mut anc = Vec::new();
                let mut u = v;
                while u != usize::MAX {
                    anc.push(u);
                    u = parent[u];
                }
                let mut path_w = Vec::new();
                let mut u = w;
                let lca_pos = loop {
                    if let Some(pos) = anc.iter().position(|&x| x == u) {
                        break pos;
                    }
                    path_w.push(u);
                    u = parent[u];
                };
                let mut cycle: Vec<usize> = anc[..=lca_pos].to_vec();
                cycle.reverse();
                cycle.extend(path_w.iter().rev().cloned());
                return Err(cycle.iter().map(|&x| x + 1).collect());
            }
        }
    }
    Ok(color)
}

/// Decide local invertibility of a homogeneous-kind coupling graph:
/// zz and xy(κ ≠ -1) interactions invert iff the graph is bipartite
/// (π-pulses on one color class, ⊥-to-z axis for zz, z-axis for xy);
/// the double-quantum kind inverts on any connected topology via a joint
/// π/2 z-rotation. Every witness is re-verified before being returned.
pub fn bipartite_invertibility(g: &CouplingGraph) -> Result<BipartiteVerdict, AlgebraicError> {
    if !g.is_connected() {
        return Err(AlgebraicError::DisconnectedGraph);
    }
    if !g.kinds_homogeneous() {
        return Err(AlgebraicError::MixedEdgeKinds);
    }
    let hm = pauli::build_matrix(&pauli::graph_to_hamiltonian(g));
    let kind = g.edges[0].kind;

    if matches!(kind, EdgeKind::XmX) {
        let witness = LocalUnitary::z_rotations(&vec![PI / 2.0; g.n]);
        let residual = verify_inversion(&hm, &witness)?;
        debug_assert!(residual < tol::DEFAULT.witness_rel);
        return Ok(BipartiteVerdict::Invertible {
            witness,
            mechanism: BipartiteMechanism::JointHalfPi,
            residual,
        });
    }

    match two_color(g) {
        Ok(colors) => {
            let axis = match kind {
                EdgeKind::ZZ => [1.0, 0.0, 0.0],
                _ => [0.0, 0.0, 1.0],
            };
            let params: Vec<([f64; 3], f64)> = colors
                .iter()
                .map(|&c| (axis, if c == 0 { PI } else { 0.0 }))
                .collect();
            let witness = LocalUnitary::from_axis_angles(&params);
            let residual = verify_inversion(&hm, &witness)?;
            debug_assert!(residual < tol::DEFAULT.witness_rel);
            Ok(BipartiteVerdict::Invertible {
                witness,
                mechanism: BipartiteMechanism::Coloring(colors),
                residual,
            })
        }
        Err(cycle) => Ok(BipartiteVerdict::NotInvertible { odd_cycle: cycle }),
    }
}

// ---------------------------------------------------------------------------
// Cartan involutions

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Involution {
    CC,
    AI,
    AII,
    AIII,
}

impl Involution {
    pub const ALL: [Involution; 4] = [Involution::CC, Involution::AI, Involution::AII, Involution::AIII];

    pub fn label(&self) -> &'static str {
        match self {
            Involution::CC => "CC",
            Involution::AI => "AI",
            Involution::AII => "AII",
            Involution::AIII => "AIII",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    K,
    P,
    Mixed,
}

impl Membership {
    pub fn label(&self) -> &'static str {
        match self {
            Membership::K => "k",
            Membership::P => "p",
            Membership::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartanLabel {
    pub involution: Involution,
    pub membership: Membership,
}

fn conj_entrywise(m: &DMatrix<C64>) -> DMatrix<C64> {
    m.map(|z| z.conj())
}

/// Membership of iH in the ±1 eigenspaces of a Cartan-like involution:
/// θ_CC(X) = (-iσ_y)^⊗n X* adj, θ_AI(X) = X*, θ_AII(X) = J X* J⁻¹ with the
/// standard symplectic J, θ_AIII(X) = I_{p,q} X I_{p,q} with p = q = N/2.
pub fn cartan_classify(
    h: &OperatorMatrix,
    which: Involution,
) -> Result<CartanLabel, AlgebraicError> {
    let dim = h.dim();
    let x = &h.mat * C64::i();
    let theta_x = match which {
        Involution::AI => conj_entrywise(&x),
        Involution::CC => {
            let msy = PauliLetter::Y.matrix() * C64::new(0.0, -1.0);
            let mut y = DMatrix::<C64>::identity(1, 1);
            for _ in 0..h.n_qubits() {
                y = y.kronecker(&msy);
            }
            &y * conj_entrywise(&x) * y.adjoint()
        }
        Involution::AII => {
            if !dim.is_multiple_of(2) {
                return Err(AlgebraicError::OddDimension(dim));
            }
            let half = DMatrix::<C64>::identity(dim / 2, dim / 2);
            let isy = PauliLetter::Y.matrix() * C64::i();
            let j = isy.kronecker(&half);
            &j * conj_entrywise(&x) * j.adjoint()
        }
        Involution::AIII => {
            let mut ipq = DMatrix::<C64>::identity(dim, dim);
            for i in dim / 2..dim {
                ipq[(i, i)] = C64::new(-1.0, 0.0);
            }
            &ipq * &x * &ipq
        }
    };
    let norm = x.norm().max(1e-300);
    let membership = if (&theta_x - &x).norm() < 1e-10 * norm {
        Membership::K
    } else if (&theta_x + &x).norm() < 1e-10 * norm {
        Membership::P
    } else {
        Membership::Mixed
    };
    Ok(CartanLabel { involution: which, membership })
}

// ---------------------------------------------------------------------------
// Multi-graph decomposition

/// Terms of one interaction order on one connected support component.
#[derive(Debug, Clone)]
pub struct InteractionGroup {
    pub order: usize,
    pub support: std::collections::BTreeSet<usize>,
    pub terms: Vec<PauliString>,
}

/// Group Hamiltonian terms by interaction order and connected support.
/// A candidate K inverts the total iff it inverts every group individually,
/// since order and support assignment are Ad_K invariant.
pub fn multigraph_decompose(h: &HamiltonianSpec) -> Vec<InteractionGroup> {
    let mut by_order: BTreeMap<usize, Vec<&PauliString>> = BTreeMap::new();
    for t in &h.terms {
        by_order.entry(t.weight()).or_default().push(t);
    }
    let mut groups = Vec::new();
    for (order, terms) in by_order {
        // union-find over qubits within this order
        let mut parent: Vec<usize> = (0..h.n).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for t in &terms {
            let support = t.support();
            for w in support.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut comps: BTreeMap<usize, InteractionGroup> = BTreeMap::new();
        for t in &terms {
            let root = find(&mut parent, t.support()[0]);
            let entry = comps.entry(root).or_insert_with(|| InteractionGroup {
                order,
                support: Default::default(),
                terms: Vec::new(),
            });
            entry.support.extend(t.support());
            entry.terms.push((*t).clone());
        }
        groups.extend(comps.into_values());
    }
    groups
}

/// Residual of a witness on each group separately.
pub fn verify_inversion_groupwise(
    h: &HamiltonianSpec,
    k: &LocalUnitary,
) -> Result<Vec<(InteractionGroup, f64)>, AlgebraicError> {
    let groups = multigraph_decompose(h);
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        let sub = HamiltonianSpec {
            n: h.n,
            terms: g.terms.clone(),
            half_spin_convention: h.half_spin_convention,
        };
        let hm = pauli::build_matrix(&sub);
        let r = verify_inversion(&hm, k)?;
        out.push((g, r));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::parse_hamiltonian;

    fn build(text: &str, n: usize) -> OperatorMatrix {
        pauli::build_matrix(&parse_hamiltonian(text, n).unwrap())
    }

    #[test]
    fn spectrum_pairing_examples() {
        let (ok, spec) = spectrum_pairing_check(&build("zz", 2)).unwrap();
        assert!(ok);
        assert_eq!(spec.len(), 4);

        let (ok, spec) = spectrum_pairing_check(&build("xx+yy+zz", 2)).unwrap();
        assert!(!ok);
        assert!((spec[0] + 3.0).abs() < 1e-10);

        // γ = 0, α = 2, β = 1: {3, -1, 1, -3} pairs
        let (ok, _) = spectrum_pairing_check(&build("2xx+yy", 2)).unwrap();
        assert!(ok);

        let zero = OperatorMatrix { mat: DMatrix::zeros(2, 2), role: RoleTag::Hermitian };
        assert!(matches!(
            spectrum_pairing_check(&zero),
            Err(AlgebraicError::ZeroHamiltonian)
        ));
    }

    #[test]
    fn xyz_formula_matches_eigensolver() {
        assert_eq!(xyz_eigenvalues(1.0, 1.0, 1.0), [1.0, 1.0, 1.0, -3.0]);
        assert_eq!(xyz_eigenvalues(0.0, 0.0, 0.0), [0.0; 4]);

        let (alpha, beta, gamma) = (1.0, -1.0, 0.0);
        let m = build("xx-yy", 2);
        let (vals, _) = linalg::eigh(&m.mat);
        let mut want = xyz_eigenvalues(alpha, beta, gamma).to_vec();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, w) in vals.iter().zip(want.iter()) {
            assert!((v - w).abs() < 1e-10);
        }
    }

    #[test]
    fn fz_diagonal_values() {
        assert_eq!(fz_diagonal(1, 1).unwrap(), 0.5);
        assert_eq!(fz_diagonal(1, 2).unwrap(), -0.5);
        for n in 1..=8 {
            assert_eq!(fz_diagonal(n, 1).unwrap(), n as f64 / 2.0);
        }
        assert_eq!(fz_diagonal(6, 47).unwrap(), -1.0);
        assert_eq!(fz_diagonal(6, 11).unwrap(), 1.0);
        assert!(fz_diagonal(2, 5).is_err());
        assert!(fz_diagonal(2, 0).is_err());
    }

    #[test]
    fn weyl_orders() {
        assert_eq!(weyl_order(&WeylIndex::new(8, 15, 4).unwrap()).unwrap(), 0);
        assert_eq!(weyl_order(&WeylIndex::new(1, 2, 1).unwrap()).unwrap(), 1);
        assert_eq!(weyl_order(&WeylIndex::new(47, 11, 6).unwrap()).unwrap(), -2);
        assert!(weyl_order(&WeylIndex::new(3, 3, 2).unwrap()).is_err());

        // commutator oracle: ad_{F_z}(E_ij) = p E_ij, exhaustive n = 2
        let fz = pauli::collective_fz(2).unwrap();
        for i in 1..=4usize {
            for j in 1..=4usize {
                if i == j {
                    continue;
                }
                let idx = WeylIndex::new(i, j, 2).unwrap();
                let e = pauli::weyl_matrix(&idx);
                let comm = &fz.mat * &e.mat - &e.mat * &fz.mat;
                let p = weyl_order(&idx).unwrap() as f64;
                assert!((comm - &e.mat * C64::new(p, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn order_rows_examples() {
        let rows = pauli_order_rows(&parse_hamiltonian("xx-yy", 2).unwrap());
        let mut orders: Vec<Vec<i8>> = rows.iter().map(|r| r.orders.clone()).collect();
        orders.sort();
        assert_eq!(orders, vec![vec![-1, -1], vec![1, 1]]);

        let rows = pauli_order_rows(&parse_hamiltonian("zz", 2).unwrap());
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].orders, vec![0, 0]);

        let rows = pauli_order_rows(&parse_hamiltonian("xx+yy", 2).unwrap());
        let mut orders: Vec<Vec<i8>> = rows.iter().map(|r| r.orders.clone()).collect();
        orders.sort();
        assert_eq!(orders, vec![vec![-1, 1], vec![1, -1]]);
    }

    #[test]
    fn expansion_matches_dense_rebuild() {
        // Σ rows (amplitude × ladder pattern) must rebuild H exactly
        let spec = parse_hamiltonian("xy + 0.5*yx - zz + x1", 2).unwrap();
        let rows = pauli_order_rows(&spec);
        let dim = 4usize;
        let mut rebuilt = DMatrix::<C64>::zeros(dim, dim);
        for row in &rows {
            // dense ladder product
            let mut m = DMatrix::<C64>::identity(1, 1);
            for l in &row.pattern {
                let f = match l {
                    NuLetter::One => DMatrix::<C64>::identity(2, 2),
                    NuLetter::Z => PauliLetter::Z.matrix(),
                    NuLetter::Plus => {
                        DMatrix::from_row_slice(2, 2, &[
                            C64::new(0.0, 0.0),
                            C64::new(1.0, 0.0),
                            C64::new(0.0, 0.0),
                            C64::new(0.0, 0.0),
                        ])
                    }
                    NuLetter::Minus => {
                        DMatrix::from_row_slice(2, 2, &[
                            C64::new(0.0, 0.0),
                            C64::new(0.0, 0.0),
                            C64::new(1.0, 0.0),
                            C64::new(0.0, 0.0),
                        ])
                    }
                };
                m = m.kronecker(&f);
            }
            rebuilt += m * row.amplitude;
        }
        let want = pauli::build_matrix(&spec);
        assert!((rebuilt - &want.mat).norm() < 1e-12);
    }

    #[test]
    fn joint_z_solver() {
        assert_eq!(
            joint_z_inversion(&parse_hamiltonian("xx-yy", 2).unwrap()).unwrap(),
            Some(PI / 2.0)
        );
        assert_eq!(joint_z_inversion(&parse_hamiltonian("zz", 2).unwrap()).unwrap(), None);
        assert_eq!(joint_z_inversion(&parse_hamiltonian("xx+yy", 2).unwrap()).unwrap(), None);
    }

    #[test]
    fn individual_z_solver() {
        let sol = individual_z_inversion(&parse_hamiltonian("xx+yy", 2).unwrap())
            .unwrap()
            .expect("flip-flop is individually z-invertible");
        let diff = wrap_to_pi(sol.angles[0] - sol.angles[1]);
        assert!((diff.abs() - PI).abs() < 1e-9);

        let sol = individual_z_inversion(&parse_hamiltonian("xx-yy", 2).unwrap())
            .unwrap()
            .expect("double-quantum is individually z-invertible");
        let total = wrap_to_pi(sol.angles[0] + sol.angles[1]);
        assert!((total.abs() - PI).abs() < 1e-9);

        assert!(individual_z_inversion(&parse_hamiltonian("zz", 2).unwrap())
            .unwrap()
            .is_none());
    }

    #[test]
    fn invariant_subspace_examples() {
        assert!(invariant_subspace_check(&build("x1", 2)).unwrap());
        assert!(invariant_subspace_check(&build("zz", 2)).unwrap());
        // necessary-only: XXX passes via the antisymmetric local combination
        assert!(invariant_subspace_check(&build("xx+yy+zz", 2)).unwrap());
    }

    #[test]
    fn double_commutator_examples() {
        let h = build("zz", 2);
        let mut k = DMatrix::<C64>::zeros(4, 4);
        PauliString::new(vec![PauliLetter::X, PauliLetter::I], 1.0).accumulate_into(&mut k, 0.5);
        let k = OperatorMatrix::hermitian(k).unwrap();
        assert!(double_commutator_check(&h, &k).unwrap());

        let mut kz = DMatrix::<C64>::zeros(4, 4);
        PauliString::new(vec![PauliLetter::Z, PauliLetter::I], 1.0).accumulate_into(&mut kz, 0.5);
        let kz = OperatorMatrix::hermitian(kz).unwrap();
        assert!(!double_commutator_check(&h, &kz).unwrap());

        let hx = build("x1", 2);
        assert!(double_commutator_check(&hx, &kz).unwrap());

        // non-local k rejected
        let knl = build("zz", 2);
        assert!(matches!(
            double_commutator_check(&h, &knl),
            Err(AlgebraicError::NonLocalK)
        ));
    }

    #[test]
    fn verify_inversion_examples() {
        let h = build("zz", 2);
        let k = LocalUnitary::from_axis_angles(&[([1.0, 0.0, 0.0], PI), ([0.0, 0.0, 1.0], 0.0)]);
        assert!(verify_inversion(&h, &k).unwrap() < 1e-12);

        let id = LocalUnitary::identity(2);
        assert!((verify_inversion(&h, &id).unwrap() - 2.0).abs() < 1e-12);

        let h = build("xx-yy", 2);
        let k = LocalUnitary::z_rotations(&[PI / 2.0, PI / 2.0]);
        assert!(verify_inversion(&h, &k).unwrap() < 1e-12);
    }

    #[test]
    fn adk_eigenspace_examples() {
        // zz against a π x-pulse on qubit 1 (subtype with β₂ = 0)
        let h = build("zz", 2);
        let params = RotationParams::new(
            vec![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            vec![PI, 0.0],
        )
        .unwrap();
        assert!(adk_eigenspace_expand(&h, &params).unwrap() < 1e-12);

        // flip-flop xx+yy against antisymmetric z-rotations (both-rotated subtype)
        let h = build("xx+yy", 2);
        let params = RotationParams::new(
            vec![[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
            vec![PI / 2.0, -PI / 2.0],
        )
        .unwrap();
        assert!(adk_eigenspace_expand(&h, &params).unwrap() < 1e-12);

        // zz is z-rotation invariant: full residual
        let h = build("zz", 2);
        let params = RotationParams::new(
            vec![[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
            vec![PI / 2.0, PI / 2.0],
        )
        .unwrap();
        let r = adk_eigenspace_expand(&h, &params).unwrap();
        assert!((r - 1.0).abs() < 1e-12);

        // angles admitting no -1 product
        let params = RotationParams::new(
            vec![[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]],
            vec![0.3, 0.4],
        )
        .unwrap();
        assert!(matches!(
            adk_eigenspace_expand(&h, &params),
            Err(AlgebraicError::InconsistentAngles(_))
        ));
    }

    #[test]
    fn bipartite_examples() {
        let c4 = CouplingGraph::new(
            4,
            vec![
                (1, 2, EdgeKind::ZZ, 1.0),
                (2, 3, EdgeKind::ZZ, 1.0),
                (3, 4, EdgeKind::ZZ, 1.0),
                (1, 4, EdgeKind::ZZ, 1.0),
            ],
        )
        .unwrap();
        match bipartite_invertibility(&c4).unwrap() {
            BipartiteVerdict::Invertible { mechanism: BipartiteMechanism::Coloring(c), residual, .. } => {
                assert!(residual < 1e-12);
                assert_eq!(c[0], c[2]);
                assert_eq!(c[1], c[3]);
                assert_ne!(c[0], c[1]);
            }
            other => panic!("expected coloring witness, got {:?}", other),
        }

        let c3 = CouplingGraph::new(
            3,
            vec![
                (1, 2, EdgeKind::ZZ, 1.0),
                (2, 3, EdgeKind::ZZ, 1.0),
                (1, 3, EdgeKind::ZZ, 1.0),
            ],
        )
        .unwrap();
        match bipartite_invertibility(&c3).unwrap() {
            BipartiteVerdict::NotInvertible { odd_cycle } => {
                assert_eq!(odd_cycle.len() % 2, 1);
                let mut sorted = odd_cycle.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, vec![1, 2, 3]);
            }
            other => panic!("expected odd cycle, got {:?}", other),
        }

        let c3x = CouplingGraph::new(
            3,
            vec![
                (1, 2, EdgeKind::XmX, 1.0),
                (2, 3, EdgeKind::XmX, 1.0),
                (1, 3, EdgeKind::XmX, 1.0),
            ],
        )
        .unwrap();
        match bipartite_invertibility(&c3x).unwrap() {
            BipartiteVerdict::Invertible { mechanism: BipartiteMechanism::JointHalfPi, residual, .. } => {
                assert!(residual < 1e-12);
            }
            other => panic!("expected joint π/2 witness, got {:?}", other),
        }

        let mixed = CouplingGraph::new(
            2,
            vec![(1, 2, EdgeKind::ZZ, 1.0)],
        )
        .unwrap();
        assert!(bipartite_invertibility(&mixed).is_ok());

        let disconnected = CouplingGraph {
            n: 4,
            edges: vec![GraphEdgeHelper::edge(0, 1), GraphEdgeHelper::edge(2, 3)],
        };
        assert!(matches!(
            bipartite_invertibility(&disconnected),
            Err(AlgebraicError::DisconnectedGraph)
        ));
    }

    struct GraphEdgeHelper;
    impl GraphEdgeHelper {
        fn edge(k: usize, l: usize) -> pauli::GraphEdge {
            pauli::GraphEdge { k, l, kind: EdgeKind::ZZ, weight: 1.0 }
        }
    }

    #[test]
    fn cartan_examples() {
        // zz: CC p, AI p, AIII k
        let h = build("zz", 2);
        assert_eq!(cartan_classify(&h, Involution::CC).unwrap().membership, Membership::P);
        assert_eq!(cartan_classify(&h, Involution::AI).unwrap().membership, Membership::P);
        assert_eq!(cartan_classify(&h, Involution::AIII).unwrap().membership, Membership::K);

        // x1: AI p (spec-pinned row)
        let h = build("x1", 2);
        assert_eq!(cartan_classify(&h, Involution::AI).unwrap().membership, Membership::P);

        // xxx+yyy+zzz at n = 3: AI mixed
        let h = build("xxx+yyy+zzz", 3);
        assert_eq!(cartan_classify(&h, Involution::AI).unwrap().membership, Membership::Mixed);
    }

    #[test]
    fn multigraph_grouping() {
        let h = parse_hamiltonian("zz1+z1z+1zz+zzz", 3).unwrap();
        let groups = multigraph_decompose(&h);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].order, 2);
        assert_eq!(groups[0].terms.len(), 3);
        assert_eq!(groups[1].order, 3);
        assert_eq!(groups[1].terms.len(), 1);

        // example 9: single order-2 group on the full triangle support
        let h = parse_hamiltonian("zz1+z1z+1zz", 3).unwrap();
        let groups = multigraph_decompose(&h);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].support.len(), 3);

        // a witness inverting zzz alone fails the order-2 group
        let h = parse_hamiltonian("zz1+z1z+1zz+zzz", 3).unwrap();
        let k = LocalUnitary::from_axis_angles(&[
            ([1.0, 0.0, 0.0], PI),
            ([0.0, 0.0, 1.0], 0.0),
            ([0.0, 0.0, 1.0], 0.0),
        ]);
        let per_group = verify_inversion_groupwise(&h, &k).unwrap();
        let order3 = per_group.iter().find(|(g, _)| g.order == 3).unwrap();
        assert!(order3.1 < 1e-12);
        let order2 = per_group.iter().find(|(g, _)| g.order == 2).unwrap();
        assert!(order2.1 > 1e-3);
        // hence the combined Hamiltonian is not inverted by that K
        let hm = pauli::build_matrix(&h);
        assert!(verify_inversion(&hm, &k).unwrap() > 1e-3);
    }
}
