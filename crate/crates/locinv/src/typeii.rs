//! Two-qubit pointwise-invertibility classification by superoperator
//! symmetry.
//!
//! Complex matrices are carried as real vectors vec(M_Re) ⊕ vec(M_Im). In
//! that representation the adjoining map M ↦ M† becomes the real matrix
//! [[T̂, 0], [0, -T̂]] with T̂ the transposition permutation, while a local
//! pair acts as the blocked form of K̂ = K₂ᵗ ⊗ K₁. No local pair matches the
//! adjoining map fully; the maximal partial overlaps fall into four families
//! A, B, C, D (by which per-qubit factors are diagonal or antidiagonal) with
//! four sign patterns each, and each class forces a symmetry on the matrices
//! it adjoins. Scope is fixed at two qubits; for more qubits only the
//! subtype counting is exposed.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::flows::LocalUnitary;
use crate::linalg::{C64, OperatorMatrix};
use crate::tol;

const DIM: usize = 4;
const VDIM: usize = 16;

#[derive(Debug, Error)]
pub enum TypeIIError {
    #[error("operation requires exactly two qubits, got {0}")]
    WrongQubitCount(usize),
    #[error("matrix does not satisfy the structural template of the subtype")]
    SymmetryViolation,
    #[error("real superoperator block structure violated: {0}")]
    BlockStructure(String),
    #[error("bad subtype id '{0}'")]
    BadSubtypeId(String),
}

// ---------------------------------------------------------------------------
// Real superoperator representation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperopKind {
    /// [[Re, -Im], [Im, Re]] of a complex-linear unitary map; orthogonal.
    UnitaryInduced,
    /// [[T̂, 0], [0, -T̂]]: the (antilinear) adjoining map.
    Adjoining,
    /// [[Ĉ, 0], [0, -Ĉ]]: Hadamard overlap with the adjoining map.
    Coincidence,
}

/// 32×32 real matrix acting on vec(M_Re) ⊕ vec(M_Im) for M ∈ Mat₄(ℂ).
#[derive(Debug, Clone)]
pub struct RealSuperoperator {
    pub m: DMatrix<f64>,
    pub kind: SuperopKind,
}

impl RealSuperoperator {
    pub fn new(m: DMatrix<f64>, kind: SuperopKind) -> Result<Self, TypeIIError> {
        if m.nrows() != 2 * VDIM || m.ncols() != 2 * VDIM {
            return Err(TypeIIError::BlockStructure(format!(
                "expected {0}×{0}, got {1}×{2}",
                2 * VDIM,
                m.nrows(),
                m.ncols()
            )));
        }
        let a = m.view((0, 0), (VDIM, VDIM));
        let b = m.view((0, VDIM), (VDIM, VDIM));
        let c = m.view((VDIM, 0), (VDIM, VDIM));
        let d = m.view((VDIM, VDIM), (VDIM, VDIM));
        match kind {
            SuperopKind::UnitaryInduced => {
                let block_defect = (a - d).norm().max((b + c).norm());
                if block_defect > 1e-12 {
                    return Err(TypeIIError::BlockStructure(format!(
                        "[[Re,-Im],[Im,Re]] defect {:.3e}",
                        block_defect
                    )));
                }
                let ortho = (&m * m.transpose() - DMatrix::<f64>::identity(2 * VDIM, 2 * VDIM))
                    .norm();
                if ortho > tol::DEFAULT.unitary_fro {
                    return Err(TypeIIError::BlockStructure(format!(
                        "orthogonality defect {:.3e}",
                        ortho
                    )));
                }
            }
            SuperopKind::Adjoining | SuperopKind::Coincidence => {
                let block_defect = (a + d).norm().max(b.norm()).max(c.norm());
                if block_defect > 1e-12 {
                    return Err(TypeIIError::BlockStructure(format!(
                        "[[X,0],[0,-X]] defect {:.3e}",
                        block_defect
                    )));
                }
            }
        }
        Ok(RealSuperoperator { m, kind })
    }

    /// Top-left 16×16 block (K̂_Re, T̂ or Ĉ respectively).
    pub fn top_block(&self) -> DMatrix<f64> {
        self.m.view((0, 0), (VDIM, VDIM)).into_owned()
    }

    /// Imaginary block K̂_Im (zero for adjoining/coincidence kinds).
    pub fn im_block(&self) -> DMatrix<f64> {
        self.m.view((VDIM, 0), (VDIM, VDIM)).into_owned()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m * v
    }

    /// Apply to a complex 4×4 matrix through the split representation.
    pub fn apply_to_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let out = self.apply(&vec_split(m));
        unsplit(&out)
    }
}

/// vec(M_Re) ⊕ vec(M_Im), column-major.
pub fn vec_split(m: &DMatrix<C64>) -> DVector<f64> {
    let mut v = DVector::<f64>::zeros(2 * VDIM);
    for j in 0..DIM {
        for i in 0..DIM {
            v[j * DIM + i] = m[(i, j)].re;
            v[VDIM + j * DIM + i] = m[(i, j)].im;
        }
    }
    v
}

pub fn unsplit(v: &DVector<f64>) -> DMatrix<C64> {
    DMatrix::from_fn(DIM, DIM, |i, j| C64::new(v[j * DIM + i], v[VDIM + j * DIM + i]))
}

/// Real superoperator of M ↦ K₁ M K₂ for a two-qubit local pair:
/// K̂ = K₂ᵗ ⊗ K₁, then blocked as [[Re, -Im], [Im, Re]].
pub fn real_superop_of_pair(
    k1: &LocalUnitary,
    k2: &LocalUnitary,
) -> Result<RealSuperoperator, TypeIIError> {
    if k1.n() != 2 || k2.n() != 2 {
        return Err(TypeIIError::WrongQubitCount(k1.n().max(k2.n())));
    }
    let khat = k2.full().transpose().kronecker(&k1.full());
    Ok(blocked_from_complex(&khat))
}

fn blocked_from_complex(khat: &DMatrix<C64>) -> RealSuperoperator {
    let mut m = DMatrix::<f64>::zeros(2 * VDIM, 2 * VDIM);
    for i in 0..VDIM {
        for j in 0..VDIM {
            let z = khat[(i, j)];
            m[(i, j)] = z.re;
            m[(i, j + VDIM)] = -z.im;
            m[(i + VDIM, j)] = z.im;
            m[(i + VDIM, j + VDIM)] = z.re;
        }
    }
    RealSuperoperator::new(m, SuperopKind::UnitaryInduced)
        .expect("unitary kron is orthogonal in the split representation")
}

/// The transposition permutation T̂: T̂ vec(M) = vec(Mᵗ).
pub fn transposition_matrix() -> DMatrix<f64> {
    let mut t = DMatrix::<f64>::zeros(VDIM, VDIM);
    for i in 0..DIM {
        for j in 0..DIM {
            t[(j * DIM + i, i * DIM + j)] = 1.0;
        }
    }
    t
}

/// Adjoining superoperator [[T̂, 0], [0, -T̂]]: maps vec-split(M) to
/// vec-split(M†).
pub fn adjoining_superop() -> RealSuperoperator {
    let t = transposition_matrix();
    let mut m = DMatrix::<f64>::zeros(2 * VDIM, 2 * VDIM);
    for i in 0..VDIM {
        for j in 0..VDIM {
            m[(i, j)] = t[(i, j)];
            m[(i + VDIM, j + VDIM)] = -t[(i, j)];
        }
    }
    RealSuperoperator::new(m, SuperopKind::Adjoining).expect("fixed permutation blocks")
}

/// Hadamard (elementwise) product of a unitary-induced superoperator with
/// the adjoining one: the coincidence matrix [[Ĉ, 0], [0, -Ĉ]].
pub fn coincidence(khat: &RealSuperoperator) -> Result<RealSuperoperator, TypeIIError> {
    if khat.kind != SuperopKind::UnitaryInduced {
        return Err(TypeIIError::BlockStructure(
            "coincidence expects a unitary-induced superoperator".into(),
        ));
    }
    let adj = adjoining_superop();
    let m = khat.m.component_mul(&adj.m);
    RealSuperoperator::new(m, SuperopKind::Coincidence)
}

/// Number of coincidence slots realized with unit magnitude. Local pairs
/// reach either 0 (generic) or 4 (the subtype families).
pub fn coincidence_unity_count(c: &RealSuperoperator) -> usize {
    let block = c.top_block();
    let t = transposition_matrix();
    let mut count = 0;
    for i in 0..VDIM {
        for j in 0..VDIM {
            if t[(i, j)] == 1.0 && block[(i, j)].abs() >= 1.0 - 1e-9 {
                count += 1;
            }
        }
    }
    count
}

// ---------------------------------------------------------------------------
// Subtype identifiers

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::A, Family::B, Family::C, Family::D];

    /// Coincidence slot positions (row, col) of M, in sign order.
    fn slots(&self) -> [(usize, usize); 4] {
        match self {
            Family::A => [(0, 0), (1, 1), (2, 2), (3, 3)],
            Family::B => [(0, 1), (1, 0), (2, 3), (3, 2)],
            Family::C => [(0, 2), (1, 3), (2, 0), (3, 1)],
            Family::D => [(0, 3), (1, 2), (2, 1), (3, 0)],
        }
    }

    /// Whether the per-qubit factors are antidiagonal (qubit1, qubit2).
    fn antidiagonal(&self) -> (bool, bool) {
        match self {
            Family::A => (false, false),
            Family::B => (false, true),
            Family::C => (true, false),
            Family::D => (true, true),
        }
    }

    pub fn label(&self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
        }
    }
}

/// The four realizable sign patterns per family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignPattern {
    PPPP,
    PMMP,
    MPPM,
    MMMM,
}

impl SignPattern {
    pub const ALL: [SignPattern; 4] =
        [SignPattern::PPPP, SignPattern::PMMP, SignPattern::MPPM, SignPattern::MMMM];

    pub fn signs(&self) -> [i8; 4] {
        match self {
            SignPattern::PPPP => [1, 1, 1, 1],
            SignPattern::PMMP => [1, -1, -1, 1],
            SignPattern::MPPM => [-1, 1, 1, -1],
            SignPattern::MMMM => [-1, -1, -1, -1],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SignPattern::PPPP => "++++",
            SignPattern::PMMP => "+--+",
            SignPattern::MPPM => "-++-",
            SignPattern::MMMM => "----",
        }
    }

    pub fn negated(&self) -> SignPattern {
        match self {
            SignPattern::PPPP => SignPattern::MMMM,
            SignPattern::MMMM => SignPattern::PPPP,
            SignPattern::PMMP => SignPattern::MPPM,
            SignPattern::MPPM => SignPattern::PMMP,
        }
    }
}

/// One of the 16 subtype/sign classes, serialized like "A++++" or "B+--+".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubtypeId {
    pub family: Family,
    pub signs: SignPattern,
}

impl SubtypeId {
    pub const fn new(family: Family, signs: SignPattern) -> Self {
        SubtypeId { family, signs }
    }

    pub fn all() -> Vec<SubtypeId> {
        let mut out = Vec::with_capacity(16);
        for f in Family::ALL {
            for s in SignPattern::ALL {
                out.push(SubtypeId::new(f, s));
            }
        }
        out
    }

    pub fn parse(s: &str) -> Result<Self, TypeIIError> {
        let family = match s.chars().next() {
            Some('A') | Some('a') => Family::A,
            Some('B') | Some('b') => Family::B,
            Some('C') | Some('c') => Family::C,
            Some('D') | Some('d') => Family::D,
            _ => return Err(TypeIIError::BadSubtypeId(s.into())),
        };
        let signs = match &s[1..] {
            "++++" => SignPattern::PPPP,
            "+--+" => SignPattern::PMMP,
            "-++-" => SignPattern::MPPM,
            "----" => SignPattern::MMMM,
            _ => return Err(TypeIIError::BadSubtypeId(s.into())),
        };
        Ok(SubtypeId { family, signs })
    }
}

impl std::fmt::Display for SubtypeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.family.label(), self.signs.label())
    }
}

// ---------------------------------------------------------------------------
// Argument-symmetry templates

/// Sign toggles parameterizing a template family: (a, b) for the ++++/----
/// classes, the ± branch for the +--+/-++- classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemplateToggles {
    pub a: bool,
    pub b: bool,
    /// true picks the upper sign of the printed ±/∓ pairs.
    pub plus_branch: bool,
}

impl TemplateToggles {
    pub fn canonical() -> Self {
        TemplateToggles { a: false, b: false, plus_branch: true }
    }

    fn all() -> Vec<TemplateToggles> {
        let mut out = Vec::new();
        for a in [false, true] {
            for b in [false, true] {
                for t in [false, true] {
                    out.push(TemplateToggles { a, b, plus_branch: t });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum CoupleSign {
    Alpha,     // σ(ab)
    AlphaA,    // σ(ab + a)
    AlphaB,    // σ(ab + b)
    Branch,    // ± branch
    NegBranch, // ∓ branch
}

impl CoupleSign {
    fn value(&self, t: &TemplateToggles, negate_family: bool) -> f64 {
        let sigma = |on: bool| if on { -1.0 } else { 1.0 };
        let ab = t.a && t.b;
        let base = match self {
            CoupleSign::Alpha => sigma(ab),
            CoupleSign::AlphaA => sigma(ab ^ t.a),
            CoupleSign::AlphaB => sigma(ab ^ t.b),
            CoupleSign::Branch => {
                if t.plus_branch {
                    1.0
                } else {
                    -1.0
                }
            }
            CoupleSign::NegBranch => {
                if t.plus_branch {
                    -1.0
                } else {
                    1.0
                }
            }
        };
        if negate_family {
            -base
        } else {
            base
        }
    }
}

/// target = sign(toggles)·conj(source)
type ConjRule = ((usize, usize), (usize, usize), CoupleSign);

/// Structural template of one subtype class over Mat₄(ℂ).
struct Template {
    zeros: Vec<(usize, usize)>,
    real: Vec<(usize, usize)>,
    imag: Vec<(usize, usize)>,
    free: Vec<(usize, usize)>,
    conj: Vec<ConjRule>,
    /// target = source (value tied; C-family cross equalities)
    ties: Vec<((usize, usize), (usize, usize))>,
    /// whether the conjugate couplings carry the extra - of a ---- class
    negate: bool,
}

fn template(id: SubtypeId) -> Template {
    use CoupleSign::*;
    let neg = matches!(id.signs, SignPattern::MMMM | SignPattern::MPPM);
    match (id.family, id.signs) {
        (Family::A, SignPattern::PPPP) | (Family::A, SignPattern::MMMM) => {
            let diag = vec![(0, 0), (1, 1), (2, 2), (3, 3)];
            Template {
                zeros: vec![],
                real: if neg { vec![] } else { diag.clone() },
                imag: if neg { diag } else { vec![] },
                free: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
                conj: vec![
                    ((1, 0), (0, 1), AlphaA),
                    ((2, 0), (0, 2), AlphaB),
                    ((3, 0), (0, 3), Alpha),
                    ((2, 1), (1, 2), Alpha),
                    ((3, 1), (1, 3), AlphaB),
                    ((3, 2), (2, 3), AlphaA),
                ],
                ties: vec![],
                negate: neg,
            }
        }
        (Family::A, SignPattern::PMMP) | (Family::A, SignPattern::MPPM) => {
            let (re, im) = (vec![(0, 0), (3, 3)], vec![(1, 1), (2, 2)]);
            Template {
                zeros: vec![(0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (3, 1), (2, 3), (3, 2)],
                real: if neg { im.clone() } else { re.clone() },
                imag: if neg { re } else { im },
                free: vec![(0, 3), (1, 2)],
                conj: vec![((2, 1), (1, 2), Branch), ((3, 0), (0, 3), NegBranch)],
                ties: vec![],
                negate: false,
            }
        }
        (Family::B, SignPattern::PPPP) | (Family::B, SignPattern::MMMM) => {
            let slots = vec![(0, 1), (1, 0), (2, 3), (3, 2)];
            Template {
                zeros: vec![],
                real: if neg { vec![] } else { slots.clone() },
                imag: if neg { slots } else { vec![] },
                free: vec![(0, 0), (0, 2), (0, 3), (1, 2), (1, 3), (2, 2)],
                conj: vec![
                    ((1, 1), (0, 0), AlphaA),
                    ((2, 0), (1, 3), Alpha),
                    ((2, 1), (0, 3), AlphaB),
                    ((3, 0), (1, 2), AlphaB),
                    ((3, 1), (0, 2), Alpha),
                    ((3, 3), (2, 2), AlphaA),
                ],
                ties: vec![],
                negate: neg,
            }
        }
        (Family::B, SignPattern::PMMP) | (Family::B, SignPattern::MPPM) => {
            let (re, im) = (vec![(1, 0), (2, 3)], vec![(0, 1), (3, 2)]);
            Template {
                zeros: vec![(0, 0), (0, 3), (1, 1), (1, 2), (2, 1), (2, 2), (3, 0), (3, 3)],
                real: if neg { im.clone() } else { re.clone() },
                imag: if neg { re } else { im },
                free: vec![(0, 2), (1, 3)],
                conj: vec![((2, 0), (1, 3), Branch), ((3, 1), (0, 2), NegBranch)],
                ties: vec![],
                negate: false,
            }
        }
        (Family::C, SignPattern::PPPP) | (Family::C, SignPattern::MMMM) => {
            let slots = vec![(0, 2), (1, 3)];
            Template {
                zeros: vec![],
                real: if neg { vec![] } else { slots.clone() },
                imag: if neg { slots } else { vec![] },
                free: vec![(0, 0), (0, 1), (0, 3), (1, 0), (1, 1), (2, 1)],
                conj: vec![
                    ((1, 2), (0, 3), AlphaA),
                    ((2, 2), (0, 0), AlphaB),
                    ((2, 3), (1, 0), Alpha),
                    ((3, 0), (2, 1), AlphaA),
                    ((3, 2), (0, 1), Alpha),
                    ((3, 3), (1, 1), AlphaB),
                ],
                ties: vec![((2, 0), (1, 3)), ((3, 1), (0, 2))],
                negate: neg,
            }
        }
        (Family::C, SignPattern::PMMP) | (Family::C, SignPattern::MPPM) => {
            let (re, im) = (vec![(1, 3)], vec![(0, 2)]);
            Template {
                zeros: vec![(0, 0), (0, 3), (1, 1), (1, 2), (2, 1), (2, 2), (3, 0), (3, 3)],
                real: if neg { im.clone() } else { re.clone() },
                imag: if neg { re } else { im },
                free: vec![(0, 1), (1, 0)],
                conj: vec![((2, 3), (1, 0), Branch), ((3, 2), (0, 1), NegBranch)],
                ties: vec![((2, 0), (1, 3)), ((3, 1), (0, 2))],
                negate: false,
            }
        }
        (Family::D, SignPattern::PPPP) | (Family::D, SignPattern::MMMM) => {
            let slots = vec![(0, 3), (1, 2), (2, 1), (3, 0)];
            Template {
                zeros: vec![],
                real: if neg { vec![] } else { slots.clone() },
                imag: if neg { slots } else { vec![] },
                free: vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)],
                conj: vec![
                    ((1, 3), (0, 2), AlphaA),
                    ((2, 2), (1, 1), Alpha),
                    ((2, 3), (0, 1), AlphaB),
                    ((3, 1), (2, 0), AlphaA),
                    ((3, 2), (1, 0), AlphaB),
                    ((3, 3), (0, 0), Alpha),
                ],
                ties: vec![],
                negate: neg,
            }
        }
        (Family::D, SignPattern::PMMP) | (Family::D, SignPattern::MPPM) => {
            let (re, im) = (vec![(0, 3), (3, 0)], vec![(1, 2), (2, 1)]);
            Template {
                zeros: vec![(0, 1), (0, 2), (1, 0), (1, 3), (2, 0), (2, 3), (3, 1), (3, 2)],
                real: if neg { im.clone() } else { re.clone() },
                imag: if neg { re } else { im },
                free: vec![(0, 0), (1, 1)],
                conj: vec![((2, 2), (1, 1), Branch), ((3, 3), (0, 0), NegBranch)],
                ties: vec![],
                negate: false,
            }
        }
    }
}

/// Draw a random matrix conforming to the subtype's argument symmetry under
/// the given toggles.
pub fn sample_template(id: SubtypeId, toggles: TemplateToggles, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let t = template(id);
    let mut m = DMatrix::<C64>::zeros(DIM, DIM);
    let draw = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);
    for &(i, j) in &t.free {
        m[(i, j)] = C64::new(draw(rng), draw(rng));
    }
    for &(i, j) in &t.real {
        m[(i, j)] = C64::new(draw(rng), 0.0);
    }
    for &(i, j) in &t.imag {
        m[(i, j)] = C64::new(0.0, draw(rng));
    }
    for &(tgt, src) in &t.ties {
        m[tgt] = m[src];
    }
    for &(tgt, src, sign) in &t.conj {
        m[tgt] = m[src].conj() * sign.value(&toggles, t.negate);
    }
    m
}

/// Structural template match: forced zeros exactly zero, reality and
/// imaginarity constraints on the pinned entries, conjugate-pair couplings,
/// under at least one admissible choice of the template's free signs.
pub fn symmetry_class_test(m: &OperatorMatrix, id: SubtypeId) -> bool {
    if m.dim() != DIM {
        return false;
    }
    let scale = m.fro_norm().max(1e-300);
    let tolerance = 1e-12 * scale;
    let t = template(id);
    'toggles: for tog in TemplateToggles::all() {
        for &(i, j) in &t.zeros {
            if m.mat[(i, j)].norm() > tolerance {
                continue 'toggles;
            }
        }
        for &(i, j) in &t.real {
            if m.mat[(i, j)].im.abs() > tolerance {
                continue 'toggles;
            }
        }
        for &(i, j) in &t.imag {
            if m.mat[(i, j)].re.abs() > tolerance {
                continue 'toggles;
            }
        }
        for &(tgt, src) in &t.ties {
            if (m.mat[tgt] - m.mat[src]).norm() > tolerance {
                continue 'toggles;
            }
        }
        for &(tgt, src, sign) in &t.conj {
            let want = m.mat[src].conj() * sign.value(&tog, t.negate);
            if (m.mat[tgt] - want).norm() > tolerance {
                continue 'toggles;
            }
        }
        return true;
    }
    false
}

// ---------------------------------------------------------------------------
// Subtype pattern construction

/// SU(2) diagonal / antidiagonal factor candidates (entries 0, ±1, ±i).
fn factor_candidates(antidiag: bool) -> Vec<Matrix2<C64>> {
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    if antidiag {
        // ±iσ_x, ±iσ_y
        vec![
            Matrix2::new(z, i, i, z),
            Matrix2::new(z, -i, -i, z),
            Matrix2::new(z, o, -o, z),
            Matrix2::new(z, -o, o, z),
        ]
    } else {
        // ±1l, ±iσ_z
        vec![
            Matrix2::new(o, z, z, o),
            Matrix2::new(-o, z, z, -o),
            Matrix2::new(i, z, z, -i),
            Matrix2::new(-i, z, z, i),
        ]
    }
}

fn pattern_search(id: SubtypeId) -> (DMatrix<f64>, LocalUnitary, LocalUnitary, TemplateToggles) {
    let (anti1, anti2) = id.family.antidiagonal();
    let c1 = factor_candidates(anti1);
    let c2 = factor_candidates(anti2);
    let slots = id.family.slots();
    let signs = id.signs.signs();

    // probe samples with fixed seeds, one per toggle assignment
    let adj = adjoining_superop();
    let toggle_choices: Vec<TemplateToggles> = TemplateToggles::all();
    let probes: Vec<(TemplateToggles, DMatrix<C64>, DVector<f64>)> = toggle_choices
        .iter()
        .map(|&tog| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
            let m = sample_template(id, tog, &mut rng);
            let target = adj.apply(&vec_split(&m));
            (tog, m, target)
        })
        .collect();

    for f1a in &c1 {
        for f1b in &c2 {
            for f2a in &c1 {
                for f2b in &c2 {
                    let k1 = LocalUnitary::from_factors(vec![*f1a, *f1b]).expect("su2 factors");
                    let k2 = LocalUnitary::from_factors(vec![*f2a, *f2b]).expect("su2 factors");
                    let k1f = k1.full();
                    let k2f = k2.full();
                    // pattern must be real with the required coincidence signs
                    let khat = k2f.transpose().kronecker(&k1f);
                    if khat.iter().any(|z| z.im.abs() > 1e-12) {
                        continue;
                    }
                    let ok_signs = slots.iter().zip(signs.iter()).all(|(&(i, j), &s)| {
                        let v = k1f[(i, j)] * k2f[(i, j)];
                        (v - C64::new(s as f64, 0.0)).norm() < 1e-12
                    });
                    if !ok_signs {
                        continue;
                    }
                    // must adjoin its template class; find the matching toggles
                    let sup = blocked_from_complex(&khat);
                    for (tog, m, target) in &probes {
                        let got = sup.apply(&vec_split(m));
                        if (got - target).norm() < 1e-10 * m.norm().max(1.0) {
                            let pattern = khat.map(|z| z.re);
                            return (pattern, k1, k2, *tog);
                        }
                    }
                }
            }
        }
    }
    unreachable!("every subtype class has a Pauli-group realization")
}

/// The K̂_Re pattern of a subtype, its realizing local pair (K₁, K₂) and the
/// template toggles the pattern adjoins. The printed free slots are
/// instantiated with π/2-rotation-like factor values (entries 0, ±1, ±i);
/// the -1-signed classes are exact negatives of their +1 partners.
pub fn subtype_pattern_full(id: SubtypeId) -> (RealSuperoperator, LocalUnitary, LocalUnitary, TemplateToggles) {
    match id.signs {
        SignPattern::PPPP | SignPattern::PMMP => {
            let (pattern, k1, k2, tog) = pattern_search(id);
            let complex = pattern.map(|x| C64::new(x, 0.0));
            (blocked_from_complex(&complex), k1, k2, tog)
        }
        SignPattern::MMMM | SignPattern::MPPM => {
            let positive = SubtypeId::new(id.family, id.signs.negated());
            let (pattern, k1, k2, _) = pattern_search(positive);
            let negated = -pattern;
            // -(k1 ⊗ ...) stays a local pair: negate K₁'s global sign
            let nk1 = {
                let factors: Vec<Matrix2<C64>> =
                    k1.factors().iter().enumerate().map(|(idx, f)| if idx == 0 { -*f } else { *f }).collect();
                LocalUnitary::from_factors(factors).expect("negated su2 factor")
            };
            // locate the toggles adjoined by the negated pattern
            let sup = blocked_from_complex(&negated.map(|x| C64::new(x, 0.0)));
            let adj = adjoining_superop();
            let mut matched = TemplateToggles::canonical();
            let mut found = false;
            for tog in TemplateToggles::all() {
                let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
                let m = sample_template(id, tog, &mut rng);
                let target = adj.apply(&vec_split(&m));
                if (sup.apply(&vec_split(&m)) - target).norm() < 1e-10 * m.norm().max(1.0) {
                    matched = tog;
                    found = true;
                    break;
                }
            }
            assert!(found, "negated pattern must adjoin its class");
            (sup, nk1, k2, matched)
        }
    }
}

/// The subtype's K̂_Re pattern as a real superoperator.
pub fn subtype_pattern(id: SubtypeId) -> RealSuperoperator {
    subtype_pattern_full(id).0
}

/// Residual ‖K̂ vec-split(m) - vec-split(m†)‖ / ‖m‖_F for the subtype's
/// pattern superoperator, after the structural precondition.
pub fn symmetry_maps_to_adjoint(m: &OperatorMatrix, id: SubtypeId) -> Result<f64, TypeIIError> {
    if !symmetry_class_test(m, id) {
        return Err(TypeIIError::SymmetryViolation);
    }
    let sup = subtype_pattern(id);
    let got = sup.apply(&vec_split(&m.mat));
    let adj = adjoining_superop().apply(&vec_split(&m.mat));
    Ok((got - adj).norm() / m.fro_norm().max(1e-300))
}

/// Subtype and sign-pattern counts for n qubits: (2^n, 2^n).
pub fn subtype_counts(n: usize) -> (u64, u64) {
    assert!(n >= 2, "subtype counting starts at two qubits");
    (1u64 << n, 1u64 << n)
}

use rand::SeedableRng;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitary_defect;

    fn random_c4(rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        DMatrix::from_fn(DIM, DIM, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn adjoining_is_involutive_adjoint_map() {
        let adj = adjoining_superop();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = random_c4(&mut rng);
            let got = adj.apply_to_matrix(&m);
            assert_eq!(got, m.adjoint());
            let twice = adj.apply(&adj.apply(&vec_split(&m)));
            assert_eq!(twice, vec_split(&m));
        }
        // printed probe: row 2 has its 1 in column 5 (1-based)
        let t = transposition_matrix();
        assert_eq!(t[(1, 4)], 1.0);
        assert_eq!(t.row(1).sum(), 1.0);
    }

    #[test]
    fn pair_superop_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k1 = LocalUnitary::random(2, &mut rng);
        let k2 = LocalUnitary::random(2, &mut rng);
        let sup = real_superop_of_pair(&k1, &k2).unwrap();
        for _ in 0..10 {
            let m = random_c4(&mut rng);
            let got = sup.apply_to_matrix(&m);
            let want = k1.full() * &m * k2.full();
            assert!((got - want).norm() < 1e-12);
        }
        // identity pair gives the identity superoperator
        let id = LocalUnitary::identity(2);
        let sup = real_superop_of_pair(&id, &id).unwrap();
        assert!((sup.m - DMatrix::<f64>::identity(32, 32)).norm() < 1e-14);

        let k3 = LocalUnitary::random(3, &mut rng);
        assert!(matches!(
            real_superop_of_pair(&k3, &k3),
            Err(TypeIIError::WrongQubitCount(3))
        ));

        // diagonal-phase pair: K̂ is diagonal, so the real form is orthogonal
        // with support only on the paired (i, i)/(i, i±16) rotation slots
        let kz1 = LocalUnitary::z_rotations(&[0.7, -1.3]);
        let kz2 = LocalUnitary::z_rotations(&[0.2, 2.9]);
        let sup = real_superop_of_pair(&kz1, &kz2).unwrap();
        for i in 0..2 * VDIM {
            for j in 0..2 * VDIM {
                if sup.m[(i, j)].abs() > 1e-14 {
                    assert!(i % VDIM == j % VDIM, "off-diagonal support at ({}, {})", i, j);
                }
            }
        }
    }

    #[test]
    fn coincidence_counts() {
        // identity pair: exactly the 4 diagonal fixed points of transposition
        let id = LocalUnitary::identity(2);
        let sup = real_superop_of_pair(&id, &id).unwrap();
        let c = coincidence(&sup).unwrap();
        assert_eq!(coincidence_unity_count(&c), 4);
        let nonzero = c.top_block().iter().filter(|v| v.abs() > 0.0).count();
        assert_eq!(nonzero, 4);

        // generic pair: strictly fewer unity slots than any subtype pattern
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k1 = LocalUnitary::random(2, &mut rng);
        let k2 = LocalUnitary::random(2, &mut rng);
        let c = coincidence(&real_superop_of_pair(&k1, &k2).unwrap()).unwrap();
        assert!(coincidence_unity_count(&c) < 4);

        // subtype patterns realize their slots with the printed signs
        let (sup, k1, k2, _) = subtype_pattern_full(SubtypeId::parse("A+--+").unwrap());
        let c = coincidence(&sup).unwrap();
        assert_eq!(coincidence_unity_count(&c), 4);
        let k1f = k1.full();
        let k2f = k2.full();
        for (&(i, j), &s) in Family::A.slots().iter().zip(SignPattern::PMMP.signs().iter()) {
            let v = k1f[(i, j)] * k2f[(i, j)];
            assert!((v - C64::new(s as f64, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn patterns_orthogonal_factorizable_and_negated() {
        for id in SubtypeId::all() {
            let (sup, k1, k2, _) = subtype_pattern_full(id);
            let block = sup.top_block();
            assert!(
                (block_orthogonality_defect(&block)).norm() < 1e-10,
                "{} not orthogonal",
                id
            );
            // exact local-pair reconstruction
            let khat = k2.full().transpose().kronecker(&k1.full());
            let as_real = khat.map(|z| z.re);
            assert!(khat.iter().all(|z| z.im.abs() < 1e-12));
            assert!((as_real - &block).norm() < 1e-12, "{} does not factorize", id);
        }
        // exact negation identities
        for f in Family::ALL {
            let p = subtype_pattern(SubtypeId::new(f, SignPattern::PPPP)).top_block();
            let m = subtype_pattern(SubtypeId::new(f, SignPattern::MMMM)).top_block();
            assert_eq!(p, -m.clone());
            let pm = subtype_pattern(SubtypeId::new(f, SignPattern::PMMP)).top_block();
            let mp = subtype_pattern(SubtypeId::new(f, SignPattern::MPPM)).top_block();
            assert_eq!(pm, -mp.clone());
        }
    }

    fn block_orthogonality_defect(block: &DMatrix<f64>) -> DMatrix<f64> {
        block * block.transpose() - DMatrix::<f64>::identity(VDIM, VDIM)
    }

    #[test]
    fn templates_map_to_adjoints() {
        let adj = adjoining_superop();
        for id in SubtypeId::all() {
            let (sup, _, _, toggles) = subtype_pattern_full(id);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..25 {
                let m = sample_template(id, toggles, &mut rng);
                if m.norm() < 1e-9 {
                    continue;
                }
                let got = sup.apply(&vec_split(&m));
                let want = adj.apply(&vec_split(&m));
                assert!(
                    (got - want).norm() < 1e-10 * m.norm(),
                    "{} fails the adjoint map",
                    id
                );
            }
        }
    }

    #[test]
    fn class_test_examples() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 1.0),
            C64::new(1.0, 0.0),
        ]));
        let m = OperatorMatrix::general(m).unwrap();
        assert!(symmetry_class_test(&m, SubtypeId::parse("A+--+").unwrap()));
        let r = symmetry_maps_to_adjoint(&m, SubtypeId::parse("A+--+").unwrap()).unwrap();
        assert!(r < 1e-12);

        let id4 = OperatorMatrix::identity(4);
        assert!(symmetry_class_test(&id4, SubtypeId::parse("A++++").unwrap()));
        let r = symmetry_maps_to_adjoint(&id4, SubtypeId::parse("A++++").unwrap()).unwrap();
        assert!(r < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dense = OperatorMatrix::general(random_c4(&mut rng)).unwrap();
        for id in SubtypeId::all() {
            assert!(!symmetry_class_test(&dense, id), "dense matrix passed {}", id);
        }
        assert!(matches!(
            symmetry_maps_to_adjoint(&dense, SubtypeId::parse("B+--+").unwrap()),
            Err(TypeIIError::SymmetryViolation)
        ));
    }

    #[test]
    fn counts_table() {
        assert_eq!(subtype_counts(2), (4, 4));
        assert_eq!(subtype_counts(3), (8, 8));
        assert_eq!(subtype_counts(5), (32, 32));
    }

    #[test]
    fn block_structure_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let k = LocalUnitary::random(2, &mut rng);
        let sup = real_superop_of_pair(&k, &k).unwrap();
        assert!(unitary_defect(&sup.m.map(|x| C64::new(x, 0.0))) < 1e-9);
        // breaking the block structure is rejected
        let mut bad = sup.m.clone();
        bad[(0, 16)] += 0.5;
        assert!(RealSuperoperator::new(bad, SuperopKind::UnitaryInduced).is_err());
    }
}
