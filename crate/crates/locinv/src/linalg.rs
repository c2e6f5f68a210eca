//! Dense complex matrix kernel.
//!
//! Kronecker products, the matrix exponential of skew-Hermitian generators,
//! column-stacking vectorization and Frobenius inner products, all on dense
//! 2^n × 2^n matrices. Dimensions stay small (n ≤ 8), so the exponential is
//! computed by Hermitian eigendecomposition of the generator rather than by
//! scaling-and-squaring.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

use crate::tol;

pub type C64 = Complex<f64>;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension {0} is not a power of two (or is < 2)")]
    NotPowerOfTwo(usize),
    #[error("matrix tagged {role:?} violates its invariant (defect {defect:.3e})")]
    RoleInvariant { role: RoleTag, defect: f64 },
    #[error("input is not skew-Hermitian (relative defect {0:.3e})")]
    NonSkewInput(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Structural role carried by an [`OperatorMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoleTag {
    Hermitian,
    SkewHermitian,
    Unitary,
    General,
}

/// Dense complex 2^n × 2^n operator with a structural role tag.
///
/// Role invariants are checked once at construction: Hermitian matrices must
/// satisfy max |M - M†| < 1e-12 entrywise, unitaries ‖M M† - I‖_F < 1e-10.
/// Values are immutable afterwards, so every operation here is pure.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub mat: DMatrix<C64>,
    pub role: RoleTag,
}

impl OperatorMatrix {
    pub fn new(mat: DMatrix<C64>, role: RoleTag) -> Result<Self, LinalgError> {
        let dim = mat.nrows();
        if dim != mat.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(LinalgError::NotPowerOfTwo(dim));
        }
        let t = tol::DEFAULT;
        match role {
            RoleTag::Hermitian => {
                let defect = hermitian_defect(&mat);
                if defect > t.hermitian_entry {
                    return Err(LinalgError::RoleInvariant { role, defect });
                }
            }
            RoleTag::Unitary => {
                let defect = unitary_defect(&mat);
                if defect > t.unitary_fro {
                    return Err(LinalgError::RoleInvariant { role, defect });
                }
            }
            RoleTag::SkewHermitian => {
                let norm = mat.norm();
                let defect = (&mat + mat.adjoint()).norm();
                if defect > t.skew_rel * norm.max(1e-300) {
                    return Err(LinalgError::NonSkewInput(defect / norm.max(1e-300)));
                }
            }
            RoleTag::General => {}
        }
        Ok(OperatorMatrix { mat, role })
    }

    pub fn hermitian(mat: DMatrix<C64>) -> Result<Self, LinalgError> {
        Self::new(mat, RoleTag::Hermitian)
    }

    pub fn skew(mat: DMatrix<C64>) -> Result<Self, LinalgError> {
        Self::new(mat, RoleTag::SkewHermitian)
    }

    pub fn unitary(mat: DMatrix<C64>) -> Result<Self, LinalgError> {
        Self::new(mat, RoleTag::Unitary)
    }

    pub fn general(mat: DMatrix<C64>) -> Result<Self, LinalgError> {
        Self::new(mat, RoleTag::General)
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix {
            mat: DMatrix::identity(dim, dim),
            role: RoleTag::Unitary,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Number of qubits, i.e. log2 of the dimension.
    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn fro_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn dagger(&self) -> DMatrix<C64> {
        self.mat.adjoint()
    }
}

pub fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn unitary_defect(m: &DMatrix<C64>) -> f64 {
    let dim = m.nrows();
    (m * m.adjoint() - DMatrix::<C64>::identity(dim, dim)).norm()
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let mat = a.mat.kronecker(&b.mat);
    let role = match (a.role, b.role) {
        (RoleTag::Hermitian, RoleTag::Hermitian) => RoleTag::Hermitian,
        (RoleTag::Unitary, RoleTag::Unitary) => RoleTag::Unitary,
        _ => RoleTag::General,
    };
    OperatorMatrix { mat, role }
}

/// Hermitian eigendecomposition A = V diag(λ) V†, eigenvalues ascending.
pub fn eigh(a: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let sym = a.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..sym.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| sym.eigenvalues[i].partial_cmp(&sym.eigenvalues[j]).unwrap());
    let vals = DVector::from_iterator(idx.len(), idx.iter().map(|&i| sym.eigenvalues[i]));
    let vecs = DMatrix::from_columns(
        &idx.iter()
            .map(|&i| sym.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Unitary exponential of a skew-Hermitian generator, via eigendecomposition
/// of i·g.
pub fn expm_skew(g: &OperatorMatrix) -> Result<OperatorMatrix, LinalgError> {
    let norm = g.mat.norm();
    let defect = (&g.mat + g.mat.adjoint()).norm();
    if defect > tol::DEFAULT.skew_rel * norm.max(1e-300) {
        return Err(LinalgError::NonSkewInput(defect / norm.max(1e-300)));
    }
    let herm = &g.mat * C64::i();
    let (vals, vecs) = eigh(&herm);
    let phases = DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| C64::new(0.0, -l).exp()),
    );
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    let u = &scaled * vecs.adjoint();
    OperatorMatrix::new(u, RoleTag::Unitary)
}

/// Column-stacking vectorization: columns of m stacked one upon another.
pub fn vec_of(m: &OperatorMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.mat.as_slice())
}

pub fn vec_of_dmatrix(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`] for a square matrix of dimension `dim`.
pub fn unvec(v: &DVector<C64>, dim: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Frobenius inner product tr(A†B).
pub fn frobenius_inner(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<C64, LinalgError> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.mat.dotc(&b.mat))
}

/// Real part of tr(A B) for dense matrices, without forming the product.
pub fn re_trace_prod(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            let ab = a[(i, k)] * b[(k, i)];
            acc += ab.re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub(crate) fn pauli(which: char) -> DMatrix<C64> {
        let z = c(0.0, 0.0);
        let entries = match which {
            '1' => [c(1.0, 0.0), z, z, c(1.0, 0.0)],
            'x' => [z, c(1.0, 0.0), c(1.0, 0.0), z],
            'y' => [z, c(0.0, -1.0), c(0.0, 1.0), z],
            'z' => [c(1.0, 0.0), z, z, c(-1.0, 0.0)],
            _ => panic!("bad pauli letter"),
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let a = DMatrix::from_fn(dim, dim, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&a + a.adjoint()) * c(0.5, 0.0)
    }

    #[test]
    fn kron_identity_cases() {
        let i2 = OperatorMatrix::identity(2);
        let i4 = kron(&i2, &i2);
        assert_eq!(i4.dim(), 4);
        assert!((i4.mat - DMatrix::<C64>::identity(4, 4)).norm() == 0.0);

        let sz = OperatorMatrix::hermitian(pauli('z')).unwrap();
        let zz = kron(&sz, &sz);
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1.0, 0.0),
            c(-1.0, 0.0),
            c(-1.0, 0.0),
            c(1.0, 0.0),
        ]));
        assert!((zz.mat - want).norm() == 0.0);
    }

    #[test]
    fn kron_against_index_oracle() {
        // brute-force index-arithmetic oracle for all 16 entries of x ⊗ y
        let sx = OperatorMatrix::hermitian(pauli('x')).unwrap();
        let sy = OperatorMatrix::hermitian(pauli('y')).unwrap();
        let k = kron(&sx, &sy);
        for i in 0..4 {
            for j in 0..4 {
                let want = sx.mat[(i / 2, j / 2)] * sy.mat[(i % 2, j % 2)];
                assert_eq!(k.mat[(i, j)], want);
            }
        }
    }

    #[test]
    fn kron_associative() {
        // exact equality on exact-valued entries
        let a = OperatorMatrix::hermitian(pauli('x')).unwrap();
        let b = OperatorMatrix::hermitian(pauli('y')).unwrap();
        let cm = OperatorMatrix::hermitian(pauli('z')).unwrap();
        let left = kron(&kron(&a, &b), &cm);
        let right = kron(&a, &kron(&b, &cm));
        assert_eq!(left.mat, right.mat);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = OperatorMatrix::general(random_hermitian(2, &mut rng)).unwrap();
        let b = OperatorMatrix::general(random_hermitian(2, &mut rng)).unwrap();
        let cm = OperatorMatrix::general(random_hermitian(2, &mut rng)).unwrap();
        let left = kron(&kron(&a, &b), &cm);
        let right = kron(&a, &kron(&b, &cm));
        assert!((left.mat - right.mat).norm() < 1e-15);
    }

    #[test]
    fn expm_skew_identity_and_pi_half_pulse() {
        let zero = OperatorMatrix::skew(DMatrix::zeros(2, 2)).unwrap();
        let u = expm_skew(&zero).unwrap();
        assert!((u.mat - DMatrix::<C64>::identity(2, 2)).norm() < 1e-14);

        // exp(-i (π/2) σ_x) = -i σ_x
        let g = OperatorMatrix::skew(pauli('x') * c(0.0, -std::f64::consts::FRAC_PI_2)).unwrap();
        let u = expm_skew(&g).unwrap();
        let want = pauli('x') * c(0.0, -1.0);
        assert!((u.mat - want).norm() < 1e-12);
    }

    #[test]
    fn expm_skew_matches_taylor_oracle() {
        // 30-term truncated series oracle, ‖tH‖ ≤ 2
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2usize, 4, 8] {
            let h = random_hermitian(dim, &mut rng);
            let h = &h * c(1.0 / h.norm().max(1.0), 0.0); // keep ‖H‖ ≤ 1
            let t = rng.gen_range(0.1..2.0);
            let g = OperatorMatrix::skew(&h * c(0.0, -t)).unwrap();
            let u = expm_skew(&g).unwrap();

            let mut taylor = DMatrix::<C64>::identity(dim, dim);
            let mut term = DMatrix::<C64>::identity(dim, dim);
            for k in 1..=30 {
                term = &term * &g.mat * c(1.0 / k as f64, 0.0);
                taylor += &term;
            }
            assert!((u.mat - taylor).norm() < 1e-10);
        }
    }

    #[test]
    fn expm_skew_rejects_non_skew() {
        let m = OperatorMatrix::general(pauli('z')).unwrap();
        assert!(matches!(expm_skew(&m), Err(LinalgError::NonSkewInput(_))));
    }

    #[test]
    fn expm_inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let h = random_hermitian(8, &mut rng);
            let scale = rng.gen_range(0.1..10.0) / h.norm();
            let g = OperatorMatrix::skew(&h * c(0.0, -scale)).unwrap();
            let gm = OperatorMatrix::skew(&h * c(0.0, scale)).unwrap();
            let u = expm_skew(&g).unwrap();
            let v = expm_skew(&gm).unwrap();
            assert!((u.mat * v.mat - DMatrix::<C64>::identity(8, 8)).norm() < 1e-10);
        }
    }

    #[test]
    fn vec_layout() {
        let i2 = OperatorMatrix::identity(2);
        let v = vec_of(&i2);
        assert_eq!(v.as_slice(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let sx = OperatorMatrix::hermitian(pauli('x')).unwrap();
        let v = vec_of(&sx);
        assert_eq!(v.as_slice(), &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn vec_conjugation_identity() {
        // (K* ⊗ K) vec(H) = vec(K H K†)
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = random_hermitian(4, &mut rng);
        let g = OperatorMatrix::skew(random_hermitian(4, &mut rng) * c(0.0, 1.0)).unwrap();
        let k = expm_skew(&g).unwrap();
        let kconj = k.mat.map(|z| z.conj());
        let superop = kconj.kronecker(&k.mat);
        let lhs = &superop * vec_of_dmatrix(&h);
        let rhs = vec_of_dmatrix(&(&k.mat * &h * k.mat.adjoint()));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn frobenius_basics() {
        let sz = OperatorMatrix::hermitian(pauli('z')).unwrap();
        let sx = OperatorMatrix::hermitian(pauli('x')).unwrap();
        assert_eq!(frobenius_inner(&sz, &sz).unwrap(), c(2.0, 0.0));
        assert_eq!(frobenius_inner(&sx, &sz).unwrap(), c(0.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = random_hermitian(8, &mut rng);
        let hm = OperatorMatrix::hermitian(h.clone()).unwrap();
        let (vals, _) = eigh(&h);
        let want: f64 = vals.iter().map(|l| l * l).sum();
        let got = frobenius_inner(&hm, &hm).unwrap();
        assert_relative_eq!(got.re, want, epsilon = 1e-10);
        assert!(got.im.abs() < 1e-12);

        let i2 = OperatorMatrix::identity(2);
        assert!(frobenius_inner(&hm, &i2).is_err());
    }

    #[test]
    fn eigh_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let h = random_hermitian(16, &mut rng);
        let (vals, vecs) = eigh(&h);
        let lam = DMatrix::from_diagonal(&vals.map(|l| c(l, 0.0)));
        let rec = &vecs * lam * vecs.adjoint();
        assert!((rec - &h).norm() < 1e-10 * h.norm().max(1.0));
        assert!(unitary_defect(&vecs) < 1e-10);
    }

    #[test]
    fn role_invariants_enforced() {
        let not_herm = pauli('x') * c(0.0, 1.0);
        assert!(OperatorMatrix::hermitian(not_herm).is_err());
        let not_unitary = pauli('x') * c(2.0, 0.0);
        assert!(OperatorMatrix::unitary(not_unitary).is_err());
        assert!(OperatorMatrix::general(DMatrix::zeros(3, 3)).is_err());
    }
}
