//! Centralized numerical tolerances.
//!
//! Every fixed threshold used by the library lives in this one record so
//! that no module carries ad-hoc magic numbers.

/// Tolerance configuration. [`Tolerances::DEFAULT`] holds the values used
/// throughout unless a caller overrides them explicitly.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Max entrywise |M - M†| accepted when tagging a matrix Hermitian.
    pub hermitian_entry: f64,
    /// Frobenius bound on ‖M M† - I‖ accepted when tagging a matrix unitary.
    pub unitary_fro: f64,
    /// Relative Frobenius bound on ‖g + g†‖ for skew-Hermitian inputs.
    pub skew_rel: f64,
    /// Relative tolerance for pairing ±λ in spectrum checks.
    pub spectrum_pair_rel: f64,
    /// Relative residual below which an algebraic inversion witness is accepted.
    pub witness_rel: f64,
    /// Relative residual below which a flow-produced type-I witness is accepted.
    pub flow_witness_rel: f64,
    /// Absolute Frobenius bound on ‖K₁UK₂ - U†‖ for type-II witnesses.
    pub type2_witness_abs: f64,
    /// Residual bound on the z-rotation linear system solutions.
    pub z_solver_residual: f64,
    /// Relative singular-value cutoff for rank and null-space decisions.
    pub svd_rank_rel: f64,
    /// Generic "exact up to roundoff" comparison bound.
    pub exact: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian_entry: 1e-12,
        unitary_fro: 1e-10,
        skew_rel: 1e-10,
        spectrum_pair_rel: 1e-9,
        witness_rel: 1e-9,
        flow_witness_rel: 1e-8,
        type2_witness_abs: 1e-6,
        z_solver_residual: 1e-9,
        svd_rank_rel: 1e-10,
        exact: 1e-12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}

/// The shared default tolerance record.
pub const DEFAULT: Tolerances = Tolerances::DEFAULT;
