//! Numerical tolerances.
//!
//! Defaults are tuned for `f64`. For lower-precision scalars every threshold
//! is floored at a fixed multiple of that type's machine epsilon.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a pure state's squared norm from one.
    pub norm: f64,
    /// Most negative eigenvalue accepted for a density sector.
    pub psd: f64,
    /// Hermiticity check on density sectors (Frobenius norm of `rho - rho^†`).
    pub hermitian: f64,
    /// Per-sector completeness residual for a POVM.
    pub completeness: f64,
    /// Below this norm a state counts as zero.
    pub zero: f64,
    /// Singular values below this are dropped from Schmidt vectors.
    pub singular: f64,
    /// Partial-sum slack in majorization comparisons.
    pub majorization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm: 1e-12,
            psd: 1e-10,
            hermitian: 1e-12,
            completeness: 1e-10,
            zero: 1e-14,
            singular: 1e-12,
            majorization: 1e-8,
        }
    }
}

impl Tolerances {
    /// Defaults adapted to the precision of `T`.
    pub fn of<T: Real>() -> Self {
        let eps = T::epsilon().to_f64().unwrap_or(f64::EPSILON);
        let d = Tolerances::default();
        Tolerances {
            norm: d.norm.max(1e3 * eps),
            psd: d.psd.max(1e3 * eps),
            hermitian: d.hermitian.max(1e3 * eps),
            completeness: d.completeness.max(1e3 * eps),
            zero: d.zero.max(10.0 * eps),
            singular: d.singular.max(10.0 * eps),
            majorization: d.majorization.max(1e3 * eps),
        }
    }
}
