use std::collections::BTreeMap;

use crate::error::{Result, SsrError};
use crate::fock::SectorSpace;
use crate::linalg::identity;
use crate::scalar::{to_f64, CMatrix, Real};
use crate::tol::Tolerances;

/// One measurement operator, block-diagonal in the local particle number.
/// Absent sectors are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement<T: Real> {
    pub sectors: BTreeMap<usize, CMatrix<T>>,
}

impl<T: Real> PovmElement<T> {
    pub fn new(sectors: BTreeMap<usize, CMatrix<T>>) -> Self {
        PovmElement { sectors }
    }

    pub fn identity(space: &SectorSpace) -> Self {
        PovmElement { sectors: space.sectors().map(|(n, d)| (n, identity(d))).collect() }
    }

    /// Projector onto sector `n`.
    pub fn sector_projector(space: &SectorSpace, n: usize) -> Self {
        let d = space.dim(n);
        PovmElement { sectors: BTreeMap::from([(n, identity(d))]) }
    }

    pub fn sector(&self, n: usize) -> Option<&CMatrix<T>> {
        self.sectors.get(&n)
    }

    fn check_shapes(&self, space: &SectorSpace) -> Result<()> {
        for (&n, m) in &self.sectors {
            let d = space.dim(n);
            if d == 0 || m.shape() != (d, d) {
                return Err(SsrError::Shape(format!("POVM sector {n} has shape {:?}, expected ({d}, {d})", m.shape())));
            }
        }
        Ok(())
    }
}

/// A local measurement on one party. Completeness
/// `sum_i M_i^† M_i = 1` holds separately in every sector.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPovm<T: Real> {
    space: SectorSpace,
    elements: Vec<PovmElement<T>>,
}

impl<T: Real> LocalPovm<T> {
    pub fn new(space: SectorSpace, elements: Vec<PovmElement<T>>) -> Result<Self> {
        Self::new_with(space, elements, &Tolerances::of::<T>())
    }

    pub fn new_with(space: SectorSpace, elements: Vec<PovmElement<T>>, tol: &Tolerances) -> Result<Self> {
        for e in &elements {
            e.check_shapes(&space)?;
        }
        let povm = LocalPovm { space, elements };
        let r = to_f64(povm.completeness_residual());
        if r.is_nan() || r > tol.completeness {
            return Err(SsrError::Incomplete(r));
        }
        Ok(povm)
    }

    pub(crate) fn unchecked(space: SectorSpace, elements: Vec<PovmElement<T>>) -> Self {
        LocalPovm { space, elements }
    }

    /// The trivial measurement `{1}`.
    pub fn identity(space: SectorSpace) -> Self {
        let e = PovmElement::identity(&space);
        LocalPovm { space, elements: vec![e] }
    }

    /// Projective measurement of the local particle number.
    pub fn sector_projectors(space: SectorSpace) -> Self {
        let elements = space.sectors().map(|(n, _)| PovmElement::sector_projector(&space, n)).collect();
        LocalPovm { space, elements }
    }

    pub fn space(&self) -> &SectorSpace {
        &self.space
    }

    pub fn elements(&self) -> &[PovmElement<T>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Largest Frobenius deviation of `sum_i M_i^† M_i` from identity over sectors.
    pub fn completeness_residual(&self) -> T {
        let mut worst = T::zero();
        for (n, d) in self.space.sectors() {
            let mut acc = CMatrix::<T>::zeros(d, d);
            for e in &self.elements {
                if let Some(m) = e.sectors.get(&n) {
                    acc += m.adjoint() * m;
                }
            }
            acc -= identity::<T>(d);
            worst = worst.max(acc.norm());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_measurements_are_complete() {
        let space = SectorSpace::new(vec![1, 3, 2]).unwrap();
        assert!(LocalPovm::<f64>::identity(space.clone()).completeness_residual() < 1e-15);
        let p = LocalPovm::<f64>::sector_projectors(space.clone());
        assert_eq!(p.len(), 3);
        assert!(p.completeness_residual() < 1e-15);
        assert!(LocalPovm::new(space, p.elements().to_vec()).is_ok());
    }

    #[test]
    fn incomplete_measurement_rejected() {
        let space = SectorSpace::new(vec![1, 2]).unwrap();
        let e = PovmElement::<f64>::sector_projector(&space, 1);
        assert!(matches!(LocalPovm::new(space, vec![e]), Err(SsrError::Incomplete(_))));
    }

    #[test]
    fn wrong_shape_rejected() {
        let space = SectorSpace::new(vec![1, 2]).unwrap();
        let e = PovmElement::<f64>::new(BTreeMap::from([(1, identity(3))]));
        assert!(matches!(LocalPovm::new(space, vec![e]), Err(SsrError::Shape(_))));
    }
}
