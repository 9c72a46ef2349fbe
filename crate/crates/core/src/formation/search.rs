//! Local search over ensembles `psi~_i = B u_i` where the rows `u_i` of a
//! `K x r` isometry mix the weighted eigenvectors collected in `B`.

use nalgebra::RowDVector;

use crate::scalar::{cplx, from_usize, lit, phase, CMatrix, CVector, Complex, Real};

type Row<T> = RowDVector<Complex<T>>;

/// Cost of one unnormalized member, `||psi~||^2 f(psi~ / ||psi~||)`.
pub(crate) type MemberCost<'a, T> = dyn Fn(&CVector<T>) -> T + Sync + 'a;

pub(crate) struct Search<'a, T: Real> {
    pub basis: &'a CMatrix<T>,
    pub cost: &'a MemberCost<'a, T>,
    pub max_sweeps: usize,
    pub tol: T,
}

pub(crate) struct Found<T: Real> {
    pub value: T,
    pub iso: CMatrix<T>,
    pub converged: bool,
}

const COARSE_THETA: usize = 12;
const COARSE_PHI: usize = 6;
const FINEST_STEP: f64 = 1e-8;
const MAX_MOVES: usize = 120;

impl<T: Real> Search<'_, T> {
    pub fn member(&self, iso: &CMatrix<T>, i: usize) -> CVector<T> {
        self.basis * iso.row(i).transpose()
    }

    pub fn total(&self, iso: &CMatrix<T>) -> T {
        (0..iso.nrows()).fold(T::zero(), |a, i| a + (self.cost)(&self.member(iso, i)))
    }

    /// Pairwise Givens sweeps from `iso` until a sweep gains less than `tol`.
    pub fn run(&self, mut iso: CMatrix<T>) -> Found<T> {
        let k = iso.nrows();
        let mut costs: Vec<T> = (0..k).map(|i| (self.cost)(&self.member(&iso, i))).collect();
        let sum = |c: &[T]| c.iter().fold(T::zero(), |a, &x| a + x);
        let mut converged = k < 2;
        for sweep in 0..self.max_sweeps {
            if k < 2 {
                break;
            }
            let before = sum(&costs);
            for i in 0..k {
                for j in (i + 1)..k {
                    self.improve_pair(&mut iso, &mut costs, i, j, sweep == 0);
                }
            }
            if before - sum(&costs) <= self.tol {
                converged = true;
                break;
            }
        }
        Found { value: sum(&costs), iso, converged }
    }

    fn rotated(&self, ri: &Row<T>, rj: &Row<T>, theta: T, phi: T) -> (Row<T>, Row<T>) {
        let (c, s) = (cplx(theta.cos(), T::zero()), cplx(theta.sin(), T::zero()));
        let e = phase(phi);
        (ri * c + rj * (s * e), rj * c - ri * (s * e.conj()))
    }

    fn pair_cost(&self, ri: &Row<T>, rj: &Row<T>) -> (T, T) {
        ((self.cost)(&(self.basis * ri.transpose())), (self.cost)(&(self.basis * rj.transpose())))
    }

    fn improve_pair(&self, iso: &mut CMatrix<T>, costs: &mut [T], i: usize, j: usize, coarse: bool) {
        let ri = iso.row(i).clone_owned();
        let rj = iso.row(j).clone_owned();
        let base = costs[i] + costs[j];
        let eval = |th: T, ph: T| {
            let (a, b) = self.rotated(&ri, &rj, th, ph);
            let (ca, cb) = self.pair_cost(&a, &b);
            (ca + cb, ca, cb)
        };
        let pi = T::pi();
        let mut best = (base, T::zero(), T::zero());
        // gains below this are rounding noise
        let margin = |v: T| lit::<T>(64.0) * <T as Real>::epsilon() * (T::one() + v.abs());
        for a in (0..COARSE_THETA).filter(|_| coarse) {
            let th = -pi / lit(2.0) + pi * from_usize::<T>(a + 1) / from_usize::<T>(COARSE_THETA);
            for b in 0..COARSE_PHI {
                let ph = lit::<T>(2.0) * pi * from_usize::<T>(b) / from_usize::<T>(COARSE_PHI);
                let v = eval(th, ph).0;
                if v < best.0 {
                    best = (v, th, ph);
                }
            }
        }
        let (mut st, mut sp) = (pi / lit(2.0 * COARSE_THETA as f64), pi / lit(COARSE_PHI as f64));
        let mut moves = 0;
        while st > lit(FINEST_STEP) && moves < MAX_MOVES {
            let (v0, th, ph) = best;
            let mut moved = false;
            for (dt, dp) in [(st, T::zero()), (-st, T::zero()), (T::zero(), sp), (T::zero(), -sp)] {
                let v = eval(th + dt, ph + dp).0;
                if v < best.0 - margin(best.0) {
                    best = (v, th + dt, ph + dp);
                    moved = true;
                }
            }
            moves += 1;
            if !moved || best.0 >= v0 {
                st /= lit(2.0);
                sp /= lit(2.0);
            }
        }
        if best.0 < base {
            let (a, b) = self.rotated(&ri, &rj, best.1, best.2);
            let (ca, cb) = self.pair_cost(&a, &b);
            if ca + cb < base {
                iso.row_mut(i).copy_from(&a);
                iso.row_mut(j).copy_from(&b);
                costs[i] = ca;
                costs[j] = cb;
            }
        }
    }
}
