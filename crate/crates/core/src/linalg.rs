//! Dense symmetric-indefinite factorization and box projection.
//!
//! The factorization is `P A P^T = L D L^T` with `L` unit lower triangular
//! and `D` block diagonal (1x1 and 2x2 blocks), pivots chosen with the
//! Bunch-Kaufman partial pivoting rule.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

/// Growth-bounding constant of the Bunch-Kaufman pivot rule, (1 + sqrt 17) / 8.
const BK_ALPHA: f64 = 0.640_388_203_202_208;

pub const SYMMETRY_RTOL: f64 = 1e-12;
pub const SOLVE_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pivot {
    One(f64),
    /// Symmetric 2x2 block `[[a, b], [b, c]]`.
    Two(f64, f64, f64),
}

#[derive(Debug, Clone)]
pub struct SymIndefFactorization {
    matrix: DMatrix<f64>,
    lower: DMatrix<f64>,
    pivots: Vec<Pivot>,
    /// `perm[i]` is the original row placed at position `i`.
    perm: Vec<usize>,
    inertia: Inertia,
    singular: bool,
}

/// `1e-12 * ||A||_inf`, floored at the smallest normal double.
pub fn default_drop_tol(a: &DMatrix<f64>) -> f64 {
    let norm = a
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    (1e-12 * norm).max(f64::MIN_POSITIVE)
}

fn sym_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean - rad, mean + rad)
}

fn swap_sym(a: &mut DMatrix<f64>, i: usize, j: usize) {
    if i != j {
        a.swap_rows(i, j);
        a.swap_columns(i, j);
    }
}

/// Factors a symmetric (possibly indefinite or singular) matrix.
///
/// Pivot blocks whose eigenvalues fall below `drop_tol` in magnitude are
/// counted as zero and mark the factorization singular.
pub fn factor_symmetric_indefinite(a: &DMatrix<f64>, drop_tol: f64) -> Result<SymIndefFactorization> {
    let m = a.nrows();
    check_len("matrix columns", m, a.ncols())?;
    if !(drop_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("drop_tol must be positive, got {drop_tol}")));
    }
    let scale = a.amax();
    let asym = (a - a.transpose()).amax();
    if asym > SYMMETRY_RTOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(asym / scale));
    }

    let mut w = a.clone();
    let mut lower = DMatrix::identity(m, m);
    let mut perm: Vec<usize> = (0..m).collect();
    let mut pivots = Vec::new();
    let mut inertia = Inertia {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    let count = |ev: f64, inertia: &mut Inertia| {
        if ev.abs() < drop_tol {
            inertia.zero += 1;
        } else if ev > 0.0 {
            inertia.positive += 1;
        } else {
            inertia.negative += 1;
        }
    };

    let mut k = 0;
    while k < m {
        let absakk = w[(k, k)].abs();
        let (r, colmax) = ((k + 1)..m)
            .map(|i| (i, w[(i, k)].abs()))
            .fold((k, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });

        if absakk.max(colmax) < drop_tol {
            // Numerically zero column: nothing to eliminate.
            count(w[(k, k)], &mut inertia);
            pivots.push(Pivot::One(w[(k, k)]));
            k += 1;
            continue;
        }

        let mut two_by_two = false;
        let mut swap_with = k;
        if absakk < BK_ALPHA * colmax {
            let rowmax = (k..m)
                .filter(|&j| j != r)
                .map(|j| w[(r, j)].abs())
                .fold(0.0_f64, f64::max);
            if absakk * rowmax >= BK_ALPHA * colmax * colmax {
                // keep the 1x1 pivot at k
            } else if w[(r, r)].abs() >= BK_ALPHA * rowmax {
                swap_with = r;
            } else {
                two_by_two = true;
                swap_with = r;
            }
        }

        let target = if two_by_two { k + 1 } else { k };
        if swap_with != target {
            swap_sym(&mut w, target, swap_with);
            perm.swap(target, swap_with);
            for j in 0..k {
                let tmp = lower[(target, j)];
                lower[(target, j)] = lower[(swap_with, j)];
                lower[(swap_with, j)] = tmp;
            }
        }

        if two_by_two {
            let (d11, d21, d22) = (w[(k, k)], w[(k + 1, k)], w[(k + 1, k + 1)]);
            let (e1, e2) = sym_eigenvalues(d11, d21, d22);
            count(e1, &mut inertia);
            count(e2, &mut inertia);
            pivots.push(Pivot::Two(d11, d21, d22));
            let det = d11 * d22 - d21 * d21;
            if e1.abs() >= drop_tol && e2.abs() >= drop_tol {
                for i in (k + 2)..m {
                    let (a1, a2) = (w[(i, k)], w[(i, k + 1)]);
                    lower[(i, k)] = (a1 * d22 - a2 * d21) / det;
                    lower[(i, k + 1)] = (a2 * d11 - a1 * d21) / det;
                }
                for j in (k + 2)..m {
                    let (l1, l2) = (lower[(j, k)], lower[(j, k + 1)]);
                    if l1 == 0.0 && l2 == 0.0 {
                        continue;
                    }
                    for i in (k + 2)..m {
                        w[(i, j)] -= lower[(i, k)] * w[(j, k)] + lower[(i, k + 1)] * w[(j, k + 1)];
                    }
                }
            }
            k += 2;
        } else {
            let d = w[(k, k)];
            count(d, &mut inertia);
            pivots.push(Pivot::One(d));
            if d.abs() >= drop_tol {
                for i in (k + 1)..m {
                    lower[(i, k)] = w[(i, k)] / d;
                }
                for j in (k + 1)..m {
                    let wjk = w[(j, k)];
                    if wjk == 0.0 {
                        continue;
                    }
                    for i in (k + 1)..m {
                        w[(i, j)] -= lower[(i, k)] * wjk;
                    }
                }
            }
            k += 1;
        }
    }

    Ok(SymIndefFactorization {
        matrix: a.clone(),
        lower,
        pivots,
        perm,
        singular: inertia.zero > 0,
        inertia,
    })
}

impl SymIndefFactorization {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Solves `A y = b` and verifies `||A y - b||_inf <= 1e-8 max(1, ||b||_inf)`.
    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.dim();
        check_len("right-hand side", m, b.len())?;
        if self.singular {
            return Err(Error::SingularSystem);
        }

        let mut y = DVector::from_fn(m, |i, _| b[self.perm[i]]);
        // L z = c
        for j in 0..m {
            let yj = y[j];
            if yj != 0.0 {
                for i in (j + 1)..m {
                    y[i] -= self.lower[(i, j)] * yj;
                }
            }
        }
        // D w = z
        let mut k = 0;
        for piv in &self.pivots {
            match *piv {
                Pivot::One(d) => {
                    y[k] /= d;
                    k += 1;
                }
                Pivot::Two(a, b, c) => {
                    let det = a * c - b * b;
                    let (r1, r2) = (y[k], y[k + 1]);
                    y[k] = (c * r1 - b * r2) / det;
                    y[k + 1] = (a * r2 - b * r1) / det;
                    k += 2;
                }
            }
        }
        // L^T v = w
        for j in (0..m).rev() {
            let mut s = y[j];
            for i in (j + 1)..m {
                s -= self.lower[(i, j)] * y[i];
            }
            y[j] = s;
        }
        let mut x = DVector::zeros(m);
        for i in 0..m {
            x[self.perm[i]] = y[i];
        }

        let residual = (&self.matrix * &x - b).amax();
        let tolerance = SOLVE_RTOL * b.amax().max(1.0);
        if !(residual <= tolerance) {
            return Err(Error::ResidualTooLarge {
                residual,
                tolerance,
            });
        }
        Ok(x)
    }
}

/// Componentwise clamp of `x` onto `[lower, upper]`.
pub fn project_box(x: &DVector<f64>, lower: &DVector<f64>, upper: &DVector<f64>) -> Result<DVector<f64>> {
    check_len("lower bounds", x.len(), lower.len())?;
    check_len("upper bounds", x.len(), upper.len())?;
    Ok(project_box_unchecked(x, lower, upper))
}

pub(crate) fn project_box_unchecked(
    x: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| x[i].max(lower[i]).min(upper[i]))
}

/// `x - P(x - g)`, the projected-gradient residual vector.
pub(crate) fn projected_gradient(
    x: &DVector<f64>,
    g: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| x[i] - (x[i] - g[i]).max(lower[i]).min(upper[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use proptest::prelude::*;

    fn factor(a: &DMatrix<f64>) -> SymIndefFactorization {
        factor_symmetric_indefinite(a, default_drop_tol(a)).unwrap()
    }

    #[test]
    fn saddle_2x2() {
        let a = dmatrix![2.0, 1.0; 1.0, 0.0];
        let f = factor(&a);
        assert!(!f.is_singular());
        assert_eq!(
            f.inertia(),
            Inertia {
                positive: 1,
                negative: 1,
                zero: 0
            }
        );
        let y = f.solve(&dvector![3.0, 1.0]).unwrap();
        assert!((y - dvector![1.0, 1.0]).amax() < 1e-15);
    }

    #[test]
    fn zero_matrix_is_singular() {
        let a = DMatrix::zeros(2, 2);
        let f = factor(&a);
        assert!(f.is_singular());
        assert_eq!(f.inertia().zero, 2);
        assert_eq!(f.solve(&dvector![1.0, 0.0]), Err(Error::SingularSystem));
    }

    #[test]
    fn identity() {
        let a = DMatrix::identity(3, 3);
        let f = factor(&a);
        assert_eq!(
            f.inertia(),
            Inertia {
                positive: 3,
                negative: 0,
                zero: 0
            }
        );
        let b = dvector![0.3, -7.0, 1e5];
        assert_eq!(f.solve(&b).unwrap(), b);
    }

    #[test]
    fn bordered_identity_inertia() {
        // [[I, 1], [1^T, 0]] has eigenvalues 1, 2 and -1.
        let a = dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 1.0; 1.0, 1.0, 0.0];
        assert_eq!(
            factor(&a).inertia(),
            Inertia {
                positive: 2,
                negative: 1,
                zero: 0
            }
        );
    }

    #[test]
    fn zero_diagonal_needs_two_by_two_pivot() {
        let a = dmatrix![0.0, 1.0, 0.0; 1.0, 0.0, 2.0; 0.0, 2.0, 0.0];
        // eigenvalues 0, +-sqrt(5)
        let f = factor(&a);
        assert!(f.is_singular());
        assert_eq!(
            f.inertia(),
            Inertia {
                positive: 1,
                negative: 1,
                zero: 1
            }
        );
    }

    #[test]
    fn empty_matrix() {
        let a = DMatrix::zeros(0, 0);
        let f = factor(&a);
        assert!(!f.is_singular());
        assert_eq!(f.solve(&DVector::zeros(0)).unwrap().len(), 0);
    }

    #[test]
    fn rejects_nonsymmetric() {
        let a = dmatrix![1.0, 2.0; 0.0, 1.0];
        assert!(matches!(
            factor_symmetric_indefinite(&a, 1e-12),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn projection_examples() {
        let (l, u) = (dvector![0.0], dvector![2.0]);
        assert_eq!(project_box(&dvector![3.0], &l, &u).unwrap()[0], 2.0);
        assert_eq!(project_box(&dvector![1.0], &l, &u).unwrap()[0], 1.0);
        assert_eq!(project_box(&dvector![-5.0], &l, &u).unwrap()[0], 0.0);
        assert!(project_box(&dvector![1.0, 2.0], &l, &u).is_err());
    }

    fn boxed(len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-10.0..10.0f64, len),
            prop::collection::vec(0.0..5.0f64, len),
            prop::collection::vec(-20.0..20.0f64, len),
            prop::collection::vec(-20.0..20.0f64, len),
        )
    }

    proptest! {
        #[test]
        fn projection_idempotent_and_nonexpansive((lo, width, x, y) in (1usize..8).prop_flat_map(boxed)) {
            let l = DVector::from_vec(lo.clone());
            let u = DVector::from_iterator(lo.len(), lo.iter().zip(&width).map(|(a, w)| a + w));
            let (x, y) = (DVector::from_vec(x), DVector::from_vec(y));
            let px = project_box(&x, &l, &u).unwrap();
            let py = project_box(&y, &l, &u).unwrap();
            prop_assert_eq!(&project_box(&px, &l, &u).unwrap(), &px);
            prop_assert!((&px - &py).norm() <= (&x - &y).norm() * (1.0 + 1e-15));
            for i in 0..x.len() {
                prop_assert!(px[i] >= l[i] && px[i] <= u[i]);
            }
        }
    }
}
