//! Dense linear-algebra helpers shared by the dynamics and energy modules.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Deflation threshold for the QR iteration. A single ulp is too strict:
/// subdiagonal entries of non-normal inputs stall just above it.
const SCHUR_EPS: f64 = 8.0 * f64::EPSILON;

/// Complex Schur form `A = Q·T·Qᴴ` with `T` upper triangular.
///
/// Shifted QR stalls on some exactly structured inputs (even-length cycle
/// permutations, for one). On failure the decomposition is retried on
/// `R·A·Rᵀ` for seeded random orthogonal `R`, which leaves the spectrum
/// unchanged.
pub(crate) fn complex_schur(a: &DMatrix<f64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    let max_iter = 100 * n + 1000;
    let to_complex = |m: &DMatrix<f64>| m.map(|x| C64::new(x, 0.0));
    if let Some(schur) = Schur::try_new(to_complex(a), SCHUR_EPS, max_iter) {
        return Ok(schur.unpack());
    }
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5c0ec0de ^ seed);
        let r = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q();
        let rotated = &r * a * r.transpose();
        if let Some(schur) = Schur::try_new(to_complex(&rotated), SCHUR_EPS, max_iter) {
            let (q, t) = schur.unpack();
            return Ok((to_complex(&r.transpose()) * q, t));
        }
    }
    Err(Error::NoConvergence {
        what: "Schur decomposition",
        iterations: max_iter,
    })
}

pub(crate) fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<C64>> {
    let (_, t) = complex_schur(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Solves `A·X + X·Aᵀ + Q = 0` by reduction to complex Schur form and
/// triangular back-substitution (Bartels–Stewart). Requires
/// `λ_i(A) + conj(λ_j(A)) ≠ 0` for all pairs, which holds for Hurwitz `A`.
pub(crate) fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let (u, t) = complex_schur(a)?;
    let qc: DMatrix<C64> = q.map(|x| C64::new(-x, 0.0));
    // T·Y + Y·Tᴴ = C, with Y = Uᴴ·X·U and C = -Uᴴ·Q·U
    let c = u.adjoint() * qc * &u;
    let mut y = DMatrix::<C64>::zeros(n, n);
    for j in (0..n).rev() {
        for i in (0..n).rev() {
            let mut rhs = c[(i, j)];
            for k in i + 1..n {
                rhs -= t[(i, k)] * y[(k, j)];
            }
            for k in j + 1..n {
                rhs -= y[(i, k)] * t[(j, k)].conj();
            }
            let denom = t[(i, i)] + t[(j, j)].conj();
            if denom.norm() == 0.0 {
                return Err(Error::InvalidArgument(
                    "Lyapunov operator is singular (eigenvalue pair sums to zero)".into(),
                ));
            }
            y[(i, j)] = rhs / denom;
        }
    }
    let x = &u * y * u.adjoint();
    let xr = x.map(|z| z.re);
    // symmetrize away roundoff
    Ok((&xr + xr.transpose()) * 0.5)
}

/// Symmetric eigendecomposition with eigenvalues in descending order.
pub(crate) fn symmetric_eigen_desc(w: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = w.nrows();
    let eig = SymmetricEigen::new(w.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        // deterministic sign: largest-magnitude entry positive
        let pivot = col.iamax();
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(k, &col);
    }
    (values, vectors)
}
