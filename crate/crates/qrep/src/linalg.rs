//! Dense complex linear algebra helpers: Haar sampling, Hermitian calculus,
//! and the principal logarithm of unitary matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Frobenius distance of `u` from unitarity, `max(‖uu*−1‖, ‖u*u−1‖)`.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    let id = CMat::identity(n, n);
    let a = (u * u.adjoint() - &id).norm();
    let b = (u.adjoint() * u - &id).norm();
    a.max(b)
}

/// Samples an `n×n` matrix with the Haar distribution on U(n): QR of a
/// standard complex Ginibre matrix, with the diagonal of R normalized to
/// positive reals so that the factorization (hence the law) is unique.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal) / f64::sqrt(2.0),
            rng.sample::<f64, _>(StandardNormal) / f64::sqrt(2.0),
        )
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Samples an `n×n` Hermitian matrix with independent Gaussian entries.
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// `exp(i t h)` for Hermitian `h`, via eigendecomposition.
pub fn exp_i_hermitian(h: &CMat, t: f64) -> CMat {
    let se = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut d = CMat::zeros(n, n);
    for j in 0..n {
        d[(j, j)] = (I * C64::from(t * se.eigenvalues[j])).exp();
    }
    &se.eigenvectors * d * se.eigenvectors.adjoint()
}

/// Principal logarithm of a unitary matrix.
///
/// A unitary `u` is normal, so it is jointly diagonalized with the commuting
/// Hermitian pair `c = (u+u*)/2`, `s = (u−u*)/2i`: we diagonalize `c`, then
/// diagonalize `s` restricted to each (numerically clustered) eigenspace of
/// `c`. Eigenvalues `e^{iθ}` with `θ ∈ (−π, π]` give `log u = Z diag(iθ) Z*`.
///
/// Errors when an eigenvalue sits within `branch_tol` of −1 (principal branch
/// unstable there).
pub fn unitary_log(u: &CMat, branch_tol: f64) -> Result<CMat> {
    let n = u.nrows();
    if n != u.ncols() {
        return Err(Error::validation("unitary_log: matrix not square"));
    }
    let c = (u + u.adjoint()) * C64::new(0.5, 0.0);
    let s = (u - u.adjoint()) * C64::new(0.0, -0.5);
    let se = c.symmetric_eigen();

    // Sort the eigenbasis of c so equal eigenvalues are adjacent.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let mut v = CMat::zeros(n, n);
    for (col, &j) in order.iter().enumerate() {
        v.set_column(col, &se.eigenvectors.column(j));
    }
    let cvals: Vec<f64> = order.iter().map(|&j| se.eigenvalues[j]).collect();

    // Diagonalize s within each cluster of (numerically) equal c-eigenvalues.
    let t = v.adjoint() * &s * &v;
    let cluster_tol = 1e-7;
    let mut z = v.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cvals[end] - cvals[end - 1]).abs() < cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = t.view((start, start), (end - start, end - start)).into_owned();
            let bse = block.symmetric_eigen();
            let rot = v.columns(start, end - start) * &bse.eigenvectors;
            for (k, col) in (start..end).enumerate() {
                z.set_column(col, &rot.column(k));
            }
        }
        start = end;
    }

    // Read eigenvalues of u off the diagonalized form; build the log.
    let d = z.adjoint() * u * &z;
    let mut log = CMat::zeros(n, n);
    for j in 0..n {
        let ev = d[(j, j)];
        if (ev + C64::new(1.0, 0.0)).norm() < branch_tol {
            return Err(Error::numerical(format!(
                "unitary_log: eigenvalue {ev} within {branch_tol} of -1 (branch cut)"
            )));
        }
        log[(j, j)] = I * C64::from(ev.arg());
    }
    Ok(&z * log * z.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 5, 8] {
            let u = haar_unitary(n, &mut rng);
            assert!(unitarity_residual(&u) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn exp_log_roundtrip_on_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [1, 2, 3, 6] {
            // exp(i t h) with small t keeps eigenvalues away from -1.
            let h = random_hermitian(n, &mut rng);
            let u = exp_i_hermitian(&h, 0.1);
            let l = unitary_log(&u, 1e-6).unwrap();
            let diff = (exp_of_skew(&l) - &u).norm();
            assert!(diff < 1e-10, "n={n}, diff={diff}");
            // log is skew-Hermitian
            assert!((&l + l.adjoint()).norm() < 1e-10);
        }
    }

    #[test]
    fn log_rejects_minus_one() {
        let mut m = CMat::identity(2, 2);
        m[(1, 1)] = C64::new(-1.0, 0.0);
        assert!(unitary_log(&m, 1e-6).is_err());
    }

    #[test]
    fn log_handles_degenerate_real_part() {
        // c = cos(θ) identical for θ and -θ: forces the cluster branch.
        let th = 0.7f64;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = haar_unitary(2, &mut rng);
        let mut d = CMat::zeros(2, 2);
        d[(0, 0)] = (I * C64::from(th)).exp();
        d[(1, 1)] = (I * C64::from(-th)).exp();
        let u = &w * d * w.adjoint();
        let l = unitary_log(&u, 1e-6).unwrap();
        assert!((exp_of_skew(&l) - &u).norm() < 1e-10);
    }

    fn exp_of_skew(l: &CMat) -> CMat {
        // l = i h with h Hermitian
        let h = l * C64::new(0.0, -1.0);
        exp_i_hermitian(&h, 1.0)
    }
}
