//! Small dense helpers on top of nalgebra: sorted SVDs, null vectors,
//! orthonormal complements and realification of complex differentials.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::polynomial::Point;

/// A thin SVD with singular values sorted in descending order and a full
/// right factor (`v` is `ncols × ncols`, even for wide matrices).
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn svd(m: &DMatrix<f64>) -> SortedSvd {
    let (rows, cols) = m.shape();
    // pad wide matrices with zero rows so nalgebra returns the full V
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let dec = padded.svd(true, true);
    let u = dec.u.expect("requested U");
    let vt = dec.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| dec.singular_values[i]).collect();
    let mut v = DMatrix::zeros(cols, order.len());
    let mut uu = DMatrix::zeros(u.nrows(), order.len());
    for (k, &i) in order.iter().enumerate() {
        v.set_column(k, &vt.row(i).transpose());
        uu.set_column(k, &u.column(i));
    }
    if rows < cols {
        uu = uu.rows(0, rows).into_owned();
    }
    SortedSvd { u: uu, sigma, v }
}

/// Singular values in descending order (no vectors).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Minimum-norm solution of `J dx = r` through the SVD. Returns the step and
/// the smallest of the `rows` singular values.
pub fn least_norm_solve(j: &DMatrix<f64>, r: &DVector<f64>) -> (DVector<f64>, f64) {
    let rank = j.nrows().min(j.ncols());
    let d = svd(j);
    let mut dx = DVector::zeros(j.ncols());
    for k in 0..rank {
        let s = d.sigma[k];
        if s == 0.0 {
            continue;
        }
        let coef = d.u.column(k).dot(r) / s;
        dx.axpy(coef, &d.v.column(k), 1.0);
    }
    (dx, d.sigma[rank - 1])
}

/// Orthonormal basis of the complement of `span(spanning)` in ℝ^dim.
///
/// The spanning vectors are orthonormalized first by modified Gram–Schmidt
/// with one re-orthogonalization pass; a post-projection norm below
/// `threshold` means they are dependent, reported as `Err(norm)`. The
/// complement is then completed greedily from the standard basis, always
/// taking the candidate with the largest remaining component.
pub fn orthonormal_complement(
    spanning: &[DVector<f64>],
    dim: usize,
    threshold: f64,
) -> Result<Vec<DVector<f64>>, f64> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for v in spanning {
        let w = project_out(v, &basis);
        let norm = w.norm();
        if norm < threshold {
            return Err(norm);
        }
        basis.push(w / norm);
    }
    let n_span = basis.len();
    let mut candidates: Vec<usize> = (0..dim).collect();
    while basis.len() < dim {
        let (pos, w) = candidates
            .iter()
            .enumerate()
            .map(|(pos, &i)| (pos, project_out(&DVector::from_fn(dim, |r, _| f64::from(r == i)), &basis)))
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("candidates remain while basis is incomplete");
        let norm = w.norm();
        if norm < threshold {
            break;
        }
        basis.push(w / norm);
        candidates.remove(pos);
    }
    Ok(basis.split_off(n_span))
}

fn project_out(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&w);
            w.axpy(-c, b, 1.0);
        }
    }
    w
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let mut e: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Spectral norm of a symmetric matrix.
pub fn symmetric_norm(h: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(h)
        .iter()
        .fold(0.0_f64, |m, e| m.max(e.abs()))
}

/// Real 2×2 block of `w ↦ a·dz + b·conj(dz)` acting on `(dx, dy)`.
pub fn real_block(a: Complex64, b: Complex64) -> [[f64; 2]; 2] {
    [[a.re + b.re, -a.im + b.im], [a.im + b.im, a.re - b.re]]
}

/// Writes the 2×2 block of `a·dz + b·conj(dz)` at (row, col) in a real matrix.
pub fn put_block(m: &mut DMatrix<f64>, row: usize, col: usize, a: Complex64, b: Complex64) {
    let blk = real_block(a, b);
    for (r, blk_row) in blk.iter().enumerate() {
        for (c, v) in blk_row.iter().enumerate() {
            m[(row + r, col + c)] += v;
        }
    }
}

pub fn realify(z: &[Complex64]) -> DVector<f64> {
    DVector::from_iterator(2 * z.len(), z.iter().flat_map(|c| [c.re, c.im]))
}

pub fn complexify(x: &[f64]) -> Point {
    Point::from_real(x)
}

/// Realification of a complex `m × k` matrix as the `2m × 2k` real matrix
/// `[[A, -B], [B, A]]`; its singular values are those of the complex matrix,
/// each repeated twice.
pub fn realify_matrix(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let v = m[(i, j)];
            out[(i, j)] = v.re;
            out[(i, j + c)] = -v.im;
            out[(i + r, j)] = v.im;
            out[(i + r, j + c)] = v.re;
        }
    }
    out
}
