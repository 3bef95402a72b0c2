//! Central finite differences for chart-based derivatives.

use nalgebra::DMatrix;

use crate::error::Result;

/// Jacobian of `f: ℝ^dim → ℝ^rows` at 0 by central differences with step `h`,
/// Richardson-extrapolated against step `h/2`.
pub fn richardson_jacobian<F>(f: F, rows: usize, dim: usize, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let central = |step: f64| -> Result<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(rows, dim);
        let mut u = vec![0.0; dim];
        for k in 0..dim {
            u[k] = step;
            let plus = f(&u)?;
            u[k] = -step;
            let minus = f(&u)?;
            u[k] = 0.0;
            for r in 0..rows {
                jac[(r, k)] = (plus[r] - minus[r]) / (2.0 * step);
            }
        }
        Ok(jac)
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Symmetrized Hessian of `f: ℝ^dim → ℝ` at 0 by central second differences.
pub fn central_hessian<F>(f: F, dim: usize, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut hess = DMatrix::zeros(dim, dim);
    let mut u = vec![0.0; dim];
    let f0 = f(&u)?;
    for k in 0..dim {
        u[k] = h;
        let plus = f(&u)?;
        u[k] = -h;
        let minus = f(&u)?;
        u[k] = 0.0;
        hess[(k, k)] = (plus - 2.0 * f0 + minus) / (h * h);
    }
    for k in 0..dim {
        for l in (k + 1)..dim {
            let mut eval = |sk: f64, sl: f64| {
                u[k] = sk * h;
                u[l] = sl * h;
                let v = f(&u);
                u[k] = 0.0;
                u[l] = 0.0;
                v
            };
            let pp = eval(1.0, 1.0)?;
            let pm = eval(1.0, -1.0)?;
            let mp = eval(-1.0, 1.0)?;
            let mm = eval(-1.0, -1.0)?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[(k, l)] = v;
            hess[(l, k)] = v;
        }
    }
    Ok(hess)
}
