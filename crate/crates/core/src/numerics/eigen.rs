use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Eigenvalues above `-PSD_TOL` are accepted as PSD and clamped to zero.
pub const PSD_TOL: f64 = 1e-8;

/// Symmetric eigendecomposition `A = V diag(λ) Vᵀ`; columns of `vectors`
/// are the eigenvectors.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi rotations, row-by-row sweep order.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<SymmetricEigen> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::Dimension {
            expected: n,
            actual: a.cols(),
        });
    }
    let scale = a.as_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if a.max_asymmetry() > 1e-10 * scale.max(1.0) {
        return Err(Error::Domain("matrix is not symmetric".into()));
    }
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Ok(SymmetricEigen {
        values: (0..n).map(|i| m[(i, i)]).collect(),
        vectors: v,
    })
}

pub fn min_eigenvalue(a: &DenseMatrix) -> Result<f64> {
    Ok(symmetric_eigen(a)?
        .values
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Principal square root of a symmetric PSD matrix.
pub fn sqrt_psd(q: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = symmetric_eigen(q)?;
    let n = q.rows();
    let mut roots = Vec::with_capacity(n);
    for (i, &l) in eig.values.iter().enumerate() {
        if l < -PSD_TOL {
            return Err(Error::NotPsd { pivot: i, value: l });
        }
        roots.push(l.max(0.0).sqrt());
    }
    let v = &eig.vectors;
    let mut s = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = (0..n).map(|k| v[(i, k)] * roots[k] * v[(j, k)]).sum();
            s[(i, j)] = x;
            s[(j, i)] = x;
        }
    }
    Ok(s)
}
