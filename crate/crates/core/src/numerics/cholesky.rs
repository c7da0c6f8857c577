use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::sdp::GramFactor;

/// Factor a unit-diagonal PSD matrix `Y` into unit columns `u_i` with
/// `Y = UᵀU`.
///
/// Uses diagonally pivoted Cholesky and stops once every remaining residual
/// pivot is below `tol`, so rank-deficient inputs yield a thin factor.
/// Residual pivots in `[-tol, 0)` are clamped to zero.
pub fn cholesky_gram(y: &DenseMatrix, tol: f64) -> Result<GramFactor> {
    let n = y.rows();
    if !y.is_square() {
        return Err(Error::Dimension {
            expected: n,
            actual: y.cols(),
        });
    }
    if y.max_asymmetry() > tol {
        return Err(Error::Domain(format!(
            "matrix is not symmetric (asymmetry {:e})",
            y.max_asymmetry()
        )));
    }
    if let Some(i) = (0..n).find(|&i| (y[(i, i)] - 1.0).abs() > tol) {
        return Err(Error::Domain(format!(
            "diagonal entry {i} is {} (elliptope requires 1)",
            y[(i, i)]
        )));
    }

    // l[i] holds row i of the lower factor (in original vertex order).
    let mut l: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut resid: Vec<f64> = (0..n).map(|i| y[(i, i)]).collect();
    let mut done = vec![false; n];

    for _ in 0..n {
        let mut pivot = None;
        for i in (0..n).filter(|&i| !done[i]) {
            if pivot.is_none_or(|p: usize| resid[i] > resid[p]) {
                pivot = Some(i);
            }
        }
        let Some(p) = pivot else { break };
        if resid[p] <= tol {
            break;
        }
        let lpp = resid[p].sqrt();
        done[p] = true;
        let lp = l[p].clone();
        for i in 0..n {
            let entry = if i == p {
                lpp
            } else if done[i] {
                0.0
            } else {
                let s: f64 = l[i].iter().zip(&lp).map(|(a, b)| a * b).sum();
                let v = (y[(i, p)] - s) / lpp;
                resid[i] -= v * v;
                v
            };
            l[i].push(entry);
        }
    }

    // Whatever is left must be a PSD residual with diagonal ≤ tol, hence
    // every residual entry is bounded by tol as well.
    let rest: Vec<usize> = (0..n).filter(|&i| !done[i]).collect();
    for &i in &rest {
        if resid[i] < -tol {
            return Err(Error::NotPsd {
                pivot: i,
                value: resid[i],
            });
        }
        for &j in &rest {
            let s: f64 = l[i].iter().zip(&l[j]).map(|(a, b)| a * b).sum();
            let r = y[(i, j)] - s;
            if r.abs() > tol.max(1e-12) * 10.0 {
                return Err(Error::NotPsd { pivot: i, value: r });
            }
        }
    }

    let rank = l.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let mut factor = GramFactor::zeros(rank, n);
    for (i, row) in l.iter().enumerate() {
        let col = factor.column_mut(i);
        col[..row.len()].copy_from_slice(row);
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.iter_mut().for_each(|x| *x /= norm);
        } else {
            col[0] = 1.0;
        }
    }
    Ok(factor)
}

/// Solve `Qx = b` for symmetric positive-definite `Q` (plain Cholesky).
pub fn solve_spd(q: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = q.rows();
    if !q.is_square() || b.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: b.len(),
        });
    }
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = q[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 {
            return Err(Error::NotPsd { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = q[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] -= l[(i, k)] * z[k];
        }
        z[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            z[i] -= l[(k, i)] * z[k];
        }
        z[i] /= l[(i, i)];
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_factor() {
        let u = cholesky_gram(&DenseMatrix::identity(3), 1e-10).unwrap();
        assert_eq!(u.rank(), 3);
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(u.column(i)[k], if i == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn all_ones_is_rank_one() {
        let y = DenseMatrix::from_row_major(3, 3, vec![1.0; 9]).unwrap();
        let u = cholesky_gram(&y, 1e-10).unwrap();
        assert_eq!(u.rank(), 1);
        assert!(u.column(0) == u.column(1) && u.column(1) == u.column(2));
    }

    #[test]
    fn random_gram_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(r, n) in &[(3usize, 8usize), (8, 8), (2, 12), (12, 6)] {
            let u0 = GramFactor::random(r, n, &mut rng);
            let y = u0.gram();
            let u = cholesky_gram(&y, 1e-12).unwrap();
            let err = u.gram().max_abs_diff(&y);
            assert!(err <= 1e-10, "r={r} n={n} err={err:e}");
            for i in 0..n {
                let norm: f64 = u.column(i).iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        let y = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky_gram(&y, 1e-8), Err(Error::NotPsd { pivot: 1, .. })));
        let y = DenseMatrix::from_rows(&[
            vec![1.0, 1.0, -1.0],
            vec![1.0, 1.0, 1.0],
            vec![-1.0, 1.0, 1.0],
        ])
        .unwrap();
        assert!(matches!(cholesky_gram(&y, 1e-8), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn spd_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 5;
        let a = DenseMatrix::from_row_major(n, n, (0..n * n).map(|_| rng.random::<f64>()).collect())
            .unwrap();
        let mut q = a.transpose().matmul(&a).unwrap();
        for i in 0..n {
            q[(i, i)] += 1.0;
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let x = solve_spd(&q, &b).unwrap();
        let back = q.matvec(&x).unwrap();
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
    }
}
