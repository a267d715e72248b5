//! Singular value decomposition of 4×4 real matrices by one-sided Jacobi.
//!
//! Returns the literal factorization `A = U · diag(sigma) · V` (note: `V`,
//! not `Vᵀ`) with `U`, `V` orthogonal and `sigma` sorted non-increasing and
//! non-negative.  One-sided Jacobi rotates column pairs of a working copy
//! until all columns are mutually orthogonal; their norms are the singular
//! values.  For 4×4 this converges to machine precision in a handful of
//! sweeps, and rank-deficient input is handled by completing the left factor
//! to an orthonormal basis.

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Relative threshold below which a column is treated as a null direction.
const NULL_TOL: f64 = 1e-13;
/// Convergence threshold for column-pair orthogonality.
const ORTHO_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 60;

/// `A = u · diag(sigma) · v` with orthogonal `u`, `v`.
#[derive(Clone, Copy, Debug)]
pub struct Svd4 {
    pub u: [[f64; 4]; 4],
    pub sigma: [f64; 4],
    pub v: [[f64; 4]; 4],
}

impl Svd4 {
    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }

    /// Reassemble `u · diag(sigma) · v` — the round-trip check used in tests.
    pub fn reconstruct(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..4).map(|k| self.u[i][k] * self.sigma[k] * self.v[k][j]).sum();
            }
        }
        out
    }
}

const IDENTITY: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// Decompose `a` as `U · diag(sigma) · V`.
pub fn svd4(a: &[[f64; 4]; 4]) -> Svd4 {
    let mut w = *a; // working copy whose columns get orthogonalized
    let mut r = IDENTITY; // accumulated right rotations: w = a · r throughout

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..3 {
            for q in (p + 1)..4 {
                let mut dot_pp = 0.0;
                let mut dot_qq = 0.0;
                let mut dot_pq = 0.0;
                for row in &w {
                    dot_pp += row[p] * row[p];
                    dot_qq += row[q] * row[q];
                    dot_pq += row[p] * row[q];
                }
                if dot_pq.abs() <= ORTHO_TOL * (dot_pp * dot_qq).sqrt() {
                    continue;
                }
                rotated = true;
                // Jacobi rotation zeroing the (p, q) column inner product.
                let zeta = (dot_qq - dot_pp) / (2.0 * dot_pq);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for row in w.iter_mut() {
                    let (wp, wq) = (row[p], row[q]);
                    row[p] = c * wp - s * wq;
                    row[q] = s * wp + c * wq;
                }
                for row in r.iter_mut() {
                    let (rp, rq) = (row[p], row[q]);
                    row[p] = c * rp - s * rq;
                    row[q] = s * rp + c * rq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values; sort them descending.
    let mut order = [0usize, 1, 2, 3];
    let mut norms = [0.0f64; 4];
    for (k, norm) in norms.iter_mut().enumerate() {
        *norm = (0..4).map(|i| w[i][k] * w[i][k]).sum::<f64>().sqrt();
    }
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let mut sigma = [0.0; 4];
    let mut u = [[0.0; 4]; 4];
    let mut v = [[0.0; 4]; 4];
    let sigma_max = norms[order[0]];

    let mut null_columns = [false; 4];
    for (slot, &k) in order.iter().enumerate() {
        sigma[slot] = norms[k];
        if norms[k] > NULL_TOL * sigma_max.max(1.0) {
            for i in 0..4 {
                u[i][slot] = w[i][k] / norms[k];
            }
        } else {
            // Tiny sigma kept as-is; the direction is completed below.
            null_columns[slot] = true;
        }
        // v row `slot` is column k of the accumulated rotations, transposed.
        for j in 0..4 {
            v[slot][j] = r[j][k];
        }
    }

    // Complete null directions to an orthonormal basis: pick the unit vector
    // with the largest residual after Gram-Schmidt against existing columns.
    for slot in 0..4 {
        if !null_columns[slot] {
            continue;
        }
        let mut best = [0.0; 4];
        let mut best_norm = -1.0;
        for cand in 0..4 {
            let mut vec = [0.0; 4];
            vec[cand] = 1.0;
            for other in 0..4 {
                if other == slot || null_columns[other] {
                    continue;
                }
                let proj: f64 = (0..4).map(|i| vec[i] * u[i][other]).sum();
                for i in 0..4 {
                    vec[i] -= proj * u[i][other];
                }
            }
            // Also orthogonalize against previously completed null columns.
            for other in 0..slot {
                if !null_columns[other] {
                    continue;
                }
                let proj: f64 = (0..4).map(|i| vec[i] * u[i][other]).sum();
                for i in 0..4 {
                    vec[i] -= proj * u[i][other];
                }
            }
            let norm = (0..4).map(|i| vec[i] * vec[i]).sum::<f64>().sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = vec;
            }
        }
        for i in 0..4 {
            u[i][slot] = best[i] / best_norm;
        }
    }

    Svd4 { u, sigma, v }
}
