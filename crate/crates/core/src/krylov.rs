//! Restarted GMRES with right preconditioning.
//!
//! Inner products are sequential so that results are bit-reproducible
//! regardless of the thread count; only the operator and preconditioner
//! applications are parallel.

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `‖b − Kx‖ / ‖b‖`.
    pub residual: f64,
    /// Relative residual after every inner iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, restart: 60 }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `K x = b`. `project` (if given) is applied to every Krylov vector
/// and to `b`; it should remove a known null-space component of `Kᵀ`.
pub fn gmres<K, M, P>(apply: K, precond: M, b: &[f64], opts: GmresOptions, project: P) -> GmresOutcome
where
    K: Fn(&[f64]) -> Vec<f64>,
    M: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&mut [f64]),
{
    let n = b.len();
    let mut rhs = b.to_vec();
    project(&mut rhs);
    let bnorm = norm(&rhs);
    let mut x = vec![0.0; n];
    let mut history = Vec::new();
    if bnorm == 0.0 {
        return GmresOutcome { x, iterations: 0, residual: 0.0, history, converged: true };
    }
    let m = opts.restart.max(1);
    let mut iterations = 0;
    let mut residual = 1.0;
    while iterations < opts.max_iter {
        let kx = apply(&x);
        let mut r: Vec<f64> = rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
        project(&mut r);
        let beta = norm(&r);
        residual = beta / bnorm;
        if residual <= opts.tol {
            return GmresOutcome { x, iterations, residual, history, converged: true };
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut used = 0;
        for j in 0..m {
            if iterations >= opts.max_iter {
                break;
            }
            let z = precond(&basis[j]);
            let mut w = apply(&z);
            project(&mut w);
            zs.push(z);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            if d == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j][j] / d;
                sn[j] = h[j + 1][j] / d;
            }
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            iterations += 1;
            used = j + 1;
            residual = g[j + 1].abs() / bnorm;
            history.push(residual);
            if residual <= opts.tol || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in (i + 1)..used {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (yi, z) in y.iter().zip(&zs) {
            for (xk, zk) in x.iter_mut().zip(z) {
                *xk += yi * zk;
            }
        }
        if residual <= opts.tol {
            // confirm with the true residual before declaring success
            let kx = apply(&x);
            let mut r: Vec<f64> = rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
            project(&mut r);
            residual = norm(&r) / bnorm;
            if residual <= opts.tol * 10.0 {
                return GmresOutcome { x, iterations, residual, history, converged: true };
            }
        }
    }
    GmresOutcome { x, iterations, residual, history, converged: residual <= opts.tol }
}
