//! Independent dense oracles. Nothing here calls into the library; states and
//! operators are plain vectors indexed big-endian with 0 = L/H, 1 = R/V.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type Mat = Vec<Vec<C>>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn kron(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

pub fn kron_mat(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    (0..n * m)
        .map(|r| (0..n * m).map(|col| a[r / m][col / m] * b[r % m][col % m]).collect())
        .collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|r| (0..n).map(|k| if r == k { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|r| (0..n).map(|k| (0..n).map(|j| a[r][j] * b[j][k]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Mat, v: &[C]) -> Vec<C> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// `Σ conj(a_k) b_k`
pub fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn outer(a: &[C], b: &[C]) -> Mat {
    a.iter().map(|x| b.iter().map(|y| x * y.conj()).collect()).collect()
}

pub fn weak_value(a: &Mat, pre: &[C], post: &[C]) -> C {
    dot(post, &matvec(a, pre)) / dot(post, pre)
}

pub fn ket2(i: usize) -> Vec<C> {
    let mut v = vec![c(0.0, 0.0); 2];
    v[i] = c(1.0, 0.0);
    v
}

pub fn proj2(i: usize) -> Mat {
    outer(&ket2(i), &ket2(i))
}

/// `|+⟩⟨+| − |−⟩⟨−|` with `|±⟩ = (|H⟩ ± i|V⟩)/√2`.
pub fn sigma_z() -> Mat {
    let plus = [c(R2, 0.0), c(0.0, R2)];
    let minus = [c(R2, 0.0), c(0.0, -R2)];
    let p = outer(&plus, &plus);
    let m = outer(&minus, &minus);
    (0..2)
        .map(|r| (0..2).map(|k| p[r][k] - m[r][k]).collect())
        .collect()
}

/// Single-photon preselection `(i|L⟩+|R⟩)|H⟩/√2`.
pub fn single_cat_pre() -> Vec<C> {
    kron(&[c(0.0, R2), c(R2, 0.0)], &ket2(0))
}

/// `(|L,H⟩ + |R,V⟩)/√2`
pub fn single_cat_post() -> Vec<C> {
    let mut v = vec![c(0.0, 0.0); 4];
    v[0] = c(R2, 0.0);
    v[3] = c(R2, 0.0);
    v
}

pub fn grin_swap_pre() -> Vec<C> {
    let second = kron(&[c(R2, 0.0), c(0.0, R2)], &ket2(0));
    kron(&single_cat_pre(), &second)
}

/// Index of `(path, pol, path', pol')` digits.
pub fn idx4(p: usize, s: usize, q: usize, t: usize) -> usize {
    (p << 3) | (s << 2) | (q << 1) | t
}

pub fn grin_swap_post() -> Vec<C> {
    let mut v = vec![c(0.0, 0.0); 16];
    v[idx4(0, 0, 1, 0)] = c(0.5, 0.0);
    v[idx4(1, 1, 1, 0)] = c(0.5, 0.0);
    v[idx4(0, 0, 0, 1)] = c(0.5, 0.0);
    v[idx4(1, 1, 0, 1)] = c(-0.5, 0.0);
    v
}

/// Operator acting as `op` on qubit `k` of `n` (big-endian).
pub fn on_qubit(op: &Mat, k: usize, n: usize) -> Mat {
    let id = identity(2);
    let mut m = identity(1);
    for j in 0..n {
        m = kron_mat(&m, if j == k { op } else { &id });
    }
    m
}

/// Reduced density matrix of qubit `k` of an `n`-qubit pure state.
pub fn reduce_to_qubit(psi: &[C], k: usize, n: usize) -> [[C; 2]; 2] {
    let mut rho = [[c(0.0, 0.0); 2]; 2];
    let shift = n - 1 - k;
    for (a, x) in psi.iter().enumerate() {
        for (b, y) in psi.iter().enumerate() {
            // environment indices must agree
            if (a & !(1 << shift)) == (b & !(1 << shift)) {
                rho[(a >> shift) & 1][(b >> shift) & 1] += x * y.conj();
            }
        }
    }
    rho
}

/// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi rotation of
/// its real embedding `[[Re, −Im], [Im, Re]]` (each eigenvalue appears twice).
pub fn hermitian_eigenvalues(h: &Mat) -> Vec<f64> {
    let n = h.len();
    let m = 2 * n;
    let mut a = vec![vec![0.0f64; m]; m];
    for r in 0..n {
        for k in 0..n {
            a[r][k] = h[r][k].re;
            a[r + n][k + n] = h[r][k].re;
            a[r][k + n] = -h[r][k].im;
            a[r + n][k] = h[r][k].im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|p| (0..m).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|k| a[k][k]).collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn mat_max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .zip(b)
        .map(|(r, s)| max_abs_diff(r, s))
        .fold(0.0, f64::max)
}

/// Library matrix as nested rows.
pub fn rows(m: &nalgebra::DMatrix<C>) -> Mat {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|k| m[(r, k)]).collect())
        .collect()
}
