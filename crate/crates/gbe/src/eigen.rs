//! Dense eigenvalues in double precision: Householder reduction to
//! tridiagonal form followed by implicit-shift QL.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Dense Hermitian matrix in row-major order. `im` is `None` for real
/// symmetric matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Option<Vec<f64>>,
}

impl HermitianMatrix {
    pub fn real(n: usize, re: Vec<f64>) -> Self {
        assert_eq!(re.len(), n * n);
        HermitianMatrix { n, re, im: None }
    }

    pub fn complex(n: usize, re: Vec<f64>, im: Vec<f64>) -> Self {
        assert_eq!(re.len(), n * n);
        assert_eq!(im.len(), n * n);
        HermitianMatrix { n, re, im: Some(im) }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.re[i * self.n + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s: f64 = self.re.iter().map(|x| x * x).sum();
        if let Some(im) = &self.im {
            s += im.iter().map(|x| x * x).sum::<f64>();
        }
        s.sqrt()
    }

    pub fn negated(&self) -> Self {
        HermitianMatrix {
            n: self.n,
            re: self.re.iter().map(|x| -x).collect(),
            im: self.im.as_ref().map(|im| im.iter().map(|x| -x).collect()),
        }
    }

    /// Real symmetric matrix `[[A, −B], [B, A]]` of twice the size, where
    /// `M = A + iB`. Every eigenvalue of `M` appears twice.
    pub fn embedded_real(&self) -> Self {
        let n = self.n;
        let m = 2 * n;
        let mut out = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let a = self.re[i * n + j];
                let b = self.im.as_ref().map_or(0.0, |im| im[i * n + j]);
                out[i * m + j] = a;
                out[(i + n) * m + j + n] = a;
                out[i * m + j + n] = -b;
                out[(i + n) * m + j] = b;
            }
        }
        HermitianMatrix::real(m, out)
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (d, e) = match &self.im {
            None => tridiagonalize_symmetric(self.re.clone(), self.n),
            Some(im) => tridiagonalize_hermitian(self.re.clone(), im.clone(), self.n),
        };
        tridiagonal_eigenvalues(d, e)
    }
}

/// Householder reduction of a real symmetric matrix. Returns the diagonal
/// and the subdiagonal (`e[0] = 0`, `e[i]` couples `i − 1` and `i`).
pub fn tridiagonalize_symmetric(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let col = |i: usize| a[i * n + k];
        let norm = ((k + 1)..n).map(|i| col(i) * col(i)).sum::<f64>().sqrt();
        d[k] = a[k * n + k];
        if norm == 0.0 {
            e[k + 1] = 0.0;
            continue;
        }
        let x0 = col(k + 1);
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in (k + 1)..n {
            v[i] = col(i);
        }
        v[k + 1] -= alpha;
        let vv: f64 = ((k + 1)..n).map(|i| v[i] * v[i]).sum();
        e[k + 1] = alpha;
        if vv == 0.0 {
            continue;
        }
        let tau = 2.0 / vv;
        for i in (k + 1)..n {
            let row = &a[i * n..(i + 1) * n];
            p[i] = tau * ((k + 1)..n).map(|j| row[j] * v[j]).sum::<f64>();
        }
        let vp: f64 = ((k + 1)..n).map(|i| v[i] * p[i]).sum();
        let half = 0.5 * tau * vp;
        for i in (k + 1)..n {
            p[i] -= half * v[i];
        }
        for i in (k + 1)..n {
            let (vi, qi) = (v[i], p[i]);
            let row = &mut a[i * n..(i + 1) * n];
            for j in (k + 1)..n {
                row[j] -= vi * p[j] + qi * v[j];
            }
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        e[n - 1] = a[(n - 1) * n + n - 2];
    }
    if n >= 1 {
        d[n - 1] = a[(n - 1) * n + n - 1];
    }
    (d, e)
}

/// Householder reduction of a complex Hermitian matrix. The complex
/// subdiagonal is replaced by its modulus, which a diagonal unitary
/// similarity achieves without changing the spectrum.
pub fn tridiagonalize_hermitian(mut ar: Vec<f64>, mut ai: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let (mut vr, mut vi) = (vec![0.0; n], vec![0.0; n]);
    let (mut pr, mut pi) = (vec![0.0; n], vec![0.0; n]);
    for k in 0..n.saturating_sub(2) {
        d[k] = ar[k * n + k];
        let norm = ((k + 1)..n)
            .map(|i| ar[i * n + k] * ar[i * n + k] + ai[i * n + k] * ai[i * n + k])
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            e[k + 1] = 0.0;
            continue;
        }
        let (x0r, x0i) = (ar[(k + 1) * n + k], ai[(k + 1) * n + k]);
        let m0 = x0r.hypot(x0i);
        let (ur, ui) = if m0 == 0.0 { (1.0, 0.0) } else { (x0r / m0, x0i / m0) };
        // alpha = −phase(x0)·‖x‖
        let (alr, ali) = (-ur * norm, -ui * norm);
        for i in (k + 1)..n {
            vr[i] = ar[i * n + k];
            vi[i] = ai[i * n + k];
        }
        vr[k + 1] -= alr;
        vi[k + 1] -= ali;
        let vv: f64 = ((k + 1)..n).map(|i| vr[i] * vr[i] + vi[i] * vi[i]).sum();
        e[k + 1] = norm;
        if vv == 0.0 {
            continue;
        }
        let tau = 2.0 / vv;
        // p = τ A v
        for i in (k + 1)..n {
            let (rr, ri) = (&ar[i * n..(i + 1) * n], &ai[i * n..(i + 1) * n]);
            let (mut sr, mut si) = (0.0, 0.0);
            for j in (k + 1)..n {
                sr += rr[j] * vr[j] - ri[j] * vi[j];
                si += rr[j] * vi[j] + ri[j] * vr[j];
            }
            pr[i] = tau * sr;
            pi[i] = tau * si;
        }
        // v†p is real for Hermitian A
        let vp: f64 = ((k + 1)..n).map(|i| vr[i] * pr[i] + vi[i] * pi[i]).sum();
        let half = 0.5 * tau * vp;
        for i in (k + 1)..n {
            pr[i] -= half * vr[i];
            pi[i] -= half * vi[i];
        }
        // A ← A − v q† − q v†
        for i in (k + 1)..n {
            let (a_r, a_i, b_r, b_i) = (vr[i], vi[i], pr[i], pi[i]);
            let (rr, ri) = (&mut ar[i * n..(i + 1) * n], &mut ai[i * n..(i + 1) * n]);
            for j in (k + 1)..n {
                rr[j] -= a_r * pr[j] + a_i * pi[j] + b_r * vr[j] + b_i * vi[j];
                ri[j] -= a_i * pr[j] - a_r * pi[j] + b_i * vr[j] - b_r * vi[j];
            }
        }
    }
    if n >= 2 {
        d[n - 2] = ar[(n - 2) * n + n - 2];
        e[n - 1] = ar[(n - 1) * n + n - 2].hypot(ai[(n - 1) * n + n - 2]);
    }
    if n >= 1 {
        d[n - 1] = ar[(n - 1) * n + n - 1];
    }
    (d, e)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL,
/// sorted ascending. `e[i]` couples `i − 1` and `i`; `e[0]` is ignored.
pub fn tridiagonal_eigenvalues(mut d: Vec<f64>, e_in: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&e_in[1..n]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::EigenNonConvergence { index: l, sweeps: MAX_SWEEPS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Collapses a spectrum whose eigenvalues come in degenerate pairs.
/// `tol` bounds the allowed splitting of a pair.
pub fn merge_pairs(sorted: &[f64], tol: f64) -> Result<Vec<f64>> {
    if sorted.len() % 2 != 0 {
        return Err(Error::Pairing { index: sorted.len(), gap: f64::NAN });
    }
    sorted
        .chunks(2)
        .enumerate()
        .map(|(i, pair)| {
            let gap = (pair[1] - pair[0]).abs();
            if gap > tol {
                Err(Error::Pairing { index: i, gap })
            } else {
                Ok(0.5 * (pair[0] + pair[1]))
            }
        })
        .collect()
}
