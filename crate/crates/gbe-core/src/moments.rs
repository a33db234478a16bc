//! Truncated Gaussian moments and the monic polynomials orthogonal under
//! `(f, g) = ∫_{-∞}^{y} e^(-x²) f(x) g(x) dx`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::precision::{Cutoff, PrecisionContext};
use crate::real::Real;

/// `m[k] = ∫_{-∞}^{y} x^k e^(-a x²) dx` for `k = 0..=k_max`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    a: Real,
    y: Cutoff,
    m: Vec<Real>,
}

impl MomentTable {
    pub fn new(a: &Real, y: &Cutoff, k_max: usize, ctx: &PrecisionContext) -> Result<Self> {
        if !a.is_positive() {
            return Err(invalid("weight exponent a must be positive"));
        }
        let two_a = a.mul_pow2(1);
        let mut m = Vec::with_capacity(k_max + 1);
        let root = (ctx.pi() / a).sqrt();
        match y {
            Cutoff::PosInf => {
                m.push(root);
                for k in 1..=k_max {
                    let v = if k % 2 == 1 {
                        ctx.zero()
                    } else {
                        &m[k - 2] * ctx.int(k as i64 - 1) / &two_a
                    };
                    m.push(v);
                }
            }
            Cutoff::Finite(y) => {
                let sa = a.sqrt();
                let g = ctx.exp(&-(a * y.square()));
                m.push((&root * ctx.erfc(&-(&sa * y))).mul_pow2(-1));
                if k_max >= 1 {
                    m.push(-(&g / &two_a));
                }
                let mut ypow = y.clone();
                for k in 2..=k_max {
                    let v = (&m[k - 2] * ctx.int(k as i64 - 1) - &ypow * &g) / &two_a;
                    m.push(v);
                    ypow *= y;
                }
            }
        }
        Ok(MomentTable { a: a.clone(), y: y.clone(), m })
    }

    pub fn get(&self, k: usize) -> &Real {
        &self.m[k]
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn as_slice(&self) -> &[Real] {
        &self.m
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.y
    }

    /// `|2a·m[k] − (k−1)·m[k−2] + y^(k−1) e^(−a y²)|` for `k ≥ 2`.
    pub fn recurrence_residual(&self, k: usize, ctx: &PrecisionContext) -> Real {
        assert!(k >= 2 && k < self.m.len());
        let boundary = match &self.y {
            Cutoff::PosInf => ctx.zero(),
            Cutoff::Finite(y) => y.powi(k as i32 - 1) * ctx.exp(&-(&self.a * y.square())),
        };
        (self.a.mul_pow2(1) * &self.m[k] - &self.m[k - 2] * ctx.int(k as i64 - 1) + boundary).abs()
    }

    /// `∫_{-∞}^{y} f(x) e^(-a x²) dx` for a polynomial given by coefficients.
    pub fn integrate_poly(&self, coeffs: &[Real]) -> Real {
        dot(coeffs, &self.m)
    }
}

pub(crate) fn dot(c: &[Real], m: &[Real]) -> Real {
    let mut s = Real::zero(c[0].bits());
    for (a, b) in c.iter().zip(m) {
        if !a.is_zero() {
            s += a * b;
        }
    }
    s
}

/// `∫_{-∞}^{y} x^k e^(-a x²) dx`.
pub fn truncated_moment(k: usize, y: &Cutoff, a: &Real, ctx: &PrecisionContext) -> Result<Real> {
    let t = MomentTable::new(a, y, k, ctx)?;
    Ok(t.m[k].clone())
}

/// `E_k(y) = ∫_{-∞}^{y} x^k e^(-x²/2) erf(x/√2) dx` for `k = 0..=k_max`.
pub fn erf_moments(y: &Cutoff, k_max: usize, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let unit = MomentTable::new(&ctx.one(), y, k_max.max(1), ctx)?;
    let c = (ctx.int(2) / ctx.pi()).sqrt();
    let mut e = Vec::with_capacity(k_max + 1);
    match y {
        Cutoff::PosInf => {
            e.push(ctx.zero());
            if k_max >= 1 {
                e.push(&c * unit.get(0));
            }
            for k in 2..=k_max {
                let v = &e[k - 2] * ctx.int(k as i64 - 1) + &c * unit.get(k - 1);
                e.push(v);
            }
        }
        Cutoff::Finite(y) => {
            let z = y / ctx.int(2).sqrt();
            let erfc_pos = ctx.erfc(&z);
            let erfc_neg = ctx.erfc(&-&z);
            // erf(z)² − 1 = −erfc(z)·erfc(−z), free of cancellation at both ends.
            let half_root = (ctx.pi().mul_pow2(-1)).sqrt().mul_pow2(-1);
            e.push(-(half_root * &erfc_pos * &erfc_neg));
            let erf_z = &erfc_neg - 1.0;
            let g = ctx.exp(&-(y.square().mul_pow2(-1))) * &erf_z;
            if k_max >= 1 {
                e.push(&c * unit.get(0) - &g);
            }
            let mut ypow = y.clone();
            for k in 2..=k_max {
                let v = &e[k - 2] * ctx.int(k as i64 - 1) + &c * unit.get(k - 1) - &ypow * &g;
                e.push(v);
                ypow *= y;
            }
        }
    }
    Ok(e)
}

/// Single erf-weighted moment `E_k(y)`.
pub fn erf_moment(k: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    Ok(erf_moments(y, k, ctx)?.pop().expect("non-empty table"))
}

/// Monic orthogonal polynomials `p_j(x, y)` on `(-∞, y]` with weight `e^(-x²)`.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    ctx: PrecisionContext,
    y: Cutoff,
    coeffs: Vec<Vec<Real>>,
    h: Vec<Real>,
    s: Vec<Real>,
    moments: MomentTable,
}

/// Largest working precision tried before giving up.
const MAX_BITS: usize = 16_384;

/// Orthogonal basis to degree `n_max`, raising the precision until the
/// orthogonality residual meets the caller's tolerance.
pub fn nm_basis(y: &Cutoff, n_max: usize, ctx: &PrecisionContext) -> Result<OrthoBasis> {
    let mut bits = ctx.bits().max(64 + 12 * n_max) + 64;
    let target = ctx.eps() * 1000.0;
    loop {
        let work = ctx.with_bits(bits);
        let y_work = match y {
            Cutoff::Finite(v) => Cutoff::Finite(v.with_bits(bits)),
            Cutoff::PosInf => Cutoff::PosInf,
        };
        let b = OrthoBasis::gram_schmidt(&y_work, n_max, &work)?;
        if b.max_orthogonality_residual() < target && b.h.iter().all(|h| h.is_positive()) {
            return Ok(b);
        }
        bits *= 2;
        if bits > MAX_BITS {
            return Err(Error::PrecisionExhausted {
                bits: bits / 2,
                what: format!("orthogonal basis to degree {n_max} at y = {}", y.to_f64()),
            });
        }
    }
}

impl OrthoBasis {
    fn gram_schmidt(y: &Cutoff, n_max: usize, ctx: &PrecisionContext) -> Result<Self> {
        let moments = MomentTable::new(&ctx.one(), y, 2 * n_max + 2, ctx)?;
        let m = moments.as_slice();
        let mut coeffs: Vec<Vec<Real>> = Vec::with_capacity(n_max + 1);
        // hv[k][i] = (x^i, p_k)
        let mut hv: Vec<Vec<Real>> = Vec::with_capacity(n_max + 1);
        let mut h: Vec<Real> = Vec::with_capacity(n_max + 1);
        let hankel_times = |c: &[Real]| -> Vec<Real> {
            (0..n_max + 2).map(|i| dot(c, &m[i..])).collect()
        };
        for j in 0..=n_max {
            let mut c: Vec<Real> = (0..=j).map(|_| ctx.zero()).collect();
            c[j] = ctx.one();
            for pass in 0..2 {
                let proj: Vec<Real> = (0..j)
                    .map(|k| {
                        let ip = if pass == 0 { hv[k][j].clone() } else { dot(&c, &hv[k]) };
                        ip / &h[k]
                    })
                    .collect();
                for (k, f) in proj.iter().enumerate() {
                    for (ci, pk) in c.iter_mut().zip(&coeffs[k]) {
                        *ci -= f * pk;
                    }
                }
            }
            let v = hankel_times(&c);
            let hj = dot(&c, &v);
            hv.push(v);
            h.push(hj);
            coeffs.push(c);
        }
        let s = (0..=n_max)
            .map(|k| {
                // (x p_k, p_k) = Σ_i c_i (x^(i+1), p_k)
                let c = &coeffs[k];
                let mut acc = ctx.zero();
                for (i, ci) in c.iter().enumerate() {
                    acc += ci * &hv[k][i + 1];
                }
                acc / &h[k]
            })
            .collect();
        Ok(OrthoBasis { ctx: ctx.clone(), y: y.clone(), coeffs, h, s, moments })
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.y
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Monomial coefficients of `p_j`, lowest degree first.
    pub fn coeffs(&self, j: usize) -> &[Real] {
        &self.coeffs[j]
    }

    /// Squared norm `h_j(y) = (p_j, p_j)`.
    pub fn h(&self, j: usize) -> &Real {
        &self.h[j]
    }

    /// Recurrence coefficient `Š_k = (x p_k, p_k)/h_k`.
    pub fn s(&self, k: usize) -> &Real {
        &self.s[k]
    }

    /// Recurrence coefficient `Ř_k = h_k/h_(k−1)`, `k ≥ 1`.
    pub fn r(&self, k: usize) -> Real {
        &self.h[k] / &self.h[k - 1]
    }

    pub fn moments(&self) -> &MomentTable {
        &self.moments
    }

    fn check(&self, j: usize) -> Result<()> {
        if j > self.n_max() {
            Err(Error::IndexOutOfRange { index: j, max: self.n_max() })
        } else {
            Ok(())
        }
    }

    /// `(f, g)` for polynomials given by coefficient slices.
    pub fn inner(&self, f: &[Real], g: &[Real]) -> Real {
        let m = self.moments.as_slice();
        let mut acc = self.ctx.zero();
        for (a, fa) in f.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            acc += fa * dot(g, &m[a..]);
        }
        acc
    }

    /// `max_{j≠k} |(p_j, p_k)| / √(h_j h_k)`.
    pub fn max_orthogonality_residual(&self) -> Real {
        let mut worst = self.ctx.zero();
        for j in 0..=self.n_max() {
            for k in 0..j {
                let v = self.inner(&self.coeffs[j], &self.coeffs[k]).abs() / (&self.h[j] * &self.h[k]).sqrt();
                worst = worst.max(v);
            }
        }
        worst
    }

    pub fn eval_p(&self, j: usize, x: &Real) -> Result<Real> {
        self.check(j)?;
        Ok(horner(&self.coeffs[j], x))
    }

    /// `ψ_j(x, y) = p_j(x, y) e^(−x²/2) / √h_j`.
    pub fn eval_psi(&self, j: usize, x: &Real) -> Result<Real> {
        let p = self.eval_p(j, x)?;
        Ok(p * self.ctx.exp(&-(x.square().mul_pow2(-1))) / self.h[j].sqrt())
    }

    /// `p_j(y, y)`; zero weight times polynomial is handled by callers at `y = ∞`.
    pub fn p_at_cutoff(&self, j: usize) -> Result<Real> {
        match &self.y {
            Cutoff::Finite(y) => self.eval_p(j, y),
            Cutoff::PosInf => Err(invalid("p_j(y, y) is unbounded at y = +inf")),
        }
    }

    /// `P_j(x, y) = ∫_{-∞}^{x} e^(−z²/2) p_j(z, y) dz`.
    pub fn capital_p(&self, j: usize, x: &Cutoff) -> Result<Real> {
        self.check(j)?;
        let half = MomentTable::new(&self.ctx.ratio(1, 2), x, j, &self.ctx)?;
        Ok(half.integrate_poly(&self.coeffs[j]))
    }

    /// `P_j(∞, y)`.
    pub fn capital_p_inf(&self, j: usize) -> Result<Real> {
        self.capital_p(j, &Cutoff::PosInf)
    }

    /// `Ψ_j(∞, y) = P_j(∞, y)/√h_j`.
    pub fn capital_psi_inf(&self, j: usize) -> Result<Real> {
        Ok(self.capital_p_inf(j)? / self.h[j].sqrt())
    }
}

/// Horner evaluation of a coefficient slice (lowest degree first).
pub fn horner(c: &[Real], x: &Real) -> Real {
    let mut acc = c.last().cloned().unwrap_or_else(|| Real::zero(x.bits()));
    for ci in c.iter().rev().skip(1) {
        acc = acc * x + ci;
    }
    acc
}

/// `h_j(∞) = √π j!/2^j`.
pub fn h_infinity(j: usize, ctx: &PrecisionContext) -> Real {
    (ctx.sqrt_pi() * ctx.factorial(j as u32)).mul_pow2(-(j as i64))
}
