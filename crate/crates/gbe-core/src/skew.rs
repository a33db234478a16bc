//! Skew-orthogonal polynomials for the orthogonal (β = 1) and symplectic
//! (β = 4) ensembles, expanded in the truncated orthogonal basis `p_j(x, y)`.
//!
//! The coefficients come from Pfaffian ratios of two antisymmetric Gram
//! matrices of the basis: `W` (modified β = 4 product) and `V` (β = 1
//! product). Quadrature and a direct linear solve are kept alongside as
//! independent checks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::beta::Beta;
use crate::error::{invalid, Error, Result};
use crate::moments::{erf_moments, nm_basis, MomentTable, OrthoBasis};
use crate::pfaffian::{pf, solve, SkewMatrix};
use crate::precision::{Cutoff, PrecisionContext};
use crate::quad::{gauss_legendre_real, gaussian_truncation, TanhSinh};
use crate::real::Real;

/// Gram matrix of the basis under the modified β = 4 product:
/// `w_{j,k} = δ_{j+1,k} h_k + σ_j σ_k` above the diagonal, with
/// `σ_j = p_j(y) e^(−y²/2)/√2`.
#[derive(Clone, Debug)]
pub struct WMatrixBuilder {
    basis: OrthoBasis,
    sigma: Vec<Real>,
}

impl WMatrixBuilder {
    pub fn new(y: &Cutoff, n_max: usize, ctx: &PrecisionContext) -> Result<Self> {
        Ok(Self::from_basis(nm_basis(y, n_max, ctx)?))
    }

    pub fn from_basis(basis: OrthoBasis) -> Self {
        let ctx = basis.context().clone();
        let sigma = match basis.cutoff() {
            Cutoff::PosInf => vec![ctx.zero(); basis.n_max() + 1],
            Cutoff::Finite(y) => {
                let g = ctx.exp(&-y.square().mul_pow2(-1)) / ctx.int(2).sqrt();
                (0..=basis.n_max()).map(|j| crate::moments::horner(basis.coeffs(j), y) * &g).collect()
            }
        };
        WMatrixBuilder { basis, sigma }
    }

    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.n_max()
    }

    pub fn sigma(&self, j: usize) -> &Real {
        &self.sigma[j]
    }

    /// Boundary term `Ω_{j,k} = e^(−y²) p_j(y) p_k(y) = 2 σ_j σ_k`.
    pub fn omega(&self, j: usize, k: usize) -> Real {
        (&self.sigma[j] * &self.sigma[k]).mul_pow2(1)
    }

    /// Entry for any pair of labels, antisymmetric.
    pub fn entry(&self, a: usize, b: usize) -> Real {
        if a == b {
            return self.basis.context().zero();
        }
        let (lo, hi, sign) = if a < b { (a, b, false) } else { (b, a, true) };
        let mut v = &self.sigma[lo] * &self.sigma[hi];
        if hi == lo + 1 {
            v += self.basis.h(hi);
        }
        if sign {
            -v
        } else {
            v
        }
    }

    /// `W_m` on labels `0..=m`.
    pub fn matrix(&self, m: usize) -> Result<SkewMatrix> {
        check_degree(m, self.degree())?;
        Ok(SkewMatrix::from_upper(m + 1, self.basis.context().bits(), |a, b| self.entry(a, b)))
    }
}

/// Gram matrix of the basis under the β = 1 product. With
/// `X_{j,k} = ½ (∫_{-∞}^{y} p_j e^(−x²/2) erf(x/√2)) P_k(∞)` and
/// `Φ_{j,k} = ½ P_j(y) (P_k(∞) − P_k(y))`, the entries above the diagonal are
/// `h_j − X_{j,j+1} − Φ_{j,j+1}` on the superdiagonal and `X_{k,j} + Φ_{k,j}`
/// further out.
#[derive(Clone, Debug)]
pub struct VMatrixBuilder {
    basis: OrthoBasis,
    erf_proj: Vec<Real>,
    p_inf: Vec<Real>,
    p_y: Vec<Real>,
}

impl VMatrixBuilder {
    pub fn new(y: &Cutoff, n_max: usize, ctx: &PrecisionContext) -> Result<Self> {
        Self::from_basis(nm_basis(y, n_max, ctx)?)
    }

    pub fn from_basis(basis: OrthoBasis) -> Result<Self> {
        let ctx = basis.context().clone();
        let n = basis.n_max();
        let half = ctx.ratio(1, 2);
        let at_inf = MomentTable::new(&half, &Cutoff::PosInf, n, &ctx)?;
        let at_y = MomentTable::new(&half, basis.cutoff(), n, &ctx)?;
        let e = erf_moments(basis.cutoff(), n, &ctx)?;
        let mut erf_proj = Vec::with_capacity(n + 1);
        let mut p_inf = Vec::with_capacity(n + 1);
        let mut p_y = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let c = basis.coeffs(j);
            erf_proj.push(crate::moments::dot(c, &e).mul_pow2(-1));
            p_inf.push(at_inf.integrate_poly(c));
            p_y.push(at_y.integrate_poly(c));
        }
        Ok(VMatrixBuilder { basis, erf_proj, p_inf, p_y })
    }

    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.n_max()
    }

    pub fn x(&self, j: usize, k: usize) -> Real {
        &self.erf_proj[j] * &self.p_inf[k]
    }

    pub fn phi(&self, j: usize, k: usize) -> Real {
        (&self.p_y[j] * (&self.p_inf[k] - &self.p_y[k])).mul_pow2(-1)
    }

    /// `P_j(y, y)`.
    pub fn capital_p_at_cutoff(&self, j: usize) -> &Real {
        &self.p_y[j]
    }

    /// `P_j(∞, y)`.
    pub fn capital_p_inf(&self, j: usize) -> &Real {
        &self.p_inf[j]
    }

    pub fn entry(&self, a: usize, b: usize) -> Real {
        if a == b {
            return self.basis.context().zero();
        }
        let (lo, hi, sign) = if a < b { (a, b, false) } else { (b, a, true) };
        let v = if hi == lo + 1 {
            self.basis.h(lo) - self.x(lo, hi) - self.phi(lo, hi)
        } else {
            self.x(hi, lo) + self.phi(hi, lo)
        };
        if sign {
            -v
        } else {
            v
        }
    }

    /// `V_m` on labels `0..=m`.
    pub fn matrix(&self, m: usize) -> Result<SkewMatrix> {
        check_degree(m, self.degree())?;
        Ok(SkewMatrix::from_upper(m + 1, self.basis.context().bits(), |a, b| self.entry(a, b)))
    }
}

fn check_degree(m: usize, max: usize) -> Result<()> {
    if m > max {
        Err(Error::IndexOutOfRange { index: m, max })
    } else {
        Ok(())
    }
}

/// `W_m` at cutoff `y`.
pub fn build_w(y: &Cutoff, m: usize, ctx: &PrecisionContext) -> Result<SkewMatrix> {
    WMatrixBuilder::new(y, m, ctx)?.matrix(m)
}

/// `V_m` at cutoff `y`.
pub fn build_v(y: &Cutoff, m: usize, ctx: &PrecisionContext) -> Result<SkewMatrix> {
    VMatrixBuilder::new(y, m, ctx)?.matrix(m)
}

/// Pfaffian of the leading `len × len` block; `1` for `len = 0`.
pub fn pf_leading(gram: &SkewMatrix, len: usize) -> Real {
    if len == 0 {
        Real::one(gram.bits())
    } else {
        let idx: Vec<usize> = (0..len).collect();
        pf(&gram.select(&idx))
    }
}

/// Pfaffian of the leading block on labels `0..len` with label `from`
/// replaced by `to`.
pub fn pf_leading_subst(gram: &SkewMatrix, len: usize, from: usize, to: usize) -> Real {
    let labels: Vec<usize> = (0..len).map(|i| if i == from { to } else { i }).collect();
    pf(&SkewMatrix::from_labels(&labels, gram.bits(), |a, b| gram.get(a, b)))
}

fn nonzero(v: Real, what: impl FnOnce() -> alloc::string::String) -> Result<Real> {
    if v.is_zero() {
        Err(Error::DegeneratePfaffian { what: what() })
    } else {
        Ok(v)
    }
}

/// Coefficient of `p_k` in the `j`-th skew-orthogonal polynomial, from the
/// Gram matrix of the basis (which must cover label `j`). Odd polynomials
/// carry no `p_(j−1)` component.
pub fn skew_alpha(gram: &SkewMatrix, j: usize, k: usize) -> Result<Real> {
    check_degree(j, gram.dim().saturating_sub(1))?;
    let bits = gram.bits();
    if k == j {
        return Ok(Real::one(bits));
    }
    if k > j || (j % 2 == 1 && k + 1 == j) {
        return Ok(Real::zero(bits));
    }
    let len = if j % 2 == 0 { j } else { j - 1 };
    let den = nonzero(pf_leading(gram, len), || format!("leading Pfaffian of size {len}"))?;
    Ok(-pf_leading_subst(gram, len, k, j) / den)
}

/// Norm `⟨η_{2j}, η_{2j+1}⟩ = Pf G_{2j+1} / Pf G_{2j−1}`.
pub fn skew_norm(gram: &SkewMatrix, j: usize) -> Result<Real> {
    check_degree(2 * j + 1, gram.dim().saturating_sub(1))?;
    let den = nonzero(pf_leading(gram, 2 * j), || format!("leading Pfaffian of size {}", 2 * j))?;
    Ok(pf_leading(gram, 2 * j + 2) / den)
}

/// Entry of the inverse coefficient matrix: `p_j = Σ_k β_{j,k} η_k`.
pub fn skew_inverse_coefficient(gram: &SkewMatrix, j: usize, k: usize) -> Result<Real> {
    check_degree(j, gram.dim().saturating_sub(1))?;
    let bits = gram.bits();
    if k == j {
        return Ok(Real::one(bits));
    }
    if k > j {
        return Ok(Real::zero(bits));
    }
    let len = if k % 2 == 0 { k + 2 } else { k + 1 };
    let den = nonzero(pf_leading(gram, len), || format!("leading Pfaffian of size {len}"))?;
    Ok(pf_leading_subst(gram, len, k, j) / den)
}

/// `α̃_{j,k}` at cutoff `y` (the W matrix is evaluated at `y` as given).
pub fn alpha_beta4(j: usize, k: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    let w = WMatrixBuilder::new(y, j, ctx)?;
    skew_alpha(&w.matrix(j)?, j, k)
}

/// `q̃_j` at cutoff `y`.
pub fn norm_q_tilde(j: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    let w = WMatrixBuilder::new(y, 2 * j + 1, ctx)?;
    skew_norm(&w.matrix(2 * j + 1)?, j)
}

/// `α_{j,k}` at cutoff `y`.
pub fn alpha_beta1(j: usize, k: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    let v = VMatrixBuilder::new(y, j, ctx)?;
    skew_alpha(&v.matrix(j)?, j, k)
}

/// `r_j` at cutoff `y`.
pub fn norm_r(j: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    let v = VMatrixBuilder::new(y, 2 * j + 1, ctx)?;
    skew_norm(&v.matrix(2 * j + 1)?, j)
}

/// Normalisation of the odd polynomials, which are only fixed up to adding
/// a multiple of the preceding even one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    /// No `p_(2j)` component in `η_(2j+1)`.
    OrthoBasis,
    /// No `x^(2j)` term in `η_(2j+1)`.
    Monomial,
}

/// Skew-orthogonal family to a fixed degree, stored as coefficients in the
/// orthogonal basis together with the norms.
///
/// For β = 4 the stored family is the one for the modified product at
/// cutoff `√2·y`; [`SkewBasis::polynomial`] rescales it to the physical
/// variable.
#[derive(Clone, Debug)]
pub struct SkewBasis {
    beta: Beta,
    y: Cutoff,
    gram: SkewMatrix,
    basis: OrthoBasis,
    alpha: Vec<Vec<Real>>,
    norms: Vec<Real>,
    gauge: Gauge,
}

impl SkewBasis {
    pub fn new(beta: Beta, y: &Cutoff, degree: usize, ctx: &PrecisionContext) -> Result<Self> {
        let (gram, basis) = match beta {
            Beta::Orthogonal => {
                let v = VMatrixBuilder::new(y, degree, ctx)?;
                (v.matrix(degree)?, v.basis)
            }
            Beta::Symplectic => {
                let w = WMatrixBuilder::new(&y.scaled(&ctx.int(2).sqrt()), degree, ctx)?;
                (w.matrix(degree)?, w.basis)
            }
            Beta::Unitary => return Err(invalid("skew-orthogonal polynomials need beta = 1 or 4")),
        };
        let mut alpha = Vec::with_capacity(degree + 1);
        for j in 0..=degree {
            let mut row = Vec::with_capacity(j + 1);
            if j < 2 {
                row.extend((0..j).map(|_| Real::zero(gram.bits())));
            } else {
                let len = if j % 2 == 0 { j } else { j - 1 };
                let den = nonzero(pf_leading(&gram, len), || format!("leading Pfaffian of size {len}"))?;
                for k in 0..j {
                    if j % 2 == 1 && k + 1 == j {
                        row.push(Real::zero(gram.bits()));
                    } else {
                        row.push(-pf_leading_subst(&gram, len, k, j) / &den);
                    }
                }
            }
            row.push(Real::one(gram.bits()));
            alpha.push(row);
        }
        let mut norms = Vec::new();
        let mut prev = Real::one(gram.bits());
        for j in 0..(degree + 1) / 2 {
            let next = pf_leading(&gram, 2 * j + 2);
            let r = nonzero(prev.clone(), || format!("leading Pfaffian of size {}", 2 * j))?;
            norms.push(&next / r);
            prev = next;
        }
        Ok(SkewBasis { beta, y: y.clone(), gram, basis, alpha, norms, gauge: Gauge::OrthoBasis })
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.y
    }

    pub fn degree(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    /// Gram matrix of the orthogonal basis the coefficients refer to.
    pub fn gram(&self) -> &SkewMatrix {
        &self.gram
    }

    pub fn orthogonal_basis(&self) -> &OrthoBasis {
        &self.basis
    }

    /// Coefficient of `p_k` in `η_j` (of `Q̃_j` for β = 4).
    pub fn alpha(&self, j: usize, k: usize) -> Real {
        if k > j {
            Real::zero(self.gram.bits())
        } else {
            self.alpha[j][k].clone()
        }
    }

    /// Norm in the basis variable (`r_j`, or `q̃_j` for β = 4).
    pub fn basis_norm(&self, j: usize) -> &Real {
        &self.norms[j]
    }

    /// Norm in the physical variable (`r_j`, or `q_j = 2^(−2j−1/2) q̃_j`).
    pub fn norm(&self, j: usize) -> Real {
        match self.beta {
            Beta::Symplectic => {
                let root2 = Real::from_i64(2, self.gram.bits()).sqrt();
                (&self.norms[j] / root2).mul_pow2(-2 * j as i64)
            }
            _ => self.norms[j].clone(),
        }
    }

    pub fn norm_count(&self) -> usize {
        self.norms.len()
    }

    /// Monomial coefficients of `η_j` in the basis variable.
    pub fn basis_polynomial(&self, j: usize) -> Vec<Real> {
        let mut out = vec![Real::zero(self.gram.bits()); j + 1];
        for (k, a) in self.alpha[j].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(self.basis.coeffs(k)) {
                *o += a * c;
            }
        }
        out
    }

    /// Monic monomial coefficients of `η_j` in the physical variable
    /// (`R_j` for β = 1, `Q_j(λ) = 2^(−j/2) Q̃_j(√2 λ)` for β = 4).
    pub fn polynomial(&self, j: usize) -> Vec<Real> {
        let mut c = self.basis_polynomial(j);
        if self.beta == Beta::Symplectic {
            let root2 = Real::from_i64(2, self.gram.bits()).sqrt();
            for (i, ci) in c.iter_mut().enumerate() {
                // 2^((i − j)/2)
                let d = i as i64 - j as i64;
                let mut v = ci.mul_pow2(d.div_euclid(2));
                if d.rem_euclid(2) == 1 {
                    v *= &root2;
                }
                *ci = v;
            }
        }
        c
    }

    /// The same family in another gauge; norms are unchanged.
    pub fn regauge(&self, gauge: Gauge) -> SkewBasis {
        let mut out = self.clone();
        out.gauge = gauge;
        for odd in (1..=self.degree()).step_by(2) {
            let c = match gauge {
                Gauge::OrthoBasis => out.alpha[odd][odd - 1].clone(),
                Gauge::Monomial => out.basis_polynomial(odd)[odd - 1].clone(),
            };
            out.shift_odd(odd, &c);
        }
        out
    }

    /// `η_odd ← η_odd − c·η_(odd−1)`.
    pub fn shift_odd(&mut self, odd: usize, c: &Real) {
        assert!(odd % 2 == 1, "only odd polynomials carry the gauge freedom");
        let even = self.alpha[odd - 1].clone();
        for (a, e) in self.alpha[odd].iter_mut().zip(&even) {
            *a -= c * e;
        }
    }

    /// Inverse coefficient matrix `p_j = Σ_k β_{j,k} η_k`, valid in the
    /// orthogonal-basis gauge.
    pub fn inverse_coefficients(&self) -> Result<Vec<Vec<Real>>> {
        let n = self.degree();
        (0..=n).map(|j| (0..=n).map(|k| skew_inverse_coefficient(&self.gram, j, k)).collect()).collect()
    }
}

/// Monic `η_j` in the physical variable for the requested gauge.
pub fn assemble_sop(beta: Beta, j: usize, y: &Cutoff, gauge: Gauge, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let sb = SkewBasis::new(beta, y, j, ctx)?;
    let sb = if gauge == Gauge::OrthoBasis { sb } else { sb.regauge(gauge) };
    Ok(sb.polynomial(j))
}

/// The antisymmetric products the polynomials are built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkewProduct {
    /// `½ ∫∫ e^(−(x²+z²)/2) f(x) g(z) sgn(z − x)` on `(−∞, y]²`.
    Beta1,
    /// `½ ∫ e^(−2x²) (f g' − g f')` on `(−∞, y]`.
    Beta4,
    /// `½ ∫ e^(−x²) (f g' − g f')` on `(−∞, y]`.
    Beta4Modified,
}

pub(crate) fn poly_derivative(f: &[Real]) -> Vec<Real> {
    f.iter().enumerate().skip(1).map(|(i, c)| c * Real::from_u64(i as u64, c.bits())).collect()
}

fn poly_or_zero(f: &[Real], x: &Real) -> Real {
    if f.is_empty() {
        Real::zero(x.bits())
    } else {
        crate::moments::horner(f, x)
    }
}

/// Direct quadrature of a skew product of two polynomials, as an oracle for
/// the moment-based route. The β = 1 double integral is split as
/// `½ ∫ e^(−x²/2) f(x) [G(y) − 2 G(x)] dx` with `G` the running integral of
/// `e^(−z²/2) g`, accumulated between consecutive tanh-sinh nodes.
pub fn skew_inner_quad(product: SkewProduct, f: &[Real], g: &[Real], y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    let bits = ctx.bits();
    let qctx = ctx.with_bits(bits + 32);
    let deg = f.len() + g.len();
    let a = match product {
        SkewProduct::Beta1 => 0.5,
        SkewProduct::Beta4 => 2.0,
        SkewProduct::Beta4Modified => 1.0,
    };
    let l = qctx.real(gaussian_truncation(a, deg, bits + 32));
    let lo = -&l;
    let hi = match y {
        Cutoff::Finite(v) => {
            if *v <= lo {
                return Ok(qctx.zero());
            }
            v.with_bits(qctx.bits())
        }
        Cutoff::PosInf => l.clone(),
    };
    let f: Vec<Real> = f.iter().map(|c| c.with_bits(qctx.bits())).collect();
    let g: Vec<Real> = g.iter().map(|c| c.with_bits(qctx.bits())).collect();
    let tol = Real::one(64).mul_pow2(-((bits as i64 * 7) / 8));
    let ts = TanhSinh::new(&qctx, 9);
    match product {
        SkewProduct::Beta4 | SkewProduct::Beta4Modified => {
            let (fd, gd) = (poly_derivative(&f), poly_derivative(&g));
            let a = qctx.real(a);
            let (v, err) = ts.integrate(
                |x| {
                    let w = qctx.exp(&-(&a * x.square()));
                    w * (poly_or_zero(&f, x) * poly_or_zero(&gd, x) - poly_or_zero(&g, x) * poly_or_zero(&fd, x))
                },
                &lo,
                &hi,
                &tol,
            );
            if err > tol {
                return Err(Error::PrecisionExhausted { bits, what: "tanh-sinh quadrature of a skew product".into() });
            }
            Ok(v.mul_pow2(-1))
        }
        SkewProduct::Beta1 => {
            let gl = gauss_legendre_real(16, &qctx);
            let weight = |x: &Real| qctx.exp(&-x.square().mul_pow2(-1));
            let piece = |a: &Real, b: &Real| -> Real {
                let half = (b - a).mul_pow2(-1);
                let mid = (a + b).mul_pow2(-1);
                let mut s = qctx.zero();
                for (t, w) in gl.0.iter().zip(&gl.1) {
                    let x = &mid + &half * t;
                    s += w * weight(&x) * poly_or_zero(&g, &x);
                }
                s * half
            };
            let mut prev: Option<Real> = None;
            for level in 4..=9 {
                let rule = ts.rule(&lo, &hi, level);
                let mut running = qctx.zero();
                let mut last = lo.clone();
                let mut gx = Vec::with_capacity(rule.len());
                for (x, _) in &rule {
                    running += piece(&last, x);
                    gx.push(running.clone());
                    last = x.clone();
                }
                let g_end = &running + piece(&last, &hi);
                let mut s = qctx.zero();
                for ((x, w), gi) in rule.iter().zip(&gx) {
                    s += w * weight(x) * poly_or_zero(&f, x) * (&g_end - gi.mul_pow2(1));
                }
                let s = s.mul_pow2(-1);
                if let Some(p) = &prev {
                    if (&s - p).abs() < tol {
                        return Ok(s);
                    }
                }
                prev = Some(s);
            }
            Err(Error::PrecisionExhausted { bits, what: "nested quadrature of the beta = 1 product".into() })
        }
    }
}

/// `(A f)(x) = e^(x²/2) d/dx (e^(−x²/2) f(x)) = f'(x) − x f(x)`.
pub fn apply_a(f: &[Real], x: &Real) -> Real {
    poly_or_zero(&poly_derivative(f), x) - x * poly_or_zero(f, x)
}

/// `(A⁻¹ f)(x) = ½ e^(x²/2) ∫ sgn(x − z) e^(−z²/2) f(z) dz`, with the two
/// half-line integrals taken from Gaussian moments.
pub fn apply_a_inv(f: &[Real], x: &Real, ctx: &PrecisionContext) -> Result<Real> {
    let half = ctx.ratio(1, 2);
    let below = MomentTable::new(&half, &Cutoff::Finite(x.clone()), f.len(), ctx)?.integrate_poly(f);
    let total = MomentTable::new(&half, &Cutoff::PosInf, f.len(), ctx)?.integrate_poly(f);
    Ok(ctx.exp(&x.square().mul_pow2(-1)) * (below.mul_pow2(1) - total).mul_pow2(-1))
}

/// `Ω(f, g; y) = e^(−y²) f(y) g(y)`; zero at `y = +∞`.
pub fn omega(f: &[Real], g: &[Real], y: &Cutoff, ctx: &PrecisionContext) -> Real {
    match y {
        Cutoff::Finite(y) => ctx.exp(&-y.square()) * poly_or_zero(f, y) * poly_or_zero(g, y),
        Cutoff::PosInf => ctx.zero(),
    }
}

/// Result of the direct construction: physical-variable polynomials and
/// norms `⟨η_{2j}, η_{2j+1}⟩`.
#[derive(Clone, Debug)]
pub struct IterativeSop {
    pub polynomials: Vec<Vec<Real>>,
    pub norms: Vec<Real>,
}

/// Skew products of monomials `⟨x^a, x^b⟩` for `a, b ≤ degree` in the
/// physical variable (unmodified product for β = 4).
pub fn monomial_skew_gram(beta: Beta, degree: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Vec<Vec<Real>>> {
    let n = degree + 1;
    let mut s = vec![vec![ctx.zero(); n]; n];
    match beta {
        Beta::Symplectic => {
            let m = MomentTable::new(&ctx.int(2), y, 2 * degree + 1, ctx)?;
            for a in 0..n {
                for b in a + 1..n {
                    let v = (m.get(a + b - 1) * ctx.int((b - a) as i64)).mul_pow2(-1);
                    s[b][a] = -&v;
                    s[a][b] = v;
                }
            }
        }
        Beta::Orthogonal => {
            let half = MomentTable::new(&ctx.ratio(1, 2), y, degree, ctx)?;
            let unit = MomentTable::new(&ctx.one(), y, 2 * degree + 1, ctx)?;
            let e = erf_moments(y, degree, ctx)?;
            let root = (ctx.pi().mul_pow2(-1)).sqrt();
            // ∫_{-∞}^{x} z^b e^(−z²/2) dz = c_b G_0(x) + e^(−x²/2) q_b(x)
            let mut c: Vec<Real> = Vec::with_capacity(n);
            let mut q: Vec<Vec<Real>> = Vec::with_capacity(n);
            for b in 0..n {
                match b {
                    0 => {
                        c.push(ctx.one());
                        q.push(Vec::new());
                    }
                    1 => {
                        c.push(ctx.zero());
                        q.push(vec![ctx.int(-1)]);
                    }
                    _ => {
                        let f = ctx.int(b as i64 - 1);
                        c.push(&c[b - 2] * &f);
                        let mut qb = vec![ctx.zero(); b];
                        for (i, v) in q[b - 2].iter().enumerate() {
                            qb[i] = v * &f;
                        }
                        qb[b - 1] -= ctx.one();
                        q.push(qb);
                    }
                }
            }
            let k = |a: usize, b: usize| -> Real {
                let mut v = &c[b] * &root * (half.get(a) + &e[a]);
                for (i, qi) in q[b].iter().enumerate() {
                    v += qi * unit.get(a + i);
                }
                v
            };
            for a in 0..n {
                for b in a + 1..n {
                    let v = (half.get(a) * half.get(b)).mul_pow2(-1) - k(a, b);
                    s[b][a] = -&v;
                    s[a][b] = v;
                }
            }
        }
        Beta::Unitary => return Err(invalid("skew products need beta = 1 or 4")),
    }
    Ok(s)
}

/// Builds the skew-orthogonal family directly from the defining conditions
/// `⟨η_j, x^i⟩ = 0` for `i < j` (`i < j − 1` for odd `j`) plus the gauge,
/// solved as dense linear systems in the monomial basis. Meant for low
/// degree, where the monomial Gram matrix is well conditioned.
pub fn iterative_sop(beta: Beta, degree: usize, y: &Cutoff, gauge: Gauge, ctx: &PrecisionContext) -> Result<IterativeSop> {
    let s = monomial_skew_gram(beta, degree, y, ctx)?;
    let a = if beta == Beta::Symplectic { ctx.int(2) } else { ctx.one() };
    let mu = MomentTable::new(&a, y, 2 * degree + 1, ctx)?;
    let mut polys: Vec<Vec<Real>> = Vec::with_capacity(degree + 1);
    for j in 0..=degree {
        let mut eta = vec![ctx.zero(); j + 1];
        eta[j] = ctx.one();
        if j > 0 {
            let conds = if j % 2 == 0 { j } else { j - 1 };
            let mut rows: Vec<Vec<Real>> = (0..conds).map(|i| (0..j).map(|l| s[l][i].clone()).collect()).collect();
            let mut rhs: Vec<Real> = (0..conds).map(|i| -&s[j][i]).collect();
            if j % 2 == 1 {
                match gauge {
                    Gauge::Monomial => {
                        let mut row = vec![ctx.zero(); j];
                        row[j - 1] = ctx.one();
                        rows.push(row);
                        rhs.push(ctx.zero());
                    }
                    Gauge::OrthoBasis => {
                        let p = orthogonal_by_hankel(mu.as_slice(), j - 1)?;
                        let ip = |l: usize| crate::moments::dot(&p, &mu.as_slice()[l..]);
                        rows.push((0..j).map(ip).collect());
                        rhs.push(-ip(j));
                    }
                }
            }
            let x = solve(&rows, &rhs)?;
            for (e, v) in eta.iter_mut().zip(x) {
                *e = v;
            }
        }
        polys.push(eta);
    }
    let norms = (0..(degree + 1) / 2)
        .map(|m| {
            let (e, o) = (&polys[2 * m], &polys[2 * m + 1]);
            let mut v = ctx.zero();
            for (a, ea) in e.iter().enumerate() {
                for (b, ob) in o.iter().enumerate() {
                    v += ea * ob * &s[a][b];
                }
            }
            v
        })
        .collect();
    Ok(IterativeSop { polynomials: polys, norms })
}

/// Monic degree-`d` orthogonal polynomial for the moment sequence `mu`.
fn orthogonal_by_hankel(mu: &[Real], d: usize) -> Result<Vec<Real>> {
    let bits = mu[0].bits();
    if d == 0 {
        return Ok(vec![Real::one(bits)]);
    }
    let rows: Vec<Vec<Real>> = (0..d).map(|i| (0..d).map(|l| mu[i + l].clone()).collect()).collect();
    let rhs: Vec<Real> = (0..d).map(|i| -&mu[i + d]).collect();
    let mut c = solve(&rows, &rhs)?;
    c.push(Real::one(bits));
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::h_infinity;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256).unwrap()
    }

    fn fin(ctx: &PrecisionContext, y: f64) -> Cutoff {
        Cutoff::Finite(ctx.real(y))
    }

    fn close(a: &Real, b: &Real, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn w_at_infinity_is_superdiagonal() {
        let c = ctx();
        let w = build_w(&Cutoff::PosInf, 3, &c).unwrap();
        assert!(w.get(0, 2).is_zero() && w.get(1, 3).is_zero() && w.get(0, 3).is_zero());
        assert!(close(&w.get(1, 2), &h_infinity(2, &c), 1e-70));
        assert!(close(&w.get(0, 1), &h_infinity(1, &c), 1e-70));
        assert!(close(&pf(&w), &(h_infinity(1, &c) * h_infinity(3, &c)), 1e-70));
        for j in 0..4 {
            assert!(w.get(j, j).is_zero());
        }
    }

    #[test]
    fn w_entries_match_quadrature() {
        let c = PrecisionContext::new(160).unwrap();
        for &y in &[0.0, -0.7, 1.3] {
            let wb = WMatrixBuilder::new(&fin(&c, y), 3, &c).unwrap();
            for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
                let q = skew_inner_quad(
                    SkewProduct::Beta4Modified,
                    wb.basis().coeffs(a),
                    wb.basis().coeffs(b),
                    &fin(&c, y),
                    &c,
                )
                .unwrap();
                assert!(close(&wb.entry(a, b), &q, 1e-35), "y={y} ({a},{b})");
            }
        }
    }

    #[test]
    fn v_at_infinity_is_chequerboard() {
        let c = ctx();
        let vb = VMatrixBuilder::new(&Cutoff::PosInf, 3, &c).unwrap();
        let v = vb.matrix(3).unwrap();
        assert!(close(&v.get(0, 1), &c.sqrt_pi(), 1e-70));
        assert!(close(&v.get(0, 3), &vb.x(3, 0), 1e-70));
        // Γ(2) Γ(1/2)
        assert!(close(&vb.x(3, 0), &c.sqrt_pi(), 1e-70));
        assert!(v.get(0, 2).abs() < 1e-70 && v.get(1, 3).abs() < 1e-70);
        // X_{1,2} = Γ(1) Γ(3/2)
        assert!(close(&vb.x(1, 2), &c.sqrt_pi().mul_pow2(-1), 1e-70));
        assert!(vb.x(2, 1).abs() < 1e-70);
    }

    #[test]
    fn v_superdiagonal_forms_agree() {
        let c = ctx();
        let vb = VMatrixBuilder::new(&fin(&c, 0.4), 6, &c).unwrap();
        for a in 0..6 {
            let lhs = vb.basis().h(a) - vb.x(a, a + 1) - vb.phi(a, a + 1);
            let rhs = vb.x(a + 1, a) + vb.phi(a + 1, a);
            assert!(close(&lhs, &rhs, 1e-60), "a={a}");
        }
    }

    #[test]
    fn v_entries_match_nested_quadrature() {
        let c = PrecisionContext::new(128).unwrap();
        for &y in &[0.0, 0.5] {
            let vb = VMatrixBuilder::new(&fin(&c, y), 3, &c).unwrap();
            for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)] {
                let q = skew_inner_quad(SkewProduct::Beta1, vb.basis().coeffs(a), vb.basis().coeffs(b), &fin(&c, y), &c)
                    .unwrap();
                assert!(close(&vb.entry(a, b), &q, 1e-28), "y={y} ({a},{b}): {} vs {}", vb.entry(a, b), q);
            }
        }
    }

    #[test]
    fn beta4_coefficients_and_norms() {
        let c = ctx();
        let q0 = norm_q_tilde(0, &fin(&c, 0.0), &c).unwrap();
        assert!(close(&q0, &c.sqrt_pi().mul_pow2(-2), 1e-70));
        for k in [0, 2] {
            let a = alpha_beta4(4, k, &Cutoff::PosInf, &c).unwrap();
            assert!(close(&a, &c.int(2), 1e-70));
        }
        for y in [-1.0, 0.3, 2.0] {
            assert!(alpha_beta4(3, 2, &fin(&c, y), &c).unwrap().is_zero());
        }
    }

    #[test]
    fn beta1_coefficients_and_norms() {
        let c = ctx();
        let r0 = norm_r(0, &fin(&c, 0.0), &c).unwrap();
        let expect = c.sqrt_pi() * (c.int(2) - c.int(2).sqrt()) / c.int(4);
        assert!(close(&r0, &expect, 1e-70));
        let a = alpha_beta1(3, 1, &Cutoff::PosInf, &c).unwrap();
        assert!(close(&a, &c.int(-1), 1e-70));
        let sb = SkewBasis::new(Beta::Orthogonal, &Cutoff::PosInf, 6, &c).unwrap();
        for j in [2, 4, 6] {
            for k in 0..j {
                assert!(sb.alpha(j, k).abs() < 1e-70, "alpha({j},{k})");
            }
        }
    }

    #[test]
    fn low_degree_polynomials() {
        let c = ctx();
        let sb = SkewBasis::new(Beta::Symplectic, &fin(&c, 0.0), 3, &c).unwrap();
        let q2 = sb.basis_polynomial(2);
        assert!(close(&q2[1], &(c.int(2) / c.sqrt_pi()), 1e-70));
        assert!(close(&q2[0], &c.ratio(1, 2), 1e-70));
        let sb1 = SkewBasis::new(Beta::Orthogonal, &fin(&c, 0.8), 3, &c).unwrap().regauge(Gauge::Monomial);
        let r1 = sb1.polynomial(1);
        assert!(r1[0].abs() < 1e-70 && close(&r1[1], &c.one(), 1e-70));
        assert_eq!(sb1.polynomial(0).len(), 1);
        // q_0(y) = √π erfc(−√2 y)/(4√2)
        let y = c.real(0.6);
        let sb4 = SkewBasis::new(Beta::Symplectic, &Cutoff::Finite(y.clone()), 1, &c).unwrap();
        let root2 = c.int(2).sqrt();
        let expect = c.sqrt_pi() * c.erfc(&-(&root2 * &y)) / (root2 * c.int(4));
        assert!(close(&sb4.norm(0), &expect, 1e-70));
    }

    #[test]
    fn quadrature_norms_and_boundary_identity() {
        let c = PrecisionContext::new(160).unwrap();
        let y = fin(&c, 0.0);
        let sb = SkewBasis::new(Beta::Symplectic, &y, 1, &c).unwrap();
        let q = skew_inner_quad(SkewProduct::Beta4, &sb.polynomial(0), &sb.polynomial(1), &y, &c).unwrap();
        assert!(close(&q, &sb.norm(0), 1e-40));
        let b = nm_basis(&fin(&c, 0.9), 2, &c).unwrap();
        let p0 = b.coeffs(0);
        let ap0: Vec<Real> = vec![c.zero(), c.int(-1)];
        assert!(close(&b.inner(p0, &ap0), &omega(p0, p0, &fin(&c, 0.9), &c).mul_pow2(-1), 1e-40));
    }

    #[test]
    fn operator_round_trip_and_boundary_term() {
        let c = ctx();
        let b = nm_basis(&fin(&c, 0.5), 3, &c).unwrap();
        let x = c.real(0.37);
        assert!(close(&apply_a(&[c.one()], &x), &-&x, 1e-70));
        // A⁻¹ p₂ differentiated numerically against the Gaussian factor
        let p2 = b.coeffs(2);
        let h = c.real(1e-20);
        let g = |t: &Real| c.exp(&-t.square().mul_pow2(-1)) * apply_a_inv(p2, t, &c).unwrap();
        let deriv = (g(&(&x + &h)) - g(&(&x - &h))) / h.mul_pow2(1);
        let back = deriv * c.exp(&x.square().mul_pow2(-1));
        assert!(close(&back, &poly_or_zero(p2, &x), 1e-30));
        let y = fin(&c, 0.5);
        let (f, g) = (b.coeffs(1), b.coeffs(3));
        let af: Vec<Real> = {
            let mut v = poly_derivative(f);
            v.push(c.zero());
            v.push(c.zero());
            for (i, ci) in f.iter().enumerate() {
                v[i + 1] -= ci;
            }
            v
        };
        let ag: Vec<Real> = {
            let mut v = poly_derivative(g);
            v.push(c.zero());
            v.push(c.zero());
            for (i, ci) in g.iter().enumerate() {
                v[i + 1] -= ci;
            }
            v
        };
        let lhs = b.inner(f, &ag) + b.inner(g, &af);
        assert!(close(&lhs, &omega(f, g, &y, &c), 1e-60));
    }

    #[test]
    fn monomial_gram_is_antisymmetric_by_parts() {
        let c = ctx();
        for beta in [Beta::Orthogonal, Beta::Symplectic] {
            let s = monomial_skew_gram(beta, 4, &fin(&c, 0.3), &c).unwrap();
            for a in 0..5 {
                assert!(s[a][a].is_zero());
            }
        }
        let c2 = PrecisionContext::new(128).unwrap();
        let s = monomial_skew_gram(Beta::Orthogonal, 3, &fin(&c2, 0.3), &c2).unwrap();
        let x2 = [c2.zero(), c2.zero(), c2.one()];
        let x3 = [c2.zero(), c2.zero(), c2.zero(), c2.one()];
        let q = skew_inner_quad(SkewProduct::Beta1, &x2, &x3, &fin(&c2, 0.3), &c2).unwrap();
        assert!(close(&s[2][3], &q, 1e-28));
    }

    #[test]
    fn direct_solve_matches_pfaffian_route() {
        let c = ctx();
        for beta in [Beta::Orthogonal, Beta::Symplectic] {
            for &y in &[-1.0, 0.0, 1.0, 2.0] {
                let yc = fin(&c, y);
                let sb = SkewBasis::new(beta, &yc, 3, &c).unwrap();
                for gauge in [Gauge::OrthoBasis, Gauge::Monomial] {
                    let it = iterative_sop(beta, 3, &yc, gauge, &c).unwrap();
                    let g = sb.regauge(gauge);
                    for j in 0..=3 {
                        for (a, b) in g.polynomial(j).iter().zip(&it.polynomials[j]) {
                            assert!(close(a, b, 1e-60), "beta={beta} y={y} j={j} {gauge:?}");
                        }
                    }
                    for m in 0..2 {
                        assert!(close(&g.norm(m), &it.norms[m], 1e-60));
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_coefficients_invert_alpha() {
        let c = ctx();
        for beta in [Beta::Orthogonal, Beta::Symplectic] {
            let sb = SkewBasis::new(beta, &fin(&c, 0.7), 7, &c).unwrap();
            let inv = sb.inverse_coefficients().unwrap();
            for j in 0..=7 {
                for k in 0..=7 {
                    let mut s = c.zero();
                    for m in 0..=7 {
                        s += &inv[j][m] * sb.alpha(m, k);
                    }
                    let e = if j == k { c.one() } else { c.zero() };
                    assert!(close(&s, &e, 1e-60), "beta={beta} ({j},{k})");
                }
            }
        }
    }

    #[test]
    fn degree_beyond_basis_is_rejected() {
        let c = ctx();
        let wb = WMatrixBuilder::new(&fin(&c, 0.0), 3, &c).unwrap();
        assert!(matches!(wb.matrix(4), Err(Error::IndexOutOfRange { .. })));
    }
}
