//! Distribution of the largest eigenvalue at finite `N`.
//!
//! All three ensembles are reduced to ratios against the `y = ∞` values so
//! that the huge combinatorial prefactors never appear.

use alloc::vec::Vec;

use crate::beta::Beta;
use crate::error::{invalid, Error, Result};
use crate::moments::{h_infinity, nm_basis};
use crate::pfaffian::{pf, pf_structured_expansion};
use crate::precision::{Cutoff, PrecisionContext};
use crate::quad::{gauss_legendre, gaussian_truncation};
use crate::real::Real;
use crate::skew::{pf_leading, VMatrixBuilder, WMatrixBuilder};

/// How a CDF value is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Dense Pfaffian (or the norm product for β = 2).
    DirectPfaffian,
    /// Nested-sum expansion of the Pfaffian. Exact for β = 4, a large-`y`
    /// approximation for β = 1.
    Expansion,
}

#[derive(Clone, Debug)]
pub struct CdfRequest {
    pub beta: Beta,
    pub n: usize,
    pub y: Cutoff,
    pub method: Method,
}

impl CdfRequest {
    pub fn new(beta: Beta, n: usize, y: Cutoff) -> Self {
        CdfRequest { beta, n, y, method: Method::DirectPfaffian }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("N must be at least 1"));
        }
        if self.beta == Beta::Orthogonal && self.n % 2 == 1 {
            return Err(Error::OddOrthogonalSize(self.n));
        }
        Ok(())
    }

    pub fn evaluate(&self, ctx: &PrecisionContext) -> Result<Real> {
        self.validate()?;
        match (self.beta, self.method) {
            (Beta::Unitary, _) => f2(self.n, &self.y, ctx),
            (Beta::Symplectic, Method::DirectPfaffian) => f4(self.n, &self.y, ctx),
            (Beta::Symplectic, Method::Expansion) => {
                let y = self.y.scaled(&ctx.int(2).sqrt());
                let pw = pf_w_via_expansion(self.n, &y, ctx)?;
                Ok(pw / odd_norms_at_infinity(self.n, ctx))
            }
            (Beta::Orthogonal, Method::DirectPfaffian) => f1(self.n, &self.y, ctx),
            (Beta::Orthogonal, Method::Expansion) => f1_large_y_expansion(self.n, &self.y, ctx),
        }
    }
}

fn require_positive(n: usize) -> Result<()> {
    if n == 0 {
        Err(invalid("N must be at least 1"))
    } else {
        Ok(())
    }
}

/// `F_{2,N}(y) = Π_{j<N} h_j(y)/h_j(∞)`.
pub fn f2(n: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    if y.is_infinite() {
        return Ok(ctx.one());
    }
    let b = nm_basis(y, n - 1, ctx)?;
    let c = b.context();
    let mut acc = c.one();
    for j in 0..n {
        acc *= b.h(j) / h_infinity(j, c);
    }
    Ok(acc.with_bits(ctx.bits()))
}

fn odd_norms_at_infinity(n: usize, ctx: &PrecisionContext) -> Real {
    (0..n).fold(ctx.one(), |acc, j| acc * h_infinity(2 * j + 1, ctx))
}

/// `F_{4,N}(y) = Pf W_{2N−1}(√2 y) / Π_{j<N} h_{2j+1}(∞)`.
pub fn f4(n: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    if y.is_infinite() {
        return Ok(ctx.one());
    }
    let w = WMatrixBuilder::new(&y.scaled(&ctx.int(2).sqrt()), 2 * n - 1, ctx)?;
    let c = w.basis().context().clone();
    let p = pf(&w.matrix(2 * n - 1)?);
    Ok((p / odd_norms_at_infinity(n, &c)).with_bits(ctx.bits()))
}

/// `F_{4,N}(y) = Π_{j<N} 2^(−2j−1/2) q̃_j(√2 y) / q_j(∞)`, with each `q̃_j`
/// formed as a ratio of two separately computed leading Pfaffians.
pub fn f4_norm_product(n: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    if y.is_infinite() {
        return Ok(ctx.one());
    }
    let w = WMatrixBuilder::new(&y.scaled(&ctx.int(2).sqrt()), 2 * n - 1, ctx)?;
    let c = w.basis().context().clone();
    let gram = w.matrix(2 * n - 1)?;
    let root2 = c.int(2).sqrt();
    let mut acc = c.one();
    for j in 0..n {
        let q_tilde = pf_leading(&gram, 2 * j + 2) / pf_leading(&gram, 2 * j);
        let q = (q_tilde / &root2).mul_pow2(-2 * j as i64);
        // q_j(∞) = √π (2j+1)! / 2^(4j + 3/2)
        let q_inf = (c.sqrt_pi() * c.factorial(2 * j as u32 + 1) / (&root2 * c.int(2))).mul_pow2(-4 * j as i64);
        acc *= q / q_inf;
    }
    Ok(acc.with_bits(ctx.bits()))
}

/// `F_{1,N}(y) = Pf V_{N−1}(y) / Π_{j<N/2} h_{2j}(∞)` for even `N`.
pub fn f1(n: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    if n % 2 == 1 {
        return Err(Error::OddOrthogonalSize(n));
    }
    if y.is_infinite() {
        return Ok(ctx.one());
    }
    let v = VMatrixBuilder::new(y, n - 1, ctx)?;
    let c = v.basis().context().clone();
    let p = pf(&v.matrix(n - 1)?);
    let norm = (0..n / 2).fold(c.one(), |acc, j| acc * h_infinity(2 * j, &c));
    Ok((p / norm).with_bits(ctx.bits()))
}

/// `Pf W_{2N−1}(y)` from the nested sum over
/// `0 ≤ i1 ≤ i2 < i3 ≤ i4 < … ≤ N−1` of products of
/// `M_{i1,i2} = ½ (Π_{m=i1}^{i2−1} h_{2m+2} / Π_{m=i1}^{i2} h_{2m+1}) p_{2i1}(y) p_{2i2+1}(y) e^(−y²)`.
pub fn pf_w_via_expansion(n: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    let w = WMatrixBuilder::new(y, 2 * n - 1, ctx)?;
    let t: Vec<Real> = (1..2 * n).map(|k| w.basis().h(k).clone()).collect();
    let s: Vec<Real> = (0..2 * n).map(|j| w.sigma(j).clone()).collect();
    pf_structured_expansion(&t, &s, &s)
}

/// The `M_{i1,i2}` table of [`pf_w_via_expansion`] (zero below the diagonal).
pub fn expansion_terms(n: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Vec<Vec<Real>>> {
    require_positive(n)?;
    let w = WMatrixBuilder::new(y, 2 * n - 1, ctx)?;
    let t: Vec<Real> = (1..2 * n).map(|k| w.basis().h(k).clone()).collect();
    let s: Vec<Real> = (0..2 * n).map(|j| w.sigma(j).clone()).collect();
    Ok(crate::pfaffian::structured_l_table(&t, &s, &s))
}

/// Large-`y` approximation of `F_{1,N}`: the β = 1 matrix is replaced by its
/// leading-order form `h_j δ_{j+1,k} − ½ e^(−y²/2) P_j(∞) p_{k−1}(y)` and the
/// Pfaffian by the same nested sum, now over
/// `T_{i1,i2} = −½ (Π_{m=i1}^{i2−1} h_{2m+1} / Π_{m=i1}^{i2} h_{2m}) P_{2i1}(∞) p_{2i2}(y) e^(−y²/2)`.
///
/// This is an asymptotic approximation, not an identity; the exact value
/// is [`f1`].
pub fn f1_large_y_expansion(n: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(n)?;
    if n % 2 == 1 {
        return Err(Error::OddOrthogonalSize(n));
    }
    if y.is_infinite() {
        return Ok(ctx.one());
    }
    let v = VMatrixBuilder::new(y, n - 1, ctx)?;
    let c = v.basis().context().clone();
    let (f, g, t) = large_y_vectors(&v, n, &c);
    let p = pf_structured_expansion(&t, &f, &g)?;
    let norm = (0..n / 2).fold(c.one(), |acc, j| acc * h_infinity(2 * j, &c));
    Ok((p / norm).with_bits(ctx.bits()))
}

fn large_y_vectors(v: &VMatrixBuilder, n: usize, c: &PrecisionContext) -> (Vec<Real>, Vec<Real>, Vec<Real>) {
    let y = v.basis().cutoff().finite().expect("finite cutoff").clone();
    let g0 = c.exp(&-y.square().mul_pow2(-1));
    let f: Vec<Real> = (0..n).map(|j| -(v.capital_p_inf(j) * &g0).mul_pow2(-1)).collect();
    let g: Vec<Real> = (0..n)
        .map(|k| if k == 0 { c.zero() } else { crate::moments::horner(v.basis().coeffs(k - 1), &y) })
        .collect();
    let t: Vec<Real> = (0..n - 1).map(|k| v.basis().h(k).clone()).collect();
    (f, g, t)
}

/// The `T_{i1,i2}` table of [`f1_large_y_expansion`].
pub fn large_y_terms(n: usize, y: &Cutoff, ctx: &PrecisionContext) -> Result<Vec<Vec<Real>>> {
    if n % 2 == 1 || n == 0 {
        return Err(Error::OddOrthogonalSize(n));
    }
    if y.is_infinite() {
        return Err(invalid("the large-y terms need a finite cutoff"));
    }
    let v = VMatrixBuilder::new(y, n - 1, ctx)?;
    let c = v.basis().context().clone();
    let (f, g, t) = large_y_vectors(&v, n, &c);
    Ok(crate::pfaffian::structured_l_table(&t, &f, &g))
}

/// Edge-scaled cutoff `y = √(2N) + s·c_β·N^(−1/6)` with
/// `c_4 = 2^(−7/6)` and `c_1 = c_2 = 2^(−1/2)`.
pub fn scaled_cutoff(beta: Beta, n: usize, s: &Real, ctx: &PrecisionContext) -> Real {
    let nn = ctx.int(n as i64);
    let root = nn.mul_pow2(1).sqrt();
    let sixth = ctx.pow(&nn, &ctx.ratio(-1, 6));
    let c = match beta {
        Beta::Symplectic => ctx.pow(&ctx.int(2), &ctx.ratio(-7, 6)),
        _ => ctx.int(2).sqrt().recip(),
    };
    root + s * c * sixth
}

/// `F_{β,N}(y)` by nested Gauss-Legendre quadrature of the joint eigenvalue
/// density over ordered eigenvalues `x_1 < … < x_N ≤ y`, in double
/// precision. Only meant as an oracle for small `N`.
pub fn jpdf_quadrature(beta: Beta, n: usize, y: f64, points: usize) -> Result<f64> {
    if n == 0 || n > 4 {
        return Err(invalid("the quadrature oracle covers 1 ≤ N ≤ 4"));
    }
    let (a, power) = match beta {
        Beta::Orthogonal => (0.5, 1),
        Beta::Unitary => (1.0, 2),
        Beta::Symplectic => (2.0, 4),
    };
    let l = gaussian_truncation(a, 2 * n * power, 60) + libm::sqrt(2.0 * n as f64);
    let rule = gauss_legendre(points);
    let z = |upper: f64| -> f64 {
        if upper <= -l {
            return 0.0;
        }
        let mut xs = Vec::with_capacity(n);
        nested(n, -l, upper, a, power, &rule, &mut xs)
    };
    Ok(z(y.min(l)) / z(l))
}

fn nested(level: usize, lo: f64, hi: f64, a: f64, power: usize, rule: &(Vec<f64>, Vec<f64>), xs: &mut Vec<f64>) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut s = 0.0;
    for (t, w) in rule.0.iter().zip(&rule.1) {
        let x = mid + half * t;
        let mut f = libm::exp(-a * x * x);
        for &u in xs.iter() {
            f *= libm::pow(u - x, power as f64);
        }
        if level > 1 {
            xs.push(x);
            f *= nested(level - 1, lo, x, a, power, rule, xs);
            xs.pop();
        }
        s += w * f;
    }
    s * half
}
