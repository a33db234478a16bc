//! Quadrature used as an independent check on the closed-form routes:
//! tanh-sinh in arbitrary precision and Gauss-Legendre in double precision.

use alloc::vec::Vec;

use crate::precision::PrecisionContext;
use crate::real::Real;

/// Tanh-sinh rule on `[-1, 1]` with nodes stored per refinement level.
///
/// Level 0 holds the nodes `t = k` for integer `k ≥ 0`; level `l ≥ 1` holds
/// the new odd multiples of `2^-l`. Each node is stored as
/// `(1 - x, w)` so endpoint clustering keeps full relative precision.
pub struct TanhSinh {
    ctx: PrecisionContext,
    levels: Vec<Vec<(Real, Real)>>,
}

impl TanhSinh {
    pub fn new(ctx: &PrecisionContext, max_level: usize) -> Self {
        let bits = ctx.bits() + 32;
        let c = ctx.with_bits(bits);
        let half_pi = c.pi().mul_pow2(-1);
        // Stop once the complement 1 - x underflows the working precision.
        let cutoff = -(bits as i64) - 16;
        let mut levels = Vec::with_capacity(max_level + 1);
        for level in 0..=max_level {
            let h = Real::one(bits).mul_pow2(-(level as i64));
            let mut nodes = Vec::new();
            let (start, step) = if level == 0 { (0, 1) } else { (1, 2) };
            let mut k = start;
            loop {
                let t = &h * Real::from_i64(k, bits);
                let et = c.exp(&t);
                let sinh_t = (&et - et.recip()).mul_pow2(-1);
                let cosh_t = (&et + et.recip()).mul_pow2(-1);
                let u = &half_pi * sinh_t;
                let e2u = c.exp(&u.mul_pow2(1));
                // 1 - tanh(u) = 2 / (1 + e^(2u)); sech²(u) = 4 e^(2u) / (1 + e^(2u))²
                let denom = &e2u + 1.0;
                let comp = denom.recip().mul_pow2(1);
                let w = &half_pi * cosh_t * e2u.mul_pow2(2) / denom.square();
                let done = comp.exponent() < cutoff;
                nodes.push((comp, w));
                if done {
                    break;
                }
                k += step;
            }
            levels.push(nodes);
        }
        TanhSinh { ctx: c, levels }
    }

    /// `∫_a^b f`, refining until two successive levels differ by less than
    /// `tol` (absolute). Returns the estimate and the last difference.
    pub fn integrate<F>(&self, f: F, a: &Real, b: &Real, tol: &Real) -> (Real, Real)
    where
        F: Fn(&Real) -> Real,
    {
        let bits = self.ctx.bits();
        let half = (b - a).mul_pow2(-1).with_bits(bits);
        let mid = (a + b).mul_pow2(-1).with_bits(bits);
        let a = a.with_bits(bits);
        let b = b.with_bits(bits);
        let mut sum = Real::zero(bits);
        let mut prev: Option<Real> = None;
        let mut diff = Real::zero(bits);
        for (level, nodes) in self.levels.iter().enumerate() {
            for (i, (comp, w)) in nodes.iter().enumerate() {
                if level == 0 && i == 0 {
                    sum += w * f(&mid);
                    continue;
                }
                let off = &half * comp;
                let left = &a + &off;
                let right = &b - &off;
                sum += w * (f(&left) + f(&right));
            }
            let est = (&sum * &half).mul_pow2(-(level as i64));
            if let Some(p) = prev {
                diff = (&est - &p).abs();
                if level >= 3 && diff <= *tol {
                    return (est, diff);
                }
            }
            prev = Some(est);
        }
        (prev.unwrap_or_else(|| Real::zero(bits)), diff)
    }

    /// Full rule on `[a, b]` at refinement `level` as `(x, weight)` pairs in
    /// ascending order of `x`.
    pub fn rule(&self, a: &Real, b: &Real, level: usize) -> Vec<(Real, Real)> {
        let bits = self.ctx.bits();
        let half = (b - a).mul_pow2(-1).with_bits(bits);
        let scale = half.mul_pow2(-(level as i64));
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut centre = None;
        for (l, nodes) in self.levels.iter().take(level + 1).enumerate() {
            for (i, (comp, w)) in nodes.iter().enumerate() {
                let w = w * &scale;
                if l == 0 && i == 0 {
                    centre = Some(((a + b).mul_pow2(-1), w));
                    continue;
                }
                let off = &half * comp;
                left.push((a + &off, w.clone()));
                right.push((b - &off, w));
            }
        }
        left.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite nodes"));
        right.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite nodes"));
        left.extend(centre);
        left.extend(right);
        left
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` in arbitrary precision,
/// polished by Newton steps from the double-precision roots.
pub fn gauss_legendre_real(n: usize, ctx: &PrecisionContext) -> (Vec<Real>, Vec<Real>) {
    let (x0, _) = gauss_legendre(n);
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    let one = ctx.one();
    for z0 in x0 {
        let mut z = ctx.real(z0);
        let mut dp = ctx.one();
        for _ in 0..(ctx.bits() / 40 + 4) {
            let (mut p0, mut p1) = (ctx.one(), z.clone());
            for k in 2..=n {
                let p2 = (ctx.int(2 * k as i64 - 1) * &z * &p1 - ctx.int(k as i64 - 1) * &p0) / ctx.int(k as i64);
                p0 = p1;
                p1 = p2;
            }
            dp = ctx.int(n as i64) * (&z * &p1 - &p0) / (z.square() - &one);
            z -= &p1 / &dp;
        }
        ws.push(ctx.int(2) / ((&one - z.square()) * dp.square()));
        xs.push(z);
    }
    (xs, ws)
}

/// Lower truncation point `-L` such that `x^degree · e^(-a x²)` stays below
/// `2^-bits` for `x ≤ -L`.
pub fn gaussian_truncation(a: f64, degree: usize, bits: usize) -> f64 {
    let target = bits as f64 * core::f64::consts::LN_2 + 8.0;
    let mut l = libm::sqrt(target / a) + 1.0;
    for _ in 0..50 {
        let next = libm::sqrt((target + degree as f64 * libm::log(l.max(1.0))) / a);
        if (next - l).abs() < 1e-6 {
            break;
        }
        l = next;
    }
    l + 0.5
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x.push(z);
        w.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

/// `∫_a^b f` with an `n`-point Gauss-Legendre rule.
pub fn gl_integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_gaussian_and_polynomial() {
        let ctx = PrecisionContext::new(256).unwrap();
        let ts = TanhSinh::new(&ctx, 9);
        let tol = Real::from_f64(1e-60, 64);
        let l = ctx.real(gaussian_truncation(1.0, 0, 256));
        let (v, _) = ts.integrate(|x| ctx.exp(&-x.square()), &-&l, &l, &tol);
        assert!((v - ctx.sqrt_pi()).abs() < 1e-60);
        let (v, _) = ts.integrate(|x| x.square() * x, &ctx.zero(), &ctx.int(2), &tol);
        assert!((v - 4.0).abs() < 1e-60);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let ctx = PrecisionContext::new(128).unwrap();
        let ts = TanhSinh::new(&ctx, 8);
        // ∫_0^1 1/√x = 2
        let (v, _) = ts.integrate(|x| x.sqrt().recip(), &ctx.zero(), &ctx.one(), &Real::from_f64(1e-30, 64));
        assert!((v - 2.0).abs() < 1e-25);
    }

    #[test]
    fn tanh_sinh_rule_matches_adaptive_sum() {
        let ctx = PrecisionContext::new(128).unwrap();
        let ts = TanhSinh::new(&ctx, 6);
        let (a, b) = (ctx.int(-1), ctx.int(2));
        let rule = ts.rule(&a, &b, 6);
        assert!(rule.windows(2).all(|p| p[0].0 <= p[1].0));
        let v = rule.iter().fold(ctx.zero(), |acc, (x, w)| acc + w * ctx.exp(x));
        let exact = ctx.exp(&b) - ctx.exp(&a);
        assert!((v - exact).abs() < 1e-30);
    }

    #[test]
    fn gauss_legendre_real_integrates_polynomials() {
        let ctx = PrecisionContext::new(192).unwrap();
        let (x, w) = gauss_legendre_real(10, &ctx);
        // ∫_{-1}^{1} x^18 = 2/19
        let v = x.iter().zip(&w).fold(ctx.zero(), |acc, (x, w)| acc + w * x.powi(18));
        assert!((v - ctx.ratio(2, 19)).abs() < 1e-50);
    }

    #[test]
    fn gauss_legendre_exact_for_low_degree() {
        let rule = gauss_legendre(8);
        let v = gl_integrate(|x| x.powi(14) + x.powi(3), -1.0, 1.0, &rule);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
        let s: f64 = rule.1.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let one = gauss_legendre(1);
        assert!((gl_integrate(|x| 3.0 * x + 1.0, 0.0, 2.0, &one) - 8.0).abs() < 1e-14);
    }
}
