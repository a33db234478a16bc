//! Hastings-McLeod solution of `q'' = x q + 2 q³` with `q ~ Ai` at `+∞`,
//! and the Tracy-Widom distributions built from it.
//!
//! The solution is integrated backward with a Taylor-series one-step method
//! in arbitrary precision, together with
//! `I(x) = ∫_x^∞ q`, `K(x) = ∫_x^∞ q²` and `J(x) = ∫_x^∞ (t − x) q(t)² dt`.

use alloc::vec::Vec;

use crate::beta::Beta;
use crate::error::{invalid, Error, Result};
use crate::precision::PrecisionContext;
use crate::real::Real;

/// Step control for [`solve_hm_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HmOptions {
    /// Taylor step; a power of two so grid points are exact binary fractions.
    pub step: f64,
    /// Stored grid points per step.
    pub samples_per_step: usize,
}

impl Default for HmOptions {
    fn default() -> Self {
        HmOptions { step: 1.0 / 16.0, samples_per_step: 8 }
    }
}

pub const DEFAULT_X_MIN: f64 = -10.0;
pub const DEFAULT_X_MAX: f64 = 8.0;

/// Largest |q| tolerated before the trajectory is declared to have left the
/// Hastings-McLeod solution.
const BLOW_UP: f64 = 1.0e3;

/// Tabulated solution on a uniform grid, ordered from `x_max` down to `x_min`.
#[derive(Clone, Debug)]
pub struct HMSolution {
    pub x: Vec<f64>,
    pub q: Vec<Real>,
    pub dq: Vec<Real>,
    pub i: Vec<Real>,
    pub k: Vec<Real>,
    pub j: Vec<Real>,
    /// Where the integration started (at or beyond `x_max`).
    pub start: f64,
    pub spacing: f64,
    bits: usize,
}

/// Solution on `[x_min, x_max]` with the default step.
pub fn solve_hm(x_min: f64, x_max: f64, ctx: &PrecisionContext) -> Result<HMSolution> {
    solve_hm_with(x_min, x_max, HmOptions::default(), ctx)
}

/// Starting point where `Ai(x)²` falls below `2^-bits`, so that `q = Ai`
/// holds to working precision.
fn airy_start(bits: usize) -> f64 {
    let zeta = 0.5 * bits as f64 * core::f64::consts::LN_2 + 8.0;
    libm::pow(1.5 * zeta, 2.0 / 3.0)
}

pub fn solve_hm_with(x_min: f64, x_max: f64, opts: HmOptions, ctx: &PrecisionContext) -> Result<HMSolution> {
    if !(x_min < 0.0 && 0.0 < x_max) {
        return Err(invalid("need x_min < 0 < x_max"));
    }
    if !(opts.step > 0.0) || libm::frexp(opts.step).0 != 0.5 || opts.samples_per_step == 0 {
        return Err(invalid("step must be a positive power of two and samples_per_step ≥ 1"));
    }
    let bits = ctx.bits().max(128);
    let wp = bits + 64;
    let c = ctx.with_bits(wp);
    let h = opts.step;
    let steps_beyond = libm::ceil((airy_start(bits) - x_max).max(0.0) / h) as usize;
    let x0 = x_max + steps_beyond as f64 * h;
    let total_steps = steps_beyond + libm::ceil((x_max - x_min) / h) as usize;

    let xr = c.real(x0);
    let (ai, dai, ai_tail) = c.airy_with_tail(&xr);
    let mut q = ai.clone();
    let mut p = dai.clone();
    let mut big_i = ai_tail;
    // ∫_x^∞ Ai² = Ai'² − x Ai², ∫_x^∞ (t − x) Ai² = (2x² Ai² − 2x Ai'² − Ai Ai')/3
    let mut big_k = dai.square() - &xr * ai.square();
    let mut big_j = (xr.square() * ai.square() * 2.0 - &xr * dai.square() * 2.0 - &ai * &dai) / c.int(3);

    let spacing = h / opts.samples_per_step as f64;
    let mut sol = HMSolution {
        x: Vec::new(),
        q: Vec::new(),
        dq: Vec::new(),
        i: Vec::new(),
        k: Vec::new(),
        j: Vec::new(),
        start: x0,
        spacing,
        bits,
    };
    let tol = Real::one(wp).mul_pow2(-(wp as i64) - 8);
    let push = |sol: &mut HMSolution, x: f64, v: [Real; 5]| {
        let [q, p, i, k, j] = v;
        sol.x.push(x);
        sol.q.push(q.with_bits(bits));
        sol.dq.push(p.with_bits(bits));
        sol.i.push(i.with_bits(bits));
        sol.k.push(k.with_bits(bits));
        sol.j.push(j.with_bits(bits));
    };
    let hr = c.real(-h);
    for n in 0..total_steps {
        let xn = x0 - n as f64 * h;
        let series = TaylorStep::new(&c, &c.real(xn), &q, &p, &hr, &tol);
        let storing = n + 1 > steps_beyond;
        let first_sample = match (storing, n == steps_beyond) {
            (false, _) => opts.samples_per_step,
            (true, true) => 0,
            (true, false) => 1,
        };
        for m in first_sample..=opts.samples_per_step {
            let t = &hr * c.ratio(m as i64, opts.samples_per_step as i64);
            let v = series.eval(&t, &big_i, &big_k, &big_j);
            if m == opts.samples_per_step {
                q = v[0].clone();
                p = v[1].clone();
                big_i = v[2].clone();
                big_k = v[3].clone();
                big_j = v[4].clone();
            }
            if storing {
                let x = xn - h * m as f64 / opts.samples_per_step as f64;
                if x < x_min - 0.5 * spacing {
                    break;
                }
                push(&mut sol, x, v);
            }
        }
        if !q.is_finite() || q.abs() > BLOW_UP {
            return Err(Error::IntegrationFailure { x: xn - h, what: "solution left the Hastings-McLeod branch".into() });
        }
    }
    Ok(sol)
}

/// Taylor expansion of `(q, q', I, K, J)` about one grid point.
struct TaylorStep {
    c: Vec<Real>,
    sq: Vec<Real>,
}

impl TaylorStep {
    fn new(ctx: &PrecisionContext, x: &Real, q: &Real, p: &Real, h: &Real, tol: &Real) -> Self {
        let mut c = Vec::with_capacity(128);
        c.push(q.clone());
        c.push(p.clone());
        let mut sq: Vec<Real> = Vec::with_capacity(128);
        let mut cube: Vec<Real> = Vec::with_capacity(128);
        let scale = q.abs() + p.abs() + 1.0;
        let ha = h.abs();
        let mut i = 0;
        loop {
            let s: Real = (0..=i).fold(ctx.zero(), |acc, a| acc + &c[a] * &c[i - a]);
            sq.push(s);
            let cu: Real = (0..=i).fold(ctx.zero(), |acc, a| acc + &sq[a] * &c[i - a]);
            cube.push(cu);
            let mut num = x * &c[i] + cube[i].mul_pow2(1);
            if i >= 1 {
                num += &c[i - 1];
            }
            c.push(num / ctx.int(((i + 2) * (i + 1)) as i64));
            let last = c.len() - 1;
            let tail = (&c[last] * ha.powi(last as i32)).abs() + (&c[last - 1] * ha.powi(last as i32 - 1)).abs();
            if i >= 8 && tail < tol * &scale {
                break;
            }
            i += 1;
            assert!(i < 2000, "Taylor series failed to converge");
        }
        // Complete the square coefficients up to the series length.
        for i in sq.len()..c.len() {
            let s: Real = (0..=i).fold(ctx.zero(), |acc, a| acc + &c[a] * &c[i - a]);
            sq.push(s);
        }
        TaylorStep { c, sq }
    }

    fn eval(&self, t: &Real, i0: &Real, k0: &Real, j0: &Real) -> [Real; 5] {
        let n = self.c.len();
        let mut q = self.c[n - 1].clone();
        for a in (0..n - 1).rev() {
            q = q * t + &self.c[a];
        }
        let mut p = &self.c[n - 1] * Real::from_u64(n as u64 - 1, t.bits());
        for a in (1..n - 1).rev() {
            p = p * t + &self.c[a] * Real::from_u64(a as u64, t.bits());
        }
        // ∫_0^t Σ c_a s^a = Σ c_a t^(a+1)/(a+1)
        let integral = |coef: &[Real], extra: usize| -> Real {
            let m = coef.len();
            let mut acc = Real::zero(t.bits());
            for a in (0..m).rev() {
                let mut d = Real::from_u64((a + 1) as u64, t.bits());
                if extra == 2 {
                    d *= Real::from_u64((a + 2) as u64, t.bits());
                }
                acc = acc * t + &coef[a] / d;
            }
            acc * t.powi(extra as i32)
        };
        let i = i0 - integral(&self.c, 1);
        let k = k0 - integral(&self.sq, 1);
        // J' = −K ⇒ J(t) = J0 − K0 t + Σ sq_a t^(a+2)/((a+1)(a+2))
        let j = j0 - k0 * t + integral(&self.sq, 2);
        [q, p, i, k, j]
    }
}

impl HMSolution {
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn x_min(&self) -> f64 {
        *self.x.last().expect("non-empty grid")
    }

    pub fn x_max(&self) -> f64 {
        self.x[0]
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Index of the grid point nearest to `s`.
    fn index_near(&self, s: f64) -> usize {
        let pos = (self.x_max() - s) / self.spacing;
        (libm::round(pos).max(0.0) as usize).min(self.len() - 1)
    }

    /// 6-point Lagrange interpolation of a tabulated column at `s`.
    pub fn interpolate(&self, column: &[Real], s: f64) -> Result<f64> {
        let (lo, hi) = (self.x_min(), self.x_max());
        if !(s >= lo && s <= hi) {
            return Err(Error::OutsideGrid { s, lo, hi });
        }
        let n = self.len();
        let centre = self.index_near(s);
        let first = centre.saturating_sub(2).min(n.saturating_sub(6));
        let idx = first..(first + 6).min(n);
        let mut acc = 0.0;
        for a in idx.clone() {
            let mut w = 1.0;
            for b in idx.clone() {
                if a != b {
                    w *= (s - self.x[b]) / (self.x[a] - self.x[b]);
                }
            }
            acc += w * column[a].to_f64();
        }
        Ok(acc)
    }

    /// Largest `|q'' − x q − 2 q³|` over interior grid points, with `q''`
    /// from an eighth-order central difference of the stored `q'`.
    pub fn ode_residual(&self) -> f64 {
        let h = Real::from_f64(self.spacing, self.bits);
        let w = [
            Real::ratio(-1, 280, self.bits),
            Real::ratio(4, 105, self.bits),
            Real::ratio(-1, 5, self.bits),
            Real::ratio(4, 5, self.bits),
        ];
        let mut worst: f64 = 0.0;
        for n in 4..self.len().saturating_sub(4) {
            // grid runs downward: index n + m sits at x − m·h
            let mut d = Real::zero(self.bits);
            for (m, wm) in w.iter().enumerate() {
                let off = 4 - m;
                d += wm * (&self.dq[n - off] - &self.dq[n + off]);
            }
            let second = d / &h;
            let x = Real::from_f64(self.x[n], self.bits);
            let r = second - &x * &self.q[n] - (self.q[n].square() * &self.q[n]).mul_pow2(1);
            worst = worst.max(r.abs().to_f64());
        }
        worst
    }

    /// Largest deviation of `I' = −q`, `K' = −q²`, `J' = −K` over interior
    /// grid points, by the same difference stencil.
    pub fn integral_residual(&self) -> f64 {
        let h = Real::from_f64(self.spacing, self.bits);
        let w = [
            Real::ratio(-1, 280, self.bits),
            Real::ratio(4, 105, self.bits),
            Real::ratio(-1, 5, self.bits),
            Real::ratio(4, 5, self.bits),
        ];
        let deriv = |col: &[Real], n: usize| -> Real {
            let mut d = Real::zero(self.bits);
            for (m, wm) in w.iter().enumerate() {
                let off = 4 - m;
                d += wm * (&col[n - off] - &col[n + off]);
            }
            d / &h
        };
        let mut worst: f64 = 0.0;
        for n in 4..self.len().saturating_sub(4) {
            let ri = deriv(&self.i, n) + &self.q[n];
            let rk = deriv(&self.k, n) + self.q[n].square();
            let rj = deriv(&self.j, n) + &self.k[n];
            worst = worst.max(ri.abs().to_f64()).max(rk.abs().to_f64()).max(rj.abs().to_f64());
        }
        worst
    }
}

/// Tracy-Widom distribution `F_β(s)`:
/// `F_2 = e^(−J)`, `F_4 = e^(−J/2) cosh(I/2)`, `F_1 = e^(−J/2) e^(−I/2)`.
pub fn tw_cdf(beta: Beta, s: f64, sol: &HMSolution) -> Result<f64> {
    let (lo, hi) = (sol.x_min() + 1.0, sol.x_max() - 1.0);
    if !(s >= lo && s <= hi) {
        return Err(Error::OutsideGrid { s, lo, hi });
    }
    let j = sol.interpolate(&sol.j, s)?;
    let i = sol.interpolate(&sol.i, s)?;
    Ok(tw_from_integrals(beta, i, j))
}

/// The three distributions from the integrals `I(s)` and `J(s)`.
pub fn tw_from_integrals(beta: Beta, i: f64, j: f64) -> f64 {
    match beta {
        Beta::Unitary => libm::exp(-j),
        Beta::Symplectic => libm::exp(-0.5 * j) * libm::cosh(0.5 * i),
        Beta::Orthogonal => libm::exp(-0.5 * (j + i)),
    }
}
