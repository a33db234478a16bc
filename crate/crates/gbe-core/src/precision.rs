//! Working-precision context and the special functions built on it.

use astro_float::{Consts, RoundingMode};

use crate::error::{invalid, Result};
use crate::real::Real;

/// Extra bits carried by cached constants beyond the working precision.
const CONST_GUARD: usize = 128;

/// Binary working precision, target tolerance, and cached constants.
///
/// The context is an immutable value: every routine takes it by reference and
/// nothing inside it changes after construction.
#[derive(Clone, Debug)]
pub struct PrecisionContext {
    bits: usize,
    eps: Real,
    pi: Real,
    ln2: Real,
}

impl PrecisionContext {
    pub const DEFAULT_BITS: usize = 256;

    /// Context with `eps = 2^(-bits/2)`.
    pub fn new(bits: usize) -> Result<Self> {
        let eps = Real::one(64).mul_pow2(-(bits as i64 / 2));
        Self::with_eps(bits, eps)
    }

    pub fn with_eps(bits: usize, eps: Real) -> Result<Self> {
        if bits < 64 {
            return Err(invalid(alloc::format!("precision must be at least 64 bits, got {bits}")));
        }
        let floor = Real::one(64).mul_pow2(-(bits as i64));
        if !eps.is_positive() || eps < floor {
            return Err(invalid("eps must lie in [2^-bits, inf)"));
        }
        let cb = bits + CONST_GUARD;
        let (pi, ln2) = astro_constants(cb);
        Ok(PrecisionContext { bits, eps, pi, ln2 })
    }

    /// Same tolerance policy at a different precision.
    pub fn with_bits(&self, bits: usize) -> Self {
        if bits == self.bits {
            return self.clone();
        }
        Self::new(bits).expect("bits >= 64")
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn eps(&self) -> &Real {
        &self.eps
    }

    pub fn zero(&self) -> Real {
        Real::zero(self.bits)
    }

    pub fn one(&self) -> Real {
        Real::one(self.bits)
    }

    pub fn real(&self, x: f64) -> Real {
        Real::from_f64(x, self.bits)
    }

    pub fn int(&self, n: i64) -> Real {
        Real::from_i64(n, self.bits)
    }

    pub fn ratio(&self, num: i64, den: i64) -> Real {
        Real::ratio(num, den, self.bits)
    }

    pub fn pi(&self) -> Real {
        self.pi.with_bits(self.bits)
    }

    pub fn sqrt_pi(&self) -> Real {
        self.pi.sqrt().with_bits(self.bits)
    }

    pub fn ln2(&self) -> Real {
        self.ln2.with_bits(self.bits)
    }

    fn pi_at(&self, bits: usize) -> Real {
        if bits <= self.pi.bits() {
            self.pi.with_bits(bits)
        } else {
            astro_constants(bits).0
        }
    }

    fn ln2_at(&self, bits: usize) -> Real {
        if bits <= self.ln2.bits() {
            self.ln2.with_bits(bits)
        } else {
            astro_constants(bits).1
        }
    }

    fn work_bits(&self, x: &Real) -> usize {
        x.bits().max(self.bits)
    }

    /// `e^x`.
    pub fn exp(&self, x: &Real) -> Real {
        let p = self.work_bits(x);
        if x.is_zero() {
            return Real::one(p);
        }
        let xf = x.to_f64();
        if xf < -1.0e9 {
            return Real::zero(p);
        }
        let k = libm::rint(xf / core::f64::consts::LN_2) as i64;
        let kbits = 64 - k.unsigned_abs().leading_zeros() as usize;
        let halvings = (libm::sqrt(p as f64) / 2.0) as i64 + 1;
        let wp = p + kbits + halvings as usize + 32;
        let ln2 = self.ln2_at(wp);
        let r = x.with_bits(wp) - &ln2 * Real::from_i64(k, wp);
        let r = r.mul_pow2(-halvings);
        let mut sum = Real::one(wp);
        let mut term = Real::one(wp);
        let tiny = -(wp as i64) - 4;
        for n in 1..10_000 {
            term = &(&term * &r) / Real::from_i64(n, wp);
            sum += &term;
            if term.is_zero() || term.exponent() < tiny {
                break;
            }
        }
        for _ in 0..halvings {
            sum = sum.square();
        }
        sum.mul_pow2(k).with_bits(p)
    }

    /// Natural logarithm of a positive number.
    pub fn ln(&self, x: &Real) -> Real {
        assert!(x.is_positive(), "ln of a non-positive number");
        let p = self.work_bits(x);
        let e = x.exponent();
        let wp = p + 32;
        let f = x.with_bits(wp).mul_pow2(-e);
        let mut y = Real::from_f64(libm::log(f.to_f64()), wp);
        for _ in 0..64 {
            let ey = self.exp(&y);
            let step = (&f - &ey).mul_pow2(1) / (&f + &ey);
            y += &step;
            if step.is_zero() || step.exponent() < -(wp as i64) + 2 {
                break;
            }
        }
        let ln2 = self.ln2_at(wp);
        (y + &ln2 * Real::from_i64(e, wp)).with_bits(p)
    }

    /// `x^a` for positive `x`.
    pub fn pow(&self, x: &Real, a: &Real) -> Real {
        self.exp(&(a * self.ln(x)))
    }

    /// Error function.
    pub fn erf(&self, x: &Real) -> Real {
        if x.is_negative() {
            return -self.erf(&-x);
        }
        if *x <= ERF_SWITCH {
            self.erf_series(x)
        } else {
            self.one() - self.erfc_cf(x)
        }
    }

    /// Complementary error function.
    pub fn erfc(&self, x: &Real) -> Real {
        let p = self.work_bits(x);
        if x.is_negative() {
            let a = x.abs();
            return if a <= ERF_SWITCH {
                Real::one(p) + self.erf_series(&a)
            } else {
                Real::from_i64(2, p) - self.erfc_cf(&a)
            };
        }
        if *x <= ERF_SWITCH {
            // 1 - erf(x) cancels about x²·log2(e) bits.
            let guard = (1.5 * x.to_f64() * x.to_f64()) as usize + 16;
            let wide = x.with_bits(p + guard);
            (Real::one(p + guard) - self.erf_series(&wide)).with_bits(p)
        } else {
            self.erfc_cf(x)
        }
    }

    /// `erf(x)` from the everywhere-positive series
    /// `2/√π · e^(-x²) · Σ 2^n x^(2n+1) / (2n+1)!!`.
    pub fn erf_series(&self, x: &Real) -> Real {
        let p = self.work_bits(x);
        if x.is_zero() {
            return Real::zero(p);
        }
        let wp = p + 16;
        let x = x.with_bits(wp);
        let two_x2 = x.square().mul_pow2(1);
        let mut term = x.clone();
        let mut sum = x.clone();
        for n in 1..1_000_000i64 {
            term = &(&term * &two_x2) / Real::from_i64(2 * n + 1, wp);
            sum += &term;
            if term.exponent() < sum.exponent() - wp as i64 - 2 {
                break;
            }
        }
        let pref = self.exp(&-x.square()) / self.pi_at(wp).sqrt();
        (sum * pref).mul_pow2(1).with_bits(p)
    }

    /// `erfc(x)` for `x > 0` from the Laplace continued fraction
    /// `e^(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`.
    pub fn erfc_cf(&self, x: &Real) -> Real {
        assert!(x.is_positive(), "continued fraction needs x > 0");
        let p = self.work_bits(x);
        let wp = p + 16;
        let x = x.with_bits(wp);
        let tiny = Real::one(wp).mul_pow2(-(4 * wp as i64));
        // Modified Lentz.
        let mut f = x.clone();
        let mut c = x.clone();
        let mut d = Real::zero(wp);
        let tol = -(wp as i64) + 2;
        for n in 1..5_000_000i64 {
            let a = Real::from_i64(n, wp).mul_pow2(-1);
            d = &x + &a * &d;
            if d.is_zero() {
                d = tiny.clone();
            }
            d = d.recip();
            c = &x + &a / &c;
            if c.is_zero() {
                c = tiny.clone();
            }
            let delta = &c * &d;
            f *= &delta;
            let dev = delta - 1.0;
            if dev.is_zero() || dev.exponent() < tol {
                break;
            }
        }
        let num = self.exp(&-x.square());
        (num / (f * self.pi_at(wp).sqrt())).with_bits(p)
    }

    /// `Γ(n/2)` for a positive integer `n`.
    pub fn gamma_half(&self, n: u32) -> Real {
        assert!(n > 0, "gamma_half(0) is a pole");
        if n % 2 == 0 {
            self.factorial(n / 2 - 1)
        } else {
            // Γ(k + 1/2) = √π (2k)! / (4^k k!)
            let mut v = self.sqrt_pi();
            let k = (n - 1) / 2;
            for i in 0..k {
                v *= Real::ratio(2 * i as i64 + 1, 2, self.bits);
            }
            v
        }
    }

    pub fn factorial(&self, n: u32) -> Real {
        let mut v = self.one();
        for i in 2..=n {
            v *= Real::from_u64(i as u64, self.bits);
        }
        v
    }

    /// `Γ(1/3) = 3 ∫_0^∞ e^(-u³) du`, summed as a power series on `[0, L]`
    /// with `e^(-L³)` below the working precision.
    pub fn gamma_one_third(&self) -> Real {
        let p = self.bits;
        let l3 = (p as f64 + 16.0) * core::f64::consts::LN_2;
        // Alternating series: the largest term is about e^(L³).
        let wp = 2 * p + 64;
        let l3r = Real::from_f64(libm::ceil(l3), wp);
        let l = self.exp(&(self.ln(&l3r) / Real::from_i64(3, wp)));
        let mut pow = l.clone();
        let mut sum = l.clone();
        let mut fact = Real::one(wp);
        for n in 1..100_000i64 {
            pow = -(&pow * &l3r);
            fact *= Real::from_i64(n, wp);
            let term = &pow / (&fact * Real::from_i64(3 * n + 1, wp));
            sum += &term;
            if term.exponent() < sum.exponent() - wp as i64 - 2 {
                break;
            }
        }
        (sum * 3.0).with_bits(p)
    }

    /// `(Ai(x), Ai'(x))`.
    ///
    /// Maclaurin series at every `x`, with enough guard bits to absorb the
    /// cancellation between the two entire components (about `2·(2/3)|x|^(3/2)`
    /// binary digits).
    pub fn airy(&self, x: &Real) -> (Real, Real) {
        let (ai, dai, _) = self.airy_series(x);
        (ai, dai)
    }

    /// `(Ai(x), Ai'(x), ∫_x^∞ Ai)`, the integral from the termwise
    /// integrated series and `∫_0^∞ Ai = 1/3`.
    pub fn airy_with_tail(&self, x: &Real) -> (Real, Real, Real) {
        self.airy_series(x)
    }

    fn airy_series(&self, x: &Real) -> (Real, Real, Real) {
        let p = self.work_bits(x);
        let xf = x.to_f64().abs();
        let zeta = 2.0 / 3.0 * xf * libm::sqrt(xf);
        let wp = p + (2.9 * zeta) as usize + 48;
        let ctx = self.with_bits(wp);
        let x = x.with_bits(wp);
        let g13 = ctx.gamma_one_third();
        let three = Real::from_i64(3, wp);
        let cbrt3 = ctx.exp(&(ctx.ln(&three) / &three));
        // Γ(2/3) = 2π / (√3 Γ(1/3))
        let g23 = ctx.pi().mul_pow2(1) / (three.sqrt() * &g13);
        let ai0 = (cbrt3.square() * &g23).recip();
        let dai0 = -(cbrt3 * &g13).recip();

        let x3 = x.square() * &x;
        let tol = -(wp as i64) - 8;
        // f, g: the even-type and odd-type solutions with f(0)=1, g'(0)=1.
        let mut f = Real::one(wp);
        let mut g = x.clone();
        let mut df = Real::zero(wp);
        let mut dg = Real::one(wp);
        let mut tf = Real::one(wp);
        let mut tg = x.clone();
        let mut tdf = x.square().mul_pow2(-1);
        let mut tdg = Real::one(wp);
        df += &tdf;
        // ∫_0^x f and ∫_0^x g
        let mut int_f = x.clone();
        let mut int_g = x.square().mul_pow2(-1);
        for k in 1..100_000i64 {
            tf = &(&tf * &x3) / Real::from_i64((3 * k - 1) * (3 * k), wp);
            tg = &(&tg * &x3) / Real::from_i64((3 * k) * (3 * k + 1), wp);
            tdg = &(&tdg * &x3) / Real::from_i64((3 * k) * (3 * k - 2), wp);
            f += &tf;
            g += &tg;
            dg += &tdg;
            int_f += &tf * &x / Real::from_i64(3 * k + 1, wp);
            int_g += &tg * &x / Real::from_i64(3 * k + 2, wp);
            if k >= 2 {
                tdf = &(&tdf * &x3) / Real::from_i64((3 * k - 1) * 3 * (k - 1), wp);
                df += &tdf;
            }
            let big = f.exponent().max(g.exponent()).max(0);
            let small = tf.exponent().max(tg.exponent()).max(tdf.exponent()).max(tdg.exponent()) + x.exponent().max(0);
            if k > 2 && small < big + tol {
                break;
            }
        }
        let ai = &ai0 * &f + &dai0 * &g;
        let dai = &ai0 * &df + &dai0 * &dg;
        let tail = Real::ratio(1, 3, wp) - (&ai0 * &int_f + &dai0 * &int_g);
        (ai.with_bits(p), dai.with_bits(p), tail.with_bits(p))
    }

    pub fn airy_ai(&self, x: &Real) -> Real {
        self.airy(x).0
    }
}

/// Switch point between the erf series and the erfc continued fraction.
const ERF_SWITCH: f64 = 4.0;

fn astro_constants(bits: usize) -> (Real, Real) {
    let mut cc = Consts::new().expect("constant cache allocation");
    let pi = cc.pi(bits, RoundingMode::ToEven);
    let ln2 = cc.ln_2(bits, RoundingMode::ToEven);
    (Real::from_inner(pi), Real::from_inner(ln2))
}

/// Leading term of the large-`x` Airy asymptotic, `e^(-ζ)/(2√π x^(1/4))`.
pub fn airy_ai_leading_asymptotic(x: f64) -> f64 {
    let zeta = 2.0 / 3.0 * x * libm::sqrt(x);
    libm::exp(-zeta) / (2.0 * libm::sqrt(core::f64::consts::PI) * libm::pow(x, 0.25))
}

/// Upper integration cutoff: a real number or `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub enum Cutoff {
    Finite(Real),
    PosInf,
}

impl Cutoff {
    pub fn finite(&self) -> Option<&Real> {
        match self {
            Cutoff::Finite(y) => Some(y),
            Cutoff::PosInf => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Cutoff::PosInf)
    }

    /// The cutoff multiplied by a positive scalar.
    pub fn scaled(&self, c: &Real) -> Cutoff {
        match self {
            Cutoff::Finite(y) => Cutoff::Finite(y * c),
            Cutoff::PosInf => Cutoff::PosInf,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Cutoff::Finite(y) => y.to_f64(),
            Cutoff::PosInf => f64::INFINITY,
        }
    }
}

impl From<Real> for Cutoff {
    fn from(y: Real) -> Self {
        Cutoff::Finite(y)
    }
}
