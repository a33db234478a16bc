//! Quick invariant suites behind `gbe verify`.

use gbe_core::cdf::{jpdf_quadrature, pf_w_via_expansion, CdfRequest};
use gbe_core::moments::{h_infinity, nm_basis};
use gbe_core::painleve::{solve_hm, tw_cdf, DEFAULT_X_MAX, DEFAULT_X_MIN};
use gbe_core::pfaffian::{det, pf, pf_matchings, SkewMatrix};
use gbe_core::skew::{build_w, iterative_sop, Gauge, SkewBasis};
use gbe_core::{Beta, Cutoff, PrecisionContext, Real};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ecdf::{ks_critical, normal_cdf, EmpiricalCdf};
use crate::ensemble::{block_rng, sample_largest, sample_matrix, spectrum, EnsembleSpec};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail }
    }

    fn from_result(name: &str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Check::new(name, passed, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        }
    }
}

fn rel(a: &Real, b: &Real) -> f64 {
    let scale = b.abs().max(Real::one(b.bits()).mul_pow2(-2000));
    ((a - b).abs() / scale).to_f64()
}

pub fn random_skew<R: Rng>(n: usize, bits: usize, rng: &mut R) -> SkewMatrix {
    SkewMatrix::from_upper(n, bits, |_, _| Real::from_f64(rng.random_range(-1.0..1.0), bits))
}

fn pfaffian_suite(bits: usize) -> Result<(bool, String)> {
    let mut rng = block_rng(2024, 0);
    let mut worst: f64 = 0.0;
    for trial in 0..40 {
        let n = 2 * (1 + trial % 5);
        let m = random_skew(n, bits, &mut rng);
        let p = pf(&m);
        worst = worst.max(rel(&p.square(), &det(&m.to_dense())));
        let b: Vec<Vec<Real>> =
            (0..n).map(|_| (0..n).map(|_| Real::from_f64(rng.random_range(-1.0..1.0), bits)).collect()).collect();
        worst = worst.max(rel(&pf(&m.congruence(&b)), &(det(&b) * &p)));
        if n <= 8 {
            worst = worst.max(rel(&pf_matchings(&m)?, &p));
        }
    }
    let tol = 2f64.powi(-(bits as i32) / 2);
    Ok((worst < tol, format!("40 matrices up to 10x10, worst relative error {worst:.2e}")))
}

fn moments_suite(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let basis = nm_basis(&Cutoff::Finite(ctx.real(15.0)), 6, ctx)?;
    let mut worst: f64 = 0.0;
    for j in 0..=6 {
        worst = worst.max(rel(basis.h(j), &h_infinity(j, ctx)));
    }
    worst = worst.max(basis.max_orthogonality_residual().to_f64());
    Ok((worst < 1e-40, format!("h_j(15) against h_j(inf), j <= 6: {worst:.2e}")))
}

fn oracle_suite(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (beta, n) in [(Beta::Unitary, 2), (Beta::Symplectic, 2), (Beta::Orthogonal, 2)] {
        for y in [-0.5, 0.7] {
            let exact = CdfRequest::new(beta, n, Cutoff::Finite(ctx.real(y))).evaluate(ctx)?.to_f64();
            let quad = jpdf_quadrature(beta, n, y, 96)?;
            worst = worst.max((exact - quad).abs());
        }
    }
    Ok((worst < 1e-8, format!("N = 2 against eigenvalue-density quadrature: {worst:.2e}")))
}

fn expansion_suite(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for y in [-0.8, 0.4, 2.5] {
            let yc = Cutoff::Finite(ctx.real(y));
            let direct = pf(&build_w(&yc, 2 * n - 1, ctx)?);
            worst = worst.max(rel(&pf_w_via_expansion(n, &yc, ctx)?, &direct));
        }
    }
    let tol = 2f64.powi(-(ctx.bits() as i32) / 3);
    Ok((worst < tol, format!("Pfaffian expansion against dense Pfaffian, N <= 4: {worst:.2e}")))
}

fn skew_suite(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for beta in [Beta::Orthogonal, Beta::Symplectic] {
        for y in [0.0, 1.0] {
            let yc = Cutoff::Finite(ctx.real(y));
            let sb = SkewBasis::new(beta, &yc, 3, ctx)?.regauge(Gauge::Monomial);
            let it = iterative_sop(beta, 3, &yc, Gauge::Monomial, ctx)?;
            for j in 0..=3 {
                for (a, b) in sb.polynomial(j).iter().zip(&it.polynomials[j]) {
                    worst = worst.max((a - b).abs().to_f64());
                }
            }
        }
    }
    let tol = 2f64.powi(-(ctx.bits() as i32) / 3);
    Ok((worst < tol, format!("Pfaffian-route polynomials against direct solve, degree <= 3: {worst:.2e}")))
}

fn painleve_suite(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let sol = solve_hm(DEFAULT_X_MIN, DEFAULT_X_MAX, ctx)?;
    let residual = sol.ode_residual().max(sol.integral_residual());
    let mut identity: f64 = 0.0;
    for k in 0..=60 {
        let s = -8.0 + 0.25 * k as f64;
        let f1 = tw_cdf(Beta::Orthogonal, s, &sol)?;
        let f2 = tw_cdf(Beta::Unitary, s, &sol)?;
        let f4 = tw_cdf(Beta::Symplectic, s, &sol)?;
        identity = identity.max((2.0 * f4 - f1 - f2 / f1).abs());
    }
    Ok((
        residual < 1e-10 && identity < 1e-10,
        format!("ODE residual {residual:.2e}, 2F4 = F1 + F2/F1 defect {identity:.2e}"),
    ))
}

fn ensemble_suite() -> Result<(bool, String)> {
    let count = 4000;
    let goe1 = sample_largest(&EnsembleSpec::new(Beta::Orthogonal, 1, 11, count)?)?;
    let ks = EmpiricalCdf::new(&goe1)?.ks_distance(normal_cdf);
    let crit = ks_critical(count, 1.63);
    let mut rng = block_rng(12, 0);
    let mut trace: f64 = 0.0;
    for beta in [Beta::Orthogonal, Beta::Unitary, Beta::Symplectic] {
        let m = sample_matrix(beta, 9, &mut rng);
        let eig = m.eigenvalues()?;
        trace = trace.max((eig.iter().sum::<f64>() - m.trace()).abs() / m.frobenius_norm());
        spectrum(beta, &m)?;
    }
    Ok((
        ks < crit && trace < 1e-10,
        format!("GOE N=1 vs normal KS {ks:.4} (< {crit:.4}), trace defect {trace:.1e}, Kramers pairs intact"),
    ))
}

/// Runs every suite at `bits` of working precision.
pub fn run_all(bits: usize) -> Result<Vec<Check>> {
    let ctx = PrecisionContext::new(bits)?;
    Ok(vec![
        Check::from_result("pfaffian", pfaffian_suite(bits)),
        Check::from_result("moments", moments_suite(&ctx)),
        Check::from_result("cdf-oracle", oracle_suite(&ctx)),
        Check::from_result("expansion", expansion_suite(&ctx)),
        Check::from_result("skew-poly", skew_suite(&ctx)),
        Check::from_result("painleve", painleve_suite(&ctx)),
        Check::from_result("ensemble", ensemble_suite()),
    ])
}
