//! Seeded sampling of Gaussian ensembles and their largest eigenvalue.

use gbe_core::Beta;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{merge_pairs, HermitianMatrix};
use crate::error::{Error, Result};

/// Samples drawn from one RNG stream. Stream `b` always produces samples
/// `b·BLOCK .. (b+1)·BLOCK`, so results do not depend on the thread count.
pub const BLOCK: usize = 64;

/// Relative splitting tolerated inside a Kramers pair.
const PAIR_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(with = "beta_serde")]
    pub beta: Beta,
    pub n: usize,
    pub seed: u64,
    pub count: usize,
}

impl EnsembleSpec {
    pub fn new(beta: Beta, n: usize, seed: u64, count: usize) -> Result<Self> {
        let spec = EnsembleSpec { beta, n, seed, count };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("N must be at least 1".into()));
        }
        if self.count == 0 {
            return Err(Error::InvalidSpec("count must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) mod beta_serde {
    use gbe_core::Beta;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &Beta, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(b.value())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Beta, D::Error> {
        Beta::try_from(u32::deserialize(d)?).map_err(D::Error::custom)
    }
}

/// The RNG for stream `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn normal<R: Rng>(rng: &mut R, sd: f64) -> f64 {
    sd * rng.sample::<f64, _>(StandardNormal)
}

/// `(Y + Yᵀ)/2` with standard normal `Y`.
pub fn sample_goe<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    let y: Vec<f64> = (0..n * n).map(|_| normal(rng, 1.0)).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (y[i * n + j] + y[j * n + i]);
        }
    }
    HermitianMatrix::real(n, m)
}

/// `(Y + Y†)/2` with real and imaginary parts of `Y` drawn from `N(0, 1/2)`
/// (standard deviation `1/√2`).
pub fn sample_gue<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    let sd = std::f64::consts::FRAC_1_SQRT_2;
    let yr: Vec<f64> = (0..n * n).map(|_| normal(rng, sd)).collect();
    let yi: Vec<f64> = (0..n * n).map(|_| normal(rng, sd)).collect();
    hermitian_part(n, &yr, &yi)
}

/// `2N × 2N` matrix `(Y + Y†)/2` where every 2×2 block of `Y` is the
/// quaternion `[[a₁ + i b₁, a₂ + i b₂], [−a₂ + i b₂, a₁ − i b₁]]` with
/// components of standard deviation `1/2`.
pub fn sample_gse<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    let m = 2 * n;
    let mut yr = vec![0.0; m * m];
    let mut yi = vec![0.0; m * m];
    for j in 0..n {
        for k in 0..n {
            let a1 = normal(rng, 0.5);
            let a2 = normal(rng, 0.5);
            let b1 = normal(rng, 0.5);
            let b2 = normal(rng, 0.5);
            let (r, c) = (2 * j, 2 * k);
            yr[r * m + c] = a1;
            yi[r * m + c] = b1;
            yr[r * m + c + 1] = a2;
            yi[r * m + c + 1] = b2;
            yr[(r + 1) * m + c] = -a2;
            yi[(r + 1) * m + c] = b2;
            yr[(r + 1) * m + c + 1] = a1;
            yi[(r + 1) * m + c + 1] = -b1;
        }
    }
    hermitian_part(m, &yr, &yi)
}

fn hermitian_part(n: usize, yr: &[f64], yi: &[f64]) -> HermitianMatrix {
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            re[i * n + j] = 0.5 * (yr[i * n + j] + yr[j * n + i]);
            im[i * n + j] = 0.5 * (yi[i * n + j] - yi[j * n + i]);
        }
    }
    HermitianMatrix::complex(n, re, im)
}

pub fn sample_matrix<R: Rng>(beta: Beta, n: usize, rng: &mut R) -> HermitianMatrix {
    match beta {
        Beta::Orthogonal => sample_goe(n, rng),
        Beta::Unitary => sample_gue(n, rng),
        Beta::Symplectic => sample_gse(n, rng),
    }
}

/// The `N` eigenvalues of a sampled matrix in ascending order; for the
/// symplectic ensemble the Kramers pairs are merged.
pub fn spectrum(beta: Beta, m: &HermitianMatrix) -> Result<Vec<f64>> {
    let eig = m.eigenvalues()?;
    match beta {
        Beta::Symplectic => {
            let scale = eig.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
            merge_pairs(&eig, PAIR_TOL * scale)
        }
        _ => Ok(eig),
    }
}

/// Largest eigenvalue of `count` independent matrices, in sample order.
pub fn sample_largest(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let blocks = spec.count.div_ceil(BLOCK);
    let parts: Vec<Result<Vec<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(spec.seed, b as u64);
            let len = BLOCK.min(spec.count - b * BLOCK);
            (0..len)
                .map(|_| {
                    let m = sample_matrix(spec.beta, spec.n, &mut rng);
                    spectrum(spec.beta, &m).map(|e| e[e.len() - 1])
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(spec.count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Soft-edge variable `s = (λ − √(2N)) N^{1/6} / c`, with `c = 2^{−1/2}`
/// for β = 1, 2 and `c = 2^{−7/6}` for β = 4; the inverse of the cutoff
/// scaling used for the finite-N distributions.
pub fn edge_scaled(beta: Beta, n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    let c = match beta {
        Beta::Symplectic => 2f64.powf(-7.0 / 6.0),
        _ => std::f64::consts::FRAC_1_SQRT_2,
    };
    (lambda - (2.0 * nf).sqrt()) * nf.powf(1.0 / 6.0) / c
}
