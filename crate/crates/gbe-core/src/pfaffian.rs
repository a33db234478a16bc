//! Antisymmetric matrices and their Pfaffians.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::real::Real;

/// Dense antisymmetric matrix. Only `j < k` entries are ever written; the
/// lower triangle is read back as the negated upper triangle.
#[derive(Clone, Debug)]
pub struct SkewMatrix {
    n: usize,
    bits: usize,
    a: Vec<Real>,
}

impl SkewMatrix {
    pub fn zeros(n: usize, bits: usize) -> Self {
        SkewMatrix { n, bits, a: vec![Real::zero(bits); n * n] }
    }

    /// Builds the matrix from its strict upper triangle.
    pub fn from_upper<F: FnMut(usize, usize) -> Real>(n: usize, bits: usize, mut upper: F) -> Self {
        let mut m = Self::zeros(n, bits);
        for j in 0..n {
            for k in j + 1..n {
                let v = upper(j, k);
                m.set(j, k, v);
            }
        }
        m
    }

    /// Matrix whose row/column `r` carries label `labels[r]`; entry `(r, s)`
    /// is `entry(labels[r], labels[s])`, which must be antisymmetric in its
    /// labels. Repeated labels are allowed.
    pub fn from_labels<F: FnMut(usize, usize) -> Real>(labels: &[usize], bits: usize, mut entry: F) -> Self {
        Self::from_upper(labels.len(), bits, |r, s| entry(labels[r], labels[s]))
    }

    /// Checks antisymmetry of a full square array and wraps it.
    pub fn from_dense(rows: &[Vec<Real>]) -> Result<Self> {
        let n = rows.len();
        let bits = rows.first().and_then(|r| r.first()).map(|x| x.bits()).unwrap_or(64);
        let mut m = Self::zeros(n, bits);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(invalid("matrix is not square"));
            }
            if !row[j].is_zero() {
                return Err(invalid("non-zero diagonal entry"));
            }
            for k in j + 1..n {
                if row[k] != -&rows[k][j] {
                    return Err(invalid("matrix is not antisymmetric"));
                }
                m.set(j, k, row[k].clone());
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn get(&self, j: usize, k: usize) -> Real {
        self.a[j * self.n + k].clone()
    }

    fn at(&self, j: usize, k: usize) -> &Real {
        &self.a[j * self.n + k]
    }

    /// Sets entry `(j, k)` and its mirror `(k, j)`.
    pub fn set(&mut self, j: usize, k: usize, v: Real) {
        assert_ne!(j, k, "diagonal of an antisymmetric matrix is zero");
        self.a[k * self.n + j] = -&v;
        self.a[j * self.n + k] = v;
    }

    pub fn to_dense(&self) -> Vec<Vec<Real>> {
        (0..self.n).map(|j| (0..self.n).map(|k| self.get(j, k)).collect()).collect()
    }

    /// Principal submatrix on the given indices, in the given order.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self::from_upper(idx.len(), self.bits, |r, s| self.get(idx[r], idx[s]))
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.n).all(|j| self.at(j, j).is_zero() && (0..j).all(|k| *self.at(j, k) == -self.at(k, j)))
    }

    /// Multiplies row `j` and column `j` by `alpha`.
    pub fn scale_pair(&mut self, j: usize, alpha: &Real) {
        for k in 0..self.n {
            if k != j {
                let v = self.get(j, k) * alpha;
                self.set(j, k, v);
            }
        }
    }

    /// Adds `c` times row/column `src` to row/column `dst`.
    pub fn add_pair(&mut self, dst: usize, src: usize, c: &Real) {
        assert_ne!(dst, src);
        for k in 0..self.n {
            if k != dst {
                let mut v = self.get(dst, k) + c * self.get(src, k);
                if k == src {
                    // The (src, dst) entry also picks up the column update.
                    v = self.get(dst, src) + c * self.get(src, src);
                }
                self.set(dst, k, v);
            }
        }
    }

    /// Swaps rows/columns `i` and `j`.
    pub fn swap_pair(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let mut perm: Vec<usize> = (0..self.n).collect();
        perm.swap(i, j);
        *self = self.select(&perm);
    }

    /// `B M Bᵀ` for a square `B` given by rows.
    pub fn congruence(&self, b: &[Vec<Real>]) -> Self {
        let n = self.n;
        let bm: Vec<Vec<Real>> = (0..n)
            .map(|i| (0..n).map(|k| (0..n).fold(Real::zero(self.bits), |acc, l| acc + &b[i][l] * self.at(l, k))).collect())
            .collect();
        Self::from_upper(n, self.bits, |i, j| (0..n).fold(Real::zero(self.bits), |acc, k| acc + &bm[i][k] * &b[j][k]))
    }
}

/// A perfect matching of `0..2N`: pairs `(l, r)` with `l < r`, sorted by `l`,
/// with sign `(−1)^crossings`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectMatching {
    pub pairs: Vec<(usize, usize)>,
    pub sign: i8,
}

impl PerfectMatching {
    fn from_pairs(pairs: Vec<(usize, usize)>) -> Self {
        let mut crossings = 0usize;
        for (x, &(a, b)) in pairs.iter().enumerate() {
            for &(c, d) in &pairs[x + 1..] {
                if a < c && c < b && b < d {
                    crossings += 1;
                }
            }
        }
        let sign = if crossings % 2 == 0 { 1 } else { -1 };
        PerfectMatching { pairs, sign }
    }

    /// Parity of the permutation `(l1 r1 l2 r2 …)`, computed by counting inversions.
    pub fn permutation_sign(&self) -> i8 {
        let flat: Vec<usize> = self.pairs.iter().flat_map(|&(l, r)| [l, r]).collect();
        let mut inv = 0usize;
        for i in 0..flat.len() {
            for j in i + 1..flat.len() {
                if flat[i] > flat[j] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// All `(2N−1)!!` perfect matchings of `0..n` (empty for odd `n`).
pub fn perfect_matchings(n: usize) -> Vec<PerfectMatching> {
    fn rec(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<PerfectMatching>) {
        if free.is_empty() {
            out.push(PerfectMatching::from_pairs(cur.clone()));
            return;
        }
        let first = free.remove(0);
        for i in 0..free.len() {
            let partner = free.remove(i);
            cur.push((first, partner));
            rec(free, cur, out);
            cur.pop();
            free.insert(i, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    if n % 2 == 1 {
        return out;
    }
    let mut free: Vec<usize> = (0..n).collect();
    rec(&mut free, &mut Vec::new(), &mut out);
    out
}

/// Largest dimension accepted by the matching-sum oracle.
pub const MATCHING_ORACLE_MAX_DIM: usize = 12;

/// Pfaffian as the signed sum over perfect matchings.
pub fn pf_matchings(m: &SkewMatrix) -> Result<Real> {
    if m.n > MATCHING_ORACLE_MAX_DIM {
        return Err(invalid(alloc::format!(
            "matching enumeration is limited to dimension {MATCHING_ORACLE_MAX_DIM}, got {}",
            m.n
        )));
    }
    if m.n % 2 == 1 {
        return Ok(Real::zero(m.bits));
    }
    let mut total = Real::zero(m.bits);
    for pm in perfect_matchings(m.n) {
        let mut prod = Real::one(m.bits);
        for &(l, r) in &pm.pairs {
            prod *= m.at(l, r);
        }
        if pm.sign > 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// Pfaffian by skew-symmetric elimination with pivoting.
///
/// Each step moves the largest entry of the leading row into position
/// `(k, k+1)`, takes it as a factor and replaces the trailing block by its
/// Schur complement. Odd dimensions give zero.
pub fn pf(m: &SkewMatrix) -> Real {
    let n = m.n;
    let bits = m.bits;
    if n % 2 == 1 {
        return Real::zero(bits);
    }
    let mut a = m.to_dense();
    let mut result = Real::one(bits);
    let mut k = 0;
    while k < n {
        let mut piv = k + 1;
        let mut best = a[k][k + 1].abs();
        for c in k + 2..n {
            let v = a[k][c].abs();
            if v > best {
                best = v;
                piv = c;
            }
        }
        if best.is_zero() {
            return Real::zero(bits);
        }
        if piv != k + 1 {
            a.swap(piv, k + 1);
            for row in a.iter_mut() {
                row.swap(piv, k + 1);
            }
            result = -result;
        }
        let p = a[k][k + 1].clone();
        result *= &p;
        let inv = p.recip();
        let rk: Vec<Real> = a[k][k + 2..].iter().map(|x| x * &inv).collect();
        let rk1: Vec<Real> = a[k + 1][k + 2..].iter().map(|x| x * &inv).collect();
        for i in k + 2..n {
            let ai_k = a[i][k].clone();
            let ai_k1 = a[i][k + 1].clone();
            for j in i + 1..n {
                // a'_ij = a_ij − (a_{i,k+1} a_{k,j} − a_{i,k} a_{k+1,j}) / a_{k,k+1}
                let upd = &ai_k1 * &rk[j - k - 2] - &ai_k * &rk1[j - k - 2];
                let v = &a[i][j] - &upd;
                a[j][i] = -&v;
                a[i][j] = v;
            }
        }
        k += 2;
    }
    result
}

/// Pfaffian of the matrix on labels `0..=m` after replacing label `from` by
/// `to`; `entry` generates the antisymmetric entry for any pair of labels.
pub fn pf_index_subst<F: FnMut(usize, usize) -> Real>(m: usize, from: usize, to: usize, bits: usize, entry: F) -> Real {
    let labels: Vec<usize> = (0..=m).map(|i| if i == from { to } else { i }).collect();
    pf(&SkewMatrix::from_labels(&labels, bits, entry))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(rows: &[Vec<Real>]) -> Real {
    let n = rows.len();
    let bits = rows.first().and_then(|r| r.first()).map(|x| x.bits()).unwrap_or(64);
    let mut a = rows.to_vec();
    let mut d = Real::one(bits);
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
        if a[piv][k].is_zero() {
            return Real::zero(bits);
        }
        if piv != k {
            a.swap(piv, k);
            d = -d;
        }
        d *= &a[k][k];
        for i in k + 1..n {
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let v = &a[i][j] - &f * &a[k][j];
                a[i][j] = v;
            }
        }
    }
    d
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(rows: &[Vec<Real>], rhs: &[Real]) -> Result<Vec<Real>> {
    let n = rows.len();
    if rhs.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(invalid("linear system must be square"));
    }
    let mut a: Vec<Vec<Real>> = rows.iter().zip(rhs).map(|(r, b)| {
        let mut row = r.clone();
        row.push(b.clone());
        row
    }).collect();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap()).unwrap();
        if a[piv][k].is_zero() {
            return Err(invalid("singular linear system"));
        }
        a.swap(piv, k);
        for i in k + 1..n {
            let f = &a[i][k] / &a[k][k];
            for j in k..=n {
                let v = &a[i][j] - &f * &a[k][j];
                a[i][j] = v;
            }
        }
    }
    let mut x: Vec<Real> = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let mut acc = a[i][n].clone();
        for (j, xj) in x.iter().rev().enumerate() {
            acc -= &a[i][i + 1 + j] * xj;
        }
        x.push(acc / &a[i][i]);
    }
    x.reverse();
    Ok(x)
}

/// Pfaffian of `T + B` where `T` has superdiagonal entries `t[k−1]` at
/// `(k−1, k)` and `B` has `b_{jk} = f_j g_k` above the diagonal, via the sum
/// over nested index sets `0 ≤ i1 ≤ i2 < i3 ≤ i4 < … ≤ N−1` of products of
/// `L_{i1,i2} = (Π_{m=i1}^{i2−1} t_{2m+2} / Π_{m=i1}^{i2} t_{2m+1}) f_{2i1} g_{2i2+1}`,
/// times `Π t_{2j+1}` (with `t` 1-indexed in these formulas).
///
/// The nested sum is evaluated right to left: `D[i]` is the total over
/// configurations whose intervals all start at or after `i`.
pub fn pf_structured_expansion(t: &[Real], f: &[Real], g: &[Real]) -> Result<Real> {
    let dim = f.len();
    if dim % 2 == 1 || dim == 0 || g.len() != dim || t.len() + 1 != dim {
        return Err(invalid("expansion needs 2N−1 superdiagonal entries and 2N-vectors f, g"));
    }
    let n = dim / 2;
    let bits = f[0].bits();
    // t_{2m+1} sits at t[2m], t_{2m+2} at t[2m+1].
    if (0..n).any(|m| t[2 * m].is_zero()) {
        let dense = SkewMatrix::from_upper(dim, bits, |j, k| {
            let tv = if k == j + 1 { t[j].clone() } else { Real::zero(bits) };
            tv + &f[j] * &g[k]
        });
        return Ok(pf(&dense));
    }
    let l = structured_l_table(t, f, g);
    let mut d = vec![Real::one(bits); n + 1];
    for i in (0..n).rev() {
        let mut acc = d[i + 1].clone();
        for i2 in i..n {
            acc += &l[i][i2] * &d[i2 + 1];
        }
        d[i] = acc;
    }
    let mut pref = Real::one(bits);
    for m in 0..n {
        pref *= &t[2 * m];
    }
    Ok(pref * &d[0])
}

/// `L_{i1,i2}` for `i1 ≤ i2` (zero below the diagonal).
pub fn structured_l_table(t: &[Real], f: &[Real], g: &[Real]) -> Vec<Vec<Real>> {
    let n = f.len() / 2;
    let bits = f[0].bits();
    let mut l = vec![vec![Real::zero(bits); n]; n];
    for i1 in 0..n {
        let mut ratio = t[2 * i1].recip();
        for i2 in i1..n {
            if i2 > i1 {
                ratio = ratio * &t[2 * i2 - 1] / &t[2 * i2];
            }
            l[i1][i2] = &ratio * &f[2 * i1] * &g[2 * i2 + 1];
        }
    }
    l
}

/// Explicit enumeration of the nested index sets; the oracle for the
/// dynamic programme in [`pf_structured_expansion`].
pub fn structured_expansion_enumerated(t: &[Real], f: &[Real], g: &[Real]) -> Real {
    let n = f.len() / 2;
    let bits = f[0].bits();
    let l = structured_l_table(t, f, g);
    fn rec(start: usize, n: usize, l: &[Vec<Real>], prod: &Real, total: &mut Real) {
        for i1 in start..n {
            for i2 in i1..n {
                let p = prod * &l[i1][i2];
                *total += &p;
                rec(i2 + 1, n, l, &p, total);
            }
        }
    }
    let mut total = Real::one(bits);
    rec(0, n, &l, &Real::one(bits), &mut total);
    let mut pref = Real::one(bits);
    for m in 0..n {
        pref *= &t[2 * m];
    }
    pref * total
}

#[cfg(test)]
mod tests {
    use super::*;

    const BITS: usize = 256;

    fn r(x: f64) -> Real {
        Real::from_f64(x, BITS)
    }

    struct Lcg(u64);

    impl Lcg {
        fn next(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    fn random_skew(n: usize, rng: &mut Lcg) -> SkewMatrix {
        SkewMatrix::from_upper(n, BITS, |_, _| r(rng.next()))
    }

    fn rel_close(a: &Real, b: &Real, tol: f64) -> bool {
        let scale = a.abs().max(b.abs()).max(Real::one(64));
        (a - b).abs() / scale < tol
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut rng = Lcg(7);
        let n = 6;
        let a: Vec<Vec<Real>> = (0..n).map(|_| (0..n).map(|_| r(rng.next())).collect()).collect();
        let x: Vec<Real> = (0..n).map(|_| r(rng.next())).collect();
        let b: Vec<Real> = a.iter().map(|row| row.iter().zip(&x).fold(r(0.0), |s, (p, q)| s + p * q)).collect();
        let got = solve(&a, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!(rel_close(g, e, 1e-60));
        }
    }

    #[test]
    fn small_closed_forms() {
        let m = SkewMatrix::from_upper(2, BITS, |_, _| r(3.5));
        assert_eq!(pf_matchings(&m).unwrap(), r(3.5));
        assert_eq!(pf(&m), r(3.5));
        let vals = [1.0, 2.0, 3.0, 5.0, 7.0, 11.0];
        let mut it = vals.iter();
        let m4 = SkewMatrix::from_upper(4, BITS, |_, _| r(*it.next().unwrap()));
        // a01 a23 − a02 a13 + a03 a12
        let expect = r(1.0 * 11.0 - 2.0 * 7.0 + 3.0 * 5.0);
        assert_eq!(pf_matchings(&m4).unwrap(), expect);
        assert!(rel_close(&pf(&m4), &expect, 1e-70));
    }

    #[test]
    fn standard_symplectic_form_has_unit_pfaffian() {
        for n in 1..=5 {
            let z = SkewMatrix::from_upper(2 * n, BITS, |j, k| if j % 2 == 0 && k == j + 1 { r(1.0) } else { r(0.0) });
            assert_eq!(pf(&z), r(1.0));
            if 2 * n <= MATCHING_ORACLE_MAX_DIM {
                assert_eq!(pf_matchings(&z).unwrap(), r(1.0));
            }
        }
    }

    #[test]
    fn odd_dimension_and_oracle_limit() {
        let mut rng = Lcg(3);
        assert!(pf(&random_skew(5, &mut rng)).is_zero());
        assert!(pf_matchings(&random_skew(5, &mut rng)).unwrap().is_zero());
        assert!(pf_matchings(&random_skew(14, &mut rng)).is_err());
    }

    #[test]
    fn matching_count_and_signs() {
        let ms = perfect_matchings(8);
        assert_eq!(ms.len(), 105);
        for m in &ms {
            assert_eq!(m.sign, m.permutation_sign());
        }
    }

    #[test]
    fn elimination_agrees_with_enumeration() {
        let mut rng = Lcg(11);
        for _ in 0..200 {
            let m = random_skew(6, &mut rng);
            assert!(rel_close(&pf(&m), &pf_matchings(&m).unwrap(), 1e-30));
        }
    }

    #[test]
    fn zero_leading_row_gives_zero() {
        let m = SkewMatrix::from_upper(4, BITS, |j, k| if j == 0 { r(0.0) } else { r((j + k) as f64) });
        assert!(pf(&m).is_zero());
    }

    #[test]
    fn dense_round_trip_checks_antisymmetry() {
        let mut rng = Lcg(5);
        let m = random_skew(5, &mut rng);
        let back = SkewMatrix::from_dense(&m.to_dense()).unwrap();
        assert!(back.is_antisymmetric());
        let mut bad = m.to_dense();
        bad[0][1] = r(9.0);
        assert!(SkewMatrix::from_dense(&bad).is_err());
    }

    #[test]
    fn substitution_identity_and_duplicate() {
        let gen = |a: usize, b: usize| -> Real {
            if a == b {
                return r(0.0);
            }
            let (lo, hi, s) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
            r(s * ((lo * 7 + hi * 3) as f64).sin())
        };
        let m = SkewMatrix::from_upper(6, BITS, gen);
        assert_eq!(pf_index_subst(5, 2, 2, BITS, gen), pf(&m));
        // Label 4 already present: two equal rows.
        assert!(pf_index_subst(5, 2, 4, BITS, gen).abs() < 1e-70);
        // Against a hand-built matrix with label 7 in slot 1.
        let labels = [0usize, 7, 2, 3];
        let hand = SkewMatrix::from_upper(4, BITS, |j, k| gen(labels[j], labels[k]));
        assert_eq!(pf_index_subst(3, 1, 7, BITS, gen), pf(&hand));
    }

    #[test]
    fn structured_expansion_single_block() {
        let t = [r(2.0)];
        let f = [r(3.0), r(5.0)];
        let g = [r(7.0), r(11.0)];
        let v = pf_structured_expansion(&t, &f, &g).unwrap();
        assert_eq!(v, r(2.0 + 3.0 * 11.0));
    }

    #[test]
    fn structured_expansion_matches_dense_and_enumeration() {
        let mut rng = Lcg(17);
        for n in 1..=6 {
            let dim = 2 * n;
            let t: Vec<Real> = (0..dim - 1).map(|_| r(rng.next() + 2.0)).collect();
            let f: Vec<Real> = (0..dim).map(|_| r(rng.next())).collect();
            let g: Vec<Real> = (0..dim).map(|_| r(rng.next())).collect();
            let dense = SkewMatrix::from_upper(dim, BITS, |j, k| {
                let tv = if k == j + 1 { t[j].clone() } else { r(0.0) };
                tv + &f[j] * &g[k]
            });
            let d = pf(&dense);
            let e = pf_structured_expansion(&t, &f, &g).unwrap();
            assert!(rel_close(&d, &e, 1e-60), "n={n}");
            assert!(rel_close(&e, &structured_expansion_enumerated(&t, &f, &g), 1e-60));
        }
    }

    #[test]
    fn structured_expansion_zero_pivot_fallback() {
        let t = [r(0.0), r(1.0), r(2.0)];
        let f = [r(1.0), r(2.0), r(3.0), r(4.0)];
        let g = [r(0.5), r(0.25), r(1.5), r(2.0)];
        let dense = SkewMatrix::from_upper(4, BITS, |j, k| {
            let tv = if k == j + 1 { t[j].clone() } else { r(0.0) };
            tv + &f[j] * &g[k]
        });
        assert_eq!(pf_structured_expansion(&t, &f, &g).unwrap(), pf(&dense));
    }
}
