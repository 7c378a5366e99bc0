//! Minimal complex sparse-matrix kernel (CSR) for the truncated Fock space.
//!
//! Operators on a Fock space of M modes are 2^M x 2^M but extremely sparse:
//! every ladder monomial maps each occupation basis state to at most one
//! other. A hand-rolled CSR with merge-based add, sparse-accumulator matmul,
//! and an adjoint is all the algebra the audits need (Hermiticity residuals,
//! commutators, canonical anticommutation relations), and keeping it local
//! makes the entry order — and therefore the floating-point results —
//! deterministic.

use num_complex::Complex64;

type C64 = Complex64;

/// Accumulates (row, col, value) triplets, then sorts and merges into CSR.
#[derive(Debug, Clone)]
pub struct CooBuilder {
    n: usize,
    entries: Vec<(u32, u32, C64)>,
}

impl CooBuilder {
    /// New builder for an n x n matrix.
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "dimension exceeds u32 indexing");
        CooBuilder {
            n,
            entries: Vec::new(),
        }
    }

    /// Adds `val` at (row, col); duplicates are summed at build time.
    pub fn push(&mut self, row: usize, col: usize, val: C64) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row as u32, col as u32, val));
    }

    /// Sorts, merges duplicates, drops exact zeros, and freezes into CSR.
    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col = Vec::with_capacity(self.entries.len());
        let mut val: Vec<C64> = Vec::with_capacity(self.entries.len());
        let mut iter = self.entries.into_iter().peekable();
        while let Some((r, cidx, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == cidx {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != C64::ZERO {
                col.push(cidx);
                val.push(v);
                row_ptr[r as usize + 1] += 1;
            }
        }
        for r in 0..self.n {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            col,
            val,
        }
    }
}

/// Square complex sparse matrix in compressed-sparse-row form.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<C64>,
}

impl CsrMatrix {
    /// The n x n zero matrix.
    pub fn zeros(n: usize) -> Self {
        CooBuilder::new(n).build()
    }

    /// The n x n identity.
    pub fn identity(n: usize) -> Self {
        let mut b = CooBuilder::new(n);
        for k in 0..n {
            b.push(k, k, C64::new(1.0, 0.0));
        }
        b.build()
    }

    /// Matrix dimension n.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// Iterates stored entries as (row, col, value) in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.col[k] as usize, self.val[k]))
        })
    }

    /// Returns z * self.
    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.val {
            *v *= z;
        }
        out
    }

    /// Returns self + other (merge per row).
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut b = CooBuilder::new(self.n);
        b.entries.reserve(self.nnz() + other.nnz());
        for (r, c, v) in self.entries() {
            b.push(r, c, v);
        }
        for (r, c, v) in other.entries() {
            b.push(r, c, v);
        }
        b.build()
    }

    /// Returns self - other.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut b = CooBuilder::new(self.n);
        b.entries.reserve(self.nnz());
        for (r, c, v) in self.entries() {
            b.push(c, r, v.conj());
        }
        b.build()
    }

    /// Sparse product self * other via a per-row dense accumulator.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut acc: Vec<C64> = vec![C64::ZERO; n];
        let mut touched: Vec<u32> = Vec::new();
        let mut seen: Vec<bool> = vec![false; n];
        let mut b = CooBuilder::new(n);
        for r in 0..n {
            touched.clear();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.col[k] as usize;
                let a = self.val[k];
                for k2 in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c2 = other.col[k2] as usize;
                    if !seen[c2] {
                        seen[c2] = true;
                        touched.push(c2 as u32);
                    }
                    acc[c2] += a * other.val[k2];
                }
            }
            touched.sort_unstable();
            for &c2 in &touched {
                let v = acc[c2 as usize];
                if v != C64::ZERO {
                    b.push(r, c2 as usize, v);
                }
                acc[c2 as usize] = C64::ZERO;
                seen[c2 as usize] = false;
            }
        }
        b.build()
    }

    /// Commutator self * other - other * self.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// y = self * x as a new dense vector.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n, "vector length mismatch");
        let mut y = vec![C64::ZERO; self.n];
        for r in 0..self.n {
            let mut acc = C64::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[k] * x[self.col[k] as usize];
            }
            y[r] = acc;
        }
        y
    }

    /// Largest entry magnitude (0 for the zero matrix).
    pub fn max_abs(&self) -> f64 {
        self.val.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise |self - other|, robust to differing patterns.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// Serializes the stored entries as coordinate-list text, one
    /// `row col re im` line per entry in row-major order, with full
    /// round-trip precision — a stable format for external diffing.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        for (r, c, v) in self.entries() {
            out.push_str(&format!("{} {} {:.16e} {:.16e}\n", r, c, v.re, v.im));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_sparse(rng: &mut ChaCha12Rng, n: usize, density: f64) -> CsrMatrix {
        let mut b = CooBuilder::new(n);
        for r in 0..n {
            for col in 0..n {
                if rng.gen::<f64>() < density {
                    b.push(r, col, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
        }
        b.build()
    }

    fn to_dense(m: &CsrMatrix) -> Vec<Vec<C64>> {
        let mut d = vec![vec![C64::ZERO; m.dim()]; m.dim()];
        for (r, cidx, v) in m.entries() {
            d[r][cidx] += v;
        }
        d
    }

    fn dense_mul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let n = a.len();
        let mut out = vec![vec![C64::ZERO; n]; n];
        for r in 0..n {
            for k in 0..n {
                if a[r][k] != C64::ZERO {
                    for cidx in 0..n {
                        out[r][cidx] += a[r][k] * b[k][cidx];
                    }
                }
            }
        }
        out
    }

    fn dense_max_diff(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
        let mut worst = 0.0f64;
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }

    #[test]
    fn build_sorts_merges_and_drops_exact_zeros() {
        let mut b = CooBuilder::new(3);
        b.push(0, 2, c(1.0, 0.0));
        b.push(0, 0, c(2.0, 0.0));
        b.push(0, 2, c(0.5, -1.0));
        b.push(1, 1, c(3.0, 0.0));
        b.push(1, 1, c(-3.0, 0.0));
        let m = b.build();
        assert_eq!(m.nnz(), 2);
        let got: Vec<_> = m.entries().collect();
        assert_eq!(got[0].0, 0);
        assert_eq!(got[0].1, 0);
        assert_eq!(got[0].2, c(2.0, 0.0));
        assert_eq!(got[1].1, 2);
        assert_eq!(got[1].2, c(1.5, -1.0));
    }

    #[test]
    fn identity_is_neutral_for_matvec_and_matmul() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let a = random_sparse(&mut rng, 12, 0.3);
        let id = CsrMatrix::identity(12);
        assert_eq!(a.max_abs_diff(&id.matmul(&a)), 0.0);
        assert_eq!(a.max_abs_diff(&a.matmul(&id)), 0.0);
        let x: Vec<C64> = (0..12).map(|k| c(k as f64, -(k as f64))).collect();
        assert_eq!(id.matvec(&x), x);
    }

    #[test]
    fn matmul_matches_dense_reference() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        for _ in 0..10 {
            let a = random_sparse(&mut rng, 9, 0.35);
            let b = random_sparse(&mut rng, 9, 0.35);
            let got = to_dense(&a.matmul(&b));
            let want = dense_mul(&to_dense(&a), &to_dense(&b));
            assert!(dense_max_diff(&got, &want) < 1e-13);
        }
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let a = random_sparse(&mut rng, 10, 0.3);
        let b = random_sparse(&mut rng, 10, 0.3);
        let ad = to_dense(&a.adjoint());
        let d = to_dense(&a);
        for r in 0..10 {
            for cidx in 0..10 {
                assert_eq!(ad[r][cidx], d[cidx][r].conj());
            }
        }
        // (AB)^dagger = B^dagger A^dagger
        let lhs = a.matmul(&b).adjoint();
        let rhs = b.adjoint().matmul(&a.adjoint());
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn add_sub_scale_match_dense_arithmetic() {
        let mut rng = ChaCha12Rng::seed_from_u64(24);
        let a = random_sparse(&mut rng, 8, 0.4);
        let b = random_sparse(&mut rng, 8, 0.4);
        let z = c(0.7, -0.2);
        let da = to_dense(&a);
        let db = to_dense(&b);
        let sum = to_dense(&a.add(&b));
        let dif = to_dense(&a.sub(&b));
        let sc = to_dense(&a.scale(z));
        for r in 0..8 {
            for k in 0..8 {
                assert!((sum[r][k] - (da[r][k] + db[r][k])).norm() < 1e-15);
                assert!((dif[r][k] - (da[r][k] - db[r][k])).norm() < 1e-15);
                assert!((sc[r][k] - z * da[r][k]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn matvec_matches_dense_reference() {
        let mut rng = ChaCha12Rng::seed_from_u64(25);
        let a = random_sparse(&mut rng, 11, 0.4);
        let x: Vec<C64> = (0..11)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let y = a.matvec(&x);
        let d = to_dense(&a);
        for r in 0..11 {
            let want: C64 = (0..11).map(|k| d[r][k] * x[k]).sum();
            assert!((y[r] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn commutator_of_diagonals_is_empty() {
        let mut b1 = CooBuilder::new(6);
        let mut b2 = CooBuilder::new(6);
        for k in 0..6 {
            b1.push(k, k, c(k as f64, 0.0));
            b2.push(k, k, c(1.0, k as f64));
        }
        let comm = b1.build().commutator(&b2.build());
        assert_eq!(comm.nnz(), 0);
        assert_eq!(comm.max_abs(), 0.0);
    }

    #[test]
    fn max_abs_diff_sees_pattern_differences() {
        let mut b1 = CooBuilder::new(4);
        b1.push(0, 0, c(1.0, 0.0));
        let a = b1.build();
        let mut b2 = CooBuilder::new(4);
        b2.push(3, 2, c(0.0, 0.25));
        let b = b2.build();
        assert_eq!(a.max_abs_diff(&b), 1.0);
        assert_eq!(b.max_abs_diff(&a), 1.0);
        assert_eq!(a.max_abs_diff(&a), 0.0);
    }

    #[test]
    fn coordinate_text_lists_entries_in_row_major_order() {
        let mut b = CooBuilder::new(3);
        b.push(2, 0, c(-0.5, 0.0));
        b.push(0, 1, c(1.0, -2.0));
        let text = b.build().to_coordinate_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("0 1 1.0000000000000000e0 -2.0000000000000000e0"));
        assert!(lines[1].starts_with("2 0 -5.0000000000000000e-1 0.0000000000000000e0"));
    }
}
