//! Dense matrices over a prime field GF(p).
//!
//! Entries are stored as residues in `[0, p)` and the modulus travels with
//! the matrix. Every operation is exact; elimination always pivots on the
//! leftmost nonzero column and the first row that has a nonzero entry there,
//! so outputs are deterministic.

use std::fmt;

use crate::error::{CdsError, Result};

/// Largest modulus accepted. Products of two residues fit comfortably in `u64`.
pub const MAX_MODULUS: u32 = 1 << 16;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime_above(n: u32) -> u32 {
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

fn check_modulus(p: u32) -> Result<()> {
    if p >= MAX_MODULUS || !is_prime(p) {
        return Err(CdsError::InvalidModulus(p));
    }
    Ok(())
}

/// Multiplicative inverse of a nonzero residue (Fermat).
pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

fn pow_mod(base: u32, mut exp: u32, p: u32) -> u32 {
    let mut acc: u64 = 1;
    let m = p as u64;
    let mut b = (base % p) as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u32
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GfMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for GfMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GfMatrix(p={}, {}x{}) [", self.p, self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "{:?}", self.row(r))?;
            if r + 1 < self.rows {
                write!(f, ", ")?;
            }
        }
        write!(f, "]")
    }
}

impl GfMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Result<Self> {
        check_modulus(p)?;
        Ok(GfMatrix { p, rows, cols, data: vec![0; rows * cols] })
    }

    pub fn identity(p: u32, n: usize) -> Result<Self> {
        let mut m = Self::zeros(p, n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        Ok(m)
    }

    /// Builds a matrix from row-major residues. Entries are reduced mod `p`.
    pub fn from_flat(p: u32, rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self> {
        check_modulus(p)?;
        if entries.len() != rows * cols {
            return Err(CdsError::Dimension(format!(
                "{} entries given for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        let data = entries.into_iter().map(|e| e % p).collect();
        Ok(GfMatrix { p, rows, cols, data })
    }

    /// Builds a matrix from signed integer rows, reducing each entry mod `p`.
    /// `cols` is needed only to type an empty row list.
    pub fn from_rows<R: AsRef<[i64]>>(p: u32, cols: usize, rows: &[R]) -> Result<Self> {
        check_modulus(p)?;
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(CdsError::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    cols
                )));
            }
            data.extend(r.iter().map(|&e| e.rem_euclid(p as i64) as u32));
        }
        Ok(GfMatrix { p, rows: rows.len(), cols, data })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == 0)
    }

    fn same_field(&self, other: &GfMatrix) -> Result<()> {
        if self.p != other.p {
            return Err(CdsError::FieldMismatch(self.p, other.p));
        }
        Ok(())
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &GfMatrix) -> Result<GfMatrix> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(CdsError::Dimension(format!(
                "cannot stack {} columns over {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(GfMatrix { p: self.p, rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &GfMatrix) -> Result<GfMatrix> {
        self.same_field(other)?;
        if self.rows != other.rows {
            return Err(CdsError::Dimension(format!(
                "cannot join {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(GfMatrix { p: self.p, rows: self.rows, cols, data })
    }

    pub fn neg(&self) -> GfMatrix {
        let p = self.p;
        let data = self.data.iter().map(|&e| (p - e) % p).collect();
        GfMatrix { p, rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &GfMatrix) -> Result<GfMatrix> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(CdsError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p as u64;
        let mut out = vec![0u32; self.rows * other.cols];
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc = (acc + self.get(i, k) as u64 * other.get(k, j) as u64) % p;
                }
                out[i * other.cols + j] = acc as u32;
            }
        }
        Ok(GfMatrix { p: self.p, rows: self.rows, cols: other.cols, data: out })
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, x: &[u32]) -> Vec<u32> {
        assert_eq!(x.len(), self.rows);
        let p = self.p as u64;
        let mut out = vec![0u64; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0 {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o = (*o + xr as u64 * self.get(r, c) as u64) % p;
            }
        }
        out.into_iter().map(|v| v as u32).collect()
    }

    /// Matrix times column vector.
    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        assert_eq!(x.len(), self.cols);
        let p = self.p as u64;
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0u64, |acc, (&a, &b)| (acc + a as u64 * b as u64) % p) as u32
            })
            .collect()
    }

    /// Selects a subset of rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> GfMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        GfMatrix { p: self.p, rows: idx.len(), cols: self.cols, data }
    }

    /// Reduced row echelon form together with its pivot columns.
    pub fn rref(&self) -> (GfMatrix, Vec<usize>) {
        let p = self.p as u64;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0usize;
        for c in 0..m.cols {
            if lead == m.rows {
                break;
            }
            let Some(pr) = (lead..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            if pr != lead {
                for k in 0..m.cols {
                    m.data.swap(pr * m.cols + k, lead * m.cols + k);
                }
            }
            let inv = inv_mod(m.get(lead, c), self.p) as u64;
            for k in c..m.cols {
                let v = m.get(lead, k) as u64 * inv % p;
                m.data[lead * m.cols + k] = v as u32;
            }
            for r in 0..m.rows {
                if r == lead {
                    continue;
                }
                let f = m.get(r, c) as u64;
                if f == 0 {
                    continue;
                }
                for k in c..m.cols {
                    let sub = f * m.get(lead, k) as u64 % p;
                    let v = (m.get(r, k) as u64 + p - sub) % p;
                    m.data[r * m.cols + k] = v as u32;
                }
            }
            pivots.push(c);
            lead += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Nonzero rows of the RREF: a canonical basis of the row space.
    pub fn row_basis(&self) -> GfMatrix {
        let (r, piv) = self.rref();
        let idx: Vec<usize> = (0..piv.len()).collect();
        r.select_rows(&idx)
    }

    pub fn transpose(&self) -> GfMatrix {
        let mut data = vec![0u32; self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.get(r, c);
            }
        }
        GfMatrix { p: self.p, rows: self.cols, cols: self.rows, data }
    }

    /// Basis of the right null space `{x : self · x = 0}`, one vector per row.
    pub fn right_kernel(&self) -> GfMatrix {
        let (r, piv) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        let mut data = Vec::with_capacity(free.len() * self.cols);
        for &f in &free {
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (i, &pc) in piv.iter().enumerate() {
                v[pc] = (self.p - r.get(i, f)) % self.p;
            }
            data.extend(v);
        }
        GfMatrix { p: self.p, rows: free.len(), cols: self.cols, data }
    }

    /// Basis of the left null space `{x : x · self = 0}`, one vector per row.
    /// Has `rows - rank` rows.
    pub fn left_kernel(&self) -> GfMatrix {
        self.transpose().right_kernel()
    }

    /// True iff every row of `v` lies in the row space of `self`.
    pub fn contains_rows(&self, v: &GfMatrix) -> Result<bool> {
        let base = self.rank();
        Ok(self.vstack(v)?.rank() == base)
    }
}

/// `rank(a) + rank(b) - rank([a; b])`, the dimension of the intersection of
/// the two row spaces.
pub fn rowspace_intersection_dim(a: &GfMatrix, b: &GfMatrix) -> Result<usize> {
    let stacked = a.vstack(b)?;
    Ok(a.rank() + b.rank() - stacked.rank())
}

/// A basis of `rowspan(a) ∩ rowspan(b)`.
///
/// Every `(x, y)` in the left kernel of `[a; -b]` gives a common vector
/// `x·a = y·b`; the images of a kernel basis span the intersection.
pub fn rowspace_intersection_basis(a: &GfMatrix, b: &GfMatrix) -> Result<GfMatrix> {
    let stacked = a.vstack(&b.neg())?;
    let ker = stacked.left_kernel();
    let mut data = Vec::with_capacity(ker.rows() * a.cols());
    for k in 0..ker.rows() {
        data.extend(a.left_apply(&ker.row(k)[..a.rows()]));
    }
    let images = GfMatrix { p: a.p, rows: ker.rows(), cols: a.cols(), data };
    Ok(images.row_basis())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(p: u32, cols: usize, rows: &[&[i64]]) -> GfMatrix {
        GfMatrix::from_rows(p, cols, rows).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(GfMatrix::identity(2, 3).unwrap().rank(), 3);
        assert_eq!(m(2, 2, &[&[1, 1], &[1, 1]]).rank(), 1);
        assert_eq!(m(5, 2, &[&[1, 2], &[2, 4], &[0, 1]]).rank(), 2);
    }

    #[test]
    fn rref_examples() {
        let (z, piv) = GfMatrix::zeros(3, 2, 3).unwrap().rref();
        assert!(z.is_zero());
        assert!(piv.is_empty());

        let (r, piv) = m(5, 2, &[&[2, 0], &[0, 3]]).rref();
        assert_eq!(r, GfMatrix::identity(5, 2).unwrap());
        assert_eq!(piv, vec![0, 1]);

        let (r, piv) = m(2, 3, &[&[1, 1, 0], &[1, 1, 1]]).rref();
        assert_eq!(r, m(2, 3, &[&[1, 1, 0], &[0, 0, 1]]));
        assert_eq!(piv, vec![0, 2]);
    }

    #[test]
    fn left_kernel_examples() {
        assert_eq!(GfMatrix::identity(3, 3).unwrap().left_kernel().rows(), 0);

        let k = m(2, 2, &[&[1, 1], &[1, 1]]).left_kernel();
        assert_eq!(k, m(2, 2, &[&[1, 1]]));

        let a = m(3, 2, &[&[1, 0], &[2, 0], &[0, 1]]);
        let k = a.left_kernel();
        assert_eq!(k.rows(), 1);
        // x1 + 2·x2 = 0 over GF(3) means x2 = x1.
        assert_eq!(k.row_basis(), m(3, 3, &[&[1, 1, 0]]).row_basis());
        assert!(!m(3, 3, &[&[1, 2, 0]]).mul(&a).unwrap().is_zero());
    }

    fn window(lo: usize, hi: usize) -> GfMatrix {
        let rows: Vec<Vec<i64>> = (lo..=hi)
            .map(|i| (0..9).map(|c| (c == i) as i64).collect())
            .collect();
        GfMatrix::from_rows(2, 9, &rows).unwrap()
    }

    #[test]
    fn intersection_dim_examples() {
        let full = GfMatrix::identity(5, 2).unwrap();
        assert_eq!(rowspace_intersection_dim(&full, &full).unwrap(), 2);
        assert_eq!(
            rowspace_intersection_dim(&m(2, 2, &[&[1, 0]]), &m(2, 2, &[&[0, 1]])).unwrap(),
            0
        );
        assert_eq!(rowspace_intersection_dim(&window(0, 4), &window(1, 5)).unwrap(), 4);
    }

    #[test]
    fn intersection_basis_examples() {
        let a = m(3, 3, &[&[1, 2, 0], &[0, 1, 1]]);
        let basis = rowspace_intersection_basis(&a, &a).unwrap();
        assert_eq!(basis, a.row_basis());

        let none = rowspace_intersection_basis(&m(2, 2, &[&[1, 0]]), &m(2, 2, &[&[0, 1]])).unwrap();
        assert_eq!(none.rows(), 0);

        let basis = rowspace_intersection_basis(&window(0, 4), &window(1, 5)).unwrap();
        assert_eq!(basis, window(1, 4));
    }

    #[test]
    fn mismatches_are_errors() {
        let a = GfMatrix::identity(2, 2).unwrap();
        let b = GfMatrix::identity(3, 2).unwrap();
        assert!(matches!(rowspace_intersection_dim(&a, &b), Err(CdsError::FieldMismatch(2, 3))));
        let c = GfMatrix::identity(2, 3).unwrap();
        assert!(matches!(rowspace_intersection_basis(&a, &c), Err(CdsError::Dimension(_))));
        assert!(GfMatrix::zeros(4, 1, 1).is_err());
    }

    #[test]
    fn empty_matrices_have_rank_zero() {
        let e = GfMatrix::zeros(5, 0, 4).unwrap();
        assert_eq!(e.rank(), 0);
        assert_eq!(e.left_kernel().rows(), 0);
        let e = GfMatrix::zeros(5, 3, 0).unwrap();
        assert_eq!(e.rank(), 0);
        assert_eq!(e.left_kernel().rows(), 3);
    }

    /// Rank by enumeration: the row space has exactly p^rank elements.
    fn brute_rank(a: &GfMatrix) -> usize {
        let p = a.modulus() as usize;
        let mut seen = std::collections::HashSet::new();
        let total = p.pow(a.rows() as u32);
        for mut code in 0..total {
            let mut x = vec![0u32; a.rows()];
            for xi in x.iter_mut() {
                *xi = (code % p) as u32;
                code /= p;
            }
            seen.insert(a.left_apply(&x));
        }
        let mut r = 0;
        let mut size = 1;
        while size < seen.len() {
            size *= p;
            r += 1;
        }
        assert_eq!(size, seen.len());
        r
    }

    fn arb_matrix() -> impl Strategy<Value = GfMatrix> {
        (prop_oneof![Just(2u32), Just(3u32), Just(5u32)], 0usize..=4, 0usize..=4).prop_flat_map(
            |(p, r, c)| {
                proptest::collection::vec(0..p, r * c)
                    .prop_map(move |d| GfMatrix::from_flat(p, r, c, d).unwrap())
            },
        )
    }

    fn arb_pair() -> impl Strategy<Value = (GfMatrix, GfMatrix)> {
        (prop_oneof![Just(2u32), Just(3u32), Just(5u32)], 0usize..=4, 0usize..=4, 0usize..=4)
            .prop_flat_map(|(p, ra, rb, c)| {
                (
                    proptest::collection::vec(0..p, ra * c),
                    proptest::collection::vec(0..p, rb * c),
                )
                    .prop_map(move |(da, db)| {
                        (
                            GfMatrix::from_flat(p, ra, c, da).unwrap(),
                            GfMatrix::from_flat(p, rb, c, db).unwrap(),
                        )
                    })
            })
    }

    proptest! {
        #[test]
        fn rank_matches_enumeration(a in arb_matrix()) {
            prop_assert_eq!(a.rank(), brute_rank(&a));
        }

        #[test]
        fn rref_is_idempotent(a in arb_matrix()) {
            let (r, piv) = a.rref();
            prop_assert_eq!(r.rank(), a.rank());
            let (r2, piv2) = r.rref();
            prop_assert_eq!(&r2, &r);
            prop_assert_eq!(piv2, piv);
            // row space preserved
            prop_assert!(a.contains_rows(&r).unwrap());
            prop_assert!(r.contains_rows(&a).unwrap());
        }

        #[test]
        fn left_kernel_annihilates(a in arb_matrix()) {
            let k = a.left_kernel();
            prop_assert_eq!(k.rows(), a.rows() - a.rank());
            prop_assert_eq!(k.rank(), k.rows());
            for i in 0..k.rows() {
                prop_assert!(a.left_apply(k.row(i)).iter().all(|&v| v == 0));
            }
        }

        #[test]
        fn intersection_properties((a, b) in arb_pair()) {
            let dab = rowspace_intersection_dim(&a, &b).unwrap();
            prop_assert_eq!(dab, rowspace_intersection_dim(&b, &a).unwrap());
            prop_assert!(a.vstack(&b).unwrap().rank() <= a.rank() + b.rank());
            let basis = rowspace_intersection_basis(&a, &b).unwrap();
            prop_assert_eq!(basis.rows(), dab);
            prop_assert!(a.contains_rows(&basis).unwrap());
            prop_assert!(b.contains_rows(&basis).unwrap());
        }
    }
}
