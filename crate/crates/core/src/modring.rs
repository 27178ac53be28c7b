//! Square matrices over `Z_m` and the symplectic membership test.
//!
//! Entries are always stored as residues in `[0, m)`; a negative value `-x`
//! is represented by `m - x`. Symplectic forms use the interleaved basis
//! `e1, f1, e2, f2, ...`, so the reference form is block diagonal with
//! `[[0, 1], [-1, 0]]` blocks on coordinate pairs `(2k, 2k + 1)` (0-based).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A ring modulus `m >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u32", try_from = "u32")]
pub struct Modulus {
    m: u32,
    is_prime: bool,
}

impl Modulus {
    pub fn new(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::Structural(format!("modulus must be >= 2, got {m}")));
        }
        Ok(Modulus {
            m,
            is_prime: is_prime(m),
        })
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.m
    }

    #[inline]
    pub fn is_prime(self) -> bool {
        self.is_prime
    }

    /// Reduce any signed integer into `[0, m)`.
    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.m as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.m as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.m as u64 - b as u64) % self.m as u64) as u32
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.m as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    pub fn is_unit(self, a: u32) -> bool {
        gcd(a as u64 % self.m as u64, self.m as u64) == 1
    }

    /// Multiplicative inverse, if `a` is a unit.
    pub fn inv(self, a: u32) -> Option<u32> {
        let (g, x, _) = ext_gcd((a % self.m) as i64, self.m as i64);
        (g == 1).then(|| self.reduce(x))
    }

    pub fn pow(self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.m;
        let mut b = base % self.m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// All units of `Z_m` in ascending order.
    pub fn units(self) -> Vec<u32> {
        (1..self.m).filter(|&a| self.is_unit(a)).collect()
    }

    /// Bytes per entry in the canonical key encoding.
    pub fn key_width(self) -> usize {
        if self.m <= 1 << 8 {
            1
        } else if self.m <= 1 << 16 {
            2
        } else {
            4
        }
    }
}

impl From<Modulus> for u32 {
    fn from(m: Modulus) -> u32 {
        m.m
    }
}

impl TryFrom<u32> for Modulus {
    type Error = Error;

    fn try_from(m: u32) -> Result<Self> {
        Modulus::new(m)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.m)
    }
}

pub fn is_prime(m: u32) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= m as u64 {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// A `dim x dim` matrix over `Z_m`, `dim` even.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    dim: usize,
    modulus: Modulus,
    entries: Vec<u32>,
}

impl ModMatrix {
    /// Build from row-major residues; every entry must already lie in `[0, m)`.
    pub fn new(dim: usize, modulus: Modulus, entries: Vec<u32>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::Structural(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= modulus.value()) {
            return Err(Error::Structural(format!(
                "entry {bad} is not a residue modulo {modulus}"
            )));
        }
        Ok(ModMatrix {
            dim,
            modulus,
            entries,
        })
    }

    /// Build from arbitrary integers, reducing each into `[0, m)`.
    pub fn from_signed(dim: usize, modulus: Modulus, entries: &[i64]) -> Result<Self> {
        let reduced = entries.iter().map(|&e| modulus.reduce(e)).collect();
        ModMatrix::new(dim, modulus, reduced)
    }

    pub fn identity(dim: usize, modulus: Modulus) -> Result<Self> {
        check_dim(dim)?;
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1 % modulus.value();
        }
        Ok(ModMatrix {
            dim,
            modulus,
            entries,
        })
    }

    pub fn diagonal(modulus: Modulus, diag: &[i64]) -> Result<Self> {
        let dim = diag.len();
        check_dim(dim)?;
        let mut entries = vec![0; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = modulus.reduce(d);
        }
        Ok(ModMatrix {
            dim,
            modulus,
            entries,
        })
    }

    /// Trusted constructor for internal kernels that already produce residues.
    pub(crate) fn from_raw(dim: usize, modulus: Modulus, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        debug_assert!(entries.iter().all(|&e| e < modulus.value()));
        ModMatrix {
            dim,
            modulus,
            entries,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.dim + col]
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| self.get(i, j) == if i == j { 1 % self.modulus.m } else { 0 })
        })
    }

    fn check_conforming(&self, other: &ModMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.m,
                right: other.modulus.m,
            });
        }
        Ok(())
    }

    /// Matrix product reduced modulo `m`.
    pub fn mul(&self, other: &ModMatrix) -> Result<ModMatrix> {
        self.check_conforming(other)?;
        let (n, m) = (self.dim, self.modulus.m as u64);
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for k in 0..n {
                    acc += (self.entries[i * n + k] as u64 * other.entries[k * n + j] as u64) % m;
                }
                out[i * n + j] = (acc % m) as u32;
            }
        }
        Ok(ModMatrix::from_raw(n, self.modulus, out))
    }

    pub fn scale(&self, c: i64) -> ModMatrix {
        let c = self.modulus.reduce(c);
        let entries = self
            .entries
            .iter()
            .map(|&e| self.modulus.mul(e, c))
            .collect();
        ModMatrix::from_raw(self.dim, self.modulus, entries)
    }

    /// Entrywise multiplication by `(-1)^(i+j)`.
    pub fn sign_flip(&self) -> ModMatrix {
        let n = self.dim;
        let mut entries = self.entries.clone();
        for i in 0..n {
            for j in 0..n {
                if (i + j) % 2 == 1 {
                    entries[i * n + j] = self.modulus.neg(entries[i * n + j]);
                }
            }
        }
        ModMatrix::from_raw(n, self.modulus, entries)
    }

    /// Entrywise reduction `Z_m -> Z_target`; `target` must divide `m`.
    pub fn reduce_to(&self, target: Modulus) -> Result<ModMatrix> {
        if self.modulus.m % target.m != 0 {
            return Err(Error::Structural(format!(
                "cannot reduce Z_{} to Z_{}: modulus does not divide",
                self.modulus, target
            )));
        }
        let entries = self.entries.iter().map(|&e| e % target.m).collect();
        Ok(ModMatrix::from_raw(self.dim, target, entries))
    }

    /// Determinant over `Z_m`.
    ///
    /// Uses division-free Euclidean row reduction, so it is exact for
    /// composite moduli where pivots need not be units.
    pub fn det(&self) -> u32 {
        let n = self.dim;
        let md = self.modulus;
        let mut a = self.entries.clone();
        let mut negate = false;
        for col in 0..n {
            loop {
                // Smallest nonzero representative at or below the diagonal.
                let pivot = (col..n)
                    .filter(|&r| a[r * n + col] != 0)
                    .min_by_key(|&r| a[r * n + col]);
                let Some(p) = pivot else { return 0 };
                if p != col {
                    swap_rows(&mut a, n, p, col);
                    negate = !negate;
                }
                let mut done = true;
                for r in col + 1..n {
                    let q = a[r * n + col] / a[col * n + col];
                    if q != 0 {
                        sub_row_multiple(&mut a, n, md, r, col, q);
                    }
                    if a[r * n + col] != 0 {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
        }
        let mut det = 1 % md.m;
        for i in 0..n {
            det = md.mul(det, a[i * n + i]);
        }
        if negate {
            md.neg(det)
        } else {
            det
        }
    }

    /// Inverse over `Z_m`; fails with the determinant when it is not a unit.
    pub fn inverse(&self) -> Result<ModMatrix> {
        let n = self.dim;
        let md = self.modulus;
        let det = self.det();
        if !md.is_unit(det) {
            return Err(Error::Singular { det, modulus: md.m });
        }
        // Augmented [A | I], width 2n.
        let w = 2 * n;
        let mut a = vec![0u32; n * w];
        for i in 0..n {
            a[i * w..i * w + n].copy_from_slice(&self.entries[i * n..(i + 1) * n]);
            a[i * w + n + i] = 1 % md.m;
        }
        for col in 0..n {
            loop {
                let pivot = (col..n)
                    .filter(|&r| a[r * w + col] != 0)
                    .min_by_key(|&r| a[r * w + col]);
                let p = pivot.expect("unit determinant implies a nonzero pivot");
                if p != col {
                    swap_rows(&mut a, w, p, col);
                }
                let mut done = true;
                for r in col + 1..n {
                    let q = a[r * w + col] / a[col * w + col];
                    if q != 0 {
                        sub_row_multiple(&mut a, w, md, r, col, q);
                    }
                    if a[r * w + col] != 0 {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
        }
        // Triangular with unit diagonal entries (their product is a unit).
        for col in (0..n).rev() {
            let piv_inv = md
                .inv(a[col * w + col])
                .expect("diagonal entries divide a unit determinant");
            for j in 0..w {
                a[col * w + j] = md.mul(a[col * w + j], piv_inv);
            }
            for r in 0..col {
                let f = a[r * w + col];
                if f != 0 {
                    sub_row_multiple(&mut a, w, md, r, col, f);
                }
            }
        }
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            out[i * n..(i + 1) * n].copy_from_slice(&a[i * w + n..(i + 1) * w]);
        }
        Ok(ModMatrix::from_raw(n, md, out))
    }

    /// Symplectic membership in the interleaved-pairs basis: for all
    /// `l < j`, `sum_i (a[2i,l] a[2i+1,j] - a[2i,j] a[2i+1,l])` is 1 when
    /// `(l, j) = (2k, 2k+1)` and 0 otherwise.
    pub fn is_symplectic(&self) -> bool {
        let n = self.dim;
        let md = self.modulus;
        let m = md.m as u64;
        for l in 0..n {
            for j in l + 1..n {
                let mut acc = 0u64;
                for i in 0..n / 2 {
                    let (top, bot) = (2 * i, 2 * i + 1);
                    acc += (self.get(top, l) as u64 * self.get(bot, j) as u64) % m;
                    acc += m - (self.get(top, j) as u64 * self.get(bot, l) as u64) % m;
                }
                let want = if l % 2 == 0 && j == l + 1 { 1 % m } else { 0 };
                if acc % m != want {
                    return false;
                }
            }
        }
        true
    }

    /// Injective byte encoding: LE `dim` (u32), LE `m` (u32), then entries
    /// row-major at the minimal width for `m` (1, 2 or 4 bytes, LE).
    pub fn canonical_key(&self) -> Vec<u8> {
        let width = self.modulus.key_width();
        let mut key = Vec::with_capacity(8 + width * self.entries.len());
        key.extend_from_slice(&(self.dim as u32).to_le_bytes());
        key.extend_from_slice(&self.modulus.m.to_le_bytes());
        for &e in &self.entries {
            key.extend_from_slice(&e.to_le_bytes()[..width]);
        }
        key
    }

    pub fn from_canonical_key(key: &[u8]) -> Result<ModMatrix> {
        let header = |i: usize| -> Result<u32> {
            key.get(i..i + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| Error::Parse("canonical key too short".into()))
        };
        let dim = header(0)? as usize;
        let modulus = Modulus::new(header(4)?)?;
        let width = modulus.key_width();
        let body = &key[8..];
        if body.len() != width * dim * dim {
            return Err(Error::Parse(format!(
                "canonical key body has {} bytes, expected {}",
                body.len(),
                width * dim * dim
            )));
        }
        let entries = body
            .chunks_exact(width)
            .map(|c| {
                let mut b = [0u8; 4];
                b[..width].copy_from_slice(c);
                u32::from_le_bytes(b)
            })
            .collect();
        ModMatrix::new(dim, modulus, entries)
    }
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModMatrix(Z_{}, {})", self.modulus, self)
    }
}

impl fmt::Display for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::Structural(format!(
            "matrix dimension must be even and >= 2, got {dim}"
        )));
    }
    Ok(())
}

fn swap_rows(a: &mut [u32], width: usize, r1: usize, r2: usize) {
    for j in 0..width {
        a.swap(r1 * width + j, r2 * width + j);
    }
}

/// `row[target] -= q * row[source]` modulo `m`.
fn sub_row_multiple(
    a: &mut [u32],
    width: usize,
    md: Modulus,
    target: usize,
    source: usize,
    q: u32,
) {
    let q = q % md.m;
    for j in 0..width {
        let s = md.mul(a[source * width + j], q);
        a[target * width + j] = md.sub(a[target * width + j], s);
    }
}

/// Product of two row-major `dim x dim` residue slices, written into `out`.
#[inline]
pub(crate) fn mul_raw(a: &[u16], b: &[u16], dim: usize, m: u32, out: &mut [u16]) {
    let m = m as u64;
    for i in 0..dim {
        let row = &a[i * dim..(i + 1) * dim];
        for j in 0..dim {
            let mut acc = 0u64;
            for k in 0..dim {
                acc += row[k] as u64 * b[k * dim + j] as u64;
            }
            out[i * dim + j] = (acc % m) as u16;
        }
    }
}

/// A torus element `diag(w, w^-1, 1, ..., 1)` of `Sp(2n, Z_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusElement {
    w: u32,
    half_dim: usize,
    modulus: Modulus,
}

impl TorusElement {
    pub fn new(w: u32, half_dim: usize, modulus: Modulus) -> Result<Self> {
        let w = w % modulus.value();
        if !modulus.is_unit(w) {
            return Err(Error::Structural(format!(
                "{w} is not a unit modulo {modulus}"
            )));
        }
        if half_dim == 0 {
            return Err(Error::Structural("half-dimension must be >= 1".into()));
        }
        Ok(TorusElement {
            w,
            half_dim,
            modulus,
        })
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn realize(&self) -> ModMatrix {
        let winv = self.modulus.inv(self.w).expect("validated unit");
        let mut diag = vec![1i64; 2 * self.half_dim];
        diag[0] = self.w as i64;
        diag[1] = winv as i64;
        ModMatrix::diagonal(self.modulus, &diag).expect("even dimension")
    }
}
