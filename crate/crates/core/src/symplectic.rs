//! Standard generators and the order formula for `Sp(2n, Z_m)`.

use crate::error::{Error, Result};
use crate::modring::{ModMatrix, Modulus};

/// Transvection `x -> x + <v, x> v`, i.e. `I + v (v^T J)` with `J` the
/// interleaved form.
pub fn transvection(modulus: Modulus, v: &[i64]) -> Result<ModMatrix> {
    let dim = v.len();
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::Structural(format!(
            "transvection vector has odd length {dim}"
        )));
    }
    // (v^T J)_j: J[2k][2k+1] = 1, J[2k+1][2k] = -1.
    let vj: Vec<i64> = (0..dim)
        .map(|j| if j % 2 == 0 { -v[j + 1] } else { v[j - 1] })
        .collect();
    let mut entries = vec![0i64; dim * dim];
    for i in 0..dim {
        entries[i * dim + i] = 1;
        for j in 0..dim {
            entries[i * dim + j] += v[i] * vj[j];
        }
    }
    ModMatrix::from_signed(dim, modulus, &entries)
}

/// Generators of `Sp(2n, Z_m)` in the interleaved basis `e1, f1, ..., en, fn`.
///
/// In order: for each pair `k`, the upper transvection `I + E[e_k, f_k]`
/// and the lower transvection `I + E[f_k, e_k]`; then for each `k < n`, the
/// transvection along `e_k + e_{k+1}` mixing neighbouring pairs. For `n = 1`
/// this is `{[[1,1],[0,1]], [[1,0],[1,1]]}`.
pub fn standard_generators(n: usize, modulus: Modulus) -> Result<Vec<ModMatrix>> {
    if n == 0 {
        return Err(Error::Structural("half-dimension must be >= 1".into()));
    }
    let dim = 2 * n;
    let mut gens = Vec::with_capacity(3 * n - 1);
    for k in 0..n {
        let mut upper = vec![0i64; dim * dim];
        let mut lower = vec![0i64; dim * dim];
        for i in 0..dim {
            upper[i * dim + i] = 1;
            lower[i * dim + i] = 1;
        }
        upper[(2 * k) * dim + 2 * k + 1] = 1;
        lower[(2 * k + 1) * dim + 2 * k] = 1;
        gens.push(ModMatrix::from_signed(dim, modulus, &upper)?);
        gens.push(ModMatrix::from_signed(dim, modulus, &lower)?);
    }
    for k in 0..n.saturating_sub(1) {
        let mut v = vec![0i64; dim];
        v[2 * k] = 1;
        v[2 * k + 2] = 1;
        gens.push(transvection(modulus, &v)?);
    }
    Ok(gens)
}

/// `|Sp(2n, Z_m)|`, multiplicative over prime powers:
/// `|Sp(2n, Z_{p^k})| = p^{(k-1) n (2n+1)} * p^{n^2} * prod_{i=1..n} (p^{2i} - 1)`.
/// `None` on overflow.
pub fn sp_order(n: usize, m: u32) -> Option<u128> {
    let mut total: u128 = 1;
    for (p, k) in factorize(m) {
        let p = p as u128;
        let mut part = p.checked_pow((n * n) as u32)?;
        for i in 1..=n {
            part = part.checked_mul(p.checked_pow(2 * i as u32)? - 1)?;
        }
        let lift = p.checked_pow(((k - 1) * n * (2 * n + 1)) as u32)?;
        total = total.checked_mul(part)?.checked_mul(lift)?;
    }
    Some(total)
}

pub(crate) fn factorize(mut m: u32) -> Vec<(u32, usize)> {
    let mut out = Vec::new();
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= m as u64 {
        let mut k = 0;
        while m % d == 0 {
            m /= d;
            k += 1;
        }
        if k > 0 {
            out.push((d, k));
        }
        d += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}
