//! Real spherical harmonics on S² and the dimension count of the degree-ℓ
//! eigenspace on S^d.

use crate::error::{Error, Result};

/// Number of linearly independent degree-ℓ spherical harmonics on S^d:
/// binom(ℓ+d, d) − binom(ℓ+d−2, d). Errors on overflow rather than wrapping.
pub fn c_dim(ell: u64, d: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::Domain("sphere dimension must be at least 1".into()));
    }
    if ell == 0 {
        return Ok(1);
    }
    let a = binom_u128(ell + d, d)?;
    let b = binom_u128(ell + d - 2, d)?;
    u64::try_from(a - b).map_err(|_| Error::Overflow(format!("c({ell},{d}) exceeds u64")))
}

fn binom_u128(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::Overflow(format!("binomial({n},{k}) overflow")))?;
        acc /= (i + 1) as u128;
    }
    Ok(acc)
}

/// Total number of harmonics of degree ≤ `l_max` on S², i.e. (l_max+1)².
pub fn sph_harm_count(l_max: u64) -> usize {
    ((l_max + 1) * (l_max + 1)) as usize
}

/// Flat index of Y_{ℓm} in a [`sph_harm_table`] row: ℓ² + (m + ℓ).
#[inline]
pub fn sph_harm_index(ell: u64, m: i64) -> usize {
    (ell * ell) as usize + (m + ell as i64) as usize
}

/// Real orthonormal spherical harmonics Y_{ℓm}(θ, φ) on S² for all degrees
/// ℓ ≤ `l_max`, flattened by [`sph_harm_index`] (negative orders precede
/// positive within a degree). Orthonormal for the surface measure of total
/// mass 4π: ∫ Y_{ℓm} Y_{ℓ'm'} dσ = δ_{ℓℓ'} δ_{mm'}.
///
/// The colatitude part Q_{ℓm}(θ) (normalization folded in) follows the
/// standard stable recurrences from Q_00 = 1/sqrt(4π):
/// diagonal  Q_{mm} = −sinθ·sqrt((2m+1)/(2m))·Q_{m−1,m−1},
/// lift      Q_{m+1,m} = cosθ·sqrt(2m+3)·Q_{mm},
/// upward    Q_{ℓm} = sqrt((4ℓ²−1)/(ℓ²−m²))·(cosθ·Q_{ℓ−1,m}
///                    − sqrt(((ℓ−1)²−m²)/(4(ℓ−1)²−1))·Q_{ℓ−2,m}).
/// Then Y_{ℓ0} = Q_{ℓ0} and Y_{ℓ,±m} = sqrt(2)·Q_{ℓm}·{cos, sin}(mφ).
pub fn sph_harm_table(l_max: u64, theta: f64, phi: f64) -> Result<Vec<f64>> {
    if !(theta.is_finite() && phi.is_finite()) {
        return Err(Error::Domain("angles must be finite".into()));
    }
    let lm = l_max as usize;
    let (st, ct) = theta.sin_cos();

    // q[l][m] for 0 ≤ m ≤ l ≤ l_max, stored triangularly.
    let mut q: Vec<Vec<f64>> = (0..=lm).map(|l| vec![0.0; l + 1]).collect();
    q[0][0] = 0.28209479177387814; // 1/sqrt(4π)
    for m in 1..=lm {
        let mf = m as f64;
        q[m][m] = -st * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * q[m - 1][m - 1];
    }
    for m in 0..lm {
        let mf = m as f64;
        q[m + 1][m] = ct * (2.0 * mf + 3.0).sqrt() * q[m][m];
    }
    for m in 0..=lm {
        for l in (m + 2)..=lm {
            let lf = l as f64;
            let mf = m as f64;
            let c1 = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let c2 = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            q[l][m] = c1 * (ct * q[l - 1][m] - c2 * q[l - 2][m]);
        }
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    let mut out = vec![0.0; sph_harm_count(l_max)];
    for l in 0..=lm {
        out[sph_harm_index(l as u64, 0)] = q[l][0];
        for m in 1..=l {
            let (smp, cmp) = (m as f64 * phi).sin_cos();
            out[sph_harm_index(l as u64, m as i64)] = sqrt2 * q[l][m] * cmp;
            out[sph_harm_index(l as u64, -(m as i64))] = sqrt2 * q[l][m] * smp;
        }
    }
    Ok(out)
}

/// Single harmonic Y_{ℓm}(θ, φ). Convenience wrapper over the table.
pub fn real_sph_harm(ell: u64, m: i64, theta: f64, phi: f64) -> Result<f64> {
    if m.unsigned_abs() > ell {
        return Err(Error::Domain(format!("order |{m}| exceeds degree {ell}")));
    }
    let table = sph_harm_table(ell, theta, phi)?;
    Ok(table[sph_harm_index(ell, m)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dimension_counts() {
        assert_eq!(c_dim(0, 5).unwrap(), 1);
        // d = 2: 2ℓ+1.
        for l in 0..20 {
            assert_eq!(c_dim(l, 2).unwrap(), 2 * l + 1);
        }
        assert_eq!(c_dim(2, 3).unwrap(), 9);
        assert_eq!(c_dim(1, 3).unwrap(), 4);
        assert!(c_dim(3, 0).is_err());
    }

    #[test]
    fn constant_harmonic() {
        let y = real_sph_harm(0, 0, 1.1, 2.2).unwrap();
        assert!((y - 0.28209479177387814).abs() < 1e-15);
    }

    #[test]
    fn degree_one_closed_forms() {
        // Y_10 = sqrt(3/4π) cosθ; Y_1,±1 = ∓-free real convention:
        // sqrt(3/4π) sinθ {cosφ, sinφ} up to the diagonal recurrence's sign.
        let (theta, phi) = (0.7, 1.9);
        let a = (3.0 / (4.0 * PI)).sqrt();
        let y10 = real_sph_harm(1, 0, theta, phi).unwrap();
        assert!((y10 - a * theta.cos()).abs() < 1e-14);
        let y11 = real_sph_harm(1, 1, theta, phi).unwrap();
        assert!((y11.abs() - a * theta.sin() * phi.cos().abs()).abs() < 1e-14);
    }

    #[test]
    fn addition_theorem_diagonal() {
        // Σ_m Y_{ℓm}(x)² = (2ℓ+1)/(4π) at any point.
        let (theta, phi) = (1.234, -0.456);
        let table = sph_harm_table(9, theta, phi).unwrap();
        for l in [0u64, 1, 4, 7, 9] {
            let s: f64 = (-(l as i64)..=l as i64)
                .map(|m| {
                    let y = table[sph_harm_index(l, m)];
                    y * y
                })
                .sum();
            let expect = (2 * l + 1) as f64 / (4.0 * PI);
            assert!((s - expect).abs() < 1e-12, "degree {l}: {s} vs {expect}");
        }
    }

    #[test]
    fn table_layout() {
        assert_eq!(sph_harm_count(3), 16);
        assert_eq!(sph_harm_index(2, -2), 4);
        assert_eq!(sph_harm_index(2, 0), 6);
        assert_eq!(sph_harm_index(2, 2), 8);
        assert!(real_sph_harm(2, 3, 0.1, 0.1).is_err());
    }
}
