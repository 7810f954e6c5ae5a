//! Orthonormal complex spherical harmonics with the Condon–Shortley phase.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::linalg::C64;

#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    l * l + (l as i64 + m) as usize
}

/// All `Y_{l,m}(e)` for `l ≤ l_max`, indexed by [`lm_index`]. `e` must be a
/// unit vector.
///
/// Uses `Y_{l,m} = Q_l^m(cos θ) (x + i y)^m` for `m ≥ 0`, where `Q_l^m` is the
/// normalized associated Legendre function divided by `sin^m θ`; this keeps
/// the poles regular.
#[allow(clippy::needless_range_loop)]
pub fn sph_harm_all(l_max: usize, e: &Vector3<f64>) -> Vec<C64> {
    let size = (l_max + 1) * (l_max + 1);
    let mut out = vec![C64::new(0.0, 0.0); size];
    let z = e.z;
    let xy = C64::new(e.x, e.y);

    // q[l][m] for m ≥ 0
    let mut q = vec![vec![0.0_f64; l_max + 1]; l_max + 1];
    q[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=l_max {
        let mf = m as f64;
        q[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * q[m - 1][m - 1];
    }
    for m in 0..l_max {
        let mf = m as f64;
        q[m + 1][m] = (2.0 * mf + 3.0).sqrt() * z * q[m][m];
    }
    for m in 0..=l_max {
        let mf = m as f64;
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            q[l][m] = a * (z * q[l - 1][m] - b * q[l - 2][m]);
        }
    }

    let mut xy_pow = vec![C64::new(1.0, 0.0); l_max + 1];
    for m in 1..=l_max {
        xy_pow[m] = xy_pow[m - 1] * xy;
    }
    for l in 0..=l_max {
        for m in 0..=l {
            let y = xy_pow[m] * q[l][m];
            out[lm_index(l, m as i64)] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[lm_index(l, -(m as i64))] = y.conj() * sign;
            }
        }
    }
    out
}

pub fn sph_harm(l: usize, m: i64, e: &Vector3<f64>) -> C64 {
    sph_harm_all(l, e)[lm_index(l, m)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SphereRule;

    #[test]
    fn low_order_closed_forms() {
        let e = Vector3::new(0.48, -0.6, 0.64);
        let y = sph_harm_all(2, &e);
        let c10 = (3.0 / (4.0 * PI)).sqrt();
        assert!((y[lm_index(1, 0)].re - c10 * e.z).abs() < 1e-15);
        // Y_{1,1} = -sqrt(3/8π) (x + i y)
        let c11 = (3.0 / (8.0 * PI)).sqrt();
        assert!((y[lm_index(1, 1)] - C64::new(-c11 * e.x, -c11 * e.y)).norm() < 1e-15);
        // Y_{2,0} = sqrt(5/16π)(3z² - 1)
        let c20 = (5.0 / (16.0 * PI)).sqrt();
        assert!((y[lm_index(2, 0)].re - c20 * (3.0 * e.z * e.z - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_under_exact_quadrature() {
        let l_max = 4;
        let rule = SphereRule::product(2 * l_max);
        let n = (l_max + 1) * (l_max + 1);
        let mut gram = vec![C64::new(0.0, 0.0); n * n];
        for (e, w) in rule.directions.iter().zip(&rule.weights) {
            let y = sph_harm_all(l_max, e);
            for a in 0..n {
                for b in 0..n {
                    gram[a * n + b] += y[a].conj() * y[b] * *w;
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * n + b] - expected).norm() < 1e-13);
            }
        }
    }
}
