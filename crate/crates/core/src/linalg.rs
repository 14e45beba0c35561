//! Small dense complex linear algebra: closed-form 3×3 eigendecomposition
//! (Cardano + adjugate null vectors) and a scaling-and-squaring matrix
//! exponential used as the fallback when the eigenbasis is ill-conditioned.
//!
//! Everything here is `pub(crate)`; the public surface exposes only the
//! propagation operations built on top.

use crate::C64;
use nalgebra::{Matrix3, Vector3};

/// Eigenbasis of a 3×3 complex matrix: m = vectors · diag(values) · inv_vectors.
pub(crate) struct Eig3 {
    pub values: [C64; 3],
    pub vectors: Matrix3<C64>,
    pub inv_vectors: Matrix3<C64>,
    /// ‖V‖∞·‖V⁻¹‖∞ — gauge of how much the similarity transform amplifies error.
    pub cond: f64,
}

pub(crate) fn inf_norm(m: &Matrix3<C64>) -> f64 {
    (0..3)
        .map(|r| (0..3).map(|c| m[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Roots of the monic cubic t³ + a2·t² + a1·t + a0 over ℂ (Cardano), with a
/// couple of Newton steps to clean up rounding from the radicals.
pub(crate) fn cubic_roots(a2: C64, a1: C64, a0: C64) -> [C64; 3] {
    // depress: t = s − a2/3  ⇒  s³ + p·s + q
    let third = a2 / 3.0;
    let p = a1 - a2 * third;
    let q = a0 - a1 * third + 2.0 * third * third * third;

    let half_q = q * 0.5;
    let d = (half_q * half_q + (p / 3.0).powu(3)).sqrt();
    // pick the branch that keeps u³ away from cancellation
    let u3 = if (-half_q + d).norm() >= (-half_q - d).norm() {
        -half_q + d
    } else {
        -half_q - d
    };

    let mut roots = if u3.norm() == 0.0 {
        // p = q = 0: triple root of the depressed cubic
        [-third; 3]
    } else {
        let u = u3.cbrt();
        let omega = C64::new(-0.5, 0.75f64.sqrt());
        let mut out = [C64::new(0.0, 0.0); 3];
        let mut w = C64::new(1.0, 0.0);
        for slot in &mut out {
            let uw = u * w;
            *slot = uw - p / (3.0 * uw) - third;
            w *= omega;
        }
        out
    };

    for t in &mut roots {
        for _ in 0..2 {
            let f = ((*t + a2) * *t + a1) * *t + a0;
            let fp = (3.0 * *t + 2.0 * a2) * *t + a1;
            if fp.norm() > 1e-300 {
                *t -= f / fp;
            }
        }
    }
    roots
}

/// Eigenvalues of a 3×3 complex matrix via its characteristic polynomial.
/// Always succeeds; order is unspecified.
pub(crate) fn eig3_values(m: &Matrix3<C64>) -> [C64; 3] {
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    // sum of principal 2×2 minors
    let c = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
    let det = m.determinant();
    cubic_roots(-tr, c, -det)
}

/// Bilinear (unconjugated) cross product; lies in the null space of a rank-2
/// matrix when the arguments are two of its rows.
fn cross(u: &Vector3<C64>, v: &Vector3<C64>) -> Vector3<C64> {
    Vector3::new(
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )
}

/// Full eigendecomposition. Returns `None` when an eigenvector cannot be
/// resolved (repeated eigenvalue / defective matrix) or the eigenbasis is
/// numerically degenerate — callers then fall back to [`expm_taylor`].
pub(crate) fn eig3(m: &Matrix3<C64>) -> Option<Eig3> {
    let values = eig3_values(m);
    let scale = inf_norm(m).max(1e-300);
    let mut vectors = Matrix3::zeros();

    for (k, &lam) in values.iter().enumerate() {
        let a = m - Matrix3::from_diagonal_element(lam);
        let rows: [Vector3<C64>; 3] =
            [a.row(0).transpose(), a.row(1).transpose(), a.row(2).transpose()];
        let candidates = [
            cross(&rows[0], &rows[1]),
            cross(&rows[0], &rows[2]),
            cross(&rows[1], &rows[2]),
        ];
        let best = candidates
            .iter()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .unwrap();
        // all adjugate columns vanishing ⇒ rank(A) ≤ 1 ⇒ eigenspace not
        // resolvable from row pairs; bail out to the series route
        if best.norm() <= 1e-13 * scale * scale {
            return None;
        }
        let v = best / C64::new(best.norm(), 0.0);
        vectors.set_column(k, &v);
    }

    let inv_vectors = vectors.try_inverse()?;
    let cond = inf_norm(&vectors) * inf_norm(&inv_vectors);
    Some(Eig3 {
        values,
        vectors,
        inv_vectors,
        cond,
    })
}

/// Eigenbases this lopsided lose more digits to the similarity transform
/// than the series route loses to truncation.
pub(crate) const EIG_COND_LIMIT: f64 = 1e8;

/// exp(m·z) by scaling and squaring of an order-18 Taylor truncation.
/// With the scaled norm held ≤ 1/2 the truncation error is below 1e-17
/// per squaring level, so accuracy is limited by rounding, not the series.
pub(crate) fn expm_taylor(m: &Matrix3<C64>, z: f64) -> Matrix3<C64> {
    let b = m * C64::new(z, 0.0);
    let norm = inf_norm(&b);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let bs = b / C64::new(2f64.powi(squarings as i32), 0.0);

    let mut result = Matrix3::identity();
    let mut term: Matrix3<C64> = Matrix3::identity();
    for k in 1..=18 {
        term = term * bs / C64::new(k as f64, 0.0);
        result += term;
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// exp(m·z) through the eigenbasis when it is well-conditioned, otherwise
/// by the series. The two routes agree to ~1e-12 on generic inputs.
pub(crate) fn expm(m: &Matrix3<C64>, z: f64) -> Matrix3<C64> {
    match eig3(m) {
        Some(e) if e.cond <= EIG_COND_LIMIT => {
            let d = Matrix3::from_diagonal(&Vector3::new(
                (e.values[0] * z).exp(),
                (e.values[1] * z).exp(),
                (e.values[2] * z).exp(),
            ));
            e.vectors * d * e.inv_vectors
        }
        _ => expm_taylor(m, z),
    }
}
