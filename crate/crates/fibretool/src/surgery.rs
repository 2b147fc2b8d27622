//! Integer algebra of torus surgery coefficients.
//!
//! A torus surgery removes a neighborhood `T^2 x D^2` of a framed torus and
//! reglues it by a diffeomorphism of the boundary 3-torus. With coordinates
//! `(xi_1, xi_2, z)` on `T^2 x S^1` the regluing acts on first homology
//! `Z^3` by the unimodular matrix
//!
//! ```text
//!         | 1     0      0 |
//!   psi = | 0  (qk+1)/p  q |        with  qk + 1 = 0  (mod p),
//!         | 0     k      p |
//! ```
//!
//! where `p >= 0` is the multiplicity, `q` the auxiliary multiplicity
//! (`gcd(p, q) = 1`), and the direction `alpha` has already been rotated to
//! `(0, 1)` by an automorphism of `T^2`. The meridian `m = (0, 0, 1)` is sent
//! to `gamma = q*alpha + p*m`, which is the curve the regluing kills. The
//! surgery is *integral* exactly when `q = +/-1`; in that case the result of
//! a multiplicity-`p` surgery on a fibered torus acquires a multiple fiber of
//! multiplicity `p`.
//!
//! Degenerate edges of the parameter space follow fixed conventions:
//! `p = 1` forces `k = 0` (the matrix is elementary and nothing singular is
//! created), and `p = 0` requires `q = +/-1` with `k = -q` so that the matrix
//! with center entry `0` is still unimodular.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from validating surgery coefficients.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurgeryError {
    /// `p` and `q` share a factor, so `q*alpha + p*m` is not primitive and
    /// the matrix cannot be unimodular.
    #[error("p = {p} and q = {q} are not coprime (gcd = {g})")]
    NotCoprime { p: i64, q: i64, g: i64 },
    /// `p = 0` only yields a valid regluing for `q = +/-1`.
    #[error("p = 0 requires q = +1 or -1, got q = {q}")]
    DegenerateSurgery { q: i64 },
    /// The direction class must be a primitive vector of `Z^2`.
    #[error("direction ({0}, {1}) is not a primitive vector")]
    NotPrimitive(i64, i64),
    /// Multiplicities are non-negative by convention.
    #[error("multiplicity must be >= 0, got p = {0}")]
    NegativeMultiplicity(i64),
}

/// `gcd(|a|, |b|)`, with `gcd(0, 0) = 0`.
pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Extended Euclid: returns `(g, x, y)` with `a*x + b*y = g = gcd(|a|, |b|)`
/// and `g >= 0`. The witness `(x, y)` is the one produced by the classical
/// iteration, so the output is deterministic.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Solve `q*k + 1 = 0 (mod p)` for the canonical auxiliary exponent `k`.
///
/// * `p >= 2`: the unique solution with `0 <= k < p`, namely `-q^{-1} mod p`.
/// * `p = 1`: `k = 0` (every `k` works; this keeps the matrix elementary).
/// * `p = 0`: requires `q = +/-1` and returns `k = -q`, the choice that makes
///   the `p = 0` matrix (center entry zero) unimodular.
pub fn solve_k(p: i64, q: i64) -> Result<i64, SurgeryError> {
    if p < 0 {
        return Err(SurgeryError::NegativeMultiplicity(p));
    }
    if p == 0 && q.abs() != 1 {
        return Err(SurgeryError::DegenerateSurgery { q });
    }
    let g = gcd(p, q);
    if g != 1 {
        return Err(SurgeryError::NotCoprime { p, q, g });
    }
    match p {
        0 => Ok(-q),
        1 => Ok(0),
        _ => {
            // k = -q^{-1} mod p; reduce q first so the inverse is of a
            // non-negative residue.
            let q_red = q.rem_euclid(p);
            let (_, inv, _) = extended_gcd(q_red, p);
            Ok((-inv).rem_euclid(p))
        }
    }
}

/// Validated surgery coefficients `(p, q, alpha)` together with the solved
/// auxiliary exponent `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryData {
    p: i64,
    q: i64,
    alpha: (i64, i64),
    k: i64,
}

impl SurgeryData {
    /// Validate `(p, q, alpha)` and solve for `k`.
    ///
    /// Requires `p >= 0`, `gcd(p, q) = 1`, `alpha` primitive, and `q = +/-1`
    /// when `p = 0`.
    pub fn new(p: i64, q: i64, alpha: (i64, i64)) -> Result<Self, SurgeryError> {
        if gcd(alpha.0, alpha.1) != 1 {
            return Err(SurgeryError::NotPrimitive(alpha.0, alpha.1));
        }
        let k = solve_k(p, q)?;
        Ok(SurgeryData { p, q, alpha, k })
    }

    /// Multiplicity `p >= 0`.
    pub fn p(&self) -> i64 {
        self.p
    }

    /// Auxiliary multiplicity `q`, coprime to `p`.
    pub fn q(&self) -> i64 {
        self.q
    }

    /// Direction class in `H_1(T^2)`, a primitive vector.
    pub fn alpha(&self) -> (i64, i64) {
        self.alpha
    }

    /// Auxiliary exponent: the least `k >= 0` with `q*k + 1 = 0 (mod p)`
    /// when `p >= 1`, and `-q` when `p = 0`.
    pub fn k(&self) -> i64 {
        self.k
    }

    /// Integral surgeries (`q = +/-1`) are the ones that create a multiple
    /// fiber of multiplicity `p` on a fibered torus.
    pub fn is_integral(&self) -> bool {
        self.q.abs() == 1
    }
}

/// The regluing matrix acting on `H_1` of the boundary 3-torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingMatrix(pub [[i64; 3]; 3]);

impl GluingMatrix {
    pub fn det(&self) -> i64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Matrix-vector product on column vectors of `Z^3`.
    pub fn apply(&self, v: [i64; 3]) -> [i64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}

/// The matrix `psi` for validated surgery data.
///
/// For `p >= 1` the center entry is the integer `(qk + 1) / p`; for `p = 0`
/// it is `0` and the choice `k = -q` keeps the determinant at `1`.
pub fn gluing_matrix(data: &SurgeryData) -> GluingMatrix {
    let (p, q, k) = (data.p, data.q, data.k);
    let center = if p == 0 { 0 } else { (q * k + 1) / p };
    GluingMatrix([[1, 0, 0], [0, center, q], [0, k, p]])
}

/// A class in `H_1` of the boundary 3-torus, coordinates
/// `(alpha_1-part, alpha_2-part, meridian-part)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyClass(pub [i64; 3]);

impl HomologyClass {
    /// A class is primitive when its coordinates have gcd 1, i.e. it is
    /// represented by an embedded curve that generates a `Z` summand.
    pub fn is_primitive(&self) -> bool {
        gcd(gcd(self.0[0], self.0[1]), self.0[2]) == 1
    }
}

/// The class `gamma = q*alpha + p*m` killed by the surgery.
///
/// `alpha` sits in the first two coordinates and the meridian `m` is
/// `(0, 0, 1)`. Coprimality of `p` and `q` (with `alpha` primitive) makes
/// `gamma` primitive, so it really is represented by an embedded curve.
pub fn surgery_class(data: &SurgeryData) -> HomologyClass {
    let (a0, a1) = data.alpha;
    HomologyClass([data.q * a0, data.q * a1, data.p])
}

/// A `GL(2, Z)` matrix `M` with `M * alpha = (0, 1)`.
///
/// Row 1 must be `+/-(alpha_1, -alpha_0)` (the only primitive vectors killing
/// `alpha`); the sign is chosen so the top-left entry is non-negative. Row 2
/// is the extended-Euclid witness `(x, y)` with `x*alpha_0 + y*alpha_1 = 1`.
/// Both choices are deterministic, so equal inputs give equal matrices.
pub fn direction_normalizer(alpha: (i64, i64)) -> Result<[[i64; 2]; 2], SurgeryError> {
    let (a0, a1) = alpha;
    if gcd(a0, a1) != 1 {
        return Err(SurgeryError::NotPrimitive(a0, a1));
    }
    let (_, x, y) = extended_gcd(a0, a1);
    let row0 = if a1 < 0 { [-a1, a0] } else { [a1, -a0] };
    Ok([row0, [x, y]])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route to `k`: scan the residues instead of inverting.
    fn solve_k_bruteforce(p: i64, q: i64) -> Option<i64> {
        match p {
            0 => (q.abs() == 1).then_some(-q),
            1 => Some(0),
            _ => (0..p).find(|k| (q * k + 1).rem_euclid(p) == 0),
        }
    }

    #[test]
    fn solve_k_matches_bruteforce_scan() {
        for p in 0..=60 {
            for q in -60..=60 {
                let got = solve_k(p, q);
                if p == 0 && q.abs() != 1 {
                    assert_eq!(got, Err(SurgeryError::DegenerateSurgery { q }));
                    continue;
                }
                if gcd(p, q) != 1 {
                    assert!(matches!(got, Err(SurgeryError::NotCoprime { .. })), "p={p} q={q}");
                    continue;
                }
                assert_eq!(got.unwrap(), solve_k_bruteforce(p, q).unwrap(), "p={p} q={q}");
            }
        }
    }

    #[test]
    fn solve_k_known_values() {
        assert_eq!(solve_k(2, 1), Ok(1));
        assert_eq!(solve_k(3, 2), Ok(1));
        assert_eq!(solve_k(1, 5), Ok(0));
        assert_eq!(solve_k(0, 1), Ok(-1));
        assert_eq!(solve_k(0, -1), Ok(1));
        assert_eq!(solve_k(5, 1), Ok(4));
        assert_eq!(solve_k(4, 2), Err(SurgeryError::NotCoprime { p: 4, q: 2, g: 2 }));
        assert_eq!(solve_k(0, 2), Err(SurgeryError::DegenerateSurgery { q: 2 }));
    }

    #[test]
    fn solve_k_is_unique_in_range() {
        for p in 2..=50 {
            for q in -50..=50 {
                if gcd(p, q) != 1 {
                    continue;
                }
                let hits: Vec<i64> = (0..p).filter(|k| (q * k + 1).rem_euclid(p) == 0).collect();
                assert_eq!(hits.len(), 1, "p={p} q={q}");
                assert_eq!(hits[0], solve_k(p, q).unwrap());
            }
        }
    }

    #[test]
    fn gluing_matrix_p2_q1() {
        let d = SurgeryData::new(2, 1, (0, 1)).unwrap();
        let m = gluing_matrix(&d);
        assert_eq!(m.0, [[1, 0, 0], [0, 1, 1], [0, 1, 2]]);
        assert_eq!(m.det(), 1);
    }

    #[test]
    fn gluing_matrix_p3_q2() {
        let d = SurgeryData::new(3, 2, (0, 1)).unwrap();
        let m = gluing_matrix(&d);
        assert_eq!(m.0, [[1, 0, 0], [0, 1, 2], [0, 1, 3]]);
        assert_eq!(m.det(), 1);
    }

    #[test]
    fn gluing_matrix_p0_is_unimodular() {
        let d = SurgeryData::new(0, 1, (0, 1)).unwrap();
        let m = gluing_matrix(&d);
        assert_eq!(m.0, [[1, 0, 0], [0, 0, 1], [0, -1, 0]]);
        assert_eq!(m.det(), 1);
    }

    #[test]
    fn gluing_matrix_p1_is_elementary() {
        let d = SurgeryData::new(1, 3, (0, 1)).unwrap();
        assert_eq!(d.k(), 0);
        let m = gluing_matrix(&d);
        assert_eq!(m.0, [[1, 0, 0], [0, 1, 3], [0, 0, 1]]);
        assert_eq!(m.det(), 1);
    }

    #[test]
    fn meridian_maps_to_surgery_class() {
        // psi * m = (0, q, p) = gamma in normalized coordinates.
        for (p, q) in [(2, 1), (3, 2), (5, -3), (7, 4), (0, 1), (1, 0)] {
            let d = SurgeryData::new(p, q, (0, 1)).unwrap();
            let m = gluing_matrix(&d);
            assert_eq!(m.apply([0, 0, 1]), [0, q, p], "p={p} q={q}");
            let gamma = surgery_class(&d);
            assert_eq!(gamma.0, [0, q, p]);
            assert!(gamma.is_primitive());
        }
    }

    #[test]
    fn surgery_class_with_unnormalized_direction() {
        let d = SurgeryData::new(5, 3, (1, 2)).unwrap();
        assert_eq!(surgery_class(&d).0, [3, 6, 5]);
        assert!(surgery_class(&d).is_primitive());
    }

    #[test]
    fn integrality_is_q_unit() {
        assert!(SurgeryData::new(5, 1, (0, 1)).unwrap().is_integral());
        assert!(SurgeryData::new(5, -1, (0, 1)).unwrap().is_integral());
        assert!(!SurgeryData::new(5, 2, (0, 1)).unwrap().is_integral());
    }

    #[test]
    fn normalizer_fixed_cases() {
        assert_eq!(direction_normalizer((0, 1)).unwrap(), [[1, 0], [0, 1]]);
        assert_eq!(direction_normalizer((1, 0)).unwrap(), [[0, -1], [1, 0]]);
        assert_eq!(
            direction_normalizer((2, 4)),
            Err(SurgeryError::NotPrimitive(2, 4))
        );
    }

    #[test]
    fn normalizer_sends_alpha_to_0_1_exhaustive() {
        for a0 in -50..=50i64 {
            for a1 in -50..=50i64 {
                if gcd(a0, a1) != 1 {
                    continue;
                }
                let m = direction_normalizer((a0, a1)).unwrap();
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                assert_eq!(det.abs(), 1, "alpha=({a0},{a1})");
                assert_eq!(m[0][0] * a0 + m[0][1] * a1, 0);
                assert_eq!(m[1][0] * a0 + m[1][1] * a1, 1);
                assert!(m[0][0] >= 0, "top-left entry normalized, alpha=({a0},{a1})");
            }
        }
    }

    #[test]
    fn extended_gcd_bezout_identity() {
        for a in -40..=40 {
            for b in -40..=40 {
                let (g, x, y) = extended_gcd(a, b);
                assert_eq!(g, gcd(a, b));
                assert_eq!(a * x + b * y, g, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn rejects_bad_directions() {
        assert_eq!(
            SurgeryData::new(2, 1, (0, 2)),
            Err(SurgeryError::NotPrimitive(0, 2))
        );
        assert_eq!(
            SurgeryData::new(2, 1, (0, 0)),
            Err(SurgeryError::NotPrimitive(0, 0))
        );
    }
}
