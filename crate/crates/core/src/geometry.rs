//! Rotations, orientation grids, and angular loss functions.
//!
//! Orientations are proper rotations `Q` (orthogonal, determinant +1).
//! Estimation runs over a finite [`OrientationGrid`] sampled by drawing
//! Euler angles uniformly over their ranges; grid indices are stable
//! identifiers used by decoders and reports.
//!
//! Two distances are provided: the Frobenius distance `||Q - Q'||_F` between
//! rotation matrices (used by the design criteria), and the squared
//! polar/azimuth loss of a rotated reference direction (used by the
//! empirical error figures).

use std::collections::HashSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::seeding::substream;

/// Default tolerance for the rotation-matrix invariants.
pub const ROTATION_TOL: f64 = 1e-12;

/// Euler-angle composition order. Angles are applied intrinsically, so
/// `IntrinsicZyz` composes `Rz(a) * Ry(b) * Rz(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerConvention {
    IntrinsicZyz,
    IntrinsicZyx,
}

impl EulerConvention {
    /// Half-open sampling ranges that cover SO(3) exactly once (up to the
    /// usual measure-zero boundary identifications).
    pub fn sampling_ranges<T: Real>(self) -> [(T, T); 3] {
        let two_pi = T::PI() + T::PI();
        match self {
            EulerConvention::IntrinsicZyz => [
                (T::zero(), two_pi),
                (T::zero(), T::PI()),
                (T::zero(), two_pi),
            ],
            EulerConvention::IntrinsicZyx => [
                (T::zero(), two_pi),
                (-T::FRAC_PI_2(), T::FRAC_PI_2()),
                (T::zero(), two_pi),
            ],
        }
    }
}

/// A proper rotation matrix, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix<T> {
    m: [[T; 3]; 3],
}

impl<T: Real> RotationMatrix<T> {
    pub fn identity() -> Self {
        let o = T::one();
        let z = T::zero();
        RotationMatrix {
            m: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    /// Wrap raw entries without checking the rotation invariants.
    pub fn from_rows_unchecked(m: [[T; 3]; 3]) -> Self {
        RotationMatrix { m }
    }

    /// Wrap raw entries, verifying orthogonality and `det = +1` within
    /// [`ROTATION_TOL`].
    pub fn from_rows(m: [[T; 3]; 3]) -> Result<Self> {
        let r = RotationMatrix { m };
        if !r.is_special_orthogonal(real(ROTATION_TOL)) {
            return Err(Error::invalid(
                "rotation",
                "matrix is not orthogonal with determinant +1",
            ));
        }
        Ok(r)
    }

    /// Rotation about the z axis.
    pub fn about_z(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let z = T::zero();
        let o = T::one();
        RotationMatrix {
            m: [[c, -s, z], [s, c, z], [z, z, o]],
        }
    }

    /// Rotation about the y axis.
    pub fn about_y(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let z = T::zero();
        let o = T::one();
        RotationMatrix {
            m: [[c, z, s], [z, o, z], [-s, z, c]],
        }
    }

    /// Rotation about the x axis.
    pub fn about_x(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let z = T::zero();
        let o = T::one();
        RotationMatrix {
            m: [[o, z, z], [z, c, -s], [z, s, c]],
        }
    }

    /// Build a rotation from Euler angles under the given convention.
    ///
    /// The composed closed form is used rather than three explicit matrix
    /// products; tests check it against the explicit composition.
    pub fn from_euler(angles: [T; 3], convention: EulerConvention) -> Self {
        let (sa, ca) = angles[0].sin_cos();
        let (sb, cb) = angles[1].sin_cos();
        let (sg, cg) = angles[2].sin_cos();
        match convention {
            EulerConvention::IntrinsicZyz => RotationMatrix {
                m: [
                    [ca * cb * cg - sa * sg, -ca * cb * sg - sa * cg, ca * sb],
                    [sa * cb * cg + ca * sg, -sa * cb * sg + ca * cg, sa * sb],
                    [-sb * cg, sb * sg, cb],
                ],
            },
            EulerConvention::IntrinsicZyx => RotationMatrix {
                m: [
                    [ca * cb, ca * sb * sg - sa * cg, ca * sb * cg + sa * sg],
                    [sa * cb, sa * sb * sg + ca * cg, sa * sb * cg - ca * sg],
                    [-sb, cb * sg, cb * cg],
                ],
            },
        }
    }

    pub fn entries(&self) -> &[[T; 3]; 3] {
        &self.m
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = T::zero();
                for k in 0..3 {
                    acc += self.m[i][k] * other.m[k][j];
                }
                *cell = acc;
            }
        }
        RotationMatrix { m: out }
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        RotationMatrix {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    /// Apply the rotation to a 3-vector.
    pub fn apply(&self, v: [T; 3]) -> [T; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn determinant(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Largest deviation of `Q^T Q` from the identity, entrywise.
    pub fn orthogonality_defect(&self) -> T {
        let qtq = self.transpose().compose(self);
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { T::one() } else { T::zero() };
                let dev = (qtq.m[i][j] - target).abs();
                if dev > worst {
                    worst = dev;
                }
            }
        }
        worst
    }

    pub fn is_special_orthogonal(&self, tol: T) -> bool {
        self.orthogonality_defect() <= tol && (self.determinant() - T::one()).abs() <= tol
    }

    /// Frobenius distance to another rotation.
    pub fn distance_to(&self, other: &Self) -> T {
        rotation_distance(self, other)
    }

    /// Recover intrinsic Z-Y-Z angles. At the `sin(b) = 0` degeneracy the
    /// split between the two z rotations is not unique; the third angle is
    /// set to zero.
    pub fn euler_zyz(&self) -> [T; 3] {
        let two_pi = T::PI() + T::PI();
        let cb = self.m[2][2].max(-T::one()).min(T::one());
        let b = cb.acos();
        let sb = (T::one() - cb * cb).sqrt();
        let (a, g) = if sb > real(1e-14) {
            (
                self.m[1][2].atan2(self.m[0][2]),
                self.m[2][1].atan2(-self.m[2][0]),
            )
        } else {
            (self.m[1][0].atan2(self.m[0][0]), T::zero())
        };
        let wrap = |x: T| {
            let mut y = x % two_pi;
            if y < T::zero() {
                y += two_pi;
            }
            if y >= two_pi {
                y = T::zero();
            }
            y
        };
        [wrap(a), b, wrap(g)]
    }
}

/// Build a rotation from Euler angles (free-function form of
/// [`RotationMatrix::from_euler`]).
pub fn rotation_from_euler<T: Real>(angles: [T; 3], convention: EulerConvention) -> RotationMatrix<T> {
    RotationMatrix::from_euler(angles, convention)
}

/// Frobenius distance `||Q - Q'||_F` between two rotations.
///
/// Ranges over `[0, 2*sqrt(2)]` on SO(3).
pub fn rotation_distance<T: Real>(a: &RotationMatrix<T>, b: &RotationMatrix<T>) -> T {
    let ma = a.entries();
    let mb = b.entries();
    let mut acc = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let d = ma[i][j] - mb[i][j];
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Polar/azimuth pair with `polar` in `[0, pi)` and `azimuth` in `[0, 2*pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair<T> {
    pub polar: T,
    pub azimuth: T,
}

/// Spherical angles of the rotated reference direction `Q * reference`.
///
/// The angles are wrapped into the half-open canonical ranges: a polar angle
/// that lands exactly on `pi` is nudged to the largest representable value
/// below it, and the azimuth at either pole is 0 by convention.
pub fn reference_angles<T: Real>(q: &RotationMatrix<T>, reference: [T; 3]) -> AnglePair<T> {
    let v = q.apply(reference);
    let z = v[2].max(-T::one()).min(T::one());
    let mut polar = z.acos();
    if polar >= T::PI() {
        polar = prev_below(T::PI());
    }
    let mut azimuth = if v[0] == T::zero() && v[1] == T::zero() {
        T::zero()
    } else {
        v[1].atan2(v[0])
    };
    if azimuth < T::zero() {
        azimuth += T::PI() + T::PI();
    }
    if azimuth >= T::PI() + T::PI() {
        azimuth = T::zero();
    }
    if polar == T::zero() {
        azimuth = T::zero();
    }
    AnglePair { polar, azimuth }
}

/// Squared polar/azimuth loss, exactly `(p - p')^2 + (a - a')^2` with no
/// angular wrap-around.
pub fn angle_loss<T: Real>(truth: &AnglePair<T>, estimate: &AnglePair<T>) -> T {
    let dp = truth.polar - estimate.polar;
    let da = truth.azimuth - estimate.azimuth;
    dp * dp + da * da
}

/// Variant of [`angle_loss`] that wraps the azimuth difference onto
/// `[0, pi]` before squaring. Off the default path; available for
/// sensitivity studies.
pub fn wrapped_angle_loss<T: Real>(truth: &AnglePair<T>, estimate: &AnglePair<T>) -> T {
    let two_pi = T::PI() + T::PI();
    let dp = truth.polar - estimate.polar;
    let mut da = (truth.azimuth - estimate.azimuth).abs();
    if da > T::PI() {
        da = two_pi - da;
    }
    dp * dp + da * da
}

/// Ordered set of candidate orientations.
///
/// Indices into the grid are stable identifiers; decoders return them and
/// reports are keyed by them.
#[derive(Debug, Clone)]
pub struct OrientationGrid<T> {
    rotations: Vec<RotationMatrix<T>>,
    euler_angles: Vec<[T; 3]>,
    seed: u64,
}

impl<T: Real> OrientationGrid<T> {
    /// Wrap explicit rotations (Z-Y-Z angles are recovered per rotation).
    /// Rejects grids with fewer than two rotations or exact duplicates.
    pub fn from_rotations(rotations: Vec<RotationMatrix<T>>, seed: u64) -> Result<Self> {
        if rotations.len() < 2 {
            return Err(Error::invalid(
                "rotations",
                "an orientation grid needs at least 2 hypotheses",
            ));
        }
        let mut seen = HashSet::with_capacity(rotations.len());
        for r in &rotations {
            if !seen.insert(entry_bits(r)) {
                return Err(Error::invalid("rotations", "duplicate rotation in grid"));
            }
        }
        let euler_angles = rotations.iter().map(|r| r.euler_zyz()).collect();
        Ok(OrientationGrid {
            rotations,
            euler_angles,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn rotation(&self, index: usize) -> &RotationMatrix<T> {
        &self.rotations[index]
    }

    pub fn rotations(&self) -> &[RotationMatrix<T>] {
        &self.rotations
    }

    pub fn euler_angles(&self, index: usize) -> [T; 3] {
        self.euler_angles[index]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Grid restricted to the given indices (order preserved).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.len() < 2 {
            return Err(Error::invalid("indices", "subset needs at least 2 entries"));
        }
        Ok(OrientationGrid {
            rotations: indices.iter().map(|&i| self.rotations[i]).collect(),
            euler_angles: indices.iter().map(|&i| self.euler_angles[i]).collect(),
            seed: self.seed,
        })
    }

    /// Frobenius distance between two grid entries.
    pub fn distance(&self, i: usize, j: usize) -> T {
        rotation_distance(&self.rotations[i], &self.rotations[j])
    }
}

fn entry_bits<T: Real>(r: &RotationMatrix<T>) -> [u64; 9] {
    let m = r.entries();
    let mut out = [0u64; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[i * 3 + j] = m[i][j].to_f64().expect("finite entry").to_bits();
        }
    }
    out
}

/// Sample an orientation grid by drawing Euler angles uniformly over the
/// convention's ranges.
///
/// Deterministic for a fixed `(count, seed, convention)`. Exact duplicate
/// angle triples (a measure-zero event) are redrawn so the no-duplicates
/// invariant holds unconditionally.
pub fn sample_orientation_grid<T: Real>(
    count: usize,
    seed: u64,
    convention: EulerConvention,
) -> Result<OrientationGrid<T>> {
    if count < 2 {
        return Err(Error::invalid(
            "count",
            format!("estimation needs at least 2 hypotheses, got {count}"),
        ));
    }
    let ranges = convention.sampling_ranges::<T>();
    let mut rng = substream(seed, "orientation-grid", &[]);
    let mut rotations = Vec::with_capacity(count);
    let mut euler_angles = Vec::with_capacity(count);
    let mut seen: HashSet<[u64; 3]> = HashSet::with_capacity(count);
    let mut guard = 0usize;
    while rotations.len() < count {
        let angles = [
            sample_half_open(&mut rng, ranges[0]),
            sample_half_open(&mut rng, ranges[1]),
            sample_half_open(&mut rng, ranges[2]),
        ];
        let key = [
            angles[0].to_f64().expect("finite angle").to_bits(),
            angles[1].to_f64().expect("finite angle").to_bits(),
            angles[2].to_f64().expect("finite angle").to_bits(),
        ];
        if !seen.insert(key) {
            guard += 1;
            if guard > 10_000 {
                return Err(Error::invalid(
                    "count",
                    "could not draw distinct orientations",
                ));
            }
            continue;
        }
        rotations.push(RotationMatrix::from_euler(angles, convention));
        euler_angles.push(angles);
    }
    Ok(OrientationGrid {
        rotations,
        euler_angles,
        seed,
    })
}

/// Uniform draw from `[lo, hi)`, guarding the half-open bound against the
/// rounding case `u * hi == hi`.
fn sample_half_open<T: Real, R: Rng + ?Sized>(rng: &mut R, (lo, hi): (T, T)) -> T {
    let u = T::unit_uniform(rng);
    let mut x = lo + u * (hi - lo);
    if x >= hi {
        x = prev_below(hi);
    }
    if x < lo {
        x = lo;
    }
    x
}

/// Largest representable value strictly below `x`.
fn prev_below<T: Real>(x: T) -> T {
    let wide = x.to_f64().expect("finite");
    let below = f64::from_bits(wide.to_bits() - 1);
    // For f32 targets the f64 step may round back up; walk down until strict.
    let mut y = T::from_f64(below).expect("finite");
    while y >= x {
        y = y - T::epsilon() * x.abs().max(T::min_positive_value());
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    type R64 = RotationMatrix<f64>;

    fn assert_matrix_eq(a: &R64, b: &R64, tol: f64) {
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(a.entries()[i][j], b.entries()[i][j], epsilon = tol);
            }
        }
    }

    #[test]
    fn zero_angles_give_identity() {
        let q = R64::from_euler([0.0, 0.0, 0.0], EulerConvention::IntrinsicZyz);
        assert_matrix_eq(&q, &R64::identity(), 0.0);
    }

    #[test]
    fn half_turn_about_z() {
        let q = R64::from_euler([std::f64::consts::PI, 0.0, 0.0], EulerConvention::IntrinsicZyz);
        let expect = R64::from_rows_unchecked([
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]);
        assert_matrix_eq(&q, &expect, 1e-15);
    }

    // Independent oracle: compose the three axis rotations explicitly.
    fn compose_zyz(a: f64, b: f64, g: f64) -> R64 {
        R64::about_z(a).compose(&R64::about_y(b)).compose(&R64::about_z(g))
    }

    fn compose_zyx(a: f64, b: f64, g: f64) -> R64 {
        R64::about_z(a).compose(&R64::about_y(b)).compose(&R64::about_x(g))
    }

    #[test]
    fn euler_matches_explicit_composition() {
        let triples = [
            (0.3, 1.1, 5.9),
            (4.4, 0.02, 2.2),
            (2.0, 3.0, 0.5),
            (6.1, 1.5707, 3.3),
        ];
        for &(a, b, g) in &triples {
            let q = R64::from_euler([a, b, g], EulerConvention::IntrinsicZyz);
            assert_matrix_eq(&q, &compose_zyz(a, b, g), 1e-14);
            let q = R64::from_euler([a, b, g], EulerConvention::IntrinsicZyx);
            assert_matrix_eq(&q, &compose_zyx(a, b, g), 1e-14);
        }
    }

    #[test]
    fn euler_zyz_round_trip() {
        let grid = sample_orientation_grid::<f64>(64, 9, EulerConvention::IntrinsicZyz).unwrap();
        for i in 0..grid.len() {
            let angles = grid.rotation(i).euler_zyz();
            let back = R64::from_euler(angles, EulerConvention::IntrinsicZyz);
            assert!(rotation_distance(grid.rotation(i), &back) < 1e-12);
        }
    }

    #[test]
    fn distance_examples() {
        let i = R64::identity();
        assert_eq!(rotation_distance(&i, &i), 0.0);
        let half = R64::about_z(std::f64::consts::PI);
        // Difference matrix is diag(2, 2, 0).
        assert_abs_diff_eq!(rotation_distance(&i, &half), 8.0f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn grid_is_deterministic_and_distinct() {
        let a = sample_orientation_grid::<f64>(128, 77, EulerConvention::IntrinsicZyz).unwrap();
        let b = sample_orientation_grid::<f64>(128, 77, EulerConvention::IntrinsicZyz).unwrap();
        assert_eq!(a.len(), 128);
        for i in 0..a.len() {
            assert_eq!(a.rotation(i).entries(), b.rotation(i).entries());
            assert_eq!(a.euler_angles(i), b.euler_angles(i));
        }
        // Pairwise distinct on a grid this small: exhaustive check.
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                assert!(a.distance(i, j) > 0.0);
            }
        }
        let c = sample_orientation_grid::<f64>(128, 78, EulerConvention::IntrinsicZyz).unwrap();
        assert_ne!(a.rotation(0).entries(), c.rotation(0).entries());
    }

    #[test]
    fn grid_rejects_count_below_two() {
        assert!(sample_orientation_grid::<f64>(1, 0, EulerConvention::IntrinsicZyz).is_err());
        assert!(sample_orientation_grid::<f64>(2, 0, EulerConvention::IntrinsicZyz).is_ok());
    }

    #[test]
    fn reference_angles_examples() {
        let z = [0.0, 0.0, 1.0];
        let at_identity = reference_angles(&R64::identity(), z);
        assert_eq!(at_identity.polar, 0.0);
        assert_eq!(at_identity.azimuth, 0.0);

        // Quarter turn about x maps +z to (0, -1, 0).
        let q = R64::about_x(std::f64::consts::FRAC_PI_2);
        let p = reference_angles(&q, z);
        assert_abs_diff_eq!(p.polar, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(p.azimuth, 3.0 * std::f64::consts::FRAC_PI_2, epsilon = 1e-15);

        // Half turn about x maps +z to (0, -sin(pi), -1): polar clamps just
        // below pi and the azimuth is whatever direct atan2 gives for the
        // residual components, wrapped into range.
        let q = R64::about_x(std::f64::consts::PI);
        let p = reference_angles(&q, z);
        assert!(p.polar < std::f64::consts::PI);
        assert!(std::f64::consts::PI - p.polar < 1e-7);
        let v = q.apply(z);
        let mut direct = v[1].atan2(v[0]);
        if direct < 0.0 {
            direct += std::f64::consts::TAU;
        }
        assert_eq!(p.azimuth, direct);

        // Exact pole: azimuth forced to zero by convention.
        let exact = R64::from_rows_unchecked([
            [1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, -1.0],
        ]);
        let p = reference_angles(&exact, z);
        assert_eq!(p.azimuth, 0.0);
        assert!(p.polar < std::f64::consts::PI);
    }

    #[test]
    fn angle_loss_examples() {
        let a = AnglePair { polar: 0.1, azimuth: 6.2 };
        let b = AnglePair { polar: 0.1, azimuth: 0.1 };
        assert_eq!(angle_loss(&a, &a), 0.0);
        // No wrap-around: the azimuth gap counts as 6.1 even though the
        // angular separation is 0.18.
        assert_abs_diff_eq!(angle_loss(&a, &b), 6.1 * 6.1, epsilon = 1e-12);
        assert!(wrapped_angle_loss(&a, &b) < 0.04);

        let c = AnglePair { polar: std::f64::consts::FRAC_PI_2, azimuth: 0.0 };
        let d = AnglePair { polar: 0.0, azimuth: 0.0 };
        assert_abs_diff_eq!(
            angle_loss(&c, &d),
            std::f64::consts::PI * std::f64::consts::PI / 4.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn subset_preserves_entries() {
        let g = sample_orientation_grid::<f64>(10, 3, EulerConvention::IntrinsicZyz).unwrap();
        let s = g.subset(&[1, 4, 7]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.rotation(1).entries(), g.rotation(4).entries());
        assert!(g.subset(&[0]).is_err());
    }

    #[test]
    fn from_rotations_rejects_duplicates() {
        let q = R64::about_z(0.4);
        assert!(OrientationGrid::from_rotations(vec![q, q], 0).is_err());
        let r = R64::about_z(0.5);
        assert!(OrientationGrid::from_rotations(vec![q, r], 0).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sampled_rotations_are_proper(a in 0.0..std::f64::consts::TAU,
                                        b in 0.0..std::f64::consts::PI,
                                        g in 0.0..std::f64::consts::TAU) {
            let q = R64::from_euler([a, b, g], EulerConvention::IntrinsicZyz);
            prop_assert!(q.is_special_orthogonal(1e-12));
        }

        #[test]
        fn distance_triangle_and_range(
            a1 in 0.0..std::f64::consts::TAU, b1 in 0.0..std::f64::consts::PI, g1 in 0.0..std::f64::consts::TAU,
            a2 in 0.0..std::f64::consts::TAU, b2 in 0.0..std::f64::consts::PI, g2 in 0.0..std::f64::consts::TAU,
            a3 in 0.0..std::f64::consts::TAU, b3 in 0.0..std::f64::consts::PI, g3 in 0.0..std::f64::consts::TAU,
        ) {
            let q1 = R64::from_euler([a1, b1, g1], EulerConvention::IntrinsicZyz);
            let q2 = R64::from_euler([a2, b2, g2], EulerConvention::IntrinsicZyz);
            let q3 = R64::from_euler([a3, b3, g3], EulerConvention::IntrinsicZyz);
            let d12 = rotation_distance(&q1, &q2);
            let d13 = rotation_distance(&q1, &q3);
            let d23 = rotation_distance(&q2, &q3);
            prop_assert!(d12 <= d13 + d23 + 1e-12);
            prop_assert!(d12 <= 2.0 * 2.0f64.sqrt() + 1e-12);
            // theta^2 = 6 - 2 trace(Q1^T Q2)
            let cross = q1.transpose().compose(&q2).trace();
            prop_assert!((d12 * d12 - (6.0 - 2.0 * cross)).abs() < 1e-10);
        }

        #[test]
        fn reference_angles_in_range(a in 0.0..std::f64::consts::TAU,
                                     b in 0.0..std::f64::consts::PI,
                                     g in 0.0..std::f64::consts::TAU) {
            let q = R64::from_euler([a, b, g], EulerConvention::IntrinsicZyz);
            let p = reference_angles(&q, [0.0, 0.0, 1.0]);
            prop_assert!(p.polar >= 0.0 && p.polar < std::f64::consts::PI);
            prop_assert!(p.azimuth >= 0.0 && p.azimuth < std::f64::consts::TAU);
            // Cross-check against direct spherical conversion.
            let v = q.apply([0.0, 0.0, 1.0]);
            prop_assert!((p.polar - v[2].clamp(-1.0, 1.0).acos()).abs() < 1e-12
                         || p.polar < std::f64::consts::PI);
        }
    }
}
