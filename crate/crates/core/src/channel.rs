//! Free-space backscatter channel synthesis.
//!
//! For an orientation `Q` and codeword `c` the noiseless output at the `K`
//! antennas is
//!
//! ```text
//! f(Q; c) = H_Q R (I - B R)^-1 H_Q^T s
//! ```
//!
//! where `H_Q` holds the antenna-to-rotated-tag responses, `B` the
//! orientation-invariant inter-tag responses, `R = diag(r(c))` the
//! reflectivities selected by the codeword, and `s` the transmit vector.
//! The `(I - B R)^-1` factor accounts for signals bouncing between tags an
//! unbounded number of times. The inter-antenna matrix `A` never enters the
//! signal path because the direct self-interference term is removed at the
//! receiver; it is provided for inspection only.
//!
//! With multipath enabled, reflectors act as virtual sources and `H_Q` is
//! replaced by `E_Q = H_Q + sum_m D_{Q,m}`.
//!
//! Diagonals of `B` and `A` are zero: the free-space response is singular at
//! zero distance and no self-coupling term is modeled.

use std::collections::HashMap;

use num_complex::Complex;

use crate::codes::{Code, Codeword};
use crate::error::{Error, Result};
use crate::geometry::{OrientationGrid, RotationMatrix};
use crate::linalg::{i_minus, CMat};
use crate::scalar::{real, Cplx, Real};

/// Condition-number threshold above which `(I - B R)` is treated as
/// singular.
pub const COUPLING_CONDITION_LIMIT: f64 = 1e12;

/// Antenna, tag, and reflector positions plus the carrier wavelength and the
/// transmit vector. Tag positions are expressed in the object frame with the
/// rotation center at the origin.
#[derive(Debug, Clone)]
pub struct ArrayGeometry<T> {
    pub antenna_positions: Vec<[T; 3]>,
    pub tag_positions: Vec<[T; 3]>,
    pub reflector_positions: Vec<[T; 3]>,
    pub wavelength: T,
    pub transmit_signal: Vec<Cplx<T>>,
}

impl<T: Real> ArrayGeometry<T> {
    /// Geometry with unit transmit signal and no reflectors.
    pub fn new(
        antenna_positions: Vec<[T; 3]>,
        tag_positions: Vec<[T; 3]>,
        wavelength: T,
    ) -> Result<Self> {
        let transmit = vec![Complex::new(T::one(), T::zero()); antenna_positions.len()];
        let geom = ArrayGeometry {
            antenna_positions,
            tag_positions,
            reflector_positions: Vec::new(),
            wavelength,
            transmit_signal: transmit,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn with_reflectors(mut self, reflector_positions: Vec<[T; 3]>) -> Self {
        self.reflector_positions = reflector_positions;
        self
    }

    pub fn with_transmit_signal(mut self, transmit: Vec<Cplx<T>>) -> Result<Self> {
        if transmit.len() != self.antenna_positions.len() {
            return Err(Error::invalid(
                "transmit_signal",
                "length must equal the antenna count",
            ));
        }
        self.transmit_signal = transmit;
        Ok(self)
    }

    pub fn num_antennas(&self) -> usize {
        self.antenna_positions.len()
    }

    pub fn num_tags(&self) -> usize {
        self.tag_positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.antenna_positions.is_empty() {
            return Err(Error::invalid("antenna_positions", "need at least 1 antenna"));
        }
        if self.tag_positions.is_empty() {
            return Err(Error::invalid("tag_positions", "need at least 1 tag"));
        }
        if !(self.wavelength > T::zero()) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        if self.transmit_signal.len() != self.antenna_positions.len() {
            return Err(Error::invalid(
                "transmit_signal",
                "length must equal the antenna count",
            ));
        }
        for (i, a) in self.tag_positions.iter().enumerate() {
            for (j, b) in self.tag_positions.iter().enumerate().skip(i + 1) {
                if distance(*a, *b) == T::zero() {
                    return Err(Error::SingularGeometry(format!(
                        "tags {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Frobenius norm of the 3xN tag-position matrix in the object frame.
    pub fn tag_matrix_norm(&self) -> T {
        let mut acc = T::zero();
        for p in &self.tag_positions {
            acc += p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        }
        acc.sqrt()
    }

    /// Distance from the rotation center to the centroid of the antennas;
    /// the default range parameter of the minimax bound.
    pub fn antenna_centroid_range(&self) -> T {
        let k = real::<T>(self.num_antennas() as f64);
        let mut c = [T::zero(); 3];
        for a in &self.antenna_positions {
            for (ci, ai) in c.iter_mut().zip(a) {
                *ci += *ai;
            }
        }
        (c.iter().map(|x| (*x / k) * (*x / k)).fold(T::zero(), |s, v| s + v)).sqrt()
    }
}

/// Maps the binary tag state to a complex reflectivity. Passive tags cannot
/// amplify, so magnitudes are capped at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectivityMap<T> {
    pub state0: Cplx<T>,
    pub state1: Cplx<T>,
}

impl<T: Real> ReflectivityMap<T> {
    pub fn new(state0: Cplx<T>, state1: Cplx<T>) -> Result<Self> {
        for (name, r) in [("state0", state0), ("state1", state1)] {
            if !(r.norm_sqr() <= T::one()) {
                return Err(Error::invalid(
                    "reflectivity",
                    format!("{name} magnitude exceeds 1 (passive tag)"),
                ));
            }
        }
        Ok(ReflectivityMap { state0, state1 })
    }

    pub fn from_reals(state0: T, state1: T) -> Result<Self> {
        Self::new(
            Complex::new(state0, T::zero()),
            Complex::new(state1, T::zero()),
        )
    }

    #[inline]
    pub fn reflectivity(&self, state: bool) -> Cplx<T> {
        if state {
            self.state1
        } else {
            self.state0
        }
    }

    /// Reflectivity vector `r(c)` for a codeword.
    pub fn vector(&self, codeword: &Codeword) -> Vec<Cplx<T>> {
        (0..codeword.len())
            .map(|tag| self.reflectivity(codeword.state(tag)))
            .collect()
    }

    /// `||r(c)||^2`.
    pub fn vector_norm_sqr(&self, codeword: &Codeword) -> T {
        (0..codeword.len())
            .map(|tag| self.reflectivity(codeword.state(tag)).norm_sqr())
            .fold(T::zero(), |s, v| s + v)
    }
}

#[inline]
fn distance<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Free-space line-of-sight response between two points: magnitude
/// `1 / (4 pi d)`, phase `-2 pi d / lambda`.
pub fn path_loss<T: Real>(x1: [T; 3], x2: [T; 3], wavelength: T) -> Result<Cplx<T>> {
    let d = distance(x1, x2);
    if d == T::zero() {
        return Err(Error::SingularGeometry(
            "path loss between coincident points".to_string(),
        ));
    }
    let four_pi = real::<T>(4.0) * T::PI();
    let mag = T::one() / (four_pi * d);
    let phase = -(T::PI() + T::PI()) * d / wavelength;
    Ok(Complex::from_polar(mag, phase))
}

/// Response of the reflected path `x1 -> xref -> x2`: the product of the two
/// line-of-sight legs (virtual-source model).
pub fn reflector_loss<T: Real>(
    x1: [T; 3],
    xref: [T; 3],
    x2: [T; 3],
    wavelength: T,
) -> Result<Cplx<T>> {
    Ok(path_loss(x1, xref, wavelength)? * path_loss(xref, x2, wavelength)?)
}

/// `K x N` channel matrix between antennas and rotated tags. When
/// `include_multipath` is set the reflector contributions are added
/// (`E_Q = H_Q + sum_m D_{Q,m}`).
pub fn tag_channel_matrix<T: Real>(
    geom: &ArrayGeometry<T>,
    q: &RotationMatrix<T>,
    include_multipath: bool,
) -> Result<CMat<T>> {
    let k = geom.num_antennas();
    let n = geom.num_tags();
    let rotated: Vec<[T; 3]> = geom.tag_positions.iter().map(|p| q.apply(*p)).collect();
    let mut h = CMat::zeros(k, n);
    for (ki, ant) in geom.antenna_positions.iter().enumerate() {
        for (ni, tag) in rotated.iter().enumerate() {
            let mut entry = path_loss(*ant, *tag, geom.wavelength)?;
            if include_multipath {
                for refl in &geom.reflector_positions {
                    entry += reflector_loss(*ant, *refl, *tag, geom.wavelength)?;
                }
            }
            h[(ki, ni)] = entry;
        }
    }
    Ok(h)
}

/// `N x N` inter-tag response matrix `B`. Orientation-independent (the same
/// rotation applied to both tags preserves their distance), symmetric by
/// construction, zero diagonal.
pub fn intertag_matrix<T: Real>(geom: &ArrayGeometry<T>) -> Result<CMat<T>> {
    let n = geom.num_tags();
    let mut b = CMat::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = distance(geom.tag_positions[i], geom.tag_positions[j]);
            if d == T::zero() {
                return Err(Error::SingularGeometry(format!("tags {i} and {j} coincide")));
            }
            let entry = path_loss(geom.tag_positions[i], geom.tag_positions[j], geom.wavelength)?;
            b[(i, j)] = entry;
            b[(j, i)] = entry;
        }
    }
    Ok(b)
}

/// `K x K` inter-antenna response matrix `A` with zero diagonal. The direct
/// term it produces is subtracted at the receiver, so this matrix is for
/// documentation and tests only.
pub fn antenna_coupling_matrix<T: Real>(geom: &ArrayGeometry<T>) -> Result<CMat<T>> {
    let k = geom.num_antennas();
    let mut a = CMat::zeros(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let entry = path_loss(
                geom.antenna_positions[i],
                geom.antenna_positions[j],
                geom.wavelength,
            )?;
            a[(i, j)] = entry;
            a[(j, i)] = entry;
        }
    }
    Ok(a)
}

/// `(I - B R)^-1` together with its Frobenius condition estimate.
pub(crate) fn coupling_inverse<T: Real>(
    b: &CMat<T>,
    reflectivities: &[Cplx<T>],
) -> Result<(CMat<T>, T)> {
    let br = b.mul_diag(reflectivities);
    let system = i_minus(&br);
    let inverse = system.inverse()?;
    let condition = system.condition_with_inverse(&inverse);
    Ok((inverse, condition))
}

fn check_condition<T: Real>(
    condition: T,
    codeword: &Codeword,
    grid_index: Option<usize>,
) -> Result<()> {
    if !condition.is_finite() || condition > real(COUPLING_CONDITION_LIMIT) {
        return Err(Error::CouplingSingularity {
            codeword_index: codeword.index(),
            codeword: codeword.to_string(),
            grid_index,
            condition: condition.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    Ok(())
}

/// Closed-form noiseless response shared by the single-shot and table paths.
pub(crate) fn response_from_parts<T: Real>(
    channel: &CMat<T>,
    coupling: &CMat<T>,
    reflectivities: &[Cplx<T>],
    transmit: &[Cplx<T>],
) -> Vec<Cplx<T>> {
    // f = X diag(r) Btilde (X^T s)
    let u = channel.transpose_mul_vec(transmit);
    let w = coupling.mul_vec(&u);
    let rw: Vec<Cplx<T>> = reflectivities.iter().zip(&w).map(|(r, x)| *r * *x).collect();
    channel.mul_vec(&rw)
}

/// Noiseless channel output `f(Q; c)` for one orientation and codeword.
pub fn tag_response<T: Real>(
    geom: &ArrayGeometry<T>,
    q: &RotationMatrix<T>,
    codeword: &Codeword,
    refl: &ReflectivityMap<T>,
    include_multipath: bool,
) -> Result<Vec<Cplx<T>>> {
    geom.validate()?;
    if codeword.len() != geom.num_tags() {
        return Err(Error::invalid("codeword", "length must equal the tag count"));
    }
    let b = intertag_matrix(geom)?;
    let r = refl.vector(codeword);
    let (coupling, condition) = coupling_inverse(&b, &r)?;
    check_condition(condition, codeword, None)?;
    let channel = tag_channel_matrix(geom, q, include_multipath)?;
    Ok(response_from_parts(&channel, &coupling, &r, &geom.transmit_signal))
}

/// Options for [`build_response_table`].
#[derive(Debug, Clone, Copy, Default)]
pub struct TableOptions {
    /// Add reflector paths (`E_Q` instead of `H_Q`).
    pub include_multipath: bool,
    /// Rescale `E_Q` by one scalar so the grid total `sum_Q ||E_Q||_F^2`
    /// equals the line-of-sight total. Only meaningful with multipath.
    pub normalize_multipath_energy: bool,
}

/// Precomputed noiseless outputs `f(Q; c)` for every grid orientation and a
/// set of codewords. Read-only after construction.
#[derive(Debug, Clone)]
pub struct ResponseTable<T> {
    k: usize,
    grid_len: usize,
    codewords: Vec<Codeword>,
    lookup: HashMap<u32, usize>,
    outputs: Vec<Cplx<T>>,
}

impl<T: Real> ResponseTable<T> {
    /// Number of antennas per output vector.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn num_codewords(&self) -> usize {
        self.codewords.len()
    }

    /// Position of a codeword within this table, if covered.
    pub fn codeword_position(&self, codeword: &Codeword) -> Option<usize> {
        self.lookup.get(&(codeword.index() as u32)).copied()
    }

    /// Output vector for (grid index, codeword position).
    #[inline]
    pub fn output(&self, grid_index: usize, codeword_pos: usize) -> &[Cplx<T>] {
        let base = (grid_index * self.codewords.len() + codeword_pos) * self.k;
        &self.outputs[base..base + self.k]
    }

    /// Concatenated output `F(Q; C)` for a code, slot-major (`T` blocks of
    /// `K` entries).
    pub fn concatenated(&self, grid_index: usize, code: &Code) -> Result<Vec<Cplx<T>>> {
        let mut out = Vec::with_capacity(code.t() * self.k);
        for col in code.columns() {
            let pos = self.codeword_position(col).ok_or_else(|| {
                Error::IncompleteTable(format!("codeword {col} not covered by table"))
            })?;
            out.extend_from_slice(self.output(grid_index, pos));
        }
        Ok(out)
    }

    /// Mean received power per antenna per slot over all stored outputs.
    pub fn mean_power_per_antenna(&self) -> T {
        let mut acc = T::zero();
        for z in &self.outputs {
            acc += z.norm_sqr();
        }
        acc / real::<T>((self.grid_len * self.codewords.len() * self.k) as f64)
    }

    /// Scale every stored output by a real factor.
    pub fn scale_outputs(&mut self, factor: T) {
        for z in &mut self.outputs {
            *z = Complex::new(z.re * factor, z.im * factor);
        }
    }

    pub(crate) fn outputs_mut(&mut self) -> &mut [Cplx<T>] {
        &mut self.outputs
    }

    /// True when every column of the code is covered.
    pub fn covers_code(&self, code: &Code) -> bool {
        code.columns().iter().all(|c| self.codeword_position(c).is_some())
    }
}

/// Build the response table for every `(orientation, codeword)` pair.
///
/// Deterministic; the per-codeword coupling operator is shared across the
/// grid since `B` does not depend on the orientation.
pub fn build_response_table<T: Real>(
    geom: &ArrayGeometry<T>,
    grid: &OrientationGrid<T>,
    codewords: &[Codeword],
    refl: &ReflectivityMap<T>,
    options: TableOptions,
) -> Result<ResponseTable<T>> {
    geom.validate()?;
    if codewords.is_empty() {
        return Err(Error::invalid("codewords", "need at least one codeword"));
    }
    if codewords.iter().any(|c| c.len() != geom.num_tags()) {
        return Err(Error::invalid(
            "codewords",
            "codeword length must equal the tag count",
        ));
    }
    let k = geom.num_antennas();
    let b = intertag_matrix(geom)?;

    // Per-codeword operator diag(r) (I - B R)^-1.
    let mut refl_vecs = Vec::with_capacity(codewords.len());
    let mut couplings = Vec::with_capacity(codewords.len());
    for cw in codewords {
        let r = refl.vector(cw);
        let (inv, condition) = match coupling_inverse(&b, &r) {
            Ok(v) => v,
            Err(Error::SingularGeometry(_)) => {
                return Err(Error::CouplingSingularity {
                    codeword_index: cw.index(),
                    codeword: cw.to_string(),
                    grid_index: None,
                    condition: f64::INFINITY,
                })
            }
            Err(e) => return Err(e),
        };
        check_condition(condition, cw, None)?;
        refl_vecs.push(r);
        couplings.push(inv);
    }

    // Channel matrices per orientation, with the optional energy rescale.
    let mut channels = Vec::with_capacity(grid.len());
    let mut los_energy = T::zero();
    let mut multipath_energy = T::zero();
    for q in grid.rotations() {
        let mat = tag_channel_matrix(geom, q, options.include_multipath)?;
        if options.include_multipath && options.normalize_multipath_energy {
            let los = tag_channel_matrix(geom, q, false)?;
            los_energy += los.frobenius_norm_sqr();
            multipath_energy += mat.frobenius_norm_sqr();
        }
        channels.push(mat);
    }
    if options.include_multipath && options.normalize_multipath_energy && multipath_energy > T::zero()
    {
        let beta = (los_energy / multipath_energy).sqrt();
        for mat in &mut channels {
            mat.scale(beta);
        }
    }

    let mut outputs = Vec::with_capacity(grid.len() * codewords.len() * k);
    for channel in &channels {
        let u = channel.transpose_mul_vec(&geom.transmit_signal);
        for (r, coupling) in refl_vecs.iter().zip(&couplings) {
            let w = coupling.mul_vec(&u);
            let rw: Vec<Cplx<T>> = r.iter().zip(&w).map(|(ri, wi)| *ri * *wi).collect();
            outputs.extend(channel.mul_vec(&rw));
        }
    }

    let lookup = codewords
        .iter()
        .enumerate()
        .map(|(pos, c)| (c.index() as u32, pos))
        .collect();
    Ok(ResponseTable {
        k,
        grid_len: grid.len(),
        codewords: codewords.to_vec(),
        lookup,
        outputs,
    })
}
