//! Analytic design criteria.
//!
//! Three quantities drive code design and analysis:
//!
//! * `U(pi)` — an upper bound on the average estimation error built from
//!   pairwise complementary-error-function terms;
//! * `V(pi)` — a lower bound on the worst-case error obtained from a
//!   two-point argument with Pinsker's inequality;
//! * the closed-form minimax bound relating the worst-case error to the
//!   system parameters (antenna count, wavelength, noise level, range, tag
//!   layout, coupling, and reflectivity energy).
//!
//! `U` and `V` depend on the channel only through per-pair, per-codeword
//! squared output distances, which are precomputed once into a
//! [`PairDistanceTable`] and then reused across proportion vectors. The `g`
//! entries are *squared* norms, which is the reading under which the direct
//! forms over `F(Q;C)` and the proportion forms coincide exactly.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::channel::{
    coupling_inverse, intertag_matrix, ArrayGeometry, ReflectivityMap, ResponseTable,
};
use crate::codes::{Code, ProportionVector};
use crate::error::{Error, Result};
use crate::geometry::OrientationGrid;
use crate::linalg::vec_dist_sqr;
use crate::scalar::{real, Real};

/// Pairwise squared output distances and rotation distances for a grid.
///
/// Pairs are stored once with `i < j`; `U`'s ordered double sum counts each
/// stored pair twice, and self-pairs contribute nothing since `theta = 0`.
#[derive(Debug, Clone)]
pub struct PairDistanceTable<T> {
    n: usize,
    m: usize,
    pairs: Vec<(u32, u32)>,
    theta: Vec<T>,
    g: Vec<T>,
}

impl<T: Real> PairDistanceTable<T> {
    /// Tag count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Codeword count `M = 2^N`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, p: usize) -> (usize, usize) {
        let (i, j) = self.pairs[p];
        (i as usize, j as usize)
    }

    pub fn theta(&self, p: usize) -> T {
        self.theta[p]
    }

    /// Squared per-codeword output distances for pair `p` (length `M`).
    pub fn g_row(&self, p: usize) -> &[T] {
        &self.g[p * self.m..(p + 1) * self.m]
    }

    #[cfg(test)]
    pub(crate) fn g_mut(&mut self) -> &mut [T] {
        &mut self.g
    }
}

/// Pair-selection policy for [`build_pair_table`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFilter {
    /// Grids up to this size keep every pair (under `Auto`).
    pub full_table_limit: usize,
    /// Pruned mode: per orientation, keep this many nearest neighbors in
    /// output space (all-ones proportion distance).
    pub neighbors: usize,
    /// Pruned mode: also keep this top fraction of pairs by rotation
    /// distance.
    pub theta_keep_fraction: f64,
    pub mode: PairFilterMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairFilterMode {
    /// Full when the grid is small, pruned otherwise.
    Auto,
    Full,
    Pruned,
}

impl Default for PairFilter {
    fn default() -> Self {
        PairFilter {
            full_table_limit: 600,
            neighbors: 50,
            theta_keep_fraction: 0.01,
            mode: PairFilterMode::Auto,
        }
    }
}

/// Build the pair table from a response table covering all `2^N` codewords
/// in canonical order.
pub fn build_pair_table<T: Real>(
    table: &ResponseTable<T>,
    grid: &OrientationGrid<T>,
    filter: &PairFilter,
) -> Result<PairDistanceTable<T>> {
    if table.grid_len() != grid.len() {
        return Err(Error::IncompleteTable(format!(
            "table covers {} orientations, grid has {}",
            table.grid_len(),
            grid.len()
        )));
    }
    let m = table.num_codewords();
    if !m.is_power_of_two() || m < 2 {
        return Err(Error::IncompleteTable(
            "table must cover all 2^N codewords".to_string(),
        ));
    }
    let n = m.trailing_zeros() as usize;
    for (pos, cw) in table.codewords().iter().enumerate() {
        if cw.index() != pos || cw.len() != n {
            return Err(Error::IncompleteTable(
                "table codewords must be the canonical enumeration".to_string(),
            ));
        }
    }

    let g_len = grid.len();
    let full = match filter.mode {
        PairFilterMode::Full => true,
        PairFilterMode::Pruned => false,
        PairFilterMode::Auto => g_len <= filter.full_table_limit,
    };

    let selected: Vec<(u32, u32)> = if full {
        let mut all = Vec::with_capacity(g_len * (g_len - 1) / 2);
        for i in 0..g_len {
            for j in i + 1..g_len {
                all.push((i as u32, j as u32));
            }
        }
        all
    } else {
        pruned_pairs(table, grid, filter)
    };

    let mut theta = Vec::with_capacity(selected.len());
    let mut g = Vec::with_capacity(selected.len() * m);
    for &(i, j) in &selected {
        let (i, j) = (i as usize, j as usize);
        theta.push(grid.distance(i, j));
        for pos in 0..m {
            g.push(vec_dist_sqr(table.output(i, pos), table.output(j, pos)));
        }
    }
    Ok(PairDistanceTable {
        n,
        m,
        pairs: selected,
        theta,
        g,
    })
}

/// Neighbor + large-theta pair selection for big grids. The binding pairs of
/// both criteria have small output distance, so per orientation we keep the
/// `neighbors` closest grid points under the all-ones proportion distance
/// (the squared distance between full per-codeword output stacks), plus the
/// global top `theta_keep_fraction` of pairs by rotation distance.
fn pruned_pairs<T: Real>(
    table: &ResponseTable<T>,
    grid: &OrientationGrid<T>,
    filter: &PairFilter,
) -> Vec<(u32, u32)> {
    let g_len = grid.len();
    let m = table.num_codewords();

    let stack_dist = |i: usize, j: usize| -> T {
        let mut acc = T::zero();
        for pos in 0..m {
            acc += vec_dist_sqr(table.output(i, pos), table.output(j, pos));
        }
        acc
    };

    let mut keep = std::collections::BTreeSet::new();
    let mut scored: Vec<(T, u32)> = Vec::with_capacity(g_len.saturating_sub(1));
    for i in 0..g_len {
        scored.clear();
        for j in 0..g_len {
            if j != i {
                scored.push((stack_dist(i, j), j as u32));
            }
        }
        let count = filter.neighbors.min(scored.len());
        if count == 0 {
            continue;
        }
        scored.select_nth_unstable_by(count - 1, |a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        });
        for &(_, j) in &scored[..count] {
            let (a, b) = ((i as u32).min(j), (i as u32).max(j));
            keep.insert((a, b));
        }
    }

    if filter.theta_keep_fraction > 0.0 {
        let mut thetas: Vec<(T, u32, u32)> = Vec::with_capacity(g_len * (g_len - 1) / 2);
        for i in 0..g_len {
            for j in i + 1..g_len {
                thetas.push((grid.distance(i, j), i as u32, j as u32));
            }
        }
        let want = ((thetas.len() as f64) * filter.theta_keep_fraction).ceil() as usize;
        let want = want.clamp(1, thetas.len());
        thetas.select_nth_unstable_by(want - 1, |a, b| {
            b.0.partial_cmp(&a.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        for &(_, i, j) in &thetas[..want] {
            keep.insert((i, j));
        }
    }

    keep.into_iter().collect()
}

fn check_sigma<T: Real>(sigma: T) -> Result<()> {
    if !(sigma > T::zero()) {
        return Err(Error::invalid(
            "sigma",
            "noise standard deviation must be positive",
        ));
    }
    Ok(())
}

fn check_pi<T: Real>(pi: &ProportionVector<T>, table: &PairDistanceTable<T>) -> Result<()> {
    if pi.len() != table.m() {
        return Err(Error::invalid(
            "pi",
            format!("length {} does not match table M={}", pi.len(), table.m()),
        ));
    }
    Ok(())
}

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

/// Average-error upper bound
/// `U(pi) = sum_{Q != Q'} erfc(sqrt(T pi^T g / (8 sigma^2))) theta`,
/// with the ordered double sum realized as twice the sum over stored pairs.
pub fn average_upper_bound<T: Real>(
    pi: &ProportionVector<T>,
    t: usize,
    table: &PairDistanceTable<T>,
    sigma: T,
) -> Result<T> {
    check_sigma(sigma)?;
    check_pi(pi, table)?;
    let scale = real::<T>(t as f64) / (real::<T>(8.0) * sigma * sigma);
    let mut acc = T::zero();
    for p in 0..table.num_pairs() {
        let x = dot(pi.weights(), table.g_row(p)) * scale;
        acc += x.sqrt().erfc() * table.theta(p);
    }
    Ok(acc + acc)
}

/// Worst-case lower bound
/// `V(pi) = max over pairs of exp(-T pi^T g / (2 sigma^2)) * theta / 4`.
pub fn worst_lower_bound<T: Real>(
    pi: &ProportionVector<T>,
    t: usize,
    table: &PairDistanceTable<T>,
    sigma: T,
) -> Result<T> {
    check_sigma(sigma)?;
    check_pi(pi, table)?;
    let scale = real::<T>(t as f64) / (real::<T>(2.0) * sigma * sigma);
    let quarter = real::<T>(0.25);
    let mut best = T::zero();
    for p in 0..table.num_pairs() {
        let x = dot(pi.weights(), table.g_row(p)) * scale;
        let v = (-x).exp() * table.theta(p) * quarter;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Direct form of the average-error upper bound over concatenated outputs:
/// `sum_{Q != Q'} erfc(||F(Q;C) - F(Q';C)||_F / (2 sqrt(2) sigma)) theta`.
pub fn average_upper_bound_direct<T: Real>(
    table: &ResponseTable<T>,
    grid: &OrientationGrid<T>,
    code: &Code,
    sigma: T,
) -> Result<T> {
    check_sigma(sigma)?;
    let denom = real::<T>(2.0) * real::<T>(2.0).sqrt() * sigma;
    let mut acc = T::zero();
    for_each_concatenated_pair(table, grid, code, |i, j, d_sqr| {
        acc += (d_sqr.sqrt() / denom).erfc() * grid.distance(i, j);
    })?;
    Ok(acc + acc)
}

/// Direct form of the worst-case lower bound:
/// `max exp(-||F - F'||_F^2 / (2 sigma^2)) theta / 4`.
pub fn worst_lower_bound_direct<T: Real>(
    table: &ResponseTable<T>,
    grid: &OrientationGrid<T>,
    code: &Code,
    sigma: T,
) -> Result<T> {
    check_sigma(sigma)?;
    let two_sigma_sqr = real::<T>(2.0) * sigma * sigma;
    let quarter = real::<T>(0.25);
    let mut best = T::zero();
    for_each_concatenated_pair(table, grid, code, |i, j, d_sqr| {
        let v = (-(d_sqr / two_sigma_sqr)).exp() * grid.distance(i, j) * quarter;
        if v > best {
            best = v;
        }
    })?;
    Ok(best)
}

fn for_each_concatenated_pair<T: Real>(
    table: &ResponseTable<T>,
    grid: &OrientationGrid<T>,
    code: &Code,
    mut visit: impl FnMut(usize, usize, T),
) -> Result<()> {
    if table.grid_len() != grid.len() {
        return Err(Error::IncompleteTable(
            "table/grid length mismatch".to_string(),
        ));
    }
    let counts = code.counts();
    let mut used: Vec<(usize, T)> = Vec::new();
    for (index, &count) in counts.iter().enumerate() {
        if count > 0 {
            let cw = crate::codes::Codeword::from_index(index, code.n())?;
            let pos = table
                .codeword_position(&cw)
                .ok_or_else(|| Error::IncompleteTable(format!("codeword {cw} missing")))?;
            used.push((pos, real::<T>(count as f64)));
        }
    }
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let mut d = T::zero();
            for &(pos, weight) in &used {
                d += weight * vec_dist_sqr(table.output(i, pos), table.output(j, pos));
            }
            visit(i, j, d);
        }
    }
    Ok(())
}

/// Result of the closed-form minimax bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimaxBound<T> {
    /// Lower bound on the worst-case error; infinite when the code carries
    /// no reflectivity energy at all.
    pub value: T,
    /// The separation `delta = sqrt(theta)` at which the two-point bound is
    /// tightest.
    pub optimal_delta: T,
    /// Whether that separation is achievable on SO(3)
    /// (`delta <= (2 sqrt(2))^(1/2)`); when false the bound is still the
    /// formula value but no orientation pair attains the optimizing
    /// separation.
    pub delta_feasible: bool,
}

/// Closed-form worst-case lower bound
/// `32 pi^2 lambda^2 sigma^2 D^4 / (27 K^2 ||X^tag||_F^2 S)` with
/// `S = sum_t ||(I - B R_t)^-1||_F^2 ||r(c_t)||^2` and `D` the approximate
/// range between the rotation center and the antennas.
pub fn minimax_bound<T: Real>(
    geom: &ArrayGeometry<T>,
    code: &Code,
    refl: &ReflectivityMap<T>,
    sigma: T,
    range: T,
) -> Result<MinimaxBound<T>> {
    check_sigma(sigma)?;
    geom.validate()?;
    if !(range > T::zero()) {
        return Err(Error::invalid("range", "must be positive"));
    }
    if code.n() != geom.num_tags() {
        return Err(Error::invalid("code", "tag count mismatch with geometry"));
    }
    let b = intertag_matrix(geom)?;
    let mut coupling_energy = T::zero();
    for (slot, column) in code.columns().iter().enumerate() {
        let r = refl.vector(column);
        let (inv, condition) = coupling_inverse(&b, &r)?;
        if !condition.is_finite() || condition > real(crate::channel::COUPLING_CONDITION_LIMIT) {
            return Err(Error::CouplingSingularity {
                codeword_index: column.index(),
                codeword: column.to_string(),
                grid_index: Some(slot),
                condition: condition.to_f64().unwrap_or(f64::INFINITY),
            });
        }
        coupling_energy += inv.frobenius_norm_sqr() * refl.vector_norm_sqr(column);
    }

    let k = real::<T>(geom.num_antennas() as f64);
    let lambda = geom.wavelength;
    let tag_norm = geom.tag_matrix_norm();
    let pi = T::PI();
    if coupling_energy == T::zero() || tag_norm == T::zero() {
        return Ok(MinimaxBound {
            value: T::infinity(),
            optimal_delta: T::infinity(),
            delta_feasible: false,
        });
    }
    let numerator = real::<T>(32.0)
        * pi
        * pi
        * lambda
        * lambda
        * sigma
        * sigma
        * range
        * range
        * range
        * range;
    let denominator = real::<T>(27.0) * k * k * tag_norm * tag_norm * coupling_energy;
    let value = numerator / denominator;

    // The two-point bound maximizes delta^2/2 (1 - a delta) at
    // delta = 2/(3a); on SO(3) the separation sqrt(theta) cannot exceed
    // (2 sqrt(2))^(1/2).
    let a = k * tag_norm * coupling_energy.sqrt()
        / (real::<T>(4.0) * pi * lambda * sigma * range * range);
    let optimal_delta = real::<T>(2.0) / (real::<T>(3.0) * a);
    let max_delta = (real::<T>(2.0) * real::<T>(2.0).sqrt()).sqrt();
    Ok(MinimaxBound {
        value,
        optimal_delta,
        delta_feasible: optimal_delta <= max_delta,
    })
}

/// Cache key for a stored pair table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairTableKey {
    pub geometry_hash: [u8; 32],
    pub grid_seed: u64,
    pub grid_len: u64,
    pub codeword_count: u32,
}

/// Stable hash of the geometry (positions, wavelength, transmit signal).
pub fn geometry_hash<T: Real>(geom: &ArrayGeometry<T>) -> [u8; 32] {
    fn push<T: Real>(h: &mut Sha256, points: &[[T; 3]]) {
        h.update((points.len() as u64).to_le_bytes());
        for p in points {
            for c in p {
                h.update(
                    c.to_f64()
                        .expect("finite coordinate")
                        .to_bits()
                        .to_le_bytes(),
                );
            }
        }
    }
    let mut h = Sha256::new();
    h.update(b"tagorient.geometry.v1");
    push(&mut h, &geom.antenna_positions);
    push(&mut h, &geom.tag_positions);
    push(&mut h, &geom.reflector_positions);
    h.update(
        geom.wavelength
            .to_f64()
            .expect("finite wavelength")
            .to_bits()
            .to_le_bytes(),
    );
    for s in &geom.transmit_signal {
        h.update(s.re.to_f64().expect("finite").to_bits().to_le_bytes());
        h.update(s.im.to_f64().expect("finite").to_bits().to_le_bytes());
    }
    h.finalize().into()
}

const CACHE_MAGIC: &[u8; 8] = b"TGOPAIR1";
const CACHE_VERSION: u32 = 1;

impl<T: Real> PairDistanceTable<T> {
    /// Write the table to a version-stamped binary container.
    pub fn save(&self, path: &Path, key: &PairTableKey) -> Result<()> {
        let mut buf: Vec<u8> = Vec::with_capacity(72 + self.pairs.len() * (16 + 8 * self.m));
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&key.geometry_hash);
        buf.extend_from_slice(&key.grid_seed.to_le_bytes());
        buf.extend_from_slice(&key.grid_len.to_le_bytes());
        buf.extend_from_slice(&key.codeword_count.to_le_bytes());
        buf.extend_from_slice(&(self.n as u32).to_le_bytes());
        buf.extend_from_slice(&(self.m as u32).to_le_bytes());
        buf.extend_from_slice(&(self.pairs.len() as u64).to_le_bytes());
        for &(i, j) in &self.pairs {
            buf.extend_from_slice(&i.to_le_bytes());
            buf.extend_from_slice(&j.to_le_bytes());
        }
        for v in &self.theta {
            buf.extend_from_slice(&v.to_f64().expect("finite theta").to_bits().to_le_bytes());
        }
        for v in &self.g {
            buf.extend_from_slice(&v.to_f64().expect("finite g").to_bits().to_le_bytes());
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    /// Load a table previously written by [`PairDistanceTable::save`],
    /// verifying the key.
    pub fn load(path: &Path, expected: &PairTableKey) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut r = ByteReader {
            bytes: &bytes,
            cursor: 0,
        };
        if r.take(8)? != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".to_string()));
        }
        let version = r.u32()?;
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported cache version {version}")));
        }
        let mut geometry_hash = [0u8; 32];
        geometry_hash.copy_from_slice(r.take(32)?);
        let found = PairTableKey {
            geometry_hash,
            grid_seed: r.u64()?,
            grid_len: r.u64()?,
            codeword_count: r.u32()?,
        };
        if &found != expected {
            return Err(Error::Cache(
                "cache key mismatch (geometry, grid seed, or codeword set changed)".to_string(),
            ));
        }
        let n = r.u32()? as usize;
        let m = r.u32()? as usize;
        let num_pairs = r.u64()? as usize;
        let mut pairs = Vec::with_capacity(num_pairs);
        for _ in 0..num_pairs {
            let i = r.u32()?;
            let j = r.u32()?;
            pairs.push((i, j));
        }
        let mut theta = Vec::with_capacity(num_pairs);
        for _ in 0..num_pairs {
            theta.push(r.scalar::<T>()?);
        }
        let mut g = Vec::with_capacity(num_pairs * m);
        for _ in 0..num_pairs * m {
            g.push(r.scalar::<T>()?);
        }
        if r.cursor != bytes.len() {
            return Err(Error::Cache("trailing bytes in cache".to_string()));
        }
        Ok(PairDistanceTable {
            n,
            m,
            pairs,
            theta,
            g,
        })
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    cursor: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.cursor + len > self.bytes.len() {
            return Err(Error::Cache("truncated pair-table cache".to_string()));
        }
        let s = &self.bytes[self.cursor..self.cursor + len];
        self.cursor += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn scalar<T: Real>(&mut self) -> Result<T> {
        let bits = self.u64()?;
        T::from_f64(f64::from_bits(bits))
            .ok_or_else(|| Error::Cache("unrepresentable scalar".to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_response_table, TableOptions};
    use crate::codes::{enumerate_codewords, orthogonal_code, proportions_of, Codeword};
    use crate::geometry::{sample_orientation_grid, EulerConvention};
    use crate::seeding::substream;
    use rand::Rng;

    fn bench(
        seed: u64,
        grid_len: usize,
    ) -> (
        ArrayGeometry<f64>,
        OrientationGrid<f64>,
        ResponseTable<f64>,
    ) {
        let mut rng = substream(seed, "criteria-test", &[]);
        let antennas = vec![
            [0.5, 0.5, 4.0],
            [0.5, -0.5, 4.0],
            [-0.5, 0.5, 4.0],
            [-0.5, -0.5, 4.0],
        ];
        let mut tags: Vec<[f64; 3]> = Vec::new();
        while tags.len() < 4 {
            let p = [
                0.5 * (rng.random::<f64>() - 0.5),
                0.5 * (rng.random::<f64>() - 0.5),
                0.5 * (rng.random::<f64>() - 0.5),
            ];
            if tags.iter().all(|q| {
                let d: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                d.sqrt() > 0.1
            }) {
                tags.push(p);
            }
        }
        let geom = ArrayGeometry::new(antennas, tags, 0.005).unwrap();
        let grid = sample_orientation_grid(grid_len, seed, EulerConvention::IntrinsicZyz).unwrap();
        let refl = ReflectivityMap::from_reals(-0.5, 0.5).unwrap();
        let table = build_response_table(
            &geom,
            &grid,
            &enumerate_codewords(4).unwrap(),
            &refl,
            TableOptions::default(),
        )
        .unwrap();
        (geom, grid, table)
    }

    #[test]
    fn two_orientation_grid_has_one_pair() {
        let (_, grid, table) = bench(1, 2);
        let pt = build_pair_table(&table, &grid, &PairFilter::default()).unwrap();
        assert_eq!(pt.num_pairs(), 1);
        assert!(pt.theta(0) > 0.0);
        assert!(pt.g_row(0).iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn pair_count_and_weighted_identity() {
        let (_, grid, table) = bench(2, 8);
        let pt = build_pair_table(&table, &grid, &PairFilter::default()).unwrap();
        assert_eq!(pt.num_pairs(), 8 * 7 / 2);

        // sum_m pi_m g[m] * T equals the concatenated Frobenius distance.
        let code = orthogonal_code(4, 24).unwrap();
        let pi = proportions_of::<f64>(&code);
        for p in 0..pt.num_pairs() {
            let (i, j) = pt.pair(p);
            let weighted: f64 = pi
                .weights()
                .iter()
                .zip(pt.g_row(p))
                .map(|(w, g)| w * g)
                .sum::<f64>()
                * 24.0;
            let fi = table.concatenated(i, &code).unwrap();
            let fj = table.concatenated(j, &code).unwrap();
            let direct = vec_dist_sqr(&fi, &fj);
            assert!((weighted - direct).abs() <= 1e-12 * direct.max(1e-30));
        }
    }

    #[test]
    fn u_and_v_limits_and_monotonicity() {
        let (_, grid, table) = bench(3, 6);
        let pt = build_pair_table(&table, &grid, &PairFilter::default()).unwrap();
        let code = orthogonal_code(4, 24).unwrap();
        let pi = proportions_of::<f64>(&code);

        // Huge sigma: every erfc term tends to erfc(0) = 1, U tends to the
        // ordered sum of thetas.
        let huge = 1e12;
        let u = average_upper_bound(&pi, 24, &pt, huge).unwrap();
        let theta_sum: f64 = (0..pt.num_pairs()).map(|p| pt.theta(p)).sum();
        assert!((u - 2.0 * theta_sum).abs() < 1e-6 * theta_sum);

        // Doubling sigma increases U strictly.
        let u1 = average_upper_bound(&pi, 24, &pt, 0.5).unwrap();
        let u2 = average_upper_bound(&pi, 24, &pt, 1.0).unwrap();
        assert!(u2 > u1);

        // V decreases when every g entry is scaled up (more separation).
        let v1 = worst_lower_bound(&pi, 24, &pt, 0.5).unwrap();
        let mut scaled = pt.clone();
        for v in scaled.g_mut() {
            *v *= 4.0;
        }
        let v2 = worst_lower_bound(&pi, 24, &scaled, 0.5).unwrap();
        assert!(v2 < v1);

        assert!(average_upper_bound(&pi, 24, &pt, 0.0).is_err());
        assert!(worst_lower_bound(&pi, 24, &pt, -1.0).is_err());
    }

    #[test]
    fn v_with_identical_outputs_hits_theta_quarter() {
        let (_, grid, table) = bench(4, 4);
        let mut pt = build_pair_table(&table, &grid, &PairFilter::default()).unwrap();
        let m = pt.m();
        // Force the first pair to zero output distance for every codeword.
        for v in &mut pt.g_mut()[0..m] {
            *v = 0.0;
        }
        let pi = ProportionVector::<f64>::uniform(4).unwrap();
        let v = worst_lower_bound(&pi, 24, &pt, 0.05).unwrap();
        // With tiny sigma all separated pairs decay to ~0; the zeroed pair
        // contributes exactly theta/4.
        assert!((v - pt.theta(0) / 4.0).abs() <= 1e-12 * v.abs().max(1e-30));
    }

    #[test]
    fn pi_form_matches_direct_form() {
        let (_, grid, table) = bench(5, 7);
        let pt = build_pair_table(&table, &grid, &PairFilter::default()).unwrap();
        let mut rng = substream(17, "random-codes", &[]);
        for _ in 0..10 {
            let columns: Vec<Codeword> = (0..24)
                .map(|_| Codeword::from_index(rng.random_range(0..16), 4).unwrap())
                .collect();
            let code = Code::new(columns).unwrap();
            let pi = proportions_of::<f64>(&code);
            for sigma in [0.3, 1.0, 3.0] {
                let u_pi = average_upper_bound(&pi, 24, &pt, sigma).unwrap();
                let u_direct = average_upper_bound_direct(&table, &grid, &code, sigma).unwrap();
                assert!(
                    (u_pi - u_direct).abs() <= 1e-10 * u_direct.abs().max(1e-30),
                    "U mismatch {u_pi} vs {u_direct}"
                );
                let v_pi = worst_lower_bound(&pi, 24, &pt, sigma).unwrap();
                let v_direct = worst_lower_bound_direct(&table, &grid, &code, sigma).unwrap();
                assert!(
                    (v_pi - v_direct).abs() <= 1e-10 * v_direct.abs().max(1e-30),
                    "V mismatch {v_pi} vs {v_direct}"
                );
            }
        }
    }

    #[test]
    fn bounds_invariant_to_column_permutation() {
        let (_, grid, table) = bench(6, 5);
        let pt = build_pair_table(&table, &grid, &PairFilter::default()).unwrap();
        let code = orthogonal_code(4, 8).unwrap();
        let permuted = code.permuted(&[7, 2, 5, 0, 1, 6, 3, 4]).unwrap();
        let pi_a = proportions_of::<f64>(&code);
        let pi_b = proportions_of::<f64>(&permuted);
        assert_eq!(
            average_upper_bound(&pi_a, 8, &pt, 0.7).unwrap(),
            average_upper_bound(&pi_b, 8, &pt, 0.7).unwrap()
        );
        assert_eq!(
            worst_lower_bound(&pi_a, 8, &pt, 0.7).unwrap(),
            worst_lower_bound(&pi_b, 8, &pt, 0.7).unwrap()
        );
    }

    #[test]
    fn pruned_table_keeps_binding_pairs() {
        let (_, grid, table) = bench(7, 60);
        let full = build_pair_table(&table, &grid, &PairFilter::default()).unwrap();
        let pruned = build_pair_table(
            &table,
            &grid,
            &PairFilter {
                neighbors: 10,
                theta_keep_fraction: 0.05,
                mode: PairFilterMode::Pruned,
                ..PairFilter::default()
            },
        )
        .unwrap();
        assert!(pruned.num_pairs() < full.num_pairs());
        // V is a max dominated by small-g pairs, which the neighbor filter
        // keeps: pruned V must match full V.
        let pi = ProportionVector::<f64>::uniform(4).unwrap();
        for sigma in [0.3, 1.0] {
            let v_full = worst_lower_bound(&pi, 24, &full, sigma).unwrap();
            let v_pruned = worst_lower_bound(&pi, 24, &pruned, sigma).unwrap();
            assert!((v_full - v_pruned).abs() <= 1e-9 * v_full.abs().max(1e-300));
        }
    }

    #[test]
    fn minimax_bound_scalings() {
        let (geom, _, _) = bench(8, 2);
        let refl = ReflectivityMap::from_reals(-0.5, 0.5).unwrap();
        let code = orthogonal_code(4, 24).unwrap();
        let sigma = 0.4f64.sqrt();
        let base = minimax_bound(&geom, &code, &refl, sigma, 4.0).unwrap();
        assert!(base.value.is_finite() && base.value > 0.0);
        assert!(base.delta_feasible);

        // Doubling sigma multiplies by exactly 4.
        let twice_sigma = minimax_bound(&geom, &code, &refl, 2.0 * sigma, 4.0).unwrap();
        assert_eq!(twice_sigma.value, base.value * 4.0);

        // Doubling K by duplicating the antenna layout divides by exactly 4
        // (tags, coupling, and reflectivities unchanged).
        let mut doubled = geom.clone();
        doubled.antenna_positions.extend(
            geom.antenna_positions
                .iter()
                .map(|p| [p[0] + 10.0, p[1], p[2]]),
        );
        doubled.transmit_signal = vec![num_complex::Complex::new(1.0, 0.0); 8];
        let twice_k = minimax_bound(&doubled, &code, &refl, sigma, 4.0).unwrap();
        let ratio = twice_k.value / base.value;
        assert!((ratio - 0.25).abs() < 1e-15);

        // All-zero reflectivities: reported unbounded.
        let dead = ReflectivityMap::from_reals(0.0, 0.0).unwrap();
        let unbounded = minimax_bound(&geom, &code, &dead, sigma, 4.0).unwrap();
        assert!(unbounded.value.is_infinite());
    }

    #[test]
    fn cache_round_trip_and_key_check() {
        let (geom, grid, table) = bench(9, 5);
        let pt = build_pair_table(&table, &grid, &PairFilter::default()).unwrap();
        let key = PairTableKey {
            geometry_hash: geometry_hash(&geom),
            grid_seed: grid.seed(),
            grid_len: grid.len() as u64,
            codeword_count: 16,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.bin");
        pt.save(&path, &key).unwrap();
        let loaded = PairDistanceTable::<f64>::load(&path, &key).unwrap();
        assert_eq!(loaded.num_pairs(), pt.num_pairs());
        for p in 0..pt.num_pairs() {
            assert_eq!(loaded.pair(p), pt.pair(p));
            assert_eq!(loaded.theta(p), pt.theta(p));
            assert_eq!(loaded.g_row(p), pt.g_row(p));
        }

        let mut wrong = key.clone();
        wrong.grid_seed ^= 1;
        assert!(PairDistanceTable::<f64>::load(&path, &wrong).is_err());
    }
}
