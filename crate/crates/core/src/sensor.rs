//! Sensor geometry, the spatial-frequency index bijection, the mixing matrix
//! and the sufficient-condition predicates for unique recovery.

use std::f64::consts::TAU;

use faer::{c64, Mat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::video::BandlimitParams;

/// The direction one sensor observes, reduced into `[0, D1) x [0, D2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorDirection {
    d1: f64,
    d2: f64,
}

impl SensorDirection {
    pub fn new(d1: f64, d2: f64, params: &BandlimitParams) -> Result<Self> {
        if !(d1.is_finite() && d2.is_finite()) {
            return Err(Error::NonFinite("sensor direction"));
        }
        Ok(Self {
            d1: reduce(d1, params.period_d1),
            d2: reduce(d2, params.period_d2),
        })
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }
}

fn reduce(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid may round up to exactly `period`
    if r >= period {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorGrid {
    directions: Vec<SensorDirection>,
    params: BandlimitParams,
}

impl SensorGrid {
    pub fn new(directions: Vec<SensorDirection>, params: BandlimitParams) -> Result<Self> {
        params.validate()?;
        if directions.is_empty() {
            return Err(Error::InvalidParams(
                "a sensor grid needs at least one sensor".into(),
            ));
        }
        let mut keys: Vec<(u64, u64)> = directions
            .iter()
            .map(|d| (d.d1.to_bits(), d.d2.to_bits()))
            .collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams(
                "sensor directions must be distinct".into(),
            ));
        }
        Ok(Self { directions, params })
    }

    /// Builds a grid from raw `(d1, d2)` pairs, reducing each into the period
    /// rectangle.
    pub fn from_points(points: &[(f64, f64)], params: BandlimitParams) -> Result<Self> {
        let directions = points
            .iter()
            .map(|&(d1, d2)| SensorDirection::new(d1, d2, &params))
            .collect::<Result<_>>()?;
        Self::new(directions, params)
    }

    pub fn directions(&self) -> &[SensorDirection] {
        &self.directions
    }

    pub fn params(&self) -> &BandlimitParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// `n1 x n2` uniformly spaced sensors, row-major: sensor `p * n2 + q` sits at
/// `(p D1 / n1, q D2 / n2)`.
pub fn uniform_grid(n1: usize, n2: usize, params: BandlimitParams) -> Result<SensorGrid> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParams(format!("grid {n1}x{n2} is empty")));
    }
    let mut directions = Vec::with_capacity(n1 * n2);
    for p in 0..n1 {
        for q in 0..n2 {
            directions.push(SensorDirection::new(
                p as f64 * params.period_d1 / n1 as f64,
                q as f64 * params.period_d2 / n2 as f64,
                &params,
            )?);
        }
    }
    SensorGrid::new(directions, params)
}

/// Bijection between spatial frequencies `(k1, k2)` and the 1-based proxy index
/// `j = (k1 + K1)(2K2 + 1) + (k2 + K2 + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexMap {
    k1: usize,
    k2: usize,
}

impl IndexMap {
    pub fn new(k1: usize, k2: usize) -> Self {
        Self { k1, k2 }
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.k2
    }

    /// `J`.
    pub fn len(&self) -> usize {
        (2 * self.k1 + 1) * (2 * self.k2 + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, k1: i64, k2: i64) -> Result<usize> {
        let (h1, h2) = (self.k1 as i64, self.k2 as i64);
        if k1.abs() > h1 || k2.abs() > h2 {
            return Err(Error::OutOfRange(format!(
                "spatial frequency ({k1}, {k2}) outside bandwidth ({h1}, {h2})"
            )));
        }
        Ok(((k1 + h1) * (2 * h2 + 1) + (k2 + h2 + 1)) as usize)
    }

    pub fn inverse_index(&self, j: usize) -> Result<(i64, i64)> {
        if j == 0 || j > self.len() {
            return Err(Error::OutOfRange(format!(
                "proxy index {j} not in 1..={}",
                self.len()
            )));
        }
        let (h1, h2) = (self.k1 as i64, self.k2 as i64);
        let z = j as i64 - 1;
        let w = 2 * h2 + 1;
        Ok((z / w - h1, z % w - h2))
    }
}

/// `I x J` matrix of unit-modulus spatial exponentials.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    entries: Mat<c64>,
}

impl MixingMatrix {
    pub fn entries(&self) -> &Mat<c64> {
        &self.entries
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn from_entries(entries: Mat<c64>) -> Self {
        Self { entries }
    }

    /// Copy of the rows listed in `rows`.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let e = &self.entries;
        Self {
            entries: Mat::from_fn(rows.len(), e.ncols(), |r, c| e[(rows[r], c)]),
        }
    }
}

/// `a_ij = exp(j 2 pi (d1_i k1(j) / D1 + d2_i k2(j) / D2))`.
pub fn build_mixing(grid: &SensorGrid) -> MixingMatrix {
    let p = grid.params();
    let map = p.index_map();
    let freqs: Vec<(i64, i64)> = (1..=map.len())
        .map(|j| map.inverse_index(j).expect("j in range"))
        .collect();
    let dirs = grid.directions();
    let entries = Mat::from_fn(dirs.len(), freqs.len(), |i, j| {
        let (k1, k2) = freqs[j];
        let phase = dirs[i].d1 / p.period_d1 * k1 as f64 + dirs[i].d2 / p.period_d2 * k2 as f64;
        c64::cis(TAU * phase.rem_euclid(1.0))
    });
    MixingMatrix { entries }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankCheck {
    pub full_rank: bool,
    /// `sigma_max / sigma_min`, infinite when the matrix is short or singular.
    pub condition_estimate: f64,
}

fn singular_values(m: &Mat<c64>) -> Result<Vec<f64>> {
    let mut s = m
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn rank_check_from(s: &[f64], ncols: usize, tol: f64) -> RankCheck {
    let largest = s.first().copied().unwrap_or(0.0);
    let smallest = if s.len() < ncols {
        0.0
    } else {
        s.last().copied().unwrap_or(0.0)
    };
    RankCheck {
        full_rank: largest > 0.0 && smallest > tol * largest,
        condition_estimate: if smallest > 0.0 {
            largest / smallest
        } else {
            f64::INFINITY
        },
    }
}

/// Whether `A` has full column rank, using a relative singular-value cutoff.
pub fn full_rank_check(mixing: &MixingMatrix, tol: f64) -> Result<RankCheck> {
    let s = singular_values(&mixing.entries)?;
    Ok(rank_check_from(&s, mixing.ncols(), tol))
}

/// Samples `trials` random `J`-row subsets of `A` and returns the fraction
/// that are nonsingular. Exhaustive enumeration is out of reach for realistic
/// grids, so this is a randomized probe of "every `J` rows independent".
pub fn subset_independence_check(
    mixing: &MixingMatrix,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<f64> {
    let (i_count, j_count) = (mixing.nrows(), mixing.ncols());
    if i_count < j_count {
        return Err(Error::InvalidParams(format!(
            "need at least J = {j_count} rows, matrix has {i_count}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passing = 0usize;
    for _ in 0..trials {
        let mut rows = rand::seq::index::sample(&mut rng, i_count, j_count).into_vec();
        rows.sort_unstable();
        let sub = mixing.select_rows(&rows);
        let s = singular_values(&sub.entries)?;
        if rank_check_from(&s, j_count, tol).full_rank {
            passing += 1;
        }
    }
    Ok(passing as f64 / trials as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feasibility {
    pub satisfied: bool,
    /// `sum_i min(n_i - 1, K)`, negative terms clamped to zero.
    pub useful_pairs: usize,
}

/// The spike-count sufficient condition `sum_i min(n_i - 1, K) > J K`
/// (`>=` when `strict` is false).
pub fn feasibility(
    spike_counts: &[usize],
    j_count: usize,
    k_count: usize,
    strict: bool,
) -> Feasibility {
    let useful_pairs = spike_counts
        .iter()
        .map(|&n| n.saturating_sub(1).min(k_count))
        .sum();
    let needed = j_count * k_count;
    Feasibility {
        satisfied: if strict {
            useful_pairs > needed
        } else {
            useful_pairs >= needed
        },
        useful_pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_examples() {
        let map = IndexMap::new(1, 1);
        assert_eq!(map.len(), 9);
        assert_eq!(map.index_of(-1, -1).unwrap(), 1);
        assert_eq!(map.index_of(0, 0).unwrap(), 5);
        assert_eq!(map.index_of(1, 1).unwrap(), 9);
        assert_eq!(map.inverse_index(9).unwrap(), (1, 1));
        assert!(map.index_of(2, 0).is_err());
        assert!(map.inverse_index(0).is_err());
        assert!(map.inverse_index(10).is_err());
    }

    #[test]
    fn index_bijection_over_full_range() {
        let map = IndexMap::new(3, 2);
        let mut seen = vec![false; map.len()];
        for k1 in -3..=3 {
            for k2 in -2..=2 {
                let j = map.index_of(k1, k2).unwrap();
                assert!(!seen[j - 1]);
                seen[j - 1] = true;
                assert_eq!(map.inverse_index(j).unwrap(), (k1, k2));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn uniform_grid_layouts() {
        let single = uniform_grid(1, 1, BandlimitParams::cube(1)).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.directions()[0], SensorDirection { d1: 0.0, d2: 0.0 });

        let g = uniform_grid(9, 9, BandlimitParams::cube(4)).unwrap();
        assert_eq!(g.len(), 81);
        let d = g.directions();
        assert!((d[1].d2 - 1.0 / 9.0).abs() < 1e-15);
        assert!((d[9].d1 - 1.0 / 9.0).abs() < 1e-15);

        assert_eq!(
            uniform_grid(9, 5, BandlimitParams::cube(4)).unwrap().len(),
            45
        );
        assert!(uniform_grid(0, 3, BandlimitParams::cube(1)).is_err());
    }

    #[test]
    fn directions_reduced_and_distinct() {
        let p = BandlimitParams::cube(1);
        let d = SensorDirection::new(1.25, -0.25, &p).unwrap();
        assert!((d.d1() - 0.25).abs() < 1e-15 && (d.d2() - 0.75).abs() < 1e-15);
        assert!(SensorGrid::from_points(&[(0.5, 0.2), (1.5, 0.2)], p).is_err());
        assert!(SensorGrid::from_points(&[(0.5, 0.5), (0.5, 0.5)], p).is_err());
        assert!(SensorGrid::new(vec![], p).is_err());
    }

    #[test]
    fn single_sensor_at_origin_is_all_ones() {
        let g = uniform_grid(1, 1, BandlimitParams::cube(2)).unwrap();
        let a = build_mixing(&g);
        for j in 0..a.ncols() {
            assert!((a.entries()[(0, j)] - c64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn sensors_one_period_apart_share_a_row() {
        let p = BandlimitParams::cube(2);
        // distinct raw points that reduce to the same direction are rejected,
        // so compare rows across two separate grids
        let a = build_mixing(&SensorGrid::from_points(&[(0.3, 0.4)], p).unwrap());
        let b = build_mixing(&SensorGrid::from_points(&[(1.3, 0.4)], p).unwrap());
        for j in 0..a.ncols() {
            assert!((a.entries()[(0, j)] - b.entries()[(0, j)]).norm() < 1e-12);
        }
    }

    #[test]
    fn duplicated_rows_are_rank_deficient() {
        let p = BandlimitParams::cube(1);
        let g = uniform_grid(3, 3, p).unwrap();
        let a = build_mixing(&g);
        let mut rows: Vec<usize> = (0..9).collect();
        rows[8] = 0;
        let dup = a.select_rows(&rows);
        let check = full_rank_check(&dup, 1e-10).unwrap();
        assert!(!check.full_rank);
        assert!(full_rank_check(&a, 1e-10).unwrap().full_rank);
    }

    #[test]
    fn square_subset_check_is_deterministic() {
        let a = build_mixing(&uniform_grid(3, 3, BandlimitParams::cube(1)).unwrap());
        assert_eq!(subset_independence_check(&a, 5, 1, 1e-10).unwrap(), 1.0);
        let short = a.select_rows(&[0, 1, 2]);
        assert!(subset_independence_check(&short, 5, 1, 1e-10).is_err());
    }

    #[test]
    fn zero_row_fails_subsets_that_include_it() {
        let a = build_mixing(&uniform_grid(3, 4, BandlimitParams::cube(1)).unwrap());
        let mut e = a.entries().clone();
        for j in 0..e.ncols() {
            e[(5, j)] = c64::new(0.0, 0.0);
        }
        let frac =
            subset_independence_check(&MixingMatrix::from_entries(e), 200, 3, 1e-10).unwrap();
        assert!(frac < 1.0);
    }

    #[test]
    fn feasibility_examples() {
        let f = feasibility(&[10; 82], 81, 9, true);
        assert_eq!(f.useful_pairs, 738);
        assert!(f.satisfied);

        let f = feasibility(&[1000; 45], 81, 9, false);
        assert_eq!(f.useful_pairs, 405);
        assert!(!f.satisfied);

        let strict = feasibility(&[10; 81], 81, 9, true);
        let loose = feasibility(&[10; 81], 81, 9, false);
        assert_eq!(strict.useful_pairs, 729);
        assert!(!strict.satisfied && loose.satisfied);

        assert_eq!(feasibility(&[0, 1, 2], 1, 9, false).useful_pairs, 1);
    }
}
