//! Ground-state correlator sums and per-mode increments.
//!
//! For an eigenstate with quasiparticle occupations n_k ∈ {0, 1} the three
//! correlators that determine the nearest-neighbor reduced density matrix,
//! and the energy, are mode sums linear in n_k:
//!
//!   f0 = (1/N) Σ_k [cos2θ_k n_k + sin²θ_k]
//!   f1 = (1/N) Σ_k cos k [cos2θ_k n_k + sin²θ_k] − (i/N) Σ_k sin k · n_k
//!   f2 = (1/N) Σ_k sin k sin2θ_k (n_k − 1/2)
//!   E  = Σ_k ε_k (n_k − 1/2)
//!
//! [`ModeTable`] stores the vacuum (all n_k = 0) values once together with
//! each mode's contribution, so any state costs O(occupied modes) and a
//! single occupation flip costs O(1).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{build_kgrid, dispersion, ModeEntry, ModelParams};

/// Sorted, distinct mode indices: which quasiparticles are present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupationSet {
    indices: Vec<usize>,
}

impl OccupationSet {
    /// Sorts the indices; rejects duplicates.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("occupation set contains a duplicate mode index"));
        }
        Ok(OccupationSet { indices })
    }

    pub fn empty() -> Self {
        OccupationSet { indices: Vec::new() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Correlators and energy of one eigenstate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correlators<T: Real> {
    pub f0: T,
    pub f1: Complex<T>,
    pub f2: T,
    pub energy: T,
}

/// Per-mode contribution of flipping n_k from 0 to 1.
#[derive(Clone, Copy, Debug)]
pub struct Increment<T: Real> {
    pub df0: T,
    pub df1: Complex<T>,
    pub df2: T,
    pub de: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Toggle {
    Add,
    Remove,
}

/// Solved mode list plus vacuum correlators and increment table.
#[derive(Clone, Debug)]
pub struct ModeTable<T: Real> {
    params: ModelParams<T>,
    modes: Vec<ModeEntry<T>>,
    ground: Correlators<T>,
    inc: Vec<Increment<T>>,
}

/// Compensated (Kahan) summation; the N = 1000 vacuum sums feed equivalence
/// tests at 1e-13 and plain accumulation drifts past that.
fn kahan<T: Real>(terms: impl Iterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for t in terms {
        let y = t - carry;
        let s = sum + y;
        carry = (s - sum) - y;
        sum = s;
    }
    sum
}

impl<T: Real> ModeTable<T> {
    /// Solves every mode of `params` and precomputes vacuum sums and
    /// increments. O(N) time and space.
    pub fn build(params: &ModelParams<T>) -> Result<Self> {
        let grid = build_kgrid::<T>(params.n, params.grid)?;
        let modes: Vec<ModeEntry<T>> =
            grid.momenta().iter().map(|&k| dispersion(params, k)).collect();
        let n = T::of_usize(params.n);
        let half = T::of(0.5);

        let sin_sq = |m: &ModeEntry<T>| (T::one() - m.cos2t) * half;
        let f0 = kahan(modes.iter().map(sin_sq)) / n;
        let f1_re = kahan(modes.iter().map(|m| m.k.cos() * sin_sq(m))) / n;
        // vacuum f1 is real on any k ↔ −k paired grid; pinned exactly
        let f1 = Complex::new(f1_re, T::zero());
        let f2 = -kahan(modes.iter().map(|m| m.k.sin() * m.sin2t)) / (n + n);
        let energy = -kahan(modes.iter().map(|m| m.eps)) * half;
        let ground = Correlators { f0, f1, f2, energy };

        let inc = modes
            .iter()
            .map(|m| Increment {
                df0: m.cos2t / n,
                df1: Complex::new(m.k.cos() * m.cos2t / n, -m.k.sin() / n),
                df2: m.k.sin() * m.sin2t / n,
                de: m.eps,
            })
            .collect();

        Ok(ModeTable { params: *params, modes, ground, inc })
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn modes(&self) -> &[ModeEntry<T>] {
        &self.modes
    }

    pub fn ground(&self) -> Correlators<T> {
        self.ground
    }

    pub fn increment(&self, mode: usize) -> Option<&Increment<T>> {
        self.inc.get(mode)
    }

    /// Correlators of the state with the given occupied modes, evaluated as
    /// vacuum plus increments in ascending mode order. The fixed order makes
    /// the result identical no matter how the caller discovered the state,
    /// which is what keeps scan output byte-stable across worker counts.
    pub fn correlators_of(&self, occ: &OccupationSet) -> Result<Correlators<T>> {
        let mut c = self.ground;
        for &i in occ.indices() {
            let inc = self
                .inc
                .get(i)
                .ok_or_else(|| Error::invalid(format!("mode index {i} out of range")))?;
            c.f0 += inc.df0;
            c.f1 += inc.df1;
            c.f2 += inc.df2;
            c.energy += inc.de;
        }
        self.debug_bounds(&c);
        Ok(c)
    }

    /// O(1) occupation flip. The caller tracks membership; only the index
    /// range is checked here.
    pub fn toggle_mode(
        &self,
        corr: &Correlators<T>,
        mode: usize,
        dir: Toggle,
    ) -> Result<Correlators<T>> {
        let inc = self
            .inc
            .get(mode)
            .ok_or_else(|| Error::invalid(format!("mode index {mode} out of range")))?;
        let mut c = *corr;
        match dir {
            Toggle::Add => {
                c.f0 += inc.df0;
                c.f1 += inc.df1;
                c.f2 += inc.df2;
                c.energy += inc.de;
            }
            Toggle::Remove => {
                c.f0 -= inc.df0;
                c.f1 -= inc.df1;
                c.f2 -= inc.df2;
                c.energy -= inc.de;
            }
        }
        self.debug_bounds(&c);
        Ok(c)
    }

    pub fn energy_of(&self, occ: &OccupationSet) -> Result<T> {
        let mut e = self.ground.energy;
        for &i in occ.indices() {
            let inc = self
                .inc
                .get(i)
                .ok_or_else(|| Error::invalid(format!("mode index {i} out of range")))?;
            e += inc.de;
        }
        Ok(e)
    }

    /// Analytic energy range of the m-quasiparticle subspace: vacuum energy
    /// plus the m smallest (respectively largest) mode energies.
    pub fn energy_bounds(&self, m: usize) -> (T, T) {
        let mut eps: Vec<T> = self.modes.iter().map(|e| e.eps).collect();
        eps.sort_by(|a, b| a.partial_cmp(b).expect("mode energies are finite"));
        let lo = self.ground.energy + kahan(eps.iter().take(m).copied());
        let hi = self.ground.energy + kahan(eps.iter().rev().take(m).copied());
        (lo, hi)
    }

    // loose physical bounds; violations mean a grid or angle bug, and the
    // checks stay out of release hot loops
    fn debug_bounds(&self, c: &Correlators<T>) {
        debug_assert!(c.f0 >= -T::of(1e-9) && c.f0 <= T::one() + T::of(1e-9), "f0 out of [0,1]");
        debug_assert!(
            (c.f1.re * c.f1.re + c.f1.im * c.f1.im).sqrt() <= T::one() + T::of(1e-9),
            "|f1| > 1"
        );
        debug_assert!(c.f2.abs() <= T::of(0.5) + T::of(1e-9), "|f2| > 1/2");
    }
}

/// Reference evaluation for cross-checks: a single pass over the whole grid
/// with explicit occupation numbers, sharing nothing with the increment
/// table. O(N) per state.
pub fn direct_correlators<T: Real>(
    params: &ModelParams<T>,
    occ: &OccupationSet,
) -> Result<Correlators<T>> {
    let grid = build_kgrid::<T>(params.n, params.grid)?;
    if let Some(&bad) = occ.indices().iter().find(|&&i| i >= params.n) {
        return Err(Error::invalid(format!("mode index {bad} out of range")));
    }
    let mut occupied = vec![false; params.n];
    for &i in occ.indices() {
        occupied[i] = true;
    }

    let n = T::of_usize(params.n);
    let half = T::of(0.5);
    let (mut f0, mut f1_re, mut f1_im, mut f2, mut energy) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (i, &k) in grid.momenta().iter().enumerate() {
        let m = dispersion(params, k);
        let nk = if occupied[i] { T::one() } else { T::zero() };
        let sin_sq = (T::one() - m.cos2t) * half;
        f0 += m.cos2t * nk + sin_sq;
        f1_re += k.cos() * (m.cos2t * nk + sin_sq);
        f1_im -= k.sin() * nk;
        f2 += k.sin() * m.sin2t * (nk - half);
        energy += m.eps * (nk - half);
    }
    Ok(Correlators {
        f0: f0 / n,
        f1: Complex::new(f1_re / n, f1_im / n),
        f2: f2 / n,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(j: f64, delta: f64, h: f64, n: usize, grid: Grid) -> ModeTable<f64> {
        let p = ModelParams::new(j, delta, h, n, grid).unwrap();
        ModeTable::build(&p).unwrap()
    }

    fn diff(a: &Correlators<f64>, b: &Correlators<f64>) -> f64 {
        [
            (a.f0 - b.f0).abs(),
            (a.f1 - b.f1).norm(),
            (a.f2 - b.f2).abs(),
            (a.energy - b.energy).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    #[test]
    fn polarized_limit() {
        let t = table(1.0, 0.8, 1000.0, 100, Grid::Periodic);
        assert!(t.ground().f0 >= 0.999, "f0 = {}", t.ground().f0);
    }

    #[test]
    fn vacuum_energy_per_site_at_factorizing_field() {
        // eps_k = 1 − h_f cos k at h = h_f, and Σ cos k = 0 on the full
        // grid, so E/N = −1/2 exactly up to rounding
        let t = table(1.0, 0.8, 0.6, 1000, Grid::Periodic);
        let per_site = t.ground().energy / 1000.0;
        assert_abs_diff_eq!(per_site, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_f1_is_real() {
        for (n, grid) in [(8, Grid::Periodic), (9, Grid::Periodic), (8, Grid::Antiperiodic)] {
            let t = table(1.0, 0.8, 1.2, n, grid);
            assert_eq!(t.ground().f1.im, 0.0);
        }
    }

    #[test]
    fn increment_imaginary_parts_cancel_over_grid() {
        let t = table(1.0, 0.8, 0.7, 101, Grid::Periodic);
        let total: f64 = (0..t.n()).map(|i| t.increment(i).unwrap().df1.im).sum();
        assert_abs_diff_eq!(total, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn empty_set_is_exactly_ground() {
        let t = table(1.0, 0.8, 1.2, 64, Grid::Periodic);
        let c = t.correlators_of(&OccupationSet::empty()).unwrap();
        assert_eq!(c, t.ground());
    }

    #[test]
    fn fully_occupied_mirrors_ground() {
        let t = table(1.0, 0.8, 0.9, 128, Grid::Periodic);
        let all = OccupationSet::new((0..128).collect()).unwrap();
        let c = t.correlators_of(&all).unwrap();
        // cos2θ·1 + sin²θ = cos²θ
        let cos_sq: f64 =
            t.modes().iter().map(|m| (1.0 + m.cos2t) / 2.0).sum::<f64>() / 128.0;
        assert_abs_diff_eq!(c.f0, cos_sq, epsilon = 1e-13);
        assert_abs_diff_eq!(c.energy, -t.ground().energy, epsilon = 1e-11);
    }

    #[test]
    fn single_mode_against_direct_summation() {
        let p = ModelParams::new(1.0, 0.8, 1.2, 8, Grid::Periodic).unwrap();
        let t = ModeTable::build(&p).unwrap();
        let idx = t
            .modes()
            .iter()
            .position(|m| (m.k - std::f64::consts::FRAC_PI_4).abs() < 1e-12)
            .expect("k = π/4 is on the N=8 periodic grid");
        let occ = OccupationSet::new(vec![idx]).unwrap();
        let fast = t.correlators_of(&occ).unwrap();
        let slow = direct_correlators(&p, &occ).unwrap();
        assert!(diff(&fast, &slow) < 1e-14, "divergence {}", diff(&fast, &slow));
    }

    #[test]
    fn toggle_matches_direct_and_inverts() {
        let t = table(1.0, 0.8, 1.2, 33, Grid::Periodic);
        let g = t.ground();
        let added = t.toggle_mode(&g, 7, Toggle::Add).unwrap();
        let via_set = t.correlators_of(&OccupationSet::new(vec![7]).unwrap()).unwrap();
        assert_eq!(added, via_set);
        assert_abs_diff_eq!(added.energy - g.energy, t.modes()[7].eps, epsilon = 1e-12);

        let back = t.toggle_mode(&added, 7, Toggle::Remove).unwrap();
        assert!(diff(&back, &g) < 1e-15);
    }

    #[test]
    fn linearity_over_disjoint_sets() {
        let t = table(1.0, 0.8, 0.8, 50, Grid::Periodic);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut pool: Vec<usize> = (0..50).collect();
            for i in (1..pool.len()).rev() {
                pool.swap(i, rng.gen_range(0..=i));
            }
            let a = OccupationSet::new(pool[..3].to_vec()).unwrap();
            let b = OccupationSet::new(pool[3..6].to_vec()).unwrap();
            let ab = OccupationSet::new(pool[..6].to_vec()).unwrap();
            let (ca, cb, cab) = (
                t.correlators_of(&a).unwrap(),
                t.correlators_of(&b).unwrap(),
                t.correlators_of(&ab).unwrap(),
            );
            let lhs = Correlators {
                f0: cab.f0 - ca.f0,
                f1: cab.f1 - ca.f1,
                f2: cab.f2 - ca.f2,
                energy: cab.energy - ca.energy,
            };
            let rhs = Correlators {
                f0: cb.f0 - t.ground().f0,
                f1: cb.f1 - t.ground().f1,
                f2: cb.f2 - t.ground().f2,
                energy: cb.energy - t.ground().energy,
            };
            assert!(diff(&lhs, &rhs) < 1e-13);
        }
    }

    #[test]
    fn toggle_chains_track_direct_evaluation() {
        // 1000 random states across random chain sizes, built mode by mode
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let n = rng.gen_range(8..=1000);
            let m = rng.gen_range(0..=6.min(n));
            let grid = if rng.gen_bool(0.5) { Grid::Periodic } else { Grid::Antiperiodic };
            let t = table(1.0, rng.gen_range(0.0..=1.0), rng.gen_range(0.0..3.0), n, grid);
            let mut picked = Vec::new();
            while picked.len() < m {
                let i = rng.gen_range(0..n);
                if !picked.contains(&i) {
                    picked.push(i);
                }
            }
            let mut c = t.ground();
            for &i in &picked {
                c = t.toggle_mode(&c, i, Toggle::Add).unwrap();
            }
            let occ = OccupationSet::new(picked).unwrap();
            let reference = t.correlators_of(&occ).unwrap();
            assert!(diff(&c, &reference) < 1e-12);
            // the reference route sums naively, so its extensive energy can
            // drift a few ulps of the total; compare it per site
            let slow = direct_correlators(t.params(), &occ).unwrap();
            assert!((c.f0 - slow.f0).abs() < 1e-12);
            assert!((c.f1 - slow.f1).norm() < 1e-12);
            assert!((c.f2 - slow.f2).abs() < 1e-12);
            assert!((c.energy - slow.energy).abs() < 1e-12 * n as f64);
        }
    }

    #[test]
    fn symmetric_sets_have_real_f1() {
        for n in [40, 41] {
            let t = table(1.0, 0.8, 0.9, n, Grid::Periodic);
            // pair each positive-k mode with its negative
            let mut idx = Vec::new();
            for (i, m) in t.modes().iter().enumerate() {
                if m.k > 0.0 && m.k < std::f64::consts::PI - 1e-9 {
                    let j = t
                        .modes()
                        .iter()
                        .position(|q| (q.k + m.k).abs() < 1e-12)
                        .unwrap();
                    idx.push(i);
                    idx.push(j);
                    if idx.len() >= 8 {
                        break;
                    }
                }
            }
            let c = t.correlators_of(&OccupationSet::new(idx).unwrap()).unwrap();
            assert_abs_diff_eq!(c.f1.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn energy_window_by_brute_force() {
        let t = table(1.0, 0.8, 0.7, 18, Grid::Periodic);
        for m in 1..=3usize {
            let (lo, hi) = t.energy_bounds(m);
            let mut best = f64::INFINITY;
            let mut worst = f64::NEG_INFINITY;
            // odometer over strictly increasing index tuples
            let mut idx: Vec<usize> = (0..m).collect();
            loop {
                let e = t.energy_of(&OccupationSet::new(idx.clone()).unwrap()).unwrap();
                best = best.min(e);
                worst = worst.max(e);
                let Some(pos) = (0..m).rev().find(|&p| idx[p] != 18 - m + p) else {
                    break;
                };
                idx[pos] += 1;
                for q in pos + 1..m {
                    idx[q] = idx[q - 1] + 1;
                }
            }
            assert_abs_diff_eq!(best, lo, epsilon = 1e-12);
            assert_abs_diff_eq!(worst, hi, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_indices() {
        let t = table(1.0, 0.8, 1.0, 16, Grid::Periodic);
        assert!(OccupationSet::new(vec![3, 3]).is_err());
        let out = OccupationSet::new(vec![16]).unwrap();
        assert!(t.correlators_of(&out).is_err());
        assert!(t.energy_of(&out).is_err());
        assert!(t.toggle_mode(&t.ground(), 16, Toggle::Add).is_err());
    }
}
