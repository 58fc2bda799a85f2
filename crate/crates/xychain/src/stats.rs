//! Histograms over scan records, ground-state field sweeps, and
//! finite-difference derivatives.
//!
//! The energy histogram counts entangled states per energy bin against the
//! analytic subspace range; the concurrence histogram distributes entangled
//! states over their observed concurrence range. Weights divide counts by
//! the subspace dimension for exhaustive scans, or by the sample size for
//! sampled ones (flagged `estimated`).

use num_traits::ToPrimitive;

use crate::correlators::Correlators;
use crate::entanglement::{concurrence_xstate, rdm_nn, ConcurrenceResult, NNDensityMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scanner::{subspace_dimension, StateRecord};
use crate::correlators::ModeTable;
use crate::spectral::ModelParams;

/// Binned counts with normalized weights. `totals` (states per bin whether
/// entangled or not) is filled by energy histograms and left empty by
/// concurrence histograms. A histogram with `bins == 0` is the signal that
/// no entangled records existed to bin.
#[derive(Clone, Debug)]
pub struct Histogram<T: Real> {
    pub lo: T,
    pub hi: T,
    pub bins: usize,
    pub counts: Vec<u64>,
    pub totals: Vec<u64>,
    pub weights: Vec<T>,
    pub estimated: bool,
}

impl<T: Real> Histogram<T> {
    /// Bin boundaries; the last bin closes exactly at `hi`.
    pub fn edges(&self, i: usize) -> (T, T) {
        let width = (self.hi - self.lo) / T::of_usize(self.bins);
        let lo = self.lo + width * T::of_usize(i);
        let hi = if i + 1 == self.bins { self.hi } else { self.lo + width * T::of_usize(i + 1) };
        (lo, hi)
    }

    pub fn center(&self, i: usize) -> T {
        let (lo, hi) = self.edges(i);
        (lo + hi) * T::of(0.5)
    }
}

/// Left-closed right-open bins, the final bin closed at `hi`. Values beyond
/// 1e-9 outside the range are corruption; values within the slack clamp.
fn bin_index<T: Real>(x: T, lo: T, hi: T, bins: usize) -> Result<usize> {
    let slack = T::of(1e-9);
    if x < lo - slack || x > hi + slack {
        return Err(Error::integrity(format!("value {x:e} outside bin range [{lo:e}, {hi:e}]")));
    }
    if bins == 1 {
        return Ok(0);
    }
    let x = x.max(lo).min(hi);
    let t = (x - lo) / (hi - lo) * T::of_usize(bins);
    Ok(t.floor().to_usize().unwrap_or(0).min(bins - 1))
}

fn normalization<T: Real>(n: usize, m: usize, sample_size: Option<u64>) -> Result<T> {
    match sample_size {
        Some(0) => Err(Error::invalid("sample size must be at least 1")),
        Some(s) => Ok(T::one() / T::of_usize(s as usize)),
        None => {
            let dim = subspace_dimension(n, m)?;
            Ok(T::one() / T::of(dim.to_f64().expect("dimension is positive")))
        }
    }
}

/// Distribution of entangled states over the subspace energy range
/// [e_min, e_max] (analytic bounds, not observed ones, so sampled scans
/// that miss the extremes still bin consistently). Pass the sample size
/// when the records came from a sampled scan.
pub fn does_histogram<T: Real>(
    records: &[StateRecord<T>],
    e_min: T,
    e_max: T,
    bins: usize,
    n: usize,
    m: usize,
    tol_ent: T,
    sample_size: Option<u64>,
) -> Result<Histogram<T>> {
    if bins == 0 {
        return Err(Error::invalid("bin count must be at least 1"));
    }
    if !(e_max > e_min) {
        return Err(Error::invalid("energy range is empty"));
    }
    let mut counts = vec![0u64; bins];
    let mut totals = vec![0u64; bins];
    for rec in records {
        let i = bin_index(rec.energy, e_min, e_max, bins)?;
        totals[i] += 1;
        if rec.concurrence > tol_ent {
            counts[i] += 1;
        }
    }
    let norm = normalization(n, m, sample_size)?;
    let weights = counts.iter().map(|&c| T::of_usize(c as usize) * norm).collect();
    Ok(Histogram {
        lo: e_min,
        hi: e_max,
        bins,
        counts,
        totals,
        weights,
        estimated: sample_size.is_some(),
    })
}

/// Distribution of concurrence over the entangled records' own range. With
/// no entangled records the result is the zero-bin signal; a degenerate
/// range (spread below 1e-15) collapses to a single bin.
pub fn dis_histogram<T: Real>(
    records: &[StateRecord<T>],
    bins: usize,
    n: usize,
    m: usize,
    tol_ent: T,
    sample_size: Option<u64>,
) -> Result<Histogram<T>> {
    if bins == 0 {
        return Err(Error::invalid("bin count must be at least 1"));
    }
    let mut range: Option<(T, T)> = None;
    for rec in records.iter().filter(|r| r.concurrence > tol_ent) {
        range = Some(match range {
            None => (rec.concurrence, rec.concurrence),
            Some((lo, hi)) => (lo.min(rec.concurrence), hi.max(rec.concurrence)),
        });
    }
    let estimated = sample_size.is_some();
    let Some((lo, hi)) = range else {
        return Ok(Histogram {
            lo: T::zero(),
            hi: T::zero(),
            bins: 0,
            counts: Vec::new(),
            totals: Vec::new(),
            weights: Vec::new(),
            estimated,
        });
    };
    let bins = if hi - lo < T::of(1e-15) { 1 } else { bins };
    let mut counts = vec![0u64; bins];
    for rec in records.iter().filter(|r| r.concurrence > tol_ent) {
        counts[bin_index(rec.concurrence, lo, hi, bins)?] += 1;
    }
    let norm = normalization(n, m, sample_size)?;
    let weights = counts.iter().map(|&c| T::of_usize(c as usize) * norm).collect();
    Ok(Histogram { lo, hi, bins, counts, totals: Vec::new(), weights, estimated })
}

/// Ground state at one field value, with everything downstream consumers
/// print: correlators, density-matrix entries, concurrence branches.
#[derive(Clone, Copy, Debug)]
pub struct GroundPoint<T: Real> {
    pub h: T,
    pub e_per_site: T,
    pub corr: Correlators<T>,
    pub rdm: NNDensityMatrix<T>,
    pub conc: ConcurrenceResult<T>,
}

/// Evaluates the ground state on the closed grid h_lo, h_lo + step, …, h_hi.
/// All parameters except the field come from `template`.
pub fn ground_sweep<T: Real>(
    template: &ModelParams<T>,
    h_lo: T,
    h_hi: T,
    step: T,
) -> Result<Vec<GroundPoint<T>>> {
    if !(step > T::zero()) {
        return Err(Error::invalid("sweep step must be positive"));
    }
    if !(h_hi > h_lo) {
        return Err(Error::invalid("sweep range is empty"));
    }
    let count = ((h_hi - h_lo) / step + T::of(1e-9)).floor().to_usize().ok_or_else(|| {
        Error::invalid("sweep range does not fit in memory")
    })? + 1;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let h = h_lo + step * T::of_usize(i);
        let params = ModelParams::new(template.j, template.delta, h, template.n, template.grid)?;
        let table = ModeTable::build(&params)?;
        let corr = table.ground();
        let rdm = rdm_nn(&corr)?;
        let conc = concurrence_xstate(&rdm)?;
        out.push(GroundPoint {
            h,
            e_per_site: corr.energy / T::of_usize(template.n),
            corr,
            rdm,
            conc,
        });
    }
    Ok(out)
}

/// One named curve over field values.
#[derive(Clone, Debug)]
pub struct SweepSeries<T: Real> {
    pub h: Vec<T>,
    pub values: Vec<T>,
    pub label: String,
}

impl<T: Real> SweepSeries<T> {
    pub fn new(h: Vec<T>, values: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if h.len() != values.len() {
            return Err(Error::invalid("series lengths differ"));
        }
        if h.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("field values must increase strictly"));
        }
        Ok(SweepSeries { h, values, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// Pulls one column out of sweep points as a named series.
pub fn extract_series<T: Real>(
    points: &[GroundPoint<T>],
    label: impl Into<String>,
    f: impl Fn(&GroundPoint<T>) -> T,
) -> Result<SweepSeries<T>> {
    SweepSeries::new(points.iter().map(|p| p.h).collect(), points.iter().map(f).collect(), label)
}

/// Finite-difference derivative on a uniform grid: central differences in
/// the interior, one-sided at both ends.
pub fn derivative_series<T: Real>(series: &SweepSeries<T>) -> Result<SweepSeries<T>> {
    let n = series.len();
    if n < 3 {
        return Err(Error::invalid("derivative needs at least 3 points"));
    }
    let d = series.h[1] - series.h[0];
    let tol = T::of(1e-9) * d.abs().max(T::one());
    if series.h.windows(2).any(|w| ((w[1] - w[0]) - d).abs() > tol) {
        return Err(Error::invalid("derivative needs a uniform field grid"));
    }
    let v = &series.values;
    let mut out = Vec::with_capacity(n);
    out.push((v[1] - v[0]) / d);
    for i in 1..n - 1 {
        out.push((v[i + 1] - v[i - 1]) / (d + d));
    }
    out.push((v[n - 1] - v[n - 2]) / d);
    SweepSeries::new(series.h.clone(), out, format!("d({})/dh", series.label))
}
