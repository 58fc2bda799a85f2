//! Enumeration and sampling of fixed-quasiparticle-number subspaces.
//!
//! A state with m quasiparticles is an m-subset of the N modes, identified
//! by its lexicographic rank (combinatorial number system). Subspaces within
//! budget are walked exhaustively in rank order, carrying a running
//! Correlators accumulator across steps by occupation toggles; recorded
//! values are always recomputed canonically (vacuum plus increments in
//! ascending mode order), so every record is bitwise independent of chunk
//! boundaries and worker count, and the running accumulator serves as a
//! cross-check on the increment table. Subspaces over budget fall back to
//! seeded uniform sampling without replacement.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use num_bigint::{BigUint, RandBigInt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::correlators::{Correlators, ModeTable, OccupationSet, Toggle};
use crate::entanglement::{concurrence_xstate, rdm_nn};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Records carry their occupation list only for small m; larger subspaces
/// are sampled or huge, and rank alone identifies the state.
pub const OCC_ECHO_MAX: usize = 3;

/// States per work unit. Small enough that a default scan splits into many
/// units (keeps workers busy and the reorder buffer shallow).
const CHUNK: u64 = 4096;

/// Number of m-subsets of n modes.
pub fn subspace_dimension(n: usize, m: usize) -> Result<BigUint> {
    if m > n {
        return Err(Error::invalid(format!("{m} quasiparticles in {n} modes")));
    }
    let m = m.min(n - m);
    let mut acc = BigUint::from(1u64);
    // exact at every step: i consecutive integers are divisible by i!
    for i in 1..=m {
        acc = acc * BigUint::from((n - m + i) as u64) / BigUint::from(i as u64);
    }
    Ok(acc)
}

/// Pascal triangle slice: C(i, j) for i ≤ n, j ≤ m, zero when j > i.
struct Binomials {
    cols: usize,
    table: Vec<BigUint>,
}

impl Binomials {
    fn new(n: usize, m: usize) -> Self {
        let cols = m + 1;
        let mut table = vec![BigUint::default(); (n + 1) * cols];
        for i in 0..=n {
            table[i * cols] = BigUint::from(1u64);
            for j in 1..=m.min(i) {
                let sum = &table[(i - 1) * cols + j - 1] + &table[(i - 1) * cols + j];
                table[i * cols + j] = sum;
            }
        }
        Binomials { cols, table }
    }

    fn c(&self, i: usize, j: usize) -> &BigUint {
        &self.table[i * self.cols + j]
    }
}

/// Lexicographic rank of an occupation set among all sets of its size.
pub fn state_rank(n: usize, occ: &OccupationSet) -> Result<BigUint> {
    let m = occ.len();
    if occ.indices().last().is_some_and(|&t| t >= n) {
        return Err(Error::invalid(format!("mode index out of range for {n} modes")));
    }
    let binom = Binomials::new(n, m);
    let mut rank = BigUint::default();
    let mut next = 0usize;
    for (i, &t) in occ.indices().iter().enumerate() {
        // subsets that picked a smaller value at position i
        for v in next..t {
            rank += binom.c(n - 1 - v, m - 1 - i);
        }
        next = t + 1;
    }
    Ok(rank)
}

/// Inverse of [`state_rank`].
pub fn state_at_rank(n: usize, m: usize, rank: &BigUint) -> Result<OccupationSet> {
    let total = subspace_dimension(n, m)?;
    if *rank >= total {
        return Err(Error::invalid(format!("rank {rank} outside subspace of size {total}")));
    }
    let binom = Binomials::new(n, m);
    OccupationSet::new(unrank(&binom, n, m, rank))
}

fn unrank(binom: &Binomials, n: usize, m: usize, rank: &BigUint) -> Vec<usize> {
    let mut r = rank.clone();
    let mut idx = Vec::with_capacity(m);
    let mut v = 0usize;
    for i in 0..m {
        loop {
            let c = binom.c(n - 1 - v, m - 1 - i);
            if r < *c {
                break;
            }
            r -= c;
            v += 1;
        }
        idx.push(v);
        v += 1;
    }
    idx
}

/// In-place lexicographic successor; false once at the last combination.
fn lex_successor(idx: &mut [usize], n: usize) -> bool {
    let m = idx.len();
    let Some(p) = (0..m).rev().find(|&p| idx[p] != n - m + p) else {
        return false;
    };
    idx[p] += 1;
    for q in p + 1..m {
        idx[q] = idx[q - 1] + 1;
    }
    true
}

#[derive(Clone, Copy, Debug)]
pub struct ScanPolicy<T: Real> {
    /// Quasiparticle count of the subspace.
    pub m: usize,
    /// Largest subspace walked exhaustively.
    pub budget: u64,
    /// Draws when sampling kicks in.
    pub sample_count: u64,
    pub seed: u64,
    /// Threshold above which a state counts as entangled.
    pub tol_ent: T,
    pub workers: usize,
}

impl<T: Real> ScanPolicy<T> {
    pub fn new(m: usize) -> Self {
        ScanPolicy {
            m,
            budget: 10_000_000,
            sample_count: 1_000_000,
            seed: 1,
            tol_ent: T::of(1e-12),
            workers: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        if self.sample_count == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        if self.tol_ent < T::zero() {
            return Err(Error::invalid("entanglement tolerance must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct StateRecord<T: Real> {
    /// Lexicographic rank of the occupation set.
    pub rank: BigUint,
    pub energy: T,
    pub concurrence: T,
    /// Present when m is small enough to echo (see [`OCC_ECHO_MAX`]).
    pub occ: Option<OccupationSet>,
}

#[derive(Clone, Copy, Debug)]
pub struct ScanSummary<T: Real> {
    pub visited: u64,
    pub exhaustive: bool,
    pub e_min: T,
    pub e_max: T,
    pub c_min: T,
    pub c_max: T,
    pub entangled: u64,
}

fn eval_state<T: Real>(
    table: &ModeTable<T>,
    idx: &[usize],
) -> Result<(Correlators<T>, T, OccupationSet)> {
    let occ = OccupationSet::new(idx.to_vec())?;
    let corr = table.correlators_of(&occ)?;
    let conc = concurrence_xstate(&rdm_nn(&corr)?)?;
    Ok((corr, conc.c, occ))
}

fn walk_chunk<T: Real>(
    table: &ModeTable<T>,
    binom: &Binomials,
    m: usize,
    start: u64,
    len: u64,
    keep_occ: bool,
) -> Result<Vec<StateRecord<T>>> {
    let n = table.n();
    let mut idx = unrank(binom, n, m, &BigUint::from(start));
    let mut out = Vec::with_capacity(len as usize);
    // minimal-change accumulator carried across the walk; it must stay on
    // top of the canonical per-state value or the increment table is broken
    let mut running = table.correlators_of(&OccupationSet::new(idx.clone())?)?;
    let mut prev = idx.clone();
    for step in 0..len {
        let (corr, c, occ) = eval_state(table, &idx)?;
        debug_assert!(
            (running.energy - corr.energy).abs() <= T::of(1e-9)
                && (running.f0 - corr.f0).abs() <= T::of(1e-9),
            "toggled walk drifted from canonical evaluation"
        );
        out.push(StateRecord {
            rank: BigUint::from(start + step),
            energy: corr.energy,
            concurrence: c,
            occ: keep_occ.then_some(occ),
        });
        if step + 1 < len {
            prev.copy_from_slice(&idx);
            let advanced = lex_successor(&mut idx, n);
            debug_assert!(advanced, "chunk extends past the subspace");
            // toggle exactly the suffix that changed
            let p = (0..m).find(|&q| prev[q] != idx[q]).expect("successor changed something");
            for &mode in &prev[p..] {
                running = table.toggle_mode(&running, mode, Toggle::Remove)?;
            }
            for &mode in &idx[p..] {
                running = table.toggle_mode(&running, mode, Toggle::Add)?;
            }
        }
    }
    Ok(out)
}

fn sample_chunk<T: Real>(
    table: &ModeTable<T>,
    binom: &Binomials,
    m: usize,
    draws: &[BigUint],
    keep_occ: bool,
) -> Result<Vec<StateRecord<T>>> {
    let n = table.n();
    let mut out = Vec::with_capacity(draws.len());
    for rank in draws {
        let idx = unrank(binom, n, m, rank);
        let (corr, c, occ) = eval_state(table, &idx)?;
        out.push(StateRecord {
            rank: rank.clone(),
            energy: corr.energy,
            concurrence: c,
            occ: keep_occ.then_some(occ),
        });
    }
    Ok(out)
}

/// Floyd's algorithm: `count` distinct ranks uniform over [0, total),
/// returned in draw order.
fn draw_ranks(total: &BigUint, count: u64, seed: u64) -> Vec<BigUint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: HashSet<BigUint> = HashSet::with_capacity(count as usize);
    let mut order = Vec::with_capacity(count as usize);
    let first = total - count;
    for i in 0..count {
        let j = &first + i;
        let r = rng.gen_biguint_below(&(&j + 1u64));
        let pick = if chosen.contains(&r) { j } else { r };
        chosen.insert(pick.clone());
        order.push(pick);
    }
    order
}

/// Runs `work(0..n_jobs)` across workers and hands each result to `flush`
/// in job order, streaming so the reorder buffer stays shallow. On error
/// the earliest-job failure wins, which keeps reporting deterministic.
fn run_jobs<T, W, F>(n_jobs: usize, workers: usize, work: W, mut flush: F) -> Result<()>
where
    T: Real,
    W: Fn(usize) -> Result<Vec<StateRecord<T>>> + Sync,
    F: FnMut(Vec<StateRecord<T>>) -> Result<()>,
{
    if workers <= 1 || n_jobs <= 1 {
        for i in 0..n_jobs {
            flush(work(i)?)?;
        }
        return Ok(());
    }

    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel();
    let mut outcome: Result<()> = Ok(());
    let mut failed_at = usize::MAX;

    std::thread::scope(|s| {
        for _ in 0..workers.min(n_jobs) {
            let tx = tx.clone();
            let (next, stop, work) = (&next, &stop, &work);
            s.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n_jobs {
                    break;
                }
                match work(i) {
                    Ok(v) => {
                        if tx.send((i, Ok(v))).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        stop.store(true, Ordering::Relaxed);
                        let _ = tx.send((i, Err(e)));
                        break;
                    }
                }
            });
        }
        drop(tx);

        let mut pending: BTreeMap<usize, Vec<StateRecord<T>>> = BTreeMap::new();
        let mut next_flush = 0usize;
        while let Ok((i, res)) = rx.recv() {
            match res {
                Ok(v) => {
                    pending.insert(i, v);
                }
                Err(e) => {
                    if i < failed_at {
                        failed_at = i;
                        outcome = Err(e);
                    }
                }
            }
            while outcome.is_ok() {
                let Some(v) = pending.remove(&next_flush) else {
                    break;
                };
                if let Err(e) = flush(v) {
                    failed_at = 0;
                    outcome = Err(e);
                    stop.store(true, Ordering::Relaxed);
                }
                next_flush += 1;
            }
        }
    });
    outcome
}

/// Visits the m-quasiparticle subspace and feeds every record to `sink`.
/// Exhaustive in lexicographic rank order when C(N, m) is within budget
/// (or within sample_count, where sampling would degenerate to full
/// coverage anyway); otherwise `sample_count` states drawn uniformly
/// without replacement, in draw order. Sink errors abort the scan.
pub fn scan_subspace<T, S>(
    table: &ModeTable<T>,
    policy: &ScanPolicy<T>,
    mut sink: S,
) -> Result<ScanSummary<T>>
where
    T: Real,
    S: FnMut(StateRecord<T>) -> Result<()>,
{
    policy.validate()?;
    let n = table.n();
    let m = policy.m;
    let total = subspace_dimension(n, m)?;
    let binom = Binomials::new(n, m);
    let keep_occ = m <= OCC_ECHO_MAX;
    let exhaustive =
        total <= BigUint::from(policy.budget) || total <= BigUint::from(policy.sample_count);

    let mut visited = 0u64;
    let mut entangled = 0u64;
    let mut e_range: Option<(T, T)> = None;
    let mut c_range: Option<(T, T)> = None;
    {
        let mut flush = |records: Vec<StateRecord<T>>| -> Result<()> {
            for rec in records {
                visited += 1;
                if rec.concurrence > policy.tol_ent {
                    entangled += 1;
                }
                e_range = Some(match e_range {
                    None => (rec.energy, rec.energy),
                    Some((lo, hi)) => (lo.min(rec.energy), hi.max(rec.energy)),
                });
                c_range = Some(match c_range {
                    None => (rec.concurrence, rec.concurrence),
                    Some((lo, hi)) => (lo.min(rec.concurrence), hi.max(rec.concurrence)),
                });
                sink(rec)?;
            }
            Ok(())
        };

        if exhaustive {
            let total = u64::try_from(&total).expect("exhaustive subspace fits in u64");
            let n_jobs = total.div_ceil(CHUNK) as usize;
            run_jobs(
                n_jobs,
                policy.workers,
                |i| {
                    let start = i as u64 * CHUNK;
                    walk_chunk(table, &binom, m, start, CHUNK.min(total - start), keep_occ)
                },
                &mut flush,
            )?;
        } else {
            let draws = draw_ranks(&total, policy.sample_count, policy.seed);
            let n_jobs = draws.len().div_ceil(CHUNK as usize);
            run_jobs(
                n_jobs,
                policy.workers,
                |i| {
                    let lo = i * CHUNK as usize;
                    let hi = (lo + CHUNK as usize).min(draws.len());
                    sample_chunk(table, &binom, m, &draws[lo..hi], keep_occ)
                },
                &mut flush,
            )?;
        }
    }

    let (e_min, e_max) = e_range.expect("scan visits at least one state");
    let (c_min, c_max) = c_range.expect("scan visits at least one state");
    Ok(ScanSummary { visited, exhaustive, e_min, e_max, c_min, c_max, entangled })
}

/// Largest concurrence in the subspace and one state attaining it; ties go
/// to the lexicographically smallest occupation set, independent of visit
/// order and worker count.
pub fn max_concurrence<T: Real>(
    table: &ModeTable<T>,
    policy: &ScanPolicy<T>,
) -> Result<(T, OccupationSet)> {
    let mut best: Option<(T, BigUint)> = None;
    scan_subspace(table, policy, |rec| {
        let better = match &best {
            None => true,
            Some((c, rank)) => {
                rec.concurrence > *c || (rec.concurrence == *c && rec.rank < *rank)
            }
        };
        if better {
            best = Some((rec.concurrence, rec.rank));
        }
        Ok(())
    })?;
    let (c, rank) = best.expect("scan visits at least one state");
    Ok((c, state_at_rank(table.n(), policy.m, &rank)?))
}
