//! Nearest-neighbor reduced density matrix and concurrence.
//!
//! Translation invariance and the parity structure of the chain's
//! eigenstates force the two-site reduced density matrix into X form in the
//! standard basis, with entries built from the correlators f0, f1, f2:
//!
//!   diag = (Xp, Yp, Ym, Xm),  ρ23 = Z = f1,  ρ14 = F = f2
//!   Xp = f0² − |f1|² + f2²,  Xm = 1 − 2 f0 + Xp,  Yp = Ym = f0 − Xp
//!
//! For an X matrix the Wootters concurrence reduces to two closed-form
//! branches. The general eigenvalue route ([`wootters_general`]) is kept as
//! an independent check and for density matrices coming from exact
//! diagonalization, which are not exactly X-shaped at finite tolerance.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex;

use crate::correlators::Correlators;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Two-site X-form density matrix. `z` couples |01⟩ and |10⟩, `f` couples
/// |00⟩ and |11⟩.
#[derive(Clone, Copy, Debug)]
pub struct NNDensityMatrix<T: Real> {
    pub xp: T,
    pub xm: T,
    pub yp: T,
    pub ym: T,
    pub z: Complex<T>,
    pub f: Complex<T>,
}

/// Concurrence with its two X-state branches. `c1` pairs the inner
/// coherence against the outer populations, `c2` the reverse; both may be
/// negative, and `c = max(0, c1, c2)` clamped to [0, 1].
#[derive(Clone, Copy, Debug)]
pub struct ConcurrenceResult<T: Real> {
    pub c: T,
    pub c1: T,
    pub c2: T,
}

const PHYS_TOL: f64 = 1e-8;

/// Largest violation of positivity, unit trace, or the X-form minor
/// constraints. Zero for an exactly physical matrix.
pub fn physicality_residual<T: Real>(r: &NNDensityMatrix<T>) -> T {
    let zero = T::zero();
    let trace_err = (r.xp + r.yp + r.ym + r.xm - T::one()).abs();
    let neg = [r.xp, r.yp, r.ym, r.xm]
        .into_iter()
        .fold(zero, |acc, d| acc.max(-d));
    // PSD of an X matrix: |z|² ≤ Yp Ym and |f|² ≤ Xp Xm
    let minor_z = (r.z.norm_sqr() - r.yp * r.ym).max(zero);
    let minor_f = (r.f.norm_sqr() - r.xp * r.xm).max(zero);
    trace_err.max(neg).max(minor_z).max(minor_f)
}

/// Builds the nearest-neighbor density matrix from correlators, refusing
/// inputs whose entries violate physicality beyond 1e-8.
pub fn rdm_nn<T: Real>(c: &Correlators<T>) -> Result<NNDensityMatrix<T>> {
    let xp = c.f0 * c.f0 - c.f1.norm_sqr() + c.f2 * c.f2;
    let xm = T::one() - c.f0 - c.f0 + xp;
    let y = c.f0 - xp;
    let r = NNDensityMatrix {
        xp,
        xm,
        yp: y,
        ym: y,
        z: c.f1,
        f: Complex::new(c.f2, T::zero()),
    };
    let residual = physicality_residual(&r);
    if residual > T::of(PHYS_TOL) {
        return Err(Error::integrity(format!(
            "two-site density matrix unphysical, residual {residual:e}"
        )));
    }
    Ok(r)
}

/// Closed-form concurrence of an X matrix. Branch values above 1 + 1e-9 are
/// treated as corruption rather than clamped away.
pub fn concurrence_xstate<T: Real>(r: &NNDensityMatrix<T>) -> Result<ConcurrenceResult<T>> {
    let zero = T::zero();
    let two = T::of(2.0);
    let c1 = two * (r.z.norm_sqr().sqrt() - (r.xp * r.xm).max(zero).sqrt());
    let c2 = two * (r.f.norm_sqr().sqrt() - (r.yp * r.ym).max(zero).sqrt());
    let raw = c1.max(c2);
    if raw > T::one() + T::of(1e-9) {
        return Err(Error::integrity(format!("concurrence branch {raw:e} exceeds 1")));
    }
    Ok(ConcurrenceResult { c: raw.max(zero).min(T::one()), c1, c2 })
}

/// Places an X-form matrix into the full 4×4 representation.
pub fn embed_xstate<T: Real>(r: &NNDensityMatrix<T>) -> Matrix4<Complex<T>> {
    let o = Complex::new(T::zero(), T::zero());
    let re = |x: T| Complex::new(x, T::zero());
    Matrix4::new(
        re(r.xp), o, o, r.f,
        o, re(r.yp), r.z, o,
        o, r.z.conj(), re(r.ym), o,
        r.f.conj(), o, o, re(r.xm),
    )
}

fn spin_flip_pair<T: Real>() -> Matrix4<Complex<T>> {
    let o = Complex::new(T::zero(), T::zero());
    let p = Complex::new(T::one(), T::zero());
    let m = -p;
    Matrix4::new(
        o, o, o, m,
        o, o, p, o,
        o, p, o, o,
        m, o, o, o,
    )
}

/// Eigendecomposition of a 4×4 Hermitian matrix by cyclic Jacobi sweeps.
/// Returns unsorted real eigenvalues and the unitary of column eigenvectors.
///
/// Hand-rolled because the library eigensolver loses up to four digits on
/// some of the near-degenerate matrices this module produces; two-sided
/// Jacobi is unconditionally stable and exact to rounding at this size.
pub(crate) fn hermitian_eigen4<T: Real>(
    m: &Matrix4<Complex<T>>,
) -> (Vector4<T>, Matrix4<Complex<T>>) {
    let mut h = *m;
    let mut v = Matrix4::identity();
    let off = |h: &Matrix4<Complex<T>>| {
        let mut s = T::zero();
        for p in 0..4 {
            for q in (p + 1)..4 {
                s += h[(p, q)].norm_sqr();
            }
        }
        s
    };
    let scale = h.map(|e| e.norm_sqr()).sum().max(T::of(1e-300));
    for _ in 0..50 {
        if off(&h) <= scale * T::of(1e-32) {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                let w = h[(p, q)];
                let wn = w.norm_sqr().sqrt();
                if wn <= scale.sqrt() * T::of(1e-18) {
                    continue;
                }
                // absorb the phase, then a real rotation zeroes the entry
                let phase = w.conj() / Complex::new(wn, T::zero());
                let tau = (h[(q, q)].re - h[(p, p)].re) / (wn + wn);
                // small root of t² − 2τt − 1, in the form that survives τ → ±∞
                let t = if tau >= T::zero() {
                    -T::one() / (tau + (tau * tau + T::one()).sqrt())
                } else {
                    T::one() / ((tau * tau + T::one()).sqrt() - tau)
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let upp = Complex::new(c, T::zero());
                let upq = Complex::new(-s, T::zero());
                let uqp = phase * s;
                let uqq = phase * c;
                for k in 0..4 {
                    let (a, b) = (h[(k, p)], h[(k, q)]);
                    h[(k, p)] = a * upp + b * uqp;
                    h[(k, q)] = a * upq + b * uqq;
                }
                for k in 0..4 {
                    let (a, b) = (h[(p, k)], h[(q, k)]);
                    h[(p, k)] = upp.conj() * a + uqp.conj() * b;
                    h[(q, k)] = upq.conj() * a + uqq.conj() * b;
                }
                for k in 0..4 {
                    let (a, b) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = a * upp + b * uqp;
                    v[(k, q)] = a * upq + b * uqq;
                }
            }
        }
    }
    (Vector4::from_fn(|i, _| h[(i, i)].re), v)
}

/// Wootters concurrence of an arbitrary two-qubit density matrix.
///
/// Works on R = √ρ ρ̃ √ρ, which is Hermitian positive semidefinite, so two
/// Hermitian eigendecompositions replace the non-Hermitian ρρ̃ problem. The
/// input must be Hermitian, unit trace, and positive semidefinite to 1e-8.
pub fn wootters_general<T: Real>(rho: &Matrix4<Complex<T>>) -> Result<T> {
    let tol = T::of(PHYS_TOL);
    let mut herm_err = T::zero();
    for i in 0..4 {
        for j in 0..4 {
            let d = rho[(i, j)] - rho[(j, i)].conj();
            herm_err = herm_err.max(d.norm_sqr().sqrt());
        }
    }
    if herm_err > tol {
        return Err(Error::invalid(format!("density matrix not Hermitian, residual {herm_err:e}")));
    }
    let trace_err = (rho.trace().re - T::one()).abs().max(rho.trace().im.abs());
    if trace_err > tol {
        return Err(Error::invalid(format!("density matrix trace off by {trace_err:e}")));
    }

    let (vals, vecs) = hermitian_eigen4(rho);
    if let Some(&worst) = vals.iter().filter(|&&v| v < -tol).min_by(|a, b| {
        a.partial_cmp(b).expect("eigenvalues are finite")
    }) {
        return Err(Error::invalid(format!("density matrix not positive, eigenvalue {worst:e}")));
    }
    let sqrt_vals = vals.map(|x| Complex::new(x.max(T::zero()).sqrt(), T::zero()));
    let sqrt_rho = &vecs * Matrix4::from_diagonal(&sqrt_vals) * vecs.adjoint();

    let y = spin_flip_pair::<T>();
    let rho_tilde = y * rho.map(|e| e.conj()) * y;
    let r = &sqrt_rho * rho_tilde * sqrt_rho;

    let (rvals, _) = hermitian_eigen4(&r);
    let mut roots: Vec<T> = rvals.iter().map(|&x| x.max(T::zero()).sqrt()).collect();
    roots.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).max(T::zero()))
}
