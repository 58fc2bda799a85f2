//! Model parameters, momentum grids, and the single-mode solution.
//!
//! After Jordan-Wigner and a Fourier transform the chain decouples into
//! momentum modes, each a 2x2 problem solved by a Bogoliubov rotation:
//!
//!   A_k = J cos k − h,   C_k = −Jδ sin k,   ε_k = sqrt(A_k² + C_k²),
//!   cos 2θ_k = A_k/ε_k,  sin 2θ_k = −C_k/ε_k.
//!
//! The fermion-parity sector fixes the boundary condition and with it the
//! grid: periodic fermions live on integer momenta k = 2πm/N, antiperiodic
//! ones on half-integer momenta k = π(2j−1)/N.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fermionic boundary condition selecting the momentum grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grid {
    /// Integer grid k = 2πm/N; contains k = 0 (and k = π for even N).
    Periodic,
    /// Half-integer grid k = π(2j−1)/N.
    Antiperiodic,
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Grid::Periodic => write!(f, "periodic"),
            Grid::Antiperiodic => write!(f, "antiperiodic"),
        }
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(Grid::Periodic),
            "antiperiodic" => Ok(Grid::Antiperiodic),
            other => Err(Error::invalid(format!(
                "unknown grid {other:?}, expected periodic or antiperiodic"
            ))),
        }
    }
}

/// Chain parameters. Constructed through [`ModelParams::new`], which rejects
/// values outside the solved quadrant of the phase diagram.
#[derive(Clone, Copy, Debug)]
pub struct ModelParams<T: Real> {
    pub j: T,
    pub delta: T,
    pub h: T,
    pub n: usize,
    pub grid: Grid,
}

impl<T: Real> ModelParams<T> {
    pub fn new(j: T, delta: T, h: T, n: usize, grid: Grid) -> Result<Self> {
        if !(j > T::zero()) {
            return Err(Error::invalid(format!("coupling J must be positive, got {j}")));
        }
        if !(delta >= T::zero() && delta <= T::one()) {
            return Err(Error::invalid(format!("anisotropy delta must lie in [0, 1], got {delta}")));
        }
        if !(h >= T::zero()) {
            return Err(Error::invalid(format!("field h must be nonnegative, got {h}")));
        }
        if n < 4 {
            return Err(Error::invalid(format!("chain length N must be at least 4, got {n}")));
        }
        Ok(ModelParams { j, delta, h, n, grid })
    }

    /// Defaults used throughout the workbench: J = 1, δ = 0.8, N = 1000.
    pub fn with_field(h: T) -> Result<Self> {
        ModelParams::new(T::one(), T::of(0.8), h, 1000, Grid::Periodic)
    }
}

/// One momentum mode, fully solved.
#[derive(Clone, Copy, Debug)]
pub struct ModeEntry<T: Real> {
    pub k: T,
    /// A_k = J cos k − h.
    pub a: T,
    /// C_k = −Jδ sin k.
    pub c: T,
    /// Quasiparticle energy ε_k ≥ 0.
    pub eps: T,
    pub cos2t: T,
    pub sin2t: T,
}

/// Momentum grid, strictly increasing, N values in (−π, π].
#[derive(Clone, Debug)]
pub struct KGrid<T: Real> {
    momenta: Vec<T>,
}

impl<T: Real> KGrid<T> {
    pub fn momenta(&self) -> &[T] {
        &self.momenta
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }
}

/// Builds the N-point momentum grid for the given boundary condition.
///
/// Periodic: k = 2πm/N with m = 0, ±1, …, ±(N−1)/2 for odd N and
/// m = 0, ±1, …, ±(N/2−1), N/2 for even N. Antiperiodic: k = π(2j−1)/N with
/// j = −N/2+1, …, N/2 for even N; for odd N the analogous window
/// j = −(N−3)/2, …, (N+1)/2 keeps N values in (−π, π], including an unpaired
/// k = π mode.
pub fn build_kgrid<T: Real>(n: usize, grid: Grid) -> Result<KGrid<T>> {
    if n < 4 {
        return Err(Error::invalid(format!("grid needs N >= 4, got {n}")));
    }
    let nn = n as i64;
    let step = T::two_pi() / T::of_usize(n);
    let half = T::pi() / T::of_usize(n);
    let momenta: Vec<T> = match grid {
        Grid::Periodic => {
            let lo = if n % 2 == 0 { -nn / 2 + 1 } else { -(nn - 1) / 2 };
            (lo..=nn / 2).map(|m| step * T::of(m as f64)).collect()
        }
        Grid::Antiperiodic => {
            let lo = if n % 2 == 0 { -nn / 2 + 1 } else { -(nn - 3) / 2 };
            let hi = if n % 2 == 0 { nn / 2 } else { (nn + 1) / 2 };
            // k = π(2j−1)/N written as (2j−1)·(π/N) to keep ±k exactly opposite
            (lo..=hi).map(|j| half * T::of((2 * j - 1) as f64)).collect()
        }
    };
    debug_assert_eq!(momenta.len(), n);
    Ok(KGrid { momenta })
}

/// Solves one mode: dispersion and Bogoliubov angle at momentum k.
pub fn dispersion<T: Real>(params: &ModelParams<T>, k: T) -> ModeEntry<T> {
    let a = params.j * k.cos() - params.h;
    let c = -params.j * params.delta * k.sin();
    let eps = (a * a + c * c).sqrt();
    let (cos2t, sin2t) = bogoliubov_angle(a, c);
    ModeEntry { k, a, c, eps, cos2t, sin2t }
}

/// (cos 2θ, sin 2θ) from the Bogoliubov equations, computed directly from
/// (A, C) rather than through an arctangent so there is no branch to pick.
/// A gapless mode (ε = 0) returns (1, 0); any angle gives the same physical
/// state there, and fixing one keeps results reproducible.
pub fn bogoliubov_angle<T: Real>(a: T, c: T) -> (T, T) {
    let eps = (a * a + c * c).sqrt();
    if eps == T::zero() {
        (T::one(), T::zero())
    } else {
        (a / eps, -c / eps)
    }
}

/// The two special field values of the model: the factorizing field
/// h_f = sqrt(J² − (Jδ)²), where the ground state is an exact product state,
/// and the critical field h_c = J.
pub fn special_fields<T: Real>(j: T, delta: T) -> (T, T) {
    let hf = (j * j - (j * delta) * (j * delta)).sqrt();
    (hf, j)
}
