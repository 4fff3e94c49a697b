//! Numerical check of the three integral identities that define a δ-shock
//! solution in one space dimension.
//!
//! For a test function φ the mass identity reads
//!
//! ```text
//! ∫∫ (ρ φ_t + ρU φ_x) dx dt + ∫ e (φ_t + u_δ φ_x)(x(t), t) dt
//!     + ∫ ρ₀ φ(x, 0) dx + e(0) φ(x(0), 0) = 0
//! ```
//!
//! and the momentum and energy identities replace `(ρ, ρU, e)` by
//! `(ρU, ρU², e u_δ)` and `(E, EU, e u_δ²/2 + h)` with `E = ρU²/2 + H`.
//! The volume integrals are split exactly at the piece boundaries of each
//! snapshot, so every cell integrand is smooth.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{Integrator, QuadSettings};
use crate::riemann::{Brackets, RiemannSolution};
use crate::state::{DeltaFront1D, OuterState, Piece, PieceKind, RiemannData, Solution1D};

/// Default pass threshold on normalised residuals.
pub const WEAK_TOL: f64 = 1e-7;

/// Default relative quadrature tolerance.
pub const QUAD_TOL: f64 = 1e-10;

/// `A b((x−x₀)/r_x) b((t−t₀)/r_t)` with the mollifier
/// `b(s) = exp(1 − 1/(1 − s²))` on `|s| < 1`, so `φ(x₀, t₀) = A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpTestFunction {
    pub center: (f64, f64),
    pub radii: (f64, f64),
    pub amplitude: f64,
}

fn mollifier(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = (1.0 - 1.0 / q).exp();
    (b, -2.0 * s / (q * q) * b)
}

/// `∫_{-1}^{1} b(s) ds`.
fn mollifier_mass() -> f64 {
    Integrator::new(QuadSettings::with_rel_tol(1e-14))
        .integrate(|s| mollifier(s).0, -1.0, 1.0)
        .map(|r| r.value)
        .unwrap_or(1.2069)
}

impl BumpTestFunction {
    pub fn new(center: (f64, f64), radii: (f64, f64), amplitude: f64) -> Result<Self> {
        let ok = [center.0, center.1, amplitude].iter().all(|v| v.is_finite())
            && radii.0 > 0.0
            && radii.1 > 0.0
            && radii.0.is_finite()
            && radii.1.is_finite();
        if !ok {
            return Err(Error::InvalidState(format!(
                "bump needs finite center and amplitude and positive radii, got {center:?} {radii:?}"
            )));
        }
        Ok(Self {
            center,
            radii,
            amplitude,
        })
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.center.0 - self.radii.0, self.center.0 + self.radii.0)
    }

    /// Time support intersected with `t ≥ 0`.
    pub fn t_range(&self) -> (f64, f64) {
        (
            (self.center.1 - self.radii.1).max(0.0),
            self.center.1 + self.radii.1,
        )
    }

    /// `∫∫ |φ| dx dt` over the full support.
    pub fn l1_norm(&self) -> f64 {
        let c = mollifier_mass();
        self.amplitude.abs() * c * c * self.radii.0 * self.radii.1
    }
}

/// Smooth compactly supported test function.
pub trait TestFunction {
    /// `(φ, φ_t, φ_x)` at `(x, t)`.
    fn eval(&self, x: f64, t: f64) -> (f64, f64, f64);
    fn x_range(&self) -> (f64, f64);
    /// Time support intersected with `t ≥ 0`.
    fn t_range(&self) -> (f64, f64);
    /// `(sup|φ|, r_x, r_t)` bounds used to set absolute quadrature tolerances.
    fn magnitude(&self) -> (f64, f64, f64);
}

impl TestFunction for BumpTestFunction {
    fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        bump_eval(self, x, t)
    }
    fn x_range(&self) -> (f64, f64) {
        BumpTestFunction::x_range(self)
    }
    fn t_range(&self) -> (f64, f64) {
        BumpTestFunction::t_range(self)
    }
    fn magnitude(&self) -> (f64, f64, f64) {
        (self.amplitude.abs(), self.radii.0, self.radii.1)
    }
}

/// Finite linear combination `Σ c_k φ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination(pub Vec<(f64, BumpTestFunction)>);

impl TestFunction for Combination {
    fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        self.0.iter().fold((0.0, 0.0, 0.0), |acc, (c, p)| {
            let (v, vt, vx) = bump_eval(p, x, t);
            (acc.0 + c * v, acc.1 + c * vt, acc.2 + c * vx)
        })
    }
    fn x_range(&self) -> (f64, f64) {
        self.0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (_, p)| {
            let (a, b) = p.x_range();
            (acc.0.min(a), acc.1.max(b))
        })
    }
    fn t_range(&self) -> (f64, f64) {
        self.0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (_, p)| {
            let (a, b) = p.t_range();
            (acc.0.min(a), acc.1.max(b))
        })
    }
    fn magnitude(&self) -> (f64, f64, f64) {
        self.0.iter().fold((0.0, f64::INFINITY, f64::INFINITY), |acc, (c, p)| {
            (acc.0 + (c * p.amplitude).abs(), acc.1.min(p.radii.0), acc.2.min(p.radii.1))
        })
    }
}

/// `(φ, φ_t, φ_x)` at `(x, t)`.
pub fn bump_eval(phi: &BumpTestFunction, x: f64, t: f64) -> (f64, f64, f64) {
    let (rx, rt) = phi.radii;
    let (bx, dbx) = mollifier((x - phi.center.0) / rx);
    let (bt, dbt) = mollifier((t - phi.center.1) / rt);
    let a = phi.amplitude;
    (a * bx * bt, a * bx * dbt / rt, a * dbx * bt / rx)
}

/// Which of the three identities to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Identity {
    Mass,
    Momentum,
    Energy,
}

impl Identity {
    pub const ALL: [Identity; 3] = [Identity::Mass, Identity::Momentum, Identity::Energy];

    /// Conserved density and its flux.
    fn volume(self, s: &OuterState) -> (f64, f64) {
        match self {
            Identity::Mass => (s.rho, s.momentum()),
            Identity::Momentum => (s.momentum(), s.momentum_flux()),
            Identity::Energy => (s.energy(), s.energy_flux()),
        }
    }

    fn front(self, f: &DeltaFront1D) -> f64 {
        match self {
            Identity::Mass => f.e,
            Identity::Momentum => f.momentum(),
            Identity::Energy => f.energy(),
        }
    }
}

/// A candidate solution known as a family of snapshots on `[0, T]`.
pub trait WeakSolution {
    fn snapshot(&self, t: f64) -> Result<Solution1D>;
}

impl WeakSolution for RiemannSolution {
    fn snapshot(&self, t: f64) -> Result<Solution1D> {
        RiemannSolution::snapshot(self, t)
    }
}

impl<F: Fn(f64) -> Result<Solution1D>> WeakSolution for F {
    fn snapshot(&self, t: f64) -> Result<Solution1D> {
        self(t)
    }
}

/// Wrapper multiplying the front mass by a constant factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledFront<S> {
    pub inner: S,
    pub factor: f64,
}

impl<S: WeakSolution> WeakSolution for ScaledFront<S> {
    fn snapshot(&self, t: f64) -> Result<Solution1D> {
        let mut s = self.inner.snapshot(t)?;
        if let Some(f) = s.front.as_mut() {
            f.e *= self.factor;
        }
        Ok(s)
    }
}

/// Riemann data with a front moving at a prescribed speed. Mass is placed on
/// the front so that the mass identity holds for any speed; the energy uses
/// the same deficit rule. Only the entropic root also satisfies momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FabricatedFront {
    pub data: RiemannData,
    pub u_delta: f64,
}

impl WeakSolution for FabricatedFront {
    fn snapshot(&self, t: f64) -> Result<Solution1D> {
        let d = &self.data;
        let u = self.u_delta;
        let (dm, _, de) = Brackets::new(&d.left, &d.right).deficits(u);
        let e = dm * t;
        let xf = u * t;
        let a = (-d.half_length + d.left.u * t).min(xf);
        let b = (d.half_length + d.right.u * t).max(xf);
        Ok(Solution1D {
            time: t,
            pieces: vec![Piece::state(a, xf, d.left), Piece::state(xf, b, d.right)],
            front: Some(DeltaFront1D {
                x: xf,
                u_delta: u,
                e,
                h: de * t - 0.5 * e * u * u,
            }),
        })
    }
}

/// Magnitude of the densities and fluxes seen by `phi`, used to turn the
/// relative quadrature tolerance into absolute ones when the integrals
/// cancel.
fn value_scale<S: WeakSolution + ?Sized, T: TestFunction + ?Sized>(sol: &S, phi: &T) -> Result<f64> {
    let (t0, t1) = phi.t_range();
    let mut q: f64 = 1.0;
    for k in 0..=4 {
        let s = sol.snapshot(t0 + (t1 - t0) * k as f64 / 4.0)?;
        for p in &s.pieces {
            if let PieceKind::State(st) = p.kind {
                for id in Identity::ALL {
                    let (d, f) = id.volume(&st);
                    q = q.max(d.abs() + f.abs());
                }
            }
        }
        if let Some(f) = s.front {
            for id in Identity::ALL {
                q = q.max(id.front(&f).abs() * (1.0 + f.u_delta.abs()));
            }
        }
    }
    Ok(q)
}

/// Integral of `d φ(x, t) + f φ_x` (or `d φ_t + f φ_x`) over the pieces of
/// one snapshot restricted to the bump's x-support.
fn cell_integral<T: TestFunction + ?Sized>(
    quad: &Integrator,
    snap: &Solution1D,
    phi: &T,
    id: Identity,
    initial: bool,
) -> Result<f64> {
    let (xa, xb) = phi.x_range();
    let t = snap.time;
    let mut total = 0.0;
    for p in &snap.pieces {
        if matches!(p.kind, PieceKind::VacuumFan { .. }) {
            continue;
        }
        let (a, b) = (p.left.max(xa), p.right.min(xb));
        if b <= a {
            continue;
        }
        let (d, f) = id.volume(&p.state_at(0.5 * (a + b)));
        let r = quad.integrate(
            |x| {
                let (v, vt, vx) = phi.eval(x, t);
                if initial {
                    d * v
                } else {
                    d * vt + f * vx
                }
            },
            a,
            b,
        )?;
        total += r.value;
    }
    Ok(total)
}

/// The three parts of one residual.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualParts {
    pub volume: f64,
    pub front: f64,
    pub initial: f64,
}

impl ResidualParts {
    pub fn total(&self) -> f64 {
        self.volume + self.front + self.initial
    }
}

/// Left-hand side of the chosen identity, split into its parts.
pub fn residual_parts<S: WeakSolution + ?Sized, T: TestFunction + ?Sized>(
    sol: &S,
    phi: &T,
    id: Identity,
    rel_tol: f64,
) -> Result<ResidualParts> {
    let (amp, rx, rt) = phi.magnitude();
    let q = value_scale(sol, phi)?;
    let c = mollifier_mass();
    let inner = Integrator::new(
        QuadSettings::with_rel_tol(rel_tol).with_abs_tol(rel_tol * amp * c * q * (rx / rt + 1.0)),
    );
    let outer_vol = Integrator::new(
        QuadSettings::with_rel_tol(rel_tol).with_abs_tol(rel_tol * amp * c * c * q * (rx + rt)),
    );
    let outer_front = Integrator::new(
        QuadSettings::with_rel_tol(rel_tol).with_abs_tol(rel_tol * amp * c * q * (1.0 + rt / rx)),
    );
    let (t0, t1) = phi.t_range();

    // the integrand closures cannot return errors, so park the first one
    let failure: Cell<Option<Error>> = Cell::new(None);
    let guard = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };

    let volume = outer_vol
        .integrate(
            |t| guard(sol.snapshot(t).and_then(|s| cell_integral(&inner, &s, phi, id, false))),
            t0,
            t1,
        )?
        .value;
    let front = outer_front
        .integrate(
            |t| {
                guard(sol.snapshot(t).map(|s| match s.front {
                    Some(f) => {
                        let (_, vt, vx) = phi.eval(f.x, t);
                        id.front(&f) * (vt + f.u_delta * vx)
                    }
                    None => 0.0,
                }))
            },
            t0,
            t1,
        )?
        .value;
    if let Some(e) = failure.take() {
        return Err(e);
    }

    let initial = if t0 <= 0.0 {
        let s0 = sol.snapshot(0.0)?;
        let mut v = cell_integral(&inner, &s0, phi, id, true)?;
        if let Some(f) = s0.front {
            v += id.front(&f) * phi.eval(f.x, 0.0).0;
        }
        v
    } else {
        0.0
    };
    Ok(ResidualParts {
        volume,
        front,
        initial,
    })
}

/// Left-hand side of the chosen identity; zero for a weak solution.
pub fn residual<S: WeakSolution + ?Sized, T: TestFunction + ?Sized>(
    sol: &S,
    phi: &T,
    id: Identity,
    rel_tol: f64,
) -> Result<f64> {
    residual_parts(sol, phi, id, rel_tol).map(|p| p.total())
}

/// Integration by parts along the front: returns
/// `(∫ e (φ_t + u_δ φ_x) dt + e(0) φ(x(0), 0), −∫ ė φ dt)`, which agree
/// whenever the front carries no tangential divergence (always in 1D).
pub fn front_integration_by_parts<S, T, D>(
    sol: &S,
    phi: &T,
    de_dt: D,
    rel_tol: f64,
) -> Result<(f64, f64)>
where
    S: WeakSolution + ?Sized,
    T: TestFunction + ?Sized,
    D: Fn(f64) -> f64,
{
    let (amp, rx, rt) = phi.magnitude();
    let quad = Integrator::new(
        QuadSettings::with_rel_tol(rel_tol).with_abs_tol(rel_tol * amp * (1.0 + rt / rx)),
    );
    let (t0, t1) = phi.t_range();
    let failure: Cell<Option<Error>> = Cell::new(None);
    let front_at = |t: f64| match sol.snapshot(t) {
        Ok(s) => s.front,
        Err(e) => {
            failure.set(Some(e));
            None
        }
    };
    let lhs = quad
        .integrate(
            |t| match front_at(t) {
                Some(f) => {
                    let (_, vt, vx) = phi.eval(f.x, t);
                    f.e * (vt + f.u_delta * vx)
                }
                None => 0.0,
            },
            t0,
            t1,
        )?
        .value;
    let rhs = quad
        .integrate(
            |t| match front_at(t) {
                Some(f) => -de_dt(t) * phi.eval(f.x, t).0,
                None => 0.0,
            },
            t0,
            t1,
        )?
        .value;
    let start = if t0 <= 0.0 {
        front_at(0.0).map_or(0.0, |f| f.e * phi.eval(f.x, 0.0).0)
    } else {
        0.0
    };
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok((lhs + start, rhs))
}

/// Deterministic family of 20 bumps: an 18-bump lattice of three time
/// levels times six offsets around the front path `front(t)`, plus two
/// bumps touching `t = 0` (one on the front, one left of it).
///
/// `t_max` bounds the time support; `x_scale` sets the spacing and radii.
pub fn bump_lattice<P: Fn(f64) -> f64>(front: P, t_max: f64, x_scale: f64) -> Vec<BumpTestFunction> {
    const OFFSETS: [f64; 6] = [-0.6, -0.3, -0.1, 0.0, 0.2, 0.5];
    let rt = 0.2 * t_max;
    let rx = 0.3 * x_scale;
    let mut out = Vec::with_capacity(20);
    for (i, frac) in [0.3, 0.55, 0.8].into_iter().enumerate() {
        let t = frac * t_max;
        for (j, off) in OFFSETS.into_iter().enumerate() {
            out.push(BumpTestFunction {
                center: (front(t) + off * x_scale, t),
                radii: (rx, rt),
                amplitude: 1.0 + 0.05 * (i * OFFSETS.len() + j) as f64,
            });
        }
    }
    out.push(BumpTestFunction {
        center: (front(0.0), 0.0),
        radii: (rx, 0.3 * t_max),
        amplitude: 1.0,
    });
    out.push(BumpTestFunction {
        center: (front(0.0) - 0.4 * x_scale, 0.1 * t_max),
        radii: (rx, 0.3 * t_max),
        amplitude: 0.8,
    });
    out
}

/// Residuals of one test function, raw and normalised by `∫∫|φ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpResidual {
    pub bump: BumpTestFunction,
    pub l1_norm: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl BumpResidual {
    pub fn normalized(&self, id: Identity) -> f64 {
        let r = match id {
            Identity::Mass => self.mass,
            Identity::Momentum => self.momentum,
            Identity::Energy => self.energy,
        };
        r.abs() / self.l1_norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub residuals: Vec<BumpResidual>,
    pub max_mass: f64,
    pub max_momentum: f64,
    pub max_energy: f64,
    pub tolerance: f64,
    pub quadrature_rel_tol: f64,
    pub passed: bool,
    /// Finite sample only: a pass is evidence, not proof.
    pub coverage: String,
}

impl VerifyReport {
    pub fn max(&self, id: Identity) -> f64 {
        match id {
            Identity::Mass => self.max_mass,
            Identity::Momentum => self.max_momentum,
            Identity::Energy => self.max_energy,
        }
    }
}

/// Evaluates all three identities on every test function.
pub fn verify<S: WeakSolution + ?Sized>(
    sol: &S,
    family: &[BumpTestFunction],
    tolerance: f64,
    rel_tol: f64,
) -> Result<VerifyReport> {
    if family.is_empty() {
        return Err(Error::InvalidState("empty test-function family".into()));
    }
    let mut residuals = Vec::with_capacity(family.len());
    for phi in family {
        residuals.push(BumpResidual {
            bump: *phi,
            l1_norm: phi.l1_norm(),
            mass: residual(sol, phi, Identity::Mass, rel_tol)?,
            momentum: residual(sol, phi, Identity::Momentum, rel_tol)?,
            energy: residual(sol, phi, Identity::Energy, rel_tol)?,
        });
    }
    let worst = |id| residuals.iter().map(|r| r.normalized(id)).fold(0.0, f64::max);
    let (max_mass, max_momentum, max_energy) =
        (worst(Identity::Mass), worst(Identity::Momentum), worst(Identity::Energy));
    let t_hi = family.iter().map(|p| p.t_range().1).fold(0.0, f64::max);
    let (x_lo, x_hi) = family.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, p| {
        let (a, b) = p.x_range();
        (acc.0.min(a), acc.1.max(b))
    });
    Ok(VerifyReport {
        passed: max_mass <= tolerance && max_momentum <= tolerance && max_energy <= tolerance,
        max_mass,
        max_momentum,
        max_energy,
        tolerance,
        quadrature_rel_tol: rel_tol,
        coverage: format!(
            "{} test functions on x in [{x_lo:.4}, {x_hi:.4}], t in [0, {t_hi:.4}]",
            family.len()
        ),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(rho: f64, u: f64, h: f64) -> OuterState {
        OuterState::new(rho, u, h).unwrap()
    }

    fn symmetric() -> RiemannSolution {
        RiemannSolution::new(RiemannData::new(st(1.0, 1.0, 1.0), st(1.0, -1.0, 1.0), 10.0).unwrap())
            .unwrap()
    }

    fn bump(x: f64, t: f64, rx: f64, rt: f64) -> BumpTestFunction {
        BumpTestFunction::new((x, t), (rx, rt), 1.0).unwrap()
    }

    #[test]
    fn bump_values() {
        let phi = BumpTestFunction::new((0.5, 1.0), (0.3, 0.2), 2.5).unwrap();
        assert_eq!(bump_eval(&phi, 0.5, 1.0), (2.5, 0.0, 0.0));
        assert_eq!(bump_eval(&phi, 0.9, 1.0), (0.0, 0.0, 0.0));
        assert_eq!(bump_eval(&phi, 0.5, 1.2), (0.0, 0.0, 0.0));
        let (_, _, l) = bump_eval(&phi, 0.5 - 0.1, 1.0);
        let (_, _, r) = bump_eval(&phi, 0.5 + 0.1, 1.0);
        assert_eq!(l, -r);
        assert!(l > 0.0);
        // derivatives against central differences
        let (x, t, h) = (0.61, 1.07, 1e-6);
        let (_, vt, vx) = bump_eval(&phi, x, t);
        let fx = (bump_eval(&phi, x + h, t).0 - bump_eval(&phi, x - h, t).0) / (2.0 * h);
        let ft = (bump_eval(&phi, x, t + h).0 - bump_eval(&phi, x, t - h).0) / (2.0 * h);
        assert!((vx - fx).abs() < 1e-7 && (vt - ft).abs() < 1e-7);
        assert!(BumpTestFunction::new((0.0, 0.0), (0.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn l1_norm_matches_quadrature() {
        let phi = bump(0.0, 1.0, 0.4, 0.3);
        let q = Integrator::new(QuadSettings::with_rel_tol(1e-12));
        let v = q
            .integrate(|t| q.integrate(|x| bump_eval(&phi, x, t).0, -0.4, 0.4).unwrap().value, 0.7, 1.3)
            .unwrap()
            .value;
        assert!((v - phi.l1_norm()).abs() < 1e-11);
    }

    #[test]
    fn constant_state_cancels() {
        let sol = |t: f64| -> Result<Solution1D> {
            Ok(Solution1D {
                time: t,
                pieces: vec![Piece::state(-5.0, 5.0, st(1.0, 0.0, 1.0))],
                front: None,
            })
        };
        for phi in [bump(0.3, 0.0, 0.5, 0.4), bump(-1.0, 0.7, 0.5, 0.4)] {
            for id in Identity::ALL {
                let r = residual(&sol, &phi, id, QUAD_TOL).unwrap();
                assert!(r.abs() <= 1e-12, "{id:?}: {r}");
            }
        }
    }

    #[test]
    fn symmetric_front_bump() {
        let sol = symmetric();
        let phi = bump(0.0, 0.5, 0.3, 0.2);
        for id in Identity::ALL {
            let r = residual(&sol, &phi, id, QUAD_TOL).unwrap();
            assert!(r.abs() <= 1e-8 * phi.l1_norm(), "{id:?}: {r}");
        }
    }

    #[test]
    fn scaled_front_fails_mass() {
        let sol = ScaledFront { inner: symmetric(), factor: 1.01 };
        let phi = bump(0.0, 0.5, 0.3, 0.2);
        let r = residual(&sol, &phi, Identity::Mass, QUAD_TOL).unwrap();
        assert!(r.abs() / phi.l1_norm() > 1e-4);
        // 0.01 ∫ e dφ/dt dt = −0.01 ∫ ė φ dt with ė = 2
        let c = mollifier_mass();
        assert!((r + 0.02 * c * 0.2).abs() < 1e-9, "{r}");
    }

    #[test]
    fn fabricated_front_fails_momentum() {
        let data = *symmetric().data();
        let sol = FabricatedFront { data, u_delta: 1.5 };
        let phi = bump(0.75, 0.5, 0.3, 0.2);
        let m = residual(&sol, &phi, Identity::Mass, QUAD_TOL).unwrap();
        let p = residual(&sol, &phi, Identity::Momentum, QUAD_TOL).unwrap();
        assert!(m.abs() / phi.l1_norm() < 1e-8);
        assert!(p.abs() / phi.l1_norm() > 1e-2);
        let ok = FabricatedFront { data, u_delta: 0.0 };
        let p0 = residual(&ok, &bump(0.0, 0.5, 0.3, 0.2), Identity::Momentum, QUAD_TOL).unwrap();
        assert!(p0.abs() < 1e-8);
    }

    #[test]
    fn vacuum_needs_only_initial_terms() {
        let sol = RiemannSolution::new(
            RiemannData::new(st(1.0, -1.0, 1.0), st(1.0, 1.0, 1.0), 10.0).unwrap(),
        )
        .unwrap();
        let family = [bump(0.0, 0.0, 0.5, 0.3), bump(0.0, 1.0, 0.5, 0.3), bump(-1.5, 1.0, 0.5, 0.3)];
        let report = verify(&sol, &family, WEAK_TOL, QUAD_TOL).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn residual_is_linear() {
        let sol = ScaledFront { inner: symmetric(), factor: 1.3 };
        let p1 = bump(0.0, 0.5, 0.3, 0.2);
        let p2 = bump(0.1, 0.6, 0.25, 0.2);
        let combo = Combination(vec![(2.0, p1), (-0.7, p2)]);
        for id in [Identity::Mass, Identity::Momentum] {
            let r1 = residual(&sol, &p1, id, 1e-12).unwrap();
            let r2 = residual(&sol, &p2, id, 1e-12).unwrap();
            let rc = residual(&sol, &combo, id, 1e-12).unwrap();
            assert!((rc - (2.0 * r1 - 0.7 * r2)).abs() < 1e-10, "{id:?}: {rc} {r1} {r2}");
        }
        assert!(residual(&sol, &p1, Identity::Mass, 1e-12).unwrap().abs() > 1e-3);
    }

    #[test]
    fn integration_by_parts_along_front() {
        let sol = symmetric();
        for phi in [bump(0.0, 0.5, 0.3, 0.2), bump(0.05, 0.1, 0.3, 0.3)] {
            let (lhs, rhs) = front_integration_by_parts(&sol, &phi, |_| 2.0, 1e-12).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8, "{lhs} vs {rhs}");
            assert!(rhs.abs() > 1e-3);
        }
    }

    #[test]
    fn lattice_shape() {
        let fam = bump_lattice(|t| 2.0 / 3.0 * t, 1.0, 1.0);
        assert_eq!(fam.len(), 20);
        assert_eq!(fam.iter().filter(|p| p.center.1 - p.radii.1 < 0.0).count(), 2);
        assert!(fam.iter().all(|p| p.t_range().1 <= 1.0 + 1e-12));
        assert_eq!(fam, bump_lattice(|t| 2.0 / 3.0 * t, 1.0, 1.0));
    }
}
