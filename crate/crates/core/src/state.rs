//! Shared domain types: outer states, Riemann data, δ-fronts and 1D solution
//! snapshots, together with jump brackets and the entropy predicates.

use std::ops::Sub;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance of the non-strict entropy predicate, relative to
/// `max(|U-|, |U+|, 1)`.
pub const ENTROPY_TOL: f64 = 1e-9;

/// Smooth-region state `(ρ, U, H)`: mass density, velocity and internal
/// energy density. In 1D `u` is the velocity; in the radial reduction it is
/// the radial component `U·ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterState {
    pub rho: f64,
    pub u: f64,
    pub h_density: f64,
}

impl OuterState {
    pub fn new(rho: f64, u: f64, h_density: f64) -> Result<Self> {
        let s = Self { rho, u, h_density };
        s.validate()?;
        Ok(s)
    }

    /// Vacuum moving with velocity `u` (velocity is immaterial where ρ = H = 0).
    pub const fn vacuum(u: f64) -> Self {
        Self {
            rho: 0.0,
            u,
            h_density: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.u.is_finite() && self.h_density.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite component in {self:?}")));
        }
        if self.rho < 0.0 {
            return Err(Error::InvalidState("rho must be nonnegative".into()));
        }
        if self.h_density < 0.0 {
            return Err(Error::InvalidState("h_density must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn is_vacuum(&self) -> bool {
        self.rho == 0.0 && self.h_density == 0.0
    }

    /// ρU
    pub fn momentum(&self) -> f64 {
        self.rho * self.u
    }

    /// ρU²: momentum flux.
    pub fn momentum_flux(&self) -> f64 {
        self.rho * self.u * self.u
    }

    /// ρ|U|²/2
    pub fn kinetic(&self) -> f64 {
        0.5 * self.rho * self.u * self.u
    }

    /// ρ|U|²/2 + H
    pub fn energy(&self) -> f64 {
        self.kinetic() + self.h_density
    }

    /// (ρ|U|²/2 + H)U
    pub fn energy_flux(&self) -> f64 {
        self.energy() * self.u
    }
}

/// Bracket `[f] = f⁻ − f⁺` across a front.
pub fn jump<T: Sub<Output = T>>(left: T, right: T) -> T {
    left - right
}

/// Signed distance to the boundary of the characteristic-overlap interval
/// `U⁺·ν < U_δ·ν < U⁻·ν`. Positive iff the strict condition holds.
pub fn entropy_margin(left: &OuterState, right: &OuterState, u_delta: f64, normal: f64) -> f64 {
    let ud = u_delta * normal;
    (ud - right.u * normal).min(left.u * normal - ud)
}

/// Strict geometric entropy condition `U⁺·ν < U_δ·ν < U⁻·ν`.
pub fn entropy_ok(left: &OuterState, right: &OuterState, u_delta: f64, normal: f64) -> bool {
    entropy_margin(left, right, u_delta, normal) > 0.0
}

/// Scale against which the entropy tolerance is measured.
pub fn entropy_scale(left: &OuterState, right: &OuterState) -> f64 {
    left.u.abs().max(right.u.abs()).max(1.0)
}

/// Non-strict entropy condition for numeric trajectories: the margin may dip
/// to `-tol * max(|U-|, |U+|, 1)`.
pub fn entropy_ok_tol(
    left: &OuterState,
    right: &OuterState,
    u_delta: f64,
    normal: f64,
    tol: f64,
) -> bool {
    entropy_margin(left, right, u_delta, normal) >= -tol * entropy_scale(left, right)
}

/// Compactly supported 1D Riemann data: `left` on `[-L, 0)`, `right` on
/// `[0, L]`, vacuum elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannData {
    pub left: OuterState,
    pub right: OuterState,
    pub half_length: f64,
}

impl RiemannData {
    pub fn new(left: OuterState, right: OuterState, half_length: f64) -> Result<Self> {
        let d = Self {
            left,
            right,
            half_length,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        if !(self.half_length.is_finite() && self.half_length > 0.0) {
            return Err(Error::InvalidState("half_length must be positive".into()));
        }
        Ok(())
    }

    /// `[U] = U⁻ − U⁺`
    pub fn jump_u(&self) -> f64 {
        jump(self.left.u, self.right.u)
    }

    /// Initial data as a piecewise-constant profile on `[-L, L]`.
    pub fn profile(&self) -> Vec<Piece> {
        let l = self.half_length;
        vec![
            Piece::state(-l, 0.0, self.left),
            Piece::state(0.0, l, self.right),
        ]
    }
}

/// Singular part of the solution in 1D: the front position and velocity and
/// the amplitudes of `e δ` in ρ and `h δ` in H.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaFront1D {
    pub x: f64,
    pub u_delta: f64,
    pub e: f64,
    pub h: f64,
}

impl DeltaFront1D {
    pub fn new(x: f64, u_delta: f64, e: f64, h: f64) -> Result<Self> {
        if !(x.is_finite() && u_delta.is_finite() && e.is_finite() && h.is_finite()) {
            return Err(Error::InvalidState("non-finite front component".into()));
        }
        if e < 0.0 {
            return Err(Error::InvalidState("front mass e must be nonnegative".into()));
        }
        if h < 0.0 {
            return Err(Error::InvalidState("front internal energy h must be nonnegative".into()));
        }
        Ok(Self { x, u_delta, e, h })
    }

    /// e·U_δ
    pub fn momentum(&self) -> f64 {
        self.e * self.u_delta
    }

    /// e|U_δ|²/2
    pub fn kinetic(&self) -> f64 {
        0.5 * self.e * self.u_delta * self.u_delta
    }

    /// e|U_δ|²/2 + h
    pub fn energy(&self) -> f64 {
        self.kinetic() + self.h
    }
}

/// Contents of one interval of a 1D snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PieceKind {
    State(OuterState),
    /// Rarefaction into vacuum: ρ = H = 0 with velocity interpolated
    /// linearly from `u_left` to `u_right` across the interval.
    VacuumFan { u_left: f64, u_right: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub left: f64,
    pub right: f64,
    pub kind: PieceKind,
}

impl Piece {
    pub fn state(left: f64, right: f64, state: OuterState) -> Self {
        Self {
            left,
            right,
            kind: PieceKind::State(state),
        }
    }

    pub fn fan(left: f64, right: f64, u_left: f64, u_right: f64) -> Self {
        Self {
            left,
            right,
            kind: PieceKind::VacuumFan { u_left, u_right },
        }
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    /// State at `x`, which is assumed to lie in the closed interval.
    pub fn state_at(&self, x: f64) -> OuterState {
        match self.kind {
            PieceKind::State(s) => s,
            PieceKind::VacuumFan { u_left, u_right } => {
                let w = self.width();
                let s = if w > 0.0 { ((x - self.left) / w).clamp(0.0, 1.0) } else { 0.5 };
                OuterState::vacuum(u_left + s * (u_right - u_left))
            }
        }
    }
}

/// Snapshot of a 1D solution at one time: smooth pieces partitioning the
/// support plus at most one δ-front. Fields vanish outside the pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution1D {
    pub time: f64,
    pub pieces: Vec<Piece>,
    pub front: Option<DeltaFront1D>,
}

impl Solution1D {
    /// Support `[a, b]` of the smooth part, `None` when there are no pieces.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((self.pieces.first()?.left, self.pieces.last()?.right))
    }

    /// Regular part of the state at `x`; vacuum outside the support.
    pub fn state_at(&self, x: f64) -> OuterState {
        self.pieces
            .iter()
            .find(|p| p.left <= x && x < p.right)
            .or_else(|| self.pieces.last().filter(|p| x == p.right))
            .map(|p| p.state_at(x))
            .unwrap_or(OuterState::vacuum(0.0))
    }

    /// Checks ordering, contiguity and the vacuum-fan convention.
    pub fn validate(&self) -> Result<()> {
        for p in &self.pieces {
            if p.right < p.left {
                return Err(Error::InvalidState(format!("inverted piece {p:?}")));
            }
            if let PieceKind::State(s) = p.kind {
                s.validate()?;
            }
        }
        for w in self.pieces.windows(2) {
            let gap = (w[1].left - w[0].right).abs();
            if gap > 1e-12 * (1.0 + w[0].right.abs()) {
                return Err(Error::InvalidState(format!(
                    "pieces not contiguous at {} / {}",
                    w[0].right, w[1].left
                )));
            }
        }
        Ok(())
    }
}
