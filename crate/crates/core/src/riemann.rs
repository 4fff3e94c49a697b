//! Exact solution of the compactly supported 1D Riemann problem.
//!
//! When characteristics overlap (`[U] > 0`) the solution is two constant
//! slabs joined at a δ-front moving with constant speed; the front collects
//! mass at rate `[ρU] − [ρ]u_δ` and total energy at rate
//! `[(ρU²/2+H)U] − [ρU²/2+H]u_δ`. Otherwise the slabs separate and a vacuum
//! fan opens between them. Both slabs translate rigidly with their own
//! velocities, so the support edges sit at `−L + U⁻t` and `L + U⁺t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{
    entropy_margin, entropy_scale, jump, DeltaFront1D, OuterState, Piece, RiemannData,
    Solution1D, ENTROPY_TOL,
};

/// Outer and front energies at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudget {
    pub w_kin_outer: f64,
    pub w_int_outer: f64,
    pub w_kin_front: f64,
    pub w_int_front: f64,
}

impl EnergyBudget {
    pub fn total(&self) -> f64 {
        self.w_kin_outer + self.w_int_outer + self.w_kin_front + self.w_int_front
    }
}

/// Brackets of the conserved densities and their fluxes across the data jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Brackets {
    /// [ρ]
    pub mass: f64,
    /// [ρU]
    pub momentum: f64,
    /// [ρU²]
    pub momentum_flux: f64,
    /// [ρU²/2 + H]
    pub energy: f64,
    /// [(ρU²/2 + H)U]
    pub energy_flux: f64,
}

impl Brackets {
    pub fn new(left: &OuterState, right: &OuterState) -> Self {
        Self {
            mass: jump(left.rho, right.rho),
            momentum: jump(left.momentum(), right.momentum()),
            momentum_flux: jump(left.momentum_flux(), right.momentum_flux()),
            energy: jump(left.energy(), right.energy()),
            energy_flux: jump(left.energy_flux(), right.energy_flux()),
        }
    }

    /// Rankine–Hugoniot deficits `(mass, momentum, energy)` for a front
    /// moving with `u_delta` (normal +1).
    pub fn deficits(&self, u_delta: f64) -> (f64, f64, f64) {
        (
            self.momentum - self.mass * u_delta,
            self.momentum_flux - self.momentum * u_delta,
            self.energy_flux - self.energy * u_delta,
        )
    }
}

/// Speed of the δ-front produced by constant states with `[U] > 0`.
///
/// Constant outer states make `e` and `e·u_δ` linear in time, so the mass and
/// momentum conditions combine into `[ρ]u² − 2[ρU]u + [ρU²] = 0`. Its
/// discriminant is `ρ⁻ρ⁺[U]²`; of the two roots the one inside the
/// characteristic-overlap interval is returned.
pub fn front_speed(data: &RiemannData) -> Result<f64> {
    let (l, r) = (&data.left, &data.right);
    let ju = data.jump_u();
    if ju <= 0.0 {
        return Err(Error::NoOverlap { jump_u: ju });
    }
    if l.rho == 0.0 && r.rho == 0.0 {
        return Err(Error::DegenerateData("both densities vanish".into()));
    }
    let b = Brackets::new(l, r);
    if b.mass == 0.0 {
        return Ok(0.5 * (l.u + r.u));
    }
    let disc = (b.momentum * b.momentum - b.mass * b.momentum_flux).max(0.0);
    let q = b.momentum + b.momentum.signum() * disc.sqrt();
    let roots = if q == 0.0 {
        [0.0, 0.0]
    } else {
        [q / b.mass, b.momentum_flux / q]
    };
    let best = roots
        .into_iter()
        .max_by(|a, c| entropy_margin(l, r, *a, 1.0).total_cmp(&entropy_margin(l, r, *c, 1.0)))
        .expect("two roots");
    let margin = entropy_margin(l, r, best, 1.0);
    if margin < -ENTROPY_TOL * entropy_scale(l, r) {
        return Err(Error::EntropyViolation { t: 0.0, margin });
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    Delta { u_delta: f64, window: f64 },
    Vacuum,
}

/// Space-time solution of the Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    data: RiemannData,
    brackets: Brackets,
    branch: Branch,
}

impl RiemannSolution {
    pub fn new(data: RiemannData) -> Result<Self> {
        data.validate()?;
        let brackets = Brackets::new(&data.left, &data.right);
        let branch = if data.jump_u() > 0.0 {
            let u = front_speed(&data)?;
            let l = data.half_length;
            // each slab is consumed at its relative speed to the front
            let wl = l / (data.left.u - u);
            let wr = l / (u - data.right.u);
            let window = [wl, wr]
                .into_iter()
                .filter(|w| *w > 0.0)
                .fold(f64::INFINITY, f64::min);
            Branch::Delta { u_delta: u, window }
        } else {
            Branch::Vacuum
        };
        Ok(Self {
            data,
            brackets,
            branch,
        })
    }

    pub fn data(&self) -> &RiemannData {
        &self.data
    }

    pub fn brackets(&self) -> &Brackets {
        &self.brackets
    }

    pub fn has_front(&self) -> bool {
        matches!(self.branch, Branch::Delta { .. })
    }

    pub fn front_speed(&self) -> Option<f64> {
        match self.branch {
            Branch::Delta { u_delta, .. } => Some(u_delta),
            Branch::Vacuum => None,
        }
    }

    /// Last time at which both slabs still exist. Infinite for the vacuum
    /// branch.
    pub fn validity_window(&self) -> f64 {
        match self.branch {
            Branch::Delta { window, .. } => window,
            Branch::Vacuum => f64::INFINITY,
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let window = self.validity_window();
        if !(t >= 0.0 && t <= window) {
            return Err(Error::OutOfRange { t, window });
        }
        Ok(())
    }

    /// Front at time `t`, `None` on the vacuum branch.
    pub fn front(&self, t: f64) -> Result<Option<DeltaFront1D>> {
        self.check_time(t)?;
        let Branch::Delta { u_delta: u, .. } = self.branch else {
            return Ok(None);
        };
        let (dm, _, de) = self.brackets.deficits(u);
        let e = dm * t;
        let h = de * t - 0.5 * e * u * u;
        Ok(Some(DeltaFront1D {
            x: u * t,
            u_delta: u,
            e,
            h,
        }))
    }

    /// Snapshot at time `t`.
    pub fn snapshot(&self, t: f64) -> Result<Solution1D> {
        self.check_time(t)?;
        let d = &self.data;
        let (l, r) = (d.left, d.right);
        let a = -d.half_length + l.u * t;
        let b = d.half_length + r.u * t;
        let (pieces, front) = match self.branch {
            Branch::Delta { u_delta, .. } => {
                let xf = u_delta * t;
                (
                    vec![Piece::state(a, xf, l), Piece::state(xf, b, r)],
                    self.front(t)?,
                )
            }
            Branch::Vacuum => (
                vec![
                    Piece::state(a, l.u * t, l),
                    Piece::fan(l.u * t, r.u * t, l.u, r.u),
                    Piece::state(r.u * t, b, r),
                ],
                None,
            ),
        };
        Ok(Solution1D {
            time: t,
            pieces,
            front,
        })
    }
}

/// Snapshot of the Riemann solution at time `t`.
pub fn solve_riemann(data: &RiemannData, t: f64) -> Result<Solution1D> {
    RiemannSolution::new(*data)?.snapshot(t)
}

/// Kinetic and internal energy of the slabs and the front at time `t`.
///
/// Equal densities use the closed forms linear in `t`; otherwise the budget
/// is integrated exactly over the pieces of the snapshot.
pub fn energy_budget(data: &RiemannData, t: f64) -> Result<EnergyBudget> {
    let ju = data.jump_u();
    if ju <= 0.0 {
        return Err(Error::NoOverlap { jump_u: ju });
    }
    let sol = RiemannSolution::new(*data)?;
    let snap = sol.snapshot(t)?;
    let (l, r) = (&data.left, &data.right);
    if l.rho == r.rho {
        let rho = l.rho;
        let w_int0 = data.half_length * (l.h_density + r.h_density);
        let w_kin0 = 0.5 * data.half_length * rho * (l.u * l.u + r.u * r.u);
        let mean = 0.5 * (l.u + r.u);
        return Ok(EnergyBudget {
            w_kin_outer: w_kin0 - rho * ju * (l.u * l.u + r.u * r.u) / 4.0 * t,
            w_int_outer: w_int0 - 0.5 * (l.h_density + r.h_density) * ju * t,
            w_kin_front: 0.5 * ju * rho * mean * mean * t,
            w_int_front: 0.5 * ju * (rho * ju * ju / 4.0 + l.h_density + r.h_density) * t,
        });
    }
    Ok(piecewise_budget(&snap))
}

/// Exact energy budget of a snapshot whose pieces are constant states or
/// vacuum fans.
pub fn piecewise_budget(snap: &Solution1D) -> EnergyBudget {
    let (mut kin, mut int) = (0.0, 0.0);
    for p in &snap.pieces {
        if let crate::state::PieceKind::State(s) = p.kind {
            kin += s.kinetic() * p.width();
            int += s.h_density * p.width();
        }
    }
    let (fk, fi) = snap.front.map_or((0.0, 0.0), |f| (f.kinetic(), f.h));
    EnergyBudget {
        w_kin_outer: kin,
        w_int_outer: int,
        w_kin_front: fk,
        w_int_front: fi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn st(rho: f64, u: f64, h: f64) -> OuterState {
        OuterState::new(rho, u, h).unwrap()
    }

    fn symmetric() -> RiemannData {
        RiemannData::new(st(1.0, 1.0, 1.0), st(1.0, -1.0, 1.0), 10.0).unwrap()
    }

    fn asymmetric() -> RiemannData {
        RiemannData::new(st(4.0, 1.0, 0.0), st(1.0, 0.0, 0.0), 10.0).unwrap()
    }

    #[test]
    fn speed_examples() {
        assert_eq!(front_speed(&symmetric()).unwrap(), 0.0);
        assert!((front_speed(&asymmetric()).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        for rho in [0.1, 1.0, 7.5] {
            let d = RiemannData::new(st(rho, 2.0, 0.0), st(rho, -2.0, 0.0), 1.0).unwrap();
            assert_eq!(front_speed(&d).unwrap(), 0.0);
        }
    }

    #[test]
    fn speed_errors() {
        let d = RiemannData::new(st(1.0, -1.0, 0.0), st(1.0, 1.0, 0.0), 1.0).unwrap();
        assert!(matches!(front_speed(&d), Err(Error::NoOverlap { .. })));
        let d = RiemannData::new(st(0.0, 1.0, 0.0), st(0.0, -1.0, 0.0), 1.0).unwrap();
        assert!(matches!(front_speed(&d), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn one_sided_vacuum_moves_with_the_slab() {
        let d = RiemannData::new(st(2.0, 1.0, 0.0), st(0.0, -1.0, 0.0), 1.0).unwrap();
        assert!((front_speed(&d).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_snapshot() {
        let s = solve_riemann(&symmetric(), 1.0).unwrap();
        let f = s.front.unwrap();
        assert_eq!(f.x, 0.0);
        assert!((f.e - 2.0).abs() < 1e-14);
        assert!((f.h - 3.0).abs() < 1e-14);
        assert_eq!(s.support(), Some((-9.0, 9.0)));
    }

    #[test]
    fn asymmetric_snapshot() {
        let s = solve_riemann(&asymmetric(), 1.0).unwrap();
        let f = s.front.unwrap();
        assert!((f.x - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.e - 2.0).abs() < 1e-14);
        assert!((f.h - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn vacuum_branch() {
        let d = RiemannData::new(st(1.0, -1.0, 2.0), st(3.0, 1.0, 1.0), 5.0).unwrap();
        let s = solve_riemann(&d, 1.0).unwrap();
        assert!(s.front.is_none());
        assert_eq!(s.pieces.len(), 3);
        let fan = s.pieces[1];
        assert_eq!((fan.left, fan.right), (-1.0, 1.0));
        assert!(s.state_at(0.0).is_vacuum());
        assert!(s.state_at(0.3).rho == 0.0 && s.state_at(0.3).h_density == 0.0);
        assert_eq!(s.support(), Some((-6.0, 6.0)));
        assert!(energy_budget(&d, 1.0).is_err());
    }

    #[test]
    fn symmetric_budget() {
        let b = energy_budget(&symmetric(), 1.0).unwrap();
        assert!((b.w_kin_outer - 9.0).abs() < 1e-12);
        assert!((b.w_int_outer - 18.0).abs() < 1e-12);
        assert!(b.w_kin_front.abs() < 1e-12);
        assert!((b.w_int_front - 3.0).abs() < 1e-12);
        assert!((b.total() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_agree_with_piecewise_integration() {
        let d = RiemannData::new(st(1.5, 2.0, 0.7), st(1.5, -0.5, 0.2), 4.0).unwrap();
        for t in [0.0, 0.3, 1.1, 2.0] {
            let closed = energy_budget(&d, t).unwrap();
            let pw = piecewise_budget(&solve_riemann(&d, t).unwrap());
            assert!((closed.w_kin_outer - pw.w_kin_outer).abs() < 1e-12);
            assert!((closed.w_int_outer - pw.w_int_outer).abs() < 1e-12);
            assert!((closed.w_kin_front - pw.w_kin_front).abs() < 1e-12);
            assert!((closed.w_int_front - pw.w_int_front).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_budget_front_internal_energy() {
        let b = energy_budget(&asymmetric(), 1.0).unwrap();
        assert!((b.w_int_front - 2.0 / 9.0).abs() < 1e-14);
        let b0 = energy_budget(&asymmetric(), 0.0).unwrap();
        assert!((b.total() - b0.total()).abs() < 1e-12 * b0.total());
    }

    #[test]
    fn budget_at_zero_is_initial_integral() {
        let d = asymmetric();
        let b = energy_budget(&d, 0.0).unwrap();
        assert_eq!(b.w_kin_front, 0.0);
        assert_eq!(b.w_int_front, 0.0);
        assert!((b.w_kin_outer - 0.5 * 4.0 * 10.0).abs() < 1e-12);
    }

    #[test]
    fn window_is_enforced() {
        let d = symmetric();
        let sol = RiemannSolution::new(d).unwrap();
        assert_eq!(sol.validity_window(), 10.0);
        assert!(matches!(energy_budget(&d, 10.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(energy_budget(&d, -0.1), Err(Error::OutOfRange { .. })));
    }

    fn admissible() -> impl Strategy<Value = RiemannData> {
        (0.05f64..5.0, 0.05f64..5.0, -3f64..3.0, 0.01f64..4.0, 0f64..2.0, 0f64..2.0, 1f64..20.0)
            .prop_map(|(rl, rr, ur, du, hl, hr, l)| {
                RiemannData::new(st(rl, ur + du, hl), st(rr, ur, hr), l).unwrap()
            })
    }

    proptest! {
        #[test]
        fn speed_is_entropic_and_weighted_mean(d in admissible()) {
            let u = front_speed(&d).unwrap();
            prop_assert!(crate::state::entropy_ok(&d.left, &d.right, u, 1.0));
            let (sl, sr) = (d.left.rho.sqrt(), d.right.rho.sqrt());
            let mean = (sl * d.left.u + sr * d.right.u) / (sl + sr);
            prop_assert!((u - mean).abs() <= 1e-12 * (1.0 + mean.abs()));
        }

        #[test]
        fn balances_hold_in_window(d in admissible(), frac in 0f64..1.0) {
            let sol = RiemannSolution::new(d).unwrap();
            let t = frac * sol.validity_window().min(100.0);
            let s0 = sol.snapshot(0.0).unwrap();
            let s = sol.snapshot(t).unwrap();
            let mass = |s: &Solution1D| -> f64 {
                s.pieces.iter().map(|p| p.state_at(p.left).rho * p.width()).sum::<f64>()
                    + s.front.map_or(0.0, |f| f.e)
            };
            let mom = |s: &Solution1D| -> f64 {
                s.pieces.iter().map(|p| p.state_at(p.left).momentum() * p.width()).sum::<f64>()
                    + s.front.map_or(0.0, |f| f.momentum())
            };
            let m0 = mass(&s0);
            prop_assert!((mass(&s) - m0).abs() <= 1e-12 * m0);
            let pscale = d.half_length * (d.left.rho * d.left.u.abs() + d.right.rho * d.right.u.abs());
            prop_assert!((mom(&s) - mom(&s0)).abs() <= 1e-12 * pscale.max(1e-300));
            let e0 = energy_budget(&d, 0.0).unwrap().total();
            let et = energy_budget(&d, t).unwrap().total();
            prop_assert!((et - e0).abs() <= 1e-12 * e0.max(1e-300));
            let f = s.front.unwrap();
            prop_assert!(f.e >= 0.0 && f.h >= -1e-12 * e0);
        }

        #[test]
        fn outer_energies_decrease(d in admissible()) {
            // finite differences of the closed forms
            let sol = RiemannSolution::new(d).unwrap();
            let w = sol.validity_window().min(10.0);
            let dt = w / 50.0;
            let mut prev = energy_budget(&d, 0.0).unwrap();
            let mut prev_e = 0.0;
            for k in 1..=50 {
                let t = (k as f64 * dt).min(w);
                let b = energy_budget(&d, t).unwrap();
                let e = sol.front(t).unwrap().unwrap().e;
                let scale = 1e-12 * prev.total().max(1.0);
                prop_assert!(b.w_kin_outer <= prev.w_kin_outer + scale);
                prop_assert!(b.w_int_outer <= prev.w_int_outer + scale);
                prop_assert!(e >= prev_e);
                prev = b;
                prev_e = e;
            }
        }
    }
}
