//! Radially symmetric δ-fronts in n dimensions.
//!
//! A sphere `Γ_t = {|x| = R(t)}` with outward normal moves with normal speed
//! `G = Ṙ`. Its mean curvature is `K = −(n−1)/(2R)` and the surface
//! divergence of `a U_δ` reduces to `−2KGa = (n−1)(Ṙ/R) a`, the geometric
//! dilution of a surface density on a growing sphere. Writing the front
//! equations for the area-weighted totals `ω_n Rⁿ⁻¹ (e, eG, eG²/2 + h)`
//! removes the curvature term altogether, and those totals are what the
//! integrator advances.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::csv_table;
use crate::riemann::Brackets;
use crate::state::{entropy_margin, entropy_scale, OuterState, ENTROPY_TOL};

/// Radius below which the front counts as collapsed onto the origin.
pub const RADIUS_FLOOR: f64 = 1e-10;

/// Spherical front state. `e` and `h` are surface densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalFront {
    pub radius: f64,
    pub speed: f64,
    pub e: f64,
    pub h: f64,
    pub dim: u32,
}

impl SphericalFront {
    pub fn new(radius: f64, speed: f64, e: f64, h: f64, dim: u32) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidState("radius must be positive".into()));
        }
        if !(e >= 0.0 && h >= 0.0) {
            return Err(Error::InvalidState("surface densities must be nonnegative".into()));
        }
        if dim == 0 || !speed.is_finite() {
            return Err(Error::InvalidState("dimension must be at least 1".into()));
        }
        Ok(Self { radius, speed, e, h, dim })
    }

    /// Area `ω_n Rⁿ⁻¹` of the front.
    pub fn area(&self) -> f64 {
        sphere_area(self.radius, self.dim)
    }

    /// Front mass `m = ∮ e dΓ`.
    pub fn mass(&self) -> f64 {
        self.area() * self.e
    }

    /// Radial front momentum `∮ e G dΓ`.
    pub fn momentum(&self) -> f64 {
        self.mass() * self.speed
    }

    pub fn kinetic(&self) -> f64 {
        0.5 * self.mass() * self.speed * self.speed
    }

    pub fn internal(&self) -> f64 {
        self.area() * self.h
    }

    /// `∮ (e G²/2 + h) dΓ`
    pub fn energy(&self) -> f64 {
        self.kinetic() + self.internal()
    }
}

/// Surface area of the unit sphere in ℝⁿ (`ω_1 = 2` counts the two points).
pub fn unit_sphere_area(n: u32) -> f64 {
    let mut w = if n % 2 == 1 { 2.0 } else { 2.0 * PI };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    w
}

pub fn sphere_area(radius: f64, n: u32) -> f64 {
    unit_sphere_area(n) * radius.powi(n as i32 - 1)
}

/// Mean curvature `K = −½ ∇·ν` of the sphere of radius `R` with outward
/// normal.
pub fn mean_curvature(radius: f64, n: u32) -> f64 {
    -(f64::from(n) - 1.0) / (2.0 * radius)
}

/// `∇_Γ·(a U_δ) = −2 K G a`.
pub fn tangential_divergence(a: f64, speed: f64, curvature: f64) -> f64 {
    -2.0 * curvature * speed * a
}

/// Radial traces: states inside (`Ω⁻`) and outside (`Ω⁺`) the front, with
/// `u` the radial velocity component.
pub trait RadialTraces {
    fn interior(&self, r: f64, t: f64) -> OuterState;
    fn exterior(&self, r: f64, t: f64) -> OuterState;
}

/// Radial traces with a compact support `[0, outer_radius(t)]`.
pub trait RadialField: RadialTraces {
    fn outer_radius(&self, t: f64) -> f64;
}

/// Constant interior and exterior states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantRadial {
    pub interior: OuterState,
    pub exterior: OuterState,
    pub outer_radius: f64,
}

impl RadialTraces for ConstantRadial {
    fn interior(&self, _r: f64, _t: f64) -> OuterState {
        self.interior
    }
    fn exterior(&self, _r: f64, _t: f64) -> OuterState {
        self.exterior
    }
}

impl RadialField for ConstantRadial {
    fn outer_radius(&self, _t: f64) -> f64 {
        self.outer_radius
    }
}

/// Cold dust falling ballistically onto a vacuum core.
///
/// At `t = 0` the shell `R₀ < r < R_out` holds density `ρ₀` and internal
/// energy density `H₀`, all moving inward with speed `v`. Each shell keeps
/// its speed, so mass conservation gives
/// `ρ(r, t) = ρ₀ ((r + v t)/r)ⁿ⁻¹` (and likewise for H). The interior is
/// vacuum at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccretionField {
    pub rho0: f64,
    pub h0: f64,
    pub inflow_speed: f64,
    pub outer_radius0: f64,
    pub dim: u32,
}

impl AccretionField {
    fn compression(&self, r: f64, t: f64) -> f64 {
        ((r + self.inflow_speed * t) / r).powi(self.dim as i32 - 1)
    }

    /// Exterior mass between radius `r` and the outer edge, in closed form.
    pub fn exterior_mass(&self, r: f64, t: f64) -> f64 {
        let n = self.dim as i32;
        let vt = self.inflow_speed * t;
        unit_sphere_area(self.dim) * self.rho0 / f64::from(n)
            * (self.outer_radius0.powi(n) - (r + vt).powi(n))
    }
}

impl RadialTraces for AccretionField {
    fn interior(&self, _r: f64, _t: f64) -> OuterState {
        OuterState::vacuum(0.0)
    }
    fn exterior(&self, r: f64, t: f64) -> OuterState {
        let c = self.compression(r, t);
        OuterState {
            rho: self.rho0 * c,
            u: -self.inflow_speed,
            h_density: self.h0 * c,
        }
    }
}

impl RadialField for AccretionField {
    fn outer_radius(&self, t: f64) -> f64 {
        self.outer_radius0 - self.inflow_speed * t
    }
}

/// Time derivatives of the front state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalRates {
    pub dr_dt: f64,
    pub de_dt: f64,
    pub d_eg_dt: f64,
    pub d_energy_dt: f64,
}

fn radial_deficits<T: RadialTraces + ?Sized>(
    radius: f64,
    speed: f64,
    traces: &T,
    t: f64,
    entropy_tol: f64,
) -> Result<(f64, f64, f64)> {
    if radius <= RADIUS_FLOOR {
        return Err(Error::RadiusCollapse { t, radius });
    }
    let l = traces.interior(radius, t);
    let r = traces.exterior(radius, t);
    let margin = entropy_margin(&l, &r, speed, 1.0);
    if margin < -entropy_tol * entropy_scale(&l, &r) {
        return Err(Error::EntropyViolation { t, margin });
    }
    Ok(Brackets::new(&l, &r).deficits(speed))
}

/// Front equations in curvature form:
/// `d a/dt − 2KG a = deficit` for `a = e, eG, eG²/2 + h`.
pub fn spherical_rhs<T: RadialTraces + ?Sized>(
    front: &SphericalFront,
    traces: &T,
    t: f64,
) -> Result<SphericalRates> {
    let (dm, dp, de) = radial_deficits(front.radius, front.speed, traces, t, ENTROPY_TOL)?;
    let k = mean_curvature(front.radius, front.dim);
    let g = front.speed;
    let eg = front.e * g;
    let energy = 0.5 * front.e * g * g + front.h;
    Ok(SphericalRates {
        dr_dt: g,
        de_dt: dm - tangential_divergence(front.e, g, k),
        d_eg_dt: dp - tangential_divergence(eg, g, k),
        d_energy_dt: de - tangential_divergence(energy, g, k),
    })
}

/// Terminal state when the front reaches the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub t: f64,
    pub radius: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

/// Area-weighted trajectory `(R, m, p_r, front energy)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalTrajectory {
    pub dim: u32,
    pub times: Vec<f64>,
    pub radius: Vec<f64>,
    pub mass: Vec<f64>,
    pub momentum: Vec<f64>,
    pub energy: Vec<f64>,
    pub collapse: Option<CollapseReport>,
}

impl SphericalTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Front state (surface densities) at grid index `i`.
    pub fn front(&self, i: usize) -> SphericalFront {
        let r = self.radius[i];
        let a = sphere_area(r, self.dim);
        let m = self.mass[i];
        let g = self.momentum[i] / m;
        SphericalFront {
            radius: r,
            speed: g,
            e: m / a,
            h: (self.energy[i] - 0.5 * m * g * g) / a,
            dim: self.dim,
        }
    }

    /// CSV with columns `t, R, G, e, h, m, p_r, front_energy`.
    pub fn to_csv(&self) -> String {
        csv_table(
            &["t", "R", "G", "e", "h", "m", "p_r", "front_energy"],
            (0..self.len()).map(|i| {
                let f = self.front(i);
                vec![
                    self.times[i],
                    f.radius,
                    f.speed,
                    f.e,
                    f.h,
                    self.mass[i],
                    self.momentum[i],
                    self.energy[i],
                ]
            }),
        )
    }
}

type State = [f64; 4];

struct Radial<'a, T: ?Sized> {
    traces: &'a T,
    dim: u32,
    speed_boot: f64,
    entropy_tol: f64,
}

impl<T: RadialTraces + ?Sized> Radial<'_, T> {
    fn speed(&self, y: &State) -> f64 {
        if y[1] > 1e-14 {
            y[2] / y[1]
        } else {
            self.speed_boot
        }
    }

    fn rhs(&self, t: f64, y: &State) -> Result<State> {
        let g = self.speed(y);
        let (dm, dp, de) = radial_deficits(y[0], g, self.traces, t, self.entropy_tol)?;
        let a = sphere_area(y[0], self.dim);
        Ok([g, a * dm, a * dp, a * de])
    }

    fn rk4(&self, t: f64, y: &State, h: f64) -> Result<State> {
        let step = |y: &State, k: &State, c: f64| -> State {
            [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2], y[3] + c * k[3]]
        };
        let k1 = self.rhs(t, y)?;
        let k2 = self.rhs(t + 0.5 * h, &step(y, &k1, 0.5 * h))?;
        let k3 = self.rhs(t + 0.5 * h, &step(y, &k2, 0.5 * h))?;
        let k4 = self.rhs(t + h, &step(y, &k3, h))?;
        let mut out = *y;
        for i in 0..4 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if out[0] <= RADIUS_FLOOR {
            return Err(Error::RadiusCollapse { t: t + h, radius: out[0] });
        }
        Ok(out)
    }
}

/// Integrates the area-weighted front equations from `front0` at `t = 0`.
///
/// When the radius would drop below [`RADIUS_FLOOR`] the last step is cut
/// back (by bisection on the step length) to end just above the floor and
/// the integration stops with a [`CollapseReport`].
pub fn integrate_spherical<T: RadialTraces + ?Sized>(
    front0: SphericalFront,
    traces: &T,
    t_end: f64,
    dt: f64,
) -> Result<SphericalTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidState("dt must be positive".into()));
    }
    let sys = Radial {
        traces,
        dim: front0.dim,
        speed_boot: front0.speed,
        entropy_tol: ENTROPY_TOL,
    };
    let mut y: State = [front0.radius, front0.mass(), front0.momentum(), front0.energy()];
    sys.rhs(0.0, &y)?;
    let mut traj = SphericalTrajectory {
        dim: front0.dim,
        times: vec![0.0],
        radius: vec![y[0]],
        mass: vec![y[1]],
        momentum: vec![y[2]],
        energy: vec![y[3]],
        collapse: None,
    };
    let n = (t_end / dt).ceil().max(0.0) as usize;
    let mut t = 0.0;
    for i in 1..=n {
        let t_next = if i == n { t_end } else { i as f64 * dt };
        let h = t_next - t;
        let next = match sys.rk4(t, &y, h) {
            Ok(next) => Some(next),
            Err(Error::RadiusCollapse { .. }) => None,
            Err(e) => return Err(e),
        };
        let (y_new, t_new) = match next {
            Some(next) => (next, t_next),
            None => {
                // Largest sub-step keeping every stage above the floor; the
                // stages lead the end state by O(h²), so repeat from the new
                // state until the end state sits near the floor.
                let (mut tc, mut best) = (t, y);
                let mut h_left = h;
                for _ in 0..8 {
                    let (mut lo, mut hi) = (0.0, h_left);
                    let mut cand = best;
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        match sys.rk4(tc, &best, mid) {
                            Ok(s) => {
                                lo = mid;
                                cand = s;
                            }
                            Err(Error::RadiusCollapse { .. }) => hi = mid,
                            Err(e) => return Err(e),
                        }
                    }
                    tc += lo;
                    h_left -= lo;
                    best = cand;
                    if best[0] <= 2.0 * RADIUS_FLOOR || lo == 0.0 {
                        break;
                    }
                }
                traj.times.push(tc);
                traj.radius.push(best[0]);
                traj.mass.push(best[1]);
                traj.momentum.push(best[2]);
                traj.energy.push(best[3]);
                traj.collapse = Some(CollapseReport {
                    t: tc,
                    radius: best[0],
                    mass: best[1],
                    momentum: best[2],
                    energy: best[3],
                });
                return Ok(traj);
            }
        };
        y = y_new;
        t = t_new;
        traj.times.push(t);
        traj.radius.push(y[0]);
        traj.mass.push(y[1]);
        traj.momentum.push(y[2]);
        traj.energy.push(y[3]);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rh_ode::{self, ConstantTraces};
    use crate::state::DeltaFront1D;

    #[test]
    fn curvature_examples() {
        assert_eq!(mean_curvature(1.0, 3), -1.0);
        assert_eq!(mean_curvature(2.0, 2), -0.25);
        assert!(mean_curvature(1e300, 3).abs() < 1e-299);
        assert_eq!(mean_curvature(1.0, 1), 0.0);
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(tangential_divergence(1.0, 1.0, -1.0), 2.0);
        assert_eq!(tangential_divergence(3.0, 0.0, -7.0), 0.0);
        // sphere n = 3: (2/R) Ṙ e
        let (r, g, e) = (2.0, -0.3, 1.7);
        let d = tangential_divergence(e, g, mean_curvature(r, 3));
        assert!((d - 2.0 / r * g * e).abs() < 1e-15);
    }

    #[test]
    fn unit_sphere_areas() {
        assert_eq!(unit_sphere_area(1), 2.0);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((unit_sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn accretion_rates() {
        let field = AccretionField { rho0: 1.3, h0: 0.0, inflow_speed: 0.8, outer_radius0: 5.0, dim: 3 };
        let f = SphericalFront::new(1.5, -0.2, 0.4, 0.0, 3).unwrap();
        let r = spherical_rhs(&f, &field, 0.0).unwrap();
        // de/dt + (2Ṙ/R) e = ρ₀ (v + Ṙ)
        let lhs = r.de_dt + 2.0 * f.speed / f.radius * f.e;
        assert!((lhs - 1.3 * (0.8 - 0.2)).abs() < 1e-14);
    }

    #[test]
    fn zero_jumps_dilute_geometrically() {
        let s = OuterState::new(1.0, 0.5, 0.0).unwrap();
        let tr = ConstantRadial { interior: s, exterior: s, outer_radius: 10.0 };
        let f = SphericalFront::new(2.0, 0.5, 1.0, 0.2, 3).unwrap();
        let r = spherical_rhs(&f, &tr, 0.0).unwrap();
        assert!((r.de_dt - (-0.5)).abs() < 1e-15);
        let traj = integrate_spherical(f, &tr, 1.0, 0.01).unwrap();
        let last = traj.len() - 1;
        assert!((traj.radius[last] - 2.5).abs() < 1e-12);
        assert!((traj.mass[last] - traj.mass[0]).abs() < 1e-12);
        let fl = traj.front(last);
        assert!((fl.e * fl.radius.powi(2) - 4.0).abs() < 1e-12);

        let still = OuterState::new(1.0, 0.0, 1.0).unwrap();
        let tr = ConstantRadial { interior: still, exterior: still, outer_radius: 10.0 };
        let f = SphericalFront::new(2.0, 0.0, 1.0, 0.2, 2).unwrap();
        let r = spherical_rhs(&f, &tr, 0.0).unwrap();
        assert_eq!((r.dr_dt, r.de_dt, r.d_eg_dt, r.d_energy_dt), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn one_dimensional_reduction_matches_rh_ode() {
        let inside = OuterState::new(1.0, 0.5, 0.3).unwrap();
        let outside = OuterState::new(2.0, -1.0, 0.1).unwrap();
        let radial = ConstantRadial { interior: inside, exterior: outside, outer_radius: 10.0 };
        let lines = ConstantTraces { left: inside, right: outside, half_length: 10.0 };
        let f0 = SphericalFront::new(1.0, 0.1, 0.7, 0.05, 1).unwrap();
        let sph = integrate_spherical(f0, &radial, 0.5, 1e-3).unwrap();
        let d0 = DeltaFront1D { x: 1.0, u_delta: 0.1, e: 0.7, h: 0.05 };
        let lin = rh_ode::integrate(d0, &lines, 0.5, 1e-3).unwrap();
        assert_eq!(sph.len(), lin.len());
        for i in 0..sph.len() {
            let f = sph.front(i);
            let g = lin.states[i];
            assert!((f.radius - g.x).abs() < 1e-13);
            assert!((f.e - g.e).abs() < 1e-13);
            assert!((f.speed - g.u_delta).abs() < 1e-13);
            assert!((f.h - g.h).abs() < 1e-12);
            assert!((sph.mass[i] - 2.0 * g.e).abs() < 1e-13);
        }
    }

    #[test]
    fn surface_transport_by_finite_differences() {
        // d/dt ∮ e dΓ = ∮ (δe/δt − 2KGe) dΓ, both sides from the trajectory
        let field = AccretionField { rho0: 1.0, h0: 0.1, inflow_speed: 1.0, outer_radius0: 5.0, dim: 3 };
        let f0 = SphericalFront::new(1.0, -0.5, 1.0, 0.0, 3).unwrap();
        let dt = 1e-4;
        let traj = integrate_spherical(f0, &field, 0.5, dt).unwrap();
        for i in (500..4500).step_by(370) {
            let dm = (traj.mass[i + 1] - traj.mass[i - 1]) / (2.0 * dt);
            let (a, b, c) = (traj.front(i - 1), traj.front(i), traj.front(i + 1));
            let de = (c.e - a.e) / (2.0 * dt);
            let k = mean_curvature(b.radius, 3);
            let rhs = b.area() * (de - 2.0 * k * b.speed * b.e);
            assert!((dm - rhs).abs() <= 1e-6 * dm.abs(), "i={i}: {dm} vs {rhs}");
        }
    }

    #[test]
    fn collapse_is_reported() {
        let field = AccretionField { rho0: 1.0, h0: 0.0, inflow_speed: 1.0, outer_radius0: 5.0, dim: 3 };
        let f0 = SphericalFront::new(1.0, -0.5, 1.0, 0.0, 3).unwrap();
        let traj = integrate_spherical(f0, &field, 5.0, 1e-2).unwrap();
        let c = traj.collapse.expect("front reaches the origin");
        assert!(c.radius > RADIUS_FLOOR && c.radius < 2.0 * RADIUS_FLOOR, "{}", c.radius);
        assert!(c.t > 1.0 && c.t < 2.0);
        let m_total = c.mass + field.exterior_mass(c.radius, c.t);
        let m0 = traj.mass[0] + field.exterior_mass(1.0, 0.0);
        assert!((m_total - m0).abs() < 1e-8 * m0);
    }

    #[test]
    fn reversed_flow_violates_entropy() {
        let field = AccretionField { rho0: 1.0, h0: 0.0, inflow_speed: 1.0, outer_radius0: 5.0, dim: 3 };
        let f0 = SphericalFront::new(1.0, 0.5, 1.0, 0.0, 3).unwrap();
        assert!(matches!(
            integrate_spherical(f0, &field, 1.0, 1e-2),
            Err(Error::EntropyViolation { .. })
        ));
    }
}
