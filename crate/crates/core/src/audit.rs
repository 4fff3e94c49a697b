//! Mass, momentum and energy bookkeeping for any solution representation,
//! and checks of the balance laws between the smooth region and the front.
//!
//! Each record splits the totals into the regular part (`M, P, W_kin, W_int`,
//! integrated over the smooth region) and the front part (`m, p, w_kin,
//! w_int`). For a δ-shock satisfying the entropy condition the sums are
//! constant while `m` grows and both outer energies decay.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::{Integrator, QuadSettings};
use crate::rh_ode::OuterField1D;
use crate::state::{DeltaFront1D, OuterState, PieceKind, Solution1D};
use crate::sticky::ParticleSystem;
use crate::surface_front::{sphere_area, RadialField, SphericalFront};

/// Totals at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BalanceRecord {
    pub t: f64,
    pub mass_outer: f64,
    pub mass_front: f64,
    pub momentum_outer: f64,
    pub momentum_front: f64,
    pub w_kin_outer: f64,
    pub w_kin_front: f64,
    pub w_int_outer: f64,
    pub w_int_front: f64,
}

impl BalanceRecord {
    pub fn total_mass(&self) -> f64 {
        self.mass_outer + self.mass_front
    }

    pub fn total_momentum(&self) -> f64 {
        self.momentum_outer + self.momentum_front
    }

    pub fn total_energy(&self) -> f64 {
        self.w_kin_outer + self.w_kin_front + self.w_int_outer + self.w_int_front
    }

    fn with_front(mut self, front: Option<&DeltaFront1D>) -> Self {
        if let Some(f) = front {
            self.mass_front = f.e;
            self.momentum_front = f.momentum();
            self.w_kin_front = f.kinetic();
            self.w_int_front = f.h;
        }
        self
    }
}

fn audit_integrator() -> Integrator {
    Integrator::new(QuadSettings::with_rel_tol(1e-12))
}

/// Integrals of `(ρ, ρU, ρU²/2, H)` over `[a, b]` for a state field.
fn integrate_state<F: Fn(f64) -> OuterState>(
    q: &Integrator,
    f: F,
    points: &[f64],
) -> Result<[f64; 4]> {
    let mass = q.integrate_with_breaks(|x| f(x).rho, points)?.value;
    let mom = q.integrate_with_breaks(|x| f(x).momentum(), points)?.value;
    let kin = q.integrate_with_breaks(|x| f(x).kinetic(), points)?.value;
    let int = q.integrate_with_breaks(|x| f(x).h_density, points)?.value;
    Ok([mass, mom, kin, int])
}

/// Totals of a 1D snapshot. Pieces are integrated separately, so
/// piecewise-constant snapshots are integrated exactly.
pub fn totals_solution(sol: &Solution1D) -> Result<BalanceRecord> {
    let q = audit_integrator();
    let mut acc = [0.0; 4];
    for p in &sol.pieces {
        if let PieceKind::VacuumFan { .. } = p.kind {
            continue;
        }
        let part = integrate_state(&q, |x| p.state_at(x), &[p.left, p.right])?;
        for k in 0..4 {
            acc[k] += part[k];
        }
    }
    Ok(BalanceRecord {
        t: sol.time,
        mass_outer: acc[0],
        momentum_outer: acc[1],
        w_kin_outer: acc[2],
        w_int_outer: acc[3],
        ..Default::default()
    }
    .with_front(sol.front.as_ref()))
}

/// Totals for a front moving through a prescribed outer field: the left
/// field is integrated from the support start to the front, the right field
/// from the front to the support end.
pub fn totals_field<F: OuterField1D + ?Sized>(
    field: &F,
    front: &DeltaFront1D,
    t: f64,
) -> Result<BalanceRecord> {
    let q = audit_integrator();
    let (a, b) = field.support(t);
    let xf = front.x.clamp(a, b);
    let breaks = field.breakpoints(t);
    let split = |lo: f64, hi: f64| {
        let mut pts = vec![lo];
        pts.extend(breaks.iter().copied().filter(|x| *x > lo && *x < hi));
        pts.push(hi);
        pts
    };
    let left = integrate_state(&q, |x| field.left(x, t), &split(a, xf))?;
    let right = integrate_state(&q, |x| field.right(x, t), &split(xf, b))?;
    Ok(BalanceRecord {
        t,
        mass_outer: left[0] + right[0],
        momentum_outer: left[1] + right[1],
        w_kin_outer: left[2] + right[2],
        w_int_outer: left[3] + right[3],
        ..Default::default()
    }
    .with_front(Some(front)))
}

/// Totals of a particle snapshot. The heaviest particle is the front when
/// its mass reaches the cluster threshold (`2 M(0)/N`); all other particles
/// are the regular part.
pub fn totals_particles(sys: &ParticleSystem) -> BalanceRecord {
    let parts = sys.particles();
    let heavy = sys
        .heaviest()
        .filter(|(_, p)| p.m >= sys.cluster_threshold())
        .map(|(i, _)| i);
    let mut rec = BalanceRecord {
        t: sys.time(),
        ..Default::default()
    };
    for (i, p) in parts.iter().enumerate() {
        if Some(i) == heavy {
            rec.mass_front = p.m;
            rec.momentum_front = p.m * p.v;
            rec.w_kin_front = p.kinetic();
            rec.w_int_front = p.h;
        } else {
            rec.mass_outer += p.m;
            rec.momentum_outer += p.m * p.v;
            rec.w_kin_outer += p.kinetic();
            rec.w_int_outer += p.h;
        }
    }
    rec
}

/// Totals of a radially symmetric snapshot; momenta are radial.
pub fn totals_spherical<F: RadialField + ?Sized>(
    field: &F,
    front: &SphericalFront,
    t: f64,
) -> Result<BalanceRecord> {
    let q = audit_integrator();
    let n = front.dim;
    let r_front = front.radius;
    let r_out = field.outer_radius(t).max(r_front);
    let weighted = |s: OuterState, r: f64| {
        let a = sphere_area(r, n);
        OuterState {
            rho: a * s.rho,
            u: s.u,
            h_density: a * s.h_density,
        }
    };
    let inner = integrate_state(&q, |r| weighted(field.interior(r, t), r), &[0.0, r_front])?;
    let outer = integrate_state(&q, |r| weighted(field.exterior(r, t), r), &[r_front, r_out])?;
    Ok(BalanceRecord {
        t,
        mass_outer: inner[0] + outer[0],
        mass_front: front.mass(),
        momentum_outer: inner[1] + outer[1],
        momentum_front: front.momentum(),
        w_kin_outer: inner[2] + outer[2],
        w_kin_front: front.kinetic(),
        w_int_outer: inner[3] + outer[3],
        w_int_front: front.internal(),
    })
}

/// Tolerances for [`check_balance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceTolerances {
    /// Relative drift allowed in the three conserved totals.
    pub conservation: f64,
    /// Slack on the finite-difference sign relations, relative to
    /// `(quantity scale) / (time span)`.
    pub derivative: f64,
}

impl BalanceTolerances {
    /// Closed-form solutions.
    pub const CLOSED_FORM: Self = Self {
        conservation: 1e-12,
        derivative: 1e-7,
    };
    /// ODE trajectories.
    pub const TRAJECTORY: Self = Self {
        conservation: 1e-8,
        derivative: 1e-7,
    };
    /// Particle runs (exact discrete conservation).
    pub const PARTICLES: Self = Self {
        conservation: 1e-12,
        derivative: 1e-7,
    };
}

/// Outcome of one checked relation. `margin` is the worst normalised value:
/// for constancy the relative drift, for sign relations the most adverse
/// scaled derivative (negative means violated for `≥ 0` relations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub relations: Vec<RelationCheck>,
}

impl Verdict {
    pub fn relation(&self, name: &str) -> Option<&RelationCheck> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.relations
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name.as_str())
            .collect()
    }
}

/// Time series with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub records: Vec<BalanceRecord>,
    pub verdict: Verdict,
}

impl BalanceReport {
    pub fn new(records: Vec<BalanceRecord>, tol: BalanceTolerances) -> Self {
        let verdict = check_balance(&records, tol);
        Self { records, verdict }
    }

    /// Fixed-width table for terminal output.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:>10} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14}\n",
            "t", "M", "m", "P", "p", "W_kin", "w_kin", "W_int", "w_int"
        );
        for r in &self.records {
            out += &format!(
                "{:>10.4} {:>14.8} {:>14.8} {:>14.8} {:>14.8} {:>14.8} {:>14.8} {:>14.8} {:>14.8}\n",
                r.t,
                r.mass_outer,
                r.mass_front,
                r.momentum_outer,
                r.momentum_front,
                r.w_kin_outer,
                r.w_kin_front,
                r.w_int_outer,
                r.w_int_front
            );
        }
        for c in &self.verdict.relations {
            out += &format!(
                "{:<34} {:<4} margin {:>12.4e} tol {:>9.1e}\n",
                c.name,
                if c.passed { "ok" } else { "FAIL" },
                c.margin,
                c.tolerance
            );
        }
        out
    }
}

/// Central differences on interior samples, one-sided at the ends.
fn derivative(t: &[f64], q: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            (q[b] - q[a]) / (t[b] - t[a])
        })
        .collect()
}

/// Checks conservation of `M+m`, `P+p` and total energy, and the sign
/// relations `ṁ ≥ 0`, `Ẇ_kin ≤ 0`, `Ẇ_int ≤ 0`, `ẇ_kin + ẇ_int ≥ 0`,
/// `Ẇ_int + ẇ_int ≥ 0`, `Ẇ_kin + ẇ_kin = −(Ẇ_int + ẇ_int)`.
///
/// Needs at least two samples with increasing times.
pub fn check_balance(records: &[BalanceRecord], tol: BalanceTolerances) -> Verdict {
    assert!(records.len() >= 2, "balance checks need at least two samples");
    let first = &records[0];
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let span = (t[t.len() - 1] - t[0]).abs().max(f64::MIN_POSITIVE);

    let mass_scale = first.total_mass().abs().max(f64::MIN_POSITIVE);
    let energy_scale = first.total_energy().abs().max(f64::MIN_POSITIVE);
    // |P| ≤ sqrt(2 M W_kin)
    let momentum_scale = (2.0 * first.total_mass() * (first.w_kin_outer + first.w_kin_front))
        .abs()
        .sqrt()
        .max(first.total_momentum().abs())
        .max(f64::MIN_POSITIVE);

    let mut relations = Vec::new();
    let mut constancy = |name: &str, f: &dyn Fn(&BalanceRecord) -> f64, scale: f64| {
        let v0 = f(first);
        let drift = records
            .iter()
            .map(|r| (f(r) - v0).abs() / scale)
            .fold(0.0, f64::max);
        relations.push(RelationCheck {
            name: name.into(),
            passed: drift <= tol.conservation,
            margin: drift,
            tolerance: tol.conservation,
        });
    };
    constancy("mass M+m constant", &|r| r.total_mass(), mass_scale);
    constancy("momentum P+p constant", &|r| r.total_momentum(), momentum_scale);
    constancy("energy W+w constant", &|r| r.total_energy(), energy_scale);

    let series = |f: &dyn Fn(&BalanceRecord) -> f64| -> Vec<f64> {
        derivative(&t, &records.iter().map(f).collect::<Vec<_>>())
    };
    let dm = series(&|r| r.mass_front);
    let dwk = series(&|r| r.w_kin_outer);
    let dwi = series(&|r| r.w_int_outer);
    let dfk = series(&|r| r.w_kin_front);
    let dfi = series(&|r| r.w_int_front);

    let mut sign = |name: &str, values: Vec<f64>, scale: f64, sense: f64| {
        let s = scale / span;
        let worst = values
            .iter()
            .map(|v| sense * v / s)
            .fold(f64::INFINITY, f64::min);
        relations.push(RelationCheck {
            name: name.into(),
            passed: worst >= -tol.derivative,
            margin: worst,
            tolerance: tol.derivative,
        });
    };
    sign("dm/dt >= 0", dm, mass_scale, 1.0);
    sign("dW_kin/dt <= 0", dwk.clone(), energy_scale, -1.0);
    sign("dW_int/dt <= 0", dwi.clone(), energy_scale, -1.0);
    sign(
        "dw_kin/dt + dw_int/dt >= 0",
        dfk.iter().zip(&dfi).map(|(a, b)| a + b).collect(),
        energy_scale,
        1.0,
    );
    sign(
        "dW_int/dt + dw_int/dt >= 0",
        dwi.iter().zip(&dfi).map(|(a, b)| a + b).collect(),
        energy_scale,
        1.0,
    );
    let s = energy_scale / span;
    let worst_eq = (0..t.len())
        .map(|k| ((dwk[k] + dfk[k]) + (dwi[k] + dfi[k])).abs() / s)
        .fold(0.0, f64::max);
    relations.push(RelationCheck {
        name: "kinetic-to-internal exchange".into(),
        passed: worst_eq <= tol.derivative,
        margin: worst_eq,
        tolerance: tol.derivative,
    });

    Verdict {
        passed: relations.iter().all(|r| r.passed),
        relations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rh_ode::{AdvectedField, AdvectedSlab, OuterTraces, Wave};
    use crate::riemann::RiemannSolution;
    use crate::state::{Piece, RiemannData};

    fn st(rho: f64, u: f64, h: f64) -> OuterState {
        OuterState::new(rho, u, h).unwrap()
    }

    fn symmetric() -> RiemannData {
        RiemannData::new(st(1.0, 1.0, 1.0), st(1.0, -1.0, 1.0), 10.0).unwrap()
    }

    fn series(sol: &RiemannSolution, n: usize, t_end: f64) -> Vec<BalanceRecord> {
        (0..=n)
            .map(|k| totals_solution(&sol.snapshot(t_end * k as f64 / n as f64).unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn symmetric_totals() {
        let sol = RiemannSolution::new(symmetric()).unwrap();
        let r = totals_solution(&sol.snapshot(1.0).unwrap()).unwrap();
        assert!((r.mass_outer - 18.0).abs() < 1e-12);
        assert!((r.mass_front - 2.0).abs() < 1e-12);
        assert!(r.momentum_outer.abs() < 1e-12 && r.momentum_front.abs() < 1e-12);
        assert!((r.w_kin_outer - 9.0).abs() < 1e-12);
        assert!(r.w_kin_front.abs() < 1e-12);
        assert!((r.w_int_outer - 18.0).abs() < 1e-12);
        assert!((r.w_int_front - 3.0).abs() < 1e-12);

        let r0 = totals_solution(&sol.snapshot(0.0).unwrap()).unwrap();
        assert_eq!((r0.mass_front, r0.momentum_front, r0.w_kin_front, r0.w_int_front), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn front_only_record() {
        let f = DeltaFront1D { x: 0.5, u_delta: 2.0 / 3.0, e: 2.0, h: 2.0 / 9.0 };
        let r = BalanceRecord::default().with_front(Some(&f));
        assert!((r.momentum_front - 4.0 / 3.0).abs() < 1e-15);
        assert!((r.w_kin_front - 4.0 / 9.0).abs() < 1e-15);
        assert!((r.w_int_front - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_series_passes() {
        let sol = RiemannSolution::new(symmetric()).unwrap();
        let recs = series(&sol, 20, 2.0);
        let v = check_balance(&recs, BalanceTolerances::CLOSED_FORM);
        assert!(v.passed, "{:?}", v.failed());
        // dW_kin + dw_kin = -1 = -(dW_int + dw_int)
        let (a, b) = (&recs[5], &recs[6]);
        let dt = b.t - a.t;
        let dk = (b.w_kin_outer + b.w_kin_front - a.w_kin_outer - a.w_kin_front) / dt;
        let di = (b.w_int_outer + b.w_int_front - a.w_int_outer - a.w_int_front) / dt;
        assert!((dk + 1.0).abs() < 1e-10 && (di - 1.0).abs() < 1e-10);
    }

    #[test]
    fn static_solution_passes() {
        let s = Solution1D {
            time: 0.0,
            pieces: vec![Piece::state(-1.0, 1.0, st(2.0, 0.0, 1.0))],
            front: None,
        };
        let recs: Vec<_> = (0..5)
            .map(|k| {
                let mut s = s.clone();
                s.time = k as f64;
                totals_solution(&s).unwrap()
            })
            .collect();
        let v = check_balance(&recs, BalanceTolerances::CLOSED_FORM);
        assert!(v.passed);
        assert!(v.relations.iter().all(|r| r.margin.abs() < 1e-15));
    }

    #[test]
    fn wrong_root_fails_mass_growth() {
        // asymmetric data with the non-entropic root u = 2: e(t) = -2t
        let (l, r) = (st(4.0, 1.0, 0.0), st(1.0, 0.0, 0.0));
        let recs: Vec<_> = (0..=10)
            .map(|k| {
                let t = 0.1 * k as f64;
                let u = 2.0;
                let e = (4.0 - 3.0 * u) * t;
                let sol = Solution1D {
                    time: t,
                    pieces: vec![Piece::state(-10.0 + t, u * t, l), Piece::state(u * t, 10.0, r)],
                    front: Some(DeltaFront1D { x: u * t, u_delta: u, e, h: 0.0 }),
                };
                totals_solution(&sol).unwrap()
            })
            .collect();
        let v = check_balance(&recs, BalanceTolerances::CLOSED_FORM);
        assert!(!v.passed);
        assert!(!v.relation("dm/dt >= 0").unwrap().passed);
    }

    #[test]
    fn particle_totals_split_cluster() {
        let mut sys = crate::sticky::sample(&symmetric().profile(), 200).unwrap();
        let r0 = totals_particles(&sys);
        assert_eq!(r0.mass_front, 0.0);
        sys.run(1.0);
        let r = totals_particles(&sys);
        assert!((r.total_mass() - 20.0).abs() < 1e-12);
        assert!((r.mass_front - 2.0).abs() < 0.2);
    }

    #[test]
    fn volume_transport_on_advected_field() {
        // d/dt ∫_{a(t)}^{x_f(t)} ρ dx = ρ(x_f)(ẋ_f − U) − ρ(a)(ȧ − U)
        let field = AdvectedField {
            left: AdvectedSlab {
                u: 1.0,
                rho: Wave { base: 1.0, amplitude: 0.3, wavenumber: 0.7, phase: 0.2 },
                h_density: Wave::flat(1.0),
            },
            right: AdvectedSlab { u: -1.0, rho: Wave::flat(1.0), h_density: Wave::flat(1.0) },
            half_length: 10.0,
        };
        let xf = |t: f64| 0.2 * t + 0.05 * t * t;
        let speed = |t: f64| 0.2 + 0.1 * t;
        let left_mass = |t: f64| {
            let front = DeltaFront1D { x: xf(t), u_delta: speed(t), e: 0.0, h: 0.0 };
            let (a, _) = field.support(t);
            let q = audit_integrator();
            q.integrate(|x| field.left(x, t).rho, a, front.x).unwrap().value
        };
        for t in [0.5, 1.0, 2.0] {
            let h = 1e-4;
            let fd = (left_mass(t + h) - left_mass(t - h)) / (2.0 * h);
            let rho_f = field.left(xf(t), t).rho;
            // the support edge moves with the fluid, so it carries no flux
            let flux = rho_f * (speed(t) - 1.0);
            assert!((fd - flux).abs() <= 1e-6 * flux.abs(), "t={t}: {fd} vs {flux}");
        }
    }
}
