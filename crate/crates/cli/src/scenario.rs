//! Scenario documents: one JSON object naming the problem kind, its physical
//! parameters, the time grid, numeric settings and the output location.

use std::path::PathBuf;

use deltashock::riemann::RiemannSolution;
use deltashock::surface_front::{AccretionField, ConstantRadial, SphericalFront};
use deltashock::{DeltaFront1D, OuterState, RiemannData};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(flatten)]
    pub problem: Problem,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_name() -> String {
    "scenario".into()
}

/// Physical setup, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    Riemann {
        #[serde(flatten)]
        data: RiemannData,
    },
    FrontOde {
        #[serde(flatten)]
        data: RiemannData,
        /// Initial front; defaults to a massless front at the origin moving
        /// with the Riemann front speed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        front0: Option<DeltaFront1D>,
        /// Sinusoidal modulation of ρ and H in the left slab.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        left_wave: Option<Modulation>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        right_wave: Option<Modulation>,
    },
    Spherical {
        dim: u32,
        front0: SphericalStart,
        field: RadialSpec,
    },
    Particles {
        #[serde(flatten)]
        data: RiemannData,
    },
    Verify {
        #[serde(flatten)]
        data: RiemannData,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        perturbation: Option<Perturbation>,
    },
    Audit {
        #[serde(flatten)]
        data: RiemannData,
        source: AuditSource,
        /// Replaces the Riemann front by one moving at this speed (riemann
        /// source only); used to exercise the checks on bad fronts.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fabricated_speed: Option<f64>,
    },
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Riemann { .. } => "riemann",
            Problem::FrontOde { .. } => "front_ode",
            Problem::Spherical { .. } => "spherical",
            Problem::Particles { .. } => "particles",
            Problem::Verify { .. } => "verify",
            Problem::Audit { .. } => "audit",
        }
    }

    /// One-dimensional Riemann data, when the kind has any.
    pub fn riemann_data(&self) -> Option<&RiemannData> {
        match self {
            Problem::Riemann { data }
            | Problem::FrontOde { data, .. }
            | Problem::Particles { data }
            | Problem::Verify { data, .. }
            | Problem::Audit { data, .. } => Some(data),
            Problem::Spherical { .. } => None,
        }
    }
}

/// `q → q (1 + amplitude sin(wavenumber ξ + phase))` for ρ and H.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub amplitude: f64,
    pub wavenumber: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalStart {
    pub radius: f64,
    pub speed: f64,
    pub e: f64,
    #[serde(default)]
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RadialSpec {
    /// Vacuum core with dust falling in at constant speed.
    Accretion {
        rho0: f64,
        #[serde(default)]
        h0: f64,
        inflow_speed: f64,
        outer_radius: f64,
    },
    /// Gas at rest on both sides of the front.
    Static {
        interior: OuterState,
        exterior: OuterState,
        outer_radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Multiply the front mass by this factor.
    ScaleFrontMass(f64),
    /// Move the front at this speed instead of the admissible one.
    FrontSpeed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditSource {
    Riemann,
    FrontOde,
    Particles,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Number of sampling intervals for audits and snapshot series.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Keep every `stride`-th step in trajectory CSV files.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_t_end() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_samples() -> usize {
    20
}
fn default_stride() -> usize {
    1
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_end: default_t_end(),
            dt: default_dt(),
            samples: default_samples(),
            stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// Particle count for sticky-particle runs.
    #[serde(default = "default_particles")]
    pub particles: usize,
    /// Relative tolerance of the weak-identity quadrature.
    #[serde(default = "default_weak_quad_tol")]
    pub weak_quad_rel_tol: f64,
    /// Pass threshold of the scenario's main check; the per-kind default
    /// applies when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_tol: Option<f64>,
    /// Spatial spacing of the default test-function lattice.
    #[serde(default = "default_lattice_scale")]
    pub lattice_x_scale: f64,
}

fn default_particles() -> usize {
    10_000
}
fn default_weak_quad_tol() -> f64 {
    deltashock::weak_verify::QUAD_TOL
}
fn default_lattice_scale() -> f64 {
    1.0
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            particles: default_particles(),
            weak_quad_rel_tol: default_weak_quad_tol(),
            check_tol: None,
            lattice_x_scale: default_lattice_scale(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Output directory; `out/<name>` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

impl Scenario {
    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks every parameter against the preconditions of the module the
    /// scenario dispatches to.
    pub fn validate(&self) -> Result<()> {
        self.check_parameters().map_err(|e| match e {
            CliError::Solver(deltashock::Error::InvalidState(m)) => CliError::Validation(m),
            CliError::Solver(other) => CliError::Validation(other.to_string()),
            other => other,
        })
    }

    fn check_parameters(&self) -> Result<()> {
        let invalid = |m: &str| Err(CliError::Validation(m.to_string()));
        let t = &self.time;
        if !(t.t_end > 0.0 && t.t_end.is_finite()) {
            return invalid("t_end must be positive and finite");
        }
        if !(t.dt > 0.0 && t.dt <= t.t_end) {
            return invalid("dt must be positive and at most t_end");
        }
        if t.samples < 2 {
            return invalid("samples must be at least 2");
        }
        if t.stride == 0 {
            return invalid("stride must be at least 1");
        }
        let n = &self.numerics;
        if n.particles < 2 {
            return invalid("particles must be at least 2");
        }
        for (v, name) in [
            (n.weak_quad_rel_tol, "weak_quad_rel_tol"),
            (n.check_tol.unwrap_or(1.0), "check_tol"),
            (n.lattice_x_scale, "lattice_x_scale"),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(&format!("{name} must be positive"));
            }
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return invalid("name must be a nonempty plain file name");
        }

        if let Some(data) = self.problem.riemann_data() {
            validate_states(data)?;
        }
        match &self.problem {
            Problem::Riemann { data } | Problem::Particles { data } | Problem::Verify { data, .. } => {
                self.validate_window(data)?;
            }
            Problem::FrontOde {
                data,
                front0,
                left_wave,
                right_wave,
            } => {
                if let Some(f) = front0 {
                    DeltaFront1D::new(f.x, f.u_delta, f.e, f.h)?;
                } else if data.jump_u() <= 0.0 {
                    return invalid("front_ode needs [U] > 0 or an explicit front0");
                }
                for w in [left_wave, right_wave].into_iter().flatten() {
                    if !(w.amplitude.abs() < 1.0 && w.wavenumber.is_finite() && w.phase.is_finite()) {
                        return invalid("wave amplitude must lie in (-1, 1)");
                    }
                }
                if front0.is_none() {
                    self.validate_window(data)?;
                }
            }
            Problem::Audit {
                data,
                source,
                fabricated_speed,
            } => {
                if fabricated_speed.is_some() && *source != AuditSource::Riemann {
                    return invalid("fabricated_speed requires the riemann source");
                }
                if let Some(u) = fabricated_speed {
                    if !u.is_finite() {
                        return invalid("fabricated_speed must be finite");
                    }
                } else {
                    self.validate_window(data)?;
                }
            }
            Problem::Spherical { dim, front0, field } => {
                if !(1..=3).contains(dim) {
                    return invalid("dim must be 1, 2 or 3");
                }
                SphericalFront::new(front0.radius, front0.speed, front0.e, front0.h, *dim)?;
                match *field {
                    RadialSpec::Accretion {
                        rho0,
                        h0,
                        inflow_speed,
                        outer_radius,
                    } => {
                        OuterState::new(rho0, -inflow_speed, h0)?;
                        if !(inflow_speed > 0.0 && inflow_speed.is_finite()) {
                            return invalid("inflow_speed must be positive");
                        }
                        if !(outer_radius > front0.radius && outer_radius.is_finite()) {
                            return invalid("outer_radius must exceed the front radius");
                        }
                        if outer_radius - inflow_speed * t.t_end <= 0.0 {
                            return invalid("the dust shell is exhausted before t_end");
                        }
                    }
                    RadialSpec::Static {
                        interior,
                        exterior,
                        outer_radius,
                    } => {
                        interior.validate()?;
                        exterior.validate()?;
                        if interior.u != 0.0 || exterior.u != 0.0 {
                            return invalid("static radial states must be at rest");
                        }
                        if !(outer_radius > front0.radius && outer_radius.is_finite()) {
                            return invalid("outer_radius must exceed the front radius");
                        }
                        if front0.radius + front0.speed.abs() * t.t_end >= outer_radius {
                            return invalid("the front may leave the static region before t_end");
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_window(&self, data: &RiemannData) -> Result<()> {
        let window = RiemannSolution::new(*data)?.validity_window();
        if self.time.t_end > window {
            return Err(CliError::Validation(format!(
                "t_end = {} exceeds the validity window {window}",
                self.time.t_end
            )));
        }
        Ok(())
    }

    pub fn accretion_field(&self) -> Option<AccretionField> {
        match self.problem {
            Problem::Spherical {
                dim,
                field:
                    RadialSpec::Accretion {
                        rho0,
                        h0,
                        inflow_speed,
                        outer_radius,
                    },
                ..
            } => Some(AccretionField {
                rho0,
                h0,
                inflow_speed,
                outer_radius0: outer_radius,
                dim,
            }),
            _ => None,
        }
    }

    pub fn static_field(&self) -> Option<ConstantRadial> {
        match self.problem {
            Problem::Spherical {
                field:
                    RadialSpec::Static {
                        interior,
                        exterior,
                        outer_radius,
                    },
                ..
            } => Some(ConstantRadial {
                interior,
                exterior,
                outer_radius,
            }),
            _ => None,
        }
    }
}

fn validate_states(data: &RiemannData) -> Result<()> {
    data.left.validate()?;
    data.right.validate()?;
    if !(data.half_length > 0.0 && data.half_length.is_finite()) {
        return Err(CliError::Validation(
            "half_length must be positive and finite (compact support)".into(),
        ));
    }
    Ok(())
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let s: Scenario = serde_json::from_str(text)?;
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "kind": "riemann",
        "left": {"rho": 1.0, "u": 1.0, "h_density": 1.0},
        "right": {"rho": 1.0, "u": -1.0, "h_density": 1.0},
        "half_length": 10.0
    }"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.name, "scenario");
        assert_eq!(s.time.dt, 1e-3);
        assert_eq!(s.time.t_end, 1.0);
        assert_eq!(s.numerics.particles, 10_000);
        assert_eq!(s.problem.kind(), "riemann");
        assert_eq!(s.output_dir(), PathBuf::from("out/scenario"));
    }

    #[test]
    fn negative_rho_is_rejected() {
        let text = MINIMAL.replacen("\"rho\": 1.0", "\"rho\": -1.0", 1);
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(&err, CliError::Validation(m) if m == "rho must be nonnegative"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_scenario("{\n  \"kind\": \"riemann\",\n  \"left\": oops\n}").unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let err = parse_scenario(r#"{"kind": "riemann", "left": {"rho": 1, "u": 0, "h_density": 0}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("right") || err.to_string().contains("missing"), "{err}");
    }

    #[test]
    fn window_and_support_are_enforced() {
        let text = MINIMAL.replace("10.0", "0.5");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("validity window"), "{err}");
        let text = MINIMAL.replace("\"half_length\": 10.0", "\"half_length\": 1e400");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn round_trip_every_kind() {
        let docs = [
            MINIMAL.to_string(),
            r#"{"kind": "front_ode", "name": "ode",
                "left": {"rho": 4, "u": 1, "h_density": 0}, "right": {"rho": 1, "u": 0, "h_density": 0},
                "half_length": 10, "left_wave": {"amplitude": 0.2, "wavenumber": 1.5},
                "time": {"t_end": 2, "dt": 0.01, "stride": 10}}"#
                .to_string(),
            r#"{"kind": "spherical", "dim": 3,
                "front0": {"radius": 1, "speed": -0.5, "e": 1},
                "field": {"type": "accretion", "rho0": 1, "inflow_speed": 1, "outer_radius": 5},
                "time": {"t_end": 2.5}}"#
                .to_string(),
            r#"{"kind": "verify", "left": {"rho": 1, "u": 1, "h_density": 1},
                "right": {"rho": 1, "u": -1, "h_density": 1}, "half_length": 10,
                "perturbation": {"scale_front_mass": 1.01}, "numerics": {"check_tol": 1e-6}}"#
                .to_string(),
            r#"{"kind": "audit", "source": "riemann", "fabricated_speed": 2,
                "left": {"rho": 4, "u": 1, "h_density": 0}, "right": {"rho": 1, "u": 0, "h_density": 0},
                "half_length": 10, "output": {"dir": "/tmp/x"}}"#
                .to_string(),
        ];
        for d in docs {
            let s = parse_scenario(&d).unwrap();
            let again = parse_scenario(&s.to_json()).unwrap();
            assert_eq!(s, again);
        }
    }

    #[test]
    fn spherical_checks() {
        let base = r#"{"kind": "spherical", "dim": 3,
            "front0": {"radius": 1, "speed": -0.5, "e": 1},
            "field": {"type": "accretion", "rho0": 1, "inflow_speed": 1, "outer_radius": 5},
            "time": {"t_end": 2.5}}"#;
        assert!(parse_scenario(base).is_ok());
        assert!(parse_scenario(&base.replace("\"dim\": 3", "\"dim\": 4")).is_err());
        assert!(parse_scenario(&base.replace("\"t_end\": 2.5", "\"t_end\": 6")).is_err());
        assert!(parse_scenario(&base.replace("\"radius\": 1", "\"radius\": -1")).is_err());
    }
}
