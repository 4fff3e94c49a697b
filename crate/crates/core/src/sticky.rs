//! Event-driven sticky particles in 1D.
//!
//! Particles stream freely and merge on contact. A merge conserves mass and
//! momentum; the kinetic energy it destroys, `½ μ (v_a − v_b)²` with the
//! reduced mass `μ = m_a m_b / (m_a + m_b)`, is added to the internal energy
//! of the merged particle so the total energy is unchanged. Only neighbours
//! can collide in 1D, so the pending events are the collision times of
//! adjacent approaching pairs, kept in a binary heap and invalidated lazily
//! through per-slot version counters.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::csv_table;
use crate::state::{Piece, PieceKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub m: f64,
    pub x: f64,
    pub v: f64,
    pub h: f64,
}

impl Particle {
    pub fn kinetic(&self) -> f64 {
        0.5 * self.m * self.v * self.v
    }
}

/// Merged particle. The internal energy grows by the kinetic energy lost in
/// the perfectly inelastic collision.
pub fn merge(a: &Particle, b: &Particle) -> Particle {
    let m = a.m + b.m;
    let v = (a.m * a.v + b.m * b.v) / m;
    let dv = a.v - b.v;
    let loss = 0.5 * (a.m * b.m / m) * dv * dv;
    Particle {
        m,
        x: (a.m * a.x + b.m * b.x) / m,
        v,
        h: a.h + b.h + loss,
    }
}

const NIL: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    left: usize,
    right: usize,
    left_version: u32,
    right_version: u32,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // BinaryHeap is a max-heap: earliest time first, then leftmost pair.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.left.cmp(&self.left))
    }
}

/// Statistics accumulated over all `run` calls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeStats {
    pub merges: u64,
    /// Smallest realised internal-energy increment over all merges, divided
    /// by the total energy of the merging pair.
    pub min_scaled_increment: f64,
    pub wall_time_s: f64,
}

/// Ordered 1D particles with their pending collision events.
///
/// Slots are never reused: a merge keeps the left slot and retires the
/// right one, so slot order is position order at all times.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    time: f64,
    parts: Vec<Particle>,
    /// Time at which `parts[i].x` is the position.
    ref_time: Vec<f64>,
    version: Vec<u32>,
    alive: Vec<bool>,
    next: Vec<usize>,
    prev: Vec<usize>,
    head: usize,
    count: usize,
    queue: BinaryHeap<Event>,
    initial_mass: f64,
    initial_count: usize,
    stats: MergeStats,
}

impl ParticleSystem {
    /// Builds a system at `t = 0`. Particles are sorted by position and
    /// exact position ties are merged.
    pub fn new(mut particles: Vec<Particle>) -> Result<Self> {
        for p in &particles {
            if !(p.m > 0.0 && p.h >= 0.0 && p.x.is_finite() && p.v.is_finite() && p.h.is_finite()) {
                return Err(Error::InvalidState(format!("invalid particle {p:?}")));
            }
        }
        if particles.is_empty() {
            return Err(Error::EmptySupport);
        }
        particles.sort_by(|a, b| a.x.total_cmp(&b.x));
        let initial_count = particles.len();
        let initial_mass = particles.iter().map(|p| p.m).sum();
        let mut merged: Vec<Particle> = Vec::with_capacity(particles.len());
        let mut stats = MergeStats {
            merges: 0,
            min_scaled_increment: f64::INFINITY,
            wall_time_s: 0.0,
        };
        for p in particles {
            match merged.last_mut() {
                Some(q) if q.x == p.x => {
                    let scale = q.kinetic() + p.kinetic() + q.h + p.h;
                    let r = merge(q, &p);
                    let inc = r.h - q.h - p.h;
                    stats.merges += 1;
                    stats.min_scaled_increment =
                        stats.min_scaled_increment.min(if scale > 0.0 { inc / scale } else { 0.0 });
                    *q = r;
                }
                _ => merged.push(p),
            }
        }
        let n = merged.len();
        let mut sys = Self {
            time: 0.0,
            ref_time: vec![0.0; n],
            version: vec![0; n],
            alive: vec![true; n],
            next: (1..=n).map(|i| if i < n { i } else { NIL }).collect(),
            prev: (0..n).map(|i| if i == 0 { NIL } else { i - 1 }).collect(),
            head: 0,
            count: n,
            parts: merged,
            queue: BinaryHeap::new(),
            initial_mass,
            initial_count,
            stats,
        };
        for i in 0..n.saturating_sub(1) {
            sys.schedule(i, i + 1);
        }
        Ok(sys)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn initial_mass(&self) -> f64 {
        self.initial_mass
    }

    pub fn initial_count(&self) -> usize {
        self.initial_count
    }

    pub fn stats(&self) -> &MergeStats {
        &self.stats
    }

    /// Mass above which a particle counts as a merged cluster.
    pub fn cluster_threshold(&self) -> f64 {
        2.0 * (self.initial_mass / self.initial_count as f64) * (1.0 - 1e-12)
    }

    fn position(&self, i: usize, t: f64) -> f64 {
        let p = &self.parts[i];
        p.x + p.v * (t - self.ref_time[i])
    }

    fn schedule(&mut self, i: usize, j: usize) {
        let (vi, vj) = (self.parts[i].v, self.parts[j].v);
        if vi <= vj {
            return;
        }
        let gap = self.position(j, self.time) - self.position(i, self.time);
        let time = self.time + gap.max(0.0) / (vi - vj);
        self.queue.push(Event {
            time,
            left: i,
            right: j,
            left_version: self.version[i],
            right_version: self.version[j],
        });
    }

    fn is_current(&self, ev: &Event) -> bool {
        self.alive[ev.left]
            && self.alive[ev.right]
            && self.version[ev.left] == ev.left_version
            && self.version[ev.right] == ev.right_version
            && self.next[ev.left] == ev.right
    }

    fn collide(&mut self, i: usize, j: usize) {
        let t = self.time;
        let mut a = self.parts[i];
        let mut b = self.parts[j];
        a.x = self.position(i, t);
        b.x = self.position(j, t);
        let scale = a.kinetic() + b.kinetic() + a.h + b.h;
        let mut r = merge(&a, &b);
        // keep the slot order equal to position order
        let lo = if self.prev[i] != NIL { self.position(self.prev[i], t) } else { f64::NEG_INFINITY };
        let hi = if self.next[j] != NIL { self.position(self.next[j], t) } else { f64::INFINITY };
        r.x = r.x.clamp(lo, hi);
        let inc = r.h - a.h - b.h;
        self.stats.min_scaled_increment = self
            .stats
            .min_scaled_increment
            .min(if scale > 0.0 { inc / scale } else { 0.0 });
        self.stats.merges += 1;

        self.parts[i] = r;
        self.ref_time[i] = t;
        self.version[i] += 1;
        self.alive[j] = false;
        self.count -= 1;
        let nj = self.next[j];
        self.next[i] = nj;
        if nj != NIL {
            self.prev[nj] = i;
        }
        if self.prev[i] != NIL {
            self.schedule(self.prev[i], i);
        }
        if nj != NIL {
            self.schedule(i, nj);
        }
    }

    /// Processes every collision up to `t_end` in time order (leftmost pair
    /// first on ties) and advances all particles to `t_end`.
    pub fn run(&mut self, t_end: f64) {
        let start = Instant::now();
        while let Some(ev) = self.queue.peek().copied() {
            if ev.time > t_end {
                break;
            }
            self.queue.pop();
            if !self.is_current(&ev) {
                continue;
            }
            self.time = self.time.max(ev.time);
            self.collide(ev.left, ev.right);
        }
        if t_end > self.time {
            self.time = t_end;
        }
        let mut i = self.head;
        while i != NIL {
            self.parts[i].x = self.position(i, self.time);
            self.ref_time[i] = self.time;
            i = self.next[i];
        }
        self.stats.wall_time_s += start.elapsed().as_secs_f64();
    }

    /// Live particles in position order, positions at the current time.
    pub fn particles(&self) -> Vec<Particle> {
        let mut out = Vec::with_capacity(self.count);
        let mut i = self.head;
        while i != NIL {
            let mut p = self.parts[i];
            p.x = self.position(i, self.time);
            out.push(p);
            i = self.next[i];
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.particles().iter().map(|p| p.m).sum()
    }

    pub fn total_momentum(&self) -> f64 {
        self.particles().iter().map(|p| p.m * p.v).sum()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.particles().iter().map(Particle::kinetic).sum()
    }

    pub fn internal_energy(&self) -> f64 {
        self.particles().iter().map(|p| p.h).sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.kinetic_energy() + self.internal_energy()
    }

    /// Index (in [`particles`](Self::particles) order) and state of the
    /// heaviest particle.
    pub fn heaviest(&self) -> Option<(usize, Particle)> {
        self.particles()
            .into_iter()
            .enumerate()
            .max_by(|a, b| a.1.m.total_cmp(&b.1.m))
    }

    /// Snapshot CSV with columns `m, x, v, h`.
    pub fn to_csv(&self) -> String {
        csv_table(
            &["m", "x", "v", "h"],
            self.particles().iter().map(|p| vec![p.m, p.x, p.v, p.h]),
        )
    }

    pub fn metadata(&self, include_wall_time: bool) -> RunMetadata {
        RunMetadata {
            initial_count: self.initial_count,
            live_count: self.count,
            time: self.time,
            merges: self.stats.merges,
            deterministic: "event order is fixed by (time, left slot); no random sampling",
            wall_time_s: include_wall_time.then_some(self.stats.wall_time_s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub initial_count: usize,
    pub live_count: usize,
    pub time: f64,
    pub merges: u64,
    pub deterministic: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// Runs `system` to `t_end` and returns it.
pub fn run(mut system: ParticleSystem, t_end: f64) -> ParticleSystem {
    system.run(t_end);
    system
}

/// Equal-mass sampling of a piecewise-constant profile with `n` particles.
///
/// The mass support is cut into `n` cells of mass `M/n`; each particle sits
/// at the midpoint of its cell and carries the cell's momentum (so its
/// velocity is the mass-weighted cell average of U) and the cell's integral
/// of H. The first and last cells extend to the ends of the profile.
pub fn sample(profile: &[Piece], n: usize) -> Result<ParticleSystem> {
    if n < 2 {
        return Err(Error::InvalidState("at least two particles are required".into()));
    }
    let (rho_of, mom_of, h_of) = (
        |p: &Piece| match p.kind {
            PieceKind::State(s) => s.rho,
            PieceKind::VacuumFan { .. } => 0.0,
        },
        |p: &Piece| match p.kind {
            PieceKind::State(s) => s.momentum(),
            PieceKind::VacuumFan { .. } => 0.0,
        },
        |p: &Piece| match p.kind {
            PieceKind::State(s) => s.h_density,
            PieceKind::VacuumFan { .. } => 0.0,
        },
    );
    let total: f64 = profile.iter().map(|p| rho_of(p) * p.width()).sum();
    if !(total > 0.0) {
        return Err(Error::EmptySupport);
    }
    let first = profile.first().expect("nonempty profile").left;
    let last = profile.last().expect("nonempty profile").right;

    // Cell boundaries: invert the piecewise-linear cumulative mass.
    let mut bounds = Vec::with_capacity(n + 1);
    bounds.push(first);
    let mut acc = 0.0;
    let mut k = 1;
    let mut massive_end = first;
    for p in profile {
        let pm = rho_of(p) * p.width();
        if pm > 0.0 {
            massive_end = p.right;
        }
        while k < n {
            let target = total * k as f64 / n as f64;
            if target > acc + pm || pm == 0.0 {
                break;
            }
            let frac = ((target - acc) / pm).clamp(0.0, 1.0);
            bounds.push(p.left + frac * p.width());
            k += 1;
        }
        acc += pm;
    }
    // targets lost to rounding at the end of the mass support
    while bounds.len() < n {
        bounds.push(massive_end);
    }
    bounds.push(last);

    // Cell integrals of ρU and H by a two-pointer sweep.
    let mut particles = Vec::with_capacity(n);
    let mut j = 0;
    let m = total / n as f64;
    for c in 0..n {
        let (a, b) = (bounds[c], bounds[c + 1]);
        let (mut mom, mut h) = (0.0, 0.0);
        while j < profile.len() && profile[j].right <= a && j + 1 < profile.len() {
            j += 1;
        }
        let mut q = j;
        while q < profile.len() && profile[q].left < b {
            let lo = profile[q].left.max(a);
            let hi = profile[q].right.min(b);
            if hi > lo {
                mom += mom_of(&profile[q]) * (hi - lo);
                h += h_of(&profile[q]) * (hi - lo);
            }
            q += 1;
        }
        particles.push(Particle {
            m,
            x: 0.5 * (a + b),
            v: mom / m,
            h,
        });
    }
    ParticleSystem::new(particles)
}

/// Front estimate from a particle snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontEstimate {
    pub x: f64,
    pub u: f64,
    pub e: f64,
    pub h: f64,
}

/// Heaviest cluster as a front estimate. Particles within `window` of the
/// heaviest one are lumped into it (mass-weighted); `window = 0` reports the
/// single heaviest particle.
pub fn empirical_front(system: &ParticleSystem, window: f64) -> Result<FrontEstimate> {
    let parts = system.particles();
    let (_, heavy) = system
        .heaviest()
        .ok_or(Error::EmptySupport)?;
    let threshold = system.cluster_threshold();
    if heavy.m < threshold {
        return Err(Error::NoCluster {
            max_mass: heavy.m,
            threshold,
        });
    }
    let (mut m, mut mx, mut mv, mut h, mut kin) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in parts.iter().filter(|p| (p.x - heavy.x).abs() <= window) {
        m += p.m;
        mx += p.m * p.x;
        mv += p.m * p.v;
        h += p.h;
        kin += p.kinetic();
    }
    let u = mv / m;
    // kinetic energy lost by lumping counts as internal
    h += kin - 0.5 * m * u * u;
    Ok(FrontEstimate {
        x: mx / m,
        u,
        e: m,
        h,
    })
}
