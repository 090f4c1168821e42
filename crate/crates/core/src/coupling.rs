//! Skorokhod embedding of a spider walk in a lattice Brownian spider path.
//!
//! The Brownian path is a fine lattice walk with spatial step `1/m` and time
//! step `1/m^2`. The stopping times `tau_i` are the fine steps at which the
//! path first reaches distance `m` (one unit) from its position at
//! `tau_{i-1}`; the path positions at these times, divided by `m`, form a
//! unit-step spider walk.
//!
//! A [`CoupledPair`] does not keep the whole fine path. It keeps what the
//! diagnostics read: the stopping times, the path at integer times, the
//! fine leg occupation at integer times and the fine visits to the sites of
//! the unit lattice. It can be built from a stored path
//! ([`skorokhod_embed`]) or by simulating the fine walk directly
//! ([`simulate_coupled_pair`]); both give the same pair for the same
//! generator state.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randkit::SimRng;
use crate::spider::{distance, SpiderConfig, SpiderPath, SpiderPoint, SpiderWalker};

/// A fine path together with the walk embedded in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPair {
    m: u32,
    num_legs: usize,
    fine_horizon: u64,
    /// Fine step index of each stopping time, `tau[0] = 0`.
    tau: Vec<u64>,
    /// Embedded walk on the unit lattice, `walk[i]` = path at `tau[i]` / m.
    walk: Vec<SpiderPoint>,
    /// Fine path at integer times `k` (fine step `k m^2`), in fine units.
    bm_at_int: Vec<SpiderPoint>,
    /// Fine steps spent on each leg up to integer time `k`, row-major
    /// `k * num_legs + (j - 1)`.
    leg_steps_at_int: Vec<u64>,
    /// Fine steps (`>= 1`) at which the path sits on a unit lattice site,
    /// with that site in unit coordinates.
    site_visits: Vec<(u64, SpiderPoint)>,
}

struct Embedder {
    m: u32,
    m2: u64,
    num_legs: usize,
    anchor: SpiderPoint,
    steps: u64,
    leg_steps: Vec<u64>,
    pair: CoupledPair,
}

impl Embedder {
    fn new(m: u32, num_legs: usize) -> Self {
        Embedder {
            m,
            m2: m as u64 * m as u64,
            num_legs,
            anchor: SpiderPoint::ORIGIN,
            steps: 0,
            leg_steps: vec![0; num_legs],
            pair: CoupledPair {
                m,
                num_legs,
                fine_horizon: 0,
                tau: vec![0],
                walk: vec![SpiderPoint::ORIGIN],
                bm_at_int: vec![SpiderPoint::ORIGIN],
                leg_steps_at_int: vec![0; num_legs],
                site_visits: Vec::new(),
            },
        }
    }

    #[inline]
    fn push(&mut self, p: SpiderPoint) {
        self.steps += 1;
        if let Some(j) = p.leg() {
            self.leg_steps[j - 1] += 1;
        }
        if p.radius() % self.m == 0 {
            let unit = SpiderPoint::new(p.leg().unwrap_or(0), p.radius() / self.m);
            self.pair.site_visits.push((self.steps, unit));
            if distance(p, self.anchor) == self.m as u64 {
                self.anchor = p;
                self.pair.tau.push(self.steps);
                self.pair.walk.push(unit);
            }
        }
        if self.steps % self.m2 == 0 {
            self.pair.bm_at_int.push(p);
            self.pair.leg_steps_at_int.extend_from_slice(&self.leg_steps);
        }
    }

    fn finish(mut self) -> CoupledPair {
        self.pair.fine_horizon = self.steps;
        debug_assert_eq!(self.pair.leg_steps_at_int.len(), self.pair.bm_at_int.len() * self.num_legs);
        self.pair
    }
}

fn check_m(m: u32) -> Result<()> {
    if m < 2 {
        return Err(Error::invalid(format!("fine resolution m must be at least 2, got {m}")));
    }
    Ok(())
}

/// Embeds a walk in a lattice Brownian path whose spatial step is `1/m`
/// for an integer `m >= 2` and whose time step is `1/m^2`.
pub fn skorokhod_embed(bm_path: &SpiderPath) -> Result<CoupledPair> {
    let inv = 1.0 / bm_path.step_scale();
    let m = inv.round();
    if (inv - m).abs() > 1e-9 * m || m < 2.0 || m > u32::MAX as f64 {
        return Err(Error::invalid(format!(
            "spatial step {} is not 1/m for an integer m >= 2",
            bm_path.step_scale()
        )));
    }
    let expect_dt = 1.0 / (m * m);
    if (bm_path.time_scale() - expect_dt).abs() > 1e-9 * expect_dt {
        return Err(Error::invalid("time step must be the square of the spatial step"));
    }
    let m = m as u32;
    let mut e = Embedder::new(m, bm_path.num_legs());
    for &p in &bm_path.points()[1..] {
        e.push(p);
    }
    Ok(e.finish())
}

/// Simulates the fine walk with `m^2` steps per unit time until the
/// embedded walk has `n` steps and the path has reached time `n`.
/// Consumes the generator exactly like
/// [`simulate_bms_lattice`](crate::spider::simulate_bms_lattice) over the
/// same number of fine steps.
pub fn simulate_coupled_pair(config: &SpiderConfig, m: u32, n: usize, rng: &mut SimRng) -> Result<CoupledPair> {
    check_m(m)?;
    let mut e = Embedder::new(m, config.num_legs());
    let mut walker = SpiderWalker::new(config);
    let min_fine = n as u64 * e.m2;
    while e.pair.walk.len() <= n || e.steps < min_fine {
        let p = walker.step(rng);
        e.push(p);
    }
    Ok(e.finish())
}

impl CoupledPair {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn num_legs(&self) -> usize {
        self.num_legs
    }

    /// Fine time step `1/m^2`.
    pub fn dt(&self) -> f64 {
        1.0 / (self.m as f64 * self.m as f64)
    }

    pub fn fine_horizon(&self) -> u64 {
        self.fine_horizon
    }

    /// Stopping times in fine steps.
    pub fn tau(&self) -> &[u64] {
        &self.tau
    }

    /// Number of embedded walk steps.
    pub fn walk_steps(&self) -> usize {
        self.walk.len() - 1
    }

    pub fn embedded_walk(&self) -> SpiderPath {
        SpiderPath::from_points(self.num_legs, self.walk.clone(), 1.0, 1.0).expect("embedded walk has unit steps")
    }

    /// Fine path position at integer time `k`, in fine units.
    pub fn bm_at(&self, k: usize) -> Option<SpiderPoint> {
        self.bm_at_int.get(k).copied()
    }

    /// `tau_i - tau_{i-1}` in time units.
    pub fn tau_increments(&self) -> Vec<f64> {
        let dt = self.dt();
        self.tau.windows(2).map(|w| (w[1] - w[0]) as f64 * dt).collect()
    }

    fn check_horizon(&self, n: usize) -> Result<()> {
        if n > self.walk_steps() {
            return Err(Error::HorizonExhausted(format!(
                "{n} walk steps requested, {} embedded",
                self.walk_steps()
            )));
        }
        if n >= self.bm_at_int.len() {
            return Err(Error::HorizonExhausted(format!(
                "time {n} requested, path ends at {}",
                self.bm_at_int.len() - 1
            )));
        }
        Ok(())
    }

    /// `max_{k<=n} d(S_k, B(k))` in unit distance.
    pub fn discrepancy_walk(&self, n: usize) -> Result<f64> {
        self.check_horizon(n)?;
        let worst = (0..=n)
            .map(|k| distance(self.walk[k].scaled(self.m), self.bm_at_int[k]))
            .max()
            .unwrap_or(0);
        Ok(worst as f64 / self.m as f64)
    }

    /// `max_{k<=n} max_x |xi(x,k) - eta(x,k)|` over the sites of the unit
    /// lattice, origin included. `xi` counts embedded walk visits in steps
    /// `1..=k`; `eta` is the fine visit count up to time `k` times `1/m`.
    pub fn discrepancy_localtime(&self, n: usize) -> Result<f64> {
        self.check_horizon(n)?;
        let h = 1.0 / self.m as f64;
        let m2 = self.m as u64 * self.m as u64;
        let mut counts: HashMap<SpiderPoint, (u64, u64)> = HashMap::new();
        let mut worst: f64 = 0.0;
        let mut ev = 0;
        let mut touched: Vec<SpiderPoint> = Vec::new();
        for k in 1..=n {
            touched.clear();
            let s = self.walk[k];
            counts.entry(s).or_default().0 += 1;
            touched.push(s);
            let limit = k as u64 * m2;
            while ev < self.site_visits.len() && self.site_visits[ev].0 <= limit {
                let site = self.site_visits[ev].1;
                counts.entry(site).or_default().1 += 1;
                touched.push(site);
                ev += 1;
            }
            for site in &touched {
                let (xi, eta) = counts[site];
                worst = worst.max((xi as f64 - eta as f64 * h).abs());
            }
        }
        Ok(worst)
    }

    /// `max_j |T(j,n) - Z(j,n)|` with `T` the embedded walk's leg
    /// occupation and `Z` the fine path's time on leg `j` up to time `n`.
    pub fn discrepancy_occupation(&self, n: usize) -> Result<f64> {
        self.check_horizon(n)?;
        let dt = self.dt();
        let mut walk_legs = vec![0u64; self.num_legs];
        for p in &self.walk[1..=n] {
            if let Some(j) = p.leg() {
                walk_legs[j - 1] += 1;
            }
        }
        let row = &self.leg_steps_at_int[n * self.num_legs..(n + 1) * self.num_legs];
        Ok(walk_legs
            .iter()
            .zip(row)
            .map(|(&t, &z)| (t as f64 - z as f64 * dt).abs())
            .fold(0.0, f64::max))
    }

    /// Local time of the fine path at unit site `site` between consecutive
    /// embedded steps `tau_nu` and `tau_{nu+1}`, for every embedded visit
    /// `nu >= 1` to `site` whose following stopping time lies in the pair.
    /// Local time is fine visits in `[tau_nu, tau_{nu+1})` times `1/m`.
    pub fn a_increments(&self, site: SpiderPoint) -> Result<Vec<f64>> {
        if site.is_origin() {
            return Err(Error::invalid("increments are taken at a site away from the origin"));
        }
        let h = 1.0 / self.m as f64;
        let mut out = Vec::new();
        for nu in 1..self.walk.len().saturating_sub(1) {
            if self.walk[nu] != site {
                continue;
            }
            let (lo, hi) = (self.tau[nu], self.tau[nu + 1]);
            let start = self.site_visits.partition_point(|v| v.0 < lo);
            let visits = self.site_visits[start..]
                .iter()
                .take_while(|v| v.0 < hi)
                .filter(|v| v.1 == site)
                .count();
            out.push(visits as f64 * h);
        }
        Ok(out)
    }
}

/// Free-function form of [`CoupledPair::a_increments`].
pub fn extract_a_increments(pair: &CoupledPair, site: SpiderPoint) -> Result<Vec<f64>> {
    pair.a_increments(site)
}

pub fn discrepancy_walk(pair: &CoupledPair, n: usize) -> Result<f64> {
    pair.discrepancy_walk(n)
}

pub fn discrepancy_localtime(pair: &CoupledPair, n: usize) -> Result<f64> {
    pair.discrepancy_localtime(n)
}

pub fn discrepancy_occupation(pair: &CoupledPair, n: usize) -> Result<f64> {
    pair.discrepancy_occupation(n)
}

/// One row of the coupling-rate output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRecord {
    pub n: usize,
    pub walk: f64,
    pub localtime: f64,
    pub occupation: f64,
}

pub fn discrepancy_record(pair: &CoupledPair, n: usize) -> Result<DiscrepancyRecord> {
    Ok(DiscrepancyRecord {
        n,
        walk: pair.discrepancy_walk(n)?,
        localtime: pair.discrepancy_localtime(n)?,
        occupation: pair.discrepancy_occupation(n)?,
    })
}
