//! The spider graph and its walks.
//!
//! A spider with `N` legs is `N` half-lines glued at a common point, the
//! body (origin). A point is the origin or a pair `(leg, radius)`; distance
//! is `|r - s|` along one leg and `r + s` across legs.
//!
//! Walk paths are produced three ways: direct Markov simulation
//! ([`simulate_rws_markov`]), relabeling the excursions of a simple
//! symmetric walk ([`build_rws_from_ssrw`], [`build_skew_from_ssrw`]), and
//! as a rescaled lattice approximation of Brownian motion on the spider
//! ([`simulate_bms_lattice`]).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randkit::{Categorical, SimRng};

/// Number of legs and the probability of entering each leg from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiderConfig {
    legs: Categorical,
}

impl SpiderConfig {
    pub fn new(leg_probs: &[f64]) -> Result<Self> {
        let legs = Categorical::new(leg_probs)?;
        if legs.len() > u32::MAX as usize {
            return Err(Error::invalid("too many legs"));
        }
        Ok(SpiderConfig { legs })
    }

    /// Two legs: leg 1 is the positive half-line, entered with probability
    /// `p`; leg 2 the negative half-line.
    pub fn skew(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("skew parameter {p} outside [0,1]")));
        }
        Self::new(&[p, 1.0 - p])
    }

    pub fn uniform(num_legs: usize) -> Result<Self> {
        if num_legs == 0 {
            return Err(Error::invalid("a spider needs at least one leg"));
        }
        Self::new(&vec![1.0 / num_legs as f64; num_legs])
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn leg_probs(&self) -> &[f64] {
        self.legs.probs()
    }

    /// `p_j` for 1-based leg `j`.
    pub fn leg_prob(&self, leg: usize) -> f64 {
        self.legs.probs()[leg - 1]
    }

    #[inline]
    pub fn sample_leg(&self, rng: &mut SimRng) -> usize {
        self.legs.sample(rng)
    }
}

/// A lattice point of the spider. Radius is measured in lattice steps; the
/// origin is stored as leg 0, radius 0 and is the same point for every leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpiderPoint {
    leg: u32,
    radius: u32,
}

impl SpiderPoint {
    pub const ORIGIN: SpiderPoint = SpiderPoint { leg: 0, radius: 0 };

    /// Point at `radius` on 1-based `leg`. Radius 0 is the origin whatever
    /// the leg.
    ///
    /// # Panics
    /// If `leg` is 0 while `radius` is positive.
    #[inline]
    pub fn new(leg: usize, radius: u32) -> Self {
        if radius == 0 {
            return Self::ORIGIN;
        }
        assert!(leg >= 1, "legs are numbered from 1");
        SpiderPoint {
            leg: leg as u32,
            radius,
        }
    }

    /// Two-leg convention: positive values on leg 1, negative on leg 2.
    pub fn from_signed(x: i64) -> Self {
        match x.signum() {
            0 => Self::ORIGIN,
            1 => Self::new(1, x as u32),
            _ => Self::new(2, x.unsigned_abs() as u32),
        }
    }

    /// Inverse of [`SpiderPoint::from_signed`]; `None` on legs other than 1, 2.
    pub fn to_signed(self) -> Option<i64> {
        match self.leg {
            0 => Some(0),
            1 => Some(self.radius as i64),
            2 => Some(-(self.radius as i64)),
            _ => None,
        }
    }

    #[inline]
    pub fn is_origin(self) -> bool {
        self.radius == 0
    }

    #[inline]
    pub fn leg(self) -> Option<usize> {
        (self.radius > 0).then_some(self.leg as usize)
    }

    #[inline]
    pub fn radius(self) -> u32 {
        self.radius
    }

    /// Same point with radius multiplied by `factor` (moving between lattice
    /// resolutions).
    pub fn scaled(self, factor: u32) -> Self {
        SpiderPoint {
            leg: self.leg,
            radius: self.radius * factor,
        }
    }
}

/// Spider distance in lattice units.
#[inline]
pub fn distance(a: SpiderPoint, b: SpiderPoint) -> u64 {
    if a.leg == b.leg || a.is_origin() || b.is_origin() {
        (a.radius as i64 - b.radius as i64).unsigned_abs()
    } else {
        a.radius as u64 + b.radius as u64
    }
}

/// A step-indexed path started at the origin. For walks both scales are 1;
/// for the lattice Brownian approximant the spatial step is `sqrt(dt)` and
/// the time step `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiderPath {
    num_legs: usize,
    points: Vec<SpiderPoint>,
    step_scale: f64,
    time_scale: f64,
}

impl SpiderPath {
    /// Validates that the path starts at the origin, stays on legs
    /// `1..=num_legs` and moves one lattice step at a time.
    pub fn from_points(
        num_legs: usize,
        points: Vec<SpiderPoint>,
        step_scale: f64,
        time_scale: f64,
    ) -> Result<Self> {
        if points.first() != Some(&SpiderPoint::ORIGIN) {
            return Err(Error::invalid("path must start at the origin"));
        }
        if let Some(p) = points.iter().find(|p| p.leg as usize > num_legs) {
            return Err(Error::invalid(format!("point {p:?} on a leg beyond {num_legs}")));
        }
        if let Some(i) = points.windows(2).position(|w| distance(w[0], w[1]) != 1) {
            return Err(Error::invalid(format!("path jumps between steps {i} and {}", i + 1)));
        }
        if !(step_scale > 0.0 && time_scale > 0.0) {
            return Err(Error::invalid("path scales must be positive"));
        }
        Ok(SpiderPath {
            num_legs,
            points,
            step_scale,
            time_scale,
        })
    }

    fn from_walk_unchecked(num_legs: usize, points: Vec<SpiderPoint>) -> Self {
        SpiderPath {
            num_legs,
            points,
            step_scale: 1.0,
            time_scale: 1.0,
        }
    }

    /// Two-leg path from a signed lattice path.
    pub fn from_signed(path: &[i64]) -> Result<Self> {
        let points = path.iter().map(|&x| SpiderPoint::from_signed(x)).collect();
        Self::from_points(2, points, 1.0, 1.0)
    }

    /// Signed form of a path on at most two legs.
    pub fn to_signed(&self) -> Option<Vec<i64>> {
        if self.num_legs > 2 {
            return None;
        }
        self.points.iter().map(|p| p.to_signed()).collect()
    }

    pub fn num_legs(&self) -> usize {
        self.num_legs
    }

    pub fn points(&self) -> &[SpiderPoint] {
        &self.points
    }

    /// Number of steps `n`; the path holds `n + 1` points.
    pub fn horizon(&self) -> usize {
        self.points.len() - 1
    }

    pub fn step_scale(&self) -> f64 {
        self.step_scale
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn is_walk(&self) -> bool {
        self.step_scale == 1.0 && self.time_scale == 1.0
    }

    /// Radius at step `i` in spatial units.
    pub fn radius_at(&self, i: usize) -> f64 {
        self.points[i].radius as f64 * self.step_scale
    }

    /// Path value at step `i` in the signed two-leg convention, scaled.
    pub fn signed_at(&self, i: usize) -> Option<f64> {
        self.points[i]
            .to_signed()
            .map(|x| x as f64 * self.step_scale)
    }

    /// Debug dump, one `step,leg,radius` record per line (leg 0 is the
    /// origin, radius in spatial units).
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,leg,radius")?;
        for (i, p) in self.points.iter().enumerate() {
            writeln!(out, "{},{},{}", i, p.leg, p.radius as f64 * self.step_scale)?;
        }
        Ok(())
    }
}

/// Step-by-step Markov simulation of a spider walk.
#[derive(Debug, Clone)]
pub struct SpiderWalker<'a> {
    config: &'a SpiderConfig,
    pos: SpiderPoint,
}

impl<'a> SpiderWalker<'a> {
    pub fn new(config: &'a SpiderConfig) -> Self {
        SpiderWalker {
            config,
            pos: SpiderPoint::ORIGIN,
        }
    }

    #[inline]
    pub fn position(&self) -> SpiderPoint {
        self.pos
    }

    /// One transition: from the origin to radius 1 on leg `j` with
    /// probability `p_j`; elsewhere one step up or down the leg.
    #[inline]
    pub fn step(&mut self, rng: &mut SimRng) -> SpiderPoint {
        self.pos = if self.pos.radius == 0 {
            SpiderPoint {
                leg: self.config.sample_leg(rng) as u32,
                radius: 1,
            }
        } else if rng.coin() {
            SpiderPoint {
                leg: self.pos.leg,
                radius: self.pos.radius + 1,
            }
        } else if self.pos.radius == 1 {
            SpiderPoint::ORIGIN
        } else {
            SpiderPoint {
                leg: self.pos.leg,
                radius: self.pos.radius - 1,
            }
        };
        self.pos
    }

    /// Takes 64 steps at once. Only valid when the radius exceeds 64, so
    /// that the walk cannot reach the origin; consumes the same coin flips
    /// as 64 calls to [`SpiderWalker::step`] and ends at the same point.
    /// Intermediate positions are not reported, so callers must check that
    /// no site they count lies within 64 of the current radius.
    #[inline]
    pub fn advance64(&mut self, rng: &mut SimRng) {
        debug_assert!(self.pos.radius > 64);
        let ups = rng.coins64().count_ones();
        self.pos.radius = self.pos.radius + 2 * ups - 64;
    }
}

/// Simple spider walk of `n` steps by direct simulation of the transition
/// rule.
pub fn simulate_rws_markov(config: &SpiderConfig, n: usize, rng: &mut SimRng) -> SpiderPath {
    let mut walker = SpiderWalker::new(config);
    let mut points = Vec::with_capacity(n + 1);
    points.push(SpiderPoint::ORIGIN);
    for _ in 0..n {
        points.push(walker.step(rng));
    }
    SpiderPath::from_walk_unchecked(config.num_legs(), points)
}

/// Simple symmetric random walk on the integers, `S(0) = 0`.
pub fn simulate_ssrw(n: usize, rng: &mut SimRng) -> Vec<i64> {
    let mut path = Vec::with_capacity(n + 1);
    let mut s = 0i64;
    path.push(s);
    for _ in 0..n {
        s += if rng.coin() { 1 } else { -1 };
        path.push(s);
    }
    path
}

/// A maximal stretch away from zero: `start` is the index of a zero, `end`
/// the index of the next zero (`None` if the path ends first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcursionInterval {
    pub start: usize,
    pub end: Option<usize>,
    pub label: Option<usize>,
}

impl ExcursionInterval {
    pub fn is_complete(&self) -> bool {
        self.end.is_some()
    }

    /// Steps `start+1 ..= end` (or to `horizon` for an unfinished one).
    pub fn steps(&self, horizon: usize) -> std::ops::RangeInclusive<usize> {
        self.start + 1..=self.end.unwrap_or(horizon)
    }
}

/// Excursions from zero of a lattice path, in order. The final excursion
/// is included with `end = None` if the path has not returned by its end.
pub fn decompose_excursions(path: &[i64]) -> Vec<ExcursionInterval> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &x) in path.iter().enumerate() {
        if x == 0 {
            if let Some(s) = start.take() {
                out.push(ExcursionInterval {
                    start: s,
                    end: Some(i),
                    label: None,
                });
            }
        } else if start.is_none() {
            // i >= 1 here when the path starts at zero
            start = Some(i.saturating_sub(1));
        }
    }
    if let Some(s) = start {
        out.push(ExcursionInterval {
            start: s,
            end: None,
            label: None,
        });
    }
    out
}

fn check_starts_at_zero(ssrw: &[i64]) -> Result<()> {
    if ssrw.first() != Some(&0) {
        return Err(Error::invalid("lattice path must start at 0"));
    }
    Ok(())
}

/// Spider walk built from `|S|` by sending excursion `m` to leg `labels[m]`.
pub fn build_rws_with_labels(num_legs: usize, ssrw: &[i64], labels: &[usize]) -> Result<SpiderPath> {
    check_starts_at_zero(ssrw)?;
    let excursions = decompose_excursions(ssrw);
    if labels.len() < excursions.len() {
        return Err(Error::invalid(format!(
            "{} labels for {} excursions",
            labels.len(),
            excursions.len()
        )));
    }
    if let Some(l) = labels.iter().find(|&&l| l == 0 || l > num_legs) {
        return Err(Error::invalid(format!("label {l} is not a leg of a {num_legs}-leg spider")));
    }
    let mut points = vec![SpiderPoint::ORIGIN; ssrw.len()];
    let horizon = ssrw.len() - 1;
    for (exc, &leg) in excursions.iter().zip(labels) {
        for i in exc.steps(horizon) {
            points[i] = SpiderPoint::new(leg, ssrw[i].unsigned_abs() as u32);
        }
    }
    SpiderPath::from_points(num_legs, points, 1.0, 1.0)
}

/// Spider walk built from `|S|` with independent leg labels drawn from the
/// config for every excursion, including an unfinished last one.
pub fn build_rws_from_ssrw(config: &SpiderConfig, ssrw: &[i64], rng: &mut SimRng) -> Result<SpiderPath> {
    check_starts_at_zero(ssrw)?;
    let count = decompose_excursions(ssrw).len();
    let labels: Vec<usize> = (0..count).map(|_| config.sample_leg(rng)).collect();
    build_rws_with_labels(config.num_legs(), ssrw, &labels)
}

/// Skew walk: every excursion of `S` is given sign `+1` with probability
/// `p`, `-1` otherwise, and placed at height `|S|` with that sign.
pub fn build_skew_from_ssrw(p: f64, ssrw: &[i64], rng: &mut SimRng) -> Result<Vec<i64>> {
    check_starts_at_zero(ssrw)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("skew parameter {p} outside [0,1]")));
    }
    let mut out = vec![0i64; ssrw.len()];
    let horizon = ssrw.len() - 1;
    for exc in decompose_excursions(ssrw) {
        let sign = if rng.bernoulli(p) { 1 } else { -1 };
        for i in exc.steps(horizon) {
            out[i] = sign * ssrw[i].abs();
        }
    }
    Ok(out)
}

/// Number of lattice steps covering `[0, t]` at resolution `dt`.
pub(crate) fn lattice_steps(t: f64, dt: f64) -> usize {
    (t / dt + 1e-9).floor() as usize
}

/// Lattice approximation of Brownian motion on the spider: a spider walk of
/// `floor(t/dt)` steps with spatial step `sqrt(dt)` and time step `dt`.
pub fn simulate_bms_lattice(config: &SpiderConfig, t: f64, dt: f64, rng: &mut SimRng) -> Result<SpiderPath> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("horizon must be nonnegative, got {t}")));
    }
    let walk = simulate_rws_markov(config, lattice_steps(t, dt), rng);
    Ok(SpiderPath {
        num_legs: walk.num_legs,
        points: walk.points,
        step_scale: dt.sqrt(),
        time_scale: dt,
    })
}
