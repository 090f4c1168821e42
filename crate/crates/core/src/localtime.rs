//! Visit-count functionals of spider and skew walk paths.
//!
//! All counts run over steps `1..=n`; the starting point at step 0 is never
//! counted. Besides functionals of stored paths, this module has streaming
//! samplers that simulate a walk and keep only the counts. They consume the
//! generator exactly like [`simulate_rws_markov`](crate::spider::simulate_rws_markov),
//! so for a given seed they agree with the path-based functionals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randkit::SimRng;
use crate::spider::{SpiderConfig, SpiderPath, SpiderPoint, SpiderWalker};

/// Visit counts up to a horizon: `origin_count` is the local time at the
/// body, `site_counts` the local time at every visited `(leg, radius)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalTimeLedger {
    pub origin_count: u64,
    pub site_counts: BTreeMap<SpiderPoint, u64>,
    pub horizon: usize,
}

impl LocalTimeLedger {
    pub fn at(&self, site: SpiderPoint) -> u64 {
        if site.is_origin() {
            self.origin_count
        } else {
            self.site_counts.get(&site).copied().unwrap_or(0)
        }
    }

    /// Sum over radii of the counts on one leg.
    pub fn leg_total(&self, leg: usize) -> u64 {
        self.site_counts
            .iter()
            .filter(|(s, _)| s.leg() == Some(leg))
            .map(|(_, c)| c)
            .sum()
    }
}

/// Steps spent on each leg (`per_leg[j-1]`) and at the origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupationVector {
    pub per_leg: Vec<u64>,
    pub origin_time: u64,
    pub horizon: usize,
}

impl OccupationVector {
    fn empty(num_legs: usize) -> Self {
        OccupationVector {
            per_leg: vec![0; num_legs],
            origin_time: 0,
            horizon: 0,
        }
    }

    /// `T(j,n)/n` for 1-based leg `j`.
    pub fn fraction(&self, leg: usize) -> f64 {
        self.per_leg[leg - 1] as f64 / self.horizon as f64
    }

    /// Largest leg occupation.
    pub fn max(&self) -> u64 {
        self.per_leg.iter().copied().max().unwrap_or(0)
    }

    /// Smallest leg occupation.
    pub fn min(&self) -> u64 {
        self.per_leg.iter().copied().min().unwrap_or(0)
    }
}

/// Indices `i >= 1` at which the path sits at the origin, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnTimes {
    pub rho: Vec<usize>,
}

/// Paths whose visits to the origin can be read off.
pub trait OriginTrack {
    fn horizon(&self) -> usize;
    fn at_origin(&self, i: usize) -> bool;
}

impl OriginTrack for SpiderPath {
    fn horizon(&self) -> usize {
        SpiderPath::horizon(self)
    }

    fn at_origin(&self, i: usize) -> bool {
        self.points()[i].is_origin()
    }
}

impl OriginTrack for [i64] {
    fn horizon(&self) -> usize {
        self.len().saturating_sub(1)
    }

    fn at_origin(&self, i: usize) -> bool {
        self[i] == 0
    }
}

impl OriginTrack for Vec<i64> {
    fn horizon(&self) -> usize {
        self.as_slice().horizon()
    }

    fn at_origin(&self, i: usize) -> bool {
        self[i] == 0
    }
}

pub fn local_time(path: &SpiderPath) -> LocalTimeLedger {
    let mut ledger = LocalTimeLedger {
        origin_count: 0,
        site_counts: BTreeMap::new(),
        horizon: path.horizon(),
    };
    for &p in &path.points()[1..] {
        if p.is_origin() {
            ledger.origin_count += 1;
        } else {
            *ledger.site_counts.entry(p).or_insert(0) += 1;
        }
    }
    ledger
}

pub fn occupation_times(path: &SpiderPath) -> OccupationVector {
    let mut occ = OccupationVector::empty(path.num_legs());
    occ.horizon = path.horizon();
    for &p in &path.points()[1..] {
        match p.leg() {
            Some(j) => occ.per_leg[j - 1] += 1,
            None => occ.origin_time += 1,
        }
    }
    occ
}

pub fn return_times<P: OriginTrack + ?Sized>(path: &P) -> ReturnTimes {
    ReturnTimes {
        rho: (1..=path.horizon()).filter(|&i| path.at_origin(i)).collect(),
    }
}

/// Visits to `x` during each complete excursion of a signed skew path:
/// `V_i = xi*(x, rho_i) - xi*(x, rho_{i-1})`.
pub fn excursion_local_time_samples(path: &[i64], x: i64) -> Result<Vec<u64>> {
    if x == 0 {
        return Err(Error::invalid("excursion local time is taken at a nonzero site"));
    }
    if path.first() != Some(&0) {
        return Err(Error::invalid("lattice path must start at 0"));
    }
    let rho = return_times(path).rho;
    if rho.is_empty() {
        return Err(Error::NoCompleteExcursion);
    }
    let mut prev = 0;
    Ok(rho
        .iter()
        .map(|&r| {
            let v = path[prev + 1..=r].iter().filter(|&&s| s == x).count() as u64;
            prev = r;
            v
        })
        .collect())
}

/// Visits to `site` during one excursion of the spider walk away from the
/// origin, simulated step by step.
///
/// The walk is only followed while it is strictly below the radius of
/// `site` on the site's leg. A step outward from the site starts a
/// sub-excursion that cannot reach the origin without passing back through
/// the site, so it is replaced by its (certain) return, which adds one
/// visit. The result is exact and the simulation terminates quickly even
/// though excursion lengths have infinite mean.
pub fn sample_excursion_visits(config: &SpiderConfig, site: SpiderPoint, rng: &mut SimRng) -> Result<u64> {
    let Some(leg) = site.leg() else {
        return Err(Error::invalid("excursion local time is taken away from the origin"));
    };
    if leg > config.num_legs() {
        return Err(Error::invalid(format!("leg {leg} beyond {}", config.num_legs())));
    }
    if config.sample_leg(rng) != leg {
        return Ok(0);
    }
    let target = site.radius();
    let mut r = 1u32;
    let mut visits = 0u64;
    loop {
        if r == target {
            visits += 1;
            if !rng.coin() {
                r -= 1;
            }
        } else if rng.coin() {
            r += 1;
        } else {
            r -= 1;
        }
        if r == 0 {
            return Ok(visits);
        }
    }
}

/// Scale `(2p_j(4x-1) - 4p_j^2)^{1/2} n^{1/4}` of the contrast statistic at
/// radius `x`, leg probability `p_leg`, horizon `n`.
pub fn contrast_scale(p_leg: f64, x: u32, n: usize) -> f64 {
    let c = 2.0 * p_leg;
    let var = c * (4.0 * x as f64 - 1.0) - c * c;
    var.sqrt() * (n as f64).powf(0.25)
}

/// Running contrast `xi((x,j),k) - 2 p_j xi(0,k)` for `k = 1..=n`.
pub fn contrast_process(path: &SpiderPath, config: &SpiderConfig, x: u32, leg: usize) -> Result<Vec<f64>> {
    if x == 0 {
        return Err(Error::invalid("contrast radius must be positive"));
    }
    if leg == 0 || leg > config.num_legs() {
        return Err(Error::invalid(format!("leg {leg} not in 1..={}", config.num_legs())));
    }
    let c = 2.0 * config.leg_prob(leg);
    let site = SpiderPoint::new(leg, x);
    let (mut at_site, mut at_origin) = (0u64, 0u64);
    Ok(path.points()[1..]
        .iter()
        .map(|&p| {
            if p == site {
                at_site += 1;
            } else if p.is_origin() {
                at_origin += 1;
            }
            at_site as f64 - c * at_origin as f64
        })
        .collect())
}

/// Local time of a lattice Brownian path at radius `x` on `leg`: visits to
/// the nearest lattice site times the spatial step. At `x = 0` the origin
/// visits are used whatever the leg.
pub fn brownian_local_time_estimate(path: &SpiderPath, x: f64, leg: usize) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("local time radius must be nonnegative, got {x}")));
    }
    let r = (x / path.step_scale()).round();
    if r > u32::MAX as f64 {
        return Ok(0.0);
    }
    let site = if r == 0.0 {
        SpiderPoint::ORIGIN
    } else {
        if leg == 0 || leg > path.num_legs() {
            return Err(Error::invalid(format!("leg {leg} not in 1..={}", path.num_legs())));
        }
        SpiderPoint::new(leg, r as u32)
    };
    let visits = path.points()[1..].iter().filter(|&&p| p == site).count();
    Ok(visits as f64 * path.step_scale())
}

/// Leg occupation of an `n`-step spider walk, simulated without storing it.
pub fn sample_occupation(config: &SpiderConfig, n: usize, rng: &mut SimRng) -> OccupationVector {
    let mut occ = OccupationVector::empty(config.num_legs());
    let mut walker = SpiderWalker::new(config);
    advance_counting(&mut walker, &mut occ, n, rng);
    occ
}

/// Occupation vectors of one walk at the dyadic times `1, 2, 4, ..., 2^k_max`.
pub fn sample_dyadic_occupation(config: &SpiderConfig, k_max: u32, rng: &mut SimRng) -> Vec<OccupationVector> {
    let mut occ = OccupationVector::empty(config.num_legs());
    let mut walker = SpiderWalker::new(config);
    let mut out = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let target = 1usize << k;
        let steps = target - occ.horizon;
        advance_counting(&mut walker, &mut occ, steps, rng);
        out.push(occ.clone());
    }
    out
}

fn advance_counting(walker: &mut SpiderWalker<'_>, occ: &mut OccupationVector, steps: usize, rng: &mut SimRng) {
    let mut left = steps;
    while left > 0 {
        let pos = walker.position();
        if left >= 64 && pos.radius() > 64 {
            walker.advance64(rng);
            occ.per_leg[pos.leg().unwrap() - 1] += 64;
            left -= 64;
            continue;
        }
        match walker.step(rng).leg() {
            Some(j) => occ.per_leg[j - 1] += 1,
            None => occ.origin_time += 1,
        }
        left -= 1;
    }
    occ.horizon += steps;
}

/// `(xi(0,n), xi(site,n))` of an `n`-step spider walk, simulated without
/// storing it.
pub fn sample_site_counts(config: &SpiderConfig, n: usize, site: SpiderPoint, rng: &mut SimRng) -> (u64, u64) {
    let mut walker = SpiderWalker::new(config);
    let (mut at_origin, mut at_site) = (0u64, 0u64);
    let site_leg = site.leg();
    let site_r = site.radius() as i64;
    let mut left = n;
    while left > 0 {
        let pos = walker.position();
        if left >= 64 && pos.radius() > 64 && (pos.leg() != site_leg || (pos.radius() as i64 - site_r).abs() > 64) {
            walker.advance64(rng);
            left -= 64;
            continue;
        }
        let p = walker.step(rng);
        if p.is_origin() {
            at_origin += 1;
        } else if p == site {
            at_site += 1;
        }
        left -= 1;
    }
    (at_origin, at_site)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randkit::SeedSpec;
    use crate::spider::{build_skew_from_ssrw, simulate_rws_markov, simulate_ssrw};

    fn hand_path() -> SpiderPath {
        SpiderPath::from_points(
            2,
            vec![
                SpiderPoint::ORIGIN,
                SpiderPoint::new(1, 1),
                SpiderPoint::ORIGIN,
                SpiderPoint::new(2, 1),
                SpiderPoint::new(2, 2),
            ],
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn hand_counts() {
        let path = hand_path();
        let lt = local_time(&path);
        assert_eq!(lt.origin_count, 1);
        assert_eq!(lt.at(SpiderPoint::new(1, 1)), 1);
        assert_eq!(lt.at(SpiderPoint::new(2, 1)), 1);
        assert_eq!(lt.at(SpiderPoint::new(2, 2)), 1);
        assert_eq!(lt.at(SpiderPoint::new(2, 3)), 0);
        let occ = occupation_times(&path);
        assert_eq!(occ.per_leg, vec![1, 2]);
        assert_eq!(occ.origin_time, 1);
    }

    #[test]
    fn empty_path_counts() {
        let path = SpiderPath::from_points(3, vec![SpiderPoint::ORIGIN], 1.0, 1.0).unwrap();
        let lt = local_time(&path);
        assert_eq!(lt.origin_count, 0);
        assert!(lt.site_counts.is_empty());
        assert_eq!(occupation_times(&path).per_leg, vec![0, 0, 0]);
    }

    #[test]
    fn return_time_examples() {
        assert_eq!(return_times(&[0i64, 1, 0, -1, 0][..]).rho, vec![2, 4]);
        assert!(return_times(&[0i64, 1, 2, 1][..]).rho.is_empty());
    }

    #[test]
    fn excursion_samples_examples() {
        assert_eq!(excursion_local_time_samples(&[0, 1, 0], 1).unwrap(), vec![1]);
        assert_eq!(excursion_local_time_samples(&[0, -1, 0], 1).unwrap(), vec![0]);
        assert!(matches!(
            excursion_local_time_samples(&[0, 1, 2], 1),
            Err(Error::NoCompleteExcursion)
        ));
        assert!(excursion_local_time_samples(&[0, 1, 0], 0).is_err());
    }

    #[test]
    fn skew_origin_local_time_matches_source() {
        let mut rng = SeedSpec::new(12).rng();
        for _ in 0..50 {
            let s = simulate_ssrw(2000, &mut rng);
            let skew = build_skew_from_ssrw(0.3, &s, &mut rng).unwrap();
            assert_eq!(return_times(&s).rho, return_times(&skew).rho);
        }
    }

    #[test]
    fn contrast_zero_before_any_visit() {
        let config = SpiderConfig::uniform(3).unwrap();
        let path = SpiderPath::from_points(
            3,
            vec![SpiderPoint::ORIGIN, SpiderPoint::new(2, 1), SpiderPoint::new(2, 2)],
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(contrast_process(&path, &config, 1, 1).unwrap(), vec![0.0, 0.0]);
        assert!(contrast_process(&path, &config, 0, 1).is_err());
        assert!(contrast_process(&path, &config, 1, 4).is_err());
    }

    #[test]
    fn streaming_kernels_agree_with_paths() {
        let config = SpiderConfig::new(&[0.2, 0.3, 0.5]).unwrap();
        let site = SpiderPoint::new(3, 2);
        for rep in 0..20 {
            let seed = SeedSpec::new(77).derive_stream(rep);
            let n = 20_000 + rep as usize;
            let path = simulate_rws_markov(&config, n, &mut seed.rng());
            assert_eq!(occupation_times(&path), sample_occupation(&config, n, &mut seed.rng()));
            let lt = local_time(&path);
            assert_eq!(
                (lt.origin_count, lt.at(site)),
                sample_site_counts(&config, n, site, &mut seed.rng())
            );
            let dyadic = sample_dyadic_occupation(&config, 14, &mut seed.rng());
            let path = simulate_rws_markov(&config, 1 << 14, &mut seed.rng());
            for (k, occ) in dyadic.iter().enumerate() {
                let prefix = SpiderPath::from_points(3, path.points()[..=(1 << k)].to_vec(), 1.0, 1.0).unwrap();
                assert_eq!(*occ, occupation_times(&prefix));
            }
        }
    }

    #[test]
    fn excursion_sampler_agrees_with_brute_force_on_short_paths() {
        // Brute-force excursions of SSRW-built skew paths at x = 1 and the
        // shortcut sampler share the law; compare the empirical P(V = 0) and mean.
        let config = SpiderConfig::skew(0.3).unwrap();
        let mut rng = SeedSpec::new(21).rng();
        let n = 200_000;
        let fast: Vec<u64> = (0..n)
            .map(|_| sample_excursion_visits(&config, SpiderPoint::from_signed(1), &mut rng).unwrap())
            .collect();
        let s = simulate_ssrw(4_000_000, &mut rng);
        let skew = build_skew_from_ssrw(0.3, &s, &mut rng).unwrap();
        let slow = excursion_local_time_samples(&skew, 1).unwrap();
        let zero = |v: &[u64]| v.iter().filter(|&&x| x == 0).count() as f64 / v.len() as f64;
        let se = (0.7 * 0.3 / slow.len() as f64).sqrt() + (0.7 * 0.3 / n as f64).sqrt();
        assert!((zero(&fast) - zero(&slow)).abs() < 4.0 * se);
        assert!((zero(&fast) - 0.7).abs() < 4.0 * (0.21 / n as f64).sqrt());
    }

    #[test]
    fn brownian_local_time_edge_cases() {
        let path = SpiderPath::from_points(
            2,
            vec![SpiderPoint::ORIGIN, SpiderPoint::new(1, 1), SpiderPoint::ORIGIN],
            0.5,
            0.25,
        )
        .unwrap();
        assert_eq!(brownian_local_time_estimate(&path, 0.0, 1).unwrap(), 0.5);
        assert_eq!(brownian_local_time_estimate(&path, 0.5, 1).unwrap(), 0.5);
        assert_eq!(brownian_local_time_estimate(&path, 3.0, 1).unwrap(), 0.0);
        assert!(brownian_local_time_estimate(&path, -1.0, 1).is_err());
    }
}
