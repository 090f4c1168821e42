use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spider::{SpiderConfig, SpiderPoint};

use super::catalog::ExperimentKind;

/// One experiment run. Read from a TOML document; unknown keys are errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_legs: Option<usize>,
    pub leg_probs: Vec<f64>,
    #[serde(default)]
    pub walk_length: usize,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leg: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_threads")]
    pub threads: usize,
    /// Exponent `a` of the test function `(log x)^a` (chung-erdos).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// Number of dyadic terms of the classifier (chung-erdos).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    /// Time of the IBM law; both 1 and 100 when absent (ibm-law).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default)]
    pub emit_samples: bool,
}

fn default_threads() -> usize {
    1
}

pub const DEFAULT_K_MAX: u32 = 60;

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        ExperimentKind::from_name(&self.experiment)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{}'", self.experiment)))
    }

    pub fn spider(&self) -> Result<SpiderConfig> {
        if let Some(n) = self.num_legs {
            if n != self.leg_probs.len() {
                return Err(Error::Config(format!(
                    "num_legs = {n} but leg_probs has {} entries",
                    self.leg_probs.len()
                )));
            }
        }
        SpiderConfig::new(&self.leg_probs).map_err(|e| Error::Config(e.to_string()))
    }

    /// The site named by `x` and `leg`. With `leg` given, `x` is a positive
    /// radius on that leg; without it the spider must have two legs and `x`
    /// is signed (negative values on leg 2).
    pub fn site(&self) -> Result<SpiderPoint> {
        let x = self.x.ok_or_else(|| Error::Config("this experiment needs a site x".into()))?;
        if x == 0 {
            return Err(Error::Config("site x must be nonzero".into()));
        }
        let legs = self.leg_probs.len();
        match self.leg {
            Some(j) => {
                if j == 0 || j > legs {
                    return Err(Error::Config(format!("leg {j} not in 1..={legs}")));
                }
                if x < 0 {
                    return Err(Error::Config("x must be positive when a leg is given".into()));
                }
                Ok(SpiderPoint::new(j, radius(x)?))
            }
            None if legs == 2 => {
                radius(x)?;
                Ok(SpiderPoint::from_signed(x))
            }
            None => Err(Error::Config("a spider with more than two legs needs `leg`".into())),
        }
    }

    /// Fine resolution `m` with `dt = 1/m^2`.
    pub fn fine_resolution(&self) -> Result<u32> {
        let dt = self.dt.ok_or_else(|| Error::Config("this experiment needs dt".into()))?;
        if !(dt > 0.0 && dt < 1.0) {
            return Err(Error::Config(format!("dt must lie in (0,1), got {dt}")));
        }
        let inv = dt.sqrt().recip();
        let m = inv.round();
        if (inv - m).abs() > 1e-9 * m || m < 2.0 || m > 65_536.0 {
            return Err(Error::Config(format!("dt = {dt} is not 1/m^2 for an integer m in 2..=65536")));
        }
        Ok(m as u32)
    }

    pub fn k_max(&self) -> u32 {
        self.k_max.unwrap_or(DEFAULT_K_MAX)
    }

    /// Checks everything the named experiment reads before it starts.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        if self.replications == 0 {
            return Err(Error::Config("replications must be positive".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be positive".into()));
        }
        let spider = self.spider()?;
        let needs_walk = !matches!(kind, ExperimentKind::ExcursionPmf | ExperimentKind::IbmLaw);
        if needs_walk && self.walk_length == 0 {
            return Err(Error::Config("walk_length must be positive".into()));
        }
        match kind {
            ExperimentKind::ExcursionPmf | ExperimentKind::Dobrushin | ExperimentKind::ExpIncrements => {
                let site = self.site()?;
                let p = spider.leg_prob(site.leg().unwrap());
                if p <= 0.0 {
                    return Err(Error::Config("the site's leg has probability 0".into()));
                }
            }
            _ => {}
        }
        match kind {
            ExperimentKind::Lamperti => {
                if spider.num_legs() != 2 || spider.leg_probs().iter().any(|&p| p <= 0.0) {
                    return Err(Error::Config("lamperti needs two legs with positive probabilities".into()));
                }
            }
            ExperimentKind::JointOccupation => {
                if spider.leg_probs().iter().any(|&p| p <= 0.0) {
                    return Err(Error::Config("joint-occupation needs positive leg probabilities".into()));
                }
            }
            ExperimentKind::Minmax => {
                if spider.num_legs() < 2 {
                    return Err(Error::Config("minmax needs at least two legs".into()));
                }
                if !self.walk_length.is_power_of_two() {
                    return Err(Error::Config("minmax walk_length must be a power of two".into()));
                }
            }
            ExperimentKind::ChungErdos => {
                let a = self
                    .exponent
                    .ok_or_else(|| Error::Config("chung-erdos needs an exponent".into()))?;
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::Config(format!("exponent must be positive, got {a}")));
                }
                if !(10..=1000).contains(&self.k_max()) {
                    return Err(Error::Config("k_max must lie in 10..=1000".into()));
                }
                if spider.num_legs() < 2 {
                    return Err(Error::Config("chung-erdos needs at least two legs".into()));
                }
                if !self.walk_length.is_power_of_two() {
                    return Err(Error::Config("chung-erdos walk_length must be a power of two".into()));
                }
            }
            ExperimentKind::CouplingRate => {
                self.fine_resolution()?;
                if self.walk_length < 16 || !self.walk_length.is_power_of_two() {
                    return Err(Error::Config("coupling-rate walk_length must be a power of two >= 16".into()));
                }
            }
            ExperimentKind::ExpIncrements => {
                self.fine_resolution()?;
            }
            ExperimentKind::IbmLaw => {
                if let Some(t) = self.time {
                    if !(t > 0.0 && t.is_finite()) {
                        return Err(Error::Config(format!("time must be positive, got {t}")));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Desk-scale default for each catalog entry.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let mut c = ExperimentConfig {
            experiment: kind.name().to_string(),
            num_legs: None,
            leg_probs: vec![0.5, 0.5],
            walk_length: 0,
            replications: 1,
            seed: 1,
            dt: None,
            x: None,
            leg: None,
            output_path: None,
            threads: 1,
            exponent: None,
            k_max: None,
            time: None,
            emit_samples: false,
        };
        match kind {
            ExperimentKind::ExcursionPmf => {
                c.x = Some(1);
                c.replications = 1_000_000;
            }
            ExperimentKind::Dobrushin => {
                c.leg_probs = vec![0.3, 0.7];
                c.x = Some(2);
                c.walk_length = 1_000_000;
                c.replications = 10_000;
            }
            ExperimentKind::Lamperti => {
                c.leg_probs = vec![0.3, 0.7];
                c.walk_length = 10_000;
                c.replications = 50_000;
            }
            ExperimentKind::JointOccupation => {
                c.leg_probs = vec![0.2, 0.3, 0.5];
                c.walk_length = 10_000;
                c.replications = 20_000;
            }
            ExperimentKind::CouplingRate => {
                c.dt = Some(1.0 / 1024.0);
                c.walk_length = 1 << 16;
                c.replications = 100;
            }
            ExperimentKind::ExpIncrements => {
                c.dt = Some(1.0 / 1024.0);
                c.x = Some(1);
                c.walk_length = 256;
                c.replications = 100_000;
            }
            ExperimentKind::Minmax => {
                c.leg_probs = vec![1.0 / 3.0; 3];
                c.walk_length = 1 << 20;
                c.replications = 200;
            }
            ExperimentKind::ChungErdos => {
                c.leg_probs = vec![1.0 / 3.0; 3];
                c.exponent = Some(3.0);
                c.walk_length = 1 << 16;
                c.replications = 100;
            }
            ExperimentKind::IbmLaw => {
                c.replications = 1_000_000;
            }
        }
        c
    }
}

fn radius(x: i64) -> Result<u32> {
    u32::try_from(x.unsigned_abs()).map_err(|_| Error::Config(format!("site {x} out of range")))
}
