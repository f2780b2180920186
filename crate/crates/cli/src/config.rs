//! Run settings gathered from flags and, optionally, a JSON file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use edfading::registry::ChannelArgs;
use edfading::{db_to_linear, DelayQoS};
use serde::{Deserialize, Deserializer};

use crate::UsageError;

/// Mean SNR in dB: one value or an inclusive `start:stop:step` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrSpec {
    Point(f64),
    Range { start: f64, stop: f64, step: f64 },
}

impl SnrSpec {
    /// Grid points in dB, in ascending order of index.
    pub fn points(&self) -> Vec<f64> {
        match *self {
            SnrSpec::Point(x) => vec![x],
            SnrSpec::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| start + step * i as f64).collect()
            }
        }
    }
}

impl FromStr for SnrSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("'{t}' is not a number"))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [x] => Ok(SnrSpec::Point(parse(x)?)),
            [a, b, c] => {
                let (start, stop, step) = (parse(a)?, parse(b)?, parse(c)?);
                if !(step > 0.0) || stop < start {
                    return Err(format!("range '{s}' needs step > 0 and stop >= start"));
                }
                Ok(SnrSpec::Range { start, stop, step })
            }
            _ => Err(format!("expected R or start:stop:step, got '{s}'")),
        }
    }
}

impl fmt::Display for SnrSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnrSpec::Point(x) => write!(f, "{x}"),
            SnrSpec::Range { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
        }
    }
}

impl<'de> Deserialize<'de> for SnrSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(SnrSpec::Point(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Flags shared by every subcommand. Each may also come from `--json`.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunArgs {
    /// Fading model: kms or fisher.
    #[arg(long)]
    pub channel: Option<String>,
    /// Dominant-to-scattered power ratio (kms).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of clusters (kms).
    #[arg(long)]
    pub mu: Option<u32>,
    /// Shadowing index (kms, integer) or multipath parameter (fisher).
    #[arg(long)]
    pub m: Option<f64>,
    /// Shadowing shape (fisher).
    #[arg(long)]
    #[serde(alias = "m_s")]
    pub ms: Option<f64>,
    /// Mean SNR in dB, R or start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(alias = "snr_db")]
    pub snr_db: Option<SnrSpec>,
    /// Energy-detector time-bandwidth product [default: 2].
    #[arg(long)]
    pub u: Option<u32>,
    /// Delay exponent A [default: 1].
    #[arg(long)]
    pub a: Option<f64>,
    /// Delay exponent Θ; with --block-time and --bandwidth gives A = ΘTB/ln 2.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Block duration T in seconds.
    #[arg(long)]
    #[serde(alias = "block_time")]
    pub block_time: Option<f64>,
    /// Bandwidth B in Hz.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Number of log-spaced false-alarm points [default: 50].
    #[arg(long)]
    #[serde(alias = "pf_points")]
    pub pf_points: Option<usize>,
    /// Smallest false-alarm probability [default: 1e-3].
    #[arg(long)]
    #[serde(alias = "pf_min")]
    pub pf_min: Option<f64>,
    /// Largest false-alarm probability [default: 0.999].
    #[arg(long)]
    #[serde(alias = "pf_max")]
    pub pf_max: Option<f64>,
    /// Single false-alarm probability for verify [default: 0.01, 0.1 and 0.5].
    #[arg(long)]
    pub pf: Option<f64>,
    /// Series truncation tolerance [default: 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Monte Carlo seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count for verify [default: 1000000].
    #[arg(long)]
    #[serde(alias = "mc_samples")]
    pub mc_samples: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON object with any of these settings; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub json: Option<PathBuf>,
    /// Multiplies closed-form values in verify (test hook).
    #[arg(long, hide = true)]
    #[serde(skip)]
    pub perturb: Option<f64>,
}

macro_rules! fill {
    ($dst:ident, $src:ident, $($field:ident),*) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field; } )*
    };
}

impl RunArgs {
    /// Fills unset fields from the `--json` file, if one was given.
    pub fn merge_json(mut self) -> anyhow::Result<Self> {
        let Some(path) = self.json.clone() else {
            return Ok(self);
        };
        let file = read_json(&path)?;
        fill!(
            self, file, channel, kappa, mu, m, ms, snr_db, u, a, theta, block_time, bandwidth,
            pf_points, pf_min, pf_max, pf, tol, seed, mc_samples, out
        );
        Ok(self)
    }

    pub fn u(&self) -> anyhow::Result<u32> {
        match self.u.unwrap_or(2) {
            0 => Err(UsageError("--u must be at least 1".into()).into()),
            u => Ok(u),
        }
    }

    pub fn tol(&self) -> anyhow::Result<f64> {
        let tol = self.tol.unwrap_or(1e-10);
        if !(tol > 0.0) {
            return Err(UsageError(format!("--tol must be positive, got {tol}")).into());
        }
        Ok(tol)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(42)
    }

    pub fn mc_samples(&self) -> anyhow::Result<usize> {
        let n = self.mc_samples.unwrap_or(1_000_000);
        if n < 10_000 {
            return Err(UsageError(format!("--mc-samples must be at least 10000, got {n}")).into());
        }
        Ok(n)
    }

    pub fn qos(&self) -> anyhow::Result<DelayQoS> {
        let physical = [self.theta, self.block_time, self.bandwidth];
        let q = match (self.a, physical) {
            (Some(_), [None, None, None]) | (None, [None, None, None]) => {
                DelayQoS::new(self.a.unwrap_or(1.0))
            }
            (None, [Some(t), Some(tb), Some(b)]) => DelayQoS::from_physical(t, tb, b),
            (Some(_), _) => {
                return Err(UsageError(
                    "give either --a or --theta/--block-time/--bandwidth".into(),
                )
                .into())
            }
            (None, _) => {
                return Err(
                    UsageError("--theta, --block-time and --bandwidth go together".into()).into(),
                )
            }
        };
        Ok(q?)
    }

    /// Log-spaced false-alarm grid.
    pub fn pf_grid(&self) -> anyhow::Result<Vec<f64>> {
        let n = self.pf_points.unwrap_or(50);
        let lo = self.pf_min.unwrap_or(1e-3);
        let hi = self.pf_max.unwrap_or(0.999);
        if n == 0 {
            return Err(UsageError("--pf-points must be at least 1".into()).into());
        }
        if !(lo > 0.0 && hi < 1.0 && lo <= hi) || (n > 1 && lo == hi) {
            return Err(
                UsageError(format!("need 0 < pf-min < pf-max < 1, got {lo} and {hi}")).into(),
            );
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let (a, b) = (lo.ln(), hi.ln());
        Ok((0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect())
    }

    pub fn snr(&self) -> anyhow::Result<SnrSpec> {
        self.snr_db
            .ok_or_else(|| UsageError("--snr-db is required".into()).into())
    }

    /// The single SNR a command that does not sweep needs, in dB.
    pub fn snr_point(&self) -> anyhow::Result<f64> {
        match self.snr()? {
            SnrSpec::Point(x) => Ok(x),
            range => Err(UsageError(format!(
                "this command takes one --snr-db value, got {range}"
            ))
            .into()),
        }
    }

    pub fn channel_name(&self) -> anyhow::Result<&str> {
        self.channel
            .as_deref()
            .ok_or_else(|| UsageError("--channel is required".into()).into())
    }

    /// Channel parameters at mean SNR `snr_db`.
    pub fn channel_args(&self, snr_db: f64) -> ChannelArgs {
        ChannelArgs {
            kappa: self.kappa,
            mu: self.mu,
            m: self.m,
            m_s: self.ms,
            mean_snr: db_to_linear(snr_db),
        }
    }
}

fn read_json(path: &Path) -> anyhow::Result<RunArgs> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("bad settings in {}: {e}", path.display())).into())
}
