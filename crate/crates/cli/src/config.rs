use anyhow::{bail, Result};
use idealsum::banach::SpaceSpec;
use idealsum::ideal::IdealSpec;
use idealsum::matrix::config::MatrixSpec;
use idealsum::orlicz::GaugeSpec;
use idealsum::scale::default_eps_list;
use idealsum::Scale;
use serde::{Deserialize, Serialize};

pub const MAX_N: usize = 2_000_000;
pub const MAX_I: usize = 4096;
pub const MAX_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Summable,
    Strong,
    Statistical,
    Limsup,
    Cluster,
    Precauchy,
    Decompose,
    Tauberian,
    Simons,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_tol: Option<f64>,
}

fn cesaro() -> MatrixSpec {
    MatrixSpec::Cesaro
}

fn finite() -> IdealSpec {
    IdealSpec::Finite
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub mode: Mode,
    #[serde(default = "cesaro")]
    pub matrix: MatrixSpec,
    #[serde(default = "finite")]
    pub ideal: IdealSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeSpec>,
    #[serde(default)]
    pub scale: ScaleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Interval (alpha, beta) for the pre-Cauchy dichotomy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    /// Dual-ball samples in simons mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl AnalysisConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: AnalysisConfig = serde_json::from_str(text).map_err(|e| anyhow::anyhow!("config: {e}"))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        match self.mode {
            Mode::Cluster if self.target.is_none() => bail!("config field `target`: required in cluster mode"),
            Mode::Simons if self.space.is_none() => bail!("config field `space`: required in simons mode"),
            Mode::Precauchy if self.alpha.is_some() != self.beta.is_some() => {
                bail!("config fields `alpha`/`beta`: give both or neither")
            }
            _ => {}
        }
        if self.mode != Mode::Simons && self.space.is_some() {
            bail!("config field `space`: only used in simons mode");
        }
        if let Some(s) = self.samples {
            if s == 0 || s > MAX_SAMPLES {
                bail!("config field `samples`: must lie in 1..={MAX_SAMPLES}");
            }
        }
        Ok(())
    }

    /// Effective scale; flags override the config, N defaults to the input length.
    pub fn scale(&self, input_len: usize, n_flag: Option<usize>, imax_flag: Option<usize>) -> Result<Scale<f64>> {
        let c = &self.scale;
        let n = n_flag.or(c.n).unwrap_or(input_len);
        if n == 0 || n > MAX_N {
            bail!("config field `scale.n`: {n} outside 1..={MAX_N}");
        }
        if n > input_len {
            bail!("scale N = {n} exceeds the {input_len} input terms");
        }
        let i_max = imax_flag.or(c.i_max).unwrap_or(64);
        if i_max > MAX_I {
            bail!("config field `scale.i_max`: {i_max} above {MAX_I}");
        }
        let mut s = Scale::new(n).with_i_max(i_max).with_eps(c.eps.clone().unwrap_or_else(|| default_eps_list(n)));
        if let Some(m) = c.m_max {
            s = s.with_m_max(m);
        }
        if let Some(t) = c.tol {
            s = s.with_tol(t);
        }
        if let Some(w) = c.window_fraction {
            s.window_fraction = w;
        }
        if let Some(t) = c.null_tol {
            s = s.with_null_tol(t);
        }
        s.validate().map_err(|e| anyhow::anyhow!("config field `scale`: {e}"))?;
        Ok(s)
    }
}
