use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use idealsum::banach::{simons_sup_check, DualSetup, FiniteDimSpace, VectorSequencePrefix};
use idealsum::limsup_cluster::{cluster_criterion, jbi_cluster_point, limsup_implies_statistical};
use idealsum::precauchy::{dichotomy_check, pair_mass_series, pre_cauchy};
use idealsum::summability::{
    b_summable, decompose_statistical, density_series, statistical_limit_estimate, statistically_convergent, strong_series,
    strong_summable, tauberian_check, transform_envelope, ConvergenceRequest, TauberianFns,
};
use idealsum::{Family, Ideal, Report as Theorem, Scale, Sequence, Status, Verdict};
use serde::Serialize;
use serde_json::Value;

use crate::config::{AnalysisConfig, Mode};

/// Parsed input file.
pub enum Input {
    Scalars(Sequence),
    Vectors(VectorSequencePrefix<f64>),
}

impl Input {
    pub fn len(&self) -> usize {
        match self {
            Input::Scalars(s) => s.len(),
            Input::Vectors(v) => v.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Input::Scalars(_) => 1,
            Input::Vectors(v) => v.dim(),
        }
    }
}

/// One number per line, or comma-separated components when `vector` is set. Blank lines
/// and lines starting with '#' are skipped.
pub fn parse_input(text: &str, vector: bool) -> Result<Input> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split(',') {
            let tok = tok.trim();
            let v: f64 = tok.parse().map_err(|_| anyhow::anyhow!("input line {}: cannot parse {tok:?} as a number", i + 1))?;
            if !v.is_finite() {
                bail!("input line {}: value {tok:?} is not finite", i + 1);
            }
            row.push(v);
        }
        if !vector && row.len() != 1 {
            bail!("input line {}: expected one number, found {}", i + 1, row.len());
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                bail!("input line {}: {} components, earlier lines have {}", i + 1, row.len(), first.len());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("input has no values");
    }
    Ok(if vector {
        Input::Vectors(VectorSequencePrefix::new(rows)?)
    } else {
        Input::Scalars(Sequence::new(rows.into_iter().map(|r| r[0]).collect()))
    })
}

#[derive(Serialize)]
pub struct InputEcho {
    pub path: String,
    pub terms: usize,
    pub dim: usize,
}

#[derive(Serialize)]
pub struct Report {
    pub config: AnalysisConfig,
    pub scale: Scale<f64>,
    pub input: InputEcho,
    pub status: Status,
    pub exit_code: i32,
    pub verdicts: BTreeMap<String, Verdict<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<Theorem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    /// Per-row diagnostic series.
    pub series: BTreeMap<String, Vec<f64>>,
}

pub fn exit_code(s: Status) -> i32 {
    match s {
        Status::HoldsAtScale => 0,
        Status::FailsAtScale => 1,
        Status::Inconclusive => 2,
    }
}

struct Outcome {
    status: Status,
    verdicts: BTreeMap<String, Verdict<f64>>,
    theorem: Option<Theorem>,
    detail: Option<Value>,
    series: BTreeMap<String, Vec<f64>>,
}

impl Outcome {
    fn verdict(name: &str, v: Verdict<f64>) -> Self {
        let mut verdicts = BTreeMap::new();
        let status = v.status;
        verdicts.insert(name.to_string(), v);
        Outcome { status, verdicts, theorem: None, detail: None, series: BTreeMap::new() }
    }

    fn theorem(t: Theorem) -> Self {
        Outcome { status: t.status(), verdicts: BTreeMap::new(), theorem: Some(t), detail: None, series: BTreeMap::new() }
    }

    fn series(mut self, name: &str, v: Vec<f64>) -> Self {
        self.series.insert(name.to_string(), v);
        self
    }
}

pub fn run(cfg: &AnalysisConfig, input: &Input, path: &Path, dir: &Path, n_flag: Option<usize>, imax_flag: Option<usize>, seed: u64) -> Result<Report> {
    let scale = cfg.scale(input.len(), n_flag, imax_flag)?;
    let family: Family = cfg.matrix.family(dir, scale.i_max).context("config field `matrix`")?;
    let ideal: Ideal = cfg.ideal.ideal();
    let out = match (cfg.mode, input) {
        (Mode::Simons, Input::Vectors(xs)) => simons(cfg, xs, &family, &ideal, &scale, seed)?,
        (Mode::Simons, Input::Scalars(_)) => bail!("simons mode needs vector input"),
        (_, Input::Scalars(s)) => scalar_mode(cfg, s, family, ideal, &scale)?,
        (_, Input::Vectors(_)) => bail!("{:?} mode needs scalar input", cfg.mode),
    };
    Ok(Report {
        config: cfg.clone(),
        scale,
        input: InputEcho { path: path.display().to_string(), terms: input.len(), dim: input.dim() },
        status: out.status,
        exit_code: exit_code(out.status),
        verdicts: out.verdicts,
        theorem: out.theorem,
        detail: out.detail,
        series: out.series,
    })
}

fn target_or_estimate(cfg: &AnalysisConfig, req: &ConvergenceRequest<f64>) -> Result<f64> {
    match cfg.target {
        Some(a) => Ok(a),
        None => Ok(statistical_limit_estimate(req)?),
    }
}

fn scalar_mode(cfg: &AnalysisConfig, s: &Sequence, family: Family, ideal: Ideal, scale: &Scale<f64>) -> Result<Outcome> {
    let mut req = ConvergenceRequest::new(s.clone(), family.clone(), ideal.clone(), scale.clone());
    if let Some(g) = &cfg.gauge {
        req = req.with_gauges(g.family().context("config field `gauge`")?);
    }
    if let Some(a) = cfg.target {
        req = req.with_target(a);
    }
    Ok(match cfg.mode {
        Mode::Summable => {
            let v = b_summable(&req)?;
            let (env, _) = transform_envelope(&req)?;
            Outcome::verdict("summable", v).series("transform_sup", env.sup).series("transform_inf", env.inf)
        }
        Mode::Strong => {
            let a = target_or_estimate(cfg, &req)?;
            let v = strong_summable(&req, a)?;
            Outcome::verdict("strong", v).series("strong", strong_series(&req, a)?)
        }
        Mode::Statistical => {
            let v = statistically_convergent(&req)?;
            let a = v.estimate.finite().unwrap_or(0.0);
            let d = density_series(&req, a, scale.min_eps())?;
            Outcome::verdict("statistical", v).series("density", d)
        }
        Mode::Limsup => {
            let a = target_or_estimate(cfg, &req)?;
            Outcome::theorem(limsup_implies_statistical(s, &family, &ideal, a, scale)?)
        }
        Mode::Cluster => {
            let a = cfg.target.expect("checked");
            let v = jbi_cluster_point(s, &family, &ideal, a, &scale.eps_list, scale)?;
            let crit = cluster_criterion(s, &family, &ideal, a, &scale.eps_list, scale)?;
            let mut o = Outcome::verdict("cluster_point", v);
            o.detail = Some(serde_json::to_value(crit)?);
            o
        }
        Mode::Precauchy => {
            let v = pre_cauchy(s, &family, &ideal, &scale.eps_list, scale)?;
            let mass = pair_mass_series(s, &family, scale.min_eps(), false, scale)?;
            let mut o = Outcome::verdict("pre_cauchy", v).series("pair_mass", mass);
            if let (Some(alpha), Some(beta)) = (cfg.alpha, cfg.beta) {
                o.detail = Some(serde_json::to_value(dichotomy_check(s, &family, &ideal, alpha, beta, scale)?)?);
            }
            o
        }
        Mode::Decompose => {
            let a = target_or_estimate(cfg, &req)?;
            let r = decompose_statistical(s, &family, &ideal, a, scale)?;
            let mut o = Outcome::verdict("limit", r.limit.clone());
            o.verdicts.insert("disagreement_in_ideal".into(), r.membership.clone());
            o.status = r.status;
            o.series.insert("t".into(), r.t.values().to_vec());
            o.detail = Some(serde_json::to_value(&r)?);
            o
        }
        Mode::Tauberian => {
            if family.len() != 1 {
                bail!("config field `matrix`: tauberian mode needs a single matrix");
            }
            let t = tauberian_check(s, family.member(0).clone(), &ideal, &TauberianFns::canonical(), cfg.target, scale)?;
            Outcome::theorem(t)
        }
        Mode::Simons => unreachable!("handled by caller"),
    })
}

fn simons(cfg: &AnalysisConfig, xs: &VectorSequencePrefix<f64>, family: &Family, ideal: &Ideal, scale: &Scale<f64>, seed: u64) -> Result<Outcome> {
    let space = FiniteDimSpace::from_spec(cfg.space.as_ref().expect("checked")).context("config field `space`")?;
    let h = space
        .dual_extreme_points()
        .map(|e| e.to_vec())
        .ok_or_else(|| anyhow::anyhow!("config field `space`: simons mode needs a polytopal dual ball"))?;
    let setup = DualSetup { space: &space, h: &h, xs, family, ideal, scale, samples: cfg.samples.unwrap_or(10_000), seed };
    let r = simons_sup_check(&setup)?;
    let mut o = Outcome::verdict("simons", r.verdict.clone());
    o.detail = Some(serde_json::to_value(&r)?);
    Ok(o)
}

/// Series as CSV columns: n, then one column per series (empty past its end).
pub fn series_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let names: Vec<&String> = report.series.keys().collect();
    let mut header = vec!["n".to_string()];
    header.extend(names.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    let rows = report.series.values().map(|v| v.len()).max().unwrap_or(0);
    for n in 0..rows {
        let mut rec = vec![(n + 1).to_string()];
        rec.extend(report.series.values().map(|v| v.get(n).map_or(String::new(), |x| x.to_string())));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inputs() {
        let Input::Scalars(s) = parse_input("1\n# c\n\n2.5\n", false).unwrap() else { panic!() };
        assert_eq!(s.values(), &[1.0, 2.5]);
        let Input::Vectors(v) = parse_input("1,2\n3, 4\n", true).unwrap() else { panic!() };
        assert_eq!(v.get(2), &[3.0, 4.0]);
        let e = parse_input("1\nx\n", false).err().unwrap().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(parse_input("1,2\n3\n", true).is_err());
        assert!(parse_input("", false).is_err());
    }
}
