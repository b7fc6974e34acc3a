use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters of a scripted study.
///
/// Text form: one `key = value` per line, `#` starts a comment, lists are
/// comma-separated. Keys: `name n n_list beta d_list k seed samples trials
/// subsets t deltas delta sigma slack ratio_window exponent_window threshold
/// output`. Windows are written `lo, hi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub beta: f64,
    pub d_list: Vec<usize>,
    pub k: usize,
    pub seed: u64,
    pub samples: usize,
    pub trials: usize,
    pub subsets: usize,
    /// Relative perturbation for `M = (1 + t) L`.
    pub t: f64,
    pub deltas: Vec<f64>,
    /// The deviation at which the concentration threshold is asserted.
    pub delta: f64,
    /// Number of standard errors allowed in Monte Carlo checks.
    pub sigma: f64,
    pub slack: f64,
    pub ratio_window: (f64, f64),
    pub exponent_window: (f64, f64),
    pub threshold: f64,
    pub output: Option<PathBuf>,
}

pub const EXPERIMENTS: &[&str] = &[
    "moment_comparison",
    "clique_counterexample",
    "high_temperature_scan",
    "dobrushin_perturbation",
    "concentration_check",
    "naive_vs_stein",
    "delta_h_study",
];

impl ExperimentConfig {
    /// Desk-scale defaults for each study.
    pub fn defaults(name: &str) -> Result<Self> {
        let base = ExperimentConfig {
            name: name.to_string(),
            n: 1024,
            n_list: Vec::new(),
            beta: 1.2,
            d_list: vec![8, 16, 32, 64],
            k: 2,
            seed: 20_240_601,
            samples: 100_000,
            trials: 10_000,
            subsets: crate::ising::DEFAULT_SUBSET_SAMPLES,
            t: 0.1,
            deltas: vec![0.15],
            delta: 0.15,
            sigma: 3.0,
            slack: 0.5,
            ratio_window: (1.3, 3.0),
            exponent_window: (0.7, 1.3),
            threshold: 0.1,
            output: None,
        };
        let cfg = match name {
            "moment_comparison" => base,
            "clique_counterexample" => ExperimentConfig {
                d_list: vec![16],
                samples: 50_000,
                threshold: 0.2,
                ..base
            },
            "high_temperature_scan" => ExperimentConfig {
                n_list: vec![256, 512, 1024],
                beta: 0.5,
                d_list: vec![16],
                ratio_window: (0.3, 0.8),
                ..base
            },
            "dobrushin_perturbation" => ExperimentConfig {
                n: 512,
                n_list: vec![8],
                beta: 0.5,
                d_list: Vec::new(),
                ..base
            },
            "concentration_check" => ExperimentConfig {
                n: 1000,
                d_list: vec![32],
                samples: 1_000_000,
                deltas: vec![0.1, 0.15, 0.2, 0.25, 2.0],
                threshold: 1e-3,
                ..base
            },
            "naive_vs_stein" => ExperimentConfig {
                d_list: vec![16, 32, 64],
                samples: 50_000,
                ..base
            },
            "delta_h_study" => ExperimentConfig {
                n: 12,
                n_list: vec![128],
                d_list: Vec::new(),
                threshold: 1e-2,
                ..base
            },
            other => return Err(Error::Config(format!("unknown experiment `{other}`"))),
        };
        Ok(cfg)
    }

    /// Defaults for the named experiment, overridden by `text`.
    pub fn parse(text: &str, name: Option<&str>) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let name = pairs
            .iter()
            .find(|(k, _, _)| k == "name")
            .map(|(_, v, _)| v.clone())
            .or_else(|| name.map(str::to_string))
            .ok_or_else(|| Error::Config("config has no `name`".into()))?;
        let mut cfg = Self::defaults(&name)?;
        for (key, value, line) in &pairs {
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(msg) => Error::Parse { line: *line, msg },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "name" => {
                if value != self.name {
                    return Err(Error::Config(format!("name `{value}` conflicts with `{}`", self.name)));
                }
            }
            "n" => self.n = num(key, value)?,
            "n_list" => self.n_list = list(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "d_list" => self.d_list = list(key, value)?,
            "k" => self.k = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "samples" => self.samples = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "subsets" => self.subsets = num(key, value)?,
            "t" => self.t = num(key, value)?,
            "deltas" => self.deltas = list(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "slack" => self.slack = num(key, value)?,
            "ratio_window" => self.ratio_window = window(key, value)?,
            "exponent_window" => self.exponent_window = window(key, value)?,
            "threshold" => self.threshold = num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sigma", self.sigma),
            ("slack", self.slack),
            ("threshold", self.threshold),
            ("delta", self.delta),
            ("ratio_window", self.ratio_window.0),
            ("exponent_window", self.exponent_window.0),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("tolerance `{k}` must be positive")));
            }
        }
        if self.ratio_window.0 > self.ratio_window.1 || self.exponent_window.0 > self.exponent_window.1 {
            return Err(Error::Config("window lower end exceeds upper end".into()));
        }
        if self.samples == 0 || self.n < 2 {
            return Err(Error::Config("need n >= 2 and samples > 0".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let joinf = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut s = format!(
            "name = {}\nn = {}\nn_list = {}\nbeta = {}\nd_list = {}\nk = {}\nseed = {}\nsamples = {}\ntrials = {}\n\
             subsets = {}\nt = {}\ndeltas = {}\ndelta = {}\nsigma = {}\nslack = {}\nratio_window = {}, {}\n\
             exponent_window = {}, {}\nthreshold = {}\n",
            self.name,
            self.n,
            join(&self.n_list),
            self.beta,
            join(&self.d_list),
            self.k,
            self.seed,
            self.samples,
            self.trials,
            self.subsets,
            self.t,
            joinf(&self.deltas),
            self.delta,
            self.sigma,
            self.slack,
            self.ratio_window.0,
            self.ratio_window.1,
            self.exponent_window.0,
            self.exponent_window.1,
            self.threshold,
        );
        if let Some(p) = &self.output {
            s.push_str(&format!("output = {}\n", p.display()));
        }
        s
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: k + 1,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        out.push((key.trim().to_string(), value.trim().to_string(), k + 1));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .replace('_', "")
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| num(key, v.trim())).collect()
}

fn window(key: &str, value: &str) -> Result<(f64, f64)> {
    let v: Vec<f64> = list(key, value)?;
    match v.as_slice() {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(Error::Config(format!("`{key}` needs two values"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_overrides() {
        let cfg = ExperimentConfig::parse("name = moment_comparison\nn = 256 # smaller\nd_list = 4, 8\n", None).unwrap();
        assert_eq!(cfg.n, 256);
        assert_eq!(cfg.d_list, vec![4, 8]);
        assert_eq!(cfg.beta, 1.2);
        let again = ExperimentConfig::parse(&cfg.to_text(), None).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("n = 5", None).is_err());
        assert!(ExperimentConfig::parse("name = nope", None).is_err());
        assert!(matches!(
            ExperimentConfig::parse("name = delta_h_study\nbogus = 1", None),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(ExperimentConfig::parse("name = delta_h_study\nsigma = 0", None).is_err());
        assert!(ExperimentConfig::parse("sigma = -1", Some("moment_comparison")).is_err());
        for name in EXPERIMENTS {
            ExperimentConfig::defaults(name).unwrap().validate().unwrap();
        }
    }
}
