use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::{BirthDeathArgs, CoupleArgs, ExperimentArgs, GenGraphArgs, GraphKind, Outcome, SampleArgs, SamplerArg, SpectralArgs, VerifyArgs};
use stein_ising::experiments::{run_experiment, ExperimentConfig, Table};
use stein_ising::graphs::{self, interaction_from_graph, spectral_deviation, spectral_report, Scale, SimpleGraph};
use stein_ising::mcmc::{self, birth_death_hitting, contraction_check, contraction_profile, Budget, Dynamics, Sampler};
use stein_ising::{rng, InteractionMatrix, SpinConfiguration, Verdict};

fn json_of<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("arguments serialize")
}

fn write_text(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn write_json<T: serde::Serialize>(path: PathBuf, v: &T) -> Result<PathBuf> {
    write_text(path, &(serde_json::to_string_pretty(v)? + "\n"))
}

fn read_graph(path: &Path) -> Result<SimpleGraph> {
    let file = File::open(path).with_context(|| format!("opening graph {}", path.display()))?;
    Ok(SimpleGraph::read_text(BufReader::new(file))?)
}

pub fn gen_graph(a: &GenGraphArgs, seed: u64, out: &Path) -> Result<Outcome> {
    let g = match a.kind {
        GraphKind::Random => graphs::random_regular(a.n, a.d, rng::child_seed(seed, "gen_graph", 0))?,
        GraphKind::Cliques => graphs::disjoint_cliques(a.n, a.d)?,
        GraphKind::Complete => {
            if a.d + 1 != a.n {
                bail!("the complete graph on {} vertices has degree {}", a.n, a.n.saturating_sub(1));
            }
            graphs::complete_graph(a.n)?
        }
    };
    let kind = serde_json::to_value(a.kind)?.as_str().unwrap_or("graph").to_string();
    let name = a.output.clone().unwrap_or_else(|| format!("graph_{kind}_n{}_d{}.txt", a.n, a.d));
    let path = out.join(name);
    let mut buf = Vec::new();
    g.write_text(&mut buf)?;
    fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {} ({} edges, connected: {})", path.display(), g.edges().len(), g.is_connected());
    Ok(Outcome {
        config: json_of(a),
        seed,
        files: vec![path],
        verdicts: Vec::new(),
        stem: "gen-graph".into(),
    })
}

pub fn spectral(a: &SpectralArgs, seed: u64, out: &Path) -> Result<Outcome> {
    let g = read_graph(&a.graph)?;
    let report = spectral_report(&g)?;
    let n = g.n();
    let cw = InteractionMatrix::curie_weiss(n, a.beta);
    let regular = interaction_from_graph(&g, a.beta, Scale::PerD)?;
    let dev = spectral_deviation(&cw, &regular)?;
    let bound = a.beta * (report.epsilon + 1.0 / n as f64);
    let verdicts = vec![Verdict::upper("deviation_bound", n, a.beta, dev, bound, 1e-8)];
    let summary = serde_json::json!({
        "n": n,
        "degree": report.degree,
        "epsilon": report.epsilon,
        "is_connected": report.is_connected,
        "approx_ramanujan": report.is_approx_ramanujan(0.1),
        "second_eigenvalue_abs": report.epsilon * report.degree as f64,
        "deviation": dev,
        "deviation_bound": bound,
    });
    let path = write_json(out.join("spectral.json"), &summary)?;
    Ok(Outcome {
        config: json_of(a),
        seed,
        files: vec![path],
        verdicts,
        stem: "spectral".into(),
    })
}

pub fn verify(a: &VerifyArgs, seed: u64, out: &Path) -> Result<Outcome> {
    let verdicts = stein_ising::exact::self_check(a.n, a.beta, a.trials, seed)?;
    let path = write_json(out.join("verify.json"), &verdicts)?;
    Ok(Outcome {
        config: json_of(a),
        seed,
        files: vec![path],
        verdicts,
        stem: "verify".into(),
    })
}

pub fn sample(a: &SampleArgs, seed: u64, out: &Path) -> Result<Outcome> {
    let j = if let Some(path) = &a.graph {
        let g = read_graph(path)?;
        if g.n() != a.n {
            bail!("graph has {} vertices but --n is {}", g.n(), a.n);
        }
        interaction_from_graph(&g, a.beta, Scale::PerD)?
    } else if let Some(d) = a.d {
        let g = graphs::random_regular(a.n, d, rng::child_seed(seed, "sample_graph", 0))?;
        interaction_from_graph(&g, a.beta, Scale::PerD)?
    } else {
        InteractionMatrix::curie_weiss(a.n, a.beta)
    };
    let dynamics = Dynamics::new(&j);
    let sampler = match a.sampler {
        SamplerArg::Plain => Sampler::Plain,
        SamplerArg::Restricted => Sampler::Restricted,
    };
    let mut budget = Budget::new(a.n, a.samples);
    if let Some(t) = a.thin {
        budget = budget.with_thin(t);
    }
    if let Some(b) = a.burn_in {
        budget = budget.with_burn_in(b);
    }
    let hist = mcmc::magnetization_samples(&dynamics, sampler, &budget, SpinConfiguration::all_plus(a.n), rng::stream(seed, "sample", 0))?;
    let mut table = Table::new(&["magnetization", "count"]);
    for (k, &c) in hist.counts.iter().enumerate() {
        table.push(vec![hist.value(k).into(), (c as usize).into()]);
    }
    let total = hist.total().max(1) as f64;
    let moment = |p: i32| -> f64 {
        hist.counts.iter().enumerate().map(|(k, &c)| c as f64 * hist.value(k).abs().powi(p)).sum::<f64>() / total
    };
    let summary = serde_json::json!({
        "samples": hist.total(),
        "mean_magnetization": hist.mean(),
        "mean_abs_magnetization": moment(1),
        "mean_squared_magnetization": moment(2),
    });
    let csv = write_text(out.join("sample.csv"), &table.to_csv())?;
    let json = write_json(out.join("sample.json"), &summary)?;
    Ok(Outcome {
        config: json_of(a),
        seed,
        files: vec![csv, json],
        verdicts: Vec::new(),
        stem: "sample".into(),
    })
}

pub fn couple(a: &CoupleArgs, seed: u64, out: &Path) -> Result<Outcome> {
    let profile = contraction_profile(a.beta)?;
    let n = a.n as u64;
    let checkpoints = if a.checkpoints.is_empty() {
        vec![n, 5 * n, 10 * n, 20 * n, 50 * n]
    } else {
        a.checkpoints.clone()
    };
    let rows = contraction_check(a.n, &profile, &checkpoints, a.trials, seed)?;
    let mut table = Table::new(&["t", "mean_diff", "se", "bound", "pass"]);
    let mut verdicts = Vec::new();
    for r in &rows {
        table.push(vec![
            (r.t as usize).into(),
            r.mean_diff.mean.into(),
            r.mean_diff.se.into(),
            r.bound.into(),
            r.pass.to_string().into(),
        ]);
        verdicts.push(
            Verdict::upper(format!("contraction_t{}", r.t), a.n, a.beta, r.mean_diff.mean, r.bound, 3.0 * r.mean_diff.se + 1e-15)
                .with_se(r.mean_diff.se),
        );
    }
    let path = write_text(out.join("couple.csv"), &table.to_csv())?;
    Ok(Outcome {
        config: json_of(a),
        seed,
        files: vec![path],
        verdicts,
        stem: "couple".into(),
    })
}

pub fn birthdeath(a: &BirthDeathArgs, seed: u64, out: &Path) -> Result<Outcome> {
    let chain = stein_ising::BirthDeathChain::new(a.r, a.alpha)?;
    let report = birth_death_hitting(&chain, a.m, a.runs, &a.ks, seed)?;
    let mut verdicts = vec![Verdict::upper(
        "hitting_probability",
        a.r,
        a.alpha,
        (report.simulated.mean - report.exact).abs(),
        0.0,
        3.0 * report.simulated.se,
    )
    .with_se(report.simulated.se)];
    for row in &report.tail {
        verdicts.push(
            Verdict::upper(format!("tail_k{}", row.k), a.r, a.alpha, row.probability.mean, row.envelope, 3.0 * row.probability.se)
                .with_se(row.probability.se),
        );
    }
    let path = write_json(out.join("birthdeath.json"), &report)?;
    Ok(Outcome {
        config: json_of(a),
        seed,
        files: vec![path],
        verdicts,
        stem: "birthdeath".into(),
    })
}

pub fn experiment(a: &ExperimentArgs, seed: Option<u64>, config: Option<&PathBuf>, out: &Path) -> Result<Outcome> {
    let mut cfg = match config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            ExperimentConfig::parse(&text, Some(&a.name))?
        }
        None => ExperimentConfig::defaults(&a.name)?,
    };
    if cfg.name != a.name {
        bail!("config names experiment `{}` but `{}` was requested", cfg.name, a.name);
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = cfg.output.clone().map(|p| if p.is_absolute() { p } else { out.join(p) }).unwrap_or_else(|| out.to_path_buf());
    let report = run_experiment(&cfg)?;
    let files = report.write(&dir)?;
    Ok(Outcome {
        config: json_of(&cfg),
        seed: cfg.seed,
        files,
        verdicts: report.verdicts,
        stem: cfg.name.clone(),
    })
}
