use std::collections::HashMap;
use std::path::{Path, PathBuf};

use bfvar::geometry::{nonshared_dof_direct, nonshared_dof_via_angles, principal_angles};
use bfvar::gprior::hat_matrix;
use bfvar::oracle::{empirical_bf_moments_with, MomentPath, DEFAULT_SIMULATIONS};
use bfvar::posterior::{family_pmp, EVIDENCE_BIN_NAMES};
use bfvar::resample::{
    bootstrap_log_marginals, conclusiveness, histogram_from_run, stripe_export, Contrast, PmpMatrix, DEFAULT_THRESHOLDS,
};
use bfvar::{DataGeneratingProcess, KappaExponent, KassRaftery, ModelSet, RegressionModel, ResamplePlan, Response};
use nalgebra::DMatrix;

use crate::config::{DgpConfig, KappaConvention, ModelConfig, RunConfig, SchemeName};
use crate::data::{load_dataset, Table};
use crate::error::{CliError, Context, Result};
use crate::output::{float, write_artifact, CsvDoc};
use crate::svg::emit_svg_histogram;

pub const DEFAULT_REPLICATES: usize = 1000;
const ORACLE_Z_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Moments,
    Bootstrap,
    Oracle,
    Angles,
    Pmp,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub replicates: Option<usize>,
    pub block_length: Option<usize>,
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let q = rows.len();
    if q == 0 || rows.iter().any(|r| r.len() != q) {
        return Err(CliError::input(format!("{what} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(q, q, |i, j| rows[i][j]))
}

fn build_model(m: &ModelConfig, table: &Table, q: usize) -> Result<RegressionModel> {
    let what = format!("model `{}`", m.label);
    let design = table.matrix(&m.columns)?;
    let model = match (m.sigma2, &m.sigma) {
        (Some(s2), None) if q == 1 => RegressionModel::univariate(design, s2, m.g).context(&what)?,
        (None, Some(s)) if q > 1 => {
            let s = matrix(s, &format!("{what} sigma"))?;
            if s.nrows() != q {
                return Err(CliError::input(format!(
                    "{what}: sigma is {0}x{0} but the response has {q} columns",
                    s.nrows()
                )));
            }
            RegressionModel::multivariate(design, s, m.g).context(&what)?
        }
        _ if q == 1 => {
            return Err(CliError::input(format!(
                "{what}: a vector response needs `sigma2` only"
            )))
        }
        _ => return Err(CliError::input(format!("{what}: a matrix response needs `sigma` only"))),
    };
    Ok(model.with_kappa_exponent(match m.kappa_exponent {
        KappaConvention::Paper => KappaExponent::Paper,
        KappaConvention::PerResponse => KappaExponent::PerResponse,
    }))
}

fn build_dgp(d: &DgpConfig, table: &Table, q: usize) -> Result<DataGeneratingProcess> {
    let names = d.mean.names();
    if names.len() != q {
        return Err(CliError::input(format!(
            "dgp: mean has {} columns, models expect {q}",
            names.len()
        )));
    }
    let ctx = "dgp";
    match (d.sigma2, &d.sigma, &d.variance) {
        (Some(s2), None, None) if q == 1 => {
            DataGeneratingProcess::univariate(table.vector(&names[0])?, s2).context(ctx)
        }
        (None, None, Some(col)) if q == 1 => {
            let v = table.vector(col)?;
            DataGeneratingProcess::heteroscedastic(table.vector(&names[0])?, DMatrix::from_diagonal(&v)).context(ctx)
        }
        (None, Some(s), None) if q > 1 => {
            DataGeneratingProcess::multivariate(table.matrix(&names)?, matrix(s, "dgp sigma")?).context(ctx)
        }
        _ if q == 1 => Err(CliError::input("dgp: give exactly one of `sigma2` or `variance`")),
        _ => Err(CliError::input("dgp: a matrix response needs `sigma` only")),
    }
}

/// Everything a command needs, resolved against the dataset.
struct Inputs {
    set: ModelSet,
    response: Option<Response>,
    partition: Option<HashMap<String, String>>,
    q: usize,
}

fn response_dim(cfg: &RunConfig) -> usize {
    if let Some(r) = &cfg.response {
        return r.names().len();
    }
    if let Some(d) = &cfg.dgp {
        return d.mean.names().len();
    }
    if cfg.models.iter().any(|m| m.sigma.is_some()) {
        return cfg
            .models
            .iter()
            .find_map(|m| m.sigma.as_ref().map(Vec::len))
            .unwrap_or(1);
    }
    1
}

fn resolve(cfg: &RunConfig, table: &Table) -> Result<Inputs> {
    let q = response_dim(cfg);
    let entries = cfg
        .models
        .iter()
        .map(|m| Ok((m.label.clone(), build_model(m, table, q)?)))
        .collect::<Result<Vec<_>>>()?;
    let priors = if cfg.models.iter().any(|m| m.prior.is_some()) {
        Some(cfg.models.iter().map(|m| m.prior.unwrap_or(1.0)).collect())
    } else {
        None
    };
    let set = ModelSet::new(entries, priors).context("model set")?;
    let response = match &cfg.response {
        None => None,
        Some(c) => {
            let names = c.names();
            Some(if names.len() == 1 {
                Response::Vector(table.vector(&names[0])?)
            } else {
                Response::Matrix(table.matrix(&names)?)
            })
        }
    };
    let partition = cfg.models.iter().any(|m| m.family.is_some()).then(|| {
        cfg.models
            .iter()
            .map(|m| (m.label.clone(), m.family.clone().unwrap_or_else(|| m.label.clone())))
            .collect()
    });
    Ok(Inputs {
        set,
        response,
        partition,
        q,
    })
}

impl Inputs {
    fn response(&self) -> Result<&Response> {
        self.response
            .as_ref()
            .ok_or_else(|| CliError::input("this command needs `response` in the config"))
    }

    /// Labels of the compared pair: `[compare]` or the first two models.
    fn pair(&self, cfg: &RunConfig) -> Result<(String, String)> {
        match &cfg.compare {
            Some(c) => Ok((c.first.clone(), c.second.clone())),
            None => {
                let l = self.set.labels();
                Ok((l[0].clone(), l[1].clone()))
            }
        }
    }

    fn models(&self, cfg: &RunConfig) -> Result<(&RegressionModel, &RegressionModel)> {
        let (a, b) = self.pair(cfg)?;
        Ok((
            self.set.model(&a).context("compare")?,
            self.set.model(&b).context("compare")?,
        ))
    }

    fn contrast(&self, cfg: &RunConfig) -> Result<Contrast> {
        let (first, second) = self.pair(cfg)?;
        if cfg.compare.as_ref().is_some_and(|c| c.families) {
            let partition = self
                .partition
                .clone()
                .ok_or_else(|| CliError::input("compare.families is set but no model has a `family`"))?;
            Ok(Contrast::Families {
                partition,
                first,
                second,
            })
        } else {
            Ok(Contrast::Models { first, second })
        }
    }
}

fn scale(cfg: &RunConfig) -> Result<KassRaftery> {
    match cfg.evidence.thresholds {
        Some(t) => KassRaftery::new(t).context("evidence.thresholds"),
        None => Ok(KassRaftery::default()),
    }
}

/// Runs one command and returns the paths of the files it wrote.
pub fn run(command: Command, cfg: &RunConfig, ov: &Overrides) -> Result<Vec<PathBuf>> {
    let table = load_dataset(&cfg.dataset)?;
    let inputs = resolve(cfg, &table)?;
    let seed = ov.seed.or(cfg.seed).unwrap_or(0);
    let out = ov
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    match command {
        Command::Moments => moments(cfg, &table, &inputs, &out),
        Command::Oracle => oracle(cfg, &table, &inputs, &out, ov, seed),
        Command::Angles => angles(cfg, &inputs, &out),
        Command::Pmp => pmp(cfg, &inputs, &out),
        Command::Bootstrap => bootstrap(cfg, &inputs, &out, ov, seed),
    }
}

fn moments(cfg: &RunConfig, table: &Table, inputs: &Inputs, out: &Path) -> Result<Vec<PathBuf>> {
    let (m1, m2) = inputs.models(cfg)?;
    let (first, second) = inputs.pair(cfg)?;
    let dgp = build_dgp(cfg.dgp()?, table, inputs.q)?;
    let path = MomentPath::select(m1, m2, &dgp);
    let m = path.closed_form(m1, m2, &dgp).context("moments")?;
    let mut doc = CsvDoc::new(&[
        "first",
        "second",
        "path",
        "mean",
        "variance",
        "sd",
        "kl_difference_term",
        "complexity_penalty_term",
        "divergence_term",
        "nonshared_dof_term",
    ]);
    doc.row(
        [first, second, path.name().to_string()].into_iter().chain(
            [
                m.mean,
                m.variance,
                m.sd(),
                m.kl_difference_term,
                m.complexity_penalty_term,
                m.divergence_term,
                m.nonshared_dof_term,
            ]
            .map(float),
        ),
    );
    Ok(vec![write_artifact(out, "moments.csv", &doc.into_bytes())?])
}

fn oracle(
    cfg: &RunConfig,
    table: &Table,
    inputs: &Inputs,
    out: &Path,
    ov: &Overrides,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    let (m1, m2) = inputs.models(cfg)?;
    let (first, second) = inputs.pair(cfg)?;
    let dgp = build_dgp(cfg.dgp()?, table, inputs.q)?;
    let n_sims = ov.replicates.or(cfg.oracle.simulations).unwrap_or(DEFAULT_SIMULATIONS);
    let path = MomentPath::select(m1, m2, &dgp);
    let r = empirical_bf_moments_with(&dgp, m1, m2, n_sims, seed, path).context("oracle")?;
    let mut doc = CsvDoc::new(&[
        "first",
        "second",
        "path",
        "n_sims",
        "seed",
        "empirical_mean",
        "se_mean",
        "closed_mean",
        "z_mean",
        "empirical_var",
        "se_var",
        "closed_var",
        "z_var",
    ]);
    doc.row(
        [
            first,
            second,
            path.name().to_string(),
            n_sims.to_string(),
            seed.to_string(),
        ]
        .into_iter()
        .chain(
            [
                r.empirical_mean,
                r.se_mean,
                r.closed_mean,
                r.z_mean,
                r.empirical_var,
                r.se_var,
                r.closed_var,
                r.z_var,
            ]
            .map(float),
        ),
    );
    let written = write_artifact(out, "oracle_report.csv", &doc.into_bytes())?;
    if !r.passes(ORACLE_Z_LIMIT) {
        return Err(CliError::Numerical(format!(
            "closed form disagrees with simulation (z_mean {:.2}, z_var {:.2}); report in {}",
            r.z_mean,
            r.z_var,
            written.display()
        )));
    }
    Ok(vec![written])
}

fn angles(cfg: &RunConfig, inputs: &Inputs, out: &Path) -> Result<Vec<PathBuf>> {
    let (m1, m2) = inputs.models(cfg)?;
    let report = principal_angles(m1.design(), m2.design()).context("angles")?;
    let direct = nonshared_dof_direct(&hat_matrix(m1), &hat_matrix(m2)).context("angles")?;
    let via = nonshared_dof_via_angles(m1.design(), m2.design(), m1.g()).context("angles")?;
    let mut doc = CsvDoc::new(&[
        "index",
        "theta",
        "cos_squared",
        "shared_dims",
        "partial_dims",
        "nonshared_dof_direct",
        "nonshared_dof_via_angles",
        "near_threshold",
    ]);
    for (j, (theta, c2)) in report.angles.iter().zip(&report.cos_squared).enumerate() {
        doc.row([
            (j + 1).to_string(),
            float(*theta),
            float(*c2),
            report.shared_dims.to_string(),
            report.partial_dims.to_string(),
            float(direct),
            float(via),
            report.near_threshold.to_string(),
        ]);
    }
    Ok(vec![write_artifact(out, "angles.csv", &doc.into_bytes())?])
}

fn evidence_row(doc: &mut CsvDoc, kind: &str, replicate: String, log_bf: f64, scale: &KassRaftery) -> Result<()> {
    let class = scale.classify(log_bf).context("evidence")?;
    doc.row([
        kind.to_string(),
        replicate,
        float(log_bf),
        float(2.0 * log_bf),
        class.bin().to_string(),
        EVIDENCE_BIN_NAMES[class.bin()].to_string(),
    ]);
    Ok(())
}

const EVIDENCE_HEADER: [&str; 6] = ["kind", "replicate", "log_bf", "two_log_bf", "bin", "class"];

fn pmp(cfg: &RunConfig, inputs: &Inputs, out: &Path) -> Result<Vec<PathBuf>> {
    let y = inputs.response()?;
    let p = inputs.set.posterior(y).context("pmp")?;
    let mut doc = CsvDoc::new(&["label", "prior", "log_marginal", "pmp"]);
    for (k, label) in inputs.set.labels().iter().enumerate() {
        doc.row([
            label.clone(),
            float(p.priors[k]),
            float(p.log_marginals[k]),
            float(p.probs[k]),
        ]);
    }
    let mut written = vec![write_artifact(out, "pmp.csv", &doc.into_bytes())?];
    if let Some(partition) = &inputs.partition {
        let f = family_pmp(&p, inputs.set.labels(), partition).context("family pmp")?;
        let mut doc = CsvDoc::new(&["family", "pmp"]);
        for (name, v) in f.families.iter().zip(&f.pmp.probs) {
            doc.row([name.clone(), float(*v)]);
        }
        written.push(write_artifact(out, "family_pmp.csv", &doc.into_bytes())?);
    }
    let contrast = inputs.contrast(cfg)?;
    let log_bf = contrast
        .log_bf(inputs.set.labels(), inputs.set.priors(), &p.log_marginals)
        .context("compare")?;
    let (first, second) = contrast.names();
    let mut doc = CsvDoc::new(
        &["first", "second"]
            .iter()
            .chain(&EVIDENCE_HEADER)
            .copied()
            .collect::<Vec<_>>(),
    );
    let class = scale(cfg)?.classify(log_bf).context("evidence")?;
    doc.row([
        first.to_string(),
        second.to_string(),
        "observed".to_string(),
        String::new(),
        float(log_bf),
        float(2.0 * log_bf),
        class.bin().to_string(),
        EVIDENCE_BIN_NAMES[class.bin()].to_string(),
    ]);
    written.push(write_artifact(out, "bf_evidence.csv", &doc.into_bytes())?);
    Ok(written)
}

fn pmp_doc(p: &PmpMatrix, leading: &str) -> CsvDoc {
    let header: Vec<String> = [leading.to_string(), "replicate".to_string()]
        .into_iter()
        .chain(p.labels.iter().cloned())
        .collect();
    let mut doc = CsvDoc::new(&header);
    for (i, (row, id)) in p.values.iter().zip(&p.replicate_ids).enumerate() {
        doc.row(
            [(i + 1).to_string(), id.to_string()]
                .into_iter()
                .chain(row.iter().map(|v| float(*v))),
        );
    }
    doc
}

fn bootstrap(cfg: &RunConfig, inputs: &Inputs, out: &Path, ov: &Overrides, seed: u64) -> Result<Vec<PathBuf>> {
    let y = inputs.response()?;
    let replicates = ov.replicates.or(cfg.bootstrap.replicates).unwrap_or(DEFAULT_REPLICATES);
    let block_length = ov.block_length.or(cfg.bootstrap.block_length);
    let plan = match cfg.bootstrap.scheme {
        SchemeName::Circular => ResamplePlan::circular(block_length, replicates, seed),
        SchemeName::Iid if block_length.is_some() => {
            return Err(CliError::input("block length applies to the circular scheme only"))
        }
        SchemeName::Iid => ResamplePlan::iid(replicates, seed),
    };
    let scale = scale(cfg)?;
    let contrast = inputs.contrast(cfg)?;
    let observed = inputs.set.log_marginals(y).context("full-data log marginals")?;
    let full = bfvar::posterior::pmp(&observed, inputs.set.priors()).context("full-data pmp")?;

    let run = bootstrap_log_marginals(y, &inputs.set, &plan).context("bootstrap")?;
    let p = run.pmp_matrix().context("bootstrap")?;
    let sort_by = match &cfg.bootstrap.sort_by {
        Some(l) => l.clone(),
        None => inputs.set.labels()[full.argmax()].clone(),
    };
    let stripes = stripe_export(&p, &sort_by).context("bootstrap.sort_by")?;
    let thresholds = cfg.bootstrap.thresholds.clone().unwrap_or(DEFAULT_THRESHOLDS.to_vec());
    let table = conclusiveness(&p, &thresholds).context("bootstrap.thresholds")?;
    let hist = histogram_from_run(&run, &observed, &contrast, &scale).context("compare")?;

    let mut written = vec![
        write_artifact(out, "pmp_matrix.csv", &pmp_doc(&p, "row").into_bytes())?,
        write_artifact(out, "stripes.csv", &pmp_doc(&stripes, "rank").into_bytes())?,
    ];

    let header: Vec<String> = ["threshold".to_string()]
        .into_iter()
        .chain(table.labels.iter().cloned())
        .chain([
            "inconclusive".to_string(),
            "replicates".to_string(),
            "failed".to_string(),
        ])
        .collect();
    let mut doc = CsvDoc::new(&header);
    for (t, (fr, inc)) in table
        .thresholds
        .iter()
        .zip(table.fractions.iter().zip(&table.inconclusive))
    {
        doc.row([float(*t)].into_iter().chain(fr.iter().map(|v| float(*v))).chain([
            float(*inc),
            table.replicates.to_string(),
            run.failed.len().to_string(),
        ]));
    }
    written.push(write_artifact(out, "conclusiveness.csv", &doc.into_bytes())?);

    let mut doc = CsvDoc::new(&EVIDENCE_HEADER);
    for (v, id) in hist.values.iter().zip(&hist.replicate_ids) {
        evidence_row(&mut doc, "replicate", id.to_string(), *v, &scale)?;
    }
    evidence_row(&mut doc, "observed", String::new(), hist.observed, &scale)?;
    written.push(write_artifact(out, "bf_histogram.csv", &doc.into_bytes())?);

    let title = format!(
        "{} vs {}: {} bootstrap, B = {}",
        hist.first,
        hist.second,
        scheme_name(cfg),
        replicates
    );
    let svg = emit_svg_histogram(&hist.values, &scale, Some(hist.observed), &title)?;
    written.push(write_artifact(out, "bf_histogram.svg", svg.as_bytes())?);
    Ok(written)
}

fn scheme_name(cfg: &RunConfig) -> &'static str {
    match cfg.bootstrap.scheme {
        SchemeName::Circular => "circular block",
        SchemeName::Iid => "iid",
    }
}
