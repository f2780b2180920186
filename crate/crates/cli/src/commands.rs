use std::fs::File;
use std::io::{self, BufWriter, Write};

use rayon::prelude::*;

use edfading::detection::croc_curve;
use edfading::oracle::{
    verify_closed_form, Metric, MonteCarloSpec, QuadratureSpec, SampleSet, VerificationRecord,
    VerifyTolerances,
};
use edfading::{db_to_linear, ChannelArgs, DetectorConfig, FadingModel, ModelRegistry};

use crate::config::RunArgs;
use crate::{UsageError, VerifyFailed};

const PDF_GRID: usize = 1000;
const PDF_MASS: f64 = 0.999;
const VERIFY_PF: [f64; 3] = [0.01, 0.1, 0.5];

struct Output {
    sink: Box<dyn Write>,
}

impl Output {
    fn open(args: &RunArgs) -> anyhow::Result<Self> {
        let sink: Box<dyn Write> = match &args.out {
            Some(path) => {
                Box::new(BufWriter::new(File::create(path).map_err(|e| {
                    UsageError(format!("cannot write {}: {e}", path.display()))
                })?))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        let mut out = Self { sink };
        let cmdline: Vec<String> = std::env::args().collect();
        writeln!(
            out.sink,
            "# edfading {}, {}, seed {}",
            env!("CARGO_PKG_VERSION"),
            cmdline.join(" "),
            args.seed()
        )?;
        Ok(out)
    }

    fn line(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.sink, "{text}")
    }

    fn row(&mut self, values: &[f64]) -> io::Result<()> {
        let cells: Vec<String> = values.iter().map(|v| format!("{v:.9e}")).collect();
        writeln!(self.sink, "{}", cells.join(","))
    }

    fn finish(mut self) -> io::Result<()> {
        self.sink.flush()
    }
}

fn build(args: &RunArgs, snr_db: f64) -> anyhow::Result<Box<dyn FadingModel>> {
    let registry = ModelRegistry::with_builtin();
    Ok(registry.build(args.channel_name()?, &args.channel_args(snr_db))?)
}

/// Evaluates `f` at each mean SNR of the sweep, keeping grid order.
fn sweep<F>(args: &RunArgs, f: F) -> anyhow::Result<Vec<(f64, f64)>>
where
    F: Fn(&dyn FadingModel) -> edfading::Result<f64> + Sync,
{
    let points = args.snr()?.points();
    // Build once up front so parameter errors surface before any work.
    let base = build(args, points[0])?;
    let rows: edfading::Result<Vec<(f64, f64)>> = points
        .par_iter()
        .map(|&db| {
            let model = base.with_mean_snr(db_to_linear(db))?;
            Ok((db, f(model.as_ref())?))
        })
        .collect();
    Ok(rows?)
}

pub fn croc(args: &RunArgs) -> anyhow::Result<()> {
    let model = build(args, args.snr_point()?)?;
    let grid = args.pf_grid()?;
    let curve = croc_curve(model.as_ref(), args.u()?, &grid, args.tol()?)?;
    let mut out = Output::open(args)?;
    out.line("pf,pmd")?;
    for p in curve {
        out.row(&[p.pf, p.pmd()])?;
    }
    Ok(out.finish()?)
}

pub fn auc(args: &RunArgs) -> anyhow::Result<()> {
    let u = args.u()?;
    let rows = sweep(args, |m| Ok(1.0 - m.avg_auc(u)?))?;
    let mut out = Output::open(args)?;
    out.line("snr_db,comp_auc")?;
    for (db, v) in rows {
        out.row(&[db, v])?;
    }
    Ok(out.finish()?)
}

pub fn effrate(args: &RunArgs) -> anyhow::Result<()> {
    let q = args.qos()?;
    let rows = sweep(args, |m| m.eff_rate(&q))?;
    let mut out = Output::open(args)?;
    out.line("snr_db,eff_rate_bits")?;
    for (db, v) in rows {
        out.row(&[db, v])?;
    }
    Ok(out.finish()?)
}

pub fn pdf(args: &RunArgs) -> anyhow::Result<()> {
    let model = build(args, args.snr_point()?)?;
    let mut limit = model.scale();
    while model.cdf(limit)? < PDF_MASS {
        limit *= 2.0;
        if !limit.is_finite() {
            return Err(edfading::Error::Convergence {
                func: "pdf range",
                terms: 0,
            }
            .into());
        }
    }
    let first = usize::from(model.origin_exponent() < 1.0);
    let rows: edfading::Result<Vec<[f64; 3]>> = (first..=PDF_GRID)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / PDF_GRID as f64;
            let g = limit * t * t;
            Ok([g, model.pdf(g)?, model.cdf(g)?])
        })
        .collect();
    let mut out = Output::open(args)?;
    out.line("gamma,pdf,cdf")?;
    for r in rows? {
        out.row(&r)?;
    }
    Ok(out.finish()?)
}

fn builtin_models() -> edfading::Result<Vec<Box<dyn FadingModel>>> {
    let registry = ModelRegistry::with_builtin();
    let snrs = [10.0, 1.0, db_to_linear(5.0)];
    let kms = [
        (2.0, 3, 2.0, 10.0),
        (0.5, 2, 1.0, 1.0),
        (8.0, 4, 1.0, snrs[2]),
        (0.5, 1, 1.0, 10.0),
        (2.0, 4, 4.0, 1.0),
        (8.0, 3, 2.0, snrs[2]),
        (0.0, 2, 1.0, 10.0),
        (2.0, 2, 1.0, 10.0),
        (8.0, 4, 3.0, 1.0),
    ];
    let fisher = [
        (2.0, 3.0),
        (0.8, 1.2),
        (2.5, 10.0),
        (1.0, 3.0),
        (0.8, 10.0),
        (2.5, 1.2),
        (1.0, 1.2),
        (2.0, 10.0),
        (0.8, 3.0),
    ];
    let mut out = Vec::new();
    for (kappa, mu, m, snr) in kms {
        let a = ChannelArgs {
            kappa: Some(kappa),
            mu: Some(mu),
            m: Some(m),
            m_s: None,
            mean_snr: snr,
        };
        out.push(registry.build("kms", &a)?);
    }
    for (i, (m, m_s)) in fisher.into_iter().enumerate() {
        let a = ChannelArgs {
            kappa: None,
            mu: None,
            m: Some(m),
            m_s: Some(m_s),
            mean_snr: snrs[i % 3],
        };
        out.push(registry.build("fisher", &a)?);
    }
    Ok(out)
}

pub fn verify(args: &RunArgs) -> anyhow::Result<()> {
    let models = match args.channel {
        Some(_) => vec![build(args, args.snr_point()?)?],
        None => builtin_models()?,
    };
    let u = args.u()?;
    let mut metrics = Vec::new();
    let pfs = match args.pf {
        Some(pf) => vec![pf],
        None => VERIFY_PF.to_vec(),
    };
    for pf in pfs {
        metrics.push((
            format!("u={u} pf={pf}"),
            Metric::Detection(DetectorConfig::for_pf(u, pf)?),
        ));
    }
    metrics.push((format!("u={u}"), Metric::Auc(u)));
    let q = args.qos()?;
    metrics.push((format!("A={}", q.a_exponent()), Metric::EffRateInner(q)));

    let mc = MonteCarloSpec {
        seed: args.seed(),
        n_samples: args.mc_samples()?,
        ..MonteCarloSpec::default()
    };
    let quad = QuadratureSpec::default();
    let tol = VerifyTolerances {
        series_tol: args.tol()?,
        ..VerifyTolerances::default()
    };
    let perturb = args.perturb.unwrap_or(1.0);

    let mut records: Vec<(&str, VerificationRecord)> = Vec::new();
    for model in &models {
        let samples = SampleSet::draw(model.as_ref(), &mc)?;
        let batch: edfading::Result<Vec<_>> = metrics
            .par_iter()
            .map(|(label, metric)| {
                let r = verify_closed_form(
                    metric,
                    model.as_ref(),
                    &quad,
                    &mc,
                    Some(&samples),
                    &tol,
                    perturb,
                )?;
                Ok((label.as_str(), r))
            })
            .collect();
        records.extend(batch?);
    }

    let failed = records.iter().filter(|(_, r)| !r.passed()).count();
    let mut out = Output::open(args)?;
    for (label, r) in &records {
        out.line(&format!("{label}: {r}"))?;
    }
    out.line(&format!(
        "# {} checks, {} passed, {} failed",
        records.len(),
        records.len() - failed,
        failed
    ))?;
    out.finish()?;
    if failed > 0 {
        return Err(VerifyFailed {
            failed,
            total: records.len(),
        }
        .into());
    }
    Ok(())
}
