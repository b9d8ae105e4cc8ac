use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adequacy::{descend, descend_from, AdequacyResult, DescentConfig};
use crate::domain::{OrthoPair, SpherePoint};
use crate::error::{Error, Result};
use crate::linalg::{exp_i_hermitian, hermitian_defect, CMat};

/// The curve `x ↦ δ(e^{ixA}V, e^{ixA}W)` sampled at `x_j = j·dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pair: OrthoPair,
    generator: CMat,
    dx: f64,
    steps: usize,
}

impl SweepSpec {
    pub fn new(pair: OrthoPair, generator: CMat, dx: f64, steps: usize) -> Result<Self> {
        let n = pair.n();
        if generator.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "generator is {}x{}, expected {n}x{n}",
                generator.nrows(),
                generator.ncols()
            )));
        }
        let defect = hermitian_defect(&generator);
        if defect > 1e-12 {
            return Err(Error::InvalidMatrix(format!(
                "generator is not hermitian (defect {defect:.3e})"
            )));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "dx must be positive, got {dx}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidConfig("steps must be positive".into()));
        }
        Ok(Self {
            pair,
            generator,
            dx,
            steps,
        })
    }

    pub fn pair_at(&self, x: f64) -> Result<OrthoPair> {
        self.pair
            .transformed(&exp_i_hermitian(&self.generator, x), 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub x: f64,
    pub delta: f64,
    pub grad_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub samples: Vec<SweepSample>,
    /// `max_j |δ_{j+1} − δ_j| / dx`.
    pub lipschitz: f64,
}

impl SweepTable {
    pub fn converged_fraction(&self) -> f64 {
        self.samples.iter().filter(|s| s.converged).count() as f64 / self.samples.len() as f64
    }

    /// Number of leading samples with `δ < threshold`.
    pub fn initial_plateau(&self, threshold: f64) -> usize {
        self.samples
            .iter()
            .take_while(|s| s.delta < threshold)
            .count()
    }

    /// CSV with header `x,delta,grad_norm,converged`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for s in &self.samples {
            writer.serialize(s)?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: "<csv>".into(),
            source,
        })?;
        Ok(())
    }
}

fn sample(x: f64, res: &AdequacyResult) -> SweepSample {
    SweepSample {
        x,
        delta: res.delta,
        grad_norm: res.grad_norm,
        converged: res.converged,
    }
}

/// With `warm_start` the first sample uses multi-start descent and each
/// later one starts from the previous minimizer, which serializes the
/// sweep; a warm run that does not converge is pooled with a multi-start
/// descent and the lower value kept. Without it every sample runs an
/// independent multi-start descent.
pub fn sweep_curve(spec: &SweepSpec, cfg: &DescentConfig, warm_start: bool) -> Result<SweepTable> {
    cfg.validate()?;
    let xs: Vec<f64> = (1..=spec.steps).map(|j| j as f64 * spec.dx).collect();
    let samples = if warm_start {
        let mut out = Vec::with_capacity(xs.len());
        let mut prev: Option<SpherePoint> = None;
        for &x in &xs {
            let pair = spec.pair_at(x)?;
            let res = match &prev {
                None => descend(&pair, cfg)?,
                Some(p) => {
                    let warm = descend_from(&pair, cfg, p)?;
                    if warm.converged {
                        warm
                    } else {
                        let cold = descend(&pair, cfg)?;
                        if cold.delta < warm.delta {
                            cold
                        } else {
                            warm
                        }
                    }
                }
            };
            out.push(sample(x, &res));
            prev = Some(res.minimizer);
        }
        out
    } else {
        xs.par_iter()
            .map(|&x| {
                let pair = spec.pair_at(x)?;
                descend(&pair, cfg).map(|res| sample(x, &res))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let lipschitz = samples
        .windows(2)
        .map(|w| (w[1].delta - w[0].delta).abs() / spec.dx)
        .fold(0.0, f64::max);
    log::info!(
        "sweep of {} samples: empirical Lipschitz bound {lipschitz:.3e}",
        samples.len()
    );
    Ok(SweepTable { samples, lipschitz })
}
