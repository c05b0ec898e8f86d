//! Synthetic Hadamard-square benchmark: Gaussian-mixture densities in
//! canonical form, compressed to Tucker, squared elementwise and truncated
//! back with the Gram-cross method and one Tucker-ALS sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::error::{usage, Error, Result};
use crate::formats::{from_canonical, hadamard, to_dense, Limits, Tucker, TuckerLike, TuckerOrtho};
use crate::linalg::Matrix;
use crate::recompress::{
    error_bound, refine_als_with_norm, truncate, CrossSummary, TruncationConfig,
};
use crate::tensor::Dense3;

pub const SCHEMA: &str = "bench-v1";

/// One Gaussian `weight * exp(-alpha |x - center|²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub alpha: f64,
    pub center: [f64; 3],
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

/// Mixture terms: listed explicitly or drawn from the config seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianSource {
    Random {
        terms: usize,
        #[serde(default = "default_alpha_range")]
        alpha_range: [f64; 2],
        #[serde(default = "default_center_range")]
        center_range: [f64; 2],
    },
    Explicit(Vec<Gaussian>),
}

fn default_alpha_range() -> [f64; 2] {
    [0.5, 2.0]
}

fn default_center_range() -> [f64; 2] {
    [-1.5, 1.5]
}

fn default_domain() -> [f64; 2] {
    [-5.0, 5.0]
}

fn default_eps() -> f64 {
    1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Grid points per mode.
    pub n: usize,
    #[serde(default = "default_domain")]
    pub domain: [f64; 2],
    pub gaussians: GaussianSource,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub eps_gram: f64,
    #[serde(default = "default_eps")]
    pub eps_als: f64,
    /// Rank cap applied to every mode of both truncations.
    #[serde(default)]
    pub r_max: Option<usize>,
    /// Compare against dense tensors when `n³` is below the cap.
    #[serde(default)]
    pub dense_check: bool,
    /// Report directory used by the CLI.
    #[serde(default)]
    pub out: Option<String>,
}

impl BenchConfig {
    pub fn random(n: usize, terms: usize, seed: u64) -> Self {
        BenchConfig {
            n,
            domain: default_domain(),
            gaussians: GaussianSource::Random {
                terms,
                alpha_range: default_alpha_range(),
                center_range: default_center_range(),
            },
            seed,
            eps_gram: default_eps(),
            eps_als: default_eps(),
            r_max: None,
            dense_check: false,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return usage(format!("n must be at least 2, got {}", self.n));
        }
        let [lo, hi] = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return usage(format!("domain [{lo}, {hi}] is not an interval"));
        }
        if !(self.eps_gram > 0.0 && self.eps_als > 0.0) {
            return usage("eps_gram and eps_als must be positive");
        }
        if self.r_max == Some(0) {
            return usage("r_max must be at least 1");
        }
        match &self.gaussians {
            GaussianSource::Random {
                terms,
                alpha_range: [a0, a1],
                center_range: [c0, c1],
            } => {
                if *terms == 0 {
                    return usage("at least one Gaussian term is required");
                }
                if !(*a0 > 0.0 && a0 <= a1 && a1.is_finite()) {
                    return usage("alpha_range must satisfy 0 < lo <= hi");
                }
                if !(c0 <= c1 && c0.is_finite() && c1.is_finite()) {
                    return usage("center_range must satisfy lo <= hi");
                }
            }
            GaussianSource::Explicit(list) => {
                if list.is_empty() {
                    return usage("at least one Gaussian term is required");
                }
                for g in list {
                    if !(g.alpha > 0.0 && g.alpha.is_finite()) {
                        return usage(format!("alpha must be positive, got {}", g.alpha));
                    }
                    if !g.center.iter().chain([&g.weight]).all(|x| x.is_finite()) {
                        return usage("centers and weights must be finite");
                    }
                }
            }
        }
        Ok(())
    }

    /// The mixture terms, drawing random ones from `seed`.
    pub fn terms(&self) -> Vec<Gaussian> {
        match &self.gaussians {
            GaussianSource::Explicit(list) => list.clone(),
            GaussianSource::Random {
                terms,
                alpha_range,
                center_range,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..*terms)
                    .map(|_| {
                        let alpha = rng.random_range(alpha_range[0]..=alpha_range[1]);
                        let center = [(); 3].map(|_| rng.random_range(center_range[0]..=center_range[1]));
                        Gaussian {
                            alpha,
                            center,
                            weight: 1.0,
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let [lo, hi] = self.domain;
        let h = (hi - lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| lo + h * i as f64).collect()
    }

    fn truncation(&self) -> TruncationConfig {
        TruncationConfig {
            eps_gram: self.eps_gram,
            eps_als: self.eps_als,
            r_max: self.r_max.map(|r| [r; 3]),
            ..TruncationConfig::default()
        }
    }
}

/// Canonical-format density on the uniform grid; the weight is folded into
/// the first factor.
pub fn gen_density(cfg: &BenchConfig) -> Result<TuckerLike> {
    cfg.validate()?;
    let x = cfg.grid();
    let terms = cfg.terms();
    let factor = |axis: usize, weighted: bool| {
        Matrix::from_fn(cfg.n, terms.len(), |i, s| {
            let g = &terms[s];
            let w = if weighted { g.weight } else { 1.0 };
            w * (-g.alpha * (x[i] - g.center[axis]).powi(2)).exp()
        })
    };
    from_canonical(factor(0, true), factor(1, false), factor(2, false))
}

/// Analytic density value at grid point `(i, j, k)`.
pub fn density_at(cfg: &BenchConfig, i: usize, j: usize, k: usize) -> f64 {
    let x = cfg.grid();
    let p = [x[i], x[j], x[k]];
    cfg.terms()
        .iter()
        .map(|g| {
            let r2: f64 = (0..3).map(|l| (p[l] - g.center[l]).powi(2)).sum();
            g.weight * (-g.alpha * r2).exp()
        })
        .sum()
}

/// Megabytes (2²⁰ bytes) needed for `r^d` doubles.
pub fn core_memory_mb(r: usize, d: u32) -> Result<f64> {
    if r == 0 || !(2..=8).contains(&d) {
        return usage(format!("core_memory_mb needs r >= 1 and 2 <= d <= 8, got r={r}, d={d}"));
    }
    Ok((r as f64).powi(d as i32) * 8.0 / (1u64 << 20) as f64)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchTimings {
    pub generate: f64,
    pub input_truncate: f64,
    pub hadamard: f64,
    pub subspaces: f64,
    pub core: f64,
    pub error: f64,
    pub refine: f64,
    pub dense_check: f64,
    pub total: f64,
}

/// Core storage in MB for the three stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryEstimate {
    pub input_core_mb: f64,
    /// Kron storage `|G| + |H|`.
    pub hadamard_kron_mb: f64,
    /// What an explicit dense Hadamard core would take.
    pub hadamard_dense_core_mb: f64,
    pub output_core_mb: f64,
    pub dense_tensor_mb: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseCheck {
    pub rel_error_cross: f64,
    pub rel_error_als: f64,
    /// Dense relative error of the compressed input against the density.
    pub input_rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    /// `complete` or `partial`.
    pub status: String,
    pub notes: Vec<String>,
    pub config: BenchConfig,
    pub dims: [usize; 3],
    pub terms: usize,
    pub input_ranks: [usize; 3],
    pub input_rel_error: f64,
    pub hadamard_ranks: [usize; 3],
    pub output_ranks: [usize; 3],
    pub refined_ranks: Option<[usize; 3]>,
    pub rel_error_cross: f64,
    pub rel_error_als: Option<f64>,
    /// `sqrt(eps_gram) * ‖c_F‖` from the accuracy constants.
    pub error_bound: f64,
    pub c_f: [f64; 3],
    pub hadamard_norm: f64,
    pub timings: BenchTimings,
    pub memory: MemoryEstimate,
    pub modes: Vec<CrossSummary>,
    pub dense_check: Option<DenseCheck>,
}

fn mb(elements: usize) -> f64 {
    elements as f64 * 8.0 / (1u64 << 20) as f64
}

/// Artifacts of a pipeline run next to the report.
pub struct PipelineOutput {
    pub report: BenchReport,
    pub density: TuckerLike,
    pub input: TuckerOrtho,
    pub output: TuckerOrtho,
}

pub fn run_pipeline(cfg: &BenchConfig) -> Result<BenchReport> {
    run_pipeline_full(cfg).map(|o| o.report)
}

/// Full pipeline. Resource-cap failures in the optional stages (ALS, dense
/// check) give a `partial` report; earlier ones are returned as errors.
pub fn run_pipeline_full(cfg: &BenchConfig) -> Result<PipelineOutput> {
    let total = Instant::now();
    let limits = Limits::default();
    let tcfg = cfg.truncation();
    let mut timings = BenchTimings::default();
    let mut notes = Vec::new();

    let start = Instant::now();
    let density = gen_density(cfg)?;
    timings.generate = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let (input, input_report) = truncate(&density, &tcfg)?;
    timings.input_truncate = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let squared = hadamard(&input, &input, &limits)?;
    timings.hadamard = start.elapsed().as_secs_f64();

    let (crossed, report) = truncate(&squared, &tcfg)?;
    timings.subspaces = report.timings.subspaces;
    timings.core = report.timings.core;
    timings.error = report.timings.error;

    let start = Instant::now();
    let refined = refine_als_with_norm(&squared, &crossed, cfg.eps_als, 1, report.input_norm, &limits);
    timings.refine = start.elapsed().as_secs_f64();
    let (output, refined_ranks, rel_error_als) = match refined {
        Ok((t, err)) => {
            let r = t.ranks();
            (t, Some(r), Some(err))
        }
        Err(Error::Resource(msg)) => {
            notes.push(format!("refinement skipped: {msg}"));
            (crossed.clone(), None, None)
        }
        Err(e) => return Err(e),
    };

    let dense_check = if cfg.dense_check {
        let start = Instant::now();
        let check = dense_compare(&density, &input, &crossed, &output, &limits);
        timings.dense_check = start.elapsed().as_secs_f64();
        match check {
            Ok(c) => Some(c),
            Err(Error::Resource(msg)) => {
                notes.push(format!("dense check skipped: {msg}"));
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let hr = squared.ranks();
    let memory = MemoryEstimate {
        input_core_mb: mb(input.ranks().iter().product()),
        hadamard_kron_mb: mb(2 * input.ranks().iter().product::<usize>()),
        hadamard_dense_core_mb: mb(hr.iter().product()),
        output_core_mb: mb(output.ranks().iter().product()),
        dense_tensor_mb: mb(cfg.n.pow(3)),
    };
    timings.total = total.elapsed().as_secs_f64();
    let rep = BenchReport {
        schema: SCHEMA.into(),
        status: if notes.is_empty() { "complete" } else { "partial" }.into(),
        notes,
        config: cfg.clone(),
        dims: density.dims(),
        terms: density.ranks()[0],
        input_ranks: input.ranks(),
        input_rel_error: input_report.rel_frob_error,
        hadamard_ranks: hr,
        output_ranks: crossed.ranks(),
        refined_ranks,
        rel_error_cross: report.rel_frob_error,
        rel_error_als,
        error_bound: error_bound(&report, cfg.eps_gram),
        c_f: report.c_f,
        hadamard_norm: report.input_norm,
        timings,
        memory,
        modes: report.modes,
        dense_check,
    };
    Ok(PipelineOutput {
        report: rep,
        density,
        input,
        output,
    })
}

fn dense_compare(
    density: &TuckerLike,
    input: &TuckerOrtho,
    crossed: &TuckerOrtho,
    refined: &TuckerOrtho,
    limits: &Limits,
) -> Result<DenseCheck> {
    let d = to_dense(density, limits)?;
    let a = to_dense(input, limits)?;
    let f = a.hadamard(&a)?;
    let fnorm = f.frob_norm();
    let rel = |x: &Dense3, y: &Dense3, norm: f64| -> Result<f64> {
        Ok(if norm > 0.0 { x.sub(y)?.frob_norm() / norm } else { 0.0 })
    };
    Ok(DenseCheck {
        rel_error_cross: rel(&to_dense(crossed, limits)?, &f, fnorm)?,
        rel_error_als: rel(&to_dense(refined, limits)?, &f, fnorm)?,
        input_rel_error: rel(&a, &d, d.frob_norm())?,
    })
}

pub const CSV_HEADER: &str = "schema,n,terms,seed,input_r1,input_r2,input_r3,hadamard_r1,hadamard_r2,hadamard_r3,out_r1,out_r2,out_r3,als_r1,als_r2,als_r3,rel_error_cross,rel_error_als,t_subspaces,t_core,t_refine,t_total,status";

impl BenchReport {
    /// One CSV row matching [`CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let ranks = |r: [usize; 3]| format!("{},{},{}", r[0], r[1], r[2]);
        let als = self.refined_ranks.map(ranks).unwrap_or_else(|| ",,".into());
        let err_als = self.rel_error_als.map(|e| format!("{e:e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{:e},{},{},{},{},{},{}",
            self.schema,
            self.config.n,
            self.terms,
            self.config.seed,
            ranks(self.input_ranks),
            ranks(self.hadamard_ranks),
            ranks(self.output_ranks),
            als,
            self.rel_error_cross,
            err_als,
            self.timings.subspaces,
            self.timings.core,
            self.timings.refine,
            self.timings.total,
            self.status
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::element;

    #[test]
    fn memory_units() {
        assert_eq!(core_memory_mb(128, 3).unwrap(), 16.0);
        assert!(core_memory_mb(0, 3).is_err());
        assert!(core_memory_mb(10, 9).is_err());
    }

    #[test]
    fn density_matches_analytic_sum() {
        let cfg = BenchConfig::random(16, 3, 9);
        let t = gen_density(&cfg).unwrap();
        for (i, j, k) in [(0, 0, 0), (3, 7, 11), (15, 8, 2)] {
            let want = density_at(&cfg, i, j, k);
            assert!((element(&t, i, j, k).unwrap() - want).abs() <= 1e-14 * want.abs().max(1e-300));
        }
    }

    #[test]
    fn config_json_roundtrip() {
        let text = r#"{"n": 32, "gaussians": {"explicit": [{"alpha": 1.0, "center": [0, 0, 0]}]}}"#;
        let cfg: BenchConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.terms()[0].weight, 1.0);
        assert_eq!(cfg.domain, [-5.0, 5.0]);
        let back: BenchConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn csv_columns_line_up() {
        let mut cfg = BenchConfig::random(12, 2, 1);
        cfg.dense_check = true;
        let rep = run_pipeline(&cfg).unwrap();
        assert_eq!(rep.csv_row().split(',').count(), CSV_HEADER.split(',').count());
        assert_eq!(rep.status, "complete");
    }
}
