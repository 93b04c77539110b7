//! Named experiments with JSON and CSV reports.
//!
//! Every report is a pure function of its [`ExperimentConfig`] apart from
//! the `timestamp` field.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    kt_check, nondemocracy_demo, one_greedy_check, random_lattice_basis, AnalysisError, AnalysisOptions, KtOptions,
    Leg, SumType,
};
use crate::construction::{
    apply_t_x, apply_t_y, operator_norm_lower_bound, subset_norm, y_vector, BasisElementId, BuildOptions,
    ConstructionError, ConstructionParams, FamilyBasis, Projection, DENSE_CAP,
};
use crate::greedy::FiniteBasis;
use crate::maximal::{
    averaging_domination_check, hl_maximal, hl_maximal_reference, maximal_csv, strong_type_full_line,
    strong_type_ratio, MaximalError, DEFAULT_RANGE_MULTIPLIER,
};
use crate::sampling::{gaussian, random_subset, sample_rng, SamplerConfig};
use crate::space::{lp_norm, norm_unchecked, Exponent, MixedIndex, SpaceSpec, SparseVector};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Maximal(#[from] MaximalError),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ConstructAndVerify,
    ProjectionNorms,
    GreedyConstants,
    PropertyA,
    Maximal,
    NondemocracyDemo,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::ConstructAndVerify,
        Experiment::ProjectionNorms,
        Experiment::GreedyConstants,
        Experiment::PropertyA,
        Experiment::Maximal,
        Experiment::NondemocracyDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ConstructAndVerify => "construct-and-verify",
            Experiment::ProjectionNorms => "projection-norms",
            Experiment::GreedyConstants => "greedy-constants",
            Experiment::PropertyA => "property-a",
            Experiment::Maximal => "maximal",
            Experiment::NondemocracyDemo => "nondemocracy-demo",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ExperimentError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub p: Exponent,
    pub q: f64,
    #[serde(rename = "N")]
    pub n_levels: usize,
    pub eps: f64,
    /// Cap on `n_N`, the number of outer blocks of the construction.
    pub cap_family: u64,
    pub samples: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seed: 0,
            p: Exponent::TWO,
            q: 2.0,
            n_levels: 2,
            eps: 0.9,
            cap_family: crate::construction::DEFAULT_CAPACITY,
            samples: 2000,
        }
    }

    fn sampler(&self, salt: u64) -> SamplerConfig {
        SamplerConfig::new(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt), self.samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    /// `None` for recorded-only measurements.
    pub bound: Option<f64>,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            pass: value <= bound,
            value,
            bound: Some(bound),
        }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            pass: value >= bound,
            value,
            bound: Some(bound),
        }
    }

    fn flag(name: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            pass,
            value: if pass { 1.0 } else { 0.0 },
            bound: Some(1.0),
        }
    }

    fn record(name: impl Into<String>, value: f64) -> Self {
        Check {
            name: name.into(),
            pass: true,
            value,
            bound: None,
        }
    }
}

/// A CSV table attached to a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub timestamp: u64,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn checks_csv(&self) -> String {
        let mut out = String::from("name,pass,value,bound\n");
        for c in &self.checks {
            let bound = c.bound.map_or(String::new(), |b| b.to_string());
            out.push_str(&format!("{},{},{},{}\n", c.name, c.pass, c.value, bound));
        }
        out
    }

    /// Writes `<experiment>.json`, or `<experiment>_checks.csv` plus one
    /// `<experiment>_<table>.csv` per table. Returns the paths written.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>, ExperimentError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ExperimentError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut files = Vec::new();
        let mut put = |name: String, body: &str| -> Result<(), ExperimentError> {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io(&path))?;
            files.push(path);
            Ok(())
        };
        match format {
            OutputFormat::Json => put(format!("{}.json", self.experiment), &self.to_json())?,
            OutputFormat::Csv => {
                put(format!("{}_checks.csv", self.experiment), &self.checks_csv())?;
                for t in &self.tables {
                    put(format!("{}_{}.csv", self.experiment, t.name), &t.csv)?;
                }
            }
        }
        Ok(files)
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    if !(config.q.is_finite() && config.q > 1.0) {
        return Err(ExperimentError::Config(format!("q = {} must be finite and > 1", config.q)));
    }
    if config.samples == 0 {
        return Err(ExperimentError::Config("samples must be positive".into()));
    }
    let (checks, tables) = match config.experiment {
        Experiment::ConstructAndVerify => construct_and_verify(config)?,
        Experiment::ProjectionNorms => projection_norms(config)?,
        Experiment::GreedyConstants => greedy_constants(config)?,
        Experiment::PropertyA => property_a(config)?,
        Experiment::Maximal => maximal(config)?,
        Experiment::NondemocracyDemo => nondemocracy(config)?,
    };
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(Report {
        experiment: config.experiment,
        config: config.clone(),
        checks,
        timestamp,
        tables,
    })
}

type Outcome = Result<(Vec<Check>, Vec<Table>), ExperimentError>;

/// Extremes of `‖Σ_A x‖^q / |A|` over a batch of subsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub tested: usize,
    pub failures: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl SweepSummary {
    fn empty() -> Self {
        SweepSummary {
            tested: 0,
            failures: 0,
            min_ratio: f64::INFINITY,
            max_ratio: f64::NEG_INFINITY,
        }
    }

    fn merge(self, o: SweepSummary) -> SweepSummary {
        SweepSummary {
            tested: self.tested + o.tested,
            failures: self.failures + o.failures,
            min_ratio: self.min_ratio.min(o.min_ratio),
            max_ratio: self.max_ratio.max(o.max_ratio),
        }
    }
}

/// Democracy certificates over `config.samples` random subsets with
/// log-uniform sizes up to `max_size`, plus every nonempty subset of the
/// `exhaustive` elements spread evenly through the family.
pub fn democracy_sweep(
    params: &ConstructionParams,
    p: Exponent,
    config: &SamplerConfig,
    max_size: usize,
    exhaustive: usize,
    tol: f64,
) -> Result<SweepSummary, ConstructionError> {
    let total = params.family_size() as usize;
    let check = |ids: &[BasisElementId]| -> Result<SweepSummary, ConstructionError> {
        let c = subset_norm(params, ids, p)?;
        let ratio = c.exact_norm_q_power / ids.len() as f64;
        let ok = c.exact_norm_q_power >= c.lower - tol && c.exact_norm_q_power <= c.upper + tol;
        Ok(SweepSummary {
            tested: 1,
            failures: usize::from(!ok),
            min_ratio: ratio,
            max_ratio: ratio,
        })
    };
    let max_size = max_size.clamp(1, total);
    let random = (0..config.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = config.rng(k);
            let size = ((max_size as f64).powf(rng.random::<f64>()).floor() as usize).clamp(1, max_size);
            let ids: Vec<_> = random_subset(&mut rng, total, size)
                .into_iter()
                .map(|i| params.id_at(i as u64).expect("index below family size"))
                .collect();
            check(&ids)
        })
        .try_reduce(SweepSummary::empty, |a, b| Ok(a.merge(b)))?;
    let pick = exhaustive.min(total).min(20);
    let sub: Vec<BasisElementId> = (0..pick)
        .map(|k| params.id_at((k * total / pick.max(1)) as u64).expect("in range"))
        .collect();
    let all = (1u32..1 << pick)
        .into_par_iter()
        .map(|mask| {
            let ids: Vec<_> = (0..pick).filter(|b| mask >> b & 1 == 1).map(|b| sub[b]).collect();
            check(&ids)
        })
        .try_reduce(SweepSummary::empty, |a, b| Ok(a.merge(b)))?;
    Ok(random.merge(all))
}

fn p_set(config: &ExperimentConfig) -> Vec<Exponent> {
    let mut ps = vec![Exponent::ONE, Exponent::TWO, Exponent::Infinite];
    if !ps.contains(&config.p) {
        ps.push(config.p);
    }
    ps
}

fn construct_and_verify(config: &ExperimentConfig) -> Outcome {
    let params = ConstructionParams::build(
        config.q,
        config.eps,
        config.n_levels,
        BuildOptions {
            capacity: config.cap_family,
        },
    )?;
    let mut checks = vec![
        Check::flag("parameters satisfy level conditions", params.satisfies_conditions()),
        Check::record("family size", params.family_size() as f64),
        Check::record("outer blocks n_N", params.blocks() as f64),
    ];
    let mut csv = String::from("p,tested,failures,min_ratio,max_ratio,lower,upper\n");
    let (lower, upper) = (1.0 - config.eps, 1.0 + config.eps);
    for (k, p) in p_set(config).into_iter().enumerate() {
        let s = democracy_sweep(&params, p, &config.sampler(k as u64), 2048, 14, 1e-9)?;
        checks.push(Check::at_most(format!("democracy failures p={p}"), s.failures as f64, 0.0));
        checks.push(Check::at_least(format!("min |A|^-1 norm^q p={p}"), s.min_ratio, lower - 1e-9));
        checks.push(Check::at_most(format!("max |A|^-1 norm^q p={p}"), s.max_ratio, upper + 1e-9));
        csv.push_str(&format!(
            "{p},{},{},{},{},{lower},{upper}\n",
            s.tested, s.failures, s.min_ratio, s.max_ratio
        ));
    }
    // the y_i span ℓ_p^N isometrically
    let mut worst = 0.0_f64;
    let ys: Vec<SparseVector> = (1..=params.levels()).map(|i| y_vector(&params, i)).collect::<Result<_, _>>()?;
    let q = Exponent::Finite(params.q());
    let mut rng = sample_rng(config.seed, u64::MAX);
    for _ in 0..config.samples.min(200) {
        let a: Vec<f64> = (0..params.levels()).map(|_| gaussian(&mut rng)).collect();
        let mut v = SparseVector::new();
        for (c, y) in a.iter().zip(&ys) {
            v.add_scaled(*c, y);
        }
        let lhs = norm_unchecked(&v, config.p, q);
        let rhs = lp_norm(&a, config.p);
        worst = worst.max((lhs - rhs).abs() / rhs.max(1e-300));
    }
    checks.push(Check::at_most(format!("y isometry p={}", config.p), worst, 1e-12));
    Ok((
        checks,
        vec![Table {
            name: "certificates".into(),
            csv,
        }],
    ))
}

/// Parameters from the config when they fit the dense cap, otherwise a small
/// relaxed instance with the same `q` and level count.
fn dense_params(config: &ExperimentConfig) -> Result<ConstructionParams, ConstructionError> {
    let built = ConstructionParams::build(
        config.q,
        config.eps,
        config.n_levels,
        BuildOptions {
            capacity: config.cap_family,
        },
    );
    match built {
        Ok(p) if p.blocks().saturating_mul(p.levels() as u64) <= DENSE_CAP => Ok(p),
        _ => {
            let levels = config.n_levels.clamp(1, 6);
            let m = vec![1; levels];
            let k: Vec<u64> = (0..levels).map(|i| if i == 0 { 1 } else { 2 + (i as u64 % 2) }).collect();
            ConstructionParams::relaxed(config.q, config.eps, m, k, DENSE_CAP)
        }
    }
}

fn projection_norms(config: &ExperimentConfig) -> Outcome {
    let params = dense_params(config)?;
    let mut checks = vec![Check::record("outer blocks n_N", params.blocks() as f64)];
    let samples = config.samples.min(400);
    let mut rng = sample_rng(config.seed, 1);
    let mut idem = 0.0_f64;
    for _ in 0..samples.min(50) {
        let mut v = SparseVector::new();
        for _ in 0..64 {
            let i = rng.random_range(1..=params.levels());
            let n = rng.random_range(1..=params.blocks());
            v.set(MixedIndex::new(i, n), gaussian(&mut rng));
        }
        for which in [Projection::X, Projection::Y] {
            let t = |w: &SparseVector| match which {
                Projection::X => apply_t_x(&params, w),
                Projection::Y => apply_t_y(&params, w),
            };
            let once = t(&v)?;
            idem = idem.max(t(&once)?.max_abs_diff(&once));
        }
    }
    checks.push(Check::at_most("T_X and T_Y idempotent", idem, 1e-12));
    let mut csv = String::from("projection,p,lower_bound,samples,best_kind\n");
    let q = Exponent::Finite(params.q());
    for (k, p) in p_set(config).into_iter().enumerate() {
        for which in [Projection::X, Projection::Y] {
            let cfg = SamplerConfig::new(config.sampler(10 + k as u64).seed, samples);
            let est = operator_norm_lower_bound(&params, which, p, &cfg)?;
            let name = format!("||T_{which:?}|| lower bound p={p}");
            checks.push(if p == q {
                Check::at_most(name, est.lower_bound, 1.0 + 1e-12)
            } else {
                Check::record(name, est.lower_bound)
            });
            csv.push_str(&format!("{which:?},{p},{},{},{:?}\n", est.lower_bound, est.samples, est.best_kind));
        }
    }
    Ok((
        checks,
        vec![Table {
            name: "operator_norms".into(),
            csv,
        }],
    ))
}

fn greedy_constants(config: &ExperimentConfig) -> Outcome {
    let opts = KtOptions {
        analysis: AnalysisOptions {
            config: SamplerConfig::new(config.seed, config.samples.min(200)),
            ..AnalysisOptions::default()
        },
        greedy: crate::greedy::GreedySampler {
            config: SamplerConfig::new(config.seed, config.samples.min(400)),
            ..KtOptions::default().greedy
        },
        ..KtOptions::default()
    };
    let mut checks = Vec::new();
    let mut csv = String::from(
        "basis,dim,K_uncond,K_suppression,Delta_democracy,C_greedy_lower,kt_upper,forward,converse_K,converse_Delta\n",
    );
    let mut bases: Vec<(String, FiniteBasisOrFamily)> = Vec::new();
    let spec = SpaceSpec::uniform(config.p, Exponent::Finite(config.q), 2).map_err(ConstructionError::from)?;
    let canonical = FiniteBasis::canonical_blocks(spec, 3).map_err(AnalysisError::from)?;
    bases.push(("canonical".into(), FiniteBasisOrFamily::Finite(canonical)));
    let small = ConstructionParams::relaxed(config.q, config.eps, vec![1, 2, 2], vec![1, 3, 2], DENSE_CAP)?;
    bases.push(("family".into(), FiniteBasisOrFamily::Family(FamilyBasis::new(small, config.p))));
    for k in 0..10 {
        let mut rng = sample_rng(config.seed, 100 + k);
        bases.push((format!("lattice{k}"), FiniteBasisOrFamily::Finite(random_lattice_basis(&mut rng, 8))));
    }
    for (name, basis) in &bases {
        let (r, dim) = match basis {
            FiniteBasisOrFamily::Finite(b) => (kt_check(b, &opts)?, crate::greedy::BasisNorm::dim(b)),
            FiniteBasisOrFamily::Family(b) => (kt_check(b, &opts)?, crate::greedy::BasisNorm::dim(b)),
        };
        checks.push(Check::at_most(format!("{name} C <= K + K^3 Delta"), r.c_greedy_lower, r.kt_upper + 1e-9));
        if let Some(ok) = r.kt_converse_k_ok {
            checks.push(Check {
                name: format!("{name} K <= C"),
                pass: ok,
                value: r.k_uncond,
                bound: Some(r.c_greedy_lower + 1e-9),
            });
        }
        if let Some(ok) = r.kt_converse_delta_ok {
            checks.push(Check {
                name: format!("{name} Delta <= C^2"),
                pass: ok,
                value: r.delta_democracy,
                bound: Some(r.c_greedy_lower.powi(2) + 1e-9),
            });
        }
        let opt = |b: Option<bool>| b.map_or("-".to_string(), |b| b.to_string());
        csv.push_str(&format!(
            "{name},{dim},{},{},{},{},{},{},{},{}\n",
            r.k_uncond,
            r.k_suppression,
            r.delta_democracy,
            r.c_greedy_lower,
            r.kt_upper,
            r.kt_forward_ok,
            opt(r.kt_converse_k_ok),
            opt(r.kt_converse_delta_ok)
        ));
    }
    Ok((
        checks,
        vec![Table {
            name: "constants".into(),
            csv,
        }],
    ))
}

enum FiniteBasisOrFamily {
    Finite(FiniteBasis),
    Family(FamilyBasis),
}

fn property_a(config: &ExperimentConfig) -> Outcome {
    let opts = AnalysisOptions {
        config: SamplerConfig::new(config.seed, config.samples.min(300)),
        ..AnalysisOptions::default()
    };
    let mut checks = Vec::new();
    for p in [Exponent::ONE, Exponent::TWO, Exponent::Infinite] {
        for n in 1..=5 {
            let b = FiniteBasis::canonical_flat(p, n).map_err(AnalysisError::from)?;
            let r = one_greedy_check(&b, &opts, &[], 1e-12)?;
            checks.push(Check::flag(format!("l_{p}^{n} is 1-greedy"), r.pass));
        }
    }
    let max_sum = FiniteBasis::canonical_blocks(
        SpaceSpec::explicit(Exponent::ONE, Exponent::Infinite, vec![1, 2]).map_err(ConstructionError::from)?,
        2,
    )
    .map_err(AnalysisError::from)?;
    let r = one_greedy_check(&max_sum, &opts, &[vec![0.0, 1.0, 1.0]], 1e-12)?;
    let mut csv = String::from("basis,x,moves,signs,norm_before,norm_after\n");
    for w in &r.property_a.witnesses {
        csv.push_str(&format!(
            "max_sum,{:?},{:?},{:?},{},{}\n",
            w.x, w.permutation.moves, w.signs, w.norm_before, w.norm_after
        ));
    }
    checks.push(Check::flag(
        "max(|a|,|b|+|c|) fails property (A) with witness",
        r.failed == vec![Leg::PropertyA] && !r.property_a.witnesses.is_empty(),
    ));
    let spec = SpaceSpec::flat(Exponent::TWO, 2).map_err(ConstructionError::from)?;
    let e1 = SparseVector::unit(1, 1);
    let f = SparseVector::from_entries([(MixedIndex::new(1, 1), 1.0), (MixedIndex::new(2, 1), 1.0)]);
    let skewed = FiniteBasis::normalized(vec![e1, f], spec).map_err(AnalysisError::from)?;
    let r = one_greedy_check(&skewed, &opts, &[], 1e-12)?;
    checks.push(Check::flag("{e1, (e1+e2)/sqrt2} fails suppression", r.failed.contains(&Leg::Suppression)));
    checks.push(Check::record("{e1, (e1+e2)/sqrt2} suppression constant", r.suppression.value));
    Ok((
        checks,
        vec![Table {
            name: "witnesses".into(),
            csv,
        }],
    ))
}

fn random_sequence<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    let len = rng.random_range(1..=64);
    (0..len)
        .map(|_| if rng.random_bool(0.3) { 0.0 } else { gaussian(rng) })
        .collect()
}

fn maximal(config: &ExperimentConfig) -> Outcome {
    let cfg = config.sampler(7);
    let stats = (0..cfg.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = cfg.rng(k);
            let a = random_sequence(&mut rng);
            let b: Vec<f64> = (0..a.len()).map(|_| gaussian(&mut rng)).collect();
            let lambda = rng.random_range(-4.0..4.0);
            let window = rng.random_range(1..=a.len());
            let ma = hl_maximal(&a);
            let mb = hl_maximal(&b);
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ms = hl_maximal(&sum);
            let scaled: Vec<f64> = a.iter().map(|x| lambda * x).collect();
            let ml = hl_maximal(&scaled);
            let reference = hl_maximal_reference(&a);
            let mut s = [0.0_f64; 5];
            for j in 0..a.len() {
                s[0] = s[0].max(a[j].abs() - ma[j]);
                s[1] = s[1].max(ms[j] - ma[j] - mb[j]);
                s[2] = s[2].max((ml[j] - lambda.abs() * ma[j]).abs());
                s[3] = s[3].max((ma[j] - reference[j]).abs());
            }
            let dom = averaging_domination_check(&a, window).expect("window is positive");
            s[4] = -dom.min_slack;
            s
        })
        .reduce(|| [f64::NEG_INFINITY; 5], |x, y| std::array::from_fn(|i| x[i].max(y[i])));
    let mut checks = vec![
        Check::at_most("|a| - M(a) pointwise", stats[0], 0.0),
        Check::at_most("M(a+b) - M(a) - M(b)", stats[1], 1e-12),
        Check::at_most("|M(la) - |l| M(a)|", stats[2], 1e-12),
        Check::at_most("fast vs reference", stats[3], 1e-12),
        Check::at_most("block average - M(a)", stats[4], 1e-12),
    ];
    let mut csv = String::from("q,max_ratio_truncated,max_ratio_full_line,max_range_gap\n");
    for q in [1.5, 2.0, 3.0] {
        let qe = Exponent::Finite(q);
        let cfg = SamplerConfig::new(config.sampler(8).seed, config.samples.min(500));
        let res = (0..cfg.samples)
            .into_par_iter()
            .map(|k| {
                let mut rng = cfg.rng(k);
                let mut a = random_sequence(&mut rng);
                if a.iter().all(|x| *x == 0.0) {
                    a[0] = 1.0;
                }
                let t = strong_type_ratio(&a, qe, DEFAULT_RANGE_MULTIPLIER)?;
                let f = strong_type_full_line(&a, qe)?;
                Ok::<_, MaximalError>((t, f.ratio2, (f.ratio1 - f.ratio2).abs()))
            })
            .try_reduce(|| (0.0, 0.0, 0.0), |x, y| Ok((x.0.max(y.0), x.1.max(y.1), x.2.max(y.2))))?;
        checks.push(Check::record(format!("max strong-type ratio q={q}"), res.1));
        checks.push(Check::at_most(format!("range stability q={q}"), res.2, 1e-6));
        csv.push_str(&format!("{q},{},{},{}\n", res.0, res.1, res.2));
    }
    let mut rng = sample_rng(config.seed, 9);
    let example = random_sequence(&mut rng);
    let ext = crate::maximal::padded(&example, example.len() * DEFAULT_RANGE_MULTIPLIER);
    Ok((
        checks,
        vec![
            Table {
                name: "strong_type".into(),
                csv,
            },
            Table {
                name: "sequence".into(),
                csv: maximal_csv(&ext, &hl_maximal(&ext)),
            },
        ],
    ))
}

fn nondemocracy(config: &ExperimentConfig) -> Outcome {
    let mut checks = Vec::new();
    let mut csv = String::from("sum,p,m,within,across,ratio,predicted\n");
    for sum in [SumType::L1, SumType::C0] {
        for m in [1, 10, 100, 1000] {
            let r = nondemocracy_demo(config.p, sum, m)?;
            let err = (r.ratio - r.predicted).abs() / r.predicted;
            checks.push(Check::at_most(format!("{sum:?} m={m} ratio vs m-power"), err, 1e-12));
            csv.push_str(&format!(
                "{sum:?},{},{m},{},{},{},{}\n",
                config.p, r.within, r.across, r.ratio, r.predicted
            ));
        }
    }
    Ok((
        checks,
        vec![Table {
            name: "fundamental".into(),
            csv,
        }],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(e: Experiment) -> ExperimentConfig {
        ExperimentConfig {
            samples: 60,
            seed: 7,
            ..ExperimentConfig::new(e)
        }
    }

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            assert_eq!(serde_json::to_string(&e).unwrap(), format!("\"{}\"", e.name()));
        }
        assert!("nope".parse::<Experiment>().is_err());
    }

    #[test]
    fn every_experiment_passes_at_desk_scale() {
        for e in Experiment::ALL {
            let r = run(&quick(e)).unwrap();
            let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).collect();
            assert!(failed.is_empty(), "{e}: {failed:?}");
            assert!(!r.tables.is_empty());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let c = quick(Experiment::Maximal);
        let (mut a, mut b) = (run(&c).unwrap(), run(&c).unwrap());
        a.timestamp = 0;
        b.timestamp = 0;
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.tables, b.tables);
    }

    #[test]
    fn capacity_error_carries_a_hint() {
        let c = ExperimentConfig {
            n_levels: 3,
            ..quick(Experiment::ConstructAndVerify)
        };
        let err = run(&c).unwrap_err().to_string();
        assert!(err.contains("larger epsilon"), "{err}");
    }

    #[test]
    fn report_schema() {
        let r = run(&quick(Experiment::NondemocracyDemo)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["experiment", "config", "checks", "timestamp"] {
            assert!(v.get(key).is_some());
        }
        let check = &v["checks"][0];
        for key in ["name", "pass", "value", "bound"] {
            assert!(check.get(key).is_some());
        }
    }

    #[test]
    fn writes_files() {
        let dir = std::env::temp_dir().join(format!("gbl-report-{}", std::process::id()));
        let r = run(&quick(Experiment::NondemocracyDemo)).unwrap();
        let json = r.write(&dir, OutputFormat::Json).unwrap();
        let csv = r.write(&dir, OutputFormat::Csv).unwrap();
        assert_eq!(json.len(), 1);
        assert_eq!(csv.len(), 2);
        assert!(std::fs::read_to_string(&csv[1]).unwrap().starts_with("sum,p,m"));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
