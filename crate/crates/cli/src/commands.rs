use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rieszgas::equilibrium::{
    euler_lagrange_residual, prescribed_field, radial_coulomb_potential, robin_constant, solve_radial_coulomb,
    AxisBox, RadialDensity,
};
use rieszgas::io::{read_snapshot, write_density, write_histogram, write_snapshot, write_trace};
use rieszgas::kernel::{Configuration, ExternalField, GasModel, KernelSpec, RadialProfile};
use rieszgas::measures::{
    empirical_measure, fortet_mourier, max_radius, radial_cdf_of_density, radial_ks, radius_histogram,
    DiscreteMeasure, FmMethod, FmOptions,
};
use rieszgas::sampler::{run_chain, AnnealSchedule, InitStrategy, MoveKind, SamplerParams};
use rieszgas::Error;
use serde::Serialize;

use crate::config::{Algorithm, ExperimentConfig, FieldKind, FmChoice, InitKind, KernelKind, ScheduleKind};
use crate::output::{finite, read_field_table, write_field_table, OutputDir};
use crate::CliError;

/// Above this many particles `auto` switches from the `O(N^3)` assignment to the subsampled LP.
const AUTO_TRANSPORT_LIMIT: usize = 1000;
const ORACLE_SAMPLER_CELLS: usize = 4096;
// stream reserved for the reference sample of the equilibrium measure
const ORACLE_STREAM: u64 = 0x5eed;

/// Model built from a config, with its equilibrium measure when one is known.
struct Setup {
    model: GasModel<f64>,
    equilibrium: Option<RadialDensity<f64>>,
    /// Why `equilibrium` is missing.
    equilibrium_note: Option<String>,
    /// Largest tabulated radius of a table field.
    table_limit: Option<f64>,
}

fn kernel_of(cfg: &ExperimentConfig) -> Result<KernelSpec<f64>, CliError> {
    let m = &cfg.model;
    Ok(match m.kernel {
        KernelKind::Coulomb => KernelSpec::coulomb(m.dim)?,
        KernelKind::Riesz => KernelSpec::riesz(m.dim, m.alpha.expect("validated"))?,
    })
}

fn build(cfg: &ExperimentConfig) -> Result<Setup, CliError> {
    let kernel = kernel_of(cfg)?;
    let d = cfg.model.dim;
    let beta = cfg.model.beta;
    let f = &cfg.field;
    let mut table_limit = None;
    let field = match f.kind {
        FieldKind::Quadratic => ExternalField::quadratic(),
        FieldKind::Power => ExternalField::power(f.p.expect("validated"))?,
        FieldKind::Table => {
            let table = read_field_table(f.path.as_deref().expect("validated"))?;
            table_limit = Some(table.max_radius());
            ExternalField::Radial(RadialProfile::Table(table))
        }
        FieldKind::Prescribed => {
            let target = prescribed_target(cfg, &kernel, f.target_radius.expect("validated"))?;
            prescribed_field(Arc::new(target), 2.0, d, f.hinge.expect("validated"))?
        }
    };
    let model = GasModel::new(kernel, field, beta)?;
    let (equilibrium, equilibrium_note) = match (&model.field, model.kernel.is_newtonian()) {
        (ExternalField::Prescribed(_), _) => {
            (Some(RadialDensity::uniform_ball(d, f.target_radius.expect("validated"))?), None)
        }
        (ExternalField::Radial(profile), true) => match solve_radial_coulomb(d, profile, beta) {
            Ok(eq) => (Some(eq.density), None),
            Err(e) => (None, Some(e.to_string())),
        },
        _ => (None, Some("no closed-form equilibrium for this kernel and field".to_string())),
    };
    Ok(Setup { model, equilibrium, equilibrium_note, table_limit })
}

/// Uniform ball target; the constructed field is only exact for the
/// Newtonian kernel with unit coupling.
fn prescribed_target(cfg: &ExperimentConfig, kernel: &KernelSpec<f64>, radius: f64) -> Result<RadialDensity<f64>, CliError> {
    if !kernel.is_newtonian() {
        return Err(Error::Unsupported(format!(
            "prescribed fields need the Newtonian kernel (alpha = 2, d >= 3), got {kernel:?}"
        ))
        .into());
    }
    if cfg.model.beta != 1.0 {
        return Err(Error::Unsupported(format!(
            "prescribed fields are built for unit coupling, got beta = {}",
            cfg.model.beta
        ))
        .into());
    }
    Ok(RadialDensity::uniform_ball(cfg.model.dim, radius)?)
}

fn sampler_params(cfg: &ExperimentConfig) -> Result<(AnnealSchedule<f64>, SamplerParams<f64>), CliError> {
    let s = &cfg.sampler;
    let kind = match s.algorithm {
        Algorithm::Mala => MoveKind::Mala,
        Algorithm::Metropolis => MoveKind::Metropolis,
    };
    let mut params = SamplerParams::new(kind, s.step_size, s.sweeps, s.burn_in, s.seed);
    params.adapt = s.adapt;
    if let Some(t) = s.target_acceptance {
        params.target_acceptance = t;
    }
    params.thin = s.thin;
    let r = s.init_radius;
    params.init = match s.init {
        InitKind::UniformBall => InitStrategy::UniformBall { radius: r },
        InitKind::GibbsField => InitStrategy::GibbsField { half_width: r },
        InitKind::Stratified => InitStrategy::Stratified {
            cell: AxisBox::new(vec![-r; cfg.model.dim], vec![r; cfg.model.dim])?,
            density: None,
        },
    };
    let schedule = match s.schedule {
        ScheduleKind::NSquared => AnnealSchedule::NSquared,
        ScheduleKind::Fixed => AnnealSchedule::Fixed(s.beta_n.expect("validated")),
    };
    Ok((schedule, params))
}

#[derive(Serialize, Clone, Debug)]
pub struct Diagnostics {
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub config_digest: String,
    pub ks: Option<f64>,
    pub max_radius: f64,
    pub fm_distance: Option<f64>,
    pub fm_method: Option<&'static str>,
    pub fm_subsampled: Option<bool>,
    pub equilibrium_support: Option<[f64; 2]>,
    pub equilibrium_note: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct ChainSummary {
    beta_n: f64,
    final_energy: Option<f64>,
    final_step_size: f64,
    acceptance_rw: Option<f64>,
    acceptance_mala: Option<f64>,
    fallback_proposals: u64,
}

#[derive(Serialize)]
struct SampleReport<'a> {
    #[serde(flatten)]
    diagnostics: &'a Diagnostics,
    chain: ChainSummary,
}

fn diagnose_config(
    cfg: &ExperimentConfig,
    setup: &Setup,
    config: &Configuration<f64>,
    reach: f64,
    out: &mut OutputDir,
) -> Result<Diagnostics, CliError> {
    let n = config.len();
    let seed = cfg.sampler.seed;
    let mut warnings = Vec::new();
    let edge = max_radius(config);
    if let Some(limit) = setup.table_limit {
        let reach = reach.max(edge);
        if reach > limit {
            let msg = format!(
                "particles reached radius {reach:.4}, beyond the field table (r <= {limit}); the field was extrapolated linearly"
            );
            eprintln!("warning: {msg}");
            warnings.push(msg);
        }
    }
    let eq = setup.equilibrium.as_ref();
    let ks = match eq {
        Some(density) if cfg.diagnostics.ks => Some(radial_ks(config, &radial_cdf_of_density(density))),
        _ => None,
    };
    let mut fm = None;
    if let (Some(density), true) = (eq, cfg.diagnostics.fm) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ORACLE_STREAM);
        let sampler = density.sampler(ORACLE_SAMPLER_CELLS);
        let d = config.dim();
        let mut coords = vec![0.0; n * d];
        for p in coords.chunks_exact_mut(d) {
            sampler.sample_point(&mut rng, p);
        }
        let reference = DiscreteMeasure::uniform(d, coords)?;
        let method = match cfg.diagnostics.fm_method {
            FmChoice::Auto if n <= AUTO_TRANSPORT_LIMIT => FmMethod::TruncatedTransport,
            FmChoice::Auto | FmChoice::ExactLp => FmMethod::ExactLp,
            FmChoice::TruncatedTransport => FmMethod::TruncatedTransport,
        };
        let opts = FmOptions { max_atoms: cfg.diagnostics.fm_max_atoms, seed };
        fm = Some(fortet_mourier(&empirical_measure(config), &reference, method, &opts)?);
    }
    let r_hist = eq.map_or(edge, |e| e.outer().max(edge));
    let bins = radius_histogram(config, cfg.diagnostics.histogram_bins, if r_hist > 0.0 { r_hist } else { 1.0 })?;
    out.write_with("histogram.csv", |w| Ok(write_histogram(w, &bins)?))?;
    Ok(Diagnostics {
        n,
        seed,
        config_digest: cfg.digest(),
        ks,
        max_radius: edge,
        fm_distance: fm.map(|r| r.value),
        fm_method: fm.map(|r| r.method.name()),
        fm_subsampled: fm.map(|r| r.subsampled),
        equilibrium_support: eq.map(|e| [e.inner(), e.outer()]),
        equilibrium_note: setup.equilibrium_note.clone(),
        warnings,
    })
}

/// One chain into `dir`; shared by `sample` and `convergence-study`.
fn sample_into(cfg: &ExperimentConfig, dir: &Path) -> Result<Diagnostics, CliError> {
    let setup = build(cfg)?;
    let (schedule, params) = sampler_params(cfg)?;
    let mut out = OutputDir::create(dir)?;
    let chain = run_chain(&setup.model, cfg.model.n, &schedule, &params, &mut [])?;
    out.write_with("trace.csv", |w| Ok(write_trace(w, &chain.trace)?))?;
    out.write_with("snapshot.csv", |w| Ok(write_snapshot(w, chain.state.config())?))?;
    // largest radius among the recorded rows
    let reach = chain.trace.iter().fold(0.0f64, |m, r| m.max(r.max_radius));
    let diagnostics = diagnose_config(cfg, &setup, chain.state.config(), reach, &mut out)?;
    let c = &chain.state.counters;
    let report = SampleReport {
        diagnostics: &diagnostics,
        chain: ChainSummary {
            beta_n: chain.state.beta_n(),
            final_energy: finite(chain.state.energy()),
            final_step_size: chain.state.step_size(),
            acceptance_rw: (c.rw_proposed + c.fallback_proposed > 0).then(|| c.rw_rate()),
            acceptance_mala: (c.mala_proposed > 0).then(|| c.mala_rate()),
            fallback_proposals: c.fallback_proposed as u64,
        },
    };
    out.write_json("diagnostics.json", &report)?;
    out.finish("sample", cfg)?;
    Ok(diagnostics)
}

pub fn sample(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let diag = sample_into(cfg, &cfg.output.dir)?;
    match (diag.ks, diag.fm_distance) {
        (Some(ks), Some(fm)) => println!("N = {}: ks = {ks:.4}, fm = {fm:.4}, max_radius = {:.4}", diag.n, diag.max_radius),
        (Some(ks), None) => println!("N = {}: ks = {ks:.4}, max_radius = {:.4}", diag.n, diag.max_radius),
        _ => println!("N = {}: max_radius = {:.4}", diag.n, diag.max_radius),
    }
    Ok(())
}

pub fn diagnose(cfg: &ExperimentConfig, snapshot: &Path) -> Result<(), CliError> {
    let file = File::open(snapshot)
        .map_err(|e| CliError::Config(format!("cannot open snapshot {}: {e}", snapshot.display())))?;
    let config = read_snapshot(BufReader::new(file))?;
    if config.dim() != cfg.model.dim {
        return Err(Error::Usage(format!(
            "snapshot has dimension {}, config says {}",
            config.dim(),
            cfg.model.dim
        ))
        .into());
    }
    let setup = build(cfg)?;
    let mut out = OutputDir::create(&cfg.output.dir)?;
    let diag = diagnose_config(cfg, &setup, &config, 0.0, &mut out)?;
    out.write_json("diagnostics.json", &diag)?;
    out.finish("diagnose", cfg)?;
    println!("N = {}: ks = {:?}, fm = {:?}, max_radius = {:.4}", diag.n, diag.ks, diag.fm_distance, diag.max_radius);
    Ok(())
}

#[derive(Serialize)]
struct EquilibriumSummary {
    dim: usize,
    beta: f64,
    r0: f64,
    #[serde(rename = "R0")]
    r_outer: f64,
    #[serde(rename = "C_star")]
    c_star: f64,
    /// Radius of the uniform ball, quadratic field only.
    #[serde(rename = "R_star")]
    r_star: Option<f64>,
    normalization_error: f64,
    seed: u64,
    config_digest: String,
}

#[derive(Serialize)]
struct ResidualReport {
    grid_points: usize,
    r_max: f64,
    on_support_max_dev: f64,
    off_support_min_excess: Option<f64>,
    fitted_c: f64,
    robin_constant_quadrature: f64,
    seed: u64,
    config_digest: String,
}

pub fn equilibrium(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let kernel = kernel_of(cfg)?;
    if !kernel.is_newtonian() {
        return Err(Error::Unsupported(format!(
            "the equilibrium solver needs the Newtonian kernel |x|^(2-d) with d >= 3, got {kernel:?}"
        ))
        .into());
    }
    if cfg.field.kind == FieldKind::Prescribed {
        return Err(Error::Unsupported(
            "the equilibrium solver takes radial profiles v(r); a prescribed field already fixes its equilibrium".into(),
        )
        .into());
    }
    let setup = build(cfg)?;
    let profile = setup.model.field.radial_profile().expect("radial field");
    let d = cfg.model.dim;
    let eq = solve_radial_coulomb(d, profile, cfg.model.beta)?;
    let mut out = OutputDir::create(&cfg.output.dir)?;
    out.write_with("density.csv", |w| Ok(write_density(w, &eq.density, cfg.equilibrium.density_points)?))?;

    let points = cfg.equilibrium.grid_points;
    let r_max = 2.0 * eq.outer_radius();
    let grid: Vec<f64> = (0..points).map(|k| r_max * k as f64 / (points - 1) as f64).collect();
    let res = euler_lagrange_residual(&eq.density, &setup.model, &grid)?;
    let robin = robin_constant(&eq.density, &setup.model)?;

    let summary = EquilibriumSummary {
        dim: d,
        beta: cfg.model.beta,
        r0: eq.inner_radius(),
        r_outer: eq.outer_radius(),
        c_star: eq.robin_constant,
        r_star: eq.uniform_radius,
        normalization_error: eq.normalization_error,
        seed: cfg.sampler.seed,
        config_digest: cfg.digest(),
    };
    out.write_json("summary.json", &summary)?;
    out.write_json(
        "residual.json",
        &ResidualReport {
            grid_points: points,
            r_max,
            on_support_max_dev: res.on_support_max_dev,
            off_support_min_excess: finite(res.off_support_min_excess),
            fitted_c: res.fitted_c,
            robin_constant_quadrature: robin,
            seed: cfg.sampler.seed,
            config_digest: cfg.digest(),
        },
    )?;
    out.finish("equilibrium", cfg)?;
    println!(
        "r0 = {:.6}, R0 = {:.6}, C* = {:.6}, residual = {:.2e}",
        summary.r0, summary.r_outer, summary.c_star, res.on_support_max_dev
    );
    Ok(())
}

#[derive(Serialize)]
struct OptimalityReport {
    target_radius: f64,
    hinge: f64,
    /// `U + V` averaged over the support of the target.
    robin_constant: f64,
    on_support_max_dev: f64,
    /// Largest `|U + V - C|` on `B(0, sqrt(R))`, where the field is built to cancel `U`.
    plateau_max_dev: f64,
    /// Smallest `U + V - C` outside the support; nonnegative for an equilibrium.
    off_support_min_excess: Option<f64>,
    table_points: usize,
    r_max: f64,
    seed: u64,
    config_digest: String,
}

pub fn prescribe(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let p = &cfg.prescribe;
    let d = cfg.model.dim;
    let kernel = kernel_of(cfg)?;
    let target = prescribed_target(cfg, &kernel, p.target_radius)?;
    let ExternalField::Prescribed(field) = prescribed_field(Arc::new(target.clone()), 2.0, d, p.hinge)? else {
        unreachable!("prescribed_field builds a prescribed field")
    };
    let table = field.tabulate(p.r_max, p.table_points)?;
    let mut out = OutputDir::create(&cfg.output.dir)?;
    out.write_with("field_table.csv", |w| write_field_table(w, &table))?;

    let mut x = vec![0.0; d];
    let rows: Vec<(f64, f64, f64)> = (0..p.report_points)
        .map(|k| {
            let r = p.r_max * k as f64 / (p.report_points - 1) as f64;
            x[0] = r;
            (r, radial_coulomb_potential(&target, r), field.value(&x))
        })
        .collect();
    let on: Vec<f64> = rows.iter().filter(|t| t.0 <= p.target_radius).map(|t| t.1 + t.2).collect();
    let c = on.iter().sum::<f64>() / on.len().max(1) as f64;
    let dev_within = |limit: f64| {
        rows.iter().filter(|t| t.0 <= limit).fold(0.0f64, |m, t| m.max((t.1 + t.2 - c).abs()))
    };
    let off_min = rows.iter().filter(|t| t.0 > p.target_radius).fold(f64::INFINITY, |m, t| m.min(t.1 + t.2 - c));
    out.write_with("optimality.csv", |w| {
        writeln!(w, "r,U,V,excess")?;
        for &(r, u, v) in &rows {
            writeln!(w, "{r:.16e},{u:.16e},{v:.16e},{:.16e}", u + v - c)?;
        }
        Ok(())
    })?;
    let report = OptimalityReport {
        target_radius: p.target_radius,
        hinge: p.hinge,
        robin_constant: c,
        on_support_max_dev: dev_within(p.target_radius),
        plateau_max_dev: dev_within(p.hinge.sqrt()),
        off_support_min_excess: finite(off_min),
        table_points: p.table_points,
        r_max: p.r_max,
        seed: cfg.sampler.seed,
        config_digest: cfg.digest(),
    };
    out.write_json("optimality.json", &report)?;
    out.finish("prescribe", cfg)?;
    println!(
        "V(0) = {:.6}, plateau deviation = {:.2e}, min excess off support = {:?}",
        table.values()[0],
        report.plateau_max_dev,
        report.off_support_min_excess
    );
    Ok(())
}

#[derive(Serialize)]
struct StudyRow {
    #[serde(rename = "N")]
    n: usize,
    ks: Option<f64>,
    fm_distance: Option<f64>,
    max_radius: f64,
}

pub fn convergence_study(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let study = cfg
        .study
        .as_ref()
        .ok_or_else(|| CliError::Config("convergence-study needs a [study] section with n_values".into()))?;
    let setup = build(cfg)?;
    if setup.equilibrium.is_none() {
        return Err(Error::Unsupported(format!(
            "convergence-study needs a model with a known equilibrium: {}",
            setup.equilibrium_note.unwrap_or_default()
        ))
        .into());
    }
    let mut out = OutputDir::create(&cfg.output.dir)?;
    let runs: Vec<Diagnostics> = study
        .n_values
        .par_iter()
        .map(|&n| {
            let mut sub = cfg.clone();
            sub.model.n = n;
            sub.study = None;
            sub.output.dir = cfg.output.dir.join(format!("N{n}"));
            sample_into(&sub, &sub.output.dir)
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<StudyRow> = runs
        .iter()
        .map(|d| StudyRow { n: d.n, ks: d.ks, fm_distance: d.fm_distance, max_radius: d.max_radius })
        .collect();
    out.write_with("study.csv", |w| {
        writeln!(w, "N,ks,fm_distance,max_radius")?;
        let cell = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
        for r in &rows {
            writeln!(w, "{},{},{},{:.16e}", r.n, cell(r.ks), cell(r.fm_distance), r.max_radius)?;
        }
        Ok(())
    })?;
    out.write_json("study.json", &rows)?;
    out.finish("convergence-study", cfg)?;
    for r in &rows {
        println!("N = {:>6}: ks = {:?}, fm = {:?}, max_radius = {:.4}", r.n, r.ks, r.fm_distance, r.max_radius);
    }
    Ok(())
}
