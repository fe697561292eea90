use irs_stealth::channel::{echo_power_snr, receiver_snr, simulate_echo, ChannelParams, EchoScene, RadarWaveform};
use irs_stealth::{
    angular_window, baseline_no_irs, baseline_random_phase, baseline_single_point, direction_cosines, gain_profile,
    solve_stealth, window_max_gain, AngularWindow, ReflectionVector, SpatialFrequencyPair, StealthInstance,
    StealthSolution, Vec3,
};
use rand_chacha::rand_core::RngCore;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Stream};
use crate::error::CliError;
use crate::report::{num, to_db, CsvTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    SweepGain,
    SweepElements,
    SweepSamples,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::SweepGain => "sweep-gain",
            Command::SweepElements => "sweep-elements",
            Command::SweepSamples => "sweep-samples",
            Command::Simulate => "simulate",
        }
    }
}

/// Runs one command and returns the complete output document.
pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<String, CliError> {
    match cmd {
        Command::Solve => solve(cfg),
        Command::SweepGain => sweep_gain(cfg),
        Command::SweepElements => sweep_elements(cfg),
        Command::SweepSamples => sweep_samples(cfg),
        Command::Simulate => simulate(cfg),
    }
}

fn pair(p: &SpatialFrequencyPair) -> Value {
    json!({ "phi": p.phi, "omega": p.omega })
}

fn theta_json(theta: &ReflectionVector) -> Value {
    theta.as_vector().iter().map(|z| json!({ "magnitude": z.norm(), "phase": z.arg() })).collect()
}

fn document(cmd: Command, cfg: &ExperimentConfig, mut body: Value) -> String {
    body["command"] = json!(cmd.name());
    body["seed"] = json!(cfg.seed);
    body["config"] = serde_json::to_value(cfg).expect("configuration is serializable");
    let mut s = serde_json::to_string_pretty(&body).expect("report is serializable");
    s.push('\n');
    s
}

fn fine_max(
    cfg: &ExperimentConfig,
    inst: &StealthInstance,
    theta: &ReflectionVector,
) -> Result<(f64, SpatialFrequencyPair), CliError> {
    Ok(window_max_gain(theta, inst.window(), inst.rcs(), inst.geometry(), cfg.solver.fine_density)?)
}

fn solve_instance(cfg: &ExperimentConfig, inst: &StealthInstance) -> Result<StealthSolution, CliError> {
    let sol = solve_stealth(inst, &cfg.solve_options())?;
    log::info!(
        "N={} K={}: eta*={:.6} gap={:.2e} Newton steps={}",
        inst.n(),
        inst.k(),
        sol.eta_star,
        sol.duality_gap,
        sol.stats.newton_steps
    );
    Ok(sol)
}

fn solve(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let inst = cfg.instance()?;
    let sol = solve_instance(cfg, &inst)?;
    let (fine, at) = fine_max(cfg, &inst, &sol.theta_star)?;
    let tau = inst.tau();
    let points = &inst.plan().points;
    Ok(document(
        Command::Solve,
        cfg,
        json!({
            "n": inst.n(),
            "k": inst.k(),
            "tau": { "re": tau.re, "im": tau.im, "magnitude": tau.norm() },
            "no_irs_gain": tau.norm_sqr(),
            "eta_star": sol.eta_star,
            "eta_star_db": to_db(sol.eta_star),
            "dual_objective": sol.dual_objective,
            "duality_gap": sol.duality_gap,
            "complementary_slackness": sol.complementary_slackness,
            "kkt_residual": sol.kkt_residual,
            "effective_samples": sol.effective_samples,
            "fine_max_gain": fine,
            "fine_max_gain_db": to_db(fine),
            "fine_max_at": pair(&at),
            "theta": theta_json(&sol.theta_star),
            "duals": { "lambda": sol.duals.lambda, "mu": sol.duals.mu },
            "samples": points.iter().zip(&sol.sample_gains).map(|(p, g)| {
                json!({ "phi": p.phi, "omega": p.omega, "gain": g })
            }).collect::<Vec<_>>(),
            "stats": sol.stats,
        }),
    ))
}

/// Evenly spaced, endpoints included.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    let step = (stop - start) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { stop } else { start + step * i as f64 }).collect()
}

fn require_ula(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.array.n_y != 1 {
        return Err(CliError::config("array.n_y", "this command sweeps the horizontal gain and needs n_y = 1"));
    }
    Ok(())
}

fn sweep_gain(cfg: &ExperimentConfig) -> Result<String, CliError> {
    require_ula(cfg)?;
    let inst = cfg.instance()?;
    let sol = solve_instance(cfg, &inst)?;
    let random_seed = cfg.rng(Stream::RandomBaseline).next_u64();
    let methods = [
        sol.theta_star.clone(),
        baseline_no_irs(&inst),
        baseline_single_point(&inst),
        baseline_random_phase(&inst, random_seed),
    ];
    let phis = linspace(cfg.sweep.phi_start, cfg.sweep.phi_stop, cfg.sweep.phi_points);
    let points: Vec<_> = phis.iter().map(|&p| SpatialFrequencyPair::new(p, 0.0)).collect();
    let profiles = methods
        .iter()
        .map(|theta| gain_profile(theta, &points, inst.rcs(), inst.geometry()))
        .collect::<Result<Vec<_>, _>>()?;
    let window = inst.window();
    let (fine, _) = fine_max(cfg, &inst, &sol.theta_star)?;
    let out_of_band = points
        .iter()
        .zip(&profiles[0])
        .filter(|(p, _)| !window.contains(p, 0.0))
        .map(|(_, g)| *g)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut t = CsvTable::new(
        "sweep-gain",
        &[
            "phi",
            "in_window",
            "proposed",
            "proposed_db",
            "no_irs",
            "no_irs_db",
            "single_point",
            "single_point_db",
            "random_phase",
            "random_phase_db",
        ],
    );
    t.summary("eta_star", sol.eta_star);
    t.summary("duality_gap", sol.duality_gap);
    t.summary("fine_max_in_window", fine);
    t.summary("grid_max_out_of_window", out_of_band);
    t.summary("random_phase_seed", random_seed);
    for (i, p) in points.iter().enumerate() {
        let mut row = vec![num(p.phi), (window.contains(p, 0.0) as u8).to_string()];
        for prof in &profiles {
            row.push(num(prof[i]));
            row.push(to_db(prof[i]));
        }
        t.push(row);
    }
    t.render(cfg)
}

const ELEMENT_COLUMNS: [&str; 7] = ["n_x", "method", "max_gain", "max_gain_db", "eta_star", "duality_gap", "trials"];

fn sweep_elements(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let mut rng = cfg.rng(Stream::RandomBaseline);
    // the same draws at every N_x
    let seeds: Vec<u64> = (0..cfg.sweep.random_trials).map(|_| rng.next_u64()).collect();
    let pool = cfg.worker_pool()?;
    let blocks = pool.install(|| {
        cfg.sweep.n_x_values.par_iter().map(|&n_x| element_rows(cfg, n_x, &seeds)).collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut t = CsvTable::new("sweep-elements", &ELEMENT_COLUMNS);
    t.summary("no_irs_gain", cfg.rcs()?.magnitude().powi(2));
    for row in blocks.into_iter().flatten() {
        t.push(row);
    }
    t.render(cfg)
}

fn element_rows(cfg: &ExperimentConfig, n_x: usize, seeds: &[u64]) -> Result<Vec<Vec<String>>, CliError> {
    let inst = cfg.instance_with(n_x, cfg.window(), cfg.sampling.k_x)?;
    let sol = solve_instance(cfg, &inst)?;
    let row = |method: &str, value: f64, eta: Option<&StealthSolution>, trials: usize| {
        vec![
            n_x.to_string(),
            method.to_string(),
            num(value),
            to_db(value),
            eta.map(|s| num(s.eta_star)).unwrap_or_default(),
            eta.map(|s| num(s.duality_gap)).unwrap_or_default(),
            trials.to_string(),
        ]
    };
    let proposed = fine_max(cfg, &inst, &sol.theta_star)?.0;
    let none = fine_max(cfg, &inst, &baseline_no_irs(&inst))?.0;
    let single = fine_max(cfg, &inst, &baseline_single_point(&inst))?.0;
    let mut total = 0.0;
    let mut above = 0usize;
    for &s in seeds {
        let g = fine_max(cfg, &inst, &baseline_random_phase(&inst, s))?.0;
        total += g;
        above += (g > none) as usize;
    }
    let random = total / seeds.len() as f64;
    log::info!("N_x={n_x}: random phase exceeds the bare target in {above}/{} draws", seeds.len());
    Ok(vec![
        row("proposed", proposed, Some(&sol), 1),
        row("no-irs", none, None, 1),
        row("single-point", single, None, 1),
        row("random-phase", random, None, seeds.len()),
    ])
}

fn sweep_samples(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let jobs: Vec<(usize, f64, usize)> = cfg
        .sweep
        .sample_cases
        .iter()
        .flat_map(|&(n_x, phi_max)| cfg.sweep.k_values.iter().map(move |&k| (n_x, phi_max, k)))
        .collect();
    let pool = cfg.worker_pool()?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(n_x, phi_max, k)| {
                let window = AngularWindow::new(-phi_max, phi_max, cfg.window.omega_min, cfg.window.omega_max)?;
                let inst = cfg.instance_with(n_x, window, k)?;
                let sol = solve_instance(cfg, &inst)?;
                let fine = fine_max(cfg, &inst, &sol.theta_star)?.0;
                Ok(vec![
                    n_x.to_string(),
                    num(phi_max),
                    k.to_string(),
                    inst.k().to_string(),
                    num(fine),
                    to_db(fine),
                    num(sol.eta_star),
                    num(sol.duality_gap),
                    sol.effective_samples.len().to_string(),
                ])
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut t = CsvTable::new(
        "sweep-samples",
        &[
            "n_x",
            "phi_max",
            "k_x",
            "k_total",
            "max_gain",
            "max_gain_db",
            "eta_star",
            "duality_gap",
            "effective_samples",
        ],
    );
    for row in rows {
        t.push(row);
    }
    t.render(cfg)
}

fn uniform(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let s = &cfg.simulate;
    let q = cfg.target_position();
    let region = cfg.region()?;
    let window = angular_window(&region, &q, s.window_grid)?;
    let inst = cfg.instance_with(cfg.array.n_x, window, cfg.sampling.k_x)?;
    let sol = solve_instance(cfg, &inst)?;
    let (fine, _) = fine_max(cfg, &inst, &sol.theta_star)?;
    let zero = ReflectionVector::zeros(inst.n());
    let params = ChannelParams {
        alpha: s.alpha,
        lambda: cfg.lambda(),
        speed: s.speed,
        sigma2: s.sigma2,
        m_antennas: s.m_antennas,
    };
    let waveform = RadarWaveform::first_antenna(s.m_antennas)?;
    let rcs = *inst.rcs();
    let tau2 = inst.tau().norm_sqr();
    let mut place = cfg.rng(Stream::RadarPlacement);
    let mut noise = cfg.rng(Stream::Noise);

    let mut trials = Vec::with_capacity(s.trials);
    let (mut ratio_min, mut ratio_max, mut ratio_sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    let (mut worst_identity, mut worst_ratio) = (0.0f64, 0.0f64);
    let mut all_inside = true;
    for j in 0..s.trials {
        let mut spot = || {
            Vec3::new(
                uniform(&mut place, s.region_x[0], s.region_x[1]),
                uniform(&mut place, s.region_y[0], s.region_y[1]),
                s.region_z,
            )
        };
        let w_t = spot();
        let w_r = spot();
        let t = j as f64 * s.time_step;
        let scene = |theta| EchoScene {
            q,
            w_t,
            w_r,
            theta,
            waveform: &waveform,
            t,
            geom: inst.geometry(),
            params: &params,
            tau_s: &rcs,
        };
        let with = scene(&sol.theta_star);
        let without = scene(&zero);
        let noise_seed = noise.next_u64();
        let snap = simulate_echo(&with, noise_seed)?;
        let snr_with = receiver_snr(&with)?;
        let snr_without = receiver_snr(&without)?;
        let identity = rel_err(echo_power_snr(&with)?, snr_with).max(rel_err(echo_power_snr(&without)?, snr_without));

        let dev = direction_cosines(&q, &w_t)?.deviation(&direction_cosines(&q, &w_r)?);
        let inside = window.contains(&dev, 1e-12);
        let gain = gain_profile(&sol.theta_star, &[dev], &rcs, inst.geometry())?[0];
        let ratio = snr_with / snr_without;
        let gain_ratio = gain / tau2;
        worst_identity = worst_identity.max(identity);
        worst_ratio = worst_ratio.max(rel_err(ratio, gain_ratio));
        all_inside &= inside;
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
        ratio_sum += ratio;
        trials.push(json!({
            "w_t": [w_t.x, w_t.y, w_t.z],
            "w_r": [w_r.x, w_r.y, w_r.z],
            "t": t,
            "deviation": pair(&dev),
            "inside_window": inside,
            "snr_with_irs": snr_with,
            "snr_without_irs": snr_without,
            "snr_ratio": ratio,
            "snr_ratio_db": to_db(ratio),
            "gain_ratio": gain_ratio,
            "factorization_error": identity,
            "measured_snr_with_irs": snap.y.norm_squared() / s.sigma2,
            "noise_seed": noise_seed,
        }));
    }
    let mean = ratio_sum / s.trials as f64;
    Ok(document(
        Command::Simulate,
        cfg,
        json!({
            "window": {
                "phi_min": window.phi_min, "phi_max": window.phi_max,
                "omega_min": window.omega_min, "omega_max": window.omega_max,
            },
            "n": inst.n(),
            "k": inst.k(),
            "eta_star": sol.eta_star,
            "duality_gap": sol.duality_gap,
            "fine_max_gain": fine,
            "no_irs_gain": tau2,
            "theta": theta_json(&sol.theta_star),
            "summary": {
                "trials": s.trials,
                "snr_ratio_min": ratio_min,
                "snr_ratio_mean": mean,
                "snr_ratio_max": ratio_max,
                "snr_ratio_mean_db": to_db(mean),
                "bound_ratio": fine / tau2,
                "all_inside_window": all_inside,
                "max_factorization_error": worst_identity,
                "max_ratio_error": worst_ratio,
            },
            "trials": trials,
            "rcs_phase": rcs.phase,
        }),
    ))
}
