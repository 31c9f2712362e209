use crate::config::{ConfigError, RunConfig};
use crate::output::{num, Table};
use rydqc_core::dd_engine::motion::incoherent_reference;
use rydqc_core::dd_engine::sequence::{
    builtin_by_name, check_conditions, toggling_frames, PulseSequence, DEFAULT_TC_JSS,
};
use rydqc_core::dd_engine::{
    simulate_gate, simulate_storage, simulate_with_motion, GateOptions, LevelSet, MotionChannel,
    MotionConfig, SpinChainConfig, StorageOptions,
};
use rydqc_core::interactions::{extract_coefficients, InteractionCoefficients, PairWindows};
use rydqc_core::lifetime::{converged_decay_rate, LdosModel};
use rydqc_core::measurement_model::{
    array_budget, blockade_error_model, blockade_gate_budget, MeasurementParams,
};
use rydqc_core::ponderomotive::{
    find_magic_wavelengths, lattice_depth_factor, pond_rabi, rabi_position_sensitivity,
    LatticeOrientation, LatticeSpec, LgBeam, MagicPoint,
};
use rydqc_core::quantum_core::loglog_slope;
use rydqc_core::FieldConfig;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

const HZ: f64 = 2.0 * PI;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Core(rydqc_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "configuration error: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<rydqc_core::Error> for CliError {
    fn from(e: rydqc_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

pub type Outcome = Result<(Table, Value, Value), CliError>;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError(msg.into()))
}

fn u32_key(c: &RunConfig, key: &str) -> Result<u32, CliError> {
    u32::try_from(c.int(key))
        .map_err(|_| bad(format!("key `{key}` must be a non-negative integer")))
}

pub fn run(c: &mut RunConfig) -> Outcome {
    match c.command.as_str() {
        "interactions" => interactions(c),
        "magic-lattice" => magic_lattice(c),
        "rabi" => rabi(c),
        "lifetime" => lifetime(c),
        "check-sequence" => check_sequence(c),
        "dd-storage" => dd_storage(c),
        "dd-gate" => dd_gate(c),
        "dd-motion" => dd_motion(c),
        "measure-budget" => measure_budget(c),
        other => Err(bad(format!("unknown subcommand {other}"))),
    }
}

fn interactions(c: &RunConfig) -> Outcome {
    let fields = FieldConfig::new(c.f64("ez_v_per_cm"), c.f64("bz_gauss"))?;
    let windows = PairWindows {
        n_window: u32_key(c, "n_window")?,
        m_depth: u32_key(c, "m_depth")?,
        multipole_order: u32_key(c, "multipole_order")?,
        ..PairWindows::default()
    };
    let points = c.count("scan_points")?;
    let (lo, hi) = (c.f64("scan_min_um"), c.f64("scan_max_um"));
    if points == 0 || lo.is_nan() || lo <= 0.0 || hi < lo {
        return Err(bad(
            "scan needs scan_points ≥ 1 and 0 < scan_min_um ≤ scan_max_um",
        ));
    }
    let names = InteractionCoefficients::reference_table()
        .named()
        .map(|(n, _)| format!("{n}_hz2pi"));
    let mut header = vec!["separation_um".to_string()];
    header.extend(names.iter().cloned());
    header.push("t_pi_s".into());
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for k in 0..points {
        let d = if points == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (points - 1) as f64
        };
        let co = extract_coefficients(d * 1e-6, &fields, &windows)?;
        let mut row = vec![num(d)];
        row.extend(co.named().iter().map(|(_, v)| num(v / HZ)));
        row.push(num(co.t_pi()));
        table.push(row);
    }
    let at = extract_coefficients(c.f64("separation_um") * 1e-6, &fields, &windows)?;
    let coeffs: serde_json::Map<String, Value> = at
        .named()
        .iter()
        .map(|(n, v)| (format!("{n}_hz2pi"), json!(v / HZ)))
        .collect();
    let results = json!({
        "separation_um": c.f64("separation_um"),
        "coefficients": coeffs,
        "t_pi_s": at.t_pi(),
        "dipolar_ratio_jz_ss_over_j_ss": at.jz_ss / at.j_ss,
    });
    Ok((
        table,
        results,
        json!({ "frequencies": "Hz (value / 2π)", "lengths": "μm", "times": "s" }),
    ))
}

fn orientation(c: &RunConfig) -> Result<LatticeOrientation, CliError> {
    match c.str("orientation") {
        "in-plane" => Ok(LatticeOrientation::InPlane),
        "z-axis" => Ok(LatticeOrientation::ZAxis),
        o => Err(bad(format!(
            "orientation must be `in-plane` or `z-axis`, got `{o}`"
        ))),
    }
}

fn magic_lattice(c: &RunConfig) -> Outcome {
    let o = orientation(c)?;
    let storage = (u32_key(c, "storage_n0")?, u32_key(c, "storage_n1")?);
    let active = (u32_key(c, "active_n0")?, u32_key(c, "active_n1")?);
    let (lo, hi) = (c.f64("lambda_min_nm") * 1e-9, c.f64("lambda_max_nm") * 1e-9);
    let points = c.count("scan_points")?;
    if points < 2 {
        return Err(bad("scan_points must be ≥ 2"));
    }
    let mut table = Table::new(&[
        "wavelength_nm",
        "eta_s",
        "eta_a",
        "depth_factor_storage",
        "depth_factor_active",
    ]);
    for k in 0..points {
        let lambda = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let l = LatticeSpec::new(lambda, o, None)?;
        let f = |n| lattice_depth_factor(n, &l);
        let eta = |(a, b): (u32, u32)| (f(b) - f(a)) / f(a);
        table.push(vec![
            num(lambda * 1e9),
            num(eta(storage)),
            num(eta(active)),
            num(f(storage.0)),
            num(f(active.0)),
        ]);
    }
    let s = find_magic_wavelengths(storage, active, o, (lo, hi), c.count("root_steps")?)?;
    let pt = |p: &MagicPoint| json!({ "wavelength_nm": p.wavelength * 1e9, "eta_s": p.eta_s, "eta_a": p.eta_a });
    let results = json!({
        "eta_a_roots": s.eta_a_roots.iter().map(pt).collect::<Vec<_>>(),
        "eta_s_roots": s.eta_s_roots.iter().map(pt).collect::<Vec<_>>(),
        "compromise": pt(&s.compromise),
    });
    Ok((
        table,
        results,
        json!({ "wavelength": "nm", "eta": "fractional trap-depth difference" }),
    ))
}

fn rabi(c: &RunConfig) -> Outcome {
    let (n, np) = (u32_key(c, "n")?, u32_key(c, "n_prime")?);
    let (m1, m2) = (c.int("m1") as i32, c.int("m2") as i32);
    let (na, power) = (c.f64("numerical_aperture"), c.f64("power_mw") * 1e-3);
    let mut table = Table::new(&[
        "wavelength_nm",
        "sigma_nm",
        "fit_residual",
        "rabi_full_hz2pi",
        "rabi_ring_hz2pi",
        "waist_nm",
    ]);
    let mut rows = Vec::new();
    for lambda_nm in c.list("wavelengths_nm") {
        let b1 = LgBeam::from_na(m1, na, lambda_nm * 1e-9, power)?;
        let b2 = LgBeam::from_na(m2, na, lambda_nm * 1e-9, power)?;
        let s = rabi_position_sensitivity(n, np, &b1, &b2)?;
        let r = pond_rabi(n, np, &b1, &b2, [0.0; 3])?;
        table.push(vec![
            num(lambda_nm),
            num(s.sigma * 1e9),
            num(s.fit_residual),
            num(r.full / HZ),
            num(r.ring / HZ),
            num(b1.waist * 1e9),
        ]);
        rows.push(json!({ "wavelength_nm": lambda_nm, "sigma_nm": s.sigma * 1e9, "rabi_full_hz2pi": r.full / HZ }));
    }
    Ok((
        table,
        json!({ "points": rows }),
        json!({ "lengths": "nm", "frequencies": "Hz (value / 2π)" }),
    ))
}

fn lifetime(c: &RunConfig) -> Outcome {
    let model = match c.str("ldos") {
        "free-space" => LdosModel::FreeSpace,
        "bandstop" => LdosModel::bandstop(c.f64("p_min"), c.f64("f_low_hz"), c.f64("f_high_hz"))?,
        "file" => {
            let path = c.str("ldos_file");
            if path.is_empty() {
                return Err(bad("ldos = \"file\" needs ldos_file"));
            }
            LdosModel::from_csv(std::fs::File::open(path)?)?
        }
        o => {
            return Err(bad(format!(
                "ldos must be `free-space`, `bandstop` or `file`, got `{o}`"
            )))
        }
    };
    let (lo, hi) = (u32_key(c, "n_min")?, u32_key(c, "n_max")?);
    if lo < 3 || hi < lo {
        return Err(bad("need 3 ≤ n_min ≤ n_max"));
    }
    let t = c.f64("temperature");
    let mut table = Table::new(&[
        "n",
        "lifetime_free_space_s",
        "lifetime_zero_k_s",
        "lifetime_s",
        "decay_rate_per_s",
    ]);
    let mut rows = Vec::new();
    for n in lo..=hi {
        let free = converged_decay_rate(n, &LdosModel::FreeSpace, 0.0)?.lifetime();
        let cold = converged_decay_rate(n, &model, 0.0)?.lifetime();
        let warm = converged_decay_rate(n, &model, t)?;
        table.push(vec![
            n.to_string(),
            num(free),
            num(cold),
            num(warm.lifetime()),
            num(warm.total),
        ]);
        rows.push(json!({ "n": n, "lifetime_s": warm.lifetime(), "lifetime_zero_k_s": cold }));
    }
    Ok((
        table,
        json!({ "temperature_k": t, "levels": rows }),
        json!({ "lifetime": "s", "rate": "1/s", "temperature": "K" }),
    ))
}

/// Sequence from `sequence_file` when set, otherwise the built-in named by `sequence`.
fn load_sequence(c: &RunConfig, t_c: f64, duty: f64) -> Result<PulseSequence, CliError> {
    let path = c.str("sequence_file");
    if path.is_empty() {
        return Ok(builtin_by_name(c.str("sequence"), t_c, duty)?);
    }
    let text = std::fs::read_to_string(path)?;
    let name = Path::new(path)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sequence");
    Ok(PulseSequence::parse(name, &text, t_c, duty)?)
}

fn check_sequence(c: &RunConfig) -> Outcome {
    let seq = load_sequence(c, 1.0, c.f64("duty"))?;
    let n_periods = u32_key(c, "n_periods")?;
    let report = check_conditions(&seq, n_periods)?;
    let frames = toggling_frames(&seq)?;
    let mut table = Table::new(&["condition", "status", "residual"]);
    for r in &report.conditions {
        table.push(vec![
            r.index.to_string(),
            if r.pass { "PASS" } else { "FAIL" }.into(),
            num(r.residual),
        ]);
    }
    let results = json!({
        "sequence": seq.name,
        "n_periods": n_periods,
        "conditions": report.conditions,
        "frames": frames.f,
        "closing_frame": frames.closing,
        "pulses": seq.to_text(),
    });
    Ok((table, results, json!({ "residual": "dimensionless" })))
}

fn chain(c: &RunConfig, levels: LevelSet) -> Result<SpinChainConfig, CliError> {
    let d = c.f64("separation_um");
    if d.is_nan() || d <= 0.0 {
        return Err(bad("separation_um must be positive"));
    }
    let co = InteractionCoefficients::reference_table();
    let scaled = co.scaled((co.separation / (d * 1e-6)).powi(6));
    let mut cfg = SpinChainConfig::new(c.count("n_atoms")?, levels, scaled)?;
    cfg.separation = d * 1e-6;
    Ok(cfg)
}

fn dd_storage(c: &mut RunConfig) -> Outcome {
    let mut cfg = chain(c, LevelSet::Storage2)?;
    cfg.j_offset = HZ * c.f64("j_offset_hz2pi");
    let j = cfg.coefficients.j_ss + cfg.j_offset;
    let t_c = match c.opt_f64("t_c_s") {
        Some(t) => t,
        None if j != 0.0 => {
            let t = DEFAULT_TC_JSS / j.abs();
            c.set("t_c_s", json!(t));
            t
        }
        None => return Err(bad("t_c_s must be given when J_ss is zero")),
    };
    let seq = load_sequence(c, t_c, c.f64("duty"))?;
    let opts = StorageOptions {
        twirl: c.bool("twirl"),
        pulse_angle_error: c.f64("pulse_angle_error"),
        samples: c.count("samples")?,
        seed: c.int("seed") as u64,
        substeps: c.count("substeps")?,
    };
    let trace = simulate_storage(&seq, &cfg, c.count("cycles")?, &opts)?;
    let mut table = Table::new(&[
        "time_s",
        "cycles",
        "error_exact",
        "error_mc",
        "error_mc_sem",
    ]);
    for p in &trace.points {
        table.push(vec![
            num(p.time),
            p.cycles.to_string(),
            num(p.exact),
            num(p.monte_carlo.mean),
            num(p.monte_carlo.sem),
        ]);
    }
    let t: Vec<f64> = trace.points.iter().map(|p| p.time).collect();
    let e = trace.exact();
    let slope = if e.len() > 1 && e.iter().all(|x| *x > 0.0) {
        Some(loglog_slope(&t, &e))
    } else {
        None
    };
    let results = json!({
        "sequence": seq.name,
        "t_c_s": t_c,
        "t_c_times_j_ss": t_c * j.abs(),
        "error_after_first_cycle": e.first(),
        "error_after_last_cycle": e.last(),
        "growth_exponent": slope,
    });
    Ok((
        table,
        results,
        json!({ "time": "s", "error": "average gate error per atom" }),
    ))
}

fn dd_gate(c: &RunConfig) -> Outcome {
    let cfg = chain(c, LevelSet::Full4)?;
    let seq = load_sequence(c, 1e-3, c.f64("duty"))?;
    let max = c.count("max_gate_cycles")?;
    if max == 0 {
        return Err(bad("max_gate_cycles must be ≥ 1"));
    }
    let mut table = Table::new(&[
        "gate_cycles",
        "t_c_s",
        "t_gate_s",
        "eps_cz",
        "eps_cz_mc",
        "eps_cz_mc_sem",
    ]);
    let mut rows = Vec::new();
    for k in 1..=max {
        let opts = GateOptions {
            gate_cycles: Some(k),
            samples: c.count("samples")?,
            seed: c.int("seed") as u64,
            swap_after_pulse: c.bool("swap_after_pulse"),
        };
        let r = simulate_gate(&seq, &cfg, &opts)?;
        table.push(vec![
            k.to_string(),
            num(r.t_c),
            num(r.t_gate),
            num(r.eps_cz),
            num(r.monte_carlo.mean),
            num(r.monte_carlo.sem),
        ]);
        rows.push(json!({ "gate_cycles": k, "eps_cz": r.eps_cz, "t_gate_s": r.t_gate }));
    }
    let results = json!({ "sequence": seq.name, "t_pi_s": cfg.coefficients.t_pi(), "gates": rows });
    Ok((
        table,
        results,
        json!({ "time": "s", "eps_cz": "Haar-averaged CZ error" }),
    ))
}

fn dd_motion(c: &RunConfig) -> Outcome {
    let cfg = chain(c, LevelSet::Storage2)?;
    let omega = HZ * c.f64("trap_frequency_khz") * 1e3;
    let mut motion = MotionConfig::new(c.f64("temperature_uk") * 1e-6, omega, c.f64("eta"))?;
    motion.matched = c.bool("matched");
    motion.samples = c.count("samples")?;
    motion.seed = c.int("seed") as u64;
    let t_c = if motion.matched {
        2.0 * motion.period()
    } else {
        c.f64("t_c_periods") * motion.period()
    };
    let seq = load_sequence(c, t_c, c.f64("duty"))?;
    let r = simulate_with_motion(&seq, &cfg, &motion, &MotionChannel::ALL, c.count("cycles")?)?;
    let mut table = Table::new(&["channel", "error_per_cycle", "error_per_cycle_sem"]);
    table.push(vec!["total".into(), num(r.total.mean), num(r.total.sem)]);
    for ch in &r.channels {
        table.push(vec![
            ch.channel.clone(),
            num(ch.per_cycle.mean),
            num(ch.per_cycle.sem),
        ]);
    }
    let results = json!({
        "sequence": r.sequence,
        "t_c_s": r.t_c,
        "trap_periods_per_cycle": r.t_c / motion.period(),
        "error_per_cycle": r.total.mean,
        "step_halving_change": r.halving_change,
        "incoherent_reference": incoherent_reference(omega, c.f64("tau_circ_s")),
    });
    Ok((
        table,
        results,
        json!({ "time": "s", "error": "average gate error per atom per cycle" }),
    ))
}

fn measure_budget(c: &RunConfig) -> Outcome {
    let p = MeasurementParams {
        v_blockade: HZ * c.f64("v_blockade_mhz") * 1e6,
        tau_a: c.f64("tau_a_us") * 1e-6,
        p_eps_target: c.f64("p_eps_target"),
        p_eps_others: c.f64("p_eps_others"),
        p_eps_nn: c.f64("p_eps_nn"),
        neighbor_shift: HZ * c.f64("neighbor_shift_khz") * 1e3,
        t_meas: c.f64("t_meas_ms") * 1e-3,
        tau_circ: c.f64("tau_circ_s"),
    };
    let b = blockade_gate_budget(&p)?;
    let n = array_budget(b.p_g, p.t_meas, p.tau_circ)?;
    let points = c.count("scan_points")?;
    if points < 2 {
        return Err(bad("scan_points must be ≥ 2"));
    }
    let mut table = Table::new(&["rabi_frequency_hz2pi", "model_error"]);
    for k in 0..points {
        let x = b.omega_opt * 10f64.powf(-1.0 + 2.0 * k as f64 / (points - 1) as f64);
        table.push(vec![
            num(x / HZ),
            num(blockade_error_model(x, p.v_blockade, p.tau_a)),
        ]);
    }
    let results = json!({
        "omega_opt_hz2pi": b.omega_opt / HZ,
        "p_g": b.p_g,
        "p_sc": b.p_sc,
        "p_p_blockaded": b.p_p_blockaded,
        "p_p_blockaded_quoted": 1.2e-7,
        "p_p_unblockaded": b.p_p_unblockaded,
        "p_p_nn": b.p_p_nn,
        "excitation_time_s": b.excitation_time,
        "phi_rad": b.phi,
        "p_phi": b.p_phi,
        "array_size": n,
    });
    Ok((
        table,
        results,
        json!({ "frequencies": "Hz (value / 2π)", "times": "s", "probabilities": "dimensionless" }),
    ))
}
