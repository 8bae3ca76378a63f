//! Subcommand bodies.

use log::warn;
use serde_json::json;

use super::config::{pick_f64, pick_usize, resolve_chain, ChainDefaults, ChainInputs};
use super::output::{Cell, Table};
use super::{CliError, Run};
use crate::asymptotics::{
    a_infinity, a_infinity_analytic, a_infinity_linear, approximate_visibility, b_analytic, b_of_t, gamma_coefficient,
    gamma_cusp, gamma_derivative_scan, gamma_fit_from_amplitudes, gamma_linear, log_grid, revival_time, CuspAnalysis,
    GammaDerivativeScan, Phase, RevivalDetection, RevivalDetector, RevivalTime, CALIBRATION_DELTA, MAX_FIT_WINDOW,
};
use crate::error::ChainError;
use crate::fit::linear_fit;
use crate::linear_modes::{critical_frequency_finite, group_velocity, max_group_velocity, ModeSet};
use crate::model::{critical_frequency_infinite, zeta3, ChainParams};
use crate::ramsey::{linear_amplitudes, linear_grid, zigzag_amplitudes, DisplacementAmplitudes, VisibilityTrace};
use crate::spectral::{
    bins_to_nearest, find_peaks, fourier_spectrum, max_non_dc, spectral_band_check, visibility_trace, FourierSpectrum,
    Peak, DEFAULT_BUDGET, DEFAULT_SAMPLES, DEFAULT_WINDOW,
};
use crate::zigzag_modes::{classify_zigzag_modes, structural_patterns, zigzag_equilibrium, zigzag_spectrum};

type CliResult<T = ()> = Result<T, CliError>;

pub(crate) const FIGURE_CHAIN: ChainDefaults = ChainDefaults { n_ions: 100, delta: 0.1, eta_c: 0.25 };

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Linear => "linear",
        Phase::Zigzag => "zigzag",
    }
}

/// Amplitudes in whichever phase is stable at `params`.
pub(crate) fn amplitudes_for(params: &ChainParams<f64>) -> Result<(DisplacementAmplitudes<f64>, Phase), ChainError> {
    let critical: f64 = critical_frequency_finite(params.n_ions);
    if params.nu_t > critical {
        return Ok((linear_amplitudes(params)?, Phase::Linear));
    }
    let spectrum = zigzag_spectrum(params.nu_t, params.n_ions)?;
    Ok((zigzag_amplitudes(params, &spectrum, 1)?, Phase::Zigzag))
}

pub(crate) fn spectrum(run: &mut Run, chain: &ChainInputs) -> CliResult {
    let p = resolve_chain(chain, &run.cfg, FIGURE_CHAIN, &mut run.inputs)?;
    run.params = json!(p);
    let n = p.n_ions;
    let axial = ModeSet::<f64>::axial(n)?;
    let transverse = ModeSet::transverse(p.nu_t, n)?;
    let mut table = Table::new(&["n", "parity", "k", "omega_axial", "omega_transverse", "group_velocity"]);
    for ((idx, wx), (_, wy)) in axial.modes.iter().zip(&transverse.modes) {
        let k: f64 = idx.wave_number(n);
        let v = group_velocity(k, p.nu_t, n).unwrap_or(f64::NAN);
        table.push(vec![
            idx.n.into(),
            Cell::Text(idx.parity.to_string()),
            k.into(),
            (*wx).into(),
            (*wy).into(),
            v.into(),
        ]);
    }
    run.out.csv("spectrum.csv", &table)?;
    let g = max_group_velocity(p.nu_t, n)?;
    run.results.insert("zeta3".into(), json!(zeta3()));
    run.results.insert("critical_frequency_infinite".into(), json!(critical_frequency_infinite::<f64>()));
    run.results.insert("critical_frequency_finite".into(), json!(critical_frequency_finite::<f64>(n)));
    run.results.insert("v_max".into(), json!(g.v_max));
    run.results.insert("k_star".into(), json!(g.k_star));
    run.results.insert("t_star".into(), json!(n as f64 / g.v_max));
    Ok(())
}

pub(crate) fn zigzag(run: &mut Run, chain: &ChainInputs, scan_points: Option<usize>) -> CliResult {
    let defaults = ChainDefaults { n_ions: 100, delta: -0.1, eta_c: 0.25 };
    let p = resolve_chain(chain, &run.cfg, defaults, &mut run.inputs)?;
    run.params = json!(p);
    let n = p.n_ions;
    let spec = zigzag_spectrum(p.nu_t, n)?;
    let cls = classify_zigzag_modes(&spec)?;
    let mut labels = cls.labels.clone();
    labels.sort_by_key(|l| l.column);
    let mut table = Table::new(&["column", "omega", "n", "k", "branch", "parity", "u", "v", "residual", "degenerate"]);
    for l in &labels {
        table.push(vec![
            l.column.into(),
            l.omega.into(),
            l.n.into(),
            l.k.into(),
            (l.branch as usize).into(),
            Cell::Text(l.parity.to_string()),
            l.coefficients.0.into(),
            l.coefficients.1.into(),
            l.residual.into(),
            usize::from(l.degenerate_cluster).into(),
        ]);
    }
    run.out.csv("zigzag_modes.csv", &table)?;
    let structural: serde_json::Map<String, serde_json::Value> = structural_patterns::<f64>(n)
        .into_iter()
        .map(|(name, v)| {
            let r = spec.eigenspace_residual(&v);
            (name.to_string(), json!({"omega_squared": r.eigenvalue, "residual": r.residual}))
        })
        .collect();
    let eq = spec.equilibrium;
    run.results.insert("b".into(), json!(eq.b));
    run.results.insert("energy_per_ion".into(), json!(eq.energy));
    run.results.insert("gradient".into(), json!(eq.gradient));
    run.results.insert("critical_frequency_finite".into(), json!(critical_frequency_finite::<f64>(n)));
    run.results.insert("orthogonality_error".into(), json!(spec.orthogonality_error()));
    run.results.insert("max_projection_residual".into(), json!(cls.max_residual));
    run.results.insert("max_eigenvalue_mismatch".into(), json!(cls.max_eigenvalue_mismatch));
    run.results.insert("degenerate_clusters".into(), json!(cls.degenerate_clusters));
    run.results.insert("structural_patterns".into(), json!(structural));

    let points = pick_usize(scan_points, &run.cfg, "scan_points", 0, &mut run.inputs)?;
    if points > 0 {
        let nc: f64 = critical_frequency_finite(n);
        let gaps = log_grid(1e-6, 1e-1, points.max(3))?;
        let mut table = Table::new(&["nu_t", "gap", "b", "energy_per_ion"]);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for g in &gaps {
            let e = zigzag_equilibrium(nc - g, n)?;
            table.push(vec![(nc - g).into(), (*g).into(), e.b.into(), e.energy.into()]);
            x.push(g.ln());
            y.push(e.b.ln());
        }
        run.out.csv("zigzag_bifurcation.csv", &table)?;
        let fit = linear_fit(&x, &y)?;
        run.grids.insert("bifurcation_gaps".into(), json!(gaps));
        run.results.insert("bifurcation_exponent".into(), json!(fit.slope));
    }
    Ok(())
}

pub(crate) fn visibility(
    run: &mut Run,
    chain: &ChainInputs,
    t_min: Option<f64>,
    t_max: Option<f64>,
    samples: Option<usize>,
) -> CliResult {
    let p = resolve_chain(chain, &run.cfg, FIGURE_CHAIN, &mut run.inputs)?;
    run.params = json!(p);
    let t_min = pick_f64(t_min, &run.cfg, "t_min", 0.0, &mut run.inputs)?;
    let t_max = pick_f64(t_max, &run.cfg, "t_max", 100.0, &mut run.inputs)?;
    let samples = pick_usize(samples, &run.cfg, "samples", 1001, &mut run.inputs)?;
    let times = linear_grid(t_min, t_max, samples)?;
    let (amps, phase) = amplitudes_for(&p)?;
    let pure = p.theta == 0.0;
    if !pure {
        warn!("θ > 0: the complex overlap is not defined, Re S and Im S are omitted");
    }
    let trace = amps.trace(times, p.theta, pure)?;
    let header: &[&str] = if pure { &["t", "A", "V", "re_S", "im_S"] } else { &["t", "A", "V"] };
    let mut table = Table::new(header);
    for i in 0..trace.len() {
        let mut row: Vec<Cell> = vec![trace.times[i].into(), trace.exponent[i].into(), trace.visibility[i].into()];
        if let Some(s) = &trace.overlap {
            row.push(s[i].re.into());
            row.push(s[i].im.into());
        }
        table.push(row);
    }
    run.out.csv("visibility.csv", &table)?;
    run.grids.insert("time".into(), json!({"t_min": t_min, "t_max": t_max, "samples": samples}));
    run.results.insert("phase".into(), json!(phase_name(phase)));
    run.results.insert("eta0".into(), json!(p.eta0()));
    run.results.insert("a_infinity".into(), json!(a_infinity(&amps).direct));
    run.results.insert("gamma".into(), json!(gamma_coefficient(&amps).direct));
    run.results.insert("mean_visibility".into(), json!(trace.mean_visibility()));
    Ok(())
}

pub(crate) struct FourierOptions {
    pub window: Option<f64>,
    pub samples: Option<usize>,
    pub prominence: Option<f64>,
    pub band: bool,
    pub budget: Option<usize>,
}

pub(crate) struct FourierRun {
    pub trace: VisibilityTrace<f64>,
    pub spectrum: FourierSpectrum<f64>,
    pub peaks: Vec<Peak<f64>>,
    pub mode_frequencies: Vec<f64>,
}

pub(crate) fn fourier_run(
    params: &ChainParams<f64>,
    window: f64,
    samples: usize,
    relative_prominence: f64,
    budget: usize,
) -> Result<FourierRun, ChainError> {
    let (amps, _) = amplitudes_for(params)?;
    let trace = visibility_trace(&amps, window, samples, params.theta, budget)?;
    let spectrum = fourier_spectrum(&trace)?;
    let peaks = find_peaks(&spectrum, relative_prominence * max_non_dc(&spectrum))?;
    let mode_frequencies = amps.modes.iter().map(|m| m.omega).collect();
    Ok(FourierRun { trace, spectrum, peaks, mode_frequencies })
}

pub(crate) fn spectrum_table(s: &FourierSpectrum<f64>) -> Table {
    let mut t = Table::new(&["omega", "F"]);
    for (w, f) in s.omega.iter().zip(&s.amplitude) {
        t.push(vec![(*w).into(), (*f).into()]);
    }
    t
}

pub(crate) fn peaks_table(r: &FourierRun) -> Table {
    let mut t = Table::new(&["omega", "F", "prominence", "nearest_mode", "bins_from_mode"]);
    for p in &r.peaks {
        let nearest = r.mode_frequencies.iter().copied().fold(f64::NAN, |best, w| {
            if best.is_nan() || (w - p.omega).abs() < (best - p.omega).abs() {
                w
            } else {
                best
            }
        });
        t.push(vec![
            p.omega.into(),
            p.amplitude.into(),
            p.prominence.into(),
            nearest.into(),
            bins_to_nearest(p.omega, &r.mode_frequencies, r.spectrum.bin_width).into(),
        ]);
    }
    t
}

/// Largest peak distance (bins) from any mode frequency.
pub(crate) fn worst_peak_offset(r: &FourierRun) -> f64 {
    r.peaks.iter().map(|p| bins_to_nearest(p.omega, &r.mode_frequencies, r.spectrum.bin_width)).fold(0.0, f64::max)
}

pub(crate) fn fourier(run: &mut Run, chain: &ChainInputs, opts: FourierOptions) -> CliResult {
    let p = resolve_chain(chain, &run.cfg, FIGURE_CHAIN, &mut run.inputs)?;
    run.params = json!(p);
    let window = pick_f64(opts.window, &run.cfg, "window", DEFAULT_WINDOW, &mut run.inputs)?;
    let samples = pick_usize(opts.samples, &run.cfg, "samples", DEFAULT_SAMPLES, &mut run.inputs)?;
    let prominence = pick_f64(opts.prominence, &run.cfg, "prominence", 0.1, &mut run.inputs)?;
    let budget = pick_usize(opts.budget, &run.cfg, "budget", DEFAULT_BUDGET, &mut run.inputs)?;
    run.inputs.insert("band".into(), json!(opts.band));
    let r = fourier_run(&p, window, samples, prominence, budget)?;
    run.out.csv("fourier.csv", &spectrum_table(&r.spectrum))?;
    run.out.csv("fourier_peaks.csv", &peaks_table(&r))?;
    run.grids.insert("time".into(), json!({"window": window, "samples": samples}));
    run.results.insert("bin_width".into(), json!(r.spectrum.bin_width));
    run.results.insert("peaks".into(), json!(r.peaks.len()));
    run.results.insert("max_peak_offset_bins".into(), json!(worst_peak_offset(&r)));
    run.results.insert("mean_visibility".into(), json!(r.trace.mean_visibility()));
    if opts.band {
        let gap = p.gap();
        match (gap.band_floor_overlay(), gap.delta()) {
            (Ok(floor), Ok(delta)) => {
                let caption = spectral_band_check(&r.spectrum, floor, p.nu_t)?;
                let gap_band = spectral_band_check(&r.spectrum, delta, p.nu_t)?;
                run.results.insert(
                    "band".into(),
                    json!({"omega_min": floor, "omega_max": p.nu_t, "fraction": caption.fraction}),
                );
                run.results.insert(
                    "gap_band".into(),
                    json!({"omega_min": delta, "omega_max": p.nu_t, "fraction": gap_band.fraction}),
                );
            }
            _ => warn!("band overlay needs Δ ≥ 0; skipped"),
        }
    }
    Ok(())
}

pub(crate) struct ScanOptions {
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub points: Option<usize>,
}

fn scan_grid(run: &mut Run, opts: &ScanOptions) -> CliResult<Vec<f64>> {
    let lo = pick_f64(opts.delta_min, &run.cfg, "delta_min", 1e-4, &mut run.inputs)?;
    let hi = pick_f64(opts.delta_max, &run.cfg, "delta_max", 1e-2, &mut run.inputs)?;
    let points = pick_usize(opts.points, &run.cfg, "points", 9, &mut run.inputs)?;
    let grid = log_grid(lo, hi, points)?;
    run.grids.insert("delta".into(), json!(grid));
    Ok(grid)
}

fn scan_chain(run: &mut Run, chain: &ChainInputs) -> CliResult<(usize, f64)> {
    let n = pick_usize(chain.n_ions, &run.cfg, "N", 1000, &mut run.inputs)?;
    let eta_c = pick_f64(chain.eta_c, &run.cfg, "eta_c", 0.05, &mut run.inputs)?;
    if chain.delta.is_some() || chain.nu_t.is_some() {
        warn!("scan subcommands ignore a single Δ or ν_t; use the grid options");
    }
    run.params = json!({"n_ions": n, "eta_c": eta_c, "theta": 0.0});
    Ok((n, eta_c))
}

pub(crate) struct GammaTable {
    pub table: Table,
    pub scan: GammaDerivativeScan<f64>,
    pub fit_errors: Vec<f64>,
}

/// `(Γ, Γ_fit)` from the short-time quadratic fit at each detuning.
pub(crate) fn gamma_fits(n: usize, eta_c: f64, deltas: &[f64]) -> Result<Vec<(f64, f64)>, ChainError> {
    deltas
        .iter()
        .map(|d| {
            let p = ChainParams::from_delta(n, *d, eta_c, 0.0)?;
            let amps = linear_amplitudes(&p)?;
            let fit = gamma_fit_from_amplitudes(&amps, MAX_FIT_WINDOW / p.nu_t, 200)?;
            Ok((gamma_linear(&p)?, fit.gamma_fit))
        })
        .collect()
}

pub(crate) fn gamma_table(n: usize, eta_c: f64, deltas: &[f64]) -> Result<GammaTable, ChainError> {
    let scan = gamma_derivative_scan(n, eta_c, deltas)?;
    let fits = gamma_fits(n, eta_c, deltas)?;
    let mut table = Table::new(&["delta", "gamma", "gamma_fit", "dgamma_ddelta", "dgamma_fit"]);
    for ((d, g_prime), (gamma, fit)) in deltas.iter().zip(&scan.derivatives).zip(&fits) {
        table.push(vec![
            (*d).into(),
            (*gamma).into(),
            (*fit).into(),
            (*g_prime).into(),
            (scan.a + scan.b * d.ln()).into(),
        ]);
    }
    let fit_errors = fits.iter().map(|(g, f)| (f - g).abs() / g).collect();
    Ok(GammaTable { table, scan, fit_errors })
}

pub(crate) fn cusp_table(c: &CuspAnalysis<f64>) -> Table {
    let mut t = Table::new(&["delta", "gamma", "phase"]);
    for p in &c.points {
        t.push(vec![p.delta.into(), p.gamma.into(), phase_name(p.phase).into()]);
    }
    t
}

pub(crate) fn cusp_grid(delta_max: f64, points: usize) -> Vec<f64> {
    let half = (points.max(5) / 2) as i64;
    (-half..=half).map(|i| delta_max * i as f64 / half as f64).collect()
}

pub(crate) fn gamma_scan(
    run: &mut Run,
    chain: &ChainInputs,
    opts: ScanOptions,
    cusp: Option<(Option<usize>, Option<usize>)>,
) -> CliResult {
    let (n, eta_c) = scan_chain(run, chain)?;
    let deltas = scan_grid(run, &opts)?;
    let g = gamma_table(n, eta_c, &deltas)?;
    run.out.csv("gamma_scan.csv", &g.table)?;
    run.results.insert(
        "derivative_fit".into(),
        json!({"a": g.scan.a, "b": g.scan.b, "r_squared": g.scan.r_squared, "b_stderr": g.scan.b_stderr, "b_analytic": g.scan.b_analytic}),
    );
    run.results.insert("max_gamma_fit_relative_error".into(), json!(g.fit_errors.iter().copied().fold(0.0, f64::max)));
    if let Some((cusp_n, cusp_points)) = cusp {
        let cn = pick_usize(cusp_n, &run.cfg, "cusp_n", 256, &mut run.inputs)?;
        let cp = pick_usize(cusp_points, &run.cfg, "cusp_points", 21, &mut run.inputs)?;
        let grid = cusp_grid(*deltas.last().unwrap_or(&1e-2), cp);
        let c = gamma_cusp(cn, eta_c, &grid)?;
        run.out.csv("gamma_cusp.csv", &cusp_table(&c))?;
        run.grids.insert("cusp_delta".into(), json!(grid));
        run.results.insert(
            "cusp".into(),
            json!({"n_ions": cn, "left_slope": c.left.slope, "left_stderr": c.left.slope_stderr,
                   "right_slope": c.right.slope, "right_stderr": c.right.slope_stderr,
                   "slope_separation": c.slope_separation, "minimum_delta": c.minimum_delta}),
        );
    }
    Ok(())
}

pub(crate) struct AInfinityTable {
    pub table: Table,
    pub slope_fit: f64,
    pub slope_analytic: f64,
}

pub(crate) fn a_infinity_table(n: usize, eta_c: f64, deltas: &[f64]) -> Result<AInfinityTable, ChainError> {
    let reference = ChainParams::from_delta(n, CALIBRATION_DELTA, eta_c, 0.0)?;
    let analytic = a_infinity_analytic(&reference, CALIBRATION_DELTA)?;
    let mut table = Table::new(&["delta", "a_infinity", "a_infinity_analytic"]);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for d in deltas {
        let a = a_infinity_linear(&ChainParams::from_delta(n, *d, eta_c, 0.0)?)?;
        table.push(vec![(*d).into(), a.into(), analytic.eval(*d).into()]);
        x.push(d.ln());
        y.push(a);
    }
    let fit = linear_fit(&x, &y)?;
    Ok(AInfinityTable { table, slope_fit: -fit.slope, slope_analytic: analytic.slope })
}

pub(crate) fn asymptotics(run: &mut Run, chain: &ChainInputs, opts: ScanOptions) -> CliResult {
    let (n, eta_c) = scan_chain(run, chain)?;
    let deltas = scan_grid(run, &opts)?;
    let scan = gamma_derivative_scan(n, eta_c, &deltas)?;
    let reference = ChainParams::from_delta(n, CALIBRATION_DELTA, eta_c, 0.0)?;
    let analytic = a_infinity_analytic(&reference, CALIBRATION_DELTA)?;
    let mut table = Table::new(&[
        "delta",
        "gamma",
        "dgamma_ddelta",
        "a_infinity",
        "a_infinity_analytic",
        "t_star",
        "v_max",
        "k_star",
    ]);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (d, g_prime) in deltas.iter().zip(&scan.derivatives) {
        let p = ChainParams::from_delta(n, *d, eta_c, 0.0)?;
        let a = a_infinity_linear(&p)?;
        let r: RevivalTime<f64> = revival_time(n, p.nu_t)?;
        table.push(vec![
            (*d).into(),
            gamma_linear(&p)?.into(),
            (*g_prime).into(),
            a.into(),
            analytic.eval(*d).into(),
            r.t_star.into(),
            r.v_max.into(),
            r.k_star.into(),
        ]);
        x.push(d.ln());
        y.push(a);
    }
    run.out.csv("asymptotics.csv", &table)?;
    let fit = linear_fit(&x, &y)?;
    run.results.insert(
        "a_infinity_fit".into(),
        json!({"slope": -fit.slope, "slope_analytic": analytic.slope, "constant": analytic.constant, "delta_ref": CALIBRATION_DELTA}),
    );
    run.results.insert(
        "derivative_fit".into(),
        json!({"a": scan.a, "b": scan.b, "r_squared": scan.r_squared, "b_analytic": scan.b_analytic}),
    );
    Ok(())
}

pub(crate) struct Longtime {
    pub revival: RevivalTime<f64>,
    pub times: Vec<f64>,
    pub exact: Vec<f64>,
    pub approx: Vec<f64>,
    pub approx_flipped: Vec<f64>,
    pub b_exact: Vec<f64>,
    pub b_approx: Vec<f64>,
    pub rolling: Vec<f64>,
    pub detection: Option<RevivalDetection<f64>>,
    /// Mean |exact − approx| over `[3/δ, 0.8 t*]`.
    pub mad: f64,
    pub mad_flipped: f64,
}

pub(crate) fn longtime_run(p: &ChainParams<f64>, t_max: Option<f64>, dt: f64) -> Result<Longtime, ChainError> {
    let revival: RevivalTime<f64> = revival_time(p.n_ions, p.nu_t)?;
    let t_max = t_max.unwrap_or(1.3 * revival.t_star);
    let steps = (t_max / dt).round() as usize;
    if steps < 2 {
        return Err(ChainError::invalid("long-time grid needs t_max > 2 dt"));
    }
    let times: Vec<f64> = (1..=steps).map(|i| i as f64 * dt).collect();
    let amps = linear_amplitudes(p)?;
    let trace = amps.trace(times.clone(), 0.0, false)?;
    let reference = ChainParams::from_delta(p.n_ions, CALIBRATION_DELTA, p.eta_c, 0.0)?;
    let analytic = a_infinity_analytic(&reference, CALIBRATION_DELTA)?;
    let a_tilde = analytic.eval(p.delta());
    let mut approx = Vec::with_capacity(steps);
    let mut approx_flipped = Vec::with_capacity(steps);
    let mut b_exact = Vec::with_capacity(steps);
    let mut b_approx = Vec::with_capacity(steps);
    for &t in &times {
        let b = b_analytic(t, p)?;
        approx.push(approximate_visibility(t, p, &analytic)?);
        approx_flipped.push((-a_tilde - b).exp());
        b_approx.push(b);
        b_exact.push(b_of_t(t, &amps));
    }
    let detector = RevivalDetector::default();
    let rolling = detector.rolling_amplitude(&times, &trace.visibility)?;
    let detection = detector.detect(&times, &trace.visibility, revival.t_star)?;
    let delta = p.gap().delta()?;
    let (lo, hi) = (3.0 / delta, 0.8 * revival.t_star);
    let mad_of = |approx: &[f64]| {
        let (sum, count) = times
            .iter()
            .zip(&trace.visibility)
            .zip(approx)
            .filter(|((t, _), _)| **t >= lo && **t <= hi)
            .fold((0.0, 0usize), |(s, c), ((_, v), a)| (s + (v - a).abs(), c + 1));
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    };
    let mad = mad_of(&approx);
    let mad_flipped = mad_of(&approx_flipped);
    Ok(Longtime {
        revival,
        times,
        exact: trace.visibility,
        approx,
        approx_flipped,
        b_exact,
        b_approx,
        rolling,
        detection,
        mad,
        mad_flipped,
    })
}

pub(crate) fn longtime(run: &mut Run, chain: &ChainInputs, t_max: Option<f64>, dt: Option<f64>) -> CliResult {
    let defaults = ChainDefaults { n_ions: 1000, delta: 1e-3, eta_c: 0.25 };
    let p = resolve_chain(chain, &run.cfg, defaults, &mut run.inputs)?;
    run.params = json!(p);
    let t_max = match t_max {
        Some(v) => Some(v),
        None => run.cfg.f64("t_max")?,
    };
    let dt = pick_f64(dt, &run.cfg, "dt", 0.1, &mut run.inputs)?;
    let lt = longtime_run(&p, t_max, dt)?;
    run.inputs.insert("t_max".into(), json!(lt.times.last()));
    let mut table =
        Table::new(&["t", "v_exact", "v_approx", "v_approx_flipped", "b", "b_analytic", "rolling_amplitude"]);
    for i in 0..lt.times.len() {
        table.push(vec![
            lt.times[i].into(),
            lt.exact[i].into(),
            lt.approx[i].into(),
            lt.approx_flipped[i].into(),
            lt.b_exact[i].into(),
            lt.b_approx[i].into(),
            lt.rolling[i].into(),
        ]);
    }
    run.out.csv("longtime.csv", &table)?;
    run.grids.insert("time".into(), json!({"dt": dt, "t_max": lt.times.last()}));
    insert_longtime_results(run, &lt);
    Ok(())
}

pub(crate) fn insert_longtime_results(run: &mut Run, lt: &Longtime) {
    run.results.insert("t_star".into(), json!(lt.revival.t_star));
    run.results.insert("v_max".into(), json!(lt.revival.v_max));
    run.results.insert("k_star".into(), json!(lt.revival.k_star));
    run.results.insert("revival_detector".into(), json!(RevivalDetector::default()));
    run.results.insert("revival".into(), json!(lt.detection));
    run.results.insert("mean_abs_deviation".into(), json!(lt.mad));
    run.results.insert("mean_abs_deviation_flipped".into(), json!(lt.mad_flipped));
}
