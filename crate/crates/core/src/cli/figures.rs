//! Canned parameter sets reproducing the reference figures, with pass/fail proxies.

use serde_json::json;

use super::commands::{
    a_infinity_table, cusp_grid, cusp_table, fourier_run, gamma_fits, gamma_table, insert_longtime_results,
    longtime_run, peaks_table, spectrum_table, worst_peak_offset, FourierRun, FIGURE_CHAIN,
};
use super::output::Table;
use super::{CliError, Run};
use crate::asymptotics::{gamma_cusp, gamma_linear, log_grid, MAX_FIT_WINDOW};
use crate::error::ChainError;
use crate::model::ChainParams;
use crate::ramsey::{linear_amplitudes, linear_grid};
use crate::spectral::{bins_to_nearest, spectral_band_check, DEFAULT_BUDGET, DEFAULT_SAMPLES, DEFAULT_WINDOW};

const PROMINENCE: f64 = 0.1;
const SCAN_N: usize = 1000;
const SCAN_ETA_C: f64 = 0.05;
const CUSP_N: usize = 256;
const CUSP_POINTS: usize = 21;

pub(crate) fn figures(run: &mut Run, which: &str) -> Result<(), CliError> {
    let list: Vec<u32> = match which {
        "all" => (2..=7).collect(),
        s => match s.parse::<u32>() {
            Ok(n) if (2..=7).contains(&n) => vec![n],
            _ => return Err(CliError::Usage(format!("--which expects 2..7 or `all`, got `{s}`"))),
        },
    };
    run.inputs.insert("which".into(), json!(which));
    let mut fig2: Option<FourierRun> = None;
    for n in list {
        match n {
            2 => fig2 = Some(figure2(run)?),
            3 => {
                let base = match fig2.take() {
                    Some(r) => r,
                    None => fig2_run()?,
                };
                figure3(run, &base)?;
            }
            4 => figure4(run)?,
            5 => figure5(run)?,
            6 => figure6(run)?,
            _ => figure7(run)?,
        }
    }
    Ok(())
}

fn fig2_params() -> Result<ChainParams<f64>, ChainError> {
    ChainParams::from_delta(FIGURE_CHAIN.n_ions, FIGURE_CHAIN.delta, FIGURE_CHAIN.eta_c, 0.0)
}

fn fig2_run() -> Result<FourierRun, ChainError> {
    fourier_run(&fig2_params()?, DEFAULT_WINDOW, DEFAULT_SAMPLES, PROMINENCE, DEFAULT_BUDGET)
}

fn visibility_table(r: &FourierRun) -> Table {
    let mut t = Table::new(&["t", "V"]);
    for (time, v) in r.trace.times.iter().zip(&r.trace.visibility) {
        t.push(vec![(*time).into(), (*v).into()]);
    }
    t
}

fn figure2(run: &mut Run) -> Result<FourierRun, CliError> {
    let p = fig2_params()?;
    let r = fig2_run()?;
    run.out.csv("fig2_visibility.csv", &visibility_table(&r))?;
    run.out.csv("fig2_fourier.csv", &spectrum_table(&r.spectrum))?;
    run.out.csv("fig2_peaks.csv", &peaks_table(&r))?;
    let gap = p.gap();
    let caption = spectral_band_check(&r.spectrum, gap.band_floor_overlay()?, p.nu_t)?;
    let gap_band = spectral_band_check(&r.spectrum, gap.delta()?, p.nu_t)?;
    run.results.insert(
        "fig2".into(),
        json!({"params": p, "bin_width": r.spectrum.bin_width, "peaks": r.peaks.len(),
               "band_fraction": caption.fraction, "gap_band_fraction": gap_band.fraction,
               "mean_visibility": r.trace.mean_visibility()}),
    );
    run.proxy("fig2 band fraction", caption.fraction, ">= 0.95", caption.fraction >= 0.95);
    let offset = worst_peak_offset(&r);
    run.proxy("fig2 peak offset (bins)", offset, "<= 1", !r.peaks.is_empty() && offset <= 1.0);
    Ok(r)
}

fn figure3(run: &mut Run, fig2: &FourierRun) -> Result<(), CliError> {
    let p = ChainParams::from_delta(FIGURE_CHAIN.n_ions, 1e-4, FIGURE_CHAIN.eta_c, 0.0)?;
    let r = fourier_run(&p, DEFAULT_WINDOW, DEFAULT_SAMPLES, PROMINENCE, DEFAULT_BUDGET)?;
    run.out.csv("fig3_visibility.csv", &visibility_table(&r))?;
    run.out.csv("fig3_fourier.csv", &spectrum_table(&r.spectrum))?;
    run.out.csv("fig3_peaks.csv", &peaks_table(&r))?;
    // ω_y(π) is the lowest transverse frequency
    let soft = r.mode_frequencies.iter().copied().fold(f64::INFINITY, f64::min);
    let offset = r.peaks.first().map_or(f64::INFINITY, |pk| bins_to_nearest(pk.omega, &[soft], r.spectrum.bin_width));
    let (mean3, mean2) = (r.trace.mean_visibility(), fig2.trace.mean_visibility());
    run.results.insert(
        "fig3".into(),
        json!({"params": p, "soft_mode": soft, "largest_peak": r.peaks.first().map(|pk| pk.omega),
               "mean_visibility": mean3, "fig2_mean_visibility": mean2}),
    );
    run.proxy("fig3 largest peak to soft mode (bins)", offset, "<= 1", offset <= 1.0);
    run.proxy("fig3 mean visibility minus fig2", mean3 - mean2, "< 0", mean3 < mean2);
    Ok(())
}

fn figure4(run: &mut Run) -> Result<(), CliError> {
    let deltas = [1e-4, 1e-3, 1e-2];
    let mut t = Table::new(&["delta", "t", "A", "gamma_t2"]);
    for delta in deltas {
        let p = ChainParams::from_delta(SCAN_N, delta, SCAN_ETA_C, 0.0)?;
        let amps = linear_amplitudes(&p)?;
        let gamma = gamma_linear(&p)?;
        for time in linear_grid(0.0, MAX_FIT_WINDOW / p.nu_t, 200)? {
            t.push(vec![delta.into(), time.into(), amps.exponent_a(time).into(), (gamma * time * time).into()]);
        }
    }
    run.out.csv("fig4_short_time.csv", &t)?;
    let fits = gamma_fits(SCAN_N, SCAN_ETA_C, &deltas)?;
    let mut g = Table::new(&["delta", "gamma", "gamma_fit"]);
    for (d, (gamma, fit)) in deltas.iter().zip(&fits) {
        g.push(vec![(*d).into(), (*gamma).into(), (*fit).into()]);
    }
    run.out.csv("fig4_gamma.csv", &g)?;
    let worst = fits.iter().map(|(g, f)| (f - g).abs() / g).fold(0.0, f64::max);
    run.proxy("fig4 max |gamma_fit/gamma - 1|", worst, "< 0.01", worst < 0.01);
    Ok(())
}

fn figure5(run: &mut Run) -> Result<(), CliError> {
    let deltas = log_grid(1e-4, 1e-2, 9)?;
    let g = gamma_table(SCAN_N, SCAN_ETA_C, &deltas)?;
    run.out.csv("fig5_gamma.csv", &g.table)?;
    let cusp = gamma_cusp(CUSP_N, SCAN_ETA_C, &cusp_grid(1e-2, CUSP_POINTS))?;
    run.out.csv("fig5_cusp.csv", &cusp_table(&cusp))?;
    run.results.insert(
        "fig5".into(),
        json!({"a": g.scan.a, "b": g.scan.b, "b_analytic": g.scan.b_analytic, "r_squared": g.scan.r_squared,
               "left_slope": cusp.left.slope, "right_slope": cusp.right.slope,
               "slope_separation": cusp.slope_separation, "minimum_delta": cusp.minimum_delta}),
    );
    run.proxy("fig5 derivative log-fit R^2", g.scan.r_squared, "> 0.99", g.scan.r_squared > 0.99);
    run.proxy("fig5 cusp slope separation (sigma)", cusp.slope_separation, "> 3", cusp.slope_separation > 3.0);
    run.proxy("fig5 minimum location", cusp.minimum_delta, "== 0", cusp.minimum_delta == 0.0);
    Ok(())
}

fn figure6(run: &mut Run) -> Result<(), CliError> {
    let p = ChainParams::from_delta(1000, 1e-3, 0.25, 0.0)?;
    let lt = longtime_run(&p, None, 0.1)?;
    let mut t = Table::new(&["t", "v_exact", "v_approx", "v_approx_flipped", "t_star"]);
    for i in 0..lt.times.len() {
        t.push(vec![
            lt.times[i].into(),
            lt.exact[i].into(),
            lt.approx[i].into(),
            lt.approx_flipped[i].into(),
            lt.revival.t_star.into(),
        ]);
    }
    run.out.csv("fig6_longtime.csv", &t)?;
    insert_longtime_results(run, &lt);
    let r = lt.revival;
    let rel = |x: f64, target: f64| (x - target).abs() / target;
    run.proxy("fig6 v_max relative error", rel(r.v_max, 0.81), "< 0.01", rel(r.v_max, 0.81) < 0.01);
    run.proxy("fig6 k_star relative error", rel(r.k_star, 2.64), "< 0.02", rel(r.k_star, 2.64) < 0.02);
    run.proxy("fig6 t_star relative error", rel(r.t_star, 1229.0), "< 0.02", rel(r.t_star, 1229.0) < 0.02);
    let fired = lt.detection.map_or(f64::INFINITY, |d| rel(d.time, r.t_star));
    run.proxy("fig6 revival detection offset", fired, "<= 0.1", fired <= 0.1);
    run.proxy("fig6 mean |V - V_approx|", lt.mad, "< 0.05", lt.mad < 0.05);
    run.proxy("fig6 mean |V - V_approx_flipped|", lt.mad_flipped, "< 0.05", lt.mad_flipped < 0.05);
    Ok(())
}

fn figure7(run: &mut Run) -> Result<(), CliError> {
    let deltas = log_grid(1e-4, 1e-2, 9)?;
    let a = a_infinity_table(SCAN_N, SCAN_ETA_C, &deltas)?;
    run.out.csv("fig7_a_infinity.csv", &a.table)?;
    let rel = (a.slope_fit - a.slope_analytic).abs() / a.slope_analytic;
    run.results.insert("fig7".into(), json!({"slope_fit": a.slope_fit, "slope_analytic": a.slope_analytic}));
    run.proxy("fig7 slope relative error", rel, "< 0.1", rel < 0.1);
    Ok(())
}
