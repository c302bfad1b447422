use std::fmt;

use sram6t::calibration::{self, CalibrationError, Targets};
use sram6t::cell::relative_area;
use sram6t::config::RunConfig;
use sram6t::dc::{self, Vtc};
use sram6t::report::{Cell, Table};
use sram6t::transient::{self, Collection, TransientConfig};
use sram6t::variability::{monte_carlo, McConfig, Metric, PelgromModel};
use sram6t::{
    power, ser, BiasCondition, CellDesign, CellState, ConfigError, Node, SizingError, SolverError, TransientError,
};

/// Why a command stopped, mapped onto the process exit status.
#[derive(Debug)]
pub enum Failure {
    Io(String),
    Config(String),
    Solver(String),
    Functional(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Functional(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) => write!(f, "output: {m}"),
            Failure::Config(m) => write!(f, "config: {m}"),
            Failure::Solver(m) => write!(f, "solver: {m}"),
            Failure::Functional(m) => write!(f, "functional failure: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SizingError> for Failure {
    fn from(e: SizingError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        Failure::Solver(e.to_string())
    }
}

impl From<TransientError> for Failure {
    fn from(e: TransientError) -> Self {
        match e {
            TransientError::ReadTimeout { .. } | TransientError::WriteFailure { .. } => {
                Failure::Functional(e.to_string())
            }
            TransientError::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

impl From<CalibrationError> for Failure {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::Sizing(e) => e.into(),
            CalibrationError::Transient(e) => e.into(),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn write(cfg: &RunConfig, name: &str, table: &Table) -> Result<(), Failure> {
    let path = cfg.output.dir.join(name);
    table
        .write(&path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Functional problems seen while producing a report. They are collected
/// so that every output still gets written before the command fails.
#[derive(Default)]
struct Problems(Vec<String>);

impl Problems {
    /// Keep the value of a timing run, recording a functional failure as NaN.
    fn timing(&mut self, what: &str, r: Result<f64, TransientError>) -> Result<f64, Failure> {
        match r {
            Ok(x) => Ok(x),
            Err(e) => match Failure::from(e) {
                Failure::Functional(m) => {
                    self.0.push(format!("{what}: {m}"));
                    Ok(f64::NAN)
                }
                other => Err(other),
            },
        }
    }

    fn check(&mut self, label: &str, r: &dc::StabilityReport) {
        if r.read_unstable {
            self.0.push(format!("{label}: read access flips the cell"));
        }
        if r.write_failure {
            self.0.push(format!("{label}: write fails at full word-line"));
        }
    }

    fn finish(self) -> Result<(), Failure> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Failure::Functional(self.0.join("; ")))
        }
    }
}

fn transient_config(cfg: &RunConfig) -> TransientConfig {
    cfg.transient.config()
}

struct Timing {
    read: f64,
    read_assist: f64,
    write: f64,
    energy: f64,
    q_crit: f64,
}

fn timing(cfg: &RunConfig, d: &CellDesign, label: &str, p: &mut Problems) -> Result<Timing, Failure> {
    let tc = transient_config(cfg);
    let tr = &cfg.transient;
    let vdd = cfg.technology.vdd;
    Ok(Timing {
        read: p.timing(
            &format!("{label} read"),
            transient::read_delay(d, vdd, tr.sense_dv_v, &tc),
        )?,
        read_assist: p.timing(
            &format!("{label} assisted read"),
            transient::read_delay(d, cfg.sweep.assist_vwl_v, tr.sense_dv_v, &tc),
        )?,
        write: p.timing(&format!("{label} write"), transient::write_delay(d, &tc))?,
        energy: p.timing(&format!("{label} write energy"), transient::write_energy(d, &tc))?,
        q_crit: transient::critical_charge(d, Node::A, Collection::Electron, tr.tau_r_s, tr.tau_f_s, &tc)?,
    })
}

fn vtc_table(v: &Vtc, caption: String) -> Table {
    let mut t = Table::new(&["vin_V", "vout_V"]).comment(caption);
    for (x, y) in v.vin.iter().zip(&v.vout) {
        t.push(vec![(*x).into(), (*y).into()]);
    }
    t
}

fn cell_label(d: &CellDesign) -> String {
    format!("cr = {}, pr = {}", d.cr(), d.pr())
}

/// Waveform samples kept per written row.
const WAVEFORM_DECIMATION: usize = 10;
/// Simulated span of the read waveform dump, s.
const WAVEFORM_SPAN: f64 = 1e-9;

pub fn characterize(cfg: &RunConfig) -> Result<(), Failure> {
    let d = cfg.design()?;
    let t = &cfg.technology;
    let vdd = t.vdd;
    let mut problems = Problems::default();

    let r = dc::stability_report(&d, vdd)?;
    problems.check("cell", &r);
    let leak = power::leakage(&d, CellState::S1, vdd);
    let s = ser::ser(&d, &t.ser);
    let tm = timing(cfg, &d, "cell", &mut problems)?;

    let mut table = Table::new(&[
        "cr",
        "pr",
        "relative_area",
        "rsnm_V",
        "hold_snm_V",
        "wnm_V",
        "wlvm_V",
        "srrv_V",
        "v_trip_V",
        "v_read_V",
        "read_unstable",
        "write_failure",
        "i_s1_A",
        "i_s2_A",
        "i_s3_A",
        "supply_A",
        "bitline_A",
        "q_crit_e_fC",
        "q_crit_h_fC",
        "ser_au",
        "q_crit_sim_fC",
        "read_delay_s",
        "read_delay_assist_s",
        "write_delay_s",
        "write_energy_J",
    ])
    .comment(format!("characterize: {}", cell_label(&d)));
    table.push(vec![
        d.cr().into(),
        d.pr().into(),
        relative_area(&d)?.into(),
        r.rsnm.into(),
        r.hold_snm.into(),
        r.wnm.into(),
        r.wlvm.into(),
        r.srrv.into(),
        r.v_trip.into(),
        r.v_read.into(),
        r.read_unstable.into(),
        r.write_failure.into(),
        leak.i_s1.into(),
        leak.i_s2.into(),
        leak.i_s3.into(),
        leak.supply_total().into(),
        leak.bitline_total().into(),
        s.q_crit_e_fc.into(),
        s.q_crit_h_fc.into(),
        s.ser.into(),
        tm.q_crit.into(),
        tm.read.into(),
        tm.read_assist.into(),
        tm.write.into(),
        tm.energy.into(),
    ]);
    write(cfg, "characterize.csv", &table)?;

    for (mode, bias) in [
        ("hold", BiasCondition::hold(vdd)),
        ("read", BiasCondition::read(vdd, vdd)),
    ] {
        let bf = dc::butterfly(&d, &bias)?;
        let caption = |n: &str| {
            format!(
                "figure 4 analogue: {mode} transfer curve of inverter {n}, {}",
                cell_label(&d)
            )
        };
        write(cfg, &format!("vtc_{mode}_a.csv"), &vtc_table(&bf.inv_a, caption("A")))?;
        write(cfg, &format!("vtc_{mode}_b.csv"), &vtc_table(&bf.inv_b, caption("B")))?;
    }

    let tc = transient_config(cfg);
    let run = TransientConfig {
        stop: WAVEFORM_SPAN,
        ..tc
    };
    let w = transient::simulate(&d, CellState::S1, &transient::read_stimulus(&d, vdd, &tc), &run)?;
    let mut wave = Table::new(&["t_s", "v_a_V", "v_b_V", "v_bl_a_V", "v_bl_b_V", "i_vdd_A"]).comment(format!(
        "figure 6: node voltages during a read access, {}",
        cell_label(&d)
    ));
    for i in (0..w.len()).step_by(WAVEFORM_DECIMATION) {
        wave.push(vec![
            w.t[i].into(),
            w.v_a[i].into(),
            w.v_b[i].into(),
            w.v_bl_a[i].into(),
            w.v_bl_b[i].into(),
            w.i_vdd[i].into(),
        ]);
    }
    write(cfg, "read_waveform.csv", &wave)?;

    problems.finish()
}

pub fn sweep_cr(cfg: &RunConfig) -> Result<(), Failure> {
    let t = &cfg.technology;
    let vdd = t.vdd;
    let pr = 1.0;
    let mut problems = Problems::default();
    let ser_ref = ser::ser(&cfg.design_at(1.0, pr)?, &t.ser).ser;

    let mut area = Table::new(&["cr", "pr", "relative_area"]).comment("figure 3: relative cell area vs. CR (PR = 1)");
    let mut write_margins =
        Table::new(&["cr", "pr", "wnm_V", "wlvm_V"]).comment("figure 5: WNM and WLVM vs. CR (PR = 1)");
    let mut read_margins = Table::new(&["cr", "pr", "rsnm_V", "hold_snm_V", "srrv_V", "v_read_V", "v_trip_V"])
        .comment("figure 7: RSNM vs. CR (PR = 1)");
    let mut soft = Table::new(&["cr", "pr", "q_crit_e_fC", "q_crit_h_fC", "ser_norm", "q_crit_sim_fC"])
        .comment("figure 9: SER and critical charge vs. CR (PR = 1); SER normalized to CR = 1");
    let mut pwr = Table::new(&[
        "cr",
        "pr",
        "i_s1_A",
        "i_s2_A",
        "i_s3_A",
        "supply_A",
        "bitline_A",
        "write_energy_J",
    ])
    .comment("figure 10: hold leakage in state S1 and write energy vs. CR (PR = 1)");
    let mut tim = Table::new(&["cr", "pr", "read_delay_s", "read_delay_assist_s", "write_delay_s"])
        .comment("figure 11: intrinsic read and write delay vs. CR (PR = 1)")
        .comment(format!("assisted read at word-line level {} V", cfg.sweep.assist_vwl_v));

    for &cr in &cfg.sweep.cr_grid {
        let d = cfg.design_at(cr, pr)?;
        let label = format!("cr = {cr}");
        let r = dc::stability_report(&d, vdd)?;
        problems.check(&label, &r);
        let leak = power::leakage(&d, CellState::S1, vdd);
        let s = ser::ser(&d, &t.ser);
        let tm = if cfg.sweep.timing {
            Some(timing(cfg, &d, &label, &mut problems)?)
        } else {
            None
        };
        let opt = |f: fn(&Timing) -> f64| -> Cell { tm.as_ref().map_or(f64::NAN, f).into() };

        area.push(vec![cr.into(), pr.into(), relative_area(&d)?.into()]);
        write_margins.push(vec![cr.into(), pr.into(), r.wnm.into(), r.wlvm.into()]);
        read_margins.push(vec![
            cr.into(),
            pr.into(),
            r.rsnm.into(),
            r.hold_snm.into(),
            r.srrv.into(),
            r.v_read.into(),
            r.v_trip.into(),
        ]);
        soft.push(vec![
            cr.into(),
            pr.into(),
            s.q_crit_e_fc.into(),
            s.q_crit_h_fc.into(),
            (s.ser / ser_ref).into(),
            opt(|t| t.q_crit),
        ]);
        pwr.push(vec![
            cr.into(),
            pr.into(),
            leak.i_s1.into(),
            leak.i_s2.into(),
            leak.i_s3.into(),
            leak.supply_total().into(),
            leak.bitline_total().into(),
            opt(|t| t.energy),
        ]);
        tim.push(vec![
            cr.into(),
            pr.into(),
            opt(|t| t.read),
            opt(|t| t.read_assist),
            opt(|t| t.write),
        ]);
    }

    write(cfg, "fig3_area.csv", &area)?;
    write(cfg, "fig5_write_margins.csv", &write_margins)?;
    write(cfg, "fig7_read_margins.csv", &read_margins)?;
    write(cfg, "fig9_ser.csv", &soft)?;
    write(cfg, "fig10_power.csv", &pwr)?;
    write(cfg, "fig11_timing.csv", &tim)?;
    problems.finish()
}

/// Word-line level at which a decreasing sampled curve crosses `level`, by
/// linear interpolation.
fn falling_crossing(x: &[f64], y: &[f64], level: f64) -> Option<f64> {
    (1..x.len()).find_map(|k| {
        let (y0, y1) = (y[k - 1], y[k]);
        (y0 >= level && y1 < level).then(|| x[k - 1] + (x[k] - x[k - 1]) * (y0 - level) / (y0 - y1))
    })
}

pub fn sweep_vwl(cfg: &RunConfig) -> Result<(), Failure> {
    let vdd = cfg.technology.vdd;
    let d = cfg.design()?;
    let reference = cfg.design_at(cfg.sweep.reference_cr, cfg.cell.pr)?;
    let rsnm_ref = dc::rsnm(&reference, &BiasCondition::read(vdd, vdd))?.value;

    let grid = &cfg.sweep.vwl_grid;
    let mut rsnm = Vec::with_capacity(grid.len());
    let mut srrv = Vec::with_capacity(grid.len());
    for &vwl in grid {
        rsnm.push(dc::rsnm(&d, &BiasCondition::read(vdd, vwl))?.value);
        srrv.push(dc::srrv(&d, vdd, vwl)?.value);
    }
    let matched = match falling_crossing(grid, &rsnm, rsnm_ref) {
        Some(v) => format!("{} V", sram6t::report::fmt_float(v)),
        None => "not reached on this grid".to_string(),
    };

    let mut table = Table::new(&["vwl_V", "rsnm_V", "rsnm_ref_V", "srrv_V"])
        .comment(format!(
            "figure 8: RSNM vs. word-line voltage, {}; the 0 V point is the hold SNM",
            cell_label(&d)
        ))
        .comment(format!(
            "reference: RSNM of cr = {} at full word-line; matched at {matched}",
            cfg.sweep.reference_cr
        ));
    for (k, &vwl) in grid.iter().enumerate() {
        table.push(vec![vwl.into(), rsnm[k].into(), rsnm_ref.into(), srrv[k].into()]);
    }
    write(cfg, "fig8_rsnm_vwl.csv", &table)
}

fn figure_of(metric: Metric) -> Option<&'static str> {
    match metric {
        Metric::Wlvm => Some("figure 12 analogue: WLVM histogram"),
        Metric::Srrv => Some("figure 13 analogue: SRRV histogram"),
        _ => None,
    }
}

pub fn montecarlo(cfg: &RunConfig) -> Result<(), Failure> {
    let mc = &cfg.montecarlo;
    let seed = mc
        .seed
        .ok_or_else(|| Failure::Config("montecarlo.seed: no seed given; set it in the config or pass --seed".into()))?;
    let d = cfg.design()?;
    let model = PelgromModel::new(cfg.technology.a_vt_mv_um);
    let run = McConfig {
        trials: mc.trials,
        seed,
        threads: mc.threads,
        bins: mc.bins,
    };
    let drop = mc.vcell_drop_fraction * cfg.technology.vdd;

    let mut summary = Table::new(&[
        "metric",
        "unit",
        "trials",
        "n",
        "censored",
        "mean",
        "std",
        "min",
        "max",
        "unreliable",
        "fail_prob",
        "fail_prob_vcell_drop",
    ])
    .comment(format!(
        "montecarlo: {}, a_vt = {} mV um, seed = {seed}, trials = {}",
        cell_label(&d),
        cfg.technology.a_vt_mv_um,
        mc.trials
    ))
    .comment(format!(
        "fail_prob = P(X < 0) under a Gaussian fit (margins only); fail_prob_vcell_drop uses threshold {} V",
        sram6t::report::fmt_float(drop)
    ));

    for &metric in &mc.metrics {
        let dist = monte_carlo(&d, &model, &run, metric);
        let unit = metric.unit();
        let (p0, p1) = if metric.is_margin() {
            (dist.fail_prob(0.0), dist.fail_prob(drop))
        } else {
            (f64::NAN, f64::NAN)
        };
        if dist.unreliable() {
            eprintln!(
                "warning: {}: {} of {} trials failed to evaluate; moments cover the rest",
                metric.name(),
                dist.censored.len(),
                dist.trials
            );
        }
        summary.push(vec![
            metric.name().into(),
            unit.into(),
            dist.trials.into(),
            dist.n().into(),
            dist.censored.len().into(),
            dist.mean.into(),
            dist.std.into(),
            dist.min.into(),
            dist.max.into(),
            dist.unreliable().into(),
            p0.into(),
            p1.into(),
        ]);

        let low = format!("bin_low_{unit}");
        let high = format!("bin_high_{unit}");
        let mut hist = Table::new(&[low.as_str(), high.as_str(), "count"]).comment(format!(
            "{} histogram over {} successful trials",
            metric.name(),
            dist.n()
        ));
        if let Some(fig) = figure_of(metric) {
            hist = hist.comment(fig);
        }
        let h = &dist.histogram;
        for (k, &c) in h.counts.iter().enumerate() {
            hist.push(vec![h.edges[k].into(), h.edges[k + 1].into(), c.into()]);
        }
        write(cfg, &format!("mc_{}_hist.csv", metric.name()), &hist)?;

        let value = format!("value_{unit}");
        let mut samples = Table::new(&["trial", value.as_str()])
            .comment(format!("{} per trial; failed evaluations are nan", metric.name()));
        let mut next = dist.samples.iter();
        let mut censored = dist.censored.iter().peekable();
        for i in 0..dist.trials {
            let v = if censored.peek() == Some(&&i) {
                censored.next();
                f64::NAN
            } else {
                *next.next().expect("one sample per successful trial")
            };
            samples.push(vec![i.into(), v.into()]);
        }
        write(cfg, &format!("mc_{}_samples.csv", metric.name()), &samples)?;
    }
    write(cfg, "mc_summary.csv", &summary)
}

pub fn calibrate(cfg: &RunConfig) -> Result<(), Failure> {
    let targets = Targets::default();
    let r = calibration::calibrate(&cfg.technology, &targets)?;
    let mut table =
        Table::new(&["quantity", "target", "achieved", "unit"]).comment("calibration anchors and the values reached");
    let rows: [(&str, f64, f64, &str); 7] = [
        ("pmos_leak_ratio", targets.pmos_leak_ratio, r.pmos_leak_ratio, "1"),
        ("rsnm_ratio", targets.rsnm_ratio, r.rsnm_ratio, "1"),
        ("write_delay_cr2", targets.write_delay, r.write_delay_cr2, "s"),
        ("write_ratio", targets.write_ratio, r.write_ratio, "1"),
        ("read_delay_cr2", targets.read_delay, r.read_delay_cr2, "s"),
        ("sigma_vtrip", targets.sigma_vtrip, r.sigma_vtrip, "V"),
        ("nmos_on_current", f64::NAN, r.nmos_on_current, "A"),
    ];
    for (q, t, a, u) in rows {
        table.push(vec![q.into(), t.into(), a.into(), u.into()]);
    }
    write(cfg, "calibration.csv", &table)?;

    let defaults = RunConfig {
        technology: r.technology,
        ..RunConfig::default()
    };
    let path = cfg.output.dir.join("default.toml");
    let text = format!(
        "# Calibrated defaults written by `sram6t calibrate`.\n\n{}",
        defaults.to_toml()
    );
    std::fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}
