//! Scenario files, runs, batches and their on-disk outputs.
//!
//! A scenario is read from JSON or TOML and always re-serialized as JSON.
//! Every random ingredient derives from an explicit SplitMix64 seed, and
//! the CSV output is formatted with `{:.16e}` (17 significant digits,
//! `.` separator, `\n` line endings) so that reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{MaterialParams, ModelKind};
use crate::error::{Error, Result};
use crate::integrate::{
    duhamel_oldroyd_b, grid_steps, integrate_eulerian, integrate_lagrangian, riccati_trajectory,
    Status, Trajectory,
};
use crate::kinematics::{frame_change, MotionProtocol};
use crate::mat3::{Mat3, SymMat3};
use crate::random::{random_psd, SplitMix};
use crate::thermo::{audit, NegativityTracker, ThermoReport};

/// Environment variable overriding [`Scenario::seed`].
pub const SEED_ENV: &str = "RHEO_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Used as the output file stem; `[A-Za-z0-9_.-]+`.
    pub name: String,
    pub model: ModelKind,
    pub params: MaterialParams,
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub integrator: IntegratorKind,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<String>,
    /// Seed of every random ingredient not carrying its own seed.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolSpec {
    PlanarExtension {
        rate: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame: Option<FrameSpec>,
    },
    SimpleShear {
        rate: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame: Option<FrameSpec>,
    },
    /// `h(t) = cos(ωt) m`. Without `m`, `m` is the traceless part of nine
    /// seeded uniform draws in `[-1, 1)` (row-major).
    Oscillatory {
        omega: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<[f64; 9]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame: Option<FrameSpec>,
    },
    /// Constant deformation `F` (row-major), `det F = 1`.
    Constant {
        f: [f64; 9],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frame: Option<FrameSpec>,
    },
}

/// Superposed rigid rotation about `axis` at angular `speed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub axis: [f64; 3],
    pub speed: f64,
}

/// Initial internal variable: `Ξ₀` for the Lagrangian and closed-form
/// integrators, `ξ₀` for `rk4_eulerian`. `values` are
/// `(11, 22, 33, 12, 13, 23)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    #[default]
    Zero,
    Identity,
    RandomPsd(u64),
    Values([f64; 6]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    Rk4Lagrangian,
    Rk4Eulerian,
    Duhamel,
    Riccati,
}

const SCALAR_COLUMNS: [&str; 9] = [
    "t",
    "d_int",
    "d_int_euler",
    "d_int_scale",
    "tr_xi_over_2lambda1",
    "xi_dot_d",
    "min_eig_sigma_p",
    "psd_flag",
    "lower_bound_margin",
];
const F_COLUMNS: [&str; 9] = [
    "F11", "F12", "F13", "F21", "F22", "F23", "F31", "F32", "F33",
];
const XI_COLUMNS: [&str; 6] = ["xi11", "xi22", "xi33", "xi12", "xi13", "xi23"];

fn default_outputs() -> Vec<String> {
    [
        "t",
        "d_int",
        "tr_xi_over_2lambda1",
        "xi_dot_d",
        "min_eig_sigma_p",
        "psd_flag",
        "lower_bound_margin",
        "F",
        "xi",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Every accepted column name, in canonical order. `F` and `xi` in a
/// scenario's `outputs` expand to their nine and six entries.
pub fn available_columns() -> Vec<&'static str> {
    SCALAR_COLUMNS
        .iter()
        .chain(F_COLUMNS.iter())
        .chain(XI_COLUMNS.iter())
        .copied()
        .collect()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses by extension (`.json`, `.toml`); anything else is tried as
    /// JSON and then TOML.
    pub fn load(path: &Path) -> Result<Self> {
        parse_by_extension(path, &std::fs::read_to_string(path)?)
    }

    /// Canonical serialization.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario is serializable")
    }

    /// Replaces `seed` with `RHEO_SEED` when that variable is set.
    pub fn apply_seed_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::field(SEED_ENV, "must be an unsigned 64-bit integer"))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            return Err(Error::field(
                "name",
                "must be non-empty and use only [A-Za-z0-9_.-]",
            ));
        }
        self.model.validate()?;
        self.params.validate()?;
        if !self.t0.is_finite() {
            return Err(Error::field("t0", "must be finite"));
        }
        grid_steps(self.t0, self.t_end, self.dt)?;
        self.protocol()?;
        self.initial_value()?;
        self.columns()?;
        match self.integrator {
            IntegratorKind::Duhamel if self.model != ModelKind::OldroydB => Err(Error::field(
                "integrator",
                "duhamel is only available for oldroyd_b",
            )),
            IntegratorKind::Riccati => {
                if self.model != (ModelKind::NonlinearOldroydB { k: 1 }) {
                    return Err(Error::field(
                        "integrator",
                        "riccati needs model nonlinear_oldroyd_b with k = 1",
                    ));
                }
                let constant = matches!(self.protocol, ProtocolSpec::Constant { frame: None, .. });
                if self.params.eta_p != 0.0 && !constant {
                    return Err(Error::field(
                        "integrator",
                        "riccati needs params.eta_p = 0 or a constant protocol",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The motion described by `protocol`, started at `t0`.
    pub fn protocol(&self) -> Result<MotionProtocol> {
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::field(format!("protocol.{field}"), "must be finite"))
            }
        };
        let (base, frame) = match &self.protocol {
            ProtocolSpec::PlanarExtension { rate, frame } => (
                MotionProtocol::planar_extension(finite("rate", *rate)?),
                frame,
            ),
            ProtocolSpec::SimpleShear { rate, frame } => {
                (MotionProtocol::simple_shear(finite("rate", *rate)?), frame)
            }
            ProtocolSpec::Oscillatory { omega, m, frame } => {
                let m = match m {
                    Some(v) => Mat3::from_row_major(*v),
                    None => SplitMix::new(self.seed).traceless(),
                };
                (MotionProtocol::oscillatory(m, *omega)?, frame)
            }
            ProtocolSpec::Constant { f, frame } => {
                (MotionProtocol::constant(Mat3::from_row_major(*f))?, frame)
            }
        };
        let base = base.starting_at(self.t0);
        Ok(match frame {
            None => base,
            Some(fr) => {
                if !(fr.speed.is_finite() && fr.axis.iter().all(|a| a.is_finite())) {
                    return Err(Error::field("protocol.frame", "must be finite"));
                }
                frame_change(&base, fr.axis, fr.speed)
            }
        })
    }

    pub fn initial_value(&self) -> Result<SymMat3> {
        let v = match &self.initial {
            InitialSpec::Zero => SymMat3::ZERO,
            InitialSpec::Identity => SymMat3::IDENTITY,
            InitialSpec::RandomPsd(seed) => random_psd(*seed),
            InitialSpec::Values(v) => SymMat3(*v),
        };
        if !v.is_finite() {
            return Err(Error::field("initial", "must be finite"));
        }
        Ok(v)
    }

    /// Expanded, validated output columns.
    pub fn columns(&self) -> Result<Vec<&'static str>> {
        let mut cols = Vec::new();
        for (i, name) in self.outputs.iter().enumerate() {
            match name.as_str() {
                "F" => cols.extend(F_COLUMNS),
                "xi" => cols.extend(XI_COLUMNS),
                other => match available_columns().into_iter().find(|c| *c == other) {
                    Some(c) => cols.push(c),
                    None => {
                        return Err(Error::field(
                            format!("outputs[{i}]"),
                            format!("unknown column `{other}`"),
                        ))
                    }
                },
            }
        }
        if cols.is_empty() {
            return Err(Error::field("outputs", "must name at least one column"));
        }
        Ok(cols)
    }

    pub fn integrate(&self) -> Result<Trajectory> {
        self.validate()?;
        let protocol = self.protocol()?;
        let x0 = self.initial_value()?;
        let (m, p) = (self.model, &self.params);
        match self.integrator {
            IntegratorKind::Rk4Lagrangian => {
                integrate_lagrangian(m, p, &protocol, x0, self.t_end, self.dt)
            }
            IntegratorKind::Rk4Eulerian => {
                integrate_eulerian(m, p, &protocol, x0, self.t_end, self.dt)
            }
            IntegratorKind::Duhamel => duhamel_oldroyd_b(m, p, &protocol, x0, self.t_end, self.dt),
            IntegratorKind::Riccati => riccati_trajectory(m, p, &protocol, x0, self.t_end, self.dt),
        }
    }
}

fn parse_by_extension<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    let json = || serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()));
    let toml = || toml::from_str(text).map_err(|e| Error::Parse(e.to_string()));
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => json(),
        Some("toml") => toml(),
        _ => json().or_else(|_| toml()),
    }
}

/// Fixed-key run summary; absent events are `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub model: ModelKind,
    pub integrator: IntegratorKind,
    pub seed: u64,
    /// `"complete"` or `"blown_up"`.
    pub status: String,
    pub samples: usize,
    pub first_negative_dissipation_time: Option<f64>,
    pub psd_exit_time: Option<f64>,
    pub blowup_time: Option<f64>,
    pub min_d_int: Option<f64>,
    pub min_eig_sigma_p: Option<f64>,
    /// Largest relative gap between the Lagrangian and Eulerian dissipation.
    pub max_description_gap: f64,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is serializable")
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub csv: String,
    pub summary: Summary,
    pub trajectory: Trajectory,
    pub report: ThermoReport,
}

pub fn run_scenario(s: &Scenario) -> Result<RunOutput> {
    let trajectory = s.integrate()?;
    let report = audit(&trajectory);
    let csv = render_csv(&s.columns()?, &trajectory, &report);
    let summary = Summary {
        name: s.name.clone(),
        model: s.model,
        integrator: s.integrator,
        seed: s.seed,
        status: match trajectory.status {
            Status::Complete => "complete".into(),
            Status::BlownUpAt(_) => "blown_up".into(),
        },
        samples: trajectory.len(),
        first_negative_dissipation_time: report.first_negative_dissipation_time,
        psd_exit_time: report.psd_exit_time,
        blowup_time: trajectory.blowup_time(),
        min_d_int: report.min_dissipation,
        min_eig_sigma_p: report.min_eig_sigma_p,
        max_description_gap: report.max_description_gap,
    };
    Ok(RunOutput {
        csv,
        summary,
        trajectory,
        report,
    })
}

fn render_csv(columns: &[&str], traj: &Trajectory, report: &ThermoReport) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for (s, a) in traj.samples.iter().zip(&report.samples) {
        for (j, col) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let v = match *col {
                "t" => a.t,
                "d_int" => a.dissipation_lagrangian,
                "d_int_euler" => a.dissipation_eulerian,
                "d_int_scale" => a.scale,
                "tr_xi_over_2lambda1" => a.tr_xi_over_2lambda1,
                "xi_dot_d" => a.xi_contract_d,
                "min_eig_sigma_p" => a.min_eig_sigma_p,
                "psd_flag" => {
                    out.push(if a.psd_flag { '1' } else { '0' });
                    continue;
                }
                "lower_bound_margin" => a.lower_bound_margin,
                c if c.starts_with('F') => {
                    let idx = F_COLUMNS
                        .iter()
                        .position(|x| *x == c)
                        .expect("known column");
                    s.kin.f.to_row_major()[idx]
                }
                c => {
                    let idx = XI_COLUMNS
                        .iter()
                        .position(|x| *x == c)
                        .expect("known column");
                    s.xi.0[idx]
                }
            };
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// One batch entry: either a summary or the error that stopped the
/// scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchEntry {
    pub name: String,
    pub summary: Option<Summary>,
    pub error: Option<String>,
    #[serde(skip)]
    pub csv: Option<String>,
}

/// Runs scenarios on `jobs` worker threads. Results come back in input
/// order and are identical for every `jobs`; a failing scenario does not
/// stop the others.
pub fn run_batch(scenarios: &[Scenario], jobs: usize) -> Vec<BatchEntry> {
    let run = |s: &Scenario| match run_scenario(s) {
        Ok(out) => BatchEntry {
            name: s.name.clone(),
            summary: Some(out.summary),
            error: None,
            csv: Some(out.csv),
        },
        Err(e) => BatchEntry {
            name: s.name.clone(),
            summary: None,
            error: Some(e.to_string()),
            csv: None,
        },
    };
    if jobs <= 1 {
        return scenarios.iter().map(run).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| scenarios.par_iter().map(run).collect()),
        Err(_) => scenarios.iter().map(run).collect(),
    }
}

/// Batch manifest: inline scenarios and/or scenario files relative to the
/// manifest's directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
    #[serde(default)]
    pub files: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Vec<Scenario>> {
        let m: Manifest = parse_by_extension(path, &std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let mut out = m.scenarios;
        for f in &m.files {
            out.push(Scenario::load(&dir.join(f))?);
        }
        Ok(out)
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory and an atomic rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    use std::io::Write;
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Companion gnuplot script for `<name>.csv`.
pub fn gnuplot_script(name: &str, columns: &[&str]) -> String {
    let col = |c: &str| columns.iter().position(|x| *x == c).map(|i| i + 1);
    let mut s = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nset grid\n\
         set terminal pngcairo size 900,600\nset output '{name}.png'\n"
    );
    let t = col("t").unwrap_or(1);
    let mut curves = Vec::new();
    for (c, style) in [
        ("d_int", "lw 2"),
        ("tr_xi_over_2lambda1", "dt 2"),
        ("xi_dot_d", "dt 3"),
        ("min_eig_sigma_p", "lw 1"),
    ] {
        if let Some(i) = col(c) {
            curves.push(format!("'{name}.csv' using {t}:{i} with lines {style}"));
        }
    }
    if curves.is_empty() {
        s.push_str("# no plottable columns\n");
    } else {
        let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    }
    s
}

/// Sign and PSD events recomputed from a CSV written by [`run_scenario`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvAudit {
    pub samples: usize,
    pub first_negative_dissipation_time: Option<f64>,
    pub psd_exit_time: Option<f64>,
    pub min_d_int: Option<f64>,
    pub min_eig_sigma_p: Option<f64>,
}

/// Re-audits a trajectory CSV. Negativity uses `d_int_scale` when present
/// (otherwise the running-maximum rule alone); the PSD test uses the `xi`
/// entries when present, then `min_eig_sigma_p`, then `psd_flag`.
pub fn audit_csv(text: &str) -> Result<CsvAudit> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let t_col = find("t").ok_or_else(|| Error::Parse("missing column `t`".into()))?;
    let d_col = find("d_int");
    let scale_col = find("d_int_scale");
    let eig_col = find("min_eig_sigma_p");
    let flag_col = find("psd_flag");
    let xi_cols: Option<Vec<usize>> = XI_COLUMNS.iter().map(|c| find(c)).collect();

    let mut tracker = NegativityTracker::default();
    let mut out = CsvAudit {
        samples: 0,
        first_negative_dissipation_time: None,
        psd_exit_time: None,
        min_d_int: None,
        min_eig_sigma_p: None,
    };
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| {
                    Error::Parse(format!("row {}: column {} is not a number", row + 1, i + 1))
                })
        };
        let t = num(t_col)?;
        out.samples += 1;
        if let Some(c) = d_col {
            let d = num(c)?;
            let scale = scale_col.map(num).transpose()?.unwrap_or(1.0);
            out.min_d_int = Some(out.min_d_int.map_or(d, |m: f64| m.min(d)));
            if tracker.observe(d, scale) && out.first_negative_dissipation_time.is_none() {
                out.first_negative_dissipation_time = Some(t);
            }
        }
        let psd = if let Some(cols) = &xi_cols {
            let mut v = [0.0; 6];
            for (k, &c) in cols.iter().enumerate() {
                v[k] = num(c)?;
            }
            let s = SymMat3(v);
            let e = s.min_eig();
            out.min_eig_sigma_p = Some(out.min_eig_sigma_p.map_or(e, |m: f64| m.min(e)));
            Some(e >= -crate::mat3::psd_tolerance(&s))
        } else if let Some(c) = eig_col {
            let e = num(c)?;
            out.min_eig_sigma_p = Some(out.min_eig_sigma_p.map_or(e, |m: f64| m.min(e)));
            Some(e >= -1e-10 * (1.0 + e.abs()))
        } else {
            flag_col.map(num).transpose()?.map(|f| f != 0.0)
        };
        if psd == Some(false) && out.psd_exit_time.is_none() {
            out.psd_exit_time = Some(t);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillatory(model: ModelKind, seed: u64) -> Scenario {
        Scenario {
            name: format!("oscillatory_{seed}"),
            model,
            params: MaterialParams::default(),
            protocol: ProtocolSpec::Oscillatory {
                omega: 0.75,
                m: None,
                frame: None,
            },
            initial: InitialSpec::Zero,
            t0: 0.0,
            t_end: 4.0,
            dt: 0.01,
            integrator: IntegratorKind::Rk4Lagrangian,
            outputs: default_outputs(),
            seed,
        }
    }

    #[test]
    fn json_round_trip() {
        let mut s = oscillatory(ModelKind::NonlinearOldroydB { k: 2 }, 9);
        s.initial = InitialSpec::Values([0.1, 0.2, 0.3, 0.4, 0.5, 1.0 / 3.0]);
        s.protocol = ProtocolSpec::Constant {
            f: Mat3::IDENTITY.to_row_major(),
            frame: Some(FrameSpec {
                axis: [0.0, 0.0, 1.0],
                speed: 0.1,
            }),
        };
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn toml_input() {
        let text = r#"
            name = "shear"
            t_end = 1.0
            dt = 0.1
            integrator = "rk4_eulerian"
            initial = { random_psd = 4 }
            [model]
            kind = "zaremba_jaumann"
            [params]
            lambda1 = 1.0
            eta_s = 0.1
            eta_p = 0.9
            mu = 1.0
            [protocol]
            kind = "simple_shear"
            rate = 1.0
        "#;
        let s = Scenario::from_toml(text).unwrap();
        assert_eq!(s.initial, InitialSpec::RandomPsd(4));
        assert_eq!(s.outputs, default_outputs());
        s.validate().unwrap();
    }

    #[test]
    fn validation_names_fields() {
        let mut s = oscillatory(ModelKind::OldroydB, 1);
        s.params.lambda1 = -1.0;
        assert!(s
            .validate()
            .unwrap_err()
            .to_string()
            .contains("params.lambda1"));
        let mut s = oscillatory(ModelKind::OldroydB, 1);
        s.dt = 0.3;
        assert!(s.validate().unwrap_err().to_string().contains("`dt`"));
        let mut s = oscillatory(ModelKind::OldroydB, 1);
        s.outputs.push("bogus".into());
        assert!(s.validate().unwrap_err().to_string().contains("outputs[9]"));
        let mut s = oscillatory(ModelKind::OldroydA, 1);
        s.integrator = IntegratorKind::Duhamel;
        assert!(s.validate().unwrap_err().to_string().contains("integrator"));
        let mut s = oscillatory(ModelKind::OldroydB, 1);
        s.name = "a/b".into();
        assert!(s.validate().is_err());
    }

    #[test]
    fn csv_is_deterministic_and_formatted() {
        let s = oscillatory(ModelKind::ZarembaJaumann, 3);
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a.csv, b.csv);
        let mut lines = a.csv.lines();
        assert!(lines.next().unwrap().starts_with("t,d_int,"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("0.0000000000000000e0,"));
        assert!(!a.csv.contains('\r'));
        assert_eq!(a.csv.lines().count(), 402);
    }

    #[test]
    fn summary_keys_are_fixed() {
        let out = run_scenario(&oscillatory(ModelKind::OldroydB, 3)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.summary.to_json()).unwrap();
        let obj = v.as_object().unwrap();
        for key in [
            "name",
            "model",
            "integrator",
            "seed",
            "status",
            "samples",
            "first_negative_dissipation_time",
            "psd_exit_time",
            "blowup_time",
            "min_d_int",
            "min_eig_sigma_p",
            "max_description_gap",
        ] {
            assert!(obj.contains_key(key), "{key}");
        }
        assert!(obj["blowup_time"].is_null());
    }

    #[test]
    fn csv_audit_reproduces_run_events() {
        let out = run_scenario(&oscillatory(ModelKind::ZarembaJaumann, 5)).unwrap();
        let mut cols: Vec<String> = default_outputs();
        cols.push("d_int_scale".into());
        let mut s = oscillatory(ModelKind::ZarembaJaumann, 5);
        s.outputs = cols;
        let out2 = run_scenario(&s).unwrap();
        let a = audit_csv(&out2.csv).unwrap();
        assert_eq!(a.samples, out.summary.samples);
        assert_eq!(
            a.first_negative_dissipation_time,
            out.summary.first_negative_dissipation_time
        );
        assert_eq!(a.psd_exit_time, out.summary.psd_exit_time);
    }

    #[test]
    fn batch_empty_and_isolated_errors() {
        assert!(run_batch(&[], 4).is_empty());
        let mut bad = oscillatory(ModelKind::OldroydB, 1);
        bad.dt = -1.0;
        let res = run_batch(&[bad, oscillatory(ModelKind::OldroydB, 2)], 2);
        assert!(res[0].error.is_some());
        assert!(res[1].summary.is_some());
    }

    #[test]
    fn gnuplot_mentions_csv() {
        let g = gnuplot_script("run", &["t", "d_int", "min_eig_sigma_p"]);
        assert!(g.contains("'run.csv' using 1:2"));
        assert!(g.contains("using 1:3"));
    }
}
