//! Least-squares calibration of pocket sensitivity from force/pressure trials.
//!
//! Trials follow the bench procedure: a disk of known area and mass sits on
//! the pocket, weights go on the disk, and the pressure change is read once
//! the pocket has settled. Applied force includes the disk's own weight.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pocket_model::{
    gaussian, predict_pressure_change, ContactSpec, ModelError, PocketConfig, Preset, RadialFace,
    SensitivityTable, BASE_INITIAL_PRESSURE_KPA,
};

pub const GRAVITY: f64 = 9.81;
/// Weights stacked on the disk, grams.
pub const STANDARD_MASSES_G: [f64; 3] = [150.0, 300.0, 450.0];
pub const STANDARD_TRIALS: u32 = 3;

/// Exact CSV header, in order.
pub const CSV_COLUMNS: [&str; 9] = [
    "pocket_id",
    "trial",
    "radial_face",
    "lengthwise_cm",
    "contact_area_cm2",
    "initial_pressure_kpa",
    "subpocket_index",
    "force_n",
    "delta_pressure_kpa",
];

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("DEGENERATE_DATA: {0}")]
    DegenerateData(String),
    #[error("MISSING_COLUMN: {0}")]
    MissingColumn(String),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("invalid synthetic spec: {0}")]
    SyntheticSpec(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CalibrationError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            CalibrationError::DegenerateData(_) => "DEGENERATE_DATA",
            CalibrationError::MissingColumn(_) => "MISSING_COLUMN",
            CalibrationError::Model(ModelError::UnsupportedConfig(_)) => "UNSUPPORTED_CONFIG",
            CalibrationError::Model(_) => "INVALID_CONFIG",
            CalibrationError::SyntheticSpec(_) => "INVALID_SPEC",
            CalibrationError::Csv(_) => "MALFORMED_CSV",
            CalibrationError::Io(_) => "IO",
        }
    }
}

/// Test disk placed between weights and pocket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disk {
    Small,
    Medium,
    Large,
}

impl Disk {
    pub const ALL: [Disk; 3] = [Disk::Small, Disk::Medium, Disk::Large];

    pub fn area_cm2(self) -> f64 {
        match self {
            Disk::Small => 6.9,
            Disk::Medium => 12.5,
            Disk::Large => 25.0,
        }
    }

    pub fn mass_g(self) -> f64 {
        match self {
            Disk::Small => 4.36,
            Disk::Medium => 8.75,
            Disk::Large => 17.6,
        }
    }

    pub fn for_area(area_cm2: f64) -> Option<Disk> {
        Disk::ALL
            .into_iter()
            .find(|d| (d.area_cm2() - area_cm2).abs() < 1e-9)
    }
}

impl FromStr for Disk {
    type Err = CalibrationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "small" => Ok(Disk::Small),
            "medium" => Ok(Disk::Medium),
            "large" => Ok(Disk::Large),
            other => Err(CalibrationError::SyntheticSpec(format!("unknown disk {other:?}"))),
        }
    }
}

/// Weight of `mass_g` grams in newtons.
pub fn weight_n(mass_g: f64) -> f64 {
    mass_g / 1000.0 * GRAVITY
}

/// Conditions a sample was taken under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFactors {
    pub radial_face: RadialFace,
    pub lengthwise_cm: Option<f64>,
    pub contact_area_cm2: f64,
    pub initial_pressure_kpa: f64,
    pub subpocket_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub pocket_id: String,
    pub trial: u32,
    /// Weight plus disk weight.
    pub applied_force_n: f64,
    pub delta_pressure_kpa: f64,
    pub factors: SampleFactors,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_samples: usize,
}

/// Ordinary least squares of pressure change on applied force.
pub fn fit_line(samples: &[CalibrationSample]) -> Result<LinearFit, CalibrationError> {
    fit_points(samples.iter().map(|s| (s.applied_force_n, s.delta_pressure_kpa)))
}

pub fn fit_points<I>(points: I) -> Result<LinearFit, CalibrationError>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let pts: Vec<(f64, f64)> = points.into_iter().collect();
    let n = pts.len();
    if n < 2 {
        return Err(CalibrationError::DegenerateData(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pts {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(CalibrationError::DegenerateData(
            "all forces are equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    // A flat response is fitted perfectly by a flat line.
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        n_samples: n,
    })
}

/// Synthetic re-enactment of the bench procedure through the pocket model.
///
/// Readings are taken after settling, so each sample sits at the model's
/// steady state plus Gaussian read noise of `noise_sigma_kpa`.
pub fn generate_trials(
    config: &PocketConfig,
    contact: &ContactSpec,
    masses_g: &[f64],
    disk_mass_g: f64,
    trials: u32,
    noise_sigma_kpa: f64,
    seed: u64,
) -> Result<Vec<CalibrationSample>, CalibrationError> {
    if masses_g.is_empty() || trials == 0 {
        return Err(CalibrationError::DegenerateData(
            "need at least one mass and one trial".into(),
        ));
    }
    let s = SensitivityTable::bundled().sensitivity_for(config, contact)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pocket_id = config
        .preset()
        .map(|p| p.name().to_string())
        .unwrap_or_else(|| "pocket".into());
    let factors = SampleFactors {
        radial_face: contact.radial_face,
        lengthwise_cm: Some(contact.lengthwise_fraction * config.pre_inflated_length_cm),
        contact_area_cm2: contact.contact_area_cm2,
        initial_pressure_kpa: config.initial_pressure_kpa,
        subpocket_index: contact.subpocket_index,
    };
    let mut out = Vec::with_capacity(masses_g.len() * trials as usize);
    for trial in 1..=trials {
        for &m in masses_g {
            let force = weight_n(m + disk_mass_g);
            let dp = predict_pressure_change(force, s) + gaussian(&mut rng, noise_sigma_kpa);
            out.push(CalibrationSample {
                pocket_id: pocket_id.clone(),
                trial,
                applied_force_n: force,
                delta_pressure_kpa: dp,
                factors: factors.clone(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupFit {
    pub group: String,
    pub fit: Result<LinearFit, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeRatio {
    pub numerator: String,
    pub denominator: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FactorReport {
    pub groups: Vec<GroupFit>,
    pub ratios: Vec<SlopeRatio>,
    #[serde(skip)]
    points: Vec<(String, Vec<(f64, f64)>)>,
}

#[derive(Serialize)]
struct FitRecord<'a> {
    group: &'a str,
    slope: f64,
    intercept: f64,
    r2: f64,
    n: usize,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    group: &'a str,
    error: &'static str,
    detail: &'a str,
}

#[derive(Serialize)]
struct RatioRecord<'a> {
    ratio: String,
    numerator: &'a str,
    denominator: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct PlotSeries<'a> {
    group: &'a str,
    points: &'a [(f64, f64)],
    line: Option<[(f64, f64); 2]>,
}

impl FactorReport {
    pub fn fit(&self, group: &str) -> Option<&LinearFit> {
        self.groups
            .iter()
            .find(|g| g.group == group)
            .and_then(|g| g.fit.as_ref().ok())
    }

    pub fn ratio(&self, numerator: &str, denominator: &str) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.numerator == numerator && r.denominator == denominator)
            .map(|r| r.ratio)
    }

    /// One JSON record per line: fits as `{group, slope, intercept, r2, n}`,
    /// failed groups as `{group, error, detail}`, then the slope ratios.
    pub fn write_records<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for g in &self.groups {
            let line = match &g.fit {
                Ok(f) => serde_json::to_string(&FitRecord {
                    group: &g.group,
                    slope: f.slope,
                    intercept: f.intercept,
                    r2: f.r_squared,
                    n: f.n_samples,
                }),
                Err(detail) => serde_json::to_string(&ErrorRecord {
                    group: &g.group,
                    error: "DEGENERATE_DATA",
                    detail,
                }),
            }
            .map_err(std::io::Error::other)?;
            writeln!(w, "{line}")?;
        }
        for r in &self.ratios {
            let line = serde_json::to_string(&RatioRecord {
                ratio: format!("{}/{}", r.numerator, r.denominator),
                numerator: &r.numerator,
                denominator: &r.denominator,
                value: r.ratio,
            })
            .map_err(std::io::Error::other)?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Plot sidecar: one series per group with raw points and the fitted
    /// line across the group's force range.
    pub fn write_plot_data<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (group, pts) in &self.points {
            let line = self.fit(group).map(|f| {
                let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                [
                    (lo, f.slope * lo + f.intercept),
                    (hi, f.slope * hi + f.intercept),
                ]
            });
            let rec = PlotSeries {
                group,
                points: pts,
                line,
            };
            writeln!(w, "{}", serde_json::to_string(&rec).map_err(std::io::Error::other)?)?;
        }
        Ok(())
    }
}

/// Fits every group and compares slopes pairwise. A group that cannot be
/// fitted is reported in place and left out of the ratios.
pub fn factor_report(groups: &[(String, Vec<CalibrationSample>)]) -> FactorReport {
    let mut report = FactorReport::default();
    for (label, samples) in groups {
        report.groups.push(GroupFit {
            group: label.clone(),
            fit: fit_line(samples).map_err(|e| e.to_string()),
        });
        report.points.push((
            label.clone(),
            samples
                .iter()
                .map(|s| (s.applied_force_n, s.delta_pressure_kpa))
                .collect(),
        ));
    }
    let fitted: Vec<(&str, f64)> = report
        .groups
        .iter()
        .filter_map(|g| g.fit.as_ref().ok().map(|f| (g.group.as_str(), f.slope)))
        .collect();
    for (i, (den, den_slope)) in fitted.iter().enumerate() {
        for (num, num_slope) in &fitted[i + 1..] {
            report.ratios.push(SlopeRatio {
                numerator: num.to_string(),
                denominator: den.to_string(),
                ratio: num_slope / den_slope,
            });
        }
    }
    report
}

/// Groups samples by `pocket_id` and the factor columns.
pub fn group_samples(samples: &[CalibrationSample]) -> Vec<(String, Vec<CalibrationSample>)> {
    let mut groups: BTreeMap<String, Vec<CalibrationSample>> = BTreeMap::new();
    for s in samples {
        let f = &s.factors;
        let mut key = format!(
            "{}/{}/{}cm2/{}kPa",
            s.pocket_id,
            f.radial_face.name(),
            f.contact_area_cm2,
            f.initial_pressure_kpa
        );
        if let Some(cm) = f.lengthwise_cm {
            key.push_str(&format!("/at{cm}cm"));
        }
        if let Some(i) = f.subpocket_index {
            key.push_str(&format!("/sub{i}"));
        }
        groups.entry(key).or_default().push(s.clone());
    }
    groups.into_iter().collect()
}

/// A row that could not be parsed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub line: u64,
    pub code: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub samples: Vec<CalibrationSample>,
    pub row_errors: Vec<RowError>,
}

/// Parses calibration CSV. Unknown columns are ignored; rows that fail to
/// parse are collected with their line numbers and skipped.
pub fn ingest_csv<R: Read>(reader: R) -> Result<Ingested, CalibrationError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; CSV_COLUMNS.len()];
    for (slot, name) in idx.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CalibrationError::MissingColumn(name.to_string()))?;
    }
    let [pocket, trial, face, lengthwise, area, p0, sub, force, dp] = idx;

    let mut out = Ingested::default();
    for rec in rdr.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                out.row_errors.push(RowError {
                    line,
                    code: "MALFORMED_ROW",
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| rec.get(i).unwrap_or("");
        let parsed = (|| -> Result<CalibrationSample, String> {
            let num = |i: usize, name: &str| -> Result<f64, String> {
                let v: f64 = field(i)
                    .parse()
                    .map_err(|_| format!("{name}: not a number: {:?}", field(i)))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(format!("{name}: not finite"))
                }
            };
            let opt_num = |i: usize, name: &str| -> Result<Option<f64>, String> {
                if field(i).is_empty() {
                    Ok(None)
                } else {
                    num(i, name).map(Some)
                }
            };
            let applied_force_n = num(force, "force_n")?;
            if !(applied_force_n > 0.0) {
                return Err("force_n must be > 0".into());
            }
            let trial: u32 = field(trial)
                .parse()
                .map_err(|_| format!("trial: not a count: {:?}", field(trial)))?;
            if trial < 1 {
                return Err("trial must be >= 1".into());
            }
            let subpocket_index = if field(sub).is_empty() {
                None
            } else {
                Some(
                    field(sub)
                        .parse::<usize>()
                        .map_err(|_| format!("subpocket_index: not an index: {:?}", field(sub)))?,
                )
            };
            Ok(CalibrationSample {
                pocket_id: field(pocket).to_string(),
                trial,
                applied_force_n,
                delta_pressure_kpa: num(dp, "delta_pressure_kpa")?,
                factors: SampleFactors {
                    radial_face: field(face).parse().map_err(|e: ModelError| e.to_string())?,
                    lengthwise_cm: opt_num(lengthwise, "lengthwise_cm")?,
                    contact_area_cm2: num(area, "contact_area_cm2")?,
                    initial_pressure_kpa: num(p0, "initial_pressure_kpa")?,
                    subpocket_index,
                },
            })
        })();
        match parsed {
            Ok(s) => out.samples.push(s),
            Err(detail) => out.row_errors.push(RowError {
                line,
                code: "MALFORMED_ROW",
                detail,
            }),
        }
    }
    Ok(out)
}

pub fn write_csv<W: Write>(samples: &[CalibrationSample], w: W) -> Result<(), CalibrationError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_COLUMNS)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for s in samples {
        let f = &s.factors;
        wtr.write_record([
            s.pocket_id.clone(),
            s.trial.to_string(),
            f.radial_face.name().to_string(),
            opt(f.lengthwise_cm.map(|v| v.to_string())),
            f.contact_area_cm2.to_string(),
            f.initial_pressure_kpa.to_string(),
            opt(f.subpocket_index.map(|v| v.to_string())),
            s.applied_force_n.to_string(),
            s.delta_pressure_kpa.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Compact description of a synthetic calibration run, e.g.
/// `control,top,medium,0.4,noise=0.02,seed=7`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub preset: Preset,
    pub face: RadialFace,
    pub disk: Disk,
    pub initial_pressure_kpa: f64,
    pub noise_sigma_kpa: f64,
    pub seed: u64,
    pub trials: u32,
    pub subpocket_index: Option<usize>,
}

impl SyntheticSpec {
    pub fn generate(&self) -> Result<Vec<CalibrationSample>, CalibrationError> {
        let config = self
            .preset
            .config()
            .with_initial_pressure(self.initial_pressure_kpa);
        let contact = ContactSpec {
            radial_face: self.face,
            contact_area_cm2: self.disk.area_cm2(),
            subpocket_index: self.subpocket_index,
            ..ContactSpec::default()
        };
        generate_trials(
            &config,
            &contact,
            &STANDARD_MASSES_G,
            self.disk.mass_g(),
            self.trials,
            self.noise_sigma_kpa,
            self.seed,
        )
    }
}

impl FromStr for SyntheticSpec {
    type Err = CalibrationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: String| CalibrationError::SyntheticSpec(m);
        let mut positional = Vec::new();
        let mut spec = SyntheticSpec {
            preset: Preset::Control,
            face: RadialFace::Top,
            disk: Disk::Medium,
            initial_pressure_kpa: BASE_INITIAL_PRESSURE_KPA,
            noise_sigma_kpa: 0.0,
            seed: 0,
            trials: STANDARD_TRIALS,
            subpocket_index: None,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    let v = v.trim();
                    match k.trim() {
                        "noise" => {
                            spec.noise_sigma_kpa =
                                v.parse().map_err(|_| bad(format!("noise: {v:?}")))?
                        }
                        "seed" => spec.seed = v.parse().map_err(|_| bad(format!("seed: {v:?}")))?,
                        "trials" => {
                            spec.trials = v.parse().map_err(|_| bad(format!("trials: {v:?}")))?
                        }
                        "subpocket" => {
                            spec.subpocket_index =
                                Some(v.parse().map_err(|_| bad(format!("subpocket: {v:?}")))?)
                        }
                        other => return Err(bad(format!("unknown key {other:?}"))),
                    }
                }
                None => positional.push(part),
            }
        }
        if positional.len() != 4 {
            return Err(bad(format!(
                "expected preset,face,disk,initial_pressure; got {} positional fields",
                positional.len()
            )));
        }
        spec.preset = positional[0].parse()?;
        spec.face = positional[1].parse()?;
        spec.disk = positional[2].parse()?;
        spec.initial_pressure_kpa = positional[3]
            .parse()
            .map_err(|_| bad(format!("initial pressure: {:?}", positional[3])))?;
        if !(spec.noise_sigma_kpa >= 0.0) {
            return Err(bad("noise must be >= 0".into()));
        }
        Ok(spec)
    }
}

impl fmt::Display for SyntheticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{:?},{},noise={},seed={}",
            self.preset,
            self.face.name(),
            self.disk,
            self.initial_pressure_kpa,
            self.noise_sigma_kpa,
            self.seed
        )
    }
}

/// Outcome of re-deriving one table slope from noiseless synthetic trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproducedRow {
    pub group: String,
    pub table_slope: f64,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub pass: bool,
}

pub const REPRODUCE_SLOPE_TOL: f64 = 1e-6;
pub const REPRODUCE_INTERCEPT_TOL: f64 = 1e-6;

/// Runs every table condition through noiseless synthetic trials and the
/// fit, checking the recovered slope against the table.
pub fn reproduce_table(
    table: &SensitivityTable,
) -> Result<(FactorReport, Vec<ReproducedRow>), CalibrationError> {
    let mut groups = Vec::new();
    for row in table.rows() {
        let (config, contact) = row.condition();
        let disk = Disk::for_area(row.contact_area_cm2).ok_or_else(|| {
            CalibrationError::Model(ModelError::UnsupportedConfig(format!(
                "no test disk with area {} cm2",
                row.contact_area_cm2
            )))
        })?;
        let samples = generate_trials(
            &config,
            &contact,
            &STANDARD_MASSES_G,
            disk.mass_g(),
            STANDARD_TRIALS,
            0.0,
            0,
        )?;
        groups.push((row.label(), samples));
    }
    let report = factor_report(&groups);
    let rows = table
        .rows()
        .iter()
        .zip(&report.groups)
        .map(|(row, g)| {
            let (slope, intercept) = g
                .fit
                .as_ref()
                .map(|f| (f.slope, f.intercept))
                .unwrap_or((f64::NAN, f64::NAN));
            ReproducedRow {
                group: g.group.clone(),
                table_slope: row.slope_kpa_per_n,
                fitted_slope: slope,
                fitted_intercept: intercept,
                pass: (slope - row.slope_kpa_per_n).abs() <= REPRODUCE_SLOPE_TOL
                    && intercept.abs() < REPRODUCE_INTERCEPT_TOL,
            }
        })
        .collect();
    Ok((report, rows))
}
