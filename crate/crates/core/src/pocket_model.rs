//! Physical description of an air-pocket force sensor and its empirical
//! linear pressure/force model.
//!
//! A pocket is a sealed, inflated membrane with an embedded gauge-pressure
//! sensor. Pressing on it raises the internal pressure linearly with the
//! applied force; the slope of that line is the pocket's sensitivity in
//! kPa per newton. Sensitivity depends on the pocket geometry and on how the
//! load meets it, and the measured values for every tested condition ship in
//! `data/sensitivity_table.v1.csv`.
//!
//! Units are fixed: kPa gauge, N, cm, s. Membrane thickness is the one
//! quantity carried in mm.

use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version tag of the bundled sensitivity table.
pub const TABLE_VERSION: u32 = 1;

const BUNDLED_TABLE: &str = include_str!("../data/sensitivity_table.v1.csv");

/// Lower and upper bound of the initial-pressure interpolation envelope (kPa).
pub const PRESSURE_ENVELOPE_KPA: (f64, f64) = (0.4, 1.0);
/// Lower and upper bound of the contact-area interpolation envelope (cm²).
pub const AREA_ENVELOPE_CM2: (f64, f64) = (6.9, 25.0);

/// Baseline test conditions every other condition is measured against.
pub const BASE_INITIAL_PRESSURE_KPA: f64 = 0.4;
pub const BASE_CONTACT_AREA_CM2: f64 = 12.5;
/// Sub-pocket loaded by default on a sealed pocket (zero-based, second from
/// the sensor end).
pub const DEFAULT_SUBPOCKET: usize = 1;

const MATCH_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("UNSUPPORTED_CONFIG: {0}")]
    UnsupportedConfig(String),
    #[error("invalid pocket config: {0}")]
    InvalidConfig(String),
    #[error("invalid contact: {0}")]
    InvalidContact(String),
    #[error("sensitivity table: {0}")]
    Table(String),
}

/// The four tested pocket geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Control,
    Small,
    Thin,
    Sealed,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Control, Preset::Small, Preset::Thin, Preset::Sealed];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Control => "control",
            Preset::Small => "small",
            Preset::Thin => "thin",
            Preset::Sealed => "sealed",
        }
    }

    pub fn config(self) -> PocketConfig {
        match self {
            Preset::Control => PocketConfig::control(),
            Preset::Small => PocketConfig::small(),
            Preset::Thin => PocketConfig::thin(),
            Preset::Sealed => PocketConfig::sealed(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "control" => Ok(Preset::Control),
            "small" => Ok(Preset::Small),
            "thin" => Ok(Preset::Thin),
            "sealed" => Ok(Preset::Sealed),
            other => Err(ModelError::Table(format!("unknown preset {other:?}"))),
        }
    }
}

/// Geometry and inflation of one sensor pocket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PocketConfig {
    pub membrane_thickness_mm: f64,
    pub pre_inflated_length_cm: f64,
    pub lay_flat_diameter_cm: f64,
    pub interior_seal_count: usize,
    /// Empty when there are no interior seals.
    pub subpocket_lengths_cm: Vec<f64>,
    pub initial_pressure_kpa: f64,
}

impl PocketConfig {
    pub fn control() -> Self {
        Self::plain(0.10, 27.5)
    }

    pub fn small() -> Self {
        Self::plain(0.10, 15.0)
    }

    pub fn thin() -> Self {
        Self::plain(0.05, 27.5)
    }

    pub fn sealed() -> Self {
        Self {
            interior_seal_count: 3,
            subpocket_lengths_cm: vec![8.0, 5.75, 5.75, 8.0],
            ..Self::plain(0.10, 27.5)
        }
    }

    fn plain(thickness_mm: f64, length_cm: f64) -> Self {
        Self {
            membrane_thickness_mm: thickness_mm,
            pre_inflated_length_cm: length_cm,
            lay_flat_diameter_cm: 10.2,
            interior_seal_count: 0,
            subpocket_lengths_cm: Vec::new(),
            initial_pressure_kpa: BASE_INITIAL_PRESSURE_KPA,
        }
    }

    pub fn with_initial_pressure(mut self, kpa: f64) -> Self {
        self.initial_pressure_kpa = kpa;
        self
    }

    pub fn subpocket_count(&self) -> usize {
        if self.interior_seal_count == 0 {
            1
        } else {
            self.interior_seal_count + 1
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let lengths_positive = self.membrane_thickness_mm > 0.0
            && self.pre_inflated_length_cm > 0.0
            && self.lay_flat_diameter_cm > 0.0
            && self.subpocket_lengths_cm.iter().all(|&l| l > 0.0);
        if !lengths_positive {
            return Err(ModelError::InvalidConfig("all lengths must be > 0".into()));
        }
        if !(self.initial_pressure_kpa >= 0.0) {
            return Err(ModelError::InvalidConfig("initial pressure must be >= 0".into()));
        }
        if self.interior_seal_count == 0 {
            if !self.subpocket_lengths_cm.is_empty() {
                return Err(ModelError::InvalidConfig(
                    "subpocket lengths given without interior seals".into(),
                ));
            }
        } else {
            if self.subpocket_lengths_cm.len() != self.interior_seal_count + 1 {
                return Err(ModelError::InvalidConfig(format!(
                    "{} seals need {} subpocket lengths, got {}",
                    self.interior_seal_count,
                    self.interior_seal_count + 1,
                    self.subpocket_lengths_cm.len()
                )));
            }
            let total: f64 = self.subpocket_lengths_cm.iter().sum();
            if total > self.pre_inflated_length_cm + MATCH_EPS {
                return Err(ModelError::InvalidConfig(format!(
                    "subpockets sum to {total} cm, longer than the pocket"
                )));
            }
        }
        Ok(())
    }

    /// The tested geometry this config is built from, ignoring inflation.
    pub fn preset(&self) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| self.same_geometry(&p.config()))
    }

    fn same_geometry(&self, other: &PocketConfig) -> bool {
        close(self.membrane_thickness_mm, other.membrane_thickness_mm)
            && close(self.pre_inflated_length_cm, other.pre_inflated_length_cm)
            && close(self.lay_flat_diameter_cm, other.lay_flat_diameter_cm)
            && self.interior_seal_count == other.interior_seal_count
            && self.subpocket_lengths_cm.len() == other.subpocket_lengths_cm.len()
            && self
                .subpocket_lengths_cm
                .iter()
                .zip(&other.subpocket_lengths_cm)
                .all(|(a, b)| close(*a, *b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialFace {
    Top,
    Side,
}

impl RadialFace {
    pub fn name(self) -> &'static str {
        match self {
            RadialFace::Top => "top",
            RadialFace::Side => "side",
        }
    }
}

impl FromStr for RadialFace {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "top" => Ok(RadialFace::Top),
            "side" => Ok(RadialFace::Side),
            other => Err(ModelError::InvalidContact(format!("unknown radial face {other:?}"))),
        }
    }
}

/// Where and how a load meets a pocket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactSpec {
    /// Position along the pocket, 0 at the sensor end.
    pub lengthwise_fraction: f64,
    pub radial_face: RadialFace,
    pub contact_area_cm2: f64,
    /// Zero-based sub-pocket, sealed pockets only.
    pub subpocket_index: Option<usize>,
}

impl Default for ContactSpec {
    fn default() -> Self {
        Self {
            lengthwise_fraction: 0.5,
            radial_face: RadialFace::Top,
            contact_area_cm2: BASE_CONTACT_AREA_CM2,
            subpocket_index: None,
        }
    }
}

impl ContactSpec {
    pub fn top(area_cm2: f64) -> Self {
        Self {
            contact_area_cm2: area_cm2,
            ..Self::default()
        }
    }

    pub fn side(area_cm2: f64) -> Self {
        Self {
            radial_face: RadialFace::Side,
            contact_area_cm2: area_cm2,
            ..Self::default()
        }
    }

    pub fn at_fraction(mut self, fraction: f64) -> Self {
        self.lengthwise_fraction = fraction;
        self
    }

    pub fn on_subpocket(mut self, index: usize) -> Self {
        self.subpocket_index = Some(index);
        self
    }

    pub fn validate(&self, config: &PocketConfig) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.lengthwise_fraction) {
            return Err(ModelError::InvalidContact(
                "lengthwise fraction must lie in [0, 1]".into(),
            ));
        }
        if !(self.contact_area_cm2 > 0.0) {
            return Err(ModelError::InvalidContact("contact area must be > 0".into()));
        }
        if let Some(i) = self.subpocket_index {
            if config.interior_seal_count == 0 {
                return Err(ModelError::InvalidContact(
                    "subpocket index given for a pocket without seals".into(),
                ));
            }
            if i >= config.subpocket_count() {
                return Err(ModelError::InvalidContact(format!(
                    "subpocket {i} out of range (pocket has {})",
                    config.subpocket_count()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    PaperTable,
    Fitted,
    Interpolated,
}

/// Slope of the pressure-change vs. force line, kPa/N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    slope_s: f64,
    pub provenance: Provenance,
}

impl Sensitivity {
    /// Returns `None` unless `slope` is finite and positive.
    pub fn new(slope: f64, provenance: Provenance) -> Option<Self> {
        (slope.is_finite() && slope > 0.0).then_some(Self {
            slope_s: slope,
            provenance,
        })
    }

    pub fn slope(&self) -> f64 {
        self.slope_s
    }
}

/// Initial and currently sensed gauge pressure of a pocket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureState {
    pub p_initial: f64,
    pub p_sensed: f64,
}

/// Force in N implied by a pressure rise. Negative when the sensed pressure
/// sits below the initial one.
pub fn estimate_force(state: PressureState, s: Sensitivity) -> f64 {
    (state.p_sensed - state.p_initial) / s.slope()
}

/// Pressure rise in kPa a steady force produces.
pub fn predict_pressure_change(force_n: f64, s: Sensitivity) -> f64 {
    s.slope() * force_n
}

/// One measured row of the sensitivity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub config_preset: Preset,
    pub radial_face: RadialFace,
    pub lengthwise_cm: Option<f64>,
    pub contact_area_cm2: f64,
    pub initial_pressure_kpa: f64,
    pub subpocket_index: Option<usize>,
    pub slope_kpa_per_n: f64,
    pub source_figure: String,
}

impl TableRow {
    /// Pocket and contact reproducing this row's test condition.
    pub fn condition(&self) -> (PocketConfig, ContactSpec) {
        let config = self
            .config_preset
            .config()
            .with_initial_pressure(self.initial_pressure_kpa);
        let fraction = self
            .lengthwise_cm
            .map(|cm| (cm / config.pre_inflated_length_cm).clamp(0.0, 1.0))
            .unwrap_or(0.5);
        let contact = ContactSpec {
            lengthwise_fraction: fraction,
            radial_face: self.radial_face,
            contact_area_cm2: self.contact_area_cm2,
            subpocket_index: self.subpocket_index,
        };
        (config, contact)
    }

    /// Short human-readable label, unique within the bundled table.
    pub fn label(&self) -> String {
        let mut label = format!(
            "{}/{}/{}cm2/{}kPa",
            self.config_preset,
            self.radial_face.name(),
            self.contact_area_cm2,
            self.initial_pressure_kpa
        );
        if let Some(cm) = self.lengthwise_cm {
            label.push_str(&format!("/at{cm}cm"));
        }
        if let Some(i) = self.subpocket_index {
            label.push_str(&format!("/sub{i}"));
        }
        label
    }
}

#[derive(Debug, Deserialize)]
struct RawRow {
    config_preset: String,
    radial_face: String,
    lengthwise_cm: Option<f64>,
    contact_area_cm2: f64,
    #[serde(rename = "initial_pressure_kPa")]
    initial_pressure_kpa: f64,
    subpocket_index: Option<usize>,
    slope_kpa_per_n: f64,
    source_figure: String,
}

/// Measured sensitivities plus the lookup/interpolation rules over them.
#[derive(Debug, Clone)]
pub struct SensitivityTable {
    rows: Vec<TableRow>,
}

impl SensitivityTable {
    /// The table compiled into the crate.
    pub fn bundled() -> &'static SensitivityTable {
        static TABLE: OnceLock<SensitivityTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            SensitivityTable::from_reader(BUNDLED_TABLE.as_bytes())
                .expect("bundled sensitivity table parses")
        })
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, ModelError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<RawRow>().enumerate() {
            let raw = rec.map_err(|e| ModelError::Table(format!("row {}: {e}", i + 2)))?;
            let slope = raw.slope_kpa_per_n;
            if !(slope > 0.0) {
                return Err(ModelError::Table(format!("row {}: slope must be > 0", i + 2)));
            }
            rows.push(TableRow {
                config_preset: raw.config_preset.parse()?,
                radial_face: raw.radial_face.parse()?,
                lengthwise_cm: raw.lengthwise_cm,
                contact_area_cm2: raw.contact_area_cm2,
                initial_pressure_kpa: raw.initial_pressure_kpa,
                subpocket_index: raw.subpocket_index,
                slope_kpa_per_n: slope,
                source_figure: raw.source_figure,
            });
        }
        let table = Self { rows };
        if table.base(Preset::Control).is_none() {
            return Err(ModelError::Table("no control baseline row".into()));
        }
        Ok(table)
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    /// Sensitivity for a pocket under a given contact.
    ///
    /// Exact test conditions return the measured slope. Otherwise each
    /// factor that departs from the preset's baseline contributes a ratio
    /// against its own baseline, interpolated piecewise-linearly along the
    /// measured axis, and the ratios multiply the preset's baseline slope.
    /// Lengthwise position never matters.
    pub fn sensitivity_for(
        &self,
        config: &PocketConfig,
        contact: &ContactSpec,
    ) -> Result<Sensitivity, ModelError> {
        config.validate()?;
        contact.validate(config)?;
        let preset = config.preset().ok_or_else(|| {
            ModelError::UnsupportedConfig("geometry matches no tested pocket".into())
        })?;
        let pressure = config.initial_pressure_kpa;
        let area = contact.contact_area_cm2;
        in_envelope("initial pressure", pressure, PRESSURE_ENVELOPE_KPA)?;
        in_envelope("contact area", area, AREA_ENVELOPE_CM2)?;
        let subpocket = match preset {
            Preset::Sealed => Some(contact.subpocket_index.unwrap_or(DEFAULT_SUBPOCKET)),
            _ => None,
        };

        if let Some(row) = self.rows.iter().find(|r| {
            r.config_preset == preset
                && r.radial_face == contact.radial_face
                && close(r.contact_area_cm2, area)
                && close(r.initial_pressure_kpa, pressure)
                && r.subpocket_index == subpocket
        }) {
            return Ok(Sensitivity::new(row.slope_kpa_per_n, Provenance::PaperTable)
                .expect("table slopes are positive"));
        }

        let mut slope = self
            .base(preset)
            .ok_or_else(|| ModelError::UnsupportedConfig(format!("no baseline for {preset}")))?;

        if contact.radial_face != RadialFace::Top {
            slope *= self.face_ratio(preset, contact.radial_face)?;
        }
        if !close(area, BASE_CONTACT_AREA_CM2) {
            let axis = self.axis(preset, |r| {
                (r.radial_face == RadialFace::Top
                    && close(r.initial_pressure_kpa, BASE_INITIAL_PRESSURE_KPA))
                .then_some(r.contact_area_cm2)
            });
            slope *= axis_ratio(&axis, area, BASE_CONTACT_AREA_CM2, "contact area")?;
        }
        if !close(pressure, BASE_INITIAL_PRESSURE_KPA) {
            let axis = self.axis(preset, |r| {
                (r.radial_face == RadialFace::Top
                    && close(r.contact_area_cm2, BASE_CONTACT_AREA_CM2))
                .then_some(r.initial_pressure_kpa)
            });
            slope *= axis_ratio(&axis, pressure, BASE_INITIAL_PRESSURE_KPA, "initial pressure")?;
        }
        if let Some(i) = subpocket.filter(|&i| i != DEFAULT_SUBPOCKET) {
            let at = |idx: usize| {
                self.rows
                    .iter()
                    .find(|r| {
                        r.config_preset == preset
                            && r.radial_face == RadialFace::Top
                            && close(r.contact_area_cm2, BASE_CONTACT_AREA_CM2)
                            && close(r.initial_pressure_kpa, BASE_INITIAL_PRESSURE_KPA)
                            && r.subpocket_index == Some(idx)
                    })
                    .map(|r| r.slope_kpa_per_n)
            };
            match (at(i), at(DEFAULT_SUBPOCKET)) {
                (Some(s), Some(base)) => slope *= s / base,
                _ => {
                    return Err(ModelError::UnsupportedConfig(format!(
                        "no measurement for subpocket {i}"
                    )))
                }
            }
        }

        Sensitivity::new(slope, Provenance::Interpolated)
            .ok_or_else(|| ModelError::UnsupportedConfig("non-positive composed slope".into()))
    }

    /// Slope of a preset at the baseline condition (top, medium disk, 0.4 kPa,
    /// default sub-pocket).
    fn base(&self, preset: Preset) -> Option<f64> {
        let subpocket = (preset == Preset::Sealed).then_some(DEFAULT_SUBPOCKET);
        self.rows
            .iter()
            .find(|r| {
                r.config_preset == preset
                    && r.radial_face == RadialFace::Top
                    && close(r.contact_area_cm2, BASE_CONTACT_AREA_CM2)
                    && close(r.initial_pressure_kpa, BASE_INITIAL_PRESSURE_KPA)
                    && r.subpocket_index == subpocket
            })
            .map(|r| r.slope_kpa_per_n)
    }

    fn face_ratio(&self, preset: Preset, face: RadialFace) -> Result<f64, ModelError> {
        // Use the preset's own face measurement when present, else the
        // control pocket's.
        for p in [preset, Preset::Control] {
            let row = self.rows.iter().find(|r| {
                r.config_preset == p
                    && r.radial_face == face
                    && close(r.contact_area_cm2, BASE_CONTACT_AREA_CM2)
                    && close(r.initial_pressure_kpa, BASE_INITIAL_PRESSURE_KPA)
            });
            if let (Some(row), Some(base)) = (row, self.base(p)) {
                return Ok(row.slope_kpa_per_n / base);
            }
        }
        Err(ModelError::UnsupportedConfig(format!(
            "no measurement for {} contact",
            face.name()
        )))
    }

    /// Sorted (value, slope) points along one factor for `preset`, falling
    /// back to the control pocket when the preset has fewer than two points.
    fn axis<F>(&self, preset: Preset, value_of: F) -> Vec<(f64, f64)>
    where
        F: Fn(&TableRow) -> Option<f64>,
    {
        let collect = |p: Preset| {
            let base_sub = (p == Preset::Sealed).then_some(DEFAULT_SUBPOCKET);
            let mut pts: Vec<(f64, f64)> = Vec::new();
            for r in self
                .rows
                .iter()
                .filter(|r| r.config_preset == p && r.subpocket_index == base_sub)
            {
                if let Some(v) = value_of(r) {
                    if !pts.iter().any(|(x, _)| close(*x, v)) {
                        pts.push((v, r.slope_kpa_per_n));
                    }
                }
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts
        };
        let own = collect(preset);
        if own.len() >= 2 {
            own
        } else {
            collect(Preset::Control)
        }
    }
}

/// Shorthand for [`SensitivityTable::sensitivity_for`] on the bundled table.
pub fn sensitivity_for(config: &PocketConfig, contact: &ContactSpec) -> Result<Sensitivity, ModelError> {
    SensitivityTable::bundled().sensitivity_for(config, contact)
}

fn axis_ratio(axis: &[(f64, f64)], x: f64, base_x: f64, what: &str) -> Result<f64, ModelError> {
    let at = interpolate(axis, x).ok_or_else(|| {
        ModelError::UnsupportedConfig(format!("{what} {x} outside measured range"))
    })?;
    let base = interpolate(axis, base_x)
        .ok_or_else(|| ModelError::UnsupportedConfig(format!("{what} axis lacks its baseline")))?;
    Ok(at / base)
}

/// Piecewise-linear interpolation over sorted points; `None` outside them.
pub(crate) fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let (first, last) = (points.first()?, points.last()?);
    if x < first.0 - MATCH_EPS || x > last.0 + MATCH_EPS {
        return None;
    }
    if let Some(p) = points.iter().find(|p| close(p.0, x)) {
        return Some(p.1);
    }
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (x >= x0 && x <= x1).then(|| y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    })
}

fn in_envelope(what: &str, x: f64, (lo, hi): (f64, f64)) -> Result<(), ModelError> {
    if x < lo - MATCH_EPS || x > hi + MATCH_EPS {
        Err(ModelError::UnsupportedConfig(format!(
            "{what} {x} outside [{lo}, {hi}]"
        )))
    } else {
        Ok(())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_EPS
}

/// Settling lag and read-out noise of a pocket's pressure signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseParams {
    pub time_constant_s: f64,
    pub noise_sigma_kpa: f64,
}

impl Default for ResponseParams {
    fn default() -> Self {
        Self {
            time_constant_s: 1.0,
            noise_sigma_kpa: 0.01,
        }
    }
}

impl ResponseParams {
    pub fn noiseless() -> Self {
        Self {
            noise_sigma_kpa: 0.0,
            ..Self::default()
        }
    }
}

/// Forward model of one pocket: a first-order lag from the current pressure
/// toward `p_initial + s * F`, read through additive Gaussian noise.
#[derive(Debug, Clone)]
pub struct PocketResponse {
    p_initial: f64,
    sensitivity: Sensitivity,
    params: ResponseParams,
    pressure: f64,
}

impl PocketResponse {
    pub fn new(p_initial: f64, sensitivity: Sensitivity, params: ResponseParams) -> Self {
        Self {
            p_initial,
            sensitivity,
            params,
            pressure: p_initial,
        }
    }

    pub fn p_initial(&self) -> f64 {
        self.p_initial
    }

    pub fn sensitivity(&self) -> Sensitivity {
        self.sensitivity
    }

    /// Noise-free internal pressure.
    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn steady_state(&self, force_n: f64) -> f64 {
        self.p_initial + predict_pressure_change(force_n, self.sensitivity)
    }

    /// Holds `force_n` for `dt` seconds and returns the noisy reading at the
    /// end of the interval. Readings are clamped at atmospheric.
    pub fn advance<R: Rng + ?Sized>(&mut self, force_n: f64, dt: f64, rng: &mut R) -> f64 {
        let target = self.steady_state(force_n);
        let alpha = 1.0 - (-dt / self.params.time_constant_s).exp();
        self.pressure += (target - self.pressure) * alpha;
        (self.pressure + gaussian(rng, self.params.noise_sigma_kpa)).max(0.0)
    }

    pub fn reset(&mut self) {
        self.pressure = self.p_initial;
    }
}

/// Pressure readings for a force trajectory sampled every `dt` seconds.
///
/// `forces[i]` is held over `[i*dt, (i+1)*dt)`; the i-th output is the
/// reading at `(i+1)*dt`.
pub fn response_with_dynamics<R: Rng + ?Sized>(
    forces: &[f64],
    p_initial: f64,
    s: Sensitivity,
    dt: f64,
    params: ResponseParams,
    rng: &mut R,
) -> Vec<f64> {
    assert!(dt > 0.0, "dt must be positive");
    let mut model = PocketResponse::new(p_initial, s, params);
    forces.iter().map(|&f| model.advance(f, dt, rng)).collect()
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}
