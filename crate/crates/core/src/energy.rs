//! Longitudinal dynamics of an electric bus over a sampled drive cycle.
//!
//! Power at each step is tractive power (inertia, grade, rolling resistance,
//! aerodynamic drag) plus the non-tractive draw of HVAC and auxiliaries. Step
//! energy is floored at the motor's regenerative power limit, and a cycle's
//! energy efficiency is its summed step energy per kilometre driven.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{fraction, non_negative, positive, FieldError};

/// Joules per kilowatt-hour.
pub const J_PER_KWH: f64 = 3.6e6;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("drive cycle covers no distance")]
    ZeroDistanceCycle,
    #[error("drive cycle row {row}: timestep {dt} s differs from {expected} s")]
    NonUniformTimestep { row: usize, dt: f64, expected: f64 },
    #[error("drive cycle row {row}: negative speed {speed}")]
    NegativeSpeed { row: usize, speed: f64 },
    #[error("drive cycle needs at least two samples, got {0}")]
    TooShort(usize),
    #[error("drive cycle timestep must be positive, got {0}")]
    NonPositiveTimestep(f64),
    #[error("{file}:{line}: {reason}")]
    Malformed { file: String, line: u64, reason: String },
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

/// Speed trace sampled at a fixed interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveCycle {
    dt_s: f64,
    speeds_mps: Vec<f64>,
}

impl DriveCycle {
    pub fn new(dt_s: f64, speeds_mps: Vec<f64>) -> Result<Self, EnergyError> {
        if !(dt_s > 0.0) || !dt_s.is_finite() {
            return Err(EnergyError::NonPositiveTimestep(dt_s));
        }
        if speeds_mps.len() < 2 {
            return Err(EnergyError::TooShort(speeds_mps.len()));
        }
        if let Some((row, &speed)) = speeds_mps.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(EnergyError::NegativeSpeed { row, speed });
        }
        Ok(DriveCycle { dt_s, speeds_mps })
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    pub fn speeds_mps(&self) -> &[f64] {
        &self.speeds_mps
    }

    pub fn len(&self) -> usize {
        self.speeds_mps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds_mps.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.dt_s * (self.speeds_mps.len() - 1) as f64
    }

    /// Distance of the steps used by [`segment_energy_efficiency`], in metres.
    pub fn distance_m(&self) -> f64 {
        self.speeds_mps[..self.speeds_mps.len() - 1].iter().sum::<f64>() * self.dt_s
    }

    /// Forward-difference acceleration per step, `(v[i+1] - v[i]) / dt`.
    pub fn accelerations(&self) -> Vec<f64> {
        self.speeds_mps.windows(2).map(|w| (w[1] - w[0]) / self.dt_s).collect()
    }

    /// Synthetic urban stop-and-go trace at 10 Hz: four trapezoidal pulses
    /// from standstill to 12 m/s, each a 5 s dwell, 12 s at +1.0 m/s², 20 s
    /// cruise and 8 s at -1.5 m/s², then a final 5 s dwell.
    pub fn synthetic_stop_and_go() -> Self {
        const DT: f64 = 0.1;
        // Phase lengths in tenths of a second.
        const DWELL: usize = 50;
        const ACCEL: usize = 120;
        const CRUISE: usize = 200;
        const DECEL: usize = 80;
        const PULSE: usize = DWELL + ACCEL + CRUISE + DECEL;
        const PULSES: usize = 4;

        let n = PULSES * PULSE + DWELL + 1;
        let speeds = (0..n)
            .map(|k| {
                if k >= PULSES * PULSE {
                    return 0.0;
                }
                let p = k % PULSE;
                if p < DWELL {
                    0.0
                } else if p < DWELL + ACCEL {
                    (p - DWELL) as f64 * DT * 1.0
                } else if p < DWELL + ACCEL + CRUISE {
                    12.0
                } else {
                    let into = (p - DWELL - ACCEL - CRUISE) as f64 * DT;
                    (12.0 - 1.5 * into).max(0.0)
                }
            })
            .collect();
        DriveCycle { dt_s: DT, speeds_mps: speeds }
    }

    /// Reads a `time_s,speed_mps` CSV. Timesteps must agree to within 1e-6 s.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, EnergyError> {
        let path = path.as_ref();
        let file = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| {
            match e.into_kind() {
                csv::ErrorKind::Io(source) => EnergyError::Io { file: file.clone(), source },
                other => EnergyError::Malformed { file: file.clone(), line: 0, reason: format!("{other:?}") },
            }
        })?;

        #[derive(Deserialize)]
        struct Row {
            time_s: f64,
            speed_mps: f64,
        }

        let mut rows = Vec::new();
        for result in reader.deserialize::<Row>() {
            let row = result.map_err(|e| EnergyError::Malformed {
                file: file.clone(),
                line: e.position().map(|p| p.line()).unwrap_or(0),
                reason: e.to_string(),
            })?;
            rows.push(row);
        }
        if rows.len() < 2 {
            return Err(EnergyError::TooShort(rows.len()));
        }
        let dt = rows[1].time_s - rows[0].time_s;
        for (i, w) in rows.windows(2).enumerate() {
            let step = w[1].time_s - w[0].time_s;
            if (step - dt).abs() > 1e-6 {
                return Err(EnergyError::NonUniformTimestep { row: i + 1, dt: step, expected: dt });
            }
        }
        DriveCycle::new(dt, rows.into_iter().map(|r| r.speed_mps).collect())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), EnergyError> {
        let path = path.as_ref();
        let io = |source| EnergyError::Io { file: path.display().to_string(), source };
        let mut out = String::from("time_s,speed_mps\n");
        for (i, v) in self.speeds_mps.iter().enumerate() {
            // Time is rebuilt from the index so no drift accumulates.
            out.push_str(&format!("{:.3},{}\n", i as f64 * self.dt_s, v));
        }
        std::fs::write(path, out).map_err(io)
    }
}

/// Physical and electrical parameters of the bus. Defaults describe a 40-ft
/// battery-electric bus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BusSpec {
    pub mass_kg: f64,
    pub frontal_area_m2: f64,
    pub drag_coeff: f64,
    pub rolling_coeff: f64,
    pub motor_eff: f64,
    pub battery_eff: f64,
    pub motor_power_w: f64,
    pub battery_kwh: f64,
    pub aux_power_w: f64,
    pub hvac_cop: f64,
    pub passenger_mass_kg: f64,
    /// Peak power the bus accepts while charging; `None` means the charger is
    /// the only limit.
    pub max_charge_power_kw: Option<f64>,
}

impl Default for BusSpec {
    fn default() -> Self {
        BusSpec {
            mass_kg: 14_050.0,
            frontal_area_m2: 8.78,
            drag_coeff: 0.65,
            rolling_coeff: 0.00697,
            motor_eff: 0.85,
            battery_eff: 0.95,
            motor_power_w: 300_000.0,
            battery_kwh: 352.0,
            aux_power_w: 2_000.0,
            hvac_cop: 2.0,
            passenger_mass_kg: 70.0,
            max_charge_power_kw: None,
        }
    }
}

impl BusSpec {
    /// Vehicle plus passenger mass.
    pub fn total_mass_kg(&self, passengers: u32) -> f64 {
        self.mass_kg + self.passenger_mass_kg * passengers as f64
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        for (name, v) in [
            ("mass_kg", self.mass_kg),
            ("frontal_area_m2", self.frontal_area_m2),
            ("drag_coeff", self.drag_coeff),
            ("rolling_coeff", self.rolling_coeff),
            ("motor_power_w", self.motor_power_w),
            ("battery_kwh", self.battery_kwh),
            ("aux_power_w", self.aux_power_w),
            ("passenger_mass_kg", self.passenger_mass_kg),
        ] {
            positive(name, v)?;
        }
        fraction("motor_eff", self.motor_eff)?;
        fraction("battery_eff", self.battery_eff)?;
        if !(self.hvac_cop >= 1.0) || !self.hvac_cop.is_finite() {
            return Err(FieldError::new("hvac_cop", format!("must be at least 1, got {}", self.hvac_cop)));
        }
        if let Some(p) = self.max_charge_power_kw {
            positive("max_charge_power_kw", p)?;
        }
        Ok(())
    }
}

/// Operating conditions of one scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConditions {
    pub passengers: u32,
    pub ambient_temp_c: f64,
    pub grade_rad: f64,
    pub air_density_kgpm3: f64,
    pub gravity_mps2: f64,
}

impl EnvConditions {
    pub const AIR_DENSITY: f64 = 1.2;
    pub const GRAVITY: f64 = 9.81;

    pub fn new(passengers: u32, ambient_temp_c: f64, grade_rad: f64) -> Self {
        EnvConditions {
            passengers,
            ambient_temp_c,
            grade_rad,
            air_density_kgpm3: Self::AIR_DENSITY,
            gravity_mps2: Self::GRAVITY,
        }
    }
}

/// Piecewise-linear HVAC thermal load around a setpoint.
///
/// Thermal demand is `heat_w_per_deg * (setpoint - T)` below the setpoint and
/// `cool_w_per_deg * (T - setpoint)` above it; the electrical draw divides
/// that by the coefficient of performance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HvacModel {
    pub setpoint_c: f64,
    pub heat_w_per_deg: f64,
    pub cool_w_per_deg: f64,
}

impl Default for HvacModel {
    fn default() -> Self {
        HvacModel { setpoint_c: 20.0, heat_w_per_deg: 400.0, cool_w_per_deg: 300.0 }
    }
}

impl HvacModel {
    /// Thermal demand in watts.
    pub fn thermal_load_w(&self, ambient_temp_c: f64) -> f64 {
        self.heat_w_per_deg * (self.setpoint_c - ambient_temp_c).max(0.0)
            + self.cool_w_per_deg * (ambient_temp_c - self.setpoint_c).max(0.0)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        non_negative("heat_w_per_deg", self.heat_w_per_deg)?;
        non_negative("cool_w_per_deg", self.cool_w_per_deg)?;
        if !self.setpoint_c.is_finite() {
            return Err(FieldError::new("setpoint_c", "must be finite"));
        }
        Ok(())
    }
}

/// Electrical HVAC draw in watts.
pub fn hvac_power(model: &HvacModel, cop: f64, ambient_temp_c: f64) -> f64 {
    model.thermal_load_w(ambient_temp_c) / cop
}

/// Tractive power in watts at speed `v_mps` and acceleration `a_mps2`.
///
/// Negative when braking or descending.
pub fn tractive_power(v_mps: f64, a_mps2: f64, env: &EnvConditions, total_mass_kg: f64, spec: &BusSpec) -> f64 {
    let m = total_mass_kg;
    let g = env.gravity_mps2;
    let (sin_a, cos_a) = env.grade_rad.sin_cos();
    let f_accel = m * a_mps2;
    let f_grade = m * g * sin_a;
    let f_roll = m * g * spec.rolling_coeff * cos_a;
    let f_drag = 0.5 * env.air_density_kgpm3 * spec.frontal_area_m2 * spec.drag_coeff * v_mps * v_mps;
    v_mps * (f_accel + f_grade + f_roll + f_drag)
}

/// Power breakdown and battery energy of one timestep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepEnergy {
    pub tractive_w: f64,
    pub nontractive_w: f64,
    pub delta_kwh: f64,
}

/// Battery-side energy of the step from `v_i` to `v_j`.
///
/// Both tractive and non-tractive power are divided by the drivetrain
/// efficiencies regardless of sign, and the total is floored at
/// `-motor_power_w` (regeneration cannot exceed motor capacity).
pub fn step_energy(v_i: f64, v_j: f64, dt_s: f64, env: &EnvConditions, spec: &BusSpec, hvac: &HvacModel) -> StepEnergy {
    let nontractive_w = hvac_power(hvac, spec.hvac_cop, env.ambient_temp_c) + spec.aux_power_w;
    let mass = spec.total_mass_kg(env.passengers);
    step_with(v_i, v_j, dt_s, env, spec, mass, nontractive_w)
}

#[inline]
fn step_with(
    v_i: f64,
    v_j: f64,
    dt_s: f64,
    env: &EnvConditions,
    spec: &BusSpec,
    mass: f64,
    nontractive_w: f64,
) -> StepEnergy {
    let a = (v_j - v_i) / dt_s;
    let tractive_w = tractive_power(v_i, a, env, mass, spec);
    let demand =
        tractive_w / (spec.battery_eff * spec.motor_eff) + nontractive_w / spec.battery_eff;
    let delta_kwh = dt_s * demand.max(-spec.motor_power_w) / J_PER_KWH;
    StepEnergy { tractive_w, nontractive_w, delta_kwh }
}

/// Energy efficiency in kWh/km of driving the whole cycle under `env`:
/// `1000 * sum(dE_i) / sum(v_i * dt)` over every step of the cycle.
pub fn segment_energy_efficiency(
    cycle: &DriveCycle,
    env: &EnvConditions,
    spec: &BusSpec,
    hvac: &HvacModel,
) -> Result<f64, EnergyError> {
    let distance_m = cycle.distance_m();
    if !(distance_m > 0.0) {
        return Err(EnergyError::ZeroDistanceCycle);
    }
    let nontractive_w = hvac_power(hvac, spec.hvac_cop, env.ambient_temp_c) + spec.aux_power_w;
    let mass = spec.total_mass_kg(env.passengers);
    let energy_kwh: f64 = cycle
        .speeds_mps
        .windows(2)
        .map(|w| step_with(w[0], w[1], cycle.dt_s, env, spec, mass, nontractive_w).delta_kwh)
        .sum();
    Ok(1000.0 * energy_kwh / distance_m)
}
