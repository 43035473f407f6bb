//! Output directory handling and the JSON run report.
//!
//! Data files carry no timestamps; wall time and the start time live only in
//! `report.json`.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use optomech::circuit::{CircuitParams, DerivedCircuit};
use optomech::constants::angular_to_hz;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Writes files under the output directory and remembers their checksums.
pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    /// `rel` uses `/` separators and may name a subdirectory.
    pub fn write(&mut self, rel: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        }
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.artifacts.push(Artifact {
            path: rel.to_string(),
            bytes: contents.len(),
            sha256: hex(&Sha256::digest(contents.as_bytes())),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("report types serialise");
        text.push('\n');
        self.write(rel, &text)
    }

    pub fn finish(self, report: RunReport) -> Result<(), CliError> {
        let report = FinalReport {
            artifacts: self.artifacts,
            report,
        };
        let mut text = serde_json::to_string_pretty(&report).expect("report types serialise");
        text.push('\n');
        let path = self.root.join("report.json");
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Circuit quantities at the configured operating point, frequencies in Hz.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedSnapshot {
    pub flux_mech: f64,
    pub x_zpf_m: f64,
    pub ej_transmon_hz: f64,
    pub ej_tilde_hz: f64,
    pub omega_t_hz: f64,
    pub impedance_ratio: f64,
    pub impedance_ohm: f64,
    pub c_j: f64,
    pub s_j: f64,
    pub g0_hz: f64,
    pub g0_prime_hz: f64,
    pub g0_dprime_hz: f64,
    pub g0_eff_hz: f64,
    pub beta_screen: f64,
    pub charge_noise_warning: bool,
}

impl DerivedSnapshot {
    pub fn of(p: &CircuitParams) -> Self {
        let d = DerivedCircuit::compute(p);
        Self {
            flux_mech: p.flux_mech,
            x_zpf_m: p.x_zpf,
            ej_transmon_hz: angular_to_hz(p.ej_transmon),
            ej_tilde_hz: angular_to_hz(d.ej_tilde),
            omega_t_hz: angular_to_hz(d.omega_t),
            impedance_ratio: d.impedance_ratio,
            impedance_ohm: d.impedance_ohm,
            c_j: d.c_j,
            s_j: d.s_j,
            g0_hz: angular_to_hz(d.g0),
            g0_prime_hz: angular_to_hz(d.g0_prime),
            g0_dprime_hz: angular_to_hz(d.g0_dprime),
            g0_eff_hz: angular_to_hz(d.g0 + 2.0 * d.g0_prime),
            beta_screen: d.beta_screen,
            charge_noise_warning: d.charge_noise_warning,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Configuration after the profile and user file were merged. Feeding it
    /// back with `--config report.json` reproduces the data files.
    pub config: RunConfig,
    pub derived: DerivedSnapshot,
    pub results: serde_json::Value,
    pub diagnostics: serde_json::Value,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
}

#[derive(Serialize)]
struct FinalReport {
    #[serde(flatten)]
    report: RunReport,
    artifacts: Vec<Artifact>,
}

/// Start time of a run, for the report.
pub struct Clock {
    started: Instant,
    unix: u64,
}

impl Clock {
    pub fn start() -> Self {
        Self {
            started: Instant::now(),
            unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn report(
        &self,
        command: &'static str,
        config: &RunConfig,
        params: &CircuitParams,
        results: serde_json::Value,
        diagnostics: serde_json::Value,
    ) -> RunReport {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: "optomech",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: config.clone(),
            derived: DerivedSnapshot::of(params),
            results,
            diagnostics,
            started_unix_s: self.unix,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        }
    }
}
