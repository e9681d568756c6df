//! Run configuration (TOML). Every section is optional and falls back to the
//! library defaults; unknown keys are rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use virtphot::atom::AaBasis;
use virtphot::circuit::CircuitDesign;
use virtphot::design::SweepGrid;
use virtphot::dynamics::{EvolveOptions, Port, ProtocolParams};
use virtphot::eqr::{Interaction, LabelOptions};
use virtphot::exec::Parallelism;
use virtphot::measurement::MeasurementParams;
use virtphot::study::{StudyOptions, Truncation};

use crate::report::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "spectrum")]
    Spectrum,
    #[serde(rename = "merit")]
    Merit,
    #[serde(rename = "sweep")]
    Sweep,
    #[serde(rename = "dynamics")]
    Dynamics,
    #[serde(rename = "sweep-T")]
    SweepT,
    #[serde(rename = "measurement")]
    Measurement,
    #[serde(rename = "full-pipeline")]
    FullPipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSection {
    pub ej_over_ec1: f64,
    pub u11_over_ej: f64,
    pub g_over_wc: f64,
    pub wc_over_eps_eg: f64,
    pub l1_over_l: f64,
    /// E_J/2π in GHz, used for SI conversion.
    pub ej_ghz: f64,
}

impl Default for CircuitSection {
    fn default() -> Self {
        CircuitSection { ej_over_ec1: 0.9, u11_over_ej: 0.081, g_over_wc: 0.5, wc_over_eps_eg: 1.0, l1_over_l: 0.0, ej_ghz: 10.0 }
    }
}

impl CircuitSection {
    pub fn design(&self) -> CircuitDesign {
        CircuitDesign {
            wc_over_eps_eg: self.wc_over_eps_eg,
            l1_over_l: self.l1_over_l,
            ..CircuitDesign::new(self.ej_over_ec1, self.u11_over_ej, self.g_over_wc)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeritSection {
    /// Extra U11/E_J values evaluated at the circuit's E_J/E_C1 and g/ω_c.
    pub u11_values: Vec<f64>,
}

impl Default for MeritSection {
    fn default() -> Self {
        MeritSection { u11_values: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub variants: Vec<Interaction>,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection { variants: vec![Interaction::Full, Interaction::RotatingWave] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepTSection {
    pub omega0: f64,
    pub t_values: Vec<f64>,
    pub ports: Vec<Port>,
    pub variants: Vec<Interaction>,
}

impl Default for SweepTSection {
    fn default() -> Self {
        SweepTSection {
            omega0: 0.005,
            t_values: vec![250.0, 500.0, 1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 5000.0],
            ports: vec![Port::Q, Port::Gamma],
            variants: vec![Interaction::Full, Interaction::RotatingWave],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub plots: bool,
    /// Samples kept in trajectory CSVs.
    pub trajectory_samples: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into(), plots: true, trajectory_samples: 601 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub circuit: CircuitSection,
    #[serde(default)]
    pub basis: AaBasis,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub labels: LabelOptions,
    #[serde(default)]
    pub merit: MeritSection,
    #[serde(default)]
    pub protocol: ProtocolParams,
    #[serde(default)]
    pub evolve: EvolveOptions,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub sweep_t: SweepTSection,
    #[serde(default)]
    pub sweep: SweepGrid,
    #[serde(default)]
    pub measurement: MeasurementParams,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io("config", path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let v = |op: &'static str, r: virtphot::Result<()>| r.map_err(|e| CliError::core("config", op, e));
        v("circuit", self.circuit.design().validate())?;
        if !(self.circuit.ej_ghz > 0.0 && self.circuit.ej_ghz.is_finite()) {
            return Err(CliError::validation("circuit.ej_ghz must be positive"));
        }
        v("protocol", self.protocol.validate())?;
        v("sweep", self.sweep.validate())?;
        if self.sweep_t.t_values.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(CliError::validation("sweep_t.t_values must be positive"));
        }
        if !(self.sweep_t.omega0 > 0.0) {
            return Err(CliError::validation("sweep_t.omega0 must be positive"));
        }
        if self.dynamics.variants.iter().chain(&self.sweep_t.variants).any(|v| *v == Interaction::NumberConserving) {
            return Err(CliError::validation("dynamics variants must be `full` or `rotating_wave`"));
        }
        if self.output.dir.is_empty() {
            return Err(CliError::validation("output.dir must not be empty"));
        }
        Ok(())
    }

    pub fn study_options(&self) -> StudyOptions {
        StudyOptions { basis: self.basis, truncation: self.truncation, labels: self.labels }
    }

    pub fn parallelism(&self) -> Parallelism {
        Parallelism::from_threads(Some(self.threads))
    }

    /// Canonical JSON of the resolved configuration and its SHA-256.
    pub fn resolved(&self) -> (serde_json::Value, String) {
        let value = serde_json::to_value(self).expect("config serializes");
        let text = serde_json::to_string(&value).expect("json serializes");
        let hash = Sha256::digest(text.as_bytes());
        (value, format!("{hash:x}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse("command = \"spectrum\"").unwrap();
        assert_eq!(c.circuit, CircuitSection::default());
        assert_eq!(c.truncation.n_fock, 20);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = RunConfig::parse("command = \"spectrum\"\n[circuit]\nec3_over_ej = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("ec3_over_ej"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::parse("command = \"spectrum\"").unwrap();
        let b = RunConfig::parse("command = \"spectrum\"\n[circuit]\nu11_over_ej = 0.08\n").unwrap();
        assert_eq!(a.resolved().1, a.clone().resolved().1);
        assert_ne!(a.resolved().1, b.resolved().1);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::parse("command = \"dynamics\"\n[protocol]\nt_width = -1.0\n").is_err());
        assert!(RunConfig::parse("command = \"nope\"").is_err());
    }
}
