//! Experiment configuration: a single JSON document describing the lattice,
//! the theta field, the packet, the observable, reference sites, tolerances,
//! and the seed. A fixed seed makes every run fully deterministic.

use serde::{Deserialize, Serialize};

use scalegauge_core::{
    shift_theta, Boundary, Error as CoreError, Lattice, LinkExponentField, Observable, SiteId,
    ThetaField, WavePacket,
};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Everything the CLI reports exits with.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("report serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub extent: Vec<usize>,
    pub spacing: f64,
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
}

impl LatticeSpec {
    pub fn build(&self) -> CliResult<Lattice> {
        let lattice = match &self.origin {
            Some(origin) => Lattice::with_origin(
                self.extent.clone(),
                self.spacing,
                self.boundary,
                origin.clone(),
            )?,
            None => Lattice::new(self.extent.clone(), self.spacing, self.boundary)?,
        };
        Ok(lattice)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaSpec {
    Constant { c: f64 },
    Linear { slope: Vec<f64> },
    GaussianBump { center: Vec<f64>, width: f64, height: f64 },
    Explicit { values: Vec<f64> },
    /// Raw per-link exponents; only meaningful for path-product analysis.
    LinkExplicit { exponents: Vec<f64> },
}

impl ThetaSpec {
    /// True for specs that can be re-evaluated on a refined lattice.
    pub fn is_functional(&self) -> bool {
        !matches!(self, ThetaSpec::Explicit { .. } | ThetaSpec::LinkExplicit { .. })
    }

    pub fn build(&self, lattice: &Lattice, shift: f64) -> CliResult<ThetaField> {
        let theta = match self {
            ThetaSpec::Constant { c } => ThetaField::constant(lattice.clone(), *c)?,
            ThetaSpec::Linear { slope } => ThetaField::linear(lattice.clone(), slope)?,
            ThetaSpec::GaussianBump { center, width, height } => {
                ThetaField::gaussian_bump(lattice.clone(), center, *width, *height)?
            }
            ThetaSpec::Explicit { values } => ThetaField::new(lattice.clone(), values.clone())?,
            ThetaSpec::LinkExplicit { .. } => {
                return Err(CliError::Config(
                    "a link_explicit field has no theta; it is valid only for the \
                     path_independence experiment"
                        .into(),
                ))
            }
        };
        apply_shift(theta, shift)
    }

    pub fn build_links(&self, lattice: &Lattice, shift: f64) -> CliResult<LinkExponentField> {
        match self {
            ThetaSpec::LinkExplicit { exponents } => {
                Ok(LinkExponentField::explicit(lattice.clone(), exponents.clone())?)
            }
            other => Ok(LinkExponentField::from_theta(&other.build(lattice, shift)?)),
        }
    }
}

pub fn apply_shift(theta: ThetaField, shift: f64) -> CliResult<ThetaField> {
    if shift == 0.0 {
        Ok(theta)
    } else {
        Ok(shift_theta(&theta, shift)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PacketSpec {
    Gaussian { center: Vec<f64>, sigma: f64 },
    Delta { site: Vec<usize> },
    /// Amplitudes as [re, im] pairs; normalized on load.
    Explicit { amplitudes: Vec<[f64; 2]> },
}

impl PacketSpec {
    pub fn is_functional(&self) -> bool {
        !matches!(self, PacketSpec::Explicit { .. } | PacketSpec::Delta { .. })
    }

    pub fn build(&self, lattice: &Lattice) -> CliResult<WavePacket> {
        let packet = match self {
            PacketSpec::Gaussian { center, sigma } => {
                WavePacket::gaussian(lattice.clone(), center, *sigma)?
            }
            PacketSpec::Delta { site } => WavePacket::delta(lattice.clone(), &lattice.site(site)?)?,
            PacketSpec::Explicit { amplitudes } => {
                let amps = amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                WavePacket::normalized(lattice.clone(), amps)?
            }
        };
        Ok(packet)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// Seeded uniform values in [lo, hi).
    RandomBounded { lo: f64, hi: f64 },
    Explicit { values: Vec<f64> },
}

impl PotentialSpec {
    pub fn build(&self, lattice: &Lattice, seed: u64) -> CliResult<Vec<f64>> {
        let n = lattice.site_count();
        match self {
            PotentialSpec::Zero => Ok(vec![0.0; n]),
            PotentialSpec::RandomBounded { lo, hi } => {
                if !(lo < hi) {
                    return Err(CliError::Config(format!(
                        "potential range needs lo < hi, got [{lo}, {hi})"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..n).map(|_| rng.gen_range(*lo..*hi)).collect())
            }
            PotentialSpec::Explicit { values } => {
                if values.len() != n {
                    return Err(CliError::Config(format!(
                        "potential needs {n} values, got {}",
                        values.len()
                    )));
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableSpec {
    Position,
    Momentum {
        #[serde(default = "default_hbar")]
        hbar: f64,
    },
    Hamiltonian {
        #[serde(default = "default_hbar")]
        hbar: f64,
        mass: f64,
        potential: PotentialSpec,
    },
}

fn default_hbar() -> f64 {
    1.0
}

impl ObservableSpec {
    pub fn build(&self, lattice: &Lattice, seed: u64) -> CliResult<Observable> {
        let obs = match self {
            ObservableSpec::Position => Observable::position(lattice),
            ObservableSpec::Momentum { hbar } => Observable::momentum(lattice, *hbar)?,
            ObservableSpec::Hamiltonian { hbar, mass, potential } => {
                let v = potential.build(lattice, seed)?;
                Observable::hamiltonian(lattice, &v, *mass, *hbar)?
            }
        };
        Ok(obs)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObservableSpec::Position => "position",
            ObservableSpec::Momentum { .. } => "momentum",
            ObservableSpec::Hamiltonian { .. } => "hamiltonian",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Scale-aware relative tolerance for field-axiom residuals.
    pub axiom: f64,
    /// Relative tolerance for exact algebraic identities (cocycle, transfer).
    pub rel: f64,
    /// Tolerance for path products and loop closure.
    pub path: f64,
    /// Tolerance for eigen-residuals of the energy equation.
    pub eigen: f64,
    /// |r_{z,x} - 1| threshold defining region L.
    pub tol_r: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { axiom: 1e-9, rel: 1e-12, path: 1e-10, eigen: 1e-10, tol_r: 1e-3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub theta: ThetaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet: Option<PacketSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableSpec>,
    /// Site coordinates used as (y, x, z, ...) where an experiment needs
    /// reference sites; defaults are synthesized when absent.
    #[serde(default)]
    pub reference_sites: Vec<Vec<usize>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub seed: u64,
}

fn default_samples() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))?;
        if config.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        Ok(config)
    }

    /// Reference sites from the config, padded with evenly spaced defaults.
    pub fn reference_sites(&self, lattice: &Lattice, count: usize) -> CliResult<Vec<SiteId>> {
        let mut sites = Vec::with_capacity(count);
        for coords in self.reference_sites.iter().take(count) {
            sites.push(lattice.site(coords)?);
        }
        let n = lattice.site_count();
        let mut k = 0;
        while sites.len() < count {
            let index = (sites.len() + 1) * n / (count + 1) + k;
            let candidate = lattice.site_at(index % n);
            if !sites.contains(&candidate) {
                sites.push(candidate);
            } else {
                k += 1;
            }
        }
        Ok(sites)
    }
}

/// The eight named experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Axioms,
    Transport,
    PathIndependence,
    PacketScaling,
    MomentumGauge,
    EnergyEquation,
    RegionL,
    Protocol,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Axioms,
        Experiment::Transport,
        Experiment::PathIndependence,
        Experiment::PacketScaling,
        Experiment::MomentumGauge,
        Experiment::EnergyEquation,
        Experiment::RegionL,
        Experiment::Protocol,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Axioms => "axioms",
            Experiment::Transport => "transport",
            Experiment::PathIndependence => "path_independence",
            Experiment::PacketScaling => "packet_scaling",
            Experiment::MomentumGauge => "momentum_gauge",
            Experiment::EnergyEquation => "energy_equation",
            Experiment::RegionL => "region_L",
            Experiment::Protocol => "protocol",
        }
    }

    pub fn parse(name: &str) -> CliResult<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|e| e.name() == name)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{name}`")))
    }
}

/// A runnable default configuration for each experiment, used by `verify`.
pub fn default_config(experiment: Experiment, seed: u64) -> ExperimentConfig {
    let lattice_1d = LatticeSpec {
        extent: vec![256],
        spacing: 0.1,
        boundary: Boundary::Periodic,
        origin: None,
    };
    match experiment {
        Experiment::Axioms | Experiment::Protocol | Experiment::Transport => ExperimentConfig {
            lattice: lattice_1d,
            theta: ThetaSpec::GaussianBump { center: vec![12.8], width: 3.0, height: 0.4 },
            packet: None,
            observable: None,
            reference_sites: vec![vec![32], vec![128], vec![224]],
            tolerances: Tolerances::default(),
            samples: 1000,
            seed,
        },
        Experiment::PathIndependence => ExperimentConfig {
            lattice: LatticeSpec {
                extent: vec![16, 16],
                spacing: 0.1,
                boundary: Boundary::Periodic,
                origin: None,
            },
            theta: ThetaSpec::GaussianBump {
                center: vec![0.8, 0.8],
                width: 0.4,
                height: 0.5,
            },
            packet: None,
            observable: None,
            reference_sites: vec![],
            tolerances: Tolerances::default(),
            samples: 100,
            seed,
        },
        Experiment::PacketScaling => ExperimentConfig {
            lattice: lattice_1d,
            theta: ThetaSpec::Linear { slope: vec![0.05] },
            packet: Some(PacketSpec::Gaussian { center: vec![3.2], sigma: 0.5 }),
            observable: Some(ObservableSpec::Position),
            reference_sites: vec![vec![64], vec![16], vec![192]],
            tolerances: Tolerances::default(),
            samples: 1000,
            seed,
        },
        Experiment::MomentumGauge => ExperimentConfig {
            lattice: LatticeSpec {
                extent: vec![128],
                spacing: 0.1,
                boundary: Boundary::Periodic,
                origin: None,
            },
            theta: ThetaSpec::GaussianBump { center: vec![6.4], width: 1.5, height: 0.3 },
            packet: Some(PacketSpec::Gaussian { center: vec![6.4], sigma: 0.8 }),
            observable: None,
            reference_sites: vec![],
            tolerances: Tolerances::default(),
            samples: 1000,
            seed,
        },
        Experiment::EnergyEquation => ExperimentConfig {
            lattice: LatticeSpec {
                extent: vec![64],
                spacing: 1.0,
                boundary: Boundary::Periodic,
                origin: None,
            },
            theta: ThetaSpec::GaussianBump { center: vec![32.0], width: 8.0, height: 0.4 },
            packet: None,
            observable: Some(ObservableSpec::Hamiltonian {
                hbar: 1.0,
                mass: 1.0,
                potential: PotentialSpec::RandomBounded { lo: 0.0, hi: 1.0 },
            }),
            reference_sites: vec![vec![8], vec![48]],
            tolerances: Tolerances::default(),
            samples: 1000,
            seed,
        },
        Experiment::RegionL => ExperimentConfig {
            lattice: lattice_1d,
            theta: ThetaSpec::Linear { slope: vec![0.02] },
            packet: Some(PacketSpec::Gaussian { center: vec![3.2], sigma: 0.5 }),
            observable: None,
            reference_sites: vec![vec![200]],
            tolerances: Tolerances::default(),
            samples: 1000,
            seed,
        },
    }
}
