//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use cubeq_core::lattice::Layout;
use cubeq_core::rmatrix::{Convention, RMatrixFour};
use cubeq_core::tensor::{DenseJson, DenseTensor};
use cubeq_core::{PauliOperator, Variable};

use crate::CliError;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_GRID_POINTS: usize = 20;
pub const GRID_RADIUS: f64 = 2.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    #[default]
    Exact,
    Dense,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneOrder {
    /// `T_white · T_dark`.
    #[default]
    WhiteFirst,
    DarkFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Named {
    KitaevA,
    KitaevB,
    KitaevAInv,
    Identity,
    Swap,
}

/// One R-matrix: exactly one of `pauli`, `dense`, `file`, `named`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub pauli: Option<String>,
    pub dense: Option<DenseJson>,
    /// Dense JSON (`.json`) or Pauli text (anything else).
    pub file: Option<PathBuf>,
    pub named: Option<Named>,
    #[serde(default)]
    pub param: Option<Variable>,
    #[serde(default)]
    pub convention: Convention,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quad {
    pub r1: Option<MatrixSpec>,
    pub r2: Option<MatrixSpec>,
    pub r3: Option<MatrixSpec>,
    pub r4: Option<MatrixSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub d: usize,
    pub backend: Option<BackendChoice>,
    pub tolerance: Option<f64>,
    pub grid_points: Option<usize>,
    pub grid: Option<Vec<[f64; 2]>>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub swap_uv_assignment: bool,
    pub leg_order: Option<[usize; 4]>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[serde(default)]
    pub layout: Layout,
    #[serde(default)]
    pub plane_order: PlaneOrder,
    pub power: Option<u32>,
    pub u: Option<f64>,
    pub v: Option<f64>,
    #[serde(default)]
    pub r_matrices: Quad,
    pub white: Option<MatrixSpec>,
    pub dark: Option<MatrixSpec>,
    pub r: Option<MatrixSpec>,
    pub max_iterations: Option<usize>,
    pub residual_tolerance: Option<f64>,
    pub stall_tolerance: Option<f64>,
    pub emit_transfer: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            d: 2,
            backend: None,
            tolerance: None,
            grid_points: None,
            grid: None,
            seed: None,
            seeds: None,
            swap_uv_assignment: false,
            leg_order: None,
            l: None,
            layout: Layout::default(),
            plane_order: PlaneOrder::default(),
            power: None,
            u: None,
            v: None,
            r_matrices: Quad::default(),
            white: None,
            dark: None,
            r: None,
            max_iterations: None,
            residual_tolerance: None,
            stall_tolerance: None,
            emit_transfer: None,
            base_dir: PathBuf::from("."),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let mut config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let inner = e.into_inner();
            if key == "." {
                CliError::Config(format!("{}: {inner}", path.display()))
            } else {
                CliError::Config(format!("{}: key `{key}`: {inner}", path.display()))
            }
        })?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, why: &str| Err(CliError::Config(format!("key `{key}`: {why}")));
        if self.d < 2 {
            return bad("d", "must be at least 2");
        }
        if let Some(t) = self.tolerance {
            if t.is_nan() || t <= 0.0 {
                return bad("tolerance", "must be positive");
            }
        }
        if self.grid_points == Some(0) {
            return bad("grid_points", "must be at least 1");
        }
        if let Some(grid) = &self.grid {
            if grid.is_empty() {
                return bad("grid", "must not be empty");
            }
        }
        if let Some(seeds) = &self.seeds {
            if seeds.is_empty() {
                return bad("seeds", "must not be empty");
            }
        }
        if let Some(order) = self.leg_order {
            let mut sorted = order;
            sorted.sort_unstable();
            if sorted != [0, 1, 2, 3] {
                return bad("leg_order", "must be a permutation of 0..4");
            }
        }
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_TOLERANCE)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn point(&self) -> (C64, C64) {
        (
            C64::new(self.u.unwrap_or(0.3), 0.0),
            C64::new(self.v.unwrap_or(0.7), 0.0),
        )
    }

    pub fn lattice_width(&self) -> usize {
        self.l.unwrap_or(4)
    }

    /// Explicit grid, or seeded uniform points in `[-2, 2]^2`.
    pub fn grid(&self) -> Vec<(C64, C64)> {
        if let Some(grid) = &self.grid {
            return grid
                .iter()
                .map(|&[u, v]| (C64::new(u, 0.0), C64::new(v, 0.0)))
                .collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed());
        (0..self.grid_points.unwrap_or(DEFAULT_GRID_POINTS))
            .map(|_| {
                let u = rng.random_range(-GRID_RADIUS..=GRID_RADIUS);
                let v = rng.random_range(-GRID_RADIUS..=GRID_RADIUS);
                (C64::new(u, 0.0), C64::new(v, 0.0))
            })
            .collect()
    }

    pub fn matrix(&self, key: &str, spec: &MatrixSpec) -> Result<RMatrixFour, CliError> {
        let err = |why: String| CliError::Config(format!("key `{key}`: {why}"));
        let given = [
            spec.pauli.is_some(),
            spec.dense.is_some(),
            spec.file.is_some(),
            spec.named.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(err("give exactly one of pauli, dense, file, named".into()));
        }
        let param = spec.param.unwrap_or(Variable::U);
        let from_pauli = |text: &str| -> Result<RMatrixFour, CliError> {
            if self.d != 2 {
                return Err(err(format!(
                    "Pauli text needs d = 2, config has d = {}",
                    self.d
                )));
            }
            let op: PauliOperator = text.parse().map_err(|e| err(format!("{e}")))?;
            RMatrixFour::from_pauli(op, spec.convention).map_err(|e| err(e.to_string()))
        };
        let from_dense = |m: DenseTensor| {
            RMatrixFour::from_dense(m, self.d, spec.convention).map_err(|e| err(e.to_string()))
        };
        if let Some(text) = &spec.pauli {
            return from_pauli(text);
        }
        if let Some(json) = &spec.dense {
            return from_dense(DenseTensor::from_json(json).map_err(|e| err(e.to_string()))?);
        }
        if let Some(file) = &spec.file {
            let path = self.base_dir.join(file);
            let text = fs::read_to_string(&path)
                .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
            return if path.extension().is_some_and(|e| e == "json") {
                from_dense(
                    text.parse()
                        .map_err(|e: cubeq_core::Error| err(e.to_string()))?,
                )
            } else {
                from_pauli(&text)
            };
        }
        let named = spec.named.expect("one source is set");
        let m = match named {
            Named::KitaevA => RMatrixFour::kitaev_a(param),
            Named::KitaevB => RMatrixFour::kitaev_b(param),
            Named::KitaevAInv => RMatrixFour::kitaev_a_inv(param),
            Named::Identity if self.d == 2 => RMatrixFour::identity_pauli(),
            Named::Identity => {
                RMatrixFour::identity_dense(self.d).map_err(|e| err(e.to_string()))?
            }
            Named::Swap => return Err(err("`swap` names a two-site matrix".into())),
        };
        if self.d != 2 {
            return Err(err(format!("{named:?} needs d = 2")));
        }
        Ok(m)
    }

    /// Two-site matrix for the Yang-Baxter check.
    pub fn two_site(&self, spec: &MatrixSpec) -> Result<DenseTensor, CliError> {
        let err = |why: String| CliError::Config(format!("key `r`: {why}"));
        let m = if let Some(Named::Swap) = spec.named {
            cubeq_core::tensor::permutation_operator(&[1, 0], self.d)
                .map_err(|e| err(e.to_string()))?
        } else if let Some(Named::Identity) = spec.named {
            DenseTensor::identity(self.d * self.d)
        } else if let Some(json) = &spec.dense {
            DenseTensor::from_json(json).map_err(|e| err(e.to_string()))?
        } else if let Some(file) = &spec.file {
            let path = self.base_dir.join(file);
            let text = fs::read_to_string(&path)
                .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
            text.parse()
                .map_err(|e: cubeq_core::Error| err(e.to_string()))?
        } else if let Some(text) = &spec.pauli {
            let op: PauliOperator = text.parse().map_err(|e| err(format!("{e}")))?;
            op.evaluate_dense(C64::new(self.point().0.re, 0.0), self.point().1)
                .map_err(|e| err(e.to_string()))?
        } else {
            return Err(err(
                "give one of pauli, dense, file, or named swap/identity".into(),
            ));
        };
        Ok(m)
    }
}
