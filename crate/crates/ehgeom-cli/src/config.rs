//! Run configuration loaded from JSON and adjusted by command-line flags.

use std::path::{Path, PathBuf};

use ehgeom::curves::CurveSpec;
use ehgeom::spectral::AxisRange;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Chart grid swept by the point-wise commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_s_range")]
    pub s: AxisRange,
    #[serde(default = "default_rho_range")]
    pub rho: AxisRange,
    #[serde(default = "default_phi_range")]
    pub phi: AxisRange,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { s: default_s_range(), rho: default_rho_range(), phi: default_phi_range() }
    }
}

fn default_s_range() -> AxisRange {
    AxisRange { min: 0.0, max: 6.0, count: 4 }
}

fn default_rho_range() -> AxisRange {
    AxisRange { min: 0.5, max: 2.0, count: 4 }
}

fn default_phi_range() -> AxisRange {
    AxisRange { min: 0.0, max: 0.0, count: 1 }
}

/// Numerical tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Target accuracy of the fiber quadratures.
    #[serde(default = "default_quad_tol")]
    pub quad: f64,
    /// Local error target of the ODE integrators.
    #[serde(default = "default_ode_tol")]
    pub ode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quad: default_quad_tol(), ode: default_ode_tol() }
    }
}

fn default_quad_tol() -> f64 {
    1e-9
}

fn default_ode_tol() -> f64 {
    1e-10
}

/// Initial data of the `geodesic` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeodesicInit {
    /// Arbitrary chart position and velocity.
    State {
        position: [f64; 3],
        velocity: [f64; 3],
        #[serde(default = "default_tau_end")]
        tau_end: f64,
    },
    /// Unit-speed geodesic running from `rho0` straight to the zero section.
    Radial { rho0: f64 },
    /// Torus geodesic with winding `(n, m)` at fiber radius `rho0`, run for
    /// one period.
    Closed { rho0: f64, n: i64, m: i64 },
}

impl Default for GeodesicInit {
    fn default() -> Self {
        GeodesicInit::State { position: [0.3, 1.2, 0.1], velocity: [0.4, 0.2, -0.3], tau_end: default_tau_end() }
    }
}

fn default_tau_end() -> f64 {
    10.0
}

/// Spinor field scanned by the `spinor` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpinorSpec {
    /// `(C1, C2) / (rho sqrt(r^2 + 1))` with complex constants `[re, im]`.
    Constant {
        #[serde(default = "default_c1")]
        c1: [f64; 2],
        #[serde(default = "default_c2")]
        c2: [f64; 2],
    },
    /// Harmonic spinor of fiber weight `beta` over the configured circle.
    Beta {
        beta: i64,
        #[serde(default = "default_c1")]
        b1: [f64; 2],
        #[serde(default = "default_c1")]
        b2: [f64; 2],
    },
    /// Explicit WK spinor of WK number `lambda`, defined at `t = 0`.
    Wk,
}

impl Default for SpinorSpec {
    fn default() -> Self {
        SpinorSpec::Constant { c1: default_c1(), c2: default_c2() }
    }
}

fn default_c1() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_c2() -> [f64; 2] {
    [0.0, 1.0]
}

/// Settings of the `spectral` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    /// Values of `eps` for the Dirac Rayleigh quotient.
    #[serde(default = "default_dirac_eps")]
    pub dirac_eps: Vec<f64>,
}

impl Default for SpectralSpec {
    fn default() -> Self {
        Self { dirac_eps: default_dirac_eps() }
    }
}

fn default_dirac_eps() -> Vec<f64> {
    vec![0.3, 0.2, 0.1]
}

/// Where and how results are written.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output file; standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Encoding; each command has its own default when absent.
    #[serde(default)]
    pub format: Option<Format>,
}

/// Complete configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_curve")]
    pub curve: CurveSpec,
    #[serde(default = "default_one")]
    pub t: f64,
    #[serde(default = "default_one")]
    pub eps: f64,
    #[serde(default = "default_one")]
    pub lambda: f64,
    /// Slope of the Dirac bound; `0.01 t` when absent.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub geodesic: GeodesicInit,
    #[serde(default)]
    pub spinor: SpinorSpec,
    #[serde(default)]
    pub spectral: SpectralSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_curve() -> CurveSpec {
    CurveSpec::Circle { r0: 1.0, eps: 1, phase: 0.0 }
}

fn default_one() -> f64 {
    1.0
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            curve: default_curve(),
            t: 1.0,
            eps: 1.0,
            lambda: 1.0,
            a: None,
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            geodesic: GeodesicInit::default(),
            spinor: SpinorSpec::default(),
            spectral: SpectralSpec::default(),
            output: OutputSpec::default(),
        }
    }
}

/// Flag values that override the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub t: Option<f64>,
    pub eps: Option<f64>,
    pub lambda: Option<f64>,
    pub tol: Option<f64>,
}

impl RunConfig {
    /// Reads a configuration file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Applies command-line overrides; `--tol` sets both tolerances.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.out {
            self.output.path = Some(p.clone());
        }
        if let Some(f) = o.format {
            self.output.format = Some(f);
        }
        if let Some(t) = o.t {
            self.t = t;
        }
        if let Some(e) = o.eps {
            self.eps = e;
        }
        if let Some(l) = o.lambda {
            self.lambda = l;
        }
        if let Some(tol) = o.tol {
            self.tolerances = Tolerances { quad: tol, ode: tol };
        }
    }

    /// Slope of the Dirac bound.
    pub fn slope(&self) -> f64 {
        self.a.unwrap_or(0.01 * self.t)
    }

    /// Checks ranges, counts and tolerances.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return bad(format!("t must be finite and nonnegative, got {}", self.t));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !self.lambda.is_finite() {
            return bad(format!("lambda must be finite, got {}", self.lambda));
        }
        if let Some(a) = self.a {
            if !(a > 0.0) {
                return bad(format!("a must be positive, got {a}"));
            }
        }
        for (name, r) in [("s", &self.grid.s), ("rho", &self.grid.rho), ("phi", &self.grid.phi)] {
            if r.count < 1 {
                return bad(format!("grid.{name}.count must be at least 1"));
            }
            if !(r.min.is_finite() && r.max.is_finite()) || r.max < r.min {
                return bad(format!("grid.{name} must satisfy min <= max, got [{}, {}]", r.min, r.max));
            }
        }
        if !(self.grid.rho.min > 0.0) {
            return bad(format!("grid.rho.min must be positive, got {}", self.grid.rho.min));
        }
        if !(self.grid.s.min >= 0.0) {
            return bad(format!("grid.s.min must be nonnegative, got {}", self.grid.s.min));
        }
        for (name, v) in [("quad", self.tolerances.quad), ("ode", self.tolerances.ode)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("tolerances.{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.spectral.dirac_eps.iter().any(|e| !(*e > 0.0)) {
            return bad("spectral.dirac_eps entries must be positive".into());
        }
        Ok(())
    }
}
