//! Numerical singularity theory for maps `h = g|K_f` from the link of an
//! isolated complex hypersurface singularity `f` into `ℂ = ℝ²`.
//!
//! The pipeline is: describe the link ([`LinkSpec`]) and the holomorphic map
//! ([`LinkMap`]); seed and trace the singular set `S(h)` by pseudo-arclength
//! continuation ([`singular_set`]); classify each fold component and check the
//! round-fold structure of its image ([`fold`]); recover Morse data of slices
//! and of composed functions `η∘h` ([`morse`]); and emit CSV, SVG and JSON
//! artifacts ([`report`]).
//!
//! ```no_run
//! use linkfold::{LinkMap, Tolerances};
//! use linkfold::singular_set::{collect_components, seed_singular_points};
//!
//! let map = LinkMap::brieskorn_a1(2);
//! let tol = Tolerances::default();
//! let seeds = seed_singular_points(&map, 200, 42, &tol).unwrap();
//! let components = collect_components(&seeds, &map, &tol);
//! assert_eq!(components.traces.len(), 2);
//! ```

pub mod error;
pub mod fold;
pub mod geometry;
pub mod linalg;
pub mod morse;
pub mod numdiff;
pub mod polynomial;
pub mod report;
pub mod singular_set;

pub use error::{Error, Result};
pub use geometry::{LinkSpec, TangentFrame};
pub use polynomial::{ComplexPoly, Point, PolyJet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Numerical knobs shared by the pipeline. Defaults are the documented ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Residual target for Newton and Gauss–Newton solves.
    pub newton: f64,
    /// Threshold on the normalized criterion defect σ₃/σ₁ (and on the direct test).
    pub singular: f64,
    /// Central-difference step (relative to ε) for Hessians.
    pub hessian_step: f64,
    /// Relative eigenvalue dead band for Morse and fold classification.
    pub dead_band: f64,
    /// Central-difference step (relative to ε) for first derivatives.
    pub jacobian_step: f64,
    /// Continuation step bounds and initial step, relative to ε.
    pub step_min: f64,
    pub step_max: f64,
    pub step_init: f64,
    /// Maximum continuation steps before a trace is reported as open.
    pub max_trace_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            newton: 1e-12,
            singular: 1e-8,
            hessian_step: 1e-4,
            dead_band: 1e-5,
            jacobian_step: 1e-5,
            step_min: 1e-4,
            step_max: 1e-1,
            step_init: 5e-2,
            max_trace_steps: 20_000,
        }
    }
}

/// The smooth map `h = g|K_f : K_f → ℂ`.
#[derive(Debug, Clone)]
pub struct LinkMap {
    pub link: LinkSpec,
    pub g: PolyJet,
}

impl LinkMap {
    pub fn new(link: LinkSpec, g: ComplexPoly) -> Result<Self> {
        if g.n_vars() != link.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: link.ambient_dim(),
                got: g.n_vars(),
            });
        }
        Ok(LinkMap {
            link,
            g: PolyJet::new(g),
        })
    }

    /// `f = Σ z_j²` on the unit sphere with `g = z1 + (i/2) z2`.
    pub fn brieskorn_a1(n: usize) -> Self {
        let g = ComplexPoly::parse("z1 + 0.5i*z2", n + 1).expect("linear form parses");
        LinkMap::new(LinkSpec::a1(n), g).expect("dimensions agree")
    }

    pub fn n(&self) -> usize {
        self.link.n()
    }

    pub fn epsilon(&self) -> f64 {
        self.link.epsilon()
    }

    /// `h(z) = g(z)`.
    pub fn h(&self, z: &[Complex64]) -> Complex64 {
        self.g.value(z)
    }

    /// `h(z)` as a point of ℝ².
    pub fn h_real(&self, z: &[Complex64]) -> [f64; 2] {
        let v = self.h(z);
        [v.re, v.im]
    }
}
