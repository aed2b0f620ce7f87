//! Numerical evaluation of Euclidean one-loop integrals
//!
//! ```text
//! I = pi^{-d/2} int_{R^d} d^d k / prod_i ((k + p_{1,i})^2 + m_i^2)^{nu_i}
//! ```
//!
//! Both backends compactify with `k_a = tan(theta_a)`, `theta in
//! (-pi/2, pi/2)^d`, Jacobian `prod sec^2(theta_a)`.

pub mod cubature;
pub mod qmc;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::graphs::{CutQuotientGraph, EdgeSet};
use crate::kinematics::{self, KinematicPoint, KinematicsError};
use crate::rational::{self, Rational};

pub use cubature::{CubatureOptions, CubatureResult};
pub use qmc::{QmcOptions, QmcResult};

/// Tolerance on the realised Gram residual.
const REALISE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegratorError {
    #[error("integral diverges: nu = {nu} <= d/2 = {half_d}")]
    Divergent { nu: u32, half_d: usize },
    #[error("kinematics are not Euclidean in dimension {0}")]
    NotEuclidean(usize),
    #[error("graph {0} has cut edges; only uncut graphs are integrated")]
    CutGraph(String),
    #[error("expected {expected} exponents (one per surviving edge), got {got}")]
    NuLength { expected: usize, got: usize },
    #[error("dimension d = {0} must be a positive even integer")]
    InvalidDimension(usize),
    #[error("adaptive quadrature supports d <= {max}, got {d}; use the QMC backend")]
    DimensionTooLarge { d: usize, max: usize },
    #[error("graph has {graph} edges but kinematics have {kinematics}")]
    SizeMismatch { graph: usize, kinematics: usize },
    #[error("graph is the point graph")]
    PointGraph,
    #[error("tolerance not reached: best value {value} with error {error}")]
    ToleranceNotReached { value: f64, error: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    AdaptiveQuadrature,
    QuasiMonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::AdaptiveQuadrature => "adaptive-quadrature",
            Method::QuasiMonteCarlo => "quasi-monte-carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quad" | "adaptive-quadrature" => Ok(Method::AdaptiveQuadrature),
            "mc" | "qmc" | "quasi-monte-carlo" => Ok(Method::QuasiMonteCarlo),
            other => Err(format!("unknown method {other:?} (expected quad or mc)")),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSpec {
    pub graph: CutQuotientGraph,
    pub d: usize,
    /// One exponent per surviving edge, in increasing edge order.
    pub nu: Vec<u32>,
    pub kinematics: KinematicPoint,
    pub method: Method,
    pub tol: f64,
    pub seed: u64,
}

impl IntegralSpec {
    pub fn new(graph: CutQuotientGraph, d: usize, nu: Vec<u32>, kinematics: KinematicPoint) -> Self {
        IntegralSpec {
            graph,
            d,
            nu,
            kinematics,
            method: Method::AdaptiveQuadrature,
            tol: 1e-8,
            seed: 0,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn total_nu(&self) -> u32 {
        self.nu.iter().sum()
    }

    /// Exponent of every parent edge, zero on pinched edges.
    pub fn parent_exponents(&self) -> Vec<u32> {
        let mut out = vec![0; self.graph.n()];
        for (e, &v) in self.graph.edges().iter().zip(&self.nu) {
            out[e - 1] = v;
        }
        out
    }

    pub fn validate(&self) -> Result<(), IntegratorError> {
        if self.d == 0 || self.d % 2 == 1 {
            return Err(IntegratorError::InvalidDimension(self.d));
        }
        if !self.graph.cuts().is_empty() {
            return Err(IntegratorError::CutGraph(self.graph.to_string()));
        }
        if self.graph.is_point() {
            return Err(IntegratorError::PointGraph);
        }
        if self.kinematics.n() != self.graph.n() {
            return Err(IntegratorError::SizeMismatch {
                graph: self.graph.n(),
                kinematics: self.kinematics.n(),
            });
        }
        if self.nu.len() != self.graph.num_edges() {
            return Err(IntegratorError::NuLength {
                expected: self.graph.num_edges(),
                got: self.nu.len(),
            });
        }
        if 2 * self.total_nu() as usize <= self.d {
            return Err(IntegratorError::Divergent {
                nu: self.total_nu(),
                half_d: self.d / 2,
            });
        }
        if self.method == Method::AdaptiveQuadrature && self.d > cubature::MAX_DIM {
            return Err(IntegratorError::DimensionTooLarge {
                d: self.d,
                max: cubature::MAX_DIM,
            });
        }
        Ok(())
    }
}

/// `prod_i ((k + P_i)^2 + m_i^2)^{-nu_i}` over the edges with `nu_i > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    d: usize,
    shifts: Vec<Vec<f64>>,
    m2: Vec<f64>,
    nu: Vec<i32>,
}

impl Integrand {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn eval(&self, k: &[f64]) -> f64 {
        let mut denom = 1.0;
        for ((p, m2), &nu) in self.shifts.iter().zip(&self.m2).zip(&self.nu) {
            let q: f64 = k.iter().zip(p).map(|(a, b)| (a + b) * (a + b)).sum();
            denom *= (q + m2).powi(nu);
        }
        1.0 / denom
    }

    /// Integrand after `k_a = tan(theta_a)`, Jacobian included.
    pub fn eval_compact(&self, theta: &[f64]) -> f64 {
        let mut k = [0.0; 8];
        let mut jac = 1.0;
        for (a, &t) in theta.iter().enumerate() {
            let c = t.cos();
            if c <= 0.0 {
                return 0.0;
            }
            k[a] = t.sin() / c;
            jac /= c * c;
        }
        let v = self.eval(&k[..theta.len()]) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    }
}

/// Builds the integrand from realised Euclidean momenta.
pub fn integrand(spec: &IntegralSpec) -> Result<Integrand, IntegratorError> {
    spec.validate()?;
    let realised = match kinematics::realize_momenta(&spec.kinematics, spec.d, REALISE_TOL) {
        Ok(r) => r,
        Err(KinematicsError::NotEuclidean(d)) => return Err(IntegratorError::NotEuclidean(d)),
        Err(e) => return Err(e.into()),
    };
    let partial = realised.partial_sums();
    let exps = spec.parent_exponents();
    let mut shifts = vec![];
    let mut m2 = vec![];
    let mut nu = vec![];
    for (i, &e) in exps.iter().enumerate() {
        if e > 0 {
            shifts.push(partial[i].clone());
            m2.push(rational::to_f64(spec.kinematics.mass_sq(i + 1)));
            nu.push(e as i32);
        }
    }
    Ok(Integrand {
        d: spec.d,
        shifts,
        m2,
        nu,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    #[serde(rename = "error")]
    pub error_estimate: f64,
    #[serde(rename = "n_evals")]
    pub n_evaluations: usize,
    pub method: Method,
    pub converged: bool,
}

impl IntegralResult {
    pub fn require_converged(self) -> Result<Self, IntegratorError> {
        if self.converged {
            Ok(self)
        } else {
            Err(IntegratorError::ToleranceNotReached {
                value: self.value,
                error: self.error_estimate,
            })
        }
    }
}

fn prefactor(d: usize) -> f64 {
    std::f64::consts::PI.powi(-(d as i32) / 2)
}

/// Evaluates the integral. A result that missed the tolerance is returned
/// with `converged = false`.
pub fn integrate(spec: &IntegralSpec) -> Result<IntegralResult, IntegratorError> {
    let f = integrand(spec)?;
    let d = spec.d;
    let pre = prefactor(d);
    let half_pi = std::f64::consts::FRAC_PI_2;
    match spec.method {
        Method::AdaptiveQuadrature => {
            let g = |theta: &[f64]| f.eval_compact(theta);
            let opts = CubatureOptions {
                rel_tol: spec.tol,
                ..Default::default()
            };
            let r = cubature::integrate_box(&g, &vec![-half_pi; d], &vec![half_pi; d], &opts);
            Ok(IntegralResult {
                value: pre * r.value,
                error_estimate: pre * r.error,
                n_evaluations: r.n_evals,
                method: spec.method,
                converged: r.converged,
            })
        }
        Method::QuasiMonteCarlo => {
            let vol = std::f64::consts::PI.powi(d as i32);
            let g = |u: &[f64]| {
                let mut theta = [0.0; 8];
                for (t, x) in theta.iter_mut().zip(u) {
                    *t = std::f64::consts::PI * (x - 0.5);
                }
                f.eval_compact(&theta[..u.len()])
            };
            let opts = QmcOptions {
                rel_tol: spec.tol,
                seed: spec.seed,
                ..Default::default()
            };
            let r = qmc::integrate_unit_cube(&g, d, &opts);
            Ok(IntegralResult {
                value: pre * vol * r.value,
                error_estimate: pre * vol * r.error,
                n_evaluations: r.n_evals,
                method: spec.method,
                converged: r.converged,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

fn rel_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Compares `I(lambda s, lambda m^2)` with `lambda^{d/2 - nu} I(s, m^2)`.
pub fn check_homogeneity(spec: &IntegralSpec, lambda: &Rational) -> Result<HomogeneityReport, IntegratorError> {
    let base = integrate(spec)?.require_converged()?;
    let scaled_spec = IntegralSpec {
        kinematics: spec.kinematics.scaled(lambda),
        ..spec.clone()
    };
    let lhs = integrate(&scaled_spec)?.require_converged()?.value;
    let power = (spec.d / 2) as i32 - spec.total_nu() as i32;
    let rhs = rational::to_f64(lambda).powi(power) * base.value;
    Ok(HomogeneityReport {
        lhs,
        rhs,
        rel_error: rel_error(lhs, rhs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientConsistencyReport {
    /// Parent integrand with zero exponents on the pinched edges.
    pub parent_path: f64,
    /// Reduced k-gon at merged kinematics.
    pub merged_path: f64,
    pub rel_error: f64,
}

/// Integrates `Gamma_n / pinched` two ways. `nu` lists the exponents of the
/// surviving edges.
pub fn check_quotient_consistency(
    k: &KinematicPoint,
    pinched: EdgeSet,
    d: usize,
    nu: &[u32],
    method: Method,
    tol: f64,
) -> Result<QuotientConsistencyReport, IntegratorError> {
    let graph = CutQuotientGraph::new(k.n(), pinched, EdgeSet::EMPTY)
        .map_err(|e| KinematicsError::IndexOutOfRange(e.to_string()))?;
    let a = IntegralSpec::new(graph, d, nu.to_vec(), k.clone())
        .with_method(method)
        .with_tol(tol);
    let parent_path = integrate(&a)?.require_converged()?.value;
    let merged = kinematics::merge_kinematics(k, pinched)?;
    let gon = CutQuotientGraph::n_gon(merged.n()).map_err(|e| KinematicsError::IndexOutOfRange(e.to_string()))?;
    let b = IntegralSpec::new(gon, d, nu.to_vec(), merged)
        .with_method(method)
        .with_tol(tol);
    let merged_path = integrate(&b)?.require_converged()?.value;
    Ok(QuotientConsistencyReport {
        parent_path,
        merged_path,
        rel_error: rel_error(parent_path, merged_path),
    })
}

/// `Gamma(d/2) / Gamma(d) * m^{-d}`: the exact value of the single
/// propagator integral with exponent `d`.
pub fn single_propagator_value(d: usize, m2: f64) -> f64 {
    // Gamma(d/2) / Gamma(d) for even d
    let h = d / 2;
    let num: f64 = (1..h).map(|i| i as f64).product();
    let den: f64 = (1..d).map(|i| i as f64).product();
    num / den * m2.powf(-(d as f64) / 2.0)
}
