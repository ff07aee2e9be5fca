//! JSON problem and solution files.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use utm_core::boundary_data::{BoundaryDatum, Endpoint};
use utm_core::geometry::Polygon;
use utm_core::global_relation::{BoundaryCondition, BoundaryConditionSpec, CollocationConfig, SolveDiagnostics};
use utm_core::spectral::SideData;

use crate::CliError;

/// `[re, im]`.
pub type ComplexJson = [f64; 2];

fn cx(c: ComplexJson) -> Complex64 {
    Complex64::new(c[0], c[1])
}

fn from_cx(c: Complex64) -> ComplexJson {
    [c.re, c.im]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndpointJson {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaJson {
    pub endpoint: EndpointJson,
    #[serde(default)]
    pub order: usize,
    pub weight: ComplexJson,
}

/// Legendre coefficients on `[0, 1]` plus endpoint charges.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumJson {
    #[serde(default)]
    pub legendre: Vec<ComplexJson>,
    #[serde(default)]
    pub deltas: Vec<DeltaJson>,
}

impl DatumJson {
    pub fn to_datum(&self) -> Result<BoundaryDatum<f64>, CliError> {
        let mut d = BoundaryDatum::from_coeffs(self.legendre.iter().map(|&c| cx(c)).collect());
        for m in &self.deltas {
            let e = match m.endpoint {
                EndpointJson::Start => Endpoint::Start,
                EndpointJson::End => Endpoint::End,
            };
            d = d.with_mass(e, m.order, cx(m.weight))?;
        }
        Ok(d)
    }

    pub fn from_datum(d: &BoundaryDatum<f64>) -> Self {
        Self {
            legendre: d.smooth.coeffs.iter().map(|&c| from_cx(c)).collect(),
            deltas: d
                .masses
                .iter()
                .map(|m| DeltaJson {
                    endpoint: match m.endpoint {
                        Endpoint::Start => EndpointJson::Start,
                        Endpoint::End => EndpointJson::End,
                    },
                    order: m.order,
                    weight: from_cx(m.weight),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    Dirichlet,
    Neumann,
    Robin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideBcJson {
    pub kind: BcKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub data: DatumJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverJson {
    pub modes: usize,
    pub points_per_ray: usize,
    pub ray_halfwidth: f64,
    pub rank_tol: f64,
    pub validation_tol: f64,
    pub accept_rank_deficient: bool,
    pub vertex_delta_unknowns: bool,
}

impl Default for SolverJson {
    fn default() -> Self {
        let c = CollocationConfig::<f64>::default();
        Self {
            modes: c.modes_per_side,
            points_per_ray: c.points_per_ray,
            ray_halfwidth: c.ray_halfwidth,
            rank_tol: c.rank_tol,
            validation_tol: c.validation_tol,
            accept_rank_deficient: c.accept_rank_deficient,
            vertex_delta_unknowns: c.vertex_delta_unknowns,
        }
    }
}

impl SolverJson {
    pub fn config(&self) -> CollocationConfig<f64> {
        CollocationConfig {
            modes_per_side: self.modes,
            points_per_ray: self.points_per_ray,
            ray_halfwidth: self.ray_halfwidth,
            rank_tol: self.rank_tol,
            validation_tol: self.validation_tol,
            accept_rank_deficient: self.accept_rank_deficient,
            vertex_delta_unknowns: self.vertex_delta_unknowns,
            ..CollocationConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Solution,
    Diagnostics,
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Solution, OutputKind::Diagnostics]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    /// Counterclockwise `[x, y]` pairs.
    pub vertices: Vec<[f64; 2]>,
    pub beta: f64,
    /// Side `i` joins vertex `i` to vertex `i + 1`.
    pub sides: Vec<SideBcJson>,
    #[serde(default)]
    pub solver: SolverJson,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
}

pub fn polygon_from(vertices: &[[f64; 2]]) -> Result<Polygon<f64>, CliError> {
    let pts: Vec<(f64, f64)> = vertices.iter().map(|v| (v[0], v[1])).collect();
    Ok(Polygon::from_xy(&pts)?)
}

fn check_beta(beta: f64) -> Result<(), CliError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(CliError::Schema(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

impl ProblemFile {
    pub fn polygon(&self) -> Result<Polygon<f64>, CliError> {
        check_beta(self.beta)?;
        let p = polygon_from(&self.vertices)?;
        if self.sides.len() != p.len() {
            return Err(CliError::Schema(format!("{} sides given for {} vertices", self.sides.len(), p.len())));
        }
        Ok(p)
    }

    pub fn conditions(&self) -> Result<BoundaryConditionSpec<f64>, CliError> {
        let sides = self
            .sides
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let data = s.data.to_datum()?;
                match (s.kind, s.gamma) {
                    (BcKind::Dirichlet, None) => Ok(BoundaryCondition::Dirichlet(data)),
                    (BcKind::Neumann, None) => Ok(BoundaryCondition::Neumann(data)),
                    (BcKind::Robin, Some(gamma)) => Ok(BoundaryCondition::Robin { gamma, data }),
                    (BcKind::Robin, None) => Err(CliError::Schema(format!("side {i}: robin condition needs gamma"))),
                    (_, Some(_)) => Err(CliError::Schema(format!("side {i}: gamma is only valid for robin"))),
                }
            })
            .collect::<Result<_, CliError>>()?;
        Ok(BoundaryConditionSpec { sides })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSolutionJson {
    pub q: DatumJson,
    pub dq: DatumJson,
}

/// Full boundary data, as written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub vertices: Vec<[f64; 2]>,
    pub beta: f64,
    pub sides: Vec<SideSolutionJson>,
}

impl SolutionFile {
    pub fn from_sides(vertices: &[[f64; 2]], beta: f64, sides: &[SideData<f64>]) -> Self {
        Self {
            vertices: vertices.to_vec(),
            beta,
            sides: sides.iter().map(|s| SideSolutionJson { q: DatumJson::from_datum(&s.q), dq: DatumJson::from_datum(&s.dq) }).collect(),
        }
    }

    pub fn load(&self) -> Result<(Polygon<f64>, Vec<SideData<f64>>), CliError> {
        check_beta(self.beta)?;
        let p = polygon_from(&self.vertices)?;
        if self.sides.len() != p.len() {
            return Err(CliError::Schema(format!("{} sides given for {} vertices", self.sides.len(), p.len())));
        }
        let data = p
            .sides()
            .iter()
            .zip(&self.sides)
            .map(|(side, s)| Ok(SideData { side: *side, q: s.q.to_datum()?, dq: s.dq.to_datum()? }))
            .collect::<Result<_, CliError>>()?;
        Ok((p, data))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    pub residual_max: f64,
    pub lsq_residual: f64,
    /// `null` when the matrix is singular.
    pub condition: Option<f64>,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub requested_tol: f64,
    pub status: String,
}

impl DiagnosticsJson {
    pub fn new(d: &SolveDiagnostics, requested_tol: f64, status: &str) -> Self {
        Self {
            residual_max: d.residual_max,
            lsq_residual: d.lsq_residual,
            condition: d.condition.is_finite().then_some(d.condition),
            rows: d.rows,
            cols: d.cols,
            rank: d.rank,
            requested_tol,
            status: status.to_string(),
        }
    }
}
