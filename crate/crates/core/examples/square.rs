//! Dirichlet problem on the unit square with exponential-solution data.

use num_complex::Complex64;
use utm_core::evaluator::evaluate;
use utm_core::global_relation::{solve_dn_map, BoundaryCondition, BoundaryConditionSpec, CollocationConfig};
use utm_core::spectral::{exact_solution_traces, ExponentialSolution};
use utm_core::Polygon64;

fn main() -> Result<(), utm_core::Error> {
    let p = Polygon64::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])?;
    let mu = Complex64::new(1.3, 0.0);
    let data: Vec<_> = p.sides().iter().map(|s| exact_solution_traces(mu, s, 1.0, 24)).collect::<Result<_, _>>()?;
    let spec = BoundaryConditionSpec { sides: data.iter().map(|d| BoundaryCondition::Dirichlet(d.q.clone())).collect() };
    let solved = solve_dn_map(&p, 1.0, &spec, &CollocationConfig::default())?;
    let z = Complex64::new(0.5, 0.5);
    let q = evaluate(&p, 1.0, &solved.sides, z, 1e-10)?;
    let exact = ExponentialSolution::new(mu, 1.0)?.value(z);
    println!("residual {:.2e}, q(0.5, 0.5) = {q:.12}, error {:.2e}", solved.diagnostics.residual_max, (q - exact).norm());
    Ok(())
}
