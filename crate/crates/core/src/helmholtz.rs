//! Radial Helmholtz problem `-omega^2 U - beta^{-1} r^{1-d} (alpha r^{d-1} U')' = F`
//! with the outgoing condition `U' = (i omega / c0 - kappa / R) U` at `r = R`.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, RadialGrid};
use crate::medium::{MediumProfile, SourceProfile};
use crate::operator::RadialOperator;

#[derive(Clone, Debug)]
pub struct HelmholtzSystem {
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
    pub rhs: Vec<Complex64>,
    pub grid: RadialGrid,
    pub omega: f64,
}

#[derive(Clone, Debug)]
pub struct HelmholtzSolution {
    pub u: Field,
    pub omega: f64,
    pub residual_norm: f64,
}

/// Builds the tridiagonal system; `lower[0]` and `upper[n]` are unused.
pub fn assemble(grid: RadialGrid, medium: &MediumProfile, source: &SourceProfile, omega: f64) -> Result<HelmholtzSystem> {
    if !(omega > 0.0) {
        return Err(Error::Config(format!("frequency must be positive (got {omega})")));
    }
    let op = RadialOperator::new(grid, medium)?;
    let n = grid.n;
    let dr = grid.dr();
    let w2 = Complex64::new(omega * omega, 0.0);
    let mut lower = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut diag = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut upper = vec![Complex64::new(0.0, 0.0); n + 1];

    diag[0] = -w2 + op.origin;
    upper[0] = Complex64::new(-op.origin, 0.0);
    for j in 1..n {
        let lo = op.inv_weight[j] * op.flux[j - 1];
        let up = op.inv_weight[j] * op.flux[j];
        lower[j] = Complex64::new(-lo, 0.0);
        upper[j] = Complex64::new(-up, 0.0);
        diag[j] = -w2 + (lo + up);
    }
    // ghost U_{n+1} = U_{n-1} + 2 dr gamma U_n
    let gamma = Complex64::new(-op.kappa / grid.r_max, omega / op.c0);
    let (a, b) = op.boundary_coefficients();
    lower[n] = Complex64::new(-(a + b), 0.0);
    diag[n] = -w2 + (a + b) - 2.0 * dr * gamma * a;

    let rhs = grid.nodes().map(|r| source.eval(r)).collect();
    Ok(HelmholtzSystem {
        lower,
        diag,
        upper,
        rhs,
        grid,
        omega,
    })
}

impl HelmholtzSystem {
    /// `max_j |(A x - rhs)_j|`.
    pub fn residual(&self, x: &[Complex64]) -> f64 {
        let n = self.grid.n;
        (0..=n)
            .map(|j| {
                let mut ax = self.diag[j] * x[j];
                if j > 0 {
                    ax += self.lower[j] * x[j - 1];
                }
                if j < n {
                    ax += self.upper[j] * x[j + 1];
                }
                (ax - self.rhs[j]).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Thomas elimination in complex arithmetic.
pub fn solve(sys: &HelmholtzSystem) -> Result<HelmholtzSolution> {
    let n = sys.grid.n;
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut y = vec![Complex64::new(0.0, 0.0); n + 1];
    let scale = sys.diag.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut pivot = sys.diag[0];
    for j in 0..=n {
        if j > 0 {
            pivot = sys.diag[j] - sys.lower[j] * c[j - 1];
        }
        if pivot.norm() <= f64::EPSILON * scale {
            return Err(Error::Singular { row: j });
        }
        if j < n {
            c[j] = sys.upper[j] / pivot;
        }
        let prev = if j > 0 {
            sys.lower[j] * y[j - 1]
        } else {
            Complex64::new(0.0, 0.0)
        };
        y[j] = (sys.rhs[j] - prev) / pivot;
    }
    for j in (0..n).rev() {
        let next = y[j + 1];
        y[j] -= c[j] * next;
    }
    let residual_norm = sys.residual(&y);
    Ok(HelmholtzSolution {
        u: Field {
            grid: sys.grid,
            values: y,
        },
        omega: sys.omega,
        residual_norm,
    })
}

/// Assembles and solves in one call.
pub fn solve_problem(grid: RadialGrid, medium: &MediumProfile, source: &SourceProfile) -> Result<HelmholtzSolution> {
    solve(&assemble(grid, medium, source, source.omega)?)
}

/// `r^{(d-1)/2} |U'(r) - i (omega/c0) U(r)|` sampled at the interior nodes with
/// `r > r_inhom`.
pub fn sommerfeld_defect(sol: &HelmholtzSolution, medium: &MediumProfile) -> Vec<(f64, f64)> {
    let grid = sol.u.grid;
    let u = &sol.u.values;
    let dr = grid.dr();
    let k = sol.omega / medium.c0();
    let p = 0.5 * (grid.d as f64 - 1.0);
    (1..grid.n)
        .filter(|&j| grid.r(j) > medium.r_inhom)
        .map(|j| {
            let r = grid.r(j);
            let du = (u[j + 1] - u[j - 1]) / (2.0 * dr);
            (r, r.powf(p) * (du - Complex64::new(0.0, k) * u[j]).norm())
        })
        .collect()
}

pub fn write_defect_csv<W: Write>(defect: &[(f64, f64)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "r,defect")?;
    for (r, v) in defect {
        writeln!(out, "{r:e},{v:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_norm_ball;

    #[test]
    fn zero_source_gives_zero_rhs_and_solution() {
        let grid = RadialGrid::new(20.0, 400, 3).unwrap();
        let src = SourceProfile::zero(1.0);
        let sys = assemble(grid, &MediumProfile::benchmark(), &src, 1.0).unwrap();
        assert!(sys.rhs.iter().all(|v| v.norm() == 0.0));
        let sol = solve(&sys).unwrap();
        assert!(sol.u.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn boundary_row_uses_curvature_term() {
        let grid = RadialGrid::new(120.0, 2000, 3).unwrap();
        let m = MediumProfile::benchmark();
        let w = std::f64::consts::PI / 4.0;
        let sys = assemble(grid, &m, &SourceProfile::benchmark(), w).unwrap();
        let n = grid.n;
        let dr = grid.dr();
        let op = RadialOperator::new(grid, &m).unwrap();
        let (a, b) = op.boundary_coefficients();
        let gamma = Complex64::new(-1.0 / 120.0, w);
        let want = -w * w + a + b - 2.0 * dr * gamma * a;
        assert!((sys.diag[n] - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn constant_medium_interior_rows_are_standard_stencil() {
        let grid = RadialGrid::new(10.0, 100, 1).unwrap();
        let sys = assemble(grid, &MediumProfile::constant(1.0, 1.0), &SourceProfile::benchmark(), 0.5).unwrap();
        let dr2 = grid.dr() * grid.dr();
        for j in 1..grid.n {
            assert!((sys.lower[j].re + 1.0 / dr2).abs() < 1e-9);
            assert!((sys.upper[j].re + 1.0 / dr2).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_is_small_and_solution_linear_in_source() {
        let grid = RadialGrid::new(120.0, 2000, 2).unwrap();
        let m = MediumProfile::benchmark();
        let s = SourceProfile::benchmark();
        let a = solve_problem(grid, &m, &s).unwrap();
        let rhs_max = s.profile.eval(4.0 / 3.0);
        assert!(a.residual_norm <= 1e-10 * rhs_max, "{}", a.residual_norm);
        let c = Complex64::new(-0.3, 2.0);
        let b = solve_problem(grid, &m, &s.scaled(c)).unwrap();
        let diff = Field {
            grid,
            values: a.u.values.iter().zip(&b.u.values).map(|(x, y)| x * c - y).collect(),
        };
        assert!(l2_norm_ball(&diff, 120.0).unwrap() < 1e-12 * l2_norm_ball(&b.u, 120.0).unwrap());
    }

    #[test]
    fn singular_pivot_reports_row() {
        let grid = RadialGrid::new(1.0, 2, 1).unwrap();
        let z = Complex64::new(0.0, 0.0);
        let sys = HelmholtzSystem {
            lower: vec![z; 3],
            diag: vec![Complex64::new(1.0, 0.0), z, Complex64::new(1.0, 0.0)],
            upper: vec![z; 3],
            rhs: vec![z; 3],
            grid,
            omega: 1.0,
        };
        assert!(matches!(solve(&sys), Err(Error::Singular { row: 1 })));
    }
}
