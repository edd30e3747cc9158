//! Conservative second-order discretization of
//! `beta^{-1} r^{1-d} (alpha r^{d-1} u')'` shared by the time- and
//! frequency-domain solvers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::medium::MediumProfile;

/// Curvature coefficient of the radiation condition:
/// `(1 - [d = 1]) / (1 + [d = 2])`.
pub fn kappa(d: usize) -> f64 {
    match d {
        1 => 0.0,
        2 => 0.5,
        _ => 1.0,
    }
}

#[derive(Clone, Debug)]
pub struct RadialOperator {
    pub grid: RadialGrid,
    /// `alpha(r_{j+1/2}) r_{j+1/2}^{d-1}` for `j = 0..=n`.
    pub flux: Vec<f64>,
    /// `1 / (beta_j r_j^{d-1} dr^2)`; entry 0 unused.
    pub inv_weight: Vec<f64>,
    /// `2 d alpha(0) / (beta(0) dr^2)`: origin row from the symmetric stencil.
    pub origin: f64,
    /// Lumped mass `beta r^{d-1} dr`, with the origin cell matched to the flux.
    pub mass: Vec<f64>,
    pub c0: f64,
    pub kappa: f64,
}

impl RadialOperator {
    /// Fails unless the outer boundary lies in the homogeneous exterior.
    pub fn new(grid: RadialGrid, medium: &MediumProfile) -> Result<Self> {
        if grid.r_max <= medium.r_inhom {
            return Err(Error::Config(format!(
                "outer radius {} must exceed the inhomogeneity radius {}",
                grid.r_max, medium.r_inhom
            )));
        }
        let (n, d, dr) = (grid.n, grid.d, grid.dr());
        let p = d as i32 - 1;
        let flux: Vec<f64> = (0..=n)
            .map(|j| {
                let rh = (j as f64 + 0.5) * dr;
                medium.alpha(rh) * rh.powi(p)
            })
            .collect();
        let mut inv_weight = vec![0.0; n + 1];
        let mut mass = vec![0.0; n + 1];
        for j in 1..=n {
            let r = grid.r(j);
            let w = medium.beta(r) * r.powi(p);
            inv_weight[j] = 1.0 / (w * dr * dr);
            mass[j] = w * dr;
        }
        mass[n] *= 0.5;
        let (a0, b0) = (medium.alpha(0.0), medium.beta(0.0));
        let origin = 2.0 * d as f64 * a0 / (b0 * dr * dr);
        mass[0] = flux[0] / (dr * origin);
        Ok(RadialOperator {
            grid,
            flux,
            inv_weight,
            origin,
            mass,
            c0: medium.c0(),
            kappa: kappa(d),
        })
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    #[inline]
    pub fn apply_interior(&self, u: &[Complex64], j: usize) -> Complex64 {
        self.inv_weight[j] * (self.flux[j] * (u[j + 1] - u[j]) - self.flux[j - 1] * (u[j] - u[j - 1]))
    }

    /// Symmetric origin stencil `d alpha/beta * 2 (u_1 - u_0) / dr^2`.
    #[inline]
    pub fn apply_origin(&self, u: &[Complex64]) -> Complex64 {
        self.origin * (u[1] - u[0])
    }

    /// Coefficients `(A, B)` of the last row: `L u_n = A (u_{n+1} - u_n) - B (u_n - u_{n-1})`.
    pub fn boundary_coefficients(&self) -> (f64, f64) {
        let n = self.n();
        (self.inv_weight[n] * self.flux[n], self.inv_weight[n] * self.flux[n - 1])
    }

    pub fn apply_boundary(&self, u: &[Complex64], ghost: Complex64) -> Complex64 {
        let n = self.n();
        let (a, b) = self.boundary_coefficients();
        a * (ghost - u[n]) - b * (u[n] - u[n - 1])
    }

    /// Fills `out` with `L u` using `ghost` for the node beyond `r = R`.
    pub fn apply(&self, u: &[Complex64], ghost: Complex64, out: &mut [Complex64]) {
        let n = self.n();
        out[0] = self.apply_origin(u);
        for j in 1..n {
            out[j] = self.apply_interior(u, j);
        }
        out[n] = self.apply_boundary(u, ghost);
    }

    /// Largest node speed, used by the stability check.
    pub fn max_speed(grid: &RadialGrid, medium: &MediumProfile) -> f64 {
        grid.nodes().map(|r| medium.wave_speed(r)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_values() {
        assert_eq!((kappa(1), kappa(2), kappa(3)), (0.0, 0.5, 1.0));
    }

    #[test]
    fn origin_stencil_is_exact_on_even_quadratics() {
        let grid = RadialGrid::new(10.0, 100, 3).unwrap();
        let op = RadialOperator::new(grid, &MediumProfile::constant(1.0, 1.0)).unwrap();
        let u: Vec<Complex64> = grid.nodes().map(|r| Complex64::new(r * r, 0.0)).collect();
        // d * u''(0) with u'' = 2
        assert!((op.apply_origin(&u).re - 6.0).abs() < 1e-10);
        // radial Laplacian of r^2 is 2d; the d = 3 flux stencil adds dr^2 / (2 r^2)
        let dr = grid.dr();
        for j in 1..grid.n {
            let r = grid.r(j);
            let want = 6.0 + dr * dr / (2.0 * r * r);
            assert!((op.apply_interior(&u, j).re - want).abs() < 1e-9);
        }
    }

    #[test]
    fn benchmark_origin_speed() {
        for d in 1..=3 {
            let grid = RadialGrid::new(20.0, 200, d).unwrap();
            let op = RadialOperator::new(grid, &MediumProfile::benchmark()).unwrap();
            let dr = grid.dr();
            assert!((op.origin * dr * dr / 2.0 - 2.0 * d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_is_symmetric_in_the_mass_inner_product() {
        let grid = RadialGrid::new(12.0, 60, 2).unwrap();
        let op = RadialOperator::new(grid, &MediumProfile::benchmark()).unwrap();
        let n = grid.n;
        // rows 0..n-1 of M L form a symmetric matrix
        let entry = |i: usize, k: usize| -> f64 {
            let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
            e[k] = Complex64::new(1.0, 0.0);
            let l = if i == 0 {
                op.apply_origin(&e)
            } else {
                op.apply_interior(&e, i)
            };
            op.mass[i] * l.re
        };
        for i in 0..n - 1 {
            let s = (entry(i, i + 1) - entry(i + 1, i)).abs();
            assert!(s < 1e-12 * entry(i, i + 1).abs().max(1.0), "row {i}: {s}");
        }
    }

    #[test]
    fn boundary_must_lie_outside_inhomogeneity() {
        let grid = RadialGrid::new(6.0, 60, 3).unwrap();
        assert!(matches!(
            RadialOperator::new(grid, &MediumProfile::benchmark()),
            Err(Error::Config(_))
        ));
    }
}
