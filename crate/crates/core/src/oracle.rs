//! Closed-form and quadrature solutions of constant-coefficient problems,
//! used as independent references for the grid solvers.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::{MediumProfile, SourceProfile};
use crate::quad::{simpson, Quadrature};
use crate::special::{bessel_j0, hankel_h1_0};

pub type RadialFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Radial Cauchy data `(v0, v1)` for `v_tt = c0^2 Laplace v` in dimension `d`.
/// `dv0` is the radial derivative of `v0`; it is required by the Kirchhoff
/// formula at the origin and by the Poisson formula.
#[derive(Clone)]
pub struct CauchyData {
    pub v0: RadialFn,
    pub v1: RadialFn,
    pub dv0: Option<RadialFn>,
    pub c0: f64,
    pub d: usize,
    /// Radii where the data are not smooth; used to seed quadrature panels.
    pub breaks: Vec<f64>,
}

impl std::fmt::Debug for CauchyData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CauchyData")
            .field("c0", &self.c0)
            .field("d", &self.d)
            .field("breaks", &self.breaks)
            .finish_non_exhaustive()
    }
}

impl CauchyData {
    pub fn new(v0: RadialFn, v1: RadialFn, c0: f64, d: usize) -> Self {
        CauchyData {
            v0,
            v1,
            dv0: None,
            c0,
            d,
            breaks: Vec::new(),
        }
    }

    pub fn with_derivative(mut self, dv0: RadialFn) -> Self {
        self.dv0 = Some(dv0);
        self
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn zero(c0: f64, d: usize) -> Self {
        let z: RadialFn = Arc::new(|_| ZERO);
        CauchyData::new(z.clone(), z.clone(), c0, d).with_derivative(z)
    }

    /// `v0 = a0 exp(-((r - center)/width)^2)`, `v1 = a1 exp(-((r - center)/width)^2)`.
    pub fn gaussian(a0: Complex64, a1: Complex64, center: f64, width: f64, c0: f64, d: usize) -> Self {
        let g = move |r: f64| (-((r - center) / width).powi(2)).exp();
        let dg = move |r: f64| -2.0 * (r - center) / (width * width) * g(r);
        CauchyData::new(Arc::new(move |r| a0 * g(r)), Arc::new(move |r| a1 * g(r)), c0, d)
            .with_derivative(Arc::new(move |r| a0 * dg(r)))
    }

    fn derivative(&self) -> Result<&RadialFn> {
        self.dv0
            .as_ref()
            .ok_or_else(|| Error::Config("oracle needs the radial derivative of v0".into()))
    }

    /// Interval `[lo, hi]` split at the stored break radii that fall inside it.
    fn panels(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = vec![lo];
        pts.extend(self.breaks.iter().copied().filter(|&b| b > lo && b < hi));
        pts.push(hi);
        pts
    }
}

fn quadrature() -> Quadrature {
    Quadrature {
        abs_tol: 1e-11,
        rel_tol: 1e-11,
        max_panels: 20_000,
    }
}

/// One-dimensional solution for data extended evenly to the whole line.
pub fn dalembert(data: &CauchyData, x: f64, t: f64) -> Result<Complex64> {
    if data.d != 1 {
        return Err(Error::Domain(format!("d'Alembert needs d = 1, got {}", data.d)));
    }
    let c = data.c0;
    let (a, b) = (x - c * t, x + c * t);
    let mut v = 0.5 * ((data.v0)(a.abs()) + (data.v0)(b.abs()));
    if t != 0.0 {
        let mut pts = vec![a];
        let mut inner: Vec<f64> = data.breaks.iter().flat_map(|&r| [-r, r]).chain([0.0]).collect();
        inner.sort_by(f64::total_cmp);
        pts.extend(inner.into_iter().filter(|&p| p > a && p < b));
        pts.push(b);
        let v1 = &data.v1;
        v += quadrature().integrate_with_breaks(|s| v1(s.abs()), &pts)?.value / (2.0 * c);
    }
    Ok(v)
}

/// Spherical mean of a radial function over the sphere of radius `rho`
/// centred at distance `r` from the origin (d = 3).
pub fn spherical_mean(g: &RadialFn, r: f64, rho: f64, breaks: &[f64]) -> Result<Complex64> {
    if r == 0.0 {
        return Ok(g(rho));
    }
    if rho == 0.0 {
        return Ok(g(r));
    }
    let lo = (r - rho).abs();
    let hi = r + rho;
    let mut pts = vec![lo];
    pts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    pts.push(hi);
    let int = quadrature().integrate_with_breaks(|s| s * g(s), &pts)?.value;
    Ok(int / (2.0 * r * rho))
}

/// Radii below this (relative to `1 + c t`) use the origin form of Kirchhoff's formula.
const ORIGIN_RADIUS: f64 = 1e-9;

/// Three-dimensional solution `d/dt[t M(v0)] + t M(v1)` with the time
/// derivative carried out analytically.
pub fn kirchhoff_radial(data: &CauchyData, r: f64, t: f64) -> Result<Complex64> {
    if data.d != 3 {
        return Err(Error::Domain(format!("Kirchhoff's formula needs d = 3, got {}", data.d)));
    }
    let c = data.c0;
    let ct = c * t;
    if t == 0.0 {
        return Ok((data.v0)(r));
    }
    if r <= ORIGIN_RADIUS * (1.0 + ct) {
        let dv0 = data.derivative()?;
        return Ok((data.v0)(ct) + ct * dv0(ct) + t * (data.v1)(ct));
    }
    let v0 = &data.v0;
    let first = ((r + ct) * v0(r + ct) + (r - ct) * v0((r - ct).abs())) / (2.0 * r);
    let pts = data.panels((r - ct).abs(), r + ct);
    let v1 = &data.v1;
    let second = quadrature().integrate_with_breaks(|s| s * v1(s), &pts)?.value / (2.0 * r * c);
    Ok(first + second)
}

/// Two-dimensional solution `Q1 + Q2 + Q3` of Poisson's formula. The radial
/// weight `1/sqrt(1 - s^2)` is removed by `s = sin(theta)`; the angular
/// integral uses the reflection symmetry of radial data.
pub fn poisson_radial(data: &CauchyData, r: f64, t: f64) -> Result<Complex64> {
    if data.d != 2 {
        return Err(Error::Domain(format!("Poisson's formula needs d = 2, got {}", data.d)));
    }
    if t == 0.0 {
        return Ok((data.v0)(r));
    }
    let dv0 = data.derivative()?.clone();
    let ct = data.c0 * t;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_q = Quadrature {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_panels: 20_000,
    };

    // theta -> sum of the three angular integrals at radius rho' = ct sin(theta)
    let shell = |theta: f64| -> Complex64 {
        let s = theta.sin();
        let rho = ct * s;
        let integrand = |phi: f64| -> Complex64 {
            let cs = phi.cos();
            let y = (r * r + rho * rho + 2.0 * r * rho * cs).max(0.0).sqrt();
            let dir = if y > 0.0 { (r * cs + rho) / y } else { 0.0 };
            let q12 = t * (data.v1)(y) + (data.v0)(y);
            let q3 = ct * s * dir * dv0(y);
            s * (q12 + q3)
        };
        let pts = angular_breaks(r, rho, &data.breaks);
        match inner_q.integrate_with_breaks(integrand, &pts) {
            Ok(e) => 2.0 * e.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                ZERO
            }
        }
    };
    let outer_pts = radial_breaks(r, ct, &data.breaks);
    let total = quadrature().integrate_with_breaks(shell, &outer_pts)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(total.value / (2.0 * PI))
}

/// Angles in `(0, pi)` where `|y| = sqrt(r^2 + rho^2 + 2 r rho cos(phi))` meets a break radius.
fn angular_breaks(r: f64, rho: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = vec![0.0];
    if r > 0.0 && rho > 0.0 {
        let mut inner: Vec<f64> = breaks
            .iter()
            .filter_map(|&b| {
                let cs = (b * b - r * r - rho * rho) / (2.0 * r * rho);
                (cs > -1.0 && cs < 1.0).then(|| cs.acos())
            })
            .collect();
        inner.sort_by(f64::total_cmp);
        pts.extend(inner);
    }
    pts.push(PI);
    pts
}

/// Values of `theta` in `(0, pi/2)` where the circle of radius `ct sin(theta)`
/// starts or stops touching a break radius.
fn radial_breaks(r: f64, ct: f64, breaks: &[f64]) -> Vec<f64> {
    let mut inner = Vec::new();
    for &b in breaks {
        for rho in [b - r, b + r, r - b] {
            if rho > 0.0 && rho < ct {
                inner.push((rho / ct).asin());
            }
        }
    }
    inner.sort_by(f64::total_cmp);
    inner.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut pts = vec![0.0];
    pts.extend(inner);
    pts.push(FRAC_PI_2);
    pts
}

/// Zero-data solution with forcing `f(r, tau)`: `int_0^t S(t - tau) f(., tau) d tau`,
/// where `S` propagates the data `(0, f)`. Composite Simpson in time with
/// `n_time` panels; `breaks` are radii where `f` is not smooth.
pub fn duhamel_forced<F>(f: F, breaks: &[f64], c0: f64, d: usize, r: f64, t: f64, n_time: usize) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64,
{
    if d != 1 && d != 3 {
        return Err(Error::Domain(format!("Duhamel oracle supports d = 1 or 3, got {d}")));
    }
    if t == 0.0 {
        return Ok(ZERO);
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let q = quadrature();
    let propagate = |tau: f64| -> Complex64 {
        let s = t - tau;
        if s <= 0.0 {
            return ZERO;
        }
        let cs = c0 * s;
        let result = if d == 1 {
            let (a, b) = (r - cs, r + cs);
            let mut pts = vec![a];
            let mut inner: Vec<f64> = breaks.iter().flat_map(|&x| [-x, x]).chain([0.0]).collect();
            inner.sort_by(f64::total_cmp);
            pts.extend(inner.into_iter().filter(|&p| p > a && p < b));
            pts.push(b);
            q.integrate_with_breaks(|x| f(x.abs(), tau), &pts)
                .map(|e| e.value / (2.0 * c0))
        } else if r <= ORIGIN_RADIUS * (1.0 + cs) {
            Ok(s * f(cs, tau))
        } else {
            let lo = (r - cs).abs();
            let hi = r + cs;
            let mut pts = vec![lo];
            pts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
            pts.push(hi);
            q.integrate_with_breaks(|x| x * f(x, tau), &pts)
                .map(|e| e.value / (2.0 * r * c0))
        };
        result.unwrap_or_else(|e| {
            failure.borrow_mut().get_or_insert(e);
            ZERO
        })
    };
    let v = simpson(propagate, 0.0, t, n_time);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Outgoing Helmholtz Green's function at distance `rho`.
pub fn greens_function(d: usize, omega: f64, c0: f64, rho: f64) -> Result<Complex64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("Green's function needs rho > 0, got {rho}")));
    }
    let k = omega / c0;
    match d {
        1 => Ok(I * (c0 / (2.0 * omega)) * Complex64::from_polar(1.0, k * rho)),
        2 => Ok(0.25 * I * hankel_h1_0(k * rho)?),
        3 => Ok(Complex64::from_polar(1.0, k * rho) / (4.0 * PI * rho)),
        _ => Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {d}"))),
    }
}

/// `H_0^{(1)}(x)`; only order zero is provided.
pub fn hankel_h1(order: u32, x: f64) -> Result<Complex64> {
    if order != 0 {
        return Err(Error::Domain(format!("only order 0 is implemented, got {order}")));
    }
    hankel_h1_0(x)
}

fn constant_background(medium: &MediumProfile) -> Result<()> {
    if !medium.is_constant() {
        return Err(Error::Domain("Green's representation needs a constant medium".into()));
    }
    Ok(())
}

/// `U(r) = int K(|x - y|) (beta0/alpha0) F(|y|) dy`, reduced to one radial
/// integral (d = 2 through Graf's addition theorem for the angular average
/// of `H_0`).
pub fn helmholtz_green_quadrature(source: &SourceProfile, medium: &MediumProfile, d: usize, r: f64) -> Result<Complex64> {
    constant_background(medium)?;
    let omega = source.omega;
    let c0 = medium.c0();
    let k = omega / c0;
    let ratio = medium.beta0 / medium.alpha0;
    let f1 = |s: f64| ratio * source.eval(s);
    let supp = source.r_supp;
    if supp <= 0.0 {
        return Ok(ZERO);
    }
    let mut pts = vec![0.0];
    pts.extend(source.profile.breakpoints().into_iter().filter(|&b| b < supp));
    if r > 0.0 && r < supp {
        pts.push(r);
    }
    pts.push(supp);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let q = quadrature();
    let value = match d {
        1 => {
            let kk = |rho: f64| I * (c0 / (2.0 * omega)) * Complex64::from_polar(1.0, k * rho);
            q.integrate_with_breaks(|s| f1(s) * (kk((r - s).abs()) + kk(r + s)), &pts)?
                .value
        }
        2 => {
            let failure: RefCell<Option<Error>> = RefCell::new(None);
            let integrand = |s: f64| {
                let (lo, hi) = if s < r { (s, r) } else { (r, s) };
                match hankel_h1_0(k * hi) {
                    Ok(h) => f1(s) * s * bessel_j0(k * lo) * h,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        ZERO
                    }
                }
            };
            let v = q.integrate_with_breaks(integrand, &pts)?.value;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            0.5 * PI * I * v
        }
        3 => {
            if r <= 1e-9 {
                q.integrate_with_breaks(|s| f1(s) * s * Complex64::from_polar(1.0, k * s), &pts)?
                    .value
            } else {
                let kernel = |s: f64| {
                    (Complex64::from_polar(1.0, k * (r + s)) - Complex64::from_polar(1.0, k * (r - s).abs())) * (s / (2.0 * r))
                        / (I * k)
                };
                q.integrate_with_breaks(|s| f1(s) * kernel(s), &pts)?.value
            }
        }
        _ => return Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {d}"))),
    };
    Ok(value)
}

/// Leading far-field term
/// `e^{ikr} / (4 pi r^{(d-1)/2}) (omega / (2 pi i c0))^{(d-3)/2} int F1(y) e^{-ik xhat.y} dy`.
pub fn farfield_u0(source: &SourceProfile, omega: f64, c0: f64, beta0_over_alpha0: f64, d: usize, r: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("far-field term needs r > 0, got {r}")));
    }
    let k = omega / c0;
    let supp = source.r_supp;
    if supp <= 0.0 {
        return Ok(ZERO);
    }
    let f1 = |s: f64| beta0_over_alpha0 * source.eval(s);
    let mut pts = vec![0.0];
    pts.extend(source.profile.breakpoints().into_iter().filter(|&b| b < supp));
    pts.push(supp);
    let q = quadrature();
    let transform = match d {
        1 => 2.0 * q.integrate_with_breaks(|s| f1(s) * (k * s).cos(), &pts)?.value,
        2 => 2.0 * PI * q.integrate_with_breaks(|s| f1(s) * s * bessel_j0(k * s), &pts)?.value,
        3 => {
            let sinc = |x: f64| if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
            4.0 * PI * q.integrate_with_breaks(|s| f1(s) * s * s * sinc(k * s), &pts)?.value
        }
        _ => return Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {d}"))),
    };
    let base = Complex64::new(0.0, -omega / (2.0 * PI * c0)); // omega / (2 pi i c0)
    let power = base.powf(0.5 * (d as f64 - 3.0));
    let p = 0.5 * (d as f64 - 1.0);
    Ok(Complex64::from_polar(1.0, k * r) / (4.0 * PI * r.powf(p)) * power * transform)
}

/// `35 s^4 - 84 s^5 + 70 s^6 - 20 s^7` and its derivative, clamped to `[0, 1]`.
pub fn smoothstep(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    let s2 = s * s;
    let s3 = s2 * s;
    let v = s3 * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)));
    let dv = 140.0 * s3 * (1.0 - s).powi(3);
    (v, dv)
}

/// Slowly decaying outgoing data `v0 = eta(r) e^{i omega r / c0} / r^{(d-1)/2}`,
/// `v1 = -c0 v0'`, where `eta` rises from 0 at `rho0` to 1 at `rho1`.
pub fn slow_decay_ic(d: usize, omega: f64, c0: f64, rho0: f64, rho1: f64) -> Result<CauchyData> {
    if d != 2 && d != 3 {
        return Err(Error::Domain(format!("slow-decay data are defined for d = 2, 3, got {d}")));
    }
    if !(rho0 > 0.0 && rho1 > rho0) {
        return Err(Error::Domain(format!("need 0 < rho0 < rho1, got {rho0}, {rho1}")));
    }
    let k = omega / c0;
    let p = 0.5 * (d as f64 - 1.0);
    let width = rho1 - rho0;
    let v0 = move |r: f64| -> Complex64 {
        let (eta, _) = smoothstep((r - rho0) / width);
        if eta == 0.0 {
            return ZERO;
        }
        eta * Complex64::from_polar(r.powf(-p), k * r)
    };
    let dv0 = move |r: f64| -> Complex64 {
        let (eta, deta) = smoothstep((r - rho0) / width);
        if eta == 0.0 && deta == 0.0 {
            return ZERO;
        }
        let wave = Complex64::from_polar(r.powf(-p), k * r);
        wave * (deta / width + eta * Complex64::new(-p / r, k))
    };
    let v1 = move |r: f64| -c0 * dv0(r);
    Ok(CauchyData::new(Arc::new(v0), Arc::new(v1), c0, d)
        .with_derivative(Arc::new(dv0))
        .with_breaks(vec![rho0, rho1]))
}

#[derive(Clone, Copy, Debug)]
pub struct OscillatoryIntegral {
    pub quadrature: Complex64,
    /// `sqrt(pi/(2t)) (1 - i)`; absent at `t = 0`.
    pub asymptotic: Option<Complex64>,
    pub defect: Option<f64>,
}

/// `int_0^a e^{-i x t} / sqrt(x) dx`, computed as `2 int_0^{sqrt a} e^{-i z^2 t} dz`.
pub fn oscillatory_integral(a: f64, t: f64) -> Result<OscillatoryIntegral> {
    if !(a > 0.0) || t < 0.0 {
        return Err(Error::Domain(format!("need a > 0 and t >= 0, got a = {a}, t = {t}")));
    }
    let za = a.sqrt();
    // one panel per half oscillation of z^2 t keeps the adaptive pass short
    let cycles = (a * t / PI).ceil().max(1.0) as usize;
    let pts: Vec<f64> = (0..=cycles).map(|i| za * (i as f64 / cycles as f64).sqrt()).collect();
    let value = 2.0
        * quadrature()
            .integrate_with_breaks(|z| Complex64::from_polar(1.0, -z * z * t), &pts)?
            .value;
    let asymptotic = (t > 0.0).then(|| (PI / (2.0 * t)).sqrt() * Complex64::new(1.0, -1.0));
    Ok(OscillatoryIntegral {
        quadrature: value,
        asymptotic,
        defect: asymptotic.map(|s| (value - s).norm()),
    })
}
