//! Cauchy problem `i u_t = A_eps u + F`, `u(0) = phi`, solved by Bloch synthesis.
//!
//! Fourier transforms are unitary, `||u||^2 = int |u^(xi)|^2 dxi`. After the scaling
//! `(T_eps u)(x) = eps^{d/2} u(eps x)` the data live at `kappa = eps xi`, and a band
//! limit `|xi| <= Xi` with `eps Xi < r0` puts them on the zero-frequency component of
//! the fibers with `k = kappa` in a ball inside the Brillouin zone.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fiber::FiberModel;
use crate::linalg::{hermitian_eigen, hermitian_part, norm, CVec, ZERO};

/// Time profile `f` of a separable source `F(x, t) = f(t) chi(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    /// `f(t) = exp(-i omega t)`.
    Harmonic { omega: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> Complex64 {
        match *self {
            TimeProfile::Harmonic { omega } => Complex64::from_polar(1.0, -omega * t),
        }
    }
}

/// Fourier data as a function of `xi`, returning an `n`-vector.
pub type SpectralData<'a> = &'a (dyn Fn(&[f64]) -> Vec<Complex64> + Sync);

/// A band-limited Cauchy problem.
pub struct CauchyProblem<'a> {
    pub initial: SpectralData<'a>,
    /// Optional source `(chi^, f)`.
    pub source: Option<(SpectralData<'a>, TimeProfile)>,
    /// Both `phi^` and `chi^` vanish for `|xi| > band_limit`.
    pub band_limit: f64,
    pub tau: f64,
    /// Time steps of the Duhamel quadrature before doubling.
    pub time_steps: usize,
    /// Target spacing of the `xi` quadrature.
    pub xi_step: f64,
    /// Sobolev exponent reported with the data norm.
    pub sobolev: f64,
}

/// Norms of the exact and homogenized solutions at time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub tau: f64,
    pub eps: f64,
    pub norm_phi: f64,
    pub norm_u_eps: f64,
    pub norm_u0: f64,
    pub error: f64,
    /// `||phi||_{H^s}` for the reported `s`.
    pub data_norm: f64,
    /// `int_0^tau ||F(t)||_{H^s} dt`.
    pub source_norm: f64,
    pub points: usize,
    pub time_steps: usize,
    /// Relative change of the Duhamel term under step doubling; zero without a source.
    pub duhamel_change: f64,
}

/// `E1(z) = (e^z - 1)/z` and `E2(z) = (e^z (z - 1) + 1)/z^2`, with series near 0.
fn filon_kernels(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.5 {
        // E1 = sum z^n/(n+1)!, E2 = sum z^n/(n! (n+2))
        let mut e1 = ZERO;
        let mut e2 = ZERO;
        let mut pow_over_fact = Complex64::from(1.0);
        for n in 0..24u32 {
            e1 += pow_over_fact / f64::from(n + 1);
            e2 += pow_over_fact / f64::from(n + 2);
            pow_over_fact *= z / f64::from(n + 1);
        }
        (e1, e2)
    } else {
        let ez = z.exp();
        ((ez - 1.0) / z, (ez * (z - 1.0) + 1.0) / (z * z))
    }
}

/// `-i int_0^tau exp(-i mu (tau - s)) f(s) ds` with `f` replaced by its piecewise-linear
/// interpolant on `steps` equal intervals and the exponential integrated exactly.
pub fn duhamel_factor(mu: f64, tau: f64, profile: TimeProfile, steps: usize) -> Complex64 {
    let h = tau / steps as f64;
    let z = Complex64::new(0.0, mu * h);
    let (e1, e2) = filon_kernels(z);
    let mut acc = ZERO;
    for j in 0..steps {
        let s0 = j as f64 * h;
        let phase = Complex64::from_polar(1.0, -mu * (tau - s0));
        let (f0, f1) = (profile.eval(s0), profile.eval(s0 + h));
        acc += phase * (f0 * (e1 - e2) + f1 * e2);
    }
    Complex64::new(0.0, -h) * acc
}

struct PointValues {
    phi2: f64,
    hs2: f64,
    source_hs: f64,
    u_eps2: f64,
    u0_2: f64,
    diff2: f64,
    duhamel_delta2: f64,
    duhamel2: f64,
}

/// Solves the exact and homogenized problems at scale `eps` and compares them in `L2`.
pub fn solve_cauchy(model: &FiberModel, problem: &CauchyProblem<'_>, eps: f64) -> Result<EvolutionResult> {
    let op = model.operator();
    let lat = op.lattice();
    let (d, n, p) = (op.dim(), op.n(), op.order() as i32);
    if !(eps > 0.0) || !(problem.xi_step > 0.0) || problem.time_steps == 0 {
        return Err(Error::InvalidArgument("eps, xi step and time steps must be positive".into()));
    }
    let radius = eps * problem.band_limit;
    if radius >= lat.inradius() {
        return Err(Error::SupportOverflow(format!(
            "eps * band limit = {radius} reaches the Brillouin inradius {}",
            lat.inradius()
        )));
    }
    let longest = lat.dual().iter().map(|b| norm(b)).fold(0.0, f64::max);
    let resolution = (longest / (eps * problem.xi_step)).ceil() as usize;
    let grid = lat.quadrature_points_within(resolution, radius)?;
    let weight = grid.weights.as_ref().map_or(0.0, |w| w.first().copied().unwrap_or(0.0));
    let time = problem.tau * eps.powi(-2 * p);
    let zero = model.frequencies().zero_index();
    let size = model.size();
    let scale = eps.powf(-0.5 * d as f64);
    let g0 = model.g0();
    let steps = problem.time_steps;

    let values: Vec<PointValues> = grid
        .points
        .par_iter()
        .map(|k| {
            let xi: Vec<f64> = k.iter().map(|x| x / eps).collect();
            let phi = CVec::from_vec((problem.initial)(&xi));
            let q = xi.iter().map(|x| x * x).sum::<f64>();
            let sobolev_weight = (1.0 + q).powf(problem.sobolev);

            // exact solution in the scaled picture
            let fiber = model.fiber(k);
            let spec = fiber.spectrum();
            let mut psi = CVec::zeros(size);
            psi.rows_mut(zero * n, n).copy_from(&(&phi * Complex64::from(scale)));
            let mut evolved = spec.vectors.ad_mul(&psi);
            for (l, c) in evolved.iter_mut().enumerate() {
                *c *= Complex64::from_polar(1.0, -time * spec.values[l]);
            }

            // homogenized solution, evaluated at xi and rescaled to kappa
            let bxi = op.symbol().eval(&xi);
            let s_xi = hermitian_part(&bxi.ad_mul(&(g0 * &bxi)));
            let (mu, w) = hermitian_eigen(&s_xi);
            let phi_w = w.ad_mul(&phi);
            let mut u0_w = phi_w.clone();
            for (l, c) in u0_w.iter_mut().enumerate() {
                *c *= Complex64::from_polar(1.0, -problem.tau * mu[l]);
            }

            let mut source_hs = 0.0;
            let (mut duhamel_delta2, mut duhamel2) = (0.0, 0.0);
            if let Some((chi_fn, profile)) = &problem.source {
                let chi = CVec::from_vec(chi_fn(&xi));
                source_hs = chi.norm_squared() * sobolev_weight;
                let mut chi_psi = CVec::zeros(size);
                chi_psi.rows_mut(zero * n, n).copy_from(&(&chi * Complex64::from(scale)));
                let c_src = spec.vectors.ad_mul(&chi_psi);
                let chi_w = w.ad_mul(&chi);
                let mut coarse = CVec::zeros(size);
                let mut fine = CVec::zeros(size);
                for l in 0..size {
                    let mu_l = spec.values[l] * eps.powi(-2 * p);
                    coarse[l] = c_src[l] * duhamel_factor(mu_l, problem.tau, *profile, steps);
                    fine[l] = c_src[l] * duhamel_factor(mu_l, problem.tau, *profile, 2 * steps);
                }
                duhamel_delta2 += (&fine - &coarse).norm_squared();
                duhamel2 += fine.norm_squared();
                evolved += fine;
                for l in 0..n {
                    let c = duhamel_factor(mu[l], problem.tau, *profile, 2 * steps);
                    u0_w[l] += chi_w[l] * c;
                }
            }

            let u_eps = &spec.vectors * evolved;
            let u0 = (&w * u0_w) * Complex64::from(scale);
            let mut diff = u_eps.clone();
            let mut head = diff.rows_mut(zero * n, n);
            head -= &u0;
            PointValues {
                phi2: phi.norm_squared(),
                hs2: phi.norm_squared() * sobolev_weight,
                source_hs,
                u_eps2: u_eps.norm_squared(),
                u0_2: u0.norm_squared(),
                diff2: diff.norm_squared(),
                duhamel_delta2,
                duhamel2,
            }
        })
        .collect();

    // ordered reduction keeps results independent of the thread count
    let mut tot = [0.0f64; 8];
    for v in &values {
        for (t, x) in tot
            .iter_mut()
            .zip([v.phi2, v.hs2, v.source_hs, v.u_eps2, v.u0_2, v.diff2, v.duhamel_delta2, v.duhamel2])
        {
            *t += x;
        }
    }
    // phi and chi norms are integrated in xi: dxi = dk / eps^d
    let xi_weight = weight / eps.powi(d as i32);
    let duhamel_change = if tot[7] > 0.0 { (tot[6] / tot[7]).sqrt() } else { 0.0 };
    if duhamel_change > 0.01 {
        return Err(Error::QuadratureUnconverged { relative_change: duhamel_change });
    }
    Ok(EvolutionResult {
        tau: problem.tau,
        eps,
        norm_phi: (tot[0] * xi_weight).sqrt(),
        norm_u_eps: (tot[3] * weight).sqrt(),
        norm_u0: (tot[4] * weight).sqrt(),
        error: (tot[5] * weight).sqrt(),
        data_norm: (tot[1] * xi_weight).sqrt(),
        source_norm: problem.tau.abs() * (tot[2] * xi_weight).sqrt(),
        points: grid.len(),
        time_steps: 2 * steps,
        duhamel_change,
    })
}

/// Gaussian spectral data `exp(-sigma^2 |xi|^2 / 2) v` cut off at `|xi| > band_limit`.
pub fn truncated_gaussian(sigma: f64, band_limit: f64, direction: Vec<Complex64>) -> impl Fn(&[f64]) -> Vec<Complex64> + Sync {
    move |xi: &[f64]| {
        let q: f64 = xi.iter().map(|x| x * x).sum();
        if q.sqrt() > band_limit {
            return vec![ZERO; direction.len()];
        }
        let a = (-0.5 * sigma * sigma * q).exp();
        direction.iter().map(|v| v * a).collect()
    }
}

/// Rough spectral data `(1 + |xi|^2)^{-power/2} v` cut off at `|xi| > band_limit`.
pub fn truncated_power(power: f64, band_limit: f64, direction: Vec<Complex64>) -> impl Fn(&[f64]) -> Vec<Complex64> + Sync {
    move |xi: &[f64]| {
        let q: f64 = xi.iter().map(|x| x * x).sum();
        if q.sqrt() > band_limit {
            return vec![ZERO; direction.len()];
        }
        let a = (1.0 + q).powf(-0.5 * power);
        direction.iter().map(|v| v * a).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filon_kernels_continuous() {
        for z in [Complex64::new(0.0, 0.49), Complex64::new(0.0, 0.51), Complex64::new(0.3, -0.35)] {
            let (a1, a2) = filon_kernels(z);
            let ez = z.exp();
            let (b1, b2) = ((ez - 1.0) / z, (ez * (z - 1.0) + 1.0) / (z * z));
            assert!((a1 - b1).norm() < 1e-13 && (a2 - b2).norm() < 1e-13);
        }
    }

    #[test]
    fn duhamel_matches_closed_form() {
        let profile = TimeProfile::Harmonic { omega: 1.0 };
        for mu in [0.0, 0.3, 7.0, 1e6] {
            let tau = 1.7;
            let exact = if (mu - 1.0f64).abs() < 1e-12 {
                Complex64::new(0.0, -tau) * Complex64::from_polar(1.0, -tau)
            } else {
                // -i e^{-i mu tau} (e^{i (mu - 1) tau} - 1) / (i (mu - 1))
                let a = mu - 1.0;
                -Complex64::from_polar(1.0, -mu * tau) * (Complex64::from_polar(1.0, a * tau) - 1.0) / a
            };
            let got = duhamel_factor(mu, tau, profile, 256);
            assert!((got - exact).norm() < 1e-5 * exact.norm().max(1e-6), "mu {mu}: {got} vs {exact}");
        }
    }
}
