//! Daughter-distance machinery: the radial daughter density f_d and the
//! conditional distance distribution G(r|s) / density g(r|s) of a daughter at
//! distance r from the origin given its parent at distance s.
//!
//! Thomas and Matern have closed forms; any radially symmetric density is
//! handled numerically through the polar double integral.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{check_nonneg, Error, Result};
use crate::quad;
use crate::specfun::{marcum_q1, rice_pdf};

const PI: f64 = std::f64::consts::PI;

// Gaussian envelope of the Rice density is ~1e-22 at 10 sigma.
const THOMAS_RANGE_SIGMAS: f64 = 10.0;

/// Radial daughter density of a numeric kernel, with its precomputed
/// effective support and a radial-CDF table used for sampling.
#[derive(Clone)]
pub struct NumericKernel {
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    tail_radius: f64,
    cdf_table: Arc<Vec<(f64, f64)>>,
}

impl fmt::Debug for NumericKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericKernel")
            .field("tail_radius", &self.tail_radius)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum DaughterKernel {
    /// Isotropic Gaussian displacement with per-coordinate variance sigma^2.
    Thomas { sigma: f64 },
    /// Uniform displacement on the disk of radius r_d.
    Matern { r_d: f64 },
    /// Arbitrary radial density, evaluated by quadrature.
    NumericRadial(NumericKernel),
}

impl DaughterKernel {
    pub fn thomas(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self::Thomas { sigma })
    }

    pub fn matern(r_d: f64) -> Result<Self> {
        if !(r_d.is_finite() && r_d > 0.0) {
            return Err(Error::InvalidParameter(format!("r_d must be > 0, got {r_d}")));
        }
        Ok(Self::Matern { r_d })
    }

    /// Wrap an arbitrary radial density f_d. The planar normalization
    /// 2 pi int f_d(s) s ds = 1 is checked to 1e-8; when `support_radius` is
    /// absent, an effective radius holding all but 1e-12 of the mass is found
    /// by doubling search.
    pub fn numeric_radial<F>(density: F, support_radius: Option<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let density = Arc::new(density);
        let mass_to = |radius: f64| -> Result<f64> {
            let d = density.clone();
            let f = move |s: f64| 2.0 * PI * d(s) * s;
            quad::adaptive_ab(&f, 0.0, radius, 1e-11, 1e-13, 800)
                .map(|r| r.value)
                .map_err(|e| quad_err("numeric_radial normalization", e))
        };

        let tail_radius = match support_radius {
            Some(radius) => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "support_radius must be > 0, got {radius}"
                    )));
                }
                radius
            }
            None => {
                let mut radius = 1.0;
                loop {
                    if mass_to(radius)? >= 1.0 - 1e-12 {
                        break radius;
                    }
                    radius *= 2.0;
                    if radius > 1e18 {
                        return Err(Error::InvalidParameter(
                            "numeric radial density does not accumulate unit mass".into(),
                        ));
                    }
                }
            }
        };

        let total = mass_to(tail_radius)?;
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "radial density mass {total} over [0, {tail_radius}] is not 1"
            )));
        }

        // Radial CDF table for offset sampling.
        const TABLE: usize = 2048;
        let mut cdf_table = Vec::with_capacity(TABLE + 1);
        cdf_table.push((0.0, 0.0));
        let mut acc = 0.0;
        for i in 1..=TABLE {
            let a = tail_radius * (i - 1) as f64 / TABLE as f64;
            let b = tail_radius * i as f64 / TABLE as f64;
            let d = density.clone();
            acc += quad::gauss_legendre_64(&move |s| 2.0 * PI * d(s) * s, a, b);
            cdf_table.push((b, (acc / total).min(1.0)));
        }

        Ok(Self::NumericRadial(NumericKernel {
            density,
            tail_radius,
            cdf_table: Arc::new(cdf_table),
        }))
    }

    /// The radial daughter density f_d(s).
    pub fn fd(&self, s: f64) -> Result<f64> {
        check_nonneg("s", s)?;
        Ok(match self {
            Self::Thomas { sigma } => {
                (-0.5 * s * s / (sigma * sigma)).exp() / (2.0 * PI * sigma * sigma)
            }
            Self::Matern { r_d } => {
                if s <= *r_d {
                    1.0 / (PI * r_d * r_d)
                } else {
                    0.0
                }
            }
            Self::NumericRadial(k) => (k.density)(s),
        })
    }

    /// Radius beyond which a daughter displacement carries negligible
    /// (Matern/numeric: zero) probability mass.
    pub fn effective_radius(&self) -> f64 {
        match self {
            Self::Thomas { sigma } => THOMAS_RANGE_SIGMAS * sigma,
            Self::Matern { r_d } => *r_d,
            Self::NumericRadial(k) => k.tail_radius,
        }
    }

    /// Characteristic length scale, used for quadrature transforms.
    pub fn spread(&self) -> f64 {
        match self {
            Self::Thomas { sigma } => *sigma,
            Self::Matern { r_d } => *r_d,
            Self::NumericRadial(k) => k.tail_radius,
        }
    }

    /// G(r|s): probability that a daughter of a parent at distance s lies
    /// within distance r of the origin.
    pub fn cdf(&self, r: f64, s: f64) -> Result<f64> {
        check_nonneg("r", r)?;
        check_nonneg("s", s)?;
        match self {
            Self::Thomas { sigma } => Ok(1.0 - marcum_q1(s / sigma, r / sigma)?),
            Self::Matern { r_d } => matern_cdf(r, s, *r_d),
            Self::NumericRadial(_) => self.numeric_cdf(r, s),
        }
    }

    /// g(r|s) = dG(r|s)/dr.
    pub fn pdf(&self, r: f64, s: f64) -> Result<f64> {
        check_nonneg("r", r)?;
        check_nonneg("s", s)?;
        match self {
            Self::Thomas { sigma } => Ok(rice_pdf(s / sigma, r / sigma)? / sigma),
            Self::Matern { r_d } => Ok(matern_pdf(r, s, *r_d)),
            Self::NumericRadial(_) => Ok(self.numeric_pdf(r, s)?),
        }
    }

    /// Support of g(.|s) as an interval (exact for Matern/numeric,
    /// negligible-tail for Thomas).
    pub fn pdf_support(&self, s: f64) -> (f64, f64) {
        let radius = self.effective_radius();
        ((s - radius).max(0.0), s + radius)
    }

    /// Points where g(.|s) has kinks or a peak, to seed adaptive quadrature.
    /// A density with mass at its support edge puts square-root cusps in
    /// g(.|s) at |R - s| and R + s; left unseeded they alias past the
    /// Gauss-Kronrod error estimate.
    pub fn pdf_kinks(&self, s: f64) -> Vec<f64> {
        match self {
            Self::Thomas { .. } => vec![s],
            Self::Matern { r_d } => vec![(r_d - s).abs(), s, r_d + s],
            Self::NumericRadial(k) => {
                vec![(k.tail_radius - s).abs(), s, k.tail_radius + s]
            }
        }
    }

    /// One daughter offset from its parent.
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        match self {
            Self::Thomas { sigma } => {
                let x: f64 = rng.sample(rand_distr::StandardNormal);
                let y: f64 = rng.sample(rand_distr::StandardNormal);
                [sigma * x, sigma * y]
            }
            Self::Matern { r_d } => {
                let radius = r_d * rng.gen::<f64>().sqrt();
                let angle = 2.0 * PI * rng.gen::<f64>();
                [radius * angle.cos(), radius * angle.sin()]
            }
            Self::NumericRadial(k) => {
                let u: f64 = rng.gen();
                let table = &k.cdf_table;
                let idx = table.partition_point(|&(_, c)| c < u).min(table.len() - 1);
                let (r1, c1) = table[idx.saturating_sub(1)];
                let (r2, c2) = table[idx];
                let radius = if c2 > c1 { r1 + (r2 - r1) * (u - c1) / (c2 - c1) } else { r2 };
                let angle = 2.0 * PI * rng.gen::<f64>();
                [radius * angle.cos(), radius * angle.sin()]
            }
        }
    }

    // Polar integral over the angle, restricted to the angular
    // window where the displacement can land inside the support at all (the
    // integrand is identically zero outside it, and for densities with a
    // jump at the support edge the restriction is what keeps fixed-order
    // Gauss-Legendre accurate).
    fn numeric_pdf(&self, r: f64, s: f64) -> Result<f64> {
        let Self::NumericRadial(k) = self else { unreachable!() };
        if r == 0.0 {
            return Ok(0.0);
        }
        let radius = k.tail_radius;
        if s == 0.0 {
            return Ok(2.0 * PI * r * (k.density)(r));
        }
        let cos_max = (r * r + s * s - radius * radius) / (2.0 * r * s);
        if cos_max >= 1.0 {
            return Ok(0.0);
        }
        let phi_max = cos_max.max(-1.0).acos();
        let d = k.density.clone();
        let f = move |phi: f64| {
            let dist2 = r * r + s * s - 2.0 * r * s * phi.cos();
            d(dist2.max(0.0).sqrt())
        };
        Ok(2.0 * r * quad::gauss_legendre_64(&f, 0.0, phi_max))
    }

    fn numeric_cdf(&self, r: f64, s: f64) -> Result<f64> {
        let (lo, hi) = self.pdf_support(s);
        let hi = r.min(hi);
        if hi <= lo {
            return Ok(0.0);
        }
        let mut points = vec![lo];
        for k in self.pdf_kinks(s) {
            if k > lo && k < hi {
                points.push(k);
            }
        }
        points.push(hi);
        points.sort_by(f64::total_cmp);
        let f = |u: f64| self.numeric_pdf(u, s).unwrap_or(f64::NAN);
        let r = quad::adaptive(&f, &points, 1e-9, 1e-12, 400)
            .map_err(|e| quad_err("numeric kernel G(r|s)", e))?;
        Ok(r.value.clamp(0.0, 1.0))
    }
}

fn quad_err(context: &'static str, e: quad::QuadError) -> Error {
    match e {
        quad::QuadError::ToleranceNotReached { value, abs_error } => Error::Quadrature {
            context,
            value,
            abs_error,
        },
        quad::QuadError::NonFinite => Error::Domain(format!("non-finite integrand in {context}")),
    }
}

fn matern_pdf(r: f64, s: f64, r_d: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    if s == 0.0 {
        // Removable degeneracy: daughters uniform on the origin-centered disk.
        return if r <= r_d { 2.0 * r / (r_d * r_d) } else { 0.0 };
    }
    let mut v = 0.0;
    if r < r_d - s {
        v += 1.0;
    }
    if r >= (r_d - s).abs() && r <= r_d + s {
        let x = ((r * r + s * s - r_d * r_d) / (2.0 * r * s)).clamp(-1.0, 1.0);
        v += x.acos() / PI;
    }
    2.0 * r / (r_d * r_d) * v
}

fn matern_cdf(r: f64, s: f64, r_d: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok((r * r).min(r_d * r_d) / (r_d * r_d));
    }
    if r >= r_d + s {
        return Ok(1.0);
    }
    let inner = r.min((r_d - s).max(0.0));
    let mut g = inner * inner / (r_d * r_d);
    let lo = r.min((r_d - s).abs());
    let hi = r.min(r_d + s);
    if hi > lo {
        let f = |u: f64| {
            let x = ((u * u + s * s - r_d * r_d) / (2.0 * u * s)).clamp(-1.0, 1.0);
            u * x.acos()
        };
        let res = quad::adaptive_ab(&f, lo, hi, 1e-10, 1e-13, 400)
            .map_err(|e| quad_err("matern G(r|s)", e))?;
        g += 2.0 / (PI * r_d * r_d) * res.value;
    }
    Ok(g.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    fn numeric_thomas(sigma: f64) -> DaughterKernel {
        DaughterKernel::numeric_radial(
            move |s| (-0.5 * s * s / (sigma * sigma)).exp() / (2.0 * PI * sigma * sigma),
            None,
        )
        .unwrap()
    }

    fn numeric_matern(r_d: f64) -> DaughterKernel {
        DaughterKernel::numeric_radial(
            move |s| if s <= r_d { 1.0 / (PI * r_d * r_d) } else { 0.0 },
            Some(r_d),
        )
        .unwrap()
    }

    #[test]
    fn fd_values() {
        let t = DaughterKernel::thomas(1.0).unwrap();
        assert!((t.fd(0.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);

        let m = DaughterKernel::matern(2.0).unwrap();
        assert!((m.fd(1.9).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert_eq!(m.fd(2.1).unwrap(), 0.0);

        let n = numeric_thomas(1.0);
        assert!((n.fd(1.0).unwrap() - t.fd(1.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn invalid_construction() {
        assert!(DaughterKernel::thomas(0.0).is_err());
        assert!(DaughterKernel::thomas(-1.0).is_err());
        assert!(DaughterKernel::matern(f64::NAN).is_err());
        // Not normalized: double the Thomas density.
        assert!(DaughterKernel::numeric_radial(|s| (-0.5 * s * s).exp() / PI, None).is_err());
    }

    #[test]
    fn negative_arguments_rejected() {
        let t = DaughterKernel::thomas(1.0).unwrap();
        assert!(t.fd(-0.1).is_err());
        assert!(t.cdf(-1.0, 0.0).is_err());
        assert!(t.pdf(0.5, -2.0).is_err());
    }

    #[test]
    fn thomas_cdf_at_parent_origin() {
        let sigma = 1.3;
        let t = DaughterKernel::thomas(sigma).unwrap();
        for r in [0.1, 0.7, 2.0, 5.0] {
            let expect = 1.0 - (-0.5 * r * r / (sigma * sigma)).exp();
            assert!((t.cdf(r, 0.0).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn matern_cdf_edges() {
        let m = DaughterKernel::matern(1.5).unwrap();
        for r in [0.2f64, 1.0, 1.4, 3.0] {
            let expect = (r * r).min(2.25) / 2.25;
            assert!((m.cdf(r, 0.0).unwrap() - expect).abs() < 1e-12);
        }
        for s in [0.3, 1.0, 4.0] {
            assert_eq!(m.cdf(s + 1.5 + 0.1, s).unwrap(), 1.0);
        }
    }

    #[test]
    fn thomas_pdf_rayleigh_at_origin() {
        let t = DaughterKernel::thomas(1.0).unwrap();
        for r in [0.1f64, 0.5, 1.0, 2.5] {
            let expect = r * (-0.5 * r * r).exp();
            assert!((t.pdf(r, 0.0).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn matern_pdf_limit_at_origin() {
        let m = DaughterKernel::matern(1.0).unwrap();
        assert!((m.pdf(0.5, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(m.pdf(1.1, 0.0).unwrap(), 0.0);
        assert_eq!(m.pdf(0.0, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn matern_support_exact_zero() {
        let r_d = 1.3;
        let m = DaughterKernel::matern(r_d).unwrap();
        for s in [2.0, 3.5, 10.0] {
            assert_eq!(m.pdf(s + r_d + 1e-9, s).unwrap(), 0.0);
            assert_eq!(m.pdf((s - r_d) - 1e-9, s).unwrap(), 0.0);
        }
    }

    #[test]
    fn pdf_matches_cdf_finite_difference() {
        let t = DaughterKernel::thomas(0.55).unwrap();
        let (r, s, h) = (2.0, 3.0, 1e-5);
        let fd = (t.cdf(r + h, s).unwrap() - t.cdf(r - h, s).unwrap()) / (2.0 * h);
        assert!((t.pdf(r, s).unwrap() - fd).abs() < 1e-6);

        let m = DaughterKernel::matern(1.7).unwrap();
        for (r, s) in [(0.9, 1.2), (2.0, 1.0), (0.4, 0.2)] {
            let fd = (m.cdf(r + h, s).unwrap() - m.cdf(r - h, s).unwrap()) / (2.0 * h);
            assert!((m.pdf(r, s).unwrap() - fd).abs() < 1e-6, "r={r} s={s}");
        }
    }

    #[test]
    fn pdf_normalizes() {
        for kernel in [
            DaughterKernel::thomas(0.8).unwrap(),
            DaughterKernel::matern(1.4).unwrap(),
            numeric_thomas(0.8),
        ] {
            for s in [0.0, 0.1, 1.0, 5.0, 20.0] {
                let (lo, hi) = kernel.pdf_support(s);
                let mut points = vec![0.0f64.max(lo.min(0.0)), lo, hi];
                for k in kernel.pdf_kinks(s) {
                    if k > lo && k < hi {
                        points.push(k);
                    }
                }
                points.sort_by(f64::total_cmp);
                points.dedup();
                let f = |u: f64| kernel.pdf(u, s).unwrap();
                let r = adaptive(&f, &points, 1e-10, 1e-12, 800).unwrap();
                assert!((r.value - 1.0).abs() < 1e-7, "{kernel:?} s={s}: {}", r.value);
            }
        }
    }

    #[test]
    fn symmetry_s_g() {
        // s g(r|s) = r g(s|r), from the polar-integral form.
        for kernel in [
            DaughterKernel::thomas(0.7).unwrap(),
            DaughterKernel::matern(2.1).unwrap(),
        ] {
            for i in 1..=20 {
                for j in 1..=20 {
                    let r = i as f64 * 0.5;
                    let s = j as f64 * 0.5;
                    let lhs = s * kernel.pdf(r, s).unwrap();
                    let rhs = r * kernel.pdf(s, r).unwrap();
                    assert!((lhs - rhs).abs() < 1e-9, "{kernel:?} r={r} s={s}");
                }
            }
        }
    }

    #[test]
    fn cdf_is_integral_of_pdf() {
        for kernel in [
            DaughterKernel::thomas(0.9).unwrap(),
            DaughterKernel::matern(1.2).unwrap(),
        ] {
            for (r, s) in [(0.5, 0.4), (1.5, 1.0), (3.0, 0.2), (2.0, 4.0)] {
                let mut points = vec![0.0];
                for k in kernel.pdf_kinks(s) {
                    if k > 0.0 && k < r {
                        points.push(k);
                    }
                }
                points.push(r);
                points.sort_by(f64::total_cmp);
                let f = |u: f64| kernel.pdf(u, s).unwrap();
                let integral = adaptive(&f, &points, 1e-10, 1e-13, 800).unwrap().value;
                let cdf = kernel.cdf(r, s).unwrap();
                assert!((integral - cdf).abs() < 1e-7, "{kernel:?} r={r} s={s}");
            }
        }
    }

    #[test]
    fn closed_forms_match_numeric_kernel() {
        let sigma = 0.7;
        let thomas = DaughterKernel::thomas(sigma).unwrap();
        let thomas_num = numeric_thomas(sigma);
        let r_d = 1.6;
        let matern = DaughterKernel::matern(r_d).unwrap();
        let matern_num = numeric_matern(r_d);
        for i in 1..=10 {
            for j in 0..10 {
                let r = i as f64 * 0.35;
                let s = j as f64 * 0.4;
                let a = thomas.cdf(r, s).unwrap();
                let b = thomas_num.cdf(r, s).unwrap();
                assert!((a - b).abs() < 1e-6, "thomas G r={r} s={s}: {a} vs {b}");
                let a = thomas.pdf(r, s).unwrap();
                let b = thomas_num.pdf(r, s).unwrap();
                assert!((a - b).abs() < 1e-6, "thomas g r={r} s={s}: {a} vs {b}");
                let a = matern.cdf(r, s).unwrap();
                let b = matern_num.cdf(r, s).unwrap();
                assert!((a - b).abs() < 1e-6, "matern G r={r} s={s}: {a} vs {b}");
                let a = matern.pdf(r, s).unwrap();
                let b = matern_num.pdf(r, s).unwrap();
                assert!((a - b).abs() < 1e-6, "matern g r={r} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn thomas_cdf_matches_polar_double_integral() {
        let kernel = DaughterKernel::thomas(0.7).unwrap();
        let numeric = numeric_thomas(0.7);
        let (r, s) = (1.3, 2.0);
        assert!((kernel.cdf(r, s).unwrap() - numeric.cdf(r, s).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn cdf_monotone_in_r() {
        for kernel in [
            DaughterKernel::thomas(1.1).unwrap(),
            DaughterKernel::matern(0.9).unwrap(),
        ] {
            for s in [0.0, 0.5, 2.0] {
                let mut prev = -1e-12;
                assert_eq!(kernel.cdf(0.0, s).unwrap(), 0.0);
                for i in 1..=40 {
                    let r = i as f64 * 0.2;
                    let v = kernel.cdf(r, s).unwrap();
                    assert!((0.0..=1.0).contains(&v));
                    assert!(v >= prev - 1e-12);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn offset_sampling_consistent_with_cdf() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let kernel = numeric_thomas(1.0);
        let n = 20_000;
        let mut within_1 = 0usize;
        for _ in 0..n {
            let [x, y] = kernel.sample_offset(&mut rng);
            if x * x + y * y <= 1.0 {
                within_1 += 1;
            }
        }
        // P(|Y| <= 1) = 1 - exp(-1/2) for the unit Thomas kernel.
        let p = 1.0 - (-0.5f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((within_1 as f64 / n as f64 - p).abs() < 4.0 * se);
    }
}
