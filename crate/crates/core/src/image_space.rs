//! Classical image space: raw pictures, unit vectors on the sphere, the two
//! similarity measures, the two error models and the concentration estimator.

use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::rng::stream;
use crate::UNIT_NORM_TOL;

/// A monochrome picture, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    width: usize,
    height: usize,
    maxval: u32,
    pixels: Vec<u32>,
}

impl RawImage {
    pub fn new(width: usize, height: usize, maxval: u32, pixels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("width and height must be positive"));
        }
        if maxval == 0 {
            return Err(Error::InvalidImage("maxval must be positive"));
        }
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::InvalidImage("pixel count differs from width*height"));
        }
        if pixels.iter().any(|&p| p > maxval) {
            return Err(Error::InvalidImage("pixel exceeds maxval"));
        }
        Ok(Self {
            width,
            height,
            maxval,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn maxval(&self) -> u32 {
        self.maxval
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// A real unit vector on the sphere `S^(N-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageVector {
    components: Vec<f64>,
}

impl ImageVector {
    /// Wraps components that are already normalized.
    pub fn from_unit(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty);
        }
        let norm = norm(&components);
        if !(libm::fabs(norm - 1.0) <= UNIT_NORM_TOL) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { components })
    }

    /// Scales an arbitrary nonzero vector onto the sphere.
    pub fn normalize(mut components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty);
        }
        let norm = norm(&components);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::ZeroVector);
        }
        components.iter_mut().for_each(|c| *c /= norm);
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn into_components(self) -> Vec<f64> {
        self.components
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

/// Error model applied to a stored image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    /// Adds `N(0, sigma^2)` to every component, then renormalizes.
    Gaussian { sigma: f64 },
    /// Zeroes `floor(fraction * N)` uniformly chosen components, then renormalizes.
    Dropout { fraction: f64 },
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let spec = NoiseSpec::Gaussian { sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dropout(fraction: f64) -> Result<Self> {
        let spec = NoiseSpec::Dropout { fraction };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::Gaussian { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidParameter("sigma must be finite and >= 0"))
            }
            NoiseSpec::Dropout { fraction } if !(0.0..=1.0).contains(&fraction) => {
                Err(Error::InvalidParameter("dropout fraction must lie in [0, 1]"))
            }
            _ => Ok(()),
        }
    }

    /// The active parameter (sigma or dropout fraction).
    pub fn parameter(&self) -> f64 {
        match *self {
            NoiseSpec::Gaussian { sigma } => sigma,
            NoiseSpec::Dropout { fraction } => fraction,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NoiseSpec::Gaussian { .. } => "gaussian",
            NoiseSpec::Dropout { .. } => "dropout",
        }
    }
}

/// Subtracts half of the mean intensity from every pixel and projects the
/// result onto the unit sphere.
///
/// Only half the mean is removed, so a constant picture maps to the uniform
/// unit vector instead of vanishing.
pub fn center_and_normalize(img: &RawImage) -> Result<ImageVector> {
    let n = img.len() as f64;
    let total: f64 = img.pixels().iter().map(|&p| f64::from(p)).sum();
    let shift = total / (2.0 * n);
    let centered = img.pixels().iter().map(|&p| f64::from(p) - shift).collect();
    ImageVector::normalize(centered)
}

pub fn euclidean_distance(a: &ImageVector, b: &ImageVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let sq: f64 = a
        .components
        .iter()
        .zip(&b.components)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(libm::sqrt(sq))
}

/// Scalar product of two unit vectors, i.e. the cosine of the angle between them.
pub fn cosine_similarity(a: &ImageVector, b: &ImageVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(dot(&a.components, &b.components))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Uniform point on `S^(dim-1)` drawn from `rng`.
pub fn sample_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ImageVector> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive"));
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(unit) = ImageVector::normalize(v) {
            return Ok(unit);
        }
    }
}

/// Uniform point on `S^(dim-1)`, a pure function of `(dim, seed)`.
pub fn random_unit_vector(dim: usize, seed: u64) -> Result<ImageVector> {
    sample_unit_vector(dim, &mut stream(seed, 0))
}

pub fn apply_noise(v: &ImageVector, spec: &NoiseSpec, seed: u64) -> Result<ImageVector> {
    spec.validate()?;
    let mut rng = stream(seed, 0);
    let mut out = v.components.clone();
    match *spec {
        NoiseSpec::Gaussian { sigma } => {
            if sigma == 0.0 {
                return Ok(v.clone());
            }
            for c in out.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *c += sigma * z;
            }
        }
        NoiseSpec::Dropout { fraction } => {
            let count = libm::floor(fraction * v.dim() as f64) as usize;
            if count == 0 {
                return Ok(v.clone());
            }
            for i in index::sample(&mut rng, v.dim(), count.min(v.dim())) {
                out[i] = 0.0;
            }
        }
    }
    ImageVector::normalize(out)
}

/// Mean of `|(w, v)|` over `trials` independent uniform pairs on `S^(dim-1)`.
///
/// Scales as `dim^(-1/2)`; the Gaussian-projection limit is `sqrt(2 / (pi dim))`.
pub fn concentration_estimate(dim: usize, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive"));
    }
    let mut rng = stream(seed, 0);
    let mut total = 0.0;
    for _ in 0..trials {
        let w = sample_unit_vector(dim, &mut rng)?;
        let v = sample_unit_vector(dim, &mut rng)?;
        total += libm::fabs(dot(&w.components, &v.components));
    }
    Ok(total / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit(v: Vec<f64>) -> ImageVector {
        ImageVector::normalize(v).unwrap()
    }

    fn basis(dim: usize, i: usize) -> ImageVector {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        ImageVector::from_unit(v).unwrap()
    }

    #[test]
    fn raw_image_rejects_bad_shapes() {
        assert!(RawImage::new(2, 2, 255, vec![0, 1, 2]).is_err());
        assert!(RawImage::new(1, 1, 4, vec![5]).is_err());
        assert!(RawImage::new(0, 1, 4, vec![]).is_err());
        assert!(RawImage::new(1, 1, 0, vec![0]).is_err());
    }

    #[test]
    fn constant_image_survives_half_mean_centering() {
        let img = RawImage::new(2, 2, 255, vec![1, 1, 1, 1]).unwrap();
        let z = center_and_normalize(&img).unwrap();
        for c in z.components() {
            assert!((c - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_image_is_rejected() {
        let img = RawImage::new(2, 2, 255, vec![0; 4]).unwrap();
        assert_eq!(center_and_normalize(&img), Err(Error::ZeroVector));
    }

    #[test]
    fn two_pixel_centering_matches_hand_arithmetic() {
        // y = [1.5, -0.5], |y| = sqrt(2.5)
        let img = RawImage::new(2, 1, 2, vec![2, 0]).unwrap();
        let z = center_and_normalize(&img).unwrap();
        assert!((z.components()[0] - 0.948_683_298_050_513_8).abs() < 1e-12);
        assert!((z.components()[1] + 0.316_227_766_016_837_94).abs() < 1e-12);
        assert!((norm(z.components()) - 1.0).abs() < UNIT_NORM_TOL);
    }

    #[test]
    fn distance_examples() {
        let e1 = basis(3, 0);
        let e2 = basis(3, 1);
        let minus = ImageVector::from_unit(vec![-1.0, 0.0, 0.0]).unwrap();
        assert_eq!(euclidean_distance(&e1, &e1).unwrap(), 0.0);
        assert!((euclidean_distance(&e1, &e2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(euclidean_distance(&e1, &minus).unwrap(), 2.0);
        assert!(matches!(
            euclidean_distance(&e1, &basis(2, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cosine_examples() {
        let a = unit(vec![0.3, -0.2, 0.9]);
        let minus: Vec<f64> = a.components().iter().map(|x| -x).collect();
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&basis(3, 0), &basis(3, 2)).unwrap(), 0.0);
        let minus = ImageVector::from_unit(minus).unwrap();
        assert!((cosine_similarity(&a, &minus).unwrap() + 1.0).abs() < 1e-15);
        assert!(cosine_similarity(&a, &basis(2, 0)).is_err());
    }

    #[test]
    fn one_dimensional_sphere_has_two_points() {
        for seed in 0..32 {
            let v = random_unit_vector(1, seed).unwrap();
            assert_eq!(v.components()[0].abs(), 1.0);
        }
        assert!(random_unit_vector(0, 1).is_err());
    }

    #[test]
    fn random_unit_vector_is_deterministic() {
        assert_eq!(
            random_unit_vector(17, 99).unwrap(),
            random_unit_vector(17, 99).unwrap()
        );
        assert_ne!(
            random_unit_vector(17, 99).unwrap(),
            random_unit_vector(17, 100).unwrap()
        );
    }

    #[test]
    fn sphere_samples_are_isotropic() {
        // Component mean of a uniform point is 0 with standard error
        // 1/sqrt(dim * samples) per component.
        let dim = 1024;
        let samples = 10_000;
        let mut rng = stream(2024, 0);
        let mut sums = vec![0.0; dim];
        for _ in 0..samples {
            let v = sample_unit_vector(dim, &mut rng).unwrap();
            for (s, c) in sums.iter_mut().zip(v.components()) {
                *s += c;
            }
        }
        // 1024 simultaneous 4-sigma checks fail jointly about 6% of the
        // time, so one stray component is tolerated and the family-wise
        // bound is 5 sigma (Bonferroni, < 0.1%).
        let se = 1.0 / ((dim * samples) as f64).sqrt();
        let z: Vec<f64> = sums.iter().map(|s| (s / samples as f64).abs() / se).collect();
        assert!(z.iter().filter(|&&z| z >= 4.0).count() <= 1);
        assert!(z.iter().all(|&z| z < 5.0));
    }

    #[test]
    fn noise_identity_cases() {
        let v = random_unit_vector(16, 5).unwrap();
        assert_eq!(apply_noise(&v, &NoiseSpec::gaussian(0.0).unwrap(), 1).unwrap(), v);
        assert_eq!(apply_noise(&v, &NoiseSpec::dropout(0.0).unwrap(), 1).unwrap(), v);
    }

    #[test]
    fn full_dropout_vanishes() {
        let v = random_unit_vector(16, 5).unwrap();
        assert_eq!(
            apply_noise(&v, &NoiseSpec::dropout(1.0).unwrap(), 3),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn dropout_zeroes_floor_fraction() {
        let v = random_unit_vector(10, 8).unwrap();
        let w = apply_noise(&v, &NoiseSpec::dropout(0.35).unwrap(), 4).unwrap();
        assert_eq!(w.components().iter().filter(|&&c| c == 0.0).count(), 3);
        assert!((norm(w.components()) - 1.0).abs() < UNIT_NORM_TOL);
    }

    #[test]
    fn noise_spec_ranges() {
        assert!(NoiseSpec::gaussian(-0.1).is_err());
        assert!(NoiseSpec::gaussian(f64::NAN).is_err());
        assert!(NoiseSpec::dropout(1.5).is_err());
        assert!(NoiseSpec::dropout(-0.01).is_err());
    }

    #[test]
    fn gaussian_noise_keeps_images_close() {
        // Frozen from an independent Monte-Carlo run: at N = 64 and
        // sigma = 0.05 the cosine exceeds 0.9 in about 98% of trials
        // (worst of 20 batches of 1000: 97.1%).
        let spec = NoiseSpec::gaussian(0.05).unwrap();
        let mut close = 0;
        for t in 0..1000u64 {
            let v = random_unit_vector(64, 2 * t).unwrap();
            let w = apply_noise(&v, &spec, 2 * t + 1).unwrap();
            if cosine_similarity(&v, &w).unwrap() > 0.9 {
                close += 1;
            }
        }
        assert!(close >= 960, "only {close}/1000 stayed above 0.9");
    }

    #[test]
    fn concentration_on_the_circle_is_exact() {
        assert_eq!(concentration_estimate(1, 100, 3).unwrap(), 1.0);
        assert!(concentration_estimate(8, 0, 3).is_err());
    }

    #[test]
    fn concentration_scales_as_inverse_root_dim() {
        for dim in [64usize, 256] {
            let small = concentration_estimate(dim, 10_000, 11).unwrap();
            let large = concentration_estimate(4 * dim, 10_000, 12).unwrap();
            assert!(((2.0 * large) / small - 1.0).abs() < 0.2);
        }
        let e = concentration_estimate(256, 10_000, 13).unwrap();
        assert!(e > 0.3 / 16.0 && e < 1.5 / 16.0);
    }
}
