//! Concentric-hypersphere classification data.
//!
//! Points are uniform on one of two origin-centered spheres; label -1
//! lives on the inner radius, label +1 on the outer. The two spheres
//! are close (1 and 1.1 in the reference setup), so the task is easy
//! for a norm-sensitive learner yet the radial projection that swaps
//! every point onto the other sphere, flipping its label, produces a
//! set with the exact same marginal distribution and all labels wrong.

use crate::error::{Error, Result};
use crate::losses::{Dataset, LabeledExample};
use crate::numerics::{dot, random_sign, sample_gaussian, RngStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypersphereConfig {
    pub dim: usize,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl HypersphereConfig {
    pub fn new(dim: usize, r_inner: f64, r_outer: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadParameter("sphere dimension must be positive".into()));
        }
        if !(r_inner > 0.0 && r_outer > r_inner && r_outer.is_finite()) {
            return Err(Error::BadParameter(format!(
                "radii must satisfy 0 < r_inner < r_outer, got {r_inner} and {r_outer}"
            )));
        }
        Ok(HypersphereConfig { dim, r_inner, r_outer })
    }

    /// The reference radii 1 and 1.1.
    pub fn standard(dim: usize) -> Result<Self> {
        Self::new(dim, 1.0, 1.1)
    }

    fn radius_of(&self, y: i8) -> f64 {
        if y < 0 {
            self.r_inner
        } else {
            self.r_outer
        }
    }
}

/// Draw m labeled points, labels fair coin flips, positions uniform on
/// the label's sphere (a normalized Gaussian draw). Example i is a pure
/// function of `stream.derive(i)`.
pub fn sample_hypersphere(cfg: &HypersphereConfig, m: usize, stream: RngStream) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::EmptyInput("hypersphere sample size"));
    }
    let examples = (0..m)
        .map(|i| {
            let mut rng = stream.derive(i as u64).rng();
            let y = random_sign(&mut rng);
            let r = cfg.radius_of(y);
            let mut x = sample_gaussian(&mut rng, cfg.dim, 1.0).expect("unit variance");
            let mut norm = dot(&x, &x).sqrt();
            while norm < 1e-12 {
                x = sample_gaussian(&mut rng, cfg.dim, 1.0).expect("unit variance");
                norm = dot(&x, &x).sqrt();
            }
            let s = r / norm;
            for v in &mut x {
                *v *= s;
            }
            LabeledExample::new(x, y)
        })
        .collect();
    Dataset::new(examples)
}

/// The radial swap: every point is projected onto the other sphere and
/// its label flipped. Point for point this preserves the marginal
/// distribution of (x, y), yet a learner that keyed its answers to the
/// radius gets every swapped example wrong. Inputs must sit on one of
/// the two configured spheres (relative tolerance 1e-6).
pub fn project_swap(data: &Dataset, cfg: &HypersphereConfig) -> Result<Dataset> {
    if data.dim() != cfg.dim {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim,
            got: data.dim(),
            context: "radial swap input",
        });
    }
    let close = |norm: f64, r: f64| (norm - r).abs() <= 1e-6 * r;
    let examples = data
        .iter()
        .map(|e| {
            let norm = dot(&e.x, &e.x).sqrt();
            let target = if close(norm, cfg.r_inner) {
                cfg.r_outer
            } else if close(norm, cfg.r_outer) {
                cfg.r_inner
            } else {
                return Err(Error::NotOnSphere {
                    norm,
                    r_inner: cfg.r_inner,
                    r_outer: cfg.r_outer,
                });
            };
            let s = target / norm;
            Ok(LabeledExample::new(e.x.iter().map(|v| v * s).collect(), -e.y))
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(examples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_sit_on_their_label_sphere() {
        let cfg = HypersphereConfig::standard(16).unwrap();
        let data = sample_hypersphere(&cfg, 500, RngStream::new(60, 0)).unwrap();
        for e in data.iter() {
            let norm = dot(&e.x, &e.x).sqrt();
            let want = if e.y < 0 { 1.0 } else { 1.1 };
            assert!((norm - want).abs() < 1e-12, "label {} point has norm {norm}", e.y);
        }
        let positives = data.iter().filter(|e| e.y > 0).count();
        assert!(
            (150..=350).contains(&positives),
            "labels should be near-balanced, got {positives}/500 positive"
        );
    }

    #[test]
    fn swap_moves_every_point_and_flips_every_label() {
        let cfg = HypersphereConfig::standard(8).unwrap();
        let data = sample_hypersphere(&cfg, 200, RngStream::new(61, 0)).unwrap();
        let swapped = project_swap(&data, &cfg).unwrap();
        for (a, b) in data.iter().zip(swapped.iter()) {
            assert_eq!(b.y, -a.y);
            let norm_a = dot(&a.x, &a.x).sqrt();
            let norm_b = dot(&b.x, &b.x).sqrt();
            let want = if (norm_a - 1.0).abs() < 1e-9 { 1.1 } else { 1.0 };
            assert!((norm_b - want).abs() < 1e-9, "swapped norm {norm_b}, wanted {want}");
            // Direction is preserved: the cosine with the original is 1.
            let cos = dot(&a.x, &b.x) / (norm_a * norm_b);
            assert!((cos - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn swapping_twice_returns_the_original() {
        let cfg = HypersphereConfig::standard(5).unwrap();
        let data = sample_hypersphere(&cfg, 100, RngStream::new(62, 0)).unwrap();
        let back = project_swap(&project_swap(&data, &cfg).unwrap(), &cfg).unwrap();
        for (a, b) in data.iter().zip(back.iter()) {
            assert_eq!(a.y, b.y);
            for (p, q) in a.x.iter().zip(&b.x) {
                assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
            }
        }
    }

    #[test]
    fn off_sphere_points_are_rejected() {
        let cfg = HypersphereConfig::standard(2).unwrap();
        let data = Dataset::new(vec![LabeledExample::new(vec![0.3, 0.4], -1)]).unwrap();
        match project_swap(&data, &cfg) {
            Err(Error::NotOnSphere { norm, .. }) => assert!((norm - 0.5).abs() < 1e-12),
            other => panic!("expected NotOnSphere, got {other:?}"),
        }
    }

    #[test]
    fn bad_radii_are_rejected() {
        assert!(HypersphereConfig::new(3, 1.1, 1.0).is_err());
        assert!(HypersphereConfig::new(3, 0.0, 1.0).is_err());
        assert!(HypersphereConfig::new(0, 1.0, 1.1).is_err());
    }
}
