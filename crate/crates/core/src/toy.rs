//! Analytic stand-in for a generator plus face embedder with a known identity
//! axis.
//!
//! Latent codes are standard normal and the mapping network is the identity.
//! The embedding of `w` is
//!
//! ```text
//! normalize( alpha (w.u) e_1  +  beta sum_k (b_k . w) e_{k+1} )
//! ```
//!
//! where `u` is the hidden unit identity direction and `b_1..b_{d-1}` is a
//! seeded orthonormal basis of its complement, so the first coordinate
//! carries identity and the rest carry the residual.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, stream, SeededRng};
use crate::similarity::{dot, norm};

pub const DEFAULT_ALPHA: f64 = 3.0;
pub const DEFAULT_BETA: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyConfig {
    pub d: usize,
    /// Gain of the identity coordinate.
    pub alpha: f64,
    /// Gain of the residual coordinates.
    pub beta: f64,
    pub seed: u64,
}

impl ToyConfig {
    pub fn new(d: usize, seed: u64) -> Self {
        ToyConfig {
            d,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidArgument(format!(
                "toy d must be at least 2, got {}",
                self.d
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "beta must be non-negative, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyWorld {
    pub config: ToyConfig,
    direction: Vec<f64>,
    /// `(d-1) x d`, orthonormal rows, each orthogonal to `direction`.
    complement: Matrix,
}

fn unit_gaussian(d: usize, rng: &mut SeededRng) -> Vec<f64> {
    loop {
        let v = rng.normal_vec(d);
        let n = norm(&v);
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

impl ToyWorld {
    pub fn new(config: ToyConfig) -> Result<Self> {
        config.validate()?;
        let d = config.d;
        let mut rng = SeededRng::new(derive_seed(config.seed, &[stream::TOY_DIRECTION]));
        let direction = unit_gaussian(d, &mut rng);

        // Gram-Schmidt (two passes) of seeded Gaussian vectors against u and each other
        let mut rng = SeededRng::new(derive_seed(config.seed, &[stream::TOY_COMPLEMENT]));
        let mut basis: Vec<Vec<f64>> = vec![direction.clone()];
        while basis.len() < d {
            let mut v = rng.normal_vec(d);
            for _ in 0..2 {
                for b in &basis {
                    let p = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
                }
            }
            let n = norm(&v);
            if n > 1e-6 {
                basis.push(v.into_iter().map(|x| x / n).collect());
            }
        }
        let complement = Matrix::from_rows(&basis[1..])?;
        Ok(ToyWorld {
            config,
            direction,
            complement,
        })
    }

    /// The hidden identity direction `u`.
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn embedding_dim(&self) -> usize {
        self.config.d
    }

    /// Un-normalized embedding.
    fn raw_embedding(&self, w: &[f64]) -> Vec<f64> {
        let mut e = Vec::with_capacity(self.config.d);
        e.push(self.config.alpha * dot(w, &self.direction));
        e.extend(
            self.complement
                .iter_rows()
                .map(|b| self.config.beta * dot(b, w)),
        );
        e
    }

    pub fn embed(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.config.d {
            return Err(Error::DimensionMismatch(format!(
                "toy world has d = {}, latent has {}",
                self.config.d,
                w.len()
            )));
        }
        let e = self.raw_embedding(w);
        let n = norm(&e);
        // cancellation in w.u leaves ~1e-16 |w| instead of an exact zero
        let floor = 1e-12 * self.config.alpha.max(self.config.beta) * norm(w);
        if n <= floor {
            return Err(Error::DegenerateEmbedding {
                row: None,
                col: None,
            });
        }
        Ok(e.into_iter().map(|x| x / n).collect())
    }

    pub fn embed_matrix(&self, w: &Matrix) -> Result<Matrix> {
        let rows: Vec<Vec<f64>> = (0..w.rows())
            .into_par_iter()
            .map(|i| {
                self.embed(w.row(i)).map_err(|e| match e {
                    Error::DegenerateEmbedding { .. } => Error::DegenerateEmbedding {
                        row: Some(i),
                        col: None,
                    },
                    e => e,
                })
            })
            .collect::<Result<_>>()?;
        Matrix::from_rows(&rows)
    }
}

/// `m` i.i.d. standard-normal latent codes.
pub fn toy_latents(m: usize, d: usize, seed: u64) -> Result<Matrix> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!(
            "toy m must be at least 3, got {m}"
        )));
    }
    if d < 1 {
        return Err(Error::InvalidArgument("toy d must be at least 1".into()));
    }
    let mut rng = SeededRng::new(derive_seed(seed, &[stream::TOY_LATENTS]));
    Matrix::new(m, d, rng.normal_vec(m * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::cosine_similarity;

    fn world(d: usize, alpha: f64, beta: f64) -> ToyWorld {
        ToyWorld::new(ToyConfig {
            d,
            alpha,
            beta,
            seed: 3,
        })
        .unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        let t = world(16, 1.0, 0.2);
        assert!((norm(t.direction()) - 1.0).abs() < 1e-12);
        for (i, b) in t.complement.iter_rows().enumerate() {
            assert!((norm(b) - 1.0).abs() < 1e-12);
            assert!(dot(b, t.direction()).abs() < 1e-12);
            for c in t.complement.iter_rows().skip(i + 1) {
                assert!(dot(b, c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_direction_maps_to_first_axis() {
        let t = world(8, 1.0, 0.0);
        let e = t.embed(t.direction()).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!(e[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn orthogonal_latent_without_residual_gain_is_degenerate() {
        let t = world(8, 1.0, 0.0);
        let w = t.complement.row(0).to_vec();
        assert!(matches!(
            t.embed(&w),
            Err(Error::DegenerateEmbedding { .. })
        ));
    }

    #[test]
    fn embedding_preserves_residual_geometry() {
        let t = world(10, 1.0, 0.5);
        let mut rng = SeededRng::new(9);
        let w = rng.normal_vec(10);
        let e = t.raw_embedding(&w);
        let s = dot(&w, t.direction());
        let r: Vec<f64> = w
            .iter()
            .zip(t.direction())
            .map(|(x, u)| x - s * u)
            .collect();
        assert!((norm(&e[1..]) - 0.5 * norm(&r)).abs() < 1e-12);
    }

    #[test]
    fn similarity_increases_with_identity_product() {
        // residuals held fixed and mutually orthogonal; identity projections on a grid
        let t = world(12, 1.0, 0.2);
        let r1 = t.complement.row(0);
        let r2 = t.complement.row(1);
        let u = t.direction();
        let latent =
            |s: f64, r: &[f64]| -> Vec<f64> { u.iter().zip(r).map(|(a, b)| s * a + b).collect() };
        for s1 in [0.3, 1.0, 2.5] {
            let e1 = t.embed(&latent(s1, r1)).unwrap();
            let mut last = f64::NEG_INFINITY;
            for k in -20..=20 {
                let s2 = k as f64 * 0.25;
                let c = cosine_similarity(&e1, &t.embed(&latent(s2, r2)).unwrap()).unwrap();
                assert!(c > last, "s1 {s1} s2 {s2}");
                last = c;
            }
        }
    }

    #[test]
    fn latents_deterministic_and_seed_dependent() {
        let a = toy_latents(20, 4, 1).unwrap();
        assert_eq!(a, toy_latents(20, 4, 1).unwrap());
        assert_ne!(a, toy_latents(20, 4, 2).unwrap());
        assert!(toy_latents(2, 4, 1).is_err());
    }

    #[test]
    fn latent_moments() {
        let (m, d) = (10_000, 16);
        let w = toy_latents(m, d, 12).unwrap();
        for c in 0..d {
            let col: Vec<f64> = (0..m).map(|i| w.get(i, c)).collect();
            let mean = col.iter().sum::<f64>() / m as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            assert!(mean.abs() < 0.05, "col {c} mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "col {c} var {var}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(ToyWorld::new(ToyConfig {
            d: 1,
            alpha: 1.0,
            beta: 0.0,
            seed: 0
        })
        .is_err());
        assert!(ToyWorld::new(ToyConfig {
            d: 4,
            alpha: 0.0,
            beta: 0.0,
            seed: 0
        })
        .is_err());
        assert!(ToyWorld::new(ToyConfig {
            d: 4,
            alpha: 1.0,
            beta: -0.1,
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn embed_matrix_reports_row() {
        let t = world(4, 1.0, 0.0);
        let mut w = toy_latents(3, 4, 0).unwrap();
        w.row_mut(2).copy_from_slice(t.complement.row(1));
        assert!(matches!(
            t.embed_matrix(&w),
            Err(Error::DegenerateEmbedding { row: Some(2), .. })
        ));
    }
}
