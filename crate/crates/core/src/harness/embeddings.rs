use crate::embed_gauss::{FeatureVector, GaussEmbedding};
use crate::embed_tent::{embed_vector, TentCoordinates, TentFamilyParams};
use crate::error::Result;
use crate::mazur::{mazur_map, MazurParams};
use crate::moduli::{Modulus, ModulusPair};
use crate::scalar::Real;
use crate::space::{luxemburg_norm, SparseVector};

/// A map between metric spaces, evaluated pointwise by the harness.
pub trait Embedding<T: Real>: Sync {
    type Image: Send + Sync;

    fn name(&self) -> String;
    fn source_distance(&self, x: &SparseVector<T>, y: &SparseVector<T>) -> Result<T>;
    fn embed(&self, x: &SparseVector<T>) -> Result<Self::Image>;
    fn image_distance(&self, a: &Self::Image, b: &Self::Image) -> T;
    /// Relative error the embedding itself reports (tails, truncation).
    fn error_bound(&self) -> T {
        T::zero()
    }
}

/// Identity on `ℓ_p`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityLp<T> {
    pub p: T,
}

impl<T: Real> IdentityLp<T> {
    /// `ρ1 = ρ2 = id`.
    pub fn moduli(&self) -> ModulusPair<T> {
        ModulusPair { rho1: Modulus::Linear { slope: T::one() }, rho2: Modulus::Linear { slope: T::one() } }
    }
}

impl<T: Real> Embedding<T> for IdentityLp<T> {
    type Image = SparseVector<T>;

    fn name(&self) -> String {
        format!("identity on l_{}", self.p)
    }

    fn source_distance(&self, x: &SparseVector<T>, y: &SparseVector<T>) -> Result<T> {
        Ok(x.sub(y).lp_norm(self.p))
    }

    fn embed(&self, x: &SparseVector<T>) -> Result<SparseVector<T>> {
        Ok(x.clone())
    }

    fn image_distance(&self, a: &SparseVector<T>, b: &SparseVector<T>) -> T {
        a.sub(b).lp_norm(self.p)
    }
}

/// Tent embedding `h_M -> ℓ_p(ℕ × ℤ × ℤ)`, source distance the Luxemburg norm.
#[derive(Debug, Clone)]
pub struct TentEmbedding<T> {
    pub params: TentFamilyParams<T>,
}

impl<T: Real> Embedding<T> for TentEmbedding<T> {
    type Image = TentCoordinates<T>;

    fn name(&self) -> String {
        format!("tent {} -> l_{} (q={})", self.params.m.describe(), self.params.p, self.params.q)
    }

    fn source_distance(&self, x: &SparseVector<T>, y: &SparseVector<T>) -> Result<T> {
        Ok(luxemburg_norm(&self.params.m, &x.sub(y))?.value)
    }

    fn embed(&self, x: &SparseVector<T>) -> Result<TentCoordinates<T>> {
        embed_vector(&self.params, x)
    }

    fn image_distance(&self, a: &TentCoordinates<T>, b: &TentCoordinates<T>) -> T {
        a.distance(b, self.params.p)
    }

    fn error_bound(&self) -> T {
        self.params.tail_eps
    }
}

/// Stacked Gaussian-feature embedding `ℓ_2 -> ℓ_p`.
#[derive(Debug, Clone)]
pub struct GaussStackedEmbedding<T> {
    pub inner: GaussEmbedding<T>,
}

impl<T: Real> Embedding<T> for GaussStackedEmbedding<T> {
    type Image = FeatureVector<T>;

    fn name(&self) -> String {
        let g = &self.inner.params;
        format!("gauss stacked l_2 -> l_{} ({} levels, dim {})", g.p, g.levels.len(), g.dim)
    }

    fn source_distance(&self, x: &SparseVector<T>, y: &SparseVector<T>) -> Result<T> {
        Ok(x.sub(y).l2_norm())
    }

    fn embed(&self, x: &SparseVector<T>) -> Result<FeatureVector<T>> {
        self.inner.stacked_embed(x)
    }

    fn image_distance(&self, a: &FeatureVector<T>, b: &FeatureVector<T>) -> T {
        a.distance(b, self.inner.params.p)
    }

    fn error_bound(&self) -> T {
        self.inner.params.eps_trunc
    }
}

/// Mazur map between unit spheres, `S(ℓ_p) -> S(ℓ_q)`.
#[derive(Debug, Clone, Copy)]
pub struct MazurEmbedding<T> {
    pub params: MazurParams<T>,
}

impl<T: Real> MazurEmbedding<T> {
    /// `ρ1 = c s^{p/q}`, `ρ2 = (p/q) s`; valid for `p > q` on the sphere.
    pub fn moduli(&self, c: T) -> ModulusPair<T> {
        let e = self.params.exponent();
        ModulusPair { rho1: Modulus::Power { coef: c, exponent: e }, rho2: Modulus::Linear { slope: e } }
    }
}

impl<T: Real> Embedding<T> for MazurEmbedding<T> {
    type Image = SparseVector<T>;

    fn name(&self) -> String {
        format!("mazur S(l_{}) -> S(l_{})", self.params.p, self.params.q)
    }

    fn source_distance(&self, x: &SparseVector<T>, y: &SparseVector<T>) -> Result<T> {
        Ok(x.sub(y).lp_norm(self.params.p))
    }

    fn embed(&self, x: &SparseVector<T>) -> Result<SparseVector<T>> {
        mazur_map(&self.params, x)
    }

    fn image_distance(&self, a: &SparseVector<T>, b: &SparseVector<T>) -> T {
        a.sub(b).lp_norm(self.params.q)
    }
}
