//! Loudspeaker mode matching: the `T` matrix, minimum-norm weights and
//! conditioning.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{to_spherical, Cartesian3, SphericalCoord};
use crate::linalg::{self, CMatrix, CVector, RCOND};
use crate::modal::{green, WaveContext};
use crate::specfun::{mode_count, spherical_bessel_j_seq, spherical_hankel_h1_seq, spherical_harmonics_upto, HarmonicIndex};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `T[(n,m), ℓ] = i·k·j_n(k|y_ℓ|)·Y*_nm(ŷ_ℓ)` with speaker positions taken
/// about the source-region center.
#[derive(Debug, Clone)]
pub struct TranslationMatrixT {
    matrix: CMatrix,
    max_order: usize,
    k: f64,
    speakers: Vec<SphericalCoord>,
}

impl TranslationMatrixT {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn speakers(&self) -> &[SphericalCoord] {
        &self.speakers
    }

    pub fn speaker_count(&self) -> usize {
        self.speakers.len()
    }
}

/// Column `(n,m)` holds the speaker weights synthesizing unit mode `(n,m)`.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    matrix: CMatrix,
    max_order: usize,
    residuals: Vec<f64>,
}

impl WeightMatrix {
    pub fn from_matrix(matrix: CMatrix, max_order: usize) -> Result<Self> {
        if matrix.ncols() != mode_count(max_order) {
            return Err(Error::config(
                "weight matrix shape",
                format!("{} columns for order {max_order}", matrix.ncols()),
            ));
        }
        let residuals = vec![f64::NAN; matrix.ncols()];
        Ok(Self {
            matrix,
            max_order,
            residuals,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn speaker_count(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn column(&self, target: HarmonicIndex) -> Result<CVector> {
        check_target(target, self.max_order)?;
        Ok(self.matrix.column(target.flat()).into_owned())
    }

    /// `‖T·w − e_nm‖` per target, or NaN when unknown.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }
}

pub fn build_t(speakers: &[SphericalCoord], max_order: usize, ctx: &WaveContext) -> TranslationMatrixT {
    let k = ctx.k();
    let rows = mode_count(max_order);
    let mut matrix = CMatrix::zeros(rows, speakers.len());
    for (l, s) in speakers.iter().enumerate() {
        let j = spherical_bessel_j_seq(max_order, k * s.radius);
        let y = spherical_harmonics_upto(max_order, s.theta, s.phi);
        for idx in HarmonicIndex::up_to(max_order) {
            matrix[(idx.flat(), l)] = I * k * j[idx.order()] * y[idx.flat()].conj();
        }
    }
    TranslationMatrixT {
        matrix,
        max_order,
        k,
        speakers: speakers.to_vec(),
    }
}

fn check_aliasing(t: &TranslationMatrixT, allow_aliasing: bool) -> Result<()> {
    let need = mode_count(t.max_order);
    if !allow_aliasing && t.speaker_count() < need {
        return Err(Error::config(
            "loudspeaker aliasing bound L >= (N_s+1)^2",
            format!("L = {} < {need} for N_s = {}", t.speaker_count(), t.max_order),
        ));
    }
    Ok(())
}

fn check_target(target: HarmonicIndex, max_order: usize) -> Result<()> {
    if target.order() > max_order {
        return Err(Error::config(
            "target order",
            format!("target order {} exceeds N_s = {max_order}", target.order()),
        ));
    }
    Ok(())
}

/// Minimum-norm weights `w = T†·e_nm` and the residual `‖T·w − e_nm‖`.
pub fn solve_weights(t: &TranslationMatrixT, target: HarmonicIndex, allow_aliasing: bool) -> Result<(CVector, f64)> {
    check_target(target, t.max_order)?;
    let all = solve_all_weights(t, allow_aliasing)?;
    let col = all.matrix.column(target.flat()).into_owned();
    Ok((col, all.residuals[target.flat()]))
}

/// Weights for every mode up to `N_s` from a single pseudoinverse.
pub fn solve_all_weights(t: &TranslationMatrixT, allow_aliasing: bool) -> Result<WeightMatrix> {
    check_aliasing(t, allow_aliasing)?;
    let context = format!("loudspeaker weights at k = {:.6}", t.k);
    let (pinv, _) = linalg::pseudo_inverse(&t.matrix, RCOND, &context)?;
    let tw = &t.matrix * &pinv;
    let n = mode_count(t.max_order);
    let residuals = (0..n)
        .map(|c| {
            let mut col = tw.column(c).into_owned();
            col[c] -= Complex64::new(1.0, 0.0);
            col.norm()
        })
        .collect();
    Ok(WeightMatrix {
        matrix: pinv,
        max_order: t.max_order,
        residuals,
    })
}

pub fn condition_number(t: &TranslationMatrixT) -> Result<f64> {
    linalg::condition_number(&t.matrix, "condition number of T")
}

/// Free-field pressure `Σ_ℓ w_ℓ·G(z − y_ℓ)` at `z` (source-local coordinates).
pub fn synthesized_field(speakers: &[SphericalCoord], weights: &CVector, z: Cartesian3, ctx: &WaveContext) -> Result<Complex64> {
    if weights.len() != speakers.len() {
        return Err(Error::config(
            "weight vector length",
            format!("{} weights for {} speakers", weights.len(), speakers.len()),
        ));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for (s, w) in speakers.iter().zip(weights.iter()) {
        let d = z.distance(s.to_cartesian());
        if d == 0.0 {
            return Err(Error::domain("probe coincides with a loudspeaker"));
        }
        sum += w * green(d, ctx.k());
    }
    Ok(sum)
}

/// Largest relative deviation between the synthesized field and the ideal
/// outgoing mode `h_n(k|z|)·Y_nm(ẑ)` over the probe points.
pub fn probe_synthesis_error(
    t: &TranslationMatrixT,
    weights: &WeightMatrix,
    target: HarmonicIndex,
    probes: &[Cartesian3],
    ctx: &WaveContext,
) -> Result<f64> {
    let w = weights.column(target)?;
    let mut worst: f64 = 0.0;
    for &z in probes {
        let zs = to_spherical(z);
        let h = spherical_hankel_h1_seq(target.order(), ctx.k() * zs.radius)?[target.order()];
        let y = spherical_harmonics_upto(target.order(), zs.theta, zs.phi)[target.flat()];
        let ideal = h * y;
        let got = synthesized_field(t.speakers(), &w, z, ctx)?;
        worst = worst.max((got - ideal).norm() / ideal.norm());
    }
    Ok(worst)
}
