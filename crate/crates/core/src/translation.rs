//! Coefficient translation from the receiver origin to each microphone unit,
//! and the least-squares solve for the receiver-region coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{to_spherical, SphericalCoord};
use crate::linalg::{self, CMatrix, CVector, RCOND};
use crate::modal::{CoefficientVector, WaveContext};
use crate::recording::{MicArray, ModeRecordings};
use crate::specfun::{mode_count, spherical_bessel_j_seq, spherical_harmonics_upto, wigner_3j, HarmonicIndex};

/// `i^p` for integer `p`.
fn i_pow(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// One term of the finite `l` sum: `Ŝ += coeff · j_l(kR) · Y*_{l,b−μ}(R̂)`.
#[derive(Debug, Clone, Copy)]
struct CouplingTerm {
    l: usize,
    /// flat index of `(l, b − μ)`
    flat: usize,
    coeff: Complex64,
}

/// Geometry-free part of `Ŝ^{μb}_{va}`: everything except `j_l(kR)` and the harmonic.
fn coupling_terms(v: usize, mu: i64, a: usize, b: i64) -> Vec<CouplingTerm> {
    let (vi, ai) = (v as i64, a as i64);
    let m = b - mu;
    let lo = (vi - ai).unsigned_abs() as usize;
    let mut out = Vec::new();
    for l in lo..=(v + a) {
        let li = l as i64;
        if (vi + ai + li) % 2 != 0 || m.abs() > li {
            continue;
        }
        let w1 = wigner_3j(vi, ai, li, 0, 0, 0);
        let w2 = wigner_3j(vi, ai, li, mu, -b, m);
        if w1 == 0.0 || w2 == 0.0 {
            continue;
        }
        let sign = if (2 * mu - b).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let norm = ((2 * v + 1) as f64 * (2 * a + 1) as f64 * (2 * l + 1) as f64 / (4.0 * PI)).sqrt();
        let coeff = 4.0 * PI * i_pow(ai - vi) * i_pow(li) * (sign * norm * w1 * w2);
        out.push(CouplingTerm {
            l,
            flat: HarmonicIndex::new(l, m).expect("|m| <= l").flat(),
            coeff,
        });
    }
    out
}

/// `Ŝ^{μb}_{va}(R_q)`: maps interior coefficients `(v, μ)` about the origin
/// to local coefficients `(a, b)` about the point `R_q`.
pub fn s_hat(v: usize, mu: i64, a: usize, b: i64, r_q: SphericalCoord, ctx: &WaveContext) -> Result<Complex64> {
    HarmonicIndex::new(v, mu)?;
    HarmonicIndex::new(a, b)?;
    let lmax = v + a;
    let j = spherical_bessel_j_seq(lmax, ctx.k() * r_q.radius);
    let y = spherical_harmonics_upto(lmax, r_q.theta, r_q.phi);
    Ok(coupling_terms(v, mu, a, b)
        .iter()
        .map(|t| t.coeff * j[t.l] * y[t.flat].conj())
        .sum())
}

/// Rows `(q, a, b)` for `a ≤ A'`, columns `(v, μ)` for `v ≤ N_r`.
#[derive(Debug, Clone)]
pub struct TranslationMatrixTPrime {
    matrix: CMatrix,
    mic_count: usize,
    local_order: usize,
    receiver_order: usize,
}

impl TranslationMatrixTPrime {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn mic_count(&self) -> usize {
        self.mic_count
    }

    /// Local order `A'` of the rows.
    pub fn local_order(&self) -> usize {
        self.local_order
    }

    pub fn receiver_order(&self) -> usize {
        self.receiver_order
    }
}

/// Assemble `T'` using local orders up to `local_order` (normally the
/// effective order of the units at this frequency).
pub fn build_t_prime(
    mics: &MicArray,
    local_order: usize,
    receiver_order: usize,
    ctx: &WaveContext,
    allow_aliasing: bool,
) -> Result<TranslationMatrixTPrime> {
    let rows_per = mode_count(local_order);
    let cols = mode_count(receiver_order);
    if !allow_aliasing && mics.len() * rows_per < cols {
        return Err(Error::config(
            "microphone aliasing bound Q(A+1)^2 >= (N_r+1)^2",
            format!(
                "Q(A'+1)^2 = {}·{rows_per} < {cols} for A' = {local_order}, N_r = {receiver_order}",
                mics.len()
            ),
        ));
    }
    let lmax = local_order + receiver_order;
    let terms: Vec<Vec<Vec<CouplingTerm>>> = HarmonicIndex::up_to(local_order)
        .map(|ab| {
            HarmonicIndex::up_to(receiver_order)
                .map(|vm| coupling_terms(vm.order(), vm.degree(), ab.order(), ab.degree()))
                .collect()
        })
        .collect();

    let mut matrix = CMatrix::zeros(mics.len() * rows_per, cols);
    for (q, centre) in mics.centers().iter().enumerate() {
        let r = to_spherical(*centre);
        let j = spherical_bessel_j_seq(lmax, ctx.k() * r.radius);
        let y: Vec<Complex64> = spherical_harmonics_upto(lmax, r.theta, r.phi)
            .into_iter()
            .map(|z| z.conj())
            .collect();
        for (row, per_row) in terms.iter().enumerate() {
            for (col, ts) in per_row.iter().enumerate() {
                matrix[(q * rows_per + row, col)] = ts.iter().map(|t| t.coeff * j[t.l] * y[t.flat]).sum();
            }
        }
    }
    Ok(TranslationMatrixTPrime {
        matrix,
        mic_count: mics.len(),
        local_order,
        receiver_order,
    })
}

/// Pseudoinverse of `T'`, reusable across every synthesized mode.
#[derive(Debug, Clone)]
pub struct AlphaSolver {
    pinv: CMatrix,
    tp: TranslationMatrixTPrime,
}

impl AlphaSolver {
    pub fn new(tp: TranslationMatrixTPrime) -> Result<Self> {
        let (pinv, _) = linalg::pseudo_inverse(&tp.matrix, RCOND, "receiver coefficient solve")?;
        Ok(Self { pinv, tp })
    }

    pub fn t_prime(&self) -> &TranslationMatrixTPrime {
        &self.tp
    }

    /// Pick the rows `a ≤ A'` of stacked recordings laid out as `(q, a, b)`
    /// with `(stored_order+1)²` entries per unit.
    fn select_rows(&self, stacked: &CMatrix, stored_order: usize) -> Result<CMatrix> {
        let per_stored = mode_count(stored_order);
        let per = mode_count(self.tp.local_order);
        if stored_order < self.tp.local_order || stacked.nrows() != self.tp.mic_count * per_stored {
            return Err(Error::config(
                "recording shape",
                format!(
                    "{} recording rows do not match Q = {} with local order {}",
                    stacked.nrows(),
                    self.tp.mic_count,
                    self.tp.local_order
                ),
            ));
        }
        let mut out = CMatrix::zeros(self.tp.mic_count * per, stacked.ncols());
        for q in 0..self.tp.mic_count {
            out.rows_mut(q * per, per)
                .copy_from(&stacked.rows(q * per_stored, per));
        }
        Ok(out)
    }

    /// Solve for every column of `stacked` at once; column `c` of the
    /// result is the `α` slice for column `c` of the input.
    pub fn solve_many(&self, stacked: &CMatrix, stored_order: usize) -> Result<CMatrix> {
        let rhs = self.select_rows(stacked, stored_order)?;
        Ok(&self.pinv * rhs)
    }

    /// `α = T'†·γ` and the residual `‖T'α − γ‖`.
    pub fn solve(&self, recordings: &ModeRecordings) -> Result<(CoefficientVector, f64)> {
        let stacked = CMatrix::from_column_slice(recordings.values().len(), 1, recordings.values().as_slice());
        let rhs = self.select_rows(&stacked, recordings.local_order())?;
        let alpha: CVector = (&self.pinv * &rhs).column(0).into_owned();
        let res = linalg::residual(&self.tp.matrix, &alpha, &rhs.column(0).into_owned());
        Ok((CoefficientVector::from_entries(self.tp.receiver_order, alpha.as_slice().to_vec())?, res))
    }
}

/// Single-shot `α = T'†·γ`.
pub fn solve_alpha(tp: &TranslationMatrixTPrime, recordings: &ModeRecordings) -> Result<(CoefficientVector, f64)> {
    AlphaSolver::new(tp.clone())?.solve(recordings)
}
