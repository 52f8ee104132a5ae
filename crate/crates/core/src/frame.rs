//! The boundary frame `(L, N)`, Hermitian forms in that frame, covariant
//! scalars and Levi-flat detection.
//!
//! Vectors of type (1,0) are stored as coefficient pairs `(X_z, X_w)`. The
//! metric pairs them as `g(X, Y) = ½ Σ X_i conj(Y_i)`, so that `√2 L` and
//! `√2 N` are orthonormal. Hessians use the flat connection:
//! `Hess_f(X, Y) = Σ X_i conj(Y_j) f_{z_i z̄_j}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::BoundaryPoint;
use crate::error::{DfError, Result};
use crate::jet::{Jet2, C64};
use crate::quadrature::knn_weights;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Smallest admissible `sqrt(|ρ_z|² + |ρ_w|²)`.
pub const MIN_GRADIENT: f64 = 1e-12;

/// Normalized tangential and normal fields with first derivatives of their
/// coefficients. `d_l[i][k]` is the derivative of `l[i]` along
/// `(∂z, ∂w, ∂z̄, ∂w̄)[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub l: [C64; 2],
    pub n: [C64; 2],
    pub d_l: [[C64; 4]; 2],
    pub d_n: [[C64; 4]; 2],
}

/// Derivative of a coefficient along a (1,0) vector: `X(c) = Σ X_m ∂_m c`.
pub fn along(x: &[C64; 2], dc: &[C64; 4]) -> C64 {
    x[0] * dc[0] + x[1] * dc[1]
}

/// Derivative along the conjugate vector: `X̄(c) = Σ conj(X_m) ∂_{z̄_m} c`.
pub fn along_bar(x: &[C64; 2], dc: &[C64; 4]) -> C64 {
    x[0].conj() * dc[2] + x[1].conj() * dc[3]
}

/// `X(conj c) = Σ X_m conj(∂_{z̄_m} c)`.
pub fn along_of_conj(x: &[C64; 2], dc: &[C64; 4]) -> C64 {
    x[0] * dc[2].conj() + x[1] * dc[3].conj()
}

/// `g(X, Y)` for two (1,0) vectors.
pub fn g10(x: &[C64; 2], y: &[C64; 2]) -> C64 {
    (x[0] * y[0].conj() + x[1] * y[1].conj()) * 0.5
}

/// `X f = Σ X_i f_{z_i}`.
pub fn apply(x: &[C64; 2], f: &Jet2) -> C64 {
    x[0] * f.d[0] + x[1] * f.d[1]
}

/// `X̄ f = Σ conj(X_i) f_{z̄_i}`.
pub fn apply_bar(x: &[C64; 2], f: &Jet2) -> C64 {
    x[0].conj() * f.d[0].conj() + x[1].conj() * f.d[1].conj()
}

/// `Σ X_i conj(Y_j) f_{z_i z̄_j}`.
pub fn hess_xy(f: &Jet2, x: &[C64; 2], y: &[C64; 2]) -> C64 {
    let mut s = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            s += x[i] * y[j].conj() * f.h_mix[i][j];
        }
    }
    s
}

/// Frame of a real field from its jet at a point where its gradient is
/// nonzero: `L = (ρ_w, -ρ_z)/s`, `N = (conj ρ_z, conj ρ_w)/s`.
pub fn frame_at(rho: &Jet2) -> Result<Frame> {
    let r = rho.d;
    let s2 = r[0].norm_sqr() + r[1].norm_sqr();
    let s = s2.sqrt();
    if !(s >= MIN_GRADIENT) {
        return Err(DfError::DegenerateGradient(2.0 * s));
    }
    // derivatives of ρ_{z_i} and conj(ρ_{z_i}) along the four directions
    let mut dr = [[ZERO; 4]; 2];
    let mut drc = [[ZERO; 4]; 2];
    for i in 0..2 {
        for m in 0..2 {
            dr[i][m] = rho.h_hol[i][m];
            dr[i][2 + m] = rho.h_mix[i][m];
            drc[i][m] = rho.h_mix[m][i];
            drc[i][2 + m] = rho.h_hol[i][m].conj();
        }
    }
    let mut ds = [ZERO; 4];
    for k in 0..4 {
        let mut d_s2 = ZERO;
        for i in 0..2 {
            d_s2 += dr[i][k] * r[i].conj() + r[i] * drc[i][k];
        }
        ds[k] = d_s2 / (2.0 * s);
    }
    let ul = [r[1], -r[0]];
    let dul = [dr[1], dr[0].map(|c| -c)];
    let un = [r[0].conj(), r[1].conj()];
    let dun = [drc[0], drc[1]];
    let normalize = |u: &[C64; 2], du: &[[C64; 4]; 2]| {
        let v = [u[0] / s, u[1] / s];
        let mut dv = [[ZERO; 4]; 2];
        for i in 0..2 {
            for k in 0..4 {
                dv[i][k] = du[i][k] / s - u[i] * ds[k] / s2;
            }
        }
        (v, dv)
    };
    let (l, d_l) = normalize(&ul, &dul);
    let (n, d_n) = normalize(&un, &dun);
    Ok(Frame { l, n, d_l, d_n })
}

/// A 2×2 Hermitian form in the basis `(L, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianForm2 {
    pub a_ll: f64,
    pub a_nn: f64,
    pub a_ln: C64,
}

impl HermitianForm2 {
    pub fn new(a_ll: f64, a_nn: f64, a_ln: C64) -> Self {
        Self { a_ll, a_nn, a_ln }
    }

    /// `a_NL = conj(a_LN)`.
    pub fn a_nl(&self) -> C64 {
        self.a_ln.conj()
    }

    /// `|a|² a_LL + 2 Re(a conj(b) a_LN) + |b|² a_NN`.
    pub fn quadratic(&self, a: C64, b: C64) -> f64 {
        a.norm_sqr() * self.a_ll + 2.0 * (a * b.conj() * self.a_ln).re + b.norm_sqr() * self.a_nn
    }

    /// `max(|A|, |D|, |B|, 1)`
    pub fn scale(&self) -> f64 {
        self.a_ll.abs().max(self.a_nn.abs()).max(self.a_ln.norm()).max(1.0)
    }
}

/// Complex Hessian of `f` in the frame, with the flat connection.
pub fn hessian_ln(f: &Jet2, frame: &Frame) -> HermitianForm2 {
    HermitianForm2 {
        a_ll: hess_xy(f, &frame.l, &frame.l).re,
        a_nn: hess_xy(f, &frame.n, &frame.n).re,
        a_ln: hess_xy(f, &frame.l, &frame.n),
    }
}

/// Levi form `Hess_ρ(L, L)` at a boundary point.
pub fn levi_form(bp: &BoundaryPoint) -> Result<f64> {
    let frame = frame_at(&bp.rho_jet)?;
    Ok(hessian_ln(&bp.rho_jet, &frame).a_ll)
}

/// `g(∇_N L̄, N̄)`, `g(∇_L̄ L, L)`, `g([N, L], N)`, `g(∇_L̄ N, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovariantScalars {
    pub g_n_lbar_nbar: C64,
    pub g_lbar_l_l: C64,
    pub g_nl_n: C64,
    pub g_lbar_n_n: C64,
}

impl CovariantScalars {
    pub fn max_abs(&self) -> f64 {
        self.g_n_lbar_nbar
            .norm()
            .max(self.g_lbar_l_l.norm())
            .max(self.g_nl_n.norm())
            .max(self.g_lbar_n_n.norm())
    }
}

/// Coefficients of `∇_X Y` for the flat connection: `X(Y_i)`.
pub fn nabla(x: &[C64; 2], dy: &[[C64; 4]; 2]) -> [C64; 2] {
    [along(x, &dy[0]), along(x, &dy[1])]
}

/// Coefficients of `∇_X̄ Y`: `X̄(Y_i)`.
pub fn nabla_bar(x: &[C64; 2], dy: &[[C64; 4]; 2]) -> [C64; 2] {
    [along_bar(x, &dy[0]), along_bar(x, &dy[1])]
}

pub fn covariant_scalars(frame: &Frame) -> CovariantScalars {
    let (l, n) = (&frame.l, &frame.n);
    // ∇_N L̄ has (0,1) coefficients N(conj L_i); N̄ has (0,1) coefficients conj N_i.
    let n_lbar = [along_of_conj(n, &frame.d_l[0]), along_of_conj(n, &frame.d_l[1])];
    let g_n_lbar_nbar = (n_lbar[0] * n[0] + n_lbar[1] * n[1]) * 0.5;
    let g_lbar_l_l = g10(&nabla_bar(l, &frame.d_l), l);
    let nl = nabla(n, &frame.d_l);
    let ln = nabla(l, &frame.d_n);
    let bracket = [nl[0] - ln[0], nl[1] - ln[1]];
    let g_nl_n = g10(&bracket, n);
    let g_lbar_n_n = g10(&nabla_bar(l, &frame.d_n), n);
    CovariantScalars {
        g_n_lbar_nbar,
        g_lbar_l_l,
        g_nl_n,
        g_lbar_n_n,
    }
}

/// Reduced torsion at a Levi-flat sample. `Infinite` marks a denominator
/// below the zero threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Torsion {
    Finite { value: C64 },
    Infinite,
}

impl Torsion {
    pub fn value(&self) -> Option<C64> {
        match self {
            Torsion::Finite { value } => Some(*value),
            Torsion::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeviFlatSample {
    pub bp: BoundaryPoint,
    pub frame: Frame,
    pub levi: f64,
    pub torsion: Option<Torsion>,
    pub weight: f64,
}

/// Neighbour count for quadrature weights.
pub const KNN_K: usize = 8;

/// Samples with `|levi| <= tol`, with frames and kNN quadrature weights
/// computed within the detected set.
pub fn leviflat_detect(samples: &[BoundaryPoint], tol: f64) -> Vec<LeviFlatSample> {
    let detected: Vec<LeviFlatSample> = samples
        .par_iter()
        .filter_map(|bp| {
            let frame = frame_at(&bp.rho_jet).ok()?;
            let levi = hessian_ln(&bp.rho_jet, &frame).a_ll;
            (levi.abs() <= tol).then_some(LeviFlatSample {
                bp: *bp,
                frame,
                levi,
                torsion: None,
                weight: 0.0,
            })
        })
        .collect();
    let pts: Vec<[f64; 4]> = detected.iter().map(|s| s.bp.p.to_real()).collect();
    let w = knn_weights(&pts, KNN_K);
    detected
        .into_iter()
        .zip(w)
        .map(|(mut s, w)| {
            s.weight = w;
            s
        })
        .collect()
}

/// `max_k |C_k|` over the four covariant scalars and all samples.
pub fn constant_c(sigma: &[LeviFlatSample]) -> Result<f64> {
    if sigma.is_empty() {
        return Err(DfError::EmptySigma);
    }
    Ok(sigma
        .iter()
        .map(|s| covariant_scalars(&s.frame).max_abs())
        .fold(0.0, f64::max))
}

/// Sampled `‖f‖_∞ + ‖Lf‖_∞`.
pub fn holo_c1_seminorm(values: &[C64], l_values: &[C64]) -> Result<f64> {
    if values.is_empty() || l_values.is_empty() || values.len() != l_values.len() {
        return Err(DfError::EmptyInput);
    }
    let sup = |v: &[C64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(sup(values) + sup(l_values))
}
