//! Necessary conditions on the Levi-flat set: torsion, the constants
//! `C`, `C1`, `C2`, the first and second conditions, the improved bound and
//! the L¹ torsion integral.
//!
//! Throughout, `ρ = δ e^ψ` and the boundary torsion reduces to
//! `1 / D` with `D = ½ L̄ψ + Hess_δ(N, L)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{offset, BoundaryPoint, DeltaField, Domain};
use crate::error::{DfError, Result};
use crate::frame::{
    along, along_of_conj, apply_bar, constant_c, hess_xy, leviflat_detect, nabla_bar, Frame,
    LeviFlatSample, Torsion, KNN_K,
};
use crate::jet::{jet_derivative, EntrySel, Jet2, C64};
use crate::program::FieldProgram;
use crate::psh::DEFAULT_DENOM_TOL;
use crate::quadrature::edge_point_count;

/// Numerical parameters for boundary δ quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionOptions {
    /// Inward offset for boundary extrapolation of δ jets.
    pub eps_b: f64,
    /// Step for third-order δ derivatives.
    pub third_step: f64,
    /// Step for δ Hessians; `None` selects `1e-4 (1 + |δ|)`.
    pub delta_h: Option<f64>,
    pub denom_tol: f64,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        Self {
            eps_b: 1e-3,
            third_step: 1e-3,
            delta_h: None,
            denom_tol: DEFAULT_DENOM_TOL,
        }
    }
}

/// δ jets at depths `ε/2` and `ε` below a boundary point, and their linear
/// extrapolation to the boundary.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryDelta {
    pub half: Jet2,
    pub full: Jet2,
    pub boundary: Jet2,
}

pub fn boundary_delta(
    domain: &Domain,
    bp: &BoundaryPoint,
    eps: f64,
    h: Option<f64>,
) -> Result<BoundaryDelta> {
    let n = bp.normal();
    let q1 = offset(&bp.p, &n, -eps);
    let q2 = offset(&bp.p, &n, -0.5 * eps);
    let full = domain.delta_jet_full(&q1, h, Some(&bp.p))?.0;
    let half = domain.delta_jet_full(&q2, h, Some(&bp.p))?.0;
    Ok(BoundaryDelta {
        half,
        full,
        boundary: half.combine(2.0, &full, -1.0),
    })
}

/// Third-order terms along `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThirdTerms {
    /// `L Hess_δ(N, L)`
    pub l_hess_d_nl: C64,
    /// `L L̄ψ`
    pub l_lbar_psi: C64,
    /// `Hess_δ(N, ∇_L̄ L)`
    pub hess_d_n_dlbar_l: C64,
}

/// Boundary quantities at one Levi-flat sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointTerms {
    pub point: [f64; 4],
    /// `Hess_δ(N, L)`
    pub hess_d_nl: C64,
    /// `L̄ψ`
    pub lbar_psi: C64,
    /// `½ L̄ψ + Hess_δ(N, L)`
    pub denom: C64,
    /// `Hess_ψ(L, L)`
    pub hess_psi_ll: f64,
    /// `lim Hess_δ(L, L) / (-δ)` along the inward normal.
    pub levi_rate: f64,
    pub third: Option<ThirdTerms>,
}

impl PointTerms {
    pub fn torsion(&self, denom_tol: f64) -> Torsion {
        if self.denom.norm() < denom_tol {
            Torsion::Infinite
        } else {
            Torsion::Finite {
                value: self.denom.inv(),
            }
        }
    }

    /// `L(1/D) = -(½ L L̄ψ + L Hess_δ(N, L)) / D²`.
    pub fn l_torsion(&self) -> Option<C64> {
        let t = self.third?;
        Some(-(t.l_lbar_psi * 0.5 + t.l_hess_d_nl) / (self.denom * self.denom))
    }

    /// Ratio bound on `1/(1-η)` before any majorization, using the δ-frame
    /// limits `L̄ρ/(-ρ) = -L̄ψ` and
    /// `Hess_ρ(L, L)/(-ρ) = levi_rate - Hess_ψ(L, L) - |Lψ|²`.
    /// All factors of `e^ψ` cancel.
    pub fn raw_ratio(&self, l_psi_abs2: f64) -> Option<f64> {
        let d2 = self.denom.norm_sqr();
        if d2 == 0.0 {
            return None;
        }
        let y = self.levi_rate - self.hess_psi_ll - l_psi_abs2;
        Some(((self.denom.conj() * self.lbar_psi).re + 0.25 * y) / d2)
    }
}

/// `L(conj L_j)` for both coefficients.
fn l_of_conj_l(frame: &Frame) -> [C64; 2] {
    [
        along_of_conj(&frame.l, &frame.d_l[0]),
        along_of_conj(&frame.l, &frame.d_l[1]),
    ]
}

/// `L(N_i)` for both coefficients.
fn l_of_n(frame: &Frame) -> [C64; 2] {
    [along(&frame.l, &frame.d_n[0]), along(&frame.l, &frame.d_n[1])]
}

/// Evaluates the boundary terms at a Levi-flat sample.
pub fn point_terms(
    domain: &Domain,
    psi: &FieldProgram,
    sample: &LeviFlatSample,
    opts: &ConditionOptions,
    with_third: bool,
) -> Result<PointTerms> {
    let frame = &sample.frame;
    let (l, n) = (&frame.l, &frame.n);
    let bd = boundary_delta(domain, &sample.bp, opts.eps_b, opts.delta_h)?;
    let hess_d_nl = hess_xy(&bd.boundary, n, l);
    let psi_jet = psi.real_jet_at(&sample.bp.p.to_real())?.to_wirtinger();
    let lbar_psi = apply_bar(l, &psi_jet);
    let denom = lbar_psi * 0.5 + hess_d_nl;
    let hess_psi_ll = hess_xy(&psi_jet, l, l).re;
    let r1 = hess_xy(&bd.full, l, l).re / opts.eps_b;
    let r2 = hess_xy(&bd.half, l, l).re / (0.5 * opts.eps_b);
    let levi_rate = 2.0 * r2 - r1;

    let third = if with_third {
        let lcl = l_of_conj_l(frame);
        let ln = l_of_n(frame);
        // L L̄ψ = Σ_j L(conj L_j) ψ_{z̄_j} + conj(L_j) Σ_m L_m ψ_{z_m z̄_j}
        let mut l_lbar_psi = C64::new(0.0, 0.0);
        for j in 0..2 {
            l_lbar_psi += lcl[j] * psi_jet.d[j].conj();
            for m in 0..2 {
                l_lbar_psi += l[j].conj() * l[m] * psi_jet.h_mix[m][j];
            }
        }
        // L of the δ Hessian entries at both depths, extrapolated.
        let field = DeltaField {
            domain,
            hint: sample.bp.p,
            h: opts.delta_h,
        };
        let nrm = sample.bp.normal();
        let contract = |eps: f64| -> Result<C64> {
            let q = offset(&sample.bp.p, &nrm, -eps);
            let jd = jet_derivative(&field, &q, *l, opts.third_step)?;
            let mut s = C64::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    s += n[i] * l[j].conj() * jd.along_v(EntrySel::Mix(i, j));
                }
            }
            Ok(s)
        };
        let t_full = contract(opts.eps_b)?;
        let t_half = contract(0.5 * opts.eps_b)?;
        let entry_term = t_half * 2.0 - t_full;
        let hb = &bd.boundary;
        let mut frame_term = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                frame_term += (ln[i] * l[j].conj() + n[i] * lcl[j]) * hb.h_mix[i][j];
            }
        }
        let dlbar_l = nabla_bar(l, &frame.d_l);
        Some(ThirdTerms {
            l_hess_d_nl: frame_term + entry_term,
            l_lbar_psi,
            hess_d_n_dlbar_l: hess_xy(hb, n, &dlbar_l),
        })
    } else {
        None
    };
    Ok(PointTerms {
        point: sample.bp.p.to_real(),
        hess_d_nl,
        lbar_psi,
        denom,
        hess_psi_ll,
        levi_rate,
        third,
    })
}

/// `|Lψ|²` at a boundary sample.
pub fn l_psi_abs2(psi: &FieldProgram, sample: &LeviFlatSample) -> Result<f64> {
    let j = psi.real_jet_at(&sample.bp.p.to_real())?.to_wirtinger();
    Ok(crate::frame::apply(&sample.frame.l, &j).norm_sqr())
}

/// Reduced torsion `1/(½ L̄ψ + Hess_δ(N, L))` at a boundary sample.
pub fn torsion(
    domain: &Domain,
    psi: &FieldProgram,
    sample: &LeviFlatSample,
    opts: &ConditionOptions,
) -> Result<Torsion> {
    Ok(point_terms(domain, psi, sample, opts, false)?.torsion(opts.denom_tol))
}

/// Evaluates the terms at every sample, in sample order.
pub fn all_terms(
    domain: &Domain,
    psi: &FieldProgram,
    sigma: &[LeviFlatSample],
    opts: &ConditionOptions,
    with_third: bool,
) -> Result<Vec<PointTerms>> {
    if sigma.is_empty() {
        return Err(DfError::EmptySigma);
    }
    sigma
        .par_iter()
        .map(|s| point_terms(domain, psi, s, opts, with_third))
        .collect()
}

/// Fills the torsion slot of each sample.
pub fn attach_torsion(sigma: &mut [LeviFlatSample], terms: &[PointTerms], denom_tol: f64) {
    for (s, t) in sigma.iter_mut().zip(terms) {
        s.torsion = Some(t.torsion(denom_tol));
    }
}

/// Levi-flat samples for a domain: the domain's own Levi-flat candidates
/// when it has any, otherwise projected quasi-random boundary samples, in
/// both cases filtered by `|levi| <= tol`.
pub fn sigma_samples(domain: &Domain, n: usize, seed: u64, tol: f64) -> Result<Vec<LeviFlatSample>> {
    let mut pts = domain.leviflat_candidates(n, seed)?;
    if pts.is_empty() {
        pts = domain.sample_boundary(n, seed)?;
    }
    Ok(leviflat_detect(&pts, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `C1 = 2C + 2 max|Hess_δ(N, L)|` and
/// `C2 = ½ max Re(-L Hess_δ(N, L) + Hess_δ(N, ∇_L̄ L))`.
pub fn constants_from_terms(c: f64, terms: &[PointTerms]) -> Result<Constants> {
    if terms.is_empty() {
        return Err(DfError::EmptySigma);
    }
    let max_h = terms.iter().map(|t| t.hess_d_nl.norm()).fold(0.0, f64::max);
    let c2 = terms
        .iter()
        .filter_map(|t| t.third)
        .map(|t| 0.5 * (-t.l_hess_d_nl + t.hess_d_n_dlbar_l).re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Constants {
        c,
        c1: 2.0 * c + 2.0 * max_h,
        c2: if c2.is_finite() { c2 } else { f64::NAN },
    })
}

pub fn constants_c1_c2(
    domain: &Domain,
    sigma: &[LeviFlatSample],
    opts: &ConditionOptions,
) -> Result<Constants> {
    let c = constant_c(sigma)?;
    let terms = all_terms(domain, &FieldProgram::zero(), sigma, opts, true)?;
    constants_from_terms(c, &terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    FiniteTorsion,
    ZeroDenominator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCondition {
    pub point: [f64; 4],
    pub branch: Branch,
    /// `None` stands for `+∞`.
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub holds: bool,
    pub implied_eta_bound: Option<f64>,
    /// The unmajorized ratio bound on `1/(1-η)`, reported next to the
    /// first-condition left side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min_lhs: Option<f64>,
    pub implied_index_bound: Option<f64>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Closedness {
    pub edge_points: usize,
    pub doubtful: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub per_point: Vec<PointCondition>,
    pub constants: Constants,
    pub summary: Summary,
    pub closedness: Closedness,
}

pub fn closedness(sigma: &[LeviFlatSample]) -> Closedness {
    let pts: Vec<[f64; 4]> = sigma.iter().map(|s| s.bp.p.to_real()).collect();
    let e = edge_point_count(&pts, KNN_K);
    Closedness {
        edge_points: e,
        doubtful: e > 0,
    }
}

fn summarize(per_point: &[PointCondition]) -> Summary {
    let min_lhs = per_point
        .iter()
        .filter_map(|p| p.lhs)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    Summary {
        min_lhs,
        implied_index_bound: min_lhs.filter(|m| *m > 1.0).map(|m| 1.0 - 1.0 / m),
        violations: per_point.iter().filter(|p| !p.holds).count(),
    }
}

/// First condition per sample: `2.5 + 3.75 C |τ| + 0.5 |Lτ|`, with
/// `1 - 1/lhs` as the implied bound on η.
pub fn first_condition_from_terms(
    constants: Constants,
    terms: &[PointTerms],
    l_psi_abs2: &[f64],
    denom_tol: f64,
    closed: Closedness,
) -> ConditionReport {
    let per_point = terms
        .iter()
        .zip(l_psi_abs2)
        .map(|(t, lp)| match t.torsion(denom_tol) {
            Torsion::Infinite => PointCondition {
                point: t.point,
                branch: Branch::ZeroDenominator,
                lhs: None,
                rhs: None,
                holds: true,
                implied_eta_bound: None,
                raw_ratio: None,
            },
            Torsion::Finite { value } => {
                let lt = t.l_torsion().map(|v| v.norm()).unwrap_or(0.0);
                let lhs = 2.5 + 3.75 * constants.c * value.norm() + 0.5 * lt;
                PointCondition {
                    point: t.point,
                    branch: Branch::FiniteTorsion,
                    lhs: Some(lhs),
                    rhs: None,
                    holds: true,
                    implied_eta_bound: (lhs > 1.0).then(|| 1.0 - 1.0 / lhs),
                    raw_ratio: t.raw_ratio(*lp),
                }
            }
        })
        .collect::<Vec<_>>();
    ConditionReport {
        condition: "first".into(),
        eta: None,
        summary: summarize(&per_point),
        per_point,
        constants,
        closedness: closed,
    }
}

/// Everything the condition reports need, evaluated once.
pub struct SigmaEvaluation {
    pub constants: Constants,
    pub terms: Vec<PointTerms>,
    pub l_psi_abs2: Vec<f64>,
    pub closedness: Closedness,
}

pub fn evaluate_sigma(
    domain: &Domain,
    psi: &FieldProgram,
    sigma: &[LeviFlatSample],
    opts: &ConditionOptions,
) -> Result<SigmaEvaluation> {
    let c = constant_c(sigma)?;
    let terms = all_terms(domain, psi, sigma, opts, true)?;
    // C1 and C2 are properties of δ alone; their ψ-free terms coincide with
    // the ones above.
    let constants = constants_from_terms(c, &terms)?;
    let l_psi_abs2 = sigma
        .iter()
        .map(|s| l_psi_abs2(psi, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SigmaEvaluation {
        constants,
        terms,
        l_psi_abs2,
        closedness: closedness(sigma),
    })
}

pub fn first_condition(
    domain: &Domain,
    psi: &FieldProgram,
    sigma: &[LeviFlatSample],
    opts: &ConditionOptions,
) -> Result<ConditionReport> {
    let ev = evaluate_sigma(domain, psi, sigma, opts)?;
    Ok(first_condition_from_terms(
        ev.constants,
        &ev.terms,
        &ev.l_psi_abs2,
        opts.denom_tol,
        ev.closedness,
    ))
}

/// Right side of the second condition,
/// `(C2 - ¼ Hess_ψ(L, L)) / |D|² + C1 / |D|`.
pub fn second_rhs(constants: &Constants, t: &PointTerms) -> f64 {
    let d = t.denom.norm();
    (constants.c2 - 0.25 * t.hess_psi_ll) / (d * d) + constants.c1 / d
}

/// Second condition per sample at exponent `eta`: holds if the denominator
/// vanishes or `1/(1-η) - 1 <= rhs`.
pub fn second_condition_from_terms(
    constants: Constants,
    terms: &[PointTerms],
    eta: f64,
    denom_tol: f64,
    closed: Closedness,
) -> ConditionReport {
    let lhs = 1.0 / (1.0 - eta) - 1.0;
    let per_point: Vec<PointCondition> = terms
        .iter()
        .map(|t| {
            if t.denom.norm() < denom_tol {
                PointCondition {
                    point: t.point,
                    branch: Branch::ZeroDenominator,
                    lhs: Some(lhs),
                    rhs: None,
                    holds: true,
                    implied_eta_bound: None,
                    raw_ratio: None,
                }
            } else {
                let rhs = second_rhs(&constants, t);
                PointCondition {
                    point: t.point,
                    branch: Branch::FiniteTorsion,
                    lhs: Some(lhs),
                    rhs: Some(rhs),
                    holds: lhs <= rhs,
                    implied_eta_bound: (rhs > 0.0 && rhs.is_finite()).then(|| 1.0 - 1.0 / (1.0 + rhs)),
                    raw_ratio: None,
                }
            }
        })
        .collect();
    let bound = per_point
        .iter()
        .filter_map(|p| p.implied_eta_bound)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    let violations = per_point.iter().filter(|p| !p.holds).count();
    ConditionReport {
        condition: "second".into(),
        eta: Some(eta),
        per_point,
        constants,
        summary: Summary {
            min_lhs: Some(lhs),
            implied_index_bound: bound,
            violations,
        },
        closedness: closed,
    }
}

pub fn second_condition(
    domain: &Domain,
    psi: &FieldProgram,
    eta: f64,
    sigma: &[LeviFlatSample],
    opts: &ConditionOptions,
) -> Result<ConditionReport> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(DfError::Config(format!("eta must lie in (0, 1), got {eta}")));
    }
    let ev = evaluate_sigma(domain, psi, sigma, opts)?;
    Ok(second_condition_from_terms(
        ev.constants,
        &ev.terms,
        eta,
        opts.denom_tol,
        ev.closedness,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovedBound {
    pub point: [f64; 4],
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `(C1 + √n (1 + C1²/n + 4 C2 - Hess_ψ(L, L))) / (2n)`.
pub fn improved_rhs(constants: &Constants, hess_psi_ll: f64, n: u32) -> f64 {
    let nf = n as f64;
    let c1 = constants.c1;
    (c1 + nf.sqrt() * (1.0 + c1 * c1 / nf + 4.0 * constants.c2 - hess_psi_ll)) / (2.0 * nf)
}

pub fn improved_from_terms(constants: &Constants, terms: &[PointTerms], n: u32) -> Vec<ImprovedBound> {
    terms
        .iter()
        .map(|t| {
            let lhs = t.denom.norm();
            let rhs = improved_rhs(constants, t.hess_psi_ll, n);
            ImprovedBound {
                point: t.point,
                lhs,
                rhs,
                holds: lhs <= rhs,
            }
        })
        .collect()
}

pub fn improved_second_bound(
    domain: &Domain,
    psi: &FieldProgram,
    n: u32,
    sigma: &[LeviFlatSample],
    opts: &ConditionOptions,
) -> Result<Vec<ImprovedBound>> {
    if n == 0 {
        return Err(DfError::Config("n must be a positive integer".into()));
    }
    let ev = evaluate_sigma(domain, psi, sigma, opts)?;
    Ok(improved_from_terms(&ev.constants, &ev.terms, n))
}

/// `Σ |½ L̄ψ + Hess_δ(N, L)| w` over the samples.
pub fn l1_from_terms(terms: &[PointTerms], sigma: &[LeviFlatSample]) -> f64 {
    terms
        .iter()
        .zip(sigma)
        .map(|(t, s)| t.denom.norm() * s.weight)
        .sum()
}

pub fn l1_torsion_integral(
    domain: &Domain,
    psi: &FieldProgram,
    sigma: &[LeviFlatSample],
    opts: &ConditionOptions,
) -> Result<f64> {
    let terms = all_terms(domain, psi, sigma, opts, false)?;
    Ok(l1_from_terms(&terms, sigma))
}
