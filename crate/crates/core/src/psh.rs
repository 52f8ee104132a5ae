//! Sampled certification of plurisubharmonicity of `-(-ρ)^η` and the search
//! for Diederich-Fornæss exponents.
//!
//! The complex Hessian of `φ = -(-ρ)^η` is
//! `φ_{i j̄} = η (-ρ)^{η-1} [ρ_{i j̄} + t ρ_i ρ_{j̄}]` with `t = (1-η)/(-ρ)`.
//! The positive prefactor is dropped and the bracket is tested in the frame
//! `(L, N)` of `ρ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryPoint, Domain};
use crate::error::{DfError, Result};
use crate::frame::{apply, frame_at, hessian_ln, HermitianForm2};
use crate::jet::{Complex2Point, Jet2, RealJet, C64};
use crate::program::{FieldProgram, PsiFamily};
use crate::simplex::nelder_mead;

pub const DEFAULT_PSD_TOL: f64 = 1e-10;
pub const DEFAULT_DENOM_TOL: f64 = 1e-8;
pub const BISECT_LO: f64 = 1e-3;
pub const BISECT_HI: f64 = 1.0 - 1e-3;

/// The bracketed form of the Hessian of `-(-ρ)^η` in the frame of `ρ`.
pub fn composite_form(rho: &Jet2, eta: f64) -> Result<HermitianForm2> {
    if !(rho.val < 0.0) {
        return Err(DfError::Domain(format!(
            "composite form needs rho < 0, got {}",
            rho.val
        )));
    }
    let frame = frame_at(rho)?;
    let h = hessian_ln(rho, &frame);
    let t = (1.0 - eta) / (-rho.val);
    let l_rho = apply(&frame.l, rho);
    let n_rho = apply(&frame.n, rho);
    Ok(HermitianForm2 {
        a_ll: h.a_ll + t * l_rho.norm_sqr(),
        a_nn: h.a_nn + t * n_rho.norm_sqr(),
        a_ln: h.a_ln + l_rho * n_rho.conj() * t,
    })
}

/// Jet of `ρ e^ψ` from the real jets of `ρ` and `ψ`.
pub fn modified_rho(rho: &RealJet, psi: &RealJet) -> Jet2 {
    (*rho * psi.exp()).to_wirtinger()
}

/// Composite form at an interior point `q` for the defining function
/// `ρ e^ψ`, where `ρ` is the domain's defining function.
pub fn composite_hessian(
    domain: &Domain,
    psi: &FieldProgram,
    eta: f64,
    q: &Complex2Point,
) -> Result<HermitianForm2> {
    let x = q.to_real();
    let rho = domain.rho().real_jet_at(&x)?;
    let psi = psi.real_jet_at(&x)?;
    composite_form(&modified_rho(&rho, &psi), eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Positivity {
    pub pass: bool,
    /// `min(A, D, -Δ/s) / s` with `s = scale(H)`.
    pub margin: f64,
}

/// Discriminant test: passes iff `A`, `D` and `-Δ/s` are all at least
/// `-psd_tol s`, where `Δ = |B|² - A D`.
pub fn positivity_check(h: &HermitianForm2, psd_tol: f64) -> Positivity {
    let s = h.scale();
    let delta = h.a_ln.norm_sqr() - h.a_ll * h.a_nn;
    let m = h.a_ll.min(h.a_nn).min(-delta / s);
    Positivity {
        pass: m >= -psd_tol * s,
        margin: m / s,
    }
}

/// Interior sample plan: depths are log-spaced in `[depth_min, tubular_width]`
/// below each base boundary point, about half of which lie on the
/// Levi-flat candidates of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub samples: usize,
    pub seed: u64,
    pub tubular_width: f64,
    pub depth_min: f64,
    pub depths_per_point: usize,
    pub leviflat_fraction: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            tubular_width: 0.05,
            depth_min: 1e-6,
            depths_per_point: 8,
            leviflat_fraction: 0.5,
        }
    }
}

impl SamplePlan {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.depths_per_point == 0 {
            return Err(DfError::Config("samples must be at least 1".into()));
        }
        if !(self.depth_min > 0.0 && self.tubular_width > self.depth_min) {
            return Err(DfError::Config(
                "need 0 < depth_min < tubular_width".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.leviflat_fraction) {
            return Err(DfError::Config("leviflat_fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Base boundary points and interior points below them.
    pub fn build(&self, domain: &Domain) -> Result<Vec<InteriorSample>> {
        self.validate()?;
        let per = self.depths_per_point;
        let n_base = self.samples.div_ceil(per);
        let n_flat = ((n_base as f64) * self.leviflat_fraction).round() as usize;
        let mut bases: Vec<(BoundaryPoint, bool)> = domain
            .leviflat_candidates(n_flat, self.seed)?
            .into_iter()
            .map(|b| (b, true))
            .collect();
        let rest = n_base - bases.len();
        if rest > 0 {
            bases.extend(
                domain
                    .sample_boundary(rest, self.seed)?
                    .into_iter()
                    .map(|b| (b, false)),
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let jitter: Vec<f64> = (0..bases.len()).map(|_| rng.gen()).collect();
        let (l0, l1) = (self.depth_min.ln(), self.tubular_width.ln());
        let mut out: Vec<InteriorSample> = bases
            .par_iter()
            .zip(jitter.par_iter())
            .flat_map_iter(|((bp, flat), u)| {
                (0..per).filter_map(move |j| {
                    let d = (l0 + (l1 - l0) * (j as f64 + u) / per as f64).exp();
                    domain.inward_point(bp, d).ok().map(|q| InteriorSample {
                        q,
                        base: bp.p,
                        near_leviflat: *flat,
                    })
                })
            })
            .collect();
        out.truncate(self.samples);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorSample {
    pub q: Complex2Point,
    pub base: Complex2Point,
    pub near_leviflat: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: [f64; 4],
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub verdict: Verdict,
    pub eta: f64,
    pub witness: Option<Witness>,
    /// Smallest normalized positivity margin over the evaluated samples.
    pub margin: f64,
    pub samples_used: usize,
    pub failures: usize,
    pub errors: usize,
    /// Samples above Levi-flat candidates where `|Hess_ρ(L, N)|` is below
    /// the zero threshold.
    pub zero_ln_flags: usize,
    pub note: String,
}

/// Jets precomputed at a sample so that `ψ = Σ c_k φ_k` is cheap to vary.
struct PreparedSample {
    q: Complex2Point,
    near_leviflat: bool,
    rho: RealJet,
    basis: Vec<RealJet>,
}

/// A sample set with the jets of `ρ` and of a ψ-family basis precomputed.
pub struct PreparedPlan {
    samples: Vec<std::result::Result<PreparedSample, DfError>>,
    dim: usize,
    pub psd_tol: f64,
    pub denom_tol: f64,
}

impl PreparedPlan {
    pub fn new(domain: &Domain, family: &PsiFamily, plan: &SamplePlan) -> Result<Self> {
        let pts = plan.build(domain)?;
        let samples = pts
            .par_iter()
            .map(|s| {
                let x = s.q.to_real();
                Ok(PreparedSample {
                    q: s.q,
                    near_leviflat: s.near_leviflat,
                    rho: domain.rho().real_jet_at(&x)?,
                    basis: family.basis_jets(&x)?,
                })
            })
            .collect();
        Ok(Self {
            samples,
            dim: family.dim(),
            psd_tol: DEFAULT_PSD_TOL,
            denom_tol: DEFAULT_DENOM_TOL,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sample points in plan order.
    pub fn points(&self) -> Vec<Option<Complex2Point>> {
        self.samples.iter().map(|s| s.as_ref().ok().map(|s| s.q)).collect()
    }

    /// Composite forms at every sample for coefficients `c` and exponent `eta`.
    pub fn forms(&self, c: &[f64], eta: f64) -> Vec<Result<(HermitianForm2, C64)>> {
        self.samples
            .par_iter()
            .map(|s| {
                let s = s.as_ref().map_err(|e| e.clone())?;
                let psi = RealJet::linear_combination(c, &s.basis);
                let rho = modified_rho(&s.rho, &psi);
                let form = composite_form(&rho, eta)?;
                let frame = frame_at(&rho)?;
                Ok((form, hessian_ln(&rho, &frame).a_ln))
            })
            .collect()
    }

    pub fn certify(&self, c: &[f64], eta: f64) -> CertReport {
        let forms = self.forms(c, eta);
        let mut margin = f64::INFINITY;
        let mut witness: Option<Witness> = None;
        let mut failures = 0;
        let mut errors = 0;
        let mut zero_ln = 0;
        let mut first_error = String::new();
        for (s, r) in self.samples.iter().zip(&forms) {
            match r {
                Ok((h, ln)) => {
                    let pos = positivity_check(h, self.psd_tol);
                    if let Ok(ps) = s {
                        if ps.near_leviflat && ln.norm() < self.denom_tol {
                            zero_ln += 1;
                        }
                    }
                    if !pos.pass {
                        failures += 1;
                        if witness.as_ref().map_or(true, |w| pos.margin < w.margin) {
                            let q = s.as_ref().map(|s| s.q.to_real()).unwrap_or([f64::NAN; 4]);
                            witness = Some(Witness {
                                point: q,
                                margin: pos.margin,
                            });
                        }
                    }
                    margin = margin.min(pos.margin);
                }
                Err(e) => {
                    if errors == 0 {
                        first_error = e.to_string();
                    }
                    errors += 1;
                }
            }
        }
        let verdict = if failures > 0 {
            Verdict::Refuted
        } else if errors > 0 || forms.is_empty() {
            Verdict::Inconclusive
        } else {
            Verdict::Certified
        };
        let note = match verdict {
            Verdict::Certified => "certified (sampled)".to_string(),
            Verdict::Refuted => format!("{failures} of {} samples fail", forms.len()),
            Verdict::Inconclusive => format!("{errors} evaluations failed: {first_error}"),
        };
        CertReport {
            verdict,
            eta,
            witness,
            margin: if margin.is_finite() { margin } else { f64::NAN },
            samples_used: forms.len() - errors,
            failures,
            errors,
            zero_ln_flags: zero_ln,
            note,
        }
    }

    /// Largest certified `η` in the bisection bracket, or 0 if even the
    /// bottom of the bracket fails. Returns the reports of every step.
    pub fn bisect(&self, c: &[f64], tol: f64) -> (f64, Vec<CertReport>) {
        let mut reports = Vec::new();
        let top = self.certify(c, BISECT_HI);
        let top_ok = top.verdict == Verdict::Certified;
        reports.push(top);
        if top_ok {
            return (BISECT_HI, reports);
        }
        let bottom = self.certify(c, BISECT_LO);
        let bottom_ok = bottom.verdict == Verdict::Certified;
        reports.push(bottom);
        if !bottom_ok {
            return (0.0, reports);
        }
        let (mut lo, mut hi) = (BISECT_LO, BISECT_HI);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let r = self.certify(c, mid);
            if r.verdict == Verdict::Certified {
                lo = mid;
            } else {
                hi = mid;
            }
            reports.push(r);
        }
        (lo, reports)
    }
}

/// Certify `η` for a single ψ.
pub fn certify_eta(
    domain: &Domain,
    psi: &FieldProgram,
    eta: f64,
    plan: &SamplePlan,
    psd_tol: f64,
) -> Result<CertReport> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(DfError::Config(format!("eta must lie in (0, 1), got {eta}")));
    }
    let family = PsiFamily::new(vec![psi.clone()]);
    let mut prepared = PreparedPlan::new(domain, &family, plan)?;
    prepared.psd_tol = psd_tol;
    Ok(prepared.certify(&[1.0], eta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    pub bisect_tol: f64,
    /// Number of ψ candidates evaluated by the search beyond the origin.
    pub search_budget: usize,
    pub seed: u64,
    pub restarts: usize,
    pub step: f64,
    pub psd_tol: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            bisect_tol: 1e-2,
            search_budget: 60,
            seed: 0,
            restarts: 2,
            step: 0.5,
            psd_tol: DEFAULT_PSD_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub eta_star: f64,
    pub best_psi: Vec<f64>,
    pub evaluations: usize,
    /// The search stopped because the budget ran out, not by convergence.
    pub budget_exhausted: bool,
    /// Bisection reports for the best ψ.
    pub reports: Vec<CertReport>,
}

/// Search objective: certified exponent, with the margin as a small
/// tie-breaker so that the simplex sees slope where the exponent is flat.
fn score(eta: f64, reports: &[CertReport]) -> f64 {
    let m = reports
        .iter()
        .rev()
        .find(|r| r.eta == eta || eta == 0.0)
        .map(|r| r.margin)
        .unwrap_or(0.0);
    let m = if m.is_finite() { m } else { -1.0 };
    eta + 1e-3 * (2.0 / std::f64::consts::PI) * (1e3 * m).atan()
}

/// Lower estimate of the Diederich-Fornæss index over a linear ψ family.
pub fn estimate_index(
    domain: &Domain,
    family: &PsiFamily,
    plan: &SamplePlan,
    opts: &IndexOptions,
) -> Result<IndexEstimate> {
    if family.dim() > 32 {
        return Err(DfError::Config("psi family dimension must be at most 32".into()));
    }
    if !(opts.bisect_tol >= 1e-4) {
        return Err(DfError::Config("bisect_tol must be at least 1e-4".into()));
    }
    let mut prepared = PreparedPlan::new(domain, family, plan)?;
    prepared.psd_tol = opts.psd_tol;
    let d = family.dim();
    let origin = vec![0.0; d];
    let (eta0, rep0) = prepared.bisect(&origin, opts.bisect_tol);
    let mut best = (score(eta0, &rep0), eta0, origin.clone(), rep0);
    let mut evaluations = 1;
    let mut exhausted = opts.search_budget > 0 && d > 0;
    if opts.search_budget > 0 && d > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut remaining = opts.search_budget;
        let starts = opts.restarts.max(1);
        for r in 0..starts {
            if remaining == 0 {
                break;
            }
            let x0: Vec<f64> = if r == 0 {
                origin.clone()
            } else {
                (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            let share = if r + 1 == starts {
                remaining
            } else {
                remaining / (starts - r)
            };
            let mut local_best: Option<(f64, f64, Vec<f64>, Vec<CertReport>)> = None;
            let res = nelder_mead(
                |c| {
                    let (eta, reps) = prepared.bisect(c, opts.bisect_tol);
                    let s = score(eta, &reps);
                    if local_best.as_ref().map_or(true, |b| s > b.0) {
                        local_best = Some((s, eta, c.to_vec(), reps));
                    }
                    -s
                },
                &x0,
                opts.step,
                share,
                1e-6,
            );
            remaining -= res.evaluations.min(remaining);
            evaluations += res.evaluations;
            exhausted = res.exhausted;
            if let Some(lb) = local_best {
                if lb.0 > best.0 {
                    best = lb;
                }
            }
        }
    }
    Ok(IndexEstimate {
        eta_star: best.1,
        best_psi: best.2,
        evaluations,
        budget_exhausted: exhausted,
        reports: best.3,
    })
}
