//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use dfindex::conditions::{
    boundary_delta, first_condition, l1_torsion_integral, point_terms, second_condition,
    sigma_samples, ConditionOptions,
};
use dfindex::jet::{third_directional, EntrySel};
use dfindex::program::PsiFamily;
use dfindex::psh::{
    certify_eta, estimate_index, positivity_check, IndexOptions, SamplePlan, Verdict,
    DEFAULT_PSD_TOL,
};
use dfindex::{Complex2Point, Domain, DomainSpec, FieldProgram};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// 1. `df certify` on the unit ball, ψ ≡ 0, η = 0.99, 10⁴ samples.
fn ball_certification() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out");
    let text = serde_json::json!({
        "domain": {"kind": "ball", "radius": 1.0},
        "psi": "zero",
        "eta": 0.99,
        "numeric": {"samples": 10000},
        "output": {"path": out},
    });
    std::fs::write(&cfg, text.to_string()).unwrap();
    let t = Instant::now();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_df"))
        .args(["certify", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let elapsed = t.elapsed();
    if !status.status.success() {
        return outcome(
            false,
            format!("df certify exited with {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr)),
        );
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let r = &report["result"];
    let verdict = r["verdict"].as_str().unwrap_or("");
    let margin = r["margin"].as_f64().unwrap_or(f64::NAN);
    let used = r["samples_used"].as_u64().unwrap_or(0);
    outcome(
        verdict == "certified" && margin > 0.0 && used == 10_000 && elapsed < Duration::from_secs(10),
        format!("verdict={verdict} margin={margin:.3e} samples={used} time={:.2}s (limit 10s)", secs(elapsed)),
    )
}

/// 2. Worm β = 2.5π: certified lower estimate ≤ 2π/(2β−π) + 0.05 and
/// η = 0.9 with ψ ≡ 0 refuted near the annulus.
fn worm_upper_bound() -> Outcome {
    let beta = 2.5 * PI;
    let bound = 2.0 * PI / (2.0 * beta - PI) + 0.05;
    let t = Instant::now();
    let worm = Domain::new(DomainSpec::worm(beta)).unwrap();
    let plan = SamplePlan::default();
    let est = estimate_index(&worm, &PsiFamily::default_family(), &plan, &IndexOptions::default()).unwrap();
    let rep = certify_eta(&worm, &FieldProgram::zero(), 0.9, &plan, DEFAULT_PSD_TOL).unwrap();
    let elapsed = t.elapsed();
    let (c, _) = worm.spec().worm_params().unwrap();
    let near = rep.witness.as_ref().map(|w| {
        let p = Complex2Point::from_real(w.point);
        let theta = p.coord(1).norm_sqr().ln();
        (p.coord(0).norm(), theta.abs() <= c + 0.1 && p.coord(0).norm() <= 0.1)
    });
    let pass = est.eta_star <= bound
        && rep.verdict == Verdict::Refuted
        && near.map_or(false, |n| n.1)
        && elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "eta_lower={:.4} (bound {bound:.2}) evaluations={} eta=0.9 verdict={:?} witness |z|={:.3e} time={:.1}s (limit 300s)",
            est.eta_star,
            est.evaluations,
            rep.verdict,
            near.map_or(f64::NAN, |n| n.0),
            secs(elapsed)
        ),
    )
}

/// 3. Discriminant test against brute-force quadratic-form minimization.
fn discriminant_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (cp, sp) = phase_tables();
    let (mut disagreements, mut banded, mut positives) = (0usize, 0usize, 0usize);
    let n = 100_000;
    for _ in 0..n {
        let h = random_form(&mut rng);
        let p = positivity_check(&h, DEFAULT_PSD_TOL);
        if p.margin.abs() < DEFAULT_PSD_TOL {
            banded += 1;
            continue;
        }
        let oracle = grid_min(&h, &cp, &sp) >= 0.0;
        positives += oracle as usize;
        if oracle != p.pass {
            disagreements += 1;
        }
    }
    outcome(
        disagreements == 0,
        format!("{n} forms, {disagreements} disagreements, {banded} inside the tolerance band, {positives} positive"),
    )
}

fn tubular_points(domain: &Domain, n: usize, seed: u64, width: f64) -> Vec<Complex2Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    domain
        .sample_boundary(n, seed)
        .unwrap()
        .iter()
        .map(|bp| dfindex::domain::offset(&bp.p, &bp.normal(), rng.gen_range(-width..width)))
        .collect()
}

/// 4. `‖∇δ‖ = 1`, `Nδ = ½` and the closed-form ball δ jet.
fn distance_invariants() -> Outcome {
    let domains = [
        ("ball", DomainSpec::ball(1.0)),
        ("ellipsoid", DomainSpec::ellipsoid(1.0, 2.0)),
        ("worm", DomainSpec::worm(2.5 * PI)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in domains {
        let d = Domain::new(spec).unwrap();
        let pts = tubular_points(&d, 1000, 4, 0.02);
        let (mut grad_err, mut fd_err, mut n_err, mut failures) = (0.0f64, 0.0f64, 0.0f64, 0usize);
        for q in &pts {
            let (jet, foot) = match d.delta_jet_full(q, None, None) {
                Ok(v) => v,
                Err(_) => {
                    failures += 1;
                    continue;
                }
            };
            grad_err = grad_err.max((jet.grad_norm() - 1.0).abs());
            let (g, _) = fd_real(|x| d.sdist(&Complex2Point::from_real(*x)).unwrap(), &q.to_real(), 1e-4);
            let fd = wirtinger_from_real(0.0, &g, &[[0.0; 4]; 4]);
            fd_err = fd_err.max((fd.grad_norm() - 1.0).abs());
            let (_, nv) = ln_vectors(&d.rho_jet(&foot).unwrap());
            let n_delta = nv[0] * fd.d[0] + nv[1] * fd.d[1];
            n_err = n_err.max((n_delta - c(0.5, 0.0)).norm());
        }
        let ok = failures == 0 && grad_err <= 1e-6 && fd_err <= 1e-6 && n_err <= 1e-6;
        pass &= ok;
        parts.push(format!(
            "{name}: |grad|-1 {grad_err:.1e}, fd |grad|-1 {fd_err:.1e}, |N delta - 1/2| {n_err:.1e}, failures {failures}"
        ));
    }
    let ball = Domain::new(DomainSpec::ball(1.0)).unwrap();
    let mut ball_err = 0.0f64;
    for q in tubular_points(&ball, 1000, 5, 0.05) {
        let x = q.to_real();
        let r = q.norm();
        let mut hess = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let id = if i == j { 1.0 } else { 0.0 };
                hess[i][j] = (id - x[i] * x[j] / (r * r)) / r;
            }
        }
        let exact = wirtinger_from_real(r - 1.0, &[x[0] / r, x[1] / r, x[2] / r, x[3] / r], &hess);
        let jet = ball.delta_jet(&q, None).unwrap();
        ball_err = ball_err.max(jet_diff(&jet, &exact));
    }
    pass &= ball_err <= 1e-5;
    parts.push(format!("ball closed form max err {ball_err:.1e}"));
    outcome(pass, parts.join("; "))
}

/// 5. Reduced versus unreduced torsion and scaling invariance.
fn torsion_identities() -> Outcome {
    let worm = Domain::new(DomainSpec::worm(2.5 * PI)).unwrap();
    let sigma = sigma_samples(&worm, 500, 7, 1e-6).unwrap();
    let opts = ConditionOptions::default();
    let zero = FieldProgram::zero();
    let psi = FieldProgram::add(vec![
        FieldProgram::ReZ.scaled(0.3),
        FieldProgram::ImW.scaled(-0.2),
        FieldProgram::Abs2Z.scaled(0.1),
        FieldProgram::mul(vec![FieldProgram::ReW, FieldProgram::ImW]).scaled(0.02),
    ]);
    let (mut spec_err, mut prod_err, mut scale_err) = (0.0f64, 0.0f64, 0.0f64);
    for s in &sigma {
        let reduced = point_terms(&worm, &zero, s, &opts, false).unwrap().denom.inv();
        spec_err = spec_err.max(crel(reduced, unreduced_torsion(&s.bp.rho_jet)));

        let reduced_psi = point_terms(&worm, &psi, s, &opts, false).unwrap().denom.inv();
        let bd = boundary_delta(&worm, &s.bp, opts.eps_b, opts.delta_h).unwrap();
        let psi_jet = psi.real_jet_at(&s.bp.p.to_real()).unwrap().to_wirtinger();
        prod_err = prod_err.max(crel(reduced_psi, unreduced_torsion(&times_exp(&bd.boundary, &psi_jet))));

        for k in [0.5f64, 2.0, 10.0] {
            let shifted = FieldProgram::add(vec![psi.clone(), FieldProgram::constant(k.ln())]);
            let r_k = point_terms(&worm, &shifted, s, &opts, false).unwrap().denom.inv();
            scale_err = scale_err.max(crel(r_k, reduced_psi));
            let scaled = s.bp.rho_jet.combine(k, &s.bp.rho_jet, 0.0);
            scale_err = scale_err.max(crel(unreduced_torsion(&scaled), unreduced_torsion(&s.bp.rho_jet)));
        }
    }
    outcome(
        spec_err <= 1e-4 && prod_err <= 1e-4 && scale_err <= 1e-10 && sigma.len() == 500,
        format!(
            "{} samples; vs defining function {spec_err:.1e}, vs product-rule jets {prod_err:.1e} (tol 1e-4); scaling {scale_err:.1e} (tol 1e-10)",
            sigma.len()
        ),
    )
}

/// 6. Jets against finite differences and third derivatives against a
/// symbolic oracle.
fn jet_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut skipped = 0usize;
    let mut n = 0usize;
    while n < 1000 {
        let depth = rng.gen_range(1..4);
        let prog = random_program(&mut rng, depth);
        let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let jet = match prog.real_jet_at(&x) {
            Ok(j) => j.to_wirtinger(),
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let f = |y: &[f64; 4]| prog.eval(&Complex2Point::from_real(*y)).unwrap_or(f64::NAN);
        let (g, h) = fd_real(f, &x, 1e-2);
        let fd = wirtinger_from_real(jet.val, &g, &h);
        worst = worst.max(jet_diff(&jet, &fd) / jet_scale(&jet).max(1.0));
        n += 1;
    }
    let mut third_worst = 0.0f64;
    let targets = [
        (EntrySel::Mix(0, 0), (0, false, 0, true)),
        (EntrySel::Mix(0, 1), (0, false, 1, true)),
        (EntrySel::Mix(1, 0), (1, false, 0, true)),
        (EntrySel::Mix(1, 1), (1, false, 1, true)),
        (EntrySel::Hol(0, 1), (0, false, 1, false)),
        (EntrySel::Hol(1, 1), (1, false, 1, false)),
    ];
    for _ in 0..200 {
        let poly = Poly(
            (0..rng.gen_range(1..5))
                .map(|_| {
                    let e: [u32; 4] = std::array::from_fn(|_| rng.gen_range(0..3));
                    (rng.gen_range(-1.0..1.0), e)
                })
                .collect(),
        );
        let prog = poly.program();
        let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let v = [c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
        let (sel, (i, bi, j, bj)) = targets[rng.gen_range(0..targets.len())];
        let got = third_directional(&prog, &Complex2Point::from_real(x), v, sel, 1e-3).unwrap();
        let want = apply_ops(&poly, &[dv(v), dz(i, bi), dz(j, bj)], &x);
        third_worst = third_worst.max((got - want).norm() / want.norm().max(1.0));
    }
    outcome(
        worst <= 1e-6 && third_worst <= 1e-7,
        format!(
            "1000 programs ({skipped} rejected points), max rel err {worst:.1e} (tol 1e-6); third-order max rel err {third_worst:.1e} (tol 1e-7)"
        ),
    )
}

/// 7. Condition values from raw unreduced jets and η-monotonicity.
fn condition_coherence() -> Outcome {
    let worm = Domain::new(DomainSpec::worm(2.5 * PI)).unwrap();
    let sigma = sigma_samples(&worm, 60, 11, 1e-6).unwrap();
    let opts = ConditionOptions::default();
    let zero = FieldProgram::zero();
    let eta = 0.5;
    let first = first_condition(&worm, &zero, &sigma, &opts).unwrap();
    let second = second_condition(&worm, &zero, eta, &sigma, &opts).unwrap();
    let raw: Vec<RawPoint> = sigma.iter().map(|s| raw_point(&worm, s, &opts, 1e-3)).collect();
    let c_raw = sigma
        .iter()
        .map(|s| raw_covariant_scalars(&worm, &s.bp.p, 1e-4).iter().map(|v| v.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let c1_raw = 2.0 * c_raw + 2.0 * raw.iter().map(|r| r.hess_nl.norm()).fold(0.0, f64::max);
    let c2_raw = 0.5 * raw.iter().map(|r| r.c2_term.re).fold(f64::NEG_INFINITY, f64::max);
    let mut worst = rel(first.constants.c, c_raw).max(rel(first.constants.c1, c1_raw));
    let c2_err = (first.constants.c2 - c2_raw).abs();
    for ((r, f), s) in raw.iter().zip(&first.per_point).zip(&second.per_point) {
        let lhs = 2.5 + 3.75 * c_raw * r.torsion.norm() + 0.5 * r.l_torsion.norm();
        worst = worst.max(rel(f.lhs.unwrap(), lhs));
        let d = 1.0 / r.torsion.norm();
        let rhs = c2_raw / (d * d) + c1_raw / d;
        worst = worst.max(rel(s.rhs.unwrap(), rhs));
    }
    let coherent = worst <= 1e-3 && c2_err <= 1e-3;

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let family = PsiFamily::default_family();
    let mut violations = 0usize;
    let mut certified_pairs = 0usize;
    for k in 0..100 {
        let spec = match k % 3 {
            0 => DomainSpec::ball(rng.gen_range(0.5..2.0)),
            1 => DomainSpec::ellipsoid(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)),
            _ => DomainSpec::worm(rng.gen_range(1.7..8.0)),
        };
        let d = Domain::new(spec).unwrap();
        let coeffs: Vec<f64> = (0..family.dim()).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let psi = family.program(&coeffs);
        let mut e = [rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99)];
        e.sort_by(f64::total_cmp);
        let plan = SamplePlan {
            samples: 400,
            seed: k,
            ..SamplePlan::default()
        };
        let lo = certify_eta(&d, &psi, e[0], &plan, DEFAULT_PSD_TOL).unwrap();
        let hi = certify_eta(&d, &psi, e[1], &plan, DEFAULT_PSD_TOL).unwrap();
        if hi.verdict == Verdict::Certified {
            certified_pairs += 1;
            if lo.verdict != Verdict::Certified {
                violations += 1;
            }
        }
        if lo.verdict == Verdict::Refuted && hi.verdict != Verdict::Refuted {
            violations += 1;
        }
    }
    outcome(
        coherent && violations == 0,
        format!(
            "{} samples, max rel diff {worst:.1e} (tol 1e-3), |dC2| {c2_err:.1e}; monotonicity: 100 triples, {certified_pairs} certified at the larger eta, {violations} violations",
            sigma.len()
        ),
    )
}

/// 8. L¹ torsion integral at 500 versus 2000 samples.
fn l1_stability() -> Outcome {
    let worm = Domain::new(DomainSpec::worm(2.5 * PI)).unwrap();
    let opts = ConditionOptions::default();
    let l1 = |n: usize| {
        let sigma = sigma_samples(&worm, n, 8, 1e-6).unwrap();
        l1_torsion_integral(&worm, &FieldProgram::zero(), &sigma, &opts).unwrap()
    };
    let (a, b) = (l1(500), l1(2000));
    let r = (a - b).abs() / b.abs();
    outcome(r <= 0.05, format!("I(500)={a:.4} I(2000)={b:.4} rel diff {r:.2e} (tol 5e-2)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("ball certification", ball_certification),
        ("worm upper-bound consistency", worm_upper_bound),
        ("discriminant-eigenvalue equivalence", discriminant_equivalence),
        ("distance-function invariants", distance_invariants),
        ("torsion identities", torsion_identities),
        ("jet correctness", jet_correctness),
        ("necessary-condition coherence", condition_coherence),
        ("L1 quadrature stability", l1_stability),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += (!o.pass) as usize;
        println!("[{tag}] {}. {name}: {} [{:.1}s]", k + 1, o.detail, secs(t.elapsed()));
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
