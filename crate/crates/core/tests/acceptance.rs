//! Acceptance checklist for the whole workspace. Each test prints a single
//! verdict line for its criterion (run with `--nocapture` to see all of
//! them) and fails loudly if the criterion does not hold.

use std::sync::LazyLock;

use num_complex::Complex64;
use polarcert::ensemble::{
    child_seed, generate, named_instance, perturb_rank_preserving, random_unitary, run_corpus,
    CorpusConfig, CorpusReport, EnsembleMix, InstanceSpec,
};
use polarcert::perturb::{
    certify, proof_trace_cr, proof_trace_main, scan_resolvent_angular, small_pert_implication,
};
use polarcert::polar::{dilate_to_index_zero, polar_decompose, unitary_extension};
use polarcert::spectral::{reduced_min_modulus, svd};
use polarcert::subspace::{
    classify_cross_projections, directed_gap, gap_report, Subspace, SurjectivityClass,
};
use polarcert::sylvester::solve_sylvester;
use polarcert::{Matrix, TolerancePolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: usize, label: &str, pass: bool, detail: &str) {
    let word = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:02} {word}  {label}: {detail}");
    assert!(pass, "criterion {id} failed: {detail}");
}

fn tol() -> TolerancePolicy {
    TolerancePolicy::default()
}

/// Flagship corpus: default ensemble mix, shapes up to 12x12.
static DEFAULT_CORPUS: LazyLock<CorpusReport> =
    LazyLock::new(|| run_corpus(&CorpusConfig::new(10_000, 42)).expect("default corpus"));

/// Universal-estimate corpus: every trial unrestricted.
static UNRESTRICTED_CORPUS: LazyLock<CorpusReport> = LazyLock::new(|| {
    let mut config = CorpusConfig::new(10_000, 43);
    config.mix = EnsembleMix {
        equal_rank: 0.0,
        perturbation: 0.0,
        orthogonal: 0.0,
        unrestricted: 1.0,
    };
    run_corpus(&config).expect("unrestricted corpus")
});

fn slack_of(report: &CorpusReport, bound: &str) -> f64 {
    report.worst_slack.get(bound).copied().unwrap_or(f64::NAN)
}

fn failures_of(report: &CorpusReport, bound: &str) -> usize {
    report.failures.iter().filter(|f| f.bound == bound).count()
}

#[test]
fn criterion_01_main_bound_corpus() {
    let report = &*DEFAULT_CORPUS;
    let slack = slack_of(report, "main");
    let pass = failures_of(report, "main") == 0
        && slack <= 1.0 + 1e-8
        && report.trials == 10_000
        && report.runtime_seconds < 120.0;
    verdict(
        1,
        "main bound over the default 10k corpus",
        pass,
        &format!(
            "worst qdist/bound {slack:.6}, {} failures, {:.1}s",
            failures_of(report, "main"),
            report.runtime_seconds
        ),
    );
}

#[test]
fn criterion_02_improved_bound_corpus() {
    let report = &*DEFAULT_CORPUS;
    let slack = slack_of(report, "improved");
    let pass = failures_of(report, "improved") == 0
        && failures_of(report, "improved_exceeds_main") == 0
        && slack <= 1.0 + 1e-8;
    verdict(
        2,
        "improved bound never loosens the main bound",
        pass,
        &format!("worst qdist/bound {slack:.6}"),
    );
}

#[test]
fn criterion_03_universal_estimate_corpus() {
    let report = &*UNRESTRICTED_CORPUS;
    let plain = slack_of(report, "cr_plain");
    let gap = slack_of(report, "cr_gap");
    let pass = report.failures.is_empty()
        && plain <= 1.0 + 1e-8
        && report.worst_slack.contains_key("cr_gap")
        && gap <= 1.0 + 1e-8;
    verdict(
        3,
        "universal estimate over 10k unrestricted pairs",
        pass,
        &format!("worst plain {plain:.6}, worst five-halves {gap:.6}"),
    );
}

#[test]
fn criterion_04_remark_instance_is_exact() {
    let pair = named_instance("remark-projections").expect("named instance");
    let cert = certify(&pair.a1, &pair.a2, &tol()).expect("certificate");
    let exact = [
        (cert.sigma1, 1.0),
        (cert.sigma2, 1.0),
        (cert.dist, 1.0),
        (cert.qdist, 1.0),
        (cert.bound_main, 2.0),
    ];
    let numbers_ok = exact.iter().all(|(got, want)| (got - want).abs() <= 1e-12);
    let hyp_ok = cert.hyp.index_equal
        && cert.hyp.delta_range_zero
        && cert.hyp.delta_kernel_zero
        && cert.hyp.rank1 == 1
        && cert.hyp.rank2 == 2
        && cert.main_applicable;
    verdict(
        4,
        "orthogonal-projections instance reproduces exactly",
        numbers_ok && hyp_ok,
        &format!(
            "bound_main {} qdist {} ranks {}/{}",
            cert.bound_main, cert.qdist, cert.hyp.rank1, cert.hyp.rank2
        ),
    );
}

#[test]
fn criterion_05_hypothesis_necessity_witness() {
    let pair = named_instance("nested-rank-drop(0.01)").expect("named instance");
    let cert = certify(&pair.a1, &pair.a2, &tol()).expect("certificate");
    let would_be_main = 0.04 / 1.01;
    let cr_plain = 0.01 * (3.0 / 1.01 + 1.0 / 0.01);
    let pass = (cert.qdist - 1.0).abs() <= 1e-6
        && !cert.main_applicable
        && (cert.bound_main - would_be_main).abs() <= 1e-6
        && cert.qdist > cert.bound_main
        && (cert.bound_cr_plain - cr_plain).abs() <= 1e-6
        && cert.cr_plain_holds;
    verdict(
        5,
        "rank drop defeats the would-be main bound",
        pass,
        &format!(
            "qdist {:.6} vs would-be bound {:.6}, unconditional bound {:.6}",
            cert.qdist, cert.bound_main, cert.bound_cr_plain
        ),
    );
}

fn random_subspace(rng: &mut ChaCha8Rng, ambient: usize, dim: usize) -> Subspace {
    let u = random_unitary(ambient, rng.gen()).expect("unitary");
    Subspace::new(u.columns(0, dim)).expect("orthonormal columns")
}

#[test]
fn criterion_06_gap_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut worst_proj = 0.0f64;
    let mut worst_compl = 0.0f64;
    let mut worst_sym = 0.0f64;
    for _ in 0..1000 {
        let dv = rng.gen_range(1..=7);
        let dw = rng.gen_range(1..=7);
        let v = random_subspace(&mut rng, 8, dv);
        let w = random_subspace(&mut rng, 8, dw);
        let rep = gap_report(&v, &w).expect("gap report");

        let projector_distance = (&v.projector() - &w.projector()).spectral_norm();
        worst_proj = worst_proj.max((rep.gap_hat - projector_distance).abs());

        let lhs = directed_gap(&v.complement().unwrap(), &w.complement().unwrap()).unwrap();
        let rhs = directed_gap(&w, &v).unwrap();
        worst_compl = worst_compl.max((lhs - rhs).abs());

        // Strictly-below-one decisions carry the same margin the library
        // uses: an exact gap of one computes as one minus a few ulps.
        if rep.gap_hat < 1.0 - 1e-8 {
            worst_sym = worst_sym.max(rep.gap_diff);
        }
    }
    let pass = worst_proj <= 1e-10 && worst_compl <= 1e-10 && worst_sym <= 1e-10;
    verdict(
        6,
        "gap metric identities on 1000 pairs in C^8",
        pass,
        &format!(
            "projector defect {worst_proj:.2e}, complement defect {worst_compl:.2e}, symmetry defect {worst_sym:.2e}"
        ),
    );
}

#[test]
fn criterion_07_gap_difference_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let mut disagreements = 0usize;
    for trial in 0..1000 {
        let ambient = rng.gen_range(3..=8);
        let (v, w) = match trial % 4 {
            0 => {
                // Equal dimension, independent.
                let d = rng.gen_range(1..=ambient - 1);
                (
                    random_subspace(&mut rng, ambient, d),
                    random_subspace(&mut rng, ambient, d),
                )
            }
            1 => {
                // Strictly nested.
                let big = rng.gen_range(2..=ambient);
                let small = rng.gen_range(1..big);
                let u = random_unitary(ambient, rng.gen()).unwrap();
                (
                    Subspace::new(u.columns(0, small)).unwrap(),
                    Subspace::new(u.columns(0, big)).unwrap(),
                )
            }
            2 => {
                // Mutually orthogonal of different dimension.
                let d1 = rng.gen_range(1..ambient);
                let max2 = ambient - d1;
                let d2 = rng.gen_range(1..=max2);
                let u = random_unitary(ambient, rng.gen()).unwrap();
                (
                    Subspace::new(u.columns(0, d1)).unwrap(),
                    Subspace::new(u.columns(d1, d1 + d2)).unwrap(),
                )
            }
            _ => {
                // Independent with independent dimensions.
                let dv = rng.gen_range(1..=ambient);
                let dw = rng.gen_range(1..=ambient);
                (
                    random_subspace(&mut rng, ambient, dv),
                    random_subspace(&mut rng, ambient, dw),
                )
            }
        };
        let rep = gap_report(&v, &w).unwrap();
        let class = classify_cross_projections(&v, &w).unwrap();
        let by_gap = rep.gap_diff <= 1e-8;
        let by_class = matches!(
            class,
            SurjectivityClass::BothSurjective | SurjectivityClass::NeitherSurjective
        );
        if by_gap != by_class {
            disagreements += 1;
        }
    }
    verdict(
        7,
        "vanishing gap difference matches the surjectivity classes",
        disagreements == 0,
        &format!("{disagreements} disagreements in 1000 mixed trials"),
    );
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let q = random_unitary(n, rng.gen()).expect("unitary");
    let eigs: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    &(&q * &Matrix::from_real_diag(&eigs)) * &q.adjoint()
}

#[test]
fn criterion_08_sylvester_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let mut worst_residual = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut separated = true;
    for _ in 0..1000 {
        let ns = rng.gen_range(1..=6);
        let nt = rng.gen_range(1..=6);
        let gap: f64 = rng.gen_range(0.05..2.0);
        let t = random_hermitian(&mut rng, nt, -1.0, 1.0);
        let s = random_hermitian(&mut rng, ns, 1.0 + gap, 3.0 + gap);
        let y = Matrix::from_fn(nt, ns, |_, _| {
            Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
        });
        let sol = solve_sylvester(&s, &t, &y).expect("solvable");
        worst_residual = worst_residual.max(sol.residual / y.spectral_norm().max(1.0));
        match sol.bound_value {
            Some(bound) => {
                worst_ratio = worst_ratio.max(sol.x.spectral_norm() / bound);
            }
            None => separated = false,
        }
    }
    // Scalar case: the bound is attained exactly.
    let tight = solve_sylvester(
        &Matrix::from_real_diag(&[2.0]),
        &Matrix::from_real_diag(&[0.0]),
        &Matrix::from_real_diag(&[3.0]),
    )
    .unwrap();
    let tight_ok = (tight.x.spectral_norm() - tight.bound_value.unwrap()).abs() <= 1e-12;
    let pass =
        separated && worst_residual <= 1e-10 && worst_ratio <= 1.0 + 1e-10 && tight_ok;
    verdict(
        8,
        "separated Hermitian coefficients over 1000 draws",
        pass,
        &format!(
            "worst residual {worst_residual:.2e}, worst norm/bound {worst_ratio:.8}, scalar tight {tight_ok}"
        ),
    );
}

#[test]
fn criterion_09_proof_trace_suites() {
    let master = 900u64;
    let mut main_failures = 0usize;
    for trial in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(master, trial));
        let n = rng.gen_range(2..=8);
        let r = rng.gen_range(1..=n);
        let spec = |seed: u64| InstanceSpec {
            rows: n,
            cols: n,
            rank: r,
            sigma_min: 0.1,
            sigma_max: 10.0,
            seed,
        };
        let a1 = generate(&spec(rng.gen())).unwrap();
        let a2 = generate(&spec(rng.gen())).unwrap();
        let trace = proof_trace_main(&a1, &a2, &tol()).expect("equal ranks keep the trace applicable");
        let dist_cap = trace.dist * (1.0 + 1e-8);
        if !(trace.summands_hold
            && trace.summand_norms.iter().all(|s| *s <= dist_cap)
            && trace.sylvester_holds)
        {
            main_failures += 1;
        }
    }

    let mut cr_failures = 0usize;
    let mut worst_vanishing = 0.0f64;
    for trial in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(master + 1, trial));
        let m = rng.gen_range(2..=8);
        let n = rng.gen_range(2..=8);
        let spec = |rank: usize, seed: u64| InstanceSpec {
            rows: m,
            cols: n,
            rank,
            sigma_min: 0.1,
            sigma_max: 10.0,
            seed,
        };
        let a1 = generate(&spec(rng.gen_range(1..=m.min(n)), rng.gen())).unwrap();
        let a2 = generate(&spec(rng.gen_range(1..=m.min(n)), rng.gen())).unwrap();
        let trace = proof_trace_cr(&a1, &a2, &tol()).unwrap();
        worst_vanishing = worst_vanishing.max(trace.vanishing_term_norm);
        if !(trace.first_holds
            && trace.second_holds
            && trace.kernel_holds
            && trace.vanishing_ok
            && trace.range_holds
            && trace.x_bound_holds)
        {
            cr_failures += 1;
        }
    }
    let pass = main_failures == 0 && cr_failures == 0 && worst_vanishing <= 1e-10;
    verdict(
        9,
        "summand-level replays of both decompositions",
        pass,
        &format!(
            "{main_failures} four-summand failures, {cr_failures} unconditional failures, worst vanishing term {worst_vanishing:.2e}"
        ),
    );
}

#[test]
fn criterion_10_small_perturbation_chain() {
    let master = 1000u64;
    let mut bad = 0usize;
    for trial in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(master, trial));
        let m = rng.gen_range(2..=8);
        let n = rng.gen_range(2..=8);
        let spec = InstanceSpec {
            rows: m,
            cols: n,
            rank: rng.gen_range(1..=m.min(n)),
            sigma_min: 0.1,
            sigma_max: 10.0,
            seed: rng.gen(),
        };
        let a1 = generate(&spec).unwrap();
        let sigma = reduced_min_modulus(&a1, &tol()).unwrap();
        let eps = rng.gen_range(0.01..0.15) * sigma;
        let a2 = perturb_rank_preserving(&a1, eps, rng.gen()).unwrap();
        let report = small_pert_implication(&a1, &a2, &tol()).unwrap();
        if !(report.applies && report.gap_lt1 && report.wedin_holds) {
            bad += 1;
        }
    }
    verdict(
        10,
        "small perturbations keep ranges close and pseudo-inverses Lipschitz",
        bad == 0,
        &format!("{bad} violations in 1000 perturbation pairs"),
    );
}

#[test]
fn criterion_11_polar_axioms_and_dilation() {
    let master = 1100u64;
    let mut axiom_bad = 0usize;
    let mut extension_bad = 0usize;
    let mut dilation_bad = 0usize;
    let mut checked_matrices = 0usize;
    for trial in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(master, trial));
        let m = rng.gen_range(2..=7);
        let n = rng.gen_range(2..=7);
        let spec = |seed: u64, rank: usize| InstanceSpec {
            rows: m,
            cols: n,
            rank,
            sigma_min: 0.2,
            sigma_max: 5.0,
            seed,
        };
        let a1 = generate(&spec(rng.gen(), rng.gen_range(1..=m.min(n)))).unwrap();
        let a2 = generate(&spec(rng.gen(), rng.gen_range(1..=m.min(n)))).unwrap();

        for a in [&a1, &a2] {
            checked_matrices += 1;
            let p = polar_decompose(a, &tol()).unwrap();
            let q = &p.q;
            let scale = a.spectral_norm().max(1.0);
            let partial_isometry = (&(&(q * &q.adjoint()) * q) - q).spectral_norm() <= 1e-8;
            let reconstructs = (&(q * &p.h) - a).spectral_norm() <= 1e-8 * scale;
            let adjoint_ok =
                polarcert::polar::angular_factor_adjoint_check(a, &tol()).unwrap();
            if !(partial_isometry && reconstructs && adjoint_ok) {
                axiom_bad += 1;
            }

            if m == n {
                let f = svd(a, &tol()).unwrap();
                let vr = f.v.columns(0, f.rank);
                let pn_perp = &vr * &vr.adjoint();
                let ext = unitary_extension(a, &tol()).unwrap();
                let unitary =
                    (&(&ext.u.adjoint() * &ext.u) - &Matrix::identity(n)).spectral_norm() <= 1e-8;
                let agrees =
                    (&(&(&ext.u - &ext.q) * &pn_perp)).spectral_norm() <= 1e-8;
                let projector =
                    (&(&ext.u.adjoint() * &ext.q) - &pn_perp).spectral_norm() <= 1e-8;
                if !(unitary && agrees && projector) {
                    extension_bad += 1;
                }
            }
        }

        let q1 = polar_decompose(&a1, &tol()).unwrap().q;
        let q2 = polar_decompose(&a2, &tol()).unwrap().q;
        let q1d = polar_decompose(&dilate_to_index_zero(&a1), &tol()).unwrap().q;
        let q2d = polar_decompose(&dilate_to_index_zero(&a2), &tol()).unwrap().q;
        let plain = (&q1 - &q2).spectral_norm();
        let dilated = (&q1d - &q2d).spectral_norm();
        if (plain - dilated).abs() > 1e-10 {
            dilation_bad += 1;
        }
    }
    let pass = axiom_bad == 0 && extension_bad == 0 && dilation_bad == 0;
    verdict(
        11,
        "angular-factor axioms, extensions and dilation invariance",
        pass,
        &format!(
            "{checked_matrices} matrices: {axiom_bad} axiom, {extension_bad} extension, {dilation_bad} dilation violations"
        ),
    );
}

#[test]
fn criterion_12_scan_resolution_halves_steps() {
    let a = Matrix::from_real_diag(&[1.0, 0.0]);
    let center = Complex64::new(0.0, 0.0);
    let max_step = |samples: usize| {
        scan_resolvent_angular(&a, center, 0.1, samples, &tol())
            .unwrap()
            .iter()
            .map(|p| p.qdist)
            .fold(0.0, f64::max)
    };
    let coarse = max_step(64);
    let fine = max_step(128);
    let ratio = coarse / fine;
    let pass = (ratio / 2.0 - 1.0).abs() <= 0.1;
    verdict(
        12,
        "doubling scan samples halves the largest angular step",
        pass,
        &format!("max step {coarse:.6} at 64 samples, {fine:.6} at 128, ratio {ratio:.4}"),
    );
}
