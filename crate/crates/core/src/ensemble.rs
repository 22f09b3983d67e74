//! Deterministic instance generation and the seeded corpus runner.
//!
//! Everything here is reproducible: a 64-bit seed fixes the output
//! bitwise. The corpus derives one child seed per trial through a
//! SplitMix64-style hash, so trials are independent streams and the report
//! does not depend on execution order.

use crate::error::Error;
use crate::matrix::{Matrix, TolerancePolicy};
use crate::perturb::certificate_from;
use crate::polar::decompose;
use crate::spectral::{eigh, svd};
use crate::subspace::directed_gap;
use crate::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// Shape, rank and singular value range of one generated instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidSpec("rows and cols must be positive".into()));
        }
        if self.rank == 0 || self.rank > self.rows.min(self.cols) {
            return Err(Error::InvalidSpec(format!(
                "rank {} is out of range for a {}x{} matrix",
                self.rank, self.rows, self.cols
            )));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min <= self.sigma_max && self.sigma_max.is_finite())
        {
            return Err(Error::InvalidSpec(
                "singular values must satisfy 0 < sigma_min <= sigma_max < inf".into(),
            ));
        }
        Ok(())
    }
}

/// A named example pair together with a note on its construction.
#[derive(Debug, Clone, Serialize)]
pub struct NamedPair {
    pub a1: Matrix,
    pub a2: Matrix,
    pub note: String,
}

/// Relative frequencies of the four pair ensembles drawn by the corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleMix {
    /// Independent pairs of equal rank (the conditional bounds apply).
    pub equal_rank: f64,
    /// Rank-preserving small perturbations of one draw.
    pub perturbation: f64,
    /// Pairs with mutually orthogonal ranges and different ranks: the gap
    /// difference vanishes although the ranks disagree.
    pub orthogonal: f64,
    /// Fully independent pairs; only the unconditional bound is expected
    /// to apply in general.
    pub unrestricted: f64,
}

impl Default for EnsembleMix {
    fn default() -> Self {
        EnsembleMix {
            equal_rank: 0.40,
            perturbation: 0.30,
            orthogonal: 0.15,
            unrestricted: 0.15,
        }
    }
}

impl EnsembleMix {
    pub fn validate(&self) -> Result<()> {
        let parts = [
            self.equal_rank,
            self.perturbation,
            self.orthogonal,
            self.unrestricted,
        ];
        if parts.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidSpec("ensemble weights must be nonnegative".into()));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!(
                "ensemble weights sum to {total}, expected 1"
            )));
        }
        Ok(())
    }
}

/// Full configuration of a corpus run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub trials: usize,
    pub seed: u64,
    /// Rows and columns are drawn uniformly from `2..=max_dim` unless
    /// `shape` pins them.
    pub max_dim: usize,
    /// Fixed `(rows, cols)` for every trial; `None` draws shapes per trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<(usize, usize)>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub mix: EnsembleMix,
}

impl CorpusConfig {
    /// Default corpus: dimensions up to 12, singular values log-uniform in
    /// `[0.1, 10]`, default ensemble mix.
    pub fn new(trials: usize, seed: u64) -> Self {
        CorpusConfig {
            trials,
            seed,
            max_dim: 12,
            shape: None,
            sigma_min: 0.1,
            sigma_max: 10.0,
            mix: EnsembleMix::default(),
        }
    }
}

/// One violated check: the trial's child seed and the name of the check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFailure {
    pub seed: u64,
    pub bound: String,
}

/// Aggregate result of a corpus run. `worst_slack` maps each bound name to
/// the largest observed `qdist / bound` over the trials where the bound
/// applied; a value above 1 would be a violation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusReport {
    pub trials: usize,
    pub failures: Vec<CorpusFailure>,
    pub worst_slack: BTreeMap<String, f64>,
    pub runtime_seconds: f64,
}

/// Child-seed derivation: SplitMix64 finalizer of
/// `master + (index + 1) * 0x9E3779B97F4A7C15` (wrapping).
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let scale = 0.5f64.sqrt();
    Matrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * scale
    })
}

/// Haar-distributed unitary: Gram-Schmidt applied to a complex Gaussian
/// matrix. The normalization divides by a positive real, which is exactly
/// the positive-diagonal phase convention that makes the distribution
/// Haar. Deterministic per seed.
pub fn random_unitary(n: usize, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidInput("unitary dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(&mut rng, n, n);
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| g[(i, j)]).collect())
        .collect();
    for k in 0..n {
        // Two orthogonalization passes keep the orthogonality loss at the
        // rounding level even for unlucky draws.
        for _ in 0..2 {
            for j in 0..k {
                let proj: Complex64 = cols[j]
                    .iter()
                    .zip(cols[k].iter())
                    .map(|(qj, wk)| qj.conj() * wk)
                    .sum();
                for i in 0..n {
                    let sub = proj * cols[j][i];
                    cols[k][i] -= sub;
                }
            }
        }
        let norm: f64 = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "gaussian sample produced dependent columns");
        for entry in cols[k].iter_mut() {
            *entry /= norm;
        }
    }
    Ok(Matrix::from_fn(n, n, |i, j| cols[j][i]))
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo.ln()..hi.ln()).exp()
    }
}

/// Random matrix with prescribed shape, rank and singular value range:
/// `u * diag(s) * v*` with Haar factors and exactly `rank` log-uniform
/// singular values.
pub fn generate(spec: &InstanceSpec) -> Result<Matrix> {
    spec.validate()?;
    let u = random_unitary(spec.rows, child_seed(spec.seed, 0))?;
    let v = random_unitary(spec.cols, child_seed(spec.seed, 1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(spec.seed, 2));
    let mut s: Vec<f64> = (0..spec.rank)
        .map(|_| log_uniform(&mut rng, spec.sigma_min, spec.sigma_max))
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let core = &u.columns(0, spec.rank) * &Matrix::rect_diag(spec.rank, spec.rank, &s);
    Ok(&core * &v.columns(0, spec.rank).adjoint())
}

/// `exp(angle * k)` for a random skew-Hermitian `k` of unit spectral norm,
/// computed through the eigendecomposition of the Hermitian `-i k`.
fn unit_skew_rotation(dim: usize, angle: f64, seed: u64) -> Result<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(&mut rng, dim, dim);
    let k = (&g - &g.adjoint()).scale(0.5);
    let norm = k.spectral_norm();
    assert!(norm > 0.0, "gaussian sample produced a zero skew part");
    let h = k.scale(1.0 / norm).scale_c(Complex64::new(0.0, -1.0));
    let eig = eigh(&h)?;
    let phases = Matrix::from_fn(dim, dim, |i, j| {
        if i == j {
            (Complex64::new(0.0, angle) * eig.eigvals[i]).exp()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(&(&eig.q * &phases) * &eig.q.adjoint())
}

/// Adds a perturbation of spectral norm at most `epsilon` that cannot
/// change the rank: the nonzero singular values move by at most
/// `epsilon / 2` each and the singular bases rotate by `exp(angle * k)`
/// with `angle = epsilon / (4 (|a| + epsilon))` and `|k| = 1`, so the
/// smallest positive singular value stays positive and the zero ones stay
/// exactly zero.
///
/// # Errors
/// `EpsilonTooLarge` when `epsilon >= sigma / 2`, `ZeroOperator`,
/// `InvalidInput` for a negative or non-finite epsilon.
pub fn perturb_rank_preserving(a: &Matrix, epsilon: f64, seed: u64) -> Result<Matrix> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput("epsilon must be a nonnegative real".into()));
    }
    let tol = TolerancePolicy::default();
    let decomp = svd(a, &tol)?;
    if decomp.rank == 0 {
        return Err(Error::ZeroOperator);
    }
    let sigma = decomp.singvals[decomp.rank - 1];
    let limit = sigma / 2.0;
    if epsilon >= limit {
        return Err(Error::EpsilonTooLarge { epsilon, limit });
    }
    if epsilon == 0.0 {
        return Ok(a.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = decomp.singvals.clone();
    for value in s.iter_mut().take(decomp.rank) {
        *value += rng.gen_range(-epsilon / 2.0..epsilon / 2.0);
    }
    for value in s.iter_mut().skip(decomp.rank) {
        *value = 0.0;
    }
    let body = &(&decomp.u * &Matrix::rect_diag(a.rows(), a.cols(), &s)) * &decomp.v.adjoint();
    let angle = epsilon / (4.0 * (decomp.singvals[0] + epsilon));
    let ru = unit_skew_rotation(a.rows(), angle, rng.gen())?;
    let rv = unit_skew_rotation(a.cols(), angle, rng.gen())?;
    Ok(&(&ru * &body) * &rv.adjoint())
}

fn parse_param(name: &str, base: &str) -> Option<f64> {
    let rest = name.strip_prefix(base)?;
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    inner
        .parse::<f64>()
        .ok()
        .filter(|eps| *eps > 0.0 && eps.is_finite())
}

/// The named example pairs:
///
/// * `"remark-projections"`: the orthogonal projections `diag(1,0,0)` and
///   `diag(0,1,1)`;
/// * `"intro-counterexample(eps)"`: `(eps^2 I, eps I)` on two dimensions;
/// * `"nested-rank-drop(eps)"`: `(diag(1, eps), diag(1, 0))`.
///
/// # Errors
/// `UnknownInstance` for anything else, including malformed parameters.
pub fn named_instance(name: &str) -> Result<NamedPair> {
    if name == "remark-projections" {
        return Ok(NamedPair {
            a1: Matrix::from_real_diag(&[1.0, 0.0, 0.0]),
            a2: Matrix::from_real_diag(&[0.0, 1.0, 1.0]),
            note: "projections onto two mutually orthogonal subspaces of different \
                   dimension: the gap differences of ranges and kernels vanish although \
                   the ranks disagree"
                .into(),
        });
    }
    if let Some(eps) = parse_param(name, "intro-counterexample") {
        return Ok(NamedPair {
            a1: Matrix::from_real_diag(&[eps * eps, eps * eps]),
            a2: Matrix::from_real_diag(&[eps, eps]),
            note: format!(
                "scaled identities (eps^2 I, eps I) with eps = {eps}; the classical \
                 counterexample uses the zero operator for the first entry, which is \
                 replaced by eps^2 I here because the certificates require nonzero \
                 operators"
            ),
        });
    }
    if let Some(eps) = parse_param(name, "nested-rank-drop") {
        return Ok(NamedPair {
            a1: Matrix::from_real_diag(&[1.0, eps]),
            a2: Matrix::from_real_diag(&[1.0, 0.0]),
            note: format!(
                "a full-rank operator next to its rank-dropping limit (eps = {eps}): \
                 the gap-difference hypothesis fails and the angular distance stays at 1 \
                 however small eps gets, while the unconditional bound still holds"
            ),
        });
    }
    Err(Error::UnknownInstance(name.into()))
}

enum PairKind {
    EqualRank,
    Perturbation,
    Orthogonal,
    Unrestricted,
}

fn draw_pair(config: &CorpusConfig, seed: u64) -> Result<(Matrix, Matrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick: f64 = rng.gen();
    let mix = &config.mix;
    let mut kind = if pick < mix.equal_rank {
        PairKind::EqualRank
    } else if pick < mix.equal_rank + mix.perturbation {
        PairKind::Perturbation
    } else if pick < mix.equal_rank + mix.perturbation + mix.orthogonal {
        PairKind::Orthogonal
    } else {
        PairKind::Unrestricted
    };
    let (m, n) = match config.shape {
        Some(shape) => shape,
        None => (
            rng.gen_range(2..=config.max_dim),
            rng.gen_range(2..=config.max_dim),
        ),
    };
    if matches!(kind, PairKind::Orthogonal) && m < 3 {
        // Two orthogonal ranges of different dimension need at least
        // three ambient dimensions.
        kind = PairKind::EqualRank;
    }
    let spec = |rank: usize, seed: u64| InstanceSpec {
        rows: m,
        cols: n,
        rank,
        sigma_min: config.sigma_min,
        sigma_max: config.sigma_max,
        seed,
    };
    match kind {
        PairKind::EqualRank => {
            let r = rng.gen_range(1..=m.min(n));
            let a1 = generate(&spec(r, rng.gen()))?;
            let a2 = generate(&spec(r, rng.gen()))?;
            Ok((a1, a2))
        }
        PairKind::Perturbation => {
            let r = rng.gen_range(1..=m.min(n));
            let a1 = generate(&spec(r, rng.gen()))?;
            let sigma = crate::spectral::reduced_min_modulus(&a1, &TolerancePolicy::default())?;
            let eps = rng.gen_range(0.02..0.15) * sigma;
            let a2 = perturb_rank_preserving(&a1, eps, rng.gen())?;
            Ok((a1, a2))
        }
        PairKind::Orthogonal => {
            let r1 = rng.gen_range(1..=(m - 1).min(n));
            let candidates: Vec<usize> = (1..=(m - r1).min(n)).filter(|r| *r != r1).collect();
            let (r1, r2) = if candidates.is_empty() {
                (1, 2)
            } else {
                (r1, candidates[rng.gen_range(0..candidates.len())])
            };
            let w = random_unitary(m, rng.gen())?;
            let v1 = random_unitary(n, rng.gen())?;
            let v2 = random_unitary(n, rng.gen())?;
            let mut draw_vals = |count: usize| -> Vec<f64> {
                let mut s: Vec<f64> = (0..count)
                    .map(|_| log_uniform(&mut rng, config.sigma_min, config.sigma_max))
                    .collect();
                s.sort_by(|a, b| b.partial_cmp(a).unwrap());
                s
            };
            let s1 = draw_vals(r1);
            let s2 = draw_vals(r2);
            let a1 = &(&w.columns(0, r1) * &Matrix::rect_diag(r1, r1, &s1))
                * &v1.columns(0, r1).adjoint();
            let a2 = &(&w.columns(r1, r1 + r2) * &Matrix::rect_diag(r2, r2, &s2))
                * &v2.columns(0, r2).adjoint();
            Ok((a1, a2))
        }
        PairKind::Unrestricted => {
            let r1 = rng.gen_range(1..=m.min(n));
            let r2 = rng.gen_range(1..=m.min(n));
            let a1 = generate(&spec(r1, rng.gen()))?;
            let a2 = generate(&spec(r2, rng.gen()))?;
            Ok((a1, a2))
        }
    }
}

fn run_checks(
    a1: &Matrix,
    a2: &Matrix,
    seed: u64,
    tol: &TolerancePolicy,
    failures: &mut Vec<CorpusFailure>,
    worst: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let d1 = decompose(a1, tol)?;
    let d2 = decompose(a2, tol)?;
    let cert = certificate_from(a1, a2, &d1, &d2, tol)?;

    let fail = |failures: &mut Vec<CorpusFailure>, name: &str| {
        failures.push(CorpusFailure {
            seed,
            bound: name.into(),
        });
    };
    let record = |failures: &mut Vec<CorpusFailure>,
                      worst: &mut BTreeMap<String, f64>,
                      name: &str,
                      ok: bool,
                      bound: f64| {
        let ratio = if bound > 0.0 {
            cert.qdist / bound
        } else if cert.qdist == 0.0 {
            0.0
        } else {
            f64::MAX
        };
        let entry = worst.entry(name.to_string()).or_insert(0.0);
        if ratio > *entry {
            *entry = ratio;
        }
        if !ok {
            failures.push(CorpusFailure {
                seed,
                bound: name.into(),
            });
        }
    };

    if cert.main_applicable {
        record(failures, worst, "main", cert.main_holds, cert.bound_main);
        record(
            failures,
            worst,
            "improved",
            cert.improved_holds,
            cert.bound_improved,
        );
        if cert.bound_improved > cert.bound_main * (1.0 + 1e-12) {
            fail(failures, "improved_exceeds_main");
        }
    }
    record(
        failures,
        worst,
        "cr_plain",
        cert.cr_plain_holds,
        cert.bound_cr_plain,
    );
    if let Some(bound) = cert.bound_cr_gap {
        record(failures, worst, "cr_gap", cert.cr_gap_holds, bound);
    }

    // Angular distances and reduced minimum moduli of the adjoint pair
    // must match the original's.
    let e1 = decompose(&a1.adjoint(), tol)?;
    let e2 = decompose(&a2.adjoint(), tol)?;
    let qdist_adj = (&e1.polar.q - &e2.polar.q).spectral_norm();
    let sigma_ok = (e1.polar.sigma - cert.sigma1).abs() <= 1e-10 * cert.sigma1.max(1.0)
        && (e2.polar.sigma - cert.sigma2).abs() <= 1e-10 * cert.sigma2.max(1.0);
    if (qdist_adj - cert.qdist).abs() > 1e-10 || !sigma_ok {
        fail(failures, "duality");
    }

    // Directed range gaps against dist / sigma, and the symmetric gap
    // against dist / max(sigma) once it is below one.
    let slack = 1.0 + 1e-8;
    let gap12 = directed_gap(&d1.range, &d2.range)?;
    let gap21 = directed_gap(&d2.range, &d1.range)?;
    let hat = gap12.max(gap21);
    let directed_ok =
        gap12 <= cert.dist / cert.sigma1 * slack && gap21 <= cert.dist / cert.sigma2 * slack;
    let hat_ok = if hat < 1.0 - 1e-8 {
        hat <= cert.dist / cert.sigma1.max(cert.sigma2) * slack
    } else {
        true
    };
    if !(directed_ok && hat_ok) {
        fail(failures, "gappyhelpy");
    }
    Ok(())
}

/// Runs the seeded corpus: per trial a child seed is derived, a pair is
/// drawn from the configured ensemble mix, and every certificate bound
/// plus the duality and directed-gap properties are checked. The report is
/// bitwise deterministic for a fixed config apart from `runtime_seconds`.
///
/// # Errors
/// `InvalidInput` for zero trials or `max_dim < 2`, `InvalidSpec` for a
/// bad mix or singular value range.
pub fn run_corpus(config: &CorpusConfig) -> Result<CorpusReport> {
    if config.trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    match config.shape {
        Some((rows, cols)) if rows == 0 || cols == 0 => {
            return Err(Error::InvalidSpec("pinned shape must have positive dimensions".into()));
        }
        Some(_) => {}
        None if config.max_dim < 2 => {
            return Err(Error::InvalidInput("max_dim must be at least 2".into()));
        }
        None => {}
    }
    if !(config.sigma_min > 0.0
        && config.sigma_min <= config.sigma_max
        && config.sigma_max.is_finite())
    {
        return Err(Error::InvalidSpec(
            "singular values must satisfy 0 < sigma_min <= sigma_max < inf".into(),
        ));
    }
    config.mix.validate()?;
    let tol = TolerancePolicy::default();
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = BTreeMap::new();
    for trial in 0..config.trials {
        let seed = child_seed(config.seed, trial as u64);
        let (a1, a2) = draw_pair(config, seed)?;
        run_checks(&a1, &a2, seed, &tol, &mut failures, &mut worst)?;
    }
    Ok(CorpusReport {
        trials: config.trials,
        failures,
        worst_slack: worst,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
