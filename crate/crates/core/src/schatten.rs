//! Singular values, Schatten (quasi-)norms and randomized checks of the
//! standard singular-value inequalities and of the commutator lemma.

use faer::{Mat, MatRef, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::renyi::{eta, probe_condition_f, RenyiOrder};
use crate::{c64, Error, Result};

/// Scale-relative slack for inequality checks.
pub const SLACK: f64 = 1e-10;
/// Relative tolerance for ‖A‖_q = ‖A*‖_q.
pub const ADJOINT_TOL: f64 = 1e-12;

/// Singular values in non-increasing order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
}

/// Singular values below `RANK_CUTOFF · s₁` are treated as zero in the norms.
/// Products of a few matrices leave rounding noise near 1e-15·s₁ in the null
/// directions, and at p = 1/2 each such value would still contribute 3e-8.
pub const RANK_CUTOFF: f64 = 1e-13;

impl SingularSpectrum {
    /// s_k with 1-based k; zero beyond the matrix size.
    pub fn s(&self, k: usize) -> f64 {
        if k == 0 {
            return f64::INFINITY;
        }
        self.values.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.s(1).min(f64::MAX);
        }
        self.norm_pow(p).powf(1.0 / p)
    }

    /// ‖·‖_p^p (for finite p).
    pub fn norm_pow(&self, p: f64) -> f64 {
        let floor = RANK_CUTOFF * self.values.first().copied().unwrap_or(0.0);
        self.values.iter().filter(|&&s| s > floor).map(|s| s.powf(p)).sum()
    }
}

pub fn singular_values(a: MatRef<'_, c64>) -> Result<SingularSpectrum> {
    if (0..a.ncols()).any(|j| (0..a.nrows()).any(|i| !(a[(i, j)].re.is_finite() && a[(i, j)].im.is_finite()))) {
        return Err(Error::NonFinite);
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(SingularSpectrum { values: Vec::new() });
    }
    let mut values = a.singular_values().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(SingularSpectrum { values })
}

/// (Σ s_k^p)^{1/p}; p = ∞ gives the operator norm.
pub fn schatten_norm(a: MatRef<'_, c64>, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid(format!("Schatten index must be > 0, got {p}")));
    }
    Ok(singular_values(a)?.norm(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityName {
    /// s_{2k}(A+B) ≤ s_{2k−1}(A+B) ≤ s_k(A) + s_k(B)
    SingularValueSum,
    /// ‖A+B‖_p^p ≤ ‖A‖_p^p + ‖B‖_p^p, p ≤ 1
    PTriangle,
    /// ‖(a_ij)‖_p^p ≤ Σ ‖a_ij‖_p^p, p ≤ 1
    BlockOperator,
    /// s_k(A) ≤ k^{−1/p} ‖A‖_p
    IndividualSingularValue,
    /// ‖AB‖_p ≤ ‖A‖_{p₁} ‖B‖_{p₂}, 1/p = 1/p₁ + 1/p₂
    Hoelder,
    /// ‖A‖_{p₂} ≤ ‖A‖_{p₁} for p₁ < p₂
    Monotonicity,
    /// ‖A‖_q = ‖A*‖_q
    AdjointInvariance,
    /// ‖[A,B]‖_q^q ≤ 2‖BA(1−B)‖_q^q for Hermitian A and a projection B
    CommutatorFactorTwo,
    /// ‖[A,B]‖_q ≤ ‖BA(1−B)‖_q as displayed; reported, not asserted
    CommutatorDisplayed,
    /// ‖BA(1−B)‖_q ≤ ‖[A,B]‖_q for a projection B
    ProjectionCommutator,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchattenReport {
    pub inequality_name: InequalityName,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Largest lhs − rhs seen; negative means every trial held strictly.
    pub max_violation: f64,
    /// Largest lhs − rhs − slack seen; the check passes when this is ≤ 0.
    pub max_excess: f64,
    /// Whether the inequality is asserted, as opposed to only recorded.
    pub asserted: bool,
    pub passed: bool,
}

impl SchattenReport {
    fn new(name: InequalityName, dim: usize, trials: usize, seed: u64, asserted: bool) -> Self {
        SchattenReport {
            inequality_name: name,
            dim,
            trials,
            seed,
            max_violation: f64::NEG_INFINITY,
            max_excess: f64::NEG_INFINITY,
            asserted,
            passed: true,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, slack: f64) {
        let v = lhs - rhs;
        self.max_violation = self.max_violation.max(v);
        self.max_excess = self.max_excess.max(v - slack);
        self.passed = self.max_excess <= 0.0;
    }

    fn merge(mut self, other: SchattenReport) -> Self {
        self.max_violation = self.max_violation.max(other.max_violation);
        self.max_excess = self.max_excess.max(other.max_excess);
        self.passed = self.max_excess <= 0.0;
        self
    }
}

/// Matrix with independent standard complex normal entries (E|z|² = 1).
pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat<c64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(re * s, im * s)
    })
}

/// Orthogonal projection onto the span of `rank` random columns.
pub fn random_projection(rng: &mut impl Rng, dim: usize, rank: usize) -> Mat<c64> {
    if rank == 0 {
        return Mat::zeros(dim, dim);
    }
    let q = random_complex(rng, dim, rank).qr().compute_thin_Q();
    &q * q.adjoint()
}

/// Random Hermitian matrix with eigenvalues uniform in [0, 1].
pub fn random_hermitian_unit(rng: &mut impl Rng, dim: usize) -> Mat<c64> {
    let u = random_complex(rng, dim, dim).qr().compute_Q();
    let d: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let ud = Mat::from_fn(dim, dim, |i, j| u[(i, j)] * d[j]);
    hermitize(&(&ud * u.adjoint()))
}

fn hermitize(a: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

fn sv(a: &Mat<c64>) -> SingularSpectrum {
    singular_values(a.as_ref()).expect("random test matrices are finite")
}

fn trial_rng(seed: u64, stream: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | trial as u64);
    rng
}

fn run_trials<F>(name: InequalityName, dim: usize, trials: usize, seed: u64, asserted: bool, f: F) -> SchattenReport
where
    F: Fn(&mut ChaCha8Rng, &mut SchattenReport) + Sync,
{
    let stream = name as u64 + 1;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rep = SchattenReport::new(name, dim, trials, seed, asserted);
            f(&mut trial_rng(seed, stream, t), &mut rep);
            rep
        })
        .reduce(|| SchattenReport::new(name, dim, trials, seed, asserted), SchattenReport::merge)
}

const P_QUASI: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
const HOELDER_TRIPLES: [(f64, f64, f64); 5] = [
    (1.0, 2.0, 2.0),
    (0.5, 1.0, 1.0),
    (2.0 / 3.0, 1.0, 2.0),
    (1.0, 1.0, f64::INFINITY),
    (0.25, 0.5, 0.5),
];
const P_MONOTONE: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, f64::INFINITY];

fn check_dims(dim: usize, trials: usize) -> Result<()> {
    if !(2..=32).contains(&dim) {
        return Err(Error::invalid(format!("dim must lie in [2, 32], got {dim}")));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    Ok(())
}

/// Checks every singular-value inequality on `trials` seeded random pairs.
pub fn verify_inequalities(dim: usize, trials: usize, seed: u64) -> Result<Vec<SchattenReport>> {
    check_dims(dim, trials)?;
    let mut out = Vec::new();

    out.push(run_trials(InequalityName::SingularValueSum, dim, trials, seed, true, |rng, rep| {
        let a = random_complex(rng, dim, dim);
        let b = random_complex(rng, dim, dim);
        let (sa, sb, sab) = (sv(&a), sv(&b), sv(&(&a + &b)));
        for k in 1..=dim.div_ceil(2) {
            let rhs = sa.s(k) + sb.s(k);
            let slack = SLACK * (sa.s(1) + sb.s(1));
            rep.record(sab.s(2 * k - 1), rhs, slack);
            rep.record(sab.s(2 * k), sab.s(2 * k - 1), slack);
        }
    }));

    out.push(run_trials(InequalityName::PTriangle, dim, trials, seed, true, |rng, rep| {
        let a = random_complex(rng, dim, dim);
        let b = random_complex(rng, dim, dim);
        let (sa, sb, sab) = (sv(&a), sv(&b), sv(&(&a + &b)));
        for p in P_QUASI {
            let rhs = sa.norm_pow(p) + sb.norm_pow(p);
            rep.record(sab.norm_pow(p), rhs, SLACK * (rhs + sab.norm_pow(p)));
        }
    }));

    out.push(run_trials(InequalityName::BlockOperator, dim, trials, seed, true, |rng, rep| {
        // 2×2 block operator with dim×dim blocks
        let blocks: Vec<Mat<c64>> = (0..4).map(|_| random_complex(rng, dim, dim)).collect();
        let full = Mat::from_fn(2 * dim, 2 * dim, |i, j| blocks[2 * (i / dim) + j / dim][(i % dim, j % dim)]);
        let sfull = sv(&full);
        let sblocks: Vec<SingularSpectrum> = blocks.iter().map(sv).collect();
        for p in P_QUASI {
            let rhs: f64 = sblocks.iter().map(|s| s.norm_pow(p)).sum();
            let lhs = sfull.norm_pow(p);
            rep.record(lhs, rhs, SLACK * (lhs + rhs));
        }
    }));

    out.push(run_trials(InequalityName::IndividualSingularValue, dim, trials, seed, true, |rng, rep| {
        let a = random_complex(rng, dim, dim);
        let s = sv(&a);
        for p in [0.5, 1.0, 2.0] {
            let norm = s.norm(p);
            for k in 1..=dim {
                rep.record(s.s(k), (k as f64).powf(-1.0 / p) * norm, SLACK * norm);
            }
        }
    }));

    out.push(run_trials(InequalityName::Hoelder, dim, trials, seed, true, |rng, rep| {
        let a = random_complex(rng, dim, dim);
        let b = random_complex(rng, dim, dim);
        let (sa, sb, sab) = (sv(&a), sv(&b), sv(&(&a * &b)));
        for (p, p1, p2) in HOELDER_TRIPLES {
            let lhs = sab.norm(p);
            let rhs = sa.norm(p1) * sb.norm(p2);
            rep.record(lhs, rhs, SLACK * (lhs + rhs));
        }
    }));

    out.push(run_trials(InequalityName::Monotonicity, dim, trials, seed, true, |rng, rep| {
        let a = random_complex(rng, dim, dim);
        let s = sv(&a);
        for (i, &p1) in P_MONOTONE.iter().enumerate() {
            for &p2 in &P_MONOTONE[i + 1..] {
                let (lo, hi) = (s.norm(p2), s.norm(p1));
                rep.record(lo, hi, SLACK * (lo + hi));
            }
        }
    }));

    Ok(out)
}

const Q_LEMMA: [f64; 4] = [0.5, 0.7, 1.0, 2.0];

fn commutator(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    &(a * b) - &(b * a)
}

fn corner(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    let comp = &Mat::<c64>::identity(n, n) - b;
    &(b * a) * &comp
}

/// Random projection of rank in [1, dim − 1].
fn random_proper_projection(rng: &mut ChaCha8Rng, dim: usize) -> Mat<c64> {
    let rank = rng.random_range(1..dim);
    random_projection(rng, dim, rank)
}

/// Commutator bounds for a projection B. For Hermitian A and q ≤ 1 the
/// bound ‖[A,B]‖_q^q ≤ 2‖BA(1−B)‖_q^q is asserted; the factor-one form is
/// only recorded.
pub fn verify_commutator_lemma(dim: usize, trials: usize, seed: u64) -> Result<Vec<SchattenReport>> {
    check_dims(dim, trials)?;
    let mut out = Vec::new();

    out.push(run_trials(InequalityName::AdjointInvariance, dim, trials, seed, true, |rng, rep| {
        let a = random_complex(rng, dim, dim);
        let (s, sd) = (sv(&a), sv(&a.adjoint().to_owned()));
        for q in Q_LEMMA {
            let (x, y) = (s.norm(q), sd.norm(q));
            rep.record((x - y).abs() / x, 0.0, ADJOINT_TOL);
        }
    }));

    out.push(run_trials(InequalityName::CommutatorFactorTwo, dim, trials, seed, true, |rng, rep| {
        let a = hermitize(&random_complex(rng, dim, dim));
        let b = random_proper_projection(rng, dim);
        let (sc, sk) = (sv(&commutator(&a, &b)), sv(&corner(&a, &b)));
        for q in [0.5, 0.7, 1.0] {
            let (lhs, rhs) = (sc.norm_pow(q), 2.0 * sk.norm_pow(q));
            rep.record(lhs, rhs, SLACK * (lhs + rhs));
        }
    }));

    out.push(run_trials(InequalityName::CommutatorDisplayed, dim, trials, seed, false, |rng, rep| {
        let a = hermitize(&random_complex(rng, dim, dim));
        let b = random_proper_projection(rng, dim);
        let (sc, sk) = (sv(&commutator(&a, &b)), sv(&corner(&a, &b)));
        for q in [0.5, 0.7, 1.0] {
            let (lhs, rhs) = (sc.norm(q), sk.norm(q));
            rep.record(lhs, rhs, SLACK * (lhs + rhs));
        }
    }));

    out.push(run_trials(InequalityName::ProjectionCommutator, dim, trials, seed, true, |rng, rep| {
        let a = random_complex(rng, dim, dim);
        let b = random_proper_projection(rng, dim);
        let (sc, sk) = (sv(&commutator(&a, &b)), sv(&corner(&a, &b)));
        for q in Q_LEMMA {
            let (lhs, rhs) = (sk.norm(q), sc.norm(q));
            rep.record(lhs, rhs, SLACK * (lhs + rhs));
        }
    }));

    Ok(out)
}

/// Smooth cutoff equal to 1 on [−∞, 1/3] and 0 on [2/3, ∞].
pub fn partition_near_zero(t: f64) -> f64 {
    let bump = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let x = 3.0 * t - 1.0; // 0 at t = 1/3, 1 at t = 2/3
    let (up, down) = (bump(1.0 - x), bump(x));
    up / (up + down)
}

/// f(X) for Hermitian X via its eigendecomposition.
fn hermitian_function(x: &Mat<c64>, f: impl Fn(f64) -> f64) -> Result<Mat<c64>> {
    let eig = x.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let u = eig.U();
    let s = eig.S();
    let n = x.nrows();
    let fu = Mat::from_fn(n, n, |i, j| u[(i, j)] * f(s[j].re));
    Ok(&fu * u.adjoint())
}

/// ‖P f(PAP) P − P f(A) P‖_q / ‖PA(1−P)‖_{σq}^σ with f = η_κ·ψ, ψ a smooth
/// cutoff localizing at t₀ = 0.
pub fn check_szego_bound(a: MatRef<'_, c64>, p: MatRef<'_, c64>, order: RenyiOrder, q: f64, sigma: f64) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n || p.nrows() != n || p.ncols() != n {
        return Err(Error::invalid("A and P must be square of equal size"));
    }
    if !(q > 0.5 && q <= 1.0) {
        return Err(Error::invalid(format!("q must lie in (1/2, 1], got {q}")));
    }
    let gamma = probe_condition_f(order, 0.0, 200)?.gamma;
    let bound = (2.0 - 1.0 / q).min(gamma);
    if !(sigma > 0.0 && sigma < bound) {
        return Err(Error::invalid(format!("sigma must lie in (0, {bound}), got {sigma}")));
    }
    let a = a.to_owned();
    let p = p.to_owned();
    let spectrum = a.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    if spectrum.iter().any(|&x| !(-1e-10..=1.0 + 1e-10).contains(&x)) {
        return Err(Error::invalid("spectrum of A must lie in [0, 1]"));
    }
    let f = |t: f64| eta(order, t) * partition_near_zero(t);
    let pap = hermitize(&(&(&p * &a) * &p));
    let fa = hermitian_function(&hermitize(&a), f)?;
    let fpap = hermitian_function(&pap, f)?;
    let d = &(&(&p * &fpap) * &p) - &(&(&p * &fa) * &p);
    let numerator = schatten_norm(d.as_ref(), q)?;
    let off = corner(&a, &p);
    let denominator = schatten_norm(off.as_ref(), sigma * q)?.powf(sigma);
    if denominator < 1e-14 {
        return Err(Error::VacuousBound { numerator, denominator });
    }
    Ok(numerator / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn identity_and_rank_one() {
        let id = Mat::<c64>::identity(3, 3);
        assert_eq!(singular_values(id.as_ref()).unwrap().values, vec![1.0; 3]);
        let u = [2.0, 0.0, 0.0];
        let v = [0.0, 3.0 / 2f64.sqrt(), 3.0 / 2f64.sqrt()];
        let r1 = Mat::from_fn(3, 3, |i, j| c64::new(u[i] * v[j], 0.0));
        let s = singular_values(r1.as_ref()).unwrap();
        assert!((s.values[0] - 6.0).abs() < 1e-13);
        assert!(s.values[1].abs() < 1e-13 && s.values[2].abs() < 1e-13);
    }

    #[test]
    fn gram_matrix_oracle() {
        let a = random_complex(&mut rng(3), 8, 8);
        let gram = &a.adjoint().to_owned() * &a;
        let mut ev: Vec<f64> = gram.self_adjoint_eigenvalues(Side::Lower).unwrap().iter().map(|x| x.max(0.0).sqrt()).collect();
        ev.reverse();
        let s = singular_values(a.as_ref()).unwrap();
        for (x, y) in s.values.iter().zip(&ev) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn norms() {
        let id = Mat::<c64>::identity(5, 5);
        assert!((schatten_norm(id.as_ref(), 1.0).unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(schatten_norm(id.as_ref(), f64::INFINITY).unwrap(), 1.0);
        let a = random_complex(&mut rng(9), 6, 6);
        let s = singular_values(a.as_ref()).unwrap();
        let want = s.values.iter().map(|x| x.sqrt()).sum::<f64>().powi(2);
        assert!((schatten_norm(a.as_ref(), 0.5).unwrap() / want - 1.0).abs() < 1e-14);
        assert!(schatten_norm(a.as_ref(), 0.0).is_err());
        let mut bad = a.clone();
        bad[(0, 0)] = c64::new(f64::NAN, 0.0);
        assert!(matches!(singular_values(bad.as_ref()), Err(Error::NonFinite)));
    }

    #[test]
    fn unitary_invariance() {
        let mut r = rng(11);
        let a = random_complex(&mut r, 7, 7);
        let u = random_complex(&mut r, 7, 7).qr().compute_Q();
        let v = random_complex(&mut r, 7, 7).qr().compute_Q();
        let b = &(&u * &a) * &v;
        let (sa, sb) = (sv(&a), sv(&b));
        for (x, y) in sa.values.iter().zip(&sb.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn equality_case_of_sum_inequality() {
        let id = Mat::<c64>::identity(4, 4);
        let s = sv(&(&id + &id));
        assert_eq!(s.s(2), 2.0);
        assert!(s.s(2) <= sv(&id).s(1) + sv(&id).s(1));
    }

    #[test]
    fn all_inequalities_hold() {
        for dim in [4, 8] {
            for rep in verify_inequalities(dim, 50, 7).unwrap() {
                assert!(rep.passed, "{rep:?}");
            }
        }
        assert!(verify_inequalities(1, 5, 0).is_err());
        assert!(verify_inequalities(33, 5, 0).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = serde_json::to_string(&verify_inequalities(4, 20, 42).unwrap()).unwrap();
        let b = serde_json::to_string(&verify_inequalities(4, 20, 42).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn commutator_lemma() {
        let reps = verify_commutator_lemma(8, 50, 5).unwrap();
        for rep in &reps {
            match rep.inequality_name {
                InequalityName::CommutatorDisplayed => {
                    assert!(!rep.asserted);
                    // For Hermitian A the commutator has twice the q-th power mass.
                    assert!(!rep.passed);
                }
                _ => assert!(rep.passed, "{rep:?}"),
            }
        }
    }

    #[test]
    fn factor_two_is_an_identity_for_hermitian_a() {
        let mut r = rng(21);
        let a = hermitize(&random_complex(&mut r, 6, 6));
        let b = random_projection(&mut r, 6, 2);
        for q in [0.5, 1.0] {
            let lhs = sv(&commutator(&a, &b)).norm_pow(q);
            let rhs = sv(&corner(&a, &b)).norm_pow(q);
            assert!((lhs / (2.0 * rhs) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn lemma_edge_cases() {
        let mut r = rng(2);
        let a = random_complex(&mut r, 4, 4);
        let id = Mat::<c64>::identity(4, 4);
        assert!(sv(&commutator(&a, &id)).norm(1.0) < 1e-14);
        assert!(sv(&corner(&a, &id)).norm(1.0) < 1e-14);
        let b = Mat::from_fn(4, 4, |i, j| if i == 0 && j == 0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
        let (lhs, rhs) = (sv(&corner(&a, &b)).norm(1.0), sv(&commutator(&a, &b)).norm(1.0));
        assert!(lhs <= rhs + 1e-12);
        let adj = (sv(&a).norm(0.7) - sv(&a.adjoint().to_owned()).norm(0.7)).abs() / sv(&a).norm(0.7);
        assert!(adj < 1e-12);
    }

    #[test]
    fn partition_is_smooth_cutoff() {
        assert_eq!(partition_near_zero(0.1), 1.0);
        assert_eq!(partition_near_zero(0.9), 0.0);
        assert!((partition_near_zero(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = partition_near_zero(i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn szego_commuting_cases_are_vacuous() {
        let two = RenyiOrder::new(2.0).unwrap();
        let a = Mat::from_fn(2, 2, |i, j| if i == j { c64::new([0.2, 0.8][i], 0.0) } else { c64::new(0.0, 0.0) });
        let p = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
        match check_szego_bound(a.as_ref(), p.as_ref(), two, 0.8, 0.6) {
            Err(Error::VacuousBound { numerator, .. }) => assert!(numerator < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(check_szego_bound(a.as_ref(), p.as_ref(), two, 0.4, 0.1).is_err());
        assert!(check_szego_bound(a.as_ref(), p.as_ref(), two, 0.8, 0.9).is_err());
    }

    #[test]
    fn szego_ratio_is_stable() {
        let two = RenyiOrder::new(2.0).unwrap();
        let mut r = rng(1234);
        let mut ratios: Vec<f64> = (0..100)
            .map(|_| {
                let a = random_hermitian_unit(&mut r, 8);
                let p = random_projection(&mut r, 8, 4);
                check_szego_bound(a.as_ref(), p.as_ref(), two, 0.8, 0.6).unwrap()
            })
            .collect();
        ratios.sort_by(f64::total_cmp);
        let median = ratios[50];
        assert!(ratios.iter().all(|x| x.is_finite() && *x >= 0.0));
        assert!(ratios[99] < 10.0 * median, "max {} median {median}", ratios[99]);
    }
}
