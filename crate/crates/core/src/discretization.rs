//! Nyström discretization of the truncated vacuum projector χ_Λ Π χ_Λ.
//!
//! The 2N×2N matrix has entries √(w_i w_j) K_ab(x_i − x_j) in component-major
//! order (row a·N + i). Because K(−u) is the complex conjugate of K(u), the
//! node reflection R: x ↦ (start + end) − x satisfies R M R = M̄ on a
//! symmetric grid, and Q = (1 + iR)/√2 turns M into the real symmetric matrix
//!
//!   C_ij = Re M_ij − Im M_{i,Rj},
//!
//! which has the same spectrum at roughly half the eigensolver cost. For m = 0
//! the two spin components decouple and M₂₂ = M̄₁₁, so only one N×N block is
//! diagonalized and its spectrum counted twice.

use std::f64::consts::PI;

use faer::{Mat, Side};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::{Kernel, KernelMethod, QuadratureSpec};
use crate::mat2::Mat2;
use crate::quadrature::{dyadic_breakpoints, GaussLegendre};
use crate::symbols::PhysicalParams;
use crate::{c64, Error, Result};

/// Eigenvalues outside [−TOL_DISC, 1 + TOL_DISC] are treated as discretization failure.
pub const TOL_DISC: f64 = 1e-6;
/// Largest accepted Hermitian correction during assembly.
pub const MAX_HERMITIZATION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    GaussLegendre,
    Midpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub rule: QuadratureRule,
    pub start: f64,
    pub end: f64,
}

impl Grid {
    /// n-node rule on (start, end); n = 1 is allowed here.
    pub fn on_interval(n: usize, start: f64, end: f64, rule: QuadratureRule) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("grid needs at least one node"));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::invalid(format!("bad grid interval ({start}, {end})")));
        }
        let len = end - start;
        let (nodes, weights) = match rule {
            QuadratureRule::GaussLegendre => {
                let gl = GaussLegendre::cached(n);
                gl.mapped(start, end).unzip()
            }
            QuadratureRule::Midpoint => {
                let h = len / n as f64;
                ((0..n).map(|i| start + (i as f64 + 0.5) * h).collect(), vec![h; n])
            }
        };
        Ok(Grid { nodes, weights, rule, start, end })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// Whether node i and node N−1−i are mirror images with equal weights.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.len();
        let centre2 = self.start + self.end;
        let scale = self.start.abs().max(self.end.abs()).max(self.length());
        (0..n).all(|i| {
            let j = n - 1 - i;
            (self.nodes[i] + self.nodes[j] - centre2).abs() <= 1e-12 * scale
                && (self.weights[i] - self.weights[j]).abs() <= 1e-12 * self.weights[i]
        })
    }
}

/// n-node grid on (0, λ); n ≥ 2.
pub fn build_grid(n: usize, lambda: f64, rule: QuadratureRule) -> Result<Grid> {
    if n < 2 {
        return Err(Error::invalid(format!("grid size must be >= 2, got {n}")));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
    }
    Grid::on_interval(n, 0.0, lambda, rule)
}

#[derive(Debug, Clone)]
enum Storage {
    /// Real symmetric form; every eigenvalue counted `multiplicity` times.
    Reduced { matrix: Mat<f64>, multiplicity: usize },
    Dense(Mat<c64>),
}

/// Hermitian Nyström matrix of χ_Λ Π χ_Λ.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub grid: Grid,
    pub params: PhysicalParams,
    pub spec: QuadratureSpec,
    kernel: Kernel,
    /// Largest entry change made when symmetrizing.
    pub hermitization_correction: f64,
    storage: Storage,
}

/// Assembles with the automatically chosen kernel and the real-reduced form
/// when the grid is mirror symmetric.
pub fn assemble_operator(params: &PhysicalParams, grid: &Grid, spec: &QuadratureSpec) -> Result<DiscretizedOperator> {
    assemble_with(params, grid, spec, KernelMethod::Auto, false)
}

/// Assembles the full 2N×2N complex matrix.
pub fn assemble_operator_dense(
    params: &PhysicalParams,
    grid: &Grid,
    spec: &QuadratureSpec,
    method: KernelMethod,
) -> Result<DiscretizedOperator> {
    assemble_with(params, grid, spec, method, true)
}

pub fn assemble_with(
    params: &PhysicalParams,
    grid: &Grid,
    spec: &QuadratureSpec,
    method: KernelMethod,
    force_dense: bool,
) -> Result<DiscretizedOperator> {
    params.validate()?;
    if grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    let kernel = Kernel::new(params, spec, method)?;
    let reduced = !force_dense && grid.is_mirror_symmetric();
    let (storage, correction) = if reduced {
        let blocks = if params.mass == 0.0 { 1 } else { 2 };
        let (matrix, corr) = assemble_reduced(&kernel, grid, blocks)?;
        (Storage::Reduced { matrix, multiplicity: 3 - blocks }, corr)
    } else {
        let (matrix, corr) = assemble_dense(&kernel, grid)?;
        (Storage::Dense(matrix), corr)
    };
    if !(correction <= MAX_HERMITIZATION) {
        return Err(Error::HermitizationTooLarge(correction));
    }
    Ok(DiscretizedOperator {
        grid: grid.clone(),
        params: *params,
        spec: *spec,
        kernel,
        hermitization_correction: correction,
        storage,
    })
}

/// Runs `f` on every column, in parallel with the `parallel` feature.
fn for_each_column<T, F>(m: &mut Mat<T>, f: F) -> Result<()>
where
    T: Send + Sync,
    F: Fn(usize, faer::ColMut<'_, T>) -> Result<()> + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return m.par_col_iter_mut().enumerate().try_for_each(|(j, col)| f(j, col));
    #[cfg(not(feature = "parallel"))]
    m.col_iter_mut().enumerate().try_for_each(|(j, col)| f(j, col))
}

/// Kernel values K(x_i − x_j) for all i at fixed j.
fn kernel_column(kernel: &Kernel, nodes: &[f64], xj: f64) -> Result<Vec<Mat2>> {
    nodes.iter().map(|&xi| kernel.eval(xi - xj)).collect()
}

fn assemble_reduced(kernel: &Kernel, grid: &Grid, blocks: usize) -> Result<(Mat<f64>, f64)> {
    let n = grid.len();
    let dim = blocks * n;
    let sqw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut c = Mat::<f64>::zeros(dim, dim);
    for_each_column(&mut c, |col, mut out| -> Result<()> {
        let (b, j) = (col / n, col % n);
        let direct = kernel_column(kernel, &grid.nodes, grid.nodes[j])?;
        let mirrored = kernel_column(kernel, &grid.nodes, grid.nodes[n - 1 - j])?;
        for a in 0..blocks {
            for i in 0..n {
                let v = direct[i].get(a, b).re - mirrored[i].get(a, b).im;
                let v = sqw[i] * sqw[j] * v;
                if !v.is_finite() {
                    return Err(Error::NonFinite);
                }
                out[a * n + i] = v;
            }
        }
        Ok(())
    })?;
    let mut corr: f64 = 0.0;
    for j in 0..dim {
        for i in (j + 1)..dim {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            corr = corr.max((c[(i, j)] - avg).abs());
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    Ok((c, corr))
}

fn assemble_dense(kernel: &Kernel, grid: &Grid) -> Result<(Mat<c64>, f64)> {
    let n = grid.len();
    let dim = 2 * n;
    let sqw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut m = Mat::<c64>::zeros(dim, dim);
    for_each_column(&mut m, |col, mut out| -> Result<()> {
        let (b, j) = (col / n, col % n);
        let column = kernel_column(kernel, &grid.nodes, grid.nodes[j])?;
        for a in 0..2 {
            for i in 0..n {
                let v = column[i].get(a, b) * (sqw[i] * sqw[j]);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite);
                }
                out[a * n + i] = v;
            }
        }
        Ok(())
    })?;
    let mut corr: f64 = 0.0;
    for j in 0..dim {
        let d = m[(j, j)];
        corr = corr.max(d.im.abs());
        m[(j, j)] = c64::new(d.re, 0.0);
        for i in (j + 1)..dim {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            corr = corr.max((m[(i, j)] - avg).norm());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    Ok((m, corr))
}

impl DiscretizedOperator {
    /// Number of eigenvalues, 2N.
    pub fn dim(&self) -> usize {
        2 * self.grid.len()
    }

    pub fn kernel_method(&self) -> KernelMethod {
        self.kernel.method()
    }

    /// Whether the real-reduced form is in use.
    pub fn is_reduced(&self) -> bool {
        matches!(self.storage, Storage::Reduced { .. })
    }

    /// All 2N eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut ev = match &self.storage {
            Storage::Reduced { matrix, multiplicity } => {
                let ev = matrix
                    .self_adjoint_eigenvalues(Side::Lower)
                    .map_err(|e| Error::Linalg(format!("{e:?}")))?;
                ev.iter().flat_map(|&x| std::iter::repeat_n(x, *multiplicity)).collect::<Vec<_>>()
            }
            Storage::Dense(m) => m
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Linalg(format!("{e:?}")))?,
        };
        if ev.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Eigenvalues, rejecting any outside [−tol, 1 + tol].
    pub fn checked_eigenvalues(&self, tol: f64) -> Result<Vec<f64>> {
        let ev = self.eigenvalues()?;
        check_spectrum(&ev, tol)?;
        Ok(ev)
    }

    /// The full complex Hermitian matrix, re-evaluated from the kernel.
    pub fn to_dense(&self) -> Result<Mat<c64>> {
        match &self.storage {
            Storage::Dense(m) => Ok(m.clone()),
            Storage::Reduced { .. } => Ok(assemble_dense(&self.kernel, &self.grid)?.0),
        }
    }
}

pub fn check_spectrum(eigenvalues: &[f64], tol: f64) -> Result<()> {
    match eigenvalues.iter().find(|&&x| x < -tol || x > 1.0 + tol) {
        Some(&eigenvalue) => Err(Error::SpectrumOutOfRange { eigenvalue, tol }),
        None => Ok(()),
    }
}

/// Real scalar symbol a(k) of a translation-invariant operator Op₁(a), with
/// its convolution kernel (1/2π) ∫ a(k) e^{iku} dk away from u = 0.
pub trait ScalarSymbol: Sync {
    fn value(&self, k: f64) -> f64;
    fn kernel(&self, u: f64) -> Result<c64>;
}

/// a(k) = c. Its kernel is c·δ(u), which vanishes off the diagonal.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSymbol(pub f64);

impl ScalarSymbol for ConstantSymbol {
    fn value(&self, _k: f64) -> f64 {
        self.0
    }
    fn kernel(&self, _u: f64) -> Result<c64> {
        Ok(c64::new(0.0, 0.0))
    }
}

/// a(k) = e^{−s·ω(k)}, ω(k) = √(k² + m²).
#[derive(Debug, Clone, Copy)]
pub struct ExpDampedSymbol {
    pub scale: f64,
    pub mass: f64,
}

impl ScalarSymbol for ExpDampedSymbol {
    fn value(&self, k: f64) -> f64 {
        (-self.scale * k.hypot(self.mass)).exp()
    }
    fn kernel(&self, u: f64) -> Result<c64> {
        let s = self.scale;
        let r2 = s * s + u * u;
        let v = if self.mass == 0.0 {
            s / (PI * r2)
        } else {
            let r = r2.sqrt();
            let (_, k1) = crate::bessel::bessel_k01(self.mass * r)?;
            self.mass * s * k1 / (PI * r)
        };
        Ok(c64::new(v, 0.0))
    }
}

/// Arbitrary real symbol supported (up to negligible tails) in [−k_max, k_max];
/// its kernel is computed by oscillatory quadrature.
pub struct QuadratureSymbol<F: Fn(f64) -> f64 + Sync> {
    pub symbol: F,
    pub k_max: f64,
}

impl<F: Fn(f64) -> f64 + Sync> ScalarSymbol for QuadratureSymbol<F> {
    fn value(&self, k: f64) -> f64 {
        (self.symbol)(k)
    }
    fn kernel(&self, u: f64) -> Result<c64> {
        let mut h = self.k_max / 64.0;
        if u != 0.0 {
            h = h.min(PI / u.abs());
        }
        let panels = (2.0 * self.k_max / h).ceil() as usize;
        if panels > 1_000_000 {
            return Err(Error::PanelBudget { required: panels, budget: 1_000_000 });
        }
        let width = 2.0 * self.k_max / panels as f64;
        let rule = GaussLegendre::cached(16);
        let mut acc = c64::new(0.0, 0.0);
        for p in 0..panels {
            let a = -self.k_max + p as f64 * width;
            for (k, w) in rule.mapped(a, a + width) {
                acc += c64::new(0.0, k * u).exp() * ((self.symbol)(k) * w);
            }
        }
        Ok(acc / (2.0 * PI))
    }
}

/// Nodes per Gauss–Legendre panel of the graded truncation grid.
const PANEL_NODES: usize = 16;

/// Graded quadrature on [0, len] with the finest panel of width about `h` at 0.
fn graded_segment(len: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
    let levels = (len / h).log2().ceil().max(0.0) as usize;
    let pts = dyadic_breakpoints(len, levels);
    let rule = GaussLegendre::cached(PANEL_NODES);
    pts.windows(2).flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>()).unzip()
}

fn graded_panel_count(lengths: &[f64], h: f64) -> usize {
    lengths.iter().map(|&l| (l / h).log2().ceil().max(0.0) as usize + 1).sum()
}

/// Nyström block of χ_I Op₁(a) χ_{[−L, λ+L] \ I}, I = (0, λ).
#[derive(Debug, Clone)]
pub struct OffDiagonalTruncation {
    /// Rows: nodes in I; columns: nodes in the box outside I.
    pub matrix: Mat<c64>,
    pub inside_nodes: Vec<f64>,
    pub outside_nodes: Vec<f64>,
    /// Finest panel width next to the interval ends.
    pub finest_panel: f64,
    /// Estimated squared Hilbert–Schmidt mass beyond the box, relative to the total.
    pub tail_fraction: f64,
}

/// Relative kernel mass beyond the box that is tolerated.
pub const MAX_TAIL_FRACTION: f64 = 1e-6;

/// Builds the truncation on a grid graded dyadically toward 0 and λ from both
/// sides, using at most `n` nodes in total (16-node panels).
pub fn assemble_offdiagonal_truncation<S: ScalarSymbol + ?Sized>(
    symbol: &S,
    lambda: f64,
    box_half_width: f64,
    n: usize,
) -> Result<OffDiagonalTruncation> {
    assemble_offdiagonal_truncation_with(symbol, lambda, box_half_width, n, MAX_TAIL_FRACTION)
}

/// As [`assemble_offdiagonal_truncation`] with a caller-chosen tail tolerance.
pub fn assemble_offdiagonal_truncation_with<S: ScalarSymbol + ?Sized>(
    symbol: &S,
    lambda: f64,
    box_half_width: f64,
    n: usize,
    max_tail_fraction: f64,
) -> Result<OffDiagonalTruncation> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
    }
    if !(box_half_width.is_finite() && box_half_width > 0.0) {
        return Err(Error::invalid(format!("box half-width must be > 0, got {box_half_width}")));
    }
    let budget = n / PANEL_NODES;
    let lengths = [0.5 * lambda, 0.5 * lambda, box_half_width, box_half_width];
    if budget < lengths.len() {
        return Err(Error::invalid(format!("n = {n} is too small for a graded grid")));
    }
    // Largest finest-panel refinement that fits the budget.
    let mut h = 0.5 * lambda.min(box_half_width);
    while graded_panel_count(&lengths, 0.5 * h) <= budget && h > 1e-300 {
        h *= 0.5;
    }

    let (near0, w0) = graded_segment(0.5 * lambda, h);
    let (nearl, wl) = graded_segment(0.5 * lambda, h);
    let (left, wleft) = graded_segment(box_half_width, h);
    let (right, wright) = graded_segment(box_half_width, h);

    let mut inside: Vec<(f64, f64)> = near0.iter().copied().zip(w0).collect();
    inside.extend(nearl.iter().map(|&t| lambda - t).zip(wl));
    inside.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut outside: Vec<(f64, f64)> = left.iter().map(|&t| -t).zip(wleft).collect();
    outside.extend(right.iter().map(|&t| lambda + t).zip(wright));
    outside.sort_by(|a, b| a.0.total_cmp(&b.0));

    let rows = inside.len();
    let cols = outside.len();
    let mut matrix = Mat::<c64>::zeros(rows, cols);
    for_each_column(&mut matrix, |j, mut out| -> Result<()> {
        let (y, wy) = outside[j];
        for (i, &(x, wx)) in inside.iter().enumerate() {
            let v = symbol.kernel(x - y)? * (wx * wy).sqrt();
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            out[i] = v;
        }
        Ok(())
    })?;

    let inside_mass: f64 = (0..cols)
        .map(|j| (0..rows).map(|i| matrix[(i, j)].norm_sqr()).sum::<f64>())
        .sum();
    let tail = lambda * (kernel_tail_mass(symbol, box_half_width, 1.0)? + kernel_tail_mass(symbol, box_half_width, -1.0)?);
    let total = inside_mass + tail;
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
    if tail_fraction > max_tail_fraction {
        return Err(Error::KernelTail(tail_fraction));
    }
    Ok(OffDiagonalTruncation {
        matrix,
        inside_nodes: inside.into_iter().map(|p| p.0).collect(),
        outside_nodes: outside.into_iter().map(|p| p.0).collect(),
        finest_panel: h,
        tail_fraction,
    })
}

/// ∫_L^∞ |K(σu)|² du via u = L/t, on panels graded toward t = 0.
fn kernel_tail_mass<S: ScalarSymbol + ?Sized>(symbol: &S, l: f64, sigma: f64) -> Result<f64> {
    let rule = GaussLegendre::cached(PANEL_NODES);
    let mut acc = 0.0;
    for w in dyadic_breakpoints(1.0, 40).windows(2) {
        for (t, wt) in rule.mapped(w[0], w[1]) {
            let u = l / t;
            acc += wt * symbol.kernel(sigma * u)?.norm_sqr() * l / (t * t);
        }
    }
    Ok(acc)
}
