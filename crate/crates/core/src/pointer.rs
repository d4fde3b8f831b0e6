//! Von Neumann measurement with a discretized Gaussian pointer.
//!
//! The system couples to the pointer through `exp(−i·g·A⊗p)`: the pointer
//! wavefunction of each eigenspace of `A` is translated by `g·λ`. After
//! postselection the pointer mean sits near `g·Re(A_w)` and the momentum mean
//! near `g·Im(A_w)/(2σ²)` for small `g`.
//!
//! Pointer amplitudes are stored with unit discrete norm (`Σ|ψ_j|² = 1`), so
//! quadrature weights are implicit.

use std::sync::Arc;

use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{c64, CMatrix, Complex64, HilbertLayout, LinearOperator, QuantumState};
use crate::rng;

pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_G: f64 = 0.01;
pub const DEFAULT_POINTS: usize = 1024;
pub const DEFAULT_HALF_WIDTH: f64 = 8.0;

pub const MIN_POINTS: usize = 64;
/// Eigenvalues this close to an integer are snapped to it.
pub const EIGEN_SNAP: f64 = 1e-9;
const MIN_SUCCESS_PROBABILITY: f64 = 1e-14;
const GAUSSIAN_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerGrid {
    half_width: f64,
    points: usize,
    sigma: f64,
}

impl Default for PointerGrid {
    fn default() -> Self {
        Self {
            half_width: DEFAULT_HALF_WIDTH,
            points: DEFAULT_POINTS,
            sigma: DEFAULT_SIGMA,
        }
    }
}

impl PointerGrid {
    pub fn new(half_width: f64, points: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::GridTooCoarse(format!("sigma must be positive, got {sigma}")));
        }
        if points < MIN_POINTS {
            return Err(Error::GridTooCoarse(format!(
                "{points} points, need at least {MIN_POINTS}"
            )));
        }
        if half_width.is_nan() || half_width < 6.0 * sigma {
            return Err(Error::GridTooCoarse(format!(
                "half-width {half_width} < 6·sigma = {}",
                6.0 * sigma
            )));
        }
        let grid = Self {
            half_width,
            points,
            sigma,
        };
        // Continuum-normalized Gaussian sampled on the grid must carry unit mass.
        let dx = grid.spacing();
        let mass: f64 = grid
            .positions()
            .map(|x| gaussian_density(x, sigma) * dx)
            .sum();
        if (mass - 1.0).abs() > GAUSSIAN_NORM_TOL {
            return Err(Error::GridTooCoarse(format!(
                "sampled Gaussian mass {mass} deviates from 1 by more than {GAUSSIAN_NORM_TOL:e}"
            )));
        }
        Ok(grid)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        let dx = self.spacing();
        (0..self.points).map(move |j| -self.half_width + j as f64 * dx)
    }

    /// Angular wavenumbers in FFT order; `None` marks the Nyquist bin.
    fn wavenumbers(&self) -> Vec<Option<f64>> {
        let n = self.points;
        let scale = 2.0 * std::f64::consts::PI / (n as f64 * self.spacing());
        (0..n)
            .map(|m| {
                if n.is_multiple_of(2) && m == n / 2 {
                    None
                } else if m < n.div_ceil(2) {
                    Some(m as f64 * scale)
                } else {
                    Some((m as f64 - n as f64) * scale)
                }
            })
            .collect()
    }

    /// Initial pointer: Gaussian with position variance `sigma²`, centered at 0.
    pub fn gaussian(&self) -> PointerWavefunction {
        let amps: Vec<Complex64> = self
            .positions()
            .map(|x| c64(gaussian_density(x, self.sigma).sqrt(), 0.0))
            .collect();
        PointerWavefunction::normalized(*self, amps)
    }
}

fn gaussian_density(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt()
}

struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(points: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        }
    }

    /// Applies `f(k)` in Fourier space; `nyquist` is used for the Nyquist bin.
    fn filter(
        &self,
        data: &mut [Complex64],
        ks: &[Option<f64>],
        f: impl Fn(f64) -> Complex64,
        nyquist: Complex64,
    ) {
        self.forward.process(data);
        let n = data.len() as f64;
        for (z, k) in data.iter_mut().zip(ks) {
            *z *= match k {
                Some(k) => f(*k),
                None => nyquist,
            } / n;
        }
        self.inverse.process(data);
    }
}

/// Band-limited translation `ψ(x) → ψ(x − shift)`.
fn translate(spectral: &Spectral, ks: &[Option<f64>], kn: f64, data: &mut [Complex64], shift: f64) {
    if shift == 0.0 {
        return;
    }
    spectral.filter(
        data,
        ks,
        |k| Complex64::from_polar(1.0, -k * shift),
        c64((kn * shift).cos(), 0.0),
    );
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointerWavefunction {
    grid: PointerGrid,
    amplitudes: Vec<Complex64>,
}

impl PointerWavefunction {
    fn normalized(grid: PointerGrid, mut amplitudes: Vec<Complex64>) -> Self {
        let n = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if n > 0.0 {
            amplitudes.iter_mut().for_each(|a| *a /= n);
        }
        Self { grid, amplitudes }
    }

    pub fn new(grid: PointerGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.points {
            return Err(Error::DimensionMismatch {
                expected: grid.points,
                found: amplitudes.len(),
            });
        }
        Ok(Self::normalized(grid, amplitudes))
    }

    pub fn grid(&self) -> &PointerGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }
}

/// Joint system ⊗ pointer amplitudes, system index major.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterState {
    system_layout: HilbertLayout,
    grid: PointerGrid,
    joint: Vec<Complex64>,
    coupling: f64,
}

impl MeterState {
    pub fn system_layout(&self) -> &HilbertLayout {
        &self.system_layout
    }

    pub fn grid(&self) -> &PointerGrid {
        &self.grid
    }

    /// Total coupling applied so far.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn joint_amplitudes(&self) -> &[Complex64] {
        &self.joint
    }

    pub fn norm_sqr(&self) -> f64 {
        self.joint.iter().map(Complex64::norm_sqr).sum()
    }

    fn row(&self, s: usize) -> &[Complex64] {
        let n = self.grid.points;
        &self.joint[s * n..(s + 1) * n]
    }

    /// Reduced density matrix of the system after tracing out the pointer.
    pub fn system_marginal(&self) -> CMatrix {
        let dim = self.system_layout.dim();
        CMatrix::from_fn(dim, dim, |a, b| {
            self.row(a)
                .iter()
                .zip(self.row(b))
                .map(|(x, y)| x * y.conj())
                .sum()
        })
    }

    /// Pointer marginal density on the grid.
    pub fn pointer_marginal(&self) -> Vec<f64> {
        let dim = self.system_layout.dim();
        (0..self.grid.points)
            .map(|j| (0..dim).map(|s| self.row(s)[j].norm_sqr()).sum())
            .collect()
    }
}

/// `s ⊗ Gaussian`.
pub fn attach_pointer(s: &QuantumState, grid: &PointerGrid) -> Result<MeterState> {
    s.ensure_normalized()?;
    let grid = PointerGrid::new(grid.half_width, grid.points, grid.sigma)?;
    let g = grid.gaussian();
    let mut joint = Vec::with_capacity(s.dim() * grid.points);
    for a in s.amplitudes() {
        joint.extend(g.amplitudes.iter().map(|p| a * p));
    }
    let norm = joint.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    joint.iter_mut().for_each(|z| *z /= norm);
    Ok(MeterState {
        system_layout: s.layout().clone(),
        grid,
        joint,
        coupling: 0.0,
    })
}

/// Applies `exp(−i·g·A⊗p)` for Hermitian `A`.
pub fn weak_couple(m: &MeterState, a: &LinearOperator, g: f64) -> Result<MeterState> {
    if a.layout() != &m.system_layout {
        return Err(Error::LayoutMismatch(format!(
            "observable over {:?}, meter system over {:?}",
            a.layout(),
            m.system_layout
        )));
    }
    let components = a.spectral_decomposition(EIGEN_SNAP)?;
    if g == 0.0 {
        return Ok(m.clone());
    }
    let max_shift = components
        .iter()
        .map(|c| (g * c.eigenvalue).abs())
        .fold(0.0, f64::max);
    if max_shift > m.grid.half_width / 2.0 {
        return Err(Error::ShiftExceedsGrid {
            shift: max_shift,
            half_width: m.grid.half_width,
        });
    }

    let dim = m.system_layout.dim();
    let n = m.grid.points;
    let spectral = Spectral::new(n);
    let ks = m.grid.wavenumbers();
    let kn = std::f64::consts::PI / m.grid.spacing();
    let mut out = vec![c64(0.0, 0.0); dim * n];
    for comp in &components {
        let shift = g * comp.eigenvalue;
        let mut shifted = m.joint.clone();
        for row in shifted.chunks_mut(n) {
            translate(&spectral, &ks, kn, row, shift);
        }
        for s in 0..dim {
            for t in 0..dim {
                let p = comp.projector[(s, t)];
                if p.norm() == 0.0 {
                    continue;
                }
                let src = &shifted[t * n..(t + 1) * n];
                for (o, x) in out[s * n..(s + 1) * n].iter_mut().zip(src) {
                    *o += p * x;
                }
            }
        }
    }
    Ok(MeterState {
        system_layout: m.system_layout.clone(),
        grid: m.grid,
        joint: out,
        coupling: m.coupling + g,
    })
}

/// Postselected pointer and the probability of the postselection.
#[derive(Debug, Clone, PartialEq)]
pub struct Postselected {
    pub wavefunction: PointerWavefunction,
    pub success_probability: f64,
}

/// Contracts the system against `post` and renormalizes the pointer.
pub fn postselect_pointer(m: &MeterState, post: &QuantumState) -> Result<Postselected> {
    post.ensure_normalized()?;
    if post.layout() != &m.system_layout {
        return Err(Error::LayoutMismatch(format!(
            "postselection over {:?}, meter system over {:?}",
            post.layout(),
            m.system_layout
        )));
    }
    let n = m.grid.points;
    let mut w = vec![c64(0.0, 0.0); n];
    for (s, f) in post.amplitudes().iter().enumerate() {
        let fc = f.conj();
        if fc.norm() == 0.0 {
            continue;
        }
        for (o, x) in w.iter_mut().zip(m.row(s)) {
            *o += fc * x;
        }
    }
    let probability: f64 = w.iter().map(Complex64::norm_sqr).sum();
    if probability < MIN_SUCCESS_PROBABILITY {
        return Err(Error::PostselectionImpossible { probability });
    }
    Ok(Postselected {
        wavefunction: PointerWavefunction::normalized(m.grid, w),
        success_probability: probability,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointerStatistics {
    pub mean: f64,
    pub variance: f64,
    pub momentum_mean: f64,
}

/// Position moments by quadrature; momentum mean by spectral differentiation.
pub fn pointer_statistics(w: &PointerWavefunction) -> PointerStatistics {
    let norm = w.norm_sqr();
    let xs: Vec<f64> = w.grid.positions().collect();
    let mean = xs
        .iter()
        .zip(&w.amplitudes)
        .map(|(x, a)| x * a.norm_sqr())
        .sum::<f64>()
        / norm;
    let variance = xs
        .iter()
        .zip(&w.amplitudes)
        .map(|(x, a)| (x - mean).powi(2) * a.norm_sqr())
        .sum::<f64>()
        / norm;

    let spectral = Spectral::new(w.grid.points);
    let ks = w.grid.wavenumbers();
    let mut d = w.amplitudes.clone();
    spectral.filter(&mut d, &ks, |k| c64(0.0, k), c64(0.0, 0.0));
    // ⟨p⟩ = Σ ψ* (−i ∂ψ)
    let momentum_mean = w
        .amplitudes
        .iter()
        .zip(&d)
        .map(|(a, da)| (a.conj() * c64(0.0, -1.0) * da).re)
        .sum::<f64>()
        / norm;

    PointerStatistics {
        mean,
        variance,
        momentum_mean,
    }
}

/// Inverse-CDF sampler over `|ψ|²` with linear interpolation inside cells.
#[derive(Debug, Clone)]
pub struct ReadingSampler {
    origin: f64,
    dx: f64,
    cell_mass: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ReadingSampler {
    pub fn new(w: &PointerWavefunction) -> Self {
        let density: Vec<f64> = w.amplitudes.iter().map(Complex64::norm_sqr).collect();
        let cell_mass: Vec<f64> = density.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let mut acc = 0.0;
        let cumulative = cell_mass
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Self {
            origin: -w.grid.half_width,
            dx: w.grid.spacing(),
            cell_mass,
            cumulative,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cumulative.last().expect("grid has cells");
        let u = rng.random::<f64>() * total;
        let j = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.cell_mass.len() - 1);
        let below = if j == 0 { 0.0 } else { self.cumulative[j - 1] };
        let frac = if self.cell_mass[j] > 0.0 {
            ((u - below) / self.cell_mass[j]).clamp(0.0, 1.0)
        } else {
            0.5
        };
        self.origin + (j as f64 + frac) * self.dx
    }
}

/// `n` independent pointer readings drawn from `|w(x)|²`.
pub fn sample_readings(w: &PointerWavefunction, n: usize, seed: u64) -> Vec<f64> {
    let sampler = ReadingSampler::new(w);
    let mut r = rng::seeded(seed);
    (0..n).map(|_| sampler.sample(&mut r)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakValueEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// `mean/g` with standard error `std/(g·√n)`.
pub fn estimate_weak_value(samples: &[f64], g: f64) -> Result<WeakValueEstimate> {
    if g.is_nan() || g <= 0.0 {
        return Err(Error::ZeroCoupling);
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(WeakValueEstimate {
        estimate: mean / g,
        std_error: var.sqrt() / (g * n.sqrt()),
    })
}

/// Result of one couple → postselect run for a single observable.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerRun {
    pub coupling: f64,
    pub postselected: Postselected,
    pub statistics: PointerStatistics,
}

impl PointerRun {
    /// `mean/g`, the real part of the weak value in the weak limit.
    pub fn estimate_re(&self) -> f64 {
        self.statistics.mean / self.coupling
    }

    /// `⟨p⟩·2σ²/g`, the imaginary part in the weak limit.
    pub fn estimate_im(&self) -> f64 {
        let s = self.postselected.wavefunction.grid.sigma;
        self.statistics.momentum_mean * 2.0 * s * s / self.coupling
    }
}

/// Full pipeline: attach → couple → postselect → statistics.
pub fn pointer_run(
    pre: &QuantumState,
    post: &QuantumState,
    a: &LinearOperator,
    g: f64,
    grid: &PointerGrid,
) -> Result<PointerRun> {
    if g.is_nan() || g <= 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let meter = weak_couple(&attach_pointer(pre, grid)?, a, g)?;
    let postselected = postselect_pointer(&meter, post)?;
    let statistics = pointer_statistics(&postselected.wavefunction);
    Ok(PointerRun {
        coupling: g,
        postselected,
        statistics,
    })
}

/// Simulated trials: each passes postselection with the run's success
/// probability; passing trials yield one pointer reading.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trials: usize,
    pub readings: Vec<f64>,
}

impl TrialOutcome {
    pub fn accepted(&self) -> usize {
        self.readings.len()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.readings.len() as f64 / self.trials as f64
    }
}

pub fn simulate_trials<R: Rng + ?Sized>(
    postselected: &Postselected,
    trials: usize,
    rng: &mut R,
) -> TrialOutcome {
    let sampler = ReadingSampler::new(&postselected.wavefunction);
    let p = postselected.success_probability;
    let mut readings = Vec::new();
    for _ in 0..trials {
        if rng.random::<f64>() < p {
            readings.push(sampler.sample(rng));
        }
    }
    TrialOutcome { trials, readings }
}
