//! Monte Carlo over disorder realizations.
//!
//! Each realization is diagonalized independently ([`process_realization`])
//! and the per-realization results are merged in index order ([`reduce`]),
//! so any parallel driver that preserves that order reproduces the
//! sequential answer bit for bit.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::{eigh_symmetric, EigenDecomposition};
use crate::model::{assemble_with_potential, build_simplex_hopping, sample_disorder, HoppingMatrix, ModelParams};
use crate::{math, Error, Result};

pub const DEFAULT_WINDOW_FACTOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWindow {
    pub center: f64,
    pub half_width: f64,
}

impl EnergyWindow {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !center.is_finite() || !(half_width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "energy window needs a finite centre and positive half-width, got ({center}, {half_width})"
            )));
        }
        Ok(Self { center, half_width })
    }

    /// `η = factor · w` around `center`, with `0 < factor ≤ 0.5`.
    pub fn from_factor(center: f64, w: f64, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "window_factor must lie in (0, 0.5], got {factor}"
            )));
        }
        Self::new(center, factor * w)
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    #[inline]
    pub fn contains(&self, energy: f64) -> bool {
        math::abs(energy - self.center) <= self.half_width
    }
}

fn moment_terms(state: &[f64], q: f64) -> (f64, f64) {
    let mut norm = 0.0;
    let mut acc = 0.0;
    let qi = q as i32;
    let integer = q == qi as f64;
    for &x in state {
        let p = x * x;
        norm += p;
        acc += if integer { math::powi(p, qi) } else { math::powf(p, q) };
    }
    (acc, norm)
}

/// `Σ_n |f(n)|^{2q}` for a unit vector.
pub fn ipr(state: &[f64], q: f64) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::Domain(format!("ipr needs q >= 1, got {q}")));
    }
    let (acc, norm) = moment_terms(state, q);
    if !(math::abs(math::sqrt(norm) - 1.0) <= 1e-10) {
        return Err(Error::InvalidInput(format!(
            "ipr needs a normalized state, got norm {}",
            math::sqrt(norm)
        )));
    }
    Ok(acc)
}

/// `Σ|f|^{2q} / (Σ|f|²)^q`: the moment of the normalized state, exactly 1
/// for `q = 1`.
pub fn ipr_ratio(state: &[f64], q: f64) -> f64 {
    let (acc, norm) = moment_terms(state, q);
    if q == 1.0 {
        acc / norm
    } else {
        acc / math::powf(norm, q)
    }
}

/// Eigenpairs with `|λ − center| ≤ half_width`, in ascending order.
pub fn select_states<'a>(decomp: &'a EigenDecomposition, window: &EnergyWindow) -> Vec<(f64, &'a [f64])> {
    decomp
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &l)| window.contains(l))
        .map(|(k, &l)| (l, decomp.eigenvector(k)))
        .collect()
}

/// Uniform binning aligned so that the energy window is exactly one bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub lo: f64,
    pub width: f64,
    pub bins: usize,
}

impl HistogramSpec {
    /// Bins of width `2η` covering at least `center ± reach`.
    pub fn aligned(window: &EnergyWindow, reach: f64) -> Result<Self> {
        let width = 2.0 * window.half_width;
        let side = math::ceil((reach - window.half_width).max(0.0) / width) as usize;
        let bins = 2 * side + 1;
        if bins > 1_000_000 {
            return Err(Error::InvalidInput(format!(
                "histogram would need {bins} bins; widen the window"
            )));
        }
        Ok(Self {
            lo: window.lo() - side as f64 * width,
            width,
            bins,
        })
    }

    fn bin_of(&self, x: f64) -> Option<usize> {
        let k = math::floor((x - self.lo) / self.width);
        (k >= 0.0 && (k as usize) < self.bins).then_some(k as usize)
    }

    fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|k| self.lo + k as f64 * self.width).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DosHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Every level seen, including those outside the binned range.
    pub total_levels: u64,
}

impl DosHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        0.5 * (self.bin_edges[k] + self.bin_edges[k + 1])
    }

    pub fn bin_width(&self, k: usize) -> f64 {
        self.bin_edges[k + 1] - self.bin_edges[k]
    }

    /// Density per level and unit energy, with its Poisson error.
    pub fn density(&self, k: usize) -> (f64, f64) {
        let norm = self.total_levels as f64 * self.bin_width(k);
        let c = self.counts[k] as f64;
        (c / norm, math::sqrt(c) / norm)
    }
}

/// `(levels in window) / (total_levels · 2η)` and its Poisson error.
///
/// The window has to coincide with a union of histogram bins.
pub fn estimate_dos0(hist: &DosHistogram, window: &EnergyWindow) -> Result<(f64, f64)> {
    let (lo, hi) = (window.lo(), window.hi());
    let tol = 1e-9 * (math::abs(lo) + math::abs(hi) + window.half_width);
    let first = hist.bin_edges.iter().position(|&e| math::abs(e - lo) <= tol);
    let last = hist.bin_edges.iter().position(|&e| math::abs(e - hi) <= tol);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::InvalidInput(format!(
            "window [{lo}, {hi}] is not aligned with the histogram bins"
        )));
    };
    let count: u64 = hist.counts[first..last].iter().sum();
    if count == 0 || hist.total_levels == 0 {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let norm = hist.total_levels as f64 * 2.0 * window.half_width;
    Ok((count as f64 / norm, math::sqrt(count as f64) / norm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub q: f64,
    pub w: f64,
    pub n: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub states_used: u64,
    pub realizations: u64,
    pub window: EnergyWindow,
}

/// Everything a run needs besides the realization indices.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsemblePlan {
    pub params: ModelParams,
    pub hopping: HoppingMatrix,
    pub realizations: u64,
    pub q_values: Vec<f64>,
    pub window: EnergyWindow,
    pub histogram: HistogramSpec,
}

impl EnsemblePlan {
    /// Simplex hopping, window `|E − params.energy| ≤ window_factor · w`.
    pub fn simplex(params: ModelParams, realizations: u64, q_values: &[f64], window_factor: f64) -> Result<Self> {
        let hopping = build_simplex_hopping(params.n)?;
        let window = EnergyWindow::from_factor(params.energy, params.w, window_factor)?;
        Self::new(params, hopping, realizations, q_values, window)
    }

    pub fn new(
        params: ModelParams,
        hopping: HoppingMatrix,
        realizations: u64,
        q_values: &[f64],
        window: EnergyWindow,
    ) -> Result<Self> {
        params.validate()?;
        if hopping.n() != params.n {
            return Err(Error::InvalidDimension(format!(
                "hopping matrix is {0}x{0} but n = {1}",
                hopping.n(),
                params.n
            )));
        }
        if realizations == 0 {
            return Err(Error::InvalidInput("need at least one realization".into()));
        }
        if q_values.is_empty() {
            return Err(Error::InvalidInput("need at least one moment order".into()));
        }
        if let Some(q) = q_values.iter().find(|q| !(**q >= 1.0 && q.is_finite())) {
            return Err(Error::Domain(format!("moment orders must be >= 1, got {q}")));
        }
        let max_hop = hopping.entries().max_abs() * params.n as f64;
        let reach = 6.0 * params.w + max_hop + math::abs(params.energy - window.center);
        let histogram = HistogramSpec::aligned(&window, reach)?;
        Ok(Self {
            params,
            hopping,
            realizations,
            q_values: q_values.to_vec(),
            window,
            histogram,
        })
    }
}

/// Output of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult {
    pub index: u64,
    /// `moments[j][k]`: moment `q_values[j]` of the `k`-th selected state.
    pub moments: Vec<Vec<f64>>,
    pub counts: Vec<u64>,
    pub levels: u64,
}

pub fn process_realization(plan: &EnsemblePlan, index: u64) -> Result<RealizationResult> {
    let disorder = sample_disorder(&plan.params, index)?;
    let h = assemble_with_potential(&plan.hopping, &disorder.values)?;
    let decomp = eigh_symmetric(&h)?;
    let mut counts = vec![0u64; plan.histogram.bins];
    for &l in decomp.eigenvalues() {
        if let Some(k) = plan.histogram.bin_of(l) {
            counts[k] += 1;
        }
    }
    let selected = select_states(&decomp, &plan.window);
    let moments = plan
        .q_values
        .iter()
        .map(|&q| selected.iter().map(|(_, v)| ipr_ratio(v, q)).collect())
        .collect();
    Ok(RealizationResult {
        index,
        moments,
        counts,
        levels: decomp.len() as u64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub moments: Vec<MomentEstimate>,
    pub dos: DosHistogram,
}

/// Merges per-realization results; they must arrive in index order
/// `0..plan.realizations`.
pub fn reduce<I>(plan: &EnsemblePlan, results: I) -> Result<EnsembleResult>
where
    I: IntoIterator<Item = RealizationResult>,
{
    let nq = plan.q_values.len();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); nq];
    let mut counts = vec![0u64; plan.histogram.bins];
    let mut total_levels = 0u64;
    let mut expected = 0u64;
    for r in results {
        if r.index != expected {
            return Err(Error::InvalidInput(format!(
                "realization {} arrived where {} was expected",
                r.index, expected
            )));
        }
        expected += 1;
        for (dst, src) in samples.iter_mut().zip(&r.moments) {
            dst.extend_from_slice(src);
        }
        for (c, x) in counts.iter_mut().zip(&r.counts) {
            *c += x;
        }
        total_levels += r.levels;
    }
    if expected != plan.realizations {
        return Err(Error::InvalidInput(format!(
            "expected {} realizations, got {expected}",
            plan.realizations
        )));
    }
    if samples[0].is_empty() {
        return Err(Error::EmptyWindow {
            lo: plan.window.lo(),
            hi: plan.window.hi(),
        });
    }
    let moments = plan
        .q_values
        .iter()
        .zip(&samples)
        .map(|(&q, xs)| {
            let (mean, se) = mean_and_error(xs);
            MomentEstimate {
                q,
                w: plan.params.w,
                n: plan.params.n,
                estimate: mean,
                std_error: se,
                states_used: xs.len() as u64,
                realizations: plan.realizations,
                window: plan.window,
            }
        })
        .collect();
    Ok(EnsembleResult {
        moments,
        dos: DosHistogram {
            bin_edges: plan.histogram.edges(),
            counts,
            total_levels,
        },
    })
}

/// Sample mean and `sd / √n` (two-pass).
fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, math::sqrt(ss / (n - 1.0)) / math::sqrt(n))
}

/// Sequential run of a plan.
pub fn run_plan(plan: &EnsemblePlan) -> Result<EnsembleResult> {
    let mut failure = None;
    let stream = (0..plan.realizations).map_while(|i| match process_realization(plan, i) {
        Ok(r) => Some(r),
        Err(e) => {
            failure = Some(e);
            None
        }
    });
    let out = reduce(plan, stream);
    match failure {
        Some(e) => Err(e),
        None => out,
    }
}

/// Simplex ensemble at `params`, sequentially.
pub fn run_ensemble(
    params: ModelParams,
    realizations: u64,
    q_values: &[f64],
    window_factor: f64,
) -> Result<EnsembleResult> {
    run_plan(&EnsemblePlan::simplex(params, realizations, q_values, window_factor)?)
}
