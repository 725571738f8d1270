//! Deterministic adaptive quadrature.
//!
//! The workhorse is a globally adaptive Gauss-Kronrod 7/15 scheme: the
//! interval with the largest `|K15 - G7|` is bisected until the summed
//! error meets `max(abs, rel * |value|)` or the evaluation budget runs out.
//! Ties in the priority queue go to the leftmost interval, so identical
//! calls produce bitwise-identical results.
//!
//! Infinite ranges use `x = x0 + t / (1 - t²)`. Callers pass breakpoints
//! (`points`) wherever the integrand has a kink, e.g. at `0` for `|z|`.
//!
//! Nested integrals propagate the inner error estimates: every node may
//! carry an uncertainty that is integrated with the Kronrod weights and
//! added to the interval's own error.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::math;
use crate::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub const DEFAULT_MAX_EVALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_evals: u64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self {
            rel,
            abs,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }

    pub fn with_budget(mut self, max_evals: u64) -> Self {
        self.max_evals = max_evals;
        self
    }

    /// Tolerance handed to inner integrals of a nested scheme.
    pub fn tightened(self, factor: f64) -> Self {
        Self {
            rel: self.rel / factor,
            abs: self.abs / factor,
            max_evals: self.max_evals,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel > 0.0 && self.abs > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerances must be positive (rel = {}, abs = {})",
                self.rel, self.abs
            )));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * math::abs(value))
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-10, 1e-13)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
}

impl QuadratureResult {
    /// Turns a non-converged result into [`Error::Quadrature`].
    pub fn require_converged(self, context: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Quadrature {
                context: context.into(),
                value: self.value,
                error_estimate: self.error_estimate,
                evaluations: self.evaluations,
            })
        }
    }
}

#[derive(Clone, Copy)]
enum Map {
    Identity,
    /// x = origin + t / (1 - t²)
    Rational { origin: f64 },
}

impl Map {
    #[inline]
    fn apply(self, t: f64) -> (f64, f64) {
        match self {
            Map::Identity => (t, 1.0),
            Map::Rational { origin } => {
                let d = 1.0 - t * t;
                (origin + t / d, (1.0 + t * t) / (d * d))
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Segment {
    map: Map,
    lo: f64,
    hi: f64,
}

fn segments(points: &[f64]) -> Result<Vec<Segment>> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("need at least two integration limits".into()));
    }
    let mut out = Vec::with_capacity(points.len() - 1);
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.is_nan() || b.is_nan() || !(a < b) {
            return Err(Error::InvalidInput(format!(
                "integration limits must be strictly increasing, got {a} then {b}"
            )));
        }
        let seg = match (a.is_finite(), b.is_finite()) {
            (true, true) => Segment {
                map: Map::Identity,
                lo: a,
                hi: b,
            },
            (true, false) => Segment {
                map: Map::Rational { origin: a },
                lo: 0.0,
                hi: 1.0,
            },
            (false, true) => Segment {
                map: Map::Rational { origin: b },
                lo: -1.0,
                hi: 0.0,
            },
            (false, false) => Segment {
                map: Map::Rational { origin: 0.0 },
                lo: -1.0,
                hi: 1.0,
            },
        };
        out.push(seg);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct Piece {
    seg: usize,
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    prop: f64,
}

impl Piece {
    fn key(&self) -> (f64, usize, f64) {
        (self.err, self.seg, self.a)
    }
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    // max-heap: largest error first; among equals the leftmost interval
    fn cmp(&self, other: &Self) -> Ordering {
        let (e1, s1, a1) = self.key();
        let (e2, s2, a2) = other.key();
        e1.total_cmp(&e2)
            .then(s2.cmp(&s1))
            .then(a2.total_cmp(&a1))
    }
}

fn gk15<F>(f: &mut F, seg: &Segment, seg_idx: usize, a: f64, b: f64) -> Result<Piece>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut eval = |t: f64| -> Result<(f64, f64)> {
        let (x, jac) = seg.map.apply(t);
        let (v, u) = f(x)?;
        if !v.is_finite() || !u.is_finite() {
            return Err(Error::Integrand { abscissa: x });
        }
        if v == 0.0 && u == 0.0 {
            Ok((0.0, 0.0))
        } else {
            Ok((v * jac, math::abs(u) * jac))
        }
    };

    let (fc, uc) = eval(c)?;
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut prop = WGK[7] * uc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, u1) = eval(c - dx)?;
        let (f2, u2) = eval(c + dx)?;
        resk += WGK[j] * (f1 + f2);
        prop += WGK[j] * (u1 + u2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Piece {
        seg: seg_idx,
        a,
        b,
        value: resk * h,
        err: math::abs((resk - resg) * h),
        prop: prop * math::abs(h),
    })
}

/// Adaptive integration of `f` over the consecutive ranges in `points`.
///
/// `f` returns the integrand and an uncertainty on it (zero for exact
/// integrands). Non-finite values abort with [`Error::Integrand`].
pub fn integrate_with_uncertainty<F>(mut f: F, points: &[f64], tol: &Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    tol.validate()?;
    let segs = segments(points)?;
    let mut heap = BinaryHeap::with_capacity(64);
    let mut done: Vec<Piece> = Vec::new();
    let mut evals: u64 = 0;
    let (mut value, mut gk_err, mut prop) = (0.0, 0.0, 0.0);

    for (i, seg) in segs.iter().enumerate() {
        let p = gk15(&mut f, seg, i, seg.lo, seg.hi)?;
        evals += 15;
        value += p.value;
        gk_err += p.err;
        prop += p.prop;
        heap.push(p);
    }

    while gk_err + prop > tol.target(value)
        && gk_err > 0.05 * tol.target(value)
        && evals + 30 <= tol.max_evals
    {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let width = worst.b - worst.a;
        let scale = math::abs(worst.a).max(math::abs(worst.b)).max(f64::MIN_POSITIVE);
        if width <= 64.0 * f64::EPSILON * scale || mid <= worst.a || mid >= worst.b {
            gk_err -= worst.err;
            done.push(worst);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let seg = &segs[worst.seg];
        let left = gk15(&mut f, seg, worst.seg, worst.a, mid)?;
        let right = gk15(&mut f, seg, worst.seg, mid, worst.b)?;
        evals += 30;
        value += left.value + right.value - worst.value;
        gk_err += left.err + right.err - worst.err;
        prop += left.prop + right.prop - worst.prop;
        heap.push(left);
        heap.push(right);
    }

    // Final sums in a fixed order (segment, left endpoint).
    let mut all: Vec<Piece> = heap.into_vec();
    all.extend(done);
    all.sort_by(|x, y| x.seg.cmp(&y.seg).then(x.a.total_cmp(&y.a)));
    let value: f64 = all.iter().map(|p| p.value).sum();
    let error: f64 = all.iter().map(|p| p.err + p.prop).sum();
    Ok(QuadratureResult {
        value,
        error_estimate: error,
        evaluations: evals,
        converged: error <= tol.target(value),
    })
}

/// Like [`integrate_points`] for a fallible integrand.
pub fn try_integrate_points<F>(mut f: F, points: &[f64], tol: &Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_with_uncertainty(|x| f(x).map(|v| (v, 0.0)), points, tol)
}

/// Integral over the consecutive ranges `points[0]..points[1]..`; the
/// first and last entries may be infinite.
pub fn integrate_points<F>(mut f: F, points: &[f64], tol: &Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_with_uncertainty(|x| Ok((f(x), 0.0)), points, tol)
}

/// `∫_a^b f`; `a` may be `-inf` and `b` may be `+inf`. A doubly infinite
/// range is split at zero.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    if a.is_infinite() && b.is_infinite() && a < 0.0 && b > 0.0 {
        integrate_points(f, &[a, 0.0, b], tol)
    } else {
        integrate_points(f, &[a, b], tol)
    }
}

/// Nested integral `∫ dx ∫ dy f(x, y)` over the breakpoint lists `outer`
/// (x) and `inner` (y). The inner tolerance is ten times tighter and its
/// error estimate is carried into the outer one.
pub fn integrate_2d<F>(mut f: F, outer: &[f64], inner: &[f64], tol: &Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64, f64) -> f64,
{
    let inner_tol = tol.tightened(10.0);
    let mut inner_evals = 0u64;
    let mut inner_ok = true;
    let mut res = integrate_with_uncertainty(
        |x| {
            let r = integrate_points(|y| f(x, y), inner, &inner_tol)?;
            inner_evals += r.evaluations;
            inner_ok &= r.converged;
            Ok((r.value, r.error_estimate))
        },
        outer,
        tol,
    )?;
    res.evaluations = inner_evals;
    res.converged &= inner_ok;
    Ok(res)
}

/// Integral over a product domain of dimension 1 to 3; `ranges[k]` is the
/// breakpoint list of axis `k` (axis 0 outermost).
pub fn integrate_nd<F>(mut f: F, ranges: &[&[f64]], tol: &Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = ranges.len();
    if dim == 0 || dim > 3 {
        return Err(Error::Unsupported(format!(
            "integrate_nd supports 1 to 3 dimensions, got {dim}"
        )));
    }
    let mut point = vec![0.0; dim];
    let mut evals = 0u64;
    let mut ok = true;
    let mut res = nd_level(&mut f, ranges, 0, &mut point, tol, &mut evals, &mut ok)?;
    res.evaluations = evals;
    res.converged &= ok;
    Ok(res)
}

fn nd_level(
    f: &mut dyn FnMut(&[f64]) -> f64,
    ranges: &[&[f64]],
    axis: usize,
    point: &mut Vec<f64>,
    tol: &Tolerance,
    evals: &mut u64,
    ok: &mut bool,
) -> Result<QuadratureResult> {
    if axis + 1 == ranges.len() {
        let r = integrate_points(
            |x| {
                point[axis] = x;
                f(point)
            },
            ranges[axis],
            tol,
        )?;
        *evals += r.evaluations;
        *ok &= r.converged;
        return Ok(r);
    }
    let inner_tol = tol.tightened(10.0);
    let r = integrate_with_uncertainty(
        |x| {
            point[axis] = x;
            let inner = nd_level(f, ranges, axis + 1, point, &inner_tol, evals, ok)?;
            Ok((inner.value, inner.error_estimate))
        },
        ranges[axis],
        tol,
    )?;
    *ok &= r.converged;
    Ok(r)
}
