//! Betti curves and scalar barcode features.

use crate::error::{Error, Result};
use crate::persistence::{Bar, Barcode, Scale};
use serde::{Deserialize, Serialize};

/// Interpolation spacing of the point clouds; sharp corners create short bars right after it.
pub const SPIKE_ONSET: f64 = 0.1;
pub const DEFAULT_SPIKE_WIDTH: f64 = 0.02;
pub const DEFAULT_SPIKE_PERSISTENCE: f64 = 0.05;
pub const DEFAULT_EPS_REL: f64 = 0.05;
/// Slack on the open lower end of the spike window; births at exactly the spacing count.
const SPIKE_ONSET_SLACK: f64 = 1e-9;

/// Right-continuous integer step function on `[0, ∞)`.
///
/// `breakpoints[i] = (t_i, v_i)` means the value is `v_i` on `[t_i, t_{i+1})`;
/// before the first breakpoint and after the last one the value is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiCurve {
    pub breakpoints: Vec<(f64, i64)>,
    pub scale: Scale,
}

impl BettiCurve {
    pub fn zero(scale: Scale) -> BettiCurve {
        BettiCurve {
            breakpoints: Vec::new(),
            scale,
        }
    }

    /// `t ↦ #{bar : birth ≤ t < death}`. Empty and infinite bars are ignored.
    pub fn from_bars(bars: &[Bar], scale: Scale) -> BettiCurve {
        let mut events: Vec<(f64, i64)> = Vec::with_capacity(2 * bars.len());
        for b in bars {
            if b.death > b.birth && b.death.is_finite() {
                events.push((b.birth, 1));
                events.push((b.death, -1));
            }
        }
        BettiCurve::from_events(events, scale)
    }

    fn from_events(mut events: Vec<(f64, i64)>, scale: Scale) -> BettiCurve {
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints: Vec<(f64, i64)> = Vec::new();
        let mut value = 0i64;
        let mut i = 0;
        while i < events.len() {
            let t = events[i].0;
            while i < events.len() && events[i].0 == t {
                value += events[i].1;
                i += 1;
            }
            let prev = breakpoints.last().map_or(0, |b| b.1);
            if value != prev {
                breakpoints.push((t, value));
            }
        }
        BettiCurve { breakpoints, scale }
    }

    /// Jumps `(t, Δvalue)` of the curve.
    fn events(&self) -> Vec<(f64, i64)> {
        let mut prev = 0;
        self.breakpoints
            .iter()
            .map(|&(t, v)| {
                let d = v - prev;
                prev = v;
                (t, d)
            })
            .collect()
    }

    pub fn value_at(&self, t: f64) -> i64 {
        match self.breakpoints.partition_point(|b| b.0 <= t) {
            0 => 0,
            k => self.breakpoints[k - 1].1,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// `max{t : curve(t) ≠ 0}` as the right end of the support.
    pub fn support_end(&self) -> Option<f64> {
        self.breakpoints.last().map(|b| b.0)
    }

    pub fn integral(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * w[0].1 as f64)
            .sum()
    }

    pub fn to_scale(&self, scale: Scale) -> BettiCurve {
        let factor = match (self.scale, scale) {
            (Scale::Diameter, Scale::Radius) => 0.5,
            (Scale::Radius, Scale::Diameter) => 2.0,
            _ => 1.0,
        };
        BettiCurve {
            breakpoints: self.breakpoints.iter().map(|&(t, v)| (t * factor, v)).collect(),
            scale,
        }
    }

    /// `(t_start, t_end, value)` for every constant piece with nonzero value.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, i64)> + '_ {
        self.breakpoints
            .windows(2)
            .map(|w| (w[0].0, w[1].0, w[0].1))
            .filter(|p| p.2 != 0)
    }
}

/// Pointwise sum; all curves must share a scale.
pub fn sum_curves(curves: &[BettiCurve]) -> Result<BettiCurve> {
    let Some(first) = curves.first() else {
        return Ok(BettiCurve::zero(Scale::Diameter));
    };
    if curves.iter().any(|c| c.scale != first.scale) {
        return Err(Error::InvalidArgument("cannot add Betti curves on different scales".into()));
    }
    let events = curves.iter().flat_map(|c| c.events()).collect();
    Ok(BettiCurve::from_events(events, first.scale))
}

/// Pointwise mean of Betti curves; values are rational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageCurve {
    pub breakpoints: Vec<(f64, f64)>,
    pub scale: Scale,
    pub count: usize,
}

pub fn average_curves(curves: &[BettiCurve]) -> Result<AverageCurve> {
    if curves.is_empty() {
        return Err(Error::InvalidArgument("average of zero curves".into()));
    }
    let sum = sum_curves(curves)?;
    let n = curves.len() as f64;
    Ok(AverageCurve {
        breakpoints: sum.breakpoints.iter().map(|&(t, v)| (t, v as f64 / n)).collect(),
        scale: sum.scale,
        count: curves.len(),
    })
}

pub fn integral_i(bars: &[Bar]) -> f64 {
    bars.iter().filter(|b| b.death.is_finite()).map(Bar::persistence).sum()
}

/// `(number of bars, longest bar)`; `(0, 0)` when empty.
pub fn bar_stats(bars: &[Bar]) -> (usize, f64) {
    let finite = bars.iter().filter(|b| b.death.is_finite());
    (finite.clone().count(), finite.map(Bar::persistence).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeWindow {
    pub width: f64,
    pub max_persistence: f64,
}

impl Default for SpikeWindow {
    fn default() -> Self {
        SpikeWindow {
            width: DEFAULT_SPIKE_WIDTH,
            max_persistence: DEFAULT_SPIKE_PERSISTENCE,
        }
    }
}

impl SpikeWindow {
    /// Filtration-distance bounds of the birth window.
    fn bounds(&self, scale: Scale) -> (f64, f64) {
        let f = match scale {
            Scale::Diameter => 1.0,
            Scale::Radius => 0.5,
        };
        (f * (SPIKE_ONSET - SPIKE_ONSET_SLACK), f * (SPIKE_ONSET + self.width))
    }

    pub fn contains(&self, bar: &Bar, scale: Scale) -> bool {
        let (lo, hi) = self.bounds(scale);
        let f = if scale == Scale::Radius { 0.5 } else { 1.0 };
        bar.birth > lo && bar.birth <= hi && bar.persistence() < f * self.max_persistence
    }
}

/// Drops short dimension-1 bars born right after the interpolation spacing.
pub fn filter_spike(b: &Barcode, window: SpikeWindow) -> Barcode {
    Barcode {
        dim0: b.dim0.clone(),
        dim1: b.dim1.iter().filter(|bar| !window.contains(bar, b.scale)).copied().collect(),
        scale: b.scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveMaxima {
    pub max_value: i64,
    pub argmax: f64,
    pub second_value: i64,
    pub second_argmax: f64,
}

/// Global maximum and the largest other local maximum (plateau strictly above both
/// neighbours). When the curve is unfiltered, plateaus starting inside the spike
/// window are not eligible as second maximum. Ties go to the smaller `t`.
pub fn curve_maxima(c: &BettiCurve, spike_filtered: bool) -> CurveMaxima {
    let bp = &c.breakpoints;
    let mut out = CurveMaxima {
        max_value: 0,
        argmax: 0.0,
        second_value: 0,
        second_argmax: 0.0,
    };
    // a curve starting at t = 0 with the first value counts its left neighbour as 0
    let Some(gi) = (0..bp.len()).max_by(|&a, &b| bp[a].1.cmp(&bp[b].1).then(b.cmp(&a))) else {
        return out;
    };
    out.max_value = bp[gi].1;
    out.argmax = bp[gi].0;
    let (lo, hi) = SpikeWindow::default().bounds(c.scale);
    for i in 0..bp.len() {
        if i == gi {
            continue;
        }
        let left = if i == 0 { 0 } else { bp[i - 1].1 };
        let right = bp.get(i + 1).map_or(0, |b| b.1);
        let v = bp[i].1;
        if v <= left || v <= right || v <= 0 {
            continue;
        }
        if !spike_filtered && bp[i].0 > lo && bp[i].0 <= hi {
            continue;
        }
        if v > out.second_value {
            out.second_value = v;
            out.second_argmax = bp[i].0;
        }
    }
    out
}

/// Deviation from an ideal barcode shape, on the radius scale.
///
/// With `S` the end of the support, `f` the ramp from 1 at 0 to 0 at `S - eps`,
/// returns `(1/S) ∫ f(t) max(c(t) - 1, 0) dt`.
pub fn delta_eps(c: &BettiCurve, eps: f64) -> Result<f64> {
    let c = c.to_scale(Scale::Radius);
    let s = c
        .support_end()
        .ok_or_else(|| Error::Undefined("delta_eps of a zero curve".into()))?;
    if !(eps >= 0.0 && eps < s) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in [0, {s})")));
    }
    let ramp_end = s - eps;
    let mut total = 0.0;
    for (a, b, v) in c.pieces() {
        let excess = (v - 1).max(0) as f64;
        if excess == 0.0 || a >= ramp_end {
            continue;
        }
        let (a, b) = (a.max(0.0), b.min(ramp_end));
        if b <= a {
            continue;
        }
        total += excess * ((b - a) - (b * b - a * a) / (2.0 * ramp_end));
    }
    Ok(total / s)
}

/// `delta_eps` with `eps = eps_rel · S`.
pub fn delta_eps_rel(c: &BettiCurve, eps_rel: f64) -> Result<f64> {
    let s = c
        .to_scale(Scale::Radius)
        .support_end()
        .ok_or_else(|| Error::Undefined("delta_eps of a zero curve".into()))?;
    delta_eps(c, eps_rel * s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub integral_i: f64,
    pub n_bars: usize,
    pub max_bar: f64,
    /// `None` when the dimension-1 barcode is empty.
    pub delta_eps: Option<f64>,
    pub spike_filtered: bool,
}

/// Features of a diameter-scale barcode. `I`, `#B` and `M` are reported on the
/// barcode's own scale.
pub fn features(b: &Barcode, spike: Option<SpikeWindow>, eps_rel: f64) -> Result<FeatureRecord> {
    let filtered;
    let b = match spike {
        Some(w) => {
            filtered = filter_spike(b, w);
            &filtered
        }
        None => b,
    };
    let (n_bars, max_bar) = bar_stats(&b.dim1);
    let curve = BettiCurve::from_bars(&b.dim1, b.scale);
    let delta = if curve.is_zero() { None } else { Some(delta_eps_rel(&curve, eps_rel)?) };
    Ok(FeatureRecord {
        integral_i: integral_i(&b.dim1),
        n_bars,
        max_bar,
        delta_eps: delta,
        spike_filtered: spike.is_some(),
    })
}
