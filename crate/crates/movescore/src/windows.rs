//! Moving-window plans derived from a segmentation.
//!
//! Three strategies turn a segmentation into one inclusive index window per
//! time instance:
//!
//! * **OF** — overlapping windows of fixed width, the width taken from the
//!   median segment length;
//! * **OV** — overlapping windows whose width follows the segment lengths,
//!   linearly interpolated between segment centers;
//! * **DV** — disjoint windows equal to the segments themselves.
//!
//! OF and OV windows are symmetric around their location and shrink toward
//! the series borders so that every window stays inside the series. All
//! indices here are 0-based; the CLI emits 1-based CSV.

use crate::changepoint::Segmentation;
use crate::error::{Error, Result};

/// Window selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WindowKind {
    Of,
    Ov,
    Dv,
}

impl WindowKind {
    pub const ALL: [WindowKind; 3] = [WindowKind::Of, WindowKind::Ov, WindowKind::Dv];

    pub fn as_str(&self) -> &'static str {
        match self {
            WindowKind::Of => "OF",
            WindowKind::Ov => "OV",
            WindowKind::Dv => "DV",
        }
    }
}

impl std::fmt::Display for WindowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "of" => Ok(WindowKind::Of),
            "ov" => Ok(WindowKind::Ov),
            "dv" => Ok(WindowKind::Dv),
            other => Err(Error::InvalidParameter {
                reason: format!("unknown window kind {other:?} (expected of, ov or dv)"),
            }),
        }
    }
}

/// Per-instance inclusive index windows `lo[t]..=hi[t]` with
/// `lo[t] <= t <= hi[t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    kind: WindowKind,
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl WindowPlan {
    /// Validates the containment invariant `lo[t] <= t <= hi[t] < n`.
    pub fn new(kind: WindowKind, lo: Vec<usize>, hi: Vec<usize>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::InvalidWindowPlan {
                reason: format!("lo and hi lengths differ: {} vs {}", lo.len(), hi.len()),
            });
        }
        if lo.is_empty() {
            return Err(Error::InvalidWindowPlan {
                reason: "plan is empty".to_string(),
            });
        }
        let n = lo.len();
        for t in 0..n {
            if !(lo[t] <= t && t <= hi[t] && hi[t] < n) {
                return Err(Error::InvalidWindowPlan {
                    reason: format!(
                        "window [{}, {}] does not contain t = {t} inside 0..{n}",
                        lo[t], hi[t]
                    ),
                });
            }
        }
        Ok(Self { kind, lo, hi })
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    /// Inclusive window bounds at instance `t`.
    pub fn window(&self, t: usize) -> (usize, usize) {
        (self.lo[t], self.hi[t])
    }

    pub fn width(&self, t: usize) -> usize {
        self.hi[t] - self.lo[t] + 1
    }

    /// The widest window of the plan; for OF this is the interior width.
    pub fn max_width(&self) -> usize {
        (0..self.len()).map(|t| self.width(t)).max().unwrap_or(0)
    }
}

/// Median as a real number; the mean of the two central values for an even
/// count.
fn median_of_lengths(lengths: &[usize]) -> f64 {
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2] as f64
    } else {
        (sorted[k / 2 - 1] + sorted[k / 2]) as f64 / 2.0
    }
}

fn half_width(width: f64) -> usize {
    (((width - 1.0) / 2.0).floor().max(0.0)) as usize
}

/// Overlapping fixed-width windows: width `2·⌊(λ−1)/2⌋ + 1` with λ the
/// median segment length, shrinking linearly at the borders.
pub fn of_windows(seg: &Segmentation) -> WindowPlan {
    let n = seg.series_len();
    let delta = half_width(median_of_lengths(&seg.segment_lengths()));
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for t in 0..n {
        let d = delta.min(t).min(n - 1 - t);
        lo.push(t - d);
        hi.push(t + d);
    }
    WindowPlan {
        kind: WindowKind::Of,
        lo,
        hi,
    }
}

/// Overlapping varying-width windows: segment lengths are linearly
/// interpolated between the segment centers `γ_j = (τ_j + 1 + τ_{j+1})/2`;
/// outside `[γ_0, γ_m]` the windows shrink linearly to the borders.
pub fn ov_windows(seg: &Segmentation) -> WindowPlan {
    let n = seg.series_len();
    let bounds = seg.boundaries();
    let centers: Vec<f64> = bounds
        .windows(2)
        .map(|w| (w[0] as f64 + 1.0 + w[1] as f64) / 2.0)
        .collect();
    let lengths: Vec<f64> = bounds.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let m1 = centers.len(); // m + 1 segments

    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for i in 0..n {
        let t = (i + 1) as f64; // 1-based location
        let d = if t < centers[0] {
            i
        } else if t > centers[m1 - 1] {
            n - 1 - i
        } else {
            // segment-length interpolation at t
            let j = match centers.iter().position(|&g| t <= g) {
                Some(0) => 0,
                Some(j) => j - 1,
                None => m1 - 1,
            };
            let width = if m1 == 1 || centers[j + 1] == centers[j] {
                lengths[j]
            } else {
                let (g0, g1) = (centers[j], centers[j + 1]);
                ((g1 - t) * lengths[j] + (t - g0) * lengths[j + 1]) / (g1 - g0)
            };
            half_width(width).min(i).min(n - 1 - i)
        };
        lo.push(i - d);
        hi.push(i + d);
    }
    WindowPlan {
        kind: WindowKind::Ov,
        lo,
        hi,
    }
}

/// Disjoint varying-width windows: every instance gets its own segment.
pub fn dv_windows(seg: &Segmentation) -> WindowPlan {
    let n = seg.series_len();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for (a, b) in seg.segments() {
        for _ in a..b {
            lo.push(a);
            hi.push(b - 1);
        }
    }
    WindowPlan {
        kind: WindowKind::Dv,
        lo,
        hi,
    }
}

/// Builds the plan of the requested kind.
pub fn plan_windows(kind: WindowKind, seg: &Segmentation) -> WindowPlan {
    match kind {
        WindowKind::Of => of_windows(seg),
        WindowKind::Ov => ov_windows(seg),
        WindowKind::Dv => dv_windows(seg),
    }
}
