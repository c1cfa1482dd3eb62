use super::{AoiError, Duration, Timestamp};

/// Slack for float comparisons on ages derived from integer microseconds.
const AGE_EPS: f64 = 1e-9;

/// Piecewise-linear age trajectory.
///
/// Each breakpoint `(t, a)` holds the age right after any delivery at `t`;
/// between breakpoints the age grows with slope one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AoiTrace {
    points: Vec<(Timestamp, f64)>,
}

impl AoiTrace {
    pub fn start(t: Timestamp, age_secs: f64) -> Self {
        AoiTrace {
            points: vec![(t, age_secs.max(0.0))],
        }
    }

    pub fn breakpoints(&self) -> &[(Timestamp, f64)] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// First and last covered instants.
    pub fn span(&self) -> Option<(Timestamp, Timestamp)> {
        Some((self.points.first()?.0, self.points.last()?.0))
    }

    fn ramp_value(&self, t: Timestamp) -> Option<f64> {
        let (last_t, last_a) = *self.points.last()?;
        Some(last_a + (t - last_t).as_secs_f64())
    }

    /// Appends the post-delivery age at `t`.
    ///
    /// The age may only drop or stay on the ramp; a second delivery at the
    /// same instant replaces the breakpoint value.
    pub fn push(&mut self, t: Timestamp, age_secs: f64) -> Result<(), AoiError> {
        let Some(&(last_t, _)) = self.points.last() else {
            self.points.push((t, age_secs.max(0.0)));
            return Ok(());
        };
        if t < last_t {
            return Err(AoiError::NonMonotoneTrace { at: t, last: last_t });
        }
        if age_secs < -AGE_EPS {
            return Err(AoiError::NegativeAge(age_secs));
        }
        let ramp = self.ramp_value(t).unwrap_or(0.0);
        if age_secs > ramp + AGE_EPS {
            return Err(AoiError::AgeAboveRamp { at: t, age: age_secs, ramp });
        }
        let age = age_secs.clamp(0.0, ramp);
        if t == last_t {
            self.points.last_mut().expect("non-empty").1 = age;
        } else {
            self.points.push((t, age));
        }
        Ok(())
    }

    /// Extends the trace along the ramp up to `t`.
    pub fn close(&mut self, t: Timestamp) -> Result<(), AoiError> {
        match self.points.last() {
            Some(&(last_t, _)) if t == last_t => Ok(()),
            Some(_) => {
                let ramp = self.ramp_value(t).unwrap_or(0.0);
                self.push(t, ramp)
            }
            None => Err(AoiError::EmptyTrace),
        }
    }

    /// Age at `t`, or `None` outside the covered span.
    pub fn age_at(&self, t: Timestamp) -> Option<f64> {
        let (first, last) = self.span()?;
        if t < first || t > last {
            return None;
        }
        let idx = self.points.partition_point(|&(pt, _)| pt <= t) - 1;
        let (pt, a) = self.points[idx];
        Some(a + (t - pt).as_secs_f64())
    }

    /// Largest sampled age on the breakpoints and end of the span.
    pub fn max_age(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0].1 + (w[1].0 - w[0].0).as_secs_f64())
            .chain(self.points.iter().map(|p| p.1))
            .fold(0.0, f64::max)
    }

    /// Uniform-grid samples of the age over the whole span.
    pub fn sample_grid(&self, step: Duration) -> Vec<f64> {
        let Some((first, last)) = self.span() else {
            return Vec::new();
        };
        let step_us = step.as_micros();
        if step_us <= 0 {
            return Vec::new();
        }
        let count = ((last - first).as_micros() / step_us) as usize + 1;
        let mut out = Vec::with_capacity(count);
        let mut idx = 0usize;
        for k in 0..count {
            let t = first + Duration::from_micros(k as i64 * step_us);
            while idx + 1 < self.points.len() && self.points[idx + 1].0 <= t {
                idx += 1;
            }
            let (pt, a) = self.points[idx];
            out.push(a + (t - pt).as_secs_f64());
        }
        out
    }
}

/// Exact area under the sawtooth on `[t0, t1]`, in s².
pub fn integrate_trace(trace: &AoiTrace, t0: Timestamp, t1: Timestamp) -> Result<f64, AoiError> {
    if t0 >= t1 {
        return Err(AoiError::EmptyInterval { t0, t1 });
    }
    let (first, last) = trace.span().ok_or(AoiError::EmptyTrace)?;
    if t0 < first || t1 > last {
        return Err(AoiError::CoverageGap { t0, t1, first, last });
    }
    let pts = trace.breakpoints();
    let mut area = 0.0;
    for (k, &(tk, ak)) in pts.iter().enumerate() {
        let seg_end = pts.get(k + 1).map_or(last, |p| p.0);
        let s = tk.max(t0);
        let e = seg_end.min(t1);
        if e <= s {
            continue;
        }
        let a_start = ak + (s - tk).as_secs_f64();
        area += segment_area(a_start, (e - s).as_secs_f64());
    }
    Ok(area)
}

/// Area of one slope-one segment starting at age `a` and lasting `dt`.
pub(crate) fn segment_area(a: f64, dt: f64) -> f64 {
    a * dt + 0.5 * dt * dt
}

/// Smallest grid-sampled age `v` such that at least a fraction `q` of the
/// samples are `<= v`.
pub fn age_percentile(trace: &AoiTrace, q: f64, sample_step: Duration) -> Result<f64, AoiError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(AoiError::BadQuantile(q));
    }
    if sample_step.as_micros() <= 0 {
        return Err(AoiError::BadSampleStep(sample_step));
    }
    let mut samples = trace.sample_grid(sample_step);
    if samples.is_empty() {
        return Err(AoiError::EmptyTrace);
    }
    Ok(quantile_of_samples(&mut samples, q))
}

/// Rank-`ceil(q n)` order statistic of `samples`.
pub(crate) fn quantile_of_samples(samples: &mut [f64], q: f64) -> f64 {
    let n = samples.len();
    let rank = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let idx = rank.min(n) - 1;
    let (_, v, _) = samples.select_nth_unstable_by(idx, |a, b| a.total_cmp(b));
    *v
}
