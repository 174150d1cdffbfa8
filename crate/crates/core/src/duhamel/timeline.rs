use crate::error::{Error, Result};
use crate::field::{Grid, Shape, SpectralField};
use crate::scalar::Real;

/// Uniform steps of `T/M` with the first step halved repeatedly until
/// `t₁ ≤ T/M_total²`.
pub fn graded_times(horizon: f64, intervals: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0) || intervals == 0 {
        return Err(Error::InvalidArgument(format!(
            "time grid needs T > 0 and M > 0 (T={horizon}, M={intervals})"
        )));
    }
    let h = horizon / intervals as f64;
    let mut levels = 0usize;
    loop {
        let total = intervals + levels;
        let t1 = h / 2f64.powi(levels as i32);
        if t1 <= horizon / (total * total) as f64 {
            break;
        }
        levels += 1;
    }
    let mut times = vec![0.0];
    for l in (1..=levels).rev() {
        times.push(h / 2f64.powi(l as i32));
    }
    for i in 1..=intervals {
        times.push(h * i as f64);
    }
    *times.last_mut().expect("nonempty") = horizon;
    Ok(times)
}

pub fn uniform_times(horizon: f64, intervals: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0) || intervals == 0 {
        return Err(Error::InvalidArgument(format!(
            "time grid needs T > 0 and M > 0 (T={horizon}, M={intervals})"
        )));
    }
    Ok((0..=intervals).map(|i| horizon * i as f64 / intervals as f64).collect())
}

/// `t₁ ≤ T/M²` with `M` the number of intervals.
pub fn is_graded(times: &[f64]) -> bool {
    let m = times.len().saturating_sub(1);
    m >= 1 && times[1] <= times[m] / (m * m) as f64 * (1.0 + 1e-12)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::InvalidArgument("timeline needs at least two nodes".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidArgument(format!("first node {} is not 0", times[0])));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Field-valued function of time on a node grid starting at 0.
#[derive(Clone, Debug)]
pub struct Timeline<T: Real> {
    times: Vec<f64>,
    snapshots: Vec<SpectralField<T>>,
}

impl<T: Real> Timeline<T> {
    pub fn new(times: Vec<f64>, snapshots: Vec<SpectralField<T>>) -> Result<Self> {
        check_times(&times)?;
        if times.len() != snapshots.len() {
            return Err(Error::InvalidArgument(format!(
                "{} nodes but {} snapshots",
                times.len(),
                snapshots.len()
            )));
        }
        let first = &snapshots[0];
        for s in &snapshots[1..] {
            first.check_compatible(s)?;
        }
        Ok(Self { times, snapshots })
    }

    pub fn from_fn(times: Vec<f64>, f: impl Fn(f64) -> SpectralField<T>) -> Result<Self> {
        let snaps = times.iter().map(|&t| f(t)).collect();
        Self::new(times, snaps)
    }

    pub fn try_from_fn(times: Vec<f64>, f: impl Fn(usize, f64) -> Result<SpectralField<T>>) -> Result<Self> {
        let snaps = times.iter().enumerate().map(|(i, &t)| f(i, t)).collect::<Result<Vec<_>>>()?;
        Self::new(times, snaps)
    }

    pub fn zeros(times: Vec<f64>, grid: &Grid<T>, shape: Shape) -> Result<Self> {
        let z = SpectralField::zeros(grid, shape);
        Self::new(times.clone(), vec![z; times.len()])
    }

    pub fn constant(times: Vec<f64>, field: &SpectralField<T>) -> Result<Self> {
        let n = times.len();
        Self::new(times, vec![field.clone(); n])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[SpectralField<T>] {
        &self.snapshots
    }

    pub fn snapshot(&self, i: usize) -> &SpectralField<T> {
        &self.snapshots[i]
    }

    pub fn last(&self) -> &SpectralField<T> {
        self.snapshots.last().expect("nonempty timeline")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty timeline")
    }

    pub fn grid(&self) -> &Grid<T> {
        self.snapshots[0].grid()
    }

    pub fn shape(&self) -> Shape {
        self.snapshots[0].shape()
    }

    pub fn is_graded(&self) -> bool {
        is_graded(&self.times)
    }

    pub fn same_nodes(&self, other: &Self) -> bool {
        self.times == other.times
    }

    pub fn map(&self, f: impl Fn(&SpectralField<T>) -> SpectralField<T>) -> Result<Self> {
        Self::new(self.times.clone(), self.snapshots.iter().map(f).collect())
    }

    pub fn try_map(&self, f: impl Fn(usize, &SpectralField<T>) -> Result<SpectralField<T>>) -> Result<Self> {
        let snaps = self.snapshots.iter().enumerate().map(|(i, s)| f(i, s)).collect::<Result<Vec<_>>>()?;
        Self::new(self.times.clone(), snaps)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_nodes(other) {
            return Err(Error::InvalidArgument("timelines on different nodes".into()));
        }
        self.try_map(|i, s| s.sub(&other.snapshots[i]))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_nodes(other) {
            return Err(Error::InvalidArgument("timelines on different nodes".into()));
        }
        self.try_map(|i, s| s.add(&other.snapshots[i]))
    }

    pub fn scaled(&self, a: T) -> Result<Self> {
        self.map(|s| s.scaled(a))
    }

    pub fn is_finite(&self) -> bool {
        self.snapshots.iter().all(SpectralField::is_finite)
    }

    /// Index `i` with `t_i ≤ t < t_{i+1}` (or the last interval for `t = T`).
    pub fn locate(&self, t: f64) -> Result<usize> {
        let horizon = self.horizon();
        if !(t >= 0.0 && t <= horizon * (1.0 + 1e-14)) {
            return Err(Error::OutsideTimeline { t, horizon });
        }
        let m = self.times.len() - 1;
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        Ok(i.min(m - 1))
    }

    /// Linear interpolation in time.
    pub fn at(&self, t: f64) -> Result<SpectralField<T>> {
        let i = self.locate(t)?;
        let (a, b) = (self.times[i], self.times[i + 1]);
        let w = T::of(((t - a) / (b - a)).clamp(0.0, 1.0));
        let mut out = self.snapshots[i].scaled(T::one() - w);
        out.axpy(w, &self.snapshots[i + 1])?;
        Ok(out)
    }

    /// Timeline of the same fields on a grid with a scaled box, with times scaled by `time_factor`.
    pub fn rescaled(&self, grid: &Grid<T>, time_factor: f64, amplitude: T) -> Result<Self> {
        let times = self.times.iter().map(|t| t * time_factor).collect();
        let snaps = self
            .snapshots
            .iter()
            .map(|s| s.on_grid(grid).map(|f| f.scaled(amplitude)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(times, snaps)
    }
}
