use crate::error::{domain, Result};
use crate::geometry::{dist2, unit_ball_volume, BoxRegion, MAX_DIM};

/// Cap on the total probe count; high-dimensional domains get coarser probes.
const MAX_PROBES: usize = 1 << 20;

/// Running over-approximation of the dispersion
/// `d_n = sup_{x ∈ free} min_{s ∈ S_n} ‖x − s‖`.
///
/// In one dimension the value is exact (sorted gaps). Otherwise a lattice of
/// probes at cell centres covers the free set; every free point lies within
/// half a cell diagonal of some probe, so
/// `max_probe nearest-distance + half-diagonal` bounds the dispersion from above.
#[derive(Clone, Debug)]
pub struct DispersionTracker {
    domain: BoxRegion,
    mode: Mode,
}

#[derive(Clone, Debug)]
enum Mode {
    Exact1d { sorted: Vec<f64> },
    Probes(ProbeLattice),
}

#[derive(Clone, Debug)]
struct ProbeLattice {
    shape: Vec<usize>,
    strides: Vec<usize>,
    spacing: Vec<f64>,
    /// `true` where the probe lies in the free set.
    active: Vec<bool>,
    nearest: Vec<f64>,
    slack: f64,
    max_nearest: f64,
}

impl DispersionTracker {
    /// `free` selects the probes that count; `per_axis` is the probe
    /// resolution (reduced automatically to keep the total bounded).
    pub fn new(domain: &BoxRegion, free: &dyn Fn(&[f64]) -> bool, per_axis: usize) -> Self {
        let dim = domain.dim();
        if dim == 1 {
            return Self { domain: domain.clone(), mode: Mode::Exact1d { sorted: Vec::new() } };
        }
        let mut per_axis = per_axis.max(2);
        while per_axis.checked_pow(dim as u32).is_none_or(|t| t > MAX_PROBES) {
            per_axis -= 1;
        }
        let shape = vec![per_axis; dim];
        let spacing: Vec<f64> = (0..dim).map(|i| domain.extent(i) / per_axis as f64).collect();
        let mut strides = vec![1; dim];
        for i in 1..dim {
            strides[i] = strides[i - 1] * shape[i - 1];
        }
        let total: usize = shape.iter().product();
        let mut active = vec![false; total];
        let mut p = [0.0; MAX_DIM];
        for (flat, slot) in active.iter_mut().enumerate() {
            for axis in 0..dim {
                let k = (flat / strides[axis]) % shape[axis];
                p[axis] = domain.lo()[axis] + (k as f64 + 0.5) * spacing[axis];
            }
            *slot = free(&p[..dim]);
        }
        let slack = 0.5 * spacing.iter().map(|s| s * s).sum::<f64>().sqrt();
        let lattice = ProbeLattice {
            shape,
            strides,
            spacing,
            active,
            nearest: vec![f64::INFINITY; total],
            slack,
            max_nearest: f64::INFINITY,
        };
        Self { domain: domain.clone(), mode: Mode::Probes(lattice) }
    }

    /// Current upper bound. An empty cloud reports the domain diameter.
    pub fn value(&self) -> f64 {
        let diameter = self.domain.diameter();
        match &self.mode {
            Mode::Exact1d { sorted } => {
                if sorted.is_empty() {
                    return diameter;
                }
                let (lo, hi) = (self.domain.lo()[0], self.domain.hi()[0]);
                let ends = (sorted[0] - lo).max(hi - sorted[sorted.len() - 1]);
                let gaps = sorted.windows(2).map(|w| 0.5 * (w[1] - w[0])).fold(0.0, f64::max);
                ends.max(gaps)
            }
            Mode::Probes(l) => {
                if l.max_nearest.is_infinite() {
                    diameter
                } else {
                    (l.max_nearest + l.slack).min(diameter)
                }
            }
        }
    }

    /// Half the probe cell diagonal, the estimator's additive slack.
    pub fn slack(&self) -> f64 {
        match &self.mode {
            Mode::Exact1d { .. } => 0.0,
            Mode::Probes(l) => l.slack,
        }
    }

    pub fn insert(&mut self, y: &[f64]) {
        let dim = self.domain.dim();
        match &mut self.mode {
            Mode::Exact1d { sorted } => {
                let pos = sorted.partition_point(|&v| v < y[0]);
                sorted.insert(pos, y[0]);
            }
            Mode::Probes(l) => {
                let first = l.max_nearest.is_infinite();
                let reach = if first { f64::INFINITY } else { l.max_nearest };
                let mut lo = [0usize; MAX_DIM];
                let mut hi = [0usize; MAX_DIM];
                for axis in 0..dim {
                    let origin = self.domain.lo()[axis];
                    let cell = |v: f64| ((v - origin) / l.spacing[axis] - 0.5).floor();
                    let last = l.shape[axis] as f64 - 1.0;
                    lo[axis] = cell(y[axis] - reach).clamp(0.0, last) as usize;
                    hi[axis] = (cell(y[axis] + reach) + 1.0).clamp(0.0, last) as usize;
                }
                let mut p = [0.0; MAX_DIM];
                let mut cur = lo;
                let mut lost_max = first;
                'outer: loop {
                    let flat: usize = (0..dim).map(|a| cur[a] * l.strides[a]).sum();
                    if l.active[flat] {
                        for axis in 0..dim {
                            p[axis] = self.domain.lo()[axis] + (cur[axis] as f64 + 0.5) * l.spacing[axis];
                        }
                        let d = dist2(&p[..dim], y).sqrt();
                        if d < l.nearest[flat] {
                            if l.nearest[flat] >= l.max_nearest {
                                lost_max = true;
                            }
                            l.nearest[flat] = d;
                        }
                    }
                    let mut axis = 0;
                    loop {
                        if axis == dim {
                            break 'outer;
                        }
                        if cur[axis] < hi[axis] {
                            cur[axis] += 1;
                            break;
                        }
                        cur[axis] = lo[axis];
                        axis += 1;
                    }
                }
                if lost_max {
                    l.max_nearest = l
                        .nearest
                        .iter()
                        .zip(&l.active)
                        .filter(|(_, &a)| a)
                        .map(|(&d, _)| d)
                        .fold(f64::NEG_INFINITY, f64::max);
                    if l.max_nearest == f64::NEG_INFINITY {
                        // No active probes: the free set misses the lattice.
                        l.max_nearest = 0.0;
                    }
                }
            }
        }
    }
}

/// Lower and upper rate bounds on the dispersion of `n` uniform samples in
/// dimension `dim`: `(d_s n^{−1/N}, D_s (ln n / n)^{1/N})`.
pub fn dispersion_bounds(n: f64, dim: usize, upper_scale: f64, lower_scale: f64) -> Result<(f64, f64)> {
    if !(n >= 2.0) {
        return domain(format!("dispersion bounds need n >= 2, got {n}"));
    }
    if dim == 0 {
        return domain("dimension must be positive");
    }
    let inv = 1.0 / dim as f64;
    Ok((lower_scale * n.powf(-inv), upper_scale * (n.ln() / n).powf(inv)))
}

/// `D_s` such that `γ = C_N D_s^N / μ(free)` takes the requested value.
pub fn dispersion_scale_for_gamma(gamma: f64, dim: usize, free_measure: f64) -> f64 {
    (gamma * free_measure / unit_ball_volume(dim)).powf(1.0 / dim as f64)
}
