//! Per-sample solver state and the update-set rules.

/// Values, control labels, child pointers and staleness flags, indexed by
/// sample id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverState {
    /// `v_n`, always in `[0, 1]`.
    pub values: Vec<f64>,
    /// Angel pool index chosen at the last value-iteration update.
    pub controls: Vec<Option<usize>>,
    /// Minimizing neighbour recorded at the last update.
    pub child: Vec<Option<usize>>,
    /// Iterations since the last value-iteration update.
    pub flag: Vec<u32>,
    pub iteration: usize,
}

impl SolverState {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn push(&mut self, value: f64) {
        self.values.push(value);
        self.controls.push(None);
        self.child.push(None);
        self.flag.push(0);
    }
}

/// `K_n`: the samples that receive a full value-iteration update.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpdateSet {
    ids: Vec<usize>,
}

impl UpdateSet {
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self { ids }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn contains(&self, id: usize) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub(crate) fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.ids {
            if i < n {
                m[i] = true;
            }
        }
        m
    }
}

/// Cascade rule: the new sample, every sample whose flag reached `d`, and
/// every sample whose child was updated in the previous iteration.
pub fn cascade_schedule(state: &SolverState, d: u32, y_new: usize) -> UpdateSet {
    let mut ids = vec![y_new];
    for x in 0..state.len() {
        if x == y_new {
            continue;
        }
        let stale = state.flag[x] >= d;
        let child_moved = state.child[x].is_some_and(|c| state.flag.get(c) == Some(&0));
        if stale || child_moved {
            ids.push(x);
        }
    }
    UpdateSet::new(ids)
}

/// Round-robin rule: the new sample plus every sample with
/// `(id + n) mod (d + 1) = 0`, so each sample is updated at least once in any
/// `d + 1` consecutive iterations.
pub fn round_robin_schedule(len: usize, d: u32, iteration: usize, y_new: usize) -> UpdateSet {
    let period = d as usize + 1;
    let mut ids: Vec<usize> = (0..len).filter(|x| (x + iteration) % period == 0).collect();
    ids.push(y_new);
    UpdateSet::new(ids)
}
