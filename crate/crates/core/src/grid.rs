use serde::{Deserialize, Serialize};

/// Uniform time grid `t_i = i * step`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub step: f64,
    pub len: usize,
}

impl UniformGrid {
    /// Grid covering `[0, horizon]` with `intervals` equal steps.
    pub fn covering(horizon: f64, intervals: usize) -> Self {
        assert!(intervals > 0 && horizon > 0.0);
        UniformGrid {
            step: horizon / intervals as f64,
            len: intervals + 1,
        }
    }

    #[inline]
    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn horizon(&self) -> f64 {
        self.t(self.len - 1)
    }

    pub fn intervals(&self) -> usize {
        self.len - 1
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.t(i))
    }

    /// Integer `r` such that `coarse` is every `r`-th node of `self`, if any.
    pub fn stride_to(&self, coarse: &UniformGrid) -> Option<usize> {
        if coarse.intervals() == 0 || !self.intervals().is_multiple_of(coarse.intervals()) {
            return None;
        }
        let r = self.intervals() / coarse.intervals();
        let rel = (self.horizon() - coarse.horizon()).abs() / coarse.horizon().max(1e-300);
        (rel < 1e-12).then_some(r)
    }
}
