use num_complex::Complex64;

/// Inputs to the fixed-step kernels. Coefficient and source profile are
/// sampled on the half-step grid: entry `j` belongs to time `j h / 2`.
pub(crate) struct Kernel<'a> {
    pub beta: f64,
    pub a_half: &'a [f64],
    pub g_half: Option<&'a [f64]>,
    pub h_hat: Complex64,
    pub h: f64,
    pub steps: usize,
    /// Record every `stride`-th state.
    pub stride: usize,
}

pub(crate) struct KernelOutput {
    pub v: Vec<Complex64>,
    pub vt: Vec<Complex64>,
    /// Largest `estimated error / tolerance` over all step pairs.
    pub worst_ratio: f64,
    pub worst_error: f64,
}

type State = (Complex64, Complex64);

impl Kernel<'_> {
    #[inline]
    fn rhs(&self, j: usize, y: State) -> State {
        let f = self.g_half.map_or(Complex64::new(0.0, 0.0), |g| self.h_hat * g[j]);
        (y.1, f - self.beta * self.beta * self.a_half[j] * y.0)
    }

    /// One RK4 step of length `m h` starting at half-grid index `j`.
    #[inline]
    fn step(&self, j: usize, m: usize, y: State) -> State {
        let dt = m as f64 * self.h;
        let k1 = self.rhs(j, y);
        let k2 = self.rhs(j + m, (y.0 + k1.0 * (dt / 2.0), y.1 + k1.1 * (dt / 2.0)));
        let k3 = self.rhs(j + m, (y.0 + k2.0 * (dt / 2.0), y.1 + k2.1 * (dt / 2.0)));
        let k4 = self.rhs(j + 2 * m, (y.0 + k3.0 * dt, y.1 + k3.1 * dt));
        (
            y.0 + (k1.0 + (k2.0 + k3.0) * 2.0 + k4.0) * (dt / 6.0),
            y.1 + (k1.1 + (k2.1 + k3.1) * 2.0 + k4.1) * (dt / 6.0),
        )
    }

    fn v_norm(&self, y: State) -> f64 {
        (self.beta * self.beta * y.0.norm_sqr() + y.1.norm_sqr()).sqrt()
    }

    /// Classical RK4 with step-doubling error estimates. `steps` must be
    /// even; the local tolerance of a step pair is `rtol · max(|V|, floor)`.
    pub fn rk4(&self, v0: Complex64, v1: Complex64, rtol: f64, floor: f64) -> KernelOutput {
        debug_assert!(self.steps.is_multiple_of(2) && self.steps.is_multiple_of(self.stride));
        debug_assert_eq!(self.a_half.len(), 2 * self.steps + 1);
        let mut out = self.output(v0, v1);
        let mut y = (v0, v1);
        let mut worst_ratio = 0.0_f64;
        let mut worst_error = 0.0_f64;
        for pair in 0..self.steps / 2 {
            let j = 4 * pair;
            let coarse = self.step(j, 2, y);
            let mid = self.step(j, 1, y);
            let fine = self.step(j + 2, 1, mid);
            let err = self.v_norm((fine.0 - coarse.0, fine.1 - coarse.1)) / 15.0;
            let tol = rtol * self.v_norm(y).max(self.v_norm(fine)).max(floor);
            worst_error = worst_error.max(err);
            if tol > 0.0 {
                worst_ratio = worst_ratio.max(err / tol);
            } else if err > 0.0 {
                worst_ratio = f64::INFINITY;
            }
            let n = 2 * pair;
            if (n + 1) % self.stride == 0 {
                out.v.push(mid.0);
                out.vt.push(mid.1);
            }
            y = fine;
            if (n + 2) % self.stride == 0 {
                out.v.push(y.0);
                out.vt.push(y.1);
            }
        }
        out.worst_ratio = worst_ratio;
        out.worst_error = worst_error;
        out
    }

    /// Velocity Verlet on whole steps; no error estimate.
    pub fn verlet(&self, v0: Complex64, v1: Complex64) -> KernelOutput {
        let mut out = self.output(v0, v1);
        let accel = |j: usize, v: Complex64| {
            let f = self.g_half.map_or(Complex64::new(0.0, 0.0), |g| self.h_hat * g[j]);
            f - self.beta * self.beta * self.a_half[j] * v
        };
        let (mut v, mut w) = (v0, v1);
        let mut acc = accel(0, v);
        for n in 0..self.steps {
            let half = w + acc * (self.h / 2.0);
            v += half * self.h;
            acc = accel(2 * (n + 1), v);
            w = half + acc * (self.h / 2.0);
            if (n + 1) % self.stride == 0 {
                out.v.push(v);
                out.vt.push(w);
            }
        }
        out
    }

    fn output(&self, v0: Complex64, v1: Complex64) -> KernelOutput {
        let cap = self.steps / self.stride + 1;
        let mut v = Vec::with_capacity(cap);
        let mut vt = Vec::with_capacity(cap);
        v.push(v0);
        vt.push(v1);
        KernelOutput {
            v,
            vt,
            worst_ratio: 0.0,
            worst_error: 0.0,
        }
    }
}
