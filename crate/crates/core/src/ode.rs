//! Embedded Dormand-Prince 5(4) integrator with a 4th-order continuous
//! extension. The dense output drives event location (bisection on the
//! interpolant) and uniform resampling of traces, both of which need to be
//! deterministic; that is why this lives here instead of behind an external
//! solver.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

// Error coefficients (5th-order solution minus 4th-order embedded one).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous-extension coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: 1e-4,
        }
    }
}

/// One accepted step together with its interpolation coefficients.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub s0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    /// Evaluate the interpolant at `s` inside `[s0, s0 + h]`.
    pub fn eval(&self, s: f64) -> [f64; N] {
        let theta = ((s - self.s0) / self.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + theta1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + theta1 * self.rcont[4][i])));
        }
        y
    }

    pub fn s_end(&self) -> f64 {
        self.s0 + self.h
    }
}

/// Adaptive stepper owning the current state.
pub struct Dopri5<F, const N: usize>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    f: F,
    pub s: f64,
    pub y: [f64; N],
    k1: [f64; N],
    pub h: f64,
    opts: OdeOptions,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(mut f: F, s0: f64, y0: [f64; N], opts: OdeOptions) -> Self {
        let k1 = f(s0, &y0);
        let h = opts.initial_step.min(opts.max_step);
        Dopri5 {
            f,
            s: s0,
            y: y0,
            k1,
            h,
            opts,
        }
    }

    /// Advance by one accepted step (first-same-as-last reuse of `k1`).
    pub fn step(&mut self) -> Result<DenseStep<N>> {
        let mut rejections = 0usize;
        loop {
            let h = self.h.min(self.opts.max_step);
            if h < 1e-14 * (1.0 + self.s.abs()) {
                return Err(Error::ToleranceFailure(h));
            }
            let (s0, y0, k1) = (self.s, self.y, self.k1);
            let stage = |y0: &[f64; N], terms: &[(f64, &[f64; N])]| {
                let mut out = *y0;
                for (c, k) in terms {
                    for i in 0..N {
                        out[i] += h * c * k[i];
                    }
                }
                out
            };

            let y2 = stage(&y0, &[(A21, &k1)]);
            let k2 = (self.f)(s0 + C2 * h, &y2);
            let y3 = stage(&y0, &[(A31, &k1), (A32, &k2)]);
            let k3 = (self.f)(s0 + C3 * h, &y3);
            let y4 = stage(&y0, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            let k4 = (self.f)(s0 + C4 * h, &y4);
            let y5 = stage(&y0, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            let k5 = (self.f)(s0 + C5 * h, &y5);
            let y6 = stage(
                &y0,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            let k6 = (self.f)(s0 + h, &y6);
            let y7 = stage(
                &y0,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = (self.f)(s0 + h, &y7);

            // Scaled error norm.
            let mut err_sq = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.opts.atol + self.opts.rtol * y0[i].abs().max(y7[i].abs());
                err_sq += (e / sc) * (e / sc);
            }
            let err = (err_sq / N as f64).sqrt();

            if err <= 1.0 {
                // Build the dense-output coefficients.
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y7[i] - y0[i];
                    let bspl = h * k1[i] - ydiff;
                    rcont[0][i] = y0[i];
                    rcont[1][i] = ydiff;
                    rcont[2][i] = bspl;
                    rcont[3][i] = ydiff - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let step = DenseStep { s0, h, rcont };
                self.s = s0 + h;
                self.y = y7;
                self.k1 = k7;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                self.h = (h * fac).min(self.opts.max_step);
                return Ok(step);
            }

            rejections += 1;
            if rejections > 60 {
                return Err(Error::ToleranceFailure(h));
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            self.h = h * fac;
        }
    }
}

/// Locate a sign change of `g` on one dense step by bisection.
pub fn locate_event<const N: usize>(
    step: &DenseStep<N>,
    g: impl Fn(f64, &[f64; N]) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let glo = g(lo, &step.eval(lo));
    if glo == 0.0 {
        return lo;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid, &step.eval(mid));
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
