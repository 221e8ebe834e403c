use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DropParams;

/// The quartic
/// `q(r) = -16C^2 + (64 + 32 C lambda0) r - (16 lambda0^2 + 8aC) r^2 + 8 a lambda0 r^3 - a^2 r^4`,
/// where `r` is the squared distance to the rotation axis. `q` is `64 xi1^2`
/// on the level set `G = C`, so its positivity bands are exactly the
/// squared-radius ranges swept by the profile curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarticQ {
    /// Coefficients `c0..c4`, ascending powers.
    coeffs: [f64; 5],
    params: DropParams,
}

impl QuarticQ {
    pub fn build(params: &DropParams) -> Self {
        let (a, l0, c) = (params.a(), params.lambda0(), params.c());
        QuarticQ {
            coeffs: [
                -16.0 * c * c,
                64.0 + 32.0 * c * l0,
                -16.0 * l0 * l0 - 8.0 * a * c,
                8.0 * a * l0,
                -a * a,
            ],
            params: *params,
        }
    }

    pub fn coeffs(&self) -> &[f64; 5] {
        &self.coeffs
    }

    pub fn params(&self) -> &DropParams {
        &self.params
    }

    /// Degree after trimming trailing zero coefficients.
    pub fn degree(&self) -> usize {
        for d in (1..=4).rev() {
            if self.coeffs[d] != 0.0 {
                return d;
            }
        }
        0
    }

    pub fn eval(&self, r: f64) -> f64 {
        poly_eval(&self.coeffs, r)
    }

    /// Value of the `order`-th derivative at `r`.
    pub fn eval_deriv(&self, r: f64, order: usize) -> f64 {
        poly_eval(&poly_deriv_coeffs(&self.coeffs, order), r)
    }

    /// Magnitude bound for the `order`-th derivative evaluated at `r`
    /// (sum of absolute term values). Used to scale residual tolerances.
    pub fn deriv_scale(&self, r: f64, order: usize) -> f64 {
        let d = poly_deriv_coeffs(&self.coeffs, order);
        let x = r.abs();
        let mut m = 0.0;
        let mut p = 1.0;
        for c in d {
            m += c.abs() * p;
            p *= x;
        }
        m.max(f64::MIN_POSITIVE)
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    let mut v = 0.0;
    for &ck in c.iter().rev() {
        v = v * x + ck;
    }
    v
}

fn poly_deriv_coeffs(c: &[f64; 5], order: usize) -> Vec<f64> {
    let mut cur: Vec<f64> = c.to_vec();
    for _ in 0..order {
        cur = cur
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, ck)| i as f64 * ck)
            .collect();
        if cur.is_empty() {
            cur.push(0.0);
        }
    }
    cur
}

/// Synthetic division of `c` (ascending) by `(x - root)`; returns the
/// quotient, discarding the remainder.
pub(crate) fn deflate(c: &[f64], root: f64) -> Vec<f64> {
    let n = c.len() - 1;
    let mut quot = vec![0.0; n];
    let mut acc = c[n];
    for k in (0..n).rev() {
        quot[k] = acc;
        acc = c[k] + acc * root;
    }
    quot
}

/// One root of `q` with its detected multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub r: f64,
    pub multiplicity: u32,
}

/// Non-negative real roots of `q`, strictly increasing in `r`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RootList {
    pub roots: Vec<Root>,
}

impl RootList {
    pub fn total_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.r).collect()
    }
}

/// Tolerances for root extraction.
#[derive(Debug, Clone, Copy)]
pub struct RootTol {
    /// Relative radius for merging root clusters.
    pub cluster: f64,
    /// Relative residual threshold below which a derivative is considered to
    /// vanish (drives multiplicity detection).
    pub residual: f64,
}

impl Default for RootTol {
    fn default() -> Self {
        // Polished residuals of true multiple roots sit at machine level
        // relative to the evaluation scale, so the residual gate can be very
        // tight; a loose gate would merge genuinely split pairs at large r,
        // where the term-sum scale hides heavy cancellation.
        RootTol {
            cluster: 1e-8,
            residual: 1e-9,
        }
    }
}

/// All real roots `r >= 0` of `q`, with multiplicities.
///
/// Candidates come from the companion-matrix eigenvalues of the (trimmed)
/// monic polynomial. Each candidate is assigned a multiplicity `m` by testing
/// hypotheses from high to low: polish with Newton on the `(m-1)`-th
/// derivative (where an `m`-fold root is simple), then require the residuals
/// of `q, q', ..., q^(m-1)` to vanish relative to their evaluation scales.
/// An `m`-fold root of a polynomial with relative coefficient noise `e`
/// splits into a cluster of width `~e^(1/m)`, so blind cluster merging at a
/// fixed width cannot recover multiplicities; the derivative test can.
pub fn positive_roots(q: &QuarticQ, tol: &RootTol) -> Result<RootList> {
    let mut coeffs: Vec<f64> = q.coeffs().to_vec();
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
        coeffs.pop();
    }

    // Exact zero roots (C = 0 makes the constant term vanish identically).
    let mut zero_mult = 0u32;
    while coeffs.len() > 1 && coeffs[0] == 0.0 {
        coeffs.remove(0);
        zero_mult += 1;
    }

    let mut out: Vec<Root> = Vec::new();
    if zero_mult > 0 {
        out.push(Root {
            r: 0.0,
            multiplicity: zero_mult,
        });
    }

    if coeffs.len() > 1 {
        let mut cands = companion_real_candidates(&coeffs);
        cands.sort_by(|x, y| x.total_cmp(y));
        let degree = coeffs.len() - 1;
        let mut used = vec![false; cands.len()];
        let mut found: Vec<Root> = Vec::new();
        let mut budget = degree as u32;

        for i in 0..cands.len() {
            if used[i] || budget == 0 {
                continue;
            }
            let guess = cands[i];
            let mut accepted: Option<(f64, u32)> = None;
            for m in (1..=(budget as usize).min(degree)).rev() {
                if let Some(r) = polish_with_multiplicity(q, guess, m, tol) {
                    accepted = Some((r, m as u32));
                    break;
                }
            }
            let Some((r, m)) = accepted else { continue };
            // Duplicate of an already accepted root?
            let scale = 1.0 + r.abs();
            if found.iter().any(|f| (f.r - r).abs() <= tol.cluster * scale) {
                used[i] = true;
                continue;
            }
            // Consume the cluster of candidates explained by this root: an
            // m-fold root split by coefficient rounding has width ~eps^(1/m).
            let split = (1e4 * f64::EPSILON).powf(1.0 / m as f64) * scale;
            let radius = split.max(tol.cluster * scale);
            for (j, c) in cands.iter().enumerate() {
                if !used[j] && (c - r).abs() <= radius {
                    used[j] = true;
                }
            }
            let mult = m.min(budget);
            budget -= mult;
            found.push(Root {
                r,
                multiplicity: mult,
            });
        }

        // Keep non-negative roots; snap tiny values onto zero.
        for root in found {
            let scale = 1.0 + root.r.abs();
            if root.r < -tol.cluster * scale {
                continue;
            }
            let r = root.r;
            if let Some(z) = out
                .iter_mut()
                .find(|z| (z.r - r).abs() <= tol.cluster * (1.0 + r.abs()))
            {
                z.multiplicity += root.multiplicity;
            } else {
                out.push(Root {
                    r,
                    multiplicity: root.multiplicity,
                });
            }
        }
    }

    out.sort_by(|x, y| x.r.total_cmp(&y.r));

    // Residual sanity: every reported root must actually sit on q.
    for root in &out {
        let res = q.eval(root.r).abs();
        let scale = q.deriv_scale(root.r, 0);
        if res > 1e-6 * scale {
            return Err(Error::IllConditioned(format!(
                "residual {res:.3e} at r = {} exceeds tolerance",
                root.r
            )));
        }
    }
    Ok(RootList { roots: out })
}

/// Real-axis candidates from companion-matrix eigenvalues.
fn companion_real_candidates(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    if n == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    let lead = coeffs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eig = m.complex_eigenvalues();
    let mut cands = Vec::with_capacity(n);
    for e in eig.iter() {
        if e.im.abs() <= 1e-4 * (1.0 + e.re.abs()) {
            cands.push(e.re);
        }
    }
    cands
}

/// Try to confirm `guess` as an `m`-fold root: Newton on the `(m-1)`-th
/// derivative, then residual checks on all lower derivatives.
fn polish_with_multiplicity(q: &QuarticQ, guess: f64, m: usize, tol: &RootTol) -> Option<f64> {
    let mut r = guess;
    let mut converged = false;
    for _ in 0..60 {
        let f = q.eval_deriv(r, m - 1);
        let df = q.eval_deriv(r, m);
        if df == 0.0 {
            break;
        }
        let mut step = f / df;
        let cap = 0.5 * (1.0 + r.abs());
        if step.abs() > cap {
            step = cap * step.signum();
        }
        r -= step;
        if step.abs() <= f64::EPSILON * (1.0 + r.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        // Accept anyway if the final residuals pass; Newton may oscillate in
        // the last ulp.
        converged = true;
    }
    if !converged || !r.is_finite() {
        return None;
    }
    // The polished point must stay near the original guess.
    if (r - guess).abs() > 0.1 * (1.0 + guess.abs()) {
        return None;
    }
    for j in 0..m {
        let res = q.eval_deriv(r, j).abs();
        let scale = q.deriv_scale(r, j);
        if res > tol.residual * scale {
            return None;
        }
    }
    Some(r)
}
