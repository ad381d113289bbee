//! Symmetric tridiagonal eigenproblems.
//!
//! Eigenvalues come from bisection on the Sturm count (the number of
//! negative pivots of the LDL^T factorization of `T - x I`), which selects
//! exactly the lowest `count` eigenvalues. Eigenvectors come from inverse
//! iteration with the converged eigenvalue as shift, using a tridiagonal LU
//! factorization with partial pivoting.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diagonal[i]` and `off_diagonal[i]` coupling
/// rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

const MAX_BISECTION_STEPS: usize = 256;
const MAX_INVERSE_ITERATIONS: usize = 8;

impl SymTridiagonal {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::Precondition("empty tridiagonal matrix".into()));
        }
        if off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::Precondition(format!(
                "off-diagonal length {} does not match diagonal length {}",
                off_diagonal.len(),
                diagonal.len()
            )));
        }
        Ok(Self {
            diagonal,
            off_diagonal,
        })
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 {
                self.off_diagonal[i - 1].abs()
            } else {
                0.0
            };
            let right = if i + 1 < n {
                self.off_diagonal[i].abs()
            } else {
                0.0
            };
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        (lo, hi)
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let (lo, hi) = self.gershgorin_bounds();
        lo.abs().max(hi.abs())
    }

    fn pivot_floor(&self) -> f64 {
        let max_e2 = self.off_diagonal.iter().fold(0.0_f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * max_e2.max(1.0)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        self.sturm_count_with_floor(x, self.pivot_floor())
    }

    fn sturm_count_with_floor(&self, x: f64, floor: f64) -> usize {
        let mut count = 0;
        let mut q = self.diagonal[0] - x;
        if q.abs() < floor {
            q = -floor;
        }
        if q < 0.0 {
            count += 1;
        }
        for (d, e) in self.diagonal[1..].iter().zip(&self.off_diagonal) {
            q = (d - x) - e * e / q;
            if q.abs() < floor {
                q = -floor;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `count` algebraically smallest eigenvalues, ascending.
    ///
    /// Each bisection runs until the bracket is a few ulps wide, so repeated
    /// calls return bit-identical values.
    pub fn lowest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        if count == 0 || count > self.len() {
            return Err(Error::Precondition(format!(
                "requested {count} eigenvalues of a {}x{} matrix",
                self.len(),
                self.len()
            )));
        }
        if self
            .diagonal
            .iter()
            .chain(&self.off_diagonal)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Precondition("matrix has non-finite entries".into()));
        }
        let floor = self.pivot_floor();
        let (g_lo, g_hi) = self.gershgorin_bounds();
        let pad = f64::EPSILON * (g_lo.abs().max(g_hi.abs())) * 4.0 + floor;
        let (g_lo, g_hi) = (g_lo - pad, g_hi + pad);

        // Upper brackets shared between levels: uppers[j] is some x with
        // sturm_count(x) > j.
        let mut uppers = vec![g_hi; count];
        let mut values = Vec::with_capacity(count);
        let mut lower = g_lo;
        for k in 0..count {
            let mut lo = lower;
            let mut hi = uppers[k];
            for _ in 0..MAX_BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let width = hi - lo;
                if width <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + floor {
                    break;
                }
                let c = self.sturm_count_with_floor(mid, floor);
                if c > k {
                    hi = mid;
                    for u in uppers.iter_mut().take(c.min(count)).skip(k + 1) {
                        if mid < *u {
                            *u = mid;
                        }
                    }
                } else {
                    lo = mid;
                }
            }
            let value = 0.5 * (lo + hi);
            values.push(value);
            lower = lo;
        }
        Ok(values)
    }

    /// Eigenvector for the eigenvalue `shift` by inverse iteration, returned
    /// with unit Euclidean norm. `previous` holds already accepted vectors of
    /// nearby eigenvalues to orthogonalize against. `level` (1-based) is only
    /// used in error reports.
    pub fn inverse_iteration(
        &self,
        shift: f64,
        previous: &[&[f64]],
        level: usize,
    ) -> Result<Vec<f64>> {
        let n = self.len();
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let lu = ShiftedLu::factor(self, shift, norm);
        let tolerance = 1e-9 * norm.max(1.0);

        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.25 * ((i as f64) * 0.618_033_988_749_895).fract())
            .collect();
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_INVERSE_ITERATIONS {
            orthogonalize(&mut x, previous);
            normalize(&mut x);
            lu.solve_in_place(&mut x);
            orthogonalize(&mut x, previous);
            let scale = euclidean_norm(&x);
            if !scale.is_finite() || scale == 0.0 {
                return Err(Error::Convergence {
                    index: level,
                    reason: "inverse iteration produced a degenerate vector".into(),
                });
            }
            x.iter_mut().for_each(|v| *v /= scale);
            residual = self.residual_norm(&x, shift);
            if residual <= tolerance {
                fix_sign(&mut x);
                return Ok(x);
            }
        }
        Err(Error::Convergence {
            index: level,
            reason: format!("inverse iteration residual {residual:e} above {tolerance:e}"),
        })
    }

    /// `|| (T - shift) x ||_2`.
    pub fn residual_norm(&self, x: &[f64], shift: f64) -> f64 {
        let n = self.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mut y = (self.diagonal[i] - shift) * x[i];
            if i > 0 {
                y += self.off_diagonal[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += self.off_diagonal[i] * x[i + 1];
            }
            acc += y * y;
        }
        acc.sqrt()
    }
}

fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) {
    let s = euclidean_norm(x);
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

fn orthogonalize(x: &mut [f64], previous: &[&[f64]]) {
    for q in previous {
        let dot: f64 = x.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(q.iter()).for_each(|(a, b)| *a -= dot * b);
    }
}

/// Makes the first significant component positive.
fn fix_sign(x: &mut [f64]) {
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-8 * peak) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// LU factorization of `T - shift I` with partial pivoting. Row interchanges
/// fill a second superdiagonal, so each row of U has up to three entries.
struct ShiftedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    multipliers: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64, norm: f64) -> Self {
        let n = t.len();
        let tiny = f64::EPSILON * norm;
        let guard = |p: f64| {
            if p.abs() < tiny {
                if p < 0.0 {
                    -tiny
                } else {
                    tiny
                }
            } else {
                p
            }
        };
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut multipliers = vec![0.0; n];
        let mut swapped = vec![false; n];

        // Row carried into step j after eliminating column j-1: entries at
        // columns j and j+1.
        let mut carry0 = t.diagonal[0] - shift;
        let mut carry1 = if n > 1 { t.off_diagonal[0] } else { 0.0 };
        for j in 0..n.saturating_sub(1) {
            let sub = t.off_diagonal[j];
            let next_diag = t.diagonal[j + 1] - shift;
            let next_up = if j + 2 < n {
                t.off_diagonal[j + 1]
            } else {
                0.0
            };
            if carry0.abs() >= sub.abs() {
                let pivot = guard(carry0);
                let m = sub / pivot;
                u0[j] = pivot;
                u1[j] = carry1;
                u2[j] = 0.0;
                multipliers[j] = m;
                carry0 = next_diag - m * carry1;
                carry1 = next_up;
            } else {
                let m = carry0 / sub;
                u0[j] = sub;
                u1[j] = next_diag;
                u2[j] = next_up;
                multipliers[j] = m;
                swapped[j] = true;
                carry0 = carry1 - m * next_diag;
                carry1 = -m * next_up;
            }
        }
        u0[n - 1] = guard(carry0);
        Self {
            u0,
            u1,
            u2,
            multipliers,
            swapped,
        }
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = b.len();
        // Forward elimination mirrors the factorization.
        let mut carry = b[0];
        for j in 0..n.saturating_sub(1) {
            let next = b[j + 1];
            let m = self.multipliers[j];
            if self.swapped[j] {
                b[j] = next;
                carry -= m * next;
            } else {
                b[j] = carry;
                carry = next - m * carry;
            }
        }
        b[n - 1] = carry;
        // Back substitution.
        for j in (0..n).rev() {
            let mut s = b[j];
            if j + 1 < n {
                s -= self.u1[j] * b[j + 1];
            }
            if j + 2 < n {
                s -= self.u2[j] * b[j + 2];
            }
            b[j] = s / self.u0[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Second-difference matrix tridiag(-1, 2, -1) has eigenvalues
    /// 2 - 2 cos(k pi / (n + 1)).
    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn laplacian_spectrum() {
        let n = 50;
        let t = laplacian(n);
        let values = t.lowest_eigenvalues(n).unwrap();
        for (k, v) in values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "k={k}: {v} vs {exact}");
        }
    }

    #[test]
    fn sturm_count_brackets() {
        let t = laplacian(10);
        assert_eq!(t.sturm_count(-1.0), 0);
        assert_eq!(t.sturm_count(5.0), 10);
        assert_eq!(t.sturm_count(2.0 - 1e-9), 5);
    }

    #[test]
    fn eigenvectors_match_sines() {
        let n = 40;
        let t = laplacian(n);
        let values = t.lowest_eigenvalues(3).unwrap();
        let mut accepted: Vec<Vec<f64>> = Vec::new();
        for (k, &lambda) in values.iter().enumerate() {
            let prev: Vec<&[f64]> = accepted.iter().map(Vec::as_slice).collect();
            let v = t.inverse_iteration(lambda, &prev, k + 1).unwrap();
            let mut exact: Vec<f64> = (1..=n)
                .map(|i| ((k + 1) as f64 * i as f64 * std::f64::consts::PI / (n + 1) as f64).sin())
                .collect();
            normalize(&mut exact);
            let err = v
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "level {k}: {err}");
            accepted.push(v);
        }
    }

    #[test]
    fn lu_solve_matches_matrix() {
        // Shift inside the spectrum forces row interchanges.
        let t = SymTridiagonal::new(vec![1.0, -3.0, 0.5, 2.0, -1.0], vec![4.0, 0.2, -5.0, 1.5])
            .unwrap();
        let shift = 0.3;
        let lu = ShiftedLu::factor(&t, shift, t.norm());
        assert!(lu.swapped.iter().any(|s| *s));
        let x_true = [1.0, -2.0, 0.5, 3.0, -1.0];
        let mut b = vec![0.0; 5];
        for i in 0..5 {
            b[i] = (t.diagonal[i] - shift) * x_true[i];
            if i > 0 {
                b[i] += t.off_diagonal[i - 1] * x_true[i - 1];
            }
            if i < 4 {
                b[i] += t.off_diagonal[i] * x_true[i + 1];
            }
        }
        lu.solve_in_place(&mut b);
        for (a, e) in b.iter().zip(x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let t = laplacian(4);
        assert!(t.lowest_eigenvalues(0).is_err());
        assert!(t.lowest_eigenvalues(5).is_err());
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        let bad = SymTridiagonal::new(vec![1.0, f64::NAN], vec![1.0]).unwrap();
        assert!(bad.lowest_eigenvalues(1).is_err());
    }

    #[test]
    fn one_by_one() {
        let t = SymTridiagonal::new(vec![2.5], vec![]).unwrap();
        assert!((t.lowest_eigenvalues(1).unwrap()[0] - 2.5).abs() < 4.0 * f64::EPSILON);
        let v = t.inverse_iteration(2.5, &[], 1).unwrap();
        assert_eq!(v, vec![1.0]);
    }
}
