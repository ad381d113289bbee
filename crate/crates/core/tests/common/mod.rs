//! Test-only reference solver: outward Numerov integration of the radial
//! equation with bisection on the node count of `u(r)` over `[0, r_max]`.
//! Shares no code with the library.

#![allow(dead_code)]

pub fn screened(beta: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| -(-beta / r).exp() / r
}

pub fn truncated(beta: f64, p: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| -1.0 / (r.powf(p) + beta.powf(p)).powf(1.0 / p)
}

pub fn coulomb(r: f64) -> f64 {
    -1.0 / r
}

/// Sign changes of the outward solution at energy `e`.
fn nodes(v: &dyn Fn(f64) -> f64, l: u32, e: f64, r_max: f64, h: f64) -> usize {
    let n = (r_max / h).round() as usize;
    let ll = f64::from(l * (l + 1));
    let q = |r: f64| 2.0 * (e - v(r)) - ll / (r * r);
    let c = h * h / 12.0;
    let mut u_prev = 0.0_f64;
    let mut u = h.powi(l as i32 + 1);
    let mut q_prev = 0.0;
    let mut q_cur = q(h);
    let mut count = 0;
    for i in 1..n {
        let r_next = (i + 1) as f64 * h;
        let q_next = q(r_next);
        let lhs = 2.0 * u * (1.0 - 5.0 * c * q_cur) - u_prev * (1.0 + c * q_prev);
        let u_next = lhs / (1.0 + c * q_next);
        if u_next == 0.0 || u_next.signum() != u.signum() {
            count += 1;
        }
        u_prev = u;
        u = u_next;
        q_prev = q_cur;
        q_cur = q_next;
        if u.abs() > 1e200 {
            u_prev *= 1e-200;
            u *= 1e-200;
        }
    }
    count
}

/// k-th level (1-based) by bisection on the node count, in `[lo, 0)`.
pub fn level(v: &dyn Fn(f64) -> f64, l: u32, k: usize, lo: f64, r_max: f64, h: f64) -> f64 {
    let (mut a, mut b) = (lo, 0.0);
    assert!(nodes(v, l, a, r_max, h) < k, "lower bound too high");
    assert!(nodes(v, l, b, r_max, h) >= k, "level not bound in the box");
    while b - a > 1e-13 {
        let m = 0.5 * (a + b);
        if nodes(v, l, m, r_max, h) >= k {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}
