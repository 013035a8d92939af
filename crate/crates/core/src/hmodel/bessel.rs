//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Power series about the origin for `x <= 2`; above that, Steed's
//! continued fraction with Temme's normalization sum (the ν = 0 case of the
//! classic `bessik` scheme), which converges quickly for large `x` and stays
//! accurate to a few ulps at the switch point.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const EPS: f64 = 1e-17;
const MAX_TERMS: usize = 100_000;

fn series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    // K0: -(ln(x/2) + γ) I0 + Σ_{k≥1} y^k / (k!)² H_k
    // K1: 1/x + ln(x/2) I1 - (x/4) Σ_{k≥0} (ψ(k+1) + ψ(k+2)) y^k / (k! (k+1)!)
    let mut i0 = 1.0;
    let mut i1 = 0.5 * x;
    let mut k0_sum = 0.0;
    let mut term0 = 1.0; // y^k / (k!)²
    let mut term1 = 1.0; // y^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut k1_sum = 1.0 - 2.0 * EULER_GAMMA; // k = 0: ψ(1) + ψ(2)
    for k in 1..200 {
        let kf = k as f64;
        term0 *= y / (kf * kf);
        term1 *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        i0 += term0;
        i1 += 0.5 * x * term1;
        k0_sum += term0 * harmonic;
        let psi_sum = 2.0 * (harmonic - EULER_GAMMA) + 1.0 / (kf + 1.0);
        k1_sum += psi_sum * term1;
        if term0 < EPS * i0 && term1 < EPS * k1_sum.abs() {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_sum;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * k1_sum;
    (k0, k1)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `(K0(x), K1(x))` for `x > 0`; callers check the domain.
pub(crate) fn k0_k1(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= SERIES_LIMIT {
        series(x)
    } else {
        continued_fraction(x)
    }
}
