//! Adaptive Gauss–Kronrod quadrature, semi-infinite helpers and Wynn's
//! epsilon algorithm for alternating series.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_9,
];

/// Four-point Gauss–Legendre nodes and weights on [-1, 1].
pub const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
pub const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

const MAX_INTERVALS: usize = 4000;

/// Result of a quadrature call.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// One 21-point Kronrod rule with the embedded 10-point Gauss rule.
/// Returns (integral, error estimate).
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let dhlgth = hlgth.abs();

    let fc = f(centr);
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let absc = hlgth * XGK[j];
        let f1 = f(centr - absc);
        let f2 = f(centr + absc);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * hlgth;
    resabs *= dhlgth;
    resasc *= dhlgth;
    let mut abserr = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && abserr != 0.0 {
        abserr = resasc * (200.0 * abserr / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        abserr = abserr.max(50.0 * f64::EPSILON * resabs);
    }
    (result, abserr)
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration over the partition given by `breaks`
/// (sorted, at least two points). Stops when the summed error estimate is
/// below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Integral> {
    if breaks.len() < 2 {
        return Err(Error::domain("quadrature needs at least one interval"));
    }
    // the 21-point error estimate never drops below ~50 ulp of the integral
    let rel_tol = rel_tol.max(200.0 * f64::EPSILON);
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    // error contributions of intervals too small to split further
    let mut frozen_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = gk21(&mut f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Piece { a: w[0], b: w[1], value: v, error: e });
    }
    if !total.is_finite() {
        return Err(Error::numeric("non-finite integrand", f64::INFINITY));
    }
    let mut count = heap.len();
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol {
            return Ok(Integral { value: total, error: total_err });
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if count >= MAX_INTERVALS {
            heap.push(p);
            break;
        }
        if (p.b - p.a).abs() <= 1e3 * f64::EPSILON * p.a.abs().max(p.b.abs()).max(1e-300) {
            frozen_err += p.error;
            continue;
        }
        let (v1, e1) = gk21(&mut f, p.a, mid);
        let (v2, e2) = gk21(&mut f, mid, p.b);
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        if !total.is_finite() {
            return Err(Error::numeric("non-finite integrand", f64::INFINITY));
        }
        heap.push(Piece { a: p.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: p.b, value: v2, error: e2 });
        count += 1;
    }
    let tol = abs_tol.max(rel_tol * total.abs());
    // Only irreducible (roundoff-level) pieces remain: accept if close.
    if total_err <= 100.0 * tol || (heap.is_empty() && total_err - frozen_err <= tol) {
        return Ok(Integral { value: total, error: total_err });
    }
    Err(Error::numeric(
        format!("adaptive quadrature hit the subdivision limit (value {total:e})"),
        total_err,
    ))
}

/// Adaptive integral over [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral> {
    integrate_breaks(f, &[a, b], rel_tol, abs_tol)
}

/// Adaptive integral over [a, b] split into `n` equal pieces up front.
pub fn integrate_split<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    n: usize,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Integral> {
    let n = n.max(1);
    let breaks: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
    integrate_breaks(f, &breaks, rel_tol, abs_tol)
}

/// Integral over [a, ∞) via the map x = a + (1 − t)/t.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral> {
    let g = |t: f64| {
        let x = a + (1.0 - t) / t;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v / (t * t)
        }
    };
    integrate_split(g, 0.0, 1.0, 4, rel_tol, abs_tol)
}

/// ∫_0^c g(v) dv for a function decaying in v, integrated on doubling
/// chunks [0,1], [1,2], [2,4], ... until a chunk contributes less than
/// `rel_tol` of the running total (or `v_max` is reached).
pub fn integrate_decaying<F: FnMut(f64) -> f64>(mut g: F, v_max: f64, rel_tol: f64) -> Result<Integral> {
    let mut lo = 0.0;
    let mut hi = 1.0_f64.min(v_max);
    let mut total = 0.0;
    let mut err = 0.0;
    loop {
        let piece = integrate(&mut g, lo, hi, rel_tol * 0.1, 0.0)?;
        total += piece.value;
        err += piece.error;
        if hi >= v_max {
            break;
        }
        if piece.value.abs() <= rel_tol * 1e-3 * total.abs() && hi >= 8.0 {
            break;
        }
        if hi > 2000.0 {
            return Err(Error::numeric("integrand does not decay", piece.value.abs()));
        }
        lo = hi;
        hi = (2.0 * hi).min(v_max);
    }
    Ok(Integral { value: total, error: err })
}

/// Wynn's epsilon extrapolation of a sequence of partial sums.
/// Returns the extrapolated limit and a crude error estimate
/// (distance between the last two even-column estimates).
pub fn wynn_epsilon(sums: &[f64]) -> (f64, f64) {
    let n = sums.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n < 3 {
        let last = sums[n - 1];
        let err = if n == 2 { (sums[1] - sums[0]).abs() } else { f64::INFINITY };
        return (last, err);
    }
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut estimates = vec![sums[n - 1]];
    let mut k = 0usize;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        let mut ok = true;
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            if d == 0.0 || !d.is_finite() {
                ok = false;
                break;
            }
            let em1 = if k == 0 { 0.0 } else { prev[j + 1] };
            next.push(em1 + 1.0 / d);
        }
        if !ok {
            break;
        }
        k += 1;
        if k % 2 == 0 {
            match next.last() {
                Some(&v) if v.is_finite() => estimates.push(v),
                _ => break,
            }
        }
        prev = cur;
        cur = next;
    }
    let m = estimates.len();
    let best = estimates[m - 1];
    let err = if m >= 2 {
        (estimates[m - 1] - estimates[m - 2]).abs()
    } else {
        (sums[n - 1] - sums[n - 2]).abs()
    };
    (best, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_for_polynomials() {
        let (v, _) = gk21(&mut |x: f64| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let i = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((i.value - 2.0).abs() < 1e-9, "{}", i.value);
    }

    #[test]
    fn infinite_range() {
        let i = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1e-12, 0.0).unwrap();
        assert!((i.value - 1.0).abs() < 1e-11);
        let i = integrate_to_infinity(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1e-10, 0.0).unwrap();
        assert!((i.value - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let (v, _) = wynn_epsilon(&sums);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12, "{v}");
    }
}
