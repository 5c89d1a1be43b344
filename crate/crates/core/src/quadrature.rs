//! Globally adaptive 21-point Gauss–Kronrod quadrature with a composite
//! Simpson/Richardson fallback.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_intervals: 5_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for (j, x) in XGK.iter().take(10).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    // plain |K - G| estimate; the QUADPACK rescaling is too optimistic for the
    // near-polynomial integrands seen here at tight tolerances
    let error = ((kronrod - gauss) * half).abs() + 50.0 * f64::EPSILON * value.abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`.
///
/// Subdivides the segment with the largest error estimate until the summed
/// estimate is below `max(abs_tol, rel_tol * |I|)`. If the interval budget is
/// exhausted, falls back to [`simpson_richardson`]; if that also fails a
/// numerical-failure error is returned.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration bounds must be finite: [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if b < a {
        let r = integrate(f, b, a, opts)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }

    let mut heap = BinaryHeap::new();
    let first = kronrod21(f, a, b);
    let (mut value, mut error) = (first.value, first.error);
    heap.push(first);
    let mut evaluations = 21;

    loop {
        if !value.is_finite() {
            return Err(Error::numerical(a, "integrand is not finite"));
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= opts.max_intervals {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            break;
        }
        let left = kronrod21(f, worst.a, mid);
        let right = kronrod21(f, mid, worst.b);
        evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // refresh sums periodically against drift from the running updates
        if heap.len() % 256 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }

    simpson_richardson(f, a, b, opts)
}

/// Composite Simpson rule with panel doubling; the Richardson-corrected
/// estimate `S_2n + (S_2n - S_n) / 15` is returned once successive corrected
/// values agree to tolerance.
pub fn simpson_richardson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    const MAX_LEVEL: u32 = 20;
    let mut n: usize = 2;
    let h0 = b - a;
    let fa = f(a);
    let fb = f(b);
    // running sums of odd and even interior ordinates
    let mut even = 0.0;
    let mut odd = f(a + 0.5 * h0);
    let mut evaluations = 3;
    let simpson =
        |n: usize, even: f64, odd: f64| (h0 / n as f64) / 3.0 * (fa + fb + 4.0 * odd + 2.0 * even);
    let mut coarse = simpson(n, even, odd);
    let mut previous: Option<f64> = None;

    for _ in 0..MAX_LEVEL {
        even += odd;
        n *= 2;
        let h = h0 / n as f64;
        odd = (0..n / 2).map(|k| f(a + (2 * k + 1) as f64 * h)).sum();
        evaluations += n / 2;
        let fine = simpson(n, even, odd);
        let corrected = fine + (fine - coarse) / 15.0;
        if !corrected.is_finite() {
            return Err(Error::numerical(a, "integrand is not finite"));
        }
        if let Some(prev) = previous {
            let err = (corrected - prev).abs();
            if err <= opts.abs_tol.max(opts.rel_tol * corrected.abs()) {
                return Ok(QuadResult {
                    value: corrected,
                    error: err,
                    evaluations,
                });
            }
        }
        previous = Some(corrected);
        coarse = fine;
    }
    Err(Error::numerical(b, "quadrature did not converge"))
}
