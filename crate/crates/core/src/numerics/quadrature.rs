//! Globally adaptive Gauss–Kronrod (10/21) quadrature over `[0, ∞)`.
//!
//! The half-line is split at `z = 1`. The head `[0, 1]` is integrated
//! directly; the tail is either mapped onto `(0, 1]` with `z = s^(−p)`, or cut
//! off and closed with a power-law tail estimate. Both pieces share a single
//! priority queue, so the error budget goes where it is needed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// How the infinite tail `[1, ∞)` is handled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailPolicy {
    /// Map `z = s^(−power)`, `s ∈ (0, 1]`. An integrand decaying like
    /// `z^(−1−d)` becomes `power · s^(power·d − 1)` near `s = 0`, which is
    /// smooth when `power·d` is a positive integer.
    Substitution { power: f64 },
    /// Integrate `[1, cutoff]` and add `f(cutoff)·cutoff/decay_exponent`,
    /// the exact tail of `C·z^(−1−decay_exponent)`. The magnitude of the tail
    /// term is added to the reported error estimate but not to the
    /// convergence test, which only covers the truncated integral.
    TruncationWithBound { cutoff: f64, decay_exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    pub max_subdivisions: usize,
    pub tail: TailPolicy,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-9,
            abs_tolerance: 1e-12,
            max_subdivisions: 2000,
            tail: TailPolicy::Substitution { power: 2.0 },
        }
    }
}

impl QuadratureOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.abs_tolerance > 0.0) {
            return Err(Error::domain("quadrature tolerances must be strictly positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        match self.tail {
            TailPolicy::Substitution { power } if !(power > 0.0 && power.is_finite()) => {
                Err(Error::domain(format!("tail substitution power {power} must be positive")))
            }
            TailPolicy::TruncationWithBound { cutoff, decay_exponent }
                if !(cutoff > 1.0 && cutoff.is_finite() && decay_exponent > 0.0) =>
            {
                Err(Error::domain("truncation cutoff must exceed 1 and decay exponent be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Same tolerances, with the tail substitution power replaced.
    pub fn with_tail_power(mut self, power: f64) -> Self {
        if let TailPolicy::Substitution { .. } = self.tail {
            self.tail = TailPolicy::Substitution { power };
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// `∫₀^∞ f(z) dz`.
///
/// `f` is never evaluated at `z = 0` or at infinity. It may be singular at
/// `0+` as long as the singularity is integrable.
pub fn integrate_semi_infinite<F>(f: F, opts: &QuadratureOptions) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    opts.validate()?;
    match opts.tail {
        TailPolicy::Substitution { power } => {
            // t ∈ [0, 1] is z itself; t ∈ [−1, 0) is the tail with s = −t.
            // Both possibly singular ends sit at t = 0, where the float grid
            // is finest; a tail coordinate like 2 − t would lose everything
            // below s ≈ 1e−16.
            let g = |t: f64| {
                if t >= 0.0 {
                    f(t)
                } else {
                    let s = -t;
                    let z = s.powf(-power);
                    let jac = power * s.powf(-power - 1.0);
                    if !z.is_finite() || !jac.is_finite() {
                        return 0.0;
                    }
                    f(z) * jac
                }
            };
            adaptive(&g, &[-1.0, 0.0, 1.0], opts, 0.0, 0.0)
        }
        TailPolicy::TruncationWithBound { cutoff, decay_exponent } => {
            let tail = f(cutoff) * cutoff / decay_exponent;
            if !tail.is_finite() {
                return Err(Error::domain("integrand is not finite at the truncation cutoff"));
            }
            adaptive(&f, &[0.0, 1.0, cutoff], opts, tail, tail.abs())
        }
    }
}

/// `∫_a^b f(x) dx` on a finite interval with the same adaptive scheme.
pub fn integrate_finite<F>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    opts.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate_finite needs finite limits"));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error_estimate: 0.0, subdivisions: 0 });
    }
    if a > b {
        let r = integrate_finite(f, b, a, opts)?;
        return Ok(Integral { value: -r.value, ..r });
    }
    adaptive(&f, &[a, b], opts, 0.0, 0.0)
}

// Kronrod abscissae (descending) and weights; Gauss weights pair with the
// odd-indexed Kronrod abscissae.
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
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_424_230,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    // Largest error first; ties broken by position so the order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = (fc * WGK[10]).abs();
    let mut f1 = [0.0; 10];
    let mut f2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let y1 = f(center - dx);
        let y2 = f(center + dx);
        f1[j] = y1;
        f2[j] = y2;
        resk += WGK[j] * (y1 + y2);
        resabs += WGK[j] * (y1.abs() + y2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (y1 + y2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((f1[j] - mean).abs() + (f2[j] - mean).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value, error }
}

fn adaptive<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    breakpoints: &[f64],
    opts: &QuadratureOptions,
    extra_value: f64,
    extra_error: f64,
) -> Result<Integral> {
    let mut heap: BinaryHeap<Segment> = breakpoints
        .windows(2)
        .map(|w| gk21(f, w[0], w[1]))
        .collect();
    let mut subdivisions = heap.len();

    let totals = |heap: &BinaryHeap<Segment>| {
        let mut segs: Vec<&Segment> = heap.iter().collect();
        segs.sort_by(|x, y| x.a.total_cmp(&y.a));
        let value: f64 = segs.iter().map(|s| s.value).sum::<f64>() + extra_value;
        let error: f64 = segs.iter().map(|s| s.error).sum::<f64>();
        (value, error)
    };

    let (mut value, mut error) = totals(&heap);
    loop {
        let reported = error + extra_error;
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature { value, error_estimate: reported, subdivisions });
        }
        let tol = opts.abs_tolerance.max(opts.rel_tolerance * value.abs());
        if error <= tol {
            return Ok(Integral { value, error_estimate: reported, subdivisions });
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::Quadrature { value, error_estimate: reported, subdivisions });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval can no longer be split in floating point.
            return Err(Error::Quadrature { value, error_estimate: reported, subdivisions });
        }
        let left = gk21(f, worst.a, mid);
        let right = gk21(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        // Periodic resummation keeps the running totals from drifting.
        if subdivisions % 64 == 0 {
            (value, error) = totals(&heap);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponential_integrates_to_one() {
        let r = integrate_semi_infinite(|z| (-z).exp(), &QuadratureOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn lorentzian_integrates_to_half_pi() {
        let r = integrate_semi_infinite(|z| 1.0 / (1.0 + z * z), &QuadratureOptions::default()).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫₀^∞ z^(−1/2) e^(−z) dz = √π
        let r = integrate_semi_infinite(|z| z.powf(-0.5) * (-z).exp(), &QuadratureOptions::default()).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-9 * PI.sqrt(), "{}", r.value);
    }

    #[test]
    fn slow_power_tail() {
        // ∫₀^∞ (1+z)^(−1.5) dz = 2, decay exponent 1/2
        let opts = QuadratureOptions::default().with_tail_power(4.0);
        let r = integrate_semi_infinite(|z| (1.0 + z).powf(-1.5), &opts).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn truncation_mode_is_close_for_power_tails() {
        let opts = QuadratureOptions {
            tail: TailPolicy::TruncationWithBound { cutoff: 1e6, decay_exponent: 1.0 },
            ..QuadratureOptions::default()
        };
        let r = integrate_semi_infinite(|z| 1.0 / (1.0 + z * z), &opts).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-9, "{}", r.value);
        assert!(r.error_estimate >= 1e-7);
    }

    #[test]
    fn finite_interval_and_orientation() {
        let opts = QuadratureOptions::default();
        let r = integrate_finite(|x| x.sin(), 0.0, PI, &opts).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = integrate_finite(|x| x.sin(), PI, 0.0, &opts).unwrap();
        assert!((r.value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn reports_failure_with_estimate() {
        let opts = QuadratureOptions { max_subdivisions: 3, rel_tolerance: 1e-15, abs_tolerance: 1e-300, ..Default::default() };
        let err = integrate_semi_infinite(|z| (1.0 / z).sin().abs() + (-z).exp(), &opts).unwrap_err();
        assert!(err.is_convergence_failure());
        match err {
            Error::Quadrature { error_estimate, subdivisions, .. } => {
                assert!(error_estimate > 0.0);
                assert_eq!(subdivisions, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_spec() {
        let bad = QuadratureOptions { rel_tolerance: 0.0, ..Default::default() };
        assert!(integrate_semi_infinite(|z| (-z).exp(), &bad).is_err());
        let bad = QuadratureOptions { max_subdivisions: 0, ..Default::default() };
        assert!(integrate_semi_infinite(|z| (-z).exp(), &bad).is_err());
    }

    #[test]
    fn deterministic() {
        let f = |z: f64| (1.0 + z).powf(-1.5) * (2.0 + (-z).exp() * z.sin());
        let a = integrate_semi_infinite(f, &QuadratureOptions::default()).unwrap();
        let b = integrate_semi_infinite(f, &QuadratureOptions::default()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
