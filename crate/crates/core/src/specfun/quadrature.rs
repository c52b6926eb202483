use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::invalid("abs_tol", "must be > 0"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol", "must be > 0"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::invalid("max_subdivisions", "must be >= 1"));
        }
        Ok(())
    }

    /// Same relative tolerance and budget with a different absolute floor.
    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        QuadratureSpec { abs_tol, ..self }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
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
    0.123_491_976_262_065_851_077_600_525_597_000,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// weights of the Gauss nodes XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
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
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut kronrod = WGK[10] * f_center;
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() {
        return Err(Error::Domain(format!(
            "integrand is not finite on [{lo:e}, {hi:e}]"
        )));
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();

    // QUADPACK error rescaling
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }
    Ok(Segment {
        lo,
        hi,
        value,
        error,
    })
}

/// Adaptive 21-point Gauss-Kronrod quadrature of `f` over `[lo, hi]`.
///
/// The interval with the largest error estimate is bisected until the total
/// error is at most `max(abs_tol, rel_tol * |result|)`. Endpoints are never
/// evaluated.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain("integration limits must be finite".into()));
    }
    if lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return Err(Error::Domain(format!("require lo < hi, got [{lo}, {hi}]")));
    }

    let first = gauss_kronrod(&f, lo, hi)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::with_capacity(spec.max_subdivisions + 1);
    heap.push(first);

    while error > spec.target(value) && heap.len() < spec.max_subdivisions {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval at floating-point resolution; cannot refine further
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod(&f, worst.lo, mid)?;
        let right = gauss_kronrod(&f, mid, worst.hi)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // re-sum to shed the drift of incremental updates
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    if error <= spec.target(value) {
        Ok(value)
    } else {
        Err(Error::QuadratureConvergence {
            estimate: value,
            error_bound: error,
        })
    }
}

/// Quadrature of an integrand with at worst a logarithmic singularity at `lo`.
///
/// Substitutes `x = lo + (hi - lo) u^2`, which turns `ln(x - lo)` behaviour
/// into the bounded `u ln u`, then integrates adaptively in `u`. `f` is never
/// called at `lo` itself.
pub fn quad_log_endpoint<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Domain(format!("require lo < hi, got [{lo}, {hi}]")));
    }
    let width = hi - lo;
    let mapped = |u: f64| {
        let x = lo + width * u * u;
        if x <= lo {
            0.0
        } else {
            2.0 * width * u * f(x)
        }
    };
    integrate(mapped, 0.0, 1.0, spec)
}

/// `∫_0^r0 exp(-decay_rate τ) τ^(l+1) ln τ dτ`.
pub fn h_l_integral(l: u32, decay_rate: f64, r0: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Domain(format!(
            "upper limit must be positive, got {r0}"
        )));
    }
    if !decay_rate.is_finite() {
        return Err(Error::Domain("decay rate must be finite".into()));
    }
    let power = l as i32 + 1;
    quad_log_endpoint(
        |t| (-decay_rate * t).exp() * t.powi(power) * t.ln(),
        0.0,
        r0,
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        let spec = QuadratureSpec::default();
        for deg in [0, 5, 19, 30, 31] {
            let seg = gauss_kronrod(&|x: f64| x.powi(deg), 0.0, 1.0).unwrap();
            let want = 1.0 / (deg as f64 + 1.0);
            assert!((seg.value - want).abs() < 1e-15, "degree {deg}");
        }
        // gauss part alone exact to degree 19: error estimate should be ~0
        let seg = gauss_kronrod(&|x: f64| x.powi(19), -1.0, 1.0).unwrap();
        assert!(seg.error < 1e-14);
        assert!(integrate(|x| x.powi(4), -1.0, 1.0, &spec).is_ok());
    }

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrals() {
        let spec = QuadratureSpec::default();
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x| (-x).exp(), 0.0, 1e4, &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
        assert_eq!(integrate(|x| x, 3.0, 3.0, &spec).unwrap(), 0.0);
    }

    #[test]
    fn log_endpoint_antiderivatives() {
        let spec = QuadratureSpec::default();
        let v = quad_log_endpoint(|t| t.ln(), 0.0, 1.0, &spec).unwrap();
        assert!((v + 1.0).abs() < 1e-9);
        let v = quad_log_endpoint(|t| t * t.ln(), 0.0, 1.0, &spec).unwrap();
        assert!((v + 0.25).abs() < 1e-9);
        // shifted endpoint: ∫_2^3 ln(x-2) dx = -1
        let v = quad_log_endpoint(|x| (x - 2.0).ln(), 2.0, 3.0, &spec).unwrap();
        assert!((v + 1.0).abs() < 1e-9);
    }

    #[test]
    fn h_l_reduces_to_moments() {
        let spec = QuadratureSpec::default();
        let v = h_l_integral(0, 0.0, 1.0, &spec).unwrap();
        assert!((v + 0.25).abs() < 1e-12);
        let v = h_l_integral(1, 0.0, 1.0, &spec).unwrap();
        assert!((v + 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let spec = QuadratureSpec::new(1e-14, 1e-14, 3).unwrap();
        match quad_log_endpoint(|t| t.ln() * (50.0 * t).sin(), 0.0, 1.0, &spec) {
            Err(Error::QuadratureConvergence {
                estimate,
                error_bound,
            }) => {
                assert!(estimate.is_finite());
                assert!(error_bound > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_inputs() {
        let spec = QuadratureSpec::default();
        assert!(quad_log_endpoint(|t| t, 1.0, 0.0, &spec).is_err());
        assert!(h_l_integral(0, 1.0, 0.0, &spec).is_err());
        assert!(QuadratureSpec::new(0.0, 1e-3, 10).is_err());
        assert!(QuadratureSpec::new(1e-3, 1e-3, 0).is_err());
    }
}
