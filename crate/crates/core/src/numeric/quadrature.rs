//! Globally adaptive Gauss–Kronrod (10/21 point) integration.
//!
//! Semi-infinite ranges are folded onto `(0, 1]` with `x = a + s(1 - t)/t`,
//! the scale `s = max(1, |a|)` matching the decay length of power tails.
//! Intervals are kept in a max-heap keyed by their error estimate; the worst
//! one is bisected until the summed error meets the tolerance or the
//! subdivision cap is reached.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::QuadError;
use crate::numeric::sum::NeumaierSum;
use crate::scalar::Real;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_643_474,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Value and absolute error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub abs_err: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
enum Map<T> {
    Identity,
    /// `x = origin + scale (1 - t)/t`, `t ∈ (0, 1]`
    HalfLine(T, T),
}

impl<T: Real> Map<T> {
    #[inline]
    fn eval<F: Fn(T) -> T>(&self, f: &F, t: T) -> T {
        match *self {
            Map::Identity => f(t),
            Map::HalfLine(origin, scale) => {
                let x = origin + scale * (T::one() - t) / t;
                let y = f(x);
                if y == T::zero() {
                    T::zero()
                } else {
                    y * scale / (t * t)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece<T> {
    lo: T,
    hi: T,
    map: Map<T>,
    value: T,
    err: T,
}

impl<T: Real> PartialEq for Piece<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Piece<T> {}
impl<T: Real> PartialOrd for Piece<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Piece<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.to_f64_lossy().total_cmp(&other.err.to_f64_lossy())
    }
}

fn gauss_kronrod<T: Real, F: Fn(T) -> T>(f: &F, map: Map<T>, lo: T, hi: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (lo + hi);
    let half_len = half * (hi - lo);
    let f_center = map.eval(f, center);

    let mut res_k = f_center * T::lit(WGK[10]);
    let mut res_g = T::zero();
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..10 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = map.eval(f, center - dx);
        let f2 = map.eval(f, center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k = res_k + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[10]) * (f_center - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let abs_half = half_len.abs();
    let value = res_k * half_len;
    res_abs = res_abs * abs_half;
    res_asc = res_asc * abs_half;
    let mut err = ((res_k - res_g) * half_len).abs();

    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let tiny = T::min_positive_value() / (T::lit(50.0) * T::epsilon());
    if res_abs > tiny {
        err = err.max(T::lit(50.0) * T::epsilon() * res_abs);
    }
    (value, err)
}

/// Adaptive integrator configuration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for Quadrature<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-8).max(T::quad_floor()),
            abs_tol: T::zero(),
            max_subdivisions: 4000,
        }
    }
}

impl<T: Real> Quadrature<T> {
    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol.max(T::quad_floor());
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// `∫_a^b f`. `b` may be `+inf`.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F, a: T, b: T) -> Result<Integral<T>, QuadError> {
        self.integrate_pieces(f, &[a, b])
    }

    /// Integral over consecutive breakpoints `points[0] < points[1] < ...`.
    /// The last point may be `+inf`. Breakpoints let the caller pin kinks and
    /// peaks the initial partition would otherwise straddle.
    pub fn integrate_pieces<F: Fn(T) -> T>(&self, f: F, points: &[T]) -> Result<Integral<T>, QuadError> {
        let mut heap = BinaryHeap::new();
        let mut evaluations = 0usize;
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.is_nan() || b.is_nan() || a == T::neg_infinity() {
                return Err(QuadError::BadRange);
            }
            if !(b > a) {
                continue;
            }
            let (lo, hi, map) = if b == T::infinity() {
                (T::zero(), T::one(), Map::HalfLine(a, a.abs().max(T::one())))
            } else {
                (a, b, Map::Identity)
            };
            let (value, err) = gauss_kronrod(&f, map, lo, hi);
            evaluations += 21;
            heap.push(Piece { lo, hi, map, value, err });
        }
        if heap.is_empty() {
            return Ok(Integral { value: T::zero(), abs_err: T::zero(), evaluations });
        }

        let mut subdivisions = heap.len();
        loop {
            let (total, total_err) = totals(&heap);
            if !total.is_finite() || !total_err.is_finite() {
                return Err(QuadError::NonFinite);
            }
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= target {
                return Ok(Integral { value: total, abs_err: total_err, evaluations });
            }
            if subdivisions >= self.max_subdivisions {
                return Err(QuadError::NonConvergence {
                    value: total.to_f64_lossy(),
                    abs_err: total_err.to_f64_lossy(),
                });
            }
            let worst = heap.pop().expect("heap nonempty");
            let mid = T::lit(0.5) * (worst.lo + worst.hi);
            let width = worst.hi - worst.lo;
            if width <= T::lit(4.0) * T::epsilon() * mid.abs().max(T::min_positive_value()) {
                // cannot bisect further; everything else is already below this error
                return Err(QuadError::NonConvergence {
                    value: total.to_f64_lossy(),
                    abs_err: total_err.to_f64_lossy(),
                });
            }
            for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
                let (value, err) = gauss_kronrod(&f, worst.map, lo, hi);
                evaluations += 21;
                heap.push(Piece { lo, hi, map: worst.map, value, err });
            }
            subdivisions += 1;
        }
    }
}

fn totals<T: Real>(heap: &BinaryHeap<Piece<T>>) -> (T, T) {
    let mut v = NeumaierSum::new();
    let mut e = NeumaierSum::new();
    for p in heap.iter() {
        v.add(p.value);
        e.add(p.err);
    }
    (v.value(), e.value())
}
