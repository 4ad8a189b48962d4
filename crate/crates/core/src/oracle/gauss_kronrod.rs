//! Globally adaptive 15-point Gauss–Kronrod quadrature in one dimension.
//!
//! Integrands return a `(value, error)` pair so that nested integrals can
//! propagate the error of their inner quadrature into the outer estimate.
//! Leaf integrands simply return an error of zero.

/// Kronrod abscissae on [-1, 1], descending; the last one is the centre.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss weights for the abscissae XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const ROUNDOFF_FLOOR: f64 = 50.0 * f64::EPSILON;

/// Absolute / relative tolerance pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }

    pub fn bound(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    propagated: f64,
    floor: f64,
}

impl Segment {
    fn improvable(&self) -> bool {
        self.error > self.floor * 1.000_001
    }
}

/// Result of a one-dimensional adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral1d {
    pub value: f64,
    /// Discretisation error plus propagated inner error.
    pub error: f64,
    pub evaluations: u64,
    pub segments: usize,
    pub converged: bool,
}

fn gk15<F>(f: &mut F, a: f64, b: f64, evals: &mut u64) -> Segment
where
    F: FnMut(f64) -> (f64, f64),
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // QUADPACK qk15 with its rescaled error estimate.
    let (fc, ec) = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    let mut propagated = ec.abs() * WGK[7];
    let mut nodes = [(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, e1) = f(centre - dx);
        let (f2, e2) = f(centre + dx);
        nodes[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        propagated += WGK[j] * (e1.abs() + e2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    *evals += 15;
    let value = kronrod * half;
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in nodes.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    resasc *= half.abs();
    let floor = ROUNDOFF_FLOOR * resabs * half.abs();
    let mut raw = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && raw != 0.0 {
        raw = resasc * (200.0 * raw / resasc).powf(1.5).min(1.0);
    }
    let error = if raw.is_nan() { f64::INFINITY } else { raw.max(floor) };
    Segment {
        a,
        b,
        value,
        error,
        propagated: propagated * half.abs(),
        floor,
    }
}

/// Adaptive integration of `f` over `[a, b]`, starting from `initial`
/// equal segments and bisecting the worst segment until the combined error
/// meets `tol` or `max_segments` is reached.
pub fn integrate<F>(
    f: F,
    a: f64,
    b: f64,
    initial: usize,
    tol: Tolerance,
    max_segments: usize,
) -> Integral1d
where
    F: FnMut(f64) -> (f64, f64),
{
    integrate_until(f, a, b, initial, tol, max_segments, || false)
}

/// As [`integrate`], but refinement also stops once `stop()` returns true;
/// the result is then reported as not converged.
pub fn integrate_until<F, S>(
    mut f: F,
    a: f64,
    b: f64,
    initial: usize,
    tol: Tolerance,
    max_segments: usize,
    stop: S,
) -> Integral1d
where
    F: FnMut(f64) -> (f64, f64),
    S: Fn() -> bool,
{
    let mut evals = 0u64;
    let initial = initial.max(1);
    let width = (b - a) / initial as f64;
    let mut segments: Vec<Segment> = (0..initial)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == initial { b } else { lo + width };
            gk15(&mut f, lo, hi, &mut evals)
        })
        .collect();

    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let propagated: f64 = segments.iter().map(|s| s.propagated).sum();
        let bound = tol.bound(value);
        let target = (bound - propagated).max(0.25 * bound);
        let halted = error > target && stop();
        if !(error > target) || segments.len() >= max_segments || halted {
            let total = error + propagated;
            return Integral1d {
                value,
                error: total,
                evaluations: evals,
                segments: segments.len(),
                converged: !halted && total.is_finite() && total <= bound,
            };
        }
        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.improvable())
            .max_by(|(_, x), (_, y)| x.error.total_cmp(&y.error))
            .map(|(i, _)| i);
        let Some(worst) = worst else {
            let total = error + propagated;
            return Integral1d {
                value,
                error: total,
                evaluations: evals,
                segments: segments.len(),
                converged: total.is_finite() && total <= bound,
            };
        };
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(gk15(&mut f, seg.a, mid, &mut evals));
        segments.push(gk15(&mut f, mid, seg.b, &mut evals));
    }
}

/// Adaptive integration over `[a, ∞)` through the map `x = a + τ/(1−τ)`.
pub fn integrate_semi_infinite<F>(
    mut f: F,
    a: f64,
    tol: Tolerance,
    max_segments: usize,
) -> Integral1d
where
    F: FnMut(f64) -> (f64, f64),
{
    integrate(
        |tau| {
            let one_minus = 1.0 - tau;
            let x = a + tau / one_minus;
            let jac = 1.0 / (one_minus * one_minus);
            let (v, e) = f(x);
            (v * jac, e * jac)
        },
        0.0,
        1.0,
        4,
        tol,
        max_segments,
    )
}

/// Leaf helper: wrap a plain real function as a zero-error integrand.
pub fn leaf<F>(mut f: F) -> impl FnMut(f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    move |x| (f(x), 0.0)
}
