//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 48;

/// Kronrod estimate and |Kronrod − Gauss| on one panel.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol` by recursive bisection.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(&f, a, b);
    refine(&f, a, b, v, e, tol, 0)
}

/// Integrate over consecutive breakpoints, splitting the tolerance evenly.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> f64 {
    let pieces = points.len().saturating_sub(1).max(1) as f64;
    points
        .windows(2)
        .map(|p| integrate(&f, p[0], p[1], tol / pieces))
        .sum()
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, v: f64, e: f64, tol: f64, depth: u32) -> f64 {
    if e <= tol || depth >= MAX_DEPTH || (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
        return v;
    }
    let c = 0.5 * (a + b);
    let (vl, el) = gk15(f, a, c);
    let (vr, er) = gk15(f, c, b);
    refine(f, a, c, vl, el, 0.5 * tol, depth + 1) + refine(f, c, b, vr, er, 0.5 * tol, depth + 1)
}
