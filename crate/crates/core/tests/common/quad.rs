//! Adaptive Gauss-Kronrod (7/15) quadrature.

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
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integral of `f` over `[a, b]` to within `abs_tol + rel_tol * |I|`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let mut pieces = vec![(a, b, gk15(&mut f, a, b))];
    for _ in 0..5000 {
        let total: f64 = pieces.iter().map(|p| p.2 .0).sum();
        let err: f64 = pieces.iter().map(|p| p.2 .1).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (i, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("nonempty");
        let (lo, hi, _) = pieces.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, gk15(&mut f, lo, mid)));
        pieces.push((mid, hi, gk15(&mut f, mid, hi)));
    }
    pieces.iter().map(|p| p.2 .0).sum()
}

/// Integral over the whole real line via `x = c + s * tan(t)`.
pub fn integrate_real_line<F: FnMut(f64) -> f64>(mut f: F, c: f64, s: f64, tol: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    integrate(
        |t| {
            let cos = t.cos();
            s * f(c + s * t.tan()) / (cos * cos)
        },
        -half,
        half,
        tol,
        tol,
    )
}
