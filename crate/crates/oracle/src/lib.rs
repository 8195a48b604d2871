//! Test-only oracles.
//!
//! Everything here is deliberately written without reference to the
//! `slsm-core` implementation: plain quadrature, finite differences and
//! normal-equation regression that tests use to cross-check the library.

/// Γ to 20 significant digits at a few anchor points.
pub const GAMMA_TABLE: [(f64, f64); 4] = [
    (0.5, 1.772_453_850_905_516_027_3),
    (1.0, 1.0),
    (1.25, 0.906_402_477_055_477_078_0),
    (2.0, 1.0),
];

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the 7-point rule on the odd Kronrod nodes (1, 3, 5, 7).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss–Kronrod 7/15 panel: `(kronrod estimate, |kronrod - gauss|)`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let center = f(mid);
    let mut kronrod = KRONROD_WEIGHTS[7] * center;
    let mut gauss = GAUSS_WEIGHTS[3] * center;
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive bisection on Gauss–Kronrod panels until each panel's error
/// estimate is below its share of `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let width = b - a;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gauss_kronrod(&f, lo, hi);
        let share = tol * (hi - lo) / width;
        if err <= share.max(1e-300) || depth >= 60 {
            total += value;
        } else {
            let m = 0.5 * (lo + hi);
            stack.push((m, hi, depth + 1));
            stack.push((lo, m, depth + 1));
        }
    }
    total
}

/// Composite trapezoid rule on `panels` equal panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|i| f(a + h * i as f64)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

/// `exp(-|x|^(2β)/c)`, the unnormalised stretched Gaussian kernel.
pub fn stretched_kernel(x: f64, beta: f64, scale: f64) -> f64 {
    (-x.abs().powf(2.0 * beta) / scale).exp()
}

/// Half-width beyond which the kernel is below `1e-16`.
pub fn tail_cutoff(beta: f64, scale: f64) -> f64 {
    (scale * 16.0 * std::f64::consts::LN_10).powf(0.5 / beta)
}

/// CDF of the stretched Gaussian from tabulated quadrature of the kernel.
pub struct NumericCdf {
    beta: f64,
    scale: f64,
    norm: f64,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NumericCdf {
    pub fn new(beta: f64, scale: f64) -> Self {
        let cutoff = tail_cutoff(beta, scale);
        let cells = 4000;
        let knots: Vec<f64> = (0..=cells).map(|i| cutoff * i as f64 / cells as f64).collect();
        let mut cumulative = vec![0.0];
        for w in knots.windows(2) {
            let piece = integrate(|x| stretched_kernel(x, beta, scale), w[0], w[1], 1e-15);
            cumulative.push(cumulative.last().unwrap() + piece);
        }
        let norm = 2.0 * cumulative.last().unwrap();
        Self {
            beta,
            scale,
            norm,
            knots,
            cumulative,
        }
    }

    /// `∫ kernel` over the real line.
    pub fn normalizer(&self) -> f64 {
        self.norm
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let r = x.abs();
        let last = *self.knots.last().unwrap();
        let half = if r >= last {
            *self.cumulative.last().unwrap()
        } else {
            let step = self.knots[1];
            let k = ((r / step) as usize).min(self.knots.len() - 2);
            let (beta, scale) = (self.beta, self.scale);
            self.cumulative[k] + gauss_kronrod(&|t| stretched_kernel(t, beta, scale), self.knots[k], r).0
        };
        let p = half / self.norm;
        if x >= 0.0 {
            0.5 + p
        } else {
            0.5 - p
        }
    }
}

pub fn central_difference<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Richardson extrapolation of central differences at steps `h`, `h/2`, `h/4`.
pub fn richardson<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    let d1 = central_difference(f, x, h);
    let d2 = central_difference(f, x, h / 2.0);
    let d3 = central_difference(f, x, h / 4.0);
    let e1 = (4.0 * d2 - d1) / 3.0;
    let e2 = (4.0 * d3 - d2) / 3.0;
    (16.0 * e2 - e1) / 15.0
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Polynomial least squares by normal equations in the centred, scaled
/// variable `t = (x - m) / s`, mapped back to coefficients of `x` ordered
/// from the highest power.
pub fn polyfit_normal_equations(x: &[f64], y: &[f64], degree: usize) -> Vec<f64> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let s = x.iter().fold(0.0_f64, |acc, v| acc.max((v - m).abs())).max(1e-300);
    let p = degree + 1;
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for (&xi, &yi) in x.iter().zip(y) {
        let t = (xi - m) / s;
        let powers: Vec<f64> = (0..p).map(|k| t.powi(k as i32)).collect();
        for i in 0..p {
            aty[i] += powers[i] * yi;
            for j in 0..p {
                ata[i][j] += powers[i] * powers[j];
            }
        }
    }
    // ascending coefficients in t
    let in_t = solve_dense(ata, aty);
    // expand Σ c_k ((x - m)/s)^k into ascending powers of x
    let mut ascending = vec![0.0; p];
    for (k, c) in in_t.iter().enumerate() {
        let scale = c / s.powi(k as i32);
        for j in 0..=k {
            ascending[j] += scale * binomial(k, j) * (-m).powi((k - j) as i32);
        }
    }
    ascending.reverse();
    ascending
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Evaluates coefficients ordered from the highest power.
pub fn polyval(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().fold(0.0, |acc, c| acc * x + c)
}
