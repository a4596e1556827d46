//! Gauss-Legendre rules on intervals and symmetric rules on triangles.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Composite Gauss-Legendre rule on `[a, b]`: `panels` equal panels with
/// `order` points each.
#[derive(Debug, Clone)]
pub struct CompositeGauss {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeGauss {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Symmetric rule on the reference triangle: barycentric points and
/// weights normalised to sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleRule {
    Degree2,
    Degree4,
    Degree7,
}

impl TriangleRule {
    /// Lowest embedded rule exact for polynomials of total degree `degree`.
    pub fn for_degree(degree: usize) -> Option<Self> {
        match degree {
            0..=2 => Some(Self::Degree2),
            3..=4 => Some(Self::Degree4),
            5..=7 => Some(Self::Degree7),
            _ => None,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Self::Degree2 => 2,
            Self::Degree4 => 4,
            Self::Degree7 => 7,
        }
    }

    pub fn points(self) -> &'static [([f64; 3], f64)] {
        match self {
            Self::Degree2 => &DEG2,
            Self::Degree4 => &DEG4,
            Self::Degree7 => &DEG7,
        }
    }
}

const T: f64 = 1.0 / 6.0;
static DEG2: [([f64; 3], f64); 3] = [
    ([T, T, 2.0 / 3.0], 1.0 / 3.0),
    ([T, 2.0 / 3.0, T], 1.0 / 3.0),
    ([2.0 / 3.0, T, T], 1.0 / 3.0),
];

const A4: f64 = 0.445_948_490_915_965;
const B4: f64 = 0.108_103_018_168_070;
const C4: f64 = 0.091_576_213_509_771;
const D4: f64 = 0.816_847_572_980_459;
const WA4: f64 = 0.223_381_589_678_011;
const WC4: f64 = 0.109_951_743_655_322;
static DEG4: [([f64; 3], f64); 6] = [
    ([A4, A4, B4], WA4),
    ([A4, B4, A4], WA4),
    ([B4, A4, A4], WA4),
    ([C4, C4, D4], WC4),
    ([C4, D4, C4], WC4),
    ([D4, C4, C4], WC4),
];

const A7: f64 = 0.260_345_966_079_040;
const B7: f64 = 0.479_308_067_841_920;
const C7: f64 = 0.065_130_102_902_216;
const D7: f64 = 0.869_739_794_195_568;
const E7: f64 = 0.048_690_315_425_316;
const F7: f64 = 0.312_865_496_004_874;
const G7: f64 = 0.638_444_188_569_810;
const W0: f64 = -0.149_570_044_467_682;
const WA7: f64 = 0.175_615_257_433_208;
const WC7: f64 = 0.053_347_235_608_838;
const WE7: f64 = 0.077_113_760_890_257;
static DEG7: [([f64; 3], f64); 13] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W0),
    ([A7, A7, B7], WA7),
    ([A7, B7, A7], WA7),
    ([B7, A7, A7], WA7),
    ([C7, C7, D7], WC7),
    ([C7, D7, C7], WC7),
    ([D7, C7, C7], WC7),
    ([E7, F7, G7], WE7),
    ([E7, G7, F7], WE7),
    ([F7, E7, G7], WE7),
    ([F7, G7, E7], WE7),
    ([G7, E7, F7], WE7),
    ([G7, F7, E7], WE7),
];

/// `sum w_i f(x_i)` over one triangle, scaled by its area.
pub fn integrate_triangle(
    rule: TriangleRule,
    p: [[f64; 2]; 3],
    f: impl Fn(f64, f64) -> f64,
) -> f64 {
    let area = 0.5
        * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
            .abs();
    let mut s = 0.0;
    for &(l, w) in rule.points() {
        let x = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
        let y = l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1];
        s += w * f(x, y);
    }
    area * s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(f64::from).product()
    }

    #[test]
    fn triangle_rules_exact_on_monomials() {
        // reference triangle (0,0),(1,0),(0,1): int x^a y^b = a! b! / (a+b+2)!
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for rule in [TriangleRule::Degree2, TriangleRule::Degree4, TriangleRule::Degree7] {
            let wsum: f64 = rule.points().iter().map(|p| p.1).sum();
            assert!((wsum - 1.0).abs() < 1e-14);
            let d = rule.degree() as u32;
            for a in 0..=d {
                for b in 0..=(d - a) {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let got = integrate_triangle(rule, tri, |x, y| x.powi(a as i32) * y.powi(b as i32));
                    assert!((got - exact).abs() < 1e-14, "{rule:?} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(8);
        for k in 0..16 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((got - exact).abs() < 1e-14, "k={k}");
        }
        let c = CompositeGauss::new(0.0, 1.0, 32, 8);
        assert_eq!(c.nodes.len(), 256);
        assert!((c.integrate(|x| x.sin()) - (1.0 - 1f64.cos())).abs() < 1e-15);
    }
}
