//! One-dimensional quadrature and tabulated CDFs for log-concave densities
//! expressed on the log scale.

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Five-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss5(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    X.iter().zip(W.iter()).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Unnormalized log-density on the log scale, `t = ln x`, assumed concave.
pub trait LogScaleDensity: Sync + Send {
    /// Log of the unnormalized density of `T = ln X` at `t`.
    fn log_g(&self, t: f64) -> f64;
    /// Derivative of [`LogScaleDensity::log_g`].
    fn dlog_g(&self, t: f64) -> f64;
    /// Mode of `log_g`.
    fn mode(&self) -> f64;
    /// Curvature scale `1/sqrt(-log_g''(mode))`.
    fn scale(&self) -> f64;
}

/// Range `[lo, hi]` outside which `log_g` is at least `drop` below its mode value.
pub fn effective_range(d: &dyn LogScaleDensity, drop: f64) -> (f64, f64) {
    let m = d.mode();
    let g0 = d.log_g(m);
    let s = d.scale();
    let find = |dir: f64| {
        let mut step = s;
        let mut t = m + dir * step;
        while d.log_g(t) > g0 - drop {
            step *= 2.0;
            t = m + dir * step;
        }
        t
    };
    (find(-1.0), find(1.0))
}

/// Tabulated CDF of `T = ln X` with cubic Hermite interpolation.
#[derive(Clone, Debug)]
pub struct LogScaleCdf {
    t: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
    /// Log of the normalizer of the unnormalized density of `T`.
    pub log_z: f64,
}

impl LogScaleCdf {
    /// Tabulate on `points` nodes over the effective range.
    pub fn build(d: &dyn LogScaleDensity, points: usize) -> Self {
        let (lo, hi) = effective_range(d, 46.0);
        let g0 = d.log_g(d.mode());
        let g = |t: f64| (d.log_g(t) - g0).exp();
        let h = (hi - lo) / (points - 1) as f64;
        let t: Vec<f64> = (0..points).map(|i| lo + h * i as f64).collect();
        let mut cum = vec![0.0; points];
        for i in 1..points {
            cum[i] = cum[i - 1] + gauss5(&g, t[i - 1], t[i]);
        }
        let z = cum[points - 1];
        let cdf = cum.iter().map(|c| c / z).collect();
        let pdf = t.iter().map(|&x| g(x) / z).collect();
        Self {
            t,
            cdf,
            pdf,
            log_z: g0 + z.ln(),
        }
    }

    /// CDF of `T` at `t`.
    pub fn cdf(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return 0.0;
        }
        if t >= self.t[n - 1] {
            return 1.0;
        }
        let h = self.t[1] - self.t[0];
        let i = (((t - self.t[0]) / h) as usize).min(n - 2);
        let s = (t - self.t[i]) / h;
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.pdf[i] * h, self.pdf[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        v.clamp(0.0, 1.0)
    }

    /// Quantile of `T` by bisection on the tabulated CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        let (mut a, mut b) = (self.t[0], self.t[self.t.len() - 1]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.cdf(m) < p {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}
