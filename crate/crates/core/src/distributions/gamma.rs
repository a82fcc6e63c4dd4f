//! Gamma sampling by the Marsaglia-Tsang squeeze, on the log scale.

use crate::rng::RngStream;

/// Log of a Gamma(`shape`, rate 1) draw.
///
/// Shapes below one use the boost `G(a) = G(a + 1) U^(1/a)`, applied on the
/// log scale so tiny shapes never underflow.
pub fn ln_gamma_draw(shape: f64, rng: &mut RngStream) -> f64 {
    if shape < 1.0 {
        let boost = rng.open01().ln() / shape;
        return ln_gamma_draw(shape + 1.0, rng) + boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.normal();
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = rng.open01();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d.ln() + v.ln();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match() {
        let mut rng = RngStream::new(11);
        for &a in &[0.3, 1.0, 2.5, 40.0] {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| ln_gamma_draw(a, &mut rng).exp()).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            assert!((mean - a).abs() < 5.0 * (a / n as f64).sqrt(), "a={a} mean={mean}");
            assert!((var - a).abs() < 0.05 * a, "a={a} var={var}");
        }
    }

    #[test]
    fn tiny_shape_stays_finite() {
        let mut rng = RngStream::new(3);
        for _ in 0..10_000 {
            assert!(ln_gamma_draw(0.01, &mut rng).is_finite());
        }
    }
}
