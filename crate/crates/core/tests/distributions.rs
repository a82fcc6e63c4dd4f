use lattice_core::distributions::{Distribution, DistributionSpec, Family};
use lattice_core::verification::stats::{chi2_gof, chi2_sf, ks_discrete, ks_one_sample};
use lattice_core::{Error, RngStream};
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;
const N: usize = 100_000;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Trapezoid rule for `∫_0^∞ f` after `x = e^t`.
fn log_scale_integral(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let h = (hi - lo) / points as f64;
    (0..=points)
        .map(|i| {
            let t = lo + i as f64 * h;
            let w = if i == 0 || i == points { 0.5 } else { 1.0 };
            w * f(t.exp()) * t.exp()
        })
        .sum::<f64>()
        * h
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn continuous_zoo() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::st_exp(1.5, 0.0, 2.0),
        DistributionSpec::st_exp(-2.0, -1.0, 0.5),
        DistributionSpec::st_exp(0.7, -1.0, INF),
        DistributionSpec::s_exp(2.0, 0.0),
        DistributionSpec::al(1.0, 2.5),
        DistributionSpec::gamma(2.5, 1.5),
        DistributionSpec::gamma(0.4, 1.0),
        DistributionSpec::inv_gamma(3.0, 2.0),
        DistributionSpec::gig(1.0, 1.0, 1.0),
        DistributionSpec::gig(-0.7, 2.0, 0.5),
        DistributionSpec::beta(0.5, 2.5),
        DistributionSpec::beta(3.0, 1.5),
        DistributionSpec::uniform01(),
    ]
}

fn discrete_zoo() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::sstb_geo(0.4, 0.0, INF, 1.5, 1.0),
        DistributionSpec::sstb_geo(2.0, 1.0, 6.0, 0.5, 0.5),
        DistributionSpec::sstb_geo(1.0, 0.0, 4.0, 3.0, 1.0),
        DistributionSpec::ss_geo(0.6, -2.0, 1.0),
        DistributionSpec::sd_al(0.3, 0.6, 1.0),
        DistributionSpec::sd_al(0.5, 0.2, 0.25),
        DistributionSpec::qnb(0.5, 0.5, 0.5),
        DistributionSpec::qnb(0.0, 0.7, 0.3),
        DistributionSpec::qnb_finite(3, -0.4, 0.5),
    ]
}

/// Total mass by an integration rule chosen from the support shape.
fn total_mass(d: &Distribution) -> f64 {
    let (lo, hi) = d.support();
    let f = |x: f64| d.density(x);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) if lo == 0.0 && hi == 1.0 => {
            // Log substitution at both ends absorbs endpoint singularities.
            let half = 0.5f64.ln();
            log_scale_integral(f, -80.0, half, 400_000) + log_scale_integral(|x| f(1.0 - x), -80.0, half, 400_000)
        }
        (true, true) => simpson(f, lo, hi, 200_000),
        (true, false) => log_scale_integral(|x| f(lo + x), -60.0, 8.0, 400_000),
        _ => log_scale_integral(f, -60.0, 8.0, 400_000) + log_scale_integral(|x| f(-x), -60.0, 8.0, 400_000),
    }
}

fn lattice_step(spec: &DistributionSpec) -> f64 {
    match spec.family {
        Family::SstbGeo | Family::SsGeo | Family::SdAl => spec.params.get("m").unwrap(),
        _ => 1.0,
    }
}

fn pmf_sum(spec: &DistributionSpec) -> f64 {
    let d = spec.build().unwrap();
    let m = lattice_step(spec);
    (-4000i64..=4000).map(|k| d.density(k as f64 * m)).sum()
}

// Sampling examples.

#[test]
fn uniform_and_exponential_means() {
    let mut rng = RngStream::new(11);
    let u = DistributionSpec::st_exp(0.0, 0.0, 1.0).sample(&mut rng, N).unwrap();
    assert!((mean(&u) - 0.5).abs() < 0.01, "{}", mean(&u));
    let e = DistributionSpec::s_exp(2.0, 0.0).sample(&mut rng, N).unwrap();
    assert!((mean(&e) - 0.5).abs() < 0.01, "{}", mean(&e));
}

#[test]
fn gig_sample_matches_quadrature_density() {
    let (lambda, c1, c2) = (1.0, 1.0, 1.0);
    let kernel = |x: f64| x.powf(-lambda - 1.0) * (-c1 * x - c2 / x).exp();
    let z = log_scale_integral(kernel, -40.0, 6.0, 200_000);
    // Fine log grid cells merged until each expects at least 200 draws.
    let (mut edges, mut probs) = (vec![0.0], Vec::new());
    let mut acc = 0.0;
    for i in -40..30 {
        let (a, b) = (if i == -40 { -40.0 } else { i as f64 * 0.1 }, if i == 29 { 6.0 } else { (i + 1) as f64 * 0.1 });
        acc += log_scale_integral(kernel, a, b, 2_000) / z;
        if acc * N as f64 >= 200.0 && i < 29 {
            edges.push(b.exp());
            probs.push(acc);
            acc = 0.0;
        }
    }
    *probs.last_mut().unwrap() += acc;
    *edges.last_mut().unwrap() = INF;
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    let sample = DistributionSpec::gig(lambda, c1, c2).sample(&mut RngStream::new(7), N).unwrap();
    let mut counts = vec![0usize; probs.len()];
    for x in sample {
        counts[edges.partition_point(|&e| e <= x) - 1] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = p * N as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    assert!(probs.iter().all(|&p| p * N as f64 >= 5.0));
    let pv = chi2_sf(stat, probs.len() - 1);
    assert!(pv > 0.01, "chi2 {stat} p {pv}");
}

#[test]
fn sampling_is_deterministic_and_in_support() {
    for spec in continuous_zoo().into_iter().chain(discrete_zoo()) {
        let a = spec.sample(&mut RngStream::new(3), 2000).unwrap();
        let b = spec.sample(&mut RngStream::new(3), 2000).unwrap();
        assert_eq!(a, b, "{spec:?}");
        let d = spec.build().unwrap();
        assert!(a.iter().all(|&x| d.in_support(x)), "{spec:?}");
    }
}

// Density examples.

#[test]
fn density_examples() {
    let d = DistributionSpec::sstb_geo(0.5, 0.0, 2.0, 1.0, 1.0);
    assert!((d.density(0.0).unwrap() - 4.0 / 7.0).abs() < 1e-15);
    assert!((DistributionSpec::al(1.0, 1.0).density(0.0).unwrap() - 0.5).abs() < 1e-15);
    // Zero mass of qNB against a product truncated at 1e-16.
    let (b, p, q) = (0.5f64, 0.5f64, 0.5f64);
    let poch = |a: f64| (0..200).map(|k| 1.0 - a * q.powi(k)).product::<f64>();
    let got = DistributionSpec::qnb(b, p, q).density(0.0).unwrap();
    assert!((got - poch(b) / poch(p * b)).abs() < 1e-12, "{got}");
    assert!((got - poch(p) / poch(p * b)).abs() < 1e-12, "{got}");
    assert_eq!(DistributionSpec::gamma(1.0, 1.0).density(-1.0).unwrap(), 0.0);
    assert_eq!(DistributionSpec::dirac(2.0).density(2.0).unwrap(), 1.0);
}

#[test]
fn exact_pmf_table_examples() {
    let t = DistributionSpec::dirac(3.0).exact_pmf_table().unwrap();
    assert_eq!(t.points, vec![(3.0, 1.0)]);
    let t = DistributionSpec::sstb_geo(0.5, 0.0, 1.0, 2.0, 1.0).exact_pmf_table().unwrap();
    assert_eq!(t.points, vec![(0.0, 0.5), (1.0, 0.5)]);
    let t = DistributionSpec::qnb_finite(1, -0.5, 0.5).exact_pmf_table().unwrap();
    assert_eq!(t.len(), 2);
    assert!((t.get(0.0) - 0.5).abs() < 1e-15 && (t.get(1.0) - 0.5).abs() < 1e-15);
    for spec in [
        DistributionSpec::sstb_geo(0.3, -3.0, 7.0, 4.0, 0.5),
        DistributionSpec::qnb_finite(5, -0.9, 0.7),
    ] {
        let t = spec.exact_pmf_table().unwrap();
        assert!((t.total() - 1.0).abs() < 1e-15, "{spec:?}");
    }
    assert!(matches!(DistributionSpec::qnb(0.5, 0.5, 0.5).exact_pmf_table(), Err(Error::InfiniteSupport(_))));
    assert!(matches!(DistributionSpec::sstb_geo(0.5, 0.0, INF, 1.0, 1.0).exact_pmf_table(), Err(Error::InfiniteSupport(_))));
    assert!(DistributionSpec::gamma(1.0, 1.0).exact_pmf_table().is_err());
}

// Invariants.

#[test]
fn densities_integrate_to_one() {
    for spec in continuous_zoo() {
        let d = spec.build().unwrap();
        let total = total_mass(&d);
        assert!((total - 1.0).abs() < 1e-6, "{spec:?}: {total}");
    }
    for spec in discrete_zoo() {
        let total = pmf_sum(&spec);
        assert!((total - 1.0).abs() < 1e-6, "{spec:?}: {total}");
    }
}

#[test]
fn empirical_cdf_within_ks_bound() {
    let bound = 1.95 / (N as f64).sqrt();
    for (i, spec) in continuous_zoo().into_iter().chain(discrete_zoo()).enumerate() {
        let d = spec.build().unwrap();
        let sample = d.sample_n(&mut RngStream::new(100 + i as u64), N);
        let ks = if d.is_discrete() {
            ks_discrete(&sample, &d.pmf_table(1e-12)).unwrap()
        } else {
            ks_one_sample(&sample, |x| d.cdf(x)).unwrap()
        };
        assert!(ks.statistic < bound, "{spec:?}: {} >= {bound}", ks.statistic);
    }
}

#[test]
fn sstb_geo_reduces_to_geometric() {
    for &theta in &[0.1, 0.5, 0.9, 0.99] {
        let d = DistributionSpec::sstb_geo(theta, 0.0, INF, 1.0, 1.0).build().unwrap();
        for k in 0..200 {
            let g = (1.0 - theta) * theta.powi(k);
            assert!((d.density(k as f64) - g).abs() < 1e-12, "theta {theta} k {k}");
        }
    }
}

#[test]
fn gig_with_zero_c1_matches_inverse_gamma() {
    for &(lambda, c) in &[(0.5, 1.0), (1.5, 2.0), (4.0, 0.3)] {
        let a = DistributionSpec::gig(lambda, 0.0, c).build().unwrap();
        let b = DistributionSpec::inv_gamma(lambda, c).build().unwrap();
        for i in 1..200 {
            let x = i as f64 * 0.05;
            assert!((a.density(x) - b.density(x)).abs() < 1e-12 * (1.0 + b.density(x)), "x {x}");
            assert!((a.cdf(x) - b.cdf(x)).abs() < 1e-9, "x {x}");
        }
    }
}

#[test]
fn finite_qnb_is_a_sum_of_bernoullis() {
    let q: f64 = 0.5;
    for &(j, p0) in &[(1u32, 1.0), (3, 0.8), (6, 2.5)] {
        let spec = DistributionSpec::qnb_finite(j, -q.powi(j as i32) * p0, q);
        let table = spec.exact_pmf_table().unwrap();
        let probs: Vec<f64> = (1..=j).map(|i| {
            let a = q.powi(i as i32 - 1) * p0;
            a / (1.0 + a)
        }).collect();
        // Exact convolution of the Bernoulli laws.
        let mut conv = vec![1.0];
        for &b in &probs {
            let mut next = vec![0.0; conv.len() + 1];
            for (k, &w) in conv.iter().enumerate() {
                next[k] += w * (1.0 - b);
                next[k + 1] += w * b;
            }
            conv = next;
        }
        for (k, &w) in conv.iter().enumerate() {
            assert!((table.get(k as f64) - w).abs() < 1e-12, "J {j} k {k}");
        }
        let mut rng = RngStream::new(j as u64);
        let sample: Vec<f64> = (0..N)
            .map(|_| probs.iter().filter(|&&b| rng.open01() < b).count() as f64)
            .collect();
        let c = chi2_gof(&sample, &table).unwrap();
        assert!(c.p_value > 0.01, "J {j}: {c:?}");
    }
}

#[test]
fn json_round_trip() {
    for spec in continuous_zoo().into_iter().chain(discrete_zoo()).chain([DistributionSpec::dirac(-1.25)]) {
        let s = serde_json::to_string(&spec).unwrap();
        let back: DistributionSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec, "{s}");
    }
    let v = serde_json::to_value(DistributionSpec::gig(1.0, 2.0, 3.0)).unwrap();
    assert_eq!(v["family"], "GIG");
    assert_eq!(v["params"]["c2"], 3.0);
    let parsed: DistributionSpec = serde_json::from_str(r#"{"family":"sExp","params":{"lambda":2,"c":0}}"#).unwrap();
    assert_eq!(parsed, DistributionSpec::s_exp(2.0, 0.0));
    assert!(serde_json::from_str::<DistributionSpec>(r#"{"family":"Cauchy","params":{}}"#).is_err());
}

#[test]
fn invalid_params_are_rejected() {
    let bad = [
        DistributionSpec::st_exp(0.0, 1.0, 1.0),
        DistributionSpec::st_exp(0.0, 0.0, INF),
        DistributionSpec::s_exp(-1.0, 0.0),
        DistributionSpec::sstb_geo(0.0, 0.0, 2.0, 1.0, 1.0),
        DistributionSpec::sstb_geo(0.5, 3.0, 2.0, 1.0, 1.0),
        DistributionSpec::sstb_geo(0.5, 0.0, 2.0, 0.0, 1.0),
        DistributionSpec::sstb_geo(0.5, 0.0, 2.0, 1.0, -1.0),
        DistributionSpec::sstb_geo(1.0, 0.0, INF, 1.0, 1.0),
        DistributionSpec::al(0.0, 1.0),
        DistributionSpec::sd_al(0.0, 0.5, 1.0),
        DistributionSpec::gamma(1.0, 0.0),
        DistributionSpec::inv_gamma(0.0, 1.0),
        DistributionSpec::gig(1.0, -1.0, 1.0),
        DistributionSpec::gig(1.0, 1.0, 0.0),
        DistributionSpec::beta(1.0, -2.0),
        DistributionSpec::qnb(0.5, 0.5, 1.0),
        DistributionSpec::qnb(1.5, 0.5, 0.5),
        DistributionSpec::qnb(0.5, -0.5, 0.5),
        DistributionSpec::dirac(f64::NAN),
    ];
    for spec in bad {
        assert!(matches!(spec.build(), Err(Error::InvalidParams { .. })), "{spec:?}");
        assert!(spec.sample(&mut RngStream::new(0), 1).is_err(), "{spec:?}");
    }
}

// Properties.

fn any_spec() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        (-3.0f64..3.0, -2.0f64..2.0, 0.1f64..3.0).prop_map(|(l, a, w)| DistributionSpec::st_exp(l, a, a + w)),
        (0.1f64..5.0, -2.0f64..2.0).prop_map(|(l, c)| DistributionSpec::s_exp(l, c)),
        (0.05f64..0.95, -3i32..3, 0.2f64..4.0).prop_map(|(t, lo, k)| DistributionSpec::sstb_geo(t, lo as f64, INF, k, 1.0)),
        (0.05f64..3.0, -3i32..3, 0i32..8, 0.2f64..4.0).prop_map(|(t, lo, w, k)| DistributionSpec::sstb_geo(t, lo as f64, (lo + w) as f64, k, 0.5)),
        (0.1f64..4.0, 0.1f64..4.0).prop_map(|(a, b)| DistributionSpec::al(a, b)),
        (0.05f64..0.9, 0.05f64..0.9).prop_map(|(a, b)| DistributionSpec::sd_al(a, b, 1.0)),
        (0.2f64..6.0, 0.2f64..4.0).prop_map(|(l, c)| DistributionSpec::gamma(l, c)),
        (0.2f64..6.0, 0.2f64..4.0).prop_map(|(l, c)| DistributionSpec::inv_gamma(l, c)),
        (-3.0f64..3.0, 0.2f64..4.0, 0.2f64..4.0).prop_map(|(l, a, b)| DistributionSpec::gig(l, a, b)),
        (0.3f64..5.0, 0.3f64..5.0).prop_map(|(a, b)| DistributionSpec::beta(a, b)),
        (0.0f64..0.9, 0.0f64..0.9, 0.0f64..0.9).prop_map(|(b, p, q)| DistributionSpec::qnb(b, p, q)),
        (1u32..6, 0.1f64..3.0, 0.1f64..0.9).prop_map(|(l, p0, q)| DistributionSpec::qnb_finite(l, -q.powi(l as i32) * p0, q)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn draws_lie_in_support(spec in any_spec(), seed in any::<u64>()) {
        let d = spec.build().unwrap();
        let mut rng = RngStream::new(seed);
        for _ in 0..64 {
            let x = d.sample(&mut rng);
            prop_assert!(d.in_support(x), "{:?} drew {}", spec, x);
            prop_assert!(d.density(x) >= 0.0);
        }
    }

    #[test]
    fn cdf_is_monotone_and_quantile_inverts(spec in any_spec(), ps in prop::collection::vec(0.001f64..0.999, 8)) {
        let d = spec.build().unwrap();
        let mut qs: Vec<f64> = ps.iter().map(|&p| d.quantile(p)).collect();
        let mut sorted = ps.clone();
        sorted.sort_by(f64::total_cmp);
        qs.sort_by(f64::total_cmp);
        let cdfs: Vec<f64> = qs.iter().map(|&x| d.cdf(x)).collect();
        prop_assert!(cdfs.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        for (&p, &x) in sorted.iter().zip(&qs) {
            prop_assert!(d.cdf(x) >= p - 1e-6, "{:?}: cdf({}) = {} < {}", spec, x, d.cdf(x), p);
            if !d.is_discrete() {
                prop_assert!((d.cdf(x) - p).abs() < 1e-6, "{:?}: cdf({}) = {} vs {}", spec, x, d.cdf(x), p);
            }
        }
    }

    #[test]
    fn finite_tables_sum_to_one(t in 0.05f64..3.0, lo in -5i32..5, w in 0i32..20, k in 0.1f64..5.0) {
        let spec = DistributionSpec::sstb_geo(t, lo as f64, (lo + w) as f64, k, 1.0);
        let table = spec.exact_pmf_table().unwrap();
        prop_assert_eq!(table.len(), w as usize + 1);
        prop_assert!((table.total() - 1.0).abs() < 1e-15);
        for &(x, p) in &table.points {
            prop_assert!((spec.density(x).unwrap() - p).abs() < 1e-13 * p);
        }
    }

    #[test]
    fn json_round_trip_any(spec in any_spec()) {
        let s = serde_json::to_string(&spec).unwrap();
        prop_assert_eq!(serde_json::from_str::<DistributionSpec>(&s).unwrap(), spec);
    }
}
