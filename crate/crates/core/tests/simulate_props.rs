use fbm_chaos::simulate::{
    expected_gram, fbm_sample, increment_autocov, mc_gram, pathwise_integral, FbmSampler, NormalStream,
};
use fbm_chaos::spectral::fbm_covariance;
use fbm_chaos::{Grid, QuadratureSpec, SpectralModel, TimeKernel};
use proptest::prelude::*;

fn max_gap(g: &[Vec<f64>]) -> f64 {
    let mut b: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            b = b.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    b
}

#[test]
fn empirical_covariance_matches() {
    for h in [0.3, 0.7] {
        let m = SpectralModel::new(h).unwrap();
        let grid = Grid::symmetric(2.0, 128).unwrap();
        let sampler = FbmSampler::new(&m, &grid).unwrap();
        let paths: Vec<Vec<f64>> = (0..10_000).map(|p| sampler.sample(7, p).values).collect();
        let sub: Vec<usize> = (0..16).map(|k| 4 + 8 * k).collect();
        let n = paths.len() as f64;
        for &a in &sub {
            for &b in &sub {
                let prods: Vec<f64> = paths.iter().map(|x| x[a] * x[b]).collect();
                let mean = prods.iter().sum::<f64>() / n;
                let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
                let se = (var / n).sqrt();
                let exact = fbm_covariance(&m, grid.t(a), grid.t(b));
                assert!((mean - exact).abs() <= 5.0 * se, "H={h} ({a},{b}): {mean} vs {exact} se {se}");
            }
        }
    }
}

#[test]
fn indicator_integrals_are_increments() {
    let m = SpectralModel::new(0.7).unwrap();
    let grid = Grid::symmetric(4.0, 64).unwrap();
    let path = fbm_sample(&m, &grid, 11).unwrap();
    for (lo, hi) in [(0usize, 64usize), (10, 20), (32, 33), (5, 60)] {
        let w: Vec<f64> = (0..64).map(|c| if c >= lo && c < hi { 1.0 } else { 0.0 }).collect();
        let k = TimeKernel::from_values(0, 0.7, grid, w).unwrap();
        let v = pathwise_integral(&path, &k).unwrap();
        let d = path.values[hi] - path.values[lo];
        assert!((v - d).abs() <= 1e-14 * d.abs().max(1.0));
    }
    let other = Grid::symmetric(4.0, 32).unwrap();
    let k = TimeKernel::from_values(0, 0.7, other, vec![1.0; 32]).unwrap();
    assert!(pathwise_integral(&path, &k).is_err());
}

#[test]
fn path_is_pinned_at_zero() {
    let m = SpectralModel::new(0.4).unwrap();
    let grid = Grid::new(-3.0, 1.0, 40).unwrap();
    let p = fbm_sample(&m, &grid, 3).unwrap();
    assert_eq!(p.at(0.0), Some(0.0));
    assert_eq!(grid.t(grid.zero_index()), 0.0);
    assert!(Grid::new(0.5, 2.0, 10).is_err());
}

#[test]
fn gram_bias_shrinks_when_domain_doubles() {
    let q = QuadratureSpec::default();
    let m = SpectralModel::new(0.7).unwrap();
    let narrow = expected_gram(&m, (-2, 2), &Grid::symmetric(8.0, 512).unwrap(), &q).unwrap();
    let wide = expected_gram(&m, (-2, 2), &Grid::symmetric(16.0, 1024).unwrap(), &q).unwrap();
    assert!(max_gap(&wide) < max_gap(&narrow));
}

#[test]
fn gram_bias_shrinks_when_grid_refines() {
    let q = QuadratureSpec::default();
    let m = SpectralModel::new(0.5).unwrap();
    let coarse = expected_gram(&m, (-2, 2), &Grid::symmetric(16.0, 128).unwrap(), &q).unwrap();
    let fine = expected_gram(&m, (-2, 2), &Grid::symmetric(16.0, 512).unwrap(), &q).unwrap();
    assert!(max_gap(&fine) < max_gap(&coarse));
}

#[test]
fn reports_are_reproducible() {
    let q = QuadratureSpec::default();
    let m = SpectralModel::new(0.6).unwrap();
    let grid = Grid::symmetric(8.0, 256).unwrap();
    let a = mc_gram(&m, (-1, 1), &grid, 1000, 5, &q).unwrap();
    let b = mc_gram(&m, (-1, 1), &grid, 1000, 5, &q).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.to_csv().starts_with("i,j,mean,std_err,expected\n"));
    let c = mc_gram(&m, (-1, 1), &grid, 1000, 6, &q).unwrap();
    assert_ne!(a.mean, c.mean);
    assert!(mc_gram(&m, (-1, 1), &grid, 10, 5, &q).is_err());
}

#[test]
fn normal_stream_moments() {
    let mut s = NormalStream::new(42, 0);
    let z: Vec<f64> = (0..200_000).map(|_| s.next()).collect();
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|x| x * x).sum::<f64>() / n;
    let kurt = z.iter().map(|x| x.powi(4)).sum::<f64>() / n;
    assert!(mean.abs() < 5.0 / n.sqrt());
    assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt());
    assert!((kurt - 3.0).abs() < 5.0 * (96.0 / n).sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn paths_deterministic_per_seed(seed in any::<u64>(), h in 0.05f64..0.95) {
        let m = SpectralModel::new(h).unwrap();
        let grid = Grid::symmetric(1.0, 32).unwrap();
        let a = fbm_sample(&m, &grid, seed).unwrap();
        let b = fbm_sample(&m, &grid, seed).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn increment_covariance_telescopes(h in 0.05f64..0.95, dt in 0.01f64..1.0, n in 1usize..30) {
        // Var X(n dt) = Σ_{i,j<n} γ(|i-j|)
        let m = SpectralModel::new(h).unwrap();
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                v += increment_autocov(h, dt, i.abs_diff(j));
            }
        }
        let t = n as f64 * dt;
        prop_assert!((v - fbm_covariance(&m, t, t)).abs() <= 1e-10 * t.powf(2.0 * h).max(1.0));
    }
}
