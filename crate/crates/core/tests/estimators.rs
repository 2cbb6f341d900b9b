use slaq::descriptors::{
    netlsd_exact, netlsd_linear, netlsd_slaq, netlsd_taylor, relative_error, vnge_exact, vnge_slaq, Descriptor,
    TimeGrid,
};
use slaq::graph_io::erdos_renyi;
use slaq::lanczos::{dense_spectrum, extremal_eigenvalues, lanczos_tridiagonalize, SpectrumEnd};
use slaq::operators::{make_operator, OperatorKind};
use slaq::slq::{ProbeDistribution, SlqConfig};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn disjoint_seeds_agree_within_reported_error() {
    let g = erdos_renyi(400, 6.0, 11).unwrap();
    let grid = TimeGrid::logspace(0.01, 100.0, 64).unwrap();
    for distribution in [ProbeDistribution::Rademacher, ProbeDistribution::Gaussian] {
        let run = |seed| {
            netlsd_slaq(&g, &grid, &SlqConfig { seed, distribution, ..Default::default() }).unwrap()
        };
        let (a, b) = (run(1), run(2));
        let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        let se = norm(a.std_errors.as_ref().unwrap()).max(norm(b.std_errors.as_ref().unwrap()));
        assert!(norm(&diff) < 6.0 * se, "{} vs {}", norm(&diff), se);
    }
}

#[test]
fn slaq_tracks_exact_on_random_graph() {
    let g = erdos_renyi(500, 8.0, 5).unwrap();
    let grid = TimeGrid::default();
    let exact = Descriptor::HeatTrace(netlsd_exact(&g, &grid).unwrap());
    let approx = Descriptor::HeatTrace(netlsd_slaq(&g, &grid, &SlqConfig::default()).unwrap());
    assert!(relative_error(&approx, &exact).unwrap() < 1e-2);
    let e = vnge_exact(&g).unwrap().value;
    let a = vnge_slaq(&g, &SlqConfig::default()).unwrap().value;
    assert!(((a - e) / e).abs() < 1e-2);
}

#[test]
fn baselines_share_the_grid() {
    let g = erdos_renyi(120, 5.0, 2).unwrap();
    let grid = TimeGrid::logspace(0.05, 20.0, 33).unwrap();
    let exact = netlsd_exact(&g, &grid).unwrap();
    for d in [
        netlsd_slaq(&g, &grid, &SlqConfig::default()).unwrap(),
        netlsd_taylor(&g, &grid).unwrap(),
        netlsd_linear(&g, &grid, 10).unwrap(),
    ] {
        assert_eq!(d.grid, exact.grid);
        assert_eq!(d.values.len(), exact.values.len());
    }
}

#[test]
fn full_lanczos_recovers_dense_spectrum() {
    for (n, deg, seed) in [(30, 4.0, 1), (120, 6.0, 2), (200, 3.0, 3)] {
        let g = erdos_renyi(n, deg, seed).unwrap();
        let op = make_operator(&g, OperatorKind::NormalizedLaplacian).unwrap();
        let dense = dense_spectrum(&g, OperatorKind::NormalizedLaplacian).unwrap();
        let low = extremal_eigenvalues(&op, 5, SpectrumEnd::Smallest).unwrap();
        let high = extremal_eigenvalues(&op, 5, SpectrumEnd::Largest).unwrap();
        for (a, b) in low.iter().zip(&dense[..5]) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        for (a, b) in high.iter().zip(&dense[n - 5..]) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        // A generic start vector on a connected-ish graph gives a tridiagonal
        // whose size is bounded by n.
        let q: Vec<f64> = (0..n).map(|i| 1.0 / (n as f64).sqrt() * if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let t = lanczos_tridiagonalize(&op, &q, n, true).unwrap();
        assert!(t.steps() <= n);
    }
}

#[test]
fn extremal_eigenvalues_keep_multiplicity_across_components() {
    // Three disjoint triangles: 𝓛 spectrum is 0 (x3) and 1.5 (x6).
    let edges = (0..3).flat_map(|c| {
        let b = 3 * c;
        [(b, b + 1), (b + 1, b + 2), (b, b + 2)]
    });
    let g = slaq::Graph::from_pairs(9, edges).unwrap();
    let op = make_operator(&g, OperatorKind::NormalizedLaplacian).unwrap();
    let low = extremal_eigenvalues(&op, 4, SpectrumEnd::Smallest).unwrap();
    for (a, b) in low.iter().zip([0.0, 0.0, 0.0, 1.5]) {
        assert!((a - b).abs() < 1e-8, "{low:?}");
    }
    let high = extremal_eigenvalues(&op, 7, SpectrumEnd::Largest).unwrap();
    assert!((high[0] - 0.0).abs() < 1e-8 && high[1..].iter().all(|v| (v - 1.5).abs() < 1e-8), "{high:?}");
}
