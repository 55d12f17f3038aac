use oswap_core::lpp::{lpp_time, LppGrid};
use oswap_core::stats::mean;
use oswap_core::tracy_widom::{PainleveConfig, PainleveSolution, Scheme};

#[test]
fn square_passage_time_is_near_four_per_side() {
    let n = 1000;
    let g: Vec<f64> = (0..200).map(|r| lpp_time(n, n, 21, r).unwrap() / n as f64).collect();
    let m = mean(&g).unwrap();
    assert!((m - 4.0).abs() < 0.05, "{m}");
    // fluctuations are of order n^{-2/3} per side, well below 0.5
    assert!(g.iter().all(|&x| (x - 4.0).abs() < 0.5));
}

#[test]
fn transposed_grid_has_the_same_passage_time() {
    use oswap_core::clock::StreamKey;
    for r in 0..10 {
        let grid = LppGrid::sample(13, 29, StreamKey::new(5, r)).unwrap();
        let t = grid.transpose();
        assert_eq!(grid.last(), t.last());
        assert_eq!(grid.at(4, 9), t.at(9, 4));
    }
}

#[test]
fn passage_time_is_monotone_in_the_grid() {
    use oswap_core::clock::StreamKey;
    let grid = LppGrid::sample(20, 20, StreamKey::new(1, 1)).unwrap();
    for i in 1..=20 {
        for j in 1..=20 {
            if i > 1 {
                assert!(grid.at(i, j) > grid.at(i - 1, j));
            }
            if j > 1 {
                assert!(grid.at(i, j) > grid.at(i, j - 1));
            }
        }
    }
}

fn solve(step: f64, scheme: Scheme) -> PainleveSolution {
    PainleveSolution::solve(PainleveConfig { step, scheme, ..PainleveConfig::default() }).unwrap()
}

#[test]
fn tracy_widom_median_is_scheme_independent() {
    let a = solve(1e-3, Scheme::Classic);
    let b = solve(1e-3, Scheme::ThreeEighths);
    assert!((a.quantile(0.5).unwrap() - b.quantile(0.5).unwrap()).abs() < 1e-4);
}

#[test]
fn tracy_widom_tails() {
    let s = solve(1e-3, Scheme::Classic);
    assert!(s.f_tw(-10.0).unwrap() < 1e-4);
    assert!((s.f_tw(8.0).unwrap() - 1.0).abs() < 1e-6);
    let q = [0.05, 0.25, 0.5, 0.75, 0.95].map(|p| s.quantile(p).unwrap());
    assert!(q.windows(2).all(|w| w[0] < w[1]));
    for (p, x) in [0.05, 0.25, 0.5, 0.75, 0.95].iter().zip(q) {
        assert!((s.f_tw(x).unwrap() - p).abs() < 1e-8);
    }
}
