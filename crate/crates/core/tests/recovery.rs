use recert::numerics::{norm2, DenseMatrix};
use recert::rng::Stream;
use recert::solvers::{basis_pursuit, lasso_cd, LassoProblem};

fn planted(p: usize, s: usize, stream: &mut Stream) -> Vec<f64> {
    let mut beta = vec![0.0; p];
    for j in stream.subset(p, s) {
        beta[j] = stream.normal();
    }
    beta
}

#[test]
fn basis_pursuit_recovers_sparse_signals() {
    let recovered = recert::par::map_indices(100, |seed| {
        let mut s = Stream::new(seed as u64, 0);
        let x = DenseMatrix::from_fn(30, 60, |_, _| s.normal());
        let beta = planted(60, 3, &mut s);
        let r = basis_pursuit(&x, &x.matvec(&beta), 1e-8, 20_000).unwrap();
        let err: Vec<f64> = r.beta_hat.iter().zip(&beta).map(|(a, b)| a - b).collect();
        norm2(&err) <= 1e-6
    });
    let hits = recovered.iter().filter(|&&r| r).count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn lasso_tracks_truth_with_small_noise() {
    let mut s = Stream::new(5, 0);
    let (n, p) = (200, 20);
    let x = DenseMatrix::from_fn(n, p, |_, _| s.normal());
    let beta = planted(p, 3, &mut s);
    let y: Vec<f64> = x.matvec(&beta).into_iter().map(|v| v + 0.01 * s.normal()).collect();
    let r = lasso_cd(&LassoProblem::new(x, y, 1e-3, 0.01).unwrap(), 1e-12, 10_000);
    assert!(r.converged);
    let err: Vec<f64> = r.beta_hat.iter().zip(&beta).map(|(a, b)| a - b).collect();
    assert!(norm2(&err) < 0.01, "{}", norm2(&err));
}
