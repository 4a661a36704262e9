use proptest::prelude::*;

use recert::cone::{in_cone, sample_cone, split_l1, top_support, ConeSpec};
use recert::ensembles::{sample_composed, sample_psi, walsh_block_diagonal, sample_bounded_rows, RowDistribution};
use recert::numerics::{dot, gen_eig_extremes, l1_ball_project, norm1, norm2, psd_sqrt, sym_eig, DenseMatrix};
use recert::rng::Stream;
use recert::solvers::{basis_pursuit, lasso_cd_traced, oracle_s0, LassoProblem};
use recert::spectra::{re_constant, sparse_eigs, ReMode, SupportMode};

fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut s = Stream::new(seed, 0);
    DenseMatrix::from_fn(rows, cols, |_, _| s.normal())
}

fn symmetric(n: usize, seed: u64) -> DenseMatrix {
    let b = random_matrix(n, n, seed);
    DenseMatrix::from_fn(n, n, |i, j| b.get(i, j) + b.get(j, i))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenvalues_sum_to_trace(n in 1usize..9, seed in any::<u64>()) {
        let s = symmetric(n, seed);
        let e = sym_eig(&s, 1e-12).unwrap();
        let sum: f64 = e.eigenvalues.iter().sum();
        prop_assert!((sum - s.trace()).abs() <= 1e-9 * s.trace().abs() + 1e-12 * (1.0 + s.frobenius_norm()));
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn psd_sqrt_squares_back(n in 1usize..8, seed in any::<u64>()) {
        let s = random_matrix(n + 2, n, seed).gram();
        let b = psd_sqrt(&s).unwrap();
        prop_assert_eq!(b.max_asymmetry(), 0.0);
        let bb = b.matmul(&b).unwrap();
        prop_assert!(bb.sub(&s).unwrap().frobenius_norm() <= 1e-9 * s.frobenius_norm().max(1.0));
    }

    #[test]
    fn l1_projection_is_nearest(v in prop::collection::vec(-5.0f64..5.0, 1..12), radius in 0.05f64..4.0, seed in any::<u64>()) {
        let w = l1_ball_project(&v, radius);
        prop_assert!(norm1(&w) <= radius + 1e-12);
        let dist_w = norm2(&v.iter().zip(&w).map(|(a, b)| a - b).collect::<Vec<_>>());
        let mut s = Stream::new(seed, 1);
        for _ in 0..1000 {
            // a random point of the ball: random direction, random ℓ₁ radius
            let dir: Vec<f64> = (0..v.len()).map(|_| s.normal()).collect();
            let scale = radius * s.uniform() / norm1(&dir).max(1e-300);
            let u: Vec<f64> = dir.iter().map(|x| x * scale).collect();
            let dist_u = norm2(&v.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
            prop_assert!(dist_w <= dist_u + 1e-9);
        }
    }

    #[test]
    fn generalized_extremes_bound_quotients(n in 2usize..6, rank_drop in 0usize..2, seed in any::<u64>()) {
        let m = random_matrix(n + 1, n, seed).gram();
        let g = random_matrix(n - rank_drop.min(n - 1), n, seed ^ 0x55).gram();
        let (lo, hi) = gen_eig_extremes(&m, &g, 1e-10).unwrap();
        // random points of the range of G
        let e = sym_eig(&g, 1e-12).unwrap();
        let keep: Vec<usize> = (0..n).filter(|&k| e.eigenvalues[k] > 1e-10 * e.max()).collect();
        let mut s = Stream::new(seed, 2);
        for _ in 0..1000 {
            let mut x = vec![0.0; n];
            for &k in &keep {
                let c = s.normal();
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi += c * e.eigenvectors.get(i, k);
                }
            }
            let q = dot(&x, &m.matvec(&x)) / dot(&x, &g.matvec(&x));
            prop_assert!(lo - 1e-8 * (1.0 + hi.abs()) <= q && q <= hi + 1e-8 * (1.0 + hi.abs()), "{} {} {}", lo, q, hi);
        }
    }

    #[test]
    fn cone_norm_inequalities(p in 3usize..20, s0 in 1usize..3, k0 in 0.5f64..4.0, seed in any::<u64>()) {
        let spec = ConeSpec::new(s0.min(p - 1), k0).unwrap();
        let x = sample_cone(&spec, p, seed);
        let (member, t0) = in_cone(&x, &spec).unwrap();
        prop_assert!(member);
        let s = spec.s0 as f64;
        let head: Vec<f64> = t0.iter().map(|&i| x[i]).collect();
        let tail: Vec<f64> = (0..p).filter(|i| !t0.contains(i)).map(|i| x[i]).collect();
        let tail_inf = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(tail_inf <= norm1(&head) / s + 1e-12);
        prop_assert!(norm1(&head) / s <= norm2(&head) / s.sqrt() + 1e-12);
        prop_assert!(norm1(&tail) <= k0 * s.sqrt() * norm2(&head) + 1e-12);
        prop_assert!(norm2(&tail) <= 1.0 + 1e-12);
        prop_assert!(norm2(&head) >= norm2(&x) / (1.0 + k0).sqrt() - 1e-12);
        // larger k0, larger cone
        prop_assert!(in_cone(&x, &spec.with_k0(k0 * 1.5)).unwrap().0);
    }

    #[test]
    fn sparse_eigs_monotone_in_m(p in 3usize..8, seed in any::<u64>()) {
        let a = random_matrix(p + 1, p, seed);
        let mut prev = sparse_eigs(&a, 1, SupportMode::Enumerate).unwrap();
        for m in 2..=p {
            let r = sparse_eigs(&a, m, SupportMode::Enumerate).unwrap();
            prop_assert!(r.rho_min <= prev.rho_min + 1e-12 && r.rho_max >= prev.rho_max - 1e-12);
            prev = r;
        }
    }

    #[test]
    fn lasso_objective_never_increases(n in 3usize..12, p in 2usize..10, lambda in 0.0f64..0.5, seed in any::<u64>()) {
        let x = random_matrix(n, p, seed);
        let y: Vec<f64> = random_matrix(n, 1, seed ^ 1).data().to_vec();
        let prob = LassoProblem::new(x.clone(), y, lambda, 1.0).unwrap();
        let (r, trace) = lasso_cd_traced(&prob, 1e-10, 2000);
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15));
        if r.converged && lambda > 0.0 {
            prop_assert!(r.duality_or_kkt_residual <= 10.0 * 1e-10 * (1.0 + norm2(&r.beta_hat)) + 1e-8);
        }
    }

    #[test]
    fn oracle_s0_monotone(beta in prop::collection::vec(-3.0f64..3.0, 1..10), l1 in 0.05f64..2.0, l2 in 0.05f64..2.0) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        prop_assert!(oracle_s0(&beta, hi, 1.0).unwrap() <= oracle_s0(&beta, lo, 1.0).unwrap());
    }

    #[test]
    fn composition_is_bit_exact(n in 1usize..10, q in 1usize..6, seed in any::<u64>()) {
        let a = random_matrix(q, q + 1, seed ^ 7);
        let d = sample_composed(&RowDistribution::Rademacher, &a, n, seed).unwrap();
        let psi = sample_psi(&RowDistribution::Rademacher, n, q, seed).unwrap();
        prop_assert_eq!(psi.matmul(&a).unwrap(), d.x);
    }

    #[test]
    fn walsh_rows_come_from_master(log_m in 0u32..4, blocks in 1usize..4, seed in any::<u64>()) {
        let m = 1usize << log_m;
        let master = walsh_block_diagonal(m, blocks).unwrap();
        let d = sample_bounded_rows(&RowDistribution::walsh(m, blocks), 20, m * blocks, seed).unwrap();
        for i in 0..20 {
            prop_assert!((0..m * blocks).any(|r| master.row(r) == d.x.row(i)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn re_dominated_by_k0_and_sparse_eigs(p in 3usize..6, seed in any::<u64>()) {
        let a = random_matrix(p, p, seed);
        let mode = ReMode::ExactOracle { grid_per_axis: 90 };
        let small = re_constant(&a, &ConeSpec::new(1, 1.0).unwrap(), mode).unwrap();
        let large = re_constant(&a, &ConeSpec::new(1, 3.0).unwrap(), mode).unwrap();
        prop_assert!(small.inv_k >= large.inv_k - 1e-9);
        let rho = sparse_eigs(&a, 1, SupportMode::Enumerate).unwrap().rho_min;
        prop_assert!(small.inv_k <= rho.sqrt() + 1e-9);
    }

    #[test]
    fn basis_pursuit_beats_planted(seed in any::<u64>()) {
        let x = random_matrix(8, 16, seed);
        let mut s = Stream::new(seed, 3);
        let mut beta = vec![0.0; 16];
        for j in s.subset(16, 3) {
            beta[j] = s.normal();
        }
        let b = x.matvec(&beta);
        let r = basis_pursuit(&x, &b, 1e-8, 20_000).unwrap();
        prop_assert!(r.objective <= norm1(&beta) + 10.0 * 1e-8 * (1.0 + norm1(&beta)));
    }
}

#[test]
fn cone_top_norm_equality_case() {
    let x = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
    let spec = ConeSpec::new(1, 1.0).unwrap();
    let t0 = top_support(&x, 1).unwrap();
    let (on, off) = split_l1(&x, &t0);
    assert!(off <= on);
    let head = x[t0[0]].abs();
    assert!((head - norm2(&x) / 2f64.sqrt()).abs() < 1e-15);
    assert!(in_cone(&x, &spec).unwrap().0);
}

#[test]
fn isotropy_of_psi2_kinds() {
    for dist in [
        RowDistribution::Gaussian,
        RowDistribution::Rademacher,
        RowDistribution::discrete_gaussian(),
        RowDistribution::uniform_unit(),
    ] {
        let m = sample_psi(&dist, 100_000, 1, 77).unwrap();
        let second: f64 = m.data().iter().map(|v| v * v).sum::<f64>() / 1e5;
        assert!((second - 1.0).abs() < 0.03, "{}: {second}", dist.name());
    }
}
