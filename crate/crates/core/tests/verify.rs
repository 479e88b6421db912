use entropyflow::algebra::{parse_rational, rat, AlphaPoly, Rational};
use entropyflow::calculus::{entropy_derivative, EntropyKind};
use entropyflow::catalog;
use entropyflow::sos::{build_gram_problem, default_gram_basis, default_slacks, FittedParams, GramProblem};
use entropyflow::verify::*;
use entropyflow::Error;
use proptest::prelude::*;

fn problem(k: u32, kind: EntropyKind) -> GramProblem {
    let d = entropy_derivative(kind, k).unwrap();
    build_gram_problem(&d, &default_gram_basis(k, kind).unwrap(), &default_slacks(k, kind)).unwrap()
}

fn assembled(params: FittedParams, k: u32, kind: EntropyKind) -> (PolyMatrix, Vec<AlphaPoly>) {
    assemble_matrix(&params, &problem(k, kind)).unwrap()
}

fn p(cs: &[&str]) -> AlphaPoly {
    AlphaPoly::new(cs.iter().map(|c| parse_rational(c).unwrap()).collect())
}

fn over(cs: &[i64], den: i64) -> AlphaPoly {
    AlphaPoly::from_ints_over(cs, den)
}

fn r(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

#[test]
fn third_order_hat_matrix_and_minors() {
    let (m, slacks) = assembled(catalog::renyi3_hat(), 3, EntropyKind::Renyi);
    assert_eq!(m.get(0, 0), &AlphaPoly::from_int(6));
    assert_eq!(m.get(0, 1), &AlphaPoly::from_ints(&[-12, 6]));
    assert_eq!(m.get(1, 1), &over(&[192, -672, 1458, -1458, 531], 5));
    let minors = principal_minors(&m);
    assert_eq!(minors[0], AlphaPoly::from_int(6));
    assert_eq!(minors[1], over(&[432, -3312, 8568, -8748, 3186], 5));
    assert_eq!(
        minors[2],
        p(&[
            "-125991/250",
            "1056702/125",
            "-8019621/125",
            "7341099/25",
            "-227464371/250",
            "505782483/250",
            "-1660856481/500",
            "507425778/125",
            "-365740659/100",
            "118059363/50",
            "-129122208/125",
            "68516523/250",
            "-16635699/500",
        ])
    );
    assert_eq!(
        minors[3],
        p(&[
            "-1152239/40000",
            "15486703/20000",
            "-396809831/40000",
            "7993634641/100000",
            "-45104308341/100000",
            "23516351671/12500",
            "-239125432197/40000",
            "147169345899/10000",
            "-707339063119/25000",
            "1063361232613/25000",
            "-4976176278313/100000",
            "2239391676329/50000",
            "-3038852817539/100000",
            "150252323103/10000",
            "-510688609929/100000",
            "10665829017/10000",
            "-2579598531/25000",
        ])
    );
    assert_eq!(slacks, vec![over(&[0, -2, 6, -4], 10), over(&[5, -23, 56, -37], 10)]);
    let cert = certify_interval(&m, &slacks, (&rat(1, 2), &rat(84, 100)));
    assert_eq!(cert.verdict, Verdict::PositiveDefinite);
    assert!(cert.minors.iter().all(|e| e.roots_in_interval == 0 && e.midpoint_sign == 1));
}

#[test]
fn third_order_tilde_matrix_and_minors() {
    let (m, slacks) = assembled(catalog::renyi3_tilde(), 3, EntropyKind::Renyi);
    assert_eq!(m.get(0, 2), &over(&[12, -7], 2));
    assert_eq!(m.get(0, 3), &over(&[3, -21, 18], 4));
    assert_eq!(m.get(2, 3), &over(&[-66, 151, -133, 57, -9], 12));
    assert_eq!(m.get(3, 3), &AlphaPoly::from_ints(&[0, 0, 3, -6, 3]));
    let minors = principal_minors(&m);
    assert_eq!(minors[1], AlphaPoly::from_ints(&[-36, 108, -54]));
    assert_eq!(minors[2], p(&["-216", "4752/5", "-17013/10", "15687/10", "-15357/20", "918/5", "-81/5"]));
    assert_eq!(
        minors[3],
        p(&[
            "675/2",
            "-22197/8",
            "395399/40",
            "-200303/10",
            "4064497/160",
            "-833569/40",
            "43959/4",
            "-142191/40",
            "100503/160",
            "-891/20",
        ])
    );
    assert!(slacks[0].is_zero());
    let cert = certify_interval(&m, &slacks, (&rat(83, 100), &rat(1, 1)));
    assert_eq!(cert.verdict, Verdict::PositiveDefinite);
    let json = cert.to_json();
    assert_eq!(json["verdict"], "positive-definite");
    assert_eq!(json["interval"][0], "83/100");
    assert_eq!(json["minors"].as_array().unwrap().len(), 4);

    // at α = 1 the last row and column vanish
    let at_one = certify_point(&m, &slacks, &rat(1, 1));
    assert_eq!(at_one.verdict, Verdict::PositiveSemidefiniteAtEndpoint { zero_rows: vec![3] });
}

#[test]
fn tsallis_fourth_order_minors() {
    let (m, _) = assembled(catalog::tsallis4_hat(), 4, EntropyKind::Tsallis);
    let minors = principal_minors(&m);
    assert_eq!(minors[1], over(&[-4445083562, 9479504976, -6753185396, 1933288416, -185512322], 12500000));
    assert_eq!(
        minors[2],
        p(&[
            "-5172957560007319/1500000000000",
            "4677340915427557/375000000000",
            "-9398568577694853/500000000000",
            "11460279945639217/750000000000",
            "-718307640500547/100000000000",
            "90122064461137/46875000000",
            "-78856928542633/300000000000",
            "9826680452501/750000000000",
        ])
    );
    let cert = certify_interval(&m, &[], (&rat(165, 100), &rat(198, 100)));
    assert_eq!(cert.verdict, Verdict::PositiveDefinite);

    let (m, _) = assembled(catalog::tsallis4_tilde(), 4, EntropyKind::Tsallis);
    let minors = principal_minors(&m);
    assert_eq!(minors[1], over(&[-3634598552, 3819713552, -1001207138], 12500000));
    assert_eq!(
        minors[2],
        p(&[
            "-438001032453021/62500000000",
            "5175798706543321/375000000000",
            "-509153633512039/50000000000",
            "1667741758389153/500000000000",
            "-306929095417783/750000000000",
        ])
    );
    assert_eq!(
        minors[3],
        p(&[
            "106907812000023320531/31250000000000",
            "-11941261263467145196009/937500000000000",
            "57745805445309793475201/2812500000000000",
            "-52599610348687644579377/2812500000000000",
            "236684569508655171493181/22500000000000000",
            "-168160914586096868096609/45000000000000000",
            "36790596886486158864649/45000000000000000",
            "-2261963247429711691417/22500000000000000",
            "29853438100600780261/5625000000000000",
        ])
    );
    let tail = p(&[
        "1251740234822477224840391839554",
        "-4299383882809915655476099845165",
        "6439628610978696497648403899508",
        "-5534948519611909347505324758619",
        "3022633030214774759148122411046",
        "-1096367306122439673667192658340",
        "267818100227304439977449692688",
        "-43579616547056980886865291824",
        "4528942194596341068858708880",
        "-271849472584522259475180000",
        "7164825144144187262640000",
    ]);
    let b5 = &AlphaPoly::from_ints(&[-2, 1]).pow(4) * &tail.scale(&r("-1/12600000000000000000000"));
    assert_eq!(minors[4], b5);

    let cert = certify_interval(&m, &[], (&rat(197, 100), &rat(2, 1)));
    assert_eq!(cert.verdict, Verdict::PositiveDefinite);
    let at_two = m.eval(&rat(2, 1));
    for (i, row) in at_two.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = if i == 0 && j == 0 { rat(6, 1) } else { rat(0, 1) };
            assert_eq!(x, &want);
        }
    }
    let pt = certify_point(&m, &[], &rat(2, 1));
    assert_eq!(pt.verdict, Verdict::PositiveSemidefiniteAtEndpoint { zero_rows: vec![1, 2, 3, 4] });
}

#[test]
fn renyi_fourth_order_second_minor_roots() {
    let (m, _) = assembled(catalog::renyi4_hat(), 4, EntropyKind::Renyi);
    let b2 = principal_minors(&m).swap_remove(1);
    let printed = over(
        &[
            -811717504,
            2292676116,
            -2431216156,
            1748649216,
            -1498854128,
            776151140,
            682907899,
            -1197441620,
            502569218,
            99669034,
            -154300777,
            49755714,
            -5574321,
        ],
        6250000,
    );
    assert_eq!(b2, printed);
    assert_eq!(sturm_root_count(&b2, (&rat(75, 100), &rat(238, 100))).unwrap(), 0);
    assert_eq!(sturm_root_count(&b2, (&rat(74, 100), &rat(75, 100))).unwrap(), 1);
    assert_eq!(sturm_root_count(&b2, (&rat(238, 100), &rat(239, 100))).unwrap(), 1);
    assert_eq!(real_root_count(&b2), 2);
}

#[test]
fn cubic_root_isolation() {
    let c = AlphaPoly::from_ints(&[-10, 29, -12, 9]);
    assert_eq!(sturm_root_count(&c, (&rat(0, 1), &rat(1, 1))).unwrap(), 1);
    assert_eq!(real_root_count(&c), 1);
    let roots = isolate_roots(&c, &rat(0, 1), &rat(1, 1), &rat(1, 100000));
    assert_eq!(roots.len(), 1);
    assert!(roots[0].lo >= rat(38921, 100000) - rat(1, 100000) && roots[0].hi <= rat(38923, 100000));
    assert_eq!(sturm_root_count(&c, (&r("0.38921"), &r("0.38922"))).unwrap(), 1);
    assert_eq!(sturm_root_count(&c, (&r("0.389213"), &r("0.389214"))).unwrap(), 1);
}

#[test]
fn sturm_edge_cases() {
    let q = AlphaPoly::from_ints(&[1, 0, 1]);
    assert_eq!(sturm_root_count(&q, (&rat(-10, 1), &rat(10, 1))).unwrap(), 0);
    let sq = AlphaPoly::from_roots(&[1, 1, 2]);
    assert_eq!(sturm_root_count(&sq, (&rat(0, 1), &rat(3, 1))).unwrap(), 2);
    assert!(matches!(sturm_root_count(&sq, (&rat(1, 1), &rat(3, 1))), Err(Error::EndpointRoot { .. })));
    assert_eq!(count_roots_open(&sq, &rat(1, 1), &rat(2, 1)), 0);
    assert_eq!(count_roots_open(&sq, &rat(1, 1), &rat(3, 1)), 1);
    assert_eq!(count_roots_open(&sq, &rat(0, 1), &rat(2, 1)), 1);
    let exact = isolate_roots(&AlphaPoly::from_roots(&[0, 1]), &rat(-1, 1), &rat(3, 1), &rat(1, 8));
    assert!(exact.iter().any(|b| b.is_exact() && b.lo == rat(1, 1)));
    assert_eq!(exact.len(), 2);
}

#[test]
fn diagonal_matrix_minors_and_failure() {
    let d = vec![AlphaPoly::from_int(2), AlphaPoly::from_ints(&[0, 1]), AlphaPoly::from_ints(&[-1, 1])];
    let m = PolyMatrix::diagonal(d.clone()).unwrap();
    let minors = principal_minors(&m);
    assert_eq!(minors[0], d[0]);
    assert_eq!(minors[1], &d[0] * &d[1]);
    assert_eq!(minors[2], &(&d[0] * &d[1]) * &d[2]);
    let cert = certify_interval(&m, &[], (&rat(1, 2), &rat(3, 1)));
    match &cert.verdict {
        Verdict::Failed { widest: Some((a, b)) } => {
            assert!(*a >= rat(1, 1) && *a < rat(1001, 1000));
            assert_eq!(b, &rat(3, 1));
        }
        v => panic!("unexpected verdict {v:?}"),
    }
    assert_eq!(cert.to_json()["verdict"], "failed");
    // a negative slack fails even when the matrix is fine
    let cert = certify_interval(&m, &[AlphaPoly::from_int(-1)], (&rat(2, 1), &rat(3, 1)));
    assert_eq!(cert.verdict, Verdict::Failed { widest: None });
}

#[test]
fn zero_pivot_falls_back_to_pivoting() {
    let rows = vec![
        vec![AlphaPoly::zero(), AlphaPoly::one(), AlphaPoly::zero()],
        vec![AlphaPoly::one(), AlphaPoly::zero(), AlphaPoly::zero()],
        vec![AlphaPoly::zero(), AlphaPoly::zero(), AlphaPoly::from_ints(&[0, 1])],
    ];
    let m = PolyMatrix::new(rows).unwrap();
    let minors = principal_minors(&m);
    assert_eq!(minors, vec![AlphaPoly::zero(), AlphaPoly::from_int(-1), AlphaPoly::from_ints(&[0, -1])]);
    assert!(PolyMatrix::new(vec![vec![AlphaPoly::one(), AlphaPoly::zero()], vec![AlphaPoly::one(), AlphaPoly::one()]])
        .is_err());
}

#[test]
fn missing_parameter_is_reported() {
    let mut params = catalog::renyi3_hat();
    params.params.remove("b13");
    let err = assemble_matrix(&params, &problem(3, EntropyKind::Renyi)).unwrap_err();
    assert!(matches!(err, Error::UnresolvedParameter { .. }));
    let mut params = catalog::renyi3_hat();
    params.params.insert("zz".into(), AlphaPoly::one());
    assert!(matches!(
        assemble_matrix(&params, &problem(3, EntropyKind::Renyi)),
        Err(Error::UnresolvedParameter { .. })
    ));
}

#[test]
fn certified_matrices_factor_numerically() {
    for (params, k, kind, lo, hi) in [
        (catalog::renyi3_hat(), 3, EntropyKind::Renyi, rat(1, 2), rat(84, 100)),
        (catalog::renyi3_tilde(), 3, EntropyKind::Renyi, rat(83, 100), rat(1, 1)),
        (catalog::tsallis4_tilde(), 4, EntropyKind::Tsallis, rat(197, 100), rat(2, 1)),
    ] {
        let (m, _) = assembled(params, k, kind);
        for i in 1..10 {
            let a = &lo + (&hi - &lo) * rat(i, 10);
            let vals = m.eval(&a);
            let n = vals.len();
            let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| entropyflow::algebra::rat_to_f64(&vals[i][j]));
            assert!(dm.cholesky().is_some(), "Cholesky failed at {a}");
        }
    }
}

fn brute_sign_changes(c: &[i64], lo: f64, hi: f64) -> usize {
    let f = |x: f64| c.iter().rev().fold(0.0, |acc, k| acc * x + *k as f64);
    let n = 19999;
    let mut count = 0;
    let mut prev = f(lo);
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(x);
        if prev * v < 0.0 {
            count += 1;
        }
        prev = v;
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // roots are chosen on a coarse grid so grid sampling separates them
    #[test]
    fn sturm_matches_grid(roots in proptest::collection::vec(-8i64..8, 1..5), extra in 0i64..3) {
        let mut roots = roots;
        roots.sort();
        roots.dedup();
        let mut poly = AlphaPoly::from_roots(&roots);
        if extra > 0 {
            poly = &poly * &AlphaPoly::from_ints(&[extra, 0, 1]);
        }
        let lo = rat(-17, 2);
        let hi = rat(17, 2);
        let count = sturm_root_count(&poly, (&lo, &hi)).unwrap();
        let ints: Vec<i64> = poly.coeffs().iter().map(|c| c.to_integer().try_into().unwrap()).collect();
        prop_assert_eq!(count, brute_sign_changes(&ints, -8.5, 8.5));
        prop_assert_eq!(count, roots.len());
    }

    #[test]
    fn determinant_is_product_of_pivots(a in -5i64..5, b in -5i64..5, c in -5i64..5) {
        let rows = vec![
            vec![AlphaPoly::from_ints(&[a, 1]), AlphaPoly::from_int(b)],
            vec![AlphaPoly::from_int(b), AlphaPoly::from_ints(&[c, 0, 1])],
        ];
        let det = &(&rows[0][0] * &rows[1][1]) - &(&rows[0][1] * &rows[1][0]);
        let m = PolyMatrix::new(rows.clone()).unwrap();
        prop_assert_eq!(principal_minors(&m)[1].clone(), det.clone());
        prop_assert_eq!(determinant(rows), det);
    }
}
