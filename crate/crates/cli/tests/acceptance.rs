//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs without the libtest harness so the report always prints. The process exits
//! nonzero unless the set of failing criteria is exactly the documented one
//! (criterion 10, see the README).

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use entropyflow::algebra::{rat, AlphaPoly, MomentExpr, MomentSymbol, RadicalElem, RadicalTower};
use entropyflow::calculus::{entropy_derivative, identities, power_concavity_expr};
use entropyflow::catalog;
use entropyflow::numeric::*;
use entropyflow::sos::*;
use entropyflow::verify::*;
use entropyflow::EntropyKind;

// Tolerances and limits, as stated in the criteria.
const GAUSSIAN_REL: f64 = 1e-8;
const TSALLIS2_REL: f64 = 1e-6;
const SECOND_DIFF_TOL: f64 = 1e-8;
const BOUND_TOL: f64 = 1e-8;
const LIMIT_IDENTITIES: Duration = Duration::from_secs(5);
const LIMIT_BETA0: Duration = Duration::from_secs(1);
const LIMIT_MATRICES: Duration = Duration::from_secs(120);
const LIMIT_SCAN: Duration = Duration::from_secs(600);

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: u32, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    Outcome { id, pass, detail, elapsed: start.elapsed() }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let e = start.elapsed();
    (e < limit, format!("{:.2} s of {} s", e.as_secs_f64(), limit.as_secs()))
}

fn s(p: &[(u32, u32)]) -> MomentSymbol {
    MomentSymbol::from_pairs(p).unwrap()
}

fn coef(n: i64, d: i64, a: u32, b: u32, roots: &[i64]) -> AlphaPoly {
    AlphaPoly::alpha().pow(a) * AlphaPoly::alpha_plus(-1).pow(b) * AlphaPoly::from_roots(roots).scale(&rat(n, d))
}

fn expr(terms: Vec<(AlphaPoly, Vec<MomentSymbol>)>) -> MomentExpr {
    terms.into_iter().fold(MomentExpr::zero(), |acc, (c, v)| acc.add(&MomentExpr::term(c, v)))
}

/// Printed Rényi derivatives, k = 1..4.
fn renyi_printed(k: u32) -> MomentExpr {
    let f = s(&[(1, 2)]);
    let terms: Vec<(AlphaPoly, Vec<MomentSymbol>)> = match k {
        1 => return expr(vec![(coef(1, 2, 1, 0, &[]), vec![f])]),
        2 => vec![
            (coef(1, 1, 0, 0, &[2, 3]), vec![s(&[(1, 4)])]),
            (coef(-6, 1, 0, 0, &[]), vec![s(&[(2, 2)])]),
            (coef(3, 1, 1, 1, &[]), vec![f.clone(), f.clone()]),
        ],
        3 => vec![
            (coef(3, 10, 0, 0, &[2, 3, 4, 5]), vec![s(&[(1, 6)])]),
            (coef(-9, 1, 0, 0, &[2, 3]), vec![s(&[(1, 2), (2, 2)])]),
            (coef(3, 2, 1, 1, &[2, 3]), vec![s(&[(1, 4)]), f.clone()]),
            (coef(-6, 1, 0, 0, &[2]), vec![s(&[(2, 3)])]),
            (coef(6, 1, 0, 0, &[]), vec![s(&[(3, 2)])]),
            (coef(-9, 1, 1, 1, &[]), vec![f.clone(), s(&[(2, 2)])]),
            (coef(3, 1, 2, 2, &[]), vec![f.clone(), f.clone(), f.clone()]),
        ],
        4 => vec![
            (coef(3, 28, 0, 0, &[2, 3, 4, 5, 6, 7]), vec![s(&[(1, 8)])]),
            (coef(-9, 1, 0, 0, &[2, 3, 4, 5]), vec![s(&[(1, 4), (2, 2)])]),
            (coef(3, 5, 1, 1, &[2, 3, 4, 5]), vec![s(&[(1, 6)]), f.clone()]),
            (coef(-24, 1, 0, 0, &[2, 3, 4]), vec![s(&[(1, 2), (2, 3)])]),
            (coef(-9, 1, 0, 0, &[2, 3]), vec![s(&[(2, 4)])]),
            (coef(12, 1, 0, 0, &[2, 3]), vec![s(&[(1, 2), (3, 2)])]),
            (coef(-18, 1, 1, 1, &[2, 3]), vec![f.clone(), s(&[(1, 2), (2, 2)])]),
            (coef(3, 1, 2, 2, &[2, 3]), vec![f.clone(), f.clone(), s(&[(1, 4)])]),
            (coef(1, 4, 1, 1, &[2, 2, 3, 3]), vec![s(&[(1, 4)]), s(&[(1, 4)])]),
            (coef(-3, 1, 1, 1, &[2, 3]), vec![s(&[(1, 4)]), s(&[(2, 2)])]),
            (coef(24, 1, 0, 0, &[2]), vec![s(&[(2, 1), (3, 2)])]),
            (coef(-12, 1, 1, 1, &[2]), vec![s(&[(2, 3)]), f.clone()]),
            (coef(-6, 1, 0, 0, &[]), vec![s(&[(4, 2)])]),
            (coef(12, 1, 1, 1, &[]), vec![f.clone(), s(&[(3, 2)])]),
            (coef(9, 1, 1, 1, &[]), vec![s(&[(2, 2)]), s(&[(2, 2)])]),
            (coef(-18, 1, 2, 2, &[]), vec![f.clone(), f.clone(), s(&[(2, 2)])]),
            (coef(9, 2, 3, 3, &[]), vec![f.clone(), f.clone(), f.clone(), f]),
        ],
        _ => unreachable!(),
    };
    expr(terms).scale_poly(&coef(1, 12, 1, 0, &[]))
}

fn tsallis4_printed() -> MomentExpr {
    expr(vec![
        (coef(3, 28, 0, 0, &[2, 3, 4, 5, 6, 7]), vec![s(&[(1, 8)])]),
        (coef(-9, 1, 0, 0, &[2, 3, 4, 5]), vec![s(&[(1, 4), (2, 2)])]),
        (coef(-24, 1, 0, 0, &[2, 3, 4]), vec![s(&[(1, 2), (2, 3)])]),
        (coef(-9, 1, 0, 0, &[2, 3]), vec![s(&[(2, 4)])]),
        (coef(12, 1, 0, 0, &[2, 3]), vec![s(&[(1, 2), (3, 2)])]),
        (coef(24, 1, 0, 0, &[2]), vec![s(&[(2, 1), (3, 2)])]),
        (coef(-6, 1, 0, 0, &[]), vec![s(&[(4, 2)])]),
    ])
    .scale_poly(&coef(1, 12, 1, 0, &[]))
}

fn gram_problem(k: u32, kind: EntropyKind) -> GramProblem {
    let d = entropy_derivative(kind, k).unwrap();
    build_gram_problem(&d, &default_gram_basis(k, kind).unwrap(), &default_slacks(k, kind)).unwrap()
}

fn criterion_1() -> (bool, String) {
    let start = Instant::now();
    let outcomes = identities::verify_all();
    let (time_ok, time) = within(LIMIT_IDENTITIES, start);
    let want = [
        ("second-order", 6),
        ("third-order reductions", 8),
        ("third-order moment derivatives", 2),
        ("fourth-order reductions", 9),
        ("fourth-order moment derivatives", 4),
    ];
    let counts_ok = want.iter().all(|(g, n)| outcomes.iter().filter(|o| o.group == *g && o.holds).count() == *n);
    let failed = outcomes.iter().filter(|o| !o.holds).count();
    (
        counts_ok && failed == 0 && outcomes.len() == 29 && time_ok,
        format!("{} identities, {failed} failed, {time}", outcomes.len()),
    )
}

fn criterion_2() -> (bool, String) {
    let mut bad = Vec::new();
    for k in 1..=4 {
        if entropy_derivative(EntropyKind::Renyi, k).unwrap().expr != renyi_printed(k) {
            bad.push(format!("renyi {k}"));
        }
    }
    let t = entropy_derivative(EntropyKind::Tsallis, 4).unwrap();
    if t.expr != tsallis4_printed() || t.normalizer_power != 1 {
        bad.push("tsallis 4".into());
    }
    (bad.is_empty(), if bad.is_empty() { "5 formulas exact".into() } else { format!("mismatch: {bad:?}") })
}

fn criterion_3() -> (bool, String) {
    let start = Instant::now();
    let c = AlphaPoly::from_ints(&[-10, 29, -12, 9]);
    let total = real_root_count(&c);
    let inside = sturm_root_count(&c, (&rat(389213, 1000000), &rat(389214, 1000000))).unwrap();
    let (time_ok, time) = within(LIMIT_BETA0, start);
    (total == 1 && inside == 1 && time_ok, format!("{total} real root, {inside} in (0.389213, 0.389214), {time}"))
}

fn criterion_4() -> (bool, String) {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |cond: bool, what: &str| {
        ok &= cond;
        if !cond {
            notes.push(what.to_string());
        }
    };
    let (hat, hat_slacks) = assemble_matrix(&catalog::renyi3_hat(), &gram_problem(3, EntropyKind::Renyi)).unwrap();
    check(
        principal_minors(&hat)[1] == AlphaPoly::from_ints_over(&[432, -3312, 8568, -8748, 3186], 5),
        "hat second minor",
    );
    let (tilde, tilde_slacks) =
        assemble_matrix(&catalog::renyi3_tilde(), &gram_problem(3, EntropyKind::Renyi)).unwrap();
    check(principal_minors(&tilde)[1] == AlphaPoly::from_ints(&[-36, 108, -54]), "tilde second minor");
    let cert = |m: &PolyMatrix, sl: &[AlphaPoly], lo: (i64, i64), hi: (i64, i64)| {
        certify_interval(m, sl, (&rat(lo.0, lo.1), &rat(hi.0, hi.1))).verdict == Verdict::PositiveDefinite
    };
    check(cert(&hat, &hat_slacks, (1, 2), (84, 100)), "hat on (0.5, 0.84)");
    check(cert(&tilde, &tilde_slacks, (83, 100), (1, 1)), "tilde on (0.83, 1)");
    let (bt, _) = assemble_matrix(&catalog::tsallis4_tilde(), &gram_problem(4, EntropyKind::Tsallis)).unwrap();
    check(cert(&bt, &[], (197, 100), (2, 1)), "Tsallis tilde on (1.97, 2)");
    let (bh, _) = assemble_matrix(&catalog::renyi4_hat(), &gram_problem(4, EntropyKind::Renyi)).unwrap();
    let b2 = principal_minors(&bh).swap_remove(1);
    let roots = [
        sturm_root_count(&b2, (&rat(74, 100), &rat(75, 100))).unwrap(),
        sturm_root_count(&b2, (&rat(238, 100), &rat(239, 100))).unwrap(),
    ];
    check(roots == [1, 1] && real_root_count(&b2) == 2, "fourth-order second minor roots");
    let (time_ok, time) = within(LIMIT_MATRICES, start);
    check(time_ok, "time");
    let detail = if notes.is_empty() { format!("all exact, {time}") } else { format!("failed: {notes:?}, {time}") };
    (ok, detail)
}

fn criterion_5() -> (bool, String) {
    let p2 = gram_problem(2, EntropyKind::Renyi);
    let mut min_interior = f64::INFINITY;
    let mut all_feasible = true;
    for i in 0..10 {
        let a = 0.2 + 0.3 * i as f64;
        match solve_feasibility(&p2, a).unwrap() {
            Feasibility::Feasible(pt) => min_interior = min_interior.min(pt.margin),
            Feasibility::Infeasible { .. } => all_feasible = false,
        }
    }
    // α = 3 is the edge of the k = 2 range; the best margin there is zero
    let end = solve_feasibility(&p2, 3.0).unwrap();
    let end_margin = end.point().margin;
    all_feasible &= end.is_feasible();
    let p3 = gram_problem(3, EntropyKind::Renyi);
    let k3 = catalog::RENYI3_GRID.iter().all(|&a| solve_feasibility(&p3, a).unwrap().is_feasible());
    let (xs, ys): (Vec<f64>, Vec<f64>) = catalog::L1.iter().copied().unzip();
    let fit = fit_samples(&xs, &ys, 4, 10).unwrap();
    let fit_ok = fit == AlphaPoly::from_ints_over(&[3, 64, -87, 11, 8], 10);
    (
        all_feasible && min_interior > 0.0 && k3 && fit_ok,
        format!(
            "k=2 min margin {min_interior:.2e} (α=3: {end_margin:.1e}), k=3 grid feasible: {k3}, fitted {}",
            fit.render()
        ),
    )
}

fn gaussian_derivative(k: u32, t: f64) -> f64 {
    let fact: f64 = (1..k).map(|i| i as f64).product();
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * fact / (2.0 * t.powi(k as i32))
}

fn criterion_6() -> (bool, String) {
    let g = MixtureDensity::gaussian(0.7, 0.0);
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0] {
        for t in [0.5, 1.0, 2.0] {
            let at = EvalPoint::new(alpha, t).unwrap();
            let e = engine_derivatives(&g, EntropyKind::Renyi, &[1, 2, 3, 4, 5, 6], &at, &q).unwrap();
            let sp = spectral_derivatives(&g, EntropyKind::Renyi, 6, &at, SPECTRAL_DEGREE).unwrap();
            for k in 1..=6u32 {
                let want = gaussian_derivative(k, t);
                for v in [e[k as usize - 1].value, sp[k as usize - 1].value] {
                    worst = worst.max((v - want).abs() / want.abs());
                }
            }
        }
    }
    (worst < GAUSSIAN_REL, format!("worst relative error {worst:.1e} over both routes"))
}

fn criterion_7() -> (bool, String) {
    let start = Instant::now();
    let d = MixtureDensity::two_point();
    let grid = t_grid(0.05, 50.0, 60, true).unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    let renyi = [(2, 8.0), (3, 5.0), (4, 4.0), (5, 3.0), (9, 2.0)];
    let tsallis = [(3, 33.0), (4, 8.0), (5, 5.0), (6, 4.0), (9, 3.0)];
    let clean = [(3, 1.5), (4, 1.0)];
    let mut scan_pairs = |kind: EntropyKind, pairs: &[(u32, f64)], expect: bool| {
        for &(k, a) in pairs {
            let r = scan_signs(&d, kind, &[k], &[a], &grid).unwrap();
            let s = r.get(k, a).unwrap();
            let refined = s.violations.iter().all(|v| v.t_lo.is_finite() && v.t_lo <= v.t_hi);
            let found = !s.violations.is_empty();
            let good = found == expect && refined;
            ok &= good;
            let brackets: Vec<String> = s.violations.iter().map(|v| format!("[{:.3},{:.3}]", v.t_lo, v.t_hi)).collect();
            if expect || found {
                notes.push(format!("{}({k},{a}){}", if good { "" } else { "!" }, brackets.join("")));
            }
        }
    };
    scan_pairs(EntropyKind::Renyi, &renyi, true);
    scan_pairs(EntropyKind::Tsallis, &tsallis, true);
    scan_pairs(EntropyKind::Renyi, &clean, false);
    let (time_ok, time) = within(LIMIT_SCAN, start);
    (ok && time_ok, format!("{}; none for (3,1.5),(4,1); {time}", notes.join(" ")))
}

fn criterion_8() -> (bool, String) {
    let d = MixtureDensity::two_point();
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    let mut alternating = true;
    for t in [0.5, 1.0, 2.0] {
        for k in 1..=5u32 {
            let (lhs, rhs) = tsallis2_identity_check(&d, k, t, &q).unwrap();
            worst = worst.max((lhs - rhs).abs() / rhs.abs());
            let expected = if k % 2 == 1 { 1.0 } else { -1.0 };
            alternating &= lhs * expected > 0.0 && rhs * expected > 0.0;
        }
    }
    (worst < TSALLIS2_REL && alternating, format!("worst relative gap {worst:.1e}, signs alternate: {alternating}"))
}

fn gram_vars(p: &GramProblem, a: &[Vec<f64>]) -> Vec<f64> {
    (0..p.num_vars()).map(|v| p.var_entry(v).map(|(i, j)| a[i][j]).unwrap_or(0.0)).collect()
}

fn criterion_9() -> (bool, String) {
    // exact part: the closed-form Gram vector (a, b, c) with A = vvᵀ
    let e = power_concavity_expr(&AlphaPoly::constant(rat(1, 2)));
    let target = e.div_exact(&AlphaPoly::alpha()).unwrap().scale(&rat(-1, 1));
    let p = build_for_target(&target, 2, &default_gram_basis(2, EntropyKind::Renyi).unwrap(), &[]).unwrap();
    let mut t = RadicalTower::new();
    let poly = |cs: &[i64], den: i64| RadicalElem::poly(AlphaPoly::from_ints_over(cs, den));
    let r2 = t.adjoin(RadicalElem::int(2));
    let sq = t.adjoin(poly(&[0, 3, -1], 1));
    let inner = poly(&[0, 3, -2], 1).add(&t.mul(&r2, &sq).scale_poly(&AlphaPoly::from_ints(&[0, 4])));
    let u = t.adjoin(inner);
    let a = r2.scale(&rat(1, 2));
    let b = t.mul(&r2, &poly(&[-3, 1], 1)).sub(&sq).scale(&rat(1, 6));
    let c = t.mul(&r2, &poly(&[0, 2], 1)).add(&sq).add(&u).scale(&rat(1, 6));
    let v = [a, b, c];
    let exact = p.constraints.iter().all(|row| {
        let mut acc = RadicalElem::poly(-&row.rhs);
        for var in 0..p.num_vars() {
            if row.coeffs[var].is_zero() {
                continue;
            }
            let (i, j) = p.var_entry(var).expect("no slacks");
            acc = acc.add(&t.mul(&v[i], &v[j]).scale_poly(&row.coeffs[var]));
        }
        acc.is_zero()
    });
    // the radicands stay nonnegative up to α = 3/2 + √2
    let edge = 1.5 + 2f64.sqrt();
    let real_ok = [0.3, 1.0, 2.0, 2.9, edge - 1e-9].iter().all(|&al| {
        let vals: Vec<f64> = v.iter().map(|x| t.eval_f64(x, al)).collect();
        let m: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| vals[i] * vals[j]).collect()).collect();
        vals.iter().all(|x| x.is_finite()) && p.residual(al, &gram_vars(&p, &m)) < 1e-9
    });

    // numeric part: second differences of exp(h_α(X_t))
    let q = QuadratureConfig::default();
    let mixtures = [
        MixtureDensity::two_point(),
        MixtureDensity::new(vec![0.2, 0.5, 0.3], vec![-1.5, 0.2, 2.0], vec![0.1, 0.0, 0.4]).unwrap(),
        MixtureDensity::new(vec![0.7, 0.3], vec![0.0, 3.0], vec![0.05, 0.5]).unwrap(),
    ];
    let mut worst = f64::NEG_INFINITY;
    for d in &mixtures {
        for alpha in [0.5, 1.5, 2.9] {
            for t in [0.2, 0.5, 1.0, 2.0, 5.0] {
                let sd = entropy_power_second_difference(d, alpha, t, 0.05 * t, &q).unwrap();
                worst = worst.max(sd);
            }
        }
    }
    (
        exact && real_ok && worst <= SECOND_DIFF_TOL,
        format!("closed form exact: {exact}, real up to 3/2+√2: {real_ok}, largest second difference {worst:.2e}"),
    )
}

fn criterion_10() -> (bool, String) {
    let q = QuadratureConfig::default();
    let mut cells = 0;
    let mut violations = BTreeSet::new();
    let mut worst_excess: f64 = 0.0;
    for alpha in [0.5, 0.75, 1.5, 2.0, 3.0] {
        for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
            for sigma2 in [0.25f64, 1.0, 4.0] {
                let sd = sigma2.sqrt();
                let families = [
                    MixtureDensity::new(vec![0.5, 0.5], vec![sd, -sd], vec![0.0, 0.0]).unwrap(),
                    MixtureDensity::new(
                        vec![0.5, 0.5],
                        vec![sd / 2f64.sqrt(), -sd / 2f64.sqrt()],
                        vec![sigma2 / 2.0; 2],
                    )
                    .unwrap(),
                    MixtureDensity::gaussian(0.0, sigma2),
                ];
                let b = entropy_bounds(alpha, t, sigma2).unwrap();
                for d in &families {
                    cells += 1;
                    let h = entropy_eval(d, EntropyKind::Renyi, &EvalPoint::new(alpha, t).unwrap(), &q).unwrap();
                    if !b.contains(h, BOUND_TOL) {
                        violations.insert(format!("{alpha}"));
                        let excess = (b.lower - h).max(b.upper.map_or(0.0, |u| h - u));
                        worst_excess = worst_excess.max(excess);
                    }
                }
            }
        }
    }
    let n = violations.len();
    (
        n == 0,
        if n == 0 {
            format!("{cells} evaluations inside")
        } else {
            format!(
                "sandwich broken at α ∈ {{{}}}, worst excess {worst_excess:.3e}",
                violations.into_iter().collect::<Vec<_>>().join(", ")
            )
        },
    )
}

fn main() {
    let outcomes = vec![
        run(1, criterion_1),
        run(2, criterion_2),
        run(3, criterion_3),
        run(4, criterion_4),
        run(5, criterion_5),
        run(6, criterion_6),
        run(7, criterion_7),
        run(8, criterion_8),
        run(9, criterion_9),
        run(10, criterion_10),
    ];
    for o in &outcomes {
        println!(
            "{} criterion {:>2}: {} [{:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.detail,
            o.elapsed.as_secs_f64()
        );
    }
    let failing: BTreeSet<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    // the upper bound for α > 1 does not hold for these mixtures; see the README
    if failing != BTreeSet::from([10]) {
        eprintln!("unexpected acceptance outcome: failing {failing:?}");
        std::process::exit(1);
    }
}
