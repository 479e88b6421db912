use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use entropyflow::algebra::{parse_rational, rational_to_string, AlphaPoly, MomentExpr, Rational, RawIntegral};
use entropyflow::calculus::{entropy_derivative_with_cap, identities, reduce_raw_integral};
use entropyflow::numeric::{
    entropy_bounds, entropy_eval, scan_signs_with, t_grid, tsallis2_identity_check, EvalPoint, MixtureDensity,
    QuadratureConfig, ScanOptions,
};
use entropyflow::sos::{build_gram_problem, default_gram_basis, default_slacks, parse_slack_spec, sample_and_fit};
use entropyflow::verify::{assemble_matrix, certify_interval};
use entropyflow::{catalog, EntropyKind, Error, Result};
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::{BoundsArgs, CertifyArgs, Command, DeriveArgs, Output, ReduceArgs, RunConfig, ScanArgs, Tsallis2Args};

pub(crate) fn execute(cfg: &RunConfig) -> Result<Output> {
    match &cfg.command {
        Command::Derive(a) => derive(a),
        Command::Reduce(a) => reduce(a),
        Command::Certify(a) => certify(a),
        Command::VerifyIdentities => verify_identities(),
        Command::Scan(a) => scan(a),
        Command::Bounds(a) => bounds(a),
        Command::Tsallis2Check(a) => tsallis2(a),
    }
}

fn read_density(path: &Path) -> Result<MixtureDensity> {
    let s =
        std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    MixtureDensity::from_json(&s)
}

/// `c·α^m·∏(α−r)·(rest)` with integer roots pulled out.
fn render_factored(p: &AlphaPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut rest = p.clone();
    let mut alpha_power = 0;
    while rest.degree().unwrap_or(0) > 0 && rest.coeff(0).is_zero() {
        rest = rest.div_exact(&AlphaPoly::alpha()).expect("α divides");
        alpha_power += 1;
    }
    let mut roots = Vec::new();
    for r in (1..=24).chain(-24..=-1) {
        while rest.degree().unwrap_or(0) > 0 && rest.eval(&Rational::from_integer(r.into())).is_zero() {
            rest = rest.div_exact(&AlphaPoly::alpha_plus(-r)).expect("root divides");
            roots.push(r);
        }
    }
    let lead = rest.leading().cloned().expect("nonzero");
    let monic = rest.monic();
    let mut out = String::new();
    let is_unit = lead.abs() == Rational::from_integer(1.into());
    let has_factors = alpha_power > 0 || !roots.is_empty() || monic.degree().unwrap_or(0) > 0;
    if !is_unit || !has_factors {
        let _ = write!(out, "({})", rational_to_string(&lead));
    } else if lead < Rational::from_integer(0.into()) {
        out.push('-');
    }
    match alpha_power {
        0 => {}
        1 => out.push('α'),
        m => {
            let _ = write!(out, "α^{m}");
        }
    }
    let mut i = 0;
    while i < roots.len() {
        let r = roots[i];
        let mult = roots[i..].iter().take_while(|x| **x == r).count();
        let base = if r > 0 { format!("(α-{r})") } else { format!("(α+{})", -r) };
        out.push_str(&base);
        if mult > 1 {
            let _ = write!(out, "^{mult}");
        }
        i += mult;
    }
    if monic.degree().unwrap_or(0) > 0 {
        let _ = write!(out, "({})", monic.render());
    }
    out
}

fn render_expr(e: &MomentExpr) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let parts: Vec<String> = e
        .iter()
        .map(|(m, c)| {
            let syms = m.symbols();
            let mut body = Vec::new();
            let mut i = 0;
            while i < syms.len() {
                let mult = syms[i..].iter().take_while(|x| **x == syms[i]).count();
                body.push(if mult > 1 { format!("{}^{mult}", syms[i].render()) } else { syms[i].render() });
                i += mult;
            }
            if body.is_empty() {
                render_factored(c)
            } else {
                format!("{}·{}", render_factored(c), body.join("·"))
            }
        })
        .collect();
    parts.join(" + ")
}

fn derive(a: &DeriveArgs) -> Result<Output> {
    let r = entropy_derivative_with_cap(a.entropy, a.order, a.max_order)?;
    let rendered = r.expr.render();
    let mut text = format!("d^{k}/dt^{k} h[{}] = {}", r.kind, render_expr(&r.expr), k = r.order);
    if r.normalizer_power > 0 {
        let _ = write!(text, "   (times (∫p^α)^{})", r.normalizer_power);
    }
    text.push('\n');
    let json = json!({
        "kind": r.kind.as_str(),
        "order": r.order,
        "normalizer_power": r.normalizer_power,
        "expr": r.expr.to_json(),
        "rendered": rendered,
    });
    Ok(Output { text, json, ok: true })
}

fn reduce(a: &ReduceArgs) -> Result<Output> {
    let raw = RawIntegral::new(a.offset, a.factors.clone())?;
    let e = reduce_raw_integral(&raw);
    let text = format!("{} = {}\n", raw.render(), render_expr(&e));
    let json = json!({
        "offset": a.offset,
        "factors": a.factors.iter().map(|(n, k)| (n.to_string(), json!(k))).collect::<serde_json::Map<_, _>>(),
        "expr": e.to_json(),
        "rendered": e.render(),
    });
    Ok(Output { text, json, ok: true })
}

fn default_grid(order: u32, kind: EntropyKind) -> Option<Vec<f64>> {
    match (order, kind) {
        (2, EntropyKind::Renyi) => Some((0..10).map(|i| 0.2 + 0.3 * i as f64).collect()),
        (3, EntropyKind::Renyi) => Some(catalog::RENYI3_GRID.to_vec()),
        (4, EntropyKind::Renyi) => Some(catalog::RENYI4_GRID.to_vec()),
        (4, EntropyKind::Tsallis) => Some(catalog::TSALLIS4_GRID.to_vec()),
        _ => None,
    }
}

fn default_fit_degree(order: u32, kind: EntropyKind) -> usize {
    match (order, kind) {
        (4, EntropyKind::Tsallis) => 2,
        (4, _) => 5,
        _ => 4,
    }
}

fn decimal(x: f64) -> Result<Rational> {
    parse_rational(&format!("{x}"))
}

fn certify(a: &CertifyArgs) -> Result<Output> {
    let target = entropy_derivative_with_cap(a.entropy, a.order, a.order)?;
    let basis = default_gram_basis(a.order, a.entropy)?;
    let slacks = match &a.slack_spec {
        Some(s) => parse_slack_spec(s)?,
        None => default_slacks(a.order, a.entropy),
    };
    let problem = build_gram_problem(&target, &basis, &slacks)?;
    let mut interval = None;
    let (fitted, points) = match &a.printed {
        Some(name) => {
            let case =
                catalog::printed_case(name).ok_or_else(|| Error::invalid(format!("no stored curves {name:?}")))?;
            if case.kind != a.entropy || case.order != a.order {
                return Err(Error::invalid(format!("{name} belongs to {} order {}", case.kind, case.order)));
            }
            interval = Some(case.interval.clone());
            (case.params, Vec::new())
        }
        None => {
            let grid = match &a.alpha_grid {
                Some(g) => g.clone(),
                None => default_grid(a.order, a.entropy)
                    .ok_or_else(|| Error::invalid("no default α grid for this problem; pass --alpha-grid"))?,
            };
            let degree = a.fit_degree.unwrap_or_else(|| default_fit_degree(a.order, a.entropy));
            let den = a.round_denom.unwrap_or(if a.order == 3 { 10 } else { catalog::DEFAULT_ROUND_DENOMINATOR });
            let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            interval = interval.or(Some((decimal(lo)?, decimal(hi)?)));
            sample_and_fit(&problem, &grid, degree, den)?
        }
    };
    if let Some(iv) = &a.interval {
        interval = Some((parse_rational(&iv[0])?, parse_rational(&iv[1])?));
    }
    let (lo, hi) = interval.expect("interval set above");
    if lo > hi {
        return Err(Error::invalid("interval lower end exceeds upper end"));
    }
    let (matrix, slack_polys) = assemble_matrix(&fitted, &problem)?;
    let cert = certify_interval(&matrix, &slack_polys, (&lo, &hi));

    let mut text =
        format!("{} order {} on ({}, {})\n", a.entropy, a.order, rational_to_string(&lo), rational_to_string(&hi));
    for p in &points {
        let _ = writeln!(text, "  α={:<6} margin={:.3e} residual={:.1e}", p.alpha, p.margin, p.residual);
    }
    for (name, poly) in &fitted.params {
        let _ = writeln!(text, "  {name} = {}", poly.render());
    }
    let _ = writeln!(text, "verdict: {}", cert.verdict.label());
    let json = json!({
        "entropy": a.entropy.as_str(),
        "order": a.order,
        "grid": points.iter().map(|p| json!({"alpha": p.alpha, "margin": p.margin, "residual": p.residual})).collect::<Vec<_>>(),
        "fitted": fitted.to_json(),
        "matrix": matrix.to_json(),
        "certificate": cert.to_json(),
    });
    Ok(Output { text, json, ok: true })
}

fn verify_identities() -> Result<Output> {
    let start = Instant::now();
    let outcomes = identities::verify_all();
    let elapsed = start.elapsed().as_secs_f64();
    let failed = outcomes.iter().filter(|o| !o.holds).count();
    let mut text = String::new();
    for o in &outcomes {
        let _ = writeln!(text, "{} {:<28} {}", if o.holds { "ok  " } else { "FAIL" }, o.group, o.name);
    }
    let _ = writeln!(text, "{} of {} identities hold", outcomes.len() - failed, outcomes.len());
    // timing goes to the text form only so that JSON output stays reproducible
    let _ = writeln!(text, "elapsed {elapsed:.3} s");
    let json = json!({
        "identities": outcomes,
        "total": outcomes.len(),
        "failed": failed,
    });
    Ok(Output { text, json, ok: failed == 0 })
}

fn scan(a: &ScanArgs) -> Result<Output> {
    let d = read_density(&a.density)?;
    let grid = t_grid(a.t_min, a.t_max, a.t_points, a.log_grid)?;
    let quiet = a.quiet;
    let opts = ScanOptions {
        threshold: a.threshold,
        bracket_width: a.bracket_width,
        refine_minima: !a.no_refine,
        cross_check: !a.no_cross_check,
        progress: if quiet { None } else { Some(Arc::new(|m: &str| eprintln!("{m}"))) },
        ..ScanOptions::default()
    };
    let report = scan_signs_with(&d, a.entropy, &a.orders.0, &a.alphas, &grid, &opts)?;
    let mut text = String::new();
    for s in &report.series {
        let _ = write!(text, "k={} α={}: ", s.order, s.alpha);
        if s.violations.is_empty() {
            text.push_str("no violations");
        } else {
            let runs: Vec<String> = s
                .violations
                .iter()
                .map(|v| {
                    let w = &v.witness;
                    format!(
                        "[{:.4}, {:.4}] value {:.3e} ± {:.1e} at t={:.4}",
                        v.t_lo,
                        v.t_hi,
                        w.value.unwrap_or(f64::NAN),
                        w.error.unwrap_or(f64::NAN),
                        w.t
                    )
                })
                .collect();
            let _ = write!(text, "{} violation(s) {}", s.violations.len(), runs.join("; "));
        }
        if !s.disputed.is_empty() {
            let _ = write!(text, ", {} disputed", s.disputed.len());
        }
        if s.failures() > 0 {
            let _ = write!(text, ", {} failed cell(s)", s.failures());
        }
        text.push('\n');
    }
    let json: Value = serde_json::from_str(&report.to_json()).expect("report is valid JSON");
    Ok(Output { text, json, ok: true })
}

fn bounds(a: &BoundsArgs) -> Result<Output> {
    let d = a.density.as_deref().map(read_density).transpose()?;
    let sigma2 = match (a.sigma2, &d) {
        (Some(s), _) => s,
        (None, Some(d)) => d.variance(),
        (None, None) => return Err(Error::invalid("pass --sigma2 or --density")),
    };
    let b = entropy_bounds(a.alpha, a.t, sigma2)?;
    let upper = b.upper.map(|u| format!("{u:.12}")).unwrap_or_else(|| "none".into());
    let mut text = format!("α={} t={} σ²={}: lower {:.12}, upper {upper}\n", a.alpha, a.t, sigma2, b.lower);
    let mut json = json!({"alpha": a.alpha, "t": a.t, "sigma2": sigma2, "lower": b.lower, "upper": b.upper});
    let mut ok = true;
    if let Some(d) = d {
        let kind = EntropyKind::Renyi;
        let h = entropy_eval(&d, kind, &EvalPoint::new(a.alpha, a.t)?, &QuadratureConfig::default())?;
        ok = b.contains(h, a.tol);
        let _ = writeln!(text, "entropy {h:.12}: {}", if ok { "inside" } else { "OUTSIDE" });
        json["entropy"] = json!(h);
        json["contained"] = json!(ok);
    }
    Ok(Output { text, json, ok })
}

fn tsallis2(a: &Tsallis2Args) -> Result<Output> {
    let d = read_density(&a.density)?;
    let q = QuadratureConfig::default();
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut ok = true;
    for &k in &a.orders.0 {
        let (lhs, rhs) = tsallis2_identity_check(&d, k, a.t, &q)?;
        let rel = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
        let expected = if k % 2 == 1 { 1.0 } else { -1.0 };
        let good = rel <= a.rel_tol && lhs * expected > 0.0;
        ok &= good;
        let _ =
            writeln!(text, "k={k}: lhs {lhs:.12e} rhs {rhs:.12e} rel {rel:.1e} {}", if good { "ok" } else { "FAIL" });
        rows.push(json!({"order": k, "lhs": lhs, "rhs": rhs, "rel": rel, "agrees": good}));
    }
    Ok(Output { text, json: json!({"t": a.t, "rows": rows}), ok })
}
