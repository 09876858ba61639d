use crate::config::{parse_pair, ConstantArgs, DirectionChoice, PortraitArgs, ShadowArgs, SharpnessArgs, SystemArgs, TransformArgs};
use crate::HypothesesFailed;
use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use ulamkit::calculus::{ImproperOptions, Interval};
use ulamkit::expr::Expr;
use ulamkit::extremal::{maxnorm_form3_experiment, sharpness_experiment, ExtremalError, SharpnessOptions};
use ulamkit::jordan::{Form, JordanSystem, Mat2, NormKind, Prepared};
use ulamkit::kappa::{
    auto_direction, best_constant, check_condition, check_conditions, closed_form_constant, coarse_grid, Direction,
    KappaError, SupOptions, Verdict,
};
use ulamkit::ode::{Forcing, OdeOptions};
use ulamkit::registry::{self, RunOptions};
use ulamkit::scalar::ScalarFn;
use ulamkit::shadow::{perturbed_orbit, shadow as run_shadow, Approx, ShadowError, ShadowOptions};
use ulamkit::transform::{propagate_constant, MatrixFn, Similarity, TransformError, TransformSpec};

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn resolve_direction(choice: DirectionChoice, p: &Prepared) -> Result<Direction> {
    match choice {
        DirectionChoice::Fixed(d) if !d.allowed(p.form()) => bail!("direction {d} is not available for form {}", p.form()),
        DirectionChoice::Fixed(d) => Ok(d),
        DirectionChoice::Auto => auto_direction(p, &ImproperOptions::default())?.ok_or_else(|| {
            HypothesesFailed("no direction has both a convergent kappa at t0 and a divergent rate integral".into()).into()
        }),
    }
}

fn prepare(sys: &SystemArgs) -> Result<(Prepared, Direction, NormKind)> {
    let s = sys.build()?;
    let norm = sys.norm(s.form())?;
    let p = Prepared::new(s)?;
    let dir = resolve_direction(sys.direction()?, &p)?;
    Ok((p, dir, norm))
}

pub fn constant(sys: &SystemArgs, args: &ConstantArgs) -> Result<()> {
    let (p, dir, norm) = prepare(sys)?;
    let improper = ImproperOptions::default();
    let reports = check_condition(&p, dir, &improper)?;
    let verdict = check_conditions(&reports);
    let window = args.window.as_deref().map(|w| parse_pair("window", w)).transpose()?;
    let opts = SupOptions {
        window,
        ..Default::default()
    };
    let closed = if p.sys.is_constant() {
        closed_form_constant(&p.sys, norm).ok()
    } else {
        None
    };
    let mut out = json!({
        "form": p.form(),
        "direction": dir,
        "norm": norm,
        "interval": p.interval().to_string(),
        "t0": p.t0(),
    });
    let mut failure = None;
    match best_constant(&p, dir, norm, &opts) {
        Ok(r) => {
            out["K"] = json!(r.k);
            out["t_star"] = json!(r.t_star);
            out["attained"] = json!(r.attained);
            out["native_sup"] = json!(r.native);
            out["conditions"] = json!({"kappa_exists": true, "sup_finite": true});
            if let Some(path) = &args.profile {
                let mut csv = String::from("t,kappa\n");
                for k in &r.profile.points {
                    let _ = writeln!(csv, "{},{}", k.t, k.value * r.profile.factor);
                }
                emit(Some(path), &csv)?;
            }
        }
        Err(KappaError::Nonexistent { t, status }) => {
            out["K"] = Value::Null;
            out["conditions"] = json!({"kappa_exists": false, "sup_finite": false, "witness_t": t});
            failure = Some(format!("kappa does not exist at t = {t} ({status:?})"));
        }
        Err(KappaError::SupUnbounded { toward, last }) => {
            out["K"] = Value::Null;
            out["conditions"] = json!({"kappa_exists": true, "sup_finite": false});
            failure = Some(format!("sup of kappa is unbounded toward t = {toward} (last value {last:e})"));
        }
        Err(e) => return Err(e.into()),
    }
    out["conditions"]["divergence"] = json!(verdict);
    out["conditions"]["reports"] = json!(reports);
    if let Some(c) = closed {
        out["closed_form"] = json!(c);
    }
    emit(args.json.as_deref(), &pretty(&out))?;
    if let Some(f) = failure {
        return Err(HypothesesFailed(f).into());
    }
    match verdict {
        Verdict::Fails => Err(HypothesesFailed("divergence condition fails".into()).into()),
        Verdict::Inconclusive => {
            eprintln!("warning: divergence condition inconclusive; K is an Ulam constant but may not be the best one");
            Ok(())
        }
        Verdict::Holds => Ok(()),
    }
}

/// Default evaluation window: `t0 ± 40`, kept `10⁻³` of the span inside finite ends.
fn default_window(iv: &Interval, t0: f64) -> (f64, f64) {
    let inset = if iv.is_bounded() { 1e-3 * (iv.b - iv.a) } else { 0.0 };
    let lo = if iv.a.is_finite() { (iv.a + inset).max(t0 - 40.0) } else { t0 - 40.0 };
    let hi = if iv.b.is_finite() { (iv.b - inset).min(t0 + 40.0) } else { t0 + 40.0 };
    (lo, hi)
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn parse_expr(name: &str, v: &Option<String>) -> Result<Expr> {
    let s = v.as_deref().ok_or_else(|| anyhow!("missing --{name}"))?;
    s.parse::<Expr>().map_err(|e| anyhow!("--{name} `{s}`: {e}"))
}

pub fn shadow(sys: &SystemArgs, args: &ShadowArgs) -> Result<()> {
    let (p, dir, norm) = prepare(sys)?;
    let iv = p.interval();
    let phi = Approx::analytic(parse_expr("phi1", &args.phi1)?, parse_expr("phi2", &args.phi2)?, (iv.a, iv.b))?;
    let (lo, hi) = match &args.window {
        Some(w) => parse_pair("window", w)?,
        None => default_window(&iv, p.t0()),
    };
    let grid = uniform(lo, hi, args.points.unwrap_or(2001));
    let report = match run_shadow(&p, &phi, dir, norm, &grid, &SupOptions::default(), &ShadowOptions::default()) {
        Ok(r) => r,
        Err(e @ ShadowError::NoLimit { .. }) => return Err(HypothesesFailed(e.to_string()).into()),
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &args.csv {
        emit(Some(path), &report.deviation_csv())?;
    }
    let mut v = serde_json::to_value(&report)?;
    v["anchor_converged"] = json!(report.anchor_converged);
    emit(args.json.as_deref(), &pretty(&v))?;
    if !report.conditions.all_hold() {
        return Err(HypothesesFailed(format!(
            "kappa exists: {}, sup finite: {}, divergence: {}",
            report.conditions.kappa_exists,
            report.conditions.sup_finite,
            report.conditions.divergence.name()
        ))
        .into());
    }
    Ok(())
}

pub fn sharpness(sys: &SystemArgs, args: &SharpnessArgs) -> Result<()> {
    let (p, dir, norm) = prepare(sys)?;
    let eps = args.eps.unwrap_or(0.2);
    if !(eps > 0.0 && eps.is_finite()) {
        bail!("--eps must be positive, got {eps}");
    }
    let opts = SharpnessOptions {
        horizon: args.horizon.as_deref().map(|h| parse_pair("horizon", h)).transpose()?,
        points: args.points.unwrap_or(801),
        ..Default::default()
    };
    let result = if p.form() == Form::III && norm == NormKind::Max {
        maxnorm_form3_experiment(&p, eps, &opts)
    } else {
        sharpness_experiment(&p, dir, eps, norm, &opts)
    };
    let r = match result {
        Ok(r) => r,
        Err(
            e @ (ExtremalError::Hypotheses { .. }
            | ExtremalError::Kappa(KappaError::Nonexistent { .. } | KappaError::SupUnbounded { .. })),
        ) => return Err(HypothesesFailed(e.to_string()).into()),
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &args.csv {
        emit(Some(path), &r.to_csv())?;
    }
    let mut v = serde_json::to_value(&r)?;
    v["passes"] = json!(r.passes(5e-3));
    emit(args.json.as_deref(), &pretty(&v))
}

fn mat_json(m: &Mat2) -> Value {
    let e = |i: usize, j: usize| json!([m.0[i][j].re, m.0[i][j].im]);
    json!([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
}

pub fn transform(sys: &SystemArgs, args: &TransformArgs) -> Result<()> {
    let iv = sys.interval()?;
    let t0 = sys.t0.unwrap_or(if iv.is_bounded() { 0.5 * (iv.a + iv.b) } else { 0.0 });
    let a = MatrixFn::parse(args.a()?)?;
    let spec = TransformSpec::parse(args.r()?, iv, t0)?;
    let sim = Similarity::new(a, spec.clone());
    let n = args.samples.unwrap_or(99).max(3);
    let times = if iv.is_bounded() {
        (1..=n).map(|k| iv.a + (iv.b - iv.a) * k as f64 / (n + 1) as f64).collect()
    } else {
        coarse_grid(&iv, t0, n, 40.0, None)
    };
    let class = sim.classify(&times)?;
    let mut out = json!({
        "interval": iv.to_string(),
        "t0": t0,
        "classification": class.name(),
        "residual": sim.residual(&times)?,
        "samples": times.len(),
        "J_t0": mat_json(&sim.j(t0)?),
    });
    let Some(form) = class.form else {
        emit(args.json.as_deref(), &pretty(&out))?;
        return Err(HypothesesFailed("J(t) = (R' + R A) R^-1 is not in a Jordan-type form".into()).into());
    };
    let jsys = sim.to_jordan(form, t0)?;
    let norm = sys.norm(form)?;
    let p = Prepared::new(jsys)?;
    let dir = resolve_direction(sys.direction()?, &p)?;
    let k = match best_constant(&p, dir, norm, &SupOptions::default()) {
        Ok(r) => r,
        Err(e @ (KappaError::Nonexistent { .. } | KappaError::SupUnbounded { .. })) => {
            emit(args.json.as_deref(), &pretty(&out))?;
            return Err(HypothesesFailed(e.to_string()).into());
        }
        Err(e) => return Err(e.into()),
    };
    out["direction"] = json!(dir);
    out["norm"] = json!(norm);
    out["K_J"] = json!(k.k);
    out["t_star"] = json!(k.t_star);
    let prop = match propagate_constant(k.k, &spec, norm) {
        Ok(p) => p,
        Err(e @ TransformError::Unbounded { .. }) => {
            emit(args.json.as_deref(), &pretty(&out))?;
            return Err(HypothesesFailed(e.to_string()).into());
        }
        Err(e) => return Err(e.into()),
    };
    out["propagated"] = json!(prop);
    emit(args.json.as_deref(), &pretty(&out))
}

pub fn example(id: &str, quick: bool, as_json: bool) -> Result<()> {
    if id == "list" {
        let mut s = String::new();
        for c in registry::CASES.iter() {
            let _ = writeln!(s, "{:7} {:17} {}", c.id, c.status.name(), c.title);
        }
        return emit(None, &s);
    }
    let opts = RunOptions {
        sharpness: !quick,
        ..Default::default()
    };
    let reports = if id == "all" {
        registry::run_all(opts)
    } else {
        vec![registry::run_case_with(id, opts)?]
    };
    let text = if as_json {
        pretty(&serde_json::to_value(&reports)?)
    } else {
        reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n")
    };
    emit(None, &text)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    if !failed.is_empty() {
        bail!("case(s) failed: {}", failed.join(", "));
    }
    Ok(())
}

fn preset(name: &str) -> Result<(JordanSystem, Direction)> {
    let id = match name {
        "saddle" => "ex6.7",
        "node" => "ex6.8",
        "focus" => "ex6.9",
        other => bail!("unknown preset `{other}` (expected saddle, node or focus)"),
    };
    let c = registry::case(id).expect("registered");
    Ok((registry::case_system(id)?, c.direction.expect("presets have a direction")))
}

pub fn portrait(sys: &SystemArgs, args: &PortraitArgs) -> Result<()> {
    let (p, dir, norm) = match &args.preset {
        Some(name) => {
            let (s, d) = preset(name)?;
            let norm = sys.norm(s.form())?;
            let d = match sys.direction()? {
                DirectionChoice::Fixed(x) => x,
                DirectionChoice::Auto => d,
            };
            (Prepared::new(s)?, d, norm)
        }
        None => prepare(sys)?,
    };
    let eps = args.eps.unwrap_or(0.2);
    let pulse = format!("{eps}*(1-cos(t)-abs(cos(t)))");
    let f1 = args.f1.clone().unwrap_or(pulse);
    let f2 = args.f2.clone().unwrap_or_else(|| "0".into());
    let forcing = Forcing::new(
        ScalarFn::parse(&f1).map_err(|e| anyhow!("--f1 `{f1}`: {e}"))?,
        ScalarFn::parse(&f2).map_err(|e| anyhow!("--f2 `{f2}`: {e}"))?,
    );
    let span = match &args.span {
        Some(s) => parse_pair("span", s)?,
        None => (0.0, 10.0),
    };
    let iv = p.interval();
    if !(iv.contains(span.0) && iv.contains(span.1)) {
        bail!("--span {span:?} is not inside {iv}");
    }
    let points = args.points.unwrap_or(201);
    // the tube radius uses the forcing's sampled sup, which is eps for the pulse
    let sampled = uniform(span.0, span.1, 4001)
        .iter()
        .map(|&t| forcing.eval(t).map(|v| v.norm(norm)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let k = if p.sys.is_constant() {
        closed_form_constant(&p.sys, norm)?.value
    } else {
        best_constant(&p, dir, norm, &SupOptions::default())?.k
    };
    let mut csv = String::from("orbit,t,phi_1,phi_2,x_1,x_2,deviation\n");
    let mut worst = 0.0f64;
    for (i, x0) in registry::portrait_starts(args.orbits.unwrap_or(8)).into_iter().enumerate() {
        let o = perturbed_orbit(
            &p,
            dir,
            &forcing,
            x0,
            span,
            points,
            norm,
            &OdeOptions::default(),
            &ImproperOptions::default(),
        )?;
        worst = worst.max(o.max_deviation());
        for (((t, phi), x), d) in o.times.iter().zip(&o.phi).zip(&o.shadow).zip(&o.deviation) {
            let _ = writeln!(csv, "{i},{t},{},{},{},{},{d}", phi.0[0].re, phi.0[1].re, x.0[0].re, x.0[1].re);
        }
    }
    emit(args.out.as_deref(), &csv)?;
    let bound = k * sampled;
    eprintln!("max deviation {worst:.6} vs K*eps = {k}*{sampled} = {bound:.6} ({norm} norm, {dir})");
    if worst > bound + 1e-6 {
        eprintln!("warning: deviation exceeds the tube radius");
    }
    Ok(())
}
