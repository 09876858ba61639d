use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ulamkit::calculus::ImproperOptions;
use ulamkit::expr::Expr;
use ulamkit::jordan::{NormKind, Vec2};
use ulamkit::kappa::{best_constant, kappa_at, native_norm, SupOptions};
use ulamkit::ode::{integrate_system, Forcing, OdeOptions};
use ulamkit::scalar::ScalarFn;
use ulamkit_bench::{cases, oscillating, prepared};

fn expressions(c: &mut Criterion) {
    let src = "2/sqrt(pi)*exp(-t^2) + (1 - 2*t/(1 + t^2))*erfc(1/2 + t)";
    c.bench_function("expr/parse", |b| b.iter(|| Expr::parse(black_box(src)).unwrap()));
    let e = Expr::parse(src).unwrap();
    c.bench_function("expr/eval", |b| b.iter(|| e.eval(black_box(0.37)).unwrap()));
    c.bench_function("expr/differentiate", |b| b.iter(|| e.differentiate().unwrap()));
}

fn grids(c: &mut Criterion) {
    let mut g = c.benchmark_group("grid/build");
    g.sample_size(10);
    for (id, sys, _) in cases() {
        g.bench_with_input(BenchmarkId::from_parameter(id), &sys, |b, sys| b.iter(|| prepared(sys)));
    }
    let osc = oscillating();
    g.bench_function("oscillating", |b| b.iter(|| prepared(&osc)));
    g.finish();
}

fn kappa(c: &mut Criterion) {
    let opts = ImproperOptions::default();
    let mut g = c.benchmark_group("kappa_at");
    for (id, sys, dir) in cases() {
        let p = prepared(&sys);
        let t = p.t0() + 0.1;
        g.bench_function(id, |b| b.iter(|| kappa_at(&p, dir, black_box(t), &opts).unwrap()));
    }
    g.finish();
}

fn constants(c: &mut Criterion) {
    let mut g = c.benchmark_group("best_constant");
    g.sample_size(10);
    for (id, sys, dir) in cases() {
        let p = prepared(&sys);
        let norm = native_norm(p.form());
        g.bench_function(id, |b| b.iter(|| best_constant(&p, dir, norm, &SupOptions::default()).unwrap()));
    }
    g.finish();
}

fn ode(c: &mut Criterion) {
    let (_, sys, _) = cases().into_iter().find(|(id, ..)| *id == "ex6.4").unwrap();
    let f = Forcing::new(ScalarFn::parse("0.2*cos(3*t)").unwrap(), ScalarFn::parse("0.2*sin(3*t)").unwrap());
    let x0 = Vec2::real(1.0, 0.0);
    for tol in [1e-6, 1e-10] {
        let opts = OdeOptions::with_tol(tol);
        c.bench_function(&format!("ode/integrate tol={tol:e}"), |b| {
            b.iter(|| {
                let tr = integrate_system(&sys, &f, x0, 0.0, 5.0, &opts).unwrap();
                tr.at(5.0).unwrap().norm(NormKind::Euclid)
            })
        });
    }
}

criterion_group!(benches, expressions, grids, kappa, constants, ode);
criterion_main!(benches);
