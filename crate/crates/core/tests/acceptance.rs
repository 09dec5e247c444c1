//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::process::ExitCode;
use std::time::Instant;

use analytic_approx::approximant::{reference_instance, Approximant, ErrorReport};
use analytic_approx::cli::run_experiment;
use analytic_approx::config::{RunConfig, VerifyCounts};
use analytic_approx::verify::{gauge_battery, polynomial_battery, mollifier_battery, gate_battery, Property};
use analytic_approx::{Error, SepPolyQ, TargetFunction};

struct Outcome {
    results: Vec<(usize, bool, String)>,
}

impl Outcome {
    fn report(&mut self, id: usize, ok: bool, detail: String) {
        println!("{} criterion {id:>2}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.results.push((id, ok, detail));
    }
}

fn summarize(props: &[Property], names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        match props.iter().find(|p| p.name == *name) {
            Some(p) => {
                ok &= p.passed();
                parts.push(format!("{} {}/{} bad", p.name, p.violations, p.checked));
            }
            None => {
                ok = false;
                parts.push(format!("{name} missing"));
            }
        }
    }
    (ok, parts.join(", "))
}

fn fail_on<T>(out: &mut Outcome, id: usize, r: Result<T, Error>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            out.report(id, false, format!("error: {e}"));
            None
        }
    }
}

fn reference_config() -> RunConfig {
    RunConfig::from_toml_str(include_str!("../../../configs/reference.toml")).expect("reference config parses")
}

fn main() -> ExitCode {
    let mut out = Outcome { results: Vec::new() };
    let counts = VerifyCounts::default();
    let seed = 0;
    let mut min_den = f64::INFINITY;
    let mut den_points = 0usize;
    let mut track = |rep: &ErrorReport| {
        min_den = min_den.min(rep.min_denominator);
        den_points += rep.points.len();
    };

    // 1: desk-scale bound on the reference instance.
    let t0 = Instant::now();
    let (dom, q, target, cfg) = reference_instance(0.2).expect("reference instance");
    let built = Approximant::build(dom, q.clone(), target, cfg.clone());
    let Some(ap) = fail_on(&mut out, 1, built) else {
        return ExitCode::FAILURE;
    };
    let pts = dom.halton_points(2000).expect("halton points");
    let rep = ap.error_report(&pts);
    track(&rep);
    let secs = t0.elapsed().as_secs_f64();
    out.report(
        1,
        rep.points.len() == 2000 && rep.sup_error < 0.2 && rep.margin > 0.0 && secs <= 600.0,
        format!(
            "sup |K - F| = {:.4e} over {} points, margin {:.4}, net size {}, {secs:.1} s",
            rep.sup_error,
            rep.points.len(),
            rep.margin,
            ap.net().len()
        ),
    );

    // 2: constant exactness.
    if let Some(c) = fail_on(&mut out, 2, Approximant::build(dom, q.clone(), TargetFunction::constant(5.0), cfg.clone())) {
        let crep = c.error_report(&pts);
        track(&crep);
        let sup = crep.points.iter().map(|p| (p.k - 5.0).abs()).fold(0.0, f64::max);
        out.report(2, crep.points.len() == 2000 && sup <= 1e-8, format!("sup |K - 5| = {sup:.3e}"));
    }

    // 3: gauge battery.
    if let Some(props) = fail_on(&mut out, 3, gauge_battery(&counts, seed)) {
        let (ok, detail) = summarize(
            &props,
            &[
                "gauge_sandwich",
                "gauge_homogeneity",
                "gauge_subadditivity",
                "gauge_1_lipschitz",
                "gauge_oracle_agreement",
                "gauge_golden_value",
            ],
        );
        out.report(3, ok && props[0].checked == 100_000, detail);
    }

    // 4: polynomial bounds in d = 3.
    let poly = (|| -> Result<Vec<Property>, Error> {
        let mut v = polynomial_battery("euclidean_quartic_d3", &SepPolyQ::euclidean_quartic(3)?.derive_constants(1.5)?, &counts, seed)?;
        v.extend(polynomial_battery("quartic_sum_d3", &SepPolyQ::quartic_sum(3)?.derive_constants(1.5)?, &counts, seed)?);
        Ok(v)
    })();
    if let Some(props) = fail_on(&mut out, 4, poly) {
        let (ok, detail) = summarize(
            &props,
            &[
                "euclidean_quartic_d3: lower_bound",
                "euclidean_quartic_d3: upper_bound",
                "quartic_sum_d3: lower_bound",
                "quartic_sum_d3: upper_bound",
            ],
        );
        out.report(4, ok, detail);
    }

    // 5: mollified functionals.
    if let Some(props) = fail_on(&mut out, 5, mollifier_battery(&ap, &counts, seed)) {
        let (ok, detail) = summarize(
            &props,
            &["phi_emergence", "phi_uniform_lipschitz", "phi_backend_agreement"],
        );
        out.report(5, ok, detail);
    }

    // 6: gate-level facts over all j.
    if let Some(props) = fail_on(&mut out, 6, gate_battery(&ap, &counts, seed)) {
        let (ok, detail) = summarize(&props, &["psi_outside_cell", "psi_first_cover", "u_off_support"]);
        out.report(6, ok && props[0].checked == 10_000, detail);
    }

    // 8: gate margins and the negative control.
    let gs = ap.gates();
    let worst = gs.min_margin();
    let mut broken = gs.specs[1].clone();
    broken.constraints[0].threshold = 2.6;
    let control_fails = matches!(
        analytic_approx::gates::certify_gate(&gs.zeta2.kind, &broken),
        Err(Error::CertificationFailed { .. })
    );
    out.report(
        8,
        worst > 0.0 && control_fails,
        format!("min certified margin {worst:.3e}, negative control fails: {control_fails}"),
    );

    // 9: Lipschitz behavior of K.
    if let Some(l) = fail_on(&mut out, 9, ap.lipschitz_estimate(200, seed)) {
        out.report(
            9,
            l.below_bound && l.no_growth,
            format!(
                "estimate {:.3e} vs chain bound {:.3e}, close-pair quotients {:?}",
                l.estimate, l.chain_bound, l.close_pairs
            ),
        );
    }

    // 10: byte-identical point tables.
    let dirs = [tempfile::tempdir().expect("temp dir"), tempfile::tempdir().expect("temp dir")];
    let mut tables = Vec::new();
    for d in &dirs {
        let mut rc = reference_config();
        rc.eval.points = 300;
        rc.eval.lipschitz_pairs = 20;
        rc.output.dir = d.path().to_path_buf();
        match run_experiment(&rc) {
            Ok(r) => {
                min_den = min_den.min(r.error.min_denominator);
                den_points += r.error.points;
                tables.push(std::fs::read(d.path().join(&rc.output.table)).unwrap_or_default());
            }
            Err(e) => println!("run failed: {e}"),
        }
    }
    let same = tables.len() == 2 && !tables[0].is_empty() && tables[0] == tables[1];
    out.report(10, same, format!("two runs, point tables identical: {same} ({} bytes)", tables.first().map_or(0, Vec::len)));

    // 7: denominators of every run above.
    out.report(
        7,
        min_den >= 0.8 - 1e-6,
        format!("min lambda(u) = {min_den:.6} over {den_points} evaluated points"),
    );

    let failed = out.results.iter().filter(|r| !r.1).count();
    println!("{} of {} criteria passed", out.results.len() - failed, out.results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
