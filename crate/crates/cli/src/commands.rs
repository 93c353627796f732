use std::path::Path;

use hypgaf::exact_l1::{build_model, pmf};
use hypgaf::gaf_model::{expected_zero_count, sample_gaf, truncation_degree, GafParams, GafSample};
use hypgaf::ldp_rates::{c_of_t, legendre_numeric, rate_function};
use hypgaf::mc_engine::{
    build_certificate, deviation_scaling_l1, empirical_moments, overcrowding_scaling_l1, tail_exact_dp,
    tail_plain_mc, tail_tilted_l1, EngineConfig, VRule,
};
use hypgaf::zero_counter::{count_roots, count_winding, CountConfig, CountResult};
use hypgaf::Complex64;
use serde_json::{json, Map, Value};

use crate::output::{fmt17, num, print_json, sidecar_path, to_json, write_csv, write_json_file, CliError, CliResult, RunManifest};
use crate::{
    CountArgs, CountMethodArg, DistArgs, ExperimentArgs, ExperimentName, RateArgs, SampleArgs, TailArgs,
    TailMethodArg,
};

pub fn run(cmd: crate::Command) -> CliResult<()> {
    use crate::Command::*;
    match cmd {
        Sample(a) => sample(&a),
        Count(a) => count(&a),
        Rate(a) => rate(&a),
        Dist(a) => dist(&a),
        Tail(a) => tail(&a),
        Experiment(a) => experiment(&a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn sample(a: &SampleArgs) -> CliResult<()> {
    let manifest = RunManifest::start("sample", a, a.seed);
    let params = GafParams::new(a.l, a.r, a.eps_tail)?;
    let s = sample_gaf(&params, a.seed)?;
    let rows: Vec<Vec<String>> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| vec![n.to_string(), fmt17(c.re), fmt17(c.im)])
        .collect();
    write_csv(&a.out, &["n", "re", "im"], &rows)?;
    let results = json!({
        "truncation_degree": s.truncation_degree,
        "tail_sigma2": num(s.tail_sigma2),
        "radius": num(s.radius),
    });
    write_json_file(&sidecar_path(&a.out), &manifest.finish(Some(results)))
}

fn read_coefficients(path: &Path) -> CliResult<Vec<Complex64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let headers = rdr.headers().map_err(|e| CliError::io(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| usage(format!("{}: missing column {name}", path.display())))
    };
    let (cn, cre, cim) = (col("n")?, col("re")?, col("im")?);
    let mut coeffs = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::io(path, e))?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let bad = |what: &str| usage(format!("{}: bad {what} in row {:?}", path.display(), rec));
        let n: usize = field(cn).parse().map_err(|_| bad("n"))?;
        let re: f64 = field(cre).parse().map_err(|_| bad("re"))?;
        let im: f64 = field(cim).parse().map_err(|_| bad("im"))?;
        if n > hypgaf::gaf_model::MAX_DEGREE {
            return Err(usage(format!("{}: degree {n} is too large", path.display())));
        }
        if coeffs.len() <= n {
            coeffs.resize(n + 1, Complex64::new(0.0, 0.0));
        }
        coeffs[n] = Complex64::new(re, im);
    }
    Ok(coeffs)
}

/// Loads `--in`, restoring the tail bound from a `sample` sidecar when one is
/// present and consistent.
fn load_sample(path: &Path) -> CliResult<GafSample> {
    let coeffs = read_coefficients(path)?;
    let mut s = GafSample::from_coeffs(coeffs);
    let side = sidecar_path(path);
    let Ok(text) = std::fs::read_to_string(&side) else {
        return Ok(s);
    };
    let m: Value = serde_json::from_str(&text).map_err(|e| CliError::io(&side, e))?;
    if m["command"] != "sample" {
        return Ok(s);
    }
    let p = &m["params"];
    let (Some(l), Some(r), Some(eps)) = (p["l"].as_f64(), p["r"].as_f64(), p["eps_tail"].as_f64()) else {
        return Ok(s);
    };
    let params = GafParams::new(l, r, eps)?;
    let (degree, tail) = truncation_degree(&params)?;
    if degree == s.truncation_degree {
        s.tail_sigma2 = tail;
        s.radius = r;
        s.l = l;
        s.seed = m["seed"].as_u64().unwrap_or(0);
    }
    Ok(s)
}

fn count(a: &CountArgs) -> CliResult<()> {
    let seed = a.seed.unwrap_or(0);
    let manifest = RunManifest::start("count", a, seed);
    let s = match (&a.input, a.l) {
        (Some(path), _) => load_sample(path)?,
        (None, Some(l)) => {
            let params = GafParams::new(l, a.sample_r.unwrap_or(a.r), a.eps_tail)?;
            sample_gaf(&params, seed)?
        }
        (None, None) => return Err(usage("count needs --in or --L")),
    };
    let cfg = CountConfig {
        max_nodes: a.max_nodes,
        ..CountConfig::new(a.r)?
    };
    cfg.validate()?;
    let winding = match a.method {
        CountMethodArg::Roots => None,
        _ => Some(count_winding(&s, &cfg)?),
    };
    let roots = match a.method {
        CountMethodArg::Winding => None,
        _ => Some(count_roots(&s, &cfg)?),
    };
    let agreement = match (winding, roots) {
        (Some(w), Some(r)) => Some(w.count == r.count),
        _ => None,
    };
    let chosen: &CountResult = winding.as_ref().or(roots.as_ref()).expect("one method ran");
    let mut diagnostics = Map::new();
    if let Some(w) = &winding {
        diagnostics.insert("winding".into(), to_json(w));
    }
    if let Some(r) = &roots {
        diagnostics.insert("roots".into(), to_json(r));
    }
    diagnostics.insert("truncation_degree".into(), s.truncation_degree.into());
    diagnostics.insert("tail_amplitude".into(), num(s.tail_amplitude()));
    let mut out = Map::new();
    out.insert("count".into(), chosen.count.into());
    out.insert("method".into(), to_json(&a.method));
    if let Some(ok) = agreement {
        out.insert("agreement".into(), ok.into());
    }
    out.insert("diagnostics".into(), Value::Object(diagnostics));
    out.insert("manifest".into(), manifest.finish(None));
    print_json(&Value::Object(out));
    if agreement == Some(false) {
        return Err(CliError::Reported(format!(
            "winding count {} and root count {} disagree",
            winding.map_or(0, |w| w.count),
            roots.map_or(0, |r| r.count)
        )));
    }
    Ok(())
}

fn rate(a: &RateArgs) -> CliResult<()> {
    let manifest = RunManifest::start("rate", a, 0);
    let mut out = Map::new();
    out.insert("alpha".into(), num(a.alpha));
    let (closed, arg) = if let Some(x) = a.x {
        let res = rate_function(a.alpha, x)?;
        out.insert("x".into(), num(x));
        out.insert("regime".into(), to_json(&res.regime));
        out.insert("branch".into(), to_json(&res.branch));
        (res.value, x)
    } else {
        let t = a.t.expect("clap requires --x or --t");
        out.insert("t".into(), num(t));
        (c_of_t(a.alpha, t)?, t)
    };
    out.insert("value".into(), num(closed));
    out.insert("infinite".into(), (closed == f64::INFINITY).into());
    if a.numeric_check {
        let oracle = legendre_numeric(a.alpha, arg)?;
        let diff = if closed.is_infinite() && oracle.diverged {
            0.0
        } else {
            closed - oracle.value
        };
        out.insert("numeric".into(), to_json(&oracle));
        out.insert("difference".into(), num(diff));
    }
    out.insert("manifest".into(), manifest.finish(None));
    print_json(&Value::Object(out));
    Ok(())
}

fn dist(a: &DistArgs) -> CliResult<()> {
    let manifest = RunManifest::start("dist", a, 0);
    let model = build_model(a.r, a.eps_tv)?;
    let p = pmf(&model)?;
    let rows: Vec<Vec<String>> = p
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| vec![k.to_string(), fmt17(*v)])
        .collect();
    write_csv(&a.out, &["k", "prob"], &rows)?;
    let moments = json!({
        "terms": model.terms(),
        "mean": num(model.mean()),
        "variance": num(model.variance()),
        "mu": num(model.mu()),
        "v1": num(model.v1()),
        "pmf_total": num(p.total()),
        "pmf_mean": num(p.mean()),
        "tv_bound": num(p.tv_bound),
    });
    write_json_file(&sidecar_path(&a.out), &manifest.finish(Some(json!({ "moments": moments }))))
}

fn tail(a: &TailArgs) -> CliResult<()> {
    let manifest = RunManifest::start("tail", a, a.seed);
    if a.method != TailMethodArg::Mc && a.l != 1.0 {
        return Err(usage(format!("--method {:?} requires --L 1", a.method).to_lowercase()));
    }
    let est = match a.method {
        TailMethodArg::Exact => tail_exact_dp(&build_model(a.r, a.eps_tv)?, a.v)?,
        TailMethodArg::Tilted => {
            let cfg = EngineConfig::default();
            tail_tilted_l1(&build_model(a.r, a.eps_tv)?, a.v, a.trials, a.seed, cfg.exec)?
        }
        TailMethodArg::Mc => {
            let cfg = EngineConfig {
                epsilon_tail: a.eps_tail,
                ..EngineConfig::default()
            };
            tail_plain_mc(a.l, a.r, a.v, a.trials, a.seed, &cfg)?
        }
    };
    let mut out = match to_json(&est) {
        Value::Object(o) => o,
        _ => Map::new(),
    };
    out.insert("manifest".into(), manifest.finish(None));
    print_json(&Value::Object(out));
    Ok(())
}

fn need_radii(a: &ExperimentArgs) -> CliResult<()> {
    if a.r.is_empty() {
        return Err(usage("this experiment needs --r"));
    }
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> CliResult<()> {
    let manifest = RunManifest::start("experiment", a, a.seed);
    let (header, rows): (&[&str], Vec<Vec<String>>) = match a.name {
        ExperimentName::Moments => {
            need_radii(a)?;
            let cfg = EngineConfig::default();
            let mut rows = Vec::new();
            for &r in &a.r {
                let m = empirical_moments(a.l, r, a.trials, a.seed, &cfg)?;
                rows.push(vec![
                    fmt17(a.l),
                    fmt17(r),
                    m.trials.to_string(),
                    fmt17(m.mean),
                    fmt17(m.variance),
                    fmt17(m.stderr_mean),
                    fmt17(expected_zero_count(a.l, r)),
                    m.resampled.to_string(),
                    m.unreliable.to_string(),
                ]);
            }
            (
                &["L", "r", "trials", "mean", "variance", "stderr_mean", "expected_mean", "resampled", "unreliable"],
                rows,
            )
        }
        ExperimentName::Deviation => {
            if a.j_min > a.j_max {
                return Err(usage("--j-min exceeds --j-max"));
            }
            let table = deviation_scaling_l1(a.alpha, a.t, a.j_min..=a.j_max, a.epsilon)?;
            let rows = table
                .iter()
                .map(|d| {
                    vec![
                        d.j.to_string(),
                        fmt17(d.r),
                        fmt17(d.mu),
                        fmt17(d.v1),
                        d.upper_threshold.to_string(),
                        d.lower_threshold.to_string(),
                        fmt17(d.log_p),
                        fmt17(d.log_err),
                        fmt17(d.ratio),
                    ]
                })
                .collect();
            (
                &["j", "r", "mu", "v1", "upper_threshold", "lower_threshold", "log_p", "log_err", "ratio"],
                rows,
            )
        }
        ExperimentName::Overcrowding => {
            need_radii(a)?;
            let rule = match a.v {
                Some(v) => VRule::Fixed(v),
                None => VRule::Assumption { constant: a.v_constant },
            };
            let table = overcrowding_scaling_l1(&a.r, &rule, a.epsilon)?;
            let rows = table
                .iter()
                .map(|o| {
                    vec![
                        fmt17(o.r),
                        o.v.to_string(),
                        fmt17(o.neg_log_p),
                        fmt17(o.log_err),
                        fmt17(o.normalized),
                        o.admissible.to_string(),
                    ]
                })
                .collect();
            (&["r", "v", "neg_log_p", "log_err", "normalized", "admissible"], rows)
        }
        ExperimentName::Certificate => {
            need_radii(a)?;
            if a.m.is_empty() {
                return Err(usage("the certificate experiment needs --m"));
            }
            let mut rows = Vec::new();
            for &r in &a.r {
                for &m in &a.m {
                    let c = build_certificate(a.l, r, m, a.seed)?;
                    rows.push(vec![
                        fmt17(a.l),
                        fmt17(r),
                        m.to_string(),
                        c.coeffs.len().saturating_sub(1).to_string(),
                        fmt17(c.rouche_margin),
                        fmt17(c.uniform_margin),
                        c.verified_count.to_string(),
                    ]);
                }
            }
            (
                &["L", "r", "m", "degree", "rouche_margin", "uniform_margin", "verified_count"],
                rows,
            )
        }
    };
    write_csv(&a.out, header, &rows)?;
    let results = json!({ "rows": rows.len(), "columns": header });
    write_json_file(&sidecar_path(&a.out), &manifest.finish(Some(results)))
}
