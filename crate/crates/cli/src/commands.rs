use crate::config::{
    AmplitudesArgs, AxisSpec, DynamicsArgs, DynamicsInputs, EsdArgs, ParamBlock, PoleKindArg, PolesArgs, RebuildArgs,
    RegionArgs, SurfaceArgs, VerifyArgs,
};
use crate::error::CliError;
use crate::output::{col, num, Sink, Table};
use crate::svg::{contour_plot, line_plot, Frame};
use orbit_entangle::amplitudes::{amplitudes, region_scan, AmplitudeOptions, Axis, Grid3, RegionSample, Spacing};
use orbit_entangle::corpus;
use orbit_entangle::dynamics::{
    concurrence_closed, concurrence_surface, density_at, esd_curve, esd_time, lindblad_integrate, relaxation_profile,
    EsdTime, RelaxationProfile, TwoQubitState,
};
use orbit_entangle::parallel::Execution;
use orbit_entangle::params::{derive_orbit_point, to_lab_frame, OrbitPoint};
use orbit_entangle::poles::{solve_a_poles, solve_x_poles, Branch};
use serde_json::json;
use std::path::Path;

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn opts(kmax: Option<usize>) -> AmplitudeOptions {
    kmax.map(AmplitudeOptions::with_k_max).unwrap_or_default()
}

fn axis_or(a: Option<AxisSpec>, default: &str) -> Axis {
    a.unwrap_or_else(|| default.parse().expect("valid default axis")).0
}

fn plot_coord(axis: &Axis, v: f64) -> f64 {
    match axis.spacing {
        Spacing::Linear => v,
        Spacing::Log => v.log10(),
    }
}

fn axis_label(axis: &Axis, name: &str) -> String {
    match axis.spacing {
        Spacing::Linear => name.to_string(),
        Spacing::Log => format!("log10 {name}"),
    }
}

fn range(vals: &[f64]) -> (f64, f64) {
    let finite = vals.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

pub fn poles(a: &PolesArgs, sink: &mut Sink) -> Result<String, CliError> {
    let beta = a.beta.ok_or_else(|| CliError::Usage("missing --beta".into()))?;
    let kind = a.kind.unwrap_or(PoleKindArg::A);
    let kmax = a.kmax.unwrap_or(10);
    let set = match kind {
        PoleKindArg::A => solve_a_poles(beta, kmax)?,
        PoleKindArg::X => solve_x_poles(beta, kmax)?,
    };
    let kind_name = format!("{kind:?}");
    let mut table = Table::new(vec![
        col("kind", "-"),
        col("branch", "-"),
        col("k", "-"),
        col("re", "dimensionless"),
        col("im", "dimensionless"),
        col("residual", "dimensionless"),
    ]);
    let special = match kind {
        PoleKindArg::A => "y0",
        PoleKindArg::X => "x0",
    };
    table.push(vec![
        kind_name.clone(),
        special.into(),
        "0".into(),
        num(set.special.re),
        num(set.special.im),
        num(set.special_residual),
    ]);
    for p in &set.members {
        let branch = match p.branch {
            Branch::Z1 => "z1",
            Branch::Z2 => "z2",
        };
        table.push(vec![
            kind_name.clone(),
            branch.into(),
            p.k.to_string(),
            num(p.z.re),
            num(p.z.im),
            num(p.residual),
        ]);
    }
    sink.csv("poles.csv", &table)?;
    sink.json(
        "poles.json",
        &json!({
            "command": "poles",
            "version": VERSION,
            "beta": beta,
            "kind": kind_name,
            "kmax": kmax,
            "rows": table.rows.len(),
            "special_order": set.special_order,
            "max_residual": set.residual,
            "columns": table.columns,
        }),
    )?;
    Ok(format!("{} poles, max residual {:.3e}", table.rows.len(), set.residual))
}

fn amplitude_columns() -> Vec<crate::output::Column> {
    vec![
        col("r", "R/xi"),
        col("y", "Omega xi"),
        col("alpha", "a xi"),
        col("gamma", "-"),
        col("beta", "-"),
        col("A", "eta0^2"),
        col("re_X", "eta0^2"),
        col("im_X", "eta0^2"),
        col("abs_X", "eta0^2"),
        col("margin", "eta0^2, |X| - A"),
        col("entangled", "bool"),
        col("k_used", "-"),
        col("tail_estimate", "eta0^2"),
        col("imag_leak", "eta0^2"),
    ]
}

fn point_cells(pt: &OrbitPoint) -> Vec<String> {
    vec![
        num(pt.r()),
        num(pt.y()),
        num(pt.alpha()),
        num(pt.gamma()),
        num(pt.beta()),
    ]
}

fn sample_row(s: &RegionSample) -> Vec<String> {
    let mut row = point_cells(&s.point);
    match &s.amplitudes {
        Some(a) => row.extend([
            num(a.a_val),
            num(a.x_val.re),
            num(a.x_val.im),
            num(a.x_val.norm()),
            num(s.margin),
            s.entangled.to_string(),
            a.k_used.to_string(),
            num(a.tail_estimate),
            num(a.imag_leak),
        ]),
        None => {
            row.extend(std::iter::repeat(num(f64::NAN)).take(5));
            row.push("false".into());
            row.extend(std::iter::repeat(String::new()).take(3));
        }
    }
    row.push(s.error.clone().unwrap_or_default());
    row
}

pub fn amplitudes_cmd(a: &AmplitudesArgs, sink: &mut Sink) -> Result<String, CliError> {
    let block = a.params()?;
    let (pt, lab) = match block {
        ParamBlock::Orbit(pt) => (pt, None),
        ParamBlock::Physical(p) => (derive_orbit_point(&p)?, Some(to_lab_frame(&p)?)),
    };
    let o = opts(a.kmax);
    let res = amplitudes(&pt, &o)?;
    let margin = res.x_val.norm() - res.a_val;
    let sample = RegionSample {
        point: pt,
        entangled: margin > 0.0,
        margin,
        amplitudes: Some(res),
        error: None,
    };
    let mut columns = amplitude_columns();
    columns.push(col("error", "-"));
    let mut table = Table::new(columns);
    table.push(sample_row(&sample));
    sink.csv("amplitudes.csv", &table)?;
    sink.json(
        "amplitudes.json",
        &json!({
            "command": "amplitudes",
            "version": VERSION,
            "input": a,
            "kmax": o.k_max,
            "angular_velocity": pt.angular(),
            "lab_frame": lab.map(|f| json!({
                "omega_gap": f.omega_gap_lab,
                "coupling": f.coupling_lab,
                "window": f.window_lab,
                "accel": f.accel_lab,
                "accel_coordinate": f.accel_coordinate,
                "gamma": f.gamma,
                "beta": f.beta,
            })),
            "A": res.a_val,
            "X": [res.x_val.re, res.x_val.im],
            "margin": margin,
            "entangled": margin > 0.0,
            "columns": table.columns,
        }),
    )?;
    Ok(format!(
        "A = {:.6e}, |X| = {:.6e}, {}",
        res.a_val,
        res.x_val.norm(),
        if margin > 0.0 { "entangled" } else { "not entangled" }
    ))
}

pub fn region(a: &RegionArgs, sink: &mut Sink) -> Result<String, CliError> {
    let grid = Grid3 {
        r: axis_or(a.r, "0.05:3:60"),
        y: axis_or(a.y, "0.05:3:60"),
        alpha: axis_or(a.alpha, "0:1:5"),
    };
    let samples = region_scan(&grid, &opts(a.kmax), Execution::default())?;
    let failed = samples.iter().filter(|s| s.error.is_some()).count();
    if failed == samples.len() {
        return Err(CliError::Numerical(format!(
            "all {} points failed, first: {}",
            failed,
            samples[0].error.as_deref().unwrap_or("")
        )));
    }
    let mut columns = amplitude_columns();
    columns.push(col("error", "-"));
    let mut table = Table::new(columns);
    for s in &samples {
        table.push(sample_row(s));
    }
    sink.csv("region.csv", &table)?;

    let (rs, ys, als) = (grid.r.values(), grid.y.values(), grid.alpha.values());
    let slice_len = rs.len() * ys.len();
    let mut slices = Vec::new();
    for (k, &alpha) in als.iter().enumerate() {
        let slice = &samples[k * slice_len..(k + 1) * slice_len];
        let entangled = slice.iter().filter(|s| s.entangled).count();
        slices.push(json!({
            "alpha": alpha,
            "entangled_points": entangled,
            "entangled_fraction": entangled as f64 / slice_len as f64,
        }));
        let xs: Vec<f64> = rs.iter().map(|&v| plot_coord(&grid.r, v)).collect();
        let yv: Vec<f64> = ys.iter().map(|&v| plot_coord(&grid.y, v)).collect();
        let field: Vec<f64> = slice.iter().map(|s| s.margin).collect();
        let frame = Frame {
            title: format!("|X| = A at alpha = {alpha:.4}"),
            x_label: axis_label(&grid.r, "r"),
            y_label: axis_label(&grid.y, "y"),
            x: range(&xs),
            y: range(&yv),
        };
        sink.svg(&format!("region_alpha_{k:03}.svg"), || {
            contour_plot(&frame, &xs, &yv, &field, &[0.0])
        })?;
    }
    sink.json(
        "region.json",
        &json!({
            "command": "region",
            "version": VERSION,
            "grid": { "r": AxisSpec(grid.r), "y": AxisSpec(grid.y), "alpha": AxisSpec(grid.alpha) },
            "kmax": opts(a.kmax).k_max,
            "points": samples.len(),
            "failed": failed,
            "slices": slices,
            "columns": table.columns,
        }),
    )?;
    Ok(format!("{} points, {} failed", samples.len(), failed))
}

fn profile_json(p: &RelaxationProfile) -> serde_json::Value {
    json!({
        "re_i_minus": p.re_i_minus,
        "re_i_plus": p.re_i_plus,
        "delta": p.delta,
        "one_minus_delta": p.one_minus_delta,
        "t1": p.t1,
        "t2": p.t2,
        "beta_eff_omega": p.beta_eff_omega,
        "t_eff": p.t_eff,
    })
}

pub fn dynamics(a: &DynamicsArgs, sink: &mut Sink) -> Result<String, CliError> {
    let inp: DynamicsInputs = a.inputs()?;
    if inp.eta0.is_nan() || inp.eta0 <= 0.0 {
        return Err(CliError::Usage(
            "--eta0 must be > 0: rescaled time is undefined otherwise".into(),
        ));
    }
    let p = relaxation_profile(inp.omega, inp.accel, inp.eta0, inp.gamma)?;
    let to_rescaled = inp.eta0 * inp.eta0 * inp.omega / inp.gamma;
    let t_max = a.t_max.unwrap_or(3.0 * p.t2 * to_rescaled);
    let steps = a.steps.unwrap_or(400);
    if !(t_max.is_finite() && t_max > 0.0) || steps == 0 {
        return Err(CliError::Usage("--t-max must be finite and > 0, --steps >= 1".into()));
    }
    let tr: Vec<f64> = (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect();
    let tl: Vec<f64> = tr.iter().map(|&t| p.time_from_rescaled(t)).collect();

    let mut table = Table::new(vec![
        col("t_rescaled", "eta0^2 Omega t / gamma"),
        col("t", "1/Omega"),
        col("rho00", "-"),
        col("rho11", "-"),
        col("rho22", "-"),
        col("rho33", "-"),
        col("re_rho03", "-"),
        col("im_rho03", "-"),
        col("concurrence", "-"),
    ]);
    let mut states = Vec::with_capacity(tl.len());
    let mut series: [Vec<(f64, f64)>; 4] = Default::default();
    for (&t_r, &t) in tr.iter().zip(&tl) {
        let s = density_at(&p, t)?;
        let c = concurrence_closed(&p, t)?;
        let d = |i: usize| s.get(i, i).re;
        table.push(vec![
            num(t_r),
            num(t * inp.omega),
            num(d(0)),
            num(d(1)),
            num(d(2)),
            num(d(3)),
            num(s.get(0, 3).re),
            num(s.get(0, 3).im),
            num(c),
        ]);
        for (k, v) in [d(0), d(1), d(3), c].into_iter().enumerate() {
            series[k].push((t_r, v));
        }
        states.push(s);
    }
    let lindblad_dev = if a.lindblad.unwrap_or(false) {
        let out = lindblad_integrate(&p, &TwoQubitState::bell(), &tl)?;
        Some(
            out.iter()
                .zip(&states)
                .map(|(x, y)| x.max_distance(y))
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    sink.csv("dynamics.csv", &table)?;
    let esd = match esd_time(&p) {
        EsdTime::At(t) => json!({ "t": t * inp.omega, "t_rescaled": t * to_rescaled, "over_t2": t / p.t2 }),
        EsdTime::Never => serde_json::Value::Null,
    };
    sink.json(
        "dynamics.json",
        &json!({
            "command": "dynamics",
            "version": VERSION,
            "input": inp,
            "profile": profile_json(&p),
            "t_esd": esd,
            "lindblad_max_deviation": lindblad_dev,
            "columns": table.columns,
        }),
    )?;
    sink.svg("dynamics.svg", || {
        let frame = Frame {
            title: format!("a/Omega = {:.4}, delta = {:.4}", inp.accel / inp.omega, p.delta),
            x_label: "t' = eta0^2 Omega t / gamma".into(),
            y_label: "population / concurrence".into(),
            x: (0.0, t_max),
            y: (0.0, 1.0),
        };
        let [s0, s1, s3, sc] = series;
        line_plot(
            &frame,
            &[("rho00", s0), ("rho11 = rho22", s1), ("rho33", s3), ("C", sc)],
            &[],
        )
    })?;
    Ok(match esd_time(&p) {
        EsdTime::At(t) => format!("delta = {:.6}, t_esd / T2 = {:.6}", p.delta, t / p.t2),
        EsdTime::Never => format!("delta = {:.6}, no sudden death", p.delta),
    })
}

pub fn surface(a: &SurfaceArgs, sink: &mut Sink) -> Result<String, CliError> {
    let (omega, eta0, radius) = (a.omega.unwrap_or(1.0), a.eta0.unwrap_or(0.1), a.radius.unwrap_or(1.0));
    let ratio = axis_or(a.ratio, "0.1:10:40:log");
    let t = axis_or(a.t, "0:8:81");
    let (rv, tv) = (ratio.values(), t.values());
    let pts = concurrence_surface(omega, eta0, radius, &rv, &tv)?;
    let mut table = Table::new(vec![
        col("accel_ratio", "a/Omega"),
        col("t_rescaled", "eta0^2 Omega t / gamma"),
        col("concurrence", "-"),
    ]);
    for s in &pts {
        table.push(vec![num(s.accel_ratio), num(s.t_rescaled), num(s.concurrence)]);
    }
    sink.csv("concurrence_surface.csv", &table)?;
    sink.json(
        "concurrence_surface.json",
        &json!({
            "command": "concurrence-surface",
            "version": VERSION,
            "omega": omega, "eta0": eta0, "radius": radius,
            "ratio": AxisSpec(ratio), "t": AxisSpec(t),
            "columns": table.columns,
        }),
    )?;
    sink.svg("concurrence_surface.svg", || {
        // rows follow the ratio axis, so the time axis runs fastest
        let xs: Vec<f64> = tv.iter().map(|&v| plot_coord(&t, v)).collect();
        let ys: Vec<f64> = rv.iter().map(|&v| plot_coord(&ratio, v)).collect();
        let field: Vec<f64> = pts.iter().map(|s| s.concurrence).collect();
        let frame = Frame {
            title: "concurrence levels 0.1 ... 0.9".into(),
            x_label: axis_label(&t, "t'"),
            y_label: axis_label(&ratio, "a/Omega"),
            x: range(&xs),
            y: range(&ys),
        };
        contour_plot(&frame, &xs, &ys, &field, &[0.1, 0.3, 0.5, 0.7, 0.9])
    })?;
    Ok(format!("{} points", pts.len()))
}

pub fn esd(a: &EsdArgs, sink: &mut Sink) -> Result<String, CliError> {
    let (omega, eta0, radius) = (a.omega.unwrap_or(1.0), a.eta0.unwrap_or(0.1), a.radius.unwrap_or(1.0));
    let ratio = axis_or(a.ratio, "0.01:100:81:log");
    let curve = esd_curve(omega, eta0, radius, &ratio.values())?;
    let limit = (1.0 / (2f64.sqrt() - 1.0)).ln();
    let mut table = Table::new(vec![col("accel_ratio", "a/Omega"), col("t_esd_over_t2", "T2")]);
    let mut line = Vec::new();
    for &(r, t) in &curve {
        let v = t.finite().unwrap_or(f64::INFINITY);
        table.push(vec![num(r), num(v)]);
        line.push((plot_coord(&ratio, r), v));
    }
    sink.csv("esd_curve.csv", &table)?;
    sink.json(
        "esd_curve.json",
        &json!({
            "command": "esd-curve",
            "version": VERSION,
            "omega": omega, "eta0": eta0, "radius": radius,
            "ratio": AxisSpec(ratio),
            "large_accel_limit": limit,
            "columns": table.columns,
        }),
    )?;
    sink.svg("esd_curve.svg", || {
        let ys: Vec<f64> = line.iter().map(|p| p.1).collect();
        let (_, hi) = range(&ys);
        let frame = Frame {
            title: "entanglement sudden death".into(),
            x_label: axis_label(&ratio, "a/Omega"),
            y_label: "t_esd / T2".into(),
            x: range(&line.iter().map(|p| p.0).collect::<Vec<_>>()),
            y: (0.0, hi.max(1.0)),
        };
        line_plot(&frame, &[("t_esd / T2", line)], &[("ln(1/(sqrt2 - 1))", limit)])
    })?;
    let finite = curve.iter().filter(|(_, t)| t.finite().is_some()).count();
    Ok(format!(
        "{} ratios, {} with finite sudden-death time",
        curve.len(),
        finite
    ))
}

pub fn verify(a: &VerifyArgs, sink: &mut Sink) -> Result<String, CliError> {
    let (source, text) = match &a.corpus {
        Some(p) => (
            p.display().to_string(),
            std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        ),
        None => ("built-in".to_string(), corpus::EMBEDDED.to_string()),
    };
    let records = corpus::parse(&text)?;
    let reg = a.regulator.regulator()?;
    let kmax = a.kmax.unwrap_or(200);
    let checks = corpus::verify(
        &records,
        &AmplitudeOptions::with_k_max(kmax),
        &reg,
        Execution::default(),
    )?;
    let mut fingerprints: Vec<&str> = records.iter().map(|r| r.fingerprint.as_str()).collect();
    fingerprints.sort_unstable();
    fingerprints.dedup();
    if fingerprints.iter().any(|f| *f != reg.fingerprint()) {
        eprintln!(
            "warning: corpus fingerprints {fingerprints:?} differ from the regulator in use ({})",
            reg.fingerprint()
        );
    }
    let failed: Vec<_> = checks.iter().enumerate().filter(|(_, c)| !c.pass).collect();
    for (i, c) in &failed {
        let r = &c.record;
        eprintln!(
            "row {i}: {} at ({}, {}, {}) rel error {:.3e} > {:.3e}",
            r.quantity, r.r, r.y, r.alpha, c.rel_error, c.tolerance
        );
    }
    let rows: Vec<_> = checks
        .iter()
        .map(|c| {
            let r = &c.record;
            json!({
                "r": r.r, "y": r.y, "alpha": r.alpha,
                "quantity": r.quantity.to_string(),
                "stored": [r.value.re, r.value.im],
                "recomputed": [c.recomputed.re, c.recomputed.im],
                "rel_error": c.rel_error,
                "tolerance": c.tolerance,
                "pass": c.pass,
                "fingerprint": r.fingerprint,
            })
        })
        .collect();
    sink.json(
        "verify.json",
        &json!({
            "command": "verify",
            "version": VERSION,
            "corpus": source,
            "header": corpus::HEADER,
            "fingerprints": { "corpus": fingerprints, "regulator": reg.fingerprint() },
            "kmax": kmax,
            "rows": rows,
            "failed": failed.len(),
        }),
    )?;
    if failed.is_empty() {
        Ok(format!("{} rows within tolerance", checks.len()))
    } else {
        Err(CliError::Breach(failed.len()))
    }
}

pub fn rebuild(a: &RebuildArgs, out_dir: &Path) -> Result<String, CliError> {
    let reg = a.regulator.regulator()?;
    let records = corpus::build(&reg, Execution::default())?;
    let path = a.output.clone().unwrap_or_else(|| out_dir.join("oracle_corpus.txt"));
    std::fs::write(&path, corpus::render(&records)).map_err(|e| CliError::io(&path, e))?;
    Ok(format!(
        "{} records, fingerprint {}, written to {}",
        records.len(),
        reg.fingerprint(),
        path.display()
    ))
}
