//! The six experiment kinds. Each turns a [`Plan`] into tables, a plot and
//! checks; nothing here touches the filesystem.

use fockpath_core::propagator::{substitution_check, EvolutionJob};
use fockpath_core::{
    omega_transform, plancherel_defect, quantize_poly, sliced_propagator_element, wick_symbol_of, CoherentAmplitude,
    Complex64, Error, FockBasis, OmegaKernel, PhaseGrid, PropagatorResult, Quantizer, Result,
};

use crate::config::{ExperimentKind, Plan};
use crate::manifest::{Check, Metric};
use crate::report::{loglog_svg, num, FitLine, Table};

/// What an experiment hands back to the writer.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
    pub metrics: Vec<Metric>,
}

impl Outcome {
    fn file(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn execute(plan: &Plan) -> Result<Outcome> {
    match plan.config.experiment {
        ExperimentKind::Propagate => propagate(plan, false),
        ExperimentKind::Converge => propagate(plan, true),
        ExperimentKind::SymbolRoundtrip => symbol_roundtrip(plan),
        ExperimentKind::Plancherel => plancherel(plan),
        ExperimentKind::Substitute => substitute(plan),
        ExperimentKind::QuantizeDump => quantize_dump(plan),
    }
}

fn job(plan: &Plan) -> EvolutionJob {
    EvolutionJob {
        symbol: plan.symbol.clone().into(),
        t: plan.config.t,
        n_list: plan.config.n_list.clone(),
        alpha: plan.alpha.clone(),
        beta: plan.beta.clone(),
        config: plan.modes,
        grid: plan.grid,
        scheme: plan.config.scheme.into(),
    }
}

fn kernel_table(r: &PropagatorResult) -> Table {
    let mut t = Table::new(["n", "value_re", "value_im", "exact_re", "exact_im", "abs_error"]);
    for (n, v) in &r.sliced_values {
        t.push(vec![
            n.to_string(),
            num(v.re),
            num(v.im),
            num(r.exact_value.re),
            num(r.exact_value.im),
            num(r.errors[n]),
        ]);
    }
    t
}

fn propagate(plan: &Plan, converge: bool) -> Result<Outcome> {
    let tol = &plan.config.tolerances;
    let r = sliced_propagator_element(&job(plan))?;
    let mut out = Outcome::default();
    let table = kernel_table(&r);
    out.checks.push(Check::flag(
        "finite values",
        r.sliced_values.values().all(|v| v.re.is_finite() && v.im.is_finite()),
    ));
    if plan.config.t == 0.0 {
        out.checks.push(Check::flag(
            "t = 0 rows are exact",
            r.errors.values().all(|&e| e == 0.0),
        ));
    }
    let last_error = *r.errors.values().last().expect("n_list is not empty");
    if let Some(limit) = tol.max_error {
        out.checks.push(Check::below("error at largest n", last_error, limit));
    }
    out.metric("truncation estimate", r.truncation_report.estimate);
    out.metric("identity defect", r.truncation_report.identity_defect);

    let name = if converge { "converge.csv" } else { "propagate.csv" };
    out.file(name, table.to_bytes());

    if converge {
        let fit = r.fitted_rate;
        match fit {
            Some(f) => {
                out.checks
                    .push(Check::within("fitted slope", f.slope, tol.rate_min, tol.rate_max));
                out.checks
                    .push(Check::below("fit residual", f.residual, tol.fit_residual));
                out.metric("fit points", f.points as f64);
            }
            None => out.checks.push(Check::flag("rate fit available", false)),
        }
        let points: Vec<(f64, f64)> = r.errors.iter().map(|(&n, &e)| (n as f64, e)).collect();
        let line = fit.map(|f| {
            let ns = &plan.config.n_list;
            FitLine {
                slope: f.slope,
                intercept: f.intercept,
                from: ns[ns.len() - f.points] as f64,
                to: *ns.last().unwrap() as f64,
            }
        });
        let title = format!("{} slices of {}", plan.config.scheme_name(), plan.symbol.to_text());
        out.file("converge.svg", loglog_svg(&title, &points, line).into_bytes());
    }
    Ok(out)
}

/// Sample points inside the safe radius: the origin, then two rings.
fn sample_points(plan: &Plan) -> Vec<CoherentAmplitude> {
    let d = plan.modes.modes;
    let r_max = (plan.modes.safe_radius_sq.min(1.0) / d as f64).sqrt();
    let mut pts = vec![vec![Complex64::new(0.0, 0.0); d]];
    for ring in [0.5, 1.0] {
        for k in 0..6 {
            let theta = k as f64 * std::f64::consts::PI / 3.0 + 0.3 * ring;
            pts.push(
                (0..d)
                    .map(|j| Complex64::from_polar(ring * r_max, theta + 0.7 * j as f64))
                    .collect(),
            );
        }
    }
    pts.into_iter()
        .map(|p| CoherentAmplitude::new(p).expect("finite amplitudes"))
        .collect()
}

fn symbol_roundtrip(plan: &Plan) -> Result<Outcome> {
    let tol = &plan.config.tolerances;
    let basis = FockBasis::new(plan.modes)?;
    let grid = PhaseGrid::new(plan.modes.modes, plan.grid)?;
    let quant = Quantizer::new(&grid, &basis)?;
    let exact = quantize_poly(&plan.symbol, &basis)?;
    let quad = quant.quantize(&plan.symbol)?;
    let gap = (&exact.matrix - &quad.matrix)
        .iter()
        .fold(0.0f64, |a, e| a.max(e.norm()));

    let wick = omega_transform(&plan.symbol, &OmegaKernel::Wick);
    let weyl = omega_transform(&plan.symbol, &OmegaKernel::Weyl);
    let d = plan.modes.modes;
    let mut header: Vec<String> = (1..=d)
        .flat_map(|j| [format!("psi{j}_re"), format!("psi{j}_im")])
        .collect();
    header.extend(["wick_re", "wick_im", "transform_re", "transform_im", "abs_diff"].map(String::from));
    let mut table = Table::new(header);
    let mut worst: f64 = 0.0;
    for p in sample_points(plan) {
        let got = wick_symbol_of(&exact, &p)?;
        let want = wick.eval(p.as_slice());
        let diff = (got - want).norm();
        worst = worst.max(diff);
        let mut row: Vec<String> = p.as_slice().iter().flat_map(|z| [num(z.re), num(z.im)]).collect();
        row.extend([num(got.re), num(got.im), num(want.re), num(want.im), num(diff)]);
        table.push(row);
    }

    let mut out = Outcome::default();
    out.checks
        .push(Check::below("exact vs quadrature quantization", gap, tol.quantize));
    out.checks
        .push(Check::below("wick symbol vs wick transform", worst, tol.wick));
    out.metric("identity defect", quant.identity_defect());
    out.file("wick.csv", table.to_bytes());
    let text = format!(
        "antiwick = {}\nwick = {}\nweyl = {}\n",
        plan.symbol.to_text(),
        wick.to_text(),
        weyl.to_text()
    );
    out.file("symbols.txt", text.into_bytes());
    Ok(out)
}

fn plancherel(plan: &Plan) -> Result<Outcome> {
    let tol = &plan.config.tolerances;
    let mut table = Table::new(["K", "M", "defect"]);
    let mut defects = Vec::with_capacity(plan.sweep.len());
    for spec in &plan.sweep {
        let grid = PhaseGrid::new(plan.modes.modes, *spec)?;
        let defect = plancherel_defect(&grid, &plan.modes)?;
        table.push(vec![
            spec.radial_order.to_string(),
            spec.angular_order.to_string(),
            num(defect),
        ]);
        defects.push(defect);
    }
    let mut out = Outcome::default();
    let last = *defects.last().expect("sweep is not empty");
    out.checks
        .push(Check::below("defect at finest grid", last, tol.plancherel));
    if defects.len() > 1 {
        // once at rounding level the defect may wobble
        let floor = 1e3 * f64::EPSILON;
        let monotone = defects.windows(2).all(|w| w[1] <= w[0].max(floor));
        out.checks
            .push(Check::flag("defect decreases under refinement", monotone));
    }
    out.file("plancherel.csv", table.to_bytes());
    Ok(out)
}

fn substitute(plan: &Plan) -> Result<Outcome> {
    let tol = &plan.config.tolerances;
    let c = plan
        .mixing
        .as_ref()
        .ok_or_else(|| Error::InvalidJob("missing mixing matrix".into()))?;
    let rep = substitution_check(&job(plan), c)?;
    let mut table = Table::new(["n", "mismatch"]);
    for (n, m) in &rep.mismatches {
        table.push(vec![n.to_string(), num(*m)]);
    }
    let worst = rep.mismatches.values().fold(rep.exact_mismatch, |a, &m| a.max(m));
    let mut out = Outcome::default();
    out.checks
        .push(Check::below("largest mismatch", worst, tol.substitution));
    out.metric("exact mismatch", rep.exact_mismatch);
    out.file("substitute.csv", table.to_bytes());
    Ok(out)
}

fn quantize_dump(plan: &Plan) -> Result<Outcome> {
    let tol = &plan.config.tolerances;
    let basis = FockBasis::new(plan.modes)?;
    let grid = PhaseGrid::new(plan.modes.modes, plan.grid)?;
    let quant = Quantizer::new(&grid, &basis)?;
    let op = quant.quantize(&plan.symbol)?;

    let d = plan.modes.modes;
    let mut header = vec!["index".to_string()];
    header.extend((1..=d).map(|j| format!("n{j}")));
    header.push("padded".into());
    let mut states = Table::new(header);
    for (i, n) in basis.indices().iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(n.as_slice().iter().map(u32::to_string));
        row.push(u8::from(n.total() > plan.modes.cutoff).to_string());
        states.push(row);
    }
    let mut entries = Table::new(["row", "col", "re", "im"]);
    let m = &op.matrix;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            entries.push(vec![i.to_string(), j.to_string(), num(m[(i, j)].re), num(m[(i, j)].im)]);
        }
    }
    let mut out = Outcome::default();
    if plan.symbol.is_real() {
        out.checks.push(Check::below(
            "hermiticity defect",
            op.hermiticity_defect(),
            tol.quantize,
        ));
    }
    out.metric("identity defect", quant.identity_defect());
    out.metric("dimension", basis.dim() as f64);
    out.file("basis.csv", states.to_bytes());
    out.file("operator.csv", entries.to_bytes());
    Ok(out)
}
