//! Command implementations, the echoed run configuration and the
//! verification report.

use std::path::Path;

use serde::Serialize;

use super::svg::{heatmap, Chart, Scale, Series};
use super::{out_dir, write_artifact, CliError, Cli, Command, FemArgs, Format, InnerArg, OperatorArg, PlotKind, Result};
use crate::ballspec::{mu1_ball, neumann_spectrum_ball, upsilon1_ball, upsilon1_poly_ball, BallSpec, BallSpectrum, MAX_POLY_M};
use crate::fem::{convergence_study, eig_mesh, ConvergenceStudy, EigOptions, InnerSolver, Operator, MAX_M};
use crate::geometry::{domain_metrics, triangulate, Domain, Mesh};
use crate::mps::{mps_find, MpsProblem, SigmaCurve, MAX_TERMS};
use crate::weinberger::{certify_upper_bound, TrialCertificate, FIELD_TOL, MEAN_TOL, QUOTIENT_TOL};

/// Largest `sigma` accepted at an MPS minimum.
pub const MPS_SIGMA_TOL: f64 = 1e-6;
/// Relative FEM/MPS agreement required per unit of the power `2m`.
pub const MPS_AGREEMENT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub eigen_residual: f64,
    pub field_residual: f64,
    pub mean_residual: f64,
    pub quotient: f64,
    pub mps_sigma: f64,
}

/// Fully resolved configuration of one invocation. `args` is the
/// canonical command line; parsing it again gives the same configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lumped: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<InnerArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mps: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<PlotKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list: Option<bool>,
    pub threads: usize,
    pub format: Format,
    pub plots: bool,
    pub out: String,
    pub tolerances: Tolerances,
    pub args: Vec<String>,
}

fn check_m(m: u32, max: u32) -> Result<u32> {
    if (1..=max).contains(&m) {
        Ok(m)
    } else {
        Err(CliError::Usage(format!("--m must lie in 1..={max}, got {m}")))
    }
}

fn check_h(h: &[f64]) -> Result<()> {
    if h.is_empty() || h.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(CliError::Usage(format!("--h needs positive mesh sizes, got {h:?}")));
    }
    Ok(())
}

fn domain(spec: &str) -> Result<Domain> {
    super::corpus::resolve(spec).map_err(|e| CliError::Usage(e.to_string()))
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn value_name<T: clap::ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

impl RunConfig {
    /// Resolve `cli`, returning the configuration and the parsed domain.
    pub fn resolve(cli: &Cli) -> Result<(RunConfig, Option<Domain>)> {
        let mut c = RunConfig {
            command: "",
            domain: None,
            n: None,
            radius: None,
            m: None,
            count: None,
            operator: None,
            h: None,
            order: None,
            lumped: None,
            inner: None,
            dump: None,
            mps: None,
            terms: None,
            interval: None,
            input: None,
            kind: None,
            output: None,
            list: None,
            threads: cli.threads,
            format: cli.format,
            plots: cli.plots,
            out: out_dir(cli).display().to_string(),
            tolerances: Tolerances {
                eigen_residual: crate::fem::RESIDUAL_TOL,
                field_residual: FIELD_TOL,
                mean_residual: MEAN_TOL,
                quotient: QUOTIENT_TOL,
                mps_sigma: MPS_SIGMA_TOL,
            },
            args: Vec::new(),
        };
        let mut d = None;
        let fem_args = |c: &mut RunConfig, f: &FemArgs| -> Result<()> {
            check_h(&f.h)?;
            if f.h.len() < 3 || f.h.windows(2).any(|w| w[1] >= w[0]) {
                return Err(CliError::Usage(format!(
                    "--h needs at least three strictly decreasing sizes, got {}",
                    list(&f.h)
                )));
            }
            if !(1..=2).contains(&f.order) {
                return Err(CliError::Usage(format!("--order must be 1 or 2, got {}", f.order)));
            }
            if !(f.tol.is_finite() && f.tol > 0.0) {
                return Err(CliError::Usage(format!("--tol must be positive, got {}", f.tol)));
            }
            c.h = Some(f.h.clone());
            c.order = Some(f.order);
            c.tolerances.eigen_residual = f.tol;
            Ok(())
        };
        match &cli.command {
            Command::Ball { n, radius, m, count } => {
                c.command = "ball";
                BallSpec::new(*n, *radius).map_err(|e| CliError::Usage(e.to_string()))?;
                if *count == 0 {
                    return Err(CliError::Usage("--count must be positive".into()));
                }
                c.n = Some(*n);
                c.radius = Some(*radius);
                c.m = Some(check_m(*m, MAX_POLY_M)?);
                c.count = Some(*count);
            }
            Command::Verify { domain: s, m, fem, mps, terms } => {
                c.command = "verify";
                let dom = domain(s)?;
                c.domain = Some(dom.spec_string());
                d = Some(dom);
                c.m = Some(check_m(*m, MAX_M as u32)?);
                fem_args(&mut c, fem)?;
                c.mps = Some(*mps);
                if *mps {
                    c.terms = Some(check_terms(*terms)?);
                }
            }
            Command::Fem { domain: s, operator, m, fem, lumped, inner, dump } => {
                c.command = "fem";
                let dom = domain(s)?;
                c.domain = Some(dom.spec_string());
                d = Some(dom);
                c.operator = Some(*operator);
                if *operator == OperatorArg::Poly {
                    c.m = Some(check_m(*m, MAX_M as u32)?);
                }
                fem_args(&mut c, fem)?;
                c.lumped = Some(*lumped);
                c.inner = Some(*inner);
                c.dump = Some(*dump);
            }
            Command::Mps { domain: s, operator, lo, hi, terms } => {
                c.command = "mps";
                let dom = domain(s)?;
                c.domain = Some(dom.spec_string());
                d = Some(dom);
                c.operator = Some(*operator);
                if !(lo.is_finite() && hi.is_finite() && 0.0 < *lo && lo < hi) {
                    return Err(CliError::Usage(format!("need 0 < --lo < --hi, got {lo}, {hi}")));
                }
                c.interval = Some([*lo, *hi]);
                c.terms = Some(check_terms(*terms)?);
            }
            Command::Certify { domain: s, m } => {
                c.command = "certify";
                let dom = domain(s)?;
                c.domain = Some(dom.spec_string());
                d = Some(dom);
                c.m = Some(check_m(*m, MAX_POLY_M)?);
            }
            Command::Mesh { domain: s, h } => {
                c.command = "mesh";
                let dom = domain(s)?;
                c.domain = Some(dom.spec_string());
                d = Some(dom);
                check_h(&[*h])?;
                c.h = Some(vec![*h]);
            }
            Command::Plot { input, kind, output } => {
                c.command = "plot";
                c.input = Some(input.display().to_string());
                c.kind = Some(*kind);
                let out = output.clone().unwrap_or_else(|| input.with_extension("svg"));
                c.output = Some(out.display().to_string());
            }
            Command::Corpus { m, fem, list } => {
                c.command = "corpus";
                c.m = Some(check_m(*m, MAX_M as u32)?);
                fem_args(&mut c, fem)?;
                c.list = Some(*list);
            }
        }
        c.args = c.canonical_args();
        Ok((c, d))
    }

    fn canonical_args(&self) -> Vec<String> {
        let mut a: Vec<String> = vec![
            "isospec".into(),
            "--threads".into(),
            self.threads.to_string(),
            "--format".into(),
            value_name(&self.format),
            "--out".into(),
            self.out.clone(),
        ];
        if self.plots {
            a.push("--plots".into());
        }
        a.push(self.command.into());
        let mut flag = |name: &str, v: String| {
            a.push(format!("--{name}"));
            a.push(v);
        };
        if let Some(v) = &self.domain {
            flag("domain", v.clone());
        }
        if let Some(v) = self.n {
            flag("n", v.to_string());
        }
        if let Some(v) = self.radius {
            flag("R", v.to_string());
        }
        if let Some(v) = self.m {
            flag("m", v.to_string());
        }
        if let Some(v) = self.count {
            flag("count", v.to_string());
        }
        if let Some(v) = &self.operator {
            flag("operator", value_name(v));
        }
        if let Some(v) = &self.h {
            flag("h", list(v));
        }
        if let Some(v) = self.order {
            flag("order", v.to_string());
            flag("tol", self.tolerances.eigen_residual.to_string());
        }
        if let Some(v) = &self.inner {
            flag("inner", value_name(v));
        }
        if let Some(v) = self.terms {
            flag("terms", v.to_string());
        }
        if let Some([lo, hi]) = self.interval {
            flag("lo", lo.to_string());
            flag("hi", hi.to_string());
        }
        if let Some(v) = &self.input {
            flag("input", v.clone());
        }
        if let Some(v) = &self.kind {
            flag("kind", value_name(v));
        }
        if let Some(v) = &self.output {
            flag("output", v.clone());
        }
        for (name, on) in [("lumped", self.lumped), ("dump", self.dump), ("mps", self.mps), ("list", self.list)] {
            if on == Some(true) {
                a.push(format!("--{name}"));
            }
        }
        a
    }
}

fn check_terms(t: usize) -> Result<usize> {
    if (1..=MAX_TERMS).contains(&t) {
        Ok(t)
    } else {
        Err(CliError::Usage(format!("--terms must lie in 1..={MAX_TERMS}, got {t}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageCheck {
    pub stage: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of `verify`. `inequality_holds` is `upsilon_fem + error_bar <=
/// bound`; `equality_consistent` is `|margin| <= error_bar`, the expected
/// outcome on a disk. `passed` needs every stage check and one of the two.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    pub domain: String,
    pub m: u32,
    pub area: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub upsilon_fem: f64,
    pub error_bar: f64,
    pub upsilon_mps: Option<f64>,
    pub bound: f64,
    pub certificate: TrialCertificate,
    pub inequality_holds: bool,
    pub equality_consistent: bool,
    pub margin: f64,
    pub nonsmooth: bool,
    pub convergence: ConvergenceStudy,
    pub checks: Vec<StageCheck>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn failed_stages(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.stage).collect()
    }

    fn csv_header() -> &'static str {
        "domain,m,area,R,upsilon_fem,error_bar,upsilon_mps,bound,margin,inequality_holds,equality_consistent,nonsmooth,passed"
    }

    fn csv_row(&self) -> String {
        format!(
            "\"{}\",{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{},{},{},{}",
            self.domain,
            self.m,
            self.area,
            self.radius,
            self.upsilon_fem,
            self.error_bar,
            self.upsilon_mps.map(|v| format!("{v:.16e}")).unwrap_or_default(),
            self.bound,
            self.margin,
            self.inequality_holds,
            self.equality_consistent,
            self.nonsmooth,
            self.passed
        )
    }

    fn summary(&self) -> Vec<String> {
        let mut out = vec![
            format!("domain {}", self.domain),
            format!("Upsilon_fem = {:.10} +- {:.3e}", self.upsilon_fem, self.error_bar),
        ];
        if let Some(v) = self.upsilon_mps {
            out.push(format!("Upsilon_mps = {v:.10}"));
        }
        out.push(format!("bound = {:.10}  margin = {:.3e}", self.bound, self.margin));
        out.push(format!(
            "inequality_holds = {}  equality_consistent = {}  nonsmooth = {}",
            self.inequality_holds, self.equality_consistent, self.nonsmooth
        ));
        out
    }
}

/// FEM study for `Delta^{2m}`, trial certificate and, with `mps_terms`,
/// an MPS cross-check, combined into one report.
pub fn verify(d: &Domain, m: u32, fem: &FemArgs, mps_terms: Option<usize>) -> Result<VerificationReport> {
    let opts = EigOptions {
        order: fem.order,
        tol: fem.tol,
        ..EigOptions::default()
    };
    let study = convergence_study(d, Operator::Polyharmonic(m as usize), &fem.h, &opts)
        .map_err(|e| CliError::compute("fem", e))?;
    let cert = certify_upper_bound(d, m).map_err(|e| CliError::compute("certificate", e))?;
    let mut checks = Vec::new();
    let worst = study.residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    checks.push(StageCheck {
        stage: "fem",
        passed: worst <= fem.tol,
        detail: format!("max residual {worst:.3e}, monotone {}", study.monotone),
    });
    checks.push(StageCheck {
        stage: "certificate",
        passed: cert.valid,
        detail: format!(
            "field {:.3e}, identity {:.16e}, quadrature {:.16e}",
            cert.field_residual, cert.quotient_identity, cert.quotient_quadrature
        ),
    });
    let upsilon = study.estimate;
    let error_bar = study.error_bar;
    let mut upsilon_mps = None;
    if let Some(terms) = mps_terms {
        if d.nonsmooth() {
            checks.push(StageCheck {
                stage: "mps",
                passed: true,
                detail: "skipped on a nonsmooth domain".into(),
            });
        } else {
            let omega = upsilon.powf(1.0 / (4.0 * m as f64));
            let scan = mps_find(d, MpsProblem::LaplaceNeumann, (0.9 * omega, 1.1 * omega), terms)
                .map_err(|e| CliError::compute("mps", e))?;
            let best = scan
                .eigen
                .iter()
                .min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()));
            let (passed, detail) = match best {
                Some(e) => {
                    let v = e.eigenvalue.powi(2 * m as i32);
                    upsilon_mps = Some(v);
                    let rel = (v - upsilon).abs() / upsilon;
                    let tol = 2.0 * m as f64 * MPS_AGREEMENT;
                    (
                        e.sigma <= MPS_SIGMA_TOL && rel <= tol,
                        format!("sigma {:.3e}, relative difference {rel:.3e} (tolerance {tol:e})", e.sigma),
                    )
                }
                None => (false, format!("no sigma minimum near omega = {omega:.6}")),
            };
            checks.push(StageCheck {
                stage: "mps",
                passed,
                detail,
            });
        }
    }
    let bound = cert.bound;
    let margin = bound - upsilon;
    let inequality_holds = upsilon + error_bar <= bound;
    let equality_consistent = margin.abs() <= error_bar;
    checks.push(StageCheck {
        stage: "inequality",
        passed: inequality_holds || equality_consistent,
        detail: format!("margin {margin:.6e}, error bar {error_bar:.3e}"),
    });
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        config: None,
        domain: d.spec_string(),
        m,
        area: cert.area,
        radius: cert.radius,
        upsilon_fem: upsilon,
        error_bar,
        upsilon_mps,
        bound,
        certificate: cert,
        inequality_holds,
        equality_consistent,
        margin,
        nonsmooth: d.nonsmooth(),
        convergence: study,
        checks,
        passed,
    })
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable artifact");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn wrap<T: Serialize>(config: &RunConfig, body: T) -> String {
    json(&Wrapped { config, body })
}

#[derive(Serialize)]
struct BallTable {
    n: usize,
    #[serde(rename = "R")]
    radius: f64,
    m: u32,
    mu1: f64,
    upsilon1: f64,
    upsilon_hat: f64,
    spectrum: BallSpectrum,
}

#[derive(Serialize)]
struct Convergence<'a> {
    convergence: &'a ConvergenceStudy,
}

#[derive(Serialize)]
struct Reports<'a> {
    reports: &'a [VerificationReport],
}

fn stored(path: &Path) -> String {
    format!("wrote {}", path.display())
}

fn convergence_chart(h: &[f64], values: &[f64], estimate: f64, rate: Option<(f64, f64)>, title: &str) -> Chart {
    let err: Vec<f64> = values.iter().map(|v| (v - estimate).abs()).collect();
    let mut series = vec![Series {
        x: h.to_vec(),
        y: err,
        line: false,
        points: true,
        color: "#1f4e9a",
    }];
    let mut notes = vec![format!("estimate {estimate:.10}")];
    if let Some((c, p)) = rate {
        series.push(Series {
            x: h.to_vec(),
            y: h.iter().map(|t| c.abs() * t.powf(p)).collect(),
            line: true,
            points: false,
            color: "#c0392b",
        });
        notes.push(format!("fitted slope {p:.3}"));
    }
    Chart {
        title: title.to_string(),
        x_label: "h".into(),
        y_label: "|value - estimate|".into(),
        x_scale: Scale::Log,
        y_scale: Scale::Log,
        series,
        notes,
    }
}

fn study_chart(s: &ConvergenceStudy) -> String {
    let rate = s.fit.map(|f| (f.coefficient, f.rate));
    convergence_chart(&s.h, &s.values, s.estimate, rate, &format!("convergence on {}", s.domain)).render()
}

fn sigma_chart(c: &SigmaCurve, title: &str) -> String {
    // exact zeros are drawn at the bottom of the log axis
    let floor = c.sigmas.iter().copied().filter(|s| *s > 0.0).fold(1.0f64, f64::min);
    Chart {
        title: title.to_string(),
        x_label: "omega".into(),
        y_label: "sigma".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Log,
        series: vec![Series {
            x: c.omegas.clone(),
            y: c.sigmas.iter().map(|s| s.max(floor)).collect(),
            line: true,
            points: false,
            color: "#1f4e9a",
        }],
        notes: Vec::new(),
    }
    .render()
}

fn eigen_options(fem: &FemArgs, lumped: bool, inner: InnerArg) -> EigOptions {
    EigOptions {
        order: fem.order,
        tol: fem.tol,
        lumped,
        inner: match inner {
            InnerArg::Cholesky => InnerSolver::Cholesky,
            InnerArg::Cg => InnerSolver::Cg,
        },
        ..EigOptions::default()
    }
}

fn fem_operator(op: OperatorArg, m: u32) -> Operator {
    match op {
        OperatorArg::Laplace => Operator::Laplacian,
        OperatorArg::Poly => Operator::Polyharmonic(m as usize),
    }
}

pub(super) fn dispatch(cli: &Cli) -> Result<Vec<String>> {
    let (config, d) = RunConfig::resolve(cli)?;
    let dir = out_dir(cli);
    let mut lines = Vec::new();
    match &cli.command {
        Command::Ball { n, radius, m, count } => {
            let b = BallSpec::new(*n, *radius).map_err(|e| CliError::Usage(e.to_string()))?;
            let fail = |e| CliError::compute("ball", e);
            let table = BallTable {
                n: *n,
                radius: *radius,
                m: *m,
                mu1: mu1_ball(&b).map_err(fail)?,
                upsilon1: upsilon1_ball(&b).map_err(fail)?,
                upsilon_hat: upsilon1_poly_ball(&b, *m).map_err(fail)?,
                spectrum: neumann_spectrum_ball(&b, *count, 2 * m).map_err(fail)?,
            };
            lines.push(format!("mu1 = {}", table.mu1));
            lines.push(format!("Upsilon1 = {}", table.upsilon1));
            lines.push(format!("Upsilon1(m={m}) = {}", table.upsilon_hat));
            let path = match cli.format {
                Format::Json => write_artifact(&dir, "ball.json", &wrap(&config, table))?,
                Format::Csv => write_artifact(&dir, "ball.csv", &table.spectrum.to_csv())?,
            };
            lines.push(stored(&path));
        }
        Command::Verify { m, fem, mps, terms, .. } => {
            let d = d.expect("resolved domain");
            let mut report = verify(&d, *m, fem, mps.then_some(*terms))?;
            report.config = Some(config);
            lines.extend(report.summary());
            let path = match cli.format {
                Format::Json => write_artifact(&dir, "verify.json", &json(&report))?,
                Format::Csv => write_artifact(
                    &dir,
                    "verify.csv",
                    &format!("{}\n{}\n", VerificationReport::csv_header(), report.csv_row()),
                )?,
            };
            lines.push(stored(&path));
            if cli.plots {
                lines.push(stored(&write_artifact(&dir, "convergence.svg", &study_chart(&report.convergence))?));
            }
            if !report.passed {
                for l in &lines {
                    println!("{l}");
                }
                return Err(CliError::compute(
                    "verify",
                    format!("failed stages: {}", report.failed_stages().join(", ")),
                ));
            }
        }
        Command::Fem { operator, m, fem, lumped, inner, dump, .. } => {
            let d = d.expect("resolved domain");
            let opts = eigen_options(fem, *lumped, *inner);
            let op = fem_operator(*operator, *m);
            let study = convergence_study(&d, op, &fem.h, &opts).map_err(|e| CliError::compute("fem", e))?;
            for (h, v) in study.h.iter().zip(&study.values) {
                lines.push(format!("h = {h}: {v:.12}"));
            }
            lines.push(format!("estimate = {:.12} +- {:.3e}", study.estimate, study.error_bar));
            let path = match cli.format {
                Format::Json => write_artifact(&dir, "fem.json", &wrap(&config, Convergence { convergence: &study }))?,
                Format::Csv => {
                    let mut s = String::from("h,ndof,value,residual\n");
                    for i in 0..study.h.len() {
                        s.push_str(&format!(
                            "{:.16e},{},{:.16e},{:.16e}\n",
                            study.h[i], study.ndof[i], study.values[i], study.residuals[i]
                        ));
                    }
                    write_artifact(&dir, "fem.csv", &s)?
                }
            };
            lines.push(stored(&path));
            if cli.plots {
                lines.push(stored(&write_artifact(&dir, "convergence.svg", &study_chart(&study))?));
            }
            if *dump {
                let finest = fem.h.iter().copied().fold(f64::INFINITY, f64::min);
                let mesh = triangulate(&d, finest).map_err(|e| CliError::compute("mesh", e))?;
                let r = eig_mesh(&mesh, 1, op, &opts).map_err(|e| CliError::compute("fem", e))?;
                let values = r.vertex_values(0, mesh.num_vertices());
                let path = write_artifact(&dir, "eigenfunction.txt", &mesh.to_text_with_values(Some(values)))?;
                lines.push(stored(&path));
                if cli.plots {
                    let svg = heatmap(&mesh, values, &format!("first eigenfunction on {}", d.spec_string()));
                    lines.push(stored(&write_artifact(&dir, "eigenfunction.svg", &svg)?));
                }
            }
        }
        Command::Mps { operator, lo, hi, terms, .. } => {
            let d = d.expect("resolved domain");
            let problem = match operator {
                OperatorArg::Laplace => MpsProblem::LaplaceNeumann,
                OperatorArg::Poly => MpsProblem::PolyharmNeumann(1),
            };
            let scan = mps_find(&d, problem, (*lo, *hi), *terms).map_err(|e| match e {
                crate::mps::MpsError::Nonsmooth(_) | crate::mps::MpsError::NotStarShaped(..) => {
                    CliError::Usage(e.to_string())
                }
                e => CliError::compute("mps", e),
            })?;
            for e in &scan.eigen {
                lines.push(format!("omega = {:.14}  eigenvalue = {:.14}  sigma = {:.3e}", e.omega, e.eigenvalue, e.sigma));
            }
            lines.push(stored(&write_artifact(&dir, "sigma.csv", &scan.curve.to_csv())?));
            if cli.format == Format::Json {
                lines.push(stored(&write_artifact(&dir, "mps.json", &wrap(&config, &scan))?));
            }
            if cli.plots {
                let svg = sigma_chart(&scan.curve, &format!("sigma on {}", d.spec_string()));
                lines.push(stored(&write_artifact(&dir, "sigma.svg", &svg)?));
            }
        }
        Command::Certify { m, .. } => {
            let d = d.expect("resolved domain");
            let cert = certify_upper_bound(&d, *m).map_err(|e| CliError::compute("certificate", e))?;
            lines.push(format!("center = ({:.12}, {:.12})", cert.center[0], cert.center[1]));
            lines.push(format!("bound = {}  valid = {}", cert.bound, cert.valid));
            #[derive(Serialize)]
            struct Body<'a> {
                certificate: &'a TrialCertificate,
            }
            let path = write_artifact(&dir, "certificate.json", &wrap(&config, Body { certificate: &cert }))?;
            lines.push(stored(&path));
            if !cert.valid {
                return Err(CliError::compute("certificate", "tolerances not met"));
            }
        }
        Command::Mesh { h, .. } => {
            let d = d.expect("resolved domain");
            let mesh = triangulate(&d, *h).map_err(|e| CliError::compute("mesh", e))?;
            lines.push(format!(
                "{} vertices, {} triangles, area {:.12}, minimum angle {:.2} deg",
                mesh.num_vertices(),
                mesh.num_triangles(),
                mesh.area(),
                mesh.min_angle_deg()
            ));
            lines.push(format!("domain area {:.12}", domain_metrics(&d).area));
            lines.push(stored(&write_artifact(&dir, "mesh.txt", &mesh.to_text())?));
        }
        Command::Plot { input, kind, .. } => {
            let output = config.output.clone().expect("resolved output");
            let text = std::fs::read_to_string(input)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
            let svg = render_plot(&text, *kind).map_err(|e| CliError::compute("plot", format!("{}: {e}", input.display())))?;
            std::fs::write(&output, svg).map_err(|e| CliError::compute("output", format!("{output}: {e}")))?;
            lines.push(format!("wrote {output}"));
        }
        Command::Corpus { m, fem, list } => {
            let specs = super::corpus::default_specs();
            if *list {
                return Ok(specs);
            }
            let mut reports = Vec::new();
            for s in &specs {
                let d = domain(s)?;
                let r = verify(&d, *m, fem, None)?;
                lines.push(format!(
                    "{}: Upsilon_fem = {:.8} +- {:.2e}, bound = {:.8}, passed = {}",
                    s, r.upsilon_fem, r.error_bar, r.bound, r.passed
                ));
                reports.push(r);
            }
            let path = match cli.format {
                Format::Json => write_artifact(&dir, "corpus.json", &wrap(&config, Reports { reports: &reports }))?,
                Format::Csv => {
                    let mut s = format!("{}\n", VerificationReport::csv_header());
                    for r in &reports {
                        s.push_str(&r.csv_row());
                        s.push('\n');
                    }
                    write_artifact(&dir, "corpus.csv", &s)?
                }
            };
            lines.push(stored(&path));
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.domain.as_str()).collect();
            if !failed.is_empty() {
                for l in &lines {
                    println!("{l}");
                }
                return Err(CliError::compute("corpus", format!("failed domains: {}", failed.join("; "))));
            }
        }
    }
    Ok(lines)
}

fn number_array(v: &serde_json::Value, key: &str) -> std::result::Result<Vec<f64>, String> {
    v.get(key)
        .and_then(|a| a.as_array())
        .ok_or_else(|| format!("missing `{key}` array"))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| format!("`{key}` holds a non-number")))
        .collect()
}

/// Render an artifact as SVG. Errors carry line numbers where the format
/// has lines.
pub fn render_plot(text: &str, kind: PlotKind) -> std::result::Result<String, String> {
    match kind {
        PlotKind::Sigma => Ok(sigma_chart(&SigmaCurve::from_csv(text)?, "sigma")),
        PlotKind::Convergence => {
            let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
            let s = v.get("convergence").unwrap_or(&v);
            let h = number_array(s, "h")?;
            let values = number_array(s, "values")?;
            if h.len() != values.len() || h.is_empty() {
                return Err("`h` and `values` differ in length".into());
            }
            let estimate = s
                .get("estimate")
                .and_then(|x| x.as_f64())
                .ok_or("missing `estimate`")?;
            let rate = s.get("fit").and_then(|f| Some((f.get("coefficient")?.as_f64()?, f.get("rate")?.as_f64()?)));
            let domain = s.get("domain").and_then(|x| x.as_str()).unwrap_or("domain");
            Ok(convergence_chart(&h, &values, estimate, rate, &format!("convergence on {domain}")).render())
        }
        PlotKind::Eigenfunction => {
            let (mesh, values): (Mesh, _) = Mesh::from_text_with_values(text).map_err(|e| e.to_string())?;
            let values = values.ok_or("mesh has no value column")?;
            Ok(heatmap(&mesh, &values, "eigenfunction"))
        }
    }
}
