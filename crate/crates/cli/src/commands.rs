use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use bergman_lab::basis_kernel::{build_model_with, Basis, ClosedFormKernel, KernelModel, KernelSource, DEFAULT_DROP_TOL};
use bergman_lab::domains::{build_quadrature, AnisoBox, BoxKind, DomainSpec, RhoExpr};
use bergman_lab::experiments::verify::{run_suite, VerifyOptions};
use bergman_lab::experiments::{
    boundary_sweep, check_weight, direction_pairs, localization_ratio, polydisc_squeeze_check, write_csv, write_metadata,
    BoxRegion, HessianProfile, LocalizationConfig, Metadata, SweepConfig, Verdict, WeightFunction,
};
use bergman_lab::geometry::{curvature_report, ricci_logdet};
use bergman_lab::minint::{bergman_fuchs_check, bergman_fuchs_check_kernel};
use bergman_lab::{c64, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::{ModelArgs, Tolerances};
use crate::{cache, CliError, Command};

type CliResult<T> = Result<T, CliError>;

enum Source {
    Model(KernelModel),
    Exact(ClosedFormKernel),
}

impl Source {
    fn get(&self) -> &dyn KernelSource {
        match self {
            Source::Model(m) => m,
            Source::Exact(k) => k,
        }
    }
}

fn read_domain(path: &Path) -> CliResult<DomainSpec> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read domain file {}: {e}", path.display())))?;
    DomainSpec::from_json(&text).map_err(|e| CliError::Usage(format!("invalid domain file {}: {e}", path.display())))
}

fn load_source(args: &ModelArgs, tol: &Tolerances) -> CliResult<Source> {
    let domain = read_domain(&args.domain)?;
    if args.closed_form {
        return Ok(Source::Exact(ClosedFormKernel::new(domain)?));
    }
    let drop = tol.get("drop", DEFAULT_DROP_TOL);
    let quad_key = args.quad.map(|q| (q.scheme.to_string(), q.resolution));
    let key = cache::model_key(&domain.to_json()?, args.degree, quad_key, args.seed, drop);
    if let Some(dir) = &args.cache {
        if let Some(m) = cache::load(dir, &key) {
            return Ok(Source::Model(m));
        }
    }
    if args.quad.is_none() && !domain.is_reinhardt() {
        return Err(CliError::Usage(format!(
            "domain kind '{}' needs --quad scheme:resolution",
            domain.variant_name()
        )));
    }
    let quad = args
        .quad
        .map(|q| build_quadrature(&domain, q.scheme, q.resolution, args.seed))
        .transpose()?;
    let model = build_model_with(&domain, Basis::graded_at(domain.center(), 1.0, args.degree), quad.as_ref(), drop)?;
    if let Some(dir) = &args.cache {
        cache::store(dir, &key, &model)?;
    }
    Ok(Source::Model(model))
}

fn check_dim(what: &str, v: &[C64], n: usize) -> CliResult<()> {
    if v.len() != n {
        return Err(CliError::Usage(format!("--{what} has {} coordinates, the domain has dimension {n}", v.len())));
    }
    Ok(())
}

fn fmt_c(v: &[C64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| format!("{:.15e},{:.15e}", z.re, z.im)).collect();
    format!("[{}]", parts.join("; "))
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".into(), |v| v.to_string())
}

fn print_header(command: &str, source: &dyn KernelSource, seed: Option<u64>) {
    println!("command = {command}");
    println!("source = {}", source.describe());
    println!("dimension = {}", source.dim());
    println!("degree = {}", opt(source.truncation_degree()));
    println!("seed = {}", opt(seed));
    println!("cond = {}", opt(source.cond_estimate().map(|c| format!("{c:.6e}"))));
}

fn print_verdicts(verdicts: &[Verdict]) {
    for v in verdicts {
        println!(
            "verdict {} = {} (value {:.6e}, threshold {:.6e})",
            v.name,
            if v.passed { "pass" } else { "fail" },
            v.value,
            v.threshold
        );
    }
}

fn csv_sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(bergman_lab::Error::from)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn dispatch(command: Command, tol: &Tolerances) -> CliResult<()> {
    match command {
        Command::Build { model, out } => {
            let source = load_source(&model, tol)?;
            let Source::Model(m) = &source else {
                return Err(CliError::Usage("build serializes truncated models; drop --closed-form".into()));
            };
            fs::write(&out, m.to_json()?).map_err(bergman_lab::Error::from)?;
            print_header("build", m, Some(model.seed));
            println!("functions = {}", m.len());
            println!("dropped = {:?}", m.dropped());
            println!("written = {}", out.display());
            Ok(())
        }
        Command::Kernel { model, point, out } => {
            let source = load_source(&model, tol)?;
            let s = source.get();
            check_dim("point", &point.0, s.dim())?;
            let t = s.derivs(&point.0)?;
            print_header("kernel", s, Some(model.seed));
            println!("point = {}", fmt_c(&point.0));
            println!("K = {:.15e}", t.k());
            if let Some(p) = &out {
                let mut w = csv::Writer::from_path(p).map_err(bergman_lab::Error::from)?;
                w.write_record(["a", "b", "re", "im"]).map_err(bergman_lab::Error::from)?;
                for a in t.indices() {
                    for b in t.indices() {
                        let v = t.get(a, b);
                        w.write_record([a.to_string(), b.to_string(), format!("{:e}", v.re), format!("{:e}", v.im)])
                            .map_err(bergman_lab::Error::from)?;
                    }
                }
                w.flush().map_err(bergman_lab::Error::from)?;
                println!("written = {}", p.display());
            } else {
                for a in t.indices() {
                    for b in t.indices() {
                        let v = t.get(a, b);
                        println!("D[{a};{b}] = {:.15e},{:.15e}", v.re, v.im);
                    }
                }
            }
            Ok(())
        }
        Command::Curv { model, point, x, y, samples } => {
            let source = load_source(&model, tol)?;
            let s = source.get();
            let n = s.dim();
            let y = y.unwrap_or_else(|| x.clone());
            for (name, v) in [("point", &point.0), ("X", &x.0), ("Y", &y.0)] {
                check_dim(name, v, n)?;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            let pairs = if samples > 0 { direction_pairs(n, samples, &mut rng) } else { Vec::new() };
            let r = curvature_report(s, &point.0, &x.0, &y.0, &pairs)?;
            let logdet = ricci_logdet(s, &point.0, &x.0, tol.get("fd-step", 1e-3))?;
            print_header("curv", s, Some(model.seed));
            println!("point = {}", fmt_c(&point.0));
            println!("X = {}", fmt_c(&x.0));
            println!("Y = {}", fmt_c(&y.0));
            println!("metric_eigenvalues = {:?}", r.metric.eigenvalues);
            println!("B = {:.12}", r.b);
            println!("H = {:.12}", r.h);
            println!("Ric = {:.12}", r.ric);
            println!("Ric_logdet = {logdet:.12}");
            println!("B_min = {:.12}", r.b_min);
            println!("B_max = {:.12}", r.b_max);
            println!("imag_residue = {:.3e}", r.imag_residue);
            let verdicts = [
                Verdict { name: "B<2".into(), passed: r.b_max < 2.0, value: r.b_max, threshold: 2.0 },
                Verdict {
                    name: "Ric<n+1".into(),
                    passed: r.ric < (n + 1) as f64,
                    value: r.ric,
                    threshold: (n + 1) as f64,
                },
            ];
            print_verdicts(&verdicts);
            Ok(())
        }
        Command::Minint { model, point, x, y } => {
            let source = load_source(&model, tol)?;
            let s = source.get();
            let y = y.unwrap_or_else(|| x.clone());
            for (name, v) in [("point", &point.0), ("X", &x.0), ("Y", &y.0)] {
                check_dim(name, v, s.dim())?;
            }
            let r = match &source {
                Source::Model(m) => bergman_fuchs_check(m, &point.0, &x.0, &y.0)?,
                Source::Exact(k) => bergman_fuchs_check_kernel(k, &point.0, &x.0, &y.0)?,
            };
            print_header("minint", s, Some(model.seed));
            println!("point = {}", fmt_c(&point.0));
            println!("I0 = {:.15e}", r.values.i0);
            println!("I1_X = {:.15e}", r.values.i1_x);
            println!("I1_Y = {:.15e}", r.values.i1_y);
            println!("I2_XX = {:.15e}", r.values.i2_xx);
            println!("I2_XY = {:.15e}", r.values.i2_xy);
            println!("K = {:.15e}", r.k);
            println!("g_X = {:.15e}", r.g_x);
            println!("H_X = {:.12}", r.h_x);
            println!("B_XY = {:.12}", r.b_xy);
            println!("residual_kernel = {:.3e}", r.kernel_residual);
            println!("residual_metric = {:.3e}", r.metric_residual);
            println!("residual_holomorphic = {:.3e}", r.holomorphic_residual);
            println!("residual_polarized_general = {:.3e}", r.polarized_general_residual);
            println!("residual_polarized_displayed = {:.3e}", r.polarized_residual);
            let slack = tol.get("slack", 1e-8);
            print_verdicts(&[Verdict {
                name: "identities".into(),
                passed: r.max_residual() <= slack,
                value: r.max_residual(),
                threshold: slack,
            }]);
            Ok(())
        }
        Command::Sweep { model, point, project, t_grid, pairs, out } => {
            let source = load_source(&model, tol)?;
            let s = source.get();
            let n = s.dim();
            check_dim("point", &point.0, n)?;
            let mut cfg = SweepConfig::new(point.0.clone(), t_grid.0.clone(), pairs, model.seed);
            cfg.project_anchor = project;
            let table = boundary_sweep(s, &cfg)?;
            let b_max = table.b_values.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
            let ric_max = table.ric_values.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut meta = Metadata::new("sweep", json!({
                "source": s.describe(),
                "anchor": point.0,
                "project": project,
                "t_grid": t_grid.0,
                "pairs": pairs,
                "boundary_point": table.boundary_point,
                "normal": table.normal,
                "tolerances": tol.to_json(),
            }));
            meta.seed = Some(model.seed);
            meta.degree = s.truncation_degree();
            meta.cond = s.cond_estimate();
            meta.thresholds = json!({"B": 2.0, "Ric": (n + 1) as f64});
            meta.verdicts = vec![
                Verdict { name: "B<2".into(), passed: b_max < 2.0, value: b_max, threshold: 2.0 },
                Verdict { name: "Ric<n+1".into(), passed: ric_max < (n + 1) as f64, value: ric_max, threshold: (n + 1) as f64 },
            ];
            write_csv(&table.rows, csv_sink(&out)?)?;
            if let Some(p) = &out {
                write_metadata(&meta, &meta_path(p))?;
                print_header("sweep", s, Some(model.seed));
                println!("rows = {}", table.rows.len());
                println!("failed_rows = {}", table.rows.iter().filter(|r| r.status != "ok").count());
                println!("written = {}", p.display());
                print_verdicts(&meta.verdicts);
            }
            Ok(())
        }
        Command::Localize { config, t_grid, degree, draws, seed, out } => {
            let cfg = match &config {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                    serde_json::from_str::<LocalizationConfig>(&text)
                        .map_err(|e| CliError::Usage(format!("invalid localization config {}: {e}", p.display())))?
                }
                None => LocalizationConfig::ball_example(&t_grid.0, degree, draws, seed)?,
            };
            let rep = localization_ratio(&cfg)?;
            let slack = tol.get("slack", 1e-9);
            let mut meta = Metadata::new("localize", json!({"config": cfg, "tolerances": tol.to_json()}));
            meta.seed = Some(cfg.seed);
            meta.degree = Some(cfg.degree);
            meta.cond = Some(rep.cond_global.max(rep.cond_local));
            meta.thresholds = json!({"lower_slack": slack});
            meta.verdicts = vec![Verdict {
                name: "lower-inequality".into(),
                passed: rep.lower_holds(slack),
                value: rep.min_ratio,
                threshold: 1.0 - slack,
            }];
            write_csv(&rep.rows, csv_sink(&out)?)?;
            if let Some(p) = &out {
                write_metadata(&meta, &meta_path(p))?;
                println!("command = localize");
                println!("degree = {}", cfg.degree);
                println!("seed = {}", cfg.seed);
                println!("cond = {:.6e}", rep.cond_global.max(rep.cond_local));
                println!("nodes_local = {}", rep.nodes_local);
                println!("nodes_outer = {}", rep.nodes_outer);
                println!("retained = {}", rep.retained);
                println!("max_ratio = {:?}", rep.max_ratio);
                println!("written = {}", p.display());
                print_verdicts(&meta.verdicts);
            }
            Ok(())
        }
        Command::Squeeze { model, point, radii, samples } => {
            let source = load_source(&model, tol)?;
            let s = source.get();
            check_dim("point", &point.0, s.dim())?;
            let c = tol.get("c", 2.0);
            let r = polydisc_squeeze_check(s, &point.0, &radii.0, c, samples, model.seed)?;
            print_header("squeeze", s, Some(model.seed));
            println!("point = {}", fmt_c(&point.0));
            println!("radii = {:?}", r.radii);
            println!("C = {c}");
            println!("kernel_scaled = {:.12}", r.kernel_scaled);
            println!("metric_min = {:.12}", r.metric_min);
            println!("metric_max = {:.12}", r.metric_max);
            println!("metric_min_sampled = {:.12}", r.metric_min_sampled);
            println!("metric_max_sampled = {:.12}", r.metric_max_sampled);
            println!("kernel_within = {}", r.kernel_within);
            println!("metric_within = {}", r.metric_within);
            if r.passed() {
                println!("verdict = pass");
                Ok(())
            } else {
                println!("verdict = fail");
                Err(CliError::CheckFailed(format!("squeeze bounds fail at C = {c}")))
            }
        }
        Command::CheckWeight { weight, radii, n, delta, ell, domain, samples, seed } => {
            let (w, region, default_domain, profile) = weight_preset(&weight, radii.map(|r| r.0), n, delta, ell)?;
            let domain = match &domain {
                Some(p) => read_domain(p)?,
                None => default_domain,
            };
            if domain.dim() != region.radii.len() {
                return Err(CliError::Usage("domain dimension does not match the weight".into()));
            }
            let c = tol.get("c", w.c);
            let w = w.clone().with_constants(c, w.c_alpha);
            let r = check_weight(&w, &region, &domain, &profile, samples, seed);
            println!("command = check-weight");
            println!("weight = {}", r.weight);
            println!("seed = {seed}");
            println!("samples = {}", r.samples);
            println!("C = {}", r.c);
            println!("C_alpha = {:?}", w.c_alpha);
            println!("M = {}", w.bound);
            println!("region_radii = {:?}", region.radii);
            for h in &r.hypotheses {
                println!(
                    "hypothesis {} = {} (worst margin {:.6e}; {})",
                    h.name,
                    if h.passed { "pass" } else { "fail" },
                    h.worst_margin,
                    h.detail
                );
                if !h.passed {
                    if let Some(z) = &h.witness {
                        println!("witness {} = {}", h.name, fmt_c(z));
                    }
                }
            }
            println!("exact_profile_ratio = {}", opt(r.exact_profile_ratio.map(|v| format!("{v:.6}"))));
            if r.passed() {
                println!("verdict = pass");
                Ok(())
            } else {
                println!("verdict = fail");
                Err(CliError::CheckFailed(format!("weight '{}' fails its hypotheses", r.weight)))
            }
        }
        Command::Verify { seed, samples, degree } => {
            let checks = run_suite(&VerifyOptions { seed, samples, degree });
            println!("command = verify");
            println!("seed = {seed}");
            println!("degree = {degree}");
            for c in &checks {
                println!(
                    "{} {}/{} value={:.3e} tol={:.3e} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.module,
                    c.name,
                    c.value,
                    c.tolerance,
                    c.detail
                );
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("checks = {}, failed = {failed}", checks.len());
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!("{failed} invariant checks failed")))
            }
        }
    }
}

fn weight_preset(
    name: &str,
    radii: Option<Vec<f64>>,
    n: usize,
    delta: f64,
    ell: usize,
) -> CliResult<(WeightFunction, BoxRegion, DomainSpec, HessianProfile)> {
    let polydisc = |radii: Vec<f64>| BoxRegion { center: vec![c64(0.0, 0.0); radii.len()], radii };
    match name {
        "diagonal-quadratic" | "negative-norm" => {
            let radii = radii.unwrap_or_else(|| vec![1.0; n]);
            let w = if name == "negative-norm" {
                WeightFunction::negative_norm(radii.len())
            } else {
                WeightFunction::diagonal_quadratic(radii.clone())
            };
            Ok((w, polydisc(radii.clone()), DomainSpec::polydisc(radii.clone()), HessianProfile::Polydisc { radii }))
        }
        "anisotropic-quadratic" => {
            if n < 2 || ell > n - 1 || !(delta > 0.0 && delta < 1.0) {
                return Err(CliError::Usage("anisotropic-quadratic needs n ≥ 2, ell ≤ n − 1 and 0 < delta < 1".into()));
            }
            let rho = DomainSpec::General {
                rho: RhoExpr::LeviModel { levi: vec![1.0; n - 1] },
                bbox: vec![[-1.0, 1.0]; 2 * n],
            };
            let region = BoxRegion::from(&AnisoBox::new(BoxKind::PDeltaA, vec![c64(0.0, 0.0); n], delta, 1.0, ell)?);
            let profile = HessianProfile::Anisotropic { rho: rho.clone(), delta, ell };
            Ok((WeightFunction::anisotropic_quadratic(n, delta, ell), region, rho, profile))
        }
        other => Err(CliError::Usage(format!(
            "unknown weight '{other}' (expected diagonal-quadratic, negative-norm or anisotropic-quadratic)"
        ))),
    }
}
