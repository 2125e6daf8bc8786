use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use conlab_core::catalog;
use conlab_core::cone::{self, ConeSpace, DEFAULT_X0_DOMAIN};
use conlab_core::fields::{
    self, build_parallel_sequence, ConcircularCandidate, GeodesicPair, PsiSource, SequenceOptions,
    SinyukovSolution,
};
use conlab_core::files::{parse_field, parse_metric, write_field, write_metric, FieldFile};
use conlab_core::geometry::{self, CovectorField, Interval, MetricChart, SampleGrid};
use conlab_core::jordan::{self, JordanAlgebra, JordanElement};
use conlab_core::report::max_abs;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::output::Outcome;
use crate::{CatalogCmd, Command, ConeCmd, FieldsCmd, GeodesicCmd, JordanCmd, RunConfig, VerifyCmd};

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        Command::Verify(c) => verify(c, cfg),
        Command::Cone(c) => cone_cmd(c, cfg),
        Command::Jordan(c) => jordan_cmd(c, cfg),
        Command::Geodesic(c) => geodesic(c, cfg),
        Command::Fields(c) => fields_cmd(c, cfg),
        Command::Catalog(c) => catalog_cmd(c, cfg),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_metric(path: &Path) -> Result<MetricChart> {
    parse_metric(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_field(path: &Path, chart: &MetricChart) -> Result<FieldFile> {
    parse_field(&read(path)?, chart).with_context(|| format!("in {}", path.display()))
}

fn load_concircular(path: &Path, chart: &MetricChart) -> Result<ConcircularCandidate> {
    match load_field(path, chart)? {
        FieldFile::Concircular(c) => Ok(c),
        other => bail!("{} is a {} file, expected concircular", path.display(), other.kind()),
    }
}

fn load_solution(path: &Path, chart: &MetricChart) -> Result<SinyukovSolution> {
    match load_field(path, chart)? {
        FieldFile::Sinyukov(s) => Ok(s),
        other => bail!("{} is a {} file, expected sinyukov", path.display(), other.kind()),
    }
}

fn load_covector(path: &Path, chart: &MetricChart) -> Result<CovectorField> {
    match load_field(path, chart)? {
        FieldFile::Covector(w) => Ok(w),
        other => bail!("{} is a {} file, expected covector", path.display(), other.kind()),
    }
}

fn grid(chart: &MetricChart, cfg: &RunConfig) -> Result<SampleGrid> {
    Ok(SampleGrid::new(chart.domain(), cfg.grid)?)
}

fn grid_details(g: &SampleGrid) -> serde_json::Value {
    json!({
        "seed": g.config.seed,
        "random": g.config.random,
        "lattice": g.config.lattice,
        "inset": g.config.inset,
        "points": g.len(),
    })
}

fn verify(cmd: &VerifyCmd, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        VerifyCmd::Concircular { metric, field, k } => {
            let chart = load_metric(metric)?;
            let mut c = load_concircular(field, &chart)?;
            if c.k.is_none() {
                c.k = *k;
            }
            let g = grid(&chart, cfg)?;
            let o = fields::check_concircular(&chart, &c, &g, cfg.tol("concircular", 1e-9))?;
            Ok(Outcome::new(
                o.concircular.pass,
                vec![o.concircular.clone()],
                json!({
                    "classification": o.classification.summary(),
                    "flags": o.classification,
                    "special": o.special,
                    "convergent": o.convergent,
                    "fitted_k": o.fitted,
                    "max_abs_rho": o.max_abs_rho,
                    "grid": grid_details(&g),
                }),
            ))
        }
        VerifyCmd::Sinyukov { metric, field } => {
            let chart = load_metric(metric)?;
            let s = load_solution(field, &chart)?;
            let g = grid(&chart, cfg)?;
            let r = fields::check_sinyukov(&chart, &s, &g, cfg.tol("sinyukov", 1e-9))?;
            Ok(Outcome::new(r.pass, vec![r], json!({ "grid": grid_details(&g) })))
        }
        VerifyCmd::Vnk { metric, field, k } => {
            let chart = load_metric(metric)?;
            let mut s = load_solution(field, &chart)?;
            let g = grid(&chart, cfg)?;
            let fitted = fields::fit_vnk_k(&chart, &s, &g).ok();
            if s.k.is_none() {
                s.k = k.or(fitted);
            }
            let sin = fields::check_sinyukov(&chart, &s, &g, cfg.tol("sinyukov", 1e-9))?;
            let o = fields::check_vnk(&chart, &s, &g, cfg.tol("vnk", 1e-9))?;
            Ok(Outcome::new(
                sin.pass && o.lambda.pass && o.mu.pass,
                vec![sin, o.lambda, o.mu],
                json!({ "k": s.k, "fitted_k": fitted, "grid": grid_details(&g) }),
            ))
        }
        VerifyCmd::Vn0 { metric, field } => {
            let chart = load_metric(metric)?;
            let s = load_solution(field, &chart)?;
            let g = grid(&chart, cfg)?;
            let o = fields::check_vn0(&chart, &s, &g, cfg.tol("vn0", 1e-12))?;
            Ok(Outcome::new(
                o.joint.pass,
                vec![o.sinyukov, o.lambda, o.mu_constant],
                json!({ "grid": grid_details(&g) }),
            ))
        }
        VerifyCmd::Levicivita { g, gbar, psi } => {
            let (g, gbar) = (load_metric(g)?, load_metric(gbar)?);
            let pair = GeodesicPair::new(&g, &gbar)?;
            let source = match psi {
                Some(p) => PsiSource::Given(load_covector(p, &pair.g)?),
                None => PsiSource::Auto,
            };
            let grid = grid(&pair.g, cfg)?;
            let r = fields::check_levi_civita(&pair, &source, &grid, cfg.tol("levi-civita", 1e-8))?;
            Ok(Outcome::new(
                r.pass,
                vec![r],
                json!({
                    "psi": if psi.is_some() { "given" } else { "auto" },
                    "grid": grid_details(&grid),
                }),
            ))
        }
        VerifyCmd::Corollary1 { metric, field, e } => {
            let chart = load_metric(metric)?;
            let s = load_solution(field, &chart)?;
            let g = grid(&chart, cfg)?;
            let tol = cfg.tol("corollary1", 1e-12);
            match e {
                Some(e) => {
                    let o = fields::check_corollary1(&chart, &s, *e, &g, tol)?;
                    Ok(Outcome::new(
                        o.joint.pass,
                        vec![o.form, o.covector, o.scalar],
                        json!({ "e": e, "grid": grid_details(&g) }),
                    ))
                }
                None => {
                    let sel = fields::select_e(&chart, &s, &g, tol)?;
                    let passing: Vec<i32> = sel.candidates.iter().filter(|c| c.joint.pass).map(|c| c.e).collect();
                    let reports = match sel.e {
                        Some(e) => {
                            let c = sel.candidates.iter().find(|c| c.e == e).expect("selected e is a candidate");
                            vec![c.form.clone(), c.covector.clone(), c.scalar.clone()]
                        }
                        None => Vec::new(),
                    };
                    let worst: Vec<_> = sel
                        .candidates
                        .iter()
                        .map(|c| json!({ "e": c.e, "max": c.joint.max, "pass": c.joint.pass }))
                        .collect();
                    Ok(Outcome::new(
                        sel.unambiguous,
                        reports,
                        json!({
                            "e": sel.e,
                            "passing": passing,
                            "candidates": worst,
                            "grid": grid_details(&g),
                        }),
                    ))
                }
            }
        }
    }
}

/// The JSON written next to a cone metric.
#[derive(Debug, Serialize, Deserialize)]
struct ConeSidecar {
    #[serde(rename = "K")]
    k: f64,
    base: String,
    x0_domain: [f64; 2],
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    flipped: bool,
}

fn load_cone(path: &Path) -> Result<ConeSpace> {
    let side: ConeSidecar = serde_json::from_str(&read(path)?)
        .with_context(|| format!("{} is not a cone sidecar", path.display()))?;
    let base_path = path.parent().unwrap_or(Path::new(".")).join(&side.base);
    let base = load_metric(&base_path)?;
    let [lo, hi] = side.x0_domain;
    Ok(ConeSpace::build(&base, side.k, Interval::new(lo, hi), side.flipped)?)
}

fn cone_cmd(cmd: &ConeCmd, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        ConeCmd::Build {
            metric,
            k,
            out,
            x0_domain,
            flipped,
        } => {
            let base = load_metric(metric)?;
            let x0 = match x0_domain.as_deref() {
                Some([lo, hi]) => Interval::new(*lo, *hi),
                Some(_) => bail!("--x0-domain takes two values"),
                None => DEFAULT_X0_DOMAIN,
            };
            let cone = ConeSpace::build(&base, *k, x0, *flipped)?;
            let base_name = metric
                .file_name()
                .ok_or_else(|| anyhow!("{} has no file name", metric.display()))?
                .to_string_lossy()
                .into_owned();
            let comment = format!(
                "cone over {base_name} with K = {k}\nG = {}e^(2K x0) (-dx0^2 + g/K)",
                if *flipped { "-" } else { "" }
            );
            write(out, &write_metric(cone.chart(), &comment))?;
            let sidecar_path = out.with_extension("json");
            let out_dir = out.parent().unwrap_or(Path::new(""));
            let base_ref = relative_base(metric, out_dir);
            let side = ConeSidecar {
                k: *k,
                base: base_ref,
                x0_domain: [x0.lo, x0.hi],
                flipped: *flipped,
            };
            write(&sidecar_path, &(serde_json::to_string_pretty(&side)? + "\n"))?;
            let g = grid(cone.chart(), cfg)?;
            let conn = cone::check_connection(&cone, &g, cfg.tol("cone-mixed-connection", 1e-10))?;
            let pass = conn.mixed.pass && conn.closed_form.pass && conn.metricity.pass && conn.inverse.pass;
            Ok(Outcome::new(
                pass,
                vec![conn.mixed, conn.closed_form, conn.metricity, conn.inverse],
                json!({
                    "metric": out.display().to_string(),
                    "sidecar": sidecar_path.display().to_string(),
                    "coords": cone.chart().coords(),
                    "mixed_unscaled_deviation": conn.mixed_unscaled_deviation,
                    "grid": grid_details(&g),
                }),
            ))
        }
        ConeCmd::LiftField { cone: c, field, out } => {
            let cone = load_cone(c)?;
            let cand = load_concircular(field, cone.base())?;
            let base_grid = grid(cone.base(), cfg)?;
            let w = cone::lift_concircular(&cone, &cand, &base_grid, cfg.tol("concircular", 1e-9))?;
            let g = grid(cone.chart(), cfg)?;
            let par = cone::check_parallel_covector(&cone, &w, &g, cfg.tol("parallel-covector", 1e-9))?;
            let trip = cone::covector_round_trip(&cone, &cand, &g)?;
            if let Some(out) = out {
                let comment = format!("lift of {} to the cone", field.display());
                write(out, &write_field(&FieldFile::Covector(w), &comment))?;
            }
            Ok(Outcome::new(
                par.pass && trip.max_ulps <= 1,
                vec![par],
                json!({ "round_trip": trip, "out": out.as_ref().map(|p| p.display().to_string()), "grid": grid_details(&g) }),
            ))
        }
        ConeCmd::LiftSolution { cone: c, field, out } => {
            let cone = load_cone(c)?;
            let sol = load_solution(field, cone.base())?;
            let base_grid = grid(cone.base(), cfg)?;
            let a = cone::lift_solution(&cone, &sol, &base_grid, cfg.tol("vnk", 1e-9))?;
            let g = grid(cone.chart(), cfg)?;
            let par = cone::check_parallel_bilinear(&cone, &a, &g, cfg.tol("parallel-bilinear", 1e-9))?;
            let trip = cone::solution_round_trip(&cone, &sol, &g)?;
            if let Some(out) = out {
                let comment = format!("lift of {} to the cone", field.display());
                write(out, &write_field(&FieldFile::SinyukovLifted(a), &comment))?;
            }
            Ok(Outcome::new(
                par.pass && trip.max_ulps <= 1,
                vec![par],
                json!({ "round_trip": trip, "out": out.as_ref().map(|p| p.display().to_string()), "grid": grid_details(&g) }),
            ))
        }
        ConeCmd::CheckParallel { cone: c, field } => {
            let cone = load_cone(c)?;
            let g = grid(cone.chart(), cfg)?;
            let (kind, r) = match load_field(field, cone.chart())? {
                FieldFile::Covector(w) => (
                    "covector",
                    cone::check_parallel_covector(&cone, &w, &g, cfg.tol("parallel-covector", 1e-9))?,
                ),
                FieldFile::SinyukovLifted(a) => (
                    "sinyukov-lifted",
                    cone::check_parallel_bilinear(&cone, &a, &g, cfg.tol("parallel-bilinear", 1e-9))?,
                ),
                other => bail!("{} is a {} file, expected covector or sinyukov-lifted", field.display(), other.kind()),
            };
            Ok(Outcome::new(r.pass, vec![r], json!({ "kind": kind, "grid": grid_details(&g) })))
        }
        ConeCmd::CheckConvergent { cone: c } => {
            let cone = load_cone(c)?;
            let g = grid(cone.chart(), cfg)?;
            let conn = cone::check_connection(&cone, &g, cfg.tol("cone-mixed-connection", 1e-10))?;
            let conv = cone::check_convergent_field(&cone, &g, cfg.tol("convergent-field", 1e-9))?;
            let pass = conn.mixed.pass && conv.joint.pass;
            Ok(Outcome::new(
                pass,
                vec![conn.mixed, conv.field, conv.norm],
                json!({
                    "k": cone.k(),
                    "flipped": cone.flipped(),
                    "mixed_unscaled_deviation": conn.mixed_unscaled_deviation,
                    "grid": grid_details(&g),
                }),
            ))
        }
    }
}

/// Path of `base` relative to `dir`, so the sidecar keeps working when the
/// pair of files is moved together.
fn relative_base(base: &Path, dir: &Path) -> String {
    let dir = if dir.as_os_str().is_empty() { Path::new(".") } else { dir };
    let (Ok(b), Ok(d)) = (fs::canonicalize(base), fs::canonicalize(dir)) else {
        return base.display().to_string();
    };
    let common = b.components().zip(d.components()).take_while(|(x, y)| x == y).count();
    let mut rel = PathBuf::new();
    for _ in d.components().skip(common) {
        rel.push("..");
    }
    for c in b.components().skip(common) {
        rel.push(c);
    }
    rel.display().to_string()
}

/// K from `--k`, else the first file that declares one. All declared values must agree.
fn algebra_k(explicit: Option<f64>, declared: impl IntoIterator<Item = Option<f64>>) -> Result<f64> {
    let mut k = explicit;
    for d in declared.into_iter().flatten() {
        match k {
            None => k = Some(d),
            Some(x) if x != d => bail!("inputs declare different K: {x} and {d}"),
            Some(_) => {}
        }
    }
    k.ok_or_else(|| anyhow!("no K given and none declared by the inputs; pass --k"))
}

fn admit_all(alg: &JordanAlgebra, chart: &MetricChart, paths: &[PathBuf]) -> Result<Vec<JordanElement>> {
    paths
        .iter()
        .map(|p| {
            let s = load_solution(p, chart)?;
            alg.admit(&s).with_context(|| format!("admitting {}", p.display()))
        })
        .collect()
}

fn jordan_setup(
    metric: &Path,
    elements: &[PathBuf],
    k: Option<f64>,
    cfg: &RunConfig,
) -> Result<(MetricChart, JordanAlgebra, Vec<JordanElement>)> {
    let chart = load_metric(metric)?;
    let sols = elements
        .iter()
        .map(|p| load_solution(p, &chart))
        .collect::<Result<Vec<_>>>()?;
    let k = algebra_k(k, sols.iter().map(|s| s.k))?;
    let alg = JordanAlgebra::new(&chart, k, grid(&chart, cfg)?)?
        .with_tolerance(cfg.tol("admission", jordan::ADMISSION_TOLERANCE));
    let elems = admit_all(&alg, &chart, elements)?;
    Ok((chart, alg, elems))
}

fn jordan_cmd(cmd: &JordanCmd, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        JordanCmd::Multiply {
            metric,
            left,
            right,
            k,
            out,
        } => {
            let (_, alg, elems) = jordan_setup(metric, &[left.clone(), right.clone()], *k, cfg)?;
            let product = alg.multiply(&elems[0], &elems[1])?;
            if let Some(out) = out {
                let comment = format!("product of {} and {}", left.display(), right.display());
                write(out, &write_field(&FieldFile::Sinyukov(product.solution().clone()), &comment))?;
            }
            Ok(Outcome::new(
                true,
                product.admission().to_vec(),
                json!({
                    "k": alg.k(),
                    "out": out.as_ref().map(|p| p.display().to_string()),
                    "grid": grid_details(alg.grid()),
                }),
            ))
        }
        JordanCmd::CheckAxioms { metric, elements, k } => {
            let (_, alg, elems) = jordan_setup(metric, elements, *k, cfg)?;
            let o = jordan::check_jordan_axioms(&alg, &elems)?;
            Ok(Outcome::new(
                o.joint.pass,
                vec![o.commutativity, o.jordan_identity, o.unit_left, o.unit_right],
                json!({ "k": alg.k(), "elements": elems.len(), "grid": grid_details(alg.grid()) }),
            ))
        }
        JordanCmd::CheckIsomorphism { metric, elements, k } => {
            let (chart, alg, mut elems) = jordan_setup(metric, elements, *k, cfg)?;
            elems.push(alg.unit()?);
            let cone = ConeSpace::build(&chart, alg.k(), DEFAULT_X0_DOMAIN, false)?;
            let cone_grid = grid(cone.chart(), cfg)?;
            let tol = cfg.tol("isomorphism", 1e-9);
            let mut reports = Vec::new();
            let mut pairs = Vec::new();
            for i in 0..elems.len() {
                for j in i..elems.len() {
                    let mut r = jordan::check_isomorphism(&alg, &cone, &elems[i], &elems[j], &cone_grid, tol)?;
                    r.equation = format!("isomorphism[{i},{j}]");
                    pairs.push(json!([i, j]));
                    reports.push(r);
                }
            }
            let pass = reports.iter().all(|r| r.pass);
            Ok(Outcome::new(
                pass,
                reports,
                json!({
                    "k": alg.k(),
                    "pairs": pairs,
                    "unit_index": elems.len() - 1,
                    "grid": grid_details(&cone_grid),
                }),
            ))
        }
        JordanCmd::CheckIdeal {
            metric,
            generators,
            elements,
            k,
        } => {
            let chart = load_metric(metric)?;
            let gens = generators
                .iter()
                .map(|p| load_concircular(p, &chart))
                .collect::<Result<Vec<_>>>()?;
            let sols = elements
                .iter()
                .map(|p| load_solution(p, &chart))
                .collect::<Result<Vec<_>>>()?;
            let k = algebra_k(*k, gens.iter().map(|c| c.k).chain(sols.iter().map(|s| s.k)))?;
            let alg = JordanAlgebra::new(&chart, k, grid(&chart, cfg)?)?
                .with_tolerance(cfg.tol("admission", jordan::ADMISSION_TOLERANCE));
            let elems = admit_all(&alg, &chart, elements)?;
            let o = jordan::check_ideal(&alg, &gens, &elems, cfg.tol("ideal-projection", 1e-7))?;
            Ok(Outcome::new(
                o.joint.pass,
                vec![o.projection, o.coefficient_fit, o.reconstruction],
                json!({
                    "k": k,
                    "generator_pairs": o.generator_pairs,
                    "generator_rank": o.generator_rank,
                    "rank_deficient": o.rank_deficient,
                    "projections": o.projections,
                    "coefficient_matrices": o.coefficient_matrices,
                    "grid": grid_details(alg.grid()),
                }),
            ))
        }
    }
}

fn geodesic(cmd: &GeodesicCmd, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        GeodesicCmd::Integrate { metric, initial, out } => {
            let chart = load_metric(metric)?;
            let traj = geometry::integrate_geodesic(&chart, &initial.x0, &initial.v0, initial.steps, initial.dt)?;
            let e = geometry::energies(&chart, &traj)?;
            let e0 = e[0];
            let drift = max_abs(e.iter().map(|v| v - e0).collect::<Vec<_>>().iter()) / e0.abs().max(f64::MIN_POSITIVE);
            if let Some(out) = out {
                write(out, &traj.to_tsv())?;
            }
            let tol = cfg.tol("energy-drift", 1e-6);
            let report = conlab_core::ResidualReport {
                equation: "energy-drift".into(),
                max: drift,
                mean: drift,
                tolerance: tol,
                points: traj.points.len(),
                pass: drift <= tol,
                worst_point: traj.points.last().map(|p| p.x.clone()).unwrap_or_default(),
            };
            Ok(Outcome::new(
                report.pass,
                vec![report],
                json!({
                    "steps": traj.points.len() - 1,
                    "truncated_at": traj.truncated_at,
                    "final": traj.points.last(),
                    "out": out.as_ref().map(|p| p.display().to_string()),
                }),
            ))
        }
        GeodesicCmd::MapCheck { g, gbar, initial } => {
            let (g, gbar) = (load_metric(g)?, load_metric(gbar)?);
            let (r, traj) = geometry::geodesic_map_check(
                &g,
                &gbar,
                &initial.x0,
                &initial.v0,
                initial.steps,
                initial.dt,
                cfg.tol("geodesic-map", 1e-8),
            )?;
            Ok(Outcome::new(
                r.pass,
                vec![r],
                json!({ "steps": traj.points.len() - 1, "truncated_at": traj.truncated_at }),
            ))
        }
    }
}

fn fields_cmd(cmd: &FieldsCmd, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        FieldsCmd::TransferRho { g, gbar, field, at } => {
            let (g, gbar) = (load_metric(g)?, load_metric(gbar)?);
            let pair = GeodesicPair::new(&g, &gbar)?;
            let c = load_concircular(field, &pair.g)?;
            let image = fields::transferred_candidate(&pair, &c)?;
            let grid = grid(&pair.gbar, cfg)?;
            let o = fields::check_concircular(&pair.gbar, &image, &grid, cfg.tol("concircular", 1e-8))?;
            let rho_at = match at {
                Some(p) => {
                    if !pair.g.contains(p) {
                        bail!("point {p:?} is outside the chart domain");
                    }
                    Some(fields::transfer_rho(&pair, &c, p)?)
                }
                None => None,
            };
            Ok(Outcome::new(
                o.concircular.pass,
                vec![o.concircular.clone()],
                json!({
                    "rho_bar": rho_at,
                    "at": at,
                    "classification": o.classification.summary(),
                    "grid": grid_details(&grid),
                }),
            ))
        }
        FieldsCmd::BuildSequence {
            metric,
            solution,
            phi,
            base_point,
            max_len,
        } => {
            let chart = load_metric(metric)?;
            let sol = load_solution(solution, &chart)?;
            let phi = load_covector(phi, &chart)?;
            let base = match base_point {
                Some(p) => p.clone(),
                None => chart.domain().iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect(),
            };
            let mut opts = SequenceOptions::new(base, *max_len);
            opts.tolerance = cfg.tol("parallel", 1e-8);
            opts.seed = cfg.grid.seed;
            let g = grid(&chart, cfg)?;
            let seq = build_parallel_sequence(&chart, &sol, &phi, &g, &opts)?;
            let mut reports = vec![seq.input_parallel.clone(), seq.lambda_parallel.clone(), seq.closedness.clone()];
            for m in &seq.members {
                for r in [&m.parallel, &m.orthogonality] {
                    let mut r = r.clone();
                    r.equation = format!("{}[{}]", r.equation, m.index);
                    reports.push(r);
                }
            }
            let informational: Vec<_> = seq
                .members
                .iter()
                .map(|m| {
                    json!({
                        "index": m.index,
                        "power_orthogonality": m.power_orthogonality.max,
                        "lambda_orthogonality": m.lambda_orthogonality.max,
                    })
                })
                .collect();
            Ok(Outcome::new(
                seq.pass,
                reports,
                json!({
                    "length": seq.len(),
                    "base_point": seq.base_point,
                    "dependency": seq.dependency,
                    "obstruction": seq.obstruction,
                    "members": informational,
                    "grid": grid_details(&g),
                }),
            ))
        }
    }
}

fn catalog_cmd(cmd: &CatalogCmd, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        CatalogCmd::List => {
            let entries = catalog::NAMES
                .iter()
                .map(|n| {
                    let e = catalog::entry(n)?;
                    Ok(json!({
                        "name": e.name,
                        "summary": e.summary,
                        "files": e.files.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
                        "expectations": e.expectations,
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Outcome::new(true, vec![], json!({ "entries": entries })))
        }
        CatalogCmd::Emit { name, dir } => {
            let e = catalog::entry(name)?;
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let mut written = Vec::new();
            for f in &e.files {
                write(&dir.join(&f.name), &f.contents)?;
                written.push(f.name.clone());
            }
            Ok(Outcome::new(
                true,
                vec![],
                json!({ "entry": e.name, "dir": dir.display().to_string(), "files": written }),
            ))
        }
        CatalogCmd::Check { name } => {
            let names: Vec<&str> = match name {
                Some(n) => vec![n.as_str()],
                None => catalog::NAMES.to_vec(),
            };
            let mut reports = Vec::new();
            let mut checks = Vec::new();
            let mut pass = true;
            for n in names {
                let e = catalog::entry(n)?;
                for c in catalog::run_declared_checks(&e, cfg.grid)? {
                    pass &= c.pass;
                    checks.push(json!({ "entry": n, "label": c.label, "pass": c.pass }));
                    reports.extend(c.reports);
                }
            }
            Ok(Outcome::new(pass, reports, json!({ "checks": checks })))
        }
    }
}
