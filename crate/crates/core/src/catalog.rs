//! Analytic examples shipped with the tool. Each entry is a set of metric
//! and field files whose derivations are written into the file comments,
//! plus the checks the entry is expected to pass.

use crate::cone::{check_connection, check_convergent_field, check_parallel_covector, lift_covector_raw, ConeSpace, DEFAULT_X0_DOMAIN};
use crate::fields::{
    build_parallel_sequence, check_concircular, check_corollary1, check_levi_civita,
    check_sinyukov, check_vn0, check_vnk, transferred_candidate, ConcircularCandidate,
    GeodesicPair, PsiSource, SequenceOptions, SinyukovSolution,
};
use crate::files::{parse_field, parse_metric, write_field, write_metric, FieldFile};
use crate::geometry::{geodesic_map_check, CovectorField, GridConfig, MetricChart, SampleGrid};
use crate::report::ResidualReport;
use crate::{Error, Result};

const FLAT2_METRIC: &str = "\
# Euclidean plane, Cartesian coordinates. All Christoffel symbols vanish.
dim = 2
coord 0 = x
coord 1 = y
domain 0 = -0.6 0.6
domain 1 = -0.6 0.6
g 0 0 = 1
g 1 1 = 1
";

const FLAT2_RADIAL: &str = "\
# phi = d(r^2/2) = (x, y). d_j phi_i = delta_ij, so rho = 1, and d rho = 0 = K phi
# with K = 0: basic, special, convergent.
kind = concircular
phi 0 = x
phi 1 = y
rho = 1
K = 0
";

const FLAT2_CONSTANT: &str = "\
# phi = dx = (1, 0) is parallel: rho = 0, exceptional and convergent.
kind = concircular
phi 0 = 1
rho = 0
K = 0
";

const FLAT2_SOLUTION: &str = "\
# a = x (x) c + c (x) x with c = (1, 0), i.e. a_ij = x_i c_j + x_j c_i.
# d_k a_ij = delta_ik c_j + delta_jk c_i, so lambda = c; d lambda = 0 gives
# mu = 0 with K = 0.
kind = sinyukov
a 0 0 = 2*x
a 0 1 = y
lambda 0 = 1
mu = 0
K = 0
";

const SPHERE2_METRIC: &str = "\
# Unit sphere, polar angle theta and azimuth phi:
#   g = dtheta^2 + sin(theta)^2 dphi^2,
#   Gamma^theta_phiphi = -sin cos, Gamma^phi_thetaphi = cot(theta).
# The ambient coordinates restricted to the sphere,
#   f1 = cos(theta), f2 = sin(theta)cos(phi), f3 = sin(theta)sin(phi),
# satisfy Hess f = -f g. So phi = df with rho = -f is concircular, and
# d rho = -phi: special with K = -1.
dim = 2
coord 0 = theta
coord 1 = phi
domain 0 = 0.4 2.7
domain 1 = -3 3
g 0 0 = 1
g 1 1 = sin(theta)^2
";

const SPHERE2_F1: &str = "\
# phi = d(cos(theta)) = (-sin(theta), 0), rho = -cos(theta).
kind = concircular
phi 0 = -sin(theta)
rho = -cos(theta)
K = -1
";

const SPHERE2_F2: &str = "\
# phi = d(sin(theta)cos(phi)), rho = -sin(theta)cos(phi).
kind = concircular
phi 0 = cos(theta)*cos(phi)
phi 1 = -sin(theta)*sin(phi)
rho = -sin(theta)*cos(phi)
K = -1
";

const SPHERE2_F3: &str = "\
# phi = d(sin(theta)sin(phi)), rho = -sin(theta)sin(phi).
kind = concircular
phi 0 = cos(theta)*sin(phi)
phi 1 = sin(theta)*cos(phi)
rho = -sin(theta)*sin(phi)
K = -1
";

const SPHERE2_SOL1: &str = "\
# Square of the f1 field: a = phi (x) phi, lambda = rho phi, mu = rho^2.
# grad lambda = K phi (x) phi + rho^2 g = K a + mu g and
# d mu = 2 rho K phi = 2 K lambda, so this lies in V_n(-1).
kind = sinyukov
a 0 0 = sin(theta)^2
lambda 0 = cos(theta)*sin(theta)
mu = cos(theta)^2
K = -1
";

const SPHERE2_SOL2: &str = "\
# Square of the f2 field, built the same way as sphere2.sol.
kind = sinyukov
a 0 0 = cos(theta)^2*cos(phi)^2
a 0 1 = -cos(theta)*cos(phi)*sin(theta)*sin(phi)
a 1 1 = sin(theta)^2*sin(phi)^2
lambda 0 = -sin(theta)*cos(phi)*cos(theta)*cos(phi)
lambda 1 = sin(theta)^2*cos(phi)*sin(phi)
mu = sin(theta)^2*cos(phi)^2
K = -1
";

const SPHERE2_UNIT: &str = "\
# Unit of the Jordan algebra: (g/K, 0, -1) with K = -1.
kind = sinyukov
a 0 0 = -1
a 1 1 = -sin(theta)^2
mu = -1
K = -1
";

const SPHERE2_REFLECT: &str = "\
# unit + 2 (phi (x) phi, rho phi, rho^2) for the f1 field:
#   a = -g + 2 phi (x) phi, lambda = 2 rho phi, mu = -1 + 2 rho^2.
# With |phi|^2 + rho^2 = 1 the quadratic identities hold with e = 1:
#   K a g^-1 a - lambda lambda = -g + 4(1 - |phi|^2 - rho^2) phi phi = -g = e g/K,
#   K g^-1(lambda, lambda) - mu^2 = -1.
kind = sinyukov
a 0 0 = -1 + 2*sin(theta)^2
a 1 1 = -sin(theta)^2
lambda 0 = 2*cos(theta)*sin(theta)
mu = -1 + 2*cos(theta)^2
K = -1
";

const HYPERBOLIC2_METRIC: &str = "\
# Hyperbolic plane in geodesic polar coordinates, g = dr^2 + sinh(r)^2 dphi^2.
# With the hyperboloid model T = cosh(r), X = sinh(r)cos(phi),
# Y = sinh(r)sin(phi), every f in {T, X, Y} has Hess f = f g, so phi = df and
# rho = f are special concircular with K = 1. For f = <x, v> with v null,
# |df|^2 = f^2.
dim = 2
coord 0 = r
coord 1 = phi
domain 0 = 0.3 1.8
domain 1 = -3 3
g 0 0 = 1
g 1 1 = sinh(r)^2
";

const HYPERBOLIC2_T: &str = "\
# phi = d(cosh(r)) = (sinh(r), 0), rho = cosh(r).
kind = concircular
phi 0 = sinh(r)
rho = cosh(r)
K = 1
";

const HYPERBOLIC2_X: &str = "\
# phi = d(sinh(r)cos(phi)), rho = sinh(r)cos(phi).
kind = concircular
phi 0 = cosh(r)*cos(phi)
phi 1 = -sinh(r)*sin(phi)
rho = sinh(r)*cos(phi)
K = 1
";

const HYPERBOLIC2_SOL: &str = "\
# Square of the T field: (phi (x) phi, rho phi, rho^2), K = 1.
kind = sinyukov
a 0 0 = sinh(r)^2
lambda 0 = cosh(r)*sinh(r)
mu = cosh(r)^2
K = 1
";

const HYPERBOLIC2_UNIT: &str = "\
# Unit (g/K, 0, -1) with K = 1.
kind = sinyukov
a 0 0 = 1
a 1 1 = sinh(r)^2
mu = -1
K = 1
";

const HYPERBOLIC2_NULL: &str = "\
# Square of the null field f = T + X: phi = df, rho = f, |phi|^2 = rho^2.
#   K a g^-1 a - lambda lambda = (|phi|^2 - rho^2) phi phi = 0,
#   K a g^-1 lambda - mu lambda = rho (|phi|^2 - rho^2) phi = 0,
#   K g^-1(lambda, lambda) - mu^2 = rho^2 (|phi|^2 - rho^2) = 0,
# so the quadratic identities hold with e = 0.
kind = sinyukov
a 0 0 = (sinh(r) + cosh(r)*cos(phi))^2
a 0 1 = -(sinh(r) + cosh(r)*cos(phi))*sinh(r)*sin(phi)
a 1 1 = sinh(r)^2*sin(phi)^2
lambda 0 = (cosh(r) + sinh(r)*cos(phi))*(sinh(r) + cosh(r)*cos(phi))
lambda 1 = -(cosh(r) + sinh(r)*cos(phi))*sinh(r)*sin(phi)
mu = (cosh(r) + sinh(r)*cos(phi))^2
K = 1
";

const KLEIN2_METRIC: &str = "\
# Klein (projective) model of the hyperbolic plane on the unit disc:
#   g_ij = delta_ij/(1 - |x|^2) + x_i x_j/(1 - |x|^2)^2.
# Straight chords are geodesics, so the metric is geodesically equivalent to
# the flat metric on the same chart, with Psi = -ln(1 - |x|^2)/2 and
# psi = x/(1 - |x|^2). det g = (1 - |x|^2)^-3.
dim = 2
coord 0 = x
coord 1 = y
domain 0 = -0.6 0.6
domain 1 = -0.6 0.6
g 0 0 = 1/(1 - x^2 - y^2) + x^2/(1 - x^2 - y^2)^2
g 0 1 = x*y/(1 - x^2 - y^2)^2
g 1 1 = 1/(1 - x^2 - y^2) + y^2/(1 - x^2 - y^2)^2
";

const KLEIN2_T: &str = "\
# T = 1/sqrt(1 - |x|^2) is the hyperboloid time coordinate: Hess T = T g,
# phi = dT = x/(1 - |x|^2)^(3/2), rho = T, K = 1.
kind = concircular
phi 0 = x*(1 - x^2 - y^2)^(-1.5)
phi 1 = y*(1 - x^2 - y^2)^(-1.5)
rho = (1 - x^2 - y^2)^(-0.5)
K = 1
";

const KLEIN2_X: &str = "\
# X = x/sqrt(1 - |x|^2): dX = ((1 - y^2), x y)/(1 - |x|^2)^(3/2), rho = X.
# This is also the image of the flat field dx under the geodesic mapping.
kind = concircular
phi 0 = (1 - y^2)*(1 - x^2 - y^2)^(-1.5)
phi 1 = x*y*(1 - x^2 - y^2)^(-1.5)
rho = x*(1 - x^2 - y^2)^(-0.5)
K = 1
";

const WARPED2_METRIC: &str = "\
# exp(y) times the flat metric. Conformal, not projective, to flat2: the
# geodesics bend, so it is the negative control for the mapping checks.
dim = 2
coord 0 = x
coord 1 = y
domain 0 = -0.6 0.6
domain 1 = -0.6 0.6
g 0 0 = exp(y)
g 1 1 = exp(y)
";

const FLATVN0_METRIC: &str = "\
# Euclidean 3-space, the simplest V_n(0).
dim = 3
coord 0 = x
coord 1 = y
coord 2 = z
domain 0 = -0.5 0.5
domain 1 = -0.5 0.5
domain 2 = -0.5 0.5
g 0 0 = 1
g 1 1 = 1
g 2 2 = 1
";

const FLATVN0_SOL: &str = "\
# a = x (x) c + c (x) x + (e1 (x) e2 + e2 (x) e1) with c = e0, lambda = c
# parallel, mu = 0. The operator A = g^-1 a swaps the y and z directions up
# to multiples of lambda, which drives the parallel sequence below.
kind = sinyukov
a 0 0 = 2*x
a 0 1 = y
a 0 2 = z
a 1 2 = 1
lambda 0 = 1
mu = 0
K = 0
";

const FLATVN0_QUADRATIC: &str = "\
# a_ij = x_i x_j, lambda = x, mu = 1: d_k a_ij = delta_ik x_j + x_i delta_jk
# and d lambda = g.
kind = sinyukov
a 0 0 = x^2
a 0 1 = x*y
a 0 2 = x*z
a 1 1 = y^2
a 1 2 = y*z
a 2 2 = z^2
lambda 0 = x
lambda 1 = y
lambda 2 = z
mu = 1
K = 0
";

const FLATVN0_PHI: &str = "\
# phi1 = dy, orthogonal to lambda. With potentials from the origin:
#   phi2 = A phi1 - y lambda = dz,  phi3 = A phi2 - z lambda = dy = phi1,
# so the sequence has two independent members.
kind = covector
w 1 = 1
";

const FLATVN0_OBSTRUCTED: &str = "\
# phi1 = dx = lambda, so phi1(lambda*) = 1 and the sequence is obstructed.
kind = covector
w 0 = 1
";

/// One file of a catalog entry.
#[derive(Clone, Debug)]
pub struct CatalogFile {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub files: Vec<CatalogFile>,
    /// Human-readable expected outcomes, one per declared check.
    pub expectations: Vec<&'static str>,
}

impl CatalogEntry {
    pub fn file(&self, name: &str) -> Result<&str> {
        self.files
            .iter()
            .find(|f| f.name == name)
            .map(|f| f.contents.as_str())
            .ok_or_else(|| Error::Invalid(format!("catalog entry {} has no file {name}", self.name)))
    }

    pub fn metric(&self, name: &str) -> Result<MetricChart> {
        parse_metric(self.file(name)?)
    }

    pub fn field(&self, name: &str, chart: &MetricChart) -> Result<FieldFile> {
        parse_field(self.file(name)?, chart)
    }

    pub fn concircular(&self, name: &str, chart: &MetricChart) -> Result<ConcircularCandidate> {
        match self.field(name, chart)? {
            FieldFile::Concircular(c) => Ok(c),
            other => Err(Error::Invalid(format!("{name} is a {} file", other.kind()))),
        }
    }

    pub fn solution(&self, name: &str, chart: &MetricChart) -> Result<SinyukovSolution> {
        match self.field(name, chart)? {
            FieldFile::Sinyukov(s) => Ok(s),
            other => Err(Error::Invalid(format!("{name} is a {} file", other.kind()))),
        }
    }

    pub fn covector(&self, name: &str, chart: &MetricChart) -> Result<CovectorField> {
        match self.field(name, chart)? {
            FieldFile::Covector(w) => Ok(w),
            other => Err(Error::Invalid(format!("{name} is a {} file", other.kind()))),
        }
    }
}

pub const NAMES: [&str; 6] = [
    "flat2",
    "sphere2",
    "hyperbolic2",
    "klein2",
    "flat-vn0",
    "cone-of-hyperbolic2",
];

fn files(list: &[(&str, &str)]) -> Vec<CatalogFile> {
    list.iter()
        .map(|(n, c)| CatalogFile {
            name: n.to_string(),
            contents: c.to_string(),
        })
        .collect()
}

pub fn entry(name: &str) -> Result<CatalogEntry> {
    let e = match name {
        "flat2" => CatalogEntry {
            name: "flat2",
            summary: "Euclidean plane: radial and parallel concircular fields, a V_n(0) solution",
            files: files(&[
                ("flat2.metric", FLAT2_METRIC),
                ("flat2.radial.conc", FLAT2_RADIAL),
                ("flat2.const.conc", FLAT2_CONSTANT),
                ("flat2.sol", FLAT2_SOLUTION),
            ]),
            expectations: vec![
                "flat2.radial.conc: basic, special, K=0, convergent",
                "flat2.const.conc: exceptional, special, K=0, convergent",
                "flat2.sol: Sinyukov and V_n(0) residuals vanish",
            ],
        },
        "sphere2" => CatalogEntry {
            name: "sphere2",
            summary: "unit sphere, V_n(-1): three concircular fields and Jordan elements",
            files: files(&[
                ("sphere2.metric", SPHERE2_METRIC),
                ("sphere2.conc", SPHERE2_F1),
                ("sphere2-b.conc", SPHERE2_F2),
                ("sphere2-c.conc", SPHERE2_F3),
                ("sphere2.sol", SPHERE2_SOL1),
                ("sphere2-b.sol", SPHERE2_SOL2),
                ("sphere2.unit.sol", SPHERE2_UNIT),
                ("sphere2.reflect.sol", SPHERE2_REFLECT),
            ]),
            expectations: vec![
                "sphere2.conc, sphere2-b.conc, sphere2-c.conc: basic, special, K=-1",
                "sphere2.sol, sphere2-b.sol, sphere2.unit.sol, sphere2.reflect.sol: V_n(K) with K=-1",
                "sphere2.unit.sol and sphere2.reflect.sol: quadratic identities with e=1",
            ],
        },
        "hyperbolic2" => CatalogEntry {
            name: "hyperbolic2",
            summary: "hyperbolic plane in polar coordinates, V_n(1)",
            files: files(&[
                ("hyperbolic2.metric", HYPERBOLIC2_METRIC),
                ("hyperbolic2.conc", HYPERBOLIC2_T),
                ("hyperbolic2-x.conc", HYPERBOLIC2_X),
                ("hyperbolic2.sol", HYPERBOLIC2_SOL),
                ("hyperbolic2.unit.sol", HYPERBOLIC2_UNIT),
                ("hyperbolic2.null.sol", HYPERBOLIC2_NULL),
            ]),
            expectations: vec![
                "hyperbolic2.conc, hyperbolic2-x.conc: basic, special, K=1",
                "hyperbolic2.sol, hyperbolic2.unit.sol, hyperbolic2.null.sol: V_n(K) with K=1",
                "hyperbolic2.unit.sol: quadratic identities with e=1; hyperbolic2.null.sol: with e=0",
            ],
        },
        "klein2" => CatalogEntry {
            name: "klein2",
            summary: "Klein disc, geodesically equivalent to flat2; exp(y)-scaled flat as negative control",
            files: files(&[
                ("klein2.metric", KLEIN2_METRIC),
                ("flat2.metric", FLAT2_METRIC),
                ("flat2.const.conc", FLAT2_CONSTANT),
                ("klein2.conc", KLEIN2_T),
                ("klein2-x.conc", KLEIN2_X),
                ("warped2.metric", WARPED2_METRIC),
            ]),
            expectations: vec![
                "flat2/klein2: Levi-Civita residual vanishes with psi from the determinants",
                "flat2/klein2: geodesics of flat2 stay geodesics of klein2",
                "klein2.conc, klein2-x.conc: basic, special, K=1",
                "flat2.const.conc transferred to klein2: concircular",
                "flat2/warped2: both mapping checks fail",
            ],
        },
        "flat-vn0" => CatalogEntry {
            name: "flat-vn0",
            summary: "Euclidean 3-space: V_n(0) solutions and a parallel covector sequence",
            files: files(&[
                ("flat-vn0.metric", FLATVN0_METRIC),
                ("flat-vn0.sol", FLATVN0_SOL),
                ("flat-vn0.quad.sol", FLATVN0_QUADRATIC),
                ("flat-vn0.phi", FLATVN0_PHI),
                ("flat-vn0.obstructed.phi", FLATVN0_OBSTRUCTED),
            ]),
            expectations: vec![
                "flat-vn0.sol, flat-vn0.quad.sol: V_n(0) residuals vanish",
                "flat-vn0.phi: parallel sequence of length 2 from the origin",
                "flat-vn0.obstructed.phi: obstruction reported",
            ],
        },
        "cone-of-hyperbolic2" => cone_entry()?,
        other => {
            return Err(Error::Invalid(format!(
                "unknown catalog entry `{other}`; known: {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(e)
}

fn cone_entry() -> Result<CatalogEntry> {
    let base = parse_metric(HYPERBOLIC2_METRIC)?;
    let cone = ConeSpace::build(&base, 1.0, DEFAULT_X0_DOMAIN, false)?;
    let metric = write_metric(
        cone.chart(),
        "Cone over hyperbolic2 with K = 1:\n  G = -exp(2 x0) dx0^2 + exp(2 x0) g/K.\n\
         dx0 is the convergent field, Gamma^i_0j = K delta^i_j.",
    );
    let t = match parse_field(HYPERBOLIC2_T, &base)? {
        FieldFile::Concircular(c) => c,
        _ => unreachable!("catalog file kind"),
    };
    let lifted = lift_covector_raw(&cone, &t.rho, &t.phi);
    let lifted = write_field(
        &FieldFile::Covector(lifted),
        "Lift of d(cosh(r)): exp(x0) (rho, phi). Parallel on the cone.",
    );
    let sidecar = format!(
        "{{\n  \"K\": 1.0,\n  \"base\": \"hyperbolic2.metric\",\n  \"x0_domain\": [{:?}, {:?}]\n}}\n",
        DEFAULT_X0_DOMAIN.lo, DEFAULT_X0_DOMAIN.hi
    );
    let mut files = files(&[
        ("hyperbolic2.metric", HYPERBOLIC2_METRIC),
        ("hyperbolic2.conc", HYPERBOLIC2_T),
    ]);
    for (name, contents) in [
        ("cone-of-hyperbolic2.metric", metric),
        ("cone-of-hyperbolic2.lifted.cov", lifted),
        ("cone-of-hyperbolic2.json", sidecar),
    ] {
        files.push(CatalogFile {
            name: name.into(),
            contents,
        });
    }
    Ok(CatalogEntry {
        name: "cone-of-hyperbolic2",
        summary: "3D cone over hyperbolic2 with K = 1 and the lift of d(cosh r)",
        files,
        expectations: vec![
            "cone connection: Gamma^i_0j = K delta^i_j, metric-compatible",
            "dx0 is convergent on the cone",
            "cone-of-hyperbolic2.lifted.cov is parallel",
        ],
    })
}

/// Outcome of one declared catalog check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DeclaredCheck {
    pub label: String,
    pub pass: bool,
    pub reports: Vec<ResidualReport>,
}

fn declared(label: impl Into<String>, pass: bool, reports: Vec<ResidualReport>) -> DeclaredCheck {
    DeclaredCheck {
        label: label.into(),
        pass,
        reports,
    }
}

const TOL: f64 = 1e-9;

fn concircular_check(
    out: &mut Vec<DeclaredCheck>,
    entry: &CatalogEntry,
    chart: &MetricChart,
    grid: &SampleGrid,
    file: &str,
    expected: &str,
) -> Result<()> {
    let c = entry.concircular(file, chart)?;
    let o = check_concircular(chart, &c, grid, TOL)?;
    let summary = o.classification.summary();
    out.push(declared(
        format!("{file}: {summary} (expected {expected})"),
        o.classification.concircular && summary == expected,
        o.reports().into_iter().cloned().collect(),
    ));
    Ok(())
}

fn vnk_check(
    out: &mut Vec<DeclaredCheck>,
    entry: &CatalogEntry,
    chart: &MetricChart,
    grid: &SampleGrid,
    file: &str,
) -> Result<()> {
    let s = entry.solution(file, chart)?;
    let sin = check_sinyukov(chart, &s, grid, TOL)?;
    let vnk = check_vnk(chart, &s, grid, TOL)?;
    out.push(declared(
        format!("{file}: Sinyukov and V_n(K) identities"),
        sin.pass && vnk.joint.pass,
        vec![sin, vnk.lambda, vnk.mu],
    ));
    Ok(())
}

fn corollary_check(
    out: &mut Vec<DeclaredCheck>,
    entry: &CatalogEntry,
    chart: &MetricChart,
    grid: &SampleGrid,
    file: &str,
    e: i32,
) -> Result<()> {
    let s = entry.solution(file, chart)?;
    let o = check_corollary1(chart, &s, e, grid, TOL)?;
    out.push(declared(
        format!("{file}: quadratic identities with e={e}"),
        o.joint.pass,
        vec![o.form, o.covector, o.scalar],
    ));
    Ok(())
}

/// Runs the checks an entry declares.
pub fn run_declared_checks(entry: &CatalogEntry, config: GridConfig) -> Result<Vec<DeclaredCheck>> {
    let mut out = Vec::new();
    match entry.name {
        "flat2" => {
            let chart = entry.metric("flat2.metric")?;
            let grid = SampleGrid::new(chart.domain(), config)?;
            concircular_check(&mut out, entry, &chart, &grid, "flat2.radial.conc", "basic, special, K=0, convergent")?;
            concircular_check(&mut out, entry, &chart, &grid, "flat2.const.conc", "exceptional, special, K=0, convergent")?;
            let s = entry.solution("flat2.sol", &chart)?;
            let v = check_vn0(&chart, &s, &grid, TOL)?;
            out.push(declared("flat2.sol: V_n(0) identities", v.joint.pass, vec![v.sinyukov, v.lambda, v.mu_constant]));
        }
        "sphere2" | "hyperbolic2" => {
            let sphere = entry.name == "sphere2";
            let chart = entry.metric(&format!("{}.metric", entry.name))?;
            let grid = SampleGrid::new(chart.domain(), config)?;
            let (fields, expected): (&[&str], &str) = if sphere {
                (&["sphere2.conc", "sphere2-b.conc", "sphere2-c.conc"], "basic, special, K=-1")
            } else {
                (&["hyperbolic2.conc", "hyperbolic2-x.conc"], "basic, special, K=1")
            };
            for f in fields {
                concircular_check(&mut out, entry, &chart, &grid, f, expected)?;
            }
            let sols: &[&str] = if sphere {
                &["sphere2.sol", "sphere2-b.sol", "sphere2.unit.sol", "sphere2.reflect.sol"]
            } else {
                &["hyperbolic2.sol", "hyperbolic2.unit.sol", "hyperbolic2.null.sol"]
            };
            for s in sols {
                vnk_check(&mut out, entry, &chart, &grid, s)?;
            }
            if sphere {
                corollary_check(&mut out, entry, &chart, &grid, "sphere2.unit.sol", 1)?;
                corollary_check(&mut out, entry, &chart, &grid, "sphere2.reflect.sol", 1)?;
            } else {
                corollary_check(&mut out, entry, &chart, &grid, "hyperbolic2.unit.sol", 1)?;
                corollary_check(&mut out, entry, &chart, &grid, "hyperbolic2.null.sol", 0)?;
            }
        }
        "klein2" => {
            let klein = entry.metric("klein2.metric")?;
            let flat = entry.metric("flat2.metric")?;
            let pair = GeodesicPair::new(&flat, &klein)?;
            let grid = SampleGrid::new(pair.g.domain(), config)?;
            let lc = check_levi_civita(&pair, &PsiSource::Auto, &grid, 1e-8)?;
            out.push(declared("flat2/klein2: Levi-Civita equation", lc.pass, vec![lc]));
            let (map, _) = geodesic_map_check(&flat, &klein, &[-0.4, -0.2], &[0.5, 0.25], 1000, 1e-3, 1e-8)?;
            out.push(declared("flat2/klein2: geodesic mapping", map.pass, vec![map]));
            concircular_check(&mut out, entry, &klein, &grid, "klein2.conc", "basic, special, K=1")?;
            concircular_check(&mut out, entry, &klein, &grid, "klein2-x.conc", "basic, special, K=1")?;
            let c = entry.concircular("flat2.const.conc", &flat)?;
            let t = transferred_candidate(&pair, &c)?;
            let o = check_concircular(&pair.gbar, &t, &grid, 1e-6)?;
            out.push(declared("flat2.const.conc transferred to klein2", o.concircular.pass, vec![o.concircular]));
            let warped = entry.metric("warped2.metric")?;
            let bad = GeodesicPair::new(&flat, &warped)?;
            let lc = check_levi_civita(&bad, &PsiSource::Auto, &grid, 1e-8)?;
            let (map, _) = geodesic_map_check(&flat, &warped, &[-0.4, -0.2], &[0.5, 0.25], 1000, 1e-3, 1e-8)?;
            out.push(declared(
                "flat2/warped2: both mapping checks fail",
                !lc.pass && !map.pass,
                vec![lc, map],
            ));
        }
        "flat-vn0" => {
            let chart = entry.metric("flat-vn0.metric")?;
            let grid = SampleGrid::new(chart.domain(), config)?;
            let mut sol = None;
            for f in ["flat-vn0.sol", "flat-vn0.quad.sol"] {
                let s = entry.solution(f, &chart)?;
                let v = check_vn0(&chart, &s, &grid, 1e-12)?;
                out.push(declared(format!("{f}: V_n(0) identities"), v.joint.pass, vec![v.sinyukov, v.lambda, v.mu_constant]));
                sol.get_or_insert(s);
            }
            let sol = sol.expect("two solutions checked");
            let opts = SequenceOptions::new(vec![0.0; 3], 4);
            let phi = entry.covector("flat-vn0.phi", &chart)?;
            let seq = build_parallel_sequence(&chart, &sol, &phi, &grid, &opts)?;
            let reports = seq.members.iter().flat_map(|m| [m.parallel.clone(), m.orthogonality.clone()]).collect();
            out.push(declared(
                format!("flat-vn0.phi: sequence of length {}", seq.len()),
                seq.pass && seq.len() == 2,
                reports,
            ));
            let phi = entry.covector("flat-vn0.obstructed.phi", &chart)?;
            let seq = build_parallel_sequence(&chart, &sol, &phi, &grid, &opts)?;
            out.push(declared(
                "flat-vn0.obstructed.phi: obstruction reported",
                seq.obstruction.is_some(),
                seq.members.iter().map(|m| m.orthogonality.clone()).collect(),
            ));
        }
        "cone-of-hyperbolic2" => {
            let base = entry.metric("hyperbolic2.metric")?;
            let cone = ConeSpace::build(&base, 1.0, DEFAULT_X0_DOMAIN, false)?;
            let shipped = entry.metric("cone-of-hyperbolic2.metric")?;
            out.push(declared(
                "cone-of-hyperbolic2.metric matches the constructed cone",
                shipped.metric() == cone.chart().metric() && shipped.coords() == cone.chart().coords(),
                vec![],
            ));
            let grid = SampleGrid::new(cone.chart().domain(), config)?;
            let conn = check_connection(&cone, &grid, 1e-10)?;
            out.push(declared(
                "cone connection",
                conn.mixed.pass && conn.closed_form.pass && conn.metricity.pass && conn.inverse.pass,
                vec![conn.mixed, conn.closed_form, conn.metricity, conn.inverse],
            ));
            let conv = check_convergent_field(&cone, &grid, TOL)?;
            out.push(declared("dx0 convergent", conv.joint.pass, vec![conv.field, conv.norm]));
            let w = entry.covector("cone-of-hyperbolic2.lifted.cov", cone.chart())?;
            let par = check_parallel_covector(&cone, &w, &grid, TOL)?;
            out.push(declared("cone-of-hyperbolic2.lifted.cov parallel", par.pass, vec![par]));
        }
        other => return Err(Error::Invalid(format!("no declared checks for `{other}`"))),
    }
    Ok(out)
}
