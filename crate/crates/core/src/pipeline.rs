//! End-to-end driver: derivation, artifacts, and the verification report.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};
use thiserror::Error;

use crate::correlation::{self, CorrelationError, CorrelationPoint, CorrelationVertices, Inequality, InequalityClass};
use crate::dualdesc::{self, PolyError};
use crate::exactgeom::{rat, ratio, HRep, HomogeneousVector, Rational, VRep};
use crate::io::{self, FormatError, Polytope};
use crate::quantum::{self, CabelloSource, DepolarizingStrength, QuantumError, Threshold, Violation};
use crate::scenario::{AssignmentRole, CellGrid, DeterministicAssignment, Scenario, ScenarioError};
use crate::symmetry::{self, Orbit, SignedPermutation, SymmetryGroup};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Built-in name or path to a scenario JSON file.
pub fn load_scenario(spec: &str) -> Result<Scenario, PipelineError> {
    if spec == "peres-mermin" {
        return Ok(Scenario::peres_mermin());
    }
    let text = read(Path::new(spec))?;
    Scenario::from_json(&text).map_err(|e| PipelineError::Config(format!("{spec}: {e}")))
}

pub fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

pub fn write(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

/// Everything computed for one scenario.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub scenario: Scenario,
    pub assignment_h: HRep,
    pub correlation: CorrelationVertices,
    pub correlation_h: HRep,
    /// Classified, in class/orbit order.
    pub inequalities: Vec<Inequality>,
    pub assignment_group: Option<SymmetryGroup>,
    pub correlation_group: Option<SymmetryGroup>,
    pub vertex_orbits: Vec<Orbit<Vec<Rational>>>,
}

/// The standard generators apply only to 3x3 squares, and only when they
/// actually preserve the scenario; otherwise every orbit is a singleton.
pub fn derive(scenario: &Scenario) -> Result<Derivation, PipelineError> {
    scenario.validate()?;
    let assignment_h = scenario.build_assignment_polytope(AssignmentRole::Measurement);
    let correlation = correlation::correlation_vertices(scenario)?;
    let raw = correlation::derive_inequalities(&correlation.vertices, scenario.cols)?;
    let correlation_h = correlation::inequalities_to_hrep(&raw, scenario.num_cells());

    let square = scenario.rows == 3 && scenario.cols == 3;
    let assignment_group = square
        .then(|| {
            symmetry::close_generators(9, &symmetry::assignment_generators(), |g| {
                symmetry::preserves_hrep(&assignment_h, g)
            })
            .ok()
        })
        .flatten();
    let points = correlation.vertices.points();
    let correlation_group = square
        .then(|| {
            symmetry::close_generators(9, &symmetry::correlation_generators(), |g| {
                symmetry::preserves_points(&points, g)
            })
            .ok()
        })
        .flatten();

    let trivial = SymmetryGroup::from_elements([SignedPermutation::identity(scenario.num_cells())]);
    let inequalities =
        correlation::classify(&raw, correlation_group.as_ref().unwrap_or(&trivial), scenario)?;
    let vertex_orbits = symmetry::orbits(
        &correlation.assignment.points(),
        assignment_group.as_ref().unwrap_or(&trivial),
        |g, p| g.apply(p),
    )
    .map_err(CorrelationError::from)?;

    Ok(Derivation {
        scenario: scenario.clone(),
        assignment_h,
        correlation,
        correlation_h,
        inequalities,
        assignment_group,
        correlation_group,
        vertex_orbits,
    })
}

impl Derivation {
    /// Sizes of the inequality orbits, in orbit order.
    pub fn orbit_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = Vec::new();
        for ineq in &self.inequalities {
            let id = ineq.orbit.unwrap_or(0);
            if sizes.len() <= id {
                sizes.resize(id + 1, 0);
            }
            sizes[id] += 1;
        }
        sizes
    }

    /// `24/144/16` style summary.
    pub fn summary(&self) -> String {
        self.orbit_sizes().iter().map(usize::to_string).collect::<Vec<_>>().join("/")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HReps {
    pub assignment: HRep,
    pub correlation: HRep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VReps {
    pub assignment: VRep,
    pub correlation: VRep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub order: usize,
    pub generators: Vec<SignedPermutation>,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexOrbit {
    pub size: usize,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub representative: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityOrbit {
    pub orbit: usize,
    pub class: Option<InequalityClass>,
    pub size: usize,
    pub representative: Inequality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSection {
    pub assignment_vertices: Vec<VertexOrbit>,
    pub inequalities: Vec<InequalityOrbit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetrySection {
    pub groups: Vec<GroupSummary>,
    pub orbits: OrbitSection,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumReport {
    pub r: DepolarizingStrength,
    #[serde_as(as = "DisplayFromStr")]
    pub r2: Rational,
    #[serde_as(as = "Vec<Vec<DisplayFromStr>>")]
    pub omegas: Vec<Vec<Rational>>,
    pub violations: Vec<Violation>,
    pub thresholds: Vec<Threshold>,
}

/// The single machine-readable artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub scenario: Scenario,
    pub hreps: HReps,
    pub vreps: VReps,
    pub inequalities: Vec<Inequality>,
    pub symmetry: SymmetrySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<QuantumReport>,
}

/// Violations and thresholds at strength `r`. Needs the 3x3 square.
pub fn quantum_report(ineqs: &[Inequality], r: &DepolarizingStrength) -> Result<QuantumReport, PipelineError> {
    let omega = quantum::correlations(r)?;
    Ok(QuantumReport {
        r: r.clone(),
        r2: r.r_squared().clone(),
        omegas: omega.to_rows(),
        violations: quantum::violations(ineqs, &omega),
        thresholds: quantum::threshold_report(ineqs),
    })
}

fn is_standard_square(scenario: &Scenario) -> bool {
    let pm = Scenario::peres_mermin();
    scenario.rows == pm.rows && scenario.cols == pm.cols && scenario.contexts == pm.contexts
}

impl Artifact {
    pub fn build(d: &Derivation, r: Option<&DepolarizingStrength>) -> Result<Self, PipelineError> {
        let mut groups = Vec::new();
        if let Some(g) = &d.assignment_group {
            groups.push(GroupSummary {
                name: "assignment".into(),
                order: g.order(),
                generators: symmetry::assignment_generators(),
            });
        }
        if let Some(g) = &d.correlation_group {
            groups.push(GroupSummary {
                name: "correlation".into(),
                order: g.order(),
                generators: symmetry::correlation_generators(),
            });
        }
        let sizes = d.orbit_sizes();
        let inequality_orbits = d
            .inequalities
            .iter()
            .filter(|i| i.representative)
            .map(|i| {
                let orbit = i.orbit.unwrap_or(0);
                InequalityOrbit { orbit, class: i.klass, size: sizes[orbit], representative: i.clone() }
            })
            .collect();
        let quantum = match (r, is_standard_square(&d.scenario)) {
            (Some(r), true) => Some(quantum_report(&d.inequalities, r)?),
            _ => None,
        };
        Ok(Self {
            scenario: d.scenario.clone(),
            hreps: HReps { assignment: d.assignment_h.clone(), correlation: d.correlation_h.clone() },
            vreps: VReps { assignment: d.correlation.assignment.clone(), correlation: d.correlation.vertices.clone() },
            inequalities: d.inequalities.clone(),
            symmetry: SymmetrySection {
                groups,
                orbits: OrbitSection {
                    assignment_vertices: d
                        .vertex_orbits
                        .iter()
                        .map(|o| VertexOrbit { size: o.size(), representative: o.representative.clone() })
                        .collect(),
                    inequalities: inequality_orbits,
                },
            },
            quantum,
        })
    }
}

/// Human-readable orbit listing.
pub fn orbit_text(d: &Derivation) -> String {
    let mut out = String::new();
    out.push_str(&format!("assignment vertex classes: {}\n", d.vertex_orbits.len()));
    for o in &d.vertex_orbits {
        let rep: Vec<String> = o.representative.iter().map(Rational::to_string).collect();
        out.push_str(&format!("  size {:>4}  [{}]\n", o.size(), rep.join(" ")));
    }
    let sizes = d.orbit_sizes();
    out.push_str(&format!("inequality orbits: {}  ({})\n", sizes.len(), d.summary()));
    for i in d.inequalities.iter().filter(|i| i.representative) {
        let class = i.klass.map_or("unlabelled".to_string(), |c| c.to_string());
        let orbit = i.orbit.unwrap_or(0);
        out.push_str(&format!("  orbit {orbit:>3}  {class:<10}  size {:>4}  {i}\n", sizes[orbit]));
    }
    out
}

pub fn quantum_text(q: &QuantumReport) -> String {
    let mut out = format!("r = {}, r^2 = {}\nomega:\n", q.r.r(), q.r2);
    for row in &q.omegas {
        let row: Vec<String> = row.iter().map(Rational::to_string).collect();
        out.push_str(&format!("  {}\n", row.join(" ")));
    }
    out.push_str(&format!("violated: {}\n", q.violations.len()));
    for v in &q.violations {
        out.push_str(&format!("  {}  value {}\n", v.inequality, v.value));
    }
    out.push_str("thresholds (violation iff r^2 above):\n");
    let mut seen = BTreeSet::new();
    for t in &q.thresholds {
        if t.inequality.representative && seen.insert(t.inequality.orbit) {
            out.push_str(&format!("  {}  r^2 = {} ({}), r = {}\n", t.inequality, t.r2, t.r2_decimal, t.r_decimal));
        }
    }
    out
}

/// Output files written by [`run_pipeline`].
pub const ARTIFACT_FILES: [&str; 7] = [
    "assignment.hrep",
    "assignment.vrep",
    "correlation.vrep",
    "correlation.hrep",
    "orbits.txt",
    "quantum.txt",
    "artifact.json",
];

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub scenario: Scenario,
    pub out: PathBuf,
    pub r: DepolarizingStrength,
    pub verify: bool,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub derivation: Derivation,
    pub artifact: Artifact,
    pub report: Option<VerifyReport>,
}

impl PipelineOutcome {
    pub fn exit_code(&self) -> i32 {
        match &self.report {
            Some(r) if !r.passed() => 1,
            _ => 0,
        }
    }
}

/// Derives everything, writes the artifact files, and (optionally) checks
/// the derivation against the built-in expectations.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    let derivation = derive(&config.scenario)?;
    let artifact = Artifact::build(&derivation, Some(&config.r))?;
    fs::create_dir_all(&config.out).map_err(|source| PipelineError::Io { path: config.out.clone(), source })?;
    let out = |name: &str| config.out.join(name);
    write(&out("assignment.hrep"), &io::write_hrep(&derivation.assignment_h))?;
    write(&out("assignment.vrep"), &io::write_vrep(&derivation.correlation.assignment))?;
    write(&out("correlation.vrep"), &io::write_vrep(&derivation.correlation.vertices))?;
    write(&out("correlation.hrep"), &io::write_hrep(&derivation.correlation_h))?;
    write(&out("orbits.txt"), &orbit_text(&derivation))?;
    let quantum = artifact.quantum.as_ref().map_or_else(|| "no quantum realization for this scenario\n".to_string(), quantum_text);
    write(&out("quantum.txt"), &quantum)?;
    write(&out("artifact.json"), &(serde_json::to_string_pretty(&artifact)? + "\n"))?;
    let report = (config.verify && is_standard_square(&config.scenario)).then(|| {
        let mut ctx = VerifyContext::with_derivation(derivation.clone());
        ctx.facet_file = Some(out("correlation.hrep"));
        verify_with(&mut ctx, &VerifyOptions::default())
    });
    Ok(PipelineOutcome { derivation, artifact, report })
}

/// `H` in, `V` out and vice versa.
pub fn convert(p: &Polytope) -> Result<Polytope, PipelineError> {
    Ok(match p {
        Polytope::H(h) => Polytope::V(dualdesc::facets_to_vertices(h)?),
        Polytope::V(v) => Polytope::H(dualdesc::vertices_to_facets(v)?),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub group: String,
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerifyReport {
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> Vec<&VerifyEntry> {
        self.entries.iter().filter(|e| !e.passed).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let status = if e.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {}/{}: expected {}, computed {}\n",
                e.group, e.name, e.expected, e.computed
            ));
        }
        let failed = self.failures().len();
        out.push_str(&format!("{} checks, {} failed\n", self.entries.len(), failed));
        out
    }

    fn push(&mut self, group: &str, name: &str, expected: impl ToString, computed: impl ToString) {
        let (expected, computed) = (expected.to_string(), computed.to_string());
        let passed = expected == computed;
        self.entries.push(VerifyEntry { group: group.into(), name: name.into(), expected, computed, passed });
    }
}

pub const VERIFY_GROUPS: [&str; 5] = ["counts", "logic", "quantum", "roundtrip", "symmetry"];

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Restrict to these groups; empty means all.
    pub only: Vec<String>,
}

impl VerifyOptions {
    fn wants(&self, group: &str) -> bool {
        self.only.is_empty() || self.only.iter().any(|g| g == group)
    }
}

/// Lazily derived state shared by the checks.
#[derive(Debug, Default)]
pub struct VerifyContext {
    derivation: Option<Derivation>,
    /// A facet file to compare against the derived facets.
    pub facet_file: Option<PathBuf>,
}

impl VerifyContext {
    pub fn with_derivation(d: Derivation) -> Self {
        Self { derivation: Some(d), facet_file: None }
    }

    fn derivation(&mut self) -> Result<&Derivation, String> {
        if self.derivation.is_none() {
            self.derivation = Some(derive(&Scenario::peres_mermin()).map_err(|e| e.to_string())?);
        }
        Ok(self.derivation.as_ref().expect("just set"))
    }
}

pub fn verify_all(options: &VerifyOptions) -> VerifyReport {
    verify_with(&mut VerifyContext::default(), options)
}

pub fn verify_with(ctx: &mut VerifyContext, options: &VerifyOptions) -> VerifyReport {
    let mut report = VerifyReport::default();
    for group in VERIFY_GROUPS {
        if options.wants(group) {
            match group {
                "counts" => check_counts(ctx, &mut report),
                "logic" => check_logic(ctx, &mut report),
                "quantum" => check_quantum(&mut report),
                "roundtrip" => check_roundtrip(&mut report),
                _ => check_symmetry(ctx, &mut report),
            }
        }
    }
    if let Some(path) = ctx.facet_file.clone() {
        check_facet_file(ctx, &path, &mut report);
    }
    report
}

fn grid(rows: [[i64; 3]; 3]) -> CorrelationPoint {
    CellGrid::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()).expect("3x3")
}

/// Named representatives: the trivial example, the class-I example, and the
/// two quantum-violated inequalities.
pub fn named_inequalities() -> [(&'static str, Inequality); 4] {
    [
        ("trivial", Inequality::new([[-1, 1, 1], [0; 3], [0; 3]], 1)),
        ("class-I", Inequality::new([[-1, 0, 1], [1, 0, 1], [0, -1, 0]], 3)),
        ("QVI1", Inequality::new([[1, 1, 0], [1, 1, 0], [0, 0, 1]], 3)),
        ("QVI2", Inequality::new([[1; 3]; 3], 5)),
    ]
}

fn compact(w: &CorrelationPoint) -> String {
    let rows: Vec<String> =
        w.to_rows().iter().map(|r| r.iter().map(Rational::to_string).collect::<Vec<_>>().join(" ")).collect();
    format!("[{}]", rows.join(" | "))
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join("/")
}

fn failed(report: &mut VerifyReport, group: &str, e: String) {
    report.push(group, "derivation", "ok", e);
}

fn check_counts(ctx: &mut VerifyContext, report: &mut VerifyReport) {
    let g = "counts";
    let d = match ctx.derivation() {
        Ok(d) => d,
        Err(e) => return failed(report, g, e),
    };
    let unit = |x: &Rational| *x == rat(0) || *x == rat(1) || *x == rat(-1);
    report.push(g, "assignment-inequalities", 24, d.assignment_h.len());
    report.push(g, "assignment-vertices", 120, d.correlation.assignment.len());
    report.push(
        g,
        "assignment-vertex-entries",
        true,
        d.correlation.assignment.points().iter().flatten().all(unit),
    );
    let mut sizes: Vec<usize> = d.vertex_orbits.iter().map(Orbit::size).collect();
    sizes.sort_unstable();
    report.push(g, "assignment-vertex-classes", "48/72", join(sizes));
    let class_of = |p: CorrelationPoint| {
        d.vertex_orbits.iter().find(|o| o.members.contains(&p.values().to_vec())).map_or(0, Orbit::size)
    };
    let k1 = grid([[0, 0, -1], [0, 0, 1], [1, 1, 1]]);
    let k2 = grid([[0, 0, 1], [1, 0, 0], [0, -1, 0]]);
    report.push(g, "kappa1-class", 72, class_of(k1.clone()));
    report.push(g, "kappa2-class", 48, class_of(k2.clone()));

    let cv = &d.correlation;
    report.push(g, "pairings", 14400, cv.products);
    report.push(g, "distinct-products", 235, cv.reduction.distinct_len);
    report.push(g, "correlation-vertices", 120, cv.vertices.len());
    report.push(g, "reduction-certificates", true, cv.reduction.certificates_hold());
    report.push(g, "affine-dimension", 9, cv.affine_dimension);
    let vertex_set: BTreeSet<Vec<Rational>> = cv.vertices.points().into_iter().collect();
    let k11 = k1.hadamard(&k1);
    report.push(g, "kappa1-kappa1-product", compact(&grid([[0, 0, 1], [0, 0, 1], [1, 1, 1]])), compact(&k11));
    report.push(g, "kappa1-kappa1-extremal", true, vertex_set.contains(k11.values()));
    report.push(g, "kappa1-kappa2-extremal", false, vertex_set.contains(k1.hadamard(&k2).values()));

    report.push(g, "facets", 184, d.inequalities.len());
    let coeffs_ok = d.inequalities.iter().all(|i| i.flat_alpha().iter().all(|a| (-1..=1).contains(a)));
    report.push(g, "facet-coefficients", true, coeffs_ok);
    let betas: BTreeSet<i64> = d.inequalities.iter().map(|i| i.beta).collect();
    report.push(g, "facet-bounds", "1/3/5", join(betas));
    let by_beta = |b: i64| d.inequalities.iter().filter(|i| i.beta == b).count();
    report.push(g, "facets-by-bound", "24/144/16", join([1, 3, 5].map(by_beta)));
    report.push(g, "orbit-sizes", "24/144/16", d.summary());
    let classes = correlation::class_sizes(&d.inequalities);
    let class_count = |c| classes.get(&Some(c)).copied().unwrap_or(0);
    report.push(
        g,
        "class-sizes",
        "24/144/16",
        join([InequalityClass::Trivial, InequalityClass::ClassI, InequalityClass::ClassII].map(class_count)),
    );
    let keys: BTreeSet<(Vec<i64>, i64)> = d.inequalities.iter().map(Inequality::key).collect();
    for (name, ineq) in named_inequalities() {
        report.push(g, &format!("contains-{name}"), true, keys.contains(&ineq.key()));
    }
    let ranks_ok = d.inequalities.iter().all(|i| correlation::tight_rank(i, &cv.vertices) == 9);
    report.push(g, "facet-tight-ranks", true, ranks_ok);
    report.push(g, "facets-irredundant", 0, dualdesc::concise_violations(d.correlation_h.rows()).len());
    report.push(g, "facets-valid", true, dualdesc::is_consistent(&d.correlation_h, &cv.vertices));
}

fn check_logic(ctx: &mut VerifyContext, report: &mut VerifyReport) {
    let g = "logic";
    let pm = Scenario::peres_mermin();
    let mut satisfying = 0;
    let mut five_only = 0;
    for a in pm.all_deterministic_assignments() {
        match pm.check_deterministic_assignment(&a).len() {
            0 => satisfying += 1,
            1 => five_only += 1,
            _ => {}
        }
    }
    let odd = pm.all_deterministic_assignments().all(|a| pm.check_deterministic_assignment(&a).len() % 2 == 1);
    report.push(g, "ks-solutions", 0, satisfying);
    report.push(g, "five-force-sixth-violation", true, odd && five_only > 0);
    report.push(g, "logical-sign-matrices", 16, pm.logically_possible_sign_matrices().len());

    let d = match ctx.derivation() {
        Ok(d) => d,
        Err(e) => return failed(report, g, e),
    };
    match correlation::verify_trivial_class(&d.inequalities, &pm) {
        Ok(t) => {
            report.push(g, "trivial-hold-on-logical", 24, t.trivial_checked);
            report.push(g, "nontrivial-violated-by-logical", 160, t.nontrivial_checked - t.insensitive.len());
        }
        Err(e) => report.push(g, "trivial-hold-on-logical", "ok", e),
    }
}

fn check_quantum(report: &mut VerifyReport) {
    let g = "quantum";
    let [_, _, (_, qvi1), (_, qvi2)] = named_inequalities();
    let ones = quantum::correlations(&DepolarizingStrength::ideal());
    match ones {
        Ok(ones) => {
            report.push(g, "ideal-correlations", compact(&grid([[1; 3]; 3])), compact(&ones));
            report.push(g, "ideal-QVI1", "5 > 3", eval_text(&qvi1, &ones));
            report.push(g, "ideal-QVI2", "9 > 5", eval_text(&qvi2, &ones));
        }
        Err(e) => report.push(g, "ideal-correlations", "ok", e),
    }
    let threshold = |i: &Inequality| quantum::noise_threshold(i).map_or("none".into(), |t| t.to_string());
    report.push(g, "threshold-QVI1", "3/5", threshold(&qvi1));
    report.push(g, "threshold-QVI2", "5/9", threshold(&qvi2));
    report.push(g, "threshold-QVI1-r-decimal", "0.77460", quantum::sqrt_decimal(&ratio(3, 5), 5));
    report.push(g, "threshold-QVI2-r-decimal", "0.74536", quantum::sqrt_decimal(&ratio(5, 9), 5));
    let three_quarters = DepolarizingStrength::new(ratio(3, 4)).and_then(|r| quantum::correlations(&r));
    match three_quarters {
        Ok(w) => {
            let uniform = w.values().iter().all(|x| *x == ratio(9, 16));
            report.push(g, "r-3/4-correlations", "9/16 everywhere", if uniform { "9/16 everywhere".into() } else { compact(&w) });
            report.push(g, "r-3/4-QVI1", "45/16 <= 3", eval_text(&qvi1, &w));
            report.push(g, "r-3/4-QVI2", "81/16 > 5", eval_text(&qvi2, &w));
        }
        Err(e) => report.push(g, "r-3/4-correlations", "ok", e),
    }
    let pm = Scenario::peres_mermin();
    report.push(g, "cabello-identities", 6, quantum::cabello_r(&pm, &CabelloSource::CompatibilityIdentities));
    let scored: Vec<(Rational, DeterministicAssignment)> = pm
        .all_deterministic_assignments()
        .map(|a| (quantum::cabello_r(&pm, &CabelloSource::Deterministic(a.clone())), a))
        .collect();
    let max = scored.iter().map(|(r, _)| r.clone()).max().unwrap_or_else(|| rat(0));
    report.push(g, "cabello-deterministic-max", 4, &max);
    let valid = scored.iter().filter(|(_, a)| pm.check_deterministic_assignment(a).is_empty()).count();
    report.push(g, "cabello-valid-assignments", 0, valid);
}

fn eval_text(ineq: &Inequality, w: &CorrelationPoint) -> String {
    let (value, violated) = correlation::evaluate(ineq, w);
    format!("{value} {} {}", if violated { ">" } else { "<=" }, ineq.beta)
}

/// A random full-dimensional polytope: a box `[-k, k]^d` cut by random
/// halfspaces that keep the origin interior, reduced to its facets.
pub fn random_polytope(rng: &mut impl Rng, d: usize, max_facets: usize) -> HRep {
    loop {
        let k: i64 = rng.gen_range(1..=3);
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for i in 0..d {
            for s in [1, -1] {
                let mut r = vec![0; d + 1];
                r[0] = k;
                r[i + 1] = s;
                rows.push(r);
            }
        }
        let cuts = rng.gen_range(0..=max_facets.saturating_sub(2 * d));
        for _ in 0..cuts {
            let mut r = vec![rng.gen_range(1..=4)];
            r.extend((0..d).map(|_| rng.gen_range(-2..=2)));
            if r[1..].iter().any(|&c| c != 0) {
                rows.push(r);
            }
        }
        let h = HRep::from_i64_rows(d, &rows).expect("nonzero rows");
        let h = dualdesc::remove_redundant_inequalities(&h).expect("origin is interior");
        if h.len() <= max_facets {
            return h;
        }
    }
}

fn check_roundtrip(report: &mut VerifyReport) {
    let g = "roundtrip";
    let h = Scenario::peres_mermin().build_assignment_polytope(AssignmentRole::Measurement);
    report.push(g, "assignment-h-v-h", true, dualdesc::roundtrip_check(&h).unwrap_or(false));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut roundtrips = 0;
    let mut oracle = 0;
    let total = 25;
    for n in 0..total {
        let d = 1 + n % 4;
        let h = random_polytope(&mut rng, d, 12);
        if dualdesc::roundtrip_check(&h).unwrap_or(false) {
            roundtrips += 1;
        }
        match (dualdesc::facets_to_vertices(&h), dualdesc::vertices_by_subsets(&h)) {
            (Ok(a), Ok(b)) if a == b => oracle += 1,
            _ => {}
        }
    }
    report.push(g, "random-h-v-h", total, roundtrips);
    report.push(g, "random-vertex-oracle", total, oracle);
}

fn check_symmetry(ctx: &mut VerifyContext, report: &mut VerifyReport) {
    let g = "symmetry";
    let explicit = symmetry::enumerate_explicit_group();
    let induced = explicit.induced_correlation_group();
    let d = match ctx.derivation() {
        Ok(d) => d,
        Err(e) => return failed(report, g, e),
    };
    let order = |x: &Option<SymmetryGroup>| x.as_ref().map_or(0, SymmetryGroup::order);
    report.push(g, "assignment-group-order", 1152, order(&d.assignment_group));
    report.push(g, "correlation-group-order", 1152, order(&d.correlation_group));
    report.push(g, "explicit-elements", 1152, induced.order());
    report.push(g, "explicit-sign-sets-agree", true, explicit.ds_agree());
    report.push(g, "explicit-class-sizes", "12/24/36", join([explicit.p_a.len(), explicit.p_b.len(), explicit.p_c.len()]));
    // Literal readings of the permutation families, kept for the record.
    report.push(g, "literal-pc-column3-to-row", 0, explicit.literal_pc_to_row);
    report.push(g, "literal-pb-size", 12, explicit.literal_pb_len);
    report.push(g, "closure-equals-explicit", true, d.correlation_group.as_ref() == Some(&induced));
    let preserves = |grp: &SymmetryGroup| {
        grp.elements().iter().all(|e| symmetry::preserves_hrep(&d.correlation_h, e))
    };
    report.push(g, "closure-preserves-facets", true, d.correlation_group.as_ref().is_some_and(preserves));
    report.push(g, "explicit-preserves-facets", true, preserves(&induced));
}

fn check_facet_file(ctx: &mut VerifyContext, path: &Path, report: &mut VerifyReport) {
    let g = "files";
    let d = match ctx.derivation() {
        Ok(d) => d.correlation_h.clone(),
        Err(e) => return failed(report, g, e),
    };
    let computed = match read(path).map_err(|e| e.to_string()).and_then(|t| io::parse_polytope(&t).map_err(|e| e.to_string())) {
        Ok(Polytope::H(h)) if h == d => "match".to_string(),
        Ok(Polytope::H(h)) => {
            let derived: BTreeSet<&HomogeneousVector> = d.rows().iter().collect();
            let found: BTreeSet<&HomogeneousVector> = h.rows().iter().collect();
            format!(
                "{} rows, {} missing, {} unexpected",
                h.len(),
                derived.difference(&found).count(),
                found.difference(&derived).count()
            )
        }
        Ok(Polytope::V(_)) => "a V file".to_string(),
        Err(e) => e,
    };
    report.push(g, "facet-file", "match", computed);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_scenario() -> Scenario {
        // A single row context on a 1x3 grid.
        Scenario::from_json(r#"{"name":"one-row","rows":1,"cols":3,"contexts":[{"cells":[[1,1],[1,2],[1,3]],"parity":1}]}"#)
            .unwrap()
    }

    #[test]
    fn small_scenario_derivation() {
        let d = derive(&small_scenario()).unwrap();
        // The tetrahedron with vertices at the even-parity sign vectors.
        assert_eq!(d.correlation.assignment.len(), 4);
        assert!(d.assignment_group.is_none() && d.correlation_group.is_none());
        assert!(d.inequalities.iter().all(|i| i.orbit.is_some()));
        let artifact = Artifact::build(&d, Some(&DepolarizingStrength::ideal())).unwrap();
        assert!(artifact.quantum.is_none());
        let text = serde_json::to_string(&artifact).unwrap();
        assert_eq!(serde_json::from_str::<Artifact>(&text).unwrap(), artifact);
    }

    #[test]
    fn artifact_roundtrip_and_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig {
            scenario: Scenario::peres_mermin(),
            out: dir.path().to_path_buf(),
            r: DepolarizingStrength::parse("9/10").unwrap(),
            verify: false,
        };
        let outcome = run_pipeline(&config).unwrap();
        assert_eq!(outcome.exit_code(), 0);
        assert_eq!(outcome.derivation.summary(), "24/144/16");
        for name in ARTIFACT_FILES {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let text = read(&dir.path().join("artifact.json")).unwrap();
        let parsed: Artifact = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, outcome.artifact);
        let q = parsed.quantum.unwrap();
        assert_eq!(q.r2, ratio(81, 100));
        assert!(q.omegas.iter().flatten().all(|w| *w == ratio(81, 100)));
        // Uniform positive correlations violate exactly the inequalities with sum(alpha) > beta.
        let expected = parsed.inequalities.iter().filter(|i| i.flat_alpha().iter().sum::<i64>() * 81 > i.beta * 100).count();
        assert_eq!(q.violations.len(), expected);

        let Polytope::H(h) = io::parse_polytope(&read(&dir.path().join("correlation.hrep")).unwrap()).unwrap() else {
            panic!("expected H")
        };
        assert_eq!(h.len(), 184);

        let mut ctx = VerifyContext::with_derivation(outcome.derivation.clone());
        ctx.facet_file = Some(dir.path().join("correlation.hrep"));
        let report = verify_with(&mut ctx, &VerifyOptions { only: vec!["quantum".into()] });
        assert!(report.passed());
        assert!(report.entries.iter().all(|e| e.group == "quantum" || e.name == "facet-file"));

        // Drop one facet row and fix up the header: a named mismatch.
        let text = read(&dir.path().join("correlation.hrep")).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1] = "183 10";
        lines.remove(2);
        write(&dir.path().join("bad.hrep"), &lines.join("\n")).unwrap();
        ctx.facet_file = Some(dir.path().join("bad.hrep"));
        let report = verify_with(&mut ctx, &VerifyOptions { only: vec!["logic".into()] });
        let failures = report.failures();
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].name, "facet-file");
        assert_eq!(failures[0].computed, "183 rows, 1 missing, 0 unexpected");
    }

    #[test]
    fn random_polytopes_are_small_and_irredundant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=4 {
            let h = random_polytope(&mut rng, d, 12);
            assert!(h.len() <= 12 && h.len() > d);
            assert!(dualdesc::concise_violations(h.rows()).is_empty());
        }
    }

    #[test]
    fn convert_square() {
        let Polytope::H(h) = io::parse_polytope("H\n4 3\n1 1 0\n1 -1 0\n1 0 1\n1 0 -1\n").unwrap() else { panic!() };
        let Polytope::V(v) = convert(&Polytope::H(h.clone())).unwrap() else { panic!() };
        assert_eq!(v.len(), 4);
        assert_eq!(convert(&Polytope::V(v)).unwrap(), Polytope::H(h));
    }

    #[test]
    fn scenario_loading() {
        assert_eq!(load_scenario("peres-mermin").unwrap(), Scenario::peres_mermin());
        assert!(matches!(load_scenario("/nonexistent/file.json"), Err(PipelineError::Io { .. })));
    }
}
