use crate::config::{CloudSource, RunConfig};
use anyhow::{bail, Context, Result};
use hrect::carleson::{carleson_report, dichotomy_experiment, increments_csv};
use hrect::cloud::{cantor_vertical, christ_cubes_with, cloud_from_polyline, dyadic_net, regularity_profile, CubeTree, PointCloud};
use hrect::coeff::{compute_field, fields_to_csv, CoeffKind, Exponent, Family};
use hrect::corona::{
    build_forest, classify_trees, extract_graph, good_cubes, packing_report, verify_forest, verify_pc, ForestExport, GraphExtraction,
};
use hrect::curve::{juillet, CurveConfig};
use hrect::hgroup::HPoint;
use hrect::Exec;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Collects output files in order and writes the manifest last.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

#[derive(Serialize)]
struct FileEntry {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    library_version: &'static str,
    subcommand: &'a str,
    config_sha256: String,
    seed: u64,
    config: &'a RunConfig,
    inputs: Vec<FileEntry>,
    files: &'a [FileEntry],
}

fn entry(path: String, bytes: &[u8]) -> FileEntry {
    FileEntry { path, bytes: bytes.len(), sha256: hex::encode(Sha256::digest(bytes)) }
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let bytes = contents.as_ref();
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(entry(name.to_string(), bytes));
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn finish(self, subcommand: &str, cfg: &RunConfig) -> Result<()> {
        let mut inputs = Vec::new();
        if cfg.cloud.source == CloudSource::File {
            if let Some(p) = &cfg.io.cloud {
                let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
                inputs.push(entry(p.display().to_string(), &bytes));
            }
        }
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            library_version: hrect::VERSION,
            subcommand,
            config_sha256: cfg.hash(),
            seed: cfg.seed,
            config: cfg,
            inputs,
            files: &self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}

pub fn build_cloud(cfg: &RunConfig) -> Result<PointCloud> {
    let cloud = match cfg.cloud.source {
        CloudSource::Juillet => {
            let g = cfg.curve.generations;
            let curve = CurveConfig::new(cfg.curve.c0, g.max(1))?;
            let gamma = juillet(&curve, g)?;
            cloud_from_polyline(&gamma, cfg.cloud.step.unwrap_or_else(|| curve.segment_length(g)))?
        }
        CloudSource::Segment => {
            let m = cfg.cloud.points;
            let pts = (0..m).map(|i| HPoint::h1(i as f64 / (m - 1) as f64, 0.0, 0.0)).collect();
            let mut w = vec![1.0 / (m - 1) as f64; m];
            w[0] *= 0.5;
            w[m - 1] *= 0.5;
            PointCloud::new(pts, w, 1.0 / (m - 1) as f64)?
        }
        CloudSource::Cantor => cantor_vertical(cfg.cloud.levels)?,
        CloudSource::File => {
            let path = cfg.io.cloud.as_ref().expect("validated");
            let text = std::fs::read_to_string(path).with_context(|| format!("reading cloud {}", path.display()))?;
            PointCloud::from_text(&text).with_context(|| format!("parsing cloud {}", path.display()))?
        }
    };
    if cloud.n() != cfg.n {
        bail!("cloud lives in H^{} but the config sets n = {}", cloud.n(), cfg.n);
    }
    Ok(cloud)
}

pub fn curve(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let g = cfg.curve.generations;
    let curve = CurveConfig::new(cfg.curve.c0, g.max(1))?;
    let gamma = juillet(&curve, g)?;
    out.write("curve.txt", gamma.export_text())?;
    let mut csv = String::from("generation,theta,segment_length,total_length\n");
    for n in 0..=g {
        let theta = if n == 0 { 0.0 } else { curve.theta(n) };
        let _ = writeln!(csv, "{n},{theta:.12e},{:.12e},{:.12e}", curve.segment_length(n), curve.total_length(n));
    }
    out.write("generations.csv", csv)?;
    #[derive(Serialize)]
    struct Summary {
        generation: usize,
        vertices: usize,
        length: f64,
        horizontality_defect: f64,
    }
    out.json(
        "curve.json",
        &Summary {
            generation: g,
            vertices: gamma.vertices().len(),
            length: gamma.length(),
            horizontality_defect: gamma.horizontality_defect(),
        },
    )
}

pub fn cloud(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let cloud = build_cloud(cfg)?;
    out.write("cloud.txt", cloud.to_text())?;
    let profile = regularity_profile(&cloud, cfg.k, cfg.cloud.trials, cfg.seed)?;
    out.json("regularity.json", &profile)
}

fn cubes_csv(tree: &CubeTree) -> String {
    let mut s = String::from("cube_id,generation,parent,center,size,mass,diam\n");
    for c in &tree.cubes {
        let parent = c.parent.map_or(String::new(), |p| p.to_string());
        let _ = writeln!(s, "{},{},{},{},{},{:.12e},{:.12e}", c.id, c.generation, parent, c.center, c.members.len(), c.mass, c.diam.value);
    }
    s
}

pub fn cubes(cfg: &RunConfig, out: &mut Outputs, exec: Exec) -> Result<()> {
    let cloud = build_cloud(cfg)?;
    let tree = christ_cubes_with(&cloud, cfg.cubes.rho, exec)?;
    out.write("cubes.csv", cubes_csv(&tree))?;
    #[derive(Serialize)]
    struct Report {
        cubes: usize,
        j0: i32,
        j_max: i32,
        d_constant: f64,
        d_two_sided: f64,
        check: hrect::cloud::CubeCheck,
        net: hrect::cloud::NetCheck,
    }
    let net = dyadic_net(&cloud);
    out.json(
        "cubes.json",
        &Report {
            cubes: tree.len(),
            j0: tree.j0,
            j_max: tree.j_max(),
            d_constant: tree.d_constant,
            d_two_sided: tree.d_two_sided,
            check: tree.verify(&cloud),
            net: net.verify(&cloud),
        },
    )
}

pub fn coeff(cfg: &RunConfig, out: &mut Outputs, exec: Exec) -> Result<()> {
    let cloud = build_cloud(cfg)?;
    let tree = christ_cubes_with(&cloud, cfg.cubes.rho, exec)?;
    let fields = compute_field(&tree, &cloud, &cfg.kinds(), cfg.cubes.lambda, &cfg.fit_options(), exec)?;
    out.write("coeff.csv", fields_to_csv(&tree, &fields, cfg.n, cfg.k))
}

pub fn carleson(cfg: &RunConfig, out: &mut Outputs, exec: Exec, experiment: Option<&str>, generations: Option<usize>) -> Result<()> {
    match experiment {
        Some("dichotomy") => {
            let report = dichotomy_experiment(&cfg.dichotomy(generations.unwrap_or(cfg.curve.generations)), exec)?;
            out.write("dichotomy_beta_sq.csv", increments_csv(&report.beta_sq))?;
            out.write("dichotomy_beta_hat_4.csv", increments_csv(&report.beta_hat_4))?;
            for row in &report.sensitivity {
                out.write(&format!("dichotomy_beta_sq_A{}.csv", row.a), increments_csv(&row.increments))?;
            }
            out.json("dichotomy.json", &report)
        }
        Some(other) => bail!("unknown experiment `{other}` (expected `dichotomy`)"),
        None => {
            let cloud = build_cloud(cfg)?;
            let tree = christ_cubes_with(&cloud, cfg.cubes.rho, exec)?;
            let fields = compute_field(&tree, &cloud, &cfg.kinds(), cfg.cubes.lambda, &cfg.fit_options(), exec)?;
            let root_gen = cfg.carleson.root_generation.unwrap_or(tree.j0);
            let mut reports = Vec::new();
            for field in &fields {
                let report = carleson_report(&tree, field, cfg.carleson.q, root_gen, exec)?;
                out.write(&format!("carleson_{}.csv", field.kind), increments_csv(&report.increments))?;
                reports.push(report);
            }
            out.json("carleson.json", &reports)
        }
    }
}

#[derive(Serialize)]
pub struct CoronaSummary {
    pub trees: usize,
    pub bad: usize,
    pub good: usize,
    pub failures: usize,
    pub unconverged: usize,
    pub forest_check: hrect::corona::ForestCheck,
    pub pc: Option<PcSummary>,
    pub graphs: Vec<GraphExtraction>,
    pub graph_errors: Vec<String>,
}

#[derive(Serialize)]
pub struct PcSummary {
    pub sampled: usize,
    pub checked: usize,
    pub worst_ratio: f64,
    pub bound: f64,
    pub passed: bool,
}

impl CoronaSummary {
    pub fn passed(&self) -> bool {
        self.forest_check.all()
            && self.pc.as_ref().is_none_or(|p| p.passed)
            && self.graph_errors.is_empty()
            && self.graphs.iter().all(|g| g.within_envelope())
    }
}

/// Builds the forest and runs every corona check, writing the forest
/// export and the sampled pairs.
pub fn run_corona(cfg: &RunConfig, cloud: &PointCloud, tree: &CubeTree, out: &mut Outputs, exec: Exec) -> Result<CoronaSummary> {
    let params = cfg.corona_params()?;
    let good = good_cubes(tree, cloud, &params, &cfg.fit_options(), exec)?;
    let mut forest = build_forest(tree, &good, &params);
    classify_trees(&mut forest, tree, cloud);
    let check = verify_forest(&forest, tree, &good);
    let beta_pi =
        compute_field(tree, cloud, &[CoeffKind::new(Family::BetaProjAffine, Exponent::One)], params.k0, &cfg.fit_options(), exec)?;
    let packing = packing_report(&forest, tree, cfg.k, Some(&beta_pi[0]))?;
    out.json("forest.json", &ForestExport { forest: &forest, packing: &packing, good: &good })?;

    let pc = if params.strict {
        let report = verify_pc(&forest, tree, cloud, cfg.corona.samples, cfg.seed, exec)?;
        out.write("pc_pairs.csv", report.to_csv())?;
        Some(PcSummary {
            sampled: report.sampled,
            checked: report.checked,
            worst_ratio: report.worst_ratio,
            bound: report.bound,
            passed: report.passed(),
        })
    } else {
        None
    };
    let mut graphs = Vec::new();
    let mut graph_errors = Vec::new();
    if pc.as_ref().is_some_and(|p| p.passed) {
        for t in 0..forest.trees.len() {
            match extract_graph(&forest, t, tree, cloud) {
                Ok(g) => graphs.push(g),
                Err(e) => graph_errors.push(format!("tree {t}: {e}")),
            }
        }
    }
    Ok(CoronaSummary {
        trees: forest.trees.len(),
        bad: forest.bad.len(),
        good: good.count(),
        failures: good.failures.len(),
        unconverged: good.unconverged,
        forest_check: check,
        pc,
        graphs,
        graph_errors,
    })
}

pub fn corona(cfg: &RunConfig, out: &mut Outputs, exec: Exec) -> Result<()> {
    let cloud = build_cloud(cfg)?;
    let tree = christ_cubes_with(&cloud, cfg.cubes.rho, exec)?;
    let summary = run_corona(cfg, &cloud, &tree, out, exec)?;
    out.json("corona.json", &summary)
}

#[derive(Serialize)]
struct Verification {
    cubes: hrect::cloud::CubeCheck,
    net: hrect::cloud::NetCheck,
    corona: CoronaSummary,
    passed: bool,
}

/// Returns whether every check passed.
pub fn verify(cfg: &RunConfig, out: &mut Outputs, exec: Exec) -> Result<bool> {
    let cloud = build_cloud(cfg)?;
    let tree = christ_cubes_with(&cloud, cfg.cubes.rho, exec)?;
    let cubes = tree.verify(&cloud);
    let net = dyadic_net(&cloud).verify(&cloud);
    let corona = run_corona(cfg, &cloud, &tree, out, exec)?;
    let passed = cubes.all() && net.all() && corona.passed();
    out.json("verify.json", &Verification { cubes, net, corona, passed })?;
    Ok(passed)
}
