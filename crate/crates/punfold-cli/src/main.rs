//! Command-line front end: generators, structural reports, unfoldings,
//! coloring extensions, odd-subcomplex planning and the cover builder, all
//! speaking the canonical JSON formats.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use punfold::coloring::{colored_cone_ball, extend_coloring, ExtendOptions};
use punfold::complex::{
    cone, find_shelling, find_shelling_from, generate, polygon, verify_shelling, Face,
    GeneratorKind, SimplicialComplex, VertexId,
};
use punfold::cover::{
    build_cover, check_color_equivalence, complement_presentation,
    find_transposition_representation, BuildOutput, Correspondence, MonodromyOracle,
    ReferenceOracle, TrivialOracle,
};
use punfold::io::{digest, read_complex, read_script, ComplexFile, ScriptFile};
use punfold::planner::{plan_make_odd, search_cycle_plan, CycleSearchSpec};
use punfold::projectivity::{odd_subcomplex, projectivity_group};
use punfold::subdivision::{apply_script, CarrierMap};
use punfold::unfolding::{components, is_simplicial, partial_unfold, resolve, verify_cover};

#[derive(Parser)]
#[command(name = "punfold", version, about = "Simplicial branched covers via the partial unfolding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write a machine-readable run report (command, input digests, outputs,
    /// timing) to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct OutArg {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a canonical example complex.
    Gen {
        /// boundary-simplex | cross-polytope | cyclic | starred-simplex | polygon | cone
        #[arg(long)]
        kind: String,
        /// Dimension parameter (sphere dimension; polytope dimension for cyclic).
        #[arg(long)]
        d: Option<usize>,
        /// Number of vertices (cyclic, polygon).
        #[arg(long)]
        n: Option<usize>,
        /// Input complex (cone).
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Print the f-vector and Euler characteristic.
    Fvector {
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Find a shelling, or verify one given with --order.
    Shelling {
        input: PathBuf,
        /// Comma-separated facet indices to verify instead of searching.
        #[arg(long)]
        order: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// The odd subcomplex.
    Odd {
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// The group of projectivities.
    Group {
        input: PathBuf,
        /// Base facet index.
        #[arg(long, default_value_t = 0)]
        base: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// The partial unfolding: component summary and branching set.
    Unfold {
        input: PathBuf,
        /// Also write the barycentric resolution to this complex file.
        #[arg(long)]
        resolve: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Extend a colored induced subcomplex to a colored refinement.
    ExtendColoring {
        input: PathBuf,
        /// The induced subcomplex, carrying its coloring in attrs.colors.
        #[arg(long)]
        sub: PathBuf,
        /// Number of colors of the input coloring.
        #[arg(short)]
        k: usize,
        /// Pre-subdivide edges that break inducedness.
        #[arg(long)]
        pre_subdivide: bool,
        /// Greedily color the free vertices first.
        #[arg(long)]
        greedy: bool,
        /// Treat the input as a sphere and extend over its cone.
        #[arg(long)]
        cone: bool,
        #[arg(long)]
        script_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Plan stellar edge subdivisions making a target the odd subcomplex.
    MakeOdd {
        input: PathBuf,
        /// Target codimension-2 faces, as a complex file.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Search the 1-skeleton for a cycle of this length instead.
        #[arg(long)]
        search_cycle: Option<usize>,
        #[arg(long, default_value_t = 10)]
        max_edges: usize,
        /// Require this projectivity group order on the refined complex.
        #[arg(long)]
        want_group_order: Option<usize>,
        /// Require these sorted orbit sizes, comma separated.
        #[arg(long)]
        want_orbits: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        script_out: Option<PathBuf>,
        /// Write the refined complex here.
        #[arg(long)]
        complex_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the shelling-driven cover construction.
    BuildCover {
        input: PathBuf,
        /// Branching faces, as a complex file of codimension-2 faces.
        #[arg(long)]
        branching: Option<PathBuf>,
        /// Oracle spec: {"kind":"trivial"} | {"kind":"reference","complex":f,
        /// "base":idx,"iota":[..]} | {"kind":"representation","orbit_sizes":[..]}
        #[arg(long)]
        oracle: String,
        /// Base facet index; the shelling is seeded there.
        #[arg(long, default_value_t = 0)]
        sigma0: usize,
        /// Base bijection: comma-separated vertices of σ0 in color order.
        #[arg(long)]
        iota: Option<String>,
        #[arg(long)]
        script_out: Option<PathBuf>,
        #[arg(long)]
        cert_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Check color equivalence of a complex and a refinement of it.
    CheckEquiv {
        base: PathBuf,
        refined: PathBuf,
        /// Script refining base into refined; identity correspondence when
        /// omitted and the complexes are equal.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Compare unfolding statistics only.
        #[arg(long)]
        stats_only: bool,
        #[arg(long, default_value_t = 0)]
        base_facet: usize,
        #[arg(long)]
        refined_facet: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
}

struct Report {
    command: String,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    started: Instant,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    fn input(&mut self, path: &Path) {
        if let Ok(bytes) = std::fs::read(path) {
            self.inputs.insert(path.display().to_string(), digest(&bytes));
        }
    }

    fn output(&mut self, path: &Option<PathBuf>) {
        if let Some(p) = path {
            self.outputs.push(p.display().to_string());
        }
    }

    fn write(&self, path: &Path) -> Result<()> {
        let value = json!({
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "elapsed_ms": self.started.elapsed().as_millis() as u64,
        });
        std::fs::write(path, format!("{value}\n"))?;
        Ok(())
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            let msg = json!({"error": format!("{e:#}")});
            eprintln!("{msg}");
            std::process::exit(1);
        }
    }
}

fn emit(out: &OutArg, value: &Value) -> Result<()> {
    let text = format!("{value}\n");
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_complex(path: &Option<PathBuf>, file: &ComplexFile) -> Result<()> {
    let text = file.to_canonical_string();
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn faces_value(faces: &BTreeSet<Face>) -> Value {
    Value::from(faces.iter().map(|f| Value::from(f.vertices().to_vec())).collect::<Vec<_>>())
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| anyhow!("bad number {x:?}")))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let mut report = Report::new(&std::env::args().skip(1).collect::<Vec<_>>().join(" "));
    match cli.command {
        Command::Gen { kind, d, n, input, out } => {
            let complex = match kind.as_str() {
                "boundary-simplex" => {
                    generate(&GeneratorKind::BoundarySimplex { d: need(d, "--d")? })?
                }
                "cross-polytope" => {
                    generate(&GeneratorKind::CrossPolytope { d: need(d, "--d")? })?
                }
                "cyclic" => generate(&GeneratorKind::CyclicSphere {
                    polytope_dim: need(d, "--d")?,
                    n: need(n, "--n")?,
                })?,
                "starred-simplex" => {
                    generate(&GeneratorKind::StarredSimplex { d: need(d, "--d")? })?
                }
                "polygon" => polygon(need(n, "--n")?)?,
                "cone" => {
                    let path = input.as_ref().ok_or_else(|| anyhow!("cone needs --input"))?;
                    report.input(path);
                    let (base, _) = read_complex(path)?;
                    cone(&base)?
                }
                other => bail!("unknown generator kind {other:?}"),
            };
            emit_complex(&out.out, &ComplexFile::from_complex(&complex))?;
            report.output(&out.out);
        }
        Command::Fvector { input, out } => {
            report.input(&input);
            let (complex, _) = read_complex(&input)?;
            emit(
                &out,
                &json!({
                    "f_vector": complex.f_vector(),
                    "euler": complex.euler_characteristic(),
                }),
            )?;
        }
        Command::Shelling { input, order, out } => {
            report.input(&input);
            let (complex, _) = read_complex(&input)?;
            let value = match order {
                Some(text) => {
                    let order = parse_usize_list(&text)?;
                    match verify_shelling(&complex, &order)? {
                        Ok(prefix) => json!({
                            "order": prefix.order,
                            "restriction_sets": prefix.restriction_sets,
                        }),
                        Err(v) => {
                            let value = json!({
                                "violation": {
                                    "index": v.index,
                                    "intersection": v.intersection.iter()
                                        .map(|f| f.vertices().to_vec()).collect::<Vec<_>>(),
                                }
                            });
                            emit(&out, &value)?;
                            bail!("order is not a shelling (step {})", v.index);
                        }
                    }
                }
                None => match find_shelling(&complex) {
                    Some(order) => {
                        let prefix =
                            verify_shelling(&complex, &order)?.expect("found shellings verify");
                        json!({
                            "order": prefix.order,
                            "restriction_sets": prefix.restriction_sets,
                        })
                    }
                    None => {
                        emit(&out, &json!({"shellable": false}))?;
                        bail!("complex is not shellable");
                    }
                },
            };
            emit(&out, &value)?;
        }
        Command::Odd { input, out } => {
            report.input(&input);
            let (complex, _) = read_complex(&input)?;
            let odd = odd_subcomplex(&complex)?;
            emit(&out, &json!({ "odd_faces": faces_value(&odd.odd_faces) }))?;
        }
        Command::Group { input, base, out } => {
            report.input(&input);
            let (complex, _) = read_complex(&input)?;
            let group = projectivity_group(&complex, base)?;
            let generators: Vec<Value> = group
                .generators
                .iter()
                .map(|(path, bij)| {
                    json!({
                        "path": path.0.iter()
                            .map(|i| complex.facet(*i).vertices().to_vec()).collect::<Vec<_>>(),
                        "perm": bij.nontrivial_cycles(),
                    })
                })
                .collect();
            emit(
                &out,
                &json!({
                    "base_facet": complex.facet(base).vertices().to_vec(),
                    "order": group.order(),
                    "orbits": group.orbits(),
                    "generators": generators,
                }),
            )?;
        }
        Command::Unfold { input, resolve: resolve_out, out } => {
            report.input(&input);
            let (complex, _) = read_complex(&input)?;
            let unfolding = partial_unfold(&complex)?;
            let comps = components(&unfolding);
            let cover = verify_cover(&unfolding);
            let value = json!({
                "components": comps.components.iter().map(|c| json!({
                    "cells": c.cells,
                    "facets_per_base": c.cells_per_facet,
                    "euler": c.euler,
                    "simplicial": c.simplicial,
                })).collect::<Vec<_>>(),
                "branching": faces_value(&cover.branching),
                "simplicial": is_simplicial(&unfolding).is_simplicial(),
                "cover_ok": cover.passed(),
            });
            if let Some(path) = &resolve_out {
                let resolved = resolve(&unfolding);
                emit_complex(&Some(path.clone()), &ComplexFile::from_complex(&resolved.complex))?;
                report.outputs.push(path.display().to_string());
            }
            emit(&out, &value)?;
        }
        Command::ExtendColoring {
            input,
            sub,
            k,
            pre_subdivide,
            greedy,
            cone: as_cone,
            script_out,
            out,
        } => {
            report.input(&input);
            report.input(&sub);
            let (complex, _) = read_complex(&input)?;
            let (sub_complex, sub_file) = read_complex(&sub)?;
            let coloring = sub_file
                .coloring()?
                .ok_or_else(|| anyhow!("subcomplex file carries no attrs.colors"))?;
            let options =
                ExtendOptions { pre_subdivide_non_induced: pre_subdivide, greedy_precolor: greedy };
            let (refined, out_coloring, script) = if as_cone {
                let ball = colored_cone_ball(&complex, &coloring, k, options)?;
                (ball.ball, ball.coloring, ball.script)
            } else {
                let ext = extend_coloring(&complex, &sub_complex, &coloring, k, options)?;
                (ext.complex, ext.coloring, ext.script)
            };
            let file = ComplexFile::from_complex(&refined).with_coloring(&out_coloring);
            emit_complex(&out.out, &file)?;
            if let Some(path) = &script_out {
                punfold::io::write_script(
                    path,
                    &ScriptFile::new(Value::String(input.display().to_string()), &script),
                )?;
                report.outputs.push(path.display().to_string());
            }
            report.output(&out.out);
        }
        Command::MakeOdd {
            input,
            target,
            search_cycle,
            max_edges,
            want_group_order,
            want_orbits,
            seed,
            script_out,
            complex_out,
            out,
        } => {
            report.input(&input);
            let (complex, _) = read_complex(&input)?;
            let (plan, summary) = match (target, search_cycle) {
                (Some(path), None) => {
                    report.input(&path);
                    let (target_complex, _) = read_complex(&path)?;
                    let faces: BTreeSet<Face> = target_complex.facets().iter().cloned().collect();
                    let plan = plan_make_odd(&complex, &faces)?;
                    (plan, json!({"target_faces": faces_value(&faces)}))
                }
                (None, Some(len)) => {
                    let spec = CycleSearchSpec {
                        cycle_len: len,
                        max_script_edges: max_edges,
                        single_closed_curve: true,
                        group_order: want_group_order,
                        orbit_sizes: want_orbits.as_deref().map(parse_usize_list).transpose()?,
                        seed,
                    };
                    let found = search_cycle_plan(&complex, &spec)?;
                    let summary = json!({
                        "cycle": found.cycle,
                        "group_order": found.group_order,
                        "orbit_sizes": found.orbit_sizes,
                        "candidates_tried": found.candidates_tried,
                    });
                    (found.plan, summary)
                }
                _ => bail!("make-odd needs exactly one of --target or --search-cycle"),
            };
            let mut value = json!({
                "script": plan.script.steps,
                "refined_target": faces_value(&plan.refined_target),
                "f_vector": plan.refined.f_vector(),
            });
            value.as_object_mut().unwrap().extend(summary.as_object().unwrap().clone());
            emit(&out, &value)?;
            if let Some(path) = &complex_out {
                emit_complex(&Some(path.clone()), &ComplexFile::from_complex(&plan.refined))?;
                report.outputs.push(path.display().to_string());
            }
            if let Some(path) = &script_out {
                punfold::io::write_script(
                    path,
                    &ScriptFile::new(Value::String(input.display().to_string()), &plan.script),
                )?;
                report.outputs.push(path.display().to_string());
            }
        }
        Command::BuildCover {
            input,
            branching,
            oracle,
            sigma0,
            iota,
            script_out,
            cert_out,
            out,
        } => {
            report.input(&input);
            let (complex, _) = read_complex(&input)?;
            let branching_faces: BTreeSet<Face> = match &branching {
                Some(path) => {
                    report.input(path);
                    let (b, _) = read_complex(path)?;
                    b.facets().iter().cloned().collect()
                }
                None => BTreeSet::new(),
            };
            let spec: Value = if let Some(path) = oracle.strip_prefix('@') {
                serde_json::from_str(&std::fs::read_to_string(path)?)?
            } else {
                serde_json::from_str(&oracle)?
            };
            let oracle = build_oracle(&complex, &branching_faces, &spec)?;
            let shelling = find_shelling_from(&complex, Some(sigma0))
                .ok_or_else(|| anyhow!("input complex is not shellable"))?;
            let iota: Vec<VertexId> = match iota {
                Some(text) => text
                    .split(',')
                    .map(|x| x.trim().parse::<VertexId>().map_err(|_| anyhow!("bad iota")))
                    .collect::<Result<_>>()?,
                None => {
                    let candidates = punfold::cover::compatible_base_bijections(
                        &complex,
                        sigma0,
                        oracle.as_ref(),
                    )?;
                    candidates
                        .into_iter()
                        .next()
                        .ok_or_else(|| anyhow!("no base bijection is compatible with the oracle"))?
                }
            };
            let built: BuildOutput =
                build_cover(&complex, &shelling, &branching_faces, oracle.as_ref(), sigma0, iota)?;
            emit_complex(&out.out, &ComplexFile::from_complex(&built.sphere))?;
            report.output(&out.out);
            if let Some(path) = &script_out {
                punfold::io::write_script(
                    path,
                    &ScriptFile::new(Value::String(input.display().to_string()), &built.script),
                )?;
                report.outputs.push(path.display().to_string());
            }
            if let Some(path) = &cert_out {
                let cert = &built.certificate;
                let value = json!({
                    "steps": cert.steps.iter().map(|s| json!({
                        "facet": s.facet,
                        "case": format!("{:?}", s.case),
                        "subdivided": s.subdivided.iter().map(|(e, v, c)| json!({
                            "edge": e, "new": v, "color": c,
                        })).collect::<Vec<_>>(),
                        "closed_faces": s.closed_faces,
                        "loop_checks": s.loop_checks,
                    })).collect::<Vec<_>>(),
                    "coloring": cert.coloring.iter()
                        .map(|(v, c)| (v.to_string(), *c)).collect::<BTreeMap<_, _>>(),
                    "total_loop_checks": cert.total_loop_checks,
                    "shelling": built.shelling,
                });
                std::fs::write(path, format!("{value}\n"))?;
                report.outputs.push(path.display().to_string());
            }
        }
        Command::CheckEquiv {
            base,
            refined,
            script,
            stats_only,
            base_facet,
            refined_facet,
            out,
        } => {
            report.input(&base);
            report.input(&refined);
            let (base_complex, _) = read_complex(&base)?;
            let (refined_complex, _) = read_complex(&refined)?;
            let correspondence = if stats_only {
                Correspondence::StatisticsOnly
            } else {
                let carrier = match &script {
                    Some(path) => {
                        report.input(path);
                        let script_file = read_script(path)?;
                        let (replayed, carrier) =
                            apply_script(&base_complex, &script_file.script())?;
                        if replayed != refined_complex {
                            bail!("script does not replay the base into the refined complex");
                        }
                        carrier
                    }
                    None => {
                        if base_complex != refined_complex {
                            bail!("without --script the complexes must be equal");
                        }
                        CarrierMap::identity(&base_complex)
                    }
                };
                Correspondence::Refinement(carrier)
            };
            let refined_facet = match refined_facet {
                Some(i) => i,
                None => match &correspondence {
                    Correspondence::Refinement(c) => c
                        .facet_carrier
                        .iter()
                        .position(|&b| b == base_facet)
                        .ok_or_else(|| anyhow!("no refined facet over the base facet"))?,
                    Correspondence::StatisticsOnly => 0,
                },
            };
            // ψ defaults to the identity on the shared base facet
            let psi: BTreeMap<VertexId, VertexId> = refined_complex
                .facet(refined_facet)
                .vertices()
                .iter()
                .map(|v| (*v, *v))
                .collect();
            let eq = check_color_equivalence(
                &base_complex,
                &refined_complex,
                &correspondence,
                base_facet,
                refined_facet,
                &psi,
            )?;
            emit(
                &out,
                &json!({
                    "passed": eq.passed(),
                    "cycles_checked": eq.cycles_checked,
                    "mismatches": eq.mismatches,
                    "statistics_equal": eq.statistics_equal,
                    "orbit_sizes": [eq.orbit_sizes.0, eq.orbit_sizes.1],
                }),
            )?;
            if !eq.passed() {
                bail!("complexes are not color equivalent");
            }
        }
    }
    if let Some(path) = &cli.report {
        report.write(path)?;
    }
    Ok(())
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("missing {flag}"))
}

fn build_oracle(
    complex: &SimplicialComplex,
    branching: &BTreeSet<Face>,
    spec: &Value,
) -> Result<Box<dyn MonodromyOracle>> {
    let kind = spec
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| anyhow!("oracle spec needs a \"kind\""))?;
    match kind {
        "trivial" => Ok(Box::new(TrivialOracle::new(complex.dim() + 1))),
        "reference" => {
            let path = spec
                .get("complex")
                .and_then(|v| v.as_str())
                .ok_or_else(|| anyhow!("reference oracle needs \"complex\""))?;
            let (kref, _) = read_complex(Path::new(path))?;
            let base = match spec.get("base") {
                Some(Value::Number(n)) => n.as_u64().ok_or_else(|| anyhow!("bad base"))? as usize,
                Some(Value::Array(vs)) => {
                    let verts: Vec<VertexId> = vs
                        .iter()
                        .map(|v| v.as_u64().map(|x| x as VertexId))
                        .collect::<Option<_>>()
                        .ok_or_else(|| anyhow!("bad base facet"))?;
                    kref.facet_index(&Face::new(verts))
                        .ok_or_else(|| anyhow!("base facet not found"))?
                }
                _ => 0,
            };
            let iota: Vec<VertexId> = spec
                .get("iota")
                .and_then(|v| v.as_array())
                .and_then(|vs| {
                    vs.iter()
                        .map(|v| v.as_u64().map(|x| x as VertexId))
                        .collect::<Option<Vec<_>>>()
                })
                .unwrap_or_else(|| kref.facet(base).vertices().to_vec());
            Ok(Box::new(ReferenceOracle::new(kref, base, iota)))
        }
        "representation" => {
            let orbit_sizes: Option<Vec<usize>> = spec
                .get("orbit_sizes")
                .and_then(|v| v.as_array())
                .map(|vs| vs.iter().filter_map(|x| x.as_u64().map(|u| u as usize)).collect());
            let presentation = complement_presentation(complex, branching)?;
            let oracle = find_transposition_representation(
                complex,
                &presentation,
                complex.dim() + 1,
                orbit_sizes.as_deref(),
            )?;
            Ok(Box::new(oracle))
        }
        other => bail!("unknown oracle kind {other:?}"),
    }
}
