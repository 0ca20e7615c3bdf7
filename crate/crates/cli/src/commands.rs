//! Subcommand implementations.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use hcf_core::circuit::{compile, CircuitJson, ComputationChain};
use hcf_core::grid::{line_pattern, orbit};
use hcf_core::oracle::{
    fht_line_labels, hough_line_labels, naive_sums, segment_reduction, verify_circuit,
};
use hcf_core::tree::{depth_bound, naive_cost, weight_bound, TreeJson};
use hcf_core::{Circuit, Ensemble, ImageDomain, ImageValues, Partition, PartitionTree};

use crate::io::read_image;

/// Raised when a self-check that should never fail does; mapped to exit 3.
#[derive(Debug)]
pub struct InternalInvariant(pub String);

impl std::fmt::Display for InternalInvariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "internal invariant violation: {}", self.0)
    }
}

impl std::error::Error for InternalInvariant {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Hough,
    Fht,
    Segment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Builder {
    Fixed,
    Greedy,
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub kind: Kind,
    pub w: u32,
    pub h: u32,
    pub elevations: u32,
    pub builder: Builder,
}

impl SynthSpec {
    /// Resolves the flag combination: hough takes -w/-h/-E (or -n as a
    /// square shorthand); fht and segment take -n.
    pub fn resolve(
        kind: Kind,
        w: Option<u32>,
        h: Option<u32>,
        elevations: Option<u32>,
        n: Option<u32>,
        builder: Builder,
    ) -> Result<Self> {
        match kind {
            Kind::Hough => {
                let (w, h, e) = match (w, h, elevations, n) {
                    (Some(w), Some(h), Some(e), None) => (w, h, e),
                    (None, None, None, Some(n)) => (n, n, n),
                    (w, h, e, Some(n)) => (w.unwrap_or(n), h.unwrap_or(n), e.unwrap_or(n)),
                    _ => bail!("--kind hough needs -w, -h and -E (or -n for a square setup)"),
                };
                Ok(SynthSpec {
                    kind,
                    w,
                    h,
                    elevations: e,
                    builder,
                })
            }
            Kind::Fht | Kind::Segment => {
                let n = n.ok_or_else(|| anyhow!("--kind {:?} needs -n", kind))?;
                if w.is_some() || h.is_some() || elevations.is_some() {
                    bail!("-w/-h/-E do not apply to this kind; use -n");
                }
                Ok(SynthSpec {
                    kind,
                    w: n,
                    h: n,
                    elevations: n,
                    builder,
                })
            }
        }
    }

    fn meta(&self) -> serde_json::Value {
        let builder = match self.builder {
            Builder::Fixed => "fixed",
            Builder::Greedy => "greedy",
        };
        match self.kind {
            Kind::Hough => json!({
                "kind": "hough", "w": self.w, "h": self.h,
                "elevations": self.elevations, "builder": builder,
            }),
            Kind::Fht => json!({"kind": "fht", "n": self.w, "builder": builder}),
            Kind::Segment => json!({"kind": "segment", "n": self.w, "builder": builder}),
        }
    }
}

pub struct SynthOutcome {
    pub circuit: Circuit,
    pub metrics: serde_json::Value,
    pub meta: serde_json::Value,
}

fn orbit_partitions(domain: ImageDomain, elevations: u32) -> Result<Vec<Partition>> {
    (0..elevations)
        .map(|e| Ok(Partition::new(orbit(&line_pattern(e, 0, domain)?))?))
        .collect()
}

fn build_tree(spec: &SynthSpec, domain: ImageDomain, elevations: u32) -> Result<PartitionTree> {
    let tree = match (spec.kind, spec.builder) {
        (Kind::Fht, Builder::Fixed) => PartitionTree::build_fht(spec.w)?,
        (Kind::Fht, Builder::Greedy) => {
            PartitionTree::build_greedy(hcf_core::oracle::fht_ensemble(spec.w)?)?
        }
        (_, Builder::Fixed) => PartitionTree::build_hough(domain, elevations)?,
        (_, Builder::Greedy) => {
            PartitionTree::build_greedy(orbit_partitions(domain, elevations)?)?
        }
    };
    // self-check before anything is written
    if tree.edge_weight_sum() != tree.closed_form_weight() {
        return Err(InternalInvariant(format!(
            "tree weight mismatch: edge sum {} vs closed form {}",
            tree.edge_weight_sum(),
            tree.closed_form_weight()
        ))
        .into());
    }
    Ok(tree)
}

pub fn synthesize(spec: &SynthSpec) -> Result<SynthOutcome> {
    let (domain, elevations) = match spec.kind {
        Kind::Hough | Kind::Fht => (ImageDomain::new(spec.w, spec.h)?, spec.elevations),
        Kind::Segment => (ImageDomain::new(spec.w, 2 * spec.h)?, spec.elevations),
    };
    let tree = build_tree(spec, domain, elevations)?;
    let metrics = tree.metrics()?;
    let chain = ComputationChain::of_tree(&tree)?;
    let mut circuit = compile(&chain)?;

    // label outputs by the family's (elevation, shift) pairs
    let labels: Vec<(String, hcf_core::Pattern)> = match spec.kind {
        Kind::Hough => hough_line_labels(domain, elevations)?,
        Kind::Fht => fht_line_labels(spec.w)?,
        Kind::Segment => segment_reduction(spec.w)?.cyclic_labels()?,
    };
    let mut key_of: HashMap<hcf_core::Pattern, String> = HashMap::new();
    for (key, pat) in labels {
        key_of.entry(pat).or_insert(key);
    }
    let out_patterns = circuit.output_patterns()?;
    let keys = out_patterns
        .iter()
        .map(|p| {
            key_of
                .get(p)
                .cloned()
                .ok_or_else(|| anyhow::Error::new(InternalInvariant("unlabeled circuit output".into())))
        })
        .collect::<Result<Vec<_>>>()?;
    circuit.set_output_keys(keys)?;

    let unpruned_size = circuit.size();
    if spec.kind == Kind::Segment {
        let red = segment_reduction(spec.w)?;
        circuit = circuit.prune(&red.zero_mask)?;
    }

    let metrics_json = json!({
        "tree_weight": metrics.weight,
        "circuit_size": circuit.size(),
        "circuit_depth": circuit.depth(),
        "eq27_rhs": weight_bound(domain, elevations),
        "naive_size": naive_cost(domain, elevations),
        "depth_bound": depth_bound(domain, elevations),
        "unpruned_size": if spec.kind == Kind::Segment { Some(unpruned_size) } else { None },
    });
    Ok(SynthOutcome {
        circuit,
        metrics: metrics_json,
        meta: spec.meta(),
    })
}

pub fn cmd_synth(spec: &SynthSpec, out: &Path, tree_out: Option<&Path>) -> Result<i32> {
    let outcome = synthesize(spec)?;
    let circuit_json = outcome.circuit.to_json(Some(outcome.meta));
    fs::write(out, serde_json::to_string_pretty(&circuit_json)?)
        .with_context(|| format!("writing {}", out.display()))?;
    let metrics_path = metrics_path_for(out);
    fs::write(
        &metrics_path,
        serde_json::to_string_pretty(&outcome.metrics)?,
    )
    .with_context(|| format!("writing {}", metrics_path.display()))?;
    if let Some(tree_path) = tree_out {
        let (domain, elevations) = match spec.kind {
            Kind::Hough | Kind::Fht => (ImageDomain::new(spec.w, spec.h)?, spec.elevations),
            Kind::Segment => (ImageDomain::new(spec.w, 2 * spec.h)?, spec.elevations),
        };
        let tree = build_tree(spec, domain, elevations)?;
        fs::write(tree_path, serde_json::to_string_pretty(&tree.to_json())?)
            .with_context(|| format!("writing {}", tree_path.display()))?;
    }
    println!(
        "synthesized {} adders (depth {}) -> {}",
        outcome.circuit.size(),
        outcome.circuit.depth(),
        out.display()
    );
    println!("{}", serde_json::to_string_pretty(&outcome.metrics)?);
    Ok(0)
}

pub fn metrics_path_for(out: &Path) -> PathBuf {
    out.with_extension("metrics.json")
}

fn load_circuit(path: &Path) -> Result<(Circuit, Option<serde_json::Value>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: CircuitJson =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Circuit::from_json(&json)?)
}

/// Rebuilds the expected line ensemble recorded in the circuit's metadata.
fn expected_from_meta(meta: &serde_json::Value) -> Result<Ensemble> {
    let kind = meta["kind"]
        .as_str()
        .ok_or_else(|| anyhow!("circuit metadata lacks a kind"))?;
    match kind {
        "hough" => {
            let w = meta["w"].as_u64().ok_or_else(|| anyhow!("meta lacks w"))? as u32;
            let h = meta["h"].as_u64().ok_or_else(|| anyhow!("meta lacks h"))? as u32;
            let e = meta["elevations"]
                .as_u64()
                .ok_or_else(|| anyhow!("meta lacks elevations"))? as u32;
            let domain = ImageDomain::new(w, h)?;
            let pats = hough_line_labels(domain, e)?
                .into_iter()
                .map(|(_, p)| p)
                .collect();
            Ok(Ensemble::new(domain, pats)?)
        }
        "fht" => {
            let n = meta["n"].as_u64().ok_or_else(|| anyhow!("meta lacks n"))? as u32;
            let domain = ImageDomain::new(n, n)?;
            let pats = fht_line_labels(n)?.into_iter().map(|(_, p)| p).collect();
            Ok(Ensemble::new(domain, pats)?)
        }
        "segment" => {
            let n = meta["n"].as_u64().ok_or_else(|| anyhow!("meta lacks n"))? as u32;
            let red = segment_reduction(n)?;
            let pats = red
                .expected_clipped()?
                .into_iter()
                .map(|(_, p)| p)
                .collect();
            Ok(Ensemble::new(red.padded, pats)?)
        }
        other => bail!("unknown circuit kind '{}'", other),
    }
}

pub fn cmd_verify(circuit_path: &Path, trials: u32, seed: u64, out: Option<&Path>) -> Result<i32> {
    let (circuit, meta) = load_circuit(circuit_path)?;
    let meta = meta.ok_or_else(|| {
        anyhow!("circuit file carries no metadata; cannot rebuild the expected ensemble")
    })?;
    let expected = expected_from_meta(&meta)?;
    let report = verify_circuit(&circuit, &expected, trials, seed)?;
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(path) = out {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{}", text);
    Ok(if report.passed() { 0 } else { 2 })
}

pub fn cmd_eval(
    circuit_path: &Path,
    image_path: &Path,
    naive: bool,
    out: Option<&Path>,
) -> Result<i32> {
    let (circuit, meta) = load_circuit(circuit_path)?;
    let mut img = read_image(image_path)?;
    // a segment circuit lives on the padded domain; embed an inner image
    if img.domain() != circuit.domain() {
        let is_segment = meta
            .as_ref()
            .and_then(|m| m["kind"].as_str())
            .map(|k| k == "segment")
            .unwrap_or(false);
        if is_segment {
            let n = circuit.domain().w();
            let red = segment_reduction(n)?;
            if img.domain() == red.inner {
                img = red.embed(&img)?;
            }
        }
    }
    let values = if naive {
        let pats = circuit.output_patterns()?;
        naive_sums(&img, &pats)?
    } else {
        circuit.evaluate(&img)?.values
    };
    let mut csv = String::new();
    let simple_keys = circuit.outputs().iter().all(|o| o.key.contains(','));
    csv.push_str(if simple_keys {
        "elevation,shift,sum\n"
    } else {
        "output,sum\n"
    });
    for (o, v) in circuit.outputs().iter().zip(values.iter()) {
        csv.push_str(&format!("{},{}\n", o.key, v));
    }
    match out {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{}", csv),
    }
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TableFormat {
    Md,
    Csv,
}

pub fn cmd_bench(
    kind: Kind,
    sizes: &[u32],
    builder: Builder,
    format: TableFormat,
    out: Option<&Path>,
) -> Result<i32> {
    let mut rows: Vec<(u32, u64, u64, usize, f64, u128)> = Vec::new();
    for &n in sizes {
        let spec = SynthSpec::resolve(kind, None, None, None, Some(n), builder)?;
        let started = Instant::now();
        let outcome = synthesize(&spec)?;
        let millis = started.elapsed().as_millis();
        let (domain, elevations) = match kind {
            Kind::Segment => (ImageDomain::new(n, 2 * n)?, n),
            _ => (ImageDomain::new(n, n)?, n),
        };
        rows.push((
            n,
            naive_cost(domain, elevations),
            outcome.metrics["tree_weight"].as_u64().unwrap_or(0),
            outcome.circuit.size(),
            weight_bound(domain, elevations),
            millis,
        ));
    }
    let mut table = String::new();
    match format {
        TableFormat::Csv => {
            table.push_str("n,naive,tree_weight,circuit_size,eq27_rhs,millis\n");
            for (n, naive, tw, cs, rhs, ms) in &rows {
                table.push_str(&format!("{},{},{},{},{:.1},{}\n", n, naive, tw, cs, rhs, ms));
            }
        }
        TableFormat::Md => {
            table.push_str("| n | naive | tree weight | circuit size | eq27 rhs | ms |\n");
            table.push_str("|---|-------|-------------|--------------|----------|----|\n");
            for (n, naive, tw, cs, rhs, ms) in &rows {
                table.push_str(&format!(
                    "| {} | {} | {} | {} | {:.1} | {} |\n",
                    n, naive, tw, cs, rhs, ms
                ));
            }
        }
    }
    match out {
        Some(path) => {
            fs::write(path, table).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{}", table),
    }
    Ok(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    Dot,
}

pub fn cmd_export(input: &Path, _format: ExportFormat, out: Option<&Path>) -> Result<i32> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let dot = if value.get("adders").is_some() {
        let json: CircuitJson = serde_json::from_value(value)?;
        let (circuit, _) = Circuit::from_json(&json)?;
        circuit.to_dot()
    } else if value.get("nodes").is_some() {
        let json: TreeJson = serde_json::from_value(value)?;
        PartitionTree::from_json(&json)?.to_dot()
    } else {
        bail!("{}: neither a circuit nor a tree artifact", input.display());
    };
    match out {
        Some(path) => {
            fs::write(path, dot).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{}", dot),
    }
    Ok(0)
}

pub fn classify_exit(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<InternalInvariant>().is_some() {
        return 3;
    }
    if let Some(core) = err.downcast_ref::<hcf_core::Error>() {
        if matches!(core, hcf_core::Error::BoundViolation(_)) {
            return 3;
        }
    }
    1
}
