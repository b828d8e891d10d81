// SPDX-License-Identifier: Apache-2.0

//! Acceptance gate: one test per release criterion, each printing a single
//! PASS/FAIL line. Criteria 3–6 share one generated dataset: 5 seeds × both
//! wirings of the 16-core × 200-cell analog, every method partitioned with
//! 32 restarts.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;
use std::time::Instant;

use tiercut::cluster::{Clustering, Method};
use tiercut::designgen::{generate, generate_raw, insert_buffers, CoreSpec, TopologySpec, Wiring};
use tiercut::ingest::{design_to_raw, is_buffer_lib, strip_buffer_tree, RawNetlist};
use tiercut::model::Design;
use tiercut::partition::fits_capacity;
use tiercut::pipeline::{
    run_gen, run_method, run_oracle_check, run_pipeline, ClusterCount, GenConfig, MethodRun,
    PipelineConfig,
};

fn verdict(id: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {id}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {id} failed: {detail}");
}

const METHODS: [Method; 4] = [Method::Nc, Method::Hg, Method::Km, Method::Pwl];

struct Instance {
    wiring: Wiring,
    seed: u64,
    design: Design,
    /// One run per entry of METHODS, same order.
    runs: Vec<MethodRun>,
    build_secs: f64,
}

impl Instance {
    fn run(&self, method: Method) -> &MethodRun {
        &self.runs[METHODS.iter().position(|&m| m == method).unwrap()]
    }
}

fn trend_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::new(
        PathBuf::from("in-memory"),
        METHODS.to_vec(),
        PathBuf::from("unused"),
    );
    cfg.clusters = ClusterCount::Auto;
    cfg.restarts = 32;
    cfg
}

/// 5 seeds × {serial, full mesh} of the 16-core × 200-cell analog.
static DATASET: LazyLock<Vec<Instance>> = LazyLock::new(|| {
    let cfg = trend_config();
    let mut out = Vec::new();
    for seed in 1..=5u64 {
        for wiring in [Wiring::Serial, Wiring::FullMesh] {
            let core = CoreSpec {
                rng_seed: seed,
                ..CoreSpec::default()
            };
            let topo = TopologySpec {
                wiring,
                ..TopologySpec::default()
            };
            let started = Instant::now();
            let design = generate(&core, &topo).expect("trend design generates");
            let runs = METHODS
                .iter()
                .map(|&m| run_method(&design, m, &cfg).expect("trend run succeeds"))
                .collect();
            out.push(Instance {
                wiring,
                seed,
                design,
                runs,
                build_secs: started.elapsed().as_secs_f64(),
            });
        }
    }
    out
});

/// Independent recount: ids of design nets whose pins map, via the
/// clustering and the partition, onto both dies.
fn spanning_nets(design: &Design, clustering: &Clustering, side: &[u8]) -> Vec<usize> {
    design
        .nets
        .iter()
        .filter_map(|net| {
            let mut on = [false; 2];
            for &pin in &net.pins {
                on[side[clustering.assignment[pin]] as usize] = true;
            }
            (on[0] && on[1]).then_some(net.id)
        })
        .collect()
}

#[test]
fn criterion_01_heuristic_matches_the_exhaustive_oracle() {
    let started = Instant::now();
    let outcome = run_oracle_check(100, 32, 42).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let pass = outcome.matched >= 90 && outcome.below_optimum == 0 && secs < 10.0;
    verdict(
        "01 oracle-optimality",
        pass,
        &format!(
            "{}/100 optimal cuts matched, {} below optimum, {secs:.2}s",
            outcome.matched, outcome.below_optimum
        ),
    );
}

#[test]
fn criterion_02_short_nets_never_cross_dies_under_pwl() {
    let cfg = trend_config();
    let mut total_cut = 0usize;
    let mut offenders = 0usize;
    for seed in 100..120u64 {
        let core = CoreSpec {
            cells_per_core: 60,
            bus_width: 6,
            internal_net_count: 40,
            rng_seed: seed,
            ..CoreSpec::default()
        };
        let topo = TopologySpec {
            grid: (2, 2),
            wiring: if seed % 2 == 0 {
                Wiring::Serial
            } else {
                Wiring::FullMesh
            },
            ..TopologySpec::default()
        };
        let design = generate(&core, &topo).unwrap();
        let threshold = 100.0 * design.agw;
        let run = run_method(&design, Method::Pwl, &cfg).unwrap();
        let cut = spanning_nets(&design, &run.clustering, &run.partition.side);
        total_cut += cut.len();
        // the hard guarantee, asserted per net: anything absorbed stays whole
        for id in cut {
            if design.nets[id].length < threshold {
                offenders += 1;
            }
        }
    }
    let pass = offenders == 0 && total_cut > 0;
    verdict(
        "02 pwl-hard-guarantee",
        pass,
        &format!("{offenders} sub-threshold nets crossed dies across 20 designs ({total_cut} nets cut in total)"),
    );
}

#[test]
fn criterion_03_no_clustering_cuts_the_fewest_nets() {
    let mut violations = Vec::new();
    for inst in DATASET.iter() {
        let nc = inst.run(Method::Nc).report.nets_cut;
        let worst = [Method::Hg, Method::Km, Method::Pwl]
            .into_iter()
            .map(|m| inst.run(m).report.nets_cut)
            .min()
            .unwrap();
        if nc > worst {
            violations.push(format!(
                "{:?} seed {}: nc {nc} > {worst}",
                inst.wiring, inst.seed
            ));
        }
    }
    let pass = violations.len() <= 1;
    verdict(
        "03 trend-nc-fewest-nets",
        pass,
        &format!(
            "{} of 10 instances violated (tolerance 1){}{}",
            violations.len(),
            if violations.is_empty() { "" } else { ": " },
            violations.join("; ")
        ),
    );
}

#[test]
fn criterion_04_clustering_raises_cut_wirelength_on_serial_designs() {
    let mut worst_ratio = f64::INFINITY;
    let mut slowest = 0.0f64;
    for inst in DATASET.iter().filter(|i| i.wiring == Wiring::Serial) {
        let nc = inst.run(Method::Nc).report.total_wl_cut_pct;
        let best = [Method::Hg, Method::Km, Method::Pwl]
            .into_iter()
            .map(|m| inst.run(m).report.total_wl_cut_pct)
            .fold(f64::NEG_INFINITY, f64::max);
        worst_ratio = worst_ratio.min(best / nc);
        slowest = slowest.max(inst.build_secs);
    }
    let pass = worst_ratio >= 1.5 && slowest < 120.0;
    verdict(
        "04 trend-clustering-raises-wl",
        pass,
        &format!(
            "best-clustered / nc wirelength-cut ratio >= {worst_ratio:.2} on every serial seed (gate 1.5); slowest build+partition {slowest:.1}s"
        ),
    );
}

#[test]
fn criterion_05_mesh_cuts_far_more_wirelength_than_serial() {
    let mut worst_ratio = f64::INFINITY;
    let mut worst_at = String::new();
    for seed in 1..=5u64 {
        let serial = DATASET
            .iter()
            .find(|i| i.seed == seed && i.wiring == Wiring::Serial)
            .unwrap();
        let mesh = DATASET
            .iter()
            .find(|i| i.seed == seed && i.wiring == Wiring::FullMesh)
            .unwrap();
        for method in METHODS {
            let s = serial.run(method).report.total_wl_cut_pct;
            let m = mesh.run(method).report.total_wl_cut_pct;
            let ratio = m / s;
            if ratio < worst_ratio {
                worst_ratio = ratio;
                worst_at = format!("{method} seed {seed}");
            }
        }
    }
    let pass = worst_ratio >= 3.0;
    verdict(
        "05 trend-mesh-over-serial",
        pass,
        &format!("mesh/serial wirelength-cut ratio >= {worst_ratio:.2} for every method and seed ({worst_at} is tightest; gate 3.0)"),
    );
}

#[test]
fn criterion_06_nc_cuts_shorter_nets_than_pwl() {
    let mut pass = true;
    let mut detail = Vec::new();
    for inst in DATASET.iter().filter(|i| i.wiring == Wiring::Serial) {
        let nc = inst.run(Method::Nc).report.median_norm;
        let pwl = inst.run(Method::Pwl).report.median_norm;
        if nc > pwl {
            pass = false;
        }
        detail.push(format!("seed {}: {nc:.3} vs {pwl:.3}", inst.seed));
    }
    verdict(
        "06 trend-nc-shorter-cut-nets",
        pass,
        &format!(
            "median normalized cut length nc <= pwl on every serial seed ({})",
            detail.join(", ")
        ),
    );
}

#[test]
fn criterion_07_every_partition_respects_the_balance_bound() {
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for inst in DATASET.iter() {
        for run in &inst.runs {
            let total = run.hypergraph.total_weight();
            let max_side = run.partition.side_areas[0].max(run.partition.side_areas[1]);
            assert!(
                fits_capacity(max_side, 0.51 * total),
                "{:?} seed {} {}: side fraction {}",
                inst.wiring,
                inst.seed,
                run.method,
                max_side / total
            );
            worst = worst.max(max_side / total);
            checked += 1;
        }
    }
    verdict(
        "07 balance-bound",
        checked == 40,
        &format!("{checked} partitions checked, worst side fraction {worst:.6} <= 0.51"),
    );
}

#[test]
fn criterion_08_conservation_and_recount_hold_on_every_run() {
    let mut checked = 0usize;
    for inst in DATASET.iter() {
        let total = inst.design.total_wirelength();
        for run in &inst.runs {
            let cut = spanning_nets(&inst.design, &run.clustering, &run.partition.side);
            assert_eq!(
                cut.len(),
                run.report.nets_cut,
                "{:?} seed {} {}: recount mismatch",
                inst.wiring,
                inst.seed,
                run.method
            );
            let cut_ids: HashSet<usize> = cut.into_iter().collect();
            let cut_wl: f64 = cut_ids.iter().map(|&id| inst.design.nets[id].length).sum();
            let uncut_wl: f64 = inst
                .design
                .nets
                .iter()
                .filter(|n| !cut_ids.contains(&n.id))
                .map(|n| n.length)
                .sum();
            assert!(
                ((cut_wl + uncut_wl) - total).abs() <= 1e-9 * total,
                "wirelength not conserved: {cut_wl} + {uncut_wl} != {total}"
            );
            let pct = 100.0 * cut_wl / total;
            assert!(
                (pct - run.report.total_wl_cut_pct).abs() <= 1e-9 * 100.0,
                "reported percentage diverges from recount"
            );
            checked += 1;
        }
    }
    verdict(
        "08 conservation-and-recount",
        checked == 40,
        &format!("{checked} runs recounted independently; wirelength conserved to 1e-9 relative"),
    );
}

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn criterion_09_sweeps_are_byte_deterministic_across_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let input = run_gen(&GenConfig {
        core: CoreSpec::default(),
        topo: TopologySpec::default(),
        with_buffers: None,
        out: dir.path().join("design.nlp"),
    })
    .unwrap();
    let mut runs = Vec::new();
    for (label, parallel) in [("parallel", true), ("serial", false)] {
        let mut cfg = trend_config();
        cfg.input = input.clone();
        cfg.out_dir = dir.path().join(label);
        cfg.parallel = parallel;
        cfg.comparison = true;
        run_pipeline(&cfg).unwrap();
        runs.push(tree_bytes(&cfg.out_dir));
    }
    let names: Vec<&String> = runs[0].iter().map(|(n, _)| n).collect();
    let pass = runs[0] == runs[1];
    verdict(
        "09 determinism-across-parallelism",
        pass,
        &format!(
            "{} artifact files byte-identical between parallel and serial sweeps",
            names.len()
        ),
    );
}

/// Breadth-first closure over the pre-strip netlist: the non-buffer sinks
/// transitively reachable from a net through buffer chains.
fn reachable_sinks(raw: &RawNetlist, root: usize) -> HashSet<String> {
    let lib_of: std::collections::HashMap<&str, &str> = raw
        .cells
        .iter()
        .map(|c| (c.name.as_str(), c.lib.as_str()))
        .collect();
    let mut out = HashSet::new();
    let mut queue: Vec<usize> = vec![root];
    let mut seen_nets = HashSet::new();
    while let Some(ni) = queue.pop() {
        if !seen_nets.insert(ni) {
            continue;
        }
        for pin in &raw.nets[ni].pins[1..] {
            if is_buffer_lib(lib_of[pin.as_str()], &raw.buffer_patterns) {
                // follow the (single) net this buffer drives
                for (i, net) in raw.nets.iter().enumerate() {
                    if net.pins.first() == Some(pin) {
                        queue.push(i);
                    }
                }
            } else {
                out.insert(pin.clone());
            }
        }
    }
    out
}

#[test]
fn criterion_10_buffer_stripping_preserves_reachability() {
    let mut buffers_removed = 0usize;
    for seed in 200..203u64 {
        let core = CoreSpec {
            cells_per_core: 60,
            bus_width: 6,
            internal_net_count: 40,
            rng_seed: seed,
            ..CoreSpec::default()
        };
        let topo = TopologySpec {
            grid: (2, 2),
            ..TopologySpec::default()
        };
        let mut raw = generate_raw(&core, &topo).unwrap();
        let added = insert_buffers(&mut raw, 10.0, seed).unwrap();
        assert!(added > 0, "buffer pass added nothing");
        buffers_removed += added;

        let design = strip_buffer_tree(&raw).unwrap();
        // all buffer cells removed, every logic cell kept in order
        let kept: Vec<&str> = raw
            .cells
            .iter()
            .filter(|c| !is_buffer_lib(&c.lib, &raw.buffer_patterns))
            .map(|c| c.name.as_str())
            .collect();
        let got: Vec<&str> = design.cells.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(kept, got, "stripped cell list diverged");
        assert!(design.cells.iter().all(|c| !c.is_buffer));

        // reachability: each surviving net carries exactly the closure of
        // its pre-strip root, computed here by an independent breadth-first
        // walk over the original connectivity
        let lib_of: std::collections::HashMap<&str, &str> = raw
            .cells
            .iter()
            .map(|c| (c.name.as_str(), c.lib.as_str()))
            .collect();
        let roots: Vec<usize> = (0..raw.nets.len())
            .filter(|&i| !is_buffer_lib(lib_of[raw.nets[i].pins[0].as_str()], &raw.buffer_patterns))
            .collect();
        assert_eq!(roots.len(), design.nets.len(), "root net count diverged");
        for (net, &root) in design.nets.iter().zip(&roots) {
            let got: HashSet<String> = net.pins[1..]
                .iter()
                .map(|&p| design.cells[p].name.clone())
                .collect();
            let mut expected = reachable_sinks(&raw, root);
            // a driver that also appears as a sink stays a single pin
            expected.remove(&design.cells[net.pins[0]].name);
            assert_eq!(expected, got, "net {root} closure diverged");
        }

        // idempotence: stripping a stripped design changes nothing
        let again = strip_buffer_tree(&design_to_raw(&design)).unwrap();
        assert_eq!(design.cells.len(), again.cells.len());
        for (a, b) in design.nets.iter().zip(&again.nets) {
            assert_eq!(a.pins, b.pins);
            assert!((a.length - b.length).abs() <= 1e-12);
        }
    }
    verdict(
        "10 buffer-stripping",
        true,
        &format!("3 buffered designs stripped; {buffers_removed} buffers removed; closures match an independent walk; stripping is idempotent"),
    );
}
