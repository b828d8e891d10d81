// SPDX-License-Identifier: Apache-2.0

//! Synthetic placed-netlist generator: a grid of replicated cores with random
//! internal logic, wired either as a serial daisy chain or a one-to-all full
//! mesh. Interconnect locality is the controlled variable; the innards of a
//! core are random logic, not a real block.

use crate::error::{Error, Result};
use crate::ingest::{strip_buffer_tree, RawCell, RawNet, RawNetlist, RawRect};
use crate::model::{hpwl, Design, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Fraction of the core body area covered by cells; the body square is sized
/// from it, leaving routing margin inside the core tile.
const UTILIZATION: f64 = 0.5;

/// Shape of one replicated core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreSpec {
    pub cells_per_core: usize,
    /// Width of the core's output (and input) bus in wires.
    pub bus_width: usize,
    pub internal_net_count: usize,
    /// Inclusive fanout range for internal nets (sinks per driver).
    pub internal_fanout: (usize, usize),
    pub cell_width: f64,
    pub cell_height: f64,
    pub rng_seed: u64,
}

impl Default for CoreSpec {
    fn default() -> Self {
        CoreSpec {
            cells_per_core: 200,
            bus_width: 16,
            // dense enough that a core is one well-connected block rather
            // than loose fragments plus filler cells
            internal_net_count: 120,
            internal_fanout: (1, 3),
            cell_width: 0.4,
            cell_height: 0.4,
            rng_seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wiring {
    /// Core n drives its whole bus to core n+1.
    Serial,
    /// Each core's bus fans out round-robin across all other cores.
    FullMesh,
}

impl Wiring {
    pub fn as_str(&self) -> &'static str {
        match self {
            Wiring::Serial => "serial",
            Wiring::FullMesh => "full_mesh",
        }
    }

    pub fn parse(s: &str) -> Result<Wiring> {
        match s {
            "serial" => Ok(Wiring::Serial),
            "full_mesh" | "mesh" => Ok(Wiring::FullMesh),
            other => Err(Error::Domain(format!(
                "designgen: unknown wiring '{other}' (expected serial or full_mesh)"
            ))),
        }
    }
}

/// Core grid and inter-core wiring style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    /// (rows, cols) of cores.
    pub grid: (usize, usize),
    pub wiring: Wiring,
    /// Tile edge length; cores sit on a square grid at this pitch.
    pub core_pitch: f64,
}

impl Default for TopologySpec {
    fn default() -> Self {
        TopologySpec {
            grid: (4, 4),
            wiring: Wiring::Serial,
            core_pitch: 60.0,
        }
    }
}

fn validate(core: &CoreSpec, topo: &TopologySpec) -> Result<f64> {
    if core.bus_width < 1 || core.internal_net_count < 1 || core.internal_fanout.0 < 1 {
        return Err(Error::Domain(
            "designgen: bus width, internal net count and fanout must be positive".into(),
        ));
    }
    if core.cells_per_core < 2 * core.bus_width {
        return Err(Error::Domain(format!(
            "designgen: cells_per_core {} cannot host bus endpoints (need >= {})",
            core.cells_per_core,
            2 * core.bus_width
        )));
    }
    if core.internal_fanout.0 > core.internal_fanout.1 {
        return Err(Error::Domain(format!(
            "designgen: empty fanout range {:?}",
            core.internal_fanout
        )));
    }
    if core.internal_fanout.1 + 1 > core.cells_per_core {
        return Err(Error::Domain(format!(
            "designgen: fanout {} needs more cells than the core's {}",
            core.internal_fanout.1, core.cells_per_core
        )));
    }
    if core.cell_width <= 0.0 || core.cell_height <= 0.0 || topo.core_pitch <= 0.0 {
        return Err(Error::Domain(
            "designgen: cell dimensions and core pitch must be positive".into(),
        ));
    }
    let (rows, cols) = topo.grid;
    if rows * cols < 2 {
        return Err(Error::Domain(format!(
            "designgen: grid {rows}x{cols} needs at least 2 cores"
        )));
    }
    let body =
        (core.cells_per_core as f64 * core.cell_width * core.cell_height / UTILIZATION).sqrt();
    if body > topo.core_pitch {
        return Err(Error::Domain(format!(
            "designgen: core body {body:.2} exceeds the {:.2} pitch",
            topo.core_pitch
        )));
    }
    if body < core.cell_width || body < core.cell_height {
        return Err(Error::Domain(format!(
            "designgen: core body {body:.2} cannot host a {}x{} cell",
            core.cell_width, core.cell_height
        )));
    }
    Ok(body)
}

/// Generates the raw placed netlist: cores row-major on the grid, cells
/// uniformly random inside each core's body square, seeded internal random
/// logic, then the inter-core bus nets. Pure function of specs and seed.
pub fn generate_raw(core: &CoreSpec, topo: &TopologySpec) -> Result<RawNetlist> {
    let body = validate(core, topo)?;
    let (rows, cols) = topo.grid;
    let cores = rows * cols;
    let pitch = topo.core_pitch;
    let mut rng = ChaCha8Rng::seed_from_u64(core.rng_seed);

    let mut cells = Vec::with_capacity(cores * core.cells_per_core);
    for k in 0..cores {
        let tile_x = (k % cols) as f64 * pitch;
        let tile_y = (k / cols) as f64 * pitch;
        let body_x = tile_x + (pitch - body) / 2.0;
        let body_y = tile_y + (pitch - body) / 2.0;
        for i in 0..core.cells_per_core {
            cells.push(RawCell {
                name: format!("core{k}_c{i}"),
                lib: "STD".into(),
                x: body_x + rng.gen_range(0.0..=(body - core.cell_width)),
                y: body_y + rng.gen_range(0.0..=(body - core.cell_height)),
                w: core.cell_width,
                h: core.cell_height,
            });
        }
    }

    let mut nets = Vec::new();
    for k in 0..cores {
        for j in 0..core.internal_net_count {
            let fanout = rng.gen_range(core.internal_fanout.0..=core.internal_fanout.1);
            let picks = rand::seq::index::sample(&mut rng, core.cells_per_core, fanout + 1);
            nets.push(RawNet {
                name: format!("core{k}_n{j}"),
                pins: picks.iter().map(|i| format!("core{k}_c{i}")).collect(),
            });
        }
    }
    // bus convention: cells [0, W) drive outputs, cells [W, 2W) take inputs
    let w = core.bus_width;
    match topo.wiring {
        Wiring::Serial => {
            for k in 0..cores - 1 {
                for wire in 0..w {
                    nets.push(RawNet {
                        name: format!("bus{k}to{}_w{wire}", k + 1),
                        pins: vec![
                            format!("core{k}_c{wire}"),
                            format!("core{}_c{}", k + 1, w + wire),
                        ],
                    });
                }
            }
        }
        Wiring::FullMesh => {
            for k in 0..cores {
                let others: Vec<usize> = (0..cores).filter(|&t| t != k).collect();
                for wire in 0..w {
                    let t = others[wire % others.len()];
                    nets.push(RawNet {
                        name: format!("bus{k}to{t}_w{wire}"),
                        pins: vec![format!("core{k}_c{wire}"), format!("core{t}_c{}", w + wire)],
                    });
                }
            }
        }
    }

    Ok(RawNetlist {
        floorplan: RawRect {
            x: 0.0,
            y: 0.0,
            w: cols as f64 * pitch,
            h: rows as f64 * pitch,
        },
        cells,
        nets,
        buffer_patterns: vec!["BUF".into()],
    })
}

/// Generates and ingests in one step, yielding an annotated [`Design`].
pub fn generate(core: &CoreSpec, topo: &TopologySpec) -> Result<Design> {
    strip_buffer_tree(&generate_raw(core, topo)?)
}

/// Replaces the longest `percent`% of multi-pin nets with buffer chains of
/// random depth 1–3: the original net shrinks to driver→first buffer, and the
/// last buffer fans out to all original sinks. Buffers are placed evenly
/// along the driver→sink-centroid segment and sized like the average cell.
/// Returns the number of buffer cells added.
pub fn insert_buffers(raw: &mut RawNetlist, percent: f64, seed: u64) -> Result<usize> {
    if !(0.0..=100.0).contains(&percent) {
        return Err(Error::Domain(format!(
            "designgen: buffer percentage must be in [0, 100], got {percent}"
        )));
    }
    let center_of: std::collections::HashMap<&str, Point> = raw
        .cells
        .iter()
        .map(|c| {
            (
                c.name.as_str(),
                Point::new(c.x + c.w / 2.0, c.y + c.h / 2.0),
            )
        })
        .collect();
    let mut candidates: Vec<(usize, f64)> = raw
        .nets
        .iter()
        .enumerate()
        .filter(|(_, n)| n.pins.len() >= 2)
        .map(|(i, n)| {
            let pts: Vec<Point> = n.pins.iter().map(|p| center_of[p.as_str()]).collect();
            (i, hpwl(&pts).expect("multi-pin net has points"))
        })
        .collect();
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let count = (percent / 100.0 * candidates.len() as f64).floor() as usize;
    let mut selected: Vec<usize> = candidates[..count].iter().map(|&(i, _)| i).collect();
    selected.sort_unstable();

    let buf_w = raw.cells.iter().map(|c| c.w).sum::<f64>() / raw.cells.len() as f64;
    let buf_h = raw.cells.iter().map(|c| c.h).sum::<f64>() / raw.cells.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut added = 0usize;
    let mut new_cells = Vec::new();
    let mut new_nets = Vec::new();
    for ni in selected {
        let net = &mut raw.nets[ni];
        let chain = rng.gen_range(1..=3usize);
        let driver = center_of[net.pins[0].as_str()];
        let sinks = &net.pins[1..];
        let centroid = {
            let (mut sx, mut sy) = (0.0, 0.0);
            for p in sinks {
                let c = center_of[p.as_str()];
                sx += c.x;
                sy += c.y;
            }
            Point::new(sx / sinks.len() as f64, sy / sinks.len() as f64)
        };
        let buf_names: Vec<String> = (1..=chain).map(|i| format!("{}_b{i}", net.name)).collect();
        for (i, name) in buf_names.iter().enumerate() {
            let frac = (i + 1) as f64 / (chain + 1) as f64;
            let cx = driver.x + frac * (centroid.x - driver.x);
            let cy = driver.y + frac * (centroid.y - driver.y);
            new_cells.push(RawCell {
                name: name.clone(),
                lib: "BUF".into(),
                x: cx - buf_w / 2.0,
                y: cy - buf_h / 2.0,
                w: buf_w,
                h: buf_h,
            });
        }
        let original_sinks: Vec<String> = sinks.to_vec();
        net.pins.truncate(1);
        net.pins.push(buf_names[0].clone());
        for i in 0..chain {
            let mut pins = vec![buf_names[i].clone()];
            if i + 1 < chain {
                pins.push(buf_names[i + 1].clone());
            } else {
                pins.extend(original_sinks.iter().cloned());
            }
            new_nets.push(RawNet {
                name: format!("{}_s{}", raw.nets[ni].name, i + 1),
                pins,
            });
        }
        added += chain;
    }
    raw.cells.extend(new_cells);
    raw.nets.extend(new_nets);
    if !raw.buffer_patterns.iter().any(|p| p == "BUF") {
        raw.buffer_patterns.push("BUF".into());
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::native_string;

    fn small_core(seed: u64) -> CoreSpec {
        CoreSpec {
            cells_per_core: 30,
            bus_width: 4,
            internal_net_count: 8,
            internal_fanout: (1, 2),
            cell_width: 0.4,
            cell_height: 0.4,
            rng_seed: seed,
        }
    }

    fn topo(rows: usize, cols: usize, wiring: Wiring) -> TopologySpec {
        TopologySpec {
            grid: (rows, cols),
            wiring,
            core_pitch: 20.0,
        }
    }

    fn inter_core_nets(raw: &RawNetlist) -> Vec<&RawNet> {
        raw.nets
            .iter()
            .filter(|n| n.name.starts_with("bus"))
            .collect()
    }

    #[test]
    fn serial_emits_w_nets_per_boundary() {
        let raw = generate_raw(&small_core(1), &topo(1, 3, Wiring::Serial)).unwrap();
        let bus = inter_core_nets(&raw);
        assert_eq!(bus.len(), (3 - 1) * 4);
        assert_eq!(raw.nets.len(), 3 * 8 + 8);
        assert_eq!(raw.cells.len(), 3 * 30);
    }

    #[test]
    fn full_mesh_distributes_round_robin() {
        let core = CoreSpec {
            bus_width: 9,
            ..small_core(2)
        };
        let raw = generate_raw(&core, &topo(2, 2, Wiring::FullMesh)).unwrap();
        let bus = inter_core_nets(&raw);
        assert_eq!(bus.len(), 4 * 9);
        // each ordered core pair carries exactly bus_width / (K-1) wires
        let mut pair_counts = std::collections::HashMap::new();
        for n in &bus {
            let stem = n.name.split("_w").next().unwrap();
            *pair_counts.entry(stem.to_string()).or_insert(0usize) += 1;
        }
        assert_eq!(pair_counts.len(), 4 * 3);
        assert!(pair_counts.values().all(|&c| c == 3));
    }

    #[test]
    fn sixteen_core_mesh_sends_one_wire_per_peer() {
        let core = CoreSpec {
            bus_width: 15,
            ..small_core(3)
        };
        let raw = generate_raw(&core, &topo(4, 4, Wiring::FullMesh)).unwrap();
        let bus = inter_core_nets(&raw);
        assert_eq!(bus.len(), 16 * 15);
        let mut stems = std::collections::HashSet::new();
        for n in &bus {
            assert!(stems.insert(n.name.split("_w").next().unwrap().to_string()));
        }
        assert_eq!(stems.len(), 16 * 15);
    }

    #[test]
    fn cells_stay_inside_their_core_tile() {
        let raw = generate_raw(&small_core(4), &topo(2, 3, Wiring::Serial)).unwrap();
        let pitch = 20.0;
        for c in &raw.cells {
            let k: usize = c.name["core".len()..c.name.find('_').unwrap()]
                .parse()
                .unwrap();
            let (row, col) = (k / 3, k % 3);
            let cx = c.x + c.w / 2.0;
            let cy = c.y + c.h / 2.0;
            assert!(cx >= col as f64 * pitch && cx <= (col + 1) as f64 * pitch);
            assert!(cy >= row as f64 * pitch && cy <= (row + 1) as f64 * pitch);
        }
    }

    #[test]
    fn serial_boundary_cut_severs_exactly_the_bus() {
        let raw = generate_raw(&small_core(5), &topo(1, 4, Wiring::Serial)).unwrap();
        let core_of =
            |name: &str| -> usize { name["core".len()..name.find('_').unwrap()].parse().unwrap() };
        for boundary in 0..3usize {
            let crossing = raw
                .nets
                .iter()
                .filter(|n| {
                    let mut lo = false;
                    let mut hi = false;
                    for p in &n.pins {
                        if core_of(p) <= boundary {
                            lo = true;
                        } else {
                            hi = true;
                        }
                    }
                    lo && hi
                })
                .count();
            assert_eq!(crossing, 4, "boundary {boundary}");
        }
    }

    #[test]
    fn generation_is_byte_deterministic() {
        let a = generate_raw(&small_core(7), &topo(2, 2, Wiring::FullMesh)).unwrap();
        let b = generate_raw(&small_core(7), &topo(2, 2, Wiring::FullMesh)).unwrap();
        assert_eq!(native_string(&a), native_string(&b));
        let c = generate_raw(&small_core(8), &topo(2, 2, Wiring::FullMesh)).unwrap();
        assert_ne!(native_string(&a), native_string(&c));
    }

    #[test]
    fn generated_design_passes_ingestion() {
        let d = generate(&small_core(9), &topo(2, 2, Wiring::Serial)).unwrap();
        assert_eq!(d.cells.len(), 4 * 30);
        assert!(d.nets.iter().all(|n| n.length >= 0.0));
        assert!((d.agw - 0.4).abs() < 1e-12);
    }

    #[test]
    fn spec_violations_are_domain_errors() {
        let core = small_core(1);
        let undersized = CoreSpec {
            cells_per_core: 7,
            ..core.clone()
        };
        assert!(matches!(
            generate_raw(&undersized, &topo(2, 2, Wiring::Serial)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            generate_raw(&core, &topo(1, 1, Wiring::Serial)),
            Err(Error::Domain(_))
        ));
        let cramped = TopologySpec {
            core_pitch: 2.0,
            ..topo(2, 2, Wiring::Serial)
        };
        assert!(matches!(
            generate_raw(&core, &cramped),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn buffer_insertion_targets_the_longest_nets() {
        let mut raw = generate_raw(&small_core(11), &topo(1, 4, Wiring::Serial)).unwrap();
        let nets_before = raw.nets.len();
        let added = insert_buffers(&mut raw, 10.0, 99).unwrap();
        let expected_chains = nets_before / 10;
        assert!(added >= expected_chains && added <= 3 * expected_chains);
        let buffers = raw.cells.iter().filter(|c| c.lib == "BUF").count();
        assert_eq!(buffers, added);
        // the longest nets are the inter-core buses; chains should hang there
        assert!(raw
            .cells
            .iter()
            .filter(|c| c.lib == "BUF")
            .all(|c| c.name.starts_with("bus")));
    }

    #[test]
    fn buffer_insertion_then_stripping_restores_the_netlist() {
        let core = small_core(13);
        let t = topo(2, 2, Wiring::FullMesh);
        let clean = generate(&core, &t).unwrap();
        let mut buffered = generate_raw(&core, &t).unwrap();
        insert_buffers(&mut buffered, 15.0, 5).unwrap();
        let stripped = strip_buffer_tree(&buffered).unwrap();
        assert_eq!(stripped.cells.len(), clean.cells.len());
        assert_eq!(stripped.nets.len(), clean.nets.len());
        for (a, b) in stripped.nets.iter().zip(&clean.nets) {
            assert_eq!(a.pins, b.pins);
        }
    }

    #[test]
    fn zero_percent_inserts_nothing() {
        let mut raw = generate_raw(&small_core(17), &topo(2, 2, Wiring::Serial)).unwrap();
        let before = native_string(&raw);
        assert_eq!(insert_buffers(&mut raw, 0.0, 1).unwrap(), 0);
        assert_eq!(native_string(&raw), before);
        assert!(insert_buffers(&mut raw, 101.0, 1).is_err());
    }
}
