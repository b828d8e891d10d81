// SPDX-License-Identifier: Apache-2.0

//! Netlist ingestion: parse placed netlists (native format or Bookshelf),
//! strip buffer trees, and hand back an annotated [`Design`].
//!
//! Native format: a single JSON document with top-level keys `floorplan
//! {x,y,w,h}`, `cells [{name,lib,x,y,w,h}]`, `nets [{name,pins}]` and
//! `buffer_patterns [...]`. Net pins list cell names, driver first. Lengths
//! are µm. A cell is a buffer when its `lib` starts with any entry of
//! `buffer_patterns`.

use crate::error::{Error, Result};
use crate::model::{annotate_lengths, Cell, Design, Net, Point, Rect};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

static PARSE_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Number of netlists parsed by this process so far. Lets the batch driver
/// assert that a sweep ingests its design exactly once.
pub fn parse_counter() -> u64 {
    PARSE_COUNTER.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCell {
    pub name: String,
    pub lib: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNet {
    pub name: String,
    /// Cell names; the first pin is the driver.
    pub pins: Vec<String>,
}

/// Lossless in-memory image of a netlist file, declaration order preserved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNetlist {
    pub floorplan: RawRect,
    pub cells: Vec<RawCell>,
    pub nets: Vec<RawNet>,
    #[serde(default)]
    pub buffer_patterns: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Native,
    Bookshelf,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format> {
        match s {
            "native" => Ok(Format::Native),
            "bookshelf" => Ok(Format::Bookshelf),
            other => Err(Error::Domain(format!(
                "ingest: unknown format '{other}' (expected native or bookshelf)"
            ))),
        }
    }

    /// Guess from the file extension: `.nodes`/`.nets`/`.pl` mean Bookshelf.
    pub fn infer(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("nodes") | Some("nets") | Some("pl") => Format::Bookshelf,
            _ => Format::Native,
        }
    }
}

/// Parses a placed netlist. For Bookshelf, `path` may point at any file of
/// the `.nodes`/`.nets`/`.pl` trio; siblings are derived by swapping the
/// extension.
pub fn parse_design(path: &Path, format: Format) -> Result<RawNetlist> {
    PARSE_COUNTER.fetch_add(1, Ordering::Relaxed);
    let raw = match format {
        Format::Native => parse_native(path)?,
        Format::Bookshelf => parse_bookshelf(path)?,
    };
    validate_names(&raw)?;
    Ok(raw)
}

fn parse_native(path: &Path) -> Result<RawNetlist> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })
}

fn validate_names(raw: &RawNetlist) -> Result<()> {
    let mut seen = HashSet::new();
    for c in &raw.cells {
        if !seen.insert(c.name.as_str()) {
            return Err(Error::Integrity(format!(
                "ingest: cell name '{}' declared more than once",
                c.name
            )));
        }
    }
    let mut seen = HashSet::new();
    for n in &raw.nets {
        if !seen.insert(n.name.as_str()) {
            return Err(Error::Integrity(format!(
                "ingest: net name '{}' declared more than once",
                n.name
            )));
        }
    }
    Ok(())
}

/// Serializes a netlist in the native format (pretty JSON, fixed key order,
/// trailing newline). Byte-deterministic for a fixed input.
pub fn native_string(raw: &RawNetlist) -> String {
    let mut s = serde_json::to_string_pretty(raw).expect("netlist serialization is infallible");
    s.push('\n');
    s
}

pub fn write_native(raw: &RawNetlist, path: &Path) -> Result<()> {
    std::fs::write(path, native_string(raw))?;
    Ok(())
}

/// True when `lib` matches any buffer pattern (prefix match).
pub fn is_buffer_lib(lib: &str, patterns: &[String]) -> bool {
    patterns.iter().any(|p| lib.starts_with(p.as_str()))
}

/// Removes every buffer cell, merging each buffer's input and output nets so
/// the original driver connects directly to all transitive non-buffer sinks.
/// Chains collapse fully. The returned design is length-annotated.
///
/// Shape requirements: a buffer drives exactly one net (appears first in
/// exactly one pin list) and is driven by exactly one net (appears as a
/// non-first pin exactly once). Buffer loops that no real driver reaches are
/// reported as cycles.
pub fn strip_buffer_tree(raw: &RawNetlist) -> Result<Design> {
    validate_names(raw)?;
    let cell_of: HashMap<&str, usize> = raw
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), i))
        .collect();
    let mut nets: Vec<Vec<usize>> = Vec::with_capacity(raw.nets.len());
    for n in &raw.nets {
        if n.pins.is_empty() {
            return Err(Error::Integrity(format!(
                "ingest: net '{}' has no pins",
                n.name
            )));
        }
        let mut pins = Vec::with_capacity(n.pins.len());
        for p in &n.pins {
            let &cell = cell_of.get(p.as_str()).ok_or_else(|| {
                Error::Integrity(format!(
                    "ingest: net '{}' references unknown cell '{}'",
                    n.name, p
                ))
            })?;
            pins.push(cell);
        }
        nets.push(pins);
    }
    let is_buf: Vec<bool> = raw
        .cells
        .iter()
        .map(|c| is_buffer_lib(&c.lib, &raw.buffer_patterns))
        .collect();

    // shape check: per buffer, exactly one driven net and one input net
    let n_cells = raw.cells.len();
    let mut drives: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
    let mut fed_by: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
    for (ni, pins) in nets.iter().enumerate() {
        drives[pins[0]].push(ni);
        for &s in &pins[1..] {
            fed_by[s].push(ni);
        }
    }
    let mut out_net = vec![usize::MAX; n_cells];
    let mut in_net = vec![usize::MAX; n_cells];
    for (c, buf) in is_buf.iter().enumerate() {
        if !buf {
            continue;
        }
        if drives[c].len() != 1 || fed_by[c].len() != 1 {
            return Err(Error::Shape(format!(
                "ingest: buffer '{}' drives {} nets and is driven by {} (need exactly 1 and 1)",
                raw.cells[c].name,
                drives[c].len(),
                fed_by[c].len()
            )));
        }
        out_net[c] = drives[c][0];
        in_net[c] = fed_by[c][0];
    }

    // transitive sink closure from every net with a non-buffer driver
    let mut visited_buf = vec![false; n_cells];
    let mut merged: Vec<(String, Vec<usize>)> = Vec::new();
    let mut seen = vec![usize::MAX; n_cells]; // stamped with the root net id
    for (ni, pins) in nets.iter().enumerate() {
        if is_buf[pins[0]] {
            continue;
        }
        let mut result = vec![pins[0]];
        seen[pins[0]] = ni;
        let mut stack: Vec<&[usize]> = vec![&pins[1..]];
        while let Some(sinks) = stack.pop() {
            for (offset, &s) in sinks.iter().enumerate() {
                if is_buf[s] {
                    debug_assert!(!visited_buf[s], "shape check admits one visit per buffer");
                    visited_buf[s] = true;
                    // depth-first: finish the buffer's subtree, then resume here
                    stack.push(&sinks[offset + 1..]);
                    stack.push(&nets[out_net[s]][1..]);
                    break;
                }
                if seen[s] != ni {
                    seen[s] = ni;
                    result.push(s);
                }
            }
        }
        merged.push((raw.nets[ni].name.clone(), result));
    }

    // a buffer no closure reached sits on a driverless loop
    if let Some(start) = (0..n_cells).find(|&c| is_buf[c] && !visited_buf[c]) {
        let mut chain = vec![start];
        let mut cur = start;
        loop {
            let driver = nets[in_net[cur]][0];
            debug_assert!(is_buf[driver], "unreached buffers are fed by buffers");
            if let Some(pos) = chain.iter().position(|&c| c == driver) {
                let cycle: Vec<&str> = chain[pos..]
                    .iter()
                    .map(|&c| raw.cells[c].name.as_str())
                    .collect();
                return Err(Error::Integrity(format!(
                    "ingest: buffer cycle with no driver: {} -> {}",
                    cycle.join(" -> "),
                    raw.cells[driver].name
                )));
            }
            chain.push(driver);
            cur = driver;
        }
    }

    // renumber surviving cells densely, declaration order preserved
    let mut new_id = vec![usize::MAX; n_cells];
    let mut cells = Vec::new();
    for (c, rc) in raw.cells.iter().enumerate() {
        if is_buf[c] {
            continue;
        }
        new_id[c] = cells.len();
        cells.push(Cell {
            id: cells.len(),
            name: rc.name.clone(),
            origin: Point::new(rc.x, rc.y),
            width: rc.w,
            height: rc.h,
            is_buffer: false,
        });
    }
    let nets = merged
        .into_iter()
        .enumerate()
        .map(|(id, (_, pins))| Net {
            id,
            pins: pins.into_iter().map(|c| new_id[c]).collect(),
            length: 0.0,
        })
        .collect();
    let fp = &raw.floorplan;
    let design = Design::new(cells, nets, Rect::new(fp.x, fp.y, fp.w, fp.h))?;
    annotate_lengths(design)
}

/// Re-externalizes a design as a raw netlist. Net names are synthesized from
/// net ids (originals are not retained past stripping).
pub fn design_to_raw(design: &Design) -> RawNetlist {
    let any_buffer = design.cells.iter().any(|c| c.is_buffer);
    RawNetlist {
        floorplan: RawRect {
            x: design.floorplan.origin.x,
            y: design.floorplan.origin.y,
            w: design.floorplan.width,
            h: design.floorplan.height,
        },
        cells: design
            .cells
            .iter()
            .map(|c| RawCell {
                name: c.name.clone(),
                lib: if c.is_buffer { "BUF" } else { "STD" }.into(),
                x: c.origin.x,
                y: c.origin.y,
                w: c.width,
                h: c.height,
            })
            .collect(),
        nets: design
            .nets
            .iter()
            .map(|n| RawNet {
                name: format!("n{}", n.id),
                pins: n
                    .pins
                    .iter()
                    .map(|&p| design.cells[p].name.clone())
                    .collect(),
            })
            .collect(),
        buffer_patterns: if any_buffer {
            vec!["BUF".into()]
        } else {
            Vec::new()
        },
    }
}

// ---------------------------------------------------------------------------
// Bookshelf (.nodes / .nets / .pl)
// ---------------------------------------------------------------------------

struct BookshelfWarnings {
    seen: HashSet<String>,
}

impl BookshelfWarnings {
    fn new() -> Self {
        BookshelfWarnings {
            seen: HashSet::new(),
        }
    }

    /// Warn once per distinct ignored-attribute kind per parse.
    fn ignored(&mut self, file: &Path, kind: &str) {
        if self.seen.insert(kind.to_string()) {
            log::warn!(
                "ingest: {}: ignoring unsupported attribute '{kind}'",
                file.display()
            );
        }
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("expected a number, got '{tok}'")))
}

fn parse_usize(path: &Path, line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("expected an integer, got '{tok}'")))
}

/// Content lines with 1-based numbers: headers, comments and blanks skipped.
fn bookshelf_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with("UCLA") {
            None
        } else {
            Some((i + 1, t))
        }
    })
}

/// Splits a `Key : value` line; Bookshelf allows spaces around the colon.
fn key_value(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once(':')?;
    Some((k.trim(), v.trim()))
}

fn parse_bookshelf(path: &Path) -> Result<RawNetlist> {
    let nodes_path = path.with_extension("nodes");
    let pl_path = path.with_extension("pl");
    let nets_path = path.with_extension("nets");
    let mut warn = BookshelfWarnings::new();

    // .nodes: name width height [attrs]
    let nodes_text = std::fs::read_to_string(&nodes_path)?;
    let mut declared_nodes = None;
    let mut nodes: Vec<(String, f64, f64)> = Vec::new();
    for (lineno, line) in bookshelf_lines(&nodes_text) {
        if let Some((key, value)) = key_value(line) {
            match key {
                "NumNodes" => declared_nodes = Some(parse_usize(&nodes_path, lineno, value)?),
                "NumTerminals" => {}
                other => warn.ignored(&nodes_path, other),
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(parse_err(
                &nodes_path,
                lineno,
                "node lines need: name width height",
            ));
        }
        for &extra in &toks[3..] {
            warn.ignored(&nodes_path, extra);
        }
        nodes.push((
            toks[0].to_string(),
            parse_f64(&nodes_path, lineno, toks[1])?,
            parse_f64(&nodes_path, lineno, toks[2])?,
        ));
    }
    if let Some(d) = declared_nodes {
        if d != nodes.len() {
            return Err(Error::Integrity(format!(
                "ingest: {} declares NumNodes {d} but contains {}",
                nodes_path.display(),
                nodes.len()
            )));
        }
    }

    // .pl: name x y [: orientation] [/FIXED]
    let pl_text = std::fs::read_to_string(&pl_path)?;
    let mut placed: HashMap<String, (f64, f64)> = HashMap::new();
    for (lineno, line) in bookshelf_lines(&pl_text) {
        let body = match line.split_once(':') {
            Some((b, rest)) => {
                for tok in rest.split_whitespace() {
                    warn.ignored(&pl_path, tok);
                }
                b
            }
            None => line,
        };
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(parse_err(
                &pl_path,
                lineno,
                "placement lines need: name x y",
            ));
        }
        for &extra in &toks[3..] {
            warn.ignored(&pl_path, extra);
        }
        placed.insert(
            toks[0].to_string(),
            (
                parse_f64(&pl_path, lineno, toks[1])?,
                parse_f64(&pl_path, lineno, toks[2])?,
            ),
        );
    }

    // .nets: NetDegree : d [name] blocks with one pin line per member
    let nets_text = std::fs::read_to_string(&nets_path)?;
    let mut declared_nets = None;
    let mut declared_pins = None;
    let mut nets: Vec<RawNet> = Vec::new();
    let mut open: Option<(usize, usize, RawNet)> = None; // (line, degree, net)
    let close = |open: &mut Option<(usize, usize, RawNet)>, nets: &mut Vec<RawNet>| -> Result<()> {
        if let Some((lineno, degree, net)) = open.take() {
            if net.pins.len() != degree {
                return Err(parse_err(
                    &nets_path,
                    lineno,
                    format!(
                        "net '{}' declares degree {degree} but lists {} pins",
                        net.name,
                        net.pins.len()
                    ),
                ));
            }
            nets.push(net);
        }
        Ok(())
    };
    for (lineno, line) in bookshelf_lines(&nets_text) {
        if let Some((key, value)) = key_value(line) {
            match key {
                "NumNets" => {
                    declared_nets = Some(parse_usize(&nets_path, lineno, value)?);
                    continue;
                }
                "NumPins" => {
                    declared_pins = Some(parse_usize(&nets_path, lineno, value)?);
                    continue;
                }
                "NetDegree" => {
                    close(&mut open, &mut nets)?;
                    let toks: Vec<&str> = value.split_whitespace().collect();
                    if toks.is_empty() {
                        return Err(parse_err(&nets_path, lineno, "NetDegree needs a degree"));
                    }
                    let degree = parse_usize(&nets_path, lineno, toks[0])?;
                    let name = toks
                        .get(1)
                        .map(|s| s.to_string())
                        .unwrap_or_else(|| format!("net{}", nets.len()));
                    open = Some((
                        lineno,
                        degree,
                        RawNet {
                            name,
                            pins: Vec::new(),
                        },
                    ));
                    continue;
                }
                _ => {}
            }
        }
        // pin line: nodename [I|O|B] [: x y]
        match &mut open {
            Some((_, _, net)) => {
                let body = line.split(':').next().unwrap_or(line);
                let toks: Vec<&str> = body.split_whitespace().collect();
                if toks.is_empty() {
                    return Err(parse_err(&nets_path, lineno, "empty pin line"));
                }
                if let Some(&dir) = toks.get(1) {
                    if !matches!(dir, "I" | "O" | "B") {
                        warn.ignored(&nets_path, dir);
                    }
                }
                net.pins.push(toks[0].to_string());
            }
            None => {
                return Err(parse_err(
                    &nets_path,
                    lineno,
                    "pin line outside a NetDegree block",
                ))
            }
        }
    }
    close(&mut open, &mut nets)?;
    if let Some(d) = declared_nets {
        if d != nets.len() {
            return Err(Error::Integrity(format!(
                "ingest: {} declares NumNets {d} but contains {}",
                nets_path.display(),
                nets.len()
            )));
        }
    }
    if let Some(d) = declared_pins {
        let actual: usize = nets.iter().map(|n| n.pins.len()).sum();
        if d != actual {
            log::warn!(
                "ingest: {}: NumPins {d} does not match the {actual} pins listed",
                nets_path.display()
            );
        }
    }

    // assemble cells in .nodes order; floorplan = bounding box of the bodies
    let mut cells = Vec::with_capacity(nodes.len());
    for (name, w, h) in nodes {
        let &(x, y) = placed.get(&name).ok_or_else(|| {
            Error::Integrity(format!(
                "ingest: node '{name}' has no placement in {}",
                pl_path.display()
            ))
        })?;
        cells.push(RawCell {
            name,
            lib: "STD".into(),
            x,
            y,
            w,
            h,
        });
    }
    if cells.is_empty() {
        return Err(Error::Domain(format!(
            "ingest: {} contains no nodes, floorplan extent undefined",
            nodes_path.display()
        )));
    }
    let min_x = cells.iter().map(|c| c.x).fold(f64::INFINITY, f64::min);
    let min_y = cells.iter().map(|c| c.y).fold(f64::INFINITY, f64::min);
    let max_x = cells
        .iter()
        .map(|c| c.x + c.w)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_y = cells
        .iter()
        .map(|c| c.y + c.h)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RawNetlist {
        floorplan: RawRect {
            x: min_x,
            y: min_y,
            w: max_x - min_x,
            h: max_y - min_y,
        },
        cells,
        nets,
        buffer_patterns: Vec::new(),
    })
}
