// SPDX-License-Identifier: Apache-2.0

//! Post-partitioning cut metrics: nets cut, total wire-length cut as a
//! percentage of system wire-length, and the cut-length distribution
//! normalized to the floorplan half-perimeter. Exports are byte-deterministic
//! so repeated runs diff clean.

use crate::cluster::Method;
use crate::error::{Error, Result};
use crate::model::{Design, Hypergraph};
use crate::partition::Partition;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Histogram shape: 100 bins of width 0.01 covering [0, 1], plus one
/// overflow bin for normalized lengths above 1.
pub const HISTOGRAM_BINS: usize = 101;

/// Cut quality of one partitioned design under one clustering method.
#[derive(Debug, Clone, Serialize)]
pub struct CutReport {
    pub method: Method,
    pub nets_cut: usize,
    /// Σ cut net lengths / Σ all net lengths, in percent.
    pub total_wl_cut_pct: f64,
    /// Lengths of the source nets of cut hyperedges, by ascending edge id.
    pub cut_lengths: Vec<f64>,
    /// cut_lengths / (floorplan width + height).
    pub normalized_cut_lengths: Vec<f64>,
    pub median_norm: f64,
    pub mean_norm: f64,
    pub histogram: Vec<u64>,
}

fn bin_index(v: f64) -> usize {
    if v > 1.0 {
        HISTOGRAM_BINS - 1
    } else {
        ((v / 0.01) as usize).min(HISTOGRAM_BINS - 2)
    }
}

pub(crate) fn histogram(values: &[f64]) -> Vec<u64> {
    let mut bins = vec![0u64; HISTOGRAM_BINS];
    for &v in values {
        bins[bin_index(v)] += 1;
    }
    bins
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Measures the cut: which source nets the partition severs, how much of the
/// system wire-length they carry, and how their lengths distribute relative
/// to the floorplan half-perimeter.
pub fn cut_report(
    design: &Design,
    hg: &Hypergraph,
    partition: &Partition,
    method: Method,
) -> Result<CutReport> {
    if partition.side.len() != hg.vertex_count() {
        return Err(Error::Integrity(format!(
            "report: partition covers {} vertices but the hypergraph has {}",
            partition.side.len(),
            hg.vertex_count()
        )));
    }
    let total_wl = design.total_wirelength();
    if total_wl <= 0.0 {
        return Err(Error::Domain(
            "report: total system wire-length is zero, cut percentage undefined".into(),
        ));
    }
    let divisor = design.floorplan.half_perimeter();
    let cut_lengths: Vec<f64> = partition
        .cut_edges
        .iter()
        .map(|&e| design.nets[hg.edges[e].source_net].length)
        .collect();
    let normalized: Vec<f64> = cut_lengths.iter().map(|&l| l / divisor).collect();
    let cut_wl: f64 = cut_lengths.iter().sum();
    let mut sorted = normalized.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = if normalized.is_empty() {
        0.0
    } else {
        normalized.iter().sum::<f64>() / normalized.len() as f64
    };
    Ok(CutReport {
        method,
        nets_cut: cut_lengths.len(),
        total_wl_cut_pct: cut_wl / total_wl * 100.0,
        histogram: histogram(&normalized),
        median_norm: median(&sorted),
        mean_norm: mean,
        cut_lengths,
        normalized_cut_lengths: normalized,
    })
}

/// One line of the method-comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub nets_cut: usize,
    pub total_wl_cut_pct: f64,
    pub median_norm: f64,
    pub mean_norm: f64,
    /// Fewest nets cut across the compared methods (ties all flagged).
    pub fewest_nets_cut: bool,
    /// Largest wire-length percentage cut (ties all flagged).
    pub largest_wl_pct: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Folds per-method reports into one table, flagging the minimum nets-cut
/// and the maximum wire-length-cut rows.
pub fn compare_methods(reports: &[CutReport]) -> Result<ComparisonTable> {
    if reports.is_empty() {
        return Err(Error::Domain(
            "report: comparison needs at least one report".into(),
        ));
    }
    let min_nets = reports.iter().map(|r| r.nets_cut).min().unwrap();
    let max_pct = reports
        .iter()
        .map(|r| r.total_wl_cut_pct)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonTable {
        rows: reports
            .iter()
            .map(|r| ComparisonRow {
                method: r.method,
                nets_cut: r.nets_cut,
                total_wl_cut_pct: r.total_wl_cut_pct,
                median_norm: r.median_norm,
                mean_norm: r.mean_norm,
                fewest_nets_cut: r.nets_cut == min_nets,
                largest_wl_pct: r.total_wl_cut_pct == max_pct,
            })
            .collect(),
    })
}

pub const REPORT_CSV_HEADER: &str = "method,nets_cut,total_wl_cut_pct,median_norm,mean_norm";

fn csv_row(method: Method, nets: usize, pct: f64, med: f64, mean: f64) -> String {
    format!("{method},{nets},{pct:.4},{med:.6},{mean:.6}\n")
}

/// Single-report CSV: the documented header plus one row.
pub fn report_csv(r: &CutReport) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    out.push_str(&csv_row(
        r.method,
        r.nets_cut,
        r.total_wl_cut_pct,
        r.median_norm,
        r.mean_norm,
    ));
    out
}

/// Comparison CSV: one row per method plus the two flag columns.
pub fn table_csv(t: &ComparisonTable) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push_str(",fewest_nets_cut,largest_wl_pct\n");
    for row in &t.rows {
        let base = csv_row(
            row.method,
            row.nets_cut,
            row.total_wl_cut_pct,
            row.median_norm,
            row.mean_norm,
        );
        out.push_str(base.trim_end());
        let _ = writeln!(out, ",{},{}", row.fewest_nets_cut, row.largest_wl_pct);
    }
    out
}

/// Structured (JSON) rendering, including raw and normalized samples plus
/// the histogram, so plots can be regenerated from the artifact alone.
pub fn report_json(r: &CutReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serialization is infallible");
    s.push('\n');
    s
}

pub fn table_json(t: &ComparisonTable) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("table serialization is infallible");
    s.push('\n');
    s
}

/// Self-contained SVG of the normalized cut-length histogram, with a solid
/// rule at the median and a dashed rule at the mean.
pub fn histogram_svg(r: &CutReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const ML: f64 = 50.0; // left margin
    const MR: f64 = 15.0;
    const MT: f64 = 35.0;
    const MB: f64 = 45.0;
    let pw = W - ML - MR;
    let ph = H - MT - MB;
    let max_count = r.histogram.iter().copied().max().unwrap_or(0).max(1) as f64;
    // x covers [0, 1.01]: 100 regular bins plus the overflow bin
    let span = 0.01 * HISTOGRAM_BINS as f64;
    let x_of = |v: f64| ML + (v.clamp(0.0, span) / span) * pw;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(
        s,
        "  <text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{} cut-length distribution (nets cut: {})</text>",
        W / 2.0,
        r.method,
        r.nets_cut
    );
    // bars
    let bw = pw / HISTOGRAM_BINS as f64;
    for (i, &count) in r.histogram.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let bh = count as f64 / max_count * ph;
        let _ = writeln!(
            s,
            "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#4878a8\"/>",
            ML + i as f64 * bw,
            MT + ph - bh,
            bw,
            bh
        );
    }
    // axes
    let _ = writeln!(
        s,
        "  <line x1=\"{ML:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        MT + ph,
        W - MR,
        MT + ph
    );
    let _ = writeln!(
        s,
        "  <line x1=\"{ML:.2}\" y1=\"{MT:.2}\" x2=\"{ML:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        MT + ph
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let x = x_of(tick);
        let _ = writeln!(
            s,
            "  <line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            MT + ph,
            MT + ph + 5.0
        );
        let _ = writeln!(
            s,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{tick:.2}</text>",
            MT + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">cut length / floorplan (width + height)</text>",
        ML + pw / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        s,
        "  <text x=\"15\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 {:.2})\">nets</text>",
        MT + ph / 2.0,
        MT + ph / 2.0
    );
    let _ = writeln!(
        s,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">max {}</text>",
        ML - 5.0,
        MT + 10.0,
        r.histogram.iter().copied().max().unwrap_or(0)
    );
    // distribution rules: solid median, dashed mean
    if r.nets_cut > 0 {
        let _ = writeln!(
            s,
            "  <line x1=\"{:.2}\" y1=\"{MT:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#202020\" stroke-width=\"1.5\"/>",
            x_of(r.median_norm),
            x_of(r.median_norm),
            MT + ph
        );
        let _ = writeln!(
            s,
            "  <line x1=\"{:.2}\" y1=\"{MT:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#a83838\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>",
            x_of(r.mean_norm),
            x_of(r.mean_norm),
            MT + ph
        );
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    Svg,
}

/// Writes a report artifact; bytes are a pure function of the report.
pub fn export_report(r: &CutReport, path: &Path, format: ExportFormat) -> Result<()> {
    let content = match format {
        ExportFormat::Csv => report_csv(r),
        ExportFormat::Json => report_json(r),
        ExportFormat::Svg => histogram_svg(r),
    };
    std::fs::write(path, content)?;
    Ok(())
}

/// Writes a comparison-table artifact (CSV or JSON).
pub fn export_table(t: &ComparisonTable, path: &Path, format: ExportFormat) -> Result<()> {
    let content = match format {
        ExportFormat::Csv => table_csv(t),
        ExportFormat::Json => table_json(t),
        ExportFormat::Svg => {
            return Err(Error::Domain(
                "report: histogram export applies to a single report, not a table".into(),
            ))
        }
    };
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{cluster_none, Method};
    use crate::model::{annotate_lengths, build_hypergraph, Cell, Design, Net, Point, Rect};
    use crate::partition::{fm_bipartition, recount_cut, BalanceSpec, Partition};

    /// Pairs of cells at controlled spacing so each net has a chosen length.
    fn paired_design(lengths: &[f64]) -> Design {
        let mut cells = Vec::new();
        let mut nets = Vec::new();
        for (i, &len) in lengths.iter().enumerate() {
            let y = i as f64 * 2.0;
            let a = cells.len();
            cells.push(Cell {
                id: a,
                name: format!("a{i}"),
                origin: Point::new(0.0, y),
                width: 1.0,
                height: 1.0,
                is_buffer: false,
            });
            cells.push(Cell {
                id: a + 1,
                name: format!("b{i}"),
                origin: Point::new(len, y),
                width: 1.0,
                height: 1.0,
                is_buffer: false,
            });
            nets.push(Net {
                id: i,
                pins: vec![a, a + 1],
                length: 0.0,
            });
        }
        let d = Design::new(cells, nets, Rect::new(0.0, 0.0, 100.0, 100.0)).unwrap();
        annotate_lengths(d).unwrap()
    }

    fn partition_with_sides(hg: &Hypergraph, side: Vec<u8>) -> Partition {
        let (cut_edges, cut_weight) = recount_cut(hg, &side);
        Partition {
            side,
            cut_edges,
            cut_weight,
            side_areas: [0.0, 0.0],
            restarts_used: 1,
            rng_seed: 0,
        }
    }

    use crate::model::Hypergraph;

    #[test]
    fn percentages_follow_the_cut_lengths() {
        // nets of length 2, 4 and 14; cutting the first two cuts 30% of 20
        let d = paired_design(&[2.0, 4.0, 14.0]);
        let c = cluster_none(&d);
        let hg = build_hypergraph(&d, &c).unwrap();
        let p = partition_with_sides(&hg, vec![0, 1, 0, 1, 0, 0]);
        let r = cut_report(&d, &hg, &p, Method::Nc).unwrap();
        assert_eq!(r.nets_cut, 2);
        assert_eq!(r.cut_lengths, vec![2.0, 4.0]);
        assert!((r.total_wl_cut_pct - 30.0).abs() < 1e-9);
    }

    #[test]
    fn normalization_uses_the_floorplan_half_perimeter() {
        let d = paired_design(&[50.0]);
        let c = cluster_none(&d);
        let hg = build_hypergraph(&d, &c).unwrap();
        let p = partition_with_sides(&hg, vec![0, 1]);
        let r = cut_report(&d, &hg, &p, Method::Nc).unwrap();
        assert_eq!(r.normalized_cut_lengths, vec![0.25]);
        assert_eq!(r.median_norm, 0.25);
        assert_eq!(r.mean_norm, 0.25);
    }

    #[test]
    fn empty_cut_reports_zeros() {
        let d = paired_design(&[5.0, 7.0]);
        let c = cluster_none(&d);
        let hg = build_hypergraph(&d, &c).unwrap();
        let p = partition_with_sides(&hg, vec![0, 0, 1, 1]);
        let r = cut_report(&d, &hg, &p, Method::Pwl).unwrap();
        assert_eq!(r.nets_cut, 0);
        assert_eq!(r.total_wl_cut_pct, 0.0);
        assert_eq!(r.median_norm, 0.0);
        assert_eq!(r.mean_norm, 0.0);
        assert!(r.histogram.iter().all(|&b| b == 0));
    }

    #[test]
    fn zero_total_wirelength_is_an_error() {
        // single-pin nets only: every length is zero
        let cells = vec![Cell {
            id: 0,
            name: "a".into(),
            origin: Point::new(1.0, 1.0),
            width: 1.0,
            height: 1.0,
            is_buffer: false,
        }];
        let nets = vec![Net {
            id: 0,
            pins: vec![0],
            length: 0.0,
        }];
        let d =
            annotate_lengths(Design::new(cells, nets, Rect::new(0.0, 0.0, 10.0, 10.0)).unwrap())
                .unwrap();
        let c = cluster_none(&d);
        let hg = build_hypergraph(&d, &c).unwrap();
        let p = partition_with_sides(&hg, vec![0]);
        assert!(matches!(
            cut_report(&d, &hg, &p, Method::Nc),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn conservation_and_recount_hold_after_fm() {
        let d = paired_design(&[3.0, 6.0, 9.0, 12.0, 15.0]);
        let c = cluster_none(&d);
        let hg = build_hypergraph(&d, &c).unwrap();
        let p = fm_bipartition(&hg, &BalanceSpec::default(), 4, 42).unwrap();
        let r = cut_report(&d, &hg, &p, Method::Nc).unwrap();
        // conservation: cut + uncut = total
        let total: f64 = d.nets.iter().map(|n| n.length).sum();
        let cut: f64 = r.cut_lengths.iter().sum();
        let uncut: f64 = d
            .nets
            .iter()
            .filter(|n| !p.cut_edges.iter().any(|&e| hg.edges[e].source_net == n.id))
            .map(|n| n.length)
            .sum();
        assert!((cut + uncut - total).abs() <= 1e-9 * total);
        // recount: nets cut equals a scan through clustering + partition
        let independent = d
            .nets
            .iter()
            .filter(|n| {
                let mut sides = [false, false];
                for &pin in &n.pins {
                    sides[p.side[c.assignment[pin]] as usize] = true;
                }
                sides[0] && sides[1]
            })
            .count();
        assert_eq!(independent, r.nets_cut);
    }

    #[test]
    fn histogram_bins_are_hundredths_with_overflow() {
        let bins = histogram(&[0.0, 0.005, 0.011, 0.999, 1.0, 1.5]);
        assert_eq!(bins.len(), HISTOGRAM_BINS);
        assert_eq!(bins[0], 2); // 0.0 and 0.005
        assert_eq!(bins[1], 1); // 0.011
        assert_eq!(bins[99], 2); // 0.999 and exactly 1.0
        assert_eq!(bins[100], 1); // 1.5 overflows
        assert_eq!(bins.iter().sum::<u64>(), 6);
    }

    fn report_stub(method: Method, nets_cut: usize, pct: f64) -> CutReport {
        CutReport {
            method,
            nets_cut,
            total_wl_cut_pct: pct,
            cut_lengths: vec![],
            normalized_cut_lengths: vec![],
            median_norm: 0.0,
            mean_norm: 0.0,
            histogram: vec![0; HISTOGRAM_BINS],
        }
    }

    #[test]
    fn comparison_flags_min_nets_and_max_pct() {
        let t = compare_methods(&[
            report_stub(Method::Nc, 100, 3.5),
            report_stub(Method::Pwl, 110, 6.5),
        ])
        .unwrap();
        assert!(t.rows[0].fewest_nets_cut && !t.rows[0].largest_wl_pct);
        assert!(!t.rows[1].fewest_nets_cut && t.rows[1].largest_wl_pct);
    }

    #[test]
    fn single_report_is_flagged_on_both() {
        let t = compare_methods(&[report_stub(Method::Hg, 7, 1.0)]).unwrap();
        assert!(t.rows[0].fewest_nets_cut && t.rows[0].largest_wl_pct);
    }

    #[test]
    fn ties_flag_every_tied_row() {
        let t = compare_methods(&[
            report_stub(Method::Nc, 50, 2.0),
            report_stub(Method::Km, 50, 4.0),
        ])
        .unwrap();
        assert!(t.rows[0].fewest_nets_cut && t.rows[1].fewest_nets_cut);
        assert!(!t.rows[0].largest_wl_pct && t.rows[1].largest_wl_pct);
    }

    #[test]
    fn empty_comparison_is_rejected() {
        assert!(compare_methods(&[]).is_err());
    }

    #[test]
    fn csv_uses_the_documented_header() {
        let r = report_stub(Method::Nc, 2, 30.0);
        let csv = report_csv(&r);
        assert_eq!(
            csv,
            "method,nets_cut,total_wl_cut_pct,median_norm,mean_norm\nnc,2,30.0000,0.000000,0.000000\n"
        );
        let t = compare_methods(&[r]).unwrap();
        let tcsv = table_csv(&t);
        assert!(tcsv.starts_with(
            "method,nets_cut,total_wl_cut_pct,median_norm,mean_norm,fewest_nets_cut,largest_wl_pct\n"
        ));
        assert!(tcsv.contains("nc,2,30.0000,0.000000,0.000000,true,true\n"));
    }

    #[test]
    fn exports_are_byte_deterministic() {
        let d = paired_design(&[2.0, 4.0]);
        let c = cluster_none(&d);
        let hg = build_hypergraph(&d, &c).unwrap();
        let p = partition_with_sides(&hg, vec![0, 1, 0, 1]);
        let r = cut_report(&d, &hg, &p, Method::Km).unwrap();
        assert_eq!(report_json(&r), report_json(&r));
        assert_eq!(histogram_svg(&r), histogram_svg(&r));
        assert_eq!(report_csv(&r), report_csv(&r));
    }

    #[test]
    fn empty_histogram_still_renders_axes() {
        let r = report_stub(Method::Pwl, 0, 0.0);
        let svg = histogram_svg(&r);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("0.50"), "axis ticks missing: {svg}");
        assert!(!svg.contains("stroke-dasharray"), "no mean rule when empty");
    }

    #[test]
    fn svg_marks_median_solid_and_mean_dashed() {
        let mut r = report_stub(Method::Nc, 3, 10.0);
        r.median_norm = 0.2;
        r.mean_norm = 0.4;
        r.histogram[20] = 3;
        let svg = histogram_svg(&r);
        assert!(svg.contains("stroke-dasharray=\"6 4\""));
    }

    #[test]
    fn table_svg_export_is_rejected() {
        let t = compare_methods(&[report_stub(Method::Nc, 1, 1.0)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert!(export_table(&t, &dir.path().join("t.svg"), ExportFormat::Svg).is_err());
        export_table(&t, &dir.path().join("t.csv"), ExportFormat::Csv).unwrap();
        let r = report_stub(Method::Nc, 1, 1.0);
        export_report(&r, &dir.path().join("r.svg"), ExportFormat::Svg).unwrap();
        assert!(dir.path().join("t.csv").exists());
        assert!(dir.path().join("r.svg").exists());
    }
}
