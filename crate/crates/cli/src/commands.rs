//! Subcommand bodies. Each returns every rendering of its result; `main`
//! picks one.

use std::fmt::Write as _;
use std::path::Path;

use latcomm::converse::{self, self_similar_partition};
use latcomm::format::{fmt_f64, to_json, to_json_pretty};
use latcomm::lattice::{Lattice2D, Point2};
use latcomm::partition::{Label, LabeledPartition, PartitionJson, TargetFunction};
use latcomm::protocol::{
    induced_partition, monte_carlo, sample_transcripts, sum_rate, BitExchange, Protocol, ProtocolTree, RunStats,
    VoronoiRefinement,
};
use latcomm::Error;
use serde::Serialize;
use serde_json::json;

use crate::{LatticeArgs, PartitionSource, PlotKind};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_MAX_DEPTH: u32 = 30;
const MIN_RESOLUTION: u32 = 16;

pub enum Failure {
    /// Bad flags or inputs; exit status 2.
    Usage(String),
    /// Anything that went wrong after the inputs were accepted; exit status 1.
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidProtocol(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

pub struct Rendered {
    pub json: String,
    pub csv: String,
    pub human: String,
    /// False when a verification check failed.
    pub passed: bool,
}

impl Rendered {
    fn new<T: Serialize>(value: &T, csv: Csv, human: String) -> Self {
        Rendered {
            json: to_json(value) + "\n",
            csv: csv.finish(),
            human,
            passed: true,
        }
    }
}

/// CSV text with a header row and 17-digit floats.
struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv(header.join(",") + "\n")
    }

    fn row(&mut self, fields: &[Field]) {
        let cells: Vec<String> = fields.iter().map(Field::render).collect();
        self.0.push_str(&cells.join(","));
        self.0.push('\n');
    }

    fn finish(self) -> String {
        self.0
    }
}

enum Field {
    F(f64),
    I(i64),
    U(u64),
    B(bool),
    S(String),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::F(x) => fmt_f64(*x),
            Field::I(n) => n.to_string(),
            Field::U(n) => n.to_string(),
            Field::B(b) => b.to_string(),
            Field::S(s) => s.clone(),
        }
    }
}

fn lattice(args: LatticeArgs) -> Result<Lattice2D, Failure> {
    Ok(Lattice2D::new(args.rho, args.theta)?)
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

pub fn simulate(
    lat: Option<LatticeArgs>,
    samples: u64,
    seed: u64,
    max_depth: u32,
    threads: Option<usize>,
    transcripts: Option<&Path>,
) -> Result<Rendered, Failure> {
    let protocol: Box<dyn Protocol> = match lat {
        Some(args) => Box::new(VoronoiRefinement::new(lattice(args)?, max_depth)?),
        None => Box::new(BitExchange::new(max_depth)?),
    };
    let stats: RunStats = monte_carlo(protocol.as_ref(), samples, seed, threads)?;
    if let Some(path) = transcripts {
        let mut text = String::new();
        for (_, t) in sample_transcripts(protocol.as_ref(), samples, seed)? {
            text.push_str(&t.to_line());
            text.push('\n');
        }
        std::fs::write(path, text).map_err(|e| io_failure(path, e))?;
    }
    let mut csv = Csv::new(&["samples", "mean_bits", "mean_rounds", "seed"]);
    csv.row(&[
        Field::U(stats.sample_count),
        Field::F(stats.mean_bits),
        Field::F(stats.mean_rounds),
        Field::U(stats.seed),
    ]);
    let human = format!(
        "samples      {}\nmean bits    {}\nmean rounds  {}\nseed         {:#x}\n",
        stats.sample_count,
        fmt_f64(stats.mean_bits),
        fmt_f64(stats.mean_rounds),
        stats.seed
    );
    Ok(Rendered::new(&stats, csv, human))
}

pub fn lattice_rates(args: LatticeArgs) -> Result<Rendered, Failure> {
    let sub = lattice(args)?.babai_subdivision()?;
    let rates = sub.round_rates();
    let crossed_mass = sub.crossed_mass();
    let value = json!({
        "rho": args.rho,
        "theta": args.theta,
        "rates": rates,
        "crossed_mass": crossed_mass,
        "error_free_cells": sub.cells().iter().filter(|c| c.is_error_free()).count(),
    });
    let mut csv = Csv::new(&["rho", "theta", "Q0", "P0", "R_bar", "N_bar", "crossed_mass"]);
    csv.row(&[
        Field::F(args.rho),
        Field::F(args.theta),
        Field::F(rates.q0),
        Field::F(rates.p0),
        Field::F(rates.r_bar),
        Field::F(rates.n_bar),
        Field::F(crossed_mass),
    ]);
    let list = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ");
    let human = format!(
        "Q       [{}]\nP       [{}]\nQ0      {}\nP0      {}\nR_bar   {} bits\nN_bar   {} rounds\n",
        list(&rates.q),
        list(&rates.p),
        fmt_f64(rates.q0),
        fmt_f64(rates.p0),
        fmt_f64(rates.r_bar),
        fmt_f64(rates.n_bar)
    );
    Ok(Rendered::new(&value, csv, human))
}

pub fn lattice_nearest(args: LatticeArgs, x: f64, y: f64, max_depth: u32) -> Result<Rendered, Failure> {
    let lat = lattice(args)?;
    let x = Point2::new(x, y);
    if !x.is_finite() {
        return Err(Failure::Usage("--x and --y must be finite".into()));
    }
    let babai = lat.nearest_plane_point(x);
    let proto = VoronoiRefinement::new(lat, max_depth)?;
    let (nearest, t) = proto.nearest_point(x)?;
    let value = json!({
        "input": [x.x1, x.x2],
        "babai": babai.coeffs,
        "nearest": nearest.coeffs,
        "point": [nearest.point.x1, nearest.point.x2],
        "transcript": t.messages,
        "bits": t.bits(),
        "rounds": t.rounds(),
    });
    let mut csv = Csv::new(&["x", "y", "babai_1", "babai_2", "nearest_1", "nearest_2", "bits", "rounds"]);
    csv.row(&[
        Field::F(x.x1),
        Field::F(x.x2),
        Field::I(babai.coeffs[0]),
        Field::I(babai.coeffs[1]),
        Field::I(nearest.coeffs[0]),
        Field::I(nearest.coeffs[1]),
        Field::U(t.bits()),
        Field::U(t.rounds()),
    ]);
    let human = format!(
        "({}, {})\npoint       ({}, {})\nbabai       ({}, {})\ntranscript  {}\nbits        {}\nrounds      {}\n",
        nearest.coeffs[0],
        nearest.coeffs[1],
        fmt_f64(nearest.point.x1),
        fmt_f64(nearest.point.x2),
        babai.coeffs[0],
        babai.coeffs[1],
        t.to_line(),
        t.bits(),
        t.rounds()
    );
    Ok(Rendered::new(&value, csv, human))
}

pub fn entropy_ratio(v: f64) -> Result<Rendered, Failure> {
    let ratio = converse::entropy_ratio(v)?;
    let mut csv = Csv::new(&["v", "ratio"]);
    csv.row(&[Field::F(v), Field::F(ratio)]);
    Ok(Rendered::new(&json!({ "v": v, "ratio": ratio }), csv, fmt_f64(ratio) + "\n"))
}

pub fn optimize_ratio(tol: f64) -> Result<Rendered, Failure> {
    let m = converse::minimize_entropy_ratio(tol)?;
    let mut csv = Csv::new(&["v_star", "ratio_min", "tolerance", "unique"]);
    csv.row(&[Field::F(m.v_star), Field::F(m.ratio_min), Field::F(m.tolerance), Field::B(m.unique)]);
    let human = format!(
        "v*       {}\nminimum  {}\nunique   {}\n",
        fmt_f64(m.v_star),
        fmt_f64(m.ratio_min),
        m.unique
    );
    Ok(Rendered::new(&m, csv, human))
}

pub fn partition_show(
    input: Option<&Path>,
    source: Option<PartitionSource>,
    max_depth: u32,
    v: f64,
) -> Result<Rendered, Failure> {
    let part = match (input, source) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            let schema: PartitionJson = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: not a partition: {e}", path.display())))?;
            LabeledPartition::from_schema(&schema)?
        }
        (None, Some(PartitionSource::BitExchange)) => induced_partition(&BitExchange::new(max_depth)?)?,
        (None, Some(PartitionSource::Quadrant)) => induced_partition(&ProtocolTree::quadrant())?,
        (None, Some(PartitionSource::SelfSimilar)) => self_similar_partition(v, max_depth)?,
        (None, None) => return Err(Failure::Usage("partition-show needs --in <file> or --protocol".into())),
    };
    let schema = part.to_schema();
    let mut csv = Csv::new(&["x_lo", "x_hi", "y_lo", "y_hi", "label", "prob"]);
    for c in &schema.cells {
        let label = serde_json::to_value(c.label).expect("labels serialize");
        csv.row(&[
            Field::F(c.rect.x_lo()),
            Field::F(c.rect.x_hi()),
            Field::F(c.rect.y_lo()),
            Field::F(c.rect.y_hi()),
            Field::S(label.as_str().unwrap_or_default().to_string()),
            Field::F(c.prob),
        ]);
    }
    let mut human = String::new();
    let _ = writeln!(human, "cells                   {}", part.len());
    let _ = writeln!(human, "entropy                 {} bits", fmt_f64(part.entropy()));
    let _ = writeln!(human, "undecided mass          {}", fmt_f64(1.0 - decided_mass(&part)));
    for (name, f) in [("min indicator", TargetFunction::MinIndicator), ("quadrant", TargetFunction::Quadrant)] {
        let _ = writeln!(human, "respects {name:<15}{}", part.decided_cells_respect(f));
    }
    Ok(Rendered {
        json: to_json_pretty(&schema) + "\n",
        csv: csv.finish(),
        human,
        passed: true,
    })
}

fn decided_mass(part: &LabeledPartition) -> f64 {
    [Label::P, Label::Q].iter().flat_map(|&l| part.label_probabilities(l)).sum()
}

pub fn verify_converse(grid_units: Option<u32>) -> Result<Rendered, Failure> {
    let r = converse::verify_converse(grid_units)?;
    let mut csv = Csv::new(&["check", "passed"]);
    let mut human = String::new();
    for (name, ok) in [
        ("example1", r.example1.passed),
        ("thm3", r.thm3.passed),
        ("thm5", r.thm5.passed),
    ] {
        csv.row(&[Field::S(name.into()), Field::B(ok)]);
        let _ = writeln!(human, "{:<9}{}", name, if ok { "PASS" } else { "FAIL" });
    }
    let _ = writeln!(human, "total bits  {}", fmt_f64(r.thm5.total_bits));
    let _ = writeln!(human, "bit exchange at depth {}  {}", converse::CROSS_CHECK_DEPTH, fmt_f64(r.thm5.bit_exchange_rate));
    if let Some(g) = &r.example1.grid {
        let _ = writeln!(
            human,
            "grid oracle  {} feasible points, minimum {}",
            g.feasible_points,
            fmt_f64(g.min_entropy)
        );
    }
    let mut out = Rendered::new(&r, csv, human);
    out.passed = r.passed;
    Ok(out)
}

pub fn plot_data(which: PlotKind, resolution: u32, lat: Option<LatticeArgs>) -> Result<Rendered, Failure> {
    if resolution < MIN_RESOLUTION {
        return Err(Failure::Usage(format!("--resolution must be at least {MIN_RESOLUTION}")));
    }
    let mut rows: Vec<serde_json::Value> = Vec::new();
    let csv = match which {
        PlotKind::RatioCurve => {
            let mut csv = Csv::new(&["v", "ratio"]);
            for i in 1..resolution {
                let v = f64::from(i) / f64::from(resolution);
                let r = converse::entropy_ratio(v)?;
                csv.row(&[Field::F(v), Field::F(r)]);
                rows.push(json!({ "v": v, "ratio": r }));
            }
            csv
        }
        PlotKind::Convergence => {
            let mut csv = Csv::new(&["depth", "entropy"]);
            for d in 1..=resolution {
                let h = sum_rate(&BitExchange::new(d)?)?;
                csv.row(&[Field::U(u64::from(d)), Field::F(h)]);
                rows.push(json!({ "depth": d, "entropy": h }));
            }
            csv
        }
        PlotKind::Subdivision => {
            let args = lat.ok_or_else(|| Failure::Usage("--which subdivision needs --rho and --theta".into()))?;
            let sub = lattice(args)?.babai_subdivision()?;
            let mut csv = Csv::new(&["x_lo", "x_hi", "y_lo", "y_hi", "error_free", "prob"]);
            for c in sub.cells() {
                csv.row(&[
                    Field::F(c.rect.x_lo),
                    Field::F(c.rect.x_hi),
                    Field::F(c.rect.y_lo),
                    Field::F(c.rect.y_hi),
                    Field::B(c.is_error_free()),
                    Field::F(sub.probability(&c.rect)),
                ]);
            }
            let text = csv.finish();
            return Ok(Rendered {
                json: to_json(&sub.to_schema()) + "\n",
                human: text.clone(),
                csv: text,
                passed: true,
            });
        }
    };
    let text = csv.finish();
    Ok(Rendered {
        json: to_json(&rows) + "\n",
        human: text.clone(),
        csv: text,
        passed: true,
    })
}
