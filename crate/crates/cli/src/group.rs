use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde_json::json;

use cam_core::groups::{
    build_chain, build_pattern_family, export_pgm, forbidden_patterns, group_limit_pair,
    lattice_generators, verify_gap_property, verify_periodicity, Chain, ChainSpec, GridBox,
    PatternFamily, PatternZd,
};

use crate::{Failure, Out};

#[derive(Args)]
pub struct ChainArgs {
    /// Chain config file (key=value lines).
    #[arg(long, conflicts_with_all = ["dim", "scales"])]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, value_delimiter = ',', default_value = "5,7,9")]
    scales: Vec<u64>,
}

impl ChainArgs {
    fn chain(&self) -> Result<Chain, Failure> {
        let spec = match &self.config {
            Some(path) => fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?
                .parse()?,
            None => ChainSpec::new(self.dim, self.scales.clone()),
        };
        Ok(build_chain(spec)?)
    }

    fn family(&self) -> Result<PatternFamily, Failure> {
        let chain = self.chain()?;
        let depth = chain.depth();
        Ok(build_pattern_family(&chain, depth)?)
    }
}

#[derive(Subcommand)]
pub enum GroupCmd {
    /// Build the chain and report transversals, layouts and patterns.
    Build {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Identity differences, periodicity, gap property and limit pairs.
    Verify {
        #[command(flatten)]
        chain: ChainArgs,
        /// Gap level k; all 1 ≤ k < n ≤ depth when omitted.
        #[arg(long, requires = "n")]
        k: Option<usize>,
        #[arg(long, requires = "k")]
        n: Option<usize>,
        /// Forbidden-pattern ball radius.
        #[arg(long, default_value_t = 1)]
        r: u32,
    },
    /// Ball patterns absent from the points x_P, P = P_{j,a} with j < below.
    Forbidden {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        below: usize,
        #[arg(long, default_value_t = 1)]
        r: u32,
    },
    /// Write P_{level,parity} as a binary PGM image.
    Export {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 0)]
        parity: u8,
        #[arg(long)]
        out: PathBuf,
        /// Pixels per cell side.
        #[arg(long, default_value_t = 1)]
        scale: usize,
    },
}

fn pattern_pair(family: &PatternFamily, level: usize) -> Result<[&PatternZd; 2], Failure> {
    Ok([family.pattern(level, 0)?, family.pattern(level, 1)?])
}

pub fn run<W: Write>(cmd: GroupCmd, out: &mut Out<W>) -> Result<(), Failure> {
    match cmd {
        GroupCmd::Build { chain } => {
            let family = chain.family()?;
            let c = family.chain();
            for t in &c.transversals {
                out.emit(
                    "group.transversal",
                    &json!({
                        "level": t.level, "modulus": t.modulus, "step": t.step,
                        "cells": t.cell_count, "step_reps": t.step_reps.len(),
                    }),
                )?;
            }
            for layout in &c.layouts {
                out.emit("group.layout", layout)?;
            }
            for level in 0..=family.depth() {
                for p in pattern_pair(&family, level)? {
                    out.emit("group.pattern", &p.summary())?;
                }
            }
        }
        GroupCmd::Verify { chain, k, n, r } => {
            let family = chain.family()?;
            let depth = family.depth();
            let dim = family.chain().dim();
            let identity = vec![0i64; dim];
            for level in 0..=depth {
                let [p0, p1] = pattern_pair(&family, level)?;
                let diff = p0.diff(p1)?;
                let ok = diff == [identity.clone()];
                out.check("group.diff", &json!({ "level": level, "diff": diff, "ok": ok }), ok)?;
            }
            for level in 1..=depth {
                let m = family.chain().modulus(level);
                let region = GridBox::centered(dim, m as i64);
                for p in pattern_pair(&family, level)? {
                    let report = verify_periodicity(p, &region, &lattice_generators(dim, m))?;
                    let ok = report.periodic;
                    out.check("group.periodicity", &report, ok)?;
                }
            }
            for level in 1..depth {
                let half = ((family.chain().modulus(level) as i64) - 1) / 2;
                let region = GridBox::centered(dim, half.min(2));
                let pair = group_limit_pair(&family, level, &region)?;
                let ok = pair.stabilized != Some(false);
                out.check(
                    "group.limit_pair",
                    &json!({
                        "level": level, "region": region, "diff": pair.diff,
                        "stabilized": pair.stabilized,
                    }),
                    ok,
                )?;
            }
            let pairs: Vec<(usize, usize)> = match (k, n) {
                (Some(k), Some(n)) => vec![(k, n)],
                _ => (1..depth)
                    .flat_map(|k| (k + 1..=depth).map(move |n| (k, n)))
                    .collect(),
            };
            for (k, n) in pairs {
                for report in verify_gap_property(&family, k, n, r)? {
                    let ok = report.passed();
                    out.check("group.gap", &report, ok)?;
                }
            }
        }
        GroupCmd::Forbidden { chain, below, r } => {
            let family = chain.family()?;
            let points = (0..below)
                .map(|j| pattern_pair(&family, j))
                .collect::<Result<Vec<_>, _>>()?
                .concat();
            let set = forbidden_patterns(&points, family.chain().dim(), r)?;
            out.emit("group.forbidden", &json!({ "below": below, "set": set }))?;
        }
        GroupCmd::Export {
            chain,
            level,
            parity,
            out: path,
            scale,
        } => {
            let family = chain.family()?;
            let pattern = family.pattern(level, parity)?;
            let image = export_pgm(pattern, scale)?;
            fs::write(&path, &image)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            let px = pattern.side() as usize * scale;
            out.emit(
                "group.export",
                &json!({
                    "level": level, "parity": parity, "path": path.display().to_string(),
                    "width": px, "height": px, "bytes": image.len(),
                }),
            )?;
        }
    }
    Ok(())
}
