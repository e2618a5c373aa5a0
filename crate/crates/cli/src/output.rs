//! CSV schemas.
//!
//! | file     | columns                                  |
//! |----------|------------------------------------------|
//! | strategy | `t,x,y,u_star,a_star,region`             |
//! | sweep    | `param,u_star,a_star,region`             |
//! | paths    | `path,step,t,x,y,u,a`                    |
//!
//! Floats use Rust's shortest round-trip formatting, so output is
//! byte-for-byte reproducible.

use std::io::Write;

use retention_core::simulate::PathRecord;
use retention_core::{Region, StatePoint, StrategyPoint};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub u_star: f64,
    pub a_star: f64,
    pub region: Region,
}

impl StrategyRow {
    pub fn new(s: &StatePoint, sp: &StrategyPoint) -> Self {
        Self {
            t: s.t,
            x: s.x,
            y: s.y,
            u_star: sp.u_star,
            a_star: sp.a_star,
            region: sp.region,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub u_star: f64,
    pub a_star: f64,
    pub region: Region,
}

pub fn write_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string<R: Serialize>(rows: &[R]) -> csv::Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn write_paths<W: Write>(out: W, rows: &[PathRecord]) -> csv::Result<()> {
    write_csv(out, rows)
}
