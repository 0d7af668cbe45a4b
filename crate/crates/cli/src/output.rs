use std::fs;
use std::io::{self, Write};
use std::path::Path;

use ionqrm_core::EvolutionResult;

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub const EVOLVE_CSV_HEADER: &str = "time,P_e,mean_n,fidelity,norm_residual";

pub fn evolution_csv(result: &EvolutionResult) -> String {
    let mut out = String::from(EVOLVE_CSV_HEADER);
    out.push('\n');
    for r in &result.records {
        let fid = r.fidelity.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.time),
            fmt_f64(r.p_e),
            fmt_f64(r.mean_n),
            fid,
            fmt_f64(r.norm_residual)
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(usize),
    Real(f64),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Self::Int(n) => n.to_string(),
            Self::Real(x) => fmt_f64(*x),
            Self::Empty => String::new(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Self::Int(n) => (*n).into(),
            Self::Real(x) => (*x).into(),
            Self::Empty => serde_json::Value::Null,
        }
    }
}

pub fn table_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
