use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::ParamVector;
use super::spec::AnsatzSpec;
use crate::error::{check_len, Error, Result};

pub const LAYOUT_VERSION: u32 = 1;

/// First line of a checkpoint file, after the leading `# `.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub layout_version: u32,
    pub spec: AnsatzSpec,
    pub seed: u64,
    pub t: f64,
    pub n_params: usize,
}

/// Write `q` as one value per line under a JSON header line. Values round-trip exactly.
pub fn write_checkpoint(path: &Path, spec: &AnsatzSpec, q: &[f64], t: f64) -> Result<()> {
    check_len("checkpoint parameters", spec.n_params(), q.len())?;
    let header = CheckpointHeader {
        layout_version: LAYOUT_VERSION,
        spec: spec.clone(),
        seed: spec.seed,
        t,
        n_params: q.len(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {}", serde_json::to_string(&header)?)?;
    writeln!(w, "q")?;
    for v in q {
        writeln!(w, "{v:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, ParamVector)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    let json = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::Config(format!("{}: missing checkpoint header", path.display())))?;
    let header: CheckpointHeader = serde_json::from_str(json)?;
    if header.layout_version != LAYOUT_VERSION {
        return Err(Error::Config(format!(
            "checkpoint layout version {} not supported",
            header.layout_version
        )));
    }
    let mut q = Vec::with_capacity(header.n_params);
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line == "q" {
            continue;
        }
        q.push(
            line.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad checkpoint value {line:?}: {e}")))?,
        );
    }
    check_len("checkpoint parameters", header.spec.n_params(), q.len())?;
    Ok((header, ParamVector(q)))
}
