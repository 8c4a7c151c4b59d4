//! Hopf–Cole oracle data on disk: boundary values for the lift, the exact field on the
//! test grid, and the same field from a refined oracle for the self-convergence check.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use stnp_core::ansatz::BoundaryTable;
use stnp_core::metrics::{relative_l2, test_grid};
use stnp_core::reference::{HopfCole, HopfColeConfig};

use super::initial_fn;
use crate::config::{Equation, Initial, RunConfig};
use crate::error::CliError;
use crate::output::{num, Output};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheKey {
    beta: f64,
    epsilon: f64,
    a: f64,
    b: f64,
    initial: Initial,
    oracle: HopfColeConfig,
    boundary_times: Vec<f64>,
    field_times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OracleData {
    pub config: HopfColeConfig,
    pub boundary_times: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub field_times: Vec<f64>,
    /// Exact solution on the 512-point test grid at each field time.
    pub field: Vec<Vec<f64>>,
    /// The same from the oracle with both resolutions doubled.
    pub refined: Vec<Vec<f64>>,
    pub path: PathBuf,
}

fn boundary_times(t_end: f64, dt: f64) -> Vec<f64> {
    let t_max = t_end.max(dt);
    let n = (t_max / dt - 1e-9).ceil() as usize;
    let mut ts: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    ts.push(t_max);
    ts
}

impl OracleData {
    pub fn hopf_cole_config(cfg: &RunConfig) -> HopfColeConfig {
        let o = &cfg.fbenn.oracle;
        HopfColeConfig::for_horizon(cfg.model.beta, cfg.model.epsilon, cfg.stepper.t_end.max(o.boundary_dt), o.fine_n, o.quad_n)
    }

    fn key(cfg: &RunConfig, field_times: &[f64]) -> CacheKey {
        CacheKey {
            beta: cfg.model.beta,
            epsilon: cfg.model.epsilon,
            a: cfg.grid.a,
            b: cfg.grid.b,
            initial: cfg.model.initial,
            oracle: Self::hopf_cole_config(cfg),
            boundary_times: boundary_times(cfg.stepper.t_end, cfg.fbenn.oracle.boundary_dt),
            field_times: field_times.to_vec(),
        }
    }

    fn cache_dir(cfg: &RunConfig, out: &Output) -> PathBuf {
        let d = Path::new(&cfg.fbenn.oracle.cache_dir);
        if d.is_absolute() {
            d.to_path_buf()
        } else {
            out.dir().join(d)
        }
    }

    /// Reads the cached oracle for this configuration, or computes and caches it.
    pub fn load_or_build(cfg: &RunConfig, out: &Output, field_times: &[f64]) -> Result<Self, CliError> {
        if cfg.model.equation != Equation::Fbenn {
            return Err(CliError::Config("the Hopf-Cole oracle needs model.equation = fbenn".into()));
        }
        let key = Self::key(cfg, field_times);
        key.oracle.validate()?;
        if let Some(&t) = field_times.iter().find(|&&t| !(t > 0.0)) {
            return Err(CliError::Config(format!("oracle field times must be positive, got {t}")));
        }
        let header = serde_json::to_string(&key).expect("key serializes");
        let hash: String = Sha256::digest(header.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect();
        let dir = Self::cache_dir(cfg, out);
        let path = dir.join(format!("oracle_{hash}.csv"));
        if path.exists() {
            if let Some(d) = Self::read(&path, &key, &header)? {
                info!("oracle: cache hit {}", path.display());
                return Ok(d);
            }
        }
        let d = Self::build(&key, path)?;
        fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        d.write(&header)?;
        Ok(d)
    }

    fn build(key: &CacheKey, path: PathBuf) -> Result<Self, CliError> {
        let u0 = initial_fn(key.initial);
        let hc = HopfCole::new(key.oracle, key.a, key.b, u0)?;
        let table = hc.boundary_table(&key.boundary_times).map_err(CliError::numerical)?;
        let xs = test_grid(key.a, key.b)?.points();
        let mut field = Vec::new();
        let mut refined = Vec::new();
        if !key.field_times.is_empty() {
            let fine = HopfCole::new(key.oracle.refined(), key.a, key.b, u0)?;
            for &t in &key.field_times {
                field.push(hc.eval(&xs, t).map_err(CliError::numerical)?);
                refined.push(fine.eval(&xs, t).map_err(CliError::numerical)?);
            }
        }
        info!("oracle: built {} boundary samples and {} fields", table.times.len(), field.len());
        Ok(Self {
            config: key.oracle,
            boundary_times: table.times,
            left: table.left,
            right: table.right,
            field_times: key.field_times.clone(),
            field,
            refined,
            path,
        })
    }

    fn write(&self, header: &str) -> Result<(), CliError> {
        let mut f = fs::File::create(&self.path)?;
        writeln!(f, "# {header}")?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(["kind", "t", "index", "u"])?;
        for (k, &t) in self.boundary_times.iter().enumerate() {
            w.write_record(["left", &num(t), "0", &num(self.left[k])])?;
            w.write_record(["right", &num(t), "0", &num(self.right[k])])?;
        }
        for (kind, sets) in [("field", &self.field), ("refined", &self.refined)] {
            for (t, vals) in self.field_times.iter().zip(sets.iter()) {
                for (i, v) in vals.iter().enumerate() {
                    w.write_record([kind, &num(*t), &i.to_string(), &num(*v)])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `None` when the file belongs to a different key or is malformed.
    fn read(path: &Path, key: &CacheKey, header: &str) -> Result<Option<Self>, CliError> {
        let mut reader = BufReader::new(fs::File::open(path)?);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        if first.trim_end().strip_prefix("# ") != Some(header) {
            return Ok(None);
        }
        let mut rd = csv::Reader::from_reader(reader);
        let nf = key.field_times.len();
        let mut d = Self {
            config: key.oracle,
            boundary_times: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            field_times: key.field_times.clone(),
            field: vec![Vec::new(); nf],
            refined: vec![Vec::new(); nf],
            path: path.to_path_buf(),
        };
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| rec.get(i).and_then(|s| s.parse::<f64>().ok());
            let (Some(t), Some(u)) = (parse(1), parse(3)) else {
                return Ok(None);
            };
            let slot = |d: &Self| d.field_times.iter().position(|&s| s == t);
            match rec.get(0) {
                Some("left") => {
                    d.boundary_times.push(t);
                    d.left.push(u);
                }
                Some("right") => d.right.push(u),
                Some("field") => match slot(&d) {
                    Some(k) => d.field[k].push(u),
                    None => return Ok(None),
                },
                Some("refined") => match slot(&d) {
                    Some(k) => d.refined[k].push(u),
                    None => return Ok(None),
                },
                _ => return Ok(None),
            }
        }
        if d.boundary_times != key.boundary_times || d.right.len() != d.left.len() {
            return Ok(None);
        }
        Ok(Some(d))
    }

    pub fn boundary_table(&self) -> Result<BoundaryTable, CliError> {
        Ok(BoundaryTable::new(self.boundary_times.clone(), self.left.clone(), self.right.clone())?)
    }

    pub fn field_at(&self, t: f64) -> Option<&[f64]> {
        self.field_times.iter().position(|&s| s == t).map(|k| self.field[k].as_slice())
    }

    /// Largest relative change of the field under the refinement, over all field times.
    pub fn self_convergence(&self, a: f64, b: f64) -> Result<f64, CliError> {
        let g = test_grid(a, b)?;
        let mut worst = 0.0f64;
        for (f, r) in self.field.iter().zip(&self.refined) {
            worst = worst.max(relative_l2(&g, r, f)?);
        }
        Ok(worst)
    }
}

/// Build (or confirm) the oracle cache for the config's error times.
pub fn cmd_oracle_cache(cfg: &RunConfig, out: &Output) -> Result<OracleData, CliError> {
    cfg.check()?;
    let times: Vec<f64> = cfg.fbenn.error_times.iter().copied().filter(|&t| t <= cfg.stepper.t_end).collect();
    OracleData::load_or_build(cfg, out, &times)
}
