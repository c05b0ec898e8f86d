//! `TKR1` arrays and Tucker container directories.
//!
//! A `TKR1` file is the magic `TKR1`, one byte holding the order (2 or 3),
//! the dimensions as little-endian `u64`, then the entries as little-endian
//! `f64` in column-major order (first index fastest).
//!
//! A container is a directory holding `manifest.json`, the factor arrays
//! `u.tkr`, `v.tkr`, `w.tkr` and the core: `core.tkr` (dense),
//! `weights.tkr` (diagonal, stored `R x 1`) or `core_g.tkr` + `core_h.tkr`
//! (Kronecker). Every file is written to a temporary name and renamed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{Core, Tucker, TuckerLike, TuckerOrtho};
use crate::linalg::Matrix;
use crate::tensor::Dense3;

pub const MAGIC: &[u8; 4] = b"TKR1";
pub const MANIFEST: &str = "manifest.json";

/// A raw order-2 or order-3 array.
#[derive(Clone, Debug, PartialEq)]
pub struct TkrArray {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl TkrArray {
    pub fn into_matrix(self) -> Result<Matrix> {
        match self.dims[..] {
            [m, n] => Ok(Matrix::from_vec(m, n, self.data)),
            _ => Err(Error::Format(format!("expected an order-2 array, got dims {:?}", self.dims))),
        }
    }

    pub fn into_dense3(self) -> Result<Dense3> {
        match self.dims[..] {
            [a, b, c] => Dense3::new([a, b, c], self.data),
            _ => Err(Error::Format(format!("expected an order-3 array, got dims {:?}", self.dims))),
        }
    }
}

impl From<&Matrix> for TkrArray {
    fn from(m: &Matrix) -> Self {
        TkrArray {
            dims: vec![m.nrows(), m.ncols()],
            data: m.as_slice().to_vec(),
        }
    }
}

impl From<&Dense3> for TkrArray {
    fn from(t: &Dense3) -> Self {
        TkrArray {
            dims: t.dims().to_vec(),
            data: t.as_slice().to_vec(),
        }
    }
}

pub fn encode_tkr(a: &TkrArray) -> Result<Vec<u8>> {
    if !(a.dims.len() == 2 || a.dims.len() == 3) {
        return Err(Error::Format(format!("order {} is not supported", a.dims.len())));
    }
    if a.dims.iter().product::<usize>() != a.data.len() {
        return Err(Error::Format("data length does not match dimensions".into()));
    }
    let mut out = Vec::with_capacity(5 + 8 * (a.dims.len() + a.data.len()));
    out.extend_from_slice(MAGIC);
    out.push(a.dims.len() as u8);
    for &d in &a.dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &x in &a.data {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_tkr(bytes: &[u8]) -> Result<TkrArray> {
    let bad = |msg: &str| Error::Format(msg.to_string());
    if bytes.len() < 5 || &bytes[..4] != MAGIC {
        return Err(bad("missing TKR1 magic"));
    }
    let order = bytes[4] as usize;
    if order != 2 && order != 3 {
        return Err(Error::Format(format!("unsupported order {order}")));
    }
    let header = 5 + 8 * order;
    if bytes.len() < header {
        return Err(bad("truncated header"));
    }
    let mut dims = Vec::with_capacity(order);
    for chunk in bytes[5..header].chunks_exact(8) {
        let d = u64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        dims.push(usize::try_from(d).map_err(|_| bad("dimension overflows usize"))?);
    }
    let len = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| bad("element count overflows"))?;
    if len.checked_mul(8).and_then(|b| b.checked_add(header)) != Some(bytes.len()) {
        return Err(Error::Format(format!(
            "payload is {} bytes, dims {dims:?} need {}",
            bytes.len() - header,
            len.saturating_mul(8)
        )));
    }
    let data = bytes[header..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(TkrArray { dims, data })
}

/// Write `bytes` to a sibling temp file, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_tkr(path: &Path, a: &TkrArray) -> Result<()> {
    write_atomic(path, &encode_tkr(a)?)
}

pub fn read_tkr(path: &Path) -> Result<TkrArray> {
    decode_tkr(&fs::read(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub core: String,
    pub dims: [usize; 3],
    pub ranks: [usize; 3],
}

const FACTOR_FILES: [&str; 3] = ["u.tkr", "v.tkr", "w.tkr"];

/// Write a Tucker-like tensor as a container directory (created if missing).
pub fn save_container(dir: &Path, t: &TuckerLike) -> Result<()> {
    fs::create_dir_all(dir)?;
    match &t.core {
        Core::Dense(c) => write_tkr(&dir.join("core.tkr"), &c.into())?,
        Core::Diagonal(w) => write_tkr(
            &dir.join("weights.tkr"),
            &TkrArray {
                dims: vec![w.len(), 1],
                data: w.clone(),
            },
        )?,
        Core::Kron { g, h } => {
            write_tkr(&dir.join("core_g.tkr"), &g.into())?;
            write_tkr(&dir.join("core_h.tkr"), &h.into())?;
        }
    }
    for (name, f) in FACTOR_FILES.iter().zip(&t.factors) {
        write_tkr(&dir.join(name), &f.into())?;
    }
    let manifest = Manifest {
        format: "tucker-like".into(),
        core: t.core.kind().into(),
        dims: t.dims(),
        ranks: t.ranks(),
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    write_atomic(&dir.join(MANIFEST), &json)
}

pub fn save_ortho(dir: &Path, t: &TuckerOrtho) -> Result<()> {
    save_container(dir, &t.to_tucker_like())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let text = fs::read(dir.join(MANIFEST))?;
    serde_json::from_slice(&text).map_err(|e| Error::Format(format!("manifest.json: {e}")))
}

pub fn load_container(dir: &Path) -> Result<TuckerLike> {
    let manifest = read_manifest(dir)?;
    if manifest.format != "tucker-like" {
        return Err(Error::Format(format!("unknown container format {:?}", manifest.format)));
    }
    let file = |name: &str| -> PathBuf { dir.join(name) };
    let core = match manifest.core.as_str() {
        "dense" => Core::Dense(read_tkr(&file("core.tkr"))?.into_dense3()?),
        "diagonal" => {
            let w = read_tkr(&file("weights.tkr"))?;
            if w.dims.len() != 2 || w.dims[1] != 1 {
                return Err(Error::Format(format!("weights must be R x 1, got {:?}", w.dims)));
            }
            Core::Diagonal(w.data)
        }
        "kron" => Core::Kron {
            g: read_tkr(&file("core_g.tkr"))?.into_dense3()?,
            h: read_tkr(&file("core_h.tkr"))?.into_dense3()?,
        },
        other => return Err(Error::Format(format!("unknown core kind {other:?}"))),
    };
    let mut factors = Vec::with_capacity(3);
    for name in FACTOR_FILES {
        factors.push(read_tkr(&file(name))?.into_matrix()?);
    }
    let t = TuckerLike::new(core, factors.try_into().expect("three factors"))
        .map_err(|e| Error::Format(e.to_string()))?;
    if t.dims() != manifest.dims || t.ranks() != manifest.ranks {
        return Err(Error::Format(format!(
            "manifest says dims {:?} ranks {:?}, files hold {:?} {:?}",
            manifest.dims,
            manifest.ranks,
            t.dims(),
            t.ranks()
        )));
    }
    Ok(t)
}
