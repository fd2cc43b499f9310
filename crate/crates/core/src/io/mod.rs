//! Testcase serialization: AIGER (ASCII and binary) for AIGs, a structural
//! Verilog subset for every kind, and DOT for visualization.

mod aiger;
mod dot;
mod verilog;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Network, NetworkKind, NodeId, Signal};

pub use aiger::{read_aiger, write_aiger};
pub use dot::write_dot;
pub use verilog::{read_verilog, write_verilog};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileFormat {
    AigerAscii,
    AigerBinary,
    Verilog,
    Dot,
}

impl FileFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FileFormat::AigerAscii => "aag",
            FileFormat::AigerBinary => "aig",
            FileFormat::Verilog => "v",
            FileFormat::Dot => "dot",
        }
    }

    pub fn from_extension(ext: &str) -> Option<FileFormat> {
        match ext.to_ascii_lowercase().as_str() {
            "aag" => Some(FileFormat::AigerAscii),
            "aig" => Some(FileFormat::AigerBinary),
            "v" => Some(FileFormat::Verilog),
            "dot" | "gv" => Some(FileFormat::Dot),
            _ => None,
        }
    }

    pub fn from_path(path: &Path) -> Option<FileFormat> {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(FileFormat::from_extension)
    }

    /// Binary AIGER for AIGs, Verilog for the other kinds.
    pub fn default_for(kind: NetworkKind) -> FileFormat {
        match kind {
            NetworkKind::Aig => FileFormat::AigerBinary,
            NetworkKind::Xag | NetworkKind::Mig => FileFormat::Verilog,
        }
    }

    pub fn supports(self, kind: NetworkKind) -> bool {
        match self {
            FileFormat::AigerAscii | FileFormat::AigerBinary => kind == NetworkKind::Aig,
            FileFormat::Verilog | FileFormat::Dot => true,
        }
    }

    pub fn is_readable(self) -> bool {
        self != FileFormat::Dot
    }
}

impl fmt::Display for FileFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FileFormat::AigerAscii => "aag",
            FileFormat::AigerBinary => "aig",
            FileFormat::Verilog => "verilog",
            FileFormat::Dot => "dot",
        };
        f.write_str(name)
    }
}

impl FromStr for FileFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aag" | "aiger-ascii" => Ok(FileFormat::AigerAscii),
            "aig" | "aiger" | "aiger-binary" => Ok(FileFormat::AigerBinary),
            "v" | "verilog" => Ok(FileFormat::Verilog),
            "dot" => Ok(FileFormat::Dot),
            other => Err(format!("unknown file format `{other}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("{format} cannot hold a {kind} network")]
    WrongKind { format: FileFormat, kind: NetworkKind },
    #[error("{0} files cannot be read")]
    WriteOnly(FileFormat),
    #[error("cannot infer the file format of `{0}`")]
    UnknownFormat(String),
}

pub(crate) fn malformed(line: usize, message: impl Into<String>) -> IoError {
    IoError::Malformed {
        line,
        message: message.into(),
    }
}

/// Serializes `net` in the given format.
pub fn write_network(net: &Network, format: FileFormat) -> Result<Vec<u8>, IoError> {
    if !format.supports(net.kind()) {
        return Err(IoError::WrongKind {
            format,
            kind: net.kind(),
        });
    }
    let mut out = Vec::new();
    match format {
        FileFormat::AigerAscii => write_aiger(net, &mut out, true)?,
        FileFormat::AigerBinary => write_aiger(net, &mut out, false)?,
        FileFormat::Verilog => out = write_verilog(net).into_bytes(),
        FileFormat::Dot => out = write_dot(net).into_bytes(),
    }
    Ok(out)
}

pub fn read_network(bytes: &[u8], format: FileFormat) -> Result<Network, IoError> {
    match format {
        FileFormat::AigerAscii | FileFormat::AigerBinary => read_aiger(bytes),
        FileFormat::Verilog => {
            let text = std::str::from_utf8(bytes).map_err(|e| malformed(0, e.to_string()))?;
            read_verilog(text)
        }
        FileFormat::Dot => Err(IoError::WriteOnly(format)),
    }
}

fn resolve_format(path: &Path, format: Option<FileFormat>) -> Result<FileFormat, IoError> {
    format
        .or_else(|| FileFormat::from_path(path))
        .ok_or_else(|| IoError::UnknownFormat(path.display().to_string()))
}

/// Writes `net` to `path`, inferring the format from the extension unless
/// one is given.
pub fn write_file(net: &Network, path: &Path, format: Option<FileFormat>) -> Result<(), IoError> {
    let format = resolve_format(path, format)?;
    let bytes = write_network(net, format)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_file(path: &Path, format: Option<FileFormat>) -> Result<Network, IoError> {
    let format = resolve_format(path, format)?;
    read_network(&fs::read(path)?, format)
}

/// Renumbering used by the writers: PIs first in PI order, then live gates
/// in storage order. Entry `i` is the new index of node `i`.
pub(crate) fn output_numbering(net: &Network) -> (Vec<Option<u32>>, Vec<NodeId>) {
    let mut index = vec![None; net.node_capacity()];
    index[0] = Some(0);
    let mut next = 1;
    for &pi in net.pis() {
        index[pi.index()] = Some(next);
        next += 1;
    }
    let gates: Vec<NodeId> = net.gates().collect();
    for &g in &gates {
        index[g.index()] = Some(next);
        next += 1;
    }
    (index, gates)
}

pub(crate) fn renumbered(index: &[Option<u32>], s: Signal) -> u32 {
    index[s.node().index()].expect("signal refers to a live node") * 2 + s.is_complemented() as u32
}
