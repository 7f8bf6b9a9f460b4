//! Shared header block for the text outputs.

use std::io::{self, Write};

use crate::arith::CatMap;

pub const FORMAT_VERSION: u32 = 1;

/// `#`-prefixed provenance lines written at the top of every CSV/PGM output.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub matrix: [i64; 4],
    pub n: Option<u64>,
    pub params: Vec<(String, String)>,
}

impl Header {
    pub fn new(command: impl Into<String>, map: &CatMap) -> Header {
        Header {
            command: command.into(),
            matrix: map.entries(),
            n: None,
            params: Vec::new(),
        }
    }

    pub fn with_n(mut self, n: usize) -> Header {
        self.n = Some(n as u64);
        self
    }

    pub fn param(mut self, key: impl Into<String>, value: impl ToString) -> Header {
        self.params.push((key.into(), value.to_string()));
        self
    }

    pub fn lines(&self) -> Vec<String> {
        let [a, b, c, d] = self.matrix;
        let mut out = vec![
            format!("catmap {}", self.command),
            format!("format-version: {FORMAT_VERSION}"),
            format!("matrix: {a},{b},{c},{d}"),
        ];
        if let Some(n) = self.n {
            out.push(format!("N: {n}"));
        }
        out.extend(self.params.iter().map(|(k, v)| format!("{k}: {v}")));
        out
    }

    /// The same block as a JSON object, for structured outputs.
    pub fn to_json(&self) -> serde_json::Value {
        let params: serde_json::Map<String, serde_json::Value> =
            self.params.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect();
        serde_json::json!({
            "command": self.command,
            "format_version": FORMAT_VERSION,
            "matrix": self.matrix,
            "n": self.n,
            "params": params,
        })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for line in self.lines() {
            writeln!(w, "# {line}")?;
        }
        Ok(())
    }
}
