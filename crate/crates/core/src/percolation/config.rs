//! Sampled bond configurations.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::rng::{unit, SeedRecord, StreamKey};
use super::window::EdgeWindow;

#[derive(Clone, Debug)]
pub struct PercConfig<'w> {
    window: &'w EdgeWindow,
    pub p: f64,
    pub record: Option<SeedRecord>,
    open: Vec<bool>,
}

/// i.i.d. Bernoulli(p) bits on the window's edges, reproducible from `(key, trial)`.
pub fn sample<'w>(window: &'w EdgeWindow, p: f64, key: StreamKey, trial: u64) -> PercConfig<'w> {
    let mut u = vec![0u32; window.edge_count()];
    key.fill_uniforms(trial, &mut u);
    PercConfig::from_uniforms(window, p, &u, Some(key.record(trial)))
}

impl<'w> PercConfig<'w> {
    /// Thresholds shared uniforms at `p`; configurations built from the
    /// same uniforms are monotone in `p`.
    pub fn from_uniforms(window: &'w EdgeWindow, p: f64, uniforms: &[u32], record: Option<SeedRecord>) -> Self {
        assert_eq!(uniforms.len(), window.edge_count(), "one uniform per edge");
        let open = uniforms.iter().map(|&u| unit(u) < p).collect();
        PercConfig { window, p, record, open }
    }

    pub fn from_bits(window: &'w EdgeWindow, open: Vec<bool>) -> Result<Self> {
        if open.len() != window.edge_count() {
            return Err(Error::DimensionMismatch { expected: window.edge_count(), found: open.len() });
        }
        Ok(PercConfig { window, p: f64::NAN, record: None, open })
    }

    pub fn window(&self) -> &'w EdgeWindow {
        self.window
    }

    #[inline]
    pub fn is_open(&self, e: usize) -> bool {
        self.open[e]
    }

    pub fn bits(&self) -> &[bool] {
        &self.open
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }

    /// Bits packed little-endian within each byte, as lowercase hex.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.open.len().div_ceil(4));
        for chunk in self.open.chunks(8) {
            let mut byte = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                byte |= (b as u8) << i;
            }
            write!(s, "{byte:02x}").unwrap();
        }
        s
    }

    /// One golden-file line: `seed=.. stream=.. trial=.. p=.. edges=.. bits=..`.
    pub fn golden_line(&self) -> String {
        let (seed, stream, trial) = match self.record {
            Some(r) => (r.key.seed, r.key.stream, r.trial),
            None => (0, 0, 0),
        };
        format!("seed={seed} stream={stream} trial={trial} p={} edges={} bits={}", self.p, self.open.len(), self.to_hex())
    }
}

pub fn bits_from_hex(hex: &str, edges: usize) -> Result<Vec<bool>> {
    if hex.len() != edges.div_ceil(8) * 2 {
        return Err(Error::pre(format!("hex length {} does not match {edges} edges", hex.len())));
    }
    let mut out = Vec::with_capacity(edges);
    for i in 0..hex.len() / 2 {
        let byte = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).map_err(|_| Error::pre("bad hex digit"))?;
        for b in 0..8 {
            if out.len() < edges {
                out.push(byte >> b & 1 == 1);
            }
        }
    }
    Ok(out)
}
