//! On-disk container for a full labeling, and scheme-independent build/query entry points.
//!
//! Layout, little-endian: `FLBL`, version, scheme id, then n, m, f, h, φ
//! numerator and denominator as u32, the seed as u64, a length-prefixed
//! parameter block, the component starts, and finally one length-prefixed
//! payload per vertex and per edge. A length prefix is the payload's bit
//! count as u32; the payload itself is padded to whole bytes.

use crate::bits::{BitError, BitReader, BitWriter};
use crate::det::{DetAnswer, DetParams, QueryError, VertexLabel};
use crate::hierarchy::{build_edge_hierarchy, HierarchyError, Mode, Phi};
use crate::rand_edge::{build_rand, query_rand, RandAnswer, RandConfig, RandEdgeLabel, RandError, RandLabels, RandParams, RandScheme, RangeLabel};
use crate::simple::{build_simple, query_simple, SimpleEdgeLabel, SimpleLabels};
use crate::sqrt::{build_sqrt_any, query_sqrt, SqrtEdgeLabel, SqrtError, SqrtLabels, SqrtParams};
use crate::Graph;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"FLBL";
pub const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("not a label file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    Version(u8),
    #[error("unknown scheme id {0}")]
    Scheme(u8),
    #[error("label file truncated")]
    Truncated,
    #[error("trailing bytes after the last label")]
    Trailing,
    #[error("bad payload: {0}")]
    Payload(#[from] BitError),
    #[error("bad payload: {0}")]
    Rand(#[from] RandError),
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("unknown scheme id {0}")]
    Scheme(u8),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Sqrt(#[from] SqrtError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryFailure {
    #[error("{got} faults exceed the budget f = {f}")]
    TooManyFaults { got: usize, f: usize },
    #[error("no edge with id {0}")]
    InvalidEdge(usize),
    #[error("edge {0} listed twice")]
    Duplicate(usize),
    #[error(transparent)]
    Det(#[from] QueryError),
    #[error(transparent)]
    Rand(#[from] RandError),
}

#[derive(Clone, Debug)]
pub enum SchemeLabels {
    Simple(SimpleLabels),
    Sqrt(SqrtLabels),
    Rand(RandLabels),
}

#[derive(Clone, Debug)]
pub struct LabelFile {
    pub n: usize,
    pub m: usize,
    pub labels: SchemeLabels,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelStats {
    pub max_bits: usize,
    pub mean_bits: f64,
}

/// Max and mean over a list of edge-label bit lengths.
pub fn summarize(bits: &[usize]) -> LabelStats {
    LabelStats {
        max_bits: bits.iter().copied().max().unwrap_or(0),
        mean_bits: if bits.is_empty() { 0.0 } else { bits.iter().sum::<usize>() as f64 / bits.len() as f64 },
    }
}

#[derive(Clone, Debug)]
pub enum Answer {
    Det(DetAnswer),
    Rand(RandAnswer),
}

impl Answer {
    pub fn component_count(&self) -> usize {
        match self {
            Answer::Det(a) => a.component_count(),
            Answer::Rand(a) => a.component_count(),
        }
    }
}

pub struct BuildOptions {
    pub mode: Mode,
    pub seed: u64,
    pub rand: RandConfig,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { mode: Mode::Heuristic, seed: 0, rand: RandConfig::default() }
    }
}

/// Builds labels for scheme 1 (linear), 2 (square root), 3 (long sketch) or 4 (short sketch).
/// Scheme 4 silently becomes 3 when the budget is too small; compare `scheme_id()`.
pub fn build_labels(g: &Graph, scheme: u8, f: usize, opts: &BuildOptions) -> Result<LabelFile, BuildError> {
    let labels = match scheme {
        1 => {
            let h = build_edge_hierarchy(g, opts.mode)?;
            SchemeLabels::Simple(build_simple(g, &h, f))
        }
        2 => SchemeLabels::Sqrt(build_sqrt_any(g, opts.mode, f)?.0),
        3 | 4 => {
            let want = if scheme == 3 { RandScheme::Long } else { RandScheme::Short };
            SchemeLabels::Rand(build_rand(g, f, want, opts.rand, opts.seed))
        }
        s => return Err(BuildError::Scheme(s)),
    };
    Ok(LabelFile { n: g.n(), m: g.m(), labels })
}

fn put_payload(out: &mut Vec<u8>, w: BitWriter) {
    let (bytes, len) = w.into_bytes();
    out.extend_from_slice(&(len as u32).to_le_bytes());
    out.extend_from_slice(&bytes);
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8], FileError> {
        let s = self.buf.get(self.at..self.at + k).ok_or(FileError::Truncated)?;
        self.at += k;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FileError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A length-prefixed payload as (bytes, bit length).
    fn payload(&mut self) -> Result<(&'a [u8], usize), FileError> {
        let bits = self.u32()? as usize;
        Ok((self.take(bits.div_ceil(8))?, bits))
    }
}

fn read_payload<T>(c: &mut Cursor, f: impl FnOnce(&mut BitReader) -> Result<T, FileError>) -> Result<T, FileError> {
    let (bytes, bits) = c.payload()?;
    let mut r = BitReader::new(bytes, bits);
    let v = f(&mut r)?;
    r.finish()?;
    Ok(v)
}

fn write_det(w: &mut BitWriter, p: &DetParams) {
    w.put(p.w_pos as u64, 8);
    w.put(p.w_lvl as u64, 8);
    w.put(p.p_bits as u64, 8);
}

fn read_det(r: &mut BitReader, f: usize, h: u32, phi: Phi) -> Result<DetParams, BitError> {
    Ok(DetParams { f, phi, h, w_pos: r.get(8)? as u32, w_lvl: r.get(8)? as u32, p_bits: r.get(8)? as u32 })
}

impl LabelFile {
    pub fn scheme_id(&self) -> u8 {
        match &self.labels {
            SchemeLabels::Simple(_) => 1,
            SchemeLabels::Sqrt(_) => 2,
            SchemeLabels::Rand(l) => match l.params.scheme {
                RandScheme::Long => 3,
                RandScheme::Short => 4,
            },
        }
    }

    pub fn f(&self) -> usize {
        match &self.labels {
            SchemeLabels::Simple(l) => l.params.f,
            SchemeLabels::Sqrt(l) => l.params.det.f,
            SchemeLabels::Rand(l) => l.params.f,
        }
    }

    /// Hierarchy depth and expansion, for the deterministic schemes.
    pub fn hierarchy(&self) -> Option<(u32, Phi)> {
        match &self.labels {
            SchemeLabels::Simple(l) => Some((l.params.h, l.params.phi)),
            SchemeLabels::Sqrt(l) => Some((l.params.det.h, l.params.det.phi)),
            SchemeLabels::Rand(_) => None,
        }
    }

    pub fn seed(&self) -> u64 {
        match &self.labels {
            SchemeLabels::Rand(l) => l.params.seed,
            _ => 0,
        }
    }

    /// Serialized payload length of every edge label, framing excluded.
    pub fn edge_bits(&self) -> Vec<usize> {
        match &self.labels {
            SchemeLabels::Simple(l) => l.edges.iter().map(|e| e.bit_len(&l.params)).collect(),
            SchemeLabels::Sqrt(l) => l.edges.iter().map(|e| e.bit_len(&l.params)).collect(),
            SchemeLabels::Rand(l) => vec![l.params.edge_label_bits(); l.edges.len()],
        }
    }

    pub fn stats(&self) -> LabelStats {
        summarize(&self.edge_bits())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.scheme_id());
        let (h, phi) = self.hierarchy().unwrap_or((0, Phi::new(0, 1)));
        for v in [self.n, self.m, self.f(), h as usize, phi.num as usize, phi.den as usize] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.seed().to_le_bytes());
        let mut w = BitWriter::new();
        let comp_starts: Vec<u64> = match &self.labels {
            SchemeLabels::Simple(l) => {
                write_det(&mut w, &l.params);
                l.comp_starts.clone()
            }
            SchemeLabels::Sqrt(l) => {
                write_det(&mut w, &l.params.det);
                w.put(l.params.r as u64, 32);
                w.put(l.params.jmax as u64, 8);
                l.comp_starts.clone()
            }
            SchemeLabels::Rand(l) => {
                let p = &l.params;
                w.put(p.c as u64, 8);
                w.put(p.l0 as u64, 32);
                w.put(p.rows as u64, 16);
                w.put(p.ranks as u64, 16);
                l.comp_starts.iter().map(|&s| s as u64).collect()
            }
        };
        put_payload(&mut out, w);
        out.extend_from_slice(&(comp_starts.len() as u32).to_le_bytes());
        for s in comp_starts {
            out.extend_from_slice(&s.to_le_bytes());
        }
        macro_rules! payloads {
            ($items:expr, $p:expr) => {
                for it in $items {
                    let mut w = BitWriter::new();
                    it.write(&mut w, $p);
                    put_payload(&mut out, w);
                }
            };
        }
        match &self.labels {
            SchemeLabels::Simple(l) => {
                payloads!(&l.vertices, &l.params);
                payloads!(&l.edges, &l.params);
            }
            SchemeLabels::Sqrt(l) => {
                payloads!(&l.vertices, &l.params.det);
                payloads!(&l.edges, &l.params);
            }
            SchemeLabels::Rand(l) => {
                payloads!(&l.vertices, &l.params);
                payloads!(&l.edges, &l.params);
            }
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, FileError> {
        let mut c = Cursor { buf, at: 0 };
        if c.take(4).map_err(|_| FileError::BadMagic)? != MAGIC {
            return Err(FileError::BadMagic);
        }
        let version = c.u8()?;
        if version != VERSION {
            return Err(FileError::Version(version));
        }
        let scheme = c.u8()?;
        if !(1..=4).contains(&scheme) {
            return Err(FileError::Scheme(scheme));
        }
        let n = c.u32()? as usize;
        let m = c.u32()? as usize;
        let f = c.u32()? as usize;
        let h = c.u32()?;
        let (num, den) = (c.u32()? as u64, c.u32()? as u64);
        let seed = c.u64()?;
        let phi = Phi { num, den: den.max(1) };
        enum P {
            Simple(DetParams),
            Sqrt(SqrtParams),
            Rand(RandParams),
        }
        let params = read_payload(&mut c, |r| {
            Ok(match scheme {
                1 => P::Simple(read_det(r, f, h, phi)?),
                2 => {
                    let det = read_det(r, f, h, phi)?;
                    P::Sqrt(SqrtParams { det, r: r.get(32)? as usize, jmax: r.get(8)? as u32 })
                }
                _ => {
                    let c = r.get(8)? as u32;
                    let l0 = r.get(32)? as usize;
                    let rows = r.get(16)? as usize;
                    let ranks = r.get(16)? as usize;
                    let s = if scheme == 3 { RandScheme::Long } else { RandScheme::Short };
                    let lg = crate::rand_edge::lg_of(n);
                    P::Rand(RandParams { scheme: s, n, f, lg, c, l0, rows, ranks, seed })
                }
            })
        })?;
        let k = c.u32()? as usize;
        if k > n.max(1) {
            return Err(FileError::Truncated);
        }
        let comp_starts: Vec<u64> = (0..k).map(|_| c.u64()).collect::<Result<_, _>>()?;
        let labels = match params {
            P::Simple(p) => {
                let vertices = (0..n).map(|_| read_payload(&mut c, |r| Ok(VertexLabel::read(r, &p)?))).collect::<Result<_, _>>()?;
                let edges = (0..m).map(|_| read_payload(&mut c, |r| Ok(SimpleEdgeLabel::read(r, &p)?))).collect::<Result<_, _>>()?;
                SchemeLabels::Simple(SimpleLabels { params: p, comp_starts, vertices, edges })
            }
            P::Sqrt(p) => {
                let vertices = (0..n).map(|_| read_payload(&mut c, |r| Ok(VertexLabel::read(r, &p.det)?))).collect::<Result<_, _>>()?;
                let edges = (0..m).map(|_| read_payload(&mut c, |r| Ok(SqrtEdgeLabel::read(r, &p)?))).collect::<Result<_, _>>()?;
                SchemeLabels::Sqrt(SqrtLabels { params: p, comp_starts, vertices, edges })
            }
            P::Rand(p) => {
                let vertices = (0..n).map(|_| read_payload(&mut c, |r| RangeLabel::read(r, &p).map_err(Into::into))).collect::<Result<_, _>>()?;
                let edges: Vec<RandEdgeLabel> = (0..m).map(|_| read_payload(&mut c, |r| RandEdgeLabel::read(r, &p).map_err(Into::into))).collect::<Result<_, _>>()?;
                let in_tree = edges.iter().map(|e| matches!(e.ends, crate::rand_edge::Ends::Tree(_))).collect();
                SchemeLabels::Rand(RandLabels {
                    params: p,
                    comp_starts: comp_starts.iter().map(|&s| s as u32).collect(),
                    vertices,
                    edges,
                    in_tree,
                })
            }
        };
        if c.at != buf.len() {
            return Err(FileError::Trailing);
        }
        Ok(LabelFile { n, m, labels })
    }

    /// Answers for the fault set given by edge ids, reading only edge labels.
    pub fn query(&self, ids: &[usize]) -> Result<Answer, QueryFailure> {
        if ids.len() > self.f() {
            return Err(QueryFailure::TooManyFaults { got: ids.len(), f: self.f() });
        }
        let mut seen = std::collections::HashSet::new();
        for &e in ids {
            if e >= self.m {
                return Err(QueryFailure::InvalidEdge(e));
            }
            if !seen.insert(e) {
                return Err(QueryFailure::Duplicate(e));
            }
        }
        Ok(match &self.labels {
            SchemeLabels::Simple(l) => {
                let fl: Vec<&SimpleEdgeLabel> = ids.iter().map(|&e| &l.edges[e]).collect();
                Answer::Det(query_simple(&l.params, &l.comp_starts, &fl)?)
            }
            SchemeLabels::Sqrt(l) => {
                let fl: Vec<&SqrtEdgeLabel> = ids.iter().map(|&e| &l.edges[e]).collect();
                Answer::Det(query_sqrt(&l.params, &l.comp_starts, &fl)?.0)
            }
            SchemeLabels::Rand(l) => {
                let fl: Vec<&RandEdgeLabel> = ids.iter().map(|&e| &l.edges[e]).collect();
                Answer::Rand(query_rand(&l.params, &l.comp_starts, &fl)?)
            }
        })
    }

    /// Connectivity of vertices `s` and `t` under a previous answer, from their vertex labels.
    pub fn connected(&self, ans: &Answer, s: usize, t: usize) -> bool {
        match (&self.labels, ans) {
            (SchemeLabels::Simple(l), Answer::Det(a)) => a.connected(l.vertices[s].dfs, l.vertices[t].dfs),
            (SchemeLabels::Sqrt(l), Answer::Det(a)) => a.connected(l.vertices[s].dfs, l.vertices[t].dfs),
            (SchemeLabels::Rand(l), Answer::Rand(a)) => a.connected(l.vertices[s].lo, l.vertices[t].lo),
            _ => panic!("answer came from a different label file"),
        }
    }
}
