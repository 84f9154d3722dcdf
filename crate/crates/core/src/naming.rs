//! Hierarchical content names, flow identifiers and chunk arithmetic.
//!
//! Canonical grammar: `/<comp>/.../_v<int>/_c<int>/_s<int>`, where the
//! version, chunk and segment markers are optional but must appear in that
//! order and after every plain component.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NamingError {
    #[error("name must start with '/'")]
    MissingLeadingSlash,
    #[error("empty component at position {0}")]
    EmptyComponent(usize),
    #[error("malformed marker in component `{0}`")]
    MalformedMarker(String),
    #[error("component `{0}` is out of order")]
    OutOfOrder(String),
    #[error("chunk {chunk} does not match segment {segment} with chunk size {chunk_size}")]
    ChunkMismatch {
        chunk: u64,
        segment: u64,
        chunk_size: u64,
    },
    #[error("chunk size must be positive")]
    InvalidChunkSize,
    #[error("flow size must be positive")]
    EmptyFlow,
    #[error("flow prefix `{0}` must not carry a chunk or segment")]
    NotAFlowPrefix(String),
}

/// Packets per chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NamingConfig {
    pub chunk_size: u64,
}

impl Default for NamingConfig {
    fn default() -> Self {
        NamingConfig { chunk_size: 100 }
    }
}

impl NamingConfig {
    pub fn new(chunk_size: u64) -> Result<Self, NamingError> {
        if chunk_size == 0 {
            return Err(NamingError::InvalidChunkSize);
        }
        Ok(NamingConfig { chunk_size })
    }
}

/// `floor(segment / n)`.
pub fn chunk_of(segment: u64, n: u64) -> Result<u64, NamingError> {
    if n == 0 {
        return Err(NamingError::InvalidChunkSize);
    }
    Ok(segment / n)
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentName {
    components: Arc<[String]>,
    version: Option<u64>,
    chunk: Option<u64>,
    segment: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Marker {
    Version,
    Chunk,
    Segment,
}

fn marker(comp: &str) -> Option<(Marker, &str)> {
    let m = match comp.get(..2)? {
        "_v" => Marker::Version,
        "_c" => Marker::Chunk,
        "_s" => Marker::Segment,
        _ => return None,
    };
    Some((m, &comp[2..]))
}

fn parse_marker_value(comp: &str, digits: &str) -> Result<u64, NamingError> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(NamingError::MalformedMarker(comp.to_string()));
    }
    digits
        .parse()
        .map_err(|_| NamingError::MalformedMarker(comp.to_string()))
}

impl ContentName {
    /// A name made of plain components only.
    pub fn new<I, S>(components: I) -> Result<Self, NamingError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let comps: Vec<String> = components.into_iter().map(Into::into).collect();
        for (i, c) in comps.iter().enumerate() {
            if c.is_empty() {
                return Err(NamingError::EmptyComponent(i));
            }
            if c.contains('/') || marker(c).is_some() {
                return Err(NamingError::MalformedMarker(c.clone()));
            }
        }
        if comps.is_empty() {
            return Err(NamingError::EmptyComponent(0));
        }
        Ok(ContentName {
            components: comps.into(),
            version: None,
            chunk: None,
            segment: None,
        })
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    pub fn version(&self) -> Option<u64> {
        self.version
    }

    pub fn chunk(&self) -> Option<u64> {
        self.chunk
    }

    pub fn segment(&self) -> Option<u64> {
        self.segment
    }

    pub fn with_version(&self, v: u64) -> Self {
        ContentName {
            version: Some(v),
            chunk: None,
            segment: None,
            components: self.components.clone(),
        }
    }

    /// Chunk prefix `_c<k>` below this name's flow prefix.
    pub fn with_chunk(&self, chunk: u64) -> Self {
        ContentName {
            chunk: Some(chunk),
            segment: None,
            ..self.clone()
        }
    }

    /// Full packet name; the chunk component is derived from `n`.
    pub fn with_segment(&self, segment: u64, n: u64) -> Result<Self, NamingError> {
        let chunk = chunk_of(segment, n)?;
        Ok(ContentName {
            chunk: Some(chunk),
            segment: Some(segment),
            ..self.clone()
        })
    }

    /// The name with chunk and segment stripped.
    pub fn flow_prefix(&self) -> Self {
        ContentName {
            chunk: None,
            segment: None,
            ..self.clone()
        }
    }

    /// All prefixes, longest first, ending with the first plain component.
    pub fn prefixes(&self) -> impl Iterator<Item = ContentName> + '_ {
        let marker_levels = [
            self.segment.is_some(),
            self.chunk.is_some(),
            self.version.is_some(),
        ];
        let mut cur = Some(self.clone());
        let mut markers_left = marker_levels.iter().filter(|b| **b).count();
        let mut comps_left = self.components.len();
        std::iter::from_fn(move || {
            let out = cur.take()?;
            let mut next = out.clone();
            if markers_left > 0 {
                if next.segment.is_some() {
                    next.segment = None;
                } else if next.chunk.is_some() {
                    next.chunk = None;
                } else {
                    next.version = None;
                }
                markers_left -= 1;
                cur = Some(next);
            } else if comps_left > 1 {
                comps_left -= 1;
                next.components = self.components[..comps_left].to_vec().into();
                cur = Some(next);
            }
            Some(out)
        })
    }

    /// True if `self` is a (non-strict) prefix of `other`.
    pub fn is_prefix_of(&self, other: &ContentName) -> bool {
        if self.components.len() > other.components.len()
            || self.components[..] != other.components[..self.components.len()]
        {
            return false;
        }
        let full_comps = self.components.len() == other.components.len();
        let fields = [
            (self.version, other.version),
            (self.chunk, other.chunk),
            (self.segment, other.segment),
        ];
        if !full_comps {
            return fields.iter().all(|(a, _)| a.is_none());
        }
        let mut ended = false;
        for (a, b) in fields {
            match a {
                None => ended = true,
                Some(x) => {
                    if ended || Some(x) != b {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Check `chunk == floor(segment / n)`.
    pub fn validate(&self, cfg: &NamingConfig) -> Result<(), NamingError> {
        if let (Some(c), Some(s)) = (self.chunk, self.segment) {
            if chunk_of(s, cfg.chunk_size)? != c {
                return Err(NamingError::ChunkMismatch {
                    chunk: c,
                    segment: s,
                    chunk_size: cfg.chunk_size,
                });
            }
        }
        Ok(())
    }
}

/// Parse with the default chunk size.
pub fn parse_name(text: &str) -> Result<ContentName, NamingError> {
    parse_name_with(text, &NamingConfig::default())
}

/// Parse, filling in the chunk of a bare `_s<int>` from `cfg`.
pub fn parse_name_with(text: &str, cfg: &NamingConfig) -> Result<ContentName, NamingError> {
    let rest = text
        .strip_prefix('/')
        .ok_or(NamingError::MissingLeadingSlash)?;
    let mut comps = Vec::new();
    let mut version = None;
    let mut chunk = None;
    let mut segment = None;
    let mut last_marker: Option<Marker> = None;
    for (i, comp) in rest.split('/').enumerate() {
        if comp.is_empty() {
            return Err(NamingError::EmptyComponent(i));
        }
        match marker(comp) {
            None => {
                if last_marker.is_some() {
                    return Err(NamingError::OutOfOrder(comp.to_string()));
                }
                comps.push(comp.to_string());
            }
            Some((m, digits)) => {
                let v = parse_marker_value(comp, digits)?;
                let rank = |m: Marker| m as u8;
                if last_marker.is_some_and(|p| rank(p) >= rank(m)) {
                    return Err(NamingError::OutOfOrder(comp.to_string()));
                }
                last_marker = Some(m);
                match m {
                    Marker::Version => version = Some(v),
                    Marker::Chunk => chunk = Some(v),
                    Marker::Segment => segment = Some(v),
                }
            }
        }
    }
    if comps.is_empty() {
        return Err(NamingError::EmptyComponent(0));
    }
    if let Some(s) = segment {
        let derived = chunk_of(s, cfg.chunk_size)?;
        match chunk {
            None => chunk = Some(derived),
            Some(c) if c != derived => {
                return Err(NamingError::ChunkMismatch {
                    chunk: c,
                    segment: s,
                    chunk_size: cfg.chunk_size,
                })
            }
            _ => {}
        }
    }
    Ok(ContentName {
        components: comps.into(),
        version,
        chunk,
        segment,
    })
}

impl FromStr for ContentName {
    type Err = NamingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_name(s)
    }
}

impl fmt::Display for ContentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.components.iter() {
            write!(f, "/{c}")?;
        }
        if let Some(v) = self.version {
            write!(f, "/_v{v}")?;
        }
        if let Some(c) = self.chunk {
            write!(f, "/_c{c}")?;
        }
        if let Some(s) = self.segment {
            write!(f, "/_s{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ContentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContentName({self})")
    }
}

/// A flow prefix plus its size `F` in packets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowId {
    pub prefix: ContentName,
    pub flow_size_pkts: u64,
}

impl FlowId {
    pub fn new(prefix: ContentName, flow_size_pkts: u64) -> Result<Self, NamingError> {
        if flow_size_pkts == 0 {
            return Err(NamingError::EmptyFlow);
        }
        if prefix.chunk.is_some() || prefix.segment.is_some() {
            return Err(NamingError::NotAFlowPrefix(prefix.to_string()));
        }
        Ok(FlowId {
            prefix,
            flow_size_pkts,
        })
    }
}
