//! Plain-text run configuration.
//!
//! ```text
//! # comment
//! seed = 7
//! spectrum = {kind: explicit, alphas: 1.0, -0.5, 0.25}
//! solver = {T: 20, tol: 1e-8,
//!           gamma: 0.25}
//! ```
//!
//! A line is `name = value`. A value in braces is a block of `key: value`
//! items; a bare item after a key extends that key's list. Blocks may span
//! lines until the closing brace.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spectral::SpectrumSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    fields: Vec<(String, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    Block(Block),
    Scalar(String),
}

fn parse_num<T: std::str::FromStr>(block: &str, key: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Config(format!("{block}.{key}: cannot parse {s:?}")))
}

impl Block {
    pub fn new(name: &str) -> Self {
        Block { name: name.to_string(), fields: Vec::new() }
    }

    /// Parse the inside of `{...}`.
    pub fn parse(name: &str, body: &str) -> Result<Self> {
        let mut block = Block::new(name);
        for item in body.split(',').map(str::trim) {
            if item.is_empty() {
                return Err(Error::Config(format!("{name}: empty item")));
            }
            match item.split_once(':') {
                Some((k, v)) => {
                    let (k, v) = (k.trim(), v.trim());
                    if k.is_empty() || v.is_empty() {
                        return Err(Error::Config(format!("{name}: malformed item {item:?}")));
                    }
                    if block.has(k) {
                        return Err(Error::Config(format!("{name}: duplicate key {k:?}")));
                    }
                    block.fields.push((k.to_string(), vec![v.to_string()]));
                }
                None => match block.fields.last_mut() {
                    Some((_, list)) => list.push(item.to_string()),
                    None => return Err(Error::Config(format!("{name}: value {item:?} before any key"))),
                },
            }
        }
        Ok(block)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let v = vec![value.to_string()];
        match self.fields.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = v,
            None => self.fields.push((key.to_string(), v)),
        }
    }

    pub fn set_list(&mut self, key: &str, values: &[f64]) {
        let v: Vec<String> = values.iter().map(|x| x.to_string()).collect();
        match self.fields.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = v,
            None => self.fields.push((key.to_string(), v)),
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.fields.iter().any(|(k, _)| k == key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(k, _)| k.as_str())
    }

    /// Reject keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => {
                Err(Error::Config(format!("{}: unknown key {k:?} (expected one of {})", self.name, allowed.join(", "))))
            }
            None => Ok(()),
        }
    }

    fn raw(&self, key: &str) -> Option<&[String]> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_slice())
    }

    fn single(&self, key: &str) -> Result<Option<&str>> {
        match self.raw(key) {
            None => Ok(None),
            Some([v]) => Ok(Some(v.as_str())),
            Some(_) => Err(Error::Config(format!("{}.{key}: expected one value, got a list", self.name))),
        }
    }

    pub fn str(&self, key: &str) -> Result<Option<&str>> {
        self.single(key)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str> {
        Ok(self.single(key)?.unwrap_or(default))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.single(key)?.map(|s| parse_num(&self.name, key, s)).transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| Error::Config(format!("{}: missing key {key:?}", self.name)))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.single(key)?.map(|s| parse_num(&self.name, key, s)).transpose()?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.single(key)?.map(|s| parse_num(&self.name, key, s)).transpose()?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.single(key)? {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(s) => Err(Error::Config(format!("{}.{key}: expected true or false, got {s:?}", self.name))),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key).map(|vs| vs.iter().map(|s| parse_num(&self.name, key, s)).collect()).transpose()
    }

    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.raw(key).map(|vs| vs.iter().map(|s| parse_num(&self.name, key, s)).collect()).transpose()
    }
}

/// Parsed configuration plus the verbatim text it came from.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    text: String,
    entries: BTreeMap<String, Entry>,
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut lines = text.lines().enumerate();
        while let Some((no, line)) = lines.next() {
            let line = strip_comment(line).trim();
            if line.is_empty() {
                continue;
            }
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `name = value`", no + 1)))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::Config(format!("line {}: bad name {name:?}", no + 1)));
            }
            let mut value = value.trim().to_string();
            let entry = if value.starts_with('{') {
                while !value.contains('}') {
                    let (_, more) =
                        lines.next().ok_or_else(|| Error::Config(format!("block {name:?} is not closed")))?;
                    value.push(' ');
                    value.push_str(strip_comment(more).trim());
                }
                let close = value.find('}').unwrap();
                if !value[close + 1..].trim().is_empty() {
                    return Err(Error::Config(format!("block {name:?}: text after closing brace")));
                }
                Entry::Block(Block::parse(name, &value[1..close])?)
            } else if value.is_empty() {
                return Err(Error::Config(format!("line {}: {name} has no value", no + 1)));
            } else {
                Entry::Scalar(value)
            };
            if entries.insert(name.to_string(), entry).is_some() {
                return Err(Error::Config(format!("{name} is defined twice")));
            }
        }
        Ok(RunConfig { text: text.to_string(), entries })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn block(&self, name: &str) -> Result<Option<&Block>> {
        match self.entries.get(name) {
            None => Ok(None),
            Some(Entry::Block(b)) => Ok(Some(b)),
            Some(Entry::Scalar(_)) => Err(Error::Config(format!("{name} must be a block"))),
        }
    }

    pub fn require_block(&self, name: &str) -> Result<&Block> {
        self.block(name)?.ok_or_else(|| Error::Config(format!("missing {name} block")))
    }

    /// The named block, or an empty one.
    pub fn block_or_empty(&self, name: &str) -> Result<Block> {
        Ok(self.block(name)?.cloned().unwrap_or_else(|| Block::new(name)))
    }

    pub fn scalar(&self, name: &str) -> Result<Option<&str>> {
        match self.entries.get(name) {
            None => Ok(None),
            Some(Entry::Scalar(s)) => Ok(Some(s)),
            Some(Entry::Block(_)) => Err(Error::Config(format!("{name} must be a scalar"))),
        }
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        self.scalar("seed")?
            .map(|s| s.parse().map_err(|_| Error::Config(format!("seed: cannot parse {s:?}"))))
            .transpose()
    }

    pub fn set_block(&mut self, block: Block) {
        self.entries.insert(block.name.clone(), Entry::Block(block));
    }

    /// SHA-256 of the verbatim text followed by `extra` (command-line
    /// overrides), hex encoded.
    pub fn hash(&self, extra: &str) -> String {
        let mut h = Sha256::new();
        h.update(self.text.as_bytes());
        h.update(b"\n--\n");
        h.update(extra.as_bytes());
        hex::encode(h.finalize())
    }
}

/// `spectrum = {kind: explicit|harmonic|geometric|uniform, ...}`.
///
/// Keys: `alphas` (explicit), `n`, `ratio` (geometric), `seed` (uniform),
/// `scale`, and `mirror: true` to append the negated ladder.
pub fn spectrum_from_block(b: &Block, seed: u64) -> Result<SpectrumSpec> {
    b.check_keys(&["kind", "n", "alphas", "ratio", "seed", "scale", "mirror"])?;
    let kind = b.str("kind")?.ok_or_else(|| Error::Config("spectrum: missing key \"kind\"".into()))?;
    let n = || -> Result<usize> {
        let n = b.usize_or("n", 0)?;
        if n == 0 {
            return Err(Error::Config(format!("spectrum: kind {kind} needs n >= 1")));
        }
        Ok(n)
    };
    let mut spec = match kind {
        "explicit" => {
            let alphas =
                b.f64_list("alphas")?.ok_or_else(|| Error::Config("spectrum: explicit kind needs alphas".into()))?;
            SpectrumSpec::new(alphas)?
        }
        "harmonic" => SpectrumSpec::harmonic(n()?)?,
        "geometric" => SpectrumSpec::geometric(n()?, b.f64_or("ratio", 0.5)?)?,
        "uniform" => SpectrumSpec::uniform(n()?, b.u64_or("seed", seed)?)?,
        other => return Err(Error::Config(format!("spectrum: unknown kind {other:?}"))),
    };
    if let Some(c) = b.f64("scale")? {
        spec = spec.scaled(c)?;
    }
    if b.bool_or("mirror", false)? {
        let neg = SpectrumSpec::new(spec.alphas().iter().map(|a| -a).collect())?;
        spec = SpectrumSpec::join(&[spec, neg])?;
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_scalars_and_lists() {
        let c = RunConfig::parse(
            "# run\nseed = 7\nspectrum = {kind: explicit, alphas: 1.0, -0.5, 0.25}  # trailing\nsolver = {T: 20,\n  tol: 1e-8}\n",
        )
        .unwrap();
        assert_eq!(c.seed().unwrap(), Some(7));
        let s = c.require_block("spectrum").unwrap();
        assert_eq!(s.f64_list("alphas").unwrap().unwrap(), vec![1.0, -0.5, 0.25]);
        assert!(s.f64("alphas").is_err());
        let solver = c.require_block("solver").unwrap();
        assert_eq!(solver.f64("T").unwrap(), Some(20.0));
        assert_eq!(solver.f64("tol").unwrap(), Some(1e-8));
        let spec = spectrum_from_block(s, 0).unwrap();
        assert_eq!(spec.alphas(), &[1.0, -0.5, 0.25]);
    }

    #[test]
    fn malformed_input() {
        for bad in [
            "spectrum {kind: harmonic}",
            "spectrum = {kind: harmonic",
            "a = 1\na = 2",
            "b = {, x: 1}",
            "b = {1, x: 2}",
            "b = {x: 1, x: 2}",
            "b = {x: 1} extra",
            "= 3",
        ] {
            assert!(matches!(RunConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn spectrum_kinds() {
        let c = RunConfig::parse("spectrum = {kind: harmonic, n: 4, mirror: true}").unwrap();
        let s = spectrum_from_block(c.require_block("spectrum").unwrap(), 0).unwrap();
        assert_eq!(s.dim(), 8);
        assert_eq!(s.alphas()[4], -1.0);
        let c = RunConfig::parse("spectrum = {kind: spiral, n: 4}").unwrap();
        assert!(spectrum_from_block(c.require_block("spectrum").unwrap(), 0).is_err());
        let c = RunConfig::parse("spectrum = {kind: harmonic, m: 4}").unwrap();
        assert!(spectrum_from_block(c.require_block("spectrum").unwrap(), 0).is_err());
    }

    #[test]
    fn hash_tracks_text_and_overrides() {
        let a = RunConfig::parse("seed = 1").unwrap();
        let b = RunConfig::parse("seed = 2").unwrap();
        assert_ne!(a.hash(""), b.hash(""));
        assert_ne!(a.hash(""), a.hash("seed=3"));
        assert_eq!(a.hash("x"), RunConfig::parse("seed = 1").unwrap().hash("x"));
        assert_eq!(a.hash("").len(), 64);
    }
}
