//! `key=value` sweep files.
//!
//! One key per line; keys are the input columns of the CSV output. A value
//! may be a comma-separated list, and the sweep visits the cartesian product
//! of all lists. Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use tilekit::api::variants::{Variant, VariantSpec};
use tilekit::{OperatorShape, TileShape};

use crate::CSV_HEADER;

/// CSV columns that can be set.
pub const INPUT_KEYS: [&str; 12] = [
    "variant", "m", "n", "k", "block_m", "block_n", "block_k", "op_m", "op_n", "op_k", "threads", "reps",
];

fn parse_lines(text: &str) -> Result<BTreeMap<&str, Vec<&str>>> {
    let mut keys = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value", no + 1))?;
        let key = key.trim();
        if !INPUT_KEYS.contains(&key) {
            if CSV_HEADER.contains(&key) {
                bail!("line {}: `{key}` is a measured column and cannot be set", no + 1);
            }
            bail!("line {}: unknown key `{key}`", no + 1);
        }
        let values: Vec<&str> = value.split(',').map(str::trim).collect();
        if values.iter().any(|v| v.is_empty()) {
            bail!("line {}: empty value for `{key}`", no + 1);
        }
        if keys.insert(key, values).is_some() {
            bail!("line {}: `{key}` given twice", no + 1);
        }
    }
    Ok(keys)
}

fn number(key: &str, v: &str) -> Result<usize> {
    let n: usize = v
        .parse()
        .with_context(|| format!("`{key}`: `{v}` is not a non-negative integer"))?;
    if n == 0 {
        bail!("`{key}` must be positive");
    }
    Ok(n)
}

/// Every `(spec, reps)` point of the sweep, in file-independent column order.
pub fn parse(text: &str) -> Result<Vec<(VariantSpec, usize)>> {
    let keys = parse_lines(text)?;
    let lists: Vec<Vec<&str>> = INPUT_KEYS
        .iter()
        .map(|k| keys.get(k).cloned().unwrap_or_default())
        .collect();
    let mut points = Vec::new();
    let mut idx = vec![0usize; INPUT_KEYS.len()];
    loop {
        let pick = |i: usize| lists[i].get(idx[i]).copied();
        let num = |i: usize| pick(i).map(|v| number(INPUT_KEYS[i], v)).transpose();
        let variant: Variant = pick(0).unwrap_or("dense").parse()?;
        if variant == Variant::Tc {
            bail!("tc is not available in sweep files; use `bench --variant tc`");
        }
        let (m, n, k) = (num(1)?, num(2)?, num(3)?);
        let first = m.or(n).or(k).unwrap_or(256);
        let mut spec = VariantSpec::new(variant, m.unwrap_or(first), n.unwrap_or(first), k.unwrap_or(first));
        spec.op = match (num(7)?, num(8)?, num(9)?) {
            (Some(a), Some(b), Some(c)) => Some(OperatorShape::new(a, b, c)),
            (None, None, None) => None,
            _ => bail!("op_m, op_n and op_k must be given together"),
        };
        spec.block = match (num(4)?, num(5)?, num(6)?) {
            (Some(a), Some(b), c) => Some(TileShape::new(a, b, c.unwrap_or(spec.op.map_or(8, |o| o.k)))),
            (None, None, None) => None,
            _ => bail!("block_m and block_n must be given together"),
        };
        spec.threads = num(10)?.unwrap_or(1);
        points.push((spec, num(11)?.unwrap_or(5)));

        let mut d = 0;
        loop {
            if d == idx.len() {
                return Ok(points);
            }
            idx[d] += 1;
            if idx[d] < lists[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
