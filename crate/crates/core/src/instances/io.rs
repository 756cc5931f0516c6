//! Instance files.
//!
//! The canonical format is one JSON document
//! `{"n", "directed", "edges": [[u, v, w], ...], "alpha", "s"}`. Floats are
//! written in shortest round-trip form, so save followed by load is exact.
//!
//! Real datasets come as an edge list of `u v [w]` lines plus an opinions
//! file of `id opinion [alpha]` lines. Node ids are arbitrary tokens and are
//! numbered in the order the opinions file lists them. Missing weights are 1
//! and missing resistances 1/2. Lines starting with `#` or `%` are comments.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{equilibrium, mean, median, Instance, Network, NetworkRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InstanceFormat {
    Canonical,
    EdgeListPair { opinions: PathBuf, directed: bool },
}

#[derive(Serialize, Deserialize)]
struct InstanceRecord {
    #[serde(flatten)]
    network: NetworkRecord,
    alpha: Vec<f64>,
    s: Vec<f64>,
}

pub fn to_json(instance: &Instance) -> Result<String> {
    let record = InstanceRecord {
        network: NetworkRecord::from(instance.network()),
        alpha: instance.alpha().to_vec(),
        s: instance.s().to_vec(),
    };
    Ok(serde_json::to_string(&record)?)
}

pub fn from_json(text: &str) -> Result<Instance> {
    let record: InstanceRecord = serde_json::from_str(text)?;
    let net = Network::try_from(record.network)?;
    Instance::new(net, record.alpha, record.s)
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<()> {
    fs::write(path, to_json(instance)?)?;
    Ok(())
}

pub fn load_instance(path: &Path, format: &InstanceFormat) -> Result<Instance> {
    match format {
        InstanceFormat::Canonical => from_json(&fs::read_to_string(path)?),
        InstanceFormat::EdgeListPair { opinions, directed } => {
            Ok(load_edge_list_pair(path, opinions, *directed)?.0)
        }
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn parse_f64(path: &Path, line: usize, token: &str, what: &str) -> Result<f64> {
    token.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("cannot parse {what} '{token}'"),
    })
}

fn unit(path: &Path, line: usize, value: f64, what: &str) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("{what} {value} lies outside [0, 1]"),
        })
    }
}

/// Loads an edge-list/opinions pair; also returns the original node ids.
pub fn load_edge_list_pair(
    edges_path: &Path,
    opinions_path: &Path,
    directed: bool,
) -> Result<(Instance, Vec<String>)> {
    let opinions_text = fs::read_to_string(opinions_path)?;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids = Vec::new();
    let mut s = Vec::new();
    let mut alpha = Vec::new();
    for (line, tokens) in data_lines(&opinions_text) {
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(Error::Parse {
                path: opinions_path.to_path_buf(),
                line,
                msg: "expected 'id opinion [alpha]'".into(),
            });
        }
        if index.contains_key(tokens[0]) {
            return Err(Error::Parse {
                path: opinions_path.to_path_buf(),
                line,
                msg: format!("node '{}' listed twice", tokens[0]),
            });
        }
        let opinion = parse_f64(opinions_path, line, tokens[1], "opinion")?;
        s.push(unit(opinions_path, line, opinion, "opinion")?);
        let a = match tokens.get(2) {
            Some(t) => unit(opinions_path, line, parse_f64(opinions_path, line, t, "resistance")?, "resistance")?,
            None => 0.5,
        };
        alpha.push(a);
        index.insert(tokens[0].to_string(), ids.len());
        ids.push(tokens[0].to_string());
    }
    if ids.is_empty() {
        return Err(Error::invalid(format!("{} lists no nodes", opinions_path.display())));
    }

    let edges_text = fs::read_to_string(edges_path)?;
    let mut seen = HashSet::new();
    let mut arcs = Vec::new();
    for (line, tokens) in data_lines(&edges_text) {
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(Error::Parse {
                path: edges_path.to_path_buf(),
                line,
                msg: "expected 'u v [w]'".into(),
            });
        }
        let lookup = |t: &str| {
            index.get(t).copied().ok_or_else(|| Error::Parse {
                path: edges_path.to_path_buf(),
                line,
                msg: format!("node '{t}' has no opinion"),
            })
        };
        let (u, v) = (lookup(tokens[0])?, lookup(tokens[1])?);
        let w = match tokens.get(2) {
            Some(t) => parse_f64(edges_path, line, t, "weight")?,
            None => 1.0,
        };
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::Parse {
                path: edges_path.to_path_buf(),
                line,
                msg: format!("weight {w} is not positive"),
            });
        }
        if u == v {
            log::warn!("{}:{line}: skipping self-loop on '{}'", edges_path.display(), tokens[0]);
            continue;
        }
        let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
        if !seen.insert(key) {
            log::warn!("{}:{line}: skipping duplicate edge", edges_path.display());
            continue;
        }
        arcs.push((u, v, w));
    }
    let net = Network::new(ids.len(), arcs, directed)?;
    Ok((Instance::new(net, alpha, s)?, ids))
}

/// Reads one opinion per data line: the only token, or the second of several.
pub(crate) fn read_opinion_column(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    data_lines(&text)
        .map(|(line, tokens)| {
            let token = if tokens.len() == 1 { tokens[0] } else { tokens[1] };
            unit(path, line, parse_f64(path, line, token, "opinion")?, "opinion")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub n: usize,
    pub m: usize,
    pub median: f64,
    pub mean: f64,
}

/// Node and edge counts with the median and mean equilibrium opinion.
pub fn instance_stats(instance: &Instance) -> Result<InstanceStats> {
    let x = equilibrium(instance)?.x_star;
    Ok(InstanceStats {
        n: instance.node_count(),
        m: instance.network().edge_count(),
        median: median(&x)?,
        mean: mean(&x)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_exact() {
        let net = Network::new(3, vec![(0, 1, 0.1 + 0.2), (1, 2, 1.0 / 3.0)], false).unwrap();
        let inst = Instance::new(net, vec![0.5, 1.0 / 7.0, 0.9], vec![0.3, 2.0 / 3.0, 1e-17]).unwrap();
        assert_eq!(from_json(&to_json(&inst).unwrap()).unwrap(), inst);
    }

    #[test]
    fn self_loop_flag_round_trips() {
        let net = Network::with_self_loops(2, vec![(0, 0, 2.0), (0, 1, 1.0)], true).unwrap();
        let inst = Instance::uniform(net, 0.5, vec![0.1, 0.2]).unwrap();
        let text = to_json(&inst).unwrap();
        assert!(text.contains("self_loops"));
        assert_eq!(from_json(&text).unwrap(), inst);
    }

    #[test]
    fn edge_list_defaults_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("edges.txt");
        let ops = dir.path().join("opinions.txt");
        fs::write(&edges, "# comment\na b\nb c 2.5\nb a\n").unwrap();
        fs::write(&ops, "a 0.2\nb 0.7 0.9\nc 0.4\n").unwrap();
        let (inst, ids) = load_edge_list_pair(&edges, &ops, false).unwrap();
        assert_eq!(ids, vec!["a", "b", "c"]);
        assert_eq!(inst.alpha(), &[0.5, 0.9, 0.5]);
        assert_eq!(inst.network().edge_count(), 2);
        assert_eq!(inst.network().degree(1), 3.5);

        fs::write(&edges, "a d\n").unwrap();
        assert!(matches!(
            load_edge_list_pair(&edges, &ops, false),
            Err(Error::Parse { line: 1, .. })
        ));
        fs::write(&edges, "a b\n").unwrap();
        fs::write(&ops, "a 0.2\nb 1.7\n").unwrap();
        assert!(matches!(
            load_edge_list_pair(&edges, &ops, false),
            Err(Error::Parse { line: 2, .. })
        ));
        fs::write(&ops, "a 0.2\nb x\n").unwrap();
        assert!(load_edge_list_pair(&edges, &ops, false).is_err());
    }

    #[test]
    fn stats_of_single_stubborn_node() {
        let inst = Instance::new(Network::new(1, vec![], true).unwrap(), vec![1.0], vec![0.3]).unwrap();
        let st = instance_stats(&inst).unwrap();
        assert_eq!((st.n, st.m, st.median, st.mean), (1, 0, 0.3, 0.3));
    }
}
