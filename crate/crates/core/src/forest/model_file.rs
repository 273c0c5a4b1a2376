//! Text serialization of a trained iSARF pipeline.
//!
//! ```text
//! ISARF-MODEL v1
//! manifest_hash <hex>
//! seed <u64>
//! [standardization] <p>
//! <name> <mean> <std> <constant 0|1>
//! [selected] <k>
//! <index> <name>
//! [thresholds] <t>
//! <value>
//! [forests] <groups>
//! forest <g> trees <T> max_depth <d> mtry <m> seed <s> prior <v>
//! tree <i> nodes <N>
//! S <feature> <threshold> <left> <right>
//! L <count0> <count1>
//! [end]
//! ```
//!
//! Reals are written with 17 significant digits, so a load/save cycle
//! reproduces the file byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use super::cart::{CartTree, Node};
use super::isarf::{IsarfModel, SizeSplitForest};
use super::random_forest::RandomForest;
use crate::error::{Error, Result};
use crate::selection::StandardizationParams;

pub const MODEL_MAGIC: &str = "ISARF-MODEL v1";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn encode_model(m: &IsarfModel) -> String {
    let mut s = String::new();
    let st = &m.standardization;
    writeln!(s, "{MODEL_MAGIC}").unwrap();
    writeln!(s, "manifest_hash {}", m.manifest_hash).unwrap();
    writeln!(s, "seed {}", m.seed).unwrap();
    writeln!(s, "[standardization] {}", m.feature_names.len()).unwrap();
    for (j, name) in m.feature_names.iter().enumerate() {
        writeln!(s, "{name} {} {} {}", real(st.means[j]), real(st.stds[j]), st.constant[j] as u8).unwrap();
    }
    writeln!(s, "[selected] {}", m.selected.len()).unwrap();
    for &j in &m.selected {
        writeln!(s, "{j} {}", m.feature_names[j]).unwrap();
    }
    writeln!(s, "[thresholds] {}", m.core.thresholds.len()).unwrap();
    for &t in &m.core.thresholds {
        writeln!(s, "{}", real(t)).unwrap();
    }
    writeln!(s, "[forests] {}", m.core.forests.len()).unwrap();
    for (g, f) in m.core.forests.iter().enumerate() {
        writeln!(
            s,
            "forest {g} trees {} max_depth {} mtry {} seed {} prior {}",
            f.trees.len(),
            f.max_depth,
            f.mtry,
            f.seed,
            real(f.prior)
        )
        .unwrap();
        for (i, t) in f.trees.iter().enumerate() {
            writeln!(s, "tree {i} nodes {}", t.nodes.len()).unwrap();
            for node in &t.nodes {
                match node {
                    Node::Split { feature, threshold, left, right } => {
                        writeln!(s, "S {feature} {} {left} {right}", real(*threshold)).unwrap()
                    }
                    Node::Leaf { counts } => writeln!(s, "L {} {}", counts[0], counts[1]).unwrap(),
                }
            }
        }
    }
    s.push_str("[end]\n");
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((i, l)) => Ok((i + 1, l.split(' ').collect())),
            None => Err(Error::Format("model file ends early".into())),
        }
    }

    /// Reads `key value` pairs laid out as `tokens[0] tokens[1] ...`.
    fn expect(&mut self, head: &[&str]) -> Result<(usize, Vec<&'a str>)> {
        let (n, t) = self.next()?;
        if t.len() < head.len() || t.iter().zip(head).any(|(a, b)| a != b) {
            return Err(bad(n, &format!("expected `{}`", head.join(" "))));
        }
        Ok((n, t[head.len()..].to_vec()))
    }
}

fn bad(line: usize, msg: &str) -> Error {
    Error::Format(format!("model file line {line}: {msg}"))
}

fn parse<T: std::str::FromStr>(line: usize, tok: Option<&&str>) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| bad(line, "malformed field"))
}

fn arity(line: usize, t: &[&str], n: usize) -> Result<()> {
    if t.len() == n {
        Ok(())
    } else {
        Err(bad(line, &format!("expected {n} fields, got {}", t.len())))
    }
}

pub fn decode_model(text: &str) -> Result<IsarfModel> {
    let mut it = Lines { inner: text.lines().enumerate() };
    let (n, magic) = it.next()?;
    if magic.join(" ") != MODEL_MAGIC {
        return Err(bad(n, &format!("expected `{MODEL_MAGIC}`, found `{}`", magic.join(" "))));
    }
    let (n, t) = it.expect(&["manifest_hash"])?;
    arity(n, &t, 1)?;
    let manifest_hash = t[0].to_string();
    let (n, t) = it.expect(&["seed"])?;
    let seed: u64 = parse(n, t.first())?;

    let (n, t) = it.expect(&["[standardization]"])?;
    let p: usize = parse(n, t.first())?;
    let mut names = Vec::with_capacity(p);
    let mut st = StandardizationParams { means: vec![], stds: vec![], constant: vec![] };
    for _ in 0..p {
        let (n, t) = it.next()?;
        arity(n, &t, 4)?;
        names.push(t[0].to_string());
        st.means.push(parse(n, t.get(1))?);
        st.stds.push(parse(n, t.get(2))?);
        st.constant.push(match t[3] {
            "0" => false,
            "1" => true,
            _ => return Err(bad(n, "constant flag must be 0 or 1")),
        });
    }

    let (n, t) = it.expect(&["[selected]"])?;
    let k: usize = parse(n, t.first())?;
    let mut selected = Vec::with_capacity(k);
    for _ in 0..k {
        let (n, t) = it.next()?;
        arity(n, &t, 2)?;
        let j: usize = parse(n, t.first())?;
        if names.get(j).map(String::as_str) != Some(t[1]) {
            return Err(bad(n, "selected feature does not match the standardization table"));
        }
        selected.push(j);
    }

    let (n, t) = it.expect(&["[thresholds]"])?;
    let nt: usize = parse(n, t.first())?;
    let mut thresholds = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, t) = it.next()?;
        arity(n, &t, 1)?;
        thresholds.push(parse(n, t.first())?);
    }
    if !thresholds.windows(2).all(|w: &[f64]| w[0] < w[1]) {
        return Err(Error::Format("size thresholds are not strictly increasing".into()));
    }

    let (n, t) = it.expect(&["[forests]"])?;
    let groups: usize = parse(n, t.first())?;
    if groups != nt + 1 {
        return Err(bad(n, "group count must be one more than the threshold count"));
    }
    let mut forests = Vec::with_capacity(groups);
    for g in 0..groups {
        let (n, t) = it.expect(&["forest", &g.to_string(), "trees"])?;
        arity(n, &t, 9)?;
        let ntrees: usize = parse(n, t.first())?;
        let max_depth: usize = parse(n, t.get(2))?;
        let mtry: usize = parse(n, t.get(4))?;
        let fseed: u64 = parse(n, t.get(6))?;
        let prior: f64 = parse(n, t.get(8))?;
        if t[1] != "max_depth" || t[3] != "mtry" || t[5] != "seed" || t[7] != "prior" {
            return Err(bad(n, "malformed forest header"));
        }
        let mut trees = Vec::with_capacity(ntrees);
        for i in 0..ntrees {
            let (n, t) = it.expect(&["tree", &i.to_string(), "nodes"])?;
            let nn: usize = parse(n, t.first())?;
            let mut nodes = Vec::with_capacity(nn);
            for _ in 0..nn {
                let (n, t) = it.next()?;
                let node = match t.first().copied() {
                    Some("S") => {
                        arity(n, &t, 5)?;
                        let (left, right): (usize, usize) = (parse(n, t.get(3))?, parse(n, t.get(4))?);
                        if left >= nn || right >= nn {
                            return Err(bad(n, "child offset out of range"));
                        }
                        let feature: usize = parse(n, t.get(1))?;
                        if feature >= selected.len() {
                            return Err(bad(n, "split feature out of range"));
                        }
                        Node::Split { feature, threshold: parse(n, t.get(2))?, left, right }
                    }
                    Some("L") => {
                        arity(n, &t, 3)?;
                        Node::Leaf { counts: [parse(n, t.get(1))?, parse(n, t.get(2))?] }
                    }
                    _ => return Err(bad(n, "expected an S or L node")),
                };
                nodes.push(node);
            }
            trees.push(CartTree { nodes });
        }
        forests.push(RandomForest { trees, max_depth, mtry, seed: fseed, prior });
    }
    let (n, t) = it.next()?;
    if t != ["[end]"] {
        return Err(bad(n, "expected [end]"));
    }

    Ok(IsarfModel {
        feature_names: names,
        manifest_hash,
        seed,
        standardization: st,
        selected,
        core: SizeSplitForest { thresholds, forests },
    })
}

pub fn save_model(m: &IsarfModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_model(m)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<IsarfModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_model(&text)
}
