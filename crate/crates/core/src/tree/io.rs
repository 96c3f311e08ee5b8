//! Line-oriented text form of a tree:
//!
//! ```text
//! #hilap-tree v1
//! id parent level diam measure flags [w]
//! ```
//!
//! `parent` is `-` for the root. `flags` is one of `I`, `C`, `S`, `Z`
//! (internal, cell, singleton, limit point), optionally followed by `+` when
//! the tree declares a divergent tail. An optional seventh column carries a
//! Whitney map.

use std::fmt::Write as _;

use super::spec::{finalize, Node};
use super::{BallKind, BallTree, WhitneyMap};
use crate::error::{Error, Result};

pub const HEADER: &str = "#hilap-tree v1";

pub fn write_tree(t: &BallTree, w: Option<&WhitneyMap>) -> String {
    let mut out = String::with_capacity(48 * t.len());
    out.push_str(HEADER);
    out.push('\n');
    for b in t.ball_ids() {
        let parent = t
            .parent(b)
            .map_or_else(|| "-".to_string(), |p| p.index().to_string());
        let mut flags = t.kind(b).flag().to_string();
        if b == t.root() && t.tail_divergent() {
            flags.push('+');
        }
        let _ = write!(
            out,
            "{} {} {} {:e} {:e} {}",
            b.index(),
            parent,
            t.level(b),
            t.diam(b),
            t.measure(b),
            flags
        );
        if let Some(w) = w {
            let _ = write!(out, " {:e}", w.get(b));
        }
        out.push('\n');
    }
    out
}

/// Parses the text form. Ids need not be contiguous or ordered; the result
/// is renumbered in preorder.
pub fn read_tree(text: &str) -> Result<(BallTree, Option<WhitneyMap>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == HEADER => {}
        Some((i, _)) => {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected `{HEADER}`"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty input".into(),
            })
        }
    }
    let mut rows = Vec::new();
    let mut tail_divergent = false;
    for (i, line) in lines {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 && f.len() != 7 {
            return Err(err(format!("expected 6 or 7 fields, found {}", f.len())));
        }
        let id: usize = f[0].parse().map_err(|_| err(format!("bad id `{}`", f[0])))?;
        let parent = match f[1] {
            "-" => None,
            s => Some(s.parse::<usize>().map_err(|_| err(format!("bad parent `{s}`")))?),
        };
        let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| err(format!("bad {what} `{s}`")));
        let diam = num(f[3], "diam")?;
        let measure = num(f[4], "measure")?;
        let mut flag = f[5].chars();
        let kind = flag
            .next()
            .and_then(BallKind::from_flag)
            .ok_or_else(|| err(format!("bad flags `{}`", f[5])))?;
        if flag.as_str() == "+" {
            tail_divergent = true;
        } else if !flag.as_str().is_empty() {
            return Err(err(format!("bad flags `{}`", f[5])));
        }
        let w = f.get(6).map(|s| num(s, "w")).transpose()?;
        rows.push((id, parent, diam, measure, kind, w));
    }
    let mut index = std::collections::HashMap::new();
    for (pos, r) in rows.iter().enumerate() {
        if index.insert(r.0, pos).is_some() {
            return Err(Error::MalformedTree(format!("duplicate id {}", r.0)));
        }
    }
    let mut nodes = Vec::with_capacity(rows.len());
    for r in &rows {
        let parent = r
            .1
            .map(|p| {
                index
                    .get(&p)
                    .copied()
                    .ok_or_else(|| Error::MalformedTree(format!("unknown parent {p}")))
            })
            .transpose()?;
        nodes.push(Node {
            parent,
            diam: r.2,
            measure: r.3,
            kind: Some(r.4),
        });
    }
    let t = finalize(&nodes, false, tail_divergent)?;
    let has_w = rows.iter().filter(|r| r.5.is_some()).count();
    let w = if has_w == 0 {
        None
    } else if has_w != rows.len() {
        return Err(Error::MalformedTree("w column present on some rows only".into()));
    } else {
        // Without collapsing, preorder renumbering is a bijection; recover it
        // by matching the structural walk.
        let order = preorder_of(&nodes);
        let mut values = vec![0.0; t.len()];
        for (new, old) in order.into_iter().enumerate() {
            values[new] = rows[old].5.unwrap_or(0.0);
        }
        Some(WhitneyMap::new(&t, values)?)
    };
    Ok((t, w))
}

fn preorder_of(nodes: &[Node]) -> Vec<usize> {
    let mut children = vec![Vec::new(); nodes.len()];
    let mut root = 0;
    for (i, n) in nodes.iter().enumerate() {
        match n.parent {
            Some(p) => children[p].push(i),
            None => root = i,
        }
    }
    let mut out = Vec::with_capacity(nodes.len());
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        out.push(v);
        stack.extend(children[v].iter().rev());
    }
    out
}
