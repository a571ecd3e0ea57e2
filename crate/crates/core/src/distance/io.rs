//! Model files and training CSVs.
//!
//! Model file layout (UTF-8 text, one record per line):
//!
//! ```text
//! padguard-gbdt v1
//! base_score <f64>
//! learning_rate <f64>
//! trees <count>
//! tree <node_count>
//! S <feature> <threshold>      split, left subtree follows immediately
//! L <value>                    leaf
//! ...
//! ```
//!
//! Nodes of each tree are written in pre-order. Floats use the shortest
//! representation that parses back to the same bits.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{BBoxFeatures, GbdtError, GbdtModel, Node, RegressionTree, Sample};

pub const MODEL_HEADER: &str = "padguard-gbdt v1";

pub fn write_model<W: Write>(model: &GbdtModel, mut out: W) -> Result<(), GbdtError> {
    writeln!(out, "{MODEL_HEADER}")?;
    writeln!(out, "base_score {}", model.base_score)?;
    writeln!(out, "learning_rate {}", model.learning_rate)?;
    writeln!(out, "trees {}", model.trees.len())?;
    for tree in &model.trees {
        writeln!(out, "tree {}", tree.nodes().len())?;
        for node in tree.nodes() {
            match node {
                Node::Split {
                    feature, threshold, ..
                } => writeln!(out, "S {feature} {threshold}")?,
                Node::Leaf { value } => writeln!(out, "L {value}")?,
            }
        }
    }
    Ok(())
}

pub fn read_model<R: BufRead>(input: R) -> Result<GbdtModel, GbdtError> {
    let mut lines = input.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String), GbdtError> {
        match lines.next() {
            Some((i, l)) => Ok((i + 1, l?)),
            None => Err(GbdtError::Format(format!(
                "unexpected end of file, expected {what}"
            ))),
        }
    };
    let (_, header) = next("header")?;
    if header.trim() != MODEL_HEADER {
        return Err(GbdtError::Format(format!("unsupported header {header:?}")));
    }
    let base_score = keyed(next("base_score")?, "base_score")?;
    let learning_rate = keyed(next("learning_rate")?, "learning_rate")?;
    let n_trees: usize = keyed(next("trees")?, "trees")?;

    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let (line_no, line) = next("tree")?;
        let n_nodes: usize = keyed((line_no, line), "tree")?;
        let mut kinds = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let (ln, l) = next("node")?;
            let parts: Vec<&str> = l.split_whitespace().collect();
            let bad = || GbdtError::Format(format!("line {ln}: malformed node {l:?}"));
            let node = match parts.as_slice() {
                ["S", f, t] => Node::Split {
                    feature: f.parse().map_err(|_| bad())?,
                    threshold: t.parse().map_err(|_| bad())?,
                    right: 0,
                },
                ["L", v] => Node::Leaf {
                    value: v.parse().map_err(|_| bad())?,
                },
                _ => return Err(bad()),
            };
            kinds.push(node);
        }
        let linked = link_preorder(&mut kinds).ok_or_else(|| {
            GbdtError::Format(format!("tree at line {line_no} is not a valid pre-order"))
        })?;
        let tree = RegressionTree::from_preorder(linked)
            .ok_or_else(|| GbdtError::Format(format!("tree at line {line_no} is invalid")))?;
        trees.push(tree);
    }
    Ok(GbdtModel {
        base_score,
        learning_rate,
        trees,
    })
}

fn keyed<T: std::str::FromStr>(
    (line_no, line): (usize, String),
    key: &str,
) -> Result<T, GbdtError> {
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => v
            .parse()
            .map_err(|_| GbdtError::Format(format!("line {line_no}: bad value for {key}"))),
        _ => Err(GbdtError::Format(format!(
            "line {line_no}: expected `{key} <value>`"
        ))),
    }
}

/// Fills in right-child indices of a pre-order node list.
fn link_preorder(nodes: &mut [Node]) -> Option<Vec<Node>> {
    fn walk(nodes: &mut [Node], i: usize) -> Option<usize> {
        match nodes.get(i)? {
            Node::Leaf { .. } => Some(i + 1),
            Node::Split { .. } => {
                let right = walk(nodes, i + 1)?;
                if let Node::Split { right: r, .. } = &mut nodes[i] {
                    *r = right as u32;
                }
                walk(nodes, right)
            }
        }
    }
    (walk(nodes, 0)? == nodes.len()).then(|| nodes.to_vec())
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    distance_m: f64,
}

/// Writes `cx,cy,w,h,distance_m` rows with a header.
pub fn write_dataset_csv<W: Write>(data: &[Sample], out: W) -> Result<(), GbdtError> {
    let mut w = csv::Writer::from_writer(out);
    for s in data {
        w.serialize(CsvRow {
            cx: s.features.cx,
            cy: s.features.cy,
            w: s.features.w,
            h: s.features.h,
            distance_m: s.distance,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_csv<R: std::io::Read>(input: R) -> Result<Vec<Sample>, GbdtError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: CsvRow = row?;
        out.push(Sample {
            features: BBoxFeatures {
                cx: row.cx,
                cy: row.cy,
                w: row.w,
                h: row.h,
            },
            distance: row.distance_m,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{fit, GbdtHyperParams};

    fn sample_data() -> Vec<Sample> {
        (0..40)
            .map(|i| {
                let t = i as f64 / 40.0;
                Sample {
                    features: BBoxFeatures {
                        cx: t,
                        cy: 1.0 - t,
                        w: 0.05 + 0.1 * t,
                        h: 0.3 - 0.2 * t,
                    },
                    distance: 0.5 + 4.0 * t * t,
                }
            })
            .collect()
    }

    #[test]
    fn model_file_round_trip_is_exact() {
        let model = fit(
            &sample_data(),
            &GbdtHyperParams {
                n_estimators: 25,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_model(&model, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("padguard-gbdt v1\nbase_score "));
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn model_file_rejects_garbage() {
        assert!(read_model("padguard-gbdt v2\n".as_bytes()).is_err());
        let truncated =
            "padguard-gbdt v1\nbase_score 1\nlearning_rate 0.1\ntrees 1\ntree 3\nS 0 0.5\nL 1\n";
        assert!(read_model(truncated.as_bytes()).is_err());
        let bad_feature = "padguard-gbdt v1\nbase_score 1\nlearning_rate 0.1\ntrees 1\ntree 3\nS 9 0.5\nL 1\nL 2\n";
        assert!(read_model(bad_feature.as_bytes()).is_err());
        let ok = "padguard-gbdt v1\nbase_score 1\nlearning_rate 0.5\ntrees 1\ntree 3\nS 0 0.5\nL 1\nL 2\n";
        let m = read_model(ok.as_bytes()).unwrap();
        let f = BBoxFeatures {
            cx: 0.7,
            cy: 0.0,
            w: 0.1,
            h: 0.1,
        };
        assert_eq!(m.predict(&f), 2.0);
    }

    #[test]
    fn csv_round_trip() {
        let data = sample_data();
        let mut buf = Vec::new();
        write_dataset_csv(&data, &mut buf).unwrap();
        assert!(buf.starts_with(b"cx,cy,w,h,distance_m\n"));
        assert_eq!(read_dataset_csv(buf.as_slice()).unwrap(), data);
    }
}
