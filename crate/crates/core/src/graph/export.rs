//! JSON wire format shared with the UI and path CLI, plus GEXF output.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{BoardGraph, Edge, LayoutMap, LayoutParams, Point};
use crate::chess::Square;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNodeDoc {
    pub id: Square,
    pub weight: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdgeDoc {
    pub source: Square,
    pub target: Square,
    pub weight: u64,
}

/// `{nodes: [{id, weight, x, y}], edges: [{source, target, weight}]}`
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<GraphNodeDoc>,
    pub edges: Vec<GraphEdgeDoc>,
}

impl GraphDocument {
    pub fn new(graph: &BoardGraph, layout: Option<&LayoutMap>) -> GraphDocument {
        GraphDocument {
            nodes: graph
                .nodes()
                .map(|(id, weight)| {
                    let p = layout.and_then(|l| l.position(id));
                    GraphNodeDoc {
                        id,
                        weight,
                        x: p.map(|p| p.x),
                        y: p.map(|p| p.y),
                    }
                })
                .collect(),
            edges: graph
                .edges()
                .map(|(e, weight)| GraphEdgeDoc {
                    source: e.a,
                    target: e.b,
                    weight,
                })
                .collect(),
        }
    }

    /// Rebuilds the graph, and the layout when every node has a position.
    pub fn to_graph(&self) -> (BoardGraph, Option<LayoutMap>) {
        let nodes: BTreeMap<Square, u64> = self.nodes.iter().map(|n| (n.id, n.weight)).collect();
        let edges: BTreeMap<Edge, u64> = self
            .edges
            .iter()
            .filter(|e| e.source != e.target)
            .map(|e| (Edge::new(e.source, e.target), e.weight))
            .collect();
        let graph = BoardGraph::from_parts(nodes, edges);
        let positions: Option<BTreeMap<Square, Point>> = self
            .nodes
            .iter()
            .map(|n| Some((n.id, Point::new(n.x?, n.y?))))
            .collect();
        let layout = positions.filter(|p| !p.is_empty()).map(|positions| LayoutMap {
            positions,
            params: LayoutParams::default(),
            seed: 0,
        });
        (graph, layout)
    }

    pub fn to_gexf(&self) -> String {
        let mut s = String::new();
        s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        s.push_str("<gexf xmlns=\"http://gexf.net/1.3\" xmlns:viz=\"http://gexf.net/1.3/viz\" version=\"1.3\">\n");
        s.push_str("  <graph defaultedgetype=\"undirected\">\n");
        s.push_str("    <attributes class=\"node\">\n      <attribute id=\"0\" title=\"weight\" type=\"long\"/>\n    </attributes>\n");
        s.push_str("    <nodes>\n");
        for n in &self.nodes {
            let _ = write!(
                s,
                "      <node id=\"{0}\" label=\"{0}\">\n        <attvalues><attvalue for=\"0\" value=\"{1}\"/></attvalues>\n",
                n.id, n.weight
            );
            let _ = writeln!(s, "        <viz:size value=\"{:.3}\"/>", (n.weight as f64).sqrt());
            if let (Some(x), Some(y)) = (n.x, n.y) {
                let _ = writeln!(s, "        <viz:position x=\"{x:.6}\" y=\"{y:.6}\" z=\"0.0\"/>");
            }
            s.push_str("      </node>\n");
        }
        s.push_str("    </nodes>\n    <edges>\n");
        for (i, e) in self.edges.iter().enumerate() {
            let _ = writeln!(
                s,
                "      <edge id=\"{i}\" source=\"{}\" target=\"{}\" weight=\"{}\"/>",
                e.source, e.target, e.weight
            );
        }
        s.push_str("    </edges>\n  </graph>\n</gexf>\n");
        s
    }
}
