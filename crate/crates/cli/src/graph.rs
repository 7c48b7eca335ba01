//! The ray orthogonality graph: 40 nodes labeled by catalog index, one
//! edge per orthogonal ray pair.

use kset_core::{dot, Catalog};

pub struct OrthogonalityGraph {
    pub nodes: Vec<u8>,
    /// ascending pairs (a, b) with a < b
    pub edges: Vec<(u8, u8)>,
}

pub fn orthogonality_graph(catalog: &Catalog) -> OrthogonalityGraph {
    let rays = catalog.rays();
    let nodes: Vec<u8> = rays
        .iter()
        .filter_map(|r| r.index().map(|i| i.get()))
        .collect();
    let mut edges = Vec::new();
    for (i, a) in rays.iter().enumerate() {
        for b in &rays[i + 1..] {
            if dot(a, b) == 0 {
                edges.push((
                    a.index().expect("catalog ray").get(),
                    b.index().expect("catalog ray").get(),
                ));
            }
        }
    }
    OrthogonalityGraph { nodes, edges }
}

impl OrthogonalityGraph {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph orthogonality {\n");
        for node in &self.nodes {
            out.push_str(&format!("  {node};\n"));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("  {a} -- {b};\n"));
        }
        out.push_str("}\n");
        out
    }
}
