//! Named benchmark problems.
//!
//! Geometry constants follow the usual literature setups; each problem is a
//! plain [`ProblemSpec`] so any field can be adjusted. Coordinates are in
//! fractions of the domain, origin lower-left, y up. Every problem applies a
//! unit total load.

use crate::error::{invalid, Result};
use crate::fea::{GridMesh, Passive};
use crate::net::Extrude;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

/// A set of nodes, located in domain fractions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeSet {
    Edge(Edge),
    /// Edge nodes with the running coordinate inside `[from, to]`.
    EdgeSpan { edge: Edge, from: f64, to: f64 },
    /// Node nearest the point `(fx, fy)`.
    Point { fx: f64, fy: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub nodes: NodeSet,
    pub fix_x: bool,
    pub fix_y: bool,
}

/// Total force `(fx, fy)` split evenly over the nodes of the set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Load {
    pub nodes: NodeSet,
    pub fx: f64,
    pub fy: f64,
}

/// A set of elements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    /// Elements whose centers fall inside `[x0, x1] x [y0, y1]` (fractions).
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// The single layer of elements along an edge.
    EdgeLayer(Edge),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub nelx: usize,
    pub nely: usize,
    pub h: f64,
    pub supports: Vec<Support>,
    pub loads: Vec<Load>,
    pub passive_solid: Vec<Region>,
    pub passive_void: Vec<Region>,
    pub extrude: Extrude,
    pub target_fraction: f64,
    pub l_min: f64,
    pub l_max: f64,
}

pub const PROBLEM_NAMES: [&str; 7] = [
    "mid_cantilever",
    "tip_cantilever",
    "mbb",
    "michell",
    "l_bracket",
    "distributed_load",
    "tensile_bar",
];

/// Optional replacements for a problem's defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProblemOverrides {
    pub nelx: Option<usize>,
    pub nely: Option<usize>,
    pub h: Option<f64>,
    pub target_fraction: Option<f64>,
    pub l_min: Option<f64>,
    pub l_max: Option<f64>,
}

/// Width and height fractions of the void block cut from the L-bracket's
/// bounding square (upper-right corner).
pub const L_BRACKET_CUT: (f64, f64) = (0.4, 0.6);

fn support(nodes: NodeSet, fix_x: bool, fix_y: bool) -> Support {
    Support { nodes, fix_x, fix_y }
}

fn down(nodes: NodeSet) -> Load {
    Load { nodes, fx: 0.0, fy: -1.0 }
}

fn point(fx: f64, fy: f64) -> NodeSet {
    NodeSet::Point { fx, fy }
}

impl ProblemSpec {
    pub fn named(name: &str) -> Result<Self> {
        let base = |name: &str, nelx, nely, target_fraction, l_min, l_max| ProblemSpec {
            name: name.to_string(),
            nelx,
            nely,
            h: 1.0,
            supports: Vec::new(),
            loads: Vec::new(),
            passive_solid: Vec::new(),
            passive_void: Vec::new(),
            extrude: Extrude::None,
            target_fraction,
            l_min,
            l_max,
        };
        let spec = match name {
            "mid_cantilever" => ProblemSpec {
                supports: vec![support(NodeSet::Edge(Edge::Left), true, true)],
                loads: vec![down(point(1.0, 0.5))],
                ..base(name, 60, 30, 0.5, 6.0, 30.0)
            },
            "tip_cantilever" => ProblemSpec {
                supports: vec![support(NodeSet::Edge(Edge::Left), true, true)],
                loads: vec![down(point(1.0, 0.0))],
                ..base(name, 60, 30, 0.5, 6.0, 30.0)
            },
            "mbb" => ProblemSpec {
                supports: vec![
                    support(NodeSet::Edge(Edge::Left), true, false),
                    support(point(1.0, 0.0), false, true),
                ],
                loads: vec![down(point(0.0, 1.0))],
                ..base(name, 60, 30, 0.5, 6.0, 30.0)
            },
            "michell" => ProblemSpec {
                supports: vec![support(point(0.0, 0.0), true, true), support(point(1.0, 0.0), false, true)],
                loads: vec![down(point(0.5, 0.0))],
                ..base(name, 60, 30, 0.3, 6.0, 30.0)
            },
            "l_bracket" => {
                let (cut_w, cut_h) = L_BRACKET_CUT;
                let arm = 1.0 - cut_h;
                ProblemSpec {
                    supports: vec![support(
                        NodeSet::EdgeSpan {
                            edge: Edge::Top,
                            from: 0.0,
                            to: 1.0 - cut_w,
                        },
                        true,
                        true,
                    )],
                    loads: vec![down(point(1.0, arm / 2.0))],
                    passive_void: vec![Region::Box {
                        x0: 1.0 - cut_w,
                        x1: 1.0,
                        y0: arm,
                        y1: 1.0,
                    }],
                    ..base(name, 50, 50, 0.4, 4.0, 30.0)
                }
            }
            "distributed_load" => ProblemSpec {
                supports: vec![support(point(0.0, 0.0), true, true), support(point(1.0, 0.0), false, true)],
                loads: vec![down(NodeSet::Edge(Edge::Top))],
                passive_solid: vec![Region::EdgeLayer(Edge::Top)],
                ..base(name, 60, 30, 0.45, 4.0, 30.0)
            },
            "tensile_bar" => ProblemSpec {
                supports: vec![
                    support(NodeSet::Edge(Edge::Left), true, false),
                    support(point(0.0, 0.5), false, true),
                ],
                loads: vec![Load {
                    nodes: NodeSet::Edge(Edge::Right),
                    fx: 1.0,
                    fy: 0.0,
                }],
                passive_solid: vec![Region::EdgeLayer(Edge::Right)],
                extrude: Extrude::X,
                ..base(name, 60, 30, 0.5, 6.0, 30.0)
            },
            other => {
                return Err(invalid(format!(
                    "unknown problem '{other}'; valid names are {}",
                    PROBLEM_NAMES.join(", ")
                )))
            }
        };
        Ok(spec)
    }

    pub fn with_overrides(mut self, o: &ProblemOverrides) -> Self {
        self.nelx = o.nelx.unwrap_or(self.nelx);
        self.nely = o.nely.unwrap_or(self.nely);
        self.h = o.h.unwrap_or(self.h);
        self.target_fraction = o.target_fraction.unwrap_or(self.target_fraction);
        self.l_min = o.l_min.unwrap_or(self.l_min);
        self.l_max = o.l_max.unwrap_or(self.l_max);
        self
    }

    fn nodes(&self, mesh: &GridMesh, set: NodeSet) -> Result<Vec<usize>> {
        let (nx, ny) = (self.nelx, self.nely);
        let within = |v: f64| (-1e-12..=1.0 + 1e-12).contains(&v);
        match set {
            NodeSet::Edge(edge) => Ok(edge_nodes(mesh, edge)),
            NodeSet::EdgeSpan { edge, from, to } => {
                if !(within(from) && within(to) && from <= to) {
                    return Err(invalid(format!("edge span [{from}, {to}] leaves the domain")));
                }
                let len = match edge {
                    Edge::Left | Edge::Right => ny,
                    Edge::Top | Edge::Bottom => nx,
                } as f64;
                Ok(edge_nodes(mesh, edge)
                    .into_iter()
                    .enumerate()
                    .filter(|(k, _)| {
                        let t = *k as f64 / len;
                        t >= from - 1e-12 && t <= to + 1e-12
                    })
                    .map(|(_, n)| n)
                    .collect())
            }
            NodeSet::Point { fx, fy } => {
                if !(within(fx) && within(fy)) {
                    return Err(invalid(format!("point ({fx}, {fy}) lies outside the domain")));
                }
                let i = (fx * nx as f64).round() as usize;
                let j = (fy * ny as f64).round() as usize;
                Ok(vec![mesh.node_index(i.min(nx), j.min(ny))])
            }
        }
    }

    fn region_elements(&self, mesh: &GridMesh, r: &Region) -> Result<Vec<usize>> {
        let (nx, ny) = (self.nelx, self.nely);
        let inside = |e: &usize| -> bool {
            let (i, j) = mesh.element_ij(*e);
            match *r {
                Region::Box { x0, x1, y0, y1 } => {
                    let cx = (i as f64 + 0.5) / nx as f64;
                    let cy = (j as f64 + 0.5) / ny as f64;
                    cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1
                }
                Region::EdgeLayer(Edge::Left) => i == 0,
                Region::EdgeLayer(Edge::Right) => i == nx - 1,
                Region::EdgeLayer(Edge::Bottom) => j == 0,
                Region::EdgeLayer(Edge::Top) => j == ny - 1,
            }
        };
        if let Region::Box { x0, x1, y0, y1 } = *r {
            if !(x0 <= x1 && y0 <= y1 && x0 >= 0.0 && y0 >= 0.0 && x1 <= 1.0 && y1 <= 1.0) {
                return Err(invalid(format!("region {r:?} leaves the domain")));
            }
        }
        Ok((0..mesh.n_elements()).filter(inside).collect())
    }

    /// Builds the mesh with supports, loads and passive elements applied.
    pub fn build_mesh(&self) -> Result<GridMesh> {
        let mut mesh = GridMesh::new(self.nelx, self.nely, self.h)?;
        for s in &self.supports {
            for n in self.nodes(&mesh, s.nodes)? {
                mesh.fix_node(n, s.fix_x, s.fix_y)?;
            }
        }
        for l in &self.loads {
            let nodes = self.nodes(&mesh, l.nodes)?;
            let share = 1.0 / nodes.len() as f64;
            for n in nodes {
                mesh.add_nodal_force(n, l.fx * share, l.fy * share)?;
            }
        }
        for r in &self.passive_solid {
            for e in self.region_elements(&mesh, r)? {
                mesh.set_passive(e, Passive::Solid)?;
            }
        }
        for r in &self.passive_void {
            for e in self.region_elements(&mesh, r)? {
                mesh.set_passive(e, Passive::Void)?;
            }
        }
        Ok(mesh)
    }
}

fn edge_nodes(mesh: &GridMesh, edge: Edge) -> Vec<usize> {
    match edge {
        Edge::Left => mesh.left_edge_nodes(),
        Edge::Right => mesh.right_edge_nodes(),
        Edge::Bottom => mesh.bottom_edge_nodes(),
        Edge::Top => mesh.top_edge_nodes(),
    }
}

/// `make_problem`: spec with overrides plus its configured mesh.
pub fn make_problem(name: &str, overrides: &ProblemOverrides) -> Result<(ProblemSpec, GridMesh)> {
    let spec = ProblemSpec::named(name)?.with_overrides(overrides);
    let mesh = spec.build_mesh()?;
    Ok((spec, mesh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fea::assemble_and_solve;

    #[test]
    fn mid_cantilever_defaults() {
        let o = ProblemOverrides {
            nelx: Some(60),
            nely: Some(30),
            ..Default::default()
        };
        let (_, mesh) = make_problem("mid_cantilever", &o).unwrap();
        assert_eq!(mesh.n_elements(), 1800);
        assert_eq!(mesh.fixed_dofs().len(), 62);
    }

    #[test]
    fn l_bracket_void_block() {
        let (spec, mesh) = make_problem("l_bracket", &ProblemOverrides::default()).unwrap();
        let expected = (spec.nelx as f64 * 0.4) as usize * (spec.nely as f64 * 0.6) as usize;
        assert_eq!(mesh.passive_void().len(), expected);
    }

    #[test]
    fn tensile_bar_extrudes_and_keeps_right_column() {
        let (spec, mesh) = make_problem("tensile_bar", &ProblemOverrides::default()).unwrap();
        assert_eq!(spec.extrude, Extrude::X);
        let right: Vec<usize> = (0..spec.nely).map(|j| mesh.element_index(spec.nelx - 1, j)).collect();
        assert_eq!(mesh.passive_solid(), right);
    }

    #[test]
    fn distributed_load_keeps_top_row() {
        let (spec, mesh) = make_problem("distributed_load", &ProblemOverrides::default()).unwrap();
        let top: Vec<usize> = (0..spec.nelx).map(|i| mesh.element_index(i, spec.nely - 1)).collect();
        assert_eq!(mesh.passive_solid(), top);
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = make_problem("bridge", &ProblemOverrides::default()).unwrap_err();
        assert!(err.to_string().contains("mid_cantilever"));
    }

    #[test]
    fn every_problem_is_solvable_with_unit_load() {
        for name in PROBLEM_NAMES {
            let o = ProblemOverrides {
                nelx: Some(20),
                nely: Some(10),
                ..Default::default()
            };
            let (_, mesh) = make_problem(name, &o).unwrap();
            let total: f64 = mesh
                .load_vector()
                .chunks(2)
                .map(|f| (f[0] * f[0] + f[1] * f[1]).sqrt())
                .sum::<f64>();
            let net: (f64, f64) = mesh
                .load_vector()
                .chunks(2)
                .fold((0.0, 0.0), |(a, b), f| (a + f[0], b + f[1]));
            assert!(((net.0.powi(2) + net.1.powi(2)).sqrt() - 1.0).abs() < 1e-12, "{name}");
            assert!(total > 0.0);
            let r = assemble_and_solve(&mesh, &vec![1.0; mesh.n_elements()]);
            assert!(r.is_ok(), "{name}: {r:?}");
        }
    }
}
