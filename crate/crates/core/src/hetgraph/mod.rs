//! Typed heterogeneous graph storage.
//!
//! Every declared edge type gets its reverse `r.<name>` materialized at build
//! time, so two-hop symmetric relations can always be formed. An edge type
//! declared symmetric (same source and destination type) is stored with both
//! directions merged and acts as its own reverse.

mod csr;
pub mod io;

use std::collections::HashMap;

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use csr::CsrAdjacency;

use crate::error::{Error, Result};

/// Prefix given to materialized reverse edge types.
pub const REVERSE_PREFIX: &str = "r.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexTypeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeTypeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexType {
    pub name: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeType {
    pub src: VertexTypeId,
    pub name: String,
    pub dst: VertexTypeId,
    /// The edge type this one was generated from, if it is a materialized reverse.
    pub reverse_of: Option<EdgeTypeId>,
    /// The reverse edge type. Points at itself for symmetric edge types.
    pub reverse: EdgeTypeId,
}

impl EdgeType {
    pub fn is_self_inverse(&self, id: EdgeTypeId) -> bool {
        self.reverse == id
    }
}

/// A vertex type's feature matrix, `count × feature_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub vertex_type: VertexTypeId,
    pub matrix: Array2<f32>,
}

impl FeatureTable {
    pub fn feature_dim(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Edge type declaration passed to [`build_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub src: String,
    pub name: String,
    pub dst: String,
    /// `(src_index, dst_index)` pairs.
    pub pairs: Vec<(u32, u32)>,
    pub symmetric: bool,
}

impl EdgeSpec {
    pub fn new(src: &str, name: &str, dst: &str, pairs: Vec<(u32, u32)>) -> Self {
        Self {
            src: src.to_string(),
            name: name.to_string(),
            dst: dst.to_string(),
            pairs,
            symmetric: false,
        }
    }

    pub fn symmetric(src: &str, name: &str, pairs: Vec<(u32, u32)>) -> Self {
        Self {
            symmetric: true,
            ..Self::new(src, name, src, pairs)
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeteroGraph {
    vertex_types: Vec<VertexType>,
    edge_types: Vec<EdgeType>,
    adjacency: Vec<CsrAdjacency>,
    features: Vec<Option<FeatureTable>>,
}

/// Builds a graph from vertex type counts and edge lists.
///
/// Reverse edge types are generated automatically. Duplicate edges within
/// one edge type are merged.
pub fn build_graph(vertex_types: &[(&str, usize)], edge_types: Vec<EdgeSpec>) -> Result<HeteroGraph> {
    let mut vts = Vec::with_capacity(vertex_types.len());
    let mut by_name = HashMap::new();
    for &(name, count) in vertex_types {
        if by_name.insert(name.to_string(), VertexTypeId(vts.len())).is_some() {
            return Err(Error::DuplicateVertexType(name.to_string()));
        }
        vts.push(VertexType {
            name: name.to_string(),
            count,
        });
    }
    let lookup = |name: &str| {
        by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertexType(name.to_string()))
    };

    let mut ets: Vec<EdgeType> = Vec::with_capacity(edge_types.len() * 2);
    let mut adjacency = Vec::with_capacity(edge_types.len() * 2);
    let mut triples: HashMap<(VertexTypeId, String, VertexTypeId), EdgeTypeId> = HashMap::new();
    let mut claim = |ets: &Vec<EdgeType>, src: VertexTypeId, name: &str, dst: VertexTypeId| {
        let id = EdgeTypeId(ets.len());
        if triples.insert((src, name.to_string(), dst), id).is_some() {
            return Err(Error::DuplicateEdgeType {
                src: vts[src.0].name.clone(),
                name: name.to_string(),
                dst: vts[dst.0].name.clone(),
            });
        }
        Ok(id)
    };

    for spec in edge_types {
        let src = lookup(&spec.src)?;
        let dst = lookup(&spec.dst)?;
        for &(s, d) in &spec.pairs {
            for (idx, vt) in [(s, src), (d, dst)] {
                let count = vts[vt.0].count;
                if idx as usize >= count {
                    return Err(Error::VertexIndexOutOfRange {
                        edge_type: spec.name.clone(),
                        vertex_type: vts[vt.0].name.clone(),
                        index: idx,
                        count,
                    });
                }
            }
        }
        for vt in [src, dst] {
            if vts[vt.0].count == 0 {
                return Err(Error::EmptyVertexType(vts[vt.0].name.clone()));
            }
        }
        let (n_src, n_dst) = (vts[src.0].count, vts[dst.0].count);

        if spec.symmetric {
            if src != dst {
                return Err(Error::AsymmetricEndpoints(spec.name));
            }
            let id = claim(&ets, src, &spec.name, dst)?;
            let mut pairs = spec.pairs.clone();
            pairs.extend(spec.pairs.iter().map(|&(s, d)| (d, s)));
            adjacency.push(CsrAdjacency::from_pairs(n_dst, n_src, &pairs));
            ets.push(EdgeType {
                src,
                name: spec.name,
                dst,
                reverse_of: None,
                reverse: id,
            });
        } else {
            let fwd = claim(&ets, src, &spec.name, dst)?;
            let rev_name = format!("{REVERSE_PREFIX}{}", spec.name);
            ets.push(EdgeType {
                src,
                name: spec.name.clone(),
                dst,
                reverse_of: None,
                reverse: EdgeTypeId(fwd.0 + 1),
            });
            claim(&ets, dst, &rev_name, src)?;
            ets.push(EdgeType {
                src: dst,
                name: rev_name,
                dst: src,
                reverse_of: Some(fwd),
                reverse: fwd,
            });
            let forward = CsrAdjacency::from_pairs(n_dst, n_src, &spec.pairs);
            let backward = forward.transpose();
            adjacency.push(forward);
            adjacency.push(backward);
        }
    }

    let features = vec![None; vts.len()];
    Ok(HeteroGraph {
        vertex_types: vts,
        edge_types: ets,
        adjacency,
        features,
    })
}

impl HeteroGraph {
    pub fn vertex_types(&self) -> &[VertexType] {
        &self.vertex_types
    }

    pub fn edge_types(&self) -> &[EdgeType] {
        &self.edge_types
    }

    pub fn vertex_type_ids(&self) -> impl Iterator<Item = VertexTypeId> {
        (0..self.vertex_types.len()).map(VertexTypeId)
    }

    pub fn edge_type_ids(&self) -> impl Iterator<Item = EdgeTypeId> {
        (0..self.edge_types.len()).map(EdgeTypeId)
    }

    pub fn vertex_type(&self, id: VertexTypeId) -> &VertexType {
        &self.vertex_types[id.0]
    }

    pub fn edge_type(&self, id: EdgeTypeId) -> &EdgeType {
        &self.edge_types[id.0]
    }

    pub fn adjacency(&self, id: EdgeTypeId) -> &CsrAdjacency {
        &self.adjacency[id.0]
    }

    pub fn vertex_type_id(&self, name: &str) -> Result<VertexTypeId> {
        self.vertex_types
            .iter()
            .position(|vt| vt.name == name)
            .map(VertexTypeId)
            .ok_or_else(|| Error::UnknownVertexType(name.to_string()))
    }

    pub fn edge_type_id(&self, src: &str, name: &str, dst: &str) -> Option<EdgeTypeId> {
        self.edge_types
            .iter()
            .position(|et| {
                et.name == name
                    && self.vertex_types[et.src.0].name == src
                    && self.vertex_types[et.dst.0].name == dst
            })
            .map(EdgeTypeId)
    }

    /// Edge types whose destination is `vt`, in declaration order.
    pub fn edge_types_into(&self, vt: VertexTypeId) -> Vec<EdgeTypeId> {
        self.edge_type_ids()
            .filter(|&e| self.edge_types[e.0].dst == vt)
            .collect()
    }

    /// `"src --name--> dst"`.
    pub fn render_edge(&self, e: EdgeTypeId) -> String {
        let et = &self.edge_types[e.0];
        format!(
            "{} --{}--> {}",
            self.vertex_types[et.src.0].name, et.name, self.vertex_types[et.dst.0].name
        )
    }

    pub fn features(&self, vt: VertexTypeId) -> Option<&FeatureTable> {
        self.features[vt.0].as_ref()
    }

    pub fn feature_dim(&self, vt: VertexTypeId) -> Option<usize> {
        self.features(vt).map(FeatureTable::feature_dim)
    }

    pub fn has_all_features(&self) -> bool {
        self.features.iter().all(Option::is_some)
    }

    /// Attaches a feature matrix. Rows must match the vertex count and every
    /// entry must be finite.
    pub fn attach_features(&mut self, vt: VertexTypeId, matrix: Array2<f32>) -> Result<()> {
        let name = &self.vertex_types[vt.0].name;
        if self.features[vt.0].is_some() {
            return Err(Error::FeaturesAlreadyAttached(name.clone()));
        }
        let count = self.vertex_types[vt.0].count;
        if matrix.nrows() != count || matrix.ncols() == 0 {
            return Err(Error::shape(
                format!("features of `{name}`"),
                (count, matrix.ncols().max(1)),
                matrix.dim(),
            ));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("features of `{name}`")));
        }
        self.features[vt.0] = Some(FeatureTable {
            vertex_type: vt,
            matrix,
        });
        Ok(())
    }

    /// Attaches seeded standard-Gaussian embeddings to a featureless type.
    pub fn attach_random_embeddings(&mut self, vt: VertexTypeId, dim: usize, seed: u64) -> Result<()> {
        if self.features[vt.0].is_some() {
            return Err(Error::FeaturesAlreadyAttached(self.vertex_types[vt.0].name.clone()));
        }
        let table = random_embeddings(vt, self.vertex_types[vt.0].count, dim, seed)?;
        self.features[vt.0] = Some(table);
        Ok(())
    }

    /// Raw feature matrices for every vertex type, in id order.
    pub fn raw_states(&self) -> Result<Vec<Array2<f32>>> {
        self.vertex_type_ids()
            .map(|vt| {
                self.features(vt)
                    .map(|f| f.matrix.clone())
                    .ok_or_else(|| Error::MissingFeatures(self.vertex_type(vt).name.clone()))
            })
            .collect()
    }
}

/// `count × dim` i.i.d. standard normal entries, a pure function of `seed`.
pub fn random_embeddings(vt: VertexTypeId, count: usize, dim: usize, seed: u64) -> Result<FeatureTable> {
    if dim == 0 {
        return Err(Error::Config("random embedding dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f32> = (0..count * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let matrix = Array2::from_shape_vec((count, dim), data).expect("shape matches length");
    Ok(FeatureTable {
        vertex_type: vt,
        matrix,
    })
}

/// `(D⁻¹ A) H` for one adjacency; zero-degree rows come back as zeros.
pub fn degree_normalized_product(adj: &CsrAdjacency, h: ArrayView2<'_, f32>) -> Result<Array2<f32>> {
    adj.mean_aggregate(h)
}
