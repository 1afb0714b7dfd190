//! Grouped transform `F(X, I_N(U))` and its adjoint.
//!
//! Each group `u` only sees the coordinates `x_u` of the nodes, so the full
//! transform is a sum of `|u|`-dimensional transforms, one per term. Groups are
//! evaluated in parallel and summed in term order, which keeps results
//! bitwise reproducible regardless of the thread count.

mod direct;
mod nfft;

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Basis, GroupedIndexSet, Term};

pub use nfft::FastParams;

use direct::AxisTable;
use nfft::{NfftGroup, WindowTable};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Scattered nodes stored coordinate-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    columns: Vec<Vec<f64>>,
    len: usize,
}

impl NodeSet {
    /// Builds a node set from points. Exponential-basis coordinates are reduced
    /// into `[0,1)`; cosine-basis coordinates must lie in `[0,1]`.
    pub fn from_points(points: &[Vec<f64>], basis: Basis) -> Result<Self> {
        let d = points.first().ok_or(Error::EmptyNodes)?.len();
        let mut columns = vec![Vec::with_capacity(points.len()); d];
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            for (col, &x) in columns.iter_mut().zip(p) {
                col.push(x);
            }
        }
        NodeSet::from_columns(columns, basis)
    }

    /// Builds a node set from one vector per coordinate.
    pub fn from_columns(mut columns: Vec<Vec<f64>>, basis: Basis) -> Result<Self> {
        let len = columns.first().map_or(0, Vec::len);
        if len == 0 {
            return Err(Error::EmptyNodes);
        }
        for col in &mut columns {
            if col.len() != len {
                return Err(Error::DimensionMismatch { expected: len, got: col.len() });
            }
            for x in col.iter_mut() {
                if !x.is_finite() {
                    return Err(Error::NodeOutOfDomain { value: *x });
                }
                match basis {
                    Basis::Exponential => {
                        let r = *x - x.floor();
                        *x = if r >= 1.0 { 0.0 } else { r };
                    }
                    Basis::Cosine => {
                        if !(0.0..=1.0).contains(x) {
                            return Err(Error::NodeOutOfDomain { value: *x });
                        }
                    }
                }
            }
        }
        Ok(NodeSet { columns, len })
    }

    pub fn dimension(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Nodes restricted to a subset of rows.
    pub fn select(&self, rows: &[usize]) -> NodeSet {
        NodeSet {
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
            len: rows.len(),
        }
    }
}

/// Coefficient vector in the flat layout of its index set.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupedCoefficients {
    index_set: Arc<GroupedIndexSet>,
    values: Vec<Complex64>,
}

impl GroupedCoefficients {
    pub fn zeros(index_set: Arc<GroupedIndexSet>) -> Self {
        let values = vec![ZERO; index_set.total_cardinality()];
        GroupedCoefficients { index_set, values }
    }

    pub fn from_values(index_set: Arc<GroupedIndexSet>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != index_set.total_cardinality() {
            return Err(Error::DimensionMismatch {
                expected: index_set.total_cardinality(),
                got: values.len(),
            });
        }
        Ok(GroupedCoefficients { index_set, values })
    }

    /// Real coefficients, as used with the cosine basis.
    pub fn from_real(index_set: Arc<GroupedIndexSet>, values: &[f64]) -> Result<Self> {
        let values = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        GroupedCoefficients::from_values(index_set, values)
    }

    pub fn index_set(&self) -> &Arc<GroupedIndexSet> {
        &self.index_set
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn group(&self, term_index: usize) -> &[Complex64] {
        &self.values[self.index_set.group_range(term_index)]
    }

    pub fn group_mut(&mut self, term_index: usize) -> &mut [Complex64] {
        let range = self.index_set.group_range(term_index);
        &mut self.values[range]
    }

    /// Block of a term looked up by identity.
    pub fn term_block(&self, term: &Term) -> Result<&[Complex64]> {
        let i = self
            .index_set
            .terms()
            .position(term)
            .ok_or_else(|| Error::UnknownTerm(term.label()))?;
        Ok(self.group(i))
    }

    /// Squared Euclidean norm of the whole vector.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Kernel selection for the groups of a plan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exact summation for every group.
    Direct,
    /// Nonequispaced FFT for every group with at least one axis.
    Fast,
    /// Per-group choice by estimated operation count.
    #[default]
    Auto,
}

enum GroupKernel {
    Constant,
    Direct(Vec<Arc<AxisTable>>),
    Fast(NfftGroup),
}

/// Immutable binding of nodes, index set and kernel parameters.
pub struct TransformPlan {
    nodes: NodeSet,
    index_set: Arc<GroupedIndexSet>,
    params: FastParams,
    kernels: Vec<GroupKernel>,
}

impl std::fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPlan")
            .field("nodes", &self.nodes.len())
            .field("terms", &self.index_set.num_terms())
            .field("params", &self.params)
            .field("methods", &self.methods())
            .finish()
    }
}

fn prefers_fast(order: usize, bandwidth: usize, basis: Basis, m_nodes: usize, params: &FastParams) -> bool {
    let Ok((n, _)) = nfft::grid_size(bandwidth, basis, params) else {
        return false;
    };
    let len = (bandwidth - 1) as f64;
    let m = m_nodes as f64;
    let direct: f64 = (1..=order).map(|i| len.powi(i as i32)).sum::<f64>() * m;
    let width = (2 * params.m + 1) as f64;
    let grid = (n as f64).powi(order as i32);
    let fast = m * (1.5 * width.powi(order as i32) + 10.0) + 5.0 * grid * grid.log2().max(1.0);
    fast < direct
}

impl TransformPlan {
    pub fn new(nodes: NodeSet, index_set: Arc<GroupedIndexSet>, method: Method, params: FastParams) -> Result<Self> {
        params.validate()?;
        if nodes.dimension() != index_set.dimension() {
            return Err(Error::DimensionMismatch {
                expected: index_set.dimension(),
                got: nodes.dimension(),
            });
        }
        let basis = index_set.basis();
        let scale = match basis {
            Basis::Exponential => 1.0,
            Basis::Cosine => 0.5,
        };
        let mut axis_tables: HashMap<(usize, usize), Arc<AxisTable>> = HashMap::new();
        let mut windows: HashMap<(usize, usize, usize), Arc<WindowTable>> = HashMap::new();
        let mut planner = FftPlanner::new();
        let mut kernels = Vec::with_capacity(index_set.num_terms());
        for (t, term) in index_set.terms().iter().enumerate() {
            if term.is_empty() {
                kernels.push(GroupKernel::Constant);
                continue;
            }
            let bandwidth = index_set.bandwidth(t);
            let fast = match method {
                Method::Direct => false,
                Method::Fast => true,
                Method::Auto => prefers_fast(term.len(), bandwidth, basis, nodes.len(), &params),
            };
            if fast {
                let (n, exp_bandwidth) = nfft::grid_size(bandwidth, basis, &params)?;
                let tables = term
                    .coords()
                    .iter()
                    .map(|&c| {
                        windows
                            .entry((c, n, exp_bandwidth))
                            .or_insert_with(|| {
                                Arc::new(WindowTable::new(nodes.column(c), n, exp_bandwidth, params.m, scale))
                            })
                            .clone()
                    })
                    .collect();
                kernels.push(GroupKernel::Fast(NfftGroup::new(bandwidth, basis, &params, tables, &mut planner)?));
            } else {
                let tables = term
                    .coords()
                    .iter()
                    .map(|&c| {
                        axis_tables
                            .entry((c, bandwidth))
                            .or_insert_with(|| Arc::new(AxisTable::new(nodes.column(c), bandwidth, basis)))
                            .clone()
                    })
                    .collect();
                kernels.push(GroupKernel::Direct(tables));
            }
        }
        Ok(TransformPlan {
            nodes,
            index_set,
            params,
            kernels,
        })
    }

    /// Plan with the default kernel selection and fast parameters.
    pub fn with_defaults(nodes: NodeSet, index_set: Arc<GroupedIndexSet>) -> Result<Self> {
        TransformPlan::new(nodes, index_set, Method::Auto, FastParams::default())
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn index_set(&self) -> &Arc<GroupedIndexSet> {
        &self.index_set
    }

    pub fn basis(&self) -> Basis {
        self.index_set.basis()
    }

    pub fn params(&self) -> FastParams {
        self.params
    }

    /// Kernel chosen for each group; the constant group reports `Direct`.
    pub fn methods(&self) -> Vec<Method> {
        self.kernels
            .iter()
            .map(|k| match k {
                GroupKernel::Fast(_) => Method::Fast,
                _ => Method::Direct,
            })
            .collect()
    }

    fn check_coeffs(&self, coeffs: &GroupedCoefficients) -> Result<()> {
        if !Arc::ptr_eq(&coeffs.index_set, &self.index_set) && *coeffs.index_set != *self.index_set {
            return Err(Error::IndexSetMismatch);
        }
        Ok(())
    }

    /// Values `Σ_k f̂_k φ_k(x)` at every node.
    pub fn forward(&self, coeffs: &GroupedCoefficients) -> Result<Vec<Complex64>> {
        self.check_coeffs(coeffs)?;
        Ok(self.forward_slice(&coeffs.values))
    }

    /// [`forward`](Self::forward) on a raw flat coefficient slice.
    pub fn forward_values(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.index_set.total_cardinality() {
            return Err(Error::DimensionMismatch {
                expected: self.index_set.total_cardinality(),
                got: values.len(),
            });
        }
        Ok(self.forward_slice(values))
    }

    fn forward_slice(&self, values: &[Complex64]) -> Vec<Complex64> {
        let partials: Vec<Vec<Complex64>> = (0..self.kernels.len())
            .into_par_iter()
            .map(|t| self.group_forward_slice(t, &values[self.index_set.group_range(t)]))
            .collect();
        let mut out = vec![ZERO; self.nodes.len()];
        for p in &partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        out
    }

    /// Contribution of a single group.
    pub fn group_forward(&self, term_index: usize, block: &[Complex64]) -> Result<Vec<Complex64>> {
        if term_index >= self.kernels.len() {
            return Err(Error::InvalidParameter(format!("term index {term_index} out of range")));
        }
        if block.len() != self.index_set.group_len(term_index) {
            return Err(Error::DimensionMismatch {
                expected: self.index_set.group_len(term_index),
                got: block.len(),
            });
        }
        Ok(self.group_forward_slice(term_index, block))
    }

    fn group_forward_slice(&self, t: usize, block: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.nodes.len()];
        match &self.kernels[t] {
            GroupKernel::Constant => out.fill(block[0]),
            GroupKernel::Direct(tables) => {
                let refs: Vec<&AxisTable> = tables.iter().map(AsRef::as_ref).collect();
                direct::forward(&refs, block, &mut out);
            }
            GroupKernel::Fast(group) => group.forward(block, &mut out),
        }
        out
    }

    /// `F^H y` as grouped coefficients.
    pub fn adjoint(&self, values: &[Complex64]) -> Result<GroupedCoefficients> {
        let out = self.adjoint_values(values)?;
        Ok(GroupedCoefficients {
            index_set: self.index_set.clone(),
            values: out,
        })
    }

    /// [`adjoint`](Self::adjoint) returning the flat vector.
    pub fn adjoint_values(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes.len(),
                got: values.len(),
            });
        }
        let blocks: Vec<Vec<Complex64>> = self
            .kernels
            .par_iter()
            .map(|kernel| match kernel {
                GroupKernel::Constant => vec![values.iter().sum()],
                GroupKernel::Direct(tables) => {
                    let refs: Vec<&AxisTable> = tables.iter().map(AsRef::as_ref).collect();
                    direct::adjoint(&refs, values)
                }
                GroupKernel::Fast(group) => group.adjoint(values),
            })
            .collect();
        Ok(blocks.concat())
    }
}

fn restricted_columns(restricted: &[Vec<f64>]) -> Result<usize> {
    let m = restricted.first().map_or(0, Vec::len);
    if m == 0 || restricted.iter().any(|c| c.len() != m) {
        return Err(Error::EmptyNodes);
    }
    Ok(m)
}

fn reduce_columns(restricted: &[Vec<f64>], basis: Basis) -> Result<NodeSet> {
    NodeSet::from_columns(restricted.to_vec(), basis)
}

/// Exact transform of one group: `restricted[t]` holds the `t`-th coordinate
/// of `x_u` for every node and `coeffs` is the group block in odometer order.
pub fn direct_group_forward(
    restricted: &[Vec<f64>],
    coeffs: &[Complex64],
    bandwidth: usize,
    basis: Basis,
) -> Result<Vec<Complex64>> {
    let m = restricted_columns(restricted)?;
    let r = restricted.len();
    let len = crate::index::group_cardinality(1, bandwidth);
    if coeffs.len() != len.pow(r as u32) {
        return Err(Error::DimensionMismatch {
            expected: len.pow(r as u32),
            got: coeffs.len(),
        });
    }
    let nodes = reduce_columns(restricted, basis)?;
    let tables: Vec<AxisTable> = (0..r).map(|t| AxisTable::new(nodes.column(t), bandwidth, basis)).collect();
    let refs: Vec<&AxisTable> = tables.iter().collect();
    let mut out = vec![ZERO; m];
    direct::forward(&refs, coeffs, &mut out);
    Ok(out)
}

/// Fast approximate transform of one group, same conventions as
/// [`direct_group_forward`].
pub fn fast_group_forward(
    restricted: &[Vec<f64>],
    coeffs: &[Complex64],
    bandwidth: usize,
    basis: Basis,
    params: &FastParams,
) -> Result<Vec<Complex64>> {
    params.validate()?;
    let m = restricted_columns(restricted)?;
    let r = restricted.len();
    let len = crate::index::group_cardinality(1, bandwidth);
    if coeffs.len() != len.pow(r as u32) {
        return Err(Error::DimensionMismatch {
            expected: len.pow(r as u32),
            got: coeffs.len(),
        });
    }
    let nodes = reduce_columns(restricted, basis)?;
    let (n, exp_bandwidth) = nfft::grid_size(bandwidth, basis, params)?;
    let scale = if basis == Basis::Cosine { 0.5 } else { 1.0 };
    let windows = (0..r)
        .map(|t| Arc::new(WindowTable::new(nodes.column(t), n, exp_bandwidth, params.m, scale)))
        .collect();
    let group = NfftGroup::new(bandwidth, basis, params, windows, &mut FftPlanner::new())?;
    let mut out = vec![ZERO; m];
    group.forward(coeffs, &mut out);
    Ok(out)
}
