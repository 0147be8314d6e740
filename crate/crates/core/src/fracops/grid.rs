use std::sync::Arc;

use super::Mesh;
use crate::error::{domain, Error, Result};

/// Real samples bound to a [`Mesh`]. Missing samples (e.g. a derivative that
/// is singular at t = 0, or a node masked near a zero of x) are stored as
/// NaN; infinities are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(domain(
                "grid_function",
                format!("{} values for {} nodes", values.len(), mesh.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| v.is_infinite()) {
            return Err(domain("grid_function", format!("infinite value at node {i}")));
        }
        Ok(Self { mesh, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = mesh.nodes().iter().map(|&t| f(t)).collect();
        Self::new(mesh, values)
    }

    /// Samples a fallible `f` at every node.
    pub fn try_from_fn(mesh: Arc<Mesh>, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = mesh.nodes().iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        Self::new(mesh, values)
    }

    pub fn constant(mesh: Arc<Mesh>, c: f64) -> Self {
        let values = vec![c; mesh.len()];
        Self { mesh, values }
    }

    /// Builder-internal constructor; infinities are turned into missing values.
    pub(crate) fn from_raw(mesh: Arc<Mesh>, mut values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.len());
        for v in values.iter_mut().filter(|v| v.is_infinite()) {
            *v = f64::NAN;
        }
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn nodes(&self) -> &[f64] {
        self.mesh.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.values[i].is_nan()
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    /// (t, value) pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.mesh.nodes().iter().copied().zip(self.values.iter().copied())
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.iter().map(|(t, v)| f(t, v)).collect();
        Self::from_raw(self.mesh.clone(), values)
    }

    /// a·self + b·other, node-wise.
    pub fn axpby(&self, a: f64, b: f64, other: &GridFunction) -> Result<Self> {
        self.same_mesh(other, "axpby")?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self::from_raw(self.mesh.clone(), values))
    }

    pub(crate) fn same_mesh(&self, other: &GridFunction, op: &'static str) -> Result<()> {
        if Arc::ptr_eq(&self.mesh, &other.mesh) || self.mesh == other.mesh {
            Ok(())
        } else {
            Err(Error::MeshMismatch { op })
        }
    }

    /// Largest |value| over present samples with t in [lo, hi].
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> Option<f64> {
        self.iter()
            .filter(|(t, v)| *t >= lo && *t <= hi && !v.is_nan())
            .map(|(_, v)| v.abs())
            .reduce(f64::max)
    }

    /// Largest |value| over all present samples.
    pub fn max_abs(&self) -> Option<f64> {
        self.values
            .iter()
            .filter(|v| !v.is_nan())
            .map(|v| v.abs())
            .reduce(f64::max)
    }

    /// Piecewise-linear interpolation inside the mesh hull.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let nodes = self.mesh.nodes();
        if !(t >= nodes[0] && t <= nodes[nodes.len() - 1]) {
            return None;
        }
        let i = nodes.partition_point(|&x| x <= t);
        if i >= nodes.len() {
            return Some(self.values[nodes.len() - 1]);
        }
        let (t0, t1) = (nodes[i - 1], nodes[i]);
        let w = (t - t0) / (t1 - t0);
        Some(self.values[i - 1] * (1.0 - w) + self.values[i] * w)
    }
}
