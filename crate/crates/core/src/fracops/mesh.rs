use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// How the nodes of a [`Mesh`] were laid out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    /// node_j = T (j/N)^r, clustering nodes at t = 0.
    Graded {
        r: f64,
    },
    Custom,
}

/// A strictly increasing, finite time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    grading: Grading,
}

impl Mesh {
    /// `n` equal intervals on [0, t_end].
    pub fn uniform(t_end: f64, n: usize) -> Result<Self> {
        Self::uniform_window(0.0, t_end, n)
    }

    /// `n` equal intervals on [start, end].
    pub fn uniform_window(start: f64, end: f64, n: usize) -> Result<Self> {
        check_interval(start, end, n)?;
        let nodes = (0..=n).map(|j| start + (end - start) * (j as f64 / n as f64)).collect();
        Ok(Self {
            nodes,
            grading: Grading::Uniform,
        })
    }

    /// `n` intervals on [0, t_end] with node_j = t_end (j/n)^r, r ≥ 1.
    /// r = 1 gives the uniform mesh.
    pub fn graded(t_end: f64, n: usize, r: f64) -> Result<Self> {
        if !(r >= 1.0 && r.is_finite()) {
            return Err(domain("mesh", format!("grading exponent r = {r} must be >= 1")));
        }
        if r == 1.0 {
            return Self::uniform(t_end, n);
        }
        check_interval(0.0, t_end, n)?;
        let nodes = (0..=n).map(|j| t_end * (j as f64 / n as f64).powf(r)).collect();
        Ok(Self {
            nodes,
            grading: Grading::Graded { r },
        })
    }

    /// An arbitrary strictly increasing node list.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Size {
                op: "mesh",
                needed: 2,
                got: nodes.len(),
            });
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(domain("mesh", "non-finite node"));
        }
        if let Some(w) = nodes.windows(2).find(|w| w[1] <= w[0]) {
            return Err(domain(
                "mesh",
                format!("nodes not strictly increasing at {} -> {}", w[0], w[1]),
            ));
        }
        Ok(Self {
            nodes,
            grading: Grading::Custom,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn starts_at_zero(&self) -> bool {
        self.nodes[0] == 0.0
    }

    /// Length of interval `i`, [t_i, t_{i+1}].
    pub fn step(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// Common step of a uniform mesh.
    pub fn uniform_step(&self) -> Option<f64> {
        match self.grading {
            Grading::Uniform => Some((self.end() - self.start()) / self.intervals() as f64),
            _ => None,
        }
    }

    /// Index of the node closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        match self.nodes.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if t - self.nodes[i - 1] <= self.nodes[i] - t {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

fn check_interval(start: f64, end: f64, n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::Size {
            op: "mesh",
            needed: 2,
            got: n + 1,
        });
    }
    if !(start.is_finite() && end.is_finite() && end > start) {
        return Err(domain("mesh", format!("empty interval [{start}, {end}]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_nodes_follow_power_law() {
        let m = Mesh::graded(2.0, 8, 2.0).unwrap();
        assert_eq!(m.len(), 9);
        assert_eq!(m.nodes()[0], 0.0);
        assert_eq!(m.end(), 2.0);
        assert!((m.nodes()[4] - 0.5).abs() < 1e-15);
        assert_eq!(m.grading(), Grading::Graded { r: 2.0 });
        assert_eq!(m.uniform_step(), None);
    }

    #[test]
    fn uniform_hits_endpoints_exactly() {
        let m = Mesh::uniform_window(1.0, 30.0, 7).unwrap();
        assert_eq!(m.start(), 1.0);
        assert_eq!(m.end(), 30.0);
        assert!((m.uniform_step().unwrap() - 29.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(Mesh::from_nodes(vec![0.0]).is_err());
        assert!(Mesh::from_nodes(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Mesh::from_nodes(vec![0.0, f64::NAN]).is_err());
        assert!(Mesh::uniform(0.0, 10).is_err());
        assert!(Mesh::uniform(1.0, 0).is_err());
        assert!(Mesh::graded(1.0, 10, 0.5).is_err());
    }

    #[test]
    fn nearest_node() {
        let m = Mesh::uniform(1.0, 10).unwrap();
        assert_eq!(m.nearest(0.31), 3);
        assert_eq!(m.nearest(-5.0), 0);
        assert_eq!(m.nearest(7.0), 10);
    }
}
