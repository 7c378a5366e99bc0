//! Momentum-space discretization: negation-closed Cartesian node sets with
//! midpoint quadrature weights.
//!
//! Every momentum sum in this crate is the quadrature of a continuum
//! integral,
//!
//! ```text
//!   integral d^dim p  f(p)   ~   sum_nodes  w(p) f(p),      w = dp^dim,
//! ```
//!
//! over a uniform cell-centered grid p_k = (k + 1/2) dp, k = -n/2 .. n/2-1,
//! per active axis. Cell-centered nodes are chosen deliberately: the grid
//! then never contains p = 0, where the polarization triads of [`crate::spinor`]
//! are undefined. One-dimensional grids put their momenta on the z-axis so
//! that the triad's axis rule is exercised rather than avoided; 2D grids use
//! the (y, z) plane.
//!
//! The node set is exactly closed under p -> -p: coordinates for the negative
//! half-axis are built by sign-flipping the positive half, so
//! `nodes[negation(i)] == -nodes[i]` holds bitwise, not merely to tolerance.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from grid construction or deserialization.
#[derive(Debug, Error)]
pub enum GridError {
    /// Odd node counts would force a node at p = 0.
    #[error("n_per_axis must be even and positive, got {0} (odd counts would place a node at p = 0)")]
    BadNodeCount(usize),
    /// The mass must be strictly positive.
    #[error("mass must be positive, got {0}")]
    BadMass(f64),
    /// The momentum extent must be strictly positive.
    #[error("p_max must be positive, got {0}")]
    BadExtent(f64),
    /// Only 1, 2, or 3 active axes are supported.
    #[error("dim must be 1, 2, or 3, got {0}")]
    BadDim(usize),
    /// Derivative stencils need at least three nodes along an axis.
    #[error("derivative stencils need n_per_axis >= 3, grid has {0}")]
    TooCoarseForStencil(usize),
    /// JSON round-trip failure.
    #[error("grid (de)serialization failed: {0}")]
    Serde(#[from] serde_json::Error),
}

/// The four numbers that determine a grid; nodes regenerate from these.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Number of active momentum axes (1, 2, or 3).
    pub dim: usize,
    /// Half-extent of the grid per active axis.
    pub p_max: f64,
    /// Nodes per active axis (even).
    pub n_per_axis: usize,
    /// Particle mass (natural units).
    pub mass: f64,
}

/// Negation-closed momentum node set with midpoint quadrature weights.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    dim: usize,
    p_max: f64,
    n_per_axis: usize,
    mass: f64,
    /// Cartesian axis indices that carry nodes (subset of {0, 1, 2}).
    active_axes: Vec<usize>,
    nodes: Vec<Vector3<f64>>,
    weights: Vec<f64>,
    negation_map: Vec<usize>,
}

impl MomentumGrid {
    /// Builds the uniform cell-centered grid; see module docs for the layout.
    pub fn build_symmetric(
        dim: usize,
        p_max: f64,
        n_per_axis: usize,
        mass: f64,
    ) -> Result<Self, GridError> {
        if !(1..=3).contains(&dim) {
            return Err(GridError::BadDim(dim));
        }
        if n_per_axis == 0 || n_per_axis % 2 != 0 {
            return Err(GridError::BadNodeCount(n_per_axis));
        }
        if !(p_max > 0.0) || !p_max.is_finite() {
            return Err(GridError::BadExtent(p_max));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(GridError::BadMass(mass));
        }

        let active_axes: Vec<usize> = match dim {
            1 => vec![2],
            2 => vec![1, 2],
            _ => vec![0, 1, 2],
        };

        let n = n_per_axis;
        let dp = 2.0 * p_max / n as f64;
        // Coordinates for the positive half-axis; the negative half mirrors
        // them by exact sign flip so negation is bitwise.
        let half: Vec<f64> = (0..n / 2).map(|j| (j as f64 + 0.5) * dp).collect();
        let coords: Vec<f64> = (0..n)
            .map(|k| {
                if k < n / 2 {
                    -half[n / 2 - 1 - k]
                } else {
                    half[k - n / 2]
                }
            })
            .collect();

        let count = n.pow(dim as u32);
        let weight = dp.powi(dim as i32);
        let mut nodes = Vec::with_capacity(count);
        let mut negation_map = Vec::with_capacity(count);
        for flat in 0..count {
            let idx = split_index(flat, dim, n);
            let mut p = Vector3::zeros();
            let mut neg_idx = [0usize; 3];
            for (pos, &axis) in active_axes.iter().enumerate() {
                p[axis] = coords[idx[pos]];
                neg_idx[pos] = n - 1 - idx[pos];
            }
            nodes.push(p);
            negation_map.push(join_index(&neg_idx[..dim], n));
        }

        Ok(Self {
            dim,
            p_max,
            n_per_axis,
            mass,
            active_axes,
            nodes,
            weights: vec![weight; count],
            negation_map,
        })
    }

    /// Rebuilds a grid from its four defining numbers.
    pub fn from_spec(spec: &GridSpec) -> Result<Self, GridError> {
        Self::build_symmetric(spec.dim, spec.p_max, spec.n_per_axis, spec.mass)
    }

    /// The four defining numbers of this grid.
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            p_max: self.p_max,
            n_per_axis: self.n_per_axis,
            mass: self.mass,
        }
    }

    /// Serializes the defining numbers as JSON.
    pub fn to_json(&self) -> Result<String, GridError> {
        Ok(serde_json::to_string(&self.spec())?)
    }

    /// Rebuilds a grid from [`MomentumGrid::to_json`] output.
    pub fn from_json(text: &str) -> Result<Self, GridError> {
        let spec: GridSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the grid has no nodes (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of active axes.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per active axis.
    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    /// Half-extent per active axis.
    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Particle mass.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Node spacing per active axis.
    pub fn dp(&self) -> f64 {
        2.0 * self.p_max / self.n_per_axis as f64
    }

    /// Cartesian axis indices carrying nodes (z first for low dims).
    pub fn active_axes(&self) -> &[usize] {
        &self.active_axes
    }

    /// Momentum of node `i`.
    pub fn node(&self, i: usize) -> Vector3<f64> {
        self.nodes[i]
    }

    /// All nodes in flat order.
    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    /// Quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Index of the node at -p when node `i` sits at p.
    pub fn negation(&self, i: usize) -> usize {
        self.negation_map[i]
    }

    /// On-shell energy sqrt(|p|^2 + m^2) of node `i`.
    pub fn energy(&self, i: usize) -> f64 {
        (self.nodes[i].norm_squared() + self.mass * self.mass).sqrt()
    }

    /// Largest on-shell energy over the node set.
    pub fn energy_max(&self) -> f64 {
        (0..self.len())
            .map(|i| self.energy(i))
            .fold(self.mass, f64::max)
    }

    /// Per-axis index of node `i` along the `axis_pos`-th active axis.
    pub fn axis_index(&self, i: usize, axis_pos: usize) -> usize {
        split_index(i, self.dim, self.n_per_axis)[axis_pos]
    }

    /// Node index reached from `i` by setting the `axis_pos`-th active-axis
    /// index to `k`.
    pub fn with_axis_index(&self, i: usize, axis_pos: usize, k: usize) -> usize {
        let mut idx = split_index(i, self.dim, self.n_per_axis);
        idx[axis_pos] = k;
        join_index(&idx[..self.dim], self.n_per_axis)
    }

    /// Second-order finite-difference stencil for d/dp along the
    /// `axis_pos`-th active axis at node `i`: a list of (node, coefficient)
    /// taps. Central in the interior, one-sided (still second order) at the
    /// two boundary layers.
    pub fn derivative_stencil(
        &self,
        i: usize,
        axis_pos: usize,
    ) -> Result<Vec<(usize, f64)>, GridError> {
        let n = self.n_per_axis;
        if n < 3 {
            return Err(GridError::TooCoarseForStencil(n));
        }
        let dp = self.dp();
        let k = self.axis_index(i, axis_pos);
        let at = |kk: usize| self.with_axis_index(i, axis_pos, kk);
        let taps = if k == 0 {
            vec![
                (at(0), -1.5 / dp),
                (at(1), 2.0 / dp),
                (at(2), -0.5 / dp),
            ]
        } else if k == n - 1 {
            vec![
                (at(n - 1), 1.5 / dp),
                (at(n - 2), -2.0 / dp),
                (at(n - 3), 0.5 / dp),
            ]
        } else {
            vec![(at(k - 1), -0.5 / dp), (at(k + 1), 0.5 / dp)]
        };
        Ok(taps)
    }
}

/// Splits a flat node index into per-axis indices (last active axis fastest).
fn split_index(flat: usize, dim: usize, n: usize) -> [usize; 3] {
    let mut idx = [0usize; 3];
    let mut rest = flat;
    for pos in (0..dim).rev() {
        idx[pos] = rest % n;
        rest /= n;
    }
    idx
}

/// Inverse of [`split_index`].
fn join_index(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &k| acc * n + k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn two_node_line_grid_sits_on_the_z_axis() {
        let g = MomentumGrid::build_symmetric(1, 1.0, 2, 1.0).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.node(0), Vector3::new(0.0, 0.0, -0.5));
        assert_eq!(g.node(1), Vector3::new(0.0, 0.0, 0.5));
        assert_eq!(g.weight(0), 1.0);
        assert_eq!(g.negation(0), 1);
        assert_eq!(g.negation(1), 0);
    }

    #[test]
    fn four_node_line_grid_has_expected_coordinates_and_weights() {
        let g = MomentumGrid::build_symmetric(1, 2.0, 4, 1.0).unwrap();
        let zs: Vec<f64> = (0..4).map(|i| g.node(i).z).collect();
        assert_eq!(zs, vec![-1.5, -0.5, 0.5, 1.5]);
        for i in 0..4 {
            assert_eq!(g.weight(i), 1.0);
        }
    }

    #[test]
    fn eight_node_cube_has_unit_energy_at_mass_half() {
        // |p|^2 = 3 * 0.25 = 0.75 at every corner node, so E = sqrt(1) = 1.
        let g = MomentumGrid::build_symmetric(3, 1.0, 2, 0.5).unwrap();
        assert_eq!(g.len(), 8);
        for i in 0..8 {
            assert_relative_eq!(g.energy(i), 1.0, max_relative = 1e-15);
            assert_eq!(g.weight(i), 1.0);
            for axis in 0..3 {
                assert_eq!(g.node(i)[axis].abs(), 0.5);
            }
        }
    }

    #[test]
    fn energy_matches_hand_value_on_unit_momentum() {
        let g = MomentumGrid::build_symmetric(1, 2.0, 2, 1.0).unwrap();
        // nodes at p_z = +-1, m = 1 -> E = sqrt(2)
        assert_relative_eq!(g.energy(0), 2.0_f64.sqrt(), max_relative = 1e-15);
        assert!(g.energy(0) > g.mass());
    }

    #[test]
    fn near_rest_energy_is_just_above_mass() {
        let g = MomentumGrid::build_symmetric(1, 0.0002, 2, 1.0).unwrap();
        // node at p_z = 0.0001: E = sqrt(1 + 1e-8) ~ 1.000000005
        assert_relative_eq!(g.energy(1), 1.000000005, max_relative = 1e-12);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            MomentumGrid::build_symmetric(1, 1.0, 3, 1.0),
            Err(GridError::BadNodeCount(3))
        ));
        assert!(matches!(
            MomentumGrid::build_symmetric(1, 1.0, 2, 0.0),
            Err(GridError::BadMass(_))
        ));
        assert!(matches!(
            MomentumGrid::build_symmetric(1, -1.0, 2, 1.0),
            Err(GridError::BadExtent(_))
        ));
        assert!(matches!(
            MomentumGrid::build_symmetric(4, 1.0, 2, 1.0),
            Err(GridError::BadDim(4))
        ));
    }

    #[test]
    fn json_round_trip_regenerates_identical_nodes() {
        let g = MomentumGrid::build_symmetric(2, 1.5, 4, 0.7).unwrap();
        let text = g.to_json().unwrap();
        let h = MomentumGrid::from_json(&text).unwrap();
        assert_eq!(g.len(), h.len());
        for i in 0..g.len() {
            assert_eq!(g.node(i), h.node(i));
            assert_eq!(g.weight(i), h.weight(i));
            assert_eq!(g.negation(i), h.negation(i));
        }
    }

    #[test]
    fn stencils_are_central_inside_and_one_sided_at_boundaries() {
        let g = MomentumGrid::build_symmetric(1, 2.0, 4, 1.0).unwrap();
        let dp = g.dp();
        assert_eq!(
            g.derivative_stencil(1, 0).unwrap(),
            vec![(0, -0.5 / dp), (2, 0.5 / dp)]
        );
        assert_eq!(
            g.derivative_stencil(0, 0).unwrap(),
            vec![(0, -1.5 / dp), (1, 2.0 / dp), (2, -0.5 / dp)]
        );
        assert_eq!(
            g.derivative_stencil(3, 0).unwrap(),
            vec![(3, 1.5 / dp), (2, -2.0 / dp), (1, 0.5 / dp)]
        );
        // Stencils differentiate quadratics exactly, including at boundaries.
        let f = |z: f64| 0.3 + 1.7 * z - 0.9 * z * z;
        let df = |z: f64| 1.7 - 1.8 * z;
        for i in 0..4 {
            let d: f64 = g
                .derivative_stencil(i, 0)
                .unwrap()
                .iter()
                .map(|&(j, cfield)| cfield * f(g.node(j).z))
                .sum();
            assert_relative_eq!(d, df(g.node(i).z), max_relative = 1e-12);
        }
    }

    #[test]
    fn stencil_requires_three_nodes() {
        let g = MomentumGrid::build_symmetric(1, 1.0, 2, 1.0).unwrap();
        assert!(matches!(
            g.derivative_stencil(0, 0),
            Err(GridError::TooCoarseForStencil(2))
        ));
    }

    #[test]
    fn midpoint_rule_converges_at_second_order_on_a_smooth_bump() {
        // C-infinity bump supported inside |z| < 0.8, integrated over the
        // 1D grid extent. The reference value comes from a 16384-node grid
        // of the same family, whose own error is ~(256)^2 times smaller than
        // the coarsest error being measured.
        let bump = |z: f64| {
            let r = z / 0.8;
            if r.abs() < 1.0 {
                (-1.0 / (1.0 - r * r)).exp()
            } else {
                0.0
            }
        };
        let quad = |n: usize| -> f64 {
            let g = MomentumGrid::build_symmetric(1, 1.0, n, 1.0).unwrap();
            (0..g.len()).map(|i| g.weight(i) * bump(g.node(i).z)).sum()
        };
        let reference = quad(16384);
        let err32 = (quad(32) - reference).abs();
        let err64 = (quad(64) - reference).abs();
        let err128 = (quad(128) - reference).abs();
        assert!(err32 / err64 >= 3.5, "ratio {}", err32 / err64);
        assert!(err64 / err128 >= 3.5, "ratio {}", err64 / err128);
    }

    proptest! {
        #[test]
        fn negation_is_a_bitwise_involution(
            dim in 1usize..=3,
            half_n in 1usize..=3,
            p_max in 0.1f64..10.0,
            mass in 0.1f64..5.0,
        ) {
            let g = MomentumGrid::build_symmetric(dim, p_max, 2 * half_n, mass).unwrap();
            for i in 0..g.len() {
                let j = g.negation(i);
                prop_assert_eq!(g.negation(j), i);
                prop_assert_eq!(g.node(j), -g.node(i));
                prop_assert_eq!(g.weight(j), g.weight(i));
            }
        }

        #[test]
        fn every_node_is_strictly_off_origin(
            dim in 1usize..=3,
            half_n in 1usize..=3,
            p_max in 0.1f64..10.0,
        ) {
            let g = MomentumGrid::build_symmetric(dim, p_max, 2 * half_n, 1.0).unwrap();
            for i in 0..g.len() {
                prop_assert!(g.node(i).norm() > 0.0);
                prop_assert!(g.energy(i) > g.mass());
            }
        }
    }
}
