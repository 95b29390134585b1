#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/geo.hpp"

namespace gsamp {

/// Undirected, unweighted graph with no self-loops. Holds the adjacency
/// matrix, degree vector and combinatorial Laplacian L = D - A; the Laplacian
/// is assembled from integer counts, so its row sums are exactly zero.
class Graph {
public:
    /// Build from an explicit edge list; edges are deduplicated, validated
    /// (in-range endpoints, no self-loops) and stored as (min, max) pairs in
    /// lexicographic order.
    static Graph from_edges(int n_nodes, const std::vector<std::pair<int, int>>& edges);

    int n_nodes() const { return n_nodes_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const Eigen::MatrixXd& adjacency() const { return adjacency_; }
    const Eigen::VectorXi& degrees() const { return degrees_; }
    const Eigen::MatrixXd& laplacian() const { return laplacian_; }
    /// Neighbors of v in ascending order.
    const std::vector<int>& neighbors(int v) const;
    bool has_edge(int u, int v) const;

private:
    Graph() = default;

    int n_nodes_ = 0;
    std::vector<std::pair<int, int>> edges_;
    Eigen::MatrixXd adjacency_;
    Eigen::VectorXi degrees_;
    Eigen::MatrixXd laplacian_;
    std::vector<std::vector<int>> neighbor_lists_;
};

/// The 1-hop neighborhood of a node: the center, its neighbors, and every
/// edge of the parent graph with both endpoints inside the member set.
struct Neighborhood {
    int center = 0;
    /// Center first, then neighbors in ascending node order.
    std::vector<int> members;
    /// Induced edges as parent-graph (min, max) pairs, lexicographic order.
    /// Includes neighbor-neighbor edges, not just spokes from the center.
    std::vector<std::pair<int, int>> local_edges;
};

/// Symmetric k-nearest-neighbor graph over geographic points: each node is
/// linked to its k nearest others by haversine distance (ties broken by the
/// lower node index) and the directed selections are symmetrized by union.
/// Preconditions: at least two points, 1 <= k < n, all coordinates valid and
/// pairwise distinct.
Graph build_knn_graph(const std::vector<GeoPoint>& points, int k);

/// Extract the 1-hop neighborhood of v, including all induced edges.
Neighborhood induced_neighborhood(const Graph& g, int v);

/// Check structural invariants of raw graph parts: square symmetric 0/1
/// adjacency with a zero diagonal, degrees equal to adjacency row sums,
/// Laplacian equal to D - A entrywise with zero row sums, and a positive
/// semidefinite Laplacian (smallest eigenvalue >= -1e-10). Returns one message
/// per violation, naming the invariant and the offending indices; empty means
/// the parts are consistent.
std::vector<std::string> validate_graph_parts(const Eigen::MatrixXd& adjacency,
                                              const Eigen::VectorXi& degrees,
                                              const Eigen::MatrixXd& laplacian);

/// Convenience overload running validate_graph_parts on a Graph's own parts.
std::vector<std::string> validate(const Graph& g);

} // namespace gsamp
