#include "gsamp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gsamp/errors.hpp"
#include "gsamp/linalg.hpp"

namespace gsamp {

Graph Graph::from_edges(int n_nodes, const std::vector<std::pair<int, int>>& edges) {
    if (n_nodes < 1) throw validation_error("Graph: n_nodes must be >= 1");

    std::set<std::pair<int, int>> unique;
    for (const auto& [a, b] : edges) {
        if (a < 0 || a >= n_nodes || b < 0 || b >= n_nodes) {
            std::ostringstream msg;
            msg << "Graph: edge (" << a << ", " << b << ") out of range for " << n_nodes << " nodes";
            throw validation_error(msg.str());
        }
        if (a == b) {
            std::ostringstream msg;
            msg << "Graph: self-loop at node " << a;
            throw validation_error(msg.str());
        }
        unique.emplace(std::min(a, b), std::max(a, b));
    }

    Graph g;
    g.n_nodes_ = n_nodes;
    g.edges_.assign(unique.begin(), unique.end());

    // Integer construction first so D - A is exact before the cast to double.
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n_nodes, n_nodes);
    for (const auto& [a, b] : g.edges_) {
        adj(a, b) = 1;
        adj(b, a) = 1;
    }
    g.degrees_ = adj.rowwise().sum();
    Eigen::MatrixXi lap = -adj;
    for (int i = 0; i < n_nodes; ++i) lap(i, i) = g.degrees_(i);

    g.adjacency_ = adj.cast<double>();
    g.laplacian_ = lap.cast<double>();

    g.neighbor_lists_.assign(static_cast<std::size_t>(n_nodes), {});
    for (const auto& [a, b] : g.edges_) {
        g.neighbor_lists_[static_cast<std::size_t>(a)].push_back(b);
        g.neighbor_lists_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& list : g.neighbor_lists_) std::sort(list.begin(), list.end());
    return g;
}

const std::vector<int>& Graph::neighbors(int v) const {
    if (v < 0 || v >= n_nodes_) throw validation_error("Graph::neighbors: node out of range");
    return neighbor_lists_[static_cast<std::size_t>(v)];
}

bool Graph::has_edge(int u, int v) const {
    if (u < 0 || u >= n_nodes_ || v < 0 || v >= n_nodes_) return false;
    return adjacency_(u, v) != 0.0;
}

Graph build_knn_graph(const std::vector<GeoPoint>& points, int k) {
    const int n = static_cast<int>(points.size());
    if (n < 2) throw validation_error("build_knn_graph: need at least two points");
    if (k < 1 || k >= n) {
        std::ostringstream msg;
        msg << "build_knn_graph: k must satisfy 1 <= k < n (got k=" << k << ", n=" << n << ")";
        throw validation_error(msg.str());
    }
    for (int i = 0; i < n; ++i) {
        if (!geo_point_valid(points[static_cast<std::size_t>(i)])) {
            std::ostringstream msg;
            msg << "build_knn_graph: invalid coordinates at point " << i;
            throw validation_error(msg.str());
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (points[static_cast<std::size_t>(i)].lat_deg == points[static_cast<std::size_t>(j)].lat_deg &&
                points[static_cast<std::size_t>(i)].lon_deg == points[static_cast<std::size_t>(j)].lon_deg) {
                std::ostringstream msg;
                msg << "build_knn_graph: duplicate coordinates at points " << i << " and " << j;
                throw validation_error(msg.str());
            }
        }
    }

    std::vector<std::pair<int, int>> edges;
    std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        dist.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            dist.emplace_back(haversine_km(points[static_cast<std::size_t>(i)],
                                           points[static_cast<std::size_t>(j)]),
                              j);
        }
        // Nearest k, distance ties resolved toward the lower index.
        std::sort(dist.begin(), dist.end());
        for (int r = 0; r < k; ++r) edges.emplace_back(i, dist[static_cast<std::size_t>(r)].second);
    }
    return Graph::from_edges(n, edges);  // union symmetrization via dedup
}

Neighborhood induced_neighborhood(const Graph& g, int v) {
    if (v < 0 || v >= g.n_nodes()) {
        std::ostringstream msg;
        msg << "induced_neighborhood: node " << v << " out of range (n=" << g.n_nodes() << ")";
        throw validation_error(msg.str());
    }
    Neighborhood nb;
    nb.center = v;
    nb.members.push_back(v);
    const auto& nbrs = g.neighbors(v);
    nb.members.insert(nb.members.end(), nbrs.begin(), nbrs.end());

    std::set<int> member_set(nb.members.begin(), nb.members.end());
    for (std::size_t a = 0; a < nb.members.size(); ++a) {
        for (std::size_t b = a + 1; b < nb.members.size(); ++b) {
            const int u = std::min(nb.members[a], nb.members[b]);
            const int w = std::max(nb.members[a], nb.members[b]);
            if (g.has_edge(u, w)) nb.local_edges.emplace_back(u, w);
        }
    }
    std::sort(nb.local_edges.begin(), nb.local_edges.end());
    return nb;
}

std::vector<std::string> validate_graph_parts(const Eigen::MatrixXd& adjacency,
                                              const Eigen::VectorXi& degrees,
                                              const Eigen::MatrixXd& laplacian) {
    std::vector<std::string> violations;
    const Eigen::Index n = adjacency.rows();
    auto add = [&violations](const std::string& m) { violations.push_back(m); };

    if (adjacency.cols() != n) {
        add("adjacency is not square");
        return violations;
    }
    if (degrees.size() != n || laplacian.rows() != n || laplacian.cols() != n) {
        add("degree vector / Laplacian dimensions do not match adjacency");
        return violations;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0) {
            std::ostringstream msg;
            msg << "self-loop: adjacency diagonal nonzero at node " << i;
            add(msg.str());
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = adjacency(i, j);
            if (a != 0.0 && a != 1.0) {
                std::ostringstream msg;
                msg << "adjacency entry not 0/1 at (" << i << ", " << j << ")";
                add(msg.str());
            }
            if (j > i && a != adjacency(j, i)) {
                std::ostringstream msg;
                msg << "asymmetry: adjacency(" << i << ", " << j << ") != adjacency(" << j << ", " << i << ")";
                add(msg.str());
            }
        }
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        const double row_sum = adjacency.row(i).sum();
        if (static_cast<double>(degrees(i)) != row_sum) {
            std::ostringstream msg;
            msg << "degree mismatch at node " << i << ": stored " << degrees(i)
                << ", adjacency row sum " << row_sum;
            add(msg.str());
        }
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double expected = (i == j) ? static_cast<double>(degrees(i)) : -adjacency(i, j);
            if (laplacian(i, j) != expected) {
                std::ostringstream msg;
                msg << "Laplacian differs from D - A at (" << i << ", " << j << ")";
                add(msg.str());
            }
        }
        if (laplacian.row(i).sum() != 0.0) {
            std::ostringstream msg;
            msg << "Laplacian row " << i << " does not sum to zero";
            add(msg.str());
        }
    }

    if (violations.empty()) {
        // Structure is consistent; check positive semidefiniteness numerically.
        try {
            const auto eig = linalg::jacobi_eigen(laplacian);
            if (eig.values(0) < -1e-10) {
                std::ostringstream msg;
                msg << "Laplacian not PSD: smallest eigenvalue " << eig.values(0);
                add(msg.str());
            }
        } catch (const numerical_error& e) {
            add(std::string("Laplacian eigendecomposition failed: ") + e.what());
        }
    }
    return violations;
}

std::vector<std::string> validate(const Graph& g) {
    return validate_graph_parts(g.adjacency(), g.degrees(), g.laplacian());
}

} // namespace gsamp
