#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "bilever/topology.hpp"

namespace bilever {

/// Spectrum of the (weighted) adjacency matrix. lambda drops exactly one
/// maximal and one minimal eigenvalue and takes the largest remaining
/// absolute value; for a connected biregular bipartite graph the dropped
/// pair is +-sqrt(d0*d1). lambda_squared is the same quantity seen through
/// the one-side squared adjacency A^2 (its second-largest eigenvalue), the
/// form the poor-node bound consumes.
struct SpectralReport {
    int d0 = 0;
    int d1 = 0;
    double lambda = 0.0;
    double lambda_squared = 0.0;
    std::vector<double> eigenvalues;  // ascending
};

inline SpectralReport spectral_report(const Topology& g) {
    if (!g.connected())
        throw ConfigError("spectral report requires a connected graph");
    const int n = g.node_count();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : g.neighbors(u)) a(u, v) = g.weight(u, v);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed to converge");

    SpectralReport r;
    r.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    if (n >= 3) {
        double lo = std::abs(r.eigenvalues[1]);
        double hi = std::abs(r.eigenvalues[n - 2]);
        r.lambda = std::max(lo, hi);
    }
    r.lambda_squared = r.lambda * r.lambda;
    if (g.bipartite()) {
        auto degs = g.biregular_degrees();
        if (degs) {
            r.d0 = degs->first;
            r.d1 = degs->second;
        }
    } else {
        int d = g.degree(0);
        bool regular = true;
        for (NodeId v = 1; v < n; ++v)
            if (g.degree(v) != d) regular = false;
        if (regular) r.d0 = r.d1 = d;
    }
    return r;
}

struct EdgeCountBound {
    long long e = 0;
    double center = 0.0;
    double slack = 0.0;
    bool holds = false;
};

/// Concentration check for the number of cross edges between S0 and S1 in a
/// biregular bipartite graph: |e - theta0*theta1*(d0 n0 + d1 n1)/2| bounded by
/// (lambda/2)*[theta1(1-theta0)n0 + theta0(1-theta1)n1].
inline EdgeCountBound edge_count_bound_check(const Topology& g, const std::vector<NodeId>& s0,
                                             const std::vector<NodeId>& s1, double lambda,
                                             double tolerance = 1e-9) {
    if (!g.bipartite()) throw ConfigError("edge-count bound needs a bipartite graph");
    auto degs = g.biregular_degrees();
    if (!degs) throw ConfigError("edge-count bound needs a biregular graph");
    if (s0.empty() || s1.empty()) throw ConfigError("subsets must be nonempty");
    const int n0 = g.side_a_size(), n1 = g.side_b_size();
    std::vector<char> in1(g.node_count(), 0);
    for (NodeId v : s1) {
        if (v < n0 || v >= g.node_count()) throw ConfigError("S1 must lie in side 1");
        in1[v] = 1;
    }
    long long e = 0;
    for (NodeId u : s0) {
        if (u < 0 || u >= n0) throw ConfigError("S0 must lie in side 0");
        for (NodeId v : g.neighbors(u))
            if (in1[v]) e += g.weight(u, v);
    }
    const double theta0 = double(s0.size()) / n0;
    const double theta1 = double(s1.size()) / n1;
    EdgeCountBound r;
    r.e = e;
    r.center = 0.5 * theta0 * theta1 * (double(degs->first) * n0 + double(degs->second) * n1);
    r.slack = 0.5 * lambda * (theta1 * (1.0 - theta0) * n0 + theta0 * (1.0 - theta1) * n1);
    r.holds = std::abs(double(e) - r.center) <= r.slack + tolerance;
    return r;
}

inline EdgeCountBound edge_count_bound_check(const Topology& g, const std::vector<NodeId>& s0,
                                             const std::vector<NodeId>& s1) {
    return edge_count_bound_check(g, s0, s1, spectral_report(g).lambda);
}

/// Guaranteed strict upper bound on the poor-node blowup mu when the
/// expansion condition beta - sqrt(2 alpha beta) >= lambda_i/(2d) holds;
/// absent when it fails. lambda_i is the squared-adjacency eigenvalue bound
/// (SpectralReport::lambda_squared) and d = d0*d1.
inline std::optional<double> mu_bound(double alpha, double beta, double lambda_i, double d) {
    if (!(alpha > 0 && alpha < 1) || !(beta > 0 && beta < 1))
        throw ConfigError("alpha and beta must lie in (0,1)");
    if (lambda_i < 0 || d <= 0) throw ConfigError("lambda must be >= 0 and d > 0");
    if (beta - std::sqrt(2.0 * alpha * beta) >= lambda_i / (2.0 * d))
        return std::sqrt(2.0 * beta / alpha);
    return std::nullopt;
}

}  // namespace bilever
