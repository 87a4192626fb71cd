#ifndef NETSPILL_TESTS_HELPERS_HPP
#define NETSPILL_TESTS_HELPERS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "netspill/panel.hpp"
#include "netspill/rng.hpp"

namespace netspill::testing {

struct Instance {
  PanelDataset data;
  NetworkStack nets;
};

// Random balanced instance: banks 0..n_pg-1, firms n_pg..2n_pg-1, clusters
// assigned round-robin within each group, a single static layer with i.i.d.
// directed edges at the given density, and Gaussian outcomes/covariates.
inline Instance make_instance(int n_per_group, int T, int p,
                              int clusters_per_group, double edge_prob,
                              std::uint64_t seed) {
  const int n = 2 * n_per_group;
  Rng rng(seed);
  Instance inst;

  std::vector<Group> groups(n);
  for (int i = 0; i < n; ++i)
    groups[i] = i < n_per_group ? Group::B : Group::F;
  inst.data.partition = GroupPartition::from_labels(std::move(groups));

  std::vector<int> labels(n);
  for (int i = 0; i < n_per_group; ++i) labels[i] = i % clusters_per_group;
  for (int i = 0; i < n_per_group; ++i)
    labels[n_per_group + i] = clusters_per_group + i % clusters_per_group;
  inst.data.clusters = ClusterMap::from_labels(labels);

  inst.nets = NetworkStack::empty(n, 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (rng.uniform() < edge_prob) {
        const Group src = inst.data.partition.group_of[j];
        inst.nets.adj[0][0][group_index(src)][i].push_back(j);
      }
    }
  }

  inst.data.T = T;
  inst.data.p = p;
  inst.data.y.resize(n, T + 1);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t <= T; ++t) inst.data.y(i, t) = rng.normal();
  inst.data.X.reserve(T);
  for (int t = 1; t <= T; ++t) {
    Eigen::MatrixXd Xt(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) Xt(i, j) = rng.normal();
    inst.data.X.push_back(std::move(Xt));
  }
  return inst;
}

// Naive per-column cluster demeaning by explicit loops, as an oracle path
// independent of the library's compensated-summation implementation.
inline Eigen::MatrixXd naive_demean(const Eigen::MatrixXd& M,
                                    const ClusterMap& clusters) {
  Eigen::MatrixXd out = M;
  for (const auto& mem : clusters.members) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      double sum = 0.0;
      for (UnitId i : mem) sum += M(i, c);
      const double mean = sum / static_cast<double>(mem.size());
      for (UnitId i : mem) out(i, c) = M(i, c) - mean;
    }
  }
  return out;
}

}  // namespace netspill::testing

#endif
