#include "netspill/panel.hpp"

#include <algorithm>
#include <cmath>

namespace netspill {

GroupPartition GroupPartition::from_labels(std::vector<Group> labels) {
  GroupPartition p;
  p.group_of = std::move(labels);
  for (Group g : p.group_of) {
    if (g == Group::B)
      ++p.n_B;
    else
      ++p.n_F;
  }
  return p;
}

ClusterMap ClusterMap::from_labels(const std::vector<int>& labels) {
  ClusterMap m;
  m.cluster_of = labels;
  int c = 0;
  for (int lab : labels) {
    if (lab < 0) throw Error("panel", "negative cluster label");
    c = std::max(c, lab + 1);
  }
  m.members.resize(c);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i)
    m.members[labels[i]].push_back(i);
  for (const auto& mem : m.members)
    if (mem.empty()) throw Error("panel", "empty cluster label");
  return m;
}

const std::vector<UnitId>& cluster_members(const ClusterMap& clusters,
                                           UnitId i) {
  if (i < 0 || i >= clusters.n())
    throw Error("panel", "unknown unit id " + std::to_string(i));
  return clusters.members[clusters.cluster_of[i]];
}

NetworkStack NetworkStack::empty(int n, int layers, bool is_static,
                                 int periods) {
  NetworkStack s;
  s.layers = layers;
  s.static_across_periods = is_static;
  s.periods = is_static ? 1 : periods;
  s.adj.assign(s.periods, {});
  for (auto& per : s.adj) {
    per.resize(layers);
    for (auto& layer : per)
      for (auto& grp : layer) grp.assign(n, {});
  }
  return s;
}

ValidationReport validate_dataset(const PanelDataset& data,
                                  const NetworkStack& nets) {
  ValidationReport rep;
  const int n = data.n();

  if (data.T < 2)
    rep.violations.push_back({"horizon", "T must be at least 2"});
  if (data.y.cols() != data.T + 1)
    rep.violations.push_back({"unbalanced", "y must have T+1 periods"});
  if (static_cast<int>(data.X.size()) != data.T)
    rep.violations.push_back({"unbalanced", "X must have T periods"});
  for (const auto& Xt : data.X)
    if (Xt.rows() != n || Xt.cols() != data.p)
      rep.violations.push_back({"unbalanced", "covariate block shape mismatch"});
  if (!data.y.allFinite())
    rep.violations.push_back({"unbalanced", "missing or non-finite outcomes"});
  for (const auto& Xt : data.X)
    if (!Xt.allFinite())
      rep.violations.push_back({"unbalanced", "missing or non-finite covariates"});

  if (data.partition.n() != n)
    rep.violations.push_back({"partition", "group partition size mismatch"});
  if (data.partition.n_B < 1 || data.partition.n_F < 1)
    rep.violations.push_back({"partition", "both groups must be nonempty"});

  if (data.clusters.n() != n) {
    rep.violations.push_back({"clusters", "cluster map size mismatch"});
  } else if (data.partition.n() == n) {
    for (int c = 0; c < data.clusters.num_clusters(); ++c) {
      const auto& mem = data.clusters.members[c];
      bool has_b = false, has_f = false;
      for (UnitId i : mem) {
        (data.partition.group_of[i] == Group::B ? has_b : has_f) = true;
      }
      if (has_b && has_f)
        rep.violations.push_back(
            {"mixed-cluster",
             "cluster " + std::to_string(c) + " mixes B and F units"});
      if (mem.size() == 1)
        rep.warnings.push_back("cluster " + std::to_string(c) +
                               " is a singleton; cluster demeaning removes all "
                               "of its variation");
    }
  }

  for (int p = 0; p < nets.periods; ++p) {
    for (int l = 0; l < nets.layers; ++l) {
      for (int g = 0; g < 2; ++g) {
        const auto& slice = nets.adj[p][l][g];
        if (static_cast<int>(slice.size()) != n) {
          rep.violations.push_back({"network", "network unit count mismatch"});
          continue;
        }
        const Group src = static_cast<Group>(g);
        for (int i = 0; i < n; ++i) {
          for (UnitId j : slice[i]) {
            if (j < 0 || j >= n) {
              rep.violations.push_back(
                  {"out-of-range", "neighbor id out of range at unit " +
                                       std::to_string(i)});
            } else {
              if (j == i)
                rep.violations.push_back(
                    {"self-loop", "unit " + std::to_string(i) +
                                      " is its own neighbor in layer " +
                                      std::to_string(l + 1)});
              if (data.partition.n() == n && data.partition.group_of[j] != src)
                rep.violations.push_back(
                    {"group-slice", "unit " + std::to_string(j) +
                                        " appears in the wrong source-group "
                                        "slice"});
            }
          }
        }
      }
    }
  }

  return rep;
}

}  // namespace netspill
