#ifndef NETSPILL_PANEL_HPP
#define NETSPILL_PANEL_HPP

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "netspill/error.hpp"

namespace netspill {

using UnitId = int;

enum class Group : int { B = 0, F = 1 };

inline int group_index(Group g) { return static_cast<int>(g); }
inline const char* group_name(Group g) { return g == Group::B ? "B" : "F"; }

// Partition of the units into "banks" and "firms".
struct GroupPartition {
  std::vector<Group> group_of;  // size n
  int n_B = 0;
  int n_F = 0;

  int n() const { return static_cast<int>(group_of.size()); }
  int count(Group g) const { return g == Group::B ? n_B : n_F; }

  static GroupPartition from_labels(std::vector<Group> labels);
};

// Cluster labels; clusters are expected to refine the group partition.
struct ClusterMap {
  std::vector<int> cluster_of;             // size n, dense labels 0..c-1
  std::vector<std::vector<UnitId>> members;  // per cluster, ascending ids

  int n() const { return static_cast<int>(cluster_of.size()); }
  int num_clusters() const { return static_cast<int>(members.size()); }

  static ClusterMap from_labels(const std::vector<int>& labels);
};

// Members of the cluster containing unit i (always includes i itself).
const std::vector<UnitId>& cluster_members(const ClusterMap& clusters, UnitId i);

// Per-period, per-layer directed in-neighborhoods split by source group.
// Period index t refers to the network governing outcomes at t+1 (the
// network of the lagged outcomes). Static stacks store a single period.
struct NetworkStack {
  int layers = 1;
  int periods = 1;  // stored periods; 1 when static
  bool static_across_periods = true;

  // adj[period][layer][src_group][unit] -> sorted in-neighbor ids
  std::vector<std::vector<std::array<std::vector<std::vector<UnitId>>, 2>>> adj;

  const std::vector<UnitId>& in_neighbors(int period, int layer, UnitId i,
                                          Group src) const {
    const int p = static_across_periods ? 0 : period;
    return adj[p][layer][group_index(src)][i];
  }

  static NetworkStack empty(int n, int layers, bool is_static = true,
                            int periods = 1);
};

// Strongly balanced panel: outcomes for periods 0..T, covariates for 1..T.
struct PanelDataset {
  Eigen::MatrixXd y;               // n x (T+1)
  std::vector<Eigen::MatrixXd> X;  // T entries; X[t-1] is n x p for period t
  int T = 0;
  int p = 0;
  GroupPartition partition;
  ClusterMap clusters;

  int n() const { return static_cast<int>(y.rows()); }
};

struct Violation {
  std::string kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate_dataset(const PanelDataset& data,
                                  const NetworkStack& nets);

}  // namespace netspill

#endif
