#ifndef NETSPILL_SIMULATE_HPP
#define NETSPILL_SIMULATE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "netspill/instruments.hpp"
#include "netspill/panel.hpp"
#include "netspill/rng.hpp"

namespace netspill {

// Coefficient positions within each group's delta vector (L = 1):
// [lagged outcome, bank-source average, firm-source average, covariates].
constexpr int kIdxLag = 0;
constexpr int kIdxBankSource = 1;
constexpr int kIdxFirmSource = 2;

struct TrueParams {
  double alpha_B = 0.0;
  double alpha_F = 0.0;
  double beta_BB = 0.0;
  double beta_BF = 0.0;
  double beta_FB = 0.0;
  double beta_FF = 0.0;
  Eigen::VectorXd gamma_B;  // length p; defaults to ones when empty
  Eigen::VectorXd gamma_F;
};

struct SimulationConfig {
  int n_per_group = 500;
  int T = 5;
  int p = 3;
  int clusters_total = 10;  // split evenly between banks and firms
  int ba_m = 1;
  TrueParams params;
  IvOption iv = IvOption::ProjA;
  std::uint64_t seed = 0;
  bool noiseless = false;  // forces epsilon identically zero

  void validate() const;
  // [alpha_K, beta_BK, beta_FK, gamma_K] in the regressor component order.
  Eigen::VectorXd delta_true(Group group) const;
};

struct DgpDraw {
  PanelDataset data;
  NetworkStack nets;
  Eigen::MatrixXd epsilon;  // n x (T+1); column 0 enters only y_0
  Eigen::VectorXd v;        // per-unit fixed effects
  Eigen::MatrixXd pi;       // T x clusters_total; row t-1 is period t
};

// Undirected preferential-attachment graph: seed clique of m+1 nodes, each
// arriving node attaches m edges to distinct nodes chosen proportionally to
// degree. No self-loops, no multi-edges.
std::vector<std::pair<int, int>> generate_ba_graph(int n_nodes, int m,
                                                   Rng& rng);

// One layer built from four BA graphs on n_per_group index nodes each
// (bank-bank, firm-firm, firm-bank, bank-firm). Undirected edges are read as
// bidirectional influence, so each graph contributes ~2m to the average
// in-degree of its target group. Banks are units 0..n-1, firms n..2n-1.
NetworkStack assemble_network_stack(int n_per_group, int ba_m, Rng& rng);

// Union in-neighborhood statistics over both source groups, for comparison
// with reference degree tables.
struct DegreeStats {
  double avg_degree_B = 0.0;
  double avg_degree_F = 0.0;
  int max_degree_B = 0;
  int max_degree_F = 0;
};

DegreeStats degree_stats(const NetworkStack& nets,
                         const GroupPartition& partition);

// X ~ N(1, I), v ~ N(1,1), pi ~ N(1,1), eps ~ N(0,1); y_0 = v + eps_0 and
// the outcome recursion runs forward for t = 1..T.
DgpDraw simulate_panel(const SimulationConfig& config);

struct McReport {
  int reps = 0;
  int failures = 0;
  double reject_rate = 0.0;  // two-sided t-test of beta_FB = null_value
  double fwer = 0.0;         // step-down mistake rate over true nulls
  Eigen::VectorXd mean_delta_B, sd_delta_B;
  Eigen::VectorXd mean_delta_F, sd_delta_F;
};

// Per replication: simulate under beta_FB + delta_shift, estimate, run the
// t-test of beta_FB = null_value at level alpha and the step-down decision.
// Replication r uses the stream child_seed(config.seed, r); aggregation is
// in replication order, so the report is identical for any `jobs`.
McReport mc_study(const SimulationConfig& config, int reps, double alpha,
                  double null_value, double delta_shift, int jobs = 1);

// Empirical familywise error rate under the config's true parameters.
double fwer_experiment(const SimulationConfig& config, int reps, double alpha,
                       int jobs = 1);

}  // namespace netspill

#endif
