#include "netspill/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "netspill/estimator.hpp"
#include "netspill/inference.hpp"
#include "netspill/stats.hpp"
#include "netspill/transforms.hpp"

namespace netspill {

void SimulationConfig::validate() const {
  if (n_per_group < 1) throw Error("simulate", "n_per_group must be positive");
  if (T < 2) throw Error("simulate", "T must be at least 2");
  if (p < 0) throw Error("simulate", "p must be nonnegative");
  if (clusters_total < 2 || clusters_total % 2 != 0)
    throw Error("simulate", "clusters_total must be even and at least 2");
  const int per_group = clusters_total / 2;
  if (n_per_group % per_group != 0)
    throw Error("simulate",
                "n_per_group must be divisible by the per-group cluster count");
  if (ba_m < 1 || ba_m >= n_per_group)
    throw Error("simulate", "need n_per_group > ba_m >= 1");
  if (params.gamma_B.size() != 0 && params.gamma_B.size() != p)
    throw Error("simulate", "gamma_B has wrong dimension");
  if (params.gamma_F.size() != 0 && params.gamma_F.size() != p)
    throw Error("simulate", "gamma_F has wrong dimension");
}

Eigen::VectorXd SimulationConfig::delta_true(Group group) const {
  Eigen::VectorXd delta(3 + p);
  const Eigen::VectorXd gamma_default = Eigen::VectorXd::Ones(p);
  if (group == Group::B) {
    delta[kIdxLag] = params.alpha_B;
    delta[kIdxBankSource] = params.beta_BB;
    delta[kIdxFirmSource] = params.beta_FB;
    delta.tail(p) = params.gamma_B.size() ? params.gamma_B : gamma_default;
  } else {
    delta[kIdxLag] = params.alpha_F;
    delta[kIdxBankSource] = params.beta_BF;
    delta[kIdxFirmSource] = params.beta_FF;
    delta.tail(p) = params.gamma_F.size() ? params.gamma_F : gamma_default;
  }
  return delta;
}

std::vector<std::pair<int, int>> generate_ba_graph(int n_nodes, int m,
                                                   Rng& rng) {
  if (m < 1 || n_nodes <= m)
    throw Error("simulate", "generate_ba_graph: need n_nodes > m >= 1");
  std::vector<std::pair<int, int>> edges;
  // Endpoint list: node k appears deg(k) times, giving degree-proportional
  // sampling by a uniform draw.
  std::vector<int> endpoints;
  edges.reserve(static_cast<std::size_t>(m) * n_nodes);
  endpoints.reserve(2 * static_cast<std::size_t>(m) * n_nodes);

  for (int a = 0; a < m + 1; ++a) {
    for (int b = a + 1; b < m + 1; ++b) {
      edges.emplace_back(a, b);
      endpoints.push_back(a);
      endpoints.push_back(b);
    }
  }

  std::vector<int> targets(m);
  for (int v = m + 1; v < n_nodes; ++v) {
    int picked = 0;
    while (picked < m) {
      const int cand =
          endpoints[rng.uniform_below(static_cast<std::uint64_t>(endpoints.size()))];
      bool dup = false;
      for (int k = 0; k < picked; ++k) dup |= targets[k] == cand;
      if (dup) continue;
      targets[picked++] = cand;
    }
    for (int k = 0; k < m; ++k) {
      edges.emplace_back(targets[k], v);
      endpoints.push_back(targets[k]);
      endpoints.push_back(v);
    }
  }
  return edges;
}

NetworkStack assemble_network_stack(int n_per_group, int ba_m, Rng& rng) {
  const int n = 2 * n_per_group;
  NetworkStack nets = NetworkStack::empty(n, 1);
  auto& layer = nets.adj[0][0];

  // Graph draw order is fixed: bank-bank, firm-firm, firm-bank, bank-firm.
  const auto add = [&](const std::vector<std::pair<int, int>>& edges,
                       Group src, int src_offset, int dst_offset) {
    auto& slice = layer[group_index(src)];
    for (const auto& [a, b] : edges) {
      slice[dst_offset + b].push_back(src_offset + a);
      slice[dst_offset + a].push_back(src_offset + b);
    }
  };
  add(generate_ba_graph(n_per_group, ba_m, rng), Group::B, 0, 0);
  add(generate_ba_graph(n_per_group, ba_m, rng), Group::F, n_per_group,
      n_per_group);
  add(generate_ba_graph(n_per_group, ba_m, rng), Group::F, n_per_group, 0);
  add(generate_ba_graph(n_per_group, ba_m, rng), Group::B, 0, n_per_group);

  for (auto& grp : layer)
    for (auto& nbrs : grp) std::sort(nbrs.begin(), nbrs.end());
  return nets;
}

DegreeStats degree_stats(const NetworkStack& nets,
                         const GroupPartition& partition) {
  DegreeStats stats;
  const int n = partition.n();
  double sum_B = 0.0, sum_F = 0.0;
  for (int i = 0; i < n; ++i) {
    int deg = 0;
    for (int l = 0; l < nets.layers; ++l)
      for (Group src : {Group::B, Group::F})
        deg += static_cast<int>(nets.in_neighbors(0, l, i, src).size());
    if (partition.group_of[i] == Group::B) {
      sum_B += deg;
      stats.max_degree_B = std::max(stats.max_degree_B, deg);
    } else {
      sum_F += deg;
      stats.max_degree_F = std::max(stats.max_degree_F, deg);
    }
  }
  if (partition.n_B > 0) stats.avg_degree_B = sum_B / partition.n_B;
  if (partition.n_F > 0) stats.avg_degree_F = sum_F / partition.n_F;
  return stats;
}

DgpDraw simulate_panel(const SimulationConfig& config) {
  config.validate();
  const int n_pg = config.n_per_group;
  const int n = 2 * n_pg;
  const int T = config.T;
  const int p = config.p;

  Rng rng(config.seed);

  DgpDraw draw;
  draw.nets = assemble_network_stack(n_pg, config.ba_m, rng);

  std::vector<Group> groups(n);
  for (int i = 0; i < n; ++i) groups[i] = i < n_pg ? Group::B : Group::F;
  draw.data.partition = GroupPartition::from_labels(std::move(groups));

  const int clusters_per_group = config.clusters_total / 2;
  const int cluster_size = n_pg / clusters_per_group;
  std::vector<int> labels(n);
  for (int i = 0; i < n_pg; ++i) labels[i] = i / cluster_size;
  for (int i = 0; i < n_pg; ++i)
    labels[n_pg + i] = clusters_per_group + i / cluster_size;
  draw.data.clusters = ClusterMap::from_labels(labels);

  // Fixed draw order: v, pi, epsilon, X.
  draw.v.resize(n);
  for (int i = 0; i < n; ++i) draw.v[i] = rng.normal(1.0, 1.0);

  draw.pi.resize(T, config.clusters_total);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < config.clusters_total; ++c)
      draw.pi(t, c) = rng.normal(1.0, 1.0);

  draw.epsilon.resize(n, T + 1);
  if (config.noiseless) {
    draw.epsilon.setZero();
  } else {
    for (int i = 0; i < n; ++i)
      for (int t = 0; t <= T; ++t) draw.epsilon(i, t) = rng.normal();
  }

  draw.data.T = T;
  draw.data.p = p;
  draw.data.X.reserve(T);
  for (int t = 1; t <= T; ++t) {
    Eigen::MatrixXd Xt(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) Xt(i, j) = rng.normal(1.0, 1.0);
    draw.data.X.push_back(std::move(Xt));
  }

  const Eigen::VectorXd delta_B = config.delta_true(Group::B);
  const Eigen::VectorXd delta_F = config.delta_true(Group::F);

  draw.data.y.resize(n, T + 1);
  draw.data.y.col(0) = draw.v + draw.epsilon.col(0);
  for (int t = 1; t <= T; ++t) {
    const Eigen::VectorXd nb_B =
        neighbor_average_regressor(draw.data, draw.nets, t, 0, Group::B);
    const Eigen::VectorXd nb_F =
        neighbor_average_regressor(draw.data, draw.nets, t, 0, Group::F);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd& delta =
          draw.data.partition.group_of[i] == Group::B ? delta_B : delta_F;
      double val = delta[kIdxLag] * draw.data.y(i, t - 1) +
                   delta[kIdxBankSource] * nb_B[i] +
                   delta[kIdxFirmSource] * nb_F[i];
      if (p > 0) val += draw.data.X[t - 1].row(i).dot(delta.tail(p));
      val += draw.v[i] + draw.pi(t - 1, draw.data.clusters.cluster_of[i]) +
             draw.epsilon(i, t);
      draw.data.y(i, t) = val;
    }
  }
  return draw;
}

namespace {

struct RepOutcome {
  bool ok = false;
  bool reject = false;
  bool fwer_mistake = false;
  Eigen::VectorXd delta_B;
  Eigen::VectorXd delta_F;
};

RepOutcome run_replication(const SimulationConfig& base, std::uint64_t rep,
                           double alpha, double null_value,
                           double delta_shift) {
  SimulationConfig cfg = base;
  cfg.seed = child_seed(base.seed, rep);
  cfg.params.beta_FB += delta_shift;

  RepOutcome out;
  try {
    const DgpDraw draw = simulate_panel(cfg);
    const EstimationResult res =
        estimate(draw.data, draw.nets, cfg.iv, alpha);

    const GroupEstimate& bank = res.group(Group::B);
    const double se = bank.se[kIdxFirmSource];
    if (!(se > 0.0)) throw Error("mc", "degenerate standard error");
    const double tstat =
        (bank.delta_hat[kIdxFirmSource] - null_value) / se;
    out.reject = std::abs(tstat) > normal_quantile(1.0 - alpha / 2.0);

    const auto [Q_FB, Q_BF] =
        squared_t_stats(res, kIdxFirmSource, kIdxBankSource);
    const StepdownDecision dec = stepdown(Q_FB, Q_BF, alpha);
    const bool fb_null_true = cfg.params.beta_FB == 0.0;
    const bool bf_null_true = cfg.params.beta_BF == 0.0;
    out.fwer_mistake = (fb_null_true && dec.reject_FB()) ||
                       (bf_null_true && dec.reject_BF());

    out.delta_B = bank.delta_hat;
    out.delta_F = res.group(Group::F).delta_hat;
    out.ok = true;
  } catch (const Error&) {
    out.ok = false;
  }
  return out;
}

}  // namespace

McReport mc_study(const SimulationConfig& config, int reps, double alpha,
                  double null_value, double delta_shift, int jobs) {
  if (reps < 1) throw Error("mc", "reps must be at least 1");
  config.validate();
  jobs = std::max(1, jobs);

  std::vector<RepOutcome> outcomes(reps);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) break;
      outcomes[r] = run_replication(config, static_cast<std::uint64_t>(r),
                                    alpha, null_value, delta_shift);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Sequential reduction in replication order keeps the report independent
  // of scheduling.
  McReport report;
  report.reps = reps;
  const int d = 3 + config.p;
  Eigen::VectorXd sum_B = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sum_F = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sumsq_B = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sumsq_F = Eigen::VectorXd::Zero(d);
  int ok_count = 0, rejects = 0, mistakes = 0;
  for (const auto& out : outcomes) {
    if (!out.ok) {
      ++report.failures;
      continue;
    }
    ++ok_count;
    rejects += out.reject ? 1 : 0;
    mistakes += out.fwer_mistake ? 1 : 0;
    sum_B += out.delta_B;
    sum_F += out.delta_F;
    sumsq_B += out.delta_B.cwiseProduct(out.delta_B);
    sumsq_F += out.delta_F.cwiseProduct(out.delta_F);
  }
  if (ok_count > 0) {
    report.reject_rate = static_cast<double>(rejects) / ok_count;
    report.fwer = static_cast<double>(mistakes) / ok_count;
    report.mean_delta_B = sum_B / ok_count;
    report.mean_delta_F = sum_F / ok_count;
    auto sd = [&](const Eigen::VectorXd& s, const Eigen::VectorXd& ss,
                  const Eigen::VectorXd& mean) {
      return ((ss / ok_count) - mean.cwiseProduct(mean))
          .cwiseMax(0.0)
          .cwiseSqrt()
          .eval();
    };
    report.sd_delta_B = sd(sum_B, sumsq_B, report.mean_delta_B);
    report.sd_delta_F = sd(sum_F, sumsq_F, report.mean_delta_F);
  }
  return report;
}

double fwer_experiment(const SimulationConfig& config, int reps, double alpha,
                       int jobs) {
  const McReport report =
      mc_study(config, reps, alpha, config.params.beta_FB, 0.0, jobs);
  return report.fwer;
}

}  // namespace netspill
