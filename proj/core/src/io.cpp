#include "netspill/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

namespace netspill {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("io", path + ":" + std::to_string(line) +
                          ": malformed number '" + s + "'");
  }
}

long long parse_int(const std::string& s, const std::string& path, int line) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("io", path + ":" + std::to_string(line) +
                          ": malformed integer '" + s + "'");
  }
}

// Fills interior gaps of length <= max_gap by linear interpolation.
// Returns false if any value is still missing.
bool interpolate_series(std::vector<std::optional<double>>& series,
                        int max_gap, int first_required) {
  const int n = static_cast<int>(series.size());
  int prev = -1;
  for (int k = 0; k < n; ++k) {
    if (!series[k].has_value()) continue;
    if (prev >= 0 && k - prev > 1 && k - prev - 1 <= max_gap) {
      const double lo = *series[prev];
      const double hi = *series[k];
      for (int j = prev + 1; j < k; ++j)
        series[j] = lo + (hi - lo) * static_cast<double>(j - prev) /
                             static_cast<double>(k - prev);
    }
    prev = k;
  }
  for (int k = first_required; k < n; ++k)
    if (!series[k].has_value()) return false;
  return true;
}

}  // namespace

IngestedPanel ingest_panel(const std::string& path, int interpolate_max_gap) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open panel file '" + path + "'");

  std::string header;
  if (!std::getline(in, header))
    throw Error("io", path + ": empty panel file");
  const auto head = split_csv(header);
  if (head.size() < 5 || head[0] != "unit" || head[1] != "period" ||
      head[2] != "y" || head[head.size() - 2] != "group" ||
      head.back() != "cluster")
    throw Error("io", path + ": expected header unit,period,y,x1..xp,group,"
                          "cluster");
  const int p = static_cast<int>(head.size()) - 5;

  struct UnitRows {
    Group group = Group::B;
    std::string cluster;
    std::map<long long, std::vector<std::optional<double>>> rows;  // y,x1..xp
  };
  std::vector<std::string> order;
  std::map<std::string, UnitRows> units;
  long long pmin = 0, pmax = 0;
  bool any = false;

  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (static_cast<int>(f.size()) != p + 5)
      throw Error("io", path + ":" + std::to_string(lineno) +
                            ": wrong field count");
    const std::string& name = f[0];
    const long long period = parse_int(f[1], path, lineno);
    const std::string& grp_s = f[p + 3];
    if (grp_s != "B" && grp_s != "F")
      throw Error("io", path + ":" + std::to_string(lineno) +
                            ": group must be B or F");
    const Group grp = grp_s == "B" ? Group::B : Group::F;
    const std::string& cluster = f[p + 4];

    auto [it, inserted] = units.try_emplace(name);
    if (inserted) {
      order.push_back(name);
      it->second.group = grp;
      it->second.cluster = cluster;
    } else if (it->second.group != grp || it->second.cluster != cluster) {
      throw Error("io", path + ":" + std::to_string(lineno) + ": unit '" +
                            name + "' changes group or cluster");
    }
    auto [row_it, row_inserted] = it->second.rows.try_emplace(period);
    if (!row_inserted)
      throw Error("io", path + ":" + std::to_string(lineno) +
                            ": duplicate (unit, period) row");
    auto& vals = row_it->second;
    vals.resize(p + 1);
    for (int j = 0; j <= p; ++j)
      if (!f[2 + j].empty()) vals[j] = parse_double(f[2 + j], path, lineno);

    pmin = any ? std::min(pmin, period) : period;
    pmax = any ? std::max(pmax, period) : period;
    any = true;
  }
  if (!any) throw Error("io", path + ": no data rows");

  const int T = static_cast<int>(pmax - pmin);
  if (T < 2) throw Error("io", path + ": panel needs at least 3 periods");

  IngestedPanel result;
  result.period_base = pmin;

  std::vector<Group> group_labels;
  std::vector<int> cluster_labels;
  std::map<std::string, int> cluster_ids;
  std::vector<Eigen::VectorXd> y_rows;
  std::vector<Eigen::MatrixXd> x_rows;  // per unit, T x p

  for (const auto& name : order) {
    const auto& unit = units.at(name);
    bool complete = true;
    Eigen::VectorXd y_row(T + 1);
    Eigen::MatrixXd x_row(T, p);
    for (int var = 0; var <= p && complete; ++var) {
      std::vector<std::optional<double>> series(T + 1);
      for (const auto& [period, vals] : unit.rows)
        series[period - pmin] = vals[var];
      // Covariates are only required from period 1 on.
      const int first_required = var == 0 ? 0 : 1;
      if (!interpolate_series(series, interpolate_max_gap, first_required)) {
        complete = false;
        break;
      }
      if (var == 0)
        for (int k = 0; k <= T; ++k) y_row[k] = *series[k];
      else
        for (int k = 1; k <= T; ++k) x_row(k - 1, var - 1) = *series[k];
    }
    if (!complete) {
      ++result.dropped_units;
      continue;
    }
    result.unit_names.push_back(name);
    group_labels.push_back(unit.group);
    auto [cit, cinserted] =
        cluster_ids.try_emplace(unit.cluster, static_cast<int>(cluster_ids.size()));
    if (cinserted) result.cluster_names.push_back(unit.cluster);
    cluster_labels.push_back(cit->second);
    y_rows.push_back(std::move(y_row));
    x_rows.push_back(std::move(x_row));
  }

  const int n = static_cast<int>(result.unit_names.size());
  if (n == 0)
    throw Error("io", path + ": all units dropped during ingestion");

  result.data.T = T;
  result.data.p = p;
  result.data.y.resize(n, T + 1);
  for (int i = 0; i < n; ++i) result.data.y.row(i) = y_rows[i];
  result.data.X.reserve(T);
  for (int t = 1; t <= T; ++t) {
    Eigen::MatrixXd Xt(n, p);
    for (int i = 0; i < n; ++i) Xt.row(i) = x_rows[i].row(t - 1);
    result.data.X.push_back(std::move(Xt));
  }
  result.data.partition = GroupPartition::from_labels(std::move(group_labels));
  result.data.clusters = ClusterMap::from_labels(cluster_labels);
  return result;
}

NetworkStack ingest_edges(const std::string& path,
                          const IngestedPanel& panel) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open edge file '" + path + "'");

  std::string header;
  if (!std::getline(in, header))
    throw Error("io", path + ": empty edge file");
  if (split_csv(header) != std::vector<std::string>{"layer", "period", "src",
                                                    "dst"})
    throw Error("io", path + ": expected header layer,period,src,dst");

  std::map<std::string, int> ids;
  for (int i = 0; i < static_cast<int>(panel.unit_names.size()); ++i)
    ids[panel.unit_names[i]] = i;

  struct RawEdge {
    int layer;
    int period;  // -1 for static
    int src;
    int dst;
  };
  std::vector<RawEdge> edges;
  int max_layer = 1;
  bool saw_static = false, saw_periodic = false;

  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4)
      throw Error("io", path + ":" + std::to_string(lineno) +
                            ": wrong field count");
    const int layer = static_cast<int>(parse_int(f[0], path, lineno));
    if (layer < 1)
      throw Error("io", path + ":" + std::to_string(lineno) +
                            ": layer must be >= 1");
    int period = -1;
    if (f[1] == "*") {
      saw_static = true;
    } else {
      saw_periodic = true;
      period = static_cast<int>(parse_int(f[1], path, lineno) -
                                panel.period_base);
      if (period < 0 || period >= panel.data.T)
        throw Error("io", path + ":" + std::to_string(lineno) +
                              ": edge period out of panel range");
    }
    if (f[2] == f[3])
      throw Error("io", path + ":" + std::to_string(lineno) +
                            ": self-loop edge");
    const auto src_it = ids.find(f[2]);
    const auto dst_it = ids.find(f[3]);
    if (src_it == ids.end() || dst_it == ids.end()) continue;  // dropped unit
    max_layer = std::max(max_layer, layer);
    edges.push_back({layer, period, src_it->second, dst_it->second});
  }
  if (saw_static && saw_periodic)
    throw Error("io", path + ": mixed static and per-period edges");

  const int n = panel.data.n();
  NetworkStack nets = NetworkStack::empty(n, max_layer, saw_static || !saw_periodic,
                                          panel.data.T);
  for (const auto& e : edges) {
    const int per = nets.static_across_periods ? 0 : e.period;
    const Group src_group = panel.data.partition.group_of[e.src];
    nets.adj[per][e.layer - 1][group_index(src_group)][e.dst].push_back(e.src);
  }
  for (auto& per : nets.adj)
    for (auto& layer : per)
      for (auto& grp : layer)
        for (auto& nbrs : grp) std::sort(nbrs.begin(), nbrs.end());
  return nets;
}

std::vector<WeightedEdge> read_weight_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open weight file '" + path + "'");
  std::string header;
  if (!std::getline(in, header))
    throw Error("io", path + ": empty weight file");
  if (split_csv(header) != std::vector<std::string>{"src", "dst", "weight"})
    throw Error("io", path + ": expected header src,dst,weight");

  std::vector<WeightedEdge> rows;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3)
      throw Error("io", path + ":" + std::to_string(lineno) +
                            ": wrong field count");
    const double w = parse_double(f[2], path, lineno);
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error("io", path + ":" + std::to_string(lineno) +
                            ": weight must be finite and nonnegative");
    rows.push_back({f[0], f[1], w});
  }
  return rows;
}

std::vector<std::pair<std::string, std::string>> build_threshold_network(
    const std::vector<WeightedEdge>& weights, double percentile) {
  if (weights.empty()) throw Error("io", "empty weight list");
  std::vector<std::pair<std::string, std::string>> edges;
  if (percentile <= 0.0) {
    for (const auto& w : weights) edges.emplace_back(w.src, w.dst);
    return edges;
  }
  if (percentile >= 100.0) return edges;

  // Nearest-rank percentile over the listed pair weights.
  std::vector<double> sorted;
  sorted.reserve(weights.size());
  for (const auto& w : weights) sorted.push_back(w.weight);
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(sorted.size())));
  const double threshold = sorted[std::max<std::size_t>(rank, 1) - 1];

  for (const auto& w : weights)
    if (w.weight > threshold) edges.emplace_back(w.src, w.dst);
  return edges;
}

std::vector<std::string> default_unit_names(int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 0; i < n; ++i) names.push_back("u" + std::to_string(i));
  return names;
}

std::vector<std::string> default_cluster_names(int c) {
  std::vector<std::string> names;
  names.reserve(c);
  for (int k = 0; k < c; ++k) names.push_back("c" + std::to_string(k));
  return names;
}

void write_panel_csv(const std::string& path, const PanelDataset& data,
                     const std::vector<std::string>& unit_names,
                     const std::vector<std::string>& cluster_names) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write panel file '" + path + "'");
  out << "unit,period,y";
  for (int j = 1; j <= data.p; ++j) out << ",x" << j;
  out << ",group,cluster\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int t = 0; t <= data.T; ++t) {
      out << unit_names[i] << ',' << t << ',' << format_double(data.y(i, t));
      for (int j = 0; j < data.p; ++j) {
        out << ',';
        if (t >= 1) out << format_double(data.X[t - 1](i, j));
      }
      out << ',' << group_name(data.partition.group_of[i]) << ','
          << cluster_names[data.clusters.cluster_of[i]] << '\n';
    }
  }
}

void write_edges_csv(const std::string& path, const NetworkStack& nets,
                     const std::vector<std::string>& unit_names) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write edge file '" + path + "'");
  out << "layer,period,src,dst\n";
  for (int per = 0; per < nets.periods; ++per) {
    for (int l = 0; l < nets.layers; ++l) {
      for (int g = 0; g < 2; ++g) {
        const auto& slice = nets.adj[per][l][g];
        for (int i = 0; i < static_cast<int>(slice.size()); ++i) {
          for (UnitId j : slice[i]) {
            out << (l + 1) << ',';
            if (nets.static_across_periods)
              out << '*';
            else
              out << per;
            out << ',' << unit_names[j] << ',' << unit_names[i] << '\n';
          }
        }
      }
    }
  }
}

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json group_to_json(const GroupEstimate& g) {
  nlohmann::json ci = nlohmann::json::array();
  for (const auto& [lo, hi] : g.ci) ci.push_back({lo, hi});
  nlohmann::json j{{"n", g.n_K},
                   {"delta_hat", vec_to_json(g.delta_hat)},
                   {"delta_tilde", vec_to_json(g.delta_tilde)},
                   {"se", vec_to_json(g.se)},
                   {"ci", ci},
                   {"V_hat", mat_to_json(g.V_hat)},
                   {"Omega_hat", mat_to_json(g.Omega_hat)}};
  return j;
}

std::string direction_verdict(const StepdownDecision& d) {
  const int pct = static_cast<int>(std::lround(d.alpha * 100.0));
  if (d.reject_FB() && d.reject_BF())
    return "F <-> B at " + std::to_string(pct) + "%";
  if (d.reject_FB()) return "F -> B at " + std::to_string(pct) + "%";
  if (d.reject_BF()) return "B -> F at " + std::to_string(pct) + "%";
  return "no spillover direction detected at " + std::to_string(pct) + "%";
}

}  // namespace

nlohmann::json result_to_json(const EstimationResult& res,
                              const StepdownDecision& decision) {
  nlohmann::json s_hat = nlohmann::json::array();
  if (decision.retain_FB) s_hat.push_back("FB");
  if (decision.retain_BF) s_hat.push_back("BF");
  nlohmann::json j{
      {"meta",
       {{"schema_version", 1},
        {"alpha", res.alpha},
        {"iv", iv_option_name(res.option)},
        {"d_W", res.d_W},
        {"layers", res.L},
        {"n_B", res.group(Group::B).n_K},
        {"n_F", res.group(Group::F).n_K}}},
      {"groups",
       {{"B", group_to_json(res.group(Group::B))},
        {"F", group_to_json(res.group(Group::F))}}},
      {"stepdown",
       {{"Q_FB", decision.Q_FB},
        {"Q_BF", decision.Q_BF},
        {"c_joint", decision.c_low},
        {"c_marginal", decision.c_high},
        {"S_hat", s_hat},
        {"reject_FB", decision.reject_FB()},
        {"reject_BF", decision.reject_BF()},
        {"verdict", direction_verdict(decision)}}},
      {"diagnostics",
       {{"B_condition_B", res.group(Group::B).B_condition},
        {"B_condition_F", res.group(Group::F).B_condition},
        {"lemma1_rel_residual_B", res.group(Group::B).lemma1_rel_residual},
        {"lemma1_rel_residual_F", res.group(Group::F).lemma1_rel_residual}}}};
  return j;
}

nlohmann::json truth_to_json(const SimulationConfig& config,
                             const DgpDraw& draw, bool include_paths) {
  nlohmann::json j{
      {"n_per_group", config.n_per_group},
      {"T", config.T},
      {"p", config.p},
      {"clusters_total", config.clusters_total},
      {"ba_m", config.ba_m},
      {"seed", config.seed},
      {"noiseless", config.noiseless},
      {"delta_true_B", vec_to_json(config.delta_true(Group::B))},
      {"delta_true_F", vec_to_json(config.delta_true(Group::F))}};
  if (include_paths) {
    j["v"] = vec_to_json(draw.v);
    j["pi"] = mat_to_json(draw.pi);
    j["epsilon"] = mat_to_json(draw.epsilon);
  }
  return j;
}

nlohmann::json mc_report_to_json(const SimulationConfig& config,
                                 const McReport& report, double alpha,
                                 double null_value, double delta_shift) {
  return nlohmann::json{
      {"config",
       {{"n_per_group", config.n_per_group},
        {"T", config.T},
        {"ba_m", config.ba_m},
        {"clusters_total", config.clusters_total},
        {"iv", iv_option_name(config.iv)},
        {"seed", config.seed}}},
      {"alpha", alpha},
      {"null_value", null_value},
      {"delta_shift", delta_shift},
      {"reps", report.reps},
      {"failures", report.failures},
      {"reject_rate", report.reject_rate},
      {"fwer", report.fwer},
      {"mean_delta_B", vec_to_json(report.mean_delta_B)},
      {"sd_delta_B", vec_to_json(report.sd_delta_B)},
      {"mean_delta_F", vec_to_json(report.mean_delta_F)},
      {"sd_delta_F", vec_to_json(report.sd_delta_F)}};
}

}  // namespace netspill
