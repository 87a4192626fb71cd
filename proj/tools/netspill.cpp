// Command-line front end: estimate from files, simulate to files, and run
// Monte Carlo grids.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>

#include "netspill/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netspill;

namespace {

void print_error_json(const Error& e) {
  json j{{"error", {{"stage", e.stage()}, {"message", e.what()}}}};
  std::cout << j.dump(2) << std::endl;
}

std::vector<std::string> coefficient_names(int L, int p) {
  std::vector<std::string> names{"y_lag"};
  for (int l = 1; l <= L; ++l) names.push_back("nbar_B_l" + std::to_string(l));
  for (int l = 1; l <= L; ++l) names.push_back("nbar_F_l" + std::to_string(l));
  for (int j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

void print_summary(const EstimationResult& res,
                   const StepdownDecision& dec) {
  const auto names = coefficient_names(res.L, res.d_W - 1 - 2 * res.L);
  for (Group g : {Group::B, Group::F}) {
    const GroupEstimate& est = res.group(g);
    std::printf("group %s (n = %d)\n", group_name(g), est.n_K);
    std::printf("  %-12s %12s %12s %12s %12s %10s\n", "coef", "estimate",
                "std.err", "ci.lo", "ci.hi", "p-value");
    for (int j = 0; j < res.d_W; ++j) {
      const double z = est.se[j] > 0.0 ? est.delta_hat[j] / est.se[j] : 0.0;
      const double pval =
          est.se[j] > 0.0 ? std::erfc(std::abs(z) / std::sqrt(2.0)) : 1.0;
      std::printf("  %-12s %12.6f %12.6f %12.6f %12.6f %10.4f\n",
                  names[j].c_str(), est.delta_hat[j], est.se[j],
                  est.ci[j].first, est.ci[j].second, pval);
    }
  }
  std::printf("stepdown: Q_FB = %.4f, Q_BF = %.4f, c_joint = %.4f, "
              "c_marginal = %.4f\n",
              dec.Q_FB, dec.Q_BF, dec.c_low, dec.c_high);
  std::string retained;
  if (dec.retain_FB) retained += "FB";
  if (dec.retain_BF) retained += retained.empty() ? "BF" : ", BF";
  std::printf("retained set S_hat = {%s}\n", retained.c_str());
  std::printf("verdict: %s\n",
              result_to_json(res, dec)["stepdown"]["verdict"]
                  .get<std::string>()
                  .c_str());
}

NetworkStack networks_from_weights(const IngestedPanel& panel,
                                   const std::string& sb_path,
                                   const std::string& bs_path,
                                   double percentile) {
  std::map<std::string, int> ids;
  for (int i = 0; i < static_cast<int>(panel.unit_names.size()); ++i)
    ids[panel.unit_names[i]] = i;
  NetworkStack nets = NetworkStack::empty(panel.data.n(), 1);
  auto add_edges = [&](const std::string& path) {
    for (const auto& [src, dst] :
         build_threshold_network(read_weight_file(path), percentile)) {
      const auto s = ids.find(src);
      const auto d = ids.find(dst);
      if (s == ids.end() || d == ids.end()) continue;
      const Group sg = panel.data.partition.group_of[s->second];
      nets.adj[0][0][group_index(sg)][d->second].push_back(s->second);
    }
  };
  add_edges(sb_path);
  add_edges(bs_path);
  for (auto& grp : nets.adj[0][0])
    for (auto& nbrs : grp) std::sort(nbrs.begin(), nbrs.end());
  return nets;
}

TrueParams parse_params(const std::vector<double>& vals, int p) {
  if (vals.size() != 8)
    throw Error("cli", "--params expects 8 values: alpha_B,alpha_F,beta_BB,"
                       "beta_BF,beta_FB,beta_FF,gamma_B,gamma_F");
  TrueParams tp;
  tp.alpha_B = vals[0];
  tp.alpha_F = vals[1];
  tp.beta_BB = vals[2];
  tp.beta_BF = vals[3];
  tp.beta_FB = vals[4];
  tp.beta_FF = vals[5];
  tp.gamma_B = Eigen::VectorXd::Constant(p, vals[6]);
  tp.gamma_F = Eigen::VectorXd::Constant(p, vals[7]);
  return tp;
}

SimulationConfig config_from_json(const json& cell) {
  SimulationConfig cfg;
  cfg.n_per_group = cell.value("n", 500);
  cfg.T = cell.value("T", 5);
  cfg.p = cell.value("p", 3);
  cfg.clusters_total = cell.value("clusters", 10);
  cfg.ba_m = cell.value("ba_m", 1);
  cfg.iv = iv_option_from_name(cell.value("iv", "A"));
  cfg.seed = cell.value("seed", 0ULL);
  cfg.noiseless = cell.value("noiseless", false);
  if (cell.contains("params")) {
    const json& pj = cell["params"];
    TrueParams tp;
    tp.alpha_B = pj.value("alpha_B", 0.0);
    tp.alpha_F = pj.value("alpha_F", 0.0);
    tp.beta_BB = pj.value("beta_BB", 0.0);
    tp.beta_BF = pj.value("beta_BF", 0.0);
    tp.beta_FB = pj.value("beta_FB", 0.0);
    tp.beta_FF = pj.value("beta_FF", 0.0);
    const double gB = pj.value("gamma_B", 1.0);
    const double gF = pj.value("gamma_F", 1.0);
    tp.gamma_B = Eigen::VectorXd::Constant(cfg.p, gB);
    tp.gamma_F = Eigen::VectorXd::Constant(cfg.p, gF);
    cfg.params = tp;
  }
  return cfg;
}

int run_estimate(const std::string& panel_path, const std::string& edges_path,
                 const std::string& weights_sb, const std::string& weights_bs,
                 double percentile, const std::string& iv_name, double alpha,
                 int max_gap, const std::string& out_path) {
  try {
    const IngestedPanel panel = ingest_panel(panel_path, max_gap);
    if (panel.dropped_units > 0)
      std::fprintf(stderr, "note: dropped %d incomplete unit(s)\n",
                   panel.dropped_units);

    NetworkStack nets;
    if (!weights_sb.empty() || !weights_bs.empty()) {
      if (weights_sb.empty() || weights_bs.empty())
        throw Error("cli", "--weights-sb and --weights-bs go together");
      nets = networks_from_weights(panel, weights_sb, weights_bs, percentile);
    } else if (!edges_path.empty()) {
      nets = ingest_edges(edges_path, panel);
    } else {
      throw Error("cli", "provide --edges or both --weights-sb/--weights-bs");
    }

    const IvOption option = iv_option_from_name(iv_name);
    const EstimationResult res = estimate(panel.data, nets, option, alpha);
    const auto [Q_FB, Q_BF] =
        squared_t_stats(res, kIdxFirmSource, kIdxBankSource);
    const StepdownDecision dec = stepdown(Q_FB, Q_BF, alpha);

    const json out = result_to_json(res, dec);
    std::ofstream f(out_path);
    if (!f) throw Error("cli", "cannot write '" + out_path + "'");
    f << out.dump(2) << '\n';
    print_summary(res, dec);
    return 0;
  } catch (const Error& e) {
    print_error_json(e);
    return 1;
  }
}

int run_simulate(const SimulationConfig& cfg, const std::string& out_dir,
                 bool include_paths) {
  try {
    cfg.validate();
    const DgpDraw draw = simulate_panel(cfg);
    fs::create_directories(out_dir);
    const auto unit_names = default_unit_names(draw.data.n());
    const auto cluster_names =
        default_cluster_names(draw.data.clusters.num_clusters());
    write_panel_csv(out_dir + "/panel.csv", draw.data, unit_names,
                    cluster_names);
    write_edges_csv(out_dir + "/edges.csv", draw.nets, unit_names);
    std::ofstream f(out_dir + "/truth.json");
    if (!f) throw Error("cli", "cannot write truth.json");
    f << truth_to_json(cfg, draw, include_paths).dump(2) << '\n';
    return 0;
  } catch (const Error& e) {
    print_error_json(e);
    return e.stage() == "simulate" || e.stage() == "cli" ? 2 : 1;
  }
}

int run_mc(const std::string& grid_path, int reps, double alpha, int jobs,
           const std::string& out_path) {
  json grid;
  try {
    std::ifstream f(grid_path);
    if (!f) throw Error("cli", "cannot open grid file '" + grid_path + "'");
    f >> grid;
  } catch (const Error& e) {
    print_error_json(e);
    return 2;
  } catch (const json::exception& e) {
    print_error_json(Error("cli", std::string("bad grid JSON: ") + e.what()));
    return 2;
  }
  if (!grid.contains("cells") || !grid["cells"].is_array() ||
      grid["cells"].empty()) {
    print_error_json(Error("cli", "grid file has no cells"));
    return 2;
  }

  json cells_out = json::array();
  std::ofstream csv(out_path + ".csv");
  csv << "n,T,ba_m,clusters,iv,null_value,delta,reps,failures,reject_rate,"
         "fwer\n";
  int cell_failures = 0;
  for (const json& cell : grid["cells"]) {
    try {
      const SimulationConfig cfg = config_from_json(cell);
      const double null_value = cell.value("null_value", 0.0);
      const double delta_shift = cell.value("delta", 0.0);
      const McReport report =
          mc_study(cfg, reps, alpha, null_value, delta_shift, jobs);
      cells_out.push_back(
          mc_report_to_json(cfg, report, alpha, null_value, delta_shift));
      char line[256];
      std::snprintf(line, sizeof(line), "%d,%d,%d,%d,%s,%g,%g,%d,%d,%.6f,%.6f",
                    cfg.n_per_group, cfg.T, cfg.ba_m, cfg.clusters_total,
                    iv_option_name(cfg.iv).c_str(), null_value, delta_shift,
                    report.reps, report.failures, report.reject_rate,
                    report.fwer);
      csv << line << '\n';
    } catch (const Error& e) {
      ++cell_failures;
      cells_out.push_back(
          json{{"error", {{"stage", e.stage()}, {"message", e.what()}}}});
    }
  }
  std::ofstream f(out_path + ".json");
  f << json{{"alpha", alpha}, {"reps", reps}, {"cells", cells_out}}.dump(2)
    << '\n';
  return cell_failures == static_cast<int>(grid["cells"].size()) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic network spillover estimation and simulation"};
  app.require_subcommand(1);

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate from panel/edge files");
  std::string panel_path, edges_path, weights_sb, weights_bs, iv_name = "simple";
  std::string out_path = "result.json";
  double percentile = 25.0, alpha = 0.05;
  int max_gap = 3;
  est->add_option("--panel", panel_path, "panel CSV")->required();
  est->add_option("--edges", edges_path, "edge CSV");
  est->add_option("--weights-sb", weights_sb, "sector-to-bank weights CSV");
  est->add_option("--weights-bs", weights_bs, "bank-to-sector weights CSV");
  est->add_option("--percentile", percentile, "threshold percentile");
  est->add_option("--iv", iv_name, "IV option: simple, A, B, C");
  est->add_option("--alpha", alpha, "significance level");
  est->add_option("--interpolate-max-gap", max_gap, "max interior gap");
  est->add_option("--out", out_path, "result JSON path");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a dataset to files");
  SimulationConfig cfg;
  std::vector<double> params_list(8, 0.0);
  std::string out_dir = ".";
  bool include_paths = false;
  sim->add_option("--n", cfg.n_per_group, "units per group");
  sim->add_option("--T", cfg.T, "time horizon");
  sim->add_option("--ba-m", cfg.ba_m, "BA attachment count");
  sim->add_option("--clusters", cfg.clusters_total, "total cluster count");
  sim->add_option("--p", cfg.p, "covariate dimension");
  sim->add_option("--params", params_list,
                  "alpha_B alpha_F beta_BB beta_BF beta_FB beta_FF gamma_B "
                  "gamma_F")
      ->expected(8);
  sim->add_option("--seed", cfg.seed, "root seed");
  sim->add_flag("--noiseless", cfg.noiseless, "force epsilon = 0");
  sim->add_flag("--include-paths", include_paths,
                "store v, pi, epsilon in truth.json");
  sim->add_option("--out-dir", out_dir, "output directory")->required();

  // mc
  auto* mc = app.add_subcommand("mc", "Run a Monte Carlo grid");
  std::string grid_path, mc_out = "mc_report";
  int reps = 100, jobs = 1;
  double mc_alpha = 0.05;
  mc->add_option("--reps", reps, "replications per cell")->required();
  mc->add_option("--grid", grid_path, "grid config JSON")->required();
  mc->add_option("--alpha", mc_alpha, "significance level");
  mc->add_option("--jobs", jobs, "worker threads");
  mc->add_option("--out", mc_out, "output basename (.json/.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (est->parsed())
    return run_estimate(panel_path, edges_path, weights_sb, weights_bs,
                        percentile, iv_name, alpha, max_gap, out_path);
  if (sim->parsed()) {
    try {
      cfg.params = parse_params(params_list, cfg.p);
    } catch (const Error& e) {
      print_error_json(e);
      return 2;
    }
    return run_simulate(cfg, out_dir, include_paths);
  }
  if (mc->parsed()) return run_mc(grid_path, reps, mc_alpha, jobs, mc_out);
  return 2;
}
