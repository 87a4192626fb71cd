#ifndef NETSPILL_IO_HPP
#define NETSPILL_IO_HPP

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "netspill/estimator.hpp"
#include "netspill/inference.hpp"
#include "netspill/panel.hpp"
#include "netspill/simulate.hpp"

namespace netspill {

// Panel CSV: header `unit,period,y,x1..xp,group,cluster`. Periods are
// re-based to 0..T internally; the external-id mapping is kept for output.
struct IngestedPanel {
  PanelDataset data;
  std::vector<std::string> unit_names;     // dense id -> external id
  std::vector<std::string> cluster_names;  // dense cluster -> external id
  long long period_base = 0;
  int dropped_units = 0;
};

// Linear interpolation of interior gaps up to `interpolate_max_gap` per
// unit and variable; units still incomplete afterwards are dropped.
IngestedPanel ingest_panel(const std::string& path, int interpolate_max_gap);

// Edge CSV: header `layer,period,src,dst`; `period=*` denotes a static
// stack. Directed: src is an in-neighbor of dst. Edges whose endpoints were
// dropped during panel ingestion are skipped.
NetworkStack ingest_edges(const std::string& path, const IngestedPanel& panel);

struct WeightedEdge {
  std::string src;
  std::string dst;
  double weight = 0.0;
};

// Weights CSV: header `src,dst,weight`.
std::vector<WeightedEdge> read_weight_file(const std::string& path);

// Keeps (src -> dst) pairs whose weight strictly exceeds the q-th
// nearest-rank percentile of all listed pair weights. q <= 0 keeps all.
std::vector<std::pair<std::string, std::string>> build_threshold_network(
    const std::vector<WeightedEdge>& weights, double percentile);

void write_panel_csv(const std::string& path, const PanelDataset& data,
                     const std::vector<std::string>& unit_names,
                     const std::vector<std::string>& cluster_names);

void write_edges_csv(const std::string& path, const NetworkStack& nets,
                     const std::vector<std::string>& unit_names);

// Default names "u<i>" / "c<k>" for simulated datasets.
std::vector<std::string> default_unit_names(int n);
std::vector<std::string> default_cluster_names(int c);

nlohmann::json result_to_json(const EstimationResult& res,
                              const StepdownDecision& decision);

nlohmann::json truth_to_json(const SimulationConfig& config,
                             const DgpDraw& draw, bool include_paths);

nlohmann::json mc_report_to_json(const SimulationConfig& config,
                                 const McReport& report, double alpha,
                                 double null_value, double delta_shift);

}  // namespace netspill

#endif
