#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

namespace alam::harness {

/// One evaluation row of metrics.csv. Columns appear in field order. Every
/// value here is a deterministic function of (config, seed); wall-clock
/// timing goes to events.jsonl so reruns stay byte-identical.
struct MetricRow {
  long env_step = 0;
  double episode_return = 0.0;
  double episode_cost = 0.0;
  double violation_fraction = 0.0;
  double rho = 0.0;
  double mean_lambda = 0.0;
  double loss_policy = 0.0;
  double loss_q1 = 0.0;
  double loss_q2 = 0.0;
  double loss_qc1 = 0.0;
  double loss_qc2 = 0.0;
  double loss_multiplier = 0.0;

  static const char* csv_header();
  std::string csv_line() const;
};

/// Writes metrics.csv and events.jsonl into one run directory.
class RunLogger {
 public:
  explicit RunLogger(std::string run_dir, bool append = false);

  void metric(const MetricRow& row);
  void event(const nlohmann::json& e);
  void flush();
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::ofstream metrics_;
  std::ofstream events_;
};

/// Parses a metrics.csv back into rows (header checked).
std::vector<MetricRow> read_metrics_csv(const std::string& path);

}  // namespace alam::harness
