#include "alam/harness/logging.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace alam::harness {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

const char* MetricRow::csv_header() {
  return "env_step,episode_return,episode_cost,violation_fraction,rho,mean_lambda,"
         "loss_policy,loss_q1,loss_q2,loss_qc1,loss_qc2,loss_multiplier";
}

std::string MetricRow::csv_line() const {
  std::ostringstream os;
  os << env_step << ',' << fmt(episode_return) << ',' << fmt(episode_cost) << ','
     << fmt(violation_fraction) << ',' << fmt(rho) << ',' << fmt(mean_lambda) << ','
     << fmt(loss_policy) << ',' << fmt(loss_q1) << ',' << fmt(loss_q2) << ','
     << fmt(loss_qc1) << ',' << fmt(loss_qc2) << ',' << fmt(loss_multiplier);
  return os.str();
}

RunLogger::RunLogger(std::string run_dir, bool append) : dir_(std::move(run_dir)) {
  std::filesystem::create_directories(dir_);
  const auto mode = append ? std::ios::app : std::ios::trunc;
  const bool fresh = !append || !std::filesystem::exists(dir_ + "/metrics.csv") ||
                     std::filesystem::file_size(dir_ + "/metrics.csv") == 0;
  metrics_.open(dir_ + "/metrics.csv", mode);
  events_.open(dir_ + "/events.jsonl", mode);
  if (!metrics_ || !events_) throw std::runtime_error("run logger: cannot open files in " + dir_);
  if (fresh) metrics_ << MetricRow::csv_header() << '\n';
}

void RunLogger::metric(const MetricRow& row) {
  metrics_ << row.csv_line() << '\n';
  metrics_.flush();
}

void RunLogger::event(const nlohmann::json& e) {
  events_ << e.dump() << '\n';
  events_.flush();
}

void RunLogger::flush() {
  metrics_.flush();
  events_.flush();
}

std::vector<MetricRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty metrics file: " + path);
  if (line != MetricRow::csv_header())
    throw std::runtime_error("unexpected metrics header in " + path);
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricRow r;
    std::istringstream ss(line);
    std::string tok;
    auto next = [&]() -> double {
      if (!std::getline(ss, tok, ',')) throw std::runtime_error("short metrics row in " + path);
      return std::stod(tok);
    };
    r.env_step = static_cast<long>(next());
    r.episode_return = next();
    r.episode_cost = next();
    r.violation_fraction = next();
    r.rho = next();
    r.mean_lambda = next();
    r.loss_policy = next();
    r.loss_q1 = next();
    r.loss_q2 = next();
    r.loss_qc1 = next();
    r.loss_qc2 = next();
    r.loss_multiplier = next();
    rows.push_back(r);
  }
  return rows;
}

}  // namespace alam::harness
