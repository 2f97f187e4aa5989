#include <cmath>
#include <sstream>

#include "json.hpp"
#include "pianolm/metrics/metrics.hpp"

namespace pianolm::metrics {

MetricSummary summarize(std::span<const double> values) {
  MetricSummary out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  out.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(values.size()));
  return out;
}

void finalize(MetricReport& report) {
  std::vector<double> nrmse;
  std::vector<double> mae;
  for (const auto& c : report.clips) {
    nrmse.push_back(c.spec_nrmse);
    mae.push_back(c.chroma_mae);
  }
  report.spec_nrmse = summarize(nrmse);
  report.chroma_mae = summarize(mae);
}

std::string report_json(const MetricReport& report, const std::string& digest) {
  nlohmann::ordered_json j;
  if (!digest.empty()) j["config_digest"] = digest;
  j["reference"] = report.reference;
  j["fad"] = report.fad;
  j["spec_nrmse"] = {{"mean", report.spec_nrmse.mean}, {"ci95", report.spec_nrmse.ci95}};
  j["chroma_mae"] = {{"mean", report.chroma_mae.mean}, {"ci95", report.chroma_mae.ci95}};
  auto clips = nlohmann::ordered_json::array();
  for (const auto& c : report.clips)
    clips.push_back({{"clip_id", c.clip_id}, {"spec_nrmse", c.spec_nrmse}, {"chroma_mae", c.chroma_mae}});
  j["clips"] = clips;
  return j.dump(2);
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "clip_id,spec_nrmse,chroma_mae\n";
  for (const auto& c : report.clips) out << c.clip_id << ',' << c.spec_nrmse << ',' << c.chroma_mae << '\n';
  out << "#mean," << report.spec_nrmse.mean << ',' << report.chroma_mae.mean << '\n';
  out << "#ci95," << report.spec_nrmse.ci95 << ',' << report.chroma_mae.ci95 << '\n';
  out << "#fad," << report.fad << ",\n";
  return out.str();
}

}  // namespace pianolm::metrics
