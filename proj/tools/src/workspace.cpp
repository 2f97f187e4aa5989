#include "workspace.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <vector>

#include "pianolm/binary_io.hpp"
#include "pianolm/digest.hpp"
#include "pianolm/error.hpp"

namespace pianolm::cli {

std::string run_dir_name(const std::string& stage, std::uint64_t digest) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  return stage + "-" + stamp + "-" + digest_hex(digest).substr(0, 8);
}

std::optional<fs::path> latest_run(const fs::path& work_dir, const std::string& stage,
                                   std::optional<std::uint64_t> digest) {
  if (!fs::is_directory(work_dir)) return std::nullopt;
  std::vector<fs::path> hits;
  const std::string prefix = stage + "-";
  const std::string suffix = digest ? "-" + digest_hex(*digest).substr(0, 8) : "";
  for (const auto& e : fs::directory_iterator(work_dir)) {
    if (!e.is_directory()) continue;
    const auto name = e.path().filename().string();
    if (name.rfind(prefix, 0) != 0) continue;
    if (!suffix.empty() && (name.size() < suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0))
      continue;
    if (!fs::exists(e.path() / "manifest.json")) continue;
    hits.push_back(e.path());
  }
  if (hits.empty()) return std::nullopt;
  return *std::max_element(hits.begin(), hits.end());
}

fs::path make_run_dir(const fs::path& work_dir, const std::string& stage, std::uint64_t digest,
                      const std::string& override_dir) {
  fs::path dir = override_dir.empty() ? work_dir / run_dir_name(stage, digest) : fs::path(override_dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::ordered_json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::ordered_json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw FormatError(path.string() + " is not valid JSON");
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path locate_run(const std::string& explicit_dir, const fs::path& work_dir, const std::string& stage) {
  if (!explicit_dir.empty()) {
    if (!fs::exists(fs::path(explicit_dir) / "manifest.json"))
      throw InvalidArgument(explicit_dir + " has no manifest.json");
    return explicit_dir;
  }
  auto found = latest_run(work_dir, stage);
  if (!found) throw InvalidArgument("no " + stage + " run under " + work_dir.string() + "; run '" + stage + "' first");
  return *found;
}

}  // namespace pianolm::cli
