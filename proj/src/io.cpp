#include "urnfield/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace urnfield {

namespace {

void write_rows(std::ostream& out, std::size_t replica, double time, const char* kind, const Pmf& pmf) {
  for (std::size_t k = 0; k < pmf.size(); ++k)
    if (pmf[k] > 0.0) out << replica << ',' << time << ',' << kind << ',' << k << ',' << pmf[k] << '\n';
}

}  // namespace

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRecord> records) {
  out << "replica,time,kind,load,probability\n";
  out.precision(12);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    for (std::size_t t = 0; t < rec.times.size(); ++t) {
      write_rows(out, r, rec.times[t], "local", rec.local_empirical[t]);
      write_rows(out, r, rec.times[t], "global", rec.global_empirical[t]);
    }
  }
}

void write_pmf_csv(std::ostream& out, const Pmf& pmf) {
  out << "load,probability\n";
  out.precision(17);
  for (std::size_t k = 0; k < pmf.size(); ++k) out << k << ',' << pmf[k] << '\n';
}

void write_xi_csv(std::ostream& out, const XiSequence& xi) {
  out << "n,xi\n";
  out.precision(17);
  for (std::size_t n = 0; n < xi.xi.size(); ++n) out << n << ',' << xi.xi[n] << '\n';
}

void write_meanfield_csv(std::ostream& out, std::span<const double> times, std::span<const Pmf> pmfs) {
  out << "time,load,probability\n";
  out.precision(15);
  for (std::size_t t = 0; t < times.size(); ++t)
    for (std::size_t k = 0; k < pmfs[t].size(); ++k) out << times[t] << ',' << k << ',' << pmfs[t][k] << '\n';
}

nlohmann::json trajectory_summary(std::span<const TrajectoryRecord> records) {
  nlohmann::json replicas = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json item{{"event_count", rec.event_count},
                        {"n", rec.n},
                        {"h", rec.h},
                        {"total_balls", rec.total},
                        {"global_mean", static_cast<double>(rec.total) / rec.n},
                        {"final_local_mean", rec.local_mean.empty() ? 0.0 : rec.local_mean.back()}};
    if (rec.time_averaged_global) item["time_averaged_global"] = to_json(*rec.time_averaged_global);
    replicas.push_back(std::move(item));
  }
  return {{"replicas", records.size()}, {"runs", std::move(replicas)}};
}

nlohmann::json meanfield_summary(const MeanFieldSolution& solution) {
  return {{"truncation", solution.truncation},
          {"accepted_steps", solution.stats.accepted_steps},
          {"rejected_steps", solution.stats.rejected_steps},
          {"max_boundary_flux", solution.stats.max_boundary_flux},
          {"max_mass_leak", solution.stats.max_mass_leak},
          {"times", solution.times},
          {"mass_series", solution.mass_series}};
}

nlohmann::json to_json(const DistanceReport& report) {
  nlohmann::json j{{"tv", report.tv}, {"w1", report.w1}, {"w2", report.w2}};
  if (report.sup_time_tv) j["sup_time_tv"] = *report.sup_time_tv;
  return j;
}

nlohmann::json to_json(const Pmf& pmf) { return std::vector<double>(pmf.probs().begin(), pmf.probs().end()); }

Pmf parse_pmf(const std::string& text) {
  if (std::filesystem::is_regular_file(text)) return read_pmf_csv(text);
  std::vector<double> probs;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      probs.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse probability '" + item + "'");
    }
  }
  return Pmf(std::move(probs));
}

Pmf read_pmf_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "load,probability") throw std::invalid_argument(path.string() + ": expected header load,probability");
  std::vector<double> probs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const auto load = static_cast<std::size_t>(std::stoull(line.substr(0, comma)));
    if (load >= probs.size()) probs.resize(load + 1, 0.0);
    probs[load] = std::stod(line.substr(comma + 1));
  }
  return Pmf(std::move(probs));
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

}  // namespace urnfield
