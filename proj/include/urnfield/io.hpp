#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "urnfield/engine.hpp"
#include "urnfield/equilibrium.hpp"
#include "urnfield/meanfield.hpp"
#include "urnfield/metrics.hpp"

namespace urnfield {

// CSV schemas (header row first):
//   trajectory   replica,time,kind,load,probability   (kind: local | global)
//   pmf          load,probability
//   xi           n,xi
//   meanfield    time,load,probability

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRecord> records);
void write_pmf_csv(std::ostream& out, const Pmf& pmf);
void write_xi_csv(std::ostream& out, const XiSequence& xi);
void write_meanfield_csv(std::ostream& out, std::span<const double> times, std::span<const Pmf> pmfs);

nlohmann::json trajectory_summary(std::span<const TrajectoryRecord> records);
nlohmann::json meanfield_summary(const MeanFieldSolution& solution);
nlohmann::json to_json(const DistanceReport& report);
nlohmann::json to_json(const Pmf& pmf);

/// Parses "0.5,0.25,0.25" or a CSV file with a `probability` column.
Pmf parse_pmf(const std::string& text);
Pmf read_pmf_csv(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON dump.
std::string config_hash(const nlohmann::json& config);

void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace urnfield
