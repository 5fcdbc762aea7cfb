#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "collarlab/asymptotics.hpp"
#include "json.hpp"

namespace collarlab {

struct CollarEntry {
  std::optional<Real> u;
  std::optional<Real> t;
  Real c = 0.5L;
  std::string spec = "pure";
};

struct RunConfig {
  std::vector<CollarEntry> collars;  // extra evaluation points beside the sweep
  int n_tau = default_intervals;
  int n_modes = 0;  // 0: the family default
  Real u_min = 0.0125L;
  Real u_max = 0.1L;
  int points = 4;
  std::string spacing = "geometric";
  Real c = 0.5L;
  CutoffSpec cutoffs;
  std::vector<std::string> suites;
  std::map<std::string, Real> tolerances;
  std::filesystem::path out_dir = "collarlab-out";
  std::vector<std::string> formats = {"csv", "json", "markdown"};
  std::uint64_t seed = 2024;
  std::vector<Real> perturbation_c = {1, 10};
  std::size_t green_samples = 100;

  // u_max, ..., u_min with constant ratio.
  std::vector<Real> sweep() const;
  void validate() const;
};

// Throws Error(config) on schema violations.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

const std::vector<std::string>& suite_ids();
const std::vector<std::string>& format_ids();

struct CheckRecord {
  std::string suite;
  std::string id;
  double u = 0;
  double t_abs = 0;
  double measured_re = 0, measured_im = 0;
  double target_re = 0, target_im = 0;
  double rel_err = 0;
  bool pass = true;
  bool report_only = false;
  double tolerance = 0;
  // measured and target are multiplied by |t|^{-t_power} so they stay in double range.
  double t_power = 0;

  bool operator==(const CheckRecord&) const = default;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckRecord> checks;
  bool pass = true;
  double seconds = 0;  // wall clock; kept out of the machine-readable outputs

  std::vector<std::string> failing() const;
};

void to_json(nlohmann::json& j, const CheckRecord& r);
void from_json(const nlohmann::json& j, CheckRecord& r);
void to_json(nlohmann::json& j, const SuiteReport& r);
void from_json(const nlohmann::json& j, SuiteReport& r);

// Worker count from COLLARLAB_WORKERS (default: hardware concurrency, at least 1).
std::size_t worker_count();

SuiteReport run_suite(const RunConfig& cfg, const std::string& suite);

// Writes one format into dir; returns the files written.  Throws Error(io).
std::vector<std::filesystem::path> emit_report(const std::vector<SuiteReport>& reports, const std::string& format,
                                               const std::filesystem::path& dir);

std::string csv_text(const std::vector<SuiteReport>& reports);
std::string json_text(const std::vector<SuiteReport>& reports);
std::string markdown_text(const std::vector<SuiteReport>& reports);
// One chart per check id: log10 rel_err against log10 u.
std::map<std::string, std::string> svg_charts(const std::vector<SuiteReport>& reports);

}  // namespace collarlab
