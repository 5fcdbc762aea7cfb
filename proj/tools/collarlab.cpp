// collarlab run --config cfg.json [--suite id]... [--out dir] [--format csv,json,...] [--seed n]
// Exit 0 when every suite passes, 1 on a tolerance failure, 2 on configuration or I/O errors.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "collarlab/harness.hpp"

namespace {

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::size_t start = 0;
    while (start <= item.size()) {
      const std::size_t comma = item.find(',', start);
      const std::string part = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!part.empty()) out.push_back(part);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic checks for Weil-Petersson, Ricci and perturbed Ricci metrics near the boundary of moduli space"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "run verification suites from a JSON config");
  std::string config_path, out_dir;
  std::vector<std::string> suites, formats;
  std::uint64_t seed = 0;
  run->add_option("--config", config_path, "JSON run configuration")->required();
  run->add_option("--suite", suites, "suite id (repeatable, comma lists allowed); overrides the config list");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--format", formats, "csv, json, markdown, svg-lines (comma separated)");
  auto* seed_opt = run->add_option("--seed", seed, "RNG seed for the randomized checks");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  using namespace collarlab;
  try {
    RunConfig cfg = load_config(config_path);
    if (!suites.empty()) cfg.suites = split_list(suites);
    if (!formats.empty()) cfg.formats = split_list(formats);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (*seed_opt) cfg.seed = seed;
    cfg.validate();

    std::vector<SuiteReport> reports;
    for (const auto& id : cfg.suites) {
      reports.push_back(run_suite(cfg, id));
      const SuiteReport& r = reports.back();
      std::fprintf(stderr, "%-18s %s  %zu checks  %.1fs\n", id.c_str(), r.pass ? "PASS" : "FAIL", r.checks.size(),
                   r.seconds);
    }
    if (!reports.empty())
      for (const auto& f : cfg.formats) emit_report(reports, f, cfg.out_dir);

    bool ok = true;
    for (const auto& r : reports)
      for (const auto& bad : r.failing()) {
        ok = false;
        std::fprintf(stderr, "failing: %s/%s\n", r.suite.c_str(), bad.c_str());
      }
    return ok ? 0 : 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "collarlab: %s: %s\n", errc_name(e.code()), e.what());
    return e.code() == Errc::config || e.code() == Errc::io ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "collarlab: %s\n", e.what());
    return 2;
  }
}
