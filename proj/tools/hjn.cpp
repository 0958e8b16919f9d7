// Command-line front end: `hjn run <config|scenario>` and `hjn list [filter]`.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hjn/pipeline.hpp"
#include "hjn/scenarios.hpp"
#include "hjn/version.hpp"

namespace {

hjn::ScenarioConfig resolve(const std::string& target) {
  if (std::filesystem::is_regular_file(target)) return hjn::ScenarioConfig::load(target);
  if (auto builtin = hjn::find_scenario(target)) return *builtin;
  throw hjn::Error(hjn::ErrorCode::ConfigError,
                   fmt::format("'{}' is neither a readable config file nor a built-in scenario", target));
}

std::filesystem::path default_out(const std::string& name) {
  const char* root = std::getenv("HJN_OUT");
  return std::filesystem::path(root && *root ? root : "hjn-out") / name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-KAM toolkit for convex Hamilton-Jacobi equations with oblique Neumann conditions"};
  app.set_version_flag("--version", hjn::kVersion);
  app.require_subcommand(1);

  std::string target, out_dir;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "run the pipeline for a config file or built-in scenario");
  run->add_option("config", target, "config file path or built-in scenario name")->required();
  run->add_option("--out", out_dir, "output directory (default $HJN_OUT/<scenario> or hjn-out/<scenario>)");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "overrides run.seed");

  std::string filter;
  auto* list = app.add_subcommand("list", "list built-in scenarios");
  list->add_option("filter", filter, "substring of the scenario name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list->parsed()) {
    for (const auto& e : hjn::list_scenarios(filter)) std::cout << fmt::format("{:<20} {}\n", e.name, e.description);
    return 0;
  }

  try {
    const hjn::ScenarioConfig cfg = resolve(target);
    hjn::RunOptions opt;
    opt.out_dir = out_dir.empty() ? default_out(cfg.name) : std::filesystem::path(out_dir);
    opt.jobs = jobs;
    opt.seed = seed;
    const auto result = hjn::run_pipeline(cfg, opt);
    for (const auto& c : result.claims) {
      std::cout << fmt::format("{}  {}: {}\n", hjn::to_string(c.status), c.name, c.detail);
    }
    std::cout << fmt::format("outputs in {}\n", result.out_dir.string());
    return result.exit_code();
  } catch (const hjn::Error& e) {
    std::cerr << "hjn: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "hjn: " << e.what() << "\n";
    return 1;
  }
}
