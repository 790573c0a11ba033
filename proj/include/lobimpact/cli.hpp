#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lobimpact/analytics.hpp"
#include "lobimpact/estimation.hpp"
#include "lobimpact/impact.hpp"
#include "lobimpact/rescaling.hpp"
#include "lobimpact/scaling.hpp"

namespace lobimpact::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
// Output-directory override, the only setting read from the environment.
inline constexpr const char* kOutDirVariable = "LOBIMPACT_OUT_DIR";

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Compute failure, tagged with the module that raised it.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string module, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)) {}
  [[nodiscard]] const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

struct SimulateBookScenario {
  BookConfig book;
  std::size_t paths = 1;
};

struct MicroImpactScenario {
  ImpactModel model;
  MetaorderSchedule schedule;
  std::vector<double> grid;
  ImpactConfig impact;
};

struct ScalingMiScenario {
  LimitImpactSpec spec;
  std::vector<double> gammas;
  double t = 1.0;
  double start = 0.0;  // f = gamma on [start, end]
  double end = 1.0;
  std::size_t n_paths = 10000;
};

struct ShapeFitScenario {
  ShapeConfig shape;
  double fit_lo = 0.0;  // gammas in [fit_lo, fit_hi] enter the fit
  double fit_hi = 0.0;
};

struct BrokerEvalScenario {
  RoughVolParams rough;
  StrategyProfile f;
  StrategyProfile g;
  double c_kappa = -1.0;
  double c_lambda = -1.0;
  double kappa_star = 1.0;
  double h = 1.0 / 256.0;
  std::vector<double> grid;
  std::size_t n_paths = 1000;
};

struct EstimateKappaScenario {
  std::optional<SimplifiedPriceModel> model;  // empty: read prices/trades CSVs
  std::filesystem::path prices;
  std::filesystem::path trades;
  double xi0 = 0.0;
  std::size_t windows = 50;
  std::vector<std::size_t> ladder{1, 2, 4, 8, 16};
  bool export_data = true;
};

struct RescalingLadderScenario {
  LimitImpactSpec limit;
  StrategyProfile f;
  RescalingConfig config;
};

using ScenarioParams = std::variant<SimulateBookScenario, MicroImpactScenario, ScalingMiScenario, ShapeFitScenario,
                                    BrokerEvalScenario, EstimateKappaScenario, RescalingLadderScenario>;

struct ScenarioConfig {
  std::string kind;
  ScenarioParams params;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string output_dir = "out";
  json resolved;  // every key with defaults filled in
};

[[nodiscard]] const std::vector<std::string>& scenario_kinds();

// Validates the whole document and reports every violation at once.
[[nodiscard]] ScenarioConfig parse_config(const json& doc);
[[nodiscard]] json load_json(const std::filesystem::path& path);

// Runs the scenario, writes results/ and manifest.json under out_dir, returns the manifest.
json run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

// Entry point of the `lobimpact` executable.
int main(int argc, char** argv);

}  // namespace lobimpact::cli
