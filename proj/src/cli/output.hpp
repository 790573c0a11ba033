#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lobimpact/cli.hpp"

namespace lobimpact::cli {

struct Column {
  std::string name;
  std::string unit;
};

// Shortest round-trip decimal form, so files are byte-identical across runs.
[[nodiscard]] std::string format_number(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<Column> columns);
  template <class... Cells>
  void row(const Cells&... cells) {
    if (sizeof...(cells) != columns_) throw std::logic_error("CsvWriter: wrong number of cells");
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  void close();

 private:
  static std::string cell(double x) { return format_number(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I i) {
    return std::to_string(i);
  }

  std::ofstream out_;
  std::size_t columns_;
};

// Files written by one run, with the column units that go into the manifest.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path out_dir);
  CsvWriter csv(const std::string& name, std::vector<Column> columns);
  void json_file(const std::string& name, const json& value, std::vector<Column> fields);
  // Registers a file written by someone else; returns where to write it.
  std::filesystem::path external(const std::string& name, std::vector<Column> columns);
  void seed(const std::string& task, std::uint64_t value) { seeds_[task] = value; }
  [[nodiscard]] json manifest_outputs() const;
  [[nodiscard]] const json& seeds() const noexcept { return seeds_; }
  [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  struct File {
    std::string relative;
    std::vector<Column> columns;
  };
  std::filesystem::path dir_;
  std::vector<File> files_;
  json seeds_ = json::object();
};

// One scenario per kind; each writes its files through `artifacts`.
void run_simulate_book(const ScenarioConfig& cfg, const SimulateBookScenario& s, Artifacts& a);
void run_micro_impact(const ScenarioConfig& cfg, const MicroImpactScenario& s, Artifacts& a);
void run_scaling_mi(const ScenarioConfig& cfg, const ScalingMiScenario& s, Artifacts& a);
void run_shape_fit(const ScenarioConfig& cfg, const ShapeFitScenario& s, Artifacts& a);
void run_broker_eval(const ScenarioConfig& cfg, const BrokerEvalScenario& s, Artifacts& a);
void run_estimate_kappa(const ScenarioConfig& cfg, const EstimateKappaScenario& s, Artifacts& a);
void run_rescaling_ladder(const ScenarioConfig& cfg, const RescalingLadderScenario& s, Artifacts& a);

}  // namespace lobimpact::cli
