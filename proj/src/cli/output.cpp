#include "output.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

namespace lobimpact::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw std::runtime_error("format_number: to_chars failed");
  return {buf.data(), end};
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<Column> columns)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i].name;
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw std::runtime_error("CsvWriter: write failed");
}

Artifacts::Artifacts(std::filesystem::path out_dir) : dir_(std::move(out_dir)) {
  std::filesystem::create_directories(dir_ / "results");
}

CsvWriter Artifacts::csv(const std::string& name, std::vector<Column> columns) {
  files_.push_back({"results/" + name, columns});
  return CsvWriter(dir_ / "results" / name, std::move(columns));
}

void Artifacts::json_file(const std::string& name, const json& value, std::vector<Column> fields) {
  files_.push_back({"results/" + name, std::move(fields)});
  std::ofstream out(dir_ / "results" / name);
  out << value.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write results/" + name);
}

std::filesystem::path Artifacts::external(const std::string& name, std::vector<Column> columns) {
  files_.push_back({"results/" + name, std::move(columns)});
  return dir_ / "results" / name;
}

json Artifacts::manifest_outputs() const {
  json outputs = json::array();
  for (const auto& f : files_) {
    json cols = json::array();
    for (const auto& c : f.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
    const auto path = dir_ / f.relative;
    outputs.push_back({{"file", f.relative},
                       {"sha256", sha256_file(path)},
                       {"bytes", std::filesystem::file_size(path)},
                       {path.extension() == ".csv" ? "columns" : "fields", cols}});
  }
  return outputs;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sha256_file: cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256_file: OpenSSL init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

namespace {

std::string module_of(const std::string& kind) {
  if (kind == "simulate-book") return "orderbook";
  if (kind == "micro-impact") return "impact";
  if (kind == "scaling-mi") return "scaling";
  if (kind == "shape-fit" || kind == "broker-eval") return "analytics";
  if (kind == "estimate-kappa") return "estimation";
  return "rescaling";
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

json run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  const auto started = std::chrono::steady_clock::now();
  const auto started_at = utc_now();
  Artifacts artifacts(out_dir);
  try {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SimulateBookScenario>) run_simulate_book(config, s, artifacts);
          else if constexpr (std::is_same_v<T, MicroImpactScenario>) run_micro_impact(config, s, artifacts);
          else if constexpr (std::is_same_v<T, ScalingMiScenario>) run_scaling_mi(config, s, artifacts);
          else if constexpr (std::is_same_v<T, ShapeFitScenario>) run_shape_fit(config, s, artifacts);
          else if constexpr (std::is_same_v<T, BrokerEvalScenario>) run_broker_eval(config, s, artifacts);
          else if constexpr (std::is_same_v<T, EstimateKappaScenario>) run_estimate_kappa(config, s, artifacts);
          else run_rescaling_ladder(config, s, artifacts);
        },
        config.params);
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(module_of(config.kind), e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  json manifest;
  manifest["tool"] = "lobimpact";
  manifest["code_version"] = kVersion;
  manifest["scenario"] = config.kind;
  manifest["root_seed"] = config.seed;
  manifest["seed_rule"] =
      "task seed = derive_seed(root_seed, path): SplitMix64 finalizer chained over the task coordinates; "
      "tasks never share a stream and seeds do not depend on the worker count";
  manifest["task_seeds"] = artifacts.seeds();
  manifest["workers"] = config.workers;
  manifest["config"] = config.resolved;
  manifest["started_at"] = started_at;
  manifest["wall_clock_seconds"] = wall;
  manifest["outputs"] = artifacts.manifest_outputs();
  std::ofstream out(out_dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write manifest.json");
  return manifest;
}

namespace {

void write_error(const std::filesystem::path& out_dir, const json& record) {
  std::cerr << record.dump() << '\n';
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) return;
  std::ofstream out(out_dir / "error.json");
  out << record.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive market impact laboratory: runs one JSON-configured scenario"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run the scenario described by a JSON config");
  std::string config_path, out_flag;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  run->add_option("config", config_path, "Scenario config (JSON)")->required();
  run->add_option("--out", out_flag, std::string("Output directory (overrides ") + kOutDirVariable + " and the config)");
  run->add_option("--workers", workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Root seed");
  CLI11_PARSE(app, argc, argv);

  std::filesystem::path out_dir = out_flag;
  if (out_dir.empty())
    if (const char* env = std::getenv(kOutDirVariable); env && *env) out_dir = env;
  try {
    json doc = load_json(config_path);
    if (doc.is_object()) {
      if (workers) doc["workers"] = *workers;
      if (seed) doc["seed"] = *seed;
    }
    if (out_dir.empty() && doc.is_object() && doc.contains("output_dir") && doc["output_dir"].is_string())
      out_dir = doc["output_dir"].get<std::string>();
    if (out_dir.empty()) out_dir = "out";
    if (doc.is_object()) doc["output_dir"] = out_dir.string();
    const auto cfg = parse_config(doc);
    const auto manifest = run_scenario(cfg, out_dir);
    std::cout << "wrote " << manifest["outputs"].size() << " result files and manifest.json to " << out_dir.string()
              << '\n';
    return 0;
  } catch (const ConfigError& e) {
    write_error(out_dir.empty() ? std::filesystem::path("out") : out_dir,
                {{"status", "error"}, {"kind", "config-validation"}, {"violations", e.violations()}});
    return 2;
  } catch (const ScenarioError& e) {
    write_error(out_dir, {{"status", "error"}, {"kind", "runtime"}, {"module", e.module()}, {"message", e.what()}});
    return 3;
  } catch (const std::exception& e) {
    write_error(out_dir.empty() ? std::filesystem::path("out") : out_dir,
                {{"status", "error"}, {"kind", "io"}, {"message", e.what()}});
    return 4;
  }
}

}  // namespace lobimpact::cli
