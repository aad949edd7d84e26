// Command-line runner: `run` executes one event and writes the trace,
// `compare` tabulates metrics across modes and seeds, and `sweep`
// re-scores a finished run per step over one weight gene's values.
//
// Exit codes: 0 success, 1 usage error, 2 invalid input or file problem,
// 3 success but at least one step needed a fallback (degraded run).
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdmpc/engine.hpp"
#include "pdmpc/errors.hpp"
#include "pdmpc/io.hpp"

namespace fs = std::filesystem;
using namespace pdmpc;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

io::AppConfig effective_config(const std::string& flag_path) {
  if (!flag_path.empty()) return io::load_config(flag_path);
  if (const char* env = std::getenv("PDMPC_CONFIG"); env && *env)
    return io::load_config(env);
  return io::AppConfig{};
}

// "a..b" with integers a <= b.
std::pair<long, long> parse_range(const std::string& text, const char* flag) {
  const std::size_t dots = text.find("..");
  auto fail = [&] {
    throw UsageError(std::string(flag) + " expects a..b, got '" + text + "'");
  };
  if (dots == std::string::npos) fail();
  long lo = 0, hi = 0;
  try {
    std::size_t used = 0;
    lo = std::stol(text.substr(0, dots), &used);
    if (used != dots) fail();
    const std::string tail = text.substr(dots + 2);
    hi = std::stol(tail, &used);
    if (used != tail.size()) fail();
  } catch (const std::logic_error&) {
    fail();
  }
  if (lo < 0 || hi < lo) fail();
  return {lo, hi};
}

std::vector<engine::Mode> parse_modes(const std::string& text) {
  std::vector<engine::Mode> modes;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    const std::string name = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (name == "pdmpc")
      modes.push_back(engine::Mode::PDMPC);
    else if (name == "fixed1")
      modes.push_back(engine::Mode::Fixed1);
    else if (name == "fixed2")
      modes.push_back(engine::Mode::Fixed2);
    else
      throw ValidationError("unknown mode '" + name +
                            "' (expected pdmpc, fixed1, fixed2)");
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (modes.empty()) throw ValidationError("--modes must name at least one mode");
  return modes;
}

fs::path ensure_out_dir(const std::string& flag, const io::AppConfig& cfg) {
  fs::path dir = flag.empty() ? fs::path(cfg.out_dir) : fs::path(flag);
  if (dir.empty()) dir = ".";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

bool trace_degraded(const engine::Trace& trace) {
  for (const auto& rec : trace.steps)
    if (rec.any_fallback()) return true;
  return false;
}

int cmd_run(const std::string& config_path, const std::string& event_path,
            const std::string& out_flag) {
  const io::AppConfig cfg = effective_config(config_path);
  const hydro::ReservoirSpec spec = io::to_spec(cfg);
  const engine::RunConfig rc = io::to_run_config(cfg, spec);
  const engine::Event event = io::load_event(event_path);
  const fs::path out_dir = ensure_out_dir(out_flag, cfg);

  const engine::Trace trace = engine::run_event(event, spec, rc);
  const engine::Metrics metrics =
      engine::compute_metrics(trace, cfg.change_tol);

  const fs::path trace_path =
      out_dir / (event.name + "_" + cfg.mode + "_s" +
                 std::to_string(cfg.seed) + ".csv");
  io::write_trace(trace, metrics, trace_path.string(), spec, cfg);

  const bool degraded = trace_degraded(trace);
  std::cout << "wrote " << trace_path.string() << " (" << trace.steps.size()
            << " steps, peak outflow " << metrics.peak_outflow
            << " m3/s, total penalty " << metrics.total_penalty << ")"
            << (degraded ? " [degraded: fallback steps present]" : "")
            << "\n";
  return degraded ? 3 : 0;
}

int cmd_compare(const std::string& config_path, const std::string& event_path,
                const std::string& out_flag, const std::string& modes_text,
                long seed_count) {
  const io::AppConfig cfg = effective_config(config_path);
  const hydro::ReservoirSpec spec = io::to_spec(cfg);
  const engine::RunConfig rc = io::to_run_config(cfg, spec);
  const engine::Event event = io::load_event(event_path);
  const fs::path out_dir = ensure_out_dir(out_flag, cfg);

  const std::vector<engine::Mode> modes = parse_modes(modes_text);
  std::vector<std::uint64_t> seeds;
  for (long i = 0; i < seed_count; ++i)
    seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));

  const auto rows = engine::compare_modes(event, spec, rc, modes, seeds);
  const fs::path path = out_dir / (event.name + "_compare.csv");
  io::write_comparison(rows, path.string(), cfg);
  std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& event_path,
              const std::string& out_flag, const std::string& gene_name,
              const std::string& range_text, const std::string& steps_text) {
  const auto [v0, v1] = parse_range(range_text, "--range");
  const auto [k0, k1] = parse_range(steps_text, "--steps");

  const io::AppConfig cfg = effective_config(config_path);
  if (cfg.mode != "pdmpc")
    throw ValidationError("sweep holds searched weights, so run.mode must be "
                          "pdmpc (got '" + cfg.mode + "')");
  const hydro::ReservoirSpec spec = io::to_spec(cfg);
  const engine::RunConfig rc = io::to_run_config(cfg, spec);
  const engine::Event event = io::load_event(event_path);
  const fs::path out_dir = ensure_out_dir(out_flag, cfg);

  const engine::Trace trace = engine::run_event(event, spec, rc);
  std::vector<int> values;
  for (long v = v0; v <= v1; ++v) values.push_back(static_cast<int>(v));
  const io::SweepGrid grid = io::sweep_penalties(
      event, spec, rc, trace, io::gene_index(gene_name), values,
      static_cast<std::size_t>(k0), static_cast<std::size_t>(k1));

  const fs::path path =
      out_dir / (event.name + "_sweep_" + gene_name + ".csv");
  io::write_sweep(grid, path.string(), cfg);
  std::cout << "wrote " << path.string() << " (" << grid.penalty.size()
            << " steps x " << grid.values.size() << " values)\n";
  return trace_degraded(trace) ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Receding-horizon reservoir flood-control runner: searches objective "
      "weights per hour, solves the linear subproblem, and commits the "
      "next outflow."};
  app.require_subcommand(1);

  std::string config_path, event_path, out_flag;
  std::string modes_text = "pdmpc,fixed1,fixed2";
  long seed_count = 1;
  std::string gene_name, range_text, steps_text;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "Config file (default: $PDMPC_CONFIG, else built-ins)");
    sub->add_option("--event", event_path, "Event CSV (step,inflow_m3s[,demand_m3s])")
        ->required();
    sub->add_option("--out", out_flag, "Output directory (default from config)");
  };

  CLI::App* run = app.add_subcommand(
      "run", "Run one event; write the trace CSV and its summary sidecar");
  add_common(run);

  CLI::App* compare = app.add_subcommand(
      "compare", "Run several modes and seeds; write one metrics row each");
  add_common(compare);
  compare->add_option("--modes", modes_text,
                      "Comma-separated: pdmpc, fixed1, fixed2");
  compare->add_option("--seeds", seed_count,
                      "Number of seeds, counting up from the config seed")
      ->check(CLI::PositiveNumber);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Re-score a searched run per step over one gene's values");
  add_common(sweep);
  sweep->add_option("--gene", gene_name,
                    "Weight gene: w1, w2, w3i, w3d, w4i, w4d, w5, sh")
      ->required();
  sweep->add_option("--range", range_text, "Gene values a..b")->required();
  sweep->add_option("--steps", steps_text, "Step window k0..k1")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage message
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, event_path, out_flag);
    if (compare->parsed())
      return cmd_compare(config_path, event_path, out_flag, modes_text,
                         seed_count);
    return cmd_sweep(config_path, event_path, out_flag, gene_name, range_text,
                     steps_text);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
