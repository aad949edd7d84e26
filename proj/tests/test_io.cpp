// File-format layer: event CSVs, the strict config document, trace and
// comparison rendering with reproducibility headers, and the per-step
// weight-sweep grid reconstructed from a finished run.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pdmpc/errors.hpp"
#include "pdmpc/events.hpp"
#include "pdmpc/hydro.hpp"
#include "pdmpc/io.hpp"

using namespace pdmpc;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  fs::path p = fs::temp_directory_path() / "pdmpc_io_test";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

template <typename E, typename Fn>
std::string message_of(Fn&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  FAIL("expected exception was not thrown");
  return {};
}

}  // namespace

TEST_CASE("event CSV round-trips exactly") {
  engine::Event e;
  e.name = "roundtrip";
  e.inflow = {300.0, 1234.5678901234567, 2500.25, 17.0};
  e.demand = {0.0, 10.5, 0.0, 3.0625};
  const fs::path path = tmp_dir() / "roundtrip.csv";
  io::save_event(e, path.string());

  engine::Event back = io::load_event(path.string());
  CHECK(back.name == "roundtrip");
  REQUIRE(back.inflow.size() == e.inflow.size());
  for (std::size_t i = 0; i < e.inflow.size(); ++i) {
    CHECK(back.inflow[i] == e.inflow[i]);  // bit-exact through %.17g
    CHECK(back.demand[i] == e.demand[i]);
  }

  e.demand.clear();
  io::save_event(e, path.string());
  back = io::load_event(path.string());
  CHECK(back.demand.empty());
  CHECK(slurp(path).rfind("step,inflow_m3s\n", 0) == 0);
}

TEST_CASE("event parsing accepts the documented shapes") {
  auto e = io::parse_event("step,inflow_m3s\n0,100\n1,200\n2,300\n",
                           "data/events/three.csv");
  CHECK(e.inflow == std::vector<double>{100.0, 200.0, 300.0});
  CHECK(e.demand.empty());
  CHECK(e.name == "three");

  // demand column, CRLF endings, stray spaces, trailing blank line
  e = io::parse_event(
      " step , inflow_m3s , demand_m3s \r\n0, 10 ,1\r\n1,20, 2 \r\n\r\n",
      "x.csv");
  CHECK(e.inflow == std::vector<double>{10.0, 20.0});
  CHECK(e.demand == std::vector<double>{1.0, 2.0});
}

TEST_CASE("event parsing rejects malformed input with located errors") {
  auto msg = message_of<ValidationError>([] {
    io::parse_event("step,inflow_m3s\n0,50\n1,-5\n", "ev.csv");
  });
  CHECK(msg.find("step 1") != std::string::npos);  // names the row

  msg = message_of<ValidationError>([] {
    io::parse_event("step,inflow_m3s\n0,50\n2,60\n", "ev.csv");
  });
  CHECK(msg.find("contiguous") != std::string::npos);

  msg = message_of<ParseError>(
      [] { io::parse_event("time,inflow_m3s\n0,50\n", "ev.csv"); });
  CHECK(msg.find("ev.csv:1") != std::string::npos);

  msg = message_of<ParseError>([] {
    io::parse_event("step,inflow_m3s\n0,50\n1,fast\n", "ev.csv");
  });
  CHECK(msg.find("ev.csv:3") != std::string::npos);

  CHECK_THROWS_AS(
      io::parse_event("step,inflow_m3s\n0,50,7\n", "ev.csv"), ParseError);
  CHECK_THROWS_AS(
      io::parse_event("step,inflow_m3s,demand_m3s\n0,50,-1\n1,2,3\n", "ev.csv"),
      ValidationError);
  // a single row fails the engine's minimum-length rule
  CHECK_THROWS_AS(io::parse_event("step,inflow_m3s\n0,50\n", "ev.csv"),
                  ValidationError);
}

TEST_CASE("config parsing: defaults, overrides, strictness") {
  const io::AppConfig defaults;
  io::AppConfig parsed = io::parse_config("{}", "cfg");
  CHECK(io::config_hash(parsed) == io::config_hash(defaults));

  parsed = io::parse_config(R"({
    "run": {"horizon": 12, "seed": 7, "mode": "fixed2"},
    "forecast": {"certain": true},
    "evaluator": {"e": [5, 1, 2, 8, 5, 3, 1, 1], "large_value": 500},
    "search": {"sh_levels": [78.0, 79.0, 79.5], "pin_ceiling": true},
    "ga": {"population": 10, "generations": 4}
  })",
                           "cfg");
  CHECK(parsed.horizon == 12);
  CHECK(parsed.seed == 7);
  CHECK(parsed.mode == "fixed2");
  CHECK(parsed.forecast_certain);
  CHECK(parsed.e[3] == 8.0);
  CHECK(parsed.large_value == 500.0);
  CHECK(parsed.sh_levels[0] == 78.0);
  CHECK(parsed.pin_ceiling);
  CHECK(parsed.ga_population == 10);
  CHECK(parsed.change_tol == 1.0);  // untouched keys keep their defaults

  CHECK_THROWS_AS(io::parse_config(R"({"runtime": {}})", "cfg"),
                  ValidationError);
  auto msg = message_of<ValidationError>(
      [] { io::parse_config(R"({"run": {"horizont": 2}})", "cfg"); });
  CHECK(msg.find("run.horizont") != std::string::npos);
  CHECK_THROWS_AS(io::parse_config(R"({"run": {"horizon": "six"}})", "cfg"),
                  ParseError);
  CHECK_THROWS_AS(
      io::parse_config(R"({"evaluator": {"e": [1, 2, 3]}})", "cfg"),
      ParseError);
  CHECK_THROWS_AS(io::parse_config(R"({"run": {"mode": "manual"}})", "cfg"),
                  ValidationError);
  CHECK_THROWS_AS(io::parse_config("{", "cfg"), ParseError);
  CHECK_THROWS_AS(io::parse_config(R"({"run": 3})", "cfg"), ParseError);
}

TEST_CASE("config hash is stable and field-sensitive") {
  const io::AppConfig a;
  io::AppConfig b;
  CHECK(io::config_hash(a) == io::config_hash(b));
  CHECK(io::config_hash(a).size() == 16);

  b.horizon = 7;
  CHECK(io::config_hash(a) != io::config_hash(b));
  b = a;
  b.seed = 1;
  CHECK(io::config_hash(a) != io::config_hash(b));

  // the resolved document parses back to an identical configuration
  io::AppConfig c =
      io::parse_config(io::resolved_config_json(a), "resolved");
  CHECK(io::config_hash(c) == io::config_hash(a));
}

TEST_CASE("config maps onto the engine and reservoir types") {
  io::AppConfig cfg;
  hydro::ReservoirSpec spec = io::to_spec(cfg);
  const hydro::ReservoirSpec ref = hydro::default_reservoir();
  CHECK(spec.fwl_m == ref.fwl_m);
  CHECK(spec.mo_spill == ref.mo_spill);
  CHECK(spec.fws() == ref.fws());

  cfg.forecast_certain = true;
  cfg.mode = "fixed2";
  engine::RunConfig rc = io::to_run_config(cfg, spec);
  CHECK(rc.mode == engine::Mode::Fixed2);
  CHECK(rc.forecast.a == 0.0);
  CHECK(rc.forecast.b == 0.0);
  CHECK(rc.targets.s_u ==
        doctest::Approx(hydro::storage_from_level(spec.curve, 76.5))
            .epsilon(1e-12));
  CHECK(rc.targets.s_l ==
        doctest::Approx(hydro::storage_from_level(spec.curve, 76.0))
            .epsilon(1e-12));
  CHECK(rc.targets.s_h ==
        doctest::Approx(hydro::storage_from_level(spec.curve, 79.0))
            .epsilon(1e-12));
  CHECK(rc.evaluator.s_u == rc.targets.s_u);
  CHECK(rc.evaluator.s_l == rc.targets.s_l);

  cfg.s_l_level = 77.0;  // must stay below the upper band level
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("bundled events are valid and sized like the study storms") {
  auto all = events::bundled();
  REQUIRE(all.size() == 3);
  for (const auto& ev : all) {
    CHECK_NOTHROW(ev.validate());
    double peak = *std::max_element(ev.inflow.begin(), ev.inflow.end());
    CHECK(peak >= 2500.0);
    CHECK(peak <= 4500.0);
    for (double q : ev.inflow) CHECK(q > 0.0);
  }
  CHECK(all[0].name == "double_peak");
  CHECK(all[0].inflow.size() == 96);
  CHECK(all[1].inflow.size() == 96);
  CHECK(all[2].inflow.size() == 120);

  // the first storm really has two separated crests
  const auto& dp = all[0].inflow;
  std::size_t first = std::max_element(dp.begin(), dp.begin() + 45) -
                      dp.begin();
  std::size_t second = std::max_element(dp.begin() + 45, dp.end()) -
                       dp.begin();
  CHECK(dp[first] > 5.0 * dp[0]);
  CHECK(dp[second] > 5.0 * dp[0]);
  CHECK(second - first >= 20);
}

TEST_CASE("bundled event CSVs match the library definitions exactly") {
  // tools/gen_events regenerates these files; drift means someone edited
  // src/events.cpp without rerunning it (or edited the data by hand)
  for (const auto& ev : events::bundled()) {
    const std::string path =
        std::string(PDMPC_DATA_DIR) + "/" + ev.name + ".csv";
    engine::Event disk = io::load_event(path);
    CHECK(disk.name == ev.name);
    REQUIRE(disk.inflow.size() == ev.inflow.size());
    for (std::size_t i = 0; i < ev.inflow.size(); ++i)
      CHECK(disk.inflow[i] == ev.inflow[i]);
    CHECK(disk.demand.empty());
  }
}

TEST_CASE("trace files carry the hash line, header, and sidecar") {
  io::AppConfig cfg;
  cfg.mode = "fixed1";
  cfg.forecast_certain = true;
  hydro::ReservoirSpec spec = io::to_spec(cfg);
  engine::RunConfig rc = io::to_run_config(cfg, spec);

  engine::Event ev;
  ev.name = "steady";
  ev.inflow.assign(8, 300.0);

  engine::Trace trace = engine::run_event(ev, spec, rc);
  engine::Metrics metrics = engine::compute_metrics(trace, cfg.change_tol);

  const std::string text = io::render_trace(trace, spec, cfg);
  CHECK(text.rfind("# config_hash=" + io::config_hash(cfg) + " seed=0\n", 0) ==
        0);
  const std::string header =
      "step,inflow,forecast0,total,spill,turb,storage,level,penalty_total,"
      "j1,j2,j3,j4,j5,j6,j7,j8,w1,w2,w3i,w3d,w4i,w4d,w5,sh_level,lp_status,"
      "fallback";
  CHECK(text.find(header + "\n") != std::string::npos);
  CHECK(line_count(text) == 2 + trace.steps.size());
  CHECK(text.find(",optimal,") != std::string::npos);
  CHECK(text.find(",none\n") != std::string::npos);

  // rendering is a pure function of its inputs
  CHECK(io::render_trace(trace, spec, cfg) == text);

  const fs::path out = tmp_dir() / "steady.csv";
  io::write_trace(trace, metrics, out.string(), spec, cfg);
  CHECK(slurp(out) == text);

  const fs::path sidecar = tmp_dir() / "steady.summary.json";
  REQUIRE(fs::exists(sidecar));
  auto j = nlohmann::json::parse(slurp(sidecar));
  CHECK(j["event"] == "steady");
  CHECK(j["seed"] == 0);
  CHECK(j["steps"] == 8);
  CHECK(j["config_hash"] == io::config_hash(cfg));
  CHECK(j["metrics"]["peak_outflow"] == doctest::Approx(metrics.peak_outflow));
  CHECK(j["metrics"]["schedule_changes"] ==
        double(metrics.schedule_changes));
  CHECK(j["config"]["run"]["mode"] == "fixed1");

  // a second identical run writes byte-identical output
  engine::Trace again = engine::run_event(ev, spec, rc);
  CHECK(io::render_trace(again, spec, cfg) == text);
}

TEST_CASE("filesystem failures surface as IoError") {
  CHECK_THROWS_AS(io::load_event("/no/such/dir/event.csv"), IoError);
  CHECK_THROWS_AS(io::load_config("/no/such/dir/config.json"), IoError);

  const fs::path block = tmp_dir() / "blocker";
  std::ofstream(block) << "plain file\n";
  engine::Event ev;
  ev.name = "x";
  ev.inflow = {1.0, 2.0};
  CHECK_THROWS_AS(io::save_event(ev, (block / "ev.csv").string()), IoError);
}

TEST_CASE("comparison table renders one row per run") {
  io::AppConfig cfg;
  std::vector<engine::ComparisonRow> rows(3);
  rows[0].mode = engine::Mode::PDMPC;
  rows[1].mode = engine::Mode::Fixed1;
  rows[2].mode = engine::Mode::Fixed2;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].seed = i;
    rows[i].horizon = 6;
    rows[i].metrics.peak_outflow = 1000.0 + double(i);
    rows[i].metrics.peak_rwl = 77.25;
    rows[i].metrics.lowest_rwl = 76.0;
    rows[i].metrics.schedule_changes = 4 + i;
    rows[i].metrics.total_penalty = 123.5;
    rows[i].metrics.max_penalty = 60.0;
  }
  const std::string text = io::render_comparison(rows, cfg);
  CHECK(line_count(text) == 2 + rows.size());
  CHECK(text.find("mode,seed,horizon,peak_outflow,peak_rwl,lowest_rwl,"
                  "schedule_changes,total_penalty,max_penalty\n") !=
        std::string::npos);
  CHECK(text.find("pdmpc,0,6,1000,") != std::string::npos);
  CHECK(text.find("fixed2,2,6,1002,") != std::string::npos);

  const fs::path out = tmp_dir() / "cmp.csv";
  io::write_comparison(rows, out.string(), cfg);
  CHECK(slurp(out) == text);
}

TEST_CASE("sweep grid matches the requested shape and the recorded run") {
  io::AppConfig cfg;
  cfg.forecast_certain = true;
  cfg.horizon = 4;
  cfg.ga_population = 6;
  cfg.ga_generations = 4;
  cfg.seed = 11;
  hydro::ReservoirSpec spec = io::to_spec(cfg);
  engine::RunConfig rc = io::to_run_config(cfg, spec);

  engine::Event ev = events::single_peak();
  ev.name = "mini";
  ev.inflow.resize(14);

  engine::Trace trace = engine::run_event(ev, spec, rc);
  REQUIRE(trace.steps.size() == 14);

  std::vector<int> values;
  for (int v = 1; v <= 20; ++v) values.push_back(v);
  io::SweepGrid grid = io::sweep_penalties(ev, spec, rc, trace,
                                           io::gene_index("w5"), values, 3, 8);
  REQUIRE(grid.penalty.size() == 6);
  CHECK(grid.first_step == 3);
  for (const auto& row : grid.penalty) CHECK(row.size() == 20);

  // forcing the gene to the value the search actually chose must land on
  // the penalty the run recorded
  for (std::size_t i = 0; i < grid.penalty.size(); ++i) {
    const auto& rec = trace.steps[3 + i];
    int chosen = rec.chromosome.genes[6];
    REQUIRE(chosen >= 1);
    REQUIRE(chosen <= 20);
    CHECK(grid.penalty[i][chosen - 1] ==
          doctest::Approx(rec.penalty.total).epsilon(1e-12));
  }

  CHECK_THROWS_AS(io::gene_index("w9"), ValidationError);
  CHECK_THROWS_AS(io::sweep_penalties(ev, spec, rc, trace, 6, {0}, 3, 8),
                  ValidationError);  // 0 below g_w5's range
  CHECK_THROWS_AS(io::sweep_penalties(ev, spec, rc, trace, 6, values, 8, 3),
                  ValidationError);
  CHECK_THROWS_AS(io::sweep_penalties(ev, spec, rc, trace, 6, values, 3, 99),
                  ValidationError);

  engine::RunConfig fixed_rc = rc;
  fixed_rc.mode = engine::Mode::Fixed1;
  engine::Trace fixed_trace = engine::run_event(ev, spec, fixed_rc);
  CHECK_THROWS_AS(io::sweep_penalties(ev, spec, fixed_rc, fixed_trace, 6,
                                      values, 3, 8),
                  ValidationError);
}

TEST_CASE("sweep rendering saturates only the display copy") {
  io::AppConfig cfg;  // large_value = 1000
  io::SweepGrid grid;
  grid.gene = 6;
  grid.first_step = 84;
  grid.values = {1, 2};
  grid.penalty = {{0.5, 1500.0}, {2000.0, 3.25}};

  const std::string shown = io::render_sweep(grid, cfg.large_value, true, cfg);
  CHECK(shown.find("step,v1,v2\n") != std::string::npos);
  CHECK(shown.find("84,0.5,99\n") != std::string::npos);
  CHECK(shown.find("85,99,3.25\n") != std::string::npos);

  const std::string raw = io::render_sweep(grid, cfg.large_value, false, cfg);
  CHECK(raw.find("84,0.5,1500\n") != std::string::npos);
  CHECK(raw.find("85,2000,3.25\n") != std::string::npos);

  const fs::path out = tmp_dir() / "sweep.csv";
  io::write_sweep(grid, out.string(), cfg);
  CHECK(slurp(out) == shown);
  CHECK(slurp(tmp_dir() / "sweep_raw.csv") == raw);
}
