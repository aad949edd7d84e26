#include "pdmpc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "pdmpc/errors.hpp"
#include "pdmpc/evaluator.hpp"
#include "pdmpc/linprog.hpp"
#include "pdmpc/mpc.hpp"
#include "pdmpc/search.hpp"

namespace pdmpc::io {
namespace {

using nlohmann::json;

// Shortest exact decimal: 17 significant digits round-trip any double.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw IoError("read failed on '" + path + "'");
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed on '" + path + "'");
}

std::string trimmed(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trimmed(line.substr(start)));
      return out;
    }
    out.push_back(trimmed(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_double(const std::string& field, const std::string& origin,
                    std::size_t line_no) {
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || errno != 0)
    throw ParseError(origin + ":" + std::to_string(line_no) +
                     ": not a number: '" + field + "'");
  return v;
}

long parse_long(const std::string& field, const std::string& origin,
                std::size_t line_no) {
  long v = 0;
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || p != field.data() + field.size())
    throw ParseError(origin + ":" + std::to_string(line_no) +
                     ": not an integer: '" + field + "'");
  return v;
}

// ---- strict JSON config traversal -------------------------------------

[[noreturn]] void bad_type(const std::string& where, const char* want) {
  throw ParseError("config key '" + where + "': expected " + want);
}

double as_num(const json& v, const std::string& where) {
  if (!v.is_number()) bad_type(where, "a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    bad_type(where, "a non-negative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

std::uint64_t as_u64(const json& v, const std::string& where) {
  if (!(v.is_number_unsigned() ||
        (v.is_number_integer() && v.get<long long>() >= 0)))
    bad_type(where, "a non-negative integer");
  return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) bad_type(where, "true or false");
  return v.get<bool>();
}

std::string as_str(const json& v, const std::string& where) {
  if (!v.is_string()) bad_type(where, "a string");
  return v.get<std::string>();
}

template <std::size_t N>
std::array<double, N> as_array(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != N)
    bad_type(where, ("an array of " + std::to_string(N) + " numbers").c_str());
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i)
    out[i] = as_num(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

using KeyHandler = std::function<void(AppConfig&, const json&, const std::string&)>;

void apply_section(AppConfig& cfg, const json& section,
                   const std::string& section_name,
                   const std::map<std::string, KeyHandler>& handlers,
                   const std::string& origin) {
  if (!section.is_object())
    throw ParseError(origin + ": section '" + section_name +
                     "' must be an object");
  for (const auto& [key, value] : section.items()) {
    auto it = handlers.find(key);
    if (it == handlers.end())
      throw ValidationError(origin + ": unknown key '" + section_name + "." +
                            key + "'");
    it->second(cfg, value, section_name + "." + key);
  }
}

const char* fallback_label(const engine::StepRecord& rec) {
  // Fixed order so the column is stable across runs.
  static const char* names[8] = {"none",
                                 "soften",
                                 "clamp",
                                 "soften+clamp",
                                 "hold",
                                 "soften+hold",
                                 "clamp+hold",
                                 "soften+clamp+hold"};
  int code = (rec.fallback_soften ? 1 : 0) | (rec.fallback_clamp ? 2 : 0) |
             (rec.fallback_hold ? 4 : 0);
  return names[code];
}

}  // namespace

void AppConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ValidationError(msg);
  };
  require(mode == "pdmpc" || mode == "fixed1" || mode == "fixed2",
          "run.mode must be one of pdmpc, fixed1, fixed2");
  require(horizon >= 1, "run.horizon must be at least 1");
  require(change_tol >= 0.0, "run.change_tol must be non-negative");
  require(initial_turb >= 0.0 && initial_spill >= 0.0,
          "initial flows must be non-negative");
  require(f >= 0.0, "search.f must be non-negative (0 means horizon)");
  require(large_value > 0.0, "evaluator.large_value must be positive");
  for (double ei : e)
    require(ei >= 0.0 && std::isfinite(ei),
            "evaluator.e entries must be finite and non-negative");
  require(w_su >= 0.0 && w_sl >= 0.0 && w_sh >= 0.0,
          "evaluator band weights must be non-negative");
  require(s_l_level < s_u_level,
          "evaluator.s_l_level must lie below evaluator.s_u_level");
  // Delegate the remaining shape checks to the owning modules.
  forecast::ForecastConfig fc;
  fc.a = forecast_a;
  fc.b = forecast_b;
  fc.c = forecast_c;
  fc.window = forecast_window;
  fc.validate();
  search::GAConfig ga;
  ga.population = ga_population;
  ga.generations = ga_generations;
  ga.tournament_size = ga_tournament;
  ga.crossover_prob = ga_crossover;
  ga.mutation_prob_per_gene = ga_mutation;
  ga.elitism = ga_elitism;
  ga.validate();
}

AppConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!root.is_object())
    throw ParseError(origin + ": config document must be a JSON object");

  AppConfig cfg;

  const std::map<std::string, KeyHandler> reservoir{
      {"fwl_m", [](AppConfig& c, const json& v, const std::string& w) { c.fwl_m = as_num(v, w); }},
      {"nhwl_m", [](AppConfig& c, const json& v, const std::string& w) { c.nhwl_m = as_num(v, w); }},
      {"lwl_m", [](AppConfig& c, const json& v, const std::string& w) { c.lwl_m = as_num(v, w); }},
      {"spillway_crest_m", [](AppConfig& c, const json& v, const std::string& w) { c.spillway_crest_m = as_num(v, w); }},
      {"mo_turb", [](AppConfig& c, const json& v, const std::string& w) { c.mo_turb = as_num(v, w); }},
      {"mo_spill", [](AppConfig& c, const json& v, const std::string& w) { c.mo_spill = as_num(v, w); }},
      {"dt_s", [](AppConfig& c, const json& v, const std::string& w) { c.dt_s = as_num(v, w); }},
      {"curve_path", [](AppConfig& c, const json& v, const std::string& w) { c.curve_path = as_str(v, w); }},
  };
  const std::map<std::string, KeyHandler> run{
      {"horizon", [](AppConfig& c, const json& v, const std::string& w) { c.horizon = as_count(v, w); }},
      {"mode", [](AppConfig& c, const json& v, const std::string& w) { c.mode = as_str(v, w); }},
      {"seed", [](AppConfig& c, const json& v, const std::string& w) { c.seed = as_u64(v, w); }},
      {"initial_level_m", [](AppConfig& c, const json& v, const std::string& w) { c.initial_level_m = as_num(v, w); }},
      {"initial_turb", [](AppConfig& c, const json& v, const std::string& w) { c.initial_turb = as_num(v, w); }},
      {"initial_spill", [](AppConfig& c, const json& v, const std::string& w) { c.initial_spill = as_num(v, w); }},
      {"change_tol", [](AppConfig& c, const json& v, const std::string& w) { c.change_tol = as_num(v, w); }},
  };
  const std::map<std::string, KeyHandler> fsec{
      {"certain", [](AppConfig& c, const json& v, const std::string& w) { c.forecast_certain = as_bool(v, w); }},
      {"a", [](AppConfig& c, const json& v, const std::string& w) { c.forecast_a = as_num(v, w); }},
      {"b", [](AppConfig& c, const json& v, const std::string& w) { c.forecast_b = as_num(v, w); }},
      {"c", [](AppConfig& c, const json& v, const std::string& w) { c.forecast_c = as_num(v, w); }},
      {"window", [](AppConfig& c, const json& v, const std::string& w) { c.forecast_window = as_count(v, w); }},
  };
  const std::map<std::string, KeyHandler> ga{
      {"population", [](AppConfig& c, const json& v, const std::string& w) { c.ga_population = as_count(v, w); }},
      {"generations", [](AppConfig& c, const json& v, const std::string& w) { c.ga_generations = as_count(v, w); }},
      {"tournament_size", [](AppConfig& c, const json& v, const std::string& w) { c.ga_tournament = as_count(v, w); }},
      {"crossover_prob", [](AppConfig& c, const json& v, const std::string& w) { c.ga_crossover = as_num(v, w); }},
      {"mutation_prob_per_gene", [](AppConfig& c, const json& v, const std::string& w) { c.ga_mutation = as_num(v, w); }},
      {"elitism", [](AppConfig& c, const json& v, const std::string& w) { c.ga_elitism = as_count(v, w); }},
  };
  const std::map<std::string, KeyHandler> evaluator{
      {"e", [](AppConfig& c, const json& v, const std::string& w) { c.e = as_array<8>(v, w); }},
      {"large_value", [](AppConfig& c, const json& v, const std::string& w) { c.large_value = as_num(v, w); }},
      {"s_u_level", [](AppConfig& c, const json& v, const std::string& w) { c.s_u_level = as_num(v, w); }},
      {"s_l_level", [](AppConfig& c, const json& v, const std::string& w) { c.s_l_level = as_num(v, w); }},
      {"w_su", [](AppConfig& c, const json& v, const std::string& w) { c.w_su = as_num(v, w); }},
      {"w_sl", [](AppConfig& c, const json& v, const std::string& w) { c.w_sl = as_num(v, w); }},
      {"w_sh", [](AppConfig& c, const json& v, const std::string& w) { c.w_sh = as_num(v, w); }},
  };
  const std::map<std::string, KeyHandler> searchsec{
      {"f", [](AppConfig& c, const json& v, const std::string& w) { c.f = as_num(v, w); }},
      {"sh_levels", [](AppConfig& c, const json& v, const std::string& w) { c.sh_levels = as_array<3>(v, w); }},
      {"pin_ceiling", [](AppConfig& c, const json& v, const std::string& w) { c.pin_ceiling = as_bool(v, w); }},
  };
  const std::map<std::string, KeyHandler> output{
      {"out_dir", [](AppConfig& c, const json& v, const std::string& w) { c.out_dir = as_str(v, w); }},
  };

  const std::map<std::string, const std::map<std::string, KeyHandler>*>
      sections{{"reservoir", &reservoir}, {"run", &run},
               {"forecast", &fsec},       {"ga", &ga},
               {"evaluator", &evaluator}, {"search", &searchsec},
               {"output", &output}};

  for (const auto& [name, body] : root.items()) {
    auto it = sections.find(name);
    if (it == sections.end())
      throw ValidationError(origin + ": unknown section '" + name + "'");
    apply_section(cfg, body, name, *it->second, origin);
  }
  cfg.validate();
  return cfg;
}

AppConfig load_config(const std::string& path) {
  return parse_config(read_file(path), path);
}

std::string resolved_config_json(const AppConfig& cfg) {
  json j;
  j["reservoir"] = {{"fwl_m", cfg.fwl_m},
                    {"nhwl_m", cfg.nhwl_m},
                    {"lwl_m", cfg.lwl_m},
                    {"spillway_crest_m", cfg.spillway_crest_m},
                    {"mo_turb", cfg.mo_turb},
                    {"mo_spill", cfg.mo_spill},
                    {"dt_s", cfg.dt_s},
                    {"curve_path", cfg.curve_path}};
  j["run"] = {{"horizon", cfg.horizon},
              {"mode", cfg.mode},
              {"seed", cfg.seed},
              {"initial_level_m", cfg.initial_level_m},
              {"initial_turb", cfg.initial_turb},
              {"initial_spill", cfg.initial_spill},
              {"change_tol", cfg.change_tol}};
  j["forecast"] = {{"certain", cfg.forecast_certain},
                   {"a", cfg.forecast_a},
                   {"b", cfg.forecast_b},
                   {"c", cfg.forecast_c},
                   {"window", cfg.forecast_window}};
  j["ga"] = {{"population", cfg.ga_population},
             {"generations", cfg.ga_generations},
             {"tournament_size", cfg.ga_tournament},
             {"crossover_prob", cfg.ga_crossover},
             {"mutation_prob_per_gene", cfg.ga_mutation},
             {"elitism", cfg.ga_elitism}};
  j["evaluator"] = {{"e", cfg.e},
                    {"large_value", cfg.large_value},
                    {"s_u_level", cfg.s_u_level},
                    {"s_l_level", cfg.s_l_level},
                    {"w_su", cfg.w_su},
                    {"w_sl", cfg.w_sl},
                    {"w_sh", cfg.w_sh}};
  j["search"] = {{"f", cfg.f},
                 {"sh_levels", cfg.sh_levels},
                 {"pin_ceiling", cfg.pin_ceiling}};
  j["output"] = {{"out_dir", cfg.out_dir}};
  return j.dump();  // nlohmann objects iterate in sorted key order
}

std::string config_hash(const AppConfig& cfg) {
  const std::string text = resolved_config_json(cfg);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64-bit
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

hydro::ReservoirSpec to_spec(const AppConfig& cfg) {
  hydro::ReservoirSpec spec = hydro::default_reservoir();
  spec.fwl_m = cfg.fwl_m;
  spec.nhwl_m = cfg.nhwl_m;
  spec.lwl_m = cfg.lwl_m;
  spec.spillway_crest_m = cfg.spillway_crest_m;
  spec.mo_turb = cfg.mo_turb;
  spec.mo_spill = cfg.mo_spill;
  spec.dt_s = cfg.dt_s;
  if (!cfg.curve_path.empty()) spec.curve = hydro::load_curve(cfg.curve_path);
  spec.validate();
  return spec;
}

engine::RunConfig to_run_config(const AppConfig& cfg,
                                const hydro::ReservoirSpec& spec) {
  engine::RunConfig rc;
  rc.horizon = cfg.horizon;
  if (cfg.mode == "pdmpc")
    rc.mode = engine::Mode::PDMPC;
  else if (cfg.mode == "fixed1")
    rc.mode = engine::Mode::Fixed1;
  else if (cfg.mode == "fixed2")
    rc.mode = engine::Mode::Fixed2;
  else
    throw ValidationError("run.mode must be one of pdmpc, fixed1, fixed2");

  if (cfg.forecast_certain) {
    rc.forecast = forecast::ForecastConfig::certainty();
  } else {
    rc.forecast.a = cfg.forecast_a;
    rc.forecast.b = cfg.forecast_b;
    rc.forecast.c = cfg.forecast_c;
    rc.forecast.window = cfg.forecast_window;
  }

  rc.ga.population = cfg.ga_population;
  rc.ga.generations = cfg.ga_generations;
  rc.ga.tournament_size = cfg.ga_tournament;
  rc.ga.crossover_prob = cfg.ga_crossover;
  rc.ga.mutation_prob_per_gene = cfg.ga_mutation;
  rc.ga.elitism = cfg.ga_elitism;
  rc.ga.seed = cfg.seed;

  rc.targets.s_u = hydro::storage_from_level(spec.curve, cfg.s_u_level);
  rc.targets.s_l = hydro::storage_from_level(spec.curve, cfg.s_l_level);
  rc.targets.s_h = hydro::storage_from_level(spec.curve, cfg.fwl_m - 1.0);

  rc.evaluator.e = cfg.e;
  rc.evaluator.large_value = cfg.large_value;
  rc.evaluator.s_u = rc.targets.s_u;
  rc.evaluator.s_l = rc.targets.s_l;
  rc.evaluator.w_su = cfg.w_su;
  rc.evaluator.w_sl = cfg.w_sl;
  rc.evaluator.w_sh = cfg.w_sh;

  rc.sh_levels = cfg.sh_levels;
  rc.f = cfg.f;
  rc.initial_level_m = cfg.initial_level_m;
  rc.initial_turb = cfg.initial_turb;
  rc.initial_spill = cfg.initial_spill;
  rc.pin_ceiling = cfg.pin_ceiling;
  rc.seed = cfg.seed;
  return rc;
}

engine::Event parse_event(const std::string& text, const std::string& origin) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string::npos) {
        lines.push_back(text.substr(start));
        break;
      }
      std::string line = text.substr(start, nl - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      start = nl + 1;
    }
  }
  if (lines.empty() || trimmed(lines[0]).empty())
    throw ParseError(origin + ":1: missing header line");

  auto header = split_fields(lines[0]);
  bool has_demand = false;
  if (header.size() == 2 && header[0] == "step" && header[1] == "inflow_m3s") {
    has_demand = false;
  } else if (header.size() == 3 && header[0] == "step" &&
             header[1] == "inflow_m3s" && header[2] == "demand_m3s") {
    has_demand = true;
  } else {
    throw ParseError(origin +
                     ":1: header must be step,inflow_m3s[,demand_m3s]");
  }

  engine::Event event;
  event.name = std::filesystem::path(origin).stem().string();
  long expected = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trimmed(lines[i]).empty()) continue;  // tolerate trailing blank lines
    auto fields = split_fields(lines[i]);
    if (fields.size() != header.size())
      throw ParseError(origin + ":" + std::to_string(i + 1) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    long step = parse_long(fields[0], origin, i + 1);
    if (step != expected)
      throw ValidationError(origin + ":" + std::to_string(i + 1) +
                            ": steps must be contiguous from 0 (expected " +
                            std::to_string(expected) + ", got " +
                            std::to_string(step) + ")");
    double inflow = parse_double(fields[1], origin, i + 1);
    if (inflow < 0.0)
      throw ValidationError(origin + ":" + std::to_string(i + 1) +
                            ": negative inflow at step " +
                            std::to_string(step));
    event.inflow.push_back(inflow);
    if (has_demand) {
      double demand = parse_double(fields[2], origin, i + 1);
      if (demand < 0.0)
        throw ValidationError(origin + ":" + std::to_string(i + 1) +
                              ": negative demand at step " +
                              std::to_string(step));
      event.demand.push_back(demand);
    }
    ++expected;
  }
  event.validate();
  return event;
}

engine::Event load_event(const std::string& path) {
  return parse_event(read_file(path), path);
}

void save_event(const engine::Event& event, const std::string& path) {
  event.validate();
  std::string text =
      event.demand.empty() ? "step,inflow_m3s\n" : "step,inflow_m3s,demand_m3s\n";
  for (std::size_t i = 0; i < event.inflow.size(); ++i) {
    text += std::to_string(i);
    text += ',';
    text += num(event.inflow[i]);
    if (!event.demand.empty()) {
      text += ',';
      text += num(event.demand[i]);
    }
    text += '\n';
  }
  write_file(path, text);
}

std::string render_trace(const engine::Trace& trace,
                         const hydro::ReservoirSpec& spec,
                         const AppConfig& cfg) {
  std::string out = "# config_hash=" + config_hash(cfg) +
                    " seed=" + std::to_string(cfg.seed) + "\n";
  out +=
      "step,inflow,forecast0,total,spill,turb,storage,level,penalty_total,"
      "j1,j2,j3,j4,j5,j6,j7,j8,w1,w2,w3i,w3d,w4i,w4d,w5,sh_level,lp_status,"
      "fallback\n";
  for (const auto& rec : trace.steps) {
    out += std::to_string(rec.step);
    out += ',';
    out += num(rec.inflow);
    out += ',';
    out += num(rec.forecast.empty() ? 0.0 : rec.forecast.front());
    for (double v : {rec.total, rec.spill, rec.turb, rec.storage, rec.level,
                     rec.penalty.total, rec.penalty.j1, rec.penalty.j2,
                     rec.penalty.j3, rec.penalty.j4, rec.penalty.j5,
                     rec.penalty.j6, rec.penalty.j7, rec.penalty.j8,
                     rec.weights.w1, rec.weights.w2, rec.weights.w3_i,
                     rec.weights.w3_d, rec.weights.w4_i, rec.weights.w4_d,
                     rec.weights.w5_1}) {
      out += ',';
      out += num(v);
    }
    out += ',';
    // A zero ceiling (possible on a failed, held step) has no level.
    if (rec.weights.s_h > spec.curve.min_storage())
      out += num(hydro::level_from_storage(
          spec.curve,
          std::min(rec.weights.s_h, spec.curve.max_storage())));
    else
      out += '0';
    out += ',';
    out += linprog::status_name(rec.lp_status);
    out += ',';
    out += fallback_label(rec);
    out += '\n';
  }
  return out;
}

std::string render_summary(const engine::Trace& trace,
                           const engine::Metrics& metrics,
                           const AppConfig& cfg) {
  json j;
  j["event"] = trace.event_name;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["steps"] = trace.steps.size();
  j["initial_storage_m3"] = trace.initial_storage;
  j["initial_level_m"] = trace.initial_level;
  std::size_t fallbacks = 0;
  for (const auto& rec : trace.steps)
    if (rec.any_fallback()) ++fallbacks;
  j["fallback_steps"] = fallbacks;
  j["metrics"] = {{"peak_outflow", metrics.peak_outflow},
                  {"peak_rwl", metrics.peak_rwl},
                  {"lowest_rwl", metrics.lowest_rwl},
                  {"schedule_changes", metrics.schedule_changes},
                  {"total_penalty", metrics.total_penalty},
                  {"max_penalty", metrics.max_penalty}};
  j["config"] = json::parse(resolved_config_json(cfg));
  return j.dump(2) + "\n";
}

namespace {
std::string summary_path_for(const std::string& path) {
  std::filesystem::path p(path);
  p.replace_extension();
  return p.string() + ".summary.json";
}
}  // namespace

void write_trace(const engine::Trace& trace, const engine::Metrics& metrics,
                 const std::string& path, const hydro::ReservoirSpec& spec,
                 const AppConfig& cfg) {
  write_file(path, render_trace(trace, spec, cfg));
  write_file(summary_path_for(path), render_summary(trace, metrics, cfg));
}

std::string render_comparison(const std::vector<engine::ComparisonRow>& rows,
                              const AppConfig& cfg) {
  std::string out = "# config_hash=" + config_hash(cfg) + "\n";
  out +=
      "mode,seed,horizon,peak_outflow,peak_rwl,lowest_rwl,schedule_changes,"
      "total_penalty,max_penalty\n";
  for (const auto& row : rows) {
    out += engine::mode_name(row.mode);
    out += ',';
    out += std::to_string(row.seed);
    out += ',';
    out += std::to_string(row.horizon);
    for (double v : {row.metrics.peak_outflow, row.metrics.peak_rwl,
                     row.metrics.lowest_rwl}) {
      out += ',';
      out += num(v);
    }
    out += ',';
    out += std::to_string(row.metrics.schedule_changes);
    out += ',';
    out += num(row.metrics.total_penalty);
    out += ',';
    out += num(row.metrics.max_penalty);
    out += '\n';
  }
  return out;
}

void write_comparison(const std::vector<engine::ComparisonRow>& rows,
                      const std::string& path, const AppConfig& cfg) {
  write_file(path, render_comparison(rows, cfg));
}

std::size_t gene_index(const std::string& name) {
  static const std::map<std::string, std::size_t> names{
      {"w1", 0}, {"w2", 1},  {"w3i", 2}, {"w3d", 3},
      {"w4i", 4}, {"w4d", 5}, {"w5", 6},  {"sh", 7}};
  auto it = names.find(name);
  if (it == names.end())
    throw ValidationError("unknown gene '" + name +
                          "' (expected w1, w2, w3i, w3d, w4i, w4d, w5, sh)");
  return it->second;
}

SweepGrid sweep_penalties(const engine::Event& event,
                          const hydro::ReservoirSpec& spec,
                          const engine::RunConfig& cfg,
                          const engine::Trace& trace, std::size_t gene,
                          const std::vector<int>& values, std::size_t k0,
                          std::size_t k1) {
  if (gene >= 8) throw ValidationError("gene index out of range");
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  if (k0 > k1 || k1 >= trace.steps.size())
    throw ValidationError("sweep step range must lie inside the trace");
  for (int v : values)
    if (v < search::Chromosome::kMin[gene] ||
        v > search::Chromosome::kMax[gene])
      throw ValidationError("sweep value " + std::to_string(v) +
                            " outside the gene's search range");

  // Resolve the run-level context the engine used.
  mpc::TargetLevels targets = cfg.targets;
  if (targets.s_u <= 0.0) targets = mpc::default_targets(spec);
  eval::EvaluatorConfig ev = cfg.evaluator;
  if (ev.s_u <= 0.0) {
    ev.s_u = targets.s_u;
    ev.s_l = targets.s_l;
  }
  ev.validate();
  const search::SHTable table =
      search::SHTable::from_levels(spec.curve, cfg.sh_levels);
  const double f = cfg.f > 0.0 ? cfg.f : static_cast<double>(cfg.horizon);

  SweepGrid grid;
  grid.gene = gene;
  grid.first_step = k0;
  grid.values = values;
  grid.penalty.reserve(k1 - k0 + 1);

  for (std::size_t k = k0; k <= k1; ++k) {
    const auto& rec = trace.steps[k];
    try {
      rec.chromosome.validate();
    } catch (const Error&) {
      throw ValidationError(
          "sweep needs searched weights at every step; step " +
          std::to_string(k) + " has none (not a PD-MPC step?)");
    }

    hydro::ReservoirState state;
    state.step_index = static_cast<long>(k);
    state.storage_m3 =
        std::clamp(k == 0 ? trace.initial_storage : trace.steps[k - 1].storage,
                   spec.curve.min_storage(), spec.fws());
    state.committed_total = rec.total;
    state.committed_spill = rec.spill;
    state.last_spill = k == 0 ? 0.0 : trace.steps[k - 1].spill;

    const mpc::Schedule prev =
        k == 0 ? mpc::Schedule::constant(-1, cfg.horizon,
                                         cfg.initial_turb + cfg.initial_spill)
               : trace.steps[k - 1].schedule;

    const std::size_t Hk = rec.forecast.size();
    std::vector<double> demand(Hk, 0.0);
    if (!event.demand.empty())
      for (std::size_t i = 0; i < Hk; ++i) demand[i] = event.demand[k + i];

    double hist_peak = std::numeric_limits<double>::infinity();
    if (k > 0)
      hist_peak = *std::max_element(event.inflow.begin(),
                                    event.inflow.begin() + k);

    std::vector<double> row;
    row.reserve(values.size());
    for (int v : values) {
      search::Chromosome ch = rec.chromosome;
      ch.genes[gene] = v;
      if (cfg.pin_ceiling && gene != 7) ch.genes[7] = 1;
      const mpc::WeightVector z =
          search::decode(ch, spec, table, Hk, f);

      double penalty = std::numeric_limits<double>::infinity();
      for (bool soften : {false, true}) {
        mpc::BuildOptions opts;
        opts.soften_storage_cap = soften;
        try {
          auto built = mpc::build(spec, state, rec.forecast, prev, z, targets,
                                  demand, opts);
          auto sol = linprog::solve(built.lp);
          if (sol.status != linprog::SolveStatus::Optimal) continue;
          auto sched =
              mpc::extract_schedule(sol, built.map, static_cast<long>(k));
          penalty = eval::evaluate(sched, prev, state, rec.forecast, hist_peak,
                                   spec, z.s_h, ev)
                        .total;
          break;
        } catch (const Error&) {
          continue;
        }
      }
      row.push_back(penalty);
    }
    grid.penalty.push_back(std::move(row));
  }
  return grid;
}

std::string render_sweep(const SweepGrid& grid, double large_value,
                         bool saturate, const AppConfig& cfg) {
  std::string out = "# config_hash=" + config_hash(cfg) + "\n";
  out += "step";
  for (int v : grid.values) {
    out += ",v";
    out += std::to_string(v);
  }
  out += '\n';
  for (std::size_t i = 0; i < grid.penalty.size(); ++i) {
    out += std::to_string(grid.first_step + i);
    for (double p : grid.penalty[i]) {
      out += ',';
      out += (saturate && p >= large_value) ? "99" : num(p);
    }
    out += '\n';
  }
  return out;
}

void write_sweep(const SweepGrid& grid, const std::string& path,
                 const AppConfig& cfg) {
  write_file(path, render_sweep(grid, cfg.large_value, true, cfg));
  std::filesystem::path raw(path);
  const std::string ext = raw.extension().string();
  raw.replace_extension();
  write_file(raw.string() + "_raw" + ext,
             render_sweep(grid, cfg.large_value, false, cfg));
}

}  // namespace pdmpc::io
