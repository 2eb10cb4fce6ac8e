#include "avlab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "avlab/errors.hpp"

namespace avlab {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key \"" + where + item.key() + "\"");
  }
}

double get_number(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key))
    throw ConfigError("missing key \"" + where + key + "\"");
  if (!obj[key].is_number())
    throw ConfigError("key \"" + where + key + "\" must be a number");
  return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& where, const char* key,
                     double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigError("key \"" + where + key + "\" must be a number");
  return obj[key].get<double>();
}

InitialCondition parse_initial(const json& obj) {
  if (!obj.contains("type") || !obj["type"].is_string())
    throw ConfigError("initial.type must be a string");
  const std::string type = obj["type"].get<std::string>();
  if (type == "uniform") {
    require_keys(obj, "initial.", {"type", "rho"});
    return Uniform{get_number(obj, "initial.", "rho")};
  }
  if (type == "square_wave_train") {
    require_keys(obj, "initial.", {"type", "rho_low", "rho_high", "n_waves"});
    SquareWaveTrain sw;
    sw.rho_low = get_number(obj, "initial.", "rho_low");
    sw.rho_high = get_number(obj, "initial.", "rho_high");
    sw.n_waves = static_cast<int>(get_number(obj, "initial.", "n_waves"));
    return sw;
  }
  if (type == "riemann") {
    require_keys(obj, "initial.", {"type", "rho_left", "rho_right", "x_split"});
    Riemann r;
    r.rho_left = get_number(obj, "initial.", "rho_left");
    r.rho_right = get_number(obj, "initial.", "rho_right");
    r.x_split = get_number(obj, "initial.", "x_split");
    return r;
  }
  if (type == "profile") {
    require_keys(obj, "initial.", {"type", "values"});
    if (!obj.contains("values") || !obj["values"].is_array())
      throw ConfigError("initial.values must be an array");
    Profile prof;
    for (const auto& v : obj["values"]) {
      if (!v.is_number()) throw ConfigError("initial.values entries must be numbers");
      prof.values.push_back(v.get<double>());
    }
    return prof;
  }
  throw ConfigError("initial.type \"" + type +
                    "\" is not one of uniform|square_wave_train|riemann|profile");
}

Boundary parse_boundary(const json& obj) {
  if (!obj.contains("type") || !obj["type"].is_string())
    throw ConfigError("grid.boundary.type must be a string");
  const std::string type = obj["type"].get<std::string>();
  if (type == "periodic") {
    require_keys(obj, "grid.boundary.", {"type"});
    return Boundary::periodic();
  }
  if (type == "dirichlet") {
    require_keys(obj, "grid.boundary.", {"type", "rho_in", "rho_out"});
    return Boundary::dirichlet(get_number(obj, "grid.boundary.", "rho_in"),
                               get_number(obj, "grid.boundary.", "rho_out"));
  }
  throw ConfigError("grid.boundary.type \"" + type + "\" is not periodic|dirichlet");
}

}  // namespace

void validate(const ScenarioConfig& config) {
  std::vector<std::string> violations;
  auto check = [&](bool ok, const std::string& message) {
    if (!ok) violations.push_back(message);
  };

  check(config.flow.v_max > 0.0, "flow.v_max must be > 0");
  check(config.flow.rho_max > 0.0, "flow.rho_max must be > 0");
  check(config.flow.alpha > 0.0 && config.flow.alpha < 1.0,
        "flow.alpha must lie strictly in (0, 1)");
  check(config.grid.length > 0.0, "grid.length must be > 0");
  check(config.grid.n_cells >= 4, "grid.n_cells must be >= 4");

  const double rho_max = config.flow.rho_max;
  auto density_ok = [&](double rho) { return rho >= 0.0 && rho <= rho_max; };

  if (config.grid.boundary.kind == Boundary::Kind::Dirichlet) {
    check(density_ok(config.grid.boundary.rho_in),
          "grid.boundary.rho_in must lie in [0, rho_max]");
    check(density_ok(config.grid.boundary.rho_out),
          "grid.boundary.rho_out must lie in [0, rho_max]");
  }

  if (const auto* u = std::get_if<Uniform>(&config.initial)) {
    check(density_ok(u->rho), "initial.rho must lie in [0, rho_max]");
  } else if (const auto* sw = std::get_if<SquareWaveTrain>(&config.initial)) {
    check(density_ok(sw->rho_low), "initial.rho_low must lie in [0, rho_max]");
    check(density_ok(sw->rho_high), "initial.rho_high must lie in [0, rho_max]");
    check(sw->n_waves >= 1, "initial.n_waves must be >= 1");
  } else if (const auto* r = std::get_if<Riemann>(&config.initial)) {
    check(density_ok(r->rho_left), "initial.rho_left must lie in [0, rho_max]");
    check(density_ok(r->rho_right), "initial.rho_right must lie in [0, rho_max]");
    check(r->x_split >= 0.0 && r->x_split <= config.grid.length,
          "initial.x_split must lie in [0, grid.length]");
  } else if (const auto* prof = std::get_if<Profile>(&config.initial)) {
    check(static_cast<int>(prof->values.size()) == config.grid.n_cells,
          "initial.values must hold exactly n_cells entries");
    for (double rho : prof->values) {
      if (!density_ok(rho)) {
        violations.push_back("initial.values entries must lie in [0, rho_max]");
        break;
      }
    }
  }

  check(config.av_y0 >= 0.0 && config.av_y0 < config.grid.length,
        "av.y0 must lie in [0, grid.length)");
  check(config.horizon > 0.0, "episode.horizon must be > 0");
  check(config.dt_ctrl > 0.0, "episode.dt_ctrl must be > 0");
  check(config.cfl > 0.0 && config.cfl <= 1.0, "episode.cfl must lie in (0, 1]");
  check(config.weights.w1 >= 0.0 && config.weights.w2 >= 0.0 &&
            config.weights.w3 >= 0.0,
        "reward weights must be non-negative");
  check(config.weights.w1 + config.weights.w2 + config.weights.w3 > 0.0,
        "reward weights must not all vanish");
  check(config.n_obs >= 1 && config.n_obs <= config.grid.n_cells,
        "observation.n_obs must lie in [1, grid.n_cells]");

  if (!violations.empty()) {
    std::ostringstream os;
    os << "invalid scenario config:";
    for (const auto& v : violations) os << "\n  - " << v;
    throw ConfigError(os.str());
  }
}

std::tuple<TrafficState, AvState, Grid, FlowParams> build(const ScenarioConfig& config) {
  validate(config);
  const int n = config.grid.n_cells;

  TrafficState state;
  state.time = 0.0;
  state.rho.resize(n);

  if (const auto* u = std::get_if<Uniform>(&config.initial)) {
    std::fill(state.rho.begin(), state.rho.end(), u->rho);
  } else if (const auto* sw = std::get_if<SquareWaveTrain>(&config.initial)) {
    // Plateau of cell j decided in integer arithmetic so equal configs give
    // byte-identical states.
    const long plateaus = 2L * sw->n_waves;
    for (int j = 0; j < n; ++j) {
      const long p = (static_cast<long>(j) * plateaus) / n;
      state.rho[j] = (p % 2 == 0) ? sw->rho_low : sw->rho_high;
    }
  } else if (const auto* r = std::get_if<Riemann>(&config.initial)) {
    const double dx = config.grid.dx();
    for (int j = 0; j < n; ++j) {
      const double center = (j + 0.5) * dx;
      state.rho[j] = center < r->x_split ? r->rho_left : r->rho_right;
    }
  } else {
    state.rho = std::get<Profile>(config.initial).values;
  }

  AvState av;
  av.y = config.av_y0;
  av.v_cmd = config.flow.v_max;
  av.y_dot = av_realized_speed(av, state, config.grid, config.flow);

  return {std::move(state), av, config.grid, config.flow};
}

double analytic_mass(const ScenarioConfig& config) {
  const double dx = config.grid.dx();
  const int n = config.grid.n_cells;
  if (const auto* u = std::get_if<Uniform>(&config.initial))
    return u->rho * config.grid.length;
  if (const auto* sw = std::get_if<SquareWaveTrain>(&config.initial)) {
    const long plateaus = 2L * sw->n_waves;
    long low_cells = 0;
    for (int j = 0; j < n; ++j)
      if (((static_cast<long>(j) * plateaus) / n) % 2 == 0) ++low_cells;
    return dx * (low_cells * sw->rho_low + (n - low_cells) * sw->rho_high);
  }
  if (const auto* r = std::get_if<Riemann>(&config.initial)) {
    long left_cells = 0;
    for (int j = 0; j < n; ++j)
      if ((j + 0.5) * dx < r->x_split) ++left_cells;
    return dx * (left_cells * r->rho_left + (n - left_cells) * r->rho_right);
  }
  const auto& values = std::get<Profile>(config.initial).values;
  double mass = 0.0;
  for (double rho : values) mass += rho * dx;
  return mass;
}

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  require_keys(root, "",
               {"grid", "flow", "initial", "av", "episode", "reward",
                "observation", "seed"});

  ScenarioConfig config;

  if (root.contains("grid")) {
    const json& g = root["grid"];
    require_keys(g, "grid.", {"length", "n_cells", "boundary"});
    config.grid.length = get_number_or(g, "grid.", "length", config.grid.length);
    config.grid.n_cells =
        static_cast<int>(get_number_or(g, "grid.", "n_cells", config.grid.n_cells));
    if (g.contains("boundary")) config.grid.boundary = parse_boundary(g["boundary"]);
  }
  if (root.contains("flow")) {
    const json& f = root["flow"];
    require_keys(f, "flow.", {"v_max", "rho_max", "alpha"});
    config.flow.v_max = get_number_or(f, "flow.", "v_max", config.flow.v_max);
    config.flow.rho_max = get_number_or(f, "flow.", "rho_max", config.flow.rho_max);
    config.flow.alpha = get_number_or(f, "flow.", "alpha", config.flow.alpha);
  }
  if (root.contains("initial")) config.initial = parse_initial(root["initial"]);
  if (root.contains("av")) {
    const json& a = root["av"];
    require_keys(a, "av.", {"y0"});
    config.av_y0 = get_number_or(a, "av.", "y0", config.av_y0);
  }
  if (root.contains("episode")) {
    const json& e = root["episode"];
    require_keys(e, "episode.", {"horizon", "dt_ctrl", "cfl"});
    config.horizon = get_number_or(e, "episode.", "horizon", config.horizon);
    config.dt_ctrl = get_number_or(e, "episode.", "dt_ctrl", config.dt_ctrl);
    config.cfl = get_number_or(e, "episode.", "cfl", config.cfl);
  }
  if (root.contains("reward")) {
    const json& r = root["reward"];
    require_keys(r, "reward.", {"w1", "w2", "w3"});
    config.weights.w1 = get_number_or(r, "reward.", "w1", config.weights.w1);
    config.weights.w2 = get_number_or(r, "reward.", "w2", config.weights.w2);
    config.weights.w3 = get_number_or(r, "reward.", "w3", config.weights.w3);
  }
  if (root.contains("observation")) {
    const json& o = root["observation"];
    require_keys(o, "observation.", {"n_obs"});
    config.n_obs = static_cast<int>(get_number_or(o, "observation.", "n_obs", config.n_obs));
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned())
      throw ConfigError("seed must be a non-negative integer");
    config.seed = root["seed"].get<std::uint64_t>();
  }

  validate(config);
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace avlab
