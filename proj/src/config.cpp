#include "lexis/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lexis/io.hpp"

namespace lexis {

using nlohmann::json;

Demography build_model(const ModelParams& p) {
  if (!(p.horizon > 0.0)) throw std::invalid_argument("model: horizon must be positive");
  if (!(p.max_age > 0.0)) throw std::invalid_argument("model: max_age must be positive");
  if (!(p.window_lo <= p.window_hi))
    throw std::invalid_argument("model: birth window is empty");
  if (p.birth_amplitude < 0.0 || p.death_scale < 0.0)
    throw std::invalid_argument("model: rates must be nonnegative");

  Domain domain{p.horizon, p.max_age};

  const double amp = p.birth_amplitude;
  const double wlo = p.window_lo, whi = p.window_hi;
  auto birth = [amp, wlo, whi](double, double a) {
    return (a >= wlo && a <= whi) ? amp : 0.0;
  };
  const double ds = p.death_scale, dar = p.death_age_rate, dtr = p.death_time_rate;
  auto death = [ds, dar, dtr](double t, double a) {
    return ds * std::exp(dar * a) * std::exp(dtr * t);
  };
  const double death_sup =
      ds * std::exp(std::max(dar * p.max_age, 0.0)) *
      std::exp(std::max(dtr * p.horizon, 0.0));

  RateField rates(birth, amp, death, death_sup, p.max_age);
  if (amp > 0.0) rates.declare_birth_age_support(wlo, whi);

  InitialDensity initial =
      truncated_gaussian_density(p.initial_mean, p.initial_variance, 0.0, p.max_age);
  return Demography{domain, std::move(rates), std::move(initial)};
}

ExperimentConfig section5_preset() { return ExperimentConfig{}; }

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (const auto& item : obj.items())
    if (allowed.find(item.key()) == allowed.end())
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " +
                                  where);
}

double get_num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw std::invalid_argument(std::string("config: '") + key + "' must be a number");
  return obj[key].get<double>();
}

template <typename T>
T get_int(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw std::invalid_argument(std::string("config: '") + key +
                                "' must be an integer");
  return obj[key].get<T>();
}

std::string get_str(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string())
    throw std::invalid_argument(std::string("config: '") + key + "' must be a string");
  return obj[key].get<std::string>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean())
    throw std::invalid_argument(std::string("config: '") + key + "' must be a boolean");
  return obj[key].get<bool>();
}

std::vector<long long> get_int_list(const json& obj, const char* key,
                                    std::vector<long long> fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_array())
    throw std::invalid_argument(std::string("config: '") + key + "' must be an array");
  std::vector<long long> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number_integer())
      throw std::invalid_argument(std::string("config: '") + key +
                                  "' must hold integers");
    out.push_back(v.get<long long>());
  }
  return out;
}

std::vector<double> get_num_list(const json& obj, const char* key,
                                 std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_array())
    throw std::invalid_argument(std::string("config: '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number())
      throw std::invalid_argument(std::string("config: '") + key +
                                  "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::pair<double, double>> get_point_list(
    const json& obj, const char* key,
    std::vector<std::pair<double, double>> fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_array())
    throw std::invalid_argument(std::string("config: '") + key +
                                "' must be an array of [t, a] pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto& v : obj[key]) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw std::invalid_argument(std::string("config: '") + key +
                                  "' entries must be [t, a] pairs");
    out.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  return out;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path,
                             const ExperimentConfig& base) {
  json doc;
  {
    const std::string text = read_text_file(path);
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument("config: " + path.string() +
                                  " is not valid JSON: " + e.what());
    }
  }
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
  require_keys(doc,
               {"model", "N_list", "replications", "density_points", "death_points",
                "ci_N", "varpi", "grid_points", "grid_mode", "c_star",
                "order_restrict_bivariate", "kernel_time", "kernel_age", "dt",
                "snapshot_lattice", "concentration", "smoothness", "seed",
                "threads", "output_dir"},
               "the top level");

  ExperimentConfig cfg = base;
  if (doc.contains("model")) {
    const json& m = doc["model"];
    if (!m.is_object()) throw std::invalid_argument("config: 'model' must be an object");
    require_keys(m,
                 {"window_lo", "window_hi", "birth_amplitude", "death_scale",
                  "death_age_rate", "death_time_rate", "initial_mean",
                  "initial_variance", "horizon", "max_age"},
                 "'model'");
    cfg.model.window_lo = get_num(m, "window_lo", cfg.model.window_lo);
    cfg.model.window_hi = get_num(m, "window_hi", cfg.model.window_hi);
    cfg.model.birth_amplitude = get_num(m, "birth_amplitude", cfg.model.birth_amplitude);
    cfg.model.death_scale = get_num(m, "death_scale", cfg.model.death_scale);
    cfg.model.death_age_rate = get_num(m, "death_age_rate", cfg.model.death_age_rate);
    cfg.model.death_time_rate = get_num(m, "death_time_rate", cfg.model.death_time_rate);
    cfg.model.initial_mean = get_num(m, "initial_mean", cfg.model.initial_mean);
    cfg.model.initial_variance = get_num(m, "initial_variance", cfg.model.initial_variance);
    cfg.model.horizon = get_num(m, "horizon", cfg.model.horizon);
    cfg.model.max_age = get_num(m, "max_age", cfg.model.max_age);
  }
  cfg.N_list = get_int_list(doc, "N_list", cfg.N_list);
  cfg.replications = get_int<int>(doc, "replications", cfg.replications);
  cfg.density_points = get_point_list(doc, "density_points", cfg.density_points);
  cfg.death_points = get_point_list(doc, "death_points", cfg.death_points);
  cfg.ci_N = get_int<long long>(doc, "ci_N", cfg.ci_N);
  cfg.varpi = get_num_list(doc, "varpi", cfg.varpi);
  cfg.grid_points = get_int<long long>(doc, "grid_points",
                                       static_cast<long long>(cfg.grid_points));
  cfg.grid_mode = get_str(doc, "grid_mode", cfg.grid_mode);
  cfg.c_star = get_num(doc, "c_star", cfg.c_star);
  cfg.order_restrict_bivariate =
      get_bool(doc, "order_restrict_bivariate", cfg.order_restrict_bivariate);
  cfg.kernel_time = get_str(doc, "kernel_time", cfg.kernel_time);
  cfg.kernel_age = get_str(doc, "kernel_age", cfg.kernel_age);
  cfg.dt = get_num(doc, "dt", cfg.dt);
  cfg.snapshot_lattice = get_num(doc, "snapshot_lattice", cfg.snapshot_lattice);
  if (doc.contains("concentration")) {
    const json& c = doc["concentration"];
    if (!c.is_object())
      throw std::invalid_argument("config: 'concentration' must be an object");
    require_keys(c, {"N_list", "replications", "h", "center_age", "u_max", "u_points"},
                 "'concentration'");
    cfg.conc_N = get_int_list(c, "N_list", cfg.conc_N);
    cfg.conc_replications = get_int<int>(c, "replications", cfg.conc_replications);
    cfg.conc_h = get_num(c, "h", cfg.conc_h);
    cfg.conc_center_age = get_num(c, "center_age", cfg.conc_center_age);
    cfg.u_max = get_num(c, "u_max", cfg.u_max);
    cfg.u_points = static_cast<std::size_t>(
        get_int<long long>(c, "u_points", static_cast<long long>(cfg.u_points)));
  }
  if (doc.contains("smoothness")) {
    const json& s = doc["smoothness"];
    if (!s.is_object())
      throw std::invalid_argument("config: 'smoothness' must be an object");
    require_keys(s, {"alpha", "beta", "gamma", "delta"}, "'smoothness'");
    cfg.alpha = get_num(s, "alpha", cfg.alpha);
    cfg.beta = get_num(s, "beta", cfg.beta);
    cfg.gamma = get_num(s, "gamma", cfg.gamma);
    cfg.delta = get_num(s, "delta", cfg.delta);
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
      throw std::invalid_argument("config: 'seed' must be a nonnegative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  cfg.threads = get_int<int>(doc, "threads", cfg.threads);
  cfg.output_dir = get_str(doc, "output_dir", cfg.output_dir);

  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.N_list.empty()) throw std::invalid_argument("config: N_list is empty");
  for (std::size_t i = 0; i < cfg.N_list.size(); ++i) {
    if (cfg.N_list[i] < 2)
      throw std::invalid_argument("config: every N must be at least 2");
    if (i > 0 && !(cfg.N_list[i - 1] < cfg.N_list[i]))
      throw std::invalid_argument("config: N_list must be sorted ascending");
  }
  if (cfg.replications < 1)
    throw std::invalid_argument("config: replications must be positive");
  if (cfg.ci_N < 2) throw std::invalid_argument("config: ci_N must be at least 2");
  auto check_points = [&](const std::vector<std::pair<double, double>>& pts,
                          const char* what) {
    if (pts.empty())
      throw std::invalid_argument(std::string("config: ") + what + " is empty");
    for (const auto& [t, a] : pts) {
      if (t < 0.0 || t > cfg.model.horizon || a < 0.0 || a > cfg.model.max_age)
        throw std::invalid_argument(std::string("config: ") + what +
                                    " outside the domain");
      if (std::abs(t - a) < 1e-9)
        throw std::invalid_argument(std::string("config: ") + what +
                                    " must avoid the diagonal t = a");
    }
  };
  check_points(cfg.density_points, "density_points");
  check_points(cfg.death_points, "death_points");
  if (cfg.varpi.empty()) throw std::invalid_argument("config: varpi list is empty");
  for (double v : cfg.varpi)
    if (!(v > 0.0)) throw std::invalid_argument("config: varpi must be positive");
  if (cfg.grid_points < 1)
    throw std::invalid_argument("config: grid_points must be positive");
  if (cfg.grid_mode != "geometric" && cfg.grid_mode != "uniform")
    throw std::invalid_argument("config: grid_mode must be 'geometric' or 'uniform'");
  if (!(cfg.c_star > 0.0)) throw std::invalid_argument("config: c_star must be positive");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
  if (!(cfg.snapshot_lattice > 0.0))
    throw std::invalid_argument("config: snapshot_lattice must be positive");
  if (cfg.conc_N.empty())
    throw std::invalid_argument("config: concentration N_list is empty");
  for (std::size_t i = 0; i < cfg.conc_N.size(); ++i) {
    if (cfg.conc_N[i] < 2)
      throw std::invalid_argument("config: concentration N must be at least 2");
    if (i > 0 && !(cfg.conc_N[i - 1] < cfg.conc_N[i]))
      throw std::invalid_argument("config: concentration N_list must be ascending");
  }
  if (cfg.conc_replications < 2)
    throw std::invalid_argument("config: concentration replications must be >= 2");
  if (!(cfg.conc_h > 0.0))
    throw std::invalid_argument("config: concentration h must be positive");
  if (!(cfg.u_max > 0.0) || cfg.u_points < 2)
    throw std::invalid_argument("config: concentration u grid is degenerate");
  for (double s : {cfg.alpha, cfg.beta, cfg.gamma, cfg.delta})
    if (!(s > 0.0))
      throw std::invalid_argument("config: smoothness parameters must be positive");
  if (cfg.threads < 1) throw std::invalid_argument("config: threads must be positive");
  // Model-level checks happen in build_model; run them now for fail-fast.
  build_model(cfg.model);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["model"] = {{"window_lo", cfg.model.window_lo},
                  {"window_hi", cfg.model.window_hi},
                  {"birth_amplitude", cfg.model.birth_amplitude},
                  {"death_scale", cfg.model.death_scale},
                  {"death_age_rate", cfg.model.death_age_rate},
                  {"death_time_rate", cfg.model.death_time_rate},
                  {"initial_mean", cfg.model.initial_mean},
                  {"initial_variance", cfg.model.initial_variance},
                  {"horizon", cfg.model.horizon},
                  {"max_age", cfg.model.max_age}};
  doc["N_list"] = cfg.N_list;
  doc["replications"] = cfg.replications;
  auto points = [](const std::vector<std::pair<double, double>>& pts) {
    json arr = json::array();
    for (const auto& [t, a] : pts) arr.push_back(json::array({t, a}));
    return arr;
  };
  doc["density_points"] = points(cfg.density_points);
  doc["death_points"] = points(cfg.death_points);
  doc["ci_N"] = cfg.ci_N;
  doc["varpi"] = cfg.varpi;
  doc["grid_points"] = cfg.grid_points;
  doc["grid_mode"] = cfg.grid_mode;
  doc["c_star"] = cfg.c_star;
  doc["order_restrict_bivariate"] = cfg.order_restrict_bivariate;
  doc["kernel_time"] = cfg.kernel_time;
  doc["kernel_age"] = cfg.kernel_age;
  doc["dt"] = cfg.dt;
  doc["snapshot_lattice"] = cfg.snapshot_lattice;
  doc["concentration"] = {{"N_list", cfg.conc_N},
                          {"replications", cfg.conc_replications},
                          {"h", cfg.conc_h},
                          {"center_age", cfg.conc_center_age},
                          {"u_max", cfg.u_max},
                          {"u_points", cfg.u_points}};
  doc["smoothness"] = {{"alpha", cfg.alpha},
                       {"beta", cfg.beta},
                       {"gamma", cfg.gamma},
                       {"delta", cfg.delta}};
  doc["seed"] = cfg.seed;
  return doc.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a64(config_to_json(cfg));
}

}  // namespace lexis
