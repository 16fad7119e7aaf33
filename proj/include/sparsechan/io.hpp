#pragma once

#include "sparsechan/experiments.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace sparsechan {

using json = nlohmann::json;

/// A config document is malformed; `key()` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// ---------------------------------------------------------------- CSV

inline constexpr const char* kSweepHeader =
    "axis,axis_value,method,mean_mse,median_mse,std_mse,trials,non_converged";

/// One row per (point, method). With `normalized` the MSE columns carry the
/// energy-normalized error ‖h − ĥ‖²/‖h‖².
inline std::string sweep_csv(const SweepResult& res, bool normalized = false) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& pt : res.points)
    for (const auto& a : pt.per_method) {
      const Summary& s = normalized ? a.normalized_mse : a.mse;
      os << to_string(res.axis) << ',' << format_double(pt.axis_value) << ','
         << to_string(a.method) << ',' << format_double(s.mean) << ','
         << format_double(s.median) << ',' << format_double(s.std) << ',' << a.trials_used
         << ',' << a.non_converged << '\n';
    }
  return os.str();
}

/// `index,real,imag` per tap.
inline std::string taps_csv(const ComplexVector& taps) {
  std::ostringstream os;
  os << "index,real,imag\n";
  for (Eigen::Index i = 0; i < taps.size(); ++i)
    os << i << ',' << format_double(taps(i).real()) << ',' << format_double(taps(i).imag())
       << '\n';
  return os.str();
}

inline ComplexVector parse_taps_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "index,real,imag")
    throw InvalidInput("taps csv: missing 'index,real,imag' header");
  std::vector<Complex> vals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string idx, re, im;
    if (!std::getline(row, idx, ',') || !std::getline(row, re, ',') || !std::getline(row, im))
      throw InvalidInput("taps csv: malformed row '" + line + "'");
    if (std::stoul(idx) != vals.size()) throw InvalidInput("taps csv: indices must be 0..L-1 in order");
    vals.emplace_back(std::stod(re), std::stod(im));
  }
  ComplexVector out(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) out(static_cast<Eigen::Index>(i)) = vals[i];
  return out;
}

inline json diagnostics_json(const Estimate& e) {
  json j;
  j["method"] = to_string(e.method);
  j["lambda"] = std::isnan(e.diagnostics.lambda) ? json(nullptr) : json(e.diagnostics.lambda);
  j["iterations"] = e.diagnostics.iterations;
  j["converged"] = e.diagnostics.converged;
  j["regularized"] = e.diagnostics.regularized;
  j["solver_status"] = e.diagnostics.solver_status;
  j["atoms"] = e.diagnostics.atoms;
  j["support_hat"] = e.support_hat;
  j["note"] = e.diagnostics.note;
  return j;
}

// ---------------------------------------------------------------- config JSON

inline json lambda_json(const LambdaRule& r) {
  return r.automatic ? json("auto") : json(r.value);
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["L"] = c.L;
  j["T"] = c.T;
  j["trials"] = c.trials;
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.emplace_back(to_string(m));
  j["methods"] = methods;
  j["snr_grid_db"] = c.snr_grid_db;
  j["n_grid"] = c.n_grid;
  j["fixed_snr_db"] = c.fixed_snr_db;
  j["fixed_n"] = c.fixed_n;
  j["base_seed"] = c.base_seed;
  j["lambda_ds"] = lambda_json(c.estimator.lambda_ds);
  j["lambda_lasso"] = lambda_json(c.estimator.lambda_lasso);
  j["omp_max_atoms"] = c.estimator.omp_max_atoms ? json(*c.estimator.omp_max_atoms) : json("auto");
  j["omp_residual_tol"] =
      c.estimator.omp_residual_tol ? json(*c.estimator.omp_residual_tol) : json("auto");
  j["lp_tolerance"] = c.estimator.lp_tolerance;
  j["lp_max_iterations"] = c.estimator.lp_max_iterations;
  j["complex_mode"] = to_string(c.estimator.complex_mode);
  j["distribution"] = to_string(c.distribution);
  j["fixed_training"] = c.fixed_training;
  j["threads"] = c.threads;
  return j;
}

namespace detail {

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

inline std::size_t get_count(const json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw ConfigError(key, "expected a non-negative integer");
  return j.get<std::size_t>();
}

inline double get_real(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  return j.get<double>();
}

inline LambdaRule get_lambda(const json& j, const std::string& key) {
  if (j.is_string()) {
    if (j.get<std::string>() == "auto") return {};
    throw ConfigError(key, "expected \"auto\" or a non-negative number");
  }
  const double v = get_real(j, key);
  if (!(v >= 0.0)) throw ConfigError(key, "must be non-negative");
  return LambdaRule::fixed(v);
}

}  // namespace detail

/// Applies the keys of a flat config object on top of `cfg`. Keys not in
/// `extra_keys` and not an ExperimentConfig/EstimatorConfig field are rejected.
inline void apply_json(ExperimentConfig& cfg, const json& j,
                       const std::vector<std::string>& extra_keys = {}) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "L") cfg.L = detail::get_count(v, key);
    else if (key == "T") cfg.T = detail::get_count(v, key);
    else if (key == "trials") cfg.trials = detail::get_count(v, key);
    else if (key == "methods") {
      if (!v.is_array()) throw ConfigError(key, "expected an array of method names");
      cfg.methods.clear();
      for (const auto& m : v) {
        try {
          cfg.methods.push_back(parse_method(detail::get_as<std::string>(m, key)));
        } catch (const InvalidInput& e) {
          throw ConfigError(key, e.what());
        }
      }
    } else if (key == "snr_grid_db") {
      if (!v.is_array()) throw ConfigError(key, "expected an array");
      cfg.snr_grid_db.clear();
      for (const auto& s : v) cfg.snr_grid_db.push_back(detail::get_real(s, key));
    } else if (key == "n_grid") {
      if (!v.is_array()) throw ConfigError(key, "expected an array");
      cfg.n_grid.clear();
      for (const auto& s : v) cfg.n_grid.push_back(detail::get_count(s, key));
    } else if (key == "fixed_snr_db") cfg.fixed_snr_db = detail::get_real(v, key);
    else if (key == "fixed_n") cfg.fixed_n = detail::get_count(v, key);
    else if (key == "base_seed") cfg.base_seed = detail::get_count(v, key);
    else if (key == "lambda_ds") cfg.estimator.lambda_ds = detail::get_lambda(v, key);
    else if (key == "lambda_lasso") cfg.estimator.lambda_lasso = detail::get_lambda(v, key);
    else if (key == "omp_max_atoms") {
      if (v.is_string() && v.get<std::string>() == "auto") cfg.estimator.omp_max_atoms.reset();
      else cfg.estimator.omp_max_atoms = detail::get_count(v, key);
    } else if (key == "omp_residual_tol") {
      if (v.is_string() && v.get<std::string>() == "auto") cfg.estimator.omp_residual_tol.reset();
      else cfg.estimator.omp_residual_tol = detail::get_real(v, key);
    } else if (key == "lp_tolerance") cfg.estimator.lp_tolerance = detail::get_real(v, key);
    else if (key == "lp_max_iterations")
      cfg.estimator.lp_max_iterations = static_cast<int>(detail::get_count(v, key));
    else if (key == "complex_mode") {
      if (detail::get_as<std::string>(v, key) != "real_composite")
        throw ConfigError(key, "only \"real_composite\" is supported");
    } else if (key == "distribution") {
      try {
        cfg.distribution = parse_distribution(detail::get_as<std::string>(v, key));
      } catch (const InvalidInput& e) {
        throw ConfigError(key, e.what());
      }
    } else if (key == "fixed_training") cfg.fixed_training = detail::get_as<bool>(v, key);
    else if (key == "threads") cfg.threads = static_cast<unsigned>(detail::get_count(v, key));
    else if (std::find(extra_keys.begin(), extra_keys.end(), key) == extra_keys.end())
      throw ConfigError(key, "unknown key");
  }
}

}  // namespace sparsechan
