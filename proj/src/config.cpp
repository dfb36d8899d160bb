#include "homlab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "homlab/errors.hpp"
#include "homlab/report.hpp"

namespace homlab {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

int field_size_for(int band) {
  int n = 16;
  while (n < 2 * (band + 1)) n *= 2;
  return n;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) bad("unknown key '" + it.key() + "' in " + where);
  }
}

std::vector<int> cells_from(const json& study) {
  std::vector<int> cells;
  if (study.contains("eps")) {
    for (const auto& e : study.at("eps")) cells.push_back(CellRatio::from_eps(e.get<double>()).cells());
  } else if (study.contains("cells")) {
    cells = study.at("cells").get<std::vector<int>>();
  } else {
    return StudyConfig{}.cells;
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] < 1) bad("1/eps must be a positive integer");
    if (i > 0 && cells[i] <= cells[i - 1]) bad("eps list must be strictly decreasing");
  }
  return cells;
}

Tolerances tolerances_from(const json& j) {
  Tolerances t;
  if (j.is_null()) return t;
  reject_unknown(j,
                 {"min_rate", "min_r_squared", "max_final_gap", "rate_low", "rate_high", "decay_rate_tolerance",
                  "se_multiple", "min_enhancement"},
                 "study.tolerances");
  t.min_rate = get_or(j, "min_rate", t.min_rate);
  t.min_r_squared = get_or(j, "min_r_squared", t.min_r_squared);
  t.max_final_gap = get_or(j, "max_final_gap", t.max_final_gap);
  t.rate_low = get_or(j, "rate_low", t.rate_low);
  t.rate_high = get_or(j, "rate_high", t.rate_high);
  t.decay_rate_tolerance = get_or(j, "decay_rate_tolerance", t.decay_rate_tolerance);
  t.se_multiple = get_or(j, "se_multiple", t.se_multiple);
  t.min_enhancement = get_or(j, "min_enhancement", t.min_enhancement);
  return t;
}

StudyConfig study_from(const json& j) {
  StudyConfig s;
  if (j.is_null()) return s;
  reject_unknown(j,
                 {"kind", "target", "eps", "cells", "s", "M", "T", "T_over_mu", "paths", "batches", "watch",
                  "threads", "half_width", "validation_k", "validate_noise", "tolerances"},
                 "study");
  s.kind = get_or<std::string>(j, "kind", s.kind);
  if (s.kind != "converge" && s.kind != "variance" && s.kind != "semigroup" && s.kind != "noise-check" &&
      s.kind != "simulate")
    bad("unknown study kind '" + s.kind + "'");
  if (j.contains("target")) s.target = limit_rule_from_string(j.at("target").get<std::string>());
  s.cells = cells_from(j);
  if (j.contains("s")) s.s = j.at("s").get<double>();
  s.mode_cutoff = get_or(j, "M", s.mode_cutoff);
  s.horizon = get_or(j, "T", s.horizon);
  s.horizon_over_mu = get_or(j, "T_over_mu", s.horizon_over_mu);
  s.paths = get_or(j, "paths", s.paths);
  s.batches = get_or(j, "batches", s.batches);
  s.watch = get_or(j, "watch", s.watch);
  s.threads = get_or(j, "threads", s.threads);
  s.half_width = get_or(j, "half_width", s.half_width);
  s.validation_k = get_or(j, "validation_k", s.validation_k);
  s.validate_noise = get_or(j, "validate_noise", s.validate_noise);
  s.tol = tolerances_from(j.value("tolerances", json()));
  if (s.paths < 2) bad("paths must be at least 2");
  if (s.batches < 2) bad("batches must be at least 2");
  if (s.mode_cutoff < 0) bad("M must be nonnegative");
  if (s.horizon <= 0.0 && s.horizon_over_mu <= 0.0) bad("T must be positive");
  if (s.watch.empty()) bad("watch list is empty");
  return s;
}

SolverConfig solver_from(const json& j) {
  SolverConfig c;
  if (j.is_null()) return c;
  reject_unknown(j, {"scheme", "dt", "modes", "pad", "record_stride", "all_classes"}, "solver");
  if (j.contains("scheme")) c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  c.dt = get_or(j, "dt", c.dt);
  c.modes = get_or(j, "modes", c.modes);
  c.pad = get_or(j, "pad", c.pad);
  c.record_stride = get_or(j, "record_stride", c.record_stride);
  c.all_classes = get_or(j, "all_classes", c.all_classes);
  if (c.dt < 0.0 || c.modes < 0 || c.pad < 0 || c.record_stride < 1) bad("invalid solver settings");
  return c;
}

}  // namespace

SpectralField field_from_json(const json& j) {
  if (j.is_number()) return SpectralField::constant(16, j.get<double>());
  if (j.is_object()) {
    reject_unknown(j, {"mean", "cos", "sin"}, "field");
    const auto cosines = get_or<std::vector<double>>(j, "cos", {});
    const auto sines = get_or<std::vector<double>>(j, "sin", {});
    const int band = static_cast<int>(std::max(cosines.size(), sines.size()));
    SpectralField f(field_size_for(band));
    f.at(0) = get_or(j, "mean", 0.0);
    for (std::size_t i = 0; i < cosines.size(); ++i) {
      const int k = static_cast<int>(i) + 1;
      f.at(k) += 0.5 * cosines[i];
      f.at(-k) += 0.5 * cosines[i];
    }
    for (std::size_t i = 0; i < sines.size(); ++i) {
      const int k = static_cast<int>(i) + 1;
      f.at(k) += cplx(0.0, -0.5 * sines[i]);
      f.at(-k) += cplx(0.0, 0.5 * sines[i]);
    }
    return f;
  }
  if (j.is_array()) {
    int band = 0;
    for (const auto& e : j) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) bad("field coefficients are [k, re] or [k, re, im]");
      band = std::max(band, std::abs(e[0].get<int>()));
    }
    SpectralField f(field_size_for(band));
    for (const auto& e : j) f.at(e[0].get<int>()) += cplx(e[1].get<double>(), e.size() == 3 ? e[2].get<double>() : 0.0);
    if (!f.is_real(1e-12)) bad("field coefficients must describe a real function");
    return f;
  }
  bad("a field is a number, an object or a coefficient list");
}

json field_to_json(const SpectralField& f) {
  json out = json::array();
  for (int k = f.kmin(); k <= f.kmax(); ++k)
    if (f[k] != cplx{}) out.push_back({k, f[k].real(), f[k].imag()});
  return out;
}

Coefficients coefficients_from_json(const json& j) {
  std::string kind;
  double amplitude = 1.0, sigma = 1.0;
  if (j.is_string()) {
    std::istringstream in(j.get<std::string>());
    in >> kind;
    if (kind == "heat") sigma = std::sqrt(2.0);
    for (std::string token; in >> token;) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) bad("expected key=value in '" + j.get<std::string>() + "'");
      const std::string key = token.substr(0, eq);
      const double value = std::stod(token.substr(eq + 1));
      if (key == "A") amplitude = value;
      else if (key == "sigma") sigma = value;
      else bad("unknown coefficient parameter '" + key + "'");
    }
  } else if (j.is_object()) {
    reject_unknown(j, {"kind", "A", "sigma", "b", "delta", "delta_prime"}, "coefficients");
    kind = get_or<std::string>(j, "kind", "");
    if (kind == "fourier") {
      if (!j.contains("b") || !j.contains("sigma")) bad("fourier coefficients need b and sigma");
      return Coefficients::from_fourier(field_from_json(j.at("b")), field_from_json(j.at("sigma")),
                                        get_or(j, "delta", 0.0), get_or(j, "delta_prime", 0.0));
    }
    if (kind == "heat") sigma = std::sqrt(2.0);
    amplitude = get_or(j, "A", amplitude);
    sigma = get_or(j, "sigma", sigma);
  } else {
    bad("coefficients must be a name or an object");
  }
  if (kind == "heat") return Coefficients::heat(sigma);
  if (kind == "cosine-potential") return Coefficients::cosine_potential(amplitude, sigma);
  bad("unknown coefficient set '" + kind + "'");
}

int NoiseConfig::cutoff_at(CellRatio ratio) const {
  return cutoff_per_cell > 0 ? std::max(cutoff, cutoff_per_cell * ratio.cells()) : cutoff;
}

NoiseSpec NoiseConfig::build(CellRatio ratio, const SpectralField& rho) const {
  const int k = cutoff_at(ratio);
  NoiseSpec spec;
  switch (family) {
    case NoiseFamily::ConstantWhite: spec = NoiseSpec::constant_white(k); break;
    case NoiseFamily::PowerDecay:
      spec = centered ? NoiseSpec::centered_power_decay(k, alpha, base, rho) : NoiseSpec::power_decay(k, alpha, base);
      break;
    case NoiseFamily::TailConvergent: spec = NoiseSpec::tail_convergent(k, tau, tail, perturbation); break;
    case NoiseFamily::Custom: spec = NoiseSpec::custom(k, table, tail, alpha); break;
  }
  spec.eta = eta;
  spec.amplitude = amplitude;
  spec.mollifier = mollifier;
  return spec;
}

NoiseConfig noise_config_from_json(const json& j) {
  NoiseConfig n;
  if (j.is_null()) return n;
  reject_unknown(j,
                 {"family", "cutoff", "cutoff_per_cell", "alpha", "tau", "eta", "amplitude", "centered", "base",
                  "perturbation", "tail", "table", "mollifier"},
                 "noise");
  if (j.contains("family")) n.family = noise_family_from_string(j.at("family").get<std::string>());
  n.cutoff = get_or(j, "cutoff", n.cutoff);
  n.cutoff_per_cell = get_or(j, "cutoff_per_cell", n.cutoff_per_cell);
  n.alpha = get_or(j, "alpha", n.alpha);
  n.tau = get_or(j, "tau", n.tau);
  n.eta = get_or(j, "eta", n.eta);
  n.amplitude = get_or(j, "amplitude", n.amplitude);
  n.centered = get_or(j, "centered", n.centered);
  if (j.contains("base")) n.base = field_from_json(j.at("base"));
  if (j.contains("perturbation")) n.perturbation = field_from_json(j.at("perturbation"));
  if (j.contains("tail")) n.tail = field_from_json(j.at("tail"));
  if (j.contains("table"))
    for (const auto& e : j.at("table")) n.table.push_back(field_from_json(e));
  if (j.contains("mollifier")) {
    const auto& m = j.at("mollifier");
    Mollifier mol;
    mol.kind = mollifier_kind_from_string(m.is_string() ? m.get<std::string>() : m.at("kind").get<std::string>());
    if (m.is_object()) mol.width = get_or(m, "width", mol.width);
    if (mol.width <= 0.0) bad("mollifier width must be positive");
    n.mollifier = mol;
  }
  if (n.cutoff < 0 || n.cutoff_per_cell < 0) bad("noise cutoff must be nonnegative");
  if (n.family == NoiseFamily::Custom && n.table.empty()) bad("custom noise needs a table");
  if (n.centered && n.family != NoiseFamily::PowerDecay) bad("centering applies to power-decay noise");
  return n;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j, {"coefficients", "noise", "solver", "study", "seed", "output"}, "config");
  ExperimentConfig c;
  c.document = j;
  c.coefficients = coefficients_from_json(j.value("coefficients", json("cosine-potential")));
  c.noise = noise_config_from_json(j.value("noise", json()));
  c.solver = solver_from(j.value("solver", json()));
  c.study = study_from(j.value("study", json()));
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.output = get_or<std::string>(j, "output", c.output.string());
  c.solver.seed = c.seed;
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    bad(path.string() + ": " + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::set(const std::string& section, const std::string& key, const json& value) {
  json doc = document;
  if (section.empty()) doc[key] = value;
  else doc[section][key] = value;
  *this = from_json(doc);
}

std::string ExperimentConfig::hash() const {
  json canonical = document;
  canonical.erase("output");
  return hex64(fnv1a64(canonical.dump()));
}

double ExperimentConfig::horizon(double mu) const {
  return study.horizon_over_mu > 0.0 ? study.horizon_over_mu / mu : study.horizon;
}

SolverConfig ExperimentConfig::solver_at(CellRatio ratio, double mu) const {
  SolverConfig s = solver;
  s.ratio = ratio;
  s.horizon = horizon(mu);
  s.cutoff = noise.cutoff_at(ratio);
  s.seed = seed;
  return s;
}

}  // namespace homlab
