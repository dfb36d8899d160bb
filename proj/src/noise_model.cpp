#include "homlab/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

double decay(int k, double exponent) { return k == 0 ? 1.0 : std::pow(std::abs(double(k)), -exponent); }

std::vector<int> dyadic_points(int ktest) {
  std::vector<int> out;
  for (int k = 1; k <= ktest; k *= 2) out.push_back(k);
  if (out.empty() || out.back() != ktest) out.push_back(std::max(ktest, 1));
  return out;
}

// Largest value of f over [0, ktest/2] and over (ktest/2, ktest].
template <class F>
std::vector<double> dyadic_maxima(int ktest, F f) {
  double inner = 0.0, outer = 0.0;
  for (int k = 0; k <= ktest; ++k) {
    double& slot = 2 * k <= ktest ? inner : outer;
    slot = std::max(slot, f(k));
  }
  return {inner, outer};
}

// The last block may not exceed the running bound by more than 5%.
Check stable_bound(const std::string& name, const std::vector<double>& blocks) {
  double before = 0.0;
  for (std::size_t i = 0; i + 1 < blocks.size(); ++i) before = std::max(before, blocks[i]);
  const double last = blocks.back();
  const bool finite = std::isfinite(last);
  return {name, finite && last <= 1.05 * before + 1e-300, last, 1.05 * before};
}

void require_small_eps_m(CellRatio ratio, int m) {
  if (2 * std::abs(m) >= ratio.cells()) throw Error(ErrorCode::InvalidConfig, "requires eps |m| < 1/2");
}

}  // namespace

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::ConstantWhite: return "constant-white";
    case NoiseFamily::PowerDecay: return "power-decay";
    case NoiseFamily::TailConvergent: return "tail-convergent";
    case NoiseFamily::Custom: return "custom";
  }
  return "?";
}

NoiseFamily noise_family_from_string(const std::string& name) {
  for (auto f : {NoiseFamily::ConstantWhite, NoiseFamily::PowerDecay, NoiseFamily::TailConvergent, NoiseFamily::Custom})
    if (to_string(f) == name) return f;
  throw Error(ErrorCode::InvalidConfig, "unknown noise family '" + name + "'");
}

double Mollifier::operator()(double l) const {
  const double x = std::abs(l) / width;
  switch (kind) {
    case Kind::One: return 1.0;
    case Kind::Tent: return std::max(0.0, 1.0 - x);
    case Kind::Bump: return x < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0;
    case Kind::Delta: return std::abs(l) < 1e-12 ? 1.0 : 0.0;
  }
  return 1.0;
}

std::string to_string(Mollifier::Kind k) {
  switch (k) {
    case Mollifier::Kind::One: return "one";
    case Mollifier::Kind::Tent: return "tent";
    case Mollifier::Kind::Bump: return "bump";
    case Mollifier::Kind::Delta: return "delta";
  }
  return "?";
}

Mollifier::Kind mollifier_kind_from_string(const std::string& name) {
  for (auto k : {Mollifier::Kind::One, Mollifier::Kind::Tent, Mollifier::Kind::Bump, Mollifier::Kind::Delta})
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::InvalidConfig, "unknown mollifier '" + name + "'");
}

NoiseSpec NoiseSpec::constant_white(int cutoff) {
  NoiseSpec s;
  s.family = NoiseFamily::ConstantWhite;
  s.cutoff = cutoff;
  return s;
}

NoiseSpec NoiseSpec::power_decay(int cutoff, double alpha, SpectralField p) {
  NoiseSpec s;
  s.family = NoiseFamily::PowerDecay;
  s.cutoff = cutoff;
  s.alpha = alpha;
  s.tail = p;
  s.base = std::move(p);
  return s;
}

NoiseSpec NoiseSpec::centered_power_decay(int cutoff, double alpha, const SpectralField& p, const SpectralField& rho) {
  SpectralField centered = p;
  centered.at(0) -= inner_product(p, rho);
  centered.enforce_real();
  return power_decay(cutoff, alpha, std::move(centered));
}

NoiseSpec NoiseSpec::tail_convergent(int cutoff, double tau, SpectralField qbar, SpectralField r) {
  NoiseSpec s;
  s.family = NoiseFamily::TailConvergent;
  s.cutoff = cutoff;
  s.tau = tau;
  s.tail = std::move(qbar);
  s.perturbation = std::move(r);
  return s;
}

NoiseSpec NoiseSpec::custom(int cutoff, std::vector<SpectralField> table, SpectralField qbar, double alpha) {
  if (table.empty()) throw Error(ErrorCode::InvalidConfig, "custom noise needs at least one profile");
  NoiseSpec s;
  s.family = NoiseFamily::Custom;
  s.cutoff = cutoff;
  s.alpha = alpha;
  s.table = std::move(table);
  s.tail = std::move(qbar);
  return s;
}

SpectralField NoiseSpec::profile(int k) const {
  const int a = std::abs(k);
  SpectralField q;
  switch (family) {
    case NoiseFamily::ConstantWhite:
      q = SpectralField::constant(2, 1.0);
      break;
    case NoiseFamily::PowerDecay:
      q = base * decay(a, alpha);
      break;
    case NoiseFamily::TailConvergent: {
      const int n = std::max(tail.size(), perturbation.size());
      q = tail.resized(n) + perturbation.resized(n) * decay(a, tau);
      break;
    }
    case NoiseFamily::Custom:
      q = table[std::min<std::size_t>(a, table.size() - 1)];
      break;
  }
  return q * amplitude;
}

SpectralField NoiseSpec::tail_profile() const {
  if (family == NoiseFamily::ConstantWhite) return SpectralField::constant(2, amplitude);
  return tail * amplitude;
}

double NoiseSpec::mollifier_weight(double x) const { return mollifier ? (*mollifier)(x) : 1.0; }

bool AssumptionReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

AssumptionReport validate_assumption2(const NoiseSpec& spec, int ktest) {
  AssumptionReport r;
  r.checks.push_back({"alpha_in_(0,1)", spec.alpha > 0.0 && spec.alpha < 1.0, spec.alpha, 0.0});

  std::vector<double> ratio(ktest + 1), h1(ktest + 1, 0.0);
  for (int k = 0; k <= ktest; ++k) {
    const SpectralField q = spec.profile(k);
    const double norm = l2_norm(q);
    ratio[k] = norm / decay(k, spec.alpha);
    // zero profiles carry no shape information and pass trivially
    if (norm > 0.0) h1[k] = sobolev_norm(q, 1.0) / norm;
  }
  for (int k : dyadic_points(ktest)) {
    r.k.push_back(k);
    r.series.push_back(ratio[k]);
  }
  r.checks.push_back(stable_bound("decay_bound_C", dyadic_maxima(ktest, [&](int k) { return ratio[k]; })));
  if (spec.alpha <= 0.5) {
    r.checks.push_back(stable_bound("normalised_h1_bound", dyadic_maxima(ktest, [&](int k) { return h1[k]; })));
  }
  return r;
}

AssumptionReport validate_assumption3(const NoiseSpec& spec, int ktest) {
  AssumptionReport r;
  const SpectralField qbar = spec.tail_profile();
  for (int k : dyadic_points(ktest)) {
    SpectralField scaled = spec.profile(k) * std::pow(double(k), spec.alpha);
    const int n = std::max(scaled.size(), qbar.size());
    r.k.push_back(k);
    r.series.push_back(l2_norm(scaled.resized(n) - qbar.resized(n)));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < r.series.size(); ++i)
    monotone = monotone && r.series[i] <= r.series[i - 1] * (1.0 + 1e-12) + 1e-14;
  const double first = r.series.front(), last = r.series.back();
  const double floor = 1e-10 * (1.0 + l2_norm(qbar));
  r.checks.push_back({"gap_nonincreasing", monotone, last, first});
  r.checks.push_back({"gap_vanishing", last <= floor || (monotone && last < 0.5 * first), last,
                      std::max(floor, 0.5 * first)});
  return r;
}

AssumptionReport validate_assumption4(const NoiseSpec& spec, int ktest) {
  AssumptionReport r;
  const SpectralField qbar = spec.tail_profile();
  auto term = [&](int k) {
    const SpectralField q = spec.profile(k);
    const int n = std::max(q.size(), qbar.size());
    const double h = sobolev_norm(q.resized(n) - qbar.resized(n), 1.0);
    return decay(k, spec.eta) * h * h;
  };
  const auto points = dyadic_points(ktest);
  double sum = term(0);
  int done = 0;
  for (int cut : points) {
    for (int k = done + 1; k <= cut; ++k) sum += 2.0 * term(k);
    done = cut;
    r.k.push_back(cut);
    r.series.push_back(sum);
  }
  r.checks.push_back({"eta_in_[0,1)", spec.eta >= 0.0 && spec.eta < 1.0, spec.eta, 1.0});
  const double total = r.series.back();
  const double previous = r.series.size() > 1 ? r.series[r.series.size() - 2] : 0.0;
  const double gap = total > 1e-20 ? (total - previous) / total : 0.0;
  r.checks.push_back({"cauchy_gap", gap <= 1e-2, gap, 1e-2});
  return r;
}

cplx coeff_thm1(const NoiseSpec& spec, const SpectralField& rho, int m) {
  return inner_product(spec.profile(m), rho);
}

double coeff_thm2(const NoiseSpec& spec, const SpectralField& rho) {
  return seminorm_neg(convolve_exact(spec.tail_profile(), rho), spec.alpha);
}

namespace {

double radicand(const NoiseSpec& spec, const SpectralField& rho, int m, double tail_energy) {
  const double r = std::norm(coeff_thm1(spec, rho, m)) - std::norm(inner_product(spec.tail_profile(), rho)) +
                   tail_energy;
  if (r < -1e-12) throw Error(ErrorCode::NegativeRadicand, "limiting noise coefficient has negative radicand");
  return std::max(r, 0.0);
}

}  // namespace

double coeff_thm3(const NoiseSpec& spec, const SpectralField& rho, int m) {
  const double t = l2_norm(convolve_exact(spec.tail_profile(), rho));
  return std::sqrt(radicand(spec, rho, m, t * t));
}

double coeff_corollary(const NoiseSpec& spec, const SpectralField& rho, int m) {
  const SpectralField prod = convolve_exact(spec.tail_profile(), rho);
  double energy = 0.0;
  for (int l = prod.kmin(); l <= prod.kmax(); ++l) {
    const double w = spec.mollifier_weight(l);
    energy += w * w * std::norm(prod[l]);
  }
  return std::sqrt(radicand(spec, rho, m, energy));
}

LambdaSeries lambda_series(const NoiseSpec& spec, const SpectralField& rho, CellRatio ratio, int m,
                           LambdaScale scale, bool throw_on_truncation) {
  require_small_eps_m(ratio, m);
  const int n = ratio.cells();
  const double s = scale == LambdaScale::EpsNegAlpha ? std::pow(double(n), spec.alpha) : 1.0;
  // |m + l n| <= cutoff
  const int lo = static_cast<int>(std::ceil(double(-spec.cutoff - m) / n));
  const int hi = static_cast<int>(std::floor(double(spec.cutoff - m) / n));

  LambdaSeries out;
  double total = 0.0, inner = 0.0;
  const int span = std::max(std::abs(lo), std::abs(hi));
  for (int l = lo; l <= hi; ++l) {
    const SpectralField q = spec.profile(m + l * n);
    cplx sum = 0.0;
    for (int j = q.kmin(); j <= q.kmax(); ++j) sum += q[j] * std::conj(rho[j + l]);
    const cplx term = s * spec.mollifier_weight(ratio.eps() * m + l) * sum;
    out.l.push_back(l);
    out.terms.push_back(term);
    total += std::norm(term);
    if (2 * std::abs(l) <= span) inner += std::norm(term);
  }
  out.lambda = std::sqrt(total);
  out.tail = span >= 1 ? out.lambda - std::sqrt(inner) : out.lambda;
  if (throw_on_truncation && out.tail > 0.01 * out.lambda) {
    throw Error(ErrorCode::TruncationTooSmall, "lambda series truncation tail exceeds 1% of Lambda");
  }
  return out;
}

SpectralField assemble_noise(const NoiseSpec& spec, CellRatio ratio, const WienerBatch& dw, int n_out) {
  SpectralField field(n_out);
  const int cutoff = std::min(spec.cutoff, dw.cutoff());
  for (int k = -cutoff; k <= cutoff; ++k) {
    const double w = spec.mollifier_weight(ratio.eps() * k);
    if (w == 0.0) continue;
    field += oscillate(spec.profile(k), ratio, k, n_out) * (w * dw[k]);
  }
  return field;
}

}  // namespace homlab
