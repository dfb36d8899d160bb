#include "homlab/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "homlab/errors.hpp"

namespace homlab {

namespace {

// FFTW planning is not thread-safe; execution on new arrays is. Plans are
// created once per (size, sign) under a lock and reused.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> scratch_in(n), scratch_out(n);
    fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                      reinterpret_cast<fftw_complex*>(scratch_out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

void fft(std::vector<cplx>& in, std::vector<cplx>& out, int sign) {
  const int n = static_cast<int>(in.size());
  out.resize(n);
  fftw_plan plan = PlanCache::instance().get(n, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

int wrap(int k, int m) { return ((k % m) + m) % m; }

void require_even(int n) {
  if (n <= 0 || n % 2 != 0) {
    throw Error(ErrorCode::ResolutionTooSmall, "mode count must be even and positive, got " + std::to_string(n));
  }
}

}  // namespace

CellRatio::CellRatio(int cells) : cells_(cells) {
  if (cells < 1) throw Error(ErrorCode::InvalidConfig, "cell count 1/eps must be a positive integer");
}

CellRatio CellRatio::from_eps(double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw Error(ErrorCode::InvalidConfig, "eps must lie in (0, 1]");
  const double inv = 1.0 / eps;
  const double rounded = std::round(inv);
  if (std::abs(inv - rounded) > 1e-9 * inv) {
    throw Error(ErrorCode::InvalidConfig, "1/eps must be an integer, got eps = " + std::to_string(eps));
  }
  return CellRatio(static_cast<int>(rounded));
}

SpectralField::SpectralField(int n) : n_(n) {
  require_even(n);
  c_.assign(n, cplx{});
}

SpectralField SpectralField::mode(int n, int k, cplx amplitude) {
  SpectralField f(n);
  f.at(k) = amplitude;
  return f;
}

SpectralField SpectralField::from_modes(int n, std::initializer_list<std::pair<int, cplx>> modes) {
  SpectralField f(n);
  for (const auto& [k, v] : modes) f.at(k) += v;
  return f;
}

SpectralField SpectralField::constant(int n, double value) { return mode(n, 0, value); }

cplx& SpectralField::at(int k) {
  if (!contains(k)) {
    throw Error(ErrorCode::ResolutionTooSmall,
                "wavenumber " + std::to_string(k) + " outside [" + std::to_string(kmin()) + ", " +
                    std::to_string(kmax()) + "]");
  }
  return c_[k + n_ / 2];
}

SpectralField SpectralField::resized(int n) const {
  SpectralField out(n);
  for (int k = std::max(kmin(), out.kmin()); k <= std::min(kmax(), out.kmax()); ++k) out.at(k) = (*this)[k];
  return out;
}

int SpectralField::bandwidth(double tol) const {
  int band = -1;
  for (int k = kmin(); k <= kmax(); ++k) {
    if (std::abs((*this)[k]) > tol) band = std::max(band, std::abs(k));
  }
  return band;
}

bool SpectralField::is_real(double tol) const {
  if (n_ == 0) return true;
  if (std::abs((*this)[0].imag()) > tol) return false;
  if (std::abs((*this)[kmin()].imag()) > tol) return false;
  for (int k = 1; k <= kmax(); ++k) {
    if (std::abs((*this)[-k] - std::conj((*this)[k])) > tol) return false;
  }
  return true;
}

void SpectralField::enforce_real() {
  if (n_ == 0) return;
  for (int k = 1; k <= kmax(); ++k) {
    const cplx avg = 0.5 * ((*this)[k] + std::conj((*this)[-k]));
    at(k) = avg;
    at(-k) = std::conj(avg);
  }
  at(0) = (*this)[0].real();
  at(kmin()) = (*this)[kmin()].real();
}

std::vector<cplx> SpectralField::to_grid(int points) const {
  if (points < n_) throw Error(ErrorCode::ResolutionTooSmall, "grid coarser than the mode count");
  std::vector<cplx> spectrum(points, cplx{}), values;
  for (int k = kmin(); k <= kmax(); ++k) spectrum[wrap(k, points)] += (*this)[k];
  fft(spectrum, values, FFTW_BACKWARD);
  return values;
}

std::vector<double> SpectralField::to_real_grid(int points) const {
  const auto values = to_grid(points);
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](cplx v) { return v.real(); });
  return out;
}

SpectralField SpectralField::from_grid(std::span<const cplx> values, int n) {
  const int points = static_cast<int>(values.size());
  if (points < n) throw Error(ErrorCode::ResolutionTooSmall, "grid coarser than the mode count");
  std::vector<cplx> in(values.begin(), values.end()), spectrum;
  fft(in, spectrum, FFTW_FORWARD);
  SpectralField f(n);
  const double scale = 1.0 / points;
  for (int k = f.kmin(); k <= f.kmax(); ++k) f.at(k) = spectrum[wrap(k, points)] * scale;
  return f;
}

SpectralField SpectralField::from_real_grid(std::span<const double> values, int n) {
  std::vector<cplx> c(values.begin(), values.end());
  SpectralField f = from_grid(c, n);
  f.enforce_real();
  return f;
}

SpectralField SpectralField::derivative(int order) const {
  SpectralField out(*this);
  for (int k = kmin(); k <= kmax(); ++k) out.at(k) *= std::pow(cplx(0.0, k), order);
  return out;
}

SpectralField SpectralField::conj() const {
  SpectralField out(*this);
  for (auto& v : out.c_) v = std::conj(v);
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (other.n_ > n_) *this = resized(other.n_);
  for (int k = other.kmin(); k <= other.kmax(); ++k) at(k) += other[k];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (other.n_ > n_) *this = resized(other.n_);
  for (int k = other.kmin(); k <= other.kmax(); ++k) at(k) -= other[k];
  return *this;
}

SpectralField& SpectralField::operator*=(cplx scale) {
  for (auto& v : c_) v *= scale;
  return *this;
}

cplx inner_product(const SpectralField& f, const SpectralField& g) {
  cplx sum{};
  const int lo = std::max(f.kmin(), g.kmin());
  const int hi = std::min(f.kmax(), g.kmax());
  for (int k = lo; k <= hi; ++k) sum += f[k] * std::conj(g[k]);
  return sum;
}

double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }

double sobolev_norm(const SpectralField& f, double s) {
  double sum = 0.0;
  for (int k = f.kmin(); k <= f.kmax(); ++k) sum += std::pow(1.0 + double(k) * k, s) * std::norm(f[k]);
  return std::sqrt(sum);
}

double seminorm_neg(const SpectralField& f, double s, double mean_zero_tol) {
  const double total = l2_norm(f);
  if (std::abs(f[0]) > mean_zero_tol * total) {
    throw Error(ErrorCode::MeanNotZero, "negative semi-norm is only defined on mean-zero fields");
  }
  double sum = 0.0;
  for (int k = f.kmin(); k <= f.kmax(); ++k) {
    if (k == 0) continue;
    sum += std::pow(std::abs(double(k)), -2.0 * s) * std::norm(f[k]);
  }
  return std::sqrt(sum);
}

SpectralField multiply(const SpectralField& f, const SpectralField& g) {
  const int n = std::max(f.size(), g.size());
  const int points = 3 * n / 2 + (3 * n / 2) % 2;
  const auto fv = f.to_grid(points);
  const auto gv = g.to_grid(points);
  std::vector<cplx> prod(points);
  for (int j = 0; j < points; ++j) prod[j] = fv[j] * gv[j];
  SpectralField out = SpectralField::from_grid(prod, n);
  // An occupied Nyquist slot is a lone e_{-N/2}, not half of a cosine, so the
  // product is only symmetrised when both inputs leave it empty.
  const bool nyquist_free = f[f.kmin()] == cplx{} && g[g.kmin()] == cplx{};
  if (nyquist_free && f.is_real(1e-14 * l2_norm(f)) && g.is_real(1e-14 * l2_norm(g))) out.enforce_real();
  return out;
}

SpectralField convolve_exact(const SpectralField& f, const SpectralField& g) {
  const int bf = std::max(f.bandwidth(), 0);
  const int bg = std::max(g.bandwidth(), 0);
  int n = 2 * (bf + bg + 1);
  SpectralField out(n);
  for (int p = -bf; p <= bf; ++p) {
    if (f[p] == cplx{}) continue;
    for (int q = -bg; q <= bg; ++q) out.at(p + q) += f[p] * g[q];
  }
  return out;
}

SpectralField oscillate(const SpectralField& q, CellRatio ratio, int k, int n_out) {
  SpectralField out(n_out);
  const int cells = ratio.cells();
  for (int j = q.kmin(); j <= q.kmax(); ++j) {
    const cplx v = q[j];
    if (v == cplx{}) continue;
    const long w = static_cast<long>(k) + static_cast<long>(j) * cells;
    if (w < out.kmin() || w > out.kmax()) {
      throw Error(ErrorCode::ResolutionTooSmall,
                  "oscillated coefficient at wavenumber " + std::to_string(w) + " does not fit in " +
                      std::to_string(n_out) + " modes");
    }
    out.at(static_cast<int>(w)) = v;
  }
  return out;
}

cplx evaluate(const SpectralField& f, double x) {
  cplx sum{};
  for (int k = f.kmin(); k <= f.kmax(); ++k) {
    if (f[k] != cplx{}) sum += f[k] * std::polar(1.0, k * x);
  }
  return sum;
}

}  // namespace homlab
