#include "homlab/spde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "homlab/errors.hpp"
#include "homlab/kernels.hpp"
#include "homlab/rng.hpp"

namespace homlab {

namespace {

constexpr double kOverflowGuard = 1e12;

struct ClassState {
  int residue = 0;
  int size = 0;
  // propagator, split and column-major for the kernels
  std::vector<double> p_re, p_im;
  std::vector<int> forced;
  CMatrix noise;
};

struct WatchSlot {
  int cls = 0;
  int pos = 0;
  bool conjugate = false;
};

int residue(int w, int n) { return ((w % n) + n) % n; }

}  // namespace

const std::vector<cplx>& PathOutput::mode(int m) const {
  for (std::size_t i = 0; i < watch.size(); ++i)
    if (watch[i] == m) return modes[i];
  throw Error(ErrorCode::InvalidConfig, "mode " + std::to_string(m) + " was not recorded");
}

struct PathSimulator::Impl {
  SolverConfig config;
  BlockOperator op;
  long steps = 0;
  double h = 0.0;
  std::vector<ClassState> classes;
  std::vector<double> energy_weight;
  std::vector<WatchSlot> slots;
  const kernels::Table* kern = nullptr;

  Impl(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& cfg) : config(cfg) {
    validate(c, spec, cfg);
    const int n = cfg.ratio.cells();
    std::set<int> sim;
    if (cfg.all_classes) {
      for (int r = 0; r < n; ++r) sim.insert(r);
    } else {
      if (cfg.record_energy)
        for (int r = 0; r <= n / 2; ++r) sim.insert(r);
      for (int m : cfg.watch)
        if (!sim.count(residue(m, n)) && !sim.count(residue(-m, n))) sim.insert(residue(m, n));
    }
    op = build_blocks(c, spec, cfg, std::vector<int>(sim.begin(), sim.end()));
    steps = cfg.steps();
    h = cfg.step();
    kern = &kernels::active();

    for (const auto& b : op.blocks) {
      ClassState s;
      s.residue = b.residue;
      s.size = static_cast<int>(b.wavenumbers.size());
      const CMatrix p = cfg.scheme == Scheme::BlockExponential ? exponential_propagator(b.a, h)
                                                               : trapezoid_propagator(b.a, h);
      s.p_re.resize(p.size());
      s.p_im.resize(p.size());
      for (Eigen::Index j = 0; j < p.cols(); ++j)
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
          s.p_re[j * p.rows() + i] = p(i, j).real();
          s.p_im[j * p.rows() + i] = p(i, j).imag();
        }
      s.forced = b.forced;
      s.noise = b.noise;
      classes.push_back(std::move(s));
      const int conj_r = residue(n - b.residue, n);
      energy_weight.push_back(conj_r == b.residue || sim.count(conj_r) ? 1.0 : 2.0);
    }
    for (int m : cfg.watch) {
      WatchSlot slot;
      const int r = residue(m, n);
      const int target = sim.count(r) ? m : -m;
      slot.conjugate = target != m;
      for (std::size_t i = 0; i < op.blocks.size(); ++i) {
        if (op.blocks[i].residue == residue(target, n)) {
          slot.cls = static_cast<int>(i);
          slot.pos = op.blocks[i].position(target);
        }
      }
      slots.push_back(slot);
    }
  }

  std::pair<PathOutput, PathOutput> run(std::uint64_t path, const LimitDrive* limit) const {
    const CounterStream stream(config.seed, path);
    const std::size_t nw = config.watch.size();
    std::vector<std::vector<double>> xr(classes.size()), xi(classes.size()), vr(classes.size()), vi(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
      xr[c].assign(classes[c].size, 0.0);
      xi[c].assign(classes[c].size, 0.0);
      vr[c].assign(classes[c].size, 0.0);
      vi[c].assign(classes[c].size, 0.0);
    }
    std::vector<double> decay(nw), cre(nw), cim(nw), wre(nw), wim(nw), lre(nw, 0.0), lim(nw, 0.0);
    if (limit) {
      for (std::size_t i = 0; i < nw; ++i) {
        const double m = config.watch[i];
        decay[i] = std::exp(-limit->mu * m * m * h);
        cre[i] = limit->coefficient[i].real();
        cim[i] = limit->coefficient[i].imag();
      }
    }

    PathOutput out, lim_out;
    for (PathOutput* o : {&out, &lim_out}) {
      o->watch = config.watch;
      o->modes.assign(nw, {});
      o->seed = config.seed;
      o->path = path;
    }
    auto record = [&](long step) {
      const double t = step * h;
      out.times.push_back(t);
      for (std::size_t i = 0; i < nw; ++i) {
        const auto& s = slots[i];
        const cplx v(xr[s.cls][s.pos], xi[s.cls][s.pos]);
        out.modes[i].push_back(s.conjugate ? std::conj(v) : v);
      }
      if (config.record_energy) {
        double e = 0.0;
        for (std::size_t c = 0; c < classes.size(); ++c) {
          double sq = 0.0;
          for (int j = 0; j < classes[c].size; ++j) sq += xr[c][j] * xr[c][j] + xi[c][j] * xi[c][j];
          e += energy_weight[c] * sq;
        }
        out.energy.push_back(e);
      }
      if (limit) {
        lim_out.times.push_back(t);
        for (std::size_t i = 0; i < nw; ++i) lim_out.modes[i].push_back(cplx(lre[i], lim[i]));
      }
    };

    record(0);
    for (long step = 0; step < steps; ++step) {
      for (std::size_t c = 0; c < classes.size(); ++c) {
        const ClassState& s = classes[c];
        auto& x_re = xr[c];
        auto& x_im = xi[c];
        auto& v_re = vr[c];
        auto& v_im = vi[c];
        const bool pre = config.scheme == Scheme::BlockExponential;
        if (pre) {
          v_re = x_re;
          v_im = x_im;
        }
        auto& dst_re = pre ? v_re : x_re;
        auto& dst_im = pre ? v_im : x_im;
        if (!pre) {
          kern->cgemv(s.size, s.size, s.p_re.data(), s.p_im.data(), s.size, x_re.data(), x_im.data(), v_re.data(),
                      v_im.data());
          std::swap(x_re, v_re);
          std::swap(x_im, v_im);
        }
        for (std::size_t j = 0; j < s.forced.size(); ++j) {
          const cplx dw = wiener_increment(stream, static_cast<std::uint64_t>(step), s.forced[j], h);
          for (int i = 0; i < s.size; ++i) {
            const cplx g = s.noise(i, static_cast<Eigen::Index>(j));
            if (g == 0.0) continue;
            const cplx add = g * dw;
            dst_re[i] += add.real();
            dst_im[i] += add.imag();
          }
        }
        if (pre) {
          kern->cgemv(s.size, s.size, s.p_re.data(), s.p_im.data(), s.size, v_re.data(), v_im.data(), x_re.data(),
                      x_im.data());
        }
        for (int i = 0; i < s.size; ++i) {
          if (!(std::abs(x_re[i]) < kOverflowGuard && std::abs(x_im[i]) < kOverflowGuard)) {
            throw Error(ErrorCode::UnstableStep, "mode amplitude exceeded 1e12 at step " + std::to_string(step));
          }
        }
      }
      if (limit) {
        for (std::size_t i = 0; i < nw; ++i) {
          const cplx dw = wiener_increment(stream, static_cast<std::uint64_t>(step), config.watch[i], h);
          wre[i] = dw.real();
          wim[i] = dw.imag();
        }
        kern->ou_update(static_cast<int>(nw), decay.data(), cre.data(), cim.data(), wre.data(), wim.data(),
                        lre.data(), lim.data());
      }
      if ((step + 1) % config.record_stride == 0 || step + 1 == steps) record(step + 1);
    }
    return {std::move(out), std::move(lim_out)};
  }
};

PathSimulator::PathSimulator(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config)
    : impl_(std::make_unique<Impl>(c, spec, config)) {}
PathSimulator::~PathSimulator() = default;
PathSimulator::PathSimulator(PathSimulator&&) noexcept = default;

PathOutput PathSimulator::run(std::uint64_t path) const { return impl_->run(path, nullptr).first; }

std::pair<PathOutput, PathOutput> PathSimulator::run_coupled(std::uint64_t path, const LimitDrive& limit) const {
  if (limit.coefficient.size() != impl_->config.watch.size()) {
    throw Error(ErrorCode::InvalidConfig, "one limit coefficient per watched mode is required");
  }
  return impl_->run(path, &limit);
}

const BlockOperator& PathSimulator::op() const { return impl_->op; }
const SolverConfig& PathSimulator::config() const { return impl_->config; }

PathOutput simulate_path(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config,
                         std::uint64_t path_index) {
  return PathSimulator(c, spec, config).run(path_index);
}

std::pair<PathOutput, PathOutput> simulate_coupled(const Coefficients& c, const NoiseSpec& spec,
                                                   const SolverConfig& config, std::uint64_t path_index) {
  const CellSolution cell = solve_cell(c);
  LimitDrive drive;
  drive.mu = cell.mu;
  for (int m : config.watch) drive.coefficient.push_back(coeff_thm1(spec, cell.rho, m));
  return PathSimulator(c, spec, config).run_coupled(path_index, drive);
}

namespace {

// e^w - 1 without cancellation for small |w|.
cplx expm1c(cplx w) {
  const double x = w.real(), y = w.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

// sum_{k<n} a^k with a = (1 + z) / (1 - z) = e^L.
cplx geometric(cplx z, long n) {
  if (z == 0.0) return double(n);
  const cplx l = 2.0 * std::atanh(z);
  const cplx den = expm1c(l);
  if (std::abs(den) == 0.0) return double(n);
  return expm1c(double(n) * l) / den;
}

class EigenLyapunov {
 public:
  EigenLyapunov(const CMatrix& a, const CMatrix& g) {
    Eigen::ComplexEigenSolver<CMatrix> es(a);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::SolveFailed, "eigendecomposition failed");
    v_ = es.eigenvectors();
    d_ = es.eigenvalues();
    Eigen::PartialPivLU<CMatrix> lu(v_);
    const CMatrix vinv = lu.inverse();
    condition_ = v_.norm() * vinv.norm();
    const CMatrix w = vinv * g;
    f_ = w * w.adjoint();
  }

  double condition() const { return condition_; }

  /// Diagonal entry p of S after n trapezoid steps of length h.
  double variance(int p, double h, long n) const {
    const Eigen::Index b = d_.size();
    cplx total = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) {
      for (Eigen::Index i = 0; i < b; ++i) {
        if (f_(i, j) == 0.0) continue;
        const cplx z = 0.5 * h * (d_[i] + std::conj(d_[j]));
        const cplx x = h * f_(i, j) / (1.0 - z) * geometric(z, n);
        total += v_(p, i) * x * std::conj(v_(p, j));
      }
    }
    return total.real();
  }

 private:
  CMatrix v_;
  CVector d_;
  CMatrix f_;
  double condition_ = 0.0;
};

// vec(S) recursion (I - h/2 K) s' = (I + h/2 K) s + h vec(G G^H), K = I (x) A + conj(A) (x) I,
// applied n times to s = 0 by repeated squaring.
double direct_variance(const CMatrix& a, const CMatrix& g, int p, double h, long n) {
  const Eigen::Index b = a.rows();
  const Eigen::Index bb = b * b;
  CMatrix k = CMatrix::Zero(bb, bb);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < b; ++i)
      for (Eigen::Index l = 0; l < b; ++l) {
        k(i + b * j, l + b * j) += a(i, l);
        k(i + b * j, i + b * l) += std::conj(a(j, l));
      }
  const CMatrix id = CMatrix::Identity(bb, bb);
  Eigen::PartialPivLU<CMatrix> lu(id - 0.5 * h * k);
  CMatrix step = lu.solve(id + 0.5 * h * k);
  const CMatrix q = g * g.adjoint();
  CVector qv(bb);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < b; ++i) qv[i + b * j] = q(i, j);
  CVector shift = lu.solve(h * qv);
  CVector s = CVector::Zero(bb);
  for (long m = n; m > 0; m >>= 1) {
    if (m & 1) s = step * s + shift;
    if (m > 1) {
      shift = step * shift + shift;
      step = step * step;
    }
  }
  return s[p + b * p].real();
}

}  // namespace

CovarianceTable exact_mode_covariance(const Coefficients& c, const NoiseSpec& spec, const SolverConfig& config,
                                      const std::vector<double>& t_grid, const CovarianceOptions& opt) {
  validate(c, spec, config);
  const int n = config.ratio.cells();
  std::vector<int> residues;
  for (int m : config.watch) {
    const int r = residue(m, n), rc = residue(-m, n);
    if (std::find(residues.begin(), residues.end(), r) == residues.end() &&
        std::find(residues.begin(), residues.end(), rc) == residues.end())
      residues.push_back(r);
  }
  const BlockOperator op = build_blocks(c, spec, config, residues);
  const double h = config.step();

  CovarianceTable table;
  table.times = t_grid;
  table.watch = config.watch;
  for (int m : config.watch) {
    int target = m;
    const ClassBlock* blk = nullptr;
    for (const auto& b : op.blocks) {
      if (b.residue == residue(m, n)) blk = &b;
    }
    if (!blk) {
      target = -m;  // Var <u, e_m> = Var <u, e_{-m}> for a real field
      blk = &op.block(residue(-m, n));
    }
    const int p = blk->position(target);
    std::vector<double> row;
    std::unique_ptr<EigenLyapunov> eig;
    if (!opt.force_direct) {
      eig = std::make_unique<EigenLyapunov>(blk->a, blk->noise);
      if (!(eig->condition() <= opt.max_condition)) eig.reset();
    }
    for (double t : t_grid) {
      if (t < 0.0) throw Error(ErrorCode::InvalidConfig, "negative time in covariance grid");
      if (t == 0.0) {
        row.push_back(0.0);
        continue;
      }
      const long steps = std::max(1L, std::lround(std::ceil(t / h - 1e-9)));
      const double ht = t / static_cast<double>(steps);
      const double v = eig ? eig->variance(p, ht, steps) : direct_variance(blk->a, blk->noise, p, ht, steps);
      if (!std::isfinite(v) || std::abs(v) > kOverflowGuard * kOverflowGuard) {
        throw Error(ErrorCode::UnstableStep, "covariance recursion diverged");
      }
      row.push_back(v);
    }
    table.variance.push_back(std::move(row));
  }
  return table;
}

}  // namespace homlab
