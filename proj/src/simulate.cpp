#include "scov/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace scov {
namespace {

struct Workspace {
  std::vector<double> proj;
  std::vector<double> est;
  std::vector<double> spare;
  std::vector<double> scratch;
  std::vector<std::uint32_t> words;

  Workspace(std::size_t rows, std::size_t n)
      : proj(rows * kMcBlock), est(n * kMcBlock), spare(kMcBlock), words(4 * kMcBlock) {}
};

class Runner {
 public:
  Runner(const EstimateFn& est, const SdcmModel& model, const ParamVec& x, const McConfig& cfg)
      : est_(est), model_(model), cfg_(cfg), kt_(simd::active()), N_(model.N()), R_(model.assigned_dim()) {
    if (x.size() != N_) throw Error(Errc::DimensionMismatch, "x length differs from N");
    scale_.reserve(R_);
    for (std::size_t k = 0; k < N_; ++k)
      for (std::size_t i = 0; i < model.rank(k); ++i) scale_.push_back(std::sqrt(x[k] + model.sigma2()));
    n_blocks_ = static_cast<std::size_t>((cfg.n_samples + kMcBlock - 1) / kMcBlock);
  }

  std::size_t n_blocks() const noexcept { return n_blocks_; }
  std::size_t width() const noexcept { return 4 * N_ + 4 * (N_ * (N_ - 1) / 2); }

  // Estimates of block b into ws.est (N rows of kMcBlock); returns the block length.
  std::size_t evaluate(std::size_t b, Workspace& ws) const {
    const std::uint64_t first = static_cast<std::uint64_t>(b) * kMcBlock;
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kMcBlock, cfg_.n_samples - first));
    const std::size_t B = kMcBlock;
    for (std::size_t pair = 0; 2 * pair < R_; ++pair) {
      double* z0 = ws.proj.data() + 2 * pair * B;
      double* z1 = 2 * pair + 1 < R_ ? ws.proj.data() + (2 * pair + 1) * B : ws.spare.data();
      mc_normal_pairs(kt_, cfg_.seed, static_cast<std::uint32_t>(pair), first, n, z0, z1, ws.words.data());
    }
    for (std::size_t r = 0; r < R_; ++r) kt_.affine(ws.proj.data() + r * B, scale_[r], 0.0, ws.proj.data() + r * B, n);
    if (n == B) {
      est_.evaluate_block(model_, kt_, ws.proj.data(), B, ws.est.data(), ws.scratch);
    } else {
      // Pack the short final block so rows are contiguous with stride n.
      std::vector<double> packed(R_ * n);
      for (std::size_t r = 0; r < R_; ++r) std::copy_n(ws.proj.data() + r * B, n, packed.data() + r * n);
      std::vector<double> out(N_ * n);
      est_.evaluate_block(model_, kt_, packed.data(), n, out.data(), ws.scratch);
      for (std::size_t k = 0; k < N_; ++k) std::copy_n(out.data() + k * n, n, ws.est.data() + k * B);
    }
    return n;
  }

  void reduce(std::size_t b, const std::vector<double>& shift, Workspace& ws, double* sums) const {
    const std::size_t n = evaluate(b, ws);
    const std::size_t B = kMcBlock;
    for (std::size_t k = 0; k < N_; ++k) {
      const auto ps = kt_.power_sums(ws.est.data() + k * B, shift[k], n);
      sums[4 * k + 0] = ps.s1;
      sums[4 * k + 1] = ps.s2;
      sums[4 * k + 2] = ps.s3;
      sums[4 * k + 3] = ps.s4;
    }
    double* cross = sums + 4 * N_;
    for (std::size_t j = 0; j < N_; ++j)
      for (std::size_t k = j + 1; k < N_; ++k) {
        const auto cs = kt_.cross_sums(ws.est.data() + j * B, shift[j], ws.est.data() + k * B, shift[k], n);
        cross[0] = cs.s11;
        cross[1] = cs.s21;
        cross[2] = cs.s12;
        cross[3] = cs.s22;
        cross += 4;
      }
  }

  std::size_t N() const noexcept { return N_; }
  std::size_t R() const noexcept { return R_; }

 private:
  const EstimateFn& est_;
  const SdcmModel& model_;
  const McConfig& cfg_;
  const simd::KernelTable& kt_;
  std::size_t N_;
  std::size_t R_;
  std::vector<double> scale_;
  std::size_t n_blocks_ = 0;
};

McReport finish(std::size_t N, std::uint64_t n_samples, const std::vector<double>& shift,
                const std::vector<double>& total) {
  const double n = static_cast<double>(n_samples);
  McReport rep;
  rep.n = n_samples;
  rep.mean.resize(N);
  rep.var_per_k.resize(N);
  rep.stderr_mean.resize(N);
  rep.stderr_var.resize(N);

  std::vector<double> d(N), m2(N), e2(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double s1 = total[4 * k] / n, s2 = total[4 * k + 1] / n, s3 = total[4 * k + 2] / n,
                 s4 = total[4 * k + 3] / n;
    d[k] = s1;
    e2[k] = s2;
    m2[k] = std::max(s2 - s1 * s1, 0.0);
    const double m4 = std::max(s4 - 4.0 * s1 * s3 + 6.0 * s1 * s1 * s2 - 3.0 * s1 * s1 * s1 * s1, 0.0);
    rep.mean[k] = shift[k] + s1;
    rep.var_per_k[k] = n_samples > 1 ? m2[k] * n / (n - 1.0) : 0.0;
    rep.stderr_mean[k] = std::sqrt(rep.var_per_k[k] / n);
    rep.stderr_var[k] = std::sqrt(std::max(m4 - m2[k] * m2[k], 0.0) / n);
    rep.var_total += rep.var_per_k[k];
  }

  // Var of T = sum_k (x_k - mu_k)^2 from the raw shifted moments.
  double eT = 0.0, eT2 = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    eT += m2[k];
    const double s1 = d[k], s2 = e2[k], s3 = total[4 * k + 2] / n, s4 = total[4 * k + 3] / n;
    eT2 += s4 - 4.0 * s1 * s3 + 6.0 * s1 * s1 * s2 - 3.0 * s1 * s1 * s1 * s1;
  }
  const double* cross = total.data() + 4 * N;
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t k = j + 1; k < N; ++k) {
      const double s11 = cross[0] / n, s21 = cross[1] / n, s12 = cross[2] / n, s22 = cross[3] / n;
      const double dj = d[j], dk = d[k];
      const double c22 = s22 - 2.0 * dk * s21 - 2.0 * dj * s12 + 4.0 * dj * dk * s11 + dk * dk * e2[j] +
                         dj * dj * e2[k] - 3.0 * dj * dj * dk * dk;
      eT2 += 2.0 * c22;
      cross += 4;
    }
  rep.stderr_var_total = std::sqrt(std::max(eT2 - eT * eT, 0.0) / n);
  return rep;
}

}  // namespace

std::size_t worker_count() {
  if (const char* env = std::getenv("SCOV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void check_mc_config(const McConfig& cfg) {
  if (cfg.n_samples == 0) throw Error(Errc::BadConfig, "n_samples must be >= 1");
  if (cfg.n_shards == 0 || cfg.n_shards > cfg.n_samples)
    throw Error(Errc::BadConfig, "n_shards must be in [1, n_samples]");
  if (!(cfg.fd_step > 0.0)) throw Error(Errc::BadConfig, "fd_step must be > 0");
}

Observation sample_observation(const SdcmModel& model, const ParamVec& x, NormalStream& rng) {
  if (x.size() != model.N()) throw Error(Errc::DimensionMismatch, "x length differs from N");
  const std::size_t M = model.M();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
  for (std::size_t k = 0; k < model.N(); ++k) {
    const double a = std::sqrt(x[k]);
    for (std::size_t col : model.groups()[k]) {
      const double z = rng.next();
      if (model.has_identity_basis())
        y[static_cast<Eigen::Index>(col)] += a * z;
      else
        y += (a * z) * model.basis().col(static_cast<Eigen::Index>(col));
    }
  }
  const double sigma = std::sqrt(model.sigma2());
  for (std::size_t m = 0; m < M; ++m) y[static_cast<Eigen::Index>(m)] += sigma * rng.next();
  return Observation{std::vector<double>(y.data(), y.data() + M)};
}

McReport mc_mean_variance(const EstimateFn& est, const SdcmModel& model, const ParamVec& x, const McConfig& cfg) {
  check_mc_config(cfg);
  const Runner runner(est, model, x, cfg);
  const std::size_t N = runner.N();
  const std::size_t W = runner.width();
  const std::size_t nb = runner.n_blocks();

  // Shift every component by its block-0 mean to keep the power sums small.
  std::vector<double> shift(N, 0.0);
  {
    Workspace ws(runner.R(), N);
    const std::size_t n0 = runner.evaluate(0, ws);
    for (std::size_t k = 0; k < N; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n0; ++i) s += ws.est[k * kMcBlock + i];
      shift[k] = s / static_cast<double>(n0);
    }
  }

  std::vector<double> partial(nb * W, 0.0);
  const std::size_t shards = cfg.n_shards;
  auto run_shard = [&](std::size_t s, Workspace& ws) {
    const std::size_t lo = s * nb / shards, hi = (s + 1) * nb / shards;
    for (std::size_t b = lo; b < hi; ++b) runner.reduce(b, shift, ws, partial.data() + b * W);
  };

  const std::size_t threads = std::min(worker_count(), shards);
  if (threads <= 1) {
    Workspace ws(runner.R(), N);
    for (std::size_t s = 0; s < shards; ++s) run_shard(s, ws);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          Workspace ws(runner.R(), N);
          for (std::size_t s = t; s < shards; s += threads) run_shard(s, ws);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<double> total(W, 0.0);
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t w = 0; w < W; ++w) total[w] += partial[b * W + w];
  return finish(N, cfg.n_samples, shift, total);
}

std::vector<double> mean_derivative_fd(const EstimateFn& est, const SdcmModel& model, const ParamVec& base,
                                       const MultiIndex& p, const McConfig& cfg) {
  const std::size_t N = model.N();
  if (base.size() != N || p.size() != N) throw Error(Errc::DimensionMismatch, "base or p length differs from N");
  if (p.total_order() > 2) throw Error(Errc::UnsupportedOrder, "finite differences support |p| <= 2");
  check_mc_config(cfg);

  struct Point {
    int offset;
    double weight;
  };
  struct Axis {
    std::size_t k;
    double h;
    std::vector<Point> stencil;
  };
  std::vector<Axis> axes;
  for (std::size_t k : p.support()) {
    const double h = cfg.fd_step * (1.0 + base[k]);
    const bool central = base[k] >= h;
    std::vector<Point> st;
    if (p[k] == 1)
      st = central ? std::vector<Point>{{-1, -0.5}, {1, 0.5}} : std::vector<Point>{{0, -1.5}, {1, 2.0}, {2, -0.5}};
    else
      st = central ? std::vector<Point>{{-1, 1.0}, {0, -2.0}, {1, 1.0}}
                   : std::vector<Point>{{0, 2.0}, {1, -5.0}, {2, 4.0}, {3, -1.0}};
    const double scale = std::pow(h, static_cast<double>(p[k]));
    for (auto& pt : st) pt.weight /= scale;
    axes.push_back({k, h, std::move(st)});
  }

  std::vector<double> out(N, 0.0);
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    std::vector<double> x = base.entries();
    double w = 1.0;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& pt = axes[a].stencil[idx[a]];
      x[axes[a].k] = base[axes[a].k] + pt.offset * axes[a].h;
      w *= pt.weight;
    }
    const auto rep = mc_mean_variance(est, model, ParamVec(std::move(x)), cfg);
    for (std::size_t k = 0; k < N; ++k) out[k] += w * rep.mean[k];

    std::size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++idx[a] < axes[a].stencil.size()) break;
      idx[a] = 0;
    }
    if (a == axes.size()) break;
  }
  return out;
}

}  // namespace scov
