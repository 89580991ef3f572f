#include "scov/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <utility>

#include "scov/bounds.hpp"
#include "scov/kernel.hpp"
#include "scov/philox.hpp"
#include "scov/simulate.hpp"

namespace scov {
namespace {

// gamma_k(x0), gamma_k(x0^K) and d gamma_k / dx_k at x0^K.
struct MeanValues {
  double at_x0;
  double at_base;
  double slope;
};

class MlMeans {
 public:
  MlMeans(const EstimateFn& est, const SdcmModel& model, const McConfig& mc) : est_(est), model_(model), mc_(mc) {}

  const std::vector<double>& get(const ParamVec& base, const MultiIndex& p) {
    auto key = std::make_pair(base.entries(), p);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, mean_derivative_fd(est_, model_, base, p, mc_)).first;
    return it->second;
  }

 private:
  const EstimateFn& est_;
  const SdcmModel& model_;
  const McConfig& mc_;
  std::map<std::pair<std::vector<double>, MultiIndex>, std::vector<double>> cache_;
};

std::string cell_label(double snr_db, const EstimateFn& est) {
  std::string s = "snr_db=" + format_float(snr_db) + " estimator=" + est.name();
  if (auto t = est.tau()) s += " tau=" + format_float(*t);
  return s;
}

}  // namespace

ParamVec sweep_anchor(const SweepConfig& cfg, double snr_db) {
  const double xi0 = cfg.model.sigma2() * std::pow(10.0, snr_db / 10.0);
  return ParamVec::zeros(cfg.model.N()).with(cfg.j0, xi0);
}

double sweep_normalizer(const SweepConfig& cfg, double snr_db) {
  const ParamVec x0 = sweep_anchor(cfg, snr_db);
  const double v = x0[cfg.j0] + cfg.model.sigma2();
  return 2.0 / static_cast<double>(cfg.model.rank(cfg.j0)) * v * v;
}

EstimateFn make_estimator(const SweepConfig& cfg, const EstimatorSpec& spec, const ParamVec& x0) {
  switch (spec.kind) {
    case EstimatorKindTag::Naive: return EstimateFn(cfg.model, Naive{});
    case EstimatorKindTag::HardThreshold: return EstimateFn(cfg.model, HardThreshold{spec.tau});
    case EstimatorKindTag::MaxLikelihood: return EstimateFn(cfg.model, MaxLikelihood{spec.rule});
    case EstimatorKindTag::Oracle: return EstimateFn(cfg.model, Oracle{x0.support()});
    case EstimatorKindTag::S1Mvu: return EstimateFn(cfg.model, S1Mvu{x0});
  }
  throw Error(Errc::BadConfig, "unknown estimator kind");
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg, std::vector<std::string>* warnings) {
  const SdcmModel& model = cfg.model;
  const std::size_t N = model.N();
  std::vector<SweepRow> rows;
  rows.reserve(cfg.snr_grid_db.size() * cfg.estimators.size());

  for (double snr : cfg.snr_grid_db) {
    const ParamVec x0 = sweep_anchor(cfg, snr);
    const KernelContext ctx(model, x0);
    const double norm = sweep_normalizer(cfg, snr);

    for (const auto& spec : cfg.estimators) {
      const EstimateFn est = make_estimator(cfg, spec, x0);
      try {
        const McReport rep = mc_mean_variance(est, model, x0, cfg.mc);
        std::optional<MlMeans> ml;
        if (spec.kind == EstimatorKindTag::MaxLikelihood) ml.emplace(est, model, cfg.mc);

        double bound = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
          const IndexSet K = unbiased_index_set(x0, k, model.S());
          const ParamVec base = restrict_support(x0, K, model.S());
          MeanValues mv{};
          switch (spec.kind) {
            case EstimatorKindTag::Naive:
            case EstimatorKindTag::S1Mvu: mv = {x0[k], base[k], 1.0}; break;
            case EstimatorKindTag::Oracle: {
              const bool in = x0[k] != 0.0;
              mv = in ? MeanValues{x0[k], base[k], 1.0} : MeanValues{0.0, 0.0, 0.0};
              break;
            }
            case EstimatorKindTag::HardThreshold:
              mv = {ht_mean(model, x0, spec.tau, k), ht_mean(model, base, spec.tau, k),
                    ht_mean_derivative(model, base, spec.tau, k)};
              break;
            case EstimatorKindTag::MaxLikelihood:
              mv = {rep.mean[k], ml->get(base, MultiIndex::zero(N))[k], ml->get(base, MultiIndex::unit(N, k))[k]};
              break;
          }
          MeanSpec mean;
          mean.gamma_at_x0 = mv.at_x0;
          mean.derivs[MultiIndex::zero(N)] = mv.at_base;
          mean.derivs[MultiIndex::unit(N, k)] = mv.slope;
          bound += theorem_bound({ctx, K, {MultiIndex::zero(N), MultiIndex::unit(N, k)}, mean}).value;
        }

        SweepRow row;
        row.snr_db = snr;
        row.estimator = est.name();
        row.tau = est.tau();
        row.variance = rep.var_total;
        row.variance_stderr = rep.stderr_var_total;
        row.bound = bound;
        if (cfg.normalize) {
          row.normalized_variance = rep.var_total / norm;
          row.normalized_bound = bound / norm;
        }
        row.n_samples = cfg.mc.n_samples;
        row.seed = cfg.mc.seed;
        if (warnings && row.bound > row.variance + 3.0 * row.variance_stderr)
          warnings->push_back(cell_label(snr, est) + ": bound " + format_float(row.bound) + " exceeds variance " +
                              format_float(row.variance) + " + 3 stderr " + format_float(row.variance_stderr));
        rows.push_back(std::move(row));
      } catch (const Error& e) {
        throw Error(e.code(), cell_label(snr, est) + ": " + e.what());
      }
    }
  }
  return rows;
}

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kCsvHeader << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_float(*v) : std::string(); };
  for (const auto& r : rows) {
    out << format_float(r.snr_db) << ',' << r.estimator << ',' << opt(r.tau) << ',' << format_float(r.variance) << ','
        << format_float(r.variance_stderr) << ',' << format_float(r.bound) << ',' << opt(r.normalized_variance) << ','
        << opt(r.normalized_bound) << ',' << r.n_samples << ',' << r.seed << '\n';
  }
}

void write_meta(std::ostream& out, const SweepConfig& cfg) {
  out << "{\n"
      << "  \"rng\": \"" << kRngAlgorithm << "\",\n"
      << "  \"seed\": " << cfg.mc.seed << ",\n"
      << "  \"n_samples\": " << cfg.mc.n_samples << ",\n"
      << "  \"block_size\": " << kMcBlock << ",\n"
      << "  \"fd_step\": " << format_float(cfg.mc.fd_step) << ",\n"
      << "  \"normalize\": " << (cfg.normalize ? "true" : "false") << "\n"
      << "}\n";
}

}  // namespace scov
