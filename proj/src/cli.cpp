#include "scov/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "scov/bounds.hpp"
#include "scov/config.hpp"
#include "scov/estimators.hpp"
#include "scov/kernel.hpp"
#include "scov/sweep.hpp"

namespace scov {
namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double parse_real(std::string_view s, std::string_view what) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Errc::BadConfig, "cannot parse '" + std::string(s) + "' as a number in " + std::string(what));
  return v;
}

// Comma- and/or whitespace-separated reals.
std::vector<double> parse_reals(std::string_view s, std::string_view what) {
  std::vector<double> out;
  std::string tok;
  auto flush = [&] {
    if (!tok.empty()) out.push_back(parse_real(tok, what));
    tok.clear();
  };
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c)))
      flush();
    else
      tok += c;
  }
  flush();
  return out;
}

std::size_t parse_index(double v, std::size_t n, std::string_view what) {
  if (v != static_cast<double>(static_cast<long long>(v)) || v < 1 || v > static_cast<double>(n))
    throw Error(Errc::IndexOutOfRange,
                std::string(what) + " index " + fmt(v) + " outside [1, " + std::to_string(n) + "]");
  return static_cast<std::size_t>(v) - 1;
}

IndexSet parse_index_set(std::string_view s, std::size_t n, std::string_view what) {
  IndexSet K;
  for (double v : parse_reals(s, what)) K.push_back(parse_index(v, n, what));
  std::sort(K.begin(), K.end());
  return K;
}

ParamVec parse_point(const std::string& s, const SdcmModel& model, std::string_view what) {
  if (s.empty()) return ParamVec::zeros(model.N());
  auto v = parse_reals(s, what);
  if (v.size() != model.N())
    throw Error(Errc::DimensionMismatch,
                std::string(what) + " has " + std::to_string(v.size()) + " entries, N = " + std::to_string(model.N()));
  return ParamVec(std::move(v));
}

// "p_1,...,p_N=value"
std::pair<MultiIndex, double> parse_multi(const std::string& s, std::size_t n) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw Error(Errc::BadConfig, "--multi expects 'p1,...,pN=value', got '" + s + "'");
  std::vector<unsigned> orders;
  for (double v : parse_reals(std::string_view(s).substr(0, eq), "--multi")) {
    if (v < 0 || v != static_cast<double>(static_cast<unsigned>(v)))
      throw Error(Errc::BadConfig, "--multi orders must be nonnegative integers");
    orders.push_back(static_cast<unsigned>(v));
  }
  if (orders.size() != n) throw Error(Errc::DimensionMismatch, "--multi needs N = " + std::to_string(n) + " orders");
  return {MultiIndex(std::move(orders)), parse_real(std::string_view(s).substr(eq + 1), "--multi")};
}

struct KernelArgs {
  std::string config, x0, x1, x2, form = "sdcm";
};

struct BoundArgs {
  std::string config, x0, K;
  double k = 0;
  bool unbiased = false;
  bool via_theorem = false;
  std::vector<std::string> multis;
  double gamma0 = 0.0;
};

struct EstimateArgs {
  std::string config, estimator = "naive", ml_rule = "exact", supp, x0, y, y_file;
  std::optional<double> tau;
};

struct SweepArgs {
  std::string config, out, meta;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_kernel(const KernelArgs& a, std::ostream& out) {
  const SdcmModel model = load_model_config(a.config);
  const KernelContext ctx(model, parse_point(a.x0, model, "--x0"));
  const ParamVec x1 = parse_point(a.x1, model, "--x1");
  const ParamVec x2 = parse_point(a.x2, model, "--x2");
  const double r = a.form == "general" ? kernel_general(ctx, x1.values(), x2.values())
                                       : kernel_sdcm(ctx, x1.values(), x2.values());
  out << fmt(r) << '\n';
  return kExitOk;
}

int run_bound(const BoundArgs& a, std::ostream& out) {
  const SdcmModel model = load_model_config(a.config);
  const std::size_t N = model.N();
  const ParamVec x0 = parse_point(a.x0, model, "--x0");
  if (a.unbiased) {
    const std::size_t k = parse_index(a.k, N, "--k");
    if (!a.via_theorem) {
      out << fmt(corollary_unbiased_bound(model, x0, k)) << '\n';
      return kExitOk;
    }
    const IndexSet K = unbiased_index_set(x0, k, model.S());
    const BoundRequest req{KernelContext(model, x0), K, {MultiIndex::zero(N), MultiIndex::unit(N, k)},
                           unbiased_mean_spec(x0, K, k)};
    out << fmt(theorem_bound(req).value) << '\n';
    return kExitOk;
  }
  if (a.K.empty() || a.multis.empty())
    throw Error(Errc::BadConfig, "theorem bound needs --K and at least one --multi (or use --unbiased)");
  BoundRequest req{KernelContext(model, x0), parse_index_set(a.K, N, "--K"), {}, {}};
  req.mean.gamma_at_x0 = a.gamma0;
  for (const auto& s : a.multis) {
    auto [p, v] = parse_multi(s, N);
    req.multis.push_back(p);
    req.mean.derivs[p] = v;
  }
  out << fmt(theorem_bound(req).value) << '\n';
  return kExitOk;
}

int run_estimate(const EstimateArgs& a, std::ostream& out, std::istream& in) {
  const SdcmModel model = load_model_config(a.config);
  std::string text;
  if (!a.y.empty()) {
    text = a.y;
  } else if (!a.y_file.empty()) {
    text = read_text_file(a.y_file);
  } else {
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  const Observation y{parse_reals(text, "observation")};

  const auto kind = parse_estimator_kind(a.estimator);
  if (!kind) throw Error(Errc::BadConfig, "unknown estimator '" + a.estimator + "'");
  const auto rule = parse_ml_rule(a.ml_rule);
  if (!rule) throw Error(Errc::BadConfig, "unknown ML rule '" + a.ml_rule + "' (exact|literal)");

  EstimatorKind k;
  switch (*kind) {
    case EstimatorKindTag::Naive: k = Naive{}; break;
    case EstimatorKindTag::HardThreshold:
      if (!a.tau) throw Error(Errc::BadConfig, "ht needs --tau");
      k = HardThreshold{*a.tau};
      break;
    case EstimatorKindTag::MaxLikelihood: k = MaxLikelihood{*rule}; break;
    case EstimatorKindTag::Oracle: k = Oracle{parse_index_set(a.supp, model.N(), "--supp")}; break;
    case EstimatorKindTag::S1Mvu:
      if (a.x0.empty()) throw Error(Errc::BadConfig, "s1mvu needs --x0");
      k = S1Mvu{parse_point(a.x0, model, "--x0")};
      break;
  }
  const auto xhat = estimate(EstimateFn(model, std::move(k)), model, y);
  for (std::size_t i = 0; i < xhat.size(); ++i) out << (i ? "," : "") << fmt(xhat[i]);
  out << '\n';
  return kExitOk;
}

int run_sweep_cmd(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  SweepConfig cfg = load_sweep_config(a.config);
  if (a.n_samples > 0) {
    cfg.mc.n_samples = a.n_samples;
    cfg.mc.n_shards = static_cast<std::size_t>(std::min<std::uint64_t>(cfg.mc.n_shards, a.n_samples));
  }
  if (a.seed_set) cfg.mc.seed = a.seed;

  std::vector<std::string> warnings;
  const auto rows = run_sweep(cfg, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';

  if (a.out.empty()) {
    write_csv(out, rows);
  } else {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw Error(Errc::BadConfig, "cannot write " + a.out);
    write_csv(f, rows);
  }
  const std::string meta = !a.meta.empty() ? a.meta : (a.out.empty() ? std::string() : a.out + ".meta.json");
  if (!meta.empty()) {
    std::ofstream f(meta, std::ios::binary);
    if (!f) throw Error(Errc::BadConfig, "cannot write " + meta);
    write_meta(f, cfg);
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Variance bounds and estimators for sparse diagonalizable covariance models", "scov"};
  app.require_subcommand(1);

  KernelArgs ka;
  auto* kernel = app.add_subcommand("kernel", "Evaluate the reproducing kernel R(x1, x2) at anchor x0");
  kernel->add_option("--config", ka.config, "Model config (JSON)")->required();
  kernel->add_option("--x0", ka.x0, "Anchor, comma separated (default 0)");
  kernel->add_option("--x1", ka.x1, "First point")->required();
  kernel->add_option("--x2", ka.x2, "Second point")->required();
  kernel->add_option("--form", ka.form, "sdcm (closed form) or general (determinants)")
      ->check(CLI::IsMember({"sdcm", "general"}));

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "Variance lower bound at x0");
  bound->add_option("--config", ba.config, "Model config (JSON)")->required();
  bound->add_option("--x0", ba.x0, "Anchor, comma separated")->required();
  bound->add_option("--k", ba.k, "Component (1-based), with --unbiased");
  bound->add_flag("--unbiased", ba.unbiased, "Closed-form bound for unbiased estimation of x_k");
  bound->add_flag("--via-theorem", ba.via_theorem, "With --unbiased: evaluate through the general bound");
  bound->add_option("--K", ba.K, "Index set (1-based), comma separated");
  bound->add_option("--multi", ba.multis, "Multi-index and mean derivative, 'p1,...,pN=value' (repeatable)");
  bound->add_option("--gamma0", ba.gamma0, "Mean function value at x0");

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Apply an estimator to one observation");
  est->add_option("--config", ea.config, "Model config (JSON)")->required();
  est->add_option("--estimator", ea.estimator, "naive|ht|ml|oracle|s1mvu")
      ->check(CLI::IsMember({"naive", "ht", "ml", "oracle", "s1mvu"}));
  est->add_option("--tau", ea.tau, "Hard threshold");
  est->add_option("--ml-rule", ea.ml_rule, "exact|literal")->check(CLI::IsMember({"exact", "literal"}));
  est->add_option("--supp", ea.supp, "Oracle support (1-based), comma separated");
  est->add_option("--x0", ea.x0, "Anchor for s1mvu");
  est->add_option("--y", ea.y, "Observation, comma separated (default: read stdin)");
  est->add_option("--y-file", ea.y_file, "File holding the observation");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Variance and bound versus SNR, as CSV");
  sweep->add_option("--config", sa.config, "Sweep config (JSON)")->required();
  sweep->add_option("--out", sa.out, "CSV path (default stdout)");
  sweep->add_option("--meta", sa.meta, "Metadata JSON path (default <out>.meta.json)");
  sweep->add_option("--n-samples", sa.n_samples, "Override mc.n_samples");
  auto* seed_opt = sweep->add_option("--seed", sa.seed, "Override mc.seed");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitConfig;
  }
  sa.seed_set = seed_opt->count() > 0;

  try {
    if (kernel->parsed()) return run_kernel(ka, out);
    if (bound->parsed()) return run_bound(ba, out);
    if (est->parsed()) return run_estimate(ea, out, in);
    if (sweep->parsed()) return run_sweep_cmd(sa, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_config_error(e.code()) ? kExitConfig : kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace scov
