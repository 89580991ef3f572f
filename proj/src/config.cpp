#include "scov/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace scov {
namespace {

using nlohmann::json;

struct LineCol {
  std::size_t line = 1, col = 1;
};

LineCol position_of(std::string_view text, std::size_t offset) {
  LineCol lc;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++lc.line;
      lc.col = 1;
    } else {
      ++lc.col;
    }
  }
  return lc;
}

// Schema errors are reported at the first occurrence of the offending key.
class Reader {
 public:
  Reader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  json parse() const {
    try {
      return json::parse(text_.begin(), text_.end());
    } catch (const json::parse_error& e) {
      const auto lc = position_of(text_, e.byte > 0 ? e.byte - 1 : 0);
      throw Error(Errc::BadConfig, where(lc) + ": malformed JSON: " + std::string(e.what()));
    }
  }

  [[noreturn]] void fail(std::string_view key, const std::string& msg) const {
    std::string where_str = std::string(source_);
    if (!key.empty()) {
      const std::string quoted = "\"" + std::string(key) + "\"";
      const auto at = text_.find(quoted);
      if (at != std::string_view::npos) where_str = where(position_of(text_, at));
    }
    throw Error(Errc::BadConfig, where_str + ": " + msg);
  }

  const json& require(const json& obj, const char* key, std::string_view ctx) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(ctx, "missing field \"" + std::string(key) + "\" in " + std::string(ctx));
    return *it;
  }

  void only_keys(const json& obj, std::initializer_list<const char*> allowed, std::string_view ctx) const {
    if (!obj.is_object()) fail(ctx, std::string(ctx) + " must be an object");
    for (const auto& [k, v] : obj.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) fail(k, "unknown field \"" + k + "\" in " + std::string(ctx));
    }
  }

  double number(const json& v, std::string_view key) const {
    if (!v.is_number()) fail(key, "\"" + std::string(key) + "\" must be a number");
    return v.get<double>();
  }

  std::uint64_t count(const json& v, std::string_view key) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    fail(key, "\"" + std::string(key) + "\" must be a nonnegative integer");
  }

  std::string string(const json& v, std::string_view key) const {
    if (!v.is_string()) fail(key, "\"" + std::string(key) + "\" must be a string");
    return v.get<std::string>();
  }

  std::string where(LineCol lc) const {
    return std::string(source_) + ":" + std::to_string(lc.line) + ":" + std::to_string(lc.col);
  }

 private:
  std::string_view text_;
  std::string_view source_;
};

ModelSpec model_spec(const Reader& rd, const json& j) {
  rd.only_keys(j, {"N", "S", "sigma2", "ranks", "basis", "M", "groups"}, "model");
  ModelSpec spec;
  spec.N = static_cast<std::size_t>(rd.count(rd.require(j, "N", "model"), "N"));
  spec.S = static_cast<std::size_t>(rd.count(rd.require(j, "S", "model"), "S"));
  spec.sigma2 = rd.number(rd.require(j, "sigma2", "model"), "sigma2");

  if (auto it = j.find("ranks"); it != j.end()) {
    if (!it->is_array()) rd.fail("ranks", "\"ranks\" must be an array");
    for (const auto& r : *it) spec.ranks.push_back(static_cast<std::size_t>(rd.count(r, "ranks")));
  } else {
    spec.ranks.assign(spec.N, 1);
  }
  if (spec.ranks.size() != spec.N)
    throw Error(Errc::BadRanks, "ranks has " + std::to_string(spec.ranks.size()) + " entries, N = " +
                                    std::to_string(spec.N));

  if (auto it = j.find("M"); it != j.end()) spec.M = static_cast<std::size_t>(rd.count(*it, "M"));

  if (auto it = j.find("basis"); it != j.end() && !(it->is_string() && it->get<std::string>() == "identity")) {
    if (!it->is_array() || it->empty()) rd.fail("basis", "\"basis\" must be \"identity\" or a square matrix");
    std::vector<double> flat;
    std::size_t rows = 0;
    if ((*it)[0].is_array()) {
      rows = it->size();
      for (const auto& row : *it) {
        if (!row.is_array() || row.size() != rows) rd.fail("basis", "\"basis\" must be square");
        for (const auto& v : row) flat.push_back(rd.number(v, "basis"));
      }
    } else {
      for (const auto& v : *it) flat.push_back(rd.number(v, "basis"));
      rows = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
      if (rows * rows != flat.size()) rd.fail("basis", "flat \"basis\" length is not a square");
    }
    Eigen::MatrixXd U(rows, rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < rows; ++c)
        U(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * rows + c];
    spec.basis = std::move(U);
  } else if (it != j.end() && !it->is_string()) {
    rd.fail("basis", "\"basis\" must be \"identity\" or a square matrix");
  }

  if (auto it = j.find("groups"); it != j.end()) {
    if (!it->is_array()) rd.fail("groups", "\"groups\" must be an array of index arrays");
    std::vector<std::vector<std::size_t>> groups;
    for (const auto& g : *it) {
      if (!g.is_array()) rd.fail("groups", "\"groups\" must be an array of index arrays");
      std::vector<std::size_t> cols;
      for (const auto& c : g) {
        const auto v = rd.count(c, "groups");
        if (v == 0) rd.fail("groups", "\"groups\" indices are 1-based");
        cols.push_back(static_cast<std::size_t>(v - 1));
      }
      groups.push_back(std::move(cols));
    }
    spec.groups = std::move(groups);
  }
  return spec;
}

EstimatorSpec estimator_spec(const Reader& rd, const json& j) {
  rd.only_keys(j, {"kind", "tau", "rule"}, "estimator");
  EstimatorSpec e;
  const auto kind_name = rd.string(rd.require(j, "kind", "estimator"), "kind");
  const auto kind = parse_estimator_kind(kind_name);
  if (!kind) rd.fail("kind", "unknown estimator kind \"" + kind_name + "\"");
  e.kind = *kind;
  if (auto it = j.find("tau"); it != j.end()) {
    if (e.kind != EstimatorKindTag::HardThreshold) rd.fail("tau", "\"tau\" applies to kind \"ht\" only");
    e.tau = rd.number(*it, "tau");
    if (!(e.tau >= 0.0)) rd.fail("tau", "\"tau\" must be >= 0");
  } else if (e.kind == EstimatorKindTag::HardThreshold) {
    rd.fail("kind", "estimator \"ht\" needs \"tau\"");
  }
  if (auto it = j.find("rule"); it != j.end()) {
    if (e.kind != EstimatorKindTag::MaxLikelihood) rd.fail("rule", "\"rule\" applies to kind \"ml\" only");
    const auto name = rd.string(*it, "rule");
    const auto rule = parse_ml_rule(name);
    if (!rule) rd.fail("rule", "unknown ML rule \"" + name + "\" (exact|literal)");
    e.rule = *rule;
  }
  return e;
}

}  // namespace

std::optional<EstimatorKindTag> parse_estimator_kind(std::string_view name) noexcept {
  if (name == "naive") return EstimatorKindTag::Naive;
  if (name == "ht") return EstimatorKindTag::HardThreshold;
  if (name == "ml") return EstimatorKindTag::MaxLikelihood;
  if (name == "oracle") return EstimatorKindTag::Oracle;
  if (name == "s1mvu") return EstimatorKindTag::S1Mvu;
  return std::nullopt;
}

std::optional<MlRule> parse_ml_rule(std::string_view name) noexcept {
  if (name == "exact") return MlRule::Exact;
  if (name == "literal") return MlRule::Literal;
  return std::nullopt;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::BadConfig, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SdcmModel parse_model_config(std::string_view text, std::string_view source) {
  const Reader rd(text, source);
  const json j = rd.parse();
  if (!j.is_object()) rd.fail("", "top level must be an object");
  if (auto it = j.find("model"); it != j.end()) return validate_model(model_spec(rd, *it));
  return validate_model(model_spec(rd, j));
}

SweepConfig parse_sweep_config(std::string_view text, std::string_view source) {
  const Reader rd(text, source);
  const json j = rd.parse();
  rd.only_keys(j, {"model", "j0", "snr_grid_db", "estimators", "mc", "normalize"}, "sweep");
  SweepConfig cfg{validate_model(model_spec(rd, rd.require(j, "model", "sweep"))), 0, {}, {}, McConfig{}, true};

  const auto j0 = rd.count(rd.require(j, "j0", "sweep"), "j0");
  if (j0 < 1 || j0 > cfg.model.N()) rd.fail("j0", "\"j0\" must be in [1, N] (1-based)");
  cfg.j0 = static_cast<std::size_t>(j0 - 1);

  const auto& grid = rd.require(j, "snr_grid_db", "sweep");
  if (!grid.is_array() || grid.empty()) rd.fail("snr_grid_db", "\"snr_grid_db\" must be a nonempty array");
  for (const auto& v : grid) {
    const double db = rd.number(v, "snr_grid_db");
    if (!std::isfinite(db)) rd.fail("snr_grid_db", "\"snr_grid_db\" entries must be finite");
    if (!cfg.snr_grid_db.empty() && !(db > cfg.snr_grid_db.back()))
      rd.fail("snr_grid_db", "\"snr_grid_db\" must be strictly increasing");
    cfg.snr_grid_db.push_back(db);
  }

  const auto& ests = rd.require(j, "estimators", "sweep");
  if (!ests.is_array() || ests.empty()) rd.fail("estimators", "\"estimators\" must be a nonempty array");
  for (const auto& e : ests) cfg.estimators.push_back(estimator_spec(rd, e));

  cfg.mc.n_shards = kDefaultShards;
  if (auto it = j.find("mc"); it != j.end()) {
    rd.only_keys(*it, {"n_samples", "seed", "n_shards", "fd_step"}, "mc");
    if (auto f = it->find("n_samples"); f != it->end()) cfg.mc.n_samples = rd.count(*f, "n_samples");
    if (auto f = it->find("seed"); f != it->end()) cfg.mc.seed = rd.count(*f, "seed");
    if (auto f = it->find("n_shards"); f != it->end()) cfg.mc.n_shards = static_cast<std::size_t>(rd.count(*f, "n_shards"));
    if (auto f = it->find("fd_step"); f != it->end()) cfg.mc.fd_step = rd.number(*f, "fd_step");
  }
  cfg.mc.n_shards = static_cast<std::size_t>(std::min<std::uint64_t>(cfg.mc.n_shards, cfg.mc.n_samples));
  try {
    check_mc_config(cfg.mc);
  } catch (const Error& e) {
    rd.fail("mc", e.what());
  }

  if (auto it = j.find("normalize"); it != j.end()) {
    if (!it->is_boolean()) rd.fail("normalize", "\"normalize\" must be true or false");
    cfg.normalize = it->get<bool>();
  }
  return cfg;
}

SdcmModel load_model_config(const std::filesystem::path& path) {
  return parse_model_config(read_text_file(path), path.string());
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return parse_sweep_config(read_text_file(path), path.string());
}

}  // namespace scov
