#include "lossdev/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "lossdev/cgf.hpp"
#include "lossdev/counterexample.hpp"
#include "lossdev/csv.hpp"
#include "lossdev/exact.hpp"
#include "lossdev/legendre.hpp"
#include "lossdev/mc.hpp"
#include "lossdev/model.hpp"
#include "lossdev/moderate.hpp"

namespace lossdev {

namespace {

using Manifest = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by `validate` when the model is readable but inadmissible.
class ViolationsFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSource {
  std::string path;
  std::string text;
  std::string sha256;
};

ModelSource read_model_file(const std::string& path) {
  if (path.empty()) throw UsageError("--model is required");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  ModelSource src{path, buf.str(), {}};
  src.sha256 = sha256_hex(src.text);
  return src;
}

std::vector<double> linspace(double lo, double hi, std::size_t points) {
  if (points < 1) throw UsageError("--points must be >= 1");
  std::vector<double> out(points);
  for (std::size_t k = 0; k < points; ++k) {
    out[k] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return out;
}

MixtureCgf mixture_for(const PortfolioModel& model, std::uint64_t n) {
  if (n > 0) return empirical_mixture(model, n);
  if (!model.is_weighted()) throw UsageError("assigned-regime models need --n (finite-n empirical CGF)");
  return limit_mixture(model);
}

struct CgfArgs {
  std::string model;
  double lambda_min = -5.0;
  double lambda_max = 5.0;
  std::size_t points = 101;
  std::uint64_t n = 0;
};

struct RateArgs {
  std::string model;
  std::vector<double> x;
  std::optional<double> x_min;
  std::optional<double> x_max;
  std::size_t points = 51;
  std::uint64_t n = 0;
};

struct BoundArgs {
  std::string model;
  std::vector<double> x;
  double lambda_min = 0.0;
  double lambda_max = 20.0;
  std::size_t lambda_points = 2001;
  std::vector<std::uint64_t> checkpoints;
};

struct ExactArgs {
  std::string model;
  std::uint64_t n = 0;
  std::vector<double> x;
  bool strict = false;
};

struct McArgs {
  std::string model;
  std::uint64_t n = 0;
  double x = 0.0;
  std::uint64_t samples = 100000;
  std::uint64_t seed = kDefaultSeed;
  bool tilted = false;
  bool strict = false;
};

struct MdpArgs {
  std::string model;
  double c = 1.0;
  double alpha = 0.25;
  std::uint64_t n = 0;
};

struct CounterexampleArgs {
  std::uint64_t growth = 10;
  std::size_t depth = 6;
  double x = 0.5;
};

struct ValidateArgs {
  std::string model;
};

struct Output {
  std::string csv;
  Manifest parameters = Manifest::object();
  std::optional<ModelSource> source;
  std::optional<std::uint64_t> seed;
};

Output run_cgf(const CgfArgs& a) {
  Output o;
  o.source = read_model_file(a.model);
  const auto loaded = load_model(o.source->text);
  const auto mixture = mixture_for(loaded.model, a.n);
  std::vector<CgfPoint> points;
  for (double l : linspace(a.lambda_min, a.lambda_max, a.points)) points.push_back(mixture(l));
  o.csv = emit_curve(std::span<const CgfPoint>(points)).str();
  o.parameters = {{"lambda_min", a.lambda_min}, {"lambda_max", a.lambda_max}, {"points", a.points}, {"n", a.n}};
  return o;
}

Output run_rate(const RateArgs& a) {
  Output o;
  o.source = read_model_file(a.model);
  const auto loaded = load_model(o.source->text);
  const auto mixture = mixture_for(loaded.model, a.n);
  std::vector<double> xs = a.x;
  if (a.x_min || a.x_max) {
    if (!a.x_min || !a.x_max) throw UsageError("--x-min and --x-max go together");
    for (double x : linspace(*a.x_min, *a.x_max, a.points)) xs.push_back(x);
  }
  if (xs.empty()) throw UsageError("give --x or --x-min/--x-max");
  std::vector<RatePoint> points;
  for (double x : xs) points.push_back(legendre_transform(mixture, x));
  o.csv = emit_curve(std::span<const RatePoint>(points)).str();
  o.parameters = {{"x", xs}, {"n", a.n}};
  return o;
}

Output run_bound(const BoundArgs& a) {
  Output o;
  o.source = read_model_file(a.model);
  const auto loaded = load_model(o.source->text);
  if (a.x.empty()) throw UsageError("--x is required");
  if (a.checkpoints.empty()) throw UsageError("--checkpoints is required");
  const auto grid = linspace(a.lambda_min, a.lambda_max, a.lambda_points);
  CsvTable t{{"x", "j_lower_bound", "lambda_argmax"}, {}};
  for (double x : a.x) {
    const auto est = rate_upper_bound(loaded.model, x, grid, a.checkpoints);
    t.rows.push_back({est.x, est.value, est.lambda_argmax});
  }
  o.csv = t.str();
  o.parameters = {{"x", a.x},
                  {"lambda_min", a.lambda_min},
                  {"lambda_max", a.lambda_max},
                  {"lambda_points", a.lambda_points},
                  {"checkpoints", a.checkpoints}};
  return o;
}

Output run_exact(const ExactArgs& a) {
  Output o;
  o.source = read_model_file(a.model);
  const auto loaded = load_model(o.source->text);
  if (a.n < 1) throw UsageError("--n must be >= 1");
  if (a.x.empty()) throw UsageError("--x is required");
  const TailSide side = a.strict ? TailSide::greater_than : TailSide::at_least;
  CsvTable t{{"n", "x", "tail_probability", "log_rate"}, {}};
  for (double x : a.x) {
    const auto tail = exact_tail(loaded.model, a.n, x, side);
    t.rows.push_back({a.n, x, tail.probability, tail.log_probability / static_cast<double>(a.n)});
  }
  o.csv = t.str();
  o.parameters = {{"n", a.n}, {"x", a.x}, {"strict", a.strict}};
  return o;
}

Output run_mc(const McArgs& a, unsigned threads) {
  Output o;
  o.source = read_model_file(a.model);
  const auto loaded = load_model(o.source->text);
  if (a.n < 1) throw UsageError("--n must be >= 1");
  McOptions opt;
  opt.samples = a.samples;
  opt.seed = a.seed;
  opt.threads = threads;
  opt.side = a.strict ? TailSide::greater_than : TailSide::at_least;
  const auto est = a.tilted ? sample_tilted(loaded.model, a.n, a.x, opt) : sample_plain(loaded.model, a.n, a.x, opt);
  CsvTable t{{"estimate", "std_error", "method", "lambda_star"}, {}};
  t.rows.push_back({est.estimate, est.std_error, std::string(method_name(est.method)), est.lambda});
  o.csv = t.str();
  o.parameters = {{"n", a.n}, {"x", a.x}, {"samples", a.samples}, {"tilted", a.tilted}, {"strict", a.strict}};
  o.seed = a.seed;
  return o;
}

Output run_mdp(const MdpArgs& a) {
  Output o;
  o.source = read_model_file(a.model);
  const auto loaded = load_model(o.source->text);
  MdQuery q;
  try {
    q = MdQuery::make(a.c, a.alpha, a.n);
  } catch (const MdQueryError& e) {
    throw UsageError(e.what());
  }
  const auto th = md_threshold(q, loaded.model, loaded.bounds);
  const auto pred = md_log_prob_prediction(q);
  CsvTable t{{"n", "alpha", "c", "threshold_exact", "threshold_lower", "threshold_upper", "predicted_minus_log_prob",
              "correction_scale"},
             {}};
  t.rows.push_back({a.n, a.alpha, a.c, th.exact, th.lower, th.upper, pred.leading, pred.correction_scale});
  o.csv = t.str();
  o.parameters = {{"n", a.n}, {"alpha", a.alpha}, {"c", a.c}};
  return o;
}

Output run_counterexample(const CounterexampleArgs& a) {
  Output o;
  if (a.growth < 2) throw UsageError("--growth must be >= 2");
  if (a.depth < 1) throw UsageError("--depth must be >= 1");
  const auto ce = build_counterexample(a.growth, a.depth);
  std::string csv;
  SubsequenceReport reports[2] = {subsequence_rates(ce.model, a.x, 1, a.depth),
                                  subsequence_rates(ce.model, a.x, 2, a.depth)};
  for (const auto& r : reports) {
    csv += "# class-" + std::to_string(r.which) + " block ends\n";
    CsvTable t{{"n", "class1_density", "log_rate", "chernoff_rate", "target"}, {}};
    for (const auto& p : r.points) t.rows.push_back({p.n, p.class1_density, p.log_rate, p.chernoff_rate, r.target});
    csv += t.str();
  }
  const double last1 = reports[0].points.empty() ? kInfinity : reports[0].points.back().log_rate;
  const double last2 = reports[1].points.empty() ? kInfinity : reports[1].points.back().log_rate;
  csv += "# summary\n";
  CsvTable s{{"gap_class1", "gap_class2", "rate_difference", "partial"}, {}};
  s.rows.push_back({reports[0].gap, reports[1].gap, std::abs(last1 - last2),
                    std::string(reports[0].partial || reports[1].partial ? "true" : "false")});
  csv += s.str();
  o.csv = csv;
  o.parameters = {{"growth", a.growth}, {"depth", a.depth}, {"x", a.x}};
  return o;
}

Output run_validate(const ValidateArgs& a) {
  Output o;
  o.source = read_model_file(a.model);
  const auto loaded = parse_model(o.source->text);
  const auto violations = validate_model(loaded.model, loaded.bounds);
  CsvTable t{{"class", "clause", "message"}, {}};
  for (const auto& v : violations) t.rows.push_back({v.class_name, std::string(clause_name(v.clause)), v.message});
  o.csv = t.str();
  if (!violations.empty()) {
    o.parameters = {{"violations", violations.size()}};
    throw ViolationsFound(o.csv);
  }
  return o;
}

void write_manifest(std::ostream& err, const std::string& subcommand, const Output& o, double seconds) {
  Manifest m;
  m["subcommand"] = subcommand;
  m["parameters"] = o.parameters;
  if (o.source) {
    m["model_file"] = o.source->path;
    m["model_sha256"] = o.source->sha256;
  } else {
    m["model_sha256"] = nullptr;
  }
  if (o.seed) {
    m["seed"] = *o.seed;
  } else {
    m["seed"] = nullptr;
  }
  m["version"] = kVersion;
  m["wall_time_seconds"] = seconds;
  err << m.dump() << '\n';
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int j = 0; j < len; ++j) {
    out += kHex[digest[j] >> 4];
    out += kHex[digest[j] & 0xF];
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();

  CLI::App app{"Large- and moderate-deviation estimates for portfolios of bounded losses", "lossdev"};
  app.require_subcommand(1);
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "Worker threads for Monte Carlo")->capture_default_str();
  app.set_version_flag("--version", kVersion);

  CgfArgs cgf;
  auto* cgf_cmd = app.add_subcommand("cgf", "CGF and its derivatives over a lambda grid");
  cgf_cmd->add_option("--model", cgf.model, "Model file")->required();
  cgf_cmd->add_option("--lambda-min", cgf.lambda_min)->capture_default_str();
  cgf_cmd->add_option("--lambda-max", cgf.lambda_max)->capture_default_str();
  cgf_cmd->add_option("--points", cgf.points)->capture_default_str();
  cgf_cmd->add_option("--n", cgf.n, "Finite-n empirical CGF (0: limit CGF)")->capture_default_str();

  RateArgs rate;
  auto* rate_cmd = app.add_subcommand("rate", "Legendre transform of the CGF");
  rate_cmd->add_option("--model", rate.model, "Model file")->required();
  rate_cmd->add_option("--x", rate.x, "Thresholds");
  rate_cmd->add_option("--x-min", rate.x_min);
  rate_cmd->add_option("--x-max", rate.x_max);
  rate_cmd->add_option("--points", rate.points)->capture_default_str();
  rate_cmd->add_option("--n", rate.n, "Finite-n empirical CGF (0: limit CGF)")->capture_default_str();

  BoundArgs bound;
  auto* bound_cmd = app.add_subcommand("bound", "Grid lower estimate of the exponential upper-bound exponent");
  bound_cmd->add_option("--model", bound.model, "Model file")->required();
  bound_cmd->add_option("--x", bound.x, "Thresholds")->required();
  bound_cmd->add_option("--lambda-min", bound.lambda_min)->capture_default_str();
  bound_cmd->add_option("--lambda-max", bound.lambda_max)->capture_default_str();
  bound_cmd->add_option("--lambda-points", bound.lambda_points)->capture_default_str();
  bound_cmd->add_option("--checkpoints", bound.checkpoints, "Portfolio sizes standing in for the limsup")->required();

  ExactArgs exact;
  auto* exact_cmd = app.add_subcommand("exact", "Exact tail probability by lattice convolution");
  exact_cmd->add_option("--model", exact.model, "Model file")->required();
  exact_cmd->add_option("--n", exact.n, "Number of contracts")->required();
  exact_cmd->add_option("--x", exact.x, "Thresholds")->required();
  exact_cmd->add_flag("--strict", exact.strict, "P[M_n > x] instead of P[M_n >= x]");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo tail estimate");
  mc_cmd->add_option("--model", mc.model, "Model file")->required();
  mc_cmd->add_option("--n", mc.n, "Number of contracts")->required();
  mc_cmd->add_option("--x", mc.x, "Threshold")->required();
  mc_cmd->add_option("--samples", mc.samples)->capture_default_str();
  mc_cmd->add_option("--seed", mc.seed)->capture_default_str();
  mc_cmd->add_flag("--tilted", mc.tilted, "Exponentially tilted importance sampling");
  mc_cmd->add_flag("--strict", mc.strict, "P[M_n > x] instead of P[M_n >= x]");

  MdpArgs mdp;
  auto* mdp_cmd = app.add_subcommand("mdp", "Moderate-deviation thresholds and prediction");
  mdp_cmd->add_option("--model", mdp.model, "Model file")->required();
  mdp_cmd->add_option("--c", mdp.c)->required();
  mdp_cmd->add_option("--alpha", mdp.alpha)->required();
  mdp_cmd->add_option("--n", mdp.n)->required();

  CounterexampleArgs ce;
  auto* ce_cmd = app.add_subcommand("counterexample", "Subsequential log-tail rates of the block-scheduled model");
  ce_cmd->add_option("--growth", ce.growth)->capture_default_str();
  ce_cmd->add_option("--depth", ce.depth)->capture_default_str();
  ce_cmd->add_option("--x", ce.x)->capture_default_str();

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a model file against the bounded-loss assumption");
  validate_cmd->add_option("model", validate.model, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::string name;
  Output result;
  try {
    if (cgf_cmd->parsed()) {
      name = "cgf";
      result = run_cgf(cgf);
    } else if (rate_cmd->parsed()) {
      name = "rate";
      result = run_rate(rate);
    } else if (bound_cmd->parsed()) {
      name = "bound";
      result = run_bound(bound);
    } else if (exact_cmd->parsed()) {
      name = "exact";
      result = run_exact(exact);
    } else if (mc_cmd->parsed()) {
      name = "mc";
      result = run_mc(mc, threads);
    } else if (mdp_cmd->parsed()) {
      name = "mdp";
      result = run_mdp(mdp);
    } else if (ce_cmd->parsed()) {
      name = "counterexample";
      result = run_counterexample(ce);
    } else {
      name = "validate";
      result = run_validate(validate);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ViolationsFound& e) {
    out << e.what();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  out << result.csv;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(err, name, result, seconds);
  return 0;
}

}  // namespace lossdev
