// betasplit: command-line front end for the exact tables, the asymptotic
// checks and the samplers. Output is CSV (or JSON where noted) on stdout or in
// the file given by --output. Exit codes: 0 ok, 1 a check reported
// "diverging", 2 usage or guard errors.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "betasplit/asymptotics.hpp"
#include "betasplit/contraction.hpp"
#include "betasplit/errors.hpp"
#include "betasplit/exact_engine.hpp"
#include "betasplit/simulate.hpp"
#include "betasplit/stats.hpp"
#include "json.hpp"

using namespace betasplit;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240607;
constexpr int kExitDiverging = 1;
constexpr int kExitUsage = 2;

std::string num(double x) { return fmt::format("{:.17g}", x); }

// Guards, optionally overridden by BETASPLIT_MAX_N.
struct Guards {
  EngineLimits engine;
  std::int64_t tree = kDefaultTreeGuard;
};

Guards guards_from_env() {
  Guards g;
  if (const char* env = std::getenv("BETASPLIT_MAX_N")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError(fmt::format("BETASPLIT_MAX_N must be a positive integer, got '{}'", env));
    }
    g.engine.pmf_max_n = v;
    g.engine.moment_max_n = v;
    g.engine.fast_max_n = v;
    g.tree = v;
  }
  return g;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file " + path);
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

// "# betasplit <version> <command> key=value ..." in the order given.
std::string header(const std::string& command,
                   const std::vector<std::pair<std::string, std::string>>& config) {
  std::string line = fmt::format("# betasplit {} {}", BETASPLIT_VERSION, command);
  for (const auto& [k, v] : config) line += fmt::format(" {}={}", k, v);
  return line;
}

// CSV gets the header as a comment line; JSON output stays parseable, so the
// header goes to stderr.
void emit_header(std::ostream& os, const std::string& format, const std::string& line) {
  if (format == "json") {
    std::cerr << line << '\n';
  } else {
    os << line << '\n';
  }
}

std::string join(const std::vector<std::int64_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

// --- constants -------------------------------------------------------------

int cmd_constants(const std::string& output) {
  Output out(output);
  auto& os = out.os();
  os << header("constants", {}) << '\n';
  const ConstantsSet& c = default_constants();
  const std::vector<std::tuple<const char*, const char*, double>> rows{
      {"zeta2", "pi^2/6", c.zeta2},
      {"zeta3", "sum 1/k^3", c.zeta3},
      {"zeta4", "pi^4/90", c.zeta4},
      {"gamma", "lim theta(n)-log(n)", c.gamma},
      {"A", "1/(2*zeta2)", c.A},
      {"B", "gamma/zeta2+zeta3/zeta2^2", c.B},
      {"C", "1/10+gamma^2/(2*zeta2)+gamma*zeta3/zeta2^2+zeta3^2/zeta2^3", c.C},
      {"Astar", "2*zeta3/(3*zeta2^3)", c.A_star},
      {"Bstar", "-1/(2*zeta2)-3*zeta4/zeta2^3+2*gamma*zeta3/zeta2^3+4*zeta3^2/zeta2^4", c.B_star},
      {"X", "-1-8*A*(A*gamma-B)*zeta3-24*A^2*zeta4+Astar*(3*gamma*zeta2+6*zeta3)", c.X},
      {"Ahat", "1/zeta2", c.A_hat},
      {"Bhat", "B", c.B_hat},
      {"Ahatstar", "2*zeta3/zeta2^3", c.A_hat_star},
      {"Bhatstar", "-3/(5*zeta2)+2*gamma*zeta3/zeta2^3+5*zeta3^2/zeta2^4", c.B_hat_star},
  };
  os << "name,formula,value\n";
  for (const auto& [name, formula, value] : rows) os << name << ',' << formula << ',' << num(value) << '\n';
  os << '\n' << "identity,residual\n";
  os << "Bstar-A*X," << fmt::format("{:.1e}", c.B_star - c.A * c.X) << '\n';
  os << "8*A^2*zeta3-3*zeta2*Astar,"
     << fmt::format("{:.1e}", 8.0 * c.A * c.A * c.zeta3 - 3.0 * c.zeta2 * c.A_star) << '\n';
  return 0;
}

// --- moments ---------------------------------------------------------------

int cmd_moments(std::int64_t max_n, const std::string& variant_name, bool fast,
                const std::string& format, const std::string& output) {
  const Guards g = guards_from_env();
  const Variant variant = parse_variant(variant_name);
  const MomentSeries m =
      moment_series(max_n, variant, fast ? TableMode::fast : TableMode::naive, g.engine);
  Output out(output);
  auto& os = out.os();
  emit_header(os, format,
              header("moments", {{"max-n", std::to_string(max_n)},
                                 {"variant", variant_name},
                                 {"fast", fast ? "1" : "0"},
                                 {"format", format}}));
  const bool discrete = variant == Variant::discrete;
  if (format == "json") {
    json j;
    j["variant"] = variant_name;
    j["max_n"] = max_n;
    j[discrete ? "mu" : "mu_hat"] = std::vector<double>(m.mu.begin() + 1, m.mu.end());
    j[discrete ? "sigma2" : "sigma2_hat"] =
        std::vector<double>(m.sigma2.begin() + 1, m.sigma2.end());
    os << j.dump(2) << '\n';
    return 0;
  }
  os << (discrete ? "n,mu,sigma2\n" : "n,mu_hat,sigma2_hat\n");
  for (std::int64_t n = 1; n <= max_n; ++n) {
    os << n << ',' << num(m.mu[n]) << ',' << num(m.sigma2[n]) << '\n';
  }
  return 0;
}

// --- pmf -------------------------------------------------------------------

int cmd_pmf(std::int64_t n, const std::string& output) {
  const Guards g = guards_from_env();
  const PmfTable t = height_pmf_table(n, g.engine);
  Output out(output);
  auto& os = out.os();
  os << header("pmf", {{"n", std::to_string(n)}}) << '\n';
  os << "h,prob\n";
  const auto& probs = t.at(n).probs;
  for (std::size_t h = 0; h < probs.size(); ++h) {
    if (probs[h] != 0.0) os << h << ',' << num(probs[h]) << '\n';
  }
  return 0;
}

// --- verify ----------------------------------------------------------------

void write_fit(std::ostream& os, const std::string& name, const RemainderFit& fit) {
  os << fmt::format("# check={} verdict={} max_lower={} max_upper={}\n", name,
                    to_string(fit.verdict), num(fit.max_lower), num(fit.max_upper));
  os << "n,exact,expansion,residual,scaled\n";
  for (std::size_t k = 0; k < fit.n_values.size(); ++k) {
    os << fit.n_values[k] << ',' << num(fit.exact[k]) << ',' << num(fit.expansion[k]) << ','
       << num(fit.residual[k]) << ',' << num(fit.scaled[k]) << '\n';
  }
}

int cmd_verify(const std::string& which, int lo, int hi, int c_lo, int c_hi, bool naive,
               const std::string& output) {
  static const std::vector<std::string> kChecks{"mean", "var", "sums", "contraction"};
  if (which != "all" && std::find(kChecks.begin(), kChecks.end(), which) == kChecks.end()) {
    throw ConfigError("unknown check '" + which + "'");
  }
  const Guards g = guards_from_env();
  const TableMode mode = naive ? TableMode::naive : TableMode::fast;
  const ConstantsSet& c = default_constants();
  const auto grid = dyadic_grid(lo, hi);
  const auto c_grid = dyadic_grid(c_lo, c_hi);
  auto wants = [&](const std::string& name) { return which == "all" || which == name; };

  Output out(output);
  auto& os = out.os();
  os << header("verify", {{"which", which},
                          {"grid", fmt::format("2^{}..2^{}", lo, hi)},
                          {"contraction-grid", fmt::format("2^{}..2^{}", c_lo, c_hi)},
                          {"naive", naive ? "1" : "0"}})
     << '\n';

  bool diverging = false;
  auto report = [&](const std::string& name, const RemainderFit& fit) {
    write_fit(os, name, fit);
    diverging |= fit.verdict == Verdict::diverging;
  };
  auto log_n = [](std::int64_t n) { return std::log(static_cast<double>(n)); };
  auto n_over_log = [](std::int64_t n) { return n / std::log(static_cast<double>(n)); };
  auto inv_log = [](std::int64_t n) { return 1.0 / std::log(static_cast<double>(n)); };
  auto by_n = [](std::int64_t n) { return static_cast<double>(n); };

  std::unique_ptr<MomentSeries> disc, cont;
  if (wants("mean") || wants("var") || wants("sums")) {
    disc = std::make_unique<MomentSeries>(moment_series(grid.back(), Variant::discrete, mode, g.engine));
  }
  if (wants("mean") || wants("var")) {
    cont = std::make_unique<MomentSeries>(moment_series(grid.back(), Variant::continuous, mode, g.engine));
  }
  if (wants("mean")) {
    report("mean_discrete",
           remainder_check(disc->mu, [&](std::int64_t n) { return mean_expansion(n, Variant::discrete, c); },
                           n_over_log, grid));
    report("mean_continuous",
           remainder_check(cont->mu, [&](std::int64_t n) { return mean_expansion(n, Variant::continuous, c); },
                           by_n, grid));
  }
  if (wants("var")) {
    report("variance_discrete",
           remainder_check(disc->sigma2,
                           [&](std::int64_t n) { return variance_expansion(n, Variant::discrete, c); },
                           inv_log, grid));
    report("variance_continuous",
           remainder_check(cont->sigma2,
                           [&](std::int64_t n) { return variance_expansion(n, Variant::continuous, c); },
                           n_over_log, grid));
  }
  if (wants("sums")) {
    report("sum_log3",
           remainder_check([&](std::int64_t n) { return sum_log3_normalized(n, c).exact; },
                           [&](std::int64_t n) { return sum_log3_normalized(n, c).predicted; }, log_n,
                           grid));
    report("sum_mu_squared",
           remainder_check([&](std::int64_t n) { return sum_mu_squared(n, disc->mu, c).exact; },
                           [&](std::int64_t n) { return sum_mu_squared(n, disc->mu, c).predicted; },
                           log_n, grid));
  }
  if (wants("contraction")) {
    for (Variant v : {Variant::discrete, Variant::continuous}) {
      const MomentSeries m = moment_series(c_grid.back(), v, mode, g.engine);
      std::vector<ContractionDiagnostics> rows;
      std::vector<double> scaled;
      for (std::int64_t n : c_grid) {
        rows.push_back(contraction_diagnostics(n, m, c));
        scaled.push_back(rows.back().scaled);
      }
      double max_lower = 0, max_upper = 0;
      const Verdict verdict = no_growth_verdict(scaled, &max_lower, &max_upper);
      diverging |= verdict == Verdict::diverging;
      os << fmt::format("# check=contraction_{} verdict={} max_lower={} max_upper={}\n",
                        to_string(v), to_string(verdict), num(max_lower), num(max_upper));
      os << "n,term1,term2,term3,term4,term5,term6,total,scaled\n";
      for (const auto& d : rows) {
        os << d.n;
        for (double t : d.terms) os << ',' << num(t);
        os << ',' << num(d.total) << ',' << num(d.scaled) << '\n';
      }
    }
  }
  return diverging ? kExitDiverging : 0;
}

// --- sample / clt ----------------------------------------------------------

struct Standardization {
  double mu = 0.0;
  double sigma = 0.0;
  std::string source;
};

// Exact moments when the fast table guard allows it, otherwise the expansions.
Standardization standardization(std::int64_t n, Variant v, const std::string& how,
                                const EngineLimits& limits) {
  if (how != "auto" && how != "exact" && how != "expansion") {
    throw ConfigError("--standardize must be auto, exact or expansion");
  }
  const bool exact = how == "exact" || (how == "auto" && n <= limits.fast_max_n);
  if (exact) {
    const MomentSeries m = moment_series(n, v, TableMode::fast, limits);
    return {m.mu[n], std::sqrt(m.sigma2[n]), "exact"};
  }
  const ConstantsSet& c = default_constants();
  return {mean_expansion(n, v, c), std::sqrt(variance_expansion(n, v, c)), "expansion"};
}

// NaN for a degenerate law (n <= 2 in the discrete model).
double ks_of(const ExperimentResult& r, const Standardization& s) {
  if (!(s.sigma > 0.0)) return std::nan("");
  return ks_normal(r.values, s.mu, s.sigma);
}

int cmd_sample(const ExperimentConfig& cfg, const std::string& variant_name,
               const std::string& format, const std::string& standardize,
               const std::string& values_path, const std::string& output) {
  const Guards g = guards_from_env();
  const ExperimentResult r = run_experiment(cfg);
  const Standardization s = standardization(cfg.n, cfg.variant, standardize, g.engine);
  const double ks = ks_of(r, s);

  Output out(output);
  auto& os = out.os();
  emit_header(os, format,
              header("sample", {{"n", std::to_string(cfg.n)},
                                {"reps", std::to_string(cfg.reps)},
                                {"variant", variant_name},
                                {"seed", std::to_string(cfg.seed)},
                                {"workers", std::to_string(cfg.workers)},
                                {"standardize", s.source},
                                {"format", format}}));
  if (format == "json") {
    json j;
    j["n"] = cfg.n;
    j["reps"] = cfg.reps;
    j["variant"] = variant_name;
    j["seed"] = cfg.seed;
    j["mean"] = r.summary.mean();
    j["variance"] = r.summary.variance();
    j["m3"] = r.summary.m3();
    j["m4"] = r.summary.m4();
    j["ks"] = std::isnan(ks) ? json(nullptr) : json(ks);
    j["standardization"] = s.source;
    j["subsampled"] = r.subsampled;
    os << j.dump(2) << '\n';
  } else {
    os << "n,reps,variant,seed,mean,variance,m3,m4,ks\n";
    os << cfg.n << ',' << cfg.reps << ',' << variant_name << ',' << cfg.seed << ','
       << num(r.summary.mean()) << ',' << num(r.summary.variance()) << ',' << num(r.summary.m3())
       << ',' << num(r.summary.m4()) << ',' << (std::isnan(ks) ? "" : num(ks)) << '\n';
  }
  if (!values_path.empty()) {
    std::ofstream vf(values_path);
    if (!vf) throw ConfigError("cannot open values file " + values_path);
    vf << (r.subsampled ? "# uniform subsample of the replicates\n" : "") << "value\n";
    for (double x : r.values) vf << num(x) << '\n';
  }
  return 0;
}

int cmd_clt(const std::vector<std::int64_t>& n_grid, ExperimentConfig cfg,
            const std::string& variant_name, const std::string& standardize,
            const std::string& output) {
  if (n_grid.size() < 2) throw ConfigError("--n-grid needs at least two sizes");
  const Guards g = guards_from_env();
  Output out(output);
  auto& os = out.os();
  os << header("clt", {{"n-grid", join(n_grid)},
                       {"reps", std::to_string(cfg.reps)},
                       {"variant", variant_name},
                       {"seed", std::to_string(cfg.seed)},
                       {"workers", std::to_string(cfg.workers)},
                       {"standardize", standardize}})
     << '\n';
  os << "n,mean,variance,mu,sigma2,ks\n";
  bool decreasing = true;
  double prev = 2.0;
  for (std::int64_t n : n_grid) {
    cfg.n = n;
    const ExperimentResult r = run_experiment(cfg);
    const Standardization s = standardization(n, cfg.variant, standardize, g.engine);
    const double ks = ks_of(r, s);
    os << n << ',' << num(r.summary.mean()) << ',' << num(r.summary.variance()) << ','
       << num(s.mu) << ',' << num(s.sigma * s.sigma) << ',' << num(ks) << '\n';
    decreasing &= ks < prev;
    prev = ks;
  }
  os << "# ks_strictly_decreasing=" << (decreasing ? "yes" : "no") << '\n';
  return decreasing ? 0 : kExitDiverging;
}

// --- tree ------------------------------------------------------------------

int cmd_tree(std::int64_t n, const std::string& variant_name, std::uint64_t seed, bool newick,
             const std::string& output) {
  const Guards g = guards_from_env();
  RandomStream rng = derive_stream(seed, 0);
  const SampledTree tree = sample_tree(n, parse_variant(variant_name), rng, g.tree);
  Output out(output);
  auto& os = out.os();
  os << header("tree", {{"n", std::to_string(n)},
                        {"variant", variant_name},
                        {"seed", std::to_string(seed)},
                        {"newick", newick ? "1" : "0"}})
     << '\n';
  if (newick) {
    os << newick_export(tree) << '\n';
    return 0;
  }
  const auto heights = tree.leaf_heights();
  os << "leaf,height,time_height\n";
  for (std::int64_t j = 1; j <= n; ++j) {
    os << j << ',' << heights[j - 1] << ',' << num(tree.leaf_time_height(j)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact recurrences, asymptotic checks and Monte Carlo for the critical "
               "beta-splitting tree"};
  app.set_version_flag("--version", std::string(BETASPLIT_VERSION));
  app.require_subcommand(1);

  std::string output;
  std::string variant = "discrete";
  std::string format = "csv";
  std::uint64_t seed = kDefaultSeed;
  int workers = 1;
  std::int64_t n = 0;
  std::int64_t reps = 0;

  auto* constants = app.add_subcommand("constants", "Print all expansion constants and identity residuals");
  constants->add_option("-o,--output", output, "Output file (default stdout)");

  std::int64_t max_n = 0;
  bool fast = false;
  auto* moments = app.add_subcommand("moments", "Exact mean and variance tables");
  moments->add_option("--max-n", max_n, "Largest n")->required()->check(CLI::PositiveNumber);
  moments->add_option("--variant", variant, "discrete or continuous")
      ->check(CLI::IsMember({"discrete", "continuous"}));
  moments->add_flag("--fast", fast, "FFT divide-and-conquer tables");
  moments->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  moments->add_option("-o,--output", output, "Output file (default stdout)");

  auto* pmf = app.add_subcommand("pmf", "Exact law of the discrete height H_n");
  pmf->add_option("--n", n, "Tree size")->required()->check(CLI::PositiveNumber);
  pmf->add_option("-o,--output", output, "Output file (default stdout)");

  std::string which = "all";
  int lo = 10, hi = 17, c_lo = 8, c_hi = 15;
  bool naive = false;
  auto* verify = app.add_subcommand("verify", "Scaled-residual checks on dyadic grids");
  verify->add_option("--which", which, "mean, var, sums, contraction or all")
      ->check(CLI::IsMember({"mean", "var", "sums", "contraction", "all"}));
  verify->add_option("--lo", lo, "Smallest grid exponent")->check(CLI::Range(1, 30));
  verify->add_option("--hi", hi, "Largest grid exponent")->check(CLI::Range(1, 30));
  verify->add_option("--contraction-lo", c_lo, "Smallest contraction grid exponent")
      ->check(CLI::Range(1, 30));
  verify->add_option("--contraction-hi", c_hi, "Largest contraction grid exponent")
      ->check(CLI::Range(1, 30));
  verify->add_flag("--naive", naive, "Quadratic tables instead of FFT");
  verify->add_option("-o,--output", output, "Output file (default stdout)");

  std::string standardize = "auto";
  std::string values_path;
  auto* sample = app.add_subcommand("sample", "Monte Carlo leaf heights via the path sampler");
  sample->add_option("--n", n, "Tree size")->required()->check(CLI::PositiveNumber);
  sample->add_option("--reps", reps, "Replicates")->required()->check(CLI::PositiveNumber);
  sample->add_option("--variant", variant, "discrete or continuous")
      ->check(CLI::IsMember({"discrete", "continuous"}));
  sample->add_option("--seed", seed, "64-bit seed")->capture_default_str();
  sample->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  sample->add_option("--format", format, "json or csv")->check(CLI::IsMember({"csv", "json"}));
  sample->add_option("--standardize", standardize, "auto, exact or expansion (for ks)")
      ->check(CLI::IsMember({"auto", "exact", "expansion"}));
  sample->add_option("--values", values_path, "Write per-replicate values to this CSV file");
  sample->add_option("-o,--output", output, "Output file (default stdout)");

  std::vector<std::int64_t> n_grid{1000, 10000, 100000};
  std::int64_t clt_reps = 100000;
  auto* clt = app.add_subcommand("clt", "KS distance to the normal along a grid of n");
  clt->add_option("--n-grid", n_grid, "Comma-separated sizes")->delimiter(',');
  clt->add_option("--reps", clt_reps, "Replicates per size")->check(CLI::PositiveNumber);
  clt->add_option("--variant", variant, "discrete or continuous")
      ->check(CLI::IsMember({"discrete", "continuous"}));
  clt->add_option("--seed", seed, "64-bit seed")->capture_default_str();
  clt->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  clt->add_option("--standardize", standardize, "auto, exact or expansion")
      ->check(CLI::IsMember({"auto", "exact", "expansion"}));
  clt->add_option("-o,--output", output, "Output file (default stdout)");

  bool newick = false;
  auto* tree = app.add_subcommand("tree", "Sample one full tree");
  tree->add_option("--n", n, "Number of leaves")->required()->check(CLI::PositiveNumber);
  tree->add_option("--variant", variant, "discrete or continuous")
      ->check(CLI::IsMember({"discrete", "continuous"}));
  tree->add_option("--seed", seed, "64-bit seed")->capture_default_str();
  tree->add_flag("--newick", newick, "Print Newick instead of the leaf table");
  tree->add_option("-o,--output", output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*constants) return cmd_constants(output);
    if (*moments) return cmd_moments(max_n, variant, fast, format, output);
    if (*pmf) return cmd_pmf(n, output);
    if (*verify) {
      if (lo > hi || c_lo > c_hi) throw ConfigError("grid exponents out of order");
      return cmd_verify(which, lo, hi, c_lo, c_hi, naive, output);
    }
    ExperimentConfig cfg;
    cfg.variant = parse_variant(variant);
    cfg.seed = seed;
    cfg.workers = workers;
    if (*sample) {
      cfg.n = n;
      cfg.reps = reps;
      return cmd_sample(cfg, variant, format, standardize, values_path, output);
    }
    if (*clt) {
      cfg.reps = clt_reps;
      return cmd_clt(n_grid, cfg, variant, standardize, output);
    }
    if (*tree) return cmd_tree(n, variant, seed, newick, output);
  } catch (const NumericalIntegrityError& e) {
    std::cerr << "betasplit: numerical failure: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "betasplit: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
