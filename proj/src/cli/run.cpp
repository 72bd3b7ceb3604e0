#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "mcre/cli.hpp"
#include "mcre/coupling.hpp"
#include "mcre/errors.hpp"
#include "mcre/estimate.hpp"
#include "mcre/models.hpp"
#include "mcre/parallel.hpp"
#include "mcre/stats.hpp"
#include "mcre/verify.hpp"

namespace mcre::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

struct Context {
  Config config;
  fs::path config_dir;
  std::uint64_t seed = 0;
  int workers = 1;
  fs::path out_dir;
  std::map<std::string, std::string> outputs;  // file name -> contents
};

struct BuiltModel {
  std::string kind;
  AdditiveModel model;
  EnvironmentSpec environment;
};

std::string num(double v) { return fmt::format("{}", v); }

State state_from(const std::vector<double>& values, int dim, const std::string& field) {
  if (static_cast<int>(values.size()) != dim) {
    throw ConfigError(field, fmt::format("expected {} coordinates, found {}", dim, values.size()));
  }
  State s(dim);
  for (int i = 0; i < dim; ++i) s(i) = values[static_cast<std::size_t>(i)];
  return s;
}

std::vector<double> to_vector(const State& s) { return std::vector<double>(s.data(), s.data() + s.size()); }

// A point at metric distance `r` from y along the first coordinate axis.
State offset_along_axis(const Metric& metric, const State& y, double r) {
  State step = State::Zero(y.size());
  step(0) = 1.0;
  const double unit = metric.distance(State::Zero(y.size()), step);
  return y + step * (r / unit);
}

EnvironmentSpec build_environment(const Config& c, const std::string& model_kind, const EnvironmentSpec& fallback) {
  if (!c.has("environment.kind")) {
    for (const char* key : {"phi", "sd", "coefficients", "decay", "lag"}) {
      if (c.has(fmt::format("environment.{}", key))) throw ConfigError("environment.kind", "required field is missing");
    }
    return fallback;
  }
  if (model_kind == "stochvol") {
    throw ConfigError("environment.kind", "the stochvol model fixes its own environment");
  }
  const std::string kind = c.get_string("environment.kind", "");
  const double sd = c.get_double("environment.sd", 1.0);
  try {
    EnvironmentSpec env;
    if (kind == "iid") {
      env = EnvironmentSpec::iid_gaussian(sd);
    } else if (kind == "gaussian-ar1") {
      env = EnvironmentSpec::gaussian_ar1(c.get_double("environment.phi", 0.5), sd);
    } else if (kind == "linear-process") {
      if (!c.has("environment.coefficients")) throw ConfigError("environment.coefficients", "required field is missing");
      env = EnvironmentSpec::linear_process(c.get_doubles("environment.coefficients", {}), sd);
    } else if (kind == "power-law") {
      env = EnvironmentSpec::power_law_linear(c.get_double("environment.decay", 1.5),
                                              static_cast<int>(c.get_int("environment.lag", 256)), sd);
    } else {
      throw ConfigError("environment.kind",
                        fmt::format("unknown kind '{}' (iid, gaussian-ar1, linear-process, power-law)", kind));
    }
    env.validate();
    return env;
  } catch (const SpecError& e) {
    throw ConfigError("environment", e.what());
  }
}

BuiltModel build_model(const Config& c) {
  const std::string kind = c.require_string("model.kind");
  BuiltModel out;
  out.kind = kind;
  try {
    if (kind == "additive") {
      const double slope = c.get_double("model.slope", 0.5);
      out.model = linear_additive(slope, {std::abs(slope), c.get_double("model.R", 1.0)});
      out.environment = EnvironmentSpec::iid_gaussian();
    } else if (kind == "adversarial") {
      out.model = linear_additive(c.get_double("model.slope", 1.1), {0.9, c.get_double("model.R", 1.0)});
      out.environment = EnvironmentSpec::iid_gaussian();
    } else if (kind == "sgld") {
      SgldParams p;
      p.a = c.get_double("model.a", p.a);
      p.h = c.get_double("model.h", p.h);
      p.alpha_level = c.get_double("model.alpha", p.alpha_level);
      out.model = make_sgld(p).model;
      out.environment = EnvironmentSpec::iid_gaussian();
    } else if (kind == "threshold") {
      ThresholdParams p;
      p.thresholds = c.get_doubles("model.thresholds", {0.0});
      p.slopes = c.get_doubles("model.slopes", {0.5, -0.5});
      p.intercepts = c.get_doubles("model.intercepts", {1.0, -1.0});
      p.sigma = c.get_double("model.sigma", 1.0);
      p.ell = c.get_double("model.ell", 0.0);
      out.model = make_threshold(p).model;
      out.environment = EnvironmentSpec::iid_gaussian();
    } else if (kind == "stochvol" || kind == "multivar") {
      const ZooEntry entry = zoo_model(kind);
      out.model = entry.model;
      out.environment = entry.environment;
    } else {
      throw ConfigError("model.kind", fmt::format("unknown kind '{}' (additive, adversarial, sgld, threshold, "
                                                  "stochvol, multivar)",
                                                  kind));
    }
  } catch (const SpecError& e) {
    throw ConfigError("model", e.what());
  }
  out.environment = build_environment(c, kind, out.environment);
  return out;
}

fs::path resolve(const Context& ctx, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : ctx.config_dir / p;
}

// ---------------------------------------------------------------- verify

void run_verify(Context& ctx) {
  const Config& c = ctx.config;
  const BuiltModel built = build_model(c);
  const AdditiveModel& model = built.model;
  const MinorizationSpec& minor = model.minorization();
  const auto trials = c.get_int("verify.trials", 1'000'000);
  const auto samples = c.get_int("verify.samples", 1'000'000);
  if (trials < 1) throw ConfigError("verify.trials", "must be positive");
  if (samples < 1) throw ConfigError("verify.samples", "must be positive");
  const auto assumptions =
      c.get_strings("verify.assumptions", {"contractivity", "minorization", "support"});

  const State y1 = state_from(c.get_doubles("verify.y1", to_vector(model.chain().reference_point)), model.dim(),
                              "verify.y1");
  const State y2 = c.has("verify.y2") ? state_from(c.get_doubles("verify.y2", {}), model.dim(), "verify.y2")
                                      : offset_along_axis(minor.metric, y1, minor.pair_radius);
  const double d = minor.metric.distance(y1, y2);
  if (!(d > 0.0 && d <= minor.pair_radius * (1.0 + 1e-12))) {
    throw ConfigError("verify.y2", fmt::format("pair distance {} must lie in (0, {}]", d, minor.pair_radius));
  }
  EnvState x;
  x.value = c.get_double("verify.x", 0.0);

  InputSampler sampler;
  sampler.environment = built.environment;
  const CheckOptions options{ctx.seed, ctx.workers};

  std::ostringstream csv;
  csv << "assumption,trials,violations,worst_margin\n";
  for (const auto& a : assumptions) {
    CheckReport report;
    if (a == "contractivity") {
      report = check_contractivity(model.chain(), sampler, trials, options);
    } else if (a == "minorization") {
      report = check_minorization(model.chain(), minor, x, y1, y2, samples, options);
    } else if (a == "support") {
      report = check_support(minor, x, y1, y2, samples, options);
    } else {
      throw ConfigError("verify.assumptions",
                        fmt::format("unknown assumption '{}' (contractivity, minorization, support)", a));
    }
    if (report.witness) spdlog::warn("{} violated: {}", a, *report.witness);
    spdlog::info("{}: {} violations in {} trials", a, report.violations, report.trials);
    csv << a << ',' << report.trials << ',' << report.violations << ',' << num(report.worst_margin) << '\n';
  }
  ctx.outputs["verify.csv"] = csv.str();
}

// ---------------------------------------------------------------- couple

void run_couple(Context& ctx) {
  const Config& c = ctx.config;
  const BuiltModel built = build_model(c);
  const AdditiveModel& model = built.model;
  const auto grid = c.get_ints("coupling.n", {50, 100, 200});
  const auto replications = c.get_int("coupling.replications", 10'000);
  if (replications < 1) throw ConfigError("coupling.replications", "must be positive");
  for (auto n : grid) {
    if (n < 1) throw ConfigError("coupling.n", "every horizon must be positive");
  }
  const State y = state_from(c.get_doubles("coupling.y", to_vector(model.chain().reference_point)), model.dim(),
                             "coupling.y");
  const State yp = c.has("coupling.yp") ? state_from(c.get_doubles("coupling.yp", {}), model.dim(), "coupling.yp")
                                        : offset_along_axis(model.metric(), y, 1.0);
  const std::string dir = c.get_string("coupling.direction", "forward");
  if (dir != "forward" && dir != "backward") throw ConfigError("coupling.direction", "expected forward or backward");
  const Direction direction = dir == "forward" ? Direction::forward : Direction::backward;

  struct Outcome {
    bool failed = true;
    double bound = 1.0;
    std::int64_t meeting = -1;
  };
  std::ostringstream csv;
  std::ostringstream times;
  csv << "n,replications,failures,failure_rate,mean_bound,bound_se\n";
  times << "n,replication,meeting_time\n";
  for (const auto n : grid) {
    const auto outcomes = parallel_map(replications, ctx.workers, [&](std::int64_t r) {
      RngStream rng = RngStream(ctx.seed, static_cast<std::uint64_t>(r)).child(static_cast<std::uint64_t>(n));
      const CouplingRun run = run_coupling(model, built.environment, y, yp, n, rng, direction);
      return Outcome{!run.coupled_at_end(), run.analytic_bound, run.meeting_time.value_or(-1)};
    });
    std::int64_t failures = 0;
    std::vector<double> bounds;
    bounds.reserve(outcomes.size());
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
      failures += outcomes[r].failed ? 1 : 0;
      bounds.push_back(outcomes[r].bound);
      times << n << ',' << r << ',';
      if (outcomes[r].meeting >= 0) times << outcomes[r].meeting;
      times << '\n';
    }
    const auto b = stats::mean_se(bounds);
    const double rate = static_cast<double>(failures) / static_cast<double>(replications);
    spdlog::info("n={}: failure rate {} against bound {}", n, rate, b.mean);
    csv << n << ',' << replications << ',' << failures << ',' << num(rate) << ',' << num(b.mean) << ','
        << num(b.se) << '\n';
  }
  ctx.outputs["coupling.csv"] = csv.str();
  ctx.outputs["meeting_times.csv"] = times.str();
}

// ---------------------------------------------------------------- tv

std::string curve_csv(const DecayCurve& curve) {
  std::ostringstream csv;
  csv << "index,estimate,std_error\n";
  for (const auto& p : curve.points) csv << num(p.index) << ',' << num(p.estimate) << ',' << num(p.std_error) << '\n';
  return csv.str();
}

void run_tv(Context& ctx) {
  const Config& c = ctx.config;
  const BuiltModel built = build_model(c);
  const ChainSpec& chain = built.model.chain();
  auto grid = c.get_ints("estimation.n", {1, 2, 4, 8, 16, 32, 64});
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() < 0) throw ConfigError("estimation.n", "indices must be nonnegative");
  const auto replications = c.get_int("estimation.replications", 10'000);
  if (replications < 2) throw ConfigError("estimation.replications", "needs at least two replications");
  const State ya = state_from(c.get_doubles("estimation.y_a", to_vector(chain.reference_point)), chain.dim_state,
                              "estimation.y_a");
  const State yb = c.has("estimation.y_b")
                       ? state_from(c.get_doubles("estimation.y_b", {}), chain.dim_state, "estimation.y_b")
                       : offset_along_axis(chain.metric, ya, 10.0);
  TvOptions options;
  options.bins_per_dim = static_cast<int>(c.get_int("estimation.bins", options.bins_per_dim));
  options.bootstrap = static_cast<int>(c.get_int("estimation.bootstrap", options.bootstrap));
  if (options.bins_per_dim < 1) throw ConfigError("estimation.bins", "must be positive");
  if (c.has("estimation.coords")) {
    options.coords.clear();
    for (auto k : c.get_ints("estimation.coords", {})) {
      if (k < 0 || k >= chain.dim_state) throw ConfigError("estimation.coords", "coordinate out of range");
      options.coords.push_back(static_cast<int>(k));
    }
  }
  const std::int64_t horizon = grid.back();

  // Each replication index r drives two independent chains (streams 2r and
  // 2r + 1) and keeps only the states at the grid indices.
  auto collect = [&](const State& y0, std::uint64_t side) {
    return parallel_map(replications, ctx.workers, [&](std::int64_t r) {
      RngStream rng(ctx.seed, 2 * static_cast<std::uint64_t>(r) + side);
      const Trajectory t = simulate_forward(chain, built.environment, y0, horizon, rng);
      std::vector<State> kept;
      kept.reserve(grid.size());
      for (auto n : grid) kept.push_back(t.states[static_cast<std::size_t>(n)]);
      return kept;
    });
  };
  const auto from_a = collect(ya, 0);
  const auto from_b = collect(yb, 1);

  DecayCurve curve;
  curve.kind = CurveKind::tv;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<State> a;
    std::vector<State> b;
    a.reserve(from_a.size());
    b.reserve(from_b.size());
    for (const auto& r : from_a) a.push_back(r[g]);
    for (const auto& r : from_b) b.push_back(r[g]);
    options.seed = ctx.seed + static_cast<std::uint64_t>(grid[g]);
    const Estimate e = tv_estimate(a, b, options);
    curve.points.push_back({static_cast<double>(grid[g]), e.estimate, e.std_error});
  }
  curve.validate();
  ctx.outputs["tv.csv"] = curve_csv(curve);
}

// ---------------------------------------------------------------- mix

void run_mix(Context& ctx) {
  const Config& c = ctx.config;
  const BuiltModel built = build_model(c);
  const ChainSpec& chain = built.model.chain();
  const auto lags = c.get_ints("estimation.lags", c.get_ints("estimation.n", [] {
    std::vector<std::int64_t> v;
    for (std::int64_t k = 1; k <= 50; ++k) v.push_back(k);
    return v;
  }()));
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (lags[i] < 1 || (i > 0 && lags[i] <= lags[i - 1])) {
      throw ConfigError("estimation.lags", "lags must be positive and strictly increasing");
    }
  }
  const auto replications = c.get_int("estimation.replications", 20'000);
  if (replications < 2) throw ConfigError("estimation.replications", "needs at least two replications");
  const auto burn_in = c.get_int("estimation.burn_in", 200);
  if (burn_in < 0) throw ConfigError("estimation.burn_in", "must be nonnegative");
  const std::string series = c.get_string("estimation.series", "chain");
  if (series != "chain" && series != "environment") {
    throw ConfigError("estimation.series", "expected chain or environment");
  }
  EventClass events;
  events.quantiles = static_cast<int>(c.get_int("estimation.quantiles", events.quantiles));
  if (events.quantiles < 1) throw ConfigError("estimation.quantiles", "must be positive");
  // Anchor j = 1 needs Z_0 and Z_1; the largest lag needs two further values.
  const std::int64_t length = lags.back() + 3;

  const auto ensemble = parallel_map(replications, ctx.workers, [&](std::int64_t r) {
    RngStream rng(ctx.seed, static_cast<std::uint64_t>(r));
    const EnvironmentWindow window = generate_window(built.environment, -burn_in, length, rng);
    std::vector<double> path(static_cast<std::size_t>(length));
    if (series == "environment") {
      for (std::int64_t t = 0; t < length; ++t) path[static_cast<std::size_t>(t)] = window.at(t).value;
      return path;
    }
    const auto states = run_along(chain, window, -burn_in, chain.reference_point, burn_in + length - 1, rng);
    for (std::int64_t t = 0; t < length; ++t) path[static_cast<std::size_t>(t)] = states[static_cast<std::size_t>(burn_in + t)](0);
    return path;
  });

  DecayCurve curve;
  curve.kind = CurveKind::mixing;
  for (const auto lag : lags) {
    const MixingEstimate m = alpha_mixing_estimate(ensemble, lag, events);
    curve.points.push_back({static_cast<double>(lag), m.alpha_hat, m.std_error});
  }
  curve.validate();
  ctx.outputs["mix.csv"] = curve_csv(curve);
}

// ---------------------------------------------------------------- var

void run_var(Context& ctx) {
  const Config& c = ctx.config;
  const std::string losses_path = c.require_string("var.losses");
  SgldParams p;
  p.alpha_level = c.get_double("var.alpha", 0.95);
  p.a = c.get_double("var.a", 1e-3);
  p.h = c.get_double("var.h", 1e-2);
  try {
    make_sgld(p);
  } catch (const SpecError& e) {
    throw ConfigError("var", e.what());
  }
  const auto checkpoints = c.get_ints("var.checkpoints", {1'000, 10'000, 100'000, 1'000'000});
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw ConfigError("var.checkpoints", "checkpoints must be positive and strictly increasing");
    }
  }
  const auto losses = load_loss_csv(resolve(ctx, losses_path).string());
  RngStream rng(ctx.seed, 0);
  const std::string order = c.get_string("var.order", "stream");
  if (order != "stream" && order != "resample") throw ConfigError("var.order", "expected stream or resample");
  const auto path = sgld_risk_path(p, losses, checkpoints, c.get_double("var.y0", 0.0), rng, order == "resample");
  std::ostringstream csv;
  csv << "step,var_estimate,cvar_estimate\n";
  for (const auto& r : path) csv << r.step << ',' << num(r.var_estimate) << ',' << num(r.cvar_estimate) << '\n';
  ctx.outputs["var.csv"] = csv.str();
}

// ---------------------------------------------------------------- fit

DecayCurve load_curve_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open curve file {}", path.string()));
  std::string line;
  std::getline(in, line);
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  if (line != "index,estimate,std_error") {
    throw InputError(fmt::format("{}: header must be 'index,estimate,std_error', found '{}'", path.string(), line));
  }
  DecayCurve curve;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InputError(fmt::format("{}:{}: '{}' is not a number", path.string(), number, cell));
      }
    }
    if (values.size() != 3) throw InputError(fmt::format("{}:{}: expected 3 columns", path.string(), number));
    curve.points.push_back({values[0], values[1], values[2]});
  }
  curve.kind = CurveKind::moment;  // only ordering is checked for fitting
  curve.validate();
  return curve;
}

void run_fit(Context& ctx) {
  const Config& c = ctx.config;
  const std::string curve_path = c.require_string("estimation.curve");
  std::vector<RateTemplate> templates;
  for (const auto& name : c.get_strings("estimation.templates", {"geometric", "bernstein", "stretched", "polynomial"})) {
    try {
      templates.push_back(parse_template(name));
    } catch (const InputError& e) {
      throw ConfigError("estimation.templates", e.what());
    }
  }
  const DecayCurve curve = load_curve_csv(resolve(ctx, curve_path));
  std::ostringstream csv;
  csv << "template,rate,gamma,intercept,residual_norm,bic,rank\n";
  for (const auto& f : rank_templates(curve, templates)) {
    csv << to_string(f.shape) << ',' << num(f.rate) << ',' << num(f.gamma) << ',' << num(f.intercept) << ','
        << num(f.residual_norm) << ',' << num(f.bic) << ',' << f.rank << '\n';
  }
  ctx.outputs["fit.csv"] = csv.str();
}

void write_outputs(const Context& ctx, const std::string& subcommand) {
  fs::create_directories(ctx.out_dir);
  nlohmann::ordered_json manifest;
  manifest["tool"] = "mcre";
  manifest["version"] = kVersion;
  manifest["subcommand"] = subcommand;
  manifest["config_sha256"] = ctx.config.sha256();
  manifest["seed"] = ctx.seed;
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& [name, contents] : ctx.outputs) {
    std::ofstream out(ctx.out_dir / name, std::ios::binary);
    out << contents;
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", (ctx.out_dir / name).string()));
    files[name] = sha256_hex(contents);
  }
  manifest["outputs"] = files;
  std::ofstream out(ctx.out_dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write manifest.json");
}

}  // namespace

int run(const RunOptions& options, std::ostream& err) {
  const auto& known = kSubcommands;
  if (std::find(known.begin(), known.end(), options.subcommand) == known.end()) {
    err << fmt::format("unknown subcommand '{}'\n", options.subcommand);
    return kExitUsage;
  }
  try {
    Context ctx;
    ctx.config = Config::load(options.config_path);
    ctx.config_dir = fs::path(options.config_path).parent_path();
    ctx.seed = options.seed ? *options.seed : ctx.config.get_u64("seed", 0);
    ctx.workers = options.workers > 0 ? options.workers : default_workers();
    ctx.out_dir = options.out_dir ? fs::path(*options.out_dir) : fs::path(ctx.config.get_string("output.directory", "out"));
    for (const auto& f : ctx.config.get_strings("output.formats", {"csv"})) {
      if (f != "csv") throw ConfigError("output.formats", fmt::format("unsupported format '{}' (csv)", f));
    }
    spdlog::info("{}: seed {}, {} workers, output {}", options.subcommand, ctx.seed, ctx.workers, ctx.out_dir.string());

    if (options.subcommand == "verify") run_verify(ctx);
    if (options.subcommand == "couple") run_couple(ctx);
    if (options.subcommand == "tv") run_tv(ctx);
    if (options.subcommand == "mix") run_mix(ctx);
    if (options.subcommand == "var") run_var(ctx);
    if (options.subcommand == "fit") run_fit(ctx);
    write_outputs(ctx, options.subcommand);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    err << options.subcommand << " failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace mcre::cli
