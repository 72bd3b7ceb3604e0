#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "mcre/errors.hpp"
#include "mcre/models.hpp"

namespace mcre {

RiskEstimate extract_var_cvar(const std::vector<double>& chain_samples, const std::vector<double>& losses,
                              double a, double alpha_level, int grid_points) {
  if (chain_samples.empty()) throw InputError("extract_var_cvar needs at least one chain sample");
  if (losses.empty()) throw InputError("extract_var_cvar needs at least one loss");
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw InputError("alpha_level must lie in (0,1)");
  if (!(a >= 0.0)) throw InputError("regularization weight a must be >= 0");
  if (grid_points < 1) throw InputError("grid needs at least one point");

  std::vector<double> sorted = losses;
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  // suffix[i] = sum of sorted[i..n)
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + sorted[i];

  const auto [lo_it, hi_it] = std::minmax_element(chain_samples.begin(), chain_samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const int points = hi > lo ? grid_points : 1;
  const double scale = 1.0 / ((1.0 - alpha_level) * static_cast<double>(n));

  double best_reg = INFINITY;
  double best_reg_y = lo;
  double best_reg_b = 0.0;
  double best_plain = INFINITY;
  double best_plain_y = lo;
  std::size_t idx = 0;  // first loss > y
  for (int k = 0; k < points; ++k) {
    const double y = points == 1 ? lo : lo + (hi - lo) * k / (points - 1);
    while (idx < n && sorted[idx] <= y) ++idx;
    const double excess = suffix[idx] - static_cast<double>(n - idx) * y;
    const double b = y + scale * excess;
    const double reg = a * y * y + b;
    if (reg < best_reg) {
      best_reg = reg;
      best_reg_y = y;
      best_reg_b = b;
    }
    if (b < best_plain) {
      best_plain = b;
      best_plain_y = y;
    }
  }

  RiskEstimate out;
  out.var_estimate = best_reg_y;
  out.cvar_estimate = best_reg_b;
  out.regularization_bias = best_reg_y - best_plain_y;
  out.degenerate = sorted.front() == sorted.back() || points == 1;
  return out;
}

std::vector<RiskCheckpoint> sgld_risk_path(const SgldParams& params, const std::vector<double>& losses,
                                           const std::vector<std::int64_t>& checkpoints, double y0,
                                           RngStream& rng, bool resample) {
  make_sgld(params);  // rejects invalid (a, h, alpha)
  if (losses.empty()) throw InputError("sgld_risk_path needs at least one loss");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw InputError("checkpoints must be positive and strictly increasing");
    }
  }
  const std::int64_t steps = checkpoints.empty() ? 0 : checkpoints.back();
  const double h = params.h;
  const double noise_scale = std::sqrt(2.0 * h);
  const auto L = static_cast<std::int64_t>(losses.size());

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(steps));
  std::vector<RiskCheckpoint> out;
  double y = y0;
  std::size_t next = 0;
  for (std::int64_t n = 0; n < steps; ++n) {
    const double x = resample ? losses[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(L)))]
                              : losses[static_cast<std::size_t>(n % L)];
    y = y - 2.0 * params.a * h * y - h * sgld_gradient(params, y, x) + noise_scale * rng.normal();
    if (!std::isfinite(y)) throw NumericOverflow(fmt::format("sgld iterate left the doubles at step {}", n + 1));
    samples.push_back(y);
    if (n + 1 == checkpoints[next]) {
      const RiskEstimate r = extract_var_cvar(samples, losses, params.a, params.alpha_level);
      out.push_back({n + 1, r.var_estimate, r.cvar_estimate});
      ++next;
    }
  }
  return out;
}

namespace {

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  return s.substr(start);
}

}  // namespace

std::vector<double> load_loss_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open loss file {}", path));
  std::string line;
  if (!std::getline(in, line)) throw InputError(fmt::format("{}: empty file, expected header `loss`", path));
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (trim(line) != "loss") throw InputError(fmt::format("{}:1: expected header `loss`", path));

  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string field = trim(line);
    if (field.empty() && in.peek() == std::char_traits<char>::eof()) break;
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw InputError(fmt::format("{}:{}: malformed loss value '{}'", path, line_no, field));
    }
    values.push_back(v);
  }
  if (values.empty()) throw InputError(fmt::format("{}: no loss values", path));
  return values;
}

}  // namespace mcre
