#include "mcre/chain.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "mcre/errors.hpp"

namespace mcre {

namespace {

std::string format_state(const State& s) {
  std::ostringstream out;
  out << '(';
  for (Eigen::Index i = 0; i < s.size(); ++i) out << (i ? "," : "") << s(i);
  out << ')';
  return out.str();
}

}  // namespace

void ContractionParams::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) throw SpecError(fmt::format("contraction rho={} not in (0,1)", rho));
  if (!(R >= 0.0) || !std::isfinite(R)) throw SpecError(fmt::format("contraction R={} must be >= 0", R));
}

void ChainSpec::validate() const {
  if (dim_state < 1 || dim_state > kMaxDim) throw SpecError(fmt::format("{}: bad state dimension", name));
  if (!update) throw SpecError(fmt::format("{}: missing update map", name));
  if (!(theta > 0.0 && theta <= 1.0)) throw SpecError(fmt::format("{}: theta must be in (0,1]", name));
  if (metric.dim() != dim_state) throw SpecError(fmt::format("{}: metric dimension mismatch", name));
  contraction.validate();
}

State apply_update(const ChainSpec& spec, const State& y, const EnvState& x, const State& e) {
  State out = spec.update(y, x, e);
  if (!out.allFinite()) {
    throw NumericOverflow(fmt::format("{}: non-finite state from y={} x=({},{}) e={}", spec.name,
                                      format_state(y), x.value, x.next_innovation, format_state(e)));
  }
  return out;
}

State step(const ChainSpec& spec, const State& y, const EnvState& x, RngStream& rng) {
  return apply_update(spec, y, x, spec.noise.sample(rng));
}

std::vector<State> run_along(const ChainSpec& spec, const EnvironmentWindow& window, std::int64_t start,
                             const State& y0, std::int64_t n, RngStream& rng) {
  std::vector<State> states;
  states.reserve(static_cast<std::size_t>(n) + 1);
  states.push_back(y0);
  for (std::int64_t k = 0; k < n; ++k) states.push_back(step(spec, states.back(), window.at(start + k), rng));
  return states;
}

Trajectory simulate_forward(const ChainSpec& spec, const EnvironmentSpec& env, const State& y0,
                            std::int64_t n, RngStream& rng) {
  if (n < 0) throw InputError("simulate_forward needs n >= 0");
  Trajectory t;
  t.env_window = generate_window(env, 0, n, rng);
  t.states = run_along(spec, t.env_window, 0, y0, n, rng);
  return t;
}

Trajectory simulate_backward(const ChainSpec& spec, const EnvironmentSpec& env, const State& y0,
                             std::int64_t n, RngStream& rng) {
  if (n < 1) throw InputError("simulate_backward needs n >= 1");
  Trajectory t;
  t.env_window = generate_window(env, -n, 0, rng);
  t.states = run_along(spec, t.env_window, -n, y0, n, rng);
  return t;
}

}  // namespace mcre
