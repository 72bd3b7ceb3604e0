#include <cmath>

#include <fmt/format.h>

#include "mcre/errors.hpp"
#include "mcre/models.hpp"

namespace mcre {

AdditiveModel linear_additive(double slope, const ContractionParams& declared) {
  AdditiveSpec spec;
  spec.name = "additive";
  spec.mu = [slope](const State& y, const EnvState&) { return State(slope * y); };
  spec.contraction = declared;
  return make_additive(std::move(spec));
}

namespace {

ZooEntry additive_gaussian() {
  return {"additive", linear_additive(0.5, {0.5, 1.0}), EnvironmentSpec::iid_gaussian()};
}

ZooEntry sgld() {
  return {"sgld", make_sgld({1.0, 0.1, 0.5}).model, EnvironmentSpec::iid_gaussian()};
}

ZooEntry threshold() {
  ThresholdParams p;
  p.thresholds = {0.0};
  p.slopes = {0.5, -0.5};
  p.intercepts = {1.0, -1.0};
  return {"threshold", make_threshold(p).model, EnvironmentSpec::iid_gaussian()};
}

ZooEntry stochvol() {
  StochVolParams p;
  p.b_coeffs.resize(65);
  for (std::size_t k = 0; k < p.b_coeffs.size(); ++k) p.b_coeffs[k] = std::pow(1.0 + k, -1.5);
  p.innovation_sd = 0.3;
  p.corr = 0.3;
  auto m = make_stochvol(p);
  return {"stochvol", m.model, m.environment};
}

ZooEntry multivar() {
  MultivarParams p;
  p.A = Matrix(2, 2);
  p.A << 0.2, 0.8, 0.0, 0.1;
  p.B = Matrix(2, 2);
  p.B << 0.3, 0.8, 0.0, 0.2;
  p.b = State(2);
  p.b << 0.0, 0.0;
  p.c = State(2);
  p.c << 0.1, -0.1;
  p.box_half_width = 1.0;
  p.noise = NoiseLaw::gaussian(2);
  return {"multivar", make_multivar(p).model, EnvironmentSpec::iid_gaussian()};
}

}  // namespace

std::vector<ZooEntry> model_zoo() { return {additive_gaussian(), sgld(), threshold(), stochvol(), multivar()}; }

ZooEntry zoo_model(const std::string& key) {
  for (auto& entry : model_zoo()) {
    if (entry.key == key) return entry;
  }
  throw SpecError(fmt::format("unknown zoo model '{}'", key));
}

}  // namespace mcre
