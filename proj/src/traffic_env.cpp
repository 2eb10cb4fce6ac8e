#include "avlab/traffic_env.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "avlab/errors.hpp"

namespace avlab {

double min_flux(const TrafficState& state, const FlowParams& p) {
  double phi = flux(state.rho.front(), p);
  for (double rho : state.rho) phi = std::min(phi, flux(rho, p));
  return phi;
}

double total_variation(const std::vector<double>& values) {
  if (values.empty())
    throw std::domain_error("total_variation: empty sequence");
  double tv = 0.0;
  for (std::size_t j = 0; j + 1 < values.size(); ++j)
    tv += std::abs(values[j + 1] - values[j]);
  return tv;
}

double reward(const TrafficState& state, const AvState& av,
              const RewardWeights& weights, const FlowParams& p) {
  double phi = flux(state.rho.front(), p);
  double tv = 0.0;
  double prev_v = velocity(state.rho.front(), p);
  for (std::size_t j = 1; j < state.rho.size(); ++j) {
    phi = std::min(phi, flux(state.rho[j], p));
    const double v = velocity(state.rho[j], p);
    tv += std::abs(v - prev_v);
    prev_v = v;
  }
  return weights.w1 * phi + weights.w2 * av.y_dot - weights.w3 * tv;
}

TrafficEnv::TrafficEnv(const ScenarioConfig& config) : config_(config) {
  validate(config_);
  const double dt_max = cfl_timestep(config_.grid, config_.flow, config_.cfl);
  substeps_ = std::max(1, static_cast<int>(std::ceil(config_.dt_ctrl / dt_max - 1e-12)));
  solver_dt_ = config_.dt_ctrl / substeps_;
  episode_steps_ = static_cast<int>(std::ceil(config_.horizon / config_.dt_ctrl - 1e-12));
}

std::vector<double> TrafficEnv::reset(std::uint64_t /*seed*/) {
  // The world build is deterministic; the seed only tags the episode.
  std::tie(state_, av_, grid_, flow_) = build(config_);
  diagnostics_ = StepDiagnostics{};
  steps_taken_ = 0;
  done_ = false;
  return observe();
}

EnvStep TrafficEnv::step(double action) {
  if (done_)
    throw std::logic_error("TrafficEnv::step called on a finished episode");
  if (std::isnan(action))
    throw std::domain_error("TrafficEnv::step: NaN action");

  const double clamped = std::clamp(action, 0.0, 1.0);
  av_.v_cmd = clamped * flow_.v_max;

  double reward_sum = 0.0;
  for (int k = 0; k < substeps_; ++k) {
    advance(state_, av_, grid_, flow_, solver_dt_, &diagnostics_);
    const double r = reward(state_, av_, config_.weights, flow_);
    const double cap = config_.weights.w1 * flow_.v_max * flow_.rho_max / 4.0 +
                       config_.weights.w2 * flow_.v_max;
    const double floor = -config_.weights.w3 * 2.0 * grid_.n_cells * flow_.v_max;
    if (!(r >= floor && r <= cap + 1e-12))
      throw IntegrityError("reward outside its a-priori bounds");
    reward_sum += r;
    if (observer_) observer_(state_, av_);
  }

  EnvStep out;
  out.reward = reward_sum / substeps_;
  done_ = ++steps_taken_ >= episode_steps_;
  out.done = done_;
  out.observation = observe();

  std::vector<double> v_field(state_.rho.size());
  for (std::size_t j = 0; j < v_field.size(); ++j)
    v_field[j] = velocity(state_.rho[j], flow_);
  out.info["min_flux"] = min_flux(state_, flow_);
  out.info["tv_velocity"] = total_variation(v_field);
  out.info["ego_speed"] = av_.y_dot;
  out.info["v_cmd"] = av_.v_cmd;
  return out;
}

std::vector<double> TrafficEnv::observe() const {
  const int n = grid_.n_cells;
  const int m = config_.n_obs;
  std::vector<double> obs;
  obs.reserve(m + 2);

  if (m == n) {
    for (double rho : state_.rho) obs.push_back(rho / flow_.rho_max);
  } else if (n % m == 0) {
    const int block = n / m;
    for (int b = 0; b < m; ++b) {
      double s = 0.0;
      for (int j = b * block; j < (b + 1) * block; ++j) s += state_.rho[j];
      obs.push_back(s / block / flow_.rho_max);
    }
  } else {
    // Area-weighted pooling for bin widths that are not whole cells.
    std::vector<double> bins(m, 0.0);
    const double ratio = static_cast<double>(m) / n;
    for (int j = 0; j < n; ++j) {
      const double lo = j * ratio, hi = (j + 1) * ratio;
      int b = static_cast<int>(lo);
      double left = lo;
      while (left < hi - 1e-15 && b < m) {
        const double right = std::min(hi, static_cast<double>(b + 1));
        bins[b] += state_.rho[j] * (right - left);
        left = right;
        ++b;
      }
    }
    for (double v : bins) obs.push_back(v / flow_.rho_max);
  }

  obs.push_back(av_.y / grid_.length);
  obs.push_back(av_.y_dot / flow_.v_max);
  return obs;
}

}  // namespace avlab
