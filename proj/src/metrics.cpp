#include "avlab/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "avlab/errors.hpp"
#include "avlab/traffic_env.hpp"

namespace avlab {

void MetricsAccumulator::add_step(const TrafficState& state, const AvState& av,
                                  const FlowParams& p) {
  const std::size_t n = state.rho.size();
  double flux_sum = 0.0, v_sum = 0.0, v_sq = 0.0, phi = 1e300;
  for (double rho : state.rho) {
    const double f = flux(rho, p);
    const double v = velocity(rho, p);
    flux_sum += f;
    v_sum += v;
    v_sq += v * v;
    phi = std::min(phi, f);
  }
  const double v_mean = v_sum / n;
  const double var = std::max(0.0, v_sq / n - v_mean * v_mean);
  flux_sum_ += flux_sum / n;
  speed_sum_ += v_mean;
  deviation_sum_ += std::sqrt(var);
  ego_sum_ += av.y_dot;
  min_flux_ = std::min(min_flux_, phi);
  ++steps_;
}

void MetricsAccumulator::add_reward(double control_step_reward) {
  return_sum_ += control_step_reward;
}

EpisodeMetrics MetricsAccumulator::finalize() const {
  EpisodeMetrics m;
  if (steps_ == 0) return m;
  m.avg_flux = flux_sum_ / steps_;
  m.ego_speed = ego_sum_ / steps_;
  m.avg_speed = speed_sum_ / steps_;
  m.avg_deviation = deviation_sum_ / steps_;
  m.min_flux_over_time = min_flux_;
  m.episode_return = return_sum_;
  return m;
}

Controller policy_controller(const GaussianPolicy& policy, EvalMode mode) {
  if (mode == EvalMode::Deterministic) {
    return [&policy](const std::vector<double>& obs, Rng&) {
      return policy.deterministic(obs);
    };
  }
  return [&policy](const std::vector<double>& obs, Rng& rng) {
    return policy.sample(obs, rng).first;
  };
}

Controller constant_controller(double action) {
  return [action](const std::vector<double>&, Rng&) { return action; };
}

EvalRecord evaluate(const ScenarioConfig& config, const Controller& controller,
                    int n_episodes, std::uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes must be >= 1");
  EvalRecord record;
  std::vector<EpisodeMetrics> episodes;

  for (int e = 0; e < n_episodes; ++e) {
    TrafficEnv env(config);
    MetricsAccumulator acc;
    env.set_observer([&](const TrafficState& s, const AvState& a) {
      acc.add_step(s, a, env.flow());
    });
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(e)));
    std::vector<double> obs = env.reset(mix_seed(seed, e));
    std::vector<double> commands;
    bool done = false;
    while (!done) {
      const double action = controller(obs, rng);
      EnvStep step = env.step(action);
      commands.push_back(env.av().v_cmd);
      acc.add_reward(step.reward);
      obs = std::move(step.observation);
      done = step.done;
    }
    episodes.push_back(acc.finalize());
    record.command_sequences.push_back(std::move(commands));
  }

  AggregateMetrics agg;
  agg.n_episodes = n_episodes;
  auto fold = [&](auto member) {
    double mean = 0.0;
    for (const auto& m : episodes) mean += m.*member;
    mean /= n_episodes;
    double var = 0.0;
    for (const auto& m : episodes) var += (m.*member - mean) * (m.*member - mean);
    var /= n_episodes;
    agg.mean.*member = mean;
    agg.stddev.*member = std::sqrt(var);
  };
  fold(&EpisodeMetrics::avg_flux);
  fold(&EpisodeMetrics::ego_speed);
  fold(&EpisodeMetrics::avg_speed);
  fold(&EpisodeMetrics::avg_deviation);
  fold(&EpisodeMetrics::min_flux_over_time);
  fold(&EpisodeMetrics::episode_return);
  record.metrics = agg;
  return record;
}

void export_time_space(const Trace& trace, const std::string& path) {
  if (trace.states.empty())
    throw std::invalid_argument("export_time_space: empty trace");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write time-space export: " + path);

  const std::size_t n = trace.states.front().rho.size();
  out << "t,y,y_dot,v_cmd";
  for (std::size_t j = 0; j < n; ++j) out << ",rho_" << j;
  out << "\n";

  char buf[32];
  auto put = [&](double x, char sep) {
    std::snprintf(buf, sizeof buf, "%.9g", x);
    out << buf << sep;
  };
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const auto& s = trace.states[i];
    const auto& a = trace.avs[i];
    put(s.time, ',');
    put(a.y, ',');
    put(a.y_dot, ',');
    std::snprintf(buf, sizeof buf, "%.9g", a.v_cmd);
    out << buf;
    for (double rho : s.rho) {
      std::snprintf(buf, sizeof buf, "%.9g", rho);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed while writing time-space export: " + path);
}

LearningCurveSummary learning_curve_summary(const std::vector<double>& curve) {
  constexpr std::size_t kWindow = 5;
  if (curve.size() < 10)
    throw std::domain_error("learning_curve_summary: need at least 10 iterations");

  auto window_mean = [&](std::size_t start) {
    double s = 0.0;
    for (std::size_t i = start; i < start + kWindow; ++i) s += curve[i];
    return s / kWindow;
  };

  LearningCurveSummary out;
  out.baseline_return = window_mean(0);
  out.best_smoothed_return = out.baseline_return;
  for (std::size_t start = 0; start + kWindow <= curve.size(); ++start)
    out.best_smoothed_return = std::max(out.best_smoothed_return, window_mean(start));
  const double denom = std::abs(out.baseline_return);
  out.improvement_fraction =
      denom > 0.0 ? (out.best_smoothed_return - out.baseline_return) / denom : 0.0;
  return out;
}

std::string metrics_to_json(const AggregateMetrics& metrics) {
  nlohmann::json j{
      {"n_episodes", metrics.n_episodes},
      {"avg_flux", {{"mean", metrics.mean.avg_flux}, {"std", metrics.stddev.avg_flux}}},
      {"ego_speed", {{"mean", metrics.mean.ego_speed}, {"std", metrics.stddev.ego_speed}}},
      {"avg_speed", {{"mean", metrics.mean.avg_speed}, {"std", metrics.stddev.avg_speed}}},
      {"avg_deviation",
       {{"mean", metrics.mean.avg_deviation}, {"std", metrics.stddev.avg_deviation}}},
      {"min_flux_over_time",
       {{"mean", metrics.mean.min_flux_over_time}, {"std", metrics.stddev.min_flux_over_time}}},
      {"episode_return",
       {{"mean", metrics.mean.episode_return}, {"std", metrics.stddev.episode_return}}}};
  return j.dump(1) + "\n";
}

std::string metrics_table(
    const std::vector<std::pair<std::string, AggregateMetrics>>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "policy" << std::right << std::setw(12)
     << "avg_flux" << std::setw(12) << "ego_speed" << std::setw(12) << "avg_speed"
     << std::setw(16) << "avg_deviation" << "\n";
  os << std::string(76, '-') << "\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& [label, m] : rows) {
    os << std::left << std::setw(24) << label << std::right << std::setw(12)
       << m.mean.avg_flux << std::setw(12) << m.mean.ego_speed << std::setw(12)
       << m.mean.avg_speed << std::setw(16) << m.mean.avg_deviation << "\n";
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("failed while writing file: " + path);
}

}  // namespace avlab
