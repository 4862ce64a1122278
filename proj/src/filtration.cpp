#include "efilt/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "efilt/errors.hpp"
#include "efilt/montecarlo.hpp"

namespace efilt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_internal(const FiltrationConfig& cfg) { return std::holds_alternative<InternalNoiseSpec>(cfg.noise); }

std::size_t register_dim(const FiltrationConfig& cfg) {
  const std::size_t t = cfg.codec.transmission_count();
  if (const auto* in = std::get_if<InternalNoiseSpec>(&cfg.noise)) return 1 + t * in->error_count();
  return t + 1;
}

PhaseNoiseSpec segment_phase_noise(const FiltrationConfig& cfg) {
  if (cfg.length) {
    const double a = alpha_from_length(*cfg.length);
    return PhaseNoiseSpec::uniform(cfg.codec.transmission_count(),
                                   std::pow(a * a, 1.0 / static_cast<double>(cfg.segments)));
  }
  return std::get<PhaseNoiseSpec>(cfg.noise);
}

CVector normalized_input(const FiltrationConfig& cfg) {
  const double n = cfg.input.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("input state must be nonzero");
  return cfg.input / n;
}

LabeledState initial_state(const FiltrationConfig& cfg, const CVector& amps) {
  std::vector<Factor> factors{Factor::system("channel", cfg.codec.source_count())};
  if (const auto* in = std::get_if<InternalNoiseSpec>(&cfg.noise)) {
    factors.push_back(Factor::system("internal", in->internal_dim()));
  }
  return LabeledState(std::move(factors), amps, cfg.dim_cap);
}

struct Propagated {
  LabeledState state;
  double leak = 0.0;
};

Propagated propagate(const FiltrationConfig& cfg, LabeledState state) {
  const std::size_t s = cfg.codec.source_count();
  const std::size_t t = cfg.codec.transmission_count();
  const std::size_t reg_dim = register_dim(cfg);
  double leak = 0.0;
  std::size_t env = 0;
  std::optional<PhaseNoiseSpec> phase;
  if (!is_internal(cfg)) phase = segment_phase_noise(cfg);
  std::optional<PhaseNoiseSpec> module;
  if (cfg.module_alpha2) module = PhaseNoiseSpec::uniform(t, *cfg.module_alpha2);

  for (std::size_t q = 0; q < cfg.segments; ++q) {
    state = state.with_register("E" + std::to_string(q + 1), reg_dim, cfg.dim_cap);
    const std::size_t seg = env++;
    state = apply(state, cfg.codec.encoder(), 0, cfg.dim_cap);
    if (phase) {
      state = apply_phase_noise(state, *phase, seg, 0);
    } else {
      state = apply_internal_noise(state, std::get<InternalNoiseSpec>(cfg.noise), seg, 0, 1);
    }
    state = apply(state, cfg.codec.decoder(), 0, cfg.dim_cap);

    const std::size_t reg = state.environment_factor(seg);
    const std::size_t rs = state.stride(reg);
    const std::size_t cs = state.stride(0);
    double here = 0.0;
    for (std::size_t flat = 0; flat < state.dim(); ++flat) {
      if ((flat / rs) % reg_dim != 0 || (flat / cs) % t < s) continue;
      here += std::norm(state.amplitudes()(static_cast<Eigen::Index>(flat)));
    }
    leak = std::max(leak, here);

    if (module) {
      state = state.with_register("M" + std::to_string(q + 1), t + 1, cfg.dim_cap);
      state = apply_phase_noise(state, *module, env++, 0);
    }
    state = truncate_factor(state, 0, s);
  }
  return {std::move(state), leak};
}

double undisturbed_weight(const LabeledState& state) {
  const auto envs = state.environment_factors();
  double w = 0.0;
  for (std::size_t flat = 0; flat < state.dim(); ++flat) {
    bool clean = true;
    for (const std::size_t f : envs) {
      if ((flat / state.stride(f)) % state.factor(f).dim != 0) {
        clean = false;
        break;
      }
    }
    if (clean) w += std::norm(state.amplitudes()(static_cast<Eigen::Index>(flat)));
  }
  return w;
}

}  // namespace

void validate(const FiltrationConfig& cfg) {
  if (cfg.segments == 0) throw ConfigError("Q must be >= 1");
  require_faithful(cfg.codec, cfg.force_codec);
  const std::size_t t = cfg.codec.transmission_count();
  if (const auto* p = std::get_if<PhaseNoiseSpec>(&cfg.noise)) {
    if (!cfg.length && p->channels() != t) {
      throw ConfigError("phase noise has " + std::to_string(p->channels()) + " channels, codec transmits on " +
                        std::to_string(t));
    }
  } else if (cfg.length) {
    throw ConfigError("a length model needs phase noise");
  }
  if (cfg.module_alpha2 && !(*cfg.module_alpha2 >= 0.0 && *cfg.module_alpha2 <= 1.0)) {
    throw ConfigError("module alpha^2 must lie in [0, 1]");
  }
  const auto want = static_cast<Eigen::Index>(cfg.codec.source_count() * internal_dim(cfg));
  if (cfg.input.size() != want) {
    throw ConfigError("input has " + std::to_string(cfg.input.size()) + " amplitudes, expected " +
                      std::to_string(want));
  }
}

std::size_t internal_dim(const FiltrationConfig& cfg) {
  if (const auto* in = std::get_if<InternalNoiseSpec>(&cfg.noise)) return in->internal_dim();
  return 1;
}

FiltrationOutcome run_exact(const FiltrationConfig& cfg) {
  validate(cfg);
  const CVector psi = normalized_input(cfg);
  const Propagated out = propagate(cfg, initial_state(cfg, psi));
  FiltrationOutcome r;
  r.p_success = out.state.norm_squared();
  r.p_success_no_error = undisturbed_weight(out.state);
  r.p_success_error = std::max(0.0, r.p_success - r.p_success_no_error);
  r.discarded_undisturbed = out.leak;
  if (r.p_success > 0) {
    const CMatrix rho = reduced_system_matrix(out.state);
    r.conditional_fidelity = std::clamp((psi.adjoint() * rho * psi)(0, 0).real() / r.p_success, 0.0, 1.0);
  }
  if (cfg.codec.source_count() == 2 && !is_internal(cfg)) r.visibility = measure_visibility(cfg);
  return r;
}

double measure_visibility(const FiltrationConfig& cfg) {
  validate(cfg);
  if (cfg.codec.source_count() != 2 || is_internal(cfg)) {
    throw ConfigError("visibility needs two source channels and phase noise");
  }
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  double imax = 0.0;
  double imin = 1.0;
  for (int k = 0; k < 8; ++k) {
    CVector in(2);
    in << 1.0 / std::sqrt(2.0), std::polar(1.0 / std::sqrt(2.0), kTwoPi * k / 8.0);
    const Propagated out = propagate(cfg, initial_state(cfg, in));
    const CMatrix rho = reduced_system_matrix(out.state);
    const double i = (plus.adjoint() * rho * plus)(0, 0).real();
    imax = std::max(imax, i);
    imin = std::min(imin, i);
  }
  return (imax + imin) > 0 ? (imax - imin) / (imax + imin) : 0.0;
}

NonuniformReport run_nonuniform(const FiltrationConfig& cfg) {
  if (cfg.codec.source_count() != 1 || is_internal(cfg) || cfg.length || cfg.segments != 1) {
    throw ConfigError("non-uniform analysis needs one source channel, one segment and per-channel phase noise");
  }
  FiltrationConfig aligned = cfg;
  const PhaseNoiseSpec spec = std::get<PhaseNoiseSpec>(cfg.noise).phase_aligned();
  aligned.noise = spec;
  NonuniformReport rep;
  rep.exact = run_exact(aligned);
  rep.mean_alpha = spec.mean_alpha();
  const double t = static_cast<double>(spec.channels());
  rep.analytic_no_error = std::norm(rep.mean_alpha);
  rep.analytic_error = spec.mean_beta_squared() / t;
  rep.bound = (1.0 - rep.analytic_no_error) / t;
  rep.bound_holds = rep.analytic_error <= rep.bound + kTol;
  return rep;
}

std::vector<CMatrix> pipeline_kraus(const FiltrationConfig& cfg) {
  validate(cfg);
  const std::size_t sys = cfg.codec.source_count() * internal_dim(cfg);
  std::vector<CMatrix> kraus;
  for (std::size_t i = 0; i < sys; ++i) {
    CVector e = CVector::Zero(static_cast<Eigen::Index>(sys));
    e(static_cast<Eigen::Index>(i)) = 1.0;
    const Propagated out = propagate(cfg, initial_state(cfg, e));
    const std::size_t envdim = out.state.dim() / sys;
    if (kraus.empty()) kraus.assign(envdim, CMatrix::Zero(static_cast<Eigen::Index>(sys), static_cast<Eigen::Index>(sys)));
    for (std::size_t r = 0; r < sys; ++r) {
      for (std::size_t env = 0; env < envdim; ++env) {
        kraus[env](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
            out.state.amplitudes()(static_cast<Eigen::Index>(r * envdim + env));
      }
    }
  }
  return kraus;
}

MonteCarloOutcome run_monte_carlo(const FiltrationConfig& cfg, std::size_t trials, std::uint64_t seed,
                                  std::size_t workers, PhaseDistribution dist) {
  validate(cfg);
  if (is_internal(cfg)) throw ConfigError("random-phase sampling supports phase noise only");
  if (trials < 2) throw ConfigError("Monte-Carlo needs at least 2 trials");
  const PhaseNoiseSpec spec = segment_phase_noise(cfg);
  const std::size_t s = cfg.codec.source_count();
  const std::size_t t = cfg.codec.transmission_count();
  const CMatrix& ue = cfg.codec.encoder().matrix();
  const CMatrix& ud = cfg.codec.decoder().matrix();
  const CVector psi = normalized_input(cfg);
  const double module_mean = cfg.module_alpha2 ? std::sqrt(*cfg.module_alpha2) : 1.0;
  const std::size_t vars = 2 + 2 * s * s;

  auto trial = [&](std::mt19937_64& rng, std::span<double> out) {
    CVector u = psi;
    for (std::size_t q = 0; q < cfg.segments; ++q) {
      CVector v = ue * u;
      for (std::size_t j = 0; j < t; ++j) {
        const cplx a = spec[j].alpha;
        const double mag = std::abs(a);
        const double phi = sample_phase({std::min(mag, 1.0), dist}, rng);
        const cplx rot = mag > 0 ? a / mag : cplx(1.0, 0.0);
        v(static_cast<Eigen::Index>(j)) *= rot * std::polar(1.0, phi);
      }
      CVector w = ud * v;
      if (cfg.module_alpha2) {
        for (std::size_t j = 0; j < t; ++j) {
          w(static_cast<Eigen::Index>(j)) *= std::polar(1.0, sample_phase({module_mean, dist}, rng));
        }
      }
      u = w.head(static_cast<Eigen::Index>(s));
    }
    out[0] = u.squaredNorm();
    out[1] = std::norm(psi.dot(u));
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        const cplx c = u(static_cast<Eigen::Index>(i)) * std::conj(u(static_cast<Eigen::Index>(j)));
        out[2 + 2 * (i * s + j)] = c.real();
        out[3 + 2 * (i * s + j)] = c.imag();
      }
    }
  };
  const MomentAccumulator acc = run_sharded(trials, workers, seed, vars, trial);

  MonteCarloOutcome r;
  r.trials = trials;
  r.workers = workers;
  r.p_success = acc.mean(0);
  r.p_success_stderr = acc.stderr_of_mean(0);
  r.conditional_fidelity = acc.mean(1) / acc.mean(0);
  r.fidelity_stderr = acc.ratio_stderr(1, 0);
  r.rho = CMatrix(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j)
      r.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cplx(acc.mean(2 + 2 * (i * s + j)), acc.mean(3 + 2 * (i * s + j)));
  if (s == 2) {
    const std::size_t xi = 2 + 2 * 1;
    const double x = acc.mean(xi);
    const double y = acc.mean(xi + 1);
    const double d = acc.mean(0);
    const double c = std::hypot(x, y);
    r.visibility = 2.0 * c / d;
    if (c > 0) {
      std::vector<double> grad(vars, 0.0);
      grad[0] = -*r.visibility / d;
      grad[xi] = 2.0 * x / (c * d);
      grad[xi + 1] = 2.0 * y / (c * d);
      r.visibility_stderr = acc.delta_stderr(grad);
    }
  }
  return r;
}

Estimate bloch_average_fidelity(const FiltrationConfig& cfg, std::size_t trials, std::uint64_t seed,
                                std::size_t workers) {
  const std::vector<CMatrix> kraus = pipeline_kraus(cfg);
  if (kraus.front().rows() != 2) throw ConfigError("Bloch-sphere average needs a two-level source");
  if (trials < 2) throw ConfigError("Monte-Carlo needs at least 2 trials");
  auto trial = [&](std::mt19937_64& rng, std::span<double> out) {
    std::normal_distribution<double> g(0.0, 1.0);
    CVector psi(2);
    psi << cplx(g(rng), g(rng)), cplx(g(rng), g(rng));
    psi.normalize();
    double num = 0.0;
    double den = 0.0;
    for (const CMatrix& k : kraus) {
      const CVector kp = k * psi;
      num += std::norm(psi.dot(kp));
      den += kp.squaredNorm();
    }
    out[0] = den > 0 ? num / den : 0.0;
  };
  const MomentAccumulator acc = run_sharded(trials, workers, seed, 1, trial);
  return {acc.mean(0), acc.stderr_of_mean(0)};
}

double success_probability_analytic(double alpha2, std::size_t transmission) {
  if (transmission == 0) throw ConfigError("T must be >= 1");
  return alpha2 + (1.0 - alpha2) / static_cast<double>(transmission);
}

double visibility_analytic(std::size_t transmission, double alpha2) {
  if (transmission == 0) throw ConfigError("T must be >= 1");
  const double ta = static_cast<double>(transmission) * alpha2;
  const double den = ta + (1.0 - alpha2);
  return den > 0 ? ta / den : 0.0;
}

double series_error_analytic(double gamma, double length, std::size_t segments, std::size_t transmission) {
  if (segments == 0 || transmission == 0) throw ConfigError("Q and T must be >= 1");
  const double seg = std::exp(-gamma * length / static_cast<double>(segments));
  return std::pow(seg + (1.0 - seg) / static_cast<double>(transmission), static_cast<double>(segments)) -
         std::exp(-gamma * length);
}

double series_two_segment_analytic(double alpha, std::size_t transmission) {
  if (transmission == 0) throw ConfigError("T must be >= 1");
  const double a = std::abs(alpha);
  const double t = static_cast<double>(transmission);
  const double r = (1.0 - a) * (1.0 + 2.0 * t * a - a) / (t * t);
  if (a > 0.0 && a < 1.0 && transmission >= 2 && !(r < (1.0 - a * a) / t)) {
    throw NumericalCheckError("two-segment error does not beat the single-shot error");
  }
  return r;
}

double series_limit_analytic(double alpha, std::size_t transmission) {
  if (transmission == 0) throw ConfigError("T must be >= 1");
  const double a = std::abs(alpha);
  const double t = static_cast<double>(transmission);
  return std::pow(a, 2.0 * (t - 1.0) / t) - a * a;
}

double collective_state_fidelity_analytic(double alpha2, double a1_sq) {
  const double b2 = 1.0 - alpha2;
  const double a2_sq = 1.0 - a1_sq;
  return (alpha2 + b2 / 3.0 * (1.0 + 2.0 * a1_sq * a2_sq)) / (alpha2 + 2.0 * b2 / 3.0);
}

double collective_average_fidelity_analytic(double alpha2) {
  const double b2 = 1.0 - alpha2;
  return (alpha2 + 4.0 * b2 / 9.0) / (alpha2 + 2.0 * b2 / 3.0);
}

double trivial_average_fidelity_analytic(double alpha2) { return 2.0 / 3.0 + alpha2 / 3.0; }

ThresholdReport threshold_report(double fidelity) {
  ThresholdReport r;
  r.bb84_secure = fidelity > 0.85;
  r.werner_entangled = fidelity > 0.5;
  r.at_boundary = fidelity == 0.85 || fidelity == 0.5;
  return r;
}

}  // namespace efilt
