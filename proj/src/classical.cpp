#include "efilt/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "efilt/errors.hpp"

namespace efilt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kFringePoints = 16;

void check_transmission(std::size_t t) {
  if (t == 0) throw ConfigError("T must be >= 1");
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> fringe(double mean_s, cplx mean_c) {
  std::vector<double> v(kFringePoints);
  for (int k = 0; k < kFringePoints; ++k) {
    const double phi = kTwoPi * k / kFringePoints;
    v[static_cast<std::size_t>(k)] = 0.5 * (mean_s + 2.0 * (std::polar(1.0, phi) * mean_c).real());
  }
  return v;
}

}  // namespace

double coherent_current(const CoherentConfig& cfg) {
  check_transmission(cfg.transmission);
  if (std::abs(cfg.alpha) > 1.0 + kTol) throw ConfigError("|alpha| must not exceed 1");
  const double t = static_cast<double>(cfg.transmission);
  const double a2 = std::norm(cfg.alpha);
  return std::norm(cfg.lambda) / (2.0 * t) * (1.0 + (t - 1.0) * a2 + t * a2 * std::cos(cfg.phi));
}

Estimate coherent_current_monte_carlo(const CoherentConfig& cfg, std::size_t trials, std::uint64_t seed,
                                      std::size_t workers, PhaseDistribution dist) {
  check_transmission(cfg.transmission);
  const RandomPhaseSpec spec{std::abs(cfg.alpha), dist};
  validate(spec);
  const std::size_t t = cfg.transmission;
  const double scale = std::norm(cfg.lambda) / (4.0 * static_cast<double>(t * t));
  const cplx shift = std::polar(1.0, cfg.phi);
  auto trial = [&](std::mt19937_64& rng, std::span<double> out) {
    cplx sum{0.0, 0.0};
    for (std::size_t j = 0; j < t; ++j) {
      const cplx a = std::polar(1.0, sample_phase(spec, rng));
      const cplx b = std::polar(1.0, sample_phase(spec, rng));
      sum += a + shift * b;
    }
    out[0] = scale * std::norm(sum);
  };
  const MomentAccumulator acc = run_sharded(trials, workers, seed, 1, trial);
  return {acc.mean(0), acc.stderr_of_mean(0)};
}

double coherent_visibility(std::size_t transmission, double alpha2) {
  check_transmission(transmission);
  const double t = static_cast<double>(transmission);
  const double den = 1.0 + (t - 1.0) * alpha2;
  return den > 0 ? t * alpha2 / den : 0.0;
}

std::string to_string(ClassicalNoiseKind kind) {
  switch (kind) {
    case ClassicalNoiseKind::deterministic: return "deterministic";
    case ClassicalNoiseKind::linear_phase: return "linear-phase";
    case ClassicalNoiseKind::linear_amplitude: return "linear-amplitude";
    case ClassicalNoiseKind::nonlinear_phase: return "nonlinear-phase";
  }
  return "unknown";
}

void NoiseFunction::validate() const {
  if (kind == ClassicalNoiseKind::linear_phase || kind == ClassicalNoiseKind::nonlinear_phase) efilt::validate(phase);
  if (!(log_sigma >= 0.0) || !(nl_sigma >= 0.0)) throw ConfigError("noise widths must be non-negative");
  if (!std::isfinite(log_mu) || !std::isfinite(nl_mean) || !std::isfinite(std::abs(constant))) {
    throw ConfigError("noise parameters must be finite");
  }
}

cplx NoiseFunction::sample(double in_abs2, std::mt19937_64& rng) const {
  switch (kind) {
    case ClassicalNoiseKind::deterministic: return constant;
    case ClassicalNoiseKind::linear_phase: return std::polar(1.0, sample_phase(phase, rng));
    case ClassicalNoiseKind::linear_amplitude: {
      std::normal_distribution<double> z(0.0, 1.0);
      return {std::exp(log_mu + log_sigma * z(rng)), 0.0};
    }
    case ClassicalNoiseKind::nonlinear_phase: {
      const double phi1 = sample_phase(phase, rng);
      std::normal_distribution<double> z(nl_mean, nl_sigma);
      return std::polar(1.0, phi1 + z(rng) * in_abs2);
    }
  }
  throw std::logic_error("unknown noise kind");
}

cplx NoiseFunction::mean(double in_abs2) const {
  switch (kind) {
    case ClassicalNoiseKind::deterministic: return constant;
    case ClassicalNoiseKind::linear_phase: return {phase.target_mean, 0.0};
    case ClassicalNoiseKind::linear_amplitude: return {std::exp(log_mu + 0.5 * log_sigma * log_sigma), 0.0};
    case ClassicalNoiseKind::nonlinear_phase:
      return phase.target_mean *
             std::polar(std::exp(-0.5 * nl_sigma * nl_sigma * in_abs2 * in_abs2), nl_mean * in_abs2);
  }
  throw std::logic_error("unknown noise kind");
}

double NoiseFunction::mean_abs2(double) const {
  switch (kind) {
    case ClassicalNoiseKind::deterministic: return std::norm(constant);
    case ClassicalNoiseKind::linear_amplitude: return std::exp(2.0 * log_mu + 2.0 * log_sigma * log_sigma);
    case ClassicalNoiseKind::linear_phase:
    case ClassicalNoiseKind::nonlinear_phase: return 1.0;
  }
  throw std::logic_error("unknown noise kind");
}

ClassicalOutcome classical_analytic(cplx amplitude, std::size_t transmission, const NoiseFunction& nf) {
  check_transmission(transmission);
  nf.validate();
  const double t = static_cast<double>(transmission);
  const double a2 = std::norm(amplitude);
  ClassicalOutcome r;
  const cplx nbar = nf.mean(a2 / t);
  const double n2 = nf.mean_abs2(a2 / t);
  r.mean_amplitude = amplitude * nbar;
  r.mean_intensity = a2 * (std::norm(nbar) + (n2 - std::norm(nbar)) / t);
  r.fluctuation = r.mean_intensity - std::norm(r.mean_amplitude);
  const cplx nbar_v = nf.mean(a2 / (2.0 * t));
  const double n2_v = nf.mean_abs2(a2 / (2.0 * t));
  r.visibility = std::norm(nbar_v) > 0 ? 1.0 / (1.0 + (n2_v - std::norm(nbar_v)) / (t * std::norm(nbar_v))) : 0.0;
  return r;
}

double fit_fringe_visibility(const std::vector<double>& intensities) {
  const std::size_t k = intensities.size();
  if (k < 3) throw std::invalid_argument("need at least three fringe samples");
  double c0 = 0, c1 = 0, s1 = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double phi = kTwoPi * static_cast<double>(i) / static_cast<double>(k);
    c0 += intensities[i];
    c1 += intensities[i] * std::cos(phi);
    s1 += intensities[i] * std::sin(phi);
  }
  c0 /= static_cast<double>(k);
  const double amp = 2.0 * std::hypot(c1, s1) / static_cast<double>(k);
  return c0 > 0 ? amp / c0 : 0.0;
}

ClassicalOutcome classical_run(cplx amplitude, std::size_t transmission, const NoiseFunction& nf,
                               std::size_t trials, std::uint64_t seed, std::size_t workers) {
  check_transmission(transmission);
  nf.validate();
  if (trials < 2) throw ConfigError("Monte-Carlo needs at least 2 trials");
  const std::size_t t = transmission;
  const double td = static_cast<double>(t);
  const double in_single = std::norm(amplitude) / td;
  const double in_pair = std::norm(amplitude) / (2.0 * td);
  const cplx pair_scale = amplitude / (std::sqrt(2.0) * td);

  auto trial = [&](std::mt19937_64& rng, std::span<double> out) {
    cplx sum{0.0, 0.0};
    for (std::size_t j = 0; j < t; ++j) sum += nf.sample(in_single, rng);
    const cplx ar = amplitude * sum / td;
    cplx s1{0.0, 0.0}, s2{0.0, 0.0};
    for (std::size_t j = 0; j < t; ++j) s1 += nf.sample(in_pair, rng);
    for (std::size_t j = 0; j < t; ++j) s2 += nf.sample(in_pair, rng);
    const cplx a1 = pair_scale * s1;
    const cplx a2 = pair_scale * s2;
    const cplx c = std::conj(a1) * a2;
    out[0] = ar.real();
    out[1] = ar.imag();
    out[2] = std::norm(ar);
    out[3] = std::norm(a1) + std::norm(a2);
    out[4] = c.real();
    out[5] = c.imag();
  };
  const MomentAccumulator acc = run_sharded(trials, workers, seed, 6, trial);

  ClassicalOutcome r;
  r.trials = trials;
  const double x = acc.mean(0);
  const double y = acc.mean(1);
  r.mean_amplitude = {x, y};
  r.mean_amplitude_stderr = std::max(acc.stderr_of_mean(0), acc.stderr_of_mean(1));
  r.mean_intensity = acc.mean(2);
  r.intensity_stderr = acc.stderr_of_mean(2);
  r.fluctuation = r.mean_intensity - (x * x + y * y);
  r.fluctuation_stderr = acc.delta_stderr(std::vector<double>{-2.0 * x, -2.0 * y, 1.0, 0.0, 0.0, 0.0});

  const double s = acc.mean(3);
  const cplx c{acc.mean(4), acc.mean(5)};
  r.visibility = fit_fringe_visibility(fringe(s, c));
  const double cm = std::abs(c);
  if (cm > 0 && s > 0) {
    r.visibility_stderr = acc.delta_stderr(std::vector<double>{0.0, 0.0, 0.0, -r.visibility / s,
                                                               2.0 * c.real() / (cm * s), 2.0 * c.imag() / (cm * s)});
  }
  return r;
}

cplx classical_mean_amplitude(cplx amplitude, std::size_t transmission, const NoiseFunction& nf, std::size_t trials,
                              std::uint64_t seed) {
  return classical_run(amplitude, transmission, nf, trials, seed).mean_amplitude;
}

double classical_mean_intensity(cplx amplitude, std::size_t transmission, const NoiseFunction& nf,
                                std::size_t trials, std::uint64_t seed) {
  return classical_run(amplitude, transmission, nf, trials, seed).mean_intensity;
}

double amplitude_fluctuation(cplx amplitude, std::size_t transmission, const NoiseFunction& nf, std::size_t trials,
                             std::uint64_t seed) {
  return classical_run(amplitude, transmission, nf, trials, seed).fluctuation;
}

double classical_visibility(cplx amplitude, std::size_t transmission, const NoiseFunction& nf, std::size_t trials,
                            std::uint64_t seed) {
  return classical_run(amplitude, transmission, nf, trials, seed).visibility;
}

std::vector<PortStats> nonuseful_port_stats(cplx amplitude, std::size_t transmission, const NoiseFunction& nf,
                                            std::size_t trials, std::uint64_t seed, std::size_t workers) {
  check_transmission(transmission);
  nf.validate();
  if (trials < 2) throw ConfigError("Monte-Carlo needs at least 2 trials");
  const std::size_t t = transmission;
  const double td = static_cast<double>(t);
  const std::size_t ports = t - 1;
  const double in_abs2 = std::norm(amplitude) / td;
  auto trial = [&](std::mt19937_64& rng, std::span<double> out) {
    std::vector<cplx> n(t);
    for (auto& v : n) v = nf.sample(in_abs2, rng);
    for (std::size_t k = 1; k < t; ++k) {
      cplx sum{0.0, 0.0};
      for (std::size_t j = 0; j < t; ++j) {
        sum += n[j] * std::polar(1.0, kTwoPi * static_cast<double>(((j + 1) * k) % t) / td);
      }
      const cplx a = amplitude * sum / td;
      out[3 * (k - 1)] = a.real();
      out[3 * (k - 1) + 1] = a.imag();
      out[3 * (k - 1) + 2] = std::norm(a);
    }
  };
  std::vector<PortStats> stats;
  if (ports == 0) return stats;
  const MomentAccumulator acc = run_sharded(trials, workers, seed, 3 * ports, trial);
  for (std::size_t k = 1; k < t; ++k) {
    const std::size_t b = 3 * (k - 1);
    stats.push_back({k, {acc.mean(b), acc.mean(b + 1)}, std::max(acc.stderr_of_mean(b), acc.stderr_of_mean(b + 1)),
                     acc.mean(b + 2)});
  }
  return stats;
}

NonlinearExpansion nonlinear_fluctuation_expansion(cplx amplitude, const std::vector<std::size_t>& transmissions,
                                                   const NoiseFunction& nf, std::size_t trials, std::uint64_t seed) {
  if (nf.kind != ClassicalNoiseKind::nonlinear_phase) throw ConfigError("expansion needs nonlinear-phase noise");
  nf.validate();
  if (transmissions.size() < 2) throw ConfigError("need at least two values of T to fit");
  if (trials < 2) throw ConfigError("Monte-Carlo needs at least 2 trials");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(nf.nl_mean, nf.nl_sigma);
  std::vector<double> phi2(trials);
  cplx n1{0.0, 0.0};
  double n1_abs2 = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const cplx v = std::polar(1.0, sample_phase(nf.phase, rng));
    n1 += v;
    n1_abs2 += std::norm(v);
    phi2[i] = z(rng);
  }
  n1 /= static_cast<double>(trials);
  n1_abs2 /= static_cast<double>(trials);
  if (std::norm(n1) == 0.0) throw NumericalCheckError("linear phase noise averages to zero");

  const double a2 = std::norm(amplitude);
  const double var = nf.nl_sigma * nf.nl_sigma;
  NonlinearExpansion out;
  std::vector<double> lx, ly_lin, ly_nl;
  for (const std::size_t t : transmissions) {
    check_transmission(t);
    const double td = static_cast<double>(t);
    const double in_abs2 = a2 / td;
    cplx n2{0.0, 0.0};
    for (const double p : phi2) n2 += std::polar(1.0, p * in_abs2);
    n2 /= static_cast<double>(trials);
    ExpansionPoint pt;
    pt.transmission = t;
    pt.linear_term = (n1_abs2 - std::norm(n1)) / (td * std::norm(n1));
    pt.nonlinear_term = (n1_abs2 / std::norm(n1)) * (1.0 / std::norm(n2) - 1.0) / td;
    pt.nonlinear_analytic = a2 * a2 * var / (td * td * td * std::norm(n1));
    out.points.push_back(pt);
    out.smallness = std::max(out.smallness, var * a2 * a2 / (td * td));
    lx.push_back(std::log(td));
    ly_lin.push_back(std::log(pt.linear_term));
    ly_nl.push_back(std::log(pt.nonlinear_term));
  }
  out.linear_exponent = -least_squares_slope(lx, ly_lin);
  out.nonlinear_exponent = -least_squares_slope(lx, ly_nl);
  out.expansion_valid = out.smallness <= 0.01;
  return out;
}

double mixture_mean_power(std::size_t degree, std::size_t transmission, double alpha) {
  check_transmission(transmission);
  // stirling[d] holds S(N, d) for the current N.
  std::vector<double> stirling(degree + 1, 0.0);
  stirling[0] = 1.0;
  for (std::size_t nn = 1; nn <= degree; ++nn) {
    for (std::size_t d = nn; d >= 1; --d) stirling[d] = static_cast<double>(d) * stirling[d] + stirling[d - 1];
    stirling[0] = 0.0;
  }
  const double t = static_cast<double>(transmission);
  double sum = 0.0;
  double falling = 1.0;
  double alpha_pow = 1.0;
  for (std::size_t d = 1; d <= degree; ++d) {
    falling *= (t - static_cast<double>(d - 1)) / t;
    alpha_pow *= alpha;
    if (falling <= 0.0) break;
    sum += stirling[d] * falling * alpha_pow * std::pow(t, static_cast<double>(d) - static_cast<double>(degree));
  }
  return degree == 0 ? 1.0 : sum;
}

AttenuationReport large_T_attenuation_check(std::size_t degree, std::size_t transmission, double alpha,
                                            std::size_t trials, std::uint64_t seed, std::size_t workers) {
  if (degree == 0) throw ConfigError("operator degree must be >= 1");
  check_transmission(transmission);
  const RandomPhaseSpec spec{alpha, PhaseDistribution::point_mass_mixture};
  validate(spec);
  AttenuationReport r;
  r.degree = degree;
  r.transmission = transmission;
  r.moment_exact = mixture_mean_power(degree, transmission, alpha);
  r.moment_limit = std::pow(alpha, static_cast<double>(degree));

  std::vector<double> m(degree + 1);
  for (std::size_t k = 0; k <= degree; ++k) m[k] = mixture_mean_power(k, transmission, alpha);
  auto pattern = [&](double phi) {
    cplx s{0.0, 0.0};
    double binom = 1.0;
    for (std::size_t k = 0; k <= degree; ++k) {
      s += binom * m[k] * m[degree - k] * std::polar(1.0, phi * static_cast<double>(degree - k));
      binom = binom * static_cast<double>(degree - k) / static_cast<double>(k + 1);
    }
    return s;
  };
  const cplx at_zero = pattern(0.0);
  r.attenuation = at_zero.real() / std::pow(2.0, static_cast<double>(degree));
  for (int k = 0; k < kFringePoints; ++k) {
    const double phi = kTwoPi * k / kFringePoints;
    const cplx ideal = std::pow(0.5 * (1.0 + std::polar(1.0, phi)), static_cast<double>(degree));
    r.shape_distortion = std::max(r.shape_distortion, std::abs(pattern(phi) / at_zero - ideal));
  }

  if (trials >= 2) {
    const double td = static_cast<double>(transmission);
    auto trial = [&](std::mt19937_64& rng, std::span<double> out) {
      cplx x{0.0, 0.0};
      for (std::size_t j = 0; j < transmission; ++j) x += std::polar(1.0, sample_phase(spec, rng));
      const cplx p = std::pow(x / td, static_cast<int>(degree));
      out[0] = p.real();
      out[1] = p.imag();
    };
    const MomentAccumulator acc = run_sharded(trials, workers, seed, 2, trial);
    r.moment_mc = {acc.mean(0), acc.stderr_of_mean(0)};
    r.moment_mc_imag = acc.mean(1);
  }
  return r;
}

}  // namespace efilt
