#include "efilt/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "efilt/errors.hpp"

namespace efilt {

namespace {

void check_alpha2(double alpha2) {
  if (!(alpha2 >= 0.0 && alpha2 <= 1.0)) throw ConfigError("alpha^2 must lie in [0, 1], got " + std::to_string(alpha2));
}

LabeledState take_register(const LabeledState& state, std::size_t segment, std::size_t min_dim, std::size_t& reg) {
  reg = state.environment_factor(segment);
  const Factor& f = state.factor(reg);
  if (f.consumed) throw std::logic_error("environment register '" + f.name + "' already consumed");
  if (f.dim < min_dim) {
    throw DimensionError("environment register '" + f.name + "' has " + std::to_string(f.dim) + " outcomes, need " +
                         std::to_string(min_dim));
  }
  return state.mark_consumed(reg);
}

}  // namespace

PhaseNoiseSpec::PhaseNoiseSpec(std::vector<ChannelNoise> per_channel) : per_channel_(std::move(per_channel)) {
  if (per_channel_.empty()) throw ConfigError("phase noise needs at least one channel");
  for (std::size_t j = 0; j < per_channel_.size(); ++j) {
    const double s = std::norm(per_channel_[j].alpha) + std::norm(per_channel_[j].beta);
    if (std::abs(s - 1.0) > kTol) {
      throw ConfigError("channel " + std::to_string(j + 1) + ": |alpha|^2 + |beta|^2 = " + std::to_string(s));
    }
  }
}

PhaseNoiseSpec PhaseNoiseSpec::uniform(std::size_t channels, double alpha2) {
  check_alpha2(alpha2);
  const ChannelNoise c{cplx(std::sqrt(alpha2), 0.0), cplx(std::sqrt(1.0 - alpha2), 0.0)};
  return PhaseNoiseSpec(std::vector<ChannelNoise>(channels, c));
}

PhaseNoiseSpec PhaseNoiseSpec::from_alphas(const std::vector<cplx>& alphas) {
  std::vector<ChannelNoise> v;
  v.reserve(alphas.size());
  for (const cplx a : alphas) {
    const double a2 = std::norm(a);
    if (a2 > 1.0 + kTol) throw ConfigError("|alpha| must not exceed 1");
    v.push_back({a, cplx(std::sqrt(std::max(0.0, 1.0 - a2)), 0.0)});
  }
  return PhaseNoiseSpec(std::move(v));
}

cplx PhaseNoiseSpec::mean_alpha() const {
  cplx s{0.0, 0.0};
  for (const auto& c : per_channel_) s += c.alpha;
  return s / static_cast<double>(per_channel_.size());
}

double PhaseNoiseSpec::mean_beta_squared() const {
  double s = 0.0;
  for (const auto& c : per_channel_) s += std::norm(c.beta);
  return s / static_cast<double>(per_channel_.size());
}

PhaseNoiseSpec PhaseNoiseSpec::phase_aligned() const {
  std::vector<ChannelNoise> v = per_channel_;
  for (auto& c : v) {
    if (std::abs(c.alpha) == 0.0) continue;
    const cplx rot = std::conj(c.alpha) / std::abs(c.alpha);
    c.alpha = cplx(std::abs(c.alpha), 0.0);
    c.beta *= rot;
  }
  return PhaseNoiseSpec(std::move(v));
}

InternalNoiseSpec::InternalNoiseSpec(std::size_t internal_dim, cplx alpha, std::vector<InternalError> errors)
    : dim_(internal_dim), alpha_(alpha), errors_(std::move(errors)) {
  if (dim_ == 0) throw ConfigError("internal dimension must be at least 1");
  for (const auto& e : errors_) {
    if (e.op.rows() != dim_ || e.op.cols() != dim_) throw ConfigError("error operator has wrong shape");
  }
  if (!dilation().is_isometry(kTol)) {
    throw NumericalCheckError("internal noise dilation is not an isometry");
  }
}

InternalNoiseSpec InternalNoiseSpec::pauli(double alpha2) {
  check_alpha2(alpha2);
  const cplx i{0.0, 1.0};
  CMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, -i, i, 0;
  z << 1, 0, 0, -1;
  const cplx b(std::sqrt((1.0 - alpha2) / 3.0), 0.0);
  return InternalNoiseSpec(2, cplx(std::sqrt(alpha2), 0.0),
                           {{b, DenseOperator(x)}, {b, DenseOperator(y)}, {b, DenseOperator(z)}});
}

InternalNoiseSpec InternalNoiseSpec::single(double alpha2, DenseOperator op) {
  check_alpha2(alpha2);
  const std::size_t d = op.rows();
  return InternalNoiseSpec(d, cplx(std::sqrt(alpha2), 0.0), {{cplx(std::sqrt(1.0 - alpha2), 0.0), std::move(op)}});
}

DenseOperator InternalNoiseSpec::dilation() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  const auto outcomes = static_cast<Eigen::Index>(errors_.size() + 1);
  CMatrix v = CMatrix::Zero(d * outcomes, d);
  for (Eigen::Index mu = 0; mu < d; ++mu) {
    v(mu * outcomes, mu) = alpha_;
    for (std::size_t l = 0; l < errors_.size(); ++l) {
      for (Eigen::Index nu = 0; nu < d; ++nu) {
        v(nu * outcomes + static_cast<Eigen::Index>(l) + 1, mu) = errors_[l].beta * errors_[l].op(nu, mu);
      }
    }
  }
  return DenseOperator(std::move(v));
}

LabeledState apply_phase_noise(const LabeledState& state, const PhaseNoiseSpec& spec, std::size_t segment,
                               std::size_t channel_factor) {
  const std::size_t channels = state.factor(channel_factor).dim;
  if (channels != spec.channels()) {
    throw DimensionError("noise spec has " + std::to_string(spec.channels()) + " channels, state has " +
                         std::to_string(channels));
  }
  std::size_t reg = 0;
  LabeledState marked = take_register(state, segment, channels + 1, reg);
  const std::size_t reg_stride = state.stride(reg);
  const std::size_t reg_dim = state.factor(reg).dim;
  const std::size_t ch_stride = state.stride(channel_factor);

  const CVector& in = state.amplitudes();
  CVector out = CVector::Zero(in.size());
  for (std::size_t flat = 0; flat < state.dim(); ++flat) {
    const cplx a = in(static_cast<Eigen::Index>(flat));
    if (a == cplx{}) continue;
    if ((flat / reg_stride) % reg_dim != 0) {
      throw std::logic_error("fresh register carries amplitude outside outcome 0");
    }
    const std::size_t j = (flat / ch_stride) % channels;
    out(static_cast<Eigen::Index>(flat)) += spec[j].alpha * a;
    out(static_cast<Eigen::Index>(flat + (j + 1) * reg_stride)) += spec[j].beta * a;
  }
  return marked.with_amplitudes(std::move(out));
}

LabeledState apply_internal_noise(const LabeledState& state, const InternalNoiseSpec& spec, std::size_t segment,
                                  std::size_t channel_factor, std::size_t internal_factor) {
  const std::size_t channels = state.factor(channel_factor).dim;
  const std::size_t idim = state.factor(internal_factor).dim;
  if (idim != spec.internal_dim()) throw DimensionError("internal factor dimension does not match noise spec");
  const std::size_t nerr = spec.error_count();
  std::size_t reg = 0;
  LabeledState marked = take_register(state, segment, 1 + channels * nerr, reg);
  const std::size_t reg_stride = state.stride(reg);
  const std::size_t reg_dim = state.factor(reg).dim;
  const std::size_t ch_stride = state.stride(channel_factor);
  const std::size_t in_stride = state.stride(internal_factor);

  const CVector& in = state.amplitudes();
  CVector out = CVector::Zero(in.size());
  for (std::size_t flat = 0; flat < state.dim(); ++flat) {
    const cplx a = in(static_cast<Eigen::Index>(flat));
    if (a == cplx{}) continue;
    if ((flat / reg_stride) % reg_dim != 0) {
      throw std::logic_error("fresh register carries amplitude outside outcome 0");
    }
    const std::size_t j = (flat / ch_stride) % channels;
    const std::size_t mu = (flat / in_stride) % idim;
    const std::size_t base = flat - mu * in_stride;
    out(static_cast<Eigen::Index>(flat)) += spec.alpha() * a;
    for (std::size_t l = 0; l < nerr; ++l) {
      const auto& err = spec.errors()[l];
      const std::size_t outcome = 1 + j * nerr + l;
      for (std::size_t nu = 0; nu < idim; ++nu) {
        const cplx e = err.op(nu, mu);
        if (e == cplx{}) continue;
        out(static_cast<Eigen::Index>(base + nu * in_stride + outcome * reg_stride)) += err.beta * e * a;
      }
    }
  }
  return marked.with_amplitudes(std::move(out));
}

void validate(const RandomPhaseSpec& spec) {
  if (!(spec.target_mean >= 0.0 && spec.target_mean <= 1.0)) {
    throw ConfigError("random-phase target mean must lie in [0, 1]");
  }
}

double sample_phase(const RandomPhaseSpec& spec, std::mt19937_64& rng) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  switch (spec.distribution) {
    case PhaseDistribution::point_mass_mixture:
      if (uni(rng) < spec.target_mean) return 0.0;
      return two_pi * uni(rng);
    case PhaseDistribution::wrapped_gaussian: {
      if (spec.target_mean >= 1.0) return 0.0;
      if (spec.target_mean <= 0.0) return two_pi * uni(rng);
      // E[e^{i phi}] = e^{-sigma^2 / 2} for phi ~ N(0, sigma^2).
      std::normal_distribution<double> g(0.0, std::sqrt(-2.0 * std::log(spec.target_mean)));
      return g(rng);
    }
  }
  throw std::logic_error("unknown phase distribution");
}

std::vector<double> sample_phases(const RandomPhaseSpec& spec, std::size_t count, std::mt19937_64& rng) {
  validate(spec);
  std::vector<double> v(count);
  for (auto& p : v) p = sample_phase(spec, rng);
  return v;
}

std::vector<double> sample_phases(const RandomPhaseSpec& spec, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_phases(spec, count, rng);
}

double alpha_from_length(const LengthModel& model) {
  if (!(model.gamma >= 0.0) || !(model.length >= 0.0)) throw ConfigError("gamma and length must be non-negative");
  return std::exp(-model.gamma * model.length / 2.0);
}

}  // namespace efilt
