#include "efilt/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "efilt/classical.hpp"
#include "efilt/codec.hpp"
#include "efilt/errors.hpp"
#include "efilt/filtration.hpp"
#include "efilt/montecarlo.hpp"
#include "efilt/purification.hpp"
#include "efilt/runner.hpp"

namespace efilt {

namespace {

// Fixed seeds for the sampling checks; chosen once, never tuned.
constexpr std::uint64_t kSeed = 0x5eed2026ULL;
constexpr std::size_t kSamples = 100000;
constexpr std::size_t kWorkers = 4;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Worst deviation against a tolerance, plus the first failing case.
class Tally {
 public:
  void close(double got, double want, double tol, const std::string& what) {
    ++cases_;
    const double dev = std::abs(got - want);
    worst_ = std::max(worst_, std::isnan(dev) ? INFINITY : dev);
    if (!(dev <= tol)) fail(what + ": got " + fmt(got) + " want " + fmt(want));
  }
  // |got - want| <= sigmas * stderr; a zero stderr demands exact agreement up to rounding.
  void within(double got, double want, double stderr_of, const std::string& what, double sigmas = 3.0) {
    ++cases_;
    ++sampled_;
    const double dev = std::abs(got - want);
    const double z = stderr_of > 0 ? dev / stderr_of : (dev <= 1e-12 ? 0.0 : INFINITY);
    worst_z_ = std::max(worst_z_, z);
    if (!(z <= sigmas)) fail(what + ": got " + fmt(got) + " want " + fmt(want) + " (" + fmt(z) + " sigma)");
  }
  void expect(bool ok, const std::string& what) {
    ++cases_;
    if (!ok) fail(what);
  }

  bool ok() const { return failure_.empty(); }
  std::string summary() const {
    std::string s = std::to_string(cases_) + " checks";
    if (worst_ > 0) s += ", max dev " + fmt(worst_);
    if (sampled_ > 0) s += ", max z " + fmt(worst_z_);
    if (!ok()) s += "; first failure: " + failure_;
    return s;
  }

 private:
  void fail(const std::string& what) {
    if (failure_.empty()) failure_ = what;
  }
  std::size_t cases_ = 0;
  std::size_t sampled_ = 0;
  double worst_ = 0.0;
  double worst_z_ = 0.0;
  std::string failure_;
};

CriterionResult result(int id, const char* name, const Tally& t, const std::string& extra = "") {
  return {id, name, t.ok(), t.summary() + extra};
}

std::string case_name(const char* label, std::initializer_list<double> values) {
  std::ostringstream os;
  os << label;
  for (const double v : values) os << ' ' << v;
  return os.str();
}

FiltrationConfig phase_config(Codec codec, PhaseNoiseSpec noise, CVector input, std::size_t segments = 1) {
  return {std::move(codec), std::move(noise), segments, std::nullopt, std::move(input), std::nullopt, false,
          kDefaultDimCap};
}

CVector equal_superposition(std::size_t n) {
  return CVector::Constant(static_cast<Eigen::Index>(n), cplx(1.0 / std::sqrt(static_cast<double>(n)), 0.0));
}

const double kAlpha2Grid[] = {0.5, 0.8, 0.9, 0.99};

}  // namespace

CriterionResult check_success_probability() {
  Tally t;
  for (std::size_t tr = 1; tr <= 8; ++tr) {
    for (const double a2 : kAlpha2Grid) {
      const FiltrationOutcome o =
          run_exact(phase_config(fourier_codec(tr), PhaseNoiseSpec::uniform(tr, a2), CVector::Ones(1)));
      const double want = a2 + (1.0 - a2) / static_cast<double>(tr);
      t.close(o.p_success, want, 1e-12, case_name("p_success T a2", {double(tr), a2}));
      t.close(o.p_success_no_error, a2, 1e-12, case_name("no-error T a2", {double(tr), a2}));
    }
  }
  return result(1, "success-probability", t);
}

CriterionResult check_visibility() {
  Tally t;
  for (std::size_t tr = 1; tr <= 8; ++tr) {
    for (const double a2 : kAlpha2Grid) {
      const FiltrationConfig cfg = phase_config(multiplexed(fourier_codec(tr), 2), PhaseNoiseSpec::uniform(2 * tr, a2),
                                                equal_superposition(2));
      const double td = static_cast<double>(tr);
      const double want = td * a2 / (td * a2 + 1.0 - a2);
      t.close(measure_visibility(cfg), want, 1e-9, case_name("visibility T a2", {td, a2}));
      if (tr == 1) t.close(measure_visibility(cfg), a2, 1e-9, case_name("single channel a2", {a2}));
    }
  }
  return result(2, "visibility", t);
}

CriterionResult check_nonuniform_channels() {
  Tally t;
  auto check = [&](const std::vector<ChannelNoise>& channels, const std::string& label) {
    const std::size_t tr = channels.size();
    const double td = static_cast<double>(tr);
    double mean_abs = 0.0;
    double beta_sum = 0.0;
    for (const auto& c : channels) {
      mean_abs += std::abs(c.alpha) / td;
      beta_sum += std::norm(c.beta);
    }
    const NonuniformReport r =
        run_nonuniform(phase_config(fourier_codec(tr), PhaseNoiseSpec(channels), CVector::Ones(1)));
    t.close(r.exact.p_success_no_error, mean_abs * mean_abs, 1e-12, label + " no-error");
    t.close(r.exact.p_success_error, beta_sum / (td * td), 1e-12, label + " error");
    t.expect(r.exact.p_success_error <= (1.0 - mean_abs * mean_abs) / td + 1e-12, label + " bound");
    return r.exact.p_success_no_error;
  };

  std::vector<ChannelNoise> example;
  for (const double a : {0.95, 0.9, 0.85, 0.8}) example.push_back({cplx(a, 0.0), cplx(std::sqrt(1 - a * a), 0.0)});
  t.close(check(example, "worked example"), 0.765625, 1e-12, "worked example value");

  std::mt19937_64 rng(kSeed + 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  for (int k = 0; k < 100; ++k) {
    const std::size_t tr = size(rng);
    std::vector<ChannelNoise> channels;
    for (std::size_t j = 0; j < tr; ++j) {
      const double mag = unit(rng);
      const double phase_a = 2 * std::numbers::pi * unit(rng);
      const double phase_b = 2 * std::numbers::pi * unit(rng);
      channels.push_back({std::polar(mag, phase_a), std::polar(std::sqrt(1 - mag * mag), phase_b)});
    }
    check(channels, "random config " + std::to_string(k));
  }
  return result(3, "nonuniform-channels", t);
}

CriterionResult check_series() {
  Tally t;
  for (const double total : {0.81, 0.5, 0.9}) {
    const double gamma = -std::log(total);
    for (std::size_t tr = 1; tr <= 4; ++tr) {
      for (std::size_t q = 1; q <= 3; ++q) {
        FiltrationConfig cfg =
            phase_config(fourier_codec(tr), PhaseNoiseSpec::uniform(tr, 1.0), CVector::Ones(1), q);
        cfg.length = LengthModel{gamma, 1.0};
        const FiltrationOutcome o = run_exact(cfg);
        const double seg = std::pow(total, 1.0 / static_cast<double>(q));
        const double closed = std::pow(seg + (1 - seg) / static_cast<double>(tr), static_cast<double>(q)) - total;
        const std::string label = case_name("series a2 T Q", {total, double(tr), double(q)});
        t.close(o.p_success_error, closed, 1e-10, label);
        t.close(series_error_analytic(gamma, 1.0, q, tr), closed, 1e-12, label + " analytic");
        if (q == 2) {
          const double a = std::sqrt(total);
          const double td = static_cast<double>(tr);
          const double two = (1 - a) * (1 + 2 * td * a - a) / (td * td);
          t.close(two, closed, 1e-12, label + " two-segment form");
          t.close(o.p_success_error, two, 1e-10, label + " two-segment exact");
          if (tr >= 2) t.close(series_two_segment_analytic(a, tr), two, 1e-12, label + " two-segment analytic");
        }
      }
    }
  }

  // Limit of many segments, reached through the closed form at Q = 64.
  double gap_half = 0.0;
  for (const std::size_t tr : {2, 4}) {
    for (const double total : {0.81, 0.9, 0.95, 0.99, 0.5}) {
      const double a = std::sqrt(total);
      const double td = static_cast<double>(tr);
      const double limit = std::pow(a, 2 * (td - 1) / td) - total;
      t.close(series_limit_analytic(a, tr), limit, 1e-12, case_name("limit analytic a2 T", {total, td}));
      const double gamma = -std::log(total);
      const double far = series_error_analytic(gamma, 1.0, 64, tr);
      const double near = series_error_analytic(gamma, 1.0, 8, tr);
      t.expect(std::abs(far - limit) < std::abs(near - limit), case_name("Q=64 closer than Q=8 a2 T", {total, td}));
      if (total == 0.5) {
        gap_half = std::max(gap_half, std::abs(far - limit));
      } else {
        t.close(far, limit, 1e-4, case_name("Q=64 convergence a2 T", {total, td}));
      }
    }
  }
  return result(4, "series", t, "; Q=64 gap at a2=0.5 is " + fmt(gap_half) + " (O(1/Q), not asserted)");
}

CriterionResult check_purification() {
  Tally t;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t m = 1; m <= n; ++m) {
      for (const double p : {0.0, 0.3, 0.8, 1.0}) {
        PurifyConfig cfg;
        cfg.n = n;
        cfg.m = m;
        cfg.p = p;
        const PurificationOutcome o = purify(cfg);
        const double nd = static_cast<double>(n);
        const double md = static_cast<double>(m);
        const std::string label = case_name("purify n m p", {nd, md, p});
        const double f_prime = ((nd - 1) * p + 1) / ((nd - md) * p + md);
        const double success = p * md / nd + (1 - p) * md * md / (nd * nd);
        t.close(o.fidelity, f_prime, 1e-12, label + " F'");
        t.close(o.p_success, success, 1e-12, label + " P_success");
        t.close(o.p_success_total, std::floor(nd / md) * success, 1e-12, label + " total");
        t.close(o.fidelity_unfiltered, p + (1 - p) / md, 1e-12, label + " F_m");
        const CMatrix diff = o.rho_f.matrix() - purified_state_analytic(n, m, p);
        t.close(diff.cwiseAbs().maxCoeff(), 0.0, 1e-12, label + " rho_f");
        t.expect(o.fidelity >= o.fidelity_unfiltered - 1e-12, label + " F' >= F_m");
      }
    }
    for (const double p : {0.0, 0.3, 0.8, 1.0}) {
      const CMatrix d = rho_after_noise(n, p).matrix() - rho_after_noise_dilated(n, p).matrix();
      t.close(d.cwiseAbs().maxCoeff(), 0.0, 1e-12, case_name("rho_n two ways n p", {double(n), p}));
    }
  }
  for (const std::size_t n : {2, 4, 8}) {
    for (std::size_t m = 1; m <= n; ++m) {
      PurifyConfig f;
      f.n = n;
      f.m = m;
      f.p = 0.3;
      PurifyConfig h = f;
      h.decoder = DecoderKind::hadamard_pair;
      const PurificationOutcome of = purify(f);
      const PurificationOutcome oh = purify(h);
      const std::string label = case_name("hadamard pair n m", {double(n), double(m)});
      t.close(oh.fidelity, of.fidelity, 1e-12, label + " F'");
      t.close(oh.p_success, of.p_success, 1e-12, label + " P_success");
    }
  }
  // Total success approaches p as n grows (m = 2, p = 0.8).
  double previous = INFINITY;
  for (std::size_t n = 2; n <= 64; ++n) {
    const double gap = std::abs(total_success_analytic(n, 2, 0.8) - 0.8);
    t.expect(gap < previous, case_name("trend strictly decreasing at n", {double(n)}));
    previous = gap;
  }
  return result(5, "purification", t, "; trend gap at n=64 is " + fmt(previous));
}

CriterionResult check_codec_equivalence() {
  Tally t;
  for (const std::size_t tr : {2, 4, 8}) {
    for (const std::size_t q : {1, 2}) {
      for (const double a2 : {0.5, 0.9}) {
        const std::string label = case_name("codecs T Q a2", {double(tr), double(q), a2});
        try {
          const CodecComparison c = compare_codecs(tr, a2, q);
          t.close(c.max_deviation, 0.0, 1e-12, label);
          for (const CodecReport* r : {&c.fourier_report, &c.hadamard_report}) {
            t.expect(r->faithful && r->optimal, label + " optimality");
            t.close(r->reduction_factor, 1.0 / static_cast<double>(tr), 1e-12, label + " reduction");
          }
        } catch (const NumericalCheckError& e) {
          t.expect(false, label + ": " + e.what());
        }
      }
    }
  }
  return result(6, "codec-equivalence", t);
}

CriterionResult check_collective_encoding() {
  Tally t;
  std::uint64_t seed = kSeed + 7;
  for (const double a2 : {0.5, 0.8, 0.9}) {
    const double b2 = 1 - a2;
    const double closed = (a2 + 4 * b2 / 9) / (a2 + 2 * b2 / 3);
    const double trivial = 2.0 / 3.0 + a2 / 3.0;
    const std::string label = case_name("collective a2", {a2});
    t.close(collective_average_fidelity_analytic(a2), closed, 1e-12, label + " analytic");
    t.close(trivial_average_fidelity_analytic(a2), trivial, 1e-12, label + " trivial analytic");

    const FiltrationConfig collective = phase_config(collective_fourier_codec(2, 3), PhaseNoiseSpec::uniform(3, a2),
                                                     equal_superposition(2));
    const FiltrationConfig plain =
        phase_config(identity_codec(2), PhaseNoiseSpec::uniform(2, a2), equal_superposition(2));
    const Estimate mc = bloch_average_fidelity(collective, kSamples, seed++, kWorkers);
    const Estimate mc_plain = bloch_average_fidelity(plain, kSamples, seed++, kWorkers);
    t.within(mc.value, closed, mc.std_error, label + " Bloch average");
    t.within(mc_plain.value, trivial, mc_plain.std_error, label + " trivial Bloch average");
    t.expect(closed > trivial, label + " beats trivial (closed form)");
    t.expect(mc.value > mc_plain.value, label + " beats trivial (sampled)");

    for (const double a1_sq : {0.0, 0.25, 0.5, 0.9}) {
      FiltrationConfig single = collective;
      single.input = CVector(2);
      single.input << cplx(std::sqrt(a1_sq), 0.0), cplx(std::sqrt(1 - a1_sq), 0.0);
      const double want = (a2 + b2 / 3 * (1 + 2 * a1_sq * (1 - a1_sq))) / (a2 + 2 * b2 / 3);
      t.close(run_exact(single).conditional_fidelity, want, 1e-12, label + case_name(" state |a1|^2", {a1_sq}));
      t.close(collective_state_fidelity_analytic(a2, a1_sq), want, 1e-12, label + " state analytic");
    }
  }
  return result(7, "collective-encoding", t);
}

CriterionResult check_internal_dof() {
  Tally t;
  for (const std::size_t tr : {1, 2, 4}) {
    for (const double a2 : kAlpha2Grid) {
      CVector input = CVector::Zero(2);
      input(0) = 1.0;
      const FiltrationConfig cfg{fourier_codec(tr), InternalNoiseSpec::pauli(a2), 1, std::nullopt, input,
                                 std::nullopt,      false,                         kDefaultDimCap};
      const FiltrationOutcome o = run_exact(cfg);
      const std::string label = case_name("pauli T a2", {double(tr), a2});
      t.close(o.p_success_error, (1 - a2) / static_cast<double>(tr), 1e-12, label);
      t.close(o.p_success_no_error, a2, 1e-12, label + " no-error");
    }
  }
  return result(8, "internal-dof", t);
}

CriterionResult check_noise_equivalence() {
  Tally t;
  // Three dephasing channels with distinct complex alpha, input spread over all of them.
  const std::size_t dim = 3;
  std::vector<ChannelNoise> channels;
  for (const auto& [mag, phase] : {std::pair{0.9, 0.3}, std::pair{0.6, -1.1}, std::pair{0.75, 2.0}}) {
    channels.push_back({std::polar(mag, phase), cplx(std::sqrt(1 - mag * mag), 0.0)});
  }
  const PhaseNoiseSpec spec(channels);
  const CVector psi = equal_superposition(dim);
  const FiltrationConfig cfg = phase_config(identity_codec(dim), spec, psi);

  CMatrix dilated = CMatrix::Zero(dim, dim);
  for (const CMatrix& k : pipeline_kraus(cfg)) dilated += k * psi * psi.adjoint() * k.adjoint();

  auto trial = [&](std::mt19937_64& rng, std::span<double> out) {
    CVector u = psi;
    for (std::size_t j = 0; j < dim; ++j) {
      const cplx a = spec[j].alpha;
      const double phi = sample_phase({std::abs(a), PhaseDistribution::point_mass_mixture}, rng);
      u(static_cast<Eigen::Index>(j)) *= (a / std::abs(a)) * std::polar(1.0, phi);
    }
    const CMatrix rho = u * u.adjoint();
    for (std::size_t i = 0; i < dim * dim; ++i) {
      out[2 * i] = rho(static_cast<Eigen::Index>(i / dim), static_cast<Eigen::Index>(i % dim)).real();
      out[2 * i + 1] = rho(static_cast<Eigen::Index>(i / dim), static_cast<Eigen::Index>(i % dim)).imag();
    }
  };
  const MomentAccumulator acc = run_sharded(kSamples, kWorkers, kSeed + 9, 2 * dim * dim, trial);
  for (std::size_t i = 0; i < dim * dim; ++i) {
    const cplx want = dilated(static_cast<Eigen::Index>(i / dim), static_cast<Eigen::Index>(i % dim));
    const std::string label = "rho(" + std::to_string(i / dim) + "," + std::to_string(i % dim) + ")";
    t.within(acc.mean(2 * i), want.real(), acc.stderr_of_mean(2 * i), label + " re");
    t.within(acc.mean(2 * i + 1), want.imag(), acc.stderr_of_mean(2 * i + 1), label + " im");
  }

  // The whole filtration pipeline in both pictures.
  for (const double a2 : {0.5, 0.9}) {
    const FiltrationConfig mux = phase_config(multiplexed(fourier_codec(3), 2), PhaseNoiseSpec::uniform(6, a2),
                                              equal_superposition(2));
    const FiltrationOutcome exact = run_exact(mux);
    const MonteCarloOutcome mc = run_monte_carlo(mux, kSamples, kSeed + 90, kWorkers);
    const std::string label = case_name("pipeline a2", {a2});
    t.within(mc.p_success, exact.p_success, mc.p_success_stderr, label + " p_success");
    t.within(mc.conditional_fidelity, exact.conditional_fidelity, mc.fidelity_stderr, label + " fidelity");
    t.within(*mc.visibility, *exact.visibility, mc.visibility_stderr, label + " visibility");
  }
  return result(9, "noise-equivalence", t);
}

CriterionResult check_coherent_classical() {
  Tally t;
  std::uint64_t seed = kSeed + 10;
  // Coherent light through multiplexed channels.
  for (const double phi : {0.0, std::numbers::pi / 2}) {
    CoherentConfig cfg;
    cfg.transmission = 4;
    cfg.alpha = {std::sqrt(0.8), 0.0};
    cfg.phi = phi;
    const double td = 4.0;
    const double a2 = 0.8;
    const double want = (1 + (td - 1) * a2 + td * a2 * std::cos(phi)) / (2 * td);
    t.close(coherent_current(cfg), want, 1e-12, case_name("coherent current phi", {phi}));
    const Estimate mc = coherent_current_monte_carlo(cfg, kSamples, seed++, kWorkers);
    t.within(mc.value, want, mc.std_error, case_name("coherent current sampled phi", {phi}));
  }
  for (const std::size_t tr : {1, 2, 4, 8}) {
    for (const double a2 : kAlpha2Grid) {
      const double td = static_cast<double>(tr);
      t.close(coherent_visibility(tr, a2), td * a2 / (td * a2 + 1 - a2), 1e-12,
              case_name("coherent visibility T a2", {td, a2}));
    }
  }

  // Classical linear phase noise, |mean N|^2 = 0.8.
  NoiseFunction linear;
  linear.kind = ClassicalNoiseKind::linear_phase;
  linear.phase = {std::sqrt(0.8), PhaseDistribution::point_mass_mixture};
  const cplx amp{1.0, 0.0};
  for (const std::size_t tr : {2, 8}) {
    const double td = static_cast<double>(tr);
    const ClassicalOutcome mc = classical_run(amp, tr, linear, kSamples, seed++, kWorkers);
    const std::string label = case_name("classical linear T", {td});
    const double mean_n = std::sqrt(0.8);
    const double intensity = 0.8 + 0.2 / td;
    const double vis = 1.0 / (1.0 + 0.2 / (td * 0.8));
    t.within(mc.mean_amplitude.real(), mean_n, mc.mean_amplitude_stderr, label + " mean amplitude");
    t.within(mc.mean_amplitude.imag(), 0.0, mc.mean_amplitude_stderr, label + " mean amplitude imag");
    t.within(mc.mean_intensity, intensity, mc.intensity_stderr, label + " intensity");
    t.within(mc.visibility, vis, mc.visibility_stderr, label + " visibility");
    t.close(coherent_visibility(tr, 0.8), vis, 1e-12, label + " coherent and classical visibility agree");
    const ClassicalOutcome closed = classical_analytic(amp, tr, linear);
    t.close(std::abs(closed.mean_amplitude - cplx(mean_n, 0.0)), 0.0, 1e-12, label + " amplitude T-invariant");
    t.close(closed.visibility, vis, 1e-12, label + " analytic visibility");
  }

  // Nonlinear phase: the extra fluctuation decays faster by 1/T^2.
  NoiseFunction nonlinear;
  nonlinear.kind = ClassicalNoiseKind::nonlinear_phase;
  nonlinear.phase = {std::sqrt(0.8), PhaseDistribution::point_mass_mixture};
  nonlinear.nl_mean = 0.0;
  nonlinear.nl_sigma = 0.1;
  const NonlinearExpansion ex =
      nonlinear_fluctuation_expansion(amp, {2, 4, 8, 16, 32}, nonlinear, kSamples, seed++);
  t.expect(ex.expansion_valid, "nonlinear expansion small parameter " + fmt(ex.smallness));
  t.close(ex.linear_exponent, 1.0, 0.2, "linear fluctuation exponent");
  t.close(ex.nonlinear_exponent, 3.0, 0.2, "nonlinear fluctuation exponent");
  return result(10, "coherent-classical", t,
                "; exponents " + fmt(ex.linear_exponent) + " and " + fmt(ex.nonlinear_exponent));
}

CriterionResult check_two_party_protocols() {
  Tally t;
  std::mt19937_64 rng(kSeed + 11);
  const double probs[] = {0.0, 0.3, 0.8, 1.0};
  for (std::size_t s = 1; s <= 8; ++s) {
    for (std::size_t r = 1; r <= s; ++r) {
      for (const double p : probs) {
        const double sd = static_cast<double>(s);
        const double rd = static_cast<double>(r);
        const std::string label = case_name("protocol1 S R p", {sd, rd, p});
        const double closed = (p * sd + 1 - p) / (p * sd + (1 - p) * rd);
        t.close(protocol1_fidelity(s, r, p), closed, 1e-12, label + " closed");
        PurifyConfig pc;
        pc.n = s;
        pc.m = r;
        const Protocol1Result built = protocol1_construct(s, r, p, decoder_a(pc));
        t.close(built.fidelity, closed, 1e-12, label + " constructed");
        t.close(built.y, rd * rd / sd, 1e-12, label + " Y");
        if (s > 1) {
          const Protocol1Result haar = protocol1_construct(s, r, p, haar_unitary(s, rng));
          t.expect(haar.y >= haar.y_bound - 1e-12, label + " random decoder Y bound");
          t.close(haar.fidelity, haar.fidelity_from_y, 1e-12, label + " random decoder F(Y)");
          t.expect(haar.fidelity <= closed + 1e-12, label + " random decoder below optimum");
        }
        if (r < s) {
          t.expect(protocol1_fidelity(s + 1, r, p) >= closed - 1e-15, label + " non-decreasing in S");
        }
      }
    }
  }

  for (std::size_t s = 2; s <= 8; ++s) {
    for (const double a2 : {0.5, 0.8}) {
      std::vector<std::vector<cplx>> states;
      states.emplace_back(s, cplx(1.0 / std::sqrt(static_cast<double>(s)), 0.0));
      std::normal_distribution<double> g;
      std::vector<cplx> random(s);
      double norm2 = 0.0;
      for (auto& a : random) {
        a = cplx(g(rng), g(rng));
        norm2 += std::norm(a);
      }
      for (auto& a : random) a /= std::sqrt(norm2);
      states.push_back(random);
      for (std::size_t k = 0; k < states.size(); ++k) {
        double previous = -INFINITY;
        for (std::size_t tr = 1; tr <= 8; ++tr) {
          const std::string label = case_name("protocol2 S a2 T state", {double(s), a2, double(tr), double(k)});
          const double closed = protocol2_fidelity(states[k], a2, tr);
          t.close(protocol2_construct(states[k], a2, tr), closed, 1e-12, label);
          t.expect(closed > previous, label + " increasing in T");
          previous = closed;
        }
      }
    }
  }
  return result(11, "two-party-protocols", t);
}

CriterionResult check_thresholds() {
  Tally t;
  struct Probe {
    double fidelity;
    bool secure;
    bool entangled;
  };
  const Probe probes[] = {{0.86, true, true},
                          {0.85, false, true},
                          {std::nextafter(0.85, 1.0), true, true},
                          {std::nextafter(0.85, 0.0), false, true},
                          {0.70, false, true},
                          {0.5, false, false},
                          {std::nextafter(0.5, 1.0), false, true},
                          {0.3, false, false},
                          {1.0, true, true},
                          {0.0, false, false}};
  for (const Probe& p : probes) {
    const ThresholdReport r = threshold_report(p.fidelity);
    const std::string label = "probe " + fmt(p.fidelity);
    t.expect(r.bb84_secure == p.secure, label + " key-distribution cutoff");
    t.expect(r.werner_entangled == p.entangled, label + " entanglement cutoff");
  }
  t.expect(threshold_report(0.85).at_boundary && threshold_report(0.5).at_boundary, "boundary flags");
  return result(12, "thresholds", t);
}

std::vector<std::pair<int, std::string>> criterion_names() {
  return {{1, "success-probability"}, {2, "visibility"},        {3, "nonuniform-channels"},
          {4, "series"},              {5, "purification"},      {6, "codec-equivalence"},
          {7, "collective-encoding"}, {8, "internal-dof"},      {9, "noise-equivalence"},
          {10, "coherent-classical"}, {11, "two-party-protocols"}, {12, "thresholds"}};
}

std::vector<CriterionResult> reproduce(std::string_view subset) {
  static const std::function<CriterionResult()> checks[] = {
      check_success_probability, check_visibility,          check_nonuniform_channels, check_series,
      check_purification,        check_codec_equivalence,   check_collective_encoding, check_internal_dof,
      check_noise_equivalence,   check_coherent_classical,  check_two_party_protocols, check_thresholds};
  const auto names = criterion_names();
  std::vector<bool> wanted(names.size(), subset == "all");
  if (subset != "all") {
    std::string item;
    std::istringstream in{std::string(subset)};
    while (std::getline(in, item, ',')) {
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      const auto it = std::find_if(names.begin(), names.end(), [&](const auto& n) {
        return n.second == item || std::to_string(n.first) == item;
      });
      if (it == names.end()) throw ConfigError("unknown criterion '" + item + "'");
      wanted[static_cast<std::size_t>(it - names.begin())] = true;
    }
  }
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!wanted[i]) continue;
    try {
      out.push_back(checks[i]());
    } catch (const std::exception& e) {
      out.push_back({names[i].first, names[i].second, false, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

}  // namespace efilt
