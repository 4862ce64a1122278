#include "efilt/purification.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "efilt/codec.hpp"
#include "efilt/errors.hpp"
#include "efilt/filtration.hpp"
#include "efilt/noise.hpp"

namespace efilt {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t v) { return static_cast<Idx>(v); }

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p must lie in [0, 1]");
}

void check_nm(std::size_t n, std::size_t m) {
  if (m < 1 || m > n) throw ConfigError("need 1 <= m <= n, got n=" + std::to_string(n) + " m=" + std::to_string(m));
}

CVector max_entangled(std::size_t d) {
  CVector v = CVector::Zero(ix(d * d));
  for (std::size_t k = 0; k < d; ++k) v(ix(k * d + k)) = 1.0 / std::sqrt(static_cast<double>(d));
  return v;
}

LabeledState dephased_pair(std::size_t n, double p) {
  LabeledState st({Factor::system("A", n), Factor::system("B", n)}, max_entangled(n));
  const PhaseNoiseSpec arm = PhaseNoiseSpec::uniform(n, std::sqrt(p));
  st = st.with_register("EA", n + 1);
  st = apply_phase_noise(st, arm, 0, 0);
  st = st.with_register("EB", n + 1);
  st = apply_phase_noise(st, arm, 1, 1);
  return st;
}

/// Unnormalized block of (U x conj U) rho (U x conj U)^dagger on the window [c, c+m) of both parties.
CMatrix windowed(const CMatrix& rho, const CMatrix& u, std::size_t n, std::size_t m, std::size_t c) {
  const CMatrix big = tensor(DenseOperator(u), DenseOperator(u.conjugate())).matrix();
  const CMatrix out = big * rho * big.adjoint();
  CMatrix w(ix(m * m), ix(m * m));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t a2 = 0; a2 < m; ++a2)
        for (std::size_t b2 = 0; b2 < m; ++b2)
          w(ix(a * m + b), ix(a2 * m + b2)) = out(ix((a + c) * n + b + c), ix((a2 + c) * n + b2 + c));
  return 0.5 * (w + w.adjoint());
}

PurificationOutcome outcome_for(const PurifyConfig& cfg, const CMatrix& rho_n, const CMatrix& u, std::size_t c) {
  const CMatrix w = windowed(rho_n, u, cfg.n, cfg.m, c);
  const double ps = w.trace().real();
  if (!(ps > 0.0)) throw NumericalCheckError("window received no amplitude");
  DensityMatrix rho_f(w / ps);
  PurificationOutcome o{rho_f, fidelity_unfiltered(cfg.m, cfg.p), fidelity(rho_f, max_entangled(cfg.m)), ps, 0.0,
                        cfg.n / cfg.m};
  return o;
}

}  // namespace

std::string to_string(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::fourier_pair: return "fourier";
    case DecoderKind::hadamard_pair: return "hadamard";
    case DecoderKind::custom: return "custom";
  }
  return "unknown";
}

void validate(const PurifyConfig& cfg) {
  check_nm(cfg.n, cfg.m);
  check_p(cfg.p);
  if (cfg.block_offset + cfg.m > cfg.n) throw ConfigError("window runs past the last port");
  if (cfg.decoder == DecoderKind::hadamard_pair && !std::has_single_bit(cfg.n)) {
    throw ConfigError("Hadamard decoder pair needs n to be a power of 2");
  }
  if (cfg.decoder == DecoderKind::custom) {
    if (!cfg.custom_a) throw ConfigError("invalid decoder pair: custom decoder for A missing");
    const DenseOperator a(*cfg.custom_a);
    if (a.rows() != cfg.n || a.cols() != cfg.n || !a.is_unitary(1e-10)) {
      throw ConfigError("invalid decoder pair: A's decoder is not an n x n unitary");
    }
    if (cfg.custom_b && (cfg.custom_b->rows() != cfg.custom_a->rows() ||
                         (*cfg.custom_b - cfg.custom_a->conjugate()).cwiseAbs().maxCoeff() > kTol)) {
      throw ConfigError("invalid decoder pair: B's decoder must be the conjugate of A's");
    }
  }
}

CMatrix decoder_a(const PurifyConfig& cfg) {
  const std::size_t n = cfg.n;
  switch (cfg.decoder) {
    case DecoderKind::fourier_pair: {
      CMatrix u(ix(n), ix(n));
      const double norm = 1.0 / std::sqrt(static_cast<double>(n));
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
          u(ix(k), ix(j)) = std::polar(norm, -2.0 * std::numbers::pi *
                                                  static_cast<double>(((j + 1) * (k + 1)) % n) /
                                                  static_cast<double>(n));
      return u;
    }
    case DecoderKind::hadamard_pair: return hadamard_codec(n).decoder().matrix();
    case DecoderKind::custom: return *cfg.custom_a;
  }
  throw std::logic_error("unknown decoder kind");
}

DensityMatrix rho_after_noise(std::size_t n, double p) {
  check_p(p);
  if (n == 0) throw ConfigError("n must be >= 1");
  const CVector psi = max_entangled(n);
  CMatrix rho = p * psi * psi.adjoint();
  for (std::size_t j = 0; j < n; ++j) rho(ix(j * n + j), ix(j * n + j)) += (1.0 - p) / static_cast<double>(n);
  return DensityMatrix(rho);
}

DensityMatrix rho_after_noise_dilated(std::size_t n, double p) {
  check_p(p);
  if (n == 0) throw ConfigError("n must be >= 1");
  return partial_trace_env(dephased_pair(n, p));
}

double fidelity_unfiltered(std::size_t m, double p) {
  if (m == 0) throw ConfigError("m must be >= 1");
  return p + (1.0 - p) / static_cast<double>(m);
}

double purified_fidelity_analytic(std::size_t n, std::size_t m, double p) {
  check_nm(n, m);
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return ((nn - 1.0) * p + 1.0) / ((nn - mm) * p + mm);
}

double purify_success_analytic(std::size_t n, std::size_t m, double p) {
  check_nm(n, m);
  const double r = static_cast<double>(m) / static_cast<double>(n);
  return p * r + (1.0 - p) * r * r;
}

double total_success_analytic(std::size_t n, std::size_t m, double p) {
  return static_cast<double>(n / m) * purify_success_analytic(n, m, p);
}

CMatrix purified_state_analytic(std::size_t n, std::size_t m, double p) {
  check_nm(n, m);
  const double ps = purify_success_analytic(n, m, p);
  const double nn = static_cast<double>(n);
  CMatrix rho = CMatrix::Zero(ix(m * m), ix(m * m));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l)
      for (std::size_t k2 = 0; k2 < m; ++k2)
        for (std::size_t l2 = 0; l2 < m; ++l2) {
          double v = 0.0;
          if (k == l && k2 == l2) v += p / nn;
          const long d = static_cast<long>(k) - static_cast<long>(k2) - static_cast<long>(l) + static_cast<long>(l2);
          if (((d % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n) == 0) {
            v += (1.0 - p) / (nn * nn);
          }
          rho(ix(k * m + l), ix(k2 * m + l2)) = v / ps;
        }
  return rho;
}

PurificationOutcome purify(const PurifyConfig& cfg) {
  validate(cfg);
  const CMatrix rho_n = rho_after_noise_dilated(cfg.n, cfg.p).matrix();
  const CMatrix u = decoder_a(cfg);
  PurificationOutcome o = outcome_for(cfg, rho_n, u, cfg.block_offset);
  double total = 0.0;
  for (std::size_t b = 0; b < o.blocks; ++b) total += windowed(rho_n, u, cfg.n, cfg.m, b * cfg.m).trace().real();
  o.p_success_total = total;
  return o;
}

double total_success(const PurifyConfig& cfg) { return purify(cfg).p_success_total; }

std::vector<PurificationOutcome> purify_blocks(const PurifyConfig& cfg) {
  validate(cfg);
  const CMatrix rho_n = rho_after_noise_dilated(cfg.n, cfg.p).matrix();
  const CMatrix u = decoder_a(cfg);
  std::vector<PurificationOutcome> out;
  double total = 0.0;
  for (std::size_t b = 0; b < cfg.n / cfg.m; ++b) {
    out.push_back(outcome_for(cfg, rho_n, u, b * cfg.m));
    total += out.back().p_success;
  }
  for (auto& o : out) o.p_success_total = total;
  return out;
}

double protocol1_fidelity(std::size_t sources, std::size_t kept, double p) {
  check_nm(sources, kept);
  const double s = static_cast<double>(sources);
  const double r = static_cast<double>(kept);
  return protocol1_fidelity_from_y(sources, kept, p, r * r / s);
}

double protocol1_fidelity_from_y(std::size_t sources, std::size_t kept, double p, double y) {
  check_nm(sources, kept);
  check_p(p);
  const double s = static_cast<double>(sources);
  const double r = static_cast<double>(kept);
  return (p * r / s + (1.0 - p) * y / (s * r)) / (p * r / s + (1.0 - p) * y / s);
}

Protocol1Result protocol1_construct(std::size_t sources, std::size_t kept, double p, const CMatrix& u) {
  check_nm(sources, kept);
  check_p(p);
  if (u.rows() != ix(sources) || u.cols() != ix(sources) || !DenseOperator(u).is_unitary(1e-10)) {
    throw ConfigError("invalid decoder pair: decoder must be an S x S unitary");
  }
  LabeledState st = dephased_pair(sources, p);
  st = apply(st, DenseOperator(u), 0);
  st = apply(st, DenseOperator(u.conjugate()), 1);
  st = truncate_factor(st, 0, kept);
  st = truncate_factor(st, 1, kept);
  const CMatrix rho = reduced_system_matrix(st);
  const CVector target = max_entangled(kept);

  Protocol1Result r;
  r.p_success = rho.trace().real();
  r.fidelity = (target.adjoint() * rho * target)(0, 0).real() / r.p_success;
  const double s = static_cast<double>(sources);
  const double kr = static_cast<double>(kept);
  r.y_bound = kr * kr / s;
  r.balanced = true;
  for (std::size_t i = 0; i < sources; ++i) {
    const double yi = u.col(ix(i)).head(ix(kept)).squaredNorm();
    r.y += yi * yi;
    if (std::abs(yi - kr / s) > 1e-10) r.balanced = false;
  }
  r.fidelity_from_y = protocol1_fidelity_from_y(sources, kept, p, r.y);
  return r;
}

double protocol2_fidelity(const std::vector<cplx>& amplitudes, double alpha2, std::size_t transmission) {
  if (transmission == 0) throw ConfigError("T must be >= 1");
  check_p(alpha2);
  double norm = 0.0;
  double quartic = 0.0;
  for (const cplx a : amplitudes) {
    norm += std::norm(a);
    quartic += std::norm(a) * std::norm(a);
  }
  if (std::abs(norm - 1.0) > 1e-12) throw ConfigError("amplitudes must satisfy sum |a_i|^2 = 1");
  const double keep = alpha2 + (1.0 - alpha2) / static_cast<double>(transmission);
  const double a4 = alpha2 * alpha2;
  return (a4 + (keep * keep - a4) * quartic) / (keep * keep);
}

double protocol2_construct(const std::vector<cplx>& amplitudes, double alpha2, std::size_t transmission) {
  const std::size_t s = amplitudes.size();
  if (s == 0) throw ConfigError("need at least one amplitude");
  protocol2_fidelity(amplitudes, alpha2, transmission);  // domain checks

  FiltrationConfig single{multiplexed(fourier_codec(transmission), s),
                          PhaseNoiseSpec::uniform(s * transmission, alpha2),
                          1,
                          std::nullopt,
                          CVector::Unit(ix(s), 0),
                          std::nullopt,
                          false,
                          kDefaultDimCap};
  const std::vector<CMatrix> kraus = pipeline_kraus(single);
  const std::size_t env = kraus.size();
  CMatrix dil(ix(s * env), ix(s));
  for (std::size_t r = 0; r < s; ++r)
    for (std::size_t e = 0; e < env; ++e) dil.row(ix(r * env + e)) = kraus[e].row(ix(r));

  CVector amps = CVector::Zero(ix(s * s));
  for (std::size_t i = 0; i < s; ++i) amps(ix(i * s + i)) = amplitudes[i];
  LabeledState st({Factor::system("A", s), Factor::system("B", s)}, amps);
  st = apply(st, DenseOperator(dil), 0);
  st = split_factor(st, 0, {Factor::system("A", s), Factor::environment("EA", env)});
  st = apply(st, DenseOperator(dil), 2);
  st = split_factor(st, 2, {Factor::system("B", s), Factor::environment("EB", env)});
  const CMatrix rho = reduced_system_matrix(st);
  return (amps.adjoint() * rho * amps)(0, 0).real() / rho.trace().real();
}

DeferredReport deferred_postselection_demo(const PurifyConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const std::size_t n = cfg.n;
  const std::size_t m = cfg.m;
  const std::size_t c = cfg.block_offset;
  const CMatrix rho_n = rho_after_noise_dilated(n, cfg.p).matrix();
  const CMatrix u = decoder_a(cfg);

  std::mt19937_64 rng(seed);
  const CMatrix wa = haar_unitary(m, rng);
  const CMatrix wb = haar_unitary(m, rng);

  // Upfront: project onto the window, then rotate inside it.
  const CMatrix w = windowed(rho_n, u, n, m, c);
  const CMatrix local_small = tensor(DenseOperator(wa), DenseOperator(wb)).matrix();
  const CMatrix upfront = local_small * w * local_small.adjoint();

  // Deferred: rotate inside the window on the full space, check presence at the end.
  CMatrix ea = CMatrix::Identity(ix(n), ix(n));
  CMatrix eb = CMatrix::Identity(ix(n), ix(n));
  ea.block(ix(c), ix(c), ix(m), ix(m)) = wa;
  eb.block(ix(c), ix(c), ix(m), ix(m)) = wb;
  const CMatrix dec = tensor(DenseOperator(u), DenseOperator(u.conjugate())).matrix();
  const CMatrix local = tensor(DenseOperator(ea), DenseOperator(eb)).matrix();
  const CMatrix full = local * dec * rho_n * dec.adjoint() * local.adjoint();
  CMatrix deferred(ix(m * m), ix(m * m));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t a2 = 0; a2 < m; ++a2)
        for (std::size_t b2 = 0; b2 < m; ++b2)
          deferred(ix(a * m + b), ix(a2 * m + b2)) = full(ix((a + c) * n + b + c), ix((a2 + c) * n + b2 + c));

  DeferredReport rep;
  rep.p_success_upfront = upfront.trace().real();
  rep.p_success_deferred = deferred.trace().real();
  rep.max_entry_difference =
      (upfront / rep.p_success_upfront - deferred / rep.p_success_deferred).cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace efilt
