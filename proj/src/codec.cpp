#include "efilt/codec.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "efilt/errors.hpp"

namespace efilt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx unit_phase(double turns) { return std::polar(1.0, kTwoPi * turns); }

std::size_t bit_reverse(std::size_t v, int bits) {
  std::size_t r = 0;
  for (int b = 0; b < bits; ++b) r |= ((v >> b) & 1u) << (bits - 1 - b);
  return r;
}

/// Householder-style unitary mapping unit vector `v` onto e_0.
CMatrix rotate_to_first(const CVector& v) {
  const auto n = v.size();
  CMatrix h = CMatrix::Identity(n, n);
  const cplx v0 = v(0);
  const cplx ph = std::abs(v0) > 0 ? v0 / std::abs(v0) : cplx(1.0, 0.0);
  CVector w = v;
  w(0) += ph;  // w = v + ph e_0
  const double wn = w.squaredNorm();
  if (wn > 0) h -= 2.0 * (w * w.adjoint()) / wn;
  // h v = -ph e_0; fix the phase so that h v = e_0.
  return (-std::conj(ph)) * h;
}

}  // namespace

std::string to_string(CodecKind kind) {
  switch (kind) {
    case CodecKind::identity: return "identity";
    case CodecKind::fourier: return "fourier";
    case CodecKind::hadamard: return "hadamard";
    case CodecKind::collective_fourier: return "collective-fourier";
    case CodecKind::custom: return "custom";
  }
  return "unknown";
}

Codec::Codec(CodecKind kind, DenseOperator encoder, DenseOperator decoder)
    : kind_(kind), enc_(std::move(encoder)), dec_(std::move(decoder)) {
  if (enc_.cols() == 0 || enc_.rows() < enc_.cols()) throw DimensionError("encoder must map S into T >= S channels");
  if (dec_.rows() != enc_.rows() || dec_.cols() != enc_.rows()) {
    throw DimensionError("decoder must be square on the transmission channels");
  }
  if (!enc_.is_isometry()) throw NumericalCheckError("encoder is not an isometry");
  if (!dec_.is_unitary()) throw NumericalCheckError("decoder is not unitary");
}

Codec identity_codec(std::size_t sources) {
  if (sources == 0) throw ConfigError("source count must be at least 1");
  return Codec(CodecKind::identity, DenseOperator::identity(sources), DenseOperator::identity(sources));
}

Codec fourier_codec(std::size_t transmission) {
  if (transmission == 0) throw ConfigError("T must be >= 1");
  const auto t = static_cast<Eigen::Index>(transmission);
  const double norm = 1.0 / std::sqrt(static_cast<double>(transmission));
  CMatrix enc = CMatrix::Constant(t, 1, cplx(norm, 0.0));
  CMatrix dec(t, t);
  // Decoder column j (channel j+1) sends to port k with phase 2 pi (j+1) k / T.
  for (Eigen::Index k = 0; k < t; ++k) {
    for (Eigen::Index j = 0; j < t; ++j) {
      dec(k, j) = norm * unit_phase(static_cast<double>(((j + 1) * k) % t) / static_cast<double>(t));
    }
  }
  return Codec(CodecKind::fourier, DenseOperator(std::move(enc)), DenseOperator(std::move(dec)));
}

Codec hadamard_codec(std::size_t transmission) {
  if (transmission == 0 || !std::has_single_bit(transmission)) {
    throw ConfigError("Hadamard codec needs T to be a power of 2, got " + std::to_string(transmission));
  }
  const int bits = std::countr_zero(transmission);
  const auto t = static_cast<Eigen::Index>(transmission);
  const double norm = 1.0 / std::sqrt(static_cast<double>(transmission));
  CMatrix h(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    const std::size_t ri = bit_reverse(static_cast<std::size_t>(i), bits);
    for (Eigen::Index j = 0; j < t; ++j) {
      const bool odd = std::popcount(ri & static_cast<std::size_t>(j)) % 2 == 1;
      h(i, j) = cplx(odd ? -norm : norm, 0.0);
    }
  }
  CMatrix enc = h.col(0);
  return Codec(CodecKind::hadamard, DenseOperator(std::move(enc)), DenseOperator(std::move(h)));
}

Codec collective_fourier_codec(std::size_t sources, std::size_t transmission) {
  if (sources == 0 || transmission == 0) throw ConfigError("S and T must be >= 1");
  if (sources > transmission) throw ConfigError("collective codec needs S <= T");
  const auto t = static_cast<Eigen::Index>(transmission);
  const auto s = static_cast<Eigen::Index>(sources);
  const double norm = 1.0 / std::sqrt(static_cast<double>(transmission));
  CMatrix enc(t, s);
  for (Eigen::Index k = 0; k < t; ++k) {
    for (Eigen::Index j = 0; j < s; ++j) {
      enc(k, j) = norm * unit_phase(-static_cast<double>(((k + 1) * j) % t) / static_cast<double>(t));
    }
  }
  // Inverse transform: port m collects channel k with phase 2 pi (k+1) m / T.
  CMatrix dec(t, t);
  for (Eigen::Index m = 0; m < t; ++m) {
    for (Eigen::Index k = 0; k < t; ++k) {
      dec(m, k) = norm * unit_phase(static_cast<double>(((k + 1) * m) % t) / static_cast<double>(t));
    }
  }
  return Codec(CodecKind::collective_fourier, DenseOperator(std::move(enc)), DenseOperator(std::move(dec)));
}

Codec multiplexed(const Codec& single, std::size_t sources) {
  if (single.source_count() != 1) throw ConfigError("multiplexing needs a single-source codec");
  if (sources == 0) throw ConfigError("source count must be at least 1");
  if (sources == 1) return single;
  const auto t = static_cast<Eigen::Index>(single.transmission_count());
  const auto s = static_cast<Eigen::Index>(sources);
  const auto total = s * t;
  CMatrix enc = CMatrix::Zero(total, s);
  CMatrix dec = CMatrix::Zero(total, total);
  const CMatrix& e1 = single.encoder().matrix();
  const CMatrix& d1 = single.decoder().matrix();
  for (Eigen::Index l = 0; l < s; ++l) {
    enc.block(l * t, l, t, 1) = e1;
    for (Eigen::Index k = 0; k < t; ++k) {
      // Port 0 of block l is useful port l; the others go after all useful ports.
      const Eigen::Index port = (k == 0) ? l : s + l * (t - 1) + (k - 1);
      dec.block(port, l * t, 1, t) = d1.row(k);
    }
  }
  return Codec(single.kind(), DenseOperator(std::move(enc)), DenseOperator(std::move(dec)));
}

Codec custom_codec(DenseOperator encoder, DenseOperator decoder) {
  return Codec(CodecKind::custom, std::move(encoder), std::move(decoder));
}

CMatrix haar_unitary(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(n);
  CMatrix z(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j) {
    const cplx rjj = r(j, j);
    if (std::abs(rjj) > 0) q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

Codec random_faithful_codec(std::size_t transmission, std::mt19937_64& rng) {
  if (transmission == 0) throw ConfigError("T must be >= 1");
  const auto t = static_cast<Eigen::Index>(transmission);
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(t);
  for (Eigen::Index i = 0; i < t; ++i) v(i) = cplx(g(rng), g(rng));
  v.normalize();
  const CMatrix h0 = rotate_to_first(v);
  CMatrix w = CMatrix::Identity(t, t);
  if (t > 1) w.bottomRightCorner(t - 1, t - 1) = haar_unitary(transmission - 1, rng);
  CMatrix enc = v;
  return Codec(CodecKind::custom, DenseOperator(std::move(enc)), DenseOperator(w * h0));
}

CodecReport validate_codec(const Codec& codec) {
  const CMatrix& ue = codec.encoder().matrix();
  const CMatrix& ud = codec.decoder().matrix();
  const auto s = ue.cols();
  const auto t = ue.rows();
  CodecReport rep;
  const CMatrix prod = ud * ue;
  CMatrix target = CMatrix::Zero(t, s);
  target.topRows(s) = CMatrix::Identity(s, s);
  rep.faithfulness_error = (prod - target).cwiseAbs().maxCoeff();
  rep.faithful = rep.faithfulness_error <= kTol;

  bool optimal = rep.faithful;
  rep.effective_degree = static_cast<std::size_t>(t);
  for (Eigen::Index i = 0; i < s; ++i) {
    double factor = 0.0;
    std::vector<double> mags;
    for (Eigen::Index j = 0; j < t; ++j) {
      const double m = std::abs(ue(j, i) * ud(i, j));
      factor += m * m;
      if (m > kTol) mags.push_back(m);
    }
    rep.per_source_factor.push_back(factor);
    rep.effective_degree = std::min(rep.effective_degree, mags.size());
    const double want = mags.empty() ? 0.0 : 1.0 / static_cast<double>(mags.size());
    for (const double m : mags) {
      if (std::abs(m - want) > 1e-10) optimal = false;
    }
  }
  rep.reduction_factor = rep.per_source_factor.front();
  rep.optimal = optimal;
  return rep;
}

void require_faithful(const Codec& codec, bool force) {
  if (force) return;
  const CodecReport rep = validate_codec(codec);
  if (!rep.faithful) {
    std::ostringstream os;
    os << "codec is not faithful (max deviation " << rep.faithfulness_error << "); set force to use it anyway";
    throw ConfigError(os.str());
  }
}

Codec read_codec(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t s = 0, t = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (!header) {
      std::string word;
      if (!(ls >> word)) continue;
      if (word != "codec" || !(ls >> s >> t) || s == 0 || t < s) {
        throw ConfigError("codec file line " + std::to_string(lineno) + ": expected 'codec S T' with 1 <= S <= T");
      }
      header = true;
      continue;
    }
    std::vector<double> vals;
    double x = 0;
    while (ls >> x) vals.push_back(x);
    if (!ls.eof()) throw ConfigError("codec file line " + std::to_string(lineno) + ": not a number");
    if (vals.empty()) continue;
    const std::size_t want = 2 * (rows.size() < t ? s : t);
    if (vals.size() != want) {
      throw ConfigError("codec file line " + std::to_string(lineno) + ": expected " + std::to_string(want) +
                        " values, got " + std::to_string(vals.size()));
    }
    rows.push_back(std::move(vals));
  }
  if (!header) throw ConfigError("codec file: missing 'codec S T' header");
  if (rows.size() != 2 * t) {
    throw ConfigError("codec file: expected " + std::to_string(2 * t) + " matrix rows, got " +
                      std::to_string(rows.size()));
  }
  const auto ti = static_cast<Eigen::Index>(t);
  const auto si = static_cast<Eigen::Index>(s);
  CMatrix enc(ti, si), dec(ti, ti);
  for (Eigen::Index r = 0; r < ti; ++r) {
    for (Eigen::Index c = 0; c < si; ++c) enc(r, c) = cplx(rows[r][2 * c], rows[r][2 * c + 1]);
    for (Eigen::Index c = 0; c < ti; ++c) dec(r, c) = cplx(rows[t + r][2 * c], rows[t + r][2 * c + 1]);
  }
  return custom_codec(DenseOperator(std::move(enc)), DenseOperator(std::move(dec)));
}

Codec load_codec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open codec file '" + path + "'");
  return read_codec(in);
}

void write_codec(std::ostream& out, const Codec& codec) {
  auto put = [&](const CMatrix& m) {
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%s%.17g %.17g", c ? " " : "", m(r, c).real(), m(r, c).imag());
        out << buf;
      }
      out << '\n';
    }
  };
  out << "codec " << codec.source_count() << ' ' << codec.transmission_count() << '\n';
  put(codec.encoder().matrix());
  put(codec.decoder().matrix());
}

}  // namespace efilt
