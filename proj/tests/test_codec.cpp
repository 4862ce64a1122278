#include <doctest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "efilt/codec.hpp"
#include "efilt/errors.hpp"

using namespace efilt;

TEST_CASE("fourier codec examples") {
  const Codec one = fourier_codec(1);
  CHECK(one.encoder().matrix().isApprox(CMatrix::Identity(1, 1)));
  CHECK(one.decoder().matrix().isApprox(CMatrix::Identity(1, 1)));

  const Codec two = fourier_codec(2);
  const CMatrix prod = two.decoder().matrix() * two.encoder().matrix();
  CHECK(std::abs(prod(0, 0) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(prod(1, 0)) < 1e-15);

  const Codec four = fourier_codec(4);
  for (Eigen::Index j = 0; j < 4; ++j) {
    CHECK(std::abs(four.encoder().matrix()(j, 0) * four.decoder().matrix()(0, j)) == doctest::Approx(0.25));
  }
  // Decoder row k, column j: e^{2 pi i j (k-1)/T} / sqrt T with 1-based j, k.
  const double t = 4.0;
  for (int k = 1; k <= 4; ++k) {
    for (int j = 1; j <= 4; ++j) {
      const cplx want = std::polar(0.5, 2 * std::numbers::pi * j * (k - 1) / t);
      CHECK(std::abs(four.decoder().matrix()(k - 1, j - 1) - want) < 1e-14);
    }
  }
}

TEST_CASE("hadamard codec sign pattern") {
  const Codec h = hadamard_codec(4);
  const int signs[4][4] = {{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) CHECK(h.decoder().matrix()(r, c).real() == doctest::Approx(0.5 * signs[r][c]));
  }
  const Codec h2 = hadamard_codec(2);
  CHECK(h2.encoder().matrix()(0, 0).real() == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(h2.encoder().matrix()(1, 0).real() == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(h2.decoder().matrix()(1, 1).real() == doctest::Approx(-1 / std::sqrt(2.0)));
  CHECK_THROWS_AS(hadamard_codec(6), ConfigError);

  const CodecReport r8 = validate_codec(hadamard_codec(8));
  CHECK(r8.optimal);
  CHECK(r8.reduction_factor == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("validate_codec reductions") {
  for (const std::size_t t : {1, 2, 3, 5, 8, 16}) {
    const CodecReport r = validate_codec(fourier_codec(t));
    CHECK(r.faithful);
    CHECK(r.optimal);
    CHECK(std::abs(r.reduction_factor - 1.0 / static_cast<double>(t)) < 1e-12);
  }
  for (const std::size_t t : {2, 4, 8, 16}) {
    const CodecReport r = validate_codec(hadamard_codec(t));
    CHECK(r.optimal);
    CHECK(std::abs(r.reduction_factor - 1.0 / static_cast<double>(t)) < 1e-12);
  }
  const Codec trivial = custom_codec(DenseOperator::identity(1), DenseOperator::identity(1));
  const CodecReport r = validate_codec(trivial);
  CHECK(r.faithful);
  CHECK(r.reduction_factor == doctest::Approx(1.0));
}

TEST_CASE("collective codec") {
  const Codec c = collective_fourier_codec(2, 3);
  CHECK(c.source_count() == 2);
  CHECK(c.transmission_count() == 3);
  CHECK(validate_codec(c).faithful);
  const Codec square = collective_fourier_codec(3, 3);
  CHECK(square.encoder().is_unitary());
  CHECK(validate_codec(square).faithful);
  CHECK_THROWS_AS(collective_fourier_codec(4, 3), ConfigError);
}

TEST_CASE("multiplexed codec routes each source to its own block") {
  const Codec m = multiplexed(fourier_codec(3), 2);
  CHECK(m.source_count() == 2);
  CHECK(m.transmission_count() == 6);
  const CodecReport r = validate_codec(m);
  CHECK(r.faithful);
  CHECK(r.optimal);
  CHECK(r.reduction_factor == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("property: constructed codecs are isometric") {
  std::mt19937_64 rng(8);
  std::vector<Codec> all{fourier_codec(7), hadamard_codec(8), collective_fourier_codec(3, 5),
                         multiplexed(hadamard_codec(4), 3)};
  for (int i = 0; i < 20; ++i) all.push_back(random_faithful_codec(2 + static_cast<std::size_t>(i % 6), rng));
  for (const Codec& c : all) {
    CHECK(c.encoder().is_isometry());
    CHECK(c.decoder().is_unitary());
    CHECK(validate_codec(c).faithful);
  }
}

TEST_CASE("property: Schwarz bound on the reduction factor") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const std::size_t t = 2 + static_cast<std::size_t>(i % 7);
    const CodecReport r = validate_codec(random_faithful_codec(t, rng));
    CHECK(r.reduction_factor >= 1.0 / static_cast<double>(t) - 1e-12);
  }
}

TEST_CASE("bad codecs") {
  CMatrix enc = CMatrix::Ones(2, 1);
  CHECK_THROWS_AS(custom_codec(DenseOperator(enc), DenseOperator::identity(2)), NumericalCheckError);
  CMatrix shifted = CMatrix::Zero(2, 1);
  shifted(1, 0) = 1.0;
  const Codec unfaithful = custom_codec(DenseOperator(shifted), DenseOperator::identity(2));
  CHECK_FALSE(validate_codec(unfaithful).faithful);
  CHECK_THROWS_AS(require_faithful(unfaithful, false), ConfigError);
  CHECK_NOTHROW(require_faithful(unfaithful, true));
}

TEST_CASE("codec text round trip") {
  std::mt19937_64 rng(3);
  const Codec c = random_faithful_codec(4, rng);
  std::stringstream ss;
  write_codec(ss, c);
  const Codec back = read_codec(ss);
  CHECK((back.encoder().matrix() - c.encoder().matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.decoder().matrix() - c.decoder().matrix()).cwiseAbs().maxCoeff() == 0.0);

  std::istringstream truncated("codec 1 2\n0.7 0\n");
  CHECK_THROWS_AS(read_codec(truncated), ConfigError);
}
