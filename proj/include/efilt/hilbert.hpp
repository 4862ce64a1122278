#pragma once

// Dense complex linear algebra over small labeled tensor-product spaces.
//
// A LabeledState is a complex amplitude vector over an ordered list of
// factors. Factors are either system factors (channels, internal degrees of
// freedom, parties) or environment registers. Amplitudes are stored
// row-major: the first factor is the most significant index.
//
// Index conventions (all 0-based):
//   - channel j in the math (1-based) is index j-1 of a system factor;
//   - environment outcome 0 is the undisturbed register state, outcome j
//     records an error on channel index j-1.

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace efilt {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kTol = 1e-12;
inline constexpr double kEigenFloor = -1e-10;
inline constexpr std::size_t kDefaultDimCap = std::size_t{1} << 20;

enum class FactorKind { system, environment };

struct Factor {
  std::string name;
  std::size_t dim = 1;
  FactorKind kind = FactorKind::system;
  // Environment registers only: set once a noise segment has written into it.
  bool consumed = false;

  static Factor system(std::string name, std::size_t dim) {
    return {std::move(name), dim, FactorKind::system, false};
  }
  static Factor environment(std::string name, std::size_t dim) {
    return {std::move(name), dim, FactorKind::environment, false};
  }
};

/// One basis element of a composite space: one index per factor.
struct BasisLabel {
  std::vector<std::size_t> indices;

  bool operator==(const BasisLabel&) const = default;
  auto operator<=>(const BasisLabel&) const = default;
};

/// Product of `dims`, throwing DimensionError if it exceeds `cap`.
std::size_t checked_product(const std::vector<std::size_t>& dims, std::size_t cap = kDefaultDimCap);

class DenseOperator {
 public:
  DenseOperator() = default;
  explicit DenseOperator(CMatrix m) : m_(std::move(m)) {}

  static DenseOperator identity(std::size_t n);
  /// Diagonal projector onto indices [first, first + count) of an n-dimensional space.
  static DenseOperator window_projector(std::size_t n, std::size_t first, std::size_t count);

  std::size_t rows() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(m_.cols()); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(std::size_t r, std::size_t c) const {
    return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  DenseOperator adjoint() const { return DenseOperator(m_.adjoint()); }
  DenseOperator conjugate() const { return DenseOperator(m_.conjugate()); }

  /// O^dagger O equals the identity on the domain.
  bool is_isometry(double tol = kTol) const;
  bool is_unitary(double tol = kTol) const;
  bool is_idempotent(double tol = kTol) const;
  bool is_hermitian(double tol = kTol) const;

  friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
    return DenseOperator(a.m_ * b.m_);
  }

 private:
  CMatrix m_;
};

class DensityMatrix {
 public:
  /// Validates hermiticity, eigenvalues >= -1e-10 and trace <= 1 + 1e-12.
  /// Throws NumericalCheckError otherwise.
  explicit DensityMatrix(CMatrix m);

  static DensityMatrix pure(const CVector& psi);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(std::size_t r, std::size_t c) const {
    return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  double trace() const { return m_.trace().real(); }

  /// Ascending eigenvalues; values in [-1e-10, 0) are clipped to zero.
  Eigen::VectorXd eigenvalues() const;

  /// Rescaled to unit trace. Throws std::domain_error for a zero matrix.
  DensityMatrix normalized() const;

 private:
  CMatrix m_;
};

class LabeledState {
 public:
  LabeledState(std::vector<Factor> factors, CVector amps, std::size_t dim_cap = kDefaultDimCap);

  static LabeledState basis(std::vector<Factor> factors, const BasisLabel& label,
                            std::size_t dim_cap = kDefaultDimCap);

  const std::vector<Factor>& factors() const { return factors_; }
  const Factor& factor(std::size_t i) const { return factors_.at(i); }
  std::size_t factor_count() const { return factors_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }

  std::size_t flat_index(const BasisLabel& label) const;
  BasisLabel label_of(std::size_t flat) const;
  cplx amplitude(const BasisLabel& label) const { return amps_(static_cast<Eigen::Index>(flat_index(label))); }
  double norm_squared() const { return amps_.squaredNorm(); }

  /// Product of the system-factor dimensions.
  std::size_t system_dim() const;
  /// Factor positions of the environment registers, in order; segment s is entry s.
  std::vector<std::size_t> environment_factors() const;
  std::size_t environment_factor(std::size_t segment) const;

  /// Row-major stride of factor `i` in the flat amplitude vector.
  std::size_t stride(std::size_t i) const;

  /// Appends a fresh environment register prepared in outcome 0.
  LabeledState with_register(std::string name, std::size_t dim, std::size_t dim_cap = kDefaultDimCap) const;

  /// Same factors, register `i` flagged as consumed.
  LabeledState mark_consumed(std::size_t i) const;

  LabeledState with_amplitudes(CVector amps) const;

 private:
  std::vector<Factor> factors_;
  CVector amps_;
};

LabeledState tensor(const LabeledState& a, const LabeledState& b, std::size_t dim_cap = kDefaultDimCap);
DenseOperator tensor(const DenseOperator& a, const DenseOperator& b, std::size_t dim_cap = kDefaultDimCap);

/// Applies `op` to factor `f`. `op` may be rectangular: its column count must
/// match the factor dimension and the factor takes the row count as its new dimension.
LabeledState apply(const LabeledState& state, const DenseOperator& op, std::size_t f,
                   std::size_t dim_cap = kDefaultDimCap);

/// Replaces factor `f` by `parts` (row-major split; dimensions must multiply to the old one).
LabeledState split_factor(const LabeledState& state, std::size_t f, std::vector<Factor> parts);

/// Keeps indices [0, keep) of factor `f` and drops the rest.
LabeledState truncate_factor(const LabeledState& state, std::size_t f, std::size_t keep);

/// Traces out every environment register. Requires at least one register.
DensityMatrix partial_trace_env(const LabeledState& state);

/// Unnormalized system operator sum_e psi_e psi_e^dagger; accepts sub-normalized
/// states and states without environment registers.
CMatrix reduced_system_matrix(const LabeledState& state);

/// Tr(rho |psi><psi|). The target must be normalized within 1e-12.
double fidelity(const DensityMatrix& rho, const CVector& target);
double fidelity(const DensityMatrix& rho, const LabeledState& target);

/// Projects factor `f` with an idempotent operator. Returns the unnormalized
/// projected state and its squared norm.
std::pair<LabeledState, double> project(const LabeledState& state, const DenseOperator& projector, std::size_t f);
/// Projector acting on the full composite space.
std::pair<LabeledState, double> project(const LabeledState& state, const DenseOperator& projector);

}  // namespace efilt
