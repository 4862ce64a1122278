#include "efilt/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "efilt/errors.hpp"

namespace efilt {

namespace {

using RowMajorMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<std::size_t> dims_of(const std::vector<Factor>& factors) {
  std::vector<std::size_t> dims;
  dims.reserve(factors.size());
  for (const auto& f : factors) dims.push_back(f.dim);
  return dims;
}

std::size_t product_range(const std::vector<Factor>& factors, std::size_t begin, std::size_t end) {
  std::size_t p = 1;
  for (std::size_t i = begin; i < end; ++i) p *= factors[i].dim;
  return p;
}

}  // namespace

std::size_t checked_product(const std::vector<std::size_t>& dims, std::size_t cap) {
  std::size_t p = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("factor dimension must be positive");
    if (p > cap / d) {
      std::ostringstream msg;
      msg << "composite dimension exceeds cap " << cap;
      throw DimensionError(msg.str());
    }
    p *= d;
  }
  if (p > cap) throw DimensionError("composite dimension exceeds cap " + std::to_string(cap));
  return p;
}

// ---------------------------------------------------------------------------
// DenseOperator

DenseOperator DenseOperator::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return DenseOperator(CMatrix::Identity(k, k));
}

DenseOperator DenseOperator::window_projector(std::size_t n, std::size_t first, std::size_t count) {
  if (first + count > n) throw std::invalid_argument("projector window exceeds dimension");
  const auto k = static_cast<Eigen::Index>(n);
  CMatrix m = CMatrix::Zero(k, k);
  for (std::size_t i = first; i < first + count; ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return DenseOperator(std::move(m));
}

bool DenseOperator::is_isometry(double tol) const {
  if (m_.rows() < m_.cols()) return false;
  const CMatrix g = m_.adjoint() * m_;
  return (g - CMatrix::Identity(m_.cols(), m_.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool DenseOperator::is_unitary(double tol) const {
  return m_.rows() == m_.cols() && is_isometry(tol) &&
         (m_ * m_.adjoint() - CMatrix::Identity(m_.rows(), m_.rows())).cwiseAbs().maxCoeff() <= tol;
}

bool DenseOperator::is_idempotent(double tol) const {
  if (m_.rows() != m_.cols()) return false;
  if (m_.size() == 0) return true;
  return (m_ * m_ - m_).cwiseAbs().maxCoeff() <= tol;
}

bool DenseOperator::is_hermitian(double tol) const {
  if (m_.rows() != m_.cols()) return false;
  if (m_.size() == 0) return true;
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("density matrix must be square");
  if (m_.size() == 0) throw std::invalid_argument("density matrix must be non-empty");
  const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kTol) {
    throw NumericalCheckError("density matrix not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  if (trace() > 1.0 + kTol) {
    throw NumericalCheckError("density matrix trace exceeds 1: " + std::to_string(trace()));
  }
  const CMatrix h = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < kEigenFloor) {
    throw NumericalCheckError("density matrix has negative eigenvalue " +
                              std::to_string(solver.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::pure(const CVector& psi) { return DensityMatrix(psi * psi.adjoint()); }

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  const CMatrix h = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0 && ev(i) >= kEigenFloor) ev(i) = 0.0;
  }
  return ev;
}

DensityMatrix DensityMatrix::normalized() const {
  const double t = trace();
  if (!(t > 0.0)) throw std::domain_error("cannot normalize a density matrix with zero trace");
  CMatrix m = m_ / t;
  // Renormalizing can push the trace a few ulps above one.
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix(std::move(m));
}

// ---------------------------------------------------------------------------
// LabeledState

LabeledState::LabeledState(std::vector<Factor> factors, CVector amps, std::size_t dim_cap)
    : factors_(std::move(factors)), amps_(std::move(amps)) {
  if (factors_.empty()) throw std::invalid_argument("state needs at least one factor");
  const std::size_t d = checked_product(dims_of(factors_), dim_cap);
  if (static_cast<std::size_t>(amps_.size()) != d) {
    throw std::invalid_argument("amplitude count " + std::to_string(amps_.size()) +
                                " does not match composite dimension " + std::to_string(d));
  }
  const double n2 = amps_.squaredNorm();
  if (!std::isfinite(n2) || n2 > 1.0 + kTol) {
    throw NumericalCheckError("state norm squared exceeds 1: " + std::to_string(n2));
  }
}

LabeledState LabeledState::basis(std::vector<Factor> factors, const BasisLabel& label, std::size_t dim_cap) {
  const std::size_t d = checked_product(dims_of(factors), dim_cap);
  LabeledState s(std::move(factors), CVector::Zero(static_cast<Eigen::Index>(d)), dim_cap);
  s.amps_(static_cast<Eigen::Index>(s.flat_index(label))) = 1.0;
  return s;
}

std::size_t LabeledState::stride(std::size_t i) const {
  return product_range(factors_, i + 1, factors_.size());
}

std::size_t LabeledState::flat_index(const BasisLabel& label) const {
  if (label.indices.size() != factors_.size()) {
    throw std::invalid_argument("label has " + std::to_string(label.indices.size()) + " indices, state has " +
                                std::to_string(factors_.size()) + " factors");
  }
  std::size_t flat = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (label.indices[i] >= factors_[i].dim) {
      throw std::out_of_range("label index " + std::to_string(label.indices[i]) + " out of range for factor '" +
                              factors_[i].name + "'");
    }
    flat = flat * factors_[i].dim + label.indices[i];
  }
  return flat;
}

BasisLabel LabeledState::label_of(std::size_t flat) const {
  if (flat >= dim()) throw std::out_of_range("flat index out of range");
  BasisLabel label;
  label.indices.resize(factors_.size());
  for (std::size_t i = factors_.size(); i-- > 0;) {
    label.indices[i] = flat % factors_[i].dim;
    flat /= factors_[i].dim;
  }
  return label;
}

std::size_t LabeledState::system_dim() const {
  std::size_t p = 1;
  for (const auto& f : factors_) {
    if (f.kind == FactorKind::system) p *= f.dim;
  }
  return p;
}

std::vector<std::size_t> LabeledState::environment_factors() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].kind == FactorKind::environment) out.push_back(i);
  }
  return out;
}

std::size_t LabeledState::environment_factor(std::size_t segment) const {
  const auto env = environment_factors();
  if (segment >= env.size()) {
    throw std::out_of_range("no environment register for segment " + std::to_string(segment));
  }
  return env[segment];
}

LabeledState LabeledState::with_register(std::string name, std::size_t dim, std::size_t dim_cap) const {
  auto factors = factors_;
  factors.push_back(Factor::environment(std::move(name), dim));
  const std::size_t d = checked_product(dims_of(factors), dim_cap);
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < amps_.size(); ++i) amps(i * static_cast<Eigen::Index>(dim)) = amps_(i);
  return LabeledState(std::move(factors), std::move(amps), dim_cap);
}

LabeledState LabeledState::mark_consumed(std::size_t i) const {
  LabeledState s = *this;
  s.factors_.at(i).consumed = true;
  return s;
}

LabeledState LabeledState::with_amplitudes(CVector amps) const {
  return LabeledState(factors_, std::move(amps), std::numeric_limits<std::size_t>::max());
}

// ---------------------------------------------------------------------------
// Free operations

LabeledState tensor(const LabeledState& a, const LabeledState& b, std::size_t dim_cap) {
  auto factors = a.factors();
  factors.insert(factors.end(), b.factors().begin(), b.factors().end());
  checked_product(dims_of(factors), dim_cap);
  const CVector& x = a.amplitudes();
  const CVector& y = b.amplitudes();
  CVector out(x.size() * y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out.segment(i * y.size(), y.size()) = x(i) * y;
  return LabeledState(std::move(factors), std::move(out), dim_cap);
}

DenseOperator tensor(const DenseOperator& a, const DenseOperator& b, std::size_t dim_cap) {
  checked_product({a.rows(), b.rows()}, dim_cap);
  checked_product({a.cols(), b.cols()}, dim_cap);
  const CMatrix& x = a.matrix();
  const CMatrix& y = b.matrix();
  CMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out.block(r * y.rows(), c * y.cols(), y.rows(), y.cols()) = x(r, c) * y;
    }
  }
  return DenseOperator(std::move(out));
}

LabeledState apply(const LabeledState& state, const DenseOperator& op, std::size_t f, std::size_t dim_cap) {
  const auto& factors = state.factors();
  if (f >= factors.size()) throw std::out_of_range("factor index out of range");
  const std::size_t d = factors[f].dim;
  if (op.cols() != d) {
    throw std::invalid_argument("operator has " + std::to_string(op.cols()) + " columns, factor '" +
                                factors[f].name + "' has dimension " + std::to_string(d));
  }
  auto out_factors = factors;
  out_factors[f].dim = op.rows();
  checked_product(dims_of(out_factors), dim_cap);

  const std::size_t left = product_range(factors, 0, f);
  const std::size_t right = product_range(factors, f + 1, factors.size());
  const auto rows = static_cast<Eigen::Index>(op.rows());
  const auto di = static_cast<Eigen::Index>(d);
  const auto ri = static_cast<Eigen::Index>(right);
  CVector out(static_cast<Eigen::Index>(left) * rows * ri);
  for (std::size_t l = 0; l < left; ++l) {
    const auto li = static_cast<Eigen::Index>(l);
    Eigen::Map<const RowMajorMatrix> in_block(state.amplitudes().data() + li * di * ri, di, ri);
    Eigen::Map<RowMajorMatrix> out_block(out.data() + li * rows * ri, rows, ri);
    out_block.noalias() = op.matrix() * in_block;
  }
  return LabeledState(std::move(out_factors), std::move(out), dim_cap);
}

LabeledState split_factor(const LabeledState& state, std::size_t f, std::vector<Factor> parts) {
  if (f >= state.factor_count()) throw std::out_of_range("factor index out of range");
  std::size_t p = 1;
  for (const auto& part : parts) p *= part.dim;
  if (p != state.factor(f).dim) throw std::invalid_argument("split dimensions do not multiply to factor dimension");
  auto factors = state.factors();
  factors.erase(factors.begin() + static_cast<std::ptrdiff_t>(f));
  factors.insert(factors.begin() + static_cast<std::ptrdiff_t>(f), parts.begin(), parts.end());
  return LabeledState(std::move(factors), state.amplitudes(), std::numeric_limits<std::size_t>::max());
}

LabeledState truncate_factor(const LabeledState& state, std::size_t f, std::size_t keep) {
  if (f >= state.factor_count()) throw std::out_of_range("factor index out of range");
  const std::size_t d = state.factor(f).dim;
  if (keep == 0 || keep > d) throw std::invalid_argument("truncation must keep between 1 and dim indices");
  const auto k = static_cast<Eigen::Index>(keep);
  CMatrix keep_rows = CMatrix::Zero(k, static_cast<Eigen::Index>(d));
  keep_rows.leftCols(k) = CMatrix::Identity(k, k);
  return apply(state, DenseOperator(std::move(keep_rows)), f, std::numeric_limits<std::size_t>::max());
}

CMatrix reduced_system_matrix(const LabeledState& state) {
  const auto& factors = state.factors();
  const std::size_t sys_dim = state.system_dim();
  const std::size_t env_dim = state.dim() / sys_dim;
  // Scatter amplitudes into a (system x environment) matrix, then rho = M M^dagger.
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(sys_dim), static_cast<Eigen::Index>(env_dim));
  std::vector<std::size_t> idx(factors.size(), 0);
  const CVector& amps = state.amplitudes();
  for (Eigen::Index flat = 0; flat < amps.size(); ++flat) {
    std::size_t s = 0;
    std::size_t e = 0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      if (factors[i].kind == FactorKind::system) {
        s = s * factors[i].dim + idx[i];
      } else {
        e = e * factors[i].dim + idx[i];
      }
    }
    m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(e)) = amps(flat);
    for (std::size_t i = factors.size(); i-- > 0;) {
      if (++idx[i] < factors[i].dim) break;
      idx[i] = 0;
    }
  }
  CMatrix rho = m * m.adjoint();
  return 0.5 * (rho + rho.adjoint());
}

DensityMatrix partial_trace_env(const LabeledState& state) {
  if (state.environment_factors().empty()) {
    throw std::invalid_argument("partial_trace_env needs at least one environment register");
  }
  return DensityMatrix(reduced_system_matrix(state));
}

double fidelity(const DensityMatrix& rho, const CVector& target) {
  if (static_cast<std::size_t>(target.size()) != rho.dim()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  if (std::abs(target.squaredNorm() - 1.0) > kTol) {
    throw std::invalid_argument("fidelity: target state is not normalized");
  }
  const double f = (target.adjoint() * rho.matrix() * target)(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const LabeledState& target) {
  if (!target.environment_factors().empty()) {
    throw std::invalid_argument("fidelity: target must be a system-only state");
  }
  return fidelity(rho, target.amplitudes());
}

std::pair<LabeledState, double> project(const LabeledState& state, const DenseOperator& projector, std::size_t f) {
  if (!projector.is_idempotent()) throw NumericalCheckError("projector is not idempotent");
  LabeledState out = apply(state, projector, f, std::numeric_limits<std::size_t>::max());
  const double p = out.norm_squared();
  return {std::move(out), p};
}

std::pair<LabeledState, double> project(const LabeledState& state, const DenseOperator& projector) {
  if (!projector.is_idempotent()) throw NumericalCheckError("projector is not idempotent");
  if (projector.cols() != state.dim()) throw std::invalid_argument("projector dimension mismatch");
  CVector amps = projector.matrix() * state.amplitudes();
  LabeledState out = state.with_amplitudes(std::move(amps));
  const double p = out.norm_squared();
  return {std::move(out), p};
}

}  // namespace efilt
