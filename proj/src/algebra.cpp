#include "equilie/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace equilie {

namespace {

bool all_finite(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

// Discrete generator lists are paired index by index; a rep without a
// discrete part contributes the identity.
int paired_discrete_count(const Rep& a, const Rep& b) {
  if (a.num_discrete() == b.num_discrete()) return a.num_discrete();
  if (a.num_discrete() == 0) return b.num_discrete();
  if (b.num_discrete() == 0) return a.num_discrete();
  throw std::invalid_argument("discrete generator counts differ (" + std::to_string(a.num_discrete()) + " vs " +
                              std::to_string(b.num_discrete()) + ")");
}

void require_same_algebra(const Rep& a, const Rep& b, const char* op) {
  if (!same_algebra(a.algebra(), b.algebra())) {
    throw std::invalid_argument(std::string(op) + ": representations are over different algebras (" +
                                a.algebra()->name() + " vs " + b.algebra()->name() + ")");
  }
}

}  // namespace

LieAlgebra::LieAlgebra(std::string name, int num_generators, std::vector<Complex> constants)
    : name_(std::move(name)), n_(num_generators), constants_(std::move(constants)) {
  if (n_ < 0) throw std::invalid_argument("LieAlgebra: negative generator count");
  const auto expected = static_cast<std::size_t>(n_) * n_ * n_;
  if (constants_.size() != expected) {
    throw std::invalid_argument("LieAlgebra: expected " + std::to_string(expected) + " structure constants, got " +
                                std::to_string(constants_.size()));
  }
  for (const Complex& c : constants_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw std::invalid_argument("LieAlgebra: non-finite structure constant");
    }
  }
}

LieAlgebra LieAlgebra::from_generators(std::string name, std::span<const Matrix> generators) {
  const int n = static_cast<int>(generators.size());
  if (n == 0) return LieAlgebra(std::move(name), 0, {});
  const Eigen::Index d = generators[0].rows();
  Matrix basis(d * d, n);
  for (int i = 0; i < n; ++i) {
    if (generators[i].rows() != d || generators[i].cols() != d) {
      throw std::invalid_argument("from_generators: generator sizes differ");
    }
    basis.col(i) = generators[i].reshaped();
  }
  const Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  if (qr.rank() != n) throw std::invalid_argument("from_generators: generators are linearly dependent");

  std::vector<Complex> constants(static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Matrix comm = generators[i] * generators[j] - generators[j] * generators[i];
      const Vector rhs = comm.reshaped();
      const Vector coeff = qr.solve(rhs);
      if ((basis * coeff - rhs).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("from_generators: generators do not close under commutation");
      }
      for (int k = 0; k < n; ++k) {
        Complex c = coeff(k);
        // Exact zeros keep structure-constant comparisons clean.
        if (std::abs(c.real()) < 1e-14) c.real(0.0);
        if (std::abs(c.imag()) < 1e-14) c.imag(0.0);
        constants[(static_cast<std::size_t>(i) * n + j) * n + k] = c;
      }
    }
  }
  return LieAlgebra(std::move(name), n, std::move(constants));
}

LieAlgebra LieAlgebra::direct_sum(const LieAlgebra& a, const LieAlgebra& b) {
  const int na = a.num_generators();
  const int nb = b.num_generators();
  const int n = na + nb;
  std::vector<Complex> c(static_cast<std::size_t>(n) * n * n, Complex(0.0));
  auto at = [n](int i, int j, int k) { return (static_cast<std::size_t>(i) * n + j) * n + k; };
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j)
      for (int k = 0; k < na; ++k) c[at(i, j, k)] = a.constant(i, j, k);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < nb; ++k) c[at(na + i, na + j, na + k)] = b.constant(i, j, k);
  return LieAlgebra(a.name() + "x" + b.name(), n, std::move(c));
}

double LieAlgebra::antisymmetry_residual() const {
  double worst = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) worst = std::max(worst, std::abs(constant(i, j, k) + constant(j, i, k)));
  return worst;
}

double LieAlgebra::jacobi_residual() const {
  double worst = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          Complex s = 0.0;
          for (int m = 0; m < n_; ++m) {
            s += constant(i, j, m) * constant(m, k, l) + constant(j, k, m) * constant(m, i, l) +
                 constant(k, i, m) * constant(m, j, l);
          }
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

bool LieAlgebra::has_real_constants(double tol) const {
  return std::all_of(constants_.begin(), constants_.end(), [tol](const Complex& c) { return std::abs(c.imag()) <= tol; });
}

bool LieAlgebra::same_structure(const LieAlgebra& other, double tol) const {
  if (n_ != other.n_) return false;
  for (std::size_t i = 0; i < constants_.size(); ++i) {
    if (std::abs(constants_[i] - other.constants_[i]) > tol) return false;
  }
  return true;
}

bool same_algebra(const AlgebraPtr& a, const AlgebraPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->same_structure(*b);
}

Rep::Rep(AlgebraPtr algebra, std::vector<Matrix> infinitesimal, std::vector<Matrix> discrete)
    : algebra_(std::move(algebra)), dim_(0), infinitesimal_(std::move(infinitesimal)), discrete_(std::move(discrete)) {
  if (!algebra_) throw std::invalid_argument("Rep: null algebra");
  if (static_cast<int>(infinitesimal_.size()) != algebra_->num_generators()) {
    throw std::invalid_argument("Rep: algebra " + algebra_->name() + " has " +
                                std::to_string(algebra_->num_generators()) + " generators but " +
                                std::to_string(infinitesimal_.size()) + " matrices were given");
  }
  int d = -1;
  auto check = [&d](const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string("Rep: non-square ") + what + " matrix");
    if (d < 0) d = static_cast<int>(m.rows());
    if (m.rows() != d) throw std::invalid_argument(std::string("Rep: ") + what + " matrix dimension mismatch");
    if (!all_finite(m)) throw std::invalid_argument(std::string("Rep: non-finite ") + what + " matrix");
  };
  for (const Matrix& m : infinitesimal_) check(m, "infinitesimal");
  for (const Matrix& m : discrete_) check(m, "discrete");
  if (d <= 0) throw std::invalid_argument("Rep: dimension must be positive (give at least one generator matrix)");
  dim_ = d;
}

Matrix Rep::discrete_or_identity(int h) const {
  if (h >= 0 && h < num_discrete()) return discrete_[h];
  return Matrix::Identity(dim_, dim_);
}

ValidationReport validate_rep(const Rep& rep, double tol) {
  ValidationReport report;
  report.tolerance = tol;
  const auto& gens = rep.infinitesimal();
  const LieAlgebra& alg = *rep.algebra();
  const int n = alg.num_generators();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Matrix residual = gens[i] * gens[j] - gens[j] * gens[i];
      for (int k = 0; k < n; ++k) {
        const Complex a = alg.constant(i, j, k);
        if (a != Complex(0.0)) residual -= a * gens[k];
      }
      const double r = max_abs(residual);
      if (report.worst_i < 0 || r > report.max_residual) {
        report.max_residual = r;
        report.worst_i = i;
        report.worst_j = j;
      }
    }
  }
  report.min_abs_det = 1.0;
  for (const Matrix& h : rep.discrete()) {
    report.min_abs_det = std::min(report.min_abs_det, std::abs(h.determinant()));
  }
  report.pass = report.max_residual < tol && report.min_abs_det > 1e-12;
  return report;
}

Matrix matrix_exponential(const Matrix& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("matrix_exponential: matrix is not square");
  if (!all_finite(x)) throw std::invalid_argument("matrix_exponential: non-finite entries");
  const Eigen::Index n = x.rows();
  if (n == 0) return x;

  // Scale so that the 1-norm is at most 1/2, sum a degree-18 Taylor series,
  // then square back. Truncation error is below 2^-19 / 19! relative.
  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix scaled = x / std::ldexp(1.0, squarings);

  constexpr int kDegree = 18;
  Matrix result = Matrix::Identity(n, n);
  // Horner: I + X(I + X/2(I + X/3(...)))
  for (int k = kDegree; k >= 1; --k) {
    result = Matrix::Identity(n, n) + (scaled * result) / static_cast<double>(k);
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Matrix group_action(const Rep& rep, const GroupSample& sample) {
  const auto& gens = rep.infinitesimal();
  if (sample.coefficients.size() != gens.size()) {
    throw std::invalid_argument("group_action: coefficient count does not match generator count");
  }
  Matrix x = Matrix::Zero(rep.dim(), rep.dim());
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (sample.coefficients[i] != 0.0) x += sample.coefficients[i] * gens[i];
  }
  Matrix g = matrix_exponential(x);
  if (sample.discrete_index >= 0 && sample.discrete_index < rep.num_discrete()) {
    g = g * rep.discrete()[sample.discrete_index];
  }
  return g;
}

GroupSample sample_group_parameters(int num_generators, int num_discrete, std::uint64_t seed, double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw std::invalid_argument("sample_group_parameters: bad scale");
  std::mt19937_64 rng(seed);
  GroupSample s;
  s.coefficients.resize(num_generators);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (double& a : s.coefficients) a = scale * uni(rng);
  if (num_discrete > 0) {
    std::uniform_int_distribution<int> pick(-1, num_discrete - 1);
    s.discrete_index = pick(rng);
  }
  return s;
}

GroupElement sample_group_element(const Rep& rep, std::uint64_t seed, double scale) {
  GroupElement g;
  g.provenance = sample_group_parameters(rep.algebra()->num_generators(), rep.num_discrete(), seed, scale);
  g.matrix = group_action(rep, g.provenance);
  return g;
}

Rep trivial_rep(const AlgebraPtr& algebra, int num_discrete) {
  std::vector<Matrix> gens(algebra->num_generators(), Matrix::Zero(1, 1));
  std::vector<Matrix> disc(num_discrete, Matrix::Identity(1, 1));
  return Rep(algebra, std::move(gens), std::move(disc));
}

bool is_trivial(const Rep& rep, double tol) {
  if (rep.dim() != 1) return false;
  for (const Matrix& m : rep.infinitesimal())
    if (std::abs(m(0, 0)) > tol) return false;
  for (const Matrix& m : rep.discrete())
    if (std::abs(m(0, 0) - Complex(1.0)) > tol) return false;
  return true;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron_sum(const Matrix& a, const Matrix& b) {
  return kron(a, Matrix::Identity(b.rows(), b.cols())) + kron(Matrix::Identity(a.rows(), a.cols()), b);
}

Rep tensor_product(const Rep& a, const Rep& b) {
  require_same_algebra(a, b, "tensor_product");
  std::vector<Matrix> gens;
  gens.reserve(a.infinitesimal().size());
  for (std::size_t i = 0; i < a.infinitesimal().size(); ++i) {
    gens.push_back(kron_sum(a.infinitesimal()[i], b.infinitesimal()[i]));
  }
  const int nd = paired_discrete_count(a, b);
  std::vector<Matrix> disc;
  for (int h = 0; h < nd; ++h) disc.push_back(kron(a.discrete_or_identity(h), b.discrete_or_identity(h)));
  return Rep(a.algebra(), std::move(gens), std::move(disc));
}

Rep direct_sum(const Rep& a, const Rep& b) {
  require_same_algebra(a, b, "direct_sum");
  std::vector<Matrix> gens;
  for (std::size_t i = 0; i < a.infinitesimal().size(); ++i) {
    gens.push_back(block_diag(a.infinitesimal()[i], b.infinitesimal()[i]));
  }
  const int nd = paired_discrete_count(a, b);
  std::vector<Matrix> disc;
  for (int h = 0; h < nd; ++h) disc.push_back(block_diag(a.discrete_or_identity(h), b.discrete_or_identity(h)));
  return Rep(a.algebra(), std::move(gens), std::move(disc));
}

Rep direct_sum(std::span<const Rep> reps) {
  if (reps.empty()) throw std::invalid_argument("direct_sum: empty list");
  Rep acc = reps[0];
  for (std::size_t i = 1; i < reps.size(); ++i) acc = direct_sum(acc, reps[i]);
  return acc;
}

Rep conjugate_rep(const Rep& rep) {
  if (!rep.algebra()->has_real_constants()) {
    throw std::invalid_argument("conjugate_rep: structure constants are not real");
  }
  std::vector<Matrix> gens;
  for (const Matrix& m : rep.infinitesimal()) gens.push_back(m.conjugate());
  std::vector<Matrix> disc;
  for (const Matrix& m : rep.discrete()) disc.push_back(m.conjugate());
  return Rep(rep.algebra(), std::move(gens), std::move(disc));
}

Rep conjugate_by(const Rep& rep, const Matrix& basis_change) {
  if (basis_change.rows() != rep.dim() || basis_change.cols() != rep.dim()) {
    throw std::invalid_argument("conjugate_by: basis change has the wrong size");
  }
  const Eigen::PartialPivLU<Matrix> lu(basis_change);
  const Matrix inv = lu.inverse();
  std::vector<Matrix> gens;
  for (const Matrix& m : rep.infinitesimal()) gens.push_back(basis_change * m * inv);
  std::vector<Matrix> disc;
  for (const Matrix& m : rep.discrete()) disc.push_back(basis_change * m * inv);
  return Rep(rep.algebra(), std::move(gens), std::move(disc));
}

Rep product_group_rep(const Rep& a, const Rep& b) {
  auto algebra = std::make_shared<const LieAlgebra>(LieAlgebra::direct_sum(*a.algebra(), *b.algebra()));
  const Matrix ia = Matrix::Identity(a.dim(), a.dim());
  const Matrix ib = Matrix::Identity(b.dim(), b.dim());
  std::vector<Matrix> gens;
  for (const Matrix& m : a.infinitesimal()) gens.push_back(kron(m, ib));
  for (const Matrix& m : b.infinitesimal()) gens.push_back(kron(ia, m));
  std::vector<Matrix> disc;
  for (const Matrix& m : a.discrete()) disc.push_back(kron(m, ib));
  for (const Matrix& m : b.discrete()) disc.push_back(kron(ia, m));
  return Rep(std::move(algebra), std::move(gens), std::move(disc));
}

}  // namespace equilie
