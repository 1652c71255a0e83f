#include "equilie/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>
#include <Eigen/Sparse>

namespace equilie {

namespace {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<Complex>;

constexpr double kNullTol = 1e-8;      // relative singular-value threshold
constexpr double kWeightTol = 1e-8;    // equality of diagonal generator entries
constexpr double kZeroEntry = 1e-13;   // canonical coefficients below this are zeroed

// Action of the algebra (and discrete generators) on the input space of a coupling.
struct InputAction {
  int dim = 0;
  std::vector<SparseMatrix> generators;
  std::vector<SparseMatrix> discrete;
};

SparseMatrix to_sparse(const Matrix& m) {
  std::vector<Triplet> t;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != Complex(0.0)) t.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
  SparseMatrix s(m.rows(), m.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SparseMatrix sparse_identity(int n) {
  SparseMatrix s(n, n);
  s.setIdentity();
  return s;
}

SparseMatrix sparse_kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ja = 0; ja < a.outerSize(); ++ja)
    for (SparseMatrix::InnerIterator ia(a, ja); ia; ++ia)
      for (int jb = 0; jb < b.outerSize(); ++jb)
        for (SparseMatrix::InnerIterator ib(b, jb); ib; ++ib)
          t.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()), static_cast<int>(ja * b.cols() + jb),
                         ia.value() * ib.value());
  SparseMatrix s(a.rows() * b.rows(), a.cols() * b.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

int discrete_count(std::span<const Rep* const> reps) {
  int count = 0;
  for (const Rep* r : reps) {
    if (r->num_discrete() == 0) continue;
    if (count != 0 && r->num_discrete() != count)
      throw std::invalid_argument("coupling: discrete generator counts differ between reps");
    count = r->num_discrete();
  }
  return count;
}

void check_algebras(std::span<const Rep* const> reps) {
  for (const Rep* r : reps) {
    if (!same_algebra(reps.front()->algebra(), r->algebra()))
      throw std::invalid_argument("coupling: representations are over different algebras (" +
                                  reps.front()->algebra()->name() + " vs " + r->algebra()->name() + ")");
  }
}

class TupleIndex {
 public:
  explicit TupleIndex(const std::vector<Tuple>& tuples) {
    for (std::size_t i = 0; i < tuples.size(); ++i) index_.emplace(tuples[i], static_cast<int>(i));
  }
  int operator()(const Tuple& t) const { return index_.at(t); }

 private:
  std::map<Tuple, int> index_;
};

SparseMatrix sym_generator_sparse(const Matrix& x, const std::vector<Tuple>& tuples, const TupleIndex& index) {
  std::vector<Triplet> t;
  const int n = tuples.empty() ? 0 : static_cast<int>(tuples.front().size());
  for (std::size_t row = 0; row < tuples.size(); ++row) {
    const Tuple& k = tuples[row];
    for (int s = 0; s < n; ++s) {
      for (Eigen::Index w = 0; w < x.cols(); ++w) {
        const Complex v = x(k[s], w);
        if (v == Complex(0.0)) continue;
        Tuple kp = k;
        kp[s] = static_cast<int>(w);
        std::sort(kp.begin(), kp.end());
        t.emplace_back(static_cast<int>(row), index(kp), v);
      }
    }
  }
  SparseMatrix s(static_cast<Eigen::Index>(tuples.size()), static_cast<Eigen::Index>(tuples.size()));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

// ρ̄(g)_{k,k'} = Σ_{distinct permutations k'' of k'} Π_t g_{k_t, k''_t}, restricted to
// non-decreasing k. Enumerates the non-zero rows of g column by column.
SparseMatrix sym_action_sparse(const Matrix& g, const std::vector<Tuple>& tuples, const TupleIndex& index) {
  std::vector<std::vector<std::pair<int, Complex>>> col_nz(g.cols());
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      if (g(i, j) != Complex(0.0)) col_nz[j].emplace_back(static_cast<int>(i), g(i, j));

  std::vector<Triplet> t;
  for (std::size_t col = 0; col < tuples.size(); ++col) {
    Tuple perm = tuples[col];
    const int n = static_cast<int>(perm.size());
    Tuple k(n);
    do {
      // depth-first over rows with k non-decreasing
      auto dfs = [&](auto&& self, int pos, Complex acc) -> void {
        if (pos == n) {
          t.emplace_back(index(k), static_cast<int>(col), acc);
          return;
        }
        for (const auto& [row, v] : col_nz[perm[pos]]) {
          if (pos > 0 && row < k[pos - 1]) continue;
          k[pos] = row;
          self(self, pos + 1, acc * v);
        }
      };
      dfs(dfs, 0, Complex(1.0));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  SparseMatrix s(static_cast<Eigen::Index>(tuples.size()), static_cast<Eigen::Index>(tuples.size()));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

bool is_diagonal(const SparseMatrix& m) {
  for (int j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      if (it.row() != j && it.value() != Complex(0.0)) return false;
  return true;
}

bool is_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != Complex(0.0)) return false;
  return true;
}

// Stacks constraint rows and keeps only the triangular factor of their QR
// decomposition, so memory stays at (unknowns)^2.
class RowCompressor {
 public:
  explicit RowCompressor(int cols) : cols_(cols), block_rows_(std::max(cols, 64)) {
    buffer_ = Matrix::Zero(block_rows_, cols_);
  }

  void add_row(const std::vector<std::pair<int, Complex>>& row) {
    if (row.empty()) return;
    for (const auto& [c, v] : row) buffer_(filled_, c) += v;
    if (++filled_ == block_rows_) flush();
  }

  Matrix finish() {
    flush();
    if (r_.size() == 0) return Matrix::Zero(cols_, cols_);
    return r_;
  }

 private:
  void flush() {
    if (filled_ == 0) return;
    Matrix stacked(r_.rows() + filled_, cols_);
    if (r_.rows() > 0) stacked.topRows(r_.rows()) = r_;
    stacked.bottomRows(filled_) = buffer_.topRows(filled_);
    if (stacked.rows() <= cols_) {
      r_ = stacked;
    } else {
      Eigen::HouseholderQR<Matrix> qr(stacked);
      r_ = qr.matrixQR().topRows(cols_).triangularView<Eigen::Upper>();
    }
    buffer_.setZero();
    filled_ = 0;
  }

  int cols_;
  int block_rows_;
  int filled_ = 0;
  Matrix buffer_;
  Matrix r_;
};

// Canonical orthonormal basis of the column span of `basis`: reduced row
// echelon form of the transposed basis, Gram-Schmidt in pivot order, then the
// first significant entry of each vector is made real and positive.
std::vector<Vector> canonicalize(Matrix basis) {
  const Eigen::Index rank = basis.cols();
  const Eigen::Index len = basis.rows();
  Matrix rows = basis.transpose();
  Eigen::Index pivot_row = 0;
  for (Eigen::Index col = 0; col < len && pivot_row < rank; ++col) {
    Eigen::Index best = pivot_row;
    double best_abs = 0.0;
    for (Eigen::Index r = pivot_row; r < rank; ++r) {
      const double a = std::abs(rows(r, col));
      if (a > best_abs) {
        best_abs = a;
        best = r;
      }
    }
    if (best_abs < kNullTol) continue;
    rows.row(pivot_row).swap(rows.row(best));
    rows.row(pivot_row) /= rows(pivot_row, col);
    for (Eigen::Index r = 0; r < rank; ++r) {
      if (r == pivot_row) continue;
      const Complex f = rows(r, col);
      if (f != Complex(0.0)) rows.row(r) -= f * rows.row(pivot_row);
    }
    ++pivot_row;
  }

  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(pivot_row));
  for (Eigen::Index r = 0; r < pivot_row; ++r) {
    Vector v = rows.row(r).transpose();
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& q : out) v -= q.dot(v) * q;
    v.normalize();
    const double vmax = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > kNullTol * vmax) {
        v *= std::conj(v(i)) / std::abs(v(i));
        break;
      }
    }
    out.push_back(v);
  }
  for (Vector& v : out) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      double re = v(i).real(), im = v(i).imag();
      if (std::abs(re) < kZeroEntry) re = 0.0;
      if (std::abs(im) < kZeroEntry) im = 0.0;
      v(i) = Complex(re + 0.0, im + 0.0);
    }
  }
  return out;
}

// Orthonormal basis (as columns) of the null space of the intertwiner
// equations C T = R C over unknowns u = K * m + c.
Matrix null_space(const InputAction& in, const Rep& out) {
  const int m = in.dim;
  const int d = out.dim();
  const long long total = static_cast<long long>(m) * d;

  // Generators diagonal on both sides force C_{K,c} = 0 unless the weights agree.
  std::vector<bool> diag_gen(in.generators.size(), false);
  std::vector<int> keep_index(static_cast<std::size_t>(total), 0);
  for (std::size_t i = 0; i < in.generators.size(); ++i) {
    diag_gen[i] = is_diagonal(in.generators[i]) && is_diagonal(out.infinitesimal()[i]);
    if (!diag_gen[i]) continue;
    const Vector tin = Matrix(in.generators[i]).diagonal();
    const Matrix& r = out.infinitesimal()[i];
    for (int k = 0; k < d; ++k)
      for (int c = 0; c < m; ++c)
        if (std::abs(tin(c) - r(k, k)) > kWeightTol) keep_index[static_cast<std::size_t>(k) * m + c] = -1;
  }
  int kept = 0;
  for (int& idx : keep_index)
    if (idx == 0) idx = kept++;
  if (kept == 0) return Matrix::Zero(total, 0);

  RowCompressor comp(kept);
  std::vector<std::pair<int, Complex>> row;
  auto add_constraints = [&](const SparseMatrix& t, const Matrix& r) {
    for (int k = 0; k < d; ++k) {
      for (int c = 0; c < m; ++c) {
        row.clear();
        for (SparseMatrix::InnerIterator it(t, c); it; ++it) {
          const int u = keep_index[static_cast<std::size_t>(k) * m + it.row()];
          if (u >= 0) row.emplace_back(u, it.value());
        }
        for (int kp = 0; kp < d; ++kp) {
          if (r(k, kp) == Complex(0.0)) continue;
          const int u = keep_index[static_cast<std::size_t>(kp) * m + c];
          if (u >= 0) row.emplace_back(u, -r(k, kp));
        }
        comp.add_row(row);
      }
    }
  };
  for (std::size_t i = 0; i < in.generators.size(); ++i)
    if (!diag_gen[i]) add_constraints(in.generators[i], out.infinitesimal()[i]);
  const int ndisc = std::max<int>(static_cast<int>(in.discrete.size()), out.num_discrete());
  for (int h = 0; h < ndisc; ++h) {
    const SparseMatrix t = h < static_cast<int>(in.discrete.size()) ? in.discrete[h] : sparse_identity(m);
    add_constraints(t, out.discrete_or_identity(h));
  }

  const Matrix r = comp.finish();
  Eigen::BDCSVD<Matrix> svd(r, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kNullTol * smax) ++rank;
  const int nullity = kept - rank;
  const Matrix v_null = svd.matrixV().rightCols(nullity);

  Matrix full = Matrix::Zero(total, nullity);
  for (long long u = 0; u < total; ++u) {
    const int idx = keep_index[static_cast<std::size_t>(u)];
    if (idx >= 0) full.row(u) = v_null.row(idx);
  }
  return full;
}

std::vector<Matrix> reshape_solutions(const std::vector<Vector>& vecs, int d, int m) {
  std::vector<Matrix> out;
  out.reserve(vecs.size());
  for (const Vector& v : vecs) {
    Matrix c(d, m);
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < m; ++j) c(k, j) = v(static_cast<Eigen::Index>(k) * m + j);
    out.push_back(std::move(c));
  }
  return out;
}

Vector flatten(const Matrix& c) {
  Vector v(c.size());
  for (Eigen::Index k = 0; k < c.rows(); ++k)
    for (Eigen::Index j = 0; j < c.cols(); ++j) v(k * c.cols() + j) = c(k, j);
  return v;
}

// Orthonormal basis of the span of the given columns. The columns are built
// from unit-norm couplings, so the rank threshold is absolute: when the true
// span is empty every column is round-off.
Matrix column_span(const Matrix& cols) {
  if (cols.cols() == 0) return cols;
  Eigen::BDCSVD<Matrix> svd(cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kNullTol * std::max(sv(0), 1.0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

InputAction symmetric_action(const Rep& rep, int order, const std::vector<Tuple>& tuples) {
  const TupleIndex index(tuples);
  InputAction in;
  in.dim = static_cast<int>(tuples.size());
  for (const Matrix& x : rep.infinitesimal()) in.generators.push_back(sym_generator_sparse(x, tuples, index));
  for (const Matrix& h : rep.discrete()) in.discrete.push_back(sym_action_sparse(h, tuples, index));
  (void)order;
  return in;
}

CouplingTensor symmetric_direct(const Rep& rep, int order, const Rep& rep_out, std::vector<Tuple> tuples) {
  const InputAction in = symmetric_action(rep, order, tuples);
  CouplingTensor ct;
  ct.order = order;
  ct.symmetric = true;
  ct.solutions = reshape_solutions(canonicalize(null_space(in, rep_out)), rep_out.dim(), in.dim);
  ct.tuples = std::move(tuples);
  return ct;
}

// Recursive construction: every intertwiner Sym^n V -> K factors through
// Sym^{n-1} V ⊗ V -> (⊕ L) ⊗ V -> K. Returns nothing when the candidate
// irreps do not exhaust Sym^{n-1} V.
class TreeBuilder {
 public:
  TreeBuilder(const Rep& rep, const std::vector<IrrepLabel>& candidates) : rep_(rep), candidates_(candidates) {
    for (const IrrepLabel& l : candidates_) irreps_.emplace(l, irrep(l));
  }

  std::optional<std::vector<Matrix>> build(int order, const Rep& out) {
    const std::vector<Tuple> tuples = ordered_tuples(rep_.dim(), order);
    if (order == 1) return direct(order, out, tuples);

    const long long lower_dim = symmetric_power_dim(rep_.dim(), order - 1);
    long long covered = 0;
    std::vector<std::pair<const IrrepLabel*, const std::vector<Matrix>*>> lower;
    for (const IrrepLabel& l : candidates_) {
      const std::vector<Matrix>& d = level(order - 1, l);
      covered += static_cast<long long>(d.size()) * dimension(l);
      if (!d.empty()) lower.emplace_back(&l, &d);
    }
    if (covered != lower_dim) return std::nullopt;

    const std::vector<Tuple> lower_tuples = ordered_tuples(rep_.dim(), order - 1);
    const TupleIndex lower_index(lower_tuples);
    const int v = rep_.dim();
    const int dk = out.dim();
    std::vector<Vector> cands;
    for (const auto& [label, dsols] : lower) {
      const Rep& lrep = irreps_.at(*label);
      const CouplingTensor e = clebsch_gordan(lrep, rep_, out);
      for (const Matrix& dmat : *dsols) {
        for (const Matrix& emat : e.solutions) {
          // C_{K,k} = Σ_{distinct v in k} Σ_l E_{K; l,v} D_{l; k without one v}
          Matrix c = Matrix::Zero(dk, static_cast<Eigen::Index>(tuples.size()));
          for (std::size_t col = 0; col < tuples.size(); ++col) {
            const Tuple& k = tuples[col];
            for (int s = 0; s < order; ++s) {
              if (s > 0 && k[s] == k[s - 1]) continue;
              Tuple rest;
              rest.reserve(order - 1);
              for (int t = 0; t < order; ++t)
                if (t != s) rest.push_back(k[t]);
              const int rc = lower_index(rest);
              for (Eigen::Index l = 0; l < dmat.rows(); ++l) {
                const Complex dv = dmat(l, rc);
                if (dv == Complex(0.0)) continue;
                c.col(col) += dv * emat.col(l * v + k[s]);
              }
            }
          }
          cands.push_back(flatten(c));
        }
      }
    }
    Matrix stack(static_cast<Eigen::Index>(dk) * static_cast<Eigen::Index>(tuples.size()),
                 static_cast<Eigen::Index>(cands.size()));
    for (std::size_t i = 0; i < cands.size(); ++i) stack.col(static_cast<Eigen::Index>(i)) = cands[i];
    return reshape_solutions(canonicalize(column_span(stack)), dk, static_cast<int>(tuples.size()));
  }

 private:
  std::vector<Matrix> direct(int order, const Rep& out, const std::vector<Tuple>& tuples) {
    return symmetric_direct(rep_, order, out, tuples).solutions;
  }

  const std::vector<Matrix>& level(int order, const IrrepLabel& label) {
    auto key = std::make_pair(order, label);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const Rep& out = irreps_.at(label);
    std::optional<std::vector<Matrix>> sols = build(order, out);
    if (!sols) sols = direct(order, out, ordered_tuples(rep_.dim(), order));
    return memo_.emplace(key, std::move(*sols)).first->second;
  }

  const Rep& rep_;
  const std::vector<IrrepLabel>& candidates_;
  std::map<IrrepLabel, Rep> irreps_;
  std::map<std::pair<int, IrrepLabel>, std::vector<Matrix>> memo_;
};

}  // namespace

std::vector<CouplingTensor::Entry> CouplingTensor::entries() const {
  std::vector<Entry> out;
  if (solutions.empty()) return out;
  const int rows = static_cast<int>(solutions.front().rows());
  for (std::size_t col = 0; col < tuples.size(); ++col)
    for (int k = 0; k < rows; ++k)
      for (int a = 0; a < multiplicity(); ++a) {
        const Complex v = solutions[a](k, static_cast<Eigen::Index>(col));
        if (v != Complex(0.0)) out.push_back({tuples[col], k, a, v});
      }
  return out;
}

std::vector<Tuple> ordered_tuples(int dim, int n) {
  if (dim < 0 || n < 0) throw std::invalid_argument("ordered_tuples: negative argument");
  std::vector<Tuple> out;
  if (n == 0) {
    out.emplace_back();
    return out;
  }
  if (dim == 0) return out;
  Tuple t(n, 0);
  while (true) {
    out.push_back(t);
    int pos = n - 1;
    while (pos >= 0 && t[pos] == dim - 1) --pos;
    if (pos < 0) break;
    ++t[pos];
    for (int q = pos + 1; q < n; ++q) t[q] = t[pos];
  }
  return out;
}

long long orbit_size(const Tuple& t) {
  Tuple s = t;
  std::sort(s.begin(), s.end());
  // n! / Π multiplicity!, accumulated so every intermediate value is an integer
  long long result = 1;
  long long run = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    run = (i > 0 && s[i] == s[i - 1]) ? run + 1 : 1;
    result = result * static_cast<long long>(i + 1) / run;
  }
  return result;
}

long long symmetric_power_dim(int dim, int n) {
  if (dim < 0 || n < 0) throw std::invalid_argument("symmetric_power_dim: negative argument");
  if (dim == 0) return n == 0 ? 1 : 0;
  unsigned __int128 c = 1;
  for (int i = 1; i <= n; ++i) {
    c = c * static_cast<unsigned>(dim + i - 1) / static_cast<unsigned>(i);
    if (c > static_cast<unsigned __int128>(std::numeric_limits<long long>::max()))
      return std::numeric_limits<long long>::max();
  }
  return static_cast<long long>(c);
}

Matrix symmetric_power_action(const Matrix& g, int n) {
  const auto tuples = ordered_tuples(static_cast<int>(g.rows()), n);
  return Matrix(sym_action_sparse(g, tuples, TupleIndex(tuples)));
}

Matrix symmetric_power_generator(const Matrix& x, int n) {
  const auto tuples = ordered_tuples(static_cast<int>(x.rows()), n);
  return Matrix(sym_generator_sparse(x, tuples, TupleIndex(tuples)));
}

CouplingTensor intertwiners(std::span<const Rep> inputs, const Rep& output) {
  if (inputs.empty()) throw std::invalid_argument("intertwiners: no inputs");
  std::vector<const Rep*> all;
  for (const Rep& r : inputs) all.push_back(&r);
  all.push_back(&output);
  check_algebras(all);
  const int ndisc = discrete_count(all);

  long long dim = 1;
  for (const Rep& r : inputs) dim *= r.dim();
  if (dim > 20000) throw ResourceLimitError("intertwiners: input dimension " + std::to_string(dim) + " exceeds 20000");

  InputAction in;
  in.dim = static_cast<int>(dim);
  const int ngen = output.algebra()->num_generators();
  for (int g = 0; g < ngen; ++g) {
    SparseMatrix acc;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      SparseMatrix term = to_sparse(inputs[t].infinitesimal()[g]);
      SparseMatrix left = sparse_identity(1);
      for (std::size_t s = 0; s < t; ++s) left = sparse_kron(left, sparse_identity(inputs[s].dim()));
      SparseMatrix right = sparse_identity(1);
      for (std::size_t s = t + 1; s < inputs.size(); ++s) right = sparse_kron(right, sparse_identity(inputs[s].dim()));
      term = sparse_kron(sparse_kron(left, term), right);
      acc = t == 0 ? term : SparseMatrix(acc + term);
    }
    in.generators.push_back(acc);
  }
  for (int h = 0; h < ndisc; ++h) {
    SparseMatrix acc = sparse_identity(1);
    for (const Rep& r : inputs) acc = sparse_kron(acc, to_sparse(r.discrete_or_identity(h)));
    in.discrete.push_back(acc);
  }

  CouplingTensor ct;
  for (const Rep& r : inputs) ct.inputs.push_back(std::make_shared<Rep>(r));
  ct.output = std::make_shared<Rep>(output);
  ct.order = static_cast<int>(inputs.size());
  ct.symmetric = false;
  std::vector<int> dims;
  for (const Rep& r : inputs) dims.push_back(r.dim());
  Tuple t(inputs.size(), 0);
  for (long long i = 0; i < dim; ++i) {
    ct.tuples.push_back(t);
    for (int p = static_cast<int>(t.size()) - 1; p >= 0; --p) {
      if (++t[p] < dims[p]) break;
      t[p] = 0;
    }
  }
  ct.solutions = reshape_solutions(canonicalize(null_space(in, output)), output.dim(), in.dim);
  return ct;
}

CouplingTensor clebsch_gordan(const Rep& rep1, const Rep& rep2, const Rep& rep_out) {
  const Rep ins[] = {rep1, rep2};
  return intertwiners(ins, rep_out);
}

int SelectionRule::total_dimension() const {
  int total = 0;
  for (const auto& [label, mult] : terms) total += mult * dimension(label);
  return total;
}

SelectionRule selection_rule(const Rep& rep1, const Rep& rep2, std::span<const IrrepLabel> candidates) {
  std::vector<IrrepLabel> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  SelectionRule rule;
  for (const IrrepLabel& l : sorted) {
    const int mult = clebsch_gordan(rep1, rep2, irrep(l)).multiplicity();
    if (mult > 0) rule.terms.emplace_back(l, mult);
  }
  return rule;
}

CouplingTensor symmetric_coupling(const Rep& rep, int order, const Rep& rep_out,
                                  const SymmetricCouplingOptions& options, CouplingMethod* method_used) {
  if (order < 1) throw std::invalid_argument("symmetric_coupling: order must be at least 1");
  const Rep* all[] = {&rep, &rep_out};
  check_algebras(all);
  discrete_count(all);
  const long long sdim = symmetric_power_dim(rep.dim(), order);
  if (sdim > options.cap)
    throw ResourceLimitError("symmetric_coupling: dim Sym^" + std::to_string(order) + " = " + std::to_string(sdim) +
                             " exceeds cap " + std::to_string(options.cap));

  CouplingTensor ct;
  std::optional<std::vector<Matrix>> tree;
  if (order >= 2 && !options.intermediate_candidates.empty()) {
    TreeBuilder builder(rep, options.intermediate_candidates);
    tree = builder.build(order, rep_out);
  }
  if (tree) {
    ct.order = order;
    ct.symmetric = true;
    ct.tuples = ordered_tuples(rep.dim(), order);
    ct.solutions = std::move(*tree);
    if (method_used) *method_used = CouplingMethod::Tree;
  } else {
    ct = symmetric_direct(rep, order, rep_out, ordered_tuples(rep.dim(), order));
    if (method_used) *method_used = CouplingMethod::Direct;
  }
  auto shared = std::make_shared<Rep>(rep);
  ct.inputs.assign(order, shared);
  ct.output = std::make_shared<Rep>(rep_out);
  if (!options.input_label.empty()) ct.input_labels.assign(order, options.input_label);
  ct.output_label = options.output_label;
  return ct;
}

std::vector<Matrix> expand_symmetric(const CouplingTensor& coupling) {
  if (!coupling.symmetric) throw std::invalid_argument("expand_symmetric: coupling is not symmetric");
  const int n = coupling.order;
  const int dim = coupling.inputs.empty() ? 0 : coupling.inputs.front()->dim();
  long long full = 1;
  for (int i = 0; i < n; ++i) full *= dim;
  const TupleIndex index(coupling.tuples);
  std::vector<Matrix> out;
  for (const Matrix& c : coupling.solutions) {
    Matrix b(c.rows(), full);
    Tuple k(n, 0);
    for (long long col = 0; col < full; ++col) {
      Tuple s = k;
      std::sort(s.begin(), s.end());
      b.col(col) = c.col(index(s)) / static_cast<double>(orbit_size(s));
      for (int p = n - 1; p >= 0; --p) {
        if (++k[p] < dim) break;
        k[p] = 0;
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

double intertwiner_residual(const CouplingTensor& coupling, const GroupSample& sample) {
  if (coupling.multiplicity() == 0) return 0.0;
  Matrix gin;
  if (coupling.symmetric) {
    gin = symmetric_power_action(group_action(*coupling.inputs.front(), sample), coupling.order);
  } else {
    gin = Matrix::Identity(1, 1);
    for (const RepPtr& r : coupling.inputs) gin = kron(gin, group_action(*r, sample));
  }
  const Matrix gout = group_action(*coupling.output, sample);
  double worst = 0.0;
  for (const Matrix& c : coupling.solutions) worst = std::max(worst, max_abs(c * gin - gout * c));
  return worst;
}

Decomposition decompose_rep(const Rep& rep, std::span<const IrrepLabel> candidates) {
  std::vector<IrrepLabel> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  Decomposition dec;
  std::vector<Matrix> rows;
  int offset = 0;
  for (const IrrepLabel& l : sorted) {
    const Rep target = irrep(l);
    const Rep ins[] = {rep};
    const CouplingTensor ct = intertwiners(ins, target);
    if (ct.multiplicity() == 0) continue;
    dec.multiplicities.emplace_back(l, ct.multiplicity());
    for (int a = 0; a < ct.multiplicity(); ++a) {
      dec.blocks.push_back({l, a, offset, target.dim()});
      offset += target.dim();
      rows.push_back(ct.solutions[a]);
    }
  }
  if (offset != rep.dim()) {
    throw DecompositionIncompleteError("decompose_rep: candidates cover " + std::to_string(offset) + " of " +
                                           std::to_string(rep.dim()) + " dimensions",
                                       rep.dim() - offset);
  }
  dec.change_of_basis.resize(rep.dim(), rep.dim());
  int r0 = 0;
  for (const Matrix& m : rows) {
    dec.change_of_basis.middleRows(r0, m.rows()) = m;
    r0 += static_cast<int>(m.rows());
  }
  Eigen::BDCSVD<Matrix> svd(dec.change_of_basis);
  const auto& sv = svd.singularValues();
  dec.condition_number = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  return dec;
}

double block_residual(const Rep& rep, const Decomposition& decomposition) {
  const Matrix& q = decomposition.change_of_basis;
  const Eigen::PartialPivLU<Matrix> lu(q);
  const Matrix qinv = lu.inverse();
  std::vector<Rep> blocks;
  for (const auto& b : decomposition.blocks) blocks.push_back(irrep(b.label));
  const Rep target = direct_sum(blocks);
  double worst = 0.0;
  for (std::size_t i = 0; i < rep.infinitesimal().size(); ++i)
    worst = std::max(worst, max_abs(q * rep.infinitesimal()[i] * qinv - target.infinitesimal()[i]));
  const int ndisc = std::max(rep.num_discrete(), target.num_discrete());
  for (int h = 0; h < ndisc; ++h)
    worst = std::max(worst, max_abs(q * rep.discrete_or_identity(h) * qinv - target.discrete_or_identity(h)));
  return worst;
}

bool equivalent_by_character(const Rep& a, const Rep& b, int count, std::uint64_t seed, double tol) {
  if (a.dim() != b.dim() || !same_algebra(a.algebra(), b.algebra())) return false;
  const int ndisc = std::max(a.num_discrete(), b.num_discrete());
  for (int i = 0; i < count; ++i) {
    const GroupSample s = sample_group_parameters(a.algebra()->num_generators(), ndisc, seed + i, 0.5);
    const Complex ta = group_action(a, s).trace();
    const Complex tb = group_action(b, s).trace();
    if (std::abs(ta - tb) > tol * std::max(1.0, std::abs(ta))) return false;
  }
  return true;
}

}  // namespace equilie
