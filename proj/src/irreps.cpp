#include "equilie/irreps.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace equilie {

namespace {

constexpr Complex kI(0.0, 1.0);

int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((i == 0 && j == 1) || (i == 1 && j == 2) || (i == 2 && j == 0)) ? 1 : -1;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
  }
  return value;
}

std::vector<int> parse_int_list(std::string_view s) {
  std::vector<int> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(parse_int(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Contents between the delimiters; the closing delimiter must end the string.
std::string_view enclosed(std::string_view s, char open, char close) {
  const auto a = s.find(open);
  if (a == std::string_view::npos || s.back() != close) {
    throw std::invalid_argument("malformed irrep label");
  }
  return s.substr(a + 1, s.size() - a - 2);
}

void require_non_negative(int v, const char* what) {
  if (v < 0) throw std::invalid_argument(std::string(what) + " must be non-negative");
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

bool gt_valid(const GTPattern& p) {
  for (std::size_t r = 0; r + 1 < p.rows.size(); ++r) {
    for (std::size_t i = 0; i < p.rows[r + 1].size(); ++i) {
      if (p.rows[r][i] < p.rows[r + 1][i] || p.rows[r + 1][i] < p.rows[r][i + 1]) return false;
    }
  }
  return true;
}

void enumerate_rows(std::vector<std::vector<int>>& rows, std::vector<GTPattern>& out) {
  const std::vector<int> last = rows.back();
  if (last.size() == 1) {
    out.push_back(GTPattern{rows});
    return;
  }
  std::vector<int> next(last.size() - 1);
  // Depth-first over positions, each entry ascending: lexicographic output.
  auto fill = [&](auto&& self, std::size_t pos) -> void {
    if (pos == next.size()) {
      rows.push_back(next);
      enumerate_rows(rows, out);
      rows.pop_back();
      return;
    }
    for (int x = last[pos + 1]; x <= last[pos]; ++x) {
      next[pos] = x;
      self(self, pos + 1);
    }
  };
  fill(fill, 0);
}

std::vector<Matrix> su_n_basis(const std::vector<std::vector<Matrix>>& e, int n) {
  std::vector<Matrix> gens;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      gens.push_back(-0.5 * kI * (e[i][j] + e[j][i]));
      gens.push_back(-0.5 * (e[i][j] - e[j][i]));
    }
  }
  for (int k = 0; k + 1 < n; ++k) gens.push_back(-0.5 * kI * (e[k][k] - e[k + 1][k + 1]));
  return gens;
}

// Completes E_ij for |i - j| > 1 from the simple-root operators via
// E_ij = [E_i,i+1, E_i+1,j] and E_ji = [E_j,i+1, E_i+1,i].
void close_by_commutators(std::vector<std::vector<Matrix>>& e, int n) {
  for (int gap = 2; gap < n; ++gap) {
    for (int i = 0; i + gap < n; ++i) {
      const int j = i + gap;
      e[i][j] = e[i][i + 1] * e[i + 1][j] - e[i + 1][j] * e[i][i + 1];
      e[j][i] = e[j][i + 1] * e[i + 1][i] - e[i + 1][i] * e[j][i + 1];
    }
  }
}

}  // namespace

IrrepLabel IrrepLabel::su2(int two_j) {
  require_non_negative(two_j, "2j");
  return IrrepLabel{GroupKind::SU2, 0, {two_j}};
}

IrrepLabel IrrepLabel::so3(int l) {
  require_non_negative(l, "l");
  return IrrepLabel{GroupKind::SO3, 0, {l}};
}

IrrepLabel IrrepLabel::o3(int l, int parity) {
  require_non_negative(l, "l");
  if (parity != 1 && parity != -1) throw std::invalid_argument("O3 parity must be +1 or -1");
  return IrrepLabel{GroupKind::O3, 0, {l, parity}};
}

IrrepLabel IrrepLabel::so13(int two_j1, int two_j2) {
  require_non_negative(two_j1, "2j1");
  require_non_negative(two_j2, "2j2");
  return IrrepLabel{GroupKind::SO13, 0, {two_j1, two_j2}};
}

IrrepLabel IrrepLabel::sun(std::vector<int> weight) {
  if (weight.size() < 2) throw std::invalid_argument("SU(N) weight needs N >= 2 entries");
  const int shift = weight.back();
  for (int& w : weight) w -= shift;
  check_sun_weight(weight);
  const int n = static_cast<int>(weight.size());
  return IrrepLabel{GroupKind::SUN, n, std::move(weight)};
}

std::string IrrepLabel::str() const {
  switch (group) {
    case GroupKind::SU2:
      return "SU2(" + std::to_string(weight.at(0)) + ")";
    case GroupKind::SO3:
      return "SO3(" + std::to_string(weight.at(0)) + ")";
    case GroupKind::O3:
      return "O3(" + std::to_string(weight.at(0)) + "," + std::to_string(weight.at(1)) + ")";
    case GroupKind::SO13:
      return "SO13(" + std::to_string(weight.at(0)) + "," + std::to_string(weight.at(1)) + ")";
    case GroupKind::SUN:
      return "SU(" + std::to_string(n) + ")[" + join_ints(weight) + "]";
  }
  return "?";
}

IrrepLabel IrrepLabel::parse(std::string_view text) {
  const std::string_view s = trim(text);
  auto starts = [&s](std::string_view p) { return s.substr(0, p.size()) == p; };
  try {
    if (starts("SU(")) {
      const auto close = s.find(')');
      if (close == std::string_view::npos) throw std::invalid_argument("missing ')'");
      const int n = parse_int(s.substr(3, close - 3));
      const std::vector<int> w = parse_int_list(enclosed(s.substr(close + 1), '[', ']'));
      if (static_cast<int>(w.size()) != n) throw std::invalid_argument("weight length differs from N");
      return IrrepLabel::sun(w);
    }
    if (starts("SU2(")) {
      const auto w = parse_int_list(enclosed(s, '(', ')'));
      if (w.size() != 1) throw std::invalid_argument("SU2 takes one entry");
      return IrrepLabel::su2(w[0]);
    }
    if (starts("SO13(")) {
      const auto w = parse_int_list(enclosed(s, '(', ')'));
      if (w.size() != 2) throw std::invalid_argument("SO13 takes two entries");
      return IrrepLabel::so13(w[0], w[1]);
    }
    if (starts("SO3(")) {
      const auto w = parse_int_list(enclosed(s, '(', ')'));
      if (w.size() != 1) throw std::invalid_argument("SO3 takes one entry");
      return IrrepLabel::so3(w[0]);
    }
    if (starts("O3(")) {
      const auto w = parse_int_list(enclosed(s, '(', ')'));
      if (w.size() != 2) throw std::invalid_argument("O3 takes two entries");
      return IrrepLabel::o3(w[0], w[1]);
    }
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("cannot parse irrep label '" + std::string(s) + "': " + e.what());
  }
  throw std::invalid_argument("cannot parse irrep label '" + std::string(s) + "'");
}

GroupKind parse_group_kind(std::string_view text, int* n) {
  const std::string_view s = trim(text);
  if (s == "SU2") return GroupKind::SU2;
  if (s == "SO3") return GroupKind::SO3;
  if (s == "O3") return GroupKind::O3;
  if (s == "SO13") return GroupKind::SO13;
  std::string_view digits;
  if (s.substr(0, 3) == "SU(" && s.back() == ')') {
    digits = s.substr(3, s.size() - 4);
  } else if (s.substr(0, 2) == "SU") {
    digits = s.substr(2);
  }
  if (!digits.empty()) {
    const int value = parse_int(digits);
    if (value < 2) throw std::invalid_argument("SU(N) needs N >= 2");
    if (n) *n = value;
    return GroupKind::SUN;
  }
  throw std::invalid_argument("unknown group '" + std::string(s) + "'");
}

void check_sun_weight(std::span<const int> weight) {
  if (weight.size() < 2) throw std::invalid_argument("SU(N) weight needs N >= 2 entries");
  if (weight.back() != 0) throw std::invalid_argument("SU(N) weight must be normalized (last entry 0)");
  for (std::size_t i = 0; i + 1 < weight.size(); ++i) {
    if (weight[i] < weight[i + 1]) throw std::invalid_argument("SU(N) weight must be weakly decreasing");
  }
}

std::vector<GTPattern> enumerate_gt_patterns(std::span<const int> weight) {
  check_sun_weight(weight);
  std::vector<std::vector<int>> rows{std::vector<int>(weight.begin(), weight.end())};
  std::vector<GTPattern> out;
  enumerate_rows(rows, out);
  return out;
}

long long weyl_dimension(std::span<const int> weight) {
  check_sun_weight(weight);
  const auto n = static_cast<long long>(weight.size());
  long long num = 1;
  long long den = 1;
  for (long long i = 0; i < n; ++i) {
    for (long long j = i + 1; j < n; ++j) {
      num *= weight[i] - weight[j] + j - i;
      den *= j - i;
      const long long g = std::gcd(num, den);
      num /= g;
      den /= g;
    }
  }
  return num / den;
}

int dimension(const IrrepLabel& label) {
  switch (label.group) {
    case GroupKind::SU2:
      return label.weight.at(0) + 1;
    case GroupKind::SO3:
    case GroupKind::O3:
      return 2 * label.weight.at(0) + 1;
    case GroupKind::SO13:
      return (label.weight.at(0) + 1) * (label.weight.at(1) + 1);
    case GroupKind::SUN:
      return static_cast<int>(weyl_dimension(label.weight));
  }
  return 0;
}

Rep irrep(const IrrepLabel& label) {
  switch (label.group) {
    case GroupKind::SU2:
      return su2_irrep(label.weight.at(0));
    case GroupKind::SO3:
      return so3_irrep(label.weight.at(0));
    case GroupKind::O3:
      return o3_irrep(label.weight.at(0), label.weight.at(1));
    case GroupKind::SO13:
      return so13_irrep(label.weight.at(0), label.weight.at(1));
    case GroupKind::SUN:
      return sun_irrep(label.weight);
  }
  throw std::invalid_argument("irrep: unknown group");
}

AlgebraPtr su2_algebra() {
  static const AlgebraPtr algebra = [] {
    std::vector<Complex> c(27, Complex(0.0));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) c[(i * 3 + j) * 3 + k] = levi_civita(i, j, k);
    return std::make_shared<const LieAlgebra>("su2", 3, std::move(c));
  }();
  return algebra;
}

AlgebraPtr so13_algebra() {
  static const AlgebraPtr algebra = [] {
    // Generators 0..2 are rotations L, 3..5 boosts M.
    std::vector<Complex> c(216, Complex(0.0));
    auto at = [](int i, int j, int k) { return (i * 6 + j) * 6 + k; };
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          const double e = levi_civita(i, j, k);
          c[at(i, j, k)] = e;              // [L_i, L_j] = ε L_k
          c[at(i, 3 + j, 3 + k)] = e;      // [L_i, M_j] = ε M_k
          c[at(3 + i, j, 3 + k)] = e;      // [M_i, L_j] = ε M_k
          c[at(3 + i, 3 + j, k)] = -e;     // [M_i, M_j] = -ε L_k
        }
    return std::make_shared<const LieAlgebra>("so13", 6, std::move(c));
  }();
  return algebra;
}

AlgebraPtr sun_algebra(int n) {
  if (n < 2) throw std::invalid_argument("sun_algebra: N must be >= 2");
  static std::map<int, AlgebraPtr> cache;
  static std::mutex mu;
  const std::lock_guard lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  std::vector<std::vector<Matrix>> e(n, std::vector<Matrix>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      e[i][j] = Matrix::Zero(n, n);
      e[i][j](i, j) = 1.0;
    }
  const auto gens = su_n_basis(e, n);
  auto algebra = std::make_shared<const LieAlgebra>(LieAlgebra::from_generators("su" + std::to_string(n), gens));
  cache.emplace(n, algebra);
  return algebra;
}

std::vector<Matrix> angular_momentum(int two_j) {
  require_non_negative(two_j, "2j");
  const int d = two_j + 1;
  const double j = 0.5 * two_j;
  Matrix jz = Matrix::Zero(d, d);
  Matrix jp = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double m = j - i;
    jz(i, i) = m;
    if (i > 0) jp(i - 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  const Matrix jm = jp.transpose();
  return {0.5 * (jp + jm), -0.5 * kI * (jp - jm), jz};
}

Rep su2_irrep(int two_j) {
  auto j = angular_momentum(two_j);
  for (Matrix& m : j) m = -kI * m;
  return Rep(su2_algebra(), std::move(j));
}

Rep so3_irrep(int l) {
  require_non_negative(l, "l");
  return su2_irrep(2 * l);
}

Rep o3_irrep(int l, int parity) {
  require_non_negative(l, "l");
  if (parity != 1 && parity != -1) throw std::invalid_argument("o3_irrep: parity must be +1 or -1");
  const Rep base = so3_irrep(l);
  const int d = 2 * l + 1;
  return Rep(base.algebra(), base.infinitesimal(), {static_cast<double>(parity) * Matrix::Identity(d, d)});
}

Rep so13_irrep(int two_j1, int two_j2) {
  const Rep a = su2_irrep(two_j1);
  const Rep b = su2_irrep(two_j2);
  const Matrix ia = Matrix::Identity(a.dim(), a.dim());
  const Matrix ib = Matrix::Identity(b.dim(), b.dim());
  std::vector<Matrix> gens(6);
  for (int i = 0; i < 3; ++i) {
    const Matrix left = kron(a.infinitesimal()[i], ib);
    const Matrix right = kron(ia, b.infinitesimal()[i]);
    gens[i] = left + right;
    gens[3 + i] = -kI * (left - right);
  }
  return Rep(so13_algebra(), std::move(gens));
}

Rep sun_irrep(std::vector<int> weight) {
  if (weight.size() < 2) throw std::invalid_argument("sun_irrep: weight needs N >= 2 entries");
  const int shift = weight.back();
  for (int& w : weight) w -= shift;
  check_sun_weight(weight);
  const int n = static_cast<int>(weight.size());
  const auto patterns = enumerate_gt_patterns(weight);
  const int d = static_cast<int>(patterns.size());
  std::map<GTPattern, int> index;
  for (int i = 0; i < d; ++i) index.emplace(patterns[i], i);

  std::vector<std::vector<Matrix>> e(n, std::vector<Matrix>(n, Matrix::Zero(d, d)));
  // Row of length k sits at rows[n - k]; l_{k,i} = λ_{k,i} - i (0-based i).
  for (int col = 0; col < d; ++col) {
    const GTPattern& p = patterns[col];
    for (int k = 1; k <= n; ++k) {
      const auto& row = p.rows[n - k];
      double s = std::accumulate(row.begin(), row.end(), 0.0);
      if (k > 1) {
        const auto& below = p.rows[n - k + 1];
        s -= std::accumulate(below.begin(), below.end(), 0.0);
      }
      e[k - 1][k - 1](col, col) = s;
    }
    for (int k = 1; k < n; ++k) {
      const auto& row = p.rows[n - k];
      const auto& above = p.rows[n - k - 1];
      auto l = [](const std::vector<int>& r, int i) { return static_cast<double>(r[i] - i); };
      for (int i = 0; i < k; ++i) {
        GTPattern q = p;
        q.rows[n - k][i] += 1;
        if (!gt_valid(q)) continue;
        // Unnormalized Gelfand-Tsetlin coefficients: a for E_k,k+1 at Λ and
        // b for E_k+1,k at Λ + δ_ki; the orthonormal-basis element is sqrt(a b).
        const double lki = l(row, i);
        double a = -1.0;
        for (int j = 0; j <= k; ++j) a *= lki - l(above, j);
        double b = 1.0;
        if (k > 1) {
          const auto& below = p.rows[n - k + 1];
          for (int j = 0; j < k - 1; ++j) b *= lki + 1.0 - l(below, j);
        }
        for (int j = 0; j < k; ++j) {
          if (j == i) continue;
          a /= lki - l(row, j);
          b /= lki + 1.0 - l(row, j);
        }
        const double ratio = a * b;
        if (ratio < -1e-12) throw std::logic_error("sun_irrep: negative Gelfand-Tsetlin coefficient");
        const double coeff = std::sqrt(std::max(0.0, ratio));
        e[k - 1][k](index.at(q), col) = coeff;
        e[k][k - 1](col, index.at(q)) = coeff;
      }
    }
  }
  close_by_commutators(e, n);
  return Rep(sun_algebra(n), su_n_basis(e, n));
}

Rep so3_cartesian_rep() {
  std::vector<Matrix> gens(3, Matrix::Zero(3, 3));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) gens[a](b, c) = -levi_civita(a, b, c);
  return Rep(su2_algebra(), std::move(gens));
}

Rep o3_cartesian_rep() {
  const Rep base = so3_cartesian_rep();
  return Rep(base.algebra(), base.infinitesimal(), {-Matrix::Identity(3, 3)});
}

Rep so13_vector_rep() {
  std::vector<Matrix> gens(6, Matrix::Zero(4, 4));
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) gens[a](1 + b, 1 + c) = -levi_civita(a, b, c);
    gens[3 + a](0, 1 + a) = 1.0;
    gens[3 + a](1 + a, 0) = 1.0;
  }
  return Rep(so13_algebra(), std::move(gens));
}

std::vector<IrrepLabel> candidate_labels(GroupKind group, int max_dim, int n) {
  std::vector<IrrepLabel> out;
  switch (group) {
    case GroupKind::SU2:
      for (int t = 0; t + 1 <= max_dim; ++t) out.push_back(IrrepLabel::su2(t));
      break;
    case GroupKind::SO3:
      for (int l = 0; 2 * l + 1 <= max_dim; ++l) out.push_back(IrrepLabel::so3(l));
      break;
    case GroupKind::O3:
      for (int l = 0; 2 * l + 1 <= max_dim; ++l) {
        out.push_back(IrrepLabel::o3(l, 1));
        out.push_back(IrrepLabel::o3(l, -1));
      }
      break;
    case GroupKind::SO13:
      for (int a = 0; a + 1 <= max_dim; ++a)
        for (int b = 0; (a + 1) * (b + 1) <= max_dim; ++b) out.push_back(IrrepLabel::so13(a, b));
      break;
    case GroupKind::SUN: {
      if (n < 2) throw std::invalid_argument("candidate_labels: SU(N) needs N >= 2");
      std::vector<int> w(n, 0);
      auto rec = [&](auto&& self, int pos, int upper) -> void {
        if (pos == n - 1) {
          if (weyl_dimension(w) <= max_dim) out.push_back(IrrepLabel::sun(w));
          return;
        }
        for (int v = 0; v <= upper; ++v) {
          w[pos] = v;
          self(self, pos + 1, v);
        }
      };
      rec(rec, 0, std::max(0, max_dim));
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace equilie
