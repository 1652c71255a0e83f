#include "equilie/serialize.hpp"

#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace equilie {

namespace {

Json complex_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Complex complex_from(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument("expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const Json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) throw std::invalid_argument("matrix has wrong row count");
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != dim)
      throw std::invalid_argument("matrix has wrong column count");
    for (int k = 0; k < dim; ++k) m(i, k) = complex_from(j[i][k]);
  }
  return m;
}

class Fnv {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  void value(long long v) { bytes(&v, sizeof v); }
  void text(const std::string& s) {
    value(static_cast<long long>(s.size()));
    bytes(s.data(), s.size());
  }
  void matrix(const Matrix& m) {
    value(m.rows());
    value(m.cols());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      // +0.0 normalizes negative zero so equal values hash equally
      const double re = m.data()[i].real() + 0.0, im = m.data()[i].imag() + 0.0;
      bytes(&re, sizeof re);
      bytes(&im, sizeof im);
    }
  }
  void rep(const Rep& r) {
    for (const Complex& c : r.algebra()->structure_constants()) {
      const double re = c.real() + 0.0, im = c.imag() + 0.0;
      bytes(&re, sizeof re);
      bytes(&im, sizeof im);
    }
    value(r.dim());
    for (const Matrix& m : r.infinitesimal()) matrix(m);
    value(r.num_discrete());
    for (const Matrix& m : r.discrete()) matrix(m);
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

std::string label_key(const std::vector<std::string>& inputs, const std::string& output, int order, bool symmetric) {
  std::string key;
  for (const auto& s : inputs) key += s + ";";
  key += "->" + output + "|" + std::to_string(order) + (symmetric ? "|sym" : "|plain");
  return key;
}

}  // namespace

Json rep_to_json(const Rep& rep) {
  const LieAlgebra& alg = *rep.algebra();
  const int n = alg.num_generators();
  Json sc = Json::array();
  for (int i = 0; i < n; ++i) {
    Json a = Json::array();
    for (int jj = 0; jj < n; ++jj) {
      Json b = Json::array();
      for (int k = 0; k < n; ++k) b.push_back(complex_json(alg.constant(i, jj, k)));
      a.push_back(std::move(b));
    }
    sc.push_back(std::move(a));
  }
  Json j;
  j["algebra"] = {{"name", alg.name()}, {"num_generators", n}, {"structure_constants", sc}};
  j["dim"] = rep.dim();
  j["infinitesimal"] = Json::array();
  for (const Matrix& m : rep.infinitesimal()) j["infinitesimal"].push_back(matrix_json(m));
  j["discrete"] = Json::array();
  for (const Matrix& m : rep.discrete()) j["discrete"].push_back(matrix_json(m));
  return j;
}

Rep rep_from_json(const Json& j) {
  try {
    const Json& a = j.at("algebra");
    const int n = a.at("num_generators").get<int>();
    if (n < 0) throw std::invalid_argument("negative num_generators");
    const Json& sc = a.at("structure_constants");
    if (!sc.is_array() || static_cast<int>(sc.size()) != n) throw std::invalid_argument("structure_constants shape");
    std::vector<Complex> constants;
    constants.reserve(static_cast<std::size_t>(n) * n * n);
    for (int i = 0; i < n; ++i) {
      if (!sc[i].is_array() || static_cast<int>(sc[i].size()) != n) throw std::invalid_argument("structure_constants shape");
      for (int jj = 0; jj < n; ++jj) {
        if (!sc[i][jj].is_array() || static_cast<int>(sc[i][jj].size()) != n)
          throw std::invalid_argument("structure_constants shape");
        for (int k = 0; k < n; ++k) constants.push_back(complex_from(sc[i][jj][k]));
      }
    }
    auto algebra = std::make_shared<const LieAlgebra>(a.at("name").get<std::string>(), n, std::move(constants));
    const int dim = j.at("dim").get<int>();
    if (dim <= 0) throw std::invalid_argument("dim must be positive");
    std::vector<Matrix> gens, disc;
    for (const Json& m : j.at("infinitesimal")) gens.push_back(matrix_from(m, dim));
    if (j.contains("discrete"))
      for (const Json& m : j.at("discrete")) disc.push_back(matrix_from(m, dim));
    if (n == 0 && gens.empty()) {
      // A rep of the zero algebra carries its dimension only through discrete matrices.
      if (disc.empty()) throw std::invalid_argument("cannot infer representation without matrices");
    }
    return Rep(std::move(algebra), std::move(gens), std::move(disc));
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed representation JSON: ") + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump() + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t rep_hash(const Rep& rep) {
  Fnv f;
  f.rep(rep);
  return f.digest();
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[value & 0xf];
    value >>= 4;
  }
  return s;
}

std::string generic_label(const Rep& rep) { return "generic:" + hex64(rep_hash(rep)); }

std::string coupling_key(const Rep& input, int order, bool symmetric, const Rep& output,
                         const std::string& output_label) {
  Fnv f;
  f.rep(input);
  f.value(order);
  f.value(symmetric ? 1 : 0);
  f.rep(output);
  f.text(output_label);
  return hex64(f.digest());
}

std::string coupling_key(std::span<const Rep> inputs, const Rep& output, const std::string& output_label) {
  Fnv f;
  for (const Rep& r : inputs) f.rep(r);
  f.value(static_cast<long long>(inputs.size()));
  f.value(0);
  f.rep(output);
  f.text(output_label);
  return hex64(f.digest());
}

Json coupling_to_json(const CouplingTensor& coupling) {
  Json j;
  Json inputs = Json::array();
  for (int i = 0; i < coupling.order; ++i) {
    if (i < static_cast<int>(coupling.input_labels.size()) && !coupling.input_labels[i].empty())
      inputs.push_back(coupling.input_labels[i]);
    else
      inputs.push_back(generic_label(*coupling.inputs[i]));
  }
  j["inputs"] = inputs;
  j["output"] = coupling.output_label.empty() ? generic_label(*coupling.output) : coupling.output_label;
  j["order"] = coupling.order;
  j["symmetric"] = coupling.symmetric;
  j["multiplicity"] = coupling.multiplicity();
  Json entries = Json::array();
  for (const auto& e : coupling.entries()) {
    Json row = Json::array();
    for (int k : e.k) row.push_back(k);
    row.push_back(e.out);
    row.push_back(e.alpha);
    row.push_back(e.value.real());
    row.push_back(e.value.imag());
    entries.push_back(std::move(row));
  }
  j["entries"] = entries;
  return j;
}

CouplingTensor coupling_from_json(const Json& j, std::span<const Rep> inputs, const Rep& output) {
  try {
    CouplingTensor ct;
    ct.order = j.at("order").get<int>();
    ct.symmetric = j.at("symmetric").get<bool>();
    const int mult = j.at("multiplicity").get<int>();
    if (ct.order < 1 || mult < 0) throw std::invalid_argument("bad order or multiplicity");
    if (ct.symmetric) {
      if (inputs.size() != 1) throw std::invalid_argument("symmetric table needs one input rep");
      auto shared = std::make_shared<Rep>(inputs[0]);
      ct.inputs.assign(ct.order, shared);
      ct.tuples = ordered_tuples(inputs[0].dim(), ct.order);
    } else {
      if (static_cast<int>(inputs.size()) != ct.order) throw std::invalid_argument("input rep count != order");
      for (const Rep& r : inputs) ct.inputs.push_back(std::make_shared<Rep>(r));
      std::vector<int> dims;
      long long total = 1;
      for (const Rep& r : inputs) {
        dims.push_back(r.dim());
        total *= r.dim();
      }
      Tuple t(dims.size(), 0);
      for (long long i = 0; i < total; ++i) {
        ct.tuples.push_back(t);
        for (int p = static_cast<int>(t.size()) - 1; p >= 0; --p) {
          if (++t[p] < dims[p]) break;
          t[p] = 0;
        }
      }
    }
    ct.output = std::make_shared<Rep>(output);
    for (const Json& s : j.at("inputs")) ct.input_labels.push_back(s.get<std::string>());
    ct.output_label = j.at("output").get<std::string>();
    std::map<Tuple, int> col;
    for (std::size_t i = 0; i < ct.tuples.size(); ++i) col.emplace(ct.tuples[i], static_cast<int>(i));
    ct.solutions.assign(mult, Matrix::Zero(output.dim(), static_cast<Eigen::Index>(ct.tuples.size())));
    for (const Json& e : j.at("entries")) {
      if (!e.is_array() || static_cast<int>(e.size()) != ct.order + 4) throw std::invalid_argument("bad entry");
      Tuple k;
      for (int i = 0; i < ct.order; ++i) k.push_back(e[i].get<int>());
      const int out = e[ct.order].get<int>();
      const int alpha = e[ct.order + 1].get<int>();
      auto it = col.find(k);
      if (it == col.end() || out < 0 || out >= output.dim() || alpha < 0 || alpha >= mult)
        throw std::invalid_argument("entry index out of range");
      ct.solutions[alpha](out, it->second) = Complex(e[ct.order + 2].get<double>(), e[ct.order + 3].get<double>());
    }
    return ct;
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed coupling table: ") + e.what());
  }
}

namespace {

// Loaded tables must intertwine; a stale or edited file would otherwise give
// silently non-equivariant features.
void verify_table(const CouplingTensor& ct, const std::string& origin) {
  const Rep& in = *ct.inputs[0];
  const int discrete = std::max(in.num_discrete(), ct.output->num_discrete());
  for (std::uint64_t seed : {1u, 2u}) {
    const GroupSample g = sample_group_parameters(in.algebra()->num_generators(), discrete, seed, 0.5);
    if (intertwiner_residual(ct, g) > 1e-8)
      throw ConfigurationError("coupling table " + origin + " does not match the requested representations");
  }
}

}  // namespace

CouplingStore::CouplingStore(std::optional<std::filesystem::path> cache_dir, bool allow_compute)
    : cache_dir_(std::move(cache_dir)), allow_compute_(allow_compute) {}

void CouplingStore::preload(const std::filesystem::path& path) {
  Json j = Json::parse(read_text_file(path));
  std::vector<std::string> inputs;
  for (const Json& s : j.at("inputs")) inputs.push_back(s.get<std::string>());
  const std::string key =
      label_key(inputs, j.at("output").get<std::string>(), j.at("order").get<int>(), j.at("symmetric").get<bool>());
  std::unique_lock lock(mutex_);
  preloaded_[key] = std::move(j);
}

std::size_t CouplingStore::computed_count() const {
  std::shared_lock lock(mutex_);
  return computed_;
}

std::optional<CouplingTensor> CouplingStore::lookup(const std::string& key, const std::string& lkey,
                                                    std::span<const Rep> inputs, const Rep& output) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
    if (auto it = preloaded_.find(lkey); it != preloaded_.end()) {
      const Json j = it->second;
      lock.unlock();
      CouplingTensor ct = coupling_from_json(j, inputs, output);
      verify_table(ct, lkey);
      remember(key, ct);
      return ct;
    }
  }
  if (cache_dir_) {
    const auto file = *cache_dir_ / (key + ".json");
    if (std::filesystem::exists(file)) {
      CouplingTensor ct = coupling_from_json(Json::parse(read_text_file(file)), inputs, output);
      verify_table(ct, file.string());
      remember(key, ct);
      return ct;
    }
  }
  return std::nullopt;
}

void CouplingStore::remember(const std::string& key, const CouplingTensor& ct) {
  std::unique_lock lock(mutex_);
  memory_[key] = ct;
}

CouplingTensor CouplingStore::symmetric(const Rep& input, const std::string& input_label, int order, const Rep& output,
                                        const std::string& output_label, const std::vector<IrrepLabel>& candidates) {
  const std::string in_label = input_label.empty() ? generic_label(input) : input_label;
  const std::string out_label = output_label.empty() ? generic_label(output) : output_label;
  const std::string key = coupling_key(input, order, true, output, out_label);
  const std::string lkey = label_key(std::vector<std::string>(order, in_label), out_label, order, true);
  const Rep ins[] = {input};
  if (auto hit = lookup(key, lkey, ins, output)) return *hit;
  if (!allow_compute_)
    throw MissingCouplingError("missing coupling table for Sym^" + std::to_string(order) + "(" + in_label + ") -> " +
                               out_label);
  SymmetricCouplingOptions opt;
  opt.intermediate_candidates = candidates;
  opt.input_label = in_label;
  opt.output_label = out_label;
  CouplingTensor ct = symmetric_coupling(input, order, output, opt);
  if (cache_dir_) write_text_file(*cache_dir_ / (key + ".json"), dump_json(coupling_to_json(ct)));
  {
    std::unique_lock lock(mutex_);
    ++computed_;
    memory_[key] = ct;
  }
  return ct;
}

CouplingTensor CouplingStore::pair(const Rep& in1, const std::string& label1, const Rep& in2,
                                   const std::string& label2, const Rep& output, const std::string& output_label) {
  const std::string l1 = label1.empty() ? generic_label(in1) : label1;
  const std::string l2 = label2.empty() ? generic_label(in2) : label2;
  const std::string out_label = output_label.empty() ? generic_label(output) : output_label;
  const Rep ins[] = {in1, in2};
  const std::string key = coupling_key(ins, output, out_label);
  const std::string lkey = label_key({l1, l2}, out_label, 2, false);
  if (auto hit = lookup(key, lkey, ins, output)) return *hit;
  if (!allow_compute_) throw MissingCouplingError("missing coupling table for " + l1 + " x " + l2 + " -> " + out_label);
  CouplingTensor ct = clebsch_gordan(in1, in2, output);
  ct.input_labels = {l1, l2};
  ct.output_label = out_label;
  if (cache_dir_) write_text_file(*cache_dir_ / (key + ".json"), dump_json(coupling_to_json(ct)));
  {
    std::unique_lock lock(mutex_);
    ++computed_;
    memory_[key] = ct;
  }
  return ct;
}

}  // namespace equilie
