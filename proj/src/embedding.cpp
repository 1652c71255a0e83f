#include "equilie/embedding.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace equilie {

namespace {

Rep base_rep(GroupKind group, const std::string& base, std::optional<IrrepLabel>* label) {
  if (base == "SO13(vector)") {
    if (group != GroupKind::SO13) throw std::invalid_argument("SO13(vector) base needs group SO13");
    return so13_vector_rep();
  }
  if (base == "SO3(vector)") {
    if (group != GroupKind::SO3) throw std::invalid_argument("SO3(vector) base needs group SO3");
    return so3_cartesian_rep();
  }
  if (base == "O3(vector)") {
    if (group != GroupKind::O3) throw std::invalid_argument("O3(vector) base needs group O3");
    return o3_cartesian_rep();
  }
  const IrrepLabel l = IrrepLabel::parse(base);
  if (l.group != group) throw std::invalid_argument("base '" + base + "' does not belong to the configured group");
  *label = l;
  return irrep(l);
}

}  // namespace

EmbeddingConfig EmbeddingConfig::from_json(const nlohmann::json& j) {
  EmbeddingConfig c;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rep_coordinates") {
    c.kind = EmbeddingKind::RepCoordinates;
  } else if (kind == "radial_harmonic") {
    c.kind = EmbeddingKind::RadialHarmonic;
  } else {
    throw std::invalid_argument("unknown embedding kind '" + kind + "'");
  }
  c.num_species = j.value("num_species", 1);
  c.l_max = j.value("l_max", 1);
  const std::string radial = j.value("radial", std::string("gaussian"));
  if (radial == "gaussian") {
    c.radial = RadialKind::Gaussian;
  } else if (radial == "polynomial") {
    c.radial = RadialKind::Polynomial;
  } else {
    throw std::invalid_argument("unknown radial basis '" + radial + "'");
  }
  c.n_max = j.value("n_max", 4);
  c.r_cut = j.value("r_cut", 3.0);
  c.base = j.value("base", std::string());
  c.complex_input = j.value("complex_input", false);
  c.conjugate = j.value("conjugate", false);
  c.tensor_power = j.value("tensor_power", 1);
  if (c.num_species < 1 || c.l_max < 0 || c.n_max < 1 || !(c.r_cut > 0) || c.tensor_power < 1)
    throw std::invalid_argument("embedding: parameter out of range");
  return c;
}

nlohmann::json EmbeddingConfig::to_json() const {
  nlohmann::json j;
  if (kind == EmbeddingKind::RadialHarmonic) {
    j["kind"] = "radial_harmonic";
    j["l_max"] = l_max;
    j["radial"] = radial == RadialKind::Gaussian ? "gaussian" : "polynomial";
    j["n_max"] = n_max;
    j["r_cut"] = r_cut;
  } else {
    j["kind"] = "rep_coordinates";
    j["base"] = base;
    j["complex_input"] = complex_input;
    j["conjugate"] = conjugate;
    j["tensor_power"] = tensor_power;
  }
  j["num_species"] = num_species;
  return j;
}

IrrepLabel trivial_label(GroupKind group, int n) {
  switch (group) {
    case GroupKind::SU2: return IrrepLabel::su2(0);
    case GroupKind::SO3: return IrrepLabel::so3(0);
    case GroupKind::O3: return IrrepLabel::o3(0, 1);
    case GroupKind::SO13: return IrrepLabel::so13(0, 0);
    case GroupKind::SUN: return IrrepLabel::sun(std::vector<int>(n, 0));
  }
  throw std::invalid_argument("trivial_label: unknown group");
}

std::vector<IrrepLabel> labels_up_to(GroupKind group, int n, int max_dim) {
  return candidate_labels(group, max_dim, n);
}

Vector spherical_harmonics_conj(int l, double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  double theta = 0.0, phi = 0.0;
  if (r > 0) {
    theta = std::acos(std::clamp(z / r, -1.0, 1.0));
    phi = std::atan2(y, x);
  }
  const double norm = std::sqrt(4.0 * std::numbers::pi);
  Vector out(2 * l + 1);
  for (int m = l; m >= -l; --m) {
    const int am = std::abs(m);
    // std::sph_legendre includes the Condon-Shortley phase
    const double p = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am), theta);
    Complex y_lm = p * std::polar(1.0, am * phi);
    if (m < 0) y_lm = ((am % 2) ? -1.0 : 1.0) * std::conj(y_lm);
    out(l - m) = norm * std::conj(y_lm);
  }
  return out;
}

double radial_basis(RadialKind kind, int n, int n_max, double r_cut, double r) {
  if (kind == RadialKind::Polynomial) return std::pow(r, n);
  if (r >= r_cut) return 0.0;
  const double center = n_max > 1 ? r_cut * n / (n_max - 1) : 0.0;
  const double width = r_cut / n_max;
  const double u = (r - center) / width;
  const double s = 1.0 - (r / r_cut) * (r / r_cut);
  return std::exp(-u * u) * s * s;
}

Embedding::Embedding(GroupKind group, int group_n, const EmbeddingConfig& config)
    : group_(group), group_n_(group_n), config_(config), rep_(trivial_rep(su2_algebra())), raw_rep_(rep_) {
  std::vector<Rep> reps;
  auto add_slot = [&](std::string label, std::optional<IrrepLabel> irr, Rep rep) {
    Slot s{std::move(label), std::move(irr), rep, 0, rep.dim()};
    s.offset = slots_.empty() ? 0 : slots_.back().offset + slots_.back().dim;
    reps.push_back(rep);
    slots_.push_back(std::move(s));
  };

  if (config.kind == EmbeddingKind::RadialHarmonic) {
    if (group != GroupKind::SO3 && group != GroupKind::O3)
      throw std::invalid_argument("radial_harmonic embedding requires group SO3 or O3");
    for (int l = 0; l <= config.l_max; ++l) {
      const IrrepLabel lab = group == GroupKind::O3 ? IrrepLabel::o3(l, l % 2 ? -1 : 1) : IrrepLabel::so3(l);
      add_slot(lab.str(), lab, irrep(lab));
    }
    raw_rep_ = group == GroupKind::O3 ? o3_cartesian_rep() : so3_cartesian_rep();
    channels_ = config.num_species * config.n_max;
  } else {
    if (config.base.empty()) throw std::invalid_argument("rep_coordinates embedding needs a base rep");
    std::optional<IrrepLabel> base_label;
    const Rep base = base_rep(group, config.base, &base_label);
    raw_rep_ = base;
    add_slot(config.base, base_label, base);
    if (config.conjugate) add_slot("conj(" + config.base + ")", std::nullopt, conjugate_rep(base));
    Rep power = base;
    for (int q = 2; q <= config.tensor_power; ++q) {
      power = tensor_product(power, base);
      const auto candidates = labels_up_to(group, group_n, power.dim());
      const Decomposition dec = decompose_rep(power, candidates);
      power_rows_.push_back(dec.change_of_basis);
      for (const auto& b : dec.blocks) add_slot(b.label.str(), b.label, irrep(b.label));
    }
    channels_ = config.num_species;
  }
  rep_ = direct_sum(reps);
  label_.clear();
  for (std::size_t i = 0; i < slots_.size(); ++i) label_ += (i ? "+" : "") + slots_[i].label;
}

int Embedding::raw_arity() const noexcept {
  const int extra = config_.num_species > 1 ? 1 : 0;
  if (config_.kind == EmbeddingKind::RadialHarmonic) return 3 + extra;
  return raw_rep_.dim() * (config_.complex_input ? 2 : 1) + extra;
}

int Embedding::species(const Particle& p) const {
  if (config_.num_species <= 1) return 0;
  const double z = p.raw.back();
  const int s = static_cast<int>(std::lround(z));
  if (s < 0 || s >= config_.num_species || static_cast<double>(s) != z)
    throw std::invalid_argument("unknown species index " + std::to_string(z));
  return s;
}

Matrix Embedding::embed(const Particle& p) const {
  if (static_cast<int>(p.raw.size()) != raw_arity())
    throw std::invalid_argument("particle has " + std::to_string(p.raw.size()) + " attributes, embedding expects " +
                                std::to_string(raw_arity()));
  return config_.kind == EmbeddingKind::RadialHarmonic ? embed_radial(p) : embed_coordinates(p);
}

Matrix Embedding::embed_radial(const Particle& p) const {
  const double x = p.raw[0], y = p.raw[1], z = p.raw[2];
  const double r = std::sqrt(x * x + y * y + z * z);
  const int sp = species(p);
  Matrix out = Matrix::Zero(channels_, dim());
  for (const Slot& s : slots_) {
    const int l = s.irrep->weight[0];
    // at the origin only the isotropic l = 0 part is well defined
    if (l > 0 && r == 0.0) continue;
    const Vector y_lm = spherical_harmonics_conj(l, x, y, z);
    for (int n = 0; n < config_.n_max; ++n) {
      const double rad = radial_basis(config_.radial, n, config_.n_max, config_.r_cut, r);
      out.block(sp * config_.n_max + n, s.offset, 1, s.dim) = rad * y_lm.transpose();
    }
  }
  return out;
}

Vector Embedding::coordinates(const Particle& p) const {
  const int d = raw_rep_.dim();
  Vector x(d);
  for (int i = 0; i < d; ++i)
    x(i) = config_.complex_input ? Complex(p.raw[2 * i], p.raw[2 * i + 1]) : Complex(p.raw[i], 0.0);
  return x;
}

Matrix Embedding::embed_coordinates(const Particle& p) const {
  const Vector x = coordinates(p);
  Vector v(dim());
  int pos = 0;
  v.segment(pos, x.size()) = x;
  pos += static_cast<int>(x.size());
  if (config_.conjugate) {
    v.segment(pos, x.size()) = x.conjugate();
    pos += static_cast<int>(x.size());
  }
  Vector power = x;
  for (const Matrix& q : power_rows_) {
    Vector next(power.size() * x.size());
    for (Eigen::Index i = 0; i < power.size(); ++i) next.segment(i * x.size(), x.size()) = power(i) * x;
    power = next;
    v.segment(pos, q.rows()) = q * power;
    pos += static_cast<int>(q.rows());
  }
  Matrix out = Matrix::Zero(channels_, dim());
  out.row(species(p)) = v.transpose();
  return out;
}

std::vector<double> Embedding::act_on_raw(const std::vector<double>& raw, const GroupSample& sample) const {
  if (static_cast<int>(raw.size()) != raw_arity()) throw std::invalid_argument("act_on_raw: arity mismatch");
  const Matrix g = group_action(raw_rep_, sample);
  std::vector<double> out = raw;
  const int d = raw_rep_.dim();
  Vector x(d);
  const bool cplx = config_.kind == EmbeddingKind::RepCoordinates && config_.complex_input;
  for (int i = 0; i < d; ++i) x(i) = cplx ? Complex(raw[2 * i], raw[2 * i + 1]) : Complex(raw[i], 0.0);
  const Vector y = g * x;
  for (int i = 0; i < d; ++i) {
    if (cplx) {
      out[2 * i] = y(i).real();
      out[2 * i + 1] = y(i).imag();
    } else {
      out[i] = y(i).real();
    }
  }
  return out;
}

}  // namespace equilie
