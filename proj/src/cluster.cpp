#include "equilie/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace equilie {

namespace {

Matrix gaussian_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(std::max(cols, 1)));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * normal(rng);
  return m;
}

std::string join_labels(const std::vector<IrrepLabel>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) s += (i ? "+" : "") + labels[i].str();
  return s;
}

Rep direct_sum_of(const std::vector<IrrepLabel>& labels) {
  std::vector<Rep> reps;
  for (const IrrepLabel& l : labels) reps.push_back(irrep(l));
  return direct_sum(reps);
}

std::vector<int> offsets_of(const std::vector<IrrepLabel>& labels) {
  std::vector<int> off;
  int pos = 0;
  for (const IrrepLabel& l : labels) {
    off.push_back(pos);
    pos += dimension(l);
  }
  return off;
}

// Intermediate irreps for the recursive symmetric coupling. Only compact
// families with fully labeled inputs have an a-priori bound on the weights
// in Sym^m V; other inputs are solved directly.
std::vector<IrrepLabel> tree_candidates(GroupKind group, const std::vector<std::optional<IrrepLabel>>& parts,
                                        int order) {
  if (group != GroupKind::SU2 && group != GroupKind::SO3 && group != GroupKind::O3) return {};
  int top = 0;
  for (const auto& p : parts) {
    if (!p) return {};
    top = std::max(top, p->weight[0]);
  }
  const int bound = std::max(order - 1, 1) * top;
  std::vector<IrrepLabel> out;
  for (int w = 0; w <= bound; ++w) {
    if (group == GroupKind::SU2) {
      out.push_back(IrrepLabel::su2(w));
    } else if (group == GroupKind::SO3) {
      out.push_back(IrrepLabel::so3(w));
    } else {
      out.push_back(IrrepLabel::o3(w, 1));
      out.push_back(IrrepLabel::o3(w, -1));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::set<std::string> kConfigKeys = {"group",         "embedding", "channels",        "mix",
                                           "correlation_order", "outputs", "layers",        "hidden",
                                           "hidden_channels", "residual", "seed",           "ridge_lambda",
                                           "coupling_tables"};

}  // namespace

Matrix pool_atomic_basis(const Embedding& embedding, const PointCloud& cloud) {
  Matrix a = Matrix::Zero(embedding.channels(), embedding.dim());
  for (std::size_t i : canonical_order(cloud)) a += embedding.embed(cloud.particles[i]);
  return a;
}

Matrix mix_channels(const Matrix& a, const Matrix& w) {
  if (w.cols() != a.rows())
    throw std::invalid_argument("mix_channels: weight has " + std::to_string(w.cols()) + " columns, features have " +
                                std::to_string(a.rows()) + " channels");
  return w * a;
}

Matrix product_basis(const Matrix& a_tilde, int order) {
  if (order < 1) throw std::invalid_argument("product_basis: order must be at least 1");
  const auto tuples = ordered_tuples(static_cast<int>(a_tilde.cols()), order);
  Matrix out(a_tilde.rows(), static_cast<Eigen::Index>(tuples.size()));
  for (Eigen::Index c = 0; c < a_tilde.rows(); ++c) {
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      Complex p = 1.0;
      for (int k : tuples[t]) p *= a_tilde(c, k);
      out(c, static_cast<Eigen::Index>(t)) = p;
    }
  }
  return out;
}

std::vector<Matrix> symmetrize_basis(const Matrix& products, const CouplingTensor& coupling) {
  std::vector<Matrix> out;
  for (const Matrix& c : coupling.solutions) {
    if (c.cols() != products.cols())
      throw ConfigurationError("symmetrize_basis: coupling expects " + std::to_string(c.cols()) +
                               " product coordinates, got " + std::to_string(products.cols()));
    out.push_back(products * c.transpose());
  }
  return out;
}

nlohmann::json FeatureField::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const FeatureBlock& b : blocks) {
    nlohmann::json vals = nlohmann::json::array();
    for (Eigen::Index i = 0; i < b.values.size(); ++i)
      vals.push_back(nlohmann::json::array({b.values(i).real() + 0.0, b.values(i).imag() + 0.0}));
    arr.push_back({{"family", b.family}, {"irrep", b.irrep}, {"channel", b.channel}, {"alpha", b.alpha},
                   {"values", vals}});
  }
  return {{"blocks", arr}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("model config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kConfigKeys.count(key)) throw std::invalid_argument("unknown model config key '" + key + "'");
  ModelConfig c;
  c.group = parse_group_kind(j.at("group").get<std::string>(), &c.group_n);
  c.embedding = EmbeddingConfig::from_json(j.at("embedding"));
  c.channels = j.value("channels", 4);
  const std::string mix = j.value("mix", std::string("random"));
  if (mix != "random" && mix != "identity") throw std::invalid_argument("mix must be 'random' or 'identity'");
  c.random_mix = mix == "random";
  c.correlation_order = j.value("correlation_order", 2);
  if (j.contains("outputs"))
    for (const auto& s : j.at("outputs")) c.outputs.push_back(IrrepLabel::parse(s.get<std::string>()));
  c.layers = j.value("layers", 0);
  if (j.contains("hidden"))
    for (const auto& s : j.at("hidden")) c.hidden.push_back(IrrepLabel::parse(s.get<std::string>()));
  c.hidden_channels = j.value("hidden_channels", 4);
  c.residual = j.value("residual", false);
  c.seed = j.value("seed", std::uint64_t{0});
  c.ridge_lambda = j.value("ridge_lambda", 1e-10);
  if (j.contains("coupling_tables"))
    for (const auto& s : j.at("coupling_tables")) c.coupling_tables.push_back(s.get<std::string>());
  if (c.channels < 1 || c.correlation_order < 1 || c.layers < 0 || c.hidden_channels < 1 || !(c.ridge_lambda >= 0))
    throw std::invalid_argument("model config: parameter out of range");
  return c;
}

std::string ModelConfig::group_name() const {
  switch (group) {
    case GroupKind::SU2: return "SU2";
    case GroupKind::SO3: return "SO3";
    case GroupKind::O3: return "O3";
    case GroupKind::SO13: return "SO13";
    case GroupKind::SUN: return "SU(" + std::to_string(group_n) + ")";
  }
  return "?";
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json j;
  j["group"] = group_name();
  j["embedding"] = embedding.to_json();
  j["channels"] = channels;
  j["mix"] = random_mix ? "random" : "identity";
  j["correlation_order"] = correlation_order;
  j["outputs"] = nlohmann::json::array();
  for (const auto& l : outputs) j["outputs"].push_back(l.str());
  j["layers"] = layers;
  j["hidden"] = nlohmann::json::array();
  for (const auto& l : hidden) j["hidden"].push_back(l.str());
  j["hidden_channels"] = hidden_channels;
  j["residual"] = residual;
  j["seed"] = seed;
  j["ridge_lambda"] = ridge_lambda;
  j["coupling_tables"] = coupling_tables;
  return j;
}

Model::Model(const ModelConfig& config, CouplingStore& store)
    : config_(config),
      embedding_(config.group, config.group_n, config.embedding),
      h0_rep_(trivial_rep(su2_algebra())),
      hidden_rep_(h0_rep_) {
  const IrrepLabel trivial = trivial_label(config_.group, config_.group_n);
  if (config_.outputs.empty()) config_.outputs = {trivial};
  if (config_.hidden.empty()) config_.hidden = {trivial};
  for (const IrrepLabel& l : config_.outputs)
    if (l.group != config_.group) throw ConfigurationError("output irrep " + l.str() + " is not an irrep of the group");
  for (const IrrepLabel& l : config_.hidden)
    if (l.group != config_.group) throw ConfigurationError("hidden irrep " + l.str() + " is not an irrep of the group");
  for (const auto& path : config_.coupling_tables) store.preload(path);

  std::mt19937_64 rng(config_.seed);
  if (config_.random_mix) {
    mix_ = gaussian_matrix(rng, config_.channels, embedding_.channels());
  } else {
    config_.channels = embedding_.channels();
    mix_ = Matrix::Identity(config_.channels, config_.channels);
  }

  const Rep& v = embedding_.rep();
  std::vector<std::optional<IrrepLabel>> v_parts;
  for (const Slot& s : embedding_.slots()) v_parts.push_back(s.irrep);
  for (int nu = 1; nu <= config_.correlation_order; ++nu) {
    const auto cands = tree_candidates(config_.group, v_parts, nu);
    for (const IrrepLabel& k : config_.outputs)
      trace_terms_.push_back({nu, k, store.symmetric(v, embedding_.label(), nu, irrep(k), k.str(), cands)});
  }

  if (config_.layers > 0) {
    h0_labels_ = {trivial};
    h0_rep_ = irrep(trivial);
    hidden_rep_ = direct_sum_of(config_.hidden);
    hidden_offset_ = offsets_of(config_.hidden);
    const int ch = config_.hidden_channels;
    h0_weights_ = gaussian_matrix(rng, ch, config_.embedding.num_species);
    std::vector<std::optional<IrrepLabel>> u_parts(config_.hidden.begin(), config_.hidden.end());
    for (int t = 0; t < config_.layers; ++t) {
      Layer layer;
      layer.embed_mix = gaussian_matrix(rng, ch, embedding_.channels());
      const std::string h_label = join_labels(state_labels(t));
      for (const IrrepLabel& o : config_.hidden) {
        layer.pair.push_back(store.pair(state_rep(t), h_label, v, embedding_.label(), irrep(o), o.str()));
        layer.pair_weights.push_back(gaussian_matrix(rng, ch, std::max(layer.pair.back().multiplicity(), 1)));
      }
      layer.mix = gaussian_matrix(rng, ch, ch);
      const std::string u_label = join_labels(config_.hidden);
      for (int nu = 1; nu <= config_.correlation_order; ++nu) {
        const auto cands = tree_candidates(config_.group, u_parts, nu);
        for (const IrrepLabel& k : config_.hidden)
          layer.terms.push_back(
              {nu, k, store.symmetric(hidden_rep_, u_label, nu, irrep(k), k.str(), cands)});
      }
      for (const IrrepLabel& k : config_.hidden) {
        int paths = 0;
        for (const auto& term : layer.terms)
          if (term.output == k) paths += term.coupling.multiplicity();
        layer.message_weights.push_back(gaussian_matrix(rng, ch, std::max(paths, 1)));
        layer.update.push_back(gaussian_matrix(rng, ch, ch));
      }
      layers_.push_back(std::move(layer));
    }
  }

  const RealVector probe = invariant_features(PointCloud{});
  num_invariant_ = static_cast<int>(probe.size());
}

FeatureField Model::trace_features(const PointCloud& cloud) const {
  const Matrix a = pool_atomic_basis(embedding_, cloud);
  const Matrix at = mix_channels(a, mix_);
  FeatureField field;
  for (int nu = 1; nu <= config_.correlation_order; ++nu) {
    const Matrix products = product_basis(at, nu);
    for (const SymmetricTerm& term : trace_terms_) {
      if (term.order != nu) continue;
      const std::vector<Matrix> b = symmetrize_basis(products, term.coupling);
      for (Eigen::Index c = 0; c < at.rows(); ++c)
        for (std::size_t alpha = 0; alpha < b.size(); ++alpha)
          field.blocks.push_back({"nu=" + std::to_string(nu), term.output.str(), static_cast<int>(c),
                                  static_cast<int>(alpha), b[alpha].row(c).transpose()});
    }
  }
  return field;
}

std::vector<Matrix> Model::layer_step(int t, const std::vector<Matrix>& h, const std::vector<Matrix>& phi,
                                      const std::vector<std::size_t>& order) const {
  const Layer& layer = layers_[t];
  const int ch = config_.hidden_channels;
  const int n = static_cast<int>(h.size());
  const int du = hidden_rep_.dim();

  // one-particle functions φ^t_j: couple the neighbour's state with its embedding
  std::vector<Matrix> u(n, Matrix::Zero(ch, du));
  for (int j = 0; j < n; ++j) {
    const Matrix e = layer.embed_mix * phi[j];
    for (int c = 0; c < ch; ++c) {
      const Vector prod = kron(h[j].row(c).transpose(), e.row(c).transpose());
      for (std::size_t o = 0; o < layer.pair.size(); ++o) {
        const CouplingTensor& cg = layer.pair[o];
        const int off = hidden_offset_[o];
        for (int a = 0; a < cg.multiplicity(); ++a)
          u[j].block(c, off, 1, cg.output->dim()) += layer.pair_weights[o](c, a) * (cg.solutions[a] * prod).transpose();
      }
    }
  }

  std::vector<Matrix> next(n, Matrix::Zero(ch, hidden_rep_.dim()));
  for (int i = 0; i < n; ++i) {
    Matrix pooled = Matrix::Zero(ch, du);
    for (std::size_t j : order)
      if (static_cast<int>(j) != i) pooled += u[j];
    const Matrix at = mix_channels(pooled, layer.mix);
    std::vector<Matrix> msg;
    std::vector<int> path(config_.hidden.size(), 0);
    for (std::size_t k = 0; k < config_.hidden.size(); ++k) msg.push_back(Matrix::Zero(ch, dimension(config_.hidden[k])));
    for (int nu = 1; nu <= config_.correlation_order; ++nu) {
      const Matrix products = product_basis(at, nu);
      for (const SymmetricTerm& term : layer.terms) {
        if (term.order != nu) continue;
        const std::size_t k = static_cast<std::size_t>(
            std::find(config_.hidden.begin(), config_.hidden.end(), term.output) - config_.hidden.begin());
        const std::vector<Matrix> b = symmetrize_basis(products, term.coupling);
        for (const Matrix& block : b) {
          msg[k] += layer.message_weights[k].col(path[k]).asDiagonal() * block;
          ++path[k];
        }
      }
    }
    for (std::size_t k = 0; k < config_.hidden.size(); ++k) {
      Matrix updated = layer.update[k] * msg[k];
      if (config_.residual && t > 0) updated += h[i].middleCols(hidden_offset_[k], updated.cols());
      next[i].middleCols(hidden_offset_[k], updated.cols()) = updated;
    }
  }
  return next;
}

MaceStates Model::mace_states(const PointCloud& cloud) const {
  MaceStates out;
  if (config_.layers == 0) return out;
  const int n = static_cast<int>(cloud.particles.size());
  const auto order = canonical_order(cloud);
  std::vector<Matrix> phi(n);
  std::vector<Matrix> h(n);
  for (int i = 0; i < n; ++i) {
    phi[i] = embedding_.embed(cloud.particles[i]);
    Matrix h0 = h0_weights_.col(embedding_.species(cloud.particles[i]));
    h[i] = h0;
  }
  out.states.push_back(h);
  for (int t = 0; t < config_.layers; ++t) {
    h = layer_step(t, h, phi, order);
    out.states.push_back(h);
  }
  return out;
}

FeatureField Model::features(const PointCloud& cloud) const {
  FeatureField field = trace_features(cloud);
  if (config_.layers == 0) return field;
  const MaceStates st = mace_states(cloud);
  const auto order = canonical_order(cloud);
  for (int t = 1; t <= config_.layers; ++t) {
    Matrix total = Matrix::Zero(config_.hidden_channels, hidden_rep_.dim());
    for (std::size_t i : order) total += st.states[t][i];
    for (std::size_t k = 0; k < config_.hidden.size(); ++k)
      for (int c = 0; c < config_.hidden_channels; ++c)
        field.blocks.push_back({"layer=" + std::to_string(t), config_.hidden[k].str(), c, 0,
                                total.block(c, hidden_offset_[k], 1, dimension(config_.hidden[k])).transpose()});
  }
  return field;
}

RealVector Model::invariant_features(const PointCloud& cloud) const {
  const std::string trivial = trivial_label(config_.group, config_.group_n).str();
  const FeatureField field = features(cloud);
  std::vector<double> vals;
  for (const FeatureBlock& b : field.blocks) {
    if (b.irrep != trivial) continue;
    vals.push_back(b.values(0).real());
    vals.push_back(b.values(0).imag());
  }
  return Eigen::Map<RealVector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::vector<Complex> Model::local_readout(const MaceStates& states, const std::vector<Vector>& weights) const {
  const IrrepLabel trivial = trivial_label(config_.group, config_.group_n);
  const auto it = std::find(config_.hidden.begin(), config_.hidden.end(), trivial);
  if (it == config_.hidden.end())
    throw ConfigurationError("scalar readout needs a trivial hidden irrep (" + trivial.str() + ")");
  const int off = hidden_offset_[static_cast<std::size_t>(it - config_.hidden.begin())];
  if (static_cast<int>(weights.size()) != config_.layers)
    throw ConfigurationError("readout needs one weight vector per layer");
  const std::size_t n = states.states.empty() ? 0 : states.states[0].size();
  std::vector<Complex> y(n, Complex(0.0));
  for (int t = 1; t <= config_.layers; ++t) {
    if (weights[t - 1].size() != config_.hidden_channels) throw ConfigurationError("readout weight size mismatch");
    for (std::size_t i = 0; i < n; ++i) y[i] += weights[t - 1].cwiseProduct(states.states[t][i].col(off)).sum();
  }
  return y;
}

Complex Model::global_readout(const MaceStates& states, const std::vector<Vector>& weights) const {
  const std::vector<Complex> local = local_readout(states, weights);
  // sorted summation keeps the total independent of particle order
  std::vector<Complex> sorted = local;
  std::sort(sorted.begin(), sorted.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  Complex total = 0.0;
  for (const Complex& v : sorted) total += v;
  return total;
}

std::vector<std::size_t> canonical_order(const PointCloud& cloud) {
  std::vector<std::size_t> idx(cloud.particles.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return cloud.particles[a].raw < cloud.particles[b].raw; });
  return idx;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

PointCloud transform_cloud(const Embedding& embedding, const PointCloud& cloud, const GroupSample& sample) {
  PointCloud out;
  for (const Particle& p : cloud.particles) out.particles.push_back({embedding.act_on_raw(p.raw, sample)});
  return out;
}

namespace {

void check_uniform_arity(const PointCloud& cloud) {
  for (const Particle& p : cloud.particles)
    if (p.raw.size() != cloud.particles.front().raw.size())
      throw std::invalid_argument("point cloud particles have differing numbers of attributes");
}

}  // namespace

PointCloud cloud_from_json(const nlohmann::json& j) {
  PointCloud cloud;
  for (const auto& p : j.at("particles")) cloud.particles.push_back({p.at("raw").get<std::vector<double>>()});
  check_uniform_arity(cloud);
  return cloud;
}

nlohmann::json cloud_to_json(const PointCloud& cloud) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Particle& p : cloud.particles) arr.push_back({{"raw", p.raw}});
  return {{"particles", arr}};
}

PointCloud parse_cloud(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return cloud_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("malformed point cloud: ") + e.what());
    }
  }
  PointCloud cloud;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Particle p;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw std::invalid_argument("malformed point cloud value '" + tok + "'");
      p.raw.push_back(v);
    }
    if (!p.raw.empty()) cloud.particles.push_back(std::move(p));
  }
  check_uniform_arity(cloud);
  return cloud;
}

}  // namespace equilie
