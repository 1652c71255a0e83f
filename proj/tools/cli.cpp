#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "equilie/cluster.hpp"
#include "equilie/fit.hpp"
#include "equilie/serialize.hpp"

namespace equilie::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> int_list(std::string s) {
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw UsageError("unbalanced brackets in '" + s + "'");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw UsageError("not an integer: '" + item + "'");
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used != item.size()) throw UsageError("not an integer: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty label");
  return out;
}

struct Globals {
  std::string cache_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double tol = 1e-9;
  int threads = 1;
};

// Creates the cache directory when needed; fails early on unusable paths.
std::optional<fs::path> prepare_cache(const Globals& g) {
  if (g.cache_dir.empty()) return std::nullopt;
  const fs::path p(g.cache_dir);
  if (fs::exists(p) && !fs::is_directory(p)) throw UsageError("cache path is not a directory: " + g.cache_dir);
  fs::create_directories(p);
  return p;
}

void check_input(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("input file not found: " + path);
}

void check_output(const std::string& path) {
  if (path.empty()) return;
  const fs::path p(path);
  if (fs::is_directory(p)) throw UsageError("output path is a directory: " + path);
  const fs::path parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) throw UsageError("output directory does not exist: " + parent.string());
}

Json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void emit_table(const CouplingTensor& ct, const std::string& out_path, std::ostream& out, std::ostream& err) {
  out << "multiplicity " << ct.multiplicity() << "\n";
  if (ct.multiplicity() == 0)
    err << "warning: " << ct.output_label << " does not occur; writing an empty table\n";
  const std::string text = dump_json(coupling_to_json(ct));
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
}

int cmd_cg(const Globals& g, const std::string& group_text, const std::string& a, const std::string& b,
           const std::string& c, const std::string& out_path, std::ostream& out, std::ostream& err) {
  int n = 0;
  const GroupKind group = parse_group_kind(group_text, &n);
  const IrrepLabel l1 = parse_cli_label(group, n, a), l2 = parse_cli_label(group, n, b),
                   lo = parse_cli_label(group, n, c);
  check_output(out_path);
  CouplingStore store(prepare_cache(g));
  const Rep r1 = irrep(l1), r2 = irrep(l2), ro = irrep(lo);
  emit_table(store.pair(r1, l1.str(), r2, l2.str(), ro, lo.str()), out_path, out, err);
  return kOk;
}

int cmd_couple(const Globals& g, const std::string& group_text, const std::string& a, int order,
               const std::string& c, const std::string& out_path, std::ostream& out, std::ostream& err) {
  int n = 0;
  const GroupKind group = parse_group_kind(group_text, &n);
  const IrrepLabel in = parse_cli_label(group, n, a), lo = parse_cli_label(group, n, c);
  if (order < 1) throw UsageError("order must be at least 1");
  check_output(out_path);
  CouplingStore store(prepare_cache(g));
  const Rep r = irrep(in), ro = irrep(lo);
  std::vector<IrrepLabel> candidates;
  if (group == GroupKind::SU2 || group == GroupKind::SO3 || group == GroupKind::O3) {
    const long long d = symmetric_power_dim(r.dim(), std::max(order - 1, 1));
    candidates = candidate_labels(group, static_cast<int>(std::min<long long>(d, 4 * r.dim() * order)), n);
  }
  emit_table(store.symmetric(r, in.str(), order, ro, lo.str(), candidates), out_path, out, err);
  return kOk;
}

int cmd_check(const Globals& g, const std::string& path, std::ostream& out) {
  check_input(path);
  const Rep rep = rep_from_json(parse_json_file(path));
  const ValidationReport v = validate_rep(rep, g.tol);
  const LieAlgebra& alg = *rep.algebra();
  out << "result " << (v.pass ? "PASS" : "FAIL") << "\n";
  out << "max_residual " << fmt17(v.max_residual) << " (tolerance " << fmt17(g.tol) << ")\n";
  if (v.worst_i >= 0) out << "worst_pair " << v.worst_i << " " << v.worst_j << "\n";
  out << "algebra " << alg.name() << " generators " << alg.num_generators() << " dim " << rep.dim() << " discrete "
      << rep.num_discrete() << "\n";
  out << "antisymmetry_residual " << fmt17(alg.antisymmetry_residual()) << "\n";
  out << "jacobi_residual " << fmt17(alg.jacobi_residual()) << "\n";
  out << "min_abs_det " << fmt17(v.min_abs_det) << "\n";
  return v.pass ? kOk : kFailed;
}

int cmd_features(const Globals& g, const std::string& config_path, const std::string& cloud_path,
                 const std::string& out_path, bool no_compute, std::ostream& out) {
  check_input(config_path);
  check_input(cloud_path);
  check_output(out_path);
  ModelConfig config;
  try {
    config = ModelConfig::from_json(parse_json_file(config_path));
  } catch (const Json::exception& e) {
    throw UsageError(config_path + ": " + e.what());
  }
  if (g.seed_given) config.seed = g.seed;
  // table paths are relative to the config file
  const fs::path base = fs::path(config_path).parent_path();
  for (std::string& t : config.coupling_tables) {
    if (fs::path(t).is_relative()) t = (base / t).string();
    check_input(t);
  }
  PointCloud cloud;
  try {
    cloud = parse_cloud(read_text_file(cloud_path));
  } catch (const Json::exception& e) {
    throw UsageError(cloud_path + ": " + e.what());
  }
  CouplingStore store(prepare_cache(g), !no_compute);
  const Model model(config, store);
  const std::string text = dump_json(model.features(cloud).to_json());
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
  return kOk;
}

int cmd_demo(const Globals& g, const std::string& task_name, const std::string& out_path, std::ostream& out) {
  const DemoTask task = parse_demo_task(task_name);
  check_output(out_path);
  CouplingStore store(prepare_cache(g));
  const DemoReport r = run_demo(task, g.seed, store, g.threads);
  const std::string text = r.text();
  out << text;
  if (!out_path.empty()) write_text_file(out_path, text);
  return r.pass ? kOk : kFailed;
}

}  // namespace

IrrepLabel parse_cli_label(GroupKind group, int n, const std::string& text) {
  if (text.empty()) throw UsageError("empty irrep label");
  if (std::isalpha(static_cast<unsigned char>(text.front()))) {
    IrrepLabel l = IrrepLabel::parse(text);
    if (l.group != group || (group == GroupKind::SUN && l.n != n))
      throw UsageError("label '" + text + "' does not belong to the requested group");
    return l;
  }
  const std::vector<int> w = int_list(text);
  switch (group) {
    case GroupKind::SU2:
      if (w.size() != 1) throw UsageError("SU2 labels take one entry (2j)");
      return IrrepLabel::su2(w[0]);
    case GroupKind::SO3:
      if (w.size() != 1) throw UsageError("SO3 labels take one entry (l)");
      return IrrepLabel::so3(w[0]);
    case GroupKind::O3:
      if (w.size() == 1) return IrrepLabel::o3(w[0], w[0] % 2 ? -1 : 1);
      if (w.size() != 2) throw UsageError("O3 labels take 'l' or 'l,p'");
      return IrrepLabel::o3(w[0], w[1]);
    case GroupKind::SO13:
      if (w.size() != 2) throw UsageError("SO13 labels take two entries (2j1,2j2)");
      return IrrepLabel::so13(w[0], w[1]);
    case GroupKind::SUN:
      if (static_cast<int>(w.size()) != n) throw UsageError("SU(N) weights take N entries");
      return IrrepLabel::sun(w);
  }
  throw UsageError("unknown group");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lie-group representations, Clebsch-Gordan couplings and equivariant cluster features", "equilie"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Globals g;
  app.add_option("--cache-dir", g.cache_dir, "Directory for cached coupling tables");
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed")->check(CLI::NonNegativeNumber);
  app.add_option("--tol", g.tol, "Residual tolerance for check")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1, 256));

  std::string group, a, b, c, out_path, path, path2, task;
  int order = 0;
  bool no_compute = false;

  auto* cg = app.add_subcommand("cg", "Clebsch-Gordan coefficients l1 ⊗ l2 -> lout");
  cg->add_option("group", group)->required();
  cg->add_option("l1", a)->required();
  cg->add_option("l2", b)->required();
  cg->add_option("lout", c)->required();
  cg->add_option("--out,-o", out_path, "Table file (default: standard output)");

  auto* couple = app.add_subcommand("couple", "Symmetric coupling Sym^order(label) -> lout");
  couple->add_option("group", group)->required();
  couple->add_option("label", a)->required();
  couple->add_option("order", order)->required();
  couple->add_option("lout", c)->required();
  couple->add_option("--out,-o", out_path, "Table file (default: standard output)");

  auto* check = app.add_subcommand("check", "Validate a representation file");
  check->add_option("rep", path)->required();

  auto* features = app.add_subcommand("features", "Equivariant features of a point cloud");
  features->add_option("config", path)->required();
  features->add_option("cloud", path2)->required();
  features->add_option("--out,-o", out_path, "Feature file (default: standard output)");
  features->add_flag("--no-compute", no_compute, "Fail instead of computing missing coupling tables");

  auto* demo = app.add_subcommand("demo", "Desk-scale fitting demonstration");
  demo->add_option("task", task, "o3-invariant or lorentz-mass")->required();
  demo->add_option("--out,-o", out_path, "Also write the report to this file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (cg->parsed()) return cmd_cg(g, group, a, b, c, out_path, out, err);
    if (couple->parsed()) return cmd_couple(g, group, a, order, c, out_path, out, err);
    if (check->parsed()) return cmd_check(g, path, out);
    if (features->parsed()) return cmd_features(g, path, path2, out_path, no_compute, out);
    if (demo->parsed()) return cmd_demo(g, task, out_path, out);
  } catch (const MissingCouplingError& e) {
    err << "error: " << e.what() << "\n";
    return kMissingTables;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace equilie::cli
