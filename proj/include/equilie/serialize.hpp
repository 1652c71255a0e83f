#pragma once

// JSON persistence for representations and coupling tables, and the
// content-addressed coupling cache.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "equilie/coupling.hpp"

namespace equilie {

using Json = nlohmann::json;

// {"algebra": {"name", "num_generators", "structure_constants"}, "dim",
//  "infinitesimal", "discrete"}; complex numbers are [re, im] pairs.
Json rep_to_json(const Rep& rep);
// Throws std::invalid_argument (via Json errors or shape checks) on malformed input.
Rep rep_from_json(const Json& j);

// Compact single-line dump terminated by a newline. Doubles are printed in
// shortest round-trip form, so parse(dump(x)) is bit-identical.
std::string dump_json(const Json& j);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// FNV-1a over the bytes of the structure constants and generator matrices.
std::uint64_t rep_hash(const Rep& rep);
std::string hex64(std::uint64_t value);

// Label used in tables for reps without an irrep label.
std::string generic_label(const Rep& rep);

// Cache key over (algebra, input generators, order, symmetric flag, output generators, output label).
std::string coupling_key(const Rep& input, int order, bool symmetric, const Rep& output, const std::string& output_label);
std::string coupling_key(std::span<const Rep> inputs, const Rep& output, const std::string& output_label);

// {"inputs", "output", "order", "symmetric", "multiplicity", "entries": [[k..., K, alpha, re, im], ...]}
Json coupling_to_json(const CouplingTensor& coupling);

// Rebuilds solutions from a table; the reps supply dimensions and actions.
CouplingTensor coupling_from_json(const Json& j, std::span<const Rep> inputs, const Rep& output);

// Thread-safe coupling cache. Lookups go memory -> preloaded tables (matched
// by labels) -> cache directory -> computation (when allowed).
class CouplingStore {
 public:
  CouplingStore(std::optional<std::filesystem::path> cache_dir = std::nullopt, bool allow_compute = true);

  // Registers a table file so requests with matching labels use it.
  void preload(const std::filesystem::path& path);

  // Symmetric coupling Sym^order(input) -> output.
  CouplingTensor symmetric(const Rep& input, const std::string& input_label, int order, const Rep& output,
                           const std::string& output_label, const std::vector<IrrepLabel>& candidates = {});

  // Plain coupling in1 ⊗ in2 -> output.
  CouplingTensor pair(const Rep& in1, const std::string& label1, const Rep& in2, const std::string& label2,
                      const Rep& output, const std::string& output_label);

  std::size_t computed_count() const;

 private:
  std::optional<CouplingTensor> lookup(const std::string& key, const std::string& label_key,
                                       std::span<const Rep> inputs, const Rep& output);
  void remember(const std::string& key, const CouplingTensor& ct);

  std::optional<std::filesystem::path> cache_dir_;
  bool allow_compute_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, CouplingTensor> memory_;
  std::map<std::string, Json> preloaded_;  // label key -> table
  std::size_t computed_ = 0;
};

}  // namespace equilie
