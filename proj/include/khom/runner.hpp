#pragma once

#include "khom/khomology.hpp"

#include <nlohmann/json.hpp>
#include <optional>
#include <string>

namespace khom {

using json = nlohmann::json;

/// Config-driven experiment runner. One JSON document drives every suite;
/// flags only choose the subcommand, config path, output directory and seed.
struct RunConfig {
  json raw;                 // effective config (defaults merged, seed applied)
  std::string config_hash;  // FNV-1a of the canonical dump
  std::uint64_t seed = 0;
  bool parallel_ladder = false;

  static RunConfig load(const std::string& path, const std::string& out_dir,
                        std::optional<std::uint64_t> seed_override, bool parallel);
  static RunConfig from_json(json doc, const std::string& out_dir,
                             std::optional<std::uint64_t> seed_override, bool parallel);

  std::string out_dir;

  CircleBundleSpec make_spec() const;
  DiffOp make_operator(const CircleBundleSpec& spec) const;
  NormalizingFn make_chi() const;
  std::vector<int> ladder() const;
  DecayPolicy policy() const;
  DecayPolicy slow_policy() const;
};

/// Runs one subcommand; returns the process exit code:
/// 0 all verdicts pass, 1 a verdict failed (reports still written),
/// 2 invalid input.
int run_subcommand(const std::string& name, RunConfig& cfg);

std::string fnv1a_hex(const std::string& data);

/// Serialization helpers shared with tests.
json spec_to_json(const CircleBundleSpec& spec);
CircleBundleSpec spec_from_json(const json& j);
json diffop_to_json(const DiffOp& d);
DiffOp diffop_from_json(const json& j, int expected_N);
json section_to_json(const Section& s);
Section section_from_json(const json& j);

}  // namespace khom
