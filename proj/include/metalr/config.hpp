#pragma once

#include "metalr/types.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace metalr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key-value experiment configuration.
///
///     [meta]      k d preset delta sigma
///     [pool]      n_l1 t_l1 n_h t_h n_l2 t_l2
///     [pipeline]  L tau linkage
///     [bench]     trials repeats confidence gamma2_grid em_max_iters em_tol
///
/// Lines are `key = value`; `#` and `;` start comments. Every key has a
/// default, so an empty file is valid. List-valued keys (the grids of the
/// bench subcommands) take comma-separated values.
class Config {
 public:
  Config();

  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  /// Sets a key after checking that it exists; the section is implied.
  void set(const std::string& key, const std::string& value);

  const std::string& raw(const std::string& key) const;
  Index get_index(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::vector<Index> get_index_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Canonical "[section]\nkey = value" text of the resolved configuration.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  static const std::map<std::string, std::string>& section_of();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace metalr
