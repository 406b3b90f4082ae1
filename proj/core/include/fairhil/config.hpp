#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace fairhil {

struct Config {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;  // session snapshots; empty disables persistence
  std::size_t max_constraints = 3;
  double omega = 0.3;     // edge threshold
  double lambda = 0.05;   // structure-learning L1 penalty
  double l2 = 1e-4;       // model regularization
  std::size_t k_max = 10;
  std::size_t min_support = 0;  // hide subgroup cards with fewer members; 0 = off
  double test_fraction = 0.2;
  std::size_t max_upload_bytes = 50u * 1024u * 1024u;
  std::size_t max_rows = 100000;
};

// Flat `key = value` lines (a TOML subset): '#' comments, optional quotes
// around strings. Unknown keys and malformed values throw kValidation.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

}  // namespace fairhil
