#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

// Shared helpers for the suite: error-code assertions and scratch
// directories under the test process's working directory.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "metacog/errors.hpp"

namespace support {

/// Run `fn`, require it throws metacog::Error with the given code.
template <typename Fn>
void require_error(Fn&& fn, metacog::errc expected) {
  bool threw = false;
  try {
    fn();
  } catch (const metacog::Error& e) {
    threw = true;
    INFO("thrown: " << metacog::errc_name(e.code()) << ": " << e.what());
    REQUIRE(e.code() == expected);
  }
  REQUIRE(threw);
}

/// Fresh empty directory `name` under the current working directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::current_path() / ("scratch_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  if (!p.parent_path().empty()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

}  // namespace support
