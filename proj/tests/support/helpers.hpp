#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "gtsne/core.hpp"

namespace testutil {

//! Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    path_ = base / ("gtsne-test-" + std::to_string(rd()) + "-" +
                    std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

//! Uniform points in [0,1]^d, deterministic per seed.
inline gtsne::Matrix random_points(std::size_t n, std::size_t d,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  gtsne::Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k)
      x(i, k) = (rng() >> 11) * 0x1.0p-53;
  return x;
}

}  // namespace testutil
