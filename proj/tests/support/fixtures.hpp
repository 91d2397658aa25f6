/*
 * Copyright 2026 The lstmsplit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LSTMSPLIT_TESTS_FIXTURES_HPP_
#define LSTMSPLIT_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lstmsplit/errors.hpp"

namespace lstmsplit::testing {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lstmsplit-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Writes a headerless CSV with `counts[k]` rows labelled `names[k]` and
/// `seq_len` short random values per row, rows interleaved across classes.
inline void write_profile_csv(const std::filesystem::path &path, const std::vector<std::string> &names,
                              const std::vector<std::size_t> &counts, std::size_t seq_len,
                              std::uint64_t seed = 1) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write fixture " + path.string());
  std::mt19937_64 gen(seed);
  std::vector<std::size_t> left = counts;
  std::size_t remaining = 0;
  for (auto c : counts) remaining += c;
  std::string line;
  while (remaining > 0) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (left[k] == 0) continue;
      --left[k];
      --remaining;
      line = names[k];
      for (std::size_t t = 0; t < seq_len; ++t) {
        line += ',';
        line += std::to_string(static_cast<int>(gen() % 19) - 9);
      }
      line += '\n';
      out << line;
    }
  }
}

/// ECG profile file with the class counts of the reference heartbeat set.
inline void write_ecg_fixture(const std::filesystem::path &path) {
  write_profile_csv(path, {"N", "L", "R", "A", "V"}, {6000, 6000, 6000, 2490, 6000}, 128);
}

}  // namespace lstmsplit::testing

#endif  // LSTMSPLIT_TESTS_FIXTURES_HPP_
