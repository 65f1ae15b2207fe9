// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace mnsm::node {

inline constexpr std::uintmax_t kDefaultLogRotateBytes = 10 * 1024 * 1024;

/// Append-only line log, rotated to "<path>.1" once it would exceed the
/// size limit. Thread-safe.
class LogFile {
 public:
  explicit LogFile(std::filesystem::path path, std::uintmax_t rotate_bytes = kDefaultLogRotateBytes);
  ~LogFile();
  LogFile(const LogFile&) = delete;
  LogFile& operator=(const LogFile&) = delete;

  /// Appends `line` plus a newline.
  void append(std::string_view line);

  /// Last `n` lines of the current file, oldest first.
  std::vector<std::string> tail(std::size_t n) const;

  const std::filesystem::path& path() const { return path_; }
  std::uintmax_t rotations() const;

 private:
  void open_locked();

  std::filesystem::path path_;
  std::uintmax_t limit_;
  mutable std::mutex mu_;
  std::FILE* file_ = nullptr;
  std::uintmax_t size_ = 0;
  std::uintmax_t rotations_ = 0;
};

}  // namespace mnsm::node
