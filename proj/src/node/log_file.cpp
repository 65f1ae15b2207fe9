// SPDX-License-Identifier: Apache-2.0

#include "mnsm/node/log_file.hpp"

#include <deque>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace mnsm::node {

LogFile::LogFile(std::filesystem::path path, std::uintmax_t rotate_bytes)
    : path_(std::move(path)), limit_(rotate_bytes) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::lock_guard lock(mu_);
  open_locked();
}

LogFile::~LogFile() {
  if (file_) std::fclose(file_);
}

void LogFile::open_locked() {
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) {
    throw std::system_error(errno, std::generic_category(), "cannot open log " + path_.string());
  }
  std::error_code ec;
  size_ = std::filesystem::file_size(path_, ec);
  if (ec) size_ = 0;
}

void LogFile::append(std::string_view line) {
  std::lock_guard lock(mu_);
  if (size_ > 0 && size_ + line.size() + 1 > limit_) {
    std::fclose(file_);
    file_ = nullptr;
    auto rotated = path_;
    rotated += ".1";
    std::error_code ec;
    std::filesystem::rename(path_, rotated, ec);
    ++rotations_;
    open_locked();
  }
  std::fwrite(line.data(), 1, line.size(), file_);
  std::fputc('\n', file_);
  std::fflush(file_);
  size_ += line.size() + 1;
}

std::vector<std::string> LogFile::tail(std::size_t n) const {
  std::lock_guard lock(mu_);
  std::ifstream in(path_, std::ios::binary);
  std::deque<std::string> last;
  std::string line;
  while (n > 0 && std::getline(in, line)) {
    last.push_back(std::move(line));
    if (last.size() > n) last.pop_front();
  }
  return {last.begin(), last.end()};
}

std::uintmax_t LogFile::rotations() const {
  std::lock_guard lock(mu_);
  return rotations_;
}

}  // namespace mnsm::node
