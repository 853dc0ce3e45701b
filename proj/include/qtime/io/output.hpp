#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "qtime/core/random.hpp"
#include "qtime/core/types.hpp"

namespace qtime::io {

/// Shortest decimal form of a double that parses back to the same value.
inline std::string fmt17(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Writes via a sibling temporary and rename so readers never see half a file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << text;
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Independent 64-bit seed for grid point `key` under a global seed.
inline std::uint64_t derive_seed(std::uint64_t global, std::uint64_t key) {
  Philox rng(global, key ^ (0x5EEDull << 40));
  return rng.next_u64();
}

/// Runs fn(i) for i in [0, count) on `threads` workers. Results must be
/// written to slot i by the callee; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, int threads, F&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, threads), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

/// A CSV table keyed by its leading columns. Existing rows survive a rerun
/// and the file is always rewritten in canonical key order.
class KeyedCsv {
 public:
  KeyedCsv(std::filesystem::path path, std::string header, std::size_t key_columns)
      : path_(std::move(path)), header_(std::move(header)), key_columns_(key_columns) {}

  /// Loads rows from an existing file with the same header; returns the count.
  std::size_t load() {
    rows_.clear();
    if (!std::filesystem::exists(path_)) return 0;
    std::istringstream in(read_text_file(path_));
    std::string line;
    if (!std::getline(in, line) || line != header_) return 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      rows_.emplace(key_of(line), line);
    }
    return rows_.size();
  }

  bool has(const std::string& key) const { return rows_.count(key) > 0; }

  void put(const std::string& key, const std::string& line) { rows_[key] = line; }

  /// Writes rows following `order`; keys absent from the table are skipped.
  void save(const std::vector<std::string>& order) const {
    std::string text = header_ + "\n";
    for (const auto& k : order) {
      auto it = rows_.find(k);
      if (it != rows_.end()) text += it->second + "\n";
    }
    write_file_atomic(path_, text);
  }

  std::size_t size() const { return rows_.size(); }

  std::string key_of(const std::string& line) const {
    std::size_t pos = 0;
    for (std::size_t c = 0; c < key_columns_; ++c) {
      pos = line.find(',', pos);
      if (pos == std::string::npos) return line;
      ++pos;
    }
    return line.substr(0, pos - 1);
  }

 private:
  std::filesystem::path path_;
  std::string header_;
  std::size_t key_columns_;
  std::map<std::string, std::string> rows_;
};

}  // namespace qtime::io
