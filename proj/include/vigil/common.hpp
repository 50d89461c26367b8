#pragma once

#include <cstddef>
#include <functional>
#include <iostream>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vigil {

/// Precondition violation on an argument value (bad band edge, short window, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Malformed input file. The message carries the file and line/byte offset.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad experiment or CLI configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Warnings go through a process-wide sink so tests and the CLI can capture them.
using WarningSink = std::function<void(const std::string&)>;

namespace detail {
struct WarningState {
  std::mutex mu;
  WarningSink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
};
inline WarningState& warning_state() {
  static WarningState s;
  return s;
}
}  // namespace detail

inline WarningSink set_warning_sink(WarningSink sink) {
  auto& s = detail::warning_state();
  std::lock_guard lock(s.mu);
  return std::exchange(s.sink, std::move(sink));
}

inline void warn(const std::string& msg) {
  auto& s = detail::warning_state();
  std::lock_guard lock(s.mu);
  if (s.sink) s.sink(msg);
}

/// Installs a sink for the lifetime of the guard and restores the previous one.
class ScopedWarningCapture {
public:
  ScopedWarningCapture()
      : prev_(set_warning_sink([this](const std::string& m) { messages_.push_back(m); })) {}
  ~ScopedWarningCapture() { set_warning_sink(std::move(prev_)); }
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }

private:
  std::vector<std::string> messages_;
  WarningSink prev_;
};

/// Dense row-major matrix. Rows are channels or examples depending on context.
template <typename T>
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

  void append_row(std::span<const T> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw DomainError("Matrix::append_row: width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  bool operator==(const Matrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace vigil
