#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace scov {

using IndexSet = std::vector<std::size_t>;  // 0-based, sorted, no duplicates

/// Per-coordinate derivative orders p in N_0^N.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<unsigned> orders) : orders_(std::move(orders)) {}

  static MultiIndex zero(std::size_t n) { return MultiIndex(std::vector<unsigned>(n, 0u)); }
  static MultiIndex unit(std::size_t n, std::size_t k) {
    std::vector<unsigned> p(n, 0u);
    p.at(k) = 1u;
    return MultiIndex(std::move(p));
  }

  std::size_t size() const noexcept { return orders_.size(); }
  unsigned operator[](std::size_t k) const { return orders_[k]; }
  const std::vector<unsigned>& orders() const noexcept { return orders_; }

  /// |p|_1
  unsigned total_order() const noexcept {
    unsigned s = 0;
    for (unsigned v : orders_) s += v;
    return s;
  }

  IndexSet support() const {
    IndexSet s;
    for (std::size_t k = 0; k < orders_.size(); ++k)
      if (orders_[k] != 0) s.push_back(k);
    return s;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t k = 0; k < orders_.size(); ++k) {
      if (k) s += ',';
      s += std::to_string(orders_[k]);
    }
    return s + ")";
  }

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<unsigned> orders_;
};

}  // namespace scov
