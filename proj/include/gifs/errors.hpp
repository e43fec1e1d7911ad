#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gifs {

/// Raised when two geometric objects live in different ambient dimensions.
class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs)
      : std::invalid_argument("dimension mismatch: " + std::to_string(lhs) +
                              " vs " + std::to_string(rhs)) {}
};

/// Raised when a point or map budget would be exceeded. Callers that can
/// return a partial result catch this and set a flag instead.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, std::size_t requested, std::size_t budget)
      : std::runtime_error(what + ": requested " + std::to_string(requested) +
                           ", budget " + std::to_string(budget)),
        requested_(requested),
        budget_(budget) {}

  std::size_t requested() const noexcept { return requested_; }
  std::size_t budget() const noexcept { return budget_; }

 private:
  std::size_t requested_;
  std::size_t budget_;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_same_dim(std::size_t lhs, std::size_t rhs) {
  if (lhs != rhs) throw DimensionMismatch(lhs, rhs);
}

}  // namespace gifs
