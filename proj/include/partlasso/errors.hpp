#pragma once

#include <stdexcept>
#include <string>

namespace partlasso {

/// Shapes of the arguments do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A column (of the raw design, or of a residualized block) is identically zero.
class ZeroColumnError : public std::invalid_argument {
 public:
  ZeroColumnError(const std::string& what, long column)
      : std::invalid_argument(what), column_(column) {}
  long column() const noexcept { return column_; }

 private:
  long column_;
};

/// X_G^T X_G is not positive definite (collinear or too many columns in G).
class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Near-collinearity detected while building a nodewise precision estimate.
class CollinearityError : public std::runtime_error {
 public:
  CollinearityError(const std::string& what, long column)
      : std::runtime_error(what), column_(column) {}
  long column() const noexcept { return column_; }

 private:
  long column_;
};

}  // namespace partlasso
