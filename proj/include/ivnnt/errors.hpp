#ifndef IVNNT_ERRORS_HPP
#define IVNNT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ivnnt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// domain ---------------------------------------------------------------

struct ValidationError : Error {
  std::vector<std::size_t> non_binary_rows;         // 0-based record indices
  std::vector<std::pair<int, int>> empty_cells;     // (z, a) cells with no records
  bool empty_dataset = false;
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

struct LengthMismatchError : Error {
  std::size_t expected, got;
  LengthMismatchError(std::size_t e, std::size_t g)
      : Error("theta vector length mismatch: expected " + std::to_string(e) +
              ", got " + std::to_string(g)),
        expected(e), got(g) {}
};

// estimator ------------------------------------------------------------

struct SeparationError : Error {
  std::vector<std::pair<int, int>> cells;  // (z, a) cells with degenerate outcome mean
  explicit SeparationError(const std::string& msg) : Error(msg) {}
};

struct NoSolutionError : Error {
  using Error::Error;
};

struct GroupEmptyError : Error {
  using Error::Error;
};

struct NonFiniteThetaError : Error {
  using Error::Error;
};

// variance -------------------------------------------------------------

struct NonFiniteEntryError : Error {
  int component;  // Q component whose perturbed evaluation went non-finite (-1 unknown)
  explicit NonFiniteEntryError(const std::string& msg, int comp = -1)
      : Error(msg), component(comp) {}
};

struct ExcludedError : Error {
  double condition_number;
  explicit ExcludedError(double cond)
      : Error("bread matrix condition number " + std::to_string(cond) +
              " exceeds exclusion threshold 1e12"),
        condition_number(cond) {}
};

// io -------------------------------------------------------------------

struct IoError : Error {
  using Error::Error;
};

struct MissingColumnError : Error {
  std::string column;
  explicit MissingColumnError(const std::string& col)
      : Error("missing column: " + col), column(col) {}
};

struct CsvParseError : Error {
  std::size_t line;
  CsvParseError(const std::string& msg, std::size_t l)
      : Error(msg + " (line " + std::to_string(l) + ")"), line(l) {}
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace ivnnt

#endif
