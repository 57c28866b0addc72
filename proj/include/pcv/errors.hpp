#pragma once

#include <stdexcept>
#include <string>

namespace pcv {

// Base class for all library errors. Validation errors (bad arguments,
// malformed inputs) and runtime errors (numerical failures) derive from
// the two subclasses below so callers can map them to exit codes.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class RuntimeFailure : public Error {
  public:
    explicit RuntimeFailure(const std::string& msg) : Error(msg) {}
};

struct ZeroVarianceColumn : ValidationError {
    explicit ZeroVarianceColumn(long col)
        : ValidationError("column " + std::to_string(col) +
                          " has zero variance, cannot standardize"),
          column(col) {}
    long column;
};

struct DidNotConverge : RuntimeFailure {
    explicit DidNotConverge(const std::string& what)
        : RuntimeFailure("factorization did not converge: " + what) {}
};

struct ZeroSingularValue : RuntimeFailure {
    explicit ZeroSingularValue(long comp)
        : RuntimeFailure("singular value " + std::to_string(comp + 1) +
                         " is zero, score distance undefined"),
          component(comp) {}
    long component;
};

struct BadSegmentCount : ValidationError {
    BadSegmentCount(int k, long rows)
        : ValidationError("segment count " + std::to_string(k) +
                          " invalid for " + std::to_string(rows) + " rows"),
          K(k) {}
    int K;
};

struct RankDeficient : RuntimeFailure {
    explicit RankDeficient(long comp)
        : RuntimeFailure("covariance deflation collapsed at component " +
                         std::to_string(comp + 1)),
          component(comp) {}
    long component;
};

struct ZeroYLoading : RuntimeFailure {
    explicit ZeroYLoading(long comp)
        : RuntimeFailure("y-loading " + std::to_string(comp + 1) +
                         " is numerically zero"),
          component(comp) {}
    long component;
};

struct SegmentRankDeficient : RuntimeFailure {
    SegmentRankDeficient(int seg, const std::string& why)
        : RuntimeFailure("segment " + std::to_string(seg + 1) +
                         ": local model rank deficient (" + why + ")"),
          segment(seg) {}
    int segment;
};

struct DegenerateResidual : RuntimeFailure {
    DegenerateResidual(int seg, long row)
        : RuntimeFailure("segment " + std::to_string(seg + 1) + ", row " +
                         std::to_string(row) +
                         ": residual direction vanishes in the orthogonal "
                         "complement, cannot restore"),
          segment(seg), row(row) {}
    int segment;
    long row;
};

struct ClassTooSmall : ValidationError {
    ClassTooSmall(const std::string& label, int k)
        : ValidationError("class '" + label + "' has fewer than K=" +
                          std::to_string(k) + " members") {}
};

struct ShapeMismatch : ValidationError {
    explicit ShapeMismatch(const std::string& msg)
        : ValidationError("shape mismatch: " + msg) {}
};

struct UnknownLevel : ValidationError {
    UnknownLevel(const std::string& col, const std::string& value)
        : ValidationError("value '" + value + "' not among declared levels of column '" +
                          col + "'") {}
};

struct NonNumericCell : ValidationError {
    NonNumericCell(const std::string& col, long row)
        : ValidationError("cell at row " + std::to_string(row + 1) + ", column '" + col +
                          "' is not a finite number") {}
};

struct ParseError : ValidationError {
    ParseError(long row, long col, const std::string& why)
        : ValidationError("parse error at row " + std::to_string(row) + ", column " +
                          std::to_string(col) + ": " + why),
          row(row), col(col) {}
    long row;
    long col;
};

struct SchemaMismatch : ValidationError {
    explicit SchemaMismatch(const std::string& msg)
        : ValidationError("schema mismatch: " + msg) {}
};

struct IoError : RuntimeFailure {
    explicit IoError(const std::string& msg) : RuntimeFailure("i/o error: " + msg) {}
};

struct DivergedLoss : RuntimeFailure {
    explicit DivergedLoss(long epoch)
        : RuntimeFailure("training loss became non-finite at epoch " +
                         std::to_string(epoch + 1)),
          epoch(epoch) {}
    long epoch;
};

}  // namespace pcv
