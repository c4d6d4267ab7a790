// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rome {

using Real = double;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;
using ArrayX = Eigen::Array<Real, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

/// N x M matrix of samples (one sample per row) together with the seed it
/// was generated from. This is the currency every stage of the pipeline
/// consumes and produces.
struct Dataset {
  Matrix values;
  std::uint64_t seed = 0;
  std::string spec_tag;

  Index size() const { return values.rows(); }
  Index dims() const { return values.cols(); }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rome
