#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace evo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// One latent code per row.
using Batch = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;

enum class Errc {
  InvalidArgument,
  ZeroVector,
  NotTangent,
  NormMismatch,
  DegenerateArc,
  EmptyScores,
  ProtocolViolation,
  ShapeMismatch,
  NonFiniteScore,
  Unsupported,
  DimensionMismatch,
  AllZeroUnit,
  PeerTimeout,
  ProtocolError,
  PeerCrash,
  OutOfRange,
  DegenerateTrajectory,
  FitDiverged,
  NotPositiveDefinite,
  EmptyDirectionSet,
  InsufficientData,
  IoError,
  ConfigError,
  CorruptData,
};

std::string_view errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace evo
