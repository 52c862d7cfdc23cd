#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mantra/derivation.h"
#include "mantra/fingerprint.h"
#include "mantra/grammar.h"
#include "mantra/logit_matrix.h"
#include "mantra/mol_graph.h"

namespace mantra {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr std::size_t kDefaultLatentDim = 56;
inline constexpr std::size_t kDefaultTMax = 100;
inline constexpr double kDefaultFdStep = 1e-4;

/// A smooth map from latent coordinates to a flat output vector. Implementations
/// are immutable after construction and safe to call concurrently.
class LatentMap {
 public:
  virtual ~LatentMap() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual Vector evaluate(const Vector& z) const = 0;

  /// One column per point. The default evaluates column by column.
  virtual Matrix evaluate_batch(const Matrix& z) const;

  /// Central-difference Jacobian (output_dim x input_dim) with per-coordinate
  /// step h_i = step * (1 + |z_i|). Throws on step <= 0 or non-finite output.
  virtual Matrix jacobian_fd(const Vector& z, double step = kDefaultFdStep) const;

  /// jacobian_fd(z, step) * delta. Overridable when the product is cheaper
  /// than the full matrix.
  virtual Vector jacobian_fd_apply(const Vector& z, const Vector& delta, double step = kDefaultFdStep) const;

 protected:
  void check_dim(const Vector& z) const;
};

/// Free-function form of LatentMap::jacobian_fd.
Matrix jacobian_fd(const LatentMap& map, const Vector& z, double step = kDefaultFdStep);

struct JacobianTerm {
  double value = 0.0;
  double step = kDefaultFdStep;
};

/// ||J(mid) * (zj - zi)||_2 with mid = (zi + zj) / 2. Bit-symmetric in (zi, zj).
JacobianTerm jacobian_term(const LatentMap& map, const Vector& zi, const Vector& zj, double step = kDefaultFdStep);

class IdentityMap : public LatentMap {
 public:
  explicit IdentityMap(std::size_t dim) : dim_(dim) {}
  std::size_t input_dim() const override { return dim_; }
  std::size_t output_dim() const override { return dim_; }
  Vector evaluate(const Vector& z) const override;

 private:
  std::size_t dim_;
};

/// f(z) = M z.
class LinearMap : public LatentMap {
 public:
  explicit LinearMap(Matrix m) : m_(std::move(m)) {}
  std::size_t input_dim() const override { return static_cast<std::size_t>(m_.cols()); }
  std::size_t output_dim() const override { return static_cast<std::size_t>(m_.rows()); }
  Vector evaluate(const Vector& z) const override;
  Matrix evaluate_batch(const Matrix& z) const override;
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

/// f(z) = A tanh(B z) with closed-form Jacobian A diag(1 - tanh^2(Bz)) B.
class SyntheticDecoder : public LatentMap {
 public:
  SyntheticDecoder(Matrix a, Matrix b);
  /// A is (outputs x d) and B is (d x d), entries N(0, 1/d) from `seed`.
  static SyntheticDecoder random(std::size_t d, std::size_t outputs, std::uint64_t seed);

  std::size_t input_dim() const override { return static_cast<std::size_t>(b_.cols()); }
  std::size_t output_dim() const override { return static_cast<std::size_t>(a_.rows()); }
  Vector evaluate(const Vector& z) const override;
  Matrix evaluate_batch(const Matrix& z) const override;
  Matrix jacobian(const Vector& z) const;
  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }

 private:
  Matrix a_, b_;
};

/// Decoded view of one latent point.
struct DecoderOutput {
  LogitMatrix logits;
  RuleSequence rules;
  std::string text;
  bool complete = false;
  bool valid = false;  // complete and passes molecule validation
  std::vector<std::string> reasons;
};

/// A LatentMap whose output is a T_max x width logit matrix in row-major order.
class LogitDecoder : public LatentMap {
 public:
  virtual std::size_t t_max() const = 0;
  virtual std::size_t width() const = 0;
  std::size_t output_dim() const override { return t_max() * width(); }

  LogitMatrix decode_logits(const Vector& z) const;
  /// Requires width() == grammar.rule_width().
  DecoderOutput decode(const Vector& z, const Grammar& grammar) const;
};

/// Views any LatentMap with output_dim == t_max * width as a LogitDecoder.
class ReshapedDecoder : public LogitDecoder {
 public:
  ReshapedDecoder(const LatentMap& inner, std::size_t t_max, std::size_t width);
  std::size_t input_dim() const override { return inner_.input_dim(); }
  std::size_t t_max() const override { return t_max_; }
  std::size_t width() const override { return width_; }
  Vector evaluate(const Vector& z) const override { return inner_.evaluate(z); }
  Matrix evaluate_batch(const Matrix& z) const override { return inner_.evaluate_batch(z); }
  Vector jacobian_fd_apply(const Vector& z, const Vector& delta, double step = kDefaultFdStep) const override {
    return inner_.jacobian_fd_apply(z, delta, step);
  }

 private:
  const LatentMap& inner_;
  std::size_t t_max_, width_;
};

/// Weights of the two-layer grammar-logit decoder, stored as 32-bit floats.
struct DecoderWeights {
  std::size_t d = 0, t_max = 0, n_prod = 0, hidden = 0;
  std::vector<float> w1;  // hidden x d
  std::vector<float> b1;  // hidden
  std::vector<float> w2;  // (t_max * n_prod) x hidden
  std::vector<float> b2;  // t_max * n_prod

  friend bool operator==(const DecoderWeights&, const DecoderWeights&) = default;
};

inline constexpr std::size_t kDefaultHidden = 32;

/// Seeded weights for `grammar`. n_prod is grammar.rule_width() (pad column
/// included). The output bias leans toward epsilon alternatives by an amount
/// growing with the step so that decodes tend to close before T_max.
DecoderWeights random_decoder_weights(const Grammar& grammar, std::size_t d, std::size_t t_max,
                                      std::size_t hidden, std::uint64_t seed);

/// Replaces the output bias with the smoothed log-frequency of each production
/// among the alternatives of its nonterminal, counted over `corpus`, plus the
/// same step-dependent lean toward epsilon alternatives. Decodes then follow
/// the corpus rule statistics except where W2 tanh(W1 z + b1) overrides them.
void fit_rule_prior(DecoderWeights& w, const Grammar& grammar, std::span<const RuleSequence> corpus,
                    double smoothing = 1.0, double closing_ramp = 0.3);

/// Little-endian file: "DECW0001", u64 d, t_max, n_prod, hidden, then W1, b1,
/// W2, b2 as row-major float32.
void save_decoder_weights(const DecoderWeights& w, const std::filesystem::path& path);
DecoderWeights load_decoder_weights(const std::filesystem::path& path);

/// z -> W2 tanh(W1 z + b1) + b2, reshaped to t_max x n_prod.
class GrammarLogitDecoder : public LogitDecoder {
 public:
  explicit GrammarLogitDecoder(const DecoderWeights& weights);

  std::size_t input_dim() const override { return static_cast<std::size_t>(w1_.cols()); }
  std::size_t t_max() const override { return t_max_; }
  std::size_t width() const override { return n_prod_; }
  Vector evaluate(const Vector& z) const override;
  Matrix evaluate_batch(const Matrix& z) const override;
  /// Differences the hidden layer and applies W2 afterwards; equal to the
  /// generic product up to rounding.
  Vector jacobian_fd_apply(const Vector& z, const Vector& delta, double step = kDefaultFdStep) const override;

 private:
  std::size_t t_max_, n_prod_;
  Matrix w1_, w2_;
  Vector b1_, b2_;
};

/// z = R fp / sqrt(nbits) with R a seeded d x nbits matrix of +-1 entries.
class ProjectionEncoder {
 public:
  ProjectionEncoder(std::size_t d = kDefaultLatentDim, std::size_t nbits = 2048, std::uint64_t seed = 0);

  std::size_t dim() const { return d_; }
  std::size_t nbits() const { return nbits_; }
  std::uint64_t seed() const { return seed_; }

  Vector encode(const Fingerprint& fp) const;
  Vector encode(const MolGraph& mol) const;

 private:
  std::size_t d_, nbits_;
  std::uint64_t seed_;
  Matrix r_;
};

}  // namespace mantra
