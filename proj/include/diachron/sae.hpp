#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "diachron/sparse_vector.hpp"

namespace diachron {

enum class InputNormalization { identity, subtract_decoder_bias };

struct SaeConfig {
  std::uint32_t kappa = 64;  // active features kept per token
  InputNormalization normalization = InputNormalization::identity;
  double lambda_rec = 1.0;
  double lambda_l1 = 0.0;

  void validate() const;
};

/// Frozen TopK autoencoder parameters, widened to double.
/// w_enc is K x d, w_dec is d x K.
struct SaeWeights {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w_enc;
  Eigen::VectorXd b_enc;
  Eigen::MatrixXd w_dec;
  Eigen::VectorXd b_dec;

  std::size_t d() const { return static_cast<std::size_t>(w_enc.cols()); }
  std::size_t k_features() const { return static_cast<std::size_t>(w_enc.rows()); }

  /// Shape consistency and finiteness; throws diachron::Error.
  void validate() const;

  /// W_enc = W_dec = I, zero biases.
  static SaeWeights identity(std::size_t dim);

  /// Entries i.i.d. uniform in [-scale, scale], seeded.
  static SaeWeights random(std::size_t d, std::size_t k_features, std::uint64_t seed,
                           double scale = 1.0);
};

struct SaeOutput {
  SparseVector z;
  std::vector<double> h_hat;
};

/// W_enc * normalize(h) + b_enc.
std::vector<double> encode_preactivation(std::span<const double> h, const SaeWeights& weights,
                                         const SaeConfig& config);

/// Keeps the kappa largest coordinates by signed value (ties toward the lower
/// index), then drops retained coordinates that are <= 0.
SparseVector topk_sparsify(std::span<const double> preactivation, std::uint32_t kappa);

/// W_dec * z + b_dec, touching only the support of z.
std::vector<double> decode(const SparseVector& z, const SaeWeights& weights);

SaeOutput sae_forward(std::span<const double> h, const SaeWeights& weights, const SaeConfig& config);

/// Mean squared L2 reconstruction error over a non-empty batch.
double reconstruction_loss(std::span<const std::vector<double>> h_batch, const SaeWeights& weights,
                           const SaeConfig& config);

/// Mean L1 norm of the sparse codes; 0 for an empty batch.
double l1_penalty(std::span<const SparseVector> z_batch);

// Binary weight file: "SAEW", u32 d, u32 K, u32 kappa, then W_enc (row-major),
// b_enc, W_dec (row-major), b_dec, all little-endian f32.
void write_weights(const std::filesystem::path& path, const SaeWeights& weights, std::uint32_t kappa);
SaeWeights read_weights(const std::filesystem::path& path, std::uint32_t* kappa = nullptr);

// JSON sidecar mirroring SaeConfig.
void write_config(const std::filesystem::path& path, const SaeConfig& config);
SaeConfig read_config(const std::filesystem::path& path);

}  // namespace diachron
