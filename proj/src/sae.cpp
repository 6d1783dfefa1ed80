#include "diachron/sae.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "diachron/error.hpp"

namespace diachron {

namespace {

static_assert(std::endian::native == std::endian::little,
              "weight files are read by reinterpreting little-endian bytes");

constexpr std::array<char, 4> kMagic{'S', 'A', 'E', 'W'};

void require_length(std::span<const double> v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw Error(fmt::format("{} length mismatch: got {}, expected {}", what, v.size(), expected));
  }
}

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error("truncated weight file");
  return value;
}

template <typename Matrix>
void write_matrix_rowmajor(std::ofstream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_pod(out, static_cast<float>(m(r, c)));
  }
}

template <typename Matrix>
void read_matrix_rowmajor(std::ifstream& in, Matrix& m) {
  std::vector<float> buf(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw Error("truncated weight file");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = buf[static_cast<std::size_t>(c)];
  }
}

std::string to_string(InputNormalization n) {
  return n == InputNormalization::identity ? "identity" : "subtract_decoder_bias";
}

InputNormalization parse_normalization(const std::string& s) {
  if (s == "identity") return InputNormalization::identity;
  if (s == "subtract_decoder_bias") return InputNormalization::subtract_decoder_bias;
  throw Error(fmt::format("unknown normalization '{}'", s));
}

}  // namespace

void SaeConfig::validate() const {
  if (kappa < 1) throw Error("kappa must be >= 1");
  if (!(lambda_rec >= 0.0) || !(lambda_l1 >= 0.0)) throw Error("loss weights must be non-negative");
}

void SaeWeights::validate() const {
  const auto k = w_enc.rows();
  const auto dd = w_enc.cols();
  if (k == 0 || dd == 0) throw Error("empty SAE weights");
  if (b_enc.size() != k) throw Error("b_enc length must equal K");
  if (w_dec.rows() != dd || w_dec.cols() != k) throw Error("w_dec must be d x K");
  if (b_dec.size() != dd) throw Error("b_dec length must equal d");
  if (!w_enc.allFinite() || !b_enc.allFinite() || !w_dec.allFinite() || !b_dec.allFinite()) {
    throw Error("SAE weights must be finite");
  }
}

SaeWeights SaeWeights::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  SaeWeights w;
  w.w_enc.setIdentity(n, n);
  w.b_enc.setZero(n);
  w.w_dec.setIdentity(n, n);
  w.b_dec.setZero(n);
  return w;
}

SaeWeights SaeWeights::random(std::size_t d, std::size_t k_features, std::uint64_t seed,
                              double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-scale, scale);
  const auto dd = static_cast<Eigen::Index>(d);
  const auto kk = static_cast<Eigen::Index>(k_features);
  SaeWeights w;
  w.w_enc.resize(kk, dd);
  w.b_enc.resize(kk);
  w.w_dec.resize(dd, kk);
  w.b_dec.resize(dd);
  for (Eigen::Index r = 0; r < kk; ++r)
    for (Eigen::Index c = 0; c < dd; ++c) w.w_enc(r, c) = unif(rng);
  for (Eigen::Index r = 0; r < kk; ++r) w.b_enc(r) = unif(rng);
  for (Eigen::Index r = 0; r < dd; ++r)
    for (Eigen::Index c = 0; c < kk; ++c) w.w_dec(r, c) = unif(rng);
  for (Eigen::Index r = 0; r < dd; ++r) w.b_dec(r) = unif(rng);
  return w;
}

std::vector<double> encode_preactivation(std::span<const double> h, const SaeWeights& weights,
                                         const SaeConfig& config) {
  require_length(h, weights.d(), "hidden state");
  Eigen::Map<const Eigen::VectorXd> hv(h.data(), static_cast<Eigen::Index>(h.size()));
  Eigen::VectorXd x = hv;
  if (config.normalization == InputNormalization::subtract_decoder_bias) x -= weights.b_dec;
  Eigen::VectorXd a = weights.w_enc * x + weights.b_enc;
  return {a.data(), a.data() + a.size()};
}

SparseVector topk_sparsify(std::span<const double> preactivation, std::uint32_t kappa) {
  if (kappa < 1) throw Error("kappa must be >= 1");
  if (kappa > preactivation.size()) {
    throw Error(fmt::format("kappa {} exceeds feature dim {}", kappa, preactivation.size()));
  }
  std::vector<FeatureId> order(preactivation.size());
  std::iota(order.begin(), order.end(), FeatureId{0});
  auto by_value = [&](FeatureId a, FeatureId b) {
    if (preactivation[a] != preactivation[b]) return preactivation[a] > preactivation[b];
    return a < b;
  };
  std::nth_element(order.begin(), order.begin() + (kappa - 1), order.end(), by_value);
  order.resize(kappa);
  std::sort(order.begin(), order.end());

  SparseVector z;
  z.dim = static_cast<std::uint32_t>(preactivation.size());
  for (FeatureId m : order) {
    if (preactivation[m] > 0.0) {
      z.indices.push_back(m);
      z.values.push_back(preactivation[m]);
    }
  }
  return z;
}

std::vector<double> decode(const SparseVector& z, const SaeWeights& weights) {
  if (z.dim != weights.k_features()) {
    throw Error(fmt::format("code dim {} does not match SAE feature dim {}", z.dim,
                            weights.k_features()));
  }
  Eigen::VectorXd h = weights.b_dec;
  for (std::size_t i = 0; i < z.nnz(); ++i) {
    h.noalias() += z.values[i] * weights.w_dec.col(static_cast<Eigen::Index>(z.indices[i]));
  }
  return {h.data(), h.data() + h.size()};
}

SaeOutput sae_forward(std::span<const double> h, const SaeWeights& weights, const SaeConfig& config) {
  SaeOutput out;
  const auto a = encode_preactivation(h, weights, config);
  out.z = topk_sparsify(a, config.kappa);
  out.h_hat = decode(out.z, weights);
  return out;
}

double reconstruction_loss(std::span<const std::vector<double>> h_batch, const SaeWeights& weights,
                           const SaeConfig& config) {
  if (h_batch.empty()) throw Error("empty batch");
  double total = 0.0;
  for (const auto& h : h_batch) {
    const auto out = sae_forward(h, weights, config);
    double sq = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
      const double diff = out.h_hat[j] - h[j];
      sq += diff * diff;
    }
    total += sq;
  }
  return total / static_cast<double>(h_batch.size());
}

double l1_penalty(std::span<const SparseVector> z_batch) {
  if (z_batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& z : z_batch) {
    for (double v : z.values) total += std::abs(v);
  }
  return total / static_cast<double>(z_batch.size());
}

void write_weights(const std::filesystem::path& path, const SaeWeights& weights, std::uint32_t kappa) {
  weights.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out.write(kMagic.data(), kMagic.size());
  write_pod(out, static_cast<std::uint32_t>(weights.d()));
  write_pod(out, static_cast<std::uint32_t>(weights.k_features()));
  write_pod(out, kappa);
  write_matrix_rowmajor(out, weights.w_enc);
  for (Eigen::Index i = 0; i < weights.b_enc.size(); ++i) write_pod(out, static_cast<float>(weights.b_enc(i)));
  write_matrix_rowmajor(out, weights.w_dec);
  for (Eigen::Index i = 0; i < weights.b_dec.size(); ++i) write_pod(out, static_cast<float>(weights.b_dec(i)));
  if (!out) throw Error(fmt::format("write failed for {}", path.string()));
}

SaeWeights read_weights(const std::filesystem::path& path, std::uint32_t* kappa) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open weight file {}", path.string()));
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(fmt::format("{} is not an SAEW weight file", path.string()));
  const auto d = read_pod<std::uint32_t>(in);
  const auto k = read_pod<std::uint32_t>(in);
  const auto file_kappa = read_pod<std::uint32_t>(in);
  if (d == 0 || k == 0) throw Error("weight file declares an empty shape");
  if (file_kappa == 0 || file_kappa > k) throw Error("weight file kappa out of range");

  SaeWeights w;
  w.w_enc.resize(k, d);
  w.b_enc.resize(k);
  w.w_dec.resize(d, k);
  w.b_dec.resize(d);
  read_matrix_rowmajor(in, w.w_enc);
  for (std::uint32_t i = 0; i < k; ++i) w.b_enc(i) = read_pod<float>(in);
  read_matrix_rowmajor(in, w.w_dec);
  for (std::uint32_t i = 0; i < d; ++i) w.b_dec(i) = read_pod<float>(in);
  if (in.peek() != std::ifstream::traits_type::eof()) throw Error("trailing bytes in weight file");
  w.validate();
  if (kappa) *kappa = file_kappa;
  return w;
}

void write_config(const std::filesystem::path& path, const SaeConfig& config) {
  nlohmann::json j = {{"kappa", config.kappa},
                      {"normalization", to_string(config.normalization)},
                      {"lambda_rec", config.lambda_rec},
                      {"lambda_l1", config.lambda_l1}};
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << '\n';
}

SaeConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open SAE config {}", path.string()));
  SaeConfig c;
  try {
    const auto j = nlohmann::json::parse(in);
    c.kappa = j.at("kappa").get<std::uint32_t>();
    c.normalization = parse_normalization(j.value("normalization", std::string("identity")));
    c.lambda_rec = j.value("lambda_rec", 1.0);
    c.lambda_l1 = j.value("lambda_l1", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("invalid SAE config {}: {}", path.string(), e.what()));
  }
  c.validate();
  return c;
}

}  // namespace diachron
