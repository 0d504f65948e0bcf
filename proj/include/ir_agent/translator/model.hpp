#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ir_agent/translator/vocabulary.hpp"

namespace ir_agent::translator {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TranslatorConfig {
  std::size_t d_model = 128;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t heads = 4;
  /// Feed-forward width; 0 means 4 * d_model.
  std::size_t ffn_dim = 0;
  /// Upper bound on generated tokens, EOS included.
  std::size_t max_target_len = 128;
  /// Spectrum length; must equal the grid count of every input.
  std::size_t spectrum_length = 3501;
  std::size_t beam_width = 3;
  std::uint64_t seed = 0;

  std::size_t ffn_width() const noexcept { return ffn_dim == 0 ? 4 * d_model : ffn_dim; }
  void validate() const;
};

/// Location of one parameter tensor inside the flat parameter vector.
struct TensorSlot {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const noexcept { return rows * cols; }
};

struct AttentionSlots {
  TensorSlot wq, bq, wk, bk, wv, bv, wo, bo;
};
struct NormSlots {
  TensorSlot gain, bias;
};
struct FeedForwardSlots {
  TensorSlot w1, b1, w2, b2;
};
struct EncoderLayerSlots {
  AttentionSlots attention;
  NormSlots norm1;
  FeedForwardSlots ffn;
  NormSlots norm2;
};
struct DecoderLayerSlots {
  AttentionSlots self_attention;
  NormSlots norm1;
  AttentionSlots cross_attention;
  NormSlots norm2;
  FeedForwardSlots ffn;
  NormSlots norm3;
};

struct ModelLayout {
  TensorSlot input_weight, input_bias, encoder_positions;
  std::vector<EncoderLayerSlots> encoder;
  TensorSlot token_embedding, decoder_positions;
  std::vector<DecoderLayerSlots> decoder;
  TensorSlot output_weight, output_bias;
  std::vector<TensorSlot> all;
  std::size_t parameter_count = 0;

  ModelLayout(const TranslatorConfig& config, std::size_t vocabulary_size);
};

struct ForwardCache;  // activations kept for the backward pass

/// Encoder-decoder transformer from absorbance vectors to SMILES tokens.
/// Each spectrum position is lifted to d_model by a learned 1->d map and a
/// learned positional row is added; the decoder uses causal self-attention
/// and cross-attention over the encoded spectrum. Post-norm layers, GELU.
class TranslatorModel {
 public:
  TranslatorModel(TranslatorConfig config, TokenVocabulary vocabulary);

  const TranslatorConfig& config() const noexcept { return config_; }
  const TokenVocabulary& vocabulary() const noexcept { return vocabulary_; }
  const ModelLayout& layout() const noexcept { return layout_; }

  std::span<double> parameters() noexcept { return parameters_; }
  std::span<const double> parameters() const noexcept { return parameters_; }
  void set_parameters(std::vector<double> values);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights from `seed`; norm gains 1, biases 0.
  void initialize(std::uint64_t seed);

  Eigen::Map<const Matrix> tensor(const TensorSlot& slot) const;
  Eigen::Map<Matrix> tensor(const TensorSlot& slot);

  /// Encoder input: row i = values[i] * input_weight + input_bias + P_i.
  Matrix encode_input(std::span<const double> spectrum) const;
  /// Encoder output (memory) for a spectrum.
  Matrix encode(std::span<const double> spectrum) const;
  /// Logits (rows = positions) for decoder inputs `tokens` (BOS first) given memory.
  Matrix decode_logits(const Matrix& memory, std::span<const int> tokens) const;

  /// Full teacher-forced forward pass; keeps activations in `cache`.
  Matrix forward(std::span<const double> spectrum, std::span<const int> decoder_input,
                 ForwardCache& cache) const;
  /// Accumulates dLoss/dparameters into `gradient` (same layout as parameters()).
  void backward(const ForwardCache& cache, const Matrix& logits_gradient,
                std::span<double> gradient) const;

 private:
  TranslatorConfig config_;
  TokenVocabulary vocabulary_;
  ModelLayout layout_;
  std::vector<double> parameters_;
};

/// Owning wrapper so callers need not see the cache layout.
class ForwardPass {
 public:
  ForwardPass();
  ~ForwardPass();
  ForwardPass(ForwardPass&&) noexcept;
  ForwardPass& operator=(ForwardPass&&) noexcept;

  ForwardCache& cache() { return *cache_; }
  const ForwardCache& cache() const { return *cache_; }

 private:
  std::unique_ptr<ForwardCache> cache_;
};

/// Decoder input (BOS + tokens) and target (tokens + EOS) for one SMILES.
struct TeacherForcing {
  std::vector<int> input;
  std::vector<int> target;
};
TeacherForcing teacher_forcing(const TokenVocabulary& vocabulary, std::string_view smiles);

}  // namespace ir_agent::translator
