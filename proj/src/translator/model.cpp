#include "ir_agent/translator/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ir_agent/error.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent::translator {

namespace {

constexpr double kNormEpsilon = 1e-5;

using Row = Eigen::Matrix<double, 1, Eigen::Dynamic>;

class SlotAllocator {
 public:
  explicit SlotAllocator(std::vector<TensorSlot>& all) : all_(all) {}

  TensorSlot add(std::string name, std::size_t rows, std::size_t cols) {
    TensorSlot slot{std::move(name), offset_, rows, cols};
    offset_ += rows * cols;
    all_.push_back(slot);
    return slot;
  }
  std::size_t total() const { return offset_; }

 private:
  std::vector<TensorSlot>& all_;
  std::size_t offset_ = 0;
};

AttentionSlots add_attention(SlotAllocator& alloc, const std::string& prefix, std::size_t d) {
  AttentionSlots s;
  s.wq = alloc.add(prefix + ".wq", d, d);
  s.bq = alloc.add(prefix + ".bq", 1, d);
  s.wk = alloc.add(prefix + ".wk", d, d);
  s.bk = alloc.add(prefix + ".bk", 1, d);
  s.wv = alloc.add(prefix + ".wv", d, d);
  s.bv = alloc.add(prefix + ".bv", 1, d);
  s.wo = alloc.add(prefix + ".wo", d, d);
  s.bo = alloc.add(prefix + ".bo", 1, d);
  return s;
}

NormSlots add_norm(SlotAllocator& alloc, const std::string& prefix, std::size_t d) {
  return {alloc.add(prefix + ".gain", 1, d), alloc.add(prefix + ".bias", 1, d)};
}

FeedForwardSlots add_ffn(SlotAllocator& alloc, const std::string& prefix, std::size_t d,
                         std::size_t f) {
  return {alloc.add(prefix + ".w1", d, f), alloc.add(prefix + ".b1", 1, f),
          alloc.add(prefix + ".w2", f, d), alloc.add(prefix + ".b2", 1, d)};
}

double gelu(double x) {
  constexpr double c = 0.7978845608028654;  // sqrt(2 / pi)
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

double gelu_derivative(double x) {
  constexpr double c = 0.7978845608028654;
  const double t = std::tanh(c * (x + 0.044715 * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * c * (1.0 + 3.0 * 0.044715 * x * x);
}

}  // namespace

void TranslatorConfig::validate() const {
  if (d_model == 0 || encoder_layers == 0 || decoder_layers == 0 || heads == 0 ||
      max_target_len == 0 || spectrum_length == 0 || beam_width == 0) {
    throw DomainError("translator config values must be positive");
  }
  if (d_model % heads != 0) {
    throw DomainError("d_model " + std::to_string(d_model) + " is not divisible by heads " +
                      std::to_string(heads));
  }
}

ModelLayout::ModelLayout(const TranslatorConfig& config, std::size_t vocabulary_size) {
  config.validate();
  const std::size_t d = config.d_model;
  const std::size_t f = config.ffn_width();
  SlotAllocator alloc(all);
  input_weight = alloc.add("input.weight", 1, d);
  input_bias = alloc.add("input.bias", 1, d);
  encoder_positions = alloc.add("encoder.positions", config.spectrum_length, d);
  for (std::size_t l = 0; l < config.encoder_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l);
    EncoderLayerSlots layer;
    layer.attention = add_attention(alloc, p + ".attention", d);
    layer.norm1 = add_norm(alloc, p + ".norm1", d);
    layer.ffn = add_ffn(alloc, p + ".ffn", d, f);
    layer.norm2 = add_norm(alloc, p + ".norm2", d);
    encoder.push_back(std::move(layer));
  }
  token_embedding = alloc.add("decoder.embedding", vocabulary_size, d);
  decoder_positions = alloc.add("decoder.positions", config.max_target_len, d);
  for (std::size_t l = 0; l < config.decoder_layers; ++l) {
    const std::string p = "decoder." + std::to_string(l);
    DecoderLayerSlots layer;
    layer.self_attention = add_attention(alloc, p + ".self_attention", d);
    layer.norm1 = add_norm(alloc, p + ".norm1", d);
    layer.cross_attention = add_attention(alloc, p + ".cross_attention", d);
    layer.norm2 = add_norm(alloc, p + ".norm2", d);
    layer.ffn = add_ffn(alloc, p + ".ffn", d, f);
    layer.norm3 = add_norm(alloc, p + ".norm3", d);
    decoder.push_back(std::move(layer));
  }
  output_weight = alloc.add("output.weight", d, vocabulary_size);
  output_bias = alloc.add("output.bias", 1, vocabulary_size);
  parameter_count = alloc.total();
}

// ---- cached building blocks ------------------------------------------------

struct AttentionCache {
  Matrix query_input, kv_input;
  Matrix q, k, v;
  std::vector<Matrix> weights;  // per head, rows = queries
  Matrix context;               // concatenated head outputs
};

struct NormCache {
  Matrix normalized;
  Eigen::VectorXd inv_std;
};

struct FeedForwardCache {
  Matrix input, hidden;
};

struct EncoderLayerCache {
  AttentionCache attention;
  NormCache norm1;
  FeedForwardCache ffn;
  NormCache norm2;
};

struct DecoderLayerCache {
  AttentionCache self_attention;
  NormCache norm1;
  AttentionCache cross_attention;
  NormCache norm2;
  FeedForwardCache ffn;
  NormCache norm3;
};

struct ForwardCache {
  std::vector<double> spectrum;
  std::vector<int> tokens;
  std::vector<EncoderLayerCache> encoder;
  Matrix memory;
  std::vector<DecoderLayerCache> decoder;
  Matrix decoder_output;
};

ForwardPass::ForwardPass() : cache_(std::make_unique<ForwardCache>()) {}
ForwardPass::~ForwardPass() = default;
ForwardPass::ForwardPass(ForwardPass&&) noexcept = default;
ForwardPass& ForwardPass::operator=(ForwardPass&&) noexcept = default;

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

ConstMap view(std::span<const double> data, const TensorSlot& s) {
  return ConstMap(data.data() + s.offset, static_cast<Eigen::Index>(s.rows),
                  static_cast<Eigen::Index>(s.cols));
}

MutMap view(std::span<double> data, const TensorSlot& s) {
  return MutMap(data.data() + s.offset, static_cast<Eigen::Index>(s.rows),
                static_cast<Eigen::Index>(s.cols));
}

Matrix affine(const Matrix& x, ConstMap w, ConstMap b) {
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

void affine_backward(const Matrix& x, const Matrix& dy, ConstMap w, MutMap dw, MutMap db,
                     Matrix* dx) {
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
  if (dx != nullptr) *dx = dy * w.transpose();
}

Matrix layer_norm(std::span<const double> p, const NormSlots& s, const Matrix& x,
                  NormCache* cache) {
  const auto gain = view(p, s.gain);
  const auto bias = view(p, s.bias);
  const Eigen::Index cols = x.cols();
  Matrix normalized(x.rows(), cols);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const Row centered = x.row(r).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(cols);
    inv_std(r) = 1.0 / std::sqrt(var + kNormEpsilon);
    normalized.row(r) = centered * inv_std(r);
  }
  Matrix y = normalized.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix layer_norm_backward(std::span<const double> p, std::span<double> g, const NormSlots& s,
                           const NormCache& cache, const Matrix& dy) {
  const auto gain = view(p, s.gain);
  auto dgain = view(g, s.gain);
  auto dbias = view(g, s.bias);
  dgain.row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
  const double n = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / n;
    const double mean_dx = dxhat.row(r).dot(cache.normalized.row(r)) / n;
    dx.row(r) = cache.inv_std(r) *
                (dxhat.row(r).array() - mean_d - cache.normalized.row(r).array() * mean_dx).matrix();
  }
  return dx;
}

Matrix feed_forward(std::span<const double> p, const FeedForwardSlots& s, const Matrix& x,
                    FeedForwardCache* cache) {
  Matrix hidden = affine(x, view(p, s.w1), view(p, s.b1));
  const Matrix activated = hidden.unaryExpr(&gelu);
  Matrix y = affine(activated, view(p, s.w2), view(p, s.b2));
  if (cache != nullptr) {
    cache->input = x;
    cache->hidden = std::move(hidden);
  }
  return y;
}

Matrix feed_forward_backward(std::span<const double> p, std::span<double> g,
                             const FeedForwardSlots& s, const FeedForwardCache& cache,
                             const Matrix& dy) {
  const Matrix activated = cache.hidden.unaryExpr(&gelu);
  Matrix dactivated;
  affine_backward(activated, dy, view(p, s.w2), view(g, s.w2), view(g, s.b2), &dactivated);
  const Matrix dhidden = dactivated.array() * cache.hidden.unaryExpr(&gelu_derivative).array();
  Matrix dx;
  affine_backward(cache.input, dhidden, view(p, s.w1), view(g, s.w1), view(g, s.b1), &dx);
  return dx;
}

/// Row-wise softmax attention. With `causal`, query row i sees key rows 0..i only;
/// masked entries are exact zeros, never computed from later keys.
Matrix attention(std::span<const double> p, const AttentionSlots& s, std::size_t heads,
                 const Matrix& query_input, const Matrix& kv_input, bool causal,
                 AttentionCache* cache) {
  Matrix q = affine(query_input, view(p, s.wq), view(p, s.bq));
  Matrix k = affine(kv_input, view(p, s.wk), view(p, s.bk));
  Matrix v = affine(kv_input, view(p, s.wv), view(p, s.bv));
  const Eigen::Index d = q.cols();
  const Eigen::Index dh = d / static_cast<Eigen::Index>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index tq = q.rows();
  const Eigen::Index tk = k.rows();
  Matrix context = Matrix::Zero(tq, d);
  std::vector<Matrix> weights;
  weights.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(h) * dh;
    Matrix w = Matrix::Zero(tq, tk);
    if (causal) {
      for (Eigen::Index i = 0; i < tq; ++i) {
        const Eigen::Index visible = std::min(i + 1, tk);
        Row scores = (k.block(0, c0, visible, dh) * q.block(i, c0, 1, dh).transpose())
                         .transpose() * scale;
        scores.array() -= scores.maxCoeff();
        scores = scores.array().exp();
        w.block(i, 0, 1, visible) = scores / scores.sum();
        context.block(i, c0, 1, dh) =
            w.block(i, 0, 1, visible) * v.block(0, c0, visible, dh);
      }
    } else {
      w = q.middleCols(c0, dh) * k.middleCols(c0, dh).transpose() * scale;
      for (Eigen::Index i = 0; i < tq; ++i) {
        w.row(i).array() -= w.row(i).maxCoeff();
        w.row(i) = w.row(i).array().exp();
        w.row(i) /= w.row(i).sum();
      }
      context.middleCols(c0, dh) = w * v.middleCols(c0, dh);
    }
    weights.push_back(std::move(w));
  }
  Matrix out = affine(context, view(p, s.wo), view(p, s.bo));
  if (cache != nullptr) {
    cache->query_input = query_input;
    cache->kv_input = kv_input;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->weights = std::move(weights);
    cache->context = std::move(context);
  }
  return out;
}

/// Returns (d query_input, d kv_input).
std::pair<Matrix, Matrix> attention_backward(std::span<const double> p, std::span<double> g,
                                             const AttentionSlots& s, std::size_t heads,
                                             const AttentionCache& cache, const Matrix& dy) {
  Matrix dcontext;
  affine_backward(cache.context, dy, view(p, s.wo), view(g, s.wo), view(g, s.bo), &dcontext);
  const Eigen::Index d = cache.q.cols();
  const Eigen::Index dh = d / static_cast<Eigen::Index>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix dq = Matrix::Zero(cache.q.rows(), d);
  Matrix dk = Matrix::Zero(cache.k.rows(), d);
  Matrix dv = Matrix::Zero(cache.v.rows(), d);
  for (std::size_t h = 0; h < heads; ++h) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(h) * dh;
    const Matrix& w = cache.weights[h];
    const Matrix dctx = dcontext.middleCols(c0, dh);
    const Matrix dw = dctx * cache.v.middleCols(c0, dh).transpose();
    dv.middleCols(c0, dh) = w.transpose() * dctx;
    Matrix dscores = w.array() * dw.array();
    const Eigen::VectorXd row_dot = dscores.rowwise().sum();
    dscores -= (w.array().colwise() * row_dot.array()).matrix();
    dscores *= scale;
    dq.middleCols(c0, dh) = dscores * cache.k.middleCols(c0, dh);
    dk.middleCols(c0, dh) = dscores.transpose() * cache.q.middleCols(c0, dh);
  }
  Matrix dquery, dkv, dkv_v;
  affine_backward(cache.query_input, dq, view(p, s.wq), view(g, s.wq), view(g, s.bq), &dquery);
  affine_backward(cache.kv_input, dk, view(p, s.wk), view(g, s.wk), view(g, s.bk), &dkv);
  affine_backward(cache.kv_input, dv, view(p, s.wv), view(g, s.wv), view(g, s.bv), &dkv_v);
  dkv += dkv_v;
  return {std::move(dquery), std::move(dkv)};
}

void check_tokens(std::span<const int> tokens, std::size_t vocab, std::size_t max_len) {
  if (tokens.empty()) throw DomainError("decoder input is empty");
  if (tokens.size() > max_len) {
    throw DomainError("decoder input length " + std::to_string(tokens.size()) +
                      " exceeds max_target_len " + std::to_string(max_len));
  }
  for (const int t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
      throw DomainError("token id " + std::to_string(t) + " outside vocabulary");
    }
  }
}

}  // namespace

TranslatorModel::TranslatorModel(TranslatorConfig config, TokenVocabulary vocabulary)
    : config_(config),
      vocabulary_(std::move(vocabulary)),
      layout_(config_, vocabulary_.size()),
      parameters_(layout_.parameter_count, 0.0) {
  initialize(config_.seed);
}

void TranslatorModel::set_parameters(std::vector<double> values) {
  if (values.size() != layout_.parameter_count) {
    throw DomainError("expected " + std::to_string(layout_.parameter_count) +
                      " parameters, got " + std::to_string(values.size()));
  }
  for (const double v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite parameter value");
  }
  parameters_ = std::move(values);
}

void TranslatorModel::initialize(std::uint64_t seed) {
  util::SeededRng rng(seed);
  for (const auto& slot : layout_.all) {
    auto t = tensor(slot);
    const std::string_view leaf = std::string_view(slot.name).substr(slot.name.rfind('.') + 1);
    const bool is_gain = leaf == "gain";
    const bool is_bias = leaf == "bias" || (leaf.size() == 2 && leaf[0] == 'b');
    if (is_gain) {
      t.setOnes();
    } else if (is_bias) {
      t.setZero();
    } else {
      // Tables (positions, embeddings) are indexed rows; scale them by width.
      const bool table = slot.name.ends_with("positions") || slot.name.ends_with("embedding");
      const double fan_in = table ? static_cast<double>(slot.cols) : static_cast<double>(slot.rows);
      const double bound = 1.0 / std::sqrt(fan_in);
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-bound, bound);
    }
  }
}

Eigen::Map<const Matrix> TranslatorModel::tensor(const TensorSlot& slot) const {
  return view(std::span<const double>(parameters_), slot);
}

Eigen::Map<Matrix> TranslatorModel::tensor(const TensorSlot& slot) {
  return view(std::span<double>(parameters_), slot);
}

Matrix TranslatorModel::encode_input(std::span<const double> spectrum) const {
  if (spectrum.size() != config_.spectrum_length) {
    throw DomainError("spectrum length " + std::to_string(spectrum.size()) +
                      " does not match model length " + std::to_string(config_.spectrum_length));
  }
  const auto w = tensor(layout_.input_weight);
  const auto b = tensor(layout_.input_bias);
  Matrix z = tensor(layout_.encoder_positions);
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    z.row(r) += spectrum[i] * w.row(0) + b.row(0);
  }
  return z;
}

namespace {

Matrix run_encoder(const TranslatorModel& m, std::span<const double> spectrum,
                   std::vector<EncoderLayerCache>* caches) {
  const auto p = m.parameters();
  const std::size_t heads = m.config().heads;
  Matrix x = m.encode_input(spectrum);
  for (std::size_t l = 0; l < m.layout().encoder.size(); ++l) {
    const auto& s = m.layout().encoder[l];
    EncoderLayerCache* c = caches != nullptr ? &(*caches)[l] : nullptr;
    const Matrix a = attention(p, s.attention, heads, x, x, false, c ? &c->attention : nullptr);
    const Matrix h1 = layer_norm(p, s.norm1, x + a, c ? &c->norm1 : nullptr);
    const Matrix f = feed_forward(p, s.ffn, h1, c ? &c->ffn : nullptr);
    x = layer_norm(p, s.norm2, h1 + f, c ? &c->norm2 : nullptr);
  }
  return x;
}

Matrix run_decoder(const TranslatorModel& m, const Matrix& memory, std::span<const int> tokens,
                   std::vector<DecoderLayerCache>* caches, Matrix* final_hidden) {
  const auto p = m.parameters();
  const auto& layout = m.layout();
  const std::size_t heads = m.config().heads;
  const auto embedding = m.tensor(layout.token_embedding);
  const auto positions = m.tensor(layout.decoder_positions);
  Matrix y(static_cast<Eigen::Index>(tokens.size()), embedding.cols());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    y.row(r) = embedding.row(tokens[t]) + positions.row(r);
  }
  for (std::size_t l = 0; l < layout.decoder.size(); ++l) {
    const auto& s = layout.decoder[l];
    DecoderLayerCache* c = caches != nullptr ? &(*caches)[l] : nullptr;
    const Matrix a = attention(p, s.self_attention, heads, y, y, true,
                               c ? &c->self_attention : nullptr);
    const Matrix h1 = layer_norm(p, s.norm1, y + a, c ? &c->norm1 : nullptr);
    const Matrix x = attention(p, s.cross_attention, heads, h1, memory, false,
                               c ? &c->cross_attention : nullptr);
    const Matrix h2 = layer_norm(p, s.norm2, h1 + x, c ? &c->norm2 : nullptr);
    const Matrix f = feed_forward(p, s.ffn, h2, c ? &c->ffn : nullptr);
    y = layer_norm(p, s.norm3, h2 + f, c ? &c->norm3 : nullptr);
  }
  if (final_hidden != nullptr) *final_hidden = y;
  return affine(y, m.tensor(layout.output_weight), m.tensor(layout.output_bias));
}

}  // namespace

Matrix TranslatorModel::encode(std::span<const double> spectrum) const {
  return run_encoder(*this, spectrum, nullptr);
}

Matrix TranslatorModel::decode_logits(const Matrix& memory, std::span<const int> tokens) const {
  check_tokens(tokens, vocabulary_.size(), config_.max_target_len);
  return run_decoder(*this, memory, tokens, nullptr, nullptr);
}

Matrix TranslatorModel::forward(std::span<const double> spectrum,
                                std::span<const int> decoder_input, ForwardCache& cache) const {
  check_tokens(decoder_input, vocabulary_.size(), config_.max_target_len);
  cache.spectrum.assign(spectrum.begin(), spectrum.end());
  cache.tokens.assign(decoder_input.begin(), decoder_input.end());
  cache.encoder.assign(layout_.encoder.size(), {});
  cache.decoder.assign(layout_.decoder.size(), {});
  cache.memory = run_encoder(*this, spectrum, &cache.encoder);
  return run_decoder(*this, cache.memory, decoder_input, &cache.decoder, &cache.decoder_output);
}

void TranslatorModel::backward(const ForwardCache& cache, const Matrix& logits_gradient,
                               std::span<double> gradient) const {
  if (gradient.size() != parameters_.size()) {
    throw DomainError("gradient buffer has the wrong size");
  }
  const std::span<const double> p = parameters_;
  const std::size_t heads = config_.heads;

  Matrix dy;
  affine_backward(cache.decoder_output, logits_gradient, tensor(layout_.output_weight),
                  view(gradient, layout_.output_weight), view(gradient, layout_.output_bias), &dy);

  Matrix dmemory = Matrix::Zero(cache.memory.rows(), cache.memory.cols());
  for (std::size_t l = layout_.decoder.size(); l-- > 0;) {
    const auto& s = layout_.decoder[l];
    const auto& c = cache.decoder[l];
    const Matrix dsum3 = layer_norm_backward(p, gradient, s.norm3, c.norm3, dy);
    Matrix dh2 = dsum3 + feed_forward_backward(p, gradient, s.ffn, c.ffn, dsum3);
    const Matrix dsum2 = layer_norm_backward(p, gradient, s.norm2, c.norm2, dh2);
    auto [dq_cross, dkv_cross] =
        attention_backward(p, gradient, s.cross_attention, heads, c.cross_attention, dsum2);
    dmemory += dkv_cross;
    const Matrix dh1 = dsum2 + dq_cross;
    const Matrix dsum1 = layer_norm_backward(p, gradient, s.norm1, c.norm1, dh1);
    auto [dq_self, dkv_self] =
        attention_backward(p, gradient, s.self_attention, heads, c.self_attention, dsum1);
    dy = dsum1 + dq_self + dkv_self;
  }
  auto dembedding = view(gradient, layout_.token_embedding);
  auto dpositions = view(gradient, layout_.decoder_positions);
  for (std::size_t t = 0; t < cache.tokens.size(); ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    dembedding.row(cache.tokens[t]) += dy.row(r);
    dpositions.row(r) += dy.row(r);
  }

  Matrix dx = std::move(dmemory);
  for (std::size_t l = layout_.encoder.size(); l-- > 0;) {
    const auto& s = layout_.encoder[l];
    const auto& c = cache.encoder[l];
    const Matrix dsum2 = layer_norm_backward(p, gradient, s.norm2, c.norm2, dx);
    const Matrix dh1 = dsum2 + feed_forward_backward(p, gradient, s.ffn, c.ffn, dsum2);
    const Matrix dsum1 = layer_norm_backward(p, gradient, s.norm1, c.norm1, dh1);
    auto [dq, dkv] = attention_backward(p, gradient, s.attention, heads, c.attention, dsum1);
    dx = dsum1 + dq + dkv;
  }
  view(gradient, layout_.encoder_positions) += dx;
  auto dw = view(gradient, layout_.input_weight);
  auto db = view(gradient, layout_.input_bias);
  for (std::size_t i = 0; i < cache.spectrum.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    dw.row(0) += cache.spectrum[i] * dx.row(r);
    db.row(0) += dx.row(r);
  }
}

TeacherForcing teacher_forcing(const TokenVocabulary& vocabulary, std::string_view smiles) {
  TeacherForcing out;
  const auto ids = vocabulary.encode(smiles);
  out.input.push_back(TokenVocabulary::kBos);
  out.input.insert(out.input.end(), ids.begin(), ids.end());
  out.target = ids;
  out.target.push_back(TokenVocabulary::kEos);
  return out;
}

}  // namespace ir_agent::translator
