// Copyright 2026 The wugbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wugbench/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "wugbench/adam.hpp"
#include "wugbench/error.hpp"

namespace wugbench {
namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

constexpr double kLayerNormEps = 1e-5;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// ----------------------------------------------------------------- kernels

struct LnCache {
  Mat xhat;
  Vec inv_std;
};

Mat layer_norm(const Mat& x, const Mat& g, const Mat& b, LnCache& cache) {
  const auto n = static_cast<double>(x.cols());
  cache.xhat.resize(x.rows(), x.cols());
  cache.inv_std.resize(x.rows());
  Mat out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).sum() / n;
    const double var = (x.row(r).array() - mu).square().sum() / n;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inv_std(r) = inv;
    cache.xhat.row(r) = (x.row(r).array() - mu) * inv;
    out.row(r) = cache.xhat.row(r).array() * g.row(0).array() + b.row(0).array();
  }
  return out;
}

Mat layer_norm_backward(const Mat& dy, const LnCache& c, const Mat& g, Mat* dg, Mat* db) {
  const auto n = static_cast<double>(dy.cols());
  if (dg) {
    *dg += dy.cwiseProduct(c.xhat).colwise().sum();
    *db += dy.colwise().sum();
  }
  Mat dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const Eigen::RowVectorXd dxhat = dy.row(r).cwiseProduct(g.row(0));
    const double mean_d = dxhat.sum() / n;
    const double mean_dx = dxhat.dot(c.xhat.row(r)) / n;
    dx.row(r) = c.inv_std(r) *
                (dxhat.array() - mean_d - c.xhat.row(r).array() * mean_dx).matrix();
  }
  return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

void add_row(Mat& m, const Mat& row) { m.rowwise() += row.row(0); }

void softmax_rows(Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

// ----------------------------------------------------------------- forward

struct LayerCache {
  Mat x, q, k, v;
  std::vector<Mat> att;
  Mat ctx;
  LnCache ln1;
  Mat h1, ff_pre, ff_act;
  LnCache ln2;
};

struct EncoderTrace {
  LnCache emb_ln;
  std::vector<LayerCache> layers;
  Mat out;  // T x d
};

Mat embed(const BaseParams& p, const NovelParams* novel, std::span<const TokenId> ids) {
  const auto d = p.tok_emb.cols();
  const auto vb = static_cast<TokenId>(p.tok_emb.rows());
  Mat x(static_cast<Eigen::Index>(ids.size()), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (ids[i] < vb) {
      x.row(r) = p.tok_emb.row(static_cast<Eigen::Index>(ids[i]));
    } else {
      x.row(r) = novel->rows.row(static_cast<Eigen::Index>(ids[i] - vb));
    }
    x.row(r) += p.pos_emb.row(r);
  }
  return x;
}

EncoderTrace encode_forward(const BaseParams& p, const NovelParams* novel, const ModelConfig& cfg,
                            std::span<const TokenId> ids) {
  EncoderTrace tr;
  Mat h = layer_norm(embed(p, novel, ids), p.emb_ln_g, p.emb_ln_b, tr.emb_ln);
  const auto heads = static_cast<Eigen::Index>(cfg.n_heads);
  const auto hd = static_cast<Eigen::Index>(cfg.model_dim / cfg.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  tr.layers.resize(p.layers.size());
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const auto& L = p.layers[li];
    auto& c = tr.layers[li];
    c.x = h;
    c.q = h * L.wq;
    add_row(c.q, L.bq);
    c.k = h * L.wk;
    add_row(c.k, L.bk);
    c.v = h * L.wv;
    add_row(c.v, L.bv);
    c.ctx.resize(h.rows(), h.cols());
    c.att.resize(static_cast<std::size_t>(heads));
    for (Eigen::Index hi = 0; hi < heads; ++hi) {
      Mat s = c.q.middleCols(hi * hd, hd) * c.k.middleCols(hi * hd, hd).transpose() * scale;
      softmax_rows(s);
      c.ctx.middleCols(hi * hd, hd) = s * c.v.middleCols(hi * hd, hd);
      c.att[static_cast<std::size_t>(hi)] = std::move(s);
    }
    Mat a = c.ctx * L.wo;
    add_row(a, L.bo);
    c.h1 = layer_norm(h + a, L.ln1_g, L.ln1_b, c.ln1);
    c.ff_pre = c.h1 * L.w1;
    add_row(c.ff_pre, L.b1);
    c.ff_act = c.ff_pre.unaryExpr([](double z) { return gelu(z); });
    Mat f = c.ff_act * L.w2;
    add_row(f, L.b2);
    h = layer_norm(c.h1 + f, L.ln2_g, L.ln2_b, c.ln2);
  }
  tr.out = std::move(h);
  return tr;
}

struct HeadTrace {
  Mat hp, u;
  LnCache ln;
  Mat t;
  Mat logits;  // p x (V + n)
};

HeadTrace head_forward(const BaseParams& p, const NovelParams* novel, const Mat& enc,
                       std::span<const std::size_t> positions) {
  HeadTrace ht;
  ht.hp.resize(static_cast<Eigen::Index>(positions.size()), enc.cols());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    ht.hp.row(static_cast<Eigen::Index>(i)) = enc.row(static_cast<Eigen::Index>(positions[i]));
  }
  ht.u = ht.hp * p.head_w;
  add_row(ht.u, p.head_b);
  const Mat gu = ht.u.unaryExpr([](double z) { return gelu(z); });
  ht.t = layer_norm(gu, p.head_ln_g, p.head_ln_b, ht.ln);
  const auto vb = p.tok_emb.rows();
  const Eigen::Index n = novel ? novel->rows.rows() : 0;
  ht.logits.resize(ht.t.rows(), vb + n);
  ht.logits.leftCols(vb) = ht.t * p.tok_emb.transpose();
  ht.logits.leftCols(vb).rowwise() += p.out_bias.row(0);
  if (n > 0) {
    ht.logits.rightCols(n) = ht.t * novel->rows.transpose();
    ht.logits.rightCols(n).rowwise() += novel->bias.row(0);
  }
  return ht;
}

// ---------------------------------------------------------------- backward

void encoder_backward(const BaseParams& p, const ModelConfig& cfg,
                      std::span<const TokenId> ids, const EncoderTrace& tr, Mat dh,
                      BaseParams* gb, NovelParams* gn) {
  const auto heads = static_cast<Eigen::Index>(cfg.n_heads);
  const auto hd = static_cast<Eigen::Index>(cfg.model_dim / cfg.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const auto& L = p.layers[li];
    const auto& c = tr.layers[li];
    LayerParams* G = gb ? &gb->layers[li] : nullptr;

    const Mat dr2 = layer_norm_backward(dh, c.ln2, L.ln2_g, G ? &G->ln2_g : nullptr,
                                        G ? &G->ln2_b : nullptr);
    if (G) {
      G->w2 += c.ff_act.transpose() * dr2;
      G->b2 += dr2.colwise().sum();
    }
    Mat dpre = dr2 * L.w2.transpose();
    dpre.array() *= c.ff_pre.unaryExpr([](double z) { return gelu_grad(z); }).array();
    if (G) {
      G->w1 += c.h1.transpose() * dpre;
      G->b1 += dpre.colwise().sum();
    }
    const Mat dh1 = dr2 + dpre * L.w1.transpose();

    const Mat dr1 = layer_norm_backward(dh1, c.ln1, L.ln1_g, G ? &G->ln1_g : nullptr,
                                        G ? &G->ln1_b : nullptr);
    if (G) {
      G->wo += c.ctx.transpose() * dr1;
      G->bo += dr1.colwise().sum();
    }
    const Mat dctx = dr1 * L.wo.transpose();
    Mat dq(dctx.rows(), dctx.cols()), dk(dctx.rows(), dctx.cols()), dv(dctx.rows(), dctx.cols());
    for (Eigen::Index hi = 0; hi < heads; ++hi) {
      const Mat& A = c.att[static_cast<std::size_t>(hi)];
      const auto dc = dctx.middleCols(hi * hd, hd);
      const Mat dA = dc * c.v.middleCols(hi * hd, hd).transpose();
      dv.middleCols(hi * hd, hd) = A.transpose() * dc;
      Mat dS = A.cwiseProduct(dA);
      const Vec rs = dS.rowwise().sum();
      dS -= A.cwiseProduct(rs.replicate(1, A.cols()));
      dq.middleCols(hi * hd, hd) = dS * c.k.middleCols(hi * hd, hd) * scale;
      dk.middleCols(hi * hd, hd) = dS.transpose() * c.q.middleCols(hi * hd, hd) * scale;
    }
    if (G) {
      G->wq += c.x.transpose() * dq;
      G->bq += dq.colwise().sum();
      G->wk += c.x.transpose() * dk;
      G->bk += dk.colwise().sum();
      G->wv += c.x.transpose() * dv;
      G->bv += dv.colwise().sum();
    }
    dh = dr1 + dq * L.wq.transpose() + dk * L.wk.transpose() + dv * L.wv.transpose();
  }
  const Mat dx0 = layer_norm_backward(dh, tr.emb_ln, p.emb_ln_g, gb ? &gb->emb_ln_g : nullptr,
                                      gb ? &gb->emb_ln_b : nullptr);
  const auto vb = static_cast<TokenId>(p.tok_emb.rows());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (ids[i] < vb) {
      if (gb) gb->tok_emb.row(static_cast<Eigen::Index>(ids[i])) += dx0.row(r);
    } else if (gn) {
      gn->rows.row(static_cast<Eigen::Index>(ids[i] - vb)) += dx0.row(r);
    }
    if (gb) gb->pos_emb.row(r) += dx0.row(r);
  }
}

// ---------------------------------------------------------------- checkpoint

constexpr char kMagic[8] = {'W', 'U', 'G', 'B', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint32_t kByteOrderMark = 0x01020304u;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  std::uint64_t u64() { return uint_n<std::uint64_t>(8); }
  std::uint32_t u32() { return uint_n<std::uint32_t>(4); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  template <class T>
  T uint_n(int n) {
    need(static_cast<std::size_t>(n));
    T v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(b_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw InputError("checkpoint: truncated file");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["n_layers"] = c.n_layers;
  j["n_heads"] = c.n_heads;
  j["model_dim"] = c.model_dim;
  j["ffn_dim"] = c.ffn_dim;
  j["max_sequence_length"] = c.max_sequence_length;
  j["mlm_mask_rate"] = c.mlm_mask_rate;
  j["vocabulary"] = c.vocabulary;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.model_dim = j.at("model_dim").get<std::size_t>();
  c.ffn_dim = j.at("ffn_dim").get<std::size_t>();
  c.max_sequence_length = j.at("max_sequence_length").get<std::size_t>();
  c.mlm_mask_rate = j.at("mlm_mask_rate").get<double>();
  c.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  return c;
}

std::vector<TokenId> encode_tokens(const Vocabulary& vocab, const ModelConfig& cfg,
                                   const TokenSequence& seq) {
  if (seq.tokens.size() + 2 > cfg.max_sequence_length) {
    throw InputError("sequence of " + std::to_string(seq.tokens.size()) +
                     " tokens exceeds max_sequence_length " +
                     std::to_string(cfg.max_sequence_length) + " (with start/end): '" +
                     seq.str() + "'");
  }
  std::vector<TokenId> ids;
  ids.reserve(seq.tokens.size() + 2);
  ids.push_back(vocab.id_of(kStartToken));
  for (const auto& t : seq.tokens) ids.push_back(vocab.id_of(t));
  ids.push_back(vocab.id_of(kEndToken));
  return ids;
}

}  // namespace

// ===================================================================== config

void ModelConfig::validate() const {
  if (n_layers < 1 || n_heads < 1 || model_dim < 1 || ffn_dim < 1) {
    throw InputError("model config: layer, head, and dimension counts must be >= 1");
  }
  if (model_dim % n_heads != 0) {
    throw InputError("model config: model_dim must be divisible by n_heads");
  }
  if (max_sequence_length < 3) throw InputError("model config: max_sequence_length must be >= 3");
  if (!(mlm_mask_rate > 0.0 && mlm_mask_rate <= 1.0)) {
    throw InputError("model config: mlm_mask_rate must lie in (0, 1]");
  }
  for (auto reserved : {kMaskToken, kStartToken, kEndToken, kUnknownToken}) {
    if (std::count(vocabulary.begin(), vocabulary.end(), reserved) != 1) {
      throw InputError("model config: vocabulary must contain '" + std::string(reserved) +
                       "' exactly once");
    }
  }
  Vocabulary check(vocabulary);  // rejects duplicates
}

BaseParams BaseParams::zeros(const ModelConfig& cfg) {
  const auto V = static_cast<Eigen::Index>(cfg.vocabulary.size());
  const auto d = static_cast<Eigen::Index>(cfg.model_dim);
  const auto f = static_cast<Eigen::Index>(cfg.ffn_dim);
  const auto L = static_cast<Eigen::Index>(cfg.max_sequence_length);
  BaseParams p;
  p.tok_emb = Mat::Zero(V, d);
  p.pos_emb = Mat::Zero(L, d);
  p.emb_ln_g = Mat::Zero(1, d);
  p.emb_ln_b = Mat::Zero(1, d);
  p.layers.resize(cfg.n_layers);
  for (auto& l : p.layers) {
    for (auto* m : {&l.wq, &l.wk, &l.wv, &l.wo}) *m = Mat::Zero(d, d);
    for (auto* m : {&l.bq, &l.bk, &l.bv, &l.bo, &l.ln1_g, &l.ln1_b, &l.b2, &l.ln2_g, &l.ln2_b}) {
      *m = Mat::Zero(1, d);
    }
    l.w1 = Mat::Zero(d, f);
    l.b1 = Mat::Zero(1, f);
    l.w2 = Mat::Zero(f, d);
  }
  p.head_w = Mat::Zero(d, d);
  p.head_b = Mat::Zero(1, d);
  p.head_ln_g = Mat::Zero(1, d);
  p.head_ln_b = Mat::Zero(1, d);
  p.out_bias = Mat::Zero(1, V);
  return p;
}

bool operator==(const BaseParams& a, const BaseParams& b) {
  std::vector<const Mat*> av, bv;
  a.for_each([&](const std::string&, const Mat& m) { av.push_back(&m); });
  b.for_each([&](const std::string&, const Mat& m) { bv.push_back(&m); });
  if (av.size() != bv.size()) return false;
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (av[i]->rows() != bv[i]->rows() || av[i]->cols() != bv[i]->cols()) return false;
    if (!std::equal(av[i]->data(), av[i]->data() + av[i]->size(), bv[i]->data(),
                    [](double x, double y) {
                      return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
                    })) {
      return false;
    }
  }
  return true;
}

// ===================================================================== MaskedLM

MaskedLM::MaskedLM(ModelConfig cfg, BaseParams params)
    : cfg_(std::move(cfg)), params_(std::move(params)) {
  cfg_.validate();
  vocab_ = Vocabulary(cfg_.vocabulary);
  const BaseParams shape = BaseParams::zeros(cfg_);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> want, got;
  shape.for_each([&](const std::string&, const Mat& m) { want.emplace_back(m.rows(), m.cols()); });
  params_.for_each([&](const std::string&, const Mat& m) { got.emplace_back(m.rows(), m.cols()); });
  if (want != got) throw InputError("model parameters do not match the configuration shape");
}

MaskedLM MaskedLM::initialize(const ModelConfig& cfg, std::uint64_t seed, double init_std) {
  cfg.validate();
  BaseParams p = BaseParams::zeros(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_std);
  p.for_each([&](const std::string& name, Mat& m) {
    const bool gain = name.ends_with("_g");
    const bool bias = m.rows() == 1 && !gain;
    if (gain) {
      m.setOnes();
    } else if (!bias) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    }
  });
  return MaskedLM(cfg, std::move(p));
}

std::string MaskedLM::serialize() const {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, kByteOrderMark);
  const std::string cfg = config_to_json(cfg_).dump();
  put_u64(out, cfg.size());
  out += cfg;
  std::size_t count = 0;
  params_.for_each([&](const std::string&, const Mat&) { ++count; });
  put_u64(out, count);
  params_.for_each([&](const std::string& name, const Mat& m) {
    put_u64(out, name.size());
    out += name;
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>(m(r, c)));
    }
  });
  return out;
}

MaskedLM MaskedLM::deserialize(std::string_view bytes) {
  Reader in(bytes);
  if (in.bytes(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw InputError("checkpoint: bad magic");
  }
  if (const auto v = in.u32(); v != kCheckpointVersion) {
    throw InputError("checkpoint: unsupported version " + std::to_string(v));
  }
  if (in.u32() != kByteOrderMark) throw InputError("checkpoint: bad byte-order mark");
  const auto cfg_len = in.u64();
  ModelConfig cfg;
  try {
    cfg = config_from_json(nlohmann::json::parse(in.bytes(cfg_len)));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint: bad config block: ") + e.what());
  }
  cfg.validate();
  BaseParams p = BaseParams::zeros(cfg);
  std::vector<std::pair<std::string, Mat*>> slots;
  p.for_each([&](const std::string& name, Mat& m) { slots.emplace_back(name, &m); });
  if (in.u64() != slots.size()) throw InputError("checkpoint: tensor count mismatch");
  for (auto& [name, m] : slots) {
    const auto len = in.u64();
    if (in.bytes(len) != name) throw InputError("checkpoint: expected tensor '" + name + "'");
    const auto rows = in.u64();
    const auto cols = in.u64();
    if (rows != static_cast<std::uint64_t>(m->rows()) ||
        cols != static_cast<std::uint64_t>(m->cols())) {
      throw InputError("checkpoint: tensor '" + name + "' has wrong shape");
    }
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = std::bit_cast<double>(in.u64());
    }
  }
  if (!in.done()) throw InputError("checkpoint: trailing bytes");
  return MaskedLM(std::move(cfg), std::move(p));
}

void MaskedLM::save(const std::string& path) const {
  const std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing checkpoint '" + path + "'");
}

MaskedLM MaskedLM::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

// ============================================================== ExtendedModel

ExtendedModel::ExtendedModel(const MaskedLM& base) : base_(&base) {
  novel_.rows = Mat::Zero(0, static_cast<Eigen::Index>(base.config().model_dim));
  novel_.bias = Mat::Zero(1, 0);
}

TokenId ExtendedModel::id_of(std::string_view token) const {
  if (auto id = base_->vocabulary().find(token)) return *id;
  for (std::size_t i = 0; i < novel_names_.size(); ++i) {
    if (novel_names_[i] == token) return base_vocab_size() + i;
  }
  throw InputError("unknown token '" + std::string(token) + "'");
}

std::string ExtendedModel::token(TokenId id) const {
  if (id < base_vocab_size()) return base_->vocabulary().token(id);
  return novel_names_.at(id - base_vocab_size());
}

std::vector<TokenId> ExtendedModel::extend_vocab(std::span<const std::string> names,
                                                 std::uint64_t seed) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto& n = names[i];
    if (n.empty() || is_reserved_token(n) || base_->vocabulary().contains(n) ||
        std::find(novel_names_.begin(), novel_names_.end(), n) != novel_names_.end() ||
        std::find(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(i), n) !=
            names.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw InputError("extend_vocab: token name '" + n + "' collides with the vocabulary");
    }
  }
  const Mat& E = base_->params().tok_emb;
  const double mean = E.mean();
  const double sd = std::sqrt((E.array() - mean).square().sum() / static_cast<double>(E.size()));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(mean, sd);

  const auto d = E.cols();
  const auto old_n = novel_.rows.rows();
  const auto add = static_cast<Eigen::Index>(names.size());
  Mat rows(old_n + add, d);
  rows.topRows(old_n) = novel_.rows;
  for (Eigen::Index r = old_n; r < old_n + add; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) rows(r, c) = normal(rng);
  }
  Mat bias = Mat::Zero(1, old_n + add);
  bias.leftCols(old_n) = novel_.bias;
  novel_.rows = std::move(rows);
  novel_.bias = std::move(bias);

  std::vector<TokenId> ids;
  for (const auto& n : names) {
    ids.push_back(vocab_size());
    novel_names_.push_back(n);
  }
  return ids;
}

std::vector<TokenId> ExtendedModel::encode(const TokenSequence& seq) const {
  const auto& cfg = base_->config();
  if (seq.tokens.size() + 2 > cfg.max_sequence_length) {
    throw InputError("sequence exceeds max_sequence_length: '" + seq.str() + "'");
  }
  std::vector<TokenId> ids;
  ids.reserve(seq.tokens.size() + 2);
  ids.push_back(base_->vocabulary().id_of(kStartToken));
  for (const auto& t : seq.tokens) ids.push_back(id_of(t));
  ids.push_back(base_->vocabulary().id_of(kEndToken));
  return ids;
}

Eigen::MatrixXd ExtendedModel::forward(const TokenSequence& seq) const {
  const auto ids = encode(seq);
  const auto tr = encode_forward(base_->params(), &novel_, base_->config(), ids);
  std::vector<std::size_t> positions(seq.tokens.size());
  std::iota(positions.begin(), positions.end(), std::size_t{1});
  auto ht = head_forward(base_->params(), &novel_, tr.out, positions);
  softmax_rows(ht.logits);
  return ht.logits;
}

Eigen::VectorXd ExtendedModel::logits_at(const TokenSequence& seq, std::size_t position) const {
  if (position >= seq.tokens.size()) throw UsageError("position out of range");
  const auto ids = encode(seq);
  const auto tr = encode_forward(base_->params(), &novel_, base_->config(), ids);
  const std::size_t pos[] = {position + 1};
  const auto ht = head_forward(base_->params(), &novel_, tr.out, pos);
  return ht.logits.row(0).transpose();
}

double ExtendedModel::token_probability(const TokenSequence& seq, std::size_t position,
                                        std::string_view token) const {
  if (position >= seq.tokens.size() || seq.tokens[position] != kMaskToken) {
    throw UsageError("token_probability: position " + std::to_string(position) +
                     " is not a [MASK] in '" + seq.str() + "'");
  }
  const TokenId target = id_of(token);
  const Vec z = logits_at(seq, position);
  const double mx = z.maxCoeff();
  const double lse = mx + std::log((z.array() - mx).exp().sum());
  return std::exp(z(static_cast<Eigen::Index>(target)) - lse);
}

LossAndGrads ExtendedModel::mlm_loss_and_grads(std::span<const TrainingInstance> batch) const {
  if (batch.empty()) throw UsageError("mlm_loss_and_grads: empty batch");
  LossAndGrads out;
  out.grads.rows = Mat::Zero(novel_.rows.rows(), novel_.rows.cols());
  out.grads.bias = Mat::Zero(1, novel_.bias.cols());
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& inst : batch) {
    if (inst.target_position >= inst.tokens.tokens.size() ||
        inst.tokens.tokens[inst.target_position] != kMaskToken) {
      throw UsageError("training instance target position does not hold [MASK]");
    }
    const TokenId target = id_of(inst.target);
    if (!is_novel(target)) {
      throw UsageError("training instance targets base token '" + inst.target + "'");
    }
    const auto ids = encode(inst.tokens);
    const std::size_t pos[] = {inst.target_position + 1};
    const TokenId tgt[] = {target};
    out.loss += scale * detail::sequence_loss_and_grads(base_->params(), &novel_,
                                                        base_->config(), ids, pos, tgt, scale,
                                                        nullptr, &out.grads);
  }
  return out;
}

Eigen::VectorXd ExtendedModel::embedding_of(std::string_view token) const {
  const TokenId id = id_of(token);
  if (is_novel(id)) return novel_.rows.row(static_cast<Eigen::Index>(id - base_vocab_size())).transpose();
  return base_->params().tok_emb.row(static_cast<Eigen::Index>(id)).transpose();
}

// =================================================================== internal

namespace detail {

double sequence_loss_and_grads(const BaseParams& base, const NovelParams* novel,
                               const ModelConfig& cfg, std::span<const TokenId> ids,
                               std::span<const std::size_t> positions,
                               std::span<const TokenId> targets, double scale,
                               BaseParams* base_grads, NovelParams* novel_grads) {
  const auto tr = encode_forward(base, novel, cfg, ids);
  auto ht = head_forward(base, novel, tr.out, positions);
  const auto vb = base.tok_emb.rows();

  double loss = 0.0;
  Mat dlogits = ht.logits;
  for (Eigen::Index r = 0; r < dlogits.rows(); ++r) {
    const double mx = dlogits.row(r).maxCoeff();
    const double lse = mx + std::log((dlogits.row(r).array() - mx).exp().sum());
    const auto t = static_cast<Eigen::Index>(targets[static_cast<std::size_t>(r)]);
    loss -= dlogits(r, t) - lse;
    dlogits.row(r) = (dlogits.row(r).array() - lse).exp();
    dlogits(r, t) -= 1.0;
  }
  dlogits *= scale;

  const Eigen::Index n = novel ? novel->rows.rows() : 0;
  const auto dl_base = dlogits.leftCols(vb);
  Mat dt = dl_base * base.tok_emb;
  if (n > 0) dt += dlogits.rightCols(n) * novel->rows;
  if (base_grads) {
    base_grads->tok_emb += dl_base.transpose() * ht.t;
    base_grads->out_bias += dl_base.colwise().sum();
  }
  if (novel_grads && n > 0) {
    novel_grads->rows += dlogits.rightCols(n).transpose() * ht.t;
    novel_grads->bias += dlogits.rightCols(n).colwise().sum();
  }

  // Only novel rows in the input need the encoder path when base grads are off.
  bool need_encoder = base_grads != nullptr;
  if (!need_encoder && novel_grads) {
    need_encoder = std::any_of(ids.begin(), ids.end(),
                               [&](TokenId id) { return id >= static_cast<TokenId>(vb); });
  }
  if (!need_encoder) return loss;

  Mat du = layer_norm_backward(dt, ht.ln, base.head_ln_g,
                               base_grads ? &base_grads->head_ln_g : nullptr,
                               base_grads ? &base_grads->head_ln_b : nullptr);
  du.array() *= ht.u.unaryExpr([](double z) { return gelu_grad(z); }).array();
  if (base_grads) {
    base_grads->head_w += ht.hp.transpose() * du;
    base_grads->head_b += du.colwise().sum();
  }
  const Mat dhp = du * base.head_w.transpose();
  Mat dh = Mat::Zero(tr.out.rows(), tr.out.cols());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    dh.row(static_cast<Eigen::Index>(positions[i])) += dhp.row(static_cast<Eigen::Index>(i));
  }
  encoder_backward(base, cfg, ids, tr, std::move(dh), base_grads, novel_grads);
  return loss;
}

}  // namespace detail

// ================================================================= pretraining

PretrainResult pretrain(std::span<const TokenSequence> corpus, const ModelConfig& cfg,
                        std::uint64_t seed, const PretrainOptions& opts) {
  if (corpus.empty()) throw InputError("pretrain: empty corpus");
  if (opts.epochs < 1 || opts.batch_size < 1) {
    throw UsageError("pretrain: epochs and batch_size must be >= 1");
  }
  cfg.validate();
  const Vocabulary vocab(cfg.vocabulary);

  std::vector<bool> maskable(vocab.size(), true);
  for (auto reserved : {kMaskToken, kStartToken, kEndToken, kUnknownToken}) {
    maskable[vocab.id_of(reserved)] = false;
  }
  for (const auto& w : opts.unmaskable) {
    if (auto id = vocab.find(w)) maskable[*id] = false;
  }

  std::vector<std::vector<TokenId>> encoded;
  encoded.reserve(corpus.size());
  for (const auto& s : corpus) encoded.push_back(encode_tokens(vocab, cfg, s));

  MaskedLM model = MaskedLM::initialize(cfg, seed, opts.init_std);
  BaseParams& params = model.mutable_params();
  BaseParams grads = BaseParams::zeros(cfg);

  std::vector<Mat*> decay_p, plain_p;
  std::vector<const Mat*> decay_g, plain_g;
  {
    std::vector<Mat*> ps, gs;
    params.for_each([&](const std::string&, Mat& m) { ps.push_back(&m); });
    grads.for_each([&](const std::string&, Mat& m) { gs.push_back(&m); });
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps[i]->rows() > 1) {
        decay_p.push_back(ps[i]);
        decay_g.push_back(gs[i]);
      } else {
        plain_p.push_back(ps[i]);
        plain_g.push_back(gs[i]);
      }
    }
  }
  Adam decay_opt({opts.learning_rate, 0.9, 0.999, 1e-8, opts.weight_decay});
  Adam plain_opt({opts.learning_rate, 0.9, 0.999, 1e-8, 0.0});

  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const TokenId mask_id = vocab.id_of(kMaskToken);

  const std::size_t steps_per_epoch = (encoded.size() + opts.batch_size - 1) / opts.batch_size;
  const std::size_t total_steps = steps_per_epoch * opts.epochs;
  const std::size_t warmup = std::max<std::size_t>(1, total_steps / 20);
  std::size_t step = 0;

  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  struct Masked {
    std::vector<TokenId> ids;
    std::vector<std::size_t> positions;
    std::vector<TokenId> targets;
  };

  PretrainResult result{MaskedLM(cfg, BaseParams::zeros(cfg)), {}, 0.0};
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_targets = 0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      const std::size_t stop = std::min(order.size(), start + opts.batch_size);
      std::vector<Masked> batch;
      std::size_t n_targets = 0;
      for (std::size_t i = start; i < stop; ++i) {
        const auto& ids = encoded[order[i]];
        Masked m{ids, {}, {}};
        std::vector<std::size_t> content;
        for (std::size_t p = 0; p < ids.size(); ++p) {
          if (maskable[ids[p]]) content.push_back(p);
        }
        if (content.empty()) continue;
        for (auto p : content) {
          if (unif(rng) < cfg.mlm_mask_rate) m.positions.push_back(p);
        }
        if (m.positions.empty()) {
          std::uniform_int_distribution<std::size_t> pick(0, content.size() - 1);
          m.positions.push_back(content[pick(rng)]);
        }
        for (auto p : m.positions) {
          m.targets.push_back(m.ids[p]);
          m.ids[p] = mask_id;
        }
        n_targets += m.positions.size();
        batch.push_back(std::move(m));
      }
      if (batch.empty()) continue;

      grads.for_each([](const std::string&, Mat& g) { g.setZero(); });
      const double scale = 1.0 / static_cast<double>(n_targets);
      double batch_loss = 0.0;
      for (const auto& m : batch) {
        batch_loss += detail::sequence_loss_and_grads(params, nullptr, cfg, m.ids, m.positions,
                                                      m.targets, scale, &grads, nullptr);
      }
      if (!std::isfinite(batch_loss)) throw NumericError("pretrain: non-finite loss");
      epoch_loss += batch_loss;
      epoch_targets += n_targets;

      ++step;
      const double lr_scale =
          step <= warmup ? static_cast<double>(step) / static_cast<double>(warmup)
                         : std::max(0.0, static_cast<double>(total_steps - step) /
                                             static_cast<double>(total_steps - warmup));
      decay_opt.set_learning_rate(opts.learning_rate * lr_scale);
      plain_opt.set_learning_rate(opts.learning_rate * lr_scale);
      decay_opt.step(decay_p, decay_g);
      plain_opt.step(plain_p, plain_g);
    }
    const double mean_loss = epoch_targets ? epoch_loss / static_cast<double>(epoch_targets) : 0.0;
    result.epoch_losses.push_back(mean_loss);
    if (opts.on_epoch) opts.on_epoch(epoch, mean_loss);
  }
  result.final_loss = result.epoch_losses.back();
  result.model = std::move(model);
  return result;
}

}  // namespace wugbench
