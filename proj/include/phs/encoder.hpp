#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phs/util.hpp"

namespace phs {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Named parameter with its gradient accumulator.
struct Tensor {
  std::string name;
  Mat w;
  Mat g;

  Tensor(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), w(Mat::Zero(rows, cols)), g(Mat::Zero(rows, cols)) {}

  void zero_grad() { g.setZero(); }
};

struct EncoderConfig {
  int vocab_size = 0;
  int hidden = 64;
  int layers = 2;
  int heads = 4;
  int ffn_dim = 256;
  int max_seq_len = 128;
  int type_vocab = 2;
  double ln_eps = 1e-5;
  double init_std = 0.02;
  std::uint64_t seed = 0;

  void validate() const {
    if (vocab_size < 6) throw DataError("encoder: vocab_size must cover specials");
    if (hidden < 1 || layers < 1 || heads < 1 || ffn_dim < 1) {
      throw DataError("encoder: dimensions must be positive");
    }
    if (hidden % heads != 0) {
      throw DataError(strcat_msg("encoder: hidden (", hidden,
                                 ") must be divisible by heads (", heads, ")"));
    }
    if (max_seq_len < 4) throw DataError("encoder: max_seq_len must be >= 4");
  }
};

namespace nn {

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865476));
}

inline double gelu_grad(double x) {
  const double phi = 0.5 * (1.0 + std::erf(x * 0.7071067811865476));
  const double pdf = 0.3989422804014327 * std::exp(-0.5 * x * x);
  return phi + x * pdf;
}

// Row-wise softmax in place, numerically stabilized.
inline void softmax_rows(Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

struct LnCache {
  Mat xhat;      // normalized rows
  Vec inv_std;   // per row
};

inline Mat layer_norm(const Mat& x, const Tensor& gamma, const Tensor& beta,
                      double eps, LnCache* cache) {
  const auto cols = x.cols();
  Mat out(x.rows(), cols);
  cache->xhat.resize(x.rows(), cols);
  cache->inv_std.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mean = x.row(r).mean();
    double var = (x.row(r).array() - mean).square().mean();
    double inv = 1.0 / std::sqrt(var + eps);
    cache->inv_std(r) = inv;
    cache->xhat.row(r) = (x.row(r).array() - mean) * inv;
    out.row(r) = cache->xhat.row(r).cwiseProduct(gamma.w.row(0)) + beta.w.row(0);
  }
  return out;
}

inline Mat layer_norm_backward(const Mat& dy, const LnCache& cache,
                               Tensor& gamma, Tensor& beta) {
  const auto cols = dy.cols();
  Mat dx(dy.rows(), cols);
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    gamma.g.row(0) += dy.row(r).cwiseProduct(cache.xhat.row(r));
    beta.g.row(0) += dy.row(r);
    Eigen::RowVectorXd dxhat = dy.row(r).cwiseProduct(gamma.w.row(0));
    double m1 = dxhat.mean();
    double m2 = dxhat.cwiseProduct(cache.xhat.row(r)).mean();
    dx.row(r) = (dxhat.array() - m1 - cache.xhat.row(r).array() * m2) *
                cache.inv_std(r);
  }
  return dx;
}

}  // namespace nn

// ---------------------------------------------------------------------------
// Two-ish layer BERT-style encoder at desk scale: learned token/position/
// segment embeddings with LayerNorm, multi-head self-attention blocks with
// residuals, GELU feed-forward, all in doubles with hand-written backprop.

class ToyEncoder {
public:
  explicit ToyEncoder(const EncoderConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    emb_tok_ = add("emb.tok", cfg_.vocab_size, cfg_.hidden);
    emb_pos_ = add("emb.pos", cfg_.max_seq_len, cfg_.hidden);
    emb_typ_ = add("emb.typ", cfg_.type_vocab, cfg_.hidden);
    emb_lng_ = add("emb.ln.gamma", 1, cfg_.hidden);
    emb_lnb_ = add("emb.ln.beta", 1, cfg_.hidden);
    for (int l = 0; l < cfg_.layers; ++l) {
      std::string p = "layer" + std::to_string(l) + ".";
      LayerIdx idx;
      idx.wq = add(p + "attn.wq", cfg_.hidden, cfg_.hidden);
      idx.bq = add(p + "attn.bq", 1, cfg_.hidden);
      idx.wk = add(p + "attn.wk", cfg_.hidden, cfg_.hidden);
      idx.bk = add(p + "attn.bk", 1, cfg_.hidden);
      idx.wv = add(p + "attn.wv", cfg_.hidden, cfg_.hidden);
      idx.bv = add(p + "attn.bv", 1, cfg_.hidden);
      idx.wo = add(p + "attn.wo", cfg_.hidden, cfg_.hidden);
      idx.bo = add(p + "attn.bo", 1, cfg_.hidden);
      idx.ln1g = add(p + "ln1.gamma", 1, cfg_.hidden);
      idx.ln1b = add(p + "ln1.beta", 1, cfg_.hidden);
      idx.w1 = add(p + "ffn.w1", cfg_.hidden, cfg_.ffn_dim);
      idx.b1 = add(p + "ffn.b1", 1, cfg_.ffn_dim);
      idx.w2 = add(p + "ffn.w2", cfg_.ffn_dim, cfg_.hidden);
      idx.b2 = add(p + "ffn.b2", 1, cfg_.hidden);
      idx.ln2g = add(p + "ln2.gamma", 1, cfg_.hidden);
      idx.ln2b = add(p + "ln2.beta", 1, cfg_.hidden);
      layers_.push_back(idx);
    }
    init_weights();
  }

  const EncoderConfig& config() const { return cfg_; }

  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }

  void zero_grad() {
    for (auto& t : params_) t.zero_grad();
  }

  struct Activations {
    int batch = 0;
    int seq = 0;
    std::vector<std::vector<int>> ids;
    std::vector<std::vector<int>> segs;
    std::vector<std::vector<std::uint8_t>> attn_mask;

    Mat emb_sum;  // (B*S, H) pre-LN embedding sum
    nn::LnCache emb_ln;
    Mat h0;

    struct Layer {
      Mat x;
      Mat q, k, v;
      std::vector<std::vector<Mat>> attn;  // [batch][head] (S,S)
      Mat ctx;
      Mat r1;
      nn::LnCache ln1;
      Mat y1;
      Mat f1;
      Mat act;
      Mat r2;
      nn::LnCache ln2;
    };
    std::vector<Layer> layers;
    Mat h_final;  // (B*S, H)

    Eigen::Index row(int b, int t) const {
      return static_cast<Eigen::Index>(b) * seq + t;
    }
  };

  // Forward over a padded batch; attention masks zero out pad keys.
  Activations forward(const std::vector<std::vector<int>>& ids,
                      const std::vector<std::vector<int>>& segs,
                      const std::vector<std::vector<std::uint8_t>>& attn_mask) const {
    Activations acts;
    acts.batch = static_cast<int>(ids.size());
    if (acts.batch == 0) throw TrainError("encoder: empty batch");
    acts.seq = static_cast<int>(ids[0].size());
    if (acts.seq > cfg_.max_seq_len) {
      throw TrainError(strcat_msg("encoder: sequence length ", acts.seq,
                                  " exceeds max_seq_len ", cfg_.max_seq_len));
    }
    acts.ids = ids;
    acts.segs = segs;
    acts.attn_mask = attn_mask;

    const int B = acts.batch, S = acts.seq, H = cfg_.hidden;
    acts.emb_sum.resize(static_cast<Eigen::Index>(B) * S, H);
    for (int b = 0; b < B; ++b) {
      if (static_cast<int>(ids[b].size()) != S) {
        throw TrainError("encoder: ragged batch rows");
      }
      for (int t = 0; t < S; ++t) {
        int id = ids[b][t];
        if (id < 0 || id >= cfg_.vocab_size) {
          throw TrainError(strcat_msg("encoder: token id ", id,
                                      " outside vocab of size ", cfg_.vocab_size));
        }
        int seg = segs.empty() ? 0 : segs[b][t];
        acts.emb_sum.row(acts.row(b, t)) = params_[emb_tok_].w.row(id) +
                                           params_[emb_pos_].w.row(t) +
                                           params_[emb_typ_].w.row(seg);
      }
    }
    acts.h0 = nn::layer_norm(acts.emb_sum, params_[emb_lng_], params_[emb_lnb_],
                             cfg_.ln_eps, &acts.emb_ln);

    Mat h = acts.h0;
    for (const LayerIdx& L : layers_) {
      Activations::Layer cache;
      h = layer_forward(L, h, acts, cache);
      acts.layers.push_back(std::move(cache));
    }
    acts.h_final = h;
    return acts;
  }

  // Backprop from d(h_final); accumulates into parameter grads.
  void backward(const Activations& acts, const Mat& d_h_final) {
    Mat dh = d_h_final;
    for (int l = cfg_.layers - 1; l >= 0; --l) {
      dh = layer_backward(layers_[static_cast<std::size_t>(l)],
                          acts.layers[static_cast<std::size_t>(l)], acts, dh);
    }
    Mat d_emb = nn::layer_norm_backward(dh, acts.emb_ln, params_[emb_lng_],
                                        params_[emb_lnb_]);
    for (int b = 0; b < acts.batch; ++b) {
      for (int t = 0; t < acts.seq; ++t) {
        auto r = acts.row(b, t);
        params_[emb_tok_].g.row(acts.ids[b][t]) += d_emb.row(r);
        params_[emb_pos_].g.row(t) += d_emb.row(r);
        int seg = acts.segs.empty() ? 0 : acts.segs[b][t];
        params_[emb_typ_].g.row(seg) += d_emb.row(r);
      }
    }
  }

  // Hidden state of a given position for every batch row.
  Mat gather_position(const Activations& acts, int t) const {
    Mat out(acts.batch, cfg_.hidden);
    for (int b = 0; b < acts.batch; ++b) {
      out.row(b) = acts.h_final.row(acts.row(b, t));
    }
    return out;
  }

private:
  struct LayerIdx {
    int wq, bq, wk, bk, wv, bv, wo, bo;
    int ln1g, ln1b;
    int w1, b1, w2, b2;
    int ln2g, ln2b;
  };

  int add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    params_.emplace_back(name, rows, cols);
    return static_cast<int>(params_.size() - 1);
  }

  void init_weights() {
    Rng rng(cfg_.seed);
    for (auto& t : params_) {
      if (t.name.ends_with(".gamma")) {
        t.w.setOnes();
      } else if (t.w.rows() == 1) {
        t.w.setZero();  // biases and LN betas
      } else {
        for (Eigen::Index i = 0; i < t.w.rows(); ++i) {
          for (Eigen::Index j = 0; j < t.w.cols(); ++j) {
            t.w(i, j) = rng.normal() * cfg_.init_std;
          }
        }
      }
    }
  }

  Mat layer_forward(const LayerIdx& L, const Mat& x, const Activations& acts,
                    Activations::Layer& cache) const {
    const int B = acts.batch, S = acts.seq, H = cfg_.hidden;
    const int heads = cfg_.heads, dh = H / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    cache.x = x;
    cache.q = (x * params_[L.wq].w).rowwise() + params_[L.bq].w.row(0);
    cache.k = (x * params_[L.wk].w).rowwise() + params_[L.bk].w.row(0);
    cache.v = (x * params_[L.wv].w).rowwise() + params_[L.bv].w.row(0);

    cache.ctx.resize(static_cast<Eigen::Index>(B) * S, H);
    cache.attn.assign(static_cast<std::size_t>(B), {});
    for (int b = 0; b < B; ++b) {
      auto base = acts.row(b, 0);
      cache.attn[static_cast<std::size_t>(b)].reserve(
          static_cast<std::size_t>(heads));
      for (int h = 0; h < heads; ++h) {
        Mat Qh = cache.q.block(base, h * dh, S, dh);
        Mat Kh = cache.k.block(base, h * dh, S, dh);
        Mat Vh = cache.v.block(base, h * dh, S, dh);
        Mat scores = Qh * Kh.transpose() * scale;
        if (!acts.attn_mask.empty()) {
          for (int t = 0; t < S; ++t) {
            if (acts.attn_mask[static_cast<std::size_t>(b)][static_cast<std::size_t>(t)] == 0) {
              scores.col(t).array() += -1e9;
            }
          }
        }
        nn::softmax_rows(scores);
        cache.ctx.block(base, h * dh, S, dh) = scores * Vh;
        cache.attn[static_cast<std::size_t>(b)].push_back(std::move(scores));
      }
    }

    Mat attn_out = (cache.ctx * params_[L.wo].w).rowwise() + params_[L.bo].w.row(0);
    cache.r1 = x + attn_out;
    cache.y1 = nn::layer_norm(cache.r1, params_[L.ln1g], params_[L.ln1b],
                              cfg_.ln_eps, &cache.ln1);

    cache.f1 = (cache.y1 * params_[L.w1].w).rowwise() + params_[L.b1].w.row(0);
    cache.act = cache.f1.unaryExpr([](double v) { return nn::gelu(v); });
    Mat f2 = (cache.act * params_[L.w2].w).rowwise() + params_[L.b2].w.row(0);
    cache.r2 = cache.y1 + f2;
    return nn::layer_norm(cache.r2, params_[L.ln2g], params_[L.ln2b], cfg_.ln_eps,
                          &cache.ln2);
  }

  Mat layer_backward(const LayerIdx& L, const Activations::Layer& cache,
                     const Activations& acts, const Mat& dy2) {
    const int B = acts.batch, S = acts.seq, H = cfg_.hidden;
    const int heads = cfg_.heads, dh = H / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Mat dr2 = nn::layer_norm_backward(dy2, cache.ln2, params_[L.ln2g],
                                      params_[L.ln2b]);
    Mat dy1 = dr2;
    const Mat& df2 = dr2;
    params_[L.w2].g += cache.act.transpose() * df2;
    params_[L.b2].g.row(0) += df2.colwise().sum();
    Mat dact = df2 * params_[L.w2].w.transpose();
    Mat df1 = dact.cwiseProduct(
        cache.f1.unaryExpr([](double v) { return nn::gelu_grad(v); }));
    params_[L.w1].g += cache.y1.transpose() * df1;
    params_[L.b1].g.row(0) += df1.colwise().sum();
    dy1 += df1 * params_[L.w1].w.transpose();

    Mat dr1 = nn::layer_norm_backward(dy1, cache.ln1, params_[L.ln1g],
                                      params_[L.ln1b]);
    Mat dx = dr1;
    const Mat& d_attn_out = dr1;
    params_[L.wo].g += cache.ctx.transpose() * d_attn_out;
    params_[L.bo].g.row(0) += d_attn_out.colwise().sum();
    Mat dctx = d_attn_out * params_[L.wo].w.transpose();

    Mat dq = Mat::Zero(cache.q.rows(), H);
    Mat dk = Mat::Zero(cache.k.rows(), H);
    Mat dv = Mat::Zero(cache.v.rows(), H);
    for (int b = 0; b < B; ++b) {
      auto base = acts.row(b, 0);
      for (int h = 0; h < heads; ++h) {
        const Mat& A = cache.attn[static_cast<std::size_t>(b)][static_cast<std::size_t>(h)];
        Mat dCh = dctx.block(base, h * dh, S, dh);
        Mat Vh = cache.v.block(base, h * dh, S, dh);
        Mat dA = dCh * Vh.transpose();
        dv.block(base, h * dh, S, dh) += A.transpose() * dCh;
        // softmax backward per row
        Mat dS(S, S);
        for (int r = 0; r < S; ++r) {
          double dot = dA.row(r).cwiseProduct(A.row(r)).sum();
          dS.row(r) = A.row(r).cwiseProduct(dA.row(r).array() - dot);
        }
        Mat Qh = cache.q.block(base, h * dh, S, dh);
        Mat Kh = cache.k.block(base, h * dh, S, dh);
        dq.block(base, h * dh, S, dh) += dS * Kh * scale;
        dk.block(base, h * dh, S, dh) += dS.transpose() * Qh * scale;
      }
    }

    params_[L.wq].g += cache.x.transpose() * dq;
    params_[L.bq].g.row(0) += dq.colwise().sum();
    params_[L.wk].g += cache.x.transpose() * dk;
    params_[L.bk].g.row(0) += dk.colwise().sum();
    params_[L.wv].g += cache.x.transpose() * dv;
    params_[L.bv].g.row(0) += dv.colwise().sum();
    dx += dq * params_[L.wq].w.transpose() + dk * params_[L.wk].w.transpose() +
          dv * params_[L.wv].w.transpose();
    return dx;
  }

  EncoderConfig cfg_;
  std::vector<Tensor> params_;
  int emb_tok_, emb_pos_, emb_typ_, emb_lng_, emb_lnb_;
  std::vector<LayerIdx> layers_;
};

}  // namespace phs
