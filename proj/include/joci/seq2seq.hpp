#pragma once

// Stacked LSTM encoder-decoder with additive attention, trained by explicit
// backpropagation in double precision. The decoder predicts each hypothesis
// token (and a final EOS) from a softmax over an output matrix applied to
// the attention-combined top hidden state; scoring sums the per-step target
// log-probabilities. Training is per-example Adagrad in corpus order with
// global-norm gradient clipping, fully deterministic given the seed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "joci/corpus_io.hpp"
#include "joci/text.hpp"

namespace joci {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Seq2SeqConfig {
  int num_layers = 1;
  int hidden_size = 64;
  int vocab_min_count = 2;
  double learning_rate = 0.1;
  int epochs = 50;
  std::uint64_t seed = 1;
  std::optional<int> sampled_softmax_k;
  int max_decode_len = 20;
  double clip_norm = 5.0;
};

inline Seq2SeqConfig seq2seq_config_from_json(const nlohmann::json& j) {
  Seq2SeqConfig c;
  if (j.contains("num_layers")) c.num_layers = j.at("num_layers").get<int>();
  if (j.contains("hidden_size")) c.hidden_size = j.at("hidden_size").get<int>();
  if (j.contains("vocab_min_count")) c.vocab_min_count = j.at("vocab_min_count").get<int>();
  if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("sampled_softmax_k") && !j.at("sampled_softmax_k").is_null())
    c.sampled_softmax_k = j.at("sampled_softmax_k").get<int>();
  if (j.contains("max_decode_len")) c.max_decode_len = j.at("max_decode_len").get<int>();
  if (j.contains("clip_norm")) c.clip_norm = j.at("clip_norm").get<double>();
  if (c.hidden_size < 1 || c.num_layers < 1)
    throw TrainError("seq2seq config: hidden_size and num_layers must be >= 1");
  return c;
}

inline nlohmann::ordered_json seq2seq_config_to_json(const Seq2SeqConfig& c) {
  nlohmann::ordered_json j;
  j["num_layers"] = c.num_layers;
  j["hidden_size"] = c.hidden_size;
  j["vocab_min_count"] = c.vocab_min_count;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  if (c.sampled_softmax_k)
    j["sampled_softmax_k"] = *c.sampled_softmax_k;
  else
    j["sampled_softmax_k"] = nullptr;
  j["max_decode_len"] = c.max_decode_len;
  j["clip_norm"] = c.clip_norm;
  return j;
}

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  Vocab() : id_to_word_{"<pad>", "<unk>", "<bos>", "<eos>"} { rebuild_index(); }

  explicit Vocab(std::vector<std::string> words) : Vocab() {
    for (auto& w : words) {
      id_to_word_.push_back(std::move(w));
    }
    rebuild_index();
  }

  int id(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? kUnk : it->second;
  }

  const std::string& word(int id) const { return id_to_word_.at(static_cast<size_t>(id)); }
  int size() const { return static_cast<int>(id_to_word_.size()); }
  const std::vector<std::string>& words() const { return id_to_word_; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id(t));
    return ids;
  }

 private:
  void rebuild_index() {
    index_.clear();
    for (size_t i = 0; i < id_to_word_.size(); ++i) index_[id_to_word_[i]] = static_cast<int>(i);
  }
  std::vector<std::string> id_to_word_;
  std::unordered_map<std::string, int> index_;
};

// Ids are assigned by frequency (descending), then lexicographically.
inline Vocab build_vocab(const std::vector<std::pair<std::string, std::string>>& pairs,
                         int min_count) {
  if (pairs.empty()) throw TrainError("build_vocab: empty corpus");
  std::map<std::string, long long> counts;
  for (const auto& [c, h] : pairs) {
    for (const auto& t : tokenize(c)) ++counts[t];
    for (const auto& t : tokenize(h)) ++counts[t];
  }
  std::vector<std::pair<std::string, long long>> kept;
  for (const auto& [w, n] : counts)
    if (n >= min_count) kept.emplace_back(w, n);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [w, _] : kept) words.push_back(w);
  return Vocab(std::move(words));
}

namespace s2s {

struct Mat {
  size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(size_t r, size_t c) { return a[r * cols + c]; }
  double operator()(size_t r, size_t c) const { return a[r * cols + c]; }
};

using Vec = std::vector<double>;

// y = M x
inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y(m.rows, 0.0);
  for (size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    const double* row = &m.a[r * m.cols];
    for (size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

// x += M^T y
inline void matvec_t_acc(const Mat& m, const Vec& y, Vec& x) {
  for (size_t r = 0; r < m.rows; ++r) {
    const double* row = &m.a[r * m.cols];
    double yr = y[r];
    for (size_t c = 0; c < m.cols; ++c) x[c] += row[c] * yr;
  }
}

// dM += y x^T
inline void outer_acc(Mat& dm, const Vec& y, const Vec& x) {
  for (size_t r = 0; r < dm.rows; ++r) {
    double* row = &dm.a[r * dm.cols];
    double yr = y[r];
    for (size_t c = 0; c < dm.cols; ++c) row[c] += yr * x[c];
  }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmLayer {
  Mat wx;  // 4H x in
  Mat wh;  // 4H x H
  Vec b;   // 4H

  LstmLayer() = default;
  LstmLayer(size_t in, size_t hidden)
      : wx(4 * hidden, in), wh(4 * hidden, hidden), b(4 * hidden, 0.0) {}
};

struct LstmStepCache {
  Vec x, h_prev, c_prev;
  Vec i, f, o, g, c, h;
};

inline LstmStepCache lstm_forward(const LstmLayer& L, Vec x, Vec h_prev, Vec c_prev) {
  const size_t H = h_prev.size();
  Vec z = matvec(L.wx, x);
  Vec zh = matvec(L.wh, h_prev);
  for (size_t k = 0; k < 4 * H; ++k) z[k] += zh[k] + L.b[k];
  LstmStepCache s;
  s.x = std::move(x);
  s.h_prev = std::move(h_prev);
  s.c_prev = std::move(c_prev);
  s.i.resize(H);
  s.f.resize(H);
  s.o.resize(H);
  s.g.resize(H);
  s.c.resize(H);
  s.h.resize(H);
  for (size_t k = 0; k < H; ++k) {
    s.i[k] = sigmoid(z[k]);
    s.f[k] = sigmoid(z[H + k]);
    s.o[k] = sigmoid(z[2 * H + k]);
    s.g[k] = std::tanh(z[3 * H + k]);
    s.c[k] = s.f[k] * s.c_prev[k] + s.i[k] * s.g[k];
    s.h[k] = s.o[k] * std::tanh(s.c[k]);
  }
  return s;
}

// Accumulates parameter gradients into gL and produces input-side gradients.
inline void lstm_backward(const LstmLayer& L, LstmLayer& gL, const LstmStepCache& s, const Vec& dh,
                          const Vec& dc_in, Vec& dx, Vec& dh_prev, Vec& dc_prev) {
  const size_t H = s.h.size();
  Vec dz(4 * H, 0.0);
  dx.assign(s.x.size(), 0.0);
  dh_prev.assign(H, 0.0);
  dc_prev.assign(H, 0.0);
  for (size_t k = 0; k < H; ++k) {
    double tc = std::tanh(s.c[k]);
    double d_o = dh[k] * tc;
    double dc = dc_in[k] + dh[k] * s.o[k] * (1.0 - tc * tc);
    double d_f = dc * s.c_prev[k];
    double d_i = dc * s.g[k];
    double d_g = dc * s.i[k];
    dc_prev[k] = dc * s.f[k];
    dz[k] = d_i * s.i[k] * (1.0 - s.i[k]);
    dz[H + k] = d_f * s.f[k] * (1.0 - s.f[k]);
    dz[2 * H + k] = d_o * s.o[k] * (1.0 - s.o[k]);
    dz[3 * H + k] = d_g * (1.0 - s.g[k] * s.g[k]);
  }
  outer_acc(gL.wx, dz, s.x);
  outer_acc(gL.wh, dz, s.h_prev);
  for (size_t k = 0; k < 4 * H; ++k) gL.b[k] += dz[k];
  matvec_t_acc(L.wx, dz, dx);
  matvec_t_acc(L.wh, dz, dh_prev);
}

}  // namespace s2s

struct Seq2SeqParams {
  s2s::Mat emb_enc, emb_dec;  // V x H
  std::vector<s2s::LstmLayer> enc, dec;
  s2s::Mat att_w1, att_w2;  // H x H
  s2s::Vec att_v;           // H
  s2s::Mat w_c;             // H x 2H
  s2s::Mat v_out;           // V x H

  static Seq2SeqParams zeros(const Seq2SeqConfig& cfg, int vocab_size) {
    const size_t H = static_cast<size_t>(cfg.hidden_size);
    const size_t V = static_cast<size_t>(vocab_size);
    Seq2SeqParams p;
    p.emb_enc = s2s::Mat(V, H);
    p.emb_dec = s2s::Mat(V, H);
    for (int l = 0; l < cfg.num_layers; ++l) {
      p.enc.emplace_back(H, H);
      p.dec.emplace_back(H, H);
    }
    p.att_w1 = s2s::Mat(H, H);
    p.att_w2 = s2s::Mat(H, H);
    p.att_v.assign(H, 0.0);
    p.w_c = s2s::Mat(H, 2 * H);
    p.v_out = s2s::Mat(V, H);
    return p;
  }

  template <class F>
  void for_each(F&& f) {
    f("emb_enc", emb_enc.a);
    f("emb_dec", emb_dec.a);
    for (size_t l = 0; l < enc.size(); ++l) {
      std::string p = "enc" + std::to_string(l);
      f(p + "_wx", enc[l].wx.a);
      f(p + "_wh", enc[l].wh.a);
      f(p + "_b", enc[l].b);
    }
    for (size_t l = 0; l < dec.size(); ++l) {
      std::string p = "dec" + std::to_string(l);
      f(p + "_wx", dec[l].wx.a);
      f(p + "_wh", dec[l].wh.a);
      f(p + "_b", dec[l].b);
    }
    f("att_w1", att_w1.a);
    f("att_w2", att_w2.a);
    f("att_v", att_v);
    f("w_c", w_c.a);
    f("v_out", v_out.a);
  }

  template <class F>
  void for_each(F&& f) const {
    const_cast<Seq2SeqParams*>(this)->for_each(
        [&](const std::string& name, s2s::Vec& buf) { f(name, std::as_const(buf)); });
  }
};

namespace s2s {

// Deterministic uniform(-0.08, 0.08) init from a splitmix-style generator;
// forget-gate biases start at 1.0.
class InitRng {
 public:
  explicit InitRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

inline void init_params(Seq2SeqParams& p, const Seq2SeqConfig& cfg, InitRng& rng) {
  p.for_each([&](const std::string&, Vec& buf) {
    for (double& x : buf) x = rng.uniform(-0.08, 0.08);
  });
  const size_t H = static_cast<size_t>(cfg.hidden_size);
  for (auto* stack : {&p.enc, &p.dec})
    for (LstmLayer& layer : *stack)
      for (size_t k = 0; k < H; ++k) layer.b[H + k] = 1.0;
}

struct DecStepCache {
  std::vector<LstmStepCache> layers;
  Vec r;                // att_w2 * h_top
  std::vector<Vec> s;   // per encoder position: tanh(q_i + r)
  Vec attn_weights;     // softmax(u)
  Vec attn;             // weighted encoder hidden average
  Vec hcat;             // [h_top; attn]
  Vec htilde;           // w_c * hcat
  Vec probs;            // softmax over logits (full or candidate-restricted)
  std::vector<int> candidates;  // empty means full softmax
  int input = 0;
  int target = 0;
  double logp_target = 0.0;
};

struct ForwardCache {
  std::vector<int> src_ids;
  std::vector<std::vector<LstmStepCache>> enc_steps;  // per source position, per layer
  std::vector<Vec> enc_top_h;                         // top-layer encoder hiddens
  std::vector<Vec> att_q;                             // att_w1 * enc_top_h[i]
  std::vector<DecStepCache> dec_steps;
  double loss = 0.0;  // negative sum of target log-probs
};

inline Vec embedding_row(const Mat& emb, int id) {
  Vec x(emb.cols);
  for (size_t c = 0; c < emb.cols; ++c) x[c] = emb(static_cast<size_t>(id), c);
  return x;
}

// Runs the encoder and teacher-forced decoder, computing the loss
// -sum_t log p(target_t). Targets are tgt tokens followed by EOS. When
// sample_rng is given along with k, each step's softmax is restricted to
// the target plus k sampled candidate ids.
inline ForwardCache forward(const Seq2SeqParams& p, const Seq2SeqConfig& cfg,
                            const std::vector<int>& src, const std::vector<int>& tgt,
                            InitRng* sample_rng = nullptr) {
  if (tgt.empty()) throw TrainError("seq2seq: empty target sequence");
  const size_t H = static_cast<size_t>(cfg.hidden_size);
  const size_t L = p.enc.size();
  const int V = static_cast<int>(p.v_out.rows);
  ForwardCache fc;

  // encoder
  fc.src_ids = src;
  std::vector<Vec> h(L, Vec(H, 0.0)), c(L, Vec(H, 0.0));
  for (int id : src) {
    Vec x = embedding_row(p.emb_enc, id);
    std::vector<LstmStepCache> layers;
    for (size_t l = 0; l < L; ++l) {
      LstmStepCache s = lstm_forward(p.enc[l], std::move(x), h[l], c[l]);
      h[l] = s.h;
      c[l] = s.c;
      x = s.h;
      layers.push_back(std::move(s));
    }
    fc.enc_top_h.push_back(h[L - 1]);
    fc.enc_steps.push_back(std::move(layers));
  }
  for (const Vec& hi : fc.enc_top_h) fc.att_q.push_back(matvec(p.att_w1, hi));

  // decoder (initial state = encoder final state)
  std::vector<int> inputs{Vocab::kBos};
  inputs.insert(inputs.end(), tgt.begin(), tgt.end());
  std::vector<int> targets(tgt.begin(), tgt.end());
  targets.push_back(Vocab::kEos);

  for (size_t t = 0; t < inputs.size(); ++t) {
    DecStepCache dsc;
    dsc.input = inputs[t];
    dsc.target = targets[t];
    Vec x = embedding_row(p.emb_dec, inputs[t]);
    for (size_t l = 0; l < L; ++l) {
      LstmStepCache s = lstm_forward(p.dec[l], std::move(x), h[l], c[l]);
      h[l] = s.h;
      c[l] = s.c;
      x = s.h;
      dsc.layers.push_back(std::move(s));
    }
    const Vec& h_top = h[L - 1];

    // attention over encoder top hiddens
    dsc.attn.assign(H, 0.0);
    if (!fc.enc_top_h.empty()) {
      dsc.r = matvec(p.att_w2, h_top);
      Vec u(fc.enc_top_h.size(), 0.0);
      for (size_t i = 0; i < fc.enc_top_h.size(); ++i) {
        Vec si(H);
        for (size_t k = 0; k < H; ++k) si[k] = std::tanh(fc.att_q[i][k] + dsc.r[k]);
        double ui = 0.0;
        for (size_t k = 0; k < H; ++k) ui += p.att_v[k] * si[k];
        u[i] = ui;
        dsc.s.push_back(std::move(si));
      }
      double umax = *std::max_element(u.begin(), u.end());
      double z = 0.0;
      dsc.attn_weights.resize(u.size());
      for (size_t i = 0; i < u.size(); ++i) {
        dsc.attn_weights[i] = std::exp(u[i] - umax);
        z += dsc.attn_weights[i];
      }
      for (size_t i = 0; i < u.size(); ++i) {
        dsc.attn_weights[i] /= z;
        for (size_t k = 0; k < H; ++k) dsc.attn[k] += dsc.attn_weights[i] * fc.enc_top_h[i][k];
      }
    }

    dsc.hcat.resize(2 * H);
    for (size_t k = 0; k < H; ++k) {
      dsc.hcat[k] = h_top[k];
      dsc.hcat[H + k] = dsc.attn[k];
    }
    dsc.htilde = matvec(p.w_c, dsc.hcat);

    // softmax over the vocabulary (or a sampled candidate set)
    if (sample_rng && cfg.sampled_softmax_k) {
      std::vector<int> cand{dsc.target};
      for (int s = 0; s < *cfg.sampled_softmax_k; ++s) {
        int id = static_cast<int>(sample_rng->below(static_cast<std::uint64_t>(V)));
        if (id != dsc.target) cand.push_back(id);
      }
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      dsc.candidates = std::move(cand);
    }
    const std::vector<int>* cand = dsc.candidates.empty() ? nullptr : &dsc.candidates;
    size_t n_out = cand ? cand->size() : static_cast<size_t>(V);
    Vec logits(n_out, 0.0);
    for (size_t j = 0; j < n_out; ++j) {
      int id = cand ? (*cand)[j] : static_cast<int>(j);
      double acc = 0.0;
      for (size_t k = 0; k < H; ++k) acc += p.v_out(static_cast<size_t>(id), k) * dsc.htilde[k];
      logits[j] = acc;
    }
    double lmax = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    dsc.probs.resize(n_out);
    for (size_t j = 0; j < n_out; ++j) {
      dsc.probs[j] = std::exp(logits[j] - lmax);
      lse += dsc.probs[j];
    }
    for (double& pj : dsc.probs) pj /= lse;
    size_t target_pos = 0;
    if (cand) {
      target_pos = static_cast<size_t>(
          std::find(cand->begin(), cand->end(), dsc.target) - cand->begin());
    } else {
      target_pos = static_cast<size_t>(dsc.target);
    }
    dsc.logp_target = (logits[target_pos] - lmax) - std::log(lse);
    fc.loss -= dsc.logp_target;
    fc.dec_steps.push_back(std::move(dsc));
  }
  return fc;
}

// Reverse pass; fills g (same shapes as p) with d(loss)/d(parameter).
inline void backward(const Seq2SeqParams& p, const Seq2SeqConfig& cfg, const ForwardCache& fc,
                     Seq2SeqParams& g) {
  const size_t H = static_cast<size_t>(cfg.hidden_size);
  const size_t L = p.enc.size();
  const size_t n_enc = fc.enc_top_h.size();

  std::vector<Vec> dh(L, Vec(H, 0.0)), dc(L, Vec(H, 0.0));  // carried across steps
  std::vector<Vec> d_enc_top(n_enc, Vec(H, 0.0));           // attention gradient into encoder

  for (size_t t = fc.dec_steps.size(); t-- > 0;) {
    const DecStepCache& dsc = fc.dec_steps[t];
    // softmax cross-entropy: dlogits = probs - onehot(target)
    size_t n_out = dsc.probs.size();
    Vec dlogits(dsc.probs);
    if (dsc.candidates.empty()) {
      dlogits[static_cast<size_t>(dsc.target)] -= 1.0;
    } else {
      size_t pos = static_cast<size_t>(
          std::find(dsc.candidates.begin(), dsc.candidates.end(), dsc.target) -
          dsc.candidates.begin());
      dlogits[pos] -= 1.0;
    }
    Vec dhtilde(H, 0.0);
    for (size_t j = 0; j < n_out; ++j) {
      int id = dsc.candidates.empty() ? static_cast<int>(j) : dsc.candidates[j];
      double dj = dlogits[j];
      for (size_t k = 0; k < H; ++k) {
        g.v_out(static_cast<size_t>(id), k) += dj * dsc.htilde[k];
      }
      for (size_t k = 0; k < H; ++k)
        dhtilde[k] += p.v_out(static_cast<size_t>(id), k) * dj;
    }

    Vec dhcat(2 * H, 0.0);
    outer_acc(g.w_c, dhtilde, dsc.hcat);
    matvec_t_acc(p.w_c, dhtilde, dhcat);

    Vec dh_top(H, 0.0), dattn(H, 0.0);
    for (size_t k = 0; k < H; ++k) {
      dh_top[k] = dhcat[k];
      dattn[k] = dhcat[H + k];
    }

    // attention backward
    if (n_enc > 0) {
      const Vec& a = dsc.attn_weights;
      Vec da(n_enc, 0.0);
      for (size_t i = 0; i < n_enc; ++i) {
        double acc = 0.0;
        for (size_t k = 0; k < H; ++k) acc += dattn[k] * fc.enc_top_h[i][k];
        da[i] = acc;
        for (size_t k = 0; k < H; ++k) d_enc_top[i][k] += a[i] * dattn[k];
      }
      double dot = 0.0;
      for (size_t i = 0; i < n_enc; ++i) dot += a[i] * da[i];
      Vec dpre_sum(H, 0.0);
      for (size_t i = 0; i < n_enc; ++i) {
        double du = a[i] * (da[i] - dot);
        Vec dpre(H);
        for (size_t k = 0; k < H; ++k) {
          g.att_v[k] += du * dsc.s[i][k];
          dpre[k] = du * p.att_v[k] * (1.0 - dsc.s[i][k] * dsc.s[i][k]);
          dpre_sum[k] += dpre[k];
        }
        outer_acc(g.att_w1, dpre, fc.enc_top_h[i]);
        matvec_t_acc(p.att_w1, dpre, d_enc_top[i]);
      }
      const Vec& h_top = dsc.layers[L - 1].h;
      outer_acc(g.att_w2, dpre_sum, h_top);
      matvec_t_acc(p.att_w2, dpre_sum, dh_top);
    }

    // stacked LSTM backward, top layer down
    for (size_t k = 0; k < H; ++k) dh[L - 1][k] += dh_top[k];
    Vec dx;
    for (size_t l = L; l-- > 0;) {
      Vec dh_prev, dc_prev;
      lstm_backward(p.dec[l], g.dec[l], dsc.layers[l], dh[l], dc[l], dx, dh_prev, dc_prev);
      dh[l] = std::move(dh_prev);
      dc[l] = std::move(dc_prev);
      if (l > 0)
        for (size_t k = 0; k < H; ++k) dh[l - 1][k] += dx[k];
    }
    for (size_t k = 0; k < H; ++k)
      g.emb_dec(static_cast<size_t>(dsc.input), k) += dx[k];
  }

  // encoder backward; dh/dc now carry gradients into the encoder final state
  for (size_t t = n_enc; t-- > 0;) {
    for (size_t k = 0; k < H; ++k) dh[L - 1][k] += d_enc_top[t][k];
    Vec dx;
    for (size_t l = L; l-- > 0;) {
      Vec dh_prev, dc_prev;
      lstm_backward(p.enc[l], g.enc[l], fc.enc_steps[t][l], dh[l], dc[l], dx, dh_prev, dc_prev);
      dh[l] = std::move(dh_prev);
      dc[l] = std::move(dc_prev);
      if (l > 0)
        for (size_t k = 0; k < H; ++k) dh[l - 1][k] += dx[k];
    }
    for (size_t k = 0; k < H; ++k)
      g.emb_enc(static_cast<size_t>(fc.src_ids[t]), k) += dx[k];
  }
}

}  // namespace s2s

struct Seq2SeqModel {
  Seq2SeqConfig config;
  Vocab vocab;
  Seq2SeqParams params;
};

// Loss of one (source, target) id pair under the full softmax.
inline double pair_loss(const Seq2SeqParams& p, const Seq2SeqConfig& cfg,
                        const std::vector<int>& src, const std::vector<int>& tgt) {
  return s2s::forward(p, cfg, src, tgt).loss;
}

// Loss plus analytic gradients (g must be zero-initialized with matching shapes).
inline double pair_loss_grad(const Seq2SeqParams& p, const Seq2SeqConfig& cfg,
                             const std::vector<int>& src, const std::vector<int>& tgt,
                             Seq2SeqParams& g) {
  s2s::ForwardCache fc = s2s::forward(p, cfg, src, tgt);
  s2s::backward(p, cfg, fc, g);
  return fc.loss;
}

// log P(H|C): sum over hypothesis tokens (and EOS) of target log-probs.
inline double score(const Seq2SeqModel& model, const std::vector<std::string>& context_tokens,
                    const std::vector<std::string>& hypothesis_tokens) {
  if (hypothesis_tokens.empty()) throw TrainError("score: empty hypothesis");
  std::vector<int> src = model.vocab.encode(context_tokens);
  std::vector<int> tgt = model.vocab.encode(hypothesis_tokens);
  return -s2s::forward(model.params, model.config, src, tgt).loss;
}

inline double score_text(const Seq2SeqModel& model, const std::string& context,
                         const std::string& hypothesis) {
  return score(model, tokenize(context), tokenize(hypothesis));
}

struct EpochStats {
  std::vector<double> mean_loss;  // one entry per epoch
};

inline Seq2SeqModel train(const std::vector<std::pair<std::string, std::string>>& pairs,
                          const Seq2SeqConfig& cfg, EpochStats* stats = nullptr) {
  if (pairs.empty()) throw TrainError("train: empty corpus");
  Vocab vocab = build_vocab(pairs, cfg.vocab_min_count);
  std::vector<std::pair<std::vector<int>, std::vector<int>>> encoded;
  for (const auto& [c, h] : pairs) {
    std::vector<int> tgt = vocab.encode(tokenize(h));
    if (tgt.empty()) continue;
    encoded.emplace_back(vocab.encode(tokenize(c)), std::move(tgt));
  }
  if (encoded.empty()) throw TrainError("train: no usable pairs (empty hypotheses)");

  Seq2SeqModel model{cfg, vocab, Seq2SeqParams::zeros(cfg, vocab.size())};
  s2s::InitRng rng(cfg.seed);
  s2s::init_params(model.params, cfg, rng);

  Seq2SeqParams grads = Seq2SeqParams::zeros(cfg, vocab.size());
  Seq2SeqParams adagrad = Seq2SeqParams::zeros(cfg, vocab.size());
  std::vector<s2s::Vec*> weight_bufs, grad_bufs, accum_bufs;
  model.params.for_each([&](const std::string&, s2s::Vec& buf) { weight_bufs.push_back(&buf); });
  grads.for_each([&](const std::string&, s2s::Vec& buf) { grad_bufs.push_back(&buf); });
  adagrad.for_each([&](const std::string&, s2s::Vec& buf) { accum_bufs.push_back(&buf); });

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double total_loss = 0.0;
    for (size_t idx = 0; idx < encoded.size(); ++idx) {
      const auto& [src, tgt] = encoded[idx];
      for (s2s::Vec* buf : grad_bufs) std::fill(buf->begin(), buf->end(), 0.0);
      s2s::ForwardCache fc = s2s::forward(model.params, cfg, src, tgt,
                                          cfg.sampled_softmax_k ? &rng : nullptr);
      if (!std::isfinite(fc.loss))
        throw TrainError("train: non-finite loss at epoch " + std::to_string(epoch) + ", pair " +
                         std::to_string(idx));
      s2s::backward(model.params, cfg, fc, grads);
      total_loss += fc.loss;

      double norm_sq = 0.0;
      for (s2s::Vec* buf : grad_bufs)
        for (double x : *buf) norm_sq += x * x;
      double scale = 1.0;
      double norm = std::sqrt(norm_sq);
      if (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) scale = cfg.clip_norm / norm;

      if (cfg.learning_rate != 0.0) {
        for (size_t t = 0; t < weight_bufs.size(); ++t) {
          s2s::Vec& w = *weight_bufs[t];
          const s2s::Vec& gbuf = *grad_bufs[t];
          s2s::Vec& acc = *accum_bufs[t];
          for (size_t i = 0; i < w.size(); ++i) {
            double g = gbuf[i] * scale;
            acc[i] += g * g;
            w[i] -= cfg.learning_rate * g / (std::sqrt(acc[i]) + 1e-8);
          }
        }
      }
    }
    if (stats) stats->mean_loss.push_back(total_loss / static_cast<double>(encoded.size()));
  }
  return model;
}

// Argmax decoding until EOS or max_len; ties pick the lowest id.
inline std::vector<std::string> greedy_decode(const Seq2SeqModel& model,
                                              const std::vector<std::string>& prompt_tokens,
                                              int max_len = -1) {
  using namespace s2s;
  const Seq2SeqConfig& cfg = model.config;
  const Seq2SeqParams& p = model.params;
  if (max_len < 0) max_len = cfg.max_decode_len;
  const size_t H = static_cast<size_t>(cfg.hidden_size);
  const size_t L = p.enc.size();
  std::vector<int> src = model.vocab.encode(prompt_tokens);

  std::vector<Vec> h(L, Vec(H, 0.0)), c(L, Vec(H, 0.0));
  std::vector<Vec> enc_top, att_q;
  for (int id : src) {
    Vec x = embedding_row(p.emb_enc, id);
    for (size_t l = 0; l < L; ++l) {
      LstmStepCache s = lstm_forward(p.enc[l], std::move(x), h[l], c[l]);
      h[l] = s.h;
      c[l] = s.c;
      x = s.h;
    }
    enc_top.push_back(h[L - 1]);
  }
  for (const Vec& hi : enc_top) att_q.push_back(matvec(p.att_w1, hi));

  std::vector<std::string> out;
  int input = Vocab::kBos;
  for (int t = 0; t < max_len; ++t) {
    Vec x = embedding_row(p.emb_dec, input);
    for (size_t l = 0; l < L; ++l) {
      LstmStepCache s = lstm_forward(p.dec[l], std::move(x), h[l], c[l]);
      h[l] = s.h;
      c[l] = s.c;
      x = s.h;
    }
    const Vec& h_top = h[L - 1];
    Vec attn(H, 0.0);
    if (!enc_top.empty()) {
      Vec r = matvec(p.att_w2, h_top);
      Vec u(enc_top.size(), 0.0);
      for (size_t i = 0; i < enc_top.size(); ++i) {
        double ui = 0.0;
        for (size_t k = 0; k < H; ++k) ui += p.att_v[k] * std::tanh(att_q[i][k] + r[k]);
        u[i] = ui;
      }
      double umax = *std::max_element(u.begin(), u.end());
      double z = 0.0;
      Vec a(u.size());
      for (size_t i = 0; i < u.size(); ++i) {
        a[i] = std::exp(u[i] - umax);
        z += a[i];
      }
      for (size_t i = 0; i < u.size(); ++i)
        for (size_t k = 0; k < H; ++k) attn[k] += (a[i] / z) * enc_top[i][k];
    }
    Vec hcat(2 * H);
    for (size_t k = 0; k < H; ++k) {
      hcat[k] = h_top[k];
      hcat[H + k] = attn[k];
    }
    Vec htilde = matvec(p.w_c, hcat);
    int best = 0;
    double best_logit = -std::numeric_limits<double>::infinity();
    for (int w = 0; w < model.vocab.size(); ++w) {
      double acc = 0.0;
      for (size_t k = 0; k < H; ++k) acc += p.v_out(static_cast<size_t>(w), k) * htilde[k];
      if (acc > best_logit) {
        best_logit = acc;
        best = w;
      }
    }
    if (best == Vocab::kEos) break;
    out.push_back(model.vocab.word(best));
    input = best;
  }
  return out;
}

struct NeuralCandidate {
  std::string context_id;
  std::string prompt;  // the word or sentence fed to the decoder
  std::string surface;
};

// Checkpoint: versioned JSON with config, vocab, and shape-tagged tensors.
inline void save_model(const std::string& path, const Seq2SeqModel& model) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["config"] = seq2seq_config_to_json(model.config);
  j["vocab"] = std::vector<std::string>(model.vocab.words().begin() + 4, model.vocab.words().end());
  nlohmann::ordered_json tensors;
  model.params.for_each([&](const std::string& name, const s2s::Vec& buf) {
    nlohmann::ordered_json t;
    t["size"] = buf.size();
    t["data"] = buf;
    tensors[name] = std::move(t);
  });
  j["tensors"] = std::move(tensors);
  atomic_write(path, j.dump());
}

inline Seq2SeqModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": malformed model checkpoint");
  if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
    throw ParseError(path + ": unsupported checkpoint version");
  Seq2SeqModel model;
  model.config = seq2seq_config_from_json(j.at("config"));
  model.vocab = Vocab(j.at("vocab").get<std::vector<std::string>>());
  model.params = Seq2SeqParams::zeros(model.config, model.vocab.size());
  model.params.for_each([&](const std::string& name, s2s::Vec& buf) {
    const auto& t = j.at("tensors").at(name);
    if (t.at("size").get<size_t>() != buf.size())
      throw ParseError(path + ": tensor " + name + " has unexpected size");
    buf = t.at("data").get<s2s::Vec>();
  });
  return model;
}

// The five scoring variants of the trained model, by training subset. The
// empty-premise variant always scores against an empty context.
enum class S2SVariant { ent = 0, neu = 1, con = 2, neu_con = 3, empty_premise = 4 };

inline const char* s2s_variant_name(S2SVariant v) {
  switch (v) {
    case S2SVariant::ent: return "ent";
    case S2SVariant::neu: return "neu";
    case S2SVariant::con: return "con";
    case S2SVariant::neu_con: return "neu_con";
    case S2SVariant::empty_premise: return "empty";
  }
  return "?";
}

struct VariantSet {
  std::array<std::optional<Seq2SeqModel>, 5> models;

  bool any() const {
    for (const auto& m : models)
      if (m) return true;
    return false;
  }
};

struct VariantScores {
  std::array<double, 5> scores{};
  std::array<bool, 5> masked{};  // true when the variant model is missing
};

inline VariantScores score_variants(const VariantSet& variants, const std::string& context,
                                    const std::string& hypothesis) {
  VariantScores out;
  std::vector<std::string> c_tokens = tokenize(context);
  std::vector<std::string> h_tokens = tokenize(hypothesis);
  for (size_t i = 0; i < variants.models.size(); ++i) {
    if (!variants.models[i]) {
      out.masked[i] = true;
      continue;
    }
    const std::vector<std::string>& ctx =
        i == static_cast<size_t>(S2SVariant::empty_premise) ? std::vector<std::string>{} : c_tokens;
    out.scores[i] = score(*variants.models[i], ctx, h_tokens);
  }
  return out;
}

}  // namespace joci

