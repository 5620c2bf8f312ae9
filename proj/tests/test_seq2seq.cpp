#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "joci/seq2seq.hpp"

using namespace joci;

namespace {

std::vector<std::pair<std::string, std::string>> tiny_corpus() {
  return {{"the cat sat", "a cat sat"},
          {"the dog ran", "a dog ran"},
          {"the cat ran", "a cat ran"},
          {"a bird flew", "the bird flew"}};
}

// token-position accuracy of greedy copies
double copy_accuracy(const Seq2SeqModel& model,
                     const std::vector<std::vector<std::string>>& sequences) {
  long correct = 0, total = 0;
  for (const auto& seq : sequences) {
    auto decoded = greedy_decode(model, seq, static_cast<int>(seq.size()) + 4);
    for (size_t i = 0; i < seq.size(); ++i) {
      ++total;
      if (i < decoded.size() && decoded[i] == seq[i]) ++correct;
    }
    total += static_cast<long>(decoded.size() > seq.size() ? decoded.size() - seq.size() : 0);
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("vocab keeps words at the min-count boundary") {
  std::vector<std::pair<std::string, std::string>> pairs{{"cat cat", "dog"}};
  Vocab v = build_vocab(pairs, 2);
  CHECK(v.id("cat") != Vocab::kUnk);
  CHECK(v.id("dog") == Vocab::kUnk);
  Vocab v1 = build_vocab(pairs, 1);
  CHECK(v1.id("dog") != Vocab::kUnk);
  CHECK_THROWS_AS(build_vocab({}, 1), TrainError);
}

TEST_CASE("vocab ids are frequency-then-lexicographic after the reserved block") {
  std::vector<std::pair<std::string, std::string>> pairs{
      {"bb bb bb aa aa cc", "aa"}};  // bb:3, aa:3, cc:1
  Vocab v = build_vocab(pairs, 1);
  CHECK(v.id("aa") == 4);  // ties break lexicographically
  CHECK(v.id("bb") == 5);
  CHECK(v.id("cc") == 6);
}

TEST_CASE("zero-parameter score is uniform per step") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 8;

  // engineered 32-word vocabulary: 28 corpus words + 4 reserved
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string all;
  for (int i = 0; i < 28; ++i) all += "w" + std::to_string(i) + " ";
  pairs.emplace_back(all, all);
  Vocab vocab = build_vocab(pairs, 1);
  REQUIRE(vocab.size() == 32);

  Seq2SeqModel model{cfg, vocab, Seq2SeqParams::zeros(cfg, vocab.size())};
  // |H| = 3 including EOS
  double s = score(model, {"w0", "w1"}, {"w2", "w3"});
  double expected = 3.0 * std::log(1.0 / 32.0);
  CHECK(s == expected);

  // generic vocab size and longer hypothesis: equal within 1e-12
  std::vector<std::pair<std::string, std::string>> pairs20;
  std::string all20;
  for (int i = 0; i < 16; ++i) all20 += "v" + std::to_string(i) + " ";
  pairs20.emplace_back(all20, all20);
  Vocab vocab20 = build_vocab(pairs20, 1);
  REQUIRE(vocab20.size() == 20);
  Seq2SeqModel m20{cfg, vocab20, Seq2SeqParams::zeros(cfg, vocab20.size())};
  double s20 = score(m20, {"v0"}, {"v1", "v2", "v3", "v4", "v5", "v6"});
  CHECK(std::abs(s20 - 7.0 * std::log(1.0 / 20.0)) <= 1e-12);
}

TEST_CASE("per-step softmax sums to one") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_size = 8;
  s2s::InitRng rng(17);
  Seq2SeqParams p = Seq2SeqParams::zeros(cfg, 20);
  s2s::init_params(p, cfg, rng);
  auto fc = s2s::forward(p, cfg, {4, 5, 6}, {7, 8, 9, 10});
  REQUIRE(fc.dec_steps.size() == 5);
  for (const auto& step : fc.dec_steps) {
    double total = 0.0;
    for (double pr : step.probs) total += pr;
    CHECK(std::abs(total - 1.0) <= 1e-6);
    // attention weights are a distribution over encoder positions
    double asum = 0.0;
    for (double a : step.attn_weights) {
      CHECK(a >= 0.0);
      asum += a;
    }
    CHECK(std::abs(asum - 1.0) <= 1e-9);
  }
}

TEST_CASE("score is a pure function") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 16;
  cfg.epochs = 3;
  cfg.vocab_min_count = 1;
  auto model = train(tiny_corpus(), cfg);
  double a = score_text(model, "the cat sat", "a cat sat");
  double b = score_text(model, "the cat sat", "a cat sat");
  CHECK(a == b);
  CHECK(a <= 0.0);
  CHECK_THROWS_AS(score(model, {"the"}, {}), TrainError);
}

TEST_CASE("analytic gradients match central finite differences on every tensor") {
  for (int layers : {1, 2}) {
    Seq2SeqConfig cfg;
    cfg.num_layers = layers;
    cfg.hidden_size = 8;
    const int vocab_size = 20;
    s2s::InitRng rng(42 + static_cast<std::uint64_t>(layers));
    Seq2SeqParams p = Seq2SeqParams::zeros(cfg, vocab_size);
    s2s::init_params(p, cfg, rng);

    std::vector<int> src{4, 9, 13};
    std::vector<int> tgt{5, 17, 6, 11};

    Seq2SeqParams grads = Seq2SeqParams::zeros(cfg, vocab_size);
    pair_loss_grad(p, cfg, src, tgt, grads);

    const double eps = 1e-4;
    std::vector<std::pair<std::string, s2s::Vec*>> analytic, weights;
    grads.for_each([&](const std::string& n, s2s::Vec& b) { analytic.emplace_back(n, &b); });
    p.for_each([&](const std::string& n, s2s::Vec& b) { weights.emplace_back(n, &b); });
    REQUIRE(analytic.size() == weights.size());

    double worst = 0.0;
    std::string worst_name;
    for (size_t t = 0; t < weights.size(); ++t) {
      s2s::Vec& w = *weights[t].second;
      const s2s::Vec& g = *analytic[t].second;
      for (size_t i = 0; i < w.size(); ++i) {
        double saved = w[i];
        w[i] = saved + eps;
        double up = pair_loss(p, cfg, src, tgt);
        w[i] = saved - eps;
        double down = pair_loss(p, cfg, src, tgt);
        w[i] = saved;
        double numeric = (up - down) / (2.0 * eps);
        double denom = std::max(std::abs(numeric), std::abs(g[i]));
        double rel = denom >= 1e-6 ? std::abs(numeric - g[i]) / denom
                                   : std::abs(numeric - g[i]) * 1e3;
        if (rel > worst) {
          worst = rel;
          worst_name = weights[t].first;
        }
      }
    }
    INFO("layers=" << layers << " worst tensor: " << worst_name);
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("training is bitwise deterministic given the seed") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 12;
  cfg.epochs = 4;
  cfg.vocab_min_count = 1;
  cfg.seed = 77;
  auto m1 = train(tiny_corpus(), cfg);
  auto m2 = train(tiny_corpus(), cfg);
  bool identical = true;
  std::vector<const s2s::Vec*> b1, b2;
  m1.params.for_each([&](const std::string&, const s2s::Vec& b) { b1.push_back(&b); });
  m2.params.for_each([&](const std::string&, const s2s::Vec& b) { b2.push_back(&b); });
  for (size_t t = 0; t < b1.size(); ++t)
    if (*b1[t] != *b2[t]) identical = false;
  CHECK(identical);
}

TEST_CASE("zero learning rate leaves parameters at their init") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 12;
  cfg.epochs = 3;
  cfg.vocab_min_count = 1;
  cfg.seed = 5;
  cfg.learning_rate = 0.0;
  auto trained = train(tiny_corpus(), cfg);

  Vocab vocab = build_vocab(tiny_corpus(), 1);
  Seq2SeqParams init = Seq2SeqParams::zeros(cfg, vocab.size());
  s2s::InitRng rng(cfg.seed);
  s2s::init_params(init, cfg, rng);

  std::vector<const s2s::Vec*> a, b;
  trained.params.for_each([&](const std::string&, const s2s::Vec& v) { a.push_back(&v); });
  init.for_each([&](const std::string&, const s2s::Vec& v) { b.push_back(&v); });
  bool identical = true;
  for (size_t t = 0; t < a.size(); ++t)
    if (*a[t] != *b[t]) identical = false;
  CHECK(identical);
}

TEST_CASE("loss decreases over epochs on the training set") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 24;
  cfg.epochs = 10;
  cfg.vocab_min_count = 1;
  EpochStats stats;
  train(tiny_corpus(), cfg, &stats);
  REQUIRE(stats.mean_loss.size() == 10);
  CHECK(stats.mean_loss.back() < stats.mean_loss.front());
}

TEST_CASE("greedy decode is deterministic and ties break to the lowest id") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 8;
  cfg.max_decode_len = 6;
  Vocab vocab = build_vocab(tiny_corpus(), 1);
  Seq2SeqModel zero{cfg, vocab, Seq2SeqParams::zeros(cfg, vocab.size())};
  auto out = greedy_decode(zero, {"the", "cat"});
  REQUIRE(out.size() == 6);  // EOS never wins the tie
  for (const auto& w : out) CHECK(w == "<pad>");

  Seq2SeqConfig tcfg;
  tcfg.num_layers = 1;
  tcfg.hidden_size = 16;
  tcfg.epochs = 5;
  tcfg.vocab_min_count = 1;
  auto trained = train(tiny_corpus(), tcfg);
  CHECK(greedy_decode(trained, {"the", "cat", "sat"}) ==
        greedy_decode(trained, {"the", "cat", "sat"}));
}

TEST_CASE("copy task reaches high greedy accuracy") {
  // 200 synthetic pairs over a small vocabulary, hidden 32
  std::mt19937 rng(31);
  std::vector<std::vector<std::string>> sequences;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < 200; ++i) {
    size_t len = 3 + rng() % 3;
    std::vector<std::string> seq;
    for (size_t j = 0; j < len; ++j) seq.push_back("w" + std::to_string(rng() % 12));
    sequences.push_back(seq);
    std::string text = seq[0];
    for (size_t j = 1; j < seq.size(); ++j) text += " " + seq[j];
    pairs.emplace_back(text, text);
  }
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 32;
  cfg.vocab_min_count = 1;
  cfg.learning_rate = 0.1;
  cfg.epochs = 60;
  cfg.seed = 3;
  auto model = train(pairs, cfg);
  CHECK(copy_accuracy(model, sequences) >= 0.95);

  // trained copy model prefers the identity over a shuffle
  int better = 0, tested = 0;
  std::mt19937 shuffle_rng(8);
  for (size_t i = 0; i < 40; ++i) {
    auto seq = sequences[i];
    auto shuffled = seq;
    std::shuffle(shuffled.begin(), shuffled.end(), shuffle_rng);
    if (shuffled == seq) continue;
    ++tested;
    if (score(model, seq, seq) > score(model, seq, shuffled)) ++better;
  }
  REQUIRE(tested > 20);
  CHECK(static_cast<double>(better) / tested >= 0.95);
}

TEST_CASE("sampled softmax trains deterministically and reduces loss") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 16;
  cfg.epochs = 8;
  cfg.vocab_min_count = 1;
  cfg.sampled_softmax_k = 4;
  cfg.seed = 11;
  EpochStats s1, s2;
  train(tiny_corpus(), cfg, &s1);
  train(tiny_corpus(), cfg, &s2);
  CHECK(s1.mean_loss == s2.mean_loss);
  CHECK(s1.mean_loss.back() < s1.mean_loss.front());
}

TEST_CASE("checkpoints round-trip exactly") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_size = 10;
  cfg.epochs = 2;
  cfg.vocab_min_count = 1;
  auto model = train(tiny_corpus(), cfg);
  auto path = (std::filesystem::temp_directory_path() / "s2s_ckpt.json").string();
  save_model(path, model);
  auto loaded = load_model(path);
  std::remove(path.c_str());

  CHECK(loaded.vocab.words() == model.vocab.words());
  std::vector<const s2s::Vec*> a, b;
  model.params.for_each([&](const std::string&, const s2s::Vec& v) { a.push_back(&v); });
  loaded.params.for_each([&](const std::string&, const s2s::Vec& v) { b.push_back(&v); });
  bool identical = true;
  for (size_t t = 0; t < a.size(); ++t)
    if (*a[t] != *b[t]) identical = false;
  CHECK(identical);
}

TEST_CASE("score_variants masks missing models and ignores context for empty-premise") {
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 12;
  cfg.epochs = 3;
  cfg.vocab_min_count = 1;
  auto model = train(tiny_corpus(), cfg);

  VariantSet vs;
  for (size_t i = 0; i < 5; ++i) vs.models[i] = model;

  auto scores = score_variants(vs, "the cat sat", "a cat sat");
  for (size_t i = 0; i < 4; ++i) {
    CHECK(!scores.masked[i]);
    CHECK(scores.scores[i] == scores.scores[0]);  // identical models
  }

  // empty-premise score does not depend on the context
  auto other = score_variants(vs, "completely different words here", "a cat sat");
  CHECK(scores.scores[4] == other.scores[4]);

  VariantSet partial;
  partial.models[0] = model;
  auto masked = score_variants(partial, "the cat sat", "a cat sat");
  CHECK(!masked.masked[0]);
  for (size_t i = 1; i < 5; ++i) {
    CHECK(masked.masked[i]);
    CHECK(masked.scores[i] == 0.0);
  }
}

TEST_CASE("label-conditioned variants rank their own style highest") {
  // three toy "labeled" corpora with disjoint styles: copy, reverse, constant
  std::vector<std::pair<std::string, std::string>> ent, neu, con;
  auto sentence = [&](int i) {
    std::string s = "s" + std::to_string(i % 6);
    return s + " t" + std::to_string((i * 5) % 7) + " u" + std::to_string((i * 3) % 5);
  };
  for (int i = 0; i < 60; ++i) {
    std::string c = sentence(i);
    auto tokens = tokenize(c);
    std::string reversed = tokens[2] + " " + tokens[1] + " " + tokens[0];
    ent.emplace_back(c, c);
    neu.emplace_back(c, reversed);
    con.emplace_back(c, "nothing nothing nothing");
  }
  Seq2SeqConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_size = 24;
  cfg.epochs = 30;
  cfg.vocab_min_count = 1;

  VariantSet vs;
  vs.models[0] = train(ent, cfg);
  vs.models[1] = train(neu, cfg);
  vs.models[2] = train(con, cfg);

  int correct = 0, total = 0;
  for (int i = 60; i < 80; ++i) {
    std::string c = sentence(i);
    auto tokens = tokenize(c);
    std::string reversed = tokens[2] + " " + tokens[1] + " " + tokens[0];
    struct Case {
      std::string h;
      size_t variant;
    };
    for (const Case& tc : {Case{c, 0}, Case{reversed, 1}, Case{"nothing nothing nothing", 2}}) {
      auto scores = score_variants(vs, c, tc.h);
      size_t argmax = 0;
      double best = -1e300;
      for (size_t v = 0; v < 3; ++v)
        if (scores.scores[v] > best) {
          best = scores.scores[v];
          argmax = v;
        }
      ++total;
      if (argmax == tc.variant) ++correct;
    }
  }
  CHECK(static_cast<double>(correct) / total >= 0.8);
}
