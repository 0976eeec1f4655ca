#pragma once

#include <atomic>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctxgain/errors.hpp"
#include "ctxgain/filler_pool.hpp"
#include "ctxgain/text.hpp"

namespace ctxgain {

// Mean per-token negative log-likelihood in nats.
struct NllReport {
  double nll = 0.0;
  uint64_t token_count = 0;
};

// Anything that maps (segment, optional context) to a mean per-token NLL.
// Implementations are immutable after construction; concurrent queries are
// safe. Every query is counted, so reward modes that promise zero verifier
// work can be audited.
class VerifierBackend {
 public:
  VerifierBackend() = default;
  VerifierBackend(const VerifierBackend& other)
      : calls_(other.calls_.load(std::memory_order_relaxed)) {}
  VerifierBackend& operator=(const VerifierBackend& other) {
    calls_.store(other.calls_.load(std::memory_order_relaxed),
                 std::memory_order_relaxed);
    return *this;
  }
  virtual ~VerifierBackend() = default;
  virtual std::string name() const = 0;

  NllReport nll(std::string_view segment,
                std::optional<std::string_view> context = std::nullopt) const {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_nll(segment, context);
  }

  uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }
  void reset_calls() const { calls_.store(0, std::memory_order_relaxed); }

 protected:
  virtual NllReport do_nll(std::string_view segment,
                           std::optional<std::string_view> context) const = 0;

 private:
  mutable std::atomic<uint64_t> calls_{0};
};

struct NllPair {
  NllReport prior;
  NllReport posterior;
};

inline NllReport segment_nll(
    const VerifierBackend& backend, std::string_view segment,
    std::optional<std::string_view> context = std::nullopt) {
  return backend.nll(segment, context);
}

// Prior and posterior under one segment tokenization. The token counts
// must agree or the pair is meaningless.
inline NllPair nll_pair(const VerifierBackend& backend,
                        std::string_view segment, std::string_view context) {
  NllPair pair{backend.nll(segment), backend.nll(segment, context)};
  if (pair.prior.token_count != pair.posterior.token_count)
    throw RemoteError("segment token count differs between prior (" +
                      std::to_string(pair.prior.token_count) +
                      ") and posterior (" +
                      std::to_string(pair.posterior.token_count) + ")");
  return pair;
}

// ---------------------------------------------------------------------------
// N-gram model with Witten–Bell smoothing
// ---------------------------------------------------------------------------

enum class Smoothing : uint8_t {
  WittenBell = 0,
  // Raw maximum likelihood, no mass for unseen events; NLL may be +inf.
  // Here for hand-countable oracles, not production scoring.
  MleOnly = 1,
};

struct TokenizerSpec {
  bool lowercase = true;
};

class Vocab {
 public:
  static constexpr uint32_t kUnk = 0;

  Vocab() { words_.push_back("<unk>"); }

  uint32_t add(const std::string& w) {
    auto [it, inserted] = ids_.try_emplace(w, uint32_t(words_.size()));
    if (inserted) words_.push_back(w);
    return it->second;
  }

  uint32_t lookup(const std::string& w) const {
    auto it = ids_.find(w);
    return it == ids_.end() ? kUnk : it->second;
  }

  // Symbol count including the unknown symbol.
  size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::unordered_map<std::string, uint32_t> ids_;
  std::vector<std::string> words_;
};

// Backoff n-gram counts over a token stream. Witten–Bell interpolation
// bottoms out at a uniform distribution over vocabulary plus unknown, so
// every symbol keeps finite NLL.
class NGramModel {
 public:
  static constexpr int kMaxOrder = 4;
  static constexpr uint32_t kIdBits = 21;

  NGramModel() = default;
  NGramModel(int order, Smoothing smoothing)
      : order_(order), smoothing_(smoothing), levels_(order) {
    if (order < 1 || order > kMaxOrder)
      throw ConfigError("n-gram order must be in [1, " +
                        std::to_string(kMaxOrder) + "]");
  }

  // Extends the vocabulary and accumulates counts; tokens are consumed as
  // one stream with no sentence resets.
  void count_tokens(const std::vector<std::string>& tokens) {
    std::vector<uint32_t> ids(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) {
      ids[i] = vocab_.add(tokens[i]);
      if (ids[i] >= (1u << kIdBits))
        throw ConfigError("vocabulary exceeds id space");
    }
    for (size_t t = 0; t < ids.size(); ++t) {
      for (int k = 0; k < order_; ++k) {
        if (t < size_t(k)) break;
        Node& node = levels_[k][history_key(ids.data() + t - k, k)];
        node.total += 1;
        node.counts[ids[t]] += 1;
      }
    }
  }

  const Vocab& vocab() const { return vocab_; }
  int order() const { return order_; }
  Smoothing smoothing() const { return smoothing_; }

  // Pre-registers words so token ids stay aligned with another model.
  void seed_vocab(const Vocab& other) {
    for (size_t i = 1; i < other.words().size(); ++i) vocab_.add(other.words()[i]);
  }

  // P(w | history), history given most-recent-last; longer histories are
  // truncated to order-1 tokens.
  double prob(const std::vector<uint32_t>& history, uint32_t w) const {
    int k = std::min<int>(order_ - 1, int(history.size()));
    const uint32_t* h = history.data() + history.size() - k;
    if (smoothing_ == Smoothing::MleOnly) return mle(h, k, w);
    return witten_bell(h, k, w);
  }

  // Mean NLL of a token sequence, histories drawn from within the
  // sequence itself.
  NllReport sequence_nll(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) throw EmptySegment("segment has no tokens");
    std::vector<uint32_t> ids(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) ids[i] = vocab_.lookup(tokens[i]);
    double sum = 0.0;
    std::vector<uint32_t> history;
    for (size_t t = 0; t < ids.size(); ++t) {
      history.assign(ids.begin() + std::max<ptrdiff_t>(0, ptrdiff_t(t) - (order_ - 1)),
                     ids.begin() + t);
      sum -= std::log(prob(history, ids[t]));
    }
    return {sum / double(tokens.size()), tokens.size()};
  }

  template <typename Fn>
  void for_each_count(Fn&& fn) const {
    for (int k = 0; k < order_; ++k)
      for (const auto& [key, node] : levels_[k])
        for (const auto& [w, c] : node.counts) fn(k, key, node.total, w, c);
  }

  // -- serialization helpers (sorted, so dumps are reproducible) --
  struct FlatNode {
    uint64_t key;
    uint64_t total;
    std::vector<std::pair<uint32_t, uint32_t>> counts;
  };

  std::vector<std::vector<FlatNode>> flatten() const {
    std::vector<std::vector<FlatNode>> out(levels_.size());
    for (size_t k = 0; k < levels_.size(); ++k) {
      out[k].reserve(levels_[k].size());
      for (const auto& [key, node] : levels_[k]) {
        FlatNode fn{key, node.total, {node.counts.begin(), node.counts.end()}};
        std::sort(fn.counts.begin(), fn.counts.end());
        out[k].push_back(std::move(fn));
      }
      std::sort(out[k].begin(), out[k].end(),
                [](const FlatNode& a, const FlatNode& b) { return a.key < b.key; });
    }
    return out;
  }

  void restore(int order, Smoothing smoothing, Vocab vocab,
               const std::vector<std::vector<FlatNode>>& flat) {
    *this = NGramModel(order, smoothing);
    vocab_ = std::move(vocab);
    for (size_t k = 0; k < flat.size() && k < levels_.size(); ++k) {
      for (const auto& fn : flat[k]) {
        Node& node = levels_[k][fn.key];
        node.total = fn.total;
        for (auto [w, c] : fn.counts) node.counts[w] = c;
      }
    }
  }

 private:
  struct Node {
    uint64_t total = 0;
    std::unordered_map<uint32_t, uint32_t> counts;
  };

  static uint64_t history_key(const uint32_t* h, int k) {
    uint64_t key = 0;
    for (int i = 0; i < k; ++i) key = (key << kIdBits) | h[i];
    return key;
  }

  double uniform_base() const { return 1.0 / double(vocab_.size()); }

  double witten_bell(const uint32_t* h, int k, uint32_t w) const {
    double lower = (k == 0) ? uniform_base() : witten_bell(h + 1, k - 1, w);
    auto it = levels_[k].find(history_key(h, k));
    if (it == levels_[k].end() || it->second.total == 0) return lower;
    const Node& node = it->second;
    double types = double(node.counts.size());
    auto cit = node.counts.find(w);
    double c = cit == node.counts.end() ? 0.0 : double(cit->second);
    return (c + types * lower) / (double(node.total) + types);
  }

  double mle(const uint32_t* h, int k, uint32_t w) const {
    auto it = levels_[k].find(history_key(h, k));
    if (it == levels_[k].end() || it->second.total == 0) return 0.0;
    auto cit = it->second.counts.find(w);
    if (cit == it->second.counts.end()) return 0.0;
    return double(cit->second) / double(it->second.total);
  }

  int order_ = 3;
  Smoothing smoothing_ = Smoothing::WittenBell;
  Vocab vocab_;
  std::vector<std::unordered_map<uint64_t, Node>> levels_;
};

// ---------------------------------------------------------------------------
// Cache-interpolated verifier backend
// ---------------------------------------------------------------------------

struct NgramVerifierConfig {
  int order = 3;
  double lambda = 0.8;  // cache weight in [0, 1]
  Smoothing smoothing = Smoothing::WittenBell;
  TokenizerSpec tokenizer;
  size_t context_cache_capacity = 256;
};

// Frozen background n-gram model; conditioning on a context interpolates
// it with an n-gram model counted over that context alone:
//   P'(w|h) = lambda * P_cache(w|h) + (1 - lambda) * P_bg(w|h).
// The cache model's vocabulary extends the background vocabulary with the
// context's novel tokens, so context-only tokens are scored as themselves
// rather than collapsing into the unknown symbol.
class NgramCacheVerifier : public VerifierBackend {
 public:
  NgramCacheVerifier(NGramModel background, NgramVerifierConfig cfg)
      : background_(std::move(background)), cfg_(std::move(cfg)) {
    if (cfg_.lambda < 0.0 || cfg_.lambda > 1.0)
      throw ConfigError("lambda must lie in [0, 1]");
  }

  // Movable; the context cache starts empty in the destination.
  NgramCacheVerifier(NgramCacheVerifier&& other) noexcept
      : VerifierBackend(other),
        background_(std::move(other.background_)),
        cfg_(std::move(other.cfg_)) {}

  std::string name() const override { return "ngram-cache"; }

  const NGramModel& background() const { return background_; }
  const NgramVerifierConfig& config() const { return cfg_; }

  void save(std::ostream& os) const;
  static NgramCacheVerifier load(std::istream& is);
  void save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write model file: " + path);
    save(os);
  }
  static NgramCacheVerifier load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read model file: " + path);
    return load(is);
  }

 protected:
  NllReport do_nll(std::string_view segment,
                   std::optional<std::string_view> context) const override {
    auto tokens = word_punct_tokens(segment, cfg_.tokenizer.lowercase);
    if (tokens.empty()) throw EmptySegment("segment has no tokens");
    // Absent context and empty context mean the same thing: the prior.
    if (!context || context->empty()) return background_.sequence_nll(tokens);

    std::shared_ptr<const CacheEntry> entry = cache_for(*context);
    double sum = 0.0;
    std::vector<uint32_t> bg_hist, ext_hist;
    std::vector<uint32_t> bg_ids(tokens.size()), ext_ids(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) {
      bg_ids[i] = background_.vocab().lookup(tokens[i]);
      ext_ids[i] = entry->model.vocab().lookup(tokens[i]);
    }
    const int span = cfg_.order - 1;
    for (size_t t = 0; t < tokens.size(); ++t) {
      size_t from = t > size_t(span) ? t - span : 0;
      bg_hist.assign(bg_ids.begin() + from, bg_ids.begin() + t);
      ext_hist.assign(ext_ids.begin() + from, ext_ids.begin() + t);
      double p_bg = background_.prob(bg_hist, bg_ids[t]);
      double p_cache = entry->model.prob(ext_hist, ext_ids[t]);
      sum -= std::log(cfg_.lambda * p_cache + (1.0 - cfg_.lambda) * p_bg);
    }
    return {sum / double(tokens.size()), tokens.size()};
  }

 private:
  struct CacheEntry {
    NGramModel model;
  };

  std::shared_ptr<const CacheEntry> cache_for(std::string_view context) const {
    uint64_t key = 1469598103934665603ULL;  // FNV-1a
    for (char c : context) {
      key ^= uint8_t(c);
      key *= 1099511628211ULL;
    }
    key ^= context.size();

    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first;
    }
    auto entry = std::make_shared<CacheEntry>();
    entry->model = NGramModel(cfg_.order, cfg_.smoothing);
    // Seed the extended vocabulary with the background's words so token
    // identities agree between the two component models.
    entry->model.seed_vocab(background_.vocab());
    entry->model.count_tokens(
        word_punct_tokens(context, cfg_.tokenizer.lowercase));
    lru_.push_front(key);
    cache_[key] = {entry, lru_.begin()};
    while (cache_.size() > cfg_.context_cache_capacity) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
    return entry;
  }

  NGramModel background_;
  NgramVerifierConfig cfg_;

  mutable std::mutex mutex_;
  mutable std::unordered_map<
      uint64_t, std::pair<std::shared_ptr<const CacheEntry>,
                          std::list<uint64_t>::iterator>>
      cache_;
  mutable std::list<uint64_t> lru_;
};

// ---------------------------------------------------------------------------
// Model file format: "CGNV", u32 version, u64 payload size, payload,
// u64 FNV-1a checksum of the payload. Little-endian throughout. The
// payload embeds tokenizer spec, smoothing, order, lambda, vocabulary and
// sorted count tables.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u8(std::string& b, uint8_t v) { b.push_back(char(v)); }
inline void put_u32(std::string& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& b, uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& b, double v) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(b, bits);
}
inline void put_str(std::string& b, std::string_view s) {
  put_u32(b, uint32_t(s.size()));
  b.append(s);
}

struct Reader {
  std::string_view data;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > data.size()) throw IoError("model file truncated");
  }
  uint8_t u8() {
    need(1);
    return uint8_t(data[pos++]);
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(data[pos++])) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(data[pos++])) << (8 * i);
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string str() {
    uint32_t n = u32();
    need(n);
    std::string s(data.substr(pos, n));
    pos += n;
    return s;
  }
};

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= uint8_t(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

inline constexpr std::string_view kModelMagic = "CGNV";
inline constexpr uint32_t kModelVersion = 1;

inline void NgramCacheVerifier::save(std::ostream& os) const {
  std::string payload;
  detail::put_u8(payload, cfg_.tokenizer.lowercase ? 1 : 0);
  detail::put_u8(payload, uint8_t(cfg_.smoothing));
  detail::put_u32(payload, uint32_t(cfg_.order));
  detail::put_f64(payload, cfg_.lambda);
  detail::put_u64(payload, cfg_.context_cache_capacity);

  const auto& words = background_.vocab().words();
  detail::put_u64(payload, words.size() - 1);
  for (size_t i = 1; i < words.size(); ++i) detail::put_str(payload, words[i]);

  auto flat = background_.flatten();
  detail::put_u32(payload, uint32_t(flat.size()));
  for (const auto& level : flat) {
    detail::put_u64(payload, level.size());
    for (const auto& node : level) {
      detail::put_u64(payload, node.key);
      detail::put_u64(payload, node.total);
      detail::put_u32(payload, uint32_t(node.counts.size()));
      for (auto [w, c] : node.counts) {
        detail::put_u32(payload, w);
        detail::put_u32(payload, c);
      }
    }
  }

  std::string header;
  header.append(kModelMagic);
  detail::put_u32(header, kModelVersion);
  detail::put_u64(header, payload.size());
  os.write(header.data(), std::streamsize(header.size()));
  os.write(payload.data(), std::streamsize(payload.size()));
  std::string tail;
  detail::put_u64(tail, detail::fnv1a(payload));
  os.write(tail.data(), std::streamsize(tail.size()));
  if (!os) throw IoError("model write failed");
}

inline NgramCacheVerifier NgramCacheVerifier::load(std::istream& is) {
  std::ostringstream buf;
  buf << is.rdbuf();
  std::string all = buf.str();
  detail::Reader r{all};

  r.need(4);
  if (all.substr(0, 4) != kModelMagic) throw IoError("not a model file");
  r.pos = 4;
  uint32_t version = r.u32();
  if (version != kModelVersion)
    throw IoError("unsupported model version " + std::to_string(version));
  uint64_t payload_size = r.u64();
  r.need(payload_size + 8);
  std::string_view payload = std::string_view(all).substr(r.pos, payload_size);
  detail::Reader tail{all, r.pos + payload_size};
  if (tail.u64() != detail::fnv1a(payload))
    throw IoError("model checksum mismatch");

  detail::Reader p{payload};
  NgramVerifierConfig cfg;
  cfg.tokenizer.lowercase = p.u8() != 0;
  cfg.smoothing = Smoothing(p.u8());
  cfg.order = int(p.u32());
  cfg.lambda = p.f64();
  cfg.context_cache_capacity = size_t(p.u64());

  Vocab vocab;
  uint64_t n_words = p.u64();
  for (uint64_t i = 0; i < n_words; ++i) vocab.add(p.str());

  uint32_t n_levels = p.u32();
  std::vector<std::vector<NGramModel::FlatNode>> flat(n_levels);
  for (auto& level : flat) {
    uint64_t n_nodes = p.u64();
    level.resize(n_nodes);
    for (auto& node : level) {
      node.key = p.u64();
      node.total = p.u64();
      uint32_t n_counts = p.u32();
      node.counts.resize(n_counts);
      for (auto& [w, c] : node.counts) {
        w = p.u32();
        c = p.u32();
      }
    }
  }

  NGramModel model;
  model.restore(cfg.order, cfg.smoothing, std::move(vocab), flat);
  return NgramCacheVerifier(std::move(model), cfg);
}

// Counts all k-grams (k <= order) of the corpus text.
inline NgramCacheVerifier fit_background(const NgramVerifierConfig& cfg,
                                         std::string_view corpus) {
  auto tokens = word_punct_tokens(corpus, cfg.tokenizer.lowercase);
  if (tokens.empty()) throw EmptyCorpus("background corpus has no tokens");
  NGramModel model(cfg.order, cfg.smoothing);
  model.count_tokens(tokens);
  return NgramCacheVerifier(std::move(model), cfg);
}

inline NgramCacheVerifier fit_background(const NgramVerifierConfig& cfg,
                                         std::istream& corpus) {
  std::ostringstream buf;
  buf << corpus.rdbuf();
  return fit_background(cfg, buf.str());
}

// Default verifier: order-3 Witten–Bell over the embedded filler pool,
// cache weight 0.8. GPU-free and exactly reproducible.
inline NgramCacheVerifier default_verifier(NgramVerifierConfig cfg = {}) {
  std::string corpus;
  for (const auto& s : filler_pool()) {
    corpus += s;
    corpus.push_back(' ');
  }
  return fit_background(cfg, corpus);
}

}  // namespace ctxgain
