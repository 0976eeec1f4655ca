#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctxgain/corpus.hpp"
#include "ctxgain/grounding.hpp"
#include "ctxgain/trajectory.hpp"
#include "ctxgain/verifier.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ctxgain_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

inline void spit(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
}

// ---------------------------------------------------------------------------
// Independent grounding oracle. Locates a quote by a two-pointer walk over
// the ORIGINAL text that treats any whitespace run as a single space, with
// no normalized-string construction or offset table. Deliberately a
// different algorithm from DocumentIndex.
// ---------------------------------------------------------------------------

inline std::optional<ctxgain::DocSpan> brute_force_locate(
    const std::string& text, const std::string& quote) {
  std::string needle = ctxgain::normalize_text(quote);
  if (needle.empty()) return std::nullopt;

  for (size_t start = 0; start < text.size(); ++start) {
    if (ctxgain::is_space(text[start])) continue;
    if (text[start] != needle[0]) continue;
    size_t ti = start, qi = 0;
    bool ok = true;
    while (qi < needle.size()) {
      if (ti >= text.size()) {
        ok = false;
        break;
      }
      if (needle[qi] == ' ') {
        // One or more whitespace chars on the text side.
        if (!ctxgain::is_space(text[ti])) {
          ok = false;
          break;
        }
        while (ti < text.size() && ctxgain::is_space(text[ti])) ++ti;
        ++qi;
      } else if (text[ti] == needle[qi]) {
        ++ti;
        ++qi;
      } else {
        ok = false;
        break;
      }
    }
    if (ok) return ctxgain::DocSpan{start, ti};
  }
  return std::nullopt;
}

// O(quotes x gold) overlap count, independent of grounding.hpp internals.
inline size_t brute_force_distractors(const ctxgain::Document& doc,
                                      const ctxgain::Trajectory& traj) {
  size_t n = 0;
  for (const auto& q : traj.quotes) {
    auto span = brute_force_locate(doc.text, q.text);
    if (!span) continue;
    bool evidence = false;
    for (const auto& g : doc.gold_spans)
      if (span->start < g.end && g.start < span->end) evidence = true;
    if (!evidence) ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Scripted verifier: fixed (prior, posterior) per normalized segment.
// ---------------------------------------------------------------------------

class FakeBackend : public ctxgain::VerifierBackend {
 public:
  std::string name() const override { return "fake"; }

  void set(const std::string& segment, double prior, double posterior) {
    table_[ctxgain::normalize_text(segment)] = {prior, posterior};
  }

 protected:
  ctxgain::NllReport do_nll(
      std::string_view segment,
      std::optional<std::string_view> context) const override {
    auto it = table_.find(ctxgain::normalize_text(segment));
    if (it == table_.end())
      throw std::runtime_error("FakeBackend: unknown segment");
    bool posterior = context && !context->empty();
    return {posterior ? it->second.second : it->second.first, 1};
  }

 private:
  std::map<std::string, std::pair<double, double>> table_;
};

}  // namespace testutil
