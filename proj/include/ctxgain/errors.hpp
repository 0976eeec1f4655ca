#pragma once

#include <stdexcept>
#include <string>

namespace ctxgain {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Needles or assignments cannot be placed without overlapping.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A rendered component contains a reserved tag or delimiter literal.
struct TagCollision : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quote classification requested on a document without gold spans.
struct UndefinedGold : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCorpus : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptySegment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Remote scoring failed: transport, malformed response, or token
// alignment mismatch. Never converted into a silent zero reward.
struct RemoteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingGold : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GroupTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyStage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ctxgain
