#pragma once

// Completion backends. Every model interaction in the library goes through
// Backend::complete with a CompletionRequest that names the task, so a
// deterministic mock can answer without parsing prompts.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "argllm/error.hpp"

namespace argllm {

/// Selects the max-new-tokens budget on real endpoints.
enum class Purpose { argument, score, baseline };

enum class Task {
  generate_argument,
  score_argument,
  score_claim,
  direct_question,
  estimate_confidence,
  cot_reasoning,
  cot_decision,
};

constexpr std::string_view to_string(Purpose p) {
  switch (p) {
    case Purpose::argument: return "argument";
    case Purpose::score: return "score";
    case Purpose::baseline: return "baseline";
  }
  return "?";
}

constexpr std::string_view to_string(Task t) {
  switch (t) {
    case Task::generate_argument: return "generate_argument";
    case Task::score_argument: return "score_argument";
    case Task::score_claim: return "score_claim";
    case Task::direct_question: return "direct_question";
    case Task::estimate_confidence: return "estimate_confidence";
    case Task::cot_reasoning: return "cot_reasoning";
    case Task::cot_decision: return "cot_decision";
  }
  return "?";
}

constexpr Purpose purpose_of(Task t) {
  switch (t) {
    case Task::generate_argument: return Purpose::argument;
    case Task::score_argument:
    case Task::score_claim: return Purpose::score;
    default: return Purpose::baseline;
  }
}

struct CompletionRequest {
  Task task = Task::generate_argument;
  std::string prompt;
  /// generate_argument only: true for a supporter, false for an attacker.
  bool supporting = true;
  /// generate_argument only: 1-based index among same-polarity siblings.
  int ordinal = 1;
  /// Text being argued about (parent argument or claim); informational.
  std::string subject;
  /// 0 for the first try; retries after unparseable output bump this so a
  /// caching transport does not return the same bytes again.
  int attempt = 0;

  Purpose purpose() const { return purpose_of(task); }
};

/// Implementations must tolerate concurrent complete() calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string describe() const = 0;
};

// ---------------------------------------------------------------------------
// Transcript: prompt/response audit trail of one verification.

struct Exchange {
  std::string task;
  std::string prompt;
  std::string response;
  std::string timestamp;  // ISO-8601 UTC
};

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return os.str();
}

class Transcript {
 public:
  void record(const CompletionRequest& req, const std::string& response) {
    std::lock_guard lock(mu_);
    exchanges_.push_back({std::string(to_string(req.task)), req.prompt, response, utc_timestamp()});
  }
  void warn(std::string message) {
    std::lock_guard lock(mu_);
    warnings_.push_back(std::move(message));
  }
  std::vector<Exchange> exchanges() const {
    std::lock_guard lock(mu_);
    return exchanges_;
  }
  std::vector<std::string> warnings() const {
    std::lock_guard lock(mu_);
    return warnings_;
  }
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return exchanges_.size();
  }

  Transcript() = default;
  Transcript(const Transcript& o) : exchanges_(o.exchanges()), warnings_(o.warnings()) {}
  Transcript& operator=(const Transcript& o) {
    if (this != &o) {
      auto e = o.exchanges();
      auto w = o.warnings();
      std::lock_guard lock(mu_);
      exchanges_ = std::move(e);
      warnings_ = std::move(w);
    }
    return *this;
  }

 private:
  mutable std::mutex mu_;
  std::vector<Exchange> exchanges_;
  std::vector<std::string> warnings_;
};

/// Calls the backend and records the exchange.
inline std::string call(Backend& backend, const CompletionRequest& req, Transcript* log) {
  std::string out = backend.complete(req);
  if (log) log->record(req, out);
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic backends.

namespace detail {
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}
inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Stable across platforms: FNV-1a over the seed and prompt, then splitmix.
inline std::uint64_t stable_hash(std::uint64_t seed, std::string_view text) {
  std::string s = std::to_string(seed);
  s.push_back('\x1f');
  return detail::splitmix(detail::fnv1a(text, detail::fnv1a(s)));
}

/// Offline stand-in for a model. Argument text is templated from the parent;
/// scores and true/false answers are pseudo-random functions of (seed, prompt),
/// so answers never depend on call order.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(std::uint64_t seed = 0) : seed_(seed) {}

  std::string complete(const CompletionRequest& req) override {
    const auto h = stable_hash(seed_, req.prompt + '\x1e' + std::to_string(req.attempt));
    switch (req.task) {
      case Task::generate_argument: {
        std::string prefix = req.subject.substr(0, 48);
        return std::string(req.supporting ? "Supporting" : "Attacking") + " point #" + std::to_string(req.ordinal) +
               " for: " + prefix;
      }
      case Task::score_argument:
      case Task::score_claim:
      case Task::estimate_confidence:
        return std::to_string(h % 101);
      case Task::direct_question:
      case Task::cot_decision:
        return (h & 1) ? "True." : "False.";
      case Task::cot_reasoning:
        return "Step 1: restate the claim. Step 2: recall the relevant facts. Step 3: weigh them against the claim.";
    }
    return {};
  }

  std::string describe() const override { return "mock(seed=" + std::to_string(seed_) + ")"; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Wraps a callable; handy for scripted test doubles.
class FunctionBackend final : public Backend {
 public:
  using Fn = std::function<std::string(const CompletionRequest&)>;
  explicit FunctionBackend(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}
  std::string complete(const CompletionRequest& req) override { return fn_(req); }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

}  // namespace argllm
