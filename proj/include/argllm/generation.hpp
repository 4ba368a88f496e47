#pragma once

// Building a QBAF around a claim: grow the argument tree with a generative
// backend, then attach base scores with an evaluative backend.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "argllm/backend.hpp"
#include "argllm/error.hpp"
#include "argllm/qbaf.hpp"
#include "argllm/templates.hpp"

namespace argllm {

enum class ClaimBaseMode { fixed_half, estimated };

constexpr std::string_view to_string(ClaimBaseMode m) {
  return m == ClaimBaseMode::fixed_half ? "fixed_half" : "estimated";
}

inline std::optional<ClaimBaseMode> parse_base_mode(std::string_view s) {
  if (s == "fixed_half" || s == "fixed" || s == "0.5") return ClaimBaseMode::fixed_half;
  if (s == "estimated" || s == "est") return ClaimBaseMode::estimated;
  return std::nullopt;
}

struct GenerationParams {
  int depth = 1;
  int supporters_per_node = 1;
  int attackers_per_node = 1;
  ClaimBaseMode claim_base_mode = ClaimBaseMode::fixed_half;

  void check() const {
    if (depth < 1) throw Error(ErrorCode::precondition, "depth must be >= 1");
    if (supporters_per_node < 0 || attackers_per_node < 0)
      throw Error(ErrorCode::precondition, "per-node argument counts must be >= 0");
  }
  /// Depths other than 1 and 2 work but are outside the evaluated setting.
  bool experimental() const { return depth > 2; }

  /// Argument count of the full tree: sum_{k=0..depth} (s + a)^k.
  std::size_t expected_size() const {
    std::size_t width = static_cast<std::size_t>(supporters_per_node + attackers_per_node);
    std::size_t total = 0, level = 1;
    for (int k = 0; k <= depth; ++k) {
      total += level;
      level *= width;
    }
    return total;
  }
};

inline constexpr double kNeutralBaseScore = 0.5;

// ---------------------------------------------------------------------------
// Confidence parsing

/// First number in `text` (integer or decimal), clamped to [0, 100], scaled
/// to [0, 1]. Returns nullopt when the text holds no number.
inline std::optional<double> try_parse_confidence(const std::string& text) {
  static const std::regex number(R"((\d+(?:\.\d+)?|\.\d+))");
  std::smatch m;
  if (!std::regex_search(text, m, number)) return std::nullopt;
  double v = std::stod(m.str(1));
  return std::clamp(v, 0.0, 100.0) / 100.0;
}

inline double parse_confidence(const std::string& text) {
  auto v = try_parse_confidence(text);
  if (!v) throw Error(ErrorCode::unparseable_confidence, "no number in \"" + text + "\"");
  return *v;
}

/// Renders a score back to the 0-100 scale the parser reads.
inline std::string format_confidence(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", score * 100.0);
  return buf;
}

// ---------------------------------------------------------------------------
// Argument generation

namespace detail {
inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}
}  // namespace detail

inline const ArgumentId kClaimId{"claim"};

/// Grows a BAF breadth-first. Children of argument `p` get ids `p.s1`,
/// `p.a1`, ...; direct children of the claim are `s1`, `a1`, .... Supporters
/// are generated before attackers. Calls are issued one at a time in this
/// fixed order, so the output depends only on the backend's answers.
inline Qbaf generate_baf(const std::string& claim, Backend& backend, const GenerationParams& params,
                         const TemplateSet& templates = TemplateSet::builtin(), const TemplateRoles& roles = {},
                         Transcript* log = nullptr) {
  params.check();
  if (detail::trim(claim).empty()) throw Error(ErrorCode::precondition, "claim must be non-empty");
  const PromptTemplate& tmpl = templates.get(roles.generate);

  std::vector<Argument> args{{kClaimId, claim, std::nullopt}};
  std::vector<Relation> rels;
  struct Pending {
    ArgumentId id;
    std::string text;
    int depth;
  };
  std::deque<Pending> queue{{kClaimId, claim, 0}};
  while (!queue.empty()) {
    Pending node = std::move(queue.front());
    queue.pop_front();
    if (node.depth >= params.depth) continue;
    const std::string prefix = node.id == kClaimId ? "" : node.id.value + ".";
    for (Polarity pol : {Polarity::support, Polarity::attack}) {
      const int count = pol == Polarity::support ? params.supporters_per_node : params.attackers_per_node;
      for (int k = 1; k <= count; ++k) {
        CompletionRequest req;
        req.task = Task::generate_argument;
        req.supporting = pol == Polarity::support;
        req.ordinal = k;
        req.subject = node.text;
        req.prompt = tmpl.render({{"claim", node.text}}, pol);
        std::string text;
        try {
          text = detail::trim(call(backend, req, log));
        } catch (const Error& e) {
          if (e.code() == ErrorCode::backend_failure) throw;
          throw Error(ErrorCode::backend_failure, std::string("argument generation: ") + e.what());
        }
        if (text.empty())
          throw Error(ErrorCode::backend_failure, "empty completion for a child of '" + node.id.value + "'");
        ArgumentId id(prefix + (pol == Polarity::support ? "s" : "a") + std::to_string(k));
        args.push_back({id, text, std::nullopt});
        rels.push_back({id, node.id, pol});
        queue.push_back({id, text, node.depth + 1});
      }
    }
  }
  return Qbaf(kClaimId, std::move(args), std::move(rels));
}

// ---------------------------------------------------------------------------
// Base score attribution

/// Asks for a confidence once, retries once on unparseable output, then falls
/// back to the neutral score and logs a warning.
inline double score_with_retry(Backend& backend, CompletionRequest req, Transcript* log) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    req.attempt = attempt;
    std::string raw = call(backend, req, log);
    if (auto v = try_parse_confidence(raw)) return *v;
    if (log) log->warn("unparseable confidence \"" + raw + "\" (attempt " + std::to_string(attempt + 1) + ")");
  }
  if (log) log->warn("substituting neutral base score 0.5 for '" + req.subject + "'");
  return kNeutralBaseScore;
}

inline Qbaf assign_base_scores(const Qbaf& baf, Backend& backend, const GenerationParams& params,
                               const TemplateSet& templates = TemplateSet::builtin(), const TemplateRoles& roles = {},
                               Transcript* log = nullptr) {
  require_valid(baf, ValidationMode::structural);
  const PromptTemplate& score_tmpl = templates.get(roles.score);
  auto args = baf.arguments();
  for (std::size_t i = 0; i < args.size(); ++i) {
    auto& a = args[i];
    CompletionRequest req;
    req.subject = a.text;
    if (a.id == baf.root()) {
      if (params.claim_base_mode == ClaimBaseMode::fixed_half) {
        a.base_score = kNeutralBaseScore;
        continue;
      }
      req.task = Task::score_claim;
      req.prompt = templates.get(roles.score_claim).render({{"claim", a.text}});
    } else {
      const Relation& edge = baf.relations()[baf.outgoing(i).front()];
      const Argument& parent = baf.at(edge.target);
      req.task = Task::score_argument;
      req.prompt = score_tmpl.render({{"claim", parent.text}, {"argument", a.text}}, edge.polarity);
    }
    a.base_score = score_with_retry(backend, req, log);
  }
  Qbaf q(baf.root(), std::move(args), baf.relations());
  require_valid(q);
  return q;
}

inline Qbaf build_qbaf(const std::string& claim, Backend& backend, const GenerationParams& params,
                       const TemplateSet& templates = TemplateSet::builtin(), const TemplateRoles& roles = {},
                       Transcript* log = nullptr) {
  return assign_base_scores(generate_baf(claim, backend, params, templates, roles, log), backend, params, templates,
                            roles, log);
}

}  // namespace argllm
