#pragma once

// Claim verification: the argumentative method and three prompting baselines.

#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "argllm/backend.hpp"
#include "argllm/document.hpp"
#include "argllm/generation.hpp"
#include "argllm/semantics.hpp"
#include "argllm/templates.hpp"

namespace argllm {

inline constexpr double kDecisionThreshold = 0.5;

/// Strictly above the threshold is true; exactly 0.5 is false.
constexpr bool decide(double strength) { return strength > kDecisionThreshold; }

struct Claim {
  std::string id;
  std::string text;
  std::optional<std::string> context;
  std::optional<bool> gold_label;
};

enum class Method { argllm, direct_question, est_confidence, chain_of_thought };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::argllm: return "argllm";
    case Method::direct_question: return "direct_question";
    case Method::est_confidence: return "est_confidence";
    case Method::chain_of_thought: return "chain_of_thought";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "argllm") return Method::argllm;
  if (s == "direct_question" || s == "direct") return Method::direct_question;
  if (s == "est_confidence" || s == "confidence") return Method::est_confidence;
  if (s == "chain_of_thought" || s == "cot") return Method::chain_of_thought;
  return std::nullopt;
}

struct MethodConfig {
  Method method = Method::argllm;
  SemanticsId semantics = SemanticsId::df_quad;
  GenerationParams generation;
  TemplateRoles roles;

  /// Column label in results tables, e.g. "Est. Base Arg (D=2)".
  std::string display_name() const {
    switch (method) {
      case Method::direct_question: return "Direct Question";
      case Method::est_confidence: return "Est. Confidence";
      case Method::chain_of_thought: return "Chain-of-Thought";
      case Method::argllm: break;
    }
    std::string name = generation.claim_base_mode == ClaimBaseMode::fixed_half ? "0.5 Base Arg" : "Est. Base Arg";
    name += " (D=" + std::to_string(generation.depth) + ")";
    if (generation.supporters_per_node != 1 || generation.attackers_per_node != 1)
      name += " [" + std::to_string(generation.supporters_per_node) + "+" +
              std::to_string(generation.attackers_per_node) + "]";
    if (semantics != SemanticsId::df_quad) name += " [" + std::string(to_string(semantics)) + "]";
    return name;
  }

  /// The four argumentative variants: {0.5, estimated} x {D=1, D=2}.
  static std::vector<MethodConfig> argllm_variants(SemanticsId sem = SemanticsId::df_quad) {
    std::vector<MethodConfig> out;
    for (auto mode : {ClaimBaseMode::fixed_half, ClaimBaseMode::estimated})
      for (int depth : {1, 2}) {
        MethodConfig c;
        c.semantics = sem;
        c.generation.depth = depth;
        c.generation.claim_base_mode = mode;
        out.push_back(c);
      }
    return out;
  }

  static MethodConfig baseline(Method m) {
    MethodConfig c;
    c.method = m;
    return c;
  }
};

struct Verdict {
  std::string claim_id;
  std::string method;
  bool label = false;
  double root_strength = 0.0;
  std::optional<Qbaf> qbaf;
  std::optional<StrengthMap> strengths;
  Transcript transcript;
};

inline Json verdict_to_json(const Verdict& v, bool with_transcript = false) {
  Json j;
  j["claim_id"] = v.claim_id;
  j["method"] = v.method;
  j["label"] = v.label;
  j["root_strength"] = v.root_strength;
  if (v.qbaf) {
    std::vector<StrengthMap> s;
    if (v.strengths) s.push_back(*v.strengths);
    j["qbaf"] = to_document(*v.qbaf, s);
  }
  j["warnings"] = v.transcript.warnings();
  if (with_transcript) {
    j["transcript"] = Json::array();
    for (const auto& e : v.transcript.exchanges())
      j["transcript"].push_back(
          {{"task", e.task}, {"prompt", e.prompt}, {"response", e.response}, {"timestamp", e.timestamp}});
  }
  return j;
}

// ---------------------------------------------------------------------------

/// Embeds trusted background information into the claim text. Absent or
/// empty context returns the claim unchanged (empty context also warns).
inline std::string condition_claim(const Claim& claim, Transcript* log = nullptr) {
  if (!claim.context) return claim.text;
  if (claim.context->empty()) {
    if (log) log->warn("empty context for claim '" + claim.id + "' treated as absent");
    return claim.text;
  }
  return "Consider the following background information: " + *claim.context +
         " Given the background information the following is correct: " + claim.text;
}

/// First standalone "true" or "false", case-insensitive.
inline std::optional<bool> parse_true_false(const std::string& text) {
  static const std::regex word(R"(\b(true|false)\b)", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(text, m, word)) return std::nullopt;
  char c = m.str(1)[0];
  return c == 't' || c == 'T';
}

namespace detail {
inline bool ask_true_false(Backend& backend, CompletionRequest req, Transcript* log) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    req.attempt = attempt;
    std::string raw = call(backend, req, log);
    if (auto v = parse_true_false(raw)) return *v;
    if (log) log->warn("no true/false in \"" + raw + "\"");
  }
  throw Error(ErrorCode::unparseable_answer, "no true/false answer after retry");
}
}  // namespace detail

inline Verdict verify_argllm(const Claim& claim, const MethodConfig& config, Backend& backend,
                             const TemplateSet& templates = TemplateSet::builtin()) {
  Verdict v;
  v.claim_id = claim.id;
  v.method = config.display_name();
  const std::string text = condition_claim(claim, &v.transcript);
  Qbaf q = build_qbaf(text, backend, config.generation, templates, config.roles, &v.transcript);
  StrengthMap s = evaluate(q, config.semantics);
  v.root_strength = s.at(q.root());
  v.label = decide(v.root_strength);
  v.qbaf = std::move(q);
  v.strengths = std::move(s);
  return v;
}

inline Verdict verify_direct_question(const Claim& claim, const MethodConfig& config, Backend& backend,
                                      const TemplateSet& templates = TemplateSet::builtin()) {
  Verdict v;
  v.claim_id = claim.id;
  v.method = config.display_name();
  const std::string text = condition_claim(claim, &v.transcript);
  CompletionRequest req;
  req.task = Task::direct_question;
  req.subject = text;
  req.prompt = templates.get(config.roles.direct_question).render({{"claim", text}});
  v.label = detail::ask_true_false(backend, req, &v.transcript);
  v.root_strength = v.label ? 1.0 : 0.0;
  return v;
}

inline Verdict verify_est_confidence(const Claim& claim, const MethodConfig& config, Backend& backend,
                                     const TemplateSet& templates = TemplateSet::builtin()) {
  Verdict v;
  v.claim_id = claim.id;
  v.method = config.display_name();
  const std::string text = condition_claim(claim, &v.transcript);
  CompletionRequest req;
  req.task = Task::estimate_confidence;
  req.subject = text;
  req.prompt = templates.get(config.roles.confidence).render({{"claim", text}});
  std::optional<double> score;
  for (int attempt = 0; attempt < 2 && !score; ++attempt) {
    req.attempt = attempt;
    score = try_parse_confidence(call(backend, req, &v.transcript));
  }
  if (!score) throw Error(ErrorCode::unparseable_confidence, "no confidence after retry");
  v.root_strength = *score;
  v.label = decide(v.root_strength);
  return v;
}

inline Verdict verify_chain_of_thought(const Claim& claim, const MethodConfig& config, Backend& backend,
                                       const TemplateSet& templates = TemplateSet::builtin()) {
  Verdict v;
  v.claim_id = claim.id;
  v.method = config.display_name();
  const std::string text = condition_claim(claim, &v.transcript);
  CompletionRequest first;
  first.task = Task::cot_reasoning;
  first.subject = text;
  first.prompt = templates.get(config.roles.cot_reasoning).render({{"claim", text}});
  const std::string reasoning = call(backend, first, &v.transcript);

  // The decision runs in a fresh context holding only the reasoning.
  CompletionRequest second;
  second.task = Task::cot_decision;
  second.subject = text;
  second.prompt = templates.get(config.roles.cot_decision)
                      .render({{std::string(kReasoningPlaceholder), reasoning}, {"claim", text}});
  v.label = detail::ask_true_false(backend, second, &v.transcript);
  v.root_strength = v.label ? 1.0 : 0.0;
  return v;
}

inline Verdict verify(const Claim& claim, const MethodConfig& config, Backend& backend,
                      const TemplateSet& templates = TemplateSet::builtin()) {
  switch (config.method) {
    case Method::argllm: return verify_argllm(claim, config, backend, templates);
    case Method::direct_question: return verify_direct_question(claim, config, backend, templates);
    case Method::est_confidence: return verify_est_confidence(claim, config, backend, templates);
    case Method::chain_of_thought: return verify_chain_of_thought(claim, config, backend, templates);
  }
  throw Error(ErrorCode::precondition, "unknown method");
}

}  // namespace argllm
