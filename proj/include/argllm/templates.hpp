#pragma once

// Prompt templates. Placeholders use braces:
//   {name}        replaced from the variable map (claim, argument, ...)
//   {first|second} polarity choice: `first` when the argument supports its
//                 parent, `second` when it attacks.
// Rendering fails on any placeholder it cannot resolve.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "argllm/document.hpp"
#include "argllm/error.hpp"
#include "argllm/qbaf.hpp"

namespace argllm {

using TemplateVars = std::map<std::string, std::string, std::less<>>;

struct PromptTemplate {
  std::string name;
  std::string body;

  std::string render(const TemplateVars& vars, std::optional<Polarity> polarity = std::nullopt) const {
    std::string out;
    out.reserve(body.size() + 256);
    std::size_t i = 0;
    while (i < body.size()) {
      if (body[i] != '{') {
        out.push_back(body[i++]);
        continue;
      }
      auto close = body.find('}', i);
      if (close == std::string::npos)
        throw Error(ErrorCode::unresolved_placeholder, name + ": unterminated '{' at offset " + std::to_string(i));
      std::string_view key(body.data() + i + 1, close - i - 1);
      if (auto bar = key.find('|'); bar != std::string_view::npos) {
        if (!polarity)
          throw Error(ErrorCode::unresolved_placeholder, name + ": {" + std::string(key) + "} needs a polarity");
        out += *polarity == Polarity::support ? key.substr(0, bar) : key.substr(bar + 1);
      } else {
        auto it = vars.find(key);
        if (it == vars.end())
          throw Error(ErrorCode::unresolved_placeholder, name + ": no value for {" + std::string(key) + "}");
        out += it->second;
      }
      i = close + 1;
    }
    return out;
  }
};

/// Template roles used by the pipeline; values are template names.
struct TemplateRoles {
  std::string generate = "opro_generate";
  std::string score = "analyst_score";
  std::string score_claim = "analyst_score_claim";
  std::string direct_question = "analyst_direct_question";
  std::string confidence = "analyst_confidence";
  std::string cot_reasoning = "analyst_cot_reasoning";
  std::string cot_decision = "analyst_cot_decision";
};

inline constexpr std::string_view kReasoningPlaceholder = "Reasoning/Output from previous step";

class TemplateSet {
 public:
  /// Shipped templates; data/templates/ holds identical copies for editing.
  static const TemplateSet& builtin() {
    static const TemplateSet set = [] {
      TemplateSet s;
      for (auto& [name, body] : builtin_bodies()) s.add({name, body});
      return s;
    }();
    return set;
  }

  static const std::map<std::string, std::string>& builtin_bodies() {
    static const std::map<std::string, std::string> bodies{
      {"opro_generate", R"tmpl(Your task is to write one argument about the statement below. The argument must be {supporting|attacking}: it should {support|attack} the statement using a single, concise, factual sentence. Do not restate the statement and do not hedge.

Statement: {claim}

Argument:)tmpl"},
      {"analyst_score", R"tmpl(You are an analyst who judges the quality of arguments. Below is a statement and an argument that was made {in favour of|against} it.

Statement: {claim}
Argument: {argument}

How confident are you that the argument is factually correct and that it {supports|refutes} the statement? Answer with a single number from 0 (not at all confident) to 100 (completely confident) and nothing else.)tmpl"},
      {"analyst_score_claim", R"tmpl(You are an analyst who judges the truthfulness of claims. Read the claim below.

Claim: {claim}

How confident are you that the claim is true? Answer with a single number from 0 (certainly false) to 100 (certainly true) and nothing else.)tmpl"},
      {"analyst_direct_question", R"tmpl(You are an analyst who judges the truthfulness of claims. Read the claim below.

Claim: {claim}

Is the claim true or false? Answer with exactly one word: True or False.)tmpl"},
      {"analyst_confidence", R"tmpl(You are an analyst who judges the truthfulness of claims. Read the claim below.

Claim: {claim}

Give a confidence score for the claim being true, ranging from 0 (certainly false) to 100 (certainly true). Answer with a single number and nothing else.)tmpl"},
      {"analyst_cot_reasoning", R"tmpl(You are an analyst who judges the truthfulness of claims. Read the claim below.

Claim: {claim}

Break the problem down into numbered steps. Work through each step in turn, stating the relevant facts, and finish with a short conclusion about whether the claim holds.)tmpl"},
      {"analyst_cot_decision", R"tmpl(You are an analyst. Below is a step-by-step analysis of a claim.

Analysis: {Reasoning/Output from previous step}

Based only on this analysis, is the claim true or false? Answer with exactly one word: True or False.)tmpl"},
      {"chatgpt_generate", R"tmpl(Generate a clear and relevant argument that {support|attack}s the following statement. Keep it to one sentence.

Statement: {claim})tmpl"},
      {"chatgpt_score", R"tmpl(Rate how convincing the following argument {in favour of|against} the statement is, on a scale from 0 to 100. Reply with the number only.

Statement: {claim}
Argument: {argument})tmpl"},
      {"debater_generate", R"tmpl(You are a skilled debater. Your opponent has put forward the statement below. Give your single strongest {supporting|attacking} argument, one sentence long, that would {support|attack} it in front of an impartial judge.

Statement: {claim})tmpl"},
      {"opro_score", R"tmpl(Estimate the probability, as a percentage from 0 to 100, that the argument below is true and {supports|refutes} the statement. Output only the number.

Statement: {claim}
Argument: {argument})tmpl"},
    };
    return bodies;
  }

  /// Builtins overlaid with every `<name>.txt` in `dir`.
  static TemplateSet from_directory(const std::filesystem::path& dir) {
    TemplateSet s = builtin();
    if (!std::filesystem::is_directory(dir))
      throw Error(ErrorCode::precondition, "template directory '" + dir.string() + "' not found");
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
      s.add({entry.path().stem().string(), read_text_file(entry.path().string())});
    }
    return s;
  }

  void add(PromptTemplate t) { table_[t.name] = std::move(t); }

  const PromptTemplate& get(const std::string& name) const {
    auto it = table_.find(name);
    if (it == table_.end()) throw Error(ErrorCode::unknown_template, "no template named '" + name + "'");
    return it->second;
  }

  const std::map<std::string, PromptTemplate>& all() const { return table_; }

 private:
  std::map<std::string, PromptTemplate> table_;
};

}  // namespace argllm
