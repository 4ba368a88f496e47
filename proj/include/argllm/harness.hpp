#pragma once

// Batch verification over line-delimited claim datasets, accuracy tables and
// per-claim records.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "argllm/document.hpp"
#include "argllm/error.hpp"
#include "argllm/pipeline.hpp"

namespace argllm {

struct Dataset {
  std::string name;
  std::vector<Claim> claims;
  bool conditioned = false;

  std::size_t count_true() const {
    return static_cast<std::size_t>(
        std::count_if(claims.begin(), claims.end(), [](const Claim& c) { return c.gold_label.value_or(false); }));
  }
  /// Fraction of claims labelled true.
  double balance() const { return claims.empty() ? 0.0 : double(count_true()) / double(claims.size()); }
};

namespace detail {
inline bool label_from_json(const Json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (s == "true") return true;
    if (s == "false") return false;
  }
  throw Error(ErrorCode::parse_error, where + ": label must be true or false");
}
}  // namespace detail

/// One JSON object per line: {"id", "claim", "context"?, "label"}. Blank
/// lines are ignored. Context must be on every record or on none.
inline Dataset parse_dataset(std::istream& in, std::string name) {
  Dataset ds;
  ds.name = std::move(name);
  std::string line;
  std::size_t lineno = 0, with_context = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = ds.name + ":" + std::to_string(lineno);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse_error, where + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::parse_error, where + ": expected an object");
    for (const char* key : {"claim", "label"})
      if (!j.contains(key)) throw Error(ErrorCode::missing_field, where + ": missing '" + key + "'");
    Claim c;
    if (j.contains("id")) c.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    else c.id = std::to_string(lineno);
    if (!j["claim"].is_string() || j["claim"].get<std::string>().empty())
      throw Error(ErrorCode::parse_error, where + ": 'claim' must be a non-empty string");
    c.text = j["claim"].get<std::string>();
    c.gold_label = detail::label_from_json(j["label"], where);
    if (j.contains("context") && !j["context"].is_null()) {
      if (!j["context"].is_string()) throw Error(ErrorCode::parse_error, where + ": 'context' must be a string");
      c.context = j["context"].get<std::string>();
      ++with_context;
    }
    ds.claims.push_back(std::move(c));
  }
  if (with_context != 0 && with_context != ds.claims.size())
    throw Error(ErrorCode::parse_error, ds.name + ": context on " + std::to_string(with_context) + " of " +
                                            std::to_string(ds.claims.size()) + " records; needs all or none");
  ds.conditioned = with_context != 0;
  return ds;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path);
  return parse_dataset(in, std::filesystem::path(path).stem().string());
}

/// Label-balanced subset of size n (half true, half false; an odd n gives
/// the extra claim to true). Claims keep dataset order.
inline Dataset balanced_sample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (n > ds.claims.size())
    throw Error(ErrorCode::precondition, "sample of " + std::to_string(n) + " from " +
                                             std::to_string(ds.claims.size()) + " claims");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.claims.size(); ++i) (ds.claims[i].gold_label.value_or(false) ? pos : neg).push_back(i);
  const std::size_t want_pos = n - n / 2, want_neg = n / 2;
  if (want_pos > pos.size() || want_neg > neg.size())
    throw Error(ErrorCode::precondition, "not enough claims of each label for a balanced sample of " +
                                             std::to_string(n));
  std::mt19937_64 rng(seed);
  auto draw = [&](std::vector<std::size_t>& pool, std::size_t k) {
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, pool.size() - 1);
      std::swap(pool[i], pool[d(rng)]);
    }
    pool.resize(k);
  };
  draw(pos, want_pos);
  draw(neg, want_neg);
  std::vector<std::size_t> chosen = pos;
  chosen.insert(chosen.end(), neg.begin(), neg.end());
  std::sort(chosen.begin(), chosen.end());
  Dataset out{ds.name, {}, ds.conditioned};
  for (auto i : chosen) out.claims.push_back(ds.claims[i]);
  return out;
}

// ---------------------------------------------------------------------------

struct ClaimRecord {
  std::string claim_id;
  std::optional<bool> gold_label;
  std::optional<Verdict> verdict;  // absent when skipped
  std::string error;

  bool skipped() const { return !verdict.has_value(); }
  bool correct() const { return verdict && gold_label && verdict->label == *gold_label; }
};

struct RunResult {
  std::string method;
  std::string dataset;
  std::vector<ClaimRecord> records;  // dataset order
  std::size_t correct = 0;
  std::size_t skipped = 0;
  double wall_seconds = 0.0;

  std::size_t evaluated() const { return records.size() - skipped; }
  /// correct / (total - skipped); absent when every claim was skipped.
  std::optional<double> accuracy() const {
    if (evaluated() == 0) return std::nullopt;
    return double(correct) / double(evaluated());
  }
};

struct RunOptions {
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  std::size_t concurrency = 1;
};

inline RunResult run_method(const Dataset& ds, const MethodConfig& method, Backend& backend,
                            std::size_t concurrency = 1, const TemplateSet& templates = TemplateSet::builtin()) {
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  r.method = method.display_name();
  r.dataset = ds.name;
  r.records.resize(ds.claims.size());
  auto work = [&](std::size_t i) {
    const Claim& c = ds.claims[i];
    ClaimRecord& rec = r.records[i];
    rec.claim_id = c.id;
    rec.gold_label = c.gold_label;
    try {
      rec.verdict = verify(c, method, backend, templates);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(concurrency, ds.claims.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < ds.claims.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < ds.claims.size();) work(i);
      });
  }
  for (const auto& rec : r.records) {
    r.skipped += rec.skipped();
    r.correct += rec.correct();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline std::vector<RunResult> run(const Dataset& ds, const std::vector<MethodConfig>& methods, Backend& backend,
                                  const RunOptions& options = {},
                                  const TemplateSet& templates = TemplateSet::builtin()) {
  const Dataset subset = options.sample ? balanced_sample(ds, *options.sample, options.seed) : ds;
  std::vector<RunResult> out;
  for (const auto& m : methods) out.push_back(run_method(subset, m, backend, options.concurrency, templates));
  return out;
}

// ---------------------------------------------------------------------------
// Output. Tables carry no timings so repeated runs are byte-identical.

inline std::string format_accuracy(const std::optional<double>& a) {
  if (!a) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *a);
  return buf;
}

/// Datasets as rows, methods as columns, followed by a skipped-count row per
/// dataset.
inline std::string format_table(const std::vector<RunResult>& results) {
  std::vector<std::string> methods, datasets;
  auto add_unique = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  for (const auto& r : results) {
    add_unique(methods, r.method);
    add_unique(datasets, r.dataset);
  }
  auto find = [&](const std::string& d, const std::string& m) -> const RunResult* {
    for (const auto& r : results)
      if (r.dataset == d && r.method == m) return &r;
    return nullptr;
  };

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Dataset"};
  header.insert(header.end(), methods.begin(), methods.end());
  rows.push_back(header);
  for (const auto& d : datasets) {
    std::vector<std::string> acc{d}, skip{"  skipped"};
    for (const auto& m : methods) {
      const RunResult* r = find(d, m);
      acc.push_back(r ? format_accuracy(r->accuracy()) : "-");
      skip.push_back(r ? std::to_string(r->skipped) : "-");
    }
    rows.push_back(acc);
    rows.push_back(skip);
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  auto rule = [&] {
    os << '+';
    for (auto w : width) os << std::string(w + 2, '-') << '+';
    os << '\n';
  };
  rule();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << '|';
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      os << ' ' << rows[i][c] << std::string(width[c] - rows[i][c].size(), ' ') << " |";
    os << '\n';
    if (i == 0) rule();
  }
  rule();
  return os.str();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string format_csv(const std::vector<RunResult>& results) {
  std::ostringstream os;
  os << "dataset,method,accuracy,correct,evaluated,skipped\n";
  for (const auto& r : results)
    os << csv_field(r.dataset) << ',' << csv_field(r.method) << ',' << format_accuracy(r.accuracy()) << ','
       << r.correct << ',' << r.evaluated() << ',' << r.skipped << '\n';
  return os.str();
}

/// One JSON line per (method, claim).
inline std::string format_records(const std::vector<RunResult>& results) {
  std::ostringstream os;
  for (const auto& r : results)
    for (const auto& rec : r.records) {
      Json j;
      j["dataset"] = r.dataset;
      j["method"] = r.method;
      j["claim_id"] = rec.claim_id;
      j["gold_label"] = rec.gold_label ? Json(*rec.gold_label) : Json(nullptr);
      if (rec.verdict) {
        j["status"] = "ok";
        j["label"] = rec.verdict->label;
        j["root_strength"] = rec.verdict->root_strength;
        j["correct"] = rec.correct();
        if (rec.verdict->qbaf) j["qbaf"] = verdict_to_json(*rec.verdict)["qbaf"];
        j["warnings"] = rec.verdict->transcript.warnings();
      } else {
        j["status"] = "skipped";
        j["error"] = rec.error;
      }
      os << j.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
    }
  return os.str();
}

/// Every prompt and response, one JSON line each.
inline std::string format_audit(const std::vector<RunResult>& results) {
  std::ostringstream os;
  for (const auto& r : results)
    for (const auto& rec : r.records) {
      if (!rec.verdict) continue;
      for (const auto& e : rec.verdict->transcript.exchanges()) {
        Json j{{"dataset", r.dataset}, {"method", r.method},   {"claim_id", rec.claim_id}, {"task", e.task},
               {"prompt", e.prompt},   {"response", e.response}, {"timestamp", e.timestamp}};
        os << j.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
      }
    }
  return os.str();
}

/// results.txt, results.csv, records.jsonl and audit.jsonl under `dir`.
inline void write_outputs(const std::vector<RunResult>& results, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file((dir / "results.txt").string(), format_table(results));
  write_text_file((dir / "results.csv").string(), format_csv(results));
  write_text_file((dir / "records.jsonl").string(), format_records(results));
  write_text_file((dir / "audit.jsonl").string(), format_audit(results));
}

}  // namespace argllm
