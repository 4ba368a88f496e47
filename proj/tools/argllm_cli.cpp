// Command-line entry point.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage error, 3 property counterexample.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "argllm/contestation.hpp"
#include "argllm/harness.hpp"
#include "argllm/llm_client.hpp"
#include "argllm/pipeline.hpp"
#include "argllm/service.hpp"

using namespace argllm;

namespace {

constexpr int kOk = 0, kRuntime = 1, kUsage = 2, kCounterexample = 3;

struct BackendFlags {
  bool mock = false;
  std::uint64_t seed = 0;
  std::string endpoint;
  std::string model;
  std::string cache_dir;
  bool no_cache = false;
  std::string templates_dir;

  void attach(CLI::App& sub) {
    sub.add_flag("--mock", mock, "Use the deterministic offline backend");
    sub.add_option("--seed", seed, "Seed for the mock backend and for sampling");
    sub.add_option("--endpoint", endpoint, "Chat-completions URL (default: $ARGLLM_ENDPOINT or OpenAI)");
    sub.add_option("--model", model, "Model name (default: $ARGLLM_MODEL or gpt-4o-mini)");
    sub.add_option("--cache-dir", cache_dir, "Response cache directory (default: $ARGLLM_CACHE_DIR)");
    sub.add_flag("--no-cache", no_cache, "Bypass cache reads (responses are still stored)");
    sub.add_option("--templates", templates_dir, "Directory of prompt template overrides");
  }

  /// `cache_by_default` is true for batch work and false for the service.
  std::shared_ptr<Backend> make(bool cache_by_default) const {
    if (mock) return std::make_shared<MockBackend>(seed);
    ModelConfig mc = model_config_from_env();
    if (!endpoint.empty()) mc.endpoint_url = endpoint;
    if (!model.empty()) mc.model_name = model;
    std::shared_ptr<ResponseCache> cache;
    if (!cache_dir.empty() || cache_by_default)
      cache = std::make_shared<ResponseCache>(cache_dir.empty() ? default_cache_dir() : cache_dir);
    return std::make_shared<LlmBackend>(std::make_shared<LlmClient>(mc, cache, CachePolicy{!no_cache, true}));
  }

  TemplateSet templates() const {
    return templates_dir.empty() ? TemplateSet::builtin() : TemplateSet::from_directory(templates_dir);
  }
};

struct MethodFlags {
  std::string method = "argllm";
  std::string semantics = "df-quad";
  int depth = 1;
  std::string base_mode = "fixed";
  int supporters = 1;
  int attackers = 1;

  void attach(CLI::App& sub) {
    sub.add_option("--method", method, "argllm, direct_question, est_confidence or chain_of_thought");
    sub.add_option("--semantics", semantics, "df-quad or qem");
    sub.add_option("--depth", depth, "Argument tree depth");
    sub.add_option("--base-mode", base_mode, "Claim base score: fixed (0.5) or estimated");
    sub.add_option("--supporters", supporters, "Supporters generated per argument");
    sub.add_option("--attackers", attackers, "Attackers generated per argument");
  }

  MethodConfig config() const {
    return method_config_from_json(Json{{"method", method},
                                        {"semantics", semantics},
                                        {"depth", depth},
                                        {"base_mode", base_mode},
                                        {"supporters", supporters},
                                        {"attackers", attackers}});
  }
};

std::string fixed(double v, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const char* truth(bool b) { return b ? "True" : "False"; }

void print_tree(std::ostream& os, const Qbaf& q, const StrengthMap& s) {
  auto visit = [&](auto&& self, std::size_t i, int depth, const char* mark) -> void {
    const Argument& a = q.arguments()[i];
    os << std::string(2 * depth, ' ') << mark << a.id.value << "  tau=" << fixed(a.tau(), 4)
       << " sigma=" << fixed(s.at(a.id), 4) << "  " << a.text << '\n';
    for (auto r : q.incoming(i)) {
      const Relation& rel = q.relations()[r];
      self(self, q.index_of(rel.source), depth + 1, rel.polarity == Polarity::support ? "+ " : "- ");
    }
  };
  visit(visit, q.index_of(q.root()), 0, "");
}

void print_diff(std::ostream& os, const ContestationDiff& d) {
  os << "edit: " << to_json(d.edit).dump() << '\n'
     << "  root strength " << fixed(d.before_root) << " -> " << fixed(d.after_root) << " (change "
     << fixed(d.observed_change()) << ")\n"
     << "  label " << truth(d.before_label) << " -> " << truth(d.after_label) << (d.flipped() ? "  [flipped]" : "")
     << '\n'
     << "  predicted " << to_string(d.predicted) << ", " << (d.consistent() ? "consistent" : "INCONSISTENT") << '\n';
}

std::vector<MethodConfig> methods_from(const std::string& list, const MethodFlags& base) {
  const SemanticsId sem = base.config().semantics;
  std::vector<MethodConfig> out;
  std::stringstream ss(list);
  for (std::string tok; std::getline(ss, tok, ',');) {
    auto baseline = [&](Method m) { out.push_back(MethodConfig::baseline(m)); };
    if (tok == "all" || tok == "baselines") {
      baseline(Method::direct_question);
      baseline(Method::est_confidence);
      baseline(Method::chain_of_thought);
    }
    if (tok == "all" || tok == "argllm") {
      for (auto& v : MethodConfig::argllm_variants(sem)) out.push_back(v);
      continue;
    }
    if (tok == "all" || tok == "baselines") continue;
    auto m = parse_method(tok);
    if (!m) throw Error(ErrorCode::precondition, "unknown method '" + tok + "'");
    baseline(*m);
  }
  if (out.empty()) throw Error(ErrorCode::precondition, "no methods selected");
  return out;
}

void report_client(const Backend& backend) {
  if (auto* llm = dynamic_cast<const LlmBackend*>(&backend)) {
    auto& client = const_cast<LlmBackend*>(llm)->client();
    std::cerr << "network calls: " << client.network_calls() << ", cache hits: " << client.cache_hits() << '\n';
  }
}

bool is_usage(ErrorCode c) {
  switch (c) {
    case ErrorCode::precondition:
    case ErrorCode::parse_error:
    case ErrorCode::missing_field:
    case ErrorCode::malformed_edit:
    case ErrorCode::unknown_template:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Argumentative claim verification"};
  app.require_subcommand(1);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Verify one claim");
  std::string claim, context, dump_path;
  bool as_json = false;
  BackendFlags vb;
  MethodFlags vm;
  verify_cmd->add_option("claim", claim, "Claim text")->required();
  verify_cmd->add_option("--context", context, "Background information the claim is conditioned on");
  verify_cmd->add_option("--dump", dump_path, "Write the framework document to this file");
  verify_cmd->add_flag("--json", as_json, "Print the verdict as JSON");
  vb.attach(*verify_cmd);
  vm.attach(*verify_cmd);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Run methods over a dataset");
  std::string dataset_path, methods_list = "all", out_dir = "results";
  std::size_t sample = 0, concurrency = 1;
  BackendFlags eb;
  MethodFlags em;
  eval_cmd->add_option("dataset", dataset_path, "Line-delimited claim file")->required();
  eval_cmd->add_option("--methods", methods_list, "Comma list: all, baselines, argllm or a method name");
  eval_cmd->add_option("--sample", sample, "Label-balanced sample size (0: whole dataset)");
  eval_cmd->add_option("--out", out_dir, "Output directory");
  eval_cmd->add_option("--concurrency", concurrency, "Claims in flight");
  eb.attach(*eval_cmd);
  eval_cmd->add_option("--semantics", em.semantics, "Semantics for the argumentative variants");

  // contest
  auto* contest_cmd = app.add_subcommand("contest", "Apply scripted edits to a framework");
  std::string framework_path, edits_path, contest_sem = "df-quad", contest_out;
  bool contest_json = false;
  contest_cmd->add_option("framework", framework_path, "Framework document")->required();
  contest_cmd->add_option("edits", edits_path, "Edits document")->required();
  contest_cmd->add_option("--semantics", contest_sem, "df-quad or qem");
  contest_cmd->add_option("--out", contest_out, "Write the edited framework to this file");
  contest_cmd->add_flag("--json", contest_json, "Print diffs as JSON lines");

  // check-properties
  auto* props_cmd = app.add_subcommand("check-properties", "Randomized contestability and monotonicity checks");
  std::string props_sem = "all";
  std::size_t trials = 10000;
  std::uint64_t props_seed = 0;
  props_cmd->add_option("--semantics", props_sem, "df-quad, qem or all");
  props_cmd->add_option("--trials", trials, "Random trials per check");
  props_cmd->add_option("--seed", props_seed, "Random seed");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  std::string host = "127.0.0.1", snapshot_dir;
  int port = 8080;
  bool cors = false;
  BackendFlags sb;
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port");
  serve_cmd->add_option("--snapshot-dir", snapshot_dir, "Persist sessions here and restore them on start");
  serve_cmd->add_flag("--cors", cors, "Allow cross-origin requests");
  sb.attach(*serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*verify_cmd) {
      const MethodConfig cfg = vm.config();
      auto backend = vb.make(true);
      Claim c{"cli", claim, std::nullopt, std::nullopt};
      if (!context.empty()) c.context = context;
      Verdict v = verify(c, cfg, *backend, vb.templates());
      if (as_json) {
        std::cout << verdict_to_json(v).dump(2) << '\n';
      } else {
        std::cout << "method: " << v.method << '\n';
        if (v.qbaf) {
          std::cout << "arguments: " << v.qbaf->size() << '\n';
          print_tree(std::cout, *v.qbaf, *v.strengths);
        }
        std::cout << "label: " << truth(v.label) << " (root strength " << fixed(v.root_strength) << ")\n";
        for (const auto& w : v.transcript.warnings()) std::cout << "warning: " << w << '\n';
      }
      if (!dump_path.empty()) {
        if (!v.qbaf) throw Error(ErrorCode::precondition, "--dump needs the argllm method");
        write_text_file(dump_path, to_document(*v.qbaf, {*v.strengths}).dump(2) + "\n");
      }
      report_client(*backend);
      return kOk;
    }

    if (*eval_cmd) {
      Dataset ds = load_dataset(dataset_path);
      auto methods = methods_from(methods_list, em);
      auto backend = eb.make(true);
      RunOptions opts;
      if (sample) opts.sample = sample;
      opts.seed = eb.seed;
      opts.concurrency = concurrency;
      auto results = run(ds, methods, *backend, opts, eb.templates());
      write_outputs(results, out_dir);
      std::cout << format_table(results);
      report_client(*backend);
      return kOk;
    }

    if (*contest_cmd) {
      auto sem = parse_semantics(contest_sem);
      if (!sem) throw Error(ErrorCode::precondition, "unknown semantics '" + contest_sem + "'");
      Qbaf q = load_qbaf(framework_path);
      require_valid(q);
      auto edits = edits_from_json(parse_json_text(read_text_file(edits_path), edits_path));
      for (const auto& e : edits) {
        EditResult r = apply_edit(q, e, *sem);
        if (contest_json) std::cout << to_json(r.diff).dump() << '\n';
        else print_diff(std::cout, r.diff);
        q = std::move(r.qbaf);
      }
      if (!contest_out.empty()) write_text_file(contest_out, to_document(q, {evaluate(q, *sem)}).dump(2) + "\n");
      return kOk;
    }

    if (*props_cmd) {
      std::vector<SemanticsId> sems;
      if (props_sem == "all") sems = {SemanticsId::df_quad, SemanticsId::qem};
      else if (auto s = parse_semantics(props_sem)) sems = {*s};
      else throw Error(ErrorCode::precondition, "unknown semantics '" + props_sem + "'");
      if (trials == 0) throw Error(ErrorCode::precondition, "--trials must be at least 1");
      bool ok = true;
      for (auto s : sems) {
        auto p = check_properties(s, trials, props_seed);
        auto m = check_monotonicity(s, trials, props_seed);
        std::cout << "contestability: " << p.summary() << '\n' << "monotonicity:   " << m.summary() << '\n';
        for (const auto& c : p.counterexamples) std::cout << "  counterexample: " << c << '\n';
        ok = ok && p.ok() && m.ok();
        if (s == SemanticsId::df_quad) {
          auto [q, e] = df_quad_saturation_witness();
          auto r = apply_edit(q, e, s);
          std::cout << "  non-strict witness: " << fixed(r.diff.before_root) << " -> " << fixed(r.diff.after_root)
                    << (r.diff.before_root == r.diff.after_root ? " (equal: weak only)" : "") << '\n';
        }
      }
      std::cout << (ok ? "PASS" : "FAIL") << '\n';
      return ok ? kOk : kCounterexample;
    }

    if (*serve_cmd) {
      ServiceConfig cfg;
      cfg.backend = sb.make(false);
      cfg.templates = sb.templates();
      cfg.cors = cors;
      if (!snapshot_dir.empty()) cfg.snapshot_dir = snapshot_dir;
      Service service(std::move(cfg));
      std::cerr << "listening on " << host << ':' << port << '\n';
      return service.listen(host, port) ? kOk : kRuntime;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_usage(e.code()) ? kUsage : kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
