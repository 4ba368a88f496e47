// Verifies a claim with the offline backend, then weakens the strongest
// attacker of the claim and shows how the verdict responds.

#include <iostream>

#include "argllm/contestation.hpp"
#include "argllm/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace argllm;
  const std::string text = argc > 1 ? argv[1] : "Octopuses have three hearts.";

  MockBackend backend(42);
  MethodConfig config;
  config.generation.depth = 2;
  Verdict v = verify_argllm({"demo", text, {}, {}}, config, backend);

  std::cout << v.method << ": " << (v.label ? "True" : "False") << " (" << v.root_strength << ")\n";
  const Qbaf& q = *v.qbaf;
  for (const auto& a : q.arguments())
    std::cout << "  " << a.id.value << "  tau=" << a.tau() << "  sigma=" << v.strengths->at(a.id) << '\n';

  // Pick the direct attacker with the highest strength and halve its base score.
  std::optional<ArgumentId> strongest;
  for (const auto& id : attackers(q, q.root()))
    if (!strongest || v.strengths->at(id) > v.strengths->at(*strongest)) strongest = id;
  if (!strongest) return 0;

  auto r = apply_edit(q, ContestationEdit::set_score(*strongest, q.at(*strongest).tau() / 2), config.semantics);
  std::cout << to_json(r.diff).dump(2) << '\n';
}
