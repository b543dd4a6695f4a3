// Deterministic toy corpus with four event subtypes and five roles, used as
// the overfitting and ablation fixture.
#ifndef JEESDP_SYNTHETIC_HPP_
#define JEESDP_SYNTHETIC_HPP_

#include <cstdint>

#include "jeesdp/corpus.hpp"

namespace jeesdp {

struct SyntheticOptions {
  int sentences = 50;
  int max_tokens = 20;
  std::uint64_t seed = 20;
};

// Sentences are one to three coordinated clauses. Each clause is headed by
// its verb; subjects, objects, and prepositional phrases attach to it, so
// role fillers sit a fixed number of hops from their trigger. Some sentences
// carry no event, and "of X" / "from X" phrases add entities that fill no
// role.
Corpus synthetic_corpus(const SyntheticOptions& options = {});

}  // namespace jeesdp

#endif  // JEESDP_SYNTHETIC_HPP_
