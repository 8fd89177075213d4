#pragma once

#include <string>
#include <vector>

#include "semsal/knowledge.hpp"
#include "semsal/metrics.hpp"
#include "semsal/random.hpp"

namespace semsal::testing {

/// Random rooted tree over nodes "n0".."n{count-1}" with root "n0"; each node
/// hangs under a uniformly chosen earlier node.
Taxonomy random_taxonomy(Rng& rng, std::size_t count);

/// Records of 0-4 labels drawn from `labels`, with repeats allowed.
CooccurrenceCorpus random_corpus(Rng& rng, const std::vector<std::string>& labels, std::size_t records);

/// Uniform random map and fixations inside it.
metrics::Map random_map(Rng& rng, std::size_t width, std::size_t height);
metrics::FixationSet random_fixations(Rng& rng, std::size_t width, std::size_t height, std::size_t count);

}  // namespace semsal::testing
