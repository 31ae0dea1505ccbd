#pragma once

#include <string>

#include "flare/sampler/trace.hpp"

namespace flare::sampler {

// {"params":[{name,shape,constraint}], "chains":C, "draws":N,
//  "samples":{name:[chain][draw]}, "log_lik":[chain][draw][obs] or null,
//  "stats":{divergences, step_size, tree_depth}}
// Non-scalar parameters store a flat row-major array per draw.
std::string to_json(const Trace& trace);

// Throws ValidationError on malformed documents.
Trace from_json(const std::string& text);

}  // namespace flare::sampler
