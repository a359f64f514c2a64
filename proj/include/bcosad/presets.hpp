#pragma once

#include "bcosad/pipeline.hpp"
#include "bcosad/synthetic.hpp"

namespace bcosad {

/// Run settings used with the default synthetic benchmark (also shipped as
/// configs/synthetic.ini): hidden {16, 8}, B = 2.5 in every layer, Adam at
/// 0.003 for 300 epochs in batches of 16.
RunConfig synthetic_run_config(std::uint64_t seed = 101);

}  // namespace bcosad
