#include "bcosad/presets.hpp"

namespace bcosad {

RunConfig synthetic_run_config(std::uint64_t seed) {
    RunConfig rc;
    rc.hidden_dims = {16, 8};
    rc.b_per_layer.assign(rc.hidden_dims.size() + 1, 2.5);
    rc.train.optimizer = Optimizer::Adam;
    rc.train.learning_rate = 0.003;
    rc.train.batch_size = 16;
    rc.train.epochs = 300;
    rc.seed = seed;
    return rc;
}

}  // namespace bcosad
