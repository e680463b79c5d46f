#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dssn/dataset.hpp"
#include "dssn/losses.hpp"
#include "dssn/model.hpp"
#include "dssn/optim.hpp"

namespace dssn {

class DivergenceError : public Error {
public:
    using Error::Error;
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean step loss per epoch
    std::vector<double> step_loss;
    int steps = 0;
};

struct TrainHooks {
    // Called after every epoch with (epoch index, mean loss).
    std::function<void(int, double)> on_epoch;
};

LossSwitches loss_switches(const TrainConfig& cfg);

// Nadam with a cosine schedule over epochs * ceil(n / batch) steps. Samples
// must already be at cfg.side. A non-finite value anywhere in a step aborts
// with DivergenceError.
TrainResult train(DssnModel<float>& model, const Dataset& data, const TrainConfig& cfg, const TrainHooks& hooks = {});

// Loss of the model on one batch without updating anything.
double evaluate_loss(const DssnModel<float>& model, const std::vector<const Sample*>& batch,
                     const LossSwitches& switches);

// Header: magic, config hash, model config, one line per parameter name and
// shape, "end_header"; then float32 little-endian values in the same order.
void save_checkpoint(const std::filesystem::path& path, const DssnModel<float>& model);
std::unique_ptr<DssnModel<float>> load_checkpoint(const std::filesystem::path& path);

std::uint64_t config_hash(const ModelConfig& cfg);

}  // namespace dssn
