#include "gmsplit/optim.hpp"

#include <cmath>

namespace gmsplit {

double OptimizerConfig::lr_at(double epoch_fraction) const {
    if (schedule == LrSchedule::Cosine) {
        return learning_rate * (1.0 + std::cos(3.141592653589793238462643383 * epoch_fraction)) / 2.0;
    }
    return learning_rate;
}

void sgd_step(Parameter& param, const OptimizerConfig& cfg, double epoch_fraction) {
    const double lr = cfg.lr_at(epoch_fraction);
    for (std::size_t i = 0; i < param.value.size(); ++i) {
        const double g = param.grad[i] + cfg.weight_decay * param.value[i];
        param.momentum[i] = cfg.momentum * param.momentum[i] + g;
        param.value[i] -= lr * param.momentum[i];
    }
}

void sgd_step(ParamBundle& bundle, const OptimizerConfig& cfg, double epoch_fraction) {
    for (auto& p : bundle.params) sgd_step(p, cfg, epoch_fraction);
}

}  // namespace gmsplit
