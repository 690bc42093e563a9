#pragma once

#include <functional>
#include <string>

#include "gmsplit/param.hpp"

namespace gmsplit {

enum class LrSchedule { Constant, Cosine };

struct OptimizerConfig {
    double learning_rate = 0.2;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::size_t batch_size = 16;
    LrSchedule schedule = LrSchedule::Cosine;

    // lr(t) with t = fraction of training elapsed in [0, 1]
    double lr_at(double epoch_fraction) const;
};

// SGD with momentum and decoupled-from-nothing classic weight decay:
//   v <- m*v + g + wd*w ;  w <- w - lr(t)*v
void sgd_step(Parameter& param, const OptimizerConfig& cfg, double epoch_fraction);
void sgd_step(ParamBundle& bundle, const OptimizerConfig& cfg, double epoch_fraction);

}  // namespace gmsplit
