#pragma once

#include <limits>

#include "hcad/core/error.hpp"

namespace hcad::train {

struct CallbackConfig {
    int early_stop_patience = 8;
    double lr_reduce_factor = 0.5;
    int lr_reduce_patience = 3;
    double min_learning_rate = 0.0;

    void validate() const {
        if (early_stop_patience < 1 || lr_reduce_patience < 1) {
            throw Error(ErrorKind::Config, "callback patiences must be >= 1");
        }
        if (!(lr_reduce_factor > 0.0 && lr_reduce_factor < 1.0)) {
            throw Error(ErrorKind::Config, "lr_reduce_factor must lie in (0,1)");
        }
    }
};

struct EpochDecision {
    bool improved = false;   // new best validation loss: checkpoint now
    bool reduce_lr = false;  // multiply the learning rate by the factor
    bool stop = false;       // end training after this epoch
};

/// Early stopping plus reduce-on-plateau, both watching validation loss.
/// An epoch improves only if its loss is strictly below the best so far. Each
/// callback counts stagnant epochs separately; the plateau counter restarts
/// after every reduction.
class PlateauCallbacks {
public:
    explicit PlateauCallbacks(CallbackConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    EpochDecision on_epoch_end(double val_loss) {
        EpochDecision d;
        if (val_loss < best_) {
            best_ = val_loss;
            stop_wait_ = 0;
            lr_wait_ = 0;
            d.improved = true;
            return d;
        }
        if (++lr_wait_ >= cfg_.lr_reduce_patience) {
            d.reduce_lr = true;
            lr_wait_ = 0;
        }
        if (++stop_wait_ >= cfg_.early_stop_patience) d.stop = true;
        return d;
    }

    double best() const { return best_; }
    const CallbackConfig& config() const { return cfg_; }

private:
    CallbackConfig cfg_;
    double best_ = std::numeric_limits<double>::infinity();
    int stop_wait_ = 0;
    int lr_wait_ = 0;
};

}  // namespace hcad::train
