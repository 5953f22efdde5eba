#pragma once

#include "hcad/clip/sampler.hpp"
#include "hcad/core/binary_io.hpp"
#include "hcad/core/error.hpp"
#include "hcad/core/image.hpp"
#include "hcad/core/manifest.hpp"
#include "hcad/core/netpbm.hpp"
#include "hcad/core/parallel.hpp"
#include "hcad/core/random.hpp"
#include "hcad/core/text.hpp"
#include "hcad/core/track_log.hpp"
#include "hcad/core/types.hpp"
#include "hcad/eval/confusion.hpp"
#include "hcad/eval/curves.hpp"
#include "hcad/eval/metrics.hpp"
#include "hcad/eval/report.hpp"
#include "hcad/features/backbone.hpp"
#include "hcad/features/feature_cache.hpp"
#include "hcad/model/adam.hpp"
#include "hcad/model/checkpoint.hpp"
#include "hcad/model/classifier.hpp"
#include "hcad/model/lstm.hpp"
#include "hcad/model/params.hpp"
#include "hcad/pipeline/config.hpp"
#include "hcad/pipeline/fixture.hpp"
#include "hcad/pipeline/hash.hpp"
#include "hcad/pipeline/stages.hpp"
#include "hcad/suppress/gaussian.hpp"
#include "hcad/suppress/suppressor.hpp"
#include "hcad/tracking/assignment.hpp"
#include "hcad/tracking/byte_tracker.hpp"
#include "hcad/tracking/iou.hpp"
#include "hcad/tracking/kalman.hpp"
#include "hcad/train/balance.hpp"
#include "hcad/train/batches.hpp"
#include "hcad/train/callbacks.hpp"
#include "hcad/train/split.hpp"
#include "hcad/train/trainer.hpp"
#include "hcad/train/trials.hpp"
