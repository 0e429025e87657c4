#ifndef AISEL_AISEL_HPP
#define AISEL_AISEL_HPP

#include "aisel/error.hpp"
#include "aisel/json_util.hpp"
#include "aisel/random.hpp"
#include "aisel/types.hpp"

#include "aisel/nn/checkpoint.hpp"
#include "aisel/nn/loss.hpp"
#include "aisel/nn/matrix.hpp"
#include "aisel/nn/network.hpp"
#include "aisel/nn/optimizer.hpp"

#include "aisel/gin/gin.hpp"
#include "aisel/gin/persist.hpp"

#include "aisel/uncertainty/classifier.hpp"
#include "aisel/uncertainty/entropy.hpp"
#include "aisel/uncertainty/metrics.hpp"
#include "aisel/uncertainty/pool.hpp"

#include "aisel/sampler/baselines.hpp"
#include "aisel/sampler/ccp.hpp"
#include "aisel/sampler/design.hpp"

#include "aisel/pipeline/artifacts.hpp"
#include "aisel/pipeline/blobs.hpp"
#include "aisel/pipeline/config.hpp"
#include "aisel/pipeline/dataset.hpp"
#include "aisel/pipeline/idx.hpp"
#include "aisel/pipeline/oracle.hpp"
#include "aisel/pipeline/run.hpp"

#endif
