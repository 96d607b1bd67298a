#pragma once

// Umbrella header for the aspect-ratio-aware re-identification toolkit.

#include "arpatch/common.hpp"
#include "arpatch/config.hpp"
#include "arpatch/corpus.hpp"
#include "arpatch/feature_store.hpp"
#include "arpatch/fusion.hpp"
#include "arpatch/image.hpp"
#include "arpatch/image_io.hpp"
#include "arpatch/kmeans.hpp"
#include "arpatch/losses.hpp"
#include "arpatch/patch_mixup.hpp"
#include "arpatch/patchify.hpp"
#include "arpatch/pipeline.hpp"
#include "arpatch/reid_eval.hpp"
#include "arpatch/resize.hpp"
#include "arpatch/resize_plan.hpp"
#include "arpatch/rng.hpp"
#include "arpatch/synthetic.hpp"
#include "arpatch/vit.hpp"
